"""Numeric primitives shared by every other module.

Beta CDF / tail probabilities and log-gamma are delegated to scipy's
cephes routines (continued fraction with the symmetry switch at
x = (a+1)/(a+b+2)), wrapped with the domain checks the rest of the
package relies on.  Random draws come from counter-based Philox
streams so that every simulation replicate owns an independent,
reproducible stream keyed by (seed, stream id).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special


@dataclass(frozen=True)
class BetaParams:
    """Hyperparameter pair (a, b) of one dose's Beta prior/posterior."""

    a: float
    b: float

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise ValueError(f"Beta hyperparameters must be positive, got ({self.a}, {self.b})")

    def mean(self) -> float:
        return self.a / (self.a + self.b)

    def ess(self) -> float:
        return self.a + self.b


def log_gamma(x: float) -> float:
    """ln Gamma(x) for x > 0."""
    if not x > 0:
        raise ValueError(f"log_gamma requires x > 0, got {x}")
    return float(special.gammaln(x))


def beta_cdf(x: float, p: BetaParams) -> float:
    """Regularized incomplete beta I_x(a, b)."""
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"beta_cdf requires x in [0, 1], got {x}")
    return float(special.betainc(p.a, p.b, x))


def beta_tail(x: float, p: BetaParams) -> float:
    """P[X > x] for X ~ Beta(a, b), i.e. 1 - I_x(a, b)."""
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"beta_tail requires x in [0, 1], got {x}")
    # betaincc is the complemented function; avoids cancellation near 1.
    return float(special.betaincc(p.a, p.b, x))


class RngStream:
    """Counter-based random stream keyed by (seed, stream id).

    Identical (seed, stream) pairs reproduce the same draw sequence;
    distinct stream ids are statistically independent, so replicate i
    of a simulation uses stream id i.  A single instance must not be
    shared between concurrent tasks; split by stream id instead.
    """

    def __init__(self, seed: int, stream: int = 0):
        self.seed = int(seed)
        self.stream = int(stream)
        key = np.array([self.seed % (1 << 64), self.stream % (1 << 64)], dtype=np.uint64)
        self._gen = np.random.Generator(np.random.Philox(key=key))

    def bernoulli(self, p: float) -> int:
        """One draw: 1 with probability p."""
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"bernoulli requires p in [0, 1], got {p}")
        return int(self._gen.random() < p)

    def uniform(self) -> float:
        return float(self._gen.random())


def bernoulli(p: float, rng: RngStream) -> int:
    return rng.bernoulli(p)
