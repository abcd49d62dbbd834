"""Dose assignment, stopping rules, and MTD estimation.

The gain for treating a patient at a dose with DLT probability p is
two-piece linear around the target rate theta0: -alpha0*(theta0 - p)
when underdosed, -eta0*(p - theta0) when overdosed.  Under a
Beta(a, b) posterior the expectation has the closed form

    E[u] = -(alpha0 + eta0) * [theta0*F(theta0; a, b)
                               - a/(a+b) * F(theta0; a+1, b)]
           - eta0 * [a/(a+b) - theta0]

where F is the Beta CDF.  Assignment is one-step-look-ahead: treat
the next cohort at the admissible dose maximizing this expectation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np
from scipy import special

from .dose_model import DoseGrid1, DoseGrid2
from .stats_kernel import BetaParams, beta_tail

StopReason = Literal["none", "max_n", "all_toxic", "mtd_plus_toxic"]


@dataclass(frozen=True)
class DesignConfig:
    theta0: float
    delta0: float
    r1: float = 0.95
    r2: float = 0.95
    alpha0: float = 1.0
    eta0: float = 1.0
    n_min: int = 10
    n_max: int = 24
    cohort_size: int = 1
    calibrate: bool = False
    escalation_constraint: Literal["none", "no-skip"] = "no-skip"

    def __post_init__(self):
        if not 0 < self.theta0 < self.theta0 + self.delta0 < 1:
            raise ValueError("need 0 < theta0 < theta0 + delta0 < 1")
        if not (0 < self.r1 < 1 and 0 < self.r2 < 1):
            raise ValueError("thresholds r1, r2 must lie in (0, 1)")
        if not (self.alpha0 > 0 and self.eta0 > 0):
            raise ValueError("utility weights alpha0, eta0 must be positive")
        if not 1 <= self.n_min <= self.n_max:
            raise ValueError("need 1 <= n_min <= n_max")
        if self.cohort_size < 1:
            raise ValueError("cohort_size must be >= 1")
        if self.escalation_constraint not in ("none", "no-skip"):
            raise ValueError(f"unknown escalation constraint {self.escalation_constraint!r}")

    def to_json(self) -> dict:
        return {
            "theta0": self.theta0, "delta0": self.delta0,
            "r1": self.r1, "r2": self.r2,
            "alpha0": self.alpha0, "eta0": self.eta0,
            "n_min": self.n_min, "n_max": self.n_max,
            "cohort_size": self.cohort_size, "calibrate": self.calibrate,
            "escalation_constraint": self.escalation_constraint,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "DesignConfig":
        return cls(**doc)


@dataclass(frozen=True)
class StopStatus:
    stopped: bool = False
    reason: StopReason = "none"

    def __post_init__(self):
        if self.stopped == (self.reason == "none"):
            raise ValueError("reason must be 'none' exactly when not stopped")


def expected_utility_array(a, b, cfg: DesignConfig) -> np.ndarray:
    """Closed-form expected utility, elementwise over hyperparameter arrays."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    mean = a / (a + b)
    f_ab = special.betainc(a, b, cfg.theta0)
    f_a1b = special.betainc(a + 1.0, b, cfg.theta0)
    return (-(cfg.alpha0 + cfg.eta0) * (cfg.theta0 * f_ab - mean * f_a1b)
            - cfg.eta0 * (mean - cfg.theta0))


def expected_utility(p: BetaParams, cfg: DesignConfig) -> float:
    return float(expected_utility_array(p.a, p.b, cfg))


def admissible1(n_doses: int, highest_tried: int, cfg: DesignConfig) -> np.ndarray:
    """Boolean mask of assignable one-agent doses."""
    ok = np.ones(n_doses, dtype=bool)
    if cfg.escalation_constraint == "no-skip":
        ok[min(highest_tried + 1, n_doses):] = False
    return ok


def select_dose1(grid: DoseGrid1, highest_tried: int, cfg: DesignConfig,
                 utilities: Optional[np.ndarray] = None) -> int:
    """Best-so-far dose (1-based) for the next cohort; ties go low."""
    if utilities is None:
        utilities = expected_utility_array(grid.a, grid.b, cfg)
    ok = admissible1(grid.n_doses, highest_tried, cfg)
    masked = np.where(ok, utilities, -np.inf)
    return int(np.argmax(masked)) + 1


def admissible2(shape: tuple[int, int], tried: np.ndarray, cfg: DesignConfig) -> np.ndarray:
    """Boolean mask of assignable combination cells.

    Under no-skip a cell is admissible once tried, or when each of its
    immediate predecessors along the two agent axes has been tried.
    """
    if cfg.escalation_constraint == "none":
        return np.ones(shape, dtype=bool)
    ok = tried.copy()
    pred_i = np.ones(shape, dtype=bool)
    pred_i[1:, :] = tried[:-1, :]
    pred_j = np.ones(shape, dtype=bool)
    pred_j[:, 1:] = tried[:, :-1]
    return ok | (pred_i & pred_j)


def _cell_order(shape: tuple[int, int]) -> list[tuple[int, int]]:
    """0-based cells ordered by the tie-break: smaller i+j, then smaller i."""
    ii, jj = shape
    return sorted(((i, j) for i in range(ii) for j in range(jj)),
                  key=lambda c: (c[0] + c[1], c[0]))


def select_dose2(grid: DoseGrid2, tried: np.ndarray, cfg: DesignConfig,
                 utilities: Optional[np.ndarray] = None) -> tuple[int, int]:
    """Best-so-far combination cell (1-based pair) for the next cohort."""
    if utilities is None:
        utilities = expected_utility_array(grid.a, grid.b, cfg)
    ok = admissible2(grid.shape, tried, cfg)
    best = None
    best_u = -np.inf
    for i, j in _cell_order(grid.shape):
        if ok[i, j] and utilities[i, j] > best_u:
            best, best_u = (i, j), utilities[i, j]
    if best is None:
        raise RuntimeError("no admissible cell")
    return (best[0] + 1, best[1] + 1)


def estimate_mtd1(grid: DoseGrid1, cfg: DesignConfig,
                  utilities: Optional[np.ndarray] = None) -> Optional[int]:
    """MTD estimate: utility argmax among doses with posterior mean at
    most theta0 + delta0, or None when every dose screens out."""
    if utilities is None:
        utilities = expected_utility_array(grid.a, grid.b, cfg)
    safe = grid.means() <= cfg.theta0 + cfg.delta0
    if not safe.any():
        return None
    masked = np.where(safe, utilities, -np.inf)
    return int(np.argmax(masked)) + 1


def estimate_mtd2(grid: DoseGrid2, cfg: DesignConfig,
                  utilities: Optional[np.ndarray] = None) -> Optional[tuple[int, int]]:
    """Two-agent MTD estimate with the (i+j, i) tie-break."""
    if utilities is None:
        utilities = expected_utility_array(grid.a, grid.b, cfg)
    safe = grid.means() <= cfg.theta0 + cfg.delta0
    best = None
    best_u = -np.inf
    for i, j in _cell_order(grid.shape):
        if safe[i, j] and utilities[i, j] > best_u:
            best, best_u = (i, j), utilities[i, j]
    return None if best is None else (best[0] + 1, best[1] + 1)


def check_stop1(grid: DoseGrid1, n_total: int, mtd: Optional[int],
                cfg: DesignConfig) -> StopStatus:
    """One-agent stopping rules; the sample-size rules dominate.

    Before n_min nothing can stop the trial except the n_max cap; past
    n_min the trial stops when the lowest dose is too toxic (all-toxic)
    or when the dose just above the current MTD estimate is too toxic.
    """
    if n_total >= cfg.n_max:
        return StopStatus(True, "max_n")
    if n_total < cfg.n_min:
        return StopStatus()
    bound = cfg.theta0 + cfg.delta0
    if beta_tail(bound, BetaParams(grid.a[0], grid.b[0])) > cfg.r1:
        return StopStatus(True, "all_toxic")
    # MTD+ is the next higher dose; with no safe dose it falls back to dose 1
    mtd_plus = 1 if mtd is None else mtd + 1
    if mtd_plus <= grid.n_doses:
        if beta_tail(bound, BetaParams(grid.a[mtd_plus - 1], grid.b[mtd_plus - 1])) > cfg.r2:
            return StopStatus(True, "mtd_plus_toxic")
    return StopStatus()


def _minimal_above(mtd: Optional[tuple[int, int]], shape: tuple[int, int]) -> list[tuple[int, int]]:
    """Minimal cells strictly above the MTD estimate in the partial order."""
    if mtd is None:
        return [(1, 1)]
    r, s = mtd
    out = []
    if r + 1 <= shape[0]:
        out.append((r + 1, s))
    if s + 1 <= shape[1]:
        out.append((r, s + 1))
    return out


def check_stop2(grid: DoseGrid2, n_total: int, mtd: Optional[tuple[int, int]],
                cfg: DesignConfig) -> StopStatus:
    """Two-agent stopping rules: cell (1,1) drives the all-toxic rule;
    the MTD+ rule takes the min tail over the minimal cells above the
    current MTD estimate."""
    if n_total >= cfg.n_max:
        return StopStatus(True, "max_n")
    if n_total < cfg.n_min:
        return StopStatus()
    bound = cfg.theta0 + cfg.delta0
    if beta_tail(bound, BetaParams(grid.a[0, 0], grid.b[0, 0])) > cfg.r1:
        return StopStatus(True, "all_toxic")
    above = _minimal_above(mtd, grid.shape)
    if above:
        tails = [beta_tail(bound, BetaParams(grid.a[i - 1, j - 1], grid.b[i - 1, j - 1]))
                 for i, j in above]
        if min(tails) > cfg.r2:
            return StopStatus(True, "mtd_plus_toxic")
    return StopStatus()
