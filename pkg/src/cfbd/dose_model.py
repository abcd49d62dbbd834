"""Beta hyperparameter grids for one- and two-agent trials.

The extrapolating updates borrow each cohort's outcomes across dose
levels while keeping posterior means monotone (one agent) or
partial-order consistent (two agents).  Because the borrowing grows
the effective sample size unevenly across doses, the calibrated
variant rescales each dose's (a, b) so every dose carries the grid's
average ESS while leaving every mean untouched.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

_MONO_TOL = 1e-12


@dataclass(frozen=True)
class CohortOutcome:
    """One cohort's result: `n` patients treated at `dose`, `t` DLTs seen.

    `dose` is a 1-based index for one-agent trials or a 1-based (i, j)
    pair for two-agent trials.
    """

    dose: int | tuple[int, int]
    n: int
    t: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"cohort must treat at least one patient, got n={self.n}")
        if not 0 <= self.t <= self.n:
            raise ValueError(f"DLT count must satisfy 0 <= t <= n, got t={self.t}, n={self.n}")


class DoseGrid1:
    """Ordered Beta hyperparameters for J >= 2 one-agent dose levels.

    Immutable after construction; updates and calibration return new
    grids.  Posterior means are nondecreasing in the dose index.
    """

    def __init__(self, a: Sequence[float], b: Sequence[float]):
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        if a.ndim != 1 or a.shape != b.shape or a.size < 2:
            raise ValueError("DoseGrid1 needs matching 1-d hyperparameter vectors, J >= 2")
        if not (np.all(a > 0) and np.all(b > 0)):
            raise ValueError("all Beta hyperparameters must be positive")
        means = a / (a + b)
        if np.any(np.diff(means) < -_MONO_TOL):
            raise ValueError("prior means must be nondecreasing in dose")
        self.a = a
        self.a.setflags(write=False)
        self.b = b
        self.b.setflags(write=False)

    @property
    def n_doses(self) -> int:
        return self.a.size

    def means(self) -> np.ndarray:
        return self.a / (self.a + self.b)

    def ess(self) -> np.ndarray:
        return self.a + self.b

    def to_json(self) -> dict:
        return {"doses": [[float(x), float(y)] for x, y in zip(self.a, self.b)]}

    @classmethod
    def from_json(cls, doc: dict) -> "DoseGrid1":
        pairs = doc["doses"]
        return cls([p[0] for p in pairs], [p[1] for p in pairs])

    @classmethod
    def default(cls, n_doses: int, theta0: float, delta0: float,
                ess: float = 1.25) -> "DoseGrid1":
        """Weak default prior: means evenly spaced from theta0/2 to
        theta0 + 2*delta0 with `ess` pseudo-patients per dose.

        The ESS must stay small enough that observed data dominates
        quickly, but a fully flat ESS of 1 leaves untried doses so
        diffuse that their expected utility never beats a well-observed
        low dose and escalation stalls; 1.25 avoids that.
        """
        means = np.linspace(theta0 / 2.0, theta0 + 2.0 * delta0, n_doses)
        return cls(means * ess, (1.0 - means) * ess)


class DoseGrid2:
    """I x J Beta hyperparameter matrix for a two-agent combination trial.

    Cell (i, j) is below (i', j') in the partial order iff i <= i' and
    j <= j' with at least one strict; means respect that order.
    """

    def __init__(self, a, b):
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        if a.ndim != 2 or a.shape != b.shape or min(a.shape) < 2:
            raise ValueError("DoseGrid2 needs matching 2-d hyperparameter matrices, I, J >= 2")
        if not (np.all(a > 0) and np.all(b > 0)):
            raise ValueError("all Beta hyperparameters must be positive")
        means = a / (a + b)
        if (np.any(np.diff(means, axis=0) < -_MONO_TOL)
                or np.any(np.diff(means, axis=1) < -_MONO_TOL)):
            raise ValueError("prior means must respect the partial order")
        self.a = a
        self.a.setflags(write=False)
        self.b = b
        self.b.setflags(write=False)

    @property
    def shape(self) -> tuple[int, int]:
        return self.a.shape

    def means(self) -> np.ndarray:
        return self.a / (self.a + self.b)

    def ess(self) -> np.ndarray:
        return self.a + self.b

    def to_json(self) -> dict:
        return {"rows": [[[float(x), float(y)] for x, y in zip(ra, rb)]
                         for ra, rb in zip(self.a, self.b)]}

    @classmethod
    def from_json(cls, doc: dict) -> "DoseGrid2":
        rows = doc["rows"]
        a = [[c[0] for c in row] for row in rows]
        b = [[c[1] for c in row] for row in rows]
        return cls(a, b)

    @classmethod
    def default(cls, shape: tuple[int, int], theta0: float, delta0: float,
                ess: float = 1.25) -> "DoseGrid2":
        """Weak default prior mirroring the one-agent default: cell
        means rise linearly in i + j from theta0/2 at (1, 1) to
        theta0 + 2*delta0 at (I, J), `ess` pseudo-patients per cell.

        Spanning past theta0 + delta0 matters: if every prior mean sits
        below the acceptable bound, untried cells pass the MTD safety
        screen indefinitely and all-toxic grids are rarely flagged.
        """
        ii, jj = shape
        i = np.arange(1, ii + 1)[:, None]
        j = np.arange(1, jj + 1)[None, :]
        lo, hi = theta0 / 2.0, theta0 + 2.0 * delta0
        means = lo + (hi - lo) * (i + j - 2) / (ii + jj - 2)
        return cls(means * ess, (1.0 - means) * ess)


Ordering = Literal["less", "greater", "equal", "incomparable"]


def dominates(d1: tuple[int, int], d2: tuple[int, int],
              shape: tuple[int, int] | None = None) -> Ordering:
    """Partial order on combination cells (1-based index pairs).

    (i, j) < (i', j') iff i <= i' and j <= j' with a strict increase
    somewhere; reversed for "greater"; identical pairs are "equal";
    anything else is "incomparable".
    """
    if shape is not None:
        for d in (d1, d2):
            if not (1 <= d[0] <= shape[0] and 1 <= d[1] <= shape[1]):
                raise ValueError(f"cell {d} outside grid of shape {shape}")
    if d1 == d2:
        return "equal"
    if d1[0] <= d2[0] and d1[1] <= d2[1]:
        return "less"
    if d1[0] >= d2[0] and d1[1] >= d2[1]:
        return "greater"
    return "incomparable"


def update1(grid: DoseGrid1, outcome: CohortOutcome) -> DoseGrid1:
    """Extrapolating one-agent update after a cohort at dose j'.

    Below j' only non-DLTs are borrowed (b += n - t), at j' the full
    outcome is added, above j' only DLTs are borrowed (a += t).
    """
    j = outcome.dose
    if not isinstance(j, (int, np.integer)) or not 1 <= j <= grid.n_doses:
        raise ValueError(f"dose {outcome.dose} outside 1..{grid.n_doses}")
    k = j - 1
    a = grid.a.copy()
    b = grid.b.copy()
    b[:k + 1] += outcome.n - outcome.t
    a[k:] += outcome.t
    return DoseGrid1(a, b)


def update2(grid: DoseGrid2, outcome: CohortOutcome) -> DoseGrid2:
    """Two-agent analog of update1 over the partial order.

    Cells incomparable to the treated cell are left unchanged.
    """
    dose = outcome.dose
    if (not isinstance(dose, tuple) or len(dose) != 2
            or not (1 <= dose[0] <= grid.shape[0] and 1 <= dose[1] <= grid.shape[1])):
        raise ValueError(f"cell {outcome.dose} outside grid of shape {grid.shape}")
    r, s = dose[0] - 1, dose[1] - 1
    a = grid.a.copy()
    b = grid.b.copy()
    # componentwise <= / >= masks; the treated cell sits in both
    below = np.zeros(grid.shape, dtype=bool)
    below[:r + 1, :s + 1] = True
    above = np.zeros(grid.shape, dtype=bool)
    above[r:, s:] = True
    b[below] += outcome.n - outcome.t
    a[above] += outcome.t
    return DoseGrid2(a, b)


def calibrate1(grid: DoseGrid1) -> DoseGrid1:
    """Rescale every dose's (a, b) to the grid-average ESS.

    Means are preserved exactly: both hyperparameters are divided by
    the same ratio l_j = ESS_j / mean(ESS).
    """
    s = grid.ess().mean()
    l = grid.ess() / s
    return DoseGrid1(grid.a / l, grid.b / l)


def calibrate2(grid: DoseGrid2) -> DoseGrid2:
    """Two-agent analog of calibrate1, averaging ESS over all cells."""
    s = grid.ess().mean()
    l = grid.ess() / s
    return DoseGrid2(grid.a / l, grid.b / l)
