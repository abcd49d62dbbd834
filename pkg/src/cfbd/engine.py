"""Sequential trial state machine.

One TrialState tracks a single trial, real or simulated: the running
hyperparameter grid, per-dose treatment tallies, the recommended dose
for the next cohort, and an append-only event log from which the
state can be replayed exactly.  All mutation goes through
report_cohort; once the trial stops the state is frozen.
"""

from __future__ import annotations

import json
from typing import Optional, Union

import numpy as np

from . import decision, dose_model
from .decision import DesignConfig, StopStatus
from .dose_model import CohortOutcome, DoseGrid1, DoseGrid2

SCHEMA_VERSION = 1

Dose = Union[int, tuple[int, int]]


class ProtocolError(ValueError):
    """Outcome reported at a dose other than the assigned one."""


class StateError(RuntimeError):
    """Operation invalid for the trial's current lifecycle stage."""


class TrialState:
    def __init__(self, cfg: DesignConfig, grid: DoseGrid1 | DoseGrid2):
        self.cfg = cfg
        self.two_agent = isinstance(grid, DoseGrid2)
        self.initial_grid = grid
        if cfg.calibrate:
            grid = dose_model.calibrate2(grid) if self.two_agent else dose_model.calibrate1(grid)
        self.grid = grid
        shape = grid.shape if self.two_agent else (grid.n_doses,)
        self.n_per_dose = np.zeros(shape, dtype=np.int64)
        self.t_per_dose = np.zeros(shape, dtype=np.int64)
        self.n_total = 0
        self.current_dose: Dose = (1, 1) if self.two_agent else 1
        self.highest_tried = 0  # one-agent only
        self.tried = np.zeros(shape, dtype=bool) if self.two_agent else None
        self.cohort_log: list[CohortOutcome] = []
        self.events: list[dict] = []
        self.stop = StopStatus()
        self.mtd: Optional[Dose] = None
        self.recommendation: Optional[Dose] = None

    # -- queries ----------------------------------------------------

    @property
    def stopped(self) -> bool:
        return self.stop.stopped

    def next_cohort_size(self) -> int:
        """Cohort size expected next; the final cohort is truncated so
        the trial lands exactly on n_max."""
        return min(self.cfg.cohort_size, self.cfg.n_max - self.n_total)

    # -- mutation ---------------------------------------------------

    def _counts_index(self, dose: Dose):
        if self.two_agent:
            return (dose[0] - 1, dose[1] - 1)
        return dose - 1

    def report_cohort(self, outcome: CohortOutcome) -> "TrialState":
        if self.stopped:
            raise StateError("trial already stopped")
        if outcome.dose != self.current_dose:
            raise ProtocolError(
                f"outcome reported at dose {outcome.dose}, expected {self.current_dose}")
        expected_n = self.next_cohort_size()
        if outcome.n != expected_n:
            raise ProtocolError(f"cohort size must be {expected_n}, got {outcome.n}")

        if self.two_agent:
            self.grid = dose_model.update2(self.grid, outcome)
        else:
            self.grid = dose_model.update1(self.grid, outcome)
        self.events.append({"kind": "updated", "dose": _dose_json(outcome.dose),
                            "n": outcome.n, "t": outcome.t})

        if self.cfg.calibrate:
            pre = [float(x) for x in np.ravel(self.grid.ess())]
            self.grid = (dose_model.calibrate2(self.grid) if self.two_agent
                         else dose_model.calibrate1(self.grid))
            post = [float(x) for x in np.ravel(self.grid.ess())]
            self.events.append({"kind": "calibrated", "ess_pre": pre, "ess_post": post})

        idx = self._counts_index(outcome.dose)
        self.n_per_dose[idx] += outcome.n
        self.t_per_dose[idx] += outcome.t
        self.n_total += outcome.n
        self.cohort_log.append(outcome)
        if self.two_agent:
            self.tried[idx] = True
        else:
            self.highest_tried = max(self.highest_tried, outcome.dose)

        utilities = decision.expected_utility_array(self.grid.a, self.grid.b, self.cfg)
        if self.two_agent:
            self.mtd = decision.estimate_mtd2(self.grid, self.cfg, utilities)
            self.stop = decision.check_stop2(self.grid, self.n_total, self.mtd, self.cfg)
        else:
            self.mtd = decision.estimate_mtd1(self.grid, self.cfg, utilities)
            self.stop = decision.check_stop1(self.grid, self.n_total, self.mtd, self.cfg)

        if self.stopped:
            self.recommendation = None if self.stop.reason == "all_toxic" else self.mtd
            self.events.append({"kind": "stopped", "reason": self.stop.reason})
            self.events.append({"kind": "recommended",
                                "dose": _dose_json(self.recommendation)})
        else:
            if self.two_agent:
                self.current_dose = decision.select_dose2(self.grid, self.tried,
                                                          self.cfg, utilities)
            else:
                self.current_dose = decision.select_dose1(self.grid, self.highest_tried,
                                                          self.cfg, utilities)
            self.events.append({"kind": "assigned", "dose": _dose_json(self.current_dose)})
        return self

    def finalize(self) -> Optional[Dose]:
        if not self.stopped:
            raise StateError("trial not stopped")
        return self.recommendation

    # -- persistence ------------------------------------------------

    def to_json(self) -> dict:
        return {
            "version": SCHEMA_VERSION,
            "agents": 2 if self.two_agent else 1,
            "config": self.cfg.to_json(),
            "initial_grid": self.initial_grid.to_json(),
            "grid": self.grid.to_json(),
            "cohort_log": [{"dose": _dose_json(o.dose), "n": o.n, "t": o.t}
                           for o in self.cohort_log],
            "events": self.events,
            "n_total": self.n_total,
            "current_dose": _dose_json(self.current_dose),
            "mtd": _dose_json(self.mtd),
            "stop": {"stopped": self.stop.stopped, "reason": self.stop.reason},
            "recommendation": _dose_json(self.recommendation),
        }

    @classmethod
    def from_json(cls, doc: dict) -> "TrialState":
        """Rebuild by replaying the cohort log from the initial grid."""
        if doc.get("version") != SCHEMA_VERSION:
            raise ValueError(f"unsupported trial schema version {doc.get('version')}")
        cfg = DesignConfig.from_json(doc["config"])
        grid_doc = doc["initial_grid"]
        initial_grid = (DoseGrid2.from_json(grid_doc) if doc.get("agents") == 2
                        else DoseGrid1.from_json(grid_doc))
        state = cls(cfg, initial_grid)
        for rec in doc["cohort_log"]:
            state.report_cohort(CohortOutcome(_dose_from_json(rec["dose"]),
                                              rec["n"], rec["t"]))
        return state


def _dose_json(dose: Optional[Dose]):
    if dose is None:
        return None
    if isinstance(dose, tuple):
        return list(dose)
    return dose


def _dose_from_json(doc) -> Optional[Dose]:
    if doc is None:
        return None
    if isinstance(doc, list):
        return (doc[0], doc[1])
    return doc


def start_trial(cfg: DesignConfig, grid: DoseGrid1 | DoseGrid2) -> TrialState:
    """Fresh trial at cohort 0; the first cohort goes to the lowest dose."""
    return TrialState(cfg, grid)


def state_digest(state: TrialState) -> str:
    """Stable fingerprint of a trial state, for replay checks."""
    import hashlib
    doc = json.dumps(state.to_json(), sort_keys=True)
    return hashlib.sha256(doc.encode()).hexdigest()
