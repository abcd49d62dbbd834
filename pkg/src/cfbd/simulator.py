"""Monte Carlo harness for operating characteristics.

Each replicate is a full simulated trial: patient outcomes are drawn
Bernoulli from the scenario's true DLT rates using a Philox stream
keyed by (seed, replicate index), so runs are deterministic and
embarrassingly parallel.  Aggregation keeps exact integer tallies
(patients treated per dose, recommendations per dose) and divides
once at the end, making the parallel reduction order-independent.
"""

from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .decision import DesignConfig
from .dose_model import CohortOutcome, DoseGrid1, DoseGrid2
from .engine import start_trial
from .stats_kernel import RngStream

BAND_LABELS = ["1-2 pts", "3-5 pts", "6-10 pts", ">10 pts"]


@dataclass(frozen=True)
class Scenario:
    """True DLT rates for a simulated trial, plus the design target."""

    name: str
    rates: tuple  # vector (one agent) or tuple of row tuples (two agents)
    theta0: float
    delta0: float

    @property
    def agents(self) -> int:
        return 2 if isinstance(self.rates[0], tuple) else 1

    def rate_array(self) -> np.ndarray:
        arr = np.asarray(self.rates, dtype=float)
        if np.any(arr < 0) or np.any(arr > 1):
            raise ValueError("true DLT rates must lie in [0, 1]")
        return arr

    def default_config(self, calibrate: bool = False) -> DesignConfig:
        # two-agent thresholds and cap follow the benchmark setting
        # (n_max 50, r1 0.5, r2 0.95); one-agent keeps the class defaults
        if self.agents == 2:
            return DesignConfig(theta0=self.theta0, delta0=self.delta0,
                                n_max=50, r1=0.5, r2=0.95, calibrate=calibrate)
        return DesignConfig(theta0=self.theta0, delta0=self.delta0,
                            n_max=24, calibrate=calibrate)

    def default_grid(self):
        if self.agents == 2:
            return DoseGrid2.default(self.rate_array().shape, self.theta0, self.delta0)
        return DoseGrid1.default(len(self.rates), self.theta0, self.delta0)


def builtin_scenarios() -> list[Scenario]:
    """The six one-agent and seven two-agent benchmark scenarios."""
    one = [
        ("one-agent-1", (0.02, 0.03, 0.06, 0.10, 0.18, 0.30), 0.30),
        ("one-agent-2", (0.05, 0.10, 0.20, 0.30, 0.50, 0.50), 0.30),
        ("one-agent-3", (0.30, 0.53, 0.77, 0.87, 0.95, 0.98), 0.30),
        ("one-agent-4", (0.00, 0.00, 0.00, 0.01, 0.07, 0.20), 0.20),
        ("one-agent-5", (0.01, 0.02, 0.09, 0.20, 0.50, 0.68), 0.20),
        ("one-agent-6", (0.15, 0.20, 0.38, 0.52, 0.70, 0.80), 0.20),
    ]
    two = {
        "A": ((0.04, 0.10, 0.16, 0.22),
              (0.08, 0.14, 0.20, 0.26),
              (0.12, 0.18, 0.24, 0.30),
              (0.16, 0.22, 0.28, 0.34)),
        "B": ((0.02, 0.05, 0.08, 0.11),
              (0.04, 0.07, 0.10, 0.13),
              (0.06, 0.09, 0.12, 0.15),
              (0.08, 0.11, 0.14, 0.17)),
        "C": ((0.10, 0.25, 0.40, 0.55),
              (0.20, 0.35, 0.50, 0.65),
              (0.30, 0.45, 0.60, 0.75),
              (0.40, 0.55, 0.70, 0.85)),
        "D": ((0.44, 0.50, 0.56, 0.62),
              (0.48, 0.54, 0.60, 0.66),
              (0.52, 0.58, 0.64, 0.70),
              (0.56, 0.62, 0.68, 0.74)),
        "E": ((0.08, 0.09, 0.10, 0.11),
              (0.18, 0.19, 0.20, 0.21),
              (0.28, 0.29, 0.30, 0.31),
              (0.29, 0.30, 0.31, 0.41)),
        "F": ((0.12, 0.16, 0.44, 0.50),
              (0.13, 0.18, 0.45, 0.52),
              (0.14, 0.20, 0.46, 0.54),
              (0.15, 0.22, 0.47, 0.55)),
        "G": ((0.01, 0.04, 0.06, 0.10),
              (0.02, 0.10, 0.15, 0.30),
              (0.03, 0.15, 0.30, 0.50),
              (0.04, 0.20, 0.45, 0.80)),
    }
    out = [Scenario(name, rates, theta0, 0.05) for name, rates, theta0 in one]
    out += [Scenario(f"two-agent-{k}", rates, 0.20, 0.05) for k, rates in two.items()]
    return out


def get_scenario(name: str) -> Scenario:
    for sc in builtin_scenarios():
        if sc.name == name:
            return sc
    raise KeyError(f"unknown builtin scenario {name!r}")


@dataclass
class OperatingCharacteristics:
    """Exact-tally aggregate of a batch of simulated trials."""

    scenario: str
    design: str
    agents: int
    reps: int
    seed: int
    patients_per_dose: np.ndarray  # int64, flat or I x J
    recommendations_per_dose: np.ndarray  # int64, same shape
    none_recommended: int
    total_patients: int
    theta0: float = 0.0
    true_rates: Optional[np.ndarray] = None

    def allocation_pct(self) -> np.ndarray:
        return 100.0 * self.patients_per_dose / self.total_patients

    def recommendation_pct(self) -> np.ndarray:
        return 100.0 * self.recommendations_per_dose / self.reps

    def none_pct(self) -> float:
        return 100.0 * self.none_recommended / self.reps

    def expected_n(self) -> float:
        return self.total_patients / self.reps

    def merge(self, other: "OperatingCharacteristics") -> "OperatingCharacteristics":
        assert (self.scenario, self.design, self.seed) == (other.scenario, other.design, other.seed)
        return OperatingCharacteristics(
            self.scenario, self.design, self.agents, self.reps + other.reps, self.seed,
            self.patients_per_dose + other.patients_per_dose,
            self.recommendations_per_dose + other.recommendations_per_dose,
            self.none_recommended + other.none_recommended,
            self.total_patients + other.total_patients,
            self.theta0, self.true_rates)

    def to_json(self) -> dict:
        doc = {
            "scenario": self.scenario, "design": self.design, "agents": self.agents,
            "reps": self.reps, "seed": self.seed,
            "allocation_pct": [round(x, 1) for x in np.ravel(self.allocation_pct())],
            "recommendation_pct": [round(x, 1) for x in np.ravel(self.recommendation_pct())],
            "none_recommended_pct": round(self.none_pct(), 1),
            "e_n": round(self.expected_n(), 1),
        }
        if self.agents == 2 and self.true_rates is not None:
            doc["bands"] = band_group(self)
        return doc


def simulate_one_trial(scenario: Scenario, cfg: DesignConfig, rng: RngStream):
    """Run a single simulated trial; returns (patients, dlts, recommendation)
    with per-dose integer count arrays."""
    rates = scenario.rate_array()
    state = start_trial(cfg, scenario.default_grid())
    while not state.stopped:
        dose = state.current_dose
        idx = (dose[0] - 1, dose[1] - 1) if scenario.agents == 2 else dose - 1
        rate = rates[idx]
        n = state.next_cohort_size()
        t = sum(rng.bernoulli(rate) for _ in range(n))
        state.report_cohort(CohortOutcome(dose, n, t))
    return state.n_per_dose, state.t_per_dose, state.finalize()


def _run_chunk(scenario: Scenario, cfg: DesignConfig, seed: int,
               rep_lo: int, rep_hi: int) -> OperatingCharacteristics:
    rates = scenario.rate_array()
    patients = np.zeros(rates.shape, dtype=np.int64)
    recs = np.zeros(rates.shape, dtype=np.int64)
    none_count = 0
    total = 0
    for rep in range(rep_lo, rep_hi):
        n_per_dose, _, rec = simulate_one_trial(scenario, cfg, RngStream(seed, rep))
        patients += n_per_dose
        total += int(n_per_dose.sum())
        if rec is None:
            none_count += 1
        elif scenario.agents == 2:
            recs[rec[0] - 1, rec[1] - 1] += 1
        else:
            recs[rec - 1] += 1
    design = "c-CFBD" if cfg.calibrate else "CFBD"
    return OperatingCharacteristics(scenario.name, design, scenario.agents,
                                    rep_hi - rep_lo, seed, patients, recs,
                                    none_count, total, scenario.theta0, rates)


def run_replicates(scenario: Scenario, cfg: DesignConfig, reps: int, seed: int,
                   workers: int = 1) -> OperatingCharacteristics:
    """Aggregate operating characteristics over `reps` independent trials.

    Deterministic given (scenario, cfg, reps, seed); `workers` > 1
    fans replicate ranges out to processes and produces the identical
    aggregate because streams are keyed by replicate index.
    """
    if reps < 1:
        raise ValueError("reps must be >= 1")
    rates = scenario.rate_array()
    grid = scenario.default_grid()
    grid_shape = grid.shape if scenario.agents == 2 else (grid.n_doses,)
    if rates.shape != grid_shape:
        raise ValueError("scenario dimensions do not match the design grid")
    if workers <= 1:
        return _run_chunk(scenario, cfg, seed, 0, reps)
    bounds = np.linspace(0, reps, workers + 1, dtype=int)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_run_chunk, scenario, cfg, seed, int(lo), int(hi))
                   for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo]
        chunks = [f.result() for f in futures]
    oc = chunks[0]
    for chunk in chunks[1:]:
        oc = oc.merge(chunk)
    return oc


def band_of(rate: float, theta0: float) -> str:
    """Distance band in percentage points of |true rate - theta0|."""
    d = abs(rate - theta0) * 100.0
    if d <= 2.0 + 1e-9:
        return BAND_LABELS[0]
    if d <= 5.0 + 1e-9:
        return BAND_LABELS[1]
    if d <= 10.0 + 1e-9:
        return BAND_LABELS[2]
    return BAND_LABELS[3]


def band_group(oc: OperatingCharacteristics) -> dict:
    """Group a two-agent aggregate by distance of each cell's true DLT
    rate from the target, with the cumulative columns as reported."""
    if oc.agents != 2:
        raise TypeError("band grouping applies to two-agent aggregates only")
    alloc = {lbl: 0.0 for lbl in BAND_LABELS}
    rec = {lbl: 0.0 for lbl in BAND_LABELS}
    alloc_pct = oc.allocation_pct()
    rec_pct = oc.recommendation_pct()
    for idx, rate in np.ndenumerate(oc.true_rates):
        lbl = band_of(float(rate), oc.theta0)
        alloc[lbl] += float(alloc_pct[idx])
        rec[lbl] += float(rec_pct[idx])
    cum_rec = np.cumsum([rec[lbl] for lbl in BAND_LABELS])
    cum_alloc = np.cumsum([alloc[lbl] for lbl in BAND_LABELS])
    return {
        "allocation": {lbl: round(alloc[lbl], 1) for lbl in BAND_LABELS},
        "recommendation": {lbl: round(rec[lbl], 1) for lbl in BAND_LABELS},
        "cumulative_allocation": {lbl: round(c, 1) for lbl, c in zip(BAND_LABELS, cum_alloc)},
        "cumulative_recommendation": {lbl: round(c, 1) for lbl, c in zip(BAND_LABELS, cum_rec)},
        "none_recommended": round(oc.none_pct(), 1),
        "e_n": round(oc.expected_n(), 1),
    }


CSV_FIELDS = ["design", "scenario", "dose", "allocation_pct",
              "recommendation_pct", "e_n", "reps", "seed"]


def export_report(oc: OperatingCharacteristics, format: str = "csv") -> str:
    """Render an aggregate as CSV rows or a JSON document.

    One-agent reports carry one row per dose plus a summary row;
    two-agent reports carry one row per band plus the none row and a
    summary.  Percentages are rounded half-even to one decimal.
    """
    if format == "json":
        return json.dumps(oc.to_json(), indent=2)
    if format != "csv":
        raise ValueError(f"unknown report format {format!r}")
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
    writer.writeheader()

    def row(dose, alloc, rec, e_n=""):
        writer.writerow({"design": oc.design, "scenario": oc.scenario, "dose": dose,
                         "allocation_pct": alloc, "recommendation_pct": rec,
                         "e_n": e_n, "reps": oc.reps, "seed": oc.seed})

    if oc.agents == 1:
        for j, (a, r) in enumerate(zip(oc.allocation_pct(), oc.recommendation_pct()), start=1):
            row(str(j), round(float(a), 1), round(float(r), 1))
        row("none", 0.0, round(oc.none_pct(), 1))
    else:
        bands = band_group(oc)
        for lbl in BAND_LABELS:
            row(lbl, bands["allocation"][lbl], bands["recommendation"][lbl])
        row("none", 0.0, bands["none_recommended"])
    row("total", round(float(np.sum(oc.allocation_pct())), 1),
        round(float(np.sum(oc.recommendation_pct()) + oc.none_pct()), 1),
        round(oc.expected_n(), 1))
    return buf.getvalue()


def parse_report(doc: str) -> list[dict]:
    """Read back an exported CSV report into a list of row dicts."""
    reader = csv.DictReader(io.StringIO(doc))
    rows = []
    for rec in reader:
        out = dict(rec)
        for key in ("allocation_pct", "recommendation_pct", "e_n"):
            out[key] = float(rec[key]) if rec[key] else None
        out["reps"] = int(rec["reps"])
        out["seed"] = int(rec["seed"])
        rows.append(out)
    return rows


def load_scenario_config(doc: dict) -> tuple[Scenario, DesignConfig, int, int]:
    """Parse the external scenario-file schema:
    {agents, rates, theta0, delta0, design: {...}, reps, seed}."""
    agents = doc["agents"]
    rates = doc["rates"]
    if agents == 2:
        rates = tuple(tuple(r) for r in rates)
    else:
        rates = tuple(rates)
    scenario = Scenario(doc.get("name", "custom"), rates, doc["theta0"], doc["delta0"])
    design_doc = dict(doc.get("design", {}))
    design_doc.setdefault("theta0", doc["theta0"])
    design_doc.setdefault("delta0", doc["delta0"])
    design_doc.setdefault("n_max", 50 if agents == 2 else 24)
    cfg = DesignConfig(**design_doc)
    return scenario, cfg, int(doc.get("reps", 1000)), int(doc.get("seed", 0))
