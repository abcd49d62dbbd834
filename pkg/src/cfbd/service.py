"""HTTP service for conducting trials and launching simulations.

Trials persist as one JSON document per trial id in the data
directory, with an optimistic-concurrency revision number: every
mutation must quote the revision it saw, and exactly one of two
conflicting posts wins.  Simulation jobs run on a bounded in-process
worker pool; finished jobs are written to disk as well so results
survive a restart, and results are cached by request-body hash.
"""

from __future__ import annotations

import hashlib
import json
import threading
import uuid
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Optional

from fastapi import FastAPI
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from .decision import DesignConfig
from .dose_model import CohortOutcome, DoseGrid1, DoseGrid2
from .engine import TrialState, ProtocolError, StateError, start_trial
from .simulator import get_scenario, load_scenario_config, run_replicates


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str, field: Optional[str] = None):
        self.status = status
        self.body = {"code": code, "message": message}
        if field:
            self.body["field"] = field


class TrialCreate(BaseModel):
    config: dict
    agents: int = 1
    n_doses: int = 6
    shape: Optional[tuple[int, int]] = None
    initial_grid: Optional[dict] = None


class CohortPost(BaseModel):
    dose: Any
    n: int
    t: int
    revision: int


class SimulationPost(BaseModel):
    scenario: Optional[str] = None  # builtin name
    custom: Optional[dict] = None  # full scenario-config document
    design: dict = Field(default_factory=dict)
    calibrate: bool = False
    reps: int = 1000
    seed: int = 0


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _round12(obj):
    """Clamp floats to 12 significant digits for stable API payloads."""
    if isinstance(obj, float):
        return float(f"{obj:.12g}")
    if isinstance(obj, list):
        return [_round12(x) for x in obj]
    if isinstance(obj, dict):
        return {k: _round12(v) for k, v in obj.items()}
    return obj


class TrialStore:
    """One JSON file per trial; revisions enforce per-trial single-writer."""

    def __init__(self, data_dir: Path):
        self.dir = Path(data_dir)
        self.dir.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    def _path(self, trial_id: str) -> Path:
        if not trial_id.replace("-", "").isalnum():
            raise ApiError(404, "not_found", f"unknown trial {trial_id}")
        return self.dir / f"trial-{trial_id}.json"

    def create(self, state: TrialState) -> dict:
        trial_id = uuid.uuid4().hex[:12]
        record = {
            "trial_id": trial_id,
            "revision": 0,
            "created_at": _now(),
            "updated_at": _now(),
            "state": state.to_json(),
        }
        record = _round12(record)
        with self._lock:
            self._path(trial_id).write_text(json.dumps(record))
        return record

    def load(self, trial_id: str) -> dict:
        path = self._path(trial_id)
        if not path.exists():
            raise ApiError(404, "not_found", f"unknown trial {trial_id}")
        return json.loads(path.read_text())

    def update(self, trial_id: str, expected_revision: int, state: TrialState) -> dict:
        with self._lock:
            record = self.load(trial_id)
            if record["revision"] != expected_revision:
                raise ApiError(409, "revision_conflict",
                               f"expected revision {record['revision']}, got {expected_revision}")
            record["revision"] += 1
            record["updated_at"] = _now()
            record["state"] = state.to_json()
            record = _round12(record)
            self._path(trial_id).write_text(json.dumps(record))
        return record


class SimJobRunner:
    """Bounded in-process simulation jobs, results cached by body hash."""

    def __init__(self, data_dir: Path, workers: int = 2):
        self.dir = Path(data_dir)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.pool = ThreadPoolExecutor(max_workers=workers)
        self.jobs: dict[str, dict] = {}
        self.cache: dict[str, str] = {}  # body hash -> job id
        self._lock = threading.Lock()
        for path in self.dir.glob("sim-*.json"):
            job = json.loads(path.read_text())
            self.jobs[job["job_id"]] = job

    def submit(self, body: SimulationPost) -> dict:
        digest = hashlib.sha256(
            json.dumps(body.model_dump(), sort_keys=True).encode()).hexdigest()
        with self._lock:
            if digest in self.cache and self.cache[digest] in self.jobs:
                return self.jobs[self.cache[digest]]
            job_id = uuid.uuid4().hex[:12]
            job = {"job_id": job_id, "status": "queued", "request": body.model_dump(),
                   "result": None, "error": None}
            self.jobs[job_id] = job
            self.cache[digest] = job_id
        self.pool.submit(self._run, job_id, body)
        return job

    def _run(self, job_id: str, body: SimulationPost):
        job = self.jobs[job_id]
        job["status"] = "running"
        try:
            if body.custom is not None:
                scenario, cfg, reps, seed = load_scenario_config(body.custom)
                reps, seed = body.reps or reps, body.seed
            else:
                scenario = get_scenario(body.scenario)
                design = dict(body.design)
                design["calibrate"] = body.calibrate
                base = scenario.default_config(calibrate=body.calibrate).to_json()
                base.update(design)
                cfg = DesignConfig.from_json(base)
                reps, seed = body.reps, body.seed
            oc = run_replicates(scenario, cfg, reps, seed)
            job["result"] = oc.to_json()
            job["status"] = "done"
        except Exception as exc:  # surfaced to the client via job status
            job["status"] = "failed"
            job["error"] = str(exc)
        (self.dir / f"sim-{job_id}.json").write_text(json.dumps(job))

    def get(self, job_id: str) -> dict:
        job = self.jobs.get(job_id)
        if job is None:
            raise ApiError(404, "not_found", f"unknown simulation job {job_id}")
        return job


def _build_state(body: TrialCreate) -> TrialState:
    try:
        cfg = DesignConfig.from_json(body.config)
    except (TypeError, ValueError) as exc:
        raise ApiError(400, "invalid_config", str(exc), field="config")
    try:
        if body.initial_grid is not None:
            if body.agents == 2:
                grid = DoseGrid2.from_json(body.initial_grid)
            else:
                grid = DoseGrid1.from_json(body.initial_grid)
        elif body.agents == 2:
            shape = tuple(body.shape or (4, 4))
            grid = DoseGrid2.default(shape, cfg.theta0, cfg.delta0)
        else:
            grid = DoseGrid1.default(body.n_doses, cfg.theta0, cfg.delta0)
    except (KeyError, ValueError) as exc:
        raise ApiError(400, "invalid_grid", str(exc), field="initial_grid")
    return start_trial(cfg, grid)


def create_app(data_dir: str | Path = "data", workers: int = 2,
               static_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="cfbd trial service")
    store = TrialStore(Path(data_dir) / "trials")
    sims = SimJobRunner(Path(data_dir) / "simulations", workers=workers)

    @app.exception_handler(ApiError)
    async def _api_error(_, exc: ApiError):
        return JSONResponse(status_code=exc.status, content=exc.body)

    @app.post("/trials", status_code=201)
    def create_trial(body: TrialCreate):
        return store.create(_build_state(body))

    @app.get("/trials/{trial_id}")
    def get_trial(trial_id: str):
        return store.load(trial_id)

    @app.get("/trials/{trial_id}/events")
    def get_events(trial_id: str):
        record = store.load(trial_id)
        return {"trial_id": trial_id, "events": record["state"]["events"]}

    @app.post("/trials/{trial_id}/cohorts")
    def post_cohort(trial_id: str, body: CohortPost):
        record = store.load(trial_id)
        state = TrialState.from_json(record["state"])
        if state.stopped:
            raise ApiError(422, "trial_stopped", "trial already stopped")
        if record["revision"] != body.revision:
            raise ApiError(409, "revision_conflict",
                           f"expected revision {record['revision']}, got {body.revision}")
        dose = tuple(body.dose) if isinstance(body.dose, list) else body.dose
        ess_pre = [float(x) for x in state.grid.ess().ravel()]
        try:
            state.report_cohort(CohortOutcome(dose, body.n, body.t))
        except ProtocolError as exc:
            raise ApiError(409, "protocol_error", str(exc))
        except StateError as exc:
            raise ApiError(422, "trial_stopped", str(exc))
        except ValueError as exc:
            raise ApiError(400, "invalid_outcome", str(exc))
        record = store.update(trial_id, body.revision, state)
        record = dict(record)
        record["calibration"] = _round12({
            "ess_pre": ess_pre,
            "ess_post": [float(x) for x in state.grid.ess().ravel()],
        })
        return record

    @app.post("/simulations", status_code=202)
    def post_simulation(body: SimulationPost):
        if body.reps < 1:
            raise ApiError(400, "invalid_request", "reps must be >= 1", field="reps")
        if body.custom is None and body.scenario is None:
            raise ApiError(400, "invalid_request",
                           "either scenario or custom must be given", field="scenario")
        if body.scenario is not None:
            try:
                get_scenario(body.scenario)
            except KeyError as exc:
                raise ApiError(400, "invalid_request", str(exc), field="scenario")
        return sims.submit(body)

    @app.get("/simulations/{job_id}")
    def get_simulation(job_id: str):
        return sims.get(job_id)

    if static_dir is not None:
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")

    return app
