"""Record service fixtures for the frontend test suite.

Drives the real trial service with FastAPI's test client and writes
request/response transcripts to test/fixtures/.  The frontend tests
replay these through the UI state machine and assert the UI-derived
recommendation sequence matches the direct-API golden sequence, and
that chart numbers equal the CSV export at printed precision.

Run from the repository root:  python3 frontend/scripts/record_fixtures.py
"""

import json
import tempfile
import time
from pathlib import Path

from fastapi.testclient import TestClient

from cfbd.service import create_app
from cfbd.simulator import OperatingCharacteristics, export_report, get_scenario, run_replicates

FIXTURES = Path(__file__).parent.parent / "test" / "fixtures"

# scripted 10-cohort DLT sequence for the golden trial
SCRIPTED_DLTS = [0, 0, 0, 1, 0, 0, 1, 0, 1, 0]


def record_trial(client: TestClient) -> dict:
    create_body = {
        "config": {"theta0": 0.30, "delta0": 0.05, "n_min": 10, "n_max": 24,
                   "calibrate": True},
        "agents": 1,
        "n_doses": 6,
    }
    resp = client.post("/trials", json=create_body)
    assert resp.status_code == 201, resp.text
    record = resp.json()
    transcript = {
        "create": {"request": create_body, "status": 201, "response": record},
        "cohorts": [],
    }
    golden = [f"assign:{record['state']['current_dose']}"]
    for t in SCRIPTED_DLTS:
        body = {"dose": record["state"]["current_dose"], "n": 1, "t": t,
                "revision": record["revision"]}
        resp = client.post(f"/trials/{record['trial_id']}/cohorts", json=body)
        assert resp.status_code == 200, resp.text
        record = resp.json()
        transcript["cohorts"].append({"request": body, "status": 200,
                                      "response": record})
        state = record["state"]
        if state["stop"]["stopped"]:
            rec = state["recommendation"]
            golden.append(f"recommend:{'none' if rec is None else rec}")
            break
        golden.append(f"assign:{state['current_dose']}")
    transcript["golden"] = golden
    transcript["events"] = client.get(
        f"/trials/{record['trial_id']}/events").json()["events"]
    return transcript


def record_simulations() -> dict:
    out = {}
    for name, scenario_name, reps in (("one_agent", "one-agent-1", 400),
                                      ("two_agent", "two-agent-A", 150)):
        sc = get_scenario(scenario_name)
        designs = {}
        for calibrate in (False, True):
            oc: OperatingCharacteristics = run_replicates(
                sc, sc.default_config(calibrate), reps, seed=3, workers=4)
            designs[oc.design] = {"result": oc.to_json(),
                                  "csv": export_report(oc, "csv")}
        out[name] = {"scenario": scenario_name, "reps": reps, "seed": 3,
                     "designs": designs}
    return out


def main():
    FIXTURES.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory() as tmp:
        client = TestClient(create_app(data_dir=tmp))
        transcript = record_trial(client)

        # record the simulation job lifecycle through the API as well
        job_req = {"scenario": "one-agent-1", "calibrate": False,
                   "reps": 400, "seed": 3}
        job = client.post("/simulations", json=job_req).json()
        deadline = time.time() + 60
        while job["status"] not in ("done", "failed") and time.time() < deadline:
            time.sleep(0.05)
            job = client.get(f"/simulations/{job['job_id']}").json()
        assert job["status"] == "done", job
        sim_job = {"request": job_req, "job": job}

    (FIXTURES / "trial_transcript.json").write_text(
        json.dumps(transcript, indent=2))
    (FIXTURES / "sim_job.json").write_text(json.dumps(sim_job, indent=2))
    (FIXTURES / "sim_reports.json").write_text(
        json.dumps(record_simulations(), indent=2))
    print(f"wrote fixtures to {FIXTURES}")
    print("golden:", transcript["golden"])


if __name__ == "__main__":
    main()
