import numpy as np
import pytest

from cfbd.simulator import (BAND_LABELS, Scenario, band_group, band_of,
                            builtin_scenarios, export_report, get_scenario,
                            load_scenario_config, parse_report,
                            run_replicates, simulate_one_trial)
from cfbd.stats_kernel import RngStream


class TestBuiltinScenarios:
    def test_counts(self):
        scs = builtin_scenarios()
        assert len(scs) == 13
        assert sum(sc.agents == 1 for sc in scs) == 6
        assert sum(sc.agents == 2 for sc in scs) == 7

    def test_one_agent_values(self):
        sc = get_scenario("one-agent-3")
        assert sc.rates == (0.30, 0.53, 0.77, 0.87, 0.95, 0.98)
        assert sc.theta0 == 0.30 and sc.delta0 == 0.05
        assert get_scenario("one-agent-5").theta0 == 0.20

    def test_two_agent_values(self):
        d = get_scenario("two-agent-D")
        arr = d.rate_array()
        assert arr.shape == (4, 4)
        assert arr.min() == 0.44  # every combination already too toxic
        assert d.theta0 == 0.20
        g = get_scenario("two-agent-G")
        assert g.rate_array()[3, 3] == 0.80

    def test_unknown_name(self):
        with pytest.raises(KeyError):
            get_scenario("nope")

    def test_default_configs(self):
        one = get_scenario("one-agent-1").default_config()
        assert (one.n_max, one.r1) == (24, 0.95)
        two = get_scenario("two-agent-A").default_config(calibrate=True)
        assert (two.n_max, two.r1, two.r2, two.calibrate) == (50, 0.5, 0.95, True)

    def test_rates_validated(self):
        with pytest.raises(ValueError):
            Scenario("bad", (0.1, 1.5), 0.3, 0.05).rate_array()


class TestSingleTrial:
    def test_counts_consistent(self):
        sc = get_scenario("one-agent-2")
        cfg = sc.default_config()
        n, t, rec = simulate_one_trial(sc, cfg, RngStream(7, 0))
        assert n.sum() <= cfg.n_max
        assert np.all(t <= n)
        assert rec is None or 1 <= rec <= 6

    def test_all_toxic_scenario_recommends_none(self):
        sc = Scenario("sure-tox", (1.0, 1.0, 1.0), 0.2, 0.05)
        cfg = sc.default_config()
        for rep in range(20):
            _, _, rec = simulate_one_trial(sc, cfg, RngStream(3, rep))
            assert rec is None

    def test_never_toxic_recommends_top_region(self):
        sc = Scenario("safe", (0.0, 0.0, 0.0, 0.0), 0.3, 0.05)
        cfg = sc.default_config()
        for rep in range(10):
            n, t, rec = simulate_one_trial(sc, cfg, RngStream(4, rep))
            assert t.sum() == 0
            assert rec in (3, 4)


class TestRunReplicates:
    def test_reps_one(self):
        sc = get_scenario("one-agent-1")
        oc = run_replicates(sc, sc.default_config(), reps=1, seed=5)
        assert oc.reps == 1
        assert oc.recommendations_per_dose.sum() + oc.none_recommended == 1
        assert oc.total_patients == oc.patients_per_dose.sum()

    def test_percentages_sum(self):
        sc = get_scenario("one-agent-2")
        oc = run_replicates(sc, sc.default_config(), reps=200, seed=5)
        assert np.sum(oc.allocation_pct()) == pytest.approx(100.0, abs=1e-9)
        assert np.sum(oc.recommendation_pct()) + oc.none_pct() == pytest.approx(100.0, abs=1e-9)
        assert oc.expected_n() <= sc.default_config().n_max

    def test_deterministic(self):
        sc = get_scenario("one-agent-1")
        a = run_replicates(sc, sc.default_config(), reps=100, seed=42)
        b = run_replicates(sc, sc.default_config(), reps=100, seed=42)
        assert export_report(a) == export_report(b)
        assert np.array_equal(a.patients_per_dose, b.patients_per_dose)

    def test_seed_matters(self):
        sc = get_scenario("one-agent-2")
        a = run_replicates(sc, sc.default_config(), reps=100, seed=1)
        b = run_replicates(sc, sc.default_config(), reps=100, seed=2)
        assert not np.array_equal(a.patients_per_dose, b.patients_per_dose)

    def test_parallel_equals_serial(self):
        sc = get_scenario("one-agent-2")
        cfg = sc.default_config(calibrate=True)
        serial = run_replicates(sc, cfg, reps=120, seed=9, workers=1)
        par = run_replicates(sc, cfg, reps=120, seed=9, workers=4)
        assert np.array_equal(serial.patients_per_dose, par.patients_per_dose)
        assert np.array_equal(serial.recommendations_per_dose, par.recommendations_per_dose)
        assert serial.none_recommended == par.none_recommended
        assert export_report(serial) == export_report(par)

    def test_shape_mismatch_rejected(self):
        sc = get_scenario("one-agent-1")
        cfg = sc.default_config()
        bad = Scenario("bad", sc.rates[:4], sc.theta0, sc.delta0)
        oc = run_replicates(bad, cfg, reps=1, seed=0)  # self-consistent grid is fine
        assert oc.patients_per_dose.shape == (4,)
        with pytest.raises(ValueError):
            run_replicates(sc, cfg, reps=0, seed=0)


class TestBands:
    def test_band_of_edges(self):
        assert band_of(0.20, 0.20) == "1-2 pts"
        assert band_of(0.22, 0.20) == "1-2 pts"
        assert band_of(0.25, 0.20) == "3-5 pts"
        assert band_of(0.30, 0.20) == "6-10 pts"
        assert band_of(0.31, 0.20) == ">10 pts"
        assert band_of(0.02, 0.20) == ">10 pts"

    def test_scenario_b_has_no_close_band(self):
        # every true rate in scenario B is at most 0.17 vs target 0.20
        sc = get_scenario("two-agent-B")
        labels = {band_of(float(r), sc.theta0) for r in np.ravel(sc.rate_array())}
        assert "1-2 pts" not in labels

    def test_grouping_consistency(self):
        sc = get_scenario("two-agent-A")
        oc = run_replicates(sc, sc.default_config(), reps=50, seed=11)
        bands = band_group(oc)
        assert set(bands["allocation"]) == set(BAND_LABELS)
        total_alloc = sum(bands["allocation"].values())
        assert total_alloc == pytest.approx(100.0, abs=0.3)  # rounding only
        total_rec = sum(bands["recommendation"].values()) + bands["none_recommended"]
        assert total_rec == pytest.approx(100.0, abs=0.3)
        # cumulative columns are running sums of the band columns
        running = 0.0
        for lbl in BAND_LABELS:
            running += bands["recommendation"][lbl]
            assert bands["cumulative_recommendation"][lbl] == pytest.approx(running, abs=0.2)

    def test_one_agent_rejected(self):
        sc = get_scenario("one-agent-1")
        oc = run_replicates(sc, sc.default_config(), reps=5, seed=0)
        with pytest.raises(TypeError):
            band_group(oc)


class TestReports:
    def test_csv_roundtrip_one_agent(self):
        sc = get_scenario("one-agent-1")
        oc = run_replicates(sc, sc.default_config(), reps=40, seed=3)
        rows = parse_report(export_report(oc, "csv"))
        doses = [r["dose"] for r in rows]
        assert doses == [str(j) for j in range(1, 7)] + ["none", "total"]
        total = rows[-1]
        assert total["allocation_pct"] == pytest.approx(100.0, abs=0.3)
        assert total["e_n"] == round(oc.expected_n(), 1)
        assert rows[0]["design"] == "CFBD" and rows[0]["seed"] == 3

    def test_csv_two_agent_band_rows(self):
        sc = get_scenario("two-agent-A")
        oc = run_replicates(sc, sc.default_config(calibrate=True), reps=30, seed=3)
        rows = parse_report(export_report(oc, "csv"))
        assert [r["dose"] for r in rows] == BAND_LABELS + ["none", "total"]
        assert rows[0]["design"] == "c-CFBD"

    def test_json_report(self):
        import json
        sc = get_scenario("one-agent-1")
        oc = run_replicates(sc, sc.default_config(), reps=10, seed=1)
        doc = json.loads(export_report(oc, "json"))
        assert doc["scenario"] == "one-agent-1"
        assert len(doc["allocation_pct"]) == 6

    def test_unknown_format(self):
        sc = get_scenario("one-agent-1")
        oc = run_replicates(sc, sc.default_config(), reps=1, seed=0)
        with pytest.raises(ValueError):
            export_report(oc, "xml")


class TestScenarioFile:
    def test_load_one_agent(self):
        doc = {"agents": 1, "rates": [0.1, 0.2, 0.3], "theta0": 0.3, "delta0": 0.05,
               "design": {"calibrate": True}, "reps": 50, "seed": 4}
        sc, cfg, reps, seed = load_scenario_config(doc)
        assert sc.agents == 1 and cfg.calibrate and (reps, seed) == (50, 4)
        assert cfg.n_max == 24

    def test_load_two_agent_defaults(self):
        doc = {"agents": 2, "rates": [[0.1, 0.2], [0.2, 0.3]],
               "theta0": 0.2, "delta0": 0.05}
        sc, cfg, reps, seed = load_scenario_config(doc)
        assert sc.agents == 2 and cfg.n_max == 50
        assert (reps, seed) == (1000, 0)
