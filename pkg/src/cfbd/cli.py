"""Command-line entry points: serve, simulate, conduct."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .decision import DesignConfig
from .dose_model import CohortOutcome
from .engine import start_trial
from .simulator import (builtin_scenarios, export_report, get_scenario,
                        load_scenario_config, run_replicates)


@click.group()
def main():
    """Curve-free Bayesian decision-theoretic dose-finding designs."""


@main.command()
@click.option("--port", default=8000, envvar="PORT", show_default=True)
@click.option("--data-dir", default="data", envvar="DATA_DIR", show_default=True)
@click.option("--workers", default=2, envvar="WORKERS", show_default=True,
              help="simulation worker threads")
@click.option("--static-dir", default=None, envvar="STATIC_DIR",
              help="serve a web UI bundle from this directory")
def serve(port, data_dir, workers, static_dir):
    """Run the trial-conduct HTTP service."""
    import uvicorn

    from .service import create_app
    app = create_app(data_dir=data_dir, workers=workers, static_dir=static_dir)
    uvicorn.run(app, host="0.0.0.0", port=port)


@main.command()
@click.option("--scenario", default=None,
              help="builtin scenario name (see `cfbd scenarios`)")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None,
              help="scenario config file (JSON)")
@click.option("--calibrate/--no-calibrate", default=False,
              help="run the ESS-calibrated variant")
@click.option("--reps", default=1000, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--workers", default=1, show_default=True)
@click.option("--out", type=click.Path(), default=None, help="report file (.csv or .json)")
def simulate(scenario, config_path, calibrate, reps, seed, workers, out):
    """Run Monte Carlo replicates and write an operating-characteristics report."""
    if config_path is not None:
        doc = json.loads(Path(config_path).read_text())
        sc, cfg, file_reps, file_seed = load_scenario_config(doc)
        reps = reps or file_reps
        seed = seed if seed is not None else file_seed
        if calibrate:
            cfg = DesignConfig.from_json({**cfg.to_json(), "calibrate": True})
    elif scenario is not None:
        sc = get_scenario(scenario)
        cfg = sc.default_config(calibrate=calibrate)
    else:
        raise click.UsageError("give --scenario or --config")
    oc = run_replicates(sc, cfg, reps, seed, workers=workers)
    fmt = "json" if (out or "").endswith(".json") else "csv"
    report = export_report(oc, fmt)
    if out:
        Path(out).write_text(report)
        click.echo(f"wrote {out}")
    else:
        click.echo(report, nl=False)


@main.command()
def scenarios():
    """List builtin scenarios."""
    for sc in builtin_scenarios():
        click.echo(f"{sc.name}: theta0={sc.theta0} delta0={sc.delta0} rates={sc.rates}")


@main.command()
@click.option("--theta0", default=0.30, show_default=True)
@click.option("--delta0", default=0.05, show_default=True)
@click.option("--n-doses", default=6, show_default=True)
@click.option("--n-min", default=10, show_default=True)
@click.option("--n-max", default=24, show_default=True)
@click.option("--cohort-size", default=1, show_default=True)
@click.option("--calibrate/--no-calibrate", default=True)
def conduct(theta0, delta0, n_doses, n_min, n_max, cohort_size, calibrate):
    """Conduct a one-agent trial interactively at the terminal."""
    from .dose_model import DoseGrid1
    cfg = DesignConfig(theta0=theta0, delta0=delta0, n_min=n_min, n_max=n_max,
                       cohort_size=cohort_size, calibrate=calibrate)
    state = start_trial(cfg, DoseGrid1.default(n_doses, theta0, delta0))
    click.echo(f"design: {'c-CFBD' if calibrate else 'CFBD'}, "
               f"target {theta0}, bound {theta0 + delta0}")
    while not state.stopped:
        n = state.next_cohort_size()
        click.echo(f"\nnext cohort: {n} patient(s) at dose {state.current_dose} "
                   f"(treated so far: {state.n_total})")
        t = click.prompt("DLTs observed", type=click.IntRange(0, n))
        state.report_cohort(CohortOutcome(state.current_dose, n, t))
        means = ", ".join(f"{m:.3f}" for m in state.grid.means())
        click.echo(f"posterior means: [{means}]  current MTD estimate: {state.mtd}")
    click.echo(f"\ntrial stopped ({state.stop.reason}); "
               f"recommended dose: {state.finalize() or 'none'}")


if __name__ == "__main__":
    sys.exit(main())
