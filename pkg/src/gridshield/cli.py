"""Command-line orchestration.

Subcommands: expense-table, lv-analyze, simulate, sweep. Each writes its
delimited/JSON artifacts plus rendered figures into --out, together with a
manifest tying artifacts back to the exact resolved configuration.

Exit codes: 0 ok, 2 configuration error, 3 runtime error, 4 I/O error.
"""
from __future__ import annotations

import sys
from dataclasses import replace
from pathlib import Path

import click

from . import __version__, costs, dynamics, engine, figures, report
from .config import RunManifest, ScenarioError, default_scenario_path, load_scenario

EXIT_CONFIG = 2
EXIT_RUNTIME = 3
EXIT_IO = 4


class _ArtifactSink:
    """Tracks written artifacts so a failed command leaves nothing behind."""

    def __init__(self, out_dir: Path):
        self.out_dir = out_dir
        self.paths: list[Path] = []

    def prepare(self):
        self.out_dir.mkdir(parents=True, exist_ok=True)

    def add(self, path: Path) -> Path:
        self.paths.append(Path(path))
        return path

    def cleanup(self):
        for path in self.paths:
            path.unlink(missing_ok=True)


def _parse_int_list(text: str, option: str) -> list[int]:
    try:
        values = [int(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise click.UsageError(f"{option} expects a comma-separated int list") from exc
    if not values:
        raise click.UsageError(f"{option} must not be empty")
    return values


def _run_command(ctx, sink: _ArtifactSink, body):
    sink.prepare()
    try:
        body()
    except ScenarioError as exc:
        sink.cleanup()
        click.echo(f"configuration error: {exc}", err=True)
        ctx.exit(EXIT_CONFIG)
    except OSError as exc:
        sink.cleanup()
        click.echo(f"io error: {exc}", err=True)
        ctx.exit(EXIT_IO)
    except Exception as exc:  # noqa: BLE001 - boundary of the CLI
        sink.cleanup()
        click.echo(f"runtime error: {exc}", err=True)
        ctx.exit(EXIT_RUNTIME)


def _write_manifest(sink: _ArtifactSink, config_dict: dict, seeds) -> Path:
    manifest = RunManifest(
        config=config_dict,
        seeds=list(seeds),
        outputs=[str(p) for p in sink.paths],
    )
    path = report.write_json(sink.out_dir / "manifest.json", manifest.to_dict())
    return sink.add(path)


@click.group()
@click.version_option(__version__)
def cli():
    """Joint-defense simulator and attacker-economics toolkit."""


_scenario_option = click.option(
    "--scenario", type=click.Path(path_type=Path), default=None,
    help="Scenario TOML file (defaults to the shipped calibration).",
)
_out_option = click.option(
    "--out", type=click.Path(path_type=Path), default=Path("out"),
    show_default=True, help="Output directory.",
)
_plot_option = click.option("--plot/--no-plot", default=True, show_default=True)


def _load(scenario_path):
    return load_scenario(scenario_path or default_scenario_path())


@cli.command("expense-table")
@click.option("--bases", default="1,2,3", show_default=True,
              help="Comma-separated individual base expenses.")
@click.option("--max-peers", default=9, show_default=True, type=int)
@click.option("--theta", default=3.5, show_default=True, type=float)
@_out_option
@_plot_option
@click.pass_context
def cmd_expense_table(ctx, bases, max_peers, theta, out, plot):
    """Joint-defense expense matrix over base expense x peer count."""
    sink = _ArtifactSink(out)

    def body():
        base_values = _parse_int_list(bases, "--bases")
        rows = costs.expense_table(base_values, max_peers, theta)
        sink.add(report.write_expense_table_csv(
            out / "expense_table.csv", rows, max_peers))
        if plot:
            sink.add(figures.plot_expense_table(
                rows, max_peers, out / "expense_table.png"))
        _write_manifest(sink, {"bases": base_values, "max_peers": max_peers,
                               "theta": theta}, seeds=[])
        click.echo(f"wrote {out / 'expense_table.csv'}")

    _run_command(ctx, sink, body)


@cli.command("lv-analyze")
@_scenario_option
@click.option("--horizon", type=float, default=None,
              help="Integration horizon in model time (default: one orbit).")
@click.option("--step", type=float, default=None,
              help="Integration step (default: period/10000).")
@_out_option
@_plot_option
@click.pass_context
def cmd_lv_analyze(ctx, scenario, horizon, step, out, plot):
    """Population-dynamics report: trajectory, equilibria, conservation drift."""
    sink = _ArtifactSink(out)

    def body():
        config = _load(scenario)
        params = config.model
        eq = dynamics.equilibria(params)
        u_star, a_star = eq.coexistence
        initial = dynamics.PopulationState(1.3 * u_star, a_star)
        h = step if step is not None else dynamics.default_step(params)
        span = horizon if horizon is not None else dynamics.orbit_period(
            params, initial, h)
        trajectory = dynamics.integrate(params, initial, span, h)

        k0 = dynamics.constant_of_motion(params, initial)
        drift = max(
            abs(dynamics.constant_of_motion(params, s) - k0) / k0
            for s in trajectory
            if s.num_unit > 0 and s.num_actv > 0
        )
        payload = {
            "params": {"alpha": params.alpha, "beta": params.beta,
                       "gamma": params.gamma, "delta": params.delta},
            "equilibria": {"trivial": eq.trivial, "coexistence": eq.coexistence},
            "k_star": dynamics.k_star(params),
            "initial_k": k0,
            "max_relative_k_drift": drift,
            "step": h,
            "horizon": span,
            "clamped": trajectory.clamped,
        }
        sink.add(report.write_json(out / "lv_report.json", payload))
        sink.add(report.write_trajectory_csv(out / "lv_trajectory.csv", trajectory))
        if plot:
            sink.add(figures.plot_phase_portrait(
                trajectory, eq, out / "phase_portrait.png"))
        _write_manifest(sink, config.serialize(), seeds=[])
        click.echo(
            f"K* = {payload['k_star']:.6g}, max relative K drift = {drift:.3g}"
        )

    _run_command(ctx, sink, body)


@cli.command("simulate")
@_scenario_option
@click.option("--seed", type=int, default=None, help="Override the scenario seed.")
@click.option("--defenders", type=int, default=None,
              help="Override the scenario defender count.")
@_out_option
@_plot_option
@click.pass_context
def cmd_simulate(ctx, scenario, seed, defenders, out, plot):
    """One campaign run: JSON report plus time-series CSVs."""
    sink = _ArtifactSink(out)

    def body():
        config = _load(scenario)
        spec = config.scenario
        if seed is not None:
            spec = replace(spec, seed=seed)
        if defenders is not None:
            spec = replace(spec, defender_count=defenders)
        topology = engine.build_topology(
            spec.defender_count, config.filter_capacity, config.coordinator_units
        )
        result = engine.run(spec, topology, config.cost, config.quote)
        sink.add(report.write_report_json(out / "report.json", result))
        sink.add(report.write_series_csv(out / "series.csv", result))
        sink.add(report.write_delays_csv(out / "delays.csv", result))
        if plot:
            sink.add(figures.plot_utilization(result, out / "utilization.png"))
            sink.add(figures.plot_active_bots(result, out / "active_bots.png"))
        _write_manifest(sink, config.serialize(), seeds=[spec.seed])
        click.echo(
            f"defenders={result.defender_count} "
            f"util={result.mean_utilization:.3f} "
            f"delay_ms={result.benign_delay_mean * 1000:.1f} "
            f"cancel={result.cancellation_rate:.3f} "
            f"expense={result.attacker_expense:.0f}"
        )

    _run_command(ctx, sink, body)


@cli.command("sweep")
@_scenario_option
@click.option("--defenders", default="1,2,3,4,5,6", show_default=True,
              help="Comma-separated defender counts.")
@click.option("--seeds", default="1,2,3,4,5", show_default=True,
              help="Comma-separated seeds.")
@click.option("--theta", type=float, default=None, help="Override cost theta.")
@_out_option
@_plot_option
@click.pass_context
def cmd_sweep(ctx, scenario, defenders, seeds, theta, out, plot):
    """Defender-count x seed comparison matrix plus aggregate CSV."""
    sink = _ArtifactSink(out)

    def body():
        config = _load(scenario)
        counts = _parse_int_list(defenders, "--defenders")
        seed_list = _parse_int_list(seeds, "--seeds")
        cost = config.cost if theta is None else replace(config.cost, theta=theta)
        reports = engine.sweep(
            config.scenario, counts, seed_list, cost, config.quote,
            filter_capacity=config.filter_capacity,
            coordinator_units=config.coordinator_units,
        )
        for r in reports:
            sink.add(report.write_report_json(
                out / f"report_d{r.defender_count}_s{r.seed}.json", r))
        sink.add(report.write_sweep_csv(out / "sweep_summary.csv", reports))
        if plot:
            sink.add(figures.plot_sweep(reports, out / "sweep_curves.png"))
        _write_manifest(sink, config.serialize(), seeds=seed_list)
        click.echo(f"{len(reports)} runs -> {out / 'sweep_summary.csv'}")

    _run_command(ctx, sink, body)


def main(argv=None):
    return cli.main(args=argv, standalone_mode=True)


if __name__ == "__main__":
    sys.exit(main())
