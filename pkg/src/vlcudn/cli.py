"""Command line front end: simulate, sweep, inspect-q."""

from __future__ import annotations

import dataclasses
import os
import sys

import click
import numpy as np

from .agent import QTable
from .config import ConfigError, load_experiment
from .harness import (
    SimulationAbort,
    converged_means,
    run_experiment,
    save_experiment,
    sweep_density,
)


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.version_option(package_name="vlcudn")
def main():
    """Q-learning transmit-power control in a dense indoor optical network."""


def _echo_summary(label: str, series) -> None:
    c = converged_means(series)
    click.echo(
        f"{label}: converged utility {c['utility']:.4g}, "
        f"rate {c['mean_rate_bps'] / 1e6:.4g} Mbit/s, "
        f"energy {c['energy_w'] * 1e3:.4g} mW, "
        f"ici {c['ici_w'] * 1e3:.4g} mW"
    )


@main.command()
@click.option(
    "--config",
    "config_path",
    required=True,
    type=click.Path(exists=True, dir_okay=False),
    help="Experiment config file.",
)
@click.option("--runs", type=int, default=None, help="Override the run count.")
@click.option("--seed", type=int, default=None, help="Override the base seed.")
@click.option("--policy", default=None, help="Override the policy.")
@click.option("--density", type=int, default=None, help="Override the UE count.")
@click.option(
    "--out",
    "out_dir",
    type=click.Path(file_okay=False),
    default=None,
    help="Directory for metrics.csv plus sidecars.",
)
@click.option("--workers", type=int, default=1, show_default=True,
              help="Processes for Monte-Carlo runs; 1 runs serially.")
@click.option("--per-run", is_flag=True, help="Also write one CSV per run (needs --out).")
def simulate(config_path, runs, seed, policy, density, out_dir, workers, per_run):
    """Run one experiment and report its converged metrics."""
    try:
        config = load_experiment(
            config_path, policy=policy, density=density, runs=runs, seed=seed
        )
        series = run_experiment(config, workers=workers, keep_runs=per_run)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(2)
    except SimulationAbort as exc:
        click.echo(f"aborted: {exc}", err=True)
        sys.exit(3)
    _echo_summary(
        f"policy={config.policy} density={config.ue_density} runs={config.runs}", series
    )
    if out_dir:
        for path in save_experiment(out_dir, config, series):
            click.echo(f"wrote {path}")


@main.command()
@click.option(
    "--config",
    "config_path",
    required=True,
    type=click.Path(exists=True, dir_okay=False),
    help="Experiment config file.",
)
@click.option("--densities", required=True, help="Comma-separated UE counts, e.g. 1,2,3.")
@click.option(
    "--out",
    "out_dir",
    required=True,
    type=click.Path(file_okay=False),
    help="Directory; one rho<N> subdirectory per density.",
)
@click.option("--runs", type=int, default=None, help="Override the run count.")
@click.option("--seed", type=int, default=None, help="Override the base seed.")
@click.option("--workers", type=int, default=1, show_default=True,
              help="Processes for Monte-Carlo runs; 1 runs serially.")
def sweep(config_path, densities, out_dir, runs, seed, workers):
    """Repeat the experiment across several UE densities."""
    try:
        parsed = [int(tok) for tok in densities.split(",") if tok.strip()]
    except ValueError:
        raise click.BadParameter(
            "must be comma-separated integers", param_hint="--densities"
        ) from None
    try:
        config = load_experiment(config_path, runs=runs, seed=seed)
        series_list = sweep_density(config, parsed, workers=workers)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(2)
    except SimulationAbort as exc:
        click.echo(f"aborted: {exc}", err=True)
        sys.exit(3)
    for density, series in zip(parsed, series_list):
        sub = os.path.join(out_dir, f"rho{density}")
        config_d = dataclasses.replace(config, ue_density=density)
        _echo_summary(f"policy={config.policy} density={density} runs={config.runs}", series)
        for path in save_experiment(sub, config_d, series):
            click.echo(f"wrote {path}")


def _decode_levels(index: int, n_ues: int, n_levels: int) -> list[int]:
    digits = []
    for _ in range(n_ues):
        digits.append(index % n_levels)
        index //= n_levels
    digits.reverse()
    return digits


@main.command("inspect-q")
@click.option(
    "--qtable",
    "qtable_path",
    required=True,
    type=click.Path(exists=True, dir_okay=False),
    help="Exported q-table file.",
)
@click.option("--top", type=int, default=5, show_default=True,
              help="How many best states to list.")
def inspect_q(qtable_path, top):
    """Summarize an exported Q-table."""
    try:
        table, meta = QTable.load(qtable_path)
    except (ValueError, OSError) as exc:
        click.echo(f"cannot read q-table: {exc}", err=True)
        sys.exit(2)
    click.echo(f"actions: {table.n_actions}")
    click.echo(
        "state grid: rate_bins=%s gain_bins=%s rate_max=%s gain_max=%s"
        % (meta.get("rate_bins"), meta.get("gain_bins"),
           meta.get("rate_max"), meta.get("gain_max"))
    )
    click.echo(f"states: {len(table)}")
    if not len(table):
        return
    rows = {state: table.row(state) for state in table.states()}
    entries = int(sum(np.count_nonzero(row) for row in rows.values()))
    stored = np.concatenate(list(rows.values()))
    click.echo(f"nonzero entries: {entries}")
    click.echo(f"value range: [{stored.min():.6g}, {stored.max():.6g}]")
    n_levels = meta.get("power_levels")
    max_power = meta.get("max_power")
    click.echo("best states:")
    ranked = sorted(rows, key=lambda s: rows[s].max(), reverse=True)[:top]
    for state in ranked:
        row = rows[state]
        best = int(np.argmax(row))
        line = f"  {state.to_str()}  action={best}  q={row[best]:.6g}"
        if n_levels is not None and max_power is not None:
            levels = _decode_levels(best, state.density, int(n_levels) + 1)
            mw = ", ".join("%.3g" % (l * max_power * 1e3 / n_levels) for l in levels)
            line += f"  power_mw=({mw})"
        click.echo(line)


if __name__ == "__main__":
    main()
