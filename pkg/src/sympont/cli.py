"""Command-line interface: convergence sweeps and catalog inspection."""

from __future__ import annotations

import sys

import click
import numpy as np

from . import catalog
from .harness import ExperimentSpec, emit_reports, run_sweep
from .problems import verify_constants


def _floats(text: str) -> tuple:
    return tuple(float(tok) for tok in text.split(",") if tok.strip())


@click.group()
def main():
    """Symplectic Pontryagin value-function solvers and verification sweeps."""


@main.command("run")
@click.option("--problem", required=True, help="catalog problem id")
@click.option("--x0", default=None, help="start state as comma-separated floats")
@click.option("--dt", default="0.1,0.05,0.025,0.0125,0.00625", help="decreasing dt list")
@click.option("--delta", default="1e-2,1e-4,1e-6", help="regularization delta list")
@click.option(
    "--oracle",
    type=click.Choice(["exact", "grid", "both"]),
    default="exact",
    show_default=True,
)
@click.option(
    "--route",
    type=click.Choice(["tpbvp", "variational", "both"]),
    default="tpbvp",
    show_default=True,
)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", required=True, type=click.Path(), help="report directory")
@click.option("--workers", type=int, default=1, show_default=True)
def run(problem, x0, dt, delta, oracle, route, seed, out, workers):
    """Run a (dt, delta) sweep and write cells.csv, summary.txt and plots.

    Exit code 0 when every bound verdict passes, 1 when any bound is
    violated, 2 on infrastructure failure.
    """
    try:
        spec = ExperimentSpec(
            problem_id=problem,
            x_s=np.array(_floats(x0)) if x0 else None,
            dt_list=_floats(dt),
            delta_list=_floats(delta),
            oracle=oracle,
            solver_route=route,
            seed=seed,
            output_dir=out,
            workers=workers,
        )
        report = run_sweep(spec)
        paths = emit_reports(report, out)
    except Exception as exc:  # infrastructure failure contract
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    for p in paths:
        click.echo(f"wrote {p}")
    click.echo(
        f"verdicts: lower={'ok' if report.all_lower_ok else 'VIOLATED'} "
        f"upper={'ok' if report.all_upper_ok else 'VIOLATED'}; "
        f"dt order={report.dt_order}; exit={report.exit_code}"
    )
    sys.exit(report.exit_code)


@main.command("list-problems")
def list_problems():
    """Print the catalog ids with one-line descriptions."""
    for pid in catalog.list_ids():
        click.echo(f"{pid}: {catalog.get(pid).description}")


@main.command("verify-constants")
@click.option("--problem", required=True, help="catalog problem id")
@click.option("--samples", type=int, default=10_000, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
def verify(problem, samples, seed):
    """Empirically certify the declared Lipschitz/concavity constants."""
    try:
        entry = catalog.get(problem)
        report = verify_constants(entry.problem, samples, seed)
    except Exception as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    click.echo(f"{problem}:")
    click.echo(str(report))
    sys.exit(0 if report.passed else 1)


if __name__ == "__main__":
    main()
