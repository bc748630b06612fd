"""Sweep runner: compare discrete values against oracles across (dt, delta).

For every cell of the (dt, delta) product the harness regularizes the
Hamiltonian, solves by the requested route(s), evaluates the oracle value
u(x_s, 0), and checks the signed error u - u_bar against the two-sided bounds

    -[ (C1 C2 T / 2)((e^{C2 T} - 1) dt + dt^2)
       + (C1 C3 / 2)(e^{C2 T} - 1) dt + T delta ] - eps_oracle
    <= u - u_bar <=
    (1/2) C1 C2 (C3 + 1) e^{C2 T} T dt + T delta + eps_oracle,

where eps_oracle is zero for closed-form oracles and a refinement estimate for
the grid solver.  It also fits the dt convergence order at the smallest delta
and measures whether shrinking delta at the smallest dt ever increases the
error (it must not: the error bound carries delta and dt independently, with
no dt^2/delta coupling).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import catalog
from .errors import SympontError
from .oracle import default_grid, exact_value, solve_grid_dp
from .problems import ControlProblem, regularize
from .solver import SweepOptions, dual_bound_check, solve_tpbvp
from .variational import MinimizeOptions, minimize_J

_FLOAT_FMT = ".17g"

#: Grid-oracle resolutions per state dimension: (nodes, steps, controls) for
#: the coarse and fine solves backing the refinement estimate.
_DP_PARAMS = {
    1: ((4001, 500, 41), (8001, 1000, 81)),
    2: ((161, 50, 49), (321, 50, 98)),
}


@dataclass(frozen=True)
class ExperimentSpec:
    """One sweep request.  ``x_s = None`` uses the catalog default start."""

    problem_id: str
    x_s: Optional[np.ndarray] = None
    dt_list: tuple = (0.1, 0.05, 0.025, 0.0125, 0.00625)
    delta_list: tuple = (1e-2, 1e-4, 1e-6)
    oracle: str = "exact"
    solver_route: str = "tpbvp"
    seed: int = 0
    output_dir: Optional[Path] = None
    delta_ref: float = 1e-4
    workers: int = 1

    def __post_init__(self):
        dts = tuple(float(v) for v in self.dt_list)
        if not dts or any(b >= a for a, b in zip(dts, dts[1:])):
            raise ValueError("dt_list must be nonempty and strictly decreasing")
        deltas = tuple(float(v) for v in self.delta_list)
        if not deltas or any(d <= 0 for d in deltas):
            raise ValueError("delta_list must be nonempty and positive")
        if self.oracle not in ("exact", "grid", "both"):
            raise ValueError("oracle must be exact, grid, or both")
        if self.solver_route not in ("tpbvp", "variational", "both"):
            raise ValueError("solver_route must be tpbvp, variational, or both")
        object.__setattr__(self, "dt_list", dts)
        object.__setattr__(self, "delta_list", deltas)
        if self.x_s is not None:
            object.__setattr__(
                self, "x_s", np.asarray(self.x_s, dtype=float).reshape(-1)
            )


@dataclass(frozen=True)
class CellRecord:
    problem: str
    dt: float
    delta: float
    route: str
    u_bar: float
    u_oracle: float
    err_signed: float
    lower_bound: float
    upper_bound: float
    lower_ok: bool
    upper_ok: bool
    dual_slack: float
    sweeps: int
    residual: float


@dataclass(frozen=True)
class OracleInfo:
    kind: str
    value: float
    epsilon: float
    grid_fine: float = math.nan
    grid_coarse: float = math.nan
    cross_check: float = math.nan  # |exact - grid| when both were computed


@dataclass(frozen=True)
class ExperimentReport:
    spec: ExperimentSpec
    cells: tuple
    oracle_info: OracleInfo
    dt_order: Optional[float]
    delta_order: Optional[float]
    delta_excess: float
    failures: tuple = field(default_factory=tuple)

    @property
    def all_lower_ok(self) -> bool:
        return all(c.lower_ok for c in self.cells)

    @property
    def all_upper_ok(self) -> bool:
        return all(c.upper_ok for c in self.cells)

    @property
    def no_delta_blowup(self) -> bool:
        return self.delta_excess <= 1e-9

    @property
    def exit_code(self) -> int:
        if self.failures:
            return 2
        if not (self.all_lower_ok and self.all_upper_ok):
            return 1
        return 0


def error_bounds(
    p: ControlProblem, dt: float, delta: float, eps_oracle: float
) -> tuple[float, float]:
    """Magnitudes (lower, upper) such that -lower <= u - u_bar <= upper."""
    c1, c2, c3, t = (
        p.lipschitz_lambda,
        p.lipschitz_x,
        p.terminal_grad_bound,
        p.horizon,
    )
    growth = math.exp(c2 * t)
    lower = (
        (c1 * c2 * t / 2.0) * ((growth - 1.0) * dt + dt * dt)
        + (c1 * c3 / 2.0) * (growth - 1.0) * dt
        + t * delta
        + eps_oracle
    )
    upper = 0.5 * c1 * c2 * (c3 + 1.0) * growth * t * dt + t * delta + eps_oracle
    return lower, upper


def grid_oracle_value(p: ControlProblem, x_s) -> tuple[float, float, float, float]:
    """(value, eps, fine, coarse): Richardson estimate from two resolutions.

    Consecutive refinements contract the oracle error by about 0.6 or better,
    so the geometric tail gives |u_true - u_fine| <= 1.5 |u_fine - u_coarse|;
    the returned value applies one first-order Richardson correction and keeps
    the conservative 1.5 |diff| as its accuracy estimate.
    """
    if p.dim not in _DP_PARAMS:
        raise ValueError(f"no grid-oracle resolution policy for dimension {p.dim}")
    (nc, sc, cc), (nf, sf, cf) = _DP_PARAMS[p.dim]
    coarse = solve_grid_dp(p, default_grid(p, nc), sc, cc).value_at(x_s, 0)
    fine = solve_grid_dp(p, default_grid(p, nf), sf, cf).value_at(x_s, 0)
    diff = fine - coarse
    return fine + diff, 1.5 * abs(diff) + 1e-12, fine, coarse


def _oracle(spec: ExperimentSpec, p: ControlProblem, x_s) -> OracleInfo:
    exact = exact_value(p, x_s, 0.0)
    if spec.oracle == "exact":
        if exact is None:
            raise ValueError(
                f"problem {spec.problem_id!r} has no closed-form value; "
                "use oracle='grid'"
            )
        return OracleInfo(kind="exact", value=exact, epsilon=0.0)
    value, eps, fine, coarse = grid_oracle_value(p, x_s)
    if spec.oracle == "grid":
        return OracleInfo(
            kind="grid", value=value, epsilon=eps, grid_fine=fine, grid_coarse=coarse
        )
    if exact is None:
        raise ValueError(
            f"oracle='both' needs a closed form, which {spec.problem_id!r} lacks"
        )
    return OracleInfo(
        kind="both",
        value=exact,
        epsilon=0.0,
        grid_fine=fine,
        grid_coarse=coarse,
        cross_check=abs(exact - value),
    )


def _solve_cell(entry, h, x_s, N, route, seed):
    p = entry.problem
    if route == "tpbvp":
        traj = solve_tpbvp(h, x_s, N, SweepOptions())
        report = dual_bound_check(traj, p)
        return traj.value, report.slack, traj.diagnostics.sweeps, traj.diagnostics.final_residual
    dv = minimize_J(h, x_s, 0, N, MinimizeOptions(seed=seed))
    norms = np.linalg.norm(dv.multipliers, axis=-1)
    slack = p.dual_bound - float(np.max(norms))
    return (
        dv.value,
        slack,
        int(max(dv.diagnostics.iterations_per_start)),
        dv.diagnostics.projected_gradient_norm,
    )


def run_sweep(spec: ExperimentSpec) -> ExperimentReport:
    """Execute the sweep described by ``spec`` and assemble the report.

    Solver failures are recorded per cell and the sweep continues; an oracle
    failure aborts with context.  Cells are independent and may be solved by a
    small thread pool; assembly is an index-ordered reduction, so reports are
    reproducible bit for bit.
    """
    entry = catalog.get(spec.problem_id)
    p = entry.problem
    x_s = spec.x_s if spec.x_s is not None else entry.default_start
    x_s = np.asarray(x_s, dtype=float).reshape(p.dim)
    oracle_info = _oracle(spec, p, x_s)

    routes = ("tpbvp", "variational") if spec.solver_route == "both" else (spec.solver_route,)
    method = "problem_supplied" if p.smooth_family is not None else "smoothed_min"
    surrogates = {d: regularize(p, d, method) for d in spec.delta_list}

    tasks = []
    for dt in spec.dt_list:
        n_steps = max(1, int(round(p.horizon / dt)))
        for delta in spec.delta_list:
            for route in routes:
                tasks.append((dt, n_steps, delta, route))

    def solve_one(task):
        dt, n_steps, delta, route = task
        try:
            u_bar, slack, sweeps, residual = _solve_cell(
                entry, surrogates[delta], x_s, n_steps, route, spec.seed
            )
        except SympontError as exc:
            return ("failure", f"dt={dt:g} delta={delta:g} route={route}: {exc}")
        err = oracle_info.value - u_bar
        lower, upper = error_bounds(p, p.horizon / n_steps, delta, oracle_info.epsilon)
        return (
            "cell",
            CellRecord(
                problem=spec.problem_id,
                dt=p.horizon / n_steps,
                delta=delta,
                route=route,
                u_bar=u_bar,
                u_oracle=oracle_info.value,
                err_signed=err,
                lower_bound=lower,
                upper_bound=upper,
                lower_ok=err >= -lower,
                upper_ok=err <= upper,
                dual_slack=slack,
                sweeps=sweeps,
                residual=residual,
            ),
        )

    if spec.workers > 1:
        with ThreadPoolExecutor(max_workers=spec.workers) as pool:
            outcomes = list(pool.map(solve_one, tasks))
    else:
        outcomes = [solve_one(t) for t in tasks]

    cells = tuple(o[1] for o in outcomes if o[0] == "cell")
    failures = tuple(o[1] for o in outcomes if o[0] == "failure")

    primary = routes[0]
    min_delta = min(spec.delta_list)
    dt_cells = [c for c in cells if c.delta == min_delta and c.route == primary]
    dt_order = fit_order([(c.dt, abs(c.err_signed)) for c in dt_cells])

    min_dt = min(c.dt for c in cells) if cells else math.nan
    d_cells = sorted(
        (c for c in cells if c.dt == min_dt and c.route == primary),
        key=lambda c: c.delta,
    )
    delta_order = fit_order([(c.delta, abs(c.err_signed)) for c in d_cells])
    ref = spec.delta_ref
    ref_cells = [c for c in d_cells if c.delta >= ref]
    excess = 0.0
    if ref_cells:
        ref_err = abs(min(ref_cells, key=lambda c: c.delta).err_signed)
        for c in d_cells:
            if c.delta <= ref:
                excess = max(excess, abs(c.err_signed) - ref_err)

    return ExperimentReport(
        spec=spec,
        cells=cells,
        oracle_info=oracle_info,
        dt_order=dt_order,
        delta_order=delta_order,
        delta_excess=excess,
        failures=failures,
    )


def fit_order(errors) -> Optional[float]:
    """Least-squares slope of log(error) against log(scale).

    Nonpositive errors are dropped (log undefined); fewer than three
    survivors yields ``None``, the fit-unavailable marker.
    """
    pts = [(float(h), float(e)) for h, e in errors if e > 0 and h > 0]
    if len(pts) < 3:
        return None
    hs = np.log([h for h, _ in pts])
    es = np.log([e for _, e in pts])
    return float(np.polyfit(hs, es, 1)[0])


# ---------------------------------------------------------------------------
# Report files
# ---------------------------------------------------------------------------

CSV_COLUMNS = (
    "problem",
    "dt",
    "delta",
    "route",
    "u_bar",
    "u_oracle",
    "err_signed",
    "lower_bound",
    "upper_bound",
    "lower_ok",
    "upper_ok",
    "dual_slack",
    "sweeps",
    "residual",
)


def _cell_row(c: CellRecord) -> str:
    f = lambda v: format(float(v), _FLOAT_FMT)
    return ",".join(
        [
            c.problem,
            f(c.dt),
            f(c.delta),
            c.route,
            f(c.u_bar),
            f(c.u_oracle),
            f(c.err_signed),
            f(c.lower_bound),
            f(c.upper_bound),
            "true" if c.lower_ok else "false",
            "true" if c.upper_ok else "false",
            f(c.dual_slack),
            str(c.sweeps),
            f(c.residual),
        ]
    )


def read_cells_csv(path) -> list:
    """Inverse of the cells.csv writer; reproduces the records exactly."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        if tuple(header) != CSV_COLUMNS:
            raise ValueError(f"unexpected cells.csv header: {header}")
        rows = [line.strip().split(",") for line in fh if line.strip()]
    out = []
    for r in rows:
        out.append(
            CellRecord(
                problem=r[0],
                dt=float(r[1]),
                delta=float(r[2]),
                route=r[3],
                u_bar=float(r[4]),
                u_oracle=float(r[5]),
                err_signed=float(r[6]),
                lower_bound=float(r[7]),
                upper_bound=float(r[8]),
                lower_ok=r[9] == "true",
                upper_ok=r[10] == "true",
                dual_slack=float(r[11]),
                sweeps=int(r[12]),
                residual=float(r[13]),
            )
        )
    return out


def _plot_reports(report: ExperimentReport, out: Path) -> list:
    import matplotlib

    matplotlib.use("Agg")
    matplotlib.rcParams["svg.hashsalt"] = "sympont"
    import matplotlib.pyplot as plt

    written = []
    routes = sorted({c.route for c in report.cells})
    deltas = sorted({c.delta for c in report.cells})

    fig, ax = plt.subplots(figsize=(6, 4.2))
    for route in routes:
        for delta in deltas:
            pts = sorted(
                (c.dt, abs(c.err_signed))
                for c in report.cells
                if c.route == route and c.delta == delta
            )
            if pts:
                ax.loglog(
                    [q[0] for q in pts],
                    [max(q[1], 1e-18) for q in pts],
                    marker="o",
                    label=f"{route}, delta={delta:g}",
                )
    ax.set_xlabel("dt")
    ax.set_ylabel("|u - u_bar|")
    ax.set_title(f"{report.spec.problem_id}: error vs dt")
    ax.grid(True, which="both", alpha=0.3)
    if report.cells:
        ax.legend(fontsize=7)
    path = out / "error_vs_dt.svg"
    fig.savefig(path, metadata={"Date": None})
    plt.close(fig)
    written.append(path)

    fig, ax = plt.subplots(figsize=(6, 4.2))
    min_dt = min((c.dt for c in report.cells), default=None)
    for route in routes:
        pts = sorted(
            (c.delta, abs(c.err_signed))
            for c in report.cells
            if c.route == route and c.dt == min_dt
        )
        if pts:
            ax.loglog(
                [q[0] for q in pts],
                [max(q[1], 1e-18) for q in pts],
                marker="s",
                label=f"{route}, dt={min_dt:g}",
            )
    ax.set_xlabel("delta")
    ax.set_ylabel("|u - u_bar|")
    ax.set_title(f"{report.spec.problem_id}: error vs delta at the smallest dt")
    ax.grid(True, which="both", alpha=0.3)
    if report.cells:
        ax.legend(fontsize=7)
    path = out / "error_vs_delta.svg"
    fig.savefig(path, metadata={"Date": None})
    plt.close(fig)
    written.append(path)
    return written


def emit_reports(report: ExperimentReport, output_dir) -> list:
    """Write cells.csv, summary.txt and the two SVG plots; returns the paths."""
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    csv_path = out / "cells.csv"
    with open(csv_path, "w", encoding="utf-8") as fh:
        fh.write(",".join(CSV_COLUMNS) + "\n")
        for c in report.cells:
            fh.write(_cell_row(c) + "\n")
    written.append(csv_path)

    lines = [
        f"problem: {report.spec.problem_id}",
        f"oracle: {report.oracle_info.kind} -> u = {report.oracle_info.value!r} "
        f"(eps_oracle = {report.oracle_info.epsilon!r})",
        f"cells: {len(report.cells)}"
        + (" (zero cells)" if not report.cells else ""),
        f"lower-bound verdicts: {'all pass' if report.all_lower_ok else 'VIOLATED'}",
        f"upper-bound verdicts: {'all pass' if report.all_upper_ok else 'VIOLATED'}",
        f"fitted dt order at smallest delta: {report.dt_order!r}",
        f"fitted delta order at smallest dt: {report.delta_order!r}",
        f"delta-shrink excess over delta_ref={report.spec.delta_ref:g}: "
        f"{report.delta_excess!r} (no blow-up: {report.no_delta_blowup})",
    ]
    for fmsg in report.failures:
        lines.append(f"cell failure: {fmsg}")
    lines.append(f"EXIT {report.exit_code}")
    summary_path = out / "summary.txt"
    with open(summary_path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    written.append(summary_path)

    written.extend(_plot_reports(report, out))
    return written
