"""Independent ground truth for value functions: closed forms and grid DP.

The grid solver discretizes the variational representation of the value
function by backward dynamic programming on a uniform tensor grid:

    u[., N] = g on the nodes,
    u[x, n] = min over sampled controls a of { dt * L(x, a) + I u[., n+1](x + dt a) },

with multilinear interpolation I (monotone, non-expansive).  The running cost
is the problem's un-regularized analytic L when available, so errors measured
against the smoothed solvers decompose cleanly into the T*delta regularization
part and the O(dt) scheme part.

Interpolation exploits uniformity: for a fixed control the query points
``x_i + dt a`` are one rigid shift of the grid, so each control costs 2^d
clamped gathers instead of a general interpolation call.  Clamping at the box
edge only ever matters outside the reachable set of a valid query; queries are
validated against the information cone, and violations raise rather than
silently touching clamped data.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ReachabilityError
from .problems import ControlProblem, RegularizedHamiltonian, identity_regularization
from .solver import DiscreteTrajectory, SweepOptions, solve_tpbvp

_L_CACHE_BUDGET = int(2e7)  # precomputed stage-cost entries (nodes x controls)


@dataclass(frozen=True)
class GridSpec:
    """Axis-aligned uniform grid: per-axis [lower, upper] with node counts."""

    lower: np.ndarray
    upper: np.ndarray
    nodes: tuple

    def __post_init__(self):
        lo = np.asarray(self.lower, dtype=float).reshape(-1)
        hi = np.asarray(self.upper, dtype=float).reshape(-1)
        nodes = tuple(int(n) for n in np.atleast_1d(self.nodes))
        if len(lo) != len(hi) or len(lo) != len(nodes):
            raise ValueError("lower, upper and nodes must share one length")
        if np.any(lo >= hi) or any(n < 2 for n in nodes):
            raise ValueError("need lower < upper and at least 2 nodes per axis")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)
        object.__setattr__(self, "nodes", nodes)

    @property
    def dim(self) -> int:
        return len(self.nodes)

    @property
    def spacing(self) -> np.ndarray:
        return (self.upper - self.lower) / (np.asarray(self.nodes) - 1)

    def axes(self):
        return [
            np.linspace(self.lower[a], self.upper[a], self.nodes[a])
            for a in range(self.dim)
        ]

    def points(self) -> np.ndarray:
        mesh = np.meshgrid(*self.axes(), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)


def default_grid(p: ControlProblem, nodes_per_axis: int) -> GridSpec:
    return GridSpec(
        lower=p.domain_box[:, 0],
        upper=p.domain_box[:, 1],
        nodes=(int(nodes_per_axis),) * p.dim,
    )


def control_ball_samples(c1: float, dim: int, count: int) -> np.ndarray:
    """Sample the closed C1 ball: a uniform line in 1-D, rings plus the
    origin in 2-D (ring j of m carries 8j equally spaced angles).

    Doubling the resolution (count -> refinement with twice the shells, or
    2k - 1 line points) yields a superset, so refining the sample can only
    lower the DP values.
    """
    if c1 == 0:
        return np.zeros((1, dim))
    if dim == 1:
        return np.linspace(-c1, c1, max(int(count), 2))[:, None]
    if dim == 2:
        m = 1
        while 1 + 4 * (m + 1) * (m + 2) <= count:
            m += 1
        pts = [np.zeros((1, 2))]
        for j in range(1, m + 1):
            r = c1 * j / m
            ang = np.linspace(0.0, 2 * np.pi, 8 * j, endpoint=False)
            pts.append(np.stack([r * np.cos(ang), r * np.sin(ang)], axis=-1))
        return np.concatenate(pts, axis=0)
    # d >= 3: seeded low-discrepancy-ish sampling of shells.
    rng = np.random.default_rng(0)
    u = rng.normal(size=(max(count - 1, 1), dim))
    u /= np.linalg.norm(u, axis=-1, keepdims=True)
    r = c1 * (np.arange(1, len(u) + 1) / len(u)) ** (1.0 / dim)
    return np.concatenate([np.zeros((1, dim)), u * r[:, None]], axis=0)


@dataclass(frozen=True)
class GridValueFunction:
    """Tensor-product samples of the value function with multilinear queries."""

    grid: GridSpec
    times: np.ndarray
    values: np.ndarray  # shape grid.nodes + (N+1,)
    reach_speed: float
    horizon: float
    problem_id: str = ""
    control_sample_count: int = 0
    interpolation: str = "multilinear"

    @property
    def steps(self) -> int:
        return len(self.times) - 1

    def _interp_weights(self, x: np.ndarray):
        rel = (x - self.grid.lower) / self.grid.spacing
        base = np.floor(rel).astype(int)
        base = np.clip(base, 0, np.asarray(self.grid.nodes) - 2)
        frac = rel - base
        return base, np.clip(frac, 0.0, 1.0)

    def value_at(self, x, n: int) -> float:
        """Interpolated u(x, t_n); raises outside the information-safe region.

        The DP slice at time t_n is contaminated by edge clamping within
        distance C1 (T - t_n) of the box boundary, so queries must keep that
        cone inside the box.
        """
        x = np.asarray(x, dtype=float).reshape(self.grid.dim)
        margin = self.reach_speed * (self.horizon - float(self.times[n]))
        if np.any(x - margin < self.grid.lower) or np.any(x + margin > self.grid.upper):
            raise ReachabilityError(
                f"query {x.tolist()} at slice {n} needs margin {margin:.3g}; "
                "the information cone leaves the grid box"
            )
        base, frac = self._interp_weights(x)
        out = 0.0
        for corner in range(1 << self.grid.dim):
            idx = []
            w = 1.0
            for a in range(self.grid.dim):
                hi = (corner >> a) & 1
                idx.append(base[a] + hi)
                w *= frac[a] if hi else 1.0 - frac[a]
            out += w * self.values[tuple(idx) + (n,)]
        return float(out)

    def export_csv(self, path) -> None:
        """All (node, time index) samples: coordinate columns, n, value."""
        d = self.grid.dim
        pts = self.grid.points()
        fmt = lambda v: format(float(v), ".17g")
        cols = [f"x_{i}" for i in range(d)] + ["n", "value"]
        flat = self.values.reshape(-1, len(self.times))
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(",".join(cols) + "\n")
            for n in range(len(self.times)):
                for i in range(pts.shape[0]):
                    row = [fmt(v) for v in pts[i]] + [str(n), fmt(flat[i, n])]
                    fh.write(",".join(row) + "\n")

    def export_metadata(self, path) -> None:
        meta = {
            "problem_id": self.problem_id,
            "grid": {
                "lower": self.grid.lower.tolist(),
                "upper": self.grid.upper.tolist(),
                "nodes": list(self.grid.nodes),
            },
            "steps": self.steps,
            "horizon": self.horizon,
            "control_sample_count": self.control_sample_count,
            "interpolation": self.interpolation,
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(meta, fh, indent=2, sort_keys=True)
            fh.write("\n")


def _shift_gather(u_padded: np.ndarray, pad: int, shape, offsets, fracs) -> np.ndarray:
    """Multilinear lookup of u at every node shifted by one rigid offset.

    ``u_padded`` is the slice padded by ``pad`` cells of edge values per side,
    so every corner of the interpolation stencil is a zero-copy view.
    """
    dim = len(shape)
    out = None
    for corner in range(1 << dim):
        w = 1.0
        sl = []
        for a in range(dim):
            hi = (corner >> a) & 1
            start = pad + offsets[a] + hi
            sl.append(slice(start, start + shape[a]))
            w *= fracs[a] if hi else 1.0 - fracs[a]
        if w == 0.0:
            continue
        term = w * u_padded[tuple(sl)]
        out = term if out is None else out + term
    return out


def solve_grid_dp(
    p: ControlProblem,
    grid: GridSpec,
    N: int,
    control_samples: int,
    problem_id: str = "",
) -> GridValueFunction:
    """Backward semi-Lagrangian sweep of the value recursion on ``grid``.

    ``control_samples`` sets the cardinality of the control sample of the C1
    ball.  Needs the analytic running cost for large grids; without one the
    stage costs fall back to the numeric conjugate, which is refused beyond a
    size budget.  ``problem_id`` is carried into the export metadata.
    """
    if grid.dim != p.dim:
        raise ValueError("grid dimension does not match the problem")
    if N < 0:
        raise ValueError("N must be nonnegative")
    dt = p.horizon / N if N > 0 else p.horizon
    controls = control_ball_samples(p.lipschitz_lambda, p.dim, control_samples)
    pts = grid.points()
    n_nodes = pts.shape[0]

    values = np.empty(grid.nodes + (N + 1,))
    values[..., N] = p.g(pts).reshape(grid.nodes)
    if N == 0:
        return GridValueFunction(
            grid=grid,
            times=np.array([p.horizon]),
            values=values,
            reach_speed=p.lipschitz_lambda,
            horizon=p.horizon,
            problem_id=problem_id,
            control_sample_count=len(controls),
        )

    if p.running_cost is not None:
        l_fn = p.running_cost
    else:
        if n_nodes * len(controls) > _L_CACHE_BUDGET:
            raise ValueError(
                "no analytic running cost and the numeric conjugate would need "
                f"{n_nodes * len(controls):.2e} evaluations; supply running_cost"
            )
        from .problems import conjugate_running_cost_batch

        def l_fn(x, a):
            vals, _ = conjugate_running_cost_batch(
                p.hamiltonian,
                p.hamiltonian_grad_lambda,
                x,
                a,
                p.default_lambda_radius,
            )
            return vals

    spacing = grid.spacing
    shifts = []
    pad = 1
    for a_vec in controls:
        sigma = dt * a_vec / spacing
        k = np.floor(sigma).astype(int)
        shifts.append((k, sigma - k))
        pad = max(pad, int(np.max(np.abs(k))) + 2)

    cache_stage = n_nodes * len(controls) <= _L_CACHE_BUDGET
    stage_costs = None
    if cache_stage:
        stage_costs = [
            dt * np.asarray(l_fn(pts, np.broadcast_to(a, pts.shape)), float).reshape(grid.nodes)
            for a in controls
        ]

    for n in range(N - 1, -1, -1):
        u_padded = np.pad(values[..., n + 1], pad, mode="edge")
        best = None
        for ci, (k, f) in enumerate(shifts):
            moved = _shift_gather(u_padded, pad, grid.nodes, k, f)
            if cache_stage:
                cand = stage_costs[ci] + moved
            else:
                stage = dt * np.asarray(
                    l_fn(pts, np.broadcast_to(controls[ci], pts.shape)), float
                ).reshape(grid.nodes)
                cand = stage + moved
            best = cand if best is None else np.minimum(best, cand)
        values[..., n] = best

    return GridValueFunction(
        grid=grid,
        times=dt * np.arange(N + 1),
        values=values,
        reach_speed=p.lipschitz_lambda,
        horizon=p.horizon,
        problem_id=problem_id,
        control_sample_count=len(controls),
    )


def exact_value(p: ControlProblem, x, t: float) -> Optional[float]:
    """Closed-form u(x, t) when the problem ships one, else None."""
    if p.exact_value is None:
        return None
    return float(p.exact_value(np.asarray(x, dtype=float).reshape(p.dim), float(t)))


def continuous_hamiltonian_flow(
    problem, x_s, n_fine: int = 10_000
) -> DiscreteTrajectory:
    """High-resolution reference integration of the boundary-value system.

    Accepts a smooth problem (wrapped as its own surrogate) or an already
    regularized Hamiltonian; with ``n_fine >= 1e4`` steps the result serves as
    a near-continuum reference path for qualitative comparisons.
    """
    h = problem if isinstance(problem, RegularizedHamiltonian) else identity_regularization(problem)
    return solve_tpbvp(h, x_s, int(n_fine), SweepOptions(fallback="none"))
