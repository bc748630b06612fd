"""Direct minimization of the discrete cost functional over control sequences.

The functional is

    J(alpha_m..alpha_{N-1}) = dt * sum_n L(x_n, alpha_n) + g(x_N),
    x_{n+1} = x_n + dt * alpha_n,  x_m = x_s,

minimized over the product of closed C1 balls (optimal controls provably live
there because H is C1-Lipschitz in the dual).  Its optimal value defines the
discrete value function that the sweep solver approximates through the
boundary-value system; the two routes agree at scheme solutions, and the
multiplier extraction below recovers the dual sequence from a minimizer.

Gradients of J come from the adjoint recursion, which is exactly the backward
dual recursion with the inner conjugate maximizer in place of the dual:
dJ/dalpha_n = dt * (L_alpha(x_n, alpha_n) + p_{n+1}) with
p_n = p_{n+1} + dt * L_x(x_n, alpha_n).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BudgetExceededError,
    ExtractionInconsistentError,
    OptimizationFailedError,
    ReachabilityError,
)
from .problems import RegularizedHamiltonian, conjugate_running_cost_batch

_BRUTE_BUDGET = 1e8


@dataclass(frozen=True)
class ControlVector:
    """A control sequence for the rollout x_{n+1} = x_n + dt * alpha_n."""

    controls: np.ndarray  # (K, d)
    start_index: int
    dt: float
    x_s: np.ndarray

    def rollout(self) -> np.ndarray:
        """States x_m..x_N induced by the controls, shape (K+1, d)."""
        states = np.empty((self.controls.shape[0] + 1, self.x_s.shape[0]))
        states[0] = self.x_s
        np.cumsum(self.controls * self.dt, axis=0, out=states[1:])
        states[1:] += self.x_s
        return states


@dataclass(frozen=True)
class MinimizeOptions:
    n_starts: int = 5
    seed: int = 0
    gtol: float = 1e-9
    max_iter: int = 600
    armijo: float = 1e-4


@dataclass(frozen=True)
class OptimizerDiagnostics:
    iterations_per_start: tuple
    values_per_start: tuple
    best_start: int
    projected_gradient_norm: float
    worst_stationarity: float


@dataclass(frozen=True)
class DiscreteValue:
    """Optimal value of the discrete functional with its minimizer and duals."""

    value: float
    minimizer: ControlVector
    multipliers: np.ndarray
    diagnostics: OptimizerDiagnostics = field(
        default_factory=lambda: OptimizerDiagnostics((), (), 0, np.nan, np.nan)
    )


def _running_cost_terms(h: RegularizedHamiltonian, states, controls, need_grads: bool):
    """Stage costs L(x_n, alpha_n) with optional (L_alpha, L_x) per step.

    Prefers the analytic smoothed running cost shipped by the regularization;
    otherwise evaluates the conjugate numerically and applies the envelope
    identities L_alpha = -mu*, L_x = H_x(x, mu*) at the inner maximizer mu*.
    """
    if h.running_cost is not None:
        vals = np.asarray(h.running_cost(states, controls), dtype=float)
        if not need_grads:
            return vals, None, None
        if h.running_cost_grad_alpha is not None:
            return (
                vals,
                np.asarray(h.running_cost_grad_alpha(states, controls), dtype=float),
                np.asarray(h.running_cost_grad_x(states, controls), dtype=float),
            )
    radius = h.base.default_lambda_radius
    vals, argmax = conjugate_running_cost_batch(
        h.hamiltonian, h.hamiltonian_grad_lambda, states, controls, radius
    )
    if not need_grads:
        return vals, None, None
    l_alpha = -argmax
    l_x = np.asarray(h.H_x(states, argmax), dtype=float)
    return vals, l_alpha, l_x


def discrete_cost(h: RegularizedHamiltonian, x_s, controls, dt: float) -> float:
    """J for one control sequence; +inf when any stage cost is infinite."""
    cv = ControlVector(np.asarray(controls, float), 0, dt, np.asarray(x_s, float))
    states = cv.rollout()
    stage, _, _ = _running_cost_terms(h, states[:-1], cv.controls, need_grads=False)
    if np.any(np.isinf(stage)):
        return float("inf")
    return float(dt * np.sum(stage) + h.g(states[-1]))


def discrete_cost_grad(h: RegularizedHamiltonian, x_s, controls, dt: float):
    """(J, dJ/dalpha) by the adjoint recursion; J may be +inf (grad then NaN)."""
    controls = np.asarray(controls, dtype=float)
    cv = ControlVector(controls, 0, dt, np.asarray(x_s, float))
    states = cv.rollout()
    stage, l_alpha, l_x = _running_cost_terms(h, states[:-1], controls, need_grads=True)
    if np.any(np.isinf(stage)):
        return float("inf"), np.full_like(controls, np.nan)
    value = float(dt * np.sum(stage) + h.g(states[-1]))
    k = controls.shape[0]
    p = np.empty((k + 1, controls.shape[1]))
    p[k] = h.g_grad(states[-1])
    for n in range(k - 1, -1, -1):
        p[n] = p[n + 1] + dt * l_x[n]
    grad = dt * (l_alpha + p[1:])
    return value, grad


def _project_controls(controls: np.ndarray, radius: float) -> np.ndarray:
    nrm = np.linalg.norm(controls, axis=-1, keepdims=True)
    scale = np.where(nrm > radius, radius / np.maximum(nrm, 1e-300), 1.0)
    return controls * scale


def _aim_start(h: RegularizedHamiltonian, x_s: np.ndarray, k: int, radius: float):
    """Head straight for the terminal-cost minimum over the certified box."""
    p = h.base
    axes = [np.linspace(p.domain_box[a, 0], p.domain_box[a, 1], 101) for a in range(p.dim)]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=-1)
    target = pts[int(np.argmin(p.g(pts)))]
    direction = (target - x_s) / p.horizon
    return _project_controls(np.tile(direction, (k, 1)), 0.95 * radius)


def _spg(h, x_s, start, dt, radius, opts):
    """Spectral projected-gradient descent with Armijo backtracking."""
    alpha = _project_controls(np.asarray(start, dtype=float), radius)
    value, grad = discrete_cost_grad(h, x_s, alpha, dt)
    if np.isinf(value):
        return None
    step = 1.0
    prev_alpha = prev_grad = None
    pg_norm = np.inf
    for it in range(1, opts.max_iter + 1):
        pg_norm = float(np.max(np.abs(_project_controls(alpha - grad, radius) - alpha)))
        if pg_norm <= opts.gtol:
            break
        if prev_alpha is not None:
            s = (alpha - prev_alpha).ravel()
            y = (grad - prev_grad).ravel()
            sy = float(s @ y)
            step = float(s @ s) / sy if sy > 1e-300 else 1.0
            step = min(max(step, 1e-12), 1e8)
        accepted = False
        t = step
        for _ in range(60):
            cand = _project_controls(alpha - t * grad, radius)
            cval = discrete_cost(h, x_s, cand, dt)
            drop = float(np.sum(grad * (cand - alpha)))
            if np.isfinite(cval) and cval <= value + opts.armijo * drop:
                accepted = True
                break
            t *= 0.5
        if not accepted:
            break
        prev_alpha, prev_grad = alpha, grad
        alpha = cand
        value, grad = discrete_cost_grad(h, x_s, alpha, dt)
    return {"alpha": alpha, "value": value, "iterations": it, "pg_norm": pg_norm}


def minimize_J(
    h: RegularizedHamiltonian,
    x_s,
    m: int,
    N: int,
    opts: MinimizeOptions = MinimizeOptions(),
) -> DiscreteValue:
    """Minimize the discrete functional from (x_s, t_m) over N - m steps.

    Multi-start projected quasi-Newton descent: a zero sequence, a
    straight-to-the-terminal-minimum heuristic, and seeded random interior
    points.  The returned value is the best local minimum found, hence an
    upper bound on the true infimum.  The cost functional is nonconvex in the
    controls whenever the Hamiltonian depends on x, so restarts are the
    robustness lever.
    """
    if not m < N:
        raise ValueError("need m < N")
    p = h.base
    x_s = np.asarray(x_s, dtype=float).reshape(p.dim)
    if not p.start_inside_safe_region(x_s):
        raise ReachabilityError(f"start {x_s.tolist()} outside the certified safe region")
    dt = p.horizon / N
    k = N - m
    radius = p.lipschitz_lambda

    rng = np.random.default_rng(opts.seed)
    starts = [np.zeros((k, p.dim))]
    if radius > 0:
        starts.append(_aim_start(h, x_s, k, radius))
        while len(starts) < opts.n_starts:
            starts.append(
                _project_controls(rng.normal(size=(k, p.dim)) * 0.4 * radius, 0.6 * radius)
            )

    results, failures = [], []
    for i, s in enumerate(starts):
        out = _spg(h, x_s, s, dt, radius, opts)
        if out is None:
            failures.append(f"start {i}: infinite cost at start point")
        else:
            results.append(out)
    if not results:
        raise OptimizationFailedError(failures)

    best_idx = int(np.argmin([r["value"] for r in results]))
    best = results[best_idx]
    cv = ControlVector(best["alpha"], m, dt, x_s)
    duals, worst = _extract(cv, h)
    return DiscreteValue(
        value=float(best["value"]),
        minimizer=cv,
        multipliers=duals,
        diagnostics=OptimizerDiagnostics(
            iterations_per_start=tuple(r["iterations"] for r in results),
            values_per_start=tuple(float(r["value"]) for r in results),
            best_start=best_idx,
            projected_gradient_norm=float(best["pg_norm"]),
            worst_stationarity=worst,
        ),
    )


def _extract(cv: ControlVector, h: RegularizedHamiltonian):
    states = cv.rollout()
    k = cv.controls.shape[0]
    duals = np.empty((k + 1, states.shape[1]))
    duals[k] = h.g_grad(states[-1])
    for n in range(k - 1, -1, -1):
        duals[n] = duals[n + 1] + cv.dt * h.H_x(states[n], duals[n + 1])
    gap = cv.controls - h.H_lam(states[:-1], duals[1:])
    worst = float(np.max(np.abs(gap))) if gap.size else 0.0
    return duals, worst


def extract_multipliers(
    dv: DiscreteValue | ControlVector,
    h: RegularizedHamiltonian,
    tol: float = 1e-6,
    strict: bool = True,
) -> np.ndarray:
    """Backward dual recursion from a minimizer, with a stationarity audit.

    Verifies alpha_n = H_lam(x_n, lam_{n+1}) to ``tol`` (loose, because the
    outer optimizer is inexact) and raises when the identity fails: that
    signals the candidate is not a stationary point of the functional, so no
    dual sequence exists for it.
    """
    cv = dv.minimizer if isinstance(dv, DiscreteValue) else dv
    duals, worst = _extract(cv, h)
    if strict and worst > tol:
        gap = cv.controls - h.H_lam(cv.rollout()[:-1], duals[1:])
        step = int(np.argmax(np.max(np.abs(gap), axis=-1)))
        raise ExtractionInconsistentError(worst, tol, step)
    return duals


def brute_force_value(
    h: RegularizedHamiltonian, x_s, N: int, control_grid_points: int
) -> float:
    """Exhaustive minimum of the discrete functional over a tensor control grid.

    Ground-truth companion for :func:`minimize_J` at tiny horizons.  Controls
    range over the per-axis grid spanning [-C1, C1]; combinations are
    enumerated in chunks, and infinite stage costs prune infeasible cells.
    """
    p = h.base
    x_s = np.asarray(x_s, dtype=float).reshape(p.dim)
    k = int(control_grid_points)
    n_combos = float(k) ** (p.dim * N)
    if n_combos > _BRUTE_BUDGET:
        raise BudgetExceededError(
            f"{k}^{p.dim * N} = {n_combos:.3g} combinations exceed the 1e8 budget"
        )
    dt = p.horizon / N
    c1 = p.lipschitz_lambda
    axis = np.linspace(-c1, c1, k) if c1 > 0 else np.zeros(1)
    if c1 == 0:
        k = 1
    digits = p.dim * N
    total = k**digits

    best = np.inf
    chunk = 1 << 15
    for lo in range(0, total, chunk):
        idx = np.arange(lo, min(lo + chunk, total))
        combo = np.empty((idx.size, digits))
        rem = idx.copy()
        for dgt in range(digits):
            combo[:, dgt] = axis[rem % k]
            rem //= k
        controls = combo.reshape(idx.size, N, p.dim)
        states = np.empty((idx.size, N + 1, p.dim))
        states[:, 0] = x_s
        np.cumsum(controls * dt, axis=1, out=states[:, 1:])
        states[:, 1:] += x_s
        stage, _, _ = _running_cost_terms(h, states[:, :-1], controls, need_grads=False)
        cost = dt * np.sum(stage, axis=1) + h.g(states[:, -1])
        m = float(np.min(cost))
        best = min(best, m)
    return best
