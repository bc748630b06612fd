"""Control-problem model: Hamiltonian data, Legendre transforms, and smoothing.

A :class:`ControlProblem` bundles a Hamiltonian that is concave in its dual
argument together with a terminal cost and the three constants that make the
convergence theory quantitative:

* ``lipschitz_lambda`` (C1): ``|H(x, a) - H(x, b)| <= C1 |a - b|``,
* ``lipschitz_x`` (C2): ``|H(x, l) - H(y, l)| <= C2 |x - y| (1 + |l|)``,
* ``terminal_grad_bound`` (C3): ``|g'(x)| <= C3``.

The constants are certified on ``domain_box`` only; desk-scale problems (for
example a quadratic terminal cost) satisfy the global estimates only locally,
and every trajectory the solvers produce stays inside the computable reachable
box ``x_s +- C1 * T``.

Running costs are extended-real-valued.  Rather than a wrapper class, the
library uses IEEE floats with ``math.inf`` as the +inf marker: infinity absorbs
addition and compares correctly against every finite value, which is exactly
the contract an extended real needs.

All problem callables operate on arrays of shape ``(..., d)`` and broadcast
over the leading axes.  Construct with ``vectorized=False`` to have scalar-only
callables wrapped automatically (at a significant speed cost).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ._concave import (
    NonFiniteObjective,
    axis_starts,
    ball_project,
    maximize_concave_in_ball,
    minimize_convex_on_ball,
    minimize_convex_polar,
)
from .errors import (
    HamiltonianEvaluationError,
    MalformedProblemError,
    RegularizationInvalidError,
)

#: Extended reals are plain floats; ``math.inf`` marks +infinity.
ExtendedReal = float

#: Boundary-slope threshold of the recession test: a conjugate maximizer pinned
#: to the search boundary with outward slope above this is reported as +inf.
TOL_RECESSION = 1e-6


def _wrap_scalar(fn: Callable, in_args: int, out_dim: Optional[int]) -> Callable:
    """Lift a scalar-only callable to one that maps over leading axes."""

    def wrapped(*arrays):
        arrays = [np.asarray(a, dtype=float) for a in arrays]
        lead = np.broadcast_shapes(*(a.shape[:-1] for a in arrays))
        d = arrays[0].shape[-1]
        full = [np.broadcast_to(a, lead + (a.shape[-1],)) for a in arrays]
        flat = [a.reshape(-1, a.shape[-1]) for a in full]
        n = flat[0].shape[0]
        out_shape = (n, out_dim) if out_dim else (n,)
        out = np.empty(out_shape)
        for i in range(n):
            out[i] = fn(*(f[i] for f in flat))
        return out.reshape(lead + ((out_dim,) if out_dim else ()))

    del in_args
    return wrapped


@dataclass(frozen=True)
class ControlProblem:
    """Definition of a terminal-cost optimal control problem via its Hamiltonian.

    Parameters
    ----------
    dim:
        State dimension d.
    horizon:
        Terminal time T > 0.
    hamiltonian, hamiltonian_grad_lambda, hamiltonian_grad_x:
        H(x, lam), H_lam(x, lam), H_x(x, lam).  H must be concave in lam.  At
        nonsmooth points the gradient callables should return a subgradient
        (e.g. ``np.sign`` conventions give 0 at a kink of ``|.|``).
    terminal_cost, terminal_cost_grad:
        g(x) and g'(x).
    lipschitz_lambda, lipschitz_x, terminal_grad_bound:
        The constants C1, C2, C3.  C1 and C2 may be zero (x-independent or
        dual-independent Hamiltonians).
    domain_box:
        (d, 2) array of per-axis [low, high]; the region on which the declared
        constants are certified.
    running_cost:
        Optional analytic running cost L(x, alpha), extended-real valued.
    exact_value:
        Optional closed-form value function u(x, t) for oracle problems.
    smooth_family:
        Optional map delta -> :class:`SmoothHamiltonian`, consumed by
        :func:`regularize` with ``method="problem_supplied"``.
    vectorized:
        Whether the callables broadcast over leading axes.
    """

    dim: int
    horizon: float
    hamiltonian: Callable
    hamiltonian_grad_lambda: Callable
    hamiltonian_grad_x: Callable
    terminal_cost: Callable
    terminal_cost_grad: Callable
    lipschitz_lambda: float
    lipschitz_x: float
    terminal_grad_bound: float
    domain_box: np.ndarray
    running_cost: Optional[Callable] = None
    exact_value: Optional[Callable] = None
    smooth_family: Optional[Callable] = None
    vectorized: bool = True

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be a positive integer")
        if self.horizon <= 0:
            raise ValueError("horizon must be positive")
        if self.lipschitz_lambda < 0 or self.lipschitz_x < 0:
            raise ValueError("Lipschitz constants must be nonnegative")
        if self.terminal_grad_bound <= 0:
            raise ValueError("terminal_grad_bound must be positive")
        box = np.asarray(self.domain_box, dtype=float)
        if box.shape != (self.dim, 2) or np.any(box[:, 0] >= box[:, 1]):
            raise ValueError("domain_box must be (dim, 2) with low < high per axis")
        object.__setattr__(self, "domain_box", box)
        if not self.vectorized:
            object.__setattr__(
                self, "hamiltonian", _wrap_scalar(self.hamiltonian, 2, None)
            )
            object.__setattr__(
                self,
                "hamiltonian_grad_lambda",
                _wrap_scalar(self.hamiltonian_grad_lambda, 2, self.dim),
            )
            object.__setattr__(
                self,
                "hamiltonian_grad_x",
                _wrap_scalar(self.hamiltonian_grad_x, 2, self.dim),
            )
            object.__setattr__(
                self, "terminal_cost", _wrap_scalar(self.terminal_cost, 1, None)
            )
            object.__setattr__(
                self,
                "terminal_cost_grad",
                _wrap_scalar(self.terminal_cost_grad, 1, self.dim),
            )
            if self.running_cost is not None:
                object.__setattr__(
                    self, "running_cost", _wrap_scalar(self.running_cost, 2, None)
                )
            object.__setattr__(self, "vectorized", True)

    # Uniform evaluator interface (shared with RegularizedHamiltonian).
    def H(self, x, lam):
        return self.hamiltonian(np.asarray(x, float), np.asarray(lam, float))

    def H_lam(self, x, lam):
        return self.hamiltonian_grad_lambda(np.asarray(x, float), np.asarray(lam, float))

    def H_x(self, x, lam):
        return self.hamiltonian_grad_x(np.asarray(x, float), np.asarray(lam, float))

    def g(self, x):
        return self.terminal_cost(np.asarray(x, float))

    def g_grad(self, x):
        return self.terminal_cost_grad(np.asarray(x, float))

    @property
    def dual_bound(self) -> float:
        """(C3 + 1) e^{C2 T} - 1, the a-priori bound on every discrete dual."""
        return (self.terminal_grad_bound + 1.0) * math.exp(
            self.lipschitz_x * self.horizon
        ) - 1.0

    @property
    def default_lambda_radius(self) -> float:
        """Search radius for numeric conjugates.

        Twice the dual bound plus one, so every multiplier the solvers can
        produce lies strictly inside; raised to 10 * C3 when that is larger so
        the running-cost precondition is always met.
        """
        return max(2.0 * self.dual_bound + 1.0, 10.0 * self.terminal_grad_bound)

    @property
    def reach_radius(self) -> float:
        """C1 * T, the maximal distance any admissible trajectory can travel."""
        return self.lipschitz_lambda * self.horizon

    def start_inside_safe_region(self, x_s) -> bool:
        """Whether x_s keeps the whole reachable tube inside domain_box."""
        x_s = np.asarray(x_s, dtype=float)
        r = self.reach_radius
        return bool(
            np.all(x_s - r >= self.domain_box[:, 0])
            and np.all(x_s + r <= self.domain_box[:, 1])
        )


@dataclass(frozen=True)
class SmoothHamiltonian:
    """A differentiable Hamiltonian bundle produced by a smoothing family.

    ``running_cost`` (and its gradients), when present, are the analytic
    Legendre conjugate of the smoothed Hamiltonian; solvers use them as a fast
    path and otherwise fall back to the numeric conjugate.
    """

    hamiltonian: Callable
    grad_lambda: Callable
    grad_x: Callable
    running_cost: Optional[Callable] = None
    running_cost_grad_alpha: Optional[Callable] = None
    running_cost_grad_x: Optional[Callable] = None
    note: str = ""


@dataclass(frozen=True)
class RegularizedHamiltonian:
    """A certified differentiable surrogate H_delta with sup error <= delta."""

    base: ControlProblem
    delta: float
    hamiltonian: Callable
    hamiltonian_grad_lambda: Callable
    hamiltonian_grad_x: Callable
    certified_sup_error: float
    method: str = "problem_supplied"
    running_cost: Optional[Callable] = None
    running_cost_grad_alpha: Optional[Callable] = None
    running_cost_grad_x: Optional[Callable] = None

    def H(self, x, lam):
        return self.hamiltonian(np.asarray(x, float), np.asarray(lam, float))

    def H_lam(self, x, lam):
        return self.hamiltonian_grad_lambda(np.asarray(x, float), np.asarray(lam, float))

    def H_x(self, x, lam):
        return self.hamiltonian_grad_x(np.asarray(x, float), np.asarray(lam, float))

    def g(self, x):
        return self.base.g(x)

    def g_grad(self, x):
        return self.base.g_grad(x)

    @property
    def dim(self) -> int:
        return self.base.dim

    @property
    def horizon(self) -> float:
        return self.base.horizon


def identity_regularization(p: ControlProblem) -> RegularizedHamiltonian:
    """Wrap an already-differentiable problem as its own (exact) surrogate."""
    return RegularizedHamiltonian(
        base=p,
        delta=0.0,
        hamiltonian=p.hamiltonian,
        hamiltonian_grad_lambda=p.hamiltonian_grad_lambda,
        hamiltonian_grad_x=p.hamiltonian_grad_x,
        certified_sup_error=0.0,
        method="identity",
        running_cost=p.running_cost,
    )


# ---------------------------------------------------------------------------
# Legendre transforms
# ---------------------------------------------------------------------------

def _expand_like(arr: np.ndarray, target: np.ndarray) -> np.ndarray:
    """Insert a start axis so ``arr`` broadcasts against ``target``."""
    if target.ndim == arr.ndim + 1:
        return arr[..., None, :]
    return arr


def conjugate_running_cost_batch(
    h_value: Callable,
    h_grad_lambda: Callable,
    x: np.ndarray,
    alpha: np.ndarray,
    radius: float,
    *,
    gtol: float = 1e-10,
    tol_recession: float = TOL_RECESSION,
    max_iter: int = 300,
    starts: Optional[np.ndarray] = None,
):
    """Batched L(x, alpha) = sup_{|lam| <= radius} (-alpha . lam + H(x, lam)).

    Returns ``(values, maximizers)`` where entries flagged by the recession
    test carry ``+inf`` and their maximizer column is meaningless.  ``x`` and
    ``alpha`` broadcast against each other over leading axes.  ``starts``
    optionally replaces the default axis pattern; the objective is concave, so
    any start set that converges reaches the same supremum.
    """
    x = np.asarray(x, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    d = alpha.shape[-1]
    lead = np.broadcast_shapes(x.shape[:-1], alpha.shape[:-1])
    xb = np.broadcast_to(x, lead + (d,))
    ab = np.broadcast_to(alpha, lead + (d,))
    if starts is None:
        starts = axis_starts(radius, d)
    starts = np.broadcast_to(starts, lead + starts.shape[-2:])

    def value(lam):
        a = _expand_like(ab, lam)
        xx = _expand_like(xb, lam)
        return -np.sum(a * lam, axis=-1) + h_value(xx, lam)

    def grad(lam):
        a = _expand_like(ab, lam)
        xx = _expand_like(xb, lam)
        return -a + h_grad_lambda(xx, lam)

    try:
        res = maximize_concave_in_ball(
            value, grad, radius, starts, gtol=gtol, max_iter=max_iter
        )
    except NonFiniteObjective as exc:
        raise HamiltonianEvaluationError(
            x.reshape(-1, d)[0], exc.point.reshape(-1, d)[0]
        ) from exc
    infinite = res.on_boundary & (res.outward_slope > tol_recession)
    values = np.where(infinite, np.inf, res.value)
    return values, res.point


def running_cost_numeric(
    p: ControlProblem,
    x,
    alpha,
    lambda_search_radius: Optional[float] = None,
    *,
    tol_recession: float = TOL_RECESSION,
    gtol: float = 1e-10,
) -> ExtendedReal:
    """Numeric Legendre conjugate L(x, alpha) of the problem's Hamiltonian.

    Multi-start projected-gradient ascent over the lambda search ball; the
    objective is concave in lambda, so any interior stationary point is the
    global supremum.  Returns ``math.inf`` when the maximizer sits on the
    search boundary with outward slope above ``tol_recession`` (the linear
    term dominates at infinity, i.e. alpha is outside dom L, which lies in
    the closed C1 ball because H is C1-Lipschitz in lambda).
    """
    radius = (
        p.default_lambda_radius if lambda_search_radius is None else float(lambda_search_radius)
    )
    if radius < 10.0 * p.terminal_grad_bound:
        raise ValueError(
            f"lambda_search_radius {radius} violates the precondition "
            f">= 10 * C3 = {10.0 * p.terminal_grad_bound}"
        )
    x = np.asarray(x, dtype=float).reshape(p.dim)
    alpha = np.asarray(alpha, dtype=float).reshape(p.dim)
    values, _ = conjugate_running_cost_batch(
        p.hamiltonian,
        p.hamiltonian_grad_lambda,
        x[None, :],
        alpha[None, :],
        radius,
        gtol=gtol,
        tol_recession=tol_recession,
    )
    return float(values[0])


def recover_hamiltonian(
    p: ControlProblem,
    x,
    lam,
    alpha_search_radius: Optional[float] = None,
    *,
    use_analytic: bool = True,
) -> float:
    """Inverse transform H(x, lam) = inf_alpha (lam . alpha + L(x, alpha)).

    The infimum runs over the closed C1 ball (extended by a 5% margin), which
    contains dom L.  Uses the analytic running cost when the problem carries
    one and ``use_analytic`` is left on; otherwise every L evaluation goes
    through :func:`running_cost_numeric`'s machinery.
    """
    x = np.asarray(x, dtype=float).reshape(p.dim)
    lam = np.asarray(lam, dtype=float).reshape(p.dim)
    c1 = p.lipschitz_lambda
    radius = 1.05 * c1 + 1e-9 if alpha_search_radius is None else float(alpha_search_radius)
    if radius < c1:
        raise ValueError(f"alpha_search_radius {radius} must cover the C1 ball (C1={c1})")

    if use_analytic and p.running_cost is not None:
        def l_eval(pts):
            return np.asarray(p.running_cost(np.broadcast_to(x, pts.shape), pts), float)
    else:
        lam_radius = p.default_lambda_radius
        # Warm-start the inner ascent at the previous window's maximizer: the
        # conjugate is concave, so the start set only affects speed, never the
        # supremum.  The first call uses the origin plus one point per axis.
        warm: dict = {"point": None}
        first_starts = np.concatenate(
            [
                np.zeros((1, p.dim)),
                0.5 * lam_radius * np.eye(p.dim),
                -0.5 * lam_radius * np.eye(p.dim),
            ]
        )

        def l_eval(pts):
            if warm["point"] is None:
                starts = first_starts
            else:
                starts = np.stack([np.zeros(p.dim), warm["point"]])
            vals, argmax = conjugate_running_cost_batch(
                p.hamiltonian,
                p.hamiltonian_grad_lambda,
                x[None, :],
                pts,
                lam_radius,
                starts=starts,
            )
            psi = np.sum(lam * pts, axis=-1) + vals
            finite = np.isfinite(psi)
            if np.any(finite):
                k = int(np.argmin(np.where(finite, psi, np.inf)))
                warm["point"] = argmax[k].copy()
            return vals

    if c1 == 0.0:
        val = float(l_eval(np.zeros((1, p.dim)))[0])
        if math.isinf(val):
            raise MalformedProblemError("running cost is +inf at the only feasible control")
        return val

    def objective(pts):
        return np.sum(lam * pts, axis=-1) + l_eval(pts)

    scale = 1.0 + float(np.linalg.norm(lam)) * (1.0 + c1)
    if p.dim == 2:
        _, best = minimize_convex_polar(objective, radius, value_tol=3e-6 * scale)
    else:
        _, best = minimize_convex_on_ball(
            objective, radius, p.dim, value_tol=3e-6 * scale
        )
    if math.isinf(best):
        raise MalformedProblemError("running cost is +inf on the whole search set")
    return float(best)


# ---------------------------------------------------------------------------
# Regularization
# ---------------------------------------------------------------------------

def _certification_samples(p: ControlProblem, seed: int = 0):
    """Deterministic dense sample of domain_box x lambda-ball for certification."""
    rng = np.random.default_rng(seed)
    box = p.domain_box
    n_axis = 21 if p.dim == 1 else 9
    axes = [np.linspace(box[a, 0], box[a, 1], n_axis) for a in range(p.dim)]
    mesh = np.meshgrid(*axes, indexing="ij")
    xs = np.stack([m.ravel() for m in mesh], axis=-1)

    radius = p.default_lambda_radius
    if p.dim == 1:
        lams = np.linspace(-radius, radius, 201)[:, None]
    else:
        shells = np.linspace(0.0, radius, 13)[1:]
        angles = np.linspace(0.0, 2 * np.pi, 24, endpoint=False)
        pts = [np.zeros((1, 2))]
        for r in shells:
            pts.append(np.stack([r * np.cos(angles), r * np.sin(angles)], axis=-1))
        lams = np.concatenate(pts, axis=0)
    # A few random interior points guard against grid-aligned blind spots.
    extra = ball_project(rng.normal(size=(64, p.dim)) * radius / 2.0, radius)
    lams = np.concatenate([lams, extra], axis=0)
    return xs, lams


def _certify(p: ControlProblem, h_delta: Callable, delta: float):
    """Measure sup|H - H_delta| and check sampled concavity of H_delta."""
    xs, lams = _certification_samples(p)
    X = xs[:, None, :]
    L = lams[None, :, :]
    err = np.abs(p.hamiltonian(X, L) - h_delta(X, L))
    worst = np.unravel_index(int(np.argmax(err)), err.shape)
    measured = float(err[worst])
    if measured > delta * (1.0 + 1e-12) + 1e-15:
        raise RegularizationInvalidError(measured, delta, xs[worst[0]], lams[worst[1]])

    # Midpoint concavity probe of the smoothed Hamiltonian.
    rng = np.random.default_rng(1)
    n = 512
    xi = rng.uniform(0.0, 1.0, size=(n, 1))
    xprobe = xs[rng.integers(0, len(xs), size=n)]
    l1 = lams[rng.integers(0, len(lams), size=n)]
    l2 = lams[rng.integers(0, len(lams), size=n)]
    mid = xi * l1 + (1.0 - xi) * l2
    gap = (
        xi[:, 0] * h_delta(xprobe, l1)
        + (1.0 - xi[:, 0]) * h_delta(xprobe, l2)
        - h_delta(xprobe, mid)
    )
    if np.max(gap) > 1e-10:
        k = int(np.argmax(gap))
        raise RegularizationInvalidError(float(np.max(gap)), 1e-10, xprobe[k], mid[k])
    return measured


def regularize(
    p: ControlProblem, delta: float, method: str = "problem_supplied"
) -> RegularizedHamiltonian:
    """Build a certified differentiable Hamiltonian within sup distance delta.

    ``problem_supplied`` draws on the problem's own parametric smooth family.
    ``smoothed_min`` applies hyperbolic smoothing to Hamiltonians of the
    separable form H(x, lam) = l(x) - N(lam) with N a nonnegative norm-like
    kink: the correction ``N - sqrt(N^2 + delta^2) + delta/2`` stays within
    delta/2 in sup norm.  Certification by dense sampling is the guard for
    both methods and raises when the measured error exceeds delta.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    if method == "problem_supplied":
        if p.smooth_family is None:
            raise ValueError("problem carries no smooth family; use method='smoothed_min'")
        fam: SmoothHamiltonian = p.smooth_family(delta)
        measured = _certify(p, fam.hamiltonian, delta)
        return RegularizedHamiltonian(
            base=p,
            delta=float(delta),
            hamiltonian=fam.hamiltonian,
            hamiltonian_grad_lambda=fam.grad_lambda,
            hamiltonian_grad_x=fam.grad_x,
            certified_sup_error=measured,
            method=method,
            running_cost=fam.running_cost,
            running_cost_grad_alpha=fam.running_cost_grad_alpha,
            running_cost_grad_x=fam.running_cost_grad_x,
        )
    if method != "smoothed_min":
        raise ValueError(f"unknown regularization method {method!r}")

    x_ref = np.mean(p.domain_box, axis=1)
    H, Hlam = p.hamiltonian, p.hamiltonian_grad_lambda
    h0 = float(np.asarray(H(x_ref[None, :], np.zeros((1, p.dim))))[0])

    def kink(lam):
        ref = np.broadcast_to(x_ref, lam.shape)
        return h0 - H(ref, lam)

    def h_delta(x, lam):
        n = kink(lam)
        return H(x, lam) + n - np.sqrt(n * n + delta * delta) + delta / 2.0

    def h_delta_lam(x, lam):
        n = kink(lam)[..., None]
        ref = np.broadcast_to(x_ref, lam.shape)
        n_grad = -Hlam(ref, lam)
        cprime = 1.0 - n / np.sqrt(n * n + delta * delta)
        return Hlam(x, lam) + cprime * n_grad

    measured = _certify(p, h_delta, delta)
    return RegularizedHamiltonian(
        base=p,
        delta=float(delta),
        hamiltonian=h_delta,
        hamiltonian_grad_lambda=h_delta_lam,
        hamiltonian_grad_x=p.hamiltonian_grad_x,
        certified_sup_error=measured,
        method=method,
    )


# ---------------------------------------------------------------------------
# Constants certification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CheckResult:
    name: str
    empirical: float
    declared: float
    passed: bool
    witness: Optional[tuple] = None

    def line(self) -> str:
        status = "pass" if self.passed else "FAIL"
        return f"  [{status}] {self.name}: empirical {self.empirical:.6g} vs declared {self.declared:.6g}"


@dataclass(frozen=True)
class ConstantsReport:
    sample_count: int
    seed: int
    checks: tuple = field(default_factory=tuple)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __str__(self) -> str:
        head = f"constants certification ({self.sample_count} samples, seed {self.seed})"
        return "\n".join([head] + [c.line() for c in self.checks])


def _sample_ball(rng, n: int, dim: int, radius: float) -> np.ndarray:
    u = rng.normal(size=(n, dim))
    u /= np.maximum(np.linalg.norm(u, axis=-1, keepdims=True), 1e-300)
    r = radius * rng.uniform(0.0, 1.0, size=(n, 1)) ** (1.0 / dim)
    return u * r


def _away_from_kink(lams: np.ndarray, floor: float) -> np.ndarray:
    """Push samples off the |lam| = 0 kink family so central differences converge."""
    out = lams.copy()
    nrm = np.linalg.norm(out, axis=-1)
    bad = nrm < floor
    out[bad, 0] += floor
    return out


def verify_constants(
    p: ControlProblem, sample_count: int = 10_000, seed: int = 0
) -> ConstantsReport:
    """Seeded empirical check of the declared constants and structure.

    Samples the Lipschitz inequalities, terminal-gradient bound, concavity in
    the dual argument, and gradient/finite-difference consistency over
    ``domain_box`` and the default lambda ball.  Failures never raise; they
    are entries in the returned report.
    """
    if sample_count < 100:
        raise ValueError("sample_count must be at least 100")
    rng = np.random.default_rng(seed)
    n = int(sample_count)
    box = p.domain_box
    radius = p.dual_bound + 1.0

    xs = rng.uniform(box[:, 0], box[:, 1], size=(n, p.dim))
    ys = rng.uniform(box[:, 0], box[:, 1], size=(n, p.dim))
    l1 = _sample_ball(rng, n, p.dim, radius)
    l2 = _sample_ball(rng, n, p.dim, radius)

    checks = []

    # C1: Lipschitz in the dual argument.
    num = np.abs(p.H(xs, l1) - p.H(xs, l2))
    den = np.linalg.norm(l1 - l2, axis=-1)
    keep = den > 1e-9
    ratios = num[keep] / den[keep]
    k = int(np.argmax(ratios))
    emp_c1 = float(np.max(ratios))
    checks.append(
        CheckResult(
            "lipschitz_lambda (C1)",
            emp_c1,
            p.lipschitz_lambda,
            emp_c1 <= p.lipschitz_lambda * (1 + 1e-9) + 1e-12,
            witness=(xs[keep][k], l1[keep][k], l2[keep][k]),
        )
    )

    # C2: Lipschitz in x, weighted by (1 + |lam|).
    num = np.abs(p.H(xs, l1) - p.H(ys, l1))
    den = np.linalg.norm(xs - ys, axis=-1) * (1.0 + np.linalg.norm(l1, axis=-1))
    keep = den > 1e-9
    ratios = num[keep] / den[keep]
    k = int(np.argmax(ratios))
    emp_c2 = float(np.max(ratios))
    checks.append(
        CheckResult(
            "lipschitz_x (C2)",
            emp_c2,
            p.lipschitz_x,
            emp_c2 <= p.lipschitz_x * (1 + 1e-9) + 1e-12,
            witness=(xs[keep][k], ys[keep][k], l1[keep][k]),
        )
    )

    # C3: terminal gradient bound.
    gnorm = np.linalg.norm(p.g_grad(xs), axis=-1)
    k = int(np.argmax(gnorm))
    emp_c3 = float(gnorm[k])
    checks.append(
        CheckResult(
            "terminal_grad_bound (C3)",
            emp_c3,
            p.terminal_grad_bound,
            emp_c3 <= p.terminal_grad_bound * (1 + 1e-9) + 1e-12,
            witness=(xs[k],),
        )
    )

    # Concavity in the dual argument (midpoint test).
    xi = rng.uniform(0.0, 1.0, size=(n, 1))
    mid = xi * l1 + (1 - xi) * l2
    gap = xi[:, 0] * p.H(xs, l1) + (1 - xi[:, 0]) * p.H(xs, l2) - p.H(xs, mid)
    k = int(np.argmax(gap))
    worst_gap = float(gap[k])
    checks.append(
        CheckResult(
            "concavity_in_lambda",
            worst_gap,
            1e-10,
            worst_gap <= 1e-10,
            witness=(xs[k], l1[k], l2[k]),
        )
    )

    # Gradient consistency against central differences (h = 1e-5), away from
    # the measure-zero kink set of norm-type Hamiltonians.
    m = min(n, 100)
    h = 1e-5
    xg = xs[:m]
    lg = _away_from_kink(l1[:m], 0.02 * max(radius, 1.0))
    for name, grad_fn, wiggle_lam in (
        ("grad_lambda_fd", p.H_lam, True),
        ("grad_x_fd", p.H_x, False),
    ):
        analytic = grad_fn(xg, lg)
        worst = 0.0
        for a in range(p.dim):
            e = np.zeros(p.dim)
            e[a] = h
            if wiggle_lam:
                fd = (p.H(xg, lg + e) - p.H(xg, lg - e)) / (2 * h)
            else:
                fd = (p.H(xg + e, lg) - p.H(xg - e, lg)) / (2 * h)
            excess = np.abs(analytic[:, a] - fd) - 1e-6 * (1.0 + np.abs(analytic[:, a]))
            worst = max(worst, float(np.max(excess)))
        checks.append(CheckResult(name, worst, 0.0, worst <= 0.0))

    ggrad = p.g_grad(xg)
    worst = 0.0
    for a in range(p.dim):
        e = np.zeros(p.dim)
        e[a] = h
        fd = (p.g(xg + e) - p.g(xg - e)) / (2 * h)
        excess = np.abs(ggrad[:, a] - fd) - 1e-6 * (1.0 + np.abs(ggrad[:, a]))
        worst = max(worst, float(np.max(excess)))
    checks.append(CheckResult("terminal_grad_fd", worst, 0.0, worst <= 0.0))

    return ConstantsReport(sample_count=n, seed=seed, checks=tuple(checks))
