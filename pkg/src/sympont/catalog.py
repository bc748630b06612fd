"""Catalog of concrete control problems with certified constants.

Every entry ships a Hamiltonian that is globally Lipschitz in the dual
variable (so the quantitative error bounds apply on the working box), an
analytic running cost, a bespoke smooth family for the nonsmooth entries, and
a closed-form value function where one exists.  Problems are expressible in
code only; there is no file-based problem format.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict, Optional

import numpy as np

from .errors import UnknownProblemError
from .problems import ControlProblem, SmoothHamiltonian


@dataclass(frozen=True)
class CatalogEntry:
    id: str
    problem: ControlProblem
    description: str
    default_start: np.ndarray
    growth_bound_k: float = 1.0
    closed_form_notes: str = ""

    @property
    def smooth_family(self) -> Optional[Callable]:
        return self.problem.smooth_family


_REGISTRY: Dict[str, CatalogEntry] = {}


def register(entry: CatalogEntry, overwrite: bool = False) -> None:
    """Add a problem to the catalog (used by tests and downstream code)."""
    if entry.id in _REGISTRY and not overwrite:
        raise ValueError(f"catalog id {entry.id!r} already registered")
    _REGISTRY[entry.id] = entry


def get(problem_id: str) -> CatalogEntry:
    try:
        return _REGISTRY[problem_id]
    except KeyError:
        raise UnknownProblemError(
            f"unknown problem {problem_id!r}; known: {sorted(_REGISTRY)}"
        ) from None


def list_ids() -> list[str]:
    return sorted(_REGISTRY)


def unregister(problem_id: str) -> None:
    _REGISTRY.pop(problem_id, None)


# ---------------------------------------------------------------------------
# Negative-norm Hamiltonians H = l(x) - |lam| (front propagation at unit speed)
# ---------------------------------------------------------------------------

def _norm(v):
    return np.linalg.norm(v, axis=-1)


def _safe_unit(v):
    n = _norm(v)[..., None]
    return np.divide(v, n, out=np.zeros_like(v), where=n > 0)


def _front_problem(dim: int, ell, ell_grad, c2: float) -> dict:
    """Evaluator bundle for H(x, lam) = ell(x) - |lam|."""

    def H(x, lam):
        return ell(x) - _norm(lam)

    def H_lam(x, lam):
        del x
        return -_safe_unit(lam)

    def H_x(x, lam):
        shape = np.broadcast_shapes(x.shape, lam.shape)
        return np.broadcast_to(ell_grad(x), shape)

    def L(x, alpha):
        # sup_lam(-alpha.lam - |lam|) = 0 on the unit ball, +inf outside.
        inside = _norm(alpha) <= 1.0 + 1e-12
        base = np.broadcast_to(ell(x), inside.shape)
        return np.where(inside, base, np.inf)

    del dim, c2
    return {"H": H, "H_lam": H_lam, "H_x": H_x, "L": L}


def _front_smooth_family(ell, ell_grad) -> Callable:
    """Hyperbolic smoothing -sqrt(|lam|^2 + d^2) + d/2 with its exact conjugate."""

    def family(delta: float) -> SmoothHamiltonian:
        d2 = delta * delta

        def H(x, lam):
            return ell(x) - np.sqrt(np.sum(lam * lam, axis=-1) + d2) + delta / 2.0

        def H_lam(x, lam):
            del x
            return -lam / np.sqrt(np.sum(lam * lam, axis=-1, keepdims=True) + d2)

        def H_x(x, lam):
            shape = np.broadcast_shapes(x.shape, lam.shape)
            return np.broadcast_to(ell_grad(x), shape)

        def L(x, alpha):
            a2 = np.sum(alpha * alpha, axis=-1)
            base = np.broadcast_to(ell(x), a2.shape)
            slack = np.sqrt(np.maximum(1.0 - a2, 0.0))
            return np.where(a2 <= 1.0 + 1e-12, base - delta * slack + delta / 2.0, np.inf)

        def L_alpha(x, alpha):
            del x
            a2 = np.sum(alpha * alpha, axis=-1, keepdims=True)
            slack = np.sqrt(np.maximum(1.0 - a2, 1e-14))
            return delta * alpha / slack

        def L_x(x, alpha):
            shape = np.broadcast_shapes(x.shape, alpha.shape)
            return np.broadcast_to(ell_grad(x), shape)

        return SmoothHamiltonian(
            hamiltonian=H,
            grad_lambda=H_lam,
            grad_x=H_x,
            running_cost=L,
            running_cost_grad_alpha=L_alpha,
            running_cost_grad_x=L_x,
            note="hyperbolic smoothing of the negative norm, sup error delta/2",
        )

    return family


def _front_exact_value(horizon: float) -> Callable:
    # Minimizing sqrt(1 + |y|^2) over the ball |y - x| <= T - t gives the
    # closed form sqrt(1 + max(|x| - (T - t), 0)^2).
    def u(x, t):
        x = np.asarray(x, dtype=float)
        reach = np.maximum(_norm(x) - (horizon - t), 0.0)
        return np.sqrt(1.0 + reach * reach)

    return u


def _zero_ell(x):
    return np.zeros(x.shape[:-1])


def _zero_ell_grad(x):
    return np.zeros_like(x)


def _sin_ell(x):
    return 0.1 * np.sin(x[..., 0])


def _sin_ell_grad(x):
    return 0.1 * np.cos(x)


def _g_sqrt(x):
    return np.sqrt(1.0 + np.sum(x * x, axis=-1))


def _g_sqrt_grad(x):
    return x / np.sqrt(1.0 + np.sum(x * x, axis=-1, keepdims=True))


def _build_eikonal_1d() -> CatalogEntry:
    ops = _front_problem(1, _zero_ell, _zero_ell_grad, 0.0)
    problem = ControlProblem(
        dim=1,
        horizon=1.0,
        hamiltonian=ops["H"],
        hamiltonian_grad_lambda=ops["H_lam"],
        hamiltonian_grad_x=ops["H_x"],
        terminal_cost=_g_sqrt,
        terminal_cost_grad=_g_sqrt_grad,
        lipschitz_lambda=1.0,
        lipschitz_x=0.0,
        terminal_grad_bound=1.0,
        domain_box=np.array([[-4.0, 4.0]]),
        running_cost=ops["L"],
        exact_value=_front_exact_value(1.0),
        smooth_family=_front_smooth_family(_zero_ell, _zero_ell_grad),
    )
    return CatalogEntry(
        id="eikonal-1d",
        problem=problem,
        description="unit-speed front in 1-D, nonsmooth dual norm, closed-form value",
        default_start=np.array([2.0]),
        closed_form_notes=(
            "u(x,t) = sqrt(1 + max(|x| - (T - t), 0)^2): the running cost is the "
            "indicator of |x'| <= 1, so the value is the minimum of the terminal "
            "cost over the reachable interval of radius T - t."
        ),
    )


def _build_eikonal_1d_costed() -> CatalogEntry:
    ops = _front_problem(1, _sin_ell, _sin_ell_grad, 0.1)
    problem = ControlProblem(
        dim=1,
        horizon=1.0,
        hamiltonian=ops["H"],
        hamiltonian_grad_lambda=ops["H_lam"],
        hamiltonian_grad_x=ops["H_x"],
        terminal_cost=_g_sqrt,
        terminal_cost_grad=_g_sqrt_grad,
        lipschitz_lambda=1.0,
        lipschitz_x=0.1,
        terminal_grad_bound=1.0,
        domain_box=np.array([[-4.0, 4.0]]),
        running_cost=ops["L"],
        exact_value=None,
        smooth_family=_front_smooth_family(_sin_ell, _sin_ell_grad),
    )
    return CatalogEntry(
        id="eikonal-1d-costed",
        problem=problem,
        description="1-D front with running cost 0.1 sin(x); drifting duals, grid oracle only",
        default_start=np.array([2.0]),
        closed_form_notes="no closed form; |l'| <= 0.1 gives C2 = 0.1",
    )


def _build_eikonal_2d() -> CatalogEntry:
    ops = _front_problem(2, _zero_ell, _zero_ell_grad, 0.0)
    problem = ControlProblem(
        dim=2,
        horizon=1.0,
        hamiltonian=ops["H"],
        hamiltonian_grad_lambda=ops["H_lam"],
        hamiltonian_grad_x=ops["H_x"],
        terminal_cost=_g_sqrt,
        terminal_cost_grad=_g_sqrt_grad,
        lipschitz_lambda=1.0,
        lipschitz_x=0.0,
        terminal_grad_bound=1.0,
        domain_box=np.array([[-3.2, 3.2], [-3.2, 3.2]]),
        running_cost=ops["L"],
        exact_value=_front_exact_value(1.0),
        smooth_family=_front_smooth_family(_zero_ell, _zero_ell_grad),
    )
    return CatalogEntry(
        id="eikonal-2d",
        problem=problem,
        description="unit-speed front in 2-D, radially symmetric closed-form value",
        default_start=np.array([1.2, 0.9]),
        closed_form_notes=(
            "radial symmetry reduces to the 1-D case: "
            "u(x,t) = sqrt(1 + max(|x| - (T - t), 0)^2)"
        ),
    )


# ---------------------------------------------------------------------------
# Smooth, genuinely x-coupled entry (no regularization needed)
# ---------------------------------------------------------------------------

def _speed(x):
    return 1.0 + 0.1 * np.tanh(x[..., 0])


def _speed_prime(x):
    return 0.1 / np.cosh(x[..., 0]) ** 2


def _sq_H(x, lam):
    return _speed(x) * (1.0 - np.sqrt(1.0 + lam[..., 0] ** 2))


def _sq_H_lam(x, lam):
    return -_speed(x)[..., None] * lam / np.sqrt(1.0 + lam[..., 0] ** 2)[..., None]


def _sq_H_x(x, lam):
    val = _speed_prime(x) * (1.0 - np.sqrt(1.0 + lam[..., 0] ** 2))
    return val[..., None]


def _sq_L(x, alpha):
    # Conjugate of m(x)(1 - sqrt(1 + lam^2)): m - sqrt(m^2 - a^2) on |a| <= m.
    m = _speed(x)
    a = alpha[..., 0]
    inside = np.abs(a) <= m + 1e-12
    gap = np.sqrt(np.maximum(m * m - a * a, 0.0))
    return np.where(inside, m - gap, np.inf)


def _sq_L_alpha(x, alpha):
    m = _speed(x)
    a = alpha[..., 0]
    gap = np.sqrt(np.maximum(m * m - a * a, 1e-14))
    return (a / gap)[..., None]


def _sq_L_x(x, alpha):
    m = _speed(x)
    a = alpha[..., 0]
    gap = np.sqrt(np.maximum(m * m - a * a, 1e-14))
    return (_speed_prime(x) * (1.0 - m / gap))[..., None]


def _sq_identity_family(delta: float) -> SmoothHamiltonian:
    del delta  # already smooth; the surrogate is the Hamiltonian itself
    return SmoothHamiltonian(
        hamiltonian=_sq_H,
        grad_lambda=_sq_H_lam,
        grad_x=_sq_H_x,
        running_cost=_sq_L,
        running_cost_grad_alpha=_sq_L_alpha,
        running_cost_grad_x=_sq_L_x,
        note="identity family: H is smooth, certified error 0",
    )


def _g_quad(x):
    return 0.5 * np.sum(x * x, axis=-1)


def _g_quad_grad(x):
    return np.asarray(x, dtype=float)


def _build_smooth_quadratic_1d() -> CatalogEntry:
    problem = ControlProblem(
        dim=1,
        horizon=1.0,
        hamiltonian=_sq_H,
        hamiltonian_grad_lambda=_sq_H_lam,
        hamiltonian_grad_x=_sq_H_x,
        terminal_cost=_g_quad,
        terminal_cost_grad=_g_quad_grad,
        lipschitz_lambda=1.1,
        lipschitz_x=0.1,
        terminal_grad_bound=3.0,
        domain_box=np.array([[-3.0, 3.0]]),
        running_cost=_sq_L,
        exact_value=None,
        smooth_family=_sq_identity_family,
    )
    return CatalogEntry(
        id="smooth-quadratic-1d",
        problem=problem,
        description=(
            "smooth concave H = (1 + 0.1 tanh x)(1 - sqrt(1 + lam^2)) with quadratic "
            "terminal cost; no regularization needed, grid oracle ground truth"
        ),
        default_start=np.array([0.8]),
        closed_form_notes=(
            "no closed form; constants are certified on [-3, 3] (quadratic g only "
            "satisfies the gradient bound locally)"
        ),
    )


for _entry in (
    _build_eikonal_1d(),
    _build_eikonal_1d_costed(),
    _build_eikonal_2d(),
    _build_smooth_quadratic_1d(),
):
    register(_entry)
