import numpy as np
import pytest

from sympont import catalog
from sympont.problems import ControlProblem


@pytest.fixture(scope="session")
def eikonal_1d():
    return catalog.get("eikonal-1d")


@pytest.fixture(scope="session")
def eikonal_1d_costed():
    return catalog.get("eikonal-1d-costed")


@pytest.fixture(scope="session")
def eikonal_2d():
    return catalog.get("eikonal-2d")


@pytest.fixture(scope="session")
def smooth_quadratic():
    return catalog.get("smooth-quadratic-1d")


def make_problem(
    H,
    H_lam,
    H_x,
    g,
    g_grad,
    c1,
    c2,
    c3,
    box,
    dim=1,
    horizon=1.0,
    running_cost=None,
    exact_value=None,
    smooth_family=None,
):
    """Ad-hoc ControlProblem for synthetic test cases."""
    return ControlProblem(
        dim=dim,
        horizon=horizon,
        hamiltonian=H,
        hamiltonian_grad_lambda=H_lam,
        hamiltonian_grad_x=H_x,
        terminal_cost=g,
        terminal_cost_grad=g_grad,
        lipschitz_lambda=c1,
        lipschitz_x=c2,
        terminal_grad_bound=c3,
        domain_box=np.asarray(box, dtype=float),
        running_cost=running_cost,
        exact_value=exact_value,
        smooth_family=smooth_family,
    )


def constant_g_problem(c=3.0, with_exact=False):
    """Smooth problem with constant terminal cost and L >= 0, L(x, 0) = 0."""
    from sympont.problems import SmoothHamiltonian

    H = lambda x, lam: 1.0 - np.sqrt(1.0 + lam[..., 0] ** 2)
    H_lam = lambda x, lam: -lam / np.sqrt(1.0 + lam[..., 0] ** 2)[..., None]
    H_x = lambda x, lam: np.zeros(np.broadcast_shapes(x.shape, lam.shape))
    L = lambda x, a: np.where(
        np.abs(a[..., 0]) <= 1.0 + 1e-12,
        1.0 - np.sqrt(np.maximum(1.0 - a[..., 0] ** 2, 0.0)),
        np.inf,
    )
    L_a = lambda x, a: a / np.sqrt(np.maximum(1.0 - a[..., 0] ** 2, 1e-14))[..., None]
    L_x = lambda x, a: np.zeros_like(a)
    identity = lambda delta: SmoothHamiltonian(
        hamiltonian=H,
        grad_lambda=H_lam,
        grad_x=H_x,
        running_cost=L,
        running_cost_grad_alpha=L_a,
        running_cost_grad_x=L_x,
    )
    return make_problem(
        exact_value=(lambda x, t: float(c)) if with_exact else None,
        smooth_family=identity,
        H=H,
        H_lam=H_lam,
        H_x=H_x,
        g=lambda x: np.full(x.shape[:-1], float(c)),
        g_grad=lambda x: np.zeros_like(x),
        c1=1.0,
        c2=0.0,
        c3=1.0,
        box=[[-4.0, 4.0]],
        running_cost=L,
    )
