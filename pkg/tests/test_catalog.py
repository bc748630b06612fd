"""Catalog lookups and per-entry certification."""

import math

import numpy as np
import pytest

from sympont import catalog
from sympont.errors import UnknownProblemError
from sympont.problems import running_cost_numeric, verify_constants

EXPECTED_IDS = ["eikonal-1d", "eikonal-1d-costed", "eikonal-2d", "smooth-quadratic-1d"]


def test_list_contains_required_entries():
    assert set(EXPECTED_IDS) <= set(catalog.list_ids())


def test_get_eikonal_1d_constants():
    e = catalog.get("eikonal-1d")
    p = e.problem
    assert (p.lipschitz_lambda, p.lipschitz_x, p.terminal_grad_bound) == (1.0, 0.0, 1.0)
    assert float(p.H(np.array([[0.3]]), np.array([[0.7]]))[0]) == pytest.approx(-0.7)
    assert float(p.g(np.array([[2.0]]))[0]) == pytest.approx(math.sqrt(5.0))
    # closed form sqrt(1 + max(|x| - (T - t), 0)^2)
    assert p.exact_value(np.array([2.0]), 0.0) == pytest.approx(math.sqrt(2.0))
    assert p.exact_value(np.array([0.5]), 0.0) == pytest.approx(1.0)


def test_get_costed_variant():
    e = catalog.get("eikonal-1d-costed")
    p = e.problem
    assert p.lipschitz_x == pytest.approx(0.1)
    assert p.exact_value is None
    x = np.array([[0.4]])
    lam = np.array([[0.2]])
    assert float(p.H(x, lam)[0]) == pytest.approx(-0.2 + 0.1 * math.sin(0.4))


def test_get_unknown_raises():
    with pytest.raises(UnknownProblemError):
        catalog.get("nope")


def test_register_and_unregister():
    e = catalog.get("eikonal-1d")
    clone = catalog.CatalogEntry(
        id="clone-test", problem=e.problem, description="x", default_start=np.array([0.0])
    )
    catalog.register(clone)
    assert catalog.get("clone-test").description == "x"
    with pytest.raises(ValueError):
        catalog.register(clone)
    catalog.unregister("clone-test")
    with pytest.raises(UnknownProblemError):
        catalog.get("clone-test")


@pytest.mark.parametrize("pid", EXPECTED_IDS)
def test_constants_certified_at_seed_zero(pid):
    report = verify_constants(catalog.get(pid).problem, 10_000, 0)
    assert report.passed, str(report)


@pytest.mark.parametrize("pid", ["eikonal-1d", "eikonal-1d-costed", "eikonal-2d"])
def test_front_running_cost_is_indicator(pid):
    """L equals the x-term on the unit ball and +inf outside it."""
    p = catalog.get(pid).problem
    rng = np.random.default_rng(5)
    n = 100
    xs = rng.uniform(p.domain_box[:, 0] * 0.8, p.domain_box[:, 1] * 0.8, (n, p.dim))
    inside_dir = rng.normal(size=(n, p.dim))
    inside_dir /= np.linalg.norm(inside_dir, axis=-1, keepdims=True)
    inside = inside_dir * rng.uniform(0.0, 0.98, size=(n, 1))
    outside = inside_dir * rng.uniform(1.01, 2.0, size=(n, 1))
    for i in range(n):
        ell = float(p.H(xs[i][None, :], np.zeros((1, p.dim)))[0])
        lin = running_cost_numeric(p, xs[i], inside[i])
        assert lin == pytest.approx(ell, abs=1e-7)
        assert math.isinf(running_cost_numeric(p, xs[i], outside[i]))


def test_smooth_family_sup_error_is_half_delta():
    e = catalog.get("eikonal-1d")
    fam = e.smooth_family(1e-2)
    lam = np.linspace(-5, 5, 100_001)[:, None]
    x = np.zeros_like(lam)
    err = np.abs(fam.hamiltonian(x, lam) - e.problem.H(x, lam))
    assert np.max(err) == pytest.approx(5e-3, rel=1e-9)


def test_smooth_family_conjugate_matches_numeric():
    """The family's closed-form running cost equals the numeric conjugate of
    its smoothed Hamiltonian."""
    from sympont.problems import conjugate_running_cost_batch

    e = catalog.get("eikonal-1d")
    fam = e.smooth_family(1e-2)
    alphas = np.linspace(-0.95, 0.95, 21)[:, None]
    x = np.zeros_like(alphas)
    numeric, _ = conjugate_running_cost_batch(
        fam.hamiltonian, fam.grad_lambda, x, alphas, 10.0
    )
    analytic = fam.running_cost(x, alphas)
    np.testing.assert_allclose(numeric, analytic, atol=1e-8)
