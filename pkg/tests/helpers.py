"""Shared invariant checks used by both the unit tests and the acceptance gate."""

from __future__ import annotations

import math

import numpy as np

from sympont import catalog
from sympont.problems import (
    ControlProblem,
    recover_hamiltonian,
    regularize,
    verify_constants,
)


def sample_states_duals(p: ControlProblem, n: int, seed: int):
    """Seeded (x, lambda) pairs in domain_box x {|lam| <= C3 e^{C2 T}}."""
    rng = np.random.default_rng(seed)
    box = p.domain_box
    xs = rng.uniform(box[:, 0], box[:, 1], size=(n, p.dim))
    radius = p.terminal_grad_bound * math.exp(p.lipschitz_x * p.horizon)
    u = rng.normal(size=(n, p.dim))
    u /= np.maximum(np.linalg.norm(u, axis=-1, keepdims=True), 1e-300)
    r = radius * rng.uniform(0.0, 1.0, size=(n, 1)) ** (1.0 / p.dim)
    return xs, u * r


def legendre_round_trip_worst(p: ControlProblem, n: int = 200, seed: int = 0) -> float:
    """Worst relative defect of recover(numeric conjugate) against H."""
    xs, lams = sample_states_duals(p, n, seed)
    worst = 0.0
    for x, lam in zip(xs, lams):
        rec = recover_hamiltonian(p, x, lam, use_analytic=False)
        truth = float(p.H(x[None, :], lam[None, :])[0])
        worst = max(worst, abs(rec - truth) / (1.0 + abs(truth)))
    return worst


def conjugate_inequality_worst(p: ControlProblem, n: int = 300, seed: int = 1) -> float:
    """Worst violation of L(x, a) >= -a.lam + H(x, lam) for the analytic L."""
    rng = np.random.default_rng(seed)
    xs, lams = sample_states_duals(p, n, seed)
    alphas = rng.uniform(-1.0, 1.0, size=(n, p.dim)) * max(p.lipschitz_lambda, 1.0)
    lvals = np.asarray(p.running_cost(xs, alphas), dtype=float)
    support = -np.sum(alphas * lams, axis=-1) + p.H(xs, lams)
    finite = np.isfinite(lvals)
    gap = support[finite] - lvals[finite]
    return float(np.max(gap)) if gap.size else -np.inf


def regularization_monotonicity_defect(p: ControlProblem, deltas) -> float:
    """Max violation of certified_sup_error(d1) <= certified_sup_error(d2), d1 <= d2."""
    errs = [regularize(p, d, "smoothed_min").certified_sup_error for d in sorted(deltas)]
    worst = 0.0
    for small, big in zip(errs, errs[1:]):
        worst = max(worst, small - big)
    return worst


def run_problem_model_invariants(entry_ids=None, n_round_trip: int = 200) -> dict:
    """Criterion-6 invariant bundle; returns the measured worst cases."""
    ids = entry_ids or catalog.list_ids()
    out = {}
    for pid in ids:
        p = catalog.get(pid).problem
        rec = {}
        if p.running_cost is not None:
            rec["round_trip"] = legendre_round_trip_worst(p, n_round_trip)
            rec["conjugate_gap"] = conjugate_inequality_worst(p)
        rec["constants_ok"] = verify_constants(p, 10_000, 0).passed
        out[pid] = rec
    nonsmooth = [
        pid for pid in ids if catalog.get(pid).problem.smooth_family is not None
        and pid.startswith("eikonal")
    ]
    if nonsmooth:
        out["regularization_monotonicity"] = regularization_monotonicity_defect(
            catalog.get(nonsmooth[0]).problem, (1e-6, 1e-4, 1e-2, 1e-1)
        )
    return out
