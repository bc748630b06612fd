"""Batched first-order engines for concave maximization and convex minimization on balls.

Everything here is deliberately array-first: objective callbacks receive points of
shape ``(..., d)`` and must broadcast over the leading axes.  That lets one call
carry many (sample, start) combinations through projected-gradient ascent at once,
which is what keeps the nested Legendre transforms affordable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_TINY = 1e-300


def ball_project(points: np.ndarray, radius: float) -> np.ndarray:
    """Project points (..., d) onto the closed Euclidean ball of given radius."""
    pts = np.asarray(points, dtype=float)
    nrm = np.linalg.norm(pts, axis=-1, keepdims=True)
    scale = np.where(nrm > radius, radius / np.maximum(nrm, _TINY), 1.0)
    return pts * scale


def axis_starts(radius: float, dim: int) -> np.ndarray:
    """Multi-start pattern: the origin plus eight points per axis at graded radii.

    In one dimension this is the nine-start pattern (origin plus +-{1/4, 1/2,
    3/4, 1} radius); higher dimensions repeat the eight points on every axis.
    """
    rows = [np.zeros(dim)]
    for ax in range(dim):
        for frac in (0.25, 0.5, 0.75, 1.0):
            for sgn in (1.0, -1.0):
                e = np.zeros(dim)
                e[ax] = sgn * frac * radius
                rows.append(e)
    return np.asarray(rows)


class NonFiniteObjective(Exception):
    """Raised by the engines when the objective produces NaN or +-inf."""

    def __init__(self, point: np.ndarray):
        self.point = np.asarray(point, dtype=float)
        super().__init__("objective returned a non-finite value")


@dataclass(frozen=True)
class BallMaxResult:
    """Best point per leading index of a batched ball-constrained maximization.

    ``on_boundary`` and ``outward_slope`` let callers run the recession test
    that decides whether a Legendre conjugate is actually +inf.
    """

    point: np.ndarray        # (..., d)
    value: np.ndarray        # (...,)
    on_boundary: np.ndarray  # (...,) bool
    outward_slope: np.ndarray  # (...,), gradient component along the outward normal
    iterations: int


def _first_bad(points: np.ndarray, values: np.ndarray) -> np.ndarray:
    bad = ~np.isfinite(values)
    idx = np.argwhere(bad)[0]
    return points[tuple(idx)]


def maximize_concave_in_ball(
    value_fn,
    grad_fn,
    radius: float,
    starts: np.ndarray,
    *,
    gtol: float = 1e-10,
    max_iter: int = 300,
    armijo: float = 1e-4,
    grow: float = 1.8,
    shrink: float = 0.3,
    boundary_slope_tol: float = 5e-7,
    boundary_pg_tol: float = 1e-4,
) -> BallMaxResult:
    """Projected-gradient ascent with backtracking over a ball, batched over starts.

    ``starts`` has shape (..., S, d); the result collapses the start axis by
    keeping the best value per leading index.  Because the objective is concave,
    any interior stationary point is the global maximum; the extra starts guard
    against stalls on nonsmooth ridges, where iterates stop once the step
    underflows.  Steps are not re-grown immediately after a rejection, which
    damps the accept/reject oscillation around kinks.

    Boundary points whose outward slope clearly exceeds ``boundary_slope_tol``
    are released once their tangential gradient falls below
    ``boundary_pg_tol``: such points fail the recession test regardless of the
    last digits of their tangential position (the slope seen by the test is
    off by O(angle^2), i.e. ~1e-8 at release), so polishing them to ``gtol``
    would only burn iterations.
    """
    radius = float(radius)
    if radius <= 0:
        raise ValueError("ball radius must be positive")
    min_step = 1e-10 * max(radius, 1.0)

    lam = ball_project(np.asarray(starts, dtype=float), radius)
    val = np.asarray(value_fn(lam), dtype=float)
    if not np.all(np.isfinite(val)):
        raise NonFiniteObjective(_first_bad(lam, val))
    step = np.full(val.shape, 0.25 * radius)
    rejected_last = np.zeros(val.shape, dtype=bool)
    # Rows on an almost-flat ridge can keep accepting vanishing gains without
    # either convergence test firing; ten accepted sub-1e-12 gains in a row
    # are a stall, and stopping there perturbs the supremum at the 1e-11
    # scale.  Rejected steps neither count nor reset (they terminate through
    # the step underflow test instead).
    stall_count = np.zeros(val.shape, dtype=np.int64)

    boundary_cut = radius * (1.0 - 1e-12)
    iterations = 0
    for iterations in range(1, max_iter + 1):
        g = np.asarray(grad_fn(lam), dtype=float)
        if not np.all(np.isfinite(g)):
            raise NonFiniteObjective(_first_bad(lam, g.sum(axis=-1)))

        # Convergence measure: gradient with any outward normal component removed.
        nrm = np.linalg.norm(lam, axis=-1, keepdims=True)
        unit = lam / np.maximum(nrm, _TINY)
        radial = np.sum(g * unit, axis=-1, keepdims=True)
        on_b = nrm >= boundary_cut
        g_proj = g - np.where(on_b & (radial > 0), radial, 0.0) * unit
        pg = np.linalg.norm(g_proj, axis=-1)
        converged = (pg <= gtol) | (step <= min_step) | (stall_count >= 10)
        converged |= on_b[..., 0] & (radial[..., 0] > boundary_slope_tol) & (pg <= boundary_pg_tol)
        if np.all(converged):
            break

        cand = ball_project(lam + step[..., None] * g, radius)
        cval = np.asarray(value_fn(cand), dtype=float)
        if not np.all(np.isfinite(cval)):
            raise NonFiniteObjective(_first_bad(cand, cval))

        # Second trial point: the ball boundary along the current ray (or the
        # gradient ray from the origin).  On conical ridges with a small axial
        # slope (the recession regime) the plain gradient step zigzags and the
        # Armijo test can reject forever, because a kink subgradient
        # overstates the directional derivative; the probe is a global trial
        # on a concave objective, so any strict improvement is accepted.
        gnorm = np.linalg.norm(g, axis=-1, keepdims=True)
        probe_dir = np.where(nrm > _TINY, unit, g / np.maximum(gnorm, _TINY))
        cand_b = radius * probe_dir
        bval = np.asarray(value_fn(cand_b), dtype=float)
        better = np.isfinite(bval) & (bval > cval)
        cand = np.where(better[..., None], cand_b, cand)
        cval = np.where(better, bval, cval)

        predicted = np.sum(g * (cand - lam), axis=-1)
        sufficient = cval - val >= armijo * np.maximum(predicted, 0.0)
        accept = np.where(better, cval > val, sufficient & (cval > val)) & ~converged

        tiny_gain = accept & (cval - val <= 1e-12 * (1.0 + np.abs(val)))
        big_gain = accept & ~tiny_gain
        stall_count = np.where(big_gain, 0, stall_count + tiny_gain)

        lam = np.where(accept[..., None], cand, lam)
        val = np.where(accept, cval, val)
        factor = np.where(accept, np.where(rejected_last, 1.0, grow), shrink)
        # A probe jump says nothing about the local scale; keep the step.
        step = step * np.where(better & accept, 1.0, factor)
        rejected_last = ~accept

    # Collapse the start axis, keeping the best value per leading index.
    best = np.argmax(val, axis=-1)
    point = np.take_along_axis(lam, best[..., None, None], axis=-2)[..., 0, :]
    value = np.take_along_axis(val, best[..., None], axis=-1)[..., 0]

    g_final = np.asarray(grad_fn(point), dtype=float)
    nrm = np.linalg.norm(point, axis=-1)
    on_boundary = nrm >= boundary_cut
    unit = point / np.maximum(nrm, _TINY)[..., None]
    outward_slope = np.sum(g_final * unit, axis=-1)
    return BallMaxResult(
        point=point,
        value=value,
        on_boundary=on_boundary,
        outward_slope=np.where(on_boundary, outward_slope, 0.0),
        iterations=iterations,
    )


def minimize_convex_on_ball(
    value_fn,
    radius: float,
    dim: int,
    *,
    grid: int = 0,
    levels: int = 9,
    window_factor: float = 2.5,
    value_tol: float = 0.0,
) -> tuple[np.ndarray, float]:
    """Zooming pattern search for a convex objective on a ball; tolerates +inf values.

    Evaluates the objective on a product grid, re-centres the window on the best
    point, and shrinks only while the best point stays strictly inside the
    window (the classic pattern-search rule, which keeps long convex valleys
    from being cut off).  Points outside the ball are projected onto it so the
    sphere is sampled densely when the minimizer sits on the boundary.  When
    ``value_tol`` is positive, iteration stops once two consecutive levels
    improve the best value by less than a quarter of it.
    """
    if grid <= 0:
        grid = 21 if dim == 1 else 15
    radius = float(radius)
    center = np.zeros(dim)
    half = radius
    best_pt = np.zeros(dim)
    best_val = float(np.asarray(value_fn(best_pt[None, :]))[0])

    shrinks_done = 0
    translations = 0
    stagnant = 0
    while shrinks_done < levels and translations < 4 * levels:
        axes = [np.linspace(center[a] - half, center[a] + half, grid) for a in range(dim)]
        mesh = np.meshgrid(*axes, indexing="ij")
        pts = ball_project(np.stack([m.ravel() for m in mesh], axis=-1), radius)
        vals = np.asarray(value_fn(pts), dtype=float)
        if np.all(np.isinf(vals)):
            return best_pt, best_val
        k = int(np.argmin(vals))
        improvement = best_val - float(vals[k])
        if improvement > 0:
            best_val = float(vals[k])
            best_pt = pts[k].copy()

        idx = np.unravel_index(k, tuple(grid for _ in range(dim)))
        interior = all(0 < i < grid - 1 for i in idx)
        # A best point pinned to the ball boundary cannot be improved by
        # translating the window outward; refine around it instead.
        pinned = float(np.linalg.norm(pts[k])) >= radius * (1.0 - 1e-12)
        center = pts[k].copy()
        if interior or pinned:
            half *= window_factor / (grid - 1) * 2.0
            shrinks_done += 1
        else:
            translations += 1
        if value_tol > 0 and shrinks_done >= 3:
            stagnant = stagnant + 1 if improvement < 0.25 * value_tol else 0
            if stagnant >= 2:
                break
        if half <= 1e-9 * radius:
            break
    return best_pt, best_val


def minimize_convex_polar(
    value_fn,
    radius: float,
    *,
    angle_grid: int = 21,
    radius_grid: int = 15,
    levels: int = 9,
    value_tol: float = 0.0,
) -> tuple[np.ndarray, float]:
    """Two-dimensional variant of the zooming search in polar coordinates.

    Convex objectives on a disk often attain their minimum on a circle (the
    effective-domain boundary of an extended-real objective); a polar window
    slides tangentially along such circles where a Cartesian window would
    translate indefinitely.
    """
    radius = float(radius)
    theta_c, theta_h = 0.0, np.pi
    r_c, r_h = radius / 2.0, radius / 2.0
    best_pt = np.zeros(2)
    best_val = float(np.asarray(value_fn(best_pt[None, :]))[0])

    stagnant = 0
    for level in range(levels):
        thetas = (
            np.linspace(0.0, 2 * np.pi, angle_grid, endpoint=False)
            if level == 0
            else np.linspace(theta_c - theta_h, theta_c + theta_h, angle_grid)
        )
        radii = np.clip(np.linspace(r_c - r_h, r_c + r_h, radius_grid), 0.0, radius)
        tt, rr = np.meshgrid(thetas, radii, indexing="ij")
        pts = np.stack([rr * np.cos(tt), rr * np.sin(tt)], axis=-1).reshape(-1, 2)
        vals = np.asarray(value_fn(pts), dtype=float)
        if np.all(np.isinf(vals)):
            return best_pt, best_val
        k = int(np.argmin(vals))
        improvement = best_val - float(vals[k])
        if improvement > 0:
            best_val = float(vals[k])
            best_pt = pts[k].copy()

        i, j = np.unravel_index(k, (angle_grid, radius_grid))
        theta_c = float(thetas[i])
        r_best = float(radii[j])
        r_c = r_best
        theta_interior = level == 0 or (0 < i < angle_grid - 1)
        r_interior = (0 < j < radius_grid - 1) or r_best <= 1e-12 or r_best >= radius - 1e-12
        if theta_interior:
            theta_h *= 5.0 / (angle_grid - 1)
        if r_interior:
            r_h *= 5.0 / (radius_grid - 1)
        r_h = max(r_h, 1e-12 * radius)
        if value_tol > 0 and level >= 3:
            stagnant = stagnant + 1 if improvement < 0.25 * value_tol else 0
            if stagnant >= 2:
                break
    return best_pt, best_val
