"""Exception types shared across the library."""

from __future__ import annotations

import numpy as np


class SympontError(Exception):
    """Base class for all library-specific errors."""


class HamiltonianEvaluationError(SympontError):
    """A Hamiltonian (or gradient) evaluation returned a non-finite value."""

    def __init__(self, x: np.ndarray, lam: np.ndarray, message: str = ""):
        self.x = np.asarray(x, dtype=float)
        self.lam = np.asarray(lam, dtype=float)
        detail = message or "non-finite Hamiltonian evaluation"
        super().__init__(f"{detail} at x={self.x.tolist()}, lambda={self.lam.tolist()}")


class MalformedProblemError(SympontError):
    """The running cost is +inf on the whole search set, so the problem data is inconsistent."""


class RegularizationInvalidError(SympontError):
    """Certification of a smoothed Hamiltonian failed (measured sup error exceeds delta)."""

    def __init__(self, measured: float, delta: float, worst_x: np.ndarray, worst_lam: np.ndarray):
        self.measured = float(measured)
        self.delta = float(delta)
        self.worst_x = np.asarray(worst_x, dtype=float)
        self.worst_lam = np.asarray(worst_lam, dtype=float)
        super().__init__(
            f"regularization certification failed: sup|H - H_delta| = {measured:.3e} > "
            f"delta = {delta:.3e} at x={self.worst_x.tolist()}, lambda={self.worst_lam.tolist()}"
        )


class SweepNonConvergenceError(SympontError):
    """Forward-backward sweep iteration did not reach the residual tolerance."""

    def __init__(self, residual_history, tol: float):
        self.residual_history = tuple(float(r) for r in residual_history)
        self.tol = float(tol)
        last = self.residual_history[-1] if self.residual_history else float("nan")
        super().__init__(
            f"sweep iteration stalled at residual {last:.3e} (tolerance {tol:.1e}, "
            f"{len(self.residual_history)} sweeps)"
        )


class OptimizationFailedError(SympontError):
    """Every start of the variational minimizer failed to produce a usable point."""

    def __init__(self, per_start: list):
        self.per_start = list(per_start)
        super().__init__(f"all {len(self.per_start)} optimizer starts failed: {self.per_start}")


class ExtractionInconsistentError(SympontError):
    """Extracted multipliers violate the stationarity identity beyond tolerance."""

    def __init__(self, worst_violation: float, tol: float, step: int):
        self.worst_violation = float(worst_violation)
        self.tol = float(tol)
        self.step = int(step)
        super().__init__(
            f"stationarity violation {worst_violation:.3e} > {tol:.1e} at step {step}; "
            "the minimizer is not a stationary point of the discrete functional"
        )


class ReachabilityError(SympontError):
    """A query or start point lies outside the region certified as reachable-safe."""


class BudgetExceededError(SympontError):
    """A brute-force enumeration would exceed its combinatorial budget."""


class UnknownProblemError(SympontError, KeyError):
    """Catalog lookup with an id that is not registered."""
