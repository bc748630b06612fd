"""Running costs by numeric Legendre transform, and the way back.

The running cost is the concave conjugate of the Hamiltonian in its dual
argument.  For the unit-speed front H(x, lam) = -|lam| the conjugate is an
indicator: zero for speeds up to one, +inf beyond.  The transform is
involutive, so minimizing lam . alpha + L(x, alpha) recovers H.
"""

import numpy as np

from sympont import catalog, recover_hamiltonian, running_cost_numeric

entry = catalog.get("eikonal-1d")
p = entry.problem

print("numeric conjugate of H(x, lam) = -|lam| at x = 0:")
for alpha in (0.0, 0.5, 0.99, 1.01, 2.0):
    val = running_cost_numeric(p, [0.0], [alpha])
    print(f"  L(0, {alpha:5.2f}) = {val}")

print("\nround trip through the numeric conjugate (should reproduce -|lam|):")
for lam in (0.25, 0.7, 1.0):
    rec = recover_hamiltonian(p, [0.0], [lam], use_analytic=False)
    print(f"  lam = {lam:4.2f}: recovered {rec:+.8f}, truth {-lam:+.8f}")

# A genuinely x-coupled smooth problem: the conjugate picks up x-dependence.
q = catalog.get("smooth-quadratic-1d").problem
print("\nsmooth problem: dom L shrinks where the local speed m(x) is smaller")
for x in (-2.0, 0.0, 2.0):
    m = 1.0 + 0.1 * np.tanh(x)
    at_edge = running_cost_numeric(q, [x], [0.99 * m])
    beyond = running_cost_numeric(q, [x], [1.05 * m])
    print(f"  x = {x:+.1f}: m = {m:.3f}, L near edge = {at_edge:.4f}, beyond = {beyond}")
