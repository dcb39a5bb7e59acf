"""Tabulate the deformed horizon r+(phi) of a small rotoid deformation.

The root found numerically is compared with the closed form and with its
first-order expansion in eps.
"""
import numpy as np

from ricciforge.ansatz import SchwarzschildParams
from ricciforge.generators.schwarzschild import rotoid_horizon

phi = np.linspace(0, np.pi, 7)
for eps in (1e-3, 1e-2, 5e-2):
    h = rotoid_horizon(SchwarzschildParams(1.0, eps), phi=phi)
    print(f"eps = {eps:g}")
    for p, r, d1 in zip(phi, h.r_root, h.difference_first_order):
        print(f"  phi = {p:5.3f}  r+ = {r:.10f}  first-order error = {d1:+.2e}")
