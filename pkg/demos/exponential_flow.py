"""Follow a pp-wave family along the normalized flow parameter chi.

For each flow constant the amplitude A(chi) grows or decays exponentially
and the N-connection adjusts so that A n0^2 stays linear in chi.
"""
import numpy as np

from ricciforge.ansatz import sample_points
from ricciforge.dcalculus import evolution_residuals
from ricciforge.flows import exponential_flow_family, flow_constraint_residuals

box = {"x2": (0.3, 0.9), "x3": (0.3, 0.9), "v": (0.3, 0.9), "chi": (0.05, 0.45)}
pts = sample_points(40, box, seed=0)
for lam in (-1.0, 0.0, 1.0):
    fam = exponential_flow_family(b0sq=1.0, n0=2.0, lam=lam, chi_range=(0.0, 0.5))
    c = flow_constraint_residuals(fam, pts)
    ev = evolution_residuals(fam, pts)
    A = fam.metric.extras["amplitude"]
    print(f"lambda = {lam:+.1f}: A(0.5) = {A.at(chi=0.5):.4f}, "
          f"max|c_5const5a_1| = {np.max(np.abs(c.c_5const5a_1)):.1e}, "
          f"max|e_v5| = {np.max(np.abs(ev.e_v5)):.1e}")
