#!/usr/bin/env python3
"""Geometry of the polarizability coupling: <l'|cos^2(theta)|l>.

cos^2 connects m = 0 rotor states only along dl = 0, +-2, which is why a
linearly polarized pulse climbs the ladder two quanta at a time. The
diagonal tends to 1/2 for high l (classical average of cos^2); the
ground-state value is exactly 1/3.

Run: python demos/02_matrix_elements.py
"""

import numpy as np

from rotorpath.rotor import cos2_matrix_element, geometry_matrix

N = 8
g = geometry_matrix(N).elements

print(f"<l'|cos^2|l> for l = 0..{N - 1}:")
header = "      " + "".join(f"l={l:<8d}" for l in range(N))
print(header)
for l_to in range(N):
    row = "".join(f"{g[l_to, l_from]:<10.6f}" if g[l_to, l_from] else f"{'.':<10}" for l_from in range(N))
    print(f"l'={l_to}  {row}")

print()
print(f"<0|cos^2|0> = {cos2_matrix_element(0, 0):.12f}  (exactly 1/3)")
closed_02 = 2.0 / (3.0 * np.sqrt(5.0))
print(f"<2|cos^2|0> = {cos2_matrix_element(2, 0):.12f}  vs closed form {closed_02:.12f}")

print()
print("ladder couplings <l+2|cos^2|l> and diagonal values:")
for l in range(N - 2):
    closed = (l + 1) * (l + 2) / ((2 * l + 3) * np.sqrt((2 * l + 1) * (2 * l + 5)))
    print(f"  l = {l}: off-diag {g[l + 2, l]:.6f} (closed {closed:.6f}), diag {g[l, l]:.6f}")
print("  diagonal -> 1/2 for large l; the propagator zeroes it, the direct")
print("  integrator can keep it to measure that approximation.")
