"""Periodic magnetostatics and the demagnetization tensor."""

import numpy as np

from msmcell.demag import SpectralWorkspace, demag_energy, demag_tensor, solve_periodic_potential
from msmcell.geometry import make_particle_cell, rasterize

n = 128
ws = SpectralWorkspace(n)

# A layer {y < v} magnetized across the layers.  The 1-D solution has a
# constant field v - 1 inside and v outside, energy v (1 - v) / 2.
y = (np.arange(n) + 0.5) / n
for v in (0.25, 0.5):
    M = np.zeros((n, n, 2))
    M[:, y < v, 1] = 1.0
    grad = solve_periodic_potential(M, ws)
    print(
        f"stripe v = {v}: field inside {grad[0, 0, 1]:+.4f}, outside {grad[0, -1, 1]:+.4f}, "
        f"energy {demag_energy(M, ws):.6f} (exact {v * (1 - v) / 2:.6f})"
    )

# Magnetized along the layers the stripe has no free poles at all.
M = np.zeros((n, n, 2))
M[:, y < 0.5, 0] = 1.0
print(f"stripe magnetized along the layers: energy {demag_energy(M, ws):.2e}")

# For per-particle uniform magnetizations the energy is a quadratic form.
# A disk on the square torus is nearly isotropic, and the trace of its
# tensor equals a (1 - a) exactly.
g = rasterize(make_particle_cell(0.3, 1.0), n)
D = demag_tensor(g, ws)
a = g.areas[0]
print(f"\ndisk: D =\n{np.round(D.D, 6)}")
print(f"trace {np.trace(D.D):.12f} vs a(1-a) = {a * (1 - a):.12f}")

# Elongated particles prefer magnetization along their long axis.
g = rasterize(make_particle_cell(0.3, 2.0), n)
D = demag_tensor(g, ws)
print(f"2:1 ellipse along x: D_xx = {D.D[0, 0]:.5f}, D_yy = {D.D[1, 1]:.5f}")
