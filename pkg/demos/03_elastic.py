"""Elastic cell problem: eigenstrains, free and clamped macroscopic strain."""

import numpy as np

from msmcell.elastic import ElasticSystem, eigenstrains, macro_stress, minimize_elastic
from msmcell.geometry import make_particle_cell, rasterize
from msmcell.materials import MaterialSet

# Variant 2 is the stress-free reference; variant 1 differs by 2 eps0.
print("eigenstrain table (reference variant 2):")
for p, A in eigenstrains(0.058, reference_phase=2).items():
    print(f"  variant {p}: diag({A[0, 0]:+.3f}, {A[1, 1]:+.3f})")

cell = make_particle_cell(0.3, 1.0)
raster = rasterize(cell, 64)
system = ElasticSystem(cell, raster, MaterialSet())  # assembled once

# Transform the particle into variant 1 and let the polymer modulus vary.
# The polymer operator scales with E, so with_modulus reuses the assembly.
print(f"\n{'E [MPa]':>8} {'E_free':>10} {'E_clamped':>10} {'beta_xx':>9} {'beta_yy':>9}")
for E in (0.1, 1.0, 10.0, 100.0, 1000.0):
    s = system.with_modulus(E)
    free = minimize_elastic(s, [1])
    clamped = minimize_elastic(s, [1], clamp=np.zeros((2, 2)))
    print(f"{E:8.1f} {free.energy:10.5f} {clamped.energy:10.5f} {free.beta[0, 0]:9.5f} {free.beta[1, 1]:9.5f}")

# At the free optimum the average stress vanishes; clamped at beta = 0 it
# does not, and its contraction with the free strain bounds the energy gap.
s = system.with_modulus(2.0)
free = minimize_elastic(s, [1])
clamped = minimize_elastic(s, [1], clamp=np.zeros((2, 2)))
print(f"\nfree-mode stress  {np.abs(macro_stress(free, s, [1])).max():.1e} MPa")
sigma0 = macro_stress(clamped, s, [1])
print(f"clamped stress    {np.round(sigma0, 5).tolist()} MPa")
print(f"gap {clamped.energy - free.energy:.6f} <= -sigma0 : beta_free = {-np.sum(sigma0 * free.beta):.6f}")
