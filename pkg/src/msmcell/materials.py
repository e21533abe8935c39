"""Material constants for NiMnGa particles in a polymer matrix.

Stresses and energy densities are in MPa, fields in Tesla.
"""

from __future__ import annotations

from dataclasses import dataclass, replace


@dataclass(frozen=True)
class MaterialSet:
    # NiMnGa elastic constants, MPa (C11 = 160 GPa, C44 = 40 GPa, C11 - C12 = 4 GPa)
    c11: float = 160_000.0
    c12: float = 156_000.0
    c44: float = 40_000.0
    eps0: float = 0.058
    # magnetic constants
    k_u: float = 0.13
    ms_over_mu0: float = 0.50
    ms2_over_mu0: float = 0.31
    # polymer
    polymer_E: float = 1.0
    polymer_nu: float = 0.45

    def with_modulus(self, E: float) -> "MaterialSet":
        return replace(self, polymer_E=float(E))

