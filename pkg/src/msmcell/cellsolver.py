"""The coupled cell problem: phase enumeration, energies, strain, work output.

With Maxwell's equation solved in the reference configuration the elastic
and magnetic minimizations decouple once the phases are fixed, so every
assignment costs one elastic solve per macroscopic-strain mode plus one
angle minimization.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .demag import DemagTensor, SpectralWorkspace, demag_tensor
from .elastic import ElasticSystem, minimize_elastic
from .errors import NoBracketError, SizeError
from .geometry import RasterGrid, UnitCell, rasterize
from .magnetic import (
    DEFAULT_SEED,
    MagneticParams,
    anisotropy_energy,
    demag_term,
    minimize_magnetization,
    zeeman_energy,
)
from .materials import MaterialSet

MAX_PARTICLES = 12
FREE = "free"
CLAMPED = "clamped"


@dataclass(frozen=True)
class CellProblemSpec:
    cell: UnitCell
    resolution: int = 128
    materials: MaterialSet = MaterialSet()
    reference_phase: int = 2
    field_T: float = 1.0
    field_angle: float = 0.0
    eigenstrain_sign: int = 1
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        if self.reference_phase not in (1, 2):
            raise ValueError("reference_phase must be 1 or 2")
        if self.eigenstrain_sign not in (1, -1):
            raise ValueError("eigenstrain_sign must be +1 or -1")

    @property
    def field_direction(self) -> np.ndarray:
        return np.array([math.cos(self.field_angle), math.sin(self.field_angle)])

    @property
    def magnetic_params(self) -> MagneticParams:
        m = self.materials
        return MagneticParams(
            ms_over_mu0=m.ms_over_mu0,
            ms2_over_mu0=m.ms2_over_mu0,
            k_u=m.k_u,
            h_ext=tuple(self.field_T * self.field_direction),
        )

    def with_modulus(self, E: float) -> "CellProblemSpec":
        return replace(self, materials=self.materials.with_modulus(E))

    @property
    def untransformed(self) -> tuple:
        return (self.reference_phase,) * self.cell.n_p


@dataclass(frozen=True)
class AssignmentEnergy:
    phases: tuple
    mode: str
    total: float
    elastic: float
    anisotropy: float
    demag: float
    zeeman: float
    beta: np.ndarray = field(repr=False)
    theta: np.ndarray = field(repr=False)
    strain_along_field: float = 0.0

    @property
    def magnetic(self) -> float:
        return self.anisotropy + self.demag + self.zeeman


# -- cached, geometry-only pieces ---------------------------------------------


@functools.lru_cache(maxsize=64)
def geometry_data(cell: UnitCell, n: int) -> tuple[RasterGrid, DemagTensor]:
    """Raster and demag tensor, keyed by (geometry, resolution)."""
    raster = rasterize(cell, n)
    return raster, demag_tensor(raster, SpectralWorkspace(n))


@functools.lru_cache(maxsize=64)
def _elastic_template(cell, n, materials, reference_phase, sign):
    raster, _ = geometry_data(cell, n)
    return ElasticSystem(cell, raster, materials.with_modulus(1.0), reference_phase, sign)


def elastic_system(spec: CellProblemSpec) -> ElasticSystem:
    """Assembled system for the problem; polymer operators are shared across E."""
    m = spec.materials
    template = _elastic_template(
        spec.cell, spec.resolution, m.with_modulus(1.0), spec.reference_phase, spec.eigenstrain_sign
    )
    return template.with_modulus(m.polymer_E)


@functools.lru_cache(maxsize=1024)
def _magnetic_minimum(cell, n, phases, params, seed):
    raster, D = geometry_data(cell, n)
    theta, _ = minimize_magnetization(phases, D, params, cell, raster, seed=seed)
    return (
        theta,
        anisotropy_energy(theta, phases, cell, raster, params),
        demag_term(theta, D, params),
        zeeman_energy(theta, raster, params),
    )


def magnetic_minimum(spec: CellProblemSpec, phases):
    """(theta, anisotropy, demag, zeeman) at the optimal magnetization."""
    return _magnetic_minimum(spec.cell, spec.resolution, tuple(phases), spec.magnetic_params, spec.seed)


# -- operations ---------------------------------------------------------------


def energy_of_assignment(spec: CellProblemSpec, phases, mode: str = FREE, system=None) -> AssignmentEnergy:
    """Minimized energy of one phase assignment; ``mode`` is 'free' or 'clamped' (beta = 0)."""
    phases = tuple(int(p) for p in phases)
    if mode not in (FREE, CLAMPED):
        raise ValueError(f"mode must be {FREE!r} or {CLAMPED!r}")
    system = system or elastic_system(spec)
    sol = minimize_elastic(system, phases, clamp=None if mode == FREE else np.zeros((2, 2)))
    theta, e_an, e_dm, e_ze = magnetic_minimum(spec, phases)
    eh = spec.field_direction
    return AssignmentEnergy(
        phases=phases,
        mode=mode,
        total=sol.energy + e_an + e_dm + e_ze,
        elastic=sol.energy,
        anisotropy=e_an,
        demag=e_dm,
        zeeman=e_ze,
        beta=sol.beta,
        theta=theta,
        strain_along_field=float(eh @ sol.beta @ eh),
    )


def available_work(clamped: float, free: float, untransformed_free: float) -> float:
    """Work deliverable when expanding from beta = 0 to the free optimum.

    At beta = 0 the cell sits in the cheaper of the clamped transformed
    state and the untransformed state, so the gap is capped by the
    magnetic driving force and vanishes once transformation stops paying.
    """
    return max(0.0, min(clamped, untransformed_free) - free)


@dataclass
class CellResult:
    spec: CellProblemSpec
    energies: dict  # (phases, mode) -> AssignmentEnergy
    untransformed: tuple
    transformed: tuple | None
    global_minimizer: tuple

    def get(self, phases, mode=FREE) -> AssignmentEnergy:
        return self.energies[(tuple(phases), mode)]

    def assignments(self):
        return sorted({k[0] for k in self.energies})

    def clamped_free_gap(self, phases) -> float:
        """E(clamped at beta = 0) - E(free) for one assignment."""
        return self.get(phases, CLAMPED).total - self.get(phases, FREE).total

    def work_output_of(self, phases) -> float:
        u = self.get(self.untransformed, FREE).total
        return available_work(self.get(phases, CLAMPED).total, self.get(phases, FREE).total, u)

    @property
    def work_output(self) -> float:
        return 0.0 if self.transformed is None else self.work_output_of(self.transformed)

    @property
    def spontaneous_strain(self) -> float:
        """Free strain along the field of the globally preferred assignment."""
        return self.get(self.global_minimizer, FREE).strain_along_field

    @property
    def energy_gap(self) -> float:
        """Transformed minus untransformed free energy (negative: transformation occurs)."""
        if self.transformed is None:
            return math.inf
        return self.get(self.transformed).total - self.get(self.untransformed).total


def solve_cell(spec: CellProblemSpec) -> CellResult:
    n_p = spec.cell.n_p
    if n_p > MAX_PARTICLES:
        raise SizeError(f"{n_p} particles exceed the enumeration limit of {MAX_PARTICLES}")
    system = elastic_system(spec)
    energies = {}
    for phases in itertools.product((1, 2), repeat=n_p):
        for mode in (FREE, CLAMPED):
            energies[(phases, mode)] = energy_of_assignment(spec, phases, mode, system)
    untransformed = spec.untransformed
    others = [p for p in itertools.product((1, 2), repeat=n_p) if p != untransformed]
    transformed = min(others, key=lambda p: energies[(p, FREE)].total) if others else None
    glob = min((k[0] for k in energies), key=lambda p: energies[(p, FREE)].total)
    return CellResult(spec, energies, untransformed, transformed, glob)


def work_output(spec: CellProblemSpec) -> float:
    return solve_cell(spec).work_output


def free_energy_gap(spec: CellProblemSpec) -> float:
    """min over non-reference assignments of E_free, minus the untransformed E_free."""
    n_p = spec.cell.n_p
    if n_p > MAX_PARTICLES:
        raise SizeError(f"{n_p} particles exceed the enumeration limit of {MAX_PARTICLES}")
    system = elastic_system(spec)
    u = energy_of_assignment(spec, spec.untransformed, FREE, system).total
    best = min(
        energy_of_assignment(spec, p, FREE, system).total
        for p in itertools.product((1, 2), repeat=n_p)
        if p != spec.untransformed
    )
    return best - u


def critical_modulus(spec: CellProblemSpec, bracket=(0.03, 80.0), rel_width=1e-3) -> float:
    """Polymer modulus where transformed and untransformed free energies cross.

    Bisection in log E until hi/lo - 1 <= rel_width.
    """
    lo, hi = float(bracket[0]), float(bracket[1])
    d_lo = free_energy_gap(spec.with_modulus(lo))
    d_hi = free_energy_gap(spec.with_modulus(hi))
    if d_lo == 0.0:
        return lo
    if d_hi == 0.0:
        return hi
    if (d_lo < 0) == (d_hi < 0):
        # an endpoint within rel_width (in log E, linear model) of the root counts as the root
        span = math.log(hi / lo)
        for end, d_end in ((lo, d_lo), (hi, d_hi)):
            if d_hi != d_lo and abs(d_end) / abs(d_hi - d_lo) * span <= rel_width:
                return end
        raise NoBracketError(
            f"energy gap does not change sign on [{lo}, {hi}] MPa ({d_lo:.3e}, {d_hi:.3e})",
            d_lo,
            d_hi,
        )
    while hi / lo - 1.0 > rel_width:
        mid = math.sqrt(lo * hi)
        d_mid = free_energy_gap(spec.with_modulus(mid))
        if d_mid == 0.0:
            return mid
        if (d_mid < 0) == (d_lo < 0):
            lo, d_lo = mid, d_mid
        else:
            hi, d_hi = mid, d_mid
    # final linear-in-log interpolation inside the last bracket
    s = d_lo / (d_lo - d_hi)
    return math.exp(math.log(lo) + s * (math.log(hi) - math.log(lo)))
