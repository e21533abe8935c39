"""Cell-problem solver for magnetic-shape-memory particle / polymer composites."""

__version__ = "0.1.0"

from .cellsolver import CellProblemSpec, CellResult, critical_modulus, energy_of_assignment, solve_cell, work_output
from .demag import DemagTensor, SpectralWorkspace, demag_energy, demag_tensor, solve_periodic_potential
from .elastic import (
    ElasticSystem,
    cubic_stiffness,
    eigenstrains,
    isotropic_stiffness,
    macro_stress,
    minimize_elastic,
)
from .geometry import Ellipse, Particle, Polygon, RasterGrid, Rectangle, UnitCell, make_particle_cell, rasterize
from .magnetic import MagneticParams, magnetic_energy, minimize_magnetization
from .materials import MaterialSet
from .sweep import SweepSpec, SweepTable, find_crossings, run_sweep

__all__ = [
    "CellProblemSpec",
    "CellResult",
    "DemagTensor",
    "ElasticSystem",
    "Ellipse",
    "MagneticParams",
    "MaterialSet",
    "Particle",
    "Polygon",
    "RasterGrid",
    "Rectangle",
    "SpectralWorkspace",
    "SweepSpec",
    "SweepTable",
    "UnitCell",
    "critical_modulus",
    "cubic_stiffness",
    "demag_energy",
    "demag_tensor",
    "eigenstrains",
    "energy_of_assignment",
    "find_crossings",
    "isotropic_stiffness",
    "macro_stress",
    "magnetic_energy",
    "make_particle_cell",
    "minimize_elastic",
    "minimize_magnetization",
    "rasterize",
    "run_sweep",
    "solve_cell",
    "solve_periodic_potential",
    "work_output",
]
