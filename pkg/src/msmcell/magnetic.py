"""Magnetic energy of uniformly magnetized single-domain particles.

Each particle i carries m_i = (cos theta_i, sin theta_i).  The energy
density per unit cell area (MPa) is

    sum_i a_i K_u (1 - (m_i . f_i)^2)            anisotropy
  + 1/2 (Ms^2/mu0) m^T D m                       demagnetization
  - (Ms/mu0) sum_i a_i h . m_i                   Zeeman

where f_i is the easy axis of the variant occupying particle i.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .demag import DemagTensor
from .geometry import RasterGrid, UnitCell

DEFAULT_SEED = 0x5EED
STARTS_PER_PARTICLE = 16


@dataclass(frozen=True)
class MagneticParams:
    ms_over_mu0: float = 0.50
    ms2_over_mu0: float = 0.31
    k_u: float = 0.13
    h_ext: tuple = (1.0, 0.0)

    def __post_init__(self):
        object.__setattr__(self, "h_ext", tuple(float(v) for v in self.h_ext))
        for name in ("ms_over_mu0", "ms2_over_mu0", "k_u"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")


def easy_axis_angles(cell: UnitCell, phases) -> np.ndarray:
    """Lab-frame angle of f_p = Rot(lattice_angle) e_p for each particle."""
    return np.array(
        [p.lattice_angle + (0.0 if ph == 1 else math.pi / 2) for p, ph in zip(cell.particles, phases)]
    )


def easy_axes(cell: UnitCell, phases) -> np.ndarray:
    ang = easy_axis_angles(cell, phases)
    return np.stack([np.cos(ang), np.sin(ang)], axis=-1)


def unit_vectors(theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    return np.stack([np.cos(theta), np.sin(theta)], axis=-1)


def anisotropy_energy(theta, phases, cell: UnitCell, raster: RasterGrid, params: MagneticParams) -> float:
    f = easy_axes(cell, phases)
    proj = np.sum(unit_vectors(theta) * f, axis=-1)
    return float(np.sum(np.asarray(raster.areas) * params.k_u * (1.0 - proj**2)))


def zeeman_energy(theta, raster: RasterGrid, params: MagneticParams) -> float:
    hm = unit_vectors(theta) @ np.asarray(params.h_ext)
    return -params.ms_over_mu0 * float(np.sum(np.asarray(raster.areas) * hm))


def demag_term(theta, D: DemagTensor, params: MagneticParams) -> float:
    return params.ms2_over_mu0 * D.energy(unit_vectors(theta))


def magnetic_energy(theta, phases, D: DemagTensor, params: MagneticParams, cell, raster) -> float:
    return (
        anisotropy_energy(theta, phases, cell, raster, params)
        + demag_term(theta, D, params)
        + zeeman_energy(theta, raster, params)
    )


class AngleModel:
    """Energy, gradient and Hessian in the particle angles, batched over rows."""

    def __init__(self, phases, D: DemagTensor, params: MagneticParams, cell: UnitCell, raster: RasterGrid):
        self.areas = np.asarray(raster.areas, dtype=float)
        self.axis = easy_axis_angles(cell, phases)
        h = np.asarray(params.h_ext, dtype=float)
        self.h_abs = float(np.hypot(*h))
        self.h_ang = math.atan2(h[1], h[0])
        self.k_u = params.k_u
        self.ms = params.ms_over_mu0
        self.D = params.ms2_over_mu0 * D.D  # (2p, 2p)
        self.p = len(self.areas)

    def _mats(self, theta):
        m = unit_vectors(theta)  # (S, p, 2)
        mp = np.stack([-m[..., 1], m[..., 0]], axis=-1)
        S = theta.shape[0]
        return m, mp, m.reshape(S, -1), mp.reshape(S, -1)

    def energy(self, theta):
        theta = np.atleast_2d(theta)
        m, _, mf, _ = self._mats(theta)
        aniso = self.areas * self.k_u * np.sin(theta - self.axis) ** 2
        zee = -self.ms * self.areas * self.h_abs * np.cos(theta - self.h_ang)
        dem = 0.5 * np.einsum("si,ij,sj->s", mf, self.D, mf)
        return aniso.sum(axis=1) + zee.sum(axis=1) + dem

    def gradient(self, theta):
        theta = np.atleast_2d(theta)
        _, mp, mf, _ = self._mats(theta)
        g = self.areas * self.k_u * np.sin(2 * (theta - self.axis))
        g += self.ms * self.areas * self.h_abs * np.sin(theta - self.h_ang)
        Dm = (mf @ self.D).reshape(theta.shape[0], self.p, 2)
        g += np.sum(mp * Dm, axis=-1)
        return g

    def hessian(self, theta):
        theta = np.atleast_2d(theta)
        S, p = theta.shape
        m, mp, mf, mpf = self._mats(theta)
        # demag part: H_ij = mp_i^T D_ij mp_j  (i != j);  diagonal adds -m_i^T (D m)_i
        Dt = self.D.reshape(p, 2, p, 2)
        H = np.einsum("sia,iajb,sjb->sij", mp, Dt, mp)
        Dm = (mf @ self.D).reshape(S, p, 2)
        diag = -np.sum(m * Dm, axis=-1)
        diag += 2 * self.areas * self.k_u * np.cos(2 * (theta - self.axis))
        diag += self.ms * self.areas * self.h_abs * np.cos(theta - self.h_ang)
        idx = np.arange(p)
        H[:, idx, idx] += diag
        return H


def _newton(model: AngleModel, theta, gtol=1e-10, maxiter=200):
    """Damped Newton with eigenvalue-modified Hessian and Armijo backtracking.

    Rows are independent starts; only rows still above the gradient
    tolerance (and not stalled in the line search) are iterated.
    """
    theta = theta.copy()
    E = model.energy(theta)
    live = np.arange(len(theta))
    for _ in range(maxiter):
        th = theta[live]
        g = model.gradient(th)
        keep = np.linalg.norm(g, axis=1) >= gtol
        live, th, g = live[keep], th[keep], g[keep]
        if not len(live):
            break
        E0 = E[live]
        w, V = np.linalg.eigh(model.hessian(th))
        scale = np.maximum(np.abs(w).max(axis=1, keepdims=True), 1e-12)
        w = np.maximum(np.abs(w), 1e-8 * scale)
        step = -np.einsum("sij,sj,skj,sk->si", V, 1.0 / w, V, g)
        slope = np.sum(step * g, axis=1)
        t = np.ones(len(live))
        pending = np.arange(len(live))
        for _ in range(60):
            trial = th[pending] + t[pending, None] * step[pending]
            Et = model.energy(trial)
            ok = Et <= E0[pending] + 1e-4 * t[pending] * slope[pending]
            rows = live[pending[ok]]
            theta[rows] = trial[ok]
            E[rows] = Et[ok]
            pending = pending[~ok]
            if not len(pending):
                break
            t[pending] *= 0.5
        # rows whose line search failed are at a numerical minimum
        live = np.setdiff1d(live, live[pending], assume_unique=True)
    return np.mod(theta, 2 * math.pi), E


def starting_angles(n_p, seed=DEFAULT_SEED):
    grid = np.arange(STARTS_PER_PARTICLE) * (2 * math.pi / STARTS_PER_PARTICLE)
    if n_p <= 3:
        return np.array(list(itertools.product(grid, repeat=n_p))).reshape(-1, n_p)
    rng = np.random.default_rng(seed)
    return rng.uniform(0.0, 2 * math.pi, size=(STARTS_PER_PARTICLE, n_p))


def minimize_magnetization(phases, D: DemagTensor, params: MagneticParams, cell, raster, seed=DEFAULT_SEED):
    """Best local minimum over a multi-start Newton descent; returns (theta, energy)."""
    model = AngleModel(phases, D, params, cell, raster)
    if model.p == 0:
        return np.zeros(0), 0.0
    starts = starting_angles(model.p, seed)
    theta, E = _newton(model, starts)
    best = int(np.argmin(E))
    return theta[best], float(E[best])
