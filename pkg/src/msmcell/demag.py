"""Periodic magnetostatics on the pixel grid.

The potential U solves  Delta U + div M = 0  on the unit torus with zero
mean.  In Fourier space the demagnetizing field is the projection

    grad U^(k) = -(k k^T / |k|^2) M^(k),   k != 0,

so the field never needs the potential itself.  Energies are per unit
cell area in units of Ms^2/mu0.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import RasterGrid, check_resolution


class SpectralWorkspace:
    """Wavevectors and scratch storage for one grid size.

    A Nyquist mode stands for two (at the corner four) integer
    wavevectors; its multiplier is the average of the projections over
    those aliases.  The averaged multiplier is even in k, so real fields
    stay real, has unit trace, so the Parseval identities are exact, and is
    invariant under quarter turns of the grid.
    """

    def __init__(self, n: int):
        check_resolution(n)
        self.n = n
        k = np.fft.fftfreq(n, d=1.0 / n)  # integers in [-n/2, n/2)
        kx, ky = np.meshgrid(k, k, indexing="ij")
        self.kx = 2 * np.pi * kx
        self.ky = 2 * np.pi * ky
        nyq = -n // 2
        sx = (1, -1)
        self.pxx = np.zeros((n, n))
        self.pyy = np.zeros((n, n))
        self.pxy = np.zeros((n, n))
        # alias k -> -k on the Nyquist row/column; both signs average in
        for fx in sx:
            for fy in sx:
                ax = np.where(kx == nyq, fx * kx, kx)
                ay = np.where(ky == nyq, fy * ky, ky)
                k2 = ax**2 + ay**2
                k2[0, 0] = 1.0
                self.pxx += ax**2 / k2
                self.pyy += ay**2 / k2
                self.pxy += ax * ay / k2
        for p in (self.pxx, self.pyy, self.pxy):
            p /= 4.0
            p[0, 0] = 0.0
        self._buf = np.empty((2, n, n), dtype=complex)

    def _transform(self, M):
        M = np.asarray(M, dtype=float)
        if M.shape != (self.n, self.n, 2):
            raise ValueError(f"magnetization must have shape {(self.n, self.n, 2)}, got {M.shape}")
        self._buf[0] = np.fft.fft2(M[..., 0]) / self.n**2
        self._buf[1] = np.fft.fft2(M[..., 1]) / self.n**2
        return self._buf


def solve_periodic_potential(M, ws: SpectralWorkspace) -> np.ndarray:
    """Demagnetizing field grad U (shape n x n x 2) at pixel centers."""
    mx, my = ws._transform(M)
    gx = -(ws.pxx * mx + ws.pxy * my)
    gy = -(ws.pxy * mx + ws.pyy * my)
    out = np.empty((ws.n, ws.n, 2))
    out[..., 0] = np.fft.ifft2(gx * ws.n**2).real
    out[..., 1] = np.fft.ifft2(gy * ws.n**2).real
    return out


def demag_energy(M, ws: SpectralWorkspace) -> float:
    """0.5 * integral of |grad U|^2 over the cell, evaluated in Fourier space."""
    mx, my = ws._transform(M)
    km2 = ws.pxx * np.abs(mx) ** 2 + ws.pyy * np.abs(my) ** 2 + 2 * ws.pxy * (mx.conj() * my).real
    return 0.5 * float(km2.sum())


def gradient_energy(grad) -> float:
    """0.5 * integral of |grad|^2 by the pixel rule (the real-space counterpart)."""
    return 0.5 * float(np.mean(np.sum(np.asarray(grad) ** 2, axis=-1)))


@dataclass(frozen=True, eq=False)
class DemagTensor:
    """Symmetric (2 n_p) x (2 n_p) form, index 2*i + a for particle i, axis a."""

    D: np.ndarray = field(repr=False)

    @property
    def n_p(self) -> int:
        return self.D.shape[0] // 2

    def block(self, i, j):
        return self.D[2 * i : 2 * i + 2, 2 * j : 2 * j + 2]

    def energy(self, m) -> float:
        """0.5 m^T D m for stacked per-particle magnetizations m (n_p x 2)."""
        v = np.asarray(m, dtype=float).reshape(-1)
        return 0.5 * float(v @ self.D @ v)


def unit_fields(raster: RasterGrid):
    """Yield (i, a, M) with unit magnetization e_a on particle i, zero elsewhere."""
    for i in range(len(raster.areas)):
        chi = raster.mask(i).astype(float)
        for a in range(2):
            M = np.zeros((raster.n, raster.n, 2))
            M[..., a] = chi
            yield i, a, M


def demag_tensor(raster: RasterGrid, ws: SpectralWorkspace | None = None) -> DemagTensor:
    """Assemble D in Fourier space from one transform per (particle, axis).

    D[(i,a),(j,b)] = sum_k conj(M_ia^(k)) . P(k) M_jb^(k), the bilinear form
    of :func:`demag_energy`, so 0.5 m^T D m reproduces it exactly.
    """
    ws = ws or SpectralWorkspace(raster.n)
    if ws.n != raster.n:
        raise ValueError("workspace and raster resolutions differ")
    if not raster.areas:
        return DemagTensor(np.zeros((0, 0)))
    hats = []
    for _, _, M in unit_fields(raster):
        mx, my = ws._transform(M)
        hats.append(np.stack([mx, my]))
    H = np.stack(hats).reshape(len(hats), 2, -1)  # (2 n_p, 2, n^2)
    P = np.array([[ws.pxx, ws.pxy], [ws.pxy, ws.pyy]]).reshape(2, 2, -1)
    PH = np.einsum("abk,jbk->jak", P, H)
    D = np.einsum("iak,jak->ij", H.conj(), PH).real
    return DemagTensor(0.5 * (D + D.T))


def assemble_magnetization(raster: RasterGrid, m) -> np.ndarray:
    """Pixel field carrying the uniform vector m[i] on particle i."""
    m = np.asarray(m, dtype=float).reshape(-1, 2)
    M = np.zeros((raster.n, raster.n, 2))
    for i, mi in enumerate(m):
        M[raster.mask(i)] = mi
    return M


def dump_field(path, grad) -> None:
    """Write the two gradient components as plain-text matrices ``<path>.x`` / ``.y``."""
    np.savetxt(f"{path}.x.txt", grad[..., 0])
    np.savetxt(f"{path}.y.txt", grad[..., 1])
