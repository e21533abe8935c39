import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_cell
from msmcell.demag import (
    SpectralWorkspace,
    assemble_magnetization,
    demag_energy,
    demag_tensor,
    dump_field,
    gradient_energy,
    solve_periodic_potential,
)
from msmcell.geometry import Ellipse, Particle, RasterGrid, Rectangle, UnitCell, rasterize, rotate_cell_90


def stripe_field(n, v, axis=1):
    """Magnetization e_axis on the stripe {y < v} (rows indexed by y)."""
    y = (np.arange(n) + 0.5) / n
    M = np.zeros((n, n, 2))
    M[:, y < v, axis] = 1.0
    return M


def naive_energy(M):
    """0.5 * sum_{k != 0} |k . M^(k)|^2 / |k|^2 by an explicit double sum.

    Uses the symmetric frequency range and splits every Nyquist mode
    evenly between its two aliases; no FFT involved.
    """
    n = M.shape[0]
    x = (np.arange(n) + 0.5) / n
    total = 0.0
    for p in range(-n // 2, n // 2 + 1):
        for q in range(-n // 2, n // 2 + 1):
            if p == 0 and q == 0:
                continue
            w = (0.5 if abs(p) == n // 2 else 1.0) * (0.5 if abs(q) == n // 2 else 1.0)
            ex = np.exp(-2j * np.pi * p * x)
            ey = np.exp(-2j * np.pi * q * x)
            mx = ex @ M[..., 0] @ ey / n**2
            my = ex @ M[..., 1] @ ey / n**2
            kdotm = p * mx + q * my
            total += w * abs(kdotm) ** 2 / (p * p + q * q)
    return 0.5 * total


class TestPotential:
    def test_uniform_is_field_free(self):
        ws = SpectralWorkspace(32)
        M = np.ones((32, 32, 2)) * np.array([0.3, -0.7])
        assert np.abs(solve_periodic_potential(M, ws)).max() < 1e-14
        assert demag_energy(M, ws) < 1e-28

    @pytest.mark.parametrize("v", [0.25, 0.5])
    def test_stripe_field(self, v):
        n = 128
        ws = SpectralWorkspace(n)
        g = solve_periodic_potential(stripe_field(n, v), ws)
        y = (np.arange(n) + 0.5) / n
        inside = y < v
        assert np.allclose(g[:, inside, 1], v - 1, atol=1e-12)
        assert np.allclose(g[:, ~inside, 1], v, atol=1e-12)
        assert np.abs(g[..., 0]).max() < 1e-12

    def test_divergence_free(self):
        n = 64
        y = (np.arange(n) + 0.5) / n
        M = np.zeros((n, n, 2))
        M[..., 0] = np.sin(2 * np.pi * y)[None, :]
        assert np.abs(solve_periodic_potential(M, SpectralWorkspace(n))).max() < 1e-14

    def test_zero_mean(self, rng):
        ws = SpectralWorkspace(32)
        g = solve_periodic_potential(rng.normal(size=(32, 32, 2)), ws)
        assert np.abs(g.mean(axis=(0, 1))).max() < 1e-14

    def test_linearity(self, rng):
        ws = SpectralWorkspace(32)
        A, B = rng.normal(size=(2, 32, 32, 2))
        a, b = 1.7, -0.4
        lhs = solve_periodic_potential(a * A + b * B, ws)
        rhs = a * solve_periodic_potential(A, ws) + b * solve_periodic_potential(B, ws)
        assert np.abs(lhs - rhs).max() < 1e-12

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            solve_periodic_potential(np.zeros((16, 16, 2)), SpectralWorkspace(32))


class TestEnergy:
    @pytest.mark.parametrize("v, expected", [(0.5, 0.125), (0.25, 0.09375)])
    def test_stripe_energy(self, v, expected):
        e = demag_energy(stripe_field(128, v), SpectralWorkspace(128))
        assert e == pytest.approx(expected, rel=1e-2)

    def test_against_naive_sum(self, rng):
        n = 16
        M = rng.normal(size=(n, n, 2))
        assert demag_energy(M, SpectralWorkspace(n)) == pytest.approx(naive_energy(M), rel=1e-12)

    def test_fourier_matches_real_space(self, rng):
        # The two agree except for the Nyquist modes, where the averaged
        # multiplier is not idempotent; a smooth field has no Nyquist content.
        ws = SpectralWorkspace(64)
        M = rng.normal(size=(64, 64, 2))
        rough = abs(demag_energy(M, ws) - gradient_energy(solve_periodic_potential(M, ws)))
        assert rough < 0.05 * demag_energy(M, ws)
        x = (np.arange(64) + 0.5) / 64
        X, Y = np.meshgrid(x, x, indexing="ij")
        S = np.stack([np.cos(2 * np.pi * (X + 2 * Y)), np.sin(2 * np.pi * (3 * X - Y))], axis=-1)
        assert demag_energy(S, ws) == pytest.approx(gradient_energy(solve_periodic_potential(S, ws)), rel=1e-12)

    def test_stripe_field_energy_exact(self):
        # a single-axis stripe field has only kx = 0 modes, where the
        # projection is exact
        ws = SpectralWorkspace(64)
        M = stripe_field(64, 0.375)
        assert demag_energy(M, ws) == pytest.approx(gradient_energy(solve_periodic_potential(M, ws)), rel=1e-12)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_nonnegative(self, seed):
        M = np.random.default_rng(seed).normal(size=(16, 16, 2))
        assert demag_energy(M, SpectralWorkspace(16)) >= 0.0


class TestTensor:
    def test_stripe_tensor(self):
        n = 128
        cell = UnitCell((Particle(Rectangle(0.5 - 1e-9, 0.25), (0.5, 0.5)),))
        D = demag_tensor(rasterize(cell, n)).D
        assert D[1, 1] == pytest.approx(0.25, rel=1e-2)
        assert abs(D[0, 0]) < 1e-12

    def test_disk_tensor(self):
        r = math.sqrt(0.3 / math.pi)
        g = rasterize(UnitCell((Particle(Ellipse(r, r)),)), 128)
        D = demag_tensor(g).D
        a = g.areas[0]
        assert D[0, 0] == pytest.approx(a * (1 - a) / 2, rel=2e-2)
        assert D[1, 1] == pytest.approx(a * (1 - a) / 2, rel=2e-2)
        assert abs(D[0, 0] - D[1, 1]) <= 0.02 * D[0, 0]

    def test_single_particle_trace(self, rng):
        for _ in range(5):
            cell, g = random_cell(rng, 64, max_particles=1)
            D = demag_tensor(g).D
            a = g.areas[0]
            assert abs(D[0, 0] + D[1, 1] - a * (1 - a)) < 1e-10

    def test_symmetric_psd(self, rng):
        _, g = random_cell(rng, 64, max_particles=4)
        D = demag_tensor(g).D
        assert np.array_equal(D, D.T)
        assert np.linalg.eigvalsh(D).min() > -1e-12

    def test_quadratic_form_consistency(self, rng):
        for _ in range(3):
            _, g = random_cell(rng, 64, max_particles=4)
            ws = SpectralWorkspace(64)
            T = demag_tensor(g, ws)
            m = rng.normal(size=(T.n_p, 2))
            assert T.energy(m) == pytest.approx(demag_energy(assemble_magnetization(g, m), ws), abs=1e-10)

    def test_quarter_turn_equivariance(self):
        cell = UnitCell((Particle(Ellipse(0.3, 0.12), (0.5, 0.5), 0.3),))
        D = demag_tensor(rasterize(cell, 64)).D
        Dr = demag_tensor(rasterize(rotate_cell_90(cell), 64)).D
        R = np.array([[0.0, -1.0], [1.0, 0.0]])
        assert np.allclose(Dr, R @ D @ R.T, atol=1e-13)

    def test_disk_swap_under_rotation(self):
        r = math.sqrt(0.3 / math.pi)
        cell = UnitCell((Particle(Ellipse(r, r), (0.4, 0.6)),))
        D = demag_tensor(rasterize(cell, 64)).D
        Dr = demag_tensor(rasterize(rotate_cell_90(cell), 64)).D
        assert Dr[0, 0] == pytest.approx(D[1, 1], abs=1e-13)
        assert Dr[1, 1] == pytest.approx(D[0, 0], abs=1e-13)

    def test_block_indexing(self, rng):
        _, g = random_cell(rng, 32, max_particles=3)
        T = demag_tensor(g)
        for i in range(T.n_p):
            for j in range(T.n_p):
                assert np.array_equal(T.block(i, j), T.D[2 * i : 2 * i + 2, 2 * j : 2 * j + 2])

    def test_resolution_mismatch(self, rng):
        _, g = random_cell(rng, 32, max_particles=1)
        with pytest.raises(ValueError):
            demag_tensor(g, SpectralWorkspace(64))

    def test_empty_raster(self):
        g = RasterGrid(16, np.zeros((16, 16), dtype=np.int32), ())
        assert demag_tensor(g).D.shape == (0, 0)


def test_dump_field(tmp_path):
    g = solve_periodic_potential(stripe_field(16, 0.5), SpectralWorkspace(16))
    dump_field(tmp_path / "f", g)
    back = np.loadtxt(tmp_path / "f.y.txt")
    assert back.shape == (16, 16)
    assert np.allclose(back, g[..., 1])
