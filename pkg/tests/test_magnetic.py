import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from msmcell.demag import DemagTensor, demag_tensor
from msmcell.geometry import Ellipse, Particle, RasterGrid, Rectangle, UnitCell, make_particle_cell, rasterize
from msmcell.magnetic import (
    AngleModel,
    MagneticParams,
    anisotropy_energy,
    easy_axes,
    magnetic_energy,
    minimize_magnetization,
    starting_angles,
    zeeman_energy,
)

FULL = 0.5 - 1e-9


def fake_raster(areas, n=16):
    """A raster carrying only the given areas (pixel layout is irrelevant here)."""
    return RasterGrid(n, np.zeros((n, n), dtype=np.int32), tuple(areas))


def one_particle(lattice_angle=0.0):
    return UnitCell((Particle(Ellipse(0.2, 0.2), (0.5, 0.5), 0.0, lattice_angle),))


def scan_minimum(model, points=10**6):
    """Exhaustive single-angle oracle: best energy on an equispaced grid."""
    t = np.arange(points) * (2 * math.pi / points)
    E = np.concatenate([model.energy(c[:, None]) for c in np.array_split(t, 20)])
    k = int(np.argmin(E))
    return t[k], E[k]


class TestTerms:
    def test_anisotropy_zero_on_easy_axis(self):
        cell = one_particle(0.4)
        g = fake_raster([0.3])
        p = MagneticParams()
        for phase in (1, 2):
            f = easy_axes(cell, [phase])[0]
            theta = [math.atan2(f[1], f[0])]
            assert anisotropy_energy(theta, [phase], cell, g, p) == pytest.approx(0.0, abs=1e-17)
            assert anisotropy_energy([theta[0] + math.pi], [phase], cell, g, p) == pytest.approx(0.0, abs=1e-17)

    def test_anisotropy_values(self):
        cell = one_particle()
        g = fake_raster([0.3])
        p = MagneticParams()
        # phase 1 easy axis is e_x
        assert anisotropy_energy([math.pi / 2], [1], cell, g, p) == pytest.approx(0.039)
        assert anisotropy_energy([math.pi / 4], [1], cell, g, p) == pytest.approx(0.0195)

    def test_zeeman_values(self):
        g = fake_raster([0.3])
        assert zeeman_energy([0.0], g, MagneticParams(h_ext=(1.0, 0.0))) == pytest.approx(-0.15)
        assert zeeman_energy([math.pi / 2], g, MagneticParams(h_ext=(1.0, 0.0))) == pytest.approx(0.0, abs=1e-17)
        assert zeeman_energy([1.234], g, MagneticParams(h_ext=(0.0, 0.0))) == 0.0

    def test_stripe_totals(self):
        cell = UnitCell((Particle(Rectangle(FULL, 0.25), (0.5, 0.5)),))
        g = rasterize(cell, 128)
        D = demag_tensor(g)
        p = MagneticParams(h_ext=(0.0, 0.0))
        # phase 2 has easy axis e_y
        assert magnetic_energy([math.pi / 2], [2], D, p, cell, g) == pytest.approx(0.03875, rel=1e-2)
        assert magnetic_energy([0.0], [2], D, p, cell, g) == pytest.approx(0.065, rel=1e-2)

    def test_negative_constants_rejected(self):
        with pytest.raises(ValueError):
            MagneticParams(k_u=-1.0)


def random_config(rng):
    """Random (phase, D, h) for one particle with a physically shaped D."""
    a = rng.uniform(0.05, 0.45)
    tr = a * (1 - a)
    dxx = rng.uniform(0.1, 0.9) * tr
    off = rng.uniform(-0.3, 0.3) * math.sqrt(dxx * (tr - dxx))
    D = DemagTensor(np.array([[dxx, off], [off, tr - dxx]]))
    cell = one_particle(rng.uniform(0, 2 * math.pi))
    g = fake_raster([a])
    h = rng.uniform(-1.5, 1.5, 2)
    return int(rng.integers(1, 3)), D, MagneticParams(h_ext=tuple(h)), cell, g


class TestMinimization:
    def test_matches_exhaustive_scan(self, rng):
        for _ in range(3):
            phase, D, p, cell, g = random_config(rng)
            theta, E = minimize_magnetization([phase], D, p, cell, g)
            _, E_scan = scan_minimum(AngleModel([phase], D, p, cell, g))
            assert E <= E_scan + 1e-12
            assert E == pytest.approx(E_scan, abs=1e-8)

    def test_disk_default_parameters(self):
        cell = make_particle_cell(0.3, 1.0)
        g = rasterize(cell, 128)
        D = demag_tensor(g)
        p = MagneticParams()
        theta, E = minimize_magnetization([2], D, p, cell, g)
        _, E_scan = scan_minimum(AngleModel([2], D, p, cell, g))
        assert E == pytest.approx(E_scan, abs=1e-8)
        assert magnetic_energy(theta, [2], D, p, cell, g) == pytest.approx(E, abs=1e-14)

    def test_no_field_no_demag(self):
        cell = one_particle(0.7)
        g = fake_raster([0.3])
        theta, E = minimize_magnetization([1], DemagTensor(np.zeros((2, 2))), MagneticParams(h_ext=(0, 0)), cell, g)
        assert E == pytest.approx(0.0, abs=1e-15)
        f = easy_axes(cell, [1])[0]
        assert abs(abs(math.cos(theta[0]) * f[0] + math.sin(theta[0]) * f[1]) - 1) < 1e-10

    def test_strong_field_alignment(self):
        cell = one_particle(0.7)
        g = fake_raster([0.3])
        D = DemagTensor(np.diag([0.1, 0.11]))
        theta, E = minimize_magnetization([2], D, MagneticParams(h_ext=(1e4, 0.0)), cell, g)
        assert abs(math.remainder(theta[0], 2 * math.pi)) < 1e-4
        assert E == pytest.approx(-0.5 * 1e4 * 0.3, abs=1.0)

    def test_descent_below_every_start(self, rng):
        cell = UnitCell(
            (
                Particle(Ellipse(0.15, 0.1), (0.25, 0.25), 0.3, 0.2),
                Particle(Ellipse(0.12, 0.12), (0.72, 0.7), 0.0, 1.0),
            )
        )
        g = rasterize(cell, 64)
        D = demag_tensor(g)
        p = MagneticParams(h_ext=(0.6, 0.3))
        model = AngleModel([1, 2], D, p, cell, g)
        _, E = minimize_magnetization([1, 2], D, p, cell, g)
        assert E <= model.energy(starting_angles(2)).min() + 1e-15

    def test_two_particles_against_grid(self):
        cell = UnitCell(
            (
                Particle(Ellipse(0.15, 0.1), (0.25, 0.25), 0.3, 0.2),
                Particle(Ellipse(0.12, 0.12), (0.72, 0.7), 0.0, 1.0),
            )
        )
        g = rasterize(cell, 64)
        D = demag_tensor(g)
        p = MagneticParams(h_ext=(0.2, -0.1))
        model = AngleModel([2, 1], D, p, cell, g)
        t = np.linspace(0, 2 * math.pi, 721)[:-1]
        T1, T2 = np.meshgrid(t, t, indexing="ij")
        grid_min = model.energy(np.stack([T1.ravel(), T2.ravel()], axis=1)).min()
        _, E = minimize_magnetization([2, 1], D, p, cell, g)
        assert E <= grid_min + 1e-12
        assert E == pytest.approx(grid_min, abs=1e-5)

    def test_zero_field_sign_symmetry(self):
        cell = make_particle_cell(0.3, 1.5)
        g = rasterize(cell, 64)
        D = demag_tensor(g)
        p = MagneticParams(h_ext=(0.0, 0.0))
        theta, E = minimize_magnetization([1], D, p, cell, g)
        assert magnetic_energy(theta + math.pi, [1], D, p, cell, g) == pytest.approx(E, abs=1e-15)

    def test_many_particles_random_starts(self):
        parts = tuple(
            Particle(Ellipse(0.06, 0.06), ((i + 0.5) / 2, (j + 0.5) / 2), 0.0, 0.1 * (i + 2 * j))
            for i in range(2)
            for j in range(2)
        )
        cell = UnitCell(parts)
        g = rasterize(cell, 64)
        D = demag_tensor(g)
        p = MagneticParams()
        phases = [1, 2, 1, 2]
        theta, E = minimize_magnetization(phases, D, p, cell, g)
        assert starting_angles(4).shape == (16, 4)
        assert np.array_equal(starting_angles(4), starting_angles(4))
        model = AngleModel(phases, D, p, cell, g)
        assert np.linalg.norm(model.gradient(theta[None])) < 1e-9

    def test_energy_bounds(self, rng):
        for _ in range(5):
            phase, D, p, cell, g = random_config(rng)
            _, E = minimize_magnetization([phase], D, p, cell, g)
            a = g.areas[0]
            h = math.hypot(*p.h_ext)
            lam = np.linalg.eigvalsh(D.D).max()
            assert -p.ms_over_mu0 * h * a <= E
            assert E <= p.k_u * a + 0.5 * p.ms2_over_mu0 * lam + p.ms_over_mu0 * h * a


class TestDerivatives:
    @settings(max_examples=100, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_gradient_central_differences(self, seed):
        rng = np.random.default_rng(seed)
        cell = UnitCell(
            (
                Particle(Ellipse(0.15, 0.1), (0.25, 0.25), 0.3, rng.uniform(0, 6)),
                Particle(Ellipse(0.12, 0.12), (0.72, 0.7), 0.0, rng.uniform(0, 6)),
            )
        )
        g = fake_raster([0.047, 0.045])
        A = rng.normal(size=(4, 4))
        D = DemagTensor(0.05 * (A @ A.T))
        p = MagneticParams(h_ext=tuple(rng.uniform(-1, 1, 2)))
        model = AngleModel(list(rng.integers(1, 3, 2)), D, p, cell, g)
        theta = rng.uniform(0, 2 * math.pi, 2)
        grad = model.gradient(theta[None])[0]
        h = 1e-6
        fd = np.array(
            [(model.energy(theta + h * e)[0] - model.energy(theta - h * e)[0]) / (2 * h) for e in np.eye(2)]
        )
        assert np.allclose(grad, fd, rtol=1e-5, atol=1e-5 * np.abs(grad).max())

    def test_hessian_central_differences(self, rng):
        cell = UnitCell((Particle(Ellipse(0.15, 0.1), (0.25, 0.25)), Particle(Ellipse(0.1, 0.1), (0.7, 0.7))))
        g = fake_raster([0.047, 0.031])
        A = rng.normal(size=(4, 4))
        model = AngleModel([1, 2], DemagTensor(0.05 * (A @ A.T)), MagneticParams(h_ext=(0.3, 0.8)), cell, g)
        theta = rng.uniform(0, 2 * math.pi, 2)
        H = model.hessian(theta[None])[0]
        h = 1e-6
        fd = np.array(
            [(model.gradient((theta + h * e)[None])[0] - model.gradient((theta - h * e)[None])[0]) / (2 * h) for e in np.eye(2)]
        )
        assert np.allclose(H, fd.T, rtol=1e-5, atol=1e-8)

    def test_model_matches_public_energy(self, rng):
        cell = UnitCell((Particle(Ellipse(0.15, 0.1), (0.25, 0.25), 0.0, 0.5), Particle(Ellipse(0.1, 0.1), (0.7, 0.7))))
        g = rasterize(cell, 64)
        D = demag_tensor(g)
        p = MagneticParams(h_ext=(0.3, 0.8))
        model = AngleModel([2, 1], D, p, cell, g)
        theta = rng.uniform(0, 2 * math.pi, 2)
        assert model.energy(theta[None])[0] == pytest.approx(magnetic_energy(theta, [2, 1], D, p, cell, g), abs=1e-15)
