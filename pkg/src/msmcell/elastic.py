"""Linear elasticity of the periodic cell with affinely deforming particles.

The displacement is  V(x) = beta x + w(x)  with a periodic fluctuation w
living on the n x n corner nodes of the pixel grid.  Polymer pixels are
bilinear quadrilaterals (2 x 2 Gauss rule).  Nodes touching a particle
pixel are slaved to that particle's affine map

    w(X) = G_i (X - c_i) + t_i,

and the particle stores  a_i * W(sym(beta + G_i) - eps*_i)  with its own
cubic stiffness.  Strains use Voigt order (xx, yy, xy) with engineering
shear; stiffness and stress are in MPa.
"""

from __future__ import annotations

import copy
import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .errors import ConvergenceError, DefinitenessError, OverlapError
from .geometry import RasterGrid, UnitCell
from .materials import MaterialSet

_VOIGT = {(0, 0): 0, (1, 1): 1, (0, 1): 2, (1, 0): 2}


def _rotation(angle):
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s], [s, c]])


def voigt_to_tensor(C):
    T = np.empty((2, 2, 2, 2))
    for (i, j), I in _VOIGT.items():
        for (k, l), J in _VOIGT.items():
            T[i, j, k, l] = C[I, J]
    return T


def tensor_to_voigt(T):
    C = np.empty((3, 3))
    for (i, j), I in _VOIGT.items():
        for (k, l), J in _VOIGT.items():
            C[I, J] = T[i, j, k, l]
    return C


def rotate_stiffness(C, angle):
    """Rotate a Voigt stiffness as a fourth-order tensor."""
    R = _rotation(angle)
    T = voigt_to_tensor(C)
    return tensor_to_voigt(np.einsum("ai,bj,ck,dl,ijkl->abcd", R, R, R, R, T))


def strain_to_voigt(eps):
    eps = np.asarray(eps)
    return np.array([eps[0, 0], eps[1, 1], eps[0, 1] + eps[1, 0]])


def voigt_to_strain(v):
    return np.array([[v[0], 0.5 * v[2]], [0.5 * v[2], v[1]]])


def _check_definite(C, what):
    if np.min(np.linalg.eigvalsh(C)) <= 0:
        raise DefinitenessError(f"{what} stiffness is not positive definite")
    return C


def cubic_stiffness(c11, c12, c44, lattice_angle=0.0):
    C = np.array([[c11, c12, 0.0], [c12, c11, 0.0], [0.0, 0.0, c44]], dtype=float)
    _check_definite(C, "cubic")
    return rotate_stiffness(C, lattice_angle) if lattice_angle else C


def isotropic_stiffness(E, nu):
    """Plane-strain isotropic stiffness from Young's modulus and Poisson ratio."""
    if not (E > 0 and 0 < nu < 0.5):
        raise DefinitenessError(f"isotropic stiffness needs E > 0 and 0 < nu < 0.5 (E={E}, nu={nu})")
    lam = E * nu / ((1 + nu) * (1 - 2 * nu))
    mu = E / (2 * (1 + nu))
    return np.array([[lam + 2 * mu, lam, 0.0], [lam, lam + 2 * mu, 0.0], [0.0, 0.0, mu]])


def eigenstrains(epsilon0, reference_phase, sign=1):
    """Crystal-frame eigenstrains of both variants relative to the reference one.

    Variant p elongates (sign=+1) along its own easy axis e_p.
    """
    if reference_phase not in (1, 2):
        raise ValueError(f"reference_phase must be 1 or 2, got {reference_phase!r}")
    raw = {
        1: sign * np.diag([epsilon0, -epsilon0]),
        2: sign * np.diag([-epsilon0, epsilon0]),
    }
    return {p: raw[p] - raw[reference_phase] for p in (1, 2)}


def pcg(A, b, rtol=1e-8, maxiter=None, callback=None, floor=0.0):
    """Jacobi-preconditioned conjugate gradients from a zero initial guess.

    Converged when r^T M^-1 r <= rtol^2 * max(b^T M^-1 b, floor).  The
    optional ``floor`` (an energy scale) stops the iteration from chasing
    round-off when b is a near-cancelling sum.
    Returns (x, iterations, relative_residual).
    """
    d = A.diagonal().copy()
    d[d == 0] = 1.0
    inv = 1.0 / d
    x = np.zeros_like(b)
    r = b.copy()
    z = inv * r
    rz = float(r @ z)
    ref = max(rz, float(floor))
    if ref == 0.0:
        return x, 0, 0.0
    target = rtol**2 * ref
    if rz <= target:
        return x, 0, math.sqrt(rz / ref)
    p = z.copy()
    maxiter = maxiter or 10 * len(b)
    for it in range(1, maxiter + 1):
        Ap = A @ p
        alpha = rz / float(p @ Ap)
        x += alpha * p
        r -= alpha * Ap
        z = inv * r
        rz_new = float(r @ z)
        if callback is not None:
            callback(it, x)
        if rz_new <= target:
            return x, it, math.sqrt(rz_new / target) * rtol
        p = z + (rz_new / rz) * p
        rz = rz_new
    raise ConvergenceError(
        f"PCG did not converge in {maxiter} iterations",
        residual=math.sqrt(rz_new / target) * rtol,
        iterations=maxiter,
    )


def _q4_gradients(h):
    """Shape-function gradients at the 4 Gauss points; shape (4 gp, 4 nodes, 2)."""
    corners = np.array([[-1, -1], [1, -1], [1, 1], [-1, 1]], dtype=float)
    g = 1.0 / math.sqrt(3.0)
    gauss = np.array([[-g, -g], [g, -g], [g, g], [-g, g]])
    out = np.empty((4, 4, 2))
    for q, (xi, eta) in enumerate(gauss):
        for a, (xa, ea) in enumerate(corners):
            out[q, a, 0] = 0.25 * xa * (1 + ea * eta) * 2.0 / h
            out[q, a, 1] = 0.25 * ea * (1 + xa * xi) * 2.0 / h
    return out


def _unwrap_nodes(nodes, n, center):
    """Unwrapped positions of a particle's slaved nodes relative to its center.

    Breadth-first walk over 4-connected slaved nodes; returns positions and
    the lattice vectors along which the node set wraps around the torus.
    """
    node_set = set(nodes)
    pos = {}
    windings = set()
    h = 1.0 / n
    cx, cy = center

    def minimal_image(node):
        I, J = divmod(node, n)
        return (((I * h - cx + 0.5) % 1.0) - 0.5, ((J * h - cy + 0.5) % 1.0) - 0.5)

    remaining = sorted(node_set, key=lambda nd: np.hypot(*minimal_image(nd)))
    for root in remaining:
        if root in pos:
            continue
        pos[root] = minimal_image(root)
        queue = deque([root])
        while queue:
            cur = queue.popleft()
            I, J = divmod(cur, n)
            X, Y = pos[cur]
            for dI, dJ in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                nb = ((I + dI) % n) * n + (J + dJ) % n
                if nb not in node_set:
                    continue
                cand = (X + dI * h, Y + dJ * h)
                if nb in pos:
                    L = (round(cand[0] - pos[nb][0]), round(cand[1] - pos[nb][1]))
                    if L != (0, 0):
                        windings.add(L if L > (0, 0) else (-L[0], -L[1]))
                else:
                    pos[nb] = cand
                    queue.append(nb)
    return pos, sorted(windings)


# vec(G) row-major = [G00, G01, G10, G11]; beta voigt (b_xx, b_yy, 2 b_xy)
_BETA_TO_VEC = np.array([[1.0, 0.0, 0.0], [0.0, 0.0, 0.5], [0.0, 0.0, 0.5], [0.0, 1.0, 0.0]])
_VEC_TO_SYMVOIGT = np.array([[1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, 1.0], [0.0, 1.0, 1.0, 0.0]])


@dataclass(eq=False)
class _ParticleDofs:
    index: int
    area: float
    stiffness: np.ndarray
    lattice_angle: float
    basis: np.ndarray  # columns span the admissible vec(G) - beta-offset space
    follows_beta: bool  # True: G = N q - beta (q is the full particle gradient)
    q_slice: slice
    t_slice: slice
    strain_op: sp.csr_matrix = field(repr=False, default=None)


@dataclass(eq=False)
class ElasticSolution:
    energy: float
    energy_particles: float
    energy_polymer: float
    beta: np.ndarray
    clamped: bool
    dofs: np.ndarray = field(repr=False)
    displacement: np.ndarray = field(repr=False)
    gradients: np.ndarray = field(repr=False)
    translations: np.ndarray = field(repr=False)
    particle_strains: np.ndarray = field(repr=False)
    iterations: int = 0
    residual: float = 0.0


class ElasticSystem:
    """Assembled FEM operators for one raster; reusable across polymer moduli.

    The polymer part scales linearly with Young's modulus (fixed nu), so it
    is assembled once for E = 1 and rescaled by :meth:`with_modulus`.
    """

    def __init__(
        self,
        cell: UnitCell,
        raster: RasterGrid,
        materials: MaterialSet = MaterialSet(),
        reference_phase: int = 2,
        eigenstrain_sign: int = 1,
    ):
        self.cell = cell
        self.raster = raster
        self.n = n = raster.n
        self.materials = materials
        self.E = materials.polymer_E
        self.reference_phase = reference_phase
        self.table = eigenstrains(materials.eps0, reference_phase, eigenstrain_sign)
        isotropic_stiffness(materials.polymer_E, materials.polymer_nu)
        self.C_poly_unit = isotropic_stiffness(1.0, materials.polymer_nu)
        self._assemble()
        self._K = None

    def with_modulus(self, E: float) -> "ElasticSystem":
        isotropic_stiffness(E, self.materials.polymer_nu)
        other = copy.copy(self)
        other.E = float(E)
        other.materials = self.materials.with_modulus(E)
        other._K = None
        return other

    @property
    def ndof(self) -> int:
        return self._ndof

    @property
    def beta_slice(self) -> slice:
        return slice(self._ndof - 3, self._ndof)

    @property
    def K(self) -> sp.csr_matrix:
        if self._K is None:
            self._K = (self.E * self.K_poly_unit + self.K_particles).tocsr()
        return self._K

    # -- assembly ---------------------------------------------------------

    def _assemble(self):
        n, raster = self.n, self.raster
        h = 1.0 / n
        n_nodes = n * n
        node_owner = np.zeros((n, n), dtype=np.int32)
        for i in range(len(raster.areas)):
            m = raster.mask(i)
            touch = m | np.roll(m, 1, 0) | np.roll(m, 1, 1) | np.roll(m, (1, 1), (0, 1))
            if np.any(node_owner[touch] != 0):
                raise OverlapError(f"particle {i + 1} shares a node with another particle")
            node_owner[touch] = i + 1
        self.node_owner = node_owner
        flat_owner = node_owner.ravel()

        free_nodes = np.flatnonzero(flat_owner == 0)
        offset = 2 * len(free_nodes)
        rows, cols, vals = [], [], []
        rows.append(np.concatenate([2 * free_nodes, 2 * free_nodes + 1]))
        cols.append(np.arange(offset).reshape(-1, 2).T.ravel())
        vals.append(np.ones(offset))

        self.particles = []
        beta_cols_placeholder = []  # filled after all particle dofs are numbered
        for i, particle in enumerate(self.cell.particles):
            nodes = np.flatnonzero(flat_owner == i + 1).tolist()
            pos, windings = _unwrap_nodes(nodes, n, particle.center)
            if windings:
                cons = []
                for Lx, Ly in windings:
                    cons += [[Lx, Ly, 0, 0], [0, 0, Lx, Ly]]
                basis = scipy.linalg.null_space(np.array(cons, dtype=float))
            else:
                basis = np.eye(4)
            k = basis.shape[1]
            pd = _ParticleDofs(
                index=i,
                area=raster.areas[i],
                stiffness=cubic_stiffness(
                    self.materials.c11, self.materials.c12, self.materials.c44, particle.lattice_angle
                ),
                lattice_angle=particle.lattice_angle,
                basis=basis,
                follows_beta=not windings,
                q_slice=slice(offset, offset + k),
                t_slice=slice(offset + k, offset + k + 2),
            )
            offset += k + 2
            self.particles.append(pd)
            nd = np.array(list(pos.keys()), dtype=np.int64)
            X = np.array(list(pos.values()))
            # w_c = sum_d G[c, d] X_d + t_c, with vec(G) = N q - P beta
            for c in range(2):
                coef = X[:, 0:1] * basis[2 * c] + X[:, 1:2] * basis[2 * c + 1]
                rr = np.repeat(2 * nd + c, k)
                cc = np.tile(np.arange(pd.q_slice.start, pd.q_slice.stop), len(nd))
                rows.append(rr)
                cols.append(cc)
                vals.append(coef.ravel())
                rows.append(2 * nd + c)
                cols.append(np.full(len(nd), pd.t_slice.start + c))
                vals.append(np.ones(len(nd)))
                if pd.follows_beta:
                    bcoef = -(X[:, 0:1] * _BETA_TO_VEC[2 * c] + X[:, 1:2] * _BETA_TO_VEC[2 * c + 1])
                    beta_cols_placeholder.append((np.repeat(2 * nd + c, 3), bcoef.ravel()))
        self._ndof = offset + 3
        beta0 = offset
        for rr, vv in beta_cols_placeholder:
            rows.append(rr)
            cols.append(np.tile(beta0 + np.arange(3), len(rr) // 3))
            vals.append(vv)
        rows.append(2 * n_nodes + np.arange(3))
        cols.append(beta0 + np.arange(3))
        vals.append(np.ones(3))
        self.T = sp.csr_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(2 * n_nodes + 3, self._ndof),
        )

        # polymer strain at Gauss points: eps = B w_e + beta
        pix = np.argwhere(raster.owner == 0)
        self.polymer_pixels = pix
        npix = len(pix)
        dN = _q4_gradients(h)
        corner_off = np.array([[0, 0], [1, 0], [1, 1], [0, 1]])
        corner_nodes = ((pix[:, None, 0] + corner_off[None, :, 0]) % n) * n + (
            (pix[:, None, 1] + corner_off[None, :, 1]) % n
        )  # (npix, 4)
        srows, scols, svals = [], [], []
        base = (np.arange(npix)[:, None] * 4 + np.arange(4)[None, :]) * 3  # (npix, 4 gp)
        for q in range(4):
            for a in range(4):
                r0 = base[:, q]
                ux = 2 * corner_nodes[:, a]
                uy = ux + 1
                dx, dy = dN[q, a]
                srows += [r0, r0 + 1, r0 + 2, r0 + 2]
                scols += [ux, uy, ux, uy]
                svals += [np.full(npix, dx), np.full(npix, dy), np.full(npix, dy), np.full(npix, dx)]
        for comp in range(3):
            r = base.ravel() + comp
            srows.append(r)
            scols.append(np.full(r.shape, 2 * n_nodes + comp))
            svals.append(np.ones(r.shape))
        S = sp.csr_matrix(
            (np.concatenate(svals), (np.concatenate(srows), np.concatenate(scols))),
            shape=(12 * npix, 2 * n_nodes + 3),
        )
        self.strain_op = (S @ self.T).tocsr()  # polymer Gauss-point strains from dofs
        self._gp_weight = h * h / 4.0
        W = sp.kron(sp.identity(4 * npix, format="csr"), self.C_poly_unit * self._gp_weight, format="csr")
        self.K_poly_unit = (self.strain_op.T @ (W @ self.strain_op)).tocsr()

        Kp = sp.csr_matrix((self._ndof, self._ndof))
        for pd in self.particles:
            A = np.zeros((3, self._ndof))
            A[:, pd.q_slice] = _VEC_TO_SYMVOIGT @ pd.basis
            if not pd.follows_beta:
                A[:, self.beta_slice] = np.eye(3)
            pd.strain_op = sp.csr_matrix(A)
            Kp = Kp + pd.area * (pd.strain_op.T @ sp.csr_matrix(pd.stiffness) @ pd.strain_op)
        self.K_particles = Kp.tocsr()

    # -- phase-dependent data -------------------------------------------

    def eigenstrain(self, i, phase):
        """Lab-frame eigenstrain (2 x 2) of particle i in the given phase."""
        R = _rotation(self.particles[i].lattice_angle)
        return R @ self.table[phase] @ R.T

    def load(self, phases):
        """Linear term f and constant c of  E(y) = 1/2 y^T K y - f^T y + c."""
        f = np.zeros(self._ndof)
        c = 0.0
        for pd, phase in zip(self.particles, phases):
            e = strain_to_voigt(self.eigenstrain(pd.index, phase))
            Ce = pd.stiffness @ e
            f += pd.area * (pd.strain_op.T @ Ce)
            c += 0.5 * pd.area * float(e @ Ce)
        return f, c

    def beta_of(self, y):
        return voigt_to_strain(y[self.beta_slice])

    def particle_gradient(self, pd, y):
        g = pd.basis @ y[pd.q_slice]
        if pd.follows_beta:
            g = g - _BETA_TO_VEC @ y[self.beta_slice]
        return g.reshape(2, 2)

    def energy_parts(self, y, phases):
        """(particle energy, polymer energy, polymer per-pixel energy density)."""
        e_part = 0.0
        for pd, phase in zip(self.particles, phases):
            eps = pd.strain_op @ y - strain_to_voigt(self.eigenstrain(pd.index, phase))
            e_part += 0.5 * pd.area * float(eps @ pd.stiffness @ eps)
        gp = (self.strain_op @ y).reshape(-1, 4, 3)
        C = self.E * self.C_poly_unit
        dens = 0.5 * np.einsum("pgi,ij,pgj->p", gp, C, gp) / 4.0
        return e_part, float(dens.sum()) / self.n**2, dens

    def polymer_energy_density(self, y):
        """Per-pixel polymer energy density (MPa) on the n x n grid; zero in particles."""
        _, _, dens = self.energy_parts(y, [self.reference_phase] * len(self.particles))
        out = np.zeros((self.n, self.n))
        out[self.polymer_pixels[:, 0], self.polymer_pixels[:, 1]] = dens
        return out


def minimize_elastic(
    system: ElasticSystem,
    phases,
    clamp=None,
    rtol: float = 1e-8,
    maxiter: int | None = None,
    callback=None,
) -> ElasticSolution:
    """Minimize the cell elastic energy for fixed per-particle phases.

    ``clamp=None`` leaves the macroscopic strain free; otherwise it is a
    symmetric 2 x 2 array held fixed.
    """
    phases = list(phases)
    if len(phases) != len(system.particles):
        raise ValueError("one phase per particle required")
    K = system.K
    f, _ = system.load(phases)
    maxiter = maxiter or 50 * system.n**2
    y = np.zeros(system.ndof)
    if clamp is None:
        sol, its, res = pcg(K, f, rtol=rtol, maxiter=maxiter, callback=callback)
        y[:] = sol
    else:
        b0 = strain_to_voigt(np.asarray(clamp, dtype=float))
        u = slice(0, system.ndof - 3)
        Kuu = K[u, u]
        rhs = f[u] - K[u, system.beta_slice] @ b0
        floor = float(b0 @ (K[system.beta_slice, system.beta_slice] @ b0))
        if callback is not None:
            inner = callback

            def callback(it, x):
                inner(it, np.concatenate([x, b0]))

        sol, its, res = pcg(Kuu, rhs, rtol=rtol, maxiter=maxiter, callback=callback, floor=floor)
        y[u] = sol
        y[system.beta_slice] = b0

    w = (system.T @ y)[: 2 * system.n**2].reshape(system.n, system.n, 2)
    shift = w.reshape(-1, 2).mean(axis=0)
    w -= shift
    free = system.node_owner.ravel() == 0
    y_free = y[: 2 * int(free.sum())].reshape(-1, 2)
    y_free -= shift
    for pd in system.particles:
        y[pd.t_slice] -= shift

    e_part, e_poly, _ = system.energy_parts(y, phases)
    beta = system.beta_of(y)
    grads = np.array([system.particle_gradient(pd, y) for pd in system.particles]).reshape(-1, 2, 2)
    strains = np.array([0.5 * (beta + G + (beta + G).T) for G in grads]).reshape(-1, 2, 2)
    trans = np.array([y[pd.t_slice] for pd in system.particles]).reshape(-1, 2)
    return ElasticSolution(
        energy=e_part + e_poly,
        energy_particles=e_part,
        energy_polymer=e_poly,
        beta=beta,
        clamped=clamp is not None,
        dofs=y,
        displacement=w,
        gradients=grads,
        translations=trans,
        particle_strains=strains,
        iterations=its,
        residual=res,
    )


def quadratic_energy(system: ElasticSystem, y, phases) -> float:
    """1/2 y^T K y - f^T y + c, the assembled form of the elastic energy."""
    f, c = system.load(phases)
    return 0.5 * float(y @ (system.K @ y)) - float(f @ y) + c


def macro_stress(sol: ElasticSolution, system: ElasticSystem, phases) -> np.ndarray:
    """Derivative of the minimized energy with respect to beta (MPa)."""
    f, _ = system.load(phases)
    g = system.K[system.beta_slice, :] @ sol.dofs - f[system.beta_slice]
    return np.array([[g[0], g[2]], [g[2], g[1]]])


def dump_fields(prefix, sol: ElasticSolution, system: ElasticSystem) -> None:
    """Plain-text matrices of the displacement components and polymer energy density."""
    np.savetxt(f"{prefix}.ux.txt", sol.displacement[..., 0])
    np.savetxt(f"{prefix}.uy.txt", sol.displacement[..., 1])
    np.savetxt(f"{prefix}.energy_density.txt", system.polymer_energy_density(sol.dofs))
