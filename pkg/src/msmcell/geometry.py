"""Periodic unit-cell microstructures and their pixel rasterization.

All lengths are fractions of the cell edge; the cell is the unit torus
[0, 1)^2.  Arrays indexed ``[ix, iy]`` use the first axis for x.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import GeometryError, OverlapError, ResolutionError

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class Ellipse:
    semi_a: float
    semi_b: float
    kind = "ellipse"

    def __post_init__(self):
        _check_extent("semi_a", self.semi_a)
        _check_extent("semi_b", self.semi_b)

    @property
    def area(self) -> float:
        return math.pi * self.semi_a * self.semi_b

    @property
    def perimeter(self) -> float:
        # Ramanujan's second approximation; only used for error bounds.
        a, b = self.semi_a, self.semi_b
        h = ((a - b) / (a + b)) ** 2
        return math.pi * (a + b) * (1 + 3 * h / (10 + math.sqrt(4 - 3 * h)))

    def contains(self, x, y):
        return (x / self.semi_a) ** 2 + (y / self.semi_b) ** 2 <= 1.0


@dataclass(frozen=True)
class Rectangle:
    half_w: float
    half_h: float
    kind = "rectangle"

    def __post_init__(self):
        _check_extent("half_w", self.half_w)
        _check_extent("half_h", self.half_h)

    @property
    def area(self) -> float:
        return 4.0 * self.half_w * self.half_h

    @property
    def perimeter(self) -> float:
        return 4.0 * (self.half_w + self.half_h)

    def contains(self, x, y):
        return (np.abs(x) <= self.half_w) & (np.abs(y) <= self.half_h)


@dataclass(frozen=True)
class Polygon:
    """Simple counterclockwise polygon, vertices relative to the particle center."""

    vertices: tuple
    kind = "polygon"

    def __post_init__(self):
        verts = tuple((float(x), float(y)) for x, y in self.vertices)
        object.__setattr__(self, "vertices", verts)
        if len(verts) < 3:
            raise GeometryError("polygon needs at least 3 vertices")
        for x, y in verts:
            if abs(x) >= 0.5 or abs(y) >= 0.5:
                raise GeometryError(f"polygon vertex {(x, y)} reaches the cell edge")
        if _signed_area(verts) <= 0:
            raise GeometryError("polygon vertices must be counterclockwise")
        if not _is_simple(verts):
            raise GeometryError("polygon is self-intersecting")

    @property
    def area(self) -> float:
        return _signed_area(self.vertices)

    @property
    def perimeter(self) -> float:
        v = np.asarray(self.vertices)
        return float(np.linalg.norm(np.roll(v, -1, axis=0) - v, axis=1).sum())

    def contains(self, x, y):
        # even-odd ray casting, vectorized over the query points
        inside = np.zeros(np.shape(x), dtype=bool)
        v = self.vertices
        for k in range(len(v)):
            x0, y0 = v[k]
            x1, y1 = v[(k + 1) % len(v)]
            crosses = (y0 > y) != (y1 > y)
            with np.errstate(divide="ignore", invalid="ignore"):
                xc = x0 + (y - y0) * (x1 - x0) / (y1 - y0)
            inside ^= crosses & (x < xc)
        return inside


def _check_extent(name, value):
    if not (0.0 < value < 0.5):
        raise GeometryError(f"{name}={value!r} must lie in (0, 0.5)")


def _signed_area(verts):
    v = np.asarray(verts)
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def _segments_intersect(p1, p2, q1, q2):
    def orient(a, b, c):
        return np.sign((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))

    return (orient(p1, p2, q1) != orient(p1, p2, q2)) and (
        orient(q1, q2, p1) != orient(q1, q2, p2)
    )


def _is_simple(verts):
    m = len(verts)
    for i in range(m):
        for j in range(i + 1, m):
            if j == i + 1 or (i == 0 and j == m - 1):
                continue
            if _segments_intersect(verts[i], verts[(i + 1) % m], verts[j], verts[(j + 1) % m]):
                return False
    return True


@dataclass(frozen=True)
class Particle:
    """One MSM particle: shape, center in the torus, and two orientations.

    ``shape_angle`` rotates the geometry; ``lattice_angle`` rotates the
    crystal lattice (easy axes, eigenstrains, cubic stiffness).
    """

    shape: Ellipse | Rectangle | Polygon
    center: tuple = (0.5, 0.5)
    shape_angle: float = 0.0
    lattice_angle: float = 0.0

    def __post_init__(self):
        cx, cy = (float(c) % 1.0 for c in self.center)
        object.__setattr__(self, "center", (cx, cy))
        object.__setattr__(self, "shape_angle", float(self.shape_angle) % TWO_PI)
        object.__setattr__(self, "lattice_angle", float(self.lattice_angle) % TWO_PI)

    def contains(self, x, y):
        """Containment test for points given relative to the center (lab frame)."""
        c, s = math.cos(self.shape_angle), math.sin(self.shape_angle)
        return self.shape.contains(c * x + s * y, -s * x + c * y)


@dataclass(frozen=True)
class UnitCell:
    particles: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "particles", tuple(self.particles))

    @property
    def n_p(self) -> int:
        return len(self.particles)


@dataclass(frozen=True, eq=False)
class RasterGrid:
    """Pixel labels: 0 is polymer, i >= 1 is particle i (1-based)."""

    n: int
    owner: np.ndarray = field(repr=False)
    areas: tuple

    @property
    def polymer_area(self) -> float:
        return float(np.count_nonzero(self.owner == 0)) / self.n**2

    @property
    def total_particle_area(self) -> float:
        return float(np.count_nonzero(self.owner)) / self.n**2

    def mask(self, i: int) -> np.ndarray:
        """Boolean pixel mask of particle ``i`` (0-based particle index)."""
        return self.owner == i + 1


def pixel_centers(n):
    c = (np.arange(n) + 0.5) / n
    return np.meshgrid(c, c, indexing="ij")


def check_resolution(n):
    if not isinstance(n, (int, np.integer)) or n < 16 or n & (n - 1):
        raise ResolutionError(f"resolution must be a power of two >= 16, got {n!r}")


def rasterize(cell: UnitCell, n: int) -> RasterGrid:
    """Label every pixel by the particle containing its center.

    Raises OverlapError if particles share a pixel or touch (including
    diagonally, across the periodic boundary), and ResolutionError if a
    particle covers no pixel center.
    """
    check_resolution(n)
    X, Y = pixel_centers(n)
    owner = np.zeros((n, n), dtype=np.int32)
    for idx, particle in enumerate(cell.particles, start=1):
        cx, cy = particle.center
        dx = (X - cx + 0.5) % 1.0 - 0.5
        dy = (Y - cy + 0.5) % 1.0 - 0.5
        hits = np.zeros((n, n), dtype=np.int32)
        for ox in (-1.0, 0.0, 1.0):
            for oy in (-1.0, 0.0, 1.0):
                hits += particle.contains(dx + ox, dy + oy)
        if hits.max() > 1:
            raise OverlapError(f"particle {idx} overlaps its own periodic image")
        mask = hits > 0
        if not mask.any():
            raise ResolutionError(f"particle {idx} covers no pixel at n={n}")
        if np.any(owner[mask]):
            other = int(owner[mask].max())
            raise OverlapError(f"particles {other} and {idx} claim the same pixel")
        owner[mask] = idx

    for idx in range(1, cell.n_p + 1):
        mask = owner == idx
        grown = mask.copy()
        for sx in (-1, 0, 1):
            for sy in (-1, 0, 1):
                grown |= np.roll(mask, (sx, sy), axis=(0, 1))
        touching = np.unique(owner[grown])
        touching = touching[(touching != 0) & (touching != idx)]
        if touching.size:
            raise OverlapError(
                f"particles {idx} and {int(touching[0])} are closer than two pixels at n={n}"
            )

    counts = np.bincount(owner.ravel(), minlength=cell.n_p + 1)
    areas = tuple(float(c) / n**2 for c in counts[1:])
    return RasterGrid(n=n, owner=owner, areas=areas)


def make_particle_cell(
    volume_fraction: float,
    aspect_ratio: float,
    shape_angle: float = 0.0,
    shape_kind: str = "ellipse",
    lattice_angle: float = 0.0,
) -> UnitCell:
    """Single centered particle of given area and elongation.

    ``aspect_ratio`` is the ratio of the extent along the shape axis to the
    extent perpendicular to it (a/b for an ellipse).
    """
    if not 0.0 < volume_fraction <= 0.5:
        raise GeometryError(f"volume_fraction={volume_fraction!r} must lie in (0, 0.5]")
    if aspect_ratio <= 0:
        raise GeometryError(f"aspect_ratio={aspect_ratio!r} must be positive")
    if shape_kind == "ellipse":
        a = math.sqrt(volume_fraction * aspect_ratio / math.pi)
        dims = (a, a / aspect_ratio)
        make = Ellipse
    elif shape_kind == "rectangle":
        h = math.sqrt(volume_fraction / (4.0 * aspect_ratio))
        dims = (aspect_ratio * h, h)
        make = Rectangle
    elif shape_kind == "polygon":
        # rhombus with half-diagonals (dx, dy), area 2*dx*dy
        dy = math.sqrt(volume_fraction / (2.0 * aspect_ratio))
        dims = (aspect_ratio * dy, dy)
        make = lambda dx, dy: Polygon(((dx, 0.0), (0.0, dy), (-dx, 0.0), (0.0, -dy)))  # noqa: E731
    else:
        raise GeometryError(f"unknown shape kind {shape_kind!r}")
    if max(dims) >= 0.5:
        raise GeometryError(
            f"{shape_kind} with fraction {volume_fraction} and aspect {aspect_ratio} "
            f"has extent {max(dims):.4f} >= 0.5"
        )
    particle = Particle(make(*dims), (0.5, 0.5), shape_angle, lattice_angle)
    return UnitCell((particle,))


def rotate_cell_90(cell: UnitCell) -> UnitCell:
    """Rotate the whole microstructure by +90 degrees about the cell center."""
    out = []
    for p in cell.particles:
        x, y = p.center[0] - 0.5, p.center[1] - 0.5
        out.append(
            Particle(
                p.shape,
                (0.5 - y, 0.5 + x),
                p.shape_angle + math.pi / 2,
                p.lattice_angle + math.pi / 2,
            )
        )
    return UnitCell(tuple(out))
