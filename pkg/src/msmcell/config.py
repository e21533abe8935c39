"""Strict JSON configuration for the command-line front end.

Omitted keys take the NiMnGa/polymer defaults of :class:`MaterialSet`;
unknown keys are errors so that a typo cannot silently fall back to a
default.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace

from .cellsolver import CellProblemSpec
from .errors import GeometryError
from .geometry import Ellipse, Particle, Polygon, Rectangle, UnitCell, check_resolution
from .materials import MaterialSet
from .sweep import PARAMETERS, Generator, SweepSpec, log_space


class ConfigError(ValueError):
    def __init__(self, message, key_path="", line=None):
        where = key_path or "<root>"
        if line is not None:
            where += f" (line {line})"
        super().__init__(f"{where}: {message}")
        self.key_path = key_path
        self.line = line


@dataclass(frozen=True)
class OutputConfig:
    csv_path: str | None = None
    svg_dir: str | None = None
    debug_dumps: bool = False


@dataclass(frozen=True)
class Config:
    spec: CellProblemSpec
    generator: Generator | None
    sweep: SweepSpec | None
    sweep_error: str | None
    output: OutputConfig


_MSM_KEYS = {
    "C11": "c11",
    "C12": "c12",
    "C44": "c44",
    "eps0": "eps0",
    "Ku": "k_u",
    "Ms_over_mu0": "ms_over_mu0",
    "Ms2_over_mu0": "ms2_over_mu0",
}


class _Reader:
    def __init__(self, text):
        self.text = text

    def line_of(self, path):
        """Best-effort line number of the last key in a dotted path."""
        pos = 0
        found = None
        for part in path.split("."):
            if part.startswith("["):
                continue
            i = self.text.find(f'"{part}"', pos)
            if i < 0:
                break
            pos, found = i, i
        return None if found is None else self.text.count("\n", 0, found) + 1

    def error(self, path, message):
        return ConfigError(message, path, self.line_of(path))

    def section(self, obj, path, allowed):
        if not isinstance(obj, dict):
            raise self.error(path, "expected an object")
        for key in obj:
            if key not in allowed:
                sub = f"{path}.{key}" if path else key
                raise self.error(sub, f"unknown key (allowed: {', '.join(sorted(allowed))})")
        return obj

    def number(self, obj, key, path, default=None, check=None, what=""):
        sub = f"{path}.{key}" if path else key
        if key not in obj:
            return default
        v = obj[key]
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            raise self.error(sub, f"expected a finite number, got {v!r}")
        if check is not None and not check(v):
            raise self.error(sub, f"value {v!r} out of range{': ' + what if what else ''}")
        return float(v)


def load_config(path) -> Config:
    with open(path) as fh:
        text = fh.read()
    return parse_config(text)


def parse_config(text: str) -> Config:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc.msg}", "", exc.lineno) from None
    rd = _Reader(text)
    rd.section(
        doc,
        "",
        {"geometry", "resolution", "materials", "field", "reference_phase", "eigenstrain_sign", "output", "sweep"},
    )

    # materials
    mats = rd.section(doc.get("materials", {}), "materials", {"msm", "polymer"})
    msm = rd.section(mats.get("msm", {}), "materials.msm", set(_MSM_KEYS))
    m = MaterialSet()
    changes = {}
    for key, attr in _MSM_KEYS.items():
        v = rd.number(msm, key, "materials.msm", check=lambda x: x >= 0, what="must be non-negative")
        if v is not None:
            changes[attr] = v
    poly = rd.section(mats.get("polymer", {}), "materials.polymer", {"E", "E_sweep", "nu"})
    E = rd.number(poly, "E", "materials.polymer", check=lambda x: x > 0, what="must be positive")
    nu = rd.number(poly, "nu", "materials.polymer", check=lambda x: 0 < x < 0.5, what="need 0 < nu < 0.5")
    if E is not None:
        changes["polymer_E"] = E
    if nu is not None:
        changes["polymer_nu"] = nu
    m = replace(m, **changes)
    if not (m.c11 > abs(m.c12) and m.c44 > 0):
        raise rd.error("materials.msm", "cubic constants must satisfy C11 > |C12| and C44 > 0")

    # geometry
    geo = rd.section(doc.get("geometry", {"generator": {}}), "geometry", {"particles", "generator"})
    if "particles" in geo and "generator" in geo:
        raise rd.error("geometry", "give either particles or generator, not both")
    generator = None
    try:
        if "particles" in geo:
            cell = _particles(rd, geo["particles"])
        else:
            g = rd.section(geo.get("generator", {}), "geometry.generator", {"fraction", "aspect", "angle", "kind"})
            kind = g.get("kind", "ellipse")
            if kind not in ("ellipse", "rectangle", "polygon"):
                raise rd.error("geometry.generator.kind", f"unknown shape kind {kind!r}")
            generator = Generator(
                fraction=rd.number(g, "fraction", "geometry.generator", 0.3),
                aspect=rd.number(g, "aspect", "geometry.generator", 1.0),
                angle=rd.number(g, "angle", "geometry.generator", 0.0),
                kind=kind,
            )
            cell = generator.cell()
    except GeometryError as exc:
        raise rd.error("geometry", str(exc)) from None

    n = doc.get("resolution", 128)
    if isinstance(n, bool) or not isinstance(n, int):
        raise rd.error("resolution", f"expected an integer, got {n!r}")
    try:
        check_resolution(n)
    except GeometryError as exc:
        raise rd.error("resolution", str(exc)) from None

    fld = rd.section(doc.get("field", {}), "field", {"magnitude_T", "angle_rad"})
    ref = doc.get("reference_phase", 2)
    if ref not in (1, 2) or isinstance(ref, bool):
        raise rd.error("reference_phase", "must be 1 or 2")
    sign = doc.get("eigenstrain_sign", 1)
    if sign not in (1, -1) or isinstance(sign, bool):
        raise rd.error("eigenstrain_sign", "must be +1 or -1")

    spec = CellProblemSpec(
        cell=cell,
        resolution=n,
        materials=m,
        reference_phase=ref,
        field_T=rd.number(fld, "magnitude_T", "field", 1.0, check=lambda x: x >= 0, what="must be non-negative"),
        field_angle=rd.number(fld, "angle_rad", "field", 0.0),
        eigenstrain_sign=sign,
    )

    out = rd.section(doc.get("output", {}), "output", {"csv_path", "svg_dir", "debug_dumps"})
    for key in ("csv_path", "svg_dir"):
        if key in out and not isinstance(out[key], str):
            raise rd.error(f"output.{key}", "expected a string path")
    if "debug_dumps" in out and not isinstance(out["debug_dumps"], bool):
        raise rd.error("output.debug_dumps", "expected true or false")
    output = OutputConfig(out.get("csv_path"), out.get("svg_dir"), out.get("debug_dumps", False))

    sweep, sweep_error = _sweep(rd, doc, poly, spec, generator)
    return Config(spec, generator, sweep, sweep_error, output)


def _sweep(rd, doc, poly, spec, generator):
    """Build the optional sweep; config errors in it are deferred to ``sweep`` runs."""
    if "E_sweep" in poly and "sweep" in doc:
        raise rd.error("sweep", "materials.polymer.E_sweep and sweep are mutually exclusive")
    if "E_sweep" in poly:
        es = rd.section(poly["E_sweep"], "materials.polymer.E_sweep", {"lo", "hi", "points"})
        lo = rd.number(es, "lo", "materials.polymer.E_sweep", 0.03, lambda x: 1e-3 <= x <= 1e5, "in [1e-3, 1e5]")
        hi = rd.number(es, "hi", "materials.polymer.E_sweep", 80.0, lambda x: 1e-3 <= x <= 1e5, "in [1e-3, 1e5]")
        pts = es.get("points", 30)
        if isinstance(pts, bool) or not isinstance(pts, int) or pts < 1:
            raise rd.error("materials.polymer.E_sweep.points", "expected a positive integer")
        return SweepSpec(spec, "polymer_E", log_space(lo, hi, pts) if pts > 1 else (lo,)), None
    if "sweep" not in doc:
        return None, "no sweep defined (materials.polymer.E_sweep or sweep)"
    sw = rd.section(doc["sweep"], "sweep", {"parameter", "values"})
    param = sw.get("parameter")
    if param not in PARAMETERS:
        raise rd.error("sweep.parameter", f"must be one of {', '.join(PARAMETERS)}")
    values = sw.get("values")
    if not isinstance(values, list) or not values:
        raise rd.error("sweep.values", "expected a non-empty list of numbers")
    for k, v in enumerate(values):
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            raise rd.error(f"sweep.values.[{k}]", f"expected a finite number, got {v!r}")
    if param in ("aspect_ratio", "volume_fraction") and generator is None:
        raise rd.error("sweep.parameter", f"{param} sweeps need geometry.generator")
    try:
        return SweepSpec(spec, param, tuple(values), generator), None
    except ValueError as exc:
        raise rd.error("sweep.values", str(exc)) from None


def _particles(rd, items):
    if not isinstance(items, list) or not items:
        raise rd.error("geometry.particles", "expected a non-empty list")
    out = []
    for k, item in enumerate(items):
        path = f"geometry.particles.[{k}]"
        rd.section(item, path, {"shape", "center", "shape_angle", "lattice_angle"})
        shape = rd.section(
            item.get("shape"), f"{path}.shape", {"kind", "semi_a", "semi_b", "half_w", "half_h", "vertices"}
        )
        kind = shape.get("kind")
        sp = f"{path}.shape"
        if kind == "ellipse":
            s = Ellipse(rd.number(shape, "semi_a", sp), rd.number(shape, "semi_b", sp))
        elif kind == "rectangle":
            s = Rectangle(rd.number(shape, "half_w", sp), rd.number(shape, "half_h", sp))
        elif kind == "polygon":
            s = Polygon(tuple(tuple(v) for v in shape.get("vertices", ())))
        else:
            raise rd.error(f"{sp}.kind", f"unknown shape kind {kind!r}")
        center = item.get("center", [0.5, 0.5])
        if not (isinstance(center, list) and len(center) == 2):
            raise rd.error(f"{path}.center", "expected [x, y]")
        out.append(
            Particle(
                s,
                tuple(center),
                rd.number(item, "shape_angle", path, 0.0),
                rd.number(item, "lattice_angle", path, 0.0),
            )
        )
    return UnitCell(tuple(out))
