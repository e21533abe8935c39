"""Parameter studies over polymer modulus, particle shape and field angle."""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .cellsolver import CLAMPED, FREE, CellProblemSpec, CellResult, solve_cell
from .errors import MSMCellError, SchemaError
from .geometry import make_particle_cell

PARAMETERS = ("polymer_E", "aspect_ratio", "volume_fraction", "field_angle")

CSV_COLUMNS = (
    "sweep_param",
    "sweep_value",
    "assignment",
    "beta_mode",
    "E_total_MPa",
    "E_elastic_MPa",
    "E_aniso_MPa",
    "E_demag_MPa",
    "E_zeeman_MPa",
    "beta_xx",
    "beta_xy",
    "beta_yy",
    "strain_along_field",
    "work_output_MPa",
)


@dataclass(frozen=True)
class Generator:
    """Single-particle geometry generator used by shape sweeps."""

    fraction: float = 0.3
    aspect: float = 1.0
    angle: float = 0.0
    kind: str = "ellipse"

    def cell(self, **changes):
        g = replace(self, **changes)
        return make_particle_cell(g.fraction, g.aspect, g.angle, g.kind)


@dataclass(frozen=True)
class SweepSpec:
    base: CellProblemSpec
    parameter: str
    values: tuple
    generator: Generator | None = None

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if self.parameter not in PARAMETERS:
            raise ValueError(f"unknown sweep parameter {self.parameter!r}; choose from {PARAMETERS}")
        if not self.values:
            raise ValueError("sweep needs at least one value")
        if self.parameter == "polymer_E" and not all(1e-3 <= v <= 1e5 for v in self.values):
            raise ValueError("polymer_E sweep values must lie in [1e-3, 1e5] MPa")
        if self.parameter in ("aspect_ratio", "volume_fraction") and self.generator is None:
            raise ValueError(f"a {self.parameter} sweep needs a geometry generator")

    def point(self, value: float) -> CellProblemSpec:
        if self.parameter == "polymer_E":
            return self.base.with_modulus(value)
        if self.parameter == "field_angle":
            return replace(self.base, field_angle=value)
        if self.parameter == "aspect_ratio":
            return replace(self.base, cell=self.generator.cell(aspect=value))
        return replace(self.base, cell=self.generator.cell(fraction=value))


def log_space(lo, hi, points):
    return tuple(float(v) for v in np.geomspace(lo, hi, int(points)))


@dataclass(frozen=True)
class SweepRecord:
    sweep_param: str
    sweep_value: float
    assignment: str
    beta_mode: str
    E_total_MPa: float
    E_elastic_MPa: float
    E_aniso_MPa: float
    E_demag_MPa: float
    E_zeeman_MPa: float
    beta_xx: float
    beta_xy: float
    beta_yy: float
    strain_along_field: float
    work_output_MPa: float


@dataclass
class SweepTable:
    parameter: str
    values: tuple
    records: list
    results: list = field(default_factory=list)  # CellResult or None, per point
    errors: list = field(default_factory=list)  # (point index, value, message)
    reference_phase: int = 2

    def series(self, assignment: str, mode: str = FREE, column: str = "E_total_MPa"):
        """(x, y) arrays for one (assignment, mode) group."""
        rows = [r for r in self.records if r.assignment == assignment and r.beta_mode == mode]
        return (
            np.array([r.sweep_value for r in rows]),
            np.array([getattr(r, column) for r in rows]),
        )


def assignment_label(phases) -> str:
    return "".join(str(p) for p in phases)


def cell_records(parameter, value, res: CellResult):
    out = []
    for phases in res.assignments():
        work = res.work_output_of(phases)
        for mode in (FREE, CLAMPED):
            e = res.get(phases, mode)
            out.append(
                SweepRecord(
                    sweep_param=parameter,
                    sweep_value=value,
                    assignment=assignment_label(phases),
                    beta_mode=mode,
                    E_total_MPa=e.total,
                    E_elastic_MPa=e.elastic,
                    E_aniso_MPa=e.anisotropy,
                    E_demag_MPa=e.demag,
                    E_zeeman_MPa=e.zeeman,
                    beta_xx=float(e.beta[0, 0]),
                    beta_xy=float(e.beta[0, 1]),
                    beta_yy=float(e.beta[1, 1]),
                    strain_along_field=e.strain_along_field,
                    work_output_MPa=work,
                )
            )
    return out


def _evaluate(spec: SweepSpec, index: int):
    value = spec.values[index]
    try:
        return index, solve_cell(spec.point(value)), None
    except (MSMCellError, ValueError) as exc:
        return index, None, f"{type(exc).__name__}: {exc}"


def run_sweep(spec: SweepSpec, threads: int = 1) -> SweepTable:
    """Evaluate every sweep point; failed points are reported, not raised."""
    idx = range(len(spec.values))
    if threads == 1:
        outcomes = [_evaluate(spec, i) for i in idx]
    else:
        with ThreadPoolExecutor(max_workers=threads or None) as pool:
            outcomes = list(pool.map(lambda i: _evaluate(spec, i), idx))
    outcomes.sort(key=lambda o: o[0])
    table = SweepTable(spec.parameter, spec.values, [], reference_phase=spec.base.reference_phase)
    for i, res, err in outcomes:
        table.results.append(res)
        if err is not None:
            table.errors.append((i, spec.values[i], err))
        else:
            table.records.extend(cell_records(spec.parameter, spec.values[i], res))
    return table


@dataclass(frozen=True)
class Crossing:
    transformed: str
    untransformed: str
    modulus: float


def _gap_series(table: SweepTable):
    """Per point: (E, transformed label, untransformed label, free-energy gap)."""
    out = []
    for value in table.values:
        rows = [r for r in table.records if r.sweep_value == value and r.beta_mode == FREE]
        if not rows:
            continue
        ref = str(table.reference_phase) * len(rows[0].assignment)
        others = [r for r in rows if r.assignment != ref]
        if not others:
            continue
        base = next(r for r in rows if r.assignment == ref)
        best = min(others, key=lambda r: r.E_total_MPa)
        out.append((value, best.assignment, ref, best.E_total_MPa - base.E_total_MPa))
    return out


def find_crossings(table: SweepTable):
    """Sign changes of the transformed-minus-untransformed free energy, interpolated in log E."""
    gaps = _gap_series(table)
    out = []
    for (e0, t0, u0, d0), (e1, t1, u1, d1) in zip(gaps, gaps[1:]):
        if d0 == 0.0:
            out.append(Crossing(t0, u0, e0))
        elif (d0 < 0) != (d1 < 0) and d1 != 0.0:
            s = d0 / (d0 - d1)
            E = math.exp(math.log(e0) + s * (math.log(e1) - math.log(e0)))
            out.append(Crossing(t0 if d0 < 0 else t1, u0, E))
    if gaps and gaps[-1][3] == 0.0:
        out.append(Crossing(gaps[-1][1], gaps[-1][2], gaps[-1][0]))
    return out


def peak_work_output(table: SweepTable):
    """(value, work) of the largest work output over all records."""
    if not table.records:
        return None
    best = max(table.records, key=lambda r: r.work_output_MPa)
    return best.sweep_value, best.work_output_MPa


# -- CSV ----------------------------------------------------------------------


def _fmt(v):
    if isinstance(v, str):
        return v
    return format(float(v), ".16e")


def to_csv(table: SweepTable) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in table.records:
        writer.writerow([_fmt(getattr(r, c)) for c in CSV_COLUMNS])
    return buf.getvalue()


def write_csv(table: SweepTable, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(to_csv(table))


def read_csv(path) -> list:
    """Parse a sweep CSV into SweepRecords; SchemaError names the offending column."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file") from None
        missing = [c for c in CSV_COLUMNS if c not in header]
        if missing:
            raise SchemaError(f"{path}: missing column {missing[0]!r}")
        extra = [c for c in header if c not in CSV_COLUMNS]
        if extra:
            raise SchemaError(f"{path}: unexpected column {extra[0]!r}")
        pos = {c: header.index(c) for c in CSV_COLUMNS}
        records = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise SchemaError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            values = {}
            for c in CSV_COLUMNS:
                raw = row[pos[c]]
                if c in ("sweep_param", "assignment", "beta_mode"):
                    values[c] = raw
                else:
                    try:
                        values[c] = float(raw)
                    except ValueError:
                        raise SchemaError(f"{path}:{lineno}: column {c!r} is not a number: {raw!r}") from None
            records.append(SweepRecord(**values))
    return records
