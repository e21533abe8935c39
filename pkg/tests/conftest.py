import math

import numpy as np
import pytest

from msmcell.geometry import Ellipse, Particle, UnitCell, rasterize
from msmcell.errors import GeometryError


def random_cell(rng, n, max_particles=4, attempts=200):
    """Random ellipse arrangement that rasterizes cleanly at resolution n."""
    for _ in range(attempts):
        k = int(rng.integers(1, max_particles + 1))
        parts = []
        try:
            for _ in range(k):
                a = rng.uniform(0.04, 0.25)
                b = rng.uniform(0.04, 0.25)
                parts.append(
                    Particle(
                        Ellipse(a, b),
                        tuple(rng.uniform(0, 1, 2)),
                        rng.uniform(0, 2 * math.pi),
                        rng.uniform(0, 2 * math.pi),
                    )
                )
            cell = UnitCell(tuple(parts))
            return cell, rasterize(cell, n)
        except GeometryError:
            continue
    raise RuntimeError("could not draw a valid random cell")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# -- acceptance summary: one line per criterion --------------------------------

_criteria = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py::test_criterion_" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    failed = report.outcome == "failed"
    if report.when == "call" or failed:
        _criteria[name] = {"passed": "PASS", "failed": "FAIL"}.get(report.outcome, report.outcome.upper())


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_criteria):
        number, _, label = name[len("test_criterion_"):].partition("_")
        terminalreporter.write_line(f"criterion {int(number):2d} {label.replace('_', ' '):<40} {_criteria[name]}")
