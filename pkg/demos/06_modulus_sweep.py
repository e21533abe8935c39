"""Energy, spontaneous strain and work output against the polymer modulus."""

import os

import numpy as np

from msmcell.cellsolver import CellProblemSpec
from msmcell.geometry import make_particle_cell
from msmcell.svgplot import plot_records
from msmcell.sweep import SweepSpec, find_crossings, log_space, peak_work_output, run_sweep, write_csv

OUT = os.path.join(os.path.dirname(os.path.abspath(__file__)), "out", "modulus")
os.makedirs(OUT, exist_ok=True)

spec = CellProblemSpec(make_particle_cell(0.3, 1.0), resolution=128)
table = run_sweep(SweepSpec(spec, "polymer_E", log_space(0.03, 80, 30)), threads=0)

E, gap = np.array(table.values), np.array([r.energy_gap for r in table.results])
work = np.array([r.work_output for r in table.results])
strain = np.array([r.spontaneous_strain for r in table.results])
print(f"{'E [MPa]':>9} {'gap [MPa]':>11} {'strain':>8} {'work [MPa]':>11}")
for row in zip(E, gap, strain, work):
    print("{:9.3f} {:+11.5f} {:8.4f} {:11.5f}".format(*row))

(crossing,) = find_crossings(table)
E_peak, w_peak = peak_work_output(table)
print(f"\ncrossing at {crossing.modulus:.2f} MPa; peak work output {w_peak:.4f} MPa at {E_peak:.2f} MPa")

write_csv(table, os.path.join(OUT, "sweep.csv"))
for path in plot_records(table.records, OUT):
    print("wrote", path)
