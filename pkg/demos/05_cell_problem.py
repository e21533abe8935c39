"""The coupled cell problem: which variant wins, and how much work it delivers."""

from msmcell.cellsolver import CellProblemSpec, critical_modulus, solve_cell
from msmcell.geometry import make_particle_cell

spec = CellProblemSpec(make_particle_cell(0.3, 1.0), resolution=64)

for E in (1.0, 80.0):
    res = solve_cell(spec.with_modulus(E))
    print(f"E = {E} MPa")
    for phases in res.assignments():
        e = res.get(phases)
        print(
            f"  variant {phases[0]}: total {e.total:+.5f} = elastic {e.elastic:.5f} + aniso {e.anisotropy:.5f}"
            f" + demag {e.demag:.5f} + Zeeman {e.zeeman:+.5f}"
        )
    print(f"  global minimizer {res.global_minimizer}, strain along field {res.spontaneous_strain:+.4f}")
    print(f"  work output {res.work_output:.5f} MPa\n")

# The polymer modulus at which the transformed variant stops paying off.
E_star = critical_modulus(spec)
print(f"critical modulus: {E_star:.2f} MPa")
