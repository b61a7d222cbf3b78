"""Walk through the harmonic family: algebra, shift operators, spectrum."""
# %%
import math

import numpy as np

from ladderlab.expr import ENERGY, evaluate, to_string
from ladderlab.ladder import algebra_relations, build_case, check_constraints, ground_state
from ladderlab.numerics import Grid, solve_spectrum, spectrum_by_ladder, verify_ladder

system = build_case(1, {"alpha": 0.5, "lambda": 1.0, "c1": 0.2, "c2": -0.1, "c3": 0.3})
print("V(x) =", to_string(system.V))
print("H    =", system.H)
print("P    =", system.P)

# %% the five constraints and the two closed commutators
print(check_constraints(system).as_dict())
print(algebra_relations(system).as_dict())

# %% shift operators; both gaps are constant because beta = 0
g1, g2 = (float(evaluate(g, 0.0, {ENERGY: 0.0})) for g in system.gaps)
print("S1 =", system.S1)
print("S2 =", system.S2)
print(f"gaps {g1:.6f}, {g2:.6f}; sqrt(alpha^2 + 2 lambda) = {math.sqrt(0.25 + 2):.6f}")

# %% ground state from S1 psi0 = 0, then climb with S2
grid = Grid(-12.0, 12.0, 4001)
gs = ground_state(system, grid)
print("psi0 =", to_string(gs.psi0))
print("E0 closed form", gs.E0, " grid", gs.grid_E0)

tower = spectrum_by_ladder(system, gs.E0, 5).energies
spec = solve_spectrum(system.H, grid, 6)
for n, (a, b) in enumerate(zip(tower, spec.energies)):
    print(f"n={n}  ladder {a:.10f}  grid {b:.10f}  diff {abs(a - b):.1e}")

# %% S2 psi_n against psi_{n+1} on the grid
rep = verify_ladder(system, spec, 5)
for st in rep.steps:
    print(f"n={st.n}  cosine {st.similarity:.12f}  nodes {st.nodes}")
print("largest gap error", np.format_float_scientific(rep.max_gap_error, 2))
