"""Two families whose gaps depend on the energy: a finite well and a box-like well."""
# %%
import numpy as np

from ladderlab.expr import ENERGY, evaluate, to_string
from ladderlab.ladder import build_case, ground_state, s_commutator
from ladderlab.numerics import Grid, solve_spectrum, spectrum_by_ladder

# %% generalized Poschl-Teller well: finitely many bound states
well = build_case(3)
print("class", well.klass, " beta", well.beta)
print("V(x) =", to_string(well.V))
gs = ground_state(well)
for c in gs.E0_candidates:
    print(f"  root {c.label:5s} E={c.energy:9.4f}  H psi = E psi residual {c.eigen_residual:.1e}"
          f"  chosen={c.physical}")

tower = spectrum_by_ladder(well, gs.E0, 20).energies
grid = Grid(*well.grid_domain, 4001)
spec = solve_spectrum(well.H, grid, len(tower))
print("ladder:", np.round(tower, 8))
print("grid:  ", np.round(spec.energies, 8))
# one more step would land exactly where the discriminant vanishes
top = tower[-1]
print("discriminant at the top state", well.discriminant(top),
      " after one more step", well.discriminant(top + float(evaluate(well.gaps[1], 0.0, {ENERGY: top}))))

# %% trigonometric well: gaps grow with n
box = build_case(4)
spec = solve_spectrum(box.H, Grid(*box.grid_domain, 4001), 6)
pred = [float(evaluate(box.gaps[1], 0.0, {ENERGY: e})) for e in spec.energies[:-1]]
print("grid gaps     ", np.round(np.diff(spec.energies), 6))
print("g2(E_n)       ", np.round(pred, 6))

# %% [S1, S2] on eigenstates against the closed form
print(s_commutator(box, energies=spec.energies.tolist()).as_dict())
