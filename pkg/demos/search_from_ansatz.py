"""Fit the constraint system from an ansatz file and read back a catalog family.

alpha is left free in the first file and pinned in the second; with it free
the trigonometric fit is just as valid but lands on a large alpha.
"""
# %%
from pathlib import Path

from ladderlab.expr import parse, to_string
from ladderlab.search import assemble_system, fit, load_ansatz, recover_case

here = Path(__file__).parent

for name in ("ansatz_case1.json", "ansatz_case4.json", "ansatz_x3.json"):
    ans = load_ansatz(here / name)
    res = fit(ans, seed=0)
    print(f"{name}: {res.message}")
    if res.converged:
        s = assemble_system(ans, res)
        print("   scalars", {k: round(v, 10) for k, v in res.scalars.items()})
        print("   V(x) =", to_string(s.V), "  class", s.klass)
    else:
        print("   residual norms", {k: f"{v:.2e}" for k, v in res.residual_norms.items()})

# %% identify a family from its header alone
for X, Y in [("-1", "x"), ("-x", "x"), ("-exp(c*x)", "1")]:
    rec = recover_case(parse(X), parse(Y))
    print(f"X={X:10s} Y={Y:3s} -> case {rec.case_id}, params "
          f"{ {k: round(v, 8) + 0.0 for k, v in rec.params.items()} }")
