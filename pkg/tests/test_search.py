import json

import numpy as np
import pytest

from ladderlab.expr import evaluate, parse
from ladderlab.ladder import CASES, algebra_relations, build_case, check_constraints
from ladderlab.search import (AnsatzError, CaseNotFound, SingularPointError, assemble_system,
                              case_ansatz, fit, load_ansatz, make_ansatz, match_case,
                              recover_case, residuals)

POLY = ["1", "x", "x^2"]


def exact_theta(case_id):
    """Catalog solution expressed in the case's search basis."""
    s = build_case(case_id)
    ans = case_ansatz(case_id, CASES[case_id].X, s.Y)
    pts = ans.points()
    coeffs = []
    for name, basis in (("Z", ans.Z_basis), ("Q", ans.Q_basis), ("V", ans.V_basis)):
        A = np.column_stack([np.broadcast_to(evaluate(b, pts), pts.shape) for b in basis])
        target = evaluate(getattr(s, name), pts)
        c, *_ = np.linalg.lstsq(A, np.broadcast_to(target, pts.shape), rcond=None)
        assert np.allclose(A @ c, target, atol=1e-12)
        coeffs.append(c)
    scal = [s.consts[n] for n in ("alpha", "beta", "gamma", "lambda", "nu", "tau")]
    return ans, np.concatenate([scal, *coeffs])


@pytest.mark.parametrize("case", sorted(CASES))
def test_exact_solution_has_zero_residual(case):
    ans, theta = exact_theta(case)
    assert np.max(np.abs(residuals(ans, theta))) <= 1e-12


def test_zero_theta_gives_raw_left_sides():
    ans = make_ansatz("-1", "x^2", POLY, POLY, POLY)
    r = residuals(ans, np.zeros(6 + 9)).reshape(5, -1)
    x = ans.points()
    assert np.allclose(r[0], -2.0)      # X Y''
    assert np.allclose(r[1], -4.0 * x)  # 2 X Y' - X' Y
    assert np.allclose(r[2:], 0.0)


def test_singular_point():
    ans = make_ansatz("-1", "1", ["1"], ["x"], ["1"])
    theta = np.zeros(9)
    theta[1] = -1.0  # beta
    theta[-1] = 1.0  # V = 1
    with pytest.raises(SingularPointError) as info:
        residuals(ans, theta)
    assert info.value.point == pytest.approx(ans.points()[0])


def test_case1_from_polynomials():
    ans = make_ansatz("-1", "1", POLY, POLY, POLY)
    res = fit(ans)
    assert res.converged
    a, lam = res.scalars["alpha"], res.scalars["lambda"]
    assert res.scalars["beta"] == 0.0
    assert res.v[2] == pytest.approx(0.5 * (lam + a * a / 2), abs=1e-8)
    system = assemble_system(ans, res)
    assert check_constraints(system).passed
    assert algebra_relations(system).passed


def test_case4_from_trig_basis():
    k, a, b = 1.3, 0.8, 0.4
    Y = f"{a}*sin({k}*x) + {b}*cos({k}*x)"
    W = f"{a}*cos({k}*x) - {b}*sin({k}*x)"
    ans = make_ansatz("-1", Y, [W, "1"], [W, "1"], ["1", f"({Y})^(-2)"], domain=(0.1, 1.8))
    res = fit(ans)
    assert res.converged
    lam = res.scalars["lambda"]
    assert res.scalars["beta"] == pytest.approx(2 * k * k / lam, abs=1e-6)


def test_cubic_is_not_solvable():
    res = fit(make_ansatz("-1", "x^3", POLY, POLY, POLY))
    assert not res.converged
    assert max(res.residual_norms.values()) > 1e-3


def test_fit_is_seed_deterministic():
    ans = make_ansatz("-1", "x^3", POLY, POLY, POLY)
    r1, r2 = fit(ans, seed=7, restarts=4), fit(ans, seed=7, restarts=4)
    assert r1.as_dict() == r2.as_dict()
    assert np.array_equal(r1.theta, r2.theta)


def test_fixed_scalars_are_held():
    ans = make_ansatz("-1", "1", POLY, POLY, POLY, fixed={"alpha": 0.5, "lambda": 2.0})
    res = fit(ans)
    assert res.converged
    assert res.scalars["alpha"] == 0.5
    assert res.scalars["lambda"] == 2.0


@pytest.mark.parametrize("X,Y,want", [
    ("-1", "1", 1), ("-1", "x", 2), ("-1", "a*exp(c*x) + b*exp(-c*x)", 3),
    ("-1", "a*sin(k*x) + b*cos(k*x)", 4), ("-x", "x", 5), ("-exp(c*x)", "1", 6),
])
def test_recover_each_header(X, Y, want):
    rec = recover_case(parse(X), parse(Y))
    assert rec.case_id == want
    assert rec.fit.converged
    assert check_constraints(rec.system).passed


def test_recover_cubic_not_found():
    assert match_case(parse("-1"), parse("x^3")) == []
    with pytest.raises(CaseNotFound):
        recover_case(parse("-1"), parse("x^3"))


def test_load_ansatz_from_text_and_file(tmp_path):
    doc = {"X": "-1", "Y": "1", "Z_basis": POLY, "Q_basis": POLY, "V_basis": POLY,
           "fixed": {"lambda": 1}}
    a1 = load_ansatz(json.dumps(doc))
    path = tmp_path / "a.json"
    path.write_text(json.dumps(doc))
    assert load_ansatz(str(path)) == a1


@pytest.mark.parametrize("doc", [
    {"Y": "1", "Z_basis": POLY, "Q_basis": POLY, "V_basis": POLY},
    {"X": "-1", "Y": "1", "Z_basis": "x", "Q_basis": POLY, "V_basis": POLY},
    {"X": "-1", "Y": "1", "Z_basis": [], "Q_basis": POLY, "V_basis": POLY},
    {"X": "-1", "Y": "1(", "Z_basis": POLY, "Q_basis": POLY, "V_basis": POLY},
    {"X": "-1", "Y": "1", "Z_basis": POLY, "Q_basis": POLY, "V_basis": POLY, "fixed": {"a": "b"}},
])
def test_malformed_ansatz(doc):
    with pytest.raises(AnsatzError):
        load_ansatz(doc)


def test_invalid_json():
    with pytest.raises(AnsatzError):
        load_ansatz("{not json")
