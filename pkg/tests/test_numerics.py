import math

import numpy as np
import pytest

from ladderlab.diffop import DiffOp, UnboundEnergyError
from ladderlab.expr import ENERGY, Const, Param, parse
from ladderlab.ladder import build_case, ground_state
from ladderlab.numerics import (DiscretizationError, Grid, LadderTowerError, apply_on_grid,
                                discretize, grid_derivative, sign_changes, solve_spectrum,
                                spectrum_by_ladder, verify_ladder)


def H_of(X, V):
    return DiffOp(((2, parse(X)), (0, parse(V))))


def test_grid_validation():
    with pytest.raises(ValueError):
        Grid(0, 1, 2)
    with pytest.raises(ValueError):
        Grid(1, 0, 11)
    assert Grid(0, 1, 11).h == pytest.approx(0.1)


def test_unit_weight_pencil():
    g = Grid(0, 1, 11)
    p = discretize(H_of("-1", "x^2"), g)
    assert np.allclose(p.weight, 1.0)
    assert np.allclose(p.diag, 2 / g.h ** 2 + g.interior ** 2)
    assert np.allclose(p.offdiag, -1 / g.h ** 2)


def test_case5_weight_is_one_over_x():
    s = build_case(5)
    g = Grid(1e-4, 60, 101)
    assert np.allclose(discretize(s.H, g).weight, 1 / g.interior)


def test_positive_x_rejected():
    with pytest.raises(DiscretizationError):
        discretize(H_of("1", "0"), Grid(0, 1, 11))


def test_first_order_term_rejected():
    with pytest.raises(DiscretizationError):
        discretize(DiffOp(((2, Const(-1.0)), (1, Const(1.0)))), Grid(0, 1, 11))


def test_unbound_energy_rejected():
    with pytest.raises(UnboundEnergyError):
        discretize(DiffOp(((2, Const(-1.0)), (0, Param(ENERGY)))), Grid(0, 1, 11))


def test_particle_in_a_box():
    spec = solve_spectrum(H_of("-1", "0"), Grid(0, math.pi, 4001), 5)
    assert spec.energies == pytest.approx([1, 4, 9, 16, 25], rel=1e-4)


def test_harmonic_gaps():
    spec = solve_spectrum(build_case(1).H, Grid(-12, 12, 4001), 7)
    assert np.diff(spec.energies) == pytest.approx([math.sqrt(2)] * 6, abs=1e-6)


def test_states_orthonormal_and_sorted():
    s = build_case(5)
    spec = solve_spectrum(s.H, Grid(*s.grid_domain, 4001), 5)
    gram = np.array([[spec.inner(a, b) for b in spec.states] for a in spec.states])
    assert np.allclose(gram, np.eye(5), atol=1e-8)
    assert np.all(np.diff(spec.energies) > 0)


def test_second_order_convergence():
    H = build_case(1).H
    exact = math.sqrt(2) / 2
    errs = [abs(solve_spectrum(H, Grid(-12, 12, n), 1, richardson=False).energies[0] - exact)
            for n in (501, 1001)]
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.05)


def test_richardson_helps():
    H = build_case(1).H
    plain = solve_spectrum(H, Grid(-12, 12, 1001), 1, richardson=False).energies[0]
    rich = solve_spectrum(H, Grid(-12, 12, 1001), 1).energies[0]
    exact = math.sqrt(2) / 2
    assert abs(rich - exact) < 0.01 * abs(plain - exact)


def test_standard_morse_gaps_shrink():
    # -psi'' + D (1 - e^-x)^2 with D = 25: E_v = 10 (v + 1/2) - (v + 1/2)^2
    spec = solve_spectrum(H_of("-1", "25*(1 - exp(-x))^2"), Grid(-3, 20, 4001), 4)
    assert np.all(np.isfinite(spec.energies))
    gaps = np.diff(spec.energies)
    assert np.all(np.diff(gaps) < 0)
    want = [10 * (v + 0.5) - (v + 0.5) ** 2 for v in range(4)]
    assert spec.energies == pytest.approx(want, abs=1e-4)


def test_grid_derivative_order_four():
    errs = []
    for n in (201, 401):
        x = np.linspace(0, math.pi, n)
        d = grid_derivative(np.sin(x), x[1] - x[0], 2)
        errs.append(np.max(np.abs(d + np.sin(x))[2:-2]))
    assert errs[0] / errs[1] > 12


def test_apply_on_grid_binds_energy():
    x = np.linspace(0, math.pi, 401)
    op = DiffOp(((1, Const(1.0)), (0, Param(ENERGY))))
    out = apply_on_grid(op, x, np.sin(x), energy=2.0)
    assert np.allclose(out[1:-1], (np.cos(x) + 2 * np.sin(x))[1:-1], atol=1e-8)


def test_sign_changes():
    x = np.linspace(0, math.pi, 1001)
    assert sign_changes(np.sin(3 * x)) == 2


@pytest.mark.parametrize("case", [1, 4, 6])
def test_ladder_action(case):
    s = build_case(case)
    spec = solve_spectrum(s.H, Grid(*s.grid_domain, 4001), 6)
    rep = verify_ladder(s, spec, 5)
    assert rep.min_similarity > 1 - 1e-5
    assert rep.max_gap_error < 1e-4
    assert rep.nodes_ok
    assert max(st.factor_residual for st in rep.steps) < 1e-6


def test_case1_ladder_strict():
    s = build_case(1)
    spec = solve_spectrum(s.H, Grid(-12, 12, 4001), 7)
    rep = verify_ladder(s, spec, 6)
    assert rep.min_similarity > 1 - 1e-6
    assert rep.max_gap_error < 1e-6


def test_case1_tower_is_arithmetic():
    s = build_case(1, {"alpha": 0.3, "lambda": 0.8})
    E0 = 0.4
    tower = spectrum_by_ladder(s, E0, 5).energies
    r = math.sqrt(0.3 ** 2 + 1.6)
    assert tower == pytest.approx(E0 + r * np.arange(6), abs=1e-13)


def test_case3_tower_terminates():
    s = build_case(3)
    gs = ground_state(s)
    tower = spectrum_by_ladder(s, gs.E0, 50).energies
    assert 1 < len(tower) < 50
    spec = solve_spectrum(s.H, Grid(*s.grid_domain, 4001), len(tower))
    assert tower == pytest.approx(spec.energies, abs=1e-5)


def test_tower_rejects_negative_discriminant():
    s = build_case(3)
    with pytest.raises(LadderTowerError):
        spectrum_by_ladder(s, 1e6, 3)


@pytest.mark.parametrize("case", range(1, 7))
def test_grid_vs_ladder(case):
    s = build_case(case)
    gs = ground_state(s)
    tower = spectrum_by_ladder(s, gs.E0, 5).energies
    spec = solve_spectrum(s.H, Grid(*s.grid_domain, 4001), len(tower))
    assert np.max(np.abs(tower - spec.energies)) <= 5e-4


def test_csv_and_json_outputs():
    spec = solve_spectrum(H_of("-1", "0"), Grid(0, math.pi, 11), 2)
    lines = spec.to_csv().splitlines()
    assert lines[0] == "x,psi_0,psi_1"
    assert len(lines) == 12
    assert spec.to_json().startswith("[")
