import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ladderlab.diffop import (DiffOp, UnboundEnergyError, apply_symbolic, commutator, compose,
                              coefficient_residuals, derivative, identity, multiplication,
                              reduce_on_shell)
from ladderlab.expr import ENERGY, X, Const, Param, add, approx_equal, diff, mul, parse

D = derivative(1)
PTS = np.linspace(-0.9, 0.9, 25)


def same(a: DiffOp, b: DiffOp, pts=PTS, binding=None, tol=1e-10) -> bool:
    res = coefficient_residuals(a, b, pts, binding)
    return all(v <= tol for v in res.values())


def test_product_rule():
    assert same(compose(D, multiplication(X)), DiffOp(((1, X), (0, Const(1.0)))))


def test_order_adds():
    Y = parse("1 + x^2")
    op = compose(-1.0 * derivative(2), DiffOp(((1, Y),)))
    assert op.order == 3
    assert approx_equal(op.coeff(3), mul(Const(-1.0), Y))


def test_identity_is_neutral():
    A = DiffOp(((2, parse("x")), (0, parse("sin(x)"))))
    assert same(compose(identity(), A), A)
    assert same(compose(A, identity()), A)


def test_laplacian_commutator():
    assert same(commutator(-1.0 * derivative(2), multiplication(X)), -2.0 * D)


def test_self_commutator_vanishes():
    A = DiffOp(((2, parse("-exp(x)")), (1, parse("x")), (0, parse("x^2"))))
    assert same(commutator(A, A), DiffOp(()))


def test_h_p_commutator_coefficients():
    Xf, Y, Z, V = parse("-1 - x^2"), parse("sin(x) + 2"), parse("x^3"), parse("exp(x)")
    H = DiffOp(((2, Xf), (0, V)))
    P = DiffOp(((1, Y), (0, Z)))
    c = commutator(H, P)
    dY, dX = diff(Y), diff(Xf)
    assert approx_equal(c.coeff(2), add(mul(Const(2.0), Xf, dY), mul(Const(-1.0), dX, Y)))
    assert approx_equal(c.coeff(1), mul(Xf, add(diff(dY), mul(Const(2.0), diff(Z)))))
    assert approx_equal(c.coeff(0), add(mul(Xf, diff(diff(Z))), mul(Const(-1.0), Y, diff(V))))


def test_apply_derivative():
    assert approx_equal(apply_symbolic(D, parse("x^2")), parse("2*x"))


def test_apply_needs_bound_energy():
    S = DiffOp(((1, Const(1.0)), (0, Param(ENERGY))))
    with pytest.raises(UnboundEnergyError):
        apply_symbolic(S, parse("x"))


def test_binding():
    A = DiffOp(((1, X),))
    assert A.bind_energy(2.0) == A
    S = DiffOp(((1, Const(1.0)), (0, mul(Param(ENERGY), X))))
    once = S.bind_energy(3.0)
    assert not once.has_energy
    assert once.bind_energy(5.0) == once


def test_reduce_on_shell_harmonic():
    # (D^2) on H psi = E psi with H = -D^2 + x^2 becomes x^2 - E
    H = DiffOp(((2, Const(-1.0)), (0, parse("x^2"))))
    red = reduce_on_shell(derivative(2), H)
    assert red.order == 0
    assert approx_equal(red.coeff(0), parse("x^2 - ENERGY"), binding={ENERGY: 1.3})


# -- algebraic laws on random operators ------------------------------------

coef = st.lists(st.floats(-2, 2, allow_nan=False), min_size=3, max_size=3).map(
    lambda c: add(Const(c[0]), mul(Const(c[1]), X), mul(Const(c[2]), X, X)))
ops = st.lists(st.tuples(st.integers(0, 2), coef), min_size=1, max_size=3).map(
    lambda ts: DiffOp.from_dict({k: c for k, c in ts}))


@settings(max_examples=40, deadline=None)
@given(ops, ops, ops)
def test_jacobi(a, b, c):
    j = (commutator(commutator(a, b), c) + commutator(commutator(b, c), a)
         + commutator(commutator(c, a), b))
    assert same(j, DiffOp(()), tol=1e-9)


@settings(max_examples=40, deadline=None)
@given(ops, ops, ops, st.floats(-3, 3), st.floats(-3, 3))
def test_bilinear(a, b, c, s, t):
    left = commutator(s * a + t * b, c)
    right = s * commutator(a, c) + t * commutator(b, c)
    assert same(left, right, tol=1e-9)


@settings(max_examples=40, deadline=None)
@given(ops, ops)
def test_compose_matches_sequential_application(a, b):
    f = parse("exp(-x^2)*sin(2*x + 1)")
    assert approx_equal(apply_symbolic(compose(a, b), f),
                        apply_symbolic(a, apply_symbolic(b, f)), tol=1e-10)
