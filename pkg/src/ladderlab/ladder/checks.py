"""Numerical verification of ladder systems.

Every check samples points on the system's ``sample_domain`` with a fixed
seed and compares two sides with the relative metric
``|a - b| / (1 + max(|a|, |b|))``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..diffop import (DiffOp, apply_symbolic, commutator, compose, coefficient_residuals,
                      identity, multiplication, reduce_on_shell)
from ..expr import (ENERGY, X, Const, Expr, Param, add, diff, exp, mul, residual_profile,
                    sample_points, sin)
from .system import LadderSystem

CONSTRAINT_TOL = 1e-9


@dataclass(frozen=True)
class ConstraintReport:
    residuals: dict
    tol: float

    @property
    def passed(self) -> bool:
        return all(v < self.tol for v in self.residuals.values())

    @property
    def failures(self) -> list[str]:
        return [k for k, v in self.residuals.items() if not v < self.tol]

    def as_dict(self) -> dict:
        return {"residuals": dict(self.residuals), "tol": self.tol, "passed": self.passed}


def constraint_sides(sys: LadderSystem) -> dict[str, tuple[Expr, Expr]]:
    """Left and right sides of the five defining constraints."""
    Xf, Y, Z, Q, V = sys.X, sys.Y, sys.Z, sys.Q, sys.V
    a, b, g, lam, nu, tau = (Const(sys.consts[n]) for n in
                             ("alpha", "beta", "gamma", "lambda", "nu", "tau"))
    dY, dZ, dV, dQ, dX = diff(Y), diff(Z), diff(V), diff(Q), diff(Xf)
    return {
        "e1": (mul(Xf, add(diff(dY), mul(Const(2.0), dZ))), mul(a, Y)),
        "e2": (add(mul(Const(2.0), Xf, dY), mul(Const(-1.0), dX, Y)), mul(add(mul(b, Q), g), Xf)),
        "e3": (mul(Q, add(Const(1.0), mul(b, V))),
               add(mul(Xf, diff(dZ)), mul(-g, V), mul(-a, Z), mul(Const(-1.0), Y, dV))),
        "e4": (mul(Xf, dQ), mul(lam, Y)),
        "e5": (add(mul(Const(-2.0), lam, Z), mul(Xf, diff(dQ))), add(mul(nu, Q), tau)),
    }


def check_constraints(sys: LadderSystem, samples: int = 50, seed: int = 0,
                      tol: float = CONSTRAINT_TOL) -> ConstraintReport:
    """Max residual of each constraint; passes iff all are below ``tol``."""
    pts = sample_points(sys.sample_domain, samples, seed)
    res = {name: float(np.max(residual_profile(lhs, rhs, pts)))
           for name, (lhs, rhs) in constraint_sides(sys).items()}
    return ConstraintReport(res, tol)


# ----------------------------------------------------------------------------
# commutator relations


def random_test_function(rng: np.random.Generator) -> Expr:
    """Smooth function ``(p0 + p1 x + p2 x^2) exp(-s x^2) + q sin(k x + phi)``."""
    p0, p1, p2, q = rng.uniform(-1, 1, 4)
    s = rng.uniform(0.05, 0.3)
    k, phi = rng.uniform(0.5, 2.0), rng.uniform(0, np.pi)
    poly = add(Const(p0), mul(Const(p1), X), mul(Const(p2), X, X))
    return add(mul(poly, exp(mul(Const(-s), X, X))),
               mul(Const(q), sin(add(mul(Const(k), X), Const(phi)))))


@dataclass(frozen=True)
class AlgebraReport:
    hq_residual: float
    hp_residual: float
    hp_pointwise: float
    tol: float
    pointwise_tol: float

    @property
    def passed(self) -> bool:
        return (self.hq_residual < self.tol and self.hp_residual < self.tol
                and self.hp_pointwise < self.pointwise_tol)

    def as_dict(self) -> dict:
        return {"HQ": self.hq_residual, "HP": self.hp_residual,
                "HP_test_functions": self.hp_pointwise, "passed": self.passed}


def _max(d: dict) -> float:
    return max(d.values()) if d else 0.0


def algebra_relations(sys: LadderSystem, samples: int = 50, seed: int = 0,
                      tol: float = 1e-9, n_test: int = 20,
                      pointwise_tol: float = 1e-8) -> AlgebraReport:
    """Verify ``[H, Q]`` and ``[H, P]`` against their closed forms.

    Both are compared coefficient by coefficient.  ``[H, P]`` is also applied
    to ``n_test`` random smooth functions, with ``Q beta H`` evaluated by
    letting ``H`` act on the test function first.
    """
    pts = sample_points(sys.sample_domain, samples, seed)
    H, P, Qop = sys.H, sys.P, sys.Qop
    a, b, g, lam, nu, tau = (sys.consts[n] for n in ("alpha", "beta", "gamma", "lambda", "nu", "tau"))

    hq_rhs = (2 * lam) * P + nu * Qop + tau * identity()
    hq = _max(coefficient_residuals(commutator(H, Qop), hq_rhs, pts))

    hp_lhs = commutator(H, P)
    hp_rhs = b * compose(Qop, H) + Qop + a * P + g * H
    hp = _max(coefficient_residuals(hp_lhs, hp_rhs, pts))

    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_test):
        f = random_test_function(rng)
        Hf, Pf = apply_symbolic(H, f), apply_symbolic(P, f)
        lhs = add(apply_symbolic(H, Pf), mul(Const(-1.0), apply_symbolic(P, Hf)))
        rhs = add(mul(sys.Q, add(mul(Const(b), Hf), f)), mul(Const(a), Pf), mul(Const(g), Hf))
        worst = max(worst, float(np.max(residual_profile(lhs, rhs, pts))))
    return AlgebraReport(hq, hp, worst, tol, pointwise_tol)


# ----------------------------------------------------------------------------
# shift operators


def probe_energies(sys: LadderSystem, count: int = 5) -> list[float]:
    """Energies where the gap functions are real on both sides of a shift.

    For ``beta != 0`` probes keep ``sqrt(disc) > 2 |beta lambda|`` so that the
    shifted discriminant stays positive too.
    """
    if sys.beta == 0:
        return [float(e) for e in np.linspace(0.5, 3.0, count)]
    edge = 2 * abs(sys.beta * sys.lam)
    roots = edge + np.linspace(0.5, 4.5, count)
    base = (sys.nu - sys.alpha) ** 2 + 8 * sys.lam
    return [float((s * s - base) / (8 * sys.lam * sys.beta)) for s in roots]


@dataclass(frozen=True)
class ShiftReport:
    energies: tuple
    residuals: tuple  # (S1, S2) worst on-shell mismatch
    tol: float

    @property
    def passed(self) -> bool:
        return all(r < self.tol for r in self.residuals)

    def as_dict(self) -> dict:
        return {"S1": self.residuals[0], "S2": self.residuals[1], "passed": self.passed}


def _worst_on_shell(a: DiffOp, b: DiffOp, pts, energies) -> float:
    return max(_max(coefficient_residuals(a, b, pts, {ENERGY: e})) for e in energies)


def ladder_identities(sys: LadderSystem, energies=None, samples: int = 50, seed: int = 0,
                      tol: float = 1e-9) -> ShiftReport:
    """Check ``H S_i = S_i (H + g_i(H))`` on eigenstates of ``H``.

    Both sides act on a solution of ``H psi = E psi``; they are reduced modulo
    ``H - E`` and compared coefficient-wise at each probe energy.
    """
    energies = probe_energies(sys) if energies is None else list(energies)
    pts = sample_points(sys.sample_domain, samples, seed)
    out = []
    for S, g in ((sys.S1, sys.gaps[0]), (sys.S2, sys.gaps[1])):
        lhs = reduce_on_shell(compose(sys.H, S), sys.H)
        rhs = reduce_on_shell(compose(multiplication(add(Param(ENERGY), g)), S), sys.H)
        out.append(_worst_on_shell(lhs, rhs, pts, energies))
    return ShiftReport(tuple(energies), tuple(out), tol)


def shift_operators(sys: LadderSystem) -> tuple[DiffOp, DiffOp, Expr, Expr]:
    """``(S1, S2, g1, g2)`` with ``[H, S_i] = S_i g_i(H)``."""
    return sys.S1, sys.S2, sys.gaps[0], sys.gaps[1]


def _after(sys: LadderSystem, apply: int, first: int) -> DiffOp:
    """``S_apply`` acting on the output of ``S_first`` (energy and root continued)."""
    energy, root = sys.continued(first)
    return sys.shift_operator(apply, energy, root)


def s_commutator_parts(sys: LadderSystem) -> tuple[DiffOp, DiffOp]:
    """On-shell ``S1 S2`` and ``S2 S1``, each reduced modulo ``H - ENERGY``."""
    a = reduce_on_shell(compose(_after(sys, 0, 1), sys.S2), sys.H)
    b = reduce_on_shell(compose(_after(sys, 1, 0), sys.S1), sys.H)
    return a, b


def on_shell_s_commutator(sys: LadderSystem) -> DiffOp:
    """``[S1, S2]`` acting on an eigenstate of energy ENERGY, reduced to order <= 1."""
    a, b = s_commutator_parts(sys)
    return a - b


@dataclass(frozen=True)
class SCommutatorReport:
    closed_form: Expr | None
    computed: DiffOp
    energies: tuple
    residual: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.closed_form is not None and self.residual < self.tol

    def as_dict(self) -> dict:
        from ..expr import to_string
        return {"closed_form": None if self.closed_form is None else to_string(self.closed_form),
                "energies": list(self.energies), "residual": self.residual,
                "passed": self.passed}


def s_commutator(sys: LadderSystem, energies=None, closed_form: Expr | None = None,
                 samples: int = 50, seed: int = 0, tol: float = 1e-8) -> SCommutatorReport:
    """Compare the engine's ``[S1, S2]`` with a closed form in ENERGY.

    ``closed_form`` defaults to the catalog expression.  The comparison binds
    ENERGY at each of ``energies`` (eigenvalues, ideally).
    """
    closed = sys.s_comm_closed if closed_form is None else closed_form
    energies = probe_energies(sys) if energies is None else list(energies)
    lhs, rhs = s_commutator_parts(sys)
    computed = lhs - rhs
    if closed is None:
        return SCommutatorReport(None, computed, tuple(energies), float("inf"), tol)
    pts = sample_points(sys.sample_domain, samples, seed)
    rhs = rhs + multiplication(closed)
    res = _worst_on_shell(lhs, rhs, pts, energies)
    return SCommutatorReport(closed, computed, tuple(energies), res, tol)
