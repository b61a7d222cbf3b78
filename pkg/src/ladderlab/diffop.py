"""Finite-order differential operators with expression coefficients.

A :class:`DiffOp` is ``sum_k c_k(x) D^k`` with ``D = d/dx`` acting to the
right.  Coefficients may contain the reserved parameter ``ENERGY``; such an
operator stands for one whose coefficients depend on the Hamiltonian and is
only meaningful once ``ENERGY`` is bound to the eigenvalue of the state it
acts on (see :meth:`DiffOp.bind_energy`).
"""
from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass
from math import comb

import numpy as np

from .expr import (ENERGY, ONE, ZERO, Const, Expr, ExprError, Param, add,
                   as_expr, diff_n, div, evaluate, free_params, mul, neg,
                   residual_profile, substitute, to_string)


class UnboundEnergyError(ExprError):
    """An operator with an ENERGY slot was applied without binding it."""


def _clean(terms) -> tuple:
    merged: dict[int, Expr] = {}
    for order, coeff in terms:
        if order < 0:
            raise ValueError("negative derivative order")
        coeff = as_expr(coeff)
        merged[order] = add(merged[order], coeff) if order in merged else coeff
    return tuple((k, merged[k]) for k in sorted(merged, reverse=True) if merged[k] != ZERO)


@dataclass(frozen=True)
class DiffOp:
    terms: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "terms", _clean(self.terms))

    @classmethod
    def from_dict(cls, coeffs: Mapping[int, Expr | float | str]) -> "DiffOp":
        return cls(tuple(coeffs.items()))

    @property
    def order(self) -> int:
        return self.terms[0][0] if self.terms else 0

    def coeff(self, k: int) -> Expr:
        for order, c in self.terms:
            if order == k:
                return c
        return ZERO

    def as_dict(self) -> dict[int, Expr]:
        return dict(self.terms)

    @property
    def has_energy(self) -> bool:
        return any(ENERGY in free_params(c) for _, c in self.terms)

    def free_params(self) -> set[str]:
        out: set[str] = set()
        for _, c in self.terms:
            out |= free_params(c)
        return out

    # algebra ---------------------------------------------------------------

    def __add__(self, other: "DiffOp") -> "DiffOp":
        return DiffOp(self.terms + other.terms)

    def __sub__(self, other: "DiffOp") -> "DiffOp":
        return self + (-other)

    def __neg__(self) -> "DiffOp":
        return DiffOp(tuple((k, neg(c)) for k, c in self.terms))

    def __rmul__(self, f) -> "DiffOp":
        """``f * A``: left multiplication by a function or scalar."""
        f = as_expr(f)
        return DiffOp(tuple((k, mul(f, c)) for k, c in self.terms))

    def __matmul__(self, other: "DiffOp") -> "DiffOp":
        return compose(self, other)

    def map_coeffs(self, fn) -> "DiffOp":
        return DiffOp(tuple((k, fn(c)) for k, c in self.terms))

    def subs(self, values: Mapping[str, Expr | float]) -> "DiffOp":
        return self.map_coeffs(lambda c: substitute(c, values))

    def bind_energy(self, energy: float | Expr) -> "DiffOp":
        """Replace every ENERGY occurrence by ``energy``."""
        return bind_energy(self, energy)

    def __str__(self) -> str:
        return to_string_op(self)


def identity() -> DiffOp:
    return DiffOp(((0, ONE),))


def derivative(n: int = 1) -> DiffOp:
    return DiffOp(((n, ONE),))


def multiplication(f) -> DiffOp:
    return DiffOp(((0, as_expr(f)),))


def compose(a: DiffOp, b: DiffOp) -> DiffOp:
    """Operator product ``a∘b`` via the Leibniz rule."""
    out = []
    for m, f in a.terms:
        for n, g in b.terms:
            dg = g
            for j in range(m + 1):
                if j:
                    dg = diff_n(dg, 1)
                if dg == ZERO:
                    break
                out.append((m + n - j, mul(Const(float(comb(m, j))), f, dg)))
    return DiffOp(tuple(out))


def commutator(a: DiffOp, b: DiffOp) -> DiffOp:
    return compose(a, b) - compose(b, a)


def bind_energy(op: DiffOp, energy: float | Expr) -> DiffOp:
    return op.subs({ENERGY: as_expr(energy)})


def apply_symbolic(op: DiffOp, psi: Expr) -> Expr:
    """``sum_k c_k * psi^(k)``; ENERGY must already be bound."""
    if op.has_energy:
        raise UnboundEnergyError("operator has an unbound ENERGY slot")
    return add(*(mul(c, diff_n(psi, k)) for k, c in op.terms))


def reduce_on_shell(op: DiffOp, hamiltonian: DiffOp, energy: Expr | float = Param(ENERGY)) -> DiffOp:
    """Remainder of ``op`` modulo ``H - E``.

    ``hamiltonian`` must be second order.  The result has order <= 1 and
    agrees with ``op`` on every solution of ``H psi = E psi``.
    """
    if hamiltonian.order != 2:
        raise ValueError("on-shell reduction needs a second-order Hamiltonian")
    lead = hamiltonian.coeff(2)
    shifted = hamiltonian - multiplication(energy)
    while op.order >= 2:
        m = op.order
        k = DiffOp(((m - 2, div(op.coeff(m), lead)),))
        op = op - compose(k, shifted)
        # the leading term cancels exactly; drop the symbolic remnant
        op = DiffOp(tuple(t for t in op.terms if t[0] != m))
    return op


def to_string_op(op: DiffOp) -> str:
    if not op.terms:
        return "0"
    parts = []
    for k, c in op.terms:
        parts.append(f"({to_string(c)})*D^{k}")
    return " + ".join(parts)


def coefficient_residuals(a: DiffOp, b: DiffOp, points,
                          binding: Mapping[str, float] | None = None) -> dict[int, float]:
    """Max relative coefficient mismatch per derivative order."""
    orders = sorted({k for k, _ in a.terms} | {k for k, _ in b.terms}, reverse=True)
    pts = np.asarray(points, dtype=float)
    return {k: float(np.max(residual_profile(a.coeff(k), b.coeff(k), pts, binding)))
            for k in orders}


def evaluate_coeffs(op: DiffOp, x, binding: Mapping[str, float] | None = None) -> dict[int, np.ndarray]:
    return {k: np.broadcast_to(evaluate(c, x, binding), np.shape(x)) for k, c in op.terms}
