"""Ladder systems: the data of ``H = X D^2 + V``, ``P = Y D + Z`` and ``Q``.

The five functions are tied together by

* ``X (Y'' + 2 Z') = alpha Y``
* ``2 X Y' - X' Y = (beta Q + gamma) X``
* ``Q (1 + beta V) = X Z'' - gamma V - alpha Z - Y V'``
* ``X Q' = lambda Y``
* ``-2 lambda Z + X Q'' = nu Q + tau``

which make the commutators close:
``[H, P] = Q (beta H + 1) + alpha P + gamma H`` and
``[H, Q] = 2 lambda P + nu Q + tau``.  Wherever ``H`` multiplies an
operator from the right it is replaced by the ``ENERGY`` slot.
"""
from __future__ import annotations

import math
from collections.abc import Mapping
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from ..diffop import DiffOp, multiplication
from ..expr import (ENERGY, Const, Expr, Param, add, as_expr, evaluate, mul, parse,
                    sqrt, substitute)
from .catalog import CASES, CaseSpec

HARMONIC = "harmonic-like"
POSCHL_TELLER = "poschl-teller-like"
CONST_NAMES = ("alpha", "beta", "gamma", "lambda", "nu", "tau")


class LadderError(ValueError):
    """A ladder system cannot be built from the given data."""


class UnknownCaseError(LadderError):
    pass


class ConstraintViolation(LadderError):
    pass


class DegenerateSystemError(LadderError):
    """The coefficient matrix has a repeated eigenvalue or Q is constant."""


@dataclass(frozen=True)
class CoefMatrix:
    """2x2 matrix with entries ``m0 + m1*H``, stored as ``((m0, m1), ...)``.

    Columns hold the coordinates of ``[H, Q~]`` and ``[H, P~]`` in the basis
    ``(Q~, P~)``.
    """
    m: tuple

    @classmethod
    def from_consts(cls, alpha, beta, lam, nu) -> "CoefMatrix":
        return cls((((nu, 0.0), (1.0, beta)), ((2 * lam, 0.0), (alpha, 0.0))))

    def at(self, energy: float) -> np.ndarray:
        return np.array([[m0 + m1 * energy for m0, m1 in row] for row in self.m])

    def eigenvalues(self, energy: float) -> tuple[float, float]:
        vals = np.linalg.eigvals(self.at(energy))
        vals = np.sort(vals.real)
        return float(vals[0]), float(vals[1])

    def as_lists(self) -> list:
        return [[list(e) for e in row] for row in self.m]


@dataclass(frozen=True)
class LadderSystem:
    case_id: int | str
    X: Expr
    Y: Expr
    Z: Expr
    Q: Expr
    V: Expr
    consts: Mapping[str, float]
    shift_Q: Expr
    shift_P: Expr
    params: Mapping[str, float] = field(default_factory=dict)
    norm: tuple[float, float] = (1.0, 1.0)
    grid_domain: tuple[float, float] | None = None
    sample_domain: tuple[float, float] = (-1.0, 1.0)
    s_comm_closed: Expr | None = None
    psi0_closed: Expr | None = None
    name: str = "custom"

    # scalar constants ------------------------------------------------------

    @property
    def alpha(self) -> float:
        return self.consts["alpha"]

    @property
    def beta(self) -> float:
        return self.consts["beta"]

    @property
    def gamma(self) -> float:
        return self.consts["gamma"]

    @property
    def lam(self) -> float:
        return self.consts["lambda"]

    @property
    def nu(self) -> float:
        return self.consts["nu"]

    @property
    def tau(self) -> float:
        return self.consts["tau"]

    @property
    def klass(self) -> str:
        return HARMONIC if self.beta == 0 else POSCHL_TELLER

    # operators -------------------------------------------------------------

    @cached_property
    def H(self) -> DiffOp:
        return DiffOp(((2, self.X), (0, self.V)))

    @cached_property
    def P(self) -> DiffOp:
        return DiffOp(((1, self.Y), (0, self.Z)))

    @cached_property
    def Qop(self) -> DiffOp:
        return multiplication(self.Q)

    @cached_property
    def M(self) -> CoefMatrix:
        return CoefMatrix.from_consts(self.alpha, self.beta, self.lam, self.nu)

    def discriminant(self, energy: float) -> float:
        """``(nu - alpha)^2 + 8 lambda (1 + beta E)``; the gaps are real iff it is >= 0."""
        return (self.nu - self.alpha) ** 2 + 8 * self.lam * (1 + self.beta * energy)

    @cached_property
    def gaps(self) -> tuple[Expr, Expr]:
        """Eigenvalues ``mu_1 <= mu_2`` of ``M`` as functions of ENERGY."""
        root = self.root
        half = (self.nu + self.alpha) / 2
        return (add(Const(half), mul(Const(-0.5), root)),
                add(Const(half), mul(Const(0.5), root)))

    @cached_property
    def root(self) -> Expr:
        """``sqrt(discriminant(ENERGY))``."""
        E = Param(ENERGY)
        return sqrt(add(Const((self.nu - self.alpha) ** 2 + 8 * self.lam),
                        mul(Const(8 * self.lam * self.beta), E)))

    def _column(self, i: int, root: Expr) -> tuple[Expr, Expr]:
        sign = -0.5 if i == 0 else 0.5
        mu = add(Const((self.nu + self.alpha) / 2), mul(Const(sign), root))
        n = self.norm[i]
        return mul(Const(n / (2 * self.lam)), add(mu, Const(-self.alpha))), Const(n)

    @cached_property
    def U(self) -> tuple[tuple[Expr, Expr], tuple[Expr, Expr]]:
        """Eigenvector matrix of ``M``; column ``i`` gives ``S_i = (Q~, P~) U[:, i]``."""
        c0, c1 = self._column(0, self.root), self._column(1, self.root)
        return ((c0[0], c1[0]), (c0[1], c1[1]))

    @cached_property
    def Q_tilde(self) -> Expr:
        return add(self.Q, self.shift_Q)

    @cached_property
    def P_tilde(self) -> DiffOp:
        return DiffOp(((1, self.Y), (0, add(self.Z, self.shift_P))))

    def shift_operator(self, i: int, energy=None, root=None) -> DiffOp:
        """``S_{i+1}`` with ENERGY replaced by ``energy`` and the square root by ``root``.

        Passing ``root`` explicitly selects a branch; see :meth:`continued`.
        """
        if energy is None:
            shift_q, shift_p = self.shift_Q, self.shift_P
        else:
            e = {ENERGY: as_expr(energy)}
            shift_q, shift_p = substitute(self.shift_Q, e), substitute(self.shift_P, e)
        if root is None:
            root = self.root if energy is None else substitute(self.root, {ENERGY: as_expr(energy)})
        u1, u2 = self._column(i, as_expr(root))
        return DiffOp(((1, mul(u2, self.Y)),
                       (0, add(mul(u1, add(self.Q, shift_q)), mul(u2, self.Z), mul(u2, shift_p)))))

    def continued(self, i: int) -> tuple[Expr, Expr]:
        """``(E + g_i(E), root there)`` with the root continued through the shift.

        When ``nu + alpha = lambda*beta`` (true for every catalog family) the
        discriminant after the shift is the square ``(root -+ 2 lambda beta)^2``
        and the signed value keeps the eigenvector on the same branch.  Otherwise
        the principal root is used.
        """
        E = Param(ENERGY)
        nxt = add(E, self.gaps[i])
        lb = self.lam * self.beta
        if abs(self.nu + self.alpha - lb) <= 1e-12 * (1 + abs(self.nu) + abs(self.alpha) + abs(lb)):
            sign = -1.0 if i == 0 else 1.0
            return nxt, add(self.root, Const(sign * 2 * lb))
        return nxt, substitute(self.root, {ENERGY: nxt})

    @cached_property
    def S1(self) -> DiffOp:
        return self.shift_operator(0)

    @cached_property
    def S2(self) -> DiffOp:
        return self.shift_operator(1)

    def to_dict(self) -> dict:
        from ..diffop import to_string_op
        from ..expr import to_string
        g1, g2 = self.gaps
        out = {
            "case_id": self.case_id,
            "name": self.name,
            "class": self.klass,
            "params": dict(self.params),
            "consts": dict(self.consts),
            "X": to_string(self.X), "Y": to_string(self.Y), "Z": to_string(self.Z),
            "Q": to_string(self.Q), "V": to_string(self.V),
            "H": to_string_op(self.H), "P": to_string_op(self.P),
            "M": self.M.as_lists(),
            "U": [[to_string(e) for e in row] for row in self.U],
            "shift_Q": to_string(self.shift_Q), "shift_P": to_string(self.shift_P),
            "S1": to_string_op(self.S1), "S2": to_string_op(self.S2),
            "g1": to_string(g1), "g2": to_string(g2),
        }
        if self.psi0_closed is not None:
            out["psi0"] = to_string(self.psi0_closed)
        if self.s_comm_closed is not None:
            out["S_commutator"] = to_string(self.s_comm_closed)
        return out


def affine_tilde_shift(alpha, beta, gamma, lam, nu, tau, tol: float = 1e-12) -> tuple[Expr, Expr]:
    """Shifts ``(q, p)`` with ``Q~ = Q + q``, ``P~ = P + p`` making the algebra homogeneous.

    For ``beta = 0`` the shifts are affine in ENERGY; otherwise constant,
    which needs ``q + alpha p = 0`` to hold.
    """
    E = Param(ENERGY)
    if beta == 0:
        det = 2 * lam - nu * alpha
        if abs(det) <= tol * (1 + abs(2 * lam) + abs(nu * alpha)):
            raise DegenerateSystemError("2*lambda - nu*alpha = 0: no affine shift exists")
        q = add(mul(Const(2 * lam * gamma / det), E), Const(-alpha * tau / det))
        p = add(mul(Const(-nu * gamma / det), E), Const(tau / det))
        return q, p
    q = gamma / beta
    p = (tau - nu * q) / (2 * lam)
    if abs(q + alpha * p) > 1e-9 * (1 + abs(q) + abs(alpha * p)):
        raise ConstraintViolation("no constant shift homogenises the algebra "
                                  f"(q + alpha*p = {q + alpha * p!r})")
    return Const(q), Const(p)


def make_system(X, Y, Z, Q, V, consts: Mapping[str, float], *, sample_domain=(-1.0, 1.0),
                grid_domain=None, shift_Q=None, shift_P=None, norm=(1.0, 1.0),
                case_id: int | str = "custom", name: str = "custom",
                params: Mapping[str, float] | None = None,
                s_comm_closed=None, psi0_closed=None) -> LadderSystem:
    """Assemble a system from x-only expressions (strings are parsed)."""
    missing = [n for n in CONST_NAMES if n not in consts]
    if missing:
        raise LadderError(f"missing constants: {', '.join(missing)}")
    c = {n: float(v) for n, v in consts.items()}
    if c["lambda"] == 0:
        raise DegenerateSystemError("lambda = 0 makes Q constant")
    if shift_Q is None or shift_P is None:
        shift_Q, shift_P = affine_tilde_shift(c["alpha"], c["beta"], c["gamma"],
                                              c["lambda"], c["nu"], c["tau"])
    if c["beta"] == 0 and c["alpha"] ** 2 + 2 * c["lambda"] <= 0:
        raise DegenerateSystemError("alpha^2 + 2*lambda <= 0: gaps are not real and distinct")
    return LadderSystem(case_id=case_id, X=as_expr(X), Y=as_expr(Y), Z=as_expr(Z),
                        Q=as_expr(Q), V=as_expr(V), consts=c,
                        shift_Q=as_expr(shift_Q), shift_P=as_expr(shift_P),
                        params=dict(params or {}), norm=tuple(float(n) for n in norm),
                        grid_domain=grid_domain, sample_domain=tuple(sample_domain),
                        s_comm_closed=s_comm_closed, psi0_closed=psi0_closed, name=name)


def case_params(case_id: int, params: Mapping[str, float] | None = None) -> dict[str, float]:
    """Defaults of ``case_id`` overridden by ``params`` (unknown names are rejected)."""
    spec = get_case(case_id)
    merged = dict(spec.defaults)
    for name, value in (params or {}).items():
        if name not in merged:
            raise LadderError(f"case {case_id} has no parameter {name!r}; "
                              f"expected one of {sorted(merged)}")
        merged[name] = float(value)
    return merged


def get_case(case_id) -> CaseSpec:
    try:
        return CASES[int(case_id)]
    except (KeyError, ValueError, TypeError):
        raise UnknownCaseError(f"unknown case {case_id!r}; choose 1..6") from None


def _validate(case_id: int, p: dict) -> None:
    if p["lambda"] == 0:
        raise DegenerateSystemError("lambda = 0 makes Q constant")
    if case_id in (3, 4):
        k = p["c1"] + p["alpha"] * p["c2"]
        if abs(k) > 1e-12 * (1 + abs(p["c1"]) + abs(p["alpha"] * p["c2"])):
            raise ConstraintViolation(f"case {case_id} needs c1 + alpha*c2 = 0, got {k!r}")
    else:
        r2 = p["alpha"] ** 2 + 2 * p["lambda"]
        if r2 < 0:
            raise LadderError("alpha^2 + 2*lambda < 0: imaginary gap")
        if r2 == 0:
            raise DegenerateSystemError("alpha^2 + 2*lambda = 0: degenerate gaps")
    if case_id == 3 and not (p["a"] > 0 and p["b"] > 0 and p["c"] != 0):
        raise LadderError("case 3 needs a > 0, b > 0 and c != 0")
    if case_id == 3 and p["c"] < 0:
        raise LadderError("case 3 needs c > 0 (c -> -c is the same family with a, b swapped)")
    if case_id == 4 and not (p["k"] > 0 and p["a"] ** 2 + p["b"] ** 2 > 0):
        raise LadderError("case 4 needs k > 0 and a^2 + b^2 > 0")
    if case_id == 6 and p["c"] == 0:
        raise LadderError("case 6 needs c != 0")


def random_params(case_id: int, rng: np.random.Generator) -> dict[str, float]:
    """An admissible parameter draw for ``case_id`` (bound states exist)."""
    spec = get_case(case_id)
    u = rng.uniform
    p = {"alpha": u(-1.0, 1.0), "lambda": u(0.3, 2.0), "c1": u(-1.0, 1.0),
         "c2": u(-1.0, 1.0), "c3": u(0.5, 3.0)}
    if spec.case_id in (3, 4):
        p["c1"] = -p["alpha"] * p["c2"]
        p.update(a=u(0.5, 2.0), b=u(0.5, 2.0))
        p["c" if spec.case_id == 3 else "k"] = u(0.5, 1.5)
    if spec.case_id == 3:
        p["c3"] = u(-30.0, -5.0)
    if spec.case_id == 6:
        p["c"] = u(0.5, 1.5)
    return p


def build_case(case_id: int, params: Mapping[str, float] | None = None,
               check: bool = True) -> LadderSystem:
    """Instantiate catalog family ``case_id``; missing parameters take defaults."""
    spec = get_case(case_id)
    p = case_params(spec.case_id, params)
    _validate(spec.case_id, p)
    values = dict(p)
    if p["alpha"] ** 2 + 2 * p["lambda"] > 0:
        values["r"] = math.sqrt(p["alpha"] ** 2 + 2 * p["lambda"])

    def inst(template: str) -> Expr:
        return substitute(parse(template), values)

    consts = {n: float(evaluate(inst(getattr(spec, n)), 0.0)) for n in ("beta", "gamma", "nu", "tau")}
    consts["alpha"] = p["alpha"]
    consts["lambda"] = p["lambda"]
    for name in ("c1", "c2", "c3", "c4"):
        consts[name] = p[name]
    norm = tuple(float(evaluate(inst(t), 0.0)) for t in spec.norm)
    system = make_system(
        inst(spec.X), inst(spec.Y), inst(spec.Z), inst(spec.Q), inst(spec.V), consts,
        sample_domain=spec.sample_domain(p), grid_domain=spec.grid_domain(p),
        shift_Q=inst(spec.shift_Q), shift_P=inst(spec.shift_P), norm=norm,
        case_id=spec.case_id, name=spec.name, params=p,
        s_comm_closed=inst(spec.s_commutator), psi0_closed=inst(spec.psi0),
    )
    if check:
        from .checks import check_constraints
        report = check_constraints(system)
        if not report.passed:
            raise ConstraintViolation(f"case {case_id} fails its constraints: {report.residuals}")
    return system


def perturbed(system: LadderSystem, **changes) -> LadderSystem:
    """Copy of ``system`` with fields replaced and no validation (for negative tests)."""
    from dataclasses import replace
    fields = dict(changes)
    if "consts" in fields:
        fields["consts"] = {**system.consts, **fields["consts"]}
    return replace(system, **fields)
