"""Ground states from ``S1 psi0 = 0`` and the T(x) eigenproblem transformation."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.integrate import cumulative_simpson

from ..diffop import DiffOp, apply_symbolic
from ..expr import (ENERGY, Const, DomainError, Expr, add, as_expr, diff_n, evaluate, mul,
                    neg, residual_profile, sample_points, substitute)
from ..numerics import Grid, solve_spectrum
from .catalog import CASES
from .system import LadderError, LadderSystem


class NoNormalizableGroundState(LadderError):
    pass


@dataclass(frozen=True)
class E0Candidate:
    label: str
    energy: float
    annihilation_residual: float
    normalizable: bool
    eigen_residual: float = math.inf
    grid_distance: float | None = None
    physical: bool = False

    def as_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass(frozen=True)
class GroundState:
    psi0: Expr
    E0: float
    E0_candidates: tuple
    E0_equation: str
    grid_E0: float | None
    constants: dict = field(default_factory=dict)
    x: np.ndarray = field(default_factory=lambda: np.empty(0))
    psi_numeric: np.ndarray = field(default_factory=lambda: np.empty(0))

    def as_dict(self) -> dict:
        from ..expr import to_string
        return {"psi0": to_string(self.psi0), "E0": self.E0, "grid_E0": self.grid_E0,
                "E0_equation": self.E0_equation, "constants": dict(self.constants),
                "candidates": [c.as_dict() for c in self.E0_candidates]}


def _annihilation_residual(sys: LadderSystem, psi: Expr, energy: float, pts) -> float:
    """max |S1 psi| / (|s1 psi'| + |s0 psi| + tiny) over ``pts``."""
    s1 = sys.S1.bind_energy(energy)
    try:
        out = evaluate(apply_symbolic(s1, psi), pts)
        scale = sum(np.abs(evaluate(mul(c, diff_n(psi, k)), pts)) for k, c in s1.terms)
    except DomainError:
        return math.inf
    return float(np.max(np.abs(out) / (scale + 1e-300)))


def _eigen_residual(sys: LadderSystem, psi: Expr, energy: float, pts) -> float:
    try:
        return float(np.max(residual_profile(apply_symbolic(sys.H, psi),
                                             mul(Const(energy), psi), pts)))
    except DomainError:
        return math.inf


def _normalizable(psi: Expr, grid: Grid) -> bool:
    """``psi`` decays towards both ends of the truncated domain."""
    x = grid.interior  # endpoints may sit on a zero of Y
    try:
        v = np.abs(evaluate(psi, x))
    except DomainError:
        return False
    if not np.all(np.isfinite(v)) or np.max(v) == 0:
        return False
    k = max(2, len(x) // 100)
    top = np.max(v)
    return bool(v[0] <= v[k] and v[-1] <= v[-1 - k] and v[0] < 1e-2 * top and v[-1] < 1e-2 * top)


def case_constants(sys: LadderSystem) -> dict:
    """Derived integration constants of the closed-form ground states.

    Case 1: ``psi0 = exp(B1 x^2/2 + B2 x)``.
    Case 2: ``psi0 = x^(-(B2 E0 + B3)) exp(-B1 x^2/2)``.
    """
    p = sys.params
    if sys.case_id not in (1, 2):
        return {}
    r = math.sqrt(p["alpha"] ** 2 + 2 * p["lambda"])
    if sys.case_id == 1:
        return {"B1": -r / 2, "B2": (p["c1"] + p["alpha"] * p["c2"]) / r}
    k2 = p["c1"] + p["alpha"] * p["c2"] - p["alpha"] / 2
    return {"B1": r / 4, "B2": -2 / r, "B3": 0.5 - k2 / r}


def numeric_ground_state(sys: LadderSystem, E0: float, grid: Grid) -> np.ndarray:
    """Solve ``S1 psi = 0`` as ``psi'/psi = -s0/s1`` on the interior; normalised with weight 1/(-X)."""
    s1 = sys.S1.bind_energy(E0)
    x = grid.x
    xi = grid.interior
    logd = -evaluate(s1.coeff(0), xi) / evaluate(s1.coeff(1), xi)
    log_psi = cumulative_simpson(logd, x=xi, initial=0.0)
    log_psi -= np.max(log_psi)
    psi = np.zeros_like(x)
    psi[1:-1] = np.exp(log_psi)
    w = 1.0 / -evaluate(sys.X, xi)
    psi[1:-1] /= math.sqrt(np.sum(psi[1:-1] ** 2 * w) * grid.h)
    return psi


def ground_state(sys: LadderSystem, grid: Grid | None = None, n: int = 4001,
                 samples: int = 50, seed: int = 0, tol: float = 1e-9) -> GroundState:
    """Closed-form ground state of a catalog system with the physical E0 root selected.

    Every root of the E0 equation is tested for ``S1 psi0 = 0``, for
    ``H psi0 = E0 psi0`` (relative residuals below ``tol``) and for decay at
    both domain ends; among the survivors the one closest to the lowest grid
    eigenvalue is physical.
    """
    if not isinstance(sys.case_id, int) or sys.psi0_closed is None:
        raise LadderError("closed-form ground states exist only for catalog systems")
    spec = CASES[sys.case_id]
    grid = grid or Grid(*sys.grid_domain, n)
    pts = sample_points(sys.sample_domain, samples, seed)
    grid_E0 = float(solve_spectrum(sys.H, grid, 1).energies[0])
    cands = []
    for label, energy in spec.ground_roots(dict(sys.params)):
        psi = substitute(sys.psi0_closed, {ENERGY: energy})
        res = _annihilation_residual(sys, psi, energy, pts)
        cands.append(E0Candidate(label, float(energy), res, _normalizable(psi, grid),
                                 _eigen_residual(sys, psi, energy, pts), abs(energy - grid_E0)))
    valid = [c for c in cands
             if c.annihilation_residual < tol and c.normalizable and c.eigen_residual < tol]
    if not valid:
        raise NoNormalizableGroundState(
            f"case {sys.case_id}: no root gives a normalizable zero mode of S1 "
            f"(candidates: {[(c.label, c.energy) for c in cands]})")
    best = min(valid, key=lambda c: c.grid_distance)
    cands = tuple(replace(c, physical=c is best) for c in cands)
    psi0 = substitute(sys.psi0_closed, {ENERGY: best.energy})
    return GroundState(psi0, best.energy, cands, spec.E0_equation, grid_E0,
                       case_constants(sys), grid.x, numeric_ground_state(sys, best.energy, grid))


def transform_eigenproblem(R, T, E: float, domain: tuple[float, float] | None = None,
                           samples: int = 200) -> DiffOp:
    """``H' = -T D^2 + T (R - E)``.

    ``H' psi = -psi`` holds exactly when ``(-D^2 + R + 1/T) psi = E psi``.
    ``T`` must not vanish on ``domain``; that is checked on a dense sample.
    """
    R, T = as_expr(R), as_expr(T)
    if domain is not None:
        x = np.linspace(domain[0], domain[1], samples)
        try:
            t = evaluate(T, x)
        except DomainError as err:
            raise ValueError(f"T is not finite on {domain}: {err}") from err
        t = np.broadcast_to(t, x.shape)
        if np.any(t == 0) or np.any(np.sign(t[1:]) != np.sign(t[:-1])):
            i = int(np.argmax((t[:-1] == 0) | (np.sign(t[1:]) != np.sign(t[:-1]))))
            raise ValueError(f"T vanishes in the domain near x={x[i]!r}")
    return DiffOp(((2, neg(T)), (0, mul(T, add(R, Const(-float(E)))))))
