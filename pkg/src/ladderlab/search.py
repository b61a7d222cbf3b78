"""Search for solvable potentials from an (X, Y) ansatz.

Z, Q and V are expanded in user-supplied bases.  For fixed ``alpha``,
``beta`` and ``nu`` the constraints are linear in everything else:
the first, second, fourth and fifth fix the Z and Q coefficients together
with ``gamma`` and ``tau``, after which the third fixes the V coefficients.
Those inner solves are plain least squares; the three outer scalars are
found by Levenberg-Marquardt with seeded restarts.  ``lambda`` is a gauge
(rescaling Q) and is pinned to 1 unless the ansatz fixes it.
"""
from __future__ import annotations

import json
import math
from collections.abc import Mapping
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import least_squares

from .expr import (Const, DomainError, Expr, ExprError, add, as_expr, diff, evaluate, mul,
                   parse, substitute, to_string)
from .ladder import (CASES, ConstraintViolation, LadderError, LadderSystem, build_case,
                     make_system)

SCALARS = ("alpha", "beta", "gamma", "lambda", "nu", "tau")
OUTER = ("alpha", "beta", "nu")
CONSTRAINTS = ("e1", "e2", "e3", "e4", "e5")
DEFAULT_DOMAIN = (0.3, 1.7)
SNAP = 1e-6


class AnsatzError(ValueError):
    pass


class SingularPointError(ArithmeticError):
    def __init__(self, point: float):
        super().__init__(f"1 + beta*V vanishes at x={point!r}")
        self.point = point


class CaseNotFound(LookupError):
    pass


@dataclass(frozen=True)
class Ansatz:
    X: Expr
    Y: Expr
    Z_basis: tuple
    Q_basis: tuple
    V_basis: tuple
    fixed: Mapping[str, float] = field(default_factory=dict)
    domain: tuple[float, float] = DEFAULT_DOMAIN

    def __post_init__(self):
        for name in ("Z_basis", "Q_basis", "V_basis"):
            if not getattr(self, name):
                raise AnsatzError(f"{name} must be non-empty")
        if not self.domain[1] > self.domain[0]:
            raise AnsatzError("domain must satisfy a < b")

    @property
    def sizes(self) -> tuple[int, int, int]:
        return len(self.Z_basis), len(self.Q_basis), len(self.V_basis)

    def points(self, count: int = 40) -> np.ndarray:
        """Chebyshev points of the first kind mapped into the domain."""
        a, b = self.domain
        k = np.arange(count)
        t = np.cos((2 * k + 1) * np.pi / (2 * count))[::-1]
        return 0.5 * (a + b) + 0.5 * (b - a) * t

    def to_dict(self) -> dict:
        return {"X": to_string(self.X), "Y": to_string(self.Y),
                "Z_basis": [to_string(e) for e in self.Z_basis],
                "Q_basis": [to_string(e) for e in self.Q_basis],
                "V_basis": [to_string(e) for e in self.V_basis],
                "fixed": dict(self.fixed), "domain": list(self.domain)}


def make_ansatz(X, Y, Z_basis, Q_basis, V_basis, fixed=None, domain=None) -> Ansatz:
    """Parse strings, then bind every fixed value that names a shape parameter."""
    fixed = {k: float(v) for k, v in (fixed or {}).items()}
    shape = {k: v for k, v in fixed.items() if k not in SCALARS}

    def prep(e):
        return substitute(as_expr(e), shape)

    try:
        return Ansatz(prep(X), prep(Y), tuple(prep(e) for e in Z_basis),
                      tuple(prep(e) for e in Q_basis), tuple(prep(e) for e in V_basis),
                      fixed, tuple(float(v) for v in (domain or DEFAULT_DOMAIN)))
    except ExprError as err:
        raise AnsatzError(str(err)) from err


def load_ansatz(source) -> Ansatz:
    """Ansatz from a JSON file path, JSON text or an already decoded mapping."""
    if isinstance(source, Mapping):
        data = source
    else:
        text = Path(source).read_text() if not str(source).lstrip().startswith("{") else str(source)
        try:
            data = json.loads(text)
        except json.JSONDecodeError as err:
            raise AnsatzError(f"ansatz is not valid JSON: {err}") from err
    if not isinstance(data, Mapping):
        raise AnsatzError("ansatz must be a JSON object")
    for key in ("X", "Y", "Z_basis", "Q_basis", "V_basis"):
        if key not in data:
            raise AnsatzError(f"ansatz is missing field {key!r}")
    for key in ("Z_basis", "Q_basis", "V_basis"):
        if not isinstance(data[key], list) or not all(isinstance(s, str) for s in data[key]):
            raise AnsatzError(f"{key} must be a list of expression strings")
    if not isinstance(data["X"], str) or not isinstance(data["Y"], str):
        raise AnsatzError("X and Y must be expression strings")
    fixed = data.get("fixed", {}) or {}
    if not isinstance(fixed, Mapping):
        raise AnsatzError("fixed must be an object of name -> number")
    try:
        fixed = {str(k): float(v) for k, v in fixed.items()}
    except (TypeError, ValueError) as err:
        raise AnsatzError(f"fixed values must be numbers: {err}") from err
    domain = data.get("domain")
    if domain is not None and (not isinstance(domain, list) or len(domain) != 2):
        raise AnsatzError("domain must be a two-element list")
    return make_ansatz(data["X"], data["Y"], data["Z_basis"], data["Q_basis"],
                       data["V_basis"], fixed, domain)


# ----------------------------------------------------------------------------
# residuals


@dataclass(frozen=True)
class _Columns:
    """Basis functions and derivatives sampled at the collocation points."""
    X: np.ndarray
    dX: np.ndarray
    Y: np.ndarray
    dY: np.ndarray
    d2Y: np.ndarray
    Z: tuple  # (value, d1, d2) arrays of shape (points, basis)
    Q: tuple
    V: tuple


def _sample(basis, pts) -> tuple:
    cols = []
    for order in range(3):
        mat = np.empty((len(pts), len(basis)))
        for j, e in enumerate(basis):
            for _ in range(order):
                e = diff(e)
            mat[:, j] = np.broadcast_to(evaluate(e, pts), pts.shape)
        cols.append(mat)
    return tuple(cols)


def _columns(ans: Ansatz, pts: np.ndarray) -> _Columns:
    ev = lambda e: np.broadcast_to(evaluate(e, pts), pts.shape)  # noqa: E731
    try:
        return _Columns(ev(ans.X), ev(diff(ans.X)), ev(ans.Y), ev(diff(ans.Y)),
                        ev(diff(diff(ans.Y))), _sample(ans.Z_basis, pts),
                        _sample(ans.Q_basis, pts), _sample(ans.V_basis, pts))
    except DomainError as err:
        raise AnsatzError(f"ansatz is singular on its domain: {err}") from err


def _sides(c: _Columns, s: Mapping[str, float], z, q, v) -> dict[str, tuple[np.ndarray, np.ndarray]]:
    Z, dZ, d2Z = (m @ z for m in c.Z)
    Q, dQ, d2Q = (m @ q for m in c.Q)
    V, dV, _ = (m @ v for m in c.V)
    a, b, g, lam, nu, tau = (s[n] for n in SCALARS)
    return {
        "e1": (c.X * (c.d2Y + 2 * dZ), a * c.Y),
        "e2": (2 * c.X * c.dY - c.dX * c.Y, (b * Q + g) * c.X),
        "e3": (Q * (1 + b * V), c.X * d2Z - g * V - a * Z - c.Y * dV),
        "e4": (c.X * dQ, lam * c.Y),
        "e5": (-2 * lam * Z + c.X * d2Q, nu * Q + tau),
    }


def unpack(ans: Ansatz, theta) -> tuple[dict, np.ndarray, np.ndarray, np.ndarray]:
    """Split ``[alpha, beta, gamma, lambda, nu, tau, z..., q..., v...]``."""
    nz, nq, nv = ans.sizes
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (6 + nz + nq + nv,):
        raise ValueError(f"theta must have length {6 + nz + nq + nv}")
    scalars = dict(zip(SCALARS, map(float, theta[:6])))
    return scalars, theta[6:6 + nz], theta[6 + nz:6 + nz + nq], theta[6 + nz + nq:]


def residuals(ans: Ansatz, theta, points=None) -> np.ndarray:
    """Stacked constraint residuals (lhs - rhs), constraint-major, at ``points``."""
    pts = ans.points() if points is None else np.asarray(points, dtype=float)
    s, z, q, v = unpack(ans, theta)
    c = _columns(ans, pts)
    V = c.V[0] @ v
    bad = np.abs(1 + s["beta"] * V) < 1e-12
    if np.any(bad):
        raise SingularPointError(float(pts[np.argmax(bad)]))
    sides = _sides(c, s, z, q, v)
    return np.concatenate([lhs - rhs for lhs, rhs in (sides[k] for k in CONSTRAINTS)])


def _relative_norms(c: _Columns, s, z, q, v) -> dict[str, float]:
    out = {}
    for name, (lhs, rhs) in _sides(c, s, z, q, v).items():
        out[name] = float(np.max(np.abs(lhs - rhs) / (1 + np.maximum(np.abs(lhs), np.abs(rhs)))))
    return out


# ----------------------------------------------------------------------------
# variable projection


def _inner(c: _Columns, alpha: float, beta: float, nu: float, lam: float,
           gamma_fixed=None, tau_fixed=None):
    """Least-squares (z, q, gamma, tau) then v for fixed outer scalars."""
    npts = len(c.X)
    Zv, dZ, d2Z = c.Z
    Qv, dQ, d2Q = c.Q
    nz, nq = Zv.shape[1], Qv.shape[1]
    zero_z, zero_q = np.zeros((npts, nz)), np.zeros((npts, nq))
    one, zero1 = np.ones((npts, 1)), np.zeros((npts, 1))
    Xc = c.X[:, None]
    # unknowns: z, q, gamma, tau
    blocks = [
        (np.hstack([2 * Xc * dZ, zero_q, zero1, zero1]), alpha * c.Y - c.X * c.d2Y),
        (np.hstack([zero_z, -beta * Xc * Qv, -Xc, zero1]), -(2 * c.X * c.dY - c.dX * c.Y)),
        (np.hstack([zero_z, Xc * dQ, zero1, zero1]), lam * c.Y),
        (np.hstack([-2 * lam * Zv, Xc * d2Q - nu * Qv, zero1, -one]), np.zeros(npts)),
    ]
    A = np.vstack([b[0] for b in blocks])
    rhs = np.concatenate([b[1] for b in blocks])
    keep = list(range(nz + nq + 2))
    fixed_vals = np.zeros(nz + nq + 2)
    for idx, val in ((nz + nq, gamma_fixed), (nz + nq + 1, tau_fixed)):
        if val is not None:
            keep.remove(idx)
            fixed_vals[idx] = val
    rhs = rhs - A @ fixed_vals
    sol = fixed_vals.copy()
    sol[keep] = np.linalg.lstsq(A[:, keep], rhs, rcond=None)[0]
    z, q = sol[:nz], sol[nz:nz + nq]
    gamma, tau = float(sol[nz + nq]), float(sol[nz + nq + 1])
    Q = Qv @ q
    Z, d2Zs = Zv @ z, d2Z @ z
    Vv, dV, _ = c.V
    # Q + beta Q V - X Z'' + gamma V + alpha Z + Y V' = 0, linear in v
    Av = (beta * Q)[:, None] * Vv + gamma * Vv + c.Y[:, None] * dV
    bv = -(Q - c.X * d2Zs + alpha * Z)
    v = np.linalg.lstsq(Av, bv, rcond=None)[0]
    return z, q, v, gamma, tau


@dataclass(frozen=True)
class FitResult:
    scalars: dict
    z: np.ndarray
    q: np.ndarray
    v: np.ndarray
    residual_norms: dict
    converged: bool
    tol: float
    seed: int
    restarts: int
    message: str = ""

    @property
    def theta(self) -> np.ndarray:
        return np.concatenate([[self.scalars[n] for n in SCALARS], self.z, self.q, self.v])

    def as_dict(self) -> dict:
        return {"converged": self.converged, "tol": self.tol, "seed": self.seed,
                "restarts": self.restarts, "scalars": dict(self.scalars),
                "Z_coefficients": self.z.tolist(), "Q_coefficients": self.q.tolist(),
                "V_coefficients": self.v.tolist(), "residual_norms": dict(self.residual_norms),
                "message": self.message}


def fit(ans: Ansatz, theta0=None, seed: int = 0, restarts: int = 12, tol: float = 1e-10,
        points: int = 40, max_nfev: int = 400) -> FitResult:
    """Levenberg-Marquardt over (alpha, beta, nu) with the rest solved linearly.

    ``theta0`` gives starting values for the outer scalars (defaults to
    zeros); later restarts add Gaussian jitter drawn from ``seed``.  Scalars
    named in ``ans.fixed`` are held at their values.  The first restart that
    meets ``tol`` wins; otherwise the lowest-cost one is kept.  Outer
    scalars within ``SNAP`` of zero are then held at exactly zero for one
    more solve, which is kept if it does better.  ``converged`` reports
    whether the final relative residual is below ``tol``.
    """
    pts = ans.points(points)
    c = _columns(ans, pts)
    lam = float(ans.fixed.get("lambda", 1.0))
    if lam == 0:
        raise AnsatzError("lambda = 0 is degenerate")
    free = [n for n in OUTER if n not in ans.fixed]
    base = {n: float(ans.fixed.get(n, 0.0)) for n in OUTER}
    if theta0 is not None:
        start = np.asarray(theta0, dtype=float)
        if start.shape != (len(free),):
            raise ValueError(f"theta0 must give {len(free)} values for {free}")
    else:
        start = np.zeros(len(free))
    g_fix, t_fix = ans.fixed.get("gamma"), ans.fixed.get("tau")

    def solve(vec, names=free):
        s = dict(base)
        s.update(zip(names, map(float, vec)))
        z, q, v, g, t = _inner(c, s["alpha"], s["beta"], s["nu"], lam, g_fix, t_fix)
        scal = {"alpha": s["alpha"], "beta": s["beta"], "gamma": g, "lambda": lam,
                "nu": s["nu"], "tau": t}
        return scal, z, q, v

    def run(x0, names):
        def resid(vec):
            sides = _sides(c, *solve(vec, names))
            return np.concatenate([lhs - rhs for lhs, rhs in (sides[k] for k in CONSTRAINTS)])
        if names:
            sol = least_squares(resid, x0, method="lm", xtol=1e-15, ftol=1e-15,
                                gtol=1e-15, max_nfev=max_nfev * (len(names) + 1))
            x0 = sol.x
        scal, z, q, v = solve(x0, names)
        norms = _relative_norms(c, scal, z, q, v)
        return max(norms.values()), scal, z, q, v, norms

    rng = np.random.default_rng(seed)
    best = None
    used = 0
    for attempt in range(restarts):
        used = attempt + 1
        x0 = start if attempt == 0 else start + rng.normal(scale=1.5, size=len(free))
        try:
            cand = run(x0, free)
        except (ValueError, np.linalg.LinAlgError):
            continue
        if not np.isfinite(cand[0]):
            continue
        if best is None or cand[0] < best[0]:
            best = cand
        if cand[0] < tol:
            break
    if best is not None and free:
        # LM crawls towards a zero of an outer scalar when the residual is flat
        # there (beta = 0 is the usual case); hold such scalars at 0 and refit
        small = [n for n in free if abs(best[1][n]) < SNAP]
        if small:
            rest = [n for n in free if n not in small]
            saved = {n: base[n] for n in small}
            base.update({n: 0.0 for n in small})
            try:
                cand = run(np.array([best[1][n] for n in rest]), rest)
                if np.isfinite(cand[0]) and (cand[0] < tol or cand[0] < best[0]):
                    best = cand
            except (ValueError, np.linalg.LinAlgError):
                pass
            base.update(saved)
    if best is None:
        return FitResult({n: math.nan for n in SCALARS}, np.array([]), np.array([]),
                         np.array([]), {}, False, tol, seed, used, "every restart failed")
    worst, scal, z, q, v, norms = best
    ok = worst < tol
    msg = "converged" if ok else f"residual floor {worst:.3g} above tolerance"
    return FitResult(scal, z, q, v, norms, ok, tol, seed, used, msg)


def _combine(coeffs, basis) -> Expr:
    return add(*(mul(Const(float(a)), e) for a, e in zip(coeffs, basis) if a != 0.0))


def assemble_system(ans: Ansatz, result: FitResult) -> LadderSystem:
    """LadderSystem built from a fit, sampled on the ansatz domain."""
    Z = _combine(result.z, ans.Z_basis)
    Q = _combine(result.q, ans.Q_basis)
    V = _combine(result.v, ans.V_basis)
    return make_system(ans.X, ans.Y, Z, Q, V, result.scalars, sample_domain=ans.domain)


# ----------------------------------------------------------------------------
# catalog recovery


def _matches(user: Expr, template: str, values: dict, domain) -> bool:
    from .expr import approx_equal
    target = substitute(parse(template), values)
    try:
        return bool(approx_equal(user, target, domain, samples=30, tol=1e-12))
    except (DomainError, ExprError):
        return False


def match_case(X, Y, fixed: Mapping[str, float] | None = None) -> list[int]:
    """Catalog cases whose X and Y agree with the given ones (shape parameters from ``fixed`` or defaults)."""
    X, Y = as_expr(X), as_expr(Y)
    fixed = dict(fixed or {})
    found = []
    for cid, spec in CASES.items():
        values = {**spec.defaults, **{k: v for k, v in fixed.items() if k in spec.defaults}}
        shape = {k: values[k] for k in spec.shape_params}
        dom = spec.sample_domain(values)
        x_user, y_user = substitute(X, shape), substitute(Y, shape)
        if _matches(x_user, spec.X, shape, dom) and _matches(y_user, spec.Y, shape, dom):
            found.append(cid)
    return found


def case_ansatz(case_id: int, X, Y, fixed=None) -> Ansatz:
    spec = CASES[case_id]
    values = {**spec.defaults, **(fixed or {})}
    shape = {k: values[k] for k in spec.shape_params}
    basis = spec.search_basis
    return make_ansatz(substitute(as_expr(X), shape), substitute(as_expr(Y), shape),
                       [substitute(parse(e), shape) for e in basis["Z"]],
                       [substitute(parse(e), shape) for e in basis["Q"]],
                       [substitute(parse(e), shape) for e in basis["V"]],
                       {k: v for k, v in (fixed or {}).items() if k in SCALARS},
                       spec.sample_domain(values))


def read_case_params(case_id: int, ans: Ansatz, result: FitResult, shape: dict) -> dict:
    """Integration constants of ``case_id`` that reproduce the fitted Q, Z and V.

    Each catalog function is affine in its constant (c1 in Q, c2 in Z, c3 in
    V), so the constant is the least-squares slope between the fitted
    function and the template with that constant at 0 and 1.
    """
    spec = CASES[case_id]
    lam = result.scalars["lambda"]
    alpha = result.scalars["alpha"]
    base = {**shape, "alpha": alpha, "lambda": lam, "c4": 1.0}
    r2 = alpha ** 2 + 2 * lam
    if r2 > 0:
        base["r"] = math.sqrt(r2)
    pts = ans.points()
    fitted = {"Q": _combine(result.q, ans.Q_basis), "Z": _combine(result.z, ans.Z_basis),
              "V": _combine(result.v, ans.V_basis)}
    out = dict(base)
    out.pop("r", None)
    known = {"c1": 0.0, "c2": 0.0, "c3": 0.0}
    for fname, cname in (("Q", "c1"), ("Z", "c2")):
        t = parse(getattr(spec, fname))
        f0 = evaluate(substitute(t, {**base, **known, cname: 0.0}), pts)
        f1 = evaluate(substitute(t, {**base, **known, cname: 1.0}), pts)
        slope = np.broadcast_to(f1 - f0, pts.shape)
        known[cname] = float(np.dot(slope, evaluate(fitted[fname], pts) - f0) / np.dot(slope, slope))
    t = parse(spec.V)
    f0 = evaluate(substitute(t, {**base, **known, "c3": 0.0}), pts)
    f1 = evaluate(substitute(t, {**base, **known, "c3": 1.0}), pts)
    slope = np.broadcast_to(f1 - f0, pts.shape)
    known["c3"] = float(np.dot(slope, evaluate(fitted["V"], pts) - f0) / np.dot(slope, slope))
    out.update(known)
    return out


@dataclass(frozen=True)
class Recovery:
    case_id: int | str
    system: LadderSystem
    fit: FitResult
    params: dict


def recover_case(X, Y, fixed: Mapping[str, float] | None = None, seed: int = 0,
                 fallback: Ansatz | None = None) -> Recovery:
    """Identify the catalog family of ``(X, Y)`` and fit its constants.

    If no family matches, ``fallback`` (an ansatz with generic bases) is
    fitted instead and a custom system returned on convergence.
    """
    fixed = dict(fixed or {})
    for cid in match_case(X, Y, fixed):
        spec = CASES[cid]
        values = {**spec.defaults, **{k: v for k, v in fixed.items() if k in spec.defaults}}
        shape = {k: values[k] for k in spec.shape_params}
        ans = case_ansatz(cid, X, Y, fixed)
        res = fit(ans, seed=seed)
        if not res.converged:
            continue
        params = read_case_params(cid, ans, res, shape)
        try:
            system = build_case(cid, params)
        except (ConstraintViolation, LadderError):
            continue
        return Recovery(cid, system, res, params)
    if fallback is not None:
        res = fit(fallback, seed=seed)
        if res.converged:
            return Recovery("custom", assemble_system(fallback, res), res, {})
    raise CaseNotFound(f"no solvable family found for X={to_string(as_expr(X))}, "
                       f"Y={to_string(as_expr(Y))}")
