"""Closed forms for the six exactly solvable families.

Templates are strings in the expression grammar.  Besides the user
parameters they may use ``r`` (= sqrt(alpha^2 + 2*lambda)) and ``ENERGY``
(the eigenvalue of the state an operator acts on).

Conventions shared by every case:

* ``shift_Q``/``shift_P`` give the homogenising redefinitions
  ``Q~ = Q + shift_Q`` and ``P~ = P + shift_P``.
* The shift operators are ``S_i = norm_i * ((mu_i - alpha)/(2*lambda) * Q~ + P~)``
  where ``mu_1 <= mu_2`` are the eigenvalues of the coefficient matrix;
  ``norm`` is chosen so that ``s_commutator`` reproduces the published
  normalisation.
* ``psi0`` is the zero mode of ``S_1`` with ``ENERGY`` standing for E0, and
  ``ground_roots`` returns every E0 allowed by ``H psi0 = E0 psi0``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable


@dataclass(frozen=True)
class CaseSpec:
    case_id: int
    name: str
    X: str
    Y: str
    Q: str
    Z: str
    V: str
    beta: str
    gamma: str
    nu: str
    tau: str
    shift_Q: str
    shift_P: str
    s_commutator: str
    psi0: str
    E0_equation: str
    ground_roots: Callable[[dict], list]
    grid_domain: Callable[[dict], tuple]
    sample_domain: Callable[[dict], tuple]
    defaults: dict
    norm: tuple = ("1", "1")
    shape_params: tuple = ()
    # basis used by the constraint search to recover this family; the
    # last V entry carries c3
    search_basis: dict = field(default_factory=dict)


def _r(p):
    return math.sqrt(p["alpha"] ** 2 + 2 * p["lambda"])


def _case1_roots(p):
    r = _r(p)
    k = p["c1"] + p["alpha"] * p["c2"]
    return [("unique", r / 2 + p["c3"] - k * k / r ** 2)]


def _case2_roots(p):
    r = _r(p)
    disc = 1 + 4 * p["c3"]
    if disc < 0:
        return []
    k2 = p["c1"] + p["alpha"] * p["c2"] - p["alpha"] / 2
    out = []
    for label, sgn in (("minus", -1.0), ("plus", 1.0)):
        s = (-1 + sgn * math.sqrt(disc)) / 2
        out.append((label, (r * (0.5 - s) - k2) / 2))
    return out


def _case3_roots(p):
    a, b, c = p["a"], p["b"], p["c"]
    disc = c ** 4 - c * c * p["c3"] / (a * b)
    if disc < 0:
        return []
    base = (p["alpha"] + c * c) ** 2 + 2 * p["lambda"]
    out = []
    for label, sgn in (("plus", 1.0), ("minus", -1.0)):
        t = -c * c + sgn * math.sqrt(disc)
        out.append((label, (base - t * t) / (4 * c * c)))
    return out


def _case4_roots(p):
    a, b, k = p["a"], p["b"], p["k"]
    disc = k ** 4 + 4 * k * k * p["c3"] / (a * a + b * b)
    if disc < 0:
        return []
    base = (p["alpha"] - k * k) ** 2 + 2 * p["lambda"]
    out = []
    for label, sgn in (("plus", 1.0), ("minus", -1.0)):
        t = k * k + sgn * math.sqrt(disc)
        out.append((label, (t * t - base) / (4 * k * k)))
    return out


def _case5_roots(p):
    r = _r(p)
    disc = 1 + 4 * p["c3"]
    if disc < 0:
        return []
    shift = p["c1"] + p["alpha"] * p["c2"]
    return [(label, r / 2 * (1 + sgn * math.sqrt(disc)) - shift)
            for label, sgn in (("plus", 1.0), ("minus", -1.0))]


def _case6_roots(p):
    r = _r(p)
    if p["c3"] < 0:
        return []
    c = p["c"]
    head = 2 * p["c1"] + p["alpha"] * (c + 2 * p["c2"]) + c * r
    return [(label, (head + sgn * 2 * r * math.sqrt(p["c3"])) / (2 * c))
            for label, sgn in (("plus", 1.0), ("minus", -1.0))]


def _case1_grid(p):
    r = _r(p)
    center = 2 * (p["c1"] + p["alpha"] * p["c2"]) / r ** 2
    half = 12.0 * math.sqrt(math.sqrt(2.0) / r)
    return (center - half, center + half)


def _case3_center(p):
    return math.log(p["b"] / p["a"]) / (2 * p["c"])


def _case4_interval(p):
    phase = math.atan2(p["b"], p["a"])
    k = p["k"]
    return (-phase / k, (math.pi - phase) / k)


def _case4_sample(p):
    lo, hi = _case4_interval(p)
    pad = 0.05 * (hi - lo)
    return (lo + pad, hi - pad)


def _case6_grid(p):
    c = p["c"]
    return (-6.0 / c, 16.0 / c) if c > 0 else (-16.0 / -c, 6.0 / -c)


def _case6_sample(p):
    c = p["c"]
    return (-2.0 / c, 4.0 / c) if c > 0 else (-4.0 / -c, 2.0 / -c)


CASES: dict[int, CaseSpec] = {}


def _register(spec: CaseSpec) -> None:
    CASES[spec.case_id] = spec


_register(CaseSpec(
    case_id=1, name="harmonic oscillator",
    X="-1", Y="1",
    Q="-lambda*x + c1",
    Z="-alpha/2*x + c2",
    V="(lambda + alpha^2/2)/2*x^2 - (alpha*c2 + c1)*x + c3",
    beta="0", gamma="0", nu="-alpha", tau="alpha*c1 - 2*lambda*c2",
    shift_Q="alpha*(2*lambda*c2 - alpha*c1)/r^2",
    shift_P="-(2*lambda*c2 - alpha*c1)/r^2",
    s_commutator="-r",
    psi0="c4*exp(-r/4*x^2 + (c1 + alpha*c2)/r*x)",
    E0_equation="E0 = r/2 + c3 - (c1 + alpha*c2)^2/r^2",
    ground_roots=_case1_roots,
    grid_domain=_case1_grid,
    sample_domain=lambda p: (-4.0, 4.0),
    defaults={"alpha": 0.0, "lambda": 1.0, "c1": 0.0, "c2": 0.0, "c3": 0.0, "c4": 1.0},
    search_basis={"Z": ["x", "1"], "Q": ["x", "1"], "V": ["x^2", "x", "1"]},
))

_register(CaseSpec(
    case_id=2, name="radial harmonic oscillator",
    X="-1", Y="x",
    Q="-lambda/2*x^2 + c1",
    Z="-alpha/4*x^2 + c2",
    V="(lambda + alpha^2/2)/8*x^2 + c3/x^2 + (alpha/2 - alpha*c2 - c1)/2",
    beta="0", gamma="2", nu="-alpha", tau="lambda*(1 - 2*c2) + alpha*c1",
    shift_Q="4*lambda/r^2*ENERGY - alpha*(lambda + alpha*c1 - 2*lambda*c2)/r^2",
    shift_P="2*alpha/r^2*ENERGY + (lambda + alpha*c1 - 2*lambda*c2)/r^2",
    norm=("alpha - r", "alpha + r"),
    s_commutator="8*lambda/r*(2*ENERGY + c1 + c2*alpha - alpha/2)",
    psi0="c4*x^((2*ENERGY + c1 + alpha*c2 - alpha/2)/r - 1/2)*exp(-r/8*x^2)",
    E0_equation="s^2 + s - c3 = 0 with s = 1/2 - (2*E0 + c1 + alpha*c2 - alpha/2)/r",
    ground_roots=_case2_roots,
    grid_domain=lambda p: (1e-4, 40.0),
    sample_domain=lambda p: (0.2, 6.0),
    defaults={"alpha": 0.0, "lambda": 1.0, "c1": 0.0, "c2": 0.0, "c3": 2.0, "c4": 1.0},
    search_basis={"Z": ["x^2", "1"], "Q": ["x^2", "1"], "V": ["x^2", "1", "x^(-2)"]},
))

_Y3 = "(a*exp(c*x) + b*exp(-c*x))"
_W3 = "(a*exp(c*x) - b*exp(-c*x))"
_register(CaseSpec(
    case_id=3, name="generalized Poschl-Teller",
    X="-1", Y=_Y3,
    Q=f"-lambda/c*{_W3} + c1",
    Z=f"-(alpha + c^2)/(2*c)*{_W3} + c2",
    V=f"c3*{_Y3}^(-2) + ((alpha + c^2)^2 + 2*lambda)/(4*c^2)",
    beta="-2*c^2/lambda", gamma="2*c^2*c1/lambda", nu="-alpha - 2*c^2",
    tau="-2*lambda*c2 + (alpha + 2*c^2)*c1",
    shift_Q="-c1", shift_P="-c2",
    s_commutator="-8*a*b*c*(((alpha + c^2)/(2*c))^2 + lambda/(2*c^2) - ENERGY)^0.5",
    psi0=f"c4*{_Y3}^(-((alpha + c^2)^2 + 2*lambda - 4*c^2*ENERGY)^0.5/(2*c^2))",
    E0_equation="R + 2*c^2*sqrt(R) + c^2*c3/(a*b) = 0 with R = (alpha + c^2)^2 + 2*lambda - 4*c^2*E0",
    ground_roots=_case3_roots,
    grid_domain=lambda p: (_case3_center(p) - 12.0 / p["c"], _case3_center(p) + 12.0 / p["c"]),
    sample_domain=lambda p: (_case3_center(p) - 3.0 / p["c"], _case3_center(p) + 3.0 / p["c"]),
    defaults={"a": 1.0, "b": 1.0, "c": 1.0, "alpha": 0.0, "lambda": 1.0,
              "c1": 0.0, "c2": 0.0, "c3": -120.0, "c4": 1.0},
    shape_params=("a", "b", "c"),
    search_basis={"Z": [_W3, "1"], "Q": [_W3, "1"], "V": ["1", f"{_Y3}^(-2)"]},
))

_Y4 = "(a*sin(k*x) + b*cos(k*x))"
_W4 = "(a*cos(k*x) - b*sin(k*x))"
_register(CaseSpec(
    case_id=4, name="Poschl-Teller",
    X="-1", Y=_Y4,
    Q=f"lambda/k*{_W4} + c1",
    Z=f"(alpha - k^2)/(2*k)*{_W4} + c2",
    V=f"c3*{_Y4}^(-2) - ((k^2 - alpha)^2 + 2*lambda)/(4*k^2)",
    beta="2*k^2/lambda", gamma="-2*c1*k^2/lambda", nu="2*k^2 - alpha",
    tau="c1*(alpha - 2*k^2) - 2*lambda*c2",
    shift_Q="-c1", shift_P="-c2",
    s_commutator="-2*k*(a^2 + b^2)*(ENERGY + lambda/(2*k^2) + ((alpha - k^2)/(2*k))^2)^0.5",
    psi0=f"c4*{_Y4}^(((alpha - k^2)^2 + 2*lambda + 4*k^2*ENERGY)^0.5/(2*k^2))",
    E0_equation="4*k^2*c3/(a^2 + b^2) + 2*k^2*sqrt(R) - R = 0 with R = (alpha - k^2)^2 + 2*lambda + 4*k^2*E0",
    ground_roots=_case4_roots,
    grid_domain=_case4_interval,
    sample_domain=_case4_sample,
    defaults={"a": 1.0, "b": 0.0, "k": 1.0, "alpha": 0.0, "lambda": 1.0,
              "c1": 0.0, "c2": 0.0, "c3": 2.0, "c4": 1.0},
    shape_params=("a", "b", "k"),
    search_basis={"Z": [_W4, "1"], "Q": [_W4, "1"], "V": ["1", f"{_Y4}^(-2)"]},
))

_register(CaseSpec(
    case_id=5, name="Coulomb",
    X="-x", Y="x",
    Q="-lambda*x + c1",
    Z="-alpha/2*x + c2",
    V="(lambda + alpha^2/2)/2*x + c3/x - (c1 + alpha*c2)",
    beta="0", gamma="1", nu="-alpha", tau="alpha*c1 - 2*lambda*c2",
    shift_Q="-c1 + 2*lambda/r^2*ENERGY + 2*lambda*(c1 + alpha*c2)/r^2",
    shift_P="-c2 + alpha/r^2*ENERGY + alpha*(c1 + alpha*c2)/r^2",
    s_commutator="-2/r*(ENERGY + c1 + alpha*c2)",
    psi0="c4*x^((ENERGY + c1 + alpha*c2)/r)*exp(-r/2*x)",
    E0_equation="E0 = r/2*(1 +- sqrt(1 + 4*c3)) - c1 - alpha*c2",
    ground_roots=_case5_roots,
    grid_domain=lambda p: (1e-4, 60.0),
    sample_domain=lambda p: (0.2, 8.0),
    defaults={"alpha": 0.0, "lambda": 0.5, "c1": 0.0, "c2": 0.0, "c3": 2.0, "c4": 1.0},
    search_basis={"Z": ["x", "1"], "Q": ["x", "1"], "V": ["x", "1", "x^(-1)"]},
))

_register(CaseSpec(
    case_id=6, name="Morse",
    X="-exp(c*x)", Y="1",
    Q="lambda/c*exp(-c*x) + c1",
    Z="alpha/(2*c)*exp(-c*x) + c2",
    V="(2*lambda + alpha^2)/(4*c^2)*exp(-c*x) + c3*exp(c*x) + alpha/(2*c)*(2*c2 + c) + c1/c",
    beta="0", gamma="-c", nu="-alpha", tau="alpha*c1 - lambda*(c + 2*c2)",
    shift_Q="-2*lambda*c/r^2*ENERGY - alpha*(alpha*c1 - lambda*(c + 2*c2))/r^2",
    shift_P="(alpha*c1 - lambda*(c + 2*c2) - alpha*c*ENERGY)/r^2",
    s_commutator="-2*c^2/r*(ENERGY - (2*c1 + alpha*(c + 2*c2))/(2*c))",
    psi0="c4*exp(-r/(2*c^2)*exp(-c*x) + (alpha*(c + 2*c2) + c*r + 2*c1 - 2*c*ENERGY)/(2*r)*x)",
    E0_equation="E0 = (2*c1 + alpha*(c + 2*c2) + c*r +- 2*r*sqrt(c3))/(2*c)",
    ground_roots=_case6_roots,
    grid_domain=_case6_grid,
    sample_domain=_case6_sample,
    defaults={"c": 1.0, "alpha": 0.4, "lambda": 0.42, "c1": 0.1, "c2": -0.2, "c3": 1.0, "c4": 1.0},
    shape_params=("c",),
    search_basis={"Z": ["exp(-c*x)", "1"], "Q": ["exp(-c*x)", "1"], "V": ["exp(-c*x)", "1", "exp(c*x)"]},
))
