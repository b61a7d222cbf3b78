"""Finite-difference oracle for ``H = X D^2 + V``.

``H psi = E psi`` with ``X < 0`` is the weighted Sturm-Liouville problem
``-psi'' + (V/(-X)) psi = E psi/(-X)``.  Second-order differences with
Dirichlet ends turn it into a symmetric tridiagonal pencil, which is
symmetrised with the diagonal weight and handed to LAPACK.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .diffop import DiffOp, UnboundEnergyError
from .expr import ENERGY, DomainError, evaluate
from .serialize import dumps, table_csv


class DiscretizationError(ValueError):
    """The operator cannot be written as a weighted Sturm-Liouville pencil."""


@dataclass(frozen=True)
class Grid:
    a: float
    b: float
    n: int

    def __post_init__(self):
        if self.n < 3:
            raise ValueError("a grid needs at least 3 points")
        if not self.b > self.a:
            raise ValueError("grid needs a < b")

    @property
    def h(self) -> float:
        return (self.b - self.a) / (self.n - 1)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.a, self.b, self.n)

    @property
    def interior(self) -> np.ndarray:
        return self.x[1:-1]

    def coarsened(self) -> "Grid":
        """Same interval at twice the spacing (needs odd ``n``)."""
        if self.n % 2 == 0:
            raise ValueError("coarsening needs an odd point count")
        return Grid(self.a, self.b, (self.n + 1) // 2)


@dataclass(frozen=True)
class Pencil:
    """``A psi = E B psi`` on the interior points of ``grid``."""
    grid: Grid
    diag: np.ndarray
    offdiag: np.ndarray
    weight: np.ndarray


@dataclass(frozen=True)
class SpectrumResult:
    energies: np.ndarray
    x: np.ndarray = field(default_factory=lambda: np.empty(0))
    states: np.ndarray = field(default_factory=lambda: np.empty((0, 0)))
    weight: np.ndarray = field(default_factory=lambda: np.empty(0))
    method: str = "grid"
    raw_energies: np.ndarray | None = None

    @property
    def h(self) -> float:
        return float(self.x[1] - self.x[0])

    def inner(self, f: np.ndarray, g: np.ndarray) -> float:
        return float(np.sum(f * g * self.weight) * self.h)

    def to_json(self) -> str:
        return dumps([float(e) for e in self.energies])

    def to_csv(self) -> str:
        cols = {"x": self.x}
        for i, s in enumerate(self.states):
            cols[f"psi_{i}"] = s
        return table_csv(cols)


def _coeff_values(op: DiffOp, k: int, x: np.ndarray, binding) -> np.ndarray:
    try:
        return np.broadcast_to(evaluate(op.coeff(k), x, binding), x.shape)
    except DomainError as err:
        raise DiscretizationError(f"coefficient of D^{k} not finite: {err}") from err


def discretize(H: DiffOp, grid: Grid, binding=None) -> Pencil:
    """Pencil ``A = -D2 + diag(V/(-X))``, ``B = diag(1/(-X))`` on interior points."""
    if H.order != 2 or any(k not in (0, 2) for k, _ in H.terms):
        raise DiscretizationError("H must have the form X*D^2 + V")
    if H.has_energy:
        raise UnboundEnergyError("H carries an unbound ENERGY slot")
    xi = grid.interior
    X = _coeff_values(H, 2, xi, binding)
    if not np.all(X < 0):
        bad = float(xi[np.argmax(X >= 0)])
        raise DiscretizationError(f"X must be negative on the grid; fails at x={bad!r}")
    V = _coeff_values(H, 0, xi, binding)
    w = 1.0 / -X
    h2 = grid.h ** 2
    diag = 2.0 / h2 + V * w
    off = np.full(len(xi) - 1, -1.0 / h2)
    return Pencil(grid, diag, off, w)


def _fix_sign(v: np.ndarray) -> np.ndarray:
    big = np.abs(v) > 1e-3 * np.max(np.abs(v))
    return -v if v[np.argmax(big)] < 0 else v


def eigensolve(pencil: Pencil, k: int) -> SpectrumResult:
    """Lowest ``k`` eigenpairs, states normalised so that sum(psi^2 w h) = 1."""
    m = len(pencil.diag)
    if not 1 <= k <= m:
        raise ValueError(f"cannot extract {k} states from {m} interior points")
    s = np.sqrt(pencil.weight)
    d = pencil.diag / pencil.weight
    e = pencil.offdiag / (s[:-1] * s[1:])
    # MRRR stays accurate on strongly graded matrices where bisection does not
    vals, vecs = eigh_tridiagonal(d, e, select="i", select_range=(0, k - 1),
                                  lapack_driver="stemr")
    h = pencil.grid.h
    states = np.zeros((k, pencil.grid.n))
    for i in range(k):
        states[i, 1:-1] = _fix_sign(vecs[:, i] / s) / np.sqrt(h)
    weight = np.zeros(pencil.grid.n)
    weight[1:-1] = pencil.weight
    return SpectrumResult(np.asarray(vals), pencil.grid.x, states, weight, "grid", np.asarray(vals))


def solve_spectrum(H: DiffOp, grid: Grid, k: int, binding=None,
                   richardson: bool = True) -> SpectrumResult:
    """Grid spectrum, optionally Richardson-extrapolated in ``h``.

    Extrapolation combines ``grid`` with the grid of twice the spacing
    (``n`` must then be odd); states always come from ``grid`` itself.
    """
    fine = eigensolve(discretize(H, grid, binding), k)
    if not richardson or grid.n % 2 == 0:
        return fine
    coarse = eigensolve(discretize(H, grid.coarsened(), binding), k)
    energies = (4.0 * fine.energies - coarse.energies) / 3.0
    return SpectrumResult(energies, fine.x, fine.states, fine.weight, "grid", fine.energies)


# ----------------------------------------------------------------------------
# operators on grid functions


def _padded(psi: np.ndarray) -> np.ndarray:
    # odd reflection about both Dirichlet ends
    return np.concatenate([-psi[2:0:-1], psi, -psi[-2:-4:-1]])


def grid_derivative(psi: np.ndarray, h: float, order: int) -> np.ndarray:
    """Fourth-order centred derivative (order 1 or 2) of a function vanishing at both ends."""
    f = _padded(np.asarray(psi, dtype=float))
    m2, m1, c, p1, p2 = f[:-4], f[1:-3], f[2:-2], f[3:-1], f[4:]
    if order == 0:
        return c.copy()
    if order == 1:
        return (-p2 + 8 * p1 - 8 * m1 + m2) / (12 * h)
    if order == 2:
        return (-p2 + 16 * p1 - 30 * c + 16 * m1 - m2) / (12 * h * h)
    raise ValueError("only derivatives up to second order are supported")


def apply_on_grid(op: DiffOp, x: np.ndarray, psi: np.ndarray, energy: float | None = None,
                  binding=None) -> np.ndarray:
    """``op psi`` at the interior points of a uniform grid; end values are set to 0."""
    env = dict(binding or {})
    if energy is not None:
        env[ENERGY] = float(energy)
    h = float(x[1] - x[0])
    xi = x[1:-1]
    out = np.zeros_like(x, dtype=float)
    for k, c in op.terms:
        coeff = evaluate(c, xi, env)
        out[1:-1] += coeff * grid_derivative(psi, h, k)[1:-1]
    return out


def sign_changes(psi: np.ndarray, rel_floor: float = 1e-8) -> int:
    v = psi[np.abs(psi) > rel_floor * np.max(np.abs(psi))]
    return int(np.count_nonzero(np.signbit(v[1:]) != np.signbit(v[:-1])))


# ----------------------------------------------------------------------------
# ladder checks


@dataclass(frozen=True)
class LadderStep:
    n: int
    similarity: float
    gap_error: float
    predicted_gap: float
    grid_gap: float
    factor_numeric: float
    factor_residual: float
    nodes: tuple[int, int]


@dataclass(frozen=True)
class LadderReport:
    steps: tuple[LadderStep, ...]

    @property
    def min_similarity(self) -> float:
        return min(s.similarity for s in self.steps)

    @property
    def max_gap_error(self) -> float:
        return max(s.gap_error for s in self.steps)

    @property
    def nodes_ok(self) -> bool:
        return all(b == a + 1 for a, b in (s.nodes for s in self.steps))

    def as_dict(self) -> dict:
        return {
            "min_similarity": self.min_similarity,
            "max_gap_error": self.max_gap_error,
            "nodes_ok": self.nodes_ok,
            "steps": [s.__dict__ | {"nodes": list(s.nodes)} for s in self.steps],
        }


def _cosine(spec: SpectrumResult, f: np.ndarray, g: np.ndarray) -> float:
    return abs(spec.inner(f, g)) / np.sqrt(spec.inner(f, f) * spec.inner(g, g))


def verify_ladder(system, spec: SpectrumResult, n_max: int) -> LadderReport:
    """Check that ``S2`` raises ``psi_n`` to ``psi_{n+1}`` for ``n < n_max``.

    Each step reports the weighted cosine similarity of ``S2 psi_n`` with
    ``psi_{n+1}``, the gap mismatch ``|E_{n+1} - E_n - g2(E_n)|``, and how far
    ``S1 S2 psi_n`` is from a multiple of ``psi_n`` (``factor_residual`` is
    one minus that cosine; ``factor_numeric`` is the multiple).  The last
    check uses only points where ``|psi_n|`` exceeds 1e-3 of its maximum.
    """
    if len(spec.energies) < n_max + 1:
        raise ValueError(f"need {n_max + 1} states, have {len(spec.energies)}")
    g2 = system.gaps[1]
    steps = []
    for n in range(n_max):
        E = float(spec.energies[n])
        psi, nxt = spec.states[n], spec.states[n + 1]
        gap = float(evaluate(g2, 0.0, {ENERGY: E}))
        raised = apply_on_grid(system.S2, spec.x, psi, E)
        energy, root = system.continued(1)
        back = apply_on_grid(system.shift_operator(0, energy, root), spec.x, raised, E)
        # S1 S2 amplifies the truncation error in the tails; compare in the bulk
        bulk = np.abs(psi) >= 1e-3 * np.max(np.abs(psi))
        factor = spec.inner(back * bulk, psi) / spec.inner(psi * bulk, psi)
        grid_gap = float(spec.energies[n + 1]) - E
        steps.append(LadderStep(
            n=n,
            similarity=_cosine(spec, raised, nxt),
            gap_error=abs(grid_gap - gap),
            predicted_gap=gap,
            grid_gap=grid_gap,
            factor_numeric=factor,
            factor_residual=1.0 - _cosine(spec, back * bulk, psi * bulk),
            nodes=(sign_changes(psi), sign_changes(nxt)),
        ))
    return LadderReport(tuple(steps))


class LadderTowerError(ValueError):
    """The gap function is undefined at the starting energy."""


def spectrum_by_ladder(system, E0: float, n_max: int) -> SpectrumResult:
    """Energies ``E_{n+1} = E_n + g2(E_n)`` for at most ``n_max`` steps.

    The tower stops early once the gap discriminant is no longer positive or
    the next gap would not raise the energy; that is how finite families of
    bound states end.
    """
    g2 = system.gaps[1]
    disc0 = system.discriminant(E0)
    if disc0 < 0:
        raise LadderTowerError(f"gap discriminant negative at E0={E0!r}")
    floor = 1e-9 * (1.0 + abs(disc0))
    energies = [float(E0)]
    for _ in range(n_max):
        E = energies[-1]
        try:
            gap = float(evaluate(g2, 0.0, {ENERGY: E}))
        except DomainError:
            break
        if gap <= 0:
            break
        nxt = E + gap
        if system.beta != 0 and system.discriminant(nxt) <= floor:
            break
        energies.append(nxt)
    return SpectrumResult(np.array(energies), method="ladder")
