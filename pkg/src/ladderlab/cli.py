"""Command-line front end.

Every command prints one canonical JSON document (or CSV for wavefunction
tables) so that equal inputs and seeds give byte-identical output.

Exit codes: 0 success, 1 usage or input error, 2 verification failure,
3 search did not converge.
"""
from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from .expr import ExprError, parse, to_string
from .ladder import (CASES, LadderError, algebra_relations, build_case, check_constraints,
                     get_case, ground_state, ladder_identities, s_commutator)
from .ladder.ground import NoNormalizableGroundState
from .numerics import (DiscretizationError, Grid, LadderTowerError, solve_spectrum,
                       spectrum_by_ladder, verify_ladder)
from .diffop import DiffOp
from .search import AnsatzError, assemble_system, fit, load_ansatz
from .serialize import dumps

EXIT_OK, EXIT_INPUT, EXIT_VERIFY, EXIT_NOCONV = 0, 1, 2, 3
SEED_ENV = "LADDERLAB_SEED"
SPECTRUM_TOL = 1e-3


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    case: int | None = None
    params: dict = field(default_factory=dict)
    grid: tuple | None = None  # (a, b, n); None means the case default
    levels: int = 6
    seed: int = 0
    out: str | None = None
    format: str = "json"
    custom: dict = field(default_factory=dict)
    ansatz: str | None = None


def _parse_assignments(items, what: str) -> dict:
    out = {}
    for item in items or ():
        name, sep, value = item.partition("=")
        if not sep or not name.strip():
            raise UsageError(f"{what} expects name=value, got {item!r}")
        out[name.strip()] = value.strip()
    return out


def _parse_grid(text: str | None):
    if text is None:
        return None
    parts = text.split(",")
    if len(parts) != 3:
        raise UsageError("--grid expects a,b,n")
    try:
        a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
        Grid(a, b, n)
    except ValueError as err:
        raise UsageError(f"bad --grid {text!r}: {err}") from None
    return a, b, n


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ladderlab",
                                     description="Shift operators for exactly solvable 1-D Hamiltonians.")
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--case", type=int, help="catalog family 1..6")
    common.add_argument("--set", action="append", default=[], metavar="NAME=VALUE",
                        help="override a case parameter (repeatable)")
    common.add_argument("--grid", help="grid as a,b,n (default: the case's natural domain, n=4001)")
    common.add_argument("--levels", type=int, default=6, help="number of levels (default 6)")
    common.add_argument("--seed", type=int, default=0, help=f"random seed (default 0; {SEED_ENV} overrides)")
    common.add_argument("--out", help="write output here instead of stdout")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    sub.add_parser("catalog", parents=[common], help="list the six families")
    sub.add_parser("derive", parents=[common], help="build a family and check its algebra")
    sp = sub.add_parser("spectrum", parents=[common], help="grid and ladder spectra")
    sp.add_argument("--custom", action="append", default=[], metavar="X=EXPR|V=EXPR",
                    help="custom Hamiltonian X*D^2 + V instead of a catalog case (X defaults to -1)")
    sub.add_parser("verify", parents=[common], help="all symbolic and grid checks")
    se = sub.add_parser("search", parents=[common], help="fit an ansatz file")
    se.add_argument("ansatz", help="ansatz JSON file")
    sub.add_parser("groundstate", parents=[common], help="closed-form ground state and E0 roots")
    return parser


def _join_grid(argv: list[str]) -> list[str]:
    # argparse reads "--grid -6,6,101" as two options; glue the value on
    out, i = [], 0
    while i < len(argv):
        if argv[i] == "--grid" and i + 1 < len(argv):
            out.append(f"--grid={argv[i + 1]}")
            i += 2
        else:
            out.append(argv[i])
            i += 1
    return out


def config_from_args(argv=None) -> RunConfig:
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(_join_grid(argv))
    seed = args.seed
    if os.environ.get(SEED_ENV):
        try:
            seed = int(os.environ[SEED_ENV])
        except ValueError:
            raise UsageError(f"{SEED_ENV} must be an integer") from None
    params = _parse_assignments(args.set, "--set")
    try:
        params = {k: float(v) for k, v in params.items()}
    except ValueError as err:
        raise UsageError(f"--set values must be numbers: {err}") from None
    if args.levels < 1:
        raise UsageError("--levels must be positive")
    return RunConfig(command=args.command, case=args.case, params=params,
                     grid=_parse_grid(args.grid), levels=args.levels, seed=seed,
                     out=args.out, format=args.format,
                     custom=_parse_assignments(getattr(args, "custom", []), "--custom"),
                     ansatz=getattr(args, "ansatz", None))


# ----------------------------------------------------------------------------
# commands; each returns (exit code, text)


def _system(cfg: RunConfig):
    if cfg.case is None:
        raise UsageError("--case is required")
    get_case(cfg.case)
    return build_case(cfg.case, cfg.params)


def _grid(cfg: RunConfig, system=None) -> Grid:
    if cfg.grid is not None:
        return Grid(*cfg.grid)
    if system is None or system.grid_domain is None:
        raise UsageError("--grid is required here")
    return Grid(*system.grid_domain, 4001)


def cmd_catalog(cfg: RunConfig):
    doc = [{"case_id": cid, "name": spec.name, "X": spec.X, "Y": spec.Y, "V": spec.V,
            "class": "harmonic-like" if spec.beta == "0" else "poschl-teller-like",
            "defaults": dict(spec.defaults)} for cid, spec in CASES.items()]
    return EXIT_OK, dumps(doc)


def cmd_derive(cfg: RunConfig):
    system = _system(cfg)
    cons = check_constraints(system, seed=cfg.seed)
    alg = algebra_relations(system, seed=cfg.seed)
    ids = ladder_identities(system, seed=cfg.seed)
    doc = system.to_dict()
    doc["checks"] = {"constraints": cons.as_dict(), "algebra": alg.as_dict(),
                     "ladder": ids.as_dict()}
    ok = cons.passed and alg.passed and ids.passed
    return (EXIT_OK if ok else EXIT_VERIFY), dumps(doc)


def _custom_hamiltonian(custom: dict) -> DiffOp:
    unknown = set(custom) - {"X", "V"}
    if unknown:
        raise UsageError(f"--custom accepts X and V only, got {sorted(unknown)}")
    try:
        X = parse(custom.get("X", "-1"))
        V = parse(custom.get("V", "0"))
    except ExprError as err:
        raise UsageError(f"bad --custom expression: {err}") from None
    return DiffOp(((2, X), (0, V)))


def _ladder_energies(system, E0: float, levels: int) -> np.ndarray:
    return spectrum_by_ladder(system, E0, levels - 1).energies


def cmd_spectrum(cfg: RunConfig):
    if cfg.custom:
        H = _custom_hamiltonian(cfg.custom)
        grid = _grid(cfg)
        spec = solve_spectrum(H, grid, cfg.levels)
        if cfg.format == "csv":
            return EXIT_OK, spec.to_csv()
        doc = {"H": str(H), "grid": [grid.a, grid.b, grid.n],
               "grid_energies": spec.energies.tolist(), "ladder_energies": None,
               "max_discrepancy": None}
        return EXIT_OK, dumps(doc)
    system = _system(cfg)
    grid = _grid(cfg, system)
    spec = solve_spectrum(system.H, grid, cfg.levels)
    if cfg.format == "csv":
        return EXIT_OK, spec.to_csv()
    gs = ground_state(system, grid)
    ladder = _ladder_energies(system, gs.E0, cfg.levels)
    m = min(len(ladder), len(spec.energies))
    disc = float(np.max(np.abs(ladder[:m] - spec.energies[:m])))
    doc = {"case_id": system.case_id, "grid": [grid.a, grid.b, grid.n],
           "grid_energies": spec.energies.tolist(), "ladder_energies": ladder.tolist(),
           "grid_gaps": np.diff(spec.energies).tolist(), "max_discrepancy": disc}
    return (EXIT_OK if disc <= SPECTRUM_TOL else EXIT_VERIFY), dumps(doc)


def cmd_verify(cfg: RunConfig):
    system = _system(cfg)
    grid = _grid(cfg, system)
    cons = check_constraints(system, seed=cfg.seed)
    alg = algebra_relations(system, seed=cfg.seed)
    ids = ladder_identities(system, seed=cfg.seed)
    spec = solve_spectrum(system.H, grid, cfg.levels)
    doc = {"case_id": system.case_id, "constraints": cons.as_dict(), "algebra": alg.as_dict(),
           "ladder_identities": ids.as_dict()}
    ok = cons.passed and alg.passed and ids.passed
    try:
        gs = ground_state(system, grid, seed=cfg.seed)
    except NoNormalizableGroundState as err:
        doc["ground_state"] = {"error": str(err)}
        doc["passed"] = False
        return EXIT_VERIFY, dumps(doc)
    ladder = _ladder_energies(system, gs.E0, cfg.levels)
    m = min(len(ladder), len(spec.energies))
    # the closed form is compared at grid eigenvalues
    sc = s_commutator(system, energies=spec.energies[:m].tolist(), seed=cfg.seed)
    report = verify_ladder(system, spec, m - 1) if m > 1 else None
    e0_err = abs(gs.E0 - gs.grid_E0)
    doc["S_commutator"] = sc.as_dict()
    doc["ground_state"] = {"E0": gs.E0, "grid_E0": gs.grid_E0, "error": e0_err}
    doc["ladder_action"] = None if report is None else report.as_dict()
    doc["spectrum_discrepancy"] = float(np.max(np.abs(ladder[:m] - spec.energies[:m])))
    ok = (ok and sc.passed and e0_err < 1e-4
          and (report is None or (report.min_similarity > 1 - 1e-5 and report.max_gap_error < 1e-4)))
    doc["passed"] = ok
    return (EXIT_OK if ok else EXIT_VERIFY), dumps(doc)


def cmd_search(cfg: RunConfig):
    ans = load_ansatz(cfg.ansatz)
    res = fit(ans, seed=cfg.seed)
    doc = {"ansatz": ans.to_dict(), "fit": res.as_dict()}
    if res.converged:
        try:
            system = assemble_system(ans, res)
            cons = check_constraints(system, seed=cfg.seed)
            alg = algebra_relations(system, seed=cfg.seed)
            doc["system"] = {"Z": to_string(system.Z), "Q": to_string(system.Q),
                             "V": to_string(system.V), "class": system.klass}
            doc["verification"] = {"constraints": cons.as_dict(), "algebra": alg.as_dict()}
        except LadderError as err:
            doc["verification"] = {"error": str(err)}
    return (EXIT_OK if res.converged else EXIT_NOCONV), dumps(doc)


def cmd_groundstate(cfg: RunConfig):
    system = _system(cfg)
    gs = ground_state(system, _grid(cfg, system), seed=cfg.seed)
    if cfg.format == "csv":
        from .serialize import table_csv
        return EXIT_OK, table_csv({"x": gs.x, "psi_0": gs.psi_numeric})
    return EXIT_OK, dumps(gs.as_dict())


COMMANDS = {"catalog": cmd_catalog, "derive": cmd_derive, "spectrum": cmd_spectrum,
            "verify": cmd_verify, "search": cmd_search, "groundstate": cmd_groundstate}


def run(cfg: RunConfig) -> tuple[int, str]:
    try:
        return COMMANDS[cfg.command](cfg)
    except (UsageError, AnsatzError, ExprError, DiscretizationError, OSError) as err:
        return EXIT_INPUT, f"error: {err}"
    except NoNormalizableGroundState as err:
        return EXIT_VERIFY, f"error: {err}"
    except (LadderError, LadderTowerError) as err:
        return EXIT_INPUT, f"error: {err}"


def main(argv=None) -> int:
    try:
        cfg = config_from_args(argv)
    except UsageError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INPUT
    except SystemExit as exc:  # argparse
        return EXIT_INPUT if exc.code else EXIT_OK
    code, text = run(cfg)
    if text.startswith("error: "):
        print(text, file=sys.stderr)
        return code
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
