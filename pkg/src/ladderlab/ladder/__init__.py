"""Constraint system, six-family catalog, shift operators and ground states."""
from .catalog import CASES, CaseSpec
from .checks import (AlgebraReport, ConstraintReport, SCommutatorReport, ShiftReport,
                     algebra_relations, check_constraints, constraint_sides,
                     ladder_identities, on_shell_s_commutator, probe_energies,
                     random_test_function, s_commutator, shift_operators)
from .system import (HARMONIC, POSCHL_TELLER, CoefMatrix, ConstraintViolation,
                     DegenerateSystemError, LadderError, LadderSystem, UnknownCaseError,
                     affine_tilde_shift, build_case, case_params, get_case, make_system,
                     perturbed, random_params)
from .ground import (E0Candidate, GroundState, NoNormalizableGroundState, case_constants,
                     ground_state, numeric_ground_state, transform_eigenproblem)

__all__ = [
    "CASES",
    "CaseSpec",
    "AlgebraReport",
    "ConstraintReport",
    "SCommutatorReport",
    "ShiftReport",
    "algebra_relations",
    "check_constraints",
    "constraint_sides",
    "ladder_identities",
    "on_shell_s_commutator",
    "probe_energies",
    "random_test_function",
    "s_commutator",
    "shift_operators",
    "HARMONIC",
    "POSCHL_TELLER",
    "CoefMatrix",
    "ConstraintViolation",
    "DegenerateSystemError",
    "LadderError",
    "LadderSystem",
    "UnknownCaseError",
    "affine_tilde_shift",
    "build_case",
    "case_params",
    "get_case",
    "make_system",
    "perturbed",
    "random_params",
    "E0Candidate",
    "GroundState",
    "NoNormalizableGroundState",
    "case_constants",
    "ground_state",
    "numeric_ground_state",
    "transform_eigenproblem",
]
