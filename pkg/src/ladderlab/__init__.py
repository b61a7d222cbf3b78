"""Shift operators for exactly solvable one-dimensional Hamiltonians.

Modules: ``expr`` (expressions), ``diffop`` (differential operators),
``ladder`` (constraint system and the six families), ``numerics`` (grid
oracle), ``search`` (ansatz fitting) and ``cli``.
"""
from .diffop import DiffOp
from .expr import ENERGY, Expr, ParamBinding, approx_equal, evaluate, parse, to_string
from .ladder import LadderSystem, build_case

__all__ = ["DiffOp", "ENERGY", "Expr", "LadderSystem", "ParamBinding", "approx_equal",
           "build_case", "evaluate", "parse", "to_string"]
__version__ = "0.1.0"
