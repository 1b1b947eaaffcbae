"""Exact calculus on the jet space of a scalar field in (t, x, y)."""

from .calculus import (
    Equation, OnShellError, euler_operator, explicit_coordinates, extract_multiplier,
    linearize, map_bases, on_shell_reduce, partial, proportionality, relabel_functions,
    specialize, substitute_function, total_derivative, total_derivative_multi,
)
from .coeff import RatFunc
from .evaluate import evaluate, real_power
from .expr import (
    FormalFunction, JetExpr, JetVar, NonAffineExponentError, P, const, coord, fn,
    jet, jet_base, param, power, sign,
)
from .sexpr import SexprError, dumps, loads
from .verify import (
    Residual, divergence, normalize, verify_divergence_identity, verify_symmetry,
    verify_variational,
)

__all__ = [
    "Equation", "FormalFunction", "JetExpr", "JetVar", "NonAffineExponentError",
    "OnShellError", "P", "RatFunc", "Residual", "SexprError", "const", "coord",
    "divergence", "dumps", "euler_operator", "evaluate", "real_power", "explicit_coordinates", "extract_multiplier",
    "fn", "jet", "jet_base", "linearize", "loads", "map_bases", "normalize",
    "on_shell_reduce", "param", "partial", "power", "proportionality", "relabel_functions",
    "sign", "specialize", "substitute_function", "total_derivative",
    "total_derivative_multi", "verify_divergence_identity", "verify_symmetry",
    "verify_variational",
]
