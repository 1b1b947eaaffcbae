"""Identity checks: conservation laws, symmetries, variational symmetries."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .calculus import (
    euler_operator, linearize, on_shell_reduce, total_derivative,
)
from .expr import JetExpr, as_expr


@dataclass(frozen=True)
class Residual:
    """Outcome of an identity check; ``expr`` is the normalized residual."""

    expr: JetExpr
    stage: str = "off-shell"

    @property
    def is_zero(self) -> bool:
        return self.expr.is_zero()

    @property
    def witness(self) -> Optional[JetExpr]:
        if self.expr.is_zero():
            return None
        return self.expr.leading_term()

    def __bool__(self):
        return self.is_zero


def normalize(e) -> JetExpr:
    """Canonical form.  Construction already canonicalizes; trees are accepted too."""
    if isinstance(e, (tuple, list, str)):
        from .sexpr import build
        return build(e)
    return as_expr(e)


def _prepare(model):
    return getattr(model, "prepare", as_expr)


def divergence(T, X, Y) -> JetExpr:
    return (total_derivative(T, "t") + total_derivative(X, "x")
            + total_derivative(Y, "y"))


def verify_divergence_identity(T, X, Y, Q, model) -> Residual:
    """``D_t T + D_x X + D_y Y - Q * E(L)``; falls back to on-shell reduction."""
    prep = _prepare(model)
    div = prep(divergence(prep(T), prep(X), prep(Y)))
    off = prep(div - prep(Q) * model.euler_lagrange)
    if off.is_zero():
        return Residual(off, "off-shell")
    return Residual(prep(on_shell_reduce(div, model.equation)), "on-shell")


def verify_symmetry(P, model) -> Residual:
    """Linearized equation along the characteristic ``P``, reduced on solutions."""
    prep = _prepare(model)
    lin = prep(linearize(model.euler_lagrange, prep(P), model.dep))
    return Residual(prep(on_shell_reduce(lin, model.equation)), "on-shell")


def verify_variational(P, model) -> Residual:
    """``E(P * E(L))``; vanishes exactly for variational symmetries (off-shell)."""
    prep = _prepare(model)
    return Residual(prep(euler_operator(prep(P) * model.euler_lagrange, model.dep)), "off-shell")
