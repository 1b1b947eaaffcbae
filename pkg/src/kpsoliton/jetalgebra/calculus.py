"""Total derivatives, the Euler operator and reduction modulo an equation."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterable, Optional, Sequence

from .coeff import ONE, RatFunc
from .expr import (
    COORD, FN, JET, SIGN, Base, JetExpr, Monomial, _accumulate, as_expr,
    jet_base, mono_mul, power,
)

_F0 = Fraction(0)
_F1 = Fraction(1)
_SIGMA = ((SIGN, "sigma"), (_F0, _F1))


class OnShellError(RuntimeError):
    """Reduction modulo the equation did not terminate within the order bound."""


# ----------------------------------------------------------------------------
# total derivative


def _d_base(base: Base, c: str):
    kind = base[0]
    if kind == COORD:
        return (((), ONE),) if base[1] == c else ()
    if kind == JET:
        return (((((JET, base[1], tuple(sorted(base[2] + (c,)))), (_F0, _F1)),), ONE),)
    if kind == FN:
        out = []
        name, order, arg = base[1], base[2], base[3]
        nb = (FN, name, order + 1, arg)
        for coord_name, k, s in arg:
            if coord_name != c:
                continue
            mono = ((nb, (_F0, _F1)),)
            if s:
                mono = mono_mul(mono, (_SIGMA,))
            out.append((mono, RatFunc.coerce(k)))
        return tuple(out)
    return ()


@lru_cache(maxsize=400_000)
def _d_mono(mono: Monomial, c: str):
    acc: Dict[Monomial, RatFunc] = {}
    for i, (base, (a, b)) in enumerate(mono):
        db = _d_base(base, c)
        if not db:
            continue
        nb = b - 1
        if a == 0 and nb == 0:
            rest = mono[:i] + mono[i + 1:]
        else:
            rest = mono[:i] + ((base, (a, nb)),) + mono[i + 1:]
        mult = RatFunc.affine(a, b)
        for fm, fc in db:
            _accumulate(acc, mono_mul(rest, fm), mult * fc)
    return tuple(acc.items())


def total_derivative(e, c: str) -> JetExpr:
    """Total derivative ``D_c`` acting on every jet coordinate and coordinate."""
    e = as_expr(e)
    acc: Dict[Monomial, RatFunc] = {}
    for mono, coeff in e.terms.items():
        for m, k in _d_mono(mono, c):
            _accumulate(acc, m, coeff * k)
    return JetExpr(acc)


def total_derivative_multi(e, idx: Iterable[str]) -> JetExpr:
    for c in idx:
        e = total_derivative(e, c)
    return as_expr(e)


# ----------------------------------------------------------------------------
# partial derivatives and the Euler operator


def partial(e, base: Base) -> JetExpr:
    """Partial derivative with respect to one base (jet coordinate, coordinate, ...)."""
    e = as_expr(e)
    acc: Dict[Monomial, RatFunc] = {}
    for mono, coeff in e.terms.items():
        for i, (b, (ea, eb)) in enumerate(mono):
            if b != base:
                continue
            nb = eb - 1
            if ea == 0 and nb == 0:
                rest = mono[:i] + mono[i + 1:]
            else:
                rest = mono[:i] + ((b, (ea, nb)),) + mono[i + 1:]
            _accumulate(acc, rest, coeff * RatFunc.affine(ea, eb))
            break
    return JetExpr(acc)


def euler_operator(e, dep: str = "v") -> JetExpr:
    """Variational derivative ``E_dep = sum_J (-D)_J d/d(dep_J)``."""
    e = as_expr(e)
    out = JetExpr()
    for jb in sorted(e.jets(dep), key=lambda b: b[2]):
        term = total_derivative_multi(partial(e, jb), jb[2])
        out = out - term if len(jb[2]) % 2 else out + term
    return out


def linearize(expr, direction, dep: str = "v") -> JetExpr:
    """Frechet derivative of ``expr`` along ``direction``: sum_J dE/dv_J * D_J(direction)."""
    expr = as_expr(expr)
    memo = {(): as_expr(direction)}

    def d_idx(idx):
        if idx not in memo:
            memo[idx] = total_derivative(d_idx(idx[:-1]), idx[-1])
        return memo[idx]

    out = JetExpr()
    for jb in expr.jets(dep):
        out = out + partial(expr, jb) * d_idx(jb[2])
    return out


# ----------------------------------------------------------------------------
# substitution


def map_bases(e, mapping) -> JetExpr:
    """Replace bases by expressions; ``mapping`` is a dict or a callable returning None to keep."""
    e = as_expr(e)
    get = mapping.get if isinstance(mapping, dict) else mapping
    acc: Dict[Monomial, RatFunc] = {}
    out = JetExpr()
    for mono, coeff in e.terms.items():
        kept = []
        subs = []
        for b, ex in mono:
            r = get(b)
            if r is None:
                kept.append((b, ex))
            else:
                subs.append((r, ex))
        if not subs:
            _accumulate(acc, mono, coeff)
            continue
        piece = JetExpr({tuple(kept): coeff})
        for r, ex in subs:
            piece = piece * power(r, ex)
        out = out + piece
    return out + JetExpr(acc)


def specialize(e, p=None, sigma2=None, gbs=None) -> JetExpr:
    """Fix ``p`` to a rational value and/or the sign symbols to +-1."""
    e = as_expr(e)
    if p is not None:
        p = Fraction(p)
    acc: Dict[Monomial, RatFunc] = {}
    for mono, coeff in e.terms.items():
        if p is not None:
            coeff = coeff.subs_p(p)
        factors = []
        for b, (a, bb) in mono:
            if p is not None and a != 0:
                a, bb = _F0, a * p + bb
                if bb == 0:
                    continue
            if b[0] == SIGN and b[1] == "sigma2" and sigma2 is not None:
                coeff = coeff * int(sigma2)
                continue
            if b[0] == SIGN and b[1] == "gbs" and gbs is not None:
                coeff = coeff * int(gbs)
                continue
            factors.append((b, (a, bb)))
        _accumulate(acc, tuple(factors), coeff)
    return JetExpr(acc)


def arg_expr(arg) -> JetExpr:
    from .expr import coord, sign
    out = JetExpr()
    for c, k, s in arg:
        term = coord(c) * k
        if s:
            term = term * sign("sigma")
        out = out + term
    return out


def substitute_function(e, name: str, poly: Sequence) -> JetExpr:
    """Replace the formal function ``name`` by the polynomial ``sum poly[i] * arg**i``.

    Derivative tags are honoured, so ``f''`` becomes the second derivative of the
    polynomial evaluated at the function's argument.
    """
    coeffs = [Fraction(c) for c in poly]

    def derivative(cs, k):
        for _ in range(k):
            cs = [i * cs[i] for i in range(1, len(cs))]
        return cs

    def repl(b):
        if b[0] != FN or b[1] != name:
            return None
        cs = derivative(coeffs, b[2])
        a = arg_expr(b[3])
        out = JetExpr()
        for i, c in enumerate(cs):
            if c:
                out = out + power(a, i) * c
        return out

    return map_bases(e, repl)


def relabel_functions(e, mapping: Dict[str, str]) -> JetExpr:
    def repl(b):
        if b[0] == FN and b[1] in mapping:
            return JetExpr.of_base((FN, mapping[b[1]], b[2], b[3]))
        return None

    return map_bases(e, repl)


def explicit_coordinates(e) -> set:
    """Coordinates appearing explicitly (as factors or inside formal-function arguments)."""
    out = set()
    for b in as_expr(e).bases():
        if b[0] == COORD:
            out.add(b[1])
        elif b[0] == FN:
            out.update(c for c, _, _ in b[3])
    return out


# ----------------------------------------------------------------------------
# equations and on-shell reduction


@dataclass(frozen=True)
class Equation:
    """A differential equation ``expr = 0`` solved for its leading jet ``lead``.

    ``lead`` must enter ``expr`` linearly with unit coefficient.
    """

    expr: JetExpr
    lead: Base
    name: str = ""
    max_order: int = 40
    _memo: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        coeff = partial(self.expr, self.lead)
        if coeff != JetExpr.constant(1):
            raise ValueError(f"leading jet must appear with unit coefficient, got {coeff}")
        if _lead_instances(self.solved(), self):
            raise ValueError("solved form still contains the leading derivative")

    @property
    def dep(self) -> str:
        return self.lead[1]

    def solved(self) -> JetExpr:
        return JetExpr.of_base(self.lead) - self.expr

    def contains_lead(self, base: Base) -> bool:
        if base[0] != JET or base[1] != self.dep:
            return False
        have = Counter(base[2])
        return all(have[c] >= n for c, n in Counter(self.lead[2]).items())

    def excess(self, base: Base) -> tuple:
        rem = Counter(base[2])
        rem.subtract(Counter(self.lead[2]))
        return tuple(sorted(rem.elements()))

    def rank(self, base: Base):
        lead_coords = set(self.lead[2])
        return (sum(1 for c in base[2] if c in lead_coords), len(base[2]), base[2])


def _lead_instances(e: JetExpr, eq: Equation):
    return [b for b in e.jets(eq.dep) if eq.contains_lead(b)]


def on_shell_reduce(e, equation: Equation) -> JetExpr:
    """Eliminate the leading derivative and all of its derivatives."""
    e = as_expr(e)
    memo = equation._memo

    def replacement(b):
        if b in memo:
            return memo[b]
        if len(b[2]) > equation.max_order:
            raise OnShellError(f"order bound {equation.max_order} exceeded reducing {b}")
        r = reduce(total_derivative_multi(equation.solved(), equation.excess(b)))
        memo[b] = r
        return r

    def reduce(expr):
        for _ in range(10 * equation.max_order):
            hits = _lead_instances(expr, equation)
            if not hits:
                return expr
            expr = map_bases(expr, {b: replacement(b) for b in hits})
        raise OnShellError("on-shell reduction did not terminate")

    return reduce(e)


def _strip_one(e: JetExpr, base: Base) -> JetExpr:
    """Coefficient of one power of ``base``: ``e = base * A + (terms free of base)``."""
    acc = {}
    for mono, coeff in e.terms.items():
        for i, (b, (a, eb)) in enumerate(mono):
            if b != base:
                continue
            if a != 0 or eb.denominator != 1 or eb < 1:
                raise ValueError(f"leading jet {b} carries a non-natural exponent")
            rest = mono[:i] + mono[i + 1:] if eb == 1 else mono[:i] + ((b, (a, eb - 1)),) + mono[i + 1:]
            _accumulate(acc, rest, coeff)
            break
    return JetExpr(acc)


def extract_multiplier(R, equation: Equation, max_steps: int = 10_000):
    """Write ``R = sum_J c_J D_J(E) + rem`` and return ``(Q, rem)``.

    ``Q = sum_J (-D)_J c_J`` is the characteristic (multiplier) of ``R`` modulo
    total divergences; ``rem`` is free of the leading derivative.  When ``R`` is a
    total divergence vanishing on solutions, ``rem`` is zero and ``Q`` is the
    conservation-law multiplier.
    """
    work = as_expr(R)
    coeffs: Dict[tuple, JetExpr] = {}
    d_memo = {(): equation.expr}

    def d_eq(idx):
        if idx not in d_memo:
            d_memo[idx] = total_derivative(d_eq(idx[:-1]), idx[-1])
        return d_memo[idx]

    for _ in range(max_steps):
        hits = _lead_instances(work, equation)
        if not hits:
            break
        K = max(hits, key=equation.rank)
        A = _strip_one(work, K)
        J = equation.excess(K)
        coeffs[J] = coeffs.get(J, JetExpr()) + A
        work = work - A * d_eq(J)
    else:
        raise OnShellError("multiplier extraction did not terminate")
    Q = JetExpr()
    for J, c in coeffs.items():
        term = total_derivative_multi(c, J)
        Q = Q - term if len(J) % 2 else Q + term
    return Q, work


def proportionality(a, b) -> Optional[RatFunc]:
    """Return ``lam`` with ``a == lam * b`` for a coefficient ``lam``, else None."""
    a, b = as_expr(a), as_expr(b)
    if b.is_zero():
        return None if not a.is_zero() else ONE
    mono, cb = b.sorted_terms()[0]
    ca = a.terms.get(mono)
    if ca is None:
        return None
    lam = ca / cb
    return lam if a == b * JetExpr.constant(lam) else None
