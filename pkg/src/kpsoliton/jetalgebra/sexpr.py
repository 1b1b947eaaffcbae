"""Plain-text s-expression form of jet expressions.

Grammar::

    expr    := atom | "(" op expr* ")"
    op      := "+" | "-" | "*" | "/" | "^" | "jet" | "fn"
    atom    := integer | rational "a/b" | "p" | "mu" | "nu"
             | "sigma" | "sigma2" | "gbs" | coordinate | jet-atom
    jet-atom:= DEP | DEP "_" [txy]+          e.g. v, v_tx, w_x
    (jet DEP c1 c2 ...)                      jet with arbitrary coordinate names
    (fn NAME ORDER ARG)                      formal function, ARG affine in coordinates
    (^ BASE EXP)                             EXP affine in p, e.g. (+ p 2)

``dumps`` prints the canonical form; ``loads(dumps(e)) == e`` for every expression.
"""

from __future__ import annotations

import re
from fractions import Fraction

from .coeff import RatFunc
from .expr import (
    COORD, FN, JET, PAR, SIGN, JetExpr, P, as_expr, coord, fn, jet, param,
    power, sign,
)

COORD_NAMES = ("t", "x", "y", "xi")
RESERVED = {"p", "mu", "nu", "sigma", "sigma2", "gbs", "jet", "fn", *COORD_NAMES}
_NUM = re.compile(r"^[+-]?\d+(/\d+)?$")
_JET = re.compile(r"^([A-Za-z][A-Za-z0-9]*)(?:_([txy]+))?$")


class SexprError(ValueError):
    pass


# ----------------------------------------------------------------------------
# reading


def tokenize(text: str):
    return text.replace("(", " ( ").replace(")", " ) ").split()


def parse_tree(text: str):
    tokens = tokenize(text)
    if not tokens:
        raise SexprError("empty expression")
    pos = 0

    def read():
        nonlocal pos
        if pos >= len(tokens):
            raise SexprError("unexpected end of input")
        tok = tokens[pos]
        pos += 1
        if tok == "(":
            out = []
            while True:
                if pos >= len(tokens):
                    raise SexprError("unbalanced parenthesis")
                if tokens[pos] == ")":
                    pos += 1
                    return out
                out.append(read())
        if tok == ")":
            raise SexprError("unexpected ')'")
        return tok

    tree = read()
    if pos != len(tokens):
        raise SexprError(f"trailing tokens: {' '.join(tokens[pos:])}")
    return tree


def _atom(tok: str) -> JetExpr:
    if _NUM.match(tok):
        return JetExpr.constant(Fraction(tok))
    if tok == "p":
        return P()
    if tok in ("mu", "nu"):
        return param(tok)
    if tok in ("sigma", "sigma2", "gbs"):
        return sign(tok)
    if tok in COORD_NAMES:
        return coord(tok)
    m = _JET.match(tok)
    if m and m.group(1) not in RESERVED:
        return jet(m.group(1), tuple(m.group(2) or ""))
    raise SexprError(f"unknown atom {tok!r}")


def _arg_from_expr(e: JetExpr):
    arg = []
    for mono, c in e.terms.items():
        if not c.is_constant():
            raise SexprError("formal-function argument coefficients must be rational")
        coords = [b for b, ex in mono if b[0] == COORD and ex == (0, 1)]
        signs = [b for b, ex in mono if b[0] == SIGN and b[1] == "sigma" and ex == (0, 1)]
        if len(coords) != 1 or len(mono) != 1 + len(signs) or len(signs) > 1:
            raise SexprError("formal-function argument must be affine in the coordinates")
        arg.append((coords[0][1], c.constant(), len(signs)))
    return arg


def build(tree) -> JetExpr:
    if isinstance(tree, str):
        return _atom(tree)
    if not tree:
        raise SexprError("empty list")
    op, args = tree[0], tree[1:]
    if not isinstance(op, str):
        raise SexprError("operator must be a symbol")
    if op == "jet":
        if not args or not isinstance(args[0], str):
            raise SexprError("(jet DEP coords...) expected")
        return jet(args[0], tuple(args[1:]))
    if op == "fn":
        if len(args) != 3 or not isinstance(args[0], str) or not isinstance(args[1], str):
            raise SexprError("(fn NAME ORDER ARG) expected")
        return fn(args[0], _arg_from_expr(build(args[2])), int(args[1]))
    vals = [build(a) for a in args]
    if op == "+":
        out = JetExpr()
        for v in vals:
            out = out + v
        return out
    if op == "*":
        out = JetExpr.constant(1)
        for v in vals:
            out = out * v
        return out
    if op == "-":
        if len(vals) == 1:
            return -vals[0]
        out = vals[0]
        for v in vals[1:]:
            out = out - v
        return out
    if op == "/":
        if len(vals) != 2:
            raise SexprError("(/ a b) takes two operands")
        return vals[0] / vals[1]
    if op == "^":
        if len(vals) != 2:
            raise SexprError("(^ base exp) takes two operands")
        return power(vals[0], vals[1])
    raise SexprError(f"unknown operator {op!r}")


def loads(text: str) -> JetExpr:
    return build(parse_tree(text))


# ----------------------------------------------------------------------------
# writing


def _poly_sexpr(coeffs) -> str:
    terms = []
    for k in range(len(coeffs) - 1, -1, -1):
        c = coeffs[k]
        if c == 0:
            continue
        mono = "" if k == 0 else ("p" if k == 1 else f"(^ p {k})")
        if not mono:
            terms.append(str(c))
        elif c == 1:
            terms.append(mono)
        else:
            terms.append(f"(* {c} {mono})")
    if not terms:
        return "0"
    return terms[0] if len(terms) == 1 else "(+ " + " ".join(terms) + ")"


def _coeff_sexpr(c: RatFunc) -> str:
    num, den = c.poly_coeffs()
    if den == [1]:
        return _poly_sexpr(num)
    return f"(/ {_poly_sexpr(num)} {_poly_sexpr(den)})"


def _arg_sexpr(arg) -> str:
    terms = []
    for c, k, s in arg:
        sym = f"(* sigma {c})" if s else c
        if k == 1:
            terms.append(sym)
        elif s:
            terms.append(f"(* {k} sigma {c})")
        else:
            terms.append(f"(* {k} {c})")
    return terms[0] if len(terms) == 1 else "(+ " + " ".join(terms) + ")"


def _base_sexpr(base) -> str:
    kind = base[0]
    if kind in (SIGN, PAR, COORD):
        return base[1]
    if kind == JET:
        dep, idx = base[1], base[2]
        if not idx:
            return dep
        if all(c in ("t", "x", "y") for c in idx):
            return f"{dep}_{''.join(idx)}"
        return "(jet " + " ".join((dep,) + idx) + ")"
    return f"(fn {base[1]} {base[2]} {_arg_sexpr(base[3])})"


def _factor_sexpr(base, exp) -> str:
    a, b = exp
    s = _base_sexpr(base)
    if a == 0 and b == 1:
        return s
    return f"(^ {s} {_poly_sexpr([b, a] if a != 0 else [b])})"


def dumps(e) -> str:
    e = as_expr(e)
    if e.is_zero():
        return "0"
    terms = []
    for mono, c in e.sorted_terms():
        factors = [_factor_sexpr(b, ex) for b, ex in mono]
        if c != 1 or not factors:
            factors.insert(0, _coeff_sexpr(c))
        terms.append(factors[0] if len(factors) == 1 else "(* " + " ".join(factors) + ")")
    return terms[0] if len(terms) == 1 else "(+ " + " ".join(terms) + ")"
