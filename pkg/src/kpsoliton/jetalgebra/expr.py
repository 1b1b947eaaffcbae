"""Polynomial expressions over jet space in canonical (expanded) form.

A :class:`JetExpr` is a finite sum ``sum_m c_m * m`` where each coefficient
``c_m`` lies in Q(p) and each monomial ``m`` is a product of powers of *bases*:

* sign symbols ``sigma``, ``sigma2`` and ``gbs`` with ``sigma*sigma = sigma2``,
  ``sigma2**2 = 1`` and ``gbs**2 = 1``;
* constant parameters ``mu`` and ``nu``;
* independent coordinates ``t, x, y`` (and ``xi`` for travelling waves);
* formal functions ``f(arg)`` of an affine argument, tagged by derivative order;
* jet coordinates ``v_J`` with ``J`` a sorted multi-index.

Exponents are affine in ``p``: ``a*p + b`` with rational ``a``, ``b``.
Every arithmetic operation returns the canonical form, so structural equality
is mathematical equality in this class.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterable, Tuple, Union

from .coeff import ONE, ZERO, RatFunc

SIGN, PAR, COORD, FN, JET = range(5)

SIGN_NAMES = ("sigma", "sigma2", "gbs")
PAR_NAMES = ("mu", "nu")
COORDS = ("t", "x", "y")

Exp = Tuple[Fraction, Fraction]
Base = tuple
Monomial = Tuple[Tuple[Base, Exp], ...]

_F0 = Fraction(0)
_F1 = Fraction(1)


class NonAffineExponentError(ValueError):
    """Raised when an exponent would leave the affine-in-p class."""


# ----------------------------------------------------------------------------
# bases


def jet_base(dep: str, idx: Iterable[str] = ()) -> Base:
    if isinstance(idx, str):
        idx = tuple(idx)
    return (JET, dep, tuple(sorted(idx)))


def fn_base(name: str, arg, order: int = 0) -> Base:
    return (FN, name, int(order), canonical_arg(arg))


def canonical_arg(arg) -> tuple:
    """Canonical affine argument ``sum c_i * sigma^k_i * coord_i``.

    ``arg`` is either a coordinate name or an iterable of
    ``(coord, coefficient[, sigma_power])`` triples.
    """
    if isinstance(arg, str):
        return ((arg, _F1, 0),)
    acc: Dict[Tuple[str, int], Fraction] = {}
    for item in arg:
        coord, c = item[0], Fraction(item[1])
        k = item[2] if len(item) > 2 else 0
        if k not in (0, 1):
            raise ValueError("sigma power in an argument must be 0 or 1")
        acc[(coord, k)] = acc.get((coord, k), _F0) + c
    out = tuple(sorted((c, v, k) for (c, k), v in acc.items() if v != 0))
    if not out:
        raise ValueError("formal function argument must be non-constant")
    return out


def base_name(base: Base) -> str:
    kind = base[0]
    if kind in (SIGN, PAR, COORD):
        return base[1]
    if kind == JET:
        dep, idx = base[1], base[2]
        if not idx:
            return dep
        if all(len(c) == 1 for c in idx):
            return f"{dep}_{''.join(idx)}"
        return f"{dep}_{{{','.join(idx)}}}"
    name, order, arg = base[1], base[2], base[3]
    primes = "'" * order if order <= 4 else f"^({order})"
    return f"{name}{primes}({arg_str(arg)})"


def arg_str(arg) -> str:
    parts = []
    for coord, c, k in arg:
        sym = ("sigma*" if k else "") + coord
        if c == 1:
            parts.append(f"+{sym}")
        elif c == -1:
            parts.append(f"-{sym}")
        else:
            parts.append(f"{'+' if c > 0 else '-'}{abs(c)}*{sym}")
    s = "".join(parts)
    return s[1:] if s.startswith("+") else s


# ----------------------------------------------------------------------------
# monomials


def _exp_add(e1: Exp, e2: Exp) -> Exp:
    return (e1[0] + e2[0], e1[1] + e2[1])


def _reduce_signs(factors: Dict[Base, Exp]) -> None:
    sig = (SIGN, "sigma")
    sig2 = (SIGN, "sigma2")
    if sig in factors:
        a, b = factors.pop(sig)
        if a != 0 or b.denominator != 1:
            raise NonAffineExponentError("sign symbols take integer exponents only")
        q, r = divmod(int(b), 2)
        if r:
            factors[sig] = (_F0, _F1)
        if q:
            prev = factors.get(sig2, (_F0, _F0))
            factors[sig2] = (_F0, prev[1] + q)
    for name in ("sigma2", "gbs"):
        key = (SIGN, name)
        if key in factors:
            a, b = factors.pop(key)
            if a != 0 or b.denominator != 1:
                raise NonAffineExponentError("sign symbols take integer exponents only")
            if int(b) % 2:
                factors[key] = (_F0, _F1)


@lru_cache(maxsize=200_000)
def mono_mul(m1: Monomial, m2: Monomial) -> Monomial:
    if not m1:
        return m2
    if not m2:
        return m1
    factors = dict(m1)
    has_sign = False
    for base, e in m2:
        if base in factors:
            s = _exp_add(factors[base], e)
            if s[0] == 0 and s[1] == 0:
                del factors[base]
            else:
                factors[base] = s
            if base[0] == SIGN:
                has_sign = True
        else:
            factors[base] = e
    if has_sign:
        _reduce_signs(factors)
    return tuple(sorted(factors.items()))


def mono_pow(m: Monomial, a: Fraction, b: Fraction) -> Monomial:
    """Raise a monomial to the affine exponent ``a*p + b``."""
    factors = {}
    for base, (ea, eb) in m:
        if ea != 0 and a != 0:
            raise NonAffineExponentError("exponent would be quadratic in p")
        na, nb = ea * b + eb * a, eb * b
        if na != 0 or nb != 0:
            factors[base] = (na, nb)
    _reduce_signs(factors)
    return tuple(sorted(factors.items()))


def mono_str(m: Monomial) -> str:
    parts = []
    for base, (a, b) in m:
        name = base_name(base)
        if a == 0 and b == 1:
            parts.append(name)
        elif a == 0 and b.denominator == 1 and b > 0:
            parts.append(f"{name}^{b}")
        else:
            parts.append(f"{name}^({exp_str((a, b))})")
    return "*".join(parts) if parts else "1"


def exp_str(e: Exp) -> str:
    a, b = e
    if a == 0:
        return str(b)
    head = "p" if a == 1 else ("-p" if a == -1 else f"{a}*p")
    if b == 0:
        return head
    return f"{head}{'+' if b > 0 else '-'}{abs(b)}"


# ----------------------------------------------------------------------------
# expressions


Scalar = Union[int, Fraction, RatFunc]


class JetExpr:
    """Canonical polynomial over jet space with coefficients in Q(p)."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms: Dict[Monomial, RatFunc] = terms if terms is not None else {}

    # construction -----------------------------------------------------
    @staticmethod
    def from_terms(items) -> "JetExpr":
        acc: Dict[Monomial, RatFunc] = {}
        for mono, c in items:
            _accumulate(acc, mono, c)
        return JetExpr(acc)

    @staticmethod
    def constant(value: Scalar) -> "JetExpr":
        c = RatFunc.coerce(value)
        return JetExpr({(): c} if c else {})

    @staticmethod
    def of_base(base: Base, exponent: Exp = (_F0, _F1)) -> "JetExpr":
        factors = {base: exponent}
        if base[0] == SIGN:
            _reduce_signs(factors)
        return JetExpr({tuple(sorted(factors.items())): ONE})

    # inspection -------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __len__(self):
        return len(self.terms)

    def is_coefficient(self) -> bool:
        """True when the expression is a pure element of Q(p)."""
        return all(m == () for m in self.terms)

    def coefficient(self) -> RatFunc:
        if not self.is_coefficient():
            raise ValueError(f"{self} is not a pure coefficient")
        return self.terms.get((), ZERO)

    def bases(self) -> set:
        out = set()
        for m in self.terms:
            out.update(b for b, _ in m)
        return out

    def jets(self, dep: str = None) -> set:
        return {b for b in self.bases() if b[0] == JET and (dep is None or b[1] == dep)}

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda kv: kv[0])

    def leading_term(self) -> "JetExpr":
        mono, c = self.sorted_terms()[-1]
        return JetExpr({mono: c})

    # arithmetic -------------------------------------------------------
    def __add__(self, other):
        other = as_expr(other)
        if not other.terms:
            return self
        acc = dict(self.terms)
        for mono, c in other.terms.items():
            _accumulate(acc, mono, c)
        return JetExpr(acc)

    __radd__ = __add__

    def __neg__(self):
        return JetExpr({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-as_expr(other))

    def __rsub__(self, other):
        return as_expr(other) - self

    def __mul__(self, other):
        other = as_expr(other)
        if not self.terms or not other.terms:
            return JetExpr()
        acc: Dict[Monomial, RatFunc] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                _accumulate(acc, mono_mul(m1, m2), c1 * c2)
        return JetExpr(acc)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = as_expr(other)
        if other.is_coefficient():
            c = other.coefficient()
            if not c:
                raise ZeroDivisionError("division by zero expression")
            inv = ONE / c
            return JetExpr({m: k * inv for m, k in self.terms.items()})
        if len(other.terms) == 1:
            return self * power(other, -1)
        raise ValueError("division only by a coefficient or a single monomial")

    def __rtruediv__(self, other):
        return as_expr(other) / self

    def __pow__(self, exponent):
        return power(self, exponent)

    def __eq__(self, other):
        try:
            other = as_expr(other)
        except TypeError:
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    # display ----------------------------------------------------------
    def __repr__(self):
        return f"JetExpr({self})"

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for mono, c in self.sorted_terms():
            ms = mono_str(mono)
            if c == 1:
                s = ms
            elif c == -1:
                s = "-" + ms
            else:
                cs = repr(c)
                if not c.is_constant():
                    cs = f"({cs})"
                s = cs if ms == "1" else f"{cs}*{ms}"
            parts.append(s)
        return " + ".join(parts).replace("+ -", "- ")


def _accumulate(acc, mono, c):
    prev = acc.get(mono)
    s = c if prev is None else prev + c
    if s.is_zero():
        acc.pop(mono, None)
    else:
        acc[mono] = s


def as_expr(value) -> JetExpr:
    if isinstance(value, JetExpr):
        return value
    if isinstance(value, (int, Fraction, RatFunc)):
        return JetExpr.constant(value)
    raise TypeError(f"cannot interpret {value!r} as a jet expression")


def affine_exponent(exponent) -> Exp:
    """Coerce ``int``/``Fraction``/coefficient expression to ``(a, b)``."""
    if isinstance(exponent, tuple):
        return (Fraction(exponent[0]), Fraction(exponent[1]))
    if isinstance(exponent, (int, Fraction)):
        return (_F0, Fraction(exponent))
    if isinstance(exponent, JetExpr):
        if not exponent.is_coefficient():
            raise NonAffineExponentError(f"exponent {exponent} is not a function of p alone")
        exponent = exponent.coefficient()
    if isinstance(exponent, RatFunc):
        num, den = exponent.poly_coeffs()
        if den != [1] or len(num) > 2:
            raise NonAffineExponentError(f"exponent {exponent!r} is not affine in p")
        num = num + [_F0] * (2 - len(num))
        return (num[1], num[0])
    raise TypeError(f"bad exponent {exponent!r}")


def power(e, exponent) -> JetExpr:
    e = as_expr(e)
    a, b = affine_exponent(exponent)
    if a == 0 and b.denominator == 1 and b >= 0:
        n = int(b)
        out = JetExpr.constant(1)
        sq = e
        while n:
            if n & 1:
                out = out * sq
            n >>= 1
            if n:
                sq = sq * sq
        return out
    if len(e.terms) != 1:
        raise NonAffineExponentError(
            f"cannot raise a sum of {len(e.terms)} terms to the power {exp_str((a, b))}")
    (mono, c), = e.terms.items()
    if c != 1:
        if a == 0 and b.denominator == 1:
            return JetExpr({mono_pow(mono, a, b): c ** int(b)})
        raise NonAffineExponentError("only unit-coefficient monomials take symbolic powers")
    return JetExpr({mono_pow(mono, a, b): ONE})


# ----------------------------------------------------------------------------
# convenience constructors


def const(value) -> JetExpr:
    return JetExpr.constant(value if not isinstance(value, str) else Fraction(value))


def P() -> JetExpr:
    """The formal nonlinearity power ``p`` as a coefficient."""
    return JetExpr.constant(RatFunc.p())


def coord(name: str) -> JetExpr:
    return JetExpr.of_base((COORD, name))


def param(name: str) -> JetExpr:
    return JetExpr.of_base((PAR, name))


def sign(name: str) -> JetExpr:
    if name not in SIGN_NAMES:
        raise ValueError(f"unknown sign symbol {name!r}")
    return JetExpr.of_base((SIGN, name))


def jet(dep: str, idx: Iterable[str] = ()) -> JetExpr:
    return JetExpr.of_base(jet_base(dep, idx))


def fn(name: str, arg="t", order: int = 0) -> JetExpr:
    return JetExpr.of_base(fn_base(name, arg, order))


class JetVar:
    """Attribute access to the jet of one dependent variable: ``v.tx``."""

    def __init__(self, dep: str):
        self.dep = dep

    def __call__(self, *coords: str) -> JetExpr:
        return jet(self.dep, coords)

    def __getattr__(self, idx: str) -> JetExpr:
        if idx.startswith("_"):
            raise AttributeError(idx)
        if not set(idx) <= set(COORDS):
            raise AttributeError(f"jet index {idx!r} must use t, x, y")
        return jet(self.dep, idx)


class FormalFunction:
    """A formal function of one affine argument: ``f3 = FormalFunction('f3', 't')``."""

    def __init__(self, name: str, arg="t"):
        self.name = name
        self.arg = canonical_arg(arg)

    def __call__(self, order: int = 0) -> JetExpr:
        return fn(self.name, self.arg, order)

    def d(self, order: int) -> JetExpr:
        return fn(self.name, self.arg, order)
