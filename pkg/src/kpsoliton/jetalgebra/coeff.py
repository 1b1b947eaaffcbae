"""Exact coefficients: rational functions of the nonlinearity power ``p``.

Backed by FLINT's ``fmpq_poly``; a value is a reduced ``num/den`` pair with a
monic denominator, so equal rational functions compare equal structurally.
"""

from __future__ import annotations

from fractions import Fraction

import flint

_ONE = flint.fmpq_poly([1])
_ZERO = flint.fmpq_poly([])
_P = flint.fmpq_poly([0, 1])


def _to_fraction(q) -> Fraction:
    return Fraction(int(q.p), int(q.q))


class RatFunc:
    """Element of Q(p)."""

    __slots__ = ("num", "den", "_hash")

    def __init__(self, num, den=None, _reduced=False):
        if not isinstance(num, flint.fmpq_poly):
            num = _poly_from_scalar(num)
        if den is None:
            den = _ONE
            _reduced = True
        elif not isinstance(den, flint.fmpq_poly):
            den = _poly_from_scalar(den)
        if not _reduced:
            if den == 0:
                raise ZeroDivisionError("rational function with zero denominator")
            if num == 0:
                num, den = _ZERO, _ONE
            elif den.degree() > 0:
                g = num.gcd(den)
                if g.degree() > 0:
                    num, den = num // g, den // g
            lead = den.coeffs()[-1]
            if lead != 1:
                num, den = num / lead, den / lead
        self.num = num
        self.den = den
        self._hash = None

    # construction -----------------------------------------------------
    @classmethod
    def p(cls) -> "RatFunc":
        return cls(_P)

    @classmethod
    def affine(cls, a, b) -> "RatFunc":
        """The polynomial ``a*p + b``."""
        return cls(flint.fmpq_poly([_fmpq(b), _fmpq(a)]))

    @classmethod
    def coerce(cls, value) -> "RatFunc":
        if isinstance(value, RatFunc):
            return value
        return cls(_poly_from_scalar(value))

    # predicates -------------------------------------------------------
    def is_zero(self) -> bool:
        return self.num == 0

    def is_constant(self) -> bool:
        return self.num.degree() <= 0 and self.den.degree() == 0

    def constant(self) -> Fraction:
        if not self.is_constant():
            raise ValueError(f"{self} depends on p")
        if self.num == 0:
            return Fraction(0)
        return _to_fraction(self.num.coeffs()[0])

    # arithmetic -------------------------------------------------------
    def __add__(self, other):
        other = _coerce_or_none(other)
        if other is None:
            return NotImplemented
        if self.den == other.den:
            if self.den == 1:
                return RatFunc(self.num + other.num, _ONE, _reduced=True)
            return RatFunc(self.num + other.num, self.den)
        return RatFunc(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self):
        return RatFunc(-self.num, self.den, _reduced=True)

    def __sub__(self, other):
        other = _coerce_or_none(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = _coerce_or_none(other)
        if other is None:
            return NotImplemented
        if self.den == 1 and other.den == 1:
            return RatFunc(self.num * other.num, _ONE, _reduced=True)
        return RatFunc(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _coerce_or_none(other)
        if other is None:
            return NotImplemented
        if other.is_zero():
            raise ZeroDivisionError("division by the zero rational function")
        return RatFunc(self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other):
        return RatFunc.coerce(other) / self

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return RatFunc(_ONE) / (self ** (-n))
        return RatFunc(self.num ** n, self.den ** n, _reduced=True)

    def __eq__(self, other):
        other = _coerce_or_none(other)
        if other is None:
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((str(self.num), str(self.den)))
        return self._hash

    def __bool__(self):
        return not self.is_zero()

    # evaluation -------------------------------------------------------
    def subs_p(self, value) -> "RatFunc":
        """Exact substitution of a rational value for ``p``."""
        value = _fmpq(value)
        den = self.den(value)
        if den == 0:
            raise ZeroDivisionError(f"denominator {self.den} vanishes at p={value}")
        return RatFunc(flint.fmpq_poly([self.num(value) / den]), _ONE, _reduced=True)

    def __call__(self, value: float) -> float:
        num = self.num.coeffs()
        den = self.den.coeffs()
        return _horner(num, value) / _horner(den, value)

    def poly_coeffs(self):
        """Numerator and denominator coefficient lists (ascending, as Fractions)."""
        return ([_to_fraction(c) for c in self.num.coeffs()],
                [_to_fraction(c) for c in self.den.coeffs()])

    def __repr__(self):
        if self.den == 1:
            return _poly_str(self.num)
        return f"({_poly_str(self.num)})/({_poly_str(self.den)})"


def _horner(coeffs, x):
    acc = 0.0
    for c in reversed(coeffs):
        acc = acc * x + float(_to_fraction(c))
    return acc


def _fmpq(value):
    if isinstance(value, flint.fmpq):
        return value
    if isinstance(value, Fraction):
        return flint.fmpq(value.numerator, value.denominator)
    if isinstance(value, int):
        return flint.fmpq(value)
    raise TypeError(f"exact rational expected, got {value!r}")


def _poly_from_scalar(value):
    return flint.fmpq_poly([_fmpq(value)]) if value != 0 else _ZERO


def _coerce_or_none(value):
    if isinstance(value, RatFunc):
        return value
    if isinstance(value, (int, Fraction, flint.fmpq)):
        return RatFunc(_poly_from_scalar(value), _ONE, _reduced=True)
    return None


def _poly_str(poly) -> str:
    coeffs = [_to_fraction(c) for c in poly.coeffs()]
    if not coeffs:
        return "0"
    parts = []
    for k in range(len(coeffs) - 1, -1, -1):
        c = coeffs[k]
        if c == 0:
            continue
        mono = "" if k == 0 else ("p" if k == 1 else f"p^{k}")
        if mono and abs(c) == 1:
            term = ("-" if c < 0 else "") + mono
        else:
            term = str(c) + (f"*{mono}" if mono else "")
        parts.append(term)
    return " + ".join(parts).replace("+ -", "- ")


ZERO = RatFunc(_ZERO, _ONE, _reduced=True)
ONE = RatFunc(_ONE, _ONE, _reduced=True)
