"""Numeric evaluation of jet expressions on sampled values."""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, Dict, Mapping, Optional

import numpy as np

from .expr import Base, as_expr, base_name


def real_power(x, e: Fraction):
    """``x**e`` on the reals; negative ``x`` needs an odd denominator in ``e``."""
    e = Fraction(e)
    x = np.asarray(x, dtype=float)
    if e.denominator == 1:
        return x ** int(e)
    if np.any(x < 0):
        if e.denominator % 2 == 0:
            raise ValueError(f"negative base with exponent {e} has no real value")
        sgn = -1.0 if e.numerator % 2 else 1.0
        return np.where(x < 0, sgn * np.abs(x) ** float(e), np.abs(x) ** float(e))
    return x ** float(e)


def evaluate(e, env: Mapping, p: Optional[Fraction] = None,
             resolve: Optional[Callable[[Base], object]] = None):
    """Evaluate ``e``.  ``env`` maps base names (``'U'``, ``'mu'``, ``'sigma2'``...)
    or base tuples to numbers/arrays; ``resolve`` is a fallback per base."""
    e = as_expr(e)
    pf = None if p is None else Fraction(p)
    total = 0.0
    cache: Dict[Base, object] = {}

    def value(b: Base):
        if b in cache:
            return cache[b]
        if b in env:
            v = env[b]
        elif base_name(b) in env:
            v = env[base_name(b)]
        elif resolve is not None:
            v = resolve(b)
        else:
            raise KeyError(f"no value for {base_name(b)}")
        cache[b] = v
        return v

    for mono, coeff in e.terms.items():
        if pf is None:
            if not coeff.is_constant():
                raise ValueError("coefficient depends on p; pass a numeric p")
            c = float(coeff.constant())
        else:
            c = float(coeff.subs_p(pf).constant())
        term = c
        for b, (a, bb) in mono:
            ex = bb if a == 0 else (a * pf + bb if pf is not None else None)
            if ex is None:
                raise ValueError("exponent depends on p; pass a numeric p")
            term = term * real_power(value(b), ex)
        total = total + term
    return total


__all__ = ["evaluate", "real_power"]
