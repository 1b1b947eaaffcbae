"""Symmetry generators and conservation laws of the two models, entered verbatim.

Nothing here is corrected by hand: the verifier decides whether an entry holds.
For the Boussinesq model the upper sign of ``+-`` is ``gbs = +1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from ..jetalgebra import (
    FormalFunction, JetExpr, JetVar, P, coord, relabel_functions, sign,
    substitute_function,
)
from ..models import GB2D, GKP

ANY_P = "p != 0"
P_EQ_1 = "p = 1"


def p_condition_holds(condition: str, p: Optional[Fraction]) -> bool:
    """Symbolic ``p`` (None) satisfies only the generic condition."""
    if condition == ANY_P:
        return True
    return p is not None and p == 1


@dataclass(frozen=True)
class SymmetryGenerator:
    name: str
    tau: JetExpr
    xi_x: JetExpr
    xi_y: JetExpr
    eta: JetExpr
    validity: str = ANY_P
    # expected classification: "always", "p=1" or "never"
    variational: str = "always"
    formal_functions: Tuple[str, ...] = ()
    erratum_of: str = ""
    note: str = ""

    @property
    def characteristic(self) -> JetExpr:
        v = JetVar("v")
        return self.eta - self.xi_x * v.x - self.xi_y * v.y - self.tau * v.t


@dataclass(frozen=True)
class ConsLaw:
    name: str
    T: JetExpr
    X: JetExpr
    Y: JetExpr
    source_symmetry: str
    validity: str = ANY_P
    formal_functions: Tuple[str, ...] = ()
    # how the source characteristic is restricted/relabelled to match this law
    source_relabel: Dict[str, str] = field(default_factory=dict)
    source_zero: Tuple[str, ...] = ()
    quantity: str = ""
    erratum_of: str = ""
    note: str = ""

    def multiplier_from(self, gen: SymmetryGenerator) -> JetExpr:
        Q = gen.characteristic
        for name in self.source_zero:
            Q = substitute_function(Q, name, [])
        if self.source_relabel:
            Q = relabel_functions(Q, self.source_relabel)
        return Q


@dataclass(frozen=True)
class Registry:
    """Printed entries plus separately flagged errata (``erratum_of`` set)."""

    kind: str
    generators: List[SymmetryGenerator]
    conslaws: List[ConsLaw]
    errata_generators: List[SymmetryGenerator] = field(default_factory=list)
    errata_conslaws: List[ConsLaw] = field(default_factory=list)

    def generator(self, name: str) -> SymmetryGenerator:
        for g in self.generators + self.errata_generators:
            if g.name == name:
                return g
        raise KeyError(name)

    def conslaw(self, name: str) -> ConsLaw:
        for c in self.conslaws + self.errata_conslaws:
            if c.name == name:
                return c
        raise KeyError(name)

    def multiplier(self, cl: ConsLaw) -> JetExpr:
        return cl.multiplier_from(self.generator(cl.source_symmetry))


def _half(e) -> JetExpr:
    return JetExpr.constant(Fraction(1, 2)) * e


def _q(a: int, b: int) -> JetExpr:
    return JetExpr.constant(Fraction(a, b))


# ----------------------------------------------------------------------------
# generalized KP


def _gkp_generators() -> List[SymmetryGenerator]:
    t, x, y = coord("t"), coord("x"), coord("y")
    s2, p = sign("sigma2"), P()
    one, zero = JetExpr.constant(1), JetExpr()
    v = JetVar("v")
    f1, f2, f3, f4, f5 = (FormalFunction(f"f{i}", "t") for i in range(1, 6))
    return [
        SymmetryGenerator("gkp-symm1", zero, one, zero, zero),
        SymmetryGenerator("gkp-symm2", zero, zero, one, zero),
        SymmetryGenerator("gkp-symm3", one, zero, zero, zero),
        SymmetryGenerator("gkp-symm4", 3 * t, x, 2 * y, (1 - 2 / p) * v(), variational="p=1"),
        SymmetryGenerator("gkp-symm5", zero, y, -2 * s2 * t, zero),
        SymmetryGenerator("gkp-symm6", zero, zero, zero, f1() + f2() * y,
                          formal_functions=("f1", "f2")),
        SymmetryGenerator(
            "gkp-symm7",
            f3(),
            -_q(1, 6) * s2 * f3.d(2) * y ** 2 - _half(s2 * f4.d(1) * y)
            + _q(1, 3) * f3.d(1) * x + f5(),
            _q(2, 3) * f3.d(1) * y + f4(),
            _q(1, 72) * f3.d(4) * y ** 4 + _q(1, 12) * s2 * f4.d(3) * y ** 3
            - _q(1, 6) * s2 * f3.d(3) * y ** 2 * x - _half(s2 * f5.d(2) * y ** 2)
            - _half(f4.d(2) * y * x)
            + _q(1, 6) * f3.d(2) * x ** 2 + f5.d(1) * x - _q(1, 3) * f3.d(1) * v(),
            validity=P_EQ_1, formal_functions=("f3", "f4", "f5"),
        ),
    ]


def _gkp_conslaws() -> List[ConsLaw]:
    t, x, y = coord("t"), coord("x"), coord("y")
    s2, p = sign("sigma2"), P()
    v = JetVar("v")
    f1, f2 = FormalFunction("f1", "t"), FormalFunction("f2", "t")
    f3, f4, f5 = (FormalFunction(f"f{i}", "t") for i in (3, 4, 5))
    q = _q
    laws = [
        ConsLaw(
            "gkp-conslaw1",
            _half(v.xx ** 2) - _half(s2 * v.y ** 2) - v.x ** (p + 2) / ((p + 1) * (p + 2)),
            v.t * v.xxx - v.tx * v.xx + v.x ** (p + 1) * v.t / (p + 1) + _half(v.t ** 2),
            s2 * v.t * v.y,
            "gkp-symm3", quantity="energy",
        ),
        ConsLaw(
            "gkp-conslaw2",
            _half(v.x ** 2),
            v.x * v.xxx - _half(v.xx ** 2) + v.x ** (p + 2) / (p + 2) - _half(s2 * v.y ** 2),
            s2 * v.x * v.y,
            "gkp-symm1", quantity="x-momentum",
        ),
        ConsLaw(
            "gkp-conslaw3",
            _half(v.x * v.y),
            v.y * v.xxx - v.xx * v.xy + v.y * v.x ** (p + 1) / (p + 1) + _half(v.t * v.y),
            _half(v.xx ** 2) + _half(s2 * v.y ** 2) - v.x ** (p + 2) / ((p + 1) * (p + 2))
            - _half(v.t * v.x),
            "gkp-symm2", quantity="y-momentum",
        ),
        ConsLaw(
            "gkp-conslaw4",
            _half(y * v.x ** 2) - s2 * t * v.y * v.x,
            (y * v.x - 2 * s2 * t * v.y) * v.xxx - _half(y * v.xx ** 2)
            + 2 * s2 * t * v.xy * v.xx - _half(s2 * y * v.y ** 2) - s2 * t * v.y * v.t
            - 2 * s2 * t * v.y * v.x ** (p + 1) / (p + 1) + y * v.x ** (p + 2) / (p + 2),
            -s2 * t * v.xx ** 2 - t * v.y ** 2 + s2 * y * v.y * v.x + s2 * t * v.t * v.x
            + 2 * s2 * t * v.x ** (p + 2) / ((p + 1) * (p + 2)),
            "gkp-symm5", quantity="rotation-boost momentum",
        ),
        ConsLaw(
            "gkp-conslaw5",
            JetExpr(),
            (v.x ** (p + 1) / (p + 1) + v.xxx + v.t) * (f1() * y + f2()),
            s2 * ((y * v.y - v()) * f1() + f2() * v.y),
            "gkp-symm6", formal_functions=("f1", "f2"),
            source_relabel={"f1": "f2", "f2": "f1"}, quantity="topological charges",
        ),
        ConsLaw(
            "gkp-conslaw6",
            _half(f5() * v.x ** 2) + f5.d(1) * v(),
            s2 * (f5() * v.x + _half(f5.d(2) * y ** 2) - f5.d(1) * x) * v.xxx
            - _half(f5() * v.xx ** 2) + f5.d(1) * v.xx + q(1, 3) * f5() * v.x ** 3
            + (q(1, 4) * s2 * y ** 2 * f5.d(2) - _half(f5.d(1) * x)) * v.x ** 2
            - _half(s2 * f5() * v.y ** 2) + (_half(s2 * f5.d(2) * y ** 2) - f5.d(1) * x) * v.t,
            s2 * f5() * v.x * v.y + (_half(f5.d(2) * y ** 2) - s2 * f5.d(1) * x) * v.y
            - f5.d(2) * y * v(),
            "gkp-symm7", validity=P_EQ_1, formal_functions=("f5",),
            source_zero=("f3", "f4"), quantity="dilational x-momentum",
        ),
        ConsLaw(
            "gkp-conslaw7",
            -q(1, 4) * s2 * f4.d(1) * y * v.x ** 2 + _half(f4() * v.y * v.x)
            - _half(s2 * f4.d(2) * y * v()),
            (-_half(s2 * f4.d(1) * y * v.x) + f4() * v.y - q(1, 12) * f4.d(3) * y ** 3
             + _half(s2 * f4.d(2) * y * x)) * v.xxx
            + q(1, 4) * s2 * f4.d(1) * y * v.xx ** 2
            - (f4() * v.xy + _half(s2 * f4.d(2) * y)) * v.xx
            - q(1, 6) * s2 * f4.d(1) * y * v.x ** 3
            + (_half(f4() * v.y) - q(1, 24) * f4.d(3) * y ** 3
               + q(1, 4) * s2 * f4.d(2) * y * x) * v.x ** 2
            + q(1, 4) * f4.d(1) * y * v.y ** 2 + _half(f4() * v.t * v.y)
            + (-q(1, 12) * f4.d(3) * y ** 3 + _half(s2 * x * y * f4.d(2))) * v.t,
            _half(f4() * v.xx ** 2) - q(1, 6) * f4() * v.x ** 3
            - (_half(f4.d(1) * y * v.y) + _half(f4() * v.t)) * v.x
            + _half(s2 * f4() * v.y ** 2)
            + (-q(1, 12) * s2 * f4.d(3) * y ** 3 + _half(f4.d(2) * y * x)) * v.y
            + (q(1, 4) * s2 * f4.d(3) * y ** 2 - _half(f4.d(2) * x)) * v(),
            "gkp-symm7", validity=P_EQ_1, formal_functions=("f4",),
            source_zero=("f3", "f5"), quantity="dilational y-momentum",
        ),
        ConsLaw(
            "gkp-conslaw8",
            _half(f3() * v.xx ** 2) - q(1, 6) * f3() * v.x ** 3
            + q(1, 12) * (2 * f3.d(1) * x - s2 * f3.d(2) * y ** 2) * v.x ** 2
            + q(1, 3) * f3.d(1) * y * v.y * v.x
            - _half(s2 * f3() * v.y ** 2)
            + q(1, 6) * (2 * f3.d(2) * x - s2 * f3.d(3) * y ** 2) * v(),
            ((-q(1, 6) * s2 * f3.d(2) * y ** 2 + q(1, 3) * f3.d(1) * x) * v.x
             + q(2, 3) * f3.d(1) * y * v.y
             + f3() * v.t + q(1, 3) * f3.d(1) * v()
             - q(1, 72) * f3.d(4) * y ** 4
             + q(1, 6) * s2 * f3.d(3) * y ** 2 * x - q(1, 6) * f3.d(2) * x ** 2) * v.xxx
            + (q(1, 12) * s2 * f3.d(2) * y ** 2 - q(1, 6) * f3.d(1) * x) * v.xx ** 2
            + (-q(2, 3) * f3.d(1) * y * v.xy - q(2, 3) * f3.d(1) * v.x
               - q(1, 6) * s2 * f3.d(3) * y ** 2
               + q(1, 3) * f3.d(2) * x - f3() * v.tx) * v.xx
            + (-q(1, 18) * s2 * f3.d(2) * y ** 2 + q(1, 9) * f3.d(1) * x) * v.x ** 3
            + (q(1, 3) * f3.d(1) * y * v.y + _half(f3() * v.t) + q(1, 6) * f3.d(1) * v()
               - q(1, 144) * f3.d(4) * y ** 4 + q(1, 12) * s2 * f3.d(3) * y ** 2 * x
               - q(1, 12) * f3.d(2) * x ** 2) * v.x ** 2
            - q(1, 3) * f3.d(2) * v.x
            + (q(1, 12) * f3.d(2) * y ** 2 - q(1, 6) * s2 * f3.d(1) * x) * v.y ** 2
            + q(1, 3) * f3.d(1) * y * v.t * v.y + _half(f3() * v.t ** 2)
            + (q(1, 3) * f3.d(1) * v() - q(1, 72) * f3.d(4) * y ** 4
               + q(1, 6) * s2 * f3.d(3) * y ** 2 * x - q(1, 6) * f3.d(2) * x ** 2) * v.t,
            q(1, 3) * f3.d(1) * y * v.xx ** 2
            - q(1, 9) * f3.d(1) * y * v.x ** 3
            + ((-q(1, 6) * f3.d(2) * y ** 2 + q(1, 3) * s2 * f3.d(1) * x) * v.y
               - q(1, 3) * f3.d(1) * y * v.t) * v.x
            + q(1, 3) * s2 * f3.d(1) * y * v.y ** 2
            + (s2 * f3() * v.t + q(1, 3) * s2 * f3.d(1) * v()
               - q(1, 72) * s2 * f3.d(4) * y ** 4 + q(1, 6) * f3.d(3) * y ** 2 * x
               - q(1, 6) * s2 * f3.d(2) * x ** 2) * v.y
            + (q(1, 18) * s2 * f3.d(4) * y ** 3 - q(1, 3) * f3.d(3) * y * x) * v(),
            "gkp-symm7", validity=P_EQ_1, formal_functions=("f3",),
            source_zero=("f4", "f5"), quantity="dilational energy",
        ),
    ]
    return laws


# ----------------------------------------------------------------------------
# 2D generalized Boussinesq


def _gb_generators() -> List[SymmetryGenerator]:
    t, x, y = coord("t"), coord("x"), coord("y")
    s2 = sign("sigma2")
    one, zero = JetExpr.constant(1), JetExpr()
    v = JetVar("v")
    f1 = FormalFunction("f1", (("y", 1), ("t", 1, 1)))
    f2 = FormalFunction("f2", (("y", 1), ("t", -1, 1)))
    return [
        SymmetryGenerator("gb-symm1", zero, one, zero, zero),
        SymmetryGenerator("gb-symm2", zero, zero, one, zero),
        SymmetryGenerator("gb-symm3", one, zero, zero, zero),
        SymmetryGenerator("gb-symm4", y, zero, s2 * t, zero),
        SymmetryGenerator("gb-symm5", zero, zero, zero, f1() + f2(),
                          formal_functions=("f1", "f2")),
        SymmetryGenerator("gb-symm6", 2 * t, x, 2 * y, -(v() + x),
                          validity=P_EQ_1, variational="never"),
    ]


def _gb_conslaws() -> List[ConsLaw]:
    t, y = coord("t"), coord("y")
    s2, s, sig, p = sign("sigma2"), sign("gbs"), sign("sigma"), P()
    v = JetVar("v")
    f1 = FormalFunction("f1", (("y", 1), ("t", 1, 1)))
    f2 = FormalFunction("f2", (("y", 1), ("t", -1, 1)))
    F, dF = f1() + f2(), f1.d(1) - f2.d(1)
    return [
        ConsLaw(
            "gb-conslaw1",
            _half(v.t ** 2 - s * v.xx ** 2 + v.x ** 2 + s2 * v.y ** 2) + v.x ** (p + 2) / (p + 2),
            -(v.x ** (p + 1) + s * v.xxx + v.x) * v.t + s * v.tx * v.xx,
            -s2 * v.t * v.y,
            "gb-symm3", quantity="energy",
        ),
        ConsLaw(
            "gb-conslaw2",
            v.x * v.t,
            -(p + 1) / (p + 2) * v.x ** (p + 2) - s * (v.x * v.xxx - _half(v.xx ** 2))
            + _half(s2 * v.y ** 2) - _half(v.t ** 2) - _half(v.x ** 2),
            -s2 * v.y * v.x,
            "gb-symm1", quantity="x-momentum",
        ),
        ConsLaw(
            "gb-conslaw3",
            v.y * v.t,
            -(v.x ** (p + 1) + s * v.xxx + v.x) * v.y + s * v.xy * v.xx,
            v.x ** (p + 2) / (p + 2) + _half(-s * v.xx ** 2 + v.x ** 2 - s2 * v.y ** 2 - v.t ** 2),
            "gb-symm2", quantity="y-momentum",
        ),
        ConsLaw(
            "gb-conslaw4",
            _half(y * (v.t ** 2 - s * v.xx ** 2 + v.x ** 2 + s2 * v.y ** 2))
            + s2 * t * v.y * v.t + y * v.x ** (p + 2) / (p + 2),
            -(t * s2 * v.y + y * v.t) * (s * v.xxx + v.x + v.x ** (p + 1))
            + s * (s2 * t * v.xy + y * v.tx) * v.xx,
            # one closing parenthesis of the printed flux is unmatched; it is
            # read as closing the sigma^2(...) group
            t * v.x ** (p + 2) / (p + 2)
            - s2 * (_half(s * v.xx ** 2 + s2 * v.y ** 2 + v.t ** 2 - v.x ** 2) * t
                    + y * v.t * v.y),
            "gb-symm4", quantity="boost momentum",
        ),
        ConsLaw(
            "gb-conslaw5",
            F * v.t - sig * dF * v(),
            -F * (s * v.xxx + v.x + v.x ** (p + 1)),
            s2 * ((f1.d(1) + f2.d(1)) * v() - F * v.y),
            "gb-symm5", formal_functions=("f1", "f2"), quantity="topological charges",
        ),
    ]


# ----------------------------------------------------------------------------
# errata: printed entries that fail for sigma^2 = -1, each with one sigma^2
# factor restored.  Kept apart from the printed entries, never substituted.

ERRATUM_SUFFIX = "+erratum"


def _gkp_errata(gens, laws):
    s2, x, y = sign("sigma2"), coord("x"), coord("y")
    v = JetVar("v")
    f4, f5 = FormalFunction("f4", "t"), FormalFunction("f5", "t")
    g7 = next(g for g in gens if g.name == "gkp-symm7")
    cl6 = next(c for c in laws if c.name == "gkp-conslaw6")
    fixed_g7 = replace(
        g7, name=g7.name + ERRATUM_SUFFIX, erratum_of=g7.name,
        eta=(g7.eta + _half(f4.d(2) * y * x) - _half(s2 * f4.d(2) * y * x)
             - _q(1, 12) * s2 * f4.d(3) * y ** 3 + _q(1, 12) * f4.d(3) * y ** 3),
        note="sigma^2 belongs on the f4'' y x term of eta, not on the f4''' y^3 term")
    fixed_cl6 = replace(
        cl6, name=cl6.name + ERRATUM_SUFFIX, erratum_of=cl6.name,
        source_symmetry=fixed_g7.name,
        X=cl6.X - s2 * (f5() * v.x - f5.d(1) * x) * v.xxx + (f5() * v.x - f5.d(1) * x) * v.xxx,
        note="sigma^2 multiplies only the y^2 f5'' part of the v_xxx coefficient")
    return [fixed_g7], [fixed_cl6]


def _gb_errata(laws):
    s2, t, p = sign("sigma2"), coord("t"), P()
    v = JetVar("v")
    cl4 = next(c for c in laws if c.name == "gb-conslaw4")
    fixed = replace(
        cl4, name=cl4.name + ERRATUM_SUFFIX, erratum_of=cl4.name,
        Y=cl4.Y - t * v.x ** (p + 2) / (p + 2) + s2 * t * v.x ** (p + 2) / (p + 2),
        note="flux term t v_x^(p+2)/(p+2) carries a factor sigma^2")
    return [], [fixed]


_CACHE: Dict[str, Registry] = {}


def registry(kind: str) -> Registry:
    if kind not in _CACHE:
        if kind == GKP:
            gens, laws = _gkp_generators(), _gkp_conslaws()
            _CACHE[kind] = Registry(kind, gens, laws, *_gkp_errata(gens, laws))
        elif kind == GB2D:
            gens, laws = _gb_generators(), _gb_conslaws()
            _CACHE[kind] = Registry(kind, gens, laws, *_gb_errata(laws))
        else:
            raise ValueError(f"unknown model {kind!r}")
    return _CACHE[kind]
