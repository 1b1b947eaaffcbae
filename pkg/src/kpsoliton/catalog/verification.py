"""Batch verification of the registry and of user-supplied entries."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional

from ..jetalgebra import (
    JetExpr, Residual, divergence, dumps, extract_multiplier, on_shell_reduce,
    verify_divergence_identity, verify_symmetry, verify_variational,
)
from ..jetalgebra.expr import PAR, SIGN, as_expr
from ..models import ModelSpec, make_model
from .registry import (
    ANY_P, P_EQ_1, ConsLaw, Registry, SymmetryGenerator, p_condition_holds, registry,
)

# Printed entries known to fail for formal sigma^2; each has a passing erratum.
# A failure of any other entry is a regression and flips the exit status.
KNOWN_QUARANTINE = {
    "gkp-symm7": "holds only for sigma^2 = +1; see gkp-symm7+erratum",
    "gkp-conslaw6": "holds only for sigma^2 = +1; see gkp-conslaw6+erratum",
    "gb-conslaw4": "holds only for sigma^2 = +1; see gb-conslaw4+erratum",
}


def constant_ratio(a, b) -> Optional[JetExpr]:
    """``r`` with ``a == r*b``, ``r`` a single term in parameters and signs only."""
    a, b = as_expr(a), as_expr(b)
    if a.is_zero() or b.is_zero():
        return None

    def jet_part(mono):
        return tuple(f for f in mono if f[0][0] not in (PAR, SIGN))

    mono_a, coeff_a = a.sorted_terms()[0]
    term_a = JetExpr.from_terms([(mono_a, coeff_a)])
    for mono_b, coeff_b in b.sorted_terms():
        if jet_part(mono_b) != jet_part(mono_a):
            continue
        r = term_a / JetExpr.from_terms([(mono_b, coeff_b)])
        if r * b == a:
            return r
    return None


@dataclass
class EntryReport:
    name: str
    entry_type: str
    p_condition: str
    p_evaluated: str
    applicable: bool = True
    symmetry_ok: Optional[bool] = None
    variational_ok: Optional[bool] = None
    variational_expected: Optional[bool] = None
    conslaw_ok: Optional[bool] = None
    conslaw_stage: Optional[str] = None
    multiplier_ok: Optional[bool] = None
    multiplier_ratio: Optional[str] = None
    multiplier_source: Optional[str] = None
    witness: Optional[str] = None
    quarantined: bool = False
    expected_quarantine: bool = False
    erratum_of: str = ""
    sigma2_branches: Dict[str, bool] = field(default_factory=dict)
    note: str = ""

    @property
    def verified(self) -> bool:
        if self.entry_type == "symmetry":
            return bool(self.symmetry_ok)
        return bool(self.conslaw_ok)

    @property
    def matches_expectation(self) -> bool:
        if not self.applicable:
            return True
        if self.quarantined != self.expected_quarantine:
            return False
        if self.quarantined:
            return True
        if self.entry_type == "symmetry":
            return self.variational_ok == self.variational_expected
        return bool(self.multiplier_ok)

    def to_json(self) -> dict:
        d = asdict(self)
        d["matches_expectation"] = self.matches_expectation
        return {k: v for k, v in d.items() if v not in (None, "", {})}


@dataclass
class VerificationReport:
    kind: str
    p_mode: str
    sigma2: str
    entries: List[EntryReport]

    @property
    def ok(self) -> bool:
        return all(e.matches_expectation for e in self.entries)

    @property
    def quarantined(self) -> List[str]:
        return [e.name for e in self.entries if e.quarantined]

    def entry(self, name: str) -> EntryReport:
        for e in self.entries:
            if e.name == name:
                return e
        raise KeyError(name)

    def to_json(self) -> dict:
        return {
            "model": self.kind, "p": self.p_mode, "sigma2": self.sigma2, "ok": self.ok,
            "quarantined": self.quarantined,
            "entries": [e.to_json() for e in self.entries],
        }


def _witness(r: Residual) -> Optional[str]:
    w = r.witness
    return None if w is None else str(w)


def _eval_p(condition: str, p_mode: Optional[Fraction]) -> Optional[Fraction]:
    """Symbolic runs evaluate p=1 families at p=1."""
    if condition == P_EQ_1 and p_mode is None:
        return Fraction(1)
    return p_mode


def _p_label(p: Optional[Fraction]) -> str:
    return "symbolic" if p is None else str(p)


def _expected_variational(gen: SymmetryGenerator, p: Optional[Fraction]) -> bool:
    if gen.variational == "always":
        return True
    if gen.variational == "never":
        return False
    return p is not None and p == 1


def _branches(check, kind: str, p, sigma2, gb_sign) -> Dict[str, bool]:
    if sigma2 is not None:
        return {}
    return {f"{s:+d}": check(make_model(kind, p, s, gb_sign)) for s in (1, -1)}


def check_generator(gen: SymmetryGenerator, model: ModelSpec) -> EntryReport:
    P = gen.characteristic
    sym = verify_symmetry(P, model)
    var = verify_variational(P, model)
    rep = EntryReport(
        gen.name, "symmetry", gen.validity, model.p_label,
        applicable=p_condition_holds(gen.validity, model.p),
        symmetry_ok=sym.is_zero, variational_ok=var.is_zero,
        variational_expected=_expected_variational(gen, model.p),
        erratum_of=gen.erratum_of, note=gen.note,
    )
    if not sym.is_zero:
        rep.witness = _witness(sym)
        rep.quarantined = True
        rep.sigma2_branches = _branches(
            lambda m: verify_symmetry(P, m).is_zero, model.kind, model.p, model.sigma2,
            model.gb_sign)
    return rep


def multiplier_check(cl: ConsLaw, Q_expected, model: ModelSpec):
    """Extract the characteristic of ``div(T,X,Y)`` and compare it with ``Q_expected``.

    Returns ``(ok, ratio)``; the ratio is a constant (possibly carrying signs).
    """
    div = model.prepare(divergence(cl.T, cl.X, cl.Y))
    Q, rem = extract_multiplier(div, model.equation)
    if not model.prepare(rem).is_zero():
        return False, None
    Qs = model.prepare(on_shell_reduce(Q, model.equation))
    Ps = model.prepare(on_shell_reduce(model.prepare(Q_expected), model.equation))
    r = constant_ratio(Qs, Ps)
    return r is not None, r


def check_conslaw(cl: ConsLaw, reg: Optional[Registry], model: ModelSpec,
                  Q: Optional[JetExpr] = None) -> EntryReport:
    if Q is None:
        Q = reg.multiplier(cl)
    res = verify_divergence_identity(cl.T, cl.X, cl.Y, Q, model)
    rep = EntryReport(
        cl.name, "conslaw", cl.validity, model.p_label,
        applicable=p_condition_holds(cl.validity, model.p),
        conslaw_ok=res.is_zero, conslaw_stage=res.stage,
        erratum_of=cl.erratum_of, note=cl.note,
    )
    if not res.is_zero:
        rep.witness = _witness(res)
        rep.quarantined = True
        rep.sigma2_branches = _branches(
            lambda m: verify_divergence_identity(cl.T, cl.X, cl.Y, Q, m).is_zero,
            model.kind, model.p, model.sigma2, model.gb_sign)
        return rep
    ok, ratio = multiplier_check(cl, Q, model)
    rep.multiplier_ok, rep.multiplier_source = ok, cl.source_symmetry
    if ok:
        rep.multiplier_ratio = str(ratio)
    elif reg is not None:
        # the printed source symmetry may itself be quarantined
        for g in reg.errata_generators:
            if g.erratum_of == cl.source_symmetry:
                ok2, ratio2 = multiplier_check(cl, cl.multiplier_from(g), model)
                if ok2:
                    rep.multiplier_ok, rep.multiplier_source = True, g.name
                    rep.multiplier_ratio = str(ratio2)
    return rep


def verify_all(kind: str, p_mode="symbolic", sigma2: Optional[int] = None,
               gb_sign: Optional[int] = None, include_errata: bool = True,
               reg: Optional[Registry] = None) -> VerificationReport:
    """Check every generator and conservation law of ``kind``.

    With symbolic ``p`` the ``p = 1`` families are checked at ``p = 1``; with a
    numeric ``p != 1`` they are listed as not applicable.
    """
    base = make_model(kind, p_mode, sigma2, gb_sign)
    reg = reg or registry(kind)
    models: Dict[Optional[Fraction], ModelSpec] = {base.p: base}

    def model_for(condition: str) -> ModelSpec:
        p = _eval_p(condition, base.p)
        if p not in models:
            models[p] = make_model(kind, p, sigma2, gb_sign)
        return models[p]

    gens = list(reg.generators) + (list(reg.errata_generators) if include_errata else [])
    laws = list(reg.conslaws) + (list(reg.errata_conslaws) if include_errata else [])
    entries: List[EntryReport] = []
    for g in gens:
        m = model_for(g.validity)
        if not p_condition_holds(g.validity, m.p):
            entries.append(EntryReport(g.name, "symmetry", g.validity, m.p_label,
                                       applicable=False, erratum_of=g.erratum_of))
            continue
        entries.append(check_generator(g, m))
    for c in laws:
        m = model_for(c.validity)
        if not p_condition_holds(c.validity, m.p):
            entries.append(EntryReport(c.name, "conslaw", c.validity, m.p_label,
                                       applicable=False, erratum_of=c.erratum_of))
            continue
        entries.append(check_conslaw(c, reg, m))
    for e in entries:
        e.expected_quarantine = (sigma2 != 1 and e.name in KNOWN_QUARANTINE
                                 and reg is registry(kind))
        if e.expected_quarantine and e.quarantined:
            e.note = KNOWN_QUARANTINE[e.name]
    return VerificationReport(kind, _p_label(base.p),
                              "symbolic" if sigma2 is None else str(sigma2), entries)


def verify_user_entry(model: ModelSpec, name: str, T=None, X=None, Y=None, Q=None,
                      P=None) -> EntryReport:
    """A user conservation law ``(T,X,Y,Q)`` or symmetry characteristic ``P``."""
    if P is not None:
        gen = SymmetryGenerator(name, JetExpr(), JetExpr(), JetExpr(), as_expr(P),
                                validity=ANY_P)
        rep = check_generator(gen, model)
        rep.variational_expected = rep.variational_ok
        return rep
    cl = ConsLaw(name, as_expr(T), as_expr(X), as_expr(Y), "user")
    rep = check_conslaw(cl, None, model, as_expr(Q))
    return rep


def serialize_entry(cl: ConsLaw, Q) -> dict:
    return {"name": cl.name, "T": dumps(cl.T), "X": dumps(cl.X), "Y": dumps(cl.Y), "Q": dumps(Q)}
