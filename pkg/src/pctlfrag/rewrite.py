"""Formula-to-formula transformations for the G=1 fragments.

Provides the almost-sure abstraction ``hat``, ten equivalence laws that can
be applied at any position, and the (A, B, {C_i}) normal form of conjunctive
G=1 formulas together with its inverse ``rebuild``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Optional

from .formula import (
    And, Atom, F, F1, Formula, FormulaError, Fragment, G, G1, NegAtom, Or,
    classify, conj, conjuncts, is_almost_sure, is_literal,
)


class PatternMismatch(FormulaError):
    pass


def hat(f: Formula) -> Formula:
    """Replace every probability constraint by the almost-sure one."""
    if is_literal(f):
        return f
    if isinstance(f, And):
        return And(hat(f.left), hat(f.right))
    if isinstance(f, Or):
        return Or(hat(f.left), hat(f.right))
    if isinstance(f, F):
        return F1(hat(f.body))
    if isinstance(f, G):
        return G1(hat(f.body))
    raise TypeError(f)


# ----------------------------------------------------------------------- laws

class Scope(enum.Enum):
    ALL_MODELS = "all"
    FINITE_ONLY = "finite"


@dataclass(frozen=True)
class Law:
    name: str
    left: str
    right: str
    scope: Scope
    rewrite: Callable[[Formula], Optional[Formula]]

    def matches(self, f: Formula) -> bool:
        return self.rewrite(f) is not None


def _g1(f) -> bool:
    return isinstance(f, G) and is_almost_sure(f)


def _f1(f) -> bool:
    return isinstance(f, F) and is_almost_sure(f)


def _gg(f):
    if _g1(f) and _g1(f.body):
        return f.body
    return None


def _gf(f):
    if _g1(f) and isinstance(f.body, F):
        return G1(F1(f.body.body))
    return None


def _ff(f):
    if _f1(f) and isinstance(f.body, F):
        return f.body
    return None


def _fgf(f):
    if _f1(f) and _g1(f.body) and _f1(f.body.body):
        return f.body
    return None


def _gfg(f):
    if _g1(f) and _f1(f.body) and _g1(f.body.body):
        return f.body
    return None


def _fcf(f):
    if _f1(f) and isinstance(f.body, And):
        parts = conjuncts(f.body)
        if all(isinstance(p, F) for p in parts):
            return f.body
    return None


def _gc(f):
    if _g1(f) and isinstance(f.body, And):
        return conj(G1(p) for p in conjuncts(f.body))
    return None


def _fgc(f):
    if _f1(f) and _g1(f.body) and isinstance(f.body.body, And):
        return conj(F1(G1(p)) for p in conjuncts(f.body.body))
    return None


def _gfcf(f):
    if _g1(f) and _f1(f.body) and isinstance(f.body.body, And) and isinstance(f.body.body.right, F):
        inner = f.body.body
        return G1(And(F1(inner.left), F1(inner.right.body)))
    return None


def _gfcg(f):
    if _g1(f) and _f1(f.body) and isinstance(f.body.body, And) and _g1(f.body.body.right):
        inner = f.body.body
        return G1(And(F1(inner.left), F1(inner.right)))
    return None


LAWS = {
    law.name: law
    for law in (
        Law("GG", "G=1 G=1 p", "G=1 p", Scope.ALL_MODELS, _gg),
        Law("Gf", "G=1 F>r p", "G=1 F=1 p", Scope.FINITE_ONLY, _gf),
        Law("Ff", "F=1 F>r p", "F>r p", Scope.ALL_MODELS, _ff),
        Law("FGF", "F=1 G=1 F=1 p", "G=1 F=1 p", Scope.ALL_MODELS, _fgf),
        Law("GFG", "G=1 F=1 G=1 p", "F=1 G=1 p", Scope.ALL_MODELS, _gfg),
        Law("FCf", "F=1 (F>r1 p1 & ... & F>rn pn)", "F>r1 p1 & ... & F>rn pn", Scope.ALL_MODELS, _fcf),
        Law("GC", "G=1 (p1 & ... & pn)", "G=1 p1 & ... & G=1 pn", Scope.ALL_MODELS, _gc),
        Law("FGC", "F=1 G=1 (p1 & ... & pn)", "F=1 G=1 p1 & ... & F=1 G=1 pn", Scope.ALL_MODELS, _fgc),
        Law("GFCf", "G=1 F=1 (p & F>r x)", "G=1 (F=1 p & F=1 x)", Scope.FINITE_ONLY, _gfcf),
        Law("GFCG", "G=1 F=1 (p & G=1 x)", "G=1 (F=1 p & F=1 G=1 x)", Scope.ALL_MODELS, _gfcg),
    )
}


def subterm(f: Formula, position: tuple) -> Formula:
    for step in position:
        if isinstance(f, (And, Or)):
            f = (f.left, f.right)[step]
        elif isinstance(f, (F, G)) and step == 0:
            f = f.body
        else:
            raise PatternMismatch(f"position {position} does not exist")
    return f


def replace_at(f: Formula, position: tuple, new: Formula) -> Formula:
    if not position:
        return new
    step, rest = position[0], position[1:]
    if isinstance(f, (And, Or)):
        if step == 0:
            return type(f)(replace_at(f.left, rest, new), f.right)
        if step == 1:
            return type(f)(f.left, replace_at(f.right, rest, new))
    elif isinstance(f, (F, G)) and step == 0:
        return type(f)(f.cmp, f.bound, replace_at(f.body, rest, new))
    raise PatternMismatch(f"position {position} does not exist")


def positions(f: Formula, prefix: tuple = ()):
    yield prefix
    if isinstance(f, (And, Or)):
        yield from positions(f.left, prefix + (0,))
        yield from positions(f.right, prefix + (1,))
    elif isinstance(f, (F, G)):
        yield from positions(f.body, prefix + (0,))


def apply_law(f: Formula, law, position: tuple = ()) -> Formula:
    if isinstance(law, str):
        law = LAWS[law]
    target = subterm(f, position)
    out = law.rewrite(target)
    if out is None:
        raise PatternMismatch(f"law {law.name} does not match at {position}")
    return replace_at(f, position, out)


# ---------------------------------------------------------------- normal form

def _lit_key(lit) -> tuple:
    return (lit.name, isinstance(lit, NegAtom))


def sort_literals(lits) -> tuple:
    return tuple(sorted(set(lits), key=_lit_key))


def consistent(lits) -> bool:
    pos = {l.name for l in lits if isinstance(l, Atom)}
    neg = {l.name for l in lits if isinstance(l, NegAtom)}
    return not (pos & neg)


@dataclass(frozen=True)
class NormalForm:
    """``G=1 (/\\A & F=1 G=1 /\\B & /\\_i F=1 /\\C_i)``."""

    A: tuple
    B: tuple
    C: tuple  # tuple of literal tuples

    @staticmethod
    def make(A, B, C) -> "NormalForm":
        cs = sorted({sort_literals(c) for c in C if c}, key=lambda c: [_lit_key(l) for l in c])
        return NormalForm(sort_literals(A), sort_literals(B), tuple(cs))


def _nf_g(phi: Formula):
    """(A, B, Cs) with G=1 phi finitely equivalent to the normal-form shape."""
    if is_literal(phi):
        return {phi}, set(), []
    if isinstance(phi, And):
        a1, b1, c1 = _nf_g(phi.left)
        a2, b2, c2 = _nf_g(phi.right)
        return a1 | a2, b1 | b2, c1 + c2
    if _g1(phi):
        return _nf_g(phi.body)
    if isinstance(phi, F):
        b, cs = _nf_gf(phi.body)
        return set(), b, cs
    raise FormulaError(f"outside the conjunctive G=1 fragment: {phi}")


def _nf_gf(psi: Formula):
    """(B, Cs) with G=1 F=1 psi finitely equivalent to G=1(F=1 G=1 B & F=1 C_i)."""
    if is_literal(psi):
        return set(), [{psi}]
    if isinstance(psi, F):
        return _nf_gf(psi.body)
    if _g1(psi):
        a, b, cs = _nf_g(psi.body)
        return a | b, cs
    if isinstance(psi, And):
        lits, fs, gs = set(), [], []
        for part in conjuncts(psi):
            if is_literal(part):
                lits.add(part)
            elif isinstance(part, F):
                fs.append(part.body)
            elif _g1(part):
                gs.append(part.body)
            else:
                raise FormulaError(f"outside the conjunctive G=1 fragment: {part}")
        B: set = set()
        Cs: list = [lits] if lits else []
        for body in fs:
            b, cs = _nf_gf(body)
            B |= b
            Cs += cs
        if gs:
            a, b, cs = _nf_g(conj(gs))
            B |= a | b
            Cs += cs
        return B, Cs
    raise FormulaError(f"outside the conjunctive G=1 fragment: {psi}")


def normal_form(f: Formula) -> NormalForm:
    if classify(f) is not Fragment.G1FqG1:
        raise FormulaError("normal_form needs a conjunctive G=1 formula")
    a, b, cs = _nf_g(f.body)
    return NormalForm.make(a, b, cs)


def rebuild(nf: NormalForm) -> Formula:
    parts = list(nf.A)
    if nf.B:
        parts.append(F1(G1(conj(nf.B))))
    parts.extend(F1(conj(c)) for c in nf.C)
    return G1(conj(parts))


def in_normal_shape(f: Formula) -> bool:
    """Syntactic check that ``f`` has exactly the normal-form shape."""
    if not _g1(f):
        return False
    seen_b = False
    for part in conjuncts(f.body):
        if is_literal(part):
            continue
        if _f1(part) and _g1(part.body) and all(is_literal(x) for x in conjuncts(part.body.body)):
            if seen_b:
                return False
            seen_b = True
            continue
        if _f1(part) and all(is_literal(x) for x in conjuncts(part.body)):
            continue
        return False
    return True
