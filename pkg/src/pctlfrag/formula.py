"""Formula AST for PCTL restricted to the F and G operators.

Formulas are immutable dataclasses.  ``parse`` accepts the raw concrete
syntax (negation anywhere, upper bounds, ``=1``); ``normalize`` pushes
everything into negation normal form with only lower-bound comparisons.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Union


class FormulaError(ValueError):
    pass


class ParseError(FormulaError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class NonRepresentable(FormulaError):
    """Normalization would need a constraint outside lower-bound NNF."""


class Cmp(enum.Enum):
    GE = ">="
    GT = ">"
    # raw-only comparisons, removed by normalize()
    LE = "<="
    LT = "<"
    EQ = "="

    @property
    def is_lower(self) -> bool:
        return self in (Cmp.GE, Cmp.GT)

    def holds(self, value: Fraction, bound: Fraction) -> bool:
        if self is Cmp.GE:
            return value >= bound
        if self is Cmp.GT:
            return value > bound
        if self is Cmp.LE:
            return value <= bound
        if self is Cmp.LT:
            return value < bound
        return value == bound


@dataclass(frozen=True)
class Atom:
    name: str


@dataclass(frozen=True)
class NegAtom:
    name: str


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class F:
    cmp: Cmp
    bound: Fraction
    body: "Formula"


@dataclass(frozen=True)
class G:
    cmp: Cmp
    bound: Fraction
    body: "Formula"


@dataclass(frozen=True)
class Not:
    body: "Formula"


Formula = Union[Atom, NegAtom, And, Or, F, G, Not]
Literal = Union[Atom, NegAtom]
Temporal = Union[F, G]

ONE = Fraction(1)
ZERO = Fraction(0)


def is_literal(f: Formula) -> bool:
    return isinstance(f, (Atom, NegAtom))


def is_temporal(f: Formula) -> bool:
    return isinstance(f, (F, G))


def is_almost_sure(f: Formula) -> bool:
    return is_temporal(f) and f.cmp is Cmp.GE and f.bound == ONE


def complement(lit: Literal) -> Literal:
    return NegAtom(lit.name) if isinstance(lit, Atom) else Atom(lit.name)


def F1(body: Formula) -> F:
    return F(Cmp.GE, ONE, body)


def G1(body: Formula) -> G:
    return G(Cmp.GE, ONE, body)


def conj(parts) -> Formula:
    parts = list(parts)
    if not parts:
        raise FormulaError("empty conjunction has no representation")
    out = parts[0]
    for p in parts[1:]:
        out = And(out, p)
    return out


def disj(parts) -> Formula:
    parts = list(parts)
    if not parts:
        raise FormulaError("empty disjunction has no representation")
    out = parts[0]
    for p in parts[1:]:
        out = Or(out, p)
    return out


def conjuncts(f: Formula) -> list:
    if isinstance(f, And):
        return conjuncts(f.left) + conjuncts(f.right)
    return [f]


def disjuncts(f: Formula) -> list:
    if isinstance(f, Or):
        return disjuncts(f.left) + disjuncts(f.right)
    return [f]


def children(f: Formula) -> tuple:
    if isinstance(f, (And, Or)):
        return (f.left, f.right)
    if isinstance(f, (F, G, Not)):
        return (f.body,)
    return ()


def atoms(f: Formula) -> frozenset:
    if is_literal(f):
        return frozenset([f.name])
    out = frozenset()
    for c in children(f):
        out |= atoms(c)
    return out


# ---------------------------------------------------------------- parsing

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d+)?(?:/\d+)?|\.\d+)"
    r"|(?P<cmp>>=|<=|>|<|=)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<sym>[!&|()]))"
)


def _tokenize(text: str):
    pos = 0
    out = []
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        start = m.start(kind)
        out.append((kind, m.group(kind), start))
        pos = m.end()
    out.append(("eof", "", len(text)))
    return out


def _parse_prob(tok: str, pos: int) -> Fraction:
    try:
        value = Fraction(tok)
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"bad probability literal {tok!r}", pos) from None
    if not ZERO <= value <= ONE:
        raise ParseError(f"probability {tok} outside [0,1]", pos)
    return value


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect_sym(self, sym: str):
        kind, val, pos = self.take()
        if kind != "sym" or val != sym:
            raise ParseError(f"expected {sym!r}, found {val or 'end of input'!r}", pos)

    def formula(self) -> Formula:
        left = self.conj()
        while self.peek()[:2] == ("sym", "|"):
            self.take()
            left = Or(left, self.conj())
        return left

    def conj(self) -> Formula:
        left = self.unary()
        while self.peek()[:2] == ("sym", "&"):
            self.take()
            left = And(left, self.unary())
        return left

    def unary(self) -> Formula:
        kind, val, pos = self.peek()
        if kind == "sym" and val == "!":
            self.take()
            return Not(self.unary())
        if kind == "sym" and val == "(":
            self.take()
            inner = self.formula()
            self.expect_sym(")")
            return inner
        if kind == "ident":
            self.take()
            if val in ("F", "G") and self.peek()[0] == "cmp":
                return self.temporal(val, pos)
            return Atom(val)
        raise ParseError(f"unexpected {val or 'end of input'!r}", pos)

    def temporal(self, op: str, op_pos: int) -> Formula:
        _, cmp_text, cmp_pos = self.take()
        kind, num, num_pos = self.take()
        if kind != "num":
            raise ParseError("expected probability after comparison", num_pos)
        bound = _parse_prob(num, num_pos)
        cmp = Cmp(cmp_text)
        if cmp is Cmp.EQ and bound == ONE:
            cmp = Cmp.GE
        if cmp is Cmp.GE and bound == ZERO:
            raise ParseError(f"{op}>=0 is trivially true and not representable", cmp_pos)
        if cmp is Cmp.GT and bound == ONE:
            raise ParseError(f"{op}>1 is unsatisfiable and not representable", cmp_pos)
        body = self.unary()
        return (F if op == "F" else G)(cmp, bound, body)


def parse(text: str) -> Formula:
    """Parse concrete syntax into a raw formula (may contain ``Not``)."""
    p = _Parser(text)
    f = p.formula()
    kind, val, pos = p.peek()
    if kind != "eof":
        raise ParseError(f"trailing input {val!r}", pos)
    return f


# --------------------------------------------------------------- printing

def _fmt_bound(cmp: Cmp, q: Fraction) -> str:
    if cmp is Cmp.GE and q == ONE:
        return "=1"
    return f"{cmp.value}{q}"


def to_text(f: Formula) -> str:
    """Render ``f`` so that ``parse(to_text(f)) == f``."""
    if isinstance(f, Atom):
        return f.name
    if isinstance(f, NegAtom):
        return "!" + f.name
    if isinstance(f, Not):
        return "!" + _unary_text(f.body)
    if isinstance(f, (F, G)):
        op = "F" if isinstance(f, F) else "G"
        return f"{op}{_fmt_bound(f.cmp, f.bound)} {_unary_text(f.body)}"
    if isinstance(f, And):
        # & is left-associative in the grammar
        right = to_text(f.right)
        if isinstance(f.right, (And, Or)):
            right = f"({right})"
        left = to_text(f.left)
        if isinstance(f.left, Or):
            left = f"({left})"
        return f"{left} & {right}"
    if isinstance(f, Or):
        right = to_text(f.right)
        if isinstance(f.right, Or):
            right = f"({right})"
        return f"{to_text(f.left)} | {right}"
    raise TypeError(f)


def _unary_text(f: Formula) -> str:
    if isinstance(f, (And, Or)):
        return f"({to_text(f)})"
    return to_text(f)


# ---------------------------------------------------------- normalization

def _dual_bound(cmp: Cmp, q: Fraction):
    # P(F x) + P(G not x) = 1, so "P(F x) cmp q" <=> "P(G not x) dual(cmp) 1-q"
    flipped = {Cmp.GE: Cmp.LE, Cmp.GT: Cmp.LT, Cmp.LE: Cmp.GE, Cmp.LT: Cmp.GT, Cmp.EQ: Cmp.EQ}
    return flipped[cmp], ONE - q


def _checked(cls, cmp: Cmp, q: Fraction, body: Formula) -> Formula:
    if cmp is Cmp.EQ:
        if q == ONE:
            cmp = Cmp.GE
        else:
            raise NonRepresentable(f"equality constraint ={q} is outside the lower-bound fragment")
    if cmp is Cmp.GE and q == ZERO:
        raise NonRepresentable("constraint >=0 is trivially true")
    if cmp is Cmp.GT and q == ONE:
        raise NonRepresentable("constraint >1 is unsatisfiable")
    return cls(cmp, q, body)


def normalize(f: Formula, negate: bool = False) -> Formula:
    """Negation normal form with lower-bound comparisons only."""
    if isinstance(f, Atom):
        return NegAtom(f.name) if negate else f
    if isinstance(f, NegAtom):
        return Atom(f.name) if negate else f
    if isinstance(f, Not):
        return normalize(f.body, not negate)
    if isinstance(f, And):
        cls = Or if negate else And
        return cls(normalize(f.left, negate), normalize(f.right, negate))
    if isinstance(f, Or):
        cls = And if negate else Or
        return cls(normalize(f.left, negate), normalize(f.right, negate))
    if isinstance(f, (F, G)):
        cmp = f.cmp
        if cmp is Cmp.EQ and f.bound != ONE:
            raise NonRepresentable(f"equality constraint ={f.bound} is outside the lower-bound fragment")
        if cmp is Cmp.EQ:
            cmp = Cmp.GE
        if negate:
            cmp = {Cmp.GE: Cmp.LT, Cmp.GT: Cmp.LE, Cmp.LE: Cmp.GT, Cmp.LT: Cmp.GE}[cmp]
        if cmp.is_lower:
            return _checked(type(f), cmp, f.bound, normalize(f.body))
        other = G if isinstance(f, F) else F
        dcmp, dq = _dual_bound(cmp, f.bound)
        return _checked(other, dcmp, dq, normalize(f.body, True))
    raise TypeError(f)


def is_normalized(f: Formula) -> bool:
    if isinstance(f, Not):
        return False
    if is_temporal(f):
        if not f.cmp.is_lower:
            return False
        if (f.cmp is Cmp.GE and f.bound == ZERO) or (f.cmp is Cmp.GT and f.bound == ONE):
            return False
    return all(is_normalized(c) for c in children(f))


# ---------------------------------------------------------------- measures

def size(f: Formula) -> int:
    """AST node count; literals, connectives and operators count one each."""
    return 1 + sum(size(c) for c in children(f))


def iter_nodes(f: Formula) -> Iterator[Formula]:
    yield f
    for c in children(f):
        yield from iter_nodes(c)


@dataclass(frozen=True)
class SubformulaIndex:
    entries: tuple
    counts: dict

    def __contains__(self, item) -> bool:
        return item in self.counts

    def __iter__(self):
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)


def subformulas(f: Formula) -> SubformulaIndex:
    """Closure of ``f`` under the subformula rules, in preorder.

    A negated atom does not bring the positive atom with it.
    """
    counts: dict = {}
    for node in iter_nodes(f):
        counts[node] = counts.get(node, 0) + 1
    return SubformulaIndex(tuple(counts), counts)


def top_level(f: Formula) -> list:
    """Subformulas reachable from the root through boolean connectives only."""
    if isinstance(f, (And, Or)):
        return top_level(f.left) + top_level(f.right)
    return [f]


def top_F(f: Formula, satisfied=frozenset()) -> frozenset:
    """F-rooted subformulas not nested under any temporal operator."""
    return frozenset(x for x in top_level(f) if isinstance(x, F)) - frozenset(satisfied)


def g_nested(f: Formula, under_g: bool = False) -> Iterator[Formula]:
    """Yield every subformula occurrence that lies strictly below some G."""
    for c in children(f):
        inside = under_g or isinstance(f, G)
        if inside:
            yield c
        yield from g_nested(c, inside)


# ----------------------------------------------------------- classification

class Fragment(enum.Enum):
    PROPOSITIONAL = "propositional"
    G1FqG1 = "G1(Fq,G1)"
    G1FqG1Or = "G1(Fq,G1,or)"
    FqG1 = "Fq,G1"
    Fq1G1Or = "Fq/1,G1,or"
    GqTop = "Gq(Fq,Gq,or)"
    UNSUPPORTED = "Fq,G1,or (unsupported)"


def _only(f: Formula, allow_or: bool, f_any: bool, g_any: bool) -> bool:
    """Every node is a literal, conjunction, (disjunction), F, G=1 (or any G)."""
    if is_literal(f):
        return True
    if isinstance(f, And):
        return _only(f.left, allow_or, f_any, g_any) and _only(f.right, allow_or, f_any, g_any)
    if isinstance(f, Or):
        return allow_or and _only(f.left, allow_or, f_any, g_any) and _only(f.right, allow_or, f_any, g_any)
    if isinstance(f, F):
        return (f_any or is_almost_sure(f)) and _only(f.body, allow_or, f_any, g_any)
    if isinstance(f, G):
        return (g_any or is_almost_sure(f)) and _only(f.body, allow_or, f_any, g_any)
    return False


def _fq1_g1_or(f: Formula) -> bool:
    if is_literal(f):
        return True
    if isinstance(f, (And, Or)):
        return _fq1_g1_or(f.left) and _fq1_g1_or(f.right)
    if isinstance(f, F):
        return _fq1_g1_or(f.body)
    if isinstance(f, G):
        return is_almost_sure(f) and _only(f.body, allow_or=True, f_any=False, g_any=False)
    return False


def in_fragment(f: Formula, frag: Fragment) -> bool:
    if frag is Fragment.PROPOSITIONAL:
        return not any(is_temporal(n) for n in iter_nodes(f)) and is_normalized(f)
    if frag is Fragment.G1FqG1:
        return isinstance(f, G) and is_almost_sure(f) and _only(f.body, False, True, False)
    if frag is Fragment.G1FqG1Or:
        return isinstance(f, G) and is_almost_sure(f) and _only(f.body, True, True, False)
    if frag is Fragment.FqG1:
        return _only(f, False, True, False)
    if frag is Fragment.Fq1G1Or:
        return _fq1_g1_or(f)
    if frag is Fragment.GqTop:
        return isinstance(f, G) and is_normalized(f)
    return is_normalized(f)


_PRIORITY = (
    Fragment.PROPOSITIONAL,
    Fragment.G1FqG1,
    Fragment.G1FqG1Or,
    Fragment.FqG1,
    Fragment.Fq1G1Or,
    Fragment.GqTop,
)


def classify(f: Formula) -> Fragment:
    if not is_normalized(f):
        raise FormulaError("classify expects a normalized formula")
    for frag in _PRIORITY:
        if in_fragment(f, frag):
            return frag
    return Fragment.UNSUPPORTED
