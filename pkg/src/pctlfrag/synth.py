"""Satisfiability decisions with witness synthesis.

Every SAT answer carries a Markov chain that has been model checked at its
initial state before it is returned.
"""

from __future__ import annotations

import enum
import itertools
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Optional

from .checker import check, models
from .formula import (
    And, Atom, F, F1, Formula, FormulaError, Fragment, G, G1, NegAtom, Or,
    atoms, classify, conj, is_almost_sure, is_literal, size,
)
from .markov import MarkovChain
from .rewrite import consistent, hat, normal_form


class Status(enum.Enum):
    SAT = "SAT"
    UNSAT = "UNSAT"
    UNKNOWN = "UNKNOWN"


@dataclass(frozen=True)
class Answer:
    status: Status
    witness: Optional[MarkovChain] = None
    reason: str = ""

    @property
    def sat(self) -> bool:
        return self.status is Status.SAT


@dataclass(frozen=True)
class Verdict:
    finite: Answer
    general: Answer
    fragment: Fragment
    bound: str = ""


class WitnessError(AssertionError):
    """A synthesized chain failed the model check; always a bug."""


class BudgetExceeded(RuntimeError):
    pass


UNSAT = Answer(Status.UNSAT)


def _certify(f: Formula, mc: MarkovChain) -> Answer:
    if not models(mc, f):
        raise WitnessError(f"synthesized chain does not satisfy {f}")
    return Answer(Status.SAT, mc)


def _same(answer: Answer, frag: Fragment, bound: str) -> Verdict:
    return Verdict(answer, answer, frag, bound)


def _positive(lits) -> frozenset:
    return frozenset(l.name for l in lits if isinstance(l, Atom))


def circle(family, initial: int = 0) -> MarkovChain:
    """States labelled by ``family`` in order, each moving to the next with probability 1."""
    k = len(family)
    rows = [[((i + 1) % k, 1)] for i in range(k)]
    return MarkovChain.build(rows, list(family), initial)


def lasso(entry: frozenset, family) -> MarkovChain:
    """An entry state leading into a circle; merged into the circle when its label is a member."""
    family = list(family)
    if entry in family:
        i = family.index(entry)
        return circle(family[i:] + family[:i])
    k = len(family)
    rows = [[(1, 1)]] + [[(1 + (i + 1) % k, 1)] for i in range(k)]
    return MarkovChain.build(rows, [entry] + family, 0)


def label_sets(names) -> list:
    """All subsets of ``names``, smallest first, then lexicographic."""
    names = sorted(names)
    out = []
    for k in range(len(names) + 1):
        out.extend(frozenset(c) for c in itertools.combinations(names, k))
    return out


# ------------------------------------------------------------ propositional

def decide_propositional(f: Formula) -> Verdict:
    for label in label_sets(atoms(f)):
        mc = circle([label])
        if models(mc, f):
            return _same(_certify(f, mc), Fragment.PROPOSITIONAL, "1 state")
    return _same(UNSAT, Fragment.PROPOSITIONAL, "all labellings of 1 state")


# -------------------------------------------------------------- G1 fragments

def decide_g1_conj(f: Formula) -> Verdict:
    if classify(f) is not Fragment.G1FqG1:
        raise FormulaError("decide_g1_conj needs a G1(Fq,G1) formula")
    nf = normal_form(f)
    base = set(nf.A) | set(nf.B)
    bound = f"normal form, circle of at most {size(f)} states"
    if not consistent(base) or not all(consistent(base | set(c)) for c in nf.C):
        return _same(UNSAT, Fragment.G1FqG1, bound)
    family = [_positive(base | set(c)) for c in nf.C] or [_positive(base)]
    return _same(_certify(f, circle(family)), Fragment.G1FqG1, bound)


def _families(names, max_len: int) -> Iterator[tuple]:
    labels = label_sets(names)
    for k in range(1, min(max_len, len(labels)) + 1):
        yield from itertools.combinations(labels, k)


def single_bscc_search(f: Formula, limit: Optional[int] = None) -> Optional[MarkovChain]:
    """Smallest circle (in enumeration order) whose states satisfy ``f``."""
    limit = size(f) if limit is None else limit
    for family in _families(atoms(f), limit):
        mc = circle(list(family))
        if models(mc, f):
            return mc
    return None


def decide_single_bscc(f: Formula) -> Verdict:
    frag = classify(f)
    if frag not in (Fragment.G1FqG1, Fragment.G1FqG1Or):
        raise FormulaError("decide_single_bscc needs a G=1 rooted formula without G>q")
    bound = f"circles up to {size(f)} states"
    mc = single_bscc_search(f)
    if mc is None:
        return _same(UNSAT, frag, bound)
    return _same(_certify(f, mc), frag, bound)


def decide_gq_top(f: Formula) -> Verdict:
    qual = hat(f)
    bound = f"almost-sure abstraction, circles up to {size(f)} states"
    mc = single_bscc_search(qual, size(f))
    if mc is None:
        general = Answer(Status.UNKNOWN, reason="finite and general satisfiability differ "
                         "for G-rooted formulas with G>q; no finite model exists")
        return Verdict(UNSAT, general, Fragment.GqTop, bound)
    # the abstraction implies the original formula
    ans = _certify(f, mc)
    return Verdict(ans, ans, Fragment.GqTop, bound)


# ----------------------------------------------------------------- oracle

def default_budget() -> int:
    return int(os.environ.get("PCTLFRAG_BUDGET", "2000000"))


def _rows(n: int, d: int) -> list:
    """Every distribution over n targets with probabilities in multiples of 1/d."""
    out = []
    for cut in itertools.combinations(range(d + n - 1), n - 1):
        parts, prev = [], -1
        for c in cut + (d + n - 1,):
            parts.append(c - prev - 1)
            prev = c
        out.append(tuple((t, Fraction(k, d)) for t, k in enumerate(parts) if k))
    return out


def _canonical(rows) -> bool:
    # states are numbered in order of first appearance; all reachable from 0
    seen = 1
    for row in rows:
        for t, _ in row:
            if t == seen:
                seen += 1
            elif t > seen:
                return False
    return seen == len(rows)


def _root_literals(f: Formula) -> list:
    if isinstance(f, And):
        return _root_literals(f.left) + _root_literals(f.right)
    return [f] if is_literal(f) else []


@dataclass
class OracleResult:
    witness: Optional[MarkovChain]
    candidates: int
    n: int
    d: int

    @property
    def sat(self) -> bool:
        return self.witness is not None


def bounded_sat(f: Formula, n: int, d: int, budget: Optional[int] = None) -> OracleResult:
    """Exhaustive grid search for a model with at most ``n`` states.

    Transition probabilities are multiples of 1/d.  ``witness is None``
    means no model exists on that grid; it never means unsatisfiable.
    Raises BudgetExceeded after ``budget`` enumeration steps (checked chains
    plus skipped non-canonical transition tables).
    """
    if n < 1 or d < 1:
        raise ValueError("need n >= 1 and d >= 1")
    budget = default_budget() if budget is None else budget
    names = atoms(f)
    root = _root_literals(f)
    labels = label_sets(names)
    root_labels = [l for l in labels
                   if all((x.name in l) == isinstance(x, Atom) for x in root)]
    if not root_labels:
        return OracleResult(None, 0, n, d)
    count = 0
    for k in range(1, n + 1):
        row_choices = _rows(k, d)
        for rows in itertools.product(row_choices, repeat=k):
            if not _canonical(rows):
                # skipped row tables still cost time, so they use up budget too
                count += 1
                if count > budget:
                    raise BudgetExceeded(f"more than {budget} enumeration steps")
                continue
            for lab0 in root_labels:
                for rest in itertools.product(labels, repeat=k - 1):
                    count += 1
                    if count > budget:
                        raise BudgetExceeded(f"more than {budget} candidates")
                    mc = MarkovChain(tuple(rows), (lab0,) + rest, 0)
                    if models(mc, f):
                        return OracleResult(mc, count, n, d)
    return OracleResult(None, count, n, d)


# -------------------------------------------------------------- tree search
#
# A candidate model is a tree.  Each node carries literals, a set of promised
# F-bodies it satisfies itself, and obligations F>q psi it owns.  Leaves are
# lassos whose 0/1 semantics is read off the checker.  Reach masses r_v of the
# nodes are found by one linear program over the universal tree of all options
# up to a depth; the support of a feasible point is the witness skeleton.

_STRICT_MARGIN = 1e-6
_EPS = 1e-9


@dataclass(frozen=True)
class _Obl:
    key: tuple  # (depth of owner, index among its obligations)
    cmp: object
    bound: Fraction
    body: Formula


@dataclass(frozen=True)
class _Leaf:
    chain: MarkovChain
    covers: frozenset


@dataclass(frozen=True)
class _Local:
    label: frozenset
    promised: frozenset
    owned: tuple
    discharged: frozenset
    gacc: frozenset
    child_open: tuple


@dataclass
class _Inst:
    var: int
    leaf: Optional[_Leaf] = None
    local: Optional[_Local] = None
    children: list = field(default_factory=list)


class _Search:
    def __init__(self, f: Formula, chains: bool, budget: int):
        self.f = f
        self.chains = chains
        self.budget = budget
        self.names = atoms(f)
        self.limit = size(f)
        self.bodies = self._bodies(f)
        self._leaf_memo: dict = {}
        self._local_memo: dict = {}
        self.exhausted = False

    def _bodies(self, f: Formula) -> tuple:
        out: dict = {}

        def walk(x, under_g):
            if isinstance(x, F) and (self.chains or not under_g):
                out.setdefault(x.body, None)
            for c in ((x.left, x.right) if isinstance(x, (And, Or)) else
                      (x.body,) if isinstance(x, (F, G)) else ()):
                walk(c, under_g or isinstance(x, G))

        walk(f, False)
        return tuple(out)

    # -- flattening

    def _expand(self, todo: tuple, lits: frozenset, fs: tuple, gs: frozenset):
        if not todo:
            yield lits, fs, gs
            return
        (x, gd), rest = todo[0], todo[1:]
        if is_literal(x):
            other = NegAtom(x.name) if isinstance(x, Atom) else Atom(x.name)
            if other not in lits:
                yield from self._expand(rest, lits | {x}, fs, gs)
        elif isinstance(x, And):
            yield from self._expand(((x.left, gd), (x.right, gd)) + rest, lits, fs, gs)
        elif isinstance(x, Or):
            yield from self._expand(((x.left, gd),) + rest, lits, fs, gs)
            yield from self._expand(((x.right, gd),) + rest, lits, fs, gs)
        elif isinstance(x, F):
            if gd and not self.chains:
                yield from self._expand(rest, lits, fs, gs)
            else:
                yield from self._expand(rest, lits, fs + (x,), gs)
        elif isinstance(x, G):
            body = hat(x.body)
            if body in gs:
                yield from self._expand(rest, lits, fs, gs)
            else:
                yield from self._expand(((body, True),) + rest, lits, fs, gs | {body})
        else:
            raise TypeError(x)

    def locals(self, base: tuple, open_: tuple, gacc: frozenset, depth: int) -> list:
        key = (base, open_, gacc, depth)
        if key in self._local_memo:
            return self._local_memo[key]
        inherited = {o.body for o in open_}
        out, seen = [], set()
        for k in range(len(self.bodies) + 1):
            for promised in itertools.combinations(self.bodies, k):
                P = frozenset(promised)
                if depth > 0 and not (P & inherited):
                    continue
                todo = tuple((x, False) for x in base + promised) + tuple((g, True) for g in sorted(gacc, key=repr))
                for lits, fs, gs in self._expand(todo, frozenset(), (), frozenset(gacc)):
                    fs = tuple(dict.fromkeys(fs))
                    if not P <= inherited | {x.body for x in fs}:
                        continue
                    sig = (P, lits, fs, gs)
                    if sig in seen:
                        continue
                    seen.add(sig)
                    owned = tuple(_Obl((depth, i), x.cmp, x.bound, x.body) for i, x in enumerate(fs))
                    discharged = frozenset(o.key for o in open_ + owned if o.body in P)
                    child_open = tuple(o for o in open_ + owned if o.body not in P)
                    out.append(_Local(lits, P, owned, discharged, gs, child_open))
        self._local_memo[key] = out
        return out

    def leaves(self, base: tuple, open_: tuple, gacc: frozenset) -> list:
        bodies = tuple(dict.fromkeys(o.body for o in open_))
        key = (base, bodies, gacc)
        if key in self._leaf_memo:
            return self._leaf_memo[key]
        must = list(base) + [G1(g) for g in sorted(gacc, key=repr)]
        reqs = must + [F1(b) for b in bodies]
        best: dict = {}
        labels = label_sets(self.names)
        candidates = [lasso(entry, family)
                      for family in _families(self.names, self.limit) for entry in labels
                      if entry in family or len(family) < self.limit]
        for mc in sorted(candidates, key=lambda c: c.n):
            if reqs:
                table = check(mc, conj(reqs))
                if not all(table.holds(r, 0) for r in must):
                    continue
                covers = frozenset(b for b in bodies if table.holds(F1(b), 0))
            else:
                covers = frozenset()
            if covers not in best:
                best[covers] = _Leaf(mc, covers)
        out = [l for c, l in best.items() if not any(c < d for d in best)]
        self._leaf_memo[key] = out
        return out

    # -- universal tree

    def build(self, base, open_, gacc, depth, left, path, lp, forced=None):
        """Instantiate every option of a context as sibling nodes."""
        opts = []
        if forced is not None:
            opts.append(forced)
        else:
            opts.extend(self.leaves(base, open_, gacc))
            if left > 0:
                opts.extend(l for l in self.locals(base, open_, gacc, depth) if l.child_open)
        out = []
        for opt in opts:
            v = lp.new_var()
            if lp.n > self.budget:
                raise BudgetExceeded("tree search budget exhausted")
            inst = _Inst(v)
            here = path + [v]
            if isinstance(opt, _Leaf):
                inst.leaf = opt
                for o in open_:
                    if o.body in opt.covers:
                        lp.discharge(path[o.key[0]], o.key[1], v)
            else:
                inst.local = opt
                for o in opt.owned:
                    lp.own(v, o)
                for o in open_ + opt.owned:
                    if o.key in opt.discharged:
                        lp.discharge(here[o.key[0]], o.key[1], v)
                inst.children = self.build((), opt.child_open, opt.gacc, depth + 1, left - 1, here, lp)
                if not inst.children:
                    lp.dead(v)
                lp.split(v, [c.var for c in inst.children])
            out.append(inst)
        return out


class _LP:
    def __init__(self):
        self.n = 0
        self.splits: list = []
        self.zero: list = []
        self.obligations: dict = {}

    def new_var(self) -> int:
        self.n += 1
        return self.n - 1

    def own(self, v: int, o: _Obl):
        self.obligations[(v, o.key[1])] = (o.cmp, o.bound, [])

    def discharge(self, owner: int, idx: int, v: int):
        self.obligations[(owner, idx)][2].append(v)

    def dead(self, v: int):
        self.zero.append(v)

    def split(self, v: int, kids: list):
        self.splits.append((v, kids))

    def solve(self, root: int):
        import numpy as np
        from scipy.optimize import linprog
        from scipy.sparse import coo_matrix

        def sparse(entries, nrows):
            if not entries:
                return None
            r, c, d = zip(*entries)
            return coo_matrix((d, (r, c)), shape=(nrows, self.n)).tocsr()

        eq, b_eq = [(0, root, 1.0)], [1.0]
        for v, kids in self.splits:
            i = len(b_eq)
            eq.append((i, v, 1.0))
            eq.extend((i, k, -1.0) for k in kids)
            b_eq.append(0.0)
        for v in self.zero:
            eq.append((len(b_eq), v, 1.0))
            b_eq.append(0.0)
        ub, b_ub = [], []
        for i, ((owner, _), (cmp, bound, hits)) in enumerate(self.obligations.items()):
            margin = _STRICT_MARGIN if cmp.name == "GT" else 0.0
            coeff: dict = {owner: float(bound) + margin}
            for h in hits:
                coeff[h] = coeff.get(h, 0.0) - 1.0
            ub.extend((i, v, c) for v, c in coeff.items())
            b_ub.append(0.0)
        cost = np.zeros(self.n)
        for v, _ in self.splits:
            if v != root:
                cost[v] = 1.0
        res = linprog(cost, A_ub=sparse(ub, len(b_ub)), b_ub=b_ub or None,
                      A_eq=sparse(eq, len(b_eq)), b_eq=b_eq, bounds=(0, None), method="highs")
        return res.x if res.status == 0 else None


def _extract(root: _Inst, x, den: int) -> MarkovChain:
    rows: list = []
    labels: list = []

    def emit(inst: _Inst) -> int:
        if inst.leaf is not None:
            base = len(rows)
            mc = inst.leaf.chain
            for s in mc.states():
                rows.append([(base + t, p) for t, p in mc.transitions[s]])
                labels.append(mc.labels[s])
            return base
        me = len(rows)
        rows.append(None)
        labels.append(_positive(inst.local.label))
        kids = [c for c in inst.children if x[c.var] > _EPS]
        weights = [max(Fraction(x[c.var]).limit_denominator(den), Fraction(1, den * den)) for c in kids]
        total = sum(weights)
        row = []
        for c, w in zip(kids, weights):
            row.append((emit(c), w / total))
        rows[me] = row
        return me

    emit(root)
    return MarkovChain.build(rows, labels, 0)


def count_outer_F(f: Formula) -> int:
    """F occurrences that are not below any G."""
    if isinstance(f, (And, Or)):
        return count_outer_F(f.left) + count_outer_F(f.right)
    if isinstance(f, F):
        return 1 + count_outer_F(f.body)
    return 0


def _g_nested_bodies(f: Formula, under_g: bool = False) -> set:
    out = set()
    if isinstance(f, F) and under_g:
        out.add(f.body)
    for c in ((f.left, f.right) if isinstance(f, (And, Or)) else
              (f.body,) if isinstance(f, (F, G)) else ()):
        out |= _g_nested_bodies(c, under_g or isinstance(f, G))
    return out


def tree_depth_bound(f: Formula, chains: bool) -> int:
    m = count_outer_F(f)
    if not chains:
        return m + 1
    return (m + 1) * (len(_g_nested_bodies(f)) + 1) + 1


def _tree_search(f: Formula, chains: bool, budget: Optional[int]) -> Answer:
    budget = default_budget() if budget is None else budget
    search = _Search(f, chains, budget)
    for leaf in search.leaves((f,), (), frozenset()):
        return _certify(f, leaf.chain)
    shaky = False
    depth = tree_depth_bound(f, chains)
    try:
        for left in range(1, depth + 1):
            for local in search.locals((f,), (), frozenset(), 0):
                if not local.child_open:
                    continue
                lp = _LP()
                root = search.build((f,), (), frozenset(), 0, left, [], lp, forced=local)[0]
                x = lp.solve(root.var)
                if x is None:
                    continue
                for den in (16, 1000, 10 ** 6):
                    mc = _extract(root, x, den)
                    if models(mc, f):
                        return _certify(f, mc)
                shaky = True
    except BudgetExceeded as exc:
        return Answer(Status.UNKNOWN, reason=f"bound-exceeded: {exc} before depth {depth}")
    if shaky:
        return Answer(Status.UNKNOWN, reason="linear program feasible but no exact witness recovered")
    return UNSAT


def decide_tree(f: Formula, budget: Optional[int] = None) -> Verdict:
    if classify(f) is not Fragment.FqG1:
        raise FormulaError("decide_tree needs an Fq,G1 formula")
    bound = f"trees of depth {tree_depth_bound(f, False)} with lasso leaves"
    return _same(_tree_search(f, False, budget), Fragment.FqG1, bound)


def decide_tree_chains(f: Formula, budget: Optional[int] = None) -> Verdict:
    if classify(f) is not Fragment.Fq1G1Or:
        raise FormulaError("decide_tree_chains needs an Fq/1,G1,or formula")
    bound = f"trees of depth {tree_depth_bound(f, True)} with lasso leaves"
    return _same(_tree_search(f, True, budget), Fragment.Fq1G1Or, bound)


def decide(f: Formula, budget: Optional[int] = None) -> Verdict:
    frag = classify(f)
    if frag is Fragment.PROPOSITIONAL:
        return decide_propositional(f)
    if frag is Fragment.G1FqG1:
        return decide_g1_conj(f)
    if frag is Fragment.G1FqG1Or:
        return decide_single_bscc(f)
    if frag is Fragment.FqG1:
        return decide_tree(f, budget)
    if frag is Fragment.Fq1G1Or:
        return decide_tree_chains(f, budget)
    if frag is Fragment.GqTop:
        return decide_gq_top(f)
    return decide_unsupported(f)


def decide_unsupported(f: Formula, n: int = 3, d: int = 2) -> Verdict:
    """Outside every decidable fragment: only a small grid search is attempted."""
    bound = f"grid search, {n} states, denominator {d}"
    try:
        found = bounded_sat(f, n, d, budget=200_000)
    except BudgetExceeded:
        found = None
    if found is not None and found.sat:
        ans = _certify(f, found.witness)
        return Verdict(ans, ans, Fragment.UNSUPPORTED, bound)
    unknown = Answer(Status.UNKNOWN, reason="open problem: no decision procedure for this fragment")
    return Verdict(unknown, unknown, Fragment.UNSUPPORTED, bound)
