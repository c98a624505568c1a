"""Model-to-model constructions: BSCC collapse, tree reduction and chain insertion."""

from __future__ import annotations

import warnings
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .checker import check, models
from .formula import (
    And, F, Formula, Fragment, G, G1, Or, classify, conj, g_nested, is_almost_sure, size,
    subformulas,
)
from .markov import MarkovChain, TreeUnfolding, bsccs, post_star, reach_probabilities, sccs


class TransformError(ValueError):
    pass


def _as_chain(mc) -> MarkovChain:
    return mc.chain if isinstance(mc, TreeUnfolding) else mc


# ------------------------------------------------------------------ collapse

def collapse_classes(mc: MarkovChain, f: Formula) -> list:
    """Label intersections of the classes S/xi, deduplicated, in subformula order."""
    table = check(mc, f)
    reach = post_star(mc, mc.initial)
    out = []
    for xi in subformulas(f):
        members = table.sat_set(xi) & reach
        if not members:
            continue
        label = frozenset.intersection(*(mc.labels[s] for s in members))
        if label not in out:
            out.append(label)
    return out


def bscc_collapse(mc: MarkovChain, f: Formula) -> MarkovChain:
    mc = _as_chain(mc)
    if classify(f) not in (Fragment.G1FqG1, Fragment.G1FqG1Or):
        raise TransformError("collapse needs a G=1 rooted formula")
    if not models(mc, f):
        raise TransformError("input chain is not a model of the formula")
    labels = collapse_classes(mc, f)
    rows = [[((i + 1) % len(labels), 1)] for i in range(len(labels))]
    out = MarkovChain.build(rows, labels, 0)
    if not models(out, f):
        raise TransformError("collapsed circle is not a model")
    return out


# ------------------------------------------------------------------- reduce

@dataclass(frozen=True)
class Reduction:
    """Output of ``reduce``: ``origin[v]`` is the original state of tree node ``v``
    (None for states of constructed circles); ``tree_edges`` lists (parent, child)
    pairs between tree nodes."""

    chain: MarkovChain
    origin: tuple
    tree_edges: tuple
    pruned: bool


def _flatten(req: Formula, s: int, table):
    """Split a requirement that holds at ``s`` into F bodies and G bodies."""
    fs, gs = [], []
    todo = [req]
    while todo:
        x = todo.pop()
        if isinstance(x, And):
            todo += [x.right, x.left]
        elif isinstance(x, Or):
            todo.append(x.left if table.holds(x.left, s) else x.right)
        elif isinstance(x, F):
            fs.append(x)
        elif isinstance(x, G):
            gs.append(x.body)
    return fs, gs


class _Reducer:
    def __init__(self, mc: MarkovChain, f: Formula, prune: bool):
        self.mc = mc
        self.f = f
        self.prune = prune
        self.table = check(mc, f)
        self._reach: dict = {}
        self.rows: list = []
        self.labels: list = []
        self.origin: list = []
        self.edges: list = []
        self.pruned = False
        self.limit = size(f) + 2
        self.bottom = frozenset().union(*bsccs(mc).bsccs)

    def holds(self, x: Formula, s: int) -> bool:
        return self.table.holds(x, s)

    def reach(self, target: frozenset) -> list:
        if target not in self._reach:
            self._reach[target] = reach_probabilities(self.mc, target)
        return self._reach[target]

    def body_states(self, body: Formula) -> frozenset:
        return self.table.sat_set(body)

    def new_state(self, label, origin) -> int:
        self.rows.append(None)
        self.labels.append(label)
        self.origin.append(origin)
        return len(self.rows) - 1

    def frontier(self, s: int, I: list):
        """First states below ``s`` that satisfy an open body or can reach none."""
        mc = self.mc
        can = [self.reach(self.body_states(b)) for b in I]
        tags: dict = {}
        stop = set()
        seen = {s}
        queue = deque(mc.post(s))
        while queue:
            t = queue.popleft()
            if t in seen:
                continue
            seen.add(t)
            hit = frozenset(b for b in I if self.holds(b, t))
            if hit or all(c[t] == 0 for c in can):
                tags[t] = hit
                stop.add(t)
                continue
            queue.extend(mc.post(t))
        # absorption probabilities into the frontier
        rows = []
        for u in mc.states():
            rows.append([(u, 1)] if u in stop else list(mc.transitions[u]))
        absorbing = MarkovChain.build(rows, mc.labels, mc.initial)
        probs = {t: reach_probabilities(absorbing, {t})[s] for t in sorted(stop)}
        return [(t, probs[t], tags[t]) for t in sorted(stop) if probs[t] > 0]

    def prune_branches(self, children: list) -> list:
        if len(children) <= self.limit:
            return children
        self.pruned = True
        order = sorted(children, key=lambda c: (-c[1], c[0]))
        keep = []
        for tag in sorted({b for _, _, tags in children for b in tags}, key=repr):
            best = next(c for c in order if tag in c[2])
            if best not in keep:
                keep.append(best)
        for c in order:
            if len(keep) >= self.limit:
                break
            if c not in keep:
                keep.append(c)
        keep = keep[: self.limit]
        return [c for c in children if c in keep]

    def g_model(self, s: int, gacc: list) -> int:
        me = self.new_state(self.mc.labels[s], s)
        if not gacc:
            self.rows[me] = [(me, Fraction(1))]
            return me
        sub, index = self.mc.restrict(post_star(self.mc, s))
        sub = sub.with_initial(index[s])
        goal = G1(conj(gacc))
        labels = collapse_classes(sub, goal)
        if labels == [self.mc.labels[s]] and s in self.bottom:
            self.rows[me] = [(me, Fraction(1))]
            return me
        first = len(self.rows)
        for i, lab in enumerate(labels):
            v = self.new_state(lab, None)
            self.rows[v] = [(first + (i + 1) % len(labels), Fraction(1))]
        self.rows[me] = [(first, Fraction(1))]
        return me

    def visit(self, s: int, reqs: list, pending: list, gacc: list) -> int:
        open_, gacc, satisfied = list(pending), list(gacc), set()
        todo = list(reqs)
        while todo:
            fs, gs = _flatten(todo.pop(0), s, self.table)
            gacc.extend(g for g in gs if g not in gacc)
            for x in fs:
                if x.body in satisfied:
                    continue
                if self.holds(x.body, s):
                    satisfied.add(x.body)
                    todo.append(x.body)
                elif x.body not in open_:
                    open_.append(x.body)
        I = [b for b in open_ if self.reach(self.body_states(b))[s] > 0]
        if not I:
            return self.g_model(s, gacc)
        children = self.frontier(s, I)
        if self.prune:
            children = self.prune_branches(children)
        me = self.new_state(self.mc.labels[s], s)
        total = sum(p for _, p, _ in children)
        row = []
        for t, p, tags in children:
            child = self.visit(t, sorted(tags, key=repr), [b for b in I if b not in tags], gacc)
            self.edges.append((me, child))
            row.append((child, p / total))
        self.rows[me] = row
        return me


def reduce(mc, f: Formula, prune: bool = True) -> Reduction:
    """Reduce a model of an F-rooted formula to a tree of bounded height.

    Each node is connected directly to the first states below it that satisfy
    a pending F-body, or from which no pending body is reachable any more.
    """
    mc = _as_chain(mc)
    if classify(f) not in (Fragment.FqG1, Fragment.Fq1G1Or):
        raise TransformError("reduce needs an Fq,G1 or Fq/1,G1,or formula")
    if not models(mc, f):
        raise TransformError("input chain is not a model of the formula")
    out = _run_reduce(mc, f, prune)
    if classify(f) is Fragment.FqG1 and not models(out.chain, f):
        if out.pruned:
            warnings.warn("branch pruning broke the model; retrying without pruning")
            out = _run_reduce(mc, f, False)
        if not models(out.chain, f):
            raise TransformError("reduced chain is not a model")
    return out


def _run_reduce(mc: MarkovChain, f: Formula, prune: bool) -> Reduction:
    r = _Reducer(mc, f, prune)
    root = r.visit(mc.initial, [f], [], [])
    # the root is created after its subtree; renumber so the root is state 0
    order = _preorder(r.rows, root)
    index = {old: new for new, old in enumerate(order)}
    rows = [[(index[t], p) for t, p in r.rows[old]] for old in order]
    chain = MarkovChain.build(rows, [r.labels[old] for old in order], 0)
    edges = tuple((index[a], index[b]) for a, b in r.edges)
    return Reduction(chain, tuple(r.origin[old] for old in order), tuple(sorted(edges)), r.pruned)


def _preorder(rows: list, root: int) -> list:
    order, seen, stack = [], set(), [root]
    while stack:
        v = stack.pop()
        if v in seen:
            continue
        seen.add(v)
        order.append(v)
        stack.extend(t for t, _ in reversed(rows[v]))
    return order


# ------------------------------------------------------------ chain insertion

def nonbottom_cycles(mc: MarkovChain) -> list:
    """SCCs that contain a cycle but can be left."""
    out = []
    for comp in sccs(mc):
        closed = all(t in comp for s in comp for t in mc.post(s))
        cyclic = len(comp) > 1 or any(t in comp for s in comp for t in mc.post(s))
        if cyclic and not closed:
            out.append(comp)
    return out


def _path(mc: MarkovChain, s: int, t: int) -> list:
    """States strictly between s and t on the first breadth-first path."""
    parent = {s: None}
    queue = deque([s])
    while queue:
        u = queue.popleft()
        if u == t and u != s:
            break
        for w in mc.post(u):
            if w not in parent:
                parent[w] = u
                queue.append(w)
    if t not in parent:
        raise TransformError(f"state {t} is not reachable from {s}")
    inner = []
    u = parent[t]
    while u is not None and u != s:
        inner.append(u)
        u = parent[u]
    return inner[::-1]


@dataclass(frozen=True)
class Insertion:
    chain: MarkovChain
    retained: dict  # (parent, child) reduced edge -> tuple of original states inserted
    origin: tuple


def chain_insert(reduced: Reduction, original, f: Formula) -> Insertion:
    """Insert, on every reduced edge, the last original states that satisfy a
    G-nested F=1 body lost by the reduction."""
    original = _as_chain(original)
    if classify(f) not in (Fragment.FqG1, Fragment.Fq1G1Or):
        raise TransformError("chain insertion needs an Fq/1,G1,or formula")
    if not models(original, f):
        raise TransformError("original chain is not a model of the formula")
    table = check(original, f)
    nested = list(dict.fromkeys(x for x in g_nested(f) if isinstance(x, F) and is_almost_sure(x)))
    red = reduced.chain
    rows = [list(red.transitions[v]) for v in red.states()]
    labels = list(red.labels)
    origin = list(reduced.origin)
    retained: dict = {}
    for u, v in reduced.tree_edges:
        s, t = reduced.origin[u], reduced.origin[v]
        inner = _path(original, s, t)
        picks = set()
        for x in nested:
            if table.holds(x, s) and not table.holds(x, t):
                hits = [i for i, w in enumerate(inner) if table.holds(x.body, w)]
                if hits:
                    picks.add(hits[-1])
        kept = tuple(inner[i] for i in sorted(picks))
        retained[(u, v)] = kept
        if not kept:
            continue
        first = len(rows)
        for k, w in enumerate(kept):
            nxt = first + k + 1 if k + 1 < len(kept) else v
            rows.append([(nxt, Fraction(1))])
            labels.append(original.labels[w])
            origin.append(w)
        rows[u] = [(first if x == v else x, p) for x, p in rows[u]]
    out = MarkovChain.build(rows, labels, red.initial)
    tree_states = sorted({x for e in reduced.tree_edges for x in e} | {red.initial})
    for w in tree_states:
        before = reach_probabilities(red, {w})
        after = reach_probabilities(out, {w})
        for u in tree_states:
            if before[u] != after[u]:
                raise TransformError(f"reachability {u}->{w} changed")
    if nonbottom_cycles(out):
        raise TransformError("chain insertion produced a non-bottom SCC")
    if not models(out, f):
        raise TransformError("corrected chain is not a model")
    return Insertion(out, retained, tuple(origin))
