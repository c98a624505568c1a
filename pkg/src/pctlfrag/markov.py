"""Finite labelled Markov chains with exact rational transition probabilities."""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional

from .exact import solve


class ChainError(ValueError):
    pass


class RowSumError(ChainError):
    def __init__(self, state: int, total: Fraction):
        super().__init__(f"RowSum(state {state}, {total})")
        self.state = state
        self.total = total


@dataclass(frozen=True)
class MarkovChain:
    transitions: tuple  # per state: tuple of (target, Fraction) sorted by target
    labels: tuple  # per state: frozenset of atom names
    initial: int = 0

    def __post_init__(self):
        n = len(self.transitions)
        if n == 0:
            raise ChainError("chain needs at least one state")
        if len(self.labels) != n:
            raise ChainError("one label set per state required")
        if not 0 <= self.initial < n:
            raise ChainError(f"initial state {self.initial} out of range")
        for s, row in enumerate(self.transitions):
            total = Fraction(0)
            for t, p in row:
                if not 0 <= t < n:
                    raise ChainError(f"dangling target {t} in row {s}")
                if not 0 < p <= 1:
                    raise ChainError(f"probability {p} out of (0,1] in row {s}")
                total += p
            if total != 1:
                raise RowSumError(s, total)

    @staticmethod
    def build(rows, labels, initial: int = 0) -> "MarkovChain":
        """Build from rows given as dicts ``{target: prob}`` or pair lists."""
        trans = []
        for row in rows:
            items = row.items() if isinstance(row, dict) else row
            merged: dict = {}
            for t, p in items:
                p = Fraction(p)
                if p:
                    merged[t] = merged.get(t, 0) + p
            trans.append(tuple(sorted(merged.items())))
        return MarkovChain(tuple(trans), tuple(frozenset(l) for l in labels), initial)

    @property
    def n(self) -> int:
        return len(self.transitions)

    def states(self) -> range:
        return range(self.n)

    def prob(self, s: int, t: int) -> Fraction:
        for u, p in self.transitions[s]:
            if u == t:
                return p
        return Fraction(0)

    def post(self, s: int) -> list:
        return [t for t, _ in self.transitions[s]]

    def alphabet(self) -> frozenset:
        out = frozenset()
        for l in self.labels:
            out |= l
        return out

    def with_initial(self, s: int) -> "MarkovChain":
        return MarkovChain(self.transitions, self.labels, s)

    def restrict(self, keep: Iterable[int]) -> tuple:
        """Sub-chain on a post-closed state set; returns (chain, old->new map)."""
        keep = sorted(set(keep))
        index = {s: i for i, s in enumerate(keep)}
        rows = []
        for s in keep:
            row = []
            for t, p in self.transitions[s]:
                if t not in index:
                    raise ChainError("restriction set is not closed under successors")
                row.append((index[t], p))
            rows.append(row)
        chain = MarkovChain.build(rows, [self.labels[s] for s in keep], index.get(self.initial, 0))
        return chain, index


# ----------------------------------------------------------------- analyses

def post_star(mc: MarkovChain, s: int) -> frozenset:
    seen = {s}
    todo = [s]
    while todo:
        u = todo.pop()
        for t in mc.post(u):
            if t not in seen:
                seen.add(t)
                todo.append(t)
    return frozenset(seen)


def pre_star(mc: MarkovChain, targets: Iterable[int]) -> frozenset:
    back: dict = {}
    for s in mc.states():
        for t in mc.post(s):
            back.setdefault(t, []).append(s)
    seen = set(targets)
    todo = list(seen)
    while todo:
        u = todo.pop()
        for s in back.get(u, ()):
            if s not in seen:
                seen.add(s)
                todo.append(s)
    return frozenset(seen)


def sccs(mc: MarkovChain) -> list:
    """Tarjan's algorithm, iterative; components sorted by least member."""
    index: dict = {}
    low: dict = {}
    on_stack = set()
    stack: list = []
    out = []
    counter = 0
    for root in mc.states():
        if root in index:
            continue
        work = [(root, iter(mc.post(root)))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(mc.post(w))))
                    advanced = True
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                low[work[-1][0]] = min(low[work[-1][0]], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                out.append(frozenset(comp))
    return sorted(out, key=min)


@dataclass(frozen=True)
class BsccDecomposition:
    components: tuple
    bottom: tuple  # bool per component
    reach_probability: tuple  # per state, probability of reaching some BSCC

    @property
    def bsccs(self) -> list:
        return [c for c, b in zip(self.components, self.bottom) if b]


def reach_probabilities(mc: MarkovChain, target: Iterable[int]) -> list:
    """Exact probability of eventually visiting ``target`` from every state."""
    target = frozenset(target)
    can_reach = pre_star(mc, target)
    unknown = [s for s in mc.states() if s in can_reach and s not in target]
    result = [Fraction(0)] * mc.n
    for s in target:
        result[s] = Fraction(1)
    if not unknown:
        return result
    pos = {s: i for i, s in enumerate(unknown)}
    m = len(unknown)
    matrix = [[Fraction(0)] * m for _ in range(m)]
    rhs = [Fraction(0)] * m
    for s in unknown:
        i = pos[s]
        matrix[i][i] += 1
        for t, p in mc.transitions[s]:
            if t in target:
                rhs[i] += p
            elif t in pos:
                matrix[i][pos[t]] -= p
    for s, x in zip(unknown, solve(matrix, rhs)):
        result[s] = x
    return result


def bsccs(mc: MarkovChain) -> BsccDecomposition:
    comps = sccs(mc)
    bottom = []
    for c in comps:
        bottom.append(all(t in c for s in c for t in mc.post(s)))
    union = frozenset().union(*(c for c, b in zip(comps, bottom) if b))
    return BsccDecomposition(tuple(comps), tuple(bottom), tuple(reach_probabilities(mc, union)))


def height(mc: MarkovChain) -> int:
    """Largest breadth-first distance from the initial state.

    For a tree with back edges this is the depth of the tree.
    """
    dist = {mc.initial: 0}
    queue = deque([mc.initial])
    while queue:
        u = queue.popleft()
        for t in mc.post(u):
            if t not in dist:
                dist[t] = dist[u] + 1
                queue.append(t)
    return max(dist.values())


def reachable_part(mc: MarkovChain) -> MarkovChain:
    chain, _ = mc.restrict(post_star(mc, mc.initial))
    return chain


# ------------------------------------------------------------------ unfolding

@dataclass(frozen=True)
class TreeUnfolding:
    """Unfolding of a chain to a fixed depth.

    ``chain`` has the tree nodes first (node 0 is the root); ``origin[v]``
    gives the original state of tree node ``v`` and ``paths[v]`` the state
    sequence leading to it.  With ``closure="backref"`` the original chain
    is appended after the tree nodes and leaves continue into it, which
    keeps every event's measure intact; with ``"selfloop"`` leaves loop.
    """

    chain: MarkovChain
    origin: tuple
    paths: tuple
    depth: tuple
    tree_size: int

    def node_state(self, v: int) -> int:
        if v < self.tree_size:
            return self.origin[v]
        return v - self.tree_size


def unfold(mc: MarkovChain, h: int, closure: str = "backref") -> TreeUnfolding:
    if h < 0:
        raise ValueError("depth must be non-negative")
    if closure not in ("backref", "selfloop"):
        raise ValueError(f"unknown closure {closure!r}")
    paths = [(mc.initial,)]
    depth = [0]
    edges: list = [[]]
    frontier = [0]
    for d in range(h):
        nxt = []
        for v in frontier:
            s = paths[v][-1]
            for t, p in mc.transitions[s]:
                paths.append(paths[v] + (t,))
                depth.append(d + 1)
                edges.append([])
                w = len(paths) - 1
                edges[v].append((w, p))
                nxt.append(w)
        frontier = nxt
    size_ = len(paths)
    leaves = set(frontier)
    rows = []
    labels = []
    for v in range(size_):
        s = paths[v][-1]
        labels.append(mc.labels[s])
        if v in leaves:
            if closure == "selfloop":
                rows.append([(v, 1)])
            else:
                rows.append([(size_ + t, p) for t, p in mc.transitions[s]])
        else:
            rows.append(edges[v])
    if closure == "backref":
        for s in mc.states():
            rows.append([(size_ + t, p) for t, p in mc.transitions[s]])
            labels.append(mc.labels[s])
    chain = MarkovChain.build(rows, labels, 0)
    return TreeUnfolding(chain, tuple(p[-1] for p in paths), tuple(paths), tuple(depth), size_)


# ------------------------------------------------------------- serialization

_STATE_LINE = re.compile(r"^(\d+)\s*:\s*\{([^}]*)\}\s*->\s*(.*)$")


def load(text: str) -> MarkovChain:
    n: Optional[int] = None
    init = 0
    rows: dict = {}
    labels: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("states:"):
            n = int(line.split(":", 1)[1])
            continue
        if line.startswith("init:"):
            init = int(line.split(":", 1)[1])
            continue
        m = _STATE_LINE.match(line)
        if not m:
            raise ChainError(f"line {lineno}: malformed line {raw!r}")
        idx = int(m.group(1))
        if idx in rows:
            raise ChainError(f"line {lineno}: state {idx} defined twice")
        atoms = [a.strip() for a in m.group(2).split(",") if a.strip()]
        labels[idx] = frozenset(atoms)
        row = []
        for item in m.group(3).split(","):
            item = item.strip()
            if not item:
                continue
            try:
                t, p = item.split(":")
                row.append((int(t), Fraction(p.strip())))
            except ValueError:
                raise ChainError(f"line {lineno}: malformed transition {item!r}") from None
        rows[idx] = row
    if n is None:
        raise ChainError("missing 'states:' line")
    if sorted(rows) != list(range(n)):
        raise ChainError(f"expected state lines 0..{n - 1}, got {sorted(rows)}")
    for idx, row in rows.items():
        for t, _ in row:
            if not 0 <= t < n:
                raise ChainError(f"dangling target {t} in row {idx}")
    return MarkovChain.build([rows[i] for i in range(n)], [labels[i] for i in range(n)], init)


def save(mc: MarkovChain) -> str:
    lines = [f"states: {mc.n}", f"init: {mc.initial}"]
    for s in mc.states():
        atoms = ",".join(sorted(mc.labels[s]))
        trans = ", ".join(f"{t}:{p}" for t, p in mc.transitions[s])
        lines.append(f"{s}: {{{atoms}}} -> {trans}")
    return "\n".join(lines) + "\n"


def to_dot(mc: MarkovChain, name: str = "chain") -> str:
    lines = [f"digraph {name} {{"]
    for s in mc.states():
        shape = "doublecircle" if s == mc.initial else "circle"
        atoms = ",".join(sorted(mc.labels[s]))
        lines.append(f'  {s} [shape={shape}, label="{s} {{{atoms}}}"];')
    for s in mc.states():
        for t, p in mc.transitions[s]:
            lines.append(f'  {s} -> {t} [label="{p}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
