"""Exact PCTL(F,G) model checking on finite chains."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .formula import And, Atom, F, Formula, G, NegAtom, Or, is_normalized
from .markov import MarkovChain, reach_probabilities


@dataclass(frozen=True)
class SatTable:
    root: Formula
    verdicts: dict  # subformula -> frozenset of satisfying states
    probabilities: dict  # temporal subformula -> tuple of per-state Fractions

    def holds(self, f: Formula, s: int) -> bool:
        return s in self.sat_set(f)

    def sat_set(self, f: Formula) -> frozenset:
        try:
            return self.verdicts[f]
        except KeyError:
            raise KeyError(f"not a subformula of the checked formula: {f}") from None

    def probability(self, f: Formula, s: int) -> Fraction:
        return self.probabilities[f][s]


def probability(mc: MarkovChain, s: int, pathop: str, target: Iterable[int]) -> Fraction:
    """Probability from ``s`` of eventually (F) or always (G) being in ``target``."""
    return path_probabilities(mc, pathop, target)[s]


def path_probabilities(mc: MarkovChain, pathop: str, target: Iterable[int]) -> list:
    target = frozenset(target)
    if pathop == "F":
        return reach_probabilities(mc, target)
    if pathop == "G":
        avoid = reach_probabilities(mc, frozenset(mc.states()) - target)
        return [1 - x for x in avoid]
    raise ValueError(f"unknown path operator {pathop!r}")


def check(mc: MarkovChain, f: Formula) -> SatTable:
    if not is_normalized(f):
        raise ValueError("check expects a normalized formula")
    verdicts: dict = {}
    probs: dict = {}
    states = frozenset(mc.states())
    def visit(node):
        if node in verdicts:
            return verdicts[node]
        if isinstance(node, Atom):
            out = frozenset(s for s in states if node.name in mc.labels[s])
        elif isinstance(node, NegAtom):
            out = frozenset(s for s in states if node.name not in mc.labels[s])
        elif isinstance(node, And):
            out = visit(node.left) & visit(node.right)
        elif isinstance(node, Or):
            out = visit(node.left) | visit(node.right)
        elif isinstance(node, (F, G)):
            op = "F" if isinstance(node, F) else "G"
            values = tuple(path_probabilities(mc, op, visit(node.body)))
            probs[node] = values
            out = frozenset(s for s in states if node.cmp.holds(values[s], node.bound))
        else:
            raise TypeError(node)
        verdicts[node] = out
        return out

    visit(f)
    return SatTable(f, verdicts, probs)


def sat_set(table: SatTable, f: Formula) -> frozenset:
    return table.sat_set(f)


def models(mc: MarkovChain, f: Formula, state: int | None = None) -> bool:
    s = mc.initial if state is None else state
    return s in check(mc, f).verdicts[f]
