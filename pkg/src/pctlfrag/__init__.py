"""Satisfiability and model checking for fragments of PCTL with F and G."""

from .checker import check, models
from .formula import Fragment, classify, normalize, parse, to_text
from .markov import MarkovChain, load, save
from .synth import Status, Verdict, bounded_sat, decide

__all__ = [
    "Fragment", "MarkovChain", "Status", "Verdict", "bounded_sat", "check",
    "classify", "decide", "load", "models", "normalize", "parse", "save", "to_text",
]
