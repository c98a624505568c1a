"""Hand-built chains and formulas used across the test modules."""

from fractions import Fraction

from pctlfrag.formula import normalize, parse
from pctlfrag.markov import MarkovChain

H = Fraction(1, 2)
Q = Fraction(1, 4)


def uniform(succ, labels, initial=0):
    rows = [{t: Fraction(1, len(ts)) for t in ts} for ts in succ]
    return MarkovChain.build(rows, labels, initial)


BALANCED = normalize(parse("G>=1/2 (F>=1/3 a & F>=1/3 !a)"))
SPLIT_HALF = normalize(parse("F>=1/2 G=1 a & F>=1/2 G=1 !a"))
DISJ_EXAMPLE = normalize(parse("F>=1/2 G=1 a & G=1 (F=1 !a | F=1 b)"))
CHOICE_EXAMPLE = normalize(parse("G=1 (F=1 (a & F>0 !a) | a) & F=1 G=1 a & !a"))

# large model with uniform branching; s2 continues into s1
BIG_CIRCLE = uniform(
    [[1, 2], [3, 4], [1], [5, 6], [5, 6], [7], [7], [1]],
    [set(), {"a"}, set(), set(), set(), {"a"}, {"a"}, set()],
)
SMALL_CIRCLE = uniform([[1], [0]], [set(), {"a"}])

# 15 states: two 1/2 branches, then 3/4 and 1/4 splits into tails of length 2
SPLIT_TREE = MarkovChain.build(
    [{1: H, 2: H}, {3: 3 * Q, 4: Q}, {5: Q, 6: 3 * Q}, {7: 1}, {8: 1}, {9: 1}, {10: 1},
     {11: 1}, {12: 1}, {13: 1}, {14: 1}, {11: 1}, {12: 1}, {13: 1}, {14: 1}],
    [set(), set(), set(), {"a"}, set(), {"a"}, set(), {"a"}, set(), {"a"}, set(),
     {"a"}, set(), {"a"}, set()],
)

DISJ_ORIGINAL = MarkovChain.build(
    [{1: H, 2: H}, {3: H, 4: H}, {5: H, 6: H}, {7: 1}, {4: 1}, {5: 1}, {8: 1}, {7: 1}, {8: 1}],
    [{"a"}, {"a"}, {"a"}, set(), set(), set(), set(), {"a", "b"}, {"a", "b"}],
)
DISJ_REDUCED = MarkovChain.build(
    [{1: Q, 2: Q, 3: Q, 4: Q}, {1: 1}, {2: 1}, {3: 1}, {4: 1}],
    [{"a"}, {"a", "b"}, set(), set(), {"a", "b"}],
)
DISJ_CORRECTED = MarkovChain.build(
    [{1: Q, 2: Q, 3: Q, 4: Q}, {5: 1}, {2: 1}, {3: 1}, {6: 1}, {5: 1}, {6: 1}],
    [{"a"}, set(), set(), set(), set(), {"a", "b"}, {"a", "b"}],
)


def choice_model(p: Fraction) -> MarkovChain:
    return MarkovChain.build([{1: 1}, {0: p, 2: 1 - p}, {2: 1}], [set(), {"a"}, {"a"}])


def shape(mc: MarkovChain, depth: int = 6, s=None):
    """Unrolled rooted signature: equal for chains that look alike up to ``depth`` steps."""
    s = mc.initial if s is None else s
    if depth == 0:
        return tuple(sorted(mc.labels[s]))
    kids = {}
    for t, p in mc.transitions[s]:
        sig = shape(mc, depth - 1, t)
        kids[sig] = kids.get(sig, 0) + p
    return tuple(sorted(mc.labels[s])), tuple(sorted(kids.items()))
