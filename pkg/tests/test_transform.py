import random
import warnings
from fractions import Fraction

import pytest

from pctlfrag.checker import models
from pctlfrag.formula import normalize, parse, size
from pctlfrag.markov import height, reach_probabilities
from pctlfrag.rewrite import hat
from pctlfrag.synth import bounded_sat, decide
from pctlfrag.transform import (
    TransformError, bscc_collapse, chain_insert, collapse_classes, nonbottom_cycles, reduce,
)

from fixtures import (
    BIG_CIRCLE, DISJ_CORRECTED, DISJ_EXAMPLE, DISJ_ORIGINAL, DISJ_REDUCED, BALANCED, SMALL_CIRCLE,
    SPLIT_HALF, SPLIT_TREE, shape,
)


def nf(text):
    return normalize(parse(text))


def test_collapse_big_circle():
    out = bscc_collapse(BIG_CIRCLE, hat(BALANCED))
    assert shape(out) == shape(SMALL_CIRCLE)
    assert models(out, BALANCED)


def test_collapse_classes_are_deduplicated():
    labels = collapse_classes(BIG_CIRCLE, hat(BALANCED))
    assert len(labels) == len(set(labels)) == 2


def test_collapse_rejects_non_models_and_fragments():
    with pytest.raises(TransformError):
        bscc_collapse(SMALL_CIRCLE, nf("G=1 a"))
    with pytest.raises(TransformError):
        bscc_collapse(SMALL_CIRCLE, nf("F>0 a"))


def test_reduce_split_tree():
    red = reduce(SPLIT_TREE, SPLIT_HALF)
    mc = red.chain
    assert mc.n == 9 and height(mc) == 2
    assert [p for _, p in mc.transitions[0]] == [Fraction(3, 8), Fraction(1, 8), Fraction(1, 8), Fraction(3, 8)]
    assert models(mc, SPLIT_HALF)


def test_reduce_loses_disjunction_then_insertion_repairs_it():
    red = reduce(DISJ_ORIGINAL, DISJ_EXAMPLE)
    assert shape(red.chain) == shape(DISJ_REDUCED)
    assert not models(red.chain, DISJ_EXAMPLE)
    ins = chain_insert(red, DISJ_ORIGINAL, DISJ_EXAMPLE)
    assert shape(ins.chain) == shape(DISJ_CORRECTED)
    assert models(ins.chain, DISJ_EXAMPLE)
    assert sum(len(v) for v in ins.retained.values()) == 2


def test_insertion_preserves_tree_reachability():
    red = reduce(DISJ_ORIGINAL, DISJ_EXAMPLE)
    ins = chain_insert(red, DISJ_ORIGINAL, DISJ_EXAMPLE)
    for w in range(red.chain.n):
        assert reach_probabilities(red.chain, {w})[0] == reach_probabilities(ins.chain, {w})[0]


def test_reduce_rejects_non_models():
    with pytest.raises(TransformError):
        reduce(DISJ_REDUCED, DISJ_EXAMPLE)


def test_nonbottom_cycles():
    from fixtures import choice_model
    assert nonbottom_cycles(choice_model(Fraction(1, 2))) == [frozenset({0, 1})]
    assert nonbottom_cycles(SMALL_CIRCLE) == []


@pytest.mark.parametrize("text", [
    "F>=1/2 G=1 a & F>=1/4 G=1 !a",
    "F>0 (a & F>=1/2 G=1 !a)",
    "F>=1/2 G=1 a & G=1 (F=1 !a | F=1 b)",
    "F>=1/2 (a & G=1 F=1 !a) & F>0 b",
])
def test_pipeline_on_oracle_witnesses(text):
    f = nf(text)
    res = bounded_sat(f, 3, 2, budget=10 ** 6)
    assert res.sat
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        red = reduce(res.witness, f)
    ins = chain_insert(red, res.witness, f)
    assert models(ins.chain, f)
    assert height(ins.chain) <= size(f) ** 2
    assert not nonbottom_cycles(ins.chain)
