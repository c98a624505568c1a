import random
from fractions import Fraction

import pytest

from pctlfrag.checker import models
from pctlfrag.formula import Fragment, classify, normalize, parse, size
from pctlfrag.markov import height
from pctlfrag.synth import (
    BudgetExceeded, Status, bounded_sat, circle, decide, decide_g1_conj, decide_single_bscc,
    decide_tree, lasso, tree_depth_bound,
)
from pctlfrag.transform import nonbottom_cycles

from corpus import bound_violation, random_formula
from fixtures import CHOICE_EXAMPLE, DISJ_EXAMPLE, BALANCED, SPLIT_HALF


def nf(text):
    return normalize(parse(text))


@pytest.mark.parametrize("text, finite, general", [
    ("G>=1/2 !a & F>=1/2 a", Status.SAT, Status.SAT),
    ("G=1 !a & F>=1/2 a", Status.UNSAT, Status.UNSAT),
    ("G>0 (!a & F>0 a)", Status.UNSAT, Status.UNKNOWN),
    ("G=1 (!a & F=1 a)", Status.UNSAT, Status.UNSAT),
    ("F>1/2 G=1 a & F>1/2 G=1 !a", Status.UNSAT, Status.UNSAT),
    ("F>=1/2 G=1 a & F>=1/2 G=1 !a", Status.SAT, Status.SAT),
    ("F>=1/2 G=1 a & G=1 (F=1 !a | F=1 b)", Status.SAT, Status.SAT),
    ("G>=1/2 (F>=1/3 a & F>=1/3 !a)", Status.SAT, Status.SAT),
    ("a & !a", Status.UNSAT, Status.UNSAT),
    ("a | !a", Status.SAT, Status.SAT),
])
def test_named_verdicts(text, finite, general):
    v = decide(nf(text))
    assert (v.finite.status, v.general.status) == (finite, general)
    if v.finite.sat:
        assert models(v.finite.witness, nf(text))


def test_gq_top_unknown_has_reason():
    v = decide(nf("G>0 (!a & F>0 a)"))
    assert v.general.reason


def test_balanced_formula_gives_two_state_circle():
    v = decide(BALANCED)
    assert v.fragment is Fragment.GqTop
    assert v.finite.witness.n == 2
    assert sorted(map(sorted, v.finite.witness.labels)) == [[], ["a"]]


def test_g1_conj_witness_is_a_circle():
    f = nf("G=1 (F>0 a & F>0 (!a & b) & G=1 F=1 !b)")
    w = decide_g1_conj(f).finite.witness
    assert w.n <= size(f)
    assert all(len(row) == 1 for row in w.transitions)


def test_single_bscc_with_disjunction():
    v = decide_single_bscc(nf("G=1 ((a & F>0 !a) | (!a & F>0 a))"))
    assert v.finite.sat and v.finite.witness.n == 2


def test_split_half_witness_shape():
    w = decide_tree(SPLIT_HALF).finite.witness
    assert models(w, SPLIT_HALF)
    assert height(w) <= size(SPLIT_HALF)
    # two branches of mass 1/2 into absorbing states with opposite labels
    assert [p for _, p in w.transitions[0]] == [Fraction(1, 2), Fraction(1, 2)]
    assert {w.labels[t] for t, _ in w.transitions[0]} == {frozenset(), frozenset({"a"})}


def test_disjunctive_tree_witness():
    w = decide(DISJ_EXAMPLE).finite.witness
    assert models(w, DISJ_EXAMPLE)
    assert height(w) <= size(DISJ_EXAMPLE) ** 2
    assert not nonbottom_cycles(w)


def test_repeated_choice_example_is_outside_tree_fragments():
    # its G body holds a nested F>0, so it is not a Fq/1 formula
    assert classify(CHOICE_EXAMPLE) is Fragment.UNSUPPORTED


def test_depth_bounds():
    assert tree_depth_bound(SPLIT_HALF, False) == 3
    assert tree_depth_bound(DISJ_EXAMPLE, True) == (1 + 1) * (2 + 1) + 1


def test_circle_and_lasso():
    a, e = frozenset({"a"}), frozenset()
    assert circle([a, e]).transitions == (((1, 1),), ((0, 1),))
    assert lasso(e, [a]).n == 2
    assert lasso(a, [e, a]).labels[0] == a


def test_bounded_sat_finds_balanced_formula_model():
    res = bounded_sat(BALANCED, 2, 2)
    assert res.sat and res.witness.n == 2


def test_bounded_sat_no_witness():
    res = bounded_sat(nf("G=1 (a & !a)"), 2, 2)
    assert not res.sat and res.candidates > 0


def test_bounded_sat_choice_example():
    res = bounded_sat(CHOICE_EXAMPLE, 3, 2)
    assert res.sat and models(res.witness, CHOICE_EXAMPLE)


def test_bounded_sat_budget():
    with pytest.raises(BudgetExceeded):
        bounded_sat(nf("G=1 (a & !a)"), 3, 4, budget=10)


def test_witness_bounds_on_random_formulas():
    rng = random.Random(11)
    seen = set()
    for _ in range(150):
        f = random_formula(rng, 3)
        v = decide(f)
        if v.finite.sat:
            seen.add(v.fragment)
            assert models(v.finite.witness, f)
            assert bound_violation(f, v.finite.witness) is None
    assert len(seen) >= 4


@pytest.mark.parametrize("text", [
    "F>=1/2 G=1 a & F>=1/4 G=1 (!a & b)",
    "F>1/3 (a & F>=1/2 G=1 !a) & F>0 G=1 b",
    "G=1 (F>0 a & F>=1/2 !a) & F=1 G=1 b",
])
def test_oracle_agrees_on_small_grids(text):
    f = nf(text)
    v = decide(f)
    res = bounded_sat(f, 3, 2, budget=10 ** 6)
    if res.sat:
        assert v.finite.sat


def test_oracle_exhausts_small_grid():
    from corpus import oracle_corpus
    checked = 0
    for f in oracle_corpus(5):
        v = decide(f)
        res = bounded_sat(f, 2, 4, budget=10 ** 5)
        if res.sat:
            assert v.finite.sat, f
        if not v.finite.sat:
            checked += 1
    assert checked > 0


def test_bounded_sat_contradictory_root_is_immediate():
    res = bounded_sat(nf("F>=1/2 F>0 !a & a & !a"), 6, 4, budget=10)
    assert not res.sat and res.candidates == 0
