import random

import pytest
from hypothesis import given, settings, strategies as st

from pctlfrag.checker import check
from pctlfrag.formula import Fragment, FormulaError, classify, normalize, parse, to_text
from pctlfrag.rewrite import (
    LAWS, NormalForm, PatternMismatch, Scope, apply_law, hat, in_normal_shape, normal_form,
    positions, rebuild, subterm,
)

from corpus import law_instance, random_chain


def nf(text):
    return normalize(parse(text))


@pytest.mark.parametrize("text, expected", [
    ("G>=1/2 (F>=1/3 a & F>=1/3 !a)", "G=1 (F=1 a & F=1 !a)"),
    ("G>0 (!a & F>0 a)", "G=1 (!a & F=1 a)"),
    ("a | b", "a | b"),
])
def test_hat(text, expected):
    assert to_text(hat(nf(text))) == expected


def test_law_table():
    assert len(LAWS) == 10
    finite = {n for n, law in LAWS.items() if law.scope is Scope.FINITE_ONLY}
    assert finite == {"Gf", "GFCf"}


@pytest.mark.parametrize("name, text, expected", [
    ("GG", "G=1 G=1 a", "G=1 a"),
    ("Gf", "G=1 F>0 a", "G=1 F=1 a"),
    ("Ff", "F=1 F>1/2 a", "F>1/2 a"),
    ("FGF", "F=1 G=1 F=1 a", "G=1 F=1 a"),
    ("GFG", "G=1 F=1 G=1 a", "F=1 G=1 a"),
    ("FCf", "F=1 (F>0 a & F>=1/2 b)", "F>0 a & F>=1/2 b"),
    ("GC", "G=1 (a & b & !c)", "G=1 a & G=1 b & G=1 !c"),
    ("FGC", "F=1 G=1 (a & b)", "F=1 G=1 a & F=1 G=1 b"),
    ("GFCf", "G=1 F=1 (a & F>0 b)", "G=1 (F=1 a & F=1 b)"),
    ("GFCG", "G=1 F=1 (a & G=1 b)", "G=1 (F=1 a & F=1 G=1 b)"),
])
def test_law_examples(name, text, expected):
    assert to_text(apply_law(nf(text), name)) == expected


def test_law_at_position():
    f = nf("a & F>0 G=1 G=1 b")
    assert to_text(apply_law(f, "GG", (1, 0))) == "a & F>0 G=1 b"


def test_law_mismatch():
    with pytest.raises(PatternMismatch):
        apply_law(nf("F>0 a"), "GG")
    with pytest.raises(PatternMismatch):
        subterm(nf("a"), (0,))


@pytest.mark.parametrize("name", sorted(LAWS))
def test_law_soundness_sample(name):
    rng = random.Random(hash(name) % 1000)
    for _ in range(40):
        mc = random_chain(rng, rng.randint(1, 5))
        left = law_instance(name, rng)
        right = apply_law(left, name)
        tl, tr = check(mc, left), check(mc, right)
        assert tl.sat_set(left) == tr.sat_set(right), (to_text(left), to_text(right))


@settings(max_examples=80, deadline=None)
@given(st.sampled_from(sorted(LAWS)), st.randoms(use_true_random=False))
def test_laws_are_congruences(name, rng):
    # rewriting inside a context preserves the verdict of the context
    inner = law_instance(name, rng)
    ctx = nf("F>=1/2 (b | x) & G>0 !a")
    f = ctx.__class__(ctx.left.__class__(ctx.left.cmp, ctx.left.bound,
                                         ctx.left.body.__class__(ctx.left.body.left, inner)), ctx.right)
    pos = next(p for p in positions(f) if subterm(f, p) is inner)
    g = apply_law(f, name, pos)
    mc = random_chain(rng, rng.randint(1, 5), names=("a", "b"))
    assert check(mc, f).sat_set(f) == check(mc, g).sat_set(g)


@pytest.mark.parametrize("text, A, B, C", [
    ("G=1 a", ["a"], [], []),
    ("G=1 F=1 a", [], [], [["a"]]),
    ("G=1 (!a & F>0 a)", ["!a"], [], [["a"]]),
    ("G=1 F>0 G=1 (a & F>0 b)", [], ["a"], [["b"]]),
    ("G=1 (F>=1/2 (a & F>0 !b) & b)", ["b"], [], [["a"], ["!b"]]),
])
def test_normal_form(text, A, B, C):
    out = normal_form(nf(text))
    show = lambda lits: [to_text(l) for l in lits]
    assert show(out.A) == A and show(out.B) == B
    assert [show(c) for c in out.C] == C


def test_normal_form_rejects_other_fragments():
    with pytest.raises(FormulaError):
        normal_form(nf("F>0 a"))


@pytest.mark.parametrize("text", [
    "G=1 (F>=1/2 (a & F>0 !b) & b)",
    "G=1 (a & F>0 G=1 F>0 b)",
    "G=1 F=1 G=1 (a & F>0 !a)",
])
def test_rebuild_shape_and_fragment(text):
    out = rebuild(normal_form(nf(text)))
    assert in_normal_shape(out)
    assert classify(out) is Fragment.G1FqG1


def test_rebuild_agrees_on_chains():
    rng = random.Random(3)
    f = nf("G=1 (F>=1/2 (a & F>0 !b) & G=1 F>0 b)")
    g = rebuild(normal_form(f))
    for _ in range(200):
        mc = random_chain(rng, rng.randint(1, 5))
        assert check(mc, f).sat_set(f) == check(mc, g).sat_set(g)


def test_normal_form_make_sorts():
    a, na = nf("a"), nf("!a")
    assert NormalForm.make([na, a], [], [[a], [a]]) == NormalForm.make([a, na], [], [[a]])
