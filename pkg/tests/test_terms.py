"""Term model: exact arithmetic, explicit-only normalization, structural equality."""

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from termclamp.terms import (
    Factor,
    IndexRef,
    OrnamentGroup,
    Stem,
    Summand,
    Term,
    add_terms,
    collect_like_summands,
    down,
    indexed,
    powered,
    scale_term,
    structural_equal,
    sym,
    term_of,
    up,
    used_index_letters,
)

# ---------------------------------------------------------------------------
# hypothesis generators over the model


@st.composite
def index_refs(draw):
    return IndexRef(
        draw(st.sampled_from(["up", "down"])),
        draw(st.sampled_from(["a", "b", "mu", "nu", "alpha"])),
    )


@st.composite
def factors(draw, depth=0):
    name = draw(st.sampled_from(["a", "b", "X", "eps", "Q"]))
    ornaments = ()
    if depth == 0 and draw(st.booleans()):
        ornaments = tuple(
            draw(st.lists(st.sampled_from(["bar", "tilde", 2]), max_size=2))
        )
    if draw(st.booleans()):
        return Factor(Stem(name, ornaments), exponent=draw(st.integers(1, 5)))
    return Factor(
        Stem(name, ornaments), indices=tuple(draw(st.lists(index_refs(), max_size=3)))
    )


@st.composite
def summands(draw):
    coeff = Fraction(draw(st.integers(-6, 6)), draw(st.integers(1, 6)))
    return Summand(coeff, tuple(draw(st.lists(factors(), max_size=4))))


@st.composite
def terms(draw):
    return Term(tuple(draw(st.lists(summands(), max_size=5))))


# ---------------------------------------------------------------------------
# model invariants


def test_factor_shape_is_exclusive():
    with pytest.raises(ValueError):
        Factor(Stem("X"), exponent=2, indices=(down("a"),))
    with pytest.raises(ValueError):
        Factor(Stem("X"))
    with pytest.raises(ValueError):
        Factor(Stem("X"), exponent=0)


def test_stem_and_index_validation():
    with pytest.raises(ValueError):
        Stem("")
    with pytest.raises(ValueError):
        IndexRef("sideways", "a")
    with pytest.raises(ValueError):
        IndexRef("up", "")


def test_coefficients_normalize_exactly():
    s = Summand(Fraction(4, 6))
    assert s.coefficient == Fraction(2, 3)
    assert s.coefficient.denominator == 3


@given(st.integers(-50, 50).filter(bool), st.integers(1, 50), st.integers(-50, 50).filter(bool))
def test_rational_arithmetic_is_exact(p, q, r):
    x = Fraction(p, q)
    assert x * (1 / x) == 1
    assert Fraction(p * r, q * r) == x  # normalization idempotent


# ---------------------------------------------------------------------------
# add / scale


def test_add_terms_concatenates_in_order():
    t = add_terms(term_of(Summand(2, (sym("a"),))), term_of(Summand(3, (sym("b"),))))
    assert [s.coefficient for s in t.summands] == [2, 3]
    assert [s.factors[0].stem.symbol for s in t.summands] == ["a", "b"]


def test_add_terms_identity():
    t = term_of(Summand(5, (sym("a"),)))
    assert add_terms(Term(), t) == t
    assert add_terms(t, Term()) == t


def test_add_terms_never_cancels():
    t = add_terms(term_of(Summand(1, (sym("a"),))), term_of(Summand(-1, (sym("a"),))))
    assert len(t.summands) == 2


def test_scale_term_exact():
    t = term_of(Summand(2, (sym("a"),)), Summand(3, (sym("b"),)))
    scaled = scale_term(t, Fraction(1, 2))
    assert [s.coefficient for s in scaled.summands] == [1, Fraction(3, 2)]


def test_scale_term_identity_and_zero():
    t = term_of(Summand(Fraction(2, 3), (sym("a"),)))
    assert scale_term(t, 1) == t
    zeroed = scale_term(t, 0)
    assert len(zeroed.summands) == 1 and zeroed.summands[0].coefficient == 0


def test_scale_minus_seven_halves_by_minus_two():
    # oracle: (-7/2) * (-2) = 7, computed by hand with exact rationals
    t = term_of(Summand(Fraction(-7, 2), (powered("e", 4),)))
    assert scale_term(t, -2).summands[0].coefficient == 7


# ---------------------------------------------------------------------------
# collect_like_summands


def test_collect_merges_like():
    t = term_of(Summand(1, (sym("a"),)), Summand(1, (sym("a"),)))
    out = collect_like_summands(t)
    assert len(out.summands) == 1 and out.summands[0].coefficient == 2


def test_collect_cancels_exactly():
    t = term_of(Summand(1, (sym("a"),)), Summand(-1, (sym("a"),)))
    assert collect_like_summands(t) == Term()


def test_collect_respects_factor_order():
    ab = Summand(1, (sym("a"), sym("b")))
    ba = Summand(1, (sym("b"), sym("a")))
    assert collect_like_summands(term_of(ab, ba)) == term_of(ab, ba)


def brute_force_group(t):
    # independent oracle: pair each distinct factor sequence with the sum of
    # coefficients at every position it occurs, in first-occurrence order
    seen = []
    for s in t.summands:
        if s.factors not in [f for f, _ in seen]:
            total = sum(x.coefficient for x in t.summands if x.factors == s.factors)
            seen.append((s.factors, total))
    return [(f, c) for f, c in seen if c != 0]


@given(terms())
@settings(max_examples=150)
def test_collect_matches_grouping_oracle(t):
    out = collect_like_summands(t)
    assert [(s.factors, s.coefficient) for s in out.summands] == brute_force_group(t)


@given(terms())
@settings(max_examples=80)
def test_collect_is_idempotent(t):
    once = collect_like_summands(t)
    assert collect_like_summands(once) == once


# ---------------------------------------------------------------------------
# used_index_letters


def test_used_letters_of_epsilon_pair():
    s = Summand(
        1,
        (
            indexed("eps", (down("i"), down("j"), down("k"))),
            indexed("eps", (down("i"), down("m"), down("n"))),
        ),
    )
    assert used_index_letters(s) == {"i", "j", "k", "m", "n"}


def test_used_letters_of_pure_number():
    assert used_index_letters(Summand(5)) == set()


def test_used_letters_sees_through_ornaments():
    # derivative factor: stem del carrying the indexed field as ornament,
    # plus its own index
    f_munu = indexed("F", (down("mu"), down("nu")))
    del_factor = indexed("del", (down("rho"),), ornaments=(f_munu,))
    assert used_index_letters(Summand(1, (del_factor,))) == {"rho", "mu", "nu"}


def test_used_letters_sees_into_groups():
    orn = OrnamentGroup(("bar", up("sigma")))
    f = Factor(Stem("u", (orn,)), exponent=1)
    assert used_index_letters(Summand(1, (f,))) == {"sigma"}


# ---------------------------------------------------------------------------
# structural_equal


def test_structural_equal_basics():
    assert structural_equal(indexed("a", (down("mu"),)), indexed("a", (down("mu"),)))
    assert not structural_equal(indexed("a", (down("mu"),)), indexed("a", (up("mu"),)))


def test_powered_vs_empty_indexed_differ():
    assert not structural_equal(powered("X", 2), indexed("X", ()))
    assert not structural_equal(powered("X", 1), indexed("X", ()))


def test_structural_equal_numbers():
    assert structural_equal(Fraction(2, 1), 2)
    assert not structural_equal(Fraction(1, 2), 2)


@given(factors(), factors(), factors())
@settings(max_examples=150)
def test_structural_equal_is_equivalence(x, y, z):
    assert structural_equal(x, x)
    assert structural_equal(x, y) == structural_equal(y, x)
    if structural_equal(x, y) and structural_equal(y, z):
        assert structural_equal(x, z)


@given(terms())
@settings(max_examples=60)
def test_no_operation_reorders_factors(t):
    for op in (lambda x: add_terms(x, Term()), lambda x: scale_term(x, 3), collect_like_summands):
        out = op(t)
        originals = {s.factors for s in t.summands}
        for s in out.summands:
            assert s.factors in originals
