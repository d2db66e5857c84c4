"""Sofpa matcher: structural matching, jokers, as-patterns, candidate enumeration.

The completeness/soundness oracle here is deliberately dumb: try every
assignment of chains to position ranges with plain loops and a tiny
deterministic matcher for literal/joker factor patterns, no choice engine
anywhere near it.
"""

import random

import pytest

from termclamp.amb import EnumerationBudget, all_values
from termclamp.matcher import (
    Between,
    Extension,
    Joker,
    Matched,
    MatchConfig,
    SegmentJoker,
    Sofpa,
    all_match_bindings,
    as_pattern,
    enumerate_candidates,
    match_value,
    pattern_jokers,
)
from termclamp.terms import down, indexed, structural_equal, sym, up

# ---------------------------------------------------------------------------
# independent oracle


def oracle_match_factor(pattern, factor, bindings):
    """Deterministic match for the generated pattern class: whole-factor jokers,
    literal factors whose index names may be jokers.  Returns bindings or None."""
    if isinstance(pattern, Joker):
        if pattern.name in bindings:
            return bindings if structural_equal(bindings[pattern.name], factor) else None
        out = dict(bindings)
        out[pattern.name] = factor
        return out
    if pattern.stem != factor.stem:
        return None
    if pattern.is_indexed != factor.is_indexed:
        return None
    if not pattern.is_indexed:
        return bindings if pattern.exponent == factor.exponent else None
    if len(pattern.indices) != len(factor.indices):
        return None
    out = dict(bindings)
    for pix, vix in zip(pattern.indices, factor.indices):
        if pix.variance != vix.variance:
            return None
        if pix.name.startswith("?"):
            if pix.name in out:
                if out[pix.name] != vix.name:
                    return None
            else:
                out[pix.name] = vix.name
        elif pix.name != vix.name:
            return None
    return out


def oracle_candidates(chains, factors):
    """Every assignment of chains to disjoint left-to-right consecutive ranges."""
    results = []

    def walk(chain_index, pos, bindings, starts):
        if chain_index == len(chains):
            results.append((tuple(starts), bindings))
            return
        chain = chains[chain_index]
        for start in range(pos, len(factors) - len(chain) + 1):
            current = bindings
            for node, factor in zip(chain, factors[start:start + len(chain)]):
                current = oracle_match_factor(node, factor, current)
                if current is None:
                    break
            if current is not None:
                walk(chain_index + 1, start + len(chain), current, starts + [start])

    walk(0, 0, {}, [])
    return results


def engine_summary(result):
    return [(c.matched_spans(), c.bindings) for c in result.values]


def oracle_summary(chains, factors):
    return [
        (tuple((s, s + len(chains[i])) for i, s in enumerate(starts)), b)
        for starts, b in oracle_candidates(chains, factors)
    ]


# ---------------------------------------------------------------------------
# match_value


def run_match(pattern, value, bindings=None):
    return all_match_bindings(pattern, value, bindings or {})


def test_literal_factor_matches_itself():
    f = indexed("a", (down("mu"),))
    assert run_match(f, f) == [{}]


def test_literal_mismatch_fails():
    assert run_match(sym("a"), sym("b")) == []
    assert run_match(indexed("a", (down("mu"),)), indexed("a", (up("mu"),))) == []


def test_joker_binds_whole_value():
    f = sym("a")
    assert run_match(Joker("?x"), f) == [{"?x": f}]


def test_joker_consistency():
    pattern = (Joker("?x"), Joker("?x"))
    assert run_match(pattern, (sym("a"), sym("a"))) == [{"?x": sym("a")}]
    assert run_match(pattern, (sym("a"), sym("b"))) == []


def test_distinct_jokers_may_share_a_value():
    pattern = (Joker("?x"), Joker("?y"))
    assert run_match(pattern, (sym("a"), sym("a"))) == [{"?x": sym("a"), "?y": sym("a")}]


def test_index_name_jokers_walk_positionally():
    pattern = indexed("eps", (down("?i"), down("?j"), down("?k")))
    value = indexed("eps", (down("i"), down("j"), down("k")))
    assert run_match(pattern, value) == [{"?i": "i", "?j": "j", "?k": "k"}]


def test_shape_mismatch_fails():
    assert run_match(indexed("X", ()), sym("X")) == []


def test_segment_joker_splits_shortest_first():
    pattern = indexed("T", (SegmentJoker(Joker("?pre")), down("k"), SegmentJoker(Joker("?post"))))
    value = indexed("T", (down("k"), down("k"), down("m")))
    results = run_match(pattern, value)
    assert results == [
        {"?pre": (), "?post": (down("k"), down("m"))},
        {"?pre": (down("k"),), "?post": (down("m"),)},
    ]


def test_joker_marker_is_configurable():
    config = MatchConfig(joker_marker="$")
    pattern = indexed("a", (down("$i"),))
    value = indexed("a", (down("x"),))
    assert all_match_bindings(pattern, value, config=config) == [{"$i": "x"}]
    # with the default marker, "$i" is just a funny literal name
    assert all_match_bindings(pattern, value) == []


def test_extension_hook_streams_bindings():
    ext = Extension(hook=lambda v, b: [dict(b, hit=v.stem.symbol)] * 2, jokers=())
    assert run_match(ext, sym("a")) == [{"hit": "a"}, {"hit": "a"}]


# ---------------------------------------------------------------------------
# as_pattern


def test_as_pattern_binds_on_success():
    pat = as_pattern(Joker("?a"), sym("a"))
    assert run_match(pat, sym("a")) == [{"?a": sym("a")}]


def test_as_pattern_fails_with_subpattern():
    pat = as_pattern(Joker("?a"), sym("a"))
    assert run_match(pat, sym("b")) == []


def test_as_pattern_composes_with_joker():
    pat = as_pattern(Joker("?x"), Joker("?y"))
    v = sym("q")
    assert run_match(pat, v) == [{"?x": v, "?y": v}]


def test_pattern_jokers_reports_extension_declarations():
    pat = as_pattern(Joker("?a"), indexed("a", (down("?mu"),)))
    assert pattern_jokers(pat) == {"?a", "?mu"}


# ---------------------------------------------------------------------------
# enumerate_candidates


def word(w):
    return sym(w)


SENTENCE = tuple(
    word(w)
    for w in "The swift small brown horse might never ever allow being shoed".split()
)


def five_letter():
    return Extension(
        hook=lambda v, b: [b] if len(v.stem.symbol) == 5 else [],
        jokers=(),
        label="5-letter word",
    )


def sentence_sofpa():
    chain = (five_letter(), five_letter(), five_letter())
    return Sofpa((chain, chain))


def triples(candidate):
    first, second = candidate.matched_segments()
    return (
        tuple(f.stem.symbol for f in first.factors),
        tuple(f.stem.symbol for f in second.factors),
    )


def test_sentence_fixture_five_candidates_in_order():
    result = enumerate_candidates(sentence_sofpa(), SENTENCE)
    assert len(result.values) == 5
    assert [triples(c) for c in result.values] == [
        (("swift", "small", "brown"), ("horse", "might", "never")),
        (("swift", "small", "brown"), ("allow", "being", "shoed")),
        (("small", "brown", "horse"), ("allow", "being", "shoed")),
        (("brown", "horse", "might"), ("allow", "being", "shoed")),
        (("horse", "might", "never"), ("allow", "being", "shoed")),
    ]


def test_single_placement_has_empty_betweens_both_ends():
    sofpa = Sofpa(((sym("a"), sym("adag")),))
    factors = (sym("a"), sym("adag"))
    result = enumerate_candidates(sofpa, factors)
    assert len(result.values) == 1
    candidate = result.values[0]
    assert candidate.segments == (
        Between(()),
        Matched(0, factors, (sym("a"), sym("adag"))),
        Between(()),
    )


def test_two_placements_in_four_factors():
    # oracle: consecutive pairs at 1-based (1,2), (2,3), (3,4); (2,3) is adag a
    # and fails, leaving two placements
    sofpa = Sofpa(((sym("a"), sym("adag")),))
    factors = (sym("a"), sym("adag"), sym("a"), sym("adag"))
    result = enumerate_candidates(sofpa, factors)
    assert [c.matched_spans() for c in result.values] == [((0, 2),), ((2, 4),)]


def test_reconstruction_invariant():
    result = enumerate_candidates(sentence_sofpa(), SENTENCE)
    for candidate in result.values:
        assert candidate.all_factors() == SENTENCE


def test_budget_truncates_candidates():
    result = enumerate_candidates(
        sentence_sofpa(), SENTENCE, budget=EnumerationBudget(max_results=2)
    )
    assert len(result.values) == 2
    assert result.truncated


def test_bindings_thread_across_chains():
    sofpa = Sofpa((
        (indexed("eps", (down("?i"), down("?j"), down("?k"))),),
        (indexed("eps", (down("?i"), down("?m"), down("?n"))),),
    ))
    factors = (
        indexed("eps", (down("i"), down("j"), down("k"))),
        sym("X"),
        indexed("eps", (down("i"), down("m"), down("n"))),
    )
    result = enumerate_candidates(sofpa, factors)
    assert len(result.values) == 1
    assert result.values[0].bindings == {
        "?i": "i", "?j": "j", "?k": "k", "?m": "m", "?n": "n",
    }
    # first index differs -> chains cannot agree on ?i
    factors_bad = (factors[0], factors[1], indexed("eps", (down("q"), down("m"), down("n"))))
    assert enumerate_candidates(sofpa, factors_bad).values == []


def test_sofpa_validation():
    with pytest.raises(ValueError):
        Sofpa(())
    with pytest.raises(ValueError):
        Sofpa(((),))
    with pytest.raises(ValueError):
        Sofpa(((SegmentJoker(Joker("?s")),),))


# ---------------------------------------------------------------------------
# oracle property


def random_instance(rng):
    symbols = ["a", "b", "c"]
    letters = ["i", "j"]

    def random_factor():
        name = rng.choice(symbols)
        if rng.random() < 0.5:
            return sym(name)
        return indexed(name, tuple(down(rng.choice(letters)) for _ in range(rng.randint(0, 2))))

    def random_pattern():
        roll = rng.random()
        if roll < 0.25:
            return Joker(rng.choice(["?x", "?y"]))
        factor = random_factor()
        if roll < 0.5 and factor.is_indexed and factor.indices:
            jokered = tuple(
                down(rng.choice(["?i", "?j"])) if rng.random() < 0.5 else ix
                for ix in factor.indices
            )
            return indexed(factor.stem.symbol, jokered)
        return factor

    factors = tuple(random_factor() for _ in range(rng.randint(0, 8)))
    chains = tuple(
        tuple(random_pattern() for _ in range(rng.randint(1, 2)))
        for _ in range(rng.randint(1, 2))
    )
    return chains, factors


def test_matcher_matches_brute_force_oracle():
    rng = random.Random(1729)
    for _ in range(300):
        chains, factors = random_instance(rng)
        engine = engine_summary(enumerate_candidates(Sofpa(chains), factors))
        assert engine == oracle_summary(chains, factors)


def test_enumeration_is_deterministic():
    rng = random.Random(7)
    chains, factors = random_instance(rng)
    while not factors:
        chains, factors = random_instance(rng)
    sofpa = Sofpa(chains)
    first = engine_summary(enumerate_candidates(sofpa, factors))
    second = engine_summary(enumerate_candidates(sofpa, factors))
    assert first == second
