"""Sofpa matching: enumerate every way fixed-length chains of factor patterns
cover non-overlapping consecutive stretches of a summand's factor sequence.

A sofpa (sequences-of-factors pattern) is a list of chains; each chain is a
fixed-length run of factor-level patterns.  Chains must land left to right,
each starting after the previous one ends, with arbitrary gaps between them.
Every admissible placement becomes one MatchCandidate: a segmentation of the
input into Between and Matched spans plus the joker bindings the placement
forced.

Patterns are domain-value-shaped trees.  Anywhere a value could sit, the
pattern may instead hold:

  * a Joker -- matches any value, repeated occurrences must match
    structurally equal values;
  * a marker-prefixed string (default "?") in a symbol or index-name slot,
    shorthand for a joker over that string;
  * a SegmentJoker inside an index list or ornament group -- matches a
    sub-sequence of arbitrary length, splits tried shortest first;
  * an Extension -- an arbitrary pure hook from (value, bindings) to a stream
    of updated bindings; as_pattern is built from this.

Matching runs inside the choice engine, so enumeration is depth-first and
deterministic.  Failure is silent: no match, no candidates.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping

from .amb import EnumerationBudget, EnumerationResult, all_values, choose, fail
from .terms import Factor, IndexRef, OrnamentGroup, Stem, Summand, structural_equal

DEFAULT_JOKER_MARKER = "?"


@dataclass(frozen=True)
class MatchConfig:
    """Matching conventions.  The joker marker is configurable; "?" is the default."""

    joker_marker: str = DEFAULT_JOKER_MARKER

    def is_joker_name(self, value) -> bool:
        return (
            isinstance(value, str)
            and value.startswith(self.joker_marker)
            and len(value) > len(self.joker_marker)
        )


DEFAULT_CONFIG = MatchConfig()


@dataclass(frozen=True)
class Joker:
    """A pattern variable.  The name carries the marker, e.g. "?a"."""

    name: str

    def __post_init__(self) -> None:
        if not self.name:
            raise ValueError("joker name must be nonempty")


@dataclass(frozen=True)
class SegmentJoker:
    """Matches a sub-sequence of arbitrary length inside a sequence; binds the tuple."""

    joker: Joker


@dataclass(frozen=True)
class Extension:
    """Hook node: hook(value, bindings) -> iterable of updated binding maps.

    Hooks must be pure (same inputs, same stream) and must not mutate their
    arguments; the matcher backtracks through them.  `jokers` declares which
    joker names the hook may bind, for highlighting and template checks.
    """

    hook: Callable[[object, dict], Iterable[Mapping]]
    jokers: tuple = ()
    label: str = ""


@dataclass(frozen=True)
class Sofpa:
    """Chains of factor patterns.  Chain lengths are fixed; segment jokers are
    only legal inside a factor's index list or ornaments, never at chain level."""

    chains: tuple

    def __post_init__(self) -> None:
        chains = tuple(tuple(chain) for chain in self.chains)
        if not chains:
            raise ValueError("a sofpa needs at least one chain")
        for chain in chains:
            if not chain:
                raise ValueError("sofpa chains must be nonempty")
            for node in chain:
                if isinstance(node, SegmentJoker):
                    raise ValueError("segment jokers are not allowed at chain level")
        object.__setattr__(self, "chains", chains)


@dataclass(frozen=True)
class Between:
    """A possibly-empty stretch of factors lying outside any matched chain."""

    factors: tuple

    def __post_init__(self) -> None:
        object.__setattr__(self, "factors", tuple(self.factors))


@dataclass(frozen=True)
class Matched:
    """A stretch matched by one chain, with the pattern node behind each factor."""

    chain_index: int
    factors: tuple
    per_factor_pattern: tuple

    def __post_init__(self) -> None:
        object.__setattr__(self, "factors", tuple(self.factors))
        object.__setattr__(self, "per_factor_pattern", tuple(self.per_factor_pattern))


@dataclass(frozen=True, eq=False)
class MatchCandidate:
    """One way the sofpa covers the input: alternating Between/Matched segments
    (Between at both ends, possibly empty) plus the bindings.  Concatenating
    the segment factor runs reproduces the input exactly."""

    segments: tuple
    bindings: dict

    def __eq__(self, other):
        return (
            isinstance(other, MatchCandidate)
            and self.segments == other.segments
            and self.bindings == other.bindings
        )

    def matched_segments(self) -> tuple:
        return tuple(s for s in self.segments if isinstance(s, Matched))

    def all_factors(self) -> tuple:
        out: tuple = ()
        for seg in self.segments:
            out += seg.factors
        return out

    def matched_spans(self) -> tuple:
        """(start, end) factor positions of each matched chain, in chain order."""
        spans = []
        pos = 0
        for seg in self.segments:
            if isinstance(seg, Matched):
                spans.append((pos, pos + len(seg.factors)))
            pos += len(seg.factors)
        return tuple(spans)


# ---------------------------------------------------------------------------
# binding helpers


def _bind(bindings: dict, name: str, value) -> dict:
    if name in bindings:
        if not structural_equal(bindings[name], value):
            fail()
        return bindings
    extended = dict(bindings)
    extended[name] = value
    return extended


# ---------------------------------------------------------------------------
# recursive structural match (runs inside an enumeration)


def match_value(pattern, value, bindings: dict, config: MatchConfig = DEFAULT_CONFIG) -> dict:
    """Match one pattern node against one value; nondeterministic.

    Yields extended bindings, one per branch.  Must be called inside a running
    enumeration (all_values); zero results just means the branch fails.
    """
    if isinstance(pattern, Joker):
        return _bind(bindings, pattern.name, value)
    if isinstance(pattern, SegmentJoker):
        raise ValueError("segment joker outside a sequence position")
    if isinstance(pattern, Extension):
        streams = tuple(dict(b) for b in pattern.hook(value, dict(bindings)))
        return dict(choose(streams))
    if isinstance(pattern, str):
        if config.is_joker_name(pattern):
            return _bind(bindings, pattern, value)
        if pattern != value:
            fail()
        return bindings
    if isinstance(pattern, (int, Fraction)) and not isinstance(pattern, bool):
        if not structural_equal(pattern, value):
            fail()
        return bindings
    if isinstance(pattern, IndexRef):
        if not isinstance(value, IndexRef) or pattern.variance != value.variance:
            fail()
        return match_value(pattern.name, value.name, bindings, config)
    if isinstance(pattern, Stem):
        if not isinstance(value, Stem):
            fail()
        bindings = match_value(pattern.symbol, value.symbol, bindings, config)
        return match_sequence(pattern.ornaments, value.ornaments, bindings, config)
    if isinstance(pattern, Factor):
        if not isinstance(value, Factor):
            fail()
        bindings = match_value(pattern.stem, value.stem, bindings, config)
        if pattern.is_indexed != value.is_indexed:
            fail()
        if pattern.is_indexed:
            return match_sequence(pattern.indices, value.indices, bindings, config)
        if pattern.exponent != value.exponent:
            fail()
        return bindings
    if isinstance(pattern, OrnamentGroup):
        if not isinstance(value, OrnamentGroup):
            fail()
        return match_sequence(pattern.items, value.items, bindings, config)
    if isinstance(pattern, Summand):
        if not isinstance(value, Summand) or pattern.coefficient != value.coefficient:
            fail()
        return match_sequence(pattern.factors, value.factors, bindings, config)
    if isinstance(pattern, tuple):
        if not isinstance(value, tuple):
            fail()
        return match_sequence(pattern, value, bindings, config)
    if not structural_equal(pattern, value):
        fail()
    return bindings


def match_sequence(patterns, values, bindings: dict, config: MatchConfig = DEFAULT_CONFIG) -> dict:
    """Elementwise sequence match with segment-joker splits, shortest first."""
    patterns = tuple(patterns)
    values = tuple(values)
    if not patterns:
        if values:
            fail()
        return bindings
    head = patterns[0]
    if isinstance(head, SegmentJoker):
        take = choose(range(len(values) + 1))
        bindings = _bind(bindings, head.joker.name, values[:take])
        return match_sequence(patterns[1:], values[take:], bindings, config)
    if not values:
        fail()
    bindings = match_value(head, values[0], bindings, config)
    return match_sequence(patterns[1:], values[1:], bindings, config)


def all_match_bindings(pattern, value, bindings: Mapping | None = None,
                       config: MatchConfig = DEFAULT_CONFIG) -> list:
    """All binding sets for one pattern/value pair, as a plain list.

    Runs its own enumeration, so it works inside or outside a running one
    (inner enumerations are isolated).
    """
    start = dict(bindings or {})
    return all_values(lambda: match_value(pattern, value, start, config)).values


# ---------------------------------------------------------------------------
# as-patterns


def as_pattern(joker, sub_pattern, config: MatchConfig = DEFAULT_CONFIG) -> Extension:
    """Match sub_pattern and, when it succeeds, also bind the whole value to joker."""
    name = joker.name if isinstance(joker, Joker) else joker

    def hook(value, bindings):
        out = []
        for b in all_match_bindings(sub_pattern, value, bindings, config):
            if name in b:
                if structural_equal(b[name], value):
                    out.append(b)
            else:
                extended = dict(b)
                extended[name] = value
                out.append(extended)
        return out

    declared = (name,) + tuple(sorted(pattern_jokers(sub_pattern, config)))
    return Extension(hook=hook, jokers=declared, label="as %s" % name)


def pattern_jokers(pattern, config: MatchConfig = DEFAULT_CONFIG) -> set:
    """Every joker name a pattern tree can bind (Extensions report what they declare)."""
    found: set = set()
    _collect_jokers(pattern, config, found)
    return found


def _collect_jokers(node, config: MatchConfig, found: set) -> None:
    if isinstance(node, Joker):
        found.add(node.name)
    elif isinstance(node, SegmentJoker):
        found.add(node.joker.name)
    elif isinstance(node, Extension):
        found.update(node.jokers)
    elif isinstance(node, str):
        if config.is_joker_name(node):
            found.add(node)
    elif isinstance(node, IndexRef):
        _collect_jokers(node.name, config, found)
    elif isinstance(node, Stem):
        _collect_jokers(node.symbol, config, found)
        for orn in node.ornaments:
            _collect_jokers(orn, config, found)
    elif isinstance(node, Factor):
        _collect_jokers(node.stem, config, found)
        if node.indices is not None:
            for ix in node.indices:
                _collect_jokers(ix, config, found)
    elif isinstance(node, OrnamentGroup):
        for item in node.items:
            _collect_jokers(item, config, found)
    elif isinstance(node, tuple):
        for item in node:
            _collect_jokers(item, config, found)


# ---------------------------------------------------------------------------
# candidate enumeration


def enumerate_candidates(sofpa: Sofpa, factors, config: MatchConfig = DEFAULT_CONFIG,
                         budget: EnumerationBudget | None = None,
                         bindings: Mapping | None = None) -> EnumerationResult:
    """All candidates, depth-first: chain 0's start ascending, then chain 1's
    (to the right of chain 0), and so on; bindings thread left to right."""
    factors = tuple(factors)
    initial = dict(bindings or {})

    def compute():
        segments = []
        current = dict(initial)
        pos = 0
        for chain_index, chain in enumerate(sofpa.chains):
            length = len(chain)
            start = choose(range(pos, len(factors) - length + 1))
            span = factors[start:start + length]
            for node, factor in zip(chain, span):
                current = match_value(node, factor, current, config)
            segments.append(Between(factors[pos:start]))
            segments.append(Matched(chain_index, span, chain))
            pos = start + length
        segments.append(Between(factors[pos:]))
        return MatchCandidate(segments=tuple(segments), bindings=dict(current))

    return all_values(compute, budget)
