"""Exact-arithmetic term model: sums of coefficient-weighted ordered factor sequences.

A Term is an ordered sum of Summands; a Summand is an exact rational
coefficient times an ordered sequence of Factors; a Factor is a Stem (symbol
plus ornaments) carrying either an integer exponent or a list of
variance-tagged tensor indices -- never both, since an expression like
(C_abc)^3 has no meaning.

Nothing here simplifies anything behind your back.  Factors never commute,
like summands are never merged, zero coefficients are never dropped -- until
you ask for it by calling collect_like_summands.  Explicitness is the point:
the ways systems silently "canonicalize" are exactly what makes step-by-step
calculation steering impossible.

All values are immutable after construction and safe to share across threads.
Coefficients are fractions.Fraction throughout; no floats anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Union

UP = "up"
DOWN = "down"

# index letters are stored spelled out; renderers map them to glyphs
LATIN_LETTERS = tuple("abcdefghijklmnopqrstuvwxyz")
GREEK_LETTER_NAMES = (
    "alpha", "beta", "gamma", "delta", "epsilon", "zeta", "eta", "theta",
    "iota", "kappa", "lambda", "mu", "nu", "xi", "pi", "rho", "sigma",
    "tau", "upsilon", "phi", "chi", "psi", "omega",
)
GREEK_LETTER_NAMES_UPPER = (
    "Gamma", "Delta", "Theta", "Lambda", "Xi", "Pi", "Sigma", "Upsilon",
    "Phi", "Psi", "Omega",
)


@dataclass(frozen=True)
class IndexRef:
    """One tensor index slot: contravariant ("up") or covariant ("down"), plus a name.

    Greek names are stored spelled out (mu, nu, alpha, ...); renderers map
    them to glyphs.
    """

    variance: str
    name: str

    def __post_init__(self) -> None:
        if self.variance not in (UP, DOWN):
            raise ValueError("variance must be 'up' or 'down', got %r" % (self.variance,))
        if not self.name:
            raise ValueError("index name must be nonempty")


def up(name: str) -> IndexRef:
    return IndexRef(UP, name)


def down(name: str) -> IndexRef:
    return IndexRef(DOWN, name)


@dataclass(frozen=True)
class OrnamentGroup:
    """A sequence of ornament values grouped by parse-time separators."""

    items: tuple

    def __post_init__(self) -> None:
        object.__setattr__(self, "items", tuple(self.items))


# An ornament tree node: an atom (symbol or integer), an index slot, a whole
# nested factor, or a separator group of further ornaments.
Ornament = Union[str, int, IndexRef, "Factor", OrnamentGroup]


@dataclass(frozen=True)
class Stem:
    """The head of a factor: a symbol plus symbol-specific ornaments."""

    symbol: str
    ornaments: tuple = ()

    def __post_init__(self) -> None:
        if not self.symbol:
            raise ValueError("stem symbol must be nonempty")
        object.__setattr__(self, "ornaments", tuple(self.ornaments))


@dataclass(frozen=True)
class Factor:
    """A stem with exactly one shape: Powered (exponent) or Indexed (index list).

    A bare symbol is Powered with exponent 1, so `e` and `e**4` share a shape.
    Indexed with an empty tuple is a distinct shape reserved for symbols
    declared index-carrying; the two never compare equal.
    """

    stem: Stem
    exponent: int | None = None
    indices: tuple | None = None

    def __post_init__(self) -> None:
        if (self.exponent is None) == (self.indices is None):
            raise ValueError("factor carries either an exponent or indices, not both")
        if self.exponent is not None and self.exponent < 1:
            raise ValueError("exponent must be >= 1")
        if self.indices is not None:
            object.__setattr__(self, "indices", tuple(self.indices))

    @property
    def is_indexed(self) -> bool:
        return self.indices is not None


def sym(name: str, ornaments: Iterable = ()) -> Factor:
    """A bare symbol factor (exponent 1)."""
    return Factor(Stem(name, tuple(ornaments)), exponent=1)


def powered(name: str, exponent: int, ornaments: Iterable = ()) -> Factor:
    return Factor(Stem(name, tuple(ornaments)), exponent=exponent)


def indexed(name: str, indices: Iterable[IndexRef], ornaments: Iterable = ()) -> Factor:
    return Factor(Stem(name, tuple(ornaments)), indices=tuple(indices))


@dataclass(frozen=True)
class Summand:
    """coefficient * factor_1 ... factor_n; empty factors means a pure number."""

    coefficient: Fraction
    factors: tuple = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "coefficient", Fraction(self.coefficient))
        object.__setattr__(self, "factors", tuple(self.factors))


@dataclass(frozen=True)
class Term:
    """An ordered sum of summands.  No invariants are imposed automatically:
    zero coefficients and like summands stay until explicitly collected."""

    summands: tuple = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "summands", tuple(self.summands))


def term_of(*summands: Summand) -> Term:
    return Term(tuple(summands))


# ---------------------------------------------------------------------------
# operations


def add_terms(t1: Term, t2: Term) -> Term:
    """Concatenate summand sequences, t1 first.  Never cancels anything."""
    return Term(t1.summands + t2.summands)


def scale_term(t: Term, c) -> Term:
    """Multiply every coefficient by c, exactly.  c=0 keeps the summands."""
    c = Fraction(c)
    return Term(tuple(Summand(s.coefficient * c, s.factors) for s in t.summands))


def collect_like_summands(t: Term) -> Term:
    """Merge summands with structurally equal factor sequences; drop exact zeros.

    First-occurrence order is kept.  Factor order within a summand is
    significant (noncommuting), so `a b` and `b a` never merge.
    """
    totals: dict = {}
    order: list = []
    for s in t.summands:
        if s.factors in totals:
            totals[s.factors] += s.coefficient
        else:
            totals[s.factors] = s.coefficient
            order.append(s.factors)
    return Term(tuple(Summand(totals[fs], fs) for fs in order if totals[fs] != 0))


def used_index_letters(s: Summand) -> set:
    """Every index name occurring anywhere in the summand, ornaments included."""
    names: set = set()
    for f in s.factors:
        _collect_factor_indices(f, names)
    return names


def _collect_factor_indices(f: Factor, names: set) -> None:
    if f.indices:
        for ix in f.indices:
            names.add(ix.name)
    for orn in f.stem.ornaments:
        _collect_ornament_indices(orn, names)


def _collect_ornament_indices(orn, names: set) -> None:
    if isinstance(orn, IndexRef):
        names.add(orn.name)
    elif isinstance(orn, Factor):
        _collect_factor_indices(orn, names)
    elif isinstance(orn, OrnamentGroup):
        for item in orn.items:
            _collect_ornament_indices(item, names)
    # str / int atoms carry no indices


def structural_equal(a, b) -> bool:
    """Deep structural equality over all domain values.

    Frozen dataclasses compare fieldwise, tuples elementwise, Fractions
    exactly; shape mismatches (Powered(2) vs Indexed(())) are unequal by
    construction.  This is the relation jokers are held to and the one
    collect_like_summands groups by.
    """
    if type(a) is not type(b) and not (
        isinstance(a, (int, Fraction)) and isinstance(b, (int, Fraction))
    ):
        return False
    return a == b
