"""Interactive symbolic term-rewriting workbench.

The pieces, bottom up: a backtracking choice engine (amb), an exact-rational
term model (terms), a nondeterministic sequence-of-factors pattern matcher
(matcher), calculation rules with substitution templates and silent-index
generation (rules), an ASCII term parser with pluggable ornament syntax
(parser), ASCII/TeX/MathML renderers with match highlighting (render), and an
HTTP/CLI session layer for step-by-step calculation steering (service, cli).
"""

from .amb import EnumerationBudget, all_values, choose, either, fail
from .matcher import Joker, MatchCandidate, SegmentJoker, Sofpa, as_pattern, enumerate_candidates
from .parser import ParseError, SymbolRegistry, parse_term, tokenize
from .render import render, render_candidate
from .rules import SofpaRule, apply_rule_at, enumerate_rule_sites, parse_rules, vary_leibniz
from .terms import Factor, IndexRef, Stem, Summand, Term

__all__ = [
    "EnumerationBudget", "all_values", "choose", "either", "fail",
    "Joker", "MatchCandidate", "SegmentJoker", "Sofpa", "as_pattern", "enumerate_candidates",
    "ParseError", "SymbolRegistry", "parse_term", "tokenize",
    "render", "render_candidate",
    "SofpaRule", "apply_rule_at", "enumerate_rule_sites", "parse_rules", "vary_leibniz",
    "Factor", "IndexRef", "Stem", "Summand", "Term",
]

__version__ = "0.1.0"
