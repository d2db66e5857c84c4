"""Calculation rules: a sofpa pattern, substitution templates, highlighting.

Applying a rule replaces one summand by one new summand per template.  Each
template carries a coefficient (multiplied into the original one, exactly)
and one replacement block per pattern chain.  Replacement blocks land where
their chain matched; the stretches between matches are copied verbatim.
Jokers in templates are filled from the match bindings; index-name jokers
left unbound get fresh letters from the rule's alphabet, never colliding with
a letter already in the original summand -- that is how silent summation
indices are generated.  Any other unbound joker is an error.

Rules load from a small declarative text format, one `rule NAME ... end`
block per rule; see docs/rule-format.md.  The Leibniz-style variation
operator lives here too: it is a whole-term transformation no sofpa can
express.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from .amb import EnumerationBudget
from .matcher import (
    DEFAULT_CONFIG,
    Extension,
    Joker,
    MatchCandidate,
    Matched,
    MatchConfig,
    SegmentJoker,
    Sofpa,
    enumerate_candidates,
)
from .parser import (
    ELLIPSIS,
    LPAREN,
    MINUS,
    RPAREN,
    ParseError,
    SymbolRegistry,
    TokenCursor,
    parse_coefficient,
    parse_factor_pattern,
    tokenize,
)
from .terms import (
    GREEK_LETTER_NAMES,
    LATIN_LETTERS,
    Factor,
    IndexRef,
    OrnamentGroup,
    Stem,
    Summand,
    Term,
    used_index_letters,
)

HIGHLIGHT_COLORS = ("green", "red", "blue", "yellow")

ALPHABETS = {
    "latin": LATIN_LETTERS,
    "greek": GREEK_LETTER_NAMES,
}


class RuleError(Exception):
    pass


class StaleSiteError(RuleError):
    """The term changed since this site was enumerated."""


class FreshIndexError(RuleError):
    """The fresh-letter alphabet is exhausted for a summand."""


class TemplateError(RuleError):
    """A template joker cannot be instantiated (unbound non-index joker,
    or a binding of the wrong kind for its slot)."""


@dataclass(frozen=True)
class SummandTemplate:
    """One output summand: a coefficient and one factor block per chain.
    An empty block deletes that chain's stretch."""

    coefficient: Fraction
    blocks: tuple

    def __post_init__(self) -> None:
        object.__setattr__(self, "coefficient", Fraction(self.coefficient))
        object.__setattr__(self, "blocks", tuple(tuple(b) for b in self.blocks))


@dataclass
class SofpaRule:
    name: str
    pattern: Sofpa
    subs: tuple
    highlighting: dict = field(default_factory=dict)
    description: str = ""
    fresh_alphabet: tuple = LATIN_LETTERS

    def __post_init__(self) -> None:
        self.subs = tuple(self.subs)
        chains = len(self.pattern.chains)
        for template in self.subs:
            if len(template.blocks) != chains:
                raise RuleError(
                    "rule %r: template has %d blocks for %d chains"
                    % (self.name, len(template.blocks), chains)
                )
        for joker, color in self.highlighting.items():
            if color not in HIGHLIGHT_COLORS:
                raise RuleError("rule %r: unknown highlight color %r" % (self.name, color))


@dataclass(frozen=True)
class RuleApplication:
    """History record: which rule, where, and what came out."""

    rule_name: str
    summand_index: int
    candidate: MatchCandidate
    produced: tuple

    def __post_init__(self) -> None:
        object.__setattr__(self, "produced", tuple(self.produced))


@dataclass
class SiteEnumeration:
    sites: list  # (summand_index, MatchCandidate) pairs, in order
    truncated: bool


# ---------------------------------------------------------------------------
# fresh silent indices


def _describe_summand(s: Summand) -> str:
    stems = " ".join(f.stem.symbol for f in s.factors) or str(s.coefficient)
    return "summand '%s'" % stems


def fresh_index_letter(s: Summand, alphabet, also_avoid=frozenset()) -> str:
    """First alphabet letter not used anywhere in the summand nor in also_avoid."""
    alphabet = tuple(alphabet)
    if not alphabet:
        raise ValueError("alphabet must be nonempty")
    taken = used_index_letters(s) | set(also_avoid)
    for letter in alphabet:
        if letter not in taken:
            return letter
    raise FreshIndexError(
        "no free index letter left in alphabet for %s" % _describe_summand(s)
    )


# ---------------------------------------------------------------------------
# template instantiation


def instantiate_templates(rule: SofpaRule, candidate: MatchCandidate,
                          original: Summand,
                          config: MatchConfig = DEFAULT_CONFIG) -> list:
    """One new summand per template, with bindings substituted and fresh
    letters generated for unbound index jokers."""
    out = []
    bindings = candidate.bindings
    for template in rule.subs:
        generated: dict = {}
        produced: set = set()

        def resolve_index_name(name: str) -> str:
            if name in bindings:
                value = bindings[name]
                if not isinstance(value, str):
                    raise TemplateError(
                        "rule %r: joker %s is bound to %r, not an index name"
                        % (rule.name, name, value)
                    )
                return value
            if name not in generated:
                letter = fresh_index_letter(original, rule.fresh_alphabet, produced)
                generated[name] = letter
                produced.add(letter)
            return generated[name]

        blocks = tuple(
            tuple(_substitute(node, rule, bindings, resolve_index_name, config)
                  for node in block)
            for block in template.blocks
        )
        factors: list = []
        for segment in candidate.segments:
            if isinstance(segment, Matched):
                factors.extend(blocks[segment.chain_index])
            else:
                factors.extend(segment.factors)
        out.append(Summand(original.coefficient * template.coefficient, tuple(factors)))
    return out


def _substitute(node, rule: SofpaRule, bindings: Mapping, resolve_index, config: MatchConfig):
    if isinstance(node, Joker):
        if node.name not in bindings:
            raise TemplateError(
                "rule %r: joker %s stands for a whole factor and is unbound; "
                "only index jokers may be generated fresh" % (rule.name, node.name)
            )
        value = bindings[node.name]
        if not isinstance(value, Factor):
            raise TemplateError(
                "rule %r: joker %s is bound to %r, not a factor" % (rule.name, node.name, value)
            )
        return value
    if isinstance(node, Extension):
        raise TemplateError("rule %r: extension nodes cannot appear in templates" % rule.name)
    if isinstance(node, Factor):
        symbol = node.stem.symbol
        if config.is_joker_name(symbol):
            if symbol not in bindings:
                raise TemplateError(
                    "rule %r: joker %s in a symbol slot is unbound; "
                    "only index jokers may be generated fresh" % (rule.name, symbol)
                )
            value = bindings[symbol]
            if not isinstance(value, str):
                raise TemplateError(
                    "rule %r: joker %s is bound to %r, not a symbol" % (rule.name, symbol, value)
                )
            symbol = value
        ornaments = tuple(
            _substitute_ornament(o, rule, bindings, resolve_index, config)
            for o in node.stem.ornaments
        )
        stem = Stem(symbol, ornaments)
        if node.is_indexed:
            indices: list = []
            for entry in node.indices:
                if isinstance(entry, SegmentJoker):
                    if entry.joker.name not in bindings:
                        raise TemplateError(
                            "rule %r: segment joker %s is unbound in a template"
                            % (rule.name, entry.joker.name)
                        )
                    indices.extend(bindings[entry.joker.name])
                elif isinstance(entry, Joker):
                    if entry.name not in bindings:
                        raise TemplateError(
                            "rule %r: joker %s stands for a whole index and is unbound"
                            % (rule.name, entry.name)
                        )
                    indices.append(bindings[entry.name])
                else:
                    name = entry.name
                    if config.is_joker_name(name):
                        name = resolve_index(name)
                    indices.append(IndexRef(entry.variance, name))
            return Factor(stem, indices=tuple(indices))
        return Factor(stem, exponent=node.exponent)
    raise TemplateError("rule %r: cannot substitute into template node %r" % (rule.name, node))


def _substitute_ornament(orn, rule, bindings, resolve_index, config):
    if isinstance(orn, OrnamentGroup):
        return OrnamentGroup(tuple(
            _substitute_ornament(item, rule, bindings, resolve_index, config)
            for item in orn.items
        ))
    if isinstance(orn, Factor):
        return _substitute(orn, rule, bindings, resolve_index, config)
    if isinstance(orn, IndexRef):
        name = orn.name
        if config.is_joker_name(name):
            name = resolve_index(name)
        return IndexRef(orn.variance, name)
    if isinstance(orn, str) and config.is_joker_name(orn):
        if orn not in bindings:
            raise TemplateError(
                "rule %r: ornament joker %s is unbound; only index jokers may be fresh"
                % (rule.name, orn)
            )
        return bindings[orn]
    return orn


# ---------------------------------------------------------------------------
# site enumeration and application


def enumerate_rule_sites(t: Term, rule: SofpaRule,
                         config: MatchConfig = DEFAULT_CONFIG,
                         budget: EnumerationBudget | None = None) -> SiteEnumeration:
    """(summand index, candidate) pairs: per summand in order, candidates in
    matcher order, flattened.  The budget spans the whole term."""
    sites: list = []
    truncated = False
    remaining_results = budget.max_results if budget else None
    remaining_steps = budget.max_steps if budget else None
    for index, summand in enumerate(t.summands):
        if remaining_results is not None and remaining_results <= 0:
            # full already: any further candidate means we cut something off
            probe = enumerate_candidates(
                rule.pattern, summand.factors, config,
                EnumerationBudget(max_results=1, max_steps=remaining_steps),
            )
            if probe.values or probe.truncated:
                truncated = True
                break
            continue
        if remaining_steps is not None and remaining_steps <= 0:
            truncated = True
            break
        sub_budget = None
        if remaining_results is not None or remaining_steps is not None:
            sub_budget = EnumerationBudget(
                max_results=remaining_results, max_steps=remaining_steps
            )
        result = enumerate_candidates(rule.pattern, summand.factors, config, sub_budget)
        sites.extend((index, candidate) for candidate in result.values)
        if result.truncated:
            truncated = True
            break
        if remaining_results is not None:
            remaining_results -= len(result.values)
        if remaining_steps is not None:
            remaining_steps -= result.steps
    return SiteEnumeration(sites=sites, truncated=truncated)


def apply_rule_at(t: Term, site, rule: SofpaRule,
                  config: MatchConfig = DEFAULT_CONFIG) -> Term:
    """Replace the addressed summand, in place in the summand order, by the
    instantiated templates.  Everything else is untouched; nothing is collected."""
    index, candidate = site
    if not 0 <= index < len(t.summands):
        raise RuleError("summand index %d out of range (term has %d)" % (index, len(t.summands)))
    original = t.summands[index]
    if candidate.all_factors() != original.factors:
        raise StaleSiteError(
            "candidate does not fit summand %d; the term changed since enumeration" % index
        )
    replacement = instantiate_templates(rule, candidate, original, config)
    return Term(t.summands[:index] + tuple(replacement) + t.summands[index + 1:])


def vary_leibniz(t: Term, delta_symbol: Stem) -> Term:
    """Product-rule variation of a whole term.

    Each n-factor summand expands to n summands; the k-th wraps factor k in
    the variation symbol, which carries the varied factor as its ornament.
    Factor-free summands are constants and vanish.  Expansion is left-first.
    """
    out: list = []
    for s in t.summands:
        for k in range(len(s.factors)):
            wrapped = Factor(
                Stem(delta_symbol.symbol, delta_symbol.ornaments + (s.factors[k],)),
                exponent=1,
            )
            out.append(Summand(s.coefficient, s.factors[:k] + (wrapped,) + s.factors[k + 1:]))
    return Term(tuple(out))


# ---------------------------------------------------------------------------
# rule file format (see docs/rule-format.md)


class RuleFileError(Exception):
    def __init__(self, message: str, line: int, rule: str | None = None):
        where = "line %d" % line
        if rule:
            where += ", rule %r" % rule
        super().__init__("%s (%s)" % (message, where))
        self.line = line
        self.rule = rule


_NAME_RE = re.compile(r"[A-Za-z][A-Za-z0-9_-]*$")


def _strip_comment(line: str) -> str:
    cut = line.find("#")
    return line if cut < 0 else line[:cut]


def _parse_chain_list(text: str, registry: SymbolRegistry, config: MatchConfig,
                      line_number: int, rule_name: str) -> Sofpa:
    try:
        cursor = TokenCursor(tokenize(text, extended=True), text)
        chains: list = []
        current: list = []
        while not cursor.at_end:
            tok = cursor.peek()
            if tok.kind == ELLIPSIS:
                cursor.take()
                if current:
                    chains.append(tuple(current))
                    current = []
                continue
            current.append(parse_factor_pattern(cursor, registry, config))
        if current:
            chains.append(tuple(current))
        if not chains:
            raise RuleFileError("pattern has no chains", line_number, rule_name)
        return Sofpa(tuple(chains))
    except ParseError as exc:
        raise RuleFileError("bad pattern: %s" % exc.reason, line_number, rule_name) from exc
    except ValueError as exc:
        raise RuleFileError("bad pattern: %s" % exc, line_number, rule_name) from exc


def _parse_subs_line(text: str, registry: SymbolRegistry, config: MatchConfig,
                     line_number: int, rule_name: str) -> SummandTemplate:
    try:
        cursor = TokenCursor(tokenize(text, extended=True), text)
        sign = 1
        if not cursor.at_end and cursor.peek().kind == MINUS:
            cursor.take()
            sign = -1
        coefficient = sign * parse_coefficient(cursor)
        blocks: list = []
        current: list = []
        while not cursor.at_end:
            tok = cursor.peek()
            if tok.kind == ELLIPSIS:
                cursor.take()
                blocks.append(tuple(current))
                current = []
                continue
            if tok.kind == LPAREN:
                cursor.take()
                cursor.expect(RPAREN, "')' for an empty block")
                continue  # the empty block is just its separator boundaries
            current.append(
                parse_factor_pattern(cursor, registry, config, allow_as_pattern=False)
            )
        blocks.append(tuple(current))
        return SummandTemplate(coefficient=coefficient, blocks=tuple(blocks))
    except ParseError as exc:
        raise RuleFileError("bad subs: %s" % exc.reason, line_number, rule_name) from exc


def parse_rules(text: str, registry: SymbolRegistry | None = None,
                config: MatchConfig = DEFAULT_CONFIG) -> dict:
    """Parse a rule file into an ordered {name: SofpaRule} mapping."""
    registry = registry or SymbolRegistry()
    rules: dict = {}
    name = None
    description = ""
    alphabet = LATIN_LETTERS
    pattern: Sofpa | None = None
    subs: list = []
    highlighting: dict = {}

    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw).strip()
        if not line:
            continue
        if name is None:
            if not line.startswith("rule "):
                raise RuleFileError("expected 'rule NAME'", line_number)
            candidate_name = line[len("rule "):].strip()
            if not _NAME_RE.match(candidate_name):
                raise RuleFileError("bad rule name %r" % candidate_name, line_number)
            if candidate_name in rules:
                raise RuleFileError("duplicate rule name %r" % candidate_name, line_number)
            name = candidate_name
            description = ""
            alphabet = LATIN_LETTERS
            pattern = None
            subs = []
            highlighting = {}
            continue
        if line == "end":
            if pattern is None:
                raise RuleFileError("rule has no pattern", line_number, name)
            if not subs:
                raise RuleFileError("rule has no subs", line_number, name)
            try:
                rules[name] = SofpaRule(
                    name=name,
                    pattern=pattern,
                    subs=tuple(subs),
                    highlighting=highlighting,
                    description=description,
                    fresh_alphabet=alphabet,
                )
            except RuleError as exc:
                raise RuleFileError(str(exc), line_number, name) from exc
            name = None
            continue
        key, sep, value = line.partition(":")
        if not sep:
            raise RuleFileError("expected 'key: value'", line_number, name)
        key = key.strip()
        value = value.strip()
        if key in ("desc", "description"):
            description = value
        elif key == "alphabet":
            if value not in ALPHABETS:
                raise RuleFileError(
                    "unknown alphabet %r (have: %s)" % (value, ", ".join(sorted(ALPHABETS))),
                    line_number, name,
                )
            alphabet = ALPHABETS[value]
        elif key == "pattern":
            pattern = _parse_chain_list(value, registry, config, line_number, name)
        elif key == "subs":
            subs.append(_parse_subs_line(value, registry, config, line_number, name))
        elif key == "highlight":
            parts = value.split()
            if len(parts) != 2:
                raise RuleFileError("expected 'highlight: ?joker color'", line_number, name)
            joker, color = parts
            if not config.is_joker_name(joker):
                raise RuleFileError("%r is not a joker name" % joker, line_number, name)
            if color not in HIGHLIGHT_COLORS:
                raise RuleFileError("unknown color %r" % color, line_number, name)
            highlighting[joker] = color
        else:
            raise RuleFileError("unknown key %r" % key, line_number, name)
    if name is not None:
        raise RuleFileError("rule %r is missing its 'end'" % name, len(text.splitlines()) or 1, name)
    return rules


def load_rules_file(path, registry: SymbolRegistry | None = None,
                    config: MatchConfig = DEFAULT_CONFIG) -> dict:
    with open(path, "r", encoding="utf-8") as handle:
        return parse_rules(handle.read(), registry, config)
