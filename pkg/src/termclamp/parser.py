"""Two-stage ASCII term parser.

Stage one tokenizes, treating a bracket-delimited ornament block as a single
token: '[' immediately after a symbol is consumed whole to its matching ']'
(nesting allowed), which a character-class lexer alone cannot do.  Stage two
is a recursive-descent parse of the grammar

    term        := signed_summand (('+'|'-') summand)*
    summand     := [coefficient] factor+ | coefficient
    coefficient := INTEGER ['/' INTEGER]
    factor      := SYMBOL [ORNAMENT_BLOCK] ('**' INTEGER | index*)
    index       := ('^'|'_') SYMBOL

Whitespace separates factors; juxtaposition without it is an error, which
keeps multi-letter symbols unambiguous.  A factor takes an exponent or
indices, never both.  Ornament blocks are dispatched by stem symbol to
registered parser hooks; unregistered symbols get the default parser, which
splits on ';' then ',' and reads each piece as a symbol, an integer, or an
index-decorated symbol.

Extended mode (used by rule files) additionally lexes ?jokers, '@' for
as-patterns, '(' ')' and '...'.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from .matcher import DEFAULT_CONFIG, Extension, Joker, MatchConfig, as_pattern
from .terms import (
    DOWN,
    UP,
    Factor,
    IndexRef,
    OrnamentGroup,
    Stem,
    Summand,
    Term,
)

SYMBOL = "SYMBOL"
INTEGER = "INTEGER"
PLUS = "PLUS"
MINUS = "MINUS"
SLASH = "SLASH"
DOUBLESTAR = "DOUBLESTAR"
CARET = "CARET"
UNDERSCORE = "UNDERSCORE"
ORNAMENT_BLOCK = "ORNAMENT_BLOCK"
# extended mode only
AT = "AT"
LPAREN = "LPAREN"
RPAREN = "RPAREN"
ELLIPSIS = "ELLIPSIS"

_PUNCT = {
    "+": PLUS,
    "-": MINUS,
    "/": SLASH,
    "^": CARET,
    "_": UNDERSCORE,
}
_PUNCT_EXTENDED = {
    "@": AT,
    "(": LPAREN,
    ")": RPAREN,
}


class ParseError(Exception):
    """Syntax or lexical error carrying a 1-based line/column position."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__("%s (line %d, column %d)" % (message, line, column))
        self.reason = message
        self.line = line
        self.column = column


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    column: int
    spaced: bool  # whitespace (or start of input) immediately before


def tokenize(text: str, extended: bool = False) -> list[Token]:
    """Stage one.  Ornament blocks arrive whole; everything else is flat."""
    tokens: list[Token] = []
    i = 0
    line, col = 1, 1
    spaced = True

    def advance(k: int = 1) -> None:
        nonlocal i, line, col
        for _ in range(k):
            if text[i] == "\n":
                line += 1
                col = 1
            else:
                col += 1
            i += 1

    while i < len(text):
        ch = text[i]
        if ch in " \t\r\n":
            advance()
            spaced = True
            continue
        tok_line, tok_col = line, col
        if ch.isalpha() or (extended and ch == "?"):
            start = i
            if ch == "?":
                advance()
                if i >= len(text) or not text[i].isalpha():
                    raise ParseError("joker marker '?' needs a name", tok_line, tok_col)
            while i < len(text) and (text[i].isalpha() or text[i].isdigit()):
                advance()
            tokens.append(Token(SYMBOL, text[start:i], tok_line, tok_col, spaced))
            spaced = False
            if i < len(text) and text[i] == "[":
                blk_line, blk_col = line, col
                open_positions = [(line, col)]
                advance()
                blk_start = i
                while i < len(text) and open_positions:
                    if text[i] == "[":
                        open_positions.append((line, col))
                    elif text[i] == "]":
                        open_positions.pop()
                        if not open_positions:
                            break
                    advance()
                if open_positions:
                    bad_line, bad_col = open_positions[-1]
                    raise ParseError("unbalanced ornament bracket '['", bad_line, bad_col)
                inner = text[blk_start:i]
                advance()  # past the closing ']'
                tokens.append(Token(ORNAMENT_BLOCK, inner, blk_line, blk_col, False))
            continue
        if ch.isdigit():
            start = i
            while i < len(text) and text[i].isdigit():
                advance()
            tokens.append(Token(INTEGER, text[start:i], tok_line, tok_col, spaced))
            spaced = False
            continue
        if ch == "*":
            if i + 1 < len(text) and text[i + 1] == "*":
                advance(2)
                tokens.append(Token(DOUBLESTAR, "**", tok_line, tok_col, spaced))
                spaced = False
                continue
            raise ParseError("single '*' is not an operator; exponents use '**'", tok_line, tok_col)
        if ch in _PUNCT:
            advance()
            tokens.append(Token(_PUNCT[ch], ch, tok_line, tok_col, spaced))
            spaced = False
            continue
        if extended and ch in _PUNCT_EXTENDED:
            advance()
            tokens.append(Token(_PUNCT_EXTENDED[ch], ch, tok_line, tok_col, spaced))
            spaced = False
            continue
        if extended and ch == ".":
            if text[i:i + 3] == "...":
                advance(3)
                tokens.append(Token(ELLIPSIS, "...", tok_line, tok_col, spaced))
                spaced = False
                continue
            raise ParseError("expected '...'", tok_line, tok_col)
        if ch == "[":
            raise ParseError("ornament block must directly follow a symbol", tok_line, tok_col)
        if ch == "]":
            raise ParseError("unmatched ']'", tok_line, tok_col)
        raise ParseError("illegal character %r" % ch, tok_line, tok_col)
    return tokens


class TokenCursor:
    """Stage-two view over the token stream, with positioned errors."""

    def __init__(self, tokens: list[Token], source: str = ""):
        self.tokens = tokens
        self.pos = 0
        self.source = source

    @property
    def at_end(self) -> bool:
        return self.pos >= len(self.tokens)

    def peek(self, offset: int = 0) -> Token | None:
        index = self.pos + offset
        return self.tokens[index] if index < len(self.tokens) else None

    def take(self) -> Token:
        tok = self.peek()
        if tok is None:
            self.fail("unexpected end of input")
        self.pos += 1
        return tok

    def expect(self, kind: str, what: str = "") -> Token:
        tok = self.peek()
        if tok is None or tok.kind != kind:
            self.fail("expected %s" % (what or kind.lower()))
        self.pos += 1
        return tok

    def fail(self, message: str) -> None:
        tok = self.peek()
        if tok is not None:
            raise ParseError(message, tok.line, tok.column)
        if self.tokens:
            last = self.tokens[-1]
            raise ParseError(message, last.line, last.column + len(last.text))
        raise ParseError(message, 1, 1)


# ---------------------------------------------------------------------------
# ornament registry: parse hooks, render hooks, display aliases -- one entry
# per symbol, both directions


class RegistryError(Exception):
    pass


# parse hook: (block_text, registry, (line, column)) -> tuple of ornaments
OrnamentParser = Callable[[str, "SymbolRegistry", tuple], tuple]


class SymbolRegistry:
    """Symbol-specific behavior: ornament parsers, render hooks, display aliases.

    Immutable by convention once a session starts; registration is for setup
    time.  Duplicate registration is an error; replacing is a separate,
    explicit call.
    """

    def __init__(self, default_parser: OrnamentParser | None = None):
        self._parsers: dict[str, OrnamentParser] = {}
        self._render_hooks: dict[tuple, Callable] = {}
        self._aliases: dict[tuple, str] = {}
        self.default_parser = default_parser or default_ornament_parser

    def register_ornament_parser(self, symbol: str, hook: OrnamentParser) -> "SymbolRegistry":
        if symbol in self._parsers:
            raise RegistryError(
                "ornament parser for %r already registered; use replace_ornament_parser" % symbol
            )
        self._parsers[symbol] = hook
        return self

    def replace_ornament_parser(self, symbol: str, hook: OrnamentParser) -> "SymbolRegistry":
        self._parsers[symbol] = hook
        return self

    def ornament_parser(self, symbol: str) -> OrnamentParser:
        return self._parsers.get(symbol, self.default_parser)

    def register_render_hook(self, symbol: str, fmt: str, hook: Callable) -> "SymbolRegistry":
        key = (symbol, fmt)
        if key in self._render_hooks:
            raise RegistryError("render hook for %r/%s already registered" % (symbol, fmt))
        self._render_hooks[key] = hook
        return self

    def render_hook(self, symbol: str, fmt: str):
        return self._render_hooks.get((symbol, fmt))

    def register_display_alias(self, symbol: str, fmt: str, text: str) -> "SymbolRegistry":
        self._aliases[(symbol, fmt)] = text
        return self

    def display_alias(self, symbol: str, fmt: str) -> str | None:
        return self._aliases.get((symbol, fmt))


def register_ornament_parser(registry: SymbolRegistry, symbol: str, hook: OrnamentParser) -> SymbolRegistry:
    return registry.register_ornament_parser(symbol, hook)


# ---------------------------------------------------------------------------
# default and single-factor ornament parsers


def _split_top_level(text: str, sep: str) -> list[str]:
    parts = []
    depth = 0
    current = []
    for ch in text:
        if ch == "[":
            depth += 1
        elif ch == "]":
            depth -= 1
        if ch == sep and depth == 0:
            parts.append("".join(current))
            current = []
        else:
            current.append(ch)
    parts.append("".join(current))
    return parts


_PIECE_INDEX = re.compile(r"([_^])([A-Za-z][A-Za-z0-9]*|[0-9]+)")


def _parse_piece(piece: str):
    piece = piece.strip()
    if re.fullmatch(r"[0-9]+", piece):
        return int(piece)
    if re.fullmatch(r"[A-Za-z][A-Za-z0-9]*", piece):
        return piece
    head = re.match(r"[A-Za-z][A-Za-z0-9]*", piece)
    if head:
        rest = piece[head.end():]
        markers = _PIECE_INDEX.findall(rest)
        if markers and "".join(m + n for m, n in markers) == rest:
            indices = tuple(
                IndexRef(UP if marker == "^" else DOWN, name) for marker, name in markers
            )
            return Factor(Stem(head.group(0)), indices=indices)
    return piece  # well-formed blocks never error: opaque pieces stay verbatim


def default_ornament_parser(block_text: str, registry: SymbolRegistry, origin: tuple) -> tuple:
    """';'-separated groups of ','-separated pieces, e.g. "bar,mu;p_1"."""
    groups = []
    for group_text in _split_top_level(block_text, ";"):
        pieces = tuple(_parse_piece(p) for p in _split_top_level(group_text, ","))
        groups.append(OrnamentGroup(pieces))
    return tuple(groups)


def single_factor_ornament_parser(block_text: str, registry: SymbolRegistry, origin: tuple) -> tuple:
    """Parse the whole block as one factor in term syntax (for derivative-style
    symbols whose ornament is the thing acted on)."""
    cursor = TokenCursor(tokenize(block_text), block_text)
    factor = _parse_factor(cursor, registry)
    if not cursor.at_end:
        cursor.fail("ornament block must hold exactly one factor")
    return (factor,)


# ---------------------------------------------------------------------------
# stage two


def parse_coefficient(cursor: TokenCursor) -> Fraction:
    numerator = int(cursor.expect(INTEGER, "an integer").text)
    tok = cursor.peek()
    if tok is not None and tok.kind == SLASH:
        cursor.take()
        denom_tok = cursor.expect(INTEGER, "a denominator")
        denominator = int(denom_tok.text)
        if denominator == 0:
            raise ParseError("zero denominator", denom_tok.line, denom_tok.column)
        return Fraction(numerator, denominator)
    return Fraction(numerator)


def _parse_factor(cursor: TokenCursor, registry: SymbolRegistry,
                  pattern_mode: bool = False, config: MatchConfig = DEFAULT_CONFIG):
    stem_tok = cursor.expect(SYMBOL, "a factor symbol")
    ornaments: tuple = ()
    tok = cursor.peek()
    if tok is not None and tok.kind == ORNAMENT_BLOCK:
        cursor.take()
        hook = registry.ornament_parser(stem_tok.text)
        try:
            ornaments = tuple(hook(tok.text, registry, (tok.line, tok.column)))
        except ParseError as exc:
            # re-anchor hook errors at the block's own position
            raise ParseError("in ornament of %r: %s" % (stem_tok.text, exc.reason),
                             tok.line, tok.column) from exc
    stem = Stem(stem_tok.text, ornaments)

    tok = cursor.peek()
    if tok is not None and tok.kind == DOUBLESTAR and not tok.spaced:
        cursor.take()
        exp_tok = cursor.expect(INTEGER, "an exponent")
        if exp_tok.spaced:
            cursor.fail("exponent must follow '**' without whitespace")
        exponent = int(exp_tok.text)
        if exponent < 1:
            raise ParseError("exponent must be >= 1", exp_tok.line, exp_tok.column)
        nxt = cursor.peek()
        if nxt is not None and nxt.kind in (CARET, UNDERSCORE) and not nxt.spaced:
            raise ParseError(
                "a factor takes an exponent or indices, never both", nxt.line, nxt.column
            )
        return Factor(stem, exponent=exponent)

    if tok is not None and tok.kind in (CARET, UNDERSCORE) and not tok.spaced:
        indices = []
        while True:
            tok = cursor.peek()
            if tok is None or tok.kind not in (CARET, UNDERSCORE) or tok.spaced:
                break
            marker = cursor.take()
            name_tok = cursor.expect(SYMBOL, "an index name")
            if name_tok.spaced:
                cursor.fail("index name must follow its marker without whitespace")
            indices.append(IndexRef(UP if marker.kind == CARET else DOWN, name_tok.text))
        nxt = cursor.peek()
        if nxt is not None and nxt.kind == DOUBLESTAR and not nxt.spaced:
            raise ParseError(
                "a factor takes an exponent or indices, never both", nxt.line, nxt.column
            )
        return Factor(stem, indices=tuple(indices))

    return Factor(stem, exponent=1)


def parse_factor_pattern(cursor: TokenCursor, registry: SymbolRegistry,
                          config: MatchConfig = DEFAULT_CONFIG,
                          allow_as_pattern: bool = True):
    """A factor-level pattern: ?j, ?j@FACTOR, or a factor whose slots may hold jokers."""
    tok = cursor.peek()
    if tok is not None and tok.kind == SYMBOL and config.is_joker_name(tok.text):
        nxt = cursor.peek(1)
        if nxt is not None and nxt.kind == AT and not nxt.spaced:
            if not allow_as_pattern:
                raise ParseError("as-patterns are not allowed here", nxt.line, nxt.column)
            cursor.take()
            cursor.take()
            sub = parse_factor_pattern(cursor, registry, config, allow_as_pattern)
            return as_pattern(Joker(tok.text), sub, config)
        # a lone joker at factor level; indices after it would be ambiguous
        nxt = cursor.peek(1)
        if nxt is not None and nxt.kind in (CARET, UNDERSCORE, DOUBLESTAR) and not nxt.spaced:
            raise ParseError(
                "a whole-factor joker cannot carry indices or an exponent; "
                "put the joker in the index slot instead", nxt.line, nxt.column
            )
        cursor.take()
        return Joker(tok.text)
    return _parse_factor(cursor, registry, pattern_mode=True, config=config)


def _factor_starts(tok: Token | None, config: MatchConfig | None = None) -> bool:
    return tok is not None and tok.kind == SYMBOL


def _parse_summand(cursor: TokenCursor, registry: SymbolRegistry, sign: int) -> Summand:
    coefficient = None
    tok = cursor.peek()
    if tok is not None and tok.kind == INTEGER:
        coefficient = parse_coefficient(cursor)
    factors = []
    while _factor_starts(cursor.peek()):
        tok = cursor.peek()
        if (factors or coefficient is not None) and not tok.spaced:
            raise ParseError("factors must be separated by whitespace", tok.line, tok.column)
        factors.append(_parse_factor(cursor, registry))
    if coefficient is None and not factors:
        cursor.fail("expected a coefficient or a factor")
    if coefficient is None:
        coefficient = Fraction(1)
    return Summand(sign * coefficient, tuple(factors))


def parse_term(text: str, registry: SymbolRegistry | None = None) -> Term:
    """Parse ASCII term syntax into a Term.  Deterministic; errors carry positions."""
    registry = registry or SymbolRegistry()
    cursor = TokenCursor(tokenize(text), text)
    if cursor.at_end:
        raise ParseError("empty input", 1, 1)
    sign = 1
    tok = cursor.peek()
    if tok.kind == MINUS:
        cursor.take()
        sign = -1
    summands = [_parse_summand(cursor, registry, sign)]
    while not cursor.at_end:
        tok = cursor.take()
        if tok.kind == PLUS:
            sign = 1
        elif tok.kind == MINUS:
            sign = -1
        else:
            raise ParseError("expected '+' or '-' between summands", tok.line, tok.column)
        summands.append(_parse_summand(cursor, registry, sign))
    return Term(tuple(summands))
