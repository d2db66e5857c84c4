"""Render terms and highlighted match candidates to ASCII, TeX, and MathML.

ASCII output re-parses to a structurally equal term, so it doubles as the
storage and editing format.  TeX follows fixed conventions pinned by golden
tests: \\frac for fractional coefficients, index runs grouped, an empty {}
group at every variance transition so index slots keep their order, greek
names as macros.  MathML is built as a real element tree and serialized only
at the boundary, never templated from strings.

Highlighting marks the factors a match candidate touched: guillemet markers
in ASCII (characters outside the term grammar, so highlighted output is
visibly distinct and never accidentally re-parseable), color groups in TeX,
mathcolor attributes in MathML.  Stripping the markup always yields exactly
the plain rendering.

Symbol-specific rendering goes through the same registry as ornament parsing:
a hook gets the factor and a recursion callback and owns the full factor
rendering for its symbol and format.
"""

from __future__ import annotations

import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from .matcher import MatchCandidate, Matched, pattern_jokers
from .parser import SymbolRegistry
from .terms import (
    GREEK_LETTER_NAMES,
    GREEK_LETTER_NAMES_UPPER,
    Factor,
    IndexRef,
    OrnamentGroup,
    Stem,
    Summand,
    Term,
)

ASCII = "ascii"
TEX = "tex"
MATHML = "mathml"
FORMATS = (ASCII, TEX, MATHML)

HIGHLIGHT_COLORS = ("green", "red", "blue", "yellow")

MATHML_NS = "http://www.w3.org/1998/Math/MathML"

_GREEK_GLYPHS = dict(
    zip(
        GREEK_LETTER_NAMES + GREEK_LETTER_NAMES_UPPER,
        list("αβγδεζηθικλμνξπρστυφχψω") + list("ΓΔΘΛΞΠΣΥΦΨΩ"),
    )
)


class RenderError(Exception):
    pass


@dataclass(frozen=True)
class HighlightSpec:
    """Factor positions (0-based within one summand) mapped to color tags."""

    colors: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        for pos, color in self.colors.items():
            if color not in HIGHLIGHT_COLORS:
                raise RenderError("unknown highlight color %r" % color)
            if not isinstance(pos, int) or pos < 0:
                raise RenderError("highlight position must be a non-negative int")

    def color_at(self, position: int):
        return self.colors.get(position)

    def __bool__(self) -> bool:
        return bool(self.colors)


EMPTY_HIGHLIGHT = HighlightSpec()


def highlight_spec_for(candidate: MatchCandidate, highlighting: Mapping) -> HighlightSpec:
    """Derive factor-position colors from a candidate and a rule's joker->color map.

    A matched factor takes the color of the first highlighted joker its
    pattern node can bind (map order decides ties)."""
    colors: dict = {}
    position = 0
    for segment in candidate.segments:
        if isinstance(segment, Matched):
            for offset, node in enumerate(segment.per_factor_pattern):
                names = pattern_jokers(node)
                for joker, color in highlighting.items():
                    if joker in names:
                        colors[position + offset] = color
                        break
        position += len(segment.factors)
    return HighlightSpec(colors)


# ---------------------------------------------------------------------------
# shared pieces


def _is_greek(name: str) -> bool:
    return name in _GREEK_GLYPHS


def _coefficient_magnitude_ascii(c: Fraction) -> str:
    return str(abs(c))


def _coefficient_magnitude_tex(c: Fraction) -> str:
    c = abs(c)
    if c.denominator == 1:
        return str(c.numerator)
    return r"\frac{%d}{%d}" % (c.numerator, c.denominator)


def _variance_runs(indices) -> list:
    """Consecutive same-variance runs, e.g. ^a^b_c -> [(up, [a,b]), (down, [c])]."""
    runs: list = []
    for ix in indices:
        if runs and runs[-1][0] == ix.variance:
            runs[-1][1].append(ix)
        else:
            runs.append((ix.variance, [ix]))
    return runs


# ---------------------------------------------------------------------------
# ASCII


def _ascii_ornament(orn, registry: SymbolRegistry) -> str:
    if isinstance(orn, OrnamentGroup):
        return ",".join(_ascii_ornament(item, registry) for item in orn.items)
    if isinstance(orn, Factor):
        return _ascii_factor(orn, registry)
    if isinstance(orn, IndexRef):
        return ("^" if orn.variance == "up" else "_") + orn.name
    if isinstance(orn, (str, int)):
        return str(orn)
    raise RenderError("no rendering for ornament value %r" % (orn,))


def _ascii_factor(f: Factor, registry: SymbolRegistry) -> str:
    hook = registry.render_hook(f.stem.symbol, ASCII)
    if hook is not None:
        return hook(f, lambda v: _ascii_factor(v, registry))
    text = registry.display_alias(f.stem.symbol, ASCII) or f.stem.symbol
    if f.stem.ornaments:
        inner = ";".join(_ascii_ornament(o, registry) for o in f.stem.ornaments)
        text += "[%s]" % inner
    if f.is_indexed:
        for ix in f.indices:
            text += ("^" if ix.variance == "up" else "_") + ix.name
    elif f.exponent != 1:
        text += "**%d" % f.exponent
    return text


# ---------------------------------------------------------------------------
# TeX


def _tex_symbol(name: str, registry: SymbolRegistry) -> str:
    alias = registry.display_alias(name, TEX)
    if alias is not None:
        return alias
    if _is_greek(name):
        return "\\" + name
    if len(name) == 1:
        return name
    return r"\mathrm{%s}" % name


def _tex_join(pieces) -> str:
    """Concatenate, spacing only where two alphanumerics would otherwise merge."""
    out = ""
    for piece in pieces:
        if out and out[-1].isalnum() and piece and piece[0].isalnum():
            out += " "
        out += piece
    return out


def _tex_indices(indices) -> str:
    parts = []
    for run_number, (variance, run) in enumerate(_variance_runs(indices)):
        if run_number > 0:
            parts.append("{}")
        marker = "^" if variance == "up" else "_"
        names = _tex_join("\\" + ix.name if _is_greek(ix.name) else ix.name for ix in run)
        parts.append("%s{%s}" % (marker, names))
    return "".join(parts)


def _tex_ornament(orn, registry: SymbolRegistry) -> str:
    if isinstance(orn, OrnamentGroup):
        return ",".join(_tex_ornament(item, registry) for item in orn.items)
    if isinstance(orn, Factor):
        return _tex_factor(orn, registry)
    if isinstance(orn, IndexRef):
        name = "\\" + orn.name if _is_greek(orn.name) else orn.name
        return ("^" if orn.variance == "up" else "_") + "{%s}" % name
    if isinstance(orn, str):
        return _tex_symbol(orn, registry)
    if isinstance(orn, int):
        return str(orn)
    raise RenderError("no rendering for ornament value %r" % (orn,))


def _tex_factor(f: Factor, registry: SymbolRegistry) -> str:
    hook = registry.render_hook(f.stem.symbol, TEX)
    if hook is not None:
        return hook(f, lambda v: _tex_factor(v, registry))
    text = _tex_symbol(f.stem.symbol, registry)
    if f.stem.ornaments:
        inner = ";".join(_tex_ornament(o, registry) for o in f.stem.ornaments)
        text += "[%s]" % inner
    if f.is_indexed:
        text += _tex_indices(f.indices)
    elif f.exponent != 1:
        text += "^{%d}" % f.exponent
    return text


# ---------------------------------------------------------------------------
# MathML (element tree; serialized only at the boundary)


def _mi(text: str) -> ET.Element:
    el = ET.Element("mi")
    el.text = text
    return el


def _mn(text) -> ET.Element:
    el = ET.Element("mn")
    el.text = str(text)
    return el


def _mo(text: str) -> ET.Element:
    el = ET.Element("mo")
    el.text = text
    return el


def _mrow(children) -> ET.Element:
    row = ET.Element("mrow")
    for child in children:
        row.append(child)
    return row


def _mathml_symbol(name: str, registry: SymbolRegistry) -> ET.Element:
    alias = registry.display_alias(name, MATHML)
    if alias is not None:
        return _mi(alias)
    return _mi(_GREEK_GLYPHS.get(name, name))


def _mathml_index_row(run) -> ET.Element:
    if len(run) == 1:
        return _mi(_GREEK_GLYPHS.get(run[0].name, run[0].name))
    return _mrow(_mi(_GREEK_GLYPHS.get(ix.name, ix.name)) for ix in run)


def _mathml_ornament(orn, registry: SymbolRegistry) -> ET.Element:
    if isinstance(orn, OrnamentGroup):
        children: list = []
        for i, item in enumerate(orn.items):
            if i:
                children.append(_mo(","))
            children.append(_mathml_ornament(item, registry))
        return _mrow(children)
    if isinstance(orn, Factor):
        return _mathml_factor(orn, registry)
    if isinstance(orn, IndexRef):
        return _mrow([_mo("^" if orn.variance == "up" else "_"),
                      _mi(_GREEK_GLYPHS.get(orn.name, orn.name))])
    if isinstance(orn, str):
        return _mi(_GREEK_GLYPHS.get(orn, orn))
    if isinstance(orn, int):
        return _mn(orn)
    raise RenderError("no rendering for ornament value %r" % (orn,))


def _mathml_factor(f: Factor, registry: SymbolRegistry) -> ET.Element:
    hook = registry.render_hook(f.stem.symbol, MATHML)
    if hook is not None:
        return hook(f, lambda v: _mathml_factor(v, registry))
    base = _mathml_symbol(f.stem.symbol, registry)
    if f.stem.ornaments:
        children = [base, _mo("[")]
        for i, orn in enumerate(f.stem.ornaments):
            if i:
                children.append(_mo(";"))
            children.append(_mathml_ornament(orn, registry))
        children.append(_mo("]"))
        base = _mrow(children)
    if f.is_indexed:
        for variance, run in _variance_runs(f.indices):
            script = ET.Element("msup" if variance == "up" else "msub")
            script.append(base)
            script.append(_mathml_index_row(run))
            base = script
    elif f.exponent != 1:
        power = ET.Element("msup")
        power.append(base)
        power.append(_mn(f.exponent))
        base = power
    return base


def _mathml_coefficient(c: Fraction) -> ET.Element:
    c = abs(c)
    if c.denominator == 1:
        return _mn(c.numerator)
    frac = ET.Element("mfrac")
    frac.append(_mn(c.numerator))
    frac.append(_mn(c.denominator))
    return frac


def _serialize_mathml(children) -> str:
    math = ET.Element("math", {"xmlns": MATHML_NS})
    math.append(_mrow(children))
    return ET.tostring(math, encoding="unicode")


# ---------------------------------------------------------------------------
# summand and term assembly


def _summand_factor_texts(s: Summand, fmt: str, registry: SymbolRegistry) -> list:
    if fmt == ASCII:
        return [_ascii_factor(f, registry) for f in s.factors]
    return [_tex_factor(f, registry) for f in s.factors]


def _wrap_highlight_runs(texts: list, highlight: HighlightSpec, fmt: str) -> str:
    pieces = []
    i = 0
    while i < len(texts):
        color = highlight.color_at(i)
        if color is None:
            pieces.append(texts[i])
            i += 1
            continue
        j = i
        while j < len(texts) and highlight.color_at(j) == color:
            j += 1
        merged = " ".join(texts[i:j])
        if fmt == ASCII:
            pieces.append("«%s»" % merged)
        else:
            pieces.append("{\\color{%s}%s}" % (color, merged))
        i = j
    return " ".join(pieces)


def _summand_body_text(s: Summand, fmt: str, registry: SymbolRegistry,
                       highlight: HighlightSpec) -> str:
    """Signless body: |coefficient| (1 suppressed before factors) and factors."""
    texts = _summand_factor_texts(s, fmt, registry)
    factors_text = _wrap_highlight_runs(texts, highlight, fmt)
    magnitude = (_coefficient_magnitude_ascii if fmt == ASCII else _coefficient_magnitude_tex)(
        s.coefficient
    )
    if not s.factors:
        return magnitude
    if abs(s.coefficient) == 1:
        return factors_text
    return magnitude + " " + factors_text


def _summand_body_mathml(s: Summand, registry: SymbolRegistry,
                         highlight: HighlightSpec) -> list:
    children: list = []
    if not s.factors:
        return [_mathml_coefficient(s.coefficient)]
    if abs(s.coefficient) != 1:
        children.append(_mathml_coefficient(s.coefficient))
    for position, f in enumerate(s.factors):
        el = _mathml_factor(f, registry)
        color = highlight.color_at(position)
        if color is not None:
            el.set("mathcolor", color)
        children.append(el)
    return children


def render_summand(s: Summand, fmt: str, registry: SymbolRegistry | None = None,
                   highlight: HighlightSpec = EMPTY_HIGHLIGHT) -> str:
    """One summand on its own, sign included."""
    registry = registry or SymbolRegistry()
    negative = s.coefficient < 0
    if fmt in (ASCII, TEX):
        body = _summand_body_text(s, fmt, registry, highlight)
        return ("-" if negative else "") + body
    if fmt == MATHML:
        children = _summand_body_mathml(s, registry, highlight)
        if negative:
            children = [_mo("-")] + children
        return _serialize_mathml(children)
    raise RenderError("unknown format %r" % fmt)


def render(t: Term, fmt: str, registry: SymbolRegistry | None = None) -> str:
    """A whole term.  The empty sum renders as 0."""
    registry = registry or SymbolRegistry()
    if fmt in (ASCII, TEX):
        if not t.summands:
            return "0"
        pieces = []
        for i, s in enumerate(t.summands):
            body = _summand_body_text(s, fmt, registry, EMPTY_HIGHLIGHT)
            if i == 0:
                pieces.append(("-" if s.coefficient < 0 else "") + body)
            else:
                pieces.append((" - " if s.coefficient < 0 else " + ") + body)
        return "".join(pieces)
    if fmt == MATHML:
        if not t.summands:
            return _serialize_mathml([_mn(0)])
        children: list = []
        for i, s in enumerate(t.summands):
            if i == 0:
                if s.coefficient < 0:
                    children.append(_mo("-"))
            else:
                children.append(_mo("-" if s.coefficient < 0 else "+"))
            children.extend(_summand_body_mathml(s, registry, EMPTY_HIGHLIGHT))
        return _serialize_mathml(children)
    raise RenderError("unknown format %r" % fmt)


def render_candidate(s: Summand, highlight: HighlightSpec, fmt: str,
                     registry: SymbolRegistry | None = None) -> str:
    """The summand with matched factors visually distinct.

    Stripping the markup (strip_highlights) recovers render_summand exactly."""
    for position in highlight.colors:
        if position >= len(s.factors):
            raise RenderError(
                "highlight position %d out of range for a %d-factor summand"
                % (position, len(s.factors))
            )
    return render_summand(s, fmt, registry, highlight)


def render_term_with_candidate(t: Term, summand_index: int, highlight: HighlightSpec,
                               fmt: str, registry: SymbolRegistry | None = None) -> str:
    """The whole term with one summand's matched factors highlighted."""
    registry = registry or SymbolRegistry()
    if not 0 <= summand_index < len(t.summands):
        raise RenderError("summand index %d out of range" % summand_index)
    if fmt in (ASCII, TEX):
        pieces = []
        for i, s in enumerate(t.summands):
            spec = highlight if i == summand_index else EMPTY_HIGHLIGHT
            if i == summand_index:
                for position in spec.colors:
                    if position >= len(s.factors):
                        raise RenderError("highlight position %d out of range" % position)
            body = _summand_body_text(s, fmt, registry, spec)
            if i == 0:
                pieces.append(("-" if s.coefficient < 0 else "") + body)
            else:
                pieces.append((" - " if s.coefficient < 0 else " + ") + body)
        return "".join(pieces)
    if fmt == MATHML:
        children: list = []
        for i, s in enumerate(t.summands):
            spec = highlight if i == summand_index else EMPTY_HIGHLIGHT
            if i == 0:
                if s.coefficient < 0:
                    children.append(_mo("-"))
            else:
                children.append(_mo("-" if s.coefficient < 0 else "+"))
            children.extend(_summand_body_mathml(s, registry, spec))
        return _serialize_mathml(children)
    raise RenderError("unknown format %r" % fmt)


# ---------------------------------------------------------------------------
# highlight stripping


_TEX_COLOR_OPEN = re.compile(r"\{\\color\{[a-z]+\}")


def strip_highlights(text: str, fmt: str) -> str:
    """Remove highlight markup, recovering the plain rendering exactly."""
    if fmt == ASCII:
        return text.replace("«", "").replace("»", "")
    if fmt == TEX:
        while True:
            m = _TEX_COLOR_OPEN.search(text)
            if m is None:
                return text
            depth = 1
            i = m.end()
            while i < len(text) and depth:
                if text[i] == "{":
                    depth += 1
                elif text[i] == "}":
                    depth -= 1
                i += 1
            # drop the wrapper braces, keep the content
            text = text[:m.start()] + text[m.end():i - 1] + text[i:]
    if fmt == MATHML:
        # our serializer is the only producer, so the attribute form is fixed
        return re.sub(r' mathcolor="[a-z]+"', "", text)
    raise RenderError("unknown format %r" % fmt)
