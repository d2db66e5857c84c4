"""Standard setup: the stock symbol registry and the shipped rule file.

The registry knows two derivative-style symbols whose ornament is the factor
they act on: `del` (partial derivative, carries its own indices) and `delta`
(variation, produced by vary_leibniz).  Both parse their bracket block as one
factor in term syntax, so `del[F_mu_nu]_rho` round-trips through ASCII.  It
also carries display aliases for a few operator stems that have no ASCII
glyph (adag renders as a-dagger outside ASCII).
"""

from __future__ import annotations

import xml.etree.ElementTree as ET
from importlib import resources

from .parser import SymbolRegistry, single_factor_ornament_parser
from .render import (
    MATHML,
    TEX,
    _mathml_index_row,
    _mi,
    _mrow,
    _tex_indices,
    _variance_runs,
)
from .rules import load_rules_file, parse_rules


def _derivative_tex_hook(macro: str):
    def hook(factor, recurse):
        text = macro
        if factor.is_indexed and factor.indices:
            text += _tex_indices(factor.indices)
        ornaments = factor.stem.ornaments
        if len(ornaments) == 1 and not isinstance(ornaments[0], (str, int)):
            return text + " " + recurse(ornaments[0])
        return text

    return hook


def _derivative_mathml_hook(glyph: str):
    def hook(factor, recurse):
        base = _mi(glyph)
        if factor.is_indexed and factor.indices:
            for variance, run in _variance_runs(factor.indices):
                script = ET.Element("msup" if variance == "up" else "msub")
                script.append(base)
                script.append(_mathml_index_row(run))
                base = script
        ornaments = factor.stem.ornaments
        if len(ornaments) == 1 and not isinstance(ornaments[0], (str, int)):
            return _mrow([base, recurse(ornaments[0])])
        return base

    return hook


def standard_registry() -> SymbolRegistry:
    registry = SymbolRegistry()
    registry.register_ornament_parser("del", single_factor_ornament_parser)
    registry.register_ornament_parser("delta", single_factor_ornament_parser)
    registry.register_render_hook("del", TEX, _derivative_tex_hook(r"\partial"))
    registry.register_render_hook("delta", TEX, _derivative_tex_hook(r"\delta"))
    registry.register_render_hook("del", MATHML, _derivative_mathml_hook("∂"))
    registry.register_render_hook("delta", MATHML, _derivative_mathml_hook("δ"))
    registry.register_display_alias("adag", TEX, r"a^{\dagger}")
    registry.register_display_alias("adag", MATHML, "a†")
    registry.register_display_alias("eps", TEX, r"\epsilon")
    registry.register_display_alias("eps", MATHML, "ε")
    registry.register_display_alias("Gamma5", TEX, r"\Gamma^{5}")
    registry.register_display_alias("Gamma5", MATHML, "Γ⁵")
    return registry


def standard_rules_text() -> str:
    return resources.files("termclamp").joinpath("data/standard.rules").read_text("utf-8")


def load_standard_rules(registry: SymbolRegistry | None = None) -> dict:
    registry = registry or standard_registry()
    return parse_rules(standard_rules_text(), registry)
