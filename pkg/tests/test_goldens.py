"""Committed golden corpus: fixture renderings are locked byte-for-byte.

The files under tests/goldens/ are the rendering-convention contract.  If a
convention changes deliberately, regenerate them (render each fixture from
fixture_terms() in every format into <name>.<fmt>.txt) and re-review the
diff by eye.
"""

import pathlib
import xml.etree.ElementTree as ET

import pytest

from termclamp.parser import parse_term
from termclamp.render import render
from termclamp.rules import vary_leibniz
from termclamp.service import batch_apply
from termclamp.standard import standard_registry
from termclamp.terms import Stem

GOLDEN_DIR = pathlib.Path(__file__).parent / "goldens"


def fixture_terms():
    registry = standard_registry()
    terms = {
        "reference-input": parse_term("-7/2 e**4 X_a_b Q^a^b_alpha + 5 Z_alpha", registry),
        "derivative-ornament": parse_term("del[F_mu_nu]_rho", registry),
        "spinor-ornament": parse_term("u[bar,mu;p_1]", registry),
        "normal-ordering-result": parse_term("adag a + 1", registry),
        "normal-ordering-indexed-result": parse_term("adag_nu a_mu + eta_mu_nu", registry),
        "epsilon-delta-result": parse_term(
            "delta_j_m X delta_k_n - delta_j_n X delta_k_m", registry
        ),
        "variation-two-factors": vary_leibniz(parse_term("a b", registry), Stem("delta")),
    }
    fierz = batch_apply(
        "psi Gamma^rho phi lambda Gamma_rho eta", "fierz", site=0, formats=("ascii",)
    )[0]["renderings"]["ascii"]
    terms["fierz-result"] = parse_term(fierz, registry)
    return registry, terms


NAMES = [
    "reference-input", "derivative-ornament", "spinor-ornament",
    "normal-ordering-result", "normal-ordering-indexed-result",
    "epsilon-delta-result", "variation-two-factors", "fierz-result",
]


@pytest.mark.parametrize("name", NAMES)
@pytest.mark.parametrize("fmt", ["ascii", "tex", "mathml"])
def test_fixture_rendering_matches_golden(name, fmt):
    registry, terms = fixture_terms()
    expected = (GOLDEN_DIR / f"{name}.{fmt}.txt").read_text("utf-8").rstrip("\n")
    assert render(terms[name], fmt, registry) == expected


@pytest.mark.parametrize("name", NAMES)
def test_golden_mathml_is_well_formed(name):
    ET.fromstring((GOLDEN_DIR / f"{name}.mathml.txt").read_text("utf-8"))


@pytest.mark.parametrize("name", NAMES)
def test_golden_ascii_reparses_to_the_fixture(name):
    registry, terms = fixture_terms()
    text = (GOLDEN_DIR / f"{name}.ascii.txt").read_text("utf-8").rstrip("\n")
    assert parse_term(text, registry) == terms[name]
