import pytest

from moldpo.errors import MalformedFormula
from moldpo.smiles import formula, formula_text, parse, parse_formula


def test_methane():
    assert formula(parse("C")) == {"C": 1, "H": 4}


def test_water():
    assert formula(parse("O")) == {"O": 1, "H": 2}


def test_undecane_matches_target_formula():
    assert formula(parse("CCCCCCCCCCC")) == {"C": 11, "H": 24}


def test_explicit_h_atoms_counted_as_h():
    assert formula(parse("[H]O[H]")) == {"O": 1, "H": 2}


def test_bracket_h_counted():
    assert formula(parse("c1cc[nH]c1")) == {"C": 4, "N": 1, "H": 5}


def test_hill_spelling():
    assert formula_text({"C": 11, "H": 24}) == "C11H24"
    assert formula_text({"H": 1, "Cl": 1}) == "ClH"
    assert formula_text({"C": 9, "H": 10, "N": 2, "O": 2, "P": 1, "F": 2, "Cl": 1}) \
        == "C9H10ClF2N2O2P"


def test_parse_formula():
    assert parse_formula("C11H24") == {"C": 11, "H": 24}
    assert parse_formula("C9H10N2O2PF2Cl") == {
        "C": 9, "H": 10, "N": 2, "O": 2, "P": 1, "F": 2, "Cl": 1,
    }
    assert parse_formula("CO") == {"C": 1, "O": 1}


def test_parse_formula_rejections():
    for text in ("", "  ", "c11", "C11H24x", "H0", "CC4", "11C"):
        with pytest.raises(MalformedFormula):
            parse_formula(text)
