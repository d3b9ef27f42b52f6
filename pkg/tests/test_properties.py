import pytest

from moldpo.descriptors.properties import (
    heavy_atoms,
    hetero_counts,
    mol_weight,
    properties,
    ring_bond_keys,
    ring_count,
    rotatable_bonds,
    tpsa,
)
from moldpo.smiles import parse


def test_mol_weight_methane():
    assert mol_weight(parse("C")) == pytest.approx(16.043, abs=1e-9)


def test_mol_weight_ethanol():
    assert mol_weight(parse("CCO")) == pytest.approx(46.069, abs=1e-9)


def test_mol_weight_benzene():
    assert mol_weight(parse("c1ccccc1")) == pytest.approx(78.114, abs=1e-9)


def test_mol_weight_water():
    assert mol_weight(parse("O")) == pytest.approx(18.015, abs=1e-9)


def test_mol_weight_counts_bracket_hydrogens():
    # [CH4] and C describe the same molecule.
    assert mol_weight(parse("[CH4]")) == pytest.approx(16.043, abs=1e-9)


def test_mol_weight_explicit_h_atoms():
    assert mol_weight(parse("[H]O[H]")) == pytest.approx(18.015, abs=1e-9)


@pytest.mark.parametrize(
    "smiles,rings",
    [
        ("C", 0),
        ("CCCC", 0),
        ("C1CC1", 1),
        ("c1ccccc1", 1),
        ("c1ccc2ccccc2c1", 2),
        ("C1CC12CC2", 2),
        ("c1ccc(cc1)-c1ccccc1", 2),
        ("CC.OO", 0),
        ("C1CC1.C1CC1", 2),
    ],
)
def test_ring_count(smiles, rings):
    assert ring_count(parse(smiles)) == rings


def test_ring_bonds_of_cyclohexane():
    g = parse("C1CCCCC1")
    assert len(ring_bond_keys(g)) == 6


def test_ring_bonds_exclude_substituent():
    g = parse("CC1CCCCC1")
    assert len(ring_bond_keys(g)) == 6
    assert len(g.bonds) == 7


@pytest.mark.parametrize(
    "smiles,count",
    [
        ("C", 0),
        ("CC", 0),
        ("CCC", 0),
        ("CCCC", 1),
        ("CCCCC", 2),
        ("C1CC1", 0),
        ("CCc1ccccc1", 1),
        ("CC(=O)OC", 1),
        ("C=CC=C", 1),
        ("CCCc1ccc(O)cc1", 2),
        ("CC(C)(C)C", 0),
    ],
)
def test_rotatable_bonds(smiles, count):
    assert rotatable_bonds(parse(smiles)) == count


def test_rotatable_bonds_ignore_explicit_hydrogens():
    # [H] neighbors must not raise heavy-degree.
    assert rotatable_bonds(parse("[H]C([H])([H])C([H])([H])[H]")) == 0


# Expected values are hand-summed from the shipped contribution table.
@pytest.mark.parametrize(
    "smiles,expected",
    [
        ("CCCC", 0.0),
        ("Oc1ccccc1", 20.23),
        ("CCO", 20.23),
        ("Nc1ccccc1", 26.02),
        ("c1ccncc1", 12.89),
        ("c1cc[nH]c1", 15.79),
        ("COC", 9.23),
        ("CNC", 12.03),
        ("CN(C)C", 3.24),
        ("CC#N", 23.79),
        ("CC(=O)O", 37.30),
        ("CC(=O)OC", 26.30),
        ("CCCc1ccc(O)cc1", 20.23),
        # nitromethane, charge-separated: 3.01 + 17.07 + 23.06
        ("C[N+](=O)[O-]", 43.14),
        ("c1cc[nH+]cc1", 14.14),
    ],
)
def test_tpsa(smiles, expected):
    assert tpsa(parse(smiles)) == pytest.approx(expected, abs=1e-9)


def test_tpsa_unmatched_feature_contributes_zero():
    # The table has no rows for these charge states.
    assert tpsa(parse("[NH2-]")) == pytest.approx(0.0)
    assert tpsa(parse("[O-2]")) == pytest.approx(0.0)


def test_tpsa_three_ring_row_preferred():
    # Aziridine N: the strained-ring contribution, not the acyclic one.
    assert tpsa(parse("C1CN1")) == pytest.approx(21.94, abs=1e-9)
    assert tpsa(parse("C1CO1")) == pytest.approx(12.53, abs=1e-9)


def test_heavy_atoms():
    assert heavy_atoms(parse("CCO")) == 3
    assert heavy_atoms(parse("[H]O[H]")) == 1
    assert heavy_atoms(parse("c1ccccc1")) == 6


def test_hetero_counts():
    assert hetero_counts(parse("CCO")) == {"O": 1}
    assert hetero_counts(parse("NCCS")) == {"N": 1, "S": 1}
    assert hetero_counts(parse("CCCC")) == {}
    assert hetero_counts(parse("[H]O[H]")) == {"O": 1}


def test_property_vector_fields():
    vec = properties(parse("CCCc1ccc(O)cc1"))
    assert vec.mol_weight == pytest.approx(136.194, abs=1e-3)
    assert vec.ring_count == 1
    assert vec.rotatable_bonds == 2
    assert vec.tpsa == pytest.approx(20.23)
    assert vec.heavy_atoms == 10
    assert vec.hetero_counts == {"O": 1}


def test_carbon_fraction():
    vec = properties(parse("CCCc1ccc(O)cc1"))
    assert vec.carbon_fraction == pytest.approx(0.9)
    assert properties(parse("CCCC")).carbon_fraction == 1.0
    assert properties(parse("O")).carbon_fraction == 0.0


def test_carbon_fraction_ignores_hydrogen_atoms():
    vec = properties(parse("[H]OC([H])([H])[H]"))
    assert vec.heavy_atoms == 2
    assert vec.carbon_fraction == pytest.approx(0.5)
