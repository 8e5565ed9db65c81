import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from moldream.errors import ConfigError, EmptyInput, FileUnreadable, MissingLabel
from moldream.graph import MAX_VALENCE, MolecularGraph, parse_smiles
from moldream.oracle import (
    DEFAULT_TABLE,
    ExternalLabelOracle,
    PropertyTable,
    TableOracle,
    dataset_stats,
    surrogate_logp,
)

from .strategies import molecular_graphs, permuted


def independent_sum(g, table):
    """Re-summation oracle that shares no code with the implementation."""
    total = 0.0
    used = {i: 0 for i in range(len(g.atoms))}
    for a, b, order in g.bonds:
        used[a] += order
        used[b] += order
        if order == 2:
            total += table.bond2
        if order == 3:
            total += table.bond3
    for i, el in enumerate(g.atoms):
        total += table.elements[el]
        total += (MAX_VALENCE[el] - used[i]) * table.hydrogen
    return total


class TestSurrogateLogp:
    def test_empty_graph_is_zero(self):
        assert surrogate_logp(MolecularGraph()) == 0.0

    def test_ethanol(self):
        # 2*0.20 + (-0.40) + 6*0.10
        assert surrogate_logp(parse_smiles("CCO")) == pytest.approx(0.60)

    def test_double_bond_correction(self):
        assert surrogate_logp(parse_smiles("CO")) == pytest.approx(0.20)
        assert surrogate_logp(parse_smiles("C=O")) == pytest.approx(-0.05)
        # swap costs the order-2 correction plus two hydrogens
        diff = surrogate_logp(parse_smiles("C=O")) - surrogate_logp(parse_smiles("CO"))
        assert diff == pytest.approx(DEFAULT_TABLE.bond2 - 2 * DEFAULT_TABLE.hydrogen)

    def test_triple_bond(self):
        # 0.20 - 0.70 + 0.10 - 0.10
        assert surrogate_logp(parse_smiles("C#N")) == pytest.approx(-0.50)

    def test_ring(self):
        assert surrogate_logp(parse_smiles("C1CC1")) == pytest.approx(1.20)

    def test_tetrafluoromethane(self):
        assert surrogate_logp(parse_smiles("FC(F)(F)F")) == pytest.approx(-0.60)

    def test_custom_table(self):
        table = PropertyTable(
            {"C": 1.0, "N": 0.0, "O": 0.0, "F": 0.0},
            hydrogen=0.0, bond2=0.0, bond3=0.0,
        )
        assert surrogate_logp(parse_smiles("CCO"), table) == pytest.approx(2.0)

    @given(molecular_graphs())
    @settings(max_examples=300, deadline=None)
    def test_additivity_against_resummation(self, g):
        assert surrogate_logp(g) == pytest.approx(independent_sum(g, DEFAULT_TABLE))

    @given(molecular_graphs(), st.integers(0, 50))
    @settings(max_examples=200, deadline=None)
    def test_permutation_invariance(self, g, seed):
        assert surrogate_logp(permuted(g, seed)) == pytest.approx(surrogate_logp(g))

    @given(molecular_graphs())
    @settings(max_examples=300, deadline=None)
    def test_nitrogen_swap_strictly_decreases(self, g):
        for i, el in enumerate(g.atoms):
            if el != "C" or g.bonded_order_sum(i) > MAX_VALENCE["N"]:
                continue
            atoms = list(g.atoms)
            atoms[i] = "N"
            swapped = MolecularGraph(tuple(atoms), g.bonds)
            delta = surrogate_logp(swapped) - surrogate_logp(g)
            assert delta == pytest.approx(-1.0)
            return


class TestDatasetStats:
    def test_three_values(self):
        s = dataset_stats([1.0, 2.0, 3.0])
        assert s.mean == pytest.approx(2.0)
        assert s.min == 1.0 and s.max == 3.0
        assert s.std == pytest.approx(math.sqrt(2.0 / 3.0))
        assert s.count == 3

    def test_single_value(self):
        s = dataset_stats([5.0])
        assert s.mean == s.min == s.max == 5.0
        assert s.std == 0.0
        assert s.count == 1

    def test_empty_raises(self):
        with pytest.raises(EmptyInput):
            dataset_stats([])

    @given(st.lists(st.floats(-100, 100), min_size=1, max_size=40))
    @settings(max_examples=200, deadline=None)
    def test_matches_numpy(self, values):
        s = dataset_stats(values)
        assert s.mean == pytest.approx(np.mean(values), abs=1e-12)
        assert s.std == pytest.approx(np.std(values), abs=1e-12)
        assert s.min == min(values) and s.max == max(values)


class TestPropertyTable:
    def test_default_signs(self):
        assert DEFAULT_TABLE.elements["C"] > 0
        for el in ("N", "O", "F"):
            assert DEFAULT_TABLE.elements[el] < 0

    def test_missing_element_rejected(self):
        with pytest.raises(ConfigError):
            PropertyTable({"C": 0.2, "N": -0.7, "O": -0.4},
                          hydrogen=0.1, bond2=0.0, bond3=0.0)

    def test_non_finite_rejected(self):
        with pytest.raises(ConfigError):
            PropertyTable({"C": float("nan"), "N": -0.7, "O": -0.4, "F": -0.2},
                          hydrogen=0.1, bond2=0.0, bond3=0.0)

    def test_from_file(self, tmp_path):
        p = tmp_path / "table.txt"
        p.write_text(
            "# surrogate coefficients\n"
            "C = 0.5\nN = -0.1\nO = -0.2\nF = -0.3\n"
            "H = 0.05\nbond2 = -0.01\nbond3 = -0.02\n"
        )
        t = PropertyTable.from_file(p)
        assert t.elements == {"C": 0.5, "N": -0.1, "O": -0.2, "F": -0.3}
        assert t.hydrogen == 0.05
        assert t.bond2 == -0.01 and t.bond3 == -0.02

    def test_from_file_missing_key(self, tmp_path):
        p = tmp_path / "table.txt"
        p.write_text("C = 0.5\nN = -0.1\nO = -0.2\nF = -0.3\nH = 0.05\nbond2 = 0\n")
        with pytest.raises(ConfigError):
            PropertyTable.from_file(p)

    def test_from_file_unknown_key(self, tmp_path):
        p = tmp_path / "table.txt"
        p.write_text(
            "C = 0.5\nN = -0.1\nO = -0.2\nF = -0.3\n"
            "H = 0.05\nbond2 = 0\nbond3 = 0\nXe = 1.0\n"
        )
        with pytest.raises(ConfigError):
            PropertyTable.from_file(p)

    def test_from_file_bad_number(self, tmp_path):
        p = tmp_path / "table.txt"
        p.write_text(
            "C = zero\nN = -0.1\nO = -0.2\nF = -0.3\nH = 0\nbond2 = 0\nbond3 = 0\n"
        )
        with pytest.raises(ConfigError):
            PropertyTable.from_file(p)

    def test_from_file_unreadable(self, tmp_path):
        with pytest.raises(FileUnreadable):
            PropertyTable.from_file(tmp_path / "absent.txt")


class TestOracles:
    def test_table_oracle_matches_function(self):
        g = parse_smiles("CCO")
        assert TableOracle().label(g) == surrogate_logp(g)

    def test_table_oracle_batch(self):
        graphs = [parse_smiles(s) for s in ("C", "CCO")]
        assert TableOracle().labels(graphs) == [surrogate_logp(g) for g in graphs]

    def test_external_oracle_lookup(self, tmp_path):
        p = tmp_path / "labels.tsv"
        p.write_text("CCO\t1.25\nC\t-0.5\n")
        oracle = ExternalLabelOracle.from_file(p)
        assert oracle.label(parse_smiles("OCC")) == 1.25  # isomorphic spelling
        assert oracle.label(parse_smiles("C")) == -0.5

    def test_external_oracle_missing(self, tmp_path):
        p = tmp_path / "labels.tsv"
        p.write_text("C\t0.0\n")
        with pytest.raises(MissingLabel):
            ExternalLabelOracle.from_file(p).label(parse_smiles("CCO"))

    def test_external_oracle_bad_line(self, tmp_path):
        p = tmp_path / "labels.tsv"
        p.write_text("CCO no tab here\n")
        with pytest.raises(ConfigError):
            ExternalLabelOracle.from_file(p)

    def test_external_oracle_bad_value(self, tmp_path):
        p = tmp_path / "labels.tsv"
        p.write_text("CCO\tmuch\n")
        with pytest.raises(ConfigError):
            ExternalLabelOracle.from_file(p)
