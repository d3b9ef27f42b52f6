import pytest

from moldpo.datagen import generate_corpus, write_corpus
from moldpo.errors import SmilesError
from moldpo.smiles import canonical_smiles, is_valid, read_corpus, tokenize


class TestGenerateCorpus:
    def test_deterministic(self):
        assert generate_corpus(300, seed=5) == generate_corpus(300, seed=5)

    def test_seeds_differ(self):
        assert generate_corpus(300, seed=5) != generate_corpus(300, seed=6)

    def test_requested_size(self):
        assert len(generate_corpus(250, seed=0)) == 250

    def test_all_lines_valid(self):
        lines = generate_corpus(500, seed=2)
        assert all(is_valid(line) for line in lines)

    def test_molecules_are_distinct(self):
        lines = generate_corpus(500, seed=3)
        canons = {canonical_smiles(line) for line in lines}
        assert len(canons) == 500

    def test_lines_fit_model_context(self):
        lines = generate_corpus(500, seed=4)
        assert all(len(list(tokenize(line))) + 2 <= 128 for line in lines)

    def test_include_lines_appended_with_copies(self):
        target = "CCCc1ccc(O)cc1"
        lines = generate_corpus(100, seed=0, include=[target], include_copies=7)
        assert len(lines) == 107
        assert lines[-7:] == [target] * 7

    def test_invalid_include_rejected(self):
        with pytest.raises(SmilesError):
            generate_corpus(10, seed=0, include=["C1CC"])

    def test_size_validation(self):
        with pytest.raises(ValueError):
            generate_corpus(0, seed=0)


class TestWriteCorpus:
    def test_round_trips_through_reader(self, tmp_path):
        lines = generate_corpus(50, seed=9)
        path = tmp_path / "corpus.smi"
        write_corpus(path, lines)
        assert read_corpus(path) == lines

    def test_newline_terminated(self, tmp_path):
        path = tmp_path / "corpus.smi"
        write_corpus(path, ["CCO", "CCN"])
        assert path.read_text() == "CCO\nCCN\n"
