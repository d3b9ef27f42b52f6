import threading

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from moldpo.engine import Memory, ScoredMolecule, update_memory
from moldpo.smiles import canonical_smiles


def entry(canonical, score, agent_id=0, step=0, stage=0):
    return ScoredMolecule(
        canonical=canonical,
        tokens=None,
        score=score,
        agent_id=agent_id,
        step=step,
        stage=stage,
    )


class TestInsertion:
    def test_starts_empty(self):
        assert len(Memory()) == 0

    def test_holds_distinct_molecules(self):
        mem = Memory(capacity=10)
        mem.update([entry("C", 0.1), entry("CC", 0.2), entry("CCC", 0.3)])
        assert len(mem) == 3

    def test_duplicate_keeps_higher_score(self):
        mem = Memory(capacity=10)
        mem.update([entry("CCO", 0.3)])
        mem.update([entry("CCO", 0.7)])
        assert len(mem) == 1
        assert mem.best().score == 0.7

    def test_duplicate_lower_score_ignored(self):
        mem = Memory(capacity=10)
        mem.update([entry("CCO", 0.7)])
        mem.update([entry("CCO", 0.5)])
        assert mem.best().score == 0.7

    def test_capacity_bound(self):
        mem = Memory(capacity=5)
        mem.update([entry(f"C{'C' * i}", i / 100) for i in range(20)])
        assert len(mem) == 5

    def test_capacity_validation(self):
        with pytest.raises(ValueError):
            Memory(capacity=0)


class TestEviction:
    def test_full_memory_rejects_weaker_newcomer(self):
        mem = Memory(capacity=3)
        mem.update([entry("C", 0.5), entry("CC", 0.6), entry("CCC", 0.7)])
        mem.update([entry("CCCC", 0.4)])
        assert len(mem) == 3
        assert {e.canonical for e in mem.snapshot()} == {"C", "CC", "CCC"}

    def test_full_memory_evicts_minimum_for_stronger_newcomer(self):
        mem = Memory(capacity=3)
        mem.update([entry("C", 0.5), entry("CC", 0.6), entry("CCC", 0.7)])
        mem.update([entry("CCCC", 0.55)])
        survivors = {e.canonical: e.score for e in mem.snapshot()}
        assert survivors == {"CC": 0.6, "CCC": 0.7, "CCCC": 0.55}

    def test_equal_score_newcomer_does_not_evict(self):
        mem = Memory(capacity=2)
        mem.update([entry("C", 0.5), entry("CC", 0.6)])
        mem.update([entry("CCC", 0.5)])
        assert {e.canonical for e in mem.snapshot()} == {"C", "CC"}

    @given(
        st.lists(
            st.tuples(st.integers(0, 30), st.floats(0, 1, allow_nan=False)),
            min_size=1,
            max_size=200,
        )
    )
    @settings(max_examples=60, deadline=None)
    def test_max_score_never_decreases(self, ops):
        mem = Memory(capacity=8)
        running_max = None
        for mol_id, score in ops:
            mem.update([entry(f"mol{mol_id}", score)])
            best = mem.best().score
            if running_max is not None:
                assert best >= running_max
            running_max = best

    @given(
        st.lists(
            st.tuples(st.integers(0, 30), st.floats(0, 1, allow_nan=False)),
            min_size=1,
            max_size=200,
        )
    )
    @settings(max_examples=60, deadline=None)
    def test_capacity_respected_under_random_ops(self, ops):
        mem = Memory(capacity=8)
        for mol_id, score in ops:
            mem.update([entry(f"mol{mol_id}", score)])
            assert len(mem) <= 8


class TestMetrics:
    def test_three_entries(self):
        mem = Memory()
        mem.update([entry("C", 1.0), entry("CC", 0.8), entry("CCC", 0.6)])
        met = mem.metrics()
        assert met.top1 == 1.0
        assert met.top10_mean == pytest.approx(0.8)
        assert met.top100_mean == pytest.approx(0.8)
        assert met.count == 3

    def test_single_entry(self):
        mem = Memory()
        mem.update([entry("C", 0.7)])
        met = mem.metrics()
        assert (met.top1, met.top10_mean, met.top100_mean) == (0.7, 0.7, 0.7)
        assert met.count == 1

    def test_empty_memory(self):
        met = Memory().metrics()
        assert (met.top1, met.top10_mean, met.top100_mean, met.count) == (0, 0, 0, 0)

    def test_top10_window_once_full(self):
        mem = Memory()
        mem.update([entry(f"mol{i}", i / 20) for i in range(12)])
        met = mem.metrics()
        expected = sum(i / 20 for i in range(2, 12)) / 10
        assert met.top10_mean == pytest.approx(expected)
        assert met.top1 == pytest.approx(11 / 20)
        assert met.count == 12

    def test_top_scores_sorted_desc(self):
        mem = Memory()
        mem.update([entry("C", 0.2), entry("CC", 0.9), entry("CCC", 0.5)])
        assert mem.top_scores(2) == [0.9, 0.5]
        assert mem.top_scores(10) == [0.9, 0.5, 0.2]


class TestSnapshotAndBest:
    def test_snapshot_sorted_best_first(self):
        mem = Memory()
        mem.update([entry("C", 0.2), entry("CC", 0.9), entry("CCC", 0.5)])
        assert [e.canonical for e in mem.snapshot()] == ["CC", "CCC", "C"]

    def test_best_none_when_empty(self):
        assert Memory().best() is None

    def test_best_tie_breaks_lexicographically(self):
        mem = Memory()
        mem.update([entry("N", 0.5), entry("C", 0.5)])
        assert mem.best().canonical == "C"

    def test_snapshot_is_a_copy(self):
        mem = Memory()
        mem.update([entry("C", 0.2)])
        snap = mem.snapshot()
        snap.clear()
        assert len(mem) == 1


class TestPersistence:
    def test_round_trip(self, tmp_path):
        mem = Memory(capacity=7)
        mem.update(
            [
                entry("C", 0.2, agent_id=1, step=3, stage=0),
                entry("CCO", 0.9, agent_id=0, step=5, stage=1),
            ]
        )
        path = tmp_path / "mem.json"
        mem.save(path)
        loaded = Memory.load(path)
        assert loaded.capacity == 7
        assert loaded.snapshot() == mem.snapshot()


class TestUpdateMemoryConvenience:
    def test_skips_invalid_smiles(self):
        mem = Memory()
        update_memory(mem, [("CCO", 0.5), ("C1CC", 0.9), ("xyz", 0.9)])
        assert len(mem) == 1
        assert mem.best().canonical == canonical_smiles("CCO")

    def test_canonicalization_merges_spellings(self):
        mem = Memory()
        update_memory(mem, [("OCC", 0.4), ("CCO", 0.6)])
        assert len(mem) == 1
        assert mem.best().score == 0.6

    def test_returns_same_memory(self):
        mem = Memory()
        assert update_memory(mem, [("C", 0.1)]) is mem


class TestThreadSafety:
    def test_concurrent_updates_stay_consistent(self):
        mem = Memory(capacity=1000)
        errors = []

        def worker(offset):
            try:
                for i in range(200):
                    mem.update([entry(f"mol{offset}_{i}", (offset * 200 + i) / 1000)])
            except Exception as exc:
                errors.append(exc)

        threads = [threading.Thread(target=worker, args=(k,)) for k in range(4)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert not errors
        assert len(mem) == 800
        assert mem.best().score == pytest.approx(799 / 1000)
