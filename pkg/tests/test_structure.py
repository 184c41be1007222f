import random
import threading

import pytest
from hypothesis import given, settings, strategies as st

from cltree.cli import oracle_mismatches
from cltree.structure import (CorruptContainer, DegreeSequenceIndex, SuccinctLabeledTree,
                              UnsupportedQuery)
from cltree.tree import LabeledTree, generate_tree

from conftest import small_trees
from test_tree import trees

WORKED_SEQS = [[0], [3, 1], [2], [1, 2], [2, 2]]


def build(t, **kw):
    return SuccinctLabeledTree.build(t, **kw)


class TestDegreeSequenceIndex:
    def test_worked_bitstrings(self):
        d = DegreeSequenceIndex.from_sequences(WORKED_SEQS)
        assert d.du.to01() == "1" "000101" "001" "01001" "001001"
        assert d.bu.to01() == "1" "100000" "100" "10000" "100000"

    def test_worked_ranges(self):
        d = DegreeSequenceIndex.from_sequences(WORKED_SEQS)
        # second node, first port: three child clusters
        assert d.port_to_child_range(1, 0) == (0, 3)
        assert d.port_to_child_range(1, 1) == (3, 4)
        assert [d.child_to_port(1, x) for x in range(4)] == [0, 0, 0, 1]
        assert d.child_base(3) == 6
        assert d.degree(4) == 4 and d.ports(4) == 2

    def test_single_port(self):
        d = DegreeSequenceIndex.from_sequences([[5]])
        assert d.port_to_child_range(0, 0) == (0, 5)
        assert all(d.child_to_port(0, x) == 0 for x in range(5))

    def test_errors(self):
        d = DegreeSequenceIndex.from_sequences(WORKED_SEQS)
        with pytest.raises(IndexError):
            d.port_to_child_range(1, 2)
        with pytest.raises(IndexError):
            d.child_to_port(2, 2)
        with pytest.raises(IndexError):
            d.port_to_child_range(5, 0)

    @given(st.lists(st.lists(st.integers(1, 6), max_size=5), min_size=1, max_size=30))
    @settings(max_examples=100, deadline=None)
    def test_against_direct_scan(self, seqs):
        d = DegreeSequenceIndex.from_sequences(seqs)
        for u, seq in enumerate(seqs):
            assert d.sequence(u) == (seq or [0])
            start = 0
            for p, c in enumerate(seq):
                assert d.port_to_child_range(u, p) == (start, start + c)
                for x in range(start, start + c):
                    assert d.child_to_port(u, x) == p
                start += c


class TestBuild:
    def test_single_node(self):
        t = LabeledTree([-1], [0], ["r"])
        for codec in ("plain", "boosted"):
            s = build(t, codec=codec, k=2)
            assert s.tprime_nodes == 1
            assert s.parent(0) is None and s.depth(0) == 0 and s.label_token(0) == "r"
            assert s.decode_full() == t

    @pytest.mark.parametrize("codec", ["plain", "boosted"])
    def test_catalog(self, catalog, codec):
        s = build(catalog, m=3, k=1, codec=codec)
        assert s.decode_full() == catalog
        assert s.childselect_label(0, 1, "magazine") == 15
        assert s.childselect_label(0, 3, "magazine") is None
        assert s.label_token(5) == "William Shakespeare"

    def test_bad_params(self, catalog):
        with pytest.raises(ValueError):
            build(catalog, codec="zip")
        with pytest.raises(ValueError):
            build(catalog, k=-1)

    def test_clustered_fixture_depth_row(self, clustered):
        s = build(clustered, m=3, k=1)
        row = [a - b for a, b in zip(s.dpos.values(), s.dneg.values())]
        assert row == [0, 1, 1, -1, 1, -1, 1, -1, 2, -2, 2, -2, 2, -2, 2, -2,
                       -1, 1, 1, -1, 1, -1, -1, 0]

    def test_clustered_fixture_queryable(self, clustered):
        s = build(clustered, m=3, k=1, codec="boosted")
        assert s.dsi.sequence(1) == [3, 2, 2]
        assert [s.dsi.port_to_child_range(1, p) for p in range(3)] == [(0, 3), (3, 5), (5, 7)]
        assert not oracle_mismatches(clustered, s, range(clustered.n), random.Random(0))

    def test_cluster_depths_match_recomputation(self):
        t = generate_tree({"kind": "uniform", "n": 400, "sigma": 2}, 8)
        s = build(t, m=3)
        depths = t.depths()
        for u in range(s.tprime_nodes):
            root = s._to_global(u, 0, s._shape(u))
            assert s._cluster_depth(u) == depths[root] == int(s._cum[u])

    def test_precompute_fills_cache(self, catalog):
        s = build(catalog, m=2, precompute=True)
        assert len(s._cache) == len(s.dictionary)


class TestOracleEquivalence:
    def test_exhaustive_small(self):
        rng = random.Random(3)
        for t in small_trees(6):
            for m in (1, 2, 3, 4):
                s = build(t, m=m, k=1, codec="boosted" if m % 2 else "plain")
                assert not oracle_mismatches(t, s, range(t.n), rng)
                assert s.decode_full() == t

    @given(trees(max_n=60, max_sigma=3), st.integers(1, 6), st.integers(0, 2),
           st.sampled_from(["plain", "boosted"]))
    @settings(max_examples=60, deadline=None)
    def test_random_trees(self, t, m, k, codec):
        s = build(t, m=m, k=k, codec=codec)
        assert not oracle_mismatches(t, s, range(t.n), random.Random(t.n))
        assert s.decode_full() == t

    def test_level_ancestor_edges(self, catalog):
        s = build(catalog, m=2)
        for v in range(catalog.n):
            assert s.level_ancestor(v, 0) == v
            assert s.level_ancestor(v, s.depth(v)) == 0
            assert s.level_ancestor(v, s.depth(v) + 1) is None
        with pytest.raises(ValueError):
            s.level_ancestor(0, -1)

    def test_invalid_node(self, catalog):
        s = build(catalog, m=2)
        with pytest.raises(IndexError):
            s.parent(catalog.n)
        with pytest.raises(IndexError):
            s.child(0, 4)

    def test_depth_label_zero_without_label(self, catalog):
        s = build(catalog, m=2)
        assert all(s.depth_label(v, "magazine") == 0 for v in range(15))

    def test_large_alphabet_rejected(self):
        t = generate_tree({"kind": "uniform", "n": 50, "sigma": 20}, 1)
        s = build(t, m=2, sigma_small=8)
        with pytest.raises(UnsupportedQuery, match="sigma_small"):
            s.depth_label(3, 0)
        assert s.depth(3) == t.depths()[3]

    def test_concurrent_reads(self):
        t = generate_tree({"kind": "correlated", "n": 3000, "sigma": 4}, 2)
        s = build(t, m=3, k=1, codec="boosted")
        depths = t.depths()
        errors = []

        def worker(seed):
            rng = random.Random(seed)
            for _ in range(300):
                v = rng.randrange(t.n)
                if s.depth(v) != depths[v] or s.parent(v) != (None if v == 0 else t.parent[v]):
                    errors.append(v)

        threads = [threading.Thread(target=worker, args=(i,)) for i in range(4)]
        for th in threads:
            th.start()
        for th in threads:
            th.join()
        assert not errors


class TestReport:
    def test_payload_and_sections(self, catalog):
        for codec in ("plain", "boosted"):
            r = build(catalog, m=3, k=1, codec=codec).size_report(catalog)
            assert r["payload_ok"]
            assert r["total_bits"] == sum(r["sections"].values())
            assert set(r["entropy"]) == {"H0", "Hk_L", "H_T", "Hk_T_given_L", "Hk_L_given_T"}

    def test_unary_alphabet_payload(self):
        t = generate_tree({"kind": "uniform", "n": 500, "sigma": 1}, 4)
        s = build(t, m=2)
        assert s.codec.payload_bits <= s.tprime_nodes + s.size_report(t)["P_H0"]

    def test_bits_per_node_drop_with_context(self):
        t = generate_tree({"kind": "correlated", "n": 20000, "rule": "catalog"}, 6)
        bits = [build(t, k=k, codec="boosted").size_report(t)["bits_per_node"] for k in (0, 1, 2)]
        assert bits[1] < bits[0] and bits[2] <= bits[0]

    def test_sampling_walk_within_period(self):
        for seed in range(6):
            t = generate_tree({"kind": "uniform", "n": 800, "sigma": 3}, seed)
            s = build(t, m=1, k=2, codec="boosted", d=1 + seed)
            assert s.max_context_walk() <= s.sampling.d
            assert s.sampling.sampled <= s.tprime_nodes / s.sampling.d + 1


class TestContainer:
    @pytest.mark.parametrize("codec", ["plain", "boosted"])
    def test_roundtrip(self, tmp_path, catalog, codec):
        s = build(catalog, m=3, k=1, codec=codec)
        path = tmp_path / "c.ltsx"
        s.save(path)
        back = SuccinctLabeledTree.load(path)
        assert back.decode_full() == catalog
        assert back.lca(3, 9) == 0
        assert back.to_bytes() == s.to_bytes()

    def test_bit_flips_detected(self, catalog):
        data = bytearray(build(catalog, m=2, k=1, codec="boosted").to_bytes())
        rng = random.Random(0)
        for pos in rng.sample(range(12, len(data)), 60):
            bad = bytearray(data)
            bad[pos] ^= 1 << rng.randrange(8)
            with pytest.raises(CorruptContainer):
                SuccinctLabeledTree.from_bytes(bytes(bad))

    def test_bad_magic_and_truncation(self, catalog):
        data = build(catalog, m=2).to_bytes()
        with pytest.raises(CorruptContainer):
            SuccinctLabeledTree.from_bytes(b"XXXXX" + data[5:])
        with pytest.raises(CorruptContainer):
            SuccinctLabeledTree.from_bytes(data[:-3])
