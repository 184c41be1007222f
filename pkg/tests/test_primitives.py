import random

import pytest
from hypothesis import given, settings, strategies as st

from cltree.primitives import BitVector, BPTree, PartialSums
from cltree.tree import generate_tree, naive_query

from test_tree import trees


class TestBitVector:
    @given(st.lists(st.integers(0, 1), max_size=1500))
    @settings(max_examples=80, deadline=None)
    def test_rank_select_brute(self, bits):
        bv = BitVector(bits)
        ones = [i for i, b in enumerate(bits) if b]
        zeros = [i for i, b in enumerate(bits) if not b]
        for i in range(0, len(bits) + 1, max(1, len(bits) // 97)):
            assert bv.rank1(i) == sum(bits[:i])
        for j, p in enumerate(ones, 1):
            assert bv.select1(j) == p
        for j, p in enumerate(zeros, 1):
            assert bv.select0(j) == p

    def test_dense_and_sparse_long(self):
        rng = random.Random(4)
        for density in (0.01, 0.5, 0.99):
            bits = [int(rng.random() < density) for _ in range(20000)]
            bv = BitVector(bits)
            ones = [i for i, b in enumerate(bits) if b]
            for j in rng.sample(range(1, len(ones) + 1), 200):
                assert bv.select1(j) == ones[j - 1]
                assert bv.rank1(ones[j - 1]) == j - 1

    def test_out_of_range(self):
        bv = BitVector("0110")
        with pytest.raises(IndexError):
            bv.select1(3)
        with pytest.raises(IndexError):
            bv.select0(3)
        with pytest.raises(IndexError):
            bv.rank1(5)

    def test_empty(self):
        bv = BitVector("")
        assert len(bv) == 0 and bv.rank1(0) == 0

    def test_bytes_roundtrip(self):
        bv = BitVector("1011" * 50 + "1")
        back, off = BitVector.from_bytes(b"xx" + bv.to_bytes(), 2)
        assert back == bv and off == 2 + len(bv.to_bytes())

    def test_from_positions(self):
        assert BitVector.from_positions([0, 3], 5).to01() == "10010"

    def test_directory_is_accounted(self):
        bv = BitVector([1] * 4096)
        assert bv.size_bits() > 4096


class TestPartialSums:
    def test_example(self):
        ps = PartialSums([2, 0, 3])
        assert ps.sum(1, 3) == 5 and ps.sum(2, 2) == 0 and ps.sum(3, 2) == 0
        assert ps.find(3) == 3 and ps.find(2) == 1 and ps.find(6) == 4

    def test_all_zero(self):
        ps = PartialSums([0, 0])
        assert ps.total == 0 and ps.find(1) == 3

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            PartialSums([1, -1])

    @given(st.lists(st.integers(0, 12), min_size=1, max_size=200))
    @settings(max_examples=80, deadline=None)
    def test_find_is_first_prefix_reaching_x(self, vals):
        ps = PartialSums(vals)
        assert ps.values() == vals
        acc = 0
        prefix = []
        for v in vals:
            acc += v
            prefix.append(acc)
        for x in range(1, acc + 1):
            assert ps.find(x) == next(i for i, p in enumerate(prefix, 1) if p >= x)


class TestBPTree:
    def test_rejects_unbalanced(self):
        for bad in ("(", "())", "()()", ")("):
            with pytest.raises(ValueError):
                BPTree(bad.replace("(", "1").replace(")", "0"))

    @given(trees(max_n=120, max_sigma=1))
    @settings(max_examples=60, deadline=None)
    def test_navigation_matches_pointer_walk(self, t):
        bp = BPTree.from_tree(t.degree)
        pos = [bp.preorder_select(v) for v in range(t.n)]
        pre = {p: v for v, p in enumerate(pos)}
        rng = random.Random(t.n)
        for v in range(t.n):
            x = pos[v]
            assert bp.preorder_rank(x) == v
            par = bp.parent(x)
            assert (None if par is None else pre[par]) == naive_query(t, "parent", v)
            fc = bp.firstchild(x)
            assert (None if fc is None else pre[fc]) == naive_query(t, "firstchild", v)
            ns = bp.nextsibling(x)
            assert (None if ns is None else pre[ns]) == naive_query(t, "nextsibling", v)
            assert bp.depth(x) == naive_query(t, "depth", v)
            assert bp.degree(x) == t.degree[v]
            assert bp.childrank(x) == naive_query(t, "childrank", v)
            assert bp.subtree_size(x) == t.subtree_sizes()[v]
            for i in range(t.degree[v]):
                assert pre[bp.child(x, i)] == naive_query(t, "child", v, i)
            d = rng.randrange(bp.depth(x) + 2)
            la = bp.level_ancestor(x, d)
            assert (None if la is None else pre[la]) == naive_query(t, "level_ancestor", v, d)
            w = rng.randrange(t.n)
            assert pre[bp.lca(x, pos[w])] == naive_query(t, "lca", v, w)

    def test_large_deep_tree(self):
        t = generate_tree({"kind": "uniform", "n": 5000, "sigma": 1}, 9)
        bp = BPTree.from_tree(t.degree)
        rng = random.Random(1)
        for v in rng.sample(range(t.n), 300):
            x = bp.preorder_select(v)
            assert bp.depth(x) == t.depths()[v]
            assert bp.findclose(x) == x + 2 * t.subtree_sizes()[v] - 1

    def test_bytes_roundtrip(self):
        bp = BPTree("110100")
        back, _ = BPTree.from_bytes(bp.to_bytes())
        assert back.bv == bp.bv and back.nodes == 3
