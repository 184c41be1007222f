import math
import random
from collections import Counter

import pytest
from hypothesis import given, settings, strategies as st

from cltree.codec import (BoostedCodec, HuffmanTable, ZeroOrderCodec, boosted_access,
                          boosted_encode, choose_sampling, class_entropy_bound, default_period,
                          zo_access, zo_encode)
from cltree.entropy import h0_total
from cltree.primitives import BPTree
from cltree.tree import generate_tree


def kraft(table):
    return sum(2.0 ** -l for l in table.lengths.values())


class TestHuffman:
    def test_two_symbols(self):
        tab = HuffmanTable.from_counts({0: 2, 1: 1})
        assert tab.lengths == {0: 1, 1: 1}

    def test_canonical_codes(self):
        tab = HuffmanTable.from_counts({0: 5, 1: 2, 2: 1, 3: 1})
        assert tab.lengths == {0: 1, 1: 2, 2: 3, 3: 3}
        assert [tab.codes[s] for s in range(4)] == [0b0, 0b10, 0b110, 0b111]

    def test_kraft_violation(self):
        with pytest.raises(ValueError):
            HuffmanTable({0: 1, 1: 1, 2: 1})

    @given(st.dictionaries(st.integers(0, 50), st.integers(1, 1000), min_size=2, max_size=40))
    @settings(max_examples=100, deadline=None)
    def test_complete_and_prefix_free(self, counts):
        tab = HuffmanTable.from_counts(counts)
        assert kraft(tab) == pytest.approx(1.0)
        words = [format(tab.codes[s], f"0{tab.lengths[s]}b") for s in counts]
        for a in words:
            for b in words:
                assert a == b or not b.startswith(a)


class TestZeroOrder:
    def test_spec_example(self):
        c = zo_encode([0, 0, 1])
        assert c.payload_bits == 3
        assert zo_access(c, 2) == 1

    def test_single_symbol(self):
        c = zo_encode([7] * 9)
        assert c.payload_bits == 9
        assert all(c.access(i) == 7 for i in range(9))

    def test_out_of_range(self):
        c = zo_encode([1, 2])
        with pytest.raises(IndexError):
            c.access(2)
        with pytest.raises(IndexError):
            c.access(-1)

    def test_empty(self):
        with pytest.raises(ValueError):
            zo_encode([])

    def test_payload_bound_random(self):
        rng = random.Random(11)
        for _ in range(1000):
            n = rng.randint(1, 200)
            P = [rng.randrange(rng.randint(1, 30)) for _ in range(n)]
            c = zo_encode(P)
            assert c.payload_bits <= h0_total(Counter(P)) + n
            assert [c.access(i) for i in range(n)] == P

    def test_bytes_roundtrip(self):
        P = [3, 1, 4, 1, 5, 9, 2, 6]
        c = zo_encode(P)
        back, off = ZeroOrderCodec.from_bytes(c.to_bytes())
        assert off == len(c.to_bytes())
        assert [back.access(i) for i in range(len(P))] == P


class TestBoosted:
    def test_one_class_equals_plain(self):
        rng = random.Random(2)
        P = [rng.randrange(6) for _ in range(300)]
        b = boosted_encode(P, [()] * len(P))
        assert b.payload_bits == zo_encode(P).payload_bits

    def test_deterministic_classes(self):
        P = [0, 1] * 50
        ctx = [(0,), (1,)] * 50
        b = boosted_encode(P, ctx)
        assert b.payload_bits <= len(P)
        assert zo_encode(P).payload_bits == len(P)

    def test_single_position(self):
        b = boosted_encode([4], [(2, 1)])
        assert boosted_access(b, 0, (2, 1)) == 4

    def test_unknown_context(self):
        b = boosted_encode([0, 1], [(0,), (1,)])
        with pytest.raises(KeyError):
            b.access(0, (5,))

    def test_codeword_outside_class(self):
        P = [0, 1, 2, 3, 9]
        ctx = [(0,)] * 4 + [(1,)]
        b = boosted_encode(P, ctx)
        with pytest.raises(KeyError):
            b.access(1, (1,))

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            boosted_encode([1, 2], [()])

    @given(st.lists(st.tuples(st.integers(0, 3), st.integers(0, 8)), min_size=1, max_size=300))
    @settings(max_examples=100, deadline=None)
    def test_roundtrip_and_bound(self, pairs):
        ctx = [(c,) for c, _ in pairs]
        P = [s for _, s in pairs]
        b = boosted_encode(P, ctx)
        assert [b.access(i, ctx[i]) for i in range(len(P))] == P
        assert b.payload_bits <= class_entropy_bound(P, ctx) + len(P)
        back, _ = BoostedCodec.from_bytes(b.to_bytes())
        assert [back.access(i, ctx[i]) for i in range(len(P))] == P


class TestSampling:
    def path_bp(self, n):
        return BPTree("1" * n + "0" * n)

    def test_default_period(self):
        assert default_period(3) == 1
        assert default_period(16) == 2
        assert default_period(2 ** 16) == 4

    def test_period_one_samples_everything(self):
        s = choose_sampling(BPTree("11010100"), 1)
        assert s.sampled == 4

    def test_path_period_three(self):
        s = choose_sampling(self.path_bp(10), 3)
        # depth classes mod 3 hold 4, 3, 3 nodes; the lightest is class 1
        assert s.residue == 1
        assert s.sampled - 1 <= math.ceil(10 / 3)
        assert [u for u in range(10) if s.is_sampled(u)] == [0, 1, 4, 7]

    def test_contexts_stored(self):
        ctx = [(), (0,), (1,), (2,)]
        s = choose_sampling(self.path_bp(4), 2, ctx, k=1, sigma=3)
        # both classes hold two nodes; ties go to residue 0
        assert s.residue == 0
        assert s.context(0) == () and s.context(2) == (1,)
        with pytest.raises(KeyError):
            s.context(1)

    def test_size_bound_random(self):
        rng = random.Random(5)
        for i in range(1000):
            n = rng.randint(1, 300)
            t = generate_tree({"kind": "uniform", "n": n, "sigma": 1}, i)
            d = rng.randint(1, 6)
            s = choose_sampling(BPTree.from_tree(t.degree), d)
            assert s.sampled <= n / d + 1
