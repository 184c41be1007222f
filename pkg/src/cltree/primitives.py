"""Static bit-level structures: rank/select bitvector, unary partial sums and
a balanced-parentheses tree.

Positions are 0-based. ``select`` counts from 1 (the j-th set bit).
"""
from __future__ import annotations

import bisect
import struct
from typing import Iterable, Sequence

__all__ = ["BitVector", "PartialSums", "BPTree"]

_WORD = 64
_SUPER_WORDS = 8  # 512-bit superblocks
_MASK64 = (1 << 64) - 1


def _select_in_word(w: int, j: int) -> int:
    """Position of the j-th (1-based) set bit of w."""
    for _ in range(j - 1):
        w &= w - 1
    return (w & -w).bit_length() - 1


class BitVector:
    """Packed bits with a two-level rank directory (512/64) and select by
    binary search over superblocks followed by a word scan."""

    __slots__ = ("n", "words", "_super", "_block", "ones")

    def __init__(self, bits: Iterable[int] | str = (), *, words: Sequence[int] | None = None,
                 length: int | None = None):
        if words is not None:
            if length is None:
                raise ValueError("length required with words")
            self.words = list(words)
            self.n = length
            if len(self.words) != (length + _WORD - 1) // _WORD:
                raise ValueError("word count does not match length")
        else:
            if isinstance(bits, str):
                bits = (1 if ch == "1" else 0 for ch in bits if ch in "01")
            ws: list[int] = []
            cur = 0
            n = 0
            for b in bits:
                if b:
                    cur |= 1 << (n & 63)
                n += 1
                if n & 63 == 0:
                    ws.append(cur)
                    cur = 0
            if n & 63:
                ws.append(cur)
            self.words = ws
            self.n = n
        self._build()

    @classmethod
    def from_positions(cls, positions: Iterable[int], length: int) -> "BitVector":
        ws = [0] * ((length + _WORD - 1) // _WORD)
        for p in positions:
            if not 0 <= p < length:
                raise IndexError(p)
            ws[p >> 6] |= 1 << (p & 63)
        return cls(words=ws, length=length)

    def _build(self) -> None:
        sup: list[int] = []
        blk: list[int] = []
        acc = 0
        base = 0
        for i, w in enumerate(self.words):
            if i % _SUPER_WORDS == 0:
                sup.append(acc)
                base = acc
            blk.append(acc - base)
            acc += w.bit_count()
        sup.append(acc)
        self._super = sup
        self._block = blk
        self.ones = acc

    def __len__(self) -> int:
        return self.n

    def __getitem__(self, i: int) -> int:
        if not 0 <= i < self.n:
            raise IndexError(i)
        return (self.words[i >> 6] >> (i & 63)) & 1

    def __iter__(self):
        for i in range(self.n):
            yield (self.words[i >> 6] >> (i & 63)) & 1

    def __eq__(self, other) -> bool:
        return isinstance(other, BitVector) and self.n == other.n and self.words == other.words

    def to01(self) -> str:
        return "".join("1" if b else "0" for b in self)

    def rank1(self, i: int) -> int:
        """Number of ones in positions [0, i)."""
        if not 0 <= i <= self.n:
            raise IndexError(i)
        w = i >> 6
        if w == len(self.words):
            return self.ones
        r = self._super[w // _SUPER_WORDS] + self._block[w]
        return r + (self.words[w] & ((1 << (i & 63)) - 1)).bit_count()

    def rank0(self, i: int) -> int:
        return i - self.rank1(i)

    def rank(self, side: int, i: int) -> int:
        return self.rank1(i) if side else self.rank0(i)

    def select1(self, j: int) -> int:
        if not 1 <= j <= self.ones:
            raise IndexError(f"select1({j}) with {self.ones} ones")
        s = bisect.bisect_left(self._super, j) - 1
        w = s * _SUPER_WORDS
        base = self._super[s]
        last = min(len(self.words), w + _SUPER_WORDS)
        while w + 1 < last and base + self._block[w + 1] < j:
            w += 1
        return (w << 6) + _select_in_word(self.words[w], j - base - self._block[w])

    def select0(self, j: int) -> int:
        zeros = self.n - self.ones
        if not 1 <= j <= zeros:
            raise IndexError(f"select0({j}) with {zeros} zeros")
        sup = self._super
        nsup = len(sup) - 1
        lo, hi = 0, nsup  # zeros before superblock s: 512*s - sup[s]
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if mid * _SUPER_WORDS * _WORD - sup[mid] < j:
                lo = mid
            else:
                hi = mid - 1
        s = lo
        w = s * _SUPER_WORDS
        last = min(len(self.words), w + _SUPER_WORDS)
        sup_ones = sup[s]
        blk = self._block
        while w + 1 < last and (w + 1) * _WORD - sup_ones - blk[w + 1] < j:
            w += 1
        zeros_before = w * _WORD - sup_ones - blk[w]
        inv = ~self.words[w] & _MASK64
        return (w << 6) + _select_in_word(inv, j - zeros_before)

    def select(self, side: int, j: int) -> int:
        return self.select1(j) if side else self.select0(j)

    # -- accounting / serialization -------------------------------------

    def directory_bits(self) -> int:
        # 64-bit superblock counters, 9-bit in-superblock block counters
        return 64 * len(self._super) + 9 * len(self._block)

    def size_bits(self) -> int:
        return self.n + self.directory_bits()

    def to_bytes(self) -> bytes:
        return struct.pack(f"<Q{len(self.words)}Q", self.n, *self.words)

    @classmethod
    def from_bytes(cls, data: bytes, offset: int = 0) -> tuple["BitVector", int]:
        (n,) = struct.unpack_from("<Q", data, offset)
        nw = (n + _WORD - 1) // _WORD
        words = struct.unpack_from(f"<{nw}Q", data, offset + 8)
        return cls(words=words, length=n), offset + 8 + 8 * nw

    def __repr__(self) -> str:
        return f"BitVector(n={self.n}, ones={self.ones})"


class PartialSums:
    """Nonnegative integers T[1..n_t] stored as ``0^T[1] 1 ... 0^T[n_t] 1``."""

    __slots__ = ("bv", "count")

    def __init__(self, values: Iterable[int] = (), *, bv: BitVector | None = None):
        if bv is None:
            positions = []
            pos = 0
            for v in values:
                if v < 0:
                    raise ValueError("partial sums need nonnegative values")
                pos += v
                positions.append(pos)
                pos += 1
            bv = BitVector.from_positions(positions, pos)
        self.bv = bv
        self.count = bv.ones

    def __len__(self) -> int:
        return self.count

    @property
    def total(self) -> int:
        return self.bv.n - self.count

    def prefix(self, i: int) -> int:
        """T[1] + ... + T[i]; prefix(0) = 0."""
        if i == 0:
            return 0
        return self.bv.select1(i) - (i - 1)

    def value(self, i: int) -> int:
        return self.prefix(i) - self.prefix(i - 1)

    def sum(self, i: int, j: int) -> int:
        """T[i] + ... + T[j] (1-based, inclusive); empty ranges give 0."""
        if j < i:
            return 0
        if not 1 <= i or j > self.count:
            raise IndexError((i, j))
        return self.prefix(j) - self.prefix(i - 1)

    def find(self, x: int) -> int:
        """First i with prefix(i) >= x; ``count + 1`` if the total is smaller."""
        if x < 1:
            raise ValueError("find needs x >= 1")
        if x > self.total:
            return self.count + 1
        return self.bv.rank1(self.bv.select0(x)) + 1

    def values(self) -> list[int]:
        return [self.value(i) for i in range(1, self.count + 1)]

    def size_bits(self) -> int:
        return self.bv.size_bits()

    def to_bytes(self) -> bytes:
        return self.bv.to_bytes()

    @classmethod
    def from_bytes(cls, data: bytes, offset: int = 0) -> tuple["PartialSums", int]:
        bv, off = BitVector.from_bytes(data, offset)
        return cls(bv=bv), off


# byte tables for excess scanning: running excess after each bit (LSB first)
_BYTE_DELTA = [0] * 256
_BYTE_MIN = [0] * 256
for _b in range(256):
    _e = 0
    _m = 10
    for _r in range(8):
        _e += 1 if (_b >> _r) & 1 else -1
        _m = min(_m, _e)
    _BYTE_DELTA[_b] = _e
    _BYTE_MIN[_b] = _m
del _b, _e, _m, _r

_INF = 1 << 60


class BPTree:
    """Balanced-parentheses ordinal tree (open = 1) with a range-min tree
    over 64-bit word minima of the excess sequence.

    A node is represented by the position of its open parenthesis. excess(i)
    is #opens - #closes in positions [0, i]; excess(-1) = 0.
    """

    def __init__(self, bits: Iterable[int] | str | BitVector):
        self.bv = bits if isinstance(bits, BitVector) else BitVector(bits)
        n = self.bv.n
        if n % 2:
            raise ValueError("odd parenthesis sequence")
        words = self.bv.words
        nw = len(words)
        wstart = [0] * (nw + 1)
        wmin = [_INF] * nw
        e = 0
        for w in range(nw):
            wstart[w] = e
            word = words[w]
            nbits = min(_WORD, n - w * _WORD)
            m = _INF
            for byte_i in range(0, nbits, 8):
                b = (word >> byte_i) & 0xFF
                take = min(8, nbits - byte_i)
                if take == 8:
                    m = min(m, e + _BYTE_MIN[b])
                    e += _BYTE_DELTA[b]
                else:
                    for r in range(take):
                        e += 1 if (b >> r) & 1 else -1
                        m = min(m, e)
            wmin[w] = m
        wstart[nw] = e
        self._wstart = wstart
        size = 1
        while size < max(1, nw):
            size *= 2
        self._size = size
        mn = [_INF] * (2 * size)
        ct = [0] * (2 * size)
        for w in range(nw):
            mn[size + w] = wmin[w]
            ct[size + w] = self._count_in_word(w, wmin[w])
        for i in range(size - 1, 0, -1):
            a, b = mn[2 * i], mn[2 * i + 1]
            if a < b:
                mn[i], ct[i] = a, ct[2 * i]
            elif b < a:
                mn[i], ct[i] = b, ct[2 * i + 1]
            else:
                mn[i], ct[i] = a, ct[2 * i] + ct[2 * i + 1]
        self._mn = mn
        self._ct = ct
        self.nodes = n // 2
        # a single tree: excess never negative and reaches 0 only at the end
        if n and (e != 0 or mn[1] != 0 or ct[1] != 1):
            raise ValueError("parentheses do not encode a single balanced tree")

    @classmethod
    def from_tree(cls, degrees: Sequence[int]) -> "BPTree":
        """From a preorder degree sequence."""
        bits: list[int] = []
        stack: list[int] = []
        for d in degrees:
            bits.append(1)
            if d:
                stack.append(d)
            else:
                bits.append(0)
                while stack:
                    stack[-1] -= 1
                    if stack[-1]:
                        break
                    stack.pop()
                    bits.append(0)
        return cls(bits)

    # -- excess primitives ----------------------------------------------

    def excess(self, i: int) -> int:
        if i < 0:
            return 0
        return 2 * self.bv.rank1(i + 1) - (i + 1)

    def _count_in_word(self, w: int, value: int) -> int:
        lo = w * _WORD
        hi = min(self.bv.n, lo + _WORD) - 1
        return self._scan_count(lo, hi, value)

    def _scan_count(self, lo: int, hi: int, value: int) -> int:
        e = self.excess(lo - 1)
        c = 0
        words = self.bv.words
        for i in range(lo, hi + 1):
            e += 1 if (words[i >> 6] >> (i & 63)) & 1 else -1
            c += e == value
        return c

    def _scan_fwd(self, lo: int, hi: int, e: int, t: int) -> int:
        """First position j in [lo, hi] with excess(j) <= t; e = excess(lo-1)."""
        words = self.bv.words
        i = lo
        while i <= hi:
            if (i & 7) == 0 and i + 7 <= hi:
                b = (words[i >> 6] >> (i & 63)) & 0xFF
                if e + _BYTE_MIN[b] > t:
                    e += _BYTE_DELTA[b]
                    i += 8
                    continue
            e += 1 if (words[i >> 6] >> (i & 63)) & 1 else -1
            if e <= t:
                return i
            i += 1
        return -1

    def _scan_bwd(self, lo: int, hi: int, e: int, t: int) -> int:
        """Last position j in [lo, hi] with excess(j) <= t; e = excess(hi)."""
        words = self.bv.words
        i = hi
        while i >= lo:
            if (i & 7) == 7 and i - 7 >= lo:
                b = (words[i >> 6] >> ((i - 7) & 63)) & 0xFF
                start = e - _BYTE_DELTA[b]  # excess before the byte
                if start + _BYTE_MIN[b] > t:
                    e = start
                    i -= 8
                    continue
            if e <= t:
                return i
            e -= 1 if (words[i >> 6] >> (i & 63)) & 1 else -1
            i -= 1
        return -1

    def _first_word_le(self, a: int, t: int) -> int:
        size = self._size
        nw = len(self.bv.words)
        if a >= nw:
            return -1

        def go(node, nlo, nhi):
            if nhi < a or self._mn[node] > t:
                return -1
            if nlo == nhi:
                return nlo
            mid = (nlo + nhi) // 2
            r = go(2 * node, nlo, mid)
            return r if r >= 0 else go(2 * node + 1, mid + 1, nhi)

        return go(1, 0, size - 1)

    def _last_word_le(self, b: int, t: int) -> int:
        size = self._size
        if b < 0:
            return -1

        def go(node, nlo, nhi):
            if nlo > b or self._mn[node] > t:
                return -1
            if nlo == nhi:
                return nlo
            mid = (nlo + nhi) // 2
            r = go(2 * node + 1, mid + 1, nhi)
            return r if r >= 0 else go(2 * node, nlo, mid)

        return go(1, 0, size - 1)

    def fwd_le(self, i: int, t: int) -> int:
        """Smallest j > i with excess(j) <= t, or -1."""
        n = self.bv.n
        lo = i + 1
        if lo >= n:
            return -1
        word_end = min(n - 1, (lo | 63))
        j = self._scan_fwd(lo, word_end, self.excess(i), t)
        if j >= 0:
            return j
        w = self._first_word_le((lo >> 6) + 1, t)
        if w < 0:
            return -1
        s = w * _WORD
        return self._scan_fwd(s, min(n - 1, s + _WORD - 1), self._wstart[w], t)

    def bwd_le(self, i: int, t: int) -> int:
        """Largest j < i with excess(j) <= t; -1 stands for the virtual
        position before the sequence (excess 0); -2 if none."""
        hi = i - 1
        if hi >= 0:
            word_lo = hi & ~63
            j = self._scan_bwd(word_lo, hi, self.excess(hi), t)
            if j >= 0:
                return j
            w = self._last_word_le((hi >> 6) - 1, t)
            if w >= 0:
                s = w * _WORD
                e_end = self._wstart[w + 1]
                return self._scan_bwd(s, s + _WORD - 1, e_end, t)
        return -1 if t >= 0 else -2

    def range_min(self, i: int, j: int) -> tuple[int, int]:
        """(min excess, number of positions attaining it) over [i, j]."""
        if i > j:
            return _INF, 0
        wi, wj = i >> 6, j >> 6
        if wi == wj:
            return self._scan_min(i, j)
        best, cnt = self._scan_min(i, (wi << 6) + 63)
        if wj - wi > 1:
            m2, c2 = self._tree_min(wi + 1, wj - 1)
            best, cnt = _merge(best, cnt, m2, c2)
        m3, c3 = self._scan_min(wj << 6, j)
        return _merge(best, cnt, m3, c3)

    def _scan_min(self, lo: int, hi: int) -> tuple[int, int]:
        e = self.excess(lo - 1)
        words = self.bv.words
        m, c = _INF, 0
        for i in range(lo, hi + 1):
            e += 1 if (words[i >> 6] >> (i & 63)) & 1 else -1
            if e < m:
                m, c = e, 1
            elif e == m:
                c += 1
        return m, c

    def _tree_min(self, a: int, b: int) -> tuple[int, int]:
        size = self._size
        lo, hi = a + size, b + size + 1
        m, c = _INF, 0
        mn, ct = self._mn, self._ct
        while lo < hi:
            if lo & 1:
                m, c = _merge(m, c, mn[lo], ct[lo])
                lo += 1
            if hi & 1:
                hi -= 1
                m, c = _merge(m, c, mn[hi], ct[hi])
            lo //= 2
            hi //= 2
        return m, c

    def select_value(self, i: int, j: int, value: int, k: int) -> int:
        """Position of the k-th (1-based) occurrence of ``value`` in [i, j],
        where ``value`` is the range minimum; -1 if there are fewer."""
        wi, wj = i >> 6, j >> 6
        if wi == wj:
            return self._scan_select(i, j, value, k)
        end = (wi << 6) + 63
        c = self._scan_count(i, end, value)
        if c >= k:
            return self._scan_select(i, end, value, k)
        k -= c
        if wj - wi > 1:
            w, k = self._tree_select(wi + 1, wj - 1, value, k)
            if w >= 0:
                s = w << 6
                return self._scan_select(s, s + 63, value, k)
        return self._scan_select(wj << 6, j, value, k)

    def _scan_select(self, lo: int, hi: int, value: int, k: int) -> int:
        e = self.excess(lo - 1)
        words = self.bv.words
        for i in range(lo, hi + 1):
            e += 1 if (words[i >> 6] >> (i & 63)) & 1 else -1
            if e == value:
                k -= 1
                if k == 0:
                    return i
        return -1

    def _tree_select(self, a: int, b: int, value: int, k: int) -> tuple[int, int]:
        # walk the canonical cover of [a, b] left to right, descend into the
        # node holding the k-th occurrence
        size = self._size
        mn, ct = self._mn, self._ct
        left: list[int] = []
        right: list[int] = []
        lo, hi = a + size, b + size + 1
        while lo < hi:
            if lo & 1:
                left.append(lo)
                lo += 1
            if hi & 1:
                hi -= 1
                right.append(hi)
            lo //= 2
            hi //= 2
        for node in left + right[::-1]:
            c = ct[node] if mn[node] == value else 0
            if c >= k:
                while node < size:
                    l = 2 * node
                    cl = ct[l] if mn[l] == value else 0
                    if cl >= k:
                        node = l
                    else:
                        k -= cl
                        node = l + 1
                return node - size, k
            k -= c
        return -1, k

    # -- navigation -------------------------------------------------------

    def is_open(self, x: int) -> bool:
        return 0 <= x < self.bv.n and self.bv[x] == 1

    def _node(self, x: int) -> int:
        if not self.is_open(x):
            raise IndexError(f"no node at position {x}")
        return x

    def findclose(self, x: int) -> int:
        return self.fwd_le(x, self.excess(x) - 1)

    def enclose(self, x: int) -> int | None:
        if x == 0:
            return None
        return self.bwd_le(x, self.excess(x) - 2) + 1

    def parent(self, x: int) -> int | None:
        return self.enclose(self._node(x))

    def firstchild(self, x: int) -> int | None:
        self._node(x)
        return x + 1 if self.bv.n > x + 1 and self.bv[x + 1] else None

    def nextsibling(self, x: int) -> int | None:
        c = self.findclose(self._node(x)) + 1
        return c if c < self.bv.n and self.bv[c] else None

    def is_leaf(self, x: int) -> bool:
        return not self.bv[x + 1]

    def subtree_size(self, x: int) -> int:
        return (self.findclose(self._node(x)) - x + 1) // 2

    def preorder_rank(self, x: int) -> int:
        self._node(x)
        return self.bv.rank1(x + 1) - 1

    def preorder_select(self, i: int) -> int:
        if not 0 <= i < self.nodes:
            raise IndexError(f"preorder {i} out of range")
        return self.bv.select1(i + 1)

    def depth(self, x: int) -> int:
        return self.excess(self._node(x)) - 1

    def degree(self, x: int) -> int:
        self._node(x)
        if self.is_leaf(x):
            return 0
        c = self.findclose(x)
        m, cnt = self.range_min(x + 1, c - 1)
        return cnt

    def child(self, x: int, i: int) -> int:
        """The i-th (0-based) child."""
        self._node(x)
        if i < 0 or self.is_leaf(x):
            raise IndexError(f"node {x} has no child {i}")
        if i == 0:
            return x + 1
        c = self.findclose(x)
        pos = self.select_value(x + 1, c - 1, self.excess(x), i)
        if pos < 0 or pos + 1 >= c:
            raise IndexError(f"node {x} has no child {i}")
        return pos + 1

    def childrank(self, x: int) -> int:
        p = self.parent(x)
        if p is None or x == p + 1:
            return 0
        m, cnt = self.range_min(p + 1, x - 1)
        return cnt

    def level_ancestor(self, x: int, d: int) -> int | None:
        self._node(x)
        if d < 0:
            raise ValueError("level must be nonnegative")
        if d == 0:
            return x
        e = self.excess(x)
        if d >= e:
            return None
        return self.bwd_le(x, e - d - 1) + 1

    def lca(self, x: int, y: int) -> int:
        self._node(x)
        self._node(y)
        if x > y:
            x, y = y, x
        if x == y or y < self.findclose(x):
            return x
        m, _ = self.range_min(x, y)
        pos = self.select_value(x, y, m, 1)
        return self.enclose(pos + 1)

    def size_bits(self) -> int:
        # bits + rank directory + word start excess + range-min tree (min, count)
        nw = len(self.bv.words)
        return self.bv.size_bits() + 16 * nw + 2 * 16 * self._size

    def to_bytes(self) -> bytes:
        return self.bv.to_bytes()

    @classmethod
    def from_bytes(cls, data: bytes, offset: int = 0) -> tuple["BPTree", int]:
        bv, off = BitVector.from_bytes(data, offset)
        return cls(bv), off


def _merge(m1: int, c1: int, m2: int, c2: int) -> tuple[int, int]:
    if m1 < m2:
        return m1, c1
    if m2 < m1:
        return m2, c2
    return m1, c1 + c2
