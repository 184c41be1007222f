"""Entropy-coded random-access storage of the cluster label string P.

Both codecs write one codeword per position into a single bit stream and mark
codeword starts in a boundary bitvector, so position i is decoded by two
selects and one table lookup. The boosted codec draws each codeword from the
table of that position's context class; the class is supplied by the caller.
"""
from __future__ import annotations

import heapq
import math
import struct
from collections import Counter
from dataclasses import dataclass
from typing import Hashable, Sequence

from .entropy import h0_total
from .primitives import BitVector, BPTree

__all__ = [
    "HuffmanTable",
    "ZeroOrderCodec",
    "BoostedCodec",
    "ContextSampling",
    "zo_encode",
    "zo_access",
    "boosted_encode",
    "boosted_access",
    "choose_sampling",
    "default_period",
    "class_entropy_bound",
]


_MASK = (1 << 64) - 1


def _width(x: int) -> int:
    """Bits needed to write values in [0, x)."""
    return max(1, (max(1, x) - 1).bit_length())


class HuffmanTable:
    """Canonical Huffman code over integer symbols.

    A table with a single symbol uses the 1-bit code ``0``.
    """

    __slots__ = ("lengths", "codes", "decode_map")

    def __init__(self, lengths: dict[int, int]):
        if not lengths:
            raise ValueError("empty code table")
        self.lengths = dict(lengths)
        self.codes: dict[int, int] = {}
        self.decode_map: dict[tuple[int, int], int] = {}
        code = 0
        prev = 0
        for sym, ln in sorted(self.lengths.items(), key=lambda p: (p[1], p[0])):
            code <<= ln - prev
            prev = ln
            self.codes[sym] = code
            self.decode_map[ln, code] = sym
            code += 1
        if code > (1 << prev):
            raise ValueError("code lengths violate Kraft's inequality")

    @classmethod
    def from_counts(cls, counts: dict[int, int]) -> "HuffmanTable":
        if len(counts) == 1:
            return cls({next(iter(counts)): 1})
        heap = [(c, i, (s,)) for i, (s, c) in enumerate(sorted(counts.items()))]
        heapq.heapify(heap)
        depth = Counter()
        tick = len(heap)
        while len(heap) > 1:
            c1, _, g1 = heapq.heappop(heap)
            c2, _, g2 = heapq.heappop(heap)
            for s in g1 + g2:
                depth[s] += 1
            heapq.heappush(heap, (c1 + c2, tick, g1 + g2))
            tick += 1
        return cls(dict(depth))

    def encode(self, sym: int) -> tuple[int, int]:
        return self.lengths[sym], self.codes[sym]

    def decode(self, length: int, code: int) -> int:
        return self.decode_map[length, code]

    def payload(self, counts: dict[int, int]) -> int:
        return sum(c * self.lengths[s] for s, c in counts.items())

    def dictionary_bits(self, symbol_width: int) -> int:
        maxlen = max(self.lengths.values())
        return 32 + len(self.lengths) * (symbol_width + _width(maxlen + 1))

    def to_bytes(self) -> bytes:
        items = sorted(self.lengths.items())
        return struct.pack("<I", len(items)) + b"".join(struct.pack("<IB", s, l) for s, l in items)

    @classmethod
    def from_bytes(cls, data: bytes, off: int) -> tuple["HuffmanTable", int]:
        (cnt,) = struct.unpack_from("<I", data, off)
        off += 4
        lengths = {}
        for _ in range(cnt):
            s, l = struct.unpack_from("<IB", data, off)
            lengths[s] = l
            off += 5
        return cls(lengths), off


def _write_stream(symbols: Sequence[int], tables: Sequence[HuffmanTable]) -> tuple[BitVector, BitVector]:
    words: list[int] = []
    starts: list[int] = []
    acc = 0  # bits from position 64 * len(words) on
    pos = 0
    for s, tab in zip(symbols, tables):
        ln, code = tab.encode(s)
        starts.append(pos)
        # codeword stored most significant bit first
        rev = int(format(code, f"0{ln}b")[::-1], 2)
        acc |= rev << (pos - 64 * len(words))
        pos += ln
        while pos - 64 * len(words) >= 64:
            words.append(acc & _MASK)
            acc >>= 64
    if pos > 64 * len(words):
        words.append(acc)
    stream = BitVector(words=words, length=pos)
    return stream, BitVector.from_positions(starts, pos)


def _read(stream: BitVector, boundary: BitVector, i: int) -> tuple[int, int]:
    if not 0 <= i < boundary.ones:
        raise IndexError(f"position {i} out of range")
    a = boundary.select1(i + 1)
    b = boundary.select1(i + 2) if i + 1 < boundary.ones else boundary.n
    code = 0
    for p in range(a, b):
        code = (code << 1) | stream[p]
    return b - a, code


@dataclass(frozen=True)
class ZeroOrderCodec:
    table: HuffmanTable
    stream: BitVector
    boundary: BitVector
    symbol_width: int

    def __len__(self) -> int:
        return self.boundary.ones

    def access(self, i: int) -> int:
        return self.table.decode(*_read(self.stream, self.boundary, i))

    @property
    def payload_bits(self) -> int:
        return self.stream.n

    @property
    def dictionary_bits(self) -> int:
        return self.table.dictionary_bits(self.symbol_width)

    @property
    def boundary_bits(self) -> int:
        return self.boundary.size_bits()

    def to_bytes(self) -> bytes:
        return (struct.pack("<I", self.symbol_width) + self.table.to_bytes()
                + self.stream.to_bytes() + self.boundary.to_bytes())

    @classmethod
    def from_bytes(cls, data: bytes, off: int = 0) -> tuple["ZeroOrderCodec", int]:
        (sw,) = struct.unpack_from("<I", data, off)
        table, off = HuffmanTable.from_bytes(data, off + 4)
        stream, off = BitVector.from_bytes(data, off)
        boundary, off = BitVector.from_bytes(data, off)
        return cls(table, stream, boundary, sw), off


def zo_encode(P: Sequence[int]) -> ZeroOrderCodec:
    if len(P) == 0:
        raise ValueError("cannot encode an empty label string")
    counts = Counter(P)
    table = HuffmanTable.from_counts(counts)
    stream, boundary = _write_stream(P, [table] * len(P))
    return ZeroOrderCodec(table, stream, boundary, _width(max(counts) + 1))


def zo_access(c: ZeroOrderCodec, i: int) -> int:
    return c.access(i)


@dataclass(frozen=True)
class BoostedCodec:
    """Per-context Huffman tables over one shared stream."""

    tables: dict[tuple, HuffmanTable]
    stream: BitVector
    boundary: BitVector
    symbol_width: int
    context_width: int  # bits per stored context symbol
    class_sizes: dict[tuple, int]

    def __len__(self) -> int:
        return self.boundary.ones

    def access(self, i: int, ctx: tuple) -> int:
        tab = self.tables.get(tuple(ctx))
        if tab is None:
            raise KeyError(f"unknown context {tuple(ctx)!r} for position {i}")
        key = _read(self.stream, self.boundary, i)
        try:
            return tab.decode(*key)
        except KeyError:
            raise KeyError(f"codeword at position {i} is not in the table of context "
                           f"{tuple(ctx)!r}") from None

    @property
    def payload_bits(self) -> int:
        return self.stream.n

    @property
    def dictionary_bits(self) -> int:
        bits = 32
        for ctx, tab in self.tables.items():
            bits += 8 + len(ctx) * self.context_width + tab.dictionary_bits(self.symbol_width)
        return bits

    @property
    def boundary_bits(self) -> int:
        return self.boundary.size_bits()

    def to_bytes(self) -> bytes:
        out = [struct.pack("<III", self.symbol_width, self.context_width, len(self.tables))]
        for ctx in sorted(self.tables):
            out.append(struct.pack("<BI", len(ctx), self.class_sizes[ctx]))
            out.append(struct.pack(f"<{len(ctx)}I", *ctx))
            out.append(self.tables[ctx].to_bytes())
        out.append(self.stream.to_bytes())
        out.append(self.boundary.to_bytes())
        return b"".join(out)

    @classmethod
    def from_bytes(cls, data: bytes, off: int = 0) -> tuple["BoostedCodec", int]:
        sw, cw, cnt = struct.unpack_from("<III", data, off)
        off += 12
        tables, sizes = {}, {}
        for _ in range(cnt):
            ln, size = struct.unpack_from("<BI", data, off)
            off += 5
            ctx = struct.unpack_from(f"<{ln}I", data, off)
            off += 4 * ln
            tables[ctx], off = HuffmanTable.from_bytes(data, off)
            sizes[ctx] = size
        stream, off = BitVector.from_bytes(data, off)
        boundary, off = BitVector.from_bytes(data, off)
        return cls(tables, stream, boundary, sw, cw, sizes), off


def boosted_encode(P: Sequence[int], contexts: Sequence[Hashable], *,
                   context_width: int = 8) -> BoostedCodec:
    if len(P) != len(contexts):
        raise ValueError("one context per position is required")
    if len(P) == 0:
        raise ValueError("cannot encode an empty label string")
    by_class: dict[tuple, Counter] = {}
    for s, K in zip(P, contexts):
        by_class.setdefault(tuple(K), Counter())[s] += 1
    tables = {K: HuffmanTable.from_counts(c) for K, c in by_class.items()}
    stream, boundary = _write_stream(P, [tables[tuple(K)] for K in contexts])
    sizes = {K: sum(c.values()) for K, c in by_class.items()}
    return BoostedCodec(tables, stream, boundary, _width(max(P) + 1), context_width, sizes)


def boosted_access(c: BoostedCodec, i: int, ctx: tuple) -> int:
    return c.access(i, ctx)


def class_entropy_bound(P: Sequence[int], contexts: Sequence[Hashable]) -> float:
    """sum over context classes of |P_K| H0(P_K)."""
    by_class: dict[Hashable, Counter] = {}
    for s, K in zip(P, contexts):
        by_class.setdefault(tuple(K), Counter())[s] += 1
    return sum(h0_total(c) for c in by_class.values())


def default_period(n: int) -> int:
    """ceil(log2 n / log2 log2 n) for n >= 4, else 1."""
    if n < 4:
        return 1
    return max(1, math.ceil(math.log2(n) / math.log2(math.log2(n))))


@dataclass(frozen=True)
class ContextSampling:
    """Explicit contexts for T' nodes at one depth residue class, plus the root.

    ``marker`` is indexed by T' preorder; ``contexts[j]`` belongs to the j-th
    marked node.
    """

    d: int
    residue: int
    marker: BitVector
    contexts: tuple[tuple[int, ...], ...]
    k: int
    symbol_width: int

    def is_sampled(self, u: int) -> bool:
        return self.marker[u] == 1

    def context(self, u: int) -> tuple[int, ...]:
        if not self.marker[u]:
            raise KeyError(f"T' node {u} is not sampled")
        return self.contexts[self.marker.rank1(u)]

    @property
    def sampled(self) -> int:
        return self.marker.ones

    @property
    def entry_bits(self) -> int:
        return self.k * self.symbol_width + _width(self.k + 1)

    def size_bits(self) -> int:
        return self.marker.size_bits() + self.sampled * self.entry_bits

    def to_bytes(self) -> bytes:
        out = [struct.pack("<IIII", self.d, self.residue, self.k, self.symbol_width),
               self.marker.to_bytes()]
        for K in self.contexts:
            out.append(struct.pack(f"<B{len(K)}I", len(K), *K))
        return b"".join(out)

    @classmethod
    def from_bytes(cls, data: bytes, off: int = 0) -> tuple["ContextSampling", int]:
        d, res, k, sw = struct.unpack_from("<IIII", data, off)
        marker, off = BitVector.from_bytes(data, off + 16)
        ctxs = []
        for _ in range(marker.ones):
            (ln,) = struct.unpack_from("<B", data, off)
            ctxs.append(struct.unpack_from(f"<{ln}I", data, off + 1))
            off += 1 + 4 * ln
        return cls(d, res, marker, tuple(ctxs), k, sw), off


def choose_sampling(tprime: BPTree, d: int, contexts: Sequence[tuple[int, ...]] | None = None,
                    k: int = 0, sigma: int = 1) -> ContextSampling:
    """Sample the least populated depth class modulo d (and the root)."""
    if d < 1:
        raise ValueError("sampling period d must be >= 1")
    depths = []
    e = 0
    for b in tprime.bv:
        if b:
            depths.append(e)
            e += 1
        else:
            e -= 1
    hist = Counter(x % d for x in depths)
    residue = min(range(d), key=lambda r: (hist.get(r, 0), r))
    chosen = [u for u, x in enumerate(depths) if u == 0 or x % d == residue]
    marker = BitVector.from_positions(chosen, len(depths))
    ctx = tuple(tuple(contexts[u]) for u in chosen) if contexts is not None else tuple(() for _ in chosen)
    sw = _width(sigma) if sigma > 1 else 0
    return ContextSampling(d, residue, marker, ctx, k, sw)
