"""The assembled compressed labeled tree.

Stored parts: the cluster tree T' in balanced parentheses, the cluster label
string P under one of the two codecs, the degree-sequence index (D_u, B_u), the
per-child root counts as partial sums, signed depth weights split into two
partial sums, the node map (run starts over the source preorder plus run marks
over T' parentheses), the cluster dictionary and, for the boosted codec, the
sampled explicit contexts.

Derived indexes (binary lifting over T', cumulative cluster depths, per-label
structures) are rebuilt from the stored parts on load.

Public node ids are source-tree preorder ranks. Internally a node is a pair
(T' node in preorder, index in the cluster's local preorder).
"""
from __future__ import annotations

import json
import math
import struct
import zlib
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .clustering import (ClusterShape, auto_m, build_cluster_structure, cluster_greedy)
from .codec import (BoostedCodec, ContextSampling, ZeroOrderCodec, _width, boosted_encode,
                    choose_sampling, class_entropy_bound, default_period, zo_encode)
from .entropy import all_measures, h0_total
from .primitives import BitVector, BPTree, PartialSums
from .tree import LABEL_OPS, QUERY_OPS, LabeledTree

__all__ = [
    "DegreeSequenceIndex",
    "SuccinctLabeledTree",
    "UnsupportedQuery",
    "CorruptContainer",
    "MAGIC",
]

MAGIC = b"LTSX1"
_VERSION = 1


class UnsupportedQuery(RuntimeError):
    pass


class CorruptContainer(ValueError):
    pass


class DegreeSequenceIndex:
    """Unary-coded per-port child counts of every T' node.

    ``D_u`` concatenates ``0^c 1`` over the ports of each node in T' preorder;
    ``B_u`` marks the first bit of each node's run. A node without ports is
    written as the single sequence (0).
    """

    __slots__ = ("du", "bu")

    def __init__(self, du: BitVector, bu: BitVector):
        if len(du) != len(bu):
            raise ValueError("D_u and B_u must have equal length")
        self.du = du
        self.bu = bu

    @classmethod
    def from_sequences(cls, seqs: Sequence[Sequence[int]]) -> "DegreeSequenceIndex":
        du: list[int] = []
        bu: list[int] = []
        for seq in seqs:
            seq = list(seq) or [0]
            first = True
            for c in seq:
                if c < 0:
                    raise ValueError("negative child count")
                bits = [0] * c + [1]
                du.extend(bits)
                bu.extend([1 if first else 0] + [0] * c)
                first = False
        return cls(BitVector(du), BitVector(bu))

    def __len__(self) -> int:
        return self.bu.ones

    def _segment(self, u: int) -> tuple[int, int]:
        if not 0 <= u < self.bu.ones:
            raise IndexError(f"T' node {u} out of range")
        a = self.bu.select1(u + 1)
        b = self.bu.select1(u + 2) if u + 1 < self.bu.ones else self.bu.n
        return a, b

    def sequence(self, u: int) -> list[int]:
        a, b = self._segment(u)
        out, c = [], 0
        for i in range(a, b):
            if self.du[i]:
                out.append(c)
                c = 0
            else:
                c += 1
        return out

    def ports(self, u: int) -> int:
        a, b = self._segment(u)
        return self.du.rank1(b) - self.du.rank1(a)

    def degree(self, u: int) -> int:
        a, b = self._segment(u)
        return self.du.rank0(b) - self.du.rank0(a)

    def child_base(self, u: int) -> int:
        """Global index of u's first child among all T' edges (zeros of D_u)."""
        return self.du.rank0(self._segment(u)[0])

    def port_to_child_range(self, u: int, p: int) -> tuple[int, int]:
        """Children i1..i2-1 of u hang from port p (both 0-based)."""
        a, b = self._segment(u)
        ones_before = self.du.rank1(a)
        if not 0 <= p < self.du.rank1(b) - ones_before:
            raise IndexError(f"T' node {u} has no port {p}")
        end = self.du.select1(ones_before + p + 1)
        i2 = end - p - a
        if p == 0:
            return 0, i2
        prev = self.du.select1(ones_before + p)
        return prev - (p - 1) - a, i2

    def child_to_port(self, u: int, x: int) -> int:
        a, b = self._segment(u)
        z0 = self.du.rank0(a)
        if not 0 <= x < self.du.rank0(b) - z0:
            raise IndexError(f"T' node {u} has no child {x}")
        pos = self.du.select0(z0 + x + 1)
        return self.du.rank1(pos) - self.du.rank1(a)

    def size_bits(self) -> int:
        return self.du.size_bits() + self.bu.size_bits()


def _shape_bytes(s: ClusterShape) -> bytes:
    return (struct.pack("<I", s.n) + struct.pack(f"<{s.n}I", *s.degrees)
            + bytes(int(p) for p in s.ports) + struct.pack(f"<{s.n}I", *s.labels))


def _shape_from(data: bytes, off: int) -> tuple[ClusterShape, int]:
    (n,) = struct.unpack_from("<I", data, off)
    off += 4
    degs = struct.unpack_from(f"<{n}I", data, off)
    off += 4 * n
    ports = [bool(b) for b in data[off:off + n]]
    off += n
    labels = struct.unpack_from(f"<{n}I", data, off)
    return ClusterShape(degs, ports, labels), off + 4 * n


@dataclass(frozen=True)
class BuildParams:
    m: int
    k: int
    codec: str
    d: int
    sigma_small: int


class SuccinctLabeledTree:
    """Compressed labeled tree with navigation queries; build with
    :meth:`build` or :meth:`load`."""

    # -- construction -------------------------------------------------------

    @classmethod
    def build(cls, t: LabeledTree, m: int | str = "auto", k: int = 0, codec: str = "plain",
              d: int | None = None, sigma_small: int = 16,
              precompute: bool = False) -> "SuccinctLabeledTree":
        if k < 0:
            raise ValueError("k must be nonnegative")
        if codec not in ("plain", "boosted"):
            raise ValueError(f"codec must be 'plain' or 'boosted', not {codec!r}")
        if m == "auto":
            m = auto_m(t.n, t.sigma)
        m = int(m)
        clustering = cluster_greedy(t, m)
        cs = build_cluster_structure(t, clustering, k)
        tp = cs.tprime
        nt = tp.n
        bp = BPTree.from_tree(tp.degree)
        P = list(tp.labels)
        if codec == "plain":
            lab_codec = zo_encode(P)
            sampling = None
            d = 1 if d is None else d
        else:
            lab_codec = boosted_encode(P, cs.contexts, context_width=_width(t.sigma))
            d = default_period(t.n) if d is None else d
            sampling = choose_sampling(bp, d, cs.contexts, k, t.sigma)
        seqs = cs.degree_sequences
        dsi = DegreeSequenceIndex.from_sequences(seqs)
        children = [tp.children(u) for u in range(nt)]
        tseq = [len(cs.dictionary[P[w]].roots) for u in range(nt) for w in children[u]]
        # depth weights over parenthesis positions
        pos_w = [0] * (2 * nt)
        neg_w = [0] * (2 * nt)
        opens = [0] * nt
        closes = [0] * nt
        # preorder open positions and matching closes
        u = 0
        stack = []
        for i, b in enumerate(bp.bv):
            if b:
                opens[u] = i
                stack.append(u)
                u += 1
            else:
                closes[stack.pop()] = i
        weight = [0] * nt
        resumes = []  # T' nodes after whose subtree the parent cluster resumes
        for u in range(nt):
            shape = cs.dictionary[P[u]]
            x = 0
            for p, c in enumerate(seqs[u]):
                q = shape.port_list[p]
                for _ in range(c):
                    w = children[u][x]
                    weight[w] = shape.depth[q] + 1
                    x += 1
                if q != shape.n - 1:
                    resumes.append(children[u][x - 1])
        for w in range(1, nt):
            pos_w[opens[w]] = weight[w]
            neg_w[closes[w]] = weight[w]
        # node map: run starts over source preorder, run marks over parentheses
        cof = clustering.cluster_of
        local = [0] * t.n
        for cid, mem in enumerate(cs.members):
            for j, v in enumerate(mem):
                local[v] = j
        run = [0]
        for g in range(1, t.n):
            if cof[g] != cof[g - 1] or local[g] != local[g - 1] + 1:
                run.append(g)
        marks = list(opens) + [closes[w] for w in resumes]
        marks.sort()
        if len(marks) != len(run):
            raise AssertionError("node map run count mismatch")
        self = cls.__new__(cls)
        self.params = BuildParams(m, k, codec, d, sigma_small)
        self.n = t.n
        self.alphabet = tuple(t.alphabet)
        self.bp = bp
        self.codec = lab_codec
        self.dsi = dsi
        self.tsum = PartialSums(tseq)
        self.dpos = PartialSums(pos_w)
        self.dneg = PartialSums(neg_w)
        self.runs = BitVector.from_positions(run, t.n)
        self.run_marks = BitVector.from_positions(marks, 2 * nt)
        self.dictionary = [_shape_bytes(s) for s in cs.dictionary]
        self.sampling = sampling
        self._cache: dict[int, ClusterShape] = {}
        self._derive(P)
        if precompute:
            self.precompute()
        return self

    def precompute(self) -> None:
        for lab in range(len(self.dictionary)):
            self._shape_by_label(lab)

    def _derive(self, P: Sequence[int] | None = None) -> None:
        nt = self.bp.nodes
        if P is None:
            P = self._decode_labels()
        par = np.full(nt, -1, dtype=np.int64)
        stack = []
        u = 0
        for b in self.bp.bv:
            if b:
                if stack:
                    par[u] = stack[-1]
                stack.append(u)
                u += 1
            else:
                stack.pop()
        levels = max(1, (nt - 1).bit_length())
        up = np.empty((levels, nt), dtype=np.int64)
        up[0] = par
        for j in range(1, levels):
            prev = up[j - 1]
            up[j] = np.where(prev >= 0, prev[np.maximum(prev, 0)], -1)
        self._up = up
        # cumulative depth of each cluster's roots, parents precede children
        weights = np.zeros(nt, dtype=np.int64)
        for w in range(1, nt):
            weights[w] = self.dpos.value(self.bp.preorder_select(w) + 1)
        cum = np.zeros(nt, dtype=np.int64)
        for w in range(1, nt):
            cum[w] = cum[par[w]] + weights[w]
        self._cum = cum
        self._label_index = None
        if len(self.alphabet) <= self.params.sigma_small:
            self._label_index = self._build_label_index(P, par)

    def _build_label_index(self, P: Sequence[int], par: np.ndarray) -> dict:
        nt = len(P)
        sigma = len(self.alphabet)
        children: list[list[int]] = [[] for _ in range(nt)]
        for w in range(1, nt):
            children[int(par[w])].append(w)
        root_counts = {a: [] for a in range(sigma)}
        local_cnt = np.zeros((sigma, nt), dtype=np.int64)  # a-nodes on local path to port
        for u in range(nt):
            shape = self._shape_by_label(P[u])
            for x, w in enumerate(children[u]):
                wshape = self._shape_by_label(P[w])
                c = Counter(wshape.labels[r] for r in wshape.roots)
                for a in range(sigma):
                    root_counts[a].append(c.get(a, 0))
                q = shape.port_list[self.dsi.child_to_port(u, x)]
                while q >= 0:
                    local_cnt[shape.labels[q], w] += 1
                    q = shape.parent[q]
        opens = [self.bp.preorder_select(u) for u in range(nt)]
        index = {"tsum": [], "dpos": [], "dneg": [], "cum": []}
        for a in range(sigma):
            pw = [0] * (2 * nt)
            nw = [0] * (2 * nt)
            cum = np.zeros(nt, dtype=np.int64)
            for w in range(1, nt):
                c = int(local_cnt[a, w])
                pw[opens[w]] = c
                nw[self.bp.findclose(opens[w])] = c
                cum[w] = cum[par[w]] + c
            index["tsum"].append(PartialSums(root_counts[a]))
            index["dpos"].append(PartialSums(pw))
            index["dneg"].append(PartialSums(nw))
            index["cum"].append(cum)
        return index

    # -- internals ----------------------------------------------------------

    def _shape_by_label(self, lab: int) -> ClusterShape:
        shape = self._cache.get(lab)
        if shape is None:
            # duplicate decodes under concurrency are harmless; setdefault
            # publishes a complete object or keeps the existing one
            shape = self._cache.setdefault(lab, _shape_from(self.dictionary[lab], 0)[0])
        return shape

    @property
    def tprime_nodes(self) -> int:
        return self.bp.nodes

    def _open(self, u: int) -> int:
        return self.bp.preorder_select(u)

    def _tparent(self, u: int) -> int:
        return int(self._up[0, u])

    def _tchildrank(self, u: int) -> int:
        return self.bp.childrank(self._open(u))

    def _tchild(self, u: int, x: int) -> int:
        return self.bp.preorder_rank(self.bp.child(self._open(u), x))

    def _port_context(self, shape: ClusterShape, q: int, ctx: tuple) -> tuple:
        k = self.params.k
        if k == 0:
            return ()
        path = []
        while q >= 0 and len(path) < k:
            path.append(shape.labels[q])
            q = shape.parent[q]
        return (ctx + tuple(reversed(path)))[-k:]

    def _child_context(self, u: int, ctx: tuple, shape: ClusterShape, x: int) -> tuple:
        q = shape.port_list[self.dsi.child_to_port(u, x)]
        return self._port_context(shape, q, ctx)

    def context_walk(self, u: int) -> tuple[tuple, int]:
        """Context of T' node u and the number of upward steps to a sampled node."""
        path = []
        s = self.sampling
        while not s.is_sampled(u):
            path.append(u)
            u = self._tparent(u)
        ctx = s.context(u)
        steps = len(path)
        for w in reversed(path):
            shape = self._shape_by_label(self.codec.access(u, ctx))
            ctx = self._child_context(u, ctx, shape, self._tchildrank(w))
            u = w
        return ctx, steps

    def _label(self, u: int) -> int:
        if self.sampling is None:
            return self.codec.access(u)
        return self.codec.access(u, self.context_walk(u)[0])

    def _shape(self, u: int) -> ClusterShape:
        return self._shape_by_label(self._label(u))

    def _decode_labels(self) -> list[int]:
        nt = self.bp.nodes
        if self.sampling is None:
            return [self.codec.access(u) for u in range(nt)]
        P = [0] * nt
        ctxs: list[tuple] = [()] * nt
        seen = [0] * nt  # children visited so far
        stack: list[int] = []
        u = 0
        for b in self.bp.bv:
            if not b:
                stack.pop()
                continue
            if stack:
                p = stack[-1]
                shape = self._shape_by_label(P[p])
                ctxs[u] = self._child_context(p, ctxs[p], shape, seen[p])
                seen[p] += 1
            P[u] = self.codec.access(u, ctxs[u])
            stack.append(u)
            u += 1
        return P

    def _to_global(self, u: int, j: int, shape: ClusterShape) -> int:
        p = shape.ports_before(j)
        if p == 0:
            run = self.run_marks.rank1(self._open(u))
            return self.runs.select1(run + 1) + j
        i2 = self.dsi.port_to_child_range(u, p - 1)[1]
        w = self.bp.child(self._open(u), i2 - 1)
        run = self.run_marks.rank1(self.bp.findclose(w))
        return self.runs.select1(run + 1) + j - shape.port_list[p - 1] - 1

    def _resolve(self, g: int) -> tuple[int, int, ClusterShape]:
        if not 0 <= g < self.n:
            raise IndexError(f"node {g} out of range")
        r = self.runs.rank1(g + 1) - 1
        off = g - self.runs.select1(r + 1)
        pos = self.run_marks.select1(r + 1)
        if self.bp.bv[pos]:
            u = self.bp.preorder_rank(pos)
            return u, off, self._shape(u)
        w = self.bp.preorder_rank(self.bp.bwd_le(pos, self.bp.excess(pos)) + 1)
        u = self._tparent(w)
        shape = self._shape(u)
        p = self.dsi.child_to_port(u, self._tchildrank(w))
        return u, shape.port_list[p] + 1 + off, shape

    def _cluster_depth(self, u: int) -> int:
        i = self._open(u) + 1
        return self.dpos.prefix(i) - self.dneg.prefix(i)

    def _parent_port(self, u: int) -> tuple[int, ClusterShape, int]:
        """Parent T' node of u (u > 0), its shape and the local port index."""
        a = self._tparent(u)
        shape = self._shape(a)
        return a, shape, shape.port_list[self.dsi.child_to_port(a, self._tchildrank(u))]

    def _local_or_up(self, u: int, shape: ClusterShape, a: int, b: int) -> int:
        r = shape.lca(a, b)
        if r >= 0:
            return self._to_global(u, r, shape)
        # different trees of one forest meet at the parent port
        pu, pshape, q = self._parent_port(u)
        return self._to_global(pu, q, pshape)

    def _climb(self, u: int, keep) -> int:
        """Highest ancestor x of u (u included) such that keep(y) holds for
        every node on the path from u to x."""
        up = self._up
        for j in range(up.shape[0] - 1, -1, -1):
            y = int(up[j, u])
            if y >= 0 and keep(y):
                u = y
        return u

    # -- queries ------------------------------------------------------------

    def label(self, v: int) -> int:
        u, j, shape = self._resolve(v)
        return shape.labels[j]

    def label_token(self, v: int) -> str:
        return self.alphabet[self.label(v)]

    def preorder_rank(self, v: int) -> int:
        self._resolve(v)
        return v

    def preorder_select(self, i: int) -> int:
        if not 0 <= i < self.n:
            raise IndexError(f"node {i} out of range")
        return i

    def parent(self, v: int) -> int | None:
        u, j, shape = self._resolve(v)
        p = shape.parent[j]
        if p >= 0:
            return self._to_global(u, p, shape)
        if u == 0:
            return None
        pu, pshape, q = self._parent_port(u)
        return self._to_global(pu, q, pshape)

    def firstchild(self, v: int) -> int | None:
        u, j, shape = self._resolve(v)
        if shape.children[j]:
            return self._to_global(u, shape.children[j][0], shape)
        if not shape.ports[j]:
            return None
        i1, _ = self.dsi.port_to_child_range(u, shape.port_index[j])
        w = self._tchild(u, i1)
        return self._to_global(w, 0, self._shape(w))

    def nextsibling(self, v: int) -> int | None:
        u, j, shape = self._resolve(v)
        p = shape.parent[j]
        if p >= 0:
            sib = shape.children[p]
            r = shape.rank[j] + 1
            return self._to_global(u, sib[r], shape) if r < len(sib) else None
        r = shape.rank[j] + 1
        if r < len(shape.roots):
            return self._to_global(u, shape.roots[r], shape)
        if u == 0:
            return None
        nxt = self.bp.nextsibling(self._open(u))
        if nxt is None:
            return None
        w = self.bp.preorder_rank(nxt)
        a = self._tparent(u)
        # the next T' sibling must hang from the same port
        if self.dsi.child_to_port(a, self._tchildrank(w)) != self.dsi.child_to_port(a, self._tchildrank(u)):
            return None
        return self._to_global(w, 0, self._shape(w))

    def child(self, v: int, i: int) -> int:
        u, j, shape = self._resolve(v)
        if i < 0:
            raise IndexError(f"node {v} has no child {i}")
        if not shape.ports[j]:
            ch = shape.children[j]
            if i >= len(ch):
                raise IndexError(f"node {v} has no child {i}")
            return self._to_global(u, ch[i], shape)
        i1, i2 = self.dsi.port_to_child_range(u, shape.port_index[j])
        base = self.dsi.child_base(u)
        before = self.tsum.prefix(base + i1)
        z = self.tsum.find(before + i + 1)
        if z > base + i2:
            raise IndexError(f"node {v} has no child {i}")
        w = self._tchild(u, z - 1 - base)
        wshape = self._shape(w)
        return self._to_global(w, wshape.roots[before + i - self.tsum.prefix(z - 1)], wshape)

    def childrank(self, v: int) -> int:
        u, j, shape = self._resolve(v)
        if shape.parent[j] >= 0 or u == 0:
            return shape.rank[j]
        a = self._tparent(u)
        x = self._tchildrank(u)
        i1, _ = self.dsi.port_to_child_range(a, self.dsi.child_to_port(a, x))
        base = self.dsi.child_base(a)
        return self.tsum.sum(base + i1 + 1, base + x) + shape.rank[j]

    def depth(self, v: int) -> int:
        u, j, shape = self._resolve(v)
        return self._cluster_depth(u) + shape.depth[j]

    def level_ancestor(self, v: int, i: int) -> int | None:
        if i < 0:
            raise ValueError("level must be nonnegative")
        u, j, shape = self._resolve(v)
        if i <= shape.depth[j]:
            return self._to_global(u, shape.ancestor(j, i), shape)
        target = self._cluster_depth(u) + shape.depth[j] - i
        if target < 0:
            return None
        cum = self._cum
        b = self._climb(u, lambda y: cum[y] > target)
        a, ashape, q = self._parent_port(b)
        return self._to_global(a, ashape.ancestor(q, ashape.depth[q] - (target - int(cum[a]))), ashape)

    def lca(self, v: int, w: int) -> int:
        u1, j1, s1 = self._resolve(v)
        u2, j2, s2 = self._resolve(w)
        if u1 == u2:
            return self._local_or_up(u1, s1, j1, j2)
        l = self.bp.preorder_rank(self.bp.lca(self._open(u1), self._open(u2)))
        ls = self._shape(l)
        a = j1 if l == u1 else self._port_towards(l, ls, u1)
        b = j2 if l == u2 else self._port_towards(l, ls, u2)
        return self._local_or_up(l, ls, a, b)

    def _port_towards(self, l: int, shape: ClusterShape, u: int) -> int:
        o = self._open(l)
        c = self.bp.level_ancestor(self._open(u), self.bp.depth(self._open(u)) - self.bp.depth(o) - 1)
        return shape.port_list[self.dsi.child_to_port(l, self.bp.childrank(c))]

    def query(self, op: str, *args):
        if op in LABEL_OPS:
            return self.labeled_query(op, *args)
        if op not in QUERY_OPS:
            raise ValueError(f"unknown query {op!r}")
        return getattr(self, op)(*args)

    # -- labeled queries ----------------------------------------------------

    def label_id(self, a) -> int:
        if isinstance(a, str):
            try:
                return self.alphabet.index(a)
            except ValueError:
                raise KeyError(f"unknown label {a!r}") from None
        if not 0 <= a < len(self.alphabet):
            raise KeyError(f"unknown label id {a}")
        return a

    def _labels_ready(self) -> dict:
        if self._label_index is None:
            raise UnsupportedQuery(
                f"labeled queries need an alphabet of at most sigma_small="
                f"{self.params.sigma_small} labels (this tree has {len(self.alphabet)}); "
                "rebuild with a larger sigma_small")
        return self._label_index

    def childrank_label(self, v: int, a) -> int:
        idx = self._labels_ready()
        a = self.label_id(a)
        u, j, shape = self._resolve(v)
        p = shape.parent[j]
        if p >= 0:
            sib = shape.children[p]
            return sum(1 for s in sib[:shape.rank[j]] if shape.labels[s] == a)
        local = sum(1 for s in shape.roots[:shape.rank[j]] if shape.labels[s] == a)
        if u == 0:
            return local
        par = self._tparent(u)
        x = self._tchildrank(u)
        i1, _ = self.dsi.port_to_child_range(par, self.dsi.child_to_port(par, x))
        base = self.dsi.child_base(par)
        return idx["tsum"][a].sum(base + i1 + 1, base + x) + local

    def childselect_label(self, v: int, i: int, a) -> int | None:
        idx = self._labels_ready()
        a = self.label_id(a)
        if i < 1:
            raise ValueError("childselect_label counts from 1")
        u, j, shape = self._resolve(v)
        if not shape.ports[j]:
            hits = [c for c in shape.children[j] if shape.labels[c] == a]
            return self._to_global(u, hits[i - 1], shape) if i <= len(hits) else None
        ts = idx["tsum"][a]
        i1, i2 = self.dsi.port_to_child_range(u, shape.port_index[j])
        base = self.dsi.child_base(u)
        before = ts.prefix(base + i1)
        z = ts.find(before + i)
        if z > base + i2:
            return None
        w = self._tchild(u, z - 1 - base)
        wshape = self._shape(w)
        hits = [r for r in wshape.roots if wshape.labels[r] == a]
        return self._to_global(w, hits[before + i - ts.prefix(z - 1) - 1], wshape)

    def _cluster_count(self, a: int, u: int) -> int:
        idx = self._label_index
        i = self._open(u) + 1
        return idx["dpos"][a].prefix(i) - idx["dneg"][a].prefix(i)

    def depth_label(self, v: int, a) -> int:
        self._labels_ready()
        a = self.label_id(a)
        u, j, shape = self._resolve(v)
        c = 0
        q = shape.parent[j]
        while q >= 0:
            c += shape.labels[q] == a
            q = shape.parent[q]
        return self._cluster_count(a, u) + c

    def level_ancestor_label(self, v: int, i: int, a) -> int | None:
        idx = self._labels_ready()
        a = self.label_id(a)
        if i < 1:
            raise ValueError("level_ancestor_label counts from 1")
        u, j, shape = self._resolve(v)
        # walk the local proper ancestors first
        q = shape.parent[j]
        while q >= 0:
            if shape.labels[q] == a:
                i -= 1
                if i == 0:
                    return self._to_global(u, q, shape)
            q = shape.parent[q]
        # the answer is the a-node whose inclusive count from the root is target
        target = self._cluster_count(a, u) - i + 1
        if target <= 0:
            return None
        cum = idx["cum"][a]
        b = self._climb(u, lambda y: cum[y] >= target)
        par, pshape, q = self._parent_port(b)
        need = target - int(cum[par])  # a-nodes on the local path root..answer
        path = []
        while q >= 0:
            path.append(q)
            q = pshape.parent[q]
        count = 0
        for x in reversed(path):
            if pshape.labels[x] == a:
                count += 1
                if count == need:
                    return self._to_global(par, x, pshape)
        raise AssertionError("label ancestor index inconsistent")

    def labeled_query(self, op: str, *args):
        if op not in LABEL_OPS:
            raise ValueError(f"unknown labeled query {op!r}")
        return getattr(self, op)(*args)

    # -- whole-tree operations ----------------------------------------------

    def decode_full(self) -> LabeledTree:
        P = self._decode_labels()
        nt = self.bp.nodes
        children: list[list[int]] = [[] for _ in range(nt)]
        for w in range(1, nt):
            children[int(self._up[0, w])].append(w)
        parent: list[int] = []
        labels: list[int] = []
        # frame: [T' node, next local index, local -> global ids, root parent, next child]
        stack = [[0, 0, [], -1, 0]]
        while stack:
            fr = stack[-1]
            u = fr[0]
            shape = self._shape_by_label(P[u])
            if fr[1] == shape.n:
                stack.pop()
                continue
            j = fr[1]
            g = len(parent)
            fr[2].append(g)
            pj = shape.parent[j]
            parent.append(fr[3] if pj < 0 else fr[2][pj])
            labels.append(shape.labels[j])
            fr[1] += 1
            if shape.ports[j]:
                cnt = self.dsi.port_to_child_range(u, shape.port_index[j])
                kids = children[u][cnt[0]:cnt[1]]
                for w in reversed(kids):
                    stack.append([w, 0, [], g, 0])
        return LabeledTree(parent, labels, list(self.alphabet))

    def size_report(self, tree: LabeledTree | None = None) -> dict:
        """Bits per stored section, derived-index sizes and the entropy
        comparison for the label codec. ``tree`` adds the source-tree
        entropies (recovered by decoding when omitted)."""
        P = self._decode_labels()
        codec = self.codec
        shapes = [self._shape_by_label(i) for i in range(len(self.dictionary))]
        lw = _width(len(self.alphabet))
        maxdeg = max((d for s in shapes for d in s.degrees), default=0)
        dw = _width(maxdeg + 1)
        nw = _width(2 * self.params.m)
        dict_bits = sum(nw + sum(1 + lw + (0 if p else dw) for p in s.ports) for s in shapes)
        sections = {
            "T1_tree": self.bp.size_bits(),
            "T2_payload": codec.payload_bits,
            "T2_boundary": codec.boundary_bits,
            "T2_codes": codec.dictionary_bits,
            "T3_degree_sequences": self.dsi.size_bits(),
            "T3_child_sums": self.tsum.size_bits(),
            "depth_sums": self.dpos.size_bits() + self.dneg.size_bits(),
            "node_map": self.runs.size_bits() + self.run_marks.size_bits(),
            "cluster_dictionary": dict_bits,
            "sampling": self.sampling.size_bits() if self.sampling else 0,
        }
        nt = self.bp.nodes
        word = max(1, nt.bit_length())
        derived = {
            "ancestor_lifting": int(self._up.size) * word + nt * max(1, self.n.bit_length()),
            "label_index": 0,
        }
        if self._label_index is not None:
            idx = self._label_index
            derived["label_index"] = sum(
                ps.size_bits() for key in ("tsum", "dpos", "dneg") for ps in idx[key]
            ) + len(idx["cum"]) * nt * max(1, self.n.bit_length())
        p_h0 = h0_total(Counter(P))
        report = {
            "n": self.n,
            "tprime_nodes": nt,
            "clusters_distinct": len(self.dictionary),
            "m": self.params.m,
            "k": self.params.k,
            "codec": self.params.codec,
            "d": self.params.d,
            "sections": sections,
            "derived": derived,
            "total_bits": sum(sections.values()),
            "bits_per_node": sum(sections.values()) / self.n,
            "P_H0": p_h0,
            "payload_bound": p_h0 + nt,
        }
        if self.sampling is not None:
            report["payload_bound"] = self._class_bound(P) + nt
        report["payload_ok"] = codec.payload_bits <= report["payload_bound"]
        t = tree if tree is not None else self.decode_full()
        ent = all_measures(t, self.params.k)
        report["entropy"] = {key: ent[key] for key in ("H0", "Hk_L", "H_T", "Hk_T_given_L",
                                                       "Hk_L_given_T")}
        return report

    def _class_bound(self, P: Sequence[int]) -> float:
        return class_entropy_bound(P, self.contexts(P))

    def contexts(self, P: Sequence[int] | None = None) -> list[tuple]:
        """Cluster-root contexts of all T' nodes, computed top-down."""
        if P is None:
            P = self._decode_labels()
        nt = self.bp.nodes
        ctxs: list[tuple] = [()] * nt
        seen = [0] * nt
        for w in range(1, nt):
            p = int(self._up[0, w])
            ctxs[w] = self._child_context(p, ctxs[p], self._shape_by_label(P[p]), seen[p])
            seen[p] += 1
        return ctxs

    def max_context_walk(self) -> int:
        if self.sampling is None:
            return 0
        return max(self.context_walk(u)[1] for u in range(self.bp.nodes))

    # -- container ----------------------------------------------------------

    def to_bytes(self) -> bytes:
        meta = {"n": self.n, "m": self.params.m, "k": self.params.k,
                "codec": self.params.codec, "d": self.params.d,
                "sigma_small": self.params.sigma_small, "alphabet": list(self.alphabet)}
        sections = [
            (b"META", json.dumps(meta).encode()),
            (b"BP\0\0", self.bp.to_bytes()),
            (b"LBLZ" if self.sampling is None else b"LBLB", self.codec.to_bytes()),
            (b"DU\0\0", self.dsi.du.to_bytes()),
            (b"BU\0\0", self.dsi.bu.to_bytes()),
            (b"TSUM", self.tsum.to_bytes()),
            (b"DPOS", self.dpos.to_bytes()),
            (b"DNEG", self.dneg.to_bytes()),
            (b"RUNS", self.runs.to_bytes()),
            (b"RMRK", self.run_marks.to_bytes()),
            (b"DICT", struct.pack("<I", len(self.dictionary)) + b"".join(self.dictionary)),
        ]
        if self.sampling is not None:
            sections.append((b"SAMP", self.sampling.to_bytes()))
        out = [MAGIC, struct.pack("<HI", _VERSION, len(sections))]
        for tag, payload in sections:
            out.append(tag + struct.pack("<Q", len(payload)) + payload
                       + struct.pack("<I", zlib.crc32(payload)))
        return b"".join(out)

    def save(self, path) -> None:
        with open(path, "wb") as fh:
            fh.write(self.to_bytes())

    @classmethod
    def load(cls, path) -> "SuccinctLabeledTree":
        with open(path, "rb") as fh:
            return cls.from_bytes(fh.read())

    @classmethod
    def from_bytes(cls, data: bytes) -> "SuccinctLabeledTree":
        if not data.startswith(MAGIC):
            raise CorruptContainer("not an LTSX1 container")
        try:
            version, count = struct.unpack_from("<HI", data, len(MAGIC))
            if version != _VERSION:
                raise CorruptContainer(f"unsupported container version {version}")
            off = len(MAGIC) + 6
            sec: dict[bytes, bytes] = {}
            for _ in range(count):
                tag = data[off:off + 4]
                (ln,) = struct.unpack_from("<Q", data, off + 4)
                payload = data[off + 12:off + 12 + ln]
                (crc,) = struct.unpack_from("<I", data, off + 12 + ln)
                if len(payload) != ln or zlib.crc32(payload) != crc:
                    raise CorruptContainer(f"checksum mismatch in section {tag!r}")
                sec[tag] = payload
                off += 16 + ln
            if off != len(data):
                raise CorruptContainer("trailing bytes after the last section")
            meta = json.loads(sec[b"META"])
            self = cls.__new__(cls)
            self.params = BuildParams(meta["m"], meta["k"], meta["codec"], meta["d"],
                                      meta["sigma_small"])
            self.n = meta["n"]
            self.alphabet = tuple(meta["alphabet"])
            self.bp = BPTree.from_bytes(sec[b"BP\0\0"])[0]
            if b"LBLB" in sec:
                self.codec = BoostedCodec.from_bytes(sec[b"LBLB"])[0]
                self.sampling = ContextSampling.from_bytes(sec[b"SAMP"])[0]
            else:
                self.codec = ZeroOrderCodec.from_bytes(sec[b"LBLZ"])[0]
                self.sampling = None
            self.dsi = DegreeSequenceIndex(BitVector.from_bytes(sec[b"DU\0\0"])[0],
                                           BitVector.from_bytes(sec[b"BU\0\0"])[0])
            self.tsum = PartialSums.from_bytes(sec[b"TSUM"])[0]
            self.dpos = PartialSums.from_bytes(sec[b"DPOS"])[0]
            self.dneg = PartialSums.from_bytes(sec[b"DNEG"])[0]
            self.runs = BitVector.from_bytes(sec[b"RUNS"])[0]
            self.run_marks = BitVector.from_bytes(sec[b"RMRK"])[0]
            raw = sec[b"DICT"]
            (cnt,) = struct.unpack_from("<I", raw, 0)
            off = 4
            self.dictionary = []
            for _ in range(cnt):
                start = off
                _, off = _shape_from(raw, off)
                self.dictionary.append(raw[start:off])
            self._cache = {}
            self._derive()
        except CorruptContainer:
            raise
        except (KeyError, struct.error, ValueError, IndexError) as exc:
            raise CorruptContainer(f"malformed container: {exc}") from exc
        return self

    def __repr__(self) -> str:
        p = self.params
        return (f"SuccinctLabeledTree(n={self.n}, clusters={self.bp.nodes}, m={p.m}, "
                f"k={p.k}, codec={p.codec})")
