"""Degree-preserving tree clustering, the cluster tree built from it, cluster
descriptions and the probability-weight (q) oracle behind the entropy bounds.

A cluster is a forest of subtrees whose roots are consecutive siblings. Each
cluster node is either *regular* (all its children are in the cluster) or a
*port* (a cluster leaf whose children all live in other clusters).
"""
from __future__ import annotations

import json
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

from .entropy import (ContextTables, context_tables, h0_total, label_entropy,
                      mixed_label_given_tree, mixed_tree_given_label, tree_entropy)
from .tree import LabeledTree, node_contexts

_BARE = re.compile(r"[A-Za-z0-9_.\-]+")

__all__ = [
    "Clustering",
    "ValidationReport",
    "ClusterShape",
    "ClusterStructure",
    "ClusterDescription",
    "auto_m",
    "cluster_greedy",
    "validate_clustering",
    "build_cluster_structure",
    "describe_cluster",
    "decode_description",
    "gibbs_q",
    "log2_gibbs_q",
    "entropy_bound_report",
    "dictionary_size_bound",
    "dump_clusters",
]


def auto_m(n: int, sigma: int, beta: float = 1 / 8) -> int:
    """``max(1, floor(beta * log_sigma n))``; sigma = 1 is treated as 2."""
    base = math.log2(max(2, sigma))
    return max(1, int(beta * math.log2(max(1, n)) / base))


@dataclass
class Clustering:
    m: int
    cluster_of: list[int]
    is_port: list[bool]
    clusters: list[list[int]]  # root nodes of each cluster, left to right

    def __len__(self) -> int:
        return len(self.clusters)

    def members(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in self.clusters]
        for v, c in enumerate(self.cluster_of):
            out[c].append(v)
        return out


def cluster_greedy(t: LabeledTree, m: int) -> Clustering:
    """Bottom-up greedy clustering.

    Each node returns a tree of size <= m. If its children's returned trees
    total less than m they are merged under it; otherwise they are grouped left
    to right into clusters, each closed as soon as it reaches m nodes (the last
    group may be smaller), and the node returns alone as a port. The tree
    returned at the root is the final cluster.
    """
    if m < 1:
        raise ValueError("cluster size parameter m must be >= 1")
    n = t.n
    size = [1] * n
    port = [False] * n
    group_of: dict[int, int] = {}
    groups: list[list[int]] = []
    for v in range(n - 1, -1, -1):
        ch = t.children(v)
        if not ch:
            continue
        total = 0
        for c in ch:
            total += size[c]
        if total < m:
            size[v] = 1 + total
            continue
        port[v] = True
        cur: list[int] = []
        acc = 0
        for c in ch:
            cur.append(c)
            acc += size[c]
            if acc >= m:
                for r in cur:
                    group_of[r] = len(groups)
                groups.append(cur)
                cur, acc = [], 0
        if cur:
            for r in cur:
                group_of[r] = len(groups)
            groups.append(cur)
    root_group = len(groups)
    groups.append([0])
    raw = [0] * n
    raw[0] = root_group
    for v in range(1, n):
        g = group_of.get(v)
        raw[v] = raw[t.parent[v]] if g is None else g
    # renumber clusters by the position of their first root (T' preorder)
    order = sorted(range(len(groups)), key=lambda g: groups[g][0])
    new_id = [0] * len(groups)
    for i, g in enumerate(order):
        new_id[g] = i
    return Clustering(m, [new_id[g] for g in raw], port, [groups[g] for g in order])


@dataclass
class ValidationReport:
    ok: bool
    condition: str | None = None
    witness: int | None = None
    detail: str = ""

    def __bool__(self) -> bool:
        return self.ok


def validate_clustering(t: LabeledTree, c: Clustering, m: int) -> ValidationReport:
    """Check C1 (cluster count), C2 (cluster size), C3 (consecutive-sibling
    forests) and C4 (port/regular degrees) and the port flags."""
    n = t.n
    if len(c.cluster_of) != n or len(c.is_port) != n:
        return ValidationReport(False, "C3", None, "clustering does not cover the tree")
    count = len(c.clusters)
    lo, hi = n / (2 * m) - 1, 2 * n / m + 1
    if not lo <= count <= hi:
        return ValidationReport(False, "C1", None, f"{count} clusters outside [{lo}, {hi}]")
    members = c.members()
    for cid, mem in enumerate(members):
        if not mem:
            return ValidationReport(False, "C3", None, f"cluster {cid} is empty")
        if len(mem) > 2 * m - 1:
            return ValidationReport(False, "C2", mem[0], f"cluster {cid} has {len(mem)} nodes")
    cof = c.cluster_of
    for cid, mem in enumerate(members):
        roots = [v for v in mem if v == 0 or cof[t.parent[v]] != cid]
        if sorted(c.clusters[cid]) != roots:
            return ValidationReport(False, "C3", roots[0], f"cluster {cid} root list mismatch")
        parents = {t.parent[r] for r in roots}
        if len(parents) != 1:
            return ValidationReport(False, "C3", roots[-1], f"cluster {cid} roots have different parents")
        p = parents.pop()
        if p >= 0:
            sib = t.children(p)
            idx = [sib.index(r) for r in roots]
            if idx != list(range(idx[0], idx[0] + len(idx))):
                return ValidationReport(False, "C3", roots[0],
                                        f"cluster {cid} roots are not consecutive siblings")
    for v in range(n):
        inside = sum(1 for w in t.children(v) if cof[w] == cof[v])
        if inside not in (0, t.degree[v]):
            return ValidationReport(False, "C4", v, "node keeps only part of its children")
        expect_port = inside == 0 and t.degree[v] > 0
        if c.is_port[v] != expect_port:
            return ValidationReport(False, "C4", v, "port flag inconsistent with degrees")
    return ValidationReport(True)


class ClusterShape:
    """Canonical content of a cluster (its forest, labels and port flags)
    with the local navigation tables used by queries.

    Local node indices follow preorder over the forest.
    """

    __slots__ = ("n", "degrees", "ports", "labels", "parent", "children", "depth",
                 "roots", "rank", "port_list", "port_index", "tree_of", "key")

    def __init__(self, degrees: Sequence[int], ports: Sequence[bool], labels: Sequence[int]):
        n = len(degrees)
        if not (n == len(ports) == len(labels)) or n == 0:
            raise ValueError("inconsistent cluster content")
        self.n = n
        self.degrees = tuple(degrees)
        self.ports = tuple(bool(p) for p in ports)
        self.labels = tuple(labels)
        self.key = (n, self.degrees, self.ports, self.labels)
        parent = [-1] * n
        children: list[list[int]] = [[] for _ in range(n)]
        depth = [0] * n
        rank = [0] * n
        roots: list[int] = []
        tree_of = [0] * n
        stack: list[list[int]] = []
        for v in range(n):
            d = self.degrees[v]
            if d < 0 or (d and self.ports[v]):
                raise ValueError("ports are cluster leaves")
            if stack:
                p = stack[-1][0]
                parent[v] = p
                rank[v] = len(children[p])
                children[p].append(v)
                depth[v] = depth[p] + 1
                tree_of[v] = tree_of[p]
                stack[-1][1] -= 1
                if stack[-1][1] == 0:
                    stack.pop()
            else:
                rank[v] = len(roots)
                tree_of[v] = len(roots)
                roots.append(v)
            if d:
                stack.append([v, d])
        if stack:
            raise ValueError("degree list does not describe a complete forest")
        self.parent = parent
        self.children = children
        self.depth = depth
        self.rank = rank
        self.roots = roots
        self.tree_of = tree_of
        self.port_list = [v for v in range(n) if self.ports[v]]
        self.port_index = [-1] * n
        for i, v in enumerate(self.port_list):
            self.port_index[v] = i

    def ancestor(self, v: int, d: int) -> int:
        for _ in range(d):
            v = self.parent[v]
        return v

    def lca(self, u: int, v: int) -> int:
        """Local LCA, -1 if the nodes are in different trees."""
        if self.tree_of[u] != self.tree_of[v]:
            return -1
        while self.depth[u] > self.depth[v]:
            u = self.parent[u]
        while self.depth[v] > self.depth[u]:
            v = self.parent[v]
        while u != v:
            u, v = self.parent[u], self.parent[v]
        return u

    def ports_before(self, v: int) -> int:
        """Number of ports strictly before local index v."""
        lo, hi = 0, len(self.port_list)
        while lo < hi:
            mid = (lo + hi) // 2
            if self.port_list[mid] < v:
                lo = mid + 1
            else:
                hi = mid
        return lo

    def to_dict(self, alphabet: Sequence[str] | None = None) -> dict:
        labels = [alphabet[l] for l in self.labels] if alphabet else list(self.labels)
        return {"n": self.n, "degrees": list(self.degrees),
                "ports": [int(p) for p in self.ports], "labels": labels}

    def __eq__(self, other) -> bool:
        return isinstance(other, ClusterShape) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __repr__(self) -> str:
        return f"ClusterShape(n={self.n}, ports={len(self.port_list)})"


@dataclass
class ClusterStructure:
    """Cluster tree T' plus dictionary and per-node degree sequences.

    T' nodes are numbered in preorder and coincide with cluster ids.
    ``degree_sequences[u]`` lists, per port of cluster u (left to right), how
    many T' children hang from it. ``members[u]`` maps local indices to the
    original node ids.
    """

    tprime: LabeledTree
    dictionary: list[ClusterShape]
    degree_sequences: list[list[int]]
    members: list[list[int]]
    contexts: list[tuple[int, ...]]
    clustering: Clustering
    k: int

    @property
    def labels(self) -> tuple[int, ...]:
        return self.tprime.labels

    def shape(self, u: int) -> ClusterShape:
        return self.dictionary[self.tprime.labels[u]]

    @property
    def port_count(self) -> int:
        return sum(len(s) for s in self.degree_sequences)


def build_cluster_structure(t: LabeledTree, c: Clustering, k: int = 0) -> ClusterStructure:
    rep = validate_clustering(t, c, c.m)
    if not rep:
        raise ValueError(f"invalid clustering: {rep.condition} {rep.detail}")
    members = c.members()
    count = len(members)
    cof = c.cluster_of
    tpar = [-1] * count
    for cid in range(1, count):
        tpar[cid] = cof[t.parent[c.clusters[cid][0]]]
    index: dict[tuple, int] = {}
    shapes: list[ClusterShape] = []
    labels: list[int] = []
    degseqs: list[list[int]] = []
    for cid, mem in enumerate(members):
        degs = [0 if c.is_port[v] else t.degree[v] for v in mem]
        shape = ClusterShape(degs, [c.is_port[v] for v in mem], [t.labels[v] for v in mem])
        lab = index.get(shape.key)
        if lab is None:
            lab = index[shape.key] = len(shapes)
            shapes.append(shape)
        labels.append(lab)
        seq = [0] * len(shape.port_list)
        degseqs.append(seq)
    for cid in range(1, count):
        p = t.parent[c.clusters[cid][0]]
        pc = cof[p]
        degseqs[pc][shapes[labels[pc]].port_index[members[pc].index(p)]] += 1
    tokens = [f"C{i}" for i in range(len(shapes))]
    tprime = LabeledTree(tpar, labels, tokens)
    ctx = node_contexts(t, k)
    contexts = [ctx[c.clusters[cid][0]] for cid in range(count)]
    return ClusterStructure(tprime, shapes, degseqs, members, contexts, c, k)


def dictionary_size_bound(m: int, sigma: int) -> int:
    return sum(2 ** (2 * i) * sigma ** i for i in range(1, 2 * m))


# ---------------------------------------------------------------------------
# cluster descriptions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ClusterDescription:
    """(K, N, V): root context, node count and preorder node records; a port
    record is ``(1, label)``, a regular one ``(0, label, degree)``."""

    K: tuple[int, ...]
    N: int
    V: tuple[tuple[int, ...], ...]

    def tokens(self, alphabet: Sequence[str]) -> tuple:
        rec = tuple((r[0], alphabet[r[1]], *r[2:]) for r in self.V)
        return (tuple(alphabet[a] for a in self.K), self.N, rec)


def describe_cluster(cs: ClusterStructure, u: int, t: LabeledTree, k: int) -> ClusterDescription:
    shape = cs.shape(u)
    root = cs.members[u][0]
    K: list[int] = []
    p = t.parent[root]
    while p >= 0 and len(K) < k:
        K.append(t.labels[p])
        p = t.parent[p]
    V = tuple((1, shape.labels[i]) if shape.ports[i] else (0, shape.labels[i], shape.degrees[i])
              for i in range(shape.n))
    return ClusterDescription(tuple(reversed(K)), shape.n, V)


def description_of_shape(shape: ClusterShape, K: tuple[int, ...]) -> ClusterDescription:
    V = tuple((1, shape.labels[i]) if shape.ports[i] else (0, shape.labels[i], shape.degrees[i])
              for i in range(shape.n))
    return ClusterDescription(tuple(K), shape.n, V)


def decode_description(d: ClusterDescription, k: int) -> tuple[ClusterShape, list[tuple[int, ...]]]:
    """Rebuild the cluster forest and every node's context from a description."""
    if len(d.V) != d.N:
        raise ValueError(f"description lists {len(d.V)} records for N={d.N}")
    degrees, ports, labels = [], [], []
    for rec in d.V:
        if rec[0] == 1 and len(rec) == 2:
            ports.append(True)
            degrees.append(0)
        elif rec[0] == 0 and len(rec) == 3:
            ports.append(False)
            degrees.append(rec[2])
        else:
            raise ValueError(f"malformed node record {rec!r}")
        labels.append(rec[1])
    shape = ClusterShape(degrees, ports, labels)
    ctx: list[tuple[int, ...]] = []
    K = tuple(d.K)[-k:] if k else ()
    for v in range(shape.n):
        p = shape.parent[v]
        if p < 0:
            ctx.append(K)
        else:
            c = ctx[p] + (labels[p],)
            ctx.append(c[-k:] if k else ())
    return shape, ctx


def _port_weight(m: int) -> float:
    # share of the interval reserved for port records; m = 1 would leave 0
    # for regular nodes, so both kinds get half there
    return 1 / m if m >= 2 else 0.5


def log2_gibbs_q(d: ClusterDescription, tables: ContextTables, m: int, variant: int = 2) -> float:
    """log2 of the weight q(R) = q(K) q(N) prod q(v) (variants 1, 2, 3)."""
    if variant not in (1, 2, 3):
        raise ValueError("variant must be 1, 2 or 3")
    k = tables.k
    sigma = tables.sigma
    shape, ctx = decode_description(d, k)
    pw = _port_weight(m)
    lg = -math.log2(len(d.K) + 1) - len(d.K) * math.log2(sigma) - math.log2(2 * m)
    if d.N > 2 * m - 1:
        raise ValueError("cluster larger than 2m-1 nodes")
    for v in range(shape.n):
        K, l, deg = ctx[v], shape.labels[v], shape.degrees[v]
        try:
            if shape.ports[v]:
                if variant == 3:
                    lg += math.log2(pw) - math.log2(sigma)
                else:
                    lg += math.log2(pw) + math.log2(tables.p_label(K, l))
            elif variant == 2:
                lg += (math.log2(1 - pw) + math.log2(tables.p_label(K, l))
                       + math.log2(tables.p_degree_given_label(K, l, deg)))
            elif variant == 1:
                lg += (math.log2(1 - pw) + math.log2(tables.p_label(K, l))
                       + math.log2(tables.p_degree(K, deg)))
            else:
                lg += (math.log2(1 - pw) + math.log2(tables.p_degree(K, deg))
                       + math.log2(tables.p_label_given_degree(K, l, deg)))
        except (ValueError, ZeroDivisionError):
            raise ValueError(f"zero empirical probability for node record {d.V[v]!r}; "
                             "tables do not match this tree") from None
    return lg


def gibbs_q(d: ClusterDescription, tables: ContextTables, m: int, variant: int = 2) -> float:
    return 2.0 ** log2_gibbs_q(d, tables, m, variant)


def entropy_bound_report(t: LabeledTree, cs: ClusterStructure, k: int, m: int) -> dict:
    """|P|H0(P) of the cluster label string against the three explicit
    pre-asymptotic upper bounds, plus the Gibbs sums they are derived from."""
    n = t.n
    tables = context_tables(t, k)
    P = cs.tprime.labels
    p_bits = h0_total(Counter(P))
    descs = [describe_cluster(cs, u, t, k) for u in range(cs.tprime.n)]
    r_bits = h0_total(Counter(descs))
    ports = cs.port_count
    regular = n - ports
    pw = _port_weight(m)
    sigma = t.sigma
    nH_T = tree_entropy(t)
    nHk_L = label_entropy(t, k, tables)
    nHk_TL = mixed_tree_given_label(t, k, tables)
    nHk_LT = mixed_label_given_tree(t, k, tables)
    per_cluster = cs.tprime.n * (k * math.log2(sigma) + math.log2(k + 1) + math.log2(2 * m))
    port_cost = ports * -math.log2(pw)
    regular_cost = n * -math.log2(1 - pw)
    bounds = {
        1: nH_T + nHk_L + per_cluster + port_cost + regular_cost,
        2: nHk_TL + nHk_L + per_cluster + port_cost + regular_cost,
        3: nH_T + nHk_LT + per_cluster + port_cost + ports * math.log2(sigma) + regular_cost,
    }
    gibbs = {}
    q_mass = {}
    distinct = list(dict.fromkeys(descs))
    for variant in (1, 2, 3):
        logs = {d: log2_gibbs_q(d, tables, m, variant) for d in distinct}
        gibbs[variant] = -sum(logs[d] for d in descs)
        q_mass[variant] = sum(2.0 ** v for v in logs.values())
    return {
        "n": n, "k": k, "m": m, "tprime_nodes": cs.tprime.n, "ports": ports,
        "regular": regular,
        "P_H0": p_bits, "R_H0": r_bits,
        "nH_T": nH_T, "nHk_L": nHk_L, "nHk_T_given_L": nHk_TL, "nHk_L_given_T": nHk_LT,
        "gibbs": gibbs, "q_mass": q_mass, "bounds": bounds,
        "holds": {v: p_bits <= bounds[v] + 1e-6 and p_bits <= gibbs[v] + 1e-6
                  for v in (1, 2, 3)},
    }


def dump_clusters(cs: ClusterStructure, alphabet: Sequence[str]) -> tuple[str, str]:
    """Clusters as `.ltree` fragments (one line per T' node, forest trees
    separated by spaces; ports carry a trailing ``*``) and the dictionary as
    JSON."""
    lines = []
    for u in range(cs.tprime.n):
        shape = cs.shape(u)
        frag = " ".join(_fragment(shape, r, alphabet) for r in shape.roots)
        lines.append(f"C{cs.tprime.labels[u]} {frag}")
    dictionary = {f"C{i}": s.to_dict(alphabet) for i, s in enumerate(cs.dictionary)}
    return "\n".join(lines) + "\n", json.dumps(dictionary, indent=1)


def _fragment(shape: ClusterShape, r: int, alphabet: Sequence[str]) -> str:
    out: list[str] = []
    stack: list[object] = [r]
    while stack:
        v = stack.pop()
        if v is None:
            out.append(")")
            continue
        tok = alphabet[shape.labels[v]]
        tok = tok if _BARE.fullmatch(tok) else json.dumps(tok)
        out.append("(" + tok + ("*" if shape.ports[v] else ""))
        stack.append(None)
        for c in reversed(shape.children[v]):
            stack.append(c)
    return " ".join(out).replace(" )", ")")
