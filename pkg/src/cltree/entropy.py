"""Empirical entropies of strings and labeled trees, as bit totals (|S|*H).

All logarithms are base 2. Tree contexts are truncated near the root: a node
at depth < k uses its whole root path, the root uses the empty context.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Mapping, Sequence

from .tree import LabeledTree, node_contexts

__all__ = [
    "h0_total",
    "string_hk",
    "ContextTables",
    "context_tables",
    "label_entropy",
    "tree_entropy",
    "mixed_label_given_tree",
    "mixed_tree_given_label",
    "all_measures",
]


def h0_total(counts: Mapping[Hashable, int] | Iterable[int]) -> float:
    """``-sum t_s log2(t_s / N)`` over the symbol counts."""
    values = list(counts.values()) if isinstance(counts, Mapping) else list(counts)
    total = sum(values)
    if total <= 0:
        raise ValueError("h0_total needs a positive total count")
    bits = 0.0
    for c in values:
        if c < 0:
            raise ValueError("negative count")
        if c and c != total:
            bits -= c * math.log2(c / total)
    return bits


def string_hk(s: Sequence[Hashable], k: int) -> float:
    """k-th order empirical entropy of a string; the first k symbols are free."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    if len(s) == 0:
        raise ValueError("empty string")
    if k == 0:
        return h0_total(Counter(s))
    by_context: dict[tuple, Counter] = {}
    for i in range(k, len(s)):
        by_context.setdefault(tuple(s[i - k:i]), Counter())[s[i]] += 1
    return sum(h0_total(c) for c in by_context.values())


@dataclass
class ContextTables:
    """Counts of nodes by context K, label l and degree d."""

    k: int
    sigma: int = 1
    t_k: Counter = field(default_factory=Counter)
    t_kl: Counter = field(default_factory=Counter)
    t_kd: Counter = field(default_factory=Counter)
    t_kld: Counter = field(default_factory=Counter)
    degree_counts: Counter = field(default_factory=Counter)
    label_counts: Counter = field(default_factory=Counter)

    def p_label(self, K, l) -> float:
        return self.t_kl[K, l] / self.t_k[K]

    def p_degree(self, K, d) -> float:
        return self.t_kd[K, d] / self.t_k[K]

    def p_degree_given_label(self, K, l, d) -> float:
        return self.t_kld[K, l, d] / self.t_kl[K, l]

    def p_label_given_degree(self, K, l, d) -> float:
        return self.t_kld[K, l, d] / self.t_kd[K, d]


def context_tables(t: LabeledTree, k: int,
                   contexts: Sequence[tuple] | None = None) -> ContextTables:
    if k < 0:
        raise ValueError("k must be nonnegative")
    if contexts is None:
        contexts = node_contexts(t, k)
    tab = ContextTables(k, t.sigma)
    for K, l, d in zip(contexts, t.labels, t.degree):
        tab.t_k[K] += 1
        tab.t_kl[K, l] += 1
        tab.t_kd[K, d] += 1
        tab.t_kld[K, l, d] += 1
        tab.degree_counts[d] += 1
        tab.label_counts[l] += 1
    return tab


def _cond_total(joint: Counter, marginal: Counter, key) -> float:
    # sum over cells of -t_joint log2(t_joint / t_marginal)
    bits = 0.0
    for cell, c in joint.items():
        m = marginal[key(cell)]
        if c != m:
            bits -= c * math.log2(c / m)
    return bits


def label_entropy(t: LabeledTree, k: int, tables: ContextTables | None = None) -> float:
    tab = tables or context_tables(t, k)
    return _cond_total(tab.t_kl, tab.t_k, lambda c: c[0])


def tree_entropy(t: LabeledTree) -> float:
    return h0_total(Counter(t.degree))


def mixed_label_given_tree(t: LabeledTree, k: int,
                           tables: ContextTables | None = None) -> float:
    tab = tables or context_tables(t, k)
    return _cond_total(tab.t_kld, tab.t_kd, lambda c: (c[0], c[2]))


def mixed_tree_given_label(t: LabeledTree, k: int,
                           tables: ContextTables | None = None) -> float:
    tab = tables or context_tables(t, k)
    return _cond_total(tab.t_kld, tab.t_kl, lambda c: (c[0], c[1]))


def all_measures(t: LabeledTree, k: int) -> dict[str, float]:
    """The five tree measures for one k (bit totals)."""
    tab = context_tables(t, k)
    return {
        "k": k,
        "H0": h0_total(tab.label_counts),
        "Hk_L": label_entropy(t, k, tab),
        "H_T": tree_entropy(t),
        "Hk_T_given_L": mixed_tree_given_label(t, k, tab),
        "Hk_L_given_T": mixed_label_given_tree(t, k, tab),
    }
