"""Ordered, rooted, labeled trees: data model, text formats, generators and a
pointer-walking reference implementation of every navigational query.

Nodes are identified by their 0-based preorder rank everywhere in the package.
"""
from __future__ import annotations

import random
import re
import xml.etree.ElementTree as ET
from typing import Iterator, Sequence

__all__ = [
    "LabeledTree",
    "ParseError",
    "parse_ltree",
    "parse_xml_skeleton",
    "serialize_ltree",
    "naive_query",
    "generate_tree",
    "enumerate_shapes",
    "node_contexts",
    "QUERY_OPS",
    "LABEL_OPS",
]

_BARE_TOKEN = re.compile(r"[A-Za-z0-9_.\-]+")


class ParseError(ValueError):
    """Raised for malformed `.ltree` or XML input; `offset` is a byte offset
    (or ``(line, column)`` for XML)."""

    def __init__(self, message: str, offset=None):
        self.offset = offset
        if offset is not None:
            message = f"{message} (at {offset})"
        super().__init__(message)


class LabeledTree:
    """Immutable arena tree with nodes stored in preorder.

    ``labels[v]`` is an integer index into ``alphabet``; ``parent[v]`` is -1
    for the root. Children of a node are reachable through ``first_child`` /
    ``next_sibling`` (both -1 when absent).
    """

    __slots__ = ("labels", "parent", "first_child", "next_sibling", "degree",
                 "alphabet", "_children")

    def __init__(self, parent: Sequence[int], labels: Sequence[int],
                 alphabet: Sequence[str]):
        n = len(parent)
        if n == 0:
            raise ValueError("a tree needs at least one node")
        if len(labels) != n:
            raise ValueError("parent and labels must have equal length")
        if parent[0] != -1:
            raise ValueError("node 0 must be the root")
        alphabet = tuple(alphabet)
        if len(set(alphabet)) != len(alphabet) or not alphabet:
            raise ValueError("alphabet must be non-empty with unique tokens")
        sigma = len(alphabet)
        first_child = [-1] * n
        next_sibling = [-1] * n
        degree = [0] * n
        last_child = [-1] * n
        # preorder validity: the parent of v is v-1 or an ancestor of v-1
        stack = [0]
        for v in range(1, n):
            p = parent[v]
            while stack and stack[-1] != p:
                stack.pop()
            if not stack:
                raise ValueError(f"parent array is not in preorder at node {v}")
            stack.append(v)
            if last_child[p] == -1:
                first_child[p] = v
            else:
                next_sibling[last_child[p]] = v
            last_child[p] = v
            degree[p] += 1
        for lab in labels:
            if not 0 <= lab < sigma:
                raise ValueError(f"label id {lab} outside alphabet of size {sigma}")
        self.labels = tuple(labels)
        self.parent = tuple(parent)
        self.first_child = tuple(first_child)
        self.next_sibling = tuple(next_sibling)
        self.degree = tuple(degree)
        self.alphabet = alphabet
        self._children = None

    @classmethod
    def from_degrees(cls, degrees: Sequence[int], labels: Sequence[int],
                     alphabet: Sequence[str]) -> "LabeledTree":
        """Build from the preorder degree sequence."""
        n = len(degrees)
        parent = [-1] * n
        stack: list[list[int]] = []  # [node, children still expected]
        for v in range(n):
            if v > 0:
                if not stack:
                    raise ValueError("degree sequence describes a forest")
                parent[v] = stack[-1][0]
                stack[-1][1] -= 1
                if stack[-1][1] == 0:
                    stack.pop()
            if degrees[v] > 0:
                stack.append([v, degrees[v]])
            elif degrees[v] < 0:
                raise ValueError("negative degree")
        if stack:
            raise ValueError("degree sequence is incomplete")
        return cls(parent, labels, alphabet)

    def __len__(self) -> int:
        return len(self.parent)

    @property
    def n(self) -> int:
        return len(self.parent)

    @property
    def sigma(self) -> int:
        return len(self.alphabet)

    def children(self, v: int) -> list[int]:
        if self._children is None:
            ch: list[list[int]] = [[] for _ in range(self.n)]
            for u in range(1, self.n):
                ch[self.parent[u]].append(u)
            self._children = ch
        return self._children[v]

    def label_token(self, v: int) -> str:
        return self.alphabet[self.labels[v]]

    def subtree_sizes(self) -> list[int]:
        size = [1] * self.n
        for v in range(self.n - 1, 0, -1):
            size[self.parent[v]] += size[v]
        return size

    def depths(self) -> list[int]:
        depth = [0] * self.n
        for v in range(1, self.n):
            depth[v] = depth[self.parent[v]] + 1
        return depth

    def isomorphic(self, other: "LabeledTree") -> bool:
        """Same shape and same label tokens node by node."""
        if self.n != other.n or self.parent != other.parent:
            return False
        return all(self.alphabet[a] == other.alphabet[b]
                   for a, b in zip(self.labels, other.labels))

    def __eq__(self, other) -> bool:
        return isinstance(other, LabeledTree) and self.isomorphic(other)

    def __hash__(self):
        return hash((self.parent, tuple(self.label_token(v) for v in range(self.n))))

    def __repr__(self) -> str:
        return f"LabeledTree(n={self.n}, sigma={self.sigma})"


def node_contexts(t: LabeledTree, k: int) -> list[tuple[int, ...]]:
    """Context of every node: the labels of its last ``min(k, depth)``
    ancestors, farthest first."""
    ctx: list[tuple[int, ...]] = [()] * t.n
    if k == 0:
        return ctx
    for v in range(1, t.n):
        p = t.parent[v]
        c = ctx[p] + (t.labels[p],)
        ctx[v] = c[-k:] if len(c) > k else c
    return ctx


# ---------------------------------------------------------------------------
# text formats
# ---------------------------------------------------------------------------

def _tokenize(data: bytes) -> Iterator[tuple[str, str, int]]:
    i = 0
    n = len(data)
    while i < n:
        c = data[i]
        if c in b" \t\r\n":
            i += 1
        elif c == 0x28 or c == 0x29:  # ( )
            yield ("(" if c == 0x28 else ")"), "", i
            i += 1
        elif c == 0x22:  # "
            start = i
            i += 1
            buf = bytearray()
            while True:
                if i >= n:
                    raise ParseError("unterminated quoted token", start)
                c = data[i]
                if c == 0x5C and i + 1 < n:  # backslash escape
                    buf.append(data[i + 1])
                    i += 2
                elif c == 0x22:
                    i += 1
                    break
                else:
                    buf.append(c)
                    i += 1
            yield "tok", buf.decode("utf-8"), start
        else:
            start = i
            while i < n and data[i] not in b" \t\r\n()\"":
                i += 1
            word = data[start:i].decode("utf-8")
            if not _BARE_TOKEN.fullmatch(word):
                raise ParseError(f"invalid token {word!r}", start)
            yield "tok", word, start


def parse_ltree(text: str | bytes) -> LabeledTree:
    """Parse the s-expression format ``tree := '(' token tree* ')'``."""
    data = text.encode("utf-8") if isinstance(text, str) else text
    parent: list[int] = []
    labels: list[int] = []
    alphabet: dict[str, int] = {}
    stack: list[int] = []
    expect_label = False
    done_at = None
    for kind, value, off in _tokenize(data):
        if done_at is not None:
            raise ParseError("trailing content after the root tree", off)
        if expect_label:
            if kind != "tok":
                raise ParseError("expected a label after '('", off)
            lab = alphabet.setdefault(value, len(alphabet))
            parent.append(stack[-1] if stack else -1)
            labels.append(lab)
            stack.append(len(parent) - 1)
            expect_label = False
        elif kind == "(":
            expect_label = True
        elif kind == ")":
            if not stack:
                raise ParseError("unbalanced ')'", off)
            stack.pop()
            if not stack:
                done_at = off
        else:
            raise ParseError(f"unexpected token {value!r}", off)
    if expect_label:
        raise ParseError("document ends after '('", len(data))
    if stack:
        raise ParseError("unbalanced '(': missing ')'", len(data))
    if not parent:
        raise ParseError("empty document", 0)
    return LabeledTree(parent, labels, list(alphabet))


def _quote(token: str) -> str:
    if _BARE_TOKEN.fullmatch(token):
        return token
    return '"' + token.replace("\\", "\\\\").replace('"', '\\"') + '"'


def serialize_ltree(t: LabeledTree) -> str:
    out: list[str] = []
    quoted = [_quote(tok) for tok in t.alphabet]
    # iterative preorder emitting closers when leaving subtrees
    stack: list[int] = []
    for v in range(t.n):
        while stack and stack[-1] != t.parent[v]:
            stack.pop()
            out.append(")")
        if stack:
            out.append(" ")
        out.append("(" + quoted[t.labels[v]])
        stack.append(v)
    out.append(")" * len(stack))
    return "".join(out)


def parse_xml_skeleton(text: str | bytes) -> LabeledTree:
    """Element skeleton of an XML document; text and attributes are dropped."""
    try:
        root = ET.fromstring(text)
    except ET.ParseError as exc:
        raise ParseError(f"malformed XML: {exc.msg if hasattr(exc, 'msg') else exc}",
                         getattr(exc, "position", None)) from None
    parent: list[int] = []
    labels: list[int] = []
    alphabet: dict[str, int] = {}
    stack = [(root, -1)]
    while stack:
        el, p = stack.pop()
        parent.append(p)
        labels.append(alphabet.setdefault(el.tag, len(alphabet)))
        me = len(parent) - 1
        for child in reversed(list(el)):
            stack.append((child, me))
    return LabeledTree(parent, labels, list(alphabet))


# ---------------------------------------------------------------------------
# reference queries
# ---------------------------------------------------------------------------

QUERY_OPS = ("parent", "firstchild", "nextsibling", "lca", "child", "childrank",
             "depth", "level_ancestor", "label", "preorder_rank", "preorder_select")
LABEL_OPS = ("childrank_label", "childselect_label", "depth_label",
             "level_ancestor_label")


def _check(t: LabeledTree, v) -> int:
    if not isinstance(v, int) or not 0 <= v < t.n:
        raise IndexError(f"node {v!r} out of range for tree of {t.n} nodes")
    return v


def _label_id(t: LabeledTree, a) -> int:
    if isinstance(a, str):
        try:
            return t.alphabet.index(a)
        except ValueError:
            raise KeyError(f"unknown label {a!r}") from None
    if not 0 <= a < t.sigma:
        raise KeyError(f"unknown label id {a!r}")
    return a


def naive_query(t: LabeledTree, op: str, *args):
    """Answer ``op`` by walking pointers. Node answers are preorder ranks,
    ``None`` when the requested node does not exist.

    Conventions: depth(root) = 0; ``child`` and ``childrank`` are 0-based;
    ``childselect_label`` and ``level_ancestor_label`` count from 1.
    """
    par = t.parent
    if op == "preorder_select":
        return _check(t, args[0])
    v = _check(t, args[0])
    if op == "parent":
        return None if par[v] < 0 else par[v]
    if op == "firstchild":
        return None if t.first_child[v] < 0 else t.first_child[v]
    if op == "nextsibling":
        return None if t.next_sibling[v] < 0 else t.next_sibling[v]
    if op == "label":
        return t.labels[v]
    if op == "preorder_rank":
        return v
    if op == "depth":
        d = 0
        while par[v] >= 0:
            v = par[v]
            d += 1
        return d
    if op == "lca":
        u = _check(t, args[1])
        path = set()
        x = v
        while x >= 0:
            path.add(x)
            x = par[x]
        while u not in path:
            u = par[u]
        return u
    if op == "child":
        i = args[1]
        ch = t.children(v)
        if not 0 <= i < len(ch):
            raise IndexError(f"node {v} has no child {i}")
        return ch[i]
    if op == "childrank":
        if par[v] < 0:
            return 0
        return t.children(par[v]).index(v)
    if op == "level_ancestor":
        i = args[1]
        if i < 0:
            raise ValueError("level must be nonnegative")
        for _ in range(i):
            v = par[v]
            if v < 0:
                return None
        return v
    if op == "depth_label":
        a = _label_id(t, args[1])
        c = 0
        while par[v] >= 0:
            v = par[v]
            c += t.labels[v] == a
        return c
    if op == "childrank_label":
        a = _label_id(t, args[1])
        if par[v] < 0:
            return 0
        c = 0
        for w in t.children(par[v]):
            if w == v:
                return c
            c += t.labels[w] == a
    if op == "childselect_label":
        i, a = args[1], _label_id(t, args[2])
        if i < 1:
            raise ValueError("childselect_label counts from 1")
        c = 0
        for w in t.children(v):
            if t.labels[w] == a:
                c += 1
                if c == i:
                    return w
        return None
    if op == "level_ancestor_label":
        i, a = args[1], _label_id(t, args[2])
        if i < 1:
            raise ValueError("level_ancestor_label counts from 1")
        while par[v] >= 0:
            v = par[v]
            if t.labels[v] == a:
                i -= 1
                if i == 0:
                    return v
        return None
    raise ValueError(f"unknown query {op!r}")


# ---------------------------------------------------------------------------
# generators
# ---------------------------------------------------------------------------

def _degrees_to_tree(degrees: list[int], labels: list[int], sigma: int) -> LabeledTree:
    alphabet = [f"l{i}" for i in range(sigma)]
    return LabeledTree.from_degrees(degrees, labels, alphabet)


def _rotate_to_valid(degrees: list[int]) -> list[int]:
    """Cycle lemma: the unique rotation of a sequence with sum n-1 that is a
    valid preorder degree sequence."""
    # walk prefix sums of (d - 1); the valid rotation starts after the first
    # position of the minimum
    run = 0
    best = 0
    best_at = 0
    for i, d in enumerate(degrees):
        run += d - 1
        if run < best:
            best = run
            best_at = i + 1
    return degrees[best_at:] + degrees[:best_at]


def _uniform_shape(n: int, rng: random.Random) -> list[int]:
    # uniformly random ordered tree: a random Lukasiewicz word rotated to validity
    # (degrees as a random composition: n-1 balls into n boxes)
    cuts = sorted(rng.sample(range(2 * n - 2), n - 1))
    degrees = []
    prev = -1
    for c in cuts + [2 * n - 2]:
        degrees.append(c - prev - 1)
        prev = c
    return _rotate_to_valid(degrees)


def _degree_dist_shape(n: int, dist: dict[int, float], rng: random.Random,
                       max_steps: int) -> list[int]:
    values = sorted(dist)
    weights = [dist[v] for v in values]
    if not values or any(v < 0 for v in values) or not any(w > 0 for w in weights):
        raise ValueError("degree distribution must have nonnegative support")
    degrees = rng.choices(values, weights, k=n)
    total = sum(degrees)
    target = n - 1
    for _ in range(max_steps):
        if total == target:
            return _rotate_to_valid(degrees)
        i = rng.randrange(n)
        new = rng.choices(values, weights)[0]
        if abs(total - degrees[i] + new - target) <= abs(total - target):
            total += new - degrees[i]
            degrees[i] = new
    raise ValueError(f"could not realize {n} nodes with degrees in {values}")


CATALOG_RULE = {
    "labels": ["catalog", "book", "magazine", "year", "author", "title", "value"],
    "root": "catalog",
    "children": {
        "catalog": {"book": 0.6, "magazine": 0.4},
        "book": {"year": 1.0, "author": 1.0, "title": 1.0},
        "magazine": {"year": 1.0, "title": 1.0},
        "year": {"value": 1.0},
        "author": {"value": 1.0},
        "title": {"value": 1.0},
        "value": {"value": 1.0},
    },
    "degree": {
        "book": {3: 1.0},
        "magazine": {2: 1.0},
        "year": {1: 1.0},
        "author": {1: 1.0},
        "title": {1: 1.0},
        "value": {0: 1.0},
    },
}


def random_rule(sigma: int, rng: random.Random) -> dict:
    """A random subcritical rule where each label prefers a few child labels
    and a couple of degrees."""
    labels = [f"l{i}" for i in range(sigma)]
    children = {}
    degree = {}
    for i, lab in enumerate(labels):
        prefs = rng.sample(labels, min(2, sigma))
        children[lab] = {p: rng.random() + 0.1 for p in prefs}
        opts = rng.sample(range(4), 2)
        wts = [rng.random() + 0.1 for _ in opts]
        degree[lab] = dict(zip(opts, wts))
    # keep one pure leaf label so records terminate
    degree[labels[-1]] = {0: 1.0}
    return {"labels": labels, "root": labels[0], "children": children,
            "degree": degree}


def _correlated(n: int, rule: dict, rng: random.Random) -> LabeledTree:
    labels = list(rule["labels"])
    lid = {l: i for i, l in enumerate(labels)}
    root = rule.get("root", labels[0])
    child_dist = {p: (list(d), list(d.values())) for p, d in rule["children"].items()}
    deg_dist = {l: (list(d), list(d.values())) for l, d in rule["degree"].items()}
    fillers = [l for l, d in rule["degree"].items() if set(d) == {0}]
    filler = fillers[0] if fillers else labels[-1]

    def record(first_label: str, budget: int):
        # one subtree grown by the rule in preorder; a node whose degree would
        # overshoot the budget becomes a filler leaf, so the record always fits
        par: list[int] = []
        labs: list[int] = []
        stack: list[tuple[int, str, int]] = []  # (node, label, children left)
        pending = 0

        def add(p, lab):
            nonlocal pending
            vals, wts = deg_dist.get(lab, ([0], [1.0]))
            d = rng.choices(vals, wts)[0]
            if len(par) + 1 + pending + d > budget:
                lab, d = filler, 0
            par.append(p)
            labs.append(lid[lab])
            if d:
                stack.append((len(par) - 1, lab, d))
                pending += d

        add(-1, first_label)
        while stack:
            v, lab, left = stack.pop()
            if left > 1:
                stack.append((v, lab, left - 1))
            pending -= 1
            vals, wts = child_dist[lab]
            add(v, rng.choices(vals, wts)[0])
        return par, labs

    parent = [-1]
    out_labels = [lid[root]]
    vals, wts = child_dist[root]
    while len(parent) < n:
        rec = record(rng.choices(vals, wts)[0], n - len(parent))
        base = len(parent)
        for p, lab in zip(*rec):
            parent.append(0 if p < 0 else base + p)
            out_labels.append(lab)
    return LabeledTree(parent, out_labels, labels)


def generate_tree(spec: dict | tuple, seed: int = 0) -> LabeledTree:
    """Deterministic random tree.

    ``spec`` is a dict with key ``kind`` in ``uniform`` (``n``, ``sigma``),
    ``degree_dist`` (``n``, ``dist``: degree -> weight, optional ``sigma``) or
    ``correlated`` (``n`` and either ``rule`` or ``sigma``; a rule maps each
    label to child-label and degree distributions). A tuple ``(kind, n, arg)``
    is accepted as shorthand.
    """
    if isinstance(spec, tuple):
        kind, n, arg = spec
        key = {"uniform": "sigma", "degree_dist": "dist", "correlated": "rule"}[kind]
        if kind == "correlated" and isinstance(arg, int):
            key = "sigma"
        spec = {"kind": kind, "n": n, key: arg}
    n = spec["n"]
    if n < 1:
        raise ValueError("generated trees need n >= 1")
    rng = random.Random(seed)
    kind = spec["kind"]
    if kind == "uniform":
        sigma = spec.get("sigma", 1)
        if sigma < 1:
            raise ValueError("sigma must be >= 1")
        degrees = _uniform_shape(n, rng)
        labels = [rng.randrange(sigma) for _ in range(n)]
        return _degrees_to_tree(degrees, labels, sigma)
    if kind == "degree_dist":
        sigma = spec.get("sigma", 1)
        degrees = _degree_dist_shape(n, spec["dist"], rng, spec.get("max_steps", 50 * n + 1000))
        labels = [rng.randrange(sigma) for _ in range(n)]
        return _degrees_to_tree(degrees, labels, sigma)
    if kind == "correlated":
        rule = spec.get("rule")
        if rule is None:
            rule = random_rule(spec.get("sigma", 3), rng)
        elif rule == "catalog":
            rule = CATALOG_RULE
        return _correlated(n, rule, rng)
    raise ValueError(f"unknown generator kind {kind!r}")


def enumerate_shapes(n: int) -> Iterator[tuple[int, ...]]:
    """Preorder degree sequences of all ordered trees with n nodes."""
    if n < 1:
        return

    def rec(prefix: list[int], open_slots: int, left: int):
        # open_slots: children still owed; the sequence closes when it hits 0
        if left == 0:
            if open_slots == 0:
                yield tuple(prefix)
            return
        if open_slots == 0:
            return
        for d in range(0, left):
            if open_slots - 1 + d > left - 1:
                break
            prefix.append(d)
            yield from rec(prefix, open_slots - 1 + d, left - 1)
            prefix.pop()

    yield from rec([], 1, n)
