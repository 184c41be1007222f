import pytest
from hypothesis import given, settings, strategies as st

from cltree.tree import (LabeledTree, ParseError, enumerate_shapes, generate_tree, naive_query,
                         node_contexts, parse_ltree, parse_xml_skeleton, serialize_ltree)

from conftest import FIXTURES, fixture_tree


@st.composite
def trees(draw, max_n=40, max_sigma=4):
    n = draw(st.integers(1, max_n))
    parent = [-1] + [draw(st.integers(0, v - 1)) for v in range(1, n)]
    sigma = draw(st.integers(1, max_sigma))
    labels = draw(st.lists(st.integers(0, sigma - 1), min_size=n, max_size=n))
    # random parent arrays are not in preorder; rebuild through degrees
    children = [[] for _ in range(n)]
    for v in range(1, n):
        children[parent[v]].append(v)
    order, stack = [], [0]
    while stack:
        v = stack.pop()
        order.append(v)
        stack.extend(reversed(children[v]))
    degrees = [len(children[v]) for v in order]
    return LabeledTree.from_degrees(degrees, [labels[v] for v in order],
                                    [f"t{i}" for i in range(sigma)])


class TestModel:
    def test_from_degrees(self):
        t = LabeledTree.from_degrees([2, 0, 1, 0], [0, 1, 0, 2], ["a", "b", "c"])
        assert t.parent == (-1, 0, 0, 2)
        assert t.children(0) == [1, 2]
        assert t.degree == (2, 0, 1, 0)

    def test_rejects_non_preorder_parent(self):
        with pytest.raises(ValueError):
            LabeledTree([-1, 2, 0], [0, 0, 0], ["a"])

    def test_rejects_bad_label(self):
        with pytest.raises(ValueError):
            LabeledTree([-1, 0], [0, 3], ["a"])

    def test_subtree_sizes_and_depths(self, catalog):
        assert catalog.subtree_sizes()[0] == catalog.n == 25
        assert max(catalog.depths()) == 3

    def test_contexts_truncate_at_root(self, catalog):
        ctx = node_contexts(catalog, 2)
        a = catalog.alphabet
        assert ctx[0] == ()
        assert [a[x] for x in ctx[1]] == ["catalog"]
        assert [a[x] for x in ctx[3]] == ["book", "year"]


class TestParsing:
    def test_roundtrip_with_quotes(self, catalog):
        text = serialize_ltree(catalog)
        assert parse_ltree(text) == catalog
        assert '"William Shakespeare"' in text

    @pytest.mark.parametrize("bad", ["", "(a", "(a))", "(a) (b)", "a", '(a "x)'])
    def test_errors(self, bad):
        with pytest.raises(ParseError):
            parse_ltree(bad)

    def test_error_offset(self):
        with pytest.raises(ParseError) as exc:
            parse_ltree("(a (b)) x")
        assert exc.value.offset == 8

    def test_xml_skeleton(self):
        t = parse_xml_skeleton("<a><b/><b>text<c/></b></a>")
        assert t.degree == (2, 0, 1, 0)
        assert [t.alphabet[l] for l in t.labels] == ["a", "b", "b", "c"]

    def test_xml_matches_ltree_shape(self):
        x = parse_xml_skeleton((FIXTURES / "catalog.xml").read_text())
        full = fixture_tree("catalog.ltree")
        assert x.n == 15 and x.degree[0] == full.degree[0] == 4

    def test_xml_error(self):
        with pytest.raises(ParseError):
            parse_xml_skeleton("<a><b></a>")

    @given(trees())
    @settings(max_examples=60, deadline=None)
    def test_roundtrip_property(self, t):
        assert parse_ltree(serialize_ltree(t)) == t


class TestGenerators:
    def test_shapes_are_catalan(self):
        assert [sum(1 for _ in enumerate_shapes(n)) for n in range(1, 9)] == [1, 1, 2, 5, 14, 42, 132, 429]

    @pytest.mark.parametrize("kind", ["uniform", "correlated"])
    def test_deterministic(self, kind):
        spec = {"kind": kind, "n": 300, "sigma": 3}
        assert generate_tree(spec, 5) == generate_tree(spec, 5)
        assert generate_tree(spec, 5).n == 300

    def test_degree_dist_full_binary(self):
        t = generate_tree({"kind": "degree_dist", "n": 101, "dist": {0: 1, 2: 1}}, 3)
        assert set(t.degree) == {0, 2}

    def test_degree_dist_infeasible(self):
        with pytest.raises(ValueError):
            generate_tree({"kind": "degree_dist", "n": 10, "dist": {0: 1, 2: 1}}, 0)

    def test_catalog_rule_degree_follows_label(self):
        t = generate_tree({"kind": "correlated", "n": 2000, "rule": "catalog"}, 1)
        by_label = {}
        for l, d in zip(t.labels[1:], t.degree[1:]):
            by_label.setdefault(t.alphabet[l], set()).add(d)
        assert by_label["book"] == {3} and by_label["magazine"] == {2}


class TestNaiveOracle:
    def test_catalog_answers(self, catalog):
        assert naive_query(catalog, "parent", 0) is None
        assert naive_query(catalog, "childselect_label", 0, 1, "magazine") == 15
        assert naive_query(catalog, "depth", 3) == 3
        assert naive_query(catalog, "lca", 3, 9) == 0
        assert naive_query(catalog, "childrank", 8) == 1
        assert naive_query(catalog, "level_ancestor_label", 3, 1, "book") == 1
        assert naive_query(catalog, "depth_label", 3, "catalog") == 1

    def test_child_out_of_range(self, catalog):
        with pytest.raises(IndexError):
            naive_query(catalog, "child", 0, 4)

    def test_level_ancestor_past_root(self, catalog):
        assert naive_query(catalog, "level_ancestor", 3, 4) is None
        assert naive_query(catalog, "level_ancestor", 3, 3) == 0
