import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from roughlift.trees import (Cut, DecoratedForest, TreeError, admissible_cuts,
                             chop, forest_product, format_forest,
                             is_admissible_cut, multiple_cuts, natural_order,
                             parse_forest, single, split, structure_queries,
                             trunk)


def all_forests(n, distinct_labels=True):
    """Every decorated forest on n vertices, via parent maps with parent < child.

    Vertex j is decorated j (distinct labels), so canonical keys separate
    shapes; duplicates from relabelling are removed.
    """
    seen = {}
    choices = [range(0, j + 1) for j in range(1, n)]  # parent of vertex j+1 in {0(root),1..j}
    for combo in itertools.product(*choices):
        parent = {j + 2: p for j, p in enumerate(combo) if p != 0}
        labels = {v: v if distinct_labels else 1 for v in range(1, n + 1)}
        f = DecoratedForest(range(1, n + 1), parent, labels)
        seen.setdefault(f.canonical_key(), f)
    return list(seen.values())


def brute_force_cuts(forest):
    """Independent oracle: filter all vertex subsets by the cut definition."""
    vs = forest.vertices
    roots = set(forest.roots)
    out = []
    for r in range(1, len(vs) + 1):
        for subset in itertools.combinations(vs, r):
            chosen = frozenset(subset)
            comp_roots = {next(iter(set(forest.component_of(v)) & roots)) for v in chosen}
            ok = True
            for v in chosen:
                for w in chosen:
                    if v != w and forest.connects_to(v, w):
                        ok = False
            for v in chosen & roots:
                # root allowed only as the sole choice of its component
                comp = forest.component_of(v)
                if len(chosen & comp) != 1:
                    ok = False
            if chosen == roots:
                ok = False  # trivial all-root combination
            if len(forest.roots) == 1 and chosen & roots:
                ok = False  # tree cuts never contain the root
            if ok:
                out.append(chosen)
            del comp_roots
    return set(out)


def cherry():
    # root 1 decorated 1 with two leaf children decorated 2 and 3
    return DecoratedForest([1, 2, 3], {2: 1, 3: 1}, {1: 1, 2: 2, 3: 3})


class TestTrunk:
    def test_single_vertex(self):
        t = trunk(1, [7])
        assert t.n == 1 and t.label(1) == 7 and not t.parent

    def test_chain_3(self):
        t = trunk(3, [1, 2, 3])
        assert t.roots == (1,)
        assert dict(t.parent) == {2: 1, 3: 2}
        assert [t.label(j) for j in (1, 2, 3)] == [1, 2, 3]

    def test_repeated_labels_allowed(self):
        t = trunk(2, [5, 5])
        assert t.label(1) == t.label(2) == 5

    def test_zero_rejected(self):
        with pytest.raises(TreeError):
            trunk(0, [])


class TestCuts:
    def test_single_vertex_has_no_cuts(self):
        assert admissible_cuts(single(4)) == []

    def test_trunk3_cuts(self):
        got = {c.chosen for c in admissible_cuts(trunk(3, [1, 1, 1]))}
        assert got == {frozenset({2}), frozenset({3})}

    def test_cherry_cuts(self):
        got = {c.chosen for c in admissible_cuts(cherry())}
        assert got == {frozenset({2}), frozenset({3}), frozenset({2, 3})}

    def test_trunk_cut_count(self):
        for n in range(1, 9):
            assert len(admissible_cuts(trunk(n, [1] * n))) == n - 1

    @pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
    def test_matches_brute_force(self, n):
        for forest in all_forests(n):
            got = {c.chosen for c in admissible_cuts(forest)}
            assert got == brute_force_cuts(forest)
            assert len(got) == len(admissible_cuts(forest))
            assert all(is_admissible_cut(forest, c) for c in got)


class TestSplit:
    def test_trunk_cut_at_v(self):
        n = 5
        t = trunk(n, list(range(1, n + 1)))
        for v in range(2, n + 1):
            roo, lea = split(t, Cut(frozenset({v})))
            assert set(roo.vertices) == set(range(1, v))
            assert set(lea.vertices) == set(range(v, n + 1))
            assert roo == trunk(v - 1, list(range(1, v)))
            assert lea == trunk(n - v + 1, list(range(v, n + 1)))

    def test_example_tree_cut_at_leaf(self):
        # 3-vertex tree: root with two leaf children; cutting one leaf leaves a 2-chain
        t = cherry()
        roo, lea = split(t, Cut(frozenset({2})))
        assert roo == trunk(2, [1, 3])
        assert lea == single(2)

    def test_cherry_double_cut(self):
        roo, lea = split(cherry(), Cut(frozenset({2, 3})))
        assert roo == single(1)
        assert lea == forest_product(single(2), single(3))

    def test_non_admissible_rejected(self):
        t = trunk(3, [1, 2, 3])
        with pytest.raises(TreeError):
            split(t, Cut(frozenset({2, 3})))  # comparable pair
        with pytest.raises(TreeError):
            split(t, Cut(frozenset({1})))  # root

    @pytest.mark.parametrize("n", [2, 3, 4, 5])
    def test_partition_and_no_crossing_edges(self, n):
        for forest in all_forests(n):
            for cut in admissible_cuts(forest):
                roo, lea = split(forest, cut)
                assert set(roo.vertices) | set(lea.vertices) == set(forest.vertices)
                assert not set(roo.vertices) & set(lea.vertices)
                severed = 0
                for v, p in forest.parent.items():
                    if v in lea.vertices and p in roo.vertices:
                        assert v in cut.chosen
                        severed += 1
                    if v in roo.vertices and p in lea.vertices:
                        pytest.fail("edge from leaves part down into root part")
                assert severed == len(cut.chosen & {w for w in forest.vertices
                                                    if w in forest.parent})


class TestMultipleCuts:
    def test_single_vertex(self):
        assert multiple_cuts(single(1)) == []

    def test_trunk3(self):
        mcs = multiple_cuts(trunk(3, [1, 2, 3]))
        as_sets = {mc.levels for mc in mcs}
        assert as_sets == {
            (frozenset({2}),),
            (frozenset({3}),),
            (frozenset({2}), frozenset({3})),
        }

    @pytest.mark.parametrize("n", [2, 3, 4, 5])
    def test_trunk_count(self, n):
        assert len(multiple_cuts(trunk(n, [1] * n))) == 2 ** (n - 1) - 1

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_depth_one_equals_admissible_cuts(self, n):
        for forest in all_forests(n):
            if not forest.is_tree():
                continue
            got = {mc.levels[0] for mc in multiple_cuts(forest) if mc.depth == 1}
            assert got == {c.chosen for c in admissible_cuts(forest)}

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_levels_are_nested_admissible_cuts(self, n):
        for forest in all_forests(n):
            if not forest.is_tree():
                continue
            for mc in multiple_cuts(forest):
                current = forest
                for level in reversed(mc.levels):
                    assert is_admissible_cut(current, level)
                    current, _ = split(current, Cut(level))
                # chop agrees and partitions the vertex set
                roo, pieces = chop(forest, mc)
                got = set(roo.vertices).union(*(p.vertices for p in pieces))
                assert got == set(forest.vertices)


class TestStructureQueries:
    def test_fig5_shape(self):
        # root 1 with children 2 and 5; 2 has leaf children 3, 4; 5 has leaf child 6
        t = DecoratedForest(range(1, 7), {2: 1, 5: 1, 3: 2, 4: 2, 6: 5},
                            {v: 1 for v in range(1, 7)})
        s = structure_queries(t, natural_order(t))
        assert s.leaves == frozenset({3, 4, 6})
        assert s.w_max[2] == 4
        assert s.w_max[1] == 6
        assert s.branches[(6, 1)] == frozenset({6, 5})
        assert s.branches[(2, 1)] == frozenset({2})
        assert s.leaf_sets[2] == frozenset({3, 4})
        # vertices where two or more branches join; 5 has a single child
        assert s.nodes == frozenset({1, 2})
        assert s.uppermost_nodes == frozenset({2})

    def test_trunk(self):
        n = 6
        t = trunk(n, [1] * n)
        s = structure_queries(t, natural_order(t))
        assert s.leaves == frozenset({n})
        assert s.nodes == frozenset()
        assert len(s.branches) == 1
        assert s.branches[(n, 1)] == frozenset(range(2, n + 1))
        assert all(s.w_max[v] == n for v in range(1, n + 1))

    def test_single_vertex(self):
        t = single(3)
        s = structure_queries(t, natural_order(t))
        assert s.leaves == frozenset({1})
        assert s.w_max[1] == 1


class TestCanonicalForm:
    def test_component_order_irrelevant(self):
        a = forest_product(single(1), trunk(2, [2, 3]))
        b = forest_product(trunk(2, [2, 3]), single(1))
        assert a == b and hash(a) == hash(b)

    def test_sibling_order_irrelevant(self):
        a = DecoratedForest([1, 2, 3], {2: 1, 3: 1}, {1: 1, 2: 2, 3: 3})
        b = DecoratedForest([1, 2, 3], {2: 1, 3: 1}, {1: 1, 2: 3, 3: 2})
        assert a == b

    def test_decoration_matters(self):
        assert trunk(2, [1, 2]) != trunk(2, [2, 1])


class TestTextFormat:
    def test_examples(self):
        assert format_forest(cherry()) == "1(2,3)"
        assert format_forest(trunk(3, [1, 2, 3])) == "1(2(3))"
        assert parse_forest("1(2,3)") == cherry()
        assert parse_forest("2(3)*1") == forest_product(trunk(2, [2, 3]), single(1))

    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_round_trip_exhaustive(self, n):
        for forest in all_forests(n):
            text = format_forest(forest)
            assert format_forest(parse_forest(text)) == text
            assert parse_forest(text) == forest

    @given(st.integers(1, 200))
    @settings(max_examples=40, deadline=None)
    def test_round_trip_random(self, seed):
        import random
        rng = random.Random(seed)
        n = rng.randint(1, 9)
        parent = {j: rng.randint(1, j - 1) for j in range(2, n + 1) if rng.random() < 0.8}
        labels = {v: rng.randint(1, 5) for v in range(1, n + 1)}
        f = DecoratedForest(range(1, n + 1), parent, labels)
        assert parse_forest(format_forest(f)) == f

    def test_bad_text_rejected(self):
        for bad in ["", "1(", "1)2", "a", "1(2,)"]:
            with pytest.raises(TreeError):
                parse_forest(bad)
