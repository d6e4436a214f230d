import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import complete, cycle, disjoint_union, graph_and_permutation, graphs, path
from oracles import naive_cr_partition, naive_cr_verdict, naive_kwl_verdict
from oswl.colors import ColorTable, partition_of, refines
from oswl.errors import CapExceeded, GuardError
from oswl.refinement import (
    AlgorithmSpec,
    color_refinement,
    distinguish,
    k_wl,
    parse_algorithm,
)


class TestColorRefinement:
    @given(graphs(max_n=10))
    @settings(max_examples=80, deadline=None)
    def test_partition_matches_oracle(self, g):
        ours = partition_of(color_refinement(g).vertex_colors)
        assert ours == naive_cr_partition(g)

    def test_path_partition(self):
        # P5 stabilizes with ends, near-ends, and middle separated
        coloring = color_refinement(path(5))
        assert partition_of(coloring.vertex_colors) == frozenset(
            {frozenset({0, 4}), frozenset({1, 3}), frozenset({2})}
        )
        assert coloring.stable

    def test_regular_graph_stays_monochrome(self):
        coloring = color_refinement(cycle(7))
        assert coloring.num_classes() == 1
        assert coloring.round == 0

    def test_labels_seed_the_partition(self):
        g = cycle(4, label=0)
        marked = g.__class__(g.n, g.edges, (1, 0, 0, 0))
        assert color_refinement(marked).num_classes() == 3

    def test_empty_graph(self):
        from oswl.graphs import build_graph

        coloring = color_refinement(build_graph(0, []))
        assert coloring.vertex_colors == []


class TestPairVerdicts:
    @given(graphs(max_n=8), graphs(max_n=8))
    @settings(max_examples=80, deadline=None)
    def test_cr_verdict_matches_oracle(self, g1, g2):
        expected, expected_round = naive_cr_verdict(g1, g2)
        got = distinguish(g1, g2, "cr")
        assert got.verdict == expected
        if expected == "distinguished":
            assert got.round == expected_round

    def test_cr_blind_to_c6_vs_two_triangles(self):
        got = distinguish(cycle(6), disjoint_union(cycle(3), cycle(3)), "cr")
        assert got.verdict == "equivalent"

    def test_cr_separates_by_degree(self):
        assert distinguish(path(3), cycle(3), "cr").verdict == "distinguished"

    @given(graph_and_permutation(max_n=8))
    @settings(max_examples=40, deadline=None)
    def test_cr_isomorphic_pairs_equivalent(self, gp):
        g, perm = gp
        assert distinguish(g, g.permute(perm), "cr").verdict == "equivalent"

    def test_kwl2_separates_c6_vs_two_triangles(self):
        got = distinguish(cycle(6), disjoint_union(cycle(3), cycle(3)), "kwl:2")
        assert got.verdict == "distinguished"

    @given(graphs(max_n=5), graphs(max_n=5))
    @settings(max_examples=25, deadline=None)
    def test_kwl2_verdict_matches_oracle(self, g1, g2):
        expected, _ = naive_kwl_verdict(g1, g2, 2)
        assert distinguish(g1, g2, "kwl:2").verdict == expected

    @given(graph_and_permutation(max_n=5))
    @settings(max_examples=20, deadline=None)
    def test_kwl2_isomorphic_pairs_equivalent(self, gp):
        g, perm = gp
        assert distinguish(g, g.permute(perm), "kwl:2").verdict == "equivalent"

    def test_verdict_round_reporting(self):
        # uniform labels agree at round 0; degrees split the histograms at round 1
        got = distinguish(path(3), cycle(3), "cr")
        assert got.round == 1
        sizes = distinguish(path(2), path(3), "cr")
        assert sizes.verdict == "distinguished" and sizes.round == 0


class TestKwlEngine:
    @given(graphs(max_n=6))
    @settings(max_examples=30, deadline=None)
    def test_diagonal_refines_cr(self, g):
        cr_colors = color_refinement(g).vertex_colors
        kwl_colors = k_wl(g, 2).vertex_colors
        assert refines(kwl_colors, cr_colors)

    def test_tuple_cap_enforced(self):
        with pytest.raises(CapExceeded):
            k_wl(cycle(40), 2, cap=100)

    def test_k1_rejected(self):
        with pytest.raises(GuardError):
            k_wl(cycle(4), 1)

    def test_stable_flag_and_space(self):
        coloring = k_wl(cycle(4), 2)
        assert coloring.stable
        assert coloring.space == "tuples"
        assert len(coloring.colors) == 16
        assert len(coloring.vertex_colors) == 4


class TestAlgorithmParsing:
    @pytest.mark.parametrize(
        "text,kind,k",
        [
            ("cr", "cr", 0),
            ("kwl:2", "kwl", 2),
            ("kwl:3", "kwl", 3),
            ("oswl:1", "oswl", 1),
            ("oswl:0", "oswl", 0),
            ("vs-oswl:2", "vs-oswl", 2),
        ],
    )
    def test_valid(self, text, kind, k):
        spec = parse_algorithm(text)
        assert (spec.kind, spec.k) == (kind, k)
        assert parse_algorithm(spec.name()) == spec

    @pytest.mark.parametrize("text", ["", "wl", "kwl", "kwl:1", "kwl:x", "oswl:-1", "os wl:1"])
    def test_invalid(self, text):
        with pytest.raises(GuardError):
            parse_algorithm(text)


class TestVerdictSerialization:
    def test_to_json_shape(self):
        got = distinguish(path(3), cycle(3), "cr")
        doc = got.to_json()
        assert doc["verdict"] == "distinguished"
        assert doc["algorithm"] == "cr"
        assert isinstance(doc["round"], int)
        for side in doc["histograms"]:
            for color, count in side:
                assert isinstance(color, str) and isinstance(count, int)

    def test_repeat_runs_byte_identical(self):
        import json

        a = distinguish(cycle(6), disjoint_union(cycle(3), cycle(3)), "kwl:2")
        b = distinguish(cycle(6), disjoint_union(cycle(3), cycle(3)), "kwl:2")
        assert json.dumps(a.to_json()) == json.dumps(b.to_json())

    def test_shared_table_optional(self):
        # content-addressed ids make results table-independent
        t1, t2 = ColorTable(), ColorTable()
        a = distinguish(cycle(5), path(5), "cr", table=t1)
        b = distinguish(cycle(5), path(5), "cr", table=t2)
        assert a.to_json() == b.to_json()
