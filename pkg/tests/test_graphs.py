import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import complete, cycle, graph_and_permutation, graphs, path
from oswl.errors import GraphError, GuardError
from oswl.graphs import (
    atomic_pattern,
    atomic_type,
    build_graph,
    count_subgraphs,
    enumerate_subgraphs,
    triangle_count,
)


class TestBuildGraph:
    def test_normalizes_edge_order(self):
        g = build_graph(3, [(2, 0), (1, 0)])
        assert g.edges == ((0, 1), (0, 2))

    def test_rejects_self_loop(self):
        with pytest.raises(GraphError, match="self-loop"):
            build_graph(2, [(1, 1)])

    def test_rejects_duplicate_edges(self):
        with pytest.raises(GraphError, match="duplicate"):
            build_graph(3, [(0, 1), (1, 0)])

    def test_rejects_out_of_range(self):
        with pytest.raises(GraphError, match="outside"):
            build_graph(2, [(0, 2)])

    def test_label_mapping_defaults_to_zero(self):
        g = build_graph(3, [], {1: 7})
        assert g.labels == (0, 7, 0)

    def test_label_sequence_length_checked(self):
        with pytest.raises(GraphError, match="labels"):
            build_graph(3, [], [1, 2])

    def test_feature_validation(self):
        g = build_graph(2, [(0, 1)], vertex_features=[[1.0], [2.0]], edge_features=[[0.5]])
        assert g.vertex_features == ((1.0,), (2.0,))
        assert g.edge_features == ((0.5,),)
        with pytest.raises(GraphError, match="mixed"):
            build_graph(2, [(0, 1)], vertex_features=[[1.0], [2.0, 3.0]])
        with pytest.raises(GraphError, match="edge_features"):
            build_graph(2, [(0, 1)], edge_features=[[1.0], [2.0]])

    def test_adjacency_and_degrees(self):
        g = path(4)
        assert g.adjacency == ((1,), (0, 2), (1, 3), (2,))
        assert g.degree_sequence() == (1, 1, 2, 2)
        assert g.degree(1) == 2
        assert g.has_edge(2, 1) and not g.has_edge(0, 3)


class TestPermute:
    def test_cycle_rotation_is_automorphism(self):
        g = cycle(5)
        rot = g.permute([(i + 1) % 5 for i in range(5)])
        assert rot == g

    def test_swap_moves_edges(self):
        g = path(4)
        h = g.permute([1, 0, 2, 3])
        assert h.edges == ((0, 1), (0, 2), (2, 3))

    def test_rejects_non_permutation(self):
        with pytest.raises(GraphError, match="permutation"):
            path(3).permute([0, 0, 1])

    @given(graph_and_permutation(max_n=8))
    @settings(max_examples=60, deadline=None)
    def test_invariants_preserved(self, gp):
        g, perm = gp
        h = g.permute(perm)
        assert h.degree_sequence() == g.degree_sequence()
        assert h.label_histogram() == g.label_histogram()
        assert len(h.edges) == len(g.edges)
        for u, v in g.edges:
            assert h.has_edge(perm[u], perm[v])

    @given(graph_and_permutation(max_n=8))
    @settings(max_examples=30, deadline=None)
    def test_inverse_round_trips(self, gp):
        g, perm = gp
        inverse = [0] * g.n
        for v, t in enumerate(perm):
            inverse[t] = v
        assert g.permute(perm).permute(inverse) == g

    def test_features_follow_vertices(self):
        g = build_graph(
            3,
            [(0, 1), (1, 2)],
            vertex_features=[[1.0], [2.0], [3.0]],
            edge_features=[[10.0], [20.0]],
        )
        h = g.permute([2, 1, 0])
        assert h.vertex_features == ((3.0,), (2.0,), (1.0,))
        # edge (0,1) with feature 10 becomes (1,2); (1,2) with 20 becomes (0,1)
        assert h.edges == ((0, 1), (1, 2))
        assert h.edge_features == ((20.0,), (10.0,))


class TestSubgraphEnumeration:
    def test_ordered_counts(self):
        g = path(3)
        subs = list(enumerate_subgraphs(g, 2))
        assert len(subs) == 9 == count_subgraphs(g, 2)
        assert all(s.ordered for s in subs)
        assert (2, 2) in {s.vertices for s in subs}

    def test_unordered_counts(self):
        g = path(4)
        subs = list(enumerate_subgraphs(g, 2, ordered=False))
        assert len(subs) == 6 == count_subgraphs(g, 2, ordered=False)
        assert all(s.vertices == tuple(sorted(s.vertices)) for s in subs)

    def test_unordered_size_guard(self):
        with pytest.raises(GuardError):
            list(enumerate_subgraphs(path(2), 3, ordered=False))
        with pytest.raises(GuardError):
            count_subgraphs(path(2), 3, ordered=False)

    def test_position_labels(self):
        sub = next(iter(enumerate_subgraphs(path(3), 2)))
        assert sub.vertices == (0, 0)
        assert sub.position_labels() == {0: (1, 2)}


class TestAtomicTypes:
    def test_adjacency_sensitivity(self):
        g = path(3)
        assert atomic_pattern(g, (0, 1)) != atomic_pattern(g, (0, 2))

    def test_equality_sensitivity(self):
        g = path(3)
        assert atomic_pattern(g, (0, 0)) != atomic_pattern(g, (0, 2))

    def test_label_sensitivity(self):
        g = build_graph(2, [(0, 1)], [0, 1])
        assert atomic_pattern(g, (0, 1)) != atomic_pattern(g, (1, 0))

    def test_partial_isomorphism_characterization(self):
        # same pattern exactly when the index map preserves structure
        g = cycle(6)
        assert atomic_pattern(g, (0, 1, 2)) == atomic_pattern(g, (3, 4, 5))
        assert atomic_pattern(g, (0, 1, 2)) != atomic_pattern(g, (0, 2, 4))

    def test_empty_tuple_rejected(self):
        with pytest.raises(GraphError):
            atomic_pattern(path(2), ())

    def test_out_of_range_rejected(self):
        with pytest.raises(GraphError):
            atomic_pattern(path(2), (0, 5))

    def test_atomic_type_standalone_matches_table(self):
        from oswl.colors import ColorTable

        g = cycle(4)
        table = ColorTable()
        with_table = atomic_type(g, (0, 1), table)
        assert with_table == atomic_type(g, (0, 1), table)
        assert atomic_type(g, (0, 1)).canonical_code == atomic_type(g, (2, 3)).canonical_code


class TestTriangleCount:
    @pytest.mark.parametrize(
        "graph,expected",
        [(complete(4), 4), (complete(5), 10), (cycle(3), 1), (cycle(6), 0), (path(5), 0)],
    )
    def test_named_graphs(self, graph, expected):
        assert triangle_count(graph) == expected

    @given(graphs(max_n=8))
    @settings(max_examples=60, deadline=None)
    def test_matches_brute_force(self, g):
        brute = sum(
            1
            for a, b, c in itertools.combinations(range(g.n), 3)
            if g.has_edge(a, b) and g.has_edge(b, c) and g.has_edge(a, c)
        )
        assert triangle_count(g) == brute
