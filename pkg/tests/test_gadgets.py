import math

import pytest

from oswl.errors import GraphError, GuardError
from oswl.gadgets import (
    backbone_pair,
    cfi_pair,
    default_twist_edge,
    find_colorful_d2_clique,
    furer_golden,
    furer_graph,
    furer_pair,
    furer_twist_isomorphism,
    gen_backbone,
    gen_cfi,
    gen_furer,
)
from oswl.refinement import distinguish


def expected_cfi_size(k: int) -> int:
    return (k + 1) * 2 ** (k - 1) + 2 * math.comb(k + 1, 2)


class TestCfiConstruction:
    @pytest.mark.parametrize("k", [1, 2, 3, 4])
    def test_sizes(self, k):
        g, h = cfi_pair(k)
        assert g.graph.n == h.graph.n == expected_cfi_size(k)
        assert len(g.graph.edges) == len(h.graph.edges)

    def test_k2_is_the_twelve_vertex_pair(self):
        g, h = cfi_pair(2)
        assert g.graph.n == 12
        assert len(g.graph.edges) == 15

    @pytest.mark.parametrize("k", [2, 3])
    def test_shared_degree_sequences_and_labels(self, k):
        g, h = cfi_pair(k)
        assert g.graph.degree_sequence() == h.graph.degree_sequence()
        assert g.graph.label_histogram() == h.graph.label_histogram()

    def test_k1_degenerates_to_star_versus_path(self):
        # at k=1 the even/odd split leaves a star and a path: the one
        # parameter where the pair is separated by plain degree counts
        g, h = cfi_pair(1)
        assert g.graph.degree_sequence() == (1, 1, 1, 3)
        assert h.graph.degree_sequence() == (1, 1, 2, 2)
        assert g.graph.label_histogram() == h.graph.label_histogram()

    def test_cloud_structure(self):
        g = gen_cfi(2, "G")
        clouds = g.clouds()
        assert sorted(clouds) == ["e0-1", "e0-2", "e1-2", "v0", "v1", "v2"]
        assert all(len(clouds[f"v{v}"]) == 2 for v in range(3))
        assert all(len(c) == 2 for key, c in clouds.items() if key.startswith("e"))
        # vertex-cloud labels are the base vertex; edge clouds get fresh labels
        for node, key in g.cloud_map.items():
            if key.startswith("v"):
                assert g.graph.labels[node] == int(key[1:])
            else:
                assert g.graph.labels[node] >= 3

    def test_sidecar_round_trips_clouds(self):
        g = gen_cfi(2, "H")
        doc = g.sidecar()
        assert doc["generator"] == "cfi"
        assert doc["variant"] == "H"
        assert sum(len(v) for v in doc["clouds"].values()) == g.graph.n
        assert set(doc["kinds"].values()) == {"vertex", "edge"}

    @pytest.mark.parametrize("bad", [0, -1, 16])
    def test_parameter_guards(self, bad):
        with pytest.raises(GuardError):
            gen_cfi(bad, "G")

    def test_variant_guard(self):
        with pytest.raises(GuardError):
            gen_cfi(2, "X")


class TestCfiSeparations:
    def test_refinement_blind_at_k2_and_k3(self):
        for k in (2, 3):
            g, h = cfi_pair(k)
            assert distinguish(g.graph, h.graph, "cr").verdict == "equivalent"

    def test_kwl2_splits_k2_but_not_k3(self):
        g2, h2 = cfi_pair(2)
        assert distinguish(g2.graph, h2.graph, "kwl:2").verdict == "distinguished"
        g3, h3 = cfi_pair(3)
        assert distinguish(g3.graph, h3.graph, "kwl:2").verdict == "equivalent"

    def test_kwl3_splits_k3(self):
        g3, h3 = cfi_pair(3)
        assert distinguish(g3.graph, h3.graph, "kwl:3").verdict == "distinguished"

    def test_subgraph_engine_ladder(self):
        # marking one vertex cracks the k=2 pair; the k=3 pair needs two
        g2, h2 = cfi_pair(2)
        assert distinguish(g2.graph, h2.graph, "oswl:1").verdict == "distinguished"
        g3, h3 = cfi_pair(3)
        assert distinguish(g3.graph, h3.graph, "oswl:1").verdict == "equivalent"
        assert distinguish(g3.graph, h3.graph, "oswl:2").verdict == "distinguished"


class TestDistanceTwoCliques:
    def test_size_three_witness_in_g2_only(self):
        g2, h2 = cfi_pair(2)
        assert find_colorful_d2_clique(g2.graph, 3, g2.cloud_map) == (0, 2, 4)
        assert find_colorful_d2_clique(h2.graph, 3, h2.cloud_map) is None

    def test_size_four_witness_in_g3_only(self):
        g3, h3 = cfi_pair(3)
        assert find_colorful_d2_clique(g3.graph, 4, g3.cloud_map) == (0, 4, 8, 12)
        assert find_colorful_d2_clique(h3.graph, 4, h3.cloud_map) is None

    def test_small_witnesses_exist_in_both(self):
        g2, h2 = cfi_pair(2)
        assert find_colorful_d2_clique(h2.graph, 2, h2.cloud_map) is not None
        assert find_colorful_d2_clique(g2.graph, 1, g2.cloud_map) == (0,)

    def test_witness_really_is_a_distance_two_clique(self):
        g3, _ = cfi_pair(3)
        witness = find_colorful_d2_clique(g3.graph, 4, g3.cloud_map)
        for i, u in enumerate(witness):
            for v in witness[i + 1:]:
                assert not g3.graph.has_edge(u, v)
                assert set(g3.graph.adjacency[u]) & set(g3.graph.adjacency[v])
                assert g3.cloud_map[u] != g3.cloud_map[v]

    def test_size_guards(self):
        g2, _ = cfi_pair(2)
        with pytest.raises(GuardError):
            find_colorful_d2_clique(g2.graph, 0, g2.cloud_map)
        with pytest.raises(GuardError):
            find_colorful_d2_clique(g2.graph, 7, g2.cloud_map)


class TestFurerConstruction:
    def test_cloud_sizes_follow_degrees(self):
        fg = gen_furer(2, 4)
        counts: dict[str, int] = {}
        for _, key in fg.cloud_map.items():
            counts[key] = counts.get(key, 0) + 1
        base_deg = {0: 2, 1: 3, 2: 3, 3: 2, 4: 2, 5: 3, 6: 3, 7: 2}
        for v, d in base_deg.items():
            assert counts[f"v{v}"] == 2 ** (d - 1)

    def test_default_twist_prefers_degree_three_pairs(self):
        assert default_twist_edge(2, 4) == (1, 2)
        assert default_twist_edge(2, 2) == (0, 1)

    def test_twist_edge_must_be_real(self):
        with pytest.raises(GuardError):
            furer_graph(2, 3, twisted_edges=((0, 5),))

    def test_size_guards(self):
        with pytest.raises(GuardError):
            gen_furer(0, 4)
        with pytest.raises(GuardError):
            gen_furer(2, 1)

    def test_k_base_alias(self):
        assert gen_furer(k_base=1, n=3).graph == gen_furer(2, 3).graph
        with pytest.raises(GuardError):
            gen_furer(h=3, n=3, k_base=3)

    def test_pair_carries_twist_metadata(self):
        pair = furer_pair(2, 4)
        assert pair.twist_edge == (1, 2)
        assert pair.x_graph.n == pair.y_graph.n
        assert pair.x_graph.label_histogram() == pair.y_graph.label_histogram()


class TestFurerTwistParity:
    def test_double_twist_isomorphic_to_untwisted(self):
        # twisting two edges sharing a base vertex undoes itself: flip both
        # edge bits in every cloud node of the shared vertex
        plain = furer_graph(2, 2).graph
        double = furer_graph(2, 2, twisted_edges=((0, 1), (0, 2)))
        iso = furer_twist_isomorphism(double, [1, 0, 2])
        perm = [iso[v] for v in range(double.graph.n)]
        assert double.graph.permute(perm) == plain

    def test_double_twist_engine_equivalent(self):
        plain = furer_graph(2, 2).graph
        double = furer_graph(2, 2, twisted_edges=((0, 1), (0, 2))).graph
        assert distinguish(plain, double, "kwl:3").verdict == "equivalent"

    def test_single_twist_changes_the_graph(self):
        pair = furer_pair(2, 2)
        assert distinguish(pair.x_graph, pair.y_graph, "kwl:2").verdict == "distinguished"

    def test_twist_iso_needs_a_path(self):
        double = furer_graph(2, 2, twisted_edges=((0, 1), (0, 2)))
        with pytest.raises(GraphError):
            furer_twist_isomorphism(double, [0, 1])
        with pytest.raises(GraphError):
            furer_twist_isomorphism(double, [0, 3, 1])


class TestFurerGolden:
    def test_golden_file_pins_smallest_clean_separation(self):
        doc = furer_golden()
        assert doc["h"] == 2 and doc["n"] == 4
        row = doc["scan"][str(doc["n"])]
        assert row["kwl:2"] == "distinguished"
        assert row["cr"] == row["oswl:1"] == row["vs-oswl:1"] == "equivalent"

    def test_golden_scan_records_small_grid_anomaly(self):
        # below the pinned n the ladder is short enough for one mark to pin
        # the twist, so the subgraph engine still separates the pair
        doc = furer_golden()
        for n in ("2", "3"):
            assert doc["scan"][n]["oswl:1"] == "distinguished"
            assert doc["scan"][n]["kwl:2"] == "distinguished"

    def test_golden_verdicts_reproduce(self):
        doc = furer_golden()
        pair = furer_pair(doc["h"], doc["n"])
        assert distinguish(pair.x_graph, pair.y_graph, "cr").verdict == "equivalent"
        assert distinguish(pair.x_graph, pair.y_graph, "oswl:1").verdict == "equivalent"
        assert (
            distinguish(pair.x_graph, pair.y_graph, "kwl:2").verdict == "distinguished"
        )


class TestBackbone:
    def test_structure(self):
        for k in (1, 2):
            for pattern in ("alternating", "blocked"):
                graph = gen_backbone(k, pattern)
                gadget_n = expected_cfi_size(k)
                assert graph.n == 4 + 4 * gadget_n
                red = max(graph.labels)
                assert [graph.labels[v] for v in range(4)] == [red] * 4
                assert graph.has_edge(0, 1) and graph.has_edge(2, 3)
                assert graph.has_edge(0, 3) and not graph.has_edge(0, 2)
                # each anchor is adjacent to every vertex of its own gadget
                for anchor in range(4):
                    lo = 4 + anchor * gadget_n
                    assert all(
                        graph.has_edge(anchor, w) for w in range(lo, lo + gadget_n)
                    )

    def test_pattern_guard(self):
        with pytest.raises(GuardError):
            gen_backbone(2, "striped")

    def test_k1_pair_split_by_plain_refinement(self):
        # the star-versus-path gadgets leak through every engine here
        x, y = backbone_pair(1)
        assert distinguish(x, y, "cr").verdict == "distinguished"

    def test_k2_pair_verdict_ladder(self):
        # the two arrangements of refinement-equivalent gadgets: plain
        # refinement is blind, kwl:2 separates, and of the two subgraph
        # aggregations only the per-subgraph one stays blind (the per-vertex
        # multiset ties mark identities across runs and leaks the layout)
        x, y = backbone_pair(2)
        assert distinguish(x, y, "cr").verdict == "equivalent"
        assert distinguish(x, y, "oswl:1").verdict == "distinguished"
        assert distinguish(x, y, "vs-oswl:1").verdict == "equivalent"
        assert distinguish(x, y, "kwl:2").verdict == "distinguished"
