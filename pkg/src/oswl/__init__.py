"""Ordered-subgraph Weisfeiler-Leman refinement, hard-instance generators,
top-k subgraph sampling with implicit-MLE gradients, and a small
explicit-backprop GNN stack."""

from .colors import ColorTable, histogram
from .errors import (
    CapExceeded,
    ColorCollisionError,
    EmptySelection,
    GraphError,
    GuardError,
    OswlError,
    ParseError,
)
from .gadgets import (
    backbone_pair,
    cfi_pair,
    furer_golden,
    furer_pair,
    gen_backbone,
    gen_cfi,
    gen_furer,
)
from .graphs import (
    AtomicType,
    LabeledGraph,
    OrderedSubgraph,
    atomic_type,
    build_graph,
    count_subgraphs,
    enumerate_subgraphs,
    triangle_count,
)
from .graphio import read_graph, write_graph
from .refinement import (
    AlgorithmSpec,
    Coloring,
    Verdict,
    color_refinement,
    distinguish,
    k_wl,
    parse_algorithm,
)
from .sampling import (
    EncodingVector,
    MaskedAdjacency,
    PolicyMasks,
    SamplerConfig,
    apply_policy,
    enumerate_encodings,
    exact_distribution_oracle,
    imle_finite_difference,
    imle_gradient,
    map_solve,
    sample_subgraph,
    to_masked_adjacency,
    vertex_grad_from_edges,
)
from .subgraph_refinement import (
    OswlConfig,
    oswl_graph_color,
    oswl_pair_verdict,
    oswl_vertex_colors,
    vs_oswl_graph_color,
)

__all__ = [
    "AlgorithmSpec",
    "AtomicType",
    "CapExceeded",
    "ColorCollisionError",
    "ColorTable",
    "Coloring",
    "EmptySelection",
    "EncodingVector",
    "GraphError",
    "GuardError",
    "LabeledGraph",
    "MaskedAdjacency",
    "OrderedSubgraph",
    "OswlConfig",
    "OswlError",
    "ParseError",
    "PolicyMasks",
    "SamplerConfig",
    "Verdict",
    "apply_policy",
    "atomic_type",
    "backbone_pair",
    "build_graph",
    "cfi_pair",
    "color_refinement",
    "count_subgraphs",
    "distinguish",
    "enumerate_encodings",
    "enumerate_subgraphs",
    "exact_distribution_oracle",
    "furer_golden",
    "furer_pair",
    "gen_backbone",
    "gen_cfi",
    "gen_furer",
    "histogram",
    "imle_finite_difference",
    "imle_gradient",
    "k_wl",
    "map_solve",
    "oswl_graph_color",
    "oswl_pair_verdict",
    "oswl_vertex_colors",
    "parse_algorithm",
    "read_graph",
    "sample_subgraph",
    "to_masked_adjacency",
    "triangle_count",
    "vertex_grad_from_edges",
    "vs_oswl_graph_color",
    "write_graph",
]

__version__ = "0.1.0"
