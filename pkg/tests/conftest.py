import random

from hypothesis import strategies as st

from oswl.graphs import LabeledGraph, build_graph


def cycle(n: int, label: int = 0) -> LabeledGraph:
    return build_graph(n, [(i, (i + 1) % n) for i in range(n)], [label] * n)


def path(n: int) -> LabeledGraph:
    return build_graph(n, [(i, i + 1) for i in range(n - 1)])


def complete(n: int) -> LabeledGraph:
    return build_graph(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def disjoint_union(a: LabeledGraph, b: LabeledGraph) -> LabeledGraph:
    edges = list(a.edges) + [(u + a.n, v + a.n) for u, v in b.edges]
    return build_graph(a.n + b.n, edges, list(a.labels) + list(b.labels))


def random_graph(seed: int, n: int, p: float = 0.4, num_labels: int = 2) -> LabeledGraph:
    rng = random.Random(seed)
    edges = [
        (i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < p
    ]
    labels = [rng.randrange(num_labels) for _ in range(n)]
    return build_graph(n, edges, labels)


@st.composite
def graphs(draw, max_n: int = 10, max_labels: int = 3):
    n = draw(st.integers(min_value=1, max_value=max_n))
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    mask = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    labels = draw(
        st.lists(
            st.integers(min_value=0, max_value=max_labels - 1),
            min_size=n,
            max_size=n,
        )
    )
    edges = [e for e, keep in zip(pairs, mask) if keep]
    return build_graph(n, edges, labels)


@st.composite
def graph_and_permutation(draw, max_n: int = 10, max_labels: int = 3):
    g = draw(graphs(max_n=max_n, max_labels=max_labels))
    perm = draw(st.permutations(list(range(g.n))))
    return g, list(perm)
