"""Graph file formats.

Edge-list text (diffable golden-file format):

    <n>
    <u> <v>
    ...
    # labels: l0 l1 ... l{n-1}      (optional trailer, omitted when all 0)

JSON dataset format (carries features):

    {"n": int, "edges": [[u, v], ...], "labels": [...],
     "vertex_features": [[...], ...] | null,
     "edge_features": [[...], ...] | null}

Both round-trip exactly through read_graph/write_graph.
"""
from __future__ import annotations

import json
from pathlib import Path

from .errors import GraphError, ParseError
from .graphs import LabeledGraph, build_graph


def graph_to_text(graph: LabeledGraph) -> str:
    lines = [str(graph.n)]
    lines += [f"{u} {v}" for u, v in graph.edges]
    if any(lab != 0 for lab in graph.labels):
        lines.append("# labels: " + " ".join(str(x) for x in graph.labels))
    return "\n".join(lines) + "\n"


def graph_from_text(text: str) -> LabeledGraph:
    lines = text.splitlines()
    if not lines:
        raise ParseError("empty graph file", line=1)
    try:
        n = int(lines[0].strip())
    except ValueError:
        raise ParseError(f"expected vertex count, got {lines[0]!r}", line=1) from None
    edges: list[tuple[int, int]] = []
    labels = None
    for lineno, raw in enumerate(lines[1:], start=2):
        stripped = raw.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            body = stripped[1:].strip()
            if body.startswith("labels:"):
                parts = body[len("labels:"):].split()
                try:
                    labels = [int(x) for x in parts]
                except ValueError:
                    raise ParseError("bad label entry", line=lineno) from None
                if len(labels) != n:
                    raise ParseError(
                        f"expected {n} labels, got {len(labels)}", line=lineno
                    )
            continue
        parts = stripped.split()
        if len(parts) != 2:
            raise ParseError(f"expected 'u v', got {stripped!r}", line=lineno)
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise ParseError(f"expected 'u v', got {stripped!r}", line=lineno) from None
        edges.append((u, v))
    try:
        return build_graph(n, edges, labels)
    except GraphError as exc:
        raise ParseError(str(exc)) from exc


def graph_to_json(graph: LabeledGraph) -> dict:
    return {
        "n": graph.n,
        "edges": [[u, v] for u, v in graph.edges],
        "labels": list(graph.labels),
        "vertex_features": (
            [list(r) for r in graph.vertex_features]
            if graph.vertex_features is not None
            else None
        ),
        "edge_features": (
            [list(r) for r in graph.edge_features]
            if graph.edge_features is not None
            else None
        ),
    }


def graph_from_json(doc: dict) -> LabeledGraph:
    try:
        return build_graph(
            int(doc["n"]),
            doc.get("edges", []),
            doc.get("labels"),
            doc.get("vertex_features"),
            doc.get("edge_features"),
        )
    except (KeyError, TypeError) as exc:
        raise ParseError(f"malformed graph JSON: {exc}") from exc


def write_graph(graph: LabeledGraph, path: str | Path, fmt: str | None = None) -> None:
    path = Path(path)
    fmt = fmt or ("json" if path.suffix == ".json" else "text")
    if fmt == "text":
        path.write_text(graph_to_text(graph))
    elif fmt == "json":
        path.write_text(json.dumps(graph_to_json(graph), indent=2, sort_keys=True) + "\n")
    else:
        raise GraphError(f"unknown graph format {fmt!r}")


def read_graph(path: str | Path, fmt: str | None = None) -> LabeledGraph:
    path = Path(path)
    fmt = fmt or ("json" if path.suffix == ".json" else "text")
    text = path.read_text()
    if fmt == "text":
        return graph_from_text(text)
    if fmt == "json":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc.msg}", line=exc.lineno) from exc
        return graph_from_json(doc)
    raise GraphError(f"unknown graph format {fmt!r}")
