"""Scan ladder instances for the smallest separating size and pin it.

Writes src/oswl/data/furer_min_n.json: for h=2 the smallest n where kwl:2
distinguishes X/Y while cr, oswl:1 and vs-oswl:1 all report equivalent,
together with the full scan table. kwl:2 alone distinguishes even the
smallest ladders (n=2,3), but there the grid is too short for the twist to
hide from a single mark and oswl:1 distinguishes too, so the pinned n is the
first row with the full verdict pattern.
"""

import argparse
import json
import pathlib

from oswl import distinguish
from oswl.gadgets import furer_pair

ENGINES = ("cr", "oswl:1", "vs-oswl:1", "kwl:2")
DEFAULT_OUT = (
    pathlib.Path(__file__).resolve().parent.parent
    / "src" / "oswl" / "data" / "furer_min_n.json"
)


def scan(h: int, n_max: int) -> dict:
    rows = {}
    minimum = None
    for n in range(2, n_max + 1):
        pair = furer_pair(h, n)
        row = {"vertices": pair.x_graph.n}
        for engine in ENGINES:
            row[engine] = distinguish(pair.x_graph, pair.y_graph, engine).verdict
        rows[str(n)] = row
        separated = row["kwl:2"] == "distinguished" and all(
            row[e] == "equivalent" for e in ENGINES[:-1]
        )
        if separated and minimum is None:
            minimum = n
    if minimum is None:
        raise SystemExit(f"no separating n found for h={h} up to {n_max}")
    return {
        "h": h,
        "n": minimum,
        "rule": (
            "smallest n with kwl:2 distinguished and cr, oswl:1, "
            "vs-oswl:1 all equivalent"
        ),
        "scan": rows,
    }


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--h", type=int, default=2)
    parser.add_argument("--n-max", type=int, default=8)
    parser.add_argument("--out", type=pathlib.Path, default=DEFAULT_OUT)
    args = parser.parse_args()

    result = scan(args.h, args.n_max)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text(json.dumps(result, indent=2, sort_keys=True) + "\n")
    print(f"pinned h={result['h']} n={result['n']} -> {args.out}")


if __name__ == "__main__":
    main()
