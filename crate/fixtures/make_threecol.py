#!/usr/bin/env python3
"""Regenerates the graph three-coloring fixtures.

The graph on n nodes is a ring plus deterministic chords, filtered so that
the coloring v -> v mod 3 stays proper; this guarantees coherence. Node 0
is clamped to the first color. Every atom is a query candidate (there is
no #query directive).
"""

import sys

COLORS = ("r", "g", "b")


def edges(n):
    out = set()
    for v in range(n):
        for w in (
            (v + 1) % n,  # ring
            (v * 7 + 3) % n,  # chord
        ):
            if v == w or v % 3 == w % 3:
                continue  # keep the canonical coloring proper
            out.add((min(v, w), max(v, w)))
    return sorted(out)


def emit(n, path):
    lines = [f"% Three-coloring of a ring-plus-chords graph on {n} nodes."]
    lines.append("% Node 0 is clamped to its first color.")
    for v in range(n):
        lines.append(" | ".join(f"{c}_{v}" for c in COLORS) + ".")
    for v, w in edges(n):
        for c in COLORS:
            lines.append(f":- {c}_{v}, {c}_{w}.")
    lines.append(":- not r_0.")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


if __name__ == "__main__":
    for n in (int(a) for a in (sys.argv[1:] or ["10", "40"])):
        emit(n, f"threecol_{n}.lp")
