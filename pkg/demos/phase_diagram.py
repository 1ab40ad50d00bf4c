"""Local and global phase diagrams for a qubit.

Sweeps W and V for dim H = 2 with pure-state knowledge, alone and combined
with known projective degeneracies, and writes CSV, JSON and SVG files to
``demos/out``.  Cells with fewer columns than D are gray: they are
completable only by convention.
"""
from pathlib import Path

import numpy as np

from gramrig import emit, is_monotone, run_sweep

OUT = Path(__file__).resolve().parent / "out"


def staircase(diagram):
    """Smallest completable W for each V, or None."""
    Ws, Vs, table = diagram.verdict_array()
    rows = {}
    for j, V in enumerate(Vs):
        hits = np.flatnonzero(table[:, j] == "completable")
        rows[int(V)] = int(Ws[hits[0]]) if len(hits) else None
    return rows


def main():
    OUT.mkdir(exist_ok=True)
    runs = [("pure", "local"), ("pure", "global"), ("pure+proj-known", "local")]
    for scenario, kind in runs:
        diagram = run_sweep(2, scenario, kind, W_range=range(1, 13), V_range=range(1, 13),
                            seed=1, record_runtime=False)
        stem = OUT / f"d2_{scenario.replace('+', '_')}_{kind}"
        for fmt in ("csv", "json", "svg"):
            emit(diagram, fmt, stem.with_suffix(f".{fmt}"))
        print(f"{scenario} ({kind}): monotone={is_monotone(diagram)}")
        print("  smallest completable W per V:", staircase(diagram))
    print(f"files written to {OUT}")


if __name__ == "__main__":
    main()
