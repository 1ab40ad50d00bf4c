"""Completability phase diagrams over the (W, V) plane."""
from __future__ import annotations

import csv
import io
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

from .exceptions import GramrigError
from .global_ import global_target, global_test
from .local import local_target, local_test
from .model import ProblemShape, scenario_mask

COMPLETABLE = "completable"
FLEXIBLE = "flexible"
FORCED = "forced-completable-by-convention"

CONVENTION_NOTE = (
    "cells with N = W + V*K < D cannot satisfy rank(P) = D and are assigned "
    "to the completable phase by convention"
)


@dataclass
class GridCell:
    W: int
    V: int
    verdict: str
    rank: int | None
    target: int
    runtime_ms: float
    note: str = ""


@dataclass
class PhaseDiagram:
    d: int
    D: int
    K: int
    scenario: str
    test_kind: str
    grid: list[GridCell] = field(default_factory=list)
    convention_note: str = CONVENTION_NOTE

    def cell(self, W: int, V: int) -> GridCell:
        for c in self.grid:
            if c.W == W and c.V == V:
                return c
        raise KeyError((W, V))

    def verdict_array(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """``(Ws, Vs, table)`` with table[i, j] the verdict at (Ws[i], Vs[j])."""
        Ws = np.array(sorted({c.W for c in self.grid}))
        Vs = np.array(sorted({c.V for c in self.grid}))
        table = np.empty((len(Ws), len(Vs)), dtype=object)
        wi = {w: i for i, w in enumerate(Ws)}
        vi = {v: i for i, v in enumerate(Vs)}
        for c in self.grid:
            table[wi[c.W], vi[c.V]] = c.verdict
        return Ws, Vs, table

    def to_dict(self) -> dict:
        out = asdict(self)
        out["grid"] = [asdict(c) for c in self.grid]
        return out


def cell_seed(seed: int, W: int, V: int) -> int:
    """Stable per-cell seed, independent of scheduling."""
    return int(np.random.SeedSequence([int(seed), int(W), int(V)]).generate_state(1, np.uint64)[0])


def _run_cell(args) -> GridCell:
    d, D, K, scenario, test_kind, W, V, backend, trials, seed, record_runtime = args
    shape = ProblemShape(D=D, W=W, V=V, K=K, d=d)
    target = local_target(shape) if test_kind == "local" else global_target(D)
    if shape.N < D:
        return GridCell(W, V, FORCED, None, target, 0.0)
    t0 = time.perf_counter()
    try:
        mask = scenario_mask(shape, scenario)
        test = local_test if test_kind == "local" else global_test
        verdict = test(shape, mask, trials=trials, backend=backend, seed=cell_seed(seed, W, V))
        rank, ok, note = verdict.rank_report.computed_rank, verdict.completable, ""
    except GramrigError as exc:
        rank, ok, note = None, False, str(exc)
    ms = (time.perf_counter() - t0) * 1e3 if record_runtime else 0.0
    return GridCell(W, V, COMPLETABLE if ok else FLEXIBLE, rank, target, round(ms, 3), note)


def run_sweep(
    d: int,
    scenario: str,
    test_kind: str = "local",
    W_range=None,
    V_range=None,
    K: int | None = None,
    backend: str = "svd",
    trials: int = 3,
    seed: int = 0,
    parallelism: int = 1,
    record_runtime: bool = True,
) -> PhaseDiagram:
    """Run the local or global test at every (W, V) grid point.

    Default ranges are ``1..3D`` on both axes.  Errors at a grid point are
    recorded in that cell (verdict ``flexible``, message in ``note``) and
    never abort the sweep.  With ``record_runtime=False`` every runtime is
    0 and the output is byte-for-byte reproducible.
    """
    if test_kind not in ("local", "global"):
        raise ValueError(f"test_kind must be 'local' or 'global', got {test_kind!r}")
    D = d * d
    K = d if K is None else K
    W_range = list(range(1, 3 * D + 1)) if W_range is None else list(W_range)
    V_range = list(range(1, 3 * D + 1)) if V_range is None else list(V_range)
    if not W_range or not V_range:
        raise ValueError("W_range and V_range must be non-empty")
    scenario_mask(ProblemShape(D=D, W=1, V=1, K=K, d=d), scenario)  # validates the name early
    jobs = [(d, D, K, scenario, test_kind, W, V, backend, trials, seed, record_runtime)
            for W in W_range for V in V_range]
    if parallelism > 1:
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            cells = list(pool.map(_run_cell, jobs, chunksize=max(1, len(jobs) // (4 * parallelism))))
    else:
        cells = [_run_cell(j) for j in jobs]
    return PhaseDiagram(d, D, K, scenario, test_kind, cells)


def is_monotone(diagram: PhaseDiagram) -> bool:
    """Tested cells: completable at (W, V) implies completable at larger W or V.

    Convention cells are skipped because they carry no test result.
    """
    Ws, Vs, table = diagram.verdict_array()
    for i in range(len(Ws)):
        for j in range(len(Vs)):
            if table[i, j] != COMPLETABLE:
                continue
            for a in range(i, len(Ws)):
                for b in range(j, len(Vs)):
                    if table[a, b] == FLEXIBLE:
                        return False
    return True


def to_csv(diagram: PhaseDiagram) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["W", "V", "verdict", "rank", "target", "runtime_ms"])
    for c in diagram.grid:
        w.writerow([c.W, c.V, c.verdict, "" if c.rank is None else c.rank, c.target, c.runtime_ms])
    return buf.getvalue()


def to_svg(diagram: PhaseDiagram, cell: int = 14) -> str:
    Ws, Vs, table = diagram.verdict_array()
    left, top, bottom = 50, 40, 40
    width = left + cell * len(Ws) + 20
    height = top + cell * len(Vs) + bottom
    title = (f"{diagram.test_kind} completability, dim H = {diagram.d}, "
             f"scenario {diagram.scenario}, K = {diagram.K}")
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" font-size="12">{escape(title)}</text>',
    ]
    y0 = top + cell * len(Vs)
    for i, W in enumerate(Ws):
        for j, V in enumerate(Vs):
            x = left + i * cell + cell / 2
            y = y0 - j * cell - cell / 2
            v = table[i, j]
            if v == COMPLETABLE:
                out.append(f'<rect x="{x - cell * 0.4:.1f}" y="{y - cell * 0.4:.1f}" '
                           f'width="{cell * 0.8:.1f}" height="{cell * 0.8:.1f}" fill="black"/>')
            elif v == FORCED:
                out.append(f'<rect x="{x - cell * 0.4:.1f}" y="{y - cell * 0.4:.1f}" '
                           f'width="{cell * 0.8:.1f}" height="{cell * 0.8:.1f}" fill="gray"/>')
            else:
                out.append(f'<circle cx="{x:.1f}" cy="{y:.1f}" r="{cell * 0.12:.1f}" fill="black"/>')
    out.append(f'<line x1="{left}" y1="{y0}" x2="{left + cell * len(Ws)}" y2="{y0}" stroke="black"/>')
    out.append(f'<line x1="{left}" y1="{y0}" x2="{left}" y2="{top}" stroke="black"/>')
    out.append(f'<text x="{left + cell * len(Ws) / 2:.1f}" y="{height - 8}" text-anchor="middle" '
               f'font-size="12">number of states W ({Ws[0]}..{Ws[-1]})</text>')
    out.append(f'<text x="14" y="{top + cell * len(Vs) / 2:.1f}" text-anchor="middle" font-size="12" '
               f'transform="rotate(-90 14 {top + cell * len(Vs) / 2:.1f})">'
               f'number of measurements V ({Vs[0]}..{Vs[-1]})</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit(diagram: PhaseDiagram, fmt: str, path) -> Path:
    """Write the diagram as ``csv``, ``json`` or ``svg``."""
    if fmt == "csv":
        text = to_csv(diagram)
    elif fmt == "json":
        text = json.dumps(diagram.to_dict(), indent=2) + "\n"
    elif fmt == "svg":
        text = to_svg(diagram)
    else:
        raise ValueError(f"unknown format {fmt!r}; valid: csv, json, svg")
    path = Path(path)
    path.write_text(text)
    return path
