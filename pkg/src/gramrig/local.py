"""Local completability via the generic rank of the constraint Jacobian."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import ShapeError, SpanningError
from .model import Configuration, OmegaMask, ProblemShape, random_configuration
from .rank import DEFAULT_REL_TOL, RankReport, compute_rank


@dataclass
class LocalVerdict:
    completable: bool
    rank_report: RankReport
    target: int
    jacobian_dims: tuple[int, int]

    def to_dict(self) -> dict:
        return {
            "test": "local",
            "completable": self.completable,
            "rank": self.rank_report.computed_rank,
            "target": self.target,
            "jacobian_dims": list(self.jacobian_dims),
            "rank_report": self.rank_report.to_dict(),
        }


def local_target(shape: ProblemShape) -> int:
    """``D*N`` minus the dimension ``D(D-1)/2`` of the orthogonal orbit."""
    D = shape.D
    return D * shape.N - D * (D - 1) // 2


def jacobian(P: Configuration | np.ndarray, mask: OmegaMask) -> np.ndarray:
    """Jacobian of ``P -> (P.T @ P)[Omega]``, shape ``(|Omega|, D*N)``.

    Columns follow ``vec(P)`` (column stacking), i.e. coordinate ``(a, i)``
    of ``P`` sits in column ``i*D + a``.  The row of a pair ``(i, j)`` holds
    ``p_j`` in block ``i`` and ``p_i`` in block ``j``, which sum to
    ``2 p_i`` on the diagonal.
    """
    entries = P.entries if isinstance(P, Configuration) else np.asarray(P)
    D, N = mask.shape.D, mask.shape.N
    if entries.shape != (D, N):
        raise ShapeError(f"configuration shape {entries.shape} does not match mask ({D}, {N})")
    idx = mask.global_pairs()
    J = np.zeros((len(idx), N, D), dtype=np.result_type(entries.dtype, np.int64))
    rows = np.arange(len(idx))
    np.add.at(J, (rows, idx[:, 0]), entries[:, idx[:, 1]].T)
    np.add.at(J, (rows, idx[:, 1]), entries[:, idx[:, 0]].T)
    return J.reshape(len(idx), N * D)


def local_test(
    shape: ProblemShape,
    mask: OmegaMask,
    trials: int = 3,
    backend: str = "svd",
    seed=None,
    rel_tol: float = DEFAULT_REL_TOL,
) -> LocalVerdict:
    """Randomized test for generic local completability.

    Draws ``trials`` random configurations and keeps the largest Jacobian
    rank seen; a generic configuration attains the maximum, so any draw
    reaching ``D*N - D(D-1)/2`` certifies local completability.  The exact
    backends sample integer entries in [-10, 10], the SVD backend Gaussian
    entries.
    """
    if mask.shape != shape:
        raise ShapeError("mask shape does not match the requested shape")
    if shape.N < shape.D:
        raise SpanningError(
            f"shape violates spanning assumption: N={shape.N} < D={shape.D}"
        )
    rng = np.random.default_rng(seed)
    target = local_target(shape)
    best = None
    for _ in range(max(1, trials)):
        Q = random_configuration(shape, rng, integer=backend != "svd")
        report = compute_rank(jacobian(Q, mask), backend, rel_tol=rel_tol, target=target, seed=rng)
        if best is None or report.computed_rank > best.computed_rank:
            best = report
        if best.computed_rank >= target:
            break
    return LocalVerdict(best.computed_rank == target, best, target, (len(mask), shape.D * shape.N))
