"""Global completability and reconstruction of the unique Gram matrix.

Every configuration reproducing the data block ``Dmat = P_st.T @ P_m`` has
the form ``P_st = A^{-T} P0_st``, ``P_m = A P0_m`` for one reference
factorization ``(P0_st, P0_m)`` and some invertible ``A``.  Knowledge of
entries of one Gram block pins the symmetric matrix ``A.T @ A`` (or its
inverse) iff the criterion matrix below has full rank ``D(D+1)/2``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .exceptions import (
    InconsistentKnowledgeError,
    MixedSideError,
    NoRealConfigurationError,
    NotUniqueError,
    ShapeError,
    SpanningError,
)
from .model import DataMatrix, GramKnowledge, OmegaMask, ProblemShape, random_configuration
from .rank import DEFAULT_REL_TOL, RankReport, compute_rank, svd_rank

PD_REL_TOL = 1e-10


@dataclass(frozen=True)
class Factorization:
    """Rank-``D`` factorization ``data = P0_st.T @ P0_m``.

    Factors keep the original column order of the data.  ``row_perm`` and
    ``col_perm`` are permutations of the rows/columns of ``data`` whose
    first ``D`` entries select an invertible ``D x D`` corner.
    """

    data: np.ndarray
    P0_st: np.ndarray
    P0_m: np.ndarray
    row_perm: np.ndarray
    col_perm: np.ndarray
    corner_conditioning: float

    @property
    def D(self) -> int:
        return self.P0_st.shape[0]

    @property
    def corner_rows(self) -> np.ndarray:
        return self.row_perm[: self.D]

    @property
    def corner_cols(self) -> np.ndarray:
        return self.col_perm[: self.D]

    def permuted_data(self) -> np.ndarray:
        return self.data[np.ix_(self.row_perm, self.col_perm)]

    def permuted_factors(self) -> tuple[np.ndarray, np.ndarray]:
        return self.P0_st[:, self.row_perm], self.P0_m[:, self.col_perm]


@dataclass
class CriterionMatrix:
    entries: np.ndarray
    block: str
    J: int


@dataclass
class GlobalVerdict:
    completable: bool
    rank_report: RankReport
    target: int
    block: str

    def to_dict(self) -> dict:
        return {
            "test": "global",
            "completable": self.completable,
            "rank": self.rank_report.computed_rank,
            "target": self.target,
            "block": self.block,
            "rank_report": self.rank_report.to_dict(),
        }


def global_target(D: int) -> int:
    return D * (D + 1) // 2


def _pivot_corner(Dmat: np.ndarray, D: int) -> tuple[np.ndarray, np.ndarray]:
    # column-pivoted QR picks well-conditioned columns, then rows among those
    _, _, cols = scipy.linalg.qr(Dmat, mode="economic", pivoting=True)
    _, _, rows = scipy.linalg.qr(Dmat[:, cols[:D]].T, mode="economic", pivoting=True)
    return rows, cols


def factor_data(Dmat: DataMatrix | np.ndarray, D: int, rel_tol: float = DEFAULT_REL_TOL) -> Factorization:
    """Truncated-SVD factorization of a rank-``D`` data matrix.

    ``P0_st`` is the transpose of the leading left singular vectors and
    ``P0_m`` the leading singular values times the right singular vectors.
    """
    data = np.asarray(Dmat.entries if isinstance(Dmat, DataMatrix) else Dmat, dtype=float)
    W, VK = data.shape
    if min(W, VK) < D:
        raise SpanningError(
            f"data matrix rank-deficient: spanning assumption violated ({W}x{VK} data, D={D})"
        )
    U, s, Vt = scipy.linalg.svd(data, full_matrices=False)
    r = int(np.count_nonzero(s > rel_tol * s[0] * max(W, VK))) if s[0] > 0 else 0
    if r < D:
        raise SpanningError(
            f"data matrix rank-deficient: spanning assumption violated (rank {r} < D={D})"
        )
    if r > D:
        raise ShapeError(f"data matrix has rank {r} > D={D}; no D-dimensional configuration exists")
    P0_st = U[:, :D].T.copy()
    P0_m = s[:D, None] * Vt[:D]
    rows, cols = _pivot_corner(data, D)
    corner = data[np.ix_(rows[:D], cols[:D])]
    cond = float(scipy.linalg.svdvals(corner)[-1])
    if cond <= rel_tol * s[0] * D:
        raise SpanningError("data matrix rank-deficient: spanning assumption violated (no invertible corner)")
    return Factorization(data, P0_st, P0_m, rows, cols, cond)


def _side(mask: OmegaMask) -> str:
    if mask.st_pairs and mask.m_pairs:
        raise MixedSideError(
            "mixed-side knowledge unsupported: entries of both the state and the "
            "measurement Gram blocks are known (an open problem)"
        )
    if not mask.include_data_block:
        raise ShapeError("the global test requires the whole data block to be known")
    return "m" if mask.m_pairs else "st"


def sym_outer_columns(X: np.ndarray, Y: np.ndarray, doubled: bool = False) -> np.ndarray:
    """Columns ``vec(x_j y_j^T + y_j x_j^T) / 2`` for paired rows of X, Y.

    ``doubled`` drops the factor 1/2 so integer input stays integer.
    """
    J, D = X.shape
    S = X[:, :, None] * Y[:, None, :]
    S = S + S.transpose(0, 2, 1)
    if not doubled:
        S = S / 2
    # column stacking: vec index a + b*D holds entry (a, b)
    return S.transpose(0, 2, 1).reshape(J, D * D).T


def criterion_from_data(data: np.ndarray, corner_rows, corner_cols, mask: OmegaMask,
                        doubled: bool = False) -> CriterionMatrix:
    """Criterion matrix assembled straight from rows or columns of the data."""
    side = _side(mask)
    if side == "st":
        pairs = np.array(mask.st_pairs, dtype=np.intp).reshape(-1, 2)
        sub = data[:, corner_cols]
        X, Y = sub[pairs[:, 0]], sub[pairs[:, 1]]
    else:
        pairs = np.array(mask.m_pairs, dtype=np.intp).reshape(-1, 2)
        sub = data[corner_rows, :].T
        X, Y = sub[pairs[:, 0]], sub[pairs[:, 1]]
    D = len(corner_rows)
    if len(pairs) == 0:
        return CriterionMatrix(np.zeros((D * D, 0), dtype=data.dtype), side, 0)
    return CriterionMatrix(sym_outer_columns(X, Y, doubled), side, len(pairs))


def build_criterion(fact: Factorization, mask: OmegaMask) -> CriterionMatrix:
    """Criterion matrix whose full rank ``D(D+1)/2`` certifies uniqueness.

    For state-side knowledge column ``j`` is ``vec`` of the symmetrized
    outer product of data rows ``a`` and ``b`` restricted to the corner
    columns; for measurement-side knowledge the same with data columns
    restricted to the corner rows.
    """
    if mask.shape.W != fact.data.shape[0] or mask.shape.VK != fact.data.shape[1]:
        raise ShapeError("mask shape does not match the factorized data")
    return criterion_from_data(fact.data, fact.corner_rows, fact.corner_cols, mask)


def global_test(
    shape: ProblemShape,
    mask: OmegaMask,
    trials: int = 3,
    backend: str = "svd",
    seed=None,
    rel_tol: float = DEFAULT_REL_TOL,
) -> GlobalVerdict:
    """Randomized test for generic global completability.

    Each trial draws a configuration, forms its data block, factors it and
    computes the criterion rank; the maximum over trials is compared with
    ``D(D+1)/2``.  Exact backends use integer samples and the doubled
    (integer) criterion matrix.
    """
    if mask.shape != shape:
        raise ShapeError("mask shape does not match the requested shape")
    if shape.N < shape.D:
        raise SpanningError(f"shape violates spanning assumption: N={shape.N} < D={shape.D}")
    side = _side(mask)
    rng = np.random.default_rng(seed)
    target = global_target(shape.D)
    best, degenerate = None, None
    for _ in range(max(1, trials)):
        Q = random_configuration(shape, rng, integer=backend != "svd")
        data = Q.P_st.T @ Q.P_m
        try:
            fact = factor_data(data, shape.D, rel_tol=rel_tol)
        except SpanningError as exc:
            # integer draws can be degenerate by chance; a structural
            # deficiency fails every trial and is re-raised below
            degenerate = exc
            continue
        if backend == "svd":
            M = build_criterion(fact, mask).entries
        else:
            M = criterion_from_data(data, fact.corner_rows, fact.corner_cols, mask, doubled=True).entries
        report = compute_rank(M, backend, rel_tol=rel_tol, target=target, seed=rng)
        if best is None or report.computed_rank > best.computed_rank:
            best = report
        if best.computed_rank >= target:
            break
    if best is None:
        raise degenerate
    return GlobalVerdict(best.computed_rank == target, best, target, side)


def _sym_coordinates(B: np.ndarray) -> np.ndarray:
    """Coefficients of ``M -> tr(B M)`` on the upper-triangular entries of M."""
    D = B.shape[-1]
    iu = np.triu_indices(D)
    coef = B[..., iu[0], iu[1]] + B[..., iu[1], iu[0]]
    diag = iu[0] == iu[1]
    coef[..., diag] /= 2
    return coef


def _from_sym_coordinates(m: np.ndarray, D: int) -> np.ndarray:
    M = np.zeros((D, D))
    M[np.triu_indices(D)] = m
    return M + np.triu(M, 1).T


def recover_symmetric_unknown(fact: Factorization, knowledge: GramKnowledge,
                              rel_tol: float = DEFAULT_REL_TOL) -> tuple[np.ndarray, str]:
    """Solve ``tr(B_j M) = G_j`` for the symmetric matrix ``M``.

    ``B_j`` is the symmetrized outer product of the reference-factor
    columns of pair ``j``.  Returns ``(M, side)`` where ``M`` equals
    ``inv(A.T @ A)`` for state-side knowledge and ``A.T @ A`` for
    measurement-side knowledge.
    """
    mask = knowledge.mask
    side = _side(mask)
    st_vals, m_vals, data_vals = knowledge.split()
    data = fact.data
    if data_vals.size != data.size:
        raise ShapeError("knowledge data block does not match the factorized data")
    if not np.allclose(data_vals, data.ravel(), rtol=1e-8, atol=1e-12 * max(1.0, np.abs(data).max())):
        raise InconsistentKnowledgeError("inconsistent knowledge: data-block values differ from the data matrix")
    if side == "st":
        P0, pairs, g = fact.P0_st, np.array(mask.st_pairs).reshape(-1, 2), st_vals
    else:
        P0, pairs, g = fact.P0_m, np.array(mask.m_pairs).reshape(-1, 2), m_vals
    D = fact.D
    X, Y = P0[:, pairs[:, 0]].T, P0[:, pairs[:, 1]].T
    B = (X[:, :, None] * Y[:, None, :] + Y[:, :, None] * X[:, None, :]) / 2
    C = _sym_coordinates(B)
    n = global_target(D)
    if svd_rank(C, rel_tol=rel_tol).computed_rank < n:
        raise NotUniqueError("not uniquely determined: the known entries do not pin the symmetric unknown")
    m, *_ = scipy.linalg.lstsq(C, g, lapack_driver="gelsd")
    resid = float(np.linalg.norm(C @ m - g))
    if resid > 1e-8 * max(float(np.linalg.norm(g)), 1e-300):
        raise InconsistentKnowledgeError(f"inconsistent knowledge: residual {resid:.3e}")
    M = _from_sym_coordinates(m, D)
    w = np.linalg.eigvalsh(M)
    if w[0] <= PD_REL_TOL * max(w[-1], 0.0) or w[-1] <= 0:
        raise NoRealConfigurationError(
            f"no real configuration explains the data (eigenvalues in [{w[0]:.3e}, {w[-1]:.3e}])"
        )
    return M, side


def reconstruct_gram(fact: Factorization, M: np.ndarray, side: str) -> np.ndarray:
    """Assemble ``G = [[G_st, data], [data.T, G_m]]`` from the recovered ``M``."""
    M = np.asarray(M, dtype=float)
    if side == "st":
        M_st = M
        M_m = np.linalg.inv(M)
    elif side == "m":
        M_m = M
        M_st = np.linalg.inv(M)
    else:
        raise ValueError(f"side must be 'st' or 'm', got {side!r}")
    G_st = fact.P0_st.T @ M_st @ fact.P0_st
    G_m = fact.P0_m.T @ M_m @ fact.P0_m
    G = np.block([[G_st, fact.data], [fact.data.T, G_m]])
    return (G + G.T) / 2


def complete_gram(data: DataMatrix | np.ndarray, knowledge: GramKnowledge,
                  rel_tol: float = DEFAULT_REL_TOL) -> np.ndarray:
    """Factor the data, recover the symmetric unknown and return the full Gram."""
    fact = factor_data(data, knowledge.mask.shape.D, rel_tol=rel_tol)
    M, side = recover_symmetric_unknown(fact, knowledge, rel_tol=rel_tol)
    return reconstruct_gram(fact, M, side)
