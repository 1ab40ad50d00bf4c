"""Matrix rank with two independent backends.

``svd_rank`` counts singular values above a relative tolerance.
``finite_field_rank`` performs exact Gaussian elimination over GF(p) for a
random prime ``p`` and is used on integer-sampled instances, where the
rank over the rationals equals the rank mod ``p`` unless ``p`` divides a
critical minor.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
import scipy.linalg
import sympy

from .exceptions import RankComputationError

DEFAULT_REL_TOL = 1e-9

# Entries stay below 2**31 so products fit into int64 without overflow.
_PRIME_LO = 2**30
_PRIME_HI = 2**31 - 1


@dataclass
class RankReport:
    computed_rank: int
    target_rank: int
    backend: str
    spectrum: list[float] | None = None
    gap_ratio: float | None = None
    prime: int | None = None
    disagreement: bool | None = None
    other_rank: int | None = None

    @property
    def reached(self) -> bool:
        return self.computed_rank == self.target_rank

    def to_dict(self) -> dict:
        out = asdict(self)
        if out["gap_ratio"] is not None and math.isinf(out["gap_ratio"]):
            out["gap_ratio"] = "inf"
        return out


def svd_rank(A, rel_tol: float = DEFAULT_REL_TOL, target: int | None = None) -> RankReport:
    """Numerical rank: singular values above ``rel_tol * s_max * max(m, n)``."""
    if rel_tol <= 0:
        raise ValueError("rel_tol must be positive")
    A = np.asarray(A, dtype=float)
    m, n = A.shape
    if target is None:
        target = min(m, n)
    if A.size == 0:
        return RankReport(0, target, "svd", spectrum=[])
    try:
        s = scipy.linalg.svdvals(A, check_finite=True)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise RankComputationError(f"SVD failed on {m}x{n} matrix: {exc}") from exc
    smax = s[0] if s.size else 0.0
    r = int(np.count_nonzero(s > rel_tol * smax * max(m, n))) if smax > 0 else 0
    gap = None
    if r > 0:
        gap = math.inf if r == s.size or s[r] == 0 else float(s[r - 1] / s[r])
    return RankReport(r, target, "svd", spectrum=s.tolist(), gap_ratio=gap)


def random_prime(rng: np.random.Generator | None = None) -> int:
    rng = np.random.default_rng(rng)
    start = int(rng.integers(_PRIME_LO, _PRIME_HI - 2**20))
    return int(sympy.nextprime(start))


def _as_integer_array(A) -> np.ndarray:
    A = np.asarray(A)
    if A.dtype == object:
        if not all(isinstance(x, (int, np.integer)) for x in A.flat):
            raise RankComputationError("finite-field rank needs an integer matrix")
        return A
    if np.issubdtype(A.dtype, np.integer) or A.dtype == bool:
        return A.astype(np.int64)
    if np.issubdtype(A.dtype, np.floating):
        if not np.all(np.isfinite(A)) or np.any(A != np.round(A)) or np.any(np.abs(A) >= 2**53):
            raise RankComputationError("finite-field rank needs an integer matrix")
        return A.astype(np.int64)
    raise RankComputationError(f"finite-field rank needs an integer matrix, got dtype {A.dtype}")


def _rank_mod_p(A: np.ndarray, p: int) -> int:
    m, n = A.shape
    if m < n:
        A, (m, n) = A.T, (n, m)
    if A.dtype == object:
        A = np.array([[int(x) % p for x in row] for row in A], dtype=np.int64).reshape(m, n)
    else:
        A = np.mod(A, p).astype(np.int64)
    r = 0
    for c in range(n):
        nz = np.flatnonzero(A[r:, c])
        if nz.size == 0:
            continue
        piv = r + nz[0]
        if piv != r:
            A[[r, piv]] = A[[piv, r]]
        inv = pow(int(A[r, c]), -1, p)
        A[r, c:] = (A[r, c:] * inv) % p
        rows = r + 1 + np.flatnonzero(A[r + 1:, c])
        if rows.size:
            f = A[rows, c][:, None]
            A[np.ix_(rows, np.arange(c, n))] = (A[rows, c:] - f * A[r, c:]) % p
        r += 1
        if r == m:
            break
    return r


def finite_field_rank(A, prime: int | None = None, target: int | None = None, seed=None) -> RankReport:
    """Exact rank of an integer matrix over GF(prime).

    Without ``prime`` a random prime in ``[2**30, 2**31)`` is drawn; for an
    ``n x n`` minor the chance of a spurious rank drop is about ``n / p``.
    """
    A = _as_integer_array(A)
    if A.ndim != 2:
        raise RankComputationError("finite-field rank needs a 2-D matrix")
    m, n = A.shape
    if target is None:
        target = min(m, n)
    if prime is None:
        prime = random_prime(seed)
    elif prime < 2 or prime > _PRIME_HI or not sympy.isprime(prime):
        raise ValueError(f"prime must be a prime below 2**31, got {prime}")
    r = _rank_mod_p(A, prime) if A.size else 0
    return RankReport(r, target, "gf", prime=prime)


def rank_with_consensus(A_int, rel_tol: float = DEFAULT_REL_TOL, target: int | None = None,
                        prime: int | None = None, seed=None) -> RankReport:
    """Exact rank, with the SVD rank recorded and disagreement flagged."""
    gf = finite_field_rank(A_int, prime=prime, target=target, seed=seed)
    sv = svd_rank(np.asarray(A_int, dtype=float), rel_tol=rel_tol, target=target)
    gf.backend = "consensus"
    gf.spectrum = sv.spectrum
    gf.gap_ratio = sv.gap_ratio
    gf.other_rank = sv.computed_rank
    gf.disagreement = sv.computed_rank != gf.computed_rank
    return gf


def compute_rank(A, backend: str = "svd", rel_tol: float = DEFAULT_REL_TOL,
                 target: int | None = None, seed=None) -> RankReport:
    if backend == "svd":
        return svd_rank(A, rel_tol=rel_tol, target=target)
    if backend == "gf":
        return finite_field_rank(A, target=target, seed=seed)
    if backend == "consensus":
        return rank_with_consensus(A, rel_tol=rel_tol, target=target, seed=seed)
    raise ValueError(f"unknown rank backend {backend!r}; valid: svd, gf, consensus")
