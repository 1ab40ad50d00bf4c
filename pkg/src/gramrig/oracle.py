"""Independent checks for the randomized rank tests.

These routines deliberately avoid the code paths they verify: the
finite-difference Jacobian never calls :func:`gramrig.local.jacobian`, the
criterion here is built from explicit reference factors instead of raw
data rows, and the perturbation search works on configurations directly.
The perturbation search can only refute completability, and only at small
sizes (``D <= 4``, ``N <= 30``).
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
import scipy.linalg

from .global_ import CriterionMatrix, Factorization, _side
from .model import Configuration, GramKnowledge, OmegaMask


@dataclass
class PerturbationResult:
    found_nontrivial_deformation: bool
    deformation_norm: float
    constraint_violation: float
    orbit_distance: float
    restarts_used: int = 0
    converged: int = 0

    def to_dict(self) -> dict:
        return asdict(self)


def _gram_entries(P: np.ndarray, pairs: np.ndarray) -> np.ndarray:
    return np.array([P[:, i] @ P[:, j] for i, j in pairs], dtype=float)


def fd_jacobian(P, mask: OmegaMask, step: float = 1e-5) -> np.ndarray:
    """Central finite differences of the known Gram entries, ``vec(P)`` order."""
    if step <= 0:
        raise ValueError("step must be positive")
    P = np.asarray(P.entries if isinstance(P, Configuration) else P, dtype=float)
    return _fd_jacobian(P, mask.global_pairs(), step)


def _fd_jacobian(P: np.ndarray, pairs: np.ndarray, step: float = 1e-5) -> np.ndarray:
    D, N = P.shape
    J = np.zeros((len(pairs), D * N))
    if len(pairs) == 0:
        return J
    for col in range(N):
        for a in range(D):
            Pp, Pm = P.copy(), P.copy()
            Pp[a, col] += step
            Pm[a, col] -= step
            J[:, col * D + a] = (_gram_entries(Pp, pairs) - _gram_entries(Pm, pairs)) / (2 * step)
    return J


def _B_matrices(fact: Factorization, mask: OmegaMask) -> tuple[np.ndarray, str]:
    side = _side(mask)
    if side == "st":
        P0, pairs = fact.P0_st, mask.st_pairs
    else:
        P0, pairs = fact.P0_m, mask.m_pairs
    D = fact.D
    B = np.zeros((len(pairs), D, D))
    for j, (a, b) in enumerate(pairs):
        x, y = P0[:, a], P0[:, b]
        B[j] = 0.5 * (np.outer(x, y) + np.outer(y, x))
    return B, side


def reference_criterion(fact: Factorization, mask: OmegaMask) -> CriterionMatrix:
    """Criterion from ``R B_j R^T`` with ``R`` the opposite side's corner factor."""
    B, side = _B_matrices(fact, mask)
    if side == "st":
        R = fact.P0_m[:, fact.corner_cols]
    else:
        R = fact.P0_st[:, fact.corner_rows]
    D = fact.D
    cols = [(R @ Bj @ R.T).flatten(order="F") for Bj in B]
    entries = np.column_stack(cols) if cols else np.zeros((D * D, 0))
    return CriterionMatrix(entries, side, len(cols))


def _sym_basis(D: int) -> np.ndarray:
    basis = []
    for a in range(D):
        for b in range(a, D):
            S = np.zeros((D, D))
            if a == b:
                S[a, a] = 1.0
            else:
                S[a, b] = S[b, a] = 1 / np.sqrt(2)
            basis.append(S)
    return np.array(basis)


def linear_uniqueness_oracle(fact: Factorization, mask: OmegaMask, seed=None,
                             rcond: float | None = None) -> bool:
    """Whether ``tr(B_j M) = c_j`` has a unique symmetric solution ``M``.

    Builds the constraint operator on a randomly rotated orthonormal basis
    of the symmetric matrices and checks that its null space is trivial.
    """
    B, _ = _B_matrices(fact, mask)
    D = fact.D
    n = D * (D + 1) // 2
    if len(B) == 0:
        return n == 0
    rng = np.random.default_rng(seed)
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    basis = np.einsum("kl,lab->kab", Q.T, _sym_basis(D))
    C = np.einsum("jab,kba->jk", B, basis)
    if rcond is None:
        rcond = 1e-9 * max(C.shape)
    null = scipy.linalg.null_space(C, rcond=rcond)
    return null.shape[1] == 0


def orbit_distance(P: np.ndarray, Q: np.ndarray) -> float:
    """``min_O ||O P - Q||_F`` over orthogonal ``O`` (Procrustes)."""
    R, _ = scipy.linalg.orthogonal_procrustes(P.T, Q.T)
    return float(np.linalg.norm(P.T @ R - Q.T))


def _solve_constraints(Q: np.ndarray, pairs: np.ndarray, target: np.ndarray,
                       tol: float, max_iter: int) -> tuple[np.ndarray, float]:
    # Gauss-Newton with minimum-norm steps and backtracking on ||r||^2
    D, N = Q.shape
    r = _gram_entries(Q, pairs) - target
    f = float(r @ r)
    for _ in range(max_iter):
        if np.sqrt(f) <= tol:
            break
        J = _fd_jacobian(Q, pairs)
        step, *_ = scipy.linalg.lstsq(J, -r, cond=1e-9, lapack_driver="gelsd")
        step = step.reshape(N, D).T
        t = 1.0
        while t > 1e-8:
            Qn = Q + t * step
            rn = _gram_entries(Qn, pairs) - target
            fn = float(rn @ rn)
            if fn < f:
                break
            t /= 2
        else:
            break
        Q, r, f = Qn, rn, fn
    return Q, float(np.sqrt(f))


def perturbation_search(
    P,
    knowledge: GramKnowledge,
    restarts: int = 10,
    seed=None,
    start_scale: float = 0.05,
    radius: float = 0.5,
    max_iter: int = 200,
    violation_tol: float = 1e-8,
    orbit_tol: float = 1e-4,
) -> PerturbationResult:
    """Look for constraint-preserving deformations of ``P`` off its orbit.

    Each restart perturbs ``P`` by ``start_scale`` (relative, per entry),
    drives the constraint residual to zero and measures the distance of the
    solution from ``O(D) P``.  Solutions farther than ``radius * ||P||``
    from ``P`` are discarded, as are solutions farther from their start
    than the start is from ``P``: those sit on a separate branch of the
    constraint set, which says nothing about local completability.
    """
    P = np.asarray(P.entries if isinstance(P, Configuration) else P, dtype=float)
    pairs = knowledge.mask.global_pairs()
    target = knowledge.values
    rng = np.random.default_rng(seed)
    normP = float(np.linalg.norm(P))
    scale = start_scale * normP / np.sqrt(P.size)
    best = PerturbationResult(False, 0.0, float("inf"), 0.0)
    converged = 0
    for k in range(1, restarts + 1):
        Q0 = P + scale * rng.standard_normal(P.shape)
        Q, viol = _solve_constraints(Q0, pairs, target, tol=1e-12 * max(1.0, normP**2), max_iter=max_iter)
        if viol > violation_tol or np.linalg.norm(Q - P) > radius * normP:
            continue
        # a projection that travels farther than the start displacement has
        # jumped to another branch of solutions rather than deforming P
        if np.linalg.norm(Q - Q0) > np.linalg.norm(Q0 - P):
            continue
        converged += 1
        dist = orbit_distance(P, Q)
        if dist > best.orbit_distance or not np.isfinite(best.constraint_violation):
            best = PerturbationResult(dist > orbit_tol, float(np.linalg.norm(Q - P)), viol, dist)
        if best.found_nontrivial_deformation:
            best.restarts_used, best.converged = k, converged
            return best
    best.restarts_used, best.converged = restarts, converged
    return best
