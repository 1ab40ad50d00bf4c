"""Configurations, knowledge masks and quantum-structured generators.

A configuration is a real ``D x N`` matrix ``P`` whose first ``W`` columns
are (vectorized) states and whose remaining ``V*K`` columns are
(vectorized) measurement operators.  A mask lists which entries of the Gram
matrix ``G = P.T @ P`` are known.  All indices are 0-based in memory; the
file formats in :mod:`gramrig.io` use 1-based indices.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .exceptions import ShapeError

Pair = tuple[int, int]


@dataclass(frozen=True)
class ProblemShape:
    """Sizes of a state/measurement problem.

    ``d`` is the Hilbert space dimension when the instance is quantum
    derived (then ``D == d**2``); it is ``None`` for free vector problems.
    """

    D: int
    W: int
    V: int
    K: int = 1
    d: int | None = None

    def __post_init__(self):
        if self.D < 1:
            raise ShapeError(f"ambient dimension must be >= 1, got {self.D}")
        if self.W < 0 or self.V < 0:
            raise ShapeError("W and V must be non-negative")
        if self.K < 1:
            raise ShapeError(f"K must be >= 1, got {self.K}")
        if self.d is not None and self.d**2 != self.D:
            raise ShapeError(f"quantum shape needs D = d**2, got d={self.d}, D={self.D}")

    @classmethod
    def quantum(cls, d: int, W: int, V: int, K: int | None = None) -> "ProblemShape":
        """Shape for a ``d``-level system; ``K`` defaults to ``d``."""
        if d < 1:
            raise ShapeError(f"Hilbert dimension must be >= 1, got {d}")
        return cls(D=d * d, W=W, V=V, K=d if K is None else K, d=d)

    @property
    def VK(self) -> int:
        return self.V * self.K

    @property
    def N(self) -> int:
        return self.W + self.V * self.K

    @property
    def block_size(self) -> int:
        """Side length of the projective-measurement blocks (``sqrt(D)``)."""
        if self.d is not None:
            return self.d
        r = math.isqrt(self.D)
        if r * r != self.D:
            raise ShapeError(f"D={self.D} is not a perfect square; projective scenarios need D = d**2")
        return r


@dataclass(frozen=True)
class Configuration:
    shape: ProblemShape
    entries: np.ndarray

    def __post_init__(self):
        entries = np.asarray(self.entries)
        if entries.shape != (self.shape.D, self.shape.N):
            raise ShapeError(
                f"configuration must be {self.shape.D}x{self.shape.N}, got {entries.shape}"
            )
        object.__setattr__(self, "entries", entries)

    @property
    def P_st(self) -> np.ndarray:
        return self.entries[:, : self.shape.W]

    @property
    def P_m(self) -> np.ndarray:
        return self.entries[:, self.shape.W:]

    def gram(self) -> np.ndarray:
        return self.entries.T @ self.entries

    def data(self) -> "DataMatrix":
        return DataMatrix(self.P_st.T @ self.P_m)


def _canonical(pairs: Iterable[Sequence[int]], bound: int, label: str) -> tuple[Pair, ...]:
    out = set()
    for p in pairs:
        i, j = (int(p[0]), int(p[1]))
        if i > j:
            i, j = j, i
        if i < 0 or j >= bound:
            raise ShapeError(f"{label} pair ({p[0]}, {p[1]}) outside 0..{bound - 1}")
        out.add((i, j))
    return tuple(sorted(out))


@dataclass(frozen=True)
class OmegaMask:
    """Known Gram entries, split into state block, measurement block and data.

    Pairs are stored sorted with ``i <= j`` and deduplicated, so ``(i, j)``
    and ``(j, i)`` are the same constraint.  Measurement indices run over
    ``0..V*K-1`` (local to the measurement block).
    """

    shape: ProblemShape
    st_pairs: tuple[Pair, ...] = ()
    m_pairs: tuple[Pair, ...] = ()
    include_data_block: bool = True

    def __post_init__(self):
        object.__setattr__(self, "st_pairs", _canonical(self.st_pairs, self.shape.W, "state"))
        object.__setattr__(self, "m_pairs", _canonical(self.m_pairs, self.shape.VK, "measurement"))

    def __len__(self) -> int:
        n = len(self.st_pairs) + len(self.m_pairs)
        if self.include_data_block:
            n += self.shape.W * self.shape.VK
        return n

    def global_pairs(self) -> np.ndarray:
        """All known entries as ``(|Omega|, 2)`` indices into ``G``.

        Order: state pairs, measurement pairs, then the data block row-major.
        """
        W, VK = self.shape.W, self.shape.VK
        parts = [np.array(self.st_pairs, dtype=np.intp).reshape(-1, 2)]
        parts.append(np.array(self.m_pairs, dtype=np.intp).reshape(-1, 2) + W)
        if self.include_data_block:
            w, n = np.meshgrid(np.arange(W), np.arange(VK), indexing="ij")
            parts.append(np.stack([w.ravel(), W + n.ravel()], axis=1))
        return np.concatenate(parts, axis=0).astype(np.intp)

    def union(self, other: "OmegaMask") -> "OmegaMask":
        if other.shape != self.shape:
            raise ShapeError("cannot merge masks of different shapes")
        return OmegaMask(
            self.shape,
            self.st_pairs + other.st_pairs,
            self.m_pairs + other.m_pairs,
            self.include_data_block or other.include_data_block,
        )

    @property
    def side(self) -> str | None:
        """``"st"`` or ``"m"`` when exactly one Gram block carries knowledge."""
        if self.st_pairs and not self.m_pairs:
            return "st"
        if self.m_pairs and not self.st_pairs:
            return "m"
        return None


@dataclass(frozen=True)
class GramKnowledge:
    mask: OmegaMask
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float).reshape(-1)
        if values.size != len(self.mask):
            raise ShapeError(f"expected {len(self.mask)} values, got {values.size}")
        object.__setattr__(self, "values", values)

    def split(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Values for (state pairs, measurement pairs, data block)."""
        a = len(self.mask.st_pairs)
        b = a + len(self.mask.m_pairs)
        return self.values[:a], self.values[a:b], self.values[b:]


@dataclass(frozen=True)
class DataMatrix:
    entries: np.ndarray

    def __post_init__(self):
        entries = np.asarray(self.entries)
        if entries.ndim != 2:
            raise ShapeError("data matrix must be two-dimensional")
        object.__setattr__(self, "entries", entries)

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape


@dataclass(frozen=True)
class QuantumModel:
    d: int
    states: list[np.ndarray]
    povms: list[list[np.ndarray]]
    basis: list[np.ndarray] = field(repr=False)

    @property
    def shape(self) -> ProblemShape:
        K = len(self.povms[0]) if self.povms else 1
        return ProblemShape.quantum(self.d, len(self.states), len(self.povms), K)

    def effects(self) -> list[np.ndarray]:
        return [E for povm in self.povms for E in povm]

    def configuration(self) -> Configuration:
        cols = [vectorize(H, self.basis) for H in self.states + self.effects()]
        entries = np.column_stack(cols) if cols else np.zeros((self.d**2, 0))
        return Configuration(self.shape, entries)


class Scenario(str, enum.Enum):
    """A-priori knowledge patterns on top of the data block."""

    PURE = "pure"
    PROJ_KNOWN = "proj-known"
    PROJ_UNKNOWN = "proj-unknown"
    CUSTOM = "custom"


def make_hermitian_basis(d: int) -> list[np.ndarray]:
    """Trace-orthonormal basis of Hermitian ``d x d`` matrices.

    The normalized identity comes first, followed by the generalized
    Gell-Mann matrices (symmetric, antisymmetric, then diagonal), each
    scaled to unit Hilbert-Schmidt norm.  For ``d=2`` this is
    ``I, X, Y, Z`` divided by ``sqrt(2)``.
    """
    if d < 1:
        raise ShapeError(f"d must be >= 1, got {d}")
    basis = [np.eye(d, dtype=complex) / math.sqrt(d)]
    for j in range(d):
        for k in range(j + 1, d):
            s = np.zeros((d, d), dtype=complex)
            s[j, k] = s[k, j] = 1 / math.sqrt(2)
            a = np.zeros((d, d), dtype=complex)
            a[j, k] = -1j / math.sqrt(2)
            a[k, j] = 1j / math.sqrt(2)
            basis += [s, a]
    for l in range(1, d):
        h = np.zeros((d, d), dtype=complex)
        h[np.arange(l), np.arange(l)] = 1.0
        h[l, l] = -l
        basis.append(h / math.sqrt(l * (l + 1)))
    return basis


def vectorize(H: np.ndarray, basis: Sequence[np.ndarray]) -> np.ndarray:
    """Real coordinates ``tr(sigma_a H)`` of a Hermitian matrix."""
    H = np.asarray(H)
    coeffs = np.array([np.trace(s @ H) for s in basis])
    if np.any(np.abs(coeffs.imag) > 1e-10):
        raise ShapeError("matrix is not Hermitian: complex basis coefficient")
    return coeffs.real.copy()


def random_density_matrix(d: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diagonal(r) / np.abs(np.diagonal(r))
    return q * ph


def _inv_sqrt_psd(S: np.ndarray) -> np.ndarray:
    w, U = np.linalg.eigh(S)
    return (U / np.sqrt(w)) @ U.conj().T


def random_povm(d: int, K: int, rng: np.random.Generator) -> list[np.ndarray]:
    """Generic full-rank POVM: random positive elements, symmetrically normalized."""
    raw = []
    for _ in range(K):
        g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        raw.append(g @ g.conj().T)
    T = _inv_sqrt_psd(sum(raw))
    out = []
    for E in raw:
        E = T @ E @ T
        out.append((E + E.conj().T) / 2)
    return out


def _default_degeneracies(d: int, K: int) -> list[int]:
    if K > d:
        raise ShapeError(f"a projective measurement on d={d} has at most {d} outcomes, got K={K}")
    q, r = divmod(d, K)
    return [q + 1] * r + [q] * (K - r)


def random_projective_measurement(
    d: int, degeneracies: Sequence[int], rng: np.random.Generator
) -> list[np.ndarray]:
    U = random_unitary(d, rng)
    out, start = [], 0
    for m in degeneracies:
        cols = U[:, start:start + m]
        out.append(cols @ cols.conj().T)
        start += m
    return out


def random_quantum_model(
    d: int,
    W: int,
    V: int,
    K: int | None = None,
    degeneracies: Sequence[int] | Sequence[Sequence[int]] | None = None,
    projective: bool = False,
    seed=None,
) -> QuantumModel:
    """Sample full-rank states and generic or exactly projective measurements.

    ``degeneracies`` is either one list of ``K`` ranks shared by every
    measurement or one such list per measurement; each list must sum to
    ``d``.  It is only meaningful when ``projective`` is set.
    """
    K = d if K is None else K
    rng = np.random.default_rng(seed)
    if degeneracies is not None:
        if not projective:
            raise ShapeError("degeneracies only apply to projective measurements")
        degs = list(degeneracies)
        per_meas = [list(x) for x in degs] if degs and np.ndim(degs[0]) == 1 else [degs] * V
        if len(per_meas) != V:
            raise ShapeError(f"expected degeneracies for {V} measurements, got {len(per_meas)}")
        for ds in per_meas:
            if len(ds) != K or sum(ds) != d or min(ds) < 1:
                raise ShapeError(f"degeneracies {ds} must be {K} positive parts summing to d={d}")
    elif projective:
        per_meas = [_default_degeneracies(d, K)] * V
    states = [random_density_matrix(d, rng) for _ in range(W)]
    if projective:
        povms = [random_projective_measurement(d, per_meas[v], rng) for v in range(V)]
    else:
        povms = [random_povm(d, K, rng) for _ in range(V)]
    return QuantumModel(d, states, povms, make_hermitian_basis(d))


def born_data(model: QuantumModel) -> DataMatrix:
    """Outcome probabilities ``tr(rho_w E_vk)``, column index ``v*K + k``."""
    effects = model.effects()
    D = np.empty((len(model.states), len(effects)))
    for w, rho in enumerate(model.states):
        for n, E in enumerate(effects):
            D[w, n] = np.trace(rho @ E).real
    return DataMatrix(D)


def random_configuration(shape: ProblemShape, rng: np.random.Generator, integer: bool = False) -> Configuration:
    """Generic configuration: i.i.d. Gaussian, or uniform integers in [-10, 10]."""
    if integer:
        entries = rng.integers(-10, 11, size=(shape.D, shape.N))
    else:
        entries = rng.standard_normal((shape.D, shape.N))
    return Configuration(shape, entries)


def _block_pairs(VK: int, b: int, diagonal: bool) -> list[Pair]:
    if VK % b:
        raise ShapeError(f"V*K={VK} is not a multiple of the block size {b}")
    pairs = []
    for start in range(0, VK, b):
        for i in range(start, start + b):
            for j in range(i if diagonal else i + 1, start + b):
                pairs.append((i, j))
    return pairs


def scenario_mask(
    shape: ProblemShape,
    scenario: Scenario | str | Iterable[Scenario | str],
    st_pairs: Iterable[Pair] = (),
    m_pairs: Iterable[Pair] = (),
    include_data_block: bool = True,
) -> OmegaMask:
    """Mask for a named scenario, or a union of scenarios.

    ``"pure"`` knows the diagonal of the state Gram block; ``"proj-known"``
    knows the full ``d x d`` diagonal blocks of the measurement Gram block;
    ``"proj-unknown"`` the same blocks without their diagonals.
    ``"custom"`` uses the explicit ``st_pairs``/``m_pairs``.  A string such
    as ``"pure+proj-known"`` combines scenarios.
    """
    if isinstance(scenario, str) and "+" in scenario:
        scenario = scenario.split("+")
    if isinstance(scenario, (str, Scenario)):
        scenario = [scenario]
    st: list[Pair] = []
    m: list[Pair] = []
    for s in scenario:
        try:
            s = Scenario(s)
        except ValueError:
            valid = ", ".join(x.value for x in Scenario)
            raise ShapeError(f"unknown scenario {s!r}; valid: {valid}") from None
        if s is Scenario.PURE:
            st += [(i, i) for i in range(shape.W)]
        elif s is Scenario.PROJ_KNOWN:
            m += _block_pairs(shape.VK, shape.block_size, diagonal=True)
        elif s is Scenario.PROJ_UNKNOWN:
            m += _block_pairs(shape.VK, shape.block_size, diagonal=False)
        else:
            st += list(st_pairs)
            m += list(m_pairs)
    return OmegaMask(shape, tuple(st), tuple(m), include_data_block)


def extract_knowledge(P: Configuration | np.ndarray, mask: OmegaMask) -> GramKnowledge:
    """Evaluate the known Gram entries ``p_i . p_j`` of a configuration."""
    entries = P.entries if isinstance(P, Configuration) else np.asarray(P)
    if entries.shape != (mask.shape.D, mask.shape.N):
        raise ShapeError(f"configuration shape {entries.shape} does not match mask")
    idx = mask.global_pairs()
    values = np.einsum("ak,ak->k", entries[:, idx[:, 0]], entries[:, idx[:, 1]])
    return GramKnowledge(mask, values)
