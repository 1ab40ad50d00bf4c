import math

import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from gramrig.exceptions import RankComputationError
from gramrig.rank import finite_field_rank, random_prime, rank_with_consensus, svd_rank


class TestSvdRank:
    def test_zero(self):
        assert svd_rank(np.zeros((3, 3))).computed_rank == 0

    def test_identity(self):
        r = svd_rank(np.eye(4))
        assert r.computed_rank == 4 and math.isinf(r.gap_ratio)

    def test_below_tolerance(self):
        r = svd_rank(np.diag([1.0, 1e-15]), rel_tol=1e-9)
        assert r.computed_rank == 1 and r.gap_ratio == pytest.approx(1e15)

    def test_empty(self):
        assert svd_rank(np.zeros((0, 5))).computed_rank == 0

    def test_spectrum_and_target(self):
        r = svd_rank(np.diag([3.0, 2.0, 0.0]), target=2)
        assert r.spectrum == [3.0, 2.0, 0.0] and r.reached

    def test_nonfinite_input(self):
        with pytest.raises(RankComputationError, match="2x2"):
            svd_rank(np.array([[np.nan, 1.0], [0.0, 1.0]]))


class TestFiniteFieldRank:
    def test_identity(self):
        for p in (2, 3, 1_000_003, 2_147_483_647):
            assert finite_field_rank(np.eye(5, dtype=int), prime=p).computed_rank == 5

    def test_proportional_rows(self):
        assert finite_field_rank([[2, 4], [1, 2]]).computed_rank == 1

    def test_records_prime(self):
        r = finite_field_rank(np.eye(2, dtype=int), seed=3)
        assert sympy.isprime(r.prime) and 2**30 <= r.prime < 2**31

    def test_rejects_fractions(self):
        with pytest.raises(RankComputationError):
            finite_field_rank(np.array([[0.5, 1.0]]))

    def test_accepts_integral_floats_and_objects(self):
        assert finite_field_rank(np.array([[2.0, 4.0], [1.0, 2.0]])).computed_rank == 1
        big = np.array([[10**30, 1], [1, 0]], dtype=object)
        assert finite_field_rank(big).computed_rank == 2

    def test_small_prime_can_drop_rank(self):
        # det = 6, vanishes mod 2 and mod 3 but not over Q
        A = [[2, 0], [0, 3]]
        assert finite_field_rank(A, prime=5).computed_rank == 2
        assert finite_field_rank(A, prime=3).computed_rank == 1

    def test_matches_svd_on_random_integer_matrix(self):
        A = np.random.default_rng(1).integers(-9, 10, size=(10, 10))
        assert finite_field_rank(A).computed_rank == svd_rank(A).computed_rank

    def test_wide_and_tall(self, rng):
        B = rng.integers(-10, 11, size=(7, 3)) @ rng.integers(-10, 11, size=(3, 12))
        assert finite_field_rank(B).computed_rank == 3
        assert finite_field_rank(B.T).computed_rank == 3

    def test_random_prime_is_prime(self, rng):
        for _ in range(5):
            assert sympy.isprime(random_prime(rng))


class TestConsensus:
    def test_identity(self):
        r = rank_with_consensus(np.eye(3, dtype=int))
        assert r.computed_rank == 3 and r.other_rank == 3 and r.disagreement is False

    def test_zero_wide(self):
        r = rank_with_consensus(np.zeros((2, 5), dtype=int))
        assert r.computed_rank == 0 and r.other_rank == 0 and not r.disagreement

    def test_scaled_hilbert(self):
        # the exact rank of H * lcm is 8; float SVD sees cond ~ 1e10
        n = 8
        L = math.lcm(*range(1, 2 * n))
        H = np.array([[L // (i + j + 1) for j in range(n)] for i in range(n)], dtype=object)
        assert sympy.Matrix(H.tolist()).rank() == 8
        r = rank_with_consensus(H)
        assert r.computed_rank == 8
        assert r.disagreement == (r.other_rank != 8)
        assert r.other_rank == svd_rank(np.asarray(H, dtype=float)).computed_rank


class TestProperties:
    def test_transpose_invariance(self, rng):
        for _ in range(50):
            m, n, k = rng.integers(1, 12, size=3)
            A = rng.integers(-10, 11, size=(m, k)) @ rng.integers(-10, 11, size=(k, n))
            assert svd_rank(A).computed_rank == svd_rank(A.T).computed_rank
            assert finite_field_rank(A).computed_rank == finite_field_rank(A.T).computed_rank

    def test_product_bound(self, rng):
        for _ in range(50):
            m, k, n = rng.integers(1, 10, size=3)
            A = rng.integers(-10, 11, size=(m, k)) * (rng.random((m, k)) < 0.5)
            B = rng.integers(-10, 11, size=(k, n)) * (rng.random((k, n)) < 0.5)
            for rank in (lambda X: svd_rank(X).computed_rank,
                         lambda X: finite_field_rank(X).computed_rank):
                assert rank(A @ B) <= min(rank(A), rank(B))

    def test_backends_agree_on_random_integer_matrices(self, rng):
        for _ in range(100):
            m, n = rng.integers(1, 41, size=2)
            k = rng.integers(1, min(m, n) + 1)
            A = rng.integers(-10, 11, size=(m, k)) @ rng.integers(-10, 11, size=(k, n))
            r = rank_with_consensus(A)
            assert not r.disagreement, (m, n, k, r.computed_rank, r.other_rank)


@settings(max_examples=60, deadline=None)
@given(
    left=arrays(np.int64, st.tuples(st.integers(1, 7), st.integers(1, 4)), elements=st.integers(-9, 9)),
    right_cols=st.integers(1, 7),
    seed=st.integers(0, 2**32 - 1),
)
def test_low_rank_products_agree(left, right_cols, seed):
    # rank(L R) is at most the inner dimension; both backends must match sympy
    rng = np.random.default_rng(seed)
    R = rng.integers(-9, 10, size=(left.shape[1], right_cols))
    A = left @ R
    exact = sympy.Matrix(A.tolist()).rank()
    assert finite_field_rank(A, seed=seed).computed_rank == exact
    assert svd_rank(A.astype(float)).computed_rank == exact
