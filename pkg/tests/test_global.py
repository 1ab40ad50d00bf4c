import numpy as np
import pytest

from gramrig.exceptions import (
    InconsistentKnowledgeError,
    MixedSideError,
    NoRealConfigurationError,
    NotUniqueError,
    ShapeError,
    SpanningError,
)
from gramrig.global_ import (
    build_criterion,
    complete_gram,
    factor_data,
    global_target,
    global_test,
    reconstruct_gram,
    recover_symmetric_unknown,
)
from gramrig.local import local_test
from gramrig.model import (
    Configuration,
    GramKnowledge,
    OmegaMask,
    ProblemShape,
    extract_knowledge,
    random_configuration,
    scenario_mask,
)
from gramrig.rank import svd_rank

SCENARIOS = ["pure", "proj-known", "proj-unknown"]


def random_instance(rng, d=None):
    d = d or int(rng.integers(1, 4))
    while True:
        scen = SCENARIOS[int(rng.integers(0, 3))]
        if d == 1 and scen == "proj-unknown":
            continue
        s = ProblemShape.quantum(d, int(rng.integers(d * d, 4 * d * d + 3)), int(rng.integers(d, 3 * d + 3)))
        return s, scenario_mask(s, scen)


class TestFactorData:
    def test_identity(self):
        f = factor_data(np.eye(3), 3)
        np.testing.assert_allclose(f.P0_st.T @ f.P0_m, np.eye(3), atol=1e-14)
        assert f.row_perm.tolist() == [0, 1, 2] and f.col_perm.tolist() == [0, 1, 2]
        assert f.corner_conditioning == pytest.approx(1.0)

    def test_round_trip(self, rng):
        s = ProblemShape.quantum(2, 10, 4, 2)
        data = random_configuration(s, rng).data().entries
        f = factor_data(data, 4)
        np.testing.assert_allclose(f.P0_st.T @ f.P0_m, data, atol=1e-10)
        Ps, Pm = f.permuted_factors()
        np.testing.assert_allclose(Ps.T @ Pm, f.permuted_data(), atol=1e-10)
        assert svd_rank(f.P0_st).computed_rank == 4 and svd_rank(f.P0_m).computed_rank == 4
        corner = f.permuted_data()[:4, :4]
        assert svd_rank(corner).computed_rank == 4

    def test_rank_deficient(self, rng):
        data = rng.standard_normal((6, 3)) @ rng.standard_normal((3, 8))
        with pytest.raises(SpanningError, match="rank-deficient"):
            factor_data(data, 4)

    def test_too_few_rows(self, rng):
        with pytest.raises(SpanningError):
            factor_data(rng.standard_normal((3, 8)), 4)

    def test_rank_too_high(self, rng):
        with pytest.raises(ShapeError):
            factor_data(rng.standard_normal((6, 8)), 4)

    def test_pivoting_finds_corner(self, rng):
        # leading 2x2 block is singular; a renaming is needed
        P_st = np.array([[1.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
        P_m = np.array([[1.0, 2.0, 0.0], [0.0, 0.0, 1.0]])
        data = P_st.T @ P_m
        f = factor_data(data, 2)
        corner = data[np.ix_(f.corner_rows, f.corner_cols)]
        assert abs(np.linalg.det(corner)) > 0.5


class TestBuildCriterion:
    def test_scalar(self):
        s = ProblemShape(D=1, W=1, V=1, K=1)
        f = factor_data(np.array([[2.5]]), 1)
        C = build_criterion(f, OmegaMask(s, [(0, 0)]))
        assert C.entries.shape == (1, 1) and C.entries[0, 0] == pytest.approx(6.25)
        assert C.block == "st" and C.J == 1

    def test_diagonal_pair_rank_one_symmetric(self, rng):
        s = ProblemShape(D=3, W=4, V=4, K=1)
        data = random_configuration(s, rng).data().entries
        f = factor_data(data, 3)
        C = build_criterion(f, OmegaMask(s, [(2, 2)]))
        N = C.entries[:, 0].reshape(3, 3, order="F")
        assert np.array_equal(N, N.T)
        a = data[2, f.corner_cols]
        np.testing.assert_allclose(N, np.outer(a, a), rtol=1e-15)
        assert np.linalg.matrix_rank(N) == 1

    def test_offdiag_pair_direct(self, rng):
        s = ProblemShape(D=2, W=3, V=3, K=1)
        data = random_configuration(s, rng).data().entries
        f = factor_data(data, 2)
        C = build_criterion(f, OmegaMask(s, [(0, 2)]))
        a, b = data[0, f.corner_cols], data[2, f.corner_cols]
        direct = 0.5 * (np.outer(a, b) + np.outer(b, a))
        np.testing.assert_allclose(C.entries[:, 0], direct.flatten(order="F"), rtol=1e-14)

    def test_measurement_side_uses_columns(self, rng):
        s = ProblemShape(D=2, W=3, V=3, K=1)
        data = random_configuration(s, rng).data().entries
        f = factor_data(data, 2)
        C = build_criterion(f, OmegaMask(s, [], [(1, 2)]))
        a, b = data[f.corner_rows, 1], data[f.corner_rows, 2]
        np.testing.assert_allclose(C.entries[:, 0], (0.5 * (np.outer(a, b) + np.outer(b, a))).ravel())
        assert C.block == "m"

    def test_mixed_side_rejected(self, rng):
        s = ProblemShape(D=2, W=3, V=3, K=1)
        f = factor_data(random_configuration(s, rng).data().entries, 2)
        with pytest.raises(MixedSideError, match="open problem"):
            build_criterion(f, OmegaMask(s, [(0, 0)], [(0, 0)]))

    def test_data_block_required(self, rng):
        s = ProblemShape(D=2, W=3, V=3, K=1)
        f = factor_data(random_configuration(s, rng).data().entries, 2)
        with pytest.raises(ShapeError):
            build_criterion(f, OmegaMask(s, [(0, 0)], include_data_block=False))

    def test_columns_symmetric_and_rank_bounded(self, rng):
        for _ in range(30):
            s, mask = random_instance(rng)
            f = factor_data(random_configuration(s, rng).data().entries, s.D)
            C = build_criterion(f, mask).entries
            D = s.D
            T = C.reshape(D, D, -1)
            assert np.array_equal(T, T.transpose(1, 0, 2))
            assert svd_rank(C).computed_rank <= global_target(D)


class TestGlobalTest:
    def test_pure_d2(self):
        s = ProblemShape.quantum(2, 10, 4, 2)
        v = global_test(s, scenario_mask(s, "pure"), seed=0)
        assert v.completable and v.rank_report.computed_rank == 10 and v.block == "st"

    def test_too_few_states(self):
        s = ProblemShape.quantum(2, 9, 4, 2)
        v = global_test(s, scenario_mask(s, "pure"), seed=0)
        assert not v.completable and v.rank_report.computed_rank == 9

    @pytest.mark.parametrize("backend", ["gf", "consensus"])
    def test_exact_backends(self, backend):
        s = ProblemShape.quantum(2, 4, 10, 2)
        v = global_test(s, scenario_mask(s, "proj-known"), backend=backend, seed=2)
        assert v.completable
        assert v.rank_report.disagreement in (None, False)

    def test_universality(self, rng):
        for scen in SCENARIOS:
            for k in range(100):
                d = int(rng.integers(2, 4))
                s = ProblemShape.quantum(d, int(rng.integers(d * d, 3 * d * d)), int(rng.integers(d, 3 * d + 3)))
                mask = scenario_mask(s, scen)
                a = global_test(s, mask, trials=1, seed=[1, k])
                b = global_test(s, mask, trials=1, seed=[2, k])
                assert a.completable == b.completable

    def test_global_implies_local(self, rng):
        checked = 0
        while checked < 50:
            s, mask = random_instance(rng, d=int(rng.integers(1, 3)))
            if global_test(s, mask, seed=checked).completable:
                assert local_test(s, mask, seed=checked).completable
                checked += 1

    @pytest.mark.parametrize("c", [1e-3, 1e3])
    def test_scale_invariance(self, rng, c):
        for _ in range(20):
            s, mask = random_instance(rng)
            data = random_configuration(s, rng).data().entries
            ranks = []
            for scale in (1.0, c):
                f = factor_data(scale * data, s.D)
                ranks.append(svd_rank(build_criterion(f, mask).entries).computed_rank)
            assert ranks[0] == ranks[1]


def _pure_instance(rng, D=4, W=10, V=4, K=2):
    s = ProblemShape(D=D, W=W, V=V, K=K)
    P = random_configuration(s, rng)
    return s, P, scenario_mask(s, "pure")


    def test_degenerate_integer_draws_are_redrawn(self):
        # D = 1 integer samples hit a zero state with probability 1/21
        s = ProblemShape(D=1, W=1, V=1, K=1)
        for seed in range(60):
            assert global_test(s, OmegaMask(s, [(0, 0)]), backend="gf", seed=seed).completable

    def test_structural_deficiency_still_raises(self):
        s = ProblemShape.quantum(2, 3, 4)
        with pytest.raises(SpanningError):
            global_test(s, OmegaMask(s, [(0, 0)]), backend="gf", seed=0)


class TestRecovery:
    def test_self_factorization_gives_identity(self, rng):
        s, P, mask = _pure_instance(rng)
        f = factor_data(P.data().entries, 4)
        P0 = Configuration(s, np.hstack([f.P0_st, f.P0_m]))
        M, side = recover_symmetric_unknown(f, extract_knowledge(P0, mask))
        np.testing.assert_allclose(M, np.eye(4), atol=1e-8)
        assert side == "st"

    def test_three_constraints_d2(self, rng):
        s = ProblemShape(D=2, W=3, V=2, K=1)
        P = random_configuration(s, rng)
        mask = OmegaMask(s, [(0, 0), (1, 1), (0, 2)])
        k = extract_knowledge(P, mask)
        f = factor_data(P.data().entries, 2)
        M, side = recover_symmetric_unknown(f, k)
        G = reconstruct_gram(f, M, side)
        for (i, j), v in zip(mask.global_pairs(), k.values):
            assert abs(G[i, j] - v) < 1e-10

    def test_measurement_side(self, rng):
        s = ProblemShape.quantum(2, 4, 10, 2)
        P = random_configuration(s, rng)
        k = extract_knowledge(P, scenario_mask(s, "proj-known"))
        G = complete_gram(P.data(), k)
        np.testing.assert_allclose(G, P.gram(), atol=1e-7)

    def test_inconsistent(self, rng):
        s, P, mask = _pure_instance(rng, W=14)
        k = extract_knowledge(P, mask)
        values = k.values.copy()
        values[0] += 1.0
        f = factor_data(P.data().entries, 4)
        with pytest.raises(InconsistentKnowledgeError):
            recover_symmetric_unknown(f, GramKnowledge(mask, values))

    def test_not_unique(self, rng):
        s, P, mask = _pure_instance(rng, W=9)
        f = factor_data(P.data().entries, 4)
        with pytest.raises(NotUniqueError):
            recover_symmetric_unknown(f, extract_knowledge(P, mask))

    def test_no_real_configuration(self, rng):
        s, P, mask = _pure_instance(rng, W=10)
        k = extract_knowledge(P, mask)
        values = k.values.copy()
        values[:10] = -values[:10]
        f = factor_data(P.data().entries, 4)
        with pytest.raises(NoRealConfigurationError):
            recover_symmetric_unknown(f, GramKnowledge(mask, values))

    def test_data_block_mismatch(self, rng):
        s, P, mask = _pure_instance(rng)
        k = extract_knowledge(P, mask)
        values = k.values.copy()
        values[-1] += 0.1
        with pytest.raises(InconsistentKnowledgeError):
            recover_symmetric_unknown(factor_data(P.data().entries, 4), GramKnowledge(mask, values))


class TestReconstruct:
    def test_round_trip(self, rng):
        s, P, mask = _pure_instance(rng)
        G = complete_gram(P.data(), extract_knowledge(P, mask))
        assert np.max(np.abs(G - P.gram())) <= 1e-7

    def test_identity_pattern(self):
        f = factor_data(np.eye(2), 2)
        G = reconstruct_gram(f, np.eye(2), "st")
        np.testing.assert_allclose(G, np.block([[np.eye(2), np.eye(2)], [np.eye(2), np.eye(2)]]), atol=1e-14)

    def test_spectrum(self, rng):
        s, P, mask = _pure_instance(rng)
        G = complete_gram(P.data(), extract_knowledge(P, mask))
        w = np.linalg.eigvalsh(G)
        assert w.min() > -1e-8
        assert svd_rank(G).computed_rank == 4

    def test_orthogonal_invariance(self, rng):
        s, P, mask = _pure_instance(rng)
        O, _ = np.linalg.qr(rng.standard_normal((4, 4)))
        OP = Configuration(s, O @ P.entries)
        G1 = complete_gram(P.data(), extract_knowledge(P, mask))
        G2 = complete_gram(OP.data(), extract_knowledge(OP, mask))
        assert np.max(np.abs(G1 - G2)) <= 1e-8

    def test_bad_side(self):
        with pytest.raises(ValueError):
            reconstruct_gram(factor_data(np.eye(2), 2), np.eye(2), "both")
