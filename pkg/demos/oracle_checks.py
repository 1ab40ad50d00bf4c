"""Cross-check the randomized tests against slower independent oracles.

Local verdicts are compared with a direct search for constraint-preserving
deformations, global verdicts with the null space of the linear system for
the unknown symmetric matrix.
"""
import numpy as np

from gramrig import (
    OmegaMask,
    ProblemShape,
    extract_knowledge,
    factor_data,
    global_test,
    linear_uniqueness_oracle,
    local_test,
    perturbation_search,
    random_configuration,
    scenario_mask,
)


def local_vs_search(rng, n=12):
    agree = 0
    for k in range(n):
        D = int(rng.integers(2, 4))
        shape = ProblemShape(D=D, W=int(rng.integers(D, 8)), V=0)
        pairs = [(i, j) for i in range(shape.N) for j in range(i, shape.N)]
        keep = rng.random(len(pairs)) < 0.7
        mask = OmegaMask(shape, [p for p, t in zip(pairs, keep) if t], include_data_block=False)
        verdict = local_test(shape, mask, seed=k).completable
        P = random_configuration(shape, rng)
        res = perturbation_search(P, extract_knowledge(P, mask), restarts=20, seed=k)
        agree += verdict != res.found_nontrivial_deformation
        print(f"  D={D} N={shape.N} |Omega|={len(mask):>2}  local={'rigid' if verdict else 'flexible':<8}"
              f"  search orbit distance {res.orbit_distance:.1e}")
    return agree, n


def global_vs_nullspace(rng, n=20):
    agree = 0
    for k in range(n):
        shape = ProblemShape.quantum(2, int(rng.integers(4, 13)), int(rng.integers(2, 6)))
        mask = scenario_mask(shape, "pure")
        verdict = global_test(shape, mask, seed=k).completable
        fact = factor_data(random_configuration(shape, rng).data().entries, shape.D)
        agree += verdict == linear_uniqueness_oracle(fact, mask, seed=k)
    return agree, n


def main():
    rng = np.random.default_rng(2024)
    print("local test vs deformation search")
    print("  agreement %d/%d" % local_vs_search(rng))
    print("global test vs null-space oracle")
    print("  agreement %d/%d" % global_vs_nullspace(rng))


if __name__ == "__main__":
    main()
