"""Local and global completability of partially known Gram matrices."""
from .exceptions import (
    GramrigError,
    InconsistentKnowledgeError,
    MixedSideError,
    NoRealConfigurationError,
    NotUniqueError,
    RankComputationError,
    ShapeError,
    SpanningError,
)
from .global_ import (
    CriterionMatrix,
    Factorization,
    GlobalVerdict,
    build_criterion,
    complete_gram,
    factor_data,
    global_test,
    reconstruct_gram,
    recover_symmetric_unknown,
)
from .local import LocalVerdict, jacobian, local_test
from .model import (
    Configuration,
    DataMatrix,
    GramKnowledge,
    OmegaMask,
    ProblemShape,
    QuantumModel,
    Scenario,
    born_data,
    extract_knowledge,
    make_hermitian_basis,
    random_configuration,
    random_quantum_model,
    scenario_mask,
    vectorize,
)
from .oracle import (
    PerturbationResult,
    fd_jacobian,
    reference_criterion,
    linear_uniqueness_oracle,
    orbit_distance,
    perturbation_search,
)
from .rank import RankReport, finite_field_rank, rank_with_consensus, svd_rank
from .sweep import GridCell, PhaseDiagram, emit, is_monotone, run_sweep

__version__ = "0.1.0"
