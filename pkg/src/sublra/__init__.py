"""Sublinear-cost low-rank approximation with verified access counting.

The package builds rank-``rho`` approximations of an ``m x n`` matrix
from three small sketch blocks obtained through structured sparse
multipliers, so that the number of distinct input entries ever read —
counted by an oracle wrapper, not merely claimed — stays far below
``m * n``.  On top of the sketching core it provides cross (CUR)
approximation, conversion of any factored approximation to its exact
truncated SVD, iterative refinement recipes, homotopy continuation for
hard inputs, and an experiment harness with a command-line front end.
"""

from .linalg import (
    ConvergenceError,
    FlopCounter,
    NormEstimate,
    QrpFactorization,
    RankDeficientError,
    TopSVD,
    fro_norm,
    kahan_matmul,
    norms,
    pinv_trunc,
    qrp,
    subspace_distance,
    svd,
    tail_norm,
    truncate_svd,
)
from .oracle import AccessReport, MatrixOracle
from .multipliers import (
    Bidiagonal,
    Butterfly,
    Diagonal,
    GivensRotation,
    HouseholderReflector,
    Permutation,
    SparseMultiplier,
    apply_left,
    apply_right,
    densify,
    gen_abridged_fourier,
    gen_abridged_hadamard,
    gen_bidiag_perm,
    gen_gaussian,
    gen_orthogonal_partial,
    gen_sample,
)
from .sketch import (
    LRA2,
    LRA3,
    SketchLostError,
    SketchSet,
    lra_to_topsvd,
    nystrom_reconstruct,
    recompress,
    sketch,
)
from .cur import (
    CURDecomp,
    canonical_cur,
    maxvol_indices,
    topsvd_to_cur,
    verify_cur_exactness,
)
from .inputs import (
    InputSpec,
    decay_matrix,
    delta_matrix,
    dual_random,
    generate,
    geometric_spectrum,
    shifted_delta,
)
from .refine import (
    RefineState,
    StepRecord,
    estimate_residual_fro,
    homotopy_refine,
    init_refine_state,
    leverage_scores,
    refine_deterministic,
    refine_leverage,
    refine_residual,
)
from .mmio import load_matrix_market, save_matrix_market
from .harness import (
    ConfigError,
    ExperimentConfig,
    ExperimentRecord,
    PipelineConfig,
    TrialResult,
    adversarial_sweep,
    build_multiplier,
    emit,
    load_config,
    report_rows,
    run,
)

__version__ = "0.1.0"

__all__ = [
    "AccessReport",
    "Bidiagonal",
    "Butterfly",
    "CURDecomp",
    "ConfigError",
    "ConvergenceError",
    "Diagonal",
    "ExperimentConfig",
    "ExperimentRecord",
    "FlopCounter",
    "GivensRotation",
    "HouseholderReflector",
    "InputSpec",
    "LRA2",
    "LRA3",
    "MatrixOracle",
    "NormEstimate",
    "Permutation",
    "PipelineConfig",
    "QrpFactorization",
    "RankDeficientError",
    "RefineState",
    "SketchLostError",
    "SketchSet",
    "SparseMultiplier",
    "StepRecord",
    "TopSVD",
    "TrialResult",
    "adversarial_sweep",
    "apply_left",
    "apply_right",
    "build_multiplier",
    "canonical_cur",
    "decay_matrix",
    "delta_matrix",
    "densify",
    "dual_random",
    "emit",
    "estimate_residual_fro",
    "fro_norm",
    "gen_abridged_fourier",
    "gen_abridged_hadamard",
    "gen_bidiag_perm",
    "gen_gaussian",
    "gen_orthogonal_partial",
    "gen_sample",
    "generate",
    "geometric_spectrum",
    "homotopy_refine",
    "init_refine_state",
    "kahan_matmul",
    "leverage_scores",
    "load_config",
    "load_matrix_market",
    "lra_to_topsvd",
    "maxvol_indices",
    "norms",
    "nystrom_reconstruct",
    "pinv_trunc",
    "qrp",
    "recompress",
    "refine_deterministic",
    "refine_leverage",
    "refine_residual",
    "report_rows",
    "run",
    "save_matrix_market",
    "shifted_delta",
    "sketch",
    "subspace_distance",
    "svd",
    "tail_norm",
    "topsvd_to_cur",
    "truncate_svd",
    "verify_cur_exactness",
]
