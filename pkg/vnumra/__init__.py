from ._core.cascade import (
    CascadeResult,
    RefinementResult,
    phi_hat_product,
    phi_refine,
    phi_refine_converged,
    phi_time,
    psi_hat,
    psi_time,
    refinement_change,
    refinement_window,
)
from ._core.common.grid import Domain, Grid, SampledVectorFunction
from ._core.completion import complete_wavelet_masks
from ._core.lattice import (
    Coset,
    Lattice,
    LatticePoint,
    chirp_factor,
    enumerate_lambda,
    validate_lattice,
)
from ._core.lct import (
    LctParams,
    lct_forward,
    lct_forward_fast,
    lct_inverse,
    lct_kernel,
    validate_params,
)
from ._core.masks import (
    CertificationReport,
    Condition,
    MaskBank,
    MaskRole,
    VectorMask,
    check_filterbank,
    check_frequency_identity,
    check_lower_bound,
    check_symmetry,
    check_time_orthogonality,
    default_pairs,
    eval_symbol,
    split_symbol,
)
from ._core.pipeline import (
    CoefficientBand,
    CoefficientPyramid,
    Resolution,
    VnumraSystem,
    analyze,
    build_system,
    finest_level,
    gram_matrix,
    synthesize,
)

__all__ = (
    "CascadeResult",
    "CertificationReport",
    "CoefficientBand",
    "CoefficientPyramid",
    "Condition",
    "Coset",
    "Domain",
    "Grid",
    "Lattice",
    "LatticePoint",
    "LctParams",
    "MaskBank",
    "MaskRole",
    "RefinementResult",
    "Resolution",
    "SampledVectorFunction",
    "VectorMask",
    "VnumraSystem",
    "analyze",
    "build_system",
    "check_filterbank",
    "check_frequency_identity",
    "check_lower_bound",
    "check_symmetry",
    "check_time_orthogonality",
    "chirp_factor",
    "complete_wavelet_masks",
    "default_pairs",
    "enumerate_lambda",
    "eval_symbol",
    "finest_level",
    "gram_matrix",
    "lct_forward",
    "lct_forward_fast",
    "lct_inverse",
    "lct_kernel",
    "phi_hat_product",
    "phi_refine",
    "phi_refine_converged",
    "phi_time",
    "psi_hat",
    "psi_time",
    "refinement_change",
    "refinement_window",
    "split_symbol",
    "synthesize",
    "validate_lattice",
    "validate_params",
)
