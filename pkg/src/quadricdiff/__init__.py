"""Polynomial diffusions on compact quadric state spaces.

Numerical tools for diffusions on the unit ball and unit sphere whose
coefficients are polynomial: the algebra of tangential diffusion
coefficients, sum-of-squares feasibility with checkable witnesses, exact
conditional moments through generator matrix exponentials,
structure-preserving path simulation, and Lie-algebraic smooth-density
criteria.
"""

from .skew import (
    RankError,
    elementary_skew,
    pair_from_index,
    pi_index,
    plucker_eval,
    rank2_factor,
    skew_basis,
    skew_dim,
    skew_to_vec,
    vec_to_skew,
)
from .cspace import (
    KBasisElement,
    TangencyError,
    biquadratic_eval,
    c_H_eval,
    c_from_biquadratic,
    c_space_basis,
    cmap_eval,
    cmap_from_h,
    cmap_from_json,
    cmap_from_pair,
    cmap_to_json,
    h_action,
    h_from_c,
    h_from_json,
    h_to_json,
    k_basis,
    k_matrix,
    trace_form,
)
from .sos import (
    Counterexample,
    NonnegReport,
    SosVerdict,
    counterexample_d6,
    nonneg_check,
    reconstruct_cmap,
    sos_check,
    sos_decompose,
    verify_certificate,
)
from .model import (
    AttainmentReport,
    BallModel,
    SphereModel,
    SphereQuadReport,
    ValidationReport,
    a_eval,
    boundary_attainment,
    drift_eval,
    model_from_json,
    model_to_json,
    sphere_max_quadratic,
    validate_ball,
    validate_sphere,
)
from .generator import (
    GeneratorMatrix,
    MonomialBasis,
    apply_generator,
    build_Gk,
    moment,
    monomial_basis,
    poly_degree,
    poly_from_json,
    poly_to_json,
)
from .simulate import (
    EnsembleResult,
    MCMoment,
    PathSample,
    SkewDrive,
    TwinPathReport,
    ball_ensemble,
    eval_poly,
    expm_skew,
    mc_moment,
    path_normals,
    scalar_ball_ensemble,
    simulate_ball,
    simulate_scalar_ball,
    simulate_sphere,
    sphere_ensemble,
    twin_path_experiment,
)
from .liealg import (
    DensityReport,
    LieSubspace,
    bracket,
    density_check_ball,
    density_check_sphere,
    g_ideal,
    lift_drive,
)

__version__ = "0.1.0"
