"""Spectral-regularised learning of linear operators between Hilbert spaces.

The library works with finite orthonormal-basis truncations: Hilbert-space
elements are coefficient vectors, operators are dense matrices.  It couples
a small linear-algebra core (tensor products, Schatten norms, spectral
calculus, pseudoinversion) with spectral regularisation strategies, the
regularised least squares operator estimator, synthetic models with
closed-form optima, and two applications (feature-lifted conditional-mean
regression and Hilbertian autoregression).  A benchmark CLI reproduces the
spectral identities, concentration coverage and convergence-rate behaviour
on seeded synthetic studies.
"""

from .applications import (
    ArhModel,
    FeatureLift,
    arh_fit,
    arh_forecast,
    arh_lag_covs,
    cme_fit,
    cme_predict,
    identity_lift,
    polynomial_lift,
    random_fourier_lift,
    simulate_arh,
)
from .estimate import (
    FitResult,
    SampleSet,
    alpha_schedule,
    excess_risk,
    fit,
    population_reg_solution,
    predict,
    weighted_error,
)
from .hilbert import (
    SpectralDecomp,
    apply_spectral_fn,
    eig_sym,
    empirical_cov,
    hs_inner,
    outer,
    pseudoinverse,
    schatten_norm,
)
from .precompose import (
    ExistenceReport,
    PrecomposeRep,
    douglas_check,
    precompose_adjoint_check,
    precompose_apply,
    precompose_oracle,
    solve_pseudo,
    source_condition_value,
)
from .properties import run_property_suite
from .regularize import (
    RegStrategy,
    g_eval,
    landweber,
    qualification_check,
    regularized_inverse,
    residual_eval,
    tikhonov,
    truncation,
    verify_strategy,
)
from .studies import (
    ConcentrationReport,
    RateReport,
    StudyConfig,
    run_concentration_study,
    run_demo,
    run_rate_study,
)
from .synthesize import (
    ModelOracle,
    SourceSpec,
    TailNormEstimate,
    estimate_tail_norms,
    make_covariance,
    make_linear_model,
    make_source_target,
    psi1_estimate,
    psi2_estimate,
    sample_linear_model,
    sample_misspecified,
)

__version__ = "0.1.0"
