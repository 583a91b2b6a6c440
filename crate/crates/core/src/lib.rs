//! Lyapunov exponents of random matrix products: metrics on GL(d,ℝ) and on
//! measures, Monte-Carlo estimators, explicit regularity constants, large
//! deviations and one-dimensional random Schrödinger operators.

pub mod cocycle;
pub mod constants;
pub mod error;
pub mod family;
pub mod gl;
pub mod ldp;
pub mod measures;
pub mod rng;
pub mod schrodinger;

pub use error::{Error, Result};
pub use gl::{
    eccentricity, exterior_power, group_delta, log_norm_cocycle, operator_norm, projective_act,
    projective_metric, MetricConstants, ProjectivePoint, SquareMatrix,
};
pub use measures::{
    finite_support_upper_bound, hausdorff_distance, strong_irreducibility_check_d2,
    support_topology_distance, wasserstein_theta, FiniteMatrixMeasure, Irreducibility,
};
pub use cocycle::{
    chain_spectral_gap, estimate_asymptotic_variance, estimate_bottom_exponent,
    estimate_markov_exponents, estimate_partial_sum, estimate_top_exponent,
    finite_time_average, furstenberg_khasminskii_integral, individual_exponent,
    sample_stationary_measure, CocycleEstimate, CocycleRunConfig, EmpiricalProjectiveMeasure,
    InitialDirection, MarkovCocycle,
};
pub use family::TwoMatrixFamily;
pub use constants::{
    concentration_constants, holder_package_gl2, holder_package_gld, log_holder_package,
    markov_package, method_optimality_curve, subtop_package, ConstantsReport, LogHolderReport,
    Regime, SpectralInputs,
};
pub use ldp::{
    concentration_check, estimate_pressure, legendre_transform, ConcentrationReport, PressureConfig,
    PressureCurve, RateFunction,
};
pub use schrodinger::{
    ids_curve, ids_exponent, lyapunov_energy_curve, smoothed_ids, thouless_check, transfer_cocycle_measure,
    DisorderDistribution, IdsCurve, ThoulessReport,
};
