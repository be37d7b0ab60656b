//! Refined random-coding error bounds for discrete memoryless channels.
//!
//! The crate computes Gallager exponents, classifies channel/input pairs as
//! singular or nonsingular, evaluates the tilted measures behind the
//! pre-factor bounds, assembles those bounds as functions of the blocklength,
//! and provides exact and Monte-Carlo oracles for the ensemble-average error
//! probability.

pub mod bounds;
pub mod channel;
pub mod concentration;
pub mod ensemble;
pub mod error;
pub mod exponents;
pub mod io;
pub mod law;
pub mod simplex;
pub mod tilted;

pub use bounds::{
    below_critical_singular_bound, corollary_report, nonsingular_bound, singular_bound, BoundBranch, BoundConfig,
    BoundReport, CorollaryRegime, CorollaryReport, ErrorCriterion,
};
pub use channel::{
    classify_channel_at_rate, classify_pair, support_sets, Channel, InputDistribution, SingularityKind,
    SingularityVerdict, SupportSets,
};
pub use concentration::{
    exact_orthant_tail, exact_tail, exact_tails, scalar_tail_bound, vector_tail_bound, ScalarTailBound,
    VectorTailBound,
};
pub use ensemble::{
    brute_force, exact_ensemble_error, exact_ensemble_error_m, message_count, monte_carlo, pairwise_tail,
    slope_fit, slope_fit_points, EnsembleConfig, EnsembleResult, Method, SlopeFit,
};
pub use error::{Error, Result};
pub use exponents::{
    capacity, channel_rates, eo, eo_rho_derivative, er, er_q, esp, esp_q, rho_star, subdifferential_report,
    ChannelRates, ErResult, ExponentPoint, OptConfig, SpherePacking, SubdifferentialReport,
};
pub use law::{DiscreteLaw, DiscreteLaw2};
pub use tilted::{e_f, verify_identities, IdentityReport, TiltedFamily};
