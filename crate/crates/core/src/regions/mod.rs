//! Parameter regions of the application families.

pub mod counterexample;
pub mod persistence;
pub mod rapid;
pub mod table;

pub use counterexample::{counterexample_fixed_points, FixedPoint, FixedPointKind};
pub use persistence::{
    delta_for, k_epsilon, k_objective, k_objective_infimum, kappa, persistence_thresholds, PersistenceConstants, Thresholds,
};
pub use rapid::{rapid_osc_condition, rapid_osc_max_order, PeriodicFn, RapidOscSpec, RAPID_SAMPLES};
pub use table::{beta_projection, best_auxiliary, q_membership, Membership, RegionInterval, TorusFamilyParams};
