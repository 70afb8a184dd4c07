//! Transient occupancy of an autonomous linear birth-death queueing system
//! and of the M(t)/M/inf queue whose Poisson input is matched to it in mean.
//!
//! * [`model`]: means, matched intensity, characteristic functions and the
//!   exact binomial-Poisson pmf of the matched system.
//! * [`inversion`]: lattice pmf recovery from a characteristic function.
//! * [`ode`]: truncated Kolmogorov forward equations (an independent oracle).
//! * [`sim`]: seeded event-driven Monte Carlo (a second oracle).
//! * [`metrics`]: Kolmogorov distance, the admissibility verdict and the
//!   `(b, t)` distance table.

// `!(x > 0.0)` guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod inversion;
pub mod metrics;
pub mod model;
pub mod ode;
pub mod pmf;
pub mod quadrature;
pub mod sim;

pub use error::{Error, Result};
pub use inversion::{choose_truncation, invert_cf, InversionConfig};
pub use metrics::{
    approximation_verdict, build_distance_table, distance_cell, kolmogorov_distance, CellResult,
    DistanceTable, SystemBase, Verdict,
};
pub use model::{
    analytic_pmf_poisson, cf_autonomous, cf_poisson_general, cf_poisson_matched, matched_intensity,
    mean_occupancy, AutonomousCf, CfEvaluator, ModelParams, PoissonMatchedCf,
};
pub use num_complex::Complex64 as Complex;
pub use ode::{solve_autonomous, solve_mtminf, OdeConfig};
pub use pmf::Pmf;
pub use sim::{simulate_autonomous, simulate_mtminf, SimConfig, SimResult};

/// Default target for mass lost to truncation or aliasing.
pub const DEFAULT_TAIL_TOL: f64 = 1e-10;
