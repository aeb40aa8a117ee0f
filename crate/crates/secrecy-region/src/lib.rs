//! Transmit covariance design and achievable secrecy rate regions for
//! multi-receiver Gaussian MIMO channels with an external eavesdropper.
//!
//! Capabilities:
//! - per-user secrecy rates under dirty-paper encoding orders
//! - broadcast/multiple-access covariance transformations that preserve
//!   rates and total transmit power
//! - weighted sum-rate maximization via bisection on the power price and
//!   block successive maximization over per-user covariances
//! - encoding-order selection and exhaustive order enumeration
//! - zero-forcing and eavesdropper-free baselines
//! - weight sweeps, convex closure, and region export (CSV/JSON)

#![warn(clippy::all)]

pub mod baselines;
pub mod channel;
pub mod cli;
pub mod duality;
pub mod error;
pub mod numerics;
pub mod ordering;
pub mod region;
pub mod solver;

pub use baselines::{bc_upper_bound, zf_project, zf_wsr, ProjectedChannelSet};
pub use channel::{
    ChannelSet, CovarianceSet, EncodingOrder, PowerConstraint, RateTuple, Side, WeightVector,
};
pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use numerics::{CMat, HermitianMatrix};
pub use ordering::{enumerate_orders, optimal_order, OrderEntry, OrderReport};
pub use region::{
    convex_closure, delta_family_sweep, sweep_weights, RegionHull, RegionSample, RegionSweep,
};
pub use solver::{solve_wsr, InitMode, SolverConfig, SolverResult};
