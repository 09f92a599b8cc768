//! Wireless powered communication networks with cluster-based cooperation
//! and multi-antenna energy beamforming.
//!
//! A hybrid access point (HAP) with `M` antennas beams energy to `N`
//! single-antenna wireless devices (WDs). One device, the cluster head (CH),
//! relays the messages of every cluster member (CM) to the HAP, which also
//! overhears the intra-cluster transmissions. The crate computes the
//! max-min fair throughput of that protocol by solving its convex
//! reformulation with a self-contained barrier method, and compares it with
//! cooperation without beamforming and with independent harvest-then-transmit.
//!
//! Modules:
//! - [`network`]: geometry, path loss, Rayleigh channel draws, CH selection.
//! - [`rates`]: energy and rate formulas in both parameterizations.
//! - [`solver`]: barrier method for the proposed scheme and primal recovery.
//! - [`baselines`]: the two benchmark schemes.
//! - [`oracle`]: brute-force checks for small instances and the concavity lemma.
//! - [`harness`]: Monte Carlo sweeps and CSV output.
//! - [`verify`]: solver-versus-oracle and Hessian self-checks.

// `!(x > 0.0)` is used on purpose so NaN lands in the rejecting branch
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod error;
pub mod exec;
pub mod harness;
pub mod hermitian;
pub mod network;
pub mod oracle;
pub mod rates;
pub mod solver;
pub mod verify;

pub use baselines::{solve_independent, solve_no_eb, solve_scheme, SchemeId};
pub use error::{Error, Result};
pub use exec::Execution;
pub use network::{
    draw_channels, draw_channels_seeded, path_loss_gain, place_wds, select_ch, ChStrategy, ChannelRealization,
    NetworkInstance, PhyParams, Point, WpcnRng,
};
pub use rates::{evaluate, Allocation, ConvexVars, RateCoefficients, RateReport};
pub use solver::{
    kkt_residuals, recover_primal, solve_p3, KktResiduals, OperatingPoint, SolveReport, SolveStatus, SolverSettings,
};
