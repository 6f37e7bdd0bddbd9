//! Simulation and analysis toolkit for Bell-type tests with entangled
//! neutral-meson pairs.
//!
//! Decay times of the two mesons take the role that analyzer angles play in
//! photon experiments. The crate provides
//!
//! * [`model`]: meson constants, the quantum correlation `-cos(dm * (t_l - t_r))`,
//!   joint decay-rate densities and the exponential temporal density family;
//! * [`lrt`]: restricted local-realistic models (temporally homogeneous, with
//!   outcomes that only see their own decay time), correlation evaluators and
//!   diagnostics;
//! * [`montecarlo`]: seeded event generation, cell and time-difference binning
//!   and count-based correlation estimates;
//! * [`bell`]: CHSH and R-factor combinations, the loosened local bound for
//!   time-difference subensembles, threshold solvers and the random
//!   combination search;
//! * [`kinematics`]: relativistic decay-vertex sampling and the fraction of
//!   space-like separated decay pairs;
//! * [`io`] and [`cli`]: stable CSV/JSON formats and the command-line surface.
//!
//! Units: times are in seconds and rates in 1/seconds throughout. Only the
//! dimensionless products `delta_m * t` and `gamma * t` enter any formula, so
//! natural units (for example `gamma = 1`) work equally well as long as they
//! are used consistently.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bell;
pub mod cli;
pub mod density;
pub mod error;
pub mod io;
pub mod kinematics;
pub mod lrt;
pub mod model;
pub mod montecarlo;
pub mod quadrature;
pub mod rng;

pub use error::{Error, Result};
pub use model::{DecayRecord, Flavor, MesonParams, TimePair};
