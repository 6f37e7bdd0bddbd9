//! Seeded event generation, binning into decay-time cells and
//! time-difference strips, and count-based correlation estimates.

mod binning;
mod estimate;
mod generate;

pub use binning::{bin_cells, bin_delta, BinnedCorrelation, CellGrid, DeltaHistogram};
pub use estimate::{estimate_correlation, CorrelationEstimate, FlavorCounts};
pub use generate::{generate_events, generate_lrt_events, generate_qm_events, BatchMeta, EventBatch, QmModel};

/// Default bin width in lifetimes (`0.1 / gamma`).
pub const DEFAULT_BIN_LIFETIMES: f64 = 0.1;
/// Default cell-grid extent and time-difference range in lifetimes (`10 / gamma`).
pub const DEFAULT_RANGE_LIFETIMES: f64 = 10.0;
