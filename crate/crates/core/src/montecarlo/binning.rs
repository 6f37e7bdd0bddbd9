use log::warn;
use serde::Serialize;

use super::estimate::{CorrelationEstimate, FlavorCounts};
use crate::error::{domain, Error, Result};
use crate::model::DecayRecord;

fn check_width(bin_width: f64, extent: f64) -> Result<usize> {
    if !(bin_width > 0.0 && bin_width.is_finite()) {
        return Err(domain(format!("bin width must be positive, got {bin_width}")));
    }
    if !(extent > 0.0 && extent.is_finite()) {
        return Err(domain(format!("binning range must be positive, got {extent}")));
    }
    Ok((extent / bin_width).ceil() as usize)
}

fn bin_index(t: f64, bin_width: f64, bins: usize) -> Option<usize> {
    let k = (t / bin_width).floor();
    if k < bins as f64 {
        Some(k as usize)
    } else {
        None
    }
}

/// Counts per decay-time cell `[a dt, (a+1) dt) x [b dt, (b+1) dt)`.
///
/// The grid covers `ceil(t_max / dt)` cells per axis; records beyond it go
/// to the overflow tally.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellGrid {
    bin_width: f64,
    t_max: f64,
    cells: usize,
    counts: Vec<FlavorCounts>,
    overflow: u64,
}

impl CellGrid {
    pub fn new(bin_width: f64, t_max: f64) -> Result<Self> {
        let cells = check_width(bin_width, t_max)?;
        Ok(Self {
            bin_width,
            t_max,
            cells,
            counts: vec![FlavorCounts::default(); cells * cells],
            overflow: 0,
        })
    }

    pub fn push(&mut self, record: &DecayRecord) {
        match (
            bin_index(record.times.t_l, self.bin_width, self.cells),
            bin_index(record.times.t_r, self.bin_width, self.cells),
        ) {
            (Some(a), Some(b)) => self.counts[a * self.cells + b].add(record.flavor_l, record.flavor_r),
            _ => self.overflow += 1,
        }
    }

    pub fn bin_width(&self) -> f64 {
        self.bin_width
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn cells_per_axis(&self) -> usize {
        self.cells
    }

    /// Counts in cell `(left, right)`.
    pub fn cell(&self, left: usize, right: usize) -> &FlavorCounts {
        &self.counts[left * self.cells + right]
    }

    pub fn overflow(&self) -> u64 {
        self.overflow
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().map(FlavorCounts::total).sum::<u64>()
    }

    /// Adds another grid with the same geometry.
    pub fn merge(&mut self, other: &CellGrid) -> Result<()> {
        if self.bin_width != other.bin_width || self.cells != other.cells {
            return Err(domain("cannot merge cell grids with different geometry"));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            a.merge(b);
        }
        self.overflow += other.overflow;
        Ok(())
    }
}

/// Bins records into decay-time cells with `floor(t / dt)` indexing.
pub fn bin_cells(records: &[DecayRecord], bin_width: f64, t_max: f64) -> Result<CellGrid> {
    let mut grid = CellGrid::new(bin_width, t_max)?;
    for r in records {
        grid.push(r);
    }
    if grid.overflow > 0 {
        warn!("{} of {} records fell outside the cell grid", grid.overflow, records.len());
    }
    Ok(grid)
}

/// One occupied time-difference bin with its correlation estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BinnedCorrelation {
    pub index: usize,
    pub dt_center: f64,
    pub estimate: CorrelationEstimate,
}

/// Counts per time-difference bin `|t_l - t_r| in [k dt, (k+1) dt)`.
/// Both strips (`t_l > t_r` and `t_l < t_r`) share a bin.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaHistogram {
    bin_width: f64,
    dt_max: f64,
    counts: Vec<FlavorCounts>,
    overflow: u64,
}

impl DeltaHistogram {
    pub fn new(bin_width: f64, dt_max: f64) -> Result<Self> {
        let bins = check_width(bin_width, dt_max)?;
        Ok(Self {
            bin_width,
            dt_max,
            counts: vec![FlavorCounts::default(); bins],
            overflow: 0,
        })
    }

    pub fn push(&mut self, record: &DecayRecord) {
        match self.bin_of(record.times.delta_t()) {
            Some(k) => self.counts[k].add(record.flavor_l, record.flavor_r),
            None => self.overflow += 1,
        }
    }

    pub fn bin_width(&self) -> f64 {
        self.bin_width
    }

    pub fn dt_max(&self) -> f64 {
        self.dt_max
    }

    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn bin(&self, k: usize) -> &FlavorCounts {
        &self.counts[k]
    }

    pub fn bin_of(&self, delta_t: f64) -> Option<usize> {
        if delta_t < 0.0 {
            return None;
        }
        bin_index(delta_t, self.bin_width, self.counts.len())
    }

    /// Reporting position of bin `k`, `(k + 1/2) dt`.
    pub fn bin_center(&self, k: usize) -> f64 {
        (k as f64 + 0.5) * self.bin_width
    }

    pub fn overflow(&self) -> u64 {
        self.overflow
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().map(FlavorCounts::total).sum::<u64>()
    }

    /// Estimate in the bin containing `delta_t`.
    pub fn correlation_at(&self, delta_t: f64) -> Result<CorrelationEstimate> {
        let k = self
            .bin_of(delta_t)
            .ok_or_else(|| Error::EmptySubensemble(format!("dt = {delta_t:e} s lies outside the histogram")))?;
        self.counts[k]
            .estimate()
            .map_err(|_| Error::EmptySubensemble(format!("no events in the bin containing dt = {delta_t:e} s")))
    }

    /// Estimates for every occupied bin, in bin order.
    pub fn correlations(&self) -> Vec<BinnedCorrelation> {
        self.counts
            .iter()
            .enumerate()
            .filter_map(|(k, c)| {
                c.estimate().ok().map(|estimate| BinnedCorrelation {
                    index: k,
                    dt_center: self.bin_center(k),
                    estimate,
                })
            })
            .collect()
    }

    pub fn merge(&mut self, other: &DeltaHistogram) -> Result<()> {
        if self.bin_width != other.bin_width || self.counts.len() != other.counts.len() {
            return Err(domain("cannot merge histograms with different geometry"));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            a.merge(b);
        }
        self.overflow += other.overflow;
        Ok(())
    }
}

/// Bins records by `|t_l - t_r|` with `floor(dt / bin_width)` indexing.
pub fn bin_delta(records: &[DecayRecord], bin_width: f64, dt_max: f64) -> Result<DeltaHistogram> {
    let mut hist = DeltaHistogram::new(bin_width, dt_max)?;
    for r in records {
        hist.push(r);
    }
    if hist.overflow > 0 {
        warn!("{} of {} records fell beyond the time-difference range", hist.overflow, records.len());
    }
    Ok(hist)
}
