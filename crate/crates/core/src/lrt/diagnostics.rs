//! Diagnostics for the restrictions a model is supposed to satisfy.

use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use super::OutcomeModel;
use crate::density::TemporalDensity;
use crate::error::{domain, Error, Result};
use crate::model::{DecayRecord, MesonParams, TimePair};
use crate::montecarlo::{bin_cells, generate_events, CellGrid};

/// Outcome of [`check_marginal_factorization`].
#[derive(Debug, Clone, PartialEq)]
pub struct FactorizationReport {
    pub holds: bool,
    /// Largest deviation of `eta` from its best separable approximation on
    /// the grid, relative to the largest grid value.
    pub max_deviation: f64,
    /// Largest deviation of `eta` from the product of the density's declared
    /// marginals, when it declares any.
    pub marginal_deviation: Option<f64>,
}

/// Checks whether `eta(t_l, t_r) = eta_l(t_l) eta_r(t_r)` on the grid
/// `points x points`.
///
/// The separable approximation is `row_sum(i) col_sum(j) / total`, which
/// reproduces any product density exactly. When the density also declares
/// marginals, the product of those is compared as well. Per-particle
/// probabilities `P_i = eta_l Theta_i` then sum to `eta_l` because the
/// flavor indicators partition unity, so no separate check is needed.
pub fn check_marginal_factorization(
    density: &dyn TemporalDensity,
    points: &[f64],
    tolerance: f64,
) -> Result<FactorizationReport> {
    if points.is_empty() {
        return Err(domain("factorization grid is empty"));
    }
    if let Some(bad) = points.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
        return Err(domain(format!("factorization grid contains invalid time {bad}")));
    }
    let n = points.len();
    let mut grid = vec![0.0; n * n];
    for (i, &tl) in points.iter().enumerate() {
        for (j, &tr) in points.iter().enumerate() {
            grid[i * n + j] = density.eval(TimePair::new_unchecked(tl, tr));
        }
    }
    let peak = grid.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak == 0.0 {
        return Ok(FactorizationReport {
            holds: true,
            max_deviation: 0.0,
            marginal_deviation: None,
        });
    }
    let rows: Vec<f64> = (0..n).map(|i| grid[i * n..(i + 1) * n].iter().sum()).collect();
    let cols: Vec<f64> = (0..n).map(|j| (0..n).map(|i| grid[i * n + j]).sum()).collect();
    let total: f64 = rows.iter().sum();
    let mut max_deviation = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let separable = rows[i] * cols[j] / total;
            max_deviation = max_deviation.max((grid[i * n + j] - separable).abs() / peak);
        }
    }
    let mut marginal_deviation = None;
    for (i, &tl) in points.iter().enumerate() {
        for (j, &tr) in points.iter().enumerate() {
            if let Some((ml, mr)) = density.marginals(TimePair::new_unchecked(tl, tr)) {
                let d = (grid[i * n + j] - ml * mr).abs() / peak;
                marginal_deviation = Some(marginal_deviation.unwrap_or(0.0f64).max(d));
            }
        }
    }
    let holds = max_deviation < tolerance && marginal_deviation.is_none_or(|d| d < tolerance);
    Ok(FactorizationReport {
        holds,
        max_deviation,
        marginal_deviation,
    })
}

/// Cell layout and thresholds for [`check_homogeneity`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomogeneitySpec {
    /// Cell width in seconds.
    pub bin_width: f64,
    pub cells_per_axis: usize,
    pub min_occupancy: u64,
    /// Confidence level of both tests, e.g. 0.99.
    pub level: f64,
}

impl HomogeneitySpec {
    /// Six cells of width `0.4 / gamma` per axis, at least 50 events per
    /// cell, 99% level.
    pub fn for_params(params: &MesonParams) -> Self {
        Self {
            bin_width: 0.4 / params.gamma,
            cells_per_axis: 6,
            min_occupancy: 50,
            level: 0.99,
        }
    }
}

/// Outcome of [`check_homogeneity`].
#[derive(Debug, Clone, PartialEq)]
pub struct HomogeneityReport {
    pub consistent: bool,
    /// Chi-square statistic of single-side flavor frequencies against the
    /// pooled frequency of the same row (left) or column (right).
    pub statistic: f64,
    pub dof: usize,
    pub chi2_critical: f64,
    /// Largest standardized excess `(|S| - 2) / se(S)` over all CHSH
    /// combinations of cell correlations.
    pub max_chsh_z: f64,
    /// One-sided normal critical value after Bonferroni correction.
    pub chsh_critical: f64,
    /// `(row, row', col, col')` attaining `max_chsh_z`.
    pub worst_rectangle: Option<Rectangle>,
    pub n_cells: usize,
}

/// Statistical test of consequences of temporal homogeneity and decay-time
/// independence on observed events.
///
/// Under both restrictions the events in cell `(a, b)` are distributed as
/// `(A(lambda, t_a), B(lambda, t_b))` with one common `rho(lambda)`, so
///
/// 1. the left flavor frequency in a cell depends only on the left time:
///    each cell is compared against its row-pooled frequency (and likewise
///    for the right flavor and columns) with a chi-square statistic;
/// 2. cell correlations admit a joint hidden-variable description, so every
///    CHSH combination over two rows and two columns stays within 2, up to
///    statistical error. This uses per-cell correlations; comparing them
///    with a single pooled value is not a valid test, since a restricted
///    model's correlation legitimately varies from cell to cell.
///
/// The restrictions are about all `lambda`, so this is a necessary-condition
/// check and cannot prove them. Events outside the grid are ignored.
pub fn check_homogeneity(events: &[DecayRecord], spec: &HomogeneitySpec) -> Result<HomogeneityReport> {
    if !(spec.bin_width > 0.0) || spec.cells_per_axis == 0 {
        return Err(domain("homogeneity grid needs positive width and at least one cell"));
    }
    if !(spec.level > 0.0 && spec.level < 1.0) {
        return Err(domain(format!("confidence level must lie in (0, 1), got {}", spec.level)));
    }
    let k = spec.cells_per_axis;
    let grid = bin_cells(events, spec.bin_width, spec.bin_width * k as f64)?;
    let k = grid.cells_per_axis().min(k);
    let offending: Vec<String> = (0..k)
        .flat_map(|a| (0..k).map(move |b| (a, b)))
        .filter(|&(a, b)| grid.cell(a, b).total() < spec.min_occupancy)
        .map(|(a, b)| format!("cell ({a}, {b}) holds {}", grid.cell(a, b).total()))
        .collect();
    if !offending.is_empty() {
        return Err(Error::InsufficientData {
            what: format!("homogeneity grid (min occupancy {})", spec.min_occupancy),
            offending,
        });
    }

    let (statistic, dof) = marginal_chi_square(&grid, k);
    let chi2_critical = if dof > 0 {
        ChiSquared::new(dof as f64)
            .map_err(|e| Error::Numeric(e.to_string()))?
            .inverse_cdf(spec.level)
    } else {
        f64::INFINITY
    };

    let (max_chsh_z, worst_rectangle, tested) = chsh_scan(&grid, k)?;
    let chsh_critical = if tested > 0 {
        let tail = (1.0 - spec.level) / tested as f64;
        Normal::standard().inverse_cdf(1.0 - tail)
    } else {
        f64::INFINITY
    };

    Ok(HomogeneityReport {
        consistent: statistic <= chi2_critical && max_chsh_z <= chsh_critical,
        statistic,
        dof,
        chi2_critical,
        max_chsh_z,
        chsh_critical,
        worst_rectangle,
        n_cells: k * k,
    })
}

/// Generates `n_events` from `model` and runs [`check_homogeneity`].
pub fn check_model_homogeneity<M: OutcomeModel + ?Sized>(
    model: &M,
    params: &MesonParams,
    n_events: usize,
    seed: u64,
    spec: &HomogeneitySpec,
) -> Result<HomogeneityReport> {
    let batch = generate_events(model, params, n_events, seed)?;
    check_homogeneity(&batch.records, spec)
}

fn proportion_term(hits: u64, n: u64, pooled: f64) -> f64 {
    let var = pooled * (1.0 - pooled);
    let p = hits as f64 / n as f64;
    if var > 0.0 {
        n as f64 * (p - pooled).powi(2) / var
    } else if (p - pooled).abs() > 0.0 {
        f64::INFINITY
    } else {
        0.0
    }
}

fn marginal_chi_square(grid: &CellGrid, k: usize) -> (f64, usize) {
    let mut stat = 0.0;
    let mut dof = 0;
    for line in 0..k {
        // left flavor along row `line`, right flavor along column `line`
        for left in [true, false] {
            let cell = |m: usize| if left { grid.cell(line, m) } else { grid.cell(m, line) };
            let plus = |m: usize| if left { cell(m).left_plus() } else { cell(m).right_plus() };
            let hits: u64 = (0..k).map(plus).sum();
            let n: u64 = (0..k).map(|m| cell(m).total()).sum();
            let pooled = hits as f64 / n as f64;
            for m in 0..k {
                stat += proportion_term(plus(m), cell(m).total(), pooled);
            }
            dof += k - 1;
        }
    }
    (stat, dof)
}

/// `(row, row', col, col')` of a CHSH combination of cells.
type Rectangle = (usize, usize, usize, usize);

fn chsh_scan(grid: &CellGrid, k: usize) -> Result<(f64, Option<Rectangle>, usize)> {
    let mut corr = vec![(0.0, 0.0); k * k];
    for a in 0..k {
        for b in 0..k {
            let e = grid.cell(a, b).estimate()?;
            corr[a * k + b] = (e.value, e.stderr * e.stderr);
        }
    }
    let mut best = f64::NEG_INFINITY;
    let mut worst = None;
    let mut tested = 0;
    for a in 0..k {
        for a2 in a + 1..k {
            for b in 0..k {
                for b2 in b + 1..k {
                    let cells = [(a, b), (a, b2), (a2, b), (a2, b2)];
                    let values: Vec<(f64, f64)> = cells.iter().map(|&(r, c)| corr[r * k + c]).collect();
                    let sum: f64 = values.iter().map(|v| v.0).sum();
                    let var: f64 = values.iter().map(|v| v.1).sum();
                    let se = var.sqrt();
                    for minus in &values {
                        tested += 1;
                        let s = (sum - 2.0 * minus.0).abs();
                        let excess = s - 2.0;
                        let z = if se > 0.0 {
                            excess / se
                        } else if excess > 1e-12 {
                            f64::INFINITY
                        } else {
                            0.0
                        };
                        if z > best {
                            best = z;
                            worst = Some((a, a2, b, b2));
                        }
                    }
                }
            }
        }
    }
    if tested == 0 {
        best = 0.0;
    }
    Ok((best, worst, tested))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{BoxDensity, ExponentialDensity, FnDensity};

    fn grid_points(scale: f64) -> Vec<f64> {
        (0..20).map(|k| k as f64 * 0.25 * scale).collect()
    }

    #[test]
    fn exponential_density_factorizes() {
        let p = MesonParams::b_meson();
        let d = ExponentialDensity::from_params(&p);
        let r = check_marginal_factorization(&d, &grid_points(1.0 / p.gamma), 1e-9).unwrap();
        assert!(r.holds);
        assert!(r.max_deviation < 1e-12);
        assert!(r.marginal_deviation.unwrap() < 1e-12);
    }

    #[test]
    fn modulated_density_does_not_factorize() {
        let f = |t: TimePair| (-(t.t_l + t.t_r)).exp() * (1.0 + (t.t_l - t.t_r).cos()) / 2.0;
        let d = FnDensity::new(f, 1.0);
        let pts = grid_points(1.0);
        let r = check_marginal_factorization(&d, &pts, 1e-9).unwrap();
        assert!(!r.holds);
        // ratio oracle: a product density has f(a,b) f(c,d) = f(a,d) f(c,b)
        let (a, b, c, e) = (0.0, 1.0, 1.5, 0.25);
        let ev = |x, y| f(TimePair::new(x, y).unwrap());
        assert!((ev(a, b) * ev(c, e) - ev(a, e) * ev(c, b)).abs() > 1e-3);
    }

    #[test]
    fn box_density_factorizes() {
        let d = BoxDensity::new(3.0).unwrap();
        let pts: Vec<f64> = (0..10).map(|k| k as f64 * 0.3).collect();
        assert!(check_marginal_factorization(&d, &pts, 1e-12).unwrap().holds);
    }

    #[test]
    fn negative_grid_rejected() {
        let d = ExponentialDensity::new(1.0).unwrap();
        assert!(check_marginal_factorization(&d, &[0.0, -1.0], 1e-9).is_err());
    }

    #[test]
    fn single_cell_is_trivially_consistent() {
        let p = MesonParams::new("unit", 1.0, 1.0).unwrap();
        let m = crate::lrt::UnrestrictedDemoModel::new(p.clone());
        let spec = HomogeneitySpec {
            bin_width: 2.0,
            cells_per_axis: 1,
            min_occupancy: 10,
            level: 0.99,
        };
        let r = check_model_homogeneity(&m, &p, 2000, 1, &spec).unwrap();
        assert!(r.consistent);
        assert_eq!(r.dof, 0);
        assert_eq!(r.n_cells, 1);
    }

    #[test]
    fn sparse_cells_are_reported() {
        let p = MesonParams::new("unit", 1.0, 1.0).unwrap();
        let m = crate::lrt::OscillatingSign::new(&p);
        let spec = HomogeneitySpec::for_params(&p);
        match check_model_homogeneity(&m, &p, 500, 1, &spec) {
            Err(Error::InsufficientData { offending, .. }) => assert!(!offending.is_empty()),
            other => panic!("expected insufficient data, got {other:?}"),
        }
    }
}
