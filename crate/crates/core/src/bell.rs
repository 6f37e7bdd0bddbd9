//! CHSH and R-factor combinations and the local-realistic bounds they are
//! compared against.
//!
//! For subensembles selected by the time difference alone, a restricted
//! local model only obeys the loosened bound
//!
//! ```text
//! R <= 2 + 4 int_0^{tau_max - tau_min} eta~(t; dt_bar) dt
//! ```
//!
//! where `tau_ij' = min(t_i, t_j')` and `dt_bar` is the larger time
//! difference among the pairs attaining `tau_max`. For the exponential
//! density this is `2 + 2 (1 - exp(-2 gamma (tau_max - tau_min)))`.

use std::cmp::Ordering;
use std::f64::consts::{FRAC_PI_4, PI, SQRT_2};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::model::{qm_correlation_delta, MesonParams, TimePair};
use crate::montecarlo::CorrelationEstimate;
use crate::quadrature::{integrate, QuadratureSpec};
use crate::rng::par_chunks;

/// Tsirelson's bound `2 sqrt(2)`, the largest quantum value of the combination.
pub const QM_MAX: f64 = 2.0 * SQRT_2;

/// Four measurement times `(t1, t1', t2, t2')` in seconds.
///
/// The combination uses the four differences `dt_ij' = |t_i - t_j'|` with a
/// minus sign on the `(2, 2')` term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeQuadruple {
    pub t1: f64,
    pub t1p: f64,
    pub t2: f64,
    pub t2p: f64,
}

/// One of the four `(i, j')` terms of the combination.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairTerm {
    pub i: u8,
    pub j: u8,
    pub sign: f64,
    pub delta_t: f64,
    pub tau: f64,
}

impl TimeQuadruple {
    pub fn new(t1: f64, t1p: f64, t2: f64, t2p: f64) -> Result<Self> {
        for t in [t1, t1p, t2, t2p] {
            if !(t.is_finite() && t >= 0.0) {
                return Err(domain(format!("measurement times must be finite and non-negative, got {t}")));
            }
        }
        Ok(Self { t1, t1p, t2, t2p })
    }

    /// Times given as phases `dm * t`.
    pub fn from_phases(params: &MesonParams, phases: [f64; 4]) -> Result<Self> {
        let [a, b, c, d] = phases.map(|p| p / params.delta_m);
        Self::new(a, b, c, d)
    }

    /// The one-parameter family `(theta, 2 theta, 3 theta, 0) / dm`.
    pub fn theta_family(params: &MesonParams, theta: f64) -> Result<Self> {
        Self::from_phases(params, [theta, 2.0 * theta, 3.0 * theta, 0.0])
    }

    /// The quantum optimum `(pi/4, pi/2, 3pi/4, 0) / dm`.
    pub fn qm_optimum(params: &MesonParams) -> Self {
        Self::theta_family(params, FRAC_PI_4).expect("positive delta_m gives valid times")
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.t1, self.t1p, self.t2, self.t2p]
    }

    /// Terms in the order `(1,1'), (1,2'), (2,1'), (2,2')`.
    pub fn terms(&self) -> [PairTerm; 4] {
        let term = |i: u8, j: u8, ti: f64, tj: f64, sign: f64| PairTerm {
            i,
            j,
            sign,
            delta_t: (ti - tj).abs(),
            tau: ti.min(tj),
        };
        [
            term(1, 1, self.t1, self.t1p, 1.0),
            term(1, 2, self.t1, self.t2p, 1.0),
            term(2, 1, self.t2, self.t1p, 1.0),
            term(2, 2, self.t2, self.t2p, -1.0),
        ]
    }

    pub fn delta_ts(&self) -> [f64; 4] {
        self.terms().map(|t| t.delta_t)
    }

    pub fn tau_min(&self) -> f64 {
        self.terms().iter().map(|t| t.tau).fold(f64::INFINITY, f64::min)
    }

    pub fn tau_max(&self) -> f64 {
        self.terms().iter().map(|t| t.tau).fold(f64::NEG_INFINITY, f64::max)
    }

    /// The largest time difference among the terms whose `tau` equals `tau_max`.
    pub fn dt_bar(&self) -> f64 {
        let tau_max = self.tau_max();
        self.terms()
            .iter()
            .filter(|t| t.tau == tau_max)
            .map(|t| t.delta_t)
            .fold(0.0, f64::max)
    }

    fn lex_cmp(&self, other: &Self) -> Ordering {
        self.as_array()
            .iter()
            .zip(other.as_array().iter())
            .map(|(a, b)| a.total_cmp(b))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    }
}

/// `|C(a, b) + C(a', b) + C(a', b') - C(a, b')|` for cell correlations.
pub fn chsh_cell<F: Fn(TimePair) -> f64>(corr: F, a: f64, ap: f64, b: f64, bp: f64) -> Result<f64> {
    let c = |l, r| TimePair::new(l, r).map(&corr);
    Ok((c(a, b)? + c(ap, b)? + c(ap, bp)? - c(a, bp)?).abs())
}

/// `R = |C(dt_11') + C(dt_12') + C(dt_21') - C(dt_22')|`.
pub fn r_factor<F: Fn(f64) -> f64>(corr_delta: F, q: &TimeQuadruple) -> f64 {
    q.terms().iter().map(|t| t.sign * corr_delta(t.delta_t)).sum::<f64>().abs()
}

/// `R` from four estimated correlations (in term order), with the standard
/// error of the signed sum.
pub fn r_factor_estimate(estimates: &[CorrelationEstimate; 4]) -> (f64, f64) {
    let signs = [1.0, 1.0, 1.0, -1.0];
    let value: f64 = estimates.iter().zip(signs).map(|(e, s)| s * e.value).sum();
    let var: f64 = estimates.iter().map(|e| e.stderr * e.stderr).sum();
    (value.abs(), var.sqrt())
}

/// Quantum `R` for the quadruple.
pub fn r_factor_qm(params: &MesonParams, q: &TimeQuadruple) -> f64 {
    r_factor(|dt| qm_correlation_delta(params, dt), q)
}

const MONOTONICITY_GRID: usize = 32;

/// Samples `eta_tilde` on a `32 x 32` grid over `[0, span]^2` and checks it
/// is non-increasing in both arguments. Heuristic: a sampled check.
fn check_monotone<F: Fn(f64, f64) -> f64>(eta_tilde: &F, span: f64) -> Result<()> {
    let step = span / (MONOTONICITY_GRID - 1) as f64;
    let at = |k: usize| k as f64 * step;
    for a in 0..MONOTONICITY_GRID {
        for b in 0..MONOTONICITY_GRID {
            let v = eta_tilde(at(a), at(b));
            if !v.is_finite() || v < 0.0 {
                return Err(Error::ModelAssumption(format!(
                    "eta_tilde({:e}, {:e}) = {v} is not a finite non-negative density",
                    at(a),
                    at(b)
                )));
            }
            let slack = 1e-12 * v.abs() + f64::MIN_POSITIVE;
            if a + 1 < MONOTONICITY_GRID && eta_tilde(at(a + 1), at(b)) > v + slack {
                return Err(Error::ModelAssumption(format!(
                    "eta_tilde increases in t near t = {:e}, dt = {:e}",
                    at(a),
                    at(b)
                )));
            }
            if b + 1 < MONOTONICITY_GRID && eta_tilde(at(a), at(b + 1)) > v + slack {
                return Err(Error::ModelAssumption(format!(
                    "eta_tilde increases in dt near t = {:e}, dt = {:e}",
                    at(a),
                    at(b)
                )));
            }
        }
    }
    Ok(())
}

/// Loosened local bound `2 + 4 int_0^{tau_max - tau_min} eta~(t; dt_bar) dt`
/// for an arbitrary strip density `eta_tilde(t, dt)`.
///
/// The bound rests on `eta_tilde` decreasing in both arguments; this is
/// checked by sampling over `[0, span]^2`, where `span` covers the
/// integration range and all four time differences.
pub fn lrt_bound<F: Fn(f64, f64) -> f64>(eta_tilde: F, q: &TimeQuadruple, spec: &QuadratureSpec) -> Result<f64> {
    let width = q.tau_max() - q.tau_min();
    let span = q.delta_ts().iter().copied().fold(width, f64::max);
    if span > 0.0 {
        check_monotone(&eta_tilde, span)?;
    }
    let dt_bar = q.dt_bar();
    let integral = integrate(|t| eta_tilde(t, dt_bar), 0.0, width, spec)?;
    Ok(2.0 + 4.0 * integral.value)
}

/// Closed form of [`lrt_bound`] for the exponential density,
/// `2 + 2 (1 - exp(-2 gamma (tau_max - tau_min)))`.
pub fn lrt_bound_exponential(params: &MesonParams, q: &TimeQuadruple) -> f64 {
    let width = q.tau_max() - q.tau_min();
    2.0 + 2.0 * (1.0 - (-2.0 * params.gamma * width).exp())
}

/// One row of the theta scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThetaRow {
    pub theta: f64,
    /// `|3 cos(theta) - cos(3 theta)|`.
    pub r_qm: f64,
    pub bound: f64,
}

/// Quantum `R` and the exponential bound along `(theta, 2 theta, 3 theta, 0) / dm`
/// on `steps` uniformly spaced points including both ends.
pub fn theta_scan(params: &MesonParams, theta_min: f64, theta_max: f64, steps: usize) -> Result<Vec<ThetaRow>> {
    if !(0.0 <= theta_min && theta_min < theta_max && theta_max <= PI) {
        return Err(domain(format!(
            "theta range must satisfy 0 <= min < max <= pi, got [{theta_min}, {theta_max}]"
        )));
    }
    if steps < 2 {
        return Err(domain(format!("theta scan needs at least 2 points, got {steps}")));
    }
    (0..steps)
        .map(|k| {
            let theta = theta_min + (theta_max - theta_min) * k as f64 / (steps - 1) as f64;
            let q = TimeQuadruple::theta_family(params, theta)?;
            Ok(ThetaRow {
                theta,
                r_qm: r_factor_qm(params, &q),
                bound: lrt_bound_exponential(params, &q),
            })
        })
        .collect()
}

/// Bisection for a root of `f` on `[lo, hi]`, which must bracket a sign change.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64> {
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::Numeric(format!("no sign change on [{lo}, {hi}]")));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Exponential bound at the quantum optimum as a function of `x = dm / gamma`:
/// `2 + 2 (1 - exp(-pi / x))`.
pub fn optimum_bound_for_ratio(x: f64) -> f64 {
    2.0 + 2.0 * (1.0 - (-PI / x).exp())
}

/// Smallest `x` for which `bound(x)` drops to the quantum maximum, by
/// bisection on `[1, 100]` to `1e-10`. `bound` must decrease in `x`.
pub fn x_threshold_for<F: Fn(f64) -> f64>(bound: F) -> Result<f64> {
    bisect(|x| bound(x) - QM_MAX, 1.0, 100.0, 1e-10)
}

/// The ratio `x = dm / gamma` above which the exponential bound at the
/// quantum optimum falls below `2 sqrt(2)`. Closed form
/// `pi / ln(1 / (2 - sqrt 2)) ~ 5.874`, usually quoted rounded to 5.9.
pub fn x_threshold() -> f64 {
    x_threshold_for(optimum_bound_for_ratio).expect("bound crosses 2 sqrt 2 inside [1, 100]")
}

/// Result of [`combination_search`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SearchResult {
    /// Largest `R_qm - bound` seen.
    pub max_margin: f64,
    pub argmax: TimeQuadruple,
    pub r_qm: f64,
    pub bound: f64,
    pub samples: usize,
}

/// Samples `n_samples` quadruples uniformly from `t_range^4` and keeps the
/// one maximizing `R_qm - bound_exponential`. Ties go to the
/// lexicographically smaller quadruple; the result depends only on the seed.
pub fn combination_search(
    params: &MesonParams,
    n_samples: usize,
    seed: u64,
    t_range: (f64, f64),
) -> Result<SearchResult> {
    if n_samples == 0 {
        return Err(domain("combination search needs at least one sample"));
    }
    let (lo, hi) = t_range;
    if !(lo >= 0.0 && hi > lo && hi.is_finite()) {
        return Err(domain(format!("invalid time range [{lo}, {hi}]")));
    }
    let better = |a: &SearchResult, b: &SearchResult| match a.max_margin.total_cmp(&b.max_margin) {
        Ordering::Equal => a.argmax.lex_cmp(&b.argmax) == Ordering::Less,
        o => o == Ordering::Greater,
    };
    let partial = par_chunks(n_samples, seed, |chunk, rng| {
        let mut best: Option<SearchResult> = None;
        for _ in 0..chunk.len {
            let mut draw = || lo + (hi - lo) * rng.random::<f64>();
            let q = TimeQuadruple {
                t1: draw(),
                t1p: draw(),
                t2: draw(),
                t2p: draw(),
            };
            let r_qm = r_factor_qm(params, &q);
            let bound = lrt_bound_exponential(params, &q);
            let cand = SearchResult {
                max_margin: r_qm - bound,
                argmax: q,
                r_qm,
                bound,
                samples: 0,
            };
            if best.as_ref().is_none_or(|b| better(&cand, b)) {
                best = Some(cand);
            }
        }
        best
    });
    let mut best = partial
        .into_iter()
        .flatten()
        .reduce(|a, b| if better(&b, &a) { b } else { a })
        .expect("at least one sample");
    best.samples = n_samples;
    Ok(best)
}

/// Bound `2p + 4(1 - p)` for a mixture with space-like fraction `p`.
pub fn mixed_bound(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(domain(format!("space-like fraction must lie in [0, 1], got {p}")));
    }
    Ok(4.0 - 2.0 * p)
}

/// Space-like fraction above which [`mixed_bound`] drops below `2 sqrt 2`:
/// `sqrt 2 (sqrt 2 - 1) = 2 - sqrt 2 ~ 0.5858`.
pub fn p_threshold() -> f64 {
    2.0 - SQRT_2
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    ViolatesLrt,
    ConsistentWithLrt,
}

/// Comparison of an observed or predicted `R` with the loosened bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BellReport {
    pub r_value: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub r_stderr: Option<f64>,
    pub lrt_bound: f64,
    pub qm_max: f64,
    pub margin: f64,
    pub verdict: Verdict,
}

impl BellReport {
    pub fn new(r_value: f64, lrt_bound: f64) -> Self {
        let margin = r_value - lrt_bound;
        Self {
            r_value,
            r_stderr: None,
            lrt_bound,
            qm_max: QM_MAX,
            margin,
            verdict: if margin > 0.0 {
                Verdict::ViolatesLrt
            } else {
                Verdict::ConsistentWithLrt
            },
        }
    }

    pub fn with_stderr(mut self, stderr: f64) -> Self {
        self.r_stderr = Some(stderr);
        self
    }
}

/// Analytic report: quantum `R` against the exponential bound.
pub fn analytic_report(params: &MesonParams, q: &TimeQuadruple) -> BellReport {
    BellReport::new(r_factor_qm(params, q), lrt_bound_exponential(params, q))
}
