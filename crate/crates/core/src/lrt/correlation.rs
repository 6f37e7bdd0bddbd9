use rand::RngCore;

use super::{HiddenVar, OutcomeModel};
use crate::error::{domain, Error, Result};
use crate::model::{Flavor, TimePair};
use crate::montecarlo::CorrelationEstimate;
use crate::quadrature::gauss_legendre_composite;

/// Fixed-rule quadrature along a time-difference strip.
///
/// The lambda-averaged integrand is piecewise constant, so the rule is a
/// composite Gauss-Legendre scheme whose panel count doubles until the
/// correlation changes by less than `tolerance` (absolute; correlations lie
/// in `[-1, 1]`), failing once `max_nodes` would be exceeded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StripQuadrature {
    /// Upper integration limit in seconds.
    pub cutoff: f64,
    pub max_nodes: usize,
    pub tolerance: f64,
}

impl StripQuadrature {
    /// `cutoff = 50 / gamma`, up to 2^16 nodes, tolerance 1e-3.
    pub fn for_gamma(gamma: f64) -> Self {
        Self {
            cutoff: 50.0 / gamma,
            max_nodes: 1 << 16,
            tolerance: 1e-3,
        }
    }
}

fn draw_many<M: OutcomeModel + ?Sized>(model: &M, n: usize, rng: &mut dyn RngCore) -> Vec<HiddenVar> {
    (0..n).map(|_| model.draw_hidden(rng)).collect()
}

fn check_draws(n_lambda: usize) -> Result<()> {
    if n_lambda == 0 {
        return Err(domain("at least one hidden-variable draw is required"));
    }
    Ok(())
}

/// Monte Carlo estimate of `int rho(lambda) A(lambda, t_l) B(lambda, t_r)`.
pub fn lrt_correlation_cell<M: OutcomeModel + ?Sized>(
    model: &M,
    times: TimePair,
    n_lambda: usize,
    rng: &mut dyn RngCore,
) -> Result<CorrelationEstimate> {
    check_draws(n_lambda)?;
    let mut sum = 0i64;
    for _ in 0..n_lambda {
        let lambda = model.draw_hidden(rng);
        let (a, b) = model.outcomes(&lambda, times);
        sum += i64::from(a.sign() * b.sign());
    }
    Ok(CorrelationEstimate::from_mean(sum as f64 / n_lambda as f64, n_lambda as u64))
}

/// Correlation over the subensemble of fixed time difference `delta_t`,
///
/// ```text
/// C(dt) = (1 / N(dt)) int dlambda rho int_0^inf dt' { eta(t' + dt, t') A(t' + dt) B(t')
///                                                    + eta(t', t' + dt) A(t') B(t' + dt) }
/// ```
///
/// The lambda integral is a Monte Carlo average over `n_lambda` draws shared
/// by every quadrature node; `N(dt)` is integrated with the same rule so a
/// constant integrand yields exactly `+-1`.
pub fn lrt_correlation_delta<M: OutcomeModel + ?Sized>(
    model: &M,
    delta_t: f64,
    n_lambda: usize,
    quad: &StripQuadrature,
    rng: &mut dyn RngCore,
) -> Result<CorrelationEstimate> {
    check_draws(n_lambda)?;
    if !(delta_t >= 0.0) {
        return Err(domain(format!("time difference must be non-negative, got {delta_t}")));
    }
    if !(quad.cutoff > 0.0) || quad.max_nodes < 8 {
        return Err(domain("strip quadrature needs a positive cutoff and at least 8 nodes"));
    }
    let draws = draw_many(model, n_lambda, rng);
    let density = model.density();
    let mean_product = |times: TimePair| -> f64 {
        let s: i64 = draws
            .iter()
            .map(|l| {
                let (a, b) = model.outcomes(l, times);
                i64::from(a.sign() * b.sign())
            })
            .sum();
        s as f64 / n_lambda as f64
    };
    let evaluate = |panels: usize| -> Result<f64> {
        let mut norm = 0.0;
        let num = gauss_legendre_composite(
            |t| {
                let left_later = TimePair::new_unchecked(t + delta_t, t);
                let right_later = TimePair::new_unchecked(t, t + delta_t);
                let w1 = density.eval(left_later);
                let w2 = density.eval(right_later);
                let mut v = 0.0;
                if w1 > 0.0 {
                    v += w1 * mean_product(left_later);
                }
                if w2 > 0.0 {
                    v += w2 * mean_product(right_later);
                }
                v
            },
            0.0,
            quad.cutoff,
            panels,
        );
        norm += gauss_legendre_composite(
            |t| {
                density.eval(TimePair::new_unchecked(t + delta_t, t))
                    + density.eval(TimePair::new_unchecked(t, t + delta_t))
            },
            0.0,
            quad.cutoff,
            panels,
        );
        if norm <= 0.0 {
            return Err(Error::EmptySubensemble(format!("strip at dt = {delta_t} carries no mass")));
        }
        Ok(num / norm)
    };
    let mut panels = 16;
    let mut previous = evaluate(panels)?;
    loop {
        if 8 * panels > quad.max_nodes {
            return Err(Error::Numeric(format!(
                "strip quadrature at dt = {delta_t} did not settle within {} nodes",
                quad.max_nodes
            )));
        }
        panels *= 2;
        let current = evaluate(panels)?;
        if (current - previous).abs() <= quad.tolerance {
            return Ok(CorrelationEstimate::from_mean(current.clamp(-1.0, 1.0), n_lambda as u64));
        }
        previous = current;
    }
}

/// Joint probability densities `P_ij(t_l, t_r) = eta(t_l, t_r) int rho Theta_i^A Theta_j^B`
/// for all four flavor pairs from one set of draws, indexed by [`Flavor::index`].
///
/// The indicator functions partition unity, so the four entries sum to
/// `eta(t_l, t_r)` for every draw count.
pub fn lrt_joint_probabilities<M: OutcomeModel + ?Sized>(
    model: &M,
    times: TimePair,
    n_lambda: usize,
    rng: &mut dyn RngCore,
) -> Result<[[f64; 2]; 2]> {
    check_draws(n_lambda)?;
    let mut hits = [[0u64; 2]; 2];
    for _ in 0..n_lambda {
        let lambda = model.draw_hidden(rng);
        let (a, b) = model.outcomes(&lambda, times);
        hits[a.index()][b.index()] += 1;
    }
    let eta = model.density().eval(times);
    let n = n_lambda as f64;
    Ok(hits.map(|row| row.map(|h| eta * h as f64 / n)))
}

/// A single entry of [`lrt_joint_probabilities`].
pub fn lrt_joint_probability<M: OutcomeModel + ?Sized>(
    model: &M,
    i: Flavor,
    j: Flavor,
    times: TimePair,
    n_lambda: usize,
    rng: &mut dyn RngCore,
) -> Result<f64> {
    Ok(lrt_joint_probabilities(model, times, n_lambda, rng)?[i.index()][j.index()])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lrt::{ConstantAnticorrelated, OscillatingSign, UnrestrictedDemoModel};
    use crate::model::MesonParams;
    use crate::rng::chunk_rng;
    use std::f64::consts::PI;

    fn natural() -> MesonParams {
        MesonParams::new("unit", 1.0, 1.0).unwrap()
    }

    #[test]
    fn cell_constant_model_is_exact() {
        let m = ConstantAnticorrelated::new(&natural());
        let mut rng = chunk_rng(3, 0);
        let e = lrt_correlation_cell(&m, TimePair::new(0.2, 4.0).unwrap(), 1000, &mut rng).unwrap();
        assert_eq!(e.value, -1.0);
        assert_eq!(e.stderr, 0.0);
        assert!(lrt_correlation_cell(&m, TimePair::new(0.0, 0.0).unwrap(), 0, &mut rng).is_err());
    }

    #[test]
    fn cell_oscillating_sign() {
        let p = natural();
        let m = OscillatingSign::new(&p);
        let mut rng = chunk_rng(5, 0);
        let same = lrt_correlation_cell(&m, TimePair::new(1.0, 1.0).unwrap(), 10_000, &mut rng).unwrap();
        assert_eq!(same.value, -1.0);
        let quarter = TimePair::new(1.0 + PI / 2.0, 1.0).unwrap();
        let e = lrt_correlation_cell(&m, quarter, 40_000, &mut rng).unwrap();
        assert!(e.value.abs() < 5.0 * e.stderr, "{e:?}");
    }

    #[test]
    fn delta_correlation_constant_and_zero_gap() {
        let p = natural();
        let quad = StripQuadrature::for_gamma(p.gamma);
        let mut rng = chunk_rng(9, 0);
        let c = lrt_correlation_delta(&ConstantAnticorrelated::new(&p), 1.3, 50, &quad, &mut rng).unwrap();
        assert!((c.value + 1.0).abs() < 1e-12);
        let c = lrt_correlation_delta(&OscillatingSign::new(&p), 0.0, 200, &quad, &mut rng).unwrap();
        assert!((c.value + 1.0).abs() < 1e-12);
    }

    #[test]
    fn delta_correlation_demo_half_period() {
        let p = natural();
        let quad = StripQuadrature::for_gamma(p.gamma);
        let mut rng = chunk_rng(11, 0);
        let c = lrt_correlation_delta(&UnrestrictedDemoModel::new(p.clone()), PI, 200, &quad, &mut rng).unwrap();
        assert!((c.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn joint_probabilities_partition_eta() {
        let p = natural();
        let times = TimePair::new(0.4, 0.4).unwrap();
        let mut rng = chunk_rng(13, 0);
        let osc = OscillatingSign::new(&p);
        let table = lrt_joint_probabilities(&osc, times, 777, &mut rng).unwrap();
        let eta = (-0.8f64).exp();
        let total: f64 = table.iter().flatten().sum();
        assert!((total - eta).abs() < 1e-15);
        let anti = ConstantAnticorrelated::new(&p);
        for f in Flavor::ALL {
            assert_eq!(lrt_joint_probability(&anti, f, f, times, 100, &mut rng).unwrap(), 0.0);
        }
    }
}
