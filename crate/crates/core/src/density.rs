//! Temporal densities `eta(t_l, t_r)` of pair decay times.

use std::fmt;

use rand::{Rng, RngCore};
use rand_distr::{Distribution, Exp};

use crate::error::{domain, Result};
use crate::model::{MesonParams, TimePair};
use crate::quadrature::{integrate, QuadratureSpec};

/// A normalized density over the positive quadrant of decay times.
pub trait TemporalDensity: Send + Sync + fmt::Debug {
    fn eval(&self, times: TimePair) -> f64;

    /// Natural time scale, used for grids and integration cutoffs.
    fn time_scale(&self) -> f64;

    /// Draws a pair of decay times, if the density has a sampler.
    fn sample(&self, _rng: &mut dyn RngCore) -> Option<TimePair> {
        None
    }

    /// `(eta_l(t_l), eta_r(t_r))` when the density splits into one-particle
    /// decay densities.
    fn marginals(&self, _times: TimePair) -> Option<(f64, f64)> {
        None
    }
}

/// `gamma^2 exp(-gamma (t_l + t_r))`: independent exponential decays.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentialDensity {
    pub gamma: f64,
}

impl ExponentialDensity {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(domain(format!("gamma must be finite and positive, got {gamma}")));
        }
        Ok(Self { gamma })
    }

    pub fn from_params(params: &MesonParams) -> Self {
        Self { gamma: params.gamma }
    }
}

impl TemporalDensity for ExponentialDensity {
    fn eval(&self, times: TimePair) -> f64 {
        let g = self.gamma;
        g * g * (-g * (times.t_l + times.t_r)).exp()
    }

    fn time_scale(&self) -> f64 {
        1.0 / self.gamma
    }

    fn sample(&self, rng: &mut dyn RngCore) -> Option<TimePair> {
        let exp = Exp::new(self.gamma).expect("gamma validated at construction");
        let t_l = exp.sample(rng);
        let t_r = exp.sample(rng);
        Some(TimePair::new_unchecked(t_l, t_r))
    }

    fn marginals(&self, times: TimePair) -> Option<(f64, f64)> {
        let g = self.gamma;
        Some((g * (-g * times.t_l).exp(), g * (-g * times.t_r).exp()))
    }
}

/// Uniform density on the box `[0, t_max]^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxDensity {
    pub t_max: f64,
}

impl BoxDensity {
    pub fn new(t_max: f64) -> Result<Self> {
        if !(t_max.is_finite() && t_max > 0.0) {
            return Err(domain(format!("box size must be positive, got {t_max}")));
        }
        Ok(Self { t_max })
    }

    fn inside(&self, t: f64) -> bool {
        (0.0..=self.t_max).contains(&t)
    }
}

impl TemporalDensity for BoxDensity {
    fn eval(&self, times: TimePair) -> f64 {
        if self.inside(times.t_l) && self.inside(times.t_r) {
            1.0 / (self.t_max * self.t_max)
        } else {
            0.0
        }
    }

    fn time_scale(&self) -> f64 {
        self.t_max
    }

    fn sample(&self, rng: &mut dyn RngCore) -> Option<TimePair> {
        let t_l = rng.random::<f64>() * self.t_max;
        let t_r = rng.random::<f64>() * self.t_max;
        Some(TimePair::new_unchecked(t_l, t_r))
    }

    fn marginals(&self, times: TimePair) -> Option<(f64, f64)> {
        let m = |t| if self.inside(t) { 1.0 / self.t_max } else { 0.0 };
        Some((m(times.t_l), m(times.t_r)))
    }
}

/// A user-supplied density given as a closure; no sampler, no marginals.
pub struct FnDensity<F> {
    f: F,
    scale: f64,
}

impl<F: Fn(TimePair) -> f64 + Send + Sync> FnDensity<F> {
    pub fn new(f: F, scale: f64) -> Self {
        Self { f, scale }
    }
}

impl<F> fmt::Debug for FnDensity<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnDensity").field("scale", &self.scale).finish_non_exhaustive()
    }
}

impl<F: Fn(TimePair) -> f64 + Send + Sync> TemporalDensity for FnDensity<F> {
    fn eval(&self, times: TimePair) -> f64 {
        (self.f)(times)
    }

    fn time_scale(&self) -> f64 {
        self.scale
    }
}

/// `N(dt)`, the mass along both strips at time difference `dt`, by quadrature.
pub fn strip_normalization(density: &dyn TemporalDensity, delta_t: f64, spec: &QuadratureSpec) -> Result<f64> {
    if !(delta_t >= 0.0) {
        return Err(domain(format!("time difference must be non-negative, got {delta_t}")));
    }
    let cutoff = spec.cutoff_lifetimes * density.time_scale();
    let r = integrate(
        |t| {
            density.eval(TimePair::new_unchecked(t + delta_t, t)) + density.eval(TimePair::new_unchecked(t, t + delta_t))
        },
        0.0,
        cutoff,
        spec,
    )?;
    Ok(r.value)
}

/// `Theta(t) eta(t, t + dt) / N(dt)` for an arbitrary density.
pub fn eta_tilde_numeric(density: &dyn TemporalDensity, t: f64, delta_t: f64, spec: &QuadratureSpec) -> Result<f64> {
    let n = strip_normalization(density, delta_t, spec)?;
    if t < 0.0 {
        return Ok(0.0);
    }
    if n <= 0.0 {
        return Err(crate::Error::EmptySubensemble(format!("strip at dt = {delta_t} carries no mass")));
    }
    Ok(density.eval(TimePair::new_unchecked(t, t + delta_t)) / n)
}
