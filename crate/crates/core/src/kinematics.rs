//! Decay-vertex kinematics and the fraction of space-like separated decay pairs.
//!
//! Each meson decays at `U * tau`, where `U` is its four-velocity and `tau`
//! its proper decay time. In the pair rest frame the mesons fly back to back
//! with speed `u*` along an isotropic direction, and the pair frame moves with
//! speed `beta` along the beam (`z`) axis.
//!
//! Two separation criteria are offered. [`SeparationCriterion::FullInterval`]
//! uses the Minkowski interval and so does not depend on `beta`.
//! [`SeparationCriterion::LongitudinalProjection`] keeps only the beam-axis
//! distance, as a vertex detector measuring `dz` would, and does depend on
//! the frame. Neither reproduces a specific published curve; results are
//! model-dependent.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Exp, UnitSphere};
use serde::{Deserialize, Serialize};

use crate::bell::p_threshold;
use crate::error::{domain, Error, Result};
use crate::model::{bell_delta_t_range, MesonParams};
use crate::rng::par_chunks;

/// Speed of light in m/s.
pub const C_LIGHT: f64 = 299_792_458.0;
/// Upsilon(4S) mass in GeV/c^2.
pub const M_UPSILON_4S: f64 = 10.5796;
/// Neutral B mass in GeV/c^2.
pub const M_B0: f64 = 5.2795;
/// Lab boost of the Upsilon(4S) at KEKB.
pub const BETA_GAMMA_KEKB: f64 = 0.425;

const LIGHTLIKE_GUARD: f64 = 1e-12;

/// Speed of each daughter in a two-body decay `M -> m m` at rest,
/// `sqrt(1 - 4 m^2 / M^2)`.
pub fn meson_cm_speed_from_masses(parent: f64, daughter: f64) -> Result<f64> {
    if !(daughter >= 0.0 && parent >= 2.0 * daughter && parent > 0.0 && parent.is_finite()) {
        return Err(domain(format!(
            "two-body decay needs parent mass >= 2 x daughter mass, got {parent} and {daughter}"
        )));
    }
    Ok((1.0 - 4.0 * daughter * daughter / (parent * parent)).sqrt())
}

/// Default pair-frame meson speed from the Upsilon(4S) and B masses (about 0.0624).
pub fn default_meson_cm_speed() -> f64 {
    meson_cm_speed_from_masses(M_UPSILON_4S, M_B0).expect("constant masses are valid")
}

/// Lab boost of the pair frame and pair-frame meson speed, both in units of c.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoostConfig {
    pub beta: f64,
    pub meson_cm_speed: f64,
}

fn check_speed(name: &str, v: f64) -> Result<()> {
    if !(0.0..1.0).contains(&v) {
        return Err(domain(format!("{name} must lie in [0, 1), got {v}")));
    }
    Ok(())
}

impl BoostConfig {
    pub fn new(beta: f64, meson_cm_speed: f64) -> Result<Self> {
        check_speed("beta", beta)?;
        check_speed("meson_cm_speed", meson_cm_speed)?;
        Ok(Self { beta, meson_cm_speed })
    }

    /// Builds from `beta` and a redundant `beta_gamma`, which must agree
    /// with `beta / sqrt(1 - beta^2)` to `1e-9`.
    pub fn with_beta_gamma(beta: f64, beta_gamma: f64, meson_cm_speed: f64) -> Result<Self> {
        let config = Self::new(beta, meson_cm_speed)?;
        if (config.beta_gamma() - beta_gamma).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "beta = {beta} gives beta*gamma = {}, inconsistent with {beta_gamma}",
                config.beta_gamma()
            )));
        }
        Ok(config)
    }

    pub fn gamma(&self) -> f64 {
        1.0 / (1.0 - self.beta * self.beta).sqrt()
    }

    pub fn beta_gamma(&self) -> f64 {
        self.beta * self.gamma()
    }
}

impl Default for BoostConfig {
    /// `beta gamma = 0.425` with the mass-derived meson speed.
    fn default() -> Self {
        derive_boost(BETA_GAMMA_KEKB).expect("constant boost is valid")
    }
}

/// `beta = bg / sqrt(1 + bg^2)` with the default meson speed.
pub fn derive_boost(beta_gamma: f64) -> Result<BoostConfig> {
    if !(beta_gamma >= 0.0 && beta_gamma.is_finite()) {
        return Err(domain(format!("beta*gamma must be finite and non-negative, got {beta_gamma}")));
    }
    BoostConfig::new(beta_gamma / (1.0 + beta_gamma * beta_gamma).sqrt(), default_meson_cm_speed())
}

/// A spacetime point: lab time in seconds, position in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourEvent {
    pub t: f64,
    pub r: [f64; 3],
}

impl FourEvent {
    pub fn new(t: f64, r: [f64; 3]) -> Result<Self> {
        if !(t.is_finite() && r.iter().all(|x| x.is_finite())) {
            return Err(domain("four-event components must be finite"));
        }
        Ok(Self { t, r })
    }

    /// Event at proper time `tau` on the worldline through the origin with
    /// velocity `v` (units of c).
    pub fn on_worldline(v: [f64; 3], tau: f64) -> Self {
        let v2: f64 = v.iter().map(|x| x * x).sum();
        let g = 1.0 / (1.0 - v2).sqrt();
        Self {
            t: g * tau,
            r: v.map(|x| g * x * C_LIGHT * tau),
        }
    }

    /// Coordinates in a frame moving with velocity `beta` (units of c)
    /// relative to the current one.
    pub fn boosted(&self, beta: [f64; 3]) -> Self {
        let b2: f64 = beta.iter().map(|x| x * x).sum();
        if b2 == 0.0 {
            return *self;
        }
        let g = 1.0 / (1.0 - b2).sqrt();
        let ct = C_LIGHT * self.t;
        let b_dot_r: f64 = beta.iter().zip(self.r).map(|(b, x)| b * x).sum();
        let ct_new = g * (ct - b_dot_r);
        let k = (g - 1.0) * b_dot_r / b2 - g * ct;
        let mut r = self.r;
        for (x, b) in r.iter_mut().zip(beta) {
            *x += k * b;
        }
        Self { t: ct_new / C_LIGHT, r }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeparationCriterion {
    /// Sign of `|dr|^2 - c^2 dt^2`. Lorentz invariant.
    #[default]
    FullInterval,
    /// Sign of `dz^2 - c^2 dt^2`. Frame-dependent.
    LongitudinalProjection,
}

impl SeparationCriterion {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::FullInterval => "full",
            Self::LongitudinalProjection => "longitudinal",
        }
    }
}

impl fmt::Display for SeparationCriterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SeparationCriterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Self::FullInterval),
            "longitudinal" => Ok(Self::LongitudinalProjection),
            other => Err(Error::Parse(format!(
                "unknown separation criterion '{other}' (expected full or longitudinal)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Separation {
    Spacelike,
    Timelike,
    Lightlike,
}

/// Discriminant `dr^2 - c^2 dt^2` and the scale `dr^2 + c^2 dt^2` it is
/// compared against.
pub fn separation_discriminant(e1: &FourEvent, e2: &FourEvent, criterion: SeparationCriterion) -> (f64, f64) {
    let d: [f64; 3] = std::array::from_fn(|k| e1.r[k] - e2.r[k]);
    let spatial = match criterion {
        SeparationCriterion::FullInterval => d.iter().map(|x| x * x).sum(),
        SeparationCriterion::LongitudinalProjection => d[2] * d[2],
    };
    let cdt = C_LIGHT * (e1.t - e2.t);
    let temporal = cdt * cdt;
    (spatial - temporal, spatial + temporal)
}

/// Classifies the separation of two events. A discriminant within `1e-12`
/// of its scale counts as lightlike, as does the degenerate `e1 = e2`.
pub fn classify_separation(e1: &FourEvent, e2: &FourEvent, criterion: SeparationCriterion) -> Separation {
    let (disc, scale) = separation_discriminant(e1, e2, criterion);
    if disc.abs() <= LIGHTLIKE_GUARD * scale {
        Separation::Lightlike
    } else if disc > 0.0 {
        Separation::Spacelike
    } else {
        Separation::Timelike
    }
}

/// Samples one pair of decay events in the lab frame.
///
/// Proper times are independent exponentials with rate gamma; with
/// `fixed_delta_t` the second is the first plus that offset.
pub fn sample_pair_events<R: Rng + ?Sized>(
    config: &BoostConfig,
    params: &MesonParams,
    fixed_delta_t: Option<f64>,
    rng: &mut R,
) -> (FourEvent, FourEvent) {
    let exp = Exp::new(params.gamma).expect("validated gamma");
    let tau1: f64 = exp.sample(rng);
    let tau2 = match fixed_delta_t {
        Some(dt) => tau1 + dt,
        None => exp.sample(rng),
    };
    let n: [f64; 3] = UnitSphere.sample(rng);
    let u = config.meson_cm_speed;
    let boost = [0.0, 0.0, -config.beta];
    let e1 = FourEvent::on_worldline(n.map(|x| u * x), tau1).boosted(boost);
    let e2 = FourEvent::on_worldline(n.map(|x| -u * x), tau2).boosted(boost);
    (e1, e2)
}

/// Monte Carlo estimate of the space-like fraction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpacelikeEstimate {
    pub p_s: f64,
    pub stderr: f64,
    pub n: u64,
    pub spacelike: u64,
}

impl SpacelikeEstimate {
    pub fn from_counts(spacelike: u64, n: u64) -> Self {
        let p = if n == 0 { 0.0 } else { spacelike as f64 / n as f64 };
        let stderr = if n == 0 { 0.0 } else { (p * (1.0 - p) / n as f64).sqrt() };
        Self { p_s: p, stderr, n, spacelike }
    }

    pub fn merge(&self, other: &Self) -> Self {
        Self::from_counts(self.spacelike + other.spacelike, self.n + other.n)
    }
}

/// Fraction of space-like pairs at fixed proper-time difference `delta_t`.
pub fn spacelike_probability(
    config: &BoostConfig,
    params: &MesonParams,
    delta_t: f64,
    criterion: SeparationCriterion,
    n_samples: usize,
    seed: u64,
) -> Result<SpacelikeEstimate> {
    if n_samples == 0 {
        return Err(domain("spacelike_probability needs at least one sample"));
    }
    if !(delta_t >= 0.0 && delta_t.is_finite()) {
        return Err(domain(format!("time difference must be non-negative, got {delta_t}")));
    }
    let counts = par_chunks(n_samples, seed, |chunk, rng| {
        (0..chunk.len)
            .filter(|_| {
                let (e1, e2) = sample_pair_events(config, params, Some(delta_t), rng);
                classify_separation(&e1, &e2, criterion) == Separation::Spacelike
            })
            .count() as u64
    });
    Ok(SpacelikeEstimate::from_counts(counts.iter().sum(), n_samples as u64))
}

/// Closed form of the full-interval space-like fraction.
///
/// In the pair frame the events are space-like iff
/// `u (tau1 + tau2) > |tau2 - tau1|`, which for `tau2 = tau1 + dt` gives
/// `exp(-gamma dt (1 - u) / (2u))`.
pub fn spacelike_probability_full_exact(meson_cm_speed: f64, gamma: f64, delta_t: f64) -> f64 {
    if delta_t == 0.0 {
        return if meson_cm_speed > 0.0 { 1.0 } else { 0.0 };
    }
    if meson_cm_speed == 0.0 {
        return 0.0;
    }
    (-gamma * delta_t * (1.0 - meson_cm_speed) / (2.0 * meson_cm_speed)).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PsRow {
    pub delta_t: f64,
    pub p_s: f64,
    pub stderr: f64,
    pub above_threshold: bool,
}

/// Whether the threshold `2 - sqrt 2` holds across the time differences a
/// Bell combination needs, `[pi/4, 3pi/4] / dm`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PsSummary {
    pub threshold: f64,
    pub required_range: (f64, f64),
    /// Smallest `p_s` over the range endpoints and the grid points inside it.
    pub min_p_s_in_range: f64,
    pub attainable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PsCurve {
    pub rows: Vec<PsRow>,
    pub summary: PsSummary,
}

/// `p_s` on an ascending grid. Every row reuses `seed`, so rows differ only
/// through `delta_t` and the curve is free of row-to-row sampling noise.
pub fn ps_curve(
    config: &BoostConfig,
    params: &MesonParams,
    dt_grid: &[f64],
    criterion: SeparationCriterion,
    n_samples: usize,
    seed: u64,
) -> Result<PsCurve> {
    if dt_grid.is_empty() {
        return Err(domain("time-difference grid is empty"));
    }
    if dt_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(domain("time-difference grid must be strictly ascending"));
    }
    let threshold = p_threshold();
    let rows = dt_grid
        .iter()
        .map(|&dt| {
            let e = spacelike_probability(config, params, dt, criterion, n_samples, seed)?;
            Ok(PsRow {
                delta_t: dt,
                p_s: e.p_s,
                stderr: e.stderr,
                above_threshold: e.p_s > threshold,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let (lo, hi) = bell_delta_t_range(params);
    let mut min_p = f64::INFINITY;
    for dt in [lo, hi] {
        min_p = min_p.min(spacelike_probability(config, params, dt, criterion, n_samples, seed)?.p_s);
    }
    for row in rows.iter().filter(|r| r.delta_t >= lo && r.delta_t <= hi) {
        min_p = min_p.min(row.p_s);
    }
    Ok(PsCurve {
        rows,
        summary: PsSummary {
            threshold,
            required_range: (lo, hi),
            min_p_s_in_range: min_p,
            attainable: min_p > threshold,
        },
    })
}

/// `n` evenly spaced points from `0` to `dt_max` inclusive.
pub fn uniform_grid(dt_max: f64, n: usize) -> Result<Vec<f64>> {
    if n < 2 || !(dt_max > 0.0) {
        return Err(domain("grid needs at least 2 points and a positive extent"));
    }
    Ok((0..n).map(|k| dt_max * k as f64 / (n - 1) as f64).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::chunk_rng;
    use approx::assert_relative_eq;

    #[test]
    fn boost_derivation() {
        let b = derive_boost(0.0).unwrap();
        assert_eq!((b.beta, b.gamma()), (0.0, 1.0));
        assert!((derive_boost(0.425).unwrap().beta - 0.391).abs() < 5e-4);
        assert_relative_eq!(derive_boost(1.0).unwrap().beta, 1.0 / 2f64.sqrt(), epsilon = 1e-15);
        assert!(derive_boost(-0.1).is_err());
        assert!(BoostConfig::new(1.0, 0.0).is_err());
        let b = derive_boost(0.425).unwrap();
        assert_relative_eq!(b.beta_gamma(), 0.425, epsilon = 1e-12);
        assert!(BoostConfig::with_beta_gamma(b.beta, 0.425, 0.06).is_ok());
        assert!(BoostConfig::with_beta_gamma(0.5, 0.425, 0.06).is_err());
    }

    #[test]
    fn meson_speed_from_masses() {
        let u = default_meson_cm_speed();
        assert!((0.060..=0.068).contains(&u), "{u}");
        assert!(meson_cm_speed_from_masses(10.0, 5.0).unwrap() == 0.0);
        assert!(meson_cm_speed_from_masses(10.0, 5.1).is_err());
    }

    #[test]
    fn classification_basics() {
        let o = FourEvent::new(0.0, [0.0; 3]).unwrap();
        let full = SeparationCriterion::FullInterval;
        assert_eq!(classify_separation(&o, &o, full), Separation::Lightlike);
        let later = FourEvent::new(1e-12, [0.0; 3]).unwrap();
        assert_eq!(classify_separation(&o, &later, full), Separation::Timelike);
        let apart = FourEvent::new(0.0, [1e-6, 0.0, 0.0]).unwrap();
        assert_eq!(classify_separation(&o, &apart, full), Separation::Spacelike);
        assert_eq!(
            classify_separation(&o, &apart, SeparationCriterion::LongitudinalProjection),
            Separation::Lightlike
        );
        assert!(FourEvent::new(f64::NAN, [0.0; 3]).is_err());
        assert_eq!("full".parse::<SeparationCriterion>().unwrap(), full);
        assert!("sideways".parse::<SeparationCriterion>().is_err());
    }

    #[test]
    fn boost_preserves_interval() {
        let e = FourEvent::new(2e-12, [1e-4, -3e-4, 2e-4]).unwrap();
        let b = e.boosted([0.3, -0.2, 0.5]);
        let s = |e: &FourEvent| e.r.iter().map(|x| x * x).sum::<f64>() - (C_LIGHT * e.t).powi(2);
        assert_relative_eq!(s(&e), s(&b), max_relative = 1e-9);
        let back = b.boosted([-0.3, 0.2, -0.5]);
        assert_relative_eq!(back.t, e.t, max_relative = 1e-12);
        for k in 0..3 {
            assert_relative_eq!(back.r[k], e.r[k], max_relative = 1e-9);
        }
    }

    #[test]
    fn no_motion_sits_at_origin() {
        let p = MesonParams::b_meson();
        let cfg = BoostConfig::new(0.0, 0.0).unwrap();
        let (e1, e2) = sample_pair_events(&cfg, &p, None, &mut chunk_rng(1, 0));
        assert_eq!(e1.r, [0.0; 3]);
        assert_eq!(e2.r, [0.0; 3]);
        assert!(e1.t > 0.0 && e2.t > 0.0);
    }

    #[test]
    fn equal_proper_times_are_spacelike() {
        let p = MesonParams::b_meson();
        let cfg = BoostConfig::default();
        let mut rng = chunk_rng(2, 0);
        for _ in 0..1000 {
            let (e1, e2) = sample_pair_events(&cfg, &p, Some(0.0), &mut rng);
            assert_eq!(classify_separation(&e1, &e2, SeparationCriterion::FullInterval), Separation::Spacelike);
        }
    }

    #[test]
    fn probability_anchors() {
        let p = MesonParams::b_meson();
        let full = SeparationCriterion::FullInterval;
        let cfg = BoostConfig::default();
        let e = spacelike_probability(&cfg, &p, 0.0, full, 5000, 3).unwrap();
        assert_eq!(e.p_s, 1.0);
        let still = BoostConfig::new(0.39, 0.0).unwrap();
        assert_eq!(spacelike_probability(&still, &p, 1e-12, full, 5000, 3).unwrap().p_s, 0.0);
        assert!(spacelike_probability(&cfg, &p, 0.0, full, 0, 3).is_err());
        assert!(spacelike_probability(&cfg, &p, -1.0, full, 10, 3).is_err());
    }

    #[test]
    fn full_interval_matches_closed_form() {
        let p = MesonParams::b_meson();
        let cfg = BoostConfig::new(0.39, 0.3).unwrap();
        let dt = 0.5 / p.gamma;
        let e = spacelike_probability(&cfg, &p, dt, SeparationCriterion::FullInterval, 100_000, 4).unwrap();
        let exact = spacelike_probability_full_exact(0.3, p.gamma, dt);
        assert!((e.p_s - exact).abs() < 5.0 * e.stderr, "{} vs {exact}", e.p_s);
    }

    #[test]
    fn curve_validation_and_summary() {
        let p = MesonParams::b_meson();
        let cfg = BoostConfig::default();
        let full = SeparationCriterion::FullInterval;
        assert!(ps_curve(&cfg, &p, &[], full, 10, 1).is_err());
        assert!(ps_curve(&cfg, &p, &[2.0, 1.0], full, 10, 1).is_err());
        let grid = uniform_grid(3.0 / p.gamma, 7).unwrap();
        let c = ps_curve(&cfg, &p, &grid, full, 20_000, 1).unwrap();
        assert!(c.rows[0].above_threshold);
        assert!(!c.summary.attainable);
        assert!(c.rows.windows(2).all(|w| w[1].p_s <= w[0].p_s));
    }
}
