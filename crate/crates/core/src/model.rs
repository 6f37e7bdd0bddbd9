//! Meson constants and the quantum-mechanical correlation model.
//!
//! The joint decay-rate density used here is
//!
//! ```text
//! Gamma_ij(t_l, t_r) = (gamma^2 / 4) * exp(-gamma (t_l + t_r)) * (1 - i j cos(delta_m (t_l - t_r)))
//! ```
//!
//! i.e. the joint probability `P_ij` is normalized so that summing over the
//! four flavor pairs gives the exponential density `exp(-gamma (t_l + t_r))`,
//! and `Gamma_ij = gamma^2 P_ij` integrates to one over the positive quadrant.
//! An overall constant in `P_ij` would cancel in every correlation ratio.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Oscillation frequency and decay width of a neutral meson species.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MesonParams {
    pub label: String,
    /// Mass splitting of the weak eigenstates as an angular frequency, 1/s.
    pub delta_m: f64,
    /// Total decay width, 1/s.
    pub gamma: f64,
}

impl MesonParams {
    pub fn new(label: impl Into<String>, delta_m: f64, gamma: f64) -> Result<Self> {
        if !(delta_m.is_finite() && delta_m > 0.0) {
            return Err(domain(format!("delta_m must be finite and positive, got {delta_m}")));
        }
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(domain(format!("gamma must be finite and positive, got {gamma}")));
        }
        Ok(Self {
            label: label.into(),
            delta_m,
            gamma,
        })
    }

    /// B mesons: `delta_m = 5.02e11 /s`, `gamma = 6.49e11 /s`.
    pub fn b_meson() -> Self {
        Self {
            label: "B".into(),
            delta_m: 5.02e11,
            gamma: 6.49e11,
        }
    }

    /// K mesons, known here only through the ratio `x = 0.95`; instantiated
    /// in natural units with `gamma = 1`.
    pub fn k_meson() -> Self {
        Self {
            label: "K".into(),
            delta_m: 0.95,
            gamma: 1.0,
        }
    }

    /// A species with the given ratio `x = delta_m / gamma` in natural units.
    pub fn from_ratio(x: f64) -> Result<Self> {
        Self::new(format!("x={x}"), x, 1.0)
    }

    /// Built-in species by name (`"B"` or `"K"`, case-insensitive).
    pub fn lookup(species: &str) -> Result<Self> {
        match species.to_ascii_uppercase().as_str() {
            "B" => Ok(Self::b_meson()),
            "K" => Ok(Self::k_meson()),
            other => Err(Error::Config(format!("unknown species '{other}' (known: B, K)"))),
        }
    }

    /// The feasibility ratio `x = delta_m / gamma`.
    pub fn x(&self) -> f64 {
        self.delta_m / self.gamma
    }

    /// Mean lifetime `1 / gamma`.
    pub fn lifetime(&self) -> f64 {
        1.0 / self.gamma
    }
}

/// Flavor tag of a decaying meson, read out as a dichotomic `+1 / -1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Flavor {
    B0,
    B0Bar,
}

impl Flavor {
    pub const ALL: [Flavor; 2] = [Flavor::B0, Flavor::B0Bar];

    pub fn sign(self) -> i8 {
        match self {
            Flavor::B0 => 1,
            Flavor::B0Bar => -1,
        }
    }

    pub fn value(self) -> f64 {
        f64::from(self.sign())
    }

    /// `+1 -> B0`, `-1 -> B0Bar`.
    pub fn from_sign(sign: i64) -> Result<Self> {
        match sign {
            1 => Ok(Flavor::B0),
            -1 => Ok(Flavor::B0Bar),
            other => Err(Error::Parse(format!("flavor must be +1 or -1, got {other}"))),
        }
    }

    /// Sign of a real number with `sign(0) = +1`.
    pub fn from_real(x: f64) -> Self {
        if x >= 0.0 {
            Flavor::B0
        } else {
            Flavor::B0Bar
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Flavor::B0 => Flavor::B0Bar,
            Flavor::B0Bar => Flavor::B0,
        }
    }

    /// Dense index: `B0 -> 0`, `B0Bar -> 1`.
    pub fn index(self) -> usize {
        match self {
            Flavor::B0 => 0,
            Flavor::B0Bar => 1,
        }
    }
}

impl fmt::Display for Flavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:+}", self.sign())
    }
}

/// Decay times of the left and right meson of a pair, in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimePair {
    pub t_l: f64,
    pub t_r: f64,
}

impl TimePair {
    pub fn new(t_l: f64, t_r: f64) -> Result<Self> {
        if !(t_l.is_finite() && t_l >= 0.0 && t_r.is_finite() && t_r >= 0.0) {
            return Err(domain(format!("decay times must be finite and non-negative, got ({t_l}, {t_r})")));
        }
        Ok(Self { t_l, t_r })
    }

    /// Skips validation; callers guarantee non-negative finite times.
    pub(crate) fn new_unchecked(t_l: f64, t_r: f64) -> Self {
        debug_assert!(t_l >= 0.0 && t_r >= 0.0);
        Self { t_l, t_r }
    }

    pub fn delta_t(&self) -> f64 {
        (self.t_l - self.t_r).abs()
    }

    pub fn swapped(&self) -> Self {
        Self {
            t_l: self.t_r,
            t_r: self.t_l,
        }
    }
}

/// One simulated pair decay.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayRecord {
    pub times: TimePair,
    pub flavor_l: Flavor,
    pub flavor_r: Flavor,
}

impl DecayRecord {
    pub fn product(&self) -> i8 {
        self.flavor_l.sign() * self.flavor_r.sign()
    }
}

/// Quantum correlation `-cos(delta_m (t_l - t_r))` of the antisymmetric pair state.
pub fn qm_correlation(params: &MesonParams, times: TimePair) -> f64 {
    qm_correlation_delta(params, times.delta_t())
}

/// [`qm_correlation`] as a function of the time difference alone.
pub fn qm_correlation_delta(params: &MesonParams, delta_t: f64) -> f64 {
    -(params.delta_m * delta_t).cos()
}

/// Joint decay-rate density for flavors `(i, j)` at `times`, in 1/s^2.
pub fn qm_joint_rate(params: &MesonParams, i: Flavor, j: Flavor, times: TimePair) -> f64 {
    let g = params.gamma;
    let ij = (i.sign() * j.sign()) as f64;
    let osc = (params.delta_m * (times.t_l - times.t_r)).cos();
    0.25 * g * g * (-g * (times.t_l + times.t_r)).exp() * (1.0 - ij * osc)
}

/// Conditional flavor probabilities `p_ij = (1 - i j cos(delta_m dt)) / 4`
/// given the decay times, indexed by [`Flavor::index`].
pub fn qm_flavor_probabilities(params: &MesonParams, times: TimePair) -> [[f64; 2]; 2] {
    let c = (params.delta_m * (times.t_l - times.t_r)).cos();
    let same = 0.25 * (1.0 - c);
    let opposite = 0.25 * (1.0 + c);
    [[same, opposite], [opposite, same]]
}

/// Exponential temporal density `gamma^2 exp(-gamma (t_l + t_r))`.
pub fn eta_exponential(params: &MesonParams, times: TimePair) -> f64 {
    let g = params.gamma;
    g * g * (-g * (times.t_l + times.t_r)).exp()
}

/// Strip normalization `N(dt) = int_0^inf {eta(t + dt, t) + eta(t, t + dt)} dt`
/// for the exponential density, which is `gamma exp(-gamma dt)`.
pub fn n_of_delta(params: &MesonParams, delta_t: f64) -> Result<f64> {
    check_delta(delta_t)?;
    Ok(params.gamma * (-params.gamma * delta_t).exp())
}

/// Strip-normalized density `Theta(t) eta(t, t + dt) / N(dt)`; for the
/// exponential family this is `gamma exp(-2 gamma t)` for `t >= 0`.
pub fn eta_tilde(params: &MesonParams, t: f64, delta_t: f64) -> Result<f64> {
    check_delta(delta_t)?;
    if t < 0.0 {
        return Ok(0.0);
    }
    Ok(params.gamma * (-2.0 * params.gamma * t).exp())
}

/// Expected event count `N (dt)^2 rate` in a cell of width `bin_width`.
pub fn expected_counts(n_pairs: u64, bin_width: f64, rate: f64) -> Result<f64> {
    if !(bin_width > 0.0) {
        return Err(domain(format!("bin width must be positive, got {bin_width}")));
    }
    if rate < 0.0 {
        return Err(domain(format!("rate must be non-negative, got {rate}")));
    }
    Ok(n_pairs as f64 * bin_width * bin_width * rate)
}

/// Correlation recovered from joint rates via `sum ij P_ij / sum P_ij`.
pub fn correlation_from_joint_rates(params: &MesonParams, times: TimePair) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for i in Flavor::ALL {
        for j in Flavor::ALL {
            let rate = qm_joint_rate(params, i, j, times);
            num += (i.sign() * j.sign()) as f64 * rate;
            den += rate;
        }
    }
    num / den
}

/// Checks the two identities the joint-rate formula must satisfy on a
/// small grid: the ratio of rates reproduces [`qm_correlation`], and the
/// flavor-summed rate equals [`eta_exponential`].
pub fn self_check(params: &MesonParams) -> Result<()> {
    let scale = params.lifetime();
    for a in 0..6 {
        for b in 0..6 {
            let times = TimePair::new_unchecked(0.37 * a as f64 * scale, 0.53 * b as f64 * scale);
            let c = correlation_from_joint_rates(params, times);
            if (c - qm_correlation(params, times)).abs() > 1e-12 {
                return Err(Error::Numeric(format!("joint-rate correlation mismatch at {times:?}")));
            }
            let sum: f64 = Flavor::ALL
                .iter()
                .flat_map(|&i| Flavor::ALL.iter().map(move |&j| (i, j)))
                .map(|(i, j)| qm_joint_rate(params, i, j, times))
                .sum();
            let eta = eta_exponential(params, times);
            if (sum - eta).abs() > 1e-12 * eta {
                return Err(Error::Numeric(format!("joint-rate normalization mismatch at {times:?}")));
            }
        }
    }
    Ok(())
}

/// Time differences spanned by the optimal quantum combination,
/// `[pi/4, 3pi/4] / delta_m`.
pub fn bell_delta_t_range(params: &MesonParams) -> (f64, f64) {
    (0.25 * PI / params.delta_m, 0.75 * PI / params.delta_m)
}

fn check_delta(delta_t: f64) -> Result<()> {
    if !(delta_t >= 0.0) {
        return Err(domain(format!("time difference must be non-negative, got {delta_t}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::FRAC_PI_4;

    fn b() -> MesonParams {
        MesonParams::b_meson()
    }

    #[test]
    fn params_validation() {
        assert!(MesonParams::new("bad", 0.0, 1.0).is_err());
        assert!(MesonParams::new("bad", 1.0, -1.0).is_err());
        assert!(MesonParams::new("bad", f64::NAN, 1.0).is_err());
        assert_relative_eq!(b().x(), 5.02 / 6.49);
        assert!(MesonParams::lookup("D").is_err());
        assert_eq!(MesonParams::lookup("k").unwrap().x(), 0.95);
    }

    #[test]
    fn flavor_signs() {
        assert_eq!(Flavor::B0.sign(), 1);
        assert_eq!(Flavor::B0Bar.sign(), -1);
        assert_eq!(Flavor::from_real(0.0), Flavor::B0);
        assert_eq!(Flavor::from_sign(-1).unwrap(), Flavor::B0Bar);
        assert!(Flavor::from_sign(0).is_err());
    }

    #[test]
    fn qm_correlation_anchors() {
        let p = b();
        let t = 3.0e-12;
        assert_eq!(qm_correlation(&p, TimePair::new(t, t).unwrap()), -1.0);
        let half = TimePair::new(PI / p.delta_m, 0.0).unwrap();
        assert_relative_eq!(qm_correlation(&p, half), 1.0, epsilon = 1e-15);
        let quarter = TimePair::new(0.0, FRAC_PI_4 / p.delta_m).unwrap();
        assert_relative_eq!(qm_correlation(&p, quarter), -FRAC_PI_4.cos(), epsilon = 1e-15);
    }

    #[test]
    fn joint_rate_anchors() {
        let p = b();
        let origin = TimePair::new(0.0, 0.0).unwrap();
        assert_eq!(qm_joint_rate(&p, Flavor::B0, Flavor::B0, origin), 0.0);
        assert_relative_eq!(
            qm_joint_rate(&p, Flavor::B0, Flavor::B0Bar, origin),
            p.gamma * p.gamma / 2.0,
            max_relative = 1e-15
        );
    }

    #[test]
    fn strip_functions() {
        let p = b();
        assert_relative_eq!(n_of_delta(&p, 0.0).unwrap(), p.gamma);
        assert_relative_eq!(n_of_delta(&p, 1.0 / p.gamma).unwrap(), p.gamma / std::f64::consts::E, max_relative = 1e-15);
        assert!(n_of_delta(&p, -1.0).is_err());
        assert_eq!(eta_tilde(&p, -1e-15, 0.0).unwrap(), 0.0);
        assert_relative_eq!(eta_tilde(&p, 0.0, 7e-12).unwrap(), p.gamma);
        assert!(eta_tilde(&p, 0.0, -1.0).is_err());
    }

    #[test]
    fn expected_counts_arithmetic() {
        let p = b();
        let rate = p.gamma * p.gamma / 2.0;
        let n = expected_counts(1_000_000, 1e-13, rate).unwrap();
        assert_relative_eq!(n, 1e6 * 1e-26 * 2.106_005e23, max_relative = 1e-6);
        assert_eq!(expected_counts(0, 1e-13, rate).unwrap(), 0.0);
        assert_relative_eq!(expected_counts(2_000_000, 1e-13, rate).unwrap(), 2.0 * n);
        assert!(expected_counts(10, 0.0, rate).is_err());
    }

    #[test]
    fn startup_self_check_passes() {
        self_check(&b()).unwrap();
        self_check(&MesonParams::k_meson()).unwrap();
    }
}
