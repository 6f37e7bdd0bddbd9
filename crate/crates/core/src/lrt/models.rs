use std::f64::consts::TAU;

use rand::{Rng, RngCore};

use super::{HiddenVar, OutcomeModel, RestrictedLrtModel};
use crate::density::{ExponentialDensity, TemporalDensity};
use crate::model::{Flavor, MesonParams, TimePair};

/// `lambda = +-1` with equal weight, `A = lambda`, `B = -lambda`.
/// Perfectly anticorrelated at every pair of decay times.
#[derive(Debug, Clone)]
pub struct ConstantAnticorrelated {
    density: ExponentialDensity,
}

impl ConstantAnticorrelated {
    pub fn new(params: &MesonParams) -> Self {
        Self {
            density: ExponentialDensity::from_params(params),
        }
    }
}

impl RestrictedLrtModel for ConstantAnticorrelated {
    fn name(&self) -> &str {
        "const-anti"
    }

    fn sample_lambda(&self, rng: &mut dyn RngCore) -> HiddenVar {
        HiddenVar::scalar(if rng.random::<bool>() { 1.0 } else { -1.0 })
    }

    fn outcome_a(&self, lambda: &HiddenVar, _t_l: f64) -> Flavor {
        Flavor::from_real(lambda.get(0))
    }

    fn outcome_b(&self, lambda: &HiddenVar, _t_r: f64) -> Flavor {
        Flavor::from_real(-lambda.get(0))
    }

    fn density(&self) -> &dyn TemporalDensity {
        &self.density
    }
}

/// `lambda` uniform on `[0, 2 pi)`, `A = sign(cos(dm t_l + lambda))`,
/// `B = -sign(cos(dm t_r + lambda))`, with `sign(0) = +1`.
///
/// The correlation is the triangle wave `-1 + 2 |dm dt| / pi` for
/// `|dm dt| <= pi`, which saturates but never exceeds the CHSH bound.
#[derive(Debug, Clone)]
pub struct OscillatingSign {
    delta_m: f64,
    density: ExponentialDensity,
}

impl OscillatingSign {
    pub fn new(params: &MesonParams) -> Self {
        Self {
            delta_m: params.delta_m,
            density: ExponentialDensity::from_params(params),
        }
    }

    /// Exact correlation at the given decay times.
    pub fn exact_correlation(&self, times: TimePair) -> f64 {
        let phase = (self.delta_m * times.delta_t()).rem_euclid(TAU);
        let folded = if phase > std::f64::consts::PI { TAU - phase } else { phase };
        -1.0 + 2.0 * folded / std::f64::consts::PI
    }
}

impl RestrictedLrtModel for OscillatingSign {
    fn name(&self) -> &str {
        "osc-sign"
    }

    fn sample_lambda(&self, rng: &mut dyn RngCore) -> HiddenVar {
        HiddenVar::scalar(rng.random::<f64>() * TAU)
    }

    fn outcome_a(&self, lambda: &HiddenVar, t_l: f64) -> Flavor {
        Flavor::from_real((self.delta_m * t_l + lambda.get(0)).cos())
    }

    fn outcome_b(&self, lambda: &HiddenVar, t_r: f64) -> Flavor {
        Flavor::from_real((self.delta_m * t_r + lambda.get(0)).cos()).flip()
    }

    fn density(&self) -> &dyn TemporalDensity {
        &self.density
    }
}

/// A hidden-variable model that is neither homogeneous nor independent of
/// the partner's decay time.
///
/// `lambda = (s, u)` with `s = +-1` and `u` uniform on `[0, 1)`. The outcome
/// pair is `(s, s)` when `u < (1 - cos(dm dt)) / 2` and `(s, -s)` otherwise,
/// i.e. the effective distribution of the outcome pair depends on both decay
/// times. This reproduces `-cos(dm dt)` exactly in expectation.
#[derive(Debug, Clone)]
pub struct UnrestrictedDemoModel {
    params: MesonParams,
    density: ExponentialDensity,
}

impl UnrestrictedDemoModel {
    pub fn new(params: MesonParams) -> Self {
        let density = ExponentialDensity::from_params(&params);
        Self { params, density }
    }
}

impl OutcomeModel for UnrestrictedDemoModel {
    fn name(&self) -> &str {
        "demo-qm"
    }

    fn draw_hidden(&self, rng: &mut dyn RngCore) -> HiddenVar {
        let s = if rng.random::<bool>() { 1.0 } else { -1.0 };
        HiddenVar(vec![s, rng.random::<f64>()])
    }

    fn outcomes(&self, lambda: &HiddenVar, times: TimePair) -> (Flavor, Flavor) {
        let a = Flavor::from_real(lambda.get(0));
        let p_same = 0.5 * (1.0 - (self.params.delta_m * times.delta_t()).cos());
        let b = if lambda.get(1) < p_same { a } else { a.flip() };
        (a, b)
    }

    fn density(&self) -> &dyn TemporalDensity {
        &self.density
    }

    fn is_restricted(&self) -> bool {
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    // Brute-force lambda grid average of A * B.
    fn grid_correlation(model: &OscillatingSign, times: TimePair, n: usize) -> f64 {
        let sum: f64 = (0..n)
            .map(|k| {
                let lambda = HiddenVar::scalar((k as f64 + 0.5) / n as f64 * TAU);
                let (a, b) = model.outcomes(&lambda, times);
                a.value() * b.value()
            })
            .sum();
        sum / n as f64
    }

    #[test]
    fn oscillating_sign_triangle_wave() {
        let p = MesonParams::new("test", 1.0, 1.0).unwrap();
        let m = OscillatingSign::new(&p);
        for (phase, expected) in [(0.0, -1.0), (PI / 2.0, 0.0), (PI / 4.0, -0.5), (PI, 1.0), (1.5 * PI, 0.0)] {
            let times = TimePair::new(0.3 + phase, 0.3).unwrap();
            assert!((m.exact_correlation(times) - expected).abs() < 1e-12);
            assert!((grid_correlation(&m, times, 100_000) - expected).abs() < 1e-4, "phase {phase}");
        }
    }

    #[test]
    fn constant_model_always_opposite() {
        let m = ConstantAnticorrelated::new(&MesonParams::b_meson());
        for lambda in [1.0, -1.0] {
            let (a, b) = m.outcomes(&HiddenVar::scalar(lambda), TimePair::new(1e-12, 5e-12).unwrap());
            assert_eq!(a, b.flip());
        }
    }

    #[test]
    fn demo_model_pairs_by_threshold() {
        let p = MesonParams::new("test", 1.0, 1.0).unwrap();
        let m = UnrestrictedDemoModel::new(p);
        let times = TimePair::new(PI / 2.0, 0.0).unwrap();
        let (a, b) = m.outcomes(&HiddenVar(vec![1.0, 0.49]), times);
        assert_eq!(a, b);
        let (a, b) = m.outcomes(&HiddenVar(vec![1.0, 0.51]), times);
        assert_eq!(a, b.flip());
        // equal times: always opposite
        let (a, b) = m.outcomes(&HiddenVar(vec![-1.0, 0.0]), TimePair::new(2.0, 2.0).unwrap());
        assert_eq!(a, b.flip());
    }
}
