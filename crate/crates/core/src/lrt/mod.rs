//! Local-realistic models of the meson pair.
//!
//! A *restricted* model has a hidden-variable density `rho(lambda)` that is
//! the same in every decay-time cell, a temporal density `eta(t_l, t_r)`, and
//! outcome functions `A(lambda, t_l)`, `B(lambda, t_r)` that only see their
//! own particle's decay time. [`RestrictedLrtModel`] encodes the last point in
//! its signatures: there is no way for `outcome_a` to observe `t_r`.
//!
//! [`OutcomeModel`] is the wider interface used by event generation and the
//! estimators. Every restricted model is an outcome model; the
//! [`UnrestrictedDemoModel`] is one too, but its outcomes depend on both
//! decay times and it reproduces the quantum correlation.

mod correlation;
mod diagnostics;
mod models;

use rand::RngCore;

use crate::density::TemporalDensity;
use crate::error::{Error, Result};
use crate::model::{Flavor, MesonParams, TimePair};
use crate::montecarlo::QmModel;

pub use correlation::{
    lrt_correlation_cell, lrt_correlation_delta, lrt_joint_probabilities, lrt_joint_probability, StripQuadrature,
};
pub use diagnostics::{
    check_homogeneity, check_marginal_factorization, check_model_homogeneity, FactorizationReport, HomogeneityReport,
    HomogeneitySpec,
};
pub use models::{ConstantAnticorrelated, OscillatingSign, UnrestrictedDemoModel};

/// Hidden variables drawn for one pair. The dimension is fixed per model.
#[derive(Debug, Clone, PartialEq)]
pub struct HiddenVar(pub Vec<f64>);

impl HiddenVar {
    pub fn scalar(x: f64) -> Self {
        Self(vec![x])
    }

    pub fn get(&self, k: usize) -> f64 {
        self.0[k]
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

/// A deterministic local-realistic model that is homogeneous in time and
/// whose outcomes are independent of the partner's decay time.
pub trait RestrictedLrtModel: Send + Sync {
    fn name(&self) -> &str;

    /// Draws `lambda` from `rho(lambda)`.
    fn sample_lambda(&self, rng: &mut dyn RngCore) -> HiddenVar;

    fn outcome_a(&self, lambda: &HiddenVar, t_l: f64) -> Flavor;

    fn outcome_b(&self, lambda: &HiddenVar, t_r: f64) -> Flavor;

    fn density(&self) -> &dyn TemporalDensity;
}

/// Anything that assigns a flavor pair to given decay times from a random draw.
pub trait OutcomeModel: Send + Sync {
    fn name(&self) -> &str;

    fn draw_hidden(&self, rng: &mut dyn RngCore) -> HiddenVar;

    fn outcomes(&self, lambda: &HiddenVar, times: TimePair) -> (Flavor, Flavor);

    fn density(&self) -> &dyn TemporalDensity;

    /// Whether the model satisfies both homogeneity and decay-time
    /// independence by construction.
    fn is_restricted(&self) -> bool;
}

impl<M: RestrictedLrtModel + ?Sized> OutcomeModel for M {
    fn name(&self) -> &str {
        RestrictedLrtModel::name(self)
    }

    fn draw_hidden(&self, rng: &mut dyn RngCore) -> HiddenVar {
        self.sample_lambda(rng)
    }

    fn outcomes(&self, lambda: &HiddenVar, times: TimePair) -> (Flavor, Flavor) {
        (self.outcome_a(lambda, times.t_l), self.outcome_b(lambda, times.t_r))
    }

    fn density(&self) -> &dyn TemporalDensity {
        RestrictedLrtModel::density(self)
    }

    fn is_restricted(&self) -> bool {
        true
    }
}

/// Names accepted by [`model_by_name`].
pub const MODEL_NAMES: [&str; 4] = ["qm", "const-anti", "osc-sign", "demo-qm"];

/// Looks up a model by its registry name. `"qm"` is the quantum sampler.
pub fn model_by_name(name: &str, params: &MesonParams) -> Result<Box<dyn OutcomeModel>> {
    match name {
        "qm" => Ok(Box::new(QmModel::new(params.clone()))),
        "const-anti" => Ok(Box::new(ConstantAnticorrelated::new(params))),
        "osc-sign" => Ok(Box::new(OscillatingSign::new(params))),
        "demo-qm" => Ok(Box::new(UnrestrictedDemoModel::new(params.clone()))),
        other => Err(Error::Config(format!(
            "unknown model '{other}' (known: {})",
            MODEL_NAMES.join(", ")
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Compile-time shape of the outcome functions: each sees one decay time.
    #[allow(dead_code)]
    fn outcome_signatures<M: RestrictedLrtModel>() {
        let _a: fn(&M, &HiddenVar, f64) -> Flavor = M::outcome_a;
        let _b: fn(&M, &HiddenVar, f64) -> Flavor = M::outcome_b;
    }

    #[test]
    fn registry_round_trip() {
        let p = MesonParams::b_meson();
        for name in MODEL_NAMES {
            assert_eq!(model_by_name(name, &p).unwrap().name(), name);
        }
        assert!(matches!(model_by_name("santos", &p), Err(Error::Config(_))));
        assert!(model_by_name("osc-sign", &p).unwrap().is_restricted());
        assert!(!model_by_name("demo-qm", &p).unwrap().is_restricted());
        assert!(!model_by_name("qm", &p).unwrap().is_restricted());
    }
}
