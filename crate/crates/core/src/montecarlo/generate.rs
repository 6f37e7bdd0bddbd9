use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::density::{ExponentialDensity, TemporalDensity};
use crate::error::{Error, Result};
use crate::lrt::{HiddenVar, OutcomeModel, RestrictedLrtModel};
use crate::model::{qm_flavor_probabilities, DecayRecord, Flavor, MesonParams, TimePair};
use crate::rng::par_chunks;

/// Provenance of an [`EventBatch`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchMeta {
    pub model_id: String,
    pub seed: u64,
    pub n: usize,
    pub params: MesonParams,
}

/// A batch of simulated pair decays.
#[derive(Debug, Clone, PartialEq)]
pub struct EventBatch {
    pub records: Vec<DecayRecord>,
    pub meta: BatchMeta,
}

/// Quantum sampler: decay times from `gamma^2 exp(-gamma (t_l + t_r))`,
/// then flavors from the conditional `p_ij = (1 - ij cos(dm dt)) / 4`.
#[derive(Debug, Clone)]
pub struct QmModel {
    params: MesonParams,
    density: ExponentialDensity,
}

impl QmModel {
    pub fn new(params: MesonParams) -> Self {
        let density = ExponentialDensity::from_params(&params);
        Self { params, density }
    }
}

impl OutcomeModel for QmModel {
    fn name(&self) -> &str {
        "qm"
    }

    fn draw_hidden(&self, rng: &mut dyn RngCore) -> HiddenVar {
        HiddenVar::scalar(rng.random::<f64>())
    }

    fn outcomes(&self, lambda: &HiddenVar, times: TimePair) -> (Flavor, Flavor) {
        let p = qm_flavor_probabilities(&self.params, times);
        let u = lambda.get(0);
        let mut acc = 0.0;
        for i in Flavor::ALL {
            for j in Flavor::ALL {
                acc += p[i.index()][j.index()];
                if u < acc {
                    return (i, j);
                }
            }
        }
        (Flavor::B0Bar, Flavor::B0Bar)
    }

    fn density(&self) -> &dyn TemporalDensity {
        &self.density
    }

    fn is_restricted(&self) -> bool {
        false
    }
}

/// Draws `n` events from `model`: decay times from its density, then one
/// hidden-variable draw mapped to a flavor pair.
///
/// Work is split into fixed chunks with their own random streams, so the
/// batch depends only on `(model, n, seed)` and not on the thread count.
pub fn generate_events<M: OutcomeModel + ?Sized>(
    model: &M,
    params: &MesonParams,
    n: usize,
    seed: u64,
) -> Result<EventBatch> {
    let density = model.density();
    {
        let mut probe = crate::rng::chunk_rng(seed, u64::MAX);
        if density.sample(&mut probe).is_none() {
            return Err(Error::Config(format!(
                "model '{}' has a temporal density without a sampler",
                model.name()
            )));
        }
    }
    let chunks = par_chunks(n, seed, |chunk, rng| {
        let mut out = Vec::with_capacity(chunk.len);
        for _ in 0..chunk.len {
            let times = density.sample(rng).expect("sampler checked above");
            let lambda = model.draw_hidden(rng);
            let (flavor_l, flavor_r) = model.outcomes(&lambda, times);
            out.push(DecayRecord {
                times,
                flavor_l,
                flavor_r,
            });
        }
        out
    });
    let records: Vec<DecayRecord> = chunks.into_iter().flatten().collect();
    Ok(EventBatch {
        meta: BatchMeta {
            model_id: model.name().to_string(),
            seed,
            n: records.len(),
            params: params.clone(),
        },
        records,
    })
}

/// Quantum-mechanical events for `params`.
pub fn generate_qm_events(params: &MesonParams, n: usize, seed: u64) -> EventBatch {
    generate_events(&QmModel::new(params.clone()), params, n, seed).expect("exponential density has a sampler")
}

/// Events from a restricted local-realistic model.
pub fn generate_lrt_events<M: RestrictedLrtModel + ?Sized>(
    model: &M,
    params: &MesonParams,
    n: usize,
    seed: u64,
) -> Result<EventBatch> {
    generate_events(model, params, n, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::FnDensity;
    use crate::lrt::{ConstantAnticorrelated, OscillatingSign};

    #[test]
    fn empty_batch() {
        let b = generate_qm_events(&MesonParams::b_meson(), 0, 1);
        assert!(b.records.is_empty());
        assert_eq!(b.meta.n, 0);
    }

    #[test]
    fn equal_times_are_opposite() {
        let p = MesonParams::b_meson();
        let b = generate_qm_events(&p, 200_000, 3);
        let near: Vec<_> = b
            .records
            .iter()
            .filter(|r| p.delta_m * r.times.delta_t() < 0.05)
            .collect();
        assert!(near.len() > 1000);
        let opposite = near.iter().filter(|r| r.product() == -1).count();
        // P(same) = (1 - cos x)/2 <= 3.2e-4 inside the window
        assert!(opposite as f64 / near.len() as f64 > 0.995);
    }

    #[test]
    fn lrt_batches_are_deterministic() {
        let p = MesonParams::b_meson();
        let m = OscillatingSign::new(&p);
        let a = generate_lrt_events(&m, &p, 40_000, 99).unwrap();
        let b = generate_lrt_events(&m, &p, 40_000, 99).unwrap();
        assert_eq!(a, b);
        let c = generate_lrt_events(&m, &p, 40_000, 100).unwrap();
        assert_ne!(a.records, c.records);
    }

    #[test]
    fn constant_model_never_agrees() {
        let p = MesonParams::b_meson();
        let b = generate_lrt_events(&ConstantAnticorrelated::new(&p), &p, 10_000, 5).unwrap();
        assert!(b.records.iter().all(|r| r.product() == -1));
    }

    struct NoSampler(FnDensity<fn(TimePair) -> f64>);

    impl RestrictedLrtModel for NoSampler {
        fn name(&self) -> &str {
            "no-sampler"
        }
        fn sample_lambda(&self, _rng: &mut dyn RngCore) -> HiddenVar {
            HiddenVar::scalar(0.0)
        }
        fn outcome_a(&self, _l: &HiddenVar, _t: f64) -> Flavor {
            Flavor::B0
        }
        fn outcome_b(&self, _l: &HiddenVar, _t: f64) -> Flavor {
            Flavor::B0Bar
        }
        fn density(&self) -> &dyn TemporalDensity {
            &self.0
        }
    }

    #[test]
    fn density_without_sampler_is_a_config_error() {
        let f: fn(TimePair) -> f64 = |_| 1.0;
        let m = NoSampler(FnDensity::new(f, 1.0));
        let err = generate_lrt_events(&m, &MesonParams::b_meson(), 10, 1).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }
}
