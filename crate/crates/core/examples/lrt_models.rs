// Local-realistic models: strip correlations and R against the loosened
// bound, and the homogeneity diagnostic telling restricted models from a
// model whose outcomes see both decay times.
//
// `cargo run --release --example lrt_models`

use mesonbell::bell::{lrt_bound_exponential, r_factor, TimeQuadruple};
use mesonbell::lrt::{
    check_model_homogeneity, lrt_correlation_delta, ConstantAnticorrelated, HomogeneitySpec, OscillatingSign,
    OutcomeModel, StripQuadrature, UnrestrictedDemoModel,
};
use mesonbell::rng::chunk_rng;
use mesonbell::MesonParams;

fn r_of(model: &dyn OutcomeModel, p: &MesonParams, q: &TimeQuadruple) -> mesonbell::Result<f64> {
    let quad = StripQuadrature::for_gamma(p.gamma);
    let mut values = [0.0; 4];
    for (v, dt) in values.iter_mut().zip(q.delta_ts()) {
        *v = lrt_correlation_delta(model, dt, 400, &quad, &mut chunk_rng(5, 0))?.value;
    }
    let by_dt = |dt: f64| values[q.delta_ts().iter().position(|&d| d == dt).expect("known dt")];
    Ok(r_factor(by_dt, q))
}

pub fn run_example() -> mesonbell::Result<()> {
    let p = MesonParams::b_meson();
    let q = TimeQuadruple::qm_optimum(&p);
    let models: Vec<Box<dyn OutcomeModel>> = vec![
        Box::new(ConstantAnticorrelated::new(&p)),
        Box::new(OscillatingSign::new(&p)),
        Box::new(UnrestrictedDemoModel::new(p.clone())),
    ];
    let spec = HomogeneitySpec::for_params(&p);
    for m in &models {
        let r = r_of(m.as_ref(), &p, &q)?;
        let h = check_model_homogeneity(m.as_ref(), &p, 200_000, 11, &spec)?;
        println!(
            "{:<10} R = {r:.3} (bound {:.3})  homogeneity: {} (chi2 {:.1}/{:.1}, chsh z {:.1}/{:.1})",
            m.name(),
            lrt_bound_exponential(&p, &q),
            if h.consistent { "consistent" } else { "violated" },
            h.statistic,
            h.chi2_critical,
            h.max_chsh_z,
            h.chsh_critical
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> mesonbell::Result<()> {
    run_example()
}
