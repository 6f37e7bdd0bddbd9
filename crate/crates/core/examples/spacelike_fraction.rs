// Fraction of space-like decay pairs against proper-time difference,
// under the invariant and the beam-axis criteria.
//
// `cargo run --release --example spacelike_fraction`

use mesonbell::kinematics::{
    ps_curve, spacelike_probability_full_exact, uniform_grid, BoostConfig, SeparationCriterion,
};
use mesonbell::MesonParams;

pub fn run_example() -> mesonbell::Result<()> {
    let p = MesonParams::b_meson();
    let config = BoostConfig::default();
    println!(
        "beta = {:.4}, gamma = {:.4}, pair-frame meson speed = {:.4}",
        config.beta,
        config.gamma(),
        config.meson_cm_speed
    );
    let grid = uniform_grid(1.0 / p.gamma, 6)?;
    for criterion in [SeparationCriterion::FullInterval, SeparationCriterion::LongitudinalProjection] {
        let curve = ps_curve(&config, &p, &grid, criterion, 20_000, 3)?;
        for row in &curve.rows {
            let exact = spacelike_probability_full_exact(config.meson_cm_speed, p.gamma, row.delta_t);
            println!(
                "{criterion:<12} dt = {:.3e} s  p_s = {:.4} +- {:.4}  (invariant closed form {exact:.4})",
                row.delta_t, row.p_s, row.stderr
            );
        }
        let s = curve.summary;
        println!(
            "{criterion}: min p_s over the Bell range {:.2e}..{:.2e} s is {:.4}, threshold {:.4} {}",
            s.required_range.0,
            s.required_range.1,
            s.min_p_s_in_range,
            s.threshold,
            if s.attainable { "attainable" } else { "not attainable" }
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> mesonbell::Result<()> {
    run_example()
}
