// Meson constants and the two feasibility thresholds.
//
// `cargo run --example constants`

use mesonbell::bell::{optimum_bound_for_ratio, p_threshold, x_threshold, QM_MAX};
use mesonbell::MesonParams;

pub fn run_example() -> mesonbell::Result<()> {
    let x_thr = x_threshold();
    println!("x threshold: {x_thr:.4}  p threshold: {:.6}", p_threshold());
    for p in [MesonParams::b_meson(), MesonParams::k_meson()] {
        let bound = optimum_bound_for_ratio(p.x());
        println!(
            "{}: dm = {:e} 1/s, gamma = {:e} 1/s, x = {:.3}, bound at optimum = {:.4} vs {:.4}",
            p.label,
            p.delta_m,
            p.gamma,
            p.x(),
            bound,
            QM_MAX
        );
        assert!(p.x() < x_thr && bound > QM_MAX);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> mesonbell::Result<()> {
    run_example()
}
