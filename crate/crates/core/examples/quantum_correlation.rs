// The quantum correlation, joint decay rates and the strip density.
//
// `cargo run --example quantum_correlation`

use std::f64::consts::PI;

use mesonbell::model::{
    correlation_from_joint_rates, eta_tilde, n_of_delta, qm_correlation, qm_joint_rate, self_check,
};
use mesonbell::{Flavor, MesonParams, TimePair};

pub fn run_example() -> mesonbell::Result<()> {
    let p = MesonParams::b_meson();
    self_check(&p)?;

    for phase in [0.0, PI / 4.0, PI / 2.0, PI] {
        let times = TimePair::new(phase / p.delta_m, 0.0)?;
        println!(
            "dm dt = {phase:.4}: C = {:+.5}, from rates = {:+.5}",
            qm_correlation(&p, times),
            correlation_from_joint_rates(&p, times)
        );
    }

    let origin = TimePair::new(0.0, 0.0)?;
    println!("rate(B0, B0bar) at the origin: {:e} 1/s^2", qm_joint_rate(&p, Flavor::B0, Flavor::B0Bar, origin));
    println!("rate(B0, B0) at the origin:    {:e} 1/s^2", qm_joint_rate(&p, Flavor::B0, Flavor::B0, origin));

    let dt = 1.0 / p.gamma;
    println!("N(1/gamma) = {:e} 1/s, eta~(0; 1/gamma) = {:e} 1/s", n_of_delta(&p, dt)?, eta_tilde(&p, 0.0, dt)?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> mesonbell::Result<()> {
    run_example()
}
