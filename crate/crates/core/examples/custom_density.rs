// The loosened bound for a user-supplied strip density. Densities that
// grow with time are rejected, since the bound relies on monotonicity.
//
// `cargo run --example custom_density`

use mesonbell::bell::{lrt_bound, TimeQuadruple};
use mesonbell::quadrature::QuadratureSpec;
use mesonbell::{Error, MesonParams};

pub fn run_example() -> mesonbell::Result<()> {
    let p = MesonParams::b_meson();
    let q = TimeQuadruple::qm_optimum(&p);
    let spec = QuadratureSpec::default();
    let g = p.gamma;

    // heavier tail than the exponential, same strip mass 1/2
    let lorentzian = move |t: f64, _dt: f64| g / std::f64::consts::PI / (1.0 + (g * t).powi(2));
    println!("lorentzian strip density: bound = {:.4}", lrt_bound(lorentzian, &q, &spec)?);

    let rising = move |t: f64, _dt: f64| g * (g * t).min(1.0);
    match lrt_bound(rising, &q, &spec) {
        Err(Error::ModelAssumption(msg)) => println!("rising density rejected: {msg}"),
        other => println!("unexpected: {other:?}"),
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> mesonbell::Result<()> {
    run_example()
}
