// R along the theta family against the loosened local bound, evaluated
// both in closed form and by quadrature over the strip density.
//
// `cargo run --example loosened_bound`

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use mesonbell::bell::{lrt_bound, lrt_bound_exponential, theta_scan, TimeQuadruple};
use mesonbell::io::{write_fig2, Metadata};
use mesonbell::model::eta_tilde;
use mesonbell::quadrature::QuadratureSpec;
use mesonbell::MesonParams;

pub fn run_example() -> mesonbell::Result<()> {
    let p = MesonParams::b_meson();
    let rows = theta_scan(&p, 0.0, FRAC_PI_2, 9)?;
    for r in &rows {
        println!("theta = {:.4}  R_qm = {:.4}  bound = {:.4}", r.theta, r.r_qm, r.bound);
    }

    let q = TimeQuadruple::theta_family(&p, FRAC_PI_4)?;
    let closed = lrt_bound_exponential(&p, &q);
    let numeric = lrt_bound(|t, dt| eta_tilde(&p, t, dt).unwrap_or(0.0), &q, &QuadratureSpec::default())?;
    println!("bound at pi/4: closed form {closed:.10}, quadrature {numeric:.10}");

    let mut csv = Vec::new();
    write_fig2(&mut csv, &rows, &Metadata::new("example").with("steps", rows.len()))?;
    println!("fig2 table:\n{}", String::from_utf8_lossy(&csv));
    Ok(())
}

#[allow(dead_code)]
fn main() -> mesonbell::Result<()> {
    run_example()
}
