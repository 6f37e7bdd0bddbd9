// Random search over measurement times for a quantum R above the
// loosened bound. None exists for B mesons; at x = 20 one does.
//
// `cargo run --release --example combination_search`

use mesonbell::bell::combination_search;
use mesonbell::MesonParams;

pub fn run_example() -> mesonbell::Result<()> {
    for p in [MesonParams::b_meson(), MesonParams::from_ratio(20.0)?] {
        let found = combination_search(&p, 20_000, 42, (0.0, 10.0 / p.gamma))?;
        let q = found.argmax;
        println!(
            "{}: max R_qm - bound = {:+.4} at ({:.3}, {:.3}, {:.3}, {:.3}) lifetimes",
            p.label,
            found.max_margin,
            q.t1 * p.gamma,
            q.t1p * p.gamma,
            q.t2 * p.gamma,
            q.t2p * p.gamma
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> mesonbell::Result<()> {
    run_example()
}
