// Seeded quantum events, binned by time difference and compared with
// `-cos(dm dt)`, then written in the events/binned CSV formats.
//
// `cargo run --release --example simulate_events`

use mesonbell::io::{write_binned, write_events, Metadata};
use mesonbell::model::qm_correlation_delta;
use mesonbell::montecarlo::{bin_delta, generate_qm_events};
use mesonbell::MesonParams;

pub fn run_example() -> mesonbell::Result<()> {
    let p = MesonParams::b_meson();
    let batch = generate_qm_events(&p, 100_000, 7);
    let hist = bin_delta(&batch.records, 0.25 / p.gamma, 12.0 / p.gamma)?;

    let rows = hist.correlations();
    let mut within = 0;
    for row in rows.iter().take(12) {
        let expected = qm_correlation_delta(&p, row.dt_center);
        let pull = (row.estimate.value - expected) / row.estimate.stderr.max(1e-12);
        println!(
            "dt = {:.3e} s  C = {:+.4} +- {:.4}  (-cos: {:+.4}, pull {pull:+.2})",
            row.dt_center, row.estimate.value, row.estimate.stderr, expected
        );
        within += usize::from(pull.abs() < 5.0);
    }
    println!("{within} of {} listed bins within 5 stderr", rows.len().min(12));

    let meta = Metadata::new("example").with("seed", 7).with("n", batch.records.len());
    let dir = std::env::temp_dir();
    let events = dir.join("mesonbell_example.events.csv");
    write_events(std::fs::File::create(&events)?, &batch.records, &meta)?;
    write_binned(std::fs::File::create(dir.join("mesonbell_example.binned.csv"))?, &rows, &meta)?;
    println!("wrote {}", events.display());
    Ok(())
}

#[allow(dead_code)]
fn main() -> mesonbell::Result<()> {
    run_example()
}
