macro_rules! example {
    ($module:ident, $file:literal) => {
        #[allow(dead_code)]
        mod $module {
            include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/", $file));
        }
    };
}

example!(constants, "constants.rs");
example!(quantum_correlation, "quantum_correlation.rs");
example!(loosened_bound, "loosened_bound.rs");
example!(combination_search, "combination_search.rs");
example!(simulate_events, "simulate_events.rs");
example!(lrt_models, "lrt_models.rs");
example!(spacelike_fraction, "spacelike_fraction.rs");
example!(custom_density, "custom_density.rs");

#[test]
fn constants_runs() {
    constants::run_example().unwrap();
}

#[test]
fn quantum_correlation_runs() {
    quantum_correlation::run_example().unwrap();
}

#[test]
fn loosened_bound_runs() {
    loosened_bound::run_example().unwrap();
}

#[test]
fn combination_search_runs() {
    combination_search::run_example().unwrap();
}

#[test]
fn simulate_events_runs() {
    simulate_events::run_example().unwrap();
}

#[test]
fn lrt_models_runs() {
    lrt_models::run_example().unwrap();
}

#[test]
fn spacelike_fraction_runs() {
    spacelike_fraction::run_example().unwrap();
}

#[test]
fn custom_density_runs() {
    custom_density::run_example().unwrap();
}
