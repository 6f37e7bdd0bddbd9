use std::f64::consts::SQRT_2;

use proptest::prelude::*;

use mesonbell::bell::{
    lrt_bound, lrt_bound_exponential, mixed_bound, r_factor_qm, TimeQuadruple, QM_MAX,
};
use mesonbell::kinematics::{
    classify_separation, sample_pair_events, separation_discriminant, BoostConfig, FourEvent, Separation,
    SeparationCriterion, SpacelikeEstimate,
};
use mesonbell::model::{
    correlation_from_joint_rates, eta_exponential, eta_tilde, qm_correlation, qm_flavor_probabilities,
    qm_joint_rate,
};
use mesonbell::montecarlo::{bin_cells, bin_delta, estimate_correlation, generate_qm_events, FlavorCounts};
use mesonbell::quadrature::{integrate, QuadratureSpec};
use mesonbell::rng::{chunk_rng, with_threads};
use mesonbell::{Flavor, MesonParams, TimePair};

fn b() -> MesonParams {
    MesonParams::b_meson()
}

fn lifetimes(max: f64) -> impl Strategy<Value = f64> {
    (0.0..max).prop_map(|t| t / MesonParams::b_meson().gamma)
}

fn quadruple() -> impl Strategy<Value = TimeQuadruple> {
    (lifetimes(10.0), lifetimes(10.0), lifetimes(10.0), lifetimes(10.0))
        .prop_map(|(a, b, c, d)| TimeQuadruple::new(a, b, c, d).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn quantum_r_never_exceeds_tsirelson(q in quadruple()) {
        prop_assert!(r_factor_qm(&b(), &q) <= QM_MAX + 1e-12);
    }

    #[test]
    fn full_interval_is_boost_invariant(
        seed in any::<u64>(),
        speed in 0.0..0.99f64,
        theta in 0.0..std::f64::consts::PI,
        phi in 0.0..std::f64::consts::TAU,
    ) {
        let p = b();
        let (e1, e2) = sample_pair_events(&BoostConfig::default(), &p, None, &mut chunk_rng(seed, 0));
        let beta = [speed * theta.sin() * phi.cos(), speed * theta.sin() * phi.sin(), speed * theta.cos()];
        let (b1, b2) = (e1.boosted(beta), e2.boosted(beta));
        let full = SeparationCriterion::FullInterval;
        let (d0, s0) = separation_discriminant(&e1, &e2, full);
        let (d1, s1) = separation_discriminant(&b1, &b2, full);
        prop_assert!((d0 - d1).abs() <= 1e-9 * s0.max(s1));
        if d0.abs() > 1e-9 * s0.max(s1) {
            prop_assert_eq!(classify_separation(&e1, &e2, full), classify_separation(&b1, &b2, full));
        }
    }
}

proptest! {
    #[test]
    fn correlation_depends_only_on_difference(t in lifetimes(10.0), u in lifetimes(10.0), shift in lifetimes(5.0)) {
        let p = b();
        let c = qm_correlation(&p, TimePair::new(t, u).unwrap());
        prop_assert_eq!(c, qm_correlation(&p, TimePair::new(u, t).unwrap()));
        let shifted = qm_correlation(&p, TimePair::new(t + shift, u + shift).unwrap());
        prop_assert!((c - shifted).abs() < 1e-9);
        prop_assert!((-1.0..=1.0).contains(&c));
    }

    #[test]
    fn joint_rates_reproduce_correlation_and_density(t in lifetimes(10.0), u in lifetimes(10.0)) {
        let p = b();
        let times = TimePair::new(t, u).unwrap();
        let sum: f64 = Flavor::ALL.iter()
            .flat_map(|&i| Flavor::ALL.iter().map(move |&j| (i, j)))
            .map(|(i, j)| qm_joint_rate(&p, i, j, times))
            .sum();
        let eta = eta_exponential(&p, times);
        prop_assert!((sum - eta).abs() <= 1e-12 * eta);
        if eta > 0.0 {
            prop_assert!((correlation_from_joint_rates(&p, times) - qm_correlation(&p, times)).abs() < 1e-12);
        }
        let probs: f64 = qm_flavor_probabilities(&p, times).iter().flatten().sum();
        prop_assert!((probs - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bound_closed_form_matches_quadrature(q in quadruple()) {
        let p = b();
        let numeric = lrt_bound(|t, dt| eta_tilde(&p, t, dt).unwrap_or(0.0), &q, &QuadratureSpec::default()).unwrap();
        prop_assert!((numeric - lrt_bound_exponential(&p, &q)).abs() <= 1e-9);
    }

    #[test]
    fn bound_lies_between_two_and_four(q in quadruple()) {
        let v = lrt_bound_exponential(&b(), &q);
        prop_assert!((2.0..=4.0).contains(&v));
    }

    #[test]
    fn local_correlations_stay_within_two(values in proptest::array::uniform4(prop_oneof![Just(-1.0), Just(1.0)])) {
        // deterministic +-1 outcomes A(t1), A(t2), B(t1'), B(t2') for one lambda
        let [a1, a2, b1, b2] = values;
        let table = [a1 * b1, a1 * b2, a2 * b1, -a2 * b2];
        let r: f64 = table.iter().sum::<f64>().abs();
        prop_assert!(r <= 2.0);
    }

    #[test]
    fn mixed_bound_is_linear(p in 0.0..=1.0f64) {
        let m = mixed_bound(p).unwrap();
        prop_assert!((m - (2.0 * p + 4.0 * (1.0 - p))).abs() < 1e-12);
        if p > 2.0 - SQRT_2 + 1e-12 {
            prop_assert!(m < 2.0 * SQRT_2);
        }
    }

    #[test]
    fn estimate_is_a_bounded_correlation(pp in 0u64..500, pm in 0u64..500, mp in 0u64..500, mm in 0u64..500) {
        let counts = FlavorCounts::from_counts(pp, pm, mp, mm);
        match estimate_correlation(&counts) {
            Ok(e) => {
                let n = (pp + pm + mp + mm) as f64;
                prop_assert!((e.value - ((pp + mm) as f64 - (pm + mp) as f64) / n).abs() < 1e-12);
                prop_assert!((-1.0..=1.0).contains(&e.value));
                prop_assert!((e.stderr - ((1.0 - e.value * e.value) / n).sqrt()).abs() < 1e-12);
            }
            Err(_) => prop_assert_eq!(pp + pm + mp + mm, 0),
        }
    }

    #[test]
    fn binning_conserves_records(seed in any::<u64>(), n in 0usize..3000, width in 0.05..1.0f64, extent in 0.5..8.0f64) {
        let p = b();
        let batch = generate_qm_events(&p, n, seed);
        let grid = bin_cells(&batch.records, width / p.gamma, extent / p.gamma).unwrap();
        prop_assert_eq!(grid.total() + grid.overflow(), n as u64);
        let hist = bin_delta(&batch.records, width / p.gamma, extent / p.gamma).unwrap();
        prop_assert_eq!(hist.total() + hist.overflow(), n as u64);
    }

    #[test]
    fn histogram_merge_equals_binning_the_union(seed in any::<u64>(), n1 in 0usize..2000, n2 in 0usize..2000) {
        let p = b();
        let (w, e) = (0.2 / p.gamma, 6.0 / p.gamma);
        let a = generate_qm_events(&p, n1, seed).records;
        let c = generate_qm_events(&p, n2, seed ^ 1).records;
        let mut merged = bin_delta(&a, w, e).unwrap();
        merged.merge(&bin_delta(&c, w, e).unwrap()).unwrap();
        let union: Vec<_> = a.iter().chain(&c).cloned().collect();
        prop_assert_eq!(merged, bin_delta(&union, w, e).unwrap());
    }

    #[test]
    fn longitudinal_never_exceeds_full(seed in any::<u64>(), beta in 0.0..0.99f64, u in 0.0..0.9f64, dt in lifetimes(3.0)) {
        let cfg = BoostConfig::new(beta, u).unwrap();
        let (e1, e2) = sample_pair_events(&cfg, &b(), Some(dt), &mut chunk_rng(seed, 0));
        let full = classify_separation(&e1, &e2, SeparationCriterion::FullInterval);
        let lon = classify_separation(&e1, &e2, SeparationCriterion::LongitudinalProjection);
        if lon == Separation::Spacelike {
            prop_assert_eq!(full, Separation::Spacelike);
        }
    }

    #[test]
    fn decay_times_grow_with_proper_time(vx in -0.5..0.5f64, vz in -0.5..0.5f64, tau in lifetimes(5.0), extra in lifetimes(5.0)) {
        let early = FourEvent::on_worldline([vx, 0.0, vz], tau);
        let late = FourEvent::on_worldline([vx, 0.0, vz], tau + extra);
        prop_assert!(late.t >= early.t);
        prop_assert!(late.boosted([0.0, 0.0, -0.39]).t >= early.boosted([0.0, 0.0, -0.39]).t);
    }

    #[test]
    fn spacelike_merge_is_associative(a in 0u64..100, b_ in 0u64..100, c in 0u64..100) {
        let e = |k: u64| SpacelikeEstimate::from_counts(k / 2, k);
        prop_assert_eq!(e(a).merge(&e(b_)).merge(&e(c)), e(a).merge(&e(b_).merge(&e(c))));
    }

    #[test]
    fn quadrature_matches_exponential_integral(rate in 0.1..20.0f64, upper in 0.01..10.0f64) {
        let v = integrate(|t| (-rate * t).exp(), 0.0, upper, &QuadratureSpec::default()).unwrap();
        let exact = (1.0 - (-rate * upper).exp()) / rate;
        prop_assert!((v.value - exact).abs() <= 1e-9 * exact);
    }
}

#[test]
fn event_generation_ignores_thread_count() {
    let p = b();
    let one = with_threads(Some(1), || generate_qm_events(&p, 50_000, 3)).unwrap();
    let many = with_threads(Some(4), || generate_qm_events(&p, 50_000, 3)).unwrap();
    assert_eq!(one, many);
}
