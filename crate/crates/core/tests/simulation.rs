use covert_core::awgn::{achievability_schedule, AwgnChannel};
use covert_core::channel::families;
use covert_core::infodiv::pinsker_tv_bound;
use covert_core::lpd::{build_covert_input, solve_l};
use covert_core::reduce;
use covert_core::sim::{exact_detection_metrics, run_awgn_trial, run_dmc_trial, SimConfig};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn every_run_respects_the_budget(
        p in 0.01f64..0.45,
        n in 1u64..100_000,
        delta in 0.01f64..5.0,
        log_m in 0.7f64..40.0,
        seed in any::<u64>(),
    ) {
        let ch = reduce(&families::bsc(p).unwrap()).unwrap();
        let l = solve_l(&ch).unwrap();
        let spec = build_covert_input(&ch, &l, n, delta).unwrap();
        let cfg = SimConfig::new(n, delta, log_m, 20, seed).unwrap();
        let r = run_dmc_trial(&ch, &cfg, &spec).unwrap();
        prop_assert!(r.kl_spent <= delta);
        prop_assert!((0.0..=1.0).contains(&r.error_rate));
        let tv = r.tv_exact.unwrap();
        prop_assert!(tv <= pinsker_tv_bound(r.kl_spent).unwrap() + 1e-12);
    }
}

#[test]
fn reports_are_reproducible() {
    let ch = reduce(&families::ternary_cyclic()).unwrap();
    let l = solve_l(&ch).unwrap();
    let spec = build_covert_input(&ch, &l, 4000, 1.0).unwrap();
    let cfg = SimConfig::new(4000, 1.0, 20.0, 200, 99).unwrap();
    let a = run_dmc_trial(&ch, &cfg, &spec).unwrap();
    let b = run_dmc_trial(&ch, &cfg, &spec).unwrap();
    assert_eq!(
        serde_json::to_string(&a).unwrap(),
        serde_json::to_string(&b).unwrap()
    );
    let single = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    let c = single.install(|| run_dmc_trial(&ch, &cfg, &spec).unwrap());
    assert_eq!(
        serde_json::to_string(&a).unwrap(),
        serde_json::to_string(&c).unwrap()
    );
}

#[test]
fn two_messages_decode_reliably() {
    let ch = reduce(&families::bsc(0.11).unwrap()).unwrap();
    let l = solve_l(&ch).unwrap();
    let spec = build_covert_input(&ch, &l, 50_000, 1.0).unwrap();
    let cfg = SimConfig::with_message_count(50_000, 1.0, 2, 2000, 5).unwrap();
    let r = run_dmc_trial(&ch, &cfg, &spec).unwrap();
    assert!(r.error_rate < 0.01, "error rate {}", r.error_rate);
}

#[test]
fn detection_metrics_match_calibration() {
    let ch = reduce(&families::bsc(0.11).unwrap()).unwrap();
    let l = solve_l(&ch).unwrap();
    for &n in &[100u64, 10_000, 1_000_000] {
        let spec = build_covert_input(&ch, &l, n, 1.0).unwrap();
        let m = exact_detection_metrics(&ch, &spec).unwrap();
        assert!(m.kl <= 1.0 && m.kl > 1.0 - 1e-9);
        assert!(m.tv.unwrap() <= 0.5f64.sqrt());
    }
}

#[test]
fn awgn_density_variance_matches_closed_form() {
    let awgn = AwgnChannel::new(1.0).unwrap();
    let spec = achievability_schedule(100_000, 1.0, 1.0).unwrap();
    let cfg = SimConfig::new(100_000, 1.0, 0.8 * 100_000f64.sqrt(), 4000, 17).unwrap();
    let r = run_awgn_trial(&awgn, &cfg, &spec).unwrap();
    // var of a sample variance of near-Gaussian draws is about 2 s^4 / (N - 1)
    let se = (2.0 / 3999.0f64).sqrt() * spec.info_density_var;
    assert!((r.density_var - spec.info_density_var).abs() <= 3.0 * se);
    assert!(r.error_rate < 0.1);
    assert!(r.kl_spent <= 1.0);
}
