use proptest::prelude::*;

use rotablue::core::estimator::direct_estimate;
use rotablue::core::recurrence::solve;
use rotablue::core::{estimate_series, CascadePattern, ModelParams, Tolerances};
use rotablue::simulate::{empirical_variance, generate_panel, PanelConfig};

fn params(p: &str, rho: f64) -> ModelParams {
    ModelParams::new(CascadePattern::parse(p).unwrap(), rho).unwrap()
}

#[test]
fn bias_vanishes_for_an_irregular_mean_path() {
    let pp = params("110011", 0.7);
    let s = solve(&pp, &Tolerances::default()).unwrap();
    let mut cfg = PanelConfig::new(pp, 80, 4000, 99);
    cfg.mu = (0..80)
        .map(|j| 3.0 * ((j * j) % 7) as f64 - 0.05 * j as f64)
        .collect();
    let r = empirical_variance(&cfg, &s).unwrap();
    assert!(r.bias_pass, "{r:?}");
    assert!(r.pass, "{r:?}");
}

#[test]
fn thread_count_does_not_change_the_report() {
    let pp = params("1101101", 0.5);
    let s = solve(&pp, &Tolerances::default()).unwrap();
    let cfg = PanelConfig::new(pp, 40, 300, 5);
    let a = empirical_variance(&cfg, &s).unwrap();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    let b = pool.install(|| empirical_variance(&cfg, &s).unwrap());
    assert_eq!(a, b);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn recursion_matches_direct_weights_on_simulated_paths(
        case in 0usize..4,
        rep in 0usize..1000,
        seed in any::<u64>(),
    ) {
        let (p, rho) = [("111111", 0.9), ("1101101", 0.5), ("110011", -0.7), ("1111000000001111", 0.9)][case];
        let pp = params(p, rho);
        let s = solve(&pp, &Tolerances::default()).unwrap();
        let cfg = PanelConfig::new(pp, 60, 100, seed);
        let data = generate_panel(&cfg, rep).values;
        let w = s.unroll_weights(s.truncation_length());
        let rec = estimate_series(&s, &data).unwrap();
        for (t, est) in rec.iter().enumerate() {
            prop_assert!((est - direct_estimate(&s, &w, &data, t)).abs() < 1e-9);
        }
    }
}
