//! Estimator-level properties: gradient correctness of the training loss,
//! the one-sided (infimum) character of the estimates, and the aggregate
//! lower-bound chain.

use entroq_core::circuits::{ansatz_u3, param_shift_gradient_mixed, AnsatzSpec};
use entroq_core::divergence::{ft_divergence_exact, relative_entropy};
use entroq_core::quad::{grj_rule, FixedEnd, WeightKind};
use entroq_core::states::random_mixed_state;
use entroq_core::vqa::{estimate_ft, estimate_relative_entropy, exact_loss_at, FtConfig};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn training_loss_gradient_matches_finite_differences() {
    // The divergence loss mixes integer and half-integer frequencies, so
    // the four-term shift rule is the exact derivative; central finite
    // differences are the independent oracle.
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let u = ansatz_u3();
    let v = ansatz_u3();
    for case in 0..20 {
        let rho = random_mixed_state(1, 2, 1000 + case).unwrap();
        let sigma = random_mixed_state(1, 2, 2000 + case).unwrap();
        let t = rng.gen_range(0.05..1.0);
        let lambda: Vec<f64> = (0..2).map(|_| rng.gen_range(0.0..2.0)).collect();
        let joint: Vec<f64> = (0..6)
            .map(|_| rng.gen_range(0.0..std::f64::consts::TAU))
            .collect();
        let f = |x: &[f64]| {
            exact_loss_at(&rho, &sigma, &u, &v, t, Some(&lambda), &x[..3], &x[3..]).unwrap()
        };
        let shift = param_shift_gradient_mixed(f, &joint);
        let h = 1e-5;
        for k in 0..6 {
            let mut xp = joint.clone();
            let mut xm = joint.clone();
            xp[k] += h;
            xm[k] -= h;
            let fd = (f(&xp) - f(&xm)) / (2.0 * h);
            assert!(
                (shift[k] - fd).abs() <= 1e-6,
                "case {case} param {k}: shift {} vs fd {}",
                shift[k],
                fd
            );
        }
    }
}

#[test]
fn estimate_never_undershoots_the_infimum() {
    // Any trained value upper-bounds the exact divergence in exact mode.
    for seed in 0..5u64 {
        let rho = random_mixed_state(1, 2, 1300 + seed).unwrap();
        let sigma = random_mixed_state(1, 2, 1400 + seed).unwrap();
        let mut config = FtConfig::exact_defaults(1, seed);
        config.iterations = 80;
        for &t in &[0.25, 0.75, 1.0] {
            let r = estimate_ft(&rho, &sigma, t, &config).unwrap();
            let exact = ft_divergence_exact(&rho, &sigma, t).unwrap().value;
            assert!(
                r.value >= exact - 1e-6,
                "seed {seed} t {t}: {} < {exact}",
                r.value
            );
        }
    }
}

#[test]
fn aggregate_with_zero_node_never_exceeds_oracle() {
    // Estimated relative entropy with the fixed node at 0 stays below the
    // exact value (up to numerical slack) because each node overshoots a
    // negative contribution.
    let rho = random_mixed_state(1, 2, 1002).unwrap();
    let sigma = random_mixed_state(1, 2, 2002).unwrap();
    let exact = relative_entropy(&rho, &sigma).unwrap().value;
    let mut config = FtConfig::exact_defaults(1, 5);
    config.iterations = 150;
    config.restarts = 2;
    let rule = grj_rule(4, FixedEnd::Zero, WeightKind::Uniform).unwrap();
    let report = estimate_relative_entropy(&rho, &sigma, &config, &rule).unwrap();
    assert!(
        report.aggregate <= exact + 0.02,
        "aggregate {} exceeds oracle {exact}",
        report.aggregate
    );
}

#[test]
fn one_qubit_chain_reproduces_oracles() {
    // Reduced-size end-to-end smoke test; the acceptance suite runs the
    // full configuration.
    let rho = random_mixed_state(1, 2, 1002).unwrap();
    let sigma = random_mixed_state(1, 2, 2002).unwrap();
    let exact = relative_entropy(&rho, &sigma).unwrap().value;
    let mut config = FtConfig::exact_defaults(1, 7);
    config.restarts = 2;
    let rule = grj_rule(6, FixedEnd::One, WeightKind::Uniform).unwrap();
    let report = estimate_relative_entropy(&rho, &sigma, &config, &rule).unwrap();
    let rel = (report.aggregate - exact).abs() / exact;
    assert!(rel <= 0.05, "relative error {:.3}%", rel * 100.0);
}

#[test]
fn shot_mode_stays_close_to_exact_mode() {
    let rho = random_mixed_state(1, 2, 1006).unwrap();
    let sigma = random_mixed_state(1, 2, 2006).unwrap();
    let mut config = FtConfig::exact_defaults(1, 3);
    config.iterations = 150;
    let exact_run = estimate_ft(&rho, &sigma, 0.5, &config).unwrap();
    config.shots = 10_000;
    let shot_run = estimate_ft(&rho, &sigma, 0.5, &config).unwrap();
    assert!(
        (shot_run.value - exact_run.value).abs() <= 0.15,
        "exact {} vs shots {}",
        exact_run.value,
        shot_run.value
    );
}

#[test]
fn two_qubit_ansatz_dimensions_guarded() {
    let rho = random_mixed_state(2, 4, 11).unwrap();
    let sigma = random_mixed_state(2, 4, 12).unwrap();
    let mut config = FtConfig::exact_defaults(2, 1);
    config.u_ansatz = AnsatzSpec::U3;
    config.iterations = 3;
    assert!(estimate_ft(&rho, &sigma, 0.5, &config).is_err());
}
