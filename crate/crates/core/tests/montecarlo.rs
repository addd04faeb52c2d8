mod common;

use common::*;
use equidiv::montecarlo::{
    martingale_check, perturbation_test, simulate_laplace, simulate_reward,
    simulate_ruin_probability, simulate_threshold, ConstantRate, SimConfig, ThresholdStrategy,
};
use equidiv::{match_constraint, ruin_probability, solve_threshold, Model};

fn config(x0: f64, paths: usize, horizon: f64, seed: u64) -> SimConfig {
    SimConfig {
        x0,
        t0: 0.0,
        dt: 2e-3,
        horizon,
        paths,
        seed,
        antithetic: false,
        bridge: true,
    }
}

#[test]
fn same_seed_same_estimate() {
    let model = Model::new(base_case()).unwrap();
    let cfg = config(1.0, 400, 5.0, 7);
    let a = simulate_threshold(1.8, &model, &cfg).unwrap();
    let b = simulate_threshold(1.8, &model, &cfg).unwrap();
    assert_eq!(a, b);
    let c = simulate_threshold(1.8, &model, &SimConfig { seed: 8, ..cfg }).unwrap();
    assert_ne!(a.reward.mean, c.reward.mean);
}

#[test]
fn joint_estimator_agrees_with_separate_ones() {
    let model = Model::new(base_case()).unwrap();
    let cfg = config(1.0, 300, 4.0, 3);
    let joint = simulate_threshold(1.8, &model, &cfg).unwrap();
    let strategy = ThresholdStrategy { b: 1.8, lmax: 1.9 };
    let reward = simulate_reward(&strategy, &model, &cfg).unwrap();
    let laplace = simulate_laplace(1.8, &model, &cfg).unwrap();
    assert!((joint.reward.mean - reward.mean).abs() < 1e-9);
    assert!((joint.laplace.mean - laplace.mean).abs() < 1e-12);
}

#[test]
fn ruin_probability_without_dividends() {
    let p = base_case();
    let model = Model::new(p).unwrap();
    let x0 = 0.5;
    let est = simulate_ruin_probability(0.0, &model, &config(x0, 20_000, 4.0, 1)).unwrap();
    let exact = ruin_probability(x0, 0.0, p.mu, p.sigma).unwrap();
    assert!(est.agrees_with(exact, 4.0), "{est:?} vs {exact}");
}

#[test]
fn laplace_transform_matches_closed_form() {
    let p = base_case();
    let model = Model::new(p).unwrap();
    let b = solve_threshold(&model).unwrap().b_star;
    let cfg = SimConfig {
        antithetic: true,
        ..config(0.8, 20_000, 25.0, 5)
    };
    let est = simulate_laplace(b, &model, &cfg).unwrap();
    let exact = model.laplace_w(0.8, b);
    assert!(est.agrees_with(exact, 4.0), "{est:?} vs {exact}");
}

#[test]
fn boundary_start_is_immediate_ruin() {
    let model = Model::new(base_case()).unwrap();
    let est = simulate_laplace(1.0, &model, &config(0.0, 10, 1.0, 0)).unwrap();
    assert_eq!(est.mean, 1.0);
    assert_eq!(est.n_ruined, 10);
}

#[test]
fn invalid_configs_are_rejected() {
    let model = Model::new(base_case()).unwrap();
    let bad = [
        SimConfig {
            dt: 0.0,
            ..config(1.0, 10, 1.0, 0)
        },
        SimConfig {
            horizon: 0.0,
            ..config(1.0, 10, 1.0, 0)
        },
        SimConfig {
            paths: 0,
            ..config(1.0, 10, 1.0, 0)
        },
        SimConfig {
            antithetic: true,
            ..config(1.0, 9, 1.0, 0)
        },
        SimConfig {
            x0: -1.0,
            ..config(1.0, 10, 1.0, 0)
        },
    ];
    for cfg in bad {
        assert!(
            simulate_ruin_probability(0.0, &model, &cfg).is_err(),
            "{cfg:?}"
        );
    }
}

#[test]
fn never_paying_early_does_not_beat_equilibrium_above_threshold() {
    let model = Model::new(base_case()).unwrap();
    let b = solve_threshold(&model).unwrap().b_star;
    let est = perturbation_test(
        &ConstantRate(0.0),
        0.1,
        &model,
        &config(2.0 * b, 4000, 8.0, 2),
    )
    .unwrap();
    assert!(est.mean >= -3.0 * est.stderr, "{est:?}");
}

#[test]
fn constraint_level_is_a_martingale() {
    let model = Model::new(figure1()).unwrap();
    let matched = match_constraint(1.2, &model, 0.01).unwrap();
    let est = martingale_check(
        &matched,
        &model,
        &[0.0, 0.5, 1.0],
        &config(0.0, 20_000, 1.0, 4),
    )
    .unwrap();
    assert!((est[0].mean - matched.w()).abs() < 1e-12);
    for e in &est[1..] {
        let se = (e.stderr.powi(2) + est[0].stderr.powi(2)).sqrt();
        assert!((e.mean - est[0].mean).abs() <= 4.0 * se + 1e-4, "{e:?}");
    }
}

#[test]
fn halving_dt_leaves_laplace_estimate_unchanged() {
    let model = Model::new(base_case()).unwrap();
    let b = solve_threshold(&model).unwrap().b_star;
    let coarse = SimConfig {
        dt: 2e-3,
        ..config(1.0, 20_000, 15.0, 21)
    };
    let fine = SimConfig { dt: 1e-3, ..coarse };
    let a = simulate_laplace(b, &model, &coarse).unwrap();
    let c = simulate_laplace(b, &model, &fine).unwrap();
    let se = (a.stderr.powi(2) + c.stderr.powi(2)).sqrt();
    assert!((a.mean - c.mean).abs() < 2.0 * se, "{a:?} vs {c:?}");
}

#[test]
fn antithetic_sampling_keeps_the_estimand() {
    let model = Model::new(base_case()).unwrap();
    let plain = config(1.0, 20_000, 3.0, 31);
    let anti = SimConfig {
        antithetic: true,
        seed: 32,
        ..plain
    };
    let a = simulate_ruin_probability(0.0, &model, &plain).unwrap();
    let c = simulate_ruin_probability(0.0, &model, &anti).unwrap();
    let se = (a.stderr.powi(2) + c.stderr.powi(2)).sqrt();
    assert!((a.mean - c.mean).abs() <= 3.0 * se);
}

#[test]
fn ruin_probability_falls_with_initial_surplus() {
    let p = base_case();
    let model = Model::new(p).unwrap();
    let mut last = 1.0;
    for x0 in [0.25, 0.5, 1.0] {
        let est = simulate_ruin_probability(0.0, &model, &config(x0, 5_000, 3.0, 41)).unwrap();
        assert!(est.mean <= last);
        last = est.mean;
    }
    let unit = simulate_ruin_probability(0.0, &model, &config(1.0, 40_000, 4.0, 42)).unwrap();
    assert!(unit.agrees_with((-4.0f64).exp(), 3.0), "{unit:?}");
}
