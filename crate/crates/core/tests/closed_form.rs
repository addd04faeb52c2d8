mod common;

use common::*;
use equidiv::{characteristic_roots, ruin_probability, Model, ModelParams};
use proptest::prelude::*;

fn sup_gap<F: Fn(f64) -> f64>(reference: &[f64], x_max: f64, f: F) -> f64 {
    let n = reference.len() - 1;
    reference
        .iter()
        .enumerate()
        .map(|(i, v)| (f(x_max * i as f64 / n as f64) - v).abs())
        .fold(0.0, f64::max)
}

fn check_against_bvp(p: &ModelParams, b: f64, tol: f64) {
    let model = Model::new(*p).unwrap();
    let (n, x_max) = cells_for(b, b + 10.0, oracle_spacing(p));
    let v1 = dividend_bvp(p, b, x_max).solve_extrapolated(n);
    let gap1 = sup_gap(&v1, x_max, |x| model.v1(x, b));
    assert!(gap1 < tol, "V1 gap {gap1:e} at b = {b}, {p:?}");
    let v2 = penalty_bvp(p, b, x_max).solve_extrapolated(n);
    let gap2 = sup_gap(&v2, x_max, |x| model.v2(x, b).unwrap());
    assert!(gap2 < tol, "V2 gap {gap2:e} at b = {b}, {p:?}");
}

#[test]
fn roots_match_textbook_formula() {
    let mut r = rng(1);
    for _ in 0..200 {
        let p = random_params(&mut r);
        let roots = characteristic_roots(&p);
        let paying = p.mu - p.lmax;
        let pairs = [
            ((roots.a1, roots.a2), naive_roots(p.sigma, p.mu, p.delta)),
            ((roots.b1, roots.b2), naive_roots(p.sigma, paying, p.delta)),
            ((roots.c1, roots.c2), naive_roots(p.sigma, p.mu, p.beta)),
            ((roots.d1, roots.d2), naive_roots(p.sigma, paying, p.beta)),
        ];
        for ((pos, neg), (npos, nneg)) in pairs {
            assert!((pos - npos).abs() <= 1e-9 * npos.abs().max(1.0));
            assert!((neg - nneg).abs() <= 1e-9 * nneg.abs().max(1.0));
        }
    }
}

#[test]
fn values_solve_the_boundary_value_problems() {
    let p = base_case();
    for b in [0.0, 0.5, 1.83141444456, 3.0] {
        check_against_bvp(&p, b, 1e-6);
    }
}

#[test]
fn ruin_probability_is_exponential_in_surplus() {
    for (x, l, mu, sigma) in [
        (1.0f64, 0.0, 2.0, 1.0),
        (0.3, 0.5, 1.0, 2.0),
        (4.0, 1.9, 2.0, 1.0),
    ] {
        let expected = (-2.0 * (mu - l) * x / (sigma * sigma)).exp();
        let got = ruin_probability(x, l, mu, sigma).unwrap();
        assert!((got - expected).abs() < 1e-14);
    }
    assert!(ruin_probability(1.0, 2.0, 2.0, 1.0).is_err());
}

#[test]
fn base_case_reference_values() {
    let model = Model::new(base_case()).unwrap();
    let b = 1.83141444456;
    assert!((model.laplace_w(1.0, b) - 0.018612).abs() < 1e-6);
    assert!((model.nu(0.0, 0.0, 1.0, b).unwrap() - 40.4929).abs() < 1e-4);
}

#[test]
fn x_bar_uses_lower_laplace_root() {
    let p = figure1();
    let model = Model::new(p).unwrap();
    let c2 = naive_roots(p.sigma, p.mu, p.beta).1;
    assert!((model.x_bar() - p.alpha.ln() / c2).abs() < 1e-12);
    // w(x, b) with b -> infinity is e^{c2 x}
    assert!((model.laplace_w(model.x_bar(), 60.0) - p.alpha).abs() < 1e-10);
}

#[test]
fn value_decomposition_and_time_shift() {
    let p = base_case();
    let model = Model::new(p).unwrap();
    let b = 1.4;
    for x in [0.0, 0.7, 1.4, 2.5] {
        let v2 = model.v2(x, b).unwrap();
        assert!((v2 - p.lambda * (model.laplace_w(x, b) - 1.0)).abs() < 1e-10);
        let nu = model.nu(0.0, 2.0, x, b).unwrap();
        let expected = (-p.delta * 2.0).exp() * model.v1(x, b)
            + (-p.beta * 2.0).exp() * v2
            + p.lambda * (1.0 - p.alpha);
        assert!((nu - expected).abs() < 1e-10);
    }
    assert_eq!(model.v1(0.0, b), 0.0);
    assert_eq!(model.laplace_w(0.0, b), 1.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_parameters_match_the_bvp(seed in 0u64..1_000_000, frac in 0.0f64..3.0) {
        let p = random_params(&mut rng(seed));
        let model = Model::new(p).unwrap();
        let b = frac * (model.classical_threshold() + 0.5);
        check_against_bvp(&p, b, 1e-6);
    }

    #[test]
    fn laplace_transform_is_a_probability_weight(
        seed in 0u64..1_000_000, x in 0.0f64..20.0, b in 0.0f64..10.0,
    ) {
        let model = Model::new(random_params(&mut rng(seed))).unwrap();
        let w = model.laplace_w(x, b);
        prop_assert!((0.0..=1.0).contains(&w));
        prop_assert!(model.laplace_w(x + 0.1, b) <= w + 1e-15);
    }

    #[test]
    fn dividend_value_is_bounded_and_increasing(
        seed in 0u64..1_000_000, x in 0.0f64..20.0, b in 0.0f64..10.0,
    ) {
        let p = random_params(&mut rng(seed));
        let model = Model::new(p).unwrap();
        let v = model.v1(x, b);
        prop_assert!(v >= 0.0 && v <= p.lmax / p.delta * (1.0 + 1e-12));
        prop_assert!(model.v1(x + 0.1, b) >= v - 1e-12);
    }
}
