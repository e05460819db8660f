#![allow(clippy::excessive_precision)]

use ggfit::specfun::{
    digamma, erlang_cdf, exp_integral_standard, gamma, gen_exp_integral, log_gamma, unit_ball_volume,
};
use proptest::prelude::*;

// ln Γ(x) and ψ(x) to 40 digits (mpmath).
const REFERENCE: [(f64, f64, f64); 8] = [
    (0.001, 6.907_178_885_383_853_682_5, -1_000.575_571_931_810_300_5),
    (0.1, 2.252_712_651_734_205_959_9, -10.423_754_940_411_076_795),
    (0.5, 0.572_364_942_924_700_087_07, -1.963_510_026_021_423_479_4),
    (1.5, -0.120_782_237_635_245_222_35, 0.036_489_973_978_576_520_559),
    (2.5, 0.284_682_870_472_919_159_63, 0.703_156_640_645_243_187_23),
    (7.3, 7.147_892_523_022_249_032_8, 1.917_820_335_637_986_098_4),
    (33.3, 82.603_723_581_654_952_928, 3.490_467_238_520_242_863_9),
    (1000.0, 5_905.220_423_209_181_211_8, 6.907_255_195_648_812_052),
];

#[test]
fn log_gamma_and_digamma_match_high_precision_values() {
    for (x, lg, psi) in REFERENCE {
        let got = log_gamma(x).unwrap();
        assert!(((got - lg) / lg).abs() <= 1e-12, "ln Γ({x}) = {got}, want {lg}");
        let got = digamma(x).unwrap();
        assert!((got - psi).abs() <= 1e-10, "ψ({x}) = {got}, want {psi}");
    }
}

#[test]
fn exponential_integral_matches_trapezoid_rule() {
    // Substituting t = z + u/(1-u) maps [z, ∞) onto [0, 1); the trapezoid
    // rule with 10⁶ panels then serves as an independent oracle.
    let panels = 1_000_000;
    for p in [1.0, 2.0, 3.0] {
        for z in [0.5, 1.0, 2.0] {
            let f = |u: f64| {
                if u >= 1.0 {
                    return 0.0;
                }
                let t = z + u / (1.0 - u);
                let jac = 1.0 / ((1.0 - u) * (1.0 - u));
                (-z * t).exp() * t.powf(-p) * jac
            };
            let h = 1.0 / panels as f64;
            let mut sum = 0.5 * (f(0.0) + f(1.0));
            for i in 1..panels {
                sum += f(i as f64 * h);
            }
            let oracle = z.powf(p - 1.0) * sum * h;
            let got = gen_exp_integral(p, z).unwrap();
            assert!((got - oracle).abs() <= 1e-6, "E_{p}({z}) = {got}, trapezoid {oracle}");
        }
    }
}

#[test]
fn both_exponential_integral_forms_agree_at_one() {
    for p in [0.5, 1.0, 2.0, 3.5] {
        let a = gen_exp_integral(p, 1.0).unwrap();
        let b = exp_integral_standard(p, 1.0).unwrap();
        assert!((a - b).abs() < 1e-12);
    }
    // They differ elsewhere.
    assert!((gen_exp_integral(2.0, 2.0).unwrap() - exp_integral_standard(2.0, 2.0).unwrap()).abs() > 1e-3);
}

#[test]
fn unit_ball_examples() {
    assert!((unit_ball_volume(2).unwrap() - std::f64::consts::PI).abs() < 1e-14);
    assert!((unit_ball_volume(3).unwrap() - 4.0 * std::f64::consts::PI / 3.0).abs() < 1e-14);
}

proptest! {
    #[test]
    fn log_gamma_matches_statrs(x in 1e-3f64..1e3) {
        let oracle = statrs::function::gamma::ln_gamma(x);
        let got = log_gamma(x).unwrap();
        prop_assert!((got - oracle).abs() <= 1e-12 * oracle.abs().max(1.0), "x={x}: {got} vs {oracle}");
    }

    #[test]
    fn digamma_matches_statrs(x in 1e-2f64..1e3) {
        let oracle = statrs::function::gamma::digamma(x);
        prop_assert!((digamma(x).unwrap() - oracle).abs() <= 1e-10);
    }

    #[test]
    fn gamma_recurrence(x in 0.01f64..50.0) {
        let lhs = gamma(x + 1.0).unwrap();
        let rhs = x * gamma(x).unwrap();
        prop_assert!(((lhs - rhs) / rhs).abs() < 1e-12);
    }

    #[test]
    fn digamma_recurrence(x in 0.01f64..100.0) {
        let lhs = digamma(x + 1.0).unwrap() - digamma(x).unwrap();
        prop_assert!((lhs - 1.0 / x).abs() < 1e-10);
    }

    #[test]
    fn erlang_is_monotone(k in 1usize..8, v in 0.0f64..30.0, dv in 0.0f64..5.0) {
        let a = erlang_cdf(k, v).unwrap();
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert!(erlang_cdf(k, v + dv).unwrap() >= a);
        prop_assert!(erlang_cdf(k + 1, v).unwrap() <= a);
    }
}
