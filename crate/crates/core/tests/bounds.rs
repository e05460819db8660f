use std::f64::consts::{E, PI};

use ggfit::bounds::{
    bounds_log_concave, covariance_constant, covariance_constant_general, covariance_constant_unconditional,
    lower_bound_bounded, lower_bound_covariance, lower_bound_moment, lower_bound_symmetric_1d,
    pathological_ball_constant, pathological_ball_mass, pathological_mass, pathological_mean,
    pathological_truncated_entropy, DensitySummary,
};
use ggfit::distributions::max_entropy_bound;
use ggfit::specfun::exp_integral_standard;
use ggfit::{Error, GGParams};

const H_NORMAL: f64 = 1.418_938_533_204_672_7;

fn gg_summary(p: &GGParams) -> DensitySummary {
    let m = p.dim;
    let var = p.coordinate_sd().powi(2);
    let mut cov = vec![0.0; m * m];
    for i in 0..m {
        cov[i * m + i] = var;
    }
    let mut summary = DensitySummary::new(m, p.log_normalizer().exp())
        .unwrap()
        .log_concave()
        .symmetric()
        .unconditional()
        .with_covariance(cov)
        .unwrap();
    for q in [-0.5, 0.5, 1.0, 2.0, 3.0] {
        if q > -(m as f64) {
            summary = summary.with_moment_norm(q, p.abs_moment(q).unwrap().powf(1.0 / q));
        }
    }
    summary
}

#[test]
fn bounded_density_examples() {
    let normal = DensitySummary::new(1, 1.0 / (2.0 * PI).sqrt()).unwrap();
    assert!((lower_bound_bounded(&normal) - 0.918_938_5).abs() < 1e-7);
    let uniform = DensitySummary::new(1, 1.0).unwrap();
    assert_eq!(lower_bound_bounded(&uniform), 0.0);
    let laplace = DensitySummary::new(1, 0.5).unwrap();
    assert!((lower_bound_bounded(&laplace) - 2f64.ln()).abs() < 1e-15);
}

#[test]
fn log_concave_interval_examples() {
    let normal = DensitySummary::new(1, 1.0 / (2.0 * PI).sqrt()).unwrap().log_concave();
    let (lo, hi) = bounds_log_concave(&normal).unwrap();
    assert!(lo <= H_NORMAL && H_NORMAL <= hi);
    assert!((hi - 1.918_938_5).abs() < 1e-7);
    // The Laplace law sits on the upper end.
    let laplace = DensitySummary::new(1, 0.5).unwrap().log_concave();
    let (_, hi) = bounds_log_concave(&laplace).unwrap();
    assert!((hi - (1.0 + 2f64.ln())).abs() < 1e-15);
    let gauss2 = GGParams::isotropic(2, 2.0).unwrap();
    let (lo, hi) = bounds_log_concave(&gg_summary(&gauss2)).unwrap();
    assert!(lo <= gauss2.entropy() && gauss2.entropy() <= hi);
    assert!(matches!(bounds_log_concave(&DensitySummary::new(1, 1.0).unwrap()), Err(Error::Precondition(_))));
}

#[test]
fn moment_bound_examples() {
    let normal = DensitySummary::new(1, 1.0 / (2.0 * PI).sqrt()).unwrap().log_concave().with_moment_norm(2.0, 1.0);
    let b = lower_bound_moment(&normal, 2.0).unwrap();
    assert!((b - 2f64.sqrt().ln()).abs() < 1e-12);
    let laplace = DensitySummary::new(1, 0.5).unwrap().log_concave().with_moment_norm(1.0, 1.0);
    assert!((lower_bound_moment(&laplace, 1.0).unwrap() - 2f64.ln()).abs() < 1e-12);
    assert!(matches!(lower_bound_moment(&laplace, 0.5), Err(Error::Precondition(_))));
    assert!(matches!(lower_bound_moment(&laplace, 3.0), Err(Error::Precondition(_))));
    let symmetric = laplace.clone().symmetric().with_moment_norm(-0.5, 0.3);
    assert!(lower_bound_symmetric_1d(&symmetric, -0.5).is_ok());
    assert!(matches!(lower_bound_symmetric_1d(&symmetric, -1.0), Err(Error::Precondition(_))));
}

#[test]
fn covariance_constants() {
    assert!((covariance_constant_general(1) - E * E / (12.0 * 2f64.sqrt())).abs() < 1e-15);
    assert!((covariance_constant_general(1) - 0.4354).abs() < 1e-4);
    assert!((covariance_constant_unconditional() - 3.694_528).abs() < 1e-6);
    let better: Vec<usize> =
        (1..=20).filter(|&m| covariance_constant_general(m) > covariance_constant_unconditional()).collect();
    assert_eq!(better.first(), Some(&5));
    assert_eq!(better.len(), 16);
    // m²/(4√2(m+2)) > 1/2 evaluated directly.
    assert!(16.0 / (4.0 * 2f64.sqrt() * 6.0) < 0.5);
    assert!(25.0 / (4.0 * 2f64.sqrt() * 7.0) > 0.5);
    let s5 = DensitySummary::new(5, 1.0).unwrap().unconditional();
    assert_eq!(covariance_constant(&s5), covariance_constant_unconditional());
    let s4 = DensitySummary::new(4, 1.0).unwrap().unconditional();
    assert_eq!(covariance_constant(&s4), covariance_constant_general(4));
    let plain = DensitySummary::new(6, 1.0).unwrap();
    assert_eq!(covariance_constant(&plain), covariance_constant_general(6));
    assert!(matches!(lower_bound_covariance(&plain), Err(Error::Precondition(_))));
}

#[test]
fn every_bound_sits_below_the_gg_entropy() {
    let mut checked = 0;
    for m in 1..=3 {
        for s in [1.0, 1.5, 2.0, 4.0] {
            let p = GGParams::isotropic(m, s).unwrap();
            let h = p.entropy();
            let summary = gg_summary(&p);
            let (lo, hi) = bounds_log_concave(&summary).unwrap();
            assert!(lower_bound_bounded(&summary) <= h && lo <= h && h <= hi + 1e-12, "m={m} s={s}");
            for q in [1.0, 2.0, 3.0] {
                assert!(lower_bound_moment(&summary, q).unwrap() <= h, "m={m} s={s} p={q}");
            }
            if m == 1 {
                for q in [-0.5, 0.5, 1.0, 2.0, 3.0] {
                    assert!(lower_bound_symmetric_1d(&summary, q).unwrap() <= h, "s={s} p={q}");
                }
            }
            assert!(lower_bound_covariance(&summary).unwrap() <= h, "m={m} s={s}");
            assert!((max_entropy_bound(m, s, p.moment()).unwrap() - h).abs() < 1e-12);
            checked += 1;
        }
    }
    assert_eq!(checked, 12);
}

#[test]
fn pathological_density() {
    let mean = pathological_mean().unwrap();
    assert!((mean - 0.40365).abs() < 1e-4);
    // The numeric value is e·E₂(1) under the standard definition.
    assert!((mean - E * exp_integral_standard(2.0, 1.0).unwrap()).abs() < 1e-10);
    let bound = max_entropy_bound(1, 1.0, mean).unwrap();
    assert!((bound - 0.785_95).abs() < 1e-4);
    let eps = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6];
    let h: Vec<f64> = eps.iter().map(|&e| pathological_truncated_entropy(e).unwrap()).collect();
    assert!(h.windows(2).all(|w| w[1] < w[0]), "{h:?}");
    // Exact mass on [ε, 1] is 1 - 1/(1 - ln ε).
    for &e in &eps {
        assert!((pathological_mass(e).unwrap() - (1.0 - 1.0 / (1.0 - e.ln()))).abs() < 1e-12);
    }
    assert!(matches!(pathological_truncated_entropy(0.0), Err(Error::Domain(_))));
    assert!(matches!(pathological_truncated_entropy(1.0), Err(Error::Domain(_))));
}

#[test]
fn multivariate_pathological_density_is_normalized() {
    for m in 2..=5 {
        assert!((pathological_ball_mass(m).unwrap() - 1.0).abs() < 1e-6, "m={m}");
    }
    assert!((pathological_ball_constant(2).unwrap() - 1.0 / (2.0 * PI)).abs() < 1e-14);
}
