#![allow(dead_code)]

/// Two-sided Kolmogorov–Smirnov distance between data and a continuous CDF.
pub fn ks_distance(values: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len() as f64;
    values
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let f = cdf(v);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Asymptotic KS critical distance at level 0.01.
pub fn ks_critical_01(n: usize) -> f64 {
    1.628 / (n as f64).sqrt()
}

pub fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Distance from the origin to the k-th point of a homogeneous Poisson
/// process of intensity `lambda` on `ℝ^m`, simulated in a box large enough
/// that the k-th point lies inside with overwhelming probability.
pub fn poisson_knn_distance(k: usize, lambda: f64, m: usize, rng: &mut impl rand::Rng) -> f64 {
    use rand_distr::{Distribution, Poisson};
    // Mean count 60 + 20k inside the inscribed ball.
    let ball = ggfit::specfun::unit_ball_volume(m).unwrap();
    let half = ((60.0 + 20.0 * k as f64) / (lambda * ball)).powf(1.0 / m as f64);
    let volume = (2.0 * half).powi(m as i32);
    let count = Poisson::new(lambda * volume).unwrap().sample(rng) as usize;
    let mut d2: Vec<f64> = (0..count)
        .map(|_| {
            (0..m)
                .map(|_| {
                    let x = rng.random_range(-half..half);
                    x * x
                })
                .sum()
        })
        .collect();
    let (_, kth, _) = d2.select_nth_unstable_by(k - 1, f64::total_cmp);
    let r = kth.sqrt();
    assert!(r < half, "box too small");
    r
}
