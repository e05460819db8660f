//! Shapiro–Wilk test (Royston's approximation, AS R94) and the study of the
//! normality of the null distribution of `T`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::RandomStream;
use crate::error::{Error, Result};
use crate::gof::simulate_null_statistics;

pub const MIN_SIZE: usize = 3;
pub const MAX_SIZE: usize = 5000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalityResult {
    pub w: f64,
    pub p_value: f64,
    pub n: usize,
}

// Polynomial coefficients, lowest order first.
const C1: [f64; 6] = [0.0, 0.221_157, -0.147_981, -2.071_190, 4.434_685, -2.706_056];
const C2: [f64; 6] = [0.0, 0.042_981, -0.293_762, -1.752_461, 5.682_633, -3.582_633];
const C3: [f64; 4] = [0.544, -0.399_78, 0.025_054, -6.714e-4];
const C4: [f64; 4] = [1.3822, -0.778_57, 0.062_767, -0.002_032_2];
const C5: [f64; 4] = [-1.5861, -0.310_82, -0.083_751, 0.003_891_5];
const C6: [f64; 3] = [-0.4803, -0.082_676, 0.003_030_2];
const G: [f64; 2] = [-2.273, 0.459];

fn poly(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ci| acc * x + ci)
}

/// Normal quantile (AS 111), the approximation used by the reference
/// implementation of the test; about seven significant digits.
fn ppnd(p: f64) -> f64 {
    let q = p - 0.5;
    if q.abs() <= 0.42 {
        let r = q * q;
        return q * (((-25.441_060_496_37 * r + 41.391_197_735_34) * r - 18.615_000_625_29) * r
            + 2.506_628_238_84)
            / ((((3.130_829_098_33 * r - 21.062_241_018_26) * r + 23.083_367_437_43) * r
                - 8.473_510_930_90)
                * r
                + 1.0);
    }
    let r = if q > 0.0 { 1.0 - p } else { p };
    if r <= 0.0 {
        return 0.0;
    }
    let r = (-r.ln()).sqrt();
    let value = (((2.321_212_768_58 * r + 4.850_141_271_35) * r - 2.297_964_791_34) * r
        - 2.787_189_311_38)
        / ((1.637_067_818_97 * r + 3.543_889_247_62) * r + 1.0);
    if q < 0.0 {
        -value
    } else {
        value
    }
}

fn normal_sf(z: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(z * FRAC_1_SQRT_2)
}

/// Coefficients for the upper half of the ordered sample, largest first.
fn coefficients(n: usize) -> Vec<f64> {
    let half = n / 2;
    if n == 3 {
        return vec![FRAC_1_SQRT_2];
    }
    let an25 = n as f64 + 0.25;
    let m: Vec<f64> = (0..half)
        .map(|i| ppnd((i as f64 + 1.0 - 0.375) / an25))
        .collect();
    let summ2 = 2.0 * m.iter().map(|v| v * v).sum::<f64>();
    let ssumm2 = summ2.sqrt();
    let rsn = 1.0 / (n as f64).sqrt();
    let a1 = poly(&C1, rsn) - m[0] / ssumm2;
    let mut a = vec![0.0; half];
    a[0] = a1;
    if n > 5 {
        let a2 = -m[1] / ssumm2 + poly(&C2, rsn);
        let fac = ((summ2 - 2.0 * m[0] * m[0] - 2.0 * m[1] * m[1])
            / (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2))
            .sqrt();
        a[1] = a2;
        for i in 2..half {
            a[i] = -m[i] / fac;
        }
    } else {
        let fac = ((summ2 - 2.0 * m[0] * m[0]) / (1.0 - 2.0 * a1 * a1)).sqrt();
        for i in 1..half {
            a[i] = -m[i] / fac;
        }
    }
    a
}

/// Shapiro–Wilk `W` and its upper-tail p-value; small `W` rejects normality.
pub fn shapiro_wilk(values: &[f64]) -> Result<NormalityResult> {
    let n = values.len();
    if !(MIN_SIZE..=MAX_SIZE).contains(&n) {
        return Err(Error::SampleSize {
            n,
            min: MIN_SIZE,
            max: MAX_SIZE,
        });
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidSample("non-finite value".into()));
    }
    let mut x = values.to_vec();
    x.sort_by(f64::total_cmp);
    let range = x[n - 1] - x[0];
    if !(range > 1e-19 * x[0].abs().max(x[n - 1].abs()).max(1.0)) {
        return Err(Error::Degenerate("all values are equal".into()));
    }
    let a = coefficients(n);
    let mean = x.iter().sum::<f64>() / n as f64;
    let ssq: f64 = x.iter().map(|v| ((v - mean) / range).powi(2)).sum();
    let numerator: f64 = a
        .iter()
        .enumerate()
        .map(|(i, ai)| ai * (x[n - 1 - i] - x[i]) / range)
        .sum();
    let w = (numerator * numerator / ssq).min(1.0);

    let p_value = if n == 3 {
        let stqr = PI / 3.0;
        ((6.0 / PI) * (w.sqrt().asin() - stqr)).max(0.0)
    } else {
        let y = (1.0 - w).ln();
        let an = n as f64;
        if n <= 11 {
            let gamma = poly(&G, an);
            if y >= gamma {
                1e-99
            } else {
                let y = -(gamma - y).ln();
                let mean = poly(&C3, an);
                let sd = poly(&C4, an).exp();
                normal_sf((y - mean) / sd)
            }
        } else {
            let ln_n = an.ln();
            let mean = poly(&C5, ln_n);
            let sd = poly(&C6, ln_n).exp();
            normal_sf((y - mean) / sd)
        }
    };
    Ok(NormalityResult {
        w,
        p_value: p_value.clamp(0.0, 1.0),
        n,
    })
}

/// For each of `repetitions` rounds, simulates `replicates` null statistics
/// `T_{N,k}(m, s)` and returns the Shapiro–Wilk p-value of each round.
pub fn normality_of_t(
    m: usize,
    s: f64,
    n: usize,
    k: usize,
    replicates: usize,
    repetitions: usize,
    stream: RandomStream,
) -> Result<Vec<f64>> {
    if replicates < MIN_SIZE {
        return Err(Error::SampleSize {
            n: replicates,
            min: MIN_SIZE,
            max: MAX_SIZE,
        });
    }
    (0..repetitions as u64)
        .into_par_iter()
        .map(|r| {
            let t = simulate_null_statistics(m, s, n, k, replicates, stream.derive(r))?;
            shapiro_wilk(&t).map(|res| res.p_value)
        })
        .collect()
}
