//! Special functions: log-gamma, digamma, unit-ball volume, the generalized
//! exponential integral and the Erlang distribution function.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quadrature::{integrate_to_infinity, Tolerance};

/// Euler–Mascheroni constant, `γ = -ψ(1)`.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_606_512_090_082;

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_741_780_329_736_406;

// ζ(k) - 1 for k = 2..=30.
const ZETA_MINUS_ONE: [f64; 29] = [
    0.644_934_066_848_226_436_47,
    0.202_056_903_159_594_285_4,
    0.082_323_233_711_138_191_516,
    0.036_927_755_143_369_926_331,
    0.017_343_061_984_449_139_715,
    0.008_349_277_381_922_826_839_8,
    0.004_077_356_197_944_339_378_7,
    0.002_008_392_826_082_214_417_9,
    0.000_994_575_127_818_085_337_15,
    0.000_494_188_604_119_464_558_7,
    0.000_246_086_553_308_048_298_64,
    0.000_122_713_347_578_489_146_75,
    0.000_061_248_135_058_704_829_259,
    0.000_030_588_236_307_020_493_552,
    0.000_015_282_259_408_651_871_733,
    7.637_197_637_899_762_273_6e-6,
    3.817_293_264_999_839_856_5e-6,
    1.908_212_716_553_938_925_7e-6,
    9.539_620_338_727_961_131_5e-7,
    4.769_329_867_878_064_631_2e-7,
    2.384_505_027_277_329_9e-7,
    1.192_199_259_653_110_730_7e-7,
    5.960_818_905_125_947_961_2e-8,
    2.980_350_351_465_228_018_6e-8,
    1.490_155_482_836_504_123_5e-8,
    7.450_711_789_835_429_492e-9,
    3.725_334_024_788_457_054_8e-9,
    1.862_659_723_513_049_006_4e-9,
    9.313_274_324_196_681_828_7e-10,
];

/// `ln Γ(2 + ε)` for `|ε| <= 0.5`, from the ζ-series around 2.
fn log_gamma_two_plus(eps: f64) -> f64 {
    let mut sum = 0.0;
    let mut power = -eps;
    for (j, z) in ZETA_MINUS_ONE.iter().enumerate() {
        power *= -eps;
        sum += z * power / (j + 2) as f64;
    }
    eps * (1.0 - EULER_GAMMA) + sum
}

fn log_gamma_stirling(x: f64) -> f64 {
    let r = 1.0 / x;
    let r2 = r * r;
    let series = r
        * (1.0 / 12.0
            + r2 * (-1.0 / 360.0
                + r2 * (1.0 / 1260.0
                    + r2 * (-1.0 / 1680.0
                        + r2 * (1.0 / 1188.0 + r2 * (-691.0 / 360_360.0 + r2 / 156.0))))));
    (x - 0.5) * x.ln() - x + HALF_LN_2PI + series
}

/// Natural logarithm of the gamma function for `x > 0`.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("log_gamma requires finite x > 0, got {x}")));
    }
    Ok(log_gamma_unchecked(x))
}

pub(crate) fn log_gamma_unchecked(x: f64) -> f64 {
    if x < 0.5 {
        // ln Γ(x) = ln Γ(x + 1) - ln x
        return log_gamma_unchecked(x + 1.0) - x.ln();
    }
    if x < 1.5 {
        let eps = x - 1.0;
        return log_gamma_two_plus(eps) - eps.ln_1p();
    }
    if x <= 2.5 {
        return log_gamma_two_plus(x - 2.0);
    }
    if x >= 10.0 {
        return log_gamma_stirling(x);
    }
    let mut shifted = x;
    let mut log_product = 0.0;
    while shifted < 10.0 {
        log_product += shifted.ln();
        shifted += 1.0;
    }
    log_gamma_stirling(shifted) - log_product
}

/// The gamma function, `exp(ln Γ(x))`.
pub fn gamma(x: f64) -> Result<f64> {
    log_gamma(x).map(f64::exp)
}

/// Digamma function `ψ(x) = Γ'(x)/Γ(x)` for `x > 0`.
pub fn digamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("digamma requires finite x > 0, got {x}")));
    }
    Ok(digamma_unchecked(x))
}

pub(crate) fn digamma_unchecked(x: f64) -> f64 {
    let mut x = x;
    let mut shift = 0.0;
    while x < 10.0 {
        shift += 1.0 / x;
        x += 1.0;
    }
    let r2 = 1.0 / (x * x);
    let tail = r2
        * (1.0 / 12.0
            - r2 * (1.0 / 120.0
                - r2 * (1.0 / 252.0
                    - r2 * (1.0 / 240.0
                        - r2 * (5.0 / 660.0 - r2 * (691.0 / 32_760.0 - r2 / 12.0))))));
    x.ln() - 0.5 / x - tail - shift
}

/// Log-volume of the unit ball in `m` dimensions, `ln(π^{m/2} / Γ(m/2 + 1))`.
pub fn log_unit_ball_volume(m: usize) -> Result<f64> {
    if m == 0 {
        return Err(Error::Domain("dimension must be at least 1".into()));
    }
    let half = m as f64 / 2.0;
    Ok(half * PI.ln() - log_gamma_unchecked(half + 1.0))
}

/// Volume of the unit ball in `m` dimensions.
pub fn unit_ball_volume(m: usize) -> Result<f64> {
    log_unit_ball_volume(m).map(f64::exp)
}

/// Log surface area of the unit sphere in `ℝ^m`, `ln(2π^{m/2} / Γ(m/2))`.
pub fn log_unit_sphere_area(m: usize) -> Result<f64> {
    if m == 0 {
        return Err(Error::Domain("dimension must be at least 1".into()));
    }
    let half = m as f64 / 2.0;
    Ok(std::f64::consts::LN_2 + half * PI.ln() - log_gamma_unchecked(half))
}

fn check_exp_integral_args(p: f64, z: f64) -> Result<()> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::Domain(format!("exponential integral requires p > 0, got {p}")));
    }
    if !(z >= 0.0) || !z.is_finite() {
        return Err(Error::Domain(format!("exponential integral requires z >= 0, got {z}")));
    }
    if z == 0.0 && p <= 1.0 {
        return Err(Error::Domain(format!(
            "exponential integral diverges at z = 0 for p = {p} <= 1"
        )));
    }
    Ok(())
}

/// Generalized exponential integral in the form
/// `E_p(z) = z^{p-1} ∫_z^∞ e^{-zt} t^{-p} dt`.
///
/// This agrees with [`exp_integral_standard`] at `z = 1` only. At `z = 0`
/// the `z -> 0+` limit `1/(p - 1)` is returned for `p > 1`.
pub fn gen_exp_integral(p: f64, z: f64) -> Result<f64> {
    check_exp_integral_args(p, z)?;
    if z == 0.0 {
        return Ok(1.0 / (p - 1.0));
    }
    let tail = integrate_to_infinity(|t| (-z * t).exp() * t.powf(-p), z, quad_tol())?;
    Ok(z.powf(p - 1.0) * tail)
}

/// Standard generalized exponential integral `E_p(z) = ∫_1^∞ e^{-zt} t^{-p} dt`.
pub fn exp_integral_standard(p: f64, z: f64) -> Result<f64> {
    check_exp_integral_args(p, z)?;
    if z == 0.0 {
        return Ok(1.0 / (p - 1.0));
    }
    integrate_to_infinity(|t| (-z * t).exp() * t.powf(-p), 1.0, quad_tol())
}

fn quad_tol() -> Tolerance {
    Tolerance {
        abs: 1e-12,
        rel: 1e-12,
    }
}

/// Distribution function of the distance from the origin to the k-th point
/// of a homogeneous Poisson process, expressed through the mean count
/// `rate_volume = λ V_m t^m` inside the ball of radius `t`:
///
/// `P = 1 - Σ_{j<k} rate_volume^j e^{-rate_volume} / j!`.
pub fn erlang_cdf(k: usize, rate_volume: f64) -> Result<f64> {
    if k == 0 {
        return Err(Error::Domain("erlang_cdf requires k >= 1".into()));
    }
    if !(rate_volume >= 0.0) {
        return Err(Error::Domain(format!(
            "erlang_cdf requires rate_volume >= 0, got {rate_volume}"
        )));
    }
    if rate_volume == 0.0 {
        return Ok(0.0);
    }
    if rate_volume.is_infinite() {
        return Ok(1.0);
    }
    let v = rate_volume;
    let kf = k as f64;
    let value = if v < kf {
        // Lower regularized gamma series, free of cancellation for small v.
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut n = 1.0;
        while term > sum * 1e-17 {
            term *= v / (kf + n);
            sum += term;
            n += 1.0;
        }
        (kf * v.ln() - v - log_gamma_unchecked(kf + 1.0)).exp() * sum
    } else {
        let log_v = v.ln();
        let upper: f64 = (0..k)
            .map(|j| (j as f64 * log_v - v - log_gamma_unchecked(j as f64 + 1.0)).exp())
            .sum();
        1.0 - upper
    };
    Ok(value.clamp(0.0, 1.0))
}
