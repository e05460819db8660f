//! The exponential-power family and the isotropic Student-t alternative:
//! densities, moments, closed-form entropies, maximum-entropy bounds and
//! exact samplers.
//!
//! Gamma laws are parameterized by shape and scale throughout.

use std::f64::consts::{LN_2, PI};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::neighbors::Sample;
use crate::specfun::log_gamma_unchecked as lgamma;

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 {
        return Err(Error::Domain("dimension must be at least 1".into()));
    }
    Ok(())
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::Domain(format!("{name} must be finite and > 0, got {v}")));
    }
    Ok(())
}

fn norm_squared(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

/// Reproducible random stream: a ChaCha8 generator keyed by a master seed
/// and selected by a stream id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomStream {
    pub seed: u64,
    pub stream: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RandomStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    /// Child stream for replicate `index`; independent of evaluation order.
    pub fn derive(&self, index: u64) -> Self {
        let mixed = splitmix64(self.stream ^ splitmix64(index.wrapping_add(0x5851_F42D_4C95_7F2D)));
        Self {
            seed: self.seed,
            stream: mixed,
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

/// Parameters `(m, s, τ)` of the generalized Gaussian `GG_τ(m, s)` with
/// density `c(m,s) exp(-τ‖x‖^s)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GGParams {
    pub dim: usize,
    pub shape: f64,
    pub rate: f64,
}

impl GGParams {
    pub fn new(dim: usize, shape: f64, rate: f64) -> Result<Self> {
        check_dim(dim)?;
        check_positive("shape", shape)?;
        check_positive("rate", rate)?;
        Ok(Self { dim, shape, rate })
    }

    /// Canonical member, `τ = 1/s`.
    pub fn canonical(dim: usize, shape: f64) -> Result<Self> {
        check_positive("shape", shape)?;
        Self::new(dim, shape, 1.0 / shape)
    }

    /// Isotropic exponential power member, `τ = 1/2`.
    pub fn isotropic(dim: usize, shape: f64) -> Result<Self> {
        Self::new(dim, shape, 0.5)
    }

    /// `ln c(m, s)`.
    pub fn log_normalizer(&self) -> f64 {
        let m = self.dim as f64;
        let s = self.shape;
        lgamma(m / 2.0 + 1.0) + (m / s) * self.rate.ln() - lgamma(m / s + 1.0) - (m / 2.0) * PI.ln()
    }

    pub fn log_pdf(&self, x: &[f64]) -> f64 {
        self.log_pdf_at_radius(norm_squared(x).sqrt())
    }

    pub fn log_pdf_at_radius(&self, r: f64) -> f64 {
        self.log_normalizer() - self.rate * r.powf(self.shape)
    }

    /// `E‖X‖^s = m / (sτ)`.
    pub fn moment(&self) -> f64 {
        self.dim as f64 / (self.shape * self.rate)
    }

    /// `E‖X‖^p = Γ((m+p)/s) / (Γ(m/s) τ^{p/s})` for `p > -m`.
    pub fn abs_moment(&self, p: f64) -> Result<f64> {
        let m = self.dim as f64;
        if !(p > -m) {
            return Err(Error::Domain(format!("moment of order {p} is infinite")));
        }
        let s = self.shape;
        Ok((lgamma((m + p) / s) - lgamma(m / s) - (p / s) * self.rate.ln()).exp())
    }

    /// Closed-form entropy `m/s - ln c(m, s)`.
    pub fn entropy(&self) -> f64 {
        self.dim as f64 / self.shape - self.log_normalizer()
    }

    /// Per-coordinate standard deviation, `sqrt(β(m,s)) (2τ)^{-1/s}`.
    pub fn coordinate_sd(&self) -> f64 {
        gg_variance_scale(self.dim, self.shape).sqrt() * (2.0 * self.rate).powf(-1.0 / self.shape)
    }

    /// Draws `n` points as `U · V^{1/s} · (2τ)^{-1/s}` with `U` uniform on the
    /// sphere and `V ~ Gamma(shape m/s, scale 2)`.
    pub fn sample(&self, n: usize, stream: RandomStream) -> Result<Sample> {
        if n == 0 {
            return Err(Error::Domain("sample size must be at least 1".into()));
        }
        let m = self.dim;
        let radial = Gamma::new(m as f64 / self.shape, 2.0)
            .map_err(|e| Error::Domain(format!("gamma law: {e}")))?;
        let scale = (2.0 * self.rate).powf(-1.0 / self.shape);
        let inv_shape = 1.0 / self.shape;
        let mut rng = stream.rng();
        let mut data = Vec::with_capacity(n * m);
        let mut dir = vec![0.0; m];
        for _ in 0..n {
            let norm = loop {
                for d in dir.iter_mut() {
                    *d = rng.sample(StandardNormal);
                }
                let norm = norm_squared(&dir).sqrt();
                if norm > 0.0 {
                    break norm;
                }
            };
            let v: f64 = radial.sample(&mut rng);
            let r = v.powf(inv_shape) * scale / norm;
            data.extend(dir.iter().map(|d| d * r));
        }
        Sample::new(data, m)
    }
}

/// `β(m, s) = 2^{2/s} Γ((m+2)/s) / (m Γ(m/s))`, the ratio of the covariance
/// of the exponential power law to its scatter matrix.
pub fn gg_variance_scale(dim: usize, shape: f64) -> f64 {
    let m = dim as f64;
    ((2.0 / shape) * LN_2 + lgamma((m + 2.0) / shape) - lgamma(m / shape)).exp() / m
}

/// `ln c₁(m, s)` where
/// `c₁ = (π^{m/2} Γ(m/s+1) / Γ(m/2+1))^{s/m} · (se/m)`.
pub fn log_max_entropy_constant(dim: usize, shape: f64) -> f64 {
    let m = dim as f64;
    let s = shape;
    (s / m) * ((m / 2.0) * PI.ln() + lgamma(m / s + 1.0) - lgamma(m / 2.0 + 1.0)) + (s / m).ln() + 1.0
}

pub fn max_entropy_constant(dim: usize, shape: f64) -> f64 {
    log_max_entropy_constant(dim, shape).exp()
}

/// Upper bound `(m/s) ln(c₁(m,s) · E‖X‖^s)` on the entropy of any density on
/// `ℝ^m` with the given `s`-th absolute moment.
pub fn max_entropy_bound(dim: usize, shape: f64, moment: f64) -> Result<f64> {
    check_dim(dim)?;
    check_positive("shape", shape)?;
    check_positive("moment", moment)?;
    Ok((dim as f64 / shape) * (log_max_entropy_constant(dim, shape) + moment.ln()))
}

/// Entropy of `N(0, Σ)`, `ln[(2πe)^{m/2} sqrt(det Σ)]`.
pub fn gaussian_max_entropy(scatter: &DMatrix<f64>) -> Result<f64> {
    let m = scatter.nrows();
    let log_det = cholesky_log_det(scatter)?;
    Ok(0.5 * m as f64 * (2.0 * PI).ln() + 0.5 * m as f64 + 0.5 * log_det)
}

fn cholesky(scatter: &DMatrix<f64>) -> Result<nalgebra::Cholesky<f64, nalgebra::Dyn>> {
    if scatter.nrows() == 0 || !scatter.is_square() {
        return Err(Error::Decomposition);
    }
    if (scatter - scatter.transpose()).amax() > 1e-12 * scatter.amax().max(1.0) {
        return Err(Error::Decomposition);
    }
    scatter.clone().cholesky().ok_or(Error::Decomposition)
}

fn cholesky_log_det(scatter: &DMatrix<f64>) -> Result<f64> {
    let chol = cholesky(scatter)?;
    Ok(2.0 * chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>())
}

/// Multivariate exponential power law `MEP_m(s, μ, Σ)`.
#[derive(Debug, Clone)]
pub struct MEPParams {
    shape: f64,
    location: DVector<f64>,
    chol: nalgebra::Cholesky<f64, nalgebra::Dyn>,
    log_det: f64,
}

impl MEPParams {
    pub fn new(shape: f64, location: DVector<f64>, scatter: &DMatrix<f64>) -> Result<Self> {
        check_positive("shape", shape)?;
        if location.len() != scatter.nrows() {
            return Err(Error::Domain("location and scatter dimensions differ".into()));
        }
        let chol = cholesky(scatter)?;
        let log_det = 2.0 * chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>();
        Ok(Self {
            shape,
            location,
            chol,
            log_det,
        })
    }

    pub fn dim(&self) -> usize {
        self.location.len()
    }

    pub fn shape(&self) -> f64 {
        self.shape
    }

    pub fn log_pdf(&self, x: &[f64]) -> f64 {
        let m = self.dim() as f64;
        let s = self.shape;
        let centered = DVector::from_column_slice(x) - &self.location;
        let y = self
            .chol
            .l_dirty()
            .solve_lower_triangular(&centered)
            .unwrap_or(centered);
        let quad = y.norm_squared();
        lgamma(m / 2.0 + 1.0)
            - (m / 2.0) * PI.ln()
            - lgamma(m / s + 1.0)
            - (m / s) * LN_2
            - 0.5 * self.log_det
            - 0.5 * quad.powf(s / 2.0)
    }

    /// Covariance matrix `β(m, s) Σ`.
    pub fn covariance(&self) -> DMatrix<f64> {
        let l = self.chol.l();
        &l * l.transpose() * gg_variance_scale(self.dim(), self.shape)
    }
}

/// Isotropic exponential power density, the `μ = 0`, `Σ = I` case of MEP.
pub fn iep_log_pdf(dim: usize, shape: f64, x: &[f64]) -> f64 {
    let m = dim as f64;
    let s = shape;
    lgamma(m / 2.0 + 1.0)
        - lgamma(m / s + 1.0)
        - (m / 2.0) * PI.ln()
        - (m / s) * LN_2
        - 0.5 * norm_squared(x).powf(s / 2.0)
}

/// Isotropic multivariate Student-t `ST(m, ν)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct STParams {
    pub dim: usize,
    pub dof: f64,
}

impl STParams {
    pub fn new(dim: usize, dof: f64) -> Result<Self> {
        check_dim(dim)?;
        check_positive("degrees of freedom", dof)?;
        Ok(Self { dim, dof })
    }

    pub fn log_pdf(&self, x: &[f64]) -> f64 {
        self.log_pdf_at_radius(norm_squared(x).sqrt())
    }

    pub fn log_pdf_at_radius(&self, r: f64) -> f64 {
        let m = self.dim as f64;
        let nu = self.dof;
        lgamma((nu + m) / 2.0) - lgamma(nu / 2.0) - (m / 2.0) * (nu * PI).ln()
            - ((nu + m) / 2.0) * (r * r / nu).ln_1p()
    }

    /// Draws `Z / sqrt(G)` with `Z ~ N(0, I_m)` and `G ~ Gamma(shape ν/2,
    /// scale 2/ν)`, so that `νG` is chi-squared with `ν` degrees of freedom.
    pub fn sample(&self, n: usize, stream: RandomStream) -> Result<Sample> {
        if n == 0 {
            return Err(Error::Domain("sample size must be at least 1".into()));
        }
        let mixing = Gamma::new(self.dof / 2.0, 2.0 / self.dof)
            .map_err(|e| Error::Domain(format!("gamma law: {e}")))?;
        let mut rng = stream.rng();
        let mut data = Vec::with_capacity(n * self.dim);
        let mut z = vec![0.0; self.dim];
        for _ in 0..n {
            for v in z.iter_mut() {
                *v = rng.sample(StandardNormal);
            }
            let g: f64 = mixing.sample(&mut rng);
            let scale = 1.0 / g.sqrt();
            data.extend(z.iter().map(|v| v * scale));
        }
        Sample::new(data, self.dim)
    }
}
