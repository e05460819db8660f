//! Entropy lower bounds computed from scalar summaries of a density, and
//! densities whose entropy is `-∞` despite finite moments.

use std::f64::consts::{E, SQRT_2};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate, integrate_geometric, integrate_unit_log_scale, Tolerance};
use crate::specfun::{log_gamma_unchecked as lgamma, log_unit_sphere_area};

/// Scalar functionals of a density on `ℝ^m` consumed by the bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensitySummary {
    pub dim: usize,
    /// `‖f‖_∞`.
    pub sup_density: f64,
    pub covariance: Option<Vec<f64>>,
    /// `(p, ‖X - EX‖_p)` pairs.
    pub moment_norms: Vec<(f64, f64)>,
    pub log_concave: bool,
    pub symmetric: bool,
    pub unconditional: bool,
}

impl DensitySummary {
    pub fn new(dim: usize, sup_density: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Domain("dimension must be at least 1".into()));
        }
        if !(sup_density > 0.0) || !sup_density.is_finite() {
            return Err(Error::Domain(format!("sup density must be finite and > 0, got {sup_density}")));
        }
        Ok(Self {
            dim,
            sup_density,
            covariance: None,
            moment_norms: Vec::new(),
            log_concave: false,
            symmetric: false,
            unconditional: false,
        })
    }

    pub fn log_concave(mut self) -> Self {
        self.log_concave = true;
        self
    }

    pub fn symmetric(mut self) -> Self {
        self.symmetric = true;
        self
    }

    pub fn unconditional(mut self) -> Self {
        self.unconditional = true;
        self
    }

    /// Row-major `m × m` covariance matrix; must be symmetric positive definite.
    pub fn with_covariance(mut self, covariance: Vec<f64>) -> Result<Self> {
        let m = self.dim;
        if covariance.len() != m * m {
            return Err(Error::Domain(format!("covariance must have {} entries", m * m)));
        }
        let mat = DMatrix::from_row_slice(m, m, &covariance);
        if (&mat - mat.transpose()).amax() > 1e-12 * mat.amax().max(1.0) || mat.cholesky().is_none() {
            return Err(Error::Decomposition);
        }
        self.covariance = Some(covariance);
        Ok(self)
    }

    pub fn with_moment_norm(mut self, p: f64, norm: f64) -> Self {
        self.moment_norms.push((p, norm));
        self
    }

    fn moment_norm(&self, p: f64) -> Result<f64> {
        self.moment_norms
            .iter()
            .find(|(q, _)| *q == p)
            .map(|(_, v)| *v)
            .ok_or_else(|| Error::Precondition(format!("moment norm of order {p} is not available")))
    }

    fn log_det_covariance(&self) -> Result<f64> {
        let cov = self
            .covariance
            .as_ref()
            .ok_or_else(|| Error::Precondition("covariance is not available".into()))?;
        let m = self.dim;
        let chol = DMatrix::from_row_slice(m, m, cov)
            .cholesky()
            .ok_or(Error::Decomposition)?;
        Ok(2.0 * chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>())
    }
}

/// `H ≥ -ln ‖f‖_∞` for any bounded density.
pub fn lower_bound_bounded(summary: &DensitySummary) -> f64 {
    -summary.sup_density.ln()
}

/// `(-ln ‖f‖_∞, m - ln ‖f‖_∞)` for a log-concave density.
pub fn bounds_log_concave(summary: &DensitySummary) -> Result<(f64, f64)> {
    if !summary.log_concave {
        return Err(Error::Precondition("density is not flagged log-concave".into()));
    }
    let lower = lower_bound_bounded(summary);
    Ok((lower, lower + summary.dim as f64))
}

fn moment_bound(norm: f64, p: f64) -> f64 {
    (2.0 * norm).ln() - lgamma(1.0 + p) / p
}

/// `H ≥ ln(2 ‖X - EX‖_p / Γ(1+p)^{1/p})` for log-concave densities, `p ≥ 1`.
pub fn lower_bound_moment(summary: &DensitySummary, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::Precondition(format!("moment bound requires p >= 1, got {p}")));
    }
    if !summary.log_concave {
        return Err(Error::Precondition("density is not flagged log-concave".into()));
    }
    Ok(moment_bound(summary.moment_norm(p)?, p))
}

/// One-dimensional symmetric log-concave variant, valid for `p > -1`.
pub fn lower_bound_symmetric_1d(summary: &DensitySummary, p: f64) -> Result<f64> {
    if !(p > -1.0) || p == 0.0 {
        return Err(Error::Precondition(format!("symmetric bound requires p > -1, p != 0, got {p}")));
    }
    if summary.dim != 1 || !summary.symmetric || !summary.log_concave {
        return Err(Error::Precondition(
            "symmetric bound requires a one-dimensional symmetric log-concave density".into(),
        ));
    }
    Ok(moment_bound(summary.moment_norm(p)?, p))
}

/// General covariance constant `c₃(m) = e² m² / (4√2 (m + 2))`.
pub fn covariance_constant_general(m: usize) -> f64 {
    let m = m as f64;
    E * E * m * m / (4.0 * SQRT_2 * (m + 2.0))
}

/// Covariance constant for unconditional densities, `e²/2`.
pub fn covariance_constant_unconditional() -> f64 {
    E * E / 2.0
}

/// Constant used by [`lower_bound_covariance`].
pub fn covariance_constant(summary: &DensitySummary) -> f64 {
    let general = covariance_constant_general(summary.dim);
    if summary.unconditional {
        general.min(covariance_constant_unconditional())
    } else {
        general
    }
}

/// `H ≥ (m/2) ln[(det Σ)^{1/m} / c₃(m)]` for symmetric log-concave vectors.
pub fn lower_bound_covariance(summary: &DensitySummary) -> Result<f64> {
    if !summary.symmetric || !summary.log_concave {
        return Err(Error::Precondition(
            "covariance bound requires a symmetric log-concave density".into(),
        ));
    }
    let m = summary.dim as f64;
    let log_det = summary.log_det_covariance()?;
    Ok(0.5 * m * (log_det / m - covariance_constant(summary).ln()))
}

fn tol() -> Tolerance {
    Tolerance {
        abs: 1e-13,
        rel: 1e-12,
    }
}

/// `f(x) = [x ln²(e/x)]^{-1}` on `(0, 1]`.
pub fn pathological_log_density(x: f64) -> f64 {
    let l = 1.0 - x.ln();
    -(x.ln() + 2.0 * l.ln())
}

/// `E X = ∫₀¹ [ln²(e/x)]^{-1} dx` for the pathological density.
pub fn pathological_mean() -> Result<f64> {
    integrate_unit_log_scale(
        |x| {
            let l = 1.0 - x.ln();
            1.0 / (l * l)
        },
        tol(),
    )
}

/// `-∫_ε^1 f ln f dx`, which decreases without bound as `ε -> 0`.
pub fn pathological_truncated_entropy(epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Domain(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    integrate_geometric(
        |x| {
            let lf = pathological_log_density(x);
            -lf.exp() * lf
        },
        epsilon,
        tol(),
    )
}

/// `c₂(m) = Γ(m/2) / (2π^{m/2})`.
pub fn pathological_ball_constant(m: usize) -> Result<f64> {
    Ok((-log_unit_sphere_area(m)?).exp())
}

/// Total mass of `c₂(m) [‖x‖^m ln²(e/‖x‖)]^{-1}` on the unit ball, by radial
/// quadrature on a logarithmic scale.
pub fn pathological_ball_mass(m: usize) -> Result<f64> {
    let log_area = log_unit_sphere_area(m)?;
    let log_c2 = -log_area;
    let mf = m as f64;
    integrate_unit_log_scale(
        |r| {
            let l = 1.0 - r.ln();
            let log_f = log_c2 - mf * r.ln() - 2.0 * l.ln();
            (log_area + log_f + (mf - 1.0) * r.ln()).exp()
        },
        tol(),
    )
}

/// Mass of the one-dimensional pathological density on `[ε, 1]`.
pub fn pathological_mass(epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Domain(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    integrate(
        |u| 1.0 / ((1.0 + u) * (1.0 + u)),
        0.0,
        -epsilon.ln(),
        tol(),
    )
}
