//! The k-th nearest-neighbour estimator of Shannon entropy and a quadrature
//! route to the entropy of isotropic densities with known form.

use serde::{Deserialize, Serialize};

use crate::distributions::{GGParams, STParams};
use crate::error::{Error, Result};
use crate::neighbors::{knn_distances, Backend, Sample};
use crate::quadrature::{integrate_range, Tolerance};
use crate::specfun::{digamma_unchecked, log_unit_ball_volume, log_unit_sphere_area, EULER_GAMMA};

/// Which closed-form expression produced an estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorVariant {
    /// General k-th neighbour form with `e^{-ψ(k)}`.
    KthNeighbour,
    /// The `k = 1` form written with the Euler–Mascheroni constant.
    FirstNeighbour,
}

/// An entropy estimate in nats.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyEstimate {
    pub value: f64,
    pub n: usize,
    pub k: usize,
    #[serde(rename = "m")]
    pub dim: usize,
    pub variant: EstimatorVariant,
}

/// Neumaier-compensated sum.
pub(crate) fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

fn mean_log_distance(sample: &Sample, k: usize, backend: Backend) -> Result<f64> {
    let nd = knn_distances(sample, k, backend)?;
    Ok(compensated_sum(nd.distances.iter().map(|d| d.ln())) / sample.n() as f64)
}

/// `Ĥ = (1/N) Σ ln[ρ_k^m(X_i) V_m (N-1) e^{-ψ(k)}]`.
pub fn knn_entropy(sample: &Sample, k: usize) -> Result<EntropyEstimate> {
    knn_entropy_with(sample, k, Backend::Indexed)
}

pub fn knn_entropy_with(sample: &Sample, k: usize, backend: Backend) -> Result<EntropyEstimate> {
    let m = sample.dim();
    let n = sample.n();
    let mean_log = mean_log_distance(sample, k, backend)?;
    let value = m as f64 * mean_log + log_unit_ball_volume(m)? + ((n - 1) as f64).ln()
        - digamma_unchecked(k as f64);
    Ok(EntropyEstimate {
        value,
        n,
        k,
        dim: m,
        variant: EstimatorVariant::KthNeighbour,
    })
}

/// `Ĥ = (m/N) Σ ln ρ_1(X_i) + ln V_m + γ + ln(N-1)`.
pub fn knn_entropy_k1(sample: &Sample) -> Result<EntropyEstimate> {
    let m = sample.dim();
    let n = sample.n();
    let mean_log = mean_log_distance(sample, 1, Backend::Indexed)?;
    let value = m as f64 * mean_log + log_unit_ball_volume(m)? + EULER_GAMMA + ((n - 1) as f64).ln();
    Ok(EntropyEstimate {
        value,
        n,
        k: 1,
        dim: m,
        variant: EstimatorVariant::FirstNeighbour,
    })
}

/// An isotropic density on `ℝ^m` given through its value at radius `r`.
pub trait RadialDensity {
    fn dim(&self) -> usize;

    fn log_density_at_radius(&self, r: f64) -> f64;

    /// Truncation radius leaving less than `1e-10` of mass outside.
    fn default_radius(&self) -> f64 {
        f64::INFINITY
    }
}

impl RadialDensity for GGParams {
    fn dim(&self) -> usize {
        self.dim
    }

    fn log_density_at_radius(&self, r: f64) -> f64 {
        self.log_pdf_at_radius(r)
    }

    fn default_radius(&self) -> f64 {
        // Upper gamma tail Γ(m/s, 80) is far below 1e-10 for m/s <= 20.
        (80.0 / self.rate).powf(1.0 / self.shape)
    }
}

impl RadialDensity for STParams {
    fn dim(&self) -> usize {
        self.dim
    }

    fn log_density_at_radius(&self, r: f64) -> f64 {
        self.log_pdf_at_radius(r)
    }
}

/// Radial density defined by a closure.
pub struct RadialFn<F> {
    pub dim: usize,
    pub log_density: F,
    pub radius: f64,
}

impl<F: Fn(f64) -> f64> RadialDensity for RadialFn<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn log_density_at_radius(&self, r: f64) -> f64 {
        (self.log_density)(r)
    }

    fn default_radius(&self) -> f64 {
        self.radius
    }
}

const NORMALIZATION_TOLERANCE: f64 = 1e-6;

fn radial_tol() -> Tolerance {
    Tolerance {
        abs: 1e-12,
        rel: 1e-11,
    }
}

/// `E g(‖X‖)` over the ball of the given radius, by radial quadrature.
pub fn radial_expectation<D: RadialDensity + ?Sized, G: Fn(f64) -> f64>(
    density: &D,
    g: G,
    radius: f64,
) -> Result<f64> {
    let m = density.dim();
    let log_area = log_unit_sphere_area(m)?;
    if !(radius > 0.0) {
        return Err(Error::Domain(format!("radius must be positive, got {radius}")));
    }
    integrate_range(
        |r| {
            let lf = density.log_density_at_radius(r);
            if lf == f64::NEG_INFINITY {
                return 0.0;
            }
            let w = (log_area + lf).exp() * r.powi(m as i32 - 1);
            if w == 0.0 {
                0.0
            } else {
                w * g(r)
            }
        },
        0.0,
        radius,
        radial_tol(),
    )
}

/// Probability mass of an isotropic density inside the given radius.
pub fn radial_mass<D: RadialDensity + ?Sized>(density: &D, radius: f64) -> Result<f64> {
    radial_expectation(density, |_| 1.0, radius)
}

/// `-∫ f ln f` over the ball of the given radius, after checking that the
/// density carries unit mass there to within `1e-6`.
pub fn entropy_quadrature<D: RadialDensity + ?Sized>(density: &D, radius: f64) -> Result<f64> {
    let mass = radial_mass(density, radius)?;
    if (mass - 1.0).abs() > NORMALIZATION_TOLERANCE {
        return Err(Error::InconsistentDensity { mass });
    }
    radial_expectation(density, |r| -density.log_density_at_radius(r), radius)
}

/// [`entropy_quadrature`] at the density's default radius.
pub fn entropy_quadrature_default<D: RadialDensity + ?Sized>(density: &D) -> Result<f64> {
    entropy_quadrature(density, density.default_radius())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_point_line_by_hand() {
        let s = Sample::from_values(&[0.0, 1.0, 3.0]).unwrap();
        let got = knn_entropy(&s, 1).unwrap().value;
        let g = EULER_GAMMA.exp();
        let expected =
            ((1.0 * 2.0 * 2.0 * g).ln() + (1.0 * 2.0 * 2.0 * g).ln() + (2.0 * 2.0 * 2.0 * g).ln()) / 3.0;
        assert!((got - expected).abs() < 1e-14);
    }

    #[test]
    fn two_points_at_distance_d() {
        let d = 0.37;
        let s = Sample::from_values(&[1.0, 1.0 + d]).unwrap();
        let got = knn_entropy_k1(&s).unwrap();
        let expected = (1.0 + d - 1.0f64).ln() + 2f64.ln() + EULER_GAMMA;
        assert!((got.value - expected).abs() < 1e-14);
        assert_eq!(got.variant, EstimatorVariant::FirstNeighbour);
    }

    #[test]
    fn errors_propagate() {
        let dup = Sample::from_values(&[0.0, 1.0, 1.0]).unwrap();
        assert!(matches!(knn_entropy(&dup, 1), Err(Error::DuplicatePoints { .. })));
        let small = Sample::from_values(&[0.0, 1.0]).unwrap();
        assert!(matches!(knn_entropy(&small, 2), Err(Error::Arity { .. })));
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let vals = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(compensated_sum(vals), 2.0);
    }

    #[test]
    fn quadrature_entropy_of_normal_and_laplace() {
        let normal = GGParams::new(1, 2.0, 0.5).unwrap();
        let h = entropy_quadrature(&normal, 40.0).unwrap();
        assert!((h - 1.418_938_533_204_672_7).abs() < 1e-6);
        let laplace = GGParams::new(1, 1.0, 1.0).unwrap();
        let h = entropy_quadrature(&laplace, 60.0).unwrap();
        assert!((h - (1.0 + std::f64::consts::LN_2)).abs() < 1e-6);
    }

    #[test]
    fn quadrature_rejects_unnormalised_density() {
        let normal = GGParams::new(1, 2.0, 0.5).unwrap();
        assert!(matches!(
            entropy_quadrature(&normal, 1.0),
            Err(Error::InconsistentDensity { .. })
        ));
        let doubled = RadialFn {
            dim: 1,
            log_density: |r: f64| normal.log_pdf_at_radius(r) + std::f64::consts::LN_2,
            radius: 40.0,
        };
        assert!(entropy_quadrature_default(&doubled).is_err());
    }
}
