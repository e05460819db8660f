//! Entropy-based goodness-of-fit test for `GG(m, s)`.
//!
//! The statistic is `T = Ĥ - (m/s) ln X̄⁽ˢ⁾ - (m/s) ln c₁(m,s)`. It tends to
//! zero under the null and to a strictly negative constant otherwise, so the
//! default rejection region is the left tail. Critical values come from
//! Monte-Carlo simulation at the canonical rate `τ = 1/s`; the statistic is
//! scale-invariant, so one table serves every rate.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::{log_max_entropy_constant, GGParams, RandomStream};
use crate::entropy::{compensated_sum, knn_entropy};
use crate::error::{Error, Result};
use crate::neighbors::Sample;

pub const TABLE_FORMAT: &str = "ggfit-critical-values/1";

/// Smallest replicate count accepted by [`critical_values`].
pub const MIN_REPLICATES: usize = 100;

/// Smallest replicate count for a table written to disk.
pub const MIN_PERSISTED_REPLICATES: usize = 1000;

/// `(1/N) Σ ‖X_i‖^s`.
pub fn sample_moment(sample: &Sample, s: f64) -> f64 {
    let half = s / 2.0;
    let total = compensated_sum(
        sample
            .rows()
            .map(|r| r.iter().map(|v| v * v).sum::<f64>().powf(half)),
    );
    total / sample.n() as f64
}

/// The pieces that make up a test statistic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Statistic {
    pub entropy: f64,
    pub moment: f64,
    pub value: f64,
}

pub fn test_statistic_parts(sample: &Sample, s: f64, k: usize) -> Result<Statistic> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::Domain(format!("shape must be finite and > 0, got {s}")));
    }
    let entropy = knn_entropy(sample, k)?.value;
    let moment = sample_moment(sample, s);
    let ratio = sample.dim() as f64 / s;
    let value = entropy - ratio * moment.ln() - ratio * log_max_entropy_constant(sample.dim(), s);
    Ok(Statistic {
        entropy,
        moment,
        value,
    })
}

/// `T_{N,k}(m, s)`.
pub fn test_statistic(sample: &Sample, s: f64, k: usize) -> Result<f64> {
    test_statistic_parts(sample, s, k).map(|t| t.value)
}

/// Values of `T` on `count` independent canonical `GG(m, s)` samples of size
/// `n`, replicate `j` drawn from `stream.derive(j)`.
pub fn simulate_null_statistics(
    m: usize,
    s: f64,
    n: usize,
    k: usize,
    count: usize,
    stream: RandomStream,
) -> Result<Vec<f64>> {
    let params = GGParams::canonical(m, s)?;
    if k == 0 || k >= n {
        return Err(Error::Arity { k, n });
    }
    (0..count as u64)
        .into_par_iter()
        .map(|j| {
            let sample = params.sample(n, stream.derive(j))?;
            test_statistic(&sample, s, k)
        })
        .collect()
}

/// Rejection region of the test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Tail {
    /// Reject when `T` is at or below the α-quantile of the null.
    #[default]
    Left,
    /// Reject when `T` is at or above the (1-α)-quantile.
    Right,
    /// Reject outside the central `1-α` interval.
    TwoSided,
}

impl fmt::Display for Tail {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Tail::Left => "left",
            Tail::Right => "right",
            Tail::TwoSided => "two-sided",
        })
    }
}

impl FromStr for Tail {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "left" => Ok(Tail::Left),
            "right" => Ok(Tail::Right),
            "two-sided" | "two_sided" | "both" => Ok(Tail::TwoSided),
            other => Err(Error::Config(format!("unknown tail '{other}'"))),
        }
    }
}

/// Empirical null quantiles for one significance level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantileRow {
    pub alpha: f64,
    /// α-quantile.
    pub left: f64,
    /// (1-α)-quantile.
    pub right: f64,
    /// α/2-quantile.
    pub two_sided_lower: f64,
    /// (1-α/2)-quantile.
    pub two_sided_upper: f64,
}

/// Monte-Carlo critical values of `T` under `GG(m, s)` for one `(m, s, N, k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalValueTable {
    pub format: String,
    pub library_version: String,
    pub m: usize,
    pub s: f64,
    pub n: usize,
    pub k: usize,
    pub replicates: usize,
    pub master_seed: u64,
    pub stream: u64,
    pub null_mean: f64,
    pub null_sd: f64,
    pub quantiles: Vec<QuantileRow>,
}

/// Linear-interpolation quantile of sorted data (the "type 7" definition).
pub fn empirical_quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn check_alphas(alphas: &[f64]) -> Result<()> {
    if alphas.is_empty() {
        return Err(Error::Config("at least one significance level is required".into()));
    }
    if let Some(a) = alphas.iter().find(|a| !(**a > 0.0 && **a < 1.0)) {
        return Err(Error::Config(format!("significance level {a} is outside (0, 1)")));
    }
    Ok(())
}

/// Simulates `replicates` null statistics and tabulates their quantiles.
pub fn critical_values(
    m: usize,
    s: f64,
    n: usize,
    k: usize,
    alphas: &[f64],
    replicates: usize,
    stream: RandomStream,
) -> Result<CriticalValueTable> {
    if replicates < MIN_REPLICATES {
        return Err(Error::Config(format!(
            "critical values need at least {MIN_REPLICATES} replicates, got {replicates}"
        )));
    }
    check_alphas(alphas)?;
    let mut values = simulate_null_statistics(m, s, n, k, replicates, stream)?;
    let r = values.len() as f64;
    let null_mean = compensated_sum(values.iter().copied()) / r;
    let null_sd =
        (compensated_sum(values.iter().map(|t| (t - null_mean).powi(2))) / (r - 1.0)).sqrt();
    values.sort_by(f64::total_cmp);
    let mut sorted_alphas = alphas.to_vec();
    sorted_alphas.sort_by(f64::total_cmp);
    sorted_alphas.dedup();
    let quantiles = sorted_alphas
        .into_iter()
        .map(|alpha| QuantileRow {
            alpha,
            left: empirical_quantile(&values, alpha),
            right: empirical_quantile(&values, 1.0 - alpha),
            two_sided_lower: empirical_quantile(&values, alpha / 2.0),
            two_sided_upper: empirical_quantile(&values, 1.0 - alpha / 2.0),
        })
        .collect();
    Ok(CriticalValueTable {
        format: TABLE_FORMAT.to_string(),
        library_version: crate::VERSION.to_string(),
        m,
        s,
        n,
        k,
        replicates,
        master_seed: stream.seed,
        stream: stream.stream,
        null_mean,
        null_sd,
        quantiles,
    })
}

impl CriticalValueTable {
    pub fn row(&self, alpha: f64) -> Option<&QuantileRow> {
        self.quantiles
            .iter()
            .find(|q| (q.alpha - alpha).abs() <= 1e-12 * alpha.max(1e-300))
    }

    pub fn matches(&self, m: usize, s: f64, n: usize, k: usize) -> bool {
        self.m == m && self.s == s && self.n == n && self.k == k
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let table: Self = serde_json::from_str(text)?;
        if table.format != TABLE_FORMAT {
            return Err(Error::Lookup(format!("unsupported table format '{}'", table.format)));
        }
        Ok(table)
    }

    /// Writes the table as JSON; refuses tables with fewer than
    /// [`MIN_PERSISTED_REPLICATES`] replicates.
    pub fn save(&self, path: &Path) -> Result<()> {
        if self.replicates < MIN_PERSISTED_REPLICATES {
            return Err(Error::Config(format!(
                "persisted tables need at least {MIN_PERSISTED_REPLICATES} replicates, got {}",
                self.replicates
            )));
        }
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Where critical values come from.
#[derive(Debug, Clone, Copy)]
pub enum CriticalSource<'a> {
    Table(&'a CriticalValueTable),
    /// Simulate a table for this test only.
    FreshMonteCarlo {
        replicates: usize,
        stream: RandomStream,
    },
}

/// Result of a goodness-of-fit test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub statistic: f64,
    pub entropy: f64,
    pub moment: f64,
    pub n: usize,
    pub k: usize,
    pub m: usize,
    pub s: f64,
    pub alpha: f64,
    pub tail: Tail,
    pub critical_lower: Option<f64>,
    pub critical_upper: Option<f64>,
    pub reject: bool,
    pub source: String,
    pub replicates: usize,
    pub master_seed: u64,
    pub stream: u64,
}

/// Tests `X ~ GG(m, s)` at level `alpha`.
pub fn run_test(
    sample: &Sample,
    s: f64,
    k: usize,
    alpha: f64,
    source: CriticalSource<'_>,
    tail: Tail,
) -> Result<TestOutcome> {
    check_alphas(&[alpha])?;
    let (m, n) = (sample.dim(), sample.n());
    if let CriticalSource::Table(table) = source {
        if !table.matches(m, s, n, k) {
            return Err(Error::Lookup(format!(
                "table is for (m={}, s={}, N={}, k={}) but the test needs (m={m}, s={s}, N={n}, k={k})",
                table.m, table.s, table.n, table.k
            )));
        }
        if table.row(alpha).is_none() {
            return Err(Error::Lookup(format!("table has no entry for alpha={alpha}")));
        }
    }
    let stat = test_statistic_parts(sample, s, k)?;
    let fresh;
    let (table, label) = match source {
        CriticalSource::Table(t) => (t, "table"),
        CriticalSource::FreshMonteCarlo { replicates, stream } => {
            fresh = critical_values(m, s, n, k, &[alpha], replicates, stream)?;
            (&fresh, "fresh-mc")
        }
    };
    let row = table
        .row(alpha)
        .ok_or_else(|| Error::Lookup(format!("table has no entry for alpha={alpha}")))?;
    let t = stat.value;
    let (lower, upper, reject) = match tail {
        Tail::Left => (Some(row.left), None, t <= row.left),
        Tail::Right => (None, Some(row.right), t >= row.right),
        Tail::TwoSided => (
            Some(row.two_sided_lower),
            Some(row.two_sided_upper),
            t <= row.two_sided_lower || t >= row.two_sided_upper,
        ),
    };
    Ok(TestOutcome {
        statistic: t,
        entropy: stat.entropy,
        moment: stat.moment,
        n,
        k,
        m,
        s,
        alpha,
        tail,
        critical_lower: lower,
        critical_upper: upper,
        reject,
        source: label.to_string(),
        replicates: table.replicates,
        master_seed: table.master_seed,
        stream: table.stream,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_moment_by_hand() {
        let s = Sample::from_values(&[0.0, 1.0, 3.0]).unwrap();
        assert!((sample_moment(&s, 1.0) - 4.0 / 3.0).abs() < 1e-15);
        assert!((sample_moment(&s, 2.0) - 10.0 / 3.0).abs() < 1e-15);
        let p = Sample::from_rows(&[[3.0, 4.0], [0.0, 1.0]]).unwrap();
        assert!((sample_moment(&p, 1.0) - 3.0).abs() < 1e-15);
    }

    #[test]
    fn quantile_definition() {
        let v = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(empirical_quantile(&v, 0.5), 3.0);
        assert_eq!(empirical_quantile(&v, 0.0), 1.0);
        assert_eq!(empirical_quantile(&v, 1.0), 5.0);
        assert!((empirical_quantile(&v, 0.1) - 1.4).abs() < 1e-15);
    }

    #[test]
    fn tail_parsing() {
        assert_eq!("left".parse::<Tail>().unwrap(), Tail::Left);
        assert_eq!("two-sided".parse::<Tail>().unwrap(), Tail::TwoSided);
        assert!("up".parse::<Tail>().is_err());
        assert_eq!(Tail::TwoSided.to_string(), "two-sided");
    }

    #[test]
    fn configuration_errors() {
        let st = RandomStream::new(1, 0);
        assert!(matches!(critical_values(1, 2.0, 50, 1, &[0.05], 99, st), Err(Error::Config(_))));
        assert!(matches!(critical_values(1, 2.0, 50, 1, &[1.0], 100, st), Err(Error::Config(_))));
        assert!(matches!(critical_values(1, 2.0, 50, 1, &[], 100, st), Err(Error::Config(_))));
    }

    #[test]
    fn table_key_mismatch_is_a_lookup_error() {
        let st = RandomStream::new(3, 0);
        let table = critical_values(1, 2.0, 50, 1, &[0.05], 100, st).unwrap();
        let data = GGParams::canonical(1, 2.0).unwrap().sample(60, st.derive(999)).unwrap();
        let err = run_test(&data, 2.0, 1, 0.05, CriticalSource::Table(&table), Tail::Left);
        assert!(matches!(err, Err(Error::Lookup(_))));
        let data = GGParams::canonical(1, 2.0).unwrap().sample(50, st.derive(999)).unwrap();
        let err = run_test(&data, 2.0, 1, 0.10, CriticalSource::Table(&table), Tail::Left);
        assert!(matches!(err, Err(Error::Lookup(_))));
        let ok = run_test(&data, 2.0, 1, 0.05, CriticalSource::Table(&table), Tail::TwoSided).unwrap();
        assert_eq!(ok.reject, ok.statistic <= ok.critical_lower.unwrap() || ok.statistic >= ok.critical_upper.unwrap());
    }

    #[test]
    fn small_tables_are_not_persisted() {
        let st = RandomStream::new(3, 0);
        let table = critical_values(1, 2.0, 20, 1, &[0.05], 100, st).unwrap();
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(table.save(&dir.path().join("t.json")), Err(Error::Config(_))));
    }

    #[test]
    fn duplicates_fail_before_statistic() {
        let s = Sample::from_values(&[0.5, 1.0, 0.5, 2.0]).unwrap();
        assert!(matches!(test_statistic(&s, 1.0, 1), Err(Error::DuplicatePoints { first: 0, second: 2 })));
    }
}
