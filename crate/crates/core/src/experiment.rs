//! Reproducible simulation studies of the test statistic.
//!
//! Every run is a deterministic function of its [`ExperimentConfig`] and the
//! library version. Each data set is drawn from a stream keyed by a hash of
//! the data-generating parameters, so the same sample is shared by every
//! tested shape and neighbour order, and rows come out in canonical order
//! whatever the thread count.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::distributions::{gg_variance_scale, GGParams, RandomStream, STParams};
use crate::entropy::compensated_sum;
use crate::error::{Error, Result};
use crate::gof::{simulate_null_statistics, test_statistic};
use crate::normality::shapiro_wilk;

/// (grid index, k index, N index, repetition, statistic).
type Cell = (usize, usize, usize, usize, f64);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    /// `T(m, s)` on `GG(m, s)` data.
    Consistency,
    /// `T(m, s₀)` on `GG(m, s₁)` data.
    Misspec,
    /// `T(m, s₀)` on `ST(m, ν)` data.
    StudentT,
    /// Shapiro–Wilk p-values of replicated null statistics.
    Normality,
    /// Histogram of standardized one-dimensional `GG(1, s)` data.
    EmpiricalPdf,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 5] = [
        ExperimentKind::Consistency,
        ExperimentKind::Misspec,
        ExperimentKind::StudentT,
        ExperimentKind::Normality,
        ExperimentKind::EmpiricalPdf,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Consistency => "consistency",
            ExperimentKind::Misspec => "misspec",
            ExperimentKind::StudentT => "student-t",
            ExperimentKind::Normality => "normality",
            ExperimentKind::EmpiricalPdf => "empirical-pdf",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment '{s}'")))
    }
}

/// Full description of a simulation study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub m: usize,
    /// Null shapes (consistency, normality) or histogram shapes (empirical-pdf).
    pub s: Vec<f64>,
    /// Tested shapes for misspec and student-t.
    pub s0: Vec<f64>,
    /// Data shape for misspec.
    pub s1: f64,
    /// Degrees of freedom for student-t.
    pub nu: Vec<f64>,
    /// Sample sizes.
    pub n: Vec<usize>,
    pub k: Vec<usize>,
    /// Repetitions `M` per grid point.
    pub repetitions: usize,
    /// Statistics per Shapiro–Wilk sample (normality only).
    pub replicates: usize,
    /// Points per histogram (empirical-pdf only).
    pub pdf_n: usize,
    pub bins: usize,
    /// Histogram range is `[-x_max, x_max]`.
    pub x_max: f64,
    pub seed: u64,
}

impl ExperimentConfig {
    /// Desk-scale defaults for each experiment.
    pub fn defaults(experiment: ExperimentKind) -> Self {
        let mut cfg = Self {
            experiment,
            m: 2,
            s: vec![1.0],
            s0: vec![0.5, 1.0, 2.0, 4.0],
            s1: 2.0,
            nu: vec![3.0],
            n: vec![500, 1000, 2000, 4000],
            k: vec![1],
            repetitions: 10,
            replicates: 200,
            pdf_n: 100_000,
            bins: 80,
            x_max: 4.0,
            seed: 1,
        };
        match experiment {
            ExperimentKind::Normality => {
                cfg.m = 1;
                cfg.s = vec![2.0];
                cfg.n = vec![500];
            }
            ExperimentKind::EmpiricalPdf => {
                cfg.m = 1;
                cfg.s = vec![1.0, 2.0, 4.0];
            }
            _ => {}
        }
        cfg
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.m == 0 {
            return bad("m must be at least 1".into());
        }
        let shapes: Vec<f64> = match self.experiment {
            ExperimentKind::Consistency | ExperimentKind::Normality | ExperimentKind::EmpiricalPdf => {
                self.s.clone()
            }
            ExperimentKind::Misspec => self.s0.iter().copied().chain([self.s1]).collect(),
            ExperimentKind::StudentT => self.s0.clone(),
        };
        if shapes.is_empty() || shapes.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
            return bad("shapes must be a non-empty list of finite positive values".into());
        }
        match self.experiment {
            ExperimentKind::EmpiricalPdf => {
                if self.m != 1 {
                    return bad("empirical-pdf is defined for m = 1".into());
                }
                if self.bins == 0 || !(self.x_max > 0.0) || self.pdf_n == 0 {
                    return bad("empirical-pdf needs bins >= 1, x_max > 0 and pdf_n >= 1".into());
                }
                return Ok(());
            }
            ExperimentKind::StudentT => {
                if self.nu.is_empty() || self.nu.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
                    return bad("nu must be a non-empty list of finite positive values".into());
                }
            }
            ExperimentKind::Normality if self.replicates < 20 => {
                return bad(format!("normality needs replicates >= 20, got {}", self.replicates));
            }
            _ => {}
        }
        if self.n.is_empty() || self.k.is_empty() {
            return bad("n and k must be non-empty".into());
        }
        for &n in &self.n {
            for &k in &self.k {
                if k == 0 || k >= n {
                    return Err(Error::Arity { k, n });
                }
            }
        }
        if self.repetitions == 0 {
            return bad("repetitions must be at least 1".into());
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        Sha256::digest(json.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn header(&self) -> String {
        format!(
            "# ggfit {} experiment={} seed={} config={}",
            crate::VERSION,
            self.experiment,
            self.seed,
            self.hash()
        )
    }
}

/// Stream keyed by a textual description of the data-generating process.
pub fn keyed_stream(seed: u64, key: &str) -> RandomStream {
    let digest = Sha256::digest(key.as_bytes());
    let mut id = [0u8; 8];
    id.copy_from_slice(&digest[..8]);
    RandomStream::new(seed, u64::from_le_bytes(id))
}

/// One row of a statistic study.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatRow {
    pub experiment: ExperimentKind,
    pub m: usize,
    pub s0: f64,
    pub s1: Option<f64>,
    pub nu: Option<f64>,
    pub n: usize,
    pub k: usize,
    pub repetition: usize,
    pub value: f64,
    /// Mean of `value` over the repetitions of this grid point.
    pub t_bar: f64,
    /// Unbiased variance of `value` over the repetitions.
    pub s2: f64,
}

/// One histogram bin of the empirical-pdf study.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PdfRow {
    pub m: usize,
    pub s: f64,
    pub x: f64,
    pub empirical_density: f64,
    pub model_density: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExperimentOutput {
    Statistics(Vec<StatRow>),
    Density(Vec<PdfRow>),
}

fn mean_and_variance(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = compensated_sum(values.iter().copied()) / n;
    let var = if values.len() > 1 {
        compensated_sum(values.iter().map(|v| (v - mean).powi(2))) / (n - 1.0)
    } else {
        f64::NAN
    };
    (mean, var)
}

#[derive(Clone, Copy)]
enum Source {
    GG(f64),
    ST(f64),
}

impl Source {
    fn key(self, m: usize, n: usize, repetition: usize) -> String {
        match self {
            Source::GG(s) => format!("gg m={m} s={s} n={n} rep={repetition}"),
            Source::ST(nu) => format!("st m={m} nu={nu} n={n} rep={repetition}"),
        }
    }
}

/// Evaluates `T(m, s₀)` for every tested shape and `k` on data sets drawn
/// from each source, then attaches per-group means and variances.
fn statistic_study(
    cfg: &ExperimentConfig,
    sources: &[Source],
    pairs: &(dyn Fn(Source) -> Vec<f64> + Sync),
) -> Result<Vec<StatRow>> {
    let m = cfg.m;
    let mut tasks = Vec::new();
    for (si, &src) in sources.iter().enumerate() {
        for (ni, &n) in cfg.n.iter().enumerate() {
            for rep in 0..cfg.repetitions {
                tasks.push((si, src, ni, n, rep));
            }
        }
    }
    let results: Vec<Vec<Cell>> = tasks
        .par_iter()
        .map(|&(si, src, ni, n, rep)| {
            let stream = keyed_stream(cfg.seed, &src.key(m, n, rep));
            // Experiment data use the isotropic rate τ = 1/2.
            let sample = match src {
                Source::GG(s) => GGParams::isotropic(m, s)?.sample(n, stream)?,
                Source::ST(nu) => STParams::new(m, nu)?.sample(n, stream)?,
            };
            let mut out = Vec::new();
            for (s0i, s0) in pairs(src).into_iter().enumerate() {
                for (ki, &k) in cfg.k.iter().enumerate() {
                    out.push((si * 1_000 + s0i, ki, ni, rep, test_statistic(&sample, s0, k)?));
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let mut flat: Vec<_> = results.into_iter().flatten().collect();
    flat.sort_by_key(|&(g, ki, ni, rep, _)| (g, ki, ni, rep));

    let mut rows = Vec::with_capacity(flat.len());
    for group in flat.chunk_by(|a, b| (a.0, a.1, a.2) == (b.0, b.1, b.2)) {
        let (g, ki, ni, ..) = group[0];
        let src = sources[g / 1_000];
        let s0 = pairs(src)[g % 1_000];
        let values: Vec<f64> = group.iter().map(|r| r.4).collect();
        let (t_bar, s2) = mean_and_variance(&values);
        for &(.., rep, value) in group {
            rows.push(StatRow {
                experiment: cfg.experiment,
                m,
                s0,
                s1: match src {
                    Source::GG(s) => Some(s),
                    Source::ST(_) => None,
                },
                nu: match src {
                    Source::ST(nu) => Some(nu),
                    Source::GG(_) => None,
                },
                n: cfg.n[ni],
                k: cfg.k[ki],
                repetition: rep,
                value,
                t_bar,
                s2,
            });
        }
    }
    Ok(rows)
}

fn normality_study(cfg: &ExperimentConfig) -> Result<Vec<StatRow>> {
    let mut tasks = Vec::new();
    for &s in &cfg.s {
        for &k in &cfg.k {
            for &n in &cfg.n {
                for rep in 0..cfg.repetitions {
                    tasks.push((s, k, n, rep));
                }
            }
        }
    }
    let m = cfg.m;
    let pvalues: Vec<f64> = tasks
        .par_iter()
        .map(|&(s, k, n, rep)| {
            let key = format!("normality m={m} s={s} n={n} k={k} rep={rep}");
            let t = simulate_null_statistics(m, s, n, k, cfg.replicates, keyed_stream(cfg.seed, &key))?;
            Ok(shapiro_wilk(&t)?.p_value)
        })
        .collect::<Result<_>>()?;
    let mut rows = Vec::with_capacity(tasks.len());
    for (chunk, values) in tasks.chunks(cfg.repetitions).zip(pvalues.chunks(cfg.repetitions)) {
        let (t_bar, s2) = mean_and_variance(values);
        for (&(s, k, n, rep), &value) in chunk.iter().zip(values) {
            rows.push(StatRow {
                experiment: cfg.experiment,
                m,
                s0: s,
                s1: Some(s),
                nu: None,
                n,
                k,
                repetition: rep,
                value,
                t_bar,
                s2,
            });
        }
    }
    Ok(rows)
}

/// Histogram of `X/σ` for `X ~ GG(1, s)` at `τ = 1/2`, where `σ² = β(1, s)`
/// is the variance, alongside the density of `X/σ`.
pub fn empirical_pdf(s: f64, n: usize, bins: usize, x_max: f64, stream: RandomStream) -> Result<Vec<PdfRow>> {
    let params = GGParams::isotropic(1, s)?;
    let sigma = gg_variance_scale(1, s).sqrt();
    let sample = params.sample(n, stream)?;
    let width = 2.0 * x_max / bins as f64;
    let mut counts = vec![0usize; bins];
    for &x in sample.as_slice() {
        let z = x / sigma;
        let b = ((z + x_max) / width).floor();
        if b >= 0.0 && (b as usize) < bins {
            counts[b as usize] += 1;
        }
    }
    Ok(counts
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let x = -x_max + (i as f64 + 0.5) * width;
            PdfRow {
                m: 1,
                s,
                x,
                empirical_density: c as f64 / (n as f64 * width),
                model_density: sigma * params.log_pdf(&[sigma * x]).exp(),
            }
        })
        .collect())
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let out = match cfg.experiment {
        ExperimentKind::Consistency => {
            let sources: Vec<Source> = cfg.s.iter().map(|&s| Source::GG(s)).collect();
            ExperimentOutput::Statistics(statistic_study(cfg, &sources, &|src| match src {
                Source::GG(s) => vec![s],
                Source::ST(_) => unreachable!(),
            })?)
        }
        ExperimentKind::Misspec => {
            let s0 = cfg.s0.clone();
            ExperimentOutput::Statistics(statistic_study(cfg, &[Source::GG(cfg.s1)], &|_| s0.clone())?)
        }
        ExperimentKind::StudentT => {
            let sources: Vec<Source> = cfg.nu.iter().map(|&nu| Source::ST(nu)).collect();
            let s0 = cfg.s0.clone();
            ExperimentOutput::Statistics(statistic_study(cfg, &sources, &|_| s0.clone())?)
        }
        ExperimentKind::Normality => ExperimentOutput::Statistics(normality_study(cfg)?),
        ExperimentKind::EmpiricalPdf => {
            let rows = cfg
                .s
                .par_iter()
                .map(|&s| {
                    let stream = keyed_stream(cfg.seed, &format!("empirical-pdf s={s} n={}", cfg.pdf_n));
                    empirical_pdf(s, cfg.pdf_n, cfg.bins, cfg.x_max, stream)
                })
                .collect::<Result<Vec<_>>>()?;
            ExperimentOutput::Density(rows.into_iter().flatten().collect())
        }
    };
    Ok(out)
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes the header comment and the CSV body.
pub fn write_csv<W: Write>(cfg: &ExperimentConfig, output: &ExperimentOutput, out: W) -> Result<()> {
    let mut out = out;
    writeln!(out, "{}", cfg.header())?;
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
    match output {
        ExperimentOutput::Statistics(rows) => {
            w.write_record(["experiment", "m", "s0", "s1", "nu", "n", "k", "repetition", "value", "t_bar", "s2"])
                .map_err(csv_err)?;
            for r in rows {
                w.write_record([
                    r.experiment.to_string(),
                    r.m.to_string(),
                    r.s0.to_string(),
                    opt(r.s1),
                    opt(r.nu),
                    r.n.to_string(),
                    r.k.to_string(),
                    r.repetition.to_string(),
                    r.value.to_string(),
                    r.t_bar.to_string(),
                    r.s2.to_string(),
                ])
                .map_err(csv_err)?;
            }
        }
        ExperimentOutput::Density(rows) => {
            w.write_record(["experiment", "m", "s", "x", "empirical_density", "model_density"])
                .map_err(csv_err)?;
            for r in rows {
                w.write_record([
                    cfg.experiment.to_string(),
                    r.m.to_string(),
                    r.s.to_string(),
                    r.x.to_string(),
                    r.empirical_density.to_string(),
                    r.model_density.to_string(),
                ])
                .map_err(csv_err)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(kind: ExperimentKind) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::defaults(kind);
        cfg.n = vec![50, 100];
        cfg.repetitions = 3;
        cfg.replicates = 20;
        cfg.pdf_n = 2000;
        cfg
    }

    #[test]
    fn names_round_trip() {
        for kind in ExperimentKind::ALL {
            assert_eq!(kind.name().parse::<ExperimentKind>().unwrap(), kind);
        }
        assert!(matches!("fig3".parse::<ExperimentKind>(), Err(Error::Config(_))));
    }

    #[test]
    fn hash_tracks_every_field() {
        let a = ExperimentConfig::defaults(ExperimentKind::Consistency);
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.seed += 1;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn rows_are_canonical_and_grouped() {
        let mut cfg = small(ExperimentKind::Misspec);
        cfg.k = vec![1, 2];
        let ExperimentOutput::Statistics(rows) = run_experiment(&cfg).unwrap() else {
            panic!("expected statistics");
        };
        assert_eq!(rows.len(), 4 * 2 * 2 * 3);
        for w in rows.windows(2) {
            let key = |r: &StatRow| (cfg.s0.iter().position(|s| *s == r.s0).unwrap(), r.k, r.n, r.repetition);
            assert!(key(&w[0]) < key(&w[1]));
        }
        let group: Vec<&StatRow> = rows.iter().take(3).collect();
        let mean = group.iter().map(|r| r.value).sum::<f64>() / 3.0;
        assert!((group[0].t_bar - mean).abs() < 1e-12);
    }

    #[test]
    fn same_data_across_tested_shapes() {
        // At s₀ = s₁ the misspec rows coincide with the consistency study.
        let mut mis = small(ExperimentKind::Misspec);
        mis.s0 = vec![2.0];
        let mut con = small(ExperimentKind::Consistency);
        con.s = vec![2.0];
        let (ExperimentOutput::Statistics(a), ExperimentOutput::Statistics(b)) =
            (run_experiment(&mis).unwrap(), run_experiment(&con).unwrap())
        else {
            panic!("expected statistics");
        };
        let va: Vec<f64> = a.iter().map(|r| r.value).collect();
        let vb: Vec<f64> = b.iter().map(|r| r.value).collect();
        assert_eq!(va, vb);
    }

    #[test]
    fn csv_has_header_and_schema() {
        let cfg = small(ExperimentKind::StudentT);
        let out = run_experiment(&cfg).unwrap();
        let mut buf = Vec::new();
        write_csv(&cfg, &out, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        let header = lines.next().unwrap();
        assert!(header.starts_with("# ggfit "));
        assert!(header.contains("experiment=student-t seed=1 config="));
        assert_eq!(lines.next().unwrap(), "experiment,m,s0,s1,nu,n,k,repetition,value,t_bar,s2");
        assert!(lines.next().unwrap().starts_with("student-t,2,0.5,,3,50,1,0,"));
    }

    #[test]
    fn invalid_configs() {
        let mut cfg = small(ExperimentKind::Consistency);
        cfg.k = vec![50];
        assert!(matches!(cfg.validate(), Err(Error::Arity { .. })));
        let mut cfg = small(ExperimentKind::EmpiricalPdf);
        cfg.m = 2;
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        let mut cfg = small(ExperimentKind::Normality);
        cfg.replicates = 10;
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn empirical_pdf_integrates_to_one() {
        let rows = empirical_pdf(2.0, 5000, 40, 6.0, RandomStream::new(5, 0)).unwrap();
        let width = 12.0 / 40.0;
        let mass: f64 = rows.iter().map(|r| r.empirical_density * width).sum();
        assert!((mass - 1.0).abs() < 1e-3);
        let model: f64 = rows.iter().map(|r| r.model_density * width).sum();
        assert!((model - 1.0).abs() < 1e-3);
    }
}
