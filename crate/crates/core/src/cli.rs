//! Command-line front end.
//!
//! Exit codes: 0 not rejected / success, 1 rejected, 2 usage or invalid
//! input, 3 duplicate points, 4 missing or incompatible critical-value
//! table, 5 I/O failure.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::bounds::{
    bounds_log_concave, covariance_constant, lower_bound_bounded, lower_bound_covariance,
    lower_bound_moment, lower_bound_symmetric_1d, pathological_mean, pathological_truncated_entropy,
    DensitySummary,
};
use crate::distributions::{max_entropy_bound, GGParams, RandomStream, STParams};
use crate::entropy::knn_entropy_with;
use crate::error::{Error, Result};
use crate::experiment::{run_experiment, write_csv, ExperimentConfig, ExperimentKind};
use crate::gof::{critical_values, run_test, CriticalSource, CriticalValueTable, Tail};
use crate::neighbors::{Backend, Sample};

pub const EXIT_REJECT: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DUPLICATES: i32 = 3;
pub const EXIT_LOOKUP: i32 = 4;
pub const EXIT_IO: i32 = 5;

const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Parser)]
#[command(name = "ggfit", version, about = "k-NN entropy estimation and a maximum-entropy goodness-of-fit test for generalized Gaussian data")]
pub struct Cli {
    /// Master seed for every random stream.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Flat TOML file of default values; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Draw a sample from GG(m, s) or ST(m, ν) as CSV.
    Sample(SampleArgs),
    /// Estimate entropy from a CSV data file.
    Entropy(EntropyArgs),
    /// Test whether a CSV data file comes from GG(m, s).
    Test(TestArgs),
    /// Simulate a table of null critical values.
    CriticalValues(CriticalArgs),
    /// Run a simulation study and write long-format CSV.
    Experiment(ExperimentArgs),
    /// Report entropy bounds for a built-in family.
    Bounds(BoundsArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Dist {
    Gg,
    St,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BackendArg {
    Brute,
    Indexed,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Family {
    Gg,
    Pathological,
}

#[derive(Debug, Args)]
struct SampleArgs {
    #[arg(long, value_enum)]
    dist: Option<Dist>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    s: Option<f64>,
    /// Rate τ of GG_τ(m, s); 0.5 gives the isotropic exponential power law.
    #[arg(long)]
    rate: Option<f64>,
    #[arg(long)]
    nu: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    /// Divide every coordinate by its standard deviation.
    #[arg(long)]
    standardize: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EntropyArgs {
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, value_enum)]
    backend: Option<BackendArg>,
}

#[derive(Debug, Args)]
struct TestArgs {
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    s: Option<f64>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    /// left, right or two-sided.
    #[arg(long)]
    tail: Option<Tail>,
    #[arg(long, conflicts_with = "fresh_mc")]
    table: Option<PathBuf>,
    /// Simulate this many null replicates instead of reading a table.
    #[arg(long)]
    fresh_mc: Option<usize>,
}

#[derive(Debug, Args)]
struct CriticalArgs {
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    s: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    alphas: Option<Vec<f64>>,
    #[arg(long)]
    replicates: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    /// consistency, misspec, student-t, normality or empirical-pdf.
    name: Option<String>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    s: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    s0: Option<Vec<f64>>,
    #[arg(long)]
    s1: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    nu: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    k: Option<Vec<usize>>,
    #[arg(long)]
    repetitions: Option<usize>,
    #[arg(long)]
    replicates: Option<usize>,
    #[arg(long)]
    pdf_n: Option<usize>,
    #[arg(long)]
    bins: Option<usize>,
    #[arg(long)]
    x_max: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BoundsArgs {
    #[arg(long, value_enum)]
    family: Option<Family>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    s: Option<f64>,
    #[arg(long)]
    rate: Option<f64>,
}

/// Exit code for a library error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::DuplicatePoints { .. } => EXIT_DUPLICATES,
        Error::Lookup(_) => EXIT_LOOKUP,
        Error::Io(_) => EXIT_IO,
        _ => EXIT_USAGE,
    }
}

const KNOWN_KEYS: &[&str] = &[
    "seed", "threads", "dist", "m", "s", "rate", "nu", "n", "standardize", "output", "data", "k",
    "backend", "alpha", "tail", "table", "fresh_mc", "alphas", "replicates", "experiment", "s0",
    "s1", "repetitions", "pdf_n", "bins", "x_max", "family",
];

/// Flat key-value configuration read from TOML.
#[derive(Debug, Default)]
struct FileConfig(toml::Table);

impl FileConfig {
    fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let table: toml::Table = text
            .parse()
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        for (key, value) in &table {
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(Error::Config(format!("unknown configuration key '{key}'")));
            }
            if value.is_table() {
                return Err(Error::Config(format!("configuration key '{key}' must not be a table")));
            }
        }
        Ok(Self(table))
    }

    fn bad(key: &str, want: &str) -> Error {
        Error::Config(format!("configuration key '{key}' must be {want}"))
    }

    fn scalar_f64(key: &str, v: &toml::Value) -> Result<f64> {
        match v {
            toml::Value::Float(f) => Ok(*f),
            toml::Value::Integer(i) => Ok(*i as f64),
            _ => Err(Self::bad(key, "a number")),
        }
    }

    fn scalar_usize(key: &str, v: &toml::Value) -> Result<usize> {
        v.as_integer()
            .and_then(|i| usize::try_from(i).ok())
            .ok_or_else(|| Self::bad(key, "a non-negative integer"))
    }

    fn f64(&self, key: &str) -> Result<Option<f64>> {
        self.0.get(key).map(|v| Self::scalar_f64(key, v)).transpose()
    }

    fn usize(&self, key: &str) -> Result<Option<usize>> {
        self.0.get(key).map(|v| Self::scalar_usize(key, v)).transpose()
    }

    fn u64(&self, key: &str) -> Result<Option<u64>> {
        self.0
            .get(key)
            .map(|v| {
                v.as_integer()
                    .and_then(|i| u64::try_from(i).ok())
                    .ok_or_else(|| Self::bad(key, "a non-negative integer"))
            })
            .transpose()
    }

    fn str(&self, key: &str) -> Result<Option<String>> {
        self.0
            .get(key)
            .map(|v| v.as_str().map(str::to_string).ok_or_else(|| Self::bad(key, "a string")))
            .transpose()
    }

    fn bool(&self, key: &str) -> Result<Option<bool>> {
        self.0
            .get(key)
            .map(|v| v.as_bool().ok_or_else(|| Self::bad(key, "a boolean")))
            .transpose()
    }

    fn path(&self, key: &str) -> Result<Option<PathBuf>> {
        Ok(self.str(key)?.map(PathBuf::from))
    }

    fn list<T>(&self, key: &str, item: impl Fn(&str, &toml::Value) -> Result<T>) -> Result<Option<Vec<T>>> {
        match self.0.get(key) {
            None => Ok(None),
            Some(toml::Value::Array(a)) => a.iter().map(|v| item(key, v)).collect::<Result<_>>().map(Some),
            Some(v) => item(key, v).map(|x| Some(vec![x])),
        }
    }

    fn f64_list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        self.list(key, Self::scalar_f64)
    }

    fn usize_list(&self, key: &str) -> Result<Option<Vec<usize>>> {
        self.list(key, Self::scalar_usize)
    }
}

fn required<T>(value: Option<T>, name: &str) -> Result<T> {
    value.ok_or_else(|| Error::Config(format!("missing required value '--{name}'")))
}

fn parse_enum<T: ValueEnum>(key: &str, text: Option<String>) -> Result<Option<T>> {
    text.map(|t| T::from_str(&t, true).map_err(|_| Error::Config(format!("invalid value '{t}' for '{key}'"))))
        .transpose()
}

/// Reads a numeric CSV matrix; lines starting with `#` are comments and a
/// non-numeric first record is taken as a header.
pub fn read_sample(path: &Path) -> Result<Sample> {
    let file = File::open(path)?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(file);
    let mut data = Vec::new();
    let mut dim = None;
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => Error::Io(io::Error::other(e.to_string())),
            _ => Error::InvalidSample(format!("{}: {e}", path.display())),
        })?;
        let parsed: std::result::Result<Vec<f64>, _> = record.iter().map(str::parse::<f64>).collect();
        let row = match parsed {
            Ok(row) => row,
            Err(_) if i == 0 => continue,
            Err(e) => {
                return Err(Error::InvalidSample(format!("{}: record {}: {e}", path.display(), i + 1)));
            }
        };
        data.extend_from_slice(&row);
        dim.get_or_insert(row.len());
    }
    let dim = dim.ok_or_else(|| Error::InvalidSample(format!("{}: no data rows", path.display())))?;
    Sample::new(data, dim)
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

struct Context {
    seed: u64,
    cfg: FileConfig,
}

fn cmd_sample(ctx: &Context, a: SampleArgs) -> Result<i32> {
    let cfg = &ctx.cfg;
    let dist = match a.dist {
        Some(d) => d,
        None => parse_enum("dist", cfg.str("dist")?)?.unwrap_or(Dist::Gg),
    };
    let m = a.m.or(cfg.usize("m")?).unwrap_or(2);
    let n = required(a.n.or(cfg.usize("n")?), "n")?;
    let standardize = a.standardize || cfg.bool("standardize")?.unwrap_or(false);
    let stream = RandomStream::new(ctx.seed, 0);
    let (sample, sd, description) = match dist {
        Dist::Gg => {
            let s = required(a.s.or(cfg.f64("s")?), "s")?;
            let rate = a.rate.or(cfg.f64("rate")?).unwrap_or(0.5);
            let params = GGParams::new(m, s, rate)?;
            (params.sample(n, stream)?, params.coordinate_sd(), format!("dist=gg m={m} s={s} rate={rate}"))
        }
        Dist::St => {
            let nu = required(a.nu.or(cfg.f64("nu")?), "nu")?;
            let params = STParams::new(m, nu)?;
            let sd = if nu > 2.0 { (nu / (nu - 2.0)).sqrt() } else { f64::NAN };
            (params.sample(n, stream)?, sd, format!("dist=st m={m} nu={nu}"))
        }
    };
    let scale = if standardize {
        if !sd.is_finite() {
            return Err(Error::Config("standardizing needs a finite variance (nu > 2)".into()));
        }
        1.0 / sd
    } else {
        1.0
    };
    let out_path = a.out.or(cfg.path("output")?);
    let mut out = open_output(out_path.as_deref())?;
    writeln!(
        out,
        "# ggfit {} {description} n={n} seed={} standardize={standardize}",
        crate::VERSION,
        ctx.seed
    )?;
    let mut line = String::new();
    for row in sample.rows() {
        line.clear();
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                line.push(',');
            }
            line.push_str(&(v * scale).to_string());
        }
        writeln!(out, "{line}")?;
    }
    out.flush()?;
    Ok(0)
}

fn cmd_entropy(ctx: &Context, a: EntropyArgs) -> Result<i32> {
    let cfg = &ctx.cfg;
    let data = required(a.data.or(cfg.path("data")?), "data")?;
    let k = a.k.or(cfg.usize("k")?).unwrap_or(1);
    let backend = match a.backend.or(parse_enum("backend", cfg.str("backend")?)?) {
        Some(BackendArg::Brute) => Backend::Brute,
        _ => Backend::Indexed,
    };
    let sample = read_sample(&data)?;
    print_json(&knn_entropy_with(&sample, k, backend)?)?;
    Ok(0)
}

fn cmd_test(ctx: &Context, a: TestArgs) -> Result<i32> {
    let cfg = &ctx.cfg;
    let data = required(a.data.or(cfg.path("data")?), "data")?;
    let s = required(a.s.or(cfg.f64("s")?), "s")?;
    let k = a.k.or(cfg.usize("k")?).unwrap_or(1);
    let alpha = a.alpha.or(cfg.f64("alpha")?).unwrap_or(0.05);
    let tail = match a.tail {
        Some(t) => t,
        None => cfg.str("tail")?.map(|t| t.parse()).transpose()?.unwrap_or_default(),
    };
    let (table_path, fresh) = if a.table.is_some() || a.fresh_mc.is_some() {
        (a.table, a.fresh_mc)
    } else {
        (cfg.path("table")?, cfg.usize("fresh_mc")?)
    };
    let sample = read_sample(&data)?;
    let outcome = match (table_path, fresh) {
        (Some(path), None) => {
            let table = CriticalValueTable::load(&path)
                .map_err(|e| Error::Lookup(format!("cannot load table {}: {e}", path.display())))?;
            run_test(&sample, s, k, alpha, CriticalSource::Table(&table), tail)?
        }
        (None, Some(replicates)) => {
            let source = CriticalSource::FreshMonteCarlo {
                replicates,
                stream: RandomStream::new(ctx.seed, 0),
            };
            run_test(&sample, s, k, alpha, source, tail)?
        }
        (Some(_), Some(_)) => return Err(Error::Config("use either --table or --fresh-mc".into())),
        (None, None) => return Err(Error::Lookup("no critical values: pass --table or --fresh-mc".into())),
    };
    print_json(&outcome)?;
    Ok(if outcome.reject { EXIT_REJECT } else { 0 })
}

fn cmd_critical_values(ctx: &Context, a: CriticalArgs) -> Result<i32> {
    let cfg = &ctx.cfg;
    let m = required(a.m.or(cfg.usize("m")?), "m")?;
    let s = required(a.s.or(cfg.f64("s")?), "s")?;
    let n = required(a.n.or(cfg.usize("n")?), "n")?;
    let k = a.k.or(cfg.usize("k")?).unwrap_or(1);
    let alphas = match a.alphas {
        Some(v) => v,
        None => cfg.f64_list("alphas")?.unwrap_or_else(|| vec![0.01, 0.05, 0.1]),
    };
    let replicates = a.replicates.or(cfg.usize("replicates")?).unwrap_or(10_000);
    let table = critical_values(m, s, n, k, &alphas, replicates, RandomStream::new(ctx.seed, 0))?;
    match a.out.or(cfg.path("output")?) {
        Some(path) => table.save(&path)?,
        None => {
            if table.replicates < crate::gof::MIN_PERSISTED_REPLICATES {
                return Err(Error::Config(format!(
                    "persisted tables need at least {} replicates",
                    crate::gof::MIN_PERSISTED_REPLICATES
                )));
            }
            io::stdout().lock().write_all(table.to_json()?.as_bytes())?;
        }
    }
    Ok(0)
}

fn cmd_experiment(ctx: &Context, a: ExperimentArgs) -> Result<i32> {
    let c = &ctx.cfg;
    let name = required(a.name.or(c.str("experiment")?), "experiment name")?;
    let kind: ExperimentKind = name.parse()?;
    let mut cfg = ExperimentConfig::defaults(kind);
    cfg.seed = ctx.seed;
    macro_rules! set {
        ($field:ident, $cli:expr, $file:expr) => {
            if let Some(v) = $cli.or($file) {
                cfg.$field = v;
            }
        };
    }
    set!(m, a.m, c.usize("m")?);
    set!(s, a.s, c.f64_list("s")?);
    set!(s0, a.s0, c.f64_list("s0")?);
    set!(s1, a.s1, c.f64("s1")?);
    set!(nu, a.nu, c.f64_list("nu")?);
    set!(n, a.n, c.usize_list("n")?);
    set!(k, a.k, c.usize_list("k")?);
    set!(repetitions, a.repetitions, c.usize("repetitions")?);
    set!(replicates, a.replicates, c.usize("replicates")?);
    set!(pdf_n, a.pdf_n, c.usize("pdf_n")?);
    set!(bins, a.bins, c.usize("bins")?);
    set!(x_max, a.x_max, c.f64("x_max")?);
    let output = run_experiment(&cfg)?;
    let out = open_output(a.out.or(c.path("output")?).as_deref())?;
    write_csv(&cfg, &output, out)?;
    Ok(0)
}

#[derive(Debug, Serialize)]
struct GGBoundReport {
    family: &'static str,
    m: usize,
    s: f64,
    rate: f64,
    entropy: f64,
    max_entropy_bound: f64,
    lower_bound_bounded: f64,
    log_concave: bool,
    log_concave_interval: Option<(f64, f64)>,
    lower_bound_moment_p1: Option<f64>,
    lower_bound_moment_p2: Option<f64>,
    lower_bound_symmetric_p1: Option<f64>,
    covariance_constant: Option<f64>,
    lower_bound_covariance: Option<f64>,
}

#[derive(Debug, Serialize)]
struct PathologicalReport {
    family: &'static str,
    mean: f64,
    max_entropy_bound: f64,
    truncated_entropy: Vec<(f64, f64)>,
}

fn gg_report(m: usize, s: f64, rate: f64) -> Result<GGBoundReport> {
    let p = GGParams::new(m, s, rate)?;
    let mut summary = DensitySummary::new(m, p.log_normalizer().exp())?;
    let log_concave = s >= 1.0;
    if log_concave {
        summary = summary.log_concave().symmetric().unconditional();
    }
    // Central moment norms ‖X‖_p = (E‖X‖^p)^{1/p}; the law is centred.
    summary = summary
        .with_moment_norm(1.0, p.abs_moment(1.0)?)
        .with_moment_norm(2.0, p.abs_moment(2.0)?.sqrt());
    let var = p.coordinate_sd().powi(2);
    let mut cov = vec![0.0; m * m];
    for i in 0..m {
        cov[i * m + i] = var;
    }
    summary = summary.with_covariance(cov)?;
    let opt = |r: Result<f64>| r.ok();
    Ok(GGBoundReport {
        family: "gg",
        m,
        s,
        rate,
        entropy: p.entropy(),
        max_entropy_bound: max_entropy_bound(m, s, p.moment())?,
        lower_bound_bounded: lower_bound_bounded(&summary),
        log_concave,
        log_concave_interval: bounds_log_concave(&summary).ok(),
        lower_bound_moment_p1: opt(lower_bound_moment(&summary, 1.0)),
        lower_bound_moment_p2: opt(lower_bound_moment(&summary, 2.0)),
        lower_bound_symmetric_p1: opt(lower_bound_symmetric_1d(&summary, 1.0)),
        covariance_constant: log_concave.then(|| covariance_constant(&summary)),
        lower_bound_covariance: opt(lower_bound_covariance(&summary)),
    })
}

fn cmd_bounds(ctx: &Context, a: BoundsArgs) -> Result<i32> {
    let cfg = &ctx.cfg;
    let family = match a.family {
        Some(f) => f,
        None => parse_enum("family", cfg.str("family")?)?.unwrap_or(Family::Gg),
    };
    match family {
        Family::Gg => {
            let m = a.m.or(cfg.usize("m")?).unwrap_or(1);
            let s = a.s.or(cfg.f64("s")?).unwrap_or(2.0);
            let rate = a.rate.or(cfg.f64("rate")?).unwrap_or(0.5);
            print_json(&gg_report(m, s, rate)?)?;
        }
        Family::Pathological => {
            let mean = pathological_mean()?;
            let truncated_entropy = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6]
                .into_iter()
                .map(|eps| pathological_truncated_entropy(eps).map(|h| (eps, h)))
                .collect::<Result<_>>()?;
            print_json(&PathologicalReport {
                family: "pathological",
                mean,
                max_entropy_bound: max_entropy_bound(1, 1.0, mean)?,
                truncated_entropy,
            })?;
        }
    }
    Ok(0)
}

fn dispatch(cli: Cli) -> Result<i32> {
    let cfg = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let seed = cli.seed.or(cfg.u64("seed")?).unwrap_or(DEFAULT_SEED);
    if let Some(threads) = cli.threads.or(cfg.usize("threads")?) {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    }
    let ctx = Context { seed, cfg };
    match cli.command {
        Command::Sample(a) => cmd_sample(&ctx, a),
        Command::Entropy(a) => cmd_entropy(&ctx, a),
        Command::Test(a) => cmd_test(&ctx, a),
        Command::CriticalValues(a) => cmd_critical_values(&ctx, a),
        Command::Experiment(a) => cmd_experiment(&ctx, a),
        Command::Bounds(a) => cmd_bounds(&ctx, a),
    }
}

/// Parses the process arguments, runs the command and returns the exit code.
pub fn main() -> i32 {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("ggfit: {err}");
            exit_code(&err)
        }
    }
}
