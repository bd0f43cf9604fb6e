//! The `locwalk` command line front end.
//!
//! Every run is described by an [`ExperimentConfig`]. It is assembled from an
//! optional JSON file given with `--config` and then overridden by explicit
//! flags. The file may be a bare config or the JSON header of an earlier run,
//! in which case its `"config"` entry is used. A run writes `<prefix>.csv`
//! with the data and `<prefix>.json` with the resolved config, the seed, the
//! crate version and the wall time.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::coins::{CoinDistribution, DisorderRealization, UnitaryCoin};
use crate::groupcheck::{check_hypotheses, CheckOptions};
use crate::lattice::{self, Spin};
use crate::lyapunov::{density_of_states_eta, estimate_lyapunov, integrated_dos, thouless_rhs, DEFAULT_BINS};
use crate::restriction::{build_finite_walk, eigenfunction_decay};
use crate::transfer::{leading_coefficient, resolvent_entry_via_transfer, spectral_polynomial_scaled};
use crate::walk::{localization_profile, step_with, variance, CoinCache, WalkState};

pub const SCHEMA_VERSION: u32 = 1;
pub const THREADS_ENV: &str = "LOCWALK_THREADS";

#[derive(Debug, Error)]
pub enum CliError {
    /// Invalid input; exit code 2.
    #[error("config error: {0}")]
    Config(String),
    /// A numerical precondition failed inside `operation`; exit code 1.
    #[error("{operation} failed: {message}")]
    Numerical { operation: &'static str, message: String },
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical { .. } | CliError::Io { .. } => 1,
        }
    }
}

fn numerical<E: std::fmt::Display>(operation: &'static str) -> impl FnOnce(E) -> CliError {
    move |e| CliError::Numerical {
        operation,
        message: e.to_string(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Simulate,
    Localize,
    Spectrum,
    Dos,
    Lyapunov,
    Thouless,
    Resolvent,
    Specpoly,
    Check,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Localize => "localize",
            Command::Spectrum => "spectrum",
            Command::Dos => "dos",
            Command::Lyapunov => "lyapunov",
            Command::Thouless => "thouless",
            Command::Resolvent => "resolvent",
            Command::Specpoly => "specpoly",
            Command::Check => "check",
        }
    }
}

/// Everything that determines the output of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub command: Option<Command>,
    pub distribution: CoinDistribution,
    pub seed: u64,
    /// Half-width of the finite restriction.
    pub n: usize,
    pub eta_l: f64,
    pub eta_r: f64,
    pub horizon: usize,
    pub x0: i64,
    pub spin: Spin,
    pub distances: Vec<usize>,
    pub realizations: usize,
    pub bins: usize,
    pub z_abs: f64,
    /// Phase of `z` in radians, for commands that take a single `z`.
    pub z_phase: f64,
    /// Number of equally spaced phases `2πk/K` for grid commands.
    pub phase_count: usize,
    pub chain_length: usize,
    pub chain_realizations: usize,
    pub samples: usize,
    pub zeta: f64,
    pub max_word_length: usize,
    pub trials: usize,
    /// f-indices of resolvent rows and columns; all retained ones if empty.
    pub rows: Vec<i64>,
    pub cols: Vec<i64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            schema_version: SCHEMA_VERSION,
            command: None,
            distribution: CoinDistribution::Haar,
            seed: 0,
            n: 8,
            eta_l: 0.0,
            eta_r: 0.0,
            horizon: 200,
            x0: 0,
            spin: Spin::Plus,
            distances: vec![4, 8, 12, 16],
            realizations: 50,
            bins: DEFAULT_BINS,
            z_abs: 1.0,
            z_phase: 0.0,
            phase_count: 16,
            chain_length: 10_000,
            chain_realizations: 32,
            samples: 1024,
            zeta: 0.5,
            max_word_length: 8,
            trials: 64,
            rows: Vec::new(),
            cols: Vec::new(),
        }
    }
}

impl ExperimentConfig {
    pub fn z(&self) -> Complex64 {
        Complex64::from_polar(self.z_abs, self.z_phase)
    }

    pub fn phase_grid(&self) -> Vec<f64> {
        (0..self.phase_count)
            .map(|k| std::f64::consts::TAU * k as f64 / self.phase_count as f64)
            .collect()
    }

    fn validate(&self) -> Result<(), CliError> {
        let fail = |field: &str, why: &str| Err(CliError::Config(format!("field `{field}`: {why}")));
        if self.schema_version != SCHEMA_VERSION {
            return fail("schema_version", &format!("unsupported version {}", self.schema_version));
        }
        if self.command.is_none() {
            return fail("command", "missing");
        }
        self.distribution.validate().map_err(|e| CliError::Config(format!("field `distribution`: {e}")))?;
        if !(self.z_abs.is_finite() && self.z_abs > 0.0) {
            return fail("z_abs", "must be positive");
        }
        for (name, v) in [("eta_l", self.eta_l), ("eta_r", self.eta_r), ("z_phase", self.z_phase), ("zeta", self.zeta)] {
            if !v.is_finite() {
                return fail(name, "must be finite");
            }
        }
        if self.zeta <= 0.0 {
            return fail("zeta", "must be positive");
        }
        for (name, v) in [
            ("realizations", self.realizations),
            ("bins", self.bins),
            ("phase_count", self.phase_count),
            ("chain_realizations", self.chain_realizations),
            ("samples", self.samples),
            ("trials", self.trials),
        ] {
            if v == 0 {
                return fail(name, "must be at least 1");
            }
        }
        Ok(())
    }
}

#[derive(Debug, Parser)]
#[command(name = "locwalk", version, about = "Disordered one-dimensional quantum walks")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Evolve one realization and record norm and spread over time.
    Simulate(Flags),
    /// Disorder-averaged finite-horizon localization profile.
    Localize(Flags),
    /// Eigenphases of W(N) with per-eigenvector envelopes.
    Spectrum(Flags),
    /// Density of states histogram and its integrated curve.
    Dos(Flags),
    /// Lyapunov exponent on a circle of spectral parameters.
    Lyapunov(Flags),
    /// Lyapunov exponent against the density-of-states side of the Thouless relation.
    Thouless(Flags),
    /// Resolvent moduli from transfer matrices next to the dense inverse.
    Resolvent(Flags),
    /// Samples of the spectral polynomial on a circle.
    Specpoly(Flags),
    /// Certificates for non-compactness, irreducibility and ζ-integrability.
    Check(Flags),
}

#[derive(Debug, Args, Default)]
struct Flags {
    /// JSON config file, or the JSON header written by an earlier run.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Coin law: a JSON file, inline JSON, `haar` or `hadamard`.
    #[arg(long)]
    dist: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output prefix; `<prefix>.csv` and `<prefix>.json` are written.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: LOCWALK_THREADS, else available parallelism).
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    eta_l: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    eta_r: Option<f64>,
    #[arg(long)]
    horizon: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    x0: Option<i64>,
    /// Initial spin, `-` or `+`.
    #[arg(long)]
    spin: Option<Spin>,
    #[arg(long, value_delimiter = ',')]
    distances: Option<Vec<usize>>,
    #[arg(long)]
    realizations: Option<usize>,
    #[arg(long)]
    bins: Option<usize>,
    #[arg(long)]
    z_abs: Option<f64>,
    /// Phase of z in radians.
    #[arg(long = "z", alias = "z-phase", allow_negative_numbers = true)]
    z_phase: Option<f64>,
    #[arg(long)]
    phase_count: Option<usize>,
    #[arg(long)]
    chain_length: Option<usize>,
    #[arg(long)]
    chain_realizations: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    zeta: Option<f64>,
    #[arg(long)]
    max_word_length: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    rows: Option<Vec<i64>>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    cols: Option<Vec<i64>>,
}

fn read_to_string(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))
}

/// Parses a config file, accepting either a bare config or a run header.
/// Errors carry the line and column of the offending field.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, CliError> {
    #[derive(Deserialize)]
    struct Header {
        config: ExperimentConfig,
    }
    let v: Value = serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid JSON: {e}")))?;
    let is_header = v.get("config").is_some() && v.get("version").is_some();
    let parsed = if is_header {
        serde_json::from_str::<Header>(text).map(|h| h.config)
    } else {
        serde_json::from_str::<ExperimentConfig>(text)
    };
    parsed.map_err(|e| CliError::Config(format!("invalid config: {e}")))
}

/// Resolves `--dist` from a file path, inline JSON or one of the names
/// `haar` and `hadamard`.
pub fn parse_distribution(spec: &str) -> Result<CoinDistribution, CliError> {
    match spec {
        "haar" => return Ok(CoinDistribution::Haar),
        "hadamard" => return Ok(CoinDistribution::Fixed { coin: UnitaryCoin::hadamard() }),
        _ => {}
    }
    let text = if spec.trim_start().starts_with('{') {
        spec.to_string()
    } else {
        read_to_string(Path::new(spec))?
    };
    CoinDistribution::from_json(&text).map_err(|e| CliError::Config(format!("distribution {spec}: {e}")))
}

fn resolve(command: Command, f: &Flags) -> Result<ExperimentConfig, CliError> {
    let mut c = match &f.config {
        Some(p) => parse_config(&read_to_string(p)?)?,
        None => ExperimentConfig::default(),
    };
    if let Some(prev) = c.command {
        if prev != command {
            return Err(CliError::Config(format!(
                "field `command`: config is for `{}` but `{}` was requested",
                prev.name(),
                command.name()
            )));
        }
    }
    c.command = Some(command);
    if let Some(d) = &f.dist {
        c.distribution = parse_distribution(d)?;
    }
    macro_rules! take {
        ($($field:ident),*) => { $( if let Some(v) = f.$field.clone() { c.$field = v; } )* };
    }
    take!(seed, n, eta_l, eta_r, horizon, x0, spin, distances, realizations, bins, z_abs, z_phase, phase_count, chain_length, chain_realizations, samples, zeta, max_word_length, trials, rows, cols);
    c.validate()?;
    Ok(c)
}

/// Formats a float with 17 significant digits.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Data table of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn to_csv(&self) -> Result<Vec<u8>, csv::Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.into_inner().map_err(|e| csv::Error::from(e.into_error()))
    }
}

/// Result of executing a config: the table and extra JSON results.
#[derive(Debug, Clone)]
pub struct Output {
    pub table: Table,
    pub results: Value,
}

/// Executes a resolved config on the current thread pool.
pub fn execute(c: &ExperimentConfig) -> Result<Output, CliError> {
    let mu = &c.distribution;
    match c.command.expect("validated") {
        Command::Simulate => {
            let r = DisorderRealization::nth(mu, c.seed, 0);
            let mut state = WalkState::localized(c.x0, c.spin);
            let mut cache = CoinCache::new(&r);
            let mut t = Table::new(&["time", "norm", "mean_position", "variance"]);
            let record = |t: &mut Table, s: &WalkState| {
                let mean: f64 = s.position_distribution().iter().map(|(x, p)| *x as f64 * p).sum();
                t.rows.push(vec![s.time.to_string(), num(s.norm()), num(mean), num(variance(s))]);
            };
            record(&mut t, &state);
            for _ in 0..c.horizon {
                step_with(&mut state, &mut cache);
                record(&mut t, &state);
            }
            Ok(Output {
                table: t,
                results: json!({ "final_norm": state.norm(), "final_variance": variance(&state) }),
            })
        }
        Command::Localize => {
            let p = localization_profile(mu, &c.distances, c.horizon, c.realizations, c.seed).map_err(numerical("localization_profile"))?;
            let mut t = Table::new(&["distance", "mean_sup_amplitude", "stderr", "realizations", "horizon"]);
            for k in 0..p.distances.len() {
                t.rows.push(vec![
                    p.distances[k].to_string(),
                    num(p.mean_sup_amplitude[k]),
                    num(p.stderr[k]),
                    p.realization_count.to_string(),
                    p.horizon.to_string(),
                ]);
            }
            let slope = if p.distances.len() >= 2 { Some(p.log_slope()) } else { None };
            Ok(Output {
                table: t,
                results: json!({ "log_slope": slope }),
            })
        }
        Command::Spectrum => {
            let fw = build_finite_walk(&DisorderRealization::nth(mu, c.seed, 0), c.n, c.eta_l, c.eta_r);
            let phases = fw.eigenphases().map_err(numerical("unitary_eig"))?;
            let pr = fw.participation_ratios().map_err(numerical("unitary_eig"))?;
            let decay = eigenfunction_decay(&fw).map_err(numerical("eigenfunction_decay"))?;
            let mut t = Table::new(&["eigen_index", "eigenphase", "site", "envelope"]);
            for (k, env) in decay.envelopes.iter().enumerate() {
                for (s, e) in decay.sites.iter().zip(env) {
                    t.rows.push(vec![k.to_string(), num(decay.eigenphases[k]), s.to_string(), num(*e)]);
                }
            }
            Ok(Output {
                table: t,
                results: json!({
                    "unitarity_residual": fw.unitarity_residual(),
                    "eigenphases": phases,
                    "participation_ratios": pr,
                }),
            })
        }
        Command::Dos => {
            let h = density_of_states_eta(mu, c.n, c.realizations, c.bins, c.seed, c.eta_l, c.eta_r).map_err(numerical("density_of_states"))?;
            let ids = integrated_dos(&h);
            let mut t = Table::new(&["bin_lo", "bin_hi", "mass", "ids"]);
            for k in 0..h.bins() {
                t.rows.push(vec![num(h.bin_edges[k]), num(h.bin_edges[k + 1]), num(h.masses[k]), num(ids.values[k])]);
            }
            let probe = crate::lyapunov::ids_hoelder_probe(&ids);
            Ok(Output {
                table: t,
                results: json!({ "ids_hoelder": probe }),
            })
        }
        Command::Lyapunov => {
            let mut t = Table::new(&["phase", "z_abs", "gamma_hat", "stderr", "chain_length", "realizations"]);
            for ph in c.phase_grid() {
                let z = Complex64::from_polar(c.z_abs, ph);
                let e = estimate_lyapunov(mu, z, c.chain_length, c.chain_realizations, c.seed).map_err(numerical("estimate_lyapunov"))?;
                t.rows.push(vec![
                    num(ph),
                    num(c.z_abs),
                    num(e.gamma_hat),
                    num(e.stderr),
                    e.chain_length.to_string(),
                    e.realizations.to_string(),
                ]);
            }
            Ok(Output { table: t, results: json!({}) })
        }
        Command::Thouless => {
            let h = density_of_states_eta(mu, c.n, c.realizations, c.bins, c.seed, c.eta_l, c.eta_r).map_err(numerical("density_of_states"))?;
            let mut t = Table::new(&["phase", "gamma_direct", "thouless_rhs", "abs_diff"]);
            let mut worst: f64 = 0.0;
            for ph in c.phase_grid() {
                let z = Complex64::from_polar(c.z_abs, ph);
                let g = estimate_lyapunov(mu, z, c.chain_length, c.chain_realizations, c.seed).map_err(numerical("estimate_lyapunov"))?;
                let rhs = thouless_rhs(&h, mu, z).map_err(numerical("thouless_rhs"))?;
                let d = (g.gamma_hat - rhs.rhs).abs();
                worst = worst.max(d);
                t.rows.push(vec![num(ph), num(g.gamma_hat), num(rhs.rhs), num(d)]);
            }
            Ok(Output {
                table: t,
                results: json!({ "max_abs_diff": worst, "expected_log_abs_a": mu.expected_log_abs_a() }),
            })
        }
        Command::Resolvent => {
            let fw = build_finite_walk(&DisorderRealization::nth(mu, c.seed, 0), c.n, c.eta_l, c.eta_r);
            let z = c.z();
            let all: Vec<i64> = (lattice::f_min(c.n)..=lattice::f_max(c.n)).collect();
            let rows = if c.rows.is_empty() { all.clone() } else { c.rows.clone() };
            let cols = if c.cols.is_empty() { all } else { c.cols.clone() };
            let dense = fw.resolvent(z).ok_or(CliError::Numerical {
                operation: "dense resolvent",
                message: "W(N) − z is singular".into(),
            })?;
            let mut t = Table::new(&["n", "m", "transfer_modulus", "dense_modulus", "rel_error"]);
            let mut worst: f64 = 0.0;
            for &n in &rows {
                for &m in &cols {
                    let via = resolvent_entry_via_transfer(&fw, z, n, m).map_err(numerical("resolvent_entry_via_transfer"))?;
                    let (i, j) = (lattice::matrix_offset(c.n, n).expect("checked"), lattice::matrix_offset(c.n, m).expect("checked"));
                    let d = dense[(i, j)].norm();
                    let rel = (via - d).abs() / d;
                    worst = worst.max(rel);
                    t.rows.push(vec![n.to_string(), m.to_string(), num(via), num(d), num(rel)]);
                }
            }
            Ok(Output {
                table: t,
                results: json!({ "max_rel_error": worst }),
            })
        }
        Command::Specpoly => {
            let fw = build_finite_walk(&DisorderRealization::nth(mu, c.seed, 0), c.n, c.eta_l, c.eta_r);
            let mut t = Table::new(&["phase", "abs_p", "log_abs_p"]);
            for k in 0..c.samples {
                let ph = std::f64::consts::TAU * k as f64 / c.samples as f64;
                let (m, log) = spectral_polynomial_scaled(&fw, Complex64::from_polar(c.z_abs, ph)).map_err(numerical("spectral_polynomial_eval"))?;
                let lp = m.norm().ln() + log;
                t.rows.push(vec![num(ph), num(lp.exp()), num(lp)]);
            }
            let lc = leading_coefficient(&fw).map_err(numerical("leading_coefficient"))?;
            Ok(Output {
                table: t,
                results: json!({ "degree": lattice::restriction_dim(c.n), "leading_coefficient": [lc.re, lc.im] }),
            })
        }
        Command::Check => {
            let opts = CheckOptions {
                max_word_length: c.max_word_length,
                trials: c.trials,
                zeta: c.zeta,
                seed: c.seed,
            };
            let rep = check_hypotheses(mu, c.z(), &opts);
            let mut t = Table::new(&["hypothesis", "verdict"]);
            let v = rep.verdicts;
            for (name, ok, yes) in [
                ("noncompact", v.noncompact, "certified"),
                ("strongly_irreducible", v.irreducible, "witness"),
                ("zeta_integrable", v.zeta_integrable, "finite"),
            ] {
                t.rows.push(vec![name.into(), if ok { yes.into() } else { "inconclusive".into() }]);
            }
            Ok(Output {
                table: t,
                results: serde_json::to_value(&rep).expect("serializable report"),
            })
        }
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let io = |source| CliError::Io { path: path.to_path_buf(), source };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.flush().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

fn with_extension(prefix: &Path, ext: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

/// Paths written by a successful run.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub command: Command,
    pub seed: u64,
    pub csv: PathBuf,
    pub json: PathBuf,
}

fn thread_count(flag: Option<usize>) -> Result<Option<usize>, CliError> {
    if let Some(n) = flag {
        return Ok(Some(n));
    }
    match std::env::var(THREADS_ENV) {
        Ok(s) => s
            .trim()
            .parse::<usize>()
            .map(Some)
            .map_err(|_| CliError::Config(format!("{THREADS_ENV}={s:?} is not a thread count"))),
        Err(_) => Ok(None),
    }
}

/// Parses `argv`, runs the command and writes its outputs.
pub fn run<I, T>(args: I) -> Result<RunSummary, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| CliError::Config(e.to_string()))?;
    let (command, flags) = match cli.command {
        Sub::Simulate(f) => (Command::Simulate, f),
        Sub::Localize(f) => (Command::Localize, f),
        Sub::Spectrum(f) => (Command::Spectrum, f),
        Sub::Dos(f) => (Command::Dos, f),
        Sub::Lyapunov(f) => (Command::Lyapunov, f),
        Sub::Thouless(f) => (Command::Thouless, f),
        Sub::Resolvent(f) => (Command::Resolvent, f),
        Sub::Specpoly(f) => (Command::Specpoly, f),
        Sub::Check(f) => (Command::Check, f),
    };
    let config = resolve(command, &flags)?;
    let prefix = flags.out.clone().unwrap_or_else(|| PathBuf::from(format!("locwalk-{}", command.name())));
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_count(flags.threads)? {
        if n == 0 {
            return Err(CliError::Config("thread count must be at least 1".into()));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    let start = Instant::now();
    let output = pool.install(|| execute(&config))?;
    let wall = start.elapsed().as_secs_f64();

    let csv_path = with_extension(&prefix, "csv");
    let json_path = with_extension(&prefix, "json");
    let csv = output.table.to_csv().map_err(|e| CliError::Io {
        path: csv_path.clone(),
        source: std::io::Error::other(e),
    })?;
    let header = json!({
        "config": config,
        "seed": config.seed,
        "version": env!("CARGO_PKG_VERSION"),
        "wall_time_seconds": wall,
        "csv": csv_path.file_name().map(|s| s.to_string_lossy().into_owned()),
        "results": output.results,
    });
    let json_bytes = serde_json::to_vec_pretty(&header).expect("serializable header");
    write_atomic(&csv_path, &csv)?;
    write_atomic(&json_path, &json_bytes)?;
    Ok(RunSummary {
        command,
        seed: config.seed,
        csv: csv_path,
        json: json_path,
    })
}

/// Entry point used by the binary: prints a one-line summary or an error
/// and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    // Help and version requests are not errors.
    if let Err(e) = Cli::try_parse_from(&args) {
        if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) {
            let _ = e.print();
            return 0;
        }
    }
    match run(args) {
        Ok(s) => {
            println!(
                "locwalk {}: seed {} -> {}, {}",
                s.command.name(),
                s.seed,
                s.csv.display(),
                s.json.display()
            );
            0
        }
        Err(e) => {
            eprintln!("locwalk: {e}");
            e.exit_code()
        }
    }
}
