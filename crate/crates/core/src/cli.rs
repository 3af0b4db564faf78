//! Command-line front end: experiment specs, batch runs, delta sweeps,
//! spectrum dumps, condition reports and CSV/JSON/TOML plumbing.

use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{self, MEstimatorConfig};
use crate::conditions::{self, ConditionReport, LabeledData};
use crate::error::GmsError;
use crate::numerics::{recovery_error, PointSet, Spectrum, Subspace};
use crate::recovery::{self, Batch, RecoveryResult, Reduction, DEFAULT_KERNEL_TOL};
use crate::solver::IrlsConfig;
use crate::synthdata::{self, Label, Model, SyntheticConfig, SyntheticSample};

pub const SCHEMA_VERSION: u32 = 1;

/// Deltas below this are dominated by rounding; sweep rows are flagged.
pub const ROUNDING_DELTA: f64 = 1e-15;

/// Bracket used by `gms_ridge` when no lambda is given.
pub const DEFAULT_LAMBDA_BRACKET: (f64, f64) = (1e-4, 1e4);

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config or input files. Exit code 1.
    Usage(String),
    /// A solver or checker failed on valid input. Exit code 2.
    Numerical(GmsError),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Numerical(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<GmsError> for CliError {
    fn from(e: GmsError) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e)
        } else {
            CliError::Usage(e.to_string())
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Algorithm {
    Gms,
    Gms2,
    Egms,
    GmsRidge,
    Pca,
    L2,
    MEst,
}

impl Algorithm {
    fn has_spectrum(self) -> bool {
        matches!(self, Algorithm::Gms | Algorithm::Gms2 | Algorithm::GmsRidge)
    }
}

/// `model:N1:N0:D:d[:eta]`, e.g. `haystack:125:125:10:5:0.01`.
pub fn parse_synthetic(s: &str) -> CliResult<SyntheticConfig> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 5 && parts.len() != 6 {
        return Err(usage(format!(
            "synthetic spec '{s}' must look like model:N1:N0:D:d[:eta]"
        )));
    }
    let model = Model::from_str(parts[0]).map_err(|e| usage(e.to_string()))?;
    let count = |i: usize, name: &str| {
        parts[i]
            .parse::<usize>()
            .map_err(|_| usage(format!("{name} in '{s}' is not a count: '{}'", parts[i])))
    };
    let mut cfg = SyntheticConfig::new(model, count(1, "N1")?, count(2, "N0")?, count(3, "D")?, count(4, "d")?);
    if let Some(eta) = parts.get(5) {
        cfg.eta = eta
            .parse()
            .map_err(|_| usage(format!("eta in '{s}' is not a number: '{eta}'")))?;
    }
    cfg.validate().map_err(|e| usage(e.to_string()))?;
    Ok(cfg)
}

/// Everything that determines one batch of trials.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub algorithm: Algorithm,
    pub synthetic: Option<SyntheticConfig>,
    pub input_path: Option<PathBuf>,
    pub trials: usize,
    pub solver: IrlsConfig,
    pub d: Option<usize>,
    pub output_path: Option<PathBuf>,
    pub emit_spectrum: bool,
    pub seed: u64,
    /// Report runtimes as null so that reports are byte-reproducible.
    pub no_timing: bool,
    /// Solve `gms` in the ambient space even when the data do not span it.
    pub no_reduction: bool,
}

impl ExperimentSpec {
    pub fn validate(&self) -> CliResult<()> {
        if self.synthetic.is_some() == self.input_path.is_some() {
            return Err(usage("exactly one of --synthetic and --input must be given"));
        }
        if self.trials == 0 {
            return Err(usage("--trials must be at least 1"));
        }
        if self.d.is_none()
            && matches!(
                self.algorithm,
                Algorithm::Egms | Algorithm::Pca | Algorithm::L2 | Algorithm::MEst
            )
        {
            return Err(usage(format!(
                "algorithm {:?} needs --d",
                self.algorithm
            )));
        }
        self.solver.validate().map_err(|e| usage(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialResult {
    pub trial: usize,
    pub seed: u64,
    pub recovery_error: Option<f64>,
    pub runtime_seconds: Option<f64>,
    pub iterations: Option<usize>,
    pub estimated_dim: Option<usize>,
    pub pipeline_notes: Vec<String>,
    pub spectrum: Option<Vec<f64>>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Aggregate {
    pub count: usize,
    pub mean: Option<f64>,
    pub std: Option<f64>,
}

impl Aggregate {
    fn of(values: &[f64]) -> Self {
        let count = values.len();
        if count == 0 {
            return Aggregate { count, mean: None, std: None };
        }
        let mean = values.iter().sum::<f64>() / count as f64;
        let std = if count > 1 {
            let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
            Some((ss / (count - 1) as f64).sqrt())
        } else {
            None
        };
        Aggregate { count, mean: Some(mean), std }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentResult {
    pub schema_version: u32,
    pub algorithm: Algorithm,
    pub synthetic: Option<String>,
    pub input_path: Option<String>,
    pub d: Option<usize>,
    pub delta: f64,
    pub lambda: Option<f64>,
    pub max_iter: usize,
    pub seed: u64,
    pub trials: usize,
    pub failures: usize,
    pub error: Aggregate,
    pub runtime: Aggregate,
    pub per_trial: Vec<TrialResult>,
}

fn describe_synthetic(cfg: &SyntheticConfig) -> String {
    format!("{}:{}:{}:{}:{}:{}", cfg.model, cfg.n1, cfg.n0, cfg.dim, cfg.d, cfg.eta)
}

/// Points and, for synthetic data, the true subspace of one trial.
fn trial_data(spec: &ExperimentSpec, input: Option<&PointSet>, seed: u64) -> CliResult<(PointSet, Option<Subspace>)> {
    match (&spec.synthetic, input) {
        (Some(cfg), _) => {
            let s = synthdata::generate(&cfg.clone().with_seed(seed))?;
            Ok((s.points, Some(s.l_star)))
        }
        (None, Some(x)) => Ok((x.clone(), None)),
        (None, None) => Err(usage("no data source")),
    }
}

struct Fit {
    subspace: Subspace,
    iterations: Option<usize>,
    estimated_dim: Option<usize>,
    notes: Vec<String>,
    spectrum: Option<Spectrum>,
}

impl From<RecoveryResult> for Fit {
    fn from(r: RecoveryResult) -> Self {
        Fit {
            subspace: r.subspace,
            iterations: Some(r.solve.iterations),
            estimated_dim: r.estimated_dim,
            notes: r.pipeline_notes,
            spectrum: Some(r.spectrum),
        }
    }
}

fn fit(spec: &ExperimentSpec, x: &PointSet, seed: u64) -> crate::Result<Fit> {
    let cfg = &spec.solver;
    let need_d = || spec.d.expect("validated");
    Ok(match spec.algorithm {
        Algorithm::Gms => {
            let reduction = if spec.no_reduction {
                Reduction::None
            } else {
                Reduction::Lossless
            };
            recovery::gms_with(x, spec.d, cfg, reduction)?.into()
        }
        Algorithm::Gms2 => recovery::gms2(x, spec.d, None, cfg, seed)?.into(),
        Algorithm::Egms => recovery::egms(x, need_d(), cfg, Batch::default())?.into(),
        Algorithm::GmsRidge => match spec.d {
            Some(d) => {
                let bracket = cfg
                    .ridge_lambda
                    .map_or(DEFAULT_LAMBDA_BRACKET, |l| (l, l));
                recovery::gms_lambda_bisection(x, d, cfg, bracket, DEFAULT_KERNEL_TOL)?.into()
            }
            None => {
                let cfg = cfg.clone().with_ridge(cfg.ridge_lambda.unwrap_or(1.0));
                recovery::gms_with(x, None, &cfg, Reduction::Lossless)?.into()
            }
        },
        Algorithm::Pca => Fit {
            subspace: baselines::pca_subspace(x, need_d())?,
            iterations: None,
            estimated_dim: None,
            notes: Vec::new(),
            spectrum: None,
        },
        Algorithm::L2 => {
            let q = baselines::l2_minimizer(x)?;
            let d = need_d();
            if d > x.dim() {
                return Err(GmsError::InvalidArgument(format!("invalid dimension {d}")));
            }
            Fit {
                subspace: Subspace::new(q.spectrum().bottom(d))?,
                iterations: None,
                estimated_dim: None,
                notes: Vec::new(),
                spectrum: Some(q.spectrum()),
            }
        }
        Algorithm::MEst => {
            let m = baselines::common_m_estimator(x, &MEstimatorConfig::default())?;
            Fit {
                subspace: m.subspace(need_d())?,
                iterations: Some(m.report.iterations),
                estimated_dim: None,
                notes: Vec::new(),
                spectrum: None,
            }
        }
    })
}

fn run_trial(spec: &ExperimentSpec, input: Option<&PointSet>, trial: usize) -> CliResult<TrialResult> {
    let seed = synthdata::substream_seed(spec.seed, trial as u64);
    let (x, truth) = trial_data(spec, input, seed)?;
    let start = Instant::now();
    let outcome = fit(spec, &x, seed);
    let runtime = (!spec.no_timing).then(|| start.elapsed().as_secs_f64());
    let mut row = TrialResult {
        trial,
        seed,
        recovery_error: None,
        runtime_seconds: runtime,
        iterations: None,
        estimated_dim: None,
        pipeline_notes: Vec::new(),
        spectrum: None,
        error: None,
    };
    match outcome {
        Ok(f) => {
            if let Some(t) = &truth {
                row.recovery_error = Some(recovery_error(&f.subspace, t)?);
            }
            row.iterations = f.iterations;
            row.estimated_dim = f.estimated_dim;
            row.pipeline_notes = f.notes;
            if spec.emit_spectrum {
                row.spectrum = f.spectrum.map(|s| s.values.iter().copied().collect());
            }
        }
        Err(e) if e.is_numerical() => row.error = Some(e.to_string()),
        Err(e) => return Err(e.into()),
    }
    Ok(row)
}

fn load_input(spec: &ExperimentSpec) -> CliResult<Option<PointSet>> {
    spec.input_path.as_deref().map(read_points).transpose()
}

/// Runs every trial (in parallel) and aggregates over the successful ones.
/// Numerical failures are recorded per trial; usage errors abort.
pub fn run_experiment(spec: &ExperimentSpec) -> CliResult<ExperimentResult> {
    spec.validate()?;
    let input = load_input(spec)?;
    let rows: Vec<TrialResult> = (0..spec.trials)
        .into_par_iter()
        .map(|t| run_trial(spec, input.as_ref(), t))
        .collect::<CliResult<_>>()?;
    let errors: Vec<f64> = rows.iter().filter_map(|r| r.recovery_error).collect();
    let runtimes: Vec<f64> = rows.iter().filter_map(|r| r.runtime_seconds).collect();
    Ok(ExperimentResult {
        schema_version: SCHEMA_VERSION,
        algorithm: spec.algorithm,
        synthetic: spec.synthetic.as_ref().map(describe_synthetic),
        input_path: spec.input_path.as_ref().map(|p| p.display().to_string()),
        d: spec.d,
        delta: spec.solver.delta,
        lambda: spec.solver.ridge_lambda,
        max_iter: spec.solver.max_iter,
        seed: spec.seed,
        trials: spec.trials,
        failures: rows.iter().filter(|r| r.error.is_some()).count(),
        error: Aggregate::of(&errors),
        runtime: Aggregate::of(&runtimes),
        per_trial: rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub delta: f64,
    pub mean_error: Option<f64>,
    pub std_error: Option<f64>,
    pub failures: usize,
    pub rounding_dominated: bool,
}

/// Least-squares slope of `ln error` against `ln delta` over rows with a
/// positive mean error.
pub fn sweep_slope(rows: &[SweepRow]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|r| r.mean_error.filter(|e| *e > 0.0).map(|e| (r.delta.ln(), e.ln())))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Reruns the experiment once per delta; every delta sees the same trials.
pub fn delta_sweep(spec: &ExperimentSpec, deltas: &[f64]) -> CliResult<Vec<SweepRow>> {
    if deltas.is_empty() {
        return Err(usage("no deltas given"));
    }
    if spec.synthetic.is_none() {
        return Err(usage("a delta sweep needs synthetic data with a known subspace"));
    }
    deltas
        .iter()
        .map(|&delta| {
            let mut s = spec.clone();
            s.solver.delta = delta;
            let r = run_experiment(&s)?;
            Ok(SweepRow {
                delta,
                mean_error: r.error.mean,
                std_error: r.error.std,
                failures: r.failures,
                rounding_dominated: delta < ROUNDING_DELTA,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumRow {
    /// 1-based, eigenvalues in decreasing order.
    pub index: usize,
    pub eigenvalue: f64,
    pub log_eigenvalue: Option<f64>,
    /// `ln λ_index − ln λ_{index+1}`; absent on the last row.
    pub log_eigengap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumDump {
    pub schema_version: u32,
    pub estimated_dim: Option<usize>,
    /// Index with the largest log-eigengap.
    pub max_gap_index: Option<usize>,
    #[serde(skip)]
    pub rows: Vec<SpectrumRow>,
}

pub fn spectrum_rows(spectrum: &Spectrum) -> Vec<SpectrumRow> {
    let v = spectrum.values.as_slice();
    (0..v.len())
        .map(|i| {
            let log = |x: f64| (x > 0.0).then(|| x.ln());
            SpectrumRow {
                index: i + 1,
                eigenvalue: v[i],
                log_eigenvalue: log(v[i]),
                log_eigengap: v.get(i + 1).and_then(|&next| Some(log(v[i])? - log(next)?)),
            }
        })
        .collect()
}

/// Spectrum of the first trial's minimizer.
pub fn spectrum_dump(spec: &ExperimentSpec) -> CliResult<SpectrumDump> {
    spec.validate()?;
    if !spec.algorithm.has_spectrum() {
        return Err(usage(format!(
            "algorithm {:?} has no minimizer spectrum; use gms, gms2 or gms_ridge",
            spec.algorithm
        )));
    }
    let input = load_input(spec)?;
    let seed = synthdata::substream_seed(spec.seed, 0);
    let (x, _) = trial_data(spec, input.as_ref(), seed)?;
    let f = fit(spec, &x, seed)?;
    let spectrum = f.spectrum.expect("spectral algorithm");
    let rows = spectrum_rows(&spectrum);
    // A drop from a positive eigenvalue to zero is an infinite gap.
    let v = spectrum.values.as_slice();
    let max_gap_index = v
        .windows(2)
        .enumerate()
        .filter_map(|(i, w)| match (w[0] > 0.0, w[1] > 0.0) {
            (true, true) => Some((i + 1, w[0].ln() - w[1].ln())),
            (true, false) => Some((i + 1, f64::INFINITY)),
            _ => None,
        })
        .fold(None, |best: Option<(usize, f64)>, (i, g)| match best {
            Some((_, bg)) if bg > g => best,
            _ => Some((i, g)),
        })
        .map(|(i, _)| i);
    Ok(SpectrumDump {
        schema_version: SCHEMA_VERSION,
        estimated_dim: f.estimated_dim,
        max_gap_index,
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionsOutput {
    pub schema_version: u32,
    pub all_hold: bool,
    pub exact: bool,
    #[serde(flatten)]
    pub report: ConditionReport,
}

pub fn conditions_report(inliers: &Path, outliers: &Path, basis: &Path, cfg: &IrlsConfig) -> CliResult<ConditionsOutput> {
    let inl = read_points(inliers)?;
    let out = read_points(outliers)?;
    let b = read_matrix(basis)?;
    let l_star = Subspace::new(b).map_err(|e| usage(format!("{}: {e}", basis.display())))?;
    let data = LabeledData::new(inl, out, l_star).map_err(|e| usage(e.to_string()))?;
    let report = conditions::full_report(&data, cfg)?;
    Ok(ConditionsOutput {
        schema_version: SCHEMA_VERSION,
        all_hold: report.all_hold(),
        exact: report.exact(),
        report,
    })
}

// CSV input and output.

/// Reads a headerless CSV of decimal floats. Blank lines are skipped.
pub fn read_matrix(path: &Path) -> CliResult<DMatrix<f64>> {
    let text = fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    parse_matrix(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

pub fn parse_matrix(text: &str) -> std::result::Result<DMatrix<f64>, String> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| e.to_string())?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.iter().all(str::is_empty) {
            continue;
        }
        let row = rec
            .iter()
            .enumerate()
            .map(|(j, field)| {
                field
                    .parse::<f64>()
                    .map_err(|_| format!("line {line}, column {}: '{field}' is not a number", j + 1))
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(format!(
                    "line {line}: expected {} columns, found {}",
                    first.len(),
                    row.len()
                ));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err("no data rows".into());
    }
    let cols = rows[0].len();
    Ok(DMatrix::from_row_iterator(rows.len(), cols, rows.into_iter().flatten()))
}

pub fn read_points(path: &Path) -> CliResult<PointSet> {
    PointSet::new(read_matrix(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))
}

pub fn matrix_to_csv(m: &DMatrix<f64>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in m.row_iter() {
        w.write_record(row.iter().map(|v| format!("{v:e}")))
            .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory write")).expect("ascii")
}

fn records_to_csv<T: Serialize>(rows: &[T]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory write")).expect("utf-8")
}

fn write_text(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| usage(format!("{}: {e}", p.display()))),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| usage(format!("stdout: {e}"))),
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

// Config file and flags.

/// TOML config. Keys mirror [`ExperimentSpec`]; solver keys may also sit in
/// a `[solver]` table. Flags override file values.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub algorithm: Option<Algorithm>,
    pub synthetic: Option<String>,
    pub input_path: Option<PathBuf>,
    pub trials: Option<usize>,
    pub d: Option<usize>,
    pub output_path: Option<PathBuf>,
    pub emit_spectrum: Option<bool>,
    pub seed: Option<u64>,
    pub delta: Option<f64>,
    pub lambda: Option<f64>,
    pub max_iter: Option<usize>,
    pub solver: Option<SolverSection>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub delta: Option<f64>,
    pub lambda: Option<f64>,
    pub max_iter: Option<usize>,
    pub check_every: Option<usize>,
}

pub fn read_config(path: &Path) -> CliResult<ConfigFile> {
    let text = fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

#[derive(Debug, Clone, Default, Args)]
pub struct SpecArgs {
    /// TOML file with default values for the flags below.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub algorithm: Option<Algorithm>,
    /// Target dimension; estimated from the spectrum when absent.
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Headerless CSV, one point per row.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub emit_spectrum: bool,
    /// `model:N1:N0:D:d[:eta]`.
    #[arg(long)]
    pub synthetic: Option<String>,
    /// Write null runtimes so that reports are reproducible byte for byte.
    #[arg(long)]
    pub no_timing: bool,
    /// Solve `gms` in the ambient space even when the data do not span it.
    #[arg(long)]
    pub no_reduction: bool,
}

impl SpecArgs {
    pub fn into_spec(self) -> CliResult<ExperimentSpec> {
        let file = match &self.config {
            Some(p) => read_config(p)?,
            None => ConfigFile::default(),
        };
        let section = file.solver.clone().unwrap_or_default();
        let mut solver = IrlsConfig::default();
        if let Some(v) = self.delta.or(section.delta).or(file.delta) {
            solver.delta = v;
        }
        if let Some(v) = self.max_iter.or(section.max_iter).or(file.max_iter) {
            solver.max_iter = v;
        }
        if let Some(v) = section.check_every {
            solver.check_every = v;
        }
        solver.ridge_lambda = self.lambda.or(section.lambda).or(file.lambda);
        let synthetic = self
            .synthetic
            .or(file.synthetic)
            .map(|s| parse_synthetic(&s))
            .transpose()?;
        let spec = ExperimentSpec {
            algorithm: self.algorithm.or(file.algorithm).unwrap_or(Algorithm::Gms),
            synthetic,
            input_path: self.input.or(file.input_path),
            trials: self.trials.or(file.trials).unwrap_or(1),
            solver,
            d: self.d.or(file.d),
            output_path: self.output.or(file.output_path),
            emit_spectrum: self.emit_spectrum || file.emit_spectrum.unwrap_or(false),
            seed: self.seed.or(file.seed).unwrap_or(0),
            no_timing: self.no_timing,
            no_reduction: self.no_reduction,
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Parser)]
#[command(name = "gms", version, about = "Robust subspace recovery with the geometric median subspace estimator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a batch of trials and write a JSON report.
    Run(SpecArgs),
    /// Rerun an experiment for several deltas and write a CSV table.
    SweepDelta {
        #[command(flatten)]
        spec: SpecArgs,
        /// Comma-separated list of deltas.
        #[arg(long, value_delimiter = ',', required = true)]
        deltas: Vec<f64>,
    },
    /// Write the eigenvalues of the minimizer of the first trial as CSV.
    Spectrum(SpecArgs),
    /// Check the recovery conditions on labeled data.
    Conditions {
        #[arg(long)]
        inliers: PathBuf,
        #[arg(long)]
        outliers: PathBuf,
        /// D×d CSV whose columns are an orthonormal basis of L*.
        #[arg(long)]
        basis: PathBuf,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        max_iter: Option<usize>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Sample a synthetic data set and write it as CSV files.
    Generate {
        /// `model:N1:N0:D:d[:eta]`.
        #[arg(long)]
        synthetic: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Points, inliers first.
        #[arg(long)]
        output: Option<PathBuf>,
        /// One label (`inlier` or `outlier`) per line.
        #[arg(long)]
        labels: Option<PathBuf>,
        /// Basis of L* as a D×d CSV.
        #[arg(long)]
        basis: Option<PathBuf>,
        /// Noise-free inliers, for `gms conditions`.
        #[arg(long)]
        inliers: Option<PathBuf>,
        #[arg(long)]
        outliers: Option<PathBuf>,
    },
}

fn write_sample(
    sample: &SyntheticSample,
    output: Option<&Path>,
    labels: Option<&Path>,
    basis: Option<&Path>,
    inliers: Option<&Path>,
    outliers: Option<&Path>,
) -> CliResult<()> {
    write_text(output, &matrix_to_csv(sample.points.matrix()))?;
    if let Some(p) = labels {
        let text: String = sample
            .labels
            .iter()
            .map(|l| match l {
                Label::Inlier => "inlier\n",
                Label::Outlier => "outlier\n",
            })
            .collect();
        write_text(Some(p), &text)?;
    }
    if let Some(p) = basis {
        write_text(Some(p), &matrix_to_csv(sample.l_star.basis()))?;
    }
    let n1 = sample.labels.iter().filter(|l| **l == Label::Inlier).count();
    if let Some(p) = inliers {
        let m = sample.noiseless_points.matrix().rows(0, n1).into_owned();
        write_text(Some(p), &matrix_to_csv(&m))?;
    }
    if let Some(p) = outliers {
        write_text(Some(p), &matrix_to_csv(sample.outliers().matrix()))?;
    }
    Ok(())
}

/// Executes one parsed command. Returns the process exit code: 0 on
/// success, 2 when a trial or the solve failed numerically.
pub fn execute(cli: Cli) -> CliResult<u8> {
    match cli.command {
        Command::Run(args) => {
            let spec = args.into_spec()?;
            let result = run_experiment(&spec)?;
            write_text(spec.output_path.as_deref(), &to_json(&result))?;
            Ok(if result.failures > 0 { 2 } else { 0 })
        }
        Command::SweepDelta { spec, deltas } => {
            let spec = spec.into_spec()?;
            let rows = delta_sweep(&spec, &deltas)?;
            write_text(spec.output_path.as_deref(), &records_to_csv(&rows))?;
            if let Some(s) = sweep_slope(&rows) {
                eprintln!("slope of log error vs log delta: {s:.4}");
            }
            Ok(if rows.iter().any(|r| r.failures > 0) { 2 } else { 0 })
        }
        Command::Spectrum(args) => {
            let spec = args.into_spec()?;
            let dump = spectrum_dump(&spec)?;
            match &spec.output_path {
                Some(p) => {
                    write_text(Some(p), &records_to_csv(&dump.rows))?;
                    write_text(None, &to_json(&dump))?;
                }
                None => write_text(None, &records_to_csv(&dump.rows))?,
            }
            Ok(0)
        }
        Command::Conditions {
            inliers,
            outliers,
            basis,
            delta,
            max_iter,
            output,
        } => {
            let mut cfg = IrlsConfig::default();
            if let Some(d) = delta {
                cfg.delta = d;
            }
            if let Some(m) = max_iter {
                cfg.max_iter = m;
            }
            cfg.validate().map_err(|e| usage(e.to_string()))?;
            let out = conditions_report(&inliers, &outliers, &basis, &cfg)?;
            write_text(output.as_deref(), &to_json(&out))?;
            Ok(0)
        }
        Command::Generate {
            synthetic,
            seed,
            output,
            labels,
            basis,
            inliers,
            outliers,
        } => {
            let cfg = parse_synthetic(&synthetic)?.with_seed(seed);
            let sample = synthdata::generate(&cfg)?;
            write_sample(
                &sample,
                output.as_deref(),
                labels.as_deref(),
                basis.as_deref(),
                inliers.as_deref(),
                outliers.as_deref(),
            )?;
            Ok(0)
        }
    }
}

/// Parses `args` (including the program name) and runs the command,
/// printing errors to stderr. Returns the exit code.
pub fn main_with_args<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
