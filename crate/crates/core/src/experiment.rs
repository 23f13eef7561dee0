//! Batch experiments: label-percentage sweeps over seeded trials, ablation
//! modes, and report/curve output.

use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::{info, warn};
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize};

use crate::constraints::{constraints_from_labels, sample_labeled, ConstraintSet};
use crate::data::{self, DataMatrix, Dataset, Orientation, SynthParams};
use crate::error::{Error, Result};
use crate::graph::{knn_graph, laplacian, Laplacian};
use crate::metrics;
use crate::postprocess::{normalize_affinity, repair, symmetrize};
use crate::solver::{self, compute_s, solve_lrr, Hyperparams, Scale, SolveResult};
use crate::spectral::spectral_clustering;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DatasetSpec {
    Synthetic(SynthParams),
    Files {
        data: PathBuf,
        labels: PathBuf,
        #[serde(default)]
        orientation: Orientation,
    },
}

impl Default for DatasetSpec {
    fn default() -> Self {
        DatasetSpec::Synthetic(SynthParams::default())
    }
}

impl DatasetSpec {
    pub fn load(&self) -> Result<Dataset> {
        match self {
            DatasetSpec::Synthetic(p) => data::synth_subspaces(p),
            DatasetSpec::Files {
                data: path,
                labels,
                orientation,
            } => {
                let x = data::load_csv(path, *orientation)?;
                let y = data::load_labels(labels)?;
                let name = path
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "dataset".into());
                Dataset::new(x, y, name)
            }
        }
    }
}

/// Which parts of the pipeline run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Joint solve with the graph term, then affinity repair.
    #[default]
    Full,
    /// Joint solve without the graph term and without repair.
    NoGraph,
    /// Joint solve with the graph term, no repair.
    NoRepair,
    /// Plain LRR affinity; constraints are ignored.
    LrrOnly,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Full => "full",
            Mode::NoGraph => "no_graph",
            Mode::NoRepair => "no_repair",
            Mode::LrrOnly => "lrr_only",
        })
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Mode::Full),
            "no_graph" => Ok(Mode::NoGraph),
            "no_repair" => Ok(Mode::NoRepair),
            "lrr_only" => Ok(Mode::LrrOnly),
            _ => Err(Error::Config(format!(
                "unknown mode {s:?} (expected full, no_graph, no_repair or lrr_only)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub dataset: DatasetSpec,
    /// Labeled fractions; `0.1` and `"10%"` are both accepted.
    #[serde(deserialize_with = "de_percentages")]
    pub percentages: Vec<f64>,
    pub trials: usize,
    pub mode: Mode,
    pub seed0: u64,
    pub output_dir: Option<PathBuf>,
    /// Scale every sample to unit Euclidean norm before solving.
    pub normalize: bool,
    pub hyperparams: Hyperparams,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            dataset: DatasetSpec::default(),
            percentages: vec![0.05, 0.10, 0.15, 0.20, 0.25, 0.30],
            trials: 10,
            mode: Mode::Full,
            seed0: 0,
            output_dir: None,
            normalize: true,
            hyperparams: Hyperparams::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.percentages.is_empty() {
            return Err(Error::Config("percentages must not be empty".into()));
        }
        if let Some(p) = self.percentages.iter().find(|p| !(**p > 0.0 && **p <= 1.0)) {
            return Err(Error::Config(format!("percentage {p} outside (0, 1]")));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        self.hyperparams
            .validate()
            .map_err(|e| Error::Config(format!("hyperparams: {e}")))
    }
}

/// Parses `0.1`, `10%`, or `"0.1"` into a fraction.
pub fn parse_percentage(text: &str) -> std::result::Result<f64, String> {
    let t = text.trim();
    let value = match t.strip_suffix('%') {
        Some(num) => num.trim().parse::<f64>().map(|v| v / 100.0),
        None => t.parse::<f64>(),
    }
    .map_err(|_| format!("invalid percentage {text:?}"))?;
    if !(value > 0.0 && value <= 1.0) {
        return Err(format!("percentage {text:?} outside (0, 1]"));
    }
    Ok(value)
}

fn de_percentages<'de, D: Deserializer<'de>>(de: D) -> std::result::Result<Vec<f64>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Text(String),
    }
    Vec::<Raw>::deserialize(de)?
        .into_iter()
        .map(|r| match r {
            Raw::Num(v) if v > 0.0 && v <= 1.0 => Ok(v),
            Raw::Num(v) => Err(format!("percentage {v} outside (0, 1]")),
            Raw::Text(t) => parse_percentage(&t),
        })
        .collect::<std::result::Result<_, _>>()
        .map_err(serde::de::Error::custom)
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigOverrides {
    /// Data CSV path, or `synthetic`.
    pub dataset: Option<String>,
    pub labels: Option<PathBuf>,
    pub percentages: Option<Vec<f64>>,
    pub trials: Option<usize>,
    pub mode: Option<Mode>,
    pub lambda: Option<f64>,
    pub beta: Option<f64>,
    pub k_nn: Option<usize>,
    pub seed0: Option<u64>,
    pub output_dir: Option<PathBuf>,
}

/// Parses JSON config text. Unknown keys are rejected and type errors name
/// the offending key path.
pub fn parse_config_str(json: &str) -> Result<ExperimentConfig> {
    let de = &mut serde_json::Deserializer::from_str(json);
    let cfg: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        Error::Config(format!("at `{path}`: {}", e.into_inner()))
    })?;
    Ok(cfg)
}

/// Defaults, then the optional JSON file, then `overrides`.
pub fn parse_config(file: Option<&Path>, overrides: &ConfigOverrides) -> Result<ExperimentConfig> {
    let mut cfg = match file {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            if text.trim().is_empty() {
                ExperimentConfig::default()
            } else {
                parse_config_str(&text).map_err(|e| match e {
                    Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
                    other => other,
                })?
            }
        }
        None => ExperimentConfig::default(),
    };
    apply_overrides(&mut cfg, overrides)?;
    cfg.validate()?;
    Ok(cfg)
}

fn apply_overrides(cfg: &mut ExperimentConfig, o: &ConfigOverrides) -> Result<()> {
    match (o.dataset.as_deref(), &o.labels) {
        (Some("synthetic"), None) => cfg.dataset = DatasetSpec::Synthetic(SynthParams::default()),
        (Some("synthetic"), Some(_)) => {
            return Err(Error::Config(
                "--labels cannot be combined with the synthetic dataset".into(),
            ))
        }
        (Some(path), Some(labels)) => {
            let orientation = match &cfg.dataset {
                DatasetSpec::Files { orientation, .. } => *orientation,
                DatasetSpec::Synthetic(_) => Orientation::default(),
            };
            cfg.dataset = DatasetSpec::Files {
                data: path.into(),
                labels: labels.clone(),
                orientation,
            };
        }
        (Some(_), None) => return Err(Error::Config("--dataset requires --labels".into())),
        (None, Some(labels)) => match &mut cfg.dataset {
            DatasetSpec::Files { labels: l, .. } => *l = labels.clone(),
            DatasetSpec::Synthetic(_) => {
                return Err(Error::Config("--labels given without a data file".into()))
            }
        },
        (None, None) => {}
    }
    if let Some(p) = &o.percentages {
        cfg.percentages = p.clone();
    }
    if let Some(t) = o.trials {
        cfg.trials = t;
    }
    if let Some(m) = o.mode {
        cfg.mode = m;
    }
    if let Some(v) = o.lambda {
        cfg.hyperparams.lambda = v;
    }
    if let Some(v) = o.beta {
        cfg.hyperparams.beta = v;
    }
    if let Some(v) = o.k_nn {
        cfg.hyperparams.k_nn = v;
    }
    if let Some(v) = o.seed0 {
        cfg.seed0 = v;
    }
    if let Some(v) = &o.output_dir {
        cfg.output_dir = Some(v.clone());
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub percentage: f64,
    pub trial: usize,
    pub seed: u64,
    pub num_labeled: usize,
    pub num_constraints: usize,
    pub accuracy: Option<f64>,
    pub nmi: Option<f64>,
    pub iterations: Option<usize>,
    pub converged: Option<bool>,
    pub solve_seconds: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub percentage: f64,
    pub completed: usize,
    pub failed: usize,
    pub mean_acc: f64,
    pub std_acc: f64,
    pub mean_nmi: f64,
    pub std_nmi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub dataset: String,
    pub samples: usize,
    pub classes: usize,
    /// Constraint scale used by the joint solver (absent for `lrr_only`).
    pub scale: Option<f64>,
    pub trials: Vec<TrialResult>,
    pub aggregates: Vec<Aggregate>,
}

impl ExperimentReport {
    /// `(percentage, trial, accuracy, nmi)` rows; excludes timings.
    pub fn metric_table(&self) -> Vec<(f64, usize, Option<f64>, Option<f64>)> {
        self.trials
            .iter()
            .map(|t| (t.percentage, t.trial, t.accuracy, t.nmi))
            .collect()
    }

    pub fn aggregate(&self, percentage: f64) -> Option<&Aggregate> {
        self.aggregates
            .iter()
            .find(|a| (a.percentage - percentage).abs() < 1e-12)
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let file = std::io::BufWriter::new(std::fs::File::create(path)?);
        serde_json::to_writer_pretty(file, self)?;
        Ok(())
    }

    pub fn write_curve_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["percentage", "mean_acc", "std_acc", "mean_nmi", "std_nmi"])?;
        for a in &self.aggregates {
            w.write_record([
                a.percentage.to_string(),
                a.mean_acc.to_string(),
                a.std_acc.to_string(),
                a.mean_nmi.to_string(),
                a.std_nmi.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Mean and sample standard deviation (zero for fewer than two values).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

pub fn aggregate(trials: &[TrialResult], percentages: &[f64]) -> Vec<Aggregate> {
    percentages
        .iter()
        .map(|&pct| {
            let rows: Vec<_> = trials.iter().filter(|t| t.percentage == pct).collect();
            let acc: Vec<f64> = rows.iter().filter_map(|t| t.accuracy).collect();
            let nmi: Vec<f64> = rows.iter().filter_map(|t| t.nmi).collect();
            let (mean_acc, std_acc) = mean_std(&acc);
            let (mean_nmi, std_nmi) = mean_std(&nmi);
            Aggregate {
                percentage: pct,
                completed: acc.len(),
                failed: rows.len() - acc.len(),
                mean_acc,
                std_acc,
                mean_nmi,
                std_nmi,
            }
        })
        .collect()
}

/// Seed for the labeled-sample draw of one (percentage, trial) cell. Keyed on
/// the percentage value so a cell draws the same set whatever else is swept.
pub fn label_seed(trial_seed: u64, percentage: f64) -> u64 {
    let key = (percentage * 1e6).round() as u64;
    trial_seed ^ key.wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Affinity for spectral clustering from a finished joint solve.
pub fn joint_affinity(result: &SolveResult, apply_repair: bool) -> DMatrix<f64> {
    let z = normalize_affinity(&result.z);
    if apply_repair {
        symmetrize(&repair(&z, &result.b))
    } else {
        symmetrize(&z)
    }
}

/// Everything a trial needs that does not depend on the labeled set.
pub struct Prepared {
    pub dataset: Dataset,
    pub laplacian: Laplacian,
    pub hyperparams: Hyperparams,
    /// Symmetrized LRR affinity, only for `lrr_only`.
    pub lrr_affinity: Option<DMatrix<f64>>,
    pub mode: Mode,
}

impl Prepared {
    pub fn new(mut dataset: Dataset, p: &Hyperparams, mode: Mode, normalize: bool) -> Result<Self> {
        if normalize {
            dataset.x = data::normalize_columns(&dataset.x);
        }
        let x = &dataset.x;
        let n = x.sample_count();
        let mut hyperparams = p.clone();
        if mode == Mode::LrrOnly {
            let z = solve_lrr(x, p.lambda, p)?.z;
            return Ok(Prepared {
                lrr_affinity: Some(symmetrize(&normalize_affinity(&z))),
                laplacian: Laplacian::zeros(n),
                dataset,
                hyperparams,
                mode,
            });
        }
        let threshold = solver::lrr_zero_threshold(x);
        if p.lambda <= threshold {
            warn!(
                "lambda = {} is below {threshold:.4}; the LRR affinity is identically zero for this data",
                p.lambda
            );
        }
        if hyperparams.s == Scale::Auto {
            let s = compute_s(&solve_lrr(x, p.lambda, p)?.z);
            info!("constraint scale s = {s:.6}");
            hyperparams.s = Scale::Fixed(s);
        }
        let laplacian = if mode == Mode::NoGraph {
            hyperparams.beta = 0.0;
            Laplacian::zeros(n)
        } else {
            laplacian(&knn_graph(x, p.k_nn)?)
        };
        Ok(Prepared {
            dataset,
            laplacian,
            hyperparams,
            lrr_affinity: None,
            mode,
        })
    }

    pub fn scale(&self) -> Option<f64> {
        match (self.mode, self.hyperparams.s) {
            (Mode::LrrOnly, _) => None,
            (_, Scale::Fixed(s)) => Some(s),
            (_, Scale::Auto) => None,
        }
    }

    /// Affinity for one constraint set, plus the joint solve if one ran.
    pub fn affinity(&self, cs: &ConstraintSet) -> Result<(DMatrix<f64>, Option<SolveResult>)> {
        if let Some(w) = &self.lrr_affinity {
            return Ok((w.clone(), None));
        }
        let result = solver::solve(&self.dataset.x, cs, &self.hyperparams, &self.laplacian)?;
        let w = joint_affinity(&result, self.mode == Mode::Full);
        Ok((w, Some(result)))
    }

    pub fn run_trial(&self, percentage: f64, trial: usize, seed0: u64) -> TrialResult {
        let seed = seed0.wrapping_add(trial as u64);
        let mut out = TrialResult {
            percentage,
            trial,
            seed,
            num_labeled: 0,
            num_constraints: 0,
            accuracy: None,
            nmi: None,
            iterations: None,
            converged: None,
            solve_seconds: 0.0,
            error: None,
        };
        let labels = &self.dataset.labels;
        let run = |out: &mut TrialResult| -> Result<()> {
            let labeled = sample_labeled(labels.len(), percentage, label_seed(seed, percentage))?;
            let cs = constraints_from_labels(&labeled, labels)?;
            out.num_labeled = labeled.len();
            out.num_constraints = cs.len();
            let start = Instant::now();
            let (w, result) = self.affinity(&cs)?;
            out.solve_seconds = start.elapsed().as_secs_f64();
            if let Some(r) = &result {
                out.iterations = Some(r.iterations);
                out.converged = Some(r.converged);
            }
            let partition = spectral_clustering(&w, self.dataset.num_classes(), seed)?;
            let m = metrics::evaluate(&partition.assign, labels)?;
            out.accuracy = Some(m.accuracy);
            out.nmi = Some(m.nmi);
            Ok(())
        };
        if let Err(e) = run(&mut out) {
            warn!("trial {trial} at {percentage}: {e}");
            out.error = Some(e.to_string());
        }
        out
    }
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let dataset = cfg.dataset.load()?;
    let prepared = Prepared::new(dataset, &cfg.hyperparams, cfg.mode, cfg.normalize)?;
    let report = run_prepared(&prepared, cfg);
    if let Some(dir) = &cfg.output_dir {
        std::fs::create_dir_all(dir)?;
        report.write_json(&dir.join("report.json"))?;
        report.write_curve_csv(&dir.join("curve.csv"))?;
        info!("wrote report and curve to {}", dir.display());
    }
    Ok(report)
}

/// Runs every (percentage, trial) cell against an already prepared dataset.
/// Does not write any files.
pub fn run_prepared(prepared: &Prepared, cfg: &ExperimentConfig) -> ExperimentReport {
    let jobs: Vec<(f64, usize)> = cfg
        .percentages
        .iter()
        .flat_map(|&pct| (0..cfg.trials).map(move |t| (pct, t)))
        .collect();
    let mut trials: Vec<TrialResult> = jobs
        .par_iter()
        .map(|&(pct, t)| {
            let r = prepared.run_trial(pct, t, cfg.seed0);
            info!(
                "pct {pct} trial {t}: acc {:?} nmi {:?} ({:.2}s)",
                r.accuracy, r.nmi, r.solve_seconds
            );
            r
        })
        .collect();
    trials.sort_by(|a, b| {
        a.percentage
            .total_cmp(&b.percentage)
            .then(a.trial.cmp(&b.trial))
    });
    ExperimentReport {
        config: cfg.clone(),
        dataset: prepared.dataset.name.clone(),
        samples: prepared.dataset.labels.len(),
        classes: prepared.dataset.num_classes(),
        scale: prepared.scale(),
        aggregates: aggregate(&trials, &cfg.percentages),
        trials,
    }
}

/// Loads a dataset from a data CSV and label file.
pub fn load_dataset(
    data_path: &Path,
    labels_path: &Path,
    orientation: Orientation,
) -> Result<Dataset> {
    DatasetSpec::Files {
        data: data_path.into(),
        labels: labels_path.into(),
        orientation,
    }
    .load()
}

/// Used by the `solve` subcommand for a single affinity.
pub fn single_affinity(
    x: &DataMatrix,
    cs: &ConstraintSet,
    p: &Hyperparams,
    mode: Mode,
    normalize: bool,
) -> Result<(DMatrix<f64>, Option<SolveResult>)> {
    let labels = vec![0; x.sample_count()];
    let ds = Dataset::new(x.clone(), labels, "input")?;
    Prepared::new(ds, p, mode, normalize)?.affinity(cs)
}
