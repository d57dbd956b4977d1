//! Experiment configs, shipped presets, multi-seed orchestration and the
//! CSV/JSON artifacts written for each run.
//!
//! Artifacts written by [`run_experiment`] into the output directory:
//!
//! | file                        | content                                   |
//! |-----------------------------|-------------------------------------------|
//! | `report.json`               | versioned summary of every run            |
//! | `trajectory_seed_<S>.csv`   | per-step records of the trajectory seed S |
//! | `channel.csv`               | per-step records of the averaged channel  |
//! | `spectrum.csv`              | levels of `H_j` along the schedule        |

use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::evolve::{
    matrix_pairs, oracle_solve, run_channel, run_trajectory, vector_pairs, RngSeed, RunReport,
    StepRecord,
};
use crate::hamiltonian::{normalize_instance, ProblemInstance};
use crate::linalg::{cplx, eigh, ComplexMatrix, ComplexVector, HermitianOperator};
use crate::pauli;
use crate::schedule::{build_grid, Algorithm, Placement, Schedule};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

pub const TRAJECTORY_CSV_HEADER: [&str; 8] = [
    "step",
    "v",
    "s",
    "t_drawn",
    "t_max",
    "energy",
    "e1",
    "ground_fidelity",
];

pub const DEFAULT_STEPS: usize = 300;
pub const DEFAULT_SEED: u64 = 42;

const PRESETS: &[(&str, &str)] = &[
    ("alg1_paper", include_str!("../presets/alg1_paper.json")),
    ("alg2_paper", include_str!("../presets/alg2_paper.json")),
];

/// A real number or a `[re, im]` pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Real(f64),
    Complex([f64; 2]),
}

impl Scalar {
    fn value(self) -> num_complex::Complex64 {
        match self {
            Scalar::Real(x) => cplx(x, 0.0),
            Scalar::Complex([re, im]) => cplx(re, im),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixSpec {
    /// Pauli-string expression.
    Expression(String),
    /// Row-major explicit entries.
    Entries(Vec<Vec<Scalar>>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VectorKeyword {
    /// All entries equal, normalized.
    Uniform,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VectorSpec {
    Keyword(VectorKeyword),
    Entries(Vec<Scalar>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SeedSpec {
    List(Vec<u64>),
    Range { count: usize, base: u64 },
}

impl Default for SeedSpec {
    fn default() -> Self {
        SeedSpec::List(vec![DEFAULT_SEED])
    }
}

impl SeedSpec {
    /// Sorted, de-duplicated seeds.
    pub fn seeds(&self) -> Vec<u64> {
        let mut seeds: Vec<u64> = match self {
            SeedSpec::List(v) => v.clone(),
            SeedSpec::Range { count, base } => {
                (0..*count as u64).map(|k| base.wrapping_add(k)).collect()
            }
        };
        seeds.sort_unstable();
        seeds.dedup();
        seeds
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunMode {
    Trajectory,
    Channel,
    #[default]
    Both,
}

impl RunMode {
    pub fn trajectories(self) -> bool {
        matches!(self, RunMode::Trajectory | RunMode::Both)
    }

    pub fn channel(self) -> bool {
        matches!(self, RunMode::Channel | RunMode::Both)
    }
}

fn default_steps() -> usize {
    DEFAULT_STEPS
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("runs")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub matrix: MatrixSpec,
    pub b: VectorSpec,
    pub algorithm: Algorithm,
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default)]
    pub seeds: SeedSpec,
    #[serde(default)]
    pub mode: RunMode,
    #[serde(default)]
    pub placement: Placement,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa_override: Option<f64>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Precision target; carried into the report, not used for control.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_error: Option<f64>,
}

fn config_error(path: &str, message: impl Into<String>) -> Error {
    Error::Config {
        path: path.to_string(),
        message: message.into(),
    }
}

impl ExperimentConfig {
    /// Parses and validates a JSON config.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            config_error(&path, e.into_inner().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Human-readable description of the matrix.
    pub fn matrix_label(&self) -> String {
        match &self.matrix {
            MatrixSpec::Expression(e) => e.clone(),
            MatrixSpec::Entries(rows) => format!("explicit {}x{} matrix", rows.len(), rows.len()),
        }
    }

    pub fn seed_list(&self) -> Vec<u64> {
        self.seeds.seeds()
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(config_error("steps", "must be at least 1"));
        }
        if self.mode.trajectories() && self.seed_list().is_empty() {
            return Err(config_error(
                "seeds",
                "trajectory mode needs at least one seed",
            ));
        }
        if let Some(k) = self.kappa_override {
            if k.is_nan() || k < 1.0 {
                return Err(config_error("kappa_override", "must be >= 1"));
            }
        }
        if let Some(eps) = self.target_error {
            if !(eps > 0.0 && eps < 1.0) {
                return Err(config_error("target_error", "must lie in (0, 1)"));
            }
        }
        let a = self.matrix_operator()?;
        let n = a.dim();
        if !n.is_power_of_two() {
            return Err(config_error(
                "matrix",
                format!("dimension {n} is not a power of two"),
            ));
        }
        if let VectorSpec::Entries(entries) = &self.b {
            if entries.len() != n {
                return Err(config_error(
                    "b",
                    format!("has {} entries but the matrix is {n}x{n}", entries.len()),
                ));
            }
        }
        Ok(())
    }

    /// The raw (un-normalized) matrix.
    pub fn matrix_operator(&self) -> Result<HermitianOperator> {
        match &self.matrix {
            MatrixSpec::Expression(text) => pauli::parse(text)
                .map(|e| e.to_matrix())
                .map_err(|e| config_error("matrix", e.to_string())),
            MatrixSpec::Entries(rows) => {
                let n = rows.len();
                if n == 0 {
                    return Err(config_error("matrix", "empty matrix"));
                }
                if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
                    return Err(config_error(
                        &format!("matrix[{i}]"),
                        format!("row has {} entries, expected {n}", r.len()),
                    ));
                }
                let m = ComplexMatrix::from_fn(n, n, |i, j| rows[i][j].value());
                HermitianOperator::new(m).map_err(|e| config_error("matrix", e.to_string()))
            }
        }
    }

    pub fn b_vector(&self, n: usize) -> ComplexVector {
        match &self.b {
            VectorSpec::Keyword(VectorKeyword::Uniform) => {
                DVector::from_element(n, cplx(1.0 / (n as f64).sqrt(), 0.0))
            }
            VectorSpec::Entries(e) => DVector::from_iterator(e.len(), e.iter().map(|s| s.value())),
        }
    }
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::io(format!("reading config {}", path.display()), e))?;
    ExperimentConfig::from_json(&text)
}

pub fn preset_names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(n, _)| *n)
}

/// Raw JSON text of a shipped preset.
pub fn preset_source(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

pub fn preset(name: &str) -> Result<ExperimentConfig> {
    let text = preset_source(name).ok_or_else(|| Error::UnknownPreset(name.to_string()))?;
    ExperimentConfig::from_json(text)
}

pub fn build_instance(cfg: &ExperimentConfig) -> Result<ProblemInstance> {
    let a = cfg.matrix_operator()?;
    let b = cfg.b_vector(a.dim());
    let inst = normalize_instance(a, b, cfg.algorithm)?;
    match cfg.kappa_override {
        Some(k) => inst.with_kappa(k),
        None => Ok(inst),
    }
}

pub fn build_schedule(cfg: &ExperimentConfig, inst: &ProblemInstance) -> Result<Schedule> {
    build_grid(inst.kappa(), cfg.steps, cfg.algorithm, cfg.placement)
}

/// Which Hamiltonian a spectrum sweep diagonalizes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpectrumKind {
    /// Lowest levels of `H(s)`.
    H,
    /// Levels of `H′(s)` closest to zero.
    HPrime,
}

impl SpectrumKind {
    pub fn default_levels(self) -> usize {
        match self {
            SpectrumKind::H => 4,
            SpectrumKind::HPrime => 10,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumRow {
    pub s: f64,
    pub levels: Vec<f64>,
}

/// Eigenvalues at each `s`, ascending. For `H′` the `levels` values in the
/// middle of the spectrum (closest to zero) are kept.
pub fn spectrum_sweep(
    inst: &ProblemInstance,
    points: &[f64],
    kind: SpectrumKind,
    levels: usize,
) -> Result<Vec<SpectrumRow>> {
    points
        .iter()
        .map(|&s| {
            let h = match kind {
                SpectrumKind::H => crate::hamiltonian::h_of_s(s, inst)?,
                SpectrumKind::HPrime => crate::hamiltonian::hprime_of_s(s, inst)?,
            };
            let values = eigh(&h)?.values;
            let k = levels.min(values.len());
            let levels = match kind {
                SpectrumKind::H => values[..k].to_vec(),
                SpectrumKind::HPrime => {
                    // The spectrum is mirrored about zero, so the centered
                    // window is symmetric even when levels are degenerate.
                    let start = (values.len() - k) / 2;
                    values[start..start + k].to_vec()
                }
            };
            Ok(SpectrumRow { s, levels })
        })
        .collect()
}

/// `n` uniformly spaced points on `[0, 1]`.
pub fn uniform_points(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![1.0],
        _ => (0..n).map(|k| k as f64 / (n - 1) as f64).collect(),
    }
}

/// Outcome of one seed (or of the channel run).
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub seed: Option<u64>,
    pub result: std::result::Result<RunReport, String>,
}

#[derive(Clone, Debug)]
pub struct ExperimentResults {
    pub config: ExperimentConfig,
    pub instance: ProblemInstance,
    pub schedule: Schedule,
    pub x_oracle: ComplexVector,
    pub trajectories: Vec<RunOutcome>,
    pub channel: Option<RunOutcome>,
}

impl ExperimentResults {
    pub fn error_count(&self) -> usize {
        self.trajectories
            .iter()
            .chain(self.channel.iter())
            .filter(|o| o.result.is_err())
            .count()
    }
}

/// Runs every requested mode. Seeds are processed on a pool of `jobs`
/// threads; results come back in seed order regardless of completion order.
pub fn execute(cfg: &ExperimentConfig, jobs: usize) -> Result<ExperimentResults> {
    cfg.validate()?;
    let instance = build_instance(cfg)?;
    let schedule = build_schedule(cfg, &instance)?;
    let x_oracle = oracle_solve(&instance)?;

    let seeds = if cfg.mode.trajectories() {
        cfg.seed_list()
    } else {
        Vec::new()
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .expect("thread pool");
    let (trajectories, channel) = pool.install(|| {
        let trajectories: Vec<RunOutcome> = seeds
            .par_iter()
            .map(|&seed| RunOutcome {
                seed: Some(seed),
                result: run_trajectory(&instance, &schedule, RngSeed(seed))
                    .map_err(|e| e.to_string()),
            })
            .collect();
        let channel = cfg.mode.channel().then(|| RunOutcome {
            seed: None,
            result: run_channel(&instance, &schedule).map_err(|e| e.to_string()),
        });
        (trajectories, channel)
    });

    Ok(ExperimentResults {
        config: cfg.clone(),
        instance,
        schedule,
        x_oracle,
        trajectories,
        channel,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EmittedArtifacts {
    pub report: PathBuf,
    pub trajectories: Vec<PathBuf>,
    pub channel: Option<PathBuf>,
    pub spectrum: PathBuf,
    /// Number of runs that ended in an error (not counting failed
    /// post-selection, which is a reported outcome).
    pub errors: usize,
}

impl EmittedArtifacts {
    pub fn all_csv(&self) -> impl Iterator<Item = &PathBuf> {
        self.trajectories.iter().chain(self.channel.iter())
    }
}

/// Executes `cfg` and writes its artifacts to `cfg.output_dir`.
pub fn run_experiment(cfg: &ExperimentConfig, jobs: usize) -> Result<EmittedArtifacts> {
    let results = execute(cfg, jobs)?;
    emit_report(&results, &cfg.output_dir)
}

fn fmt_f64(x: f64) -> String {
    x.to_string()
}

pub fn write_step_csv(path: &Path, steps: &[StepRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(TRAJECTORY_CSV_HEADER)?;
    for st in steps {
        w.write_record([
            st.j.to_string(),
            fmt_f64(st.v),
            fmt_f64(st.s),
            st.t_drawn.map(fmt_f64).unwrap_or_default(),
            fmt_f64(st.t_max),
            fmt_f64(st.energy),
            fmt_f64(st.e1),
            fmt_f64(st.ground_fidelity),
        ])?;
    }
    w.flush()
        .map_err(|e| Error::io(format!("writing {}", path.display()), e))?;
    Ok(())
}

pub fn write_spectrum_csv<W: std::io::Write>(out: W, rows: &[SpectrumRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let width = rows.first().map_or(0, |r| r.levels.len());
    let mut header = vec!["s".to_string()];
    header.extend((0..width).map(|k| format!("level_{k}")));
    w.write_record(&header)?;
    for r in rows {
        let mut rec = vec![fmt_f64(r.s)];
        rec.extend(r.levels.iter().map(|&x| fmt_f64(x)));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io("writing spectrum", e))?;
    Ok(())
}

pub fn write_schedule_csv<W: std::io::Write>(out: W, sched: &Schedule) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["j", "v", "s", "gap_bound", "t_max"])?;
    for (k, st) in sched.steps.iter().enumerate() {
        w.write_record([
            (k + 1).to_string(),
            fmt_f64(st.v),
            fmt_f64(st.s),
            fmt_f64(st.gap_bound),
            fmt_f64(st.t_max),
        ])?;
    }
    w.flush().map_err(|e| Error::io("writing schedule", e))?;
    Ok(())
}

/// Median and quartiles (linear interpolation between order statistics).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Quartiles {
    pub count: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

pub fn quartiles(values: &[f64]) -> Option<Quartiles> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let at = |p: f64| {
        let pos = p * (v.len() - 1) as f64;
        let lo = pos.floor() as usize;
        let hi = pos.ceil() as usize;
        v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
    };
    Some(Quartiles {
        count: v.len(),
        min: v[0],
        q1: at(0.25),
        median: at(0.5),
        q3: at(0.75),
        max: v[v.len() - 1],
    })
}

fn run_summary(outcome: &RunOutcome) -> serde_json::Value {
    match &outcome.result {
        Ok(r) => json!({
            "seed": outcome.seed,
            "status": if r.succeeded() { "ok" } else { "postselection_failed" },
            "failure": r.failure,
            "success_probability": r.success_probability,
            "solution_fidelity": r.solution_fidelity,
            "traced_fidelity": r.traced_fidelity,
            "solution": r.solution.as_ref().map(vector_pairs),
            "final_ground_fidelity": r.steps.last().map(|s| s.ground_fidelity),
            "final_state": r.final_state,
        }),
        Err(e) => json!({
            "seed": outcome.seed,
            "status": "error",
            "error": e,
        }),
    }
}

/// Builds the versioned JSON report. Contains no timestamps or paths, so
/// identical inputs give identical bytes.
pub fn report_json(results: &ExperimentResults) -> Result<String> {
    let cfg = &results.config;
    let mut config = serde_json::to_value(cfg)?;
    if let Some(obj) = config.as_object_mut() {
        obj.remove("output_dir");
    }
    let fidelities: Vec<f64> = results
        .trajectories
        .iter()
        .filter_map(|o| o.result.as_ref().ok())
        .filter_map(|r| r.solution_fidelity)
        .collect();
    let errors: Vec<serde_json::Value> = results
        .trajectories
        .iter()
        .chain(results.channel.iter())
        .filter_map(|o| {
            o.result
                .as_ref()
                .err()
                .map(|e| json!({"seed": o.seed, "error": e}))
        })
        .collect();
    let a_raw = results.instance.a_raw();
    let report = json!({
        "schema_version": REPORT_SCHEMA_VERSION,
        "config": config,
        "instance": {
            "expression": cfg.matrix_label(),
            "summary": results.instance.summary(),
            "a_raw": matrix_pairs(a_raw.matrix()),
            "b": vector_pairs(results.instance.b().amplitudes()),
            "target_error": cfg.target_error,
        },
        "schedule": results.schedule,
        "x_oracle": vector_pairs(&results.x_oracle),
        "seeds": results.trajectories.iter().filter_map(|o| o.seed).collect::<Vec<_>>(),
        "runs": results.trajectories.iter().map(run_summary).collect::<Vec<_>>(),
        "channel": results.channel.as_ref().map(run_summary),
        "aggregate": {
            "solution_fidelity": quartiles(&fidelities),
            "postselection_failures": results.trajectories.iter()
                .filter(|o| matches!(&o.result, Ok(r) if !r.succeeded()))
                .count(),
        },
        "partial": !errors.is_empty(),
        "errors": errors,
    });
    Ok(serde_json::to_string_pretty(&report)?)
}

pub fn emit_report(results: &ExperimentResults, out_dir: &Path) -> Result<EmittedArtifacts> {
    fs::create_dir_all(out_dir)
        .map_err(|e| Error::io(format!("creating {}", out_dir.display()), e))?;

    let mut trajectories = Vec::new();
    for o in &results.trajectories {
        if let (Some(seed), Ok(r)) = (o.seed, &o.result) {
            let path = out_dir.join(format!("trajectory_seed_{seed}.csv"));
            write_step_csv(&path, &r.steps)?;
            trajectories.push(path);
        }
    }
    let channel = match &results.channel {
        Some(RunOutcome { result: Ok(r), .. }) => {
            let path = out_dir.join("channel.csv");
            write_step_csv(&path, &r.steps)?;
            Some(path)
        }
        _ => None,
    };

    let points: Vec<f64> = results.schedule.steps.iter().map(|st| st.s).collect();
    let kind = match results.instance.algorithm() {
        Algorithm::One => SpectrumKind::H,
        Algorithm::Two => SpectrumKind::HPrime,
    };
    let rows = spectrum_sweep(&results.instance, &points, kind, kind.default_levels())?;
    let spectrum = out_dir.join("spectrum.csv");
    let file = fs::File::create(&spectrum)
        .map_err(|e| Error::io(format!("creating {}", spectrum.display()), e))?;
    write_spectrum_csv(std::io::BufWriter::new(file), &rows)?;

    let report = out_dir.join("report.json");
    fs::write(&report, report_json(results)?)
        .map_err(|e| Error::io(format!("writing {}", report.display()), e))?;

    Ok(EmittedArtifacts {
        report,
        trajectories,
        channel,
        spectrum,
        errors: results.error_count(),
    })
}
