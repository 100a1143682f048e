//! Simulation study: the eight data-generating models, the replicate loop (LCV selection, fit,
//! classification), the contingency table of fitted versus true model, and penalty curves.

use crate::ecme::{FitControls, FitResult};
use crate::error::{Error, Result};
use crate::ghdist::{gh_sample, Dataset, GhParams};
use crate::penalty::{mc_lasso, penalty_full72, penalty_hier16, PenaltyKind, ShapeParams};
use crate::select::{select_h, LcvConfig, LcvScore, ModelName};
use nalgebra::{DMatrix, DVector};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

/// The data-generating models of the study, in table order.
pub const DGMS: [ModelName; 8] = [
    ModelName::N,
    ModelName::T,
    ModelName::C,
    ModelName::L,
    ModelName::SGH,
    ModelName::St,
    ModelName::AL,
    ModelName::VG,
];

/// Skewness vector of the skewed models (two dimensions).
pub const SKEW_GAMMA: [f64; 2] = [-0.5, 0.8];

/// Study grid of penalty weights.
pub const STUDY_GRID: [f64; 15] = [
    0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0, 45.0, 50.0, 60.0, 70.0, 80.0, 100.0,
];

/// Parameters of a data-generating model: `μ = 0`, `Σ = I`, `γ = 0` for the symmetric models and
/// `(−0.5, 0.8)` for St, AL and VG (two dimensions only), and the model's `(λ, χ, ψ)`.
pub fn dgm_params(name: ModelName, d: usize) -> Result<GhParams> {
    let (lambda, chi, psi) = match name {
        ModelName::N => (-20.0, 100.0, 0.001),
        ModelName::T | ModelName::St => (-1.0, 2.0, 0.001),
        ModelName::C => (-0.5, 2.0, 0.001),
        ModelName::L | ModelName::AL => (1.0, 0.001, 0.5),
        ModelName::SGH => (-1.0, 2.0, 3.0),
        ModelName::VG => (1.5, 0.001, 0.5),
        other => {
            return Err(Error::InvalidInput(format!(
                "{other} is not a data-generating model (expected one of N, t, C, L, SGH, St, AL, VG)"
            )))
        }
    };
    if d == 0 {
        return Err(Error::InvalidInput("dimension must be positive".into()));
    }
    let skewed = matches!(name, ModelName::St | ModelName::AL | ModelName::VG);
    let gamma = if skewed {
        if d != SKEW_GAMMA.len() {
            return Err(Error::InvalidInput(format!(
                "the skewed model {name} is defined for d = 2 only (got d = {d})"
            )));
        }
        DVector::from_column_slice(&SKEW_GAMMA)
    } else {
        DVector::zeros(d)
    };
    GhParams::new(DVector::zeros(d), DMatrix::identity(d, d), gamma, lambda, chi, psi)
}

/// Settings of a simulation study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub dgms: Vec<ModelName>,
    pub n: usize,
    pub d: usize,
    pub replicates: usize,
    pub grid: Vec<f64>,
    pub p: f64,
    pub seed: u64,
    pub output_dir: PathBuf,
    /// Replicates run concurrently.
    pub workers: usize,
    pub penalty: PenaltyKind,
    pub controls: FitControls,
}

/// The config file's key set; every key except the five below has a default.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    dgms: Vec<String>,
    n: usize,
    replicates: usize,
    seed: u64,
    output_dir: PathBuf,
    #[serde(default = "default_d")]
    d: usize,
    #[serde(default = "default_grid")]
    grid: Vec<f64>,
    #[serde(default = "default_p")]
    p: f64,
    #[serde(default = "default_workers")]
    workers: usize,
    #[serde(default = "default_penalty")]
    penalty: String,
    #[serde(default)]
    max_iter: Option<usize>,
    #[serde(default)]
    rel_tol: Option<f64>,
    #[serde(default)]
    restarts: Option<bool>,
}

fn default_d() -> usize {
    2
}

fn default_grid() -> Vec<f64> {
    STUDY_GRID.to_vec()
}

fn default_p() -> f64 {
    0.1
}

fn default_workers() -> usize {
    1
}

fn default_penalty() -> String {
    "hier16".into()
}

impl ExperimentConfig {
    /// Parses the flat `key = value` config text. A relative `output_dir` is resolved against
    /// `base_dir` (the directory holding the config file).
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let dgms = raw
            .dgms
            .iter()
            .map(|s| s.parse::<ModelName>())
            .collect::<Result<Vec<_>>>()
            .map_err(|e| Error::Config(e.to_string()))?;
        let output_dir = if raw.output_dir.is_absolute() {
            raw.output_dir
        } else {
            base_dir.join(raw.output_dir)
        };
        let mut controls = FitControls::default();
        if let Some(m) = raw.max_iter {
            controls.max_iter = m;
        }
        if let Some(t) = raw.rel_tol {
            controls.rel_tol = t;
        }
        if let Some(r) = raw.restarts {
            controls.restarts = r;
        }
        let cfg = Self {
            dgms,
            n: raw.n,
            d: raw.d,
            replicates: raw.replicates,
            grid: raw.grid,
            p: raw.p,
            seed: raw.seed,
            output_dir,
            workers: raw.workers,
            penalty: raw.penalty.parse().map_err(|e: Error| Error::Config(e.to_string()))?,
            controls,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads and parses a config file; paths inside are relative to the file's directory.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::parse(&text, base)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.replicates == 0 {
            return bad("replicates must be at least 1".into());
        }
        if self.dgms.is_empty() {
            return bad("dgms must not be empty".into());
        }
        let mut seen = self.dgms.clone();
        seen.sort();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            return bad("dgms must not repeat".into());
        }
        for &m in &self.dgms {
            dgm_params(m, self.d).map_err(|e| Error::Config(e.to_string()))?;
        }
        if self.n <= self.d {
            return bad(format!("n = {} must exceed d = {}", self.n, self.d));
        }
        if self.workers == 0 {
            return bad("workers must be at least 1".into());
        }
        self.lcv_config(0).map_err(|e| Error::Config(e.to_string()))?;
        if ((self.p * self.n as f64).floor() as usize) == 0 {
            return bad(format!("floor(p n) = 0 for p = {}, n = {}", self.p, self.n));
        }
        Ok(())
    }

    fn lcv_config(&self, seed: u64) -> Result<LcvConfig> {
        let mut cfg = LcvConfig::new(self.grid.clone(), self.p, seed)?;
        cfg.controls = self.controls;
        Ok(cfg)
    }
}

/// Seeds of one replicate, derived from the master seed by ChaCha stream `dgm` at block
/// position `replicate`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ReplicateSeeds {
    /// Seeds the simulated dataset.
    pub data: u64,
    /// Seeds the held-out subsample of the cross-validation.
    pub lcv: u64,
}

pub fn replicate_seeds(master: u64, dgm_index: usize, replicate: usize) -> ReplicateSeeds {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(dgm_index as u64);
    // one 64-byte block (16 words) per replicate
    rng.set_word_pos(16 * replicate as u128);
    ReplicateSeeds {
        data: rng.next_u64(),
        lcv: rng.next_u64(),
    }
}

/// Counts of fitted model (rows) against data-generating model (columns), plus a row of
/// failed replicates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContingencyTable {
    pub rows: Vec<ModelName>,
    pub cols: Vec<ModelName>,
    /// `counts[row][col]`.
    pub counts: Vec<Vec<usize>>,
    /// Failed replicates per column.
    pub failed: Vec<usize>,
}

impl ContingencyTable {
    pub fn new(cols: &[ModelName]) -> Self {
        let rows = ModelName::ALL.to_vec();
        Self {
            counts: vec![vec![0; cols.len()]; rows.len()],
            failed: vec![0; cols.len()],
            rows,
            cols: cols.to_vec(),
        }
    }

    fn col(&self, dgm: ModelName) -> Result<usize> {
        self.cols
            .iter()
            .position(|&c| c == dgm)
            .ok_or_else(|| Error::InvalidInput(format!("{dgm} is not a column of the table")))
    }

    /// Tallies one replicate; `None` counts as failed.
    pub fn record(&mut self, dgm: ModelName, fitted: Option<ModelName>) -> Result<()> {
        let c = self.col(dgm)?;
        match fitted {
            Some(m) => {
                let r = self.rows.iter().position(|&x| x == m).expect("rows cover every model");
                self.counts[r][c] += 1;
            }
            None => self.failed[c] += 1,
        }
        Ok(())
    }

    pub fn count(&self, fitted: ModelName, dgm: ModelName) -> Result<usize> {
        let c = self.col(dgm)?;
        let r = self.rows.iter().position(|&x| x == fitted).expect("rows cover every model");
        Ok(self.counts[r][c])
    }

    /// True positive count: replicates of `dgm` classified as `dgm`.
    pub fn tpc(&self, dgm: ModelName) -> Result<usize> {
        self.count(dgm, dgm)
    }

    /// Classified plus failed replicates of `dgm`.
    pub fn column_total(&self, dgm: ModelName) -> Result<usize> {
        let c = self.col(dgm)?;
        Ok(self.counts.iter().map(|r| r[c]).sum::<usize>() + self.failed[c])
    }

    pub fn total_failed(&self) -> usize {
        self.failed.iter().sum()
    }

    /// Comma-separated table: header `fitted,<dgm…>`, one row per model, then `failed`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("fitted");
        for c in &self.cols {
            out.push(',');
            out.push_str(c.as_str());
        }
        out.push('\n');
        for (name, row) in self.rows.iter().zip(&self.counts) {
            out.push_str(name.as_str());
            for v in row {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
        out.push_str("failed");
        for v in &self.failed {
            out.push_str(&format!(",{v}"));
        }
        out.push('\n');
        out
    }
}

/// Everything recorded about one replicate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateRecord {
    pub dgm: ModelName,
    pub replicate: usize,
    pub seeds: ReplicateSeeds,
    /// Fitted model, `None` when the replicate failed.
    pub label: Option<ModelName>,
    pub h_star: Option<f64>,
    pub scores: Vec<LcvScore>,
    pub fit: Option<FitResult>,
    pub error: Option<String>,
}

/// Result of [`run_experiment`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentOutcome {
    pub table: ContingencyTable,
    pub records: Vec<ReplicateRecord>,
}

/// Simulates one replicate's dataset.
pub fn simulate(name: ModelName, n: usize, d: usize, seed: u64) -> Result<Dataset> {
    let theta = dgm_params(name, d)?;
    gh_sample(&theta, n, &mut ChaCha8Rng::seed_from_u64(seed))
}

fn run_replicate(cfg: &ExperimentConfig, dgm_index: usize, replicate: usize) -> ReplicateRecord {
    let dgm = cfg.dgms[dgm_index];
    let seeds = replicate_seeds(cfg.seed, dgm_index, replicate);
    let outcome = simulate(dgm, cfg.n, cfg.d, seeds.data)
        .and_then(|data| select_h(&data, cfg.penalty, &cfg.lcv_config(seeds.lcv)?));
    match outcome {
        Ok(sel) => ReplicateRecord {
            dgm,
            replicate,
            seeds,
            label: Some(sel.fit.label.name),
            h_star: Some(sel.h_star),
            scores: sel.scores,
            fit: Some(sel.fit),
            error: None,
        },
        Err(e) => ReplicateRecord {
            dgm,
            replicate,
            seeds,
            label: None,
            h_star: None,
            scores: vec![],
            fit: None,
            error: Some(e.to_string()),
        },
    }
}

fn record_path(dir: &Path, dgm: ModelName, replicate: usize) -> PathBuf {
    dir.join(format!("{}_{:03}.json", dgm.as_str(), replicate))
}

/// Runs every (dgm, replicate) pair, up to `cfg.workers` at a time, writing one JSON document
/// per replicate as it finishes, then `table.csv` and `config.json` into `cfg.output_dir`. The
/// table is tallied in (dgm, replicate) order, so it does not depend on completion order.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    run_experiment_with_progress(cfg, &|_| {})
}

/// [`run_experiment`] calling `progress` with each replicate's record as soon as it is written.
pub fn run_experiment_with_progress(
    cfg: &ExperimentConfig,
    progress: &(dyn Fn(&ReplicateRecord) + Sync),
) -> Result<ExperimentOutcome> {
    cfg.validate()?;
    fs::create_dir_all(&cfg.output_dir)?;
    fs::write(
        cfg.output_dir.join("config.json"),
        serde_json::to_string_pretty(cfg)?,
    )?;
    let jobs: Vec<(usize, usize)> = (0..cfg.dgms.len())
        .flat_map(|g| (0..cfg.replicates).map(move |r| (g, r)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let records: Vec<Result<ReplicateRecord>> = pool.install(|| {
        jobs.par_iter()
            .map(|&(g, r)| {
                let rec = run_replicate(cfg, g, r);
                let path = record_path(&cfg.output_dir, rec.dgm, r);
                fs::write(path, serde_json::to_string_pretty(&rec)?)?;
                progress(&rec);
                Ok(rec)
            })
            .collect()
    });
    let records = records.into_iter().collect::<Result<Vec<_>>>()?;
    let mut table = ContingencyTable::new(&cfg.dgms);
    for rec in &records {
        table.record(rec.dgm, rec.label)?;
    }
    let mut f = fs::File::create(cfg.output_dir.join("table.csv"))?;
    f.write_all(table.to_csv().as_bytes())?;
    Ok(ExperimentOutcome { table, records })
}

/// Which penalty a curve sweeps.
#[derive(Debug, Clone, PartialEq)]
pub enum CurveKind {
    /// `h·|θ − θ₀|`.
    Lasso { theta0: f64 },
    /// `h·min_j |θ − θⱼ|`.
    McLasso { targets: Vec<f64> },
    /// A composite shape penalty; the swept coordinate is `CurveParam`.
    Shape(PenaltyKind),
}

/// The shape coordinate swept by a composite-penalty curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveParam {
    Lambda,
    Chi,
    Psi,
    GammaNorm,
}

impl std::str::FromStr for CurveParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lambda" => Ok(CurveParam::Lambda),
            "chi" => Ok(CurveParam::Chi),
            "psi" => Ok(CurveParam::Psi),
            "gamma_norm" | "gamma-norm" | "gamma" => Ok(CurveParam::GammaNorm),
            other => Err(Error::InvalidInput(format!(
                "unknown curve parameter {other:?} (expected lambda, chi, psi or gamma_norm)"
            ))),
        }
    }
}

/// One-dimensional sweep of a penalty over `steps` equally spaced points of `[lo, hi]`,
/// holding the other shape parameters at `fixed`. Returns `(value, penalty)` rows.
pub fn penalty_curve(
    kind: &CurveKind,
    param: CurveParam,
    range: (f64, f64),
    steps: usize,
    h: f64,
    fixed: &ShapeParams,
    d: usize,
) -> Result<Vec<(f64, f64)>> {
    let (lo, hi) = range;
    if steps < 2 {
        return Err(Error::InvalidInput("a curve needs at least two steps".into()));
    }
    if !(lo.is_finite() && hi.is_finite()) || lo > hi {
        return Err(Error::InvalidInput(format!("invalid range [{lo}, {hi}]")));
    }
    if !(h >= 0.0) || !h.is_finite() {
        return Err(Error::InvalidInput(format!("h must be finite and >= 0, got {h}")));
    }
    if let CurveKind::Shape(_) = kind {
        let bad = match param {
            CurveParam::Chi => lo <= 0.0,
            CurveParam::Psi | CurveParam::GammaNorm => lo < 0.0,
            CurveParam::Lambda => false,
        };
        if bad {
            return Err(Error::Domain(format!("{param:?} range [{lo}, {hi}] leaves the domain")));
        }
        if fixed.gamma.len() != d {
            return Err(Error::InvalidInput("fixed gamma must have d entries".into()));
        }
    }
    let values: Vec<f64> = (0..steps)
        .map(|k| lo + (hi - lo) * k as f64 / (steps - 1) as f64)
        .collect();
    values
        .into_iter()
        .map(|v| {
            let p = match kind {
                CurveKind::Lasso { theta0 } => mc_lasso(v, &[*theta0], h)?,
                CurveKind::McLasso { targets } => mc_lasso(v, targets, h)?,
                CurveKind::Shape(k) => {
                    let s = sweep_point(fixed, param, v);
                    match k {
                        PenaltyKind::None => 0.0,
                        PenaltyKind::Full72 => penalty_full72(&s, h, d),
                        PenaltyKind::Hier16 => penalty_hier16(&s, h, d),
                    }
                }
            };
            Ok((v, p))
        })
        .collect()
}

fn sweep_point(fixed: &ShapeParams, param: CurveParam, v: f64) -> ShapeParams {
    let mut s = fixed.clone();
    match param {
        CurveParam::Lambda => s.lambda = v,
        CurveParam::Chi => s.chi = v,
        CurveParam::Psi => s.psi = v,
        CurveParam::GammaNorm => {
            let norm = s.gamma.norm();
            s.gamma = if norm > 0.0 {
                &s.gamma * (v / norm)
            } else {
                let mut e = DVector::zeros(s.gamma.len());
                e[0] = v;
                e
            };
        }
    }
    s
}

/// Writes curve rows as `value,penalty` lines with a header.
pub fn write_curve<W: Write>(rows: &[(f64, f64)], mut out: W) -> Result<()> {
    writeln!(out, "value,penalty")?;
    for (v, p) in rows {
        writeln!(out, "{v},{p}")?;
    }
    Ok(())
}
