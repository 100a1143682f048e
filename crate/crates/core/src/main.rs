use clap::{Args, Parser, Subcommand};
use ghfit::ecme::{fit, FitControls, FitResult};
use ghfit::ghdist::Dataset;
use ghfit::harness::{
    penalty_curve, run_experiment_with_progress, simulate, write_curve, CurveKind, CurveParam,
    ExperimentConfig,
};
use ghfit::penalty::{PenaltyKind, PenaltySpec, ShapeParams};
use ghfit::select::{classify, select_h, to_conventional, LcvConfig, ModelName};
use ghfit::{Error, Result};
use nalgebra::DVector;
use serde::Serialize;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "ghfit", version, about = "Penalised fitting and model selection for the multivariate generalised hyperbolic distribution")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit the penalised GH model at one penalty weight; prints the result as JSON.
    Fit(FitArgs),
    /// Select the penalty weight by partial leave-one-out cross-validation; prints JSON.
    Lcv(LcvArgs),
    /// Re-classify a fit result document and print the label with conventional parameters.
    Classify(ClassifyArgs),
    /// Simulate a dataset from one of the study's data-generating models as CSV.
    Simulate(SimulateArgs),
    /// Run a simulation study from a config file.
    Experiment(ExperimentArgs),
    /// Sweep a penalty along one coordinate and print `value,penalty` rows.
    PenaltyCurve(CurveArgs),
}

#[derive(Args)]
struct DataArgs {
    /// Comma-separated numeric data, one observation per row.
    #[arg(long)]
    data: PathBuf,
    /// The first row of the data file is a header.
    #[arg(long)]
    header: bool,
}

#[derive(Args)]
struct FitControlArgs {
    /// Penalty: none, full72 or hier16.
    #[arg(long, default_value = "hier16")]
    penalty: PenaltyKind,
    /// Largest number of ECME iterations.
    #[arg(long, default_value_t = 500)]
    max_iter: usize,
    /// Relative change of the penalised log-likelihood that stops the iterations.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Only use the default start (no extra restarts).
    #[arg(long)]
    no_restarts: bool,
}

impl FitControlArgs {
    fn controls(&self) -> FitControls {
        FitControls {
            max_iter: self.max_iter,
            rel_tol: self.tol,
            restarts: !self.no_restarts,
            ..FitControls::default()
        }
    }
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    controls: FitControlArgs,
    /// Penalty weight.
    #[arg(long, default_value_t = 0.0)]
    h: f64,
    /// Recorded in the output; fitting itself is deterministic.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the JSON here instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct LcvArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    controls: FitControlArgs,
    /// Comma-separated penalty weights.
    #[arg(long, value_delimiter = ',', default_value = "0,5,10,15,20,25,30,35,40,45,50,60,70,80,100")]
    grid: Vec<f64>,
    /// Proportion of observations left out one at a time.
    #[arg(long, default_value_t = 0.1)]
    p: f64,
    /// Seed of the held-out subsample.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ClassifyArgs {
    /// A JSON document written by `fit` (or the `fit` member of an `lcv` document).
    #[arg(long)]
    result: PathBuf,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// One of N, t, C, L, SGH, St, AL, VG.
    #[arg(long)]
    dgm: ModelName,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    d: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write a header row `x1,…,xd`.
    #[arg(long)]
    header: bool,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Config file; relative paths inside it are resolved against its directory.
    #[arg(long)]
    config: PathBuf,
}

#[derive(Args)]
struct CurveArgs {
    /// lasso, mc-lasso, none, full72 or hier16.
    #[arg(long)]
    kind: String,
    /// Swept shape coordinate for the composite penalties: lambda, chi, psi or gamma_norm.
    #[arg(long, default_value = "lambda")]
    param: CurveParam,
    #[arg(long, allow_hyphen_values = true)]
    lo: f64,
    #[arg(long, allow_hyphen_values = true)]
    hi: f64,
    #[arg(long, default_value_t = 201)]
    steps: usize,
    #[arg(long, default_value_t = 1.0)]
    h: f64,
    /// Centre of the classical LASSO.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    theta0: f64,
    /// Targets of the multiple-choice LASSO.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "-3,-2,-1,0,1,2,3")]
    targets: Vec<f64>,
    /// Fixed skewness vector (its length sets d).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "0,0")]
    gamma: Vec<f64>,
    #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
    lambda: f64,
    #[arg(long, default_value_t = 1.0)]
    chi: f64,
    #[arg(long, default_value_t = 1.0)]
    psi: f64,
    #[arg(long)]
    output: Option<PathBuf>,
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn emit_json<T: Serialize>(value: &T, path: Option<&Path>) -> Result<()> {
    let mut out = sink(path)?;
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct FitReport<'a> {
    seed: u64,
    n: usize,
    d: usize,
    #[serde(flatten)]
    result: &'a FitResult,
}

fn run_fit(args: &FitArgs) -> Result<()> {
    let data = Dataset::read_csv_path(&args.data.data, args.data.header)?;
    let spec = PenaltySpec::new(args.controls.penalty, args.h)?;
    let result = fit(&data, &spec, None, &args.controls.controls())?;
    let report = FitReport {
        seed: args.seed,
        n: data.n(),
        d: data.d(),
        result: &result,
    };
    emit_json(&report, args.output.as_deref())
}

fn run_lcv(args: &LcvArgs) -> Result<()> {
    let data = Dataset::read_csv_path(&args.data.data, args.data.header)?;
    let mut cfg = LcvConfig::new(args.grid.clone(), args.p, args.seed)?;
    cfg.controls = args.controls.controls();
    let selection = select_h(&data, args.controls.penalty, &cfg)?;
    emit_json(&selection, args.output.as_deref())
}

fn run_classify(args: &ClassifyArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.result)?;
    let doc: serde_json::Value = serde_json::from_str(&text)?;
    // accept a fit document or an lcv document carrying the fit under "fit"
    let fit_doc = match doc.get("fit") {
        Some(inner) if inner.is_object() => inner.clone(),
        _ => doc,
    };
    let result: FitResult = serde_json::from_value(fit_doc)?;
    let d = result.theta.dim();
    let mut label = classify(&result.theta, &result.label.active_constraints, d)?;
    label.conventional_params = to_conventional(label.name, &result.theta);
    emit_json(&label, args.output.as_deref())
}

fn run_simulate(args: &SimulateArgs) -> Result<()> {
    let data = simulate(args.dgm, args.n, args.d, args.seed)?;
    let header: Vec<String> = (1..=args.d).map(|j| format!("x{j}")).collect();
    let out = sink(args.output.as_deref())?;
    data.write_csv(out, args.header.then_some(header.as_slice()))
}

fn run_experiment_cmd(args: &ExperimentArgs) -> Result<bool> {
    let cfg = ExperimentConfig::from_path(&args.config)?;
    let progress = |rec: &ghfit::harness::ReplicateRecord| {
        match (&rec.label, &rec.error) {
            (Some(l), _) => eprintln!(
                "{} replicate {}: {} (h* = {})",
                rec.dgm,
                rec.replicate,
                l,
                rec.h_star.unwrap_or(f64::NAN)
            ),
            (None, e) => eprintln!(
                "{} replicate {}: FAILED ({})",
                rec.dgm,
                rec.replicate,
                e.as_deref().unwrap_or("unknown error")
            ),
        }
    };
    let outcome = run_experiment_with_progress(&cfg, &progress)?;
    print!("{}", outcome.table.to_csv());
    Ok(outcome.table.total_failed() == 0)
}

fn run_curve(args: &CurveArgs) -> Result<()> {
    let kind = match args.kind.to_ascii_lowercase().as_str() {
        "lasso" => CurveKind::Lasso {
            theta0: args.theta0,
        },
        "mc-lasso" | "mc_lasso" | "mclasso" => CurveKind::McLasso {
            targets: args.targets.clone(),
        },
        other => CurveKind::Shape(other.parse::<PenaltyKind>().map_err(|_| {
            Error::InvalidInput(format!(
                "unknown curve kind {other:?} (expected lasso, mc-lasso, none, full72, hier16)"
            ))
        })?),
    };
    let fixed = ShapeParams::new(
        DVector::from_vec(args.gamma.clone()),
        args.lambda,
        args.chi,
        args.psi,
    );
    let rows = penalty_curve(
        &kind,
        args.param,
        (args.lo, args.hi),
        args.steps,
        args.h,
        &fixed,
        args.gamma.len(),
    )?;
    let mut out = sink(args.output.as_deref())?;
    write_curve(&rows, &mut out)?;
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Fit(a) => run_fit(a).map(|_| true),
        Command::Lcv(a) => run_lcv(a).map(|_| true),
        Command::Classify(a) => run_classify(a).map(|_| true),
        Command::Simulate(a) => run_simulate(a).map(|_| true),
        Command::Experiment(a) => run_experiment_cmd(a),
        Command::PenaltyCurve(a) => run_curve(a).map(|_| true),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
