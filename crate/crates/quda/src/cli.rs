//! Command-line front end: `simulate`, `fit`, `predict`, `benchmark`.
//!
//! CSV files must carry a header row; the label column (default name
//! `label`, values 1/2) is selected with `--label`. Floats are parsed and
//! printed locale-independently. Every command takes `--seed`, and all
//! randomness derives from it, so reruns produce identical bytes.
//!
//! Exit codes: 0 success, 2 usage error, 3 data error, 4 numerical failure.

use clap::{Args, Parser, Subcommand};
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::QudaError;
use crate::linalg::Mat;
use crate::metrics::{format_table, run_benchmark, write_rep_log, CvGridSpec};
use crate::model::{fit, load_model, save_model, QudaModel, SyntheticTruth};
use crate::moments::{estimate_moments, ClassLabel, LabeledDataset};
use crate::omega::AdmmConfig;
use crate::seed::derive_seed;
use crate::synth::{build_truth, sample_labeled, SyntheticSpec};
use crate::tuning::{cv_select, CvConfig};

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

#[derive(Parser)]
#[command(
    name = "quda",
    version,
    about = "Sparse quadratic discriminant analysis: simulate, fit, predict, benchmark"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic benchmark dataset (train/test CSVs plus a truth JSON).
    Simulate(SimulateArgs),
    /// Fit a model to a labeled CSV, optionally tuning penalties by cross-validation.
    Fit(FitArgs),
    /// Classify rows of a feature CSV with a saved model.
    Predict(PredictArgs),
    /// Run replicated benchmarks and print the summary table.
    Benchmark(BenchmarkArgs),
}

#[derive(Args)]
struct AdmmArgs {
    /// ADMM penalty parameter; defaults to the spectral heuristic.
    #[arg(long)]
    rho: Option<f64>,
    /// ADMM iteration budget.
    #[arg(long, default_value_t = 500)]
    max_iter: usize,
    /// ADMM absolute tolerance.
    #[arg(long, default_value_t = 1e-5)]
    tol_abs: f64,
    /// ADMM relative tolerance.
    #[arg(long, default_value_t = 1e-4)]
    tol_rel: f64,
}

impl AdmmArgs {
    fn to_config(&self) -> AdmmConfig {
        AdmmConfig {
            rho: self.rho,
            max_iter: self.max_iter,
            tol_abs: self.tol_abs,
            tol_rel: self.tol_rel,
        }
    }
}

#[derive(Args)]
struct SimulateArgs {
    /// Synthetic model id (1-5).
    #[arg(long)]
    model: u8,
    /// Dimension.
    #[arg(long)]
    p: usize,
    /// Class-1 training size.
    #[arg(long, default_value_t = 100)]
    n1: usize,
    /// Class-2 training size.
    #[arg(long, default_value_t = 100)]
    n2: usize,
    /// Test rows per class.
    #[arg(long, default_value_t = 1000)]
    test_size: usize,
    /// Master seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory (created if missing).
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct FitArgs {
    /// Training CSV with a header row.
    #[arg(long)]
    data: PathBuf,
    /// Name of the label column (values 1/2).
    #[arg(long, default_value = "label")]
    label: String,
    /// Interaction penalty; required unless --cv is given.
    #[arg(long)]
    lambda: Option<f64>,
    /// Linear-index penalty; required unless --cv is given.
    #[arg(long)]
    lambda_delta: Option<f64>,
    /// Select both penalties by cross-validation.
    #[arg(long, default_value_t = false)]
    cv: bool,
    /// Cross-validation folds.
    #[arg(long, default_value_t = 5)]
    folds: usize,
    /// Grid points per penalty.
    #[arg(long, default_value_t = 8)]
    grid_points: usize,
    /// Decades each grid spans below its maximum.
    #[arg(long, default_value_t = 2.0)]
    decades: f64,
    /// Master seed (fold assignment).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Where to write the fitted model.
    #[arg(long, default_value = "model.json")]
    out: PathBuf,
    /// Optional CSV dump of the cross-validation surface.
    #[arg(long)]
    cv_table: Option<PathBuf>,
    #[command(flatten)]
    admm: AdmmArgs,
}

#[derive(Args)]
struct PredictArgs {
    /// Saved model JSON.
    #[arg(long)]
    model: PathBuf,
    /// Feature CSV; a column matching --label is ignored if present.
    #[arg(long)]
    data: PathBuf,
    /// Name of the label column to skip.
    #[arg(long, default_value = "label")]
    label: String,
    /// Output CSV of predictions.
    #[arg(long, default_value = "predictions.csv")]
    out: PathBuf,
    /// Also emit the raw discriminant score per row.
    #[arg(long, default_value_t = false)]
    scores: bool,
}

#[derive(Args)]
struct BenchmarkArgs {
    /// Comma-separated model ids, e.g. "2" or "1,2,3,4,5".
    #[arg(long, value_delimiter = ',')]
    models: Vec<u8>,
    /// Dimension.
    #[arg(long)]
    p: usize,
    /// Class-1 training size.
    #[arg(long, default_value_t = 100)]
    n1: usize,
    /// Class-2 training size.
    #[arg(long, default_value_t = 100)]
    n2: usize,
    /// Replications (at least 2).
    #[arg(long, default_value_t = 20)]
    reps: usize,
    /// Test rows per class per replication.
    #[arg(long, default_value_t = 1000)]
    test_size: usize,
    /// Master seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Cross-validation folds.
    #[arg(long, default_value_t = 5)]
    folds: usize,
    /// Grid points per penalty.
    #[arg(long, default_value_t = 8)]
    grid_points: usize,
    /// Decades each grid spans below its maximum.
    #[arg(long, default_value_t = 2.0)]
    decades: f64,
    /// Per-replication CSV log.
    #[arg(long)]
    out_csv: Option<PathBuf>,
    #[command(flatten)]
    admm: AdmmArgs,
}

/// Parses arguments and runs the selected command, returning the process
/// exit code.
pub fn run() -> i32 {
    // clap exits with code 2 on usage errors by itself.
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Simulate(args) => cmd_simulate(&args),
        Command::Fit(args) => cmd_fit(&args),
        Command::Predict(args) => cmd_predict(&args),
        Command::Benchmark(args) => cmd_benchmark(&args),
    };
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            let mut cause = std::error::Error::source(&e);
            while let Some(c) = cause {
                eprintln!("  caused by: {c}");
                cause = c.source();
            }
            exit_code_for(&e)
        }
    }
}

/// Data problems get 3, numerical failures 4.
fn exit_code_for(e: &QudaError) -> i32 {
    match e {
        QudaError::Pipeline { source, .. } | QudaError::Replication { source, .. } => {
            exit_code_for(source)
        }
        QudaError::NonFinite { .. }
        | QudaError::EigenNoConvergence { .. }
        | QudaError::NotPositiveDefinite { .. }
        | QudaError::AdmmNoConvergence { .. }
        | QudaError::CdNoConvergence { .. }
        | QudaError::ZeroDiagonal { .. }
        | QudaError::NegativeThreshold(_)
        | QudaError::NonPositiveRho(_) => EXIT_NUMERICAL,
        QudaError::InvalidConfig(_) | QudaError::InvalidSpec(_) => EXIT_USAGE,
        _ => EXIT_DATA,
    }
}

// --- CSV I/O ----------------------------------------------------------------

fn data_err(msg: String) -> QudaError {
    QudaError::CorruptPayload(msg)
}

struct CsvData {
    features: Mat,
    labels: Option<Vec<ClassLabel>>,
}

/// Reads a CSV with a header. When `require_label` is set the label column
/// must exist; otherwise it is skipped if present.
fn read_csv(path: &Path, label_col: &str, require_label: bool) -> crate::error::Result<CsvData> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| data_err(format!("{}: {e}", path.display())))?;
    let headers = rdr
        .headers()
        .map_err(|e| data_err(format!("{}: {e}", path.display())))?
        .clone();
    let label_idx = headers.iter().position(|h| h == label_col);
    if require_label && label_idx.is_none() {
        return Err(data_err(format!(
            "{}: no column named {:?} (have: {})",
            path.display(),
            label_col,
            headers.iter().collect::<Vec<_>>().join(", ")
        )));
    }
    let feature_names: Vec<String> = headers
        .iter()
        .enumerate()
        .filter(|(i, _)| Some(*i) != label_idx)
        .map(|(_, h)| h.to_string())
        .collect();
    if feature_names.is_empty() {
        return Err(data_err(format!(
            "{}: no feature columns",
            path.display()
        )));
    }

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut labels: Vec<ClassLabel> = Vec::new();
    for (rec_no, rec) in rdr.records().enumerate() {
        let line = rec_no + 2; // header is line 1
        let rec = rec.map_err(|e| data_err(format!("{} line {line}: {e}", path.display())))?;
        if rec.len() != headers.len() {
            return Err(data_err(format!(
                "{} line {line}: expected {} fields, got {}",
                path.display(),
                headers.len(),
                rec.len()
            )));
        }
        let mut row = Vec::with_capacity(feature_names.len());
        for (i, field) in rec.iter().enumerate() {
            if Some(i) == label_idx {
                if require_label {
                    let v: u8 = field.trim().parse().map_err(|_| QudaError::InvalidLabel {
                        found: field.to_string(),
                        row: line,
                    })?;
                    labels.push(ClassLabel::from_u8(v, line)?);
                }
                continue;
            }
            let v: f64 = field.trim().parse().map_err(|_| {
                data_err(format!(
                    "{} line {line}: cannot parse {:?} as a number",
                    path.display(),
                    field
                ))
            })?;
            row.push(v);
        }
        rows.push(row);
    }
    let features = if rows.is_empty() {
        // Placeholder shape; callers treat n = 0 separately.
        Mat::zeros(1, feature_names.len())
    } else {
        Mat::from_rows(&rows)?
    };
    Ok(CsvData {
        features,
        labels: if require_label { Some(labels) } else { None },
    })
}

fn read_labeled(path: &Path, label_col: &str) -> crate::error::Result<LabeledDataset> {
    let csv = read_csv(path, label_col, true)?;
    let labels = csv.labels.expect("required");
    if labels.is_empty() {
        return Err(QudaError::EmptyInput);
    }
    LabeledDataset::new(csv.features, labels)
}

fn write_dataset_csv(path: &Path, data: &LabeledDataset) -> crate::error::Result<()> {
    let mut w = csv::Writer::from_path(path)
        .map_err(|e| data_err(format!("{}: {e}", path.display())))?;
    let mut header: Vec<String> = (1..=data.p()).map(|j| format!("x{j}")).collect();
    header.push("label".into());
    w.write_record(&header)
        .map_err(|e| data_err(format!("csv: {e}")))?;
    for i in 0..data.n() {
        let mut rec: Vec<String> = data.row(i).iter().map(|v| v.to_string()).collect();
        rec.push(data.labels()[i].as_u8().to_string());
        w.write_record(&rec)
            .map_err(|e| data_err(format!("csv: {e}")))?;
    }
    w.flush()?;
    Ok(())
}

// --- truth JSON --------------------------------------------------------------

#[derive(serde::Serialize, serde::Deserialize)]
struct TruthFile {
    schema: String,
    version: u32,
    model_id: u8,
    p: usize,
    seed: u64,
    pi1: f64,
    pi2: f64,
    mu1: String,
    mu2: String,
    sigma1: String,
    sigma2: String,
    omega_true: String,
    delta_true: String,
}

fn encode_f64s(values: &[f64]) -> String {
    use base64::Engine;
    let mut bytes = Vec::with_capacity(values.len() * 8);
    for v in values {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    base64::engine::general_purpose::STANDARD.encode(bytes)
}

fn write_truth_json(
    path: &Path,
    truth: &SyntheticTruth,
    spec: &SyntheticSpec,
) -> crate::error::Result<()> {
    let file = TruthFile {
        schema: "quda-truth".into(),
        version: 1,
        model_id: spec.model_id,
        p: spec.p,
        seed: spec.seed,
        pi1: truth.pi1,
        pi2: truth.pi2,
        mu1: encode_f64s(&truth.mu1),
        mu2: encode_f64s(&truth.mu2),
        sigma1: encode_f64s(truth.sigma1.data()),
        sigma2: encode_f64s(truth.sigma2.data()),
        omega_true: encode_f64s(truth.omega_true.data()),
        delta_true: encode_f64s(&truth.delta_true),
    };
    let json =
        serde_json::to_string_pretty(&file).map_err(|e| data_err(format!("truth json: {e}")))?;
    std::fs::write(path, json)?;
    Ok(())
}

// --- commands ----------------------------------------------------------------

fn cmd_simulate(args: &SimulateArgs) -> crate::error::Result<()> {
    let spec = SyntheticSpec::new(args.model, args.p, args.n1, args.n2, args.seed)?;
    let truth = build_truth(&spec)?;
    let train = sample_labeled(&truth, spec.n1, spec.n2, derive_seed(spec.seed, "train", 0))?;
    let test = sample_labeled(
        &truth,
        args.test_size,
        args.test_size,
        derive_seed(spec.seed, "test", 0),
    )?;
    std::fs::create_dir_all(&args.out_dir)?;
    let train_path = args.out_dir.join("train.csv");
    let test_path = args.out_dir.join("test.csv");
    let truth_path = args.out_dir.join("truth.json");
    write_dataset_csv(&train_path, &train)?;
    write_dataset_csv(&test_path, &test)?;
    write_truth_json(&truth_path, &truth, &spec)?;
    println!(
        "wrote {} ({} rows), {} ({} rows), {}",
        train_path.display(),
        train.n(),
        test_path.display(),
        test.n(),
        truth_path.display()
    );
    Ok(())
}

fn cmd_fit(args: &FitArgs) -> crate::error::Result<()> {
    let admm = args.admm.to_config();
    let data = read_labeled(&args.data, &args.label)?;

    let (lambda, lambda_delta, cv_note) = if args.cv {
        let moments = estimate_moments(&data)?;
        let cv = CvConfig::with_default_grids(
            &moments,
            args.folds,
            derive_seed(args.seed, "cv", 0),
            args.grid_points,
            args.decades,
        )?;
        let (l, ld, table) = cv_select(&data, &cv, &admm)?;
        if let Some(path) = &args.cv_table {
            let f = std::fs::File::create(path)?;
            table.write_csv(f)?;
        }
        (l, ld, format!("selected by {}-fold CV", args.folds))
    } else {
        match (args.lambda, args.lambda_delta) {
            (Some(l), Some(ld)) => (l, ld, "fixed".to_string()),
            _ => {
                return Err(QudaError::InvalidConfig(
                    "pass both --lambda and --lambda-delta, or --cv".into(),
                ))
            }
        }
    };

    let model = fit(&data, lambda, lambda_delta, &admm)?;
    save_model(&model, &args.out)?;

    let md = &model.metadata;
    println!("model written to {}", args.out.display());
    println!("penalties: lambda={lambda} lambda_delta={lambda_delta} ({cv_note})");
    println!("rho: {}", md.rho);
    println!(
        "admm: {} iterations, primal residual {:.3e}, dual residual {:.3e}",
        md.admm_iterations, md.admm_primal_residual, md.admm_dual_residual
    );
    println!(
        "lasso: {} sweeps, kkt residual {:.3e}",
        md.cd_sweeps, md.cd_kkt_residual
    );
    println!(
        "support: {} interaction entries, {} main effects",
        md.omega_support.len(),
        md.delta_support.len()
    );
    println!("in-sample error: {:.4}", md.insample_error);
    Ok(())
}

fn cmd_predict(args: &PredictArgs) -> crate::error::Result<()> {
    let model: QudaModel = load_model(&args.model)?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(&args.data)
        .map_err(|e| data_err(format!("{}: {e}", args.data.display())))?;
    let headers = rdr
        .headers()
        .map_err(|e| data_err(format!("{}: {e}", args.data.display())))?
        .clone();
    let label_idx = headers.iter().position(|h| h == args.label);
    let n_features = headers.len() - usize::from(label_idx.is_some());
    if n_features != model.dim() {
        return Err(crate::error::shape_mismatch(
            format!("{} features (model dimension)", model.dim()),
            format!("{n_features} feature columns in {}", args.data.display()),
        ));
    }

    let out_file = std::fs::File::create(&args.out)?;
    let mut w = std::io::BufWriter::new(out_file);
    if args.scores {
        writeln!(w, "prediction,score")?;
    } else {
        writeln!(w, "prediction")?;
    }
    let mut z = vec![0.0_f64; model.dim()];
    for (rec_no, rec) in rdr.records().enumerate() {
        let line = rec_no + 2;
        let rec = rec.map_err(|e| data_err(format!("{} line {line}: {e}", args.data.display())))?;
        let mut k = 0;
        for (i, field) in rec.iter().enumerate() {
            if Some(i) == label_idx {
                continue;
            }
            z[k] = field.trim().parse().map_err(|_| {
                data_err(format!(
                    "{} line {line}: cannot parse {:?} as a number",
                    args.data.display(),
                    field
                ))
            })?;
            k += 1;
        }
        let score = model.discriminant(&z)?;
        let label = if score > 0.0 { 1 } else { 2 };
        if args.scores {
            writeln!(w, "{label},{score}")?;
        } else {
            writeln!(w, "{label}")?;
        }
    }
    w.flush()?;
    println!("predictions written to {}", args.out.display());
    Ok(())
}

fn cmd_benchmark(args: &BenchmarkArgs) -> crate::error::Result<()> {
    if args.reps < 2 {
        return Err(QudaError::InvalidConfig(
            "benchmark needs --reps >= 2 to report standard errors".into(),
        ));
    }
    if args.models.is_empty() {
        return Err(QudaError::InvalidConfig("pass at least one --models id".into()));
    }
    let grid = CvGridSpec {
        folds: args.folds,
        grid_points: args.grid_points,
        decades: args.decades,
    };
    let admm = args.admm.to_config();
    let mut summaries = Vec::new();
    for &model_id in &args.models {
        let spec = SyntheticSpec::new(model_id, args.p, args.n1, args.n2, args.seed)?;
        let summary = run_benchmark(&spec, args.reps, args.test_size, &grid, &admm)?;
        summaries.push(summary);
    }
    print!("{}", format_table(&summaries));
    if let Some(path) = &args.out_csv {
        let f = std::fs::File::create(path)?;
        write_rep_log(&summaries, f)?;
        println!("per-replication log written to {}", path.display());
    }
    Ok(())
}
