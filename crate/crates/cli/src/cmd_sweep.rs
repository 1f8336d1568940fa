//! `nbp gap-sweep`: train/test gap measurement over a grid of m, T, beta, or
//! blocklength, with per-point quartiles and trend statistics.

use crate::manifest::{CodeIdentity, ManifestBuilder};
use crate::{load_code, noise_spec, parse_list, parse_mode, CliError, Ctx};
use clap::Args;
use nbp_core::bounds::{dominant_term, BoundInputs};
use nbp_core::channel::NoiseSpec;
use nbp_core::code_graph::serialize_alist;
use nbp_core::stats::{fmt_float, spearman_rho};
use nbp_core::training::{run_gap_trials, GapReport, TrainConfig};
use nbp_core::CodeGraph;
use serde_json::json;
use std::io::Write;
use std::path::PathBuf;

#[derive(Args, Debug)]
pub struct GapSweepArgs {
    /// Swept parameter: m, T, beta, or n
    #[arg(long)]
    pub param: String,
    /// Comma-separated grid values (keep-counts for the n sweep)
    #[arg(long)]
    pub grid: String,
    /// Code for m/T/beta sweeps
    #[arg(long)]
    pub code: Option<PathBuf>,
    /// Parent code for the n sweep (columns are masked down to each grid value)
    #[arg(long)]
    pub parent: Option<PathBuf>,
    #[arg(long = "T", default_value_t = 3)]
    pub t_iters: usize,
    #[arg(long, default_value_t = 10_000)]
    pub m: usize,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub snr_db: Option<f64>,
    #[arg(long, default_value = "minsum")]
    pub mode: String,
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 100_000)]
    pub test_size: usize,
    #[arg(long, default_value_t = 0.01)]
    pub lr: f64,
    #[arg(long, default_value_t = 200)]
    pub epochs: usize,
    #[arg(long, default_value_t = 128)]
    pub batch: usize,
    #[arg(long, default_value_t = 10)]
    pub patience: usize,
    #[arg(long, default_value_t = 1e-4)]
    pub tol: f64,
    #[arg(long)]
    pub w_bound: Option<f64>,
    #[arg(long)]
    pub b_lambda: Option<f64>,
    /// w used for the normalized bound column of the n sweep
    #[arg(long, default_value_t = 1.0)]
    pub bound_w: f64,
    /// b_lambda used for the normalized bound column of the n sweep
    #[arg(long, default_value_t = 10.0)]
    pub bound_b_lambda: f64,
    #[arg(long, default_value_t = 0.05)]
    pub delta: f64,
}

struct PointResult {
    value: f64,
    n: usize,
    report: GapReport,
    /// Theorem-1 dominant term divided by the median train BER (n sweep).
    normalized_bound: Option<f64>,
}

pub fn run(ctx: &Ctx, args: GapSweepArgs) -> Result<(), CliError> {
    // the beta sweep takes its noise levels from the grid itself
    let base_noise = if args.param == "beta" {
        NoiseSpec::Beta(args.beta.unwrap_or(1.0))
    } else {
        noise_spec(args.beta, args.snr_db)?
    };
    let base_cfg = TrainConfig {
        learning_rate: args.lr,
        max_epochs: args.epochs,
        batch_size: args.batch,
        patience: args.patience,
        tolerance: args.tol,
        seed: args.seed,
        w_bound: args.w_bound,
        mode: parse_mode(&args.mode)?,
        t_iters: args.t_iters,
        noise: base_noise,
        m_train: args.m,
        test_size: args.test_size,
        trials: args.trials,
        b_lambda: args.b_lambda,
        parallel_trials: !ctx.sequential,
        ..TrainConfig::default()
    };

    let mut mb = ManifestBuilder::new(ctx);
    mb.seed(args.seed);
    mb.config(json!({
        "param": args.param,
        "grid": args.grid,
        "train": serde_json::to_value(&base_cfg)?,
        "bound_w": args.bound_w,
        "bound_b_lambda": args.bound_b_lambda,
        "delta": args.delta,
    }));

    let points: Vec<PointResult> = match args.param.as_str() {
        "m" => {
            let grid: Vec<usize> = parse_list(&args.grid, "grid")?;
            let g = require_code(&args.code, &mut mb)?;
            grid.into_iter()
                .map(|m| {
                    let cfg = TrainConfig {
                        m_train: m,
                        ..base_cfg.clone()
                    };
                    let report = run_gap_trials(&g, &cfg)?;
                    Ok(PointResult {
                        value: m as f64,
                        n: g.n(),
                        report,
                        normalized_bound: None,
                    })
                })
                .collect::<Result<_, CliError>>()?
        }
        "T" => {
            let grid: Vec<usize> = parse_list(&args.grid, "grid")?;
            let g = require_code(&args.code, &mut mb)?;
            grid.into_iter()
                .map(|t| {
                    let cfg = TrainConfig {
                        t_iters: t,
                        ..base_cfg.clone()
                    };
                    let report = run_gap_trials(&g, &cfg)?;
                    Ok(PointResult {
                        value: t as f64,
                        n: g.n(),
                        report,
                        normalized_bound: None,
                    })
                })
                .collect::<Result<_, CliError>>()?
        }
        "beta" => {
            let grid: Vec<f64> = parse_list(&args.grid, "grid")?;
            let g = require_code(&args.code, &mut mb)?;
            grid.into_iter()
                .map(|beta| {
                    let cfg = TrainConfig {
                        noise: NoiseSpec::Beta(beta),
                        ..base_cfg.clone()
                    };
                    let report = run_gap_trials(&g, &cfg)?;
                    Ok(PointResult {
                        value: beta,
                        n: g.n(),
                        report,
                        normalized_bound: None,
                    })
                })
                .collect::<Result<_, CliError>>()?
        }
        "n" => {
            let parent_path = args.parent.as_ref().ok_or_else(|| {
                CliError::Usage("--parent is required for the n sweep".to_string())
            })?;
            let parent = load_code(parent_path)?;
            mb.code(CodeIdentity::of(&parent, parent_path.display().to_string()));
            let grid: Vec<usize> = parse_list(&args.grid, "grid")?;
            grid.into_iter()
                .map(|keep| {
                    if keep == 0 || keep > parent.n() {
                        return Err(CliError::Validation(format!(
                            "keep count {keep} outside 1..={}",
                            parent.n()
                        )));
                    }
                    let columns: Vec<usize> = (0..keep).collect();
                    let descendant = parent.mask_columns(&columns)?;
                    for w in descendant.warnings() {
                        eprintln!("warning (n = {keep}): {w}");
                    }
                    archive_descendant(ctx, &descendant, keep, &mut mb)?;
                    let report = run_gap_trials(&descendant, &base_cfg)?;
                    let d_v = descendant.max_var_degree();
                    let bound = dominant_term(&BoundInputs {
                        n: descendant.n(),
                        d_v,
                        t_iters: args.t_iters,
                        m: args.m as f64,
                        w: args.bound_w,
                        b_lambda: args.bound_b_lambda,
                        delta: args.delta,
                        d_c: None,
                        kappa: None,
                        beta: None,
                        profile: None,
                    })?;
                    let normalized_bound = if report.median_train_ber > 0.0 {
                        Some(bound / report.median_train_ber)
                    } else {
                        None
                    };
                    Ok(PointResult {
                        value: keep as f64,
                        n: descendant.n(),
                        report,
                        normalized_bound,
                    })
                })
                .collect::<Result<_, CliError>>()?
        }
        other => {
            return Err(CliError::Usage(format!(
                "unknown sweep parameter {other:?} (expected m, T, beta, or n)"
            )))
        }
    };

    write_outputs(ctx, &args, points, mb)
}

fn require_code(
    code: &Option<PathBuf>,
    mb: &mut ManifestBuilder,
) -> Result<CodeGraph, CliError> {
    let path = code
        .as_ref()
        .ok_or_else(|| CliError::Usage("--code is required for this sweep".to_string()))?;
    let g = load_code(path)?;
    mb.code(CodeIdentity::of(&g, path.display().to_string()));
    Ok(g)
}

fn archive_descendant(
    ctx: &Ctx,
    descendant: &CodeGraph,
    keep: usize,
    mb: &mut ManifestBuilder,
) -> Result<(), CliError> {
    let path = ctx.out_path(&format!("gap_sweep_n_code_{keep}.alist"));
    std::fs::write(&path, serialize_alist(descendant)?)?;
    mb.output(&path, "alist-v1");
    Ok(())
}

fn write_outputs(
    ctx: &Ctx,
    args: &GapSweepArgs,
    points: Vec<PointResult>,
    mut mb: ManifestBuilder,
) -> Result<(), CliError> {
    let tag = &args.param;
    let rows_path = ctx.out_path(&format!("gap_sweep_{tag}_rows.csv"));
    {
        let mut w = std::io::BufWriter::new(std::fs::File::create(&rows_path)?);
        writeln!(
            w,
            "param,value,trial,n,m,T,beta,train_ber,test_ber,gap,normalized_gap,epochs,final_loss"
        )?;
        for point in &points {
            for row in &point.report.rows {
                writeln!(
                    w,
                    "{},{},{},{},{},{},{},{},{},{},{},{},{}",
                    tag,
                    fmt_float(point.value),
                    row.trial,
                    point.n,
                    row.m,
                    row.t_iters,
                    fmt_float(row.beta),
                    fmt_float(row.train_ber),
                    fmt_float(row.test_ber),
                    fmt_float(row.gap),
                    row.normalized_gap.map(fmt_float).unwrap_or_else(|| "nan".into()),
                    row.epochs,
                    fmt_float(row.final_loss),
                )?;
            }
        }
        w.flush()?;
    }
    mb.output(&rows_path, "gap-rows-v1");
    println!("wrote {}", rows_path.display());

    let summary_path = ctx.out_path(&format!("gap_sweep_{tag}_summary.csv"));
    {
        let mut w = std::io::BufWriter::new(std::fs::File::create(&summary_path)?);
        writeln!(
            w,
            "param,value,n,beta,q1_gap,median_gap,q3_gap,median_train_ber,median_test_ber,median_normalized_gap,normalized_theorem1"
        )?;
        for point in &points {
            let (q1, q2, q3) = point.report.gap_quartiles;
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{},{}",
                tag,
                fmt_float(point.value),
                point.n,
                fmt_float(point.report.beta),
                fmt_float(q1),
                fmt_float(q2),
                fmt_float(q3),
                fmt_float(point.report.median_train_ber),
                fmt_float(point.report.median_test_ber),
                point
                    .report
                    .normalized_gap_quartiles
                    .map(|(_, med, _)| fmt_float(med))
                    .unwrap_or_else(|| "nan".into()),
                point.normalized_bound.map(fmt_float).unwrap_or_else(|| "nan".into()),
            )?;
        }
        w.flush()?;
    }
    mb.output(&summary_path, "gap-summary-v1");
    println!("wrote {}", summary_path.display());

    // trend statistics
    let values: Vec<f64> = points.iter().map(|p| p.value).collect();
    let medians: Vec<f64> = points.iter().map(|p| p.report.gap_quartiles.1).collect();
    let rho = if values.len() >= 2 {
        spearman_rho(&values, &medians)
    } else {
        f64::NAN
    };
    let peak = values
        .iter()
        .zip(&medians)
        .max_by(|a, b| a.1.partial_cmp(b.1).expect("finite medians"))
        .map(|(v, _)| *v);
    let stats_path = ctx.out_path(&format!("gap_sweep_{tag}_stats.json"));
    let stats = json!({
        "param": tag,
        "grid": values,
        "median_gaps": medians,
        "spearman_rho_median_gap": rho,
        "peak_value": peak,
        "trials": args.trials,
        "seed": args.seed,
    });
    std::fs::write(&stats_path, serde_json::to_string_pretty(&stats)?)?;
    mb.output(&stats_path, "gap-stats-v1");
    println!(
        "spearman(median gap vs {tag}) = {}  peak at {tag} = {}",
        fmt_float(rho),
        peak.map(fmt_float).unwrap_or_else(|| "nan".into())
    );

    mb.write(ctx, &format!("gap_sweep_{tag}_manifest.json"))?;
    Ok(())
}
