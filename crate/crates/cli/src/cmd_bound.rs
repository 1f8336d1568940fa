//! `nbp bound {theorem1, rate-form, theorem2, theorem3, prop1, fig2, fig3}`.

use crate::manifest::{CodeIdentity, ManifestBuilder};
use crate::{load_code, parse_list, parse_mode, CliError, Ctx};
use clap::{Args, Subcommand};
use nbp_core::bounds::{
    estimate_all_bits, proposition1_rhs, sweep_curves, theorem1_rate_form, theorem1_rhs,
    theorem2_rhs, theorem3_rhs, tradeoff_curves, tradeoff_default_betas, BoundInputs, BoundReport,
    CurvePoint,
};
use nbp_core::channel::{generate_dataset, NoiseSpec};
use nbp_core::decoder::sample_weight_class;
use nbp_core::stats::fmt_float;
use serde_json::json;
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Args, Debug, Clone)]
pub struct CommonBoundArgs {
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    #[arg(long, default_value_t = 10)]
    pub dv: usize,
    #[arg(long = "T", default_value_t = 10)]
    pub t_iters: usize,
    #[arg(long, default_value_t = 1e6)]
    pub m: f64,
    #[arg(long, default_value_t = 1.0)]
    pub w: f64,
    #[arg(long, default_value_t = 10.0)]
    pub b_lambda: f64,
    #[arg(long, default_value_t = 0.05)]
    pub delta: f64,
    /// JSON report path
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl CommonBoundArgs {
    fn inputs(&self) -> BoundInputs {
        BoundInputs {
            n: self.n,
            d_v: self.dv,
            t_iters: self.t_iters,
            m: self.m,
            w: self.w,
            b_lambda: self.b_lambda,
            delta: self.delta,
            d_c: None,
            kappa: None,
            beta: None,
            profile: None,
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum BoundCmd {
    /// Main bound for regular codes
    Theorem1(CommonBoundArgs),
    /// Main bound expressed through d_c and the code rate
    RateForm {
        #[command(flatten)]
        common: CommonBoundArgs,
        #[arg(long)]
        dc: usize,
        #[arg(long)]
        kappa: f64,
    },
    /// Irregular-code bound from a degree profile
    Theorem2 {
        #[command(flatten)]
        common: CommonBoundArgs,
        /// Take the profile from a code file
        #[arg(long)]
        code: Option<PathBuf>,
        /// Or give it explicitly, comma-separated
        #[arg(long)]
        profile: Option<String>,
    },
    /// Unbounded-LLR bound minimized over the b_lambda grid
    Theorem3 {
        #[command(flatten)]
        common: CommonBoundArgs,
        #[arg(long)]
        beta: f64,
        #[arg(long, default_value_t = 0.1)]
        grid_min: f64,
        #[arg(long, default_value_t = 1000.0)]
        grid_max: f64,
        #[arg(long, default_value_t = 64)]
        grid_points: usize,
        /// Also write the trade-off curve as CSV
        #[arg(long)]
        curve_csv: Option<PathBuf>,
    },
    /// Monte-Carlo bit-wise Rademacher estimate plugged into the averaged
    /// bound
    Prop1 {
        #[arg(long)]
        code: PathBuf,
        #[arg(long = "T", default_value_t = 2)]
        t_iters: usize,
        #[arg(long, default_value = "minsum")]
        mode: String,
        /// Dataset size
        #[arg(long, default_value_t = 200)]
        m: usize,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        /// Sampled decoder-class size
        #[arg(long, default_value_t = 8)]
        class_size: usize,
        #[arg(long, default_value_t = 200)]
        draws: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1.0)]
        w: f64,
        #[arg(long, default_value_t = 0.05)]
        delta: f64,
        /// Use the 1/(2n) coefficient variant
        #[arg(long)]
        halved: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit the four parameter-sweep curves around the anchor point
    Fig2 {
        #[command(flatten)]
        common: CommonBoundArgs,
    },
    /// Emit the LLR-bound trade-off decomposition and minimizer curve
    Fig3 {
        #[command(flatten)]
        common: CommonBoundArgs,
        /// Comma-separated noise levels
        #[arg(long)]
        betas: Option<String>,
        #[arg(long, default_value_t = 0.1)]
        grid_min: f64,
        #[arg(long, default_value_t = 1000.0)]
        grid_max: f64,
        #[arg(long, default_value_t = 64)]
        grid_points: usize,
    },
}

fn write_report(
    ctx: &Ctx,
    report: &BoundReport,
    out: &Option<PathBuf>,
    default_name: &str,
) -> Result<PathBuf, CliError> {
    let path = match out {
        Some(p) if p.is_absolute() => p.clone(),
        Some(p) => ctx.out_path(p.to_str().unwrap_or(default_name)),
        None => ctx.out_path(default_name),
    };
    std::fs::write(&path, serde_json::to_string_pretty(report)?)?;
    println!(
        "{}: complexity={} total={} -> {}",
        report.kind,
        fmt_float(report.complexity_term),
        fmt_float(report.total),
        path.display()
    );
    Ok(path)
}

fn grid(min: f64, max: f64, points: usize) -> Result<Vec<f64>, CliError> {
    if points < 2 || min <= 0.0 || max <= min {
        return Err(CliError::Usage(
            "grid needs at least 2 points and 0 < min < max".to_string(),
        ));
    }
    Ok((0..points)
        .map(|k| 10f64.powf(min.log10() + (max / min).log10() * k as f64 / (points - 1) as f64))
        .collect())
}

fn write_curve_csv(path: &Path, header: &str, rows: &[Vec<f64>]) -> Result<(), CliError> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "{header}")?;
    for row in rows {
        let cells: Vec<String> = row.iter().map(|&x| fmt_float(x)).collect();
        writeln!(w, "{}", cells.join(","))?;
    }
    w.flush()?;
    Ok(())
}

fn curve_rows(points: &[CurvePoint]) -> Vec<Vec<f64>> {
    points
        .iter()
        .map(|p| vec![p.x, p.complexity, p.small, p.confidence, p.total])
        .collect()
}

pub fn run(ctx: &Ctx, cmd: BoundCmd) -> Result<(), CliError> {
    match cmd {
        BoundCmd::Theorem1(common) => {
            let report = theorem1_rhs(&common.inputs())?;
            let path = write_report(ctx, &report, &common.out, "bound_theorem1.json")?;
            let mut mb = ManifestBuilder::new(ctx);
            mb.output(&path, "bound-report-v1");
            mb.write(ctx, "bound_theorem1_manifest.json")?;
            Ok(())
        }
        BoundCmd::RateForm { common, dc, kappa } => {
            let mut inputs = common.inputs();
            inputs.d_c = Some(dc);
            inputs.kappa = Some(kappa);
            let report = theorem1_rate_form(&inputs)?;
            let path = write_report(ctx, &report, &common.out, "bound_rate_form.json")?;
            let mut mb = ManifestBuilder::new(ctx);
            mb.output(&path, "bound-report-v1");
            mb.write(ctx, "bound_rate_form_manifest.json")?;
            Ok(())
        }
        BoundCmd::Theorem2 {
            common,
            code,
            profile,
        } => {
            let mut mb = ManifestBuilder::new(ctx);
            let (profile, n): (Vec<usize>, usize) = match (&code, &profile) {
                (Some(path), None) => {
                    let g = load_code(path)?;
                    mb.code(CodeIdentity::of(&g, path.display().to_string()));
                    (g.var_degrees().to_vec(), g.n())
                }
                (None, Some(list)) => {
                    let p: Vec<usize> = parse_list(list, "profile")?;
                    let n = p.len();
                    (p, n)
                }
                _ => {
                    return Err(CliError::Usage(
                        "exactly one of --code and --profile is required".to_string(),
                    ))
                }
            };
            let mut inputs = common.inputs();
            inputs.n = n;
            inputs.d_v = profile.iter().copied().max().unwrap_or(1);
            let report = theorem2_rhs(&profile, &inputs)?;
            let path = write_report(ctx, &report, &common.out, "bound_theorem2.json")?;
            mb.output(&path, "bound-report-v1");
            mb.write(ctx, "bound_theorem2_manifest.json")?;
            Ok(())
        }
        BoundCmd::Theorem3 {
            common,
            beta,
            grid_min,
            grid_max,
            grid_points,
            curve_csv,
        } => {
            let mut inputs = common.inputs();
            inputs.beta = Some(beta);
            let report = theorem3_rhs(&inputs, &grid(grid_min, grid_max, grid_points)?)?;
            println!(
                "b_lambda_star={}",
                fmt_float(report.optimal_b_lambda.unwrap_or(f64::NAN))
            );
            let path = write_report(ctx, &report, &common.out, "bound_theorem3.json")?;
            let mut mb = ManifestBuilder::new(ctx);
            mb.output(&path, "bound-report-v1");
            if let Some(csv) = curve_csv {
                let csv = if csv.is_absolute() {
                    csv
                } else {
                    ctx.out_path(csv.to_str().unwrap_or("bound_theorem3_curve.csv"))
                };
                let rows: Vec<Vec<f64>> = report
                    .curve
                    .as_ref()
                    .map(|c| {
                        c.iter()
                            .map(|r| vec![r.b_lambda, r.complexity, r.probability, r.phi])
                            .collect()
                    })
                    .unwrap_or_default();
                write_curve_csv(&csv, "b_lambda,complexity_term,probability_term,phi", &rows)?;
                mb.output(&csv, "phi-curve-v1");
            }
            mb.write(ctx, "bound_theorem3_manifest.json")?;
            Ok(())
        }
        BoundCmd::Prop1 {
            code,
            t_iters,
            mode,
            m,
            beta,
            class_size,
            draws,
            seed,
            w,
            delta,
            halved,
            out,
        } => {
            let g = load_code(&code)?;
            let mode = parse_mode(&mode)?;
            let data = generate_dataset(&g, m, NoiseSpec::Beta(beta), seed, None)?;
            let class = sample_weight_class(&g, t_iters, mode, w, class_size, seed ^ 0x5eed)?;
            let estimates = estimate_all_bits(&g, &class, &data, draws, seed)?;
            let bound = proposition1_rhs(&estimates, g.n(), m as f64, delta, halved)?;
            let mean = estimates.iter().sum::<f64>() / estimates.len() as f64;
            println!(
                "mean_bitwise_rademacher={} bound={}",
                fmt_float(mean),
                fmt_float(bound)
            );
            let path = match out {
                Some(p) if p.is_absolute() => p,
                Some(p) => ctx.out_path(p.to_str().unwrap_or("bound_prop1.json")),
                None => ctx.out_path("bound_prop1.json"),
            };
            let report = json!({
                "kind": "proposition1",
                "code_sha256": g.code_hash(),
                "t_iters": t_iters,
                "mode": mode.to_string(),
                "m": m,
                "beta": beta,
                "class_size": class_size,
                "sigma_draws": draws,
                "seed": seed,
                "delta": delta,
                "halved": halved,
                // maxima over a sampled finite subclass: lower estimates of
                // the true suprema
                "estimate_kind": "lower",
                "bitwise_estimates": estimates,
                "mean_estimate": mean,
                "bound": bound,
            });
            std::fs::write(&path, serde_json::to_string_pretty(&report)?)?;
            let mut mb = ManifestBuilder::new(ctx);
            mb.code(CodeIdentity::of(&g, code.display().to_string()))
                .seed(seed)
                .output(&path, "prop1-report-v1");
            mb.write(ctx, "bound_prop1_manifest.json")?;
            Ok(())
        }
        BoundCmd::Fig2 { common } => {
            let data = sweep_curves(&common.inputs())?;
            let mut mb = ManifestBuilder::new(ctx);
            mb.config(serde_json::to_value(common.inputs())?);
            for (name, header, points) in [
                ("bound_fig2_vs_m.csv", "m", &data.vs_m),
                ("bound_fig2_vs_T.csv", "T", &data.vs_t),
                ("bound_fig2_vs_n.csv", "n", &data.vs_n),
                ("bound_fig2_vs_dv.csv", "d_v", &data.vs_dv),
            ] {
                let path = ctx.out_path(name);
                let header = format!("{header},complexity_term,small_term,confidence_term,total");
                write_curve_csv(&path, &header, &curve_rows(points))?;
                mb.output(&path, "bound-curve-v1");
                println!("wrote {}", path.display());
            }
            mb.write(ctx, "bound_fig2_manifest.json")?;
            Ok(())
        }
        BoundCmd::Fig3 {
            common,
            betas,
            grid_min,
            grid_max,
            grid_points,
        } => {
            let betas = match betas {
                Some(list) => parse_list(&list, "betas")?,
                None => tradeoff_default_betas(),
            };
            let grid = grid(grid_min, grid_max, grid_points)?;
            let data = tradeoff_curves(&common.inputs(), &betas, &grid)?;
            let mut mb = ManifestBuilder::new(ctx);
            mb.config(serde_json::json!({
                "inputs": common.inputs(),
                "betas": betas,
                "grid_points": grid.len(),
            }));
            for (beta, rows) in &data.curves {
                let path = ctx.out_path(&format!("bound_fig3_phi_beta_{beta:.2}.csv"));
                let table: Vec<Vec<f64>> = rows
                    .iter()
                    .map(|r| vec![r.b_lambda, r.complexity, r.probability, r.phi])
                    .collect();
                write_curve_csv(
                    &path,
                    "b_lambda,complexity_term,probability_term,phi",
                    &table,
                )?;
                mb.output(&path, "phi-curve-v1");
                println!("wrote {}", path.display());
            }
            let bstar_path = ctx.out_path("bound_fig3_bstar.csv");
            let table: Vec<Vec<f64>> = data
                .b_star
                .iter()
                .map(|r| vec![r.beta, r.b_lambda_star, r.phi_min, r.total])
                .collect();
            write_curve_csv(&bstar_path, "beta,b_lambda_star,phi_min,total", &table)?;
            mb.output(&bstar_path, "bstar-curve-v1");
            println!("wrote {}", bstar_path.display());
            mb.write(ctx, "bound_fig3_manifest.json")?;
            Ok(())
        }
    }
}
