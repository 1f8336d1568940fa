//! `nbp code {info, peg, mask, tanner155}`.

use crate::manifest::{CodeIdentity, ManifestBuilder};
use crate::{load_code, CliError, Ctx};
use clap::Subcommand;
use nbp_core::code_graph::{peg_construct, serialize_alist, tanner_155};
use serde::Serialize;
use std::path::PathBuf;

#[derive(Subcommand, Debug)]
pub enum CodeCmd {
    /// Print blocklength, dimension, degree profile, regularity, and girth
    Info {
        code: PathBuf,
        /// Also write the report as JSON
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Construct a code with progressive edge growth
    Peg {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        checks: usize,
        #[arg(long)]
        dv: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Mask a parent code down to a subset of its columns
    Mask {
        parent: PathBuf,
        /// Keep the first N columns
        #[arg(long)]
        keep: Option<usize>,
        /// Keep an explicit comma-separated list of column indices
        #[arg(long)]
        keep_list: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the bundled (155, 64) Tanner code
    Tanner155 {
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Serialize)]
struct CodeInfo {
    n: usize,
    num_checks: usize,
    k_design: i64,
    k_true: usize,
    gf2_rank: usize,
    theta: usize,
    regular: bool,
    d_v: Option<usize>,
    d_c: Option<usize>,
    min_var_degree: usize,
    max_var_degree: usize,
    min_check_degree: usize,
    max_check_degree: usize,
    girth: Option<usize>,
    sha256: String,
}

pub fn run(ctx: &Ctx, cmd: CodeCmd) -> Result<(), CliError> {
    match cmd {
        CodeCmd::Info { code, json } => {
            let g = load_code(&code)?;
            let info = CodeInfo {
                n: g.n(),
                num_checks: g.num_checks(),
                k_design: g.k_design(),
                k_true: g.k_true(),
                gf2_rank: g.gf2_rank(),
                theta: g.theta(),
                regular: g.is_regular(),
                d_v: g.d_v(),
                d_c: g.d_c(),
                min_var_degree: g.var_degrees().iter().copied().min().unwrap_or(0),
                max_var_degree: g.max_var_degree(),
                min_check_degree: g.check_degrees().iter().copied().min().unwrap_or(0),
                max_check_degree: g.max_check_degree(),
                girth: g.girth(),
                sha256: g.code_hash(),
            };
            println!(
                "n={} num_checks={} k_design={} k_true={} theta={} regular={}",
                info.n, info.num_checks, info.k_design, info.k_true, info.theta, info.regular
            );
            match (info.d_v, info.d_c) {
                (Some(dv), Some(dc)) => println!("d_v={dv} d_c={dc}"),
                _ => println!(
                    "var degrees {}..{} check degrees {}..{} (irregular)",
                    info.min_var_degree,
                    info.max_var_degree,
                    info.min_check_degree,
                    info.max_check_degree
                ),
            }
            match info.girth {
                Some(girth) => println!("girth={girth}"),
                None => println!("girth=inf (no cycles)"),
            }
            println!("sha256={}", info.sha256);
            if let Some(path) = json {
                let path = if path.is_absolute() {
                    path
                } else {
                    ctx.out_path(path.to_str().unwrap_or("code_info.json"))
                };
                std::fs::write(&path, serde_json::to_string_pretty(&info)?)?;
                let mut mb = ManifestBuilder::new(ctx);
                mb.code(CodeIdentity::of(&g, code.display().to_string()))
                    .output(&path, "code-info-v1");
                mb.write(ctx, "code_info_manifest.json")?;
            }
            Ok(())
        }
        CodeCmd::Peg {
            n,
            checks,
            dv,
            seed,
            out,
        } => {
            let g = peg_construct(n, checks, dv, seed)?;
            let out = absolute_in(ctx, out);
            std::fs::write(&out, serialize_alist(&g)?)?;
            println!(
                "wrote {} (n={n} checks={checks} d_v={dv} girth={:?})",
                out.display(),
                g.girth()
            );
            let mut mb = ManifestBuilder::new(ctx);
            mb.code(CodeIdentity::of(
                &g,
                format!("peg(n={n}, checks={checks}, d_v={dv}, seed={seed})"),
            ))
            .seed(seed)
            .output(&out, "alist-v1");
            mb.write(ctx, "code_peg_manifest.json")?;
            Ok(())
        }
        CodeCmd::Mask {
            parent,
            keep,
            keep_list,
            out,
        } => {
            let g = load_code(&parent)?;
            let keep_indices: Vec<usize> = match (keep, keep_list) {
                (Some(count), None) => {
                    if count == 0 || count > g.n() {
                        return Err(CliError::Validation(format!(
                            "--keep must lie in 1..={}, got {count}",
                            g.n()
                        )));
                    }
                    (0..count).collect()
                }
                (None, Some(list)) => crate::parse_list(&list, "keep-list")?,
                _ => {
                    return Err(CliError::Usage(
                        "exactly one of --keep and --keep-list is required".to_string(),
                    ))
                }
            };
            let masked = g.mask_columns(&keep_indices)?;
            for w in masked.warnings() {
                eprintln!("warning: {w}");
            }
            let out = absolute_in(ctx, out);
            std::fs::write(&out, serialize_alist(&masked)?)?;
            println!(
                "wrote {} (n={} k_design={} warnings={})",
                out.display(),
                masked.n(),
                masked.k_design(),
                masked.warnings().len()
            );
            let mut mb = ManifestBuilder::new(ctx);
            mb.code(CodeIdentity::of(
                &masked,
                format!("mask({}, keep={})", parent.display(), keep_indices.len()),
            ))
            .output(&out, "alist-v1");
            mb.write(ctx, "code_mask_manifest.json")?;
            Ok(())
        }
        CodeCmd::Tanner155 { out } => {
            let g = tanner_155();
            let out = absolute_in(ctx, out);
            std::fs::write(&out, serialize_alist(&g)?)?;
            println!("wrote {} (n=155 k_true=64 d_v=3 d_c=5)", out.display());
            let mut mb = ManifestBuilder::new(ctx);
            mb.code(CodeIdentity::of(&g, "tanner155"))
                .output(&out, "alist-v1");
            mb.write(ctx, "code_tanner155_manifest.json")?;
            Ok(())
        }
    }
}

fn absolute_in(ctx: &Ctx, path: PathBuf) -> PathBuf {
    if path.is_absolute() {
        path
    } else {
        ctx.out_path(path.to_str().unwrap_or("out"))
    }
}
