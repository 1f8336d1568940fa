//! `nbp dataset gen`.

use crate::manifest::{CodeIdentity, ManifestBuilder};
use crate::{load_code, noise_spec, CliError, Ctx};
use clap::Subcommand;
use nbp_core::channel::{export_csv, generate_dataset, save_dataset};
use std::path::PathBuf;

#[derive(Subcommand, Debug)]
pub enum DatasetCmd {
    /// Simulate BPSK/AWGN all-zero-codeword transmissions and store the LLRs
    Gen {
        #[arg(long)]
        code: PathBuf,
        /// Number of (llr, codeword) pairs
        #[arg(long)]
        m: usize,
        /// Noise standard deviation
        #[arg(long)]
        beta: Option<f64>,
        /// Eb/N0 in dB (uses the code's true rate)
        #[arg(long)]
        snr_db: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Clip LLRs to [-b, b]
        #[arg(long)]
        b_lambda: Option<f64>,
        #[arg(long)]
        out: PathBuf,
        /// Also export the LLR matrix as CSV
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

pub fn run(ctx: &Ctx, cmd: DatasetCmd) -> Result<(), CliError> {
    match cmd {
        DatasetCmd::Gen {
            code,
            m,
            beta,
            snr_db,
            seed,
            b_lambda,
            out,
            csv,
        } => {
            let g = load_code(&code)?;
            let noise = noise_spec(beta, snr_db)?;
            let ds = generate_dataset(&g, m, noise, seed, b_lambda)?;
            let out = if out.is_absolute() {
                out
            } else {
                ctx.out_path(out.to_str().unwrap_or("dataset.bin"))
            };
            save_dataset(&ds, &out)?;
            println!(
                "wrote {} (m={m} n={} beta={:.6} seed={seed})",
                out.display(),
                g.n(),
                ds.beta()
            );
            let mut mb = ManifestBuilder::new(ctx);
            mb.code(CodeIdentity::of(&g, code.display().to_string()))
                .seed(seed)
                .output(&out, "nbp-dataset-v1");
            if let Some(csv_path) = csv {
                let csv_path = if csv_path.is_absolute() {
                    csv_path
                } else {
                    ctx.out_path(csv_path.to_str().unwrap_or("dataset.csv"))
                };
                export_csv(&ds, &csv_path)?;
                mb.output(&csv_path, "dataset-csv-v1");
            }
            mb.write(ctx, "dataset_gen_manifest.json")?;
            Ok(())
        }
    }
}
