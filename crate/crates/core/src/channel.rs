//! BPSK modulation over an AWGN channel, LLR computation, and seeded
//! dataset generation.
//!
//! Every sample row draws its noise from a dedicated ChaCha substream keyed
//! by `(seed, row index)`, so datasets are a pure function of
//! `(n, m, beta, seed, b_lambda)` and shard concatenation reproduces the
//! single-threaded output exactly.

use crate::code_graph::CodeGraph;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;
use thiserror::Error;

/// XOR-ed into a training seed to derive the independent test-set seed.
pub const TEST_SEED_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

#[derive(Debug, Error)]
pub enum ChannelError {
    #[error("noise standard deviation must be positive, got {0}")]
    InvalidBeta(f64),
    #[error("dataset must contain at least one pair")]
    Empty,
    #[error("length mismatch: {0}")]
    Length(String),
    #[error("dataset file format error: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Channel noise level, either directly as the Gaussian standard deviation
/// or as an Eb/N0 figure in dB (resolved against the code rate).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum NoiseSpec {
    Beta(f64),
    SnrDb(f64),
}

impl NoiseSpec {
    /// Resolve to a noise standard deviation. dB inputs use the Eb/N0
    /// convention `beta^2 = 1 / (2 * rate * 10^(snr/10))` with
    /// `rate = k_true / n`.
    pub fn resolve(self, g: &CodeGraph) -> Result<f64, ChannelError> {
        match self {
            NoiseSpec::Beta(b) if b > 0.0 => Ok(b),
            NoiseSpec::Beta(b) => Err(ChannelError::InvalidBeta(b)),
            NoiseSpec::SnrDb(db) => Ok(beta_from_snr_db(db, g.rate_true())),
        }
    }
}

/// `beta = sqrt(1 / (2 * rate * 10^(snr_db/10)))`.
pub fn beta_from_snr_db(snr_db: f64, rate: f64) -> f64 {
    (1.0 / (2.0 * rate * 10f64.powf(snr_db / 10.0))).sqrt()
}

/// Map bits to BPSK symbols: 0 -> +1, 1 -> -1.
pub fn modulate_bpsk(bits: &[u8]) -> Vec<f64> {
    bits.iter().map(|&b| if b == 0 { 1.0 } else { -1.0 }).collect()
}

/// Add i.i.d. Gaussian noise with standard deviation `beta`.
pub fn add_awgn<R: Rng>(
    symbols: &[f64],
    beta: f64,
    rng: &mut R,
) -> Result<Vec<f64>, ChannelError> {
    if beta <= 0.0 {
        return Err(ChannelError::InvalidBeta(beta));
    }
    Ok(symbols
        .iter()
        .map(|&s| {
            let z: f64 = StandardNormal.sample(rng);
            s + beta * z
        })
        .collect())
}

/// LLRs for BPSK over AWGN: `lambda[i] = 2 y[i] / beta^2`, optionally clipped
/// to `[-b_lambda, b_lambda]`. Positive LLR means bit 0 is more likely.
pub fn compute_llr(
    y: &[f64],
    beta: f64,
    b_lambda: Option<f64>,
) -> Result<Vec<f64>, ChannelError> {
    if beta <= 0.0 {
        return Err(ChannelError::InvalidBeta(beta));
    }
    let scale = 2.0 / (beta * beta);
    Ok(y.iter()
        .map(|&yi| {
            let l = scale * yi;
            match b_lambda {
                Some(b) => l.clamp(-b, b),
                None => l,
            }
        })
        .collect())
}

/// A set of `(lambda, x)` training pairs. Only all-zero codewords are
/// generated (the channel is symmetric, so this is lossless for BER of
/// symmetric decoders), hence codewords are not stored per row.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    n: usize,
    m: usize,
    llrs: Vec<f64>, // m * n, row-major
    beta: f64,
    b_lambda: Option<f64>,
    seed: u64,
    zero_word: Vec<u8>,
}

impl Dataset {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn b_lambda(&self) -> Option<f64> {
        self.b_lambda
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// LLR row for sample `j`.
    pub fn llr(&self, j: usize) -> &[f64] {
        &self.llrs[j * self.n..(j + 1) * self.n]
    }

    /// Transmitted codeword for sample `j` (all-zero mode).
    pub fn codeword(&self, _j: usize) -> &[u8] {
        &self.zero_word
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.llrs.chunks_exact(self.n)
    }
}

fn generate_rows(n: usize, beta: f64, seed: u64, b_lambda: Option<f64>, j0: usize, j1: usize) -> Vec<f64> {
    let scale = 2.0 / (beta * beta);
    let mut out = Vec::with_capacity((j1 - j0) * n);
    for j in j0..j1 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(j as u64);
        for _ in 0..n {
            let z: f64 = StandardNormal.sample(&mut rng);
            let y = 1.0 + beta * z; // all-zero codeword -> all +1 symbols
            let l = scale * y;
            out.push(match b_lambda {
                Some(b) => l.clamp(-b, b),
                None => l,
            });
        }
    }
    out
}

/// Generate `m` all-zero-codeword training pairs for the given code.
pub fn generate_dataset(
    g: &CodeGraph,
    m: usize,
    noise: NoiseSpec,
    seed: u64,
    b_lambda: Option<f64>,
) -> Result<Dataset, ChannelError> {
    let beta = noise.resolve(g)?;
    if m == 0 {
        return Err(ChannelError::Empty);
    }
    let n = g.n();
    Ok(Dataset {
        n,
        m,
        llrs: generate_rows(n, beta, seed, b_lambda, 0, m),
        beta,
        b_lambda,
        seed,
        zero_word: vec![0u8; n],
    })
}

/// Sharded generation: concatenating the shards reproduces
/// [`generate_dataset`] exactly, whatever the shard boundaries.
pub fn generate_dataset_sharded(
    g: &CodeGraph,
    m: usize,
    noise: NoiseSpec,
    seed: u64,
    b_lambda: Option<f64>,
    num_shards: usize,
) -> Result<Dataset, ChannelError> {
    let beta = noise.resolve(g)?;
    if m == 0 {
        return Err(ChannelError::Empty);
    }
    let n = g.n();
    let shard = m.div_ceil(num_shards.max(1));
    let mut llrs = Vec::with_capacity(m * n);
    let mut j0 = 0;
    while j0 < m {
        let j1 = (j0 + shard).min(m);
        llrs.extend(generate_rows(n, beta, seed, b_lambda, j0, j1));
        j0 = j1;
    }
    Ok(Dataset {
        n,
        m,
        llrs,
        beta,
        b_lambda,
        seed,
        zero_word: vec![0u8; n],
    })
}

#[derive(Serialize, Deserialize)]
struct DatasetHeader {
    format: String,
    n: usize,
    m: usize,
    beta: f64,
    b_lambda: Option<f64>,
    seed: u64,
    all_zero: bool,
}

const DATASET_FORMAT: &str = "nbp-dataset-v1";

/// Write the binary container: one JSON header line, then the LLR matrix as
/// little-endian f32, row-major. Codewords are omitted in all-zero mode.
pub fn save_dataset(ds: &Dataset, path: &Path) -> Result<(), ChannelError> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    let header = DatasetHeader {
        format: DATASET_FORMAT.to_string(),
        n: ds.n,
        m: ds.m,
        beta: ds.beta,
        b_lambda: ds.b_lambda,
        seed: ds.seed,
        all_zero: true,
    };
    serde_json::to_writer(&mut w, &header).map_err(|e| ChannelError::Format(e.to_string()))?;
    w.write_all(b"\n")?;
    for &l in &ds.llrs {
        w.write_all(&(l as f32).to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn load_dataset(path: &Path) -> Result<Dataset, ChannelError> {
    let mut r = BufReader::new(std::fs::File::open(path)?);
    let mut header_line = String::new();
    r.read_line(&mut header_line)?;
    let header: DatasetHeader = serde_json::from_str(header_line.trim_end())
        .map_err(|e| ChannelError::Format(e.to_string()))?;
    if header.format != DATASET_FORMAT {
        return Err(ChannelError::Format(format!(
            "unsupported dataset format {:?}",
            header.format
        )));
    }
    let count = header.m * header.n;
    let mut bytes = Vec::with_capacity(count * 4);
    r.read_to_end(&mut bytes)?;
    if bytes.len() != count * 4 {
        return Err(ChannelError::Format(format!(
            "expected {} payload bytes, found {}",
            count * 4,
            bytes.len()
        )));
    }
    let llrs = bytes
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64)
        .collect();
    Ok(Dataset {
        n: header.n,
        m: header.m,
        llrs,
        beta: header.beta,
        b_lambda: header.b_lambda,
        seed: header.seed,
        zero_word: vec![0u8; header.n],
    })
}

/// Plain CSV export for inspection: header `llr_0..llr_{n-1}`, one row per
/// sample, nine significant digits.
pub fn export_csv(ds: &Dataset, path: &Path) -> Result<(), ChannelError> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    let header: Vec<String> = (0..ds.n).map(|i| format!("llr_{i}")).collect();
    writeln!(w, "{}", header.join(","))?;
    for row in ds.rows() {
        let cells: Vec<String> = row.iter().map(|&x| crate::stats::fmt_float(x)).collect();
        writeln!(w, "{}", cells.join(","))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code_graph::{spc, tanner_155};
    use approx::assert_relative_eq;

    #[test]
    fn bpsk_mapping() {
        assert_eq!(modulate_bpsk(&[0, 0, 0]), vec![1.0, 1.0, 1.0]);
        assert_eq!(modulate_bpsk(&[1, 0, 1]), vec![-1.0, 1.0, -1.0]);
        // complement symmetry
        let x = [0u8, 1, 1, 0];
        let comp: Vec<u8> = x.iter().map(|&b| 1 - b).collect();
        let a = modulate_bpsk(&x);
        let b = modulate_bpsk(&comp);
        assert!(a.iter().zip(&b).all(|(p, q)| *p == -*q));
    }

    #[test]
    fn awgn_vanishing_noise_and_determinism() {
        let symbols = vec![1.0, -1.0, 1.0];
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let y = add_awgn(&symbols, 1e-12, &mut rng).unwrap();
        for (a, b) in y.iter().zip(&symbols) {
            assert!((a - b).abs() < 1e-9);
        }
        let mut r1 = ChaCha8Rng::seed_from_u64(42);
        let mut r2 = ChaCha8Rng::seed_from_u64(42);
        assert_eq!(
            add_awgn(&symbols, 0.8, &mut r1).unwrap(),
            add_awgn(&symbols, 0.8, &mut r2).unwrap()
        );
        assert!(add_awgn(&symbols, 0.0, &mut rng).is_err());
    }

    #[test]
    fn awgn_moments_match_law_of_large_numbers() {
        let beta = 0.7;
        let n = 1_000_000usize;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let y = add_awgn(&vec![0.0; n], beta, &mut rng).unwrap();
        let mean = y.iter().sum::<f64>() / n as f64;
        let var = y.iter().map(|v| v * v).sum::<f64>() / n as f64 - mean * mean;
        assert!(mean.abs() < 4.0 * beta / 1e3, "mean {mean}");
        assert!((var - beta * beta).abs() < 0.01 * beta * beta, "var {var}");
    }

    #[test]
    fn llr_formula_and_clipping() {
        assert_relative_eq!(compute_llr(&[1.5], 1.0, None).unwrap()[0], 3.0);
        assert_relative_eq!(compute_llr(&[-1.0], 2.0, None).unwrap()[0], -0.5);
        assert_relative_eq!(compute_llr(&[100.0], 1.0, Some(10.0)).unwrap()[0], 10.0);
        assert!(compute_llr(&[1.0], -1.0, None).is_err());
    }

    #[test]
    fn dataset_is_all_zero_and_deterministic() {
        let g = spc(3);
        let d1 = generate_dataset(&g, 5, NoiseSpec::Beta(1.0), 9, None).unwrap();
        assert_eq!(d1.len(), 5);
        for j in 0..5 {
            assert_eq!(d1.codeword(j), &[0, 0, 0]);
        }
        let d2 = generate_dataset(&g, 5, NoiseSpec::Beta(1.0), 9, None).unwrap();
        assert_eq!(d1, d2);
        let d3 = generate_dataset(&g, 5, NoiseSpec::Beta(1.0), 10, None).unwrap();
        assert_ne!(d1, d3);
        assert!(generate_dataset(&g, 0, NoiseSpec::Beta(1.0), 9, None).is_err());
    }

    #[test]
    fn dataset_llr_mean_matches_expectation() {
        let g = spc(16);
        let beta = 0.9f64;
        let m = 20_000;
        let ds = generate_dataset(&g, m, NoiseSpec::Beta(beta), 3, None).unwrap();
        let total: f64 = ds.rows().flat_map(|r| r.iter().copied()).sum();
        let count = (m * 16) as f64;
        let mean = total / count;
        // E[lambda] = 2/beta^2, sd(lambda) = 2/beta
        let se = (2.0 / beta) / count.sqrt();
        assert!(
            (mean - 2.0 / (beta * beta)).abs() < 5.0 * se,
            "mean {mean} expected {}",
            2.0 / (beta * beta)
        );
    }

    #[test]
    fn clipping_bounds_every_entry() {
        let g = spc(8);
        let ds = generate_dataset(&g, 500, NoiseSpec::Beta(0.4), 1, Some(6.0)).unwrap();
        let max = ds
            .rows()
            .flat_map(|r| r.iter().copied())
            .fold(0f64, |a, b| a.max(b.abs()));
        assert!(max <= 6.0);
    }

    #[test]
    fn sharded_generation_matches_single_threaded() {
        let g = spc(5);
        let whole = generate_dataset(&g, 103, NoiseSpec::Beta(1.2), 77, Some(9.0)).unwrap();
        for shards in [1, 2, 7, 103] {
            let pieces =
                generate_dataset_sharded(&g, 103, NoiseSpec::Beta(1.2), 77, Some(9.0), shards)
                    .unwrap();
            assert_eq!(whole, pieces);
        }
    }

    #[test]
    fn snr_conversion_uses_true_rate() {
        let g = tanner_155(); // k_true = 64
        let beta = NoiseSpec::SnrDb(2.0).resolve(&g).unwrap();
        let expected = (1.0f64 / (2.0 * (64.0 / 155.0) * 10f64.powf(0.2))).sqrt();
        assert_relative_eq!(beta, expected, epsilon = 1e-12);
    }

    #[test]
    fn save_load_round_trip() {
        let g = spc(4);
        let ds = generate_dataset(&g, 17, NoiseSpec::Beta(0.8), 5, Some(12.0)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.bin");
        save_dataset(&ds, &path).unwrap();
        let back = load_dataset(&path).unwrap();
        assert_eq!(back.n(), 4);
        assert_eq!(back.len(), 17);
        assert_eq!(back.beta(), 0.8);
        assert_eq!(back.b_lambda(), Some(12.0));
        // payload is f32, so values agree to f32 precision
        for j in 0..17 {
            for (a, b) in back.llr(j).iter().zip(ds.llr(j)) {
                assert_relative_eq!(*a, *b, max_relative = 1e-6);
            }
        }
        export_csv(&ds, &dir.path().join("d.csv")).unwrap();
    }
}
