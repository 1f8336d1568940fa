//! Monte-Carlo estimation of bit-wise Rademacher complexity over a sampled
//! finite subclass of decoders.
//!
//! The true complexity takes a supremum over the whole bounded-weight
//! decoder family; replacing it with a maximum over `K` sampled decoders
//! yields a LOWER estimate of that supremum. Outputs are labeled as such and
//! never used to assert the direction of any inequality.

use super::BoundError;
use crate::channel::Dataset;
use crate::code_graph::CodeGraph;
use crate::decoder::{forward, hard_decision, NbpWeights};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Monte-Carlo average over sign draws of the best correlation achieved by
/// any row of `signs` (each row a decoder's +-1 outputs over the dataset):
/// `mean over draws of max_k (1/m) sum_i sigma_i * signs[k][i]`.
///
/// Draws use per-draw substreams and are reduced in fixed order, so the
/// result is identical whatever the parallel schedule.
pub fn rademacher_engine(
    signs: &[Vec<i8>],
    sigma_draws: usize,
    seed: u64,
) -> Result<f64, BoundError> {
    if signs.is_empty() {
        return Err(BoundError::InvalidParam(
            "need at least one decoder row".to_string(),
        ));
    }
    let m = signs[0].len();
    if m == 0 {
        return Err(BoundError::InvalidParam("empty dataset".to_string()));
    }
    if signs.iter().any(|row| row.len() != m) {
        return Err(BoundError::InvalidParam(
            "sign rows have inconsistent lengths".to_string(),
        ));
    }
    if sigma_draws == 0 {
        return Err(BoundError::InvalidParam(
            "need at least one sigma draw".to_string(),
        ));
    }

    let per_draw: Vec<f64> = (0..sigma_draws)
        .into_par_iter()
        .map(|draw| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(draw as u64);
            let sigma: Vec<i8> = (0..m)
                .map(|_| if rng.random::<bool>() { 1 } else { -1 })
                .collect();
            let best = signs
                .iter()
                .map(|row| {
                    row.iter()
                        .zip(&sigma)
                        .map(|(&a, &s)| (a * s) as i64)
                        .sum::<i64>()
                })
                .max()
                .expect("non-empty");
            best as f64 / m as f64
        })
        .collect();
    Ok(per_draw.iter().sum::<f64>() / sigma_draws as f64)
}

/// The +-1 outputs of one decoder at one bit over a dataset, with the
/// mapping bit 0 -> +1, bit 1 -> -1.
fn output_signs(
    g: &CodeGraph,
    weights: &NbpWeights,
    data: &Dataset,
    bit: usize,
) -> Result<Vec<i8>, BoundError> {
    (0..data.len())
        .map(|j| {
            let trace = forward(data.llr(j), weights, g)
                .map_err(|e| BoundError::InvalidParam(e.to_string()))?;
            let bits = hard_decision(&trace.o);
            Ok(1 - 2 * bits[bit] as i8)
        })
        .collect()
}

/// Lower estimate of the bit-wise Rademacher complexity of the decoder
/// class at output `bit`, over the finite subclass `decoders`.
pub fn estimate_bitwise_rademacher(
    g: &CodeGraph,
    decoders: &[NbpWeights],
    data: &Dataset,
    bit: usize,
    sigma_draws: usize,
    seed: u64,
) -> Result<f64, BoundError> {
    if data.is_empty() {
        return Err(BoundError::InvalidParam("empty dataset".to_string()));
    }
    if bit >= g.n() {
        return Err(BoundError::InvalidParam(format!(
            "bit index {bit} out of range (n = {})",
            g.n()
        )));
    }
    if decoders.is_empty() {
        return Err(BoundError::InvalidParam(
            "need at least one sampled decoder".to_string(),
        ));
    }
    let signs: Vec<Vec<i8>> = decoders
        .iter()
        .map(|w| output_signs(g, w, data, bit))
        .collect::<Result<_, _>>()?;
    rademacher_engine(&signs, sigma_draws, seed)
}

/// Bit-wise estimates for every output bit, sharing one batch of forward
/// passes across bits. Each bit uses its own sign-draw substream.
pub fn estimate_all_bits(
    g: &CodeGraph,
    decoders: &[NbpWeights],
    data: &Dataset,
    sigma_draws: usize,
    seed: u64,
) -> Result<Vec<f64>, BoundError> {
    if data.is_empty() || decoders.is_empty() {
        return Err(BoundError::InvalidParam(
            "need a non-empty dataset and decoder class".to_string(),
        ));
    }
    // all hard decisions, one pass per (decoder, sample)
    let all_bits: Vec<Vec<Vec<u8>>> = decoders
        .par_iter()
        .map(|w| {
            (0..data.len())
                .map(|j| {
                    let trace = forward(data.llr(j), w, g)
                        .map_err(|e| BoundError::InvalidParam(e.to_string()))?;
                    Ok(hard_decision(&trace.o))
                })
                .collect::<Result<Vec<_>, BoundError>>()
        })
        .collect::<Result<_, _>>()?;

    (0..g.n())
        .map(|bit| {
            let signs: Vec<Vec<i8>> = all_bits
                .iter()
                .map(|per_decoder| {
                    per_decoder
                        .iter()
                        .map(|word| 1 - 2 * word[bit] as i8)
                        .collect()
                })
                .collect();
            rademacher_engine(&signs, sigma_draws, seed.wrapping_add(bit as u64))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{generate_dataset, NoiseSpec};
    use crate::code_graph::hamming_7_4;
    use crate::decoder::{sample_weight_class, CheckMode};

    #[test]
    fn single_function_class_centers_on_zero() {
        let m = 4000;
        let signs = vec![vec![1i8; m]];
        let est = rademacher_engine(&signs, 400, 9).unwrap();
        // E[sigma bar] = 0 with sd 1/sqrt(draws * m)
        assert!(est.abs() < 4.0 / ((400.0 * m as f64).sqrt()) * 10.0, "{est}");
    }

    #[test]
    fn engine_is_deterministic() {
        let signs = vec![vec![1i8; 500], vec![-1i8; 500]];
        let a = rademacher_engine(&signs, 200, 4).unwrap();
        let b = rademacher_engine(&signs, 200, 4).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn two_constant_decoders_match_mean_absolute_deviation() {
        let m = 10_000;
        let signs = vec![vec![1i8; m], vec![-1i8; m]];
        let est = rademacher_engine(&signs, 2000, 11).unwrap();
        let expected = (2.0 / (std::f64::consts::PI * m as f64)).sqrt();
        assert!(
            (est - expected).abs() / expected < 0.10,
            "estimate {est} vs {expected}"
        );
    }

    #[test]
    fn estimates_shrink_with_dataset_size() {
        // sqrt(2/(pi m)) scaling of the two-constant class
        let mut previous = f64::INFINITY;
        for m in [100usize, 1000, 10_000] {
            let signs = vec![vec![1i8; m], vec![-1i8; m]];
            let est = rademacher_engine(&signs, 500, 7).unwrap();
            assert!(est < previous, "estimate at m={m} did not shrink: {est}");
            previous = est;
        }
    }

    #[test]
    fn engine_rejects_bad_shapes() {
        assert!(rademacher_engine(&[], 10, 0).is_err());
        assert!(rademacher_engine(&[vec![]], 10, 0).is_err());
        assert!(rademacher_engine(&[vec![1], vec![1, -1]], 10, 0).is_err());
        assert!(rademacher_engine(&[vec![1]], 0, 0).is_err());
    }

    #[test]
    fn nbp_pipeline_produces_estimates_for_every_bit() {
        let g = hamming_7_4();
        let data = generate_dataset(&g, 60, NoiseSpec::Beta(1.0), 5, None).unwrap();
        let class = sample_weight_class(&g, 2, CheckMode::MinSum, 1.0, 4, 13).unwrap();
        let ests = estimate_all_bits(&g, &class, &data, 100, 21).unwrap();
        assert_eq!(ests.len(), 7);
        let single = estimate_bitwise_rademacher(&g, &class, &data, 3, 100, 21).unwrap();
        assert!(single.is_finite());
        // plugs into the aggregate bound without shape errors
        let bound = super::super::proposition1_rhs(&ests, 7, 60.0, 0.05, false).unwrap();
        assert!(bound.is_finite() && bound > 0.0);
    }
}
