//! Data-driven weight learning for the NBP decoder: cross-entropy loss,
//! exact reverse-mode differentiation through the structured layers
//! (min-sum subgradients routed to the recorded argmin edge), Adam with
//! projection onto the weight bound, and train/test gap measurement.

use crate::channel::{generate_dataset, ChannelError, Dataset, NoiseSpec, TEST_SEED_SALT};
use crate::code_graph::CodeGraph;
use crate::decoder::{
    forward, hard_decision, init_weights, CheckMode, DecoderError, ForwardTrace, NbpWeights,
    WeightInit, WeightTensors,
};
use crate::stats::{log1pexp, quartiles};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("dataset is empty")]
    EmptyDataset,
    #[error(transparent)]
    Decoder(#[from] DecoderError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
}

/// Training and gap-measurement configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub max_epochs: usize,
    pub batch_size: usize,
    /// Convergence: stop after `patience` epochs without the epoch-mean loss
    /// improving by more than `tolerance`.
    pub patience: usize,
    pub tolerance: f64,
    pub seed: u64,
    pub w_bound: Option<f64>,
    pub mode: CheckMode,
    pub t_iters: usize,
    pub init: WeightInit,
    pub noise: NoiseSpec,
    pub m_train: usize,
    pub test_size: usize,
    pub trials: usize,
    pub b_lambda: Option<f64>,
    pub parallel_trials: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.01,
            max_epochs: 200,
            batch_size: 128,
            patience: 10,
            tolerance: 1e-4,
            seed: 0,
            w_bound: None,
            mode: CheckMode::MinSum,
            t_iters: 3,
            init: WeightInit::AllOne,
            noise: NoiseSpec::SnrDb(2.0),
            m_train: 1000,
            test_size: 100_000,
            trials: 10,
            b_lambda: None,
            parallel_trials: true,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TrainHistory {
    pub epoch_loss: Vec<f64>,
    pub epochs_run: usize,
    pub converged: bool,
    pub final_loss: f64,
}

/// One trial of the gap experiment.
#[derive(Debug, Clone, Serialize)]
pub struct TrialRow {
    pub trial: usize,
    pub m: usize,
    pub t_iters: usize,
    pub beta: f64,
    pub train_ber: f64,
    pub test_ber: f64,
    pub gap: f64,
    /// `gap / train_ber`; undefined (and flagged) when the train BER is zero.
    pub normalized_gap: Option<f64>,
    pub epochs: usize,
    pub final_loss: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GapReport {
    pub rows: Vec<TrialRow>,
    pub beta: f64,
    /// (q1, median, q3) of the per-trial gap.
    pub gap_quartiles: (f64, f64, f64),
    /// Quartiles of the normalized gap over the trials where it is defined.
    pub normalized_gap_quartiles: Option<(f64, f64, f64)>,
    pub median_train_ber: f64,
    pub median_test_ber: f64,
    /// Trials whose train BER was zero, leaving the normalized gap undefined.
    pub undefined_normalized: usize,
}

/// Cross-entropy of soft outputs against a codeword, under the convention
/// that `o[l]` is the belief that bit `l` is 0:
/// `-(1/n) sum (1-x) ln(o) + x ln(1-o)`.
pub fn cross_entropy(o: &[f64], x: &[u8]) -> f64 {
    assert_eq!(o.len(), x.len());
    let n = o.len() as f64;
    let mut total = 0.0;
    for (&ol, &xl) in o.iter().zip(x) {
        // sigmoid outputs can round to exactly 0 or 1 in f64; clamp so the
        // logs stay finite
        let ol = ol.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0);
        total += if xl == 0 { ol.ln() } else { (1.0 - ol).ln() };
    }
    -total / n
}

/// The same cross-entropy computed from pre-sigmoid outputs, stable for any
/// magnitude of `u`.
pub fn cross_entropy_from_logits(u: &[f64], x: &[u8]) -> f64 {
    assert_eq!(u.len(), x.len());
    let n = u.len() as f64;
    let total: f64 = u
        .iter()
        .zip(x)
        .map(|(&ul, &xl)| if xl == 0 { log1pexp(-ul) } else { log1pexp(ul) })
        .sum();
    total / n
}

#[allow(clippy::needless_range_loop)] // l indexes llr, o and the weight rows in parallel
/// Exact gradients of the per-sample cross-entropy with respect to every
/// stored weight, accumulated into `grads` (which must have the same shape).
///
/// Min-sum layers are differentiated with the sign factors held constant and
/// the magnitude gradient routed to the recorded argmin edge; the tanh layer
/// is differentiated analytically with zero gradient past the numeric clamp.
/// The forward-only scale/offset vectors receive no gradient.
pub fn backward_into(
    trace: &ForwardTrace,
    weights: &NbpWeights,
    g: &CodeGraph,
    x: &[u8],
    grads: &mut WeightTensors,
) -> Result<(), TrainError> {
    let n = g.n();
    if x.len() != n || trace.llr.len() != n {
        return Err(TrainError::Dimension(format!(
            "codeword/llr length does not match n = {n}"
        )));
    }
    let t_iters = weights.t_iters();
    if trace.v.len() != t_iters {
        return Err(TrainError::Dimension(format!(
            "trace has {} iterations, weights expect {t_iters}",
            trace.v.len()
        )));
    }
    let e_count = g.theta();
    let llr = &trace.llr;

    // output layer: dCE/du = (o - target)/n with target = 1 iff bit 0
    let mut dp = vec![0.0; e_count];
    let p_last = &trace.p[t_iters - 1];
    for l in 0..n {
        let target = 1.0 - x[l] as f64;
        let du = (trace.o[l] - target) / n as f64;
        grads.w4[l] += du * llr[l];
        for &e in g.var_edges(l) {
            grads.w3[e] += du * p_last[e];
            dp[e] = du * weights.tensors.w3[e];
        }
    }

    let mut dv = vec![0.0; e_count];
    for t in (1..=t_iters).rev() {
        // check layer: dv from dp
        dv.fill(0.0);
        if weights.mode() == CheckMode::Tanh {
            tanh_check_backward(g, &trace.v[t - 1], &dp, &mut dv);
        } else {
            let route = &trace.route[t - 1];
            let coeff = &trace.route_coeff[t - 1];
            for e in 0..e_count {
                let c = coeff[e] * dp[e];
                if c != 0.0 {
                    dv[route[e] as usize] += c;
                }
            }
        }

        // variable layer: weight grads plus dp for the previous iteration
        let w1_base = (t - 1) * e_count;
        let w2_base = (t - 1) * weights.theta2();
        let p_prev = if t >= 2 { Some(&trace.p[t - 2]) } else { None };
        dp.fill(0.0);
        for l in 0..n {
            let edges = g.var_edges(l);
            for (pos, &e) in edges.iter().enumerate() {
                let d = dv[e];
                if d == 0.0 {
                    continue;
                }
                grads.w1[w1_base + e] += d * llr[l];
                let mut r = w2_base + weights.w2_offset(e);
                for (q, &e2) in edges.iter().enumerate() {
                    if q == pos {
                        continue;
                    }
                    if let Some(p) = p_prev {
                        grads.w2[r] += d * p[e2];
                        dp[e2] += d * weights.tensors.w2[r];
                    }
                    // t = 1 feeds on the zero vector: w2 gradient vanishes
                    r += 1;
                }
            }
        }
    }
    Ok(())
}

/// Convenience wrapper returning a fresh gradient set.
pub fn backward(
    trace: &ForwardTrace,
    weights: &NbpWeights,
    g: &CodeGraph,
    x: &[u8],
) -> Result<WeightTensors, TrainError> {
    let mut grads = WeightTensors::zeros_like(&weights.tensors);
    backward_into(trace, weights, g, x, &mut grads)?;
    Ok(grads)
}

fn tanh_check_backward(g: &CodeGraph, v: &[f64], dp: &[f64], dv: &mut [f64]) {
    const LIMIT: f64 = 1.0 - 1e-12;
    for c in 0..g.num_checks() {
        let edges = g.check_edges(c);
        let d = edges.len();
        if d < 2 {
            continue;
        }
        let ts: Vec<f64> = edges.iter().map(|&e| (v[e] * 0.5).tanh()).collect();
        for (i, &e) in edges.iter().enumerate() {
            if dp[e] == 0.0 {
                continue;
            }
            // product over the exclusion set of e
            let mut prod = 1.0;
            for (j, &tj) in ts.iter().enumerate() {
                if j != i {
                    prod *= tj;
                }
            }
            if prod.abs() >= LIMIT {
                continue; // clamped in the forward pass: saturated
            }
            let scale = 2.0 / (1.0 - prod * prod) * dp[e];
            // leave-one-out products over the exclusion set
            let sub: Vec<(usize, f64)> = (0..d).filter(|&j| j != i).map(|j| (j, ts[j])).collect();
            let k = sub.len();
            let mut pre = vec![1.0; k + 1];
            for (idx, &(_, tj)) in sub.iter().enumerate() {
                pre[idx + 1] = pre[idx] * tj;
            }
            let mut suf = vec![1.0; k + 1];
            for idx in (0..k).rev() {
                suf[idx] = suf[idx + 1] * sub[idx].1;
            }
            for (idx, &(j, tj)) in sub.iter().enumerate() {
                let loo = pre[idx] * suf[idx + 1];
                // d tanh(v/2)/dv = (1 - tanh^2)/2
                dv[edges[j]] += scale * loo * 0.5 * (1.0 - tj * tj);
            }
        }
    }
}

/// Central difference `(f(x+h) - f(x-h)) / 2h`.
pub fn central_diff(mut f: impl FnMut(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// Per-sample loss used by the gradient oracle.
pub fn sample_loss(
    weights: &NbpWeights,
    g: &CodeGraph,
    llr: &[f64],
    x: &[u8],
) -> Result<f64, TrainError> {
    let trace = forward(llr, weights, g)?;
    Ok(cross_entropy_from_logits(&trace.u, x))
}

/// Central finite differences of the per-sample cross-entropy over every
/// stored weight. Independent oracle for [`backward`].
pub fn finite_diff_grad(
    weights: &NbpWeights,
    g: &CodeGraph,
    llr: &[f64],
    x: &[u8],
    h: f64,
) -> Result<WeightTensors, TrainError> {
    let mut probe = weights.clone();
    let mut grads = WeightTensors::zeros_like(&weights.tensors);
    let count = probe.tensors.len();
    for idx in 0..count {
        let orig = tensor_get(&probe.tensors, idx);
        let deriv = {
            let probe_ref = &mut probe;
            let mut eval = |w: f64| -> f64 {
                tensor_set(&mut probe_ref.tensors, idx, w);
                sample_loss(probe_ref, g, llr, x).expect("shapes fixed")
            };
            central_diff(&mut eval, orig, h)
        };
        tensor_set(&mut probe.tensors, idx, orig);
        tensor_set(&mut grads, idx, deriv);
    }
    Ok(grads)
}

fn tensor_get(t: &WeightTensors, idx: usize) -> f64 {
    let (a, b, c) = (t.w1.len(), t.w2.len(), t.w3.len());
    if idx < a {
        t.w1[idx]
    } else if idx < a + b {
        t.w2[idx - a]
    } else if idx < a + b + c {
        t.w3[idx - a - b]
    } else {
        t.w4[idx - a - b - c]
    }
}

fn tensor_set(t: &mut WeightTensors, idx: usize, value: f64) {
    let (a, b, c) = (t.w1.len(), t.w2.len(), t.w3.len());
    if idx < a {
        t.w1[idx] = value;
    } else if idx < a + b {
        t.w2[idx - a] = value;
    } else if idx < a + b + c {
        t.w3[idx - a - b] = value;
    } else {
        t.w4[idx - a - b - c] = value;
    }
}

/// The smallest gap between consecutive order statistics of |v| within any
/// check's incoming messages, over all iterations. Finite-difference checks
/// of min-sum gradients are only meaningful when this margin comfortably
/// exceeds the probe step.
pub fn minsum_tie_margin(trace: &ForwardTrace, g: &CodeGraph) -> f64 {
    let mut margin = f64::INFINITY;
    for v in &trace.v {
        for c in 0..g.num_checks() {
            let mut mags: Vec<f64> = g.check_edges(c).iter().map(|&e| v[e].abs()).collect();
            if mags.len() < 2 {
                continue;
            }
            mags.sort_by(|a, b| a.partial_cmp(b).unwrap());
            for w in mags.windows(2) {
                margin = margin.min(w[1] - w[0]);
            }
        }
    }
    margin
}

/// Adam optimizer state (first/second moment estimates plus step counter).
#[derive(Debug, Clone)]
pub struct AdamState {
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    step: u64,
    m: WeightTensors,
    v: WeightTensors,
}

impl AdamState {
    pub fn new(like: &WeightTensors) -> Self {
        AdamState {
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            step: 0,
            m: WeightTensors::zeros_like(like),
            v: WeightTensors::zeros_like(like),
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }
}

#[allow(clippy::too_many_arguments)]
fn adam_slice(
    w: &mut [f64],
    g: &[f64],
    m: &mut [f64],
    v: &mut [f64],
    lr: f64,
    b1: f64,
    b2: f64,
    eps: f64,
    b1_corr: f64,
    b2_corr: f64,
) {
    for i in 0..w.len() {
        m[i] = b1 * m[i] + (1.0 - b1) * g[i];
        v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
        let m_hat = m[i] / b1_corr;
        let v_hat = v[i] / b2_corr;
        w[i] -= lr * m_hat / (v_hat.sqrt() + eps);
    }
}

/// One bias-corrected Adam update, followed by projection onto
/// `[-w_bound, w_bound]` when the weights carry a bound.
pub fn adam_step(
    weights: &mut NbpWeights,
    grads: &WeightTensors,
    state: &mut AdamState,
    learning_rate: f64,
) {
    state.step += 1;
    let b1_corr = 1.0 - state.beta1.powi(state.step as i32);
    let b2_corr = 1.0 - state.beta2.powi(state.step as i32);
    let t = &mut weights.tensors;
    adam_slice(&mut t.w1, &grads.w1, &mut state.m.w1, &mut state.v.w1, learning_rate, state.beta1, state.beta2, state.epsilon, b1_corr, b2_corr);
    adam_slice(&mut t.w2, &grads.w2, &mut state.m.w2, &mut state.v.w2, learning_rate, state.beta1, state.beta2, state.epsilon, b1_corr, b2_corr);
    adam_slice(&mut t.w3, &grads.w3, &mut state.m.w3, &mut state.v.w3, learning_rate, state.beta1, state.beta2, state.epsilon, b1_corr, b2_corr);
    adam_slice(&mut t.w4, &grads.w4, &mut state.m.w4, &mut state.v.w4, learning_rate, state.beta1, state.beta2, state.epsilon, b1_corr, b2_corr);
    weights.project();
}

/// Mini-batch training until convergence (no epoch-mean-loss improvement
/// beyond `tolerance` for `patience` epochs) or `max_epochs`. Deterministic
/// given the config seed; shuffling uses a dedicated substream.
pub fn train(
    g: &CodeGraph,
    dataset: &Dataset,
    cfg: &TrainConfig,
) -> Result<(NbpWeights, TrainHistory), TrainError> {
    if dataset.is_empty() {
        return Err(TrainError::EmptyDataset);
    }
    if dataset.n() != g.n() {
        return Err(TrainError::Dimension(format!(
            "dataset blocklength {} does not match code n = {}",
            dataset.n(),
            g.n()
        )));
    }
    let mut weights = init_weights(g, cfg.t_iters, cfg.mode, cfg.init, cfg.w_bound, cfg.seed)?;
    let mut adam = AdamState::new(&weights.tensors);
    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    shuffle_rng.set_stream(u64::MAX - 2);

    let m = dataset.len();
    let mut order: Vec<usize> = (0..m).collect();
    let batch_size = cfg.batch_size.max(1);
    let mut history = TrainHistory {
        epoch_loss: Vec::new(),
        epochs_run: 0,
        converged: false,
        final_loss: f64::NAN,
    };
    let mut best = f64::INFINITY;
    let mut stale = 0usize;
    let mut grads = WeightTensors::zeros_like(&weights.tensors);

    for _epoch in 0..cfg.max_epochs {
        order.shuffle(&mut shuffle_rng);
        let mut loss_sum = 0.0;
        for batch in order.chunks(batch_size) {
            grads.fill(0.0);
            for &j in batch {
                let trace = forward(dataset.llr(j), &weights, g)?;
                loss_sum += cross_entropy_from_logits(&trace.u, dataset.codeword(j));
                backward_into(&trace, &weights, g, dataset.codeword(j), &mut grads)?;
            }
            grads.scale(1.0 / batch.len() as f64);
            adam_step(&mut weights, &grads, &mut adam, cfg.learning_rate);
        }
        let epoch_loss = loss_sum / m as f64;
        history.epoch_loss.push(epoch_loss);
        history.epochs_run += 1;
        if best - epoch_loss > cfg.tolerance {
            best = epoch_loss;
            stale = 0;
        } else {
            stale += 1;
            if stale >= cfg.patience {
                history.converged = true;
                break;
            }
        }
    }
    history.final_loss = *history.epoch_loss.last().unwrap();
    Ok((weights, history))
}

/// Empirical BER: mean BER loss of hard decisions over the dataset. Error
/// counting is integer, so the parallel reduction is exact in any order.
pub fn evaluate(weights: &NbpWeights, g: &CodeGraph, dataset: &Dataset) -> Result<f64, TrainError> {
    if dataset.n() != g.n() {
        return Err(TrainError::Dimension(format!(
            "dataset blocklength {} does not match code n = {}",
            dataset.n(),
            g.n()
        )));
    }
    if dataset.is_empty() {
        return Err(TrainError::EmptyDataset);
    }
    forward(dataset.llr(0), weights, g)?; // surface shape errors once
    let errors: u64 = (0..dataset.len())
        .into_par_iter()
        .map(|j| {
            let trace = forward(dataset.llr(j), weights, g).expect("shapes validated");
            let xhat = hard_decision(&trace.o);
            xhat.iter()
                .zip(dataset.codeword(j))
                .filter(|(a, b)| a != b)
                .count() as u64
        })
        .sum();
    Ok(errors as f64 / (dataset.len() * g.n()) as f64)
}

/// Run the full gap experiment: per trial, a fresh training set seeded by
/// `seed + trial`, one shared test set on an independent salted seed, train,
/// and record train/test BER and their gap. Trials are independent, so the
/// parallel schedule cannot change any row.
pub fn run_gap_trials(g: &CodeGraph, cfg: &TrainConfig) -> Result<GapReport, TrainError> {
    let beta = cfg.noise.resolve(g)?;
    let test_set = generate_dataset(
        g,
        cfg.test_size,
        NoiseSpec::Beta(beta),
        cfg.seed ^ TEST_SEED_SALT,
        cfg.b_lambda,
    )?;

    let run_one = |trial: usize| -> Result<TrialRow, TrainError> {
        let trial_seed = cfg.seed.wrapping_add(trial as u64);
        let train_set = generate_dataset(
            g,
            cfg.m_train,
            NoiseSpec::Beta(beta),
            trial_seed,
            cfg.b_lambda,
        )?;
        let mut trial_cfg = cfg.clone();
        trial_cfg.seed = trial_seed;
        let (weights, history) = train(g, &train_set, &trial_cfg)?;
        let train_ber = evaluate(&weights, g, &train_set)?;
        let test_ber = evaluate(&weights, g, &test_set)?;
        let gap = test_ber - train_ber;
        Ok(TrialRow {
            trial,
            m: cfg.m_train,
            t_iters: cfg.t_iters,
            beta,
            train_ber,
            test_ber,
            gap,
            normalized_gap: (train_ber > 0.0).then(|| gap / train_ber),
            epochs: history.epochs_run,
            final_loss: history.final_loss,
        })
    };

    let rows: Vec<TrialRow> = if cfg.parallel_trials {
        (0..cfg.trials)
            .into_par_iter()
            .map(run_one)
            .collect::<Result<_, _>>()?
    } else {
        (0..cfg.trials).map(run_one).collect::<Result<_, _>>()?
    };

    let gaps: Vec<f64> = rows.iter().map(|r| r.gap).collect();
    let normalized: Vec<f64> = rows.iter().filter_map(|r| r.normalized_gap).collect();
    let train_bers: Vec<f64> = rows.iter().map(|r| r.train_ber).collect();
    let test_bers: Vec<f64> = rows.iter().map(|r| r.test_ber).collect();
    Ok(GapReport {
        beta,
        gap_quartiles: quartiles(&gaps),
        normalized_gap_quartiles: if normalized.is_empty() {
            None
        } else {
            Some(quartiles(&normalized))
        },
        median_train_ber: crate::stats::median(&train_bers),
        median_test_ber: crate::stats::median(&test_bers),
        undefined_normalized: rows.len() - normalized.len(),
        rows,
    })
}
