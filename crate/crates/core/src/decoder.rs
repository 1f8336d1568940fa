//! The neural belief propagation decoder: an unrolled message-passing
//! network on the Tanner graph whose edges carry trainable multiplicative
//! weights.
//!
//! One decoding iteration is a variable layer followed by a parity-check
//! layer, both of width `theta` (one hidden unit per edge). With all weights
//! set to one the network reproduces classical belief propagation exactly:
//! the sum-product rule in [`CheckMode::Tanh`], the min-sum approximation in
//! [`CheckMode::MinSum`]. Weight tensors are stored flat and edge-indexed in
//! the canonical `(variable, check)` order fixed by [`CodeGraph`]:
//!
//! - `w1[t][e]` scales the channel LLR feeding edge `e` in iteration `t`;
//! - `w2[t][e][r]` scales the `r`-th other incoming check message at the
//!   same variable (so each edge has `d_v - 1` of them);
//! - `w3[e]` and `w4[l]` form the output layer.

use crate::code_graph::CodeGraph;
use crate::stats::sigmoid;
use serde::{Deserialize, Serialize};
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;
use thiserror::Error;

/// Guard against the sum-product singularity at tanh-product magnitude 1.
const TANH_PRODUCT_LIMIT: f64 = 1.0 - 1e-12;

#[derive(Debug, Error)]
pub enum DecoderError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("checkpoint does not match code: {0}")]
    CodeMismatch(String),
    #[error("checkpoint format error: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Parity-check layer variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CheckMode {
    /// Sum-product rule `2 atanh(prod tanh(v/2))`.
    Tanh,
    /// Sign product times minimum magnitude.
    MinSum,
    /// Min-sum scaled by a per-edge, per-iteration factor.
    ScaledMinSum,
    /// Min-sum with a per-edge, per-iteration offset under a ReLU.
    OffsetMinSum,
}

impl CheckMode {
    pub fn uses_beta(self) -> bool {
        matches!(self, CheckMode::ScaledMinSum | CheckMode::OffsetMinSum)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CheckMode::Tanh => "tanh",
            CheckMode::MinSum => "minsum",
            CheckMode::ScaledMinSum => "scaled-minsum",
            CheckMode::OffsetMinSum => "offset-minsum",
        }
    }
}

impl std::fmt::Display for CheckMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CheckMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tanh" => Ok(CheckMode::Tanh),
            "minsum" => Ok(CheckMode::MinSum),
            "scaled-minsum" => Ok(CheckMode::ScaledMinSum),
            "offset-minsum" => Ok(CheckMode::OffsetMinSum),
            other => Err(format!(
                "unknown check mode {other:?} (expected tanh, minsum, scaled-minsum, offset-minsum)"
            )),
        }
    }
}

/// Flat storage for the four trainable weight families. Gradients and Adam
/// moments reuse the same shape.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightTensors {
    pub w1: Vec<f64>, // T * theta
    pub w2: Vec<f64>, // T * theta2, theta2 = sum_l d_l (d_l - 1)
    pub w3: Vec<f64>, // theta
    pub w4: Vec<f64>, // n
}

impl WeightTensors {
    pub fn zeros_like(other: &WeightTensors) -> Self {
        WeightTensors {
            w1: vec![0.0; other.w1.len()],
            w2: vec![0.0; other.w2.len()],
            w3: vec![0.0; other.w3.len()],
            w4: vec![0.0; other.w4.len()],
        }
    }

    pub fn fill(&mut self, value: f64) {
        self.w1.fill(value);
        self.w2.fill(value);
        self.w3.fill(value);
        self.w4.fill(value);
    }

    pub fn len(&self) -> usize {
        self.w1.len() + self.w2.len() + self.w3.len() + self.w4.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Visit every stored weight in the documented checkpoint order.
    pub fn for_each_mut(&mut self, mut f: impl FnMut(&mut f64)) {
        for x in self
            .w1
            .iter_mut()
            .chain(self.w2.iter_mut())
            .chain(self.w3.iter_mut())
            .chain(self.w4.iter_mut())
        {
            f(x);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = &f64> {
        self.w1
            .iter()
            .chain(self.w2.iter())
            .chain(self.w3.iter())
            .chain(self.w4.iter())
    }

    pub fn max_abs(&self) -> f64 {
        self.iter().fold(0.0, |a, &b| a.max(b.abs()))
    }

    pub fn scale(&mut self, factor: f64) {
        self.for_each_mut(|x| *x *= factor);
    }

    pub fn add_assign(&mut self, other: &WeightTensors) {
        for (a, b) in self.w1.iter_mut().zip(&other.w1) {
            *a += b;
        }
        for (a, b) in self.w2.iter_mut().zip(&other.w2) {
            *a += b;
        }
        for (a, b) in self.w3.iter_mut().zip(&other.w3) {
            *a += b;
        }
        for (a, b) in self.w4.iter_mut().zip(&other.w4) {
            *a += b;
        }
    }
}

/// Trainable decoder parameters bound to a specific code.
#[derive(Debug, Clone, PartialEq)]
pub struct NbpWeights {
    pub tensors: WeightTensors,
    /// Scale (scaled-minsum) or offset (offset-minsum) vector, `T * theta`,
    /// forward-only: present iff the mode uses it, never trained.
    pub beta_t: Option<Vec<f64>>,
    t_iters: usize,
    mode: CheckMode,
    w_bound: Option<f64>,
    n: usize,
    edge_count: usize,
    theta2: usize,
    /// Prefix offsets of each edge's `w2` block within one iteration slice.
    w2_off: Vec<usize>,
}

impl NbpWeights {
    pub fn t_iters(&self) -> usize {
        self.t_iters
    }

    pub fn mode(&self) -> CheckMode {
        self.mode
    }

    pub fn w_bound(&self) -> Option<f64> {
        self.w_bound
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn theta2(&self) -> usize {
        self.theta2
    }

    pub fn w2_offset(&self, edge: usize) -> usize {
        self.w2_off[edge]
    }

    /// Clamp every stored weight into `[-w_bound, w_bound]` when a bound is
    /// set.
    pub fn project(&mut self) {
        if let Some(b) = self.w_bound {
            self.tensors.for_each_mut(|x| *x = x.clamp(-b, b));
        }
    }

    /// Round every weight through f32, the checkpoint storage precision.
    pub fn round_to_f32(&mut self) {
        self.tensors.for_each_mut(|x| *x = *x as f32 as f64);
        if let Some(beta) = &mut self.beta_t {
            for x in beta.iter_mut() {
                *x = *x as f32 as f64;
            }
        }
    }

    fn beta_slice(&self, t: usize) -> Option<&[f64]> {
        self.beta_t
            .as_ref()
            .map(|b| &b[(t - 1) * self.edge_count..t * self.edge_count])
    }
}

/// Weight initialization scheme.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum WeightInit {
    /// Everything 1.0: the classical BP decoder.
    AllOne,
    /// Uniform in `[1 - spread, 1 + spread]`.
    Uniform { spread: f64 },
}

fn layout(g: &CodeGraph) -> (usize, Vec<usize>) {
    let mut off = Vec::with_capacity(g.theta() + 1);
    let mut acc = 0usize;
    for e in 0..g.theta() {
        off.push(acc);
        let (v, _) = g.edge(e);
        acc += g.var_edges(v).len() - 1;
    }
    off.push(acc);
    (acc, off)
}

fn neutral_beta(mode: CheckMode, t_iters: usize, edges: usize) -> Option<Vec<f64>> {
    match mode {
        CheckMode::ScaledMinSum => Some(vec![1.0; t_iters * edges]),
        CheckMode::OffsetMinSum => Some(vec![0.0; t_iters * edges]),
        _ => None,
    }
}

/// Create weights for `t_iters` decoding iterations with the sparsity
/// pattern of `g`. The all-one initialization reproduces classical BP; the
/// scaled/offset vectors start neutral (1 / 0).
pub fn init_weights(
    g: &CodeGraph,
    t_iters: usize,
    mode: CheckMode,
    init: WeightInit,
    w_bound: Option<f64>,
    seed: u64,
) -> Result<NbpWeights, DecoderError> {
    if t_iters == 0 {
        return Err(DecoderError::InvalidParam(
            "decoding iteration count must be at least 1".to_string(),
        ));
    }
    if let Some(b) = w_bound {
        if b < 0.0 {
            return Err(DecoderError::InvalidParam(format!(
                "weight bound must be non-negative, got {b}"
            )));
        }
    }
    let e = g.theta();
    let (theta2, w2_off) = layout(g);
    let mut tensors = WeightTensors {
        w1: vec![1.0; t_iters * e],
        w2: vec![1.0; t_iters * theta2],
        w3: vec![1.0; e],
        w4: vec![1.0; g.n()],
    };
    if let WeightInit::Uniform { spread } = init {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(u64::MAX - 1);
        tensors.for_each_mut(|x| *x = rng.random_range(1.0 - spread..=1.0 + spread));
    }
    let mut weights = NbpWeights {
        tensors,
        beta_t: neutral_beta(mode, t_iters, e),
        t_iters,
        mode,
        w_bound,
        n: g.n(),
        edge_count: e,
        theta2,
        w2_off,
    };
    weights.project();
    Ok(weights)
}

/// Draw `count` weight realizations uniformly in `[-w, w]`, one substream
/// per realization. Used to sample a finite subclass of the bounded-weight
/// decoder family.
pub fn sample_weight_class(
    g: &CodeGraph,
    t_iters: usize,
    mode: CheckMode,
    w: f64,
    count: usize,
    seed: u64,
) -> Result<Vec<NbpWeights>, DecoderError> {
    use rand::{Rng, SeedableRng};
    if w <= 0.0 {
        return Err(DecoderError::InvalidParam(format!(
            "weight bound must be positive, got {w}"
        )));
    }
    (0..count)
        .map(|k| {
            let mut base = init_weights(g, t_iters, mode, WeightInit::AllOne, Some(w), seed)?;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(u64::MAX - 4 - k as u64);
            base.tensors.for_each_mut(|x| *x = rng.random_range(-w..=w));
            Ok(base)
        })
        .collect()
}

/// Intermediate values of one forward pass, retained for backpropagation and
/// norm checks.
#[derive(Debug, Clone)]
pub struct ForwardTrace {
    /// Input LLRs.
    pub llr: Vec<f64>,
    /// Variable-layer outputs per iteration, edge-indexed.
    pub v: Vec<Vec<f64>>,
    /// Check-layer outputs per iteration, edge-indexed.
    pub p: Vec<Vec<f64>>,
    /// Pre-sigmoid outputs.
    pub u: Vec<f64>,
    /// Sigmoid outputs, the soft belief that each bit is 0.
    pub o: Vec<f64>,
    /// Min-sum only: for each (iteration, edge), the edge whose magnitude
    /// realised the exclusion-set minimum.
    pub(crate) route: Vec<Vec<u32>>,
    /// Min-sum only: `d p[e] / d v[route[e]]`.
    pub(crate) route_coeff: Vec<Vec<f64>>,
}

#[inline]
fn sign_of(x: f64) -> f64 {
    if x < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// One variable layer: `v_t[{l,m}] = w1[t] * llr[l] + sum over the other
/// edges of `l` of `w2[t] * p_prev`. With `t = 1` the previous check
/// messages are all zero.
pub fn variable_layer(
    llr: &[f64],
    p_prev: &[f64],
    weights: &NbpWeights,
    g: &CodeGraph,
    t: usize,
) -> Result<Vec<f64>, DecoderError> {
    check_dims(llr, weights, g)?;
    if p_prev.len() != g.theta() {
        return Err(DecoderError::Dimension(format!(
            "p_prev has {} entries, expected {}",
            p_prev.len(),
            g.theta()
        )));
    }
    if t == 0 || t > weights.t_iters {
        return Err(DecoderError::InvalidParam(format!(
            "iteration {t} outside 1..={}",
            weights.t_iters
        )));
    }
    let mut v = vec![0.0; g.theta()];
    variable_layer_into(llr, p_prev, weights, g, t, &mut v);
    Ok(v)
}

#[allow(clippy::needless_range_loop)] // l indexes llr and the adjacency in parallel
fn variable_layer_into(
    llr: &[f64],
    p_prev: &[f64],
    weights: &NbpWeights,
    g: &CodeGraph,
    t: usize,
    v: &mut [f64],
) {
    let e_count = weights.edge_count;
    let w1 = &weights.tensors.w1[(t - 1) * e_count..t * e_count];
    let w2 = &weights.tensors.w2[(t - 1) * weights.theta2..t * weights.theta2];
    for l in 0..g.n() {
        let edges = g.var_edges(l);
        for (pos, &e) in edges.iter().enumerate() {
            let mut acc = w1[e] * llr[l];
            let mut r = weights.w2_off[e];
            for (q, &e2) in edges.iter().enumerate() {
                if q == pos {
                    continue;
                }
                acc += w2[r] * p_prev[e2];
                r += 1;
            }
            v[e] = acc;
        }
    }
}

/// One parity-check layer applied to edge-indexed messages `v`.
///
/// `beta_t` must be present iff the mode is scaled/offset min-sum. A check
/// of degree one has an empty exclusion set and sends 0 (no extrinsic
/// information) in every mode.
pub fn check_layer(
    v: &[f64],
    g: &CodeGraph,
    mode: CheckMode,
    beta_t: Option<&[f64]>,
) -> Result<Vec<f64>, DecoderError> {
    if v.len() != g.theta() {
        return Err(DecoderError::Dimension(format!(
            "v has {} entries, expected {}",
            v.len(),
            g.theta()
        )));
    }
    match (mode.uses_beta(), beta_t) {
        (true, None) => {
            return Err(DecoderError::InvalidParam(format!(
                "mode {mode} requires a beta vector"
            )))
        }
        (false, Some(_)) => {
            return Err(DecoderError::InvalidParam(format!(
                "mode {mode} does not take a beta vector"
            )))
        }
        _ => {}
    }
    if let Some(b) = beta_t {
        if b.len() != g.theta() {
            return Err(DecoderError::Dimension(format!(
                "beta has {} entries, expected {}",
                b.len(),
                g.theta()
            )));
        }
    }
    let mut p = vec![0.0; v.len()];
    check_layer_into(v, g, mode, beta_t, &mut p, None, None);
    Ok(p)
}

fn check_layer_into(
    v: &[f64],
    g: &CodeGraph,
    mode: CheckMode,
    beta_t: Option<&[f64]>,
    p: &mut [f64],
    mut route: Option<&mut [u32]>,
    mut coeff: Option<&mut [f64]>,
) {
    for c in 0..g.num_checks() {
        let edges = g.check_edges(c);
        if edges.is_empty() {
            continue;
        }
        if edges.len() == 1 {
            let e = edges[0];
            p[e] = 0.0;
            if let Some(r) = route.as_deref_mut() {
                r[e] = e as u32;
            }
            if let Some(cf) = coeff.as_deref_mut() {
                cf[e] = 0.0;
            }
            continue;
        }
        match mode {
            CheckMode::Tanh => {
                let ts: Vec<f64> = edges.iter().map(|&e| (v[e] * 0.5).tanh()).collect();
                let d = ts.len();
                // leave-one-out products via prefix/suffix
                let mut pre = vec![1.0; d + 1];
                for i in 0..d {
                    pre[i + 1] = pre[i] * ts[i];
                }
                let mut suf = vec![1.0; d + 1];
                for i in (0..d).rev() {
                    suf[i] = suf[i + 1] * ts[i];
                }
                for (i, &e) in edges.iter().enumerate() {
                    let prod = pre[i] * suf[i + 1];
                    let clamped = prod.clamp(-TANH_PRODUCT_LIMIT, TANH_PRODUCT_LIMIT);
                    p[e] = 2.0 * clamped.atanh();
                }
            }
            CheckMode::MinSum | CheckMode::ScaledMinSum | CheckMode::OffsetMinSum => {
                let mut sign_all = 1.0f64;
                let mut min1 = f64::INFINITY;
                let mut min1_e = usize::MAX;
                let mut min2 = f64::INFINITY;
                let mut min2_e = usize::MAX;
                // ascending edge id, strict '<': magnitude ties go to the
                // lowest edge id, which is the recorded subgradient route
                for &e in edges {
                    let val = v[e];
                    if val < 0.0 {
                        sign_all = -sign_all;
                    }
                    let mag = val.abs();
                    if mag < min1 {
                        min2 = min1;
                        min2_e = min1_e;
                        min1 = mag;
                        min1_e = e;
                    } else if mag < min2 {
                        min2 = mag;
                        min2_e = e;
                    }
                }
                for &e in edges {
                    let sign_others = sign_all * sign_of(v[e]);
                    let (mag, routed) = if e == min1_e {
                        (min2, min2_e)
                    } else {
                        (min1, min1_e)
                    };
                    let (value, grad) = match mode {
                        CheckMode::MinSum => {
                            (sign_others * mag, sign_others * sign_of(v[routed]))
                        }
                        CheckMode::ScaledMinSum => {
                            let b = beta_t.expect("validated")[e];
                            (b * sign_others * mag, b * sign_others * sign_of(v[routed]))
                        }
                        CheckMode::OffsetMinSum => {
                            let b = beta_t.expect("validated")[e];
                            if mag > b {
                                (sign_others * (mag - b), sign_others * sign_of(v[routed]))
                            } else {
                                (0.0, 0.0)
                            }
                        }
                        CheckMode::Tanh => unreachable!(),
                    };
                    p[e] = value;
                    if let Some(r) = route.as_deref_mut() {
                        r[e] = routed as u32;
                    }
                    if let Some(cf) = coeff.as_deref_mut() {
                        cf[e] = grad;
                    }
                }
            }
        }
    }
}

/// Output layer: `u[l] = w4[l] * llr[l] + sum_e w3[e] * p_last[e]`, then the
/// sigmoid `o = s(u)`, the soft belief that each bit is 0.
pub fn output_layer(
    llr: &[f64],
    p_last: &[f64],
    weights: &NbpWeights,
    g: &CodeGraph,
) -> (Vec<f64>, Vec<f64>) {
    let mut u = vec![0.0; g.n()];
    let mut o = vec![0.0; g.n()];
    output_layer_into(llr, p_last, weights, g, &mut u, &mut o);
    (u, o)
}

#[allow(clippy::needless_range_loop)] // l indexes llr, w4 and u in parallel
fn output_layer_into(
    llr: &[f64],
    p_last: &[f64],
    weights: &NbpWeights,
    g: &CodeGraph,
    u: &mut [f64],
    o: &mut [f64],
) {
    for l in 0..g.n() {
        let mut acc = weights.tensors.w4[l] * llr[l];
        for &e in g.var_edges(l) {
            acc += weights.tensors.w3[e] * p_last[e];
        }
        u[l] = acc;
        o[l] = sigmoid(acc);
    }
}

fn check_dims(llr: &[f64], weights: &NbpWeights, g: &CodeGraph) -> Result<(), DecoderError> {
    if llr.len() != g.n() {
        return Err(DecoderError::Dimension(format!(
            "llr has {} entries, expected n = {}",
            llr.len(),
            g.n()
        )));
    }
    if weights.n != g.n() || weights.edge_count != g.theta() {
        return Err(DecoderError::Dimension(
            "weights were initialized for a different code".to_string(),
        ));
    }
    Ok(())
}

/// Run the full unrolled decoder: `t_iters` variable/check layer pairs
/// followed by the output layer. The trace keeps every intermediate message
/// vector plus the min-sum subgradient bookkeeping.
pub fn forward(
    llr: &[f64],
    weights: &NbpWeights,
    g: &CodeGraph,
) -> Result<ForwardTrace, DecoderError> {
    check_dims(llr, weights, g)?;
    let e_count = g.theta();
    let t_iters = weights.t_iters;
    let minsum_family = weights.mode != CheckMode::Tanh;

    let mut v_all = Vec::with_capacity(t_iters);
    let mut p_all = Vec::with_capacity(t_iters);
    let mut route_all = Vec::with_capacity(if minsum_family { t_iters } else { 0 });
    let mut coeff_all = Vec::with_capacity(if minsum_family { t_iters } else { 0 });

    let mut p_prev = vec![0.0; e_count];
    for t in 1..=t_iters {
        let mut v = vec![0.0; e_count];
        variable_layer_into(llr, &p_prev, weights, g, t, &mut v);
        let mut p = vec![0.0; e_count];
        if minsum_family {
            let mut route = vec![0u32; e_count];
            let mut coeff = vec![0.0; e_count];
            check_layer_into(
                &v,
                g,
                weights.mode,
                weights.beta_slice(t),
                &mut p,
                Some(&mut route),
                Some(&mut coeff),
            );
            route_all.push(route);
            coeff_all.push(coeff);
        } else {
            check_layer_into(&v, g, weights.mode, None, &mut p, None, None);
        }
        p_prev.copy_from_slice(&p);
        v_all.push(v);
        p_all.push(p);
    }

    let mut u = vec![0.0; g.n()];
    let mut o = vec![0.0; g.n()];
    output_layer_into(llr, &p_prev, weights, g, &mut u, &mut o);

    Ok(ForwardTrace {
        llr: llr.to_vec(),
        v: v_all,
        p: p_all,
        u,
        o,
        route: route_all,
        route_coeff: coeff_all,
    })
}

/// Hard decisions from soft outputs: bit 0 iff `o >= 0.5` (positive evidence
/// means bit 0; the tie goes to 0).
pub fn hard_decision(o: &[f64]) -> Vec<u8> {
    o.iter().map(|&x| if x >= 0.5 { 0 } else { 1 }).collect()
}

/// BER loss: Hamming distance divided by blocklength.
pub fn ber_loss(decoded: &[u8], reference: &[u8]) -> Result<f64, DecoderError> {
    if decoded.len() != reference.len() {
        return Err(DecoderError::Dimension(format!(
            "length mismatch {} vs {}",
            decoded.len(),
            reference.len()
        )));
    }
    let errors = decoded
        .iter()
        .zip(reference)
        .filter(|(a, b)| a != b)
        .count();
    Ok(errors as f64 / decoded.len() as f64)
}

// ---------------------------------------------------------------------------
// Checkpoint I/O
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct CheckpointHeader {
    format: String,
    code_hash: String,
    n: usize,
    edges: usize,
    t_iters: usize,
    mode: String,
    w_bound: Option<f64>,
    edge_order: String,
}

const CHECKPOINT_FORMAT: &str = "nbp-weights-v1";
const EDGE_ORDER: &str = "lex-var-check-v1";

/// Write a checkpoint: one JSON header line, then all weights as
/// little-endian f32 in the fixed order w1 (by iteration, then edge id),
/// w2 (by iteration, edge id, excluded-neighbor rank), w3 (by variable,
/// neighbor rank), w4 (by variable).
pub fn save_checkpoint(
    weights: &NbpWeights,
    g: &CodeGraph,
    path: &Path,
) -> Result<(), DecoderError> {
    let header = CheckpointHeader {
        format: CHECKPOINT_FORMAT.to_string(),
        code_hash: g.code_hash(),
        n: weights.n,
        edges: weights.edge_count,
        t_iters: weights.t_iters,
        mode: weights.mode.to_string(),
        w_bound: weights.w_bound,
        edge_order: EDGE_ORDER.to_string(),
    };
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    serde_json::to_writer(&mut w, &header).map_err(|e| DecoderError::Format(e.to_string()))?;
    w.write_all(b"\n")?;
    for &x in weights.tensors.iter() {
        w.write_all(&(x as f32).to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

/// Load a checkpoint and bind it to `g`; refuses a code-hash or shape
/// mismatch. Scaled/offset modes are reconstructed with neutral beta
/// vectors (checkpoints never carry trained betas — they are forward-only).
pub fn load_checkpoint(path: &Path, g: &CodeGraph) -> Result<NbpWeights, DecoderError> {
    let mut r = BufReader::new(std::fs::File::open(path)?);
    let mut header_line = String::new();
    r.read_line(&mut header_line)?;
    let header: CheckpointHeader = serde_json::from_str(header_line.trim_end())
        .map_err(|e| DecoderError::Format(e.to_string()))?;
    if header.format != CHECKPOINT_FORMAT || header.edge_order != EDGE_ORDER {
        return Err(DecoderError::Format(format!(
            "unsupported checkpoint format {:?} / {:?}",
            header.format, header.edge_order
        )));
    }
    let hash = g.code_hash();
    if header.code_hash != hash {
        return Err(DecoderError::CodeMismatch(format!(
            "checkpoint was trained on code {} but the supplied code is {}",
            &header.code_hash[..12.min(header.code_hash.len())],
            &hash[..12]
        )));
    }
    if header.n != g.n() || header.edges != g.theta() {
        return Err(DecoderError::CodeMismatch(
            "checkpoint dimensions do not match the code".to_string(),
        ));
    }
    let mode: CheckMode = header
        .mode
        .parse()
        .map_err(DecoderError::Format)?;
    let mut weights = init_weights(g, header.t_iters, mode, WeightInit::AllOne, None, 0)?;
    weights.w_bound = header.w_bound;
    let expected = weights.tensors.len();
    let mut bytes = Vec::with_capacity(expected * 4);
    r.read_to_end(&mut bytes)?;
    if bytes.len() != expected * 4 {
        return Err(DecoderError::Format(format!(
            "expected {} weight bytes, found {}",
            expected * 4,
            bytes.len()
        )));
    }
    let mut vals = bytes
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64);
    weights.tensors.for_each_mut(|x| {
        *x = vals.next().expect("length checked");
    });
    Ok(weights)
}
