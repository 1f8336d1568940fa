//! Closed-form generalization-gap bounds for NBP decoders and the numeric
//! machinery behind them: spectral-norm bounds on the sparse weight
//! matrices, the Lipschitz constants of the decoder in its weights, the
//! sparse-matrix covering number, the main covering-number bound and its
//! rate/irregular/unbounded-LLR variants, and the figure-data generators.
//!
//! Geometric quantities like `(sqrt(n) B_W2)^(T-1)` overflow f64 well within
//! the parameter ranges of interest, so every product and power is evaluated
//! in the natural-log domain with log-sum-exp for the additive pieces.

mod rademacher;

pub use rademacher::{estimate_all_bits, estimate_bitwise_rademacher, rademacher_engine};

use crate::stats::{log_geometric_sum, log_sum_exp};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BoundError {
    #[error("vacuous bound: log argument {0} must exceed 1 (raise m, n, w, d_v or b_lambda)")]
    VacuousLogArgument(f64),
    #[error("delta must lie in {range}, got {value}")]
    InvalidDelta { value: f64, range: &'static str },
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("inconsistent rate/degree inputs: {0}")]
    InconsistentRate(String),
    #[error("no feasible grid point: {0}")]
    EmptyGrid(String),
}

/// Every scalar feeding the bound formulas.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundInputs {
    pub n: usize,
    pub d_v: usize,
    pub t_iters: usize,
    /// Training dataset size (kept as f64: CLI inputs like `1e6` are exact).
    pub m: f64,
    /// Bound on the magnitude of every trainable weight.
    pub w: f64,
    /// Bound on the magnitude of every input LLR.
    pub b_lambda: f64,
    /// Confidence level.
    pub delta: f64,
    pub d_c: Option<usize>,
    pub kappa: Option<f64>,
    /// Channel noise standard deviation (needed for the unbounded-LLR form).
    pub beta: Option<f64>,
    /// Variable-degree profile for irregular codes.
    pub profile: Option<Vec<usize>>,
}

impl BoundInputs {
    /// The regular-code anchor used by the parameter-sweep figures:
    /// n = 100, d_v = 10, T = 10, m = 1e6, w = 1, b_lambda = 10, delta = 0.05.
    pub fn sweep_anchor() -> Self {
        BoundInputs {
            n: 100,
            d_v: 10,
            t_iters: 10,
            m: 1e6,
            w: 1.0,
            b_lambda: 10.0,
            delta: 0.05,
            d_c: None,
            kappa: None,
            beta: None,
            profile: None,
        }
    }

    fn validate(&self) -> Result<(), BoundError> {
        if self.n == 0 || self.d_v == 0 || self.t_iters == 0 {
            return Err(BoundError::InvalidParam(
                "n, d_v and T must be positive".to_string(),
            ));
        }
        if self.m.is_nan() || self.m < 1.0 {
            return Err(BoundError::InvalidParam(format!(
                "m must be at least 1, got {}",
                self.m
            )));
        }
        if self.w < 0.0 || self.b_lambda < 0.0 {
            return Err(BoundError::InvalidParam(
                "w and b_lambda must be non-negative".to_string(),
            ));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(BoundError::InvalidDelta {
                value: self.delta,
                range: "(0, 1)",
            });
        }
        Ok(())
    }
}

/// Spectral / row-norm bounds of the four weight matrices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralBounds {
    pub b_w1: f64,
    pub b_w2: f64,
    pub b_w3: f64,
    pub b_w4: f64,
}

/// Regular code: `(w sqrt(d_v), w (d_v - 1), w sqrt(d_v), w)`.
pub fn spectral_bounds(w: f64, d_v: usize) -> SpectralBounds {
    let root = (d_v as f64).sqrt();
    SpectralBounds {
        b_w1: w * root,
        b_w2: w * (d_v as f64 - 1.0),
        b_w3: w * root,
        b_w4: w,
    }
}

/// Irregular code: the maximum variable degree replaces `d_v` everywhere.
pub fn spectral_bounds_irregular(w: f64, profile: &[usize]) -> SpectralBounds {
    let max_dv = profile.iter().copied().max().unwrap_or(0);
    spectral_bounds(w, max_dv)
}

/// The Lipschitz coefficients of the decoder output in each weight family,
/// stored in the natural-log domain. `log_rho_w2` runs over iterations
/// 2..=T (the first iteration's pair weights multiply the zero vector) and
/// is empty for T = 1.
#[derive(Debug, Clone, Serialize)]
pub struct LipschitzConstants {
    pub log_rho_w1: Vec<f64>,
    pub log_rho_w2: Vec<f64>,
    pub log_rho_w3: f64,
    pub log_rho_w4: f64,
    pub flags: Vec<String>,
}

fn scaled_log(k: usize, log_x: f64) -> f64 {
    // k * log(x) with the k = 0 case pinned to 0 even when log_x = -inf
    if k == 0 {
        0.0
    } else {
        k as f64 * log_x
    }
}

pub fn lipschitz_constants(inputs: &BoundInputs) -> Result<LipschitzConstants, BoundError> {
    inputs.validate()?;
    if inputs.w == 0.0 || inputs.b_lambda == 0.0 {
        return Err(BoundError::InvalidParam(
            "Lipschitz constants need positive w and b_lambda".to_string(),
        ));
    }
    let n = inputs.n as f64;
    let t_iters = inputs.t_iters;
    let b = spectral_bounds(inputs.w, inputs.d_v);
    let ln_n = n.ln();
    let ln_sqrt_n = 0.5 * ln_n;
    let ln_bl = inputs.b_lambda.ln();
    let ln_bw1 = b.b_w1.ln();
    let ln_bw2 = b.b_w2.ln(); // -inf for d_v = 1
    let ln_bw3 = b.b_w3.ln();
    let ln_x = ln_sqrt_n + ln_bw2; // log(sqrt(n) * B_W2)

    let mut flags = Vec::new();
    if t_iters < 3 {
        flags.push("small-T".to_string());
    }
    if (n.sqrt() * b.b_w2 - 1.0).abs() < 1e-12 {
        flags.push("limit-branch: sqrt(n)*B_W2 = 1, geometric sum of equal terms".to_string());
    }
    if (b.b_w2 - 1.0).abs() < 1e-12 {
        flags.push("limit-branch: B_W2 = 1, geometric sum of equal terms".to_string());
    }
    if inputs.n == 1 {
        flags.push("limit-branch: sqrt(n) = 1, geometric sum of equal terms".to_string());
    }

    let log_rho_w1: Vec<f64> = (1..=t_iters)
        .map(|i| ln_n + ln_bl + ln_bw3 + scaled_log(t_iters - i, ln_x))
        .collect();

    let log_rho_w2: Vec<f64> = if t_iters >= 2 {
        let t1 = ln_n + (t_iters as f64).ln() + ln_bl + ln_bw1 + ln_bw3
            + log_geometric_sum(ln_x, t_iters - 1);
        let t2 = ln_n + ln_bl + ln_bw1 + ln_bw3 + scaled_log(t_iters - 2, ln_bw2)
            + log_geometric_sum(ln_sqrt_n, t_iters - 1);
        let value = log_sum_exp(&[t1, t2]);
        vec![value; t_iters - 1]
    } else {
        Vec::new()
    };

    let log_rho_w3 = ln_sqrt_n + ln_bw1 + ln_bl
        + log_sum_exp(&[
            log_geometric_sum(ln_bw2, t_iters - 1),
            scaled_log(t_iters - 1, ln_bw2),
        ]);

    Ok(LipschitzConstants {
        log_rho_w1,
        log_rho_w2,
        log_rho_w3,
        log_rho_w4: ln_bl,
        flags,
    })
}

/// Log of the covering number of `r x c` matrices with `q` non-zeros per row
/// and spectral norm at most `b_w`, at resolution `epsilon`:
/// `q r log(1 + 2 min(sqrt(r), sqrt(c)) b_w / epsilon)`.
pub fn log_covering_sparse(
    q: usize,
    r: usize,
    c: usize,
    b_w: f64,
    epsilon: f64,
) -> Result<f64, BoundError> {
    if epsilon <= 0.0 {
        return Err(BoundError::InvalidParam(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    if r == 0 || c == 0 {
        return Err(BoundError::InvalidParam(
            "matrix dimensions must be positive".to_string(),
        ));
    }
    if b_w < 0.0 {
        return Err(BoundError::InvalidParam(
            "spectral norm bound must be non-negative".to_string(),
        ));
    }
    let min_root = (r as f64).sqrt().min((c as f64).sqrt());
    Ok((q * r) as f64 * (1.0 + 2.0 * min_root * b_w / epsilon).ln())
}

/// One evaluated bound with its additive pieces.
#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub kind: String,
    pub inputs: BoundInputs,
    /// The covering-number (Dudley) term.
    pub complexity_term: f64,
    /// The `4/m` term.
    pub small_term: f64,
    /// The `sqrt(log(1/delta) / 2m)` confidence term.
    pub confidence_term: f64,
    /// The unbounded-LLR probability, when applicable.
    pub probability_term: Option<f64>,
    pub total: f64,
    pub optimal_b_lambda: Option<f64>,
    /// For constant irregular profiles: the regular-form total, reported
    /// alongside rather than reconciled.
    pub counterpart_total: Option<f64>,
    pub curve: Option<Vec<PhiRow>>,
    pub flags: Vec<String>,
}

/// One grid point of the bounded-LLR trade-off.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PhiRow {
    pub b_lambda: f64,
    pub complexity: f64,
    pub probability: f64,
    pub phi: f64,
}

fn small_term(m: f64) -> f64 {
    4.0 / m
}

fn confidence_term(m: f64, delta: f64) -> f64 {
    ((1.0 / delta).ln() / (2.0 * m)).sqrt()
}

fn log_argument(m: f64, n: f64, w: f64, d_v: f64, b_lambda: f64) -> f64 {
    8.0 * (m * n).sqrt() * w * d_v * b_lambda
}

fn complexity_term(n: f64, d_v: f64, t: f64, m: f64, log_arg: f64) -> f64 {
    12.0 * ((n * d_v * d_v * t + 1.0) * (t + 1.0) / m * log_arg.ln()).sqrt()
}

/// The covering-number term of the main bound alone, without the `4/m` and
/// confidence pieces. Used by the scaling checks and the normalized curves.
pub fn dominant_term(inputs: &BoundInputs) -> Result<f64, BoundError> {
    inputs.validate()?;
    let (n, d_v, t, m) = (
        inputs.n as f64,
        inputs.d_v as f64,
        inputs.t_iters as f64,
        inputs.m,
    );
    let log_arg = log_argument(m, n, inputs.w, d_v, inputs.b_lambda);
    if log_arg <= 1.0 {
        return Err(BoundError::VacuousLogArgument(log_arg));
    }
    Ok(complexity_term(n, d_v, t, m, log_arg))
}

/// The main generalization-gap bound for regular codes:
/// `4/m + sqrt(log(1/delta)/2m)
///  + 12 sqrt((n d_v^2 T + 1)(T+1)/m * log(8 sqrt(mn) w d_v b_lambda))`.
pub fn theorem1_rhs(inputs: &BoundInputs) -> Result<BoundReport, BoundError> {
    let complexity = dominant_term(inputs)?;
    let small = small_term(inputs.m);
    let confidence = confidence_term(inputs.m, inputs.delta);
    Ok(BoundReport {
        kind: "theorem1".to_string(),
        inputs: inputs.clone(),
        complexity_term: complexity,
        small_term: small,
        confidence_term: confidence,
        probability_term: None,
        total: complexity + small + confidence,
        optimal_b_lambda: None,
        counterpart_total: None,
        curve: None,
        flags: Vec::new(),
    })
}

/// The same bound expressed through the check degree and code rate:
/// `n d_v^2 T` becomes `n d_c^2 (1 - kappa)^2 T`, valid under the degree
/// relation `n d_v = (n - kappa n) d_c`, which is checked.
pub fn theorem1_rate_form(inputs: &BoundInputs) -> Result<BoundReport, BoundError> {
    inputs.validate()?;
    let d_c = inputs.d_c.ok_or_else(|| {
        BoundError::InvalidParam("rate form needs the check degree d_c".to_string())
    })? as f64;
    let kappa = inputs.kappa.ok_or_else(|| {
        BoundError::InvalidParam("rate form needs the code rate kappa".to_string())
    })?;
    if !(0.0..1.0).contains(&kappa) {
        return Err(BoundError::InvalidParam(format!(
            "kappa must lie in [0, 1), got {kappa}"
        )));
    }
    let (n, d_v, t, m) = (
        inputs.n as f64,
        inputs.d_v as f64,
        inputs.t_iters as f64,
        inputs.m,
    );
    let lhs = n * d_v;
    let rhs = n * (1.0 - kappa) * d_c;
    if (lhs - rhs).abs() > 1e-9 * lhs.max(1.0) {
        return Err(BoundError::InconsistentRate(format!(
            "n*d_v = {lhs} but (n - kappa*n)*d_c = {rhs}"
        )));
    }
    let log_arg = log_argument(m, n, inputs.w, d_v, inputs.b_lambda);
    if log_arg <= 1.0 {
        return Err(BoundError::VacuousLogArgument(log_arg));
    }
    let effective = d_c * (1.0 - kappa); // plays the d_v role in the leading factor
    let complexity = complexity_term(n, effective, t, m, log_arg);
    let small = small_term(m);
    let confidence = confidence_term(m, inputs.delta);
    Ok(BoundReport {
        kind: "theorem1-rate-form".to_string(),
        inputs: inputs.clone(),
        complexity_term: complexity,
        small_term: small,
        confidence_term: confidence,
        probability_term: None,
        total: complexity + small + confidence,
        optimal_b_lambda: None,
        counterpart_total: None,
        curve: None,
        flags: Vec::new(),
    })
}

/// The irregular-code bound: `12 sqrt(sum_j d_vj^2 (T+1)^2 / m *
/// log(8 sqrt(mn) w max_i d_vi b_lambda)) + 4/m + sqrt(log(1/delta)/2m)`.
///
/// For a constant profile the regular bound is also evaluated and reported
/// alongside (the two differ in their `(T+1)` structure and are never
/// silently reconciled).
pub fn theorem2_rhs(profile: &[usize], inputs: &BoundInputs) -> Result<BoundReport, BoundError> {
    inputs.validate()?;
    if profile.is_empty() {
        return Err(BoundError::InvalidParam(
            "degree profile must be non-empty".to_string(),
        ));
    }
    if profile.len() != inputs.n {
        return Err(BoundError::InvalidParam(format!(
            "profile length {} does not match n = {}",
            profile.len(),
            inputs.n
        )));
    }
    if profile.contains(&0) {
        return Err(BoundError::InvalidParam(
            "every variable degree must be positive".to_string(),
        ));
    }
    let max_dv = *profile.iter().max().expect("non-empty") as f64;
    let sum_sq: f64 = profile.iter().map(|&d| (d * d) as f64).sum();
    let (n, t, m) = (inputs.n as f64, inputs.t_iters as f64, inputs.m);
    let log_arg = log_argument(m, n, inputs.w, max_dv, inputs.b_lambda);
    if log_arg <= 1.0 {
        return Err(BoundError::VacuousLogArgument(log_arg));
    }
    let complexity = 12.0 * (sum_sq * (t + 1.0) * (t + 1.0) / m * log_arg.ln()).sqrt();
    let small = small_term(m);
    let confidence = confidence_term(m, inputs.delta);

    let mut flags = Vec::new();
    let constant = profile.iter().all(|&d| d == profile[0]);
    let counterpart = if constant {
        flags.push("constant profile: regular-form total reported alongside".to_string());
        let regular = BoundInputs {
            d_v: profile[0],
            ..inputs.clone()
        };
        theorem1_rhs(&regular).ok().map(|r| r.total)
    } else {
        None
    };

    let mut report_inputs = inputs.clone();
    report_inputs.profile = Some(profile.to_vec());
    Ok(BoundReport {
        kind: "theorem2".to_string(),
        inputs: report_inputs,
        complexity_term: complexity,
        small_term: small,
        confidence_term: confidence,
        probability_term: None,
        total: complexity + small + confidence,
        optimal_b_lambda: None,
        counterpart_total: counterpart,
        curve: None,
        flags,
    })
}

/// The standard normal tail probability `Q(x) = Pr(N(0,1) > x)`, computed so
/// that `Q(x) + Q(-x) == 1` holds exactly in floating point.
pub fn q_function(x: f64) -> f64 {
    if x >= 0.0 {
        0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
    } else {
        1.0 - q_function(-x)
    }
}

/// Probability that any of the `n` BPSK/AWGN LLRs exceeds `b_lambda` in
/// magnitude:
/// `1 - (1 - Q((beta^2 b + 2)/(2 beta)) - Q((beta^2 b - 2)/(2 beta)))^n`.
pub fn prob_llr_unbounded(n: usize, beta: f64, b_lambda: f64) -> Result<f64, BoundError> {
    if beta <= 0.0 {
        return Err(BoundError::InvalidParam(format!(
            "beta must be positive, got {beta}"
        )));
    }
    if n == 0 {
        return Err(BoundError::InvalidParam("n must be positive".to_string()));
    }
    if b_lambda < 0.0 {
        return Err(BoundError::InvalidParam(format!(
            "b_lambda must be non-negative, got {b_lambda}"
        )));
    }
    let hi = (beta * beta * b_lambda + 2.0) / (2.0 * beta);
    let lo = (beta * beta * b_lambda - 2.0) / (2.0 * beta);
    let per_bit_bounded = (1.0 - q_function(hi) - q_function(lo)).clamp(0.0, 1.0);
    Ok(1.0 - per_bit_bounded.powi(n as i32))
}

/// The default logarithmic grid for the LLR bound: 64 points spanning
/// `[1e-1, 1e3]`.
pub fn default_b_lambda_grid() -> Vec<f64> {
    (0..64)
        .map(|k| 10f64.powf(-1.0 + 4.0 * k as f64 / 63.0))
        .collect()
}

/// The unbounded-LLR bound: minimize over the `b_lambda` grid the sum of the
/// covering-number term and the probability that some LLR escapes the bound,
/// then add the `4/m` and confidence terms. Requires `inputs.beta`. Returns
/// the minimizing grid point and the full trade-off curve; infeasible grid
/// points (vacuous log argument) are skipped with a flag.
pub fn theorem3_rhs(inputs: &BoundInputs, grid: &[f64]) -> Result<BoundReport, BoundError> {
    inputs.validate()?;
    let beta = inputs.beta.ok_or_else(|| {
        BoundError::InvalidParam("the unbounded-LLR bound needs the channel beta".to_string())
    })?;
    if grid.is_empty() {
        return Err(BoundError::EmptyGrid("empty b_lambda grid".to_string()));
    }
    let mut points: Vec<f64> = grid.to_vec();
    points.sort_by(|a, b| a.partial_cmp(b).expect("NaN grid point"));

    let mut curve = Vec::with_capacity(points.len());
    let mut skipped = 0usize;
    let mut best: Option<(f64, f64)> = None; // (phi, b_lambda); strict '<' keeps the smallest b
    for &b_lambda in &points {
        let candidate = BoundInputs {
            b_lambda,
            ..inputs.clone()
        };
        let complexity = match dominant_term(&candidate) {
            Ok(c) => c,
            Err(BoundError::VacuousLogArgument(_)) => {
                skipped += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        let probability = prob_llr_unbounded(inputs.n, beta, b_lambda)?;
        let phi = complexity + probability;
        curve.push(PhiRow {
            b_lambda,
            complexity,
            probability,
            phi,
        });
        if best.is_none_or(|(p, _)| phi < p) {
            best = Some((phi, b_lambda));
        }
    }
    let (phi_min, b_star) = best.ok_or_else(|| {
        BoundError::EmptyGrid("every grid point fails the log-argument precondition".to_string())
    })?;

    let small = small_term(inputs.m);
    let confidence = confidence_term(inputs.m, inputs.delta);
    let at_star = curve
        .iter()
        .find(|row| row.b_lambda == b_star)
        .expect("minimizer is on the curve");
    let mut flags = Vec::new();
    if skipped > 0 {
        flags.push(format!("skipped {skipped} infeasible grid points"));
    }
    Ok(BoundReport {
        kind: "theorem3".to_string(),
        inputs: inputs.clone(),
        complexity_term: at_star.complexity,
        small_term: small,
        confidence_term: confidence,
        probability_term: Some(at_star.probability),
        total: phi_min + small + confidence,
        optimal_b_lambda: Some(b_star),
        counterpart_total: None,
        curve: Some(curve),
        flags,
    })
}

/// The generalization-gap bound from averaged bit-wise Rademacher
/// complexities: `coeff * mean(estimates) + sqrt(log(1/delta) / 2m)`.
///
/// `estimates` holds one value per output bit, or a single pooled value
/// reused for all bits. The display coefficient is `1/n` (so the mean);
/// `halved` switches to the `1/(2n)` variant from the underlying derivation.
/// `delta = 1` is accepted and zeroes the confidence term.
pub fn proposition1_rhs(
    estimates: &[f64],
    n: usize,
    m: f64,
    delta: f64,
    halved: bool,
) -> Result<f64, BoundError> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(BoundError::InvalidDelta {
            value: delta,
            range: "(0, 1]",
        });
    }
    if m.is_nan() || m < 1.0 {
        return Err(BoundError::InvalidParam(format!(
            "m must be at least 1, got {m}"
        )));
    }
    if estimates.is_empty() || (estimates.len() != n && estimates.len() != 1) {
        return Err(BoundError::InvalidParam(format!(
            "need {n} bit-wise estimates (or a single pooled one), got {}",
            estimates.len()
        )));
    }
    let mean = estimates.iter().sum::<f64>() / estimates.len() as f64;
    let coeff = if halved { 0.5 } else { 1.0 };
    Ok(coeff * mean + confidence_term(m, delta))
}

// ---------------------------------------------------------------------------
// Figure-data generators
// ---------------------------------------------------------------------------

/// One point of a parameter-sweep curve.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CurvePoint {
    pub x: f64,
    pub complexity: f64,
    pub small: f64,
    pub confidence: f64,
    pub total: f64,
}

/// The four parameter sweeps of the main bound around the anchor point.
#[derive(Debug, Clone, Serialize)]
pub struct SweepCurves {
    pub vs_m: Vec<CurvePoint>,
    pub vs_t: Vec<CurvePoint>,
    pub vs_n: Vec<CurvePoint>,
    pub vs_dv: Vec<CurvePoint>,
}

fn curve_point(x: f64, report: &BoundReport) -> CurvePoint {
    CurvePoint {
        x,
        complexity: report.complexity_term,
        small: report.small_term,
        confidence: report.confidence_term,
        total: report.total,
    }
}

fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    (0..points)
        .map(|k| {
            let frac = k as f64 / (points - 1) as f64;
            10f64.powf(lo.log10() + frac * (hi / lo).log10())
        })
        .collect()
}

/// Evaluate the main bound along each of m, T, n and d_v while holding the
/// other anchor parameters fixed.
pub fn sweep_curves(anchor: &BoundInputs) -> Result<SweepCurves, BoundError> {
    let vs_m = log_grid(1e4, 1e8, 33)
        .into_iter()
        .map(|m| {
            let r = theorem1_rhs(&BoundInputs {
                m,
                ..anchor.clone()
            })?;
            Ok(curve_point(m, &r))
        })
        .collect::<Result<Vec<_>, BoundError>>()?;
    let vs_t = (2..=50)
        .map(|t| {
            let r = theorem1_rhs(&BoundInputs {
                t_iters: t,
                ..anchor.clone()
            })?;
            Ok(curve_point(t as f64, &r))
        })
        .collect::<Result<Vec<_>, BoundError>>()?;
    let mut ns: Vec<usize> = log_grid(1e2, 1e4, 25)
        .into_iter()
        .map(|x| x.round() as usize)
        .collect();
    ns.dedup();
    let vs_n = ns
        .into_iter()
        .map(|n| {
            let r = theorem1_rhs(&BoundInputs {
                n,
                ..anchor.clone()
            })?;
            Ok(curve_point(n as f64, &r))
        })
        .collect::<Result<Vec<_>, BoundError>>()?;
    let vs_dv = (1..=30)
        .map(|d_v| {
            let r = theorem1_rhs(&BoundInputs {
                d_v,
                ..anchor.clone()
            })?;
            Ok(curve_point(d_v as f64, &r))
        })
        .collect::<Result<Vec<_>, BoundError>>()?;
    Ok(SweepCurves {
        vs_m,
        vs_t,
        vs_n,
        vs_dv,
    })
}

/// The minimizer row of the LLR-bound trade-off at one noise level.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BStarRow {
    pub beta: f64,
    pub b_lambda_star: f64,
    pub phi_min: f64,
    pub total: f64,
}

/// Trade-off curves and minimizers across noise levels.
#[derive(Debug, Clone, Serialize)]
pub struct TradeoffCurves {
    pub curves: Vec<(f64, Vec<PhiRow>)>,
    pub b_star: Vec<BStarRow>,
}

pub fn tradeoff_default_betas() -> Vec<f64> {
    vec![0.5, 0.75, 1.0, 1.5, 2.0]
}

/// Evaluate the unbounded-LLR bound across noise levels on a common grid.
pub fn tradeoff_curves(
    base: &BoundInputs,
    betas: &[f64],
    grid: &[f64],
) -> Result<TradeoffCurves, BoundError> {
    let mut curves = Vec::with_capacity(betas.len());
    let mut b_star = Vec::with_capacity(betas.len());
    for &beta in betas {
        let inputs = BoundInputs {
            beta: Some(beta),
            ..base.clone()
        };
        let report = theorem3_rhs(&inputs, grid)?;
        b_star.push(BStarRow {
            beta,
            b_lambda_star: report.optimal_b_lambda.expect("set by theorem3"),
            phi_min: report.complexity_term + report.probability_term.expect("set by theorem3"),
            total: report.total,
        });
        curves.push((beta, report.curve.expect("set by theorem3")));
    }
    Ok(TradeoffCurves { curves, b_star })
}
