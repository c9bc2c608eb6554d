//! Weighted sparsification of Parseval frames by the barrier-potential method,
//! followed by quantization of the weights onto a common unit.
//!
//! The sparsifier keeps at most `⌈dn⌉` vectors of a Parseval frame for `ℂⁿ`
//! with the weighted frame operator between `(1 − 1/√d)²` and `(1 + 1/√d)²`.
//! Quantization replaces the weights by integer multiples `l_i · b` of one
//! unit `b = 1/a` while staying within a certified operator-norm distance of
//! the weighted frame operator.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{FrameError, Result};
use crate::numerics::{ComplexMatrix, EigenDecomposition, HermitianMatrix, Side, Tolerances};

/// An ordered family of `m` vectors in `ℂⁿ`, stored as the rows of an `m × n` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameFamily {
    vectors: ComplexMatrix,
}

impl FrameFamily {
    pub fn new(vectors: ComplexMatrix) -> Self {
        FrameFamily { vectors }
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        Ok(FrameFamily::new(ComplexMatrix::from_rows(rows)?))
    }

    /// Ambient dimension `n`.
    pub fn dim(&self) -> usize {
        self.vectors.cols()
    }

    /// Number of vectors `m`.
    pub fn len(&self) -> usize {
        self.vectors.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn vector(&self, i: usize) -> &[Complex64] {
        self.vectors.row(i)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.vectors
    }

    pub fn norm_sqr(&self, i: usize) -> f64 {
        self.vector(i).iter().map(Complex64::norm_sqr).sum()
    }

    pub fn max_norm_sqr(&self) -> f64 {
        (0..self.len()).map(|i| self.norm_sqr(i)).fold(0.0, f64::max)
    }

    /// `Σ w_i v_i v_i*`.
    pub fn frame_operator(&self, weights: &[f64]) -> HermitianMatrix {
        assert_eq!(weights.len(), self.len());
        let mut s = HermitianMatrix::zeros(self.dim());
        for (i, &w) in weights.iter().enumerate() {
            if w != 0.0 {
                s.add_rank_one(w, self.vector(i));
            }
        }
        s
    }

    /// `‖Σ v_i v_i* − I_n‖`.
    pub fn parseval_deviation(&self) -> f64 {
        let s = self.frame_operator(&vec![1.0; self.len()]);
        s.sub(&HermitianMatrix::identity(self.dim())).operator_norm()
    }

    pub fn check_parseval(&self, tol: &Tolerances) -> Result<()> {
        let dev = self.parseval_deviation();
        if dev > tol.parseval {
            return Err(FrameError::validation(format!(
                "family is not Parseval: ‖Σ v v* − I‖ = {dev:e} exceeds {:e}",
                tol.parseval
            )));
        }
        Ok(())
    }

    fn check_sparsifiable(&self, tol: &Tolerances) -> Result<()> {
        let (m, n) = (self.len(), self.dim());
        if n == 0 {
            return Err(FrameError::validation("frame dimension must be positive"));
        }
        if m < n {
            return Err(FrameError::validation(format!(
                "{m} vectors cannot form a Parseval frame for C^{n}"
            )));
        }
        if let Some(i) = (0..m).find(|&i| self.norm_sqr(i) == 0.0) {
            return Err(FrameError::validation(format!("vector {i} is zero")));
        }
        self.check_parseval(tol)
    }
}

/// A frame with nonnegative weights produced by [`bss_sparsify`].
#[derive(Debug, Clone)]
pub struct WeightedFrame {
    pub base: FrameFamily,
    pub weights: Vec<f64>,
    /// `{i : s_i ≠ 0}`, ascending.
    pub support: Vec<usize>,
    /// Requested oversampling parameter.
    pub d: f64,
    /// Number of barrier steps taken, `⌈dn⌉`.
    pub steps: usize,
    /// Measured `(λ_min, λ_max)` of `Σ s_i v_i v_i*`.
    pub bounds: (f64, f64),
}

impl WeightedFrame {
    /// Wraps externally chosen weights; the support and bounds are recomputed.
    pub fn from_weights(base: FrameFamily, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != base.len() {
            return Err(FrameError::validation("one weight per vector is required"));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(FrameError::validation("weights must be finite and nonnegative"));
        }
        let support = support_of(&weights);
        let ev = base.frame_operator(&weights).eigenvalues();
        let bounds = (ev[0], ev[ev.len() - 1]);
        Ok(WeightedFrame {
            base,
            weights,
            support,
            d: f64::NAN,
            steps: 0,
            bounds,
        })
    }

    pub fn frame_operator(&self) -> HermitianMatrix {
        self.base.frame_operator(&self.weights)
    }
}

fn support_of(weights: &[f64]) -> Vec<usize> {
    weights
        .iter()
        .enumerate()
        .filter(|(_, &w)| w != 0.0)
        .map(|(i, _)| i)
        .collect()
}

/// `(1 − 1/√d)², (1 + 1/√d)²`.
pub fn spectral_targets(d: f64) -> (f64, f64) {
    let r = 1.0 / d.sqrt();
    ((1.0 - r).powi(2), (1.0 + r).powi(2))
}

/// Barrier schedule for parameter `d` in dimension `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BarrierParams {
    pub delta_upper: f64,
    pub delta_lower: f64,
    pub eps_upper: f64,
    pub eps_lower: f64,
}

impl BarrierParams {
    pub fn for_d(d: f64) -> Self {
        let sd = d.sqrt();
        BarrierParams {
            delta_lower: 1.0,
            delta_upper: (sd + 1.0) / (sd - 1.0),
            eps_lower: 1.0 / sd,
            eps_upper: (sd - 1.0) / (d + sd),
        }
    }
}

/// State of the barrier iteration: `l < λ_min(A)`, `λ_max(A) < u`, and both
/// potentials within their budgets.
#[derive(Debug, Clone)]
pub struct BarrierState {
    pub a: HermitianMatrix,
    pub upper: f64,
    pub lower: f64,
    pub step: usize,
    pub params: BarrierParams,
    /// `Φ^u(A)` carried forward by Sherman–Morrison updates.
    pub phi_upper: f64,
    /// `Φ_l(A)` carried forward by Sherman–Morrison updates.
    pub phi_lower: f64,
}

impl BarrierState {
    /// `A = 0`, `u₀ = n/ε_U`, `l₀ = −n/ε_L`.
    pub fn initial(n: usize, params: BarrierParams) -> Self {
        let nf = n as f64;
        BarrierState {
            a: HermitianMatrix::zeros(n),
            upper: nf / params.eps_upper,
            lower: -nf / params.eps_lower,
            step: 0,
            params,
            phi_upper: params.eps_upper,
            phi_lower: params.eps_lower,
        }
    }

    /// `(Φ^u(A), Φ_l(A))` recomputed from the spectrum of `A`.
    pub fn potentials(&self, tol: &Tolerances) -> Result<(f64, f64)> {
        let eig = self.a.eigen();
        Ok((
            eig.resolvent_trace(self.upper, Side::Upper, tol.resolvent_gap)?,
            eig.resolvent_trace(self.lower, Side::Lower, tol.resolvent_gap)?,
        ))
    }
}

/// One accepted barrier step.
#[derive(Debug, Clone)]
pub struct BarrierStep {
    pub index: usize,
    pub weight: f64,
    pub next: BarrierState,
}

/// Picks the vector with the largest slack `L_A(v) − U_A(v)` (lowest index on
/// ties), adds it with weight `2/(U + L)`, and shifts both barriers.
pub fn barrier_step(state: &BarrierState, frame: &FrameFamily, tol: &Tolerances) -> Result<BarrierStep> {
    let p = state.params;
    let eig: EigenDecomposition = state.a.eigen();
    let gap = tol.resolvent_gap;
    let u_next = state.upper + p.delta_upper;
    let l_next = state.lower + p.delta_lower;

    let phi_u = eig.resolvent_trace(state.upper, Side::Upper, gap)?;
    let phi_u_next = eig.resolvent_trace(u_next, Side::Upper, gap)?;
    let phi_l = eig.resolvent_trace(state.lower, Side::Lower, gap)?;
    let phi_l_next = eig.resolvent_trace(l_next, Side::Lower, gap)?;
    let du = phi_u - phi_u_next;
    let dl = phi_l_next - phi_l;
    if !(du > 0.0 && dl > 0.0) {
        return Err(FrameError::invariant(format!(
            "barrier shifts did not move the potentials (ΔΦ^u = {du:e}, ΔΦ_l = {dl:e})"
        )));
    }

    struct Candidate {
        upper: f64,
        lower: f64,
        forms: [f64; 4],
    }
    let candidates: Vec<Candidate> = (0..frame.len())
        .map(|i| {
            let w = eig.coordinates(frame.vector(i));
            let u1 = eig.resolvent_form_coords(u_next, Side::Upper, &w, 1, gap)?;
            let u2 = eig.resolvent_form_coords(u_next, Side::Upper, &w, 2, gap)?;
            let l1 = eig.resolvent_form_coords(l_next, Side::Lower, &w, 1, gap)?;
            let l2 = eig.resolvent_form_coords(l_next, Side::Lower, &w, 2, gap)?;
            Ok(Candidate {
                upper: u2 / du + u1,
                lower: l2 / dl - l1,
                forms: [u1, u2, l1, l2],
            })
        })
        .collect::<Result<_>>()?;

    let best = candidates
        .iter()
        .map(|c| c.lower - c.upper)
        .fold(f64::NEG_INFINITY, f64::max);
    let scale = candidates
        .iter()
        .map(|c| c.lower.abs() + c.upper.abs())
        .fold(0.0, f64::max);
    let tie = 1e-9 * scale;
    if best < -tie {
        return Err(FrameError::invariant(format!(
            "no admissible vector at barrier step {} (best slack {best:e})",
            state.step
        )));
    }
    let index = candidates
        .iter()
        .position(|c| c.lower - c.upper >= best - tie)
        .expect("maximum exists");
    let chosen = &candidates[index];
    let weight = 2.0 / (chosen.upper + chosen.lower);
    if !(weight.is_finite() && weight > 0.0) {
        return Err(FrameError::invariant(format!("degenerate step weight {weight}")));
    }

    // Sherman–Morrison updates of the shifted potentials.
    let [u1, u2, l1, l2] = chosen.forms;
    let phi_upper = phi_u_next + weight * u2 / (1.0 - weight * u1);
    let phi_lower = phi_l_next - weight * l2 / (1.0 + weight * l1);

    let mut a = state.a.clone();
    a.add_rank_one(weight, frame.vector(index));
    Ok(BarrierStep {
        index,
        weight,
        next: BarrierState {
            a,
            upper: u_next,
            lower: l_next,
            step: state.step + 1,
            params: p,
            phi_upper,
            phi_lower,
        },
    })
}

/// Runs the barrier method for `⌈dn⌉` steps and rescales the accumulated
/// weights so the frame operator lies in `[(1 − 1/√d)², (1 + 1/√d)²]`.
pub fn bss_sparsify(frame: &FrameFamily, d: f64, tol: &Tolerances) -> Result<WeightedFrame> {
    bss_sparsify_traced(frame, d, tol, |_| {})
}

/// Same as [`bss_sparsify`], handing every intermediate state to `observe`.
pub fn bss_sparsify_traced(
    frame: &FrameFamily,
    d: f64,
    tol: &Tolerances,
    mut observe: impl FnMut(&BarrierState),
) -> Result<WeightedFrame> {
    if !(d.is_finite() && d > 1.0) {
        return Err(FrameError::validation(format!("d must exceed 1, got {d}")));
    }
    frame.check_sparsifiable(tol)?;
    let n = frame.dim();
    let steps = (d * n as f64 - 1e-9).ceil() as usize;
    // Work with d' = ⌈dn⌉/n; its bounds sit inside those of d.
    let d_eff = steps as f64 / n as f64;
    let params = BarrierParams::for_d(d_eff);

    let mut state = BarrierState::initial(n, params);
    let mut raw = vec![0.0; frame.len()];
    observe(&state);
    for _ in 0..steps {
        let step = barrier_step(&state, frame, tol)?;
        raw[step.index] += step.weight;
        state = step.next;
        observe(&state);
    }

    let sd = d_eff.sqrt();
    let kappa = n as f64 * d_eff * sd / (sd - 1.0);
    let weights: Vec<f64> = raw.iter().map(|w| w / kappa).collect();
    let support = support_of(&weights);
    let ev = frame.frame_operator(&weights).eigenvalues();
    let bounds = (ev[0], ev[ev.len() - 1]);

    let (lo, hi) = spectral_targets(d);
    if support.len() > steps || bounds.0 < lo - tol.spectral_slack || bounds.1 > hi + tol.spectral_slack {
        return Err(FrameError::invariant(format!(
            "sparsified spectrum [{}, {}] with support {} escapes [{lo}, {hi}] / budget {steps}",
            bounds.0,
            bounds.1,
            support.len()
        )));
    }
    Ok(WeightedFrame {
        base: frame.clone(),
        weights,
        support,
        d,
        steps,
        bounds,
    })
}

/// Settings for [`quantize_weights`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantizeConfig {
    pub eps_quant: f64,
    pub trials: usize,
    pub seed: u64,
}

/// Weights written as `l_i · b` with integer `l_i`.
#[derive(Debug, Clone)]
pub struct QuantizedFrame {
    pub base: FrameFamily,
    pub unit: f64,
    pub multiplicities: Vec<u64>,
    /// `a = 1/b`.
    pub achieved_a: f64,
    /// `δ/ε_quant²` with `δ = max ‖v_i‖²`.
    pub theoretical_scale: f64,
    /// Measured `‖(1/a) Σ l_i v_i v_i* − T‖`.
    pub deviation: f64,
    pub eps_quant: f64,
}

impl QuantizedFrame {
    /// Re-measures the deviation from `target` and refuses anything at or above `eps_quant`.
    fn certified(
        base: &FrameFamily,
        target: &HermitianMatrix,
        multiplicities: Vec<u64>,
        a: f64,
        unit: f64,
        theoretical_scale: f64,
        eps_quant: f64,
    ) -> std::result::Result<Self, f64> {
        let weights: Vec<f64> = multiplicities.iter().map(|&l| l as f64 * unit).collect();
        let deviation = base.frame_operator(&weights).sub(target).operator_norm();
        if deviation < eps_quant {
            Ok(QuantizedFrame {
                base: base.clone(),
                unit,
                multiplicities,
                achieved_a: a,
                theoretical_scale,
                deviation,
                eps_quant,
            })
        } else {
            Err(deviation)
        }
    }

    pub fn weights(&self) -> Vec<f64> {
        self.multiplicities.iter().map(|&l| l as f64 * self.unit).collect()
    }

    pub fn support(&self) -> Vec<usize> {
        self.multiplicities
            .iter()
            .enumerate()
            .filter(|(_, &l)| l > 0)
            .map(|(i, _)| i)
            .collect()
    }

    /// `achieved_a / (δ/ε_quant²)`.
    pub fn scale_ratio(&self) -> f64 {
        self.achieved_a / self.theoretical_scale
    }
}

/// Geometric ratio between consecutive values of `a` in the search.
const A_GRID_RATIO: f64 = 1.189_207_115_002_721; // 2^{1/4}

/// Multinomial draw counts for `draws` samples from `probs`, by sequential binomials.
fn multinomial_counts(rng: &mut ChaCha8Rng, draws: u64, probs: &[f64]) -> Vec<u64> {
    let mut remaining = draws;
    let mut mass = 1.0;
    let mut counts = Vec::with_capacity(probs.len());
    for (k, &p) in probs.iter().enumerate() {
        if k + 1 == probs.len() {
            counts.push(remaining);
            break;
        }
        let q = if mass > 0.0 { (p / mass).clamp(0.0, 1.0) } else { 0.0 };
        let c = if remaining == 0 || q == 0.0 {
            0
        } else {
            Binomial::new(remaining, q).expect("valid binomial").sample(rng)
        };
        counts.push(c);
        remaining -= c;
        mass -= p;
    }
    counts
}

/// Replaces the weights of `weighted` by integer multiples of a unit `b = 1/a`.
///
/// The unit is searched geometrically from `δ/ε²` up to `64·ln(2n)·δ/ε²`;
/// for each candidate `a`, `trials` multinomial samples of size
/// `round(a·Σ s_i)` are drawn from `s_i/Σ s_j` and the first one whose
/// operator-norm deviation beats `ε_quant` is returned. Trial `t` at level
/// `k` uses ChaCha stream `k·trials + t` of `seed`, so the output does not
/// depend on scheduling.
pub fn quantize_weights(weighted: &WeightedFrame, cfg: &QuantizeConfig) -> Result<QuantizedFrame> {
    let eps = cfg.eps_quant;
    if !(eps > 0.0 && eps < 1.0) {
        return Err(FrameError::validation(format!("eps_quant must lie in (0, 1), got {eps}")));
    }
    if cfg.trials == 0 {
        return Err(FrameError::validation("at least one quantization trial is required"));
    }
    let base = &weighted.base;
    let support = support_of(&weighted.weights);
    if support.is_empty() {
        return Err(FrameError::validation("all weights are zero"));
    }
    let delta = base.max_norm_sqr();
    let scale = delta / (eps * eps);
    let n = base.dim().max(1) as f64;
    let a_max = 64.0 * (2.0 * n).ln().max(1.0) * scale;
    let target = weighted.frame_operator();

    // Equal weights are exactly representable.
    let s0 = weighted.weights[support[0]];
    if support.iter().all(|&i| weighted.weights[i] == s0) {
        let l = (scale * s0).ceil().max(1.0);
        let mult: Vec<u64> = weighted
            .weights
            .iter()
            .map(|&w| if w == 0.0 { 0 } else { l as u64 })
            .collect();
        if let Ok(q) = QuantizedFrame::certified(base, &target, mult, l / s0, s0 / l, scale, eps) {
            return Ok(q);
        }
    }

    let total: f64 = support.iter().map(|&i| weighted.weights[i]).sum();
    let probs: Vec<f64> = support.iter().map(|&i| weighted.weights[i] / total).collect();

    let mut best = f64::INFINITY;
    let mut level = 0u64;
    let mut a = scale;
    loop {
        let draws = (a * total).round().max(1.0) as u64;
        let outcomes: Vec<std::result::Result<QuantizedFrame, f64>> = (0..cfg.trials as u64)
            .into_par_iter()
            .map(|trial| {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                rng.set_stream(level * cfg.trials as u64 + trial);
                let counts = multinomial_counts(&mut rng, draws, &probs);
                let mut mult = vec![0u64; base.len()];
                for (&i, &c) in support.iter().zip(&counts) {
                    mult[i] = c;
                }
                QuantizedFrame::certified(base, &target, mult, a, 1.0 / a, scale, eps)
            })
            .collect();
        for outcome in outcomes {
            match outcome {
                Ok(q) => return Ok(q),
                Err(dev) => best = best.min(dev),
            }
        }
        if a >= a_max {
            break;
        }
        level += 1;
        a = (a * A_GRID_RATIO).min(a_max);
    }
    Err(FrameError::Quantization {
        best_deviation: best,
        eps_quant: eps,
    })
}
