//! Unweighted subframes of equal-norm Parseval frames.
//!
//! Sparsify with `d = 1 + ε`, quantize the weights with
//! `ε_quant = ½(1 − 1/√(1+ε))²`, and keep the support of the quantized
//! multiplicities. The kept vectors form an unweighted frame with at most
//! `⌈(1+ε)n⌉` elements; its bounds are measured, not assumed.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{FrameError, Result};
use crate::numerics::{squared_singular_extremes, ComplexMatrix, Tolerances};
use crate::sparsifier::{bss_sparsify, quantize_weights, FrameFamily, QuantizeConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectConfig {
    pub trials: usize,
    pub seed: u64,
    pub tol: Tolerances,
}

impl Default for SelectConfig {
    fn default() -> Self {
        SelectConfig {
            trials: 16,
            seed: 0,
            tol: Tolerances::default(),
        }
    }
}

/// `⌈(1+ε)n⌉`.
pub fn cardinality_budget(n: usize, eps: f64) -> usize {
    ((1.0 + eps) * n as f64 - 1e-9).ceil() as usize
}

/// `½(1 − 1/√(1+ε))²`.
pub fn quantization_tolerance(eps: f64) -> f64 {
    0.5 * (1.0 - 1.0 / (1.0 + eps).sqrt()).powi(2)
}

/// Summary of the quantization that produced a subset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantizationSummary {
    pub achieved_a: f64,
    pub theoretical_scale: f64,
    pub deviation: f64,
    pub eps_quant: f64,
    pub weighted_support: usize,
}

#[derive(Debug, Clone)]
pub struct SubsetFrame {
    pub base: FrameFamily,
    /// Selected indices, ascending.
    pub indices: Vec<usize>,
    /// `(A, B)` of `Σ_{i∈J} v_i v_i*`.
    pub bounds: (f64, f64),
    pub epsilon: f64,
    pub budget: usize,
    pub quantization: QuantizationSummary,
}

fn check_equal_norms(frame: &FrameFamily, tol: &Tolerances) -> Result<()> {
    let norms: Vec<f64> = (0..frame.len()).map(|i| frame.norm_sqr(i)).collect();
    let lo = norms.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = norms.iter().copied().fold(0.0, f64::max);
    if !(lo > 0.0) || (hi - lo) > tol.equal_norm * hi {
        return Err(FrameError::validation(format!(
            "vectors must have equal norms (squared norms span [{lo:e}, {hi:e}])"
        )));
    }
    Ok(())
}

/// Extracts an unweighted subframe of an equal-norm Parseval frame.
pub fn extract_unweighted(frame: &FrameFamily, eps: f64, cfg: &SelectConfig) -> Result<SubsetFrame> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(FrameError::validation(format!("epsilon must be positive, got {eps}")));
    }
    check_equal_norms(frame, &cfg.tol)?;
    let weighted = bss_sparsify(frame, 1.0 + eps, &cfg.tol)?;
    let eps_quant = quantization_tolerance(eps);
    let quantized = quantize_weights(
        &weighted,
        &QuantizeConfig {
            eps_quant,
            trials: cfg.trials,
            seed: cfg.seed,
        },
    )?;
    let indices = quantized.support();
    if indices.is_empty() {
        return Err(FrameError::Quantization {
            best_deviation: quantized.deviation,
            eps_quant,
        });
    }
    let mut ones = vec![0.0; frame.len()];
    for &i in &indices {
        ones[i] = 1.0;
    }
    let ev = frame.frame_operator(&ones).eigenvalues();
    Ok(SubsetFrame {
        base: frame.clone(),
        bounds: (ev[0].max(0.0), ev[ev.len() - 1]),
        budget: cardinality_budget(frame.dim(), eps),
        epsilon: eps,
        quantization: QuantizationSummary {
            achieved_a: quantized.achieved_a,
            theoretical_scale: quantized.theoretical_scale,
            deviation: quantized.deviation,
            eps_quant,
            weighted_support: weighted.support.len(),
        },
        indices,
    })
}

/// Row subset of a matrix with orthonormal columns and equal row norms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubmatrixSelection {
    pub indices: Vec<usize>,
    /// `(σ_min², σ_max²)` of `M(J)`.
    pub bounds: (f64, f64),
    pub budget: usize,
    pub epsilon: f64,
    pub quantization: QuantizationSummary,
}

/// Selects rows `J` with `#J ≤ ⌈(1+ε)n⌉` so that `M(J)` stays injective.
///
/// `M(J)` is the analysis operator of the conjugated rows, so the conjugates
/// go through [`extract_unweighted`] and the bounds come from `M(J)` itself.
pub fn submatrix_select(m: &ComplexMatrix, eps: f64, cfg: &SelectConfig) -> Result<SubmatrixSelection> {
    let frame = FrameFamily::new(m.conj());
    frame.check_parseval(&cfg.tol).map_err(|_| {
        FrameError::validation(format!(
            "matrix columns are not orthonormal (‖M*M − I‖ = {:e})",
            frame.parseval_deviation()
        ))
    })?;
    let subset = extract_unweighted(&frame, eps, cfg)?;
    let bounds = squared_singular_extremes(&m.select_rows(&subset.indices));
    Ok(SubmatrixSelection {
        indices: subset.indices,
        bounds,
        budget: subset.budget,
        epsilon: eps,
        quantization: subset.quantization,
    })
}

/// Best subset found by exhaustive search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub indices: Vec<usize>,
    pub best_lower: f64,
    pub subsets_checked: u64,
}

/// Largest `σ_min(M(J))²` over all `J` with `#J ≤ max_card`.
///
/// Adding rows never decreases `σ_min`, so only subsets of size
/// `min(max_card, m)` are enumerated.
pub fn exhaustive_best_subset(m: &ComplexMatrix, max_card: usize) -> Result<OracleResult> {
    let rows = m.rows();
    if rows > 24 {
        return Err(FrameError::validation(format!(
            "exhaustive search is limited to 24 rows, got {rows}"
        )));
    }
    let k = max_card.min(rows);
    let masks: Vec<u32> = (0u32..(1u32 << rows)).filter(|s| s.count_ones() as usize == k).collect();
    let checked = masks.len() as u64;
    let (best_mask, best_lower) = masks
        .par_iter()
        .map(|&mask| {
            let idx: Vec<usize> = (0..rows).filter(|i| mask >> i & 1 == 1).collect();
            (mask, squared_singular_extremes(&m.select_rows(&idx)).0)
        })
        .reduce(
            || (u32::MAX, f64::NEG_INFINITY),
            |a, b| {
                if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) {
                    b
                } else {
                    a
                }
            },
        );
    Ok(OracleResult {
        indices: (0..rows).filter(|i| best_mask >> i & 1 == 1).collect(),
        best_lower,
        subsets_checked: checked,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expframe_line::dft_submatrix;

    fn normalized_dft_columns(m: usize, cols: &[usize]) -> ComplexMatrix {
        dft_submatrix(m, cols).scale(1.0 / (m as f64).sqrt())
    }

    #[test]
    fn orthonormal_basis_keeps_everything() {
        let frame = FrameFamily::new(ComplexMatrix::identity(4));
        let s = extract_unweighted(&frame, 1.0, &SelectConfig::default()).unwrap();
        assert_eq!(s.indices, vec![0, 1, 2, 3]);
        assert!((s.bounds.0 - 1.0).abs() < 1e-12 && (s.bounds.1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn full_dft_selects_all_rows() {
        let m = normalized_dft_columns(4, &[0, 1, 2, 3]);
        let sel = submatrix_select(&m, 0.5, &SelectConfig::default()).unwrap();
        assert_eq!(sel.indices.len(), 4);
        assert!((sel.bounds.0 - 1.0).abs() < 1e-12 && (sel.bounds.1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_columns_of_dft8() {
        let m = normalized_dft_columns(8, &[0, 1]);
        let sel = submatrix_select(&m, 1.0, &SelectConfig::default()).unwrap();
        assert!(sel.indices.len() <= 4);
        assert!(sel.bounds.0 > 0.0);
        let oracle = exhaustive_best_subset(&m, 4).unwrap();
        assert!(oracle.best_lower >= sel.bounds.0 - 1e-12);
    }

    #[test]
    fn rejects_unequal_norms() {
        let rows = vec![
            vec![num_complex::Complex64::new(0.6, 0.0)],
            vec![num_complex::Complex64::new(0.8, 0.0)],
        ];
        let frame = FrameFamily::from_rows(&rows).unwrap();
        assert!(matches!(
            extract_unweighted(&frame, 1.0, &SelectConfig::default()),
            Err(FrameError::Validation(_))
        ));
    }

    #[test]
    fn rejects_non_orthonormal_columns() {
        let m = dft_submatrix(4, &[0, 1]);
        assert!(matches!(
            submatrix_select(&m, 1.0, &SelectConfig::default()),
            Err(FrameError::Validation(_))
        ));
    }

    #[test]
    fn budget_and_quantization_tolerance() {
        assert_eq!(cardinality_budget(3, 0.5), 5);
        assert_eq!(cardinality_budget(4, 1.0), 8);
        assert_eq!(cardinality_budget(8, 0.125), 9);
        assert!((quantization_tolerance(3.0) - 0.125).abs() < 1e-15);
    }
}
