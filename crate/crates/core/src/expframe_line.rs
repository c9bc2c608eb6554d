//! Exponential frames for spectra on the real line.
//!
//! A spectrum is covered by cells `[k/m, (k+1)/m]`, `k ∈ I`. Selecting rows
//! `J` of the DFT submatrix `F_I` gives `Λ = ⋃_{j∈J} (j + mℤ)`, and for every
//! `f ∈ L²(Ω)` the frame sum equals `(1/m)∫₀^{1/m} ‖F_I(J) g(x)‖² dx` with
//! `g(x) = (f(x + k/m))_{k∈I}`. The optimal frame bounds are therefore exactly
//! `σ_min(F_I(J))²/m` and `σ_max(F_I(J))²/m`.

use std::collections::BTreeSet;

use num_complex::Complex64;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::density::{beurling_bounds, PointSet1D};
use crate::error::{FrameError, Result};
use crate::frame_select::{cardinality_budget, submatrix_select, QuantizationSummary, SelectConfig};
use crate::numerics::{squared_singular_extremes, unit_root, CompensatedSum, ComplexMatrix};

pub type Rational = Ratio<i64>;

/// Largest grid order tried by [`cover_by_grid`].
pub const MAX_GRID_EXPONENT: u32 = 20;

/// `Ω = ⋃_{k∈I} [k/m, (k+1)/m]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpectrum {
    m: usize,
    cells: Vec<usize>,
}

impl GridSpectrum {
    pub fn new(m: usize, cells: impl IntoIterator<Item = usize>) -> Result<Self> {
        if m == 0 {
            return Err(FrameError::validation("grid order m must be positive"));
        }
        let mut cells: Vec<usize> = cells.into_iter().collect();
        let len = cells.len();
        cells.sort_unstable();
        cells.dedup();
        if cells.len() != len {
            return Err(FrameError::validation("grid cells contain duplicates"));
        }
        if cells.is_empty() {
            return Err(FrameError::validation("grid spectrum has no cells"));
        }
        if let Some(&k) = cells.iter().find(|&&k| k >= m) {
            return Err(FrameError::validation(format!("cell {k} is outside 0..{m}")));
        }
        Ok(GridSpectrum { m, cells })
    }

    pub fn full(m: usize) -> Self {
        GridSpectrum {
            m,
            cells: (0..m).collect(),
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn cells(&self) -> &[usize] {
        &self.cells
    }

    pub fn n(&self) -> usize {
        self.cells.len()
    }

    pub fn measure(&self) -> f64 {
        self.n() as f64 / self.m as f64
    }

    pub fn measure_exact(&self) -> Rational {
        Rational::new(self.n() as i64, self.m as i64)
    }

    /// `⌈(1+ε/2)n⌉ ≤ (1+ε)n`.
    pub fn admits_budget(&self, eps: f64) -> bool {
        budget_split_ok(self.n(), eps)
    }
}

fn budget_split_ok(n: usize, eps: f64) -> bool {
    cardinality_budget(n, eps / 2.0) as f64 <= (1.0 + eps) * n as f64 + 1e-9
}

/// Finite union of closed intervals with rational endpoints inside a window of length `d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalSpectrum {
    intervals: Vec<(Rational, Rational)>,
    dilation: Rational,
}

impl IntervalSpectrum {
    /// Sorts the intervals, checks that they are nondegenerate and pairwise
    /// disjoint (shared endpoints allowed), and that they span at most `d`.
    pub fn new(mut intervals: Vec<(Rational, Rational)>, dilation: Rational) -> Result<Self> {
        if dilation <= Rational::from_integer(0) {
            return Err(FrameError::validation("dilation d must be positive"));
        }
        if intervals.is_empty() {
            return Err(FrameError::validation("spectrum has no intervals"));
        }
        if let Some((a, b)) = intervals.iter().find(|(a, b)| a >= b) {
            return Err(FrameError::validation(format!("interval [{a}, {b}] is empty")));
        }
        intervals.sort();
        for w in intervals.windows(2) {
            if w[1].0 < w[0].1 {
                return Err(FrameError::validation(format!(
                    "intervals [{}, {}] and [{}, {}] overlap",
                    w[0].0, w[0].1, w[1].0, w[1].1
                )));
            }
        }
        let span = intervals.last().expect("nonempty").1 - intervals[0].0;
        if span > dilation {
            return Err(FrameError::validation(format!(
                "intervals span {span}, more than the dilation d = {dilation}"
            )));
        }
        Ok(IntervalSpectrum { intervals, dilation })
    }

    pub fn intervals(&self) -> &[(Rational, Rational)] {
        &self.intervals
    }

    pub fn dilation(&self) -> Rational {
        self.dilation
    }

    pub fn length(&self) -> Rational {
        self.intervals.iter().map(|(a, b)| b - a).sum()
    }

    pub fn translate(&self, x: Rational) -> Self {
        IntervalSpectrum {
            intervals: self.intervals.iter().map(|(a, b)| (a + x, b + x)).collect(),
            dilation: self.dilation,
        }
    }

    /// Moves the left end to 0 and divides by `d`; the result lies in `[0, 1]`.
    pub fn normalized(&self) -> Vec<(Rational, Rational)> {
        let origin = self.intervals[0].0;
        self.intervals
            .iter()
            .map(|(a, b)| ((a - origin) / self.dilation, (b - origin) / self.dilation))
            .collect()
    }
}

fn floor_mul(x: Rational, m: i128) -> i128 {
    let num = *x.numer() as i128 * m;
    num.div_euclid(*x.denom() as i128)
}

fn ceil_mul(x: Rational, m: i128) -> i128 {
    let den = *x.denom() as i128;
    let num = *x.numer() as i128 * m;
    -((-num).div_euclid(den))
}

/// Smallest `m = 2^p` whose cell cover of the normalized spectrum has measure
/// at most `(1 + slack)·|Ω|/d` and whose cell count satisfies
/// `⌈(1+ε/2)n⌉ ≤ (1+ε)n`. Cells touching the spectrum only at an endpoint are
/// not included.
pub fn cover_by_grid(spec: &IntervalSpectrum, eps: f64, slack: f64) -> Result<GridSpectrum> {
    if !(eps > 0.0) {
        return Err(FrameError::validation(format!("epsilon must be positive, got {eps}")));
    }
    if !(slack > 0.0 && slack < 1.0) {
        return Err(FrameError::validation(format!("slack must lie in (0, 1), got {slack}")));
    }
    let unit = spec.normalized();
    let length = spec.length() / spec.dilation();
    let mut last = None;
    for p in 0..=MAX_GRID_EXPONENT {
        let m = 1i128 << p;
        let mut cells = BTreeSet::new();
        for &(a, b) in &unit {
            let first = floor_mul(a, m).max(0);
            let end = ceil_mul(b, m).min(m);
            cells.extend((first..end).map(|k| k as usize));
        }
        let n = cells.len();
        // n/m ≤ (1 + slack)·length, with slack as a float: compare in f64 after exact reduction.
        let cover = Rational::new(n as i64, m as i64);
        let ratio = (*cover.numer() as f64 / *cover.denom() as f64)
            / (*length.numer() as f64 / *length.denom() as f64);
        last = Some((m, n, ratio));
        if ratio <= 1.0 + slack && budget_split_ok(n, eps) {
            return GridSpectrum::new(m as usize, cells);
        }
    }
    let (m, n, ratio) = last.expect("at least one grid tried");
    Err(FrameError::Cover(format!(
        "no grid up to m = {m} meets slack {slack} and the ε-budget (last: n = {n}, cover/|Ω| = {ratio})"
    )))
}

/// `F_{j,k} = exp(2πi·j·k/m)` for `j ∈ 0..m`, `k ∈ cols`.
pub fn dft_submatrix(m: usize, cols: &[usize]) -> ComplexMatrix {
    ComplexMatrix::from_fn(m, cols.len(), |j, c| unit_root((j * cols[c]) as i64, m as u64))
}

/// `Λ = d^{-1} · ⋃_{j∈J} (j + mℤ)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplingSet {
    m: usize,
    indices: Vec<usize>,
    dilation: Rational,
}

impl SamplingSet {
    pub fn new(m: usize, indices: impl IntoIterator<Item = usize>, dilation: Rational) -> Result<Self> {
        if m == 0 {
            return Err(FrameError::validation("sampling period m must be positive"));
        }
        if dilation <= Rational::from_integer(0) {
            return Err(FrameError::validation("dilation must be positive"));
        }
        let mut indices: Vec<usize> = indices.into_iter().collect();
        indices.sort_unstable();
        indices.dedup();
        if let Some(&j) = indices.iter().find(|&&j| j >= m) {
            return Err(FrameError::validation(format!("index {j} is outside 0..{m}")));
        }
        Ok(SamplingSet { m, indices, dilation })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn dilation(&self) -> Rational {
        self.dilation
    }

    /// Points per unit length: `#J · d / m`.
    pub fn density(&self) -> Rational {
        Rational::new(self.indices.len() as i64, self.m as i64) * self.dilation
    }

    /// All points of `Λ` in `[lo, hi]`, ascending.
    pub fn points_in(&self, lo: f64, hi: f64) -> Vec<f64> {
        let d = ratio_f64(self.dilation);
        let m = self.m as f64;
        let l_lo = ((lo * d) / m).floor() as i64 - 1;
        let l_hi = ((hi * d) / m).ceil() as i64 + 1;
        let mut pts = Vec::new();
        for l in l_lo..=l_hi {
            for &j in &self.indices {
                let x = (j as f64 + m * l as f64) / d;
                if x >= lo && x <= hi {
                    pts.push(x);
                }
            }
        }
        pts.sort_by(f64::total_cmp);
        pts
    }
}

pub fn ratio_f64(r: Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Exact frame bounds of a synthesized sampling set, with their normalized forms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameReport {
    pub a_exact: f64,
    pub b_exact: f64,
    /// `A_exact / |Ω|`.
    pub a_normalized: f64,
    pub b_normalized: f64,
    /// Measure of the grid cover `|Ω|`.
    pub measure: f64,
    pub card_j: usize,
    /// `⌈(1+ε/2)n⌉`.
    pub budget: usize,
    pub density: f64,
    pub epsilon: f64,
    pub quantization: QuantizationSummary,
}

/// Builds `Λ` for a grid spectrum in `[0, 1]`.
pub fn synthesize(grid: &GridSpectrum, eps: f64, cfg: &SelectConfig) -> Result<(SamplingSet, FrameReport)> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(FrameError::validation(format!("epsilon must be positive, got {eps}")));
    }
    if !grid.admits_budget(eps) {
        return Err(FrameError::validation(format!(
            "n = {} is too small for ε = {eps}: ⌈(1+ε/2)n⌉ exceeds (1+ε)n",
            grid.n()
        )));
    }
    let m = grid.m();
    let f_i = dft_submatrix(m, grid.cells());
    let sel = submatrix_select(&f_i.scale(1.0 / (m as f64).sqrt()), eps / 2.0, cfg)?;
    let (lo, hi) = squared_singular_extremes(&f_i.select_rows(&sel.indices));
    let sampling = SamplingSet::new(m, sel.indices.iter().copied(), Rational::from_integer(1))?;
    let measure = grid.measure();
    let a_exact = lo / m as f64;
    let b_exact = hi / m as f64;
    let report = FrameReport {
        a_exact,
        b_exact,
        a_normalized: a_exact / measure,
        b_normalized: b_exact / measure,
        measure,
        card_j: sel.indices.len(),
        budget: sel.budget,
        density: ratio_f64(sampling.density()),
        epsilon: eps,
        quantization: sel.quantization,
    };
    Ok((sampling, report))
}

/// Covers an interval spectrum, synthesizes on the unit grid, and dilates back:
/// `Λ = d^{-1}Λ'` and both frame bounds scale by `d`.
pub fn synthesize_intervals(
    spec: &IntervalSpectrum,
    eps: f64,
    slack: f64,
    cfg: &SelectConfig,
) -> Result<(GridSpectrum, SamplingSet, FrameReport)> {
    let grid = cover_by_grid(spec, eps, slack)?;
    let (unit, report) = synthesize(&grid, eps, cfg)?;
    let d = spec.dilation();
    let df = ratio_f64(d);
    let sampling = SamplingSet::new(unit.m(), unit.indices().iter().copied(), d)?;
    let report = FrameReport {
        a_exact: report.a_exact * df,
        b_exact: report.b_exact * df,
        measure: report.measure * df,
        density: ratio_f64(sampling.density()),
        ..report
    };
    Ok((grid, sampling, report))
}

/// `‖f‖² = Σ|c_k|²/m` for `f̂ = c_k` on cell `k`.
pub fn norm_sqr(grid: &GridSpectrum, coeffs: &[Complex64]) -> f64 {
    coeffs.iter().map(|c| c.norm_sqr()).collect::<CompensatedSum>().value() / grid.m() as f64
}

fn check_demo_inputs(grid: &GridSpectrum, sampling: &SamplingSet, coeffs: &[Complex64]) -> Result<()> {
    if coeffs.len() != grid.n() {
        return Err(FrameError::validation(format!(
            "expected {} cell coefficients, got {}",
            grid.n(),
            coeffs.len()
        )));
    }
    if sampling.m() != grid.m() || sampling.dilation() != Rational::from_integer(1) {
        return Err(FrameError::validation(
            "sampling set must share the grid order and have unit dilation",
        ));
    }
    Ok(())
}

/// `λ·k mod m` without overflow.
fn phase_index(lambda: i64, k: usize, m: u64) -> i64 {
    (lambda as i128 * k as i128).rem_euclid(m as i128) as i64
}

/// `⟨f, e_λ⟩ = ∫_Ω f(ξ) e^{-2πiλξ} dξ` for the cell-wise constant `f`.
pub fn frame_coefficient(grid: &GridSpectrum, coeffs: &[Complex64], lambda: i64) -> Complex64 {
    let m = grid.m() as u64;
    if lambda == 0 {
        return coeffs.iter().sum::<Complex64>() / grid.m() as f64;
    }
    // ∫_{k/m}^{(k+1)/m} e^{-2πiλξ} dξ = e^{-2πiλk/m} (e^{-2πiλ/m} − 1) / (−2πiλ)
    let kernel = (unit_root(-lambda, m) - 1.0) / Complex64::new(0.0, -2.0 * std::f64::consts::PI * lambda as f64);
    let sum: Complex64 = grid
        .cells()
        .iter()
        .zip(coeffs)
        .map(|(&k, c)| c * unit_root(phase_index(-lambda, k, m), m))
        .sum();
    sum * kernel
}

/// `Σ_{j∈J} Σ_{|l|≤L} |⟨f, e_{j+ml}⟩|²`.
pub fn frame_sum_truncated(
    grid: &GridSpectrum,
    sampling: &SamplingSet,
    coeffs: &[Complex64],
    l_max: u64,
) -> Result<f64> {
    check_demo_inputs(grid, sampling, coeffs)?;
    let mut acc = CompensatedSum::default();
    add_shell(grid, sampling, coeffs, 0, l_max, &mut acc);
    Ok(acc.value())
}

/// Adds the terms with `from ≤ |l| ≤ to` (and `l = 0` when `from = 0`).
///
/// For `λ = j + ml` the cell phases `e^{-2πiλk/m}` do not depend on `l`, so
/// `|⟨f, e_λ⟩|² = |S_j|² |e^{-2πij/m} − 1|² / (2πλ)²` with `S_j` computed once.
fn add_shell(grid: &GridSpectrum, sampling: &SamplingSet, coeffs: &[Complex64], from: u64, to: u64, acc: &mut CompensatedSum) {
    let m = grid.m() as i64;
    let two_pi = 2.0 * std::f64::consts::PI;
    for &j in sampling.indices() {
        let j = j as i64;
        let s_j: Complex64 = grid
            .cells()
            .iter()
            .zip(coeffs)
            .map(|(&k, c)| c * unit_root(-(j * k as i64 % m), m as u64))
            .sum();
        let numer = s_j.norm_sqr() * (unit_root(-j, m as u64) - 1.0).norm_sqr();
        for l in from..=to {
            let ls: &[i64] = if l == 0 { &[0] } else { &[l as i64, -(l as i64)] };
            for &l in ls {
                let lambda = j + m * l;
                let term = if lambda == 0 {
                    (coeffs.iter().sum::<Complex64>() / m as f64).norm_sqr()
                } else {
                    let w = two_pi * lambda as f64;
                    numer / (w * w)
                };
                acc.add(term);
            }
        }
    }
}

/// Limit of the truncated frame sum as `L → ∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergedSum {
    /// Extrapolated limit.
    pub value: f64,
    /// Plain truncated sum at the final `L`.
    pub truncated: f64,
    pub l_final: u64,
    /// Change of the extrapolated value over the last doubling.
    pub last_change: f64,
}

const RICHARDSON_ORDER: usize = 3;
const MAX_L: u64 = 1 << 16;

/// Doubles `L` from 8 until the extrapolated sum moves by less than `tol`.
///
/// The tail `Σ_{|l|>L}` has an expansion in powers of `1/L`, so each doubling
/// feeds a Richardson table that cancels the `1/L`, `1/L²`, `1/L³` terms.
pub fn converged_frame_sum(
    grid: &GridSpectrum,
    sampling: &SamplingSet,
    coeffs: &[Complex64],
    tol: f64,
) -> Result<ConvergedSum> {
    check_demo_inputs(grid, sampling, coeffs)?;
    let mut l = 8u64;
    let mut acc = CompensatedSum::default();
    add_shell(grid, sampling, coeffs, 0, l, &mut acc);
    let mut table: Vec<Vec<f64>> = vec![vec![acc.value()]];
    let mut prev_best: Option<f64> = None;
    loop {
        add_shell(grid, sampling, coeffs, l + 1, 2 * l, &mut acc);
        l *= 2;
        let prev = table.last().expect("nonempty");
        let mut row = vec![acc.value()];
        for order in 1..=RICHARDSON_ORDER.min(prev.len()) {
            let f = (1u64 << order) as f64;
            row.push((f * row[order - 1] - prev[order - 1]) / (f - 1.0));
        }
        let best = *row.last().expect("nonempty");
        let full = row.len() == RICHARDSON_ORDER + 1;
        table.push(row);
        if let (true, Some(p)) = (full, prev_best) {
            let change = (best - p).abs();
            if change < tol || l >= MAX_L {
                return Ok(ConvergedSum {
                    value: best,
                    truncated: acc.value(),
                    l_final: l,
                    last_change: change,
                });
            }
        }
        if full {
            prev_best = Some(best);
        }
    }
}

/// `f(x) = ∫_Ω f̂(ξ) e^{2πixξ} dξ` at integer `x`, from the cell values of `f̂`.
pub fn pw_value(grid: &GridSpectrum, coeffs: &[Complex64], x: i64) -> Complex64 {
    let m = grid.m() as u64;
    if x == 0 {
        return coeffs.iter().sum::<Complex64>() / grid.m() as f64;
    }
    let kernel = (unit_root(x, m) - 1.0) / Complex64::new(0.0, 2.0 * std::f64::consts::PI * x as f64);
    grid.cells()
        .iter()
        .zip(coeffs)
        .map(|(&k, c)| c * unit_root(phase_index(x, k, m), m))
        .sum::<Complex64>()
        * kernel
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PwSampleCheck {
    /// `Σ_{λ∈Λ, |λ|≤R} |f(λ)|²`.
    pub sample_energy: f64,
    pub norm_sqr: f64,
    /// `sample_energy / ‖f‖²`.
    pub ratio: f64,
    /// `ratio / A_exact`.
    pub lower_ratio: f64,
    /// `ratio / B_exact`.
    pub upper_ratio: f64,
    pub points: usize,
}

/// Samples the Paley–Wiener function at `λ = j + ml`, `j ∈ J`, `|l| ≤ ⌊R/m⌋`,
/// and compares the energy with the frame bounds. Since `f(λ) = ⟨f̂, e_{-λ}⟩`,
/// for real cell values the energy equals [`frame_sum_truncated`] with
/// `L = ⌊R/m⌋` term by term; otherwise it is the same sum over `−Λ`.
pub fn pw_sample_check(
    grid: &GridSpectrum,
    sampling: &SamplingSet,
    report: &FrameReport,
    coeffs: &[Complex64],
    radius: f64,
) -> Result<PwSampleCheck> {
    check_demo_inputs(grid, sampling, coeffs)?;
    if !(radius >= 0.0 && radius.is_finite()) {
        return Err(FrameError::validation("radius must be finite and nonnegative"));
    }
    let m = grid.m() as i64;
    let l_max = (radius / m as f64).floor() as i64;
    let pts: Vec<i64> = sampling
        .indices()
        .iter()
        .flat_map(|&j| (-l_max..=l_max).map(move |l| j as i64 + m * l))
        .collect();
    let energy = pts
        .iter()
        .map(|&x| pw_value(grid, coeffs, x).norm_sqr())
        .collect::<CompensatedSum>()
        .value();
    let nrm = norm_sqr(grid, coeffs);
    let ratio = energy / nrm;
    Ok(PwSampleCheck {
        sample_energy: energy,
        norm_sqr: nrm,
        ratio,
        lower_ratio: ratio / report.a_exact,
        upper_ratio: ratio / report.b_exact,
        points: pts.len(),
    })
}

/// Exact uniform density `#J·d/m`.
pub fn density_uniform(sampling: &SamplingSet) -> Rational {
    sampling.density()
}

/// Window estimate of `(D⁻, D⁺)` on `[0, 2r]`.
pub fn beurling_window_estimate(sampling: &SamplingSet, r: f64) -> Result<(f64, f64)> {
    if !(r > 0.0) {
        return Err(FrameError::validation("window length r must be positive"));
    }
    let window = (0.0, 2.0 * r);
    let points = PointSet1D::new(sampling.points_in(window.0, window.1))?;
    beurling_bounds(&points, window, r)
}
