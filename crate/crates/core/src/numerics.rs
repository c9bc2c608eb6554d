//! Dense complex linear algebra: Hermitian eigendecomposition by cyclic
//! Jacobi rotations, singular values through the Gram matrix, and resolvent
//! quadratic forms / traces used by the barrier potentials.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{FrameError, Result};

/// Numerical tolerances shared by every module.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Allowed Hermitian asymmetry, relative to `max(1, max |a_ij|)`.
    pub hermitian: f64,
    /// Allowed `‖Σ v_i v_i* − I‖` for a Parseval family.
    pub parseval: f64,
    /// Relative spread allowed between squared row norms of an equal-norm family.
    pub equal_norm: f64,
    /// Minimum distance between a resolvent shift and the spectrum.
    pub resolvent_gap: f64,
    /// Slack granted to spectral bounds after sparsification.
    pub spectral_slack: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            hermitian: 1e-14,
            parseval: 1e-10,
            equal_norm: 1e-10,
            resolvent_gap: 1e-12,
            spectral_slack: 1e-9,
        }
    }
}

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows * cols != data.len() {
            return Err(FrameError::validation(format!(
                "matrix shape {rows}x{cols} does not match {} entries",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(FrameError::validation(format!(
                "matrix entry ({}, {}) is not finite",
                pos / cols.max(1),
                pos % cols.max(1)
            )));
        }
        Ok(ComplexMatrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        ComplexMatrix { rows, cols, data }
    }

    /// Builds a matrix whose rows are the given vectors.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(FrameError::validation("rows have unequal lengths"));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, z: Complex64) {
        self.data[i * self.cols + j] = z;
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn conj(&self) -> Self {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(Complex64::conj).collect(),
        }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    pub fn scale(&self, factor: f64) -> Self {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn matmul(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        if self.cols != other.rows {
            return Err(FrameError::validation(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = ComplexMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let orow = other.row(k);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.cols, "matvec dimension mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `M* M`, assembled from its upper triangle so the result is exactly Hermitian.
    pub fn gram(&self) -> HermitianMatrix {
        let n = self.cols;
        let mut data = vec![Complex64::new(0.0, 0.0); n * n];
        for r in 0..self.rows {
            let row = self.row(r);
            for i in 0..n {
                let ci = row[i].conj();
                for j in i..n {
                    data[i * n + j] += ci * row[j];
                }
            }
        }
        for i in 0..n {
            data[i * n + i].im = 0.0;
            for j in (i + 1)..n {
                data[j * n + i] = data[i * n + j].conj();
            }
        }
        HermitianMatrix { dim: n, data }
    }

    /// `M M*`.
    pub fn outer_gram(&self) -> HermitianMatrix {
        self.adjoint().gram()
    }

    pub fn select_rows(&self, idx: &[usize]) -> ComplexMatrix {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        ComplexMatrix {
            rows: idx.len(),
            cols: self.cols,
            data,
        }
    }

    pub fn select_cols(&self, idx: &[usize]) -> ComplexMatrix {
        Self::from_fn(self.rows, idx.len(), |i, j| self.get(i, idx[j]))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt()
    }

    pub fn to_file(&self) -> MatrixFile {
        MatrixFile {
            rows: self.rows,
            cols: self.cols,
            re: self.data.iter().map(|z| z.re).collect(),
            im: self.data.iter().map(|z| z.im).collect(),
        }
    }

    pub fn from_file(file: &MatrixFile) -> Result<Self> {
        let expected = file.rows * file.cols;
        if file.re.len() != expected {
            return Err(FrameError::validation(format!(
                "field `re` has {} entries, expected rows*cols = {expected}",
                file.re.len()
            )));
        }
        if file.im.len() != expected {
            return Err(FrameError::validation(format!(
                "field `im` has {} entries, expected rows*cols = {expected}",
                file.im.len()
            )));
        }
        let data = file
            .re
            .iter()
            .zip(&file.im)
            .map(|(&re, &im)| Complex64::new(re, im))
            .collect();
        Self::new(file.rows, file.cols, data)
    }
}

/// On-disk matrix layout: row-major real and imaginary parts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub rows: usize,
    pub cols: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

/// Square Hermitian matrix, stored densely.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl HermitianMatrix {
    /// Validates Hermitian symmetry against `tol · max(1, max |a_ij|)` and
    /// symmetrizes the stored entries.
    pub fn new(dim: usize, data: Vec<Complex64>, tol: f64) -> Result<Self> {
        let m = ComplexMatrix::new(dim, dim, data)?;
        Self::from_matrix(&m, tol)
    }

    pub fn from_matrix(m: &ComplexMatrix, tol: f64) -> Result<Self> {
        if m.rows() != m.cols() {
            return Err(FrameError::validation(format!(
                "Hermitian matrix must be square, got {}x{}",
                m.rows(),
                m.cols()
            )));
        }
        let n = m.rows();
        let scale = m.data().iter().map(|z| z.norm()).fold(1.0_f64, f64::max);
        let mut data = m.data().to_vec();
        for i in 0..n {
            for j in i..n {
                let a = m.get(i, j);
                let b = m.get(j, i).conj();
                if (a - b).norm() > tol * scale {
                    return Err(FrameError::validation(format!(
                        "matrix is not Hermitian at ({i}, {j}): |a_ij - conj(a_ji)| = {:e}",
                        (a - b).norm()
                    )));
                }
                let avg = (a + b) * 0.5;
                data[i * n + j] = avg;
                data[j * n + i] = avg.conj();
            }
            data[i * n + i].im = 0.0;
        }
        Ok(HermitianMatrix { dim: n, data })
    }

    pub fn zeros(dim: usize) -> Self {
        HermitianMatrix {
            dim,
            data: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut h = Self::zeros(dim);
        for i in 0..dim {
            h.data[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        h
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let mut h = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            h.data[i * diag.len() + i] = Complex64::new(d, 0.0);
        }
        h
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.dim + j]
    }

    pub fn as_matrix(&self) -> ComplexMatrix {
        ComplexMatrix {
            rows: self.dim,
            cols: self.dim,
            data: self.data.clone(),
        }
    }

    /// `self + t v v*`.
    pub fn rank_one_update(&self, t: f64, v: &[Complex64]) -> HermitianMatrix {
        let mut out = self.clone();
        out.add_rank_one(t, v);
        out
    }

    pub fn add_rank_one(&mut self, t: f64, v: &[Complex64]) {
        let n = self.dim;
        assert_eq!(v.len(), n, "rank-one update dimension mismatch");
        for i in 0..n {
            let vi = v[i] * t;
            for j in i..n {
                let z = vi * v[j].conj();
                self.data[i * n + j] += z;
                if i != j {
                    self.data[j * n + i] += z.conj();
                }
            }
            self.data[i * n + i].im = 0.0;
        }
    }

    pub fn sub(&self, other: &HermitianMatrix) -> HermitianMatrix {
        assert_eq!(self.dim, other.dim);
        HermitianMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i].re).sum()
    }

    pub fn eigen(&self) -> EigenDecomposition {
        jacobi_eigen(self)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.eigen().values
    }

    /// Spectral norm, `max |λ_i|`.
    pub fn operator_norm(&self) -> f64 {
        self.eigenvalues().iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
    }
}

/// Which side of the spectrum a resolvent shift lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// `shift > λ_max`, resolvent `(shift·I − A)^{-1}`.
    Upper,
    /// `shift < λ_min`, resolvent `(A − shift·I)^{-1}`.
    Lower,
}

/// `A = Q diag(values) Q*` with ascending eigenvalues; eigenvectors are the
/// columns of `vectors`.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl EigenDecomposition {
    fn gaps(&self, shift: f64, side: Side, min_gap: f64) -> Result<Vec<f64>> {
        let gaps: Vec<f64> = self
            .values
            .iter()
            .map(|&lam| match side {
                Side::Upper => shift - lam,
                Side::Lower => lam - shift,
            })
            .collect();
        let worst = gaps.iter().copied().fold(f64::INFINITY, f64::min);
        if !(worst > min_gap) {
            return Err(FrameError::Singular { shift, gap: worst });
        }
        Ok(gaps)
    }

    /// `Q* v`.
    pub fn coordinates(&self, v: &[Complex64]) -> Vec<Complex64> {
        let n = self.values.len();
        assert_eq!(v.len(), n);
        (0..n)
            .map(|k| (0..n).map(|i| self.vectors.get(i, k).conj() * v[i]).sum())
            .collect()
    }

    /// Quadratic resolvent form from precomputed eigen-coordinates `w = Q* v`.
    pub fn resolvent_form_coords(
        &self,
        shift: f64,
        side: Side,
        w: &[Complex64],
        power: i32,
        min_gap: f64,
    ) -> Result<f64> {
        let gaps = self.gaps(shift, side, min_gap)?;
        Ok(w.iter()
            .zip(&gaps)
            .map(|(wk, g)| wk.norm_sqr() / g.powi(power))
            .sum())
    }

    pub fn resolvent_form(&self, shift: f64, side: Side, v: &[Complex64], power: i32, min_gap: f64) -> Result<f64> {
        let w = self.coordinates(v);
        self.resolvent_form_coords(shift, side, &w, power, min_gap)
    }

    pub fn resolvent_trace(&self, shift: f64, side: Side, min_gap: f64) -> Result<f64> {
        Ok(self.gaps(shift, side, min_gap)?.iter().map(|g| 1.0 / g).sum())
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.values.len();
        ComplexMatrix::from_fn(n, n, |i, j| {
            (0..n)
                .map(|k| self.vectors.get(i, k) * self.values[k] * self.vectors.get(j, k).conj())
                .sum()
        })
    }
}

const MAX_SWEEPS: usize = 100;

/// Cyclic Jacobi eigendecomposition with a fixed row-major sweep order.
fn jacobi_eigen(h: &HermitianMatrix) -> EigenDecomposition {
    let n = h.dim;
    let mut a = h.data.clone();
    let mut v = ComplexMatrix::identity(n);
    let total = h.frobenius_norm();

    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= f64::EPSILON * 1e-2 * total || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let g = a[p * n + q];
                let r = g.norm();
                if r == 0.0 {
                    continue;
                }
                let app = a[p * n + p].re;
                let aqq = a[q * n + q].re;
                // Converged pair: the off-diagonal entry is lost in the diagonal.
                if r < f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
                    a[p * n + q] = Complex64::new(0.0, 0.0);
                    a[q * n + p] = Complex64::new(0.0, 0.0);
                    continue;
                }
                let phase = g / r;
                let theta = (aqq - app) / (2.0 * r);
                let t = if theta.is_infinite() {
                    0.0
                } else {
                    let sgn = if theta >= 0.0 { 1.0 } else { -1.0 };
                    sgn / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let e_neg = phase.conj();

                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    let new_kp = akp * c - akq * e_neg * s;
                    let new_kq = akp * s + akq * e_neg * c;
                    a[k * n + p] = new_kp;
                    a[k * n + q] = new_kq;
                    a[p * n + k] = new_kp.conj();
                    a[q * n + k] = new_kq.conj();
                }
                a[p * n + p] = Complex64::new(app - t * r, 0.0);
                a[q * n + q] = Complex64::new(aqq + t * r, 0.0);
                a[p * n + q] = Complex64::new(0.0, 0.0);
                a[q * n + p] = Complex64::new(0.0, 0.0);

                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, vkp * c - vkq * e_neg * s);
                    v.set(k, q, vkp * s + vkq * e_neg * c);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].re.total_cmp(&a[j * n + j].re));
    let values = order.iter().map(|&i| a[i * n + i].re).collect();
    let vectors = v.select_cols(&order);
    EigenDecomposition { values, vectors }
}

/// All eigenvalues of a Hermitian matrix in ascending order.
pub fn hermitian_eigenvalues(a: &HermitianMatrix) -> Vec<f64> {
    a.eigenvalues()
}

/// Singular values in descending order; `min(rows, cols)` of them.
pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    let gram = if m.rows() >= m.cols() { m.gram() } else { m.outer_gram() };
    let mut sv: Vec<f64> = gram.eigenvalues().into_iter().map(|x| x.max(0.0).sqrt()).collect();
    sv.reverse();
    sv
}

/// Squared extreme singular values `(σ_min², σ_max²)` of `m`, taken over the
/// column space (zero when `m` has fewer rows than columns).
pub fn squared_singular_extremes(m: &ComplexMatrix) -> (f64, f64) {
    if m.rows() == 0 || m.cols() == 0 {
        return (0.0, 0.0);
    }
    let eig = m.gram().eigenvalues();
    let lo = if m.rows() < m.cols() { 0.0 } else { eig[0].max(0.0) };
    (lo, eig[eig.len() - 1].max(0.0))
}

/// `v* (±(shift·I − A))^{-power} v` for `power ∈ {1, 2}`.
pub fn shifted_inverse_quadratic(
    a: &HermitianMatrix,
    shift: f64,
    side: Side,
    v: &[Complex64],
    power: i32,
    tol: &Tolerances,
) -> Result<f64> {
    if !(power == 1 || power == 2) {
        return Err(FrameError::validation(format!("power must be 1 or 2, got {power}")));
    }
    if v.len() != a.dim() {
        return Err(FrameError::validation("vector length does not match matrix dimension"));
    }
    a.eigen().resolvent_form(shift, side, v, power, tol.resolvent_gap)
}

/// Barrier potential: `tr((shift·I − A)^{-1})` (upper) or `tr((A − shift·I)^{-1})` (lower).
pub fn trace_of_inverse(a: &HermitianMatrix, shift: f64, side: Side, tol: &Tolerances) -> Result<f64> {
    a.eigen().resolvent_trace(shift, side, tol.resolvent_gap)
}

/// Neumaier-compensated summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl std::iter::FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::default();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// `exp(2πi·numerator/m)` with the numerator reduced mod `m` before the float conversion.
pub fn unit_root(numerator: i64, m: u64) -> Complex64 {
    let m_i = m as i64;
    let r = numerator.rem_euclid(m_i);
    let angle = 2.0 * std::f64::consts::PI * (r as f64) / (m as f64);
    Complex64::from_polar(1.0, angle)
}
