//! Frames of characters on finite abelian groups `G = ℤ_{N_1} ⊕ … ⊕ ℤ_{N_r}`.
//!
//! The dual group is identified with `G` through `χ_a(x) = exp(2πi Σ a_k x_k / N_k)`.
//! Haar measure on `G` is counting measure and the dual carries counting
//! measure divided by `#H` for a reference subgroup `H` (by default `G`).

use std::collections::BTreeSet;

use num_complex::Complex64;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{FrameError, Result};
use crate::frame_select::{cardinality_budget, submatrix_select, QuantizationSummary, SelectConfig};
use crate::numerics::{squared_singular_extremes, unit_root, ComplexMatrix};

pub type Element = Vec<u64>;

/// Largest group order accepted.
pub const MAX_GROUP_ORDER: u64 = 1 << 20;

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteAbelianGroup {
    orders: Vec<u64>,
    lcm: u64,
}

impl FiniteAbelianGroup {
    pub fn new(orders: Vec<u64>) -> Result<Self> {
        if orders.is_empty() {
            return Err(FrameError::validation("group needs at least one factor"));
        }
        if orders.contains(&0) {
            return Err(FrameError::validation("factor orders must be positive"));
        }
        let mut size = 1u64;
        let mut lcm = 1u64;
        for &n in &orders {
            size = size.saturating_mul(n);
            lcm = lcm / gcd(lcm, n) * n;
        }
        if size > MAX_GROUP_ORDER {
            return Err(FrameError::validation(format!(
                "group order {size} exceeds the supported {MAX_GROUP_ORDER}"
            )));
        }
        Ok(FiniteAbelianGroup { orders, lcm })
    }

    pub fn orders(&self) -> &[u64] {
        &self.orders
    }

    pub fn rank(&self) -> usize {
        self.orders.len()
    }

    pub fn order(&self) -> u64 {
        self.orders.iter().product()
    }

    pub fn check_element(&self, x: &[u64]) -> Result<()> {
        if x.len() != self.rank() {
            return Err(FrameError::validation(format!(
                "element {x:?} has {} coordinates, the group has {}",
                x.len(),
                self.rank()
            )));
        }
        if let Some((k, (&xk, &n))) = x.iter().zip(&self.orders).enumerate().find(|(_, (&xk, &n))| xk >= n) {
            return Err(FrameError::validation(format!(
                "coordinate {k} of {x:?} is {xk}, outside ℤ_{n}"
            )));
        }
        Ok(())
    }

    pub fn add(&self, x: &[u64], y: &[u64]) -> Element {
        x.iter().zip(y).zip(&self.orders).map(|((a, b), n)| (a + b) % n).collect()
    }

    pub fn neg(&self, x: &[u64]) -> Element {
        x.iter().zip(&self.orders).map(|(a, n)| (n - a) % n).collect()
    }

    /// Mixed-radix position of `x`, last coordinate fastest.
    pub fn index_of(&self, x: &[u64]) -> usize {
        x.iter().zip(&self.orders).fold(0u64, |acc, (a, n)| acc * n + a) as usize
    }

    pub fn element(&self, mut index: usize) -> Element {
        let mut x = vec![0; self.rank()];
        for (k, &n) in self.orders.iter().enumerate().rev() {
            x[k] = index as u64 % n;
            index /= n as usize;
        }
        x
    }

    pub fn elements(&self) -> Vec<Element> {
        box_elements(&self.orders)
    }

    /// `χ_a(x)`, with the phase reduced exactly modulo the exponent of `G`.
    pub fn character(&self, a: &[u64], x: &[u64]) -> Complex64 {
        let l = self.lcm as u128;
        let phase = a
            .iter()
            .zip(x)
            .zip(&self.orders)
            .map(|((&ak, &xk), &n)| (ak as u128 * xk as u128 % n as u128) * (l / n as u128))
            .sum::<u128>()
            % l;
        unit_root(phase as i64, self.lcm)
    }

    /// Rows `x ∈ G`, columns `a ∈ Ĝ`, both in [`index_of`](Self::index_of) order.
    pub fn character_table(&self) -> ComplexMatrix {
        let els = self.elements();
        ComplexMatrix::from_fn(els.len(), els.len(), |i, j| self.character(&els[j], &els[i]))
    }

    pub fn trivial_subgroup(&self) -> BoxSubgroup {
        BoxSubgroup {
            orders: self.orders.clone(),
            divisors: self.orders.clone(),
        }
    }

    pub fn whole(&self) -> BoxSubgroup {
        BoxSubgroup {
            orders: self.orders.clone(),
            divisors: vec![1; self.rank()],
        }
    }
}

/// All tuples with `0 ≤ x_k < bounds_k`, last coordinate fastest.
fn box_elements(bounds: &[u64]) -> Vec<Element> {
    let total: u64 = bounds.iter().product();
    let mut out = Vec::with_capacity(total as usize);
    let mut x = vec![0u64; bounds.len()];
    for _ in 0..total {
        out.push(x.clone());
        for k in (0..bounds.len()).rev() {
            x[k] += 1;
            if x[k] < bounds[k] {
                break;
            }
            x[k] = 0;
        }
    }
    out
}

/// `H = ⨁ d_k ℤ_{N_k}` with `d_k | N_k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoxSubgroup {
    orders: Vec<u64>,
    divisors: Vec<u64>,
}

impl BoxSubgroup {
    pub fn new(group: &FiniteAbelianGroup, divisors: Vec<u64>) -> Result<Self> {
        if divisors.len() != group.rank() {
            return Err(FrameError::validation(format!(
                "{} divisors given for a group of rank {}",
                divisors.len(),
                group.rank()
            )));
        }
        for (k, (&d, &n)) in divisors.iter().zip(group.orders()).enumerate() {
            if d == 0 || n % d != 0 {
                return Err(FrameError::validation(format!(
                    "divisor {d} at coordinate {k} does not divide {n}"
                )));
            }
        }
        Ok(BoxSubgroup {
            orders: group.orders().to_vec(),
            divisors,
        })
    }

    pub fn divisors(&self) -> &[u64] {
        &self.divisors
    }

    pub fn order(&self) -> u64 {
        self.orders.iter().zip(&self.divisors).map(|(n, d)| n / d).product()
    }

    /// `[G : H] = Π d_k`.
    pub fn index(&self) -> u64 {
        self.divisors.iter().product()
    }

    pub fn contains(&self, x: &[u64]) -> bool {
        x.iter().zip(&self.divisors).all(|(a, d)| a % d == 0)
    }

    /// `H^⊥ = ⨁ (N_k/d_k) ℤ_{N_k}` in the dual.
    pub fn annihilator(&self) -> BoxSubgroup {
        BoxSubgroup {
            orders: self.orders.clone(),
            divisors: self.orders.iter().zip(&self.divisors).map(|(n, d)| n / d).collect(),
        }
    }

    /// `H ⊆ other` iff every divisor of `other` divides the matching divisor of `H`.
    pub fn is_subgroup_of(&self, other: &BoxSubgroup) -> bool {
        self.orders == other.orders && self.divisors.iter().zip(&other.divisors).all(|(d, e)| d % e == 0)
    }

    pub fn elements(&self) -> Vec<Element> {
        let steps: Vec<u64> = self.orders.iter().zip(&self.divisors).map(|(n, d)| n / d).collect();
        box_elements(&steps)
            .into_iter()
            .map(|x| x.iter().zip(&self.divisors).map(|(a, d)| a * d).collect())
            .collect()
    }

    /// Coset representatives of `G/H`: the box `0 ≤ x_k < d_k`.
    pub fn transversal(&self) -> Vec<Element> {
        box_elements(&self.divisors)
    }

    /// Representative of `x + H` in [`transversal`](Self::transversal).
    pub fn reduce(&self, x: &[u64]) -> Element {
        x.iter().zip(&self.divisors).map(|(a, d)| a % d).collect()
    }
}

/// `Ω = ⋃_i (λ_i + Σ)` in the dual group.
///
/// `lattice` is `L = H_m^⊥`, the `λ_i` are distinct elements of `L`, and
/// `Σ` is the box transversal of `Ĝ/L`, so the cells are automatically disjoint.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupSpectrum {
    group: FiniteAbelianGroup,
    lattice: BoxSubgroup,
    cells: Vec<Element>,
    reference: BoxSubgroup,
}

impl GroupSpectrum {
    pub fn new(group: FiniteAbelianGroup, lattice_divisors: Vec<u64>, cells: Vec<Element>) -> Result<Self> {
        let lattice = BoxSubgroup::new(&group, lattice_divisors)?;
        if cells.is_empty() {
            return Err(FrameError::validation("spectrum has no cells"));
        }
        let mut seen = BTreeSet::new();
        for c in &cells {
            group.check_element(c)?;
            if !lattice.contains(c) {
                return Err(FrameError::validation(format!(
                    "cell {c:?} is not in the lattice with divisors {:?}",
                    lattice.divisors()
                )));
            }
            if !seen.insert(c.clone()) {
                return Err(FrameError::validation(format!("cell {c:?} is listed twice")));
            }
        }
        let reference = group.whole();
        Ok(GroupSpectrum {
            group,
            lattice,
            cells,
            reference,
        })
    }

    /// Replaces the reference subgroup `H` that fixes the measure normalization.
    pub fn with_reference(mut self, reference_divisors: Vec<u64>) -> Result<Self> {
        let h = BoxSubgroup::new(&self.group, reference_divisors)?;
        if !self.sampling_subgroup().is_subgroup_of(&h) {
            return Err(FrameError::validation("reference subgroup must contain H_m"));
        }
        self.reference = h;
        Ok(self)
    }

    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.group
    }

    pub fn lattice(&self) -> &BoxSubgroup {
        &self.lattice
    }

    pub fn cells(&self) -> &[Element] {
        &self.cells
    }

    pub fn reference(&self) -> &BoxSubgroup {
        &self.reference
    }

    /// `k`.
    pub fn k(&self) -> usize {
        self.cells.len()
    }

    /// `M = #L = [G : H_m]`.
    pub fn big_m(&self) -> u64 {
        self.lattice.order()
    }

    /// `H_m = L^⊥`.
    pub fn sampling_subgroup(&self) -> BoxSubgroup {
        self.lattice.annihilator()
    }

    pub fn cell_shape(&self) -> Vec<Element> {
        self.lattice.transversal()
    }

    /// Explicit elements of `Ω`, cell by cell.
    pub fn omega(&self) -> Vec<Element> {
        let sigma = self.cell_shape();
        self.cells
            .iter()
            .flat_map(|l| sigma.iter().map(move |s| self.group.add(l, s)))
            .collect()
    }

    /// `μ(Σ) = #Σ / #H`.
    pub fn cell_measure(&self) -> Ratio<u64> {
        Ratio::new(self.lattice.index(), self.reference.order())
    }

    /// `μ(Ω) = k·μ(Σ)`.
    pub fn measure(&self) -> Ratio<u64> {
        self.cell_measure() * self.k() as u64
    }

    /// Weight of a single dual point, `1/#H`.
    pub fn point_weight(&self) -> f64 {
        1.0 / self.reference.order() as f64
    }
}

/// `T = ⋃_j (h_j + H_m)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupSamplingSet {
    group: FiniteAbelianGroup,
    subgroup: BoxSubgroup,
    reps: Vec<Element>,
}

impl GroupSamplingSet {
    pub fn new(group: FiniteAbelianGroup, subgroup: BoxSubgroup, reps: Vec<Element>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for h in &reps {
            group.check_element(h)?;
            if !seen.insert(subgroup.reduce(h)) {
                return Err(FrameError::validation(format!("coset of {h:?} is listed twice")));
            }
        }
        Ok(GroupSamplingSet { group, subgroup, reps })
    }

    pub fn reps(&self) -> &[Element] {
        &self.reps
    }

    pub fn subgroup(&self) -> &BoxSubgroup {
        &self.subgroup
    }

    pub fn q(&self) -> usize {
        self.reps.len()
    }

    /// Explicit elements of `T`.
    pub fn elements(&self) -> Vec<Element> {
        let hm = self.subgroup.elements();
        self.reps
            .iter()
            .flat_map(|h| hm.iter().map(move |e| self.group.add(h, e)))
            .collect()
    }
}

/// Character matrix `𝓕_{i,j} = χ_{λ_j}(h_i)`.
///
/// The `h_i` must be a full transversal of `G/H` and the `λ_j` a full list of
/// `H^⊥`, so that `(1/√M)𝓕` is unitary.
pub fn character_matrix(
    group: &FiniteAbelianGroup,
    subgroup: &BoxSubgroup,
    reps: &[Element],
    lambdas: &[Element],
) -> Result<ComplexMatrix> {
    let ann = subgroup.annihilator();
    let m = subgroup.index() as usize;
    let mut cosets = BTreeSet::new();
    for h in reps {
        group.check_element(h)?;
        cosets.insert(subgroup.reduce(h));
    }
    if reps.len() != m || cosets.len() != m {
        return Err(FrameError::validation(format!(
            "representatives do not form a transversal of G/H ({} given, {} distinct cosets, {m} needed)",
            reps.len(),
            cosets.len()
        )));
    }
    let mut seen = BTreeSet::new();
    for l in lambdas {
        group.check_element(l)?;
        if !ann.contains(l) || !seen.insert(l.clone()) {
            return Err(FrameError::validation(format!(
                "characters do not enumerate H^⊥ (offending entry {l:?})"
            )));
        }
    }
    if seen.len() != m {
        return Err(FrameError::validation(format!(
            "{} characters given, H^⊥ has {m}",
            seen.len()
        )));
    }
    Ok(ComplexMatrix::from_fn(m, m, |i, j| group.character(&lambdas[j], &reps[i])))
}

/// Exact frame bounds for a synthesized group sampling set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupFrameReport {
    pub a_exact: f64,
    pub b_exact: f64,
    pub a_normalized: f64,
    pub b_normalized: f64,
    /// `μ(Ω)` as `[numerator, denominator]`.
    pub measure: Ratio<u64>,
    pub k: usize,
    pub q: usize,
    pub big_m: u64,
    /// `⌈(1+ε)k⌉`.
    pub budget: usize,
    /// `D_H(T) = q / [H : H_m]`.
    pub density: Ratio<u64>,
    pub epsilon: f64,
    pub quantization: QuantizationSummary,
}

/// Selects `T` from the character matrix of `G/H_m` against the cells of `Ω`.
pub fn group_synthesize(
    spec: &GroupSpectrum,
    eps: f64,
    cfg: &SelectConfig,
) -> Result<(GroupSamplingSet, GroupFrameReport)> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(FrameError::validation(format!("epsilon must be positive, got {eps}")));
    }
    let k = spec.k();
    let big_m = spec.big_m();
    let budget = cardinality_budget(k, eps);
    if budget as u64 > big_m {
        return Err(FrameError::validation(format!(
            "⌈(1+ε)k⌉ = {budget} exceeds M = {big_m}"
        )));
    }
    let hm = spec.sampling_subgroup();
    let reps = hm.transversal();
    let f_i = ComplexMatrix::from_fn(reps.len(), k, |i, j| spec.group().character(&spec.cells()[j], &reps[i]));
    let sel = submatrix_select(&f_i.scale(1.0 / (big_m as f64).sqrt()), eps, cfg)?;
    let (lo, hi) = squared_singular_extremes(&f_i.select_rows(&sel.indices));
    let mu_cell = spec.cell_measure();
    let mu_cell_f = *mu_cell.numer() as f64 / *mu_cell.denom() as f64;
    let measure = spec.measure();
    let measure_f = *measure.numer() as f64 / *measure.denom() as f64;
    let chosen: Vec<Element> = sel.indices.iter().map(|&i| reps[i].clone()).collect();
    let sampling = GroupSamplingSet::new(spec.group().clone(), hm, chosen)?;
    let density = density_reference(&sampling, spec.reference())?;
    let a_exact = mu_cell_f * lo;
    let b_exact = mu_cell_f * hi;
    let report = GroupFrameReport {
        a_exact,
        b_exact,
        a_normalized: a_exact / measure_f,
        b_normalized: b_exact / measure_f,
        measure,
        k,
        q: sampling.q(),
        big_m,
        budget,
        density,
        epsilon: eps,
        quantization: sel.quantization,
    };
    Ok((sampling, report))
}

/// `D_H(T) = q / [H : H_m]`.
pub fn density_reference(t: &GroupSamplingSet, h: &BoxSubgroup) -> Result<Ratio<u64>> {
    if !t.subgroup().is_subgroup_of(h) {
        return Err(FrameError::validation(format!(
            "H_m (divisors {:?}) is not contained in H (divisors {:?})",
            t.subgroup().divisors(),
            h.divisors()
        )));
    }
    Ok(Ratio::new(t.q() as u64, t.subgroup().index() / h.index()))
}

/// Optimal bounds of `{e_t}_{t∈T}` on `L²(Ω)` where every point of `Ω` has
/// mass `weight`: `weight · λ_{min/max}(X*X)` with `X_{t,ξ} = conj χ_ξ(t)`.
pub fn brute_force_bounds(
    group: &FiniteAbelianGroup,
    omega: &[Element],
    t: &[Element],
    weight: f64,
) -> (f64, f64) {
    let x = ComplexMatrix::from_fn(t.len(), omega.len(), |i, j| group.character(&omega[j], &t[i]).conj());
    let (lo, hi) = squared_singular_extremes(&x);
    (weight * lo, weight * hi)
}

/// Bounds before and after lifting a character frame through `π: G → G/K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiftCheck {
    pub input_bounds: (f64, f64),
    pub lifted_bounds: (f64, f64),
    /// `#(π^{-1}(Q))`.
    pub lifted_dim: usize,
    pub family_size: usize,
    pub max_abs_diff: f64,
}

/// Lifts `{γ_n}` (a frame for `L²(Q)`, `Q ⊆ G/K`) to `{γ_n + κ_m}` on `π^{-1}(Q)`.
///
/// Measures follow the quotient integral formula with `μ_G` counting and
/// `μ_K` of total mass one, so each point of `G/K` weighs `#K`. The `κ_m`
/// run over the box transversal of `Ĝ/K^⊥`.
pub fn lift_frame(
    group: &FiniteAbelianGroup,
    k: &BoxSubgroup,
    q: &[Element],
    gammas: &[Element],
) -> Result<LiftCheck> {
    if q.is_empty() || gammas.is_empty() {
        return Err(FrameError::validation("Q and the character family must be nonempty"));
    }
    let k_perp = k.annihilator();
    let mut seen = BTreeSet::new();
    for x in q {
        group.check_element(x)?;
        if !seen.insert(k.reduce(x)) {
            return Err(FrameError::validation(format!("coset of {x:?} appears twice in Q")));
        }
    }
    for g in gammas {
        group.check_element(g)?;
        if !k_perp.contains(g) {
            return Err(FrameError::validation(format!(
                "character {g:?} is not K-invariant (must lie in K^⊥ with divisors {:?})",
                k_perp.divisors()
            )));
        }
    }
    let k_order = k.order() as f64;
    let input_bounds = brute_force_bounds(group, q, gammas, k_order);

    let k_elems = k.elements();
    let fiber: Vec<Element> = q
        .iter()
        .flat_map(|x| k_elems.iter().map(move |e| group.add(x, e)))
        .collect();
    let kappas = k_perp.transversal();
    let family: Vec<Element> = gammas
        .iter()
        .flat_map(|g| kappas.iter().map(move |c| group.add(g, c)))
        .collect();
    let lifted_bounds = brute_force_bounds(group, &fiber, &family, 1.0);
    let max_abs_diff = (input_bounds.0 - lifted_bounds.0)
        .abs()
        .max((input_bounds.1 - lifted_bounds.1).abs());
    Ok(LiftCheck {
        input_bounds,
        lifted_bounds,
        lifted_dim: fiber.len(),
        family_size: family.len(),
        max_abs_diff,
    })
}
