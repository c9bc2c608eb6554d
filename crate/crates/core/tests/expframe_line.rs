use frameforge_core::expframe_line::{
    beurling_window_estimate, converged_frame_sum, cover_by_grid, density_uniform, frame_sum_truncated, norm_sqr,
    pw_sample_check, pw_value, synthesize, synthesize_intervals, GridSpectrum, IntervalSpectrum, Rational,
    SamplingSet,
};
use frameforge_core::frame_select::SelectConfig;
use frameforge_core::random::{complex_gaussian, random_subset};
use nalgebra::{Complex, DMatrix, DVector};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn r(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

fn random_coeffs(n: usize, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    (0..n).map(|_| complex_gaussian(rng)).collect()
}

/// `lim_{L→∞} Σ_{j∈J} Σ_l |⟨f, e_{j+ml}⟩|²`. Each `j` contributes
/// `|Σ_k c_k e^{-2πijk/m}|² / m²`, built here with plain `sin`/`cos`.
fn exact_limit(grid: &GridSpectrum, sampling: &SamplingSet, c: &[Complex64]) -> f64 {
    let m = grid.m() as f64;
    let rows = sampling.indices();
    let f = DMatrix::from_fn(rows.len(), grid.n(), |a, b| {
        let t = -2.0 * std::f64::consts::PI * (rows[a] * grid.cells()[b]) as f64 / m;
        Complex::new(t.cos(), t.sin())
    });
    let v = DVector::from_iterator(c.len(), c.iter().map(|z| Complex::new(z.re, z.im)));
    (f * v).norm_squared() / (m * m)
}

/// Cells of `[0, 1]` with `m = 2^p` that overlap a normalized interval in positive length.
fn enumerate_cover(intervals: &[(i64, i64)], den: i64, p: u32) -> Vec<usize> {
    let m = 1i64 << p;
    (0..m)
        .filter(|&k| {
            intervals.iter().any(|&(a, b)| {
                // max(k/m, a/den) < min((k+1)/m, b/den), cross-multiplied by m·den.
                (k * den).max(a * m) < ((k + 1) * den).min(b * m)
            })
        })
        .map(|k| k as usize)
        .collect()
}

#[test]
fn cover_of_two_intervals_matches_enumeration() {
    let spec = IntervalSpectrum::new(vec![(r(1, 10), r(3, 10)), (r(6, 10), r(7, 10))], r(1, 1)).unwrap();
    let grid = cover_by_grid(&spec, 0.5, 0.25).unwrap();
    // Normalized: [0, 0.2] ∪ [0.5, 0.6], total 0.3.
    let normalized = [(0, 2), (5, 6)];
    let mut expected = None;
    for p in 0..=20 {
        let cells = enumerate_cover(&normalized, 10, p);
        let n = cells.len() as f64;
        let m = (1u64 << p) as f64;
        if n / m <= 1.25 * 0.3 + 1e-15 && (1.25 * n - 1e-9).ceil() <= 1.5 * n + 1e-9 {
            expected = Some((1usize << p, cells));
            break;
        }
    }
    let (m, cells) = expected.unwrap();
    assert_eq!(grid.m(), m);
    assert_eq!(grid.cells(), &cells[..]);
    assert!(grid.measure() <= 0.375);
}

#[test]
fn cover_failure_is_reported() {
    // A sliver of length 2^-30 can never be covered within the slack by cells of width ≥ 2^-20.
    let spec = IntervalSpectrum::new(vec![(r(0, 1), r(1, 1 << 30))], r(1, 1)).unwrap();
    let err = cover_by_grid(&spec, 1.0, 0.1).unwrap_err();
    assert!(matches!(err, frameforge_core::FrameError::Cover(_)), "{err:?}");
}

#[test]
fn full_grid_with_all_rows_is_an_orthonormal_basis() {
    for m in [2usize, 4, 8, 16] {
        let g = GridSpectrum::full(m);
        let (s, rep) = synthesize(&g, 1.0, &SelectConfig::default()).unwrap();
        if s.indices().len() == m {
            assert!((rep.a_exact - 1.0).abs() < 1e-12 && (rep.b_exact - 1.0).abs() < 1e-12);
        }
        assert!(rep.a_exact > 0.0 && rep.a_exact <= 1.0 + 1e-12 && rep.b_exact >= 1.0 - 1e-12);
    }
}

#[test]
fn half_cell_on_grid_of_two() {
    let g = GridSpectrum::new(2, [0]).unwrap();
    let (s, rep) = synthesize(&g, 1.0, &SelectConfig::default()).unwrap();
    assert!(s.indices().len() <= 2);
    if s.indices() == [0, 1] {
        // Λ = ℤ and Ω ⊂ [0, 1]: Parseval on [0, 1] gives A = B = 1, so the normalized bounds are 2.
        assert!((rep.a_exact - 1.0).abs() < 1e-12 && (rep.b_exact - 1.0).abs() < 1e-12);
        assert!((rep.a_normalized - 2.0).abs() < 1e-12);
    }
}

#[test]
fn random_four_of_sixteen() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let g = GridSpectrum::new(16, random_subset(16, 4, &mut rng)).unwrap();
    let (s, rep) = synthesize(&g, 0.5, &SelectConfig::default()).unwrap();
    assert!(density_uniform(&s) <= r(3, 8));
    assert!(rep.a_exact > 0.0);
    let c = random_coeffs(4, &mut rng);
    let nrm = norm_sqr(&g, &c);
    let cs = converged_frame_sum(&g, &s, &c, 1e-10 * nrm).unwrap();
    assert!(cs.value >= rep.a_exact * nrm * (1.0 - 1e-6) && cs.value <= rep.b_exact * nrm * (1.0 + 1e-6));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn truncated_sum_is_monotone_and_bounded(seed in any::<u64>(), p in 3u32..6, eps_i in 0usize..3) {
        let eps = [0.5, 1.0, 2.0][eps_i];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = 1usize << p;
        let n = (m / 4).max(2);
        let g = GridSpectrum::new(m, random_subset(m, n, &mut rng)).unwrap();
        let (s, rep) = synthesize(&g, eps, &SelectConfig { seed, ..Default::default() }).unwrap();
        let c = random_coeffs(n, &mut rng);
        let nrm = norm_sqr(&g, &c);
        let mut prev = 0.0;
        for l in [0u64, 1, 2, 4, 8, 16, 32, 64] {
            let v = frame_sum_truncated(&g, &s, &c, l).unwrap();
            prop_assert!(v >= prev - 1e-15 * nrm);
            prop_assert!(v <= rep.b_exact * nrm + 1e-9);
            prev = v;
        }
        prop_assert!(prev >= 0.99 * rep.a_exact * nrm, "L = 64: {} < 0.99·{}", prev, rep.a_exact * nrm);
        let density = density_uniform(&s);
        prop_assert!(density <= Rational::new((((1.0 + eps) * 4.0) as i64) * n as i64, 4 * m as i64));
        prop_assert!(density >= g.measure_exact());
    }
}

#[test]
fn single_cell_parseval() {
    for m in [4usize, 8] {
        for k in [0usize, m - 1] {
            let g = GridSpectrum::new(m, [k]).unwrap();
            let s = SamplingSet::new(m, 0..m, r(1, 1)).unwrap();
            let c = [Complex64::new(1.0, 0.0)];
            let cs = converged_frame_sum(&g, &s, &c, 1e-12).unwrap();
            assert!((cs.value - 1.0 / m as f64).abs() < 1e-10, "m {m} k {k}: {cs:?}");
            assert!(frame_sum_truncated(&g, &s, &c, 0).unwrap() <= cs.value + 1e-15);
        }
    }
}

#[test]
fn point_samples_reproduce_the_truncated_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let g = GridSpectrum::new(16, random_subset(16, 5, &mut rng)).unwrap();
    let (s, rep) = synthesize(&g, 1.0, &SelectConfig::default()).unwrap();
    // Real cell values make `f(λ)` the conjugate of `⟨f̂, e_λ⟩`, so the energies agree term by term.
    let c: Vec<Complex64> = random_coeffs(5, &mut rng).iter().map(|z| Complex64::new(z.re, 0.0)).collect();
    for l in [0u64, 3, 10, 64] {
        let radius = (l * 16) as f64 + 7.5;
        let chk = pw_sample_check(&g, &s, &rep, &c, radius).unwrap();
        let t = frame_sum_truncated(&g, &s, &c, l).unwrap();
        assert!((chk.sample_energy - t).abs() <= 1e-12 * t.max(1e-300), "L {l}: {} vs {t}", chk.sample_energy);
        assert_eq!(chk.points, s.indices().len() * (2 * l as usize + 1));
    }
    let chk = pw_sample_check(&g, &s, &rep, &c, 64.0 * 16.0).unwrap();
    assert!(chk.ratio >= rep.a_exact * 0.99 && chk.ratio <= rep.b_exact * 1.001);
    // Complex values sample the frame over `−Λ`, which has the same bounds.
    let c = random_coeffs(5, &mut rng);
    let chk = pw_sample_check(&g, &s, &rep, &c, 64.0 * 16.0).unwrap();
    assert!(chk.ratio >= rep.a_exact * 0.99 && chk.ratio <= rep.b_exact * 1.001);
}

#[test]
fn integer_sampling_of_the_unit_interval() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for m in [1usize, 4, 8] {
        let g = GridSpectrum::full(m);
        let s = SamplingSet::new(m, 0..m, r(1, 1)).unwrap();
        let c = if m == 1 { vec![Complex64::new(1.0, 0.0)] } else { random_coeffs(m, &mut rng) };
        let nrm = norm_sqr(&g, &c);
        let cs = converged_frame_sum(&g, &s, &c, 1e-12 * nrm).unwrap();
        assert!((cs.value - nrm).abs() <= 1e-8 * nrm, "m {m}: {} vs {nrm}", cs.value);
        // Direct point values agree with the limit too.
        let direct: f64 = (-2000i64..=2000).map(|x| pw_value(&g, &c, x).norm_sqr()).sum();
        assert!((direct - nrm).abs() <= 1e-3 * nrm);
    }
}

#[test]
fn converged_sums_match_the_exact_limit() {
    let mut count = 0;
    for inst in 0..10u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(500 + inst);
        let (m, n) = [(16, 4), (32, 8), (64, 12)][inst as usize % 3];
        let g = GridSpectrum::new(m, random_subset(m, n, &mut rng)).unwrap();
        let (s, rep) = synthesize(&g, 1.0, &SelectConfig { seed: inst, ..Default::default() }).unwrap();
        for _ in 0..20 {
            let c = random_coeffs(n, &mut rng);
            let nrm = norm_sqr(&g, &c);
            let cs = converged_frame_sum(&g, &s, &c, 1e-8 * nrm).unwrap();
            let exact = exact_limit(&g, &s, &c);
            assert!((cs.value - exact).abs() <= 1e-7 * exact, "{} vs {exact}", cs.value);
            assert!(cs.value >= rep.a_exact * nrm * (1.0 - 1e-6) && cs.value <= rep.b_exact * nrm * (1.0 + 1e-6));
            count += 1;
        }
    }
    assert_eq!(count, 200);
}

#[test]
fn dilation_keeps_the_normalized_report() {
    let unit = IntervalSpectrum::new(vec![(r(0, 1), r(1, 4)), (r(1, 2), r(5, 8))], r(1, 1)).unwrap();
    let wide = IntervalSpectrum::new(vec![(r(0, 1), r(3, 4)), (r(3, 2), r(15, 8))], r(3, 1)).unwrap();
    let cfg = SelectConfig::default();
    let (g1, s1, a) = synthesize_intervals(&unit, 1.0, 0.1, &cfg).unwrap();
    let (g3, s3, b) = synthesize_intervals(&wide, 1.0, 0.1, &cfg).unwrap();
    assert_eq!(g1, g3);
    assert_eq!(s1.indices(), s3.indices());
    assert_eq!(s3.dilation(), r(3, 1));
    assert!((a.a_normalized - b.a_normalized).abs() < 1e-12 && (a.b_normalized - b.b_normalized).abs() < 1e-12);
    assert!((b.a_exact - 3.0 * a.a_exact).abs() < 1e-12);
    assert_eq!(density_uniform(&s3), density_uniform(&s1) * r(3, 1));
    for x in s3.points_in(-10.0, 10.0) {
        let y = 3.0 * x;
        assert!((y - y.round()).abs() < 1e-12);
    }
}

#[test]
fn translation_keeps_grid_and_bounds() {
    let base = IntervalSpectrum::new(vec![(r(1, 10), r(3, 10)), (r(6, 10), r(7, 10))], r(1, 1)).unwrap();
    let cfg = SelectConfig::default();
    let (g0, s0, rep0) = synthesize_intervals(&base, 0.5, 0.25, &cfg).unwrap();
    for shift in [r(1, 3), r(-7, 2), r(5, 1)] {
        let (g, s, rep) = synthesize_intervals(&base.translate(shift), 0.5, 0.25, &cfg).unwrap();
        assert_eq!(g, g0);
        assert_eq!(s, s0);
        assert_eq!(rep, rep0);
    }
}

#[test]
fn window_estimate_is_within_counting_error() {
    let s = SamplingSet::new(4, [0, 1], r(1, 1)).unwrap();
    let rr = 400.0;
    let (lo, hi) = beurling_window_estimate(&s, rr).unwrap();
    assert!((lo - 0.5).abs() <= 2.0 / rr && (hi - 0.5).abs() <= 2.0 / rr);
    let s = SamplingSet::new(3, [0, 1, 2], r(1, 1)).unwrap();
    let (lo, hi) = beurling_window_estimate(&s, 300.0).unwrap();
    assert!((lo - 1.0).abs() <= 3.0 / 300.0 && (hi - 1.0).abs() <= 3.0 / 300.0);
}
