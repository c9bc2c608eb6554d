//! Beurling densities from finite point data.

use serde::{Deserialize, Serialize};

use crate::error::{FrameError, Result};

/// Strictly increasing finite points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSet1D {
    points: Vec<f64>,
}

impl PointSet1D {
    /// Sorts the input; rejects non-finite values and repeated points.
    pub fn new(mut points: Vec<f64>) -> Result<Self> {
        if let Some(p) = points.iter().find(|p| !p.is_finite()) {
            return Err(FrameError::validation(format!("point {p} is not finite")));
        }
        points.sort_by(f64::total_cmp);
        if let Some(w) = points.windows(2).find(|w| w[0] == w[1]) {
            return Err(FrameError::validation(format!("point {} appears twice", w[0])));
        }
        Ok(PointSet1D { points })
    }

    /// Like [`PointSet1D::new`] but also requires consecutive gaps of at least `separation`.
    pub fn with_separation(points: Vec<f64>, separation: f64) -> Result<Self> {
        let set = PointSet1D::new(points)?;
        if let Some(w) = set.points.windows(2).find(|w| w[1] - w[0] < separation) {
            return Err(FrameError::validation(format!(
                "points {} and {} are closer than {separation}",
                w[0], w[1]
            )));
        }
        Ok(set)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `#(Λ ∩ [x, x+r])`.
    pub fn count_closed(&self, x: f64, r: f64) -> usize {
        let lo = self.points.partition_point(|&p| p < x);
        let hi = self.points.partition_point(|&p| p <= x + r);
        hi.saturating_sub(lo)
    }

    /// `#(Λ ∩ (x, x+r])`, the count of `[y, y+r]` as `y ↓ x`.
    fn count_right_limit(&self, x: f64, r: f64) -> usize {
        let lo = self.points.partition_point(|&p| p <= x);
        let hi = self.points.partition_point(|&p| p <= x + r);
        hi.saturating_sub(lo)
    }
}

/// Minimum and maximum of `#(Λ ∩ [x, x+r]) / r` over `x` with `[x, x+r] ⊆ W`.
///
/// The count is piecewise constant in `x` and only changes when a point
/// enters (`x = p − r`) or leaves (just after `x = p`), so evaluating it at
/// each event and at its right limit gives the exact extremes.
pub fn beurling_bounds(points: &PointSet1D, window: (f64, f64), r: f64) -> Result<(f64, f64)> {
    let (lo, hi) = window;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(FrameError::validation(format!("window [{lo}, {hi}] is empty")));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(FrameError::validation(format!("window length r must be positive, got {r}")));
    }
    if r > (hi - lo) / 2.0 {
        return Err(FrameError::validation(format!(
            "r = {r} exceeds half the window length {}",
            (hi - lo) / 2.0
        )));
    }
    let last = hi - r;
    let mut min = points.count_closed(lo, r).min(points.count_closed(last, r));
    let mut max = min.max(points.count_closed(lo, r)).max(points.count_closed(last, r));
    let events = points.points().iter().flat_map(|&p| [p, p - r]);
    for x in events.filter(|&x| x >= lo && x < last) {
        let at = points.count_closed(x, r);
        let after = points.count_right_limit(x, r);
        min = min.min(at).min(after);
        max = max.max(at).max(after);
    }
    Ok((min as f64 / r, max as f64 / r))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integers() {
        let z = PointSet1D::new((0..=1000).map(f64::from).collect()).unwrap();
        let (lo, hi) = beurling_bounds(&z, (0.0, 1000.0), 100.0).unwrap();
        assert!((lo - 1.0).abs() <= 0.01 + 1e-12 && (hi - 1.0).abs() <= 0.01 + 1e-12);
        assert_eq!((lo, hi), (1.0, 1.01));
    }

    #[test]
    fn empty() {
        let e = PointSet1D::new(vec![]).unwrap();
        assert_eq!(beurling_bounds(&e, (0.0, 10.0), 2.0).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn r_too_large() {
        let e = PointSet1D::new(vec![1.0]).unwrap();
        assert!(beurling_bounds(&e, (0.0, 10.0), 6.0).is_err());
        assert!(beurling_bounds(&e, (0.0, 10.0), 0.0).is_err());
    }

    #[test]
    fn rejects_duplicates_and_nan() {
        assert!(PointSet1D::new(vec![1.0, 1.0]).is_err());
        assert!(PointSet1D::new(vec![f64::NAN]).is_err());
        assert!(PointSet1D::with_separation(vec![0.0, 0.5], 1.0).is_err());
    }

    #[test]
    fn single_point_extremes() {
        let s = PointSet1D::new(vec![5.0]).unwrap();
        let (lo, hi) = beurling_bounds(&s, (0.0, 10.0), 2.0).unwrap();
        assert_eq!((lo, hi), (0.0, 0.5));
    }
}
