use crate::error::{Error, Result};

/// Two adjacent slopes closer than this are treated as equal and the shared
/// breakpoint is dropped.
pub const SLOPE_TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    Concave,
    Convex,
}

/// Piecewise-linear function given by breakpoints with strictly increasing x.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinear {
    points: Vec<(f64, f64)>,
    shape: Shape,
}

impl PiecewiseLinear {
    /// Wraps breakpoints after checking ordering and that the slopes are
    /// consistent with `shape` (to within `SLOPE_TIE_TOL`).
    pub fn new(points: Vec<(f64, f64)>, shape: Shape) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyInput);
        }
        if let Some(w) = points.windows(2).find(|w| !(w[0].0 < w[1].0)) {
            return Err(Error::invalid(format!(
                "breakpoint x values not strictly increasing at {} -> {}",
                w[0].0, w[1].0
            )));
        }
        let slopes: Vec<f64> = points
            .windows(2)
            .map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0))
            .collect();
        for s in slopes.windows(2) {
            let bad = match shape {
                Shape::Concave => s[1] > s[0] + SLOPE_TIE_TOL * s[0].abs().max(1.0),
                Shape::Convex => s[1] < s[0] - SLOPE_TIE_TOL * s[0].abs().max(1.0),
            };
            if bad {
                return Err(Error::invalid(format!(
                    "slopes {} then {} contradict {shape:?} shape",
                    s[0], s[1]
                )));
            }
        }
        Ok(Self { points, shape })
    }

    pub fn breakpoints(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.points[0].0, self.points[self.points.len() - 1].0)
    }

    /// Linear interpolation; `None` outside the domain.
    pub fn eval(&self, x: f64) -> Option<f64> {
        let (lo, hi) = self.domain();
        if !(x >= lo && x <= hi) {
            return None;
        }
        let k = self.points.partition_point(|p| p.0 < x);
        if k < self.points.len() && self.points[k].0 == x {
            return Some(self.points[k].1);
        }
        let (x0, y0) = self.points[k - 1];
        let (x1, y1) = self.points[k];
        Some(y0 + (y1 - y0) * (x - x0) / (x1 - x0))
    }

    /// Slope of each segment, left to right.
    pub fn slopes(&self) -> Vec<f64> {
        self.points
            .windows(2)
            .map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0))
            .collect()
    }

    /// Index of the breakpoint maximizing `y - γx` on a concave envelope.
    /// On exact ties the leftmost maximizer is returned.
    pub fn support_argmax(&self, gamma: f64) -> usize {
        debug_assert_eq!(self.shape, Shape::Concave);
        // Slopes decrease; the objective rises while the segment slope exceeds γ.
        let pts = &self.points;
        let mut lo = 0;
        let mut hi = pts.len() - 1;
        while lo < hi {
            let mid = (lo + hi) / 2;
            let s = (pts[mid + 1].1 - pts[mid].1) / (pts[mid + 1].0 - pts[mid].0);
            if s > gamma {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        lo
    }

    /// `max_k (y_k - γ x_k)`, the support value at slope γ.
    pub fn support(&self, gamma: f64) -> f64 {
        let (x, y) = self.points[self.support_argmax(gamma)];
        y - gamma * x
    }
}

/// Least concave majorant of a point set, restricted to `[min x, max x]`.
///
/// Points sharing an x keep only the largest y. Breakpoints whose two
/// adjacent slopes agree within `SLOPE_TIE_TOL` are merged away.
pub fn upper_concave_envelope(points: &[(f64, f64)]) -> Result<PiecewiseLinear> {
    if points.is_empty() {
        return Err(Error::EmptyInput);
    }
    if let Some(p) = points.iter().find(|p| !p.0.is_finite() || !p.1.is_finite()) {
        return Err(Error::invalid(format!(
            "non-finite point ({}, {})",
            p.0, p.1
        )));
    }
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.total_cmp(&a.1)));
    sorted.dedup_by(|later, earlier| later.0 == earlier.0);

    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(sorted.len());
    for p in sorted {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            let s_ab = (b.1 - a.1) / (b.0 - a.0);
            let s_bp = (p.1 - b.1) / (p.0 - b.0);
            if s_bp >= s_ab - SLOPE_TIE_TOL * s_ab.abs().max(1.0) {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    PiecewiseLinear::new(hull, Shape::Concave)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn collinear_points_collapse() {
        let env = upper_concave_envelope(&[(0.0, 0.0), (1.0, 2.0), (2.0, 4.0)]).unwrap();
        assert_eq!(env.breakpoints(), &[(0.0, 0.0), (2.0, 4.0)]);
    }

    #[test]
    fn concave_triangle_kept() {
        let pts = [(0.0, 0.0), (1.0, 1.0), (2.0, 0.0)];
        let env = upper_concave_envelope(&pts).unwrap();
        assert_eq!(env.breakpoints(), &pts);
    }

    #[test]
    fn duplicate_x_keeps_max() {
        let env =
            upper_concave_envelope(&[(1.0, 0.0), (0.0, 0.0), (1.0, 3.0), (2.0, 0.0)]).unwrap();
        assert_eq!(env.breakpoints(), &[(0.0, 0.0), (1.0, 3.0), (2.0, 0.0)]);
    }

    #[test]
    fn interior_dip_removed() {
        let env = upper_concave_envelope(&[(0.0, 0.0), (1.0, -5.0), (2.0, 1.0)]).unwrap();
        assert_eq!(env.breakpoints(), &[(0.0, 0.0), (2.0, 1.0)]);
        assert_eq!(env.eval(1.0), Some(0.5));
        assert_eq!(env.eval(2.5), None);
    }

    #[test]
    fn single_point() {
        let env = upper_concave_envelope(&[(0.5, 1.0)]).unwrap();
        assert_eq!(env.support(2.0), 0.0);
        assert_eq!(env.eval(0.5), Some(1.0));
    }

    #[test]
    fn support_matches_brute_force() {
        let pts: Vec<(f64, f64)> = (0..50)
            .map(|i| {
                let x = i as f64 / 49.0;
                (x, (3.0 * x).sin() + 0.1 * (17.0 * x).cos())
            })
            .collect();
        let env = upper_concave_envelope(&pts).unwrap();
        for g in [-3.0, -0.5, 0.0, 0.7, 1.9, 5.0] {
            let brute = pts
                .iter()
                .map(|p| p.1 - g * p.0)
                .fold(f64::NEG_INFINITY, f64::max);
            assert!((env.support(g) - brute).abs() < 1e-12, "gamma {g}");
        }
    }

    #[test]
    fn rejects_empty_and_nan() {
        assert_eq!(upper_concave_envelope(&[]).unwrap_err(), Error::EmptyInput);
        assert!(upper_concave_envelope(&[(f64::NAN, 0.0)]).is_err());
    }

    #[test]
    fn new_checks_shape() {
        assert!(
            PiecewiseLinear::new(vec![(0.0, 0.0), (1.0, 1.0), (2.0, 0.0)], Shape::Convex).is_err()
        );
        assert!(
            PiecewiseLinear::new(vec![(0.0, 1.0), (1.0, 0.0), (2.0, 1.0)], Shape::Convex).is_ok()
        );
        assert!(PiecewiseLinear::new(vec![(0.0, 0.0), (0.0, 1.0)], Shape::Convex).is_err());
    }
}
