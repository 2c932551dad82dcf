//! Exact piecewise-linear functions of time.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How a path continues outside its breakpoint span.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum Extension {
    /// Flat at the boundary values (cumulative distributions, costs of
    /// exhausted supports).
    Constant,
    /// Continues with the given slopes to the left of the first and to the
    /// right of the last breakpoint.
    Linear { left: f64, right: f64 },
}

impl Extension {
    fn slopes(self) -> (f64, f64) {
        match self {
            Extension::Constant => (0.0, 0.0),
            Extension::Linear { left, right } => (left, right),
        }
    }

    fn from_slopes(left: f64, right: f64) -> Self {
        if left == 0.0 && right == 0.0 {
            Extension::Constant
        } else {
            Extension::Linear { left, right }
        }
    }
}

/// Continuous piecewise-linear function: linear interpolation between
/// strictly increasing breakpoints, extended outside them per [`Extension`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PiecewisePath {
    ts: Vec<f64>,
    vs: Vec<f64>,
    extension: Extension,
}

impl PiecewisePath {
    pub fn new(ts: Vec<f64>, vs: Vec<f64>, extension: Extension) -> Result<Self> {
        if ts.is_empty() || ts.len() != vs.len() {
            return Err(Error::domain(
                "path",
                format!("need matching non-empty breakpoints and values ({} vs {})", ts.len(), vs.len()),
            ));
        }
        if ts.iter().chain(&vs).any(|x| !x.is_finite()) {
            return Err(Error::domain("path", "breakpoints and values must be finite"));
        }
        if ts.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::domain("path", "breakpoints must be strictly increasing"));
        }
        let (l, r) = extension.slopes();
        if !(l.is_finite() && r.is_finite()) {
            return Err(Error::domain("path", "extension slopes must be finite"));
        }
        Ok(PiecewisePath { ts, vs, extension })
    }

    /// Caller guarantees the invariants.
    pub(crate) fn from_parts(ts: Vec<f64>, vs: Vec<f64>, extension: Extension) -> Self {
        debug_assert!(!ts.is_empty() && ts.len() == vs.len());
        debug_assert!(ts.windows(2).all(|w| w[0] < w[1]), "{ts:?}");
        PiecewisePath { ts, vs, extension }
    }

    pub fn constant(value: f64) -> Self {
        Self::from_parts(vec![0.0], vec![value], Extension::Constant)
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    /// `t`
    pub fn identity() -> Self {
        Self::from_parts(vec![0.0], vec![0.0], Extension::Linear { left: 1.0, right: 1.0 })
    }

    /// `slope * (t - t0)_+`
    pub fn ramp(t0: f64, slope: f64) -> Self {
        Self::from_parts(vec![t0], vec![0.0], Extension::from_slopes(0.0, slope))
    }

    /// `(t0 - t)_+`, the time left until `t0`.
    pub fn countdown(t0: f64) -> Self {
        Self::from_parts(vec![t0], vec![0.0], Extension::from_slopes(-1.0, 0.0))
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.ts
    }

    pub fn values(&self) -> &[f64] {
        &self.vs
    }

    pub fn extension(&self) -> Extension {
        self.extension
    }

    pub fn first(&self) -> f64 {
        self.ts[0]
    }

    pub fn last(&self) -> f64 {
        self.ts[self.ts.len() - 1]
    }

    pub fn len(&self) -> usize {
        self.ts.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn left_slope(&self) -> f64 {
        self.extension.slopes().0
    }

    pub fn right_slope(&self) -> f64 {
        self.extension.slopes().1
    }

    pub fn eval(&self, t: f64) -> f64 {
        let n = self.ts.len();
        if t <= self.ts[0] {
            return self.vs[0] + self.left_slope() * (t - self.ts[0]);
        }
        if t >= self.ts[n - 1] {
            return self.vs[n - 1] + self.right_slope() * (t - self.ts[n - 1]);
        }
        // first index with ts[i] > t; t lies in [ts[i-1], ts[i])
        let i = self.ts.partition_point(|&x| x <= t);
        let (t0, t1) = (self.ts[i - 1], self.ts[i]);
        let (v0, v1) = (self.vs[i - 1], self.vs[i]);
        if t == t0 {
            return v0;
        }
        v0 + (v1 - v0) * ((t - t0) / (t1 - t0))
    }

    /// Slope of the piece immediately to the right of `t`.
    pub fn slope_after(&self, t: f64) -> f64 {
        let n = self.ts.len();
        if t < self.ts[0] {
            return self.left_slope();
        }
        if t >= self.ts[n - 1] {
            return self.right_slope();
        }
        let i = self.ts.partition_point(|&x| x <= t);
        (self.vs[i] - self.vs[i - 1]) / (self.ts[i] - self.ts[i - 1])
    }

    /// `a * self + b * other`, exact on the union of breakpoints.
    pub fn combine(&self, a: f64, other: &PiecewisePath, b: f64) -> PiecewisePath {
        let ts = merge_breakpoints(&self.ts, &other.ts);
        let vs = ts.iter().map(|&t| a * self.eval(t) + b * other.eval(t)).collect();
        let left = a * self.left_slope() + b * other.left_slope();
        let right = a * self.right_slope() + b * other.right_slope();
        let extension = match (self.extension, other.extension) {
            (Extension::Constant, Extension::Constant) => Extension::Constant,
            _ => Extension::Linear { left, right },
        };
        Self::from_parts(ts, vs, extension)
    }

    pub fn add(&self, other: &PiecewisePath) -> PiecewisePath {
        self.combine(1.0, other, 1.0)
    }

    pub fn sub(&self, other: &PiecewisePath) -> PiecewisePath {
        self.combine(1.0, other, -1.0)
    }

    pub fn scale(&self, c: f64) -> PiecewisePath {
        let (l, r) = self.extension.slopes();
        let extension = match self.extension {
            Extension::Constant => Extension::Constant,
            Extension::Linear { .. } => Extension::Linear { left: c * l, right: c * r },
        };
        Self::from_parts(self.ts.clone(), self.vs.iter().map(|v| c * v).collect(), extension)
    }

    /// Adds breakpoints (values unchanged) so that each of `extra` is one.
    pub fn with_breakpoints(&self, extra: &[f64]) -> PiecewisePath {
        let mut sorted: Vec<f64> = extra.iter().copied().filter(|t| t.is_finite()).collect();
        sorted.sort_by(f64::total_cmp);
        sorted.dedup();
        let ts = merge_breakpoints(&self.ts, &sorted);
        let vs = ts.iter().map(|&t| self.eval(t)).collect();
        Self::from_parts(ts, vs, self.extension)
    }

    /// Exact integral over `[a, b]` (`a <= b`).
    pub fn integrate(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        let mut knots = vec![a];
        knots.extend(self.ts.iter().copied().filter(|&t| t > a && t < b));
        knots.push(b);
        knots.windows(2).map(|w| 0.5 * (w[1] - w[0]) * (self.eval(w[0]) + self.eval(w[1]))).sum()
    }

    /// Nondecreasing everywhere, up to `tol` per piece.
    pub fn is_nondecreasing(&self, tol: f64) -> bool {
        self.vs.windows(2).all(|w| w[1] >= w[0] - tol) && self.left_slope() >= 0.0 && self.right_slope() >= 0.0
    }

    pub fn min_value(&self) -> f64 {
        self.vs.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.vs.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Sorted union of two sorted breakpoint lists, exact duplicates removed.
pub(crate) fn merge_breakpoints(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let next = match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) if x < y => {
                i += 1;
                x
            }
            (Some(&x), Some(&y)) if y < x => {
                j += 1;
                y
            }
            (Some(&x), Some(_)) => {
                i += 1;
                j += 1;
                x
            }
            (Some(&x), None) => {
                i += 1;
                x
            }
            (None, Some(&y)) => {
                j += 1;
                y
            }
            (None, None) => unreachable!(),
        };
        if out.last() != Some(&next) {
            out.push(next);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tri() -> PiecewisePath {
        PiecewisePath::new(vec![0.0, 1.0, 2.0], vec![0.0, -1.0, 0.5], Extension::Constant).unwrap()
    }

    #[test]
    fn evaluates_at_and_between_breakpoints() {
        let p = tri();
        assert_eq!(p.eval(0.0), 0.0);
        assert_eq!(p.eval(1.0), -1.0);
        assert_eq!(p.eval(0.5), -0.5);
        assert_eq!(p.eval(1.5), -0.25);
        assert_eq!(p.eval(-3.0), 0.0);
        assert_eq!(p.eval(9.0), 0.5);
    }

    #[test]
    fn linear_extension() {
        let r = PiecewisePath::ramp(2.0, 3.0);
        assert_eq!(r.eval(1.0), 0.0);
        assert_eq!(r.eval(4.0), 6.0);
        let c = PiecewisePath::countdown(2.0);
        assert_eq!(c.eval(-1.0), 3.0);
        assert_eq!(c.eval(5.0), 0.0);
        assert_eq!(PiecewisePath::identity().eval(-2.5), -2.5);
    }

    #[test]
    fn rejects_bad_breakpoints() {
        assert!(PiecewisePath::new(vec![0.0, 0.0], vec![1.0, 2.0], Extension::Constant).is_err());
        assert!(PiecewisePath::new(vec![], vec![], Extension::Constant).is_err());
        assert!(PiecewisePath::new(vec![0.0], vec![f64::NAN], Extension::Constant).is_err());
    }

    #[test]
    fn combine_is_exact_on_union() {
        let a = tri();
        let b = PiecewisePath::ramp(0.5, 2.0);
        let c = a.combine(2.0, &b, -1.0);
        assert_eq!(c.breakpoints(), &[0.0, 0.5, 1.0, 2.0]);
        for t in [-1.0, 0.25, 0.5, 0.75, 1.3, 2.0, 7.0] {
            let expected = 2.0 * a.eval(t) - b.eval(t);
            assert!((c.eval(t) - expected).abs() < 1e-12, "t={t}");
        }
    }

    #[test]
    fn integrate_piecewise() {
        let p = tri();
        // trapezoids: -0.5 on [0,1], -0.25 on [1,2], 0.5 on [2,3]
        let exact = -0.25;
        let got = p.integrate(0.0, 3.0);
        assert!((got - exact).abs() < 1e-12, "{got} vs {exact}");
        assert!((PiecewisePath::identity().integrate(0.0, 1.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn merge_dedups() {
        assert_eq!(merge_breakpoints(&[0.0, 1.0, 3.0], &[1.0, 2.0]), vec![0.0, 1.0, 2.0, 3.0]);
    }
}
