//! Knot-parametrized symmetric cumulative distribution on [-1, 1].
//!
//! The left half of the CDF is a monotone piecewise cubic (Steffen-limited
//! Hermite interpolation) through the fixed endpoints (-1, 0) and (0, 0.5)
//! plus `n` interior knots; the right half follows by the symmetry
//! F(x) = 1 - F(-x). Sampling is inverse-transform: a uniform variate is
//! pushed through the quantile function, solved per segment with safeguarded
//! Newton iterations. Scaling the interior knots toward the origin
//! concentrates the density at zero, which is how the reward rule shrinks
//! mutations as a run adapts.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum spacing that makes the x-knots "strictly" ordered.
pub const MIN_GAP: f64 = 1e-9;
// Slack for spacing produced by clamp arithmetic (one rounding step below
// MIN_GAP must still validate).
const GAP_CHECK: f64 = MIN_GAP * 0.99;

const QUANTILE_MAX_ITER: usize = 200;
const QUANTILE_TOL: f64 = 1e-14;

/// One violated knot constraint, reported with 1-based knot indices.
#[derive(Debug, Clone, PartialEq)]
pub enum KnotViolation {
    LengthMismatch { xs: usize, ys: usize },
    Empty,
    NonFinite { axis: char, index: usize },
    XOutOfRange { index: usize, value: f64 },
    XOrdering { index: usize, gap: f64 },
    YOutOfRange { index: usize, value: f64 },
    YOrdering { index: usize },
}

impl fmt::Display for KnotViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KnotViolation::LengthMismatch { xs, ys } => {
                write!(f, "xs has {xs} entries but ys has {ys}")
            }
            KnotViolation::Empty => write!(f, "at least one interior knot is required"),
            KnotViolation::NonFinite { axis, index } => {
                write!(f, "{axis}[{index}] is not finite")
            }
            KnotViolation::XOutOfRange { index, value } => {
                write!(f, "x[{index}] = {value} outside (-1, 0)")
            }
            KnotViolation::XOrdering { index, gap } => {
                write!(f, "x[{index}] not ascending (gap {gap:.3e} < {MIN_GAP:.0e})")
            }
            KnotViolation::YOutOfRange { index, value } => {
                write!(f, "y[{index}] = {value} outside [0, 0.5]")
            }
            KnotViolation::YOrdering { index } => {
                write!(f, "y[{index}] decreases")
            }
        }
    }
}

impl KnotViolation {
    pub fn join(violations: &[KnotViolation]) -> String {
        violations
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join("; ")
    }
}

/// Every violated ordering/range constraint of a candidate knot list.
///
/// An empty result means the pair is a valid interior-knot set.
pub fn validate_knots(xs: &[f64], ys: &[f64]) -> Vec<KnotViolation> {
    let mut violations = Vec::new();
    if xs.len() != ys.len() {
        violations.push(KnotViolation::LengthMismatch {
            xs: xs.len(),
            ys: ys.len(),
        });
        return violations;
    }
    if xs.is_empty() {
        violations.push(KnotViolation::Empty);
        return violations;
    }
    let n = xs.len();
    for (i, &x) in xs.iter().enumerate() {
        if !x.is_finite() {
            violations.push(KnotViolation::NonFinite { axis: 'x', index: i + 1 });
        } else if x <= -1.0 || x >= 0.0 {
            violations.push(KnotViolation::XOutOfRange { index: i + 1, value: x });
        }
    }
    for (i, &y) in ys.iter().enumerate() {
        if !y.is_finite() {
            violations.push(KnotViolation::NonFinite { axis: 'y', index: i + 1 });
        } else if !(0.0..=0.5).contains(&y) {
            violations.push(KnotViolation::YOutOfRange { index: i + 1, value: y });
        }
    }
    if !violations.is_empty() {
        return violations;
    }
    // gaps, including the fixed endpoints at -1 and 0
    for i in 0..=n {
        let left = if i == 0 { -1.0 } else { xs[i - 1] };
        let right = if i == n { 0.0 } else { xs[i] };
        let gap = right - left;
        if gap < GAP_CHECK {
            violations.push(KnotViolation::XOrdering { index: i.min(n), gap });
        }
    }
    for i in 1..n {
        if ys[i] < ys[i - 1] {
            violations.push(KnotViolation::YOrdering { index: i + 1 });
        }
    }
    violations
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawKnots {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

/// Interior knots of the symmetric CDF: x-values strictly ascending inside
/// (-1, 0), y-values nondecreasing inside [0, 0.5]. The fixed endpoints
/// (-1, 0) and (0, 0.5) are implicit and never stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawKnots", into = "RawKnots")]
pub struct KnotSet {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl TryFrom<RawKnots> for KnotSet {
    type Error = Error;

    fn try_from(raw: RawKnots) -> Result<Self> {
        KnotSet::new(raw.xs, raw.ys)
    }
}

impl From<KnotSet> for RawKnots {
    fn from(knots: KnotSet) -> Self {
        RawKnots {
            xs: knots.xs,
            ys: knots.ys,
        }
    }
}

impl KnotSet {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        let violations = validate_knots(&xs, &ys);
        if violations.is_empty() {
            Ok(KnotSet { xs, ys })
        } else {
            Err(Error::InvalidKnots(violations))
        }
    }

    /// Collinear knots reproducing the uniform density on [-1, 1].
    pub fn uniform(n: usize) -> Self {
        assert!(n >= 1, "at least one interior knot");
        let denom = (n + 1) as f64;
        let xs = (1..=n).map(|i| i as f64 / denom - 1.0).collect();
        let ys = (1..=n).map(|i| i as f64 / (2.0 * denom)).collect();
        KnotSet { xs, ys }
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    /// Interior knots scaled coordinate-wise by `w > 0`; endpoints stay put.
    ///
    /// Scaling with w < 1 pulls the knots toward the origin so the sampled
    /// mutations concentrate at zero; w > 1 pushes them outward. Values that
    /// would leave the valid region are clamped: y-values are capped just
    /// under 0.5 and x-values are kept strictly ordered inside (-1, 0) with
    /// the minimum spacing, both in an order-preserving way, so the result
    /// is always a valid knot set.
    pub fn scale(&self, w: f64) -> Result<KnotSet> {
        if !w.is_finite() || w <= 0.0 {
            return Err(Error::OutOfDomain {
                name: "w",
                value: w,
                domain: "(0, inf)",
            });
        }
        if w == 1.0 {
            return Ok(self.clone());
        }
        let n = self.len();
        let mut xs: Vec<f64> = self.xs.iter().map(|x| x * w).collect();
        let mut ys: Vec<f64> = self.ys.iter().map(|y| y * w).collect();

        // keep x strictly below 0 with minimum spacing (right-to-left), then
        // strictly above -1 (left-to-right); jointly satisfiable for n << 1/MIN_GAP
        for i in (0..n).rev() {
            let cap = if i == n - 1 { -MIN_GAP } else { xs[i + 1] - MIN_GAP };
            xs[i] = xs[i].min(cap);
        }
        for i in 0..n {
            let floor = if i == 0 { -1.0 + MIN_GAP } else { xs[i - 1] + MIN_GAP };
            xs[i] = xs[i].max(floor);
        }
        // cap y just below 0.5, preserving order (only reachable when w > 1)
        if w > 1.0 {
            for (i, y) in ys.iter_mut().enumerate() {
                let cap = 0.5 - MIN_GAP * (n - 1 - i) as f64;
                *y = y.min(cap);
            }
        }
        debug_assert!(validate_knots(&xs, &ys).is_empty());
        Ok(KnotSet { xs, ys })
    }
}

/// The interpolated CDF: per-segment cubic coefficients over the breakpoints
/// {-1} ∪ xs ∪ {0}, plus the symmetric extension to (0, 1].
#[derive(Debug, Clone)]
pub struct MonotoneCdf {
    /// breakpoints, length n + 2, from -1 to 0
    xs: Vec<f64>,
    /// CDF values at the breakpoints, from 0 to 0.5
    ys: Vec<f64>,
    /// limited derivatives at the breakpoints
    derivs: Vec<f64>,
    /// per-segment [a, b, c, d] for a t³ + b t² + c t + d with t = x - x_j
    coeffs: Vec<[f64; 4]>,
}

impl MonotoneCdf {
    pub fn new(knots: &KnotSet) -> Self {
        let n = knots.len();
        let mut xs = Vec::with_capacity(n + 2);
        xs.push(-1.0);
        xs.extend_from_slice(knots.xs());
        xs.push(0.0);
        let mut ys = Vec::with_capacity(n + 2);
        ys.push(0.0);
        ys.extend_from_slice(knots.ys());
        ys.push(0.5);

        let segments = n + 1;
        let widths: Vec<f64> = (0..segments).map(|j| xs[j + 1] - xs[j]).collect();
        let slopes: Vec<f64> = (0..segments)
            .map(|j| (ys[j + 1] - ys[j]) / widths[j])
            .collect();

        // Steffen limiter at interior breakpoints; the left boundary uses
        // the one-sided parabola slope (clamped), which keeps collinear
        // knots exactly linear; the origin takes the last secant slope.
        let mut derivs = vec![0.0; n + 2];
        for j in 1..=n {
            let (s0, s1) = (slopes[j - 1], slopes[j]);
            derivs[j] = if s0 * s1 <= 0.0 {
                0.0
            } else {
                let weighted = (s0 * widths[j] + s1 * widths[j - 1]) / (widths[j - 1] + widths[j]);
                let bound = 2.0 * s0.abs().min(s1.abs());
                if weighted.abs() > bound {
                    bound * s1.signum()
                } else {
                    weighted
                }
            };
        }
        derivs[0] = {
            let fraction = widths[0] / (widths[0] + widths[1]);
            let parabola = slopes[0] * (1.0 + fraction) - slopes[1] * fraction;
            if parabola * slopes[0] <= 0.0 {
                0.0
            } else if parabola.abs() > 2.0 * slopes[0].abs() {
                2.0 * slopes[0]
            } else {
                parabola
            }
        };
        derivs[n + 1] = slopes[segments - 1];

        let coeffs = (0..segments)
            .map(|j| {
                let h = widths[j];
                let s = slopes[j];
                let (d0, d1) = (derivs[j], derivs[j + 1]);
                [
                    (d0 + d1 - 2.0 * s) / (h * h),
                    (3.0 * s - 2.0 * d0 - d1) / h,
                    d0,
                    ys[j],
                ]
            })
            .collect();

        MonotoneCdf {
            xs,
            ys,
            derivs,
            coeffs,
        }
    }

    fn check_domain(value: f64, name: &'static str, lo: f64, hi: f64) -> Result<()> {
        if value.is_finite() && (lo..=hi).contains(&value) {
            Ok(())
        } else {
            Err(Error::OutOfDomain {
                name,
                value,
                domain: "[-1, 1]",
            })
        }
    }

    /// Segment index for x in [-1, 0]; x equal to a breakpoint anchors left.
    fn segment(&self, x: f64) -> usize {
        let n = self.xs.len() - 2;
        self.xs[1..=n].partition_point(|&b| b <= x)
    }

    /// The interpolant on the left half, exact at every breakpoint.
    fn eval_left(&self, x: f64) -> f64 {
        let j = self.segment(x);
        let t = x - self.xs[j];
        let [a, b, c, d] = self.coeffs[j];
        ((a * t + b) * t + c) * t + d
    }

    fn deriv_left(&self, x: f64) -> f64 {
        if x == 0.0 {
            return self.derivs[self.derivs.len() - 1];
        }
        let j = self.segment(x);
        let t = x - self.xs[j];
        let [a, b, c, _] = self.coeffs[j];
        (3.0 * a * t + 2.0 * b) * t + c
    }

    /// F(x): the interpolant for x ≤ 0, 1 - F(-x) above; endpoints exact.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        Self::check_domain(x, "x", -1.0, 1.0)?;
        if x == 0.0 {
            Ok(0.5)
        } else if x < 0.0 {
            Ok(self.eval_left(x))
        } else {
            Ok(1.0 - self.eval_left(-x))
        }
    }

    /// Density D(x) = F'(x); symmetric about zero by construction.
    pub fn pdf(&self, x: f64) -> Result<f64> {
        Self::check_domain(x, "x", -1.0, 1.0)?;
        Ok(self.deriv_left(-x.abs()).max(0.0))
    }

    /// Quantile F⁻¹(u) by segment bisection plus safeguarded Newton.
    ///
    /// u below 0.5 inverts the left half, u above mirrors it, u = 0.5 maps to
    /// zero. Over a flat stretch the leftmost preimage is returned.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !u.is_finite() || !(0.0..=1.0).contains(&u) {
            return Err(Error::OutOfDomain {
                name: "u",
                value: u,
                domain: "[0, 1]",
            });
        }
        if u == 0.5 {
            Ok(0.0)
        } else if u < 0.5 {
            Ok(self.invert_left(u))
        } else {
            Ok(-self.invert_left(1.0 - u))
        }
    }

    fn invert_left(&self, v: f64) -> f64 {
        if v <= 0.0 {
            return -1.0;
        }
        // first segment whose right endpoint reaches v; on plateaus this
        // picks the leftmost preimage
        let n = self.xs.len() - 2;
        let j = self.ys[1..=n + 1].partition_point(|&y| y < v);
        let [a, b, c, d] = self.coeffs[j];
        let h = self.xs[j + 1] - self.xs[j];
        let eval = |t: f64| ((a * t + b) * t + c) * t + d - v;
        let deriv = |t: f64| (3.0 * a * t + 2.0 * b) * t + c;

        let (mut lo, mut hi) = (0.0_f64, h);
        let span = self.ys[j + 1] - self.ys[j];
        let mut t = if span > 0.0 {
            (h * (v - self.ys[j]) / span).clamp(lo, hi)
        } else {
            0.0
        };
        for _ in 0..QUANTILE_MAX_ITER {
            let g = eval(t);
            if g.abs() <= QUANTILE_TOL {
                break;
            }
            if g > 0.0 {
                hi = t;
            } else {
                lo = t;
            }
            let slope = deriv(t);
            let newton = if slope > 0.0 { t - g / slope } else { f64::NAN };
            t = if newton.is_finite() && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if hi - lo <= f64::EPSILON {
                break;
            }
        }
        self.xs[j] + t
    }

    /// Largest jump of the one-sided derivatives across interior breakpoints;
    /// a diagnostic for the C¹ construction.
    pub fn c1_defect(&self) -> f64 {
        let mut defect: f64 = 0.0;
        for j in 1..self.xs.len() - 1 {
            let [a, b, c, _] = self.coeffs[j - 1];
            let h = self.xs[j] - self.xs[j - 1];
            let left = (3.0 * a * h + 2.0 * b) * h + c;
            defect = defect.max((left - self.derivs[j]).abs());
        }
        defect
    }

    /// Largest interpolation error at the breakpoints (evaluated, not stored).
    pub fn knot_defect(&self) -> f64 {
        self.xs
            .iter()
            .zip(self.ys.iter())
            .map(|(&x, &y)| (self.eval_left(x) - y).abs())
            .fold(0.0, f64::max)
    }
}
