//! Smooth one-sided representations of outer fields: a clamped cubic spline
//! on the field's own side of Γ and a cubic Taylor extension across it.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::invalid;
use crate::linalg::solve_tridiagonal;
use crate::Result;

/// Clamped cubic spline through `(xᵢ, yᵢ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl CubicSpline {
    pub fn clamped(x: &[f64], y: &[f64], slope_left: f64, slope_right: f64) -> Result<Self> {
        let n = x.len();
        if n < 2 || y.len() != n {
            return Err(invalid("spline needs ≥ 2 matching samples"));
        }
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let mut lower = vec![0.0; n - 1];
        let mut diag = vec![0.0; n];
        let mut upper = vec![0.0; n - 1];
        let mut rhs = vec![0.0; n];
        diag[0] = 2.0 * h[0];
        upper[0] = h[0];
        rhs[0] = 6.0 * ((y[1] - y[0]) / h[0] - slope_left);
        for i in 1..n - 1 {
            lower[i - 1] = h[i - 1];
            diag[i] = 2.0 * (h[i - 1] + h[i]);
            upper[i] = h[i];
            rhs[i] = 6.0 * ((y[i + 1] - y[i]) / h[i] - (y[i] - y[i - 1]) / h[i - 1]);
        }
        lower[n - 2] = h[n - 2];
        diag[n - 1] = 2.0 * h[n - 2];
        rhs[n - 1] = 6.0 * (slope_right - (y[n - 1] - y[n - 2]) / h[n - 2]);
        let m = solve_tridiagonal(&lower, &diag, &upper, &rhs)?;
        Ok(Self { x: x.to_vec(), y: y.to_vec(), m })
    }

    /// Value and first two derivatives; clamps to the end intervals.
    pub fn eval(&self, x: f64) -> [f64; 3] {
        let n = self.x.len();
        let i = self.x.partition_point(|&v| v <= x).clamp(1, n - 1) - 1;
        let h = self.x[i + 1] - self.x[i];
        let a = self.x[i + 1] - x;
        let b = x - self.x[i];
        let (m0, m1) = (self.m[i], self.m[i + 1]);
        let (y0, y1) = (self.y[i], self.y[i + 1]);
        let v = m0 * a * a * a / (6.0 * h) + m1 * b * b * b / (6.0 * h) + (y0 / h - m0 * h / 6.0) * a + (y1 / h - m1 * h / 6.0) * b;
        let d = -m0 * a * a / (2.0 * h) + m1 * b * b / (2.0 * h) - (y0 / h - m0 * h / 6.0) + (y1 / h - m1 * h / 6.0);
        let dd = (m0 * a + m1 * b) / h;
        [v, d, dd]
    }

    pub fn samples(&self) -> (&[f64], &[f64]) {
        (&self.x, &self.y)
    }

    pub fn end_curvature(&self, left: bool) -> f64 {
        if left {
            self.m[0]
        } else {
            self.m[self.m.len() - 1]
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Minus,
    Plus,
}

impl Side {
    pub fn sign(self) -> f64 {
        match self {
            Side::Minus => -1.0,
            Side::Plus => 1.0,
        }
    }
}

/// An outer field defined on one side of Γ and extended smoothly across it.
///
/// On its own side the field is a clamped spline of the grid samples. On
/// the far side it is the cubic `a₀ + a₁s + a₂s² + a₃s³`, `s = x − R`, whose
/// value, slope and curvature match the spline at `R` and whose cubic
/// coefficient is a least-squares fit over a window of own-side nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct SideField {
    pub side: Side,
    pub r: f64,
    spline: CubicSpline,
    pub poly: [f64; 4],
}

impl SideField {
    /// `x` runs away from the interface is not required: the samples are
    /// given in increasing order and `R` is the end adjacent to Γ.
    pub fn new(side: Side, x: &[f64], y: &[f64], interface_slope: f64, far_slope: f64) -> Result<Self> {
        let n = x.len();
        if n < 4 {
            return Err(invalid("one-sided field needs ≥ 4 samples"));
        }
        let (spline, r, a0, curv) = match side {
            Side::Minus => {
                let s = CubicSpline::clamped(x, y, far_slope, interface_slope)?;
                let c = s.end_curvature(false);
                (s, x[n - 1], y[n - 1], c)
            }
            Side::Plus => {
                let s = CubicSpline::clamped(x, y, interface_slope, far_slope)?;
                let c = s.end_curvature(true);
                (s, x[0], y[0], c)
            }
        };
        let a1 = interface_slope;
        let a2 = 0.5 * curv;
        let span = (x[n - 1] - x[0]).abs();
        let window = (0.5 * span).min(0.1);
        let mut num = 0.0;
        let mut den = 0.0;
        let mut used = 0;
        let order: Vec<usize> = match side {
            Side::Minus => (0..n).rev().collect(),
            Side::Plus => (0..n).collect(),
        };
        for (cnt, &j) in order.iter().enumerate() {
            let s = x[j] - r;
            if s.abs() > window && cnt >= 4 {
                break;
            }
            let res = y[j] - a0 - a1 * s - a2 * s * s;
            let s3 = s * s * s;
            num += res * s3;
            den += s3 * s3;
            used += 1;
        }
        let a3 = if used > 1 && den > 0.0 { num / den } else { 0.0 };
        Ok(Self { side, r, spline, poly: [a0, a1, a2, a3] })
    }

    fn own(&self, x: f64) -> bool {
        (x - self.r) * self.side.sign() >= 0.0
    }

    /// Value, first and second derivative at `x`.
    pub fn eval(&self, x: f64) -> [f64; 3] {
        if self.own(x) {
            self.spline.eval(x)
        } else {
            self.poly_eval(x)
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        self.eval(x)[0]
    }

    /// One-sided four-point derivative of the raw samples at the end away
    /// from Γ, and that end's abscissa.
    pub fn far_end_slope(&self) -> (f64, f64) {
        let (x, y) = self.spline.samples();
        let n = x.len();
        let idx: [usize; 4] = match self.side {
            Side::Minus => [0, 1, 2, 3],
            Side::Plus => [n - 1, n - 2, n - 3, n - 4],
        };
        let x0 = x[idx[0]];
        // derivative of the Lagrange interpolant at x0
        let mut slope = 0.0;
        for (a, &i) in idx.iter().enumerate() {
            let w = if a == 0 {
                idx[1..].iter().map(|&k| 1.0 / (x0 - x[k])).sum::<f64>()
            } else {
                let mut w = 1.0 / (x[i] - x0);
                for (b, &k) in idx.iter().enumerate() {
                    if b != 0 && b != a {
                        w *= (x0 - x[k]) / (x[i] - x[k]);
                    }
                }
                w
            };
            slope += w * y[i];
        }
        (x0, slope)
    }

    /// The Taylor extension evaluated at `x` on either side.
    pub fn poly_eval(&self, x: f64) -> [f64; 3] {
        let s = x - self.r;
        let [a0, a1, a2, a3] = self.poly;
        [a0 + s * (a1 + s * (a2 + s * a3)), a1 + s * (2.0 * a2 + 3.0 * a3 * s), 2.0 * a2 + 6.0 * a3 * s]
    }
}
