//! Thin wrappers over `libm` so the numerics build without `std`.

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}
#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}
#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}
#[inline]
pub fn tanh(x: f64) -> f64 {
    libm::tanh(x)
}
#[inline]
pub fn cosh(x: f64) -> f64 {
    libm::cosh(x)
}
#[inline]
pub fn sinh(x: f64) -> f64 {
    libm::sinh(x)
}
#[inline]
pub fn cos(x: f64) -> f64 {
    libm::cos(x)
}
#[inline]
pub fn abs(x: f64) -> f64 {
    libm::fabs(x)
}
#[inline]
pub fn powi(x: f64, n: i32) -> f64 {
    libm::pow(x, n as f64)
}
#[inline]
pub fn round(x: f64) -> f64 {
    libm::round(x)
}

/// `sech²(x)` without overflow for large |x|.
#[inline]
pub fn sech2(x: f64) -> f64 {
    let a = abs(x);
    if a > 350.0 {
        return 0.0;
    }
    let e = exp(-2.0 * a);
    4.0 * e / ((1.0 + e) * (1.0 + e))
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, &x| if abs(x) > m { abs(x) } else { m })
}

/// Sign convention used throughout: `+1` for `x >= 0`.
#[inline]
pub fn signum(x: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

#[inline]
pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}
#[inline]
pub fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}

/// `⌈x⌉` as an index (0 for negative input).
#[inline]
pub fn ceil_usize(x: f64) -> usize {
    ceil(x).max(0.0) as usize
}
