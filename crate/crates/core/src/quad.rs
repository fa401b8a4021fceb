//! Quadrature: adaptive Gauss–Kronrod on intervals and fourth-order
//! cumulative integration of sampled data on uniform grids.

use alloc::vec;
use alloc::vec::Vec;

use crate::math::abs;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// One 15-point Kronrod panel; returns (estimate, error estimate).
pub fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, abs((k - g) * h))
}

/// Adaptive Gauss–Kronrod integration to absolute tolerance `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    integrate_with_error(&f, a, b, tol).0
}

/// Like [`integrate`] but also returns the accumulated error estimate.
pub fn integrate_with_error<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> (f64, f64) {
    if a == b {
        return (0.0, 0.0);
    }
    let len = abs(b - a);
    let mut stack = vec![(a, b, 0u32)];
    let (mut total, mut err) = (0.0, 0.0);
    while let Some((lo, hi, depth)) = stack.pop() {
        let (v, e) = gk15(f, lo, hi);
        let local = tol * abs(hi - lo) / len;
        if e <= local.max(1e-15 * abs(v)) || depth >= 40 {
            total += v;
            err += e;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((mid, hi, depth + 1));
            stack.push((lo, mid, depth + 1));
        }
    }
    (total, err)
}

/// Cumulative integral `c[i] = ∫_{x_0}^{x_i} g` of samples on a uniform grid
/// of spacing `h`, using the four-point (cubic) rule on every panel.
pub fn cumulative(g: &[f64], h: f64) -> Vec<f64> {
    let n = g.len();
    let mut c = vec![0.0; n];
    if n < 2 {
        return c;
    }
    if n < 4 {
        for i in 1..n {
            c[i] = c[i - 1] + 0.5 * h * (g[i - 1] + g[i]);
        }
        return c;
    }
    for i in 0..n - 1 {
        let panel = if i == 0 {
            9.0 * g[0] + 19.0 * g[1] - 5.0 * g[2] + g[3]
        } else if i == n - 2 {
            g[n - 4] - 5.0 * g[n - 3] + 19.0 * g[n - 2] + 9.0 * g[n - 1]
        } else {
            -g[i - 1] + 13.0 * g[i] + 13.0 * g[i + 1] - g[i + 2]
        };
        c[i + 1] = c[i] + h * panel / 24.0;
    }
    c
}

/// Cumulative integral from the right end: `c[i] = ∫_{x_i}^{x_{n-1}} g`.
pub fn cumulative_from_right(g: &[f64], h: f64) -> Vec<f64> {
    let rev: Vec<f64> = g.iter().rev().copied().collect();
    let mut c = cumulative(&rev, h);
    c.reverse();
    c
}

/// Composite trapezoid rule on a uniform grid.
pub fn trapezoid(g: &[f64], h: f64) -> f64 {
    match g.len() {
        0 | 1 => 0.0,
        n => h * (g.iter().sum::<f64>() - 0.5 * (g[0] + g[n - 1])),
    }
}
