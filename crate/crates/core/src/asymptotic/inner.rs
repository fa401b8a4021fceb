//! Inner expansion in the stretched variable `z = d/ε`.
//!
//! Every order-1 inner profile is linear in a handful of `x`-dependent
//! coefficients, so the `z`-dependence is tabulated once per η variant:
//!
//! ```text
//! ũ₁ = θ'/θ'(0) + Δd·U[θ'] + μ₊·U[η] + μ₋·U[1−η] − (l⁰d⁰)·U[η'],
//! μ̃₁ = ημ₁₊ + (1−η)μ₁₋ − ηD₁(∞) + D₁,   D₁ = p⁰D[η''z] + (p⁰ + 2d_t)D[η'] − d_t D[θ'],
//! σ̃₁ = ησ₁₊ + (1−η)σ₁₋ − ηD₂(∞) + D₂,   D₂ = q⁰D[η''z] + q⁰D[η'],
//! ```
//!
//! where `U[ψ] = θ'∫₀^z I[ψ]/θ'²` solves `−U'' + f''(θ)U = ψ` (variation of
//! constants) and `D[φ](z) = ∫_{−∞}^z ∫_{z'}^∞ φ`. Each single-basis
//! primitive is split at `z = 0` (`∫_{z}^∞` for `z ≥ 0`, `−∫_{−∞}^{z}`
//! below) so nothing overflows; for combinations satisfying the
//! solvability conditions the split forms agree with the textbook ones.
//!
//! On `|z| ≤ 1` the profiles are tabulated with value and derivative
//! (cubic Hermite); outside, η is constant and everything has closed form
//! in `e = exp(−2√2|z|)`.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::SQRT_2;

use super::outer::OuterFields;
use super::{Order, Side};
use crate::error::invalid;
use crate::math::{abs, exp, ln};
use crate::profile::{d2theta, dtheta, surface_tension, theta, EtaVariant, Mollifier, Z_TRUNCATION};
use crate::quad::{cumulative, cumulative_from_right, integrate};
use crate::{Error, Result};

const Z_NODES: usize = 2001;
const CENTER: usize = 1000;
const DZ: f64 = 1.0 / CENTER as f64;
const SOLVABILITY_TOL: f64 = 1e-8;
const SWITCH_TOL_PER_CELL: f64 = 50.0;

#[derive(Debug, Clone)]
struct Hermite {
    val: Vec<f64>,
    der: Vec<f64>,
    der_center_left: f64,
}

impl Hermite {
    fn eval(&self, z: f64) -> (f64, f64) {
        let x = (z + 1.0) / DZ;
        let i = (crate::math::floor(x).max(0.0) as usize).min(Z_NODES - 2);
        let t = x - i as f64;
        let (y0, y1) = (self.val[i], self.val[i + 1]);
        let d0 = self.der[i];
        let d1 = if i + 1 == CENTER { self.der_center_left } else { self.der[i + 1] };
        let t2 = t * t;
        let t3 = t2 * t;
        let v = (2.0 * t3 - 3.0 * t2 + 1.0) * y0 + (t3 - 2.0 * t2 + t) * DZ * d0 + (-2.0 * t3 + 3.0 * t2) * y1 + (t3 - t2) * DZ * d1;
        let dv = (6.0 * t2 - 6.0 * t) * (y0 - y1) / DZ + (3.0 * t2 - 4.0 * t + 1.0) * d0 + (3.0 * t2 - 2.0 * t) * d1;
        (v, dv)
    }
}

/// `(1 − θ, 1 + θ)` without cancellation.
fn tanh_parts(z: f64) -> (f64, f64) {
    let e = exp(-2.0 * SQRT_2 * abs(z));
    let small = 2.0 * e / (1.0 + e);
    let big = 2.0 / (1.0 + e);
    if z >= 0.0 {
        (small, big)
    } else {
        (big, small)
    }
}

fn stable_dtheta(z: f64) -> f64 {
    let (om, op) = tanh_parts(z);
    SQRT_2 * om * op
}

fn stable_d2theta(z: f64) -> f64 {
    let (om, op) = tanh_parts(z);
    -2.0 * SQRT_2 * (op - om) * 0.5 * stable_dtheta(z)
}

fn e_of(s: f64) -> f64 {
    exp(-2.0 * SQRT_2 * s)
}

/// Tail integrand of `W[θ']` for `s ≥ 1` and its primitive.
fn g_theta(s: f64) -> f64 {
    let e = e_of(s);
    SQRT_2 * (3.0 + 4.0 * e + e * e) / 24.0
}
fn p_theta(s: f64) -> f64 {
    let e = e_of(s);
    SQRT_2 / 24.0 * (3.0 * s - SQRT_2 * e - e * e / (4.0 * SQRT_2))
}
/// Tail integrand of `W[η]` for `s ≥ 1` and its primitive.
fn g_eta(s: f64) -> f64 {
    let e = e_of(s);
    (1.0 + e) * (1.0 + e) * (1.0 + e) / (16.0 * e)
}
fn p_eta(s: f64) -> f64 {
    let e = e_of(s);
    (exp(2.0 * SQRT_2 * s) / (2.0 * SQRT_2) + 3.0 * s - 3.0 * e / (2.0 * SQRT_2) - e * e / (4.0 * SQRT_2)) / 16.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum UBasis {
    DTheta,
    Eta,
    OneMinusEta,
    DEta,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum DBasis {
    Eta2Z,
    DEta,
    DTheta,
}

const U_BASES: [UBasis; 4] = [UBasis::DTheta, UBasis::Eta, UBasis::OneMinusEta, UBasis::DEta];
const D_BASES: [DBasis; 3] = [DBasis::Eta2Z, DBasis::DEta, DBasis::DTheta];

/// `z`-profiles shared by every inner construction with a given η.
#[derive(Debug, Clone)]
pub struct InnerTables {
    eta: Mollifier,
    u: [Hermite; 4],
    /// `W[ψ](±1)`, indexed `[basis][0 = −1, 1 = +1]`.
    w_ends: [[f64; 2]; 4],
    d: [Hermite; 3],
    d_ends: [[f64; 2]; 3],
    /// `∫ηθ'`, `∫(1−η)θ'`, `∫η'θ'`.
    pub a_int: f64,
    pub b_int: f64,
    pub e_int: f64,
    /// `D[φ](+∞)` for the three double-integral bases.
    pub d_totals: [f64; 3],
}

/// Values of the tabulated profiles at one `z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZBasis {
    pub z: f64,
    pub theta: f64,
    pub dtheta: f64,
    pub eta: [f64; 3],
    /// `(U, U')` for θ', η, 1−η, η'.
    pub u: [(f64, f64); 4],
    /// `(D, D')` for η''z, η', θ'.
    pub d: [(f64, f64); 3],
}

impl InnerTables {
    pub fn new(variant: EtaVariant) -> Result<Self> {
        let eta = Mollifier::new(2.0, variant)?;
        let z: Vec<f64> = (0..Z_NODES).map(|i| (i as f64 - CENTER as f64) * DZ).collect();
        let th1: Vec<f64> = z.iter().map(|&s| dtheta(s)).collect();
        let th2: Vec<f64> = z.iter().map(|&s| d2theta(s)).collect();
        let psi = |b: UBasis, s: f64| match b {
            UBasis::DTheta => dtheta(s),
            UBasis::Eta => eta.eta(s, 0),
            UBasis::OneMinusEta => 1.0 - eta.eta(s, 0),
            UBasis::DEta => eta.eta(s, 1),
        };
        let (om1, _) = tanh_parts(1.0);
        let i_plus = |b: UBasis| match b {
            UBasis::DTheta => SQRT_2 * om1 * om1 * (3.0 - om1) / 3.0,
            UBasis::Eta => om1,
            _ => 0.0,
        };
        let i_minus = |b: UBasis| match b {
            UBasis::DTheta => -SQRT_2 * om1 * om1 * (3.0 - om1) / 3.0,
            UBasis::OneMinusEta => -om1,
            _ => 0.0,
        };
        let mut u_tables = Vec::with_capacity(4);
        let mut w_ends = [[0.0; 2]; 4];
        for (bi, &b) in U_BASES.iter().enumerate() {
            let integrand: Vec<f64> = z.iter().zip(&th1).map(|(&s, &t)| psi(b, s) * t).collect();
            let from_right = cumulative_from_right(&integrand[CENTER..], DZ);
            let from_left = cumulative(&integrand[..=CENTER], DZ);
            let g_right: Vec<f64> =
                (CENTER..Z_NODES).map(|i| (i_plus(b) + from_right[i - CENTER]) / (th1[i] * th1[i])).collect();
            let g_left: Vec<f64> = (0..=CENTER).map(|i| (i_minus(b) - from_left[i]) / (th1[i] * th1[i])).collect();
            let w_right = cumulative(&g_right, DZ);
            let w_left: Vec<f64> = cumulative_from_right(&g_left, DZ).iter().map(|v| -v).collect();
            let mut val = vec![0.0; Z_NODES];
            let mut der = vec![0.0; Z_NODES];
            for i in 0..Z_NODES {
                let (w, g) = if i >= CENTER { (w_right[i - CENTER], g_right[i - CENTER]) } else { (w_left[i], g_left[i]) };
                val[i] = th1[i] * w;
                der[i] = th2[i] * w + th1[i] * g;
            }
            let der_center_left = th1[CENTER] * g_left[CENTER];
            w_ends[bi] = [w_left[0], w_right[Z_NODES - 1 - CENTER]];
            u_tables.push(Hermite { val, der, der_center_left });
        }
        let f_split = |b: DBasis, s: f64, right: bool| -> f64 {
            let (e0, e1) = (eta.eta(s, 0), eta.eta(s, 1));
            match (b, right) {
                (DBasis::Eta2Z, true) => -e1 * s - (1.0 - e0),
                (DBasis::Eta2Z, false) => e0 - s * e1,
                (DBasis::DEta, true) => 1.0 - e0,
                (DBasis::DEta, false) => -e0,
                (DBasis::DTheta, true) => tanh_parts(s).0,
                (DBasis::DTheta, false) => -tanh_parts(s).1,
            }
        };
        let mut d_tables = Vec::with_capacity(3);
        let mut d_ends = [[0.0; 2]; 3];
        let mut d_totals = [0.0; 3];
        let e1 = e_of(1.0);
        for (bi, &b) in D_BASES.iter().enumerate() {
            let start = if b == DBasis::DTheta { -ln(1.0 + e1) / SQRT_2 } else { 0.0 };
            let f_left: Vec<f64> = z[..=CENTER].iter().map(|&s| f_split(b, s, false)).collect();
            let f_right: Vec<f64> = z[CENTER..].iter().map(|&s| f_split(b, s, true)).collect();
            let c_left = cumulative(&f_left, DZ);
            let c_right = cumulative(&f_right, DZ);
            let mut val = vec![0.0; Z_NODES];
            let mut der = vec![0.0; Z_NODES];
            for i in 0..=CENTER {
                val[i] = start + c_left[i];
                der[i] = f_left[i];
            }
            let mid = val[CENTER];
            for i in CENTER..Z_NODES {
                val[i] = mid + c_right[i - CENTER];
                der[i] = f_right[i - CENTER];
            }
            d_ends[bi] = [start, val[Z_NODES - 1]];
            d_totals[bi] = val[Z_NODES - 1] + if b == DBasis::DTheta { ln(1.0 + e1) / SQRT_2 } else { 0.0 };
            d_tables.push(Hermite { val, der, der_center_left: f_left[CENTER] });
        }
        let a_int = integrate(|s| eta.eta(s, 0) * dtheta(s), -1.0, 1.0, 1e-14) + om1;
        let e_int = integrate(|s| eta.eta(s, 1) * dtheta(s), -1.0, 1.0, 1e-14);
        let u: [Hermite; 4] = u_tables.try_into().map_err(|_| invalid("table count"))?;
        let d: [Hermite; 3] = d_tables.try_into().map_err(|_| invalid("table count"))?;
        Ok(Self { eta, u, w_ends, d, d_ends, a_int, b_int: 2.0 - a_int, e_int, d_totals })
    }

    pub fn variant(&self) -> EtaVariant {
        self.eta.variant()
    }

    /// η, η', η'' at `z`.
    pub fn eta(&self, z: f64) -> [f64; 3] {
        [self.eta.eta(z, 0), self.eta.eta(z, 1), self.eta.eta(z, 2)]
    }

    fn u_tail(&self, bi: usize, z: f64) -> (f64, f64) {
        let b = U_BASES[bi];
        let s = abs(z);
        let right = z > 0.0;
        let w0 = self.w_ends[bi][usize::from(right)];
        let (w, g) = match (b, right) {
            (UBasis::DTheta, true) => (w0 + p_theta(s) - p_theta(1.0), g_theta(s)),
            (UBasis::DTheta, false) => (w0 + p_theta(s) - p_theta(1.0), -g_theta(s)),
            (UBasis::Eta, true) => (w0 + p_eta(s) - p_eta(1.0), g_eta(s)),
            (UBasis::OneMinusEta, false) => (w0 + p_eta(s) - p_eta(1.0), -g_eta(s)),
            _ => (w0, 0.0),
        };
        let t1 = stable_dtheta(z);
        (t1 * w, stable_d2theta(z) * w + t1 * g)
    }

    fn d_tail(&self, bi: usize, z: f64) -> (f64, f64) {
        let right = z > 0.0;
        let base = self.d_ends[bi][usize::from(right)];
        if D_BASES[bi] != DBasis::DTheta {
            return (base, 0.0);
        }
        let (om, op) = tanh_parts(z);
        let e = e_of(abs(z));
        if right {
            (base + (ln(1.0 + e_of(1.0)) - ln(1.0 + e)) / SQRT_2, om)
        } else {
            (-ln(1.0 + e) / SQRT_2, -op)
        }
    }

    /// All profiles at `z`. Beyond `|z| = 40` the values are frozen.
    pub fn basis(&self, z: f64) -> ZBasis {
        let zc = z.clamp(-Z_TRUNCATION, Z_TRUNCATION);
        let frozen = zc != z;
        let mut u = [(0.0, 0.0); 4];
        let mut d = [(0.0, 0.0); 3];
        for (i, slot) in u.iter_mut().enumerate() {
            *slot = if abs(zc) <= 1.0 { self.u[i].eval(zc) } else { self.u_tail(i, zc) };
            if frozen {
                slot.1 = 0.0;
            }
        }
        for (i, slot) in d.iter_mut().enumerate() {
            *slot = if abs(zc) <= 1.0 { self.d[i].eval(zc) } else { self.d_tail(i, zc) };
            if frozen {
                slot.1 = 0.0;
            }
        }
        ZBasis { z, theta: theta(z), dtheta: stable_dtheta(z), eta: self.eta(z), u, d }
    }
}

/// Degree-3 Taylor coefficients in `s = x − R`.
type Series = [f64; 4];

fn series_mul(a: &Series, b: &Series) -> Series {
    let mut c = [0.0; 4];
    for i in 0..4 {
        for j in 0..4 - i {
            c[i + j] += a[i] * b[j];
        }
    }
    c
}

fn series_eval(a: &Series, s: f64) -> f64 {
    a[0] + s * (a[1] + s * (a[2] + s * a[3]))
}

fn series_derivative(a: &Series) -> Series {
    [a[1], 2.0 * a[2], 3.0 * a[3], 0.0]
}

/// Coefficient fields at one point of Γ(δ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficients {
    pub d0: f64,
    pub laplacian_d: f64,
    pub dt_d: f64,
    pub p0: f64,
    pub q0: f64,
    /// `l⁰d⁰` (no division involved).
    pub l0d0: f64,
    pub mu: [f64; 2],
    pub sigma: [f64; 2],
    pub mu1: [f64; 2],
    pub sigma1: [f64; 2],
}

/// Which quotient field to evaluate with the two-case definition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuotientField {
    P0,
    Q0,
    G0,
    H0,
    L0,
}

/// The inner expansion attached to one outer snapshot.
#[derive(Debug, Clone)]
pub struct InnerFields {
    pub tables: Arc<InnerTables>,
    pub outer: OuterFields,
    pub eps: f64,
    pub order: Order,
    pub d1: f64,
    /// Radius of the `|d⁰| < h` band where quotients use the on-Γ form.
    pub switch_radius: f64,
    /// `[∂_rμ⁰] + 2V` of the fitted outer fields.
    pub flux_jump_residual: f64,
    mu_jump: Series,
    sigma_jump: Series,
}

impl InnerFields {
    pub fn d0(&self, x: f64) -> f64 {
        x - self.outer.r
    }

    /// Stretched variable `z = d⁰/ε + d¹` (`d¹` only at order 1).
    pub fn z(&self, x: f64) -> f64 {
        let shift = if self.order == Order::One { self.d1 } else { 0.0 };
        self.d0(x) / self.eps + shift
    }

    fn laplacian_d(&self, x: f64) -> f64 {
        self.outer.curvature_factor() / x
    }

    fn laplacian_d_series(&self) -> Series {
        let r = self.outer.r;
        let a = self.outer.curvature_factor() / r;
        [a, -a / r, a / (r * r), -a / (r * r * r)]
    }

    fn dt_d(&self) -> f64 {
        -self.outer.v
    }

    fn l_numerator(&self, x: f64) -> f64 {
        let t = &self.tables;
        self.laplacian_d(x) * surface_tension() + t.a_int * self.outer.mu0.plus.value(x) + t.b_int * self.outer.mu0.minus.value(x)
    }

    fn l_numerator_series(&self) -> Series {
        let t = &self.tables;
        let dd = self.laplacian_d_series();
        let mut c = [0.0; 4];
        for i in 0..4 {
            c[i] = dd[i] * surface_tension() + t.a_int * self.outer.mu0.plus.poly[i] + t.b_int * self.outer.mu0.minus.poly[i];
        }
        c
    }

    /// Taylor series of each quotient numerator.
    fn numerator_series(&self, which: QuotientField) -> Series {
        let dd = self.laplacian_d_series();
        let dt = self.dt_d();
        let b = self.mu_jump;
        let c = self.sigma_jump;
        let p0 = [b[1], b[2], b[3], 0.0];
        let q0 = [c[1], c[2], c[3], 0.0];
        match which {
            QuotientField::P0 => b,
            QuotientField::Q0 => c,
            QuotientField::G0 => {
                let mut n = series_mul(&b, &dd);
                let db = series_derivative(&b);
                for i in 0..4 {
                    n[i] += 2.0 * db[i] - p0[i];
                }
                n[0] -= 2.0 * dt;
                n
            }
            QuotientField::H0 => {
                let mut shifted = dd;
                shifted[0] -= dt;
                let mut n = series_mul(&c, &shifted);
                let dc = series_derivative(&c);
                for i in 0..4 {
                    n[i] += 2.0 * dc[i] - q0[i];
                }
                n
            }
            QuotientField::L0 => {
                let mut n = self.l_numerator_series();
                for v in n.iter_mut() {
                    *v /= self.tables.e_int;
                }
                n
            }
        }
    }

    /// Numerator evaluated from the actual (extended) fields.
    fn numerator(&self, which: QuotientField, x: f64) -> f64 {
        let s = self.d0(x);
        match which {
            QuotientField::L0 => self.l_numerator(x) / self.tables.e_int,
            QuotientField::P0 => self.outer.mu0.plus.value(x) - self.outer.mu0.minus.value(x),
            QuotientField::Q0 => self.outer.sigma0.plus.value(x) - self.outer.sigma0.minus.value(x),
            QuotientField::G0 => {
                let jump = self.outer.mu0.plus.value(x) - self.outer.mu0.minus.value(x);
                let djump = self.outer.mu0.plus.eval(x)[1] - self.outer.mu0.minus.eval(x)[1];
                let b = self.mu_jump;
                jump * self.laplacian_d(x) + 2.0 * djump - (b[1] + s * (b[2] + s * b[3])) - 2.0 * self.dt_d()
            }
            QuotientField::H0 => {
                let jump = self.outer.sigma0.plus.value(x) - self.outer.sigma0.minus.value(x);
                let djump = self.outer.sigma0.plus.eval(x)[1] - self.outer.sigma0.minus.eval(x)[1];
                let c = self.sigma_jump;
                jump * (self.laplacian_d(x) - self.dt_d()) + 2.0 * djump - (c[1] + s * (c[2] + s * c[3]))
            }
        }
    }

    /// Two-case evaluation: `N(x)/d⁰` for `|d⁰| ≥ h`, the on-Γ gradient
    /// form (with its Taylor terms) inside the band.
    pub fn quotient(&self, which: QuotientField, x: f64) -> f64 {
        let s = self.d0(x);
        if abs(s) >= self.switch_radius {
            self.numerator(which, x) / s
        } else {
            let n = self.numerator_series(which);
            series_eval(&[n[1], n[2], n[3], 0.0], s)
        }
    }

    /// Largest jump of any quotient field across the switch radius.
    pub fn switch_discontinuity(&self) -> f64 {
        let h = self.switch_radius;
        let mut worst: f64 = 0.0;
        for which in [QuotientField::P0, QuotientField::Q0, QuotientField::G0, QuotientField::H0, QuotientField::L0] {
            let n = self.numerator_series(which);
            for s in [-h, h] {
                let outer = self.numerator(which, self.outer.r + s) / s;
                let inner = n[1] + s * (n[2] + s * n[3]);
                worst = worst.max(abs(outer - inner) / (1.0 + abs(inner)));
            }
        }
        worst
    }

    /// Coefficient fields at `x`; `p⁰`, `q⁰` use exact polynomial division
    /// of the fitted jump polynomials.
    pub fn coefficients(&self, x: f64) -> Coefficients {
        let s = self.d0(x);
        let b = self.mu_jump;
        let c = self.sigma_jump;
        let o = &self.outer;
        let (mu1, sigma1) = match &o.first {
            Some(f) => ([f.mu1.minus.value(x), f.mu1.plus.value(x)], [f.sigma1.minus.value(x), f.sigma1.plus.value(x)]),
            None => ([0.0; 2], [0.0; 2]),
        };
        Coefficients {
            d0: s,
            laplacian_d: self.laplacian_d(x),
            dt_d: self.dt_d(),
            p0: b[1] + s * (b[2] + s * b[3]),
            q0: c[1] + s * (c[2] + s * c[3]),
            l0d0: self.l_numerator(x) / self.tables.e_int,
            mu: [o.mu0.minus.value(x), o.mu0.plus.value(x)],
            sigma: [o.sigma0.minus.value(x), o.sigma0.plus.value(x)],
            mu1,
            sigma1,
        }
    }

    /// `Θ₀,₁(z)` at `x`.
    pub fn theta01(&self, x: f64, z: f64) -> f64 {
        let c = self.coefficients(x);
        let [_, e1, e2] = self.tables.eta(z);
        c.p0 * e2 * z + (c.p0 + 2.0 * c.dt_d) * e1 - c.dt_d * dtheta(z)
    }

    /// `Θ₀,₂(z)` at `x`.
    pub fn theta02(&self, x: f64, z: f64) -> f64 {
        let c = self.coefficients(x);
        let [_, e1, e2] = self.tables.eta(z);
        c.q0 * e2 * z + c.q0 * e1
    }

    /// `Θ₀,₃(z) = θ'Δd + μ̃₀ − η'l⁰d⁰` at `x`.
    pub fn theta03(&self, x: f64, z: f64) -> f64 {
        let c = self.coefficients(x);
        let [e0, e1, _] = self.tables.eta(z);
        dtheta(z) * c.laplacian_d + e0 * c.mu[1] + (1.0 - e0) * c.mu[0] - e1 * c.l0d0
    }

    /// `(ũ_i, μ̃_i, σ̃_i)` for `i = 0, 1` at `x` with stretched variable `z`.
    pub fn profiles(&self, x: f64, zb: &ZBasis) -> [[f64; 3]; 2] {
        let c = self.coefficients(x);
        let [e0, _, _] = zb.eta;
        let mu0 = e0 * c.mu[1] + (1.0 - e0) * c.mu[0];
        let sigma0 = e0 * c.sigma[1] + (1.0 - e0) * c.sigma[0];
        let u1 = zb.dtheta / SQRT_2 + c.laplacian_d * zb.u[0].0 + c.mu[1] * zb.u[1].0 + c.mu[0] * zb.u[2].0 - c.l0d0 * zb.u[3].0;
        let t = &self.tables.d_totals;
        let a1 = c.p0 + 2.0 * c.dt_d;
        let d1 = c.p0 * zb.d[0].0 + a1 * zb.d[1].0 - c.dt_d * zb.d[2].0;
        let t1 = c.p0 * t[0] + a1 * t[1] - c.dt_d * t[2];
        let mu1 = e0 * c.mu1[1] + (1.0 - e0) * c.mu1[0] - e0 * t1 + d1;
        let d2 = c.q0 * (zb.d[0].0 + zb.d[1].0);
        let t2 = c.q0 * (t[0] + t[1]);
        let sigma1 = e0 * c.sigma1[1] + (1.0 - e0) * c.sigma1[0] - e0 * t2 + d2;
        [[zb.theta, mu0, sigma0], [u1, mu1, sigma1]]
    }

    /// Inner composite `(u_I, μ_I, σ_I)` at `x` truncated at the order.
    pub fn composite(&self, x: f64) -> [f64; 3] {
        let zb = self.tables.basis(self.z(x));
        let p = self.profiles(x, &zb);
        match self.order {
            Order::Zero => p[0],
            Order::One => [p[0][0] + self.eps * p[1][0], p[0][1] + self.eps * p[1][1], p[0][2] + self.eps * p[1][2]],
        }
    }

    /// Outer trace for the side containing `x`.
    pub fn side_of(&self, x: f64) -> Side {
        if x >= self.outer.r {
            Side::Plus
        } else {
            Side::Minus
        }
    }
}

/// `∫(θ'Δd + μ_Γ)θ' dz`: the order-1 solvability integral on Γ, where μ̃₀
/// reduces to the interface value and `d⁰ = 0`.
pub fn interface_solvability_integral(laplacian_d: f64, mu_gamma: f64) -> f64 {
    let g = |z: f64| (dtheta(z) * laplacian_d + mu_gamma) * dtheta(z);
    integrate(g, -Z_TRUNCATION, 0.0, 1e-14) + integrate(g, 0.0, Z_TRUNCATION, 1e-14)
}

/// Builds the inner expansion around the outer snapshot.
///
/// Asserts continuity of the order-0 fields across Γ, the three
/// solvability conditions (at Γ and at sample points of the layer) and
/// continuity of the quotient fields across the switch radius.
pub fn build_inner(tables: Arc<InnerTables>, outer: OuterFields, eps: f64, order: Order, switch_radius: f64) -> Result<InnerFields> {
    if !(eps > 0.0) || !(switch_radius > 0.0) {
        return Err(invalid("ε and the switch radius must be positive"));
    }
    let mu_jump = outer.mu0.jump_poly();
    let sigma_jump = outer.sigma0.jump_poly();
    let scale = 1.0 + abs(outer.mu0.plus.poly[0]);
    if abs(mu_jump[0]) > 1e-10 * scale {
        return Err(Error::Consistency { condition: "[μ⁰] = 0 on Γ".into(), residual: mu_jump[0] });
    }
    if abs(sigma_jump[0]) > 1e-10 * (1.0 + abs(outer.sigma0.plus.poly[0])) {
        return Err(Error::Consistency { condition: "[σ⁰] = 0 on Γ".into(), residual: sigma_jump[0] });
    }
    let d1 = outer.d1();
    let flux_jump_residual = mu_jump[1] + 2.0 * outer.v;
    let inner = InnerFields { tables, outer, eps, order, d1, switch_radius, flux_jump_residual, mu_jump, sigma_jump };
    // solvability of the μ̃₁ and σ̃₁ problems and, on Γ, of ũ₁
    for which in [QuotientField::G0, QuotientField::H0, QuotientField::L0] {
        let n0 = inner.numerator_series(which)[0];
        let tol = SOLVABILITY_TOL * (1.0 + abs(inner.outer.kappa) + abs(inner.outer.v));
        if abs(n0) > tol {
            let condition = match which {
                QuotientField::G0 => "∫Θ₀,₁ dz = 0 on Γ ([∂μ⁰/∂ν] = −2V)",
                QuotientField::H0 => "∫Θ₀,₂ dz = 0 on Γ ([∂σ⁰/∂ν] = 0)",
                _ => "∫Θ₀,₃θ' dz = 0 on Γ (interface value of μ⁰)",
            };
            return Err(Error::Consistency { condition: condition.into(), residual: n0 });
        }
    }
    let r = inner.outer.r;
    for frac in [-0.5, 0.0, 0.5] {
        let x = r + frac * inner.eps;
        let i1 = integrate(|z| inner.theta01(x, z), -Z_TRUNCATION, Z_TRUNCATION, 1e-12);
        let i2 = integrate(|z| inner.theta02(x, z), -Z_TRUNCATION, Z_TRUNCATION, 1e-12);
        let i3 = integrate(|z| inner.theta03(x, z) * dtheta(z), -Z_TRUNCATION, Z_TRUNCATION, 1e-12);
        for (name, v) in [("∫Θ₀,₁ dz = 0", i1), ("∫Θ₀,₂ dz = 0", i2), ("∫Θ₀,₃θ' dz = 0", i3)] {
            if abs(v) > SOLVABILITY_TOL * (1.0 + abs(inner.outer.v) + abs(inner.outer.kappa)) * 10.0 {
                return Err(Error::Consistency { condition: format!("{name} at d⁰ = {:.3e}", frac * inner.eps), residual: v });
            }
        }
    }
    // the branches use different representations of the grid data (spline
    // vs. fitted cubic), which agree to first order in the grid spacing
    let jump = inner.switch_discontinuity();
    if jump > SWITCH_TOL_PER_CELL * inner.outer.domain.spacing() {
        return Err(Error::Consistency { condition: "quotient fields continuous across |d⁰| = h".into(), residual: jump });
    }
    Ok(inner)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tables() -> InnerTables {
        InnerTables::new(EtaVariant::Bump).unwrap()
    }

    #[test]
    fn symmetric_eta_moments() {
        let t = tables();
        assert!((t.a_int - 1.0).abs() < 1e-12);
        for v in t.d_totals {
            assert!(v.abs() < 1e-10, "{v}");
        }
        assert!(t.e_int > 0.0 && t.e_int < 2.0);
    }

    /// `−U'' + f''(θ)U = ψ` checked by finite differences, across the table
    /// edge and in the tails.
    #[test]
    fn basis_profiles_solve_the_linearized_equation() {
        let t = tables();
        let eta = Mollifier::new(2.0, EtaVariant::Bump).unwrap();
        let psi = |i: usize, z: f64| match i {
            0 => dtheta(z),
            1 => eta.eta(z, 0),
            2 => 1.0 - eta.eta(z, 0),
            _ => eta.eta(z, 1),
        };
        let h = 1e-3;
        for i in 0..4 {
            for &z in &[-6.0, -1.5, -0.9993, -0.4, 0.37, 0.9996, 1.01, 3.0, 7.0] {
                let u = |s: f64| t.basis(s).u[i].0;
                let upp = (u(z + h) - 2.0 * u(z) + u(z - h)) / (h * h);
                let th = theta(z);
                let lhs = -upp + (12.0 * th * th - 4.0) * u(z);
                assert!((lhs - psi(i, z)).abs() < 2e-4, "basis {i} z {z}: {lhs} vs {}", psi(i, z));
                let du = (u(z + h) - u(z - h)) / (2.0 * h);
                assert!((du - t.basis(z).u[i].1).abs() < 1e-5);
            }
            assert_eq!(t.basis(0.0).u[i].0, 0.0);
        }
        assert!((t.basis(30.0).u[1].0 - 0.125).abs() < 1e-12);
        assert!((t.basis(-30.0).u[2].0 - 0.125).abs() < 1e-12);
    }

    #[test]
    fn double_integrals_have_the_right_curvature() {
        let t = tables();
        let eta = Mollifier::new(2.0, EtaVariant::Bump).unwrap();
        let phi = |i: usize, z: f64| match i {
            0 => eta.eta(z, 2) * z,
            1 => eta.eta(z, 1),
            _ => dtheta(z),
        };
        let h = 1e-3;
        for i in 0..3 {
            for &z in &[-3.0, -0.99, -0.3, 0.2, 0.98, 1.2, 4.0] {
                let d = |s: f64| t.basis(s).d[i].0;
                let dpp = (d(z + h) - 2.0 * d(z) + d(z - h)) / (h * h);
                assert!((dpp + phi(i, z)).abs() < 1e-4, "basis {i} at {z}: {dpp}");
            }
            assert!(t.basis(-39.0).d[i].0.abs() < 1e-12);
        }
    }

    #[test]
    fn interface_integral_oracle() {
        let s = 4.0 * SQRT_2 / 3.0;
        let dd = 1.0 / 0.5;
        let kappa = -dd;
        assert!(interface_solvability_integral(dd, 0.5 * kappa * s).abs() < 1e-10);
        let off = interface_solvability_integral(dd, 0.5 * kappa * s + 0.1);
        assert!((off - 0.2).abs() < 1e-10);
    }

    #[test]
    fn series_helpers() {
        let a = [1.0, 2.0, 0.0, 0.0];
        let b = [3.0, 0.0, 1.0, 0.0];
        assert_eq!(series_mul(&a, &b), [3.0, 6.0, 1.0, 2.0]);
        assert_eq!(series_eval(&a, 2.0), 5.0);
    }
}
