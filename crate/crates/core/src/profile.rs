//! Double-well potential, the standing-wave profile, the mollifier η and the
//! cutoff ζ.

use alloc::vec::Vec;
use core::f64::consts::SQRT_2;

use crate::math::{abs, exp, powi, sech2, sqrt, tanh};
use crate::{error::invalid, quad, Result};

/// Half-line truncation for whole-line integrals in the stretched variable.
pub const Z_TRUNCATION: f64 = 40.0;

/// The quartic double well `f(u) = (u² − 1)²`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Potential;

impl Potential {
    /// `f^{(order)}(u)` for `order ∈ {0, 1, 2, 3}`.
    pub fn derivative(&self, u: f64, order: u32) -> Result<f64> {
        match order {
            0 => Ok(f(u)),
            1 => Ok(df(u)),
            2 => Ok(d2f(u)),
            3 => Ok(d3f(u)),
            _ => Err(invalid("potential derivative order must be 0..=3")),
        }
    }
}

#[inline]
pub fn f(u: f64) -> f64 {
    let w = u * u - 1.0;
    w * w
}
#[inline]
pub fn df(u: f64) -> f64 {
    4.0 * u * (u * u - 1.0)
}
#[inline]
pub fn d2f(u: f64) -> f64 {
    12.0 * u * u - 4.0
}
#[inline]
pub fn d3f(u: f64) -> f64 {
    24.0 * u
}

/// The heteroclinic standing wave `θ(z) = tanh(√2 z)`, solution of
/// `θ'' = f'(θ)`, `θ(0) = 0`, `θ(±∞) = ±1`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Profile;

impl Profile {
    pub fn theta(&self, z: f64, order: u32) -> Result<f64> {
        match order {
            0 => Ok(theta(z)),
            1 => Ok(dtheta(z)),
            2 => Ok(d2theta(z)),
            _ => Err(invalid("profile derivative order must be 0..=2")),
        }
    }
}

#[inline]
pub fn theta(z: f64) -> f64 {
    tanh(SQRT_2 * z)
}
#[inline]
pub fn dtheta(z: f64) -> f64 {
    SQRT_2 * sech2(SQRT_2 * z)
}
#[inline]
pub fn d2theta(z: f64) -> f64 {
    -4.0 * theta(z) * sech2(SQRT_2 * z)
}

/// `S = ∫_{−1}^{1} √(2 f(u)) du`, by adaptive quadrature.
pub fn surface_tension() -> f64 {
    quad::integrate(|u| sqrt(2.0 * f(u)), -1.0, 1.0, 1e-12)
}

/// `∫ (θ')² dz` over the truncated line; equals [`surface_tension`].
pub fn surface_tension_whole_line() -> f64 {
    let g = |z: f64| {
        let t = dtheta(z);
        t * t
    };
    quad::integrate(g, -Z_TRUNCATION, 0.0, 1e-13) + quad::integrate(g, 0.0, Z_TRUNCATION, 1e-13)
}

/// Admissible choices for the smooth switch η.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EtaVariant {
    /// Normalised primitive of the C^∞ bump `exp(−1/(1−s²))`.
    #[default]
    Bump,
    /// Degree-7 polynomial smoothstep (C³).
    Smoothstep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MollifierKind {
    Plain,
    /// `η₊(z) = η(−M + z)`
    Plus,
    /// `η₋(z) = η(−M − z)`
    Minus,
}

const BUMP_PANELS: usize = 4096;

/// Smooth non-decreasing η with η = 0 on (−∞, −1] and η = 1 on [1, ∞).
#[derive(Debug, Clone)]
pub struct Mollifier {
    shift: f64,
    variant: EtaVariant,
    norm: f64,
    table: Vec<f64>,
}

fn bump(s: f64) -> f64 {
    if abs(s) >= 1.0 {
        0.0
    } else {
        exp(-1.0 / (1.0 - s * s))
    }
}

impl Mollifier {
    /// `shift` is the constant M used by the shifted switches η±.
    pub fn new(shift: f64, variant: EtaVariant) -> Result<Self> {
        if !(shift.is_finite() && shift >= 2.0) {
            return Err(invalid("mollifier shift M must be finite and ≥ 2"));
        }
        let (norm, table) = match variant {
            EtaVariant::Bump => {
                let norm = 1.0 / quad::integrate(bump, -1.0, 1.0, 1e-15);
                let dz = 2.0 / BUMP_PANELS as f64;
                let mut table = Vec::with_capacity(BUMP_PANELS + 1);
                let mut acc = 0.0;
                table.push(0.0);
                for j in 0..BUMP_PANELS {
                    let a = -1.0 + j as f64 * dz;
                    acc += quad::integrate(bump, a, a + dz, 1e-17);
                    table.push(acc * norm);
                }
                (norm, table)
            }
            EtaVariant::Smoothstep => (1.0, Vec::new()),
        };
        Ok(Self { shift, variant, norm, table })
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn variant(&self) -> EtaVariant {
        self.variant
    }

    /// η and its first two derivatives at `z`.
    pub fn eta(&self, z: f64, derivative: u32) -> f64 {
        if z <= -1.0 {
            return 0.0;
        }
        if z >= 1.0 {
            return if derivative == 0 { 1.0 } else { 0.0 };
        }
        match self.variant {
            EtaVariant::Bump => match derivative {
                0 => self.bump_primitive(z),
                1 => self.norm * bump(z),
                _ => {
                    let q = 1.0 - z * z;
                    -2.0 * z / (q * q) * self.norm * bump(z)
                }
            },
            EtaVariant::Smoothstep => {
                let t = 0.5 * (z + 1.0);
                match derivative {
                    0 => powi(t, 4) * (35.0 - 84.0 * t + 70.0 * t * t - 20.0 * t * t * t),
                    1 => 0.5 * 140.0 * powi(t, 3) * powi(1.0 - t, 3),
                    _ => 0.25 * 420.0 * t * t * (1.0 - t) * (1.0 - t) * (1.0 - 2.0 * t),
                }
            }
        }
    }

    /// Plain, plus or minus switch, with derivative order up to 2.
    pub fn eval(&self, z: f64, kind: MollifierKind, derivative: u32) -> f64 {
        match kind {
            MollifierKind::Plain => self.eta(z, derivative),
            MollifierKind::Plus => self.eta(-self.shift + z, derivative),
            MollifierKind::Minus => {
                let s = if derivative % 2 == 1 { -1.0 } else { 1.0 };
                s * self.eta(-self.shift - z, derivative)
            }
        }
    }

    fn bump_primitive(&self, z: f64) -> f64 {
        let dz = 2.0 / BUMP_PANELS as f64;
        let x = (z + 1.0) / dz;
        let j = (x as usize).min(BUMP_PANELS - 1);
        let t = x - j as f64;
        let (y0, y1) = (self.table[j], self.table[j + 1]);
        let za = -1.0 + j as f64 * dz;
        let (m0, m1) = (self.norm * bump(za) * dz, self.norm * bump(za + dz) * dz);
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * m0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * m1
    }
}

/// Cutoff ζ with ζ = 1 for |s| ≤ ½ and ζ = 0 for |s| ≥ 1, built from η.
#[derive(Debug, Clone)]
pub struct Cutoff {
    eta: Mollifier,
}

impl Cutoff {
    pub fn new(variant: EtaVariant) -> Self {
        Self { eta: Mollifier::new(2.0, variant).expect("fixed shift is admissible") }
    }

    pub fn eval(&self, s: f64, derivative: u32) -> f64 {
        let a = abs(s);
        let arg = 4.0 * a - 3.0;
        match derivative {
            0 => 1.0 - self.eta.eta(arg, 0),
            1 => -4.0 * crate::math::signum(s) * self.eta.eta(arg, 1),
            _ => -16.0 * self.eta.eta(arg, 2),
        }
    }
}

impl Default for Cutoff {
    fn default() -> Self {
        Self::new(EtaVariant::Bump)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn potential_examples() {
        let p = Potential;
        assert_eq!(p.derivative(0.0, 0).unwrap(), 1.0);
        assert_eq!(p.derivative(1.0, 1).unwrap(), 0.0);
        assert_eq!(p.derivative(1.0, 2).unwrap(), 8.0);
        assert_eq!(p.derivative(-1.0, 2).unwrap(), 8.0);
        assert_eq!(p.derivative(0.0, 2).unwrap(), -4.0);
        assert_eq!(p.derivative(0.5, 3).unwrap(), 12.0);
        assert!(p.derivative(0.5, 4).is_err());
        assert_eq!(f(1.0), 0.0);
        assert_eq!(f(-1.0), 0.0);
    }

    #[test]
    fn theta_examples() {
        let p = Profile;
        assert_eq!(p.theta(0.0, 0).unwrap(), 0.0);
        assert!((p.theta(1.0, 0).unwrap() - 0.888_385_561_585_660_6).abs() < 1e-15);
        assert!((p.theta(0.0, 1).unwrap() - SQRT_2).abs() < 1e-15);
        assert!(p.theta(0.0, 3).is_err());
    }

    #[test]
    fn surface_tension_closed_form() {
        let s = surface_tension();
        assert!((s - 4.0 * SQRT_2 / 3.0).abs() < 1e-12);
        assert!((surface_tension_whole_line() - s).abs() < 1e-10);
        let two_f = 2.0 * quad::integrate(|z| f(theta(z)), -Z_TRUNCATION, Z_TRUNCATION, 1e-13);
        assert!((two_f - s).abs() < 1e-10);
    }

    #[test]
    fn mollifier_plateaus_and_shifts() {
        for v in [EtaVariant::Bump, EtaVariant::Smoothstep] {
            let m = Mollifier::new(3.0, v).unwrap();
            assert_eq!(m.eval(-1.5, MollifierKind::Plain, 0), 0.0);
            assert_eq!(m.eval(2.0, MollifierKind::Plain, 0), 1.0);
            assert_eq!(m.eval(0.0, MollifierKind::Plus, 0), 0.0);
            assert_eq!(m.eval(0.0, MollifierKind::Minus, 0), 0.0);
            assert_eq!(m.eval(4.5, MollifierKind::Plus, 0), 1.0);
            assert_eq!(m.eval(-4.5, MollifierKind::Minus, 0), 1.0);
            assert!((m.eta(0.0, 0) - 0.5).abs() < 1e-12);
            let total = quad::integrate(|z| m.eta(z, 1), -1.0, 1.0, 1e-13);
            assert!((total - 1.0).abs() < 1e-11);
        }
        assert!(Mollifier::new(1.0, EtaVariant::Bump).is_err());
    }

    #[test]
    fn mollifier_derivatives_match_differences() {
        for v in [EtaVariant::Bump, EtaVariant::Smoothstep] {
            let m = Mollifier::new(2.0, v).unwrap();
            let h = 1e-5;
            for k in 0..40 {
                let z = -0.95 + k as f64 * 0.0475;
                let d1 = (m.eta(z + h, 0) - m.eta(z - h, 0)) / (2.0 * h);
                let d2 = (m.eta(z + h, 1) - m.eta(z - h, 1)) / (2.0 * h);
                assert!((d1 - m.eta(z, 1)).abs() < 1e-8, "{v:?} z={z}");
                assert!((d2 - m.eta(z, 2)).abs() < 1e-6 * (1.0 + m.eta(z, 2).abs()), "{v:?} z={z}");
            }
            let hm = 1e-6;
            let dm = (m.eval(-3.0 + hm, MollifierKind::Minus, 0) - m.eval(-3.0 - hm, MollifierKind::Minus, 0)) / (2.0 * hm);
            assert!((dm - m.eval(-3.0, MollifierKind::Minus, 1)).abs() < 1e-7);
        }
    }

    #[test]
    fn cutoff_plateaus() {
        let c = Cutoff::default();
        for s in [-0.5, -0.2, 0.0, 0.3, 0.5] {
            assert_eq!(c.eval(s, 0), 1.0);
        }
        for s in [-3.0, -1.0, 1.0, 1.7] {
            assert_eq!(c.eval(s, 0), 0.0);
        }
        assert!((c.eval(0.75, 0) - 0.5).abs() < 1e-12);
        assert!((c.eval(-0.75, 0) - 0.5).abs() < 1e-12);
    }
}
