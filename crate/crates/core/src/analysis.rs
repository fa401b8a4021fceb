//! Error norms, rate fits and diagnostics shared by the harness.

use alloc::format;
use alloc::vec::Vec;

use crate::error::invalid;
use crate::grid::Grid;
use crate::math::{abs, ln};
use crate::{Error, Result};

/// Ordinary least squares `y ≈ slope·x + intercept`; `residual` is the
/// root-mean-square deviation of the fit.
pub fn least_squares(pts: &[(f64, f64)]) -> Result<(f64, f64, f64)> {
    if pts.len() < 2 {
        return Err(Error::DegenerateFit("need at least two points".into()));
    }
    if pts.iter().any(|p| !p.0.is_finite() || !p.1.is_finite()) {
        return Err(invalid("fit data must be finite"));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let scale = pts.iter().map(|p| abs(p.0)).fold(0.0, f64::max).max(1e-300);
    if sxx <= 1e-24 * scale * scale * n {
        return Err(Error::DegenerateFit("abscissae are (nearly) identical".into()));
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = pts
        .iter()
        .map(|p| {
            let r = p.1 - slope * p.0 - intercept;
            r * r
        })
        .sum();
    Ok((slope, intercept, crate::math::sqrt(ss / n)))
}

/// A fitted power law `e ≈ C εʳ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub rate: f64,
    /// `ln C`.
    pub intercept: f64,
    pub residual: f64,
}

/// Least-squares fit of `ln e` against `ln ε`.
pub fn fit_rate(errors: &[(f64, f64)]) -> Result<RateFit> {
    if errors.len() < 3 {
        return Err(invalid("rate fits need at least three points"));
    }
    if let Some(p) = errors.iter().find(|p| !(p.0 > 0.0) || !(p.1 > 0.0)) {
        return Err(invalid(format!("cannot take logarithms of ({}, {})", p.0, p.1)));
    }
    for (i, a) in errors.iter().enumerate() {
        if errors[..i].iter().any(|b| b.0 == a.0) {
            return Err(Error::DegenerateFit(format!("ε = {} repeated", a.0)));
        }
    }
    let pts: Vec<(f64, f64)> = errors.iter().map(|&(e, v)| (ln(e), ln(v))).collect();
    let (rate, intercept, residual) = least_squares(&pts)?;
    Ok(RateFit { rate, intercept, residual })
}

/// `true` when every entry is strictly smaller than its predecessor.
pub fn strictly_decreasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] < w[0])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PoissonBoundary {
    /// `−Δψ = φ − φ̄`, `∂ψ/∂ν = 0`, `∫ψ = 0`.
    NeumannMeanZero,
    /// `−Δϱ = σ`, `ϱ = 0` on the outer boundary (the axis of a ball stays
    /// a symmetry point).
    Dirichlet,
}

/// Result of [`negative_norm`]; the input is never modified, the removed
/// mean is reported instead.
#[derive(Debug, Clone, PartialEq)]
pub struct NegativeNorm {
    /// `‖∇ψ‖_{L²}`.
    pub norm: f64,
    pub removed_mean: f64,
    pub potential: Vec<f64>,
}

/// `H⁻¹`-type norm: solves the Poisson problem for the field and returns
/// the energy `‖∇ψ‖`.
pub fn negative_norm(grid: &Grid, field: &[f64], boundary: PoissonBoundary) -> Result<NegativeNorm> {
    if field.len() != grid.len() {
        return Err(invalid("field length does not match the grid"));
    }
    match boundary {
        PoissonBoundary::NeumannMeanZero => {
            let removed_mean = grid.mean(field);
            let neg: Vec<f64> = field.iter().map(|v| -v).collect();
            let potential = grid.solve_neumann_poisson(&neg)?;
            let norm = crate::math::sqrt(grid.gradient_energy(&potential));
            Ok(NegativeNorm { norm, removed_mean, potential })
        }
        PoissonBoundary::Dirichlet => {
            let n = grid.len();
            let c = grid.couplings();
            let vol = grid.volumes();
            let mut lower = alloc::vec![0.0; n];
            let mut diag = alloc::vec![0.0; n];
            let mut upper = alloc::vec![0.0; n];
            let mut rhs = alloc::vec![0.0; n];
            for i in 0..n - 1 {
                diag[i] += c[i];
                diag[i + 1] += c[i];
                upper[i] = -c[i];
                lower[i + 1] = -c[i];
            }
            for i in 0..n {
                rhs[i] = vol[i] * field[i];
            }
            // pin the outer node; on an interval pin both ends
            let pins: &[usize] = if grid.dim() == 1 { &[0, n - 1] } else { &[n - 1] };
            for &p in pins {
                diag[p] = 1.0;
                rhs[p] = 0.0;
                if p > 0 {
                    lower[p] = 0.0;
                }
                if p + 1 < n {
                    upper[p] = 0.0;
                }
            }
            let potential = crate::linalg::solve_tridiagonal(&lower[1..], &diag, &upper[..n - 1], &rhs)?;
            let norm = crate::math::sqrt(grid.gradient_energy(&potential));
            Ok(NegativeNorm { norm, removed_mean: 0.0, potential })
        }
    }
}

/// Partition of the computational domain at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    /// `Ω₋ \ Γ(δ)`.
    OuterMinus,
    /// `Ω₊ \ Γ(δ)`.
    OuterPlus,
    /// `Γ(δ) = {|d⁰| < δ}`.
    Layer,
}

pub fn classify(x: f64, r: f64, delta: f64) -> Region {
    let d = x - r;
    if abs(d) < delta {
        Region::Layer
    } else if d < 0.0 {
        Region::OuterMinus
    } else {
        Region::OuterPlus
    }
}

/// Sup-norm of `a − b` over the nodes accepted by `keep`.
pub fn sup_error(nodes: &[f64], a: &[f64], b: &[f64], keep: impl Fn(f64) -> bool) -> f64 {
    nodes
        .iter()
        .zip(a.iter().zip(b))
        .filter(|(x, _)| keep(**x))
        .map(|(_, (p, q))| abs(p - q))
        .fold(0.0, f64::max)
}

/// Linearly interpolated zero crossing of `u` (the first sign change from
/// negative to non-negative).
pub fn zero_crossing(nodes: &[f64], u: &[f64]) -> Option<f64> {
    for i in 0..nodes.len().saturating_sub(1) {
        let (a, b) = (u[i], u[i + 1]);
        if a < 0.0 && b >= 0.0 {
            return Some(nodes[i] + (nodes[i + 1] - nodes[i]) * (-a) / (b - a));
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    #[test]
    fn synthetic_laws() {
        let eps = [0.1, 0.05, 0.025];
        let lin: Vec<(f64, f64)> = eps.iter().map(|&e| (e, 0.1 * e)).collect();
        let f = fit_rate(&lin).unwrap();
        assert!((f.rate - 1.0).abs() < 1e-12 && f.residual < 1e-12);
        let quad: Vec<(f64, f64)> = eps.iter().map(|&e| (e, e * e)).collect();
        assert!((fit_rate(&quad).unwrap().rate - 2.0).abs() < 1e-12);
        let flat: Vec<(f64, f64)> = eps.iter().map(|&e| (e, 3.0)).collect();
        assert!(fit_rate(&flat).unwrap().rate.abs() < 1e-12);
    }

    #[test]
    fn fit_errors() {
        assert!(matches!(fit_rate(&[(0.1, 1.0), (0.05, 0.0), (0.02, 1.0)]), Err(Error::InvalidArgument(_))));
        assert!(matches!(fit_rate(&[(0.1, 1.0), (0.1, 0.5), (0.1, 0.2)]), Err(Error::DegenerateFit(_))));
        assert!(fit_rate(&[(0.1, 1.0), (0.05, 0.5)]).is_err());
    }

    #[test]
    fn negative_norm_of_cosine() {
        let g = Grid::uniform(0.0, 1.0, 4001, 1).unwrap();
        let f: Vec<f64> = g.nodes().iter().map(|x| (PI * x).cos()).collect();
        let r = negative_norm(&g, &f, PoissonBoundary::NeumannMeanZero).unwrap();
        assert!((r.norm * r.norm - 1.0 / (2.0 * PI * PI)).abs() < 1e-6);
        let c = alloc::vec![2.5; g.len()];
        let r = negative_norm(&g, &c, PoissonBoundary::NeumannMeanZero).unwrap();
        assert!(r.norm < 1e-12);
        assert!((r.removed_mean - 2.5).abs() < 1e-12);
        let z = alloc::vec![0.0; g.len()];
        assert_eq!(negative_norm(&g, &z, PoissonBoundary::Dirichlet).unwrap().norm, 0.0);
    }

    #[test]
    fn dirichlet_norm_of_sine() {
        // −ϱ'' = sin(πx), ϱ(0) = ϱ(1) = 0 → ϱ = sin(πx)/π², ‖ϱ'‖² = 1/(2π²)
        let g = Grid::uniform(0.0, 1.0, 4001, 1).unwrap();
        let f: Vec<f64> = g.nodes().iter().map(|x| (PI * x).sin()).collect();
        let r = negative_norm(&g, &f, PoissonBoundary::Dirichlet).unwrap();
        assert!((r.norm * r.norm - 1.0 / (2.0 * PI * PI)).abs() < 1e-6);
    }

    #[test]
    fn regions_and_crossings() {
        assert_eq!(classify(0.45, 0.5, 0.1), Region::Layer);
        assert_eq!(classify(0.3, 0.5, 0.1), Region::OuterMinus);
        assert_eq!(classify(0.7, 0.5, 0.1), Region::OuterPlus);
        let x = [0.0, 1.0, 2.0];
        assert_eq!(zero_crossing(&x, &[-1.0, -0.5, 0.5]), Some(1.5));
        assert_eq!(zero_crossing(&x, &[1.0, 1.0, 1.0]), None);
        assert_eq!(sup_error(&x, &[1.0, 2.0, 3.0], &[1.0, 0.0, 3.5], |_| true), 2.0);
    }
}
