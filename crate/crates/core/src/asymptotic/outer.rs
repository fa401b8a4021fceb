//! Outer expansion: the sharp solution as order 0 and a first-order
//! correction integrated alongside it.
//!
//! The order-1 outer problem, obtained by collecting `O(ε)` terms of the
//! diffuse system away from Γ and matching across the layer, reads
//!
//! ```text
//! u₁ = μ₀ / 8,
//! −Δμ₁ + μ₁ = 2σ₁ + u₁ − ∂_t u₁,
//! ∂_tσ₁ − Δσ₁ + 2σ₁ = μ₁ − u₁,
//! μ₁±|_Γ = V₀/√2 + (N−1) S R₁ / (2R²) − R₁ ∂_rμ₀±,
//! [σ₁] = 0,  [∂_rσ₁] = −2R₁,
//! R₁' = R₁ (1 − K₀V₀) − ½ [∂_rμ₁],   K₀ = (N−1)/R,
//! ```
//!
//! where the front sits at `R + εR₁` (so `d¹ = −R₁`). Both corrections start
//! from zero.

use alloc::vec;
use alloc::vec::Vec;

use super::fit::{Side, SideField};
use super::Order;
use crate::error::invalid;
use crate::grid::{shell_volume, Grid};
use crate::linalg::solve_tridiagonal;
use crate::math::{powi, sqrt};
use crate::profile::surface_tension;
use crate::sharp::{implicit_step, interface_halves, one_sided, GeometryKind, RadialDomain, SharpSolver, SharpState};
use crate::{Error, Result};

/// First-order outer correction on the sharp state's split grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Order1State {
    pub t: f64,
    /// `R₁`; the order-1 front is `R + εR₁`.
    pub r1: f64,
    /// `R₁'`.
    pub dr1: f64,
    /// μ₁ on nodes `0..=k` (Ω₋ trace at `k`).
    pub mu1_minus: Vec<f64>,
    /// μ₁ on nodes `k..n` (Ω₊ trace first).
    pub mu1_plus: Vec<f64>,
    pub sigma1: Vec<f64>,
}

/// Recorded sharp trajectory with an optional lockstep order-1 correction.
#[derive(Debug, Clone, PartialEq)]
pub struct SharpHistory {
    pub domain: RadialDomain,
    pub sharp: Vec<SharpState>,
    pub order1: Option<Vec<Order1State>>,
}

impl SharpHistory {
    pub fn len(&self) -> usize {
        self.sharp.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sharp.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.sharp.iter().map(|s| s.t).collect()
    }

    /// Index of the recorded step closest to `t`.
    pub fn index_near(&self, t: f64) -> usize {
        let mut best = 0;
        for (i, s) in self.sharp.iter().enumerate() {
            if (s.t - t).abs() < (self.sharp[best].t - t).abs() {
                best = i;
            }
        }
        best
    }

    pub fn outer(&self, j: usize) -> Result<OuterFields> {
        let o1 = self.order1.as_ref().map(|v| &v[j]);
        build_outer(&self.domain, &self.sharp[j], o1)
    }
}

/// `N − 1` for a ball, 0 for an interval.
fn curvature_factor(domain: &RadialDomain) -> f64 {
    match domain.kind {
        GeometryKind::Ball => (domain.dim - 1) as f64,
        GeometryKind::Interval => 0.0,
    }
}

/// Runs the sharp solver from `initial` to `t_end`, recording every step,
/// and (for [`Order::One`]) the order-1 correction in lockstep.
pub fn run_history(solver: &SharpSolver, initial: SharpState, dt: f64, t_end: f64, order: Order) -> Result<SharpHistory> {
    if !(dt > 0.0) || !(t_end >= initial.t) {
        return Err(invalid("history needs dt > 0 and t_end ≥ t₀"));
    }
    let steps = crate::math::ceil_usize((t_end - initial.t) / dt - 1e-9);
    let mut sharp = Vec::with_capacity(steps + 1);
    sharp.push(initial);
    for _ in 0..steps {
        let s = sharp.last().unwrap();
        let h = (t_end - s.t).min(dt);
        let next = solver.advance(s, h)?;
        sharp.push(next);
    }
    let order1 = match order {
        Order::Zero => None,
        Order::One => {
            let domain = &solver.domain;
            let probe;
            let first_next = if sharp.len() > 1 {
                &sharp[1]
            } else {
                probe = solver.advance(&sharp[0], dt)?;
                &probe
            };
            let mut states = Vec::with_capacity(sharp.len());
            states.push(order1_initial(domain, &sharp[0], first_next)?);
            for j in 1..sharp.len() {
                let next = order1_step(domain, &sharp[j - 1], &sharp[j], &states[j - 1])?;
                states.push(next);
            }
            Some(states)
        }
    };
    Ok(SharpHistory { domain: solver.domain, sharp, order1 })
}

/// Grid derivative `∂_rg` at every node of the split grid: central inside
/// each sub-grid, one-sided (own side) at Γ, zero at the outer ends.
fn split_gradient(nodes: &[f64], g: &[f64], k: usize, side_at_k: Side) -> Vec<f64> {
    let n = nodes.len();
    let mut d = vec![0.0; n];
    for i in 1..n - 1 {
        if i == k {
            let (l, r) = one_sided(nodes, g, k);
            d[i] = if side_at_k == Side::Minus { l } else { r };
        } else {
            d[i] = (g[i + 1] - g[i - 1]) / (nodes[i + 1] - nodes[i - 1]);
        }
    }
    d
}

/// `∂_tμ₀` at fixed `x` on the nodes of `at`, from two consecutive states.
fn mu_time_derivative(prev: &SharpState, next: &SharpState, at: &SharpState) -> Vec<f64> {
    let dt = next.t - prev.t;
    let grad = split_gradient(&at.nodes, &at.mu, at.k, Side::Minus);
    (0..at.nodes.len())
        .map(|i| {
            let xdot = (next.nodes[i] - prev.nodes[i]) / dt;
            (next.mu[i] - prev.mu[i]) / dt - xdot * grad[i]
        })
        .collect()
}

fn interface_mu1(domain: &RadialDomain, s: &SharpState, r1: f64) -> (f64, f64) {
    let (dm, dp) = s.mu_interface_derivatives();
    let base = s.v / sqrt(2.0) + curvature_factor(domain) * surface_tension() * r1 / (2.0 * s.r * s.r);
    (base - r1 * dm, base - r1 * dp)
}

/// Dirichlet–Neumann solve of `−Δμ + μ = f` on one side of Γ.
fn side_solve(nodes: &[f64], dim: usize, f: &[f64], interface_value: f64, side: Side) -> Result<Vec<f64>> {
    let grid = Grid::new(nodes.to_vec(), dim)?;
    let n = nodes.len();
    let vol = grid.volumes();
    let c = grid.couplings();
    let mut lower = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut upper = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    let pinned = if side == Side::Minus { n - 1 } else { 0 };
    for i in 0..n {
        if i == pinned {
            diag[i] = 1.0;
            rhs[i] = interface_value;
            continue;
        }
        diag[i] = vol[i];
        if i > 0 {
            diag[i] += c[i - 1];
            lower[i] = -c[i - 1];
        }
        if i + 1 < n {
            diag[i] += c[i];
            upper[i] = -c[i];
        }
        rhs[i] = vol[i] * f[i];
    }
    solve_tridiagonal(&lower[1..], &diag, &upper[..n - 1], &rhs)
}

fn solve_mu1(domain: &RadialDomain, s: &SharpState, sigma1: &[f64], dmu0: &[f64], r1: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let k = s.k;
    let dim = domain.measure_dim();
    let f: Vec<f64> = (0..s.nodes.len()).map(|i| 2.0 * sigma1[i] + (s.mu[i] - dmu0[i]) / 8.0).collect();
    let (gm, gp) = interface_mu1(domain, s, r1);
    let minus = side_solve(&s.nodes[..=k], dim, &f[..=k], gm, Side::Minus)?;
    let plus = side_solve(&s.nodes[k..], dim, &f[k..], gp, Side::Plus)?;
    Ok((minus, plus))
}

/// One-sided interface slopes of a field stored as separate side arrays.
fn trace_slopes(nodes: &[f64], k: usize, minus: &[f64], plus: &[f64]) -> (f64, f64) {
    let hm = nodes[k] - nodes[k - 1];
    let hp = nodes[k + 1] - nodes[k];
    let dm = (3.0 * minus[k] - 4.0 * minus[k - 1] + minus[k - 2]) / (2.0 * hm);
    let dp = (-3.0 * plus[0] + 4.0 * plus[1] - plus[2]) / (2.0 * hp);
    (dm, dp)
}

fn r1_rate(domain: &RadialDomain, s: &SharpState, r1: f64, minus: &[f64], plus: &[f64]) -> f64 {
    let (dm, dp) = trace_slopes(&s.nodes, s.k, minus, plus);
    let k0 = curvature_factor(domain) / s.r;
    r1 * (1.0 - k0 * s.v) - 0.5 * (dp - dm)
}

fn order1_initial(domain: &RadialDomain, s0: &SharpState, s1: &SharpState) -> Result<Order1State> {
    let sigma1 = vec![0.0; s0.nodes.len()];
    let dmu0 = mu_time_derivative(s0, s1, s0);
    let (mu1_minus, mu1_plus) = solve_mu1(domain, s0, &sigma1, &dmu0, 0.0)?;
    let dr1 = r1_rate(domain, s0, 0.0, &mu1_minus, &mu1_plus);
    Ok(Order1State { t: s0.t, r1: 0.0, dr1, mu1_minus, mu1_plus, sigma1 })
}

fn order1_step(domain: &RadialDomain, prev: &SharpState, next: &SharpState, o: &Order1State) -> Result<Order1State> {
    let dt = next.t - prev.t;
    if !(dt > 0.0) {
        return Err(invalid("order-1 step needs increasing times"));
    }
    let r1 = o.r1 + dt * o.dr1;
    let k = prev.k;
    let dim = domain.measure_dim();
    let grid = Grid::new(next.nodes.clone(), dim)?;
    let vol = grid.volumes();
    let n = next.nodes.len();
    let mu1_at = |i: usize| if i < k { o.mu1_minus[i] } else { o.mu1_plus[i - k] };
    let mut source: Vec<f64> = (0..n)
        .map(|i| {
            let u1 = prev.mu[i] / 8.0;
            if i == k {
                let (lo, hi) = interface_halves(&next.nodes, k, dim);
                lo * (o.mu1_minus[k] - u1) + hi * (o.mu1_plus[0] - u1)
            } else {
                vol[i] * (mu1_at(i) - u1)
            }
        })
        .collect();
    let area = match domain.kind {
        GeometryKind::Ball => powi(next.r, dim as i32 - 1),
        GeometryKind::Interval => 1.0,
    };
    source[k] += 2.0 * r1 * area;
    let xdot: Vec<f64> = next.nodes.iter().zip(&prev.nodes).map(|(a, b)| (a - b) / dt).collect();
    let sigma1 = implicit_step(&grid, &o.sigma1, &xdot, dt, &source)?;
    let dmu0 = mu_time_derivative(prev, next, next);
    let (mu1_minus, mu1_plus) = solve_mu1(domain, next, &sigma1, &dmu0, r1)?;
    let dr1 = r1_rate(domain, next, r1, &mu1_minus, &mu1_plus);
    if !dr1.is_finite() || sigma1.iter().any(|v| !v.is_finite()) {
        return Err(Error::Halted { t: next.t, reason: "order-1 correction became non-finite".into() });
    }
    Ok(Order1State { t: next.t, r1, dr1, mu1_minus, mu1_plus, sigma1 })
}

/// A pair of one-sided fields.
#[derive(Debug, Clone, PartialEq)]
pub struct SidePair {
    pub minus: SideField,
    pub plus: SideField,
}

impl SidePair {
    pub fn get(&self, side: Side) -> &SideField {
        match side {
            Side::Minus => &self.minus,
            Side::Plus => &self.plus,
        }
    }

    /// `(+) − (−)` of the Taylor extensions as cubic coefficients in `x − R`.
    pub fn jump_poly(&self) -> [f64; 4] {
        let mut b = [0.0; 4];
        for (i, v) in b.iter_mut().enumerate() {
            *v = self.plus.poly[i] - self.minus.poly[i];
        }
        b
    }
}

/// Smooth one-sided outer fields at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct OuterFields {
    pub t: f64,
    pub r: f64,
    pub v: f64,
    pub kappa: f64,
    pub domain: RadialDomain,
    pub mu0: SidePair,
    pub sigma0: SidePair,
    /// Order-1 data, present when built from an order-1 history.
    pub first: Option<FirstOrderFields>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FirstOrderFields {
    pub r1: f64,
    pub dr1: f64,
    pub mu1: SidePair,
    pub sigma1: SidePair,
}

impl OuterFields {
    /// `(N−1)` for the distance Laplacian `Δd⁰ = (N−1)/r`.
    pub fn curvature_factor(&self) -> f64 {
        curvature_factor(&self.domain)
    }

    /// `d¹ = −R₁` (zero without order-1 data).
    pub fn d1(&self) -> f64 {
        self.first.as_ref().map_or(0.0, |f| -f.r1)
    }

    /// `u₀±`.
    pub fn u0(side: Side) -> f64 {
        side.sign()
    }
}

fn pair(nodes: &[f64], k: usize, minus: &[f64], plus: &[f64], slopes: (f64, f64)) -> Result<SidePair> {
    Ok(SidePair {
        minus: SideField::new(Side::Minus, &nodes[..=k], minus, slopes.0, 0.0)?,
        plus: SideField::new(Side::Plus, &nodes[k..], plus, slopes.1, 0.0)?,
    })
}

/// Builds the smooth outer fields from a sharp state (and its order-1
/// companion when present).
///
/// Each side is a clamped spline whose interface slope is the one-sided
/// grid derivative, so `[∂_rμ₀] = −2V` holds exactly for the fitted fields.
/// σ₀ is C¹ across Γ; both sides share the mean one-sided slope.
pub fn build_outer(domain: &RadialDomain, s: &SharpState, o1: Option<&Order1State>) -> Result<OuterFields> {
    let k = s.k;
    if k < 3 || s.nodes.len() - k < 4 {
        return Err(Error::Geometry("each phase needs at least four grid nodes".into()));
    }
    let mu0 = pair(&s.nodes, k, &s.mu[..=k], &s.mu[k..], s.mu_interface_derivatives())?;
    let (sl, sr) = s.sigma_interface_derivatives();
    let mean = 0.5 * (sl + sr);
    let sigma0 = pair(&s.nodes, k, &s.sigma[..=k], &s.sigma[k..], (mean, mean))?;
    let first = match o1 {
        None => None,
        Some(o) => {
            if o.sigma1.len() != s.nodes.len() || o.mu1_minus.len() != k + 1 {
                return Err(invalid("order-1 state does not match the sharp grid"));
            }
            let mu1 = pair(&s.nodes, k, &o.mu1_minus, &o.mu1_plus, trace_slopes(&s.nodes, k, &o.mu1_minus, &o.mu1_plus))?;
            let sigma1 = pair(&s.nodes, k, &o.sigma1[..=k], &o.sigma1[k..], one_sided(&s.nodes, &o.sigma1, k))?;
            Some(FirstOrderFields { r1: o.r1, dr1: o.dr1, mu1, sigma1 })
        }
    };
    Ok(OuterFields { t: s.t, r: s.r, v: s.v, kappa: s.kappa, domain: *domain, mu0, sigma0, first })
}

/// Total measure of `Ω` for the domain.
pub fn domain_measure(domain: &RadialDomain) -> f64 {
    shell_volume(domain.r_in, domain.r_out, domain.measure_dim())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn history(order: Order) -> SharpHistory {
        let d = RadialDomain::ball(2, 1.0, 401).unwrap();
        let solver = SharpSolver::new(d);
        let s0 = solver.initial(0.5, |_| 0.0).unwrap();
        run_history(&solver, s0, 1e-3, 0.01, order).unwrap()
    }

    #[test]
    fn outer_fields_reproduce_grid_values_and_jump() {
        let h = history(Order::Zero);
        let s = &h.sharp[5];
        let o = h.outer(5).unwrap();
        for i in (0..s.nodes.len()).step_by(37) {
            let side = if i <= s.k { Side::Minus } else { Side::Plus };
            assert!((o.mu0.get(side).value(s.nodes[i]) - s.mu[i]).abs() < 1e-12);
        }
        let b = o.mu0.jump_poly();
        assert!(b[0].abs() < 1e-12);
        assert!((b[1] + 2.0 * s.v).abs() < 1e-12);
        let c = o.sigma0.jump_poly();
        assert!(c[0].abs() < 1e-12 && c[1].abs() < 1e-14);
    }

    #[test]
    fn order_one_interface_data() {
        let h = history(Order::One);
        let o1 = h.order1.as_ref().unwrap();
        assert_eq!(o1.len(), h.sharp.len());
        assert_eq!(o1[0].r1, 0.0);
        let s = &h.sharp[4];
        let o = &o1[4];
        let (gm, gp) = interface_mu1(&h.domain, s, o.r1);
        assert!((o.mu1_minus[s.k] - gm).abs() < 1e-14);
        assert!((o.mu1_plus[0] - gp).abs() < 1e-14);
        let base = s.v / sqrt(2.0);
        assert!((gm - base).abs() < 10.0 * o.r1.abs() + 1e-14);
        assert!(o.sigma1.iter().all(|v| v.is_finite()));
        // dr1 integrates into r1
        assert!((o1[5].r1 - o.r1 - (o1[5].t - o.t) * o.dr1).abs() < 1e-14);
    }
}
