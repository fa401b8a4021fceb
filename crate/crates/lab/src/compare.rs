//! Error norms between a diffuse run, the glued approximation and the sharp
//! limit.

use sharplim_core::analysis::{classify, negative_norm, zero_crossing, PoissonBoundary, Region};
use sharplim_core::asymptotic::ApproxSolution;
use sharplim_core::grid::Grid;
use sharplim_core::profile::theta;
use sharplim_core::{Error, Result};

/// Initial data `σ₀ = σ^A(·,0)`, `u₀ = φ^A(·,0) − σ₀`.
pub fn impose_initial(approx: &ApproxSolution) -> Result<(Vec<f64>, Vec<f64>)> {
    if approx.t.abs() > 1e-14 {
        return Err(Error::InvalidArgument(format!("initial data needs the approximation at t = 0, got t = {}", approx.t)));
    }
    let sigma = approx.sigma.clone();
    let u = approx.phi.iter().zip(&sigma).map(|(p, s)| p - s).collect();
    Ok((u, sigma))
}

/// Fields of one trajectory at one instant, on the comparison grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSnapshot {
    pub t: f64,
    pub u: Vec<f64>,
    pub mu: Vec<f64>,
    pub sigma: Vec<f64>,
    pub phi: Vec<f64>,
}

impl FieldSnapshot {
    pub fn from_approx(a: &ApproxSolution) -> Self {
        Self { t: a.t, u: a.u.clone(), mu: a.mu.clone(), sigma: a.sigma.clone(), phi: a.phi.clone() }
    }
}

/// Sharp-limit data at one instant: `R(t)`, `d¹`, the gluing width and the
/// sharp μ, σ sampled on the comparison grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SharpSample {
    pub t: f64,
    pub r: f64,
    pub d1: f64,
    pub delta: f64,
    pub mu: Vec<f64>,
    pub sigma: Vec<f64>,
}

/// Sup-in-time errors of one ε run.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ErrorEntry {
    pub eps: f64,
    /// `‖u^ε − u^A‖` on `Ω₋ \ Γ(δ)`.
    pub u_outer_minus: f64,
    /// `‖u^ε − u^A‖` on `Ω₊ \ Γ(δ)`.
    pub u_outer_plus: f64,
    /// `‖u^ε − u^A‖` on `Γ(δ)`.
    pub u_layer: f64,
    pub sigma: f64,
    pub mu: f64,
    /// `‖u^ε − θ(d⁰/ε + d¹)‖` on `Γ(δ)`.
    pub layer_profile: f64,
    /// `‖∇ψ‖` with `−Δψ = φ^ε − φ^A` (mean removed), sup over snapshots.
    pub phi_negative_norm: f64,
    /// Largest mean removed by the projection above.
    pub phi_mean_removed: f64,
    /// `|R^ε(t) − R(t)|`; infinite when `u^ε` has no zero crossing.
    pub interface: f64,
    pub mass_drift: f64,
    pub snapshots: usize,
}

impl ErrorEntry {
    pub fn u_outer(&self) -> f64 {
        self.u_outer_minus.max(self.u_outer_plus)
    }
}

/// Node counts per region, summed over snapshots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Partition {
    pub outer_minus: usize,
    pub outer_plus: usize,
    pub layer: usize,
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max)
}

/// Compares `diffuse` against `approx` snapshot by snapshot; σ, μ, the
/// layer profile and the front are measured against `sharp`.
pub fn compare(
    grid: &Grid,
    eps: f64,
    diffuse: &[FieldSnapshot],
    approx: &[FieldSnapshot],
    sharp: &[SharpSample],
) -> Result<(ErrorEntry, Partition)> {
    let n = grid.len();
    if diffuse.len() != approx.len() || diffuse.len() != sharp.len() || diffuse.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "snapshot counts differ: {} diffuse, {} approximate, {} sharp",
            diffuse.len(),
            approx.len(),
            sharp.len()
        )));
    }
    let nodes = grid.nodes();
    let mut e = ErrorEntry { eps, snapshots: diffuse.len(), ..ErrorEntry::default() };
    let mut part = Partition::default();
    for ((a, b), s) in diffuse.iter().zip(approx).zip(sharp) {
        let fields = [&a.u, &a.mu, &a.sigma, &a.phi, &b.u, &b.mu, &b.sigma, &b.phi, &s.mu, &s.sigma];
        if fields.iter().any(|f| f.len() != n) {
            return Err(Error::InvalidArgument("field length does not match the grid".into()));
        }
        let tol = 1e-9 * a.t.abs().max(1.0);
        if (a.t - b.t).abs() > tol || (a.t - s.t).abs() > tol {
            return Err(Error::InvalidArgument(format!("snapshot times differ: {} / {} / {}", a.t, b.t, s.t)));
        }
        for (i, &x) in nodes.iter().enumerate() {
            let du = (a.u[i] - b.u[i]).abs();
            match classify(x, s.r, s.delta) {
                Region::OuterMinus => {
                    part.outer_minus += 1;
                    e.u_outer_minus = e.u_outer_minus.max(du);
                }
                Region::OuterPlus => {
                    part.outer_plus += 1;
                    e.u_outer_plus = e.u_outer_plus.max(du);
                }
                Region::Layer => {
                    part.layer += 1;
                    e.u_layer = e.u_layer.max(du);
                    let profile = theta((x - s.r) / eps + s.d1);
                    e.layer_profile = e.layer_profile.max((a.u[i] - profile).abs());
                }
            }
        }
        e.sigma = e.sigma.max(max_abs_diff(&a.sigma, &s.sigma));
        e.mu = e.mu.max(max_abs_diff(&a.mu, &s.mu));
        let err: Vec<f64> = a.phi.iter().zip(&b.phi).map(|(p, q)| p - q).collect();
        let nn = negative_norm(grid, &err, PoissonBoundary::NeumannMeanZero)?;
        e.phi_negative_norm = e.phi_negative_norm.max(nn.norm);
        e.phi_mean_removed = e.phi_mean_removed.max(nn.removed_mean.abs());
        let front = zero_crossing(nodes, &a.u).map_or(f64::INFINITY, |z| (z - s.r).abs());
        e.interface = e.interface.max(front);
    }
    Ok((e, part))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> (Grid, Vec<FieldSnapshot>, Vec<SharpSample>) {
        let grid = Grid::uniform(0.0, 1.0, 201, 2).unwrap();
        let eps = 0.05;
        let mut snaps = Vec::new();
        let mut sharp = Vec::new();
        for m in 0..4 {
            let t = 0.01 * m as f64;
            let r = 0.5 - 0.1 * t;
            let u: Vec<f64> = grid.nodes().iter().map(|&x| theta((x - r) / eps)).collect();
            let sigma: Vec<f64> = grid.nodes().iter().map(|&x| 0.1 * x * x).collect();
            let mu: Vec<f64> = grid.nodes().iter().map(|&x| (x - r).sin()).collect();
            let phi = u.iter().zip(&sigma).map(|(a, b)| a + b).collect();
            snaps.push(FieldSnapshot { t, u, mu: mu.clone(), sigma: sigma.clone(), phi });
            sharp.push(SharpSample { t, r, d1: 0.0, delta: 0.2, mu, sigma });
        }
        (grid, snaps, sharp)
    }

    #[test]
    fn self_comparison_is_exact() {
        let (g, s, sh) = setup();
        let (e, part) = compare(&g, 0.05, &s, &s, &sh).unwrap();
        assert_eq!(e.u_outer(), 0.0);
        assert_eq!(e.u_layer, 0.0);
        assert_eq!(e.sigma, 0.0);
        assert_eq!(e.mu, 0.0);
        assert_eq!(e.phi_negative_norm, 0.0);
        assert!(e.layer_profile < 1e-15);
        assert!(e.interface < 1e-3);
        // each node lands in exactly one region per snapshot
        assert_eq!(part.outer_minus + part.outer_plus + part.layer, 4 * g.len());
    }

    #[test]
    fn constant_offset_is_measured_exactly() {
        let (g, s, sh) = setup();
        let eps = 0.05;
        let shifted: Vec<FieldSnapshot> = s
            .iter()
            .map(|f| {
                let mut f = f.clone();
                f.u.iter_mut().for_each(|v| *v += eps);
                f
            })
            .collect();
        let (e, _) = compare(&g, eps, &shifted, &s, &sh).unwrap();
        assert!((e.u_outer() - eps).abs() < 1e-15);
        assert!((e.u_layer - eps).abs() < 1e-15);
        // swapping the trajectories leaves the |a − b| fields unchanged
        let (f, _) = compare(&g, eps, &s, &shifted, &sh).unwrap();
        assert_eq!((e.u_outer_minus, e.u_outer_plus, e.u_layer), (f.u_outer_minus, f.u_outer_plus, f.u_layer));
        assert_eq!(e.phi_negative_norm, f.phi_negative_norm);
    }

    #[test]
    fn mismatched_inputs_are_rejected() {
        let (g, s, sh) = setup();
        assert!(compare(&g, 0.05, &s[..3], &s, &sh).is_err());
        let mut late = s.clone();
        late[1].t += 1e-3;
        assert!(compare(&g, 0.05, &late, &s, &sh).is_err());
        let coarse = Grid::uniform(0.0, 1.0, 101, 2).unwrap();
        assert!(compare(&coarse, 0.05, &s, &s, &sh).is_err());
    }
}
