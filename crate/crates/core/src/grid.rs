//! Node-centred finite-volume grids for 1D intervals and radially symmetric
//! balls.
//!
//! Each node `xᵢ` owns the control volume between the neighbouring face
//! midpoints; the boundary nodes own half cells. With the radial measure
//! `r^{N−1} dr` the discrete Laplacian is `Δ = V⁻¹K` where `K` is symmetric
//! tridiagonal, so homogeneous Neumann data and the axis `r = 0` (zero face
//! area) need no ghost nodes, and `Σ Vᵢ (Δg)ᵢ = 0` holds exactly.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::invalid;
use crate::linalg::solve_tridiagonal;
use crate::math::powi;
use crate::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    nodes: Vec<f64>,
    dim: usize,
    volumes: Vec<f64>,
    /// `K_{i,i+1} = A(x_{i+½}) / (x_{i+1} − xᵢ)`.
    couplings: Vec<f64>,
}

/// `∫_a^b r^{N−1} dr`.
pub fn shell_volume(a: f64, b: f64, dim: usize) -> f64 {
    (powi(b, dim as i32) - powi(a, dim as i32)) / dim as f64
}

impl Grid {
    /// `dim` is the measure dimension: 1 for an interval (or slab), `N` for a
    /// ball, in which case all nodes must be non-negative.
    pub fn new(nodes: Vec<f64>, dim: usize) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(invalid("dimension must be 1, 2 or 3"));
        }
        if nodes.len() < 3 {
            return Err(invalid("grid needs at least 3 nodes"));
        }
        if nodes.windows(2).any(|w| !(w[1] > w[0])) || nodes.iter().any(|x| !x.is_finite()) {
            return Err(invalid("grid nodes must be finite and strictly increasing"));
        }
        if dim > 1 && nodes[0] < 0.0 {
            return Err(invalid("radial grid must start at r ≥ 0"));
        }
        let n = nodes.len();
        let mut volumes = Vec::with_capacity(n);
        for i in 0..n {
            let lo = if i == 0 { nodes[0] } else { 0.5 * (nodes[i - 1] + nodes[i]) };
            let hi = if i == n - 1 { nodes[n - 1] } else { 0.5 * (nodes[i] + nodes[i + 1]) };
            volumes.push(shell_volume(lo, hi, dim));
        }
        let couplings = (0..n - 1)
            .map(|i| {
                let f = 0.5 * (nodes[i] + nodes[i + 1]);
                powi(f, dim as i32 - 1) / (nodes[i + 1] - nodes[i])
            })
            .collect();
        Ok(Self { nodes, dim, volumes, couplings })
    }

    pub fn uniform(a: f64, b: f64, n: usize, dim: usize) -> Result<Self> {
        if !(b > a) || n < 3 {
            return Err(invalid("uniform grid needs a < b and n ≥ 3"));
        }
        let h = (b - a) / (n - 1) as f64;
        let mut nodes: Vec<f64> = (0..n).map(|i| a + i as f64 * h).collect();
        nodes[n - 1] = b;
        Self::new(nodes, dim)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn volumes(&self) -> &[f64] {
        &self.volumes
    }

    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    /// `Σ Vᵢ gᵢ`.
    pub fn mass(&self, g: &[f64]) -> f64 {
        self.volumes.iter().zip(g).map(|(v, x)| v * x).sum()
    }

    pub fn measure(&self) -> f64 {
        self.volumes.iter().sum()
    }

    /// `(K g)ᵢ`, the net face flux into volume `i`.
    pub fn flux_divergence(&self, g: &[f64]) -> Vec<f64> {
        let n = self.len();
        let mut out = vec![0.0; n];
        for i in 0..n - 1 {
            let f = self.couplings[i] * (g[i + 1] - g[i]);
            out[i] += f;
            out[i + 1] -= f;
        }
        out
    }

    /// Neumann Laplacian `V⁻¹ K g`.
    pub fn laplacian(&self, g: &[f64]) -> Vec<f64> {
        let mut out = self.flux_divergence(g);
        for (o, v) in out.iter_mut().zip(&self.volumes) {
            *o /= v;
        }
        out
    }

    /// Discrete Dirichlet energy `Σ K_{i,i+1} (g_{i+1} − gᵢ)²`.
    pub fn gradient_energy(&self, g: &[f64]) -> f64 {
        (0..self.len() - 1)
            .map(|i| {
                let d = g[i + 1] - g[i];
                self.couplings[i] * d * d
            })
            .sum()
    }

    /// Solves `(a·V − K) x = V·rhs` (Neumann), `a > 0`.
    pub fn solve_shifted(&self, a: f64, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.len();
        let mut lower = vec![0.0; n];
        let mut upper = vec![0.0; n];
        let mut diag: Vec<f64> = self.volumes.iter().map(|v| a * v).collect();
        for i in 0..n - 1 {
            let c = self.couplings[i];
            diag[i] += c;
            diag[i + 1] += c;
            upper[i] = -c;
            lower[i + 1] = -c;
        }
        let b: Vec<f64> = rhs.iter().zip(&self.volumes).map(|(r, v)| r * v).collect();
        solve_tridiagonal(&lower[1..], &diag, &upper[..n - 1], &b)
    }

    /// Volume mean `Σ Vᵢ gᵢ / Σ Vᵢ`.
    pub fn mean(&self, g: &[f64]) -> f64 {
        self.mass(g) / self.measure()
    }

    /// Mean-zero solution of `Δx = g − ḡ` with Neumann data. The face
    /// fluxes are the running source sums, so no linear system is needed.
    pub fn solve_neumann_poisson(&self, g: &[f64]) -> Result<Vec<f64>> {
        let n = self.len();
        if g.len() != n {
            return Err(invalid("source length does not match the grid"));
        }
        let mean = self.mean(g);
        let mut x = vec![0.0; n];
        let mut flux = 0.0;
        for i in 0..n - 1 {
            flux += self.volumes[i] * (g[i] - mean);
            x[i + 1] = x[i] + flux / self.couplings[i];
        }
        let shift = self.mean(&x);
        for v in x.iter_mut() {
            *v -= shift;
        }
        Ok(x)
    }

    /// Piecewise-linear interpolation, clamped to the end values.
    pub fn interpolate(&self, g: &[f64], x: f64) -> f64 {
        interpolate(&self.nodes, g, x)
    }
}

/// Piecewise-linear interpolation on increasing nodes, clamped at the ends.
pub fn interpolate(nodes: &[f64], g: &[f64], x: f64) -> f64 {
    let n = nodes.len();
    if x <= nodes[0] {
        return g[0];
    }
    if x >= nodes[n - 1] {
        return g[n - 1];
    }
    let j = nodes.partition_point(|&y| y <= x).clamp(1, n - 1);
    let (x0, x1) = (nodes[j - 1], nodes[j]);
    let s = (x - x0) / (x1 - x0);
    g[j - 1] + s * (g[j] - g[j - 1])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_is_reproduced_in_every_dimension() {
        for dim in 1..=3 {
            let g = Grid::uniform(0.0, 1.0, 41, dim).unwrap();
            let f: Vec<f64> = g.nodes().iter().map(|r| r * r).collect();
            let lap = g.laplacian(&f);
            for (i, l) in lap.iter().enumerate().take(40) {
                assert!((l - 2.0 * dim as f64).abs() < 1e-9, "dim {dim} node {i}: {l}");
            }
        }
    }

    #[test]
    fn volumes_partition_the_domain() {
        let g = Grid::uniform(0.0, 2.0, 17, 3).unwrap();
        assert!((g.measure() - 8.0 / 3.0).abs() < 1e-13);
        let g = Grid::uniform(-1.0, 1.0, 17, 1).unwrap();
        assert!((g.measure() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn neumann_poisson_inverts_the_laplacian() {
        let g = Grid::uniform(0.0, 1.0, 201, 2).unwrap();
        let src: Vec<f64> = g.nodes().iter().map(|r| (4.0 * r).cos() + r).collect();
        let x = g.solve_neumann_poisson(&src).unwrap();
        let lap = g.laplacian(&x);
        let m = g.mean(&src);
        for (l, s) in lap.iter().zip(&src) {
            assert!((l - (s - m)).abs() < 1e-9);
        }
        assert!(g.mean(&x).abs() < 1e-14);
    }

    #[test]
    fn flux_form_conserves() {
        let g = Grid::uniform(0.0, 1.0, 33, 2).unwrap();
        let f: Vec<f64> = g.nodes().iter().map(|r| (3.0 * r).sin()).collect();
        let div = g.flux_divergence(&f);
        assert!(div.iter().sum::<f64>().abs() < 1e-13);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Grid::new(vec![0.0, 1.0, 1.0], 1).is_err());
        assert!(Grid::new(vec![-1.0, 0.0, 1.0], 2).is_err());
        assert!(Grid::uniform(0.0, 1.0, 10, 4).is_err());
    }

    #[test]
    fn interpolation_is_exact_for_lines() {
        let x = [0.0, 0.3, 1.0];
        let y = [1.0, 1.6, 3.0];
        assert!((interpolate(&x, &y, 0.65) - 2.3).abs() < 1e-14);
        assert_eq!(interpolate(&x, &y, -1.0), 1.0);
    }
}
