//! Neumann eigenproblem for the linearised Allen–Cahn operator
//! `L_f = −d²/dz² + f''(θ(z))` on `I_ε = (−1/ε, 1/ε)`, and discrete
//! Rayleigh-quotient lower bounds for layered fields on `(0, 1)`.
//!
//! The operator is discretised on a uniform grid with even reflection at
//! both ends using the fourth-order stencil
//! `−Δ₂ + (h²/12) Δ₂² + V`, where `Δ₂` is the standard three-point Neumann
//! Laplacian. Both terms are self-adjoint for trapezoid weights, so the
//! matrix is symmetrised by the square root of the weights. Eigenvalues are
//! bracketed by inertia-count bisection, eigenvectors come from inverse
//! iteration, and the reported eigenvalue is the Rayleigh quotient written as
//! a sum of squares, which keeps exponentially small values resolvable.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::{dot, SymBand};
use crate::math::{abs, ln, sqrt};
use crate::profile::{d2f, dtheta};
use crate::{error::invalid, Error, Result};

/// Eigenvalues with modulus below this are treated as numerically zero.
pub const CENSOR_THRESHOLD: f64 = 1e-13;
/// Relative eigen-residual tolerance `‖Sq − λq‖ / ‖S‖`.
pub const RESIDUAL_TOL: f64 = 1e-10;
const INVERSE_ITERATIONS: usize = 40;

/// Discrete Neumann problem `L_f q = λ q` on `I_ε`.
#[derive(Debug, Clone)]
pub struct EigenProblem {
    eps: f64,
    n: usize,
    potential: Vec<f64>,
}

impl EigenProblem {
    /// Layer potential `f''(θ(z))`.
    pub fn new(eps: f64, n: usize) -> Result<Self> {
        Self::with_potential(eps, n, |z| d2f(crate::profile::theta(z)))
    }

    /// Arbitrary potential sampled at the grid nodes.
    pub fn with_potential(eps: f64, n: usize, v: impl Fn(f64) -> f64) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(invalid("ε must be positive"));
        }
        if n < 64 {
            return Err(invalid("at least 64 grid points required"));
        }
        let h = 2.0 / (eps * (n - 1) as f64);
        let potential = (0..n).map(|i| v(-1.0 / eps + i as f64 * h)).collect();
        Ok(Self { eps, n, potential })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn spacing(&self) -> f64 {
        2.0 / (self.eps * (self.n - 1) as f64)
    }

    pub fn nodes(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..self.n).map(|i| -1.0 / self.eps + i as f64 * h).collect()
    }

    pub fn potential(&self) -> &[f64] {
        &self.potential
    }
}

/// Lowest eigenpairs; eigenvectors have unit discrete L² norm and are
/// positive at the centre node.
#[derive(Debug, Clone)]
pub struct SpectralResult {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    /// `1/‖θ'‖` in the same discrete norm.
    pub alpha: f64,
    pub h: f64,
    /// Largest relative eigen-residual among the returned pairs.
    pub residual: f64,
}

impl SpectralResult {
    pub fn lambda1(&self) -> f64 {
        self.values[0]
    }

    pub fn lambda2(&self) -> Option<f64> {
        self.values.get(1).copied()
    }

    pub fn q1(&self) -> &[f64] {
        &self.vectors[0]
    }

    /// Weighted discrete inner product `Σ h wᵢ aᵢ bᵢ`.
    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        weighted_inner(a, b, self.h)
    }
}

pub(crate) fn weighted_inner(a: &[f64], b: &[f64], h: f64) -> f64 {
    let n = a.len();
    let mut s = dot(a, b);
    s -= 0.5 * (a[0] * b[0] + a[n - 1] * b[n - 1]);
    s * h
}

/// The `count ∈ {1, 2, 3}` smallest eigenpairs of the discrete `L_f`.
pub fn solve_lowest_pairs(problem: &EigenProblem, count: usize) -> Result<SpectralResult> {
    if !(1..=3).contains(&count) {
        return Err(invalid("count must be 1, 2 or 3"));
    }
    let h = problem.spacing();
    let (values, vectors, residual) = lowest_pairs(h, &problem.potential, count)?;
    for w in values.windows(2) {
        if w[0] >= w[1] {
            return Err(Error::Numerical { what: format!("eigenvalues not separated: {} ≥ {}", w[0], w[1]), residual });
        }
    }
    let nodes = problem.nodes();
    let dt: Vec<f64> = nodes.iter().map(|&z| dtheta(z)).collect();
    let alpha = 1.0 / sqrt(weighted_inner(&dt, &dt, h));
    Ok(SpectralResult { values, vectors, alpha, h, residual })
}

/// `‖q₁ − αθ'‖²` in the discrete L² norm of the result's grid.
pub fn eigenfunction_deviation(result: &SpectralResult, eps: f64) -> f64 {
    let q = result.q1();
    let n = q.len();
    let d: Vec<f64> = (0..n)
        .map(|i| q[i] - result.alpha * dtheta(-1.0 / eps + i as f64 * result.h))
        .collect();
    weighted_inner(&d, &d, result.h)
}

fn laplacian_row(n: usize, h: f64, i: usize) -> [(usize, f64); 3] {
    let c = 1.0 / (h * h);
    if i == 0 {
        [(0, -2.0 * c), (1, 2.0 * c), (1, 0.0)]
    } else if i == n - 1 {
        [(n - 2, 2.0 * c), (n - 1, -2.0 * c), (n - 1, 0.0)]
    } else {
        [(i - 1, c), (i, -2.0 * c), (i + 1, c)]
    }
}

/// Entries of `A = −Δ₂ + (h²/12)Δ₂²` as `(i, j, value)` for `j ≤ i`.
fn operator_entries(n: usize, h: f64) -> Vec<(usize, usize, f64)> {
    let mut out = Vec::with_capacity(3 * n);
    let k = h * h / 12.0;
    for i in 0..n {
        let mut row = [0.0f64; 5];
        for &(m, dim) in laplacian_row(n, h, i).iter() {
            if dim == 0.0 {
                continue;
            }
            row[m + 2 - i] -= dim;
            for &(j, dmj) in laplacian_row(n, h, m).iter() {
                if dmj != 0.0 {
                    row[j + 2 - i] += k * dim * dmj;
                }
            }
        }
        for (o, &v) in row.iter().enumerate().take(3) {
            if i + o >= 2 {
                out.push((i, i + o - 2, v));
            }
        }
    }
    out
}

fn weights(n: usize) -> Vec<f64> {
    let mut w = vec![1.0; n];
    w[0] = 0.5;
    w[n - 1] = 0.5;
    w
}

fn symmetric_operator(h: f64, potential: &[f64]) -> SymBand {
    let n = potential.len();
    let w = weights(n);
    let mut s = SymBand::zeros(n, 2);
    for (i, j, v) in operator_entries(n, h) {
        let val = if i == j { v + potential[i] } else { v * sqrt(w[i] / w[j]) };
        s.set(i, j, val);
    }
    s
}

/// `Σ (q_{i+1} − q_i)²/h² + (h²/12) Σ wᵢ (Δ₂q)ᵢ² + Σ wᵢ Vᵢ qᵢ²` over `Σ wᵢ qᵢ²`.
fn energy_quotient(h: f64, potential: &[f64], q: &[f64]) -> f64 {
    let n = q.len();
    let w = weights(n);
    let mut grad = 0.0;
    for i in 0..n - 1 {
        let d = q[i + 1] - q[i];
        grad += d * d;
    }
    grad /= h * h;
    let mut bih = 0.0;
    for i in 0..n {
        let l: f64 = laplacian_row(n, h, i).iter().map(|&(j, c)| c * q[j]).sum();
        bih += w[i] * l * l;
    }
    let pot: f64 = (0..n).map(|i| w[i] * potential[i] * q[i] * q[i]).sum();
    let mass: f64 = (0..n).map(|i| w[i] * q[i] * q[i]).sum();
    (grad + h * h / 12.0 * bih + pot) / mass
}

fn bisect_kth(s: &SymBand, k: usize, lo: f64, hi: f64) -> f64 {
    let (mut lo, mut hi) = (lo, hi);
    let floor = 4.0 * f64::EPSILON * s.norm_inf();
    for _ in 0..300 {
        if hi - lo <= floor.max(f64::EPSILON * (abs(lo) + abs(hi))) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if s.ldlt(mid, None).negatives() >= k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

fn normalize(v: &mut [f64]) {
    let nrm = sqrt(dot(v, v));
    for x in v.iter_mut() {
        *x /= nrm;
    }
}

/// Core solver on a uniform Neumann grid of spacing `h` with potential `V`.
/// Returns eigenvalues, W-normalised eigenvectors and the largest residual.
pub(crate) fn lowest_pairs(h: f64, potential: &[f64], count: usize) -> Result<(Vec<f64>, Vec<Vec<f64>>, f64)> {
    let n = potential.len();
    if potential.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite potential".into()));
    }
    let s = symmetric_operator(h, potential);
    let w = weights(n);
    let norm = s.norm_inf();
    let (glo, ghi) = s.gershgorin();
    let mut values = Vec::with_capacity(count);
    let mut ys: Vec<Vec<f64>> = Vec::with_capacity(count);
    let mut worst = 0.0f64;
    for k in 1..=count {
        let approx = bisect_kth(&s, k, glo, ghi);
        let shift = approx - 1e-3 * f64::EPSILON * norm.max(1.0);
        let fac = s.ldlt(shift, None);
        let mut y: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * ((i * 37 % 11) as f64)).collect();
        let mut lambda = approx;
        let mut res = f64::INFINITY;
        for _ in 0..INVERSE_ITERATIONS {
            for prev in &ys {
                let c = dot(&y, prev);
                for (a, b) in y.iter_mut().zip(prev) {
                    *a -= c * b;
                }
            }
            normalize(&mut y);
            let mut next = fac.solve(&y);
            for prev in &ys {
                let c = dot(&next, prev);
                for (a, b) in next.iter_mut().zip(prev) {
                    *a -= c * b;
                }
            }
            normalize(&mut next);
            let q: Vec<f64> = next.iter().zip(&w).map(|(a, wi)| a / sqrt(*wi)).collect();
            lambda = energy_quotient(h, potential, &q);
            let sy = s.matvec(&next);
            res = sy.iter().zip(&next).map(|(a, b)| abs(a - lambda * b)).fold(0.0, f64::max) / norm;
            let settled = y.iter().zip(&next).map(|(a, b)| abs(a - b)).fold(0.0, f64::max) < 1e-13;
            y = next;
            if res <= RESIDUAL_TOL && settled {
                break;
            }
        }
        if res > RESIDUAL_TOL {
            return Err(Error::Numerical { what: format!("inverse iteration for eigenpair {k}"), residual: res });
        }
        worst = worst.max(res);
        values.push(lambda);
        ys.push(y);
    }
    let centre = n / 2;
    let vectors = ys
        .into_iter()
        .map(|y| {
            let mut q: Vec<f64> = y.iter().zip(&w).map(|(a, wi)| a / sqrt(*wi)).collect();
            let nrm = sqrt(weighted_inner(&q, &q, h));
            let sign = if q[centre] < 0.0 { -1.0 } else { 1.0 };
            for x in q.iter_mut() {
                *x *= sign / nrm;
            }
            q
        })
        .collect();
    Ok((values, vectors, worst))
}

/// Potential used by [`lambda1_decay_study`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StudyPotential {
    Layer,
    /// Constant potential; a control with no exponentially small eigenvalue.
    Constant(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayEntry {
    pub eps: f64,
    pub inv_eps: f64,
    pub lambda1: f64,
    pub log_abs_lambda1: f64,
    pub censored: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayStudy {
    pub entries: Vec<DecayEntry>,
    pub slope: f64,
    pub intercept: f64,
    pub residual: f64,
}

/// Solves the eigenproblem along a strictly decreasing ε ladder and fits
/// `log|λ₁|` against `1/ε`. The fitted slope must be negative.
pub fn lambda1_decay_study(ladder: &[f64], n: usize, potential: StudyPotential) -> Result<DecayStudy> {
    if ladder.len() < 3 {
        return Err(invalid("decay study needs at least 3 ladder entries"));
    }
    if ladder.windows(2).any(|w| w[1] >= w[0]) {
        return Err(invalid("ladder must be strictly decreasing"));
    }
    let mut entries = Vec::with_capacity(ladder.len());
    for &eps in ladder {
        let p = match potential {
            StudyPotential::Layer => EigenProblem::new(eps, n)?,
            StudyPotential::Constant(c) => EigenProblem::with_potential(eps, n, |_| c)?,
        };
        let r = solve_lowest_pairs(&p, 1)?;
        let l = r.lambda1();
        let censored = abs(l) < CENSOR_THRESHOLD;
        entries.push(DecayEntry {
            eps,
            inv_eps: 1.0 / eps,
            lambda1: l,
            log_abs_lambda1: if censored { f64::NEG_INFINITY } else { ln(abs(l)) },
            censored,
        });
    }
    let pts: Vec<(f64, f64)> = entries.iter().filter(|e| !e.censored).map(|e| (e.inv_eps, e.log_abs_lambda1)).collect();
    if pts.len() < 2 {
        return Err(Error::DegenerateFit("fewer than two uncensored eigenvalues".into()));
    }
    let (slope, intercept, residual) = crate::analysis::least_squares(&pts)?;
    if slope >= -1e-6 {
        return Err(Error::DegenerateFit(format!("no exponential decay: slope {slope:.3e}")));
    }
    Ok(DecayStudy { entries, slope, intercept, residual })
}

/// Quadratic form used by [`rayleigh_lower_bound`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RayleighForm {
    /// Smallest eigenvalue of `−d²/dx² + ε⁻² f''(u_A)`.
    Flat,
    /// Smallest value of `(ε∫v'² + ε⁻¹∫f''(u_A)v²) / ∫w'²` with `w'' = v`.
    Weighted,
}

/// Lower bounds of the linearised operator around a layered field.
#[derive(Debug, Clone, PartialEq)]
pub struct RayleighBound {
    pub eps: f64,
    pub field: Vec<f64>,
    pub flat: f64,
    pub weighted: f64,
}

impl RayleighBound {
    pub fn new(field: Vec<f64>, eps: f64) -> Result<Self> {
        let flat = rayleigh_lower_bound(&field, eps, RayleighForm::Flat)?;
        let weighted = rayleigh_lower_bound(&field, eps, RayleighForm::Weighted)?;
        Ok(Self { eps, field, flat, weighted })
    }

    /// The constant `C` in `form ≥ −C·(norm)`; zero when the form is positive.
    pub fn flat_constant(&self) -> f64 {
        (-self.flat).max(0.0)
    }

    pub fn weighted_constant(&self) -> f64 {
        (-self.weighted).max(0.0)
    }
}

/// `u_a` is sampled on a uniform grid over `(0, 1)` including both ends.
pub fn rayleigh_lower_bound(u_a: &[f64], eps: f64, form: RayleighForm) -> Result<f64> {
    if u_a.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("field contains non-finite values".into()));
    }
    if u_a.len() < 16 || !(eps > 0.0) {
        return Err(invalid("need ≥ 16 samples and ε > 0"));
    }
    let n = u_a.len();
    let h = 1.0 / (n - 1) as f64;
    match form {
        RayleighForm::Flat => {
            let v: Vec<f64> = u_a.iter().map(|&u| d2f(u) / (eps * eps)).collect();
            Ok(lowest_pairs(h, &v, 1)?.0[0])
        }
        RayleighForm::Weighted => weighted_bound(u_a, eps, h),
    }
}

/// Matrices of the weighted pencil in the variable `w` with `v = Δ₂ w`,
/// restricted to `w₀ = 0` (the quotient is invariant under constants).
fn weighted_pencil(u_a: &[f64], eps: f64, h: f64) -> (SymBand, SymBand) {
    let n = u_a.len();
    let w = weights(n);
    // G = W (ε A + ε⁻¹ F), symmetric pentadiagonal.
    let mut g = vec![[0.0f64; 5]; n];
    for (i, j, v) in operator_entries(n, h) {
        let gij = w[i] * eps * v;
        g[i][j + 2 - i] += gij;
        if i != j {
            g[j][i + 2 - j] += gij;
        }
    }
    for i in 0..n {
        g[i][2] += w[i] * d2f(u_a[i]) / eps;
    }
    // P = Δ₂ᵀ G Δ₂ (bandwidth 4), Q = −W Δ₂ (tridiagonal); index 0 dropped.
    let m = n - 1;
    let mut p = SymBand::zeros(m, 4);
    let mut q = SymBand::zeros(m, 1);
    for i in 0..n {
        for &(a, dia) in laplacian_row(n, h, i).iter() {
            if dia == 0.0 || a == 0 {
                continue;
            }
            for (o, &gij) in g[i].iter().enumerate() {
                if gij == 0.0 || i + o < 2 || i + o - 2 >= n {
                    continue;
                }
                let j = i + o - 2;
                for &(b, djb) in laplacian_row(n, h, j).iter() {
                    if djb == 0.0 || b == 0 || b > a {
                        continue;
                    }
                    let cur = p.get(a - 1, b - 1);
                    p.set(a - 1, b - 1, cur + dia * gij * djb);
                }
            }
        }
        if i > 0 {
            for &(b, dib) in laplacian_row(n, h, i).iter() {
                if dib != 0.0 && b > 0 && b <= i {
                    let cur = q.get(i - 1, b - 1);
                    q.set(i - 1, b - 1, cur - w[i] * dib);
                }
            }
        }
    }
    (p, q)
}

fn weighted_quotient(u_a: &[f64], eps: f64, h: f64, wfull: &[f64]) -> f64 {
    let n = u_a.len();
    let w = weights(n);
    let v: Vec<f64> = (0..n).map(|i| laplacian_row(n, h, i).iter().map(|&(j, c)| c * wfull[j]).sum()).collect();
    let mut num = 0.0;
    for i in 0..n - 1 {
        let d = v[i + 1] - v[i];
        num += eps * d * d / (h * h);
    }
    let mut bih = 0.0;
    for i in 0..n {
        let l: f64 = laplacian_row(n, h, i).iter().map(|&(j, c)| c * v[j]).sum();
        bih += w[i] * l * l;
    }
    num += eps * h * h / 12.0 * bih;
    num += (0..n).map(|i| w[i] * d2f(u_a[i]) / eps * v[i] * v[i]).sum::<f64>();
    let mut den = 0.0;
    for i in 0..n - 1 {
        let d = wfull[i + 1] - wfull[i];
        den += d * d / (h * h);
    }
    num / den
}

fn weighted_bound(u_a: &[f64], eps: f64, h: f64) -> Result<f64> {
    let (p, q) = weighted_pencil(u_a, eps, h);
    let count_below = |s: f64| p.ldlt(s, Some(&q)).negatives();
    // bracket the smallest generalised eigenvalue
    let mut lo = -1.0;
    let mut it = 0;
    while count_below(lo) > 0 {
        lo *= 4.0;
        it += 1;
        if it > 200 {
            return Err(Error::Numerical { what: "weighted pencil unbounded below".into(), residual: lo });
        }
    }
    let mut hi = 1.0;
    it = 0;
    while count_below(hi) == 0 {
        hi *= 4.0;
        it += 1;
        if it > 200 {
            return Err(Error::Numerical { what: "weighted pencil bracketing".into(), residual: hi });
        }
    }
    for _ in 0..200 {
        if hi - lo <= 1e-9 * (1.0 + abs(lo) + abs(hi)) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if count_below(mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    // polish by inverse iteration from just below the bracket
    let shift = lo - 1e-6 * (1.0 + abs(lo));
    let fac = p.ldlt(shift, Some(&q));
    let m = p.dim();
    let mut x: Vec<f64> = (0..m).map(|i| 1.0 + 0.1 * ((i * 37 % 11) as f64)).collect();
    let mut value = 0.5 * (lo + hi);
    for _ in 0..INVERSE_ITERATIONS {
        let qx = q.matvec(&x);
        let mut next = fac.solve(&qx);
        normalize(&mut next);
        let mut wfull = vec![0.0; m + 1];
        wfull[1..].copy_from_slice(&next);
        let v = weighted_quotient(u_a, eps, h, &wfull);
        let done = abs(v - value) <= 1e-13 * (1.0 + abs(v));
        value = v;
        x = next;
        if done {
            break;
        }
    }
    Ok(value)
}
