//! Banded linear algebra: tridiagonal solves, general banded LU with partial
//! pivoting, and symmetric banded LDLᵀ with inertia counts.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::math::abs;
use crate::{Error, Result};

/// Solves a tridiagonal system; `lower[i]` couples row `i+1` to `i`,
/// `upper[i]` couples row `i` to `i+1`.
pub fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if rhs.len() != n || lower.len() + 1 != n.max(1) || upper.len() + 1 != n.max(1) {
        return Err(Error::InvalidArgument("tridiagonal dimensions disagree".into()));
    }
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut beta = diag[0];
    if beta == 0.0 {
        return Err(Error::Singular("zero pivot in tridiagonal solve".into()));
    }
    d[0] = rhs[0] / beta;
    for i in 1..n {
        c[i - 1] = upper[i - 1] / beta;
        beta = diag[i] - lower[i - 1] * c[i - 1];
        if beta == 0.0 || !beta.is_finite() {
            return Err(Error::Singular(format!("zero pivot at row {i} in tridiagonal solve")));
        }
        d[i] = (rhs[i] - lower[i - 1] * d[i - 1]) / beta;
    }
    for i in (0..n.saturating_sub(1)).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Ok(d)
}

/// Square band matrix with `kl` sub- and `ku` super-diagonals, factorised in
/// place by Gaussian elimination with partial pivoting.
#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    w: usize,
    a: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let w = 2 * kl + ku + 1;
        Self { n, kl, ku, w, a: vec![0.0; n * w] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        i * self.w + (j + self.kl - i)
    }

    /// Adds `v` to entry `(i, j)`; the entry must lie inside the band.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(j + self.kl >= i && j <= i + self.ku, "entry ({i},{j}) outside band");
        let k = self.idx(i, j);
        self.a[k] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j + self.kl < i || j > i + self.ku + self.kl {
            return 0.0;
        }
        self.a[self.idx(i, j)]
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for (i, yi) in y.iter_mut().enumerate() {
            let lo = i.saturating_sub(self.kl);
            let hi = (i + self.ku).min(self.n - 1);
            *yi = (lo..=hi).map(|j| self.get(i, j) * x[j]).sum();
        }
        y
    }

    pub fn factor(mut self) -> Result<BandLu> {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        let mut piv = vec![0usize; n];
        let scale = self.a.iter().fold(0.0f64, |m, &x| m.max(abs(x)));
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = abs(self.a[self.idx(k, k)]);
            for i in k + 1..=last {
                let v = abs(self.a[self.idx(i, k)]);
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best <= f64::EPSILON * 1e-3 * scale || best == 0.0 {
                return Err(Error::Singular(format!("band LU: pivot {best:.3e} at column {k}")));
            }
            piv[k] = p;
            let jmax = (k + kl + ku).min(n - 1);
            if p != k {
                for j in k..=jmax {
                    let (ik, ip) = (self.idx(k, j), self.idx(p, j));
                    self.a.swap(ik, ip);
                }
            }
            let akk = self.a[self.idx(k, k)];
            for i in k + 1..=last {
                let ik = self.idx(i, k);
                let l = self.a[ik] / akk;
                self.a[ik] = l;
                if l != 0.0 {
                    for j in k + 1..=jmax {
                        let kj = self.a[self.idx(k, j)];
                        let ij = self.idx(i, j);
                        self.a[ij] -= l * kj;
                    }
                }
            }
        }
        Ok(BandLu { m: self, piv })
    }
}

/// LU factors of a [`BandMatrix`]; reusable for many right-hand sides.
#[derive(Debug, Clone)]
pub struct BandLu {
    m: BandMatrix,
    piv: Vec<usize>,
}

impl BandLu {
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let m = &self.m;
        let n = m.n;
        for k in 0..n {
            let p = self.piv[k];
            if p != k {
                b.swap(k, p);
            }
            let bk = b[k];
            if bk != 0.0 {
                for i in k + 1..=(k + m.kl).min(n - 1) {
                    b[i] -= m.a[m.idx(i, k)] * bk;
                }
            }
        }
        for k in (0..n).rev() {
            let jmax = (k + m.kl + m.ku).min(n - 1);
            let mut s = b[k];
            for j in k + 1..=jmax {
                s -= m.a[m.idx(k, j)] * b[j];
            }
            b[k] = s / m.a[m.idx(k, k)];
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

/// Symmetric band matrix storing the lower band: `band[i*(b+1) + k] = A[i][i−k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymBand {
    n: usize,
    b: usize,
    band: Vec<f64>,
}

impl SymBand {
    pub fn zeros(n: usize, b: usize) -> Self {
        Self { n, b, band: vec![0.0; n * (b + 1)] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.b
    }

    /// Entry `(i, j)` with `|i − j| ≤ b`; zero outside the band.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        if i - j > self.b {
            0.0
        } else {
            self.band[i * (self.b + 1) + (i - j)]
        }
    }

    /// Sets the symmetric pair `(i, j)` and `(j, i)`.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        assert!(i - j <= self.b, "entry outside band");
        self.band[i * (self.b + 1) + (i - j)] = v;
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y = vec![0.0; n];
        for i in 0..n {
            let row = &self.band[i * (self.b + 1)..(i + 1) * (self.b + 1)];
            y[i] += row[0] * x[i];
            for k in 1..=self.b.min(i) {
                let j = i - k;
                y[i] += row[k] * x[j];
                y[j] += row[k] * x[i];
            }
        }
        y
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.b);
                let hi = (i + self.b).min(self.n - 1);
                (lo..=hi).map(|j| abs(self.get(i, j))).sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    /// Gershgorin enclosure `[lo, hi]` of the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..self.n {
            let lo_j = i.saturating_sub(self.b);
            let hi_j = (i + self.b).min(self.n - 1);
            let r: f64 = (lo_j..=hi_j).filter(|&j| j != i).map(|j| abs(self.get(i, j))).sum();
            let d = self.get(i, i);
            lo = lo.min(d - r);
            hi = hi.max(d + r);
        }
        (lo, hi)
    }

    /// LDLᵀ factorisation of `self − s·other` (or `self − s·I` when `other`
    /// is `None`) without pivoting. Exact zero pivots are nudged so that the
    /// inertia count stays defined.
    pub fn ldlt(&self, s: f64, other: Option<&SymBand>) -> Ldlt {
        let (n, b) = (self.n, self.b);
        if let Some(o) = other {
            assert!(o.n == n && o.b <= b, "pencil operands disagree");
        }
        let entry = |i: usize, j: usize| -> f64 {
            let a = self.get(i, j);
            match other {
                Some(o) => a - s * o.get(i, j),
                None if i == j => a - s,
                None => a,
            }
        };
        let w = b + 1;
        let mut l = vec![0.0; n * w];
        let mut d = vec![0.0; n];
        let tiny = f64::EPSILON * self.norm_inf().max(1e-300);
        let mut negatives = 0;
        for i in 0..n {
            let j0 = i.saturating_sub(b);
            for j in j0..i {
                let mut v = entry(i, j);
                let k0 = j0.max(j.saturating_sub(b));
                for k in k0..j {
                    v -= l[i * w + (i - k)] * d[k] * l[j * w + (j - k)];
                }
                l[i * w + (i - j)] = v / d[j];
            }
            let mut v = entry(i, i);
            for k in j0..i {
                let lik = l[i * w + (i - k)];
                v -= lik * lik * d[k];
            }
            if v == 0.0 {
                v = tiny;
            }
            if v < 0.0 {
                negatives += 1;
            }
            d[i] = v;
        }
        Ldlt { n, b, l, d, negatives }
    }
}

/// Factors from [`SymBand::ldlt`].
#[derive(Debug, Clone)]
pub struct Ldlt {
    n: usize,
    b: usize,
    l: Vec<f64>,
    d: Vec<f64>,
    negatives: usize,
}

impl Ldlt {
    /// Number of negative pivots, equal to the number of eigenvalues below
    /// the shift (Sylvester's law of inertia).
    pub fn negatives(&self) -> usize {
        self.negatives
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let (n, b) = (self.n, self.b);
        let w = b + 1;
        let mut x = rhs.to_vec();
        for i in 0..n {
            for k in i.saturating_sub(b)..i {
                x[i] -= self.l[i * w + (i - k)] * x[k];
            }
        }
        for i in 0..n {
            x[i] /= self.d[i];
        }
        for i in (0..n).rev() {
            for k in i + 1..(i + b + 1).min(n) {
                x[i] -= self.l[k * w + (k - i)] * x[k];
            }
        }
        x
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
