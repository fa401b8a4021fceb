//! Gluing: the ζ-blended composite of the inner, outer and boundary
//! expansions, and the corrections that make the φ-equation exact.
//!
//! ```text
//! φ^A = φ̄ − |Ω|⁻¹ ∫₀ᵗ∫(ω₁ + ω₂),   μ^A = μ̄ − μ̃^A,   σ^A = σ̄,
//! u^A = ū − ω₂ − μ̃^A,               Δμ̃^A = ω₁ + ω₂ − mean (Neumann, ∫μ̃^A = 0).
//! ```
//!
//! The residuals are measured by substituting the composite into the
//! diffuse system on a fine uniform grid; `∂_t` is a three-point difference
//! over neighbouring snapshots of the sharp history.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;

use super::inner::{build_inner, InnerFields, InnerTables};
use super::outer::{OuterFields, SharpHistory};
use super::{Order, Side};
use crate::analysis::{fit_rate, RateFit};
use crate::error::invalid;
use crate::grid::{interpolate, Grid};
use crate::math::{abs, ceil_usize};
use crate::profile::{df, Cutoff, EtaVariant};
use crate::sharp::{GeometryKind, RadialDomain};
use crate::{Error, Result};

const COMPATIBILITY_TOL: f64 = 1e-6;

/// How the composite treats the strip `∂Ω(δ)` along the outer boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoundaryTrace {
    /// The boundary expansion coincides with the outer one (every retained
    /// order already satisfies the Neumann condition in radial symmetry).
    #[default]
    Outer,
    /// `u_B^A = Σ εⁱ u_B⁽ⁱ⁾ − εᵏ u_B⁽ᵏ⁾(0)` blended with `ζ(d_B/δ)`; only
    /// defined for `k ≥ 1`.
    Subtracted,
}

/// `d^{[k]} = d⁰ + εd¹` with `d⁰ = r − R(t)` and `d¹` constant in space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceExpansion {
    pub r: f64,
    pub eps: f64,
    pub d1: f64,
}

impl DistanceExpansion {
    pub fn d0(&self, x: f64) -> f64 {
        x - self.r
    }

    pub fn value(&self, x: f64) -> f64 {
        self.d0(x) + self.eps * self.d1
    }
}

/// Traces of one boundary point; index `i` holds order `i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryEnd {
    pub x: f64,
    pub side: Side,
    pub u: [f64; 2],
    pub mu: [f64; 2],
    pub sigma: [f64; 2],
}

/// Boundary-layer fields: at orders 0 and 1 they are the outer traces,
/// constant in the stretched variable.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryLayerFields {
    pub ends: Vec<BoundaryEnd>,
    /// Largest one-sided normal derivative of μ⁰, σ⁰ (and μ¹, σ¹) at ∂Ω,
    /// from the raw grid samples.
    pub compatibility_residual: f64,
}

impl BoundaryLayerFields {
    /// Distance from `x` to the nearest boundary point.
    pub fn distance(&self, x: f64) -> f64 {
        self.ends.iter().map(|e| abs(x - e.x)).fold(f64::INFINITY, f64::min)
    }
}

pub fn build_boundary(outer: &OuterFields) -> Result<BoundaryLayerFields> {
    let d = &outer.domain;
    let sides: &[Side] = match d.kind {
        GeometryKind::Ball => &[Side::Plus],
        GeometryKind::Interval => &[Side::Minus, Side::Plus],
    };
    let mut residual: f64 = 0.0;
    let mut ends = Vec::new();
    for &side in sides {
        let mut fields = alloc::vec![outer.mu0.get(side), outer.sigma0.get(side)];
        if let Some(f) = &outer.first {
            fields.push(f.mu1.get(side));
            fields.push(f.sigma1.get(side));
        }
        let mut x = 0.0;
        for f in &fields {
            let (xb, slope) = f.far_end_slope();
            x = xb;
            residual = residual.max(abs(slope));
        }
        let mu0 = outer.mu0.get(side).value(x);
        let (mu1, sigma1) = match &outer.first {
            Some(f) => (f.mu1.get(side).value(x), f.sigma1.get(side).value(x)),
            None => (0.0, 0.0),
        };
        ends.push(BoundaryEnd {
            x,
            side,
            u: [OuterFields::u0(side), mu0 / 8.0],
            mu: [mu0, mu1],
            sigma: [outer.sigma0.get(side).value(x), sigma1],
        });
    }
    if residual > COMPATIBILITY_TOL {
        return Err(Error::Consistency { condition: "∂μ/∂ν = ∂σ/∂ν = 0 on ∂Ω".into(), residual });
    }
    Ok(BoundaryLayerFields { ends, compatibility_residual: residual })
}

/// Distance from Γ to ∂Ω.
pub fn interface_clearance(domain: &RadialDomain, r: f64) -> f64 {
    match domain.kind {
        GeometryKind::Ball => domain.r_out - r,
        GeometryKind::Interval => (r - domain.r_in).min(domain.r_out - r),
    }
}

/// `δ = min(0.2, 0.4·dist(Γ, ∂Ω))`.
pub fn default_delta(domain: &RadialDomain, r: f64) -> f64 {
    (0.4 * interface_clearance(domain, r)).min(0.2)
}

/// The blended composite `(ū, μ̄, σ̄)` at one instant.
#[derive(Debug, Clone)]
pub struct Composite {
    pub inner: InnerFields,
    pub boundary: BoundaryLayerFields,
    pub delta: f64,
    pub trace: BoundaryTrace,
    cutoff: Cutoff,
}

/// Checks the gluing width and assembles the composite.
pub fn glue(inner: InnerFields, boundary: BoundaryLayerFields, delta: f64, trace: BoundaryTrace) -> Result<Composite> {
    let o = &inner.outer;
    let clearance = interface_clearance(&o.domain, o.r);
    if !(delta > 0.0) || delta >= 0.5 * clearance {
        return Err(invalid(format!("δ = {delta} must lie in (0, ½·dist(Γ, ∂Ω) = {})", 0.5 * clearance)));
    }
    if o.domain.kind == GeometryKind::Ball && delta >= o.r {
        return Err(invalid(format!("δ = {delta} must be below the radius {}", o.r)));
    }
    if trace == BoundaryTrace::Subtracted && inner.order == Order::Zero {
        return Err(invalid("the subtracted boundary composite needs k ≥ 1"));
    }
    let cutoff = Cutoff::new(inner.tables.variant());
    Ok(Composite { inner, boundary, delta, trace, cutoff })
}

impl Composite {
    pub fn t(&self) -> f64 {
        self.inner.outer.t
    }

    pub fn distance(&self) -> DistanceExpansion {
        DistanceExpansion { r: self.inner.outer.r, eps: self.inner.eps, d1: self.inner.d1 }
    }

    /// Outer composite `Σ εⁱ(uᵢ, μᵢ, σᵢ)` on the side of Γ containing `x`.
    pub fn outer(&self, x: f64) -> [f64; 3] {
        let o = &self.inner.outer;
        let side = self.inner.side_of(x);
        let mu0 = o.mu0.get(side).value(x);
        let sigma0 = o.sigma0.get(side).value(x);
        let u0 = OuterFields::u0(side);
        match self.inner.order {
            Order::Zero => [u0, mu0, sigma0],
            Order::One => {
                let e = self.inner.eps;
                let (mu1, sigma1) = match &o.first {
                    Some(f) => (f.mu1.get(side).value(x), f.sigma1.get(side).value(x)),
                    None => (0.0, 0.0),
                };
                [u0 + e * mu0 / 8.0, mu0 + e * mu1, sigma0 + e * sigma1]
            }
        }
    }

    pub fn inner(&self, x: f64) -> [f64; 3] {
        self.inner.composite(x)
    }

    /// `u_B^A` for `k = 1`: the order-1 terms cancel against their value at
    /// `z = 0`, leaving the order-0 traces.
    fn subtracted(&self, x: f64) -> [f64; 3] {
        let o = &self.inner.outer;
        let side = self.inner.side_of(x);
        [OuterFields::u0(side), o.mu0.get(side).value(x), o.sigma0.get(side).value(x)]
    }

    pub fn eval(&self, x: f64) -> [f64; 3] {
        let d = x - self.inner.outer.r;
        if abs(d) < self.delta {
            let z = self.cutoff.eval(d / self.delta, 0);
            let inner = self.inner(x);
            if z >= 1.0 {
                return inner;
            }
            return blend(z, inner, self.outer(x));
        }
        let outer = self.outer(x);
        if self.trace == BoundaryTrace::Subtracted {
            let db = self.boundary.distance(x);
            if db < self.delta {
                return blend(self.cutoff.eval(db / self.delta, 0), self.subtracted(x), outer);
            }
        }
        outer
    }
}

fn blend(z: f64, a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [z * a[0] + (1.0 - z) * b[0], z * a[1] + (1.0 - z) * b[1], z * a[2] + (1.0 - z) * b[2]]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstructionConfig {
    pub eps: f64,
    pub order: Order,
    /// Gluing half-width; `None` picks [`default_delta`].
    pub delta: Option<f64>,
    pub eta: EtaVariant,
    pub boundary: BoundaryTrace,
    /// Residual grid spacing; `None` means `ε²/8`.
    pub residual_spacing: Option<f64>,
    /// Quotient switch radius; `None` means the sharp grid spacing.
    pub switch_radius: Option<f64>,
}

impl ConstructionConfig {
    pub fn new(eps: f64, order: Order) -> Self {
        Self { eps, order, delta: None, eta: EtaVariant::Bump, boundary: BoundaryTrace::Outer, residual_spacing: None, switch_radius: None }
    }
}

/// Sup-norms over the partition of Ω.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RegionSups {
    pub all: f64,
    /// `Γ(δ)`.
    pub layer: f64,
    /// `∂Ω(δ)` outside `Γ(δ)`.
    pub boundary: f64,
    /// The rest.
    pub outer: f64,
}

/// `‖ω₁‖ … ‖ω₄‖`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ResidualNorms {
    pub omega: [RegionSups; 4],
}

/// Glued approximate solution at one instant, sampled on the output nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct ApproxSolution {
    pub t: f64,
    pub eps: f64,
    pub order: Order,
    pub delta: f64,
    pub distance: DistanceExpansion,
    pub nodes: Vec<f64>,
    pub u_bar: Vec<f64>,
    pub mu_bar: Vec<f64>,
    pub sigma_bar: Vec<f64>,
    pub phi_bar: Vec<f64>,
    pub u: Vec<f64>,
    pub mu: Vec<f64>,
    pub sigma: Vec<f64>,
    pub phi: Vec<f64>,
    pub mu_tilde: Vec<f64>,
    pub omega2: Vec<f64>,
    pub residuals: ResidualNorms,
    /// `max |inner − outer|` over `Γ(δ) \ Γ(δ/2)`.
    pub seam: f64,
    /// `|Ω|⁻¹ ∫₀ᵗ∫(ω₁ + ω₂)`, subtracted from φ̄.
    pub mass_shift: f64,
    /// Mass of φ^A on the residual grid.
    pub phi_mass: f64,
    pub compatibility_residual: f64,
}

impl ApproxSolution {
    /// Front position `R + εR₁` (the zero level of `d^{[k]}`).
    pub fn front(&self) -> f64 {
        self.distance.r - self.distance.eps * self.distance.d1
    }
}

/// Builds composites and approximate solutions from a sharp history; the
/// `z`-tables are shared.
#[derive(Debug, Clone)]
pub struct Constructor {
    pub config: ConstructionConfig,
    tables: Arc<InnerTables>,
}

struct Sampled {
    u: Vec<f64>,
    mu: Vec<f64>,
    sigma: Vec<f64>,
}

impl Constructor {
    pub fn new(config: ConstructionConfig) -> Result<Self> {
        if !(config.eps > 0.0) {
            return Err(invalid("ε must be positive"));
        }
        Ok(Self { config, tables: Arc::new(InnerTables::new(config.eta)?) })
    }

    pub fn with_tables(config: ConstructionConfig, tables: Arc<InnerTables>) -> Result<Self> {
        if tables.variant() != config.eta {
            return Err(invalid("tables were built for a different η"));
        }
        Ok(Self { config, tables })
    }

    fn check_history(&self, history: &SharpHistory) -> Result<()> {
        if self.config.order == Order::One && history.order1.is_none() {
            return Err(invalid("an order-1 construction needs an order-1 history"));
        }
        if history.is_empty() {
            return Err(invalid("empty history"));
        }
        Ok(())
    }

    fn delta_for(&self, history: &SharpHistory, j: usize) -> f64 {
        self.config.delta.unwrap_or_else(|| default_delta(&history.domain, history.sharp[j].r))
    }

    fn composite_with(&self, history: &SharpHistory, j: usize, delta: f64) -> Result<Composite> {
        let c = &self.config;
        let outer = match c.order {
            Order::Zero => super::outer::build_outer(&history.domain, &history.sharp[j], None)?,
            Order::One => history.outer(j)?,
        };
        let boundary = build_boundary(&outer)?;
        let h = c.switch_radius.unwrap_or_else(|| history.domain.spacing());
        let inner = build_inner(self.tables.clone(), outer, c.eps, c.order, h)?;
        glue(inner, boundary, delta, c.boundary)
    }

    /// Composite `(ū, μ̄, σ̄)` at recorded step `j`.
    pub fn composite(&self, history: &SharpHistory, j: usize) -> Result<Composite> {
        self.check_history(history)?;
        if j >= history.len() {
            return Err(invalid("snapshot index out of range"));
        }
        self.composite_with(history, j, self.delta_for(history, j))
    }

    /// Residual grid on `[r_in, r_out]`.
    pub fn residual_grid(&self, domain: &RadialDomain) -> Result<Grid> {
        let h = self.config.residual_spacing.unwrap_or(self.config.eps * self.config.eps / 8.0);
        let n = ceil_usize((domain.r_out - domain.r_in) / h).max(8) + 1;
        Grid::uniform(domain.r_in, domain.r_out, n, domain.measure_dim())
    }

    /// Glued solution at step `j` (needs ≥ 3 recorded steps for `∂_t`),
    /// sampled at `nodes`.
    pub fn build(&self, history: &SharpHistory, j: usize, nodes: &[f64]) -> Result<ApproxSolution> {
        self.check_history(history)?;
        let len = history.len();
        if len < 3 {
            return Err(invalid("the time derivative needs at least three recorded steps"));
        }
        if j >= len {
            return Err(invalid("snapshot index out of range"));
        }
        let domain = &history.domain;
        if nodes.iter().any(|&x| x < domain.r_in - 1e-12 || x > domain.r_out + 1e-12) {
            return Err(invalid("output nodes must lie in the domain"));
        }
        let eps = self.config.eps;
        let delta = self.delta_for(history, j);
        let grid = self.residual_grid(domain)?;
        let x = grid.nodes();

        let first = j.saturating_sub(1).min(len - 3);
        let stencil = [first, first + 1, first + 2];
        let times: Vec<f64> = stencil.iter().map(|&i| history.sharp[i].t).collect();
        let weights = derivative_weights(&times, history.sharp[j].t);
        let mut at_j = None;
        let mut samples = Vec::with_capacity(3);
        for &i in &stencil {
            let c = self.composite_with(history, i, delta)?;
            samples.push(sample(&c, x));
            if i == j {
                at_j = Some(c);
            }
        }
        let comp = at_j.expect("stencil contains j");
        let pos = j - first;
        let s = &samples[pos];

        let n = grid.len();
        let time_derivative = |pick: fn(&Sampled) -> &Vec<f64>| -> Vec<f64> {
            (0..n).map(|i| (0..3).map(|m| weights[m] * pick(&samples[m])[i]).sum()).collect()
        };
        let dt_u = time_derivative(|s| &s.u);
        let dt_sigma = time_derivative(|s| &s.sigma);
        let lap_u = grid.laplacian(&s.u);
        let lap_mu = grid.laplacian(&s.mu);
        let lap_sigma = grid.laplacian(&s.sigma);

        let mut omega: [Vec<f64>; 4] = Default::default();
        for i in 0..n {
            let g = 2.0 * s.sigma[i] + s.u[i] - s.mu[i];
            omega[0].push(dt_u[i] - lap_mu[i] - g);
            omega[1].push(dt_sigma[i] - lap_sigma[i] + g);
            omega[2].push(s.mu[i] - (-eps * lap_u[i] + df(s.u[i]) / eps));
        }
        let source: Vec<f64> = omega[0].iter().zip(&omega[1]).map(|(a, b)| a + b).collect();
        let mu_tilde = grid.solve_neumann_poisson(&source)?;
        let u_a: Vec<f64> = (0..n).map(|i| s.u[i] - omega[1][i] - mu_tilde[i]).collect();
        let lap_ua = grid.laplacian(&u_a);
        omega[3] = (0..n).map(|i| s.mu[i] - mu_tilde[i] - (-eps * lap_ua[i] + df(u_a[i]) / eps)).collect();

        let phi_now: Vec<f64> = (0..n).map(|i| s.u[i] + s.sigma[i]).collect();
        let mass_now = grid.mass(&phi_now);
        let mass_initial = if history.sharp[0].t == history.sharp[j].t {
            mass_now
        } else {
            let c0 = self.composite_with(history, 0, delta)?;
            let s0 = sample(&c0, x);
            grid.mass(&s0.u.iter().zip(&s0.sigma).map(|(a, b)| a + b).collect::<Vec<_>>())
        };
        let mass_shift = (mass_now - mass_initial) / grid.measure();
        let phi_mass = mass_now - mass_shift * grid.measure();

        let r = comp.inner.outer.r;
        let mut residuals = ResidualNorms::default();
        let mut seam: f64 = 0.0;
        for (i, &xi) in x.iter().enumerate() {
            let d = abs(xi - r);
            for (k, w) in omega.iter().enumerate() {
                let v = abs(w[i]);
                let sups = &mut residuals.omega[k];
                sups.all = sups.all.max(v);
                if d < delta {
                    sups.layer = sups.layer.max(v);
                } else if comp.boundary.distance(xi) < delta {
                    sups.boundary = sups.boundary.max(v);
                } else {
                    sups.outer = sups.outer.max(v);
                }
            }
            if d >= 0.5 * delta && d <= delta {
                let (a, b) = (comp.inner(xi), comp.outer(xi));
                for c in 0..3 {
                    seam = seam.max(abs(a[c] - b[c]));
                }
            }
        }

        let out = sample(&comp, nodes);
        let omega2: Vec<f64> = nodes.iter().map(|&p| interpolate(x, &omega[1], p)).collect();
        let mu_t: Vec<f64> = nodes.iter().map(|&p| interpolate(x, &mu_tilde, p)).collect();
        let m = nodes.len();
        let phi_bar: Vec<f64> = (0..m).map(|i| out.u[i] + out.sigma[i]).collect();
        Ok(ApproxSolution {
            t: comp.t(),
            eps,
            order: self.config.order,
            delta,
            distance: comp.distance(),
            nodes: nodes.to_vec(),
            u: (0..m).map(|i| out.u[i] - omega2[i] - mu_t[i]).collect(),
            mu: (0..m).map(|i| out.mu[i] - mu_t[i]).collect(),
            sigma: out.sigma.clone(),
            phi: phi_bar.iter().map(|p| p - mass_shift).collect(),
            u_bar: out.u,
            mu_bar: out.mu,
            sigma_bar: out.sigma,
            phi_bar,
            mu_tilde: mu_t,
            omega2,
            residuals,
            seam,
            mass_shift,
            phi_mass,
            compatibility_residual: comp.boundary.compatibility_residual,
        })
    }
}

fn sample(c: &Composite, x: &[f64]) -> Sampled {
    let mut s = Sampled { u: Vec::with_capacity(x.len()), mu: Vec::with_capacity(x.len()), sigma: Vec::with_capacity(x.len()) };
    for &p in x {
        let [u, mu, sigma] = c.eval(p);
        s.u.push(u);
        s.mu.push(mu);
        s.sigma.push(sigma);
    }
    s
}

/// Weights of the quadratic-interpolant derivative at `te` through three
/// (possibly unevenly spaced) times.
fn derivative_weights(t: &[f64], te: f64) -> [f64; 3] {
    let (t0, t1, t2) = (t[0], t[1], t[2]);
    [
        (2.0 * te - t1 - t2) / ((t0 - t1) * (t0 - t2)),
        (2.0 * te - t0 - t2) / ((t1 - t0) * (t1 - t2)),
        (2.0 * te - t0 - t1) / ((t2 - t0) * (t2 - t1)),
    ]
}

/// Fitted decay orders of `‖ω₁‖ … ‖ω₄‖` (sup over Ω) along an ε ladder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualOrders {
    pub omega: [RateFit; 4],
}

pub fn residual_orders(ladder: &[ApproxSolution]) -> Result<ResidualOrders> {
    if ladder.len() < 3 {
        return Err(invalid("residual orders need at least three ladder points"));
    }
    if ladder.iter().any(|a| a.order != ladder[0].order) {
        return Err(invalid("ladder mixes construction orders"));
    }
    let fit = |k: usize| fit_rate(&ladder.iter().map(|a| (a.eps, a.residuals.omega[k].all)).collect::<Vec<_>>());
    Ok(ResidualOrders { omega: [fit(0)?, fit(1)?, fit(2)?, fit(3)?] })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asymptotic::run_history;
    use crate::sharp::SharpSolver;

    fn history(order: Order, dt: f64, steps: usize) -> SharpHistory {
        let d = RadialDomain::ball(2, 1.0, 401).unwrap();
        let solver = SharpSolver::new(d);
        let s0 = solver.initial(0.5, |_| 0.0).unwrap();
        run_history(&solver, s0, dt, dt * steps as f64, order).unwrap()
    }

    #[test]
    fn derivative_weights_are_exact_for_quadratics() {
        let t = [0.0, 0.1, 0.3];
        let f = |s: f64| 1.0 + 2.0 * s - 3.0 * s * s;
        for te in t {
            let w = derivative_weights(&t, te);
            let d: f64 = (0..3).map(|i| w[i] * f(t[i])).sum();
            assert!((d - (2.0 - 6.0 * te)).abs() < 1e-12);
        }
    }

    #[test]
    fn blend_regions_are_exact() {
        let h = history(Order::One, 1e-3, 4);
        let c = Constructor::new(ConstructionConfig::new(0.05, Order::One)).unwrap().composite(&h, 2).unwrap();
        let r = c.inner.outer.r;
        assert!((c.delta - 0.2).abs() < 1e-2);
        for x in [r - 0.09, r, r + 0.05] {
            assert_eq!(c.eval(x), c.inner(x));
        }
        for x in [0.05, r - 0.21, r + 0.25, 0.99] {
            assert_eq!(c.eval(x), c.outer(x));
        }
    }

    #[test]
    fn boundary_traces_are_compatible() {
        let h = history(Order::One, 1e-3, 4);
        let o = h.outer(2).unwrap();
        let b = build_boundary(&o).unwrap();
        assert_eq!(b.ends.len(), 1);
        let e = b.ends[0];
        assert_eq!(e.x, 1.0);
        assert_eq!(e.u[0], 1.0);
        assert!((e.u[1] - e.mu[0] / 8.0).abs() < 1e-15);
        assert!(b.compatibility_residual < 1e-6, "{}", b.compatibility_residual);
    }

    #[test]
    fn gluing_width_is_checked() {
        let h = history(Order::Zero, 1e-3, 4);
        let mut cfg = ConstructionConfig::new(0.05, Order::Zero);
        cfg.delta = Some(0.3);
        assert!(matches!(Constructor::new(cfg).unwrap().composite(&h, 0), Err(Error::InvalidArgument(_))));
        cfg.delta = Some(0.2);
        cfg.boundary = BoundaryTrace::Subtracted;
        assert!(Constructor::new(cfg).unwrap().composite(&h, 0).is_err());
    }

    #[test]
    fn corrected_phi_keeps_its_mass() {
        let h = history(Order::One, 2e-3, 6);
        let c = Constructor::new(ConstructionConfig::new(0.1, Order::One)).unwrap();
        let nodes: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
        let a0 = c.build(&h, 0, &nodes).unwrap();
        let a5 = c.build(&h, 5, &nodes).unwrap();
        assert_eq!(a0.mass_shift, 0.0);
        assert!((a5.phi_mass - a0.phi_mass).abs() < 1e-12 * a0.phi_mass.abs().max(1.0));
        for (p, q) in a5.phi.iter().zip(&a5.phi_bar) {
            assert_eq!(*p, q - a5.mass_shift);
        }
    }

    /// At ε = 0.05, δ = 0.2 the seam sits at |z| ≥ 2, where the layer
    /// profile still differs from ±1 by 1 − tanh(2√2) ≈ 7e-3.
    #[test]
    fn seam_follows_the_profile_tail() {
        let h = history(Order::One, 1e-3, 4);
        let c = Constructor::new(ConstructionConfig::new(0.05, Order::One)).unwrap();
        let nodes = [0.0, 0.5, 1.0];
        let a = c.build(&h, 2, &nodes).unwrap();
        assert_eq!(a.delta, 0.2);
        let tail = 1.0 - libm::tanh(2.0 * core::f64::consts::SQRT_2);
        assert!(a.seam >= 0.9 * tail && a.seam <= 2.0 * tail, "{} vs {tail}", a.seam);
    }

    #[test]
    fn residual_orders_need_a_proper_ladder() {
        let h = history(Order::Zero, 1e-3, 4);
        let c = Constructor::new(ConstructionConfig::new(0.1, Order::Zero)).unwrap();
        let a = c.build(&h, 1, &[0.5]).unwrap();
        assert!(matches!(residual_orders(&[a.clone(), a.clone()]), Err(Error::InvalidArgument(_))));
        assert!(matches!(residual_orders(&[a.clone(), a.clone(), a]), Err(Error::DegenerateFit(_))));
    }
}
