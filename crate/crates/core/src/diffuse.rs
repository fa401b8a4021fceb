//! Semi-implicit time stepping of the diffuse system on finite-volume grids.
//!
//! One step solves, for the unknowns `(u, σ, μ)` at the new level,
//!
//! ```text
//! (u' − u)/dt − Δμ' = 2σ' + u' − μ'
//! (σ' − σ)/dt − Δσ' = −(2σ' + u' − μ')
//! μ' = −εΔu' + κ_s (u' − u)/ε + f'(u)/ε
//! ```
//!
//! The unknowns are interleaved node by node, so the system is a band
//! matrix with five sub- and super-diagonals. It only depends on `dt`, so
//! it is factored once. Multiplying the first two rows by the control
//! volumes and adding them shows that `Σ Vᵢ(uᵢ + σᵢ)` is conserved up to
//! round-off.

use alloc::format;
use alloc::vec::Vec;

use crate::analysis::zero_crossing;
use crate::error::invalid;
use crate::grid::Grid;
use crate::linalg::{BandLu, BandMatrix};
use crate::math::{abs, ceil_usize, max_abs};
use crate::profile::{df, f};
use crate::sharp::RadialDomain;
use crate::{Error, Result};

/// `‖u‖_∞` beyond which a run is declared unstable.
pub const BLOW_UP: f64 = 10.0;
pub const DEFAULT_KAPPA: f64 = 14.0;

#[derive(Debug, Clone, PartialEq)]
pub struct DiffuseState {
    pub t: f64,
    pub eps: f64,
    pub u: Vec<f64>,
    pub sigma: Vec<f64>,
}

impl DiffuseState {
    pub fn new(t: f64, eps: f64, u: Vec<f64>, sigma: Vec<f64>) -> Result<Self> {
        if !(eps > 0.0) {
            return Err(invalid("ε must be positive"));
        }
        if u.len() != sigma.len() {
            return Err(invalid("u and σ must have the same length"));
        }
        Ok(Self { t, eps, u, sigma })
    }

    pub fn mu(&self, grid: &Grid) -> Vec<f64> {
        chemical_potential(grid, &self.u, self.eps)
    }

    pub fn phi(&self) -> Vec<f64> {
        self.u.iter().zip(&self.sigma).map(|(a, b)| a + b).collect()
    }
}

/// `μ = (−ε²Δ_h u + f'(u))/ε` with the Neumann finite-volume Laplacian.
pub fn chemical_potential(grid: &Grid, u: &[f64], eps: f64) -> Vec<f64> {
    let lap = grid.laplacian(u);
    u.iter().zip(&lap).map(|(&v, l)| -eps * l + df(v) / eps).collect()
}

/// Discrete Cahn–Hilliard energy `∫ ε|∇u|²/2 + f(u)/ε`.
pub fn energy(grid: &Grid, u: &[f64], eps: f64) -> f64 {
    let bulk: Vec<f64> = u.iter().map(|&v| f(v)).collect();
    0.5 * eps * grid.gradient_energy(u) + grid.mass(&bulk) / eps
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeParams {
    pub dt: f64,
    pub kappa: f64,
    /// `false` drops the `2σ + u − μ` exchange terms (pure Cahn–Hilliard
    /// for `u`, heat equation for σ).
    pub reaction: bool,
}

impl SchemeParams {
    pub fn new(dt: f64) -> Self {
        Self { dt, kappa: DEFAULT_KAPPA, reaction: true }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt >= 0.0) || !self.dt.is_finite() {
            return Err(invalid("dt must be finite and non-negative"));
        }
        if !(self.kappa >= 8.0) {
            return Err(invalid(format!("κ_s = {} is below 8", self.kappa)));
        }
        Ok(())
    }
}

/// Grid spacing `h ≤ ε/8`, as a node count on the domain.
pub fn resolution_nodes(domain: &RadialDomain, eps: f64) -> usize {
    ceil_usize((domain.r_out - domain.r_in) / (eps / 8.0)) + 1
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observables {
    pub t: f64,
    /// Zero crossing of `u` (interface proxy).
    pub interface: Option<f64>,
    pub phi_mass: f64,
    pub u_max: f64,
    pub sigma_max: f64,
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiffuseTrajectory {
    pub snapshots: Vec<DiffuseState>,
    pub observables: Vec<Observables>,
    /// Largest relative φ-mass deviation from the initial value over all
    /// steps.
    pub mass_drift: f64,
    pub steps: usize,
}

impl DiffuseTrajectory {
    pub fn final_state(&self) -> &DiffuseState {
        self.snapshots.last().expect("trajectory has the initial snapshot")
    }
}

/// A factored step operator for fixed grid, ε and parameters.
#[derive(Debug, Clone)]
pub struct DiffuseSolver {
    pub grid: Grid,
    pub eps: f64,
    pub params: SchemeParams,
    lu: Option<BandLu>,
}

impl DiffuseSolver {
    pub fn new(grid: Grid, eps: f64, params: SchemeParams) -> Result<Self> {
        params.validate()?;
        if !(eps > 0.0) {
            return Err(invalid("ε must be positive"));
        }
        let lu = if params.dt > 0.0 { Some(assemble(&grid, eps, &params).factor()?) } else { None };
        Ok(Self { grid, eps, params, lu })
    }

    pub fn for_domain(domain: &RadialDomain, n: usize, eps: f64, params: SchemeParams) -> Result<Self> {
        Self::new(Grid::uniform(domain.r_in, domain.r_out, n, domain.measure_dim())?, eps, params)
    }

    fn check(&self, s: &DiffuseState) -> Result<()> {
        if s.u.len() != self.grid.len() || s.sigma.len() != self.grid.len() {
            return Err(invalid("state does not match the grid"));
        }
        if s.eps != self.eps {
            return Err(invalid("state ε differs from the solver's"));
        }
        Ok(())
    }

    pub fn step(&self, s: &DiffuseState) -> Result<DiffuseState> {
        self.check(s)?;
        let Some(lu) = &self.lu else {
            return Ok(s.clone());
        };
        let (dt, k, e) = (self.params.dt, self.params.kappa, self.eps);
        let vol = self.grid.volumes();
        let n = self.grid.len();
        let mut b = alloc::vec![0.0; 3 * n];
        for i in 0..n {
            b[3 * i] = vol[i] * s.u[i] / dt;
            b[3 * i + 1] = vol[i] * s.sigma[i] / dt;
            b[3 * i + 2] = vol[i] * (df(s.u[i]) - k * s.u[i]) / e;
        }
        lu.solve_in_place(&mut b);
        let u: Vec<f64> = (0..n).map(|i| b[3 * i]).collect();
        let sigma: Vec<f64> = (0..n).map(|i| b[3 * i + 1]).collect();
        if u.iter().chain(&sigma).any(|v| !v.is_finite()) {
            return Err(Error::Numerical { what: "diffuse step produced non-finite values".into(), residual: f64::NAN });
        }
        Ok(DiffuseState { t: s.t + dt, eps: e, u, sigma })
    }

    pub fn observe(&self, s: &DiffuseState) -> Observables {
        Observables {
            t: s.t,
            interface: zero_crossing(self.grid.nodes(), &s.u),
            phi_mass: self.grid.mass(&s.phi()),
            u_max: max_abs(&s.u),
            sigma_max: max_abs(&s.sigma),
            energy: energy(&self.grid, &s.u, self.eps),
        }
    }

    /// Steps until `t_end` (the last step lands on `t_end` up to 1e-9·dt),
    /// keeping every `every`-th state and the last one.
    pub fn run(&self, initial: &DiffuseState, t_end: f64, every: usize) -> Result<DiffuseTrajectory> {
        self.check(initial)?;
        if every == 0 {
            return Err(invalid("snapshot cadence must be positive"));
        }
        let dt = self.params.dt;
        let steps = if dt > 0.0 { ceil_usize((t_end - initial.t) / dt - 1e-9) } else { 0 };
        if dt > 0.0 && abs(initial.t + steps as f64 * dt - t_end) > 1e-9 * dt.max(t_end.abs()) {
            return Err(invalid(format!("T − t₀ = {} is not a multiple of dt = {dt}", t_end - initial.t)));
        }
        let m0 = self.grid.mass(&initial.phi());
        let scale = m0.abs().max(self.grid.measure());
        let mut state = initial.clone();
        let mut snapshots = alloc::vec![state.clone()];
        let mut observables = alloc::vec![self.observe(&state)];
        let mut drift: f64 = 0.0;
        for n in 1..=steps {
            state = self.step(&state)?;
            let u_max = max_abs(&state.u);
            if !(u_max <= BLOW_UP) {
                return Err(Error::Halted { t: state.t, reason: format!("‖u‖∞ = {u_max:.3e} exceeds {BLOW_UP}") });
            }
            drift = drift.max(abs(self.grid.mass(&state.phi()) - m0) / scale);
            if n % every == 0 || n == steps {
                if n == steps {
                    state.t = t_end;
                }
                observables.push(self.observe(&state));
                snapshots.push(state.clone());
            }
        }
        Ok(DiffuseTrajectory { snapshots, observables, mass_drift: drift, steps })
    }
}

fn assemble(grid: &Grid, eps: f64, p: &SchemeParams) -> BandMatrix {
    let n = grid.len();
    let vol = grid.volumes();
    let c = grid.couplings();
    let (dt, k) = (p.dt, p.kappa);
    let react = if p.reaction { 1.0 } else { 0.0 };
    let mut m = BandMatrix::zeros(3 * n, 5, 5);
    let (u, s, mu) = (|i: usize| 3 * i, |i: usize| 3 * i + 1, |i: usize| 3 * i + 2);
    for i in 0..n {
        let v = vol[i];
        // V(u'/dt − 2σ' − u' + μ') − Kμ'
        m.add(u(i), u(i), v / dt - react * v);
        m.add(u(i), s(i), -2.0 * react * v);
        m.add(u(i), mu(i), react * v);
        // V(σ'/dt + 2σ' + u' − μ') − Kσ'
        m.add(s(i), s(i), v / dt + 2.0 * react * v);
        m.add(s(i), u(i), react * v);
        m.add(s(i), mu(i), -react * v);
        // V(μ' − κu'/ε) + εKu' = V(f'(u) − κu)/ε
        m.add(mu(i), mu(i), v);
        m.add(mu(i), u(i), -k * v / eps);
    }
    for i in 0..n - 1 {
        let ci = c[i];
        for (a, b) in [(i, i + 1), (i + 1, i)] {
            // −K: +c on the diagonal, −c off it
            m.add(u(a), mu(a), ci);
            m.add(u(a), mu(b), -ci);
            m.add(s(a), s(a), ci);
            m.add(s(a), s(b), -ci);
            // +εK: −εc on the diagonal
            m.add(mu(a), u(a), -eps * ci);
            m.add(mu(a), u(b), eps * ci);
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::theta;

    fn line(n: usize) -> Grid {
        Grid::uniform(-1.0, 1.0, n, 1).unwrap()
    }

    #[test]
    fn chemical_potential_examples() {
        let g = line(101);
        let mu = chemical_potential(&g, &[1.0; 101], 0.1);
        assert!(mu.iter().all(|&m| m == 0.0));
        let mu = chemical_potential(&g, &[0.0; 101], 0.1);
        assert!(mu.iter().all(|&m| m == 0.0));
        // the standing wave is annihilated up to O(h²/ε³)
        let eps = 0.1;
        for n in [401usize, 801] {
            let g = line(n);
            let u: Vec<f64> = g.nodes().iter().map(|&x| theta(x / eps)).collect();
            let mu = chemical_potential(&g, &u, eps);
            let h: f64 = 2.0 / (n - 1) as f64;
            let inner = max_abs(&mu[1..n - 1]);
            assert!(inner < 2.0 * h * h / (eps * eps * eps), "n {n}: {inner}");
        }
    }

    #[test]
    fn uniform_wells_only_exchange_mass() {
        let g = line(41);
        let solver = DiffuseSolver::new(g, 0.1, SchemeParams::new(1e-3)).unwrap();
        let s = DiffuseState::new(0.0, 0.1, alloc::vec![1.0; 41], alloc::vec![0.0; 41]).unwrap();
        let tr = solver.run(&s, 0.05, 10).unwrap();
        let f = tr.final_state();
        for (u, sg) in f.u.iter().zip(&f.sigma) {
            assert!((u + sg - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn zero_step_is_the_identity() {
        let g = line(21);
        let solver = DiffuseSolver::new(g, 0.1, SchemeParams::new(0.0)).unwrap();
        let s = DiffuseState::new(0.3, 0.1, (0..21).map(|i| (i as f64 * 0.3).sin()).collect(), alloc::vec![0.2; 21]).unwrap();
        assert_eq!(solver.step(&s).unwrap(), s);
    }

    #[test]
    fn mass_is_conserved_and_energy_decays_without_reaction() {
        let eps = 0.1;
        for dim in 1..=3 {
            let g = Grid::uniform(0.0, 1.0, 161, dim).unwrap();
            let u: Vec<f64> = g.nodes().iter().map(|&r| theta((r - 0.5) / eps) + 0.1 * (7.0 * r).cos()).collect();
            let sigma: Vec<f64> = g.nodes().iter().map(|&r| 0.3 * r).collect();
            let s = DiffuseState::new(0.0, eps, u.clone(), sigma).unwrap();
            let solver = DiffuseSolver::new(g.clone(), eps, SchemeParams::new(1e-4)).unwrap();
            let tr = solver.run(&s, 0.1, 100).unwrap();
            assert_eq!(tr.steps, 1000);
            assert!(tr.mass_drift < 1e-10, "dim {dim}: {}", tr.mass_drift);

            let mut p = SchemeParams::new(1e-4);
            p.reaction = false;
            let solver = DiffuseSolver::new(g.clone(), eps, p).unwrap();
            let mut st = DiffuseState::new(0.0, eps, u, alloc::vec![0.0; g.len()]).unwrap();
            let mut e = energy(&g, &st.u, eps);
            for _ in 0..200 {
                st = solver.step(&st).unwrap();
                let e1 = energy(&g, &st.u, eps);
                assert!(e1 <= e + 1e-12, "energy rose from {e} to {e1}");
                e = e1;
                assert!(st.sigma.iter().all(|&v| v == 0.0));
            }
        }
    }

    #[test]
    fn symmetric_front_stays_centred() {
        let eps = 0.1;
        let g = line(161);
        let h = 2.0 / 160.0;
        let u: Vec<f64> = g.nodes().iter().map(|&x| theta(x / eps)).collect();
        let s = DiffuseState::new(0.0, eps, u, alloc::vec![0.0; 161]).unwrap();
        let solver = DiffuseSolver::new(g, eps, SchemeParams::new(2e-4)).unwrap();
        let tr = solver.run(&s, 0.1, 50).unwrap();
        for o in &tr.observables {
            assert!(o.interface.unwrap().abs() <= 2.0 * h);
        }
    }

    #[test]
    fn blow_up_and_bad_input_are_reported() {
        let g = line(11);
        let mut p = SchemeParams::new(1e-3);
        p.kappa = 4.0;
        assert!(DiffuseSolver::new(g.clone(), 0.1, p).is_err());
        let solver = DiffuseSolver::new(g, 0.1, SchemeParams::new(1e-3)).unwrap();
        let s = DiffuseState::new(0.0, 0.1, alloc::vec![1e3; 11], alloc::vec![0.0; 11]).unwrap();
        assert!(matches!(solver.run(&s, 0.01, 1), Err(Error::Halted { .. })));
        assert!(solver.run(&s, 0.0105, 1).is_err());
        let short = DiffuseState::new(0.0, 0.1, alloc::vec![1.0; 5], alloc::vec![0.0; 5]).unwrap();
        assert!(solver.step(&short).is_err());
    }
}
