//! Single-module studies behind the `profile`, `spectral`, `sharp`,
//! `construct` and `diffuse` subcommands.

use std::str::FromStr;
use std::sync::Arc;

use anyhow::{bail, Context};
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use sharplim_core::asymptotic::{run_history, ConstructionConfig, Constructor, InnerTables, Order, RegionSups};
use sharplim_core::diffuse::{resolution_nodes, DiffuseSolver, DiffuseState, SchemeParams};
use sharplim_core::grid::Grid;
use sharplim_core::profile::{d2theta, df, dtheta, theta, Cutoff, EtaVariant, Mollifier, MollifierKind};
use sharplim_core::sharp::{RadialDomain, SharpSolver};
use sharplim_core::spectral::{eigenfunction_deviation, solve_lowest_pairs, EigenProblem};

use crate::compare::impose_initial;
use crate::emit::{num, Table};

/// θ, its derivatives, the ODE residual, the switches η, η± (shift 2) and
/// the cutoff ζ on `n` points of `[−z_max, z_max]`.
pub fn profile_table(z_max: f64, n: usize, variant: EtaVariant) -> anyhow::Result<Table> {
    if n < 2 || !(z_max > 0.0) {
        bail!("need n ≥ 2 and z_max > 0");
    }
    let eta = Mollifier::new(2.0, variant)?;
    let zeta = Cutoff::new(variant);
    let mut t = Table::new(&["z", "theta", "dtheta", "d2theta", "ode_residual", "eta", "eta_plus", "eta_minus", "zeta"]);
    for i in 0..n {
        let z = -z_max + 2.0 * z_max * i as f64 / (n - 1) as f64;
        t.push_numbers(&[
            z,
            theta(z),
            dtheta(z),
            d2theta(z),
            d2theta(z) - df(theta(z)),
            eta.eval(z, MollifierKind::Plain, 0),
            eta.eval(z, MollifierKind::Plus, 0),
            eta.eval(z, MollifierKind::Minus, 0),
            zeta.eval(z, 0),
        ]);
    }
    Ok(t)
}

/// `(ε, λ₁, λ₂, ‖q₁ − αθ'‖², α)` per ladder entry; λ₂ is `nan` for
/// `count = 1`.
pub fn spectral_table(ladder: &[f64], n: usize, count: usize) -> anyhow::Result<Table> {
    let rows = ladder
        .par_iter()
        .map(|&eps| -> anyhow::Result<Vec<f64>> {
            let r = solve_lowest_pairs(&EigenProblem::new(eps, n)?, count).with_context(|| format!("ε = {eps}"))?;
            Ok(vec![eps, r.lambda1(), r.lambda2().unwrap_or(f64::NAN), eigenfunction_deviation(&r, eps), r.alpha])
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    let mut t = Table::new(&["epsilon", "lambda1", "lambda2", "deviation", "alpha"]);
    for r in rows {
        t.push_numbers(&r);
    }
    Ok(t)
}

/// Initial nutrient profiles: `zero`, `const:<c>` or `linear:<a>`
/// (`σ₀ = a·x`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SigmaProfile {
    Zero,
    Constant(f64),
    Linear(f64),
}

impl SigmaProfile {
    pub fn eval(self, x: f64) -> f64 {
        match self {
            SigmaProfile::Zero => 0.0,
            SigmaProfile::Constant(c) => c,
            SigmaProfile::Linear(a) => a * x,
        }
    }
}

impl FromStr for SigmaProfile {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> anyhow::Result<Self> {
        let (kind, arg) = s.split_once(':').unwrap_or((s, ""));
        let value = || arg.parse::<f64>().with_context(|| format!("bad σ₀ parameter in {s:?}"));
        Ok(match kind {
            "zero" => SigmaProfile::Zero,
            "const" => SigmaProfile::Constant(value()?),
            "linear" => SigmaProfile::Linear(value()?),
            _ => bail!("unknown σ₀ profile {s:?} (zero, const:<c>, linear:<a>)"),
        })
    }
}

/// `(t, R, V, max|μ|, max|σ|)` along a sharp trajectory.
pub fn sharp_table(domain: RadialDomain, r0: f64, dt: f64, t_end: f64, sigma0: SigmaProfile, gamma: f64) -> anyhow::Result<Table> {
    let solver = SharpSolver::new(domain).with_gibbs_thomson(gamma);
    let init = solver.initial(r0, |x| sigma0.eval(x))?;
    let traj = solver.run(init, dt, t_end, 1)?;
    let max_abs = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut t = Table::new(&["t", "R", "V", "max_abs_mu", "max_abs_sigma"]);
    for s in &traj.states {
        t.push_numbers(&[s.t, s.r, s.v, max_abs(&s.mu), max_abs(&s.sigma)]);
    }
    Ok(t)
}

/// Settings shared by `construct` and `diffuse`.
#[derive(Debug, Clone, Copy)]
pub struct ConstructSettings {
    pub domain: RadialDomain,
    pub r0: f64,
    pub sigma0: SigmaProfile,
    pub eps: f64,
    pub order: Order,
    pub delta: Option<f64>,
    pub eta: EtaVariant,
    pub sharp_dt: f64,
}

/// Residual norms per region and the glued fields at time `t` on `n_out`
/// uniform nodes.
pub fn construct_tables(s: &ConstructSettings, t: f64, n_out: usize) -> anyhow::Result<(Table, Table)> {
    if n_out < 2 {
        bail!("need at least 2 output nodes");
    }
    let solver = SharpSolver::new(s.domain);
    let init = solver.initial(s.r0, |x| s.sigma0.eval(x))?;
    let horizon = t.max(2.0 * s.sharp_dt);
    let history = run_history(&solver, init, s.sharp_dt, horizon, s.order)?;
    let j = history.index_near(t);
    let mut cfg = ConstructionConfig::new(s.eps, s.order);
    cfg.delta = s.delta;
    cfg.eta = s.eta;
    let con = Constructor::with_tables(cfg, Arc::new(InnerTables::new(s.eta)?))?;
    let d = &s.domain;
    let nodes: Vec<f64> = (0..n_out).map(|i| d.r_in + (d.r_out - d.r_in) * i as f64 / (n_out - 1) as f64).collect();
    let a = con.build(&history, j, &nodes)?;

    let mut res = Table::new(&["region", "omega1", "omega2", "omega3", "omega4"]);
    let regions: [(&str, fn(&RegionSups) -> f64); 4] =
        [("all", |r| r.all), ("layer", |r| r.layer), ("boundary", |r| r.boundary), ("outer", |r| r.outer)];
    for (name, pick) in regions {
        let mut row = vec![name.to_string()];
        row.extend(a.residuals.omega.iter().map(|w| num(pick(w))));
        res.rows.push(row);
    }
    let mut fields = Table::new(&["x", "u", "mu", "sigma", "phi", "u_bar", "mu_bar", "sigma_bar"]);
    for i in 0..n_out {
        fields.push_numbers(&[nodes[i], a.u[i], a.mu[i], a.sigma[i], a.phi[i], a.u_bar[i], a.mu_bar[i], a.sigma_bar[i]]);
    }
    Ok((res, fields))
}

/// Where `diffuse` takes its initial data from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialData {
    /// Imposed from the glued approximation at `t = 0`.
    Constructed,
    Uniform { u: f64, sigma: f64 },
}

/// Observables every `every` steps and, optionally, the final fields.
pub fn diffuse_tables(
    s: &ConstructSettings,
    n: Option<usize>,
    dt: f64,
    t_end: f64,
    every: usize,
    initial: InitialData,
) -> anyhow::Result<(Table, Table)> {
    let n = n.unwrap_or_else(|| resolution_nodes(&s.domain, s.eps));
    let solver = DiffuseSolver::for_domain(&s.domain, n, s.eps, SchemeParams::new(dt))?;
    let (u, sigma) = match initial {
        InitialData::Uniform { u, sigma } => (vec![u; n], vec![sigma; n]),
        InitialData::Constructed => {
            let solver = SharpSolver::new(s.domain);
            let init = solver.initial(s.r0, |x| s.sigma0.eval(x))?;
            let history = run_history(&solver, init, s.sharp_dt, 2.0 * s.sharp_dt, s.order)?;
            let mut cfg = ConstructionConfig::new(s.eps, s.order);
            cfg.delta = s.delta;
            cfg.eta = s.eta;
            let con = Constructor::new(cfg)?;
            impose_initial(&con.build(&history, 0, solver_nodes(&s.domain, n)?.nodes())?)?
        }
    };
    let traj = solver.run(&DiffuseState::new(0.0, s.eps, u, sigma)?, t_end, every)?;
    let mut obs = Table::new(&["t", "interface", "phi_mass", "u_max", "sigma_max", "energy"]);
    for o in &traj.observables {
        obs.push_numbers(&[o.t, o.interface.unwrap_or(f64::NAN), o.phi_mass, o.u_max, o.sigma_max, o.energy]);
    }
    let last = traj.final_state();
    let mu = last.mu(&solver.grid);
    let mut fields = Table::new(&["x", "u", "mu", "sigma"]);
    for (i, &x) in solver.grid.nodes().iter().enumerate() {
        fields.push_numbers(&[x, last.u[i], mu[i], last.sigma[i]]);
    }
    Ok((obs, fields))
}

fn solver_nodes(domain: &RadialDomain, n: usize) -> anyhow::Result<Grid> {
    Ok(Grid::uniform(domain.r_in, domain.r_out, n, domain.measure_dim())?)
}

/// Classical RK4 for the uniform-field reduction
/// `u' = 2σ + u − f'(u)/ε`, `σ' = −(2σ + u − f'(u)/ε)`.
pub fn uniform_ode(u0: f64, s0: f64, eps: f64, t_end: f64, steps: usize) -> (f64, f64) {
    let rhs = |u: f64, s: f64| {
        let g = 2.0 * s + u - df(u) / eps;
        (g, -g)
    };
    let h = t_end / steps as f64;
    let (mut u, mut s) = (u0, s0);
    for _ in 0..steps {
        let k1 = rhs(u, s);
        let k2 = rhs(u + 0.5 * h * k1.0, s + 0.5 * h * k1.1);
        let k3 = rhs(u + 0.5 * h * k2.0, s + 0.5 * h * k2.1);
        let k4 = rhs(u + h * k3.0, s + h * k3.1);
        u += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
        s += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
    }
    (u, s)
}

/// Uniform-field agreement between the scheme and [`uniform_ode`] for
/// `pairs` random initial values drawn from `seed`.
pub fn uniform_oracle_table(eps: f64, dt: f64, t_end: f64, pairs: usize, seed: u64) -> anyhow::Result<Table> {
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    let inputs: Vec<(f64, f64)> = (0..pairs).map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let grid = Grid::uniform(0.0, 1.0, 4, 1)?;
    let solver = DiffuseSolver::new(grid, eps, SchemeParams::new(dt))?;
    let rows = inputs
        .par_iter()
        .map(|&(u0, s0)| -> anyhow::Result<Vec<f64>> {
            let traj = solver.run(&DiffuseState::new(0.0, eps, vec![u0; 4], vec![s0; 4])?, t_end, usize::MAX)?;
            let last = traj.final_state();
            let (u, s) = uniform_ode(u0, s0, eps, t_end, 20_000);
            let err = (last.u[0] - u).abs().max((last.sigma[0] - s).abs());
            Ok(vec![u0, s0, last.u[0], last.sigma[0], u, s, err])
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    let mut t = Table::new(&["u0", "sigma0", "u_scheme", "sigma_scheme", "u_ode", "sigma_ode", "error"]);
    for r in rows {
        t.push_numbers(&r);
    }
    Ok(t)
}
