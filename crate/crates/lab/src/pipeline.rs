//! The ε-ladder convergence study: one sharp history, one diffuse run and
//! one sequence of glued approximations per ε.

use std::sync::Arc;

use anyhow::Context;
use rayon::prelude::*;
use sharplim_core::analysis::{fit_rate, RateFit};
use sharplim_core::asymptotic::{run_history, ApproxSolution, Constructor, InnerTables, ResidualNorms, SharpHistory};
use sharplim_core::diffuse::{DiffuseSolver, DiffuseState, SchemeParams};
use sharplim_core::sharp::SharpSolver;

use crate::compare::{compare, impose_initial, ErrorEntry, FieldSnapshot, Partition, SharpSample};
use crate::config::RunConfig;

/// Sharp trajectory (with the order-1 data when `k = 1`) recorded at every
/// sharp step.
pub fn sharp_history(cfg: &RunConfig) -> anyhow::Result<SharpHistory> {
    let solver = SharpSolver::new(cfg.domain()?);
    let sigma0 = cfg.sigma0;
    let init = solver.initial(cfg.r0, |_| sigma0)?;
    Ok(run_history(&solver, init, cfg.sharp_dt(), cfg.t_end, cfg.order()?)?)
}

/// Everything measured for one ε.
#[derive(Debug, Clone)]
pub struct EpsRun {
    pub errors: ErrorEntry,
    pub partition: Partition,
    pub nodes: usize,
    pub steps: usize,
    pub dt: f64,
    /// Residual norms of the approximation at `T`.
    pub residuals: ResidualNorms,
    /// `max|u₀^ε + σ₀^ε − φ^A(·,0)|`, zero up to rounding.
    pub initial_mismatch: f64,
}

/// Runs the diffuse model for one ε from the imposed initial data and
/// compares it at every snapshot.
pub fn run_eps(cfg: &RunConfig, history: &SharpHistory, tables: Arc<InnerTables>, eps: f64) -> anyhow::Result<EpsRun> {
    let domain = cfg.domain()?;
    let n = cfg.diffuse_nodes(eps)?;
    let steps = cfg.diffuse_steps(eps);
    let dt = cfg.t_end / steps as f64;
    let solver = DiffuseSolver::for_domain(&domain, n, eps, SchemeParams::new(dt))?;
    let grid = solver.grid.clone();
    let nodes = grid.nodes().to_vec();
    let con = Constructor::with_tables(cfg.construction(eps)?, tables)?;

    let snapshots = cfg.time.snapshots;
    let sub = cfg.time.sharp_substeps;
    let approx: Vec<ApproxSolution> = (0..=snapshots)
        .map(|m| con.build(history, m * sub, &nodes))
        .collect::<Result<_, _>>()
        .with_context(|| format!("constructing the approximation for ε = {eps}"))?;
    let (u0, s0) = impose_initial(&approx[0])?;
    let initial_mismatch = u0
        .iter()
        .zip(&s0)
        .zip(&approx[0].phi)
        .map(|((u, s), p)| (u + s - p).abs())
        .fold(0.0, f64::max);
    let init = DiffuseState::new(0.0, eps, u0, s0)?;
    let traj = solver.run(&init, cfg.t_end, steps / snapshots).with_context(|| format!("diffuse run for ε = {eps}"))?;

    // errors are sampled at t = mT/M, m = 1..M; t = 0 carries the imposed
    // data, whose μ^ε is not yet relaxed onto the layer
    let diffuse: Vec<FieldSnapshot> = traj
        .snapshots
        .iter()
        .skip(1)
        .map(|s| FieldSnapshot { t: s.t, u: s.u.clone(), mu: s.mu(&grid), sigma: s.sigma.clone(), phi: s.phi() })
        .collect();
    let approx_fields: Vec<FieldSnapshot> = approx.iter().skip(1).map(FieldSnapshot::from_approx).collect();
    let sharp: Vec<SharpSample> = approx
        .iter()
        .enumerate()
        .skip(1)
        .map(|(m, a)| {
            let s = &history.sharp[m * sub];
            SharpSample {
                t: s.t,
                r: s.r,
                d1: a.distance.d1,
                delta: a.delta,
                mu: nodes.iter().map(|&x| s.mu_at(x)).collect(),
                sigma: nodes.iter().map(|&x| s.sigma_at(x)).collect(),
            }
        })
        .collect();
    let (mut errors, partition) = compare(&grid, eps, &diffuse, &approx_fields, &sharp)?;
    errors.mass_drift = traj.mass_drift;
    Ok(EpsRun { errors, partition, nodes: n, steps, dt, residuals: approx[snapshots].residuals, initial_mismatch })
}

/// Observables carried through fits, CSV and plots.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Observable {
    UOuter,
    ULayer,
    Sigma,
    Mu,
    Interface,
    LayerProfile,
    PhiNegativeNorm,
}

impl Observable {
    pub const ALL: [Observable; 7] = [
        Observable::UOuter,
        Observable::ULayer,
        Observable::Sigma,
        Observable::Mu,
        Observable::Interface,
        Observable::LayerProfile,
        Observable::PhiNegativeNorm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Observable::UOuter => "u_outer",
            Observable::ULayer => "u_layer",
            Observable::Sigma => "sigma",
            Observable::Mu => "mu",
            Observable::Interface => "interface",
            Observable::LayerProfile => "layer_profile",
            Observable::PhiNegativeNorm => "phi_negative_norm",
        }
    }

    pub fn value(self, e: &ErrorEntry) -> f64 {
        match self {
            Observable::UOuter => e.u_outer(),
            Observable::ULayer => e.u_layer,
            Observable::Sigma => e.sigma,
            Observable::Mu => e.mu,
            Observable::Interface => e.interface,
            Observable::LayerProfile => e.layer_profile,
            Observable::PhiNegativeNorm => e.phi_negative_norm,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct ConvergenceReport {
    pub runs: Vec<EpsRun>,
}

impl ConvergenceReport {
    pub fn series(&self, o: Observable) -> Vec<(f64, f64)> {
        self.runs.iter().map(|r| (r.errors.eps, o.value(&r.errors))).collect()
    }

    /// `None` when the series cannot be fitted (fewer than three points or a
    /// zero / infinite error).
    pub fn fit(&self, o: Observable) -> Option<RateFit> {
        fit_rate(&self.series(o)).ok().filter(|f| f.rate.is_finite())
    }

    pub fn max_mass_drift(&self) -> f64 {
        self.runs.iter().map(|r| r.errors.mass_drift).fold(0.0, f64::max)
    }
}

/// The full study; ε jobs run on a pool of `cfg.workers` threads and are
/// reported in ladder order.
pub fn converge(cfg: &RunConfig) -> anyhow::Result<ConvergenceReport> {
    cfg.validate()?;
    let history = sharp_history(cfg).context("sharp-interface history")?;
    let tables = Arc::new(InnerTables::new(cfg.eta.into())?);
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(w) = cfg.workers {
        pool = pool.num_threads(w);
    }
    let pool = pool.build()?;
    let runs = pool.install(|| {
        cfg.ladder.par_iter().map(|&eps| run_eps(cfg, &history, tables.clone(), eps)).collect::<anyhow::Result<Vec<_>>>()
    })?;
    Ok(ConvergenceReport { runs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use sharplim_core::asymptotic::{ConstructionConfig, Order};

    fn small() -> RunConfig {
        let mut c = RunConfig { ladder: vec![0.2, 0.15, 0.1], t_end: 0.01, ..RunConfig::default() };
        c.time.snapshots = 4;
        c.time.sharp_substeps = 2;
        c.time.diffuse_dt_factor = 1.0;
        c.grid.sharp_nodes = 401;
        c.delta = Some(0.2);
        c
    }

    #[test]
    fn imposed_initial_data_reproduce_phi() {
        let cfg = small();
        let h = sharp_history(&cfg).unwrap();
        let nodes: Vec<f64> = (0..101).map(|i| i as f64 / 100.0).collect();
        let con = Constructor::new(ConstructionConfig::new(0.1, Order::One)).unwrap();
        let a = con.build(&h, 0, &nodes).unwrap();
        let (u, s) = impose_initial(&a).unwrap();
        assert_eq!(s, a.sigma);
        for i in 0..nodes.len() {
            assert!((u[i] + s[i] - a.phi[i]).abs() < 1e-15);
        }
        let later = con.build(&h, 2, &nodes).unwrap();
        assert!(impose_initial(&later).is_err());
    }

    #[test]
    fn zero_nutrient_at_order_zero_gives_u_equal_phi() {
        let mut cfg = small();
        cfg.order = 0;
        let h = sharp_history(&cfg).unwrap();
        let nodes: Vec<f64> = (0..101).map(|i| i as f64 / 100.0).collect();
        let con = Constructor::new(cfg.construction(0.1).unwrap()).unwrap();
        let a = con.build(&h, 0, &nodes).unwrap();
        let (u, _) = impose_initial(&a).unwrap();
        assert!(a.sigma.iter().all(|&v| v == 0.0));
        assert_eq!(u, a.phi);
    }

    #[test]
    fn small_study_runs_and_is_deterministic() {
        let cfg = small();
        let a = converge(&cfg).unwrap();
        assert_eq!(a.runs.len(), 3);
        for r in &a.runs {
            assert_eq!(r.errors.snapshots, cfg.time.snapshots);
            assert!(r.errors.mass_drift < 1e-10);
            assert!(r.initial_mismatch < 1e-14);
            for o in Observable::ALL {
                let v = o.value(&r.errors);
                assert!(v.is_finite() && v >= 0.0, "{}: {v}", o.name());
            }
        }
        let mut one = cfg.clone();
        one.workers = Some(1);
        let b = converge(&one).unwrap();
        for (x, y) in a.runs.iter().zip(&b.runs) {
            assert_eq!(x.errors, y.errors);
        }
    }
}
