//! Acceptance suite: one PASS/FAIL line per criterion. Exits non-zero when
//! any criterion fails.

use std::time::{Duration, Instant};

use nalgebra::{DMatrix, SymmetricEigen};
use sharplim_core::analysis::{fit_rate, strictly_decreasing};
use sharplim_core::asymptotic::{
    interface_solvability_integral, residual_orders, run_history, ApproxSolution, ConstructionConfig, Constructor, Order,
};
use sharplim_core::diffuse::{DiffuseSolver, DiffuseState, SchemeParams};
use sharplim_core::grid::Grid;
use sharplim_core::profile::{d2theta, df, dtheta, f, surface_tension, theta};
use sharplim_core::sharp::{RadialDomain, SharpSolver, GIBBS_THOMSON_LITERAL, GIBBS_THOMSON_SOLVABLE};
use sharplim_core::spectral::{
    eigenfunction_deviation, lambda1_decay_study, rayleigh_lower_bound, solve_lowest_pairs, EigenProblem, RayleighForm,
    StudyPotential,
};
use sharplim_lab::config::RunConfig;
use sharplim_lab::pipeline::{converge, Observable};

const LADDER: [f64; 3] = [0.1, 0.05, 0.025];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(", ")
}

// 1. θ solves θ'' = f'(θ), θ' = √(2f(θ)); S against a quadrature oracle.
fn profile_exactness() -> Outcome {
    let n = 10_000;
    let (mut ode, mut first) = (0.0f64, 0.0f64);
    for i in 0..n {
        let z = -20.0 + 40.0 * i as f64 / (n - 1) as f64;
        ode = ode.max((d2theta(z) - df(theta(z))).abs());
        first = first.max((dtheta(z) - (2.0 * f(theta(z))).sqrt()).abs());
    }
    // composite Simpson for ∫_{-1}^{1} √(2(u²−1)²) du
    let panels = 2000;
    let h = 2.0 / panels as f64;
    let g = |u: f64| (2.0 * (u * u - 1.0) * (u * u - 1.0)).sqrt();
    let mut s = g(-1.0) + g(1.0);
    for i in 1..panels {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * g(-1.0 + i as f64 * h);
    }
    let oracle = s * h / 3.0;
    let st = surface_tension();
    let pass = ode < 1e-12 && first < 1e-12 && (st - oracle).abs() < 1e-8;
    outcome(pass, format!("max|θ''−f'(θ)| = {ode:.2e}, max|θ'−√(2f)| = {first:.2e}, S = {st:.12} vs oracle {oracle:.12}"))
}

fn dense_lambda2(eps: f64, n: usize) -> f64 {
    // second-order ghost-point Neumann matrix, symmetrised by the trapezoid
    // weights
    let h = 2.0 / (eps * (n - 1) as f64);
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        let z = -1.0 / eps + i as f64 * h;
        let th = (2f64.sqrt() * z).tanh();
        m[(i, i)] = 2.0 / (h * h) + 12.0 * th * th - 4.0;
        if i > 0 {
            m[(i, i - 1)] = -1.0 / (h * h);
        }
        if i + 1 < n {
            m[(i, i + 1)] = -1.0 / (h * h);
        }
    }
    let r = 2f64.sqrt();
    m[(0, 1)] = -r / (h * h);
    m[(1, 0)] = -r / (h * h);
    m[(n - 1, n - 2)] = -r / (h * h);
    m[(n - 2, n - 1)] = -r / (h * h);
    let mut ev: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev[1]
}

// 2. Spectral gap, exponential decay of λ₁ and the eigenfunction.
fn spectral_gap() -> anyhow::Result<Outcome> {
    let r = solve_lowest_pairs(&EigenProblem::new(0.125, 4001)?, 2)?;
    let l2 = r.lambda2().unwrap();
    let dense = dense_lambda2(0.125, 801);
    let h = 2.0 / (0.125 * 800.0);
    let a = (5.4..=6.6).contains(&l2) && (5.4..=6.6).contains(&dense) && (l2 - dense).abs() < 2.0 * h * h;
    let study = lambda1_decay_study(&[0.5, 0.25, 0.125], 4001, StudyPotential::Layer)?;
    let mags: Vec<f64> = study.entries.iter().map(|e| e.lambda1.abs()).collect();
    let b = mags.windows(2).all(|w| w[1] * 10.0 <= w[0]) && study.slope < 0.0;
    let dev = eigenfunction_deviation(&r, 0.125);
    let c = dev < 1e-4;
    Ok(outcome(
        a && b && c,
        format!(
            "(a) λ₂ = {l2:.6}, dense n=801 λ₂ = {dense:.6}; (b) |λ₁| = [{}], slope {:.3}; (c) ‖q₁−αθ'‖² = {dev:.2e}",
            fmt_list(&mags),
            study.slope
        ),
    ))
}

fn interval_history(order: Order) -> anyhow::Result<sharplim_core::asymptotic::SharpHistory> {
    let solver = SharpSolver::new(RadialDomain::interval(0.0, 1.0, 801)?);
    let init = solver.initial(0.5, |_| 0.0)?;
    Ok(run_history(&solver, init, 1e-3, 0.01, order)?)
}

// 3. ε-uniform lower bound of the flat form around the constructed layer.
fn spectral_condition() -> anyhow::Result<Outcome> {
    let history = interval_history(Order::One)?;
    let n = 4001;
    let x: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
    let mut layer = Vec::new();
    let mut corrected = Vec::new();
    let mut control = Vec::new();
    for eps in LADDER {
        let a = Constructor::new(ConstructionConfig::new(eps, Order::One))?.build(&history, 0, &x)?;
        layer.push(rayleigh_lower_bound(&a.u_bar, eps, RayleighForm::Flat)?);
        corrected.push(rayleigh_lower_bound(&a.u, eps, RayleighForm::Flat)?);
        control.push(rayleigh_lower_bound(&vec![0.0; n], eps, RayleighForm::Flat)?);
    }
    let c: Vec<f64> = layer.iter().map(|b| -b).collect();
    let same = layer.iter().all(|b| b.is_finite() && (b / layer[0]) >= 0.5 && (b / layer[0]) <= 2.0);
    let bounded = c.iter().all(|&ci| ci < 50.0);
    let control_ok = LADDER.iter().zip(&control).all(|(e, b)| (b + 4.0 / (e * e)).abs() < 1e-8 * 4.0 / (e * e));
    Ok(outcome(
        same && bounded && control_ok,
        format!(
            "layer ū: bounds [{}] (C = −bound); u ≡ 0: [{}] = −4/ε²; corrected u^A (k = 1): [{}]",
            fmt_list(&layer),
            fmt_list(&control),
            fmt_list(&corrected)
        ),
    ))
}

/// Jump `[∂μ/∂ν]` from third-order one-sided stencils.
fn flux_jump(x: &[f64], g: &[f64], k: usize) -> f64 {
    let d = |s: f64, idx: [usize; 4]| {
        let h = (x[idx[1]] - x[idx[0]]).abs();
        s * (-11.0 * g[idx[0]] + 18.0 * g[idx[1]] - 9.0 * g[idx[2]] + 2.0 * g[idx[3]]) / (6.0 * h)
    };
    let right = d(1.0, [k, k + 1, k + 2, k + 3]);
    let left = d(-1.0, [k, k - 1, k - 2, k - 3]);
    right - left
}

// 4. Solvability at Γ with the radial sharp solution as input.
fn solvability() -> anyhow::Result<Outcome> {
    let domain = RadialDomain::ball(2, 1.0, 801)?;
    let r0 = 0.5;
    let lap_d = (domain.dim - 1) as f64 / r0;
    let literal = SharpSolver::new(domain).with_gibbs_thomson(GIBBS_THOMSON_LITERAL).initial(r0, |_| 0.0)?;
    let i_literal = interface_solvability_integral(lap_d, literal.mu[literal.k]);
    let solvable = SharpSolver::new(domain).with_gibbs_thomson(GIBBS_THOMSON_SOLVABLE);
    let s0 = solvable.initial(r0, |_| 0.0)?;
    let mu_g = s0.mu[s0.k];
    let i_solvable = interface_solvability_integral(lap_d, mu_g);
    let slope = (interface_solvability_integral(lap_d, mu_g + 0.1) - i_solvable) / 0.1;
    let traj = solvable.run(s0, 1e-3, 0.05, 1)?;
    let (mut worst, mut h) = (0.0f64, 0.0f64);
    for s in &traj.states {
        worst = worst.max((flux_jump(&s.nodes, &s.mu, s.k) + 2.0 * s.v).abs());
        h = h.max(s.nodes[s.k + 1] - s.nodes[s.k]).max(s.nodes[s.k] - s.nodes[s.k - 1]);
    }
    let literal_ok = i_literal.abs() < 1e-8;
    let perturb_ok = (slope - 2.0).abs() < 1e-6;
    let jump_ok = worst <= h;
    Ok(outcome(
        literal_ok && perturb_ok && jump_ok,
        format!(
            "∫Θ₀,₃θ' at μ⁰|Γ = κS: {i_literal:.6e}; at μ⁰|Γ = κS/2: {i_solvable:.2e}; departure per 0.1 of μ⁰|Γ: {:.8}; \
             max|[∂μ⁰/∂ν] + 2V| = {worst:.2e} (h = {h:.2e})",
            0.1 * slope
        ),
    ))
}

// 5. Convergence of the diffuse runs towards the approximation and the
//    sharp limit. Returns the mass drifts for criterion 6.
fn convergence() -> anyhow::Result<(Outcome, Vec<f64>)> {
    let cfg = RunConfig::default();
    let report = converge(&cfg)?;
    let series = |o: Observable| report.series(o).iter().map(|p| p.1).collect::<Vec<_>>();
    let rate = |o: Observable| report.fit(o).map_or(f64::NAN, |f| f.rate);
    let u = series(Observable::UOuter);
    let a = strictly_decreasing(&u) && rate(Observable::UOuter) >= 0.8;
    let b = strictly_decreasing(&series(Observable::Sigma)) && strictly_decreasing(&series(Observable::Mu));
    let c = rate(Observable::Interface) >= 0.8;
    let d = strictly_decreasing(&series(Observable::LayerProfile));
    let drifts = report.runs.iter().map(|r| r.errors.mass_drift).collect();
    Ok((
        outcome(
            a && b && c && d,
            format!(
                "(a) ‖u^ε−u^A‖ outer [{}] rate {:.3}; (b) σ [{}], μ [{}]; (c) |R^ε−R| [{}] rate {:.3}; (d) layer [{}]",
                fmt_list(&u),
                rate(Observable::UOuter),
                fmt_list(&series(Observable::Sigma)),
                fmt_list(&series(Observable::Mu)),
                fmt_list(&series(Observable::Interface)),
                rate(Observable::Interface),
                fmt_list(&series(Observable::LayerProfile)),
            ),
        ),
        drifts,
    ))
}

fn rk4(u0: f64, s0: f64, eps: f64, t: f64, steps: usize) -> (f64, f64) {
    let rhs = |u: f64, s: f64| {
        let g = 2.0 * s + u - 4.0 * u * (u * u - 1.0) / eps;
        (g, -g)
    };
    let h = t / steps as f64;
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

// 6. φ-mass conservation and the uniform-field ODE oracle.
fn conservation(mut drifts: Vec<f64>) -> anyhow::Result<Outcome> {
    let (eps, t_end) = (0.5, 0.1);
    let grid = Grid::uniform(0.0, 1.0, 4, 1)?;
    let solver = DiffuseSolver::new(grid, eps, SchemeParams::new(1e-7))?;
    let mut errs = Vec::new();
    for (u0, s0) in [(0.5, 0.2), (-0.3, 0.7), (0.9, -0.4)] {
        let traj = solver.run(&DiffuseState::new(0.0, eps, vec![u0; 4], vec![s0; 4])?, t_end, usize::MAX)?;
        drifts.push(traj.mass_drift);
        let last = traj.final_state();
        let (u, s) = rk4(u0, s0, eps, t_end, 20_000);
        errs.push((last.u[0] - u).abs().max((last.sigma[0] - s).abs()));
    }
    // a layered run in three dimensions without the exchange terms
    let grid = Grid::uniform(0.0, 1.0, 161, 3)?;
    let mut params = SchemeParams::new(1e-4);
    params.reaction = false;
    let solver = DiffuseSolver::new(grid.clone(), 0.05, params)?;
    let u: Vec<f64> = grid.nodes().iter().map(|&x| theta((x - 0.6) / 0.05)).collect();
    let sigma: Vec<f64> = grid.nodes().iter().map(|&x| 0.3 * (2.0 * x).cos()).collect();
    drifts.push(solver.run(&DiffuseState::new(0.0, 0.05, u, sigma)?, 0.01, 10)?.mass_drift);
    let worst = drifts.iter().copied().fold(0.0, f64::max);
    let pass = worst < 1e-10 && errs.iter().all(|e| *e < 1e-6);
    Ok(outcome(pass, format!("max relative drift {worst:.2e} over {} runs; ODE errors [{}]", drifts.len(), fmt_list(&errs))))
}

// 7. Residual decay of the third equation with k = 1 and the k = 0 control.
fn residual_decay() -> anyhow::Result<Outcome> {
    let domain = RadialDomain::ball(2, 1.0, 801)?;
    let solver = SharpSolver::new(domain);
    let history = run_history(&solver, solver.initial(0.5, |_| 0.0)?, 1e-3, 0.01, Order::One)?;
    let mut fits = Vec::new();
    let mut detail = Vec::new();
    for order in [Order::One, Order::Zero] {
        let ladder: Vec<ApproxSolution> = LADDER
            .iter()
            .map(|&eps| {
                let mut c = ConstructionConfig::new(eps, order);
                c.delta = Some(0.2);
                let con = Constructor::new(c)?;
                let grid = con.residual_grid(&domain)?;
                con.build(&history, 5, grid.nodes())
            })
            .collect::<Result<_, _>>()?;
        let orders = residual_orders(&ladder)?;
        let w3: Vec<f64> = ladder.iter().map(|a| a.residuals.omega[2].all).collect();
        let outer: Vec<(f64, f64)> = ladder.iter().map(|a| (a.eps, a.residuals.omega[2].outer)).collect();
        let outer_rate = fit_rate(&outer).map_or(f64::NAN, |f| f.rate);
        detail.push(format!(
            "k = {}: ‖ω₃‖ [{}] order {:.3} (outside Γ(δ): order {outer_rate:.3})",
            order.k(),
            fmt_list(&w3),
            orders.omega[2].rate
        ));
        fits.push(orders.omega[2].rate);
    }
    let pass = fits[0] >= 1.0 && fits[1].abs() <= 0.3;
    Ok(outcome(pass, detail.join("; ")))
}

fn report(n: usize, name: &str, budget: Duration, run: impl FnOnce() -> anyhow::Result<Outcome>) -> bool {
    let start = Instant::now();
    let result = run();
    let elapsed = start.elapsed();
    let (pass, detail) = match result {
        Ok(o) => (o.pass && elapsed <= budget, o.detail),
        Err(e) => (false, format!("error: {e:#}")),
    };
    println!(
        "criterion {n} {name}: {} ({:.1} s of {:.0} s) {detail}",
        if pass { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        budget.as_secs_f64()
    );
    pass
}

fn main() {
    let mut drifts = Vec::new();
    let mut all = true;
    all &= report(1, "profile exactness", Duration::from_secs(1), || Ok(profile_exactness()));
    all &= report(2, "spectral gap", Duration::from_secs(30), spectral_gap);
    all &= report(3, "spectral condition", Duration::from_secs(60), spectral_condition);
    all &= report(4, "solvability", Duration::from_secs(60), solvability);
    all &= report(5, "convergence", Duration::from_secs(900), || {
        let (o, d) = convergence()?;
        drifts = d;
        Ok(o)
    });
    all &= report(6, "conservation and ODE oracle", Duration::from_secs(10), || conservation(std::mem::take(&mut drifts)));
    all &= report(7, "construction residuals", Duration::from_secs(120), residual_decay);
    if !all {
        std::process::exit(1);
    }
}
