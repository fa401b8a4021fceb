use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use sharplim_core::asymptotic::Order;
use sharplim_core::profile::EtaVariant;
use sharplim_core::sharp::GIBBS_THOMSON_SOLVABLE;
use sharplim_lab::config::{EtaChoice, GeometryKind, RunConfig};
use sharplim_lab::emit::{emit, write_manifest, Table};
use sharplim_lab::pipeline::{converge, Observable};
use sharplim_lab::studies::{self, ConstructSettings, InitialData, SigmaProfile};

/// Diffuse-interface tumor growth: sharp-interface limit laboratory.
#[derive(Parser, Debug)]
#[command(name = "sharplim", version)]
struct Cli {
    /// TOML run configuration; command-line flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for ε-parallel jobs.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Seed for randomised property inputs.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct GeometryArgs {
    #[arg(long, value_enum)]
    geometry: Option<GeometryArg>,
    /// Ball dimension.
    #[arg(long)]
    dim: Option<usize>,
    /// Outer radius (ball) or right end (interval).
    #[arg(long)]
    right: Option<f64>,
    /// Initial front position.
    #[arg(long)]
    r0: Option<f64>,
    /// Sharp-grid node count.
    #[arg(long)]
    sharp_nodes: Option<usize>,
    /// Initial nutrient: zero, const:<c> or linear:<a>.
    #[arg(long, default_value = "zero")]
    sigma0: SigmaProfile,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum GeometryArg {
    Ball,
    Interval,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum EtaArg {
    Bump,
    Smoothstep,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample θ, η, η± and ζ.
    Profile {
        #[arg(long, default_value_t = 8.0)]
        z_max: f64,
        #[arg(long, default_value_t = 401)]
        n: usize,
        #[arg(long, value_enum, default_value = "bump")]
        eta: EtaArg,
    },
    /// Lowest eigenpairs of the linearised operator along an ε ladder.
    Spectral {
        #[arg(long, value_delimiter = ',', default_values_t = [0.5, 0.25, 0.125])]
        ladder: Vec<f64>,
        #[arg(long, default_value_t = 4001)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        count: usize,
    },
    /// Front-tracking solution of the limit problem.
    Sharp {
        #[command(flatten)]
        geometry: GeometryArgs,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        #[arg(long)]
        t_end: Option<f64>,
        /// Gibbs–Thomson coefficient γ in μ = γκS.
        #[arg(long, default_value_t = GIBBS_THOMSON_SOLVABLE)]
        gamma: f64,
    },
    /// Glued approximate solution and its residuals.
    Construct {
        #[command(flatten)]
        geometry: GeometryArgs,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        order: Option<u32>,
        #[arg(long)]
        delta: Option<f64>,
        /// Time of the snapshot.
        #[arg(long, default_value_t = 0.0)]
        t: f64,
        #[arg(long, default_value_t = 1e-3)]
        sharp_dt: f64,
        /// Output nodes of the field profile.
        #[arg(long, default_value_t = 401)]
        n: usize,
    },
    /// Direct simulation of the diffuse model.
    Diffuse {
        #[command(flatten)]
        geometry: GeometryArgs,
        #[arg(long)]
        eps: f64,
        /// Grid nodes (default: h ≤ ε/8).
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        dt: f64,
        #[arg(long)]
        t_end: Option<f64>,
        /// Observable cadence in steps.
        #[arg(long, default_value_t = 10)]
        every: usize,
        /// Uniform initial data `u,σ` instead of the constructed layer.
        #[arg(long, value_delimiter = ',', num_args = 2)]
        uniform: Option<Vec<f64>>,
        /// Also check the scheme against the uniform-field ODE for this
        /// many seeded random pairs.
        #[arg(long)]
        oracle: Option<usize>,
    },
    /// ε-ladder convergence study.
    Converge {
        #[command(flatten)]
        geometry: GeometryArgs,
        #[arg(long, value_delimiter = ',')]
        ladder: Option<Vec<f64>>,
        #[arg(long)]
        order: Option<u32>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        t_end: Option<f64>,
        #[arg(long)]
        snapshots: Option<usize>,
        #[arg(long, value_enum)]
        eta: Option<EtaArg>,
    },
}

impl GeometryArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        if let Some(g) = self.geometry {
            cfg.geometry.kind = match g {
                GeometryArg::Ball => GeometryKind::Ball,
                GeometryArg::Interval => GeometryKind::Interval,
            };
        }
        if let Some(d) = self.dim {
            cfg.geometry.dim = d;
        }
        if let Some(r) = self.right {
            cfg.geometry.right = r;
        }
        if let Some(r) = self.r0 {
            cfg.r0 = r;
        }
        if let Some(n) = self.sharp_nodes {
            cfg.grid.sharp_nodes = n;
        }
    }
}

fn eta_choice(e: EtaArg) -> EtaChoice {
    match e {
        EtaArg::Bump => EtaChoice::Bump,
        EtaArg::Smoothstep => EtaChoice::Smoothstep,
    }
}

fn settings(cfg: &RunConfig, sigma0: SigmaProfile, eps: f64, order: Order, sharp_dt: f64) -> anyhow::Result<ConstructSettings> {
    Ok(ConstructSettings {
        domain: cfg.domain()?,
        r0: cfg.r0,
        sigma0,
        eps,
        order,
        delta: cfg.delta,
        eta: cfg.eta.into(),
        sharp_dt,
    })
}

fn write(dir: &std::path::Path, name: &str, table: &Table, files: &mut Vec<PathBuf>) -> anyhow::Result<()> {
    let p = dir.join(name);
    table.write(&p)?;
    println!("wrote {}", p.display());
    files.push(p);
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(o) = &cli.out {
        cfg.out_dir = o.clone();
    }
    if cli.workers.is_some() {
        cfg.workers = cli.workers;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(w) = cfg.workers {
        // a global pool for the single-module studies; ignore a second init
        let _ = rayon::ThreadPoolBuilder::new().num_threads(w.max(1)).build_global();
    }
    let dir = cfg.out_dir.clone();
    let mut files = Vec::new();
    let name = match &cli.command {
        Command::Profile { z_max, n, eta } => {
            let variant: EtaVariant = eta_choice(*eta).into();
            write(&dir, "profile.csv", &studies::profile_table(*z_max, *n, variant)?, &mut files)?;
            "profile"
        }
        Command::Spectral { ladder, n, count } => {
            write(&dir, "spectral.csv", &studies::spectral_table(ladder, *n, *count)?, &mut files)?;
            "spectral"
        }
        Command::Sharp { geometry, dt, t_end, gamma } => {
            geometry.apply(&mut cfg);
            let t_end = t_end.unwrap_or(cfg.t_end);
            let table = studies::sharp_table(cfg.domain()?, cfg.r0, *dt, t_end, geometry.sigma0, *gamma)?;
            write(&dir, "sharp.csv", &table, &mut files)?;
            "sharp"
        }
        Command::Construct { geometry, eps, order, delta, t, sharp_dt, n } => {
            geometry.apply(&mut cfg);
            if let Some(k) = order {
                cfg.order = *k;
            }
            cfg.delta = delta.or(cfg.delta);
            let s = settings(&cfg, geometry.sigma0, *eps, cfg.order()?, *sharp_dt)?;
            let (res, fields) = studies::construct_tables(&s, *t, *n)?;
            write(&dir, "residuals.csv", &res, &mut files)?;
            write(&dir, "fields.csv", &fields, &mut files)?;
            "construct"
        }
        Command::Diffuse { geometry, eps, n, dt, t_end, every, uniform, oracle } => {
            geometry.apply(&mut cfg);
            let t_end = t_end.unwrap_or(cfg.t_end);
            let s = settings(&cfg, geometry.sigma0, *eps, cfg.order()?, cfg.sharp_dt())?;
            let initial = match uniform.as_deref() {
                Some([u, sigma]) => InitialData::Uniform { u: *u, sigma: *sigma },
                Some(_) => anyhow::bail!("--uniform takes two values u,σ"),
                None => InitialData::Constructed,
            };
            let (obs, fields) = studies::diffuse_tables(&s, *n, *dt, t_end, *every, initial)?;
            write(&dir, "observables.csv", &obs, &mut files)?;
            write(&dir, "fields.csv", &fields, &mut files)?;
            if let Some(pairs) = oracle {
                let table = studies::uniform_oracle_table(*eps, *dt, t_end, *pairs, cfg.seed)?;
                write(&dir, "oracle.csv", &table, &mut files)?;
            }
            "diffuse"
        }
        Command::Converge { geometry, ladder, order, delta, t_end, snapshots, eta } => {
            geometry.apply(&mut cfg);
            if let Some(l) = ladder {
                cfg.ladder = l.clone();
            }
            if let Some(k) = order {
                cfg.order = *k;
            }
            cfg.delta = delta.or(cfg.delta);
            if let Some(t) = t_end {
                cfg.t_end = *t;
            }
            if let Some(m) = snapshots {
                cfg.time.snapshots = *m;
            }
            if let Some(e) = eta {
                cfg.eta = eta_choice(*e);
            }
            let report = converge(&cfg)?;
            for o in Observable::ALL {
                let series: Vec<String> = report.series(o).iter().map(|(e, v)| format!("{e}:{v:.3e}")).collect();
                let rate = report.fit(o).map_or("n/a".to_string(), |f| format!("{:.3}", f.rate));
                println!("{:<18} rate {rate:>6}  {}", o.name(), series.join("  "));
            }
            println!("max mass drift {:.3e}", report.max_mass_drift());
            for p in emit(&report, &cfg)? {
                println!("wrote {}", p.display());
            }
            return Ok(());
        }
    };
    let m = write_manifest(&dir, name, &cfg, &files).context("manifest")?;
    println!("wrote {}", m.display());
    Ok(())
}

fn error_kind(e: &anyhow::Error) -> &'static str {
    use sharplim_core::Error as E;
    match e.chain().find_map(|c| c.downcast_ref::<E>()) {
        Some(E::InvalidArgument(_)) | Some(E::InvalidInput(_)) => "invalid-argument",
        Some(E::Numerical { .. }) | Some(E::Singular(_)) => "numerical",
        Some(E::Geometry(_)) => "geometry",
        Some(E::Consistency { .. }) => "consistency",
        Some(E::Halted { .. }) => "halted",
        Some(E::DegenerateFit(_)) => "degenerate-fit",
        None if e.chain().any(|c| c.is::<std::io::Error>()) => "io",
        None => "error",
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let line = serde_json::json!({ "status": "error", "kind": error_kind(&e), "message": format!("{e:#}") });
            eprintln!("{line}");
            ExitCode::FAILURE
        }
    }
}

