//! CSV tables, log-log SVG plots and the run manifest.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;
use sharplim_core::analysis::RateFit;

use crate::config::RunConfig;
use crate::pipeline::{ConvergenceReport, Observable};

/// Scientific notation with 17 significant digits.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// A header plus rows of already formatted cells.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push_numbers(&mut self, values: &[f64]) {
        self.rows.push(values.iter().map(|&v| num(v)).collect());
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    }

    pub fn write(&self, path: &Path) -> anyhow::Result<()> {
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        }
        fs::write(path, self.to_csv()).with_context(|| format!("writing {}", path.display()))
    }
}

const ERROR_HEADER: [&str; 6] = ["observable", "epsilon", "error", "rate", "intercept", "fit_residual"];

/// One row per ε per observable; the fit columns repeat along a series and
/// are `nan` when no fit exists.
pub fn error_table(report: &ConvergenceReport) -> Table {
    let mut t = Table::new(&ERROR_HEADER);
    for o in Observable::ALL {
        let fit = report.fit(o);
        let (rate, c, res) = fit.map_or((f64::NAN, f64::NAN, f64::NAN), |f| (f.rate, f.intercept, f.residual));
        for (eps, e) in report.series(o) {
            t.rows.push(vec![o.name().to_string(), num(eps), num(e), num(rate), num(c), num(res)]);
        }
    }
    t
}

/// Per-ε run data: grid, steps, mass drift, region counts and the residual
/// norms at `T`.
pub fn run_table(report: &ConvergenceReport) -> Table {
    let mut t = Table::new(&[
        "epsilon",
        "nodes",
        "steps",
        "dt",
        "mass_drift",
        "phi_mean_removed",
        "nodes_outer_minus",
        "nodes_outer_plus",
        "nodes_layer",
        "omega1",
        "omega2",
        "omega3",
        "omega4",
    ]);
    for r in &report.runs {
        let w = &r.residuals.omega;
        t.push_numbers(&[
            r.errors.eps,
            r.nodes as f64,
            r.steps as f64,
            r.dt,
            r.errors.mass_drift,
            r.errors.phi_mean_removed,
            r.partition.outer_minus as f64,
            r.partition.outer_plus as f64,
            r.partition.layer as f64,
            w[0].all,
            w[1].all,
            w[2].all,
            w[3].all,
        ]);
    }
    t
}

/// Static log-log plot of `points` with the fitted line; `None` when there
/// is nothing positive to draw.
pub fn loglog_svg(title: &str, points: &[(f64, f64)], fit: Option<RateFit>) -> Option<String> {
    let pts: Vec<(f64, f64)> = points.iter().filter(|p| p.0 > 0.0 && p.1 > 0.0 && p.1.is_finite()).map(|p| (p.0.log10(), p.1.log10())).collect();
    if pts.is_empty() {
        return None;
    }
    let (w, h, m) = (480.0, 360.0, 56.0);
    let lo = |v: &dyn Fn(&(f64, f64)) -> f64| pts.iter().map(v).fold(f64::INFINITY, f64::min);
    let hi = |v: &dyn Fn(&(f64, f64)) -> f64| pts.iter().map(v).fold(f64::NEG_INFINITY, f64::max);
    let (x0, x1) = ((lo(&|p| p.0) - 0.1).floor_to(0.5), (hi(&|p| p.0) + 0.1).ceil_to(0.5));
    let (y0, y1) = ((lo(&|p| p.1) - 0.1).floor_to(0.5), (hi(&|p| p.1) + 0.1).ceil_to(0.5));
    let sx = |x: f64| m + (x - x0) / (x1 - x0) * (w - 2.0 * m);
    let sy = |y: f64| h - m - (y - y0) / (y1 - y0) * (h - 2.0 * m);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#, w / 2.0, escape(title));
    let _ = writeln!(
        s,
        r#"<rect x="{m}" y="{m}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        w - 2.0 * m,
        h - 2.0 * m
    );
    let mut tick = x0;
    while tick <= x1 + 1e-9 {
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="10" text-anchor="middle">1e{tick:.1}</text>"#, sx(tick), h - m + 14.0);
        tick += 0.5;
    }
    let mut tick = y0;
    while tick <= y1 + 1e-9 {
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="10" text-anchor="end">1e{tick:.1}</text>"#, m - 4.0, sy(tick) + 3.0);
        tick += 0.5;
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle">epsilon</text>"#, w / 2.0, h - 12.0);
    if let Some(f) = fit {
        let ln10 = std::f64::consts::LN_10;
        let line = |x: f64| f.rate * x + f.intercept / ln10;
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="steelblue" stroke-dasharray="4 3"/>"#,
            sx(x0),
            sy(line(x0)),
            sx(x1),
            sy(line(x1))
        );
        let _ = writeln!(s, r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11" fill="steelblue">rate {:.3}</text>"#, m + 8.0, m + 16.0, f.rate);
    }
    for p in &pts {
        let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="firebrick"/>"#, sx(p.0), sy(p.1));
    }
    s.push_str("</svg>\n");
    Some(s)
}

trait Snap {
    fn floor_to(self, q: f64) -> f64;
    fn ceil_to(self, q: f64) -> f64;
}

impl Snap for f64 {
    fn floor_to(self, q: f64) -> f64 {
        (self / q).floor() * q
    }
    fn ceil_to(self, q: f64) -> f64 {
        (self / q).ceil() * q
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    config: &'a RunConfig,
    files: Vec<String>,
}

/// Writes `manifest.json` describing the configuration and produced files.
pub fn write_manifest(dir: &Path, command: &str, config: &RunConfig, files: &[PathBuf]) -> anyhow::Result<PathBuf> {
    let names = files.iter().map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()).collect();
    let m = Manifest { tool: env!("CARGO_PKG_NAME"), version: env!("CARGO_PKG_VERSION"), command, config, files: names };
    let path = dir.join("manifest.json");
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    fs::write(&path, serde_json::to_string_pretty(&m)? + "\n").with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

/// Error CSV, run CSV, one SVG per observable with data and the manifest.
pub fn emit(report: &ConvergenceReport, config: &RunConfig) -> anyhow::Result<Vec<PathBuf>> {
    let dir = &config.out_dir;
    let mut files = Vec::new();
    let errors = dir.join("convergence.csv");
    error_table(report).write(&errors)?;
    files.push(errors);
    let runs = dir.join("runs.csv");
    run_table(report).write(&runs)?;
    files.push(runs);
    for o in Observable::ALL {
        if let Some(svg) = loglog_svg(o.name(), &report.series(o), report.fit(o)) {
            let p = dir.join(format!("{}.svg", o.name()));
            fs::write(&p, svg).with_context(|| format!("writing {}", p.display()))?;
            files.push(p);
        }
    }
    let manifest = write_manifest(dir, "converge", config, &files)?;
    files.push(manifest);
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compare::{ErrorEntry, Partition};
    use crate::pipeline::EpsRun;
    use sharplim_core::asymptotic::ResidualNorms;

    fn fake(eps: &[f64]) -> ConvergenceReport {
        let runs = eps
            .iter()
            .map(|&e| EpsRun {
                errors: ErrorEntry {
                    eps: e,
                    u_outer_minus: 0.3 * e,
                    u_outer_plus: 0.2 * e,
                    u_layer: e,
                    sigma: e,
                    mu: e,
                    layer_profile: e,
                    phi_negative_norm: e * e,
                    interface: e * e,
                    snapshots: 21,
                    ..ErrorEntry::default()
                },
                partition: Partition::default(),
                nodes: 10,
                steps: 20,
                dt: 0.1,
                residuals: ResidualNorms::default(),
                initial_mismatch: 0.0,
            })
            .collect();
        ConvergenceReport { runs }
    }

    #[test]
    fn numbers_carry_seventeen_digits() {
        assert_eq!(num(0.1), "1.0000000000000001e-1");
        assert_eq!(num(-2.5), "-2.5000000000000000e0");
    }

    #[test]
    fn empty_report_gives_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = RunConfig { out_dir: dir.path().to_path_buf(), ..RunConfig::default() };
        let files = emit(&ConvergenceReport::default(), &cfg).unwrap();
        let csv = fs::read_to_string(dir.path().join("convergence.csv")).unwrap();
        assert_eq!(csv, "observable,epsilon,error,rate,intercept,fit_residual\n");
        assert!(files.iter().all(|f| f.extension().is_none_or(|e| e != "svg")));
    }

    #[test]
    fn three_point_ladder_cardinality_and_determinism() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = RunConfig { out_dir: dir.path().to_path_buf(), ..RunConfig::default() };
        let rep = fake(&[0.1, 0.05, 0.025]);
        let files = emit(&rep, &cfg).unwrap();
        let csv = fs::read_to_string(dir.path().join("convergence.csv")).unwrap();
        assert_eq!(csv.lines().count(), 1 + 3 * Observable::ALL.len());
        for o in Observable::ALL {
            assert_eq!(csv.lines().filter(|l| l.starts_with(&format!("{},", o.name()))).count(), 3);
        }
        let svgs = files.iter().filter(|f| f.extension().is_some_and(|e| e == "svg")).count();
        assert_eq!(svgs, Observable::ALL.len());
        let line = csv.lines().find(|l| l.starts_with("u_outer,")).unwrap();
        let rate: f64 = line.split(',').nth(3).unwrap().parse().unwrap();
        assert!((rate - 1.0).abs() < 1e-12);
        emit(&rep, &cfg).unwrap();
        assert_eq!(fs::read_to_string(dir.path().join("convergence.csv")).unwrap(), csv);
        let svg = fs::read_to_string(dir.path().join("u_outer.svg")).unwrap();
        assert!(svg.starts_with("<svg") && !svg.contains("href"));
        let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
        assert_eq!(manifest["config"]["ladder"][2], 0.025);
    }

    #[test]
    fn unwritable_directory_reports_the_path() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        fs::write(&blocker, "x").unwrap();
        let cfg = RunConfig { out_dir: blocker.join("sub"), ..RunConfig::default() };
        let err = emit(&fake(&[0.1, 0.05, 0.025]), &cfg).unwrap_err();
        assert!(format!("{err:#}").contains("sub"));
    }
}
