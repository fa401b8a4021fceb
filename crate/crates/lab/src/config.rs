//! Run configuration: a TOML file whose every key can be overridden on the
//! command line.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};
use sharplim_core::asymptotic::{default_delta, interface_clearance, ConstructionConfig, Order};
use sharplim_core::profile::EtaVariant;
use sharplim_core::sharp::RadialDomain;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeometryKind {
    Ball,
    Interval,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EtaChoice {
    Bump,
    Smoothstep,
}

impl From<EtaChoice> for EtaVariant {
    fn from(e: EtaChoice) -> Self {
        match e {
            EtaChoice::Bump => EtaVariant::Bump,
            EtaChoice::Smoothstep => EtaVariant::Smoothstep,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Geometry {
    pub kind: GeometryKind,
    /// Space dimension of a ball.
    pub dim: usize,
    /// Left end of an interval (a ball always starts at the centre).
    pub left: f64,
    /// Outer radius or right end.
    pub right: f64,
}

impl Default for Geometry {
    fn default() -> Self {
        Self { kind: GeometryKind::Ball, dim: 2, left: 0.0, right: 1.0 }
    }
}

/// Time stepping: the sharp solver takes `sharp_substeps` steps per
/// snapshot interval, the diffuse solver uses `dt ≈ diffuse_dt_factor·ε³`
/// rounded so every snapshot lands on a step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimePolicy {
    pub snapshots: usize,
    pub sharp_substeps: usize,
    pub diffuse_dt_factor: f64,
}

impl Default for TimePolicy {
    fn default() -> Self {
        Self { snapshots: 20, sharp_substeps: 40, diffuse_dt_factor: 0.05 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridPolicy {
    pub sharp_nodes: usize,
    /// Diffuse grid cells per ε (`h = ε / cells_per_eps`).
    pub cells_per_eps: f64,
}

impl Default for GridPolicy {
    fn default() -> Self {
        Self { sharp_nodes: 801, cells_per_eps: 8.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub geometry: Geometry,
    pub ladder: Vec<f64>,
    /// Construction order `k ∈ {0, 1}`.
    pub order: u32,
    /// Gluing half-width; unset picks the construction default.
    pub delta: Option<f64>,
    pub t_end: f64,
    pub r0: f64,
    /// Constant initial nutrient.
    pub sigma0: f64,
    pub time: TimePolicy,
    pub grid: GridPolicy,
    pub eta: EtaChoice,
    pub out_dir: PathBuf,
    pub workers: Option<usize>,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            geometry: Geometry::default(),
            ladder: vec![0.1, 0.05, 0.025],
            order: 1,
            delta: None,
            t_end: 0.05,
            r0: 0.5,
            sigma0: 0.0,
            time: TimePolicy::default(),
            grid: GridPolicy::default(),
            eta: EtaChoice::Bump,
            out_dir: PathBuf::from("out"),
            workers: None,
            seed: 0,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration is always serialisable")
    }

    pub fn domain(&self) -> anyhow::Result<RadialDomain> {
        let g = &self.geometry;
        Ok(match g.kind {
            GeometryKind::Ball => RadialDomain::ball(g.dim, g.right, self.grid.sharp_nodes)?,
            GeometryKind::Interval => RadialDomain::interval(g.left, g.right, self.grid.sharp_nodes)?,
        })
    }

    pub fn order(&self) -> anyhow::Result<Order> {
        match self.order {
            0 => Ok(Order::Zero),
            1 => Ok(Order::One),
            k => bail!("construction order {k} is not implemented (k ∈ {{0, 1}})"),
        }
    }

    /// The gluing width actually used at `t = 0`.
    pub fn effective_delta(&self) -> anyhow::Result<f64> {
        let d = self.domain()?;
        Ok(self.delta.unwrap_or_else(|| default_delta(&d, self.r0)))
    }

    pub fn construction(&self, eps: f64) -> anyhow::Result<ConstructionConfig> {
        let mut c = ConstructionConfig::new(eps, self.order()?);
        c.delta = self.delta;
        c.eta = self.eta.into();
        Ok(c)
    }

    /// Sharp step: `T / (snapshots · sharp_substeps)`.
    pub fn sharp_dt(&self) -> f64 {
        self.t_end / (self.time.snapshots * self.time.sharp_substeps) as f64
    }

    /// Diffuse step count for `ε`, a multiple of the snapshot count.
    pub fn diffuse_steps(&self, eps: f64) -> usize {
        let m = self.time.snapshots;
        let raw = (self.t_end / (self.time.diffuse_dt_factor * eps * eps * eps)).ceil() as usize;
        raw.div_ceil(m).max(1) * m
    }

    pub fn diffuse_nodes(&self, eps: f64) -> anyhow::Result<usize> {
        let d = self.domain()?;
        Ok(((d.r_out - d.r_in) * self.grid.cells_per_eps / eps).ceil() as usize + 1)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if self.ladder.len() < 3 {
            bail!("the ε ladder needs at least 3 entries, got {}", self.ladder.len());
        }
        if self.ladder.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
            bail!("ε values must be positive and finite");
        }
        if self.ladder.windows(2).any(|w| w[1] >= w[0]) {
            bail!("the ε ladder must be strictly decreasing");
        }
        self.order()?;
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            bail!("T must be positive");
        }
        if self.time.snapshots < 2 || self.time.sharp_substeps == 0 {
            bail!("need at least 2 snapshots and 1 sharp sub-step");
        }
        if !(self.time.diffuse_dt_factor > 0.0) || !(self.grid.cells_per_eps >= 1.0) {
            bail!("time and grid policies must be positive");
        }
        let d = self.domain()?;
        d.check_interior(self.r0)?;
        let clearance = interface_clearance(&d, self.r0);
        let delta = self.effective_delta()?;
        if !(delta > 0.0 && delta < 0.5 * clearance) {
            bail!("δ = {delta} must lie in (0, ½·dist(Γ, ∂Ω)) = (0, {})", 0.5 * clearance);
        }
        if self.workers == Some(0) {
            bail!("worker count must be positive");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid_and_round_trip() {
        let c = RunConfig::default();
        c.validate().unwrap();
        let back: RunConfig = toml::from_str(&c.to_toml()).unwrap();
        assert_eq!(back, c);
        assert_eq!(c.diffuse_steps(0.1) % 20, 0);
        assert!((c.sharp_dt() - 0.05 / 800.0).abs() < 1e-18);
    }

    #[test]
    fn partial_files_fill_defaults() {
        let c: RunConfig = toml::from_str("ladder = [0.2, 0.1, 0.05]\n[geometry]\ndim = 3\n").unwrap();
        assert_eq!(c.geometry.dim, 3);
        assert_eq!(c.t_end, 0.05);
        assert!(toml::from_str::<RunConfig>("bogus = 1").is_err());
    }

    #[test]
    fn invalid_settings_are_rejected() {
        let mut c = RunConfig { ladder: vec![0.1, 0.05], ..RunConfig::default() };
        assert!(c.validate().is_err());
        c.ladder = vec![0.05, 0.1, 0.025];
        assert!(c.validate().is_err());
        c.ladder = vec![0.1, 0.05, 0.025];
        c.delta = Some(0.3);
        assert!(c.validate().is_err(), "δ must stay below half the clearance 0.5");
        c.delta = Some(0.2);
        c.order = 2;
        assert!(c.validate().is_err());
    }
}
