//! Run configuration files (TOML).
//!
//! ```toml
//! scene = "scenes/head_bar.toml"   # relative to this file
//! ticks = 40
//! seed = 7
//!
//! [rig]                            # optional, defaults to the chest rig
//! upper = { mount_point = { x = 0.0, y = 0.0, z = 1.4 }, pitch_deg = 7.5, fov_deg = 60.0, zones_per_side = 8, max_range = 4.0 }
//! lower = { mount_point = { x = 0.0, y = 0.0, z = 1.4 }, pitch_deg = 37.5, fov_deg = 60.0, zones_per_side = 8, max_range = 4.0 }
//!
//! [noise]                          # optional, absent means noiseless
//! sigma_mm = 10.0
//!
//! [detection]                      # optional
//! danger_threshold_mm = 1000.0
//!
//! [[waypoint]]                     # optional, absent means standing at the origin
//! tick = 0
//! position = [0.0, 0.0, 0.0]
//! heading_deg = 0.0
//! ```

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use hapticnav::pipeline::DetectionConfig;
use hapticnav::tof::{DualRig, NoiseModel};
use hapticnav::Vec3;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigDoc {
    scene: Option<PathBuf>,
    ticks: Option<u64>,
    seed: Option<u64>,
    rig: Option<DualRig>,
    noise: Option<NoiseModel>,
    #[serde(default)]
    detection: DetectionConfig,
    #[serde(default)]
    waypoint: Vec<Waypoint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Waypoint {
    pub tick: u64,
    pub position: [f64; 3],
    #[serde(default)]
    pub heading_deg: f64,
}

/// Wearer poses along a run, linearly interpolated between waypoints and
/// held constant outside them.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    waypoints: Vec<Waypoint>,
}

impl Trajectory {
    pub fn new(waypoints: Vec<Waypoint>) -> Result<Self> {
        if let Some(w) = waypoints.windows(2).find(|w| w[1].tick <= w[0].tick) {
            bail!(
                "waypoint ticks must increase strictly ({} then {})",
                w[0].tick,
                w[1].tick
            );
        }
        if waypoints
            .iter()
            .any(|w| !w.heading_deg.is_finite() || w.position.iter().any(|c| !c.is_finite()))
        {
            bail!("waypoint values must be finite");
        }
        Ok(Self { waypoints })
    }

    /// Position and heading at `tick`.
    pub fn pose_at(&self, tick: u64) -> (Vec3, f64) {
        let ws = &self.waypoints;
        let Some(first) = ws.first() else {
            return (Vec3::ZERO, 0.0);
        };
        if tick <= first.tick {
            return (first.position.into(), first.heading_deg);
        }
        for w in ws.windows(2) {
            let (a, b) = (w[0], w[1]);
            if tick <= b.tick {
                let f = (tick - a.tick) as f64 / (b.tick - a.tick) as f64;
                let pa = Vec3::from(a.position);
                let pb = Vec3::from(b.position);
                return (
                    pa + (pb - pa) * f,
                    a.heading_deg + (b.heading_deg - a.heading_deg) * f,
                );
            }
        }
        let last = ws[ws.len() - 1];
        (last.position.into(), last.heading_deg)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scene: Option<PathBuf>,
    pub ticks: u64,
    pub seed: u64,
    pub rig: DualRig,
    pub noise: NoiseModel,
    pub detection: DetectionConfig,
    pub trajectory: Trajectory,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            scene: None,
            ticks: 100,
            seed: 0,
            rig: DualRig::default_chest(),
            noise: NoiseModel::none(),
            detection: DetectionConfig::default(),
            trajectory: Trajectory::default(),
        }
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Parses a config document. Relative scene paths resolve against `base_dir`.
pub fn parse_config(text: &str, base_dir: &Path) -> Result<RunConfig> {
    let doc: ConfigDoc = toml::from_str(text).map_err(|e| {
        let line = e.span().map(|s| line_of(text, s.start)).unwrap_or(0);
        anyhow::anyhow!("line {line}: {}", e.message())
    })?;
    let defaults = RunConfig::default();
    let cfg = RunConfig {
        scene: doc.scene.map(|p| base_dir.join(p)),
        ticks: doc.ticks.unwrap_or(defaults.ticks),
        seed: doc.seed.unwrap_or(defaults.seed),
        rig: doc.rig.unwrap_or(defaults.rig),
        noise: doc.noise.unwrap_or(defaults.noise),
        detection: doc.detection,
        trajectory: Trajectory::new(doc.waypoint)?,
    };
    if cfg.ticks == 0 {
        bail!("ticks must be >= 1");
    }
    cfg.rig.validate()?;
    cfg.noise.validate()?;
    cfg.detection.validate()?;
    if let Some(p) = &cfg.scene {
        if !p.exists() {
            bail!("scene file {} does not exist", p.display());
        }
    }
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_config(&text, base).with_context(|| format!("config {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = parse_config("", Path::new(".")).unwrap();
        assert_eq!(c, RunConfig::default());
    }

    #[test]
    fn sections() {
        let text = "ticks = 5\nseed = 3\n[noise]\nsigma_mm = 4.0\n[detection]\nwindow_len = 3\n\
                    [[waypoint]]\ntick = 0\nposition = [0.0, 0.0, 0.0]\n\
                    [[waypoint]]\ntick = 10\nposition = [1.0, 0.0, 0.0]\nheading_deg = 90.0\n";
        let c = parse_config(text, Path::new(".")).unwrap();
        assert_eq!((c.ticks, c.seed), (5, 3));
        assert_eq!(c.noise.sigma_mm, 4.0);
        assert_eq!(c.noise.dropout_prob, NoiseModel::default().dropout_prob);
        assert_eq!(c.detection.window_len, 3);
        let (p, h) = c.trajectory.pose_at(5);
        assert!((p.x - 0.5).abs() < 1e-12 && (h - 45.0).abs() < 1e-12);
        assert_eq!(c.trajectory.pose_at(50).0.x, 1.0);
    }

    #[test]
    fn errors_carry_lines() {
        let err = parse_config("ticks = 5\nbogus = 1\n", Path::new(".")).unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        assert!(parse_config("ticks = 0\n", Path::new(".")).is_err());
        let back = "[[waypoint]]\ntick = 3\nposition = [0.0, 0.0, 0.0]\n[[waypoint]]\ntick = 3\nposition = [0.0, 0.0, 0.0]\n";
        assert!(parse_config(back, Path::new(".")).is_err());
        assert!(parse_config("scene = \"/no/such/file.toml\"\n", Path::new(".")).is_err());
    }
}
