//! Vertical coverage of a rig at a given stand-off distance.

use serde::Serialize;

use super::DualRig;

/// Wearer height the knee/head targets refer to.
pub const REFERENCE_HEIGHT_M: f64 = 1.70;
pub const KNEE_LEVEL_M: f64 = 0.30;
pub const HEAD_LEVEL_M: f64 = 1.60;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoverageReport {
    pub distance: f64,
    pub lowest_hit_z: f64,
    pub highest_hit_z: f64,
    /// Knee and head targets scaled to the wearer's height.
    pub knee_target_z: f64,
    pub head_target_z: f64,
}

impl CoverageReport {
    pub fn covers_knee(&self) -> bool {
        self.lowest_hit_z <= self.knee_target_z
    }

    pub fn covers_head(&self) -> bool {
        self.highest_hit_z >= self.head_target_z
    }

    pub fn passes(&self) -> bool {
        self.covers_knee() && self.covers_head()
    }
}

fn edge_z(mount_z: f64, run: f64, elevation_deg: f64) -> f64 {
    if elevation_deg >= 90.0 {
        f64::INFINITY
    } else if elevation_deg <= -90.0 {
        f64::NEG_INFINITY
    } else {
        mount_z + run * elevation_deg.to_radians().tan()
    }
}

/// Intersects the outermost zone-edge rays of both sensors with the vertical
/// plane `x = distance` and reports the covered height range.
pub fn coverage_check(rig: &DualRig, user_height: f64, distance: f64) -> CoverageReport {
    let mut lowest = f64::INFINITY;
    let mut highest = f64::NEG_INFINITY;
    for pose in [&rig.upper, &rig.lower] {
        let (top, bottom) = pose.edge_elevations_deg();
        let run = distance - pose.mount_point.x;
        for e in [top, bottom] {
            let z = edge_z(pose.mount_point.z, run, e);
            lowest = lowest.min(z);
            highest = highest.max(z);
        }
    }
    let scale = user_height / REFERENCE_HEIGHT_M;
    CoverageReport {
        distance,
        lowest_hit_z: lowest,
        highest_hit_z: highest,
        knee_target_z: KNEE_LEVEL_M * scale,
        head_target_z: HEAD_LEVEL_M * scale,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_rig_reaches_knee_and_head() {
        let r = coverage_check(&DualRig::default(), 1.70, 0.5);
        assert!(r.lowest_hit_z <= 0.30, "{r:?}");
        assert!(r.highest_hit_z >= 1.60, "{r:?}");
        assert!(r.passes());
        // independent trigonometry: 1.40 ± 0.5·tan(edge)
        assert!((r.highest_hit_z - (1.40 + 0.5 * 22.5f64.to_radians().tan())).abs() < 1e-12);
        assert!((r.lowest_hit_z - (1.40 - 0.5 * 67.5f64.to_radians().tan())).abs() < 1e-12);
    }

    #[test]
    fn collapses_towards_mount_height() {
        let r = coverage_check(&DualRig::default(), 1.70, 1e-9);
        assert!((r.lowest_hit_z - 1.40).abs() < 1e-8);
        assert!((r.highest_hit_z - 1.40).abs() < 1e-8);
    }

    #[test]
    fn symmetric_rig_is_symmetric() {
        let mut rig = DualRig::default();
        rig.upper.pitch_deg = -15.0;
        rig.lower.pitch_deg = 15.0;
        let h = rig.upper.mount_point.z;
        let r = coverage_check(&rig, 1.70, 0.8);
        assert!(((r.highest_hit_z - h) - (h - r.lowest_hit_z)).abs() < 1e-12);
    }

    #[test]
    fn centered_span_misses_the_knee() {
        // a span centred 15° above the horizon cannot reach 0.30 m at 0.5 m
        let mut rig = DualRig::default();
        rig.upper.pitch_deg = -30.0;
        rig.lower.pitch_deg = 0.0;
        assert!(!coverage_check(&rig, 1.70, 0.5).covers_knee());
    }
}
