//! Multizone time-of-flight sensor model.
//!
//! A sensor sees a square field of view split into `N × N` zones of equal
//! angular size. Each zone reports the distance along its boresight. Two such
//! sensors, tilted apart, form a [`DualRig`] whose frames are fused into one
//! taller [`CombinedGrid`].

mod coverage;
mod fuse;
mod grid;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::geometry::{cast_hit, HitTarget, Ray, Scene, Vec3};
use crate::rng;

pub use coverage::{
    coverage_check, CoverageReport, HEAD_LEVEL_M, KNEE_LEVEL_M, REFERENCE_HEIGHT_M,
};
pub use fuse::{fuse, fuse_targets, CombinedGrid};
pub use grid::Grid;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TofError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("zone ({row}, {col}) outside a {n}x{n} sensor")]
    IndexOutOfRange { row: usize, col: usize, n: usize },
    #[error("frames from different ticks: upper {upper}, lower {lower}")]
    TickMismatch { upper: u64, lower: u64 },
    #[error("geometry mismatch: {0}")]
    GeometryMismatch(String),
    #[error("invalid sensor pose: {0}")]
    InvalidPose(String),
}

/// Physical side length covered by one zone at distance `d`:
/// `2 d tan(fov / (2 n))`, with `fov` in degrees.
pub fn zone_linear_size(d: f64, fov_deg: f64, n: usize) -> Result<f64, TofError> {
    if !(d >= 0.0 && d.is_finite()) {
        return Err(TofError::Domain(format!(
            "distance {d} must be finite and >= 0"
        )));
    }
    if n == 0 {
        return Err(TofError::Domain("zone count must be >= 1".into()));
    }
    if !(fov_deg > 0.0 && fov_deg < 180.0) {
        return Err(TofError::Domain(format!("fov {fov_deg} outside (0, 180)")));
    }
    let zone_deg = fov_deg / n as f64;
    if zone_deg >= 180.0 {
        return Err(TofError::Domain(format!("zone angle {zone_deg} >= 180")));
    }
    Ok(2.0 * d * (0.5 * zone_deg * std::f64::consts::PI / 180.0).tan())
}

/// Smallest obstacle width a zone still registers, taking the fill fraction
/// as a share of the zone's linear size.
pub fn min_detectable_size(
    d: f64,
    fov_deg: f64,
    n: usize,
    fill_fraction: f64,
) -> Result<f64, TofError> {
    if !(fill_fraction > 0.0 && fill_fraction <= 1.0) {
        return Err(TofError::Domain(format!(
            "fill fraction {fill_fraction} outside (0, 1]"
        )));
    }
    Ok(fill_fraction * zone_linear_size(d, fov_deg, n)?)
}

/// Default fill fraction for [`min_detectable_size`].
pub const DEFAULT_FILL_FRACTION: f64 = 0.30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SensorId {
    Upper,
    Lower,
}

impl SensorId {
    fn key(self) -> u64 {
        match self {
            SensorId::Upper => 0,
            SensorId::Lower => 1,
        }
    }
}

/// Mounting and optics of one sensor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorPose {
    pub mount_point: Vec3,
    /// Rotation about the left-pointing axis; positive pitches the boresight down.
    pub pitch_deg: f64,
    /// Rotation about +z, counter-clockwise seen from above; 0 faces +x.
    #[serde(default)]
    pub heading_deg: f64,
    /// Per-axis angle of the square field of view.
    pub fov_deg: f64,
    pub zones_per_side: usize,
    /// Meters.
    pub max_range: f64,
}

impl SensorPose {
    pub fn validate(&self) -> Result<(), TofError> {
        if !(self.fov_deg > 0.0 && self.fov_deg < 180.0) {
            return Err(TofError::InvalidPose(format!(
                "fov {} outside (0, 180)",
                self.fov_deg
            )));
        }
        if self.zones_per_side == 0 {
            return Err(TofError::InvalidPose("zones_per_side must be >= 1".into()));
        }
        if !(self.max_range > 0.0 && self.max_range.is_finite()) {
            return Err(TofError::InvalidPose(format!(
                "max_range {} must be > 0",
                self.max_range
            )));
        }
        if !self.mount_point.is_finite()
            || !self.pitch_deg.is_finite()
            || !self.heading_deg.is_finite()
        {
            return Err(TofError::InvalidPose("non-finite mount or angles".into()));
        }
        Ok(())
    }

    pub fn zone_step_deg(&self) -> f64 {
        self.fov_deg / self.zones_per_side as f64
    }

    pub fn max_range_mm(&self) -> f64 {
        self.max_range * 1000.0
    }

    /// Angular offset of zone index `i` from the boresight, positive towards
    /// row/column 0 (up / wearer's left).
    fn offset_deg(&self, i: usize) -> f64 {
        ((self.zones_per_side as f64 - 1.0) / 2.0 - i as f64) * self.zone_step_deg()
    }

    /// World elevation of the boresight of `row` (azimuth offset zero).
    pub fn row_elevation_deg(&self, row: usize) -> f64 {
        self.offset_deg(row) - self.pitch_deg
    }

    /// Elevations of the upper and lower field-of-view edges.
    pub fn edge_elevations_deg(&self) -> (f64, f64) {
        (
            self.fov_deg / 2.0 - self.pitch_deg,
            -self.fov_deg / 2.0 - self.pitch_deg,
        )
    }

    /// The same sensor carried by a wearer standing at `position` and facing
    /// `heading_deg`.
    pub fn placed(&self, position: Vec3, heading_deg: f64) -> SensorPose {
        let mut out = *self;
        out.mount_point = position + rotate_z(self.mount_point, heading_deg.to_radians());
        out.heading_deg = self.heading_deg + heading_deg;
        out
    }

    /// Unit direction from sensor-frame angles (elevation, azimuth) in degrees.
    pub fn direction(&self, elevation_deg: f64, azimuth_deg: f64) -> Vec3 {
        let (e, a) = (elevation_deg.to_radians(), azimuth_deg.to_radians());
        let local = Vec3::new(e.cos() * a.cos(), e.cos() * a.sin(), e.sin());
        let p = self.pitch_deg.to_radians();
        let pitched = Vec3::new(
            local.x * p.cos() + local.z * p.sin(),
            local.y,
            -local.x * p.sin() + local.z * p.cos(),
        );
        rotate_z(pitched, self.heading_deg.to_radians())
    }
}

fn rotate_z(v: Vec3, angle: f64) -> Vec3 {
    let (s, c) = angle.sin_cos();
    Vec3::new(v.x * c - v.y * s, v.x * s + v.y * c, v.z)
}

/// Boresight ray of zone `(row, col)`. Row 0 is the top row, column 0 the
/// wearer's leftmost.
pub fn zone_ray(pose: &SensorPose, row: usize, col: usize) -> Result<Ray, TofError> {
    let n = pose.zones_per_side;
    if row >= n || col >= n {
        return Err(TofError::IndexOutOfRange { row, col, n });
    }
    let dir = pose.direction(pose.offset_deg(row), pose.offset_deg(col));
    Ray::towards(pose.mount_point, dir).map_err(|e| TofError::InvalidPose(e.to_string()))
}

/// Two sensors stacked vertically with a fixed tilt between them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DualRig {
    pub upper: SensorPose,
    pub lower: SensorPose,
}

impl DualRig {
    /// Chest-mounted default: both sensors at 1.40 m, 60° FoV, 8×8 zones,
    /// 4 m range, pitched 7.5° and 37.5° down. The combined view runs from
    /// 22.5° above to 67.5° below the horizon.
    pub fn default_chest() -> Self {
        let base = SensorPose {
            mount_point: Vec3::new(0.0, 0.0, 1.40),
            pitch_deg: 7.5,
            heading_deg: 0.0,
            fov_deg: 60.0,
            zones_per_side: 8,
            max_range: 4.0,
        };
        Self {
            upper: base,
            lower: SensorPose {
                pitch_deg: 37.5,
                ..base
            },
        }
    }

    pub fn tilt_between_deg(&self) -> f64 {
        (self.upper.pitch_deg - self.lower.pitch_deg).abs()
    }

    /// Vertical angle covered by the union of both fields of view.
    pub fn combined_span_deg(&self) -> f64 {
        let (ut, ub) = self.upper.edge_elevations_deg();
        let (lt, lb) = self.lower.edge_elevations_deg();
        ut.max(lt) - ub.min(lb)
    }

    pub fn validate(&self) -> Result<(), TofError> {
        self.upper.validate()?;
        self.lower.validate()?;
        if self.upper.pitch_deg > self.lower.pitch_deg {
            return Err(TofError::InvalidPose(
                "upper sensor must not point below the lower sensor".into(),
            ));
        }
        Ok(())
    }

    pub fn placed(&self, position: Vec3, heading_deg: f64) -> DualRig {
        DualRig {
            upper: self.upper.placed(position, heading_deg),
            lower: self.lower.placed(position, heading_deg),
        }
    }

    pub fn pose(&self, sensor: SensorId) -> &SensorPose {
        match sensor {
            SensorId::Upper => &self.upper,
            SensorId::Lower => &self.lower,
        }
    }
}

impl Default for DualRig {
    fn default() -> Self {
        Self::default_chest()
    }
}

/// Per-zone measurement noise. All randomness is keyed on
/// `(seed, tick, sensor, row, col)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseModel {
    pub sigma_mm: f64,
    pub dropout_prob: f64,
    pub spike_prob: f64,
    pub spike_value_mm: f64,
    pub seed: u64,
}

impl NoiseModel {
    pub fn none() -> Self {
        Self {
            sigma_mm: 0.0,
            dropout_prob: 0.0,
            spike_prob: 0.0,
            spike_value_mm: 100.0,
            seed: 0,
        }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    pub fn validate(&self) -> Result<(), TofError> {
        let prob = |p: f64| (0.0..=1.0).contains(&p);
        if !(self.sigma_mm >= 0.0 && self.sigma_mm.is_finite()) {
            return Err(TofError::Domain(format!(
                "sigma_mm {} must be >= 0",
                self.sigma_mm
            )));
        }
        if !prob(self.dropout_prob) || !prob(self.spike_prob) {
            return Err(TofError::Domain("probabilities must lie in [0, 1]".into()));
        }
        if !(self.spike_value_mm > 0.0) {
            return Err(TofError::Domain("spike_value_mm must be > 0".into()));
        }
        Ok(())
    }
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self {
            sigma_mm: 10.0,
            dropout_prob: 0.01,
            spike_prob: 0.02,
            spike_value_mm: 100.0,
            seed: 0,
        }
    }
}

/// One zone reading in millimeters. Invalid zones carry the max-range sentinel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZoneReading {
    pub mm: f64,
    pub valid: bool,
}

impl ZoneReading {
    pub fn valid(mm: f64) -> Self {
        Self { mm, valid: true }
    }

    pub fn invalid(sentinel_mm: f64) -> Self {
        Self {
            mm: sentinel_mm,
            valid: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepthFrame {
    pub sensor: SensorId,
    pub tick: u64,
    pub zones: Grid<ZoneReading>,
    pub sentinel_mm: f64,
}

/// Simulates one sensor frame.
///
/// Noise is applied in order: Gaussian jitter (only on zones with a target),
/// spike substitution, then dropout.
pub fn sense(
    scene: &Scene,
    pose: &SensorPose,
    sensor: SensorId,
    tick: u64,
    noise: &NoiseModel,
) -> Result<DepthFrame, TofError> {
    sense_with_targets(scene, pose, sensor, tick, noise).map(|(frame, _)| frame)
}

/// [`sense`] that also reports what each zone's ray hit.
pub fn sense_with_targets(
    scene: &Scene,
    pose: &SensorPose,
    sensor: SensorId,
    tick: u64,
    noise: &NoiseModel,
) -> Result<(DepthFrame, Grid<HitTarget>), TofError> {
    pose.validate()?;
    noise.validate()?;
    let n = pose.zones_per_side;
    let sentinel = pose.max_range_mm();
    let jitter =
        (noise.sigma_mm > 0.0).then(|| Normal::new(0.0, noise.sigma_mm).expect("sigma validated"));
    let mut zones = Vec::with_capacity(n * n);
    let mut targets = Vec::with_capacity(n * n);
    for row in 0..n {
        for col in 0..n {
            let ray = zone_ray(pose, row, col)?;
            let hit = cast_hit(scene, &ray, pose.max_range);
            let mut mm = hit.distance * 1000.0;
            let mut rng = rng::stream(noise.seed, &[tick, sensor.key(), row as u64, col as u64]);
            if let Some(normal) = &jitter {
                let dv: f64 = normal.sample(&mut rng);
                if hit.target != HitTarget::Nothing {
                    mm = (mm + dv).clamp(1.0, sentinel);
                }
            }
            if noise.spike_prob > 0.0 && rng.random_bool(noise.spike_prob) {
                mm = noise.spike_value_mm.min(sentinel);
            }
            let reading = if noise.dropout_prob > 0.0 && rng.random_bool(noise.dropout_prob) {
                ZoneReading::invalid(sentinel)
            } else {
                ZoneReading::valid(mm)
            };
            zones.push(reading);
            targets.push(hit.target);
        }
    }
    Ok((
        DepthFrame {
            sensor,
            tick,
            zones: Grid::from_vec(n, n, zones),
            sentinel_mm: sentinel,
        },
        Grid::from_vec(n, n, targets),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Obstacle;

    fn level_pose() -> SensorPose {
        SensorPose {
            mount_point: Vec3::ZERO,
            pitch_deg: 0.0,
            heading_deg: 0.0,
            fov_deg: 60.0,
            zones_per_side: 8,
            max_range: 4.0,
        }
    }

    fn elevation_deg(v: Vec3) -> f64 {
        v.z.asin().to_degrees()
    }

    #[test]
    fn zone_size_anchor_and_linearity() {
        // 2·tan(3.75°) evaluated independently
        let expected = 2.0 * (3.75f64.to_radians()).tan();
        let s = zone_linear_size(1.0, 60.0, 8).unwrap();
        assert!((s - 0.13111).abs() < 1e-4);
        assert!((s - expected).abs() < 1e-15);
        assert_eq!(zone_linear_size(0.0, 60.0, 8).unwrap(), 0.0);
        assert_eq!(zone_linear_size(2.0, 60.0, 8).unwrap(), 2.0 * s);
    }

    #[test]
    fn zone_size_domain_errors() {
        assert!(zone_linear_size(1.0, 60.0, 0).is_err());
        assert!(zone_linear_size(1.0, 180.0, 1).is_err());
        assert!(zone_linear_size(-1.0, 60.0, 8).is_err());
        assert!(min_detectable_size(1.0, 60.0, 8, 0.0).is_err());
        assert!(min_detectable_size(1.0, 60.0, 8, 1.5).is_err());
    }

    #[test]
    fn detectable_size() {
        let d1 = min_detectable_size(1.0, 60.0, 8, DEFAULT_FILL_FRACTION).unwrap();
        assert!((d1 - 0.04).abs() < 0.002);
        let half = min_detectable_size(0.5, 60.0, 8, 0.30).unwrap();
        assert!((half - 0.3 * (3.75f64.to_radians()).tan()).abs() < 1e-12);
        assert!((half - 0.01967).abs() < 1e-4);
        assert_eq!(
            min_detectable_size(1.0, 60.0, 8, 1.0).unwrap(),
            zone_linear_size(1.0, 60.0, 8).unwrap()
        );
    }

    #[test]
    fn zone_rays_are_symmetric() {
        let pose = level_pose();
        let a = zone_ray(&pose, 3, 3).unwrap().direction();
        let b = zone_ray(&pose, 4, 4).unwrap().direction();
        assert!((elevation_deg(a) - 3.75).abs() < 1e-9);
        assert!((elevation_deg(b) + 3.75).abs() < 1e-9);
        assert!((a.y + b.y).abs() < 1e-12 && (a.x - b.x).abs() < 1e-12);
        let top = zone_ray(&pose, 0, 3).unwrap().direction();
        assert!((elevation_deg(top) - 26.25).abs() < 1e-9);
        assert!((pose.row_elevation_deg(0) - 26.25).abs() < 1e-12);
        assert!(zone_ray(&pose, 8, 0).is_err());
    }

    #[test]
    fn pitch_composes_with_elevation() {
        let pose = SensorPose {
            pitch_deg: 30.0,
            ..level_pose()
        };
        let mut mean = 0.0;
        for (r, c) in [(3, 3), (3, 4), (4, 3), (4, 4)] {
            mean += elevation_deg(zone_ray(&pose, r, c).unwrap().direction()) / 4.0;
        }
        assert!((mean + 30.0).abs() <= 3.75);
        // boresight-plane elevation is exact
        let d = pose.direction(3.75, 0.0);
        assert!((elevation_deg(d) + 26.25).abs() < 1e-9);
    }

    #[test]
    fn placement_rotates_about_wearer() {
        let pose = SensorPose {
            mount_point: Vec3::new(0.1, 0.0, 1.4),
            ..level_pose()
        };
        let placed = pose.placed(Vec3::new(1.0, 2.0, 0.0), 90.0);
        assert!((placed.mount_point.x - 1.0).abs() < 1e-12);
        assert!((placed.mount_point.y - 2.1).abs() < 1e-12);
        let d = placed.direction(0.0, 0.0);
        assert!(d.x.abs() < 1e-12 && (d.y - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empty_scene_is_all_sentinel() {
        let f = sense(
            &Scene::empty(),
            &level_pose(),
            SensorId::Upper,
            0,
            &NoiseModel::none(),
        )
        .unwrap();
        assert!(f.zones.iter().all(|z| z.valid && z.mm == 4000.0));
        assert_eq!((f.zones.rows(), f.zones.cols()), (8, 8));
    }

    fn wall_scene(x: f64) -> Scene {
        let wall = Obstacle::new(
            "wall",
            Vec3::new(x, -10.0, -10.0),
            Vec3::new(x + 0.1, 10.0, 10.0),
        )
        .unwrap();
        Scene::new(vec![wall], None).unwrap()
    }

    #[test]
    fn perpendicular_wall_slant_ranges() {
        let pose = level_pose();
        let f = sense(
            &wall_scene(1.0),
            &pose,
            SensorId::Upper,
            0,
            &NoiseModel::none(),
        )
        .unwrap();
        // closed-form slant range: d / (cos(elevation) cos(azimuth))
        let step = 7.5f64;
        let corner_cos = (3.5 * step).to_radians().cos().powi(2);
        for row in 0..8 {
            for col in 0..8 {
                let e = (3.5 - row as f64) * step;
                let a = (3.5 - col as f64) * step;
                let oracle = 1000.0 / (e.to_radians().cos() * a.to_radians().cos());
                let got = f.zones.get(row, col).mm;
                assert!(
                    (got - oracle).abs() < 1.0,
                    "zone ({row},{col}) {got} vs {oracle}"
                );
                assert!(got >= 1000.0 - 1e-9 && got <= 1000.0 / corner_cos + 1e-9);
            }
        }
        let center = f.zones.get(3, 3).mm;
        assert!((center - 1000.0).abs() < 5.0);
        assert!((f.zones.get(0, 0).mm - 1000.0 / corner_cos).abs() < 1e-6);
    }

    #[test]
    fn noisy_sense_is_deterministic_and_keyed() {
        let noise = NoiseModel {
            sigma_mm: 10.0,
            seed: 42,
            ..NoiseModel::default()
        };
        let scene = wall_scene(1.5);
        let a = sense(&scene, &level_pose(), SensorId::Upper, 7, &noise).unwrap();
        let b = sense(&scene, &level_pose(), SensorId::Upper, 7, &noise).unwrap();
        assert_eq!(a, b);
        let c = sense(&scene, &level_pose(), SensorId::Upper, 8, &noise).unwrap();
        assert_ne!(a, c);
        let d = sense(
            &scene,
            &level_pose(),
            SensorId::Upper,
            7,
            &noise.with_seed(43),
        )
        .unwrap();
        assert_ne!(a, d);
        for z in a.zones.iter().filter(|z| z.valid) {
            assert!(z.mm > 0.0 && z.mm <= 4000.0);
        }
    }

    #[test]
    fn noise_stages_apply() {
        let scene = wall_scene(1.0);
        let all_spikes = NoiseModel {
            sigma_mm: 0.0,
            spike_prob: 1.0,
            dropout_prob: 0.0,
            spike_value_mm: 100.0,
            seed: 1,
        };
        let f = sense(&scene, &level_pose(), SensorId::Lower, 0, &all_spikes).unwrap();
        assert!(f.zones.iter().all(|z| z.valid && z.mm == 100.0));
        let all_drop = NoiseModel {
            dropout_prob: 1.0,
            ..all_spikes
        };
        let f = sense(&scene, &level_pose(), SensorId::Lower, 0, &all_drop).unwrap();
        assert!(f.zones.iter().all(|z| !z.valid && z.mm == 4000.0));
        assert!(NoiseModel {
            spike_prob: 1.5,
            ..NoiseModel::none()
        }
        .validate()
        .is_err());
    }

    #[test]
    fn default_rig_geometry() {
        let rig = DualRig::default();
        rig.validate().unwrap();
        assert_eq!(rig.tilt_between_deg(), 30.0);
        assert_eq!(rig.combined_span_deg(), 90.0);
    }
}
