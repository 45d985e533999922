//! Frame renderers: PPM and ASCII heat maps, and `x y z` point clouds.
//!
//! Heat map colors run linearly from red (0 mm) to blue (the sensor's
//! sentinel range). Zones at the sentinel or flagged invalid are drawn in
//! [`SENTINEL_RGB`], which is off the ramp.

use std::fmt::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::registry::Registry;
use crate::tof::{zone_ray, CombinedGrid, DepthFrame, Grid, SensorPose, TofError, ZoneReading};

/// Pixels per zone edge in PPM output.
pub const CELL_PX: usize = 16;
pub const NEAR_RGB: [u8; 3] = [255, 0, 0];
pub const FAR_RGB: [u8; 3] = [0, 0, 255];
pub const SENTINEL_RGB: [u8; 3] = [0, 0, 96];
/// Separator between stacked frames.
pub const GAP_RGB: [u8; 3] = [128, 128, 128];
/// Near to far.
pub const ASCII_RAMP: &[u8] = b"@%#*+=-:,.";
pub const ASCII_SENTINEL: char = '~';

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RenderError {
    #[error("nothing to render")]
    Empty,
    #[error("frame is {rows}x{cols} but its pose has {n} zones per side")]
    PoseMismatch { rows: usize, cols: usize, n: usize },
    #[error("stacked frames differ in width ({0} vs {1})")]
    WidthMismatch(usize, usize),
    #[error("{0} needs sensor poses, not a fused grid")]
    NeedsPoses(&'static str),
    #[error(transparent)]
    Sensor(#[from] TofError),
}

/// A frame with the pose it was taken from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosedFrame {
    pub pose: SensorPose,
    pub frame: DepthFrame,
}

/// What to render: raw frames, and optionally the fused grid built from them.
/// Heat maps prefer the fused grid when present.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RenderInput {
    pub frames: Vec<PosedFrame>,
    #[serde(default)]
    pub combined: Option<CombinedGrid>,
}

pub trait FrameRenderer: Send + Sync {
    fn name(&self) -> &'static str;
    /// File extension of the output, without the dot.
    fn extension(&self) -> &'static str;
    fn render(&self, input: &RenderInput) -> Result<Vec<u8>, RenderError>;
}

enum Cell {
    Value(f64),
    Sentinel,
}

fn classify(z: &ZoneReading, sentinel_mm: f64) -> Cell {
    if !z.valid || z.mm >= sentinel_mm {
        Cell::Sentinel
    } else {
        Cell::Value((z.mm / sentinel_mm).clamp(0.0, 1.0))
    }
}

/// Grids to draw top to bottom, each with its sentinel.
fn panels(input: &RenderInput) -> Result<Vec<(&Grid<ZoneReading>, f64)>, RenderError> {
    let panels: Vec<_> = match &input.combined {
        Some(c) => vec![(&c.cells, c.sentinel_mm)],
        None => input
            .frames
            .iter()
            .map(|f| (&f.frame.zones, f.frame.sentinel_mm))
            .collect(),
    };
    let first = panels.first().ok_or(RenderError::Empty)?;
    if let Some(p) = panels.iter().find(|p| p.0.cols() != first.0.cols()) {
        return Err(RenderError::WidthMismatch(first.0.cols(), p.0.cols()));
    }
    Ok(panels)
}

/// Linear ramp position for `t` in [0, 1].
pub fn ramp_rgb(t: f64) -> [u8; 3] {
    let lerp = |a: u8, b: u8| (a as f64 + (b as f64 - a as f64) * t).round() as u8;
    [
        lerp(NEAR_RGB[0], FAR_RGB[0]),
        lerp(NEAR_RGB[1], FAR_RGB[1]),
        lerp(NEAR_RGB[2], FAR_RGB[2]),
    ]
}

/// Binary PPM (P6) heat map.
pub struct Heatmap;

impl FrameRenderer for Heatmap {
    fn name(&self) -> &'static str {
        "heatmap"
    }

    fn extension(&self) -> &'static str {
        "ppm"
    }

    fn render(&self, input: &RenderInput) -> Result<Vec<u8>, RenderError> {
        let panels = panels(input)?;
        let cols = panels[0].0.cols();
        let mut rows: Vec<Vec<[u8; 3]>> = Vec::new();
        for (i, (grid, sentinel)) in panels.iter().enumerate() {
            if i > 0 {
                rows.push(vec![GAP_RGB; cols]);
            }
            for r in 0..grid.rows() {
                rows.push(
                    grid.row(r)
                        .iter()
                        .map(|z| match classify(z, *sentinel) {
                            Cell::Value(t) => ramp_rgb(t),
                            Cell::Sentinel => SENTINEL_RGB,
                        })
                        .collect(),
                );
            }
        }
        let (w, h) = (cols * CELL_PX, rows.len() * CELL_PX);
        let mut out = format!("P6\n{w} {h}\n255\n").into_bytes();
        out.reserve(w * h * 3);
        for row in &rows {
            for _ in 0..CELL_PX {
                for px in row {
                    for _ in 0..CELL_PX {
                        out.extend_from_slice(px);
                    }
                }
            }
        }
        Ok(out)
    }
}

/// One character per zone, a blank line between stacked frames.
pub struct AsciiHeatmap;

impl FrameRenderer for AsciiHeatmap {
    fn name(&self) -> &'static str {
        "heatmap-ascii"
    }

    fn extension(&self) -> &'static str {
        "txt"
    }

    fn render(&self, input: &RenderInput) -> Result<Vec<u8>, RenderError> {
        let mut out = String::new();
        for (i, (grid, sentinel)) in panels(input)?.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            for r in 0..grid.rows() {
                for z in grid.row(r) {
                    out.push(match classify(z, *sentinel) {
                        Cell::Value(t) => {
                            let k =
                                ((t * ASCII_RAMP.len() as f64) as usize).min(ASCII_RAMP.len() - 1);
                            ASCII_RAMP[k] as char
                        }
                        Cell::Sentinel => ASCII_SENTINEL,
                    });
                }
                out.push('\n');
            }
        }
        Ok(out.into_bytes())
    }
}

/// Valid, in-range zones of posed frames as `origin + distance · zone ray`.
pub fn point_cloud(frames: &[PosedFrame]) -> Result<Vec<[f64; 3]>, RenderError> {
    let mut points = Vec::new();
    for pf in frames {
        let n = pf.pose.zones_per_side;
        let zones = &pf.frame.zones;
        if zones.rows() != n || zones.cols() != n {
            return Err(RenderError::PoseMismatch {
                rows: zones.rows(),
                cols: zones.cols(),
                n,
            });
        }
        for r in 0..n {
            for c in 0..n {
                let z = zones.get(r, c);
                if let Cell::Value(_) = classify(z, pf.frame.sentinel_mm) {
                    let p = zone_ray(&pf.pose, r, c)?.at(z.mm / 1000.0);
                    points.push([p.x, p.y, p.z]);
                }
            }
        }
    }
    Ok(points)
}

/// `x y z` in meters, one point per line.
pub struct PointCloud;

impl FrameRenderer for PointCloud {
    fn name(&self) -> &'static str {
        "pointcloud"
    }

    fn extension(&self) -> &'static str {
        "xyz"
    }

    fn render(&self, input: &RenderInput) -> Result<Vec<u8>, RenderError> {
        if input.frames.is_empty() {
            return Err(if input.combined.is_some() {
                RenderError::NeedsPoses("pointcloud")
            } else {
                RenderError::Empty
            });
        }
        let mut out = String::new();
        for [x, y, z] in point_cloud(&input.frames)? {
            writeln!(out, "{x:.6} {y:.6} {z:.6}").expect("write to string");
        }
        Ok(out.into_bytes())
    }
}

pub fn renderer_registry() -> Registry<dyn FrameRenderer> {
    let mut reg: Registry<dyn FrameRenderer> = Registry::new("renderer");
    for r in [
        Arc::new(Heatmap) as Arc<dyn FrameRenderer>,
        Arc::new(AsciiHeatmap),
        Arc::new(PointCloud),
    ] {
        reg.register(r.name(), r);
    }
    reg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{cast, Obstacle, Scene, Vec3};
    use crate::tof::{sense, NoiseModel, SensorId};

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

    fn posed(scene: &Scene) -> RenderInput {
        let pose = level_pose();
        let frame = sense(scene, &pose, SensorId::Upper, 0, &NoiseModel::none()).unwrap();
        RenderInput {
            frames: vec![PosedFrame { pose, frame }],
            combined: None,
        }
    }

    fn wall() -> Scene {
        Scene::new(
            vec![Obstacle::new("wall", [1.0, -5.0, -5.0].into(), [1.2, 5.0, 5.0].into()).unwrap()],
            None,
        )
        .unwrap()
    }

    fn pixel(ppm: &[u8], w: usize, h: usize, x: usize, y: usize) -> [u8; 3] {
        let i = format!("P6\n{w} {h}\n255\n").len() + (y * w + x) * 3;
        [ppm[i], ppm[i + 1], ppm[i + 2]]
    }

    #[test]
    fn all_sentinel_frame_is_uniform() {
        let out = Heatmap.render(&posed(&Scene::empty())).unwrap();
        let header = format!("P6\n{0} {0}\n255\n", 8 * CELL_PX);
        assert!(out.starts_with(header.as_bytes()));
        let body = &out[header.len()..];
        assert_eq!(body.len(), 3 * 128 * 128);
        assert!(body.chunks(3).all(|p| p == SENTINEL_RGB));
        let ascii =
            String::from_utf8(AsciiHeatmap.render(&posed(&Scene::empty())).unwrap()).unwrap();
        assert!(ascii.lines().all(|l| l == "~~~~~~~~"));
    }

    #[test]
    fn wall_heatmap_is_centrally_symmetric_and_warmest_in_the_middle() {
        let out = Heatmap.render(&posed(&wall())).unwrap();
        let w = 8 * CELL_PX;
        let cell = |r: usize, c: usize| pixel(&out, w, w, c * CELL_PX + 3, r * CELL_PX + 3);
        for r in 0..8 {
            for c in 0..8 {
                assert_eq!(cell(r, c), cell(7 - r, 7 - c));
                assert!(cell(r, c)[0] <= cell(3, 3)[0]);
            }
        }
        assert!(cell(0, 0)[0] < cell(3, 3)[0]);
    }

    #[test]
    fn ramp_endpoints() {
        assert_eq!(ramp_rgb(0.0), NEAR_RGB);
        assert_eq!(ramp_rgb(1.0), FAR_RGB);
        assert_ne!(SENTINEL_RGB, FAR_RGB);
    }

    #[test]
    fn points_recast_to_their_distances() {
        let scene = wall();
        let input = posed(&scene);
        let pts = point_cloud(&input.frames).unwrap();
        assert_eq!(pts.len(), 64);
        for p in pts {
            let p = Vec3::from(p);
            assert!((p.x - 1.0).abs() < 1e-9);
            let d = cast(
                &scene,
                &crate::geometry::Ray::towards(Vec3::ZERO, p).unwrap(),
                4.0,
            );
            assert!((d - p.norm()).abs() < 1e-3);
        }
    }

    #[test]
    fn single_zone_near_boresight() {
        let pose = level_pose();
        let mut frame = sense(
            &Scene::empty(),
            &pose,
            SensorId::Upper,
            0,
            &NoiseModel::none(),
        )
        .unwrap();
        *frame.zones.get_mut(3, 3) = ZoneReading::valid(1000.0);
        let text = PointCloud
            .render(&RenderInput {
                frames: vec![PosedFrame { pose, frame }],
                combined: None,
            })
            .unwrap();
        let text = String::from_utf8(text).unwrap();
        let xyz: Vec<f64> = text
            .split_whitespace()
            .map(|v| v.parse().unwrap())
            .collect();
        assert_eq!(xyz.len(), 3);
        // one zone step off boresight in each angle
        let half_step = pose.zone_step_deg().to_radians() / 2.0;
        assert!((xyz[0] - 1.0).abs() < 1.0 - half_step.cos().powi(2) + 1e-6);
        assert!(xyz[1].abs() <= half_step.sin() + 1e-6 && xyz[2].abs() <= half_step.sin() + 1e-6);
    }

    #[test]
    fn pointcloud_needs_poses() {
        let input = RenderInput {
            frames: vec![],
            combined: Some(CombinedGrid::all_sentinel(0, 12, 8, 4000.0)),
        };
        assert_eq!(
            PointCloud.render(&input),
            Err(RenderError::NeedsPoses("pointcloud"))
        );
        assert!(Heatmap.render(&input).is_ok());
    }

    #[test]
    fn registry_names() {
        assert_eq!(
            renderer_registry().names(),
            ["heatmap", "heatmap-ascii", "pointcloud"]
        );
    }
}
