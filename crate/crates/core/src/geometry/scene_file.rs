//! TOML scene files.
//!
//! ```toml
//! ground_z = 0.0          # optional; omit for a scene without ground
//!
//! [[obstacle]]
//! id = "bar"
//! min = [1.5, -1.0, 1.6]  # meters, world frame
//! max = [1.55, 1.0, 1.7]
//! ```

use std::fmt::Write as _;
use std::path::Path;

use serde::Deserialize;

use super::{GeometryError, Obstacle, Scene, Vec3};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SceneDoc {
    ground_z: Option<f64>,
    #[serde(default)]
    obstacle: Vec<ObstacleDoc>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ObstacleDoc {
    id: String,
    min: [f64; 3],
    max: [f64; 3],
}

pub(crate) fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Parses and validates a scene document.
pub fn parse_scene(text: &str) -> Result<Scene, GeometryError> {
    let doc: SceneDoc = toml::from_str(text).map_err(|e| GeometryError::Parse {
        line: e.span().map(|s| line_of(text, s.start)).unwrap_or(0),
        message: e.message().to_string(),
    })?;
    let mut obstacles = Vec::with_capacity(doc.obstacle.len());
    for o in doc.obstacle {
        let line = text
            .find(&format!("\"{}\"", o.id))
            .map(|off| line_of(text, off))
            .unwrap_or(0);
        let obstacle =
            Obstacle::new(o.id, o.min.into(), o.max.into()).map_err(|e| GeometryError::Parse {
                line,
                message: e.to_string(),
            })?;
        obstacles.push(obstacle);
    }
    Scene::new(obstacles, doc.ground_z).map_err(|e| GeometryError::Parse {
        line: 0,
        message: e.to_string(),
    })
}

pub fn load_scene(path: &Path) -> Result<Scene, GeometryError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| GeometryError::Io(format!("{}: {e}", path.display())))?;
    parse_scene(&text)
}

fn triple(v: Vec3) -> String {
    // `{:?}` prints the shortest representation that parses back exactly
    format!("[{:?}, {:?}, {:?}]", v.x, v.y, v.z)
}

/// Prints a scene in the same format [`parse_scene`] reads.
pub fn write_scene(scene: &Scene) -> String {
    let mut out = String::new();
    if let Some(z) = scene.ground_z() {
        let _ = writeln!(out, "ground_z = {z:?}");
    }
    for o in scene.obstacles() {
        let _ = write!(
            out,
            "\n[[obstacle]]\nid = {}\nmin = {}\nmax = {}\n",
            toml_string(&o.id),
            triple(o.min_corner),
            triple(o.max_corner)
        );
    }
    out
}

fn toml_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c if c.is_control() => {
                let _ = write!(out, "\\u{:04X}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
    out
}
