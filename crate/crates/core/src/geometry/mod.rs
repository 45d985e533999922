//! Box scenes, rays and ray casting.
//!
//! Scenes are made of axis-aligned boxes plus an optional horizontal ground
//! plane. Boxes may be flat (zero thickness on an axis) to model signs and
//! thin panels.

mod scene_file;

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

pub use scene_file::{load_scene, parse_scene, write_scene};

/// Tolerance on `|direction| = 1` for a [`Ray`].
pub const UNIT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("non-finite coordinate in {0}")]
    NonFinite(String),
    #[error("obstacle `{0}` has min corner above max corner")]
    InvertedBox(String),
    #[error("duplicate obstacle id `{0}`")]
    DuplicateId(String),
    #[error("ray direction has length {0}, expected 1")]
    NotUnit(f64),
    #[error("scene file line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("cannot read scene file: {0}")]
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, other: Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn normalized(self) -> Vec3 {
        self * (1.0 / self.norm())
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn axis(self, i: usize) -> f64 {
        match i {
            0 => self.x,
            1 => self.y,
            _ => self.z,
        }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

impl From<[f64; 3]> for Vec3 {
    fn from(a: [f64; 3]) -> Self {
        Vec3::new(a[0], a[1], a[2])
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

/// Axis-aligned box obstacle.
#[derive(Debug, Clone, PartialEq)]
pub struct Obstacle {
    pub id: String,
    pub min_corner: Vec3,
    pub max_corner: Vec3,
}

impl Obstacle {
    pub fn new(
        id: impl Into<String>,
        min_corner: Vec3,
        max_corner: Vec3,
    ) -> Result<Self, GeometryError> {
        let id = id.into();
        if !min_corner.is_finite() || !max_corner.is_finite() {
            return Err(GeometryError::NonFinite(format!("obstacle `{id}`")));
        }
        if (0..3).any(|i| min_corner.axis(i) > max_corner.axis(i)) {
            return Err(GeometryError::InvertedBox(id));
        }
        Ok(Self {
            id,
            min_corner,
            max_corner,
        })
    }

    pub fn translated(&self, by: Vec3) -> Obstacle {
        Obstacle {
            id: self.id.clone(),
            min_corner: self.min_corner + by,
            max_corner: self.max_corner + by,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Scene {
    obstacles: Vec<Obstacle>,
    ground_z: Option<f64>,
}

impl Scene {
    /// A scene with nothing in it, not even a ground plane.
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn new(obstacles: Vec<Obstacle>, ground_z: Option<f64>) -> Result<Self, GeometryError> {
        if let Some(z) = ground_z {
            if !z.is_finite() {
                return Err(GeometryError::NonFinite("ground_z".into()));
            }
        }
        let mut scene = Scene {
            obstacles: Vec::with_capacity(obstacles.len()),
            ground_z,
        };
        for o in obstacles {
            scene.add(o)?;
        }
        Ok(scene)
    }

    pub fn add(&mut self, obstacle: Obstacle) -> Result<(), GeometryError> {
        if self.obstacles.iter().any(|o| o.id == obstacle.id) {
            return Err(GeometryError::DuplicateId(obstacle.id));
        }
        self.obstacles.push(obstacle);
        Ok(())
    }

    pub fn obstacles(&self) -> &[Obstacle] {
        &self.obstacles
    }

    pub fn ground_z(&self) -> Option<f64> {
        self.ground_z
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    pub origin: Vec3,
    direction: Vec3,
}

impl Ray {
    /// Builds a ray, rejecting directions that are not unit length.
    pub fn new(origin: Vec3, direction: Vec3) -> Result<Self, GeometryError> {
        if !origin.is_finite() || !direction.is_finite() {
            return Err(GeometryError::NonFinite("ray".into()));
        }
        let len = direction.norm();
        if (len - 1.0).abs() > UNIT_TOLERANCE {
            return Err(GeometryError::NotUnit(len));
        }
        Ok(Self { origin, direction })
    }

    /// Builds a ray after normalizing `direction`.
    pub fn towards(origin: Vec3, direction: Vec3) -> Result<Self, GeometryError> {
        Self::new(origin, direction.normalized())
    }

    pub fn direction(&self) -> Vec3 {
        self.direction
    }

    pub fn at(&self, t: f64) -> Vec3 {
        self.origin + self.direction * t
    }
}

/// What a cast ray stopped on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HitTarget {
    /// Index into [`Scene::obstacles`].
    Obstacle(usize),
    Ground,
    /// Nothing within range.
    Nothing,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit {
    pub distance: f64,
    pub target: HitTarget,
}

/// Slab-method ray/box intersection.
///
/// Returns the smallest `t >= 0` at which the ray touches the box boundary.
/// A ray running parallel to a zero-thickness slab never hits it.
pub fn intersect_box(ray: &Ray, obstacle: &Obstacle) -> Option<f64> {
    let mut t_near = f64::NEG_INFINITY;
    let mut t_far = f64::INFINITY;
    for axis in 0..3 {
        let o = ray.origin.axis(axis);
        let d = ray.direction.axis(axis);
        let lo = obstacle.min_corner.axis(axis);
        let hi = obstacle.max_corner.axis(axis);
        if d == 0.0 {
            if lo == hi || o < lo || o > hi {
                return None;
            }
            continue;
        }
        let (t1, t2) = ((lo - o) / d, (hi - o) / d);
        let (t1, t2) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        t_near = t_near.max(t1);
        t_far = t_far.min(t2);
        if t_near > t_far {
            return None;
        }
    }
    if t_far < 0.0 {
        None
    } else if t_near >= 0.0 {
        Some(t_near)
    } else {
        // origin inside the box: first boundary crossing is the exit
        Some(t_far)
    }
}

fn intersect_ground(ray: &Ray, ground_z: f64) -> Option<f64> {
    let dz = ray.direction.z;
    if dz == 0.0 {
        return None;
    }
    let t = (ground_z - ray.origin.z) / dz;
    (t >= 0.0).then_some(t)
}

/// Nearest hit along `ray`, clamped to `max_range`.
pub fn cast_hit(scene: &Scene, ray: &Ray, max_range: f64) -> Hit {
    let mut best = Hit {
        distance: max_range,
        target: HitTarget::Nothing,
    };
    for (i, o) in scene.obstacles.iter().enumerate() {
        if let Some(t) = intersect_box(ray, o) {
            if t < best.distance {
                best = Hit {
                    distance: t,
                    target: HitTarget::Obstacle(i),
                };
            }
        }
    }
    if let Some(t) = scene.ground_z.and_then(|z| intersect_ground(ray, z)) {
        if t < best.distance {
            best = Hit {
                distance: t,
                target: HitTarget::Ground,
            };
        }
    }
    best
}

/// Distance to the nearest obstacle or ground hit; `max_range` when nothing
/// is closer.
pub fn cast(scene: &Scene, ray: &Ray, max_range: f64) -> f64 {
    cast_hit(scene, ray, max_range).distance
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn boxed(min: [f64; 3], max: [f64; 3]) -> Obstacle {
        Obstacle::new("b", min.into(), max.into()).unwrap()
    }

    fn ray(o: [f64; 3], d: [f64; 3]) -> Ray {
        Ray::towards(o.into(), d.into()).unwrap()
    }

    /// Marches along the ray and reports the first sample inside the box.
    fn march_oracle(r: &Ray, b: &Obstacle, t_max: f64, step: f64) -> Option<f64> {
        let inside = |p: Vec3| {
            (0..3).all(|i| p.axis(i) >= b.min_corner.axis(i) && p.axis(i) <= b.max_corner.axis(i))
        };
        let mut t = 0.0;
        while t <= t_max {
            if inside(r.at(t)) {
                return Some(t);
            }
            t += step;
        }
        None
    }

    #[test]
    fn axis_aligned_hit() {
        let b = boxed([2.0, -1.0, -1.0], [3.0, 1.0, 1.0]);
        assert_eq!(
            intersect_box(&ray([0.0; 3], [1.0, 0.0, 0.0]), &b),
            Some(2.0)
        );
    }

    #[test]
    fn disjoint_in_y_misses() {
        let b = boxed([2.0, 5.0, -1.0], [3.0, 6.0, 1.0]);
        assert_eq!(intersect_box(&ray([0.0; 3], [1.0, 0.0, 0.0]), &b), None);
    }

    #[test]
    fn oblique_ray_agrees_with_march() {
        // (0.8, 0.6, 0) reaches x = 2 at y = 1.5, above the box's y extent,
        // and leaves the y slab (t = 5/3) before entering the x slab (t = 2.5).
        let b = boxed([2.0, -1.0, -1.0], [3.0, 1.0, 1.0]);
        let r = ray([0.0; 3], [0.8, 0.6, 0.0]);
        assert_eq!(march_oracle(&r, &b, 10.0, 1e-5), None);
        assert_eq!(intersect_box(&r, &b), None);

        // same direction against a taller box does hit, at the x = 2 face
        let tall = boxed([2.0, -1.0, -1.0], [3.0, 2.0, 1.0]);
        let t = intersect_box(&r, &tall).unwrap();
        let oracle = march_oracle(&r, &tall, 10.0, 1e-5).unwrap();
        assert!((t - 2.5).abs() < 1e-12);
        assert!((t - oracle).abs() < 2e-5);
    }

    #[test]
    fn origin_inside_returns_exit() {
        let b = boxed([-1.0; 3], [1.0, 1.0, 1.0]);
        let t = intersect_box(&ray([0.0; 3], [1.0, 0.0, 0.0]), &b).unwrap();
        assert!((t - 1.0).abs() < 1e-12);
    }

    #[test]
    fn flat_box_parallel_ray_misses() {
        let sign = boxed([2.0, -1.0, 0.0], [3.0, 1.0, 0.0]);
        assert_eq!(intersect_box(&ray([0.0; 3], [1.0, 0.0, 0.0]), &sign), None);
        // hits it from above
        let t = intersect_box(&ray([2.5, 0.0, 1.0], [0.0, 0.0, -1.0]), &sign).unwrap();
        assert!((t - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cast_sentinel_wall_and_ground() {
        let r = ray([0.0, 0.0, 1.0], [1.0, 0.0, 0.0]);
        assert_eq!(cast(&Scene::empty(), &r, 4.0), 4.0);

        let wall =
            Obstacle::new("wall", Vec3::new(1.0, -2.0, 0.0), Vec3::new(1.1, 2.0, 3.0)).unwrap();
        let scene = Scene::new(vec![wall], Some(0.0)).unwrap();
        assert_eq!(cast(&scene, &r, 4.0), 1.0);

        let down = ray([0.0, 0.0, 1.5], [0.0, 0.0, -1.0]);
        assert_eq!(
            cast(&Scene::new(vec![], Some(0.0)).unwrap(), &down, 4.0),
            1.5
        );
        let hit = cast_hit(&scene, &down, 4.0);
        assert_eq!(hit.target, HitTarget::Ground);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            Obstacle::new("x", Vec3::new(1.0, 0.0, 0.0), Vec3::ZERO),
            Err(GeometryError::InvertedBox(_))
        ));
        let a = boxed([0.0; 3], [1.0; 3]);
        assert!(matches!(
            Scene::new(vec![a.clone(), a], None),
            Err(GeometryError::DuplicateId(_))
        ));
        assert!(matches!(
            Ray::new(Vec3::ZERO, Vec3::new(2.0, 0.0, 0.0)),
            Err(GeometryError::NotUnit(_))
        ));
    }

    fn arb_box() -> impl Strategy<Value = Obstacle> {
        (
            prop::array::uniform3(-5.0..5.0f64),
            prop::array::uniform3(0.0..3.0f64),
        )
            .prop_map(|(lo, ext)| {
                let hi = [lo[0] + ext[0], lo[1] + ext[1], lo[2] + ext[2]];
                boxed(lo, hi)
            })
    }

    fn arb_ray() -> impl Strategy<Value = Ray> {
        (
            prop::array::uniform3(-5.0..5.0f64),
            prop::array::uniform3(-1.0..1.0f64),
        )
            .prop_filter_map("degenerate direction", |(o, d)| {
                let v = Vec3::from(d);
                (v.norm() > 1e-3).then(|| Ray::towards(o.into(), v).unwrap())
            })
    }

    proptest! {
        #[test]
        fn translation_invariance(b in arb_box(), r in arb_ray(), shift in prop::array::uniform3(-10.0..10.0f64)) {
            let shift = Vec3::from(shift);
            let moved = Ray::new(r.origin + shift, r.direction()).unwrap();
            match (intersect_box(&r, &b), intersect_box(&moved, &b.translated(shift))) {
                (Some(a), Some(c)) => prop_assert!((a - c).abs() < 1e-9),
                (None, None) => {}
                (a, c) => {
                    // only grazing contacts may flip under rounding
                    let t = a.or(c).unwrap();
                    let p = r.at(t);
                    let on_edge = (0..3).filter(|&i| {
                        (p.axis(i) - b.min_corner.axis(i)).abs() < 1e-9
                            || (p.axis(i) - b.max_corner.axis(i)).abs() < 1e-9
                    }).count() >= 2;
                    prop_assert!(on_edge, "hit flipped away from an edge: {a:?} vs {c:?}");
                }
            }
        }

        #[test]
        fn hit_lies_on_surface(b in arb_box(), r in arb_ray()) {
            if let Some(t) = intersect_box(&r, &b) {
                prop_assert!(t >= 0.0);
                let p = r.at(t);
                let eps = 1e-9;
                let inside_inflated = (0..3).all(|i| p.axis(i) >= b.min_corner.axis(i) - eps && p.axis(i) <= b.max_corner.axis(i) + eps);
                let inside_deflated = (0..3).all(|i| p.axis(i) > b.min_corner.axis(i) + eps && p.axis(i) < b.max_corner.axis(i) - eps);
                prop_assert!(inside_inflated);
                prop_assert!(!inside_deflated);
            }
        }

        #[test]
        fn cast_bounded_and_monotone(boxes in prop::collection::vec(arb_box(), 0..5), extra in arb_box(), r in arb_ray(), ground in prop::option::of(-3.0..0.0f64)) {
            let mut scene = Scene::new(vec![], ground).unwrap();
            for (i, mut b) in boxes.into_iter().enumerate() {
                b.id = format!("b{i}");
                scene.add(b).unwrap();
            }
            let before = cast(&scene, &r, 6.0);
            prop_assert!(before <= 6.0);
            let mut more = scene.clone();
            let mut extra = extra;
            extra.id = "extra".into();
            more.add(extra).unwrap();
            prop_assert!(cast(&more, &r, 6.0) <= before);
        }
    }
}
