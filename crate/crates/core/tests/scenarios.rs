//! End-to-end runs over the bundled scene files.

use std::path::PathBuf;

use hapticnav::geometry::{cast, load_scene};
use hapticnav::pipeline::{read_run_log, write_run_log, DetectionConfig, Pipeline};
use hapticnav::render::{point_cloud, PosedFrame};
use hapticnav::tof::{sense, DualRig, NoiseModel, SensorId};
use hapticnav::{Motor, MotorMask, Ray, Scene, Vec3};

fn data(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(rel)
}

fn walk(
    scene: &Scene,
    ticks: u64,
    step_m: f64,
    noise: NoiseModel,
) -> Vec<hapticnav::pipeline::TickOutput> {
    let mut p = Pipeline::new(DualRig::default_chest(), noise, DetectionConfig::default()).unwrap();
    (0..ticks)
        .map(|t| {
            p.tick_at(scene, t, Vec3::new(step_m * t as f64, 0.0, 0.0), 0.0)
                .unwrap()
        })
        .collect()
}

#[test]
fn head_bar_triggers_upper_motors_inside_one_meter() {
    let scene = load_scene(&data("scenes/head_bar.toml")).unwrap();
    let bar_front = scene.obstacles()[0].min_corner.x;
    let out = walk(&scene, 11, 0.1, NoiseModel::none());
    let cfg = DetectionConfig::default();

    let first = out
        .iter()
        .find(|o| !o.report.mask.is_empty())
        .expect("bar never detected");
    let upper = MotorMask::from_motors([Motor::L2, Motor::R2]);
    assert!(
        first.report.mask.is_subset(upper),
        "{}",
        first.report.mask.log_name()
    );

    // slant range is at least the horizontal gap, so nothing can fire earlier
    let gap = bar_front - 0.1 * first.report.tick as f64;
    assert!(
        gap > 0.0 && gap < cfg.danger_threshold_mm / 1000.0,
        "gap {gap}"
    );

    // and the filter adds at most half a window plus one tick
    let raw_hit = out
        .iter()
        .find(|o| {
            o.raw
                .cells
                .iter()
                .filter(|z| z.valid && z.mm < cfg.danger_threshold_mm)
                .count()
                >= cfg.min_zone_count
        })
        .unwrap()
        .raw
        .tick;
    assert!(first.report.tick <= raw_hit + cfg.window_len.div_ceil(2) as u64 + 1);
}

#[test]
fn corridor_run_is_reproducible_and_logs_round_trip() {
    let scene = load_scene(&data("scenes/corridor.toml")).unwrap();
    let noise = NoiseModel::default().with_seed(42);
    let a: Vec<_> = walk(&scene, 36, 0.1, noise)
        .into_iter()
        .map(|o| o.report)
        .collect();
    let b: Vec<_> = walk(&scene, 36, 0.1, noise)
        .into_iter()
        .map(|o| o.report)
        .collect();
    assert_eq!(a, b);
    assert!(a.iter().any(|r| !r.mask.is_empty()));

    let mut buf = Vec::new();
    write_run_log(&mut buf, &a).unwrap();
    let back = read_run_log(buf.as_slice()).unwrap();
    assert_eq!(back.len(), a.len());
    for (x, y) in a.iter().zip(&back) {
        assert_eq!((x.tick, x.mask, x.triggered), (y.tick, y.mask, y.triggered));
        for (p, q) in x.quadrant_min_mm.iter().zip(&y.quadrant_min_mm) {
            assert!((p - q).abs() <= 0.05 + 1e-9, "{p} vs {q}");
        }
    }
}

#[test]
fn point_cloud_recasts_to_the_same_distances() {
    let scene = load_scene(&data("scenes/corridor.toml")).unwrap();
    let rig = DualRig::default_chest().placed(Vec3::new(0.7, 0.1, 0.0), 12.0);
    let frames: Vec<PosedFrame> = [(rig.upper, SensorId::Upper), (rig.lower, SensorId::Lower)]
        .into_iter()
        .map(|(pose, id)| PosedFrame {
            pose,
            frame: sense(&scene, &pose, id, 0, &NoiseModel::none()).unwrap(),
        })
        .collect();
    let points = point_cloud(&frames).unwrap();
    assert!(points.len() > 64);

    let origin = rig.upper.mount_point;
    for p in points {
        let p = Vec3::from(p);
        let expect = (p - origin).norm();
        let ray = Ray::towards(origin, p - origin).unwrap();
        let got = cast(&scene, &ray, 10.0);
        assert!((got - expect).abs() < 1e-3, "{got} vs {expect}");
    }
}
