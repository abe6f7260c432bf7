//! Shared test inputs: randomized evaluation scenes with their from-scratch
//! evaluation, fusion inputs, and hand-built occlusion frames.
#![allow(dead_code)]

use std::f64::consts::PI;

use farfield::{
    Annotation, Box3D, CameraModel, ClassId, Detection, DetectionSet, Frame, FrameTag, LidarSweep, Modality, Pose, Scene,
    Size3, Vec3,
};
use rand::Rng;

use super::oracles::{ap_oracle, greedy_oracle, ODet, OGt, Rule};

pub const CLASSES: [ClassId; 2] = [ClassId::Car, ClassId::Pedestrian];

pub struct EvalCase {
    pub scenes: Vec<Scene>,
    pub dets: DetectionSet,
    /// Ego (yaw, x, y) per frame, in frame-token order.
    pub poses: Vec<(f64, f64, f64)>,
}

fn global_from_ego(pose: (f64, f64, f64), ex: f64, ey: f64) -> (f64, f64) {
    let (s, c) = pose.0.sin_cos();
    (pose.1 + c * ex - s * ey, pose.2 + s * ex + c * ey)
}

fn ego_from_global(pose: (f64, f64, f64), gx: f64, gy: f64) -> [f64; 2] {
    let (s, c) = pose.0.sin_cos();
    let (dx, dy) = (gx - pose.1, gy - pose.2);
    [c * dx + s * dy, -s * dx + c * dy]
}

fn bbox(x: f64, y: f64) -> Box3D {
    Box3D::new(Vec3::new(x, y, 0.8), Size3::new(4.0, 2.0, 1.6), 0.0, FrameTag::Global).unwrap()
}

/// One scene of 1 to 3 frames with up to 10 ground truths and 20 detections
/// per class. Scores are coarsely quantized so ties are common.
pub fn random_eval_case(rng: &mut impl Rng) -> EvalCase {
    let n_frames = rng.random_range(1..=3);
    let poses: Vec<(f64, f64, f64)> =
        (0..n_frames).map(|_| (rng.random_range(-PI..PI), rng.random_range(-100.0..100.0), rng.random_range(-100.0..100.0))).collect();
    let mut frames: Vec<Frame> = poses
        .iter()
        .enumerate()
        .map(|(i, p)| Frame {
            token: format!("f{i}"),
            timestamp_us: i as i64 * 500_000,
            ego_pose: Pose::from_yaw(p.0, Vec3::new(p.1, p.2, 0.0)),
            cameras: vec![],
            annotations: vec![],
            sweeps: vec![],
        })
        .collect();
    let mut dets = DetectionSet::new();
    for class in CLASSES {
        let n_gt = rng.random_range(0..=10);
        let mut placed: Vec<(usize, f64, f64)> = Vec::new();
        for k in 0..n_gt {
            let f = rng.random_range(0..n_frames);
            let r = rng.random_range(1.0..85.0);
            let a = rng.random_range(-PI..PI);
            let (gx, gy) = global_from_ego(poses[f], r * a.cos(), r * a.sin());
            placed.push((f, gx, gy));
            frames[f].annotations.push(Annotation {
                token: format!("{class}-{k}"),
                instance_id: format!("{class}-{k}"),
                class,
                bbox: bbox(gx, gy),
                num_lidar_pts_current: rng.random_range(0..3),
                num_lidar_pts_10sweep: None,
            });
        }
        for _ in 0..rng.random_range(0..=20) {
            let (f, x, y) = if !placed.is_empty() && rng.random_bool(0.7) {
                let (f, gx, gy) = placed[rng.random_range(0..placed.len())];
                let [ex, ey] = ego_from_global(poses[f], gx, gy);
                let spread = 0.2 + ex.hypot(ey) / 25.0;
                (f, gx + rng.random_range(-spread..spread), gy + rng.random_range(-spread..spread))
            } else {
                let f = rng.random_range(0..n_frames);
                let r = rng.random_range(1.0..85.0);
                let a = rng.random_range(-PI..PI);
                let (gx, gy) = global_from_ego(poses[f], r * a.cos(), r * a.sin());
                (f, gx, gy)
            };
            let score = (rng.random_range(0..=20) as f64) / 20.0;
            dets.entry(format!("f{f}")).or_default().push(Detection::new(bbox(x, y), class, score, Modality::Lidar));
        }
    }
    EvalCase { scenes: vec![Scene { scene_id: "s".into(), frames }], dets, poses }
}

/// Ego-frame inputs for one class and band, detections in token then list order.
pub fn oracle_inputs(case: &EvalCase, class: ClassId, band: (f64, f64), max_range: f64) -> (Vec<ODet>, Vec<OGt>) {
    let keep = |p: [f64; 2]| {
        let r = (p[0] * p[0] + p[1] * p[1]).sqrt();
        r >= band.0 && r < band.1 && r < max_range
    };
    let mut gts = Vec::new();
    for (fi, f) in case.scenes[0].frames.iter().enumerate() {
        for a in f.annotations.iter().filter(|a| a.class == class) {
            let p = ego_from_global(case.poses[fi], a.bbox.center.x, a.bbox.center.y);
            if keep(p) {
                gts.push(OGt { frame: fi, xy: p });
            }
        }
    }
    let mut dets = Vec::new();
    for (tok, list) in &case.dets {
        let fi: usize = tok[1..].parse().unwrap();
        for d in list.iter().filter(|d| d.class == class) {
            let p = ego_from_global(case.poses[fi], d.bbox.center.x, d.bbox.center.y);
            if keep(p) {
                dets.push(ODet { frame: fi, xy: p, score: d.score });
            }
        }
    }
    (dets, gts)
}

/// Ranked TP flags and AP for one rule.
pub fn oracle_eval(dets: &[ODet], gts: &[OGt], rule: Rule, full_area: bool) -> (Vec<bool>, Option<f64>) {
    let (order, labels) = greedy_oracle(dets, gts, rule);
    let ranked: Vec<bool> = order.iter().map(|&i| labels[i].is_some()).collect();
    let ap = ap_oracle(&ranked, gts.len(), full_area);
    (ranked, ap)
}

pub fn random_pose(rng: &mut impl Rng) -> Pose {
    Pose::from_yaw(rng.random_range(-PI..PI), Vec3::new(rng.random_range(-50.0..50.0), rng.random_range(-50.0..50.0), 0.0))
}

/// Clusters of overlapping boxes scattered out to ~90 m around the ego.
pub fn random_dets(rng: &mut impl Rng, pose: &Pose, modality: Modality) -> Vec<Detection> {
    let mut out = Vec::new();
    for _ in 0..rng.random_range(0..5) {
        let r = rng.random_range(2.0..90.0);
        let a = rng.random_range(-PI..PI);
        let c = pose.apply(Vec3::new(r * a.cos(), r * a.sin(), 0.8));
        let class = if rng.random_bool(0.7) { ClassId::Car } else { ClassId::Pedestrian };
        for _ in 0..rng.random_range(1..5) {
            let center = Vec3::new(c.x + rng.random_range(-1.5..1.5), c.y + rng.random_range(-1.5..1.5), c.z);
            let size = Size3::new(rng.random_range(3.5..5.0), rng.random_range(1.6..2.2), 1.6);
            let bbox = Box3D::new(center, size, rng.random_range(-PI..PI), FrameTag::Global).unwrap();
            // coarse scores so ties show up
            let score = rng.random_range(1..=20) as f64 / 20.0;
            out.push(Detection::new(bbox, class, score, modality));
        }
    }
    out
}

/// Ego distance read straight off the pose translation.
pub fn ego_dist(pose: &Pose, b: &Box3D) -> f64 {
    (b.center.x - pose.translation.x).hypot(b.center.y - pose.translation.y)
}

pub const FOCAL: f64 = 1000.0;
pub const MOUNT_Z: f64 = 1.5;

pub fn front_camera() -> CameraModel {
    CameraModel::looking_along("front", PI / 2.0, Vec3::new(0.0, 0.0, MOUNT_Z), FOCAL, FOCAL, 800.0, 450.0, 1600.0, 900.0)
}

pub fn car(token: &str, x: f64, y: f64, pts: u32) -> Annotation {
    Annotation {
        token: token.into(),
        instance_id: token.into(),
        class: ClassId::Car,
        bbox: Box3D::new(Vec3::new(x, y, 0.8), Size3::new(4.0, 2.0, 1.6), 0.0, FrameTag::Global).unwrap(),
        num_lidar_pts_current: pts,
        num_lidar_pts_10sweep: Some(pts),
    }
}

/// Single frame at the origin with one forward camera.
pub fn camera_frame(anns: Vec<Annotation>, points: Vec<Vec3>) -> Frame {
    Frame {
        token: "f".into(),
        timestamp_us: 0,
        ego_pose: Pose::IDENTITY,
        cameras: vec![front_camera()],
        annotations: anns,
        sweeps: vec![LidarSweep { timestamp_us: 0, ego_pose: Pose::IDENTITY, points }],
    }
}

/// Pinhole rectangle of an axis-aligned car seen by [`front_camera`]:
/// u grows with x, v grows downward.
pub fn rect_by_hand(cx: f64, cy: f64) -> [f64; 4] {
    let mut r = [f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY];
    for dx in [-2.0, 2.0] {
        for dy in [-1.0, 1.0] {
            for z in [0.0, 1.6] {
                let depth = cy + dy;
                let u = 800.0 + FOCAL * (cx + dx) / depth;
                let v = 450.0 - FOCAL * (z - MOUNT_Z) / depth;
                r = [r[0].min(u), r[1].min(v), r[2].max(u), r[3].max(v)];
            }
        }
    }
    r
}

pub fn rect_iou_by_hand(a: [f64; 4], b: [f64; 4]) -> f64 {
    let iw = (a[2].min(b[2]) - a[0].max(b[0])).max(0.0);
    let ih = (a[3].min(b[3]) - a[1].max(b[1])).max(0.0);
    let area = |r: [f64; 4]| (r[2] - r[0]) * (r[3] - r[1]);
    iw * ih / (area(a) + area(b) - iw * ih)
}

/// A lattice of points at depth `y` covering a car's rectangle.
pub fn point_wall(y: f64) -> Vec<Vec3> {
    let mut wall = Vec::new();
    for i in 0..=20 {
        for k in 0..=10 {
            wall.push(Vec3::new(-2.5 + i as f64 * 0.25, y, k as f64 * 0.2));
        }
    }
    wall
}
