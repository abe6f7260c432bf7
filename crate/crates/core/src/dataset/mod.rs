//! Scenes, frames, annotations and detections.
//!
//! The ego frame puts the vehicle at the origin with +y pointing along its
//! heading (longitudinal) and +x to its right (lateral). Annotation and
//! detection geometry is stored in the global frame.

mod io;
pub mod synth;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{
    angle_diff, normalize_yaw, point_in_box, transform_box, Box3D, CameraModel, FrameTag, GeomError, Pose,
};

pub use io::{
    load_detections, load_detections_lenient, load_scenes, parse_detections, parse_scenes, save_detections,
    save_scenes, scenes_to_json, detections_to_json, LenientDetections,
};

/// Number of lidar sweeps aggregated per keyframe, including the keyframe.
pub const SWEEPS_PER_KEYFRAME: usize = 10;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("{path}: parse error at line {line}, column {column}: {message}\n  | {context}")]
    Parse { path: String, line: usize, column: usize, message: String, context: String },
    #[error("{path}: {error}")]
    Io { path: String, error: std::io::Error },
    #[error("validation failed with {} rejected record(s): {}", .0.len(), summarize(.0))]
    Validation(Vec<Rejection>),
    #[error("cannot interpolate between instances {prev} and {next}")]
    InstanceMismatch { prev: String, next: String },
    #[error("unknown frame token(s): {}", .0.join(", "))]
    UnknownFrames(Vec<String>),
    #[error(transparent)]
    Geom(#[from] GeomError),
}

fn summarize(rejections: &[Rejection]) -> String {
    let shown: Vec<String> = rejections.iter().take(5).map(|r| r.to_string()).collect();
    let mut s = shown.join("; ");
    if rejections.len() > 5 {
        s.push_str(&format!("; ... {} more", rejections.len() - 5));
    }
    s
}

/// One record that failed validation, named by its token path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rejection {
    pub record: String,
    pub reason: String,
}

impl fmt::Display for Rejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.record, self.reason)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassId {
    Car,
    Truck,
    Bus,
    Trailer,
    ConstructionVehicle,
    Pedestrian,
    Motorcycle,
    Bicycle,
    TrafficCone,
    Barrier,
}

impl ClassId {
    pub const ALL: [ClassId; 10] = [
        ClassId::Car,
        ClassId::Truck,
        ClassId::Bus,
        ClassId::Trailer,
        ClassId::ConstructionVehicle,
        ClassId::Pedestrian,
        ClassId::Motorcycle,
        ClassId::Bicycle,
        ClassId::TrafficCone,
        ClassId::Barrier,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ClassId::Car => "car",
            ClassId::Truck => "truck",
            ClassId::Bus => "bus",
            ClassId::Trailer => "trailer",
            ClassId::ConstructionVehicle => "construction_vehicle",
            ClassId::Pedestrian => "pedestrian",
            ClassId::Motorcycle => "motorcycle",
            ClassId::Bicycle => "bicycle",
            ClassId::TrafficCone => "traffic_cone",
            ClassId::Barrier => "barrier",
        }
    }
}

impl fmt::Display for ClassId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClassId {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ClassId::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown class '{s}'"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modality {
    Lidar,
    Camera,
    Fused,
}

impl Modality {
    pub fn as_str(self) -> &'static str {
        match self {
            Modality::Lidar => "lidar",
            Modality::Camera => "camera",
            Modality::Fused => "fused",
        }
    }
}

impl FromStr for Modality {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lidar" => Ok(Modality::Lidar),
            "camera" => Ok(Modality::Camera),
            "fused" => Ok(Modality::Fused),
            _ => Err(format!("unknown modality '{s}'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Annotation {
    pub token: String,
    pub instance_id: String,
    pub class: ClassId,
    pub bbox: Box3D,
    /// Points of the keyframe sweep inside `bbox`.
    pub num_lidar_pts_current: u32,
    /// Points over the keyframe and preceding sweeps, with the box
    /// interpolated to each sweep time.
    pub num_lidar_pts_10sweep: Option<u32>,
}

impl Annotation {
    pub fn point_count(&self, mode: CountMode) -> u32 {
        match mode {
            CountMode::CurrentSweep => self.num_lidar_pts_current,
            CountMode::TenSweepInterpolated => self.num_lidar_pts_10sweep.unwrap_or(self.num_lidar_pts_current),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub bbox: Box3D,
    pub class: ClassId,
    pub score: f64,
    pub modality: Modality,
    /// Source modality of a fused detection.
    pub provenance: Option<Modality>,
}

impl Detection {
    pub fn new(bbox: Box3D, class: ClassId, score: f64, modality: Modality) -> Detection {
        Detection { bbox, class, score, modality, provenance: None }
    }
}

/// Detections keyed by frame token.
pub type DetectionSet = BTreeMap<String, Vec<Detection>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LidarSweep {
    pub timestamp_us: i64,
    pub ego_pose: Pose,
    /// Registered points, global frame.
    pub points: Vec<crate::geom::Vec3>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub token: String,
    pub timestamp_us: i64,
    pub ego_pose: Pose,
    pub cameras: Vec<CameraModel>,
    pub annotations: Vec<Annotation>,
    /// Keyframe sweep plus up to nine preceding sweeps, oldest first.
    pub sweeps: Vec<LidarSweep>,
}

impl Frame {
    /// The sweep captured at the keyframe timestamp.
    pub fn keyframe_sweep(&self) -> Option<&LidarSweep> {
        self.sweeps.iter().find(|s| s.timestamp_us == self.timestamp_us)
    }

    pub fn to_ego(&self, b: &Box3D) -> Box3D {
        to_ego_frame(self, b)
    }

    pub fn ego_distance(&self, b: &Box3D) -> f64 {
        ego_distance(&self.ego_pose, b)
    }

    fn validate(&self, scene_id: &str, out: &mut Vec<Rejection>) {
        let here = format!("scene {scene_id} / frame {}", self.token);
        let mut reject = |record: String, reason: String| out.push(Rejection { record, reason });
        if let Err(e) = Pose::new(self.ego_pose.translation, self.ego_pose.rotation) {
            reject(here.clone(), format!("ego_pose: {e}"));
        }
        let mut cam_ids = std::collections::BTreeSet::new();
        for cam in &self.cameras {
            if !cam_ids.insert(cam.id.as_str()) {
                reject(format!("{here} / camera {}", cam.id), "duplicate camera id".into());
            }
            if let Err(e) = cam.validate() {
                reject(format!("{here} / camera {}", cam.id), e.to_string());
            }
            if let Err(e) = Pose::new(cam.extrinsic.translation, cam.extrinsic.rotation) {
                reject(format!("{here} / camera {}", cam.id), format!("extrinsic: {e}"));
            }
        }
        let mut tokens = std::collections::BTreeSet::new();
        for ann in &self.annotations {
            let rec = format!("{here} / annotation {}", ann.token);
            if !tokens.insert(ann.token.as_str()) {
                reject(rec.clone(), "duplicate annotation token".into());
            }
            if let Err(e) = ann.bbox.validate() {
                reject(rec, e.to_string());
            }
        }
        let keyframes = self.sweeps.iter().filter(|s| s.timestamp_us == self.timestamp_us).count();
        if keyframes != 1 {
            reject(here.clone(), format!("expected exactly one keyframe sweep, found {keyframes}"));
        }
        if self.sweeps.len() > SWEEPS_PER_KEYFRAME {
            reject(here.clone(), format!("{} sweeps exceeds {SWEEPS_PER_KEYFRAME}", self.sweeps.len()));
        }
        if self.sweeps.iter().any(|s| s.timestamp_us > self.timestamp_us) {
            reject(here.clone(), "sweep timestamp after the keyframe".into());
        }
        for s in &self.sweeps {
            if let Err(e) = Pose::new(s.ego_pose.translation, s.ego_pose.rotation) {
                reject(format!("{here} / sweep {}", s.timestamp_us), format!("ego_pose: {e}"));
            }
            if s.points.iter().any(|p| !p.is_finite()) {
                reject(format!("{here} / sweep {}", s.timestamp_us), "non-finite point".into());
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub scene_id: String,
    pub frames: Vec<Frame>,
}

impl Scene {
    pub fn validate(&self) -> Vec<Rejection> {
        let mut out = Vec::new();
        let mut last_frame: Option<i64> = None;
        let mut last_sweep: Option<i64> = None;
        for frame in &self.frames {
            if last_frame.is_some_and(|t| frame.timestamp_us <= t) {
                out.push(Rejection {
                    record: format!("scene {} / frame {}", self.scene_id, frame.token),
                    reason: "frame timestamps must be strictly increasing".into(),
                });
            }
            last_frame = Some(frame.timestamp_us);
            for s in &frame.sweeps {
                if last_sweep.is_some_and(|t| s.timestamp_us <= t) {
                    out.push(Rejection {
                        record: format!("scene {} / frame {} / sweep {}", self.scene_id, frame.token, s.timestamp_us),
                        reason: "sweep timestamps must be strictly increasing".into(),
                    });
                }
                last_sweep = Some(s.timestamp_us);
            }
            frame.validate(&self.scene_id, &mut out);
        }
        out
    }

    /// Annotation of `instance_id` in the keyframe before `frame_idx`, with
    /// that keyframe's timestamp.
    pub fn previous_annotation(&self, frame_idx: usize, instance_id: &str) -> Option<(&Annotation, i64)> {
        let prev = self.frames.get(frame_idx.checked_sub(1)?)?;
        prev.annotations
            .iter()
            .find(|a| a.instance_id == instance_id)
            .map(|a| (a, prev.timestamp_us))
    }

    /// Recomputes both point counts of every annotation from the sweeps.
    pub fn refresh_point_counts(&mut self) {
        let counts: Vec<Vec<(u32, u32)>> = self
            .frames
            .iter()
            .enumerate()
            .map(|(fi, frame)| {
                frame
                    .annotations
                    .iter()
                    .map(|ann| {
                        let prev = self.previous_annotation(fi, &ann.instance_id);
                        (
                            count_points_in_annotation(frame, ann, CountMode::CurrentSweep, None),
                            count_points_in_annotation(frame, ann, CountMode::TenSweepInterpolated, prev),
                        )
                    })
                    .collect()
            })
            .collect();
        for (frame, fc) in self.frames.iter_mut().zip(counts) {
            for (ann, (cur, agg)) in frame.annotations.iter_mut().zip(fc) {
                ann.num_lidar_pts_current = cur;
                ann.num_lidar_pts_10sweep = Some(agg);
            }
        }
    }
}

/// Expresses a global-frame box in the frame's ego coordinates.
pub fn to_ego_frame(frame: &Frame, b: &Box3D) -> Box3D {
    if b.frame == FrameTag::Ego {
        return *b;
    }
    transform_box(&frame.ego_pose.inverse(), b).with_frame(FrameTag::Ego)
}

/// Ground-plane distance from the ego origin to the box center.
pub fn ego_distance(ego_pose: &Pose, b: &Box3D) -> f64 {
    match b.frame {
        FrameTag::Ego => b.center.norm_xy(),
        FrameTag::Global => ego_pose.inverse().apply(b.center).norm_xy(),
    }
}

/// Box between two keyframe annotations of one instance; `t = 0` is `prev`.
pub fn interpolate_annotation(prev: &Annotation, next: &Annotation, t: f64) -> Result<Box3D, DataError> {
    if prev.instance_id != next.instance_id {
        return Err(DataError::InstanceMismatch {
            prev: prev.instance_id.clone(),
            next: next.instance_id.clone(),
        });
    }
    Ok(interpolate_box(&prev.bbox, &next.bbox, t))
}

pub(crate) fn interpolate_box(prev: &Box3D, next: &Box3D, t: f64) -> Box3D {
    if t <= 0.0 {
        return *prev;
    }
    if t >= 1.0 {
        return *next;
    }
    Box3D {
        center: prev.center.lerp(next.center, t),
        size: next.size,
        yaw: normalize_yaw(prev.yaw + t * angle_diff(prev.yaw, next.yaw)),
        frame: next.frame,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CountMode {
    CurrentSweep,
    TenSweepInterpolated,
}

/// Lidar points inside an annotation.
///
/// `previous` is the same instance's annotation at the preceding keyframe
/// together with that keyframe's timestamp. Without it the current box is
/// used for every sweep.
pub fn count_points_in_annotation(
    frame: &Frame,
    ann: &Annotation,
    mode: CountMode,
    previous: Option<(&Annotation, i64)>,
) -> u32 {
    let count_in = |sweep: &LidarSweep, b: &Box3D| sweep.points.iter().filter(|p| point_in_box(**p, b)).count();
    match mode {
        CountMode::CurrentSweep => frame.keyframe_sweep().map_or(0, |s| count_in(s, &ann.bbox)) as u32,
        CountMode::TenSweepInterpolated => {
            let prev = previous.filter(|(p, ts)| p.instance_id == ann.instance_id && *ts < frame.timestamp_us);
            let total: usize = frame
                .sweeps
                .iter()
                .map(|sweep| {
                    let b = match prev {
                        Some((p, prev_ts)) => {
                            let t = (sweep.timestamp_us - prev_ts) as f64 / (frame.timestamp_us - prev_ts) as f64;
                            interpolate_box(&p.bbox, &ann.bbox, t.clamp(0.0, 1.0))
                        }
                        None => ann.bbox,
                    };
                    count_in(sweep, &b)
                })
                .sum();
            total as u32
        }
    }
}
