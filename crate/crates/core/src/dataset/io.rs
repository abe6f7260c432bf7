//! JSON scene and detection files.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Annotation, ClassId, DataError, Detection, DetectionSet, Frame, LidarSweep, Modality, Rejection, Scene};
use crate::geom::{normalize_yaw, Box3D, CameraModel, FrameTag, Pose, Quat, Size3, Vec3};

#[derive(Serialize, Deserialize)]
struct RawSceneFile {
    scenes: Vec<RawScene>,
}

#[derive(Serialize, Deserialize)]
struct RawScene {
    scene_id: String,
    frames: Vec<RawFrame>,
}

#[derive(Serialize, Deserialize)]
struct RawPose {
    translation: [f64; 3],
    rotation: [f64; 4],
}

#[derive(Serialize, Deserialize)]
struct RawFrame {
    token: String,
    timestamp_us: i64,
    ego_pose: RawPose,
    #[serde(default)]
    cameras: Vec<RawCamera>,
    #[serde(default)]
    annotations: Vec<RawAnnotation>,
    #[serde(default)]
    sweeps: Vec<RawSweep>,
}

#[derive(Serialize, Deserialize)]
struct RawCamera {
    id: String,
    fx: f64,
    fy: f64,
    cx: f64,
    cy: f64,
    width: f64,
    height: f64,
    extrinsic: RawPose,
}

#[derive(Serialize, Deserialize)]
struct RawAnnotation {
    token: String,
    instance_id: String,
    class: String,
    center: [f64; 3],
    size: [f64; 3],
    yaw: f64,
}

#[derive(Serialize, Deserialize)]
struct RawSweep {
    timestamp_us: i64,
    ego_pose: RawPose,
    points: Vec<[f64; 3]>,
}

#[derive(Serialize, Deserialize)]
struct RawDetection {
    class: String,
    score: f64,
    center: [f64; 3],
    size: [f64; 3],
    yaw: f64,
    modality: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    provenance: Option<String>,
}

impl From<&Pose> for RawPose {
    fn from(p: &Pose) -> Self {
        RawPose { translation: p.translation.into(), rotation: p.rotation.into() }
    }
}

impl RawPose {
    // Validation happens in Scene::validate so that every bad pose is itemized.
    fn into_pose(self) -> Pose {
        Pose { translation: Vec3::from(self.translation), rotation: Quat::from(self.rotation) }
    }
}

fn raw_box(center: [f64; 3], size: [f64; 3], yaw: f64) -> Box3D {
    Box3D {
        center: Vec3::from(center),
        size: Size3::new(size[0], size[1], size[2]),
        yaw: if yaw.is_finite() { normalize_yaw(yaw) } else { yaw },
        frame: FrameTag::Global,
    }
}

fn box_fields(b: &Box3D) -> ([f64; 3], [f64; 3], f64) {
    (b.center.into(), [b.size.length, b.size.width, b.size.height], b.yaw)
}

fn parse_error(path: &str, text: &str, e: serde_json::Error) -> DataError {
    let context = text
        .lines()
        .nth(e.line().saturating_sub(1))
        .map(|l| {
            let start = e.column().saturating_sub(40);
            l.chars().skip(start).take(80).collect::<String>()
        })
        .unwrap_or_default();
    DataError::Parse { path: path.to_string(), line: e.line(), column: e.column(), message: e.to_string(), context }
}

fn read(path: &Path) -> Result<String, DataError> {
    std::fs::read_to_string(path).map_err(|error| DataError::Io { path: path.display().to_string(), error })
}

/// Parses a scene document; `origin` only labels diagnostics.
pub fn parse_scenes(text: &str, origin: &str) -> Result<Vec<Scene>, DataError> {
    let raw: RawSceneFile = serde_json::from_str(text).map_err(|e| parse_error(origin, text, e))?;
    let mut rejections = Vec::new();
    let mut scenes = Vec::with_capacity(raw.scenes.len());
    for rs in raw.scenes {
        let mut frames = Vec::with_capacity(rs.frames.len());
        for rf in rs.frames {
            let cameras = rf
                .cameras
                .into_iter()
                .map(|c| CameraModel {
                    id: c.id,
                    fx: c.fx,
                    fy: c.fy,
                    cx: c.cx,
                    cy: c.cy,
                    width: c.width,
                    height: c.height,
                    extrinsic: c.extrinsic.into_pose(),
                })
                .collect();
            let mut annotations = Vec::with_capacity(rf.annotations.len());
            for ra in rf.annotations {
                match ra.class.parse::<ClassId>() {
                    Ok(class) => annotations.push(Annotation {
                        token: ra.token,
                        instance_id: ra.instance_id,
                        class,
                        bbox: raw_box(ra.center, ra.size, ra.yaw),
                        num_lidar_pts_current: 0,
                        num_lidar_pts_10sweep: None,
                    }),
                    Err(reason) => rejections.push(Rejection {
                        record: format!("scene {} / frame {} / annotation {}", rs.scene_id, rf.token, ra.token),
                        reason,
                    }),
                }
            }
            let sweeps = rf
                .sweeps
                .into_iter()
                .map(|s| LidarSweep {
                    timestamp_us: s.timestamp_us,
                    ego_pose: s.ego_pose.into_pose(),
                    points: s.points.into_iter().map(Vec3::from).collect(),
                })
                .collect();
            frames.push(Frame {
                token: rf.token,
                timestamp_us: rf.timestamp_us,
                ego_pose: rf.ego_pose.into_pose(),
                cameras,
                annotations,
                sweeps,
            });
        }
        scenes.push(Scene { scene_id: rs.scene_id, frames });
    }
    let mut seen = std::collections::BTreeSet::new();
    for scene in &scenes {
        for f in &scene.frames {
            if !seen.insert(f.token.as_str()) {
                rejections.push(Rejection { record: format!("frame {}", f.token), reason: "duplicate frame token".into() });
            }
        }
        rejections.extend(scene.validate());
    }
    if !rejections.is_empty() {
        return Err(DataError::Validation(rejections));
    }
    for scene in &mut scenes {
        scene.refresh_point_counts();
    }
    Ok(scenes)
}

pub fn load_scenes(path: impl AsRef<Path>) -> Result<Vec<Scene>, DataError> {
    let path = path.as_ref();
    parse_scenes(&read(path)?, &path.display().to_string())
}

pub fn scenes_to_json(scenes: &[Scene]) -> String {
    let raw = RawSceneFile {
        scenes: scenes
            .iter()
            .map(|s| RawScene {
                scene_id: s.scene_id.clone(),
                frames: s
                    .frames
                    .iter()
                    .map(|f| RawFrame {
                        token: f.token.clone(),
                        timestamp_us: f.timestamp_us,
                        ego_pose: RawPose::from(&f.ego_pose),
                        cameras: f
                            .cameras
                            .iter()
                            .map(|c| RawCamera {
                                id: c.id.clone(),
                                fx: c.fx,
                                fy: c.fy,
                                cx: c.cx,
                                cy: c.cy,
                                width: c.width,
                                height: c.height,
                                extrinsic: RawPose::from(&c.extrinsic),
                            })
                            .collect(),
                        annotations: f
                            .annotations
                            .iter()
                            .map(|a| {
                                let (center, size, yaw) = box_fields(&a.bbox);
                                RawAnnotation {
                                    token: a.token.clone(),
                                    instance_id: a.instance_id.clone(),
                                    class: a.class.as_str().to_string(),
                                    center,
                                    size,
                                    yaw,
                                }
                            })
                            .collect(),
                        sweeps: f
                            .sweeps
                            .iter()
                            .map(|s| RawSweep {
                                timestamp_us: s.timestamp_us,
                                ego_pose: RawPose::from(&s.ego_pose),
                                points: s.points.iter().map(|p| (*p).into()).collect(),
                            })
                            .collect(),
                    })
                    .collect(),
            })
            .collect(),
    };
    serde_json::to_string(&raw).expect("scene model serializes")
}

fn write_text(path: &Path, text: &str) -> Result<(), DataError> {
    let io_err = |error| DataError::Io { path: path.display().to_string(), error };
    let mut w = BufWriter::new(File::create(path).map_err(io_err)?);
    w.write_all(text.as_bytes()).map_err(io_err)?;
    w.write_all(b"\n").map_err(io_err)?;
    w.flush().map_err(io_err)
}

pub fn save_scenes(path: impl AsRef<Path>, scenes: &[Scene]) -> Result<(), DataError> {
    write_text(path.as_ref(), &scenes_to_json(scenes))
}

/// Detections that passed validation plus the itemized failures.
#[derive(Debug, Clone, Default)]
pub struct LenientDetections {
    pub detections: DetectionSet,
    pub rejections: Vec<Rejection>,
    /// Records present in the input.
    pub records_in: usize,
}

fn convert_detection(raw: RawDetection) -> Result<Detection, String> {
    let class = raw.class.parse::<ClassId>()?;
    let modality = raw.modality.parse::<Modality>()?;
    let provenance = raw.provenance.map(|p| p.parse::<Modality>()).transpose()?;
    if !(0.0..=1.0).contains(&raw.score) {
        return Err(format!("score {} outside [0, 1]", raw.score));
    }
    let bbox = raw_box(raw.center, raw.size, raw.yaw);
    bbox.validate().map_err(|e| e.to_string())?;
    Ok(Detection { bbox, class, score: raw.score, modality, provenance })
}

fn parse_detections_inner(text: &str, origin: &str) -> Result<LenientDetections, DataError> {
    let raw: BTreeMap<String, Vec<RawDetection>> =
        serde_json::from_str(text).map_err(|e| parse_error(origin, text, e))?;
    let mut out = LenientDetections::default();
    for (token, dets) in raw {
        let mut kept = Vec::with_capacity(dets.len());
        for (i, d) in dets.into_iter().enumerate() {
            out.records_in += 1;
            match convert_detection(d) {
                Ok(det) => kept.push(det),
                Err(reason) => out.rejections.push(Rejection { record: format!("frame {token} / detection {i}"), reason }),
            }
        }
        out.detections.insert(token, kept);
    }
    Ok(out)
}

/// Strict: any invalid record fails the whole document.
pub fn parse_detections(text: &str, origin: &str) -> Result<DetectionSet, DataError> {
    let parsed = parse_detections_inner(text, origin)?;
    if !parsed.rejections.is_empty() {
        return Err(DataError::Validation(parsed.rejections));
    }
    Ok(parsed.detections)
}

pub fn load_detections(path: impl AsRef<Path>) -> Result<DetectionSet, DataError> {
    let path = path.as_ref();
    parse_detections(&read(path)?, &path.display().to_string())
}

/// Keeps valid records and itemizes the rest instead of failing.
pub fn load_detections_lenient(path: impl AsRef<Path>) -> Result<LenientDetections, DataError> {
    let path = path.as_ref();
    parse_detections_inner(&read(path)?, &path.display().to_string())
}

pub fn detections_to_json(set: &DetectionSet) -> String {
    let raw: BTreeMap<&str, Vec<RawDetection>> = set
        .iter()
        .map(|(token, dets)| {
            let v = dets
                .iter()
                .map(|d| {
                    let (center, size, yaw) = box_fields(&d.bbox);
                    RawDetection {
                        class: d.class.as_str().to_string(),
                        score: d.score,
                        center,
                        size,
                        yaw,
                        modality: d.modality.as_str().to_string(),
                        provenance: d.provenance.map(|p| p.as_str().to_string()),
                    }
                })
                .collect();
            (token.as_str(), v)
        })
        .collect();
    serde_json::to_string(&raw).expect("detections serialize")
}

pub fn save_detections(path: impl AsRef<Path>, set: &DetectionSet) -> Result<(), DataError> {
    write_text(path.as_ref(), &detections_to_json(set))
}
