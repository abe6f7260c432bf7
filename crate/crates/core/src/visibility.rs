//! Zero-lidar analysis, image-space occlusion reasoning and scene audits.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{Annotation, ClassId, CountMode, Frame, Scene};
use crate::geom::{project_box, rect_iou, Box3D, Projection, Vec3};
use crate::metrics::DistanceBand;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OcclusionReason {
    BoxInFront,
    PointsInFront,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "verdict", content = "reason")]
pub enum VisibilityVerdict {
    Occluded(OcclusionReason),
    Unoccluded,
    NotVisibleInAnyCamera,
}

/// Which sweeps feed the points-in-front rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PointSource {
    #[default]
    KeyframeSweep,
    AllSweeps,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OcclusionConfig {
    pub rect_iou_threshold: f64,
    /// An occluding box must be at least this much closer to the ego vehicle.
    pub box_depth_margin: f64,
    /// Occluding points must be at least this much shallower than the box.
    pub point_depth_margin: f64,
    pub min_points_in_front: usize,
    pub point_source: PointSource,
}

impl Default for OcclusionConfig {
    fn default() -> Self {
        OcclusionConfig {
            rect_iou_threshold: 0.5,
            box_depth_margin: 5.0,
            point_depth_margin: 10.0,
            min_points_in_front: 1,
            point_source: PointSource::KeyframeSweep,
        }
    }
}

/// Which annotations count as evaluation ground truth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GtMode {
    DropAllZeroLidar,
    #[default]
    IncludeUnoccludedZeroLidar,
    IncludeAll,
}

/// Per-frame projections shared by every annotation's verdict.
struct FrameView {
    ego_dist: Vec<f64>,
    /// `[camera][annotation]`
    projections: Vec<Vec<Option<Projection>>>,
    /// `[camera]`: projected points as (u, v, depth), sorted by u.
    points: Vec<Vec<(f64, f64, f64)>>,
}

impl FrameView {
    fn new(frame: &Frame, cfg: &OcclusionConfig) -> FrameView {
        let ego_boxes: Vec<Box3D> = frame.annotations.iter().map(|a| frame.to_ego(&a.bbox)).collect();
        let ego_dist = ego_boxes.iter().map(|b| b.center.norm_xy()).collect();
        let projections = frame
            .cameras
            .iter()
            .map(|cam| ego_boxes.iter().map(|b| project_box(cam, b)).collect())
            .collect();
        let to_ego = frame.ego_pose.inverse();
        let raw: Vec<Vec3> = match cfg.point_source {
            PointSource::KeyframeSweep => frame.keyframe_sweep().map(|s| s.points.clone()).unwrap_or_default(),
            PointSource::AllSweeps => frame.sweeps.iter().flat_map(|s| s.points.iter().copied()).collect(),
        };
        let ego_points: Vec<Vec3> = raw.into_iter().map(|p| to_ego.apply(p)).collect();
        let points = frame
            .cameras
            .iter()
            .map(|cam| {
                let mut v: Vec<(f64, f64, f64)> = ego_points.iter().filter_map(|p| cam.project_point(*p)).collect();
                v.sort_by(|a, b| a.0.total_cmp(&b.0));
                v
            })
            .collect();
        FrameView { ego_dist, projections, points }
    }

    fn verdict(&self, idx: usize, cfg: &OcclusionConfig) -> VisibilityVerdict {
        let mut visible_anywhere = false;
        let mut first_reason = None;
        for (cam, projs) in self.projections.iter().enumerate() {
            let Some(p) = projs[idx] else { continue };
            if p.corners_in_image == 0 {
                continue;
            }
            visible_anywhere = true;
            match self.occluded_in_camera(cam, idx, &p, cfg) {
                None => return VisibilityVerdict::Unoccluded,
                Some(reason) => {
                    first_reason.get_or_insert(reason);
                }
            }
        }
        match (visible_anywhere, first_reason) {
            (true, Some(reason)) => VisibilityVerdict::Occluded(reason),
            _ => VisibilityVerdict::NotVisibleInAnyCamera,
        }
    }

    fn occluded_in_camera(&self, cam: usize, idx: usize, p: &Projection, cfg: &OcclusionConfig) -> Option<OcclusionReason> {
        let dist = self.ego_dist[idx];
        let box_rule = self.projections[cam].iter().enumerate().any(|(j, other)| {
            j != idx
                && self.ego_dist[j] <= dist - cfg.box_depth_margin
                && other.is_some_and(|o| rect_iou(&o.rect, &p.rect) > cfg.rect_iou_threshold)
        });
        if box_rule {
            return Some(OcclusionReason::BoxInFront);
        }
        let pts = &self.points[cam];
        let start = pts.partition_point(|q| q.0 < p.rect.x_min);
        let max_depth = p.mean_depth - cfg.point_depth_margin;
        let in_front = pts[start..]
            .iter()
            .take_while(|q| q.0 <= p.rect.x_max)
            .filter(|q| q.1 >= p.rect.y_min && q.1 <= p.rect.y_max && q.2 <= max_depth)
            .take(cfg.min_points_in_front.max(1))
            .count();
        (in_front >= cfg.min_points_in_front.max(1)).then_some(OcclusionReason::PointsInFront)
    }
}

/// Verdict for every annotation of a frame, in annotation order.
pub fn classify_frame(frame: &Frame, cfg: &OcclusionConfig) -> Vec<VisibilityVerdict> {
    let view = FrameView::new(frame, cfg);
    (0..frame.annotations.len()).map(|i| view.verdict(i, cfg)).collect()
}

/// Verdict for one annotation of `frame`.
///
/// Occluded in a camera when another annotation at least
/// `box_depth_margin` closer overlaps its image rectangle by more than
/// `rect_iou_threshold`, or when lidar points at least `point_depth_margin`
/// shallower fall inside its rectangle. Unoccluded when that holds for no
/// camera that sees it.
pub fn classify_occlusion(frame: &Frame, ann: &Annotation, cfg: &OcclusionConfig) -> VisibilityVerdict {
    match frame.annotations.iter().position(|a| a.token == ann.token) {
        Some(i) => FrameView::new(frame, cfg).verdict(i, cfg),
        None => {
            let mut f = frame.clone();
            f.annotations.push(ann.clone());
            let i = f.annotations.len() - 1;
            FrameView::new(&f, cfg).verdict(i, cfg)
        }
    }
}

/// Verdicts for every frame of every scene, keyed by frame token.
pub fn classify_scenes(scenes: &[Scene], cfg: &OcclusionConfig) -> BTreeMap<String, Vec<VisibilityVerdict>> {
    scenes
        .iter()
        .flat_map(|s| &s.frames)
        .collect::<Vec<_>>()
        .par_iter()
        .map(|f| (f.token.clone(), classify_frame(f, cfg)))
        .collect::<Vec<_>>()
        .into_iter()
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroLidarStats {
    pub total: usize,
    pub zero_count: usize,
    /// `zero_count / total`, 0 when the band holds no annotations.
    pub zero_fraction: f64,
    pub unoccluded_zero_count: usize,
}

pub fn zero_lidar_stats(scenes: &[Scene], mode: CountMode, band: DistanceBand, cfg: &OcclusionConfig) -> ZeroLidarStats {
    let per_frame: Vec<(usize, usize, usize)> = scenes
        .iter()
        .flat_map(|s| &s.frames)
        .collect::<Vec<_>>()
        .par_iter()
        .map(|frame| {
            let in_band: Vec<usize> = (0..frame.annotations.len())
                .filter(|&i| band.contains(frame.ego_distance(&frame.annotations[i].bbox)))
                .collect();
            let zero: Vec<usize> = in_band.iter().copied().filter(|&i| frame.annotations[i].point_count(mode) == 0).collect();
            let unoccluded = if zero.is_empty() {
                0
            } else {
                let view = FrameView::new(frame, cfg);
                zero.iter().filter(|&&i| view.verdict(i, cfg) == VisibilityVerdict::Unoccluded).count()
            };
            (in_band.len(), zero.len(), unoccluded)
        })
        .collect();
    let (total, zero_count, unoccluded_zero_count) =
        per_frame.into_iter().fold((0, 0, 0), |acc, x| (acc.0 + x.0, acc.1 + x.1, acc.2 + x.2));
    ZeroLidarStats {
        total,
        zero_count,
        zero_fraction: if total == 0 { 0.0 } else { zero_count as f64 / total as f64 },
        unoccluded_zero_count,
    }
}

/// Annotations kept as ground truth under `mode`, keyed by frame token,
/// in their original order.
pub fn build_eval_gt(scenes: &[Scene], mode: GtMode, cfg: &OcclusionConfig) -> BTreeMap<String, Vec<Annotation>> {
    let frames: Vec<&Frame> = scenes.iter().flat_map(|s| &s.frames).collect();
    frames
        .par_iter()
        .map(|frame| {
            let kept: Vec<Annotation> = match mode {
                GtMode::IncludeAll => frame.annotations.clone(),
                GtMode::DropAllZeroLidar => {
                    frame.annotations.iter().filter(|a| a.num_lidar_pts_current > 0).cloned().collect()
                }
                GtMode::IncludeUnoccludedZeroLidar => {
                    let needs_view = frame.annotations.iter().any(|a| a.num_lidar_pts_current == 0);
                    let view = needs_view.then(|| FrameView::new(frame, cfg));
                    frame
                        .annotations
                        .iter()
                        .enumerate()
                        .filter(|(i, a)| {
                            a.num_lidar_pts_current > 0
                                || view.as_ref().is_some_and(|v| v.verdict(*i, cfg) == VisibilityVerdict::Unoccluded)
                        })
                        .map(|(_, a)| a.clone())
                        .collect()
                }
            };
            (frame.token.clone(), kept)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityBin {
    pub start: f64,
    pub end: f64,
    pub total: f64,
    pub per_class: BTreeMap<ClassId, f64>,
}

/// Average annotations per frame in fixed-width ego-distance bins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    pub bin_width: f64,
    pub frame_count: usize,
    pub bins: Vec<DensityBin>,
}

impl DensityReport {
    /// Rows of `bin_start,bin_end,class,avg_per_frame`; class `all` holds the totals.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["bin_start", "bin_end", "class", "avg_per_frame"]).expect("in-memory csv");
        for bin in &self.bins {
            let rows = std::iter::once(("all".to_string(), bin.total))
                .chain(bin.per_class.iter().map(|(c, v)| (c.as_str().to_string(), *v)));
            for (class, v) in rows {
                w.write_record([bin.start.to_string(), bin.end.to_string(), class, v.to_string()]).expect("in-memory csv");
            }
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8 csv")
    }
}

pub fn annotation_density(scenes: &[Scene], bin_width: f64, max_range: f64) -> DensityReport {
    assert!(bin_width > 0.0 && max_range > 0.0, "bin width and range must be positive");
    let n_bins = (max_range / bin_width).ceil() as usize;
    let mut counts = vec![(0usize, BTreeMap::<ClassId, usize>::new()); n_bins];
    let mut frame_count = 0usize;
    for frame in scenes.iter().flat_map(|s| &s.frames) {
        frame_count += 1;
        for a in &frame.annotations {
            let d = frame.ego_distance(&a.bbox);
            if d >= max_range {
                continue;
            }
            let bin = ((d / bin_width) as usize).min(n_bins - 1);
            counts[bin].0 += 1;
            *counts[bin].1.entry(a.class).or_default() += 1;
        }
    }
    let denom = frame_count.max(1) as f64;
    let bins = counts
        .into_iter()
        .enumerate()
        .map(|(i, (total, per_class))| DensityBin {
            start: i as f64 * bin_width,
            end: ((i + 1) as f64 * bin_width).min(max_range),
            total: total as f64 / denom,
            per_class: per_class.into_iter().map(|(c, n)| (c, n as f64 / denom)).collect(),
        })
        .collect();
    DensityReport { bin_width, frame_count, bins }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditFrame {
    pub token: String,
    /// Annotations farther than 50 m from the ego vehicle.
    pub far_field_annotations: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditSample {
    pub scene_id: String,
    pub frames: Vec<AuditFrame>,
}

pub const FAR_FIELD_M: f64 = 50.0;

/// Up to `n` distinct frames drawn without replacement, in time order.
pub fn audit_sample(scene: &Scene, n: usize, seed: u64) -> AuditSample {
    let total = scene.frames.len();
    let mut picked: Vec<usize> = if total <= n {
        (0..total).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rand::seq::index::sample(&mut rng, total, n).into_vec()
    };
    picked.sort_unstable();
    let frames = picked
        .into_iter()
        .map(|i| {
            let f = &scene.frames[i];
            AuditFrame {
                token: f.token.clone(),
                far_field_annotations: f.annotations.iter().filter(|a| f.ego_distance(&a.bbox) > FAR_FIELD_M).count(),
            }
        })
        .collect();
    AuditSample { scene_id: scene.scene_id.clone(), frames }
}
