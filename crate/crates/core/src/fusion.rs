//! Late fusion of lidar and camera detection sets.
//!
//! All operations are pure. Outputs are ordered by descending score with ties
//! kept in input order, and every output box is a copy of an input box.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{ego_distance, ClassId, Detection, DetectionSet, Modality, Scene};
use crate::geom::{bev_iou_unchecked, iou_3d_unchecked, Box3D, Pose};

pub const DEFAULT_NMS_IOU: f64 = 0.2;
pub const DEFAULT_PAIR_IOU: f64 = 0.1;
pub const DEFAULT_T_C: f64 = 50.0;

#[derive(Debug, Error, PartialEq)]
pub enum FusionError {
    #[error("invalid fusion config: {0}")]
    InvalidConfig(String),
    #[error("detections reference unknown frame token(s): {}", .0.join(", "))]
    UnknownFrames(Vec<String>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IouKind {
    #[default]
    Bev,
    ThreeD,
}

impl IouKind {
    pub fn iou(self, a: &Box3D, b: &Box3D) -> f64 {
        if a == b {
            return 1.0;
        }
        match self {
            IouKind::Bev => bev_iou_unchecked(a, b),
            IouKind::ThreeD => iou_3d_unchecked(a, b),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdaNmsConfig {
    pub d1: f64,
    pub d2: f64,
    pub c1: f64,
    pub c2: f64,
}

impl Default for AdaNmsConfig {
    fn default() -> Self {
        AdaNmsConfig { d1: 10.0, d2: 70.0, c1: 0.2, c2: 0.05 }
    }
}

impl AdaNmsConfig {
    pub fn validate(&self) -> Result<(), FusionError> {
        if !(self.d1 < self.d2) || !self.d1.is_finite() || !self.d2.is_finite() {
            return Err(FusionError::InvalidConfig(format!("need d1 < d2, got d1={} d2={}", self.d1, self.d2)));
        }
        for (name, c) in [("c1", self.c1), ("c2", self.c2)] {
            if !(c > 0.0 && c <= 1.0) {
                return Err(FusionError::InvalidConfig(format!("{name} must lie in (0, 1], got {c}")));
            }
        }
        Ok(())
    }
}

/// IoU suppression threshold at ego distance `d`: linear from `c1` at `d1`
/// to `c2` at `d2`, held constant outside that range.
pub fn adanms_threshold(d: f64, cfg: &AdaNmsConfig) -> f64 {
    let t = (d - cfg.d1) * (cfg.c2 - cfg.c1) / (cfg.d2 - cfg.d1) + cfg.c1;
    t.clamp(cfg.c1.min(cfg.c2), cfg.c1.max(cfg.c2))
}

/// Greedy suppression in descending score order. Only same-class boxes
/// compete; `suppress(kept, candidate, iou)` decides each comparison.
fn greedy_nms(dets: &[Detection], kind: IouKind, suppress: impl Fn(usize, usize, f64) -> bool) -> Vec<Detection> {
    let mut order: Vec<usize> = (0..dets.len()).collect();
    order.sort_by(|&a, &b| dets[b].score.total_cmp(&dets[a].score));
    let mut kept: Vec<usize> = Vec::new();
    for c in order {
        let hit = kept.iter().any(|&k| {
            dets[k].class == dets[c].class && suppress(k, c, kind.iou(&dets[k].bbox, &dets[c].bbox))
        });
        if !hit {
            kept.push(c);
        }
    }
    kept.into_iter().map(|i| dets[i].clone()).collect()
}

/// Standard greedy NMS: a candidate is dropped when its IoU with a kept box
/// exceeds `iou_threshold`.
pub fn nms(dets: &[Detection], iou_threshold: f64, kind: IouKind) -> Vec<Detection> {
    greedy_nms(dets, kind, |_, _, iou| iou > iou_threshold)
}

/// NMS whose threshold follows [`adanms_threshold`] at the mean ego distance
/// of the two boxes compared.
pub fn adanms(dets: &[Detection], cfg: &AdaNmsConfig, ego_pose: &Pose, kind: IouKind) -> Vec<Detection> {
    let dist: Vec<f64> = dets.iter().map(|d| ego_distance(ego_pose, &d.bbox)).collect();
    greedy_nms(dets, kind, |k, c, iou| iou > adanms_threshold((dist[k] + dist[c]) / 2.0, cfg))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Suppression {
    Fixed { iou: f64 },
    Adaptive(AdaNmsConfig),
}

fn as_fused(d: &Detection) -> Detection {
    Detection { modality: Modality::Fused, provenance: Some(d.provenance.unwrap_or(d.modality)), ..d.clone() }
}

/// Suppression over the union of both sets. Outputs are tagged fused and
/// remember their source modality.
pub fn nms_fusion(
    lidar: &[Detection],
    camera: &[Detection],
    suppression: &Suppression,
    ego_pose: &Pose,
    kind: IouKind,
) -> Vec<Detection> {
    let union: Vec<Detection> = lidar.iter().chain(camera).map(as_fused).collect();
    match suppression {
        Suppression::Fixed { iou } => nms(&union, *iou, kind),
        Suppression::Adaptive(cfg) => adanms(&union, cfg, ego_pose, kind),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FarSource {
    NmsFused,
    #[default]
    AdaNmsFused,
    CameraOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DistanceFusionConfig {
    /// Per-class gate; classes not listed use [`DEFAULT_T_C`].
    pub t_c: BTreeMap<ClassId, f64>,
    pub far_source: FarSource,
}

impl Default for DistanceFusionConfig {
    fn default() -> Self {
        DistanceFusionConfig { t_c: ClassId::ALL.iter().map(|c| (*c, DEFAULT_T_C)).collect(), far_source: FarSource::default() }
    }
}

impl DistanceFusionConfig {
    pub fn uniform(t_c: f64, far_source: FarSource) -> Self {
        DistanceFusionConfig { t_c: ClassId::ALL.iter().map(|c| (*c, t_c)).collect(), far_source }
    }

    pub fn gate(&self, class: ClassId) -> f64 {
        self.t_c.get(&class).copied().unwrap_or(DEFAULT_T_C)
    }

    pub fn validate(&self, max_range: f64) -> Result<(), FusionError> {
        for (c, t) in &self.t_c {
            if !(*t > 0.0 && *t <= max_range) {
                return Err(FusionError::InvalidConfig(format!("t_c for {c} must lie in (0, {max_range}], got {t}")));
            }
        }
        Ok(())
    }
}

fn by_score(mut v: Vec<Detection>) -> Vec<Detection> {
    v.sort_by(|a, b| b.score.total_cmp(&a.score));
    v
}

/// Lidar detections nearer than the class gate plus far-source detections at
/// or beyond it.
pub fn distance_fusion(lidar: &[Detection], far: &[Detection], cfg: &DistanceFusionConfig, ego_pose: &Pose) -> Vec<Detection> {
    let near = lidar.iter().filter(|d| ego_distance(ego_pose, &d.bbox) < cfg.gate(d.class));
    let far = far.iter().filter(|d| ego_distance(ego_pose, &d.bbox) >= cfg.gate(d.class));
    by_score(near.chain(far).cloned().collect())
}

/// Odds-product combination of two independent confidences under a uniform
/// prior. Returns 0.5 when the inputs flatly contradict (one 0, the other 1).
pub fn bayes_combine(s_l: f64, s_c: f64) -> f64 {
    let agree = s_l * s_c;
    let denom = agree + (1.0 - s_l) * (1.0 - s_c);
    if denom == 0.0 {
        0.5
    } else {
        agree / denom
    }
}

/// Greedy one-to-one pairing of same-class cross-modality detections with
/// BEV IoU above `pair_iou`, best IoU first. Returns `(lidar, camera, iou)`.
fn pair_greedy(lidar: &[Detection], camera: &[Detection], pair_iou: f64) -> Vec<(usize, usize, f64)> {
    let mut cands: Vec<(usize, usize, f64)> = Vec::new();
    for (i, l) in lidar.iter().enumerate() {
        for (j, c) in camera.iter().enumerate() {
            if l.class != c.class {
                continue;
            }
            let iou = IouKind::Bev.iou(&l.bbox, &c.bbox);
            if iou > pair_iou {
                cands.push((i, j, iou));
            }
        }
    }
    cands.sort_by(|a, b| b.2.total_cmp(&a.2));
    let mut used_l = BTreeSet::new();
    let mut used_c = BTreeSet::new();
    cands.into_iter().filter(|&(i, j, _)| !used_l.contains(&i) && !used_c.contains(&j) && used_l.insert(i) && used_c.insert(j)).collect()
}

/// Paired detections keep the lidar box and take the combined score; the
/// rest pass through unchanged.
pub fn bayes_score_fusion(lidar: &[Detection], camera: &[Detection], pair_iou: f64) -> Vec<Detection> {
    let pairs = pair_greedy(lidar, camera, pair_iou);
    let mut out: Vec<Option<Detection>> = lidar.iter().chain(camera).cloned().map(Some).collect();
    for (i, j, _) in pairs {
        let l = &lidar[i];
        out[i] = Some(Detection { score: bayes_combine(l.score, camera[j].score), ..as_fused(l) });
        out[lidar.len() + j] = None;
    }
    by_score(out.into_iter().flatten().collect())
}

/// Pairwise feature of a lidar candidate `i` and a camera candidate `j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClocsFeature {
    pub iou3d: f64,
    pub s_i: f64,
    pub s_j: f64,
    /// Distance between the two box centers.
    pub d_ij: f64,
    /// Ego distance of the camera candidate.
    pub d_j: f64,
}

/// Features of every same-class pair with positive 3D IoU, keyed by
/// (lidar index, camera index).
pub fn clocs_features(lidar: &[Detection], camera: &[Detection], ego_pose: &Pose) -> BTreeMap<(usize, usize), ClocsFeature> {
    let cam_dist: Vec<f64> = camera.iter().map(|c| ego_distance(ego_pose, &c.bbox)).collect();
    let mut out = BTreeMap::new();
    for (i, l) in lidar.iter().enumerate() {
        for (j, c) in camera.iter().enumerate() {
            if l.class != c.class {
                continue;
            }
            let iou3d = IouKind::ThreeD.iou(&l.bbox, &c.bbox);
            if iou3d > 0.0 {
                let d_ij = (l.bbox.center - c.bbox.center).norm();
                out.insert((i, j), ClocsFeature { iou3d, s_i: l.score, s_j: c.score, d_ij, d_j: cam_dist[j] });
            }
        }
    }
    out
}

pub trait ClocsScorer {
    fn score(&self, f: &ClocsFeature) -> f64;
}

impl<F: Fn(&ClocsFeature) -> f64> ClocsScorer for F {
    fn score(&self, f: &ClocsFeature) -> f64 {
        self(f)
    }
}

/// `sigmoid(w · [iou3d, s_i, s_j, -d_ij/10, d_j/80] + b)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LogisticScorer {
    pub weights: [f64; 5],
    pub bias: f64,
}

impl Default for LogisticScorer {
    fn default() -> Self {
        LogisticScorer { weights: [2.0, 4.0, 2.0, 1.0, 0.5], bias: -3.5 }
    }
}

impl ClocsScorer for LogisticScorer {
    fn score(&self, f: &ClocsFeature) -> f64 {
        let x = [f.iou3d, f.s_i, f.s_j, -f.d_ij / 10.0, f.d_j / 80.0];
        let z: f64 = self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.bias;
        1.0 / (1.0 + (-z).exp())
    }
}

/// Rescores each lidar detection from its best-IoU camera partner; lidar
/// detections without a partner keep their score. Scores are clamped to [0, 1].
pub fn clocs_score(lidar: &[Detection], features: &BTreeMap<(usize, usize), ClocsFeature>, scorer: &dyn ClocsScorer) -> Vec<Detection> {
    let mut best: BTreeMap<usize, &ClocsFeature> = BTreeMap::new();
    for ((i, _), f) in features {
        // ascending j, so strict > keeps the lowest camera index on ties
        if best.get(i).is_none_or(|b| f.iou3d > b.iou3d) {
            best.insert(*i, f);
        }
    }
    let out = lidar
        .iter()
        .enumerate()
        .map(|(i, d)| match best.get(&i) {
            Some(f) => Detection { score: scorer.score(f).clamp(0.0, 1.0), ..as_fused(d) },
            None => d.clone(),
        })
        .collect();
    by_score(out)
}

/// `score' = clamp(scale * score + offset, 0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Affine {
    pub scale: f64,
    pub offset: f64,
}

impl Affine {
    pub fn apply(&self, s: f64) -> f64 {
        (self.scale * s + self.offset).clamp(0.0, 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FusionMethod {
    Nms,
    #[default]
    AdaNms,
    Distance,
    Bayes,
    Clocs,
}

impl std::str::FromStr for FusionMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "nms" => Ok(FusionMethod::Nms),
            "adanms" => Ok(FusionMethod::AdaNms),
            "distance" => Ok(FusionMethod::Distance),
            "bayes" => Ok(FusionMethod::Bayes),
            "clocs" => Ok(FusionMethod::Clocs),
            other => Err(format!("unknown fusion method {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FusionConfig {
    pub method: FusionMethod,
    pub iou_kind: IouKind,
    pub nms_iou: f64,
    pub adanms: AdaNmsConfig,
    pub distance: DistanceFusionConfig,
    pub pair_iou: f64,
    pub scorer: LogisticScorer,
    /// Optional per-class rescale of camera scores before fusion.
    pub camera_rescale: BTreeMap<ClassId, Affine>,
    pub max_range: f64,
}

impl Default for FusionConfig {
    fn default() -> Self {
        FusionConfig {
            method: FusionMethod::default(),
            iou_kind: IouKind::Bev,
            nms_iou: DEFAULT_NMS_IOU,
            adanms: AdaNmsConfig::default(),
            distance: DistanceFusionConfig::default(),
            pair_iou: DEFAULT_PAIR_IOU,
            scorer: LogisticScorer::default(),
            camera_rescale: BTreeMap::new(),
            max_range: 80.0,
        }
    }
}

impl FusionConfig {
    pub fn validate(&self) -> Result<(), FusionError> {
        self.adanms.validate()?;
        self.distance.validate(self.max_range)?;
        for (name, v) in [("nms_iou", self.nms_iou), ("pair_iou", self.pair_iou)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(FusionError::InvalidConfig(format!("{name} must lie in [0, 1], got {v}")));
            }
        }
        Ok(())
    }

    /// Fuses the detections of one frame.
    pub fn fuse_frame(&self, lidar: &[Detection], camera: &[Detection], ego_pose: &Pose) -> Vec<Detection> {
        let camera: Vec<Detection> = camera
            .iter()
            .map(|d| match self.camera_rescale.get(&d.class) {
                Some(a) => Detection { score: a.apply(d.score), ..d.clone() },
                None => d.clone(),
            })
            .collect();
        let fixed = Suppression::Fixed { iou: self.nms_iou };
        let adaptive = Suppression::Adaptive(self.adanms);
        let out = match self.method {
            FusionMethod::Nms => nms_fusion(lidar, &camera, &fixed, ego_pose, self.iou_kind),
            FusionMethod::AdaNms => nms_fusion(lidar, &camera, &adaptive, ego_pose, self.iou_kind),
            FusionMethod::Distance => {
                let far = match self.distance.far_source {
                    FarSource::NmsFused => nms_fusion(lidar, &camera, &fixed, ego_pose, self.iou_kind),
                    FarSource::AdaNmsFused => nms_fusion(lidar, &camera, &adaptive, ego_pose, self.iou_kind),
                    FarSource::CameraOnly => camera.clone(),
                };
                distance_fusion(lidar, &far, &self.distance, ego_pose)
            }
            FusionMethod::Bayes => bayes_score_fusion(lidar, &camera, self.pair_iou),
            FusionMethod::Clocs => {
                let feats = clocs_features(lidar, &camera, ego_pose);
                clocs_score(lidar, &feats, &self.scorer)
            }
        };
        out.iter().map(as_fused).collect()
    }
}

/// Fuses two detection sets frame by frame, taking ego poses from `scenes`.
pub fn fuse_sets(lidar: &DetectionSet, camera: &DetectionSet, scenes: &[Scene], cfg: &FusionConfig) -> Result<DetectionSet, FusionError> {
    cfg.validate()?;
    let poses: BTreeMap<&str, &Pose> =
        scenes.iter().flat_map(|s| &s.frames).map(|f| (f.token.as_str(), &f.ego_pose)).collect();
    let tokens: BTreeSet<&String> = lidar.keys().chain(camera.keys()).collect();
    let unknown: Vec<String> = tokens.iter().filter(|t| !poses.contains_key(t.as_str())).map(|t| t.to_string()).collect();
    if !unknown.is_empty() {
        return Err(FusionError::UnknownFrames(unknown));
    }
    let tokens: Vec<&String> = tokens.into_iter().collect();
    Ok(tokens
        .par_iter()
        .map(|tok| {
            let l = lidar.get(*tok).map_or(&[][..], |v| v.as_slice());
            let c = camera.get(*tok).map_or(&[][..], |v| v.as_slice());
            ((*tok).clone(), cfg.fuse_frame(l, c, poses[tok.as_str()]))
        })
        .collect::<Vec<_>>()
        .into_iter()
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{FrameTag, Size3, Vec3};
    use approx::assert_abs_diff_eq;

    fn car(x: f64, y: f64, score: f64, modality: Modality) -> Detection {
        let b = Box3D::new(Vec3::new(x, y, 0.8), Size3::new(4.0, 2.0, 1.6), 0.0, FrameTag::Global).unwrap();
        Detection::new(b, ClassId::Car, score, modality)
    }

    /// Shift along the length axis giving BEV IoU `iou` for two 4 x 2 boxes.
    fn shift_for(iou: f64) -> f64 {
        // overlap o: 2o / (16 - 2o) = iou
        4.0 - 8.0 * iou / (1.0 + iou)
    }

    #[test]
    fn adanms_endpoints() {
        let cfg = AdaNmsConfig::default();
        assert_abs_diff_eq!(adanms_threshold(10.0, &cfg), 0.2, epsilon = 1e-12);
        assert_abs_diff_eq!(adanms_threshold(70.0, &cfg), 0.05, epsilon = 1e-12);
        assert_abs_diff_eq!(adanms_threshold(40.0, &cfg), 0.125, epsilon = 1e-12);
        assert_abs_diff_eq!(adanms_threshold(60.0, &cfg), 0.075, epsilon = 1e-12);
        assert_eq!(adanms_threshold(0.0, &cfg), 0.2);
        assert_eq!(adanms_threshold(120.0, &cfg), 0.05);
    }

    #[test]
    fn adanms_config_validation() {
        assert!(AdaNmsConfig::default().validate().is_ok());
        assert!(AdaNmsConfig { d1: 70.0, d2: 10.0, ..Default::default() }.validate().is_err());
        assert!(AdaNmsConfig { c2: 0.0, ..Default::default() }.validate().is_err());
    }

    #[test]
    fn nms_trivial_cases() {
        let disjoint = [car(0.0, 10.0, 0.9, Modality::Lidar), car(10.0, 10.0, 0.8, Modality::Lidar)];
        assert_eq!(nms(&disjoint, 0.2, IouKind::Bev).len(), 2);
        let same = [car(0.0, 10.0, 0.5, Modality::Lidar), car(0.0, 10.0, 0.9, Modality::Lidar)];
        assert_eq!(nms(&same, 0.2, IouKind::Bev), vec![same[1].clone()]);
    }

    #[test]
    fn nms_chain_keeps_a_and_c() {
        let s = shift_for(0.3);
        let a = car(0.0, 10.0, 0.9, Modality::Lidar);
        let b = car(s, 10.0, 0.8, Modality::Lidar);
        let c = car(2.0 * s, 10.0, 0.7, Modality::Lidar);
        assert_abs_diff_eq!(IouKind::Bev.iou(&a.bbox, &b.bbox), 0.3, epsilon = 1e-9);
        assert_eq!(IouKind::Bev.iou(&a.bbox, &c.bbox), 0.0);
        assert_eq!(nms(&[a.clone(), b, c.clone()], 0.2, IouKind::Bev), vec![a, c]);
    }

    #[test]
    fn nms_only_compares_same_class() {
        let a = car(0.0, 10.0, 0.9, Modality::Lidar);
        let mut b = a.clone();
        b.class = ClassId::Truck;
        assert_eq!(nms(&[a, b], 0.2, IouKind::Bev).len(), 2);
    }

    #[test]
    fn adanms_far_suppresses_near_keeps() {
        let s = shift_for(0.1);
        let cfg = AdaNmsConfig::default();
        let far = [car(0.0, 60.0, 0.9, Modality::Lidar), car(s, 60.0, 0.8, Modality::Lidar)];
        assert_eq!(adanms(&far, &cfg, &Pose::IDENTITY, IouKind::Bev).len(), 1);
        let near = [car(0.0, 10.0, 0.9, Modality::Lidar), car(s, 10.0, 0.8, Modality::Lidar)];
        assert_eq!(adanms(&near, &cfg, &Pose::IDENTITY, IouKind::Bev).len(), 2);
        let one = [car(0.0, 30.0, 0.4, Modality::Camera)];
        assert_eq!(adanms(&one, &cfg, &Pose::IDENTITY, IouKind::Bev), one.to_vec());
    }

    #[test]
    fn nms_fusion_prefers_higher_score() {
        let l = [car(0.0, 60.0, 0.9, Modality::Lidar)];
        let c = [car(0.0, 60.0, 0.7, Modality::Camera)];
        let out = nms_fusion(&l, &c, &Suppression::Fixed { iou: 0.2 }, &Pose::IDENTITY, IouKind::Bev);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].bbox, l[0].bbox);
        assert_eq!(out[0].modality, Modality::Fused);
        assert_eq!(out[0].provenance, Some(Modality::Lidar));

        let alone = nms_fusion(&l, &[], &Suppression::Fixed { iou: 0.2 }, &Pose::IDENTITY, IouKind::Bev);
        assert_eq!(alone[0].bbox, nms(&l, 0.2, IouKind::Bev)[0].bbox);
    }

    #[test]
    fn distance_fusion_partition() {
        let lidar = [car(0.0, 30.0, 0.8, Modality::Lidar), car(0.0, 60.0, 0.6, Modality::Lidar)];
        let fused = [car(0.0, 60.0, 0.7, Modality::Fused), car(0.0, 20.0, 0.9, Modality::Fused)];
        let out = distance_fusion(&lidar, &fused, &DistanceFusionConfig::default(), &Pose::IDENTITY);
        assert_eq!(out, vec![lidar[0].clone(), fused[0].clone()]);

        let all_lidar = DistanceFusionConfig::uniform(f64::INFINITY, FarSource::CameraOnly);
        assert_eq!(distance_fusion(&lidar, &fused, &all_lidar, &Pose::IDENTITY), lidar.to_vec());
        let all_far = DistanceFusionConfig::uniform(0.0, FarSource::CameraOnly);
        assert_eq!(distance_fusion(&lidar, &fused, &all_far, &Pose::IDENTITY), by_score(fused.to_vec()));

        // the gate itself belongs to the far side
        let at_gate = [car(0.0, 50.0, 0.5, Modality::Lidar)];
        assert!(distance_fusion(&at_gate, &[], &DistanceFusionConfig::default(), &Pose::IDENTITY).is_empty());
    }

    #[test]
    fn distance_config_validation() {
        assert!(DistanceFusionConfig::default().validate(80.0).is_ok());
        assert!(DistanceFusionConfig::uniform(0.0, FarSource::NmsFused).validate(80.0).is_err());
        assert!(DistanceFusionConfig::uniform(90.0, FarSource::NmsFused).validate(80.0).is_err());
    }

    #[test]
    fn bayes_values() {
        assert_eq!(bayes_combine(0.5, 0.5), 0.5);
        assert_abs_diff_eq!(bayes_combine(0.8, 0.8), 16.0 / 17.0, epsilon = 1e-15);
        assert_abs_diff_eq!(bayes_combine(0.3, 0.5), 0.3, epsilon = 1e-15);
        assert_eq!(bayes_combine(0.0, 1.0), 0.5);
        assert_eq!(bayes_combine(1.0, 1.0), 1.0);
    }

    #[test]
    fn bayes_fusion_pairs_and_passes_through() {
        let l = [car(0.0, 40.0, 0.8, Modality::Lidar), car(20.0, 40.0, 0.3, Modality::Lidar)];
        let c = [car(0.2, 40.0, 0.8, Modality::Camera), car(-20.0, 40.0, 0.6, Modality::Camera)];
        let out = bayes_score_fusion(&l, &c, DEFAULT_PAIR_IOU);
        assert_eq!(out.len(), 3);
        assert_eq!(out[0].bbox, l[0].bbox);
        assert_abs_diff_eq!(out[0].score, 16.0 / 17.0, epsilon = 1e-15);
        assert_eq!(out[1], c[1]);
        assert_eq!(out[2], l[1]);

        let apart = bayes_score_fusion(&l[1..], &c[1..], DEFAULT_PAIR_IOU);
        assert_eq!(apart, vec![c[1].clone(), l[1].clone()]);
    }

    #[test]
    fn clocs_feature_of_coincident_pair() {
        let l = [car(0.0, 60.0, 0.9, Modality::Lidar)];
        let c = [car(0.0, 60.0, 0.7, Modality::Camera)];
        let f = clocs_features(&l, &c, &Pose::IDENTITY);
        assert_eq!(f.len(), 1);
        assert_eq!(f[&(0, 0)], ClocsFeature { iou3d: 1.0, s_i: 0.9, s_j: 0.7, d_ij: 0.0, d_j: 60.0 });
        assert!(clocs_features(&l, &[car(10.0, 60.0, 0.7, Modality::Camera)], &Pose::IDENTITY).is_empty());
    }

    #[test]
    fn clocs_scorers() {
        let l = [car(0.0, 60.0, 0.9, Modality::Lidar), car(30.0, 60.0, 0.4, Modality::Lidar)];
        let c = [car(0.5, 60.0, 0.7, Modality::Camera)];
        let feats = clocs_features(&l, &c, &Pose::IDENTITY);

        let identity = |f: &ClocsFeature| f.s_i;
        let same = clocs_score(&l, &feats, &identity);
        assert_eq!(same.iter().map(|d| d.score).collect::<Vec<_>>(), vec![0.9, 0.4]);

        let flat = LogisticScorer { weights: [0.0; 5], bias: 0.0 };
        let half = clocs_score(&l, &feats, &flat);
        assert_eq!(half.iter().map(|d| d.score).collect::<Vec<_>>(), vec![0.5, 0.4]);

        let w = LogisticScorer { weights: [1.0, 2.0, -1.0, 0.5, 1.0], bias: -0.25 };
        let f = feats[&(0, 0)];
        let z = f.iou3d + 2.0 * 0.9 - 0.7 + 0.5 * (-0.05) + 60f64.hypot(0.5) / 80.0 - 0.25;
        assert_abs_diff_eq!(f.d_ij, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(w.score(&f), 1.0 / (1.0 + (-z).exp()), epsilon = 1e-12);
    }

    #[test]
    fn fuse_sets_rejects_unknown_frames() {
        let mut l = DetectionSet::new();
        l.insert("nowhere".into(), vec![car(0.0, 10.0, 0.5, Modality::Lidar)]);
        assert_eq!(
            fuse_sets(&l, &DetectionSet::new(), &[], &FusionConfig::default()),
            Err(FusionError::UnknownFrames(vec!["nowhere".into()]))
        );
    }
}
