//! Distance-banded AP/mAP with fixed and distance-adaptive matching tolerances.
//!
//! Matching is greedy by descending score. A detection may only claim a
//! ground-truth box from the same frame that its tolerance accepts, and takes
//! the nearest such box by ground-plane center distance. The tolerance is
//! always evaluated at the ground-truth box's distance from the ego vehicle.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{Annotation, ClassId, DetectionSet, Frame, Scene};
use crate::visibility::{build_eval_gt, GtMode, OcclusionConfig};

/// Lateral coefficient of the elliptical acceptance region.
pub const ELLIPSE_LATERAL_COEF: f64 = 312.5;
/// Longitudinal coefficient of the elliptical acceptance region.
pub const ELLIPSE_LONGITUDINAL_COEF: f64 = 78.125;

pub const DEFAULT_THRESHOLDS: [f64; 4] = [0.5, 1.0, 2.0, 4.0];

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("detections reference unknown frame token(s): {}", .0.join(", "))]
    UnknownFrames(Vec<String>),
    #[error("invalid evaluation config: {0}")]
    InvalidConfig(String),
}

/// Linear tolerance: 4 m at 50 m, 0 m at the ego vehicle.
pub fn thresh_linear(d: f64) -> f64 {
    d / 12.5
}

/// Quadratic tolerance through 0.5 m at 10 m, 1 m at 20 m and 4 m at 50 m.
pub fn thresh_quadratic(d: f64) -> f64 {
    0.25 + 0.0125 * d + 0.00125 * d * d
}

/// Elliptical acceptance in ego coordinates (+x lateral, +y longitudinal).
/// A ground truth at the ego origin accepts only an exact hit.
pub fn elliptical_match(pred: [f64; 2], gt: [f64; 2]) -> bool {
    let dx = pred[0] - gt[0];
    let dy = pred[1] - gt[1];
    let r2 = gt[0] * gt[0] + gt[1] * gt[1];
    let lhs = ELLIPSE_LATERAL_COEF * dx * dx + ELLIPSE_LONGITUDINAL_COEF * dy * dy;
    if r2 == 0.0 {
        return lhs == 0.0;
    }
    lhs / r2 <= 1.0
}

/// (lateral, longitudinal) semi-axes of the elliptical region at range `r`.
pub fn elliptical_semi_axes(r: f64) -> (f64, f64) {
    ((r * r / ELLIPSE_LATERAL_COEF).sqrt(), (r * r / ELLIPSE_LONGITUDINAL_COEF).sqrt())
}

/// Matching policy for an evaluation run.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "meters")]
pub enum ThresholdScheme {
    /// AP is averaged over one fixed-threshold run per entry.
    DefaultSet(Vec<f64>),
    Fixed(f64),
    #[default]
    Linear,
    Quadratic,
    Elliptical,
}

impl ThresholdScheme {
    pub fn default_set() -> Self {
        ThresholdScheme::DefaultSet(DEFAULT_THRESHOLDS.to_vec())
    }

    pub fn validate(&self) -> Result<(), EvalError> {
        match self {
            ThresholdScheme::Fixed(t) if !(*t > 0.0 && t.is_finite()) => {
                Err(EvalError::InvalidConfig(format!("fixed threshold must be positive, got {t}")))
            }
            ThresholdScheme::DefaultSet(ts) => {
                if ts.is_empty() || ts.iter().any(|t| !(*t > 0.0)) || ts.windows(2).any(|w| w[0] >= w[1]) {
                    Err(EvalError::InvalidConfig(format!("threshold set {ts:?} must be positive and strictly increasing")))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    /// The individual tolerances whose APs are averaged.
    pub fn tolerances(&self) -> Vec<Tolerance> {
        match self {
            ThresholdScheme::DefaultSet(ts) => ts.iter().map(|t| Tolerance::Fixed(*t)).collect(),
            ThresholdScheme::Fixed(t) => vec![Tolerance::Fixed(*t)],
            ThresholdScheme::Linear => vec![Tolerance::Linear],
            ThresholdScheme::Quadratic => vec![Tolerance::Quadratic],
            ThresholdScheme::Elliptical => vec![Tolerance::Elliptical],
        }
    }

    pub fn label(&self) -> String {
        match self {
            ThresholdScheme::DefaultSet(_) => "default".into(),
            ThresholdScheme::Fixed(t) => format!("fixed{t}"),
            ThresholdScheme::Linear => "linear".into(),
            ThresholdScheme::Quadratic => "quadratic".into(),
            ThresholdScheme::Elliptical => "elliptical".into(),
        }
    }
}

/// A single matching criterion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "meters")]
pub enum Tolerance {
    Fixed(f64),
    Linear,
    Quadratic,
    Elliptical,
}

impl Tolerance {
    /// Whether `pred` may match `gt`; both are ego-frame ground-plane centers.
    pub fn accepts(&self, pred: [f64; 2], gt: [f64; 2]) -> bool {
        let gt_dist = gt[0].hypot(gt[1]);
        match_tolerance(*self, gt_dist)(pred, gt)
    }
}

/// Predicate over (prediction, ground truth) ego-frame centers for a ground
/// truth at distance `gt_dist`.
pub fn match_tolerance(tol: Tolerance, gt_dist: f64) -> impl Fn([f64; 2], [f64; 2]) -> bool {
    let radius = match tol {
        Tolerance::Fixed(t) => Some(t),
        Tolerance::Linear => Some(thresh_linear(gt_dist)),
        Tolerance::Quadratic => Some(thresh_quadratic(gt_dist)),
        Tolerance::Elliptical => None,
    };
    move |pred: [f64; 2], gt: [f64; 2]| match radius {
        Some(r) => (pred[0] - gt[0]).hypot(pred[1] - gt[1]) <= r,
        None => elliptical_match(pred, gt),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceBand {
    pub min_m: f64,
    pub max_m: f64,
}

impl DistanceBand {
    pub const fn new(min_m: f64, max_m: f64) -> Self {
        DistanceBand { min_m, max_m }
    }

    /// Half-open: `[min_m, max_m)`.
    pub fn contains(&self, d: f64) -> bool {
        d >= self.min_m && d < self.max_m
    }

    pub fn label(&self) -> String {
        format!("{}-{}m", self.min_m, self.max_m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ApMode {
    /// 101-point interpolated area under the PR curve.
    FullArea,
    /// Recall grid from 0.10 with precision offset by 0.1 and rescaled.
    #[default]
    #[serde(rename = "nuscenes")]
    NuScenesNormalized,
}

/// Per-class evaluation ranges of the legacy 50 m benchmark protocol.
pub fn legacy_class_ranges() -> BTreeMap<ClassId, f64> {
    BTreeMap::from([
        (ClassId::Car, 50.0),
        (ClassId::Truck, 50.0),
        (ClassId::Bus, 50.0),
        (ClassId::Pedestrian, 40.0),
        (ClassId::Motorcycle, 40.0),
        (ClassId::TrafficCone, 30.0),
    ])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalConfig {
    pub bands: Vec<DistanceBand>,
    pub classes: Vec<ClassId>,
    pub scheme: ThresholdScheme,
    pub max_range: f64,
    pub per_class_legacy_ranges: Option<BTreeMap<ClassId, f64>>,
    pub ap_mode: ApMode,
    pub gt_mode: GtMode,
    pub occlusion: OcclusionConfig,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            bands: vec![DistanceBand::new(0.0, 50.0), DistanceBand::new(50.0, 80.0)],
            classes: vec![ClassId::Car, ClassId::Truck, ClassId::Pedestrian],
            scheme: ThresholdScheme::Linear,
            max_range: 80.0,
            per_class_legacy_ranges: None,
            ap_mode: ApMode::NuScenesNormalized,
            gt_mode: GtMode::IncludeUnoccludedZeroLidar,
            occlusion: OcclusionConfig::default(),
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<(), EvalError> {
        self.scheme.validate()?;
        if self.bands.is_empty() {
            return Err(EvalError::InvalidConfig("at least one distance band is required".into()));
        }
        for b in &self.bands {
            if !(b.min_m >= 0.0 && b.min_m < b.max_m) {
                return Err(EvalError::InvalidConfig(format!("band {} is empty or negative", b.label())));
            }
            if b.max_m > self.max_range {
                return Err(EvalError::InvalidConfig(format!("band {} exceeds max_range {}", b.label(), self.max_range)));
            }
        }
        if self.bands.windows(2).any(|w| w[0].max_m > w[1].min_m) {
            return Err(EvalError::InvalidConfig("bands must be sorted and non-overlapping".into()));
        }
        if self.classes.is_empty() {
            return Err(EvalError::InvalidConfig("no classes to evaluate".into()));
        }
        Ok(())
    }

    fn class_range(&self, class: ClassId) -> f64 {
        self.per_class_legacy_ranges
            .as_ref()
            .and_then(|m| m.get(&class).copied())
            .unwrap_or(self.max_range)
            .min(self.max_range)
    }
}

/// Detection as seen by the matcher.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchDet {
    pub frame: usize,
    /// Ego-frame ground-plane center.
    pub xy: [f64; 2],
    pub score: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchGt {
    pub frame: usize,
    pub xy: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MatchLabel {
    /// Index of the claimed ground truth.
    Tp(usize),
    Fp,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult {
    /// One label per input detection, in input order.
    pub labels: Vec<MatchLabel>,
    /// Detection indices in processing order (descending score, stable).
    pub order: Vec<usize>,
    pub unmatched_gt: Vec<usize>,
}

/// Detection indices by descending score; equal scores keep input order.
pub fn score_order(scores: impl Iterator<Item = f64>) -> Vec<usize> {
    let scores: Vec<f64> = scores.collect();
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    order
}

pub fn greedy_match(dets: &[MatchDet], gts: &[MatchGt], tol: Tolerance) -> MatchResult {
    let mut by_frame: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, g) in gts.iter().enumerate() {
        by_frame.entry(g.frame).or_default().push(i);
    }
    let matchers: Vec<_> = gts.iter().map(|g| match_tolerance(tol, g.xy[0].hypot(g.xy[1]))).collect();
    let mut taken = vec![false; gts.len()];
    let mut labels = vec![MatchLabel::Fp; dets.len()];
    let order = score_order(dets.iter().map(|d| d.score));
    for &di in &order {
        let d = &dets[di];
        let Some(cands) = by_frame.get(&d.frame) else { continue };
        let mut best: Option<(f64, usize)> = None;
        for &gi in cands {
            if taken[gi] || !matchers[gi](d.xy, gts[gi].xy) {
                continue;
            }
            let dist = (d.xy[0] - gts[gi].xy[0]).hypot(d.xy[1] - gts[gi].xy[1]);
            if best.is_none_or(|(bd, _)| dist < bd) {
                best = Some((dist, gi));
            }
        }
        if let Some((_, gi)) = best {
            taken[gi] = true;
            labels[di] = MatchLabel::Tp(gi);
        }
    }
    let unmatched_gt = (0..gts.len()).filter(|&i| !taken[i]).collect();
    MatchResult { labels, order, unmatched_gt }
}

/// One operating point: everything scoring at least `score` is kept.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrPoint {
    pub recall: f64,
    pub precision: f64,
    pub score: f64,
    pub tp: usize,
    pub fp: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrCurve {
    pub points: Vec<PrPoint>,
    pub num_gt: usize,
}

impl PrCurve {
    /// Curve from labels listed in processing order.
    pub fn from_ranked(ranked: &[(f64, bool)], num_gt: usize) -> PrCurve {
        let mut tp = 0;
        let mut fp = 0;
        let points = ranked
            .iter()
            .map(|&(score, is_tp)| {
                if is_tp {
                    tp += 1;
                } else {
                    fp += 1;
                }
                PrPoint {
                    recall: if num_gt == 0 { 0.0 } else { tp as f64 / num_gt as f64 },
                    precision: tp as f64 / (tp + fp) as f64,
                    score,
                    tp,
                    fp,
                }
            })
            .collect();
        PrCurve { points, num_gt }
    }

    pub fn from_match(dets: &[MatchDet], m: &MatchResult, num_gt: usize) -> PrCurve {
        let ranked: Vec<(f64, bool)> =
            m.order.iter().map(|&i| (dets[i].score, matches!(m.labels[i], MatchLabel::Tp(_)))).collect();
        PrCurve::from_ranked(&ranked, num_gt)
    }
}

/// Interpolated precision at recall grid point `k / 100`: the best precision
/// among operating points whose recall reaches it (exact integer comparison).
fn interpolated_precisions(curve: &PrCurve) -> Vec<f64> {
    let n = curve.points.len();
    let mut suffix_max = vec![0.0f64; n + 1];
    for i in (0..n).rev() {
        suffix_max[i] = suffix_max[i + 1].max(curve.points[i].precision);
    }
    (0..=100usize)
        .map(|k| {
            let first = curve.points.partition_point(|p| p.tp * 100 < k * curve.num_gt);
            suffix_max[first]
        })
        .collect()
}

/// `None` when the curve has no ground truth.
pub fn average_precision(curve: &PrCurve, mode: ApMode) -> Option<f64> {
    if curve.num_gt == 0 {
        return None;
    }
    let p = interpolated_precisions(curve);
    Some(match mode {
        ApMode::FullArea => p.iter().sum::<f64>() / p.len() as f64,
        ApMode::NuScenesNormalized => {
            let tail = &p[10..];
            tail.iter().map(|x| (x - 0.1).max(0.0) / 0.9).sum::<f64>() / tail.len() as f64
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToleranceResult {
    pub tolerance: Tolerance,
    pub ap: Option<f64>,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub curve: PrCurve,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassBandResult {
    pub class: ClassId,
    pub band: DistanceBand,
    pub num_gt: usize,
    pub num_det: usize,
    /// Mean over `per_tolerance`; `None` without ground truth.
    pub ap: Option<f64>,
    pub per_tolerance: Vec<ToleranceResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandSummary {
    pub band: DistanceBand,
    /// Mean AP over classes with ground truth in the band.
    pub map: Option<f64>,
    pub classes_scored: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub config: EvalConfig,
    pub results: Vec<ClassBandResult>,
    pub bands: Vec<BandSummary>,
}

impl EvalReport {
    pub fn result(&self, class: ClassId, band: DistanceBand) -> Option<&ClassBandResult> {
        self.results.iter().find(|r| r.class == class && r.band == band)
    }

    pub fn map(&self, band: DistanceBand) -> Option<f64> {
        self.bands.iter().find(|b| b.band == band).and_then(|b| b.map)
    }
}

/// Matcher inputs for one (class, band) cell.
fn cell_inputs(
    cfg: &EvalConfig,
    class: ClassId,
    band: DistanceBand,
    frames: &[&Frame],
    gt: &[&[Annotation]],
    dets: &[(usize, &crate::dataset::Detection)],
) -> (Vec<MatchDet>, Vec<MatchGt>) {
    let limit = cfg.class_range(class);
    let keep = |d: f64| band.contains(d) && d < limit;
    let mut gts = Vec::new();
    for (fi, anns) in gt.iter().enumerate() {
        for a in anns.iter().filter(|a| a.class == class) {
            let e = frames[fi].to_ego(&a.bbox);
            if keep(e.center.norm_xy()) {
                gts.push(MatchGt { frame: fi, xy: [e.center.x, e.center.y] });
            }
        }
    }
    let mut out = Vec::new();
    for &(fi, d) in dets.iter().filter(|(_, d)| d.class == class) {
        let e = frames[fi].to_ego(&d.bbox);
        if keep(e.center.norm_xy()) {
            out.push(MatchDet { frame: fi, xy: [e.center.x, e.center.y], score: d.score });
        }
    }
    (out, gts)
}

/// Scores `dets` against the scenes' annotations per class and band.
pub fn evaluate(dets: &DetectionSet, scenes: &[Scene], cfg: &EvalConfig) -> Result<EvalReport, EvalError> {
    cfg.validate()?;
    let frames: Vec<&Frame> = scenes.iter().flat_map(|s| &s.frames).collect();
    let index: BTreeMap<&str, usize> = frames.iter().enumerate().map(|(i, f)| (f.token.as_str(), i)).collect();
    let unknown: Vec<String> = dets.keys().filter(|t| !index.contains_key(t.as_str())).cloned().collect();
    if !unknown.is_empty() {
        return Err(EvalError::UnknownFrames(unknown));
    }

    let eval_gt = build_eval_gt(scenes, cfg.gt_mode, &cfg.occlusion);
    let gt: Vec<&[Annotation]> = frames.iter().map(|f| eval_gt.get(&f.token).map_or(&[][..], |v| v.as_slice())).collect();
    // detection-set order is the tie-break key
    let flat: Vec<(usize, &crate::dataset::Detection)> = dets
        .iter()
        .flat_map(|(tok, ds)| {
            let fi = index[tok.as_str()];
            ds.iter().map(move |d| (fi, d))
        })
        .collect();

    let cells: Vec<(ClassId, DistanceBand)> =
        cfg.bands.iter().flat_map(|b| cfg.classes.iter().map(move |c| (*c, *b))).collect();
    let tolerances = cfg.scheme.tolerances();
    let results: Vec<ClassBandResult> = cells
        .par_iter()
        .map(|&(class, band)| {
            let (mdets, mgts) = cell_inputs(cfg, class, band, &frames, &gt, &flat);
            let per_tolerance: Vec<ToleranceResult> = tolerances
                .iter()
                .map(|&tol| {
                    let m = greedy_match(&mdets, &mgts, tol);
                    let curve = PrCurve::from_match(&mdets, &m, mgts.len());
                    let tp = m.labels.iter().filter(|l| matches!(l, MatchLabel::Tp(_))).count();
                    ToleranceResult {
                        tolerance: tol,
                        ap: average_precision(&curve, cfg.ap_mode),
                        tp,
                        fp: mdets.len() - tp,
                        fn_: m.unmatched_gt.len(),
                        curve,
                    }
                })
                .collect();
            let ap = if mgts.is_empty() {
                None
            } else {
                Some(per_tolerance.iter().filter_map(|t| t.ap).sum::<f64>() / per_tolerance.len() as f64)
            };
            ClassBandResult { class, band, num_gt: mgts.len(), num_det: mdets.len(), ap, per_tolerance }
        })
        .collect();

    let bands = cfg
        .bands
        .iter()
        .map(|&band| {
            let aps: Vec<f64> = results.iter().filter(|r| r.band == band).filter_map(|r| r.ap).collect();
            BandSummary {
                band,
                map: (!aps.is_empty()).then(|| aps.iter().sum::<f64>() / aps.len() as f64),
                classes_scored: aps.len(),
            }
        })
        .collect();
    Ok(EvalReport { config: cfg.clone(), results, bands })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn linear_threshold_values() {
        assert_eq!(thresh_linear(0.0), 0.0);
        assert_abs_diff_eq!(thresh_linear(50.0), 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(thresh_linear(12.5), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn quadratic_threshold_values() {
        assert_abs_diff_eq!(thresh_quadratic(10.0), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(thresh_quadratic(20.0), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(thresh_quadratic(50.0), 4.0, epsilon = 1e-12);
    }

    #[test]
    fn elliptical_cases() {
        assert!(elliptical_match([0.0, 50.0], [0.0, 50.0]));
        assert!(elliptical_match([0.0, 55.65], [0.0, 50.0]));
        assert!(!elliptical_match([0.0, 55.66], [0.0, 50.0]));
        assert!(!elliptical_match([3.5, 50.0], [0.0, 50.0]));
        assert!(elliptical_match([2.82, 50.0], [0.0, 50.0]));
        // degenerate ground truth at the origin
        assert!(elliptical_match([0.0, 0.0], [0.0, 0.0]));
        assert!(!elliptical_match([0.01, 0.0], [0.0, 0.0]));
        let (lat, lon) = elliptical_semi_axes(50.0);
        assert_abs_diff_eq!(lat, 8f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(lon, 32f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn tolerance_examples() {
        let gt = [0.0, 25.0];
        assert!(Tolerance::Linear.accepts([1.9, 25.0], gt));
        assert!(!Tolerance::Linear.accepts([2.1, 25.0], gt));
        assert!(Tolerance::Fixed(4.0).accepts([0.0, 3.99], [0.0, 0.0]));
    }

    fn det(frame: usize, x: f64, score: f64) -> MatchDet {
        MatchDet { frame, xy: [x, 10.0], score }
    }

    #[test]
    fn greedy_single_claim() {
        let gts = [MatchGt { frame: 0, xy: [0.0, 10.0] }];
        let dets = [det(0, 0.1, 0.4), det(0, 0.0, 0.9)];
        let m = greedy_match(&dets, &gts, Tolerance::Fixed(1.0));
        assert_eq!(m.labels, vec![MatchLabel::Fp, MatchLabel::Tp(0)]);
        assert_eq!(m.order, vec![1, 0]);
        assert!(m.unmatched_gt.is_empty());
    }

    #[test]
    fn greedy_ignores_other_frames() {
        let gts = [MatchGt { frame: 1, xy: [0.0, 10.0] }];
        let m = greedy_match(&[det(0, 0.0, 0.9)], &gts, Tolerance::Fixed(1.0));
        assert_eq!(m.labels, vec![MatchLabel::Fp]);
        assert_eq!(m.unmatched_gt, vec![0]);
    }

    #[test]
    fn ap_of_perfect_and_empty() {
        let perfect = PrCurve::from_ranked(&[(0.9, true), (0.8, true)], 2);
        assert_eq!(average_precision(&perfect, ApMode::FullArea), Some(1.0));
        assert_eq!(average_precision(&perfect, ApMode::NuScenesNormalized), Some(1.0));
        let empty = PrCurve::from_ranked(&[], 3);
        assert_eq!(average_precision(&empty, ApMode::FullArea), Some(0.0));
        assert_eq!(average_precision(&empty, ApMode::NuScenesNormalized), Some(0.0));
        assert_eq!(average_precision(&PrCurve::from_ranked(&[(0.5, false)], 0), ApMode::FullArea), None);
    }

    #[test]
    fn ap_hand_enumerated() {
        // TP, FP, TP, FP over two ground truths: precision 1 up to recall 0.5
        // (51 grid points), then 2/3 up to recall 1 (50 grid points).
        let c = PrCurve::from_ranked(&[(0.9, true), (0.8, false), (0.7, true), (0.6, false)], 2);
        let expected = (51.0 + 50.0 * (2.0 / 3.0)) / 101.0;
        assert_abs_diff_eq!(average_precision(&c, ApMode::FullArea).unwrap(), expected, epsilon = 1e-12);
        // normalized grid 0.10..=1.00: 41 points at 1, 50 points at 2/3
        let norm = (41.0 * 1.0 + 50.0 * ((2.0 / 3.0 - 0.1) / 0.9)) / 91.0;
        assert_abs_diff_eq!(average_precision(&c, ApMode::NuScenesNormalized).unwrap(), norm, epsilon = 1e-12);
    }

    #[test]
    fn config_validation() {
        assert!(EvalConfig::default().validate().is_ok());
        let overlapping = EvalConfig { bands: vec![DistanceBand::new(0.0, 60.0), DistanceBand::new(50.0, 80.0)], ..Default::default() };
        assert!(overlapping.validate().is_err());
        let too_far = EvalConfig { bands: vec![DistanceBand::new(0.0, 90.0)], ..Default::default() };
        assert!(too_far.validate().is_err());
        assert!(ThresholdScheme::Fixed(0.0).validate().is_err());
        assert!(ThresholdScheme::DefaultSet(vec![1.0, 0.5]).validate().is_err());
        assert!(ThresholdScheme::default_set().validate().is_ok());
    }
}
