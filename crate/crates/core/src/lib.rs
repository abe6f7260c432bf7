//! Far-field 3D detection evaluation and late fusion.
//!
//! * [`geom`]: yaw-oriented cuboids, BEV/3D IoU, containment, pinhole projection.
//! * [`dataset`]: scene and detection model, JSON I/O, sweep aggregation, synthetic scenes.
//! * [`metrics`]: distance-adaptive matching and banded AP/mAP.
//! * [`fusion`]: NMS, distance-adaptive NMS, distance-gated and score-level fusion.
//! * [`visibility`]: zero-lidar statistics, occlusion verdicts, audit helpers.
//! * [`report`]: JSON and Markdown rendering of evaluation results.

// `!(x > 0.0)` style guards are deliberate: they reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dataset;
pub mod fusion;
pub mod geom;
pub mod metrics;
pub mod report;
pub mod visibility;

pub use dataset::{
    Annotation, ClassId, CountMode, DataError, Detection, DetectionSet, Frame, LidarSweep, Modality, Scene,
};
pub use geom::{Box3D, CameraModel, FrameTag, GeomError, Pose, Quat, Rect2D, Size3, Vec3};
pub use metrics::{evaluate, ApMode, DistanceBand, EvalConfig, EvalError, EvalReport, ThresholdScheme, Tolerance};
pub use visibility::{GtMode, OcclusionConfig, VisibilityVerdict};
pub use fusion::{AdaNmsConfig, FusionConfig, FusionError, FusionMethod, IouKind};
