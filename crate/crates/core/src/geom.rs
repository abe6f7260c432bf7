//! Yaw-oriented cuboid geometry.
//!
//! Boxes carry a [`FrameTag`] so that global and ego-frame quantities are not
//! mixed by accident. All routines are pure functions over `Copy` values.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Collinearity tolerance used by the polygon clipper.
pub const CLIP_EPS: f64 = 1e-12;

/// Slack on the half-extents in [`point_in_box`]; absorbs round-off from the
/// inverse rotation so that points computed to lie on a face stay inside.
pub const CONTAINMENT_EPS: f64 = 1e-9;

/// Allowed deviation of a rotation quaternion from unit norm.
pub const QUAT_NORM_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("degenerate box")]
    DegenerateBox,
    #[error("boxes are expressed in different frames ({0:?} vs {1:?})")]
    FrameMismatch(FrameTag, FrameTag),
    #[error("rotation quaternion has norm {0}, expected 1")]
    NonUnitQuaternion(f64),
    #[error("invalid box: {0}")]
    InvalidBox(String),
    #[error("invalid camera: {0}")]
    InvalidCamera(String),
    #[error("invalid rectangle: {0}")]
    InvalidRect(String),
}

/// A point or direction in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 0.0 };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    /// Length of the ground-plane (x, y) component.
    pub fn norm_xy(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn lerp(self, o: Vec3, t: f64) -> Vec3 {
        self + (o - self) * t
    }
}

impl From<[f64; 3]> for Vec3 {
    fn from(a: [f64; 3]) -> Self {
        Vec3::new(a[0], a[1], a[2])
    }
}

impl From<Vec3> for [f64; 3] {
    fn from(v: Vec3) -> Self {
        [v.x, v.y, v.z]
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

/// Rotation quaternion stored as (w, x, y, z).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct Quat {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl From<[f64; 4]> for Quat {
    fn from(a: [f64; 4]) -> Self {
        Quat { w: a[0], x: a[1], y: a[2], z: a[3] }
    }
}

impl From<Quat> for [f64; 4] {
    fn from(q: Quat) -> Self {
        [q.w, q.x, q.y, q.z]
    }
}

impl Quat {
    pub const IDENTITY: Quat = Quat { w: 1.0, x: 0.0, y: 0.0, z: 0.0 };

    pub fn norm(self) -> f64 {
        (self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    /// Rotation by `angle` radians about the vertical axis.
    pub fn from_yaw(angle: f64) -> Quat {
        let (s, c) = (angle / 2.0).sin_cos();
        Quat { w: c, x: 0.0, y: 0.0, z: s }
    }

    pub fn conjugate(self) -> Quat {
        Quat { w: self.w, x: -self.x, y: -self.y, z: -self.z }
    }

    /// Row-major rotation matrix.
    pub fn to_matrix(self) -> [[f64; 3]; 3] {
        let Quat { w, x, y, z } = self;
        [
            [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
            [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)],
            [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)],
        ]
    }

    /// Inverse of [`Quat::to_matrix`] for a proper rotation matrix.
    pub fn from_matrix(m: [[f64; 3]; 3]) -> Quat {
        let trace = m[0][0] + m[1][1] + m[2][2];
        let q = if trace > 0.0 {
            let s = (trace + 1.0).sqrt() * 2.0;
            Quat {
                w: 0.25 * s,
                x: (m[2][1] - m[1][2]) / s,
                y: (m[0][2] - m[2][0]) / s,
                z: (m[1][0] - m[0][1]) / s,
            }
        } else if m[0][0] > m[1][1] && m[0][0] > m[2][2] {
            let s = (1.0 + m[0][0] - m[1][1] - m[2][2]).sqrt() * 2.0;
            Quat {
                w: (m[2][1] - m[1][2]) / s,
                x: 0.25 * s,
                y: (m[0][1] + m[1][0]) / s,
                z: (m[0][2] + m[2][0]) / s,
            }
        } else if m[1][1] > m[2][2] {
            let s = (1.0 + m[1][1] - m[0][0] - m[2][2]).sqrt() * 2.0;
            Quat {
                w: (m[0][2] - m[2][0]) / s,
                x: (m[0][1] + m[1][0]) / s,
                y: 0.25 * s,
                z: (m[1][2] + m[2][1]) / s,
            }
        } else {
            let s = (1.0 + m[2][2] - m[0][0] - m[1][1]).sqrt() * 2.0;
            Quat {
                w: (m[1][0] - m[0][1]) / s,
                x: (m[0][2] + m[2][0]) / s,
                y: (m[1][2] + m[2][1]) / s,
                z: 0.25 * s,
            }
        };
        let n = q.norm();
        Quat { w: q.w / n, x: q.x / n, y: q.y / n, z: q.z / n }
    }

    pub fn rotate(self, v: Vec3) -> Vec3 {
        let m = self.to_matrix();
        Vec3::new(
            m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
            m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
            m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z,
        )
    }

    /// Rotation about the vertical axis implied by this quaternion.
    pub fn yaw(self) -> f64 {
        let Quat { w, x, y, z } = self;
        (2.0 * (w * z + x * y)).atan2(1.0 - 2.0 * (y * y + z * z))
    }
}

/// Hamilton product.
impl std::ops::Mul for Quat {
    type Output = Quat;

    fn mul(self, o: Quat) -> Quat {
        Quat {
            w: self.w * o.w - self.x * o.x - self.y * o.y - self.z * o.z,
            x: self.w * o.x + self.x * o.w + self.y * o.z - self.z * o.y,
            y: self.w * o.y - self.x * o.z + self.y * o.w + self.z * o.x,
            z: self.w * o.z + self.x * o.y - self.y * o.x + self.z * o.w,
        }
    }
}

/// Rigid transform `p -> rotation * p + translation`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub translation: Vec3,
    pub rotation: Quat,
}

impl Default for Pose {
    fn default() -> Self {
        Pose::IDENTITY
    }
}

impl Pose {
    pub const IDENTITY: Pose = Pose { translation: Vec3::ZERO, rotation: Quat::IDENTITY };

    pub fn new(translation: Vec3, rotation: Quat) -> Result<Pose, GeomError> {
        let n = rotation.norm();
        if !n.is_finite() || (n - 1.0).abs() > QUAT_NORM_TOL {
            return Err(GeomError::NonUnitQuaternion(n));
        }
        if !translation.is_finite() {
            return Err(GeomError::InvalidBox("non-finite pose translation".into()));
        }
        Ok(Pose { translation, rotation })
    }

    pub fn from_yaw(yaw: f64, translation: Vec3) -> Pose {
        Pose { translation, rotation: Quat::from_yaw(yaw) }
    }

    pub fn apply(&self, p: Vec3) -> Vec3 {
        self.rotation.rotate(p) + self.translation
    }

    pub fn inverse(&self) -> Pose {
        let inv = self.rotation.conjugate();
        Pose { translation: -inv.rotate(self.translation), rotation: inv }
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Pose) -> Pose {
        Pose {
            translation: self.apply(other.translation),
            rotation: self.rotation * other.rotation,
        }
    }

    pub fn heading(&self) -> f64 {
        self.rotation.yaw()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrameTag {
    Global,
    Ego,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Size3 {
    pub length: f64,
    pub width: f64,
    pub height: f64,
}

impl Size3 {
    pub const fn new(length: f64, width: f64, height: f64) -> Self {
        Self { length, width, height }
    }
}

/// Oriented cuboid. `yaw` rotates the length axis away from +x about +z.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Box3D {
    pub center: Vec3,
    pub size: Size3,
    pub yaw: f64,
    pub frame: FrameTag,
}

/// Wraps an angle into (−π, π].
pub fn normalize_yaw(yaw: f64) -> f64 {
    let a = yaw.rem_euclid(2.0 * PI);
    if a > PI {
        a - 2.0 * PI
    } else {
        a
    }
}

/// Smallest signed rotation taking `from` to `to`, in (−π, π].
pub fn angle_diff(from: f64, to: f64) -> f64 {
    normalize_yaw(to - from)
}

impl Box3D {
    pub fn new(center: Vec3, size: Size3, yaw: f64, frame: FrameTag) -> Result<Box3D, GeomError> {
        let b = Box3D { center, size, yaw: normalize_yaw(yaw), frame };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<(), GeomError> {
        if !self.center.is_finite() || !self.yaw.is_finite() {
            return Err(GeomError::InvalidBox("non-finite center or yaw".into()));
        }
        let Size3 { length, width, height } = self.size;
        if !(length > 0.0 && width > 0.0 && height > 0.0)
            || !(length.is_finite() && width.is_finite() && height.is_finite())
        {
            return Err(GeomError::InvalidBox(format!(
                "extents must be positive, got {length} x {width} x {height}"
            )));
        }
        Ok(())
    }

    pub fn volume(&self) -> f64 {
        self.size.length * self.size.width * self.size.height
    }

    pub fn bev_area(&self) -> f64 {
        self.size.length * self.size.width
    }

    pub fn with_frame(mut self, frame: FrameTag) -> Box3D {
        self.frame = frame;
        self
    }

    /// The eight cuboid corners: bottom face first, then top, each CCW.
    pub fn corners(&self) -> [Vec3; 8] {
        let bev = bev_corners(self);
        let lo = self.center.z - self.size.height / 2.0;
        let hi = self.center.z + self.size.height / 2.0;
        let mut out = [Vec3::ZERO; 8];
        for (i, c) in bev.iter().enumerate() {
            out[i] = Vec3::new(c[0], c[1], lo);
            out[i + 4] = Vec3::new(c[0], c[1], hi);
        }
        out
    }
}

/// Ground-plane corners of `b`, counter-clockwise.
pub fn bev_corners(b: &Box3D) -> [[f64; 2]; 4] {
    let (s, c) = b.yaw.sin_cos();
    let hl = b.size.length / 2.0;
    let hw = b.size.width / 2.0;
    let local = [[hl, -hw], [hl, hw], [-hl, hw], [-hl, -hw]];
    local.map(|[u, v]| [b.center.x + c * u - s * v, b.center.y + s * u + c * v])
}

fn cross2(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn polygon_area(poly: &[[f64; 2]]) -> f64 {
    let n = poly.len();
    if n < 3 {
        return 0.0;
    }
    let mut acc = 0.0;
    for i in 0..n {
        let p = poly[i];
        let q = poly[(i + 1) % n];
        acc += p[0] * q[1] - q[0] * p[1];
    }
    acc.abs() / 2.0
}

/// Sutherland–Hodgman: clips `subject` against the convex CCW polygon `clip`.
pub fn clip_convex(subject: &[[f64; 2]], clip: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut output: Vec<[f64; 2]> = subject.to_vec();
    for i in 0..clip.len() {
        if output.is_empty() {
            break;
        }
        let a = clip[i];
        let b = clip[(i + 1) % clip.len()];
        let input = std::mem::take(&mut output);
        let inside = |p: [f64; 2]| cross2(a, b, p) >= -CLIP_EPS;
        let intersect = |p: [f64; 2], q: [f64; 2]| -> Option<[f64; 2]> {
            let d1 = cross2(a, b, p);
            let d2 = cross2(a, b, q);
            let denom = d1 - d2;
            if denom.abs() < CLIP_EPS {
                return None;
            }
            let t = d1 / denom;
            Some([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])])
        };
        let mut prev = input[input.len() - 1];
        for &cur in &input {
            match (inside(cur), inside(prev)) {
                (true, true) => output.push(cur),
                (true, false) => {
                    output.extend(intersect(prev, cur));
                    output.push(cur);
                }
                (false, true) => output.extend(intersect(prev, cur)),
                (false, false) => {}
            }
            prev = cur;
        }
    }
    output
}

fn check_pair(a: &Box3D, b: &Box3D) -> Result<(), GeomError> {
    if a.frame != b.frame {
        return Err(GeomError::FrameMismatch(a.frame, b.frame));
    }
    if !(a.bev_area() > 0.0) || !(b.bev_area() > 0.0) {
        return Err(GeomError::DegenerateBox);
    }
    Ok(())
}

/// Ground-plane intersection area of two boxes.
pub fn bev_intersection_area(a: &Box3D, b: &Box3D) -> f64 {
    let clipped = clip_convex(&bev_corners(a), &bev_corners(b));
    polygon_area(&clipped)
}

pub(crate) fn bev_iou_unchecked(a: &Box3D, b: &Box3D) -> f64 {
    let inter = bev_intersection_area(a, b);
    let union = a.bev_area() + b.bev_area() - inter;
    if union <= 0.0 {
        return 0.0;
    }
    (inter / union).clamp(0.0, 1.0)
}

/// Bird's-eye-view IoU of two yaw-oriented rectangles.
pub fn rotated_iou_bev(a: &Box3D, b: &Box3D) -> Result<f64, GeomError> {
    check_pair(a, b)?;
    if a == b {
        return Ok(1.0);
    }
    Ok(bev_iou_unchecked(a, b))
}

pub(crate) fn iou_3d_unchecked(a: &Box3D, b: &Box3D) -> f64 {
    let za = (a.center.z - a.size.height / 2.0, a.center.z + a.size.height / 2.0);
    let zb = (b.center.z - b.size.height / 2.0, b.center.z + b.size.height / 2.0);
    let dz = (za.1.min(zb.1) - za.0.max(zb.0)).max(0.0);
    if dz == 0.0 {
        return 0.0;
    }
    let inter = bev_intersection_area(a, b) * dz;
    let union = a.volume() + b.volume() - inter;
    if union <= 0.0 {
        return 0.0;
    }
    (inter / union).clamp(0.0, 1.0)
}

/// Volumetric IoU of two yaw-oriented cuboids.
pub fn iou_3d(a: &Box3D, b: &Box3D) -> Result<f64, GeomError> {
    check_pair(a, b)?;
    if !(a.volume() > 0.0) || !(b.volume() > 0.0) {
        return Err(GeomError::DegenerateBox);
    }
    if a == b {
        return Ok(1.0);
    }
    Ok(iou_3d_unchecked(a, b))
}

/// Boundary-inclusive containment test.
pub fn point_in_box(p: Vec3, b: &Box3D) -> bool {
    let d = p - b.center;
    let (s, c) = b.yaw.sin_cos();
    let u = c * d.x + s * d.y;
    let v = -s * d.x + c * d.y;
    u.abs() <= b.size.length / 2.0 + CONTAINMENT_EPS
        && v.abs() <= b.size.width / 2.0 + CONTAINMENT_EPS
        && d.z.abs() <= b.size.height / 2.0 + CONTAINMENT_EPS
}

/// Applies `pose` to the box center and adds the pose's heading to its yaw.
/// The frame tag is left unchanged; see [`Box3D::with_frame`].
pub fn transform_box(pose: &Pose, b: &Box3D) -> Box3D {
    Box3D {
        center: pose.apply(b.center),
        size: b.size,
        yaw: normalize_yaw(b.yaw + pose.heading()),
        frame: b.frame,
    }
}

pub fn center_distance_bev(a: &Box3D, b: &Box3D) -> f64 {
    (a.center.x - b.center.x).hypot(a.center.y - b.center.y)
}

/// Axis-aligned image rectangle in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect2D {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl Rect2D {
    pub fn new(x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> Result<Rect2D, GeomError> {
        if !(x_min <= x_max && y_min <= y_max) {
            return Err(GeomError::InvalidRect(format!(
                "[{x_min}, {x_max}] x [{y_min}, {y_max}]"
            )));
        }
        Ok(Rect2D { x_min, y_min, x_max, y_max })
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn contains(&self, u: f64, v: f64) -> bool {
        u >= self.x_min && u <= self.x_max && v >= self.y_min && v <= self.y_max
    }

    pub fn center(&self) -> (f64, f64) {
        ((self.x_min + self.x_max) / 2.0, (self.y_min + self.y_max) / 2.0)
    }
}

pub fn rect_iou(a: &Rect2D, b: &Rect2D) -> f64 {
    let w = (a.x_max.min(b.x_max) - a.x_min.max(b.x_min)).max(0.0);
    let h = (a.y_max.min(b.y_max) - a.y_min.max(b.y_min)).max(0.0);
    let inter = w * h;
    let union = a.area() + b.area() - inter;
    if union <= 0.0 {
        return 0.0;
    }
    inter / union
}

/// Pinhole camera. `extrinsic` maps ego-frame points into the optical frame
/// (x right, y down, z along the viewing direction).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CameraModel {
    pub id: String,
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: f64,
    pub height: f64,
    pub extrinsic: Pose,
}

/// Result of projecting a cuboid into one camera.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    /// Bounding rectangle of positive-depth corners, clipped to the image.
    pub rect: Rect2D,
    /// Mean optical-axis depth of the positive-depth corners.
    pub mean_depth: f64,
    /// Corners with positive depth that land inside the image bounds.
    pub corners_in_image: usize,
}

impl CameraModel {
    pub fn validate(&self) -> Result<(), GeomError> {
        if !(self.fx > 0.0 && self.fy > 0.0) {
            return Err(GeomError::InvalidCamera(format!("{}: focal lengths must be positive", self.id)));
        }
        if !(self.width > 0.0 && self.height > 0.0) {
            return Err(GeomError::InvalidCamera(format!("{}: image size must be positive", self.id)));
        }
        Ok(())
    }

    /// Camera mounted at `mount` (ego frame) looking horizontally along the
    /// ground-plane direction `azimuth` (radians from ego +x, CCW).
    #[allow(clippy::too_many_arguments)]
    pub fn looking_along(
        id: impl Into<String>,
        azimuth: f64,
        mount: Vec3,
        fx: f64,
        fy: f64,
        cx: f64,
        cy: f64,
        width: f64,
        height: f64,
    ) -> CameraModel {
        let (s, c) = azimuth.sin_cos();
        let right = [s, -c, 0.0];
        let down = [0.0, 0.0, -1.0];
        let forward = [c, s, 0.0];
        let rotation = Quat::from_matrix([right, down, forward]);
        let translation = -rotation.rotate(mount);
        CameraModel {
            id: id.into(),
            fx,
            fy,
            cx,
            cy,
            width,
            height,
            extrinsic: Pose { translation, rotation },
        }
    }

    /// Optical-frame coordinates of an ego-frame point.
    pub fn to_camera(&self, p: Vec3) -> Vec3 {
        self.extrinsic.apply(p)
    }

    /// Pixel coordinates and depth, or `None` behind the image plane.
    pub fn project_point(&self, p_ego: Vec3) -> Option<(f64, f64, f64)> {
        let q = self.to_camera(p_ego);
        if q.z <= 0.0 {
            return None;
        }
        Some((self.fx * q.x / q.z + self.cx, self.fy * q.y / q.z + self.cy, q.z))
    }

    pub fn in_image(&self, u: f64, v: f64) -> bool {
        (0.0..=self.width).contains(&u) && (0.0..=self.height).contains(&v)
    }
}

/// Projects an ego-frame box; corners with non-positive depth are dropped.
pub fn project_box(cam: &CameraModel, b: &Box3D) -> Option<Projection> {
    let mut depth_sum = 0.0;
    let mut n = 0usize;
    let mut in_image = 0usize;
    let (mut x0, mut y0, mut x1, mut y1) =
        (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for corner in b.corners() {
        if let Some((u, v, depth)) = cam.project_point(corner) {
            n += 1;
            depth_sum += depth;
            if cam.in_image(u, v) {
                in_image += 1;
            }
            x0 = x0.min(u);
            y0 = y0.min(v);
            x1 = x1.max(u);
            y1 = y1.max(v);
        }
    }
    if n == 0 {
        return None;
    }
    let x0 = x0.clamp(0.0, cam.width);
    let x1 = x1.clamp(0.0, cam.width);
    let y0 = y0.clamp(0.0, cam.height);
    let y1 = y1.clamp(0.0, cam.height);
    if x1 <= x0 || y1 <= y0 {
        return None;
    }
    Some(Projection {
        rect: Rect2D { x_min: x0, y_min: y0, x_max: x1, y_max: y1 },
        mean_depth: depth_sum / n as f64,
        corners_in_image: in_image,
    })
}

/// Image rectangle and mean corner depth of an ego-frame box.
pub fn project_box_to_image(cam: &CameraModel, b: &Box3D) -> Option<(Rect2D, f64)> {
    project_box(cam, b).map(|p| (p.rect, p.mean_depth))
}
