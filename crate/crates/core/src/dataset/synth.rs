//! Synthetic scenes with simulated lidar returns and two simulated detectors.
//!
//! Lidar returns per sweep are Poisson with mean proportional to the object's
//! exposed cross-section over squared range, so distant and small objects
//! frequently come back empty. The simulated lidar detector's recall is a
//! logistic function of the expected point count over the aggregated sweeps.
//! The simulated camera detector has a flat per-class recall but its depth
//! error grows quadratically with range along the viewing ray.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Annotation, ClassId, Detection, DetectionSet, Frame, LidarSweep, Modality, Scene};
use crate::geom::{normalize_yaw, Box3D, CameraModel, FrameTag, Pose, Size3, Vec3};

const KEYFRAME_INTERVAL_US: i64 = 500_000;
const SWEEP_INTERVAL_US: i64 = 50_000;

#[derive(Debug, Error, PartialEq)]
#[error("invalid synthetic config: {0}")]
pub struct SynthConfigError(pub String);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LidarSimConfig {
    /// Expected returns per square meter of exposed cross-section at 1 m.
    pub beam_density: f64,
    /// Per-object reflectivity is drawn from `[reflectivity_min, 1]`.
    pub reflectivity_min: f64,
    pub max_points_per_sweep: u32,
    pub recall_max: f64,
    /// Aggregated expected points at which recall reaches half its maximum.
    pub recall_midpoint: f64,
    pub recall_slope: f64,
    /// Isotropic center noise, meters.
    pub sigma: f64,
    pub false_positives_per_frame: f64,
    pub fp_score_factor: f64,
}

impl Default for LidarSimConfig {
    fn default() -> Self {
        LidarSimConfig {
            beam_density: 1000.0,
            reflectivity_min: 0.2,
            max_points_per_sweep: 24,
            recall_max: 0.95,
            recall_midpoint: 13.0,
            recall_slope: 0.225,
            sigma: 0.15,
            false_positives_per_frame: 1.0,
            fp_score_factor: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CameraSimConfig {
    pub recall: BTreeMap<ClassId, f64>,
    /// Used for classes missing from `recall`.
    pub default_recall: f64,
    /// Depth noise is `kappa * d^2` meters along the viewing ray.
    pub kappa: f64,
    pub sigma_lateral: f64,
    /// Probability of a second, independent detection, scaled by `d / max_range`.
    pub duplicate_rate: f64,
    pub false_positives_per_frame: f64,
    pub fp_score_factor: f64,
}

impl Default for CameraSimConfig {
    fn default() -> Self {
        CameraSimConfig {
            recall: BTreeMap::from([(ClassId::Car, 0.75), (ClassId::Truck, 0.65), (ClassId::Pedestrian, 0.45)]),
            default_recall: 0.6,
            kappa: 0.0005,
            sigma_lateral: 0.2,
            duplicate_rate: 0.2,
            false_positives_per_frame: 1.0,
            fp_score_factor: 0.5,
        }
    }
}

impl CameraSimConfig {
    pub fn recall_for(&self, class: ClassId) -> f64 {
        self.recall.get(&class).copied().unwrap_or(self.default_recall)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub num_scenes: usize,
    pub frames_per_scene: usize,
    pub sweeps_per_frame: usize,
    /// Poisson mean of object instances per scene.
    pub objects_per_scene: f64,
    pub class_mix: BTreeMap<ClassId, f64>,
    pub min_range: f64,
    pub max_range: f64,
    pub max_object_speed: f64,
    pub ego_speed: f64,
    /// Poisson mean of unannotated static point clusters per scene.
    pub clutter_per_scene: f64,
    pub with_cameras: bool,
    pub lidar: LidarSimConfig,
    pub camera: CameraSimConfig,
    pub score_jitter: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            num_scenes: 25,
            frames_per_scene: 8,
            sweeps_per_frame: 10,
            objects_per_scene: 30.0,
            class_mix: BTreeMap::from([(ClassId::Car, 0.6), (ClassId::Truck, 0.15), (ClassId::Pedestrian, 0.25)]),
            min_range: 3.0,
            max_range: 80.0,
            max_object_speed: 2.0,
            ego_speed: 0.0,
            clutter_per_scene: 4.0,
            with_cameras: true,
            lidar: LidarSimConfig::default(),
            camera: CameraSimConfig::default(),
            score_jitter: 0.05,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), SynthConfigError> {
        let err = |m: String| Err(SynthConfigError(m));
        let rates = [
            ("lidar.recall_max", self.lidar.recall_max),
            ("lidar.reflectivity_min", self.lidar.reflectivity_min),
            ("lidar.fp_score_factor", self.lidar.fp_score_factor),
            ("camera.default_recall", self.camera.default_recall),
            ("camera.duplicate_rate", self.camera.duplicate_rate),
            ("camera.fp_score_factor", self.camera.fp_score_factor),
        ];
        for (name, v) in rates.into_iter().chain(self.camera.recall.values().map(|v| ("camera.recall", *v))) {
            if !(0.0..=1.0).contains(&v) {
                return err(format!("{name} = {v} is not in [0, 1]"));
            }
        }
        let nonneg = [
            ("lidar.sigma", self.lidar.sigma),
            ("lidar.beam_density", self.lidar.beam_density),
            ("lidar.recall_slope", self.lidar.recall_slope),
            ("lidar.false_positives_per_frame", self.lidar.false_positives_per_frame),
            ("camera.kappa", self.camera.kappa),
            ("camera.sigma_lateral", self.camera.sigma_lateral),
            ("camera.false_positives_per_frame", self.camera.false_positives_per_frame),
            ("objects_per_scene", self.objects_per_scene),
            ("clutter_per_scene", self.clutter_per_scene),
            ("max_object_speed", self.max_object_speed),
            ("ego_speed", self.ego_speed),
            ("score_jitter", self.score_jitter),
        ];
        for (name, v) in nonneg {
            if !(v >= 0.0 && v.is_finite()) {
                return err(format!("{name} = {v} must be finite and non-negative"));
            }
        }
        if !(self.min_range >= 0.0 && self.min_range < self.max_range) {
            return err(format!("range [{}, {}] is empty", self.min_range, self.max_range));
        }
        if self.sweeps_per_frame == 0 || self.sweeps_per_frame > super::SWEEPS_PER_KEYFRAME {
            return err(format!("sweeps_per_frame must be in 1..={}", super::SWEEPS_PER_KEYFRAME));
        }
        if self.class_mix.values().any(|w| !(*w >= 0.0)) || self.class_mix.values().sum::<f64>() <= 0.0 {
            return err("class_mix needs non-negative weights with a positive sum".into());
        }
        Ok(())
    }

    /// Lidar detector recall for an aggregated expected point count.
    pub fn lidar_recall(&self, expected_points: f64) -> f64 {
        let l = &self.lidar;
        l.recall_max / (1.0 + (-l.recall_slope * (expected_points - l.recall_midpoint)).exp())
    }
}

/// Nominal (length, width, height) per class, meters.
pub fn nominal_size(class: ClassId) -> Size3 {
    match class {
        ClassId::Car => Size3::new(4.6, 1.95, 1.75),
        ClassId::Truck => Size3::new(6.9, 2.5, 2.9),
        ClassId::Bus => Size3::new(11.0, 2.95, 3.5),
        ClassId::Trailer => Size3::new(12.0, 2.9, 3.9),
        ClassId::ConstructionVehicle => Size3::new(6.4, 2.8, 3.2),
        ClassId::Pedestrian => Size3::new(0.75, 0.68, 1.77),
        ClassId::Motorcycle => Size3::new(2.1, 0.8, 1.45),
        ClassId::Bicycle => Size3::new(1.7, 0.6, 1.3),
        ClassId::TrafficCone => Size3::new(0.4, 0.4, 1.0),
        ClassId::Barrier => Size3::new(2.5, 0.5, 1.0),
    }
}

/// Expected lidar returns from one sweep for a box seen from `sensor`.
pub fn expected_points(cfg: &LidarSimConfig, b: &Box3D, reflectivity: f64, sensor: Vec3) -> f64 {
    let dx = b.center.x - sensor.x;
    let dy = b.center.y - sensor.y;
    let d = dx.hypot(dy).max(1.0);
    let bearing = dy.atan2(dx);
    let rel = b.yaw - bearing;
    let exposed_width = b.size.length * rel.sin().abs() + b.size.width * rel.cos().abs();
    cfg.beam_density * reflectivity * exposed_width * b.size.height / (d * d)
}

/// Generated scenes and the two simulated detection sets.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthOutput {
    pub scenes: Vec<Scene>,
    pub lidar: DetectionSet,
    pub camera: DetectionSet,
}

struct Instance {
    id: String,
    class: ClassId,
    start: Vec3,
    velocity: Vec3,
    size: Size3,
    yaw: f64,
    reflectivity: f64,
}

impl Instance {
    fn box_at(&self, t_s: f64) -> Box3D {
        Box3D {
            center: self.start + self.velocity * t_s,
            size: self.size,
            yaw: self.yaw,
            frame: FrameTag::Global,
        }
    }
}

struct Sim<'a> {
    cfg: &'a SynthConfig,
    rng: ChaCha8Rng,
    classes: Vec<(ClassId, f64)>,
}

fn poisson(rng: &mut ChaCha8Rng, mean: f64) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).expect("positive finite mean").sample(rng) as u64
}

fn gauss(rng: &mut ChaCha8Rng, sigma: f64) -> f64 {
    if sigma <= 0.0 {
        return 0.0;
    }
    Normal::new(0.0, sigma).expect("finite sigma").sample(rng)
}

/// nuScenes-like ring of six cameras at 1600x900.
pub fn surround_cameras() -> Vec<CameraModel> {
    let mount = Vec3::new(0.0, 0.0, 1.5);
    let f = 1266.0;
    [
        ("CAM_FRONT", 90.0),
        ("CAM_FRONT_LEFT", 145.0),
        ("CAM_BACK_LEFT", 200.0),
        ("CAM_BACK", 270.0),
        ("CAM_BACK_RIGHT", 340.0),
        ("CAM_FRONT_RIGHT", 35.0),
    ]
    .into_iter()
    .map(|(id, az)| CameraModel::looking_along(id, f64::to_radians(az), mount, f, f, 800.0, 450.0, 1600.0, 900.0))
    .collect()
}

impl Sim<'_> {
    fn pick_class(&mut self) -> ClassId {
        let total: f64 = self.classes.iter().map(|(_, w)| w).sum();
        let mut u = self.rng.random::<f64>() * total;
        for (c, w) in &self.classes {
            if u < *w {
                return *c;
            }
            u -= w;
        }
        self.classes.last().expect("non-empty class mix").0
    }

    fn jittered_size(&mut self, class: ClassId) -> Size3 {
        let n = nominal_size(class);
        let mut j = || 1.0 + self.rng.random_range(-0.1..0.1);
        Size3::new(n.length * j(), n.width * j(), n.height * j())
    }

    /// Uniform by area over the configured annulus, in ego coordinates.
    fn annulus_point(&mut self) -> (f64, f64) {
        let (r0, r1) = (self.cfg.min_range, self.cfg.max_range);
        let r = (self.rng.random_range(0.0..1.0) * (r1 * r1 - r0 * r0) + r0 * r0).sqrt();
        let theta = self.rng.random_range(0.0..2.0 * PI);
        (r * theta.cos(), r * theta.sin())
    }

    fn ego_pose_at(&self, origin: &Pose, t_s: f64) -> Pose {
        // ego drives along its own +y axis
        let forward = origin.rotation.rotate(Vec3::new(0.0, 1.0, 0.0));
        Pose { translation: origin.translation + forward * (self.cfg.ego_speed * t_s), rotation: origin.rotation }
    }

    fn score(&mut self, p: f64) -> f64 {
        (p + gauss(&mut self.rng, self.cfg.score_jitter)).clamp(0.0, 1.0)
    }

    fn sample_points(&mut self, b: &Box3D, n: u64, out: &mut Vec<Vec3>) {
        let (s, c) = b.yaw.sin_cos();
        for _ in 0..n {
            let u = self.rng.random_range(-0.45..0.45) * b.size.length;
            let v = self.rng.random_range(-0.45..0.45) * b.size.width;
            let w = self.rng.random_range(-0.45..0.45) * b.size.height;
            out.push(b.center + Vec3::new(c * u - s * v, s * u + c * v, w));
        }
    }

    fn lidar_detection(&mut self, truth: &Box3D, class: ClassId, recall: f64) -> Detection {
        let sigma = self.cfg.lidar.sigma;
        let mut b = *truth;
        b.center = b.center + Vec3::new(gauss(&mut self.rng, sigma), gauss(&mut self.rng, sigma), gauss(&mut self.rng, sigma / 2.0));
        b.yaw = normalize_yaw(b.yaw + gauss(&mut self.rng, 0.03));
        let k = 1.0 + gauss(&mut self.rng, 0.02);
        b.size = Size3::new(b.size.length * k.max(0.5), b.size.width * k.max(0.5), b.size.height * k.max(0.5));
        let score = self.score(recall);
        Detection::new(b, class, score, Modality::Lidar)
    }

    fn camera_detection(&mut self, truth: &Box3D, class: ClassId, ego: Vec3, recall: f64) -> Detection {
        let cam = &self.cfg.camera;
        let (kappa, sigma_lat) = (cam.kappa, cam.sigma_lateral);
        let dx = truth.center.x - ego.x;
        let dy = truth.center.y - ego.y;
        let d = dx.hypot(dy).max(1e-6);
        let ray = Vec3::new(dx / d, dy / d, 0.0);
        let lateral = Vec3::new(-ray.y, ray.x, 0.0);
        let mut b = *truth;
        let depth_err = gauss(&mut self.rng, kappa * d * d);
        let lat_err = gauss(&mut self.rng, sigma_lat);
        b.center = b.center + ray * depth_err + lateral * lat_err + Vec3::new(0.0, 0.0, gauss(&mut self.rng, 0.1));
        b.yaw = normalize_yaw(b.yaw + gauss(&mut self.rng, 0.1));
        let mut k = || (1.0 + gauss(&mut self.rng, 0.05)).max(0.5);
        b.size = Size3::new(b.size.length * k(), b.size.width * k(), b.size.height * k());
        let score = self.score(recall);
        Detection::new(b, class, score, Modality::Camera)
    }

    fn run(mut self) -> SynthOutput {
        let cfg = self.cfg;
        let mut out = SynthOutput { scenes: Vec::new(), lidar: DetectionSet::new(), camera: DetectionSet::new() };
        let cameras = if cfg.with_cameras { surround_cameras() } else { Vec::new() };
        for si in 0..cfg.num_scenes {
            let scene_id = format!("scene-{si:04}");
            let origin = Pose::from_yaw(
                self.rng.random_range(-PI..PI),
                Vec3::new(self.rng.random_range(-500.0..500.0), self.rng.random_range(-500.0..500.0), 0.0),
            );
            let base_us = 1_600_000_000_000_000 + si as i64 * 100_000_000;

            let n_obj = poisson(&mut self.rng, cfg.objects_per_scene) as usize;
            let mut instances = Vec::with_capacity(n_obj);
            for k in 0..n_obj {
                let class = self.pick_class();
                let size = self.jittered_size(class);
                let (ex, ey) = self.annulus_point();
                let start = origin.apply(Vec3::new(ex, ey, size.height / 2.0));
                let yaw = self.rng.random_range(-PI..PI);
                let speed = self.rng.random_range(0.0..=cfg.max_object_speed);
                let reflectivity = self.rng.random_range(cfg.lidar.reflectivity_min..=1.0);
                instances.push(Instance {
                    id: format!("{scene_id}-inst-{k:03}"),
                    class,
                    start,
                    velocity: Vec3::new(yaw.cos() * speed, yaw.sin() * speed, 0.0),
                    size,
                    yaw,
                    reflectivity,
                });
            }
            let n_clutter = poisson(&mut self.rng, cfg.clutter_per_scene) as usize;
            let clutter: Vec<(Box3D, f64)> = (0..n_clutter)
                .map(|_| {
                    let (ex, ey) = self.annulus_point();
                    let size = Size3::new(self.rng.random_range(0.5..3.0), self.rng.random_range(0.5..3.0), self.rng.random_range(0.5..2.5));
                    let b = Box3D {
                        center: origin.apply(Vec3::new(ex, ey, size.height / 2.0)),
                        size,
                        yaw: self.rng.random_range(-PI..PI),
                        frame: FrameTag::Global,
                    };
                    (b, self.rng.random_range(0.3..1.0))
                })
                .collect();

            let mut frames = Vec::with_capacity(cfg.frames_per_scene);
            for fi in 0..cfg.frames_per_scene {
                let token = format!("{scene_id}-frame-{fi:02}");
                let ts = base_us + fi as i64 * KEYFRAME_INTERVAL_US;
                let t_s = (ts - base_us) as f64 * 1e-6;
                let ego_pose = self.ego_pose_at(&origin, t_s);

                let mut sweeps = Vec::with_capacity(cfg.sweeps_per_frame);
                for j in (0..cfg.sweeps_per_frame).rev() {
                    let sweep_ts = ts - j as i64 * SWEEP_INTERVAL_US;
                    let sweep_t = (sweep_ts - base_us) as f64 * 1e-6;
                    let sweep_pose = self.ego_pose_at(&origin, sweep_t);
                    let sensor = sweep_pose.translation;
                    let mut points = Vec::new();
                    for inst in &instances {
                        let b = inst.box_at(sweep_t);
                        let n_exp = expected_points(&cfg.lidar, &b, inst.reflectivity, sensor);
                        let n = poisson(&mut self.rng, n_exp).min(cfg.lidar.max_points_per_sweep as u64);
                        self.sample_points(&b, n, &mut points);
                    }
                    for (b, refl) in &clutter {
                        let n_exp = expected_points(&cfg.lidar, b, *refl, sensor);
                        let n = poisson(&mut self.rng, n_exp).min(cfg.lidar.max_points_per_sweep as u64);
                        self.sample_points(b, n, &mut points);
                    }
                    sweeps.push(LidarSweep { timestamp_us: sweep_ts, ego_pose: sweep_pose, points });
                }

                let mut annotations = Vec::with_capacity(instances.len());
                let mut lidar_dets = Vec::new();
                let mut camera_dets = Vec::new();
                for (k, inst) in instances.iter().enumerate() {
                    let b = inst.box_at(t_s);
                    annotations.push(Annotation {
                        token: format!("{token}-ann-{k:03}"),
                        instance_id: inst.id.clone(),
                        class: inst.class,
                        bbox: b,
                        num_lidar_pts_current: 0,
                        num_lidar_pts_10sweep: None,
                    });
                    let n_agg = expected_points(&cfg.lidar, &b, inst.reflectivity, ego_pose.translation)
                        * cfg.sweeps_per_frame as f64;
                    let p_lidar = cfg.lidar_recall(n_agg);
                    if self.rng.random::<f64>() < p_lidar {
                        lidar_dets.push(self.lidar_detection(&b, inst.class, p_lidar));
                    }
                    let p_cam = cfg.camera.recall_for(inst.class);
                    if self.rng.random::<f64>() < p_cam {
                        camera_dets.push(self.camera_detection(&b, inst.class, ego_pose.translation, p_cam));
                        let d = (b.center - ego_pose.translation).norm_xy();
                        if self.rng.random::<f64>() < cfg.camera.duplicate_rate * (d / cfg.max_range).min(1.0) {
                            let mut dup = self.camera_detection(&b, inst.class, ego_pose.translation, p_cam);
                            dup.score = self.score(0.8 * p_cam);
                            camera_dets.push(dup);
                        }
                    }
                }
                for _ in 0..poisson(&mut self.rng, cfg.lidar.false_positives_per_frame) {
                    let class = self.pick_class();
                    let size = self.jittered_size(class);
                    let (ex, ey) = self.annulus_point();
                    let b = Box3D {
                        center: ego_pose.apply(Vec3::new(ex, ey, size.height / 2.0)),
                        size,
                        yaw: self.rng.random_range(-PI..PI),
                        frame: FrameTag::Global,
                    };
                    let n_agg = expected_points(&cfg.lidar, &b, 0.6, ego_pose.translation) * cfg.sweeps_per_frame as f64;
                    let s = self.score(cfg.lidar.fp_score_factor * cfg.lidar_recall(n_agg));
                    lidar_dets.push(Detection::new(b, class, s, Modality::Lidar));
                }
                for _ in 0..poisson(&mut self.rng, cfg.camera.false_positives_per_frame) {
                    let class = self.pick_class();
                    let size = self.jittered_size(class);
                    let (ex, ey) = self.annulus_point();
                    let b = Box3D {
                        center: ego_pose.apply(Vec3::new(ex, ey, size.height / 2.0)),
                        size,
                        yaw: self.rng.random_range(-PI..PI),
                        frame: FrameTag::Global,
                    };
                    let s = self.score(cfg.camera.fp_score_factor * cfg.camera.recall_for(class));
                    camera_dets.push(Detection::new(b, class, s, Modality::Camera));
                }
                out.lidar.insert(token.clone(), lidar_dets);
                out.camera.insert(token.clone(), camera_dets);
                frames.push(Frame { token, timestamp_us: ts, ego_pose, cameras: cameras.clone(), annotations, sweeps });
            }
            let mut scene = Scene { scene_id, frames };
            scene.refresh_point_counts();
            out.scenes.push(scene);
        }
        out
    }
}

/// Deterministic for a fixed `cfg.seed`.
pub fn synth_generate(cfg: &SynthConfig) -> Result<SynthOutput, SynthConfigError> {
    cfg.validate()?;
    let classes = cfg.class_mix.iter().filter(|(_, w)| **w > 0.0).map(|(c, w)| (*c, *w)).collect();
    let sim = Sim { cfg, rng: ChaCha8Rng::seed_from_u64(cfg.seed), classes };
    Ok(sim.run())
}
