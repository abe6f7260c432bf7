use farfield::fusion::{
    adanms, adanms_threshold, bayes_combine, clocs_features, distance_fusion, nms, DistanceFusionConfig, FarSource,
};
use farfield::geom::rotated_iou_bev;
use farfield::{AdaNmsConfig, Box3D, ClassId, FusionConfig, FusionMethod, IouKind, Modality};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

mod common {
    #[path = "../common/oracles.rs"]
    pub mod oracles;
    #[path = "../common/fixtures.rs"]
    pub mod fixtures;
}
use common::fixtures::{ego_dist, random_dets, random_pose};

const CASES: usize = 1000;

#[test]
fn nms_and_adanms_are_idempotent_and_spread_out() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let cfg = AdaNmsConfig::default();
    for _ in 0..CASES {
        let pose = random_pose(&mut rng);
        let dets = random_dets(&mut rng, &pose, Modality::Lidar);
        let thr = rng.random_range(0.05..0.6);

        let once = nms(&dets, thr, IouKind::Bev);
        assert_eq!(nms(&once, thr, IouKind::Bev), once);
        let ada = adanms(&dets, &cfg, &pose, IouKind::Bev);
        assert_eq!(adanms(&ada, &cfg, &pose, IouKind::Bev), ada);

        for (i, a) in once.iter().enumerate() {
            for b in &once[i + 1..] {
                if a.class == b.class {
                    assert!(rotated_iou_bev(&a.bbox, &b.bbox).unwrap() <= thr);
                }
            }
        }
        for (i, a) in ada.iter().enumerate() {
            for b in &ada[i + 1..] {
                if a.class == b.class {
                    let t = adanms_threshold((ego_dist(&pose, &a.bbox) + ego_dist(&pose, &b.bbox)) / 2.0, &cfg);
                    assert!(rotated_iou_bev(&a.bbox, &b.bbox).unwrap() <= t + 1e-12);
                }
            }
        }
    }
}

#[test]
fn fusion_never_fabricates_geometry() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let methods = [FusionMethod::Nms, FusionMethod::AdaNms, FusionMethod::Distance, FusionMethod::Bayes, FusionMethod::Clocs];
    for case in 0..CASES {
        let pose = random_pose(&mut rng);
        let lidar = random_dets(&mut rng, &pose, Modality::Lidar);
        let camera = random_dets(&mut rng, &pose, Modality::Camera);
        let bits = |b: &Box3D| {
            [b.center.x, b.center.y, b.center.z, b.size.length, b.size.width, b.size.height, b.yaw].map(f64::to_bits)
        };
        let inputs: Vec<_> = lidar.iter().chain(&camera).map(|d| bits(&d.bbox)).collect();
        let method = methods[case % methods.len()];
        let cfg = FusionConfig { method, ..FusionConfig::default() };
        let out = cfg.fuse_frame(&lidar, &camera, &pose);
        for d in &out {
            assert!(inputs.contains(&bits(&d.bbox)), "{method:?} invented a box");
            assert!((0.0..=1.0).contains(&d.score));
        }
        if matches!(method, FusionMethod::Nms | FusionMethod::AdaNms | FusionMethod::Distance) {
            let scores: Vec<f64> = lidar.iter().chain(&camera).map(|d| d.score).collect();
            assert!(out.iter().all(|d| scores.contains(&d.score)), "{method:?} changed a score");
        }
    }
}

#[test]
fn distance_fusion_is_an_exact_partition() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..CASES {
        let pose = random_pose(&mut rng);
        let lidar = random_dets(&mut rng, &pose, Modality::Lidar);
        let camera = random_dets(&mut rng, &pose, Modality::Camera);
        let mut cfg = DistanceFusionConfig::uniform(rng.random_range(5.0..80.0), FarSource::CameraOnly);
        cfg.t_c.insert(ClassId::Pedestrian, rng.random_range(5.0..80.0));
        let out = distance_fusion(&lidar, &camera, &cfg, &pose);
        let near = lidar.iter().filter(|d| ego_dist(&pose, &d.bbox) < cfg.t_c[&d.class]).count();
        let far = camera.iter().filter(|d| ego_dist(&pose, &d.bbox) >= cfg.t_c[&d.class]).count();
        assert_eq!(out.len(), near + far);
        for d in &out {
            let gate = cfg.t_c[&d.class];
            match d.modality {
                Modality::Lidar => assert!(ego_dist(&pose, &d.bbox) < gate && lidar.contains(d)),
                Modality::Camera => assert!(ego_dist(&pose, &d.bbox) >= gate && camera.contains(d)),
                Modality::Fused => panic!("distance_fusion does not relabel"),
            }
        }
    }
}

#[test]
fn bayes_combination_properties() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..CASES {
        let (a, b) = (rng.random_range(0.0..=1.0), rng.random_range(0.0..=1.0));
        let s = bayes_combine(a, b);
        assert!((0.0..=1.0).contains(&s));
        assert!((s - bayes_combine(b, a)).abs() < 1e-15);
        assert!((bayes_combine(a, 0.5) - a).abs() < 1e-12);
        if a > 0.5 && b > 0.5 {
            assert!(s > a && s > b, "{a} {b} -> {s}");
        }
        let step = rng.random_range(0.0..0.2);
        let a2 = (a + step).min(1.0);
        if !(a2 == 1.0 && b == 0.0) && !(a == 0.0 && b == 1.0) {
            assert!(bayes_combine(a2, b) >= s - 1e-12, "{a}->{a2} with {b}");
        }
    }
}

#[test]
fn adanms_threshold_is_monotone_and_continuous() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..CASES {
        let d1 = rng.random_range(0.0..40.0);
        let c1 = rng.random_range(0.1..1.0);
        let cfg = AdaNmsConfig { d1, d2: d1 + rng.random_range(1.0..80.0), c1, c2: c1 * rng.random_range(0.01..0.99) };
        let slope = (cfg.c1 - cfg.c2) / (cfg.d2 - cfg.d1);
        let mut prev = adanms_threshold(0.0, &cfg);
        let h = 0.05;
        for k in 1..=3000 {
            let t = adanms_threshold(k as f64 * h, &cfg);
            assert!(t <= prev);
            assert!(prev - t <= slope * h + 1e-12);
            prev = t;
        }
        assert_eq!(adanms_threshold(0.0, &cfg), cfg.c1);
        assert_eq!(adanms_threshold(1e6, &cfg), cfg.c2);
    }
}

#[test]
fn clocs_features_recompute() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..CASES {
        let pose = random_pose(&mut rng);
        let lidar = random_dets(&mut rng, &pose, Modality::Lidar);
        let camera = random_dets(&mut rng, &pose, Modality::Camera);
        for ((i, j), f) in clocs_features(&lidar, &camera, &pose) {
            let (l, c) = (&lidar[i], &camera[j]);
            assert_eq!(l.class, c.class);
            let (dx, dy, dz) = (l.bbox.center.x - c.bbox.center.x, l.bbox.center.y - c.bbox.center.y, l.bbox.center.z - c.bbox.center.z);
            assert!((f.d_ij - (dx * dx + dy * dy + dz * dz).sqrt()).abs() < 1e-9);
            assert!((f.d_j - ego_dist(&pose, &c.bbox)).abs() < 1e-9);
            assert_eq!((f.s_i, f.s_j), (l.score, c.score));
            assert!(f.iou3d > 0.0 && f.iou3d <= 1.0);
        }
    }
}
