use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use farfield::dataset::synth::{synth_generate, SynthConfigError};
use farfield::dataset::{detections_to_json, load_detections, load_detections_lenient, load_scenes, scenes_to_json};
use farfield::fusion::{fuse_sets, FarSource, FusionMethod, IouKind, LogisticScorer};
use farfield::metrics::{legacy_class_ranges, ApMode, ThresholdScheme};
use farfield::report::{markdown_table, report_json};
use farfield::visibility::{annotation_density, audit_sample, classify_scenes, zero_lidar_stats, GtMode, ZeroLidarStats};
use farfield::{evaluate, CountMode, DataError, DetectionSet, DistanceBand, EvalError, EvalReport, FusionError, Scene, VisibilityVerdict};
use serde::Serialize;

use crate::config::{RunConfig, RESOLVED_CONFIG};
use crate::{ApModeArg, Cli, Command, CountModeArg, FarSourceArg, GtModeArg, IouKindArg, MethodArg, SchemeArg};

/// Bad user input: a missing argument or an unusable path.
#[derive(Debug)]
struct Usage(String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

/// 2 for anything traceable to the user's input or environment, 1 otherwise.
pub fn exit_code(e: &anyhow::Error) -> u8 {
    let user_fault = e.chain().any(|c| {
        c.is::<Usage>()
            || c.is::<DataError>()
            || c.is::<EvalError>()
            || c.is::<FusionError>()
            || c.is::<SynthConfigError>()
            || c.is::<std::io::Error>()
            || c.is::<serde_json::Error>()
    });
    if user_fault {
        2
    } else {
        1
    }
}

fn required(p: &Option<PathBuf>, flag: &str) -> Result<PathBuf> {
    p.clone().ok_or_else(|| Usage(format!("{flag} is required")).into())
}

struct Output {
    dir: PathBuf,
    stdout: bool,
}

impl Output {
    fn new(dir: &Path, stdout: bool) -> Result<Output> {
        fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))?;
        Ok(Output { dir: dir.to_path_buf(), stdout })
    }

    fn write(&self, name: &str, contents: &str) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))
    }

    /// Writes the file and echoes it when `--stdout` is set.
    fn primary(&self, name: &str, contents: &str) -> Result<()> {
        self.write(name, contents)?;
        if self.stdout {
            print!("{contents}");
        }
        Ok(())
    }
}

fn pretty<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable output");
    s.push('\n');
    s
}

/// Merges defaults, the config file and flags into the resolved run config.
pub fn resolve(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    cfg.synth.seed = cfg.seed;
    if let Some(o) = &cli.out {
        cfg.out = o.clone();
    }
    match &cli.command {
        Command::Synth(a) => {
            let s = &mut cfg.synth;
            if let Some(v) = a.num_scenes {
                s.num_scenes = v;
            }
            if let Some(v) = a.frames_per_scene {
                s.frames_per_scene = v;
            }
            if let Some(v) = a.objects_per_scene {
                s.objects_per_scene = v;
            }
        }
        Command::Evaluate(a) => {
            let e = &mut cfg.evaluate;
            if a.scenes.is_some() {
                e.scenes = a.scenes.clone();
            }
            if !a.dets.is_empty() {
                e.dets = a.dets.clone();
            }
            e.lenient |= a.lenient;
            let ec = &mut e.eval;
            if let Some(s) = a.scheme {
                ec.scheme = match s {
                    SchemeArg::Default => ThresholdScheme::default_set(),
                    SchemeArg::Fixed4 => ThresholdScheme::Fixed(4.0),
                    SchemeArg::Linear => ThresholdScheme::Linear,
                    SchemeArg::Quadratic => ThresholdScheme::Quadratic,
                    SchemeArg::Elliptical => ThresholdScheme::Elliptical,
                };
            }
            if let Some(b) = &a.bands {
                ec.bands = b.0.clone();
            }
            if let Some(m) = a.gt_mode {
                ec.gt_mode = match m {
                    GtModeArg::DropAllZeroLidar => GtMode::DropAllZeroLidar,
                    GtModeArg::IncludeUnoccludedZeroLidar => GtMode::IncludeUnoccludedZeroLidar,
                    GtModeArg::IncludeAll => GtMode::IncludeAll,
                };
            }
            if let Some(m) = a.ap_mode {
                ec.ap_mode = match m {
                    ApModeArg::FullArea => ApMode::FullArea,
                    ApModeArg::Nuscenes => ApMode::NuScenesNormalized,
                };
            }
            if let Some(r) = a.max_range {
                ec.max_range = r;
            }
            if let Some(c) = &a.classes {
                ec.classes = c.clone();
            }
            if a.legacy_ranges {
                ec.per_class_legacy_ranges = Some(legacy_class_ranges());
            }
        }
        Command::Fuse(a) => {
            let f = &mut cfg.fuse;
            for (slot, v) in [(&mut f.scenes, &a.scenes), (&mut f.lidar, &a.lidar), (&mut f.camera, &a.camera)] {
                if v.is_some() {
                    *slot = v.clone();
                }
            }
            let fc = &mut f.fusion;
            if let Some(m) = a.method {
                fc.method = match m {
                    MethodArg::Nms => FusionMethod::Nms,
                    MethodArg::Adanms => FusionMethod::AdaNms,
                    MethodArg::Distance => FusionMethod::Distance,
                    MethodArg::Bayes => FusionMethod::Bayes,
                    MethodArg::Clocs => FusionMethod::Clocs,
                };
            }
            if let Some(v) = a.iou {
                fc.nms_iou = v;
            }
            for (slot, v) in [(&mut fc.adanms.d1, a.d1), (&mut fc.adanms.c1, a.c1), (&mut fc.adanms.d2, a.d2), (&mut fc.adanms.c2, a.c2)] {
                if let Some(v) = v {
                    *slot = v;
                }
            }
            if let Some(tc) = a.tc {
                fc.distance.t_c.values_mut().for_each(|t| *t = tc);
            }
            if let Some(s) = a.far_source {
                fc.distance.far_source = match s {
                    FarSourceArg::Nms => FarSource::NmsFused,
                    FarSourceArg::Adanms => FarSource::AdaNmsFused,
                    FarSourceArg::Camera => FarSource::CameraOnly,
                };
            }
            if let Some(v) = a.pair_iou {
                fc.pair_iou = v;
            }
            if let Some(w) = &a.scorer_weights {
                fc.scorer = LogisticScorer { weights: [w[0], w[1], w[2], w[3], w[4]], bias: w[5] };
            }
            if let Some(k) = a.iou_kind {
                fc.iou_kind = match k {
                    IouKindArg::Bev => IouKind::Bev,
                    IouKindArg::ThreeD => IouKind::ThreeD,
                };
            }
        }
        Command::Visibility(a) => {
            let v = &mut cfg.visibility;
            if a.scenes.is_some() {
                v.scenes = a.scenes.clone();
            }
            if let Some(m) = a.mode {
                v.mode = match m {
                    CountModeArg::Current => CountMode::CurrentSweep,
                    CountModeArg::TenSweep => CountMode::TenSweepInterpolated,
                };
            }
            if let Some(b) = &a.bands {
                v.bands = b.0.clone();
            }
            if let Some(r) = a.max_range {
                v.max_range = r;
            }
        }
        Command::Audit(a) => {
            let au = &mut cfg.audit;
            if a.scenes.is_some() {
                au.scenes = a.scenes.clone();
            }
            if let Some(n) = a.sample {
                au.sample = n;
            }
            if let Some(w) = a.bin_width {
                au.bin_width = w;
            }
            if let Some(r) = a.max_range {
                au.max_range = r;
            }
        }
    }
    Ok(cfg)
}

pub fn run(cli: Cli) -> Result<()> {
    let cfg = resolve(&cli)?;
    let out = Output::new(&cfg.out, cli.stdout)?;
    match &cli.command {
        Command::Synth(_) => synth(&cfg, &out)?,
        Command::Evaluate(_) => evaluate_cmd(&cfg, &out)?,
        Command::Fuse(_) => fuse(&cfg, &out)?,
        Command::Visibility(_) => visibility(&cfg, &out)?,
        Command::Audit(_) => audit(&cfg, &out)?,
    }
    out.write(RESOLVED_CONFIG, &cfg.to_json())
}

fn synth(cfg: &RunConfig, out: &Output) -> Result<()> {
    let data = synth_generate(&cfg.synth)?;
    out.write("scenes.json", &(scenes_to_json(&data.scenes) + "\n"))?;
    out.write("dets_lidar.json", &(detections_to_json(&data.lidar) + "\n"))?;
    out.write("dets_camera.json", &(detections_to_json(&data.camera) + "\n"))?;
    let annotations: usize = data.scenes.iter().flat_map(|s| &s.frames).map(|f| f.annotations.len()).sum();
    let summary = serde_json::json!({
        "scenes": data.scenes.len(),
        "frames": data.scenes.iter().map(|s| s.frames.len()).sum::<usize>(),
        "annotations": annotations,
        "lidar_detections": data.lidar.values().map(Vec::len).sum::<usize>(),
        "camera_detections": data.camera.values().map(Vec::len).sum::<usize>(),
    });
    out.primary("synth_summary.json", &pretty(&summary))
}

fn load_dets(path: &Path, lenient: bool) -> Result<DetectionSet> {
    if !lenient {
        return Ok(load_detections(path)?);
    }
    let l = load_detections_lenient(path)?;
    for r in &l.rejections {
        eprintln!("skipped {}: {}", r.record, r.reason);
    }
    eprintln!("{}: kept {} of {} records", path.display(), l.records_in - l.rejections.len(), l.records_in);
    Ok(l.detections)
}

#[derive(Serialize)]
struct NamedReport<'a> {
    name: &'a str,
    report: &'a EvalReport,
}

fn evaluate_cmd(cfg: &RunConfig, out: &Output) -> Result<()> {
    let e = &cfg.evaluate;
    let scenes = load_scenes(required(&e.scenes, "--scenes")?)?;
    if e.dets.is_empty() {
        return Err(Usage("at least one --dets file is required".into()).into());
    }
    let mut reports = Vec::with_capacity(e.dets.len());
    for d in &e.dets {
        let dets = load_dets(&d.path, e.lenient)?;
        let report = evaluate(&dets, &scenes, &e.eval).with_context(|| format!("evaluating {}", d.path.display()))?;
        reports.push((d.name.as_str(), report));
    }
    let rows: Vec<(&str, &EvalReport)> = reports.iter().map(|(n, r)| (*n, r)).collect();
    let named: Vec<NamedReport> = rows.iter().map(|(name, report)| NamedReport { name, report }).collect();
    out.write("report.md", &markdown_table(&rows))?;
    let json = if named.len() == 1 { report_json(named[0].report) } else { pretty(&named) };
    out.primary("report.json", &json)
}

fn fuse(cfg: &RunConfig, out: &Output) -> Result<()> {
    let f = &cfg.fuse;
    let scenes = load_scenes(required(&f.scenes, "--scenes")?)?;
    let lidar = load_detections(required(&f.lidar, "--lidar")?)?;
    let camera = load_detections(required(&f.camera, "--camera")?)?;
    let fused = fuse_sets(&lidar, &camera, &scenes, &f.fusion)?;
    out.primary("fused.json", &(detections_to_json(&fused) + "\n"))
}

#[derive(Serialize)]
struct BandStats {
    band: DistanceBand,
    stats: ZeroLidarStats,
}

#[derive(Serialize)]
struct VisibilityStats {
    mode: CountMode,
    bands: Vec<BandStats>,
}

fn visibility(cfg: &RunConfig, out: &Output) -> Result<()> {
    let v = &cfg.visibility;
    let scenes = load_scenes(required(&v.scenes, "--scenes")?)?;
    let overall = DistanceBand::new(0.0, v.max_range);
    let bands = std::iter::once(overall)
        .chain(v.bands.iter().copied())
        .map(|band| BandStats { band, stats: zero_lidar_stats(&scenes, v.mode, band, &v.occlusion) })
        .collect();
    let verdicts = classify_scenes(&scenes, &v.occlusion);
    let per_annotation: BTreeMap<&str, VisibilityVerdict> = all_frames(&scenes)
        .flat_map(|f| f.annotations.iter().zip(&verdicts[&f.token]).map(|(a, v)| (a.token.as_str(), *v)))
        .collect();
    out.write("verdicts.json", &pretty(&per_annotation))?;
    out.primary("zero_lidar_stats.json", &pretty(&VisibilityStats { mode: v.mode, bands }))
}

fn all_frames(scenes: &[Scene]) -> impl Iterator<Item = &farfield::Frame> {
    scenes.iter().flat_map(|s| &s.frames)
}

fn audit(cfg: &RunConfig, out: &Output) -> Result<()> {
    let a = &cfg.audit;
    if !(a.bin_width > 0.0 && a.max_range > 0.0) {
        return Err(Usage("--bin-width and --max-range must be positive".into()).into());
    }
    let scenes = load_scenes(required(&a.scenes, "--scenes")?)?;
    out.write("density.csv", &annotation_density(&scenes, a.bin_width, a.max_range).to_csv())?;
    let samples: Vec<_> =
        scenes.iter().enumerate().map(|(i, s)| audit_sample(s, a.sample, cfg.seed.wrapping_add(i as u64))).collect();
    out.primary("audit_sample.json", &pretty(&samples))
}
