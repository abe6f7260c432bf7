//! Run configuration: defaults, then the JSON config file, then flags.

use std::path::{Path, PathBuf};

use anyhow::Context;
use farfield::dataset::synth::SynthConfig;
use farfield::fusion::FusionConfig;
use farfield::metrics::{DistanceBand, EvalConfig};
use farfield::visibility::OcclusionConfig;
use farfield::CountMode;
use serde::{Deserialize, Serialize};

pub const RESOLVED_CONFIG: &str = "resolved_config.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    /// Seeds synthesis and audit sampling; overrides `synth.seed`.
    pub seed: u64,
    pub out: PathBuf,
    pub synth: SynthConfig,
    pub evaluate: EvaluateSettings,
    pub fuse: FuseSettings,
    pub visibility: VisibilitySettings,
    pub audit: AuditSettings,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            out: PathBuf::from("out"),
            synth: SynthConfig::default(),
            evaluate: EvaluateSettings::default(),
            fuse: FuseSettings::default(),
            visibility: VisibilitySettings::default(),
            audit: AuditSettings::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedPath {
    pub name: String,
    pub path: PathBuf,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvaluateSettings {
    pub scenes: Option<PathBuf>,
    pub dets: Vec<NamedPath>,
    /// Skip invalid detection records instead of failing.
    pub lenient: bool,
    pub eval: EvalConfig,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FuseSettings {
    pub scenes: Option<PathBuf>,
    pub lidar: Option<PathBuf>,
    pub camera: Option<PathBuf>,
    pub fusion: FusionConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VisibilitySettings {
    pub scenes: Option<PathBuf>,
    pub mode: CountMode,
    pub bands: Vec<DistanceBand>,
    pub max_range: f64,
    pub occlusion: OcclusionConfig,
}

impl Default for VisibilitySettings {
    fn default() -> Self {
        VisibilitySettings {
            scenes: None,
            mode: CountMode::CurrentSweep,
            bands: vec![DistanceBand::new(0.0, 50.0), DistanceBand::new(50.0, 80.0)],
            max_range: 80.0,
            occlusion: OcclusionConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AuditSettings {
    pub scenes: Option<PathBuf>,
    pub sample: usize,
    pub bin_width: f64,
    pub max_range: f64,
}

impl Default for AuditSettings {
    fn default() -> Self {
        AuditSettings { scenes: None, sample: 20, bin_width: 5.0, max_range: 80.0 }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<RunConfig> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandList(pub Vec<DistanceBand>);

/// Parses `"0-50,50-80"`.
pub fn parse_bands(s: &str) -> Result<BandList, String> {
    s.split(',')
        .map(|part| {
            let (lo, hi) = part.trim().split_once('-').ok_or_else(|| format!("band {part:?} is not MIN-MAX"))?;
            let lo: f64 = lo.trim().parse().map_err(|_| format!("bad band start in {part:?}"))?;
            let hi: f64 = hi.trim().parse().map_err(|_| format!("bad band end in {part:?}"))?;
            if !(lo >= 0.0 && lo < hi) {
                return Err(format!("band {part:?} must satisfy 0 <= min < max"));
            }
            Ok(DistanceBand::new(lo, hi))
        })
        .collect::<Result<_, _>>()
        .map(BandList)
}

/// Parses six comma-separated numbers.
pub fn parse_weights(s: &str) -> Result<[f64; 6], String> {
    let v: Vec<f64> = s.split(',').map(|x| x.trim().parse::<f64>().map_err(|_| format!("bad number {x:?}"))).collect::<Result<_, _>>()?;
    v.try_into().map_err(|v: Vec<f64>| format!("expected 6 values, got {}", v.len()))
}

/// Parses `NAME=PATH` or a bare path named after its file stem.
pub fn parse_named_path(s: &str) -> Result<NamedPath, String> {
    match s.split_once('=') {
        Some((name, path)) if !name.is_empty() => Ok(NamedPath { name: name.into(), path: path.into() }),
        _ => {
            let path = PathBuf::from(s);
            let name = path.file_stem().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| s.to_string());
            Ok(NamedPath { name, path })
        }
    }
}
