//! TOML run and scenario configuration.
//!
//! Every scalar key can be overridden from the command line with
//! `--<section>.<key> <value>`; flags win over the file, which wins over the
//! built-in defaults. Unknown keys are rejected.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use etrack_core::association::{AssociationParams, CHI2_95_4DOF, DEFAULT_MIN_IOU};
use etrack_core::ensemble::{staggered_phase, DetectorSource, EnsembleSchedule, DEFAULT_NMS_IOU};
use etrack_core::geometry::DetectionSet;
use etrack_core::kalman::MotionModel;
use etrack_core::scenario::{
    lane_objects, random_objects, DetectorProfile, ObjectMotion, ScenarioSpec,
};
use etrack_core::{BoundingBox, TrackerConfig};
use serde::{Deserialize, Serialize};

use crate::io::read_mot_file;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KalmanSection {
    pub pos_sigma_scale: f64,
    pub vel_sigma_scale: f64,
    pub meas_sigma_scale: f64,
}

impl Default for KalmanSection {
    fn default() -> Self {
        let m = MotionModel::default();
        Self {
            pos_sigma_scale: m.pos_sigma_scale,
            vel_sigma_scale: m.vel_sigma_scale,
            meas_sigma_scale: m.meas_sigma_scale,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnsembleSection {
    pub nms_iou: f64,
}

impl Default for EnsembleSection {
    fn default() -> Self {
        Self {
            nms_iou: DEFAULT_NMS_IOU,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AssocSection {
    pub gate_chi2: f64,
    pub min_iou: f64,
}

impl Default for AssocSection {
    fn default() -> Self {
        Self {
            gate_chi2: CHI2_95_4DOF,
            min_iou: DEFAULT_MIN_IOU,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrackerSection {
    pub confirm_hits: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_misses: Option<u32>,
    pub min_confidence: f64,
    /// Last frame to process; defaults to the last frame seen in any source.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub num_frames: Option<u32>,
}

impl Default for TrackerSection {
    fn default() -> Self {
        let d = TrackerConfig::default();
        Self {
            confirm_hits: d.confirm_hits,
            max_misses: d.max_misses,
            min_confidence: d.min_confidence,
            num_frames: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceEntry {
    pub path: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default = "one")]
    pub stride: u32,
    /// Defaults to staggering: source `i` gets phase `i mod stride`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase: Option<u32>,
}

fn one() -> u32 {
    1
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub kalman: KalmanSection,
    pub ensemble: EnsembleSection,
    pub assoc: AssocSection,
    pub tracker: TrackerSection,
    pub sources: Vec<SourceEntry>,
}

/// `--section.key value` pairs pulled out of the argument list.
pub type Overrides = Vec<(String, String)>;

/// Splits dotted `--a.b value` (or `--a.b=value`) flags from the rest of
/// `args`, which are returned untouched.
pub fn split_overrides(args: Vec<String>) -> Result<(Vec<String>, Overrides)> {
    let mut rest = Vec::new();
    let mut overrides = Vec::new();
    let mut it = args.into_iter();
    while let Some(arg) = it.next() {
        let Some(flag) = arg.strip_prefix("--").filter(|f| f.contains('.')) else {
            rest.push(arg);
            continue;
        };
        let (key, value) = match flag.split_once('=') {
            Some((k, v)) => (k.to_string(), v.to_string()),
            None => {
                let v = it
                    .next()
                    .ok_or_else(|| anyhow!("missing value for --{flag}"))?;
                (flag.to_string(), v)
            }
        };
        overrides.push((key, value));
    }
    Ok((rest, overrides))
}

fn override_value(text: &str) -> toml::Value {
    if let Ok(v) = text.parse::<i64>() {
        return toml::Value::Integer(v);
    }
    if let Ok(v) = text.parse::<f64>() {
        return toml::Value::Float(v);
    }
    if let Ok(v) = text.parse::<bool>() {
        return toml::Value::Boolean(v);
    }
    toml::Value::String(text.to_string())
}

/// Applies overrides to a parsed TOML document.
pub fn apply_overrides(doc: &mut toml::Table, overrides: &[(String, String)]) -> Result<()> {
    for (key, value) in overrides {
        let parts: Vec<&str> = key.split('.').collect();
        let (last, sections) = parts.split_last().expect("split yields one part");
        let mut table = &mut *doc;
        for section in sections {
            table = table
                .entry(section.to_string())
                .or_insert_with(|| toml::Value::Table(toml::Table::new()))
                .as_table_mut()
                .ok_or_else(|| anyhow!("--{key}: `{section}` is not a section"))?;
        }
        table.insert(last.to_string(), override_value(value));
    }
    Ok(())
}

fn load_document(path: &Path, overrides: &[(String, String)]) -> Result<toml::Table> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read config {}", path.display()))?;
    let mut doc: toml::Table = text
        .parse()
        .with_context(|| format!("invalid config {}", path.display()))?;
    apply_overrides(&mut doc, overrides)?;
    Ok(doc)
}

impl RunConfig {
    /// Loads `path`, applies overrides and resolves source paths relative to
    /// the config file's directory.
    pub fn load(path: &Path, overrides: &[(String, String)]) -> Result<Self> {
        let doc = load_document(path, overrides)?;
        let mut config: RunConfig = doc
            .try_into()
            .with_context(|| format!("invalid config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for source in &mut config.sources {
            if source.path.is_relative() {
                source.path = base.join(&source.path);
            }
        }
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sources.is_empty() {
            bail!("config names no detector sources");
        }
        for (i, s) in self.sources.iter().enumerate() {
            if s.stride == 0 {
                bail!("sources[{i}].stride must be >= 1");
            }
            if s.phase.is_some_and(|p| p >= s.stride) {
                bail!("sources[{i}].phase must be < stride");
            }
        }
        if self.tracker.num_frames == Some(0) {
            bail!("tracker.num_frames must be >= 1");
        }
        self.tracker_config().validate()?;
        Ok(())
    }

    pub fn tracker_config(&self) -> TrackerConfig {
        TrackerConfig {
            confirm_hits: self.tracker.confirm_hits,
            max_misses: self.tracker.max_misses,
            association: AssociationParams {
                gate_chi2: self.assoc.gate_chi2,
                min_iou: self.assoc.min_iou,
            },
            nms_iou: self.ensemble.nms_iou,
            min_confidence: self.tracker.min_confidence,
            motion: MotionModel {
                pos_sigma_scale: self.kalman.pos_sigma_scale,
                vel_sigma_scale: self.kalman.vel_sigma_scale,
                meas_sigma_scale: self.kalman.meas_sigma_scale,
            },
        }
    }

    /// Reads every source file and builds the schedule. Source `i` gets id
    /// `i`.
    pub fn load_schedule(&self) -> Result<EnsembleSchedule> {
        let mut sources = Vec::with_capacity(self.sources.len());
        for (i, entry) in self.sources.iter().enumerate() {
            let rows = read_mot_file(&entry.path)?;
            let id = i as u32;
            let set = rows
                .iter()
                .map(|r| r.to_detection(id))
                .collect::<Result<DetectionSet, _>>()
                .with_context(|| format!("invalid detection in {}", entry.path.display()))?;
            let name = entry.name.clone().unwrap_or_else(|| format!("source{i}"));
            let phase = entry
                .phase
                .unwrap_or_else(|| staggered_phase(i, entry.stride));
            sources.push(DetectorSource::new(id, name, entry.stride, phase, set)?);
        }
        Ok(EnsembleSchedule::new(sources)?)
    }

    /// Frames to run: `1..=tracker.num_frames`, or up to the last detection.
    pub fn frame_count(&self, schedule: &EnsembleSchedule) -> u32 {
        self.tracker
            .num_frames
            .unwrap_or_else(|| schedule.last_frame().unwrap_or(0))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArenaSection {
    pub width: f64,
    pub height: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LayoutKind {
    Lanes,
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayoutSection {
    pub kind: LayoutKind,
    pub count: usize,
    #[serde(default = "default_min_height")]
    pub min_height: f64,
    #[serde(default = "default_max_height")]
    pub max_height: f64,
    #[serde(default = "default_max_speed")]
    pub max_speed: f64,
}

fn default_min_height() -> f64 {
    40.0
}

fn default_max_height() -> f64 {
    120.0
}

fn default_max_speed() -> f64 {
    2.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectEntry {
    pub left: f64,
    pub top: f64,
    pub width: f64,
    pub height: f64,
    #[serde(default)]
    pub vx: f64,
    #[serde(default)]
    pub vy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorEntry {
    pub name: String,
    #[serde(default = "one")]
    pub stride: u32,
    #[serde(default)]
    pub phase: Option<u32>,
    #[serde(default)]
    pub miss_rate: f64,
    #[serde(default)]
    pub fp_rate: f64,
    #[serde(default)]
    pub noise_sigma: f64,
}

/// Scenario document. Objects come from `layout`, then `objects`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub num_frames: u32,
    #[serde(default)]
    pub rng_seed: u64,
    pub arena: ArenaSection,
    #[serde(default)]
    pub layout: Option<LayoutSection>,
    #[serde(default)]
    pub objects: Vec<ObjectEntry>,
    #[serde(default)]
    pub detectors: Vec<DetectorEntry>,
}

impl ScenarioFile {
    pub fn load(path: &Path, overrides: &[(String, String)]) -> Result<Self> {
        let doc = load_document(path, overrides)?;
        doc.try_into()
            .with_context(|| format!("invalid scenario {}", path.display()))
    }

    pub fn to_spec(&self) -> Result<ScenarioSpec> {
        let (aw, ah) = (self.arena.width, self.arena.height);
        let mut objects = match &self.layout {
            Some(l) if l.kind == LayoutKind::Lanes => lane_objects(l.count, aw, ah),
            Some(l) => random_objects(
                l.count,
                aw,
                ah,
                (l.min_height, l.max_height),
                l.max_speed,
                self.rng_seed,
            ),
            None => Vec::new(),
        };
        for (i, o) in self.objects.iter().enumerate() {
            let start = BoundingBox::new(o.left, o.top, o.width, o.height)
                .with_context(|| format!("objects[{i}]"))?;
            objects.push(ObjectMotion {
                start,
                vx: o.vx,
                vy: o.vy,
            });
        }
        let detectors = self
            .detectors
            .iter()
            .enumerate()
            .map(|(i, d)| DetectorProfile {
                name: d.name.clone(),
                stride: d.stride,
                phase: d.phase.unwrap_or_else(|| staggered_phase(i, d.stride)),
                miss_rate: d.miss_rate,
                fp_rate: d.fp_rate,
                noise_sigma: d.noise_sigma,
            })
            .collect();
        let spec = ScenarioSpec {
            num_frames: self.num_frames,
            arena_width: aw,
            arena_height: ah,
            objects,
            detectors,
            rng_seed: self.rng_seed,
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Run config that tracks the detector files of a generated scenario with
/// default tracker settings. Paths are relative to the scenario directory.
pub fn scenario_run_config(spec: &ScenarioSpec) -> RunConfig {
    RunConfig {
        tracker: TrackerSection {
            num_frames: Some(spec.num_frames),
            ..TrackerSection::default()
        },
        sources: spec
            .detectors
            .iter()
            .map(|d| SourceEntry {
                path: PathBuf::from(crate::io::detector_file_name(&d.name)),
                name: Some(d.name.clone()),
                stride: d.stride,
                phase: Some(d.phase),
            })
            .collect(),
        ..RunConfig::default()
    }
}
