//! Online tracking loop: predict, associate, update, spawn and retire tracks
//! frame by frame over fused ensemble output.

use alloc::vec::Vec;
use core::ops::RangeInclusive;

use crate::association::{associate, AssociationParams};
use crate::ensemble::{EnsembleSchedule, FrameBundle, DEFAULT_NMS_IOU};
use crate::error::TrackerError;
use crate::geometry::{BoundingBox, Detection, UNSCORED};
use crate::kalman::{state_box, KalmanTrackState, MotionModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TrackStatus {
    Tentative,
    Confirmed,
    Dead,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Track {
    pub id: u32,
    pub status: TrackStatus,
    pub state: KalmanTrackState,
    /// Consecutive updates.
    pub hits: u32,
    /// Consecutive misses on frames where some detector ran.
    pub misses: u32,
    pub first_frame: u32,
    pub last_update_frame: u32,
    pub history: Vec<(u32, BoundingBox)>,
}

impl Track {
    pub fn current_box(&self) -> Option<BoundingBox> {
        self.history.last().map(|(_, b)| *b)
    }

    pub fn is_live(&self) -> bool {
        self.status != TrackStatus::Dead
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackerConfig {
    pub confirm_hits: u32,
    /// `None` resolves to `max(2 × largest source stride, 3)`.
    pub max_misses: Option<u32>,
    pub association: AssociationParams,
    pub nms_iou: f64,
    /// Detections scoring below this are dropped; unscored ones always pass.
    pub min_confidence: f64,
    pub motion: MotionModel,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        Self {
            confirm_hits: 3,
            max_misses: None,
            association: AssociationParams::default(),
            nms_iou: DEFAULT_NMS_IOU,
            min_confidence: 0.3,
            motion: MotionModel::default(),
        }
    }
}

impl TrackerConfig {
    pub fn validate(&self) -> Result<(), TrackerError> {
        if self.confirm_hits == 0 {
            return Err(TrackerError::Config("confirm_hits must be >= 1"));
        }
        if !(self.nms_iou > 0.0 && self.nms_iou <= 1.0) {
            return Err(TrackerError::Config("nms_iou must be in (0, 1]"));
        }
        if !(0.0..=1.0).contains(&self.min_confidence) {
            return Err(TrackerError::Config("min_confidence must be in [0, 1]"));
        }
        if !(0.0..=1.0).contains(&self.association.min_iou) {
            return Err(TrackerError::Config("min_iou must be in [0, 1]"));
        }
        if self.association.gate_chi2.is_nan() || self.association.gate_chi2 <= 0.0 {
            return Err(TrackerError::Config("gate_chi2 must be > 0"));
        }
        MotionModel::new(
            self.motion.pos_sigma_scale,
            self.motion.vel_sigma_scale,
            self.motion.meas_sigma_scale,
        )?;
        Ok(())
    }

    pub fn resolved_max_misses(&self, max_stride: u32) -> u32 {
        self.max_misses
            .unwrap_or_else(|| 2u32.saturating_mul(max_stride).max(3))
    }
}

/// Pipeline stage, for per-stage timing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Stage {
    Fuse,
    Predict,
    Associate,
    Update,
}

impl Stage {
    pub const ALL: [Stage; 4] = [Stage::Fuse, Stage::Predict, Stage::Associate, Stage::Update];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Fuse => "fuse",
            Stage::Predict => "predict",
            Stage::Associate => "associate",
            Stage::Update => "update",
        }
    }
}

/// Receives stage boundaries from the tracking loop. The core has no clock;
/// callers with one plug it in here.
pub trait StageObserver {
    fn enter(&mut self, _stage: Stage) {}
    fn leave(&mut self, _stage: Stage) {}
}

impl StageObserver for () {}

/// One emitted box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutputRow {
    pub frame: u32,
    pub track_id: u32,
    pub bbox: BoundingBox,
}

/// Boxes of confirmed tracks, ordered by `(frame, track_id)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrackerOutput {
    pub rows: Vec<OutputRow>,
}

impl TrackerOutput {
    pub fn distinct_ids(&self) -> usize {
        let mut ids: Vec<u32> = self.rows.iter().map(|r| r.track_id).collect();
        ids.sort_unstable();
        ids.dedup();
        ids.len()
    }
}

#[derive(Debug, Clone)]
pub struct Tracker {
    config: TrackerConfig,
    max_misses: u32,
    live: Vec<Track>,
    retired: Vec<Track>,
    next_id: u32,
    last_frame: Option<u32>,
}

impl Tracker {
    /// `max_stride` is the largest source stride, used to resolve the
    /// default miss budget.
    pub fn new(config: TrackerConfig, max_stride: u32) -> Result<Self, TrackerError> {
        config.validate()?;
        Ok(Self {
            max_misses: config.resolved_max_misses(max_stride),
            config,
            live: Vec::new(),
            retired: Vec::new(),
            next_id: 1,
            last_frame: None,
        })
    }

    pub fn config(&self) -> &TrackerConfig {
        &self.config
    }

    pub fn max_misses(&self) -> u32 {
        self.max_misses
    }

    pub fn live_tracks(&self) -> &[Track] {
        &self.live
    }

    pub fn retired_tracks(&self) -> &[Track] {
        &self.retired
    }

    pub fn step_frame(
        &mut self,
        bundle: &FrameBundle,
    ) -> Result<Vec<(u32, BoundingBox)>, TrackerError> {
        self.step_frame_observed(bundle, &mut ())
    }

    /// Advances all tracks to `bundle.frame` and returns the boxes of the
    /// confirmed tracks, ordered by id.
    pub fn step_frame_observed(
        &mut self,
        bundle: &FrameBundle,
        observer: &mut impl StageObserver,
    ) -> Result<Vec<(u32, BoundingBox)>, TrackerError> {
        let frame = bundle.frame;
        if let Some(previous) = self.last_frame {
            if frame <= previous {
                return Err(TrackerError::NonMonotoneFrame { previous, frame });
            }
        }
        let dt = self.last_frame.map_or(1, |p| frame - p);
        let min_conf = self.config.min_confidence;
        let dets: Vec<Detection> = bundle
            .detections
            .iter()
            .filter(|d| d.confidence == UNSCORED || d.confidence >= min_conf)
            .copied()
            .collect();

        observer.enter(Stage::Predict);
        let model = self.config.motion;
        let mut predicted: Vec<Option<BoundingBox>> = Vec::with_capacity(self.live.len());
        for track in &mut self.live {
            track.state = model.predict(&track.state, dt);
            predicted.push(state_box(&track.state));
        }
        // A collapsed box has left the model's domain.
        let mut k = 0;
        while k < self.live.len() {
            if predicted[k].is_none() {
                let mut t = self.live.remove(k);
                predicted.remove(k);
                t.status = TrackStatus::Dead;
                self.retired.push(t);
            } else {
                k += 1;
            }
        }
        observer.leave(Stage::Predict);

        observer.enter(Stage::Associate);
        let states: Vec<KalmanTrackState> = self.live.iter().map(|t| t.state).collect();
        let result = associate(&states, &dets, &self.config.association, &model)?;
        observer.leave(Stage::Associate);

        observer.enter(Stage::Update);
        let mut current: Vec<BoundingBox> = predicted.into_iter().flatten().collect();
        for &(t, d) in &result.matches {
            let track = &mut self.live[t];
            track.state = model.update(&track.state, &dets[d])?;
            track.hits += 1;
            track.misses = 0;
            track.last_update_frame = frame;
            current[t] = dets[d].bbox;
        }
        if bundle.any_fired() {
            for &t in &result.unmatched_tracks {
                let track = &mut self.live[t];
                track.misses += 1;
                track.hits = 0;
                if track.misses > self.max_misses {
                    track.status = TrackStatus::Dead;
                }
            }
        }
        for (track, bbox) in self.live.iter_mut().zip(&current) {
            if track.is_live() {
                track.history.push((frame, *bbox));
            }
        }
        for &d in &result.unmatched_detections {
            let det = &dets[d];
            self.live.push(Track {
                id: self.next_id,
                status: TrackStatus::Tentative,
                state: model.initiate(det),
                hits: 1,
                misses: 0,
                first_frame: frame,
                last_update_frame: frame,
                history: alloc::vec![(frame, det.bbox)],
            });
            self.next_id += 1;
        }
        let confirm_hits = self.config.confirm_hits;
        for track in &mut self.live {
            if track.status == TrackStatus::Tentative && track.hits >= confirm_hits {
                track.status = TrackStatus::Confirmed;
            }
        }
        let (live, dead): (Vec<Track>, Vec<Track>) = core::mem::take(&mut self.live)
            .into_iter()
            .partition(Track::is_live);
        self.live = live;
        self.retired.extend(dead);
        let mut emitted: Vec<(u32, BoundingBox)> = self
            .live
            .iter()
            .filter(|t| t.status == TrackStatus::Confirmed)
            .filter_map(|t| t.current_box().map(|b| (t.id, b)))
            .collect();
        emitted.sort_by_key(|(id, _)| *id);
        observer.leave(Stage::Update);

        self.last_frame = Some(frame);
        Ok(emitted)
    }
}

/// Runs the tracker over every frame in `frames`, fusing the ensemble
/// output of each frame first.
pub fn run_sequence(
    schedule: &EnsembleSchedule,
    frames: RangeInclusive<u32>,
    config: &TrackerConfig,
) -> Result<TrackerOutput, TrackerError> {
    run_sequence_observed(schedule, frames, config, &mut ())
}

pub fn run_sequence_observed(
    schedule: &EnsembleSchedule,
    frames: RangeInclusive<u32>,
    config: &TrackerConfig,
    observer: &mut impl StageObserver,
) -> Result<TrackerOutput, TrackerError> {
    if *frames.start() == 0 {
        return Err(TrackerError::Config("frames are 1-based"));
    }
    let mut tracker = Tracker::new(*config, schedule.max_stride())?;
    let mut output = TrackerOutput::default();
    for frame in frames {
        observer.enter(Stage::Fuse);
        let bundle = schedule.fuse_frame(frame, config.nms_iou);
        observer.leave(Stage::Fuse);
        for (track_id, bbox) in tracker.step_frame_observed(&bundle, observer)? {
            output.rows.push(OutputRow {
                frame,
                track_id,
                bbox,
            });
        }
    }
    Ok(output)
}
