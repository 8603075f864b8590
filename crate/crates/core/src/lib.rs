//! Tracking-by-detection core for staggered detector ensembles.
//!
//! Detections from several detectors, each running every `stride` frames at
//! its own phase, are fused per frame with NMS and linked into tracks by a
//! constant-velocity Kalman filter and gated minimum-cost assignment. The
//! crate also carries the MOT Challenge row codec, a seeded synthetic
//! scenario generator and CLEAR-MOT evaluation. It is `no_std` and needs
//! only `alloc`.
#![no_std]

extern crate alloc;

pub mod assignment;
pub mod association;
pub mod ensemble;
pub mod error;
pub mod geometry;
pub mod kalman;
pub mod metrics;
pub mod mot;
pub mod scenario;
pub mod tracker;

pub use assignment::{solve_assignment, AssociationResult, CostMatrix};
pub use association::{associate, AssociationParams, CHI2_95_4DOF};
pub use ensemble::{DetectorSource, EnsembleSchedule, FrameBundle};
pub use error::{EvalError, FilterError, GeometryError, TrackerError};
pub use geometry::{iou, nms, BoundingBox, Detection, DetectionSet};
pub use kalman::{GaussianState, KalmanTrackState, MotionModel};
pub use metrics::{evaluate, EvalReport};
pub use mot::MotRow;
pub use scenario::{generate_scenario, Scenario, ScenarioSpec};
pub use tracker::{run_sequence, Track, TrackStatus, Tracker, TrackerConfig, TrackerOutput};
