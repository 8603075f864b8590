#![allow(dead_code)]

use etrack_core::ensemble::{DetectorSource, EnsembleSchedule};
use etrack_core::geometry::DetectionSet;
use etrack_core::scenario::{random_objects, DetectorProfile, Scenario, ScenarioSpec};

pub const ARENA: (f64, f64) = (1920.0, 1080.0);

pub fn schedule_from(scenario: &Scenario) -> EnsembleSchedule {
    let sources = scenario
        .detectors
        .iter()
        .enumerate()
        .map(|(i, d)| {
            let set: DetectionSet = d
                .rows
                .iter()
                .map(|r| r.to_detection(i as u32).unwrap())
                .collect();
            DetectorSource::new(
                i as u32,
                d.profile.name.clone(),
                d.profile.stride,
                d.profile.phase,
                set,
            )
            .unwrap()
        })
        .collect();
    EnsembleSchedule::new(sources).unwrap()
}

pub fn noisy(name: &str, stride: u32, phase: u32, fp_rate: f64) -> DetectorProfile {
    DetectorProfile {
        noise_sigma: 2.0,
        miss_rate: 0.1,
        fp_rate,
        ..DetectorProfile::perfect(name, stride, phase)
    }
}

/// 20 randomly placed objects seen by the given detectors.
pub fn twenty_objects(frames: u32, detectors: Vec<DetectorProfile>) -> ScenarioSpec {
    ScenarioSpec {
        num_frames: frames,
        arena_width: ARENA.0,
        arena_height: ARENA.1,
        objects: random_objects(20, ARENA.0, ARENA.1, (40.0, 120.0), 2.0, 2024),
        detectors,
        rng_seed: 2024,
    }
}

/// The throughput load: 20 objects, two staggered stride-2 noisy detectors.
pub fn standard_load(frames: u32) -> ScenarioSpec {
    twenty_objects(frames, vec![noisy("a", 2, 0, 0.5), noisy("b", 2, 1, 0.5)])
}
