//! Wall-clock throughput of the tracking loop.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::{Duration, Instant};

use anyhow::{bail, Result};
use etrack_core::tracker::{run_sequence_observed, Stage, StageObserver};
use etrack_core::{EnsembleSchedule, TrackerConfig};

#[derive(Debug, Default)]
struct StageClock {
    started: Option<(Stage, Instant)>,
    totals: BTreeMap<Stage, Duration>,
}

impl StageObserver for StageClock {
    fn enter(&mut self, stage: Stage) {
        self.started = Some((stage, Instant::now()));
    }

    fn leave(&mut self, stage: Stage) {
        if let Some((s, t0)) = self.started.take() {
            debug_assert_eq!(s, stage);
            *self.totals.entry(stage).or_default() += t0.elapsed();
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Throughput {
    pub frames: u32,
    /// Median frames per second over the repeats.
    pub hz: f64,
    pub runs_hz: Vec<f64>,
    /// Seconds spent per stage in the median run.
    pub stages: BTreeMap<Stage, f64>,
}

impl Throughput {
    pub fn to_key_value(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "frames={}", self.frames);
        let _ = writeln!(s, "hz={}", self.hz);
        let _ = writeln!(s, "repeats={}", self.runs_hz.len());
        for stage in Stage::ALL {
            let secs = self.stages.get(&stage).copied().unwrap_or(0.0);
            let _ = writeln!(s, "stage.{}_ms={:.3}", stage.name(), secs * 1e3);
        }
        s
    }
}

/// Shortest interval credited to a run, so empty loads still give a finite
/// rate.
const MIN_ELAPSED: Duration = Duration::from_nanos(1);

/// Runs the whole sequence `repeats` times on already-loaded detections and
/// reports the median rate. Nothing here touches the filesystem.
pub fn measure_throughput(
    schedule: &EnsembleSchedule,
    frames: u32,
    config: &TrackerConfig,
    repeats: usize,
) -> Result<Throughput> {
    if repeats < 3 {
        bail!("repeats must be >= 3");
    }
    let mut runs: Vec<(f64, BTreeMap<Stage, f64>)> = Vec::with_capacity(repeats);
    for _ in 0..repeats {
        let mut clock = StageClock::default();
        let t0 = Instant::now();
        let out = run_sequence_observed(schedule, 1..=frames, config, &mut clock)?;
        let elapsed = t0.elapsed().max(MIN_ELAPSED);
        std::hint::black_box(out);
        let stages = clock
            .totals
            .into_iter()
            .map(|(k, v)| (k, v.as_secs_f64()))
            .collect();
        runs.push((frames as f64 / elapsed.as_secs_f64(), stages));
    }
    let runs_hz: Vec<f64> = runs.iter().map(|r| r.0).collect();
    runs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (hz, stages) = runs.swap_remove(repeats / 2);
    Ok(Throughput {
        frames,
        hz,
        runs_hz,
        stages,
    })
}
