//! Seeded synthetic scenarios: boxes on linear trajectories reflecting off
//! the arena walls, observed by strided detectors that drop, jitter and
//! hallucinate boxes.
//!
//! Randomness comes from ChaCha8 (`rand_chacha`), seeded with
//! `ScenarioSpec::rng_seed`; detector `i` draws from stream `i`. Output is
//! therefore identical on every platform for a given spec.

use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use thiserror::Error;

use crate::geometry::BoundingBox;
use crate::mot::{MotRow, NO_ID};

/// Stream used for random object layouts, disjoint from detector streams.
const LAYOUT_STREAM: u64 = 1 << 40;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScenarioError {
    #[error("arena must have positive finite size")]
    Arena,
    #[error("object {0} does not fit inside the arena")]
    ObjectOutside(usize),
    #[error("object {0} has a non-finite velocity")]
    Velocity(usize),
    #[error("detector `{0}`: {1}")]
    Detector(String, &'static str),
    #[error("num_frames must be >= 1")]
    Frames,
}

/// One object: its box at frame 1 and a constant velocity in px/frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectMotion {
    pub start: BoundingBox,
    pub vx: f64,
    pub vy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectorProfile {
    pub name: String,
    pub stride: u32,
    pub phase: u32,
    /// Probability that a true box is dropped.
    pub miss_rate: f64,
    /// Mean number of false boxes per fired frame.
    pub fp_rate: f64,
    /// Standard deviation of the additive noise on every box coordinate.
    pub noise_sigma: f64,
}

impl DetectorProfile {
    /// A detector with no corruption.
    pub fn perfect(name: impl Into<String>, stride: u32, phase: u32) -> Self {
        Self {
            name: name.into(),
            stride,
            phase,
            miss_rate: 0.0,
            fp_rate: 0.0,
            noise_sigma: 0.0,
        }
    }

    pub fn fires_at(&self, frame: u32) -> bool {
        frame > self.phase && (frame - 1 - self.phase).is_multiple_of(self.stride)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub num_frames: u32,
    pub arena_width: f64,
    pub arena_height: f64,
    pub objects: Vec<ObjectMotion>,
    pub detectors: Vec<DetectorProfile>,
    pub rng_seed: u64,
}

impl ScenarioSpec {
    pub fn num_objects(&self) -> usize {
        self.objects.len()
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.num_frames == 0 {
            return Err(ScenarioError::Frames);
        }
        let (aw, ah) = (self.arena_width, self.arena_height);
        if !(aw.is_finite() && ah.is_finite() && aw > 0.0 && ah > 0.0) {
            return Err(ScenarioError::Arena);
        }
        for (i, o) in self.objects.iter().enumerate() {
            let b = &o.start;
            if b.left() < 0.0 || b.top() < 0.0 || b.right() > aw || b.bottom() > ah {
                return Err(ScenarioError::ObjectOutside(i));
            }
            if !(o.vx.is_finite() && o.vy.is_finite()) {
                return Err(ScenarioError::Velocity(i));
            }
        }
        for d in &self.detectors {
            let fail = |msg| Err(ScenarioError::Detector(d.name.clone(), msg));
            if d.stride == 0 || d.phase >= d.stride {
                return fail("need stride >= 1 and phase < stride");
            }
            if !(0.0..=1.0).contains(&d.miss_rate) {
                return fail("miss_rate must be in [0, 1]");
            }
            if !(d.fp_rate.is_finite() && d.fp_rate >= 0.0) {
                return fail("fp_rate must be >= 0");
            }
            if !(d.noise_sigma.is_finite() && d.noise_sigma >= 0.0) {
                return fail("noise_sigma must be >= 0");
            }
        }
        Ok(())
    }

    /// Box of object `index` at `frame`.
    pub fn object_box(&self, index: usize, frame: u32) -> BoundingBox {
        let o = &self.objects[index];
        let b = &o.start;
        let steps = frame.saturating_sub(1) as f64;
        let left = reflect(b.left() + o.vx * steps, self.arena_width - b.width());
        let top = reflect(b.top() + o.vy * steps, self.arena_height - b.height());
        BoundingBox::new(left, top, b.width(), b.height()).expect("size is unchanged")
    }
}

/// Folds an unbounded coordinate into `[0, span]` as if bouncing between
/// walls at 0 and `span`.
fn reflect(x: f64, span: f64) -> f64 {
    if span <= 0.0 {
        return 0.0;
    }
    let period = 2.0 * span;
    let mut u = libm::fmod(x, period);
    if u < 0.0 {
        u += period;
    }
    if u > span {
        period - u
    } else {
        u
    }
}

/// Objects in horizontal lanes, one per lane, moving horizontally so no two
/// ever overlap. Box height is 70% of the lane, width half the height;
/// speeds cycle through 1, 1.5 and 2 px/frame with alternating direction.
pub fn lane_objects(count: usize, arena_width: f64, arena_height: f64) -> Vec<ObjectMotion> {
    let lane = arena_height / count.max(1) as f64;
    let h = 0.7 * lane;
    let w = 0.5 * h;
    (0..count)
        .map(|i| {
            let top = i as f64 * lane + 0.15 * lane;
            let span = (arena_width - w).max(0.0);
            let left = span * ((i * 7 % 11) as f64 / 11.0);
            let speed = 1.0 + 0.5 * (i % 3) as f64;
            let vx = if i % 2 == 0 { speed } else { -speed };
            ObjectMotion {
                start: BoundingBox::new(left, top, w, h).expect("positive lane size"),
                vx,
                vy: 0.0,
            }
        })
        .collect()
}

/// Uniformly placed objects with sizes in `[min_h, max_h]` (width half the
/// height) and velocity components in `[-max_speed, max_speed]`.
pub fn random_objects(
    count: usize,
    arena_width: f64,
    arena_height: f64,
    size_range: (f64, f64),
    max_speed: f64,
    seed: u64,
) -> Vec<ObjectMotion> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(LAYOUT_STREAM);
    let (min_h, max_h) = size_range;
    (0..count)
        .map(|_| {
            let h = min_h + (max_h - min_h) * rng.random::<f64>();
            let w = 0.5 * h;
            let left = (arena_width - w).max(0.0) * rng.random::<f64>();
            let top = (arena_height - h).max(0.0) * rng.random::<f64>();
            let vx = max_speed * (2.0 * rng.random::<f64>() - 1.0);
            let vy = max_speed * (2.0 * rng.random::<f64>() - 1.0);
            ObjectMotion {
                start: BoundingBox::new(left, top, w, h).expect("positive size"),
                vx,
                vy,
            }
        })
        .collect()
}

/// What a detector's corruption did, counted as it happened.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CorruptionStats {
    /// True boxes presented to the detector on its scheduled frames.
    pub object_frames: usize,
    pub missed: usize,
    pub false_positives: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedDetections {
    pub profile: DetectorProfile,
    pub rows: Vec<MotRow>,
    pub stats: CorruptionStats,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub ground_truth: Vec<MotRow>,
    pub detectors: Vec<GeneratedDetections>,
}

/// Smallest box side a perturbed detection may shrink to.
const MIN_SIDE: f64 = 1.0;

pub fn generate_scenario(spec: &ScenarioSpec) -> Result<Scenario, ScenarioError> {
    spec.validate()?;
    let mut ground_truth = Vec::with_capacity(spec.objects.len() * spec.num_frames as usize);
    for frame in 1..=spec.num_frames {
        for i in 0..spec.objects.len() {
            ground_truth.push(MotRow::new(
                frame,
                i as i64 + 1,
                spec.object_box(i, frame),
                1.0,
            ));
        }
    }
    let (fp_min_h, fp_max_h) = spec
        .objects
        .iter()
        .map(|o| o.start.height())
        .fold(None, |acc: Option<(f64, f64)>, h| {
            Some(acc.map_or((h, h), |(lo, hi)| (lo.min(h), hi.max(h))))
        })
        .unwrap_or((20.0, 80.0));

    let mut detectors = Vec::with_capacity(spec.detectors.len());
    for (index, profile) in spec.detectors.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
        rng.set_stream(index as u64);
        let noise = Normal::new(0.0, profile.noise_sigma).expect("validated sigma");
        let fp_count =
            (profile.fp_rate > 0.0).then(|| Poisson::new(profile.fp_rate).expect("validated rate"));
        let mut stats = CorruptionStats::default();
        let mut rows = Vec::new();
        for frame in (1..=spec.num_frames).filter(|f| profile.fires_at(*f)) {
            for i in 0..spec.objects.len() {
                stats.object_frames += 1;
                if rng.random::<f64>() < profile.miss_rate {
                    stats.missed += 1;
                    continue;
                }
                let b = spec.object_box(i, frame);
                let bbox = if profile.noise_sigma > 0.0 {
                    let mut jitter = || noise.sample(&mut rng);
                    let (l, t) = (b.left() + jitter(), b.top() + jitter());
                    let (w, h) = (b.width() + jitter(), b.height() + jitter());
                    BoundingBox::new(l, t, w.max(MIN_SIDE), h.max(MIN_SIDE)).expect("clamped size")
                } else {
                    b
                };
                rows.push(MotRow::new(frame, NO_ID, bbox, 1.0));
            }
            if let Some(poisson) = &fp_count {
                let k = poisson.sample(&mut rng) as usize;
                for _ in 0..k {
                    let h = fp_min_h + (fp_max_h - fp_min_h) * rng.random::<f64>();
                    let w = (0.5 * h).min(spec.arena_width);
                    let h = h.min(spec.arena_height);
                    let l = (spec.arena_width - w) * rng.random::<f64>();
                    let t = (spec.arena_height - h) * rng.random::<f64>();
                    let conf = rng.random::<f64>();
                    let bbox = BoundingBox::new(l, t, w, h).expect("positive size");
                    rows.push(MotRow::new(frame, NO_ID, bbox, conf));
                    stats.false_positives += 1;
                }
            }
        }
        detectors.push(GeneratedDetections {
            profile: profile.clone(),
            rows,
            stats,
        });
    }
    Ok(Scenario {
        ground_truth,
        detectors,
    })
}
