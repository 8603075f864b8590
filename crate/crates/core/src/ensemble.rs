//! Detector ensemble: every source fires on its own stride and phase, and the
//! detections of all sources firing at a frame are fused by greedy NMS.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::TrackerError;
use crate::geometry::{nms, Detection, DetectionSet};

/// Default IoU above which fused detections suppress each other.
pub const DEFAULT_NMS_IOU: f64 = 0.7;

#[derive(Debug, Clone, PartialEq)]
pub struct DetectorSource {
    pub source_id: u32,
    pub name: String,
    stride: u32,
    phase: u32,
    pub detections: DetectionSet,
}

impl DetectorSource {
    /// Fails unless `stride >= 1` and `phase < stride`.
    pub fn new(
        source_id: u32,
        name: impl Into<String>,
        stride: u32,
        phase: u32,
        detections: DetectionSet,
    ) -> Result<Self, TrackerError> {
        if stride == 0 {
            return Err(TrackerError::Config("source stride must be >= 1"));
        }
        if phase >= stride {
            return Err(TrackerError::Config("source phase must be < stride"));
        }
        Ok(Self {
            source_id,
            name: name.into(),
            stride,
            phase,
            detections,
        })
    }

    pub fn stride(&self) -> u32 {
        self.stride
    }

    pub fn phase(&self) -> u32 {
        self.phase
    }

    /// Whether this source runs at `frame` (1-based).
    pub fn fires_at(&self, frame: u32) -> bool {
        frame > self.phase && (frame - 1 - self.phase).is_multiple_of(self.stride)
    }
}

/// Phase that staggers source `index` uniformly within `stride`.
pub fn staggered_phase(index: usize, stride: u32) -> u32 {
    (index as u64 % stride.max(1) as u64) as u32
}

/// The set of sources, kept sorted by `source_id`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EnsembleSchedule {
    sources: Vec<DetectorSource>,
}

impl EnsembleSchedule {
    pub fn new(mut sources: Vec<DetectorSource>) -> Result<Self, TrackerError> {
        sources.sort_by_key(|s| s.source_id);
        if sources.windows(2).any(|w| w[0].source_id == w[1].source_id) {
            return Err(TrackerError::Config("duplicate source id"));
        }
        Ok(Self { sources })
    }

    pub fn sources(&self) -> &[DetectorSource] {
        &self.sources
    }

    pub fn max_stride(&self) -> u32 {
        self.sources.iter().map(|s| s.stride).max().unwrap_or(1)
    }

    /// Last frame carrying any detection in any source.
    pub fn last_frame(&self) -> Option<u32> {
        self.sources
            .iter()
            .filter_map(|s| s.detections.last_frame())
            .max()
    }

    /// Ids of the sources that fire at `frame`, ascending.
    pub fn active_sources(&self, frame: u32) -> Vec<u32> {
        self.sources
            .iter()
            .filter(|s| s.fires_at(frame))
            .map(|s| s.source_id)
            .collect()
    }

    /// Gathers the detections of every source firing at `frame` and fuses
    /// them with NMS. Detections a source reports on a frame it is not
    /// scheduled for are ignored.
    pub fn fuse_frame(&self, frame: u32, iou_threshold: f64) -> FrameBundle {
        let mut active = Vec::new();
        let mut gathered: Vec<Detection> = Vec::new();
        for source in self.sources.iter().filter(|s| s.fires_at(frame)) {
            active.push(source.source_id);
            gathered.extend(source.detections.frame(frame).iter().map(|d| Detection {
                source_id: source.source_id,
                ..*d
            }));
        }
        FrameBundle {
            frame,
            detections: nms(&gathered, iou_threshold),
            active_sources: active,
        }
    }
}

/// Fused detections of one frame, along with which sources ran.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameBundle {
    pub frame: u32,
    pub detections: Vec<Detection>,
    pub active_sources: Vec<u32>,
}

impl FrameBundle {
    /// True when at least one detector ran on this frame, whether or not
    /// it reported anything.
    pub fn any_fired(&self) -> bool {
        !self.active_sources.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::BoundingBox;
    use alloc::vec;

    fn source(id: u32, stride: u32, phase: u32, dets: &[(u32, [f64; 4], f64)]) -> DetectorSource {
        let set = dets
            .iter()
            .map(|(f, b, c)| {
                Detection::new(
                    *f,
                    BoundingBox::new(b[0], b[1], b[2], b[3]).unwrap(),
                    *c,
                    id,
                )
                .unwrap()
            })
            .collect();
        DetectorSource::new(id, "s", stride, phase, set).unwrap()
    }

    #[test]
    fn invalid_sources_rejected() {
        assert!(DetectorSource::new(0, "a", 0, 0, DetectionSet::new()).is_err());
        assert!(DetectorSource::new(0, "a", 2, 2, DetectionSet::new()).is_err());
        let dup = EnsembleSchedule::new(vec![source(1, 1, 0, &[]), source(1, 2, 0, &[])]);
        assert!(dup.is_err());
    }

    #[test]
    fn stride_one_always_active() {
        let s = EnsembleSchedule::new(vec![source(0, 1, 0, &[])]).unwrap();
        assert!((1..50).all(|f| s.active_sources(f) == [0]));
    }

    #[test]
    fn complementary_stride_two() {
        let s = EnsembleSchedule::new(vec![source(0, 2, 0, &[]), source(1, 2, 1, &[])]).unwrap();
        for f in 1..50u32 {
            let expect = if f % 2 == 1 { 0 } else { 1 };
            assert_eq!(s.active_sources(f), [expect]);
        }
    }

    #[test]
    fn coprime_strides_coincide_every_six() {
        let s = EnsembleSchedule::new(vec![source(0, 2, 0, &[]), source(1, 3, 0, &[])]).unwrap();
        let both: Vec<u32> = (1..=20)
            .filter(|f| s.active_sources(*f).len() == 2)
            .collect();
        // Direct enumeration: (f - 1) % 2 == 0 && (f - 1) % 3 == 0.
        let oracle: Vec<u32> = (1..=20u32)
            .filter(|f| (f - 1) % 2 == 0 && (f - 1) % 3 == 0)
            .collect();
        assert_eq!(oracle, [1, 7, 13, 19]);
        assert_eq!(both, oracle);
    }

    #[test]
    fn phase_delays_first_firing() {
        let s = source(0, 3, 2, &[]);
        let fired: Vec<u32> = (1..=10).filter(|f| s.fires_at(*f)).collect();
        assert_eq!(fired, [3, 6, 9]);
    }

    #[test]
    fn silent_frame_is_empty() {
        let s = EnsembleSchedule::new(vec![source(0, 2, 1, &[])]).unwrap();
        let b = s.fuse_frame(1, 0.7);
        assert!(b.detections.is_empty() && b.active_sources.is_empty());
        let b = s.fuse_frame(2, 0.7);
        assert!(b.detections.is_empty());
        assert_eq!(b.active_sources, [0]);
        assert!(b.any_fired());
    }

    #[test]
    fn overlapping_sources_fuse_to_best() {
        // Same object, IoU 0.9 between the two reports.
        let a = [0.0, 0.0, 100.0, 100.0];
        let b = [0.0, 0.0, 90.0, 100.0];
        let s = EnsembleSchedule::new(vec![
            source(0, 1, 0, &[(1, a, 0.6)]),
            source(1, 1, 0, &[(1, b, 0.8)]),
        ])
        .unwrap();
        let bundle = s.fuse_frame(1, 0.7);
        assert_eq!(bundle.detections.len(), 1);
        assert_eq!(bundle.detections[0].confidence, 0.8);
        assert_eq!(bundle.detections[0].source_id, 1);
    }

    #[test]
    fn disjoint_sources_both_kept() {
        let s = EnsembleSchedule::new(vec![
            source(0, 1, 0, &[(1, [0.0, 0.0, 10.0, 10.0], 0.6)]),
            source(1, 1, 0, &[(1, [50.0, 0.0, 10.0, 10.0], 0.8)]),
        ])
        .unwrap();
        assert_eq!(s.fuse_frame(1, 0.7).detections.len(), 2);
    }

    #[test]
    fn unscheduled_rows_ignored() {
        let s = EnsembleSchedule::new(vec![source(0, 2, 0, &[(2, [0.0, 0.0, 10.0, 10.0], 0.6)])])
            .unwrap();
        assert!(s.fuse_frame(2, 0.7).detections.is_empty());
    }
}
