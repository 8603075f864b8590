//! Axis-aligned boxes in MOT Challenge convention and the detection types
//! built on them.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::error::GeometryError;

/// Axis-aligned box stored as `(left, top, width, height)` in pixels.
///
/// Width and height are strictly positive and every coordinate is finite;
/// both are checked on construction so the rest of the crate never has to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    left: f64,
    top: f64,
    width: f64,
    height: f64,
}

impl BoundingBox {
    pub fn new(left: f64, top: f64, width: f64, height: f64) -> Result<Self, GeometryError> {
        if !(left.is_finite() && top.is_finite() && width.is_finite() && height.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        if width <= 0.0 || height <= 0.0 {
            return Err(GeometryError::NonPositiveDimension);
        }
        Ok(Self {
            left,
            top,
            width,
            height,
        })
    }

    /// Builds a box from center form `(cx, cy, w, h)`.
    pub fn from_center(cx: f64, cy: f64, width: f64, height: f64) -> Result<Self, GeometryError> {
        Self::new(cx - width / 2.0, cy - height / 2.0, width, height)
    }

    pub fn left(&self) -> f64 {
        self.left
    }

    pub fn top(&self) -> f64 {
        self.top
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn height(&self) -> f64 {
        self.height
    }

    pub fn right(&self) -> f64 {
        self.left + self.width
    }

    pub fn bottom(&self) -> f64 {
        self.top + self.height
    }

    pub fn area(&self) -> f64 {
        self.width * self.height
    }

    /// `(cx, cy, w, h)`.
    pub fn center_form(&self) -> [f64; 4] {
        [
            self.left + self.width / 2.0,
            self.top + self.height / 2.0,
            self.width,
            self.height,
        ]
    }

    /// Area of the overlap with `other`, zero when disjoint.
    pub fn intersection_area(&self, other: &BoundingBox) -> f64 {
        let w = self.right().min(other.right()) - self.left.max(other.left);
        let h = self.bottom().min(other.bottom()) - self.top.max(other.top);
        if w <= 0.0 || h <= 0.0 {
            0.0
        } else {
            w * h
        }
    }
}

/// Intersection over union, in `[0, 1]`.
pub fn iou(a: &BoundingBox, b: &BoundingBox) -> f64 {
    // `(top + h) - top` need not round back to `h`.
    if a == b {
        return 1.0;
    }
    let inter = a.intersection_area(b);
    if inter == 0.0 {
        return 0.0;
    }
    let union = a.area() + b.area() - inter;
    (inter / union).clamp(0.0, 1.0)
}

/// Confidence value used for detections that carry no score.
pub const UNSCORED: f64 = -1.0;

/// One detector observation at one frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    pub frame: u32,
    pub bbox: BoundingBox,
    /// In `[0, 1]`, or [`UNSCORED`].
    pub confidence: f64,
    pub source_id: u32,
}

impl Detection {
    pub fn new(
        frame: u32,
        bbox: BoundingBox,
        confidence: f64,
        source_id: u32,
    ) -> Result<Self, GeometryError> {
        if frame == 0 {
            return Err(GeometryError::ZeroFrame);
        }
        if !(confidence == UNSCORED || (0.0..=1.0).contains(&confidence)) {
            return Err(GeometryError::ConfidenceOutOfRange);
        }
        Ok(Self {
            frame,
            bbox,
            confidence,
            source_id,
        })
    }
}

/// All detections of one source, grouped by frame.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DetectionSet {
    frames: BTreeMap<u32, Vec<Detection>>,
}

impl DetectionSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a detection under its own frame index, keeping insertion
    /// order within the frame.
    pub fn push(&mut self, det: Detection) {
        self.frames.entry(det.frame).or_default().push(det);
    }

    pub fn frame(&self, frame: u32) -> &[Detection] {
        self.frames.get(&frame).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn frames(&self) -> impl Iterator<Item = (u32, &[Detection])> {
        self.frames.iter().map(|(f, d)| (*f, d.as_slice()))
    }

    pub fn last_frame(&self) -> Option<u32> {
        self.frames.keys().next_back().copied()
    }

    pub fn len(&self) -> usize {
        self.frames.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.values().all(Vec::is_empty)
    }
}

impl FromIterator<Detection> for DetectionSet {
    fn from_iter<I: IntoIterator<Item = Detection>>(iter: I) -> Self {
        let mut set = Self::new();
        for det in iter {
            set.push(det);
        }
        set
    }
}

/// Ranking used by [`nms`]: confidence descending, then area descending,
/// then source id ascending.
fn suppression_order(a: &Detection, b: &Detection) -> Ordering {
    b.confidence
        .total_cmp(&a.confidence)
        .then_with(|| b.bbox.area().total_cmp(&a.bbox.area()))
        .then_with(|| a.source_id.cmp(&b.source_id))
}

/// Greedy non-maximum suppression.
///
/// A detection survives iff its IoU with every previously kept detection is
/// strictly below `iou_threshold`. The output is in ranking order.
pub fn nms(dets: &[Detection], iou_threshold: f64) -> Vec<Detection> {
    let mut ranked: Vec<Detection> = dets.to_vec();
    ranked.sort_by(suppression_order);
    let mut kept: Vec<Detection> = Vec::with_capacity(ranked.len());
    for det in ranked {
        if kept.iter().all(|k| iou(&k.bbox, &det.bbox) < iou_threshold) {
            kept.push(det);
        }
    }
    kept
}
