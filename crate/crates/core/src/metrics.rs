//! CLEAR-MOT evaluation of a hypothesis against ground truth.
//!
//! Per frame, correspondences from the previous frame are kept while their
//! IoU stays at or above the threshold; the remaining objects and
//! hypotheses are matched by minimum-cost assignment on `1 - IoU`.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use crate::assignment::{solve_assignment, CostMatrix};
use crate::error::EvalError;
use crate::geometry::iou;
use crate::mot::MotRow;

/// Overlap needed for a ground-truth box and a hypothesis to correspond.
pub const DEFAULT_EVAL_IOU: f64 = 0.5;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EvalReport {
    pub mota: f64,
    /// Mean IoU over matched pairs; 0 when nothing matched.
    pub motp: f64,
    pub gt: usize,
    pub matches: usize,
    pub fp: usize,
    pub fn_: usize,
    pub idsw: usize,
    pub frag: usize,
    pub mostly_tracked: usize,
    pub mostly_lost: usize,
    pub num_objects: usize,
    /// Frames per second, filled in by benchmarks.
    pub hz: Option<f64>,
}

impl EvalReport {
    /// Flat `key=value` lines.
    pub fn to_key_value(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "mota={}", self.mota);
        let _ = writeln!(s, "motp={}", self.motp);
        let _ = writeln!(s, "gt={}", self.gt);
        let _ = writeln!(s, "matches={}", self.matches);
        let _ = writeln!(s, "fp={}", self.fp);
        let _ = writeln!(s, "fn={}", self.fn_);
        let _ = writeln!(s, "idsw={}", self.idsw);
        let _ = writeln!(s, "frag={}", self.frag);
        let _ = writeln!(s, "mt={}", self.mostly_tracked);
        let _ = writeln!(s, "ml={}", self.mostly_lost);
        let _ = writeln!(s, "num_objects={}", self.num_objects);
        if let Some(hz) = self.hz {
            let _ = writeln!(s, "hz={}", hz);
        }
        s
    }

    pub const CSV_HEADER: &'static str = "mota,motp,gt,fp,fn,idsw,frag,mt,ml,num_objects,hz";

    /// One summary row matching [`EvalReport::CSV_HEADER`]; `hz` is empty
    /// when unset.
    pub fn to_csv_row(&self) -> String {
        let mut s = String::new();
        let _ = write!(
            s,
            "{},{},{},{},{},{},{},{},{},{},",
            self.mota,
            self.motp,
            self.gt,
            self.fp,
            self.fn_,
            self.idsw,
            self.frag,
            self.mostly_tracked,
            self.mostly_lost,
            self.num_objects
        );
        if let Some(hz) = self.hz {
            let _ = write!(s, "{}", hz);
        }
        s
    }
}

/// `1 - (FN + FP + IDSW) / GT`. With no ground truth the score is 1 when
/// there are no errors and `-∞` otherwise.
pub fn mota(fn_: usize, fp: usize, idsw: usize, gt: usize) -> f64 {
    let errors = fn_ + fp + idsw;
    if gt == 0 {
        return if errors == 0 { 1.0 } else { f64::NEG_INFINITY };
    }
    1.0 - errors as f64 / gt as f64
}

#[derive(Default)]
struct ObjectStats {
    present: usize,
    tracked: usize,
    ever_tracked: bool,
    /// Status on the last frame the object was present.
    last_tracked: bool,
    frag: usize,
}

type FrameRows<'a> = BTreeMap<u32, (Vec<&'a MotRow>, Vec<&'a MotRow>)>;

fn group<'a>(gt: &'a [MotRow], pred: &'a [MotRow]) -> Result<FrameRows<'a>, EvalError> {
    let mut frames: FrameRows<'a> = BTreeMap::new();
    for (rows, is_gt) in [(gt, true), (pred, false)] {
        let mut seen = BTreeSet::new();
        for r in rows {
            if !seen.insert((r.frame, r.id)) {
                return Err(EvalError::DuplicateIdentity {
                    frame: r.frame,
                    id: r.id,
                });
            }
            let slot = frames.entry(r.frame).or_default();
            if is_gt {
                slot.0.push(r);
            } else {
                slot.1.push(r);
            }
        }
    }
    for (g, p) in frames.values_mut() {
        g.sort_by_key(|r| r.id);
        p.sort_by_key(|r| r.id);
    }
    Ok(frames)
}

/// CLEAR-MOT scores of `pred` against `gt`.
pub fn evaluate(
    gt: &[MotRow],
    pred: &[MotRow],
    iou_threshold: f64,
) -> Result<EvalReport, EvalError> {
    if !(iou_threshold > 0.0 && iou_threshold <= 1.0) {
        return Err(EvalError::Threshold);
    }
    let frames = group(gt, pred)?;
    let mut report = EvalReport::default();
    let mut objects: BTreeMap<i64, ObjectStats> = BTreeMap::new();
    let mut last_match: BTreeMap<i64, i64> = BTreeMap::new();
    let mut previous: BTreeMap<i64, i64> = BTreeMap::new();
    let mut iou_sum = 0.0;

    for (gts, preds) in frames.values() {
        let mut gt_used = alloc::vec![false; gts.len()];
        let mut pred_used = alloc::vec![false; preds.len()];
        let mut pairs: Vec<(usize, usize, f64)> = Vec::new();

        for (gi, g) in gts.iter().enumerate() {
            let Some(&pid) = previous.get(&g.id) else {
                continue;
            };
            if let Ok(pi) = preds.binary_search_by_key(&pid, |p| p.id) {
                let overlap = iou(&g.bbox, &preds[pi].bbox);
                if overlap >= iou_threshold && !pred_used[pi] {
                    gt_used[gi] = true;
                    pred_used[pi] = true;
                    pairs.push((gi, pi, overlap));
                }
            }
        }

        let free_g: Vec<usize> = (0..gts.len()).filter(|i| !gt_used[*i]).collect();
        let free_p: Vec<usize> = (0..preds.len()).filter(|i| !pred_used[*i]).collect();
        let costs = CostMatrix::from_fn(free_g.len(), free_p.len(), |r, c| {
            let overlap = iou(&gts[free_g[r]].bbox, &preds[free_p[c]].bbox);
            if overlap >= iou_threshold {
                1.0 - overlap
            } else {
                f64::INFINITY
            }
        });
        for (r, c) in solve_assignment(&costs).matches {
            let (gi, pi) = (free_g[r], free_p[c]);
            gt_used[gi] = true;
            pred_used[pi] = true;
            pairs.push((gi, pi, iou(&gts[gi].bbox, &preds[pi].bbox)));
        }

        previous.clear();
        for &(gi, pi, overlap) in &pairs {
            let (gid, pid) = (gts[gi].id, preds[pi].id);
            if last_match.get(&gid).is_some_and(|&last| last != pid) {
                report.idsw += 1;
            }
            last_match.insert(gid, pid);
            previous.insert(gid, pid);
            iou_sum += overlap;
        }
        report.matches += pairs.len();
        report.fp += pred_used.iter().filter(|u| !**u).count();
        report.fn_ += gt_used.iter().filter(|u| !**u).count();
        report.gt += gts.len();

        for (gi, g) in gts.iter().enumerate() {
            let stats = objects.entry(g.id).or_default();
            let tracked = gt_used[gi];
            stats.present += 1;
            if tracked {
                stats.tracked += 1;
                if stats.ever_tracked && !stats.last_tracked {
                    stats.frag += 1;
                }
                stats.ever_tracked = true;
            }
            stats.last_tracked = tracked;
        }
    }

    report.num_objects = objects.len();
    for s in objects.values() {
        let ratio = s.tracked as f64 / s.present as f64;
        if ratio >= 0.8 {
            report.mostly_tracked += 1;
        } else if ratio <= 0.2 {
            report.mostly_lost += 1;
        }
        report.frag += s.frag;
    }
    report.mota = mota(report.fn_, report.fp, report.idsw, report.gt);
    report.motp = if report.matches == 0 {
        0.0
    } else {
        iou_sum / report.matches as f64
    };
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::BoundingBox;
    use alloc::vec;

    fn row(frame: u32, id: i64, l: f64) -> MotRow {
        MotRow::new(
            frame,
            id,
            BoundingBox::new(l, 0.0, 10.0, 20.0).unwrap(),
            1.0,
        )
    }

    #[test]
    fn perfect_hypothesis() {
        let gt: Vec<MotRow> = (1..=4)
            .flat_map(|f| [row(f, 1, 0.0), row(f, 2, 50.0)])
            .collect();
        let r = evaluate(&gt, &gt, 0.5).unwrap();
        assert_eq!((r.mota, r.motp), (1.0, 1.0));
        assert_eq!((r.fp, r.fn_, r.idsw, r.frag), (0, 0, 0, 0));
        assert_eq!(r.mostly_tracked, 2);
        assert_eq!(r.num_objects, 2);
    }

    #[test]
    fn empty_hypothesis() {
        let gt: Vec<MotRow> = (1..=3).map(|f| row(f, 1, 0.0)).collect();
        let r = evaluate(&gt, &[], 0.5).unwrap();
        assert_eq!(r.mota, 0.0);
        assert_eq!(r.fn_, 3);
        assert_eq!(r.mostly_lost, 1);
    }

    #[test]
    fn five_frame_toy() {
        let gt: Vec<MotRow> = (1..=5).map(|f| row(f, 1, 0.0)).collect();
        let pred = vec![
            row(1, 7, 0.0),
            row(2, 7, 0.0),
            row(4, 8, 0.0),
            row(5, 8, 0.0),
        ];
        let r = evaluate(&gt, &pred, 0.5).unwrap();
        // Hand count: frame 3 is a miss, frame 4 switches 7 -> 8 after the gap.
        assert_eq!((r.fn_, r.fp, r.idsw, r.gt, r.frag), (1, 0, 1, 5, 1));
        assert!((r.mota - 0.6).abs() < 1e-12);
    }

    #[test]
    fn carry_over_prevents_switch() {
        // Hypothesis 9 keeps object 1 even though 8 overlaps it better later.
        let gt = vec![row(1, 1, 0.0), row(2, 1, 0.0)];
        let pred = vec![
            row(1, 9, 2.0),
            MotRow::new(2, 8, BoundingBox::new(0.0, 0.0, 10.0, 20.0).unwrap(), 1.0),
            row(2, 9, 2.0),
        ];
        let r = evaluate(&gt, &pred, 0.5).unwrap();
        assert_eq!((r.idsw, r.fp), (0, 1));
    }

    #[test]
    fn duplicate_identity_rejected() {
        let gt = vec![row(1, 1, 0.0), row(1, 1, 5.0)];
        assert_eq!(
            evaluate(&gt, &[], 0.5),
            Err(EvalError::DuplicateIdentity { frame: 1, id: 1 })
        );
    }

    #[test]
    fn false_positive_only_frame() {
        let gt = vec![row(1, 1, 0.0)];
        let pred = vec![row(1, 3, 0.0), row(2, 4, 100.0)];
        let r = evaluate(&gt, &pred, 0.5).unwrap();
        assert_eq!((r.fp, r.fn_), (1, 0));
        assert_eq!(r.mota, 0.0);
    }

    #[test]
    fn serializations() {
        let gt = vec![row(1, 1, 0.0)];
        let mut r = evaluate(&gt, &gt, 0.5).unwrap();
        assert!(r.to_key_value().starts_with("mota=1\nmotp=1\n"));
        assert_eq!(r.to_csv_row(), "1,1,1,0,0,0,0,1,0,1,");
        r.hz = Some(1500.5);
        assert!(r.to_key_value().ends_with("hz=1500.5\n"));
        assert_eq!(
            r.to_csv_row().split(',').count(),
            EvalReport::CSV_HEADER.split(',').count()
        );
    }

    #[test]
    fn no_ground_truth() {
        assert_eq!(mota(0, 0, 0, 0), 1.0);
        assert_eq!(mota(0, 2, 0, 0), f64::NEG_INFINITY);
    }
}
