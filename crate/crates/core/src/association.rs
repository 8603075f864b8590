//! Gated track-to-detection association.
//!
//! Pair cost is the negative log-likelihood of the detection under the
//! track's predictive measurement distribution. Pairs whose squared
//! Mahalanobis distance exceeds the gate are inadmissible.

use alloc::vec::Vec;

use crate::assignment::{solve_assignment, AssociationResult, CostMatrix};
use crate::error::FilterError;
use crate::geometry::{iou, Detection};
use crate::kalman::{measurement, state_box, KalmanTrackState, MotionModel};

/// 95% quantile of the chi-square distribution with 4 degrees of freedom.
pub const CHI2_95_4DOF: f64 = 9.488;

/// Default IoU floor applied after assignment.
pub const DEFAULT_MIN_IOU: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssociationParams {
    /// Gate on the squared Mahalanobis distance.
    pub gate_chi2: f64,
    /// Matches whose predicted box overlaps the detection less than this
    /// are split back into unmatched rows and columns.
    pub min_iou: f64,
}

impl Default for AssociationParams {
    fn default() -> Self {
        Self {
            gate_chi2: CHI2_95_4DOF,
            min_iou: DEFAULT_MIN_IOU,
        }
    }
}

/// Negative log-likelihood costs, offset so the smallest admissible entry is
/// zero; gated-out pairs are `+∞`.
pub fn cost_matrix(
    states: &[KalmanTrackState],
    dets: &[Detection],
    gate_chi2: f64,
    model: &MotionModel,
) -> Result<CostMatrix, FilterError> {
    let measurements: Vec<_> = dets.iter().map(|d| measurement(&d.bbox)).collect();
    let mut data = Vec::with_capacity(states.len() * dets.len());
    for state in states {
        let projection = model.project(state)?;
        for z in &measurements {
            let d2 = projection.mahalanobis(z);
            if d2 > gate_chi2 {
                data.push(f64::INFINITY);
            } else {
                data.push(-projection.log_likelihood(z));
            }
        }
    }
    Ok(CostMatrix::new(states.len(), dets.len(), data).normalized())
}

/// Matches predicted track states to detections of the same frame.
pub fn associate(
    states: &[KalmanTrackState],
    dets: &[Detection],
    params: &AssociationParams,
    model: &MotionModel,
) -> Result<AssociationResult, FilterError> {
    let costs = cost_matrix(states, dets, params.gate_chi2, model)?;
    let solved = solve_assignment(&costs);
    let kept = solved
        .matches
        .into_iter()
        .filter(|&(t, d)| {
            state_box(&states[t]).is_some_and(|b| iou(&b, &dets[d].bbox) >= params.min_iou)
        })
        .collect();
    Ok(AssociationResult::from_matches(
        states.len(),
        dets.len(),
        kept,
    ))
}
