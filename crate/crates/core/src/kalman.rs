//! Linear-Gaussian motion model for box tracks.
//!
//! The generic [`GaussianState`] carries the filter arithmetic for any state
//! and measurement dimension; [`MotionModel`] instantiates it for boxes with
//! state `(cx, cy, w, h, vcx, vcy, vw, vh)` under constant velocity, observing
//! `(cx, cy, w, h)`. Noise standard deviations scale with the box height.

use nalgebra::{Cholesky, Const, SMatrix, SVector};

use crate::error::{FilterError, TrackerError};
use crate::geometry::{BoundingBox, Detection};

/// `ln(2π)`.
const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Gaussian belief `N(mean, covariance)` over an `N`-dimensional state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianState<const N: usize> {
    pub mean: SVector<f64, N>,
    pub covariance: SMatrix<f64, N, N>,
}

/// Per-track state: box center, size and their per-frame velocities.
pub type KalmanTrackState = GaussianState<8>;

fn symmetrized<const N: usize>(m: SMatrix<f64, N, N>) -> SMatrix<f64, N, N> {
    (m + m.transpose()) * 0.5
}

impl<const N: usize> GaussianState<N> {
    pub fn new(mean: SVector<f64, N>, covariance: SMatrix<f64, N, N>) -> Self {
        Self { mean, covariance }
    }

    /// Time update: `x ← F x`, `P ← F P Fᵀ + Q`.
    pub fn predict_linear(
        &self,
        transition: &SMatrix<f64, N, N>,
        process_noise: &SMatrix<f64, N, N>,
    ) -> Self {
        let mean = transition * self.mean;
        let covariance = transition * self.covariance * transition.transpose() + process_noise;
        Self {
            mean,
            covariance: symmetrized(covariance),
        }
    }

    /// Predictive distribution of an `M`-dimensional linear measurement.
    pub fn project<const M: usize>(
        &self,
        observation: &SMatrix<f64, M, N>,
        measurement_noise: &SMatrix<f64, M, M>,
    ) -> Result<Projection<M>, FilterError> {
        let mean = observation * self.mean;
        let innovation_cov = symmetrized(
            observation * self.covariance * observation.transpose() + measurement_noise,
        );
        Projection::new(mean, innovation_cov)
    }

    /// Measurement update with `z ~ N(H x, R)`.
    pub fn update_linear<const M: usize>(
        &self,
        measurement: &SVector<f64, M>,
        observation: &SMatrix<f64, M, N>,
        measurement_noise: &SMatrix<f64, M, M>,
    ) -> Result<Self, FilterError> {
        let projected = self.project(observation, measurement_noise)?;
        // K = P Hᵀ S⁻¹ = (S⁻¹ H P)ᵀ since P and S are symmetric.
        let gain = projected
            .chol
            .solve(&(observation * self.covariance))
            .transpose();
        let innovation = measurement - projected.mean;
        let mean = self.mean + gain * innovation;
        let identity = SMatrix::<f64, N, N>::identity();
        let covariance = (identity - gain * observation) * self.covariance;
        Ok(Self {
            mean,
            covariance: symmetrized(covariance),
        })
    }
}

/// Predictive measurement distribution `N(H x, S)` with `S` factored once so
/// several detections can be scored against one track.
#[derive(Debug, Clone)]
pub struct Projection<const M: usize> {
    pub mean: SVector<f64, M>,
    pub covariance: SMatrix<f64, M, M>,
    chol: Cholesky<f64, Const<M>>,
    log_det: f64,
}

impl<const M: usize> Projection<M> {
    pub fn new(mean: SVector<f64, M>, covariance: SMatrix<f64, M, M>) -> Result<Self, FilterError> {
        let chol = Cholesky::new(covariance).ok_or(FilterError::DegenerateInnovation)?;
        let l = chol.l_dirty();
        let mut log_det = 0.0;
        for i in 0..M {
            let d = l[(i, i)];
            if d <= 0.0 || !d.is_finite() {
                return Err(FilterError::DegenerateInnovation);
            }
            log_det += 2.0 * libm::log(d);
        }
        Ok(Self {
            mean,
            covariance,
            chol,
            log_det,
        })
    }

    /// Squared Mahalanobis distance `yᵀ S⁻¹ y` of `z` from the predictive mean.
    pub fn mahalanobis(&self, z: &SVector<f64, M>) -> f64 {
        let y = z - self.mean;
        // With S = L Lᵀ, yᵀ S⁻¹ y = |L⁻¹ y|².
        let w = self
            .chol
            .l_dirty()
            .solve_lower_triangular(&y)
            .expect("cholesky factor has a positive diagonal");
        w.norm_squared()
    }

    pub fn log_det(&self) -> f64 {
        self.log_det
    }

    /// Gaussian log-density of `z`.
    pub fn log_likelihood(&self, z: &SVector<f64, M>) -> f64 {
        -0.5 * (self.mahalanobis(z) + self.log_det + M as f64 * LN_2PI)
    }
}

/// Constant-velocity box model with height-proportional noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionModel {
    /// Position/size standard deviation per unit of box height.
    pub pos_sigma_scale: f64,
    /// Velocity standard deviation per unit of box height.
    pub vel_sigma_scale: f64,
    /// Measurement standard deviation per unit of box height.
    pub meas_sigma_scale: f64,
}

impl Default for MotionModel {
    fn default() -> Self {
        Self {
            pos_sigma_scale: 1.0 / 20.0,
            vel_sigma_scale: 1.0 / 160.0,
            meas_sigma_scale: 1.0 / 20.0,
        }
    }
}

impl MotionModel {
    pub fn new(
        pos_sigma_scale: f64,
        vel_sigma_scale: f64,
        meas_sigma_scale: f64,
    ) -> Result<Self, TrackerError> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !(ok(pos_sigma_scale) && ok(vel_sigma_scale) && ok(meas_sigma_scale)) {
            return Err(TrackerError::Config(
                "kalman sigma scales must be finite and > 0",
            ));
        }
        Ok(Self {
            pos_sigma_scale,
            vel_sigma_scale,
            meas_sigma_scale,
        })
    }

    /// `F(dt)`: identity plus `dt` on the position/velocity couplings.
    pub fn transition(dt: u32) -> SMatrix<f64, 8, 8> {
        let mut f = SMatrix::<f64, 8, 8>::identity();
        for i in 0..4 {
            f[(i, i + 4)] = dt as f64;
        }
        f
    }

    /// `H`: selects `(cx, cy, w, h)`.
    pub fn observation() -> SMatrix<f64, 4, 8> {
        let mut h = SMatrix::<f64, 4, 8>::zeros();
        for i in 0..4 {
            h[(i, i)] = 1.0;
        }
        h
    }

    /// Per-frame process noise `Q` at box height `height`.
    pub fn process_noise(&self, height: f64) -> SMatrix<f64, 8, 8> {
        let sp = self.pos_sigma_scale * height;
        let sv = self.vel_sigma_scale * height;
        let (vp, vv) = (sp * sp, sv * sv);
        SMatrix::<f64, 8, 8>::from_diagonal(&SVector::<f64, 8>::from([
            vp, vp, vp, vp, vv, vv, vv, vv,
        ]))
    }

    /// Measurement noise `R` at box height `height`.
    pub fn measurement_noise(&self, height: f64) -> SMatrix<f64, 4, 4> {
        let s = self.meas_sigma_scale * height;
        SMatrix::<f64, 4, 4>::identity() * (s * s)
    }

    pub fn initiate(&self, det: &Detection) -> KalmanTrackState {
        let [cx, cy, w, h] = det.bbox.center_form();
        let mean = SVector::<f64, 8>::from([cx, cy, w, h, 0.0, 0.0, 0.0, 0.0]);
        let sp = 2.0 * self.pos_sigma_scale * h;
        let sv = 10.0 * self.vel_sigma_scale * h;
        let (vp, vv) = (sp * sp, sv * sv);
        let covariance = SMatrix::<f64, 8, 8>::from_diagonal(&SVector::<f64, 8>::from([
            vp, vp, vp, vp, vv, vv, vv, vv,
        ]));
        GaussianState { mean, covariance }
    }

    /// Advances `state` by `dt` frames with process noise `dt · Q`.
    pub fn predict(&self, state: &KalmanTrackState, dt: u32) -> KalmanTrackState {
        let q = self.process_noise(state.mean[3]) * dt as f64;
        state.predict_linear(&Self::transition(dt), &q)
    }

    /// Predictive distribution of the track's box measurement.
    pub fn project(&self, state: &KalmanTrackState) -> Result<Projection<4>, FilterError> {
        state.project(&Self::observation(), &self.measurement_noise(state.mean[3]))
    }

    pub fn update(
        &self,
        state: &KalmanTrackState,
        det: &Detection,
    ) -> Result<KalmanTrackState, FilterError> {
        state.update_linear(
            &measurement(&det.bbox),
            &Self::observation(),
            &self.measurement_noise(state.mean[3]),
        )
    }

    /// Squared Mahalanobis distance of `det` under the track's predictive
    /// measurement distribution.
    pub fn gating_distance(
        &self,
        state: &KalmanTrackState,
        det: &Detection,
    ) -> Result<f64, FilterError> {
        Ok(self.project(state)?.mahalanobis(&measurement(&det.bbox)))
    }

    pub fn log_likelihood(
        &self,
        state: &KalmanTrackState,
        det: &Detection,
    ) -> Result<f64, FilterError> {
        Ok(self.project(state)?.log_likelihood(&measurement(&det.bbox)))
    }
}

/// Box in measurement space `(cx, cy, w, h)`.
pub fn measurement(bbox: &BoundingBox) -> SVector<f64, 4> {
    SVector::<f64, 4>::from(bbox.center_form())
}

/// Box at the state mean, `None` once width or height has collapsed.
pub fn state_box(state: &KalmanTrackState) -> Option<BoundingBox> {
    let m = &state.mean;
    BoundingBox::from_center(m[0], m[1], m[2], m[3]).ok()
}
