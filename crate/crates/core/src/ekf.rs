//! Three-state extended Kalman filter over `(d_L, d_R, phi)`.
//!
//! Prediction integrates the row-frame kinematics with forward Euler,
//!
//! ```text
//! d_L' = d_L - v_x sin(phi) dt
//! d_R' = d_R + v_x sin(phi) dt
//! phi' = phi + omega dt
//! ```
//!
//! driven by wheel odometry `v_x` and gyro yaw rate `omega`. The measurement is
//! the perception output itself, so the observation map is the identity
//! restricted to whichever components perception marked usable.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::perception::RowObservation;
use crate::scalar::{wrap_angle, Real};

/// Sanity bound on odometry speed, m/s.
pub const MAX_SPEED: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum EkfError {
    #[error("non-finite filter input")]
    NonFinite,
    #[error("time step must be positive")]
    InvalidDt,
    #[error("odometry speed {0} m/s exceeds the sanity bound")]
    SpeedOutOfRange(f64),
}

/// Row-major 3x3 matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat3<T>(pub [[T; 3]; 3]);

impl<T: Real> Mat3<T> {
    pub fn zeros() -> Self {
        Self([[T::zero(); 3]; 3])
    }

    pub fn identity() -> Self {
        Self::diag([T::one(); 3])
    }

    pub fn diag(d: [T; 3]) -> Self {
        let mut m = Self::zeros();
        for (i, v) in d.into_iter().enumerate() {
            m.0[i][i] = v;
        }
        m
    }

    pub fn get(&self, r: usize, c: usize) -> T {
        self.0[r][c]
    }

    pub fn diagonal(&self) -> [T; 3] {
        [self.0[0][0], self.0[1][1], self.0[2][2]]
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros();
        for r in 0..3 {
            for c in 0..3 {
                t.0[c][r] = self.0[r][c];
            }
        }
        t
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zeros();
        for r in 0..3 {
            for c in 0..3 {
                out.0[r][c] = (0..3).fold(T::zero(), |acc, k| acc + self.0[r][k] * other.0[k][c]);
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = *self;
        for r in 0..3 {
            for c in 0..3 {
                out.0[r][c] = out.0[r][c] + other.0[r][c];
            }
        }
        out
    }

    pub fn symmetrized(&self) -> Self {
        let mut out = *self;
        for r in 0..3 {
            for c in (r + 1)..3 {
                let m = (self.0[r][c] + self.0[c][r]) * T::half();
                out.0[r][c] = m;
                out.0[c][r] = m;
            }
        }
        out
    }

    pub fn max_asymmetry(&self) -> T {
        let mut worst = T::zero();
        for r in 0..3 {
            for c in 0..3 {
                worst = worst.max((self.0[r][c] - self.0[c][r]).abs());
            }
        }
        worst
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EkfEstimate<T> {
    pub d_left: T,
    pub d_right: T,
    pub phi: T,
    pub covariance: Mat3<T>,
}

impl<T: Real> EkfEstimate<T> {
    pub fn new(d_left: T, d_right: T, phi: T, covariance: Mat3<T>) -> Self {
        Self { d_left, d_right, phi: wrap_angle(phi), covariance }
    }

    /// Centered, aligned robot with the given initial variances.
    pub fn centered(lane_width: T, variances: [T; 3]) -> Self {
        let half = lane_width * T::half();
        Self::new(half, half, T::zero(), Mat3::diag(variances))
    }

    pub fn mean(&self) -> [T; 3] {
        [self.d_left, self.d_right, self.phi]
    }

    fn check(&self) -> Result<(), EkfError> {
        let finite = self.d_left.is_finite() && self.d_right.is_finite() && self.phi.is_finite();
        if finite && self.covariance.is_finite() {
            Ok(())
        } else {
            Err(EkfError::NonFinite)
        }
    }
}

/// Odometry speed and gyro yaw rate.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ControlInput<T> {
    pub v_x: T,
    pub omega: T,
}

impl<T: Real> ControlInput<T> {
    pub fn new(v_x: T, omega: T) -> Self {
        Self { v_x, omega }
    }

    fn check(&self) -> Result<(), EkfError> {
        if !(self.v_x.is_finite() && self.omega.is_finite()) {
            return Err(EkfError::NonFinite);
        }
        if self.v_x.abs() > T::lit(MAX_SPEED) {
            return Err(EkfError::SpeedOutOfRange(self.v_x.to_f64().unwrap_or(f64::NAN)));
        }
        Ok(())
    }
}

/// Constant diagonal process and measurement covariances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig<T> {
    pub q_diag: [T; 3],
    pub r_diag: [T; 3],
}

impl<T: Real> Default for NoiseConfig<T> {
    fn default() -> Self {
        Self {
            q_diag: [T::lit(0.001), T::lit(0.001), T::lit(0.01)],
            r_diag: [T::lit(0.05), T::lit(0.05), T::lit(0.5)],
        }
    }
}

impl<T: Real> NoiseConfig<T> {
    pub fn q(&self) -> Mat3<T> {
        Mat3::diag(self.q_diag)
    }
}

/// Whether `update` applied the correction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum UpdateStatus {
    Applied,
    /// No usable component in the observation.
    NothingToUpdate,
    /// Innovation covariance was not positive definite; prior returned.
    SingularInnovation,
}

fn check_dt<T: Real>(dt: T) -> Result<(), EkfError> {
    if !dt.is_finite() {
        Err(EkfError::NonFinite)
    } else if dt <= T::zero() {
        Err(EkfError::InvalidDt)
    } else {
        Ok(())
    }
}

/// Forward-Euler motion model.
pub fn motion_model<T: Real>(mean: [T; 3], u: &ControlInput<T>, dt: T) -> [T; 3] {
    let lateral_step = u.v_x * mean[2].sin() * dt;
    [mean[0] - lateral_step, mean[1] + lateral_step, mean[2] + u.omega * dt]
}

/// Jacobian of [`motion_model`] at the prior mean.
pub fn jacobian_f<T: Real>(est: &EkfEstimate<T>, u: &ControlInput<T>, dt: T) -> Mat3<T> {
    let coupling = u.v_x * est.phi.cos() * dt;
    let mut f = Mat3::identity();
    f.0[0][2] = -coupling;
    f.0[1][2] = coupling;
    f
}

pub fn predict<T: Real>(
    est: &EkfEstimate<T>,
    u: &ControlInput<T>,
    dt: T,
    q: &Mat3<T>,
) -> Result<EkfEstimate<T>, EkfError> {
    check_dt(dt)?;
    u.check()?;
    est.check()?;
    let f = jacobian_f(est, u, dt);
    let [d_left, d_right, phi] = motion_model(est.mean(), u, dt);
    let covariance = f.mul(&est.covariance).mul(&f.transpose()).add(q).symmetrized();
    Ok(EkfEstimate { d_left, d_right, phi: wrap_angle(phi), covariance })
}

/// Indices and values of the usable observation components.
fn usable_components<T: Real>(obs: &RowObservation<T>) -> Vec<(usize, T)> {
    let mut z = Vec::with_capacity(3);
    if obs.left_usable {
        z.push((0, obs.d_left));
    }
    if obs.right_usable {
        z.push((1, obs.d_right));
    }
    if obs.phi_usable {
        z.push((2, obs.phi_meas));
    }
    z
}

/// In-place Cholesky of a small SPD matrix; `None` if not positive definite.
fn cholesky<T: Real>(a: &[[T; 3]; 3], n: usize) -> Option<[[T; 3]; 3]> {
    let mut l = [[T::zero(); 3]; 3];
    for i in 0..n {
        for j in 0..=i {
            let s = (0..j).fold(a[i][j], |acc, k| acc - l[i][k] * l[j][k]);
            if i == j {
                if !(s > T::epsilon()) {
                    return None;
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    Some(l)
}

/// Solves `L Lᵀ x = b` for one right-hand side.
fn cholesky_solve<T: Real>(l: &[[T; 3]; 3], n: usize, b: [T; 3]) -> [T; 3] {
    let mut y = [T::zero(); 3];
    for i in 0..n {
        y[i] = (0..i).fold(b[i], |acc, k| acc - l[i][k] * y[k]) / l[i][i];
    }
    let mut x = [T::zero(); 3];
    for i in (0..n).rev() {
        x[i] = ((i + 1)..n).fold(y[i], |acc, k| acc - l[k][i] * x[k]) / l[i][i];
    }
    x
}

/// Kalman correction with the identity observation map restricted to the
/// usable components. Uses the Joseph form so the posterior stays PSD.
pub fn update<T: Real>(
    est: &EkfEstimate<T>,
    obs: &RowObservation<T>,
    r_diag: &[T; 3],
) -> (EkfEstimate<T>, UpdateStatus) {
    let comps = usable_components(obs);
    let n = comps.len();
    if n == 0 {
        return (*est, UpdateStatus::NothingToUpdate);
    }
    let p = &est.covariance.0;
    let mean = est.mean();

    // innovation and its covariance S = P[idx, idx] + R[idx]
    let mut innov = [T::zero(); 3];
    let mut s = [[T::zero(); 3]; 3];
    for (a, &(i, z)) in comps.iter().enumerate() {
        innov[a] = if i == 2 { wrap_angle(z - mean[2]) } else { z - mean[i] };
        for (b, &(j, _)) in comps.iter().enumerate() {
            s[a][b] = p[i][j];
        }
        s[a][a] = s[a][a] + r_diag[i];
    }
    let Some(l) = cholesky(&s, n) else {
        return (*est, UpdateStatus::SingularInnovation);
    };

    // K = P Hᵀ S⁻¹, computed row by row since S is symmetric
    let mut gain = [[T::zero(); 3]; 3];
    for (r, gain_row) in gain.iter_mut().enumerate() {
        let mut pht = [T::zero(); 3];
        for (a, &(i, _)) in comps.iter().enumerate() {
            pht[a] = p[r][i];
        }
        *gain_row = cholesky_solve(&l, n, pht);
    }

    let mut post = mean;
    for (r, value) in post.iter_mut().enumerate() {
        *value = (0..n).fold(*value, |acc, a| acc + gain[r][a] * innov[a]);
    }

    // Joseph form: (I - KH) P (I - KH)ᵀ + K R Kᵀ
    let mut ikh = Mat3::<T>::identity();
    for (row, gain_row) in ikh.0.iter_mut().zip(&gain) {
        for (a, &(i, _)) in comps.iter().enumerate() {
            row[i] = row[i] - gain_row[a];
        }
    }
    let mut krk = Mat3::<T>::zeros();
    for r in 0..3 {
        for c in 0..3 {
            krk.0[r][c] = comps
                .iter()
                .enumerate()
                .fold(T::zero(), |acc, (a, &(i, _))| acc + gain[r][a] * r_diag[i] * gain[c][a]);
        }
    }
    let covariance = ikh.mul(&est.covariance).mul(&ikh.transpose()).add(&krk).symmetrized();

    let posterior = EkfEstimate { d_left: post[0], d_right: post[1], phi: wrap_angle(post[2]), covariance };
    (posterior, UpdateStatus::Applied)
}

/// Predict, then correct with `obs` when one is available.
pub fn step<T: Real>(
    est: &EkfEstimate<T>,
    u: &ControlInput<T>,
    dt: T,
    obs: Option<&RowObservation<T>>,
    noise: &NoiseConfig<T>,
) -> Result<(EkfEstimate<T>, UpdateStatus), EkfError> {
    let prior = predict(est, u, dt, &noise.q())?;
    Ok(match obs {
        Some(obs) => update(&prior, obs, &noise.r_diag),
        None => (prior, UpdateStatus::NothingToUpdate),
    })
}
