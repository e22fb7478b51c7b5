//! Local goal generator and heading controller.
//!
//! The goal generator is a one-dimensional vector field over the lateral error
//! `e_d`: the trajectory curve `f(e_d) = (b / |e_d / e|)^c` and the reference
//! heading `phi_r = atan(f'(e_d))`. The raw field diverges to +-90 degrees at the
//! lane center, so a deadband zeroes it near the center and the result is
//! clamped to `phi_r_max`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{wrap_angle, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum GoalError {
    #[error("trajectory value is undefined at zero lateral error")]
    UndefinedAtOrigin,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GoalParams<T> {
    /// Curve smoothness.
    pub b: T,
    /// Curve deadband exponent.
    pub c: T,
    /// Curve width, meters.
    pub e: T,
    pub d_ref: T,
    /// Errors at or below this magnitude map to a zero reference, meters.
    pub deadband: T,
    /// Clamp on the reference heading; `None` disables it.
    pub phi_r_max: Option<T>,
}

impl<T: Real> Default for GoalParams<T> {
    fn default() -> Self {
        Self {
            b: T::lit(3.8),
            c: T::lit(0.55),
            e: T::lit(0.7),
            d_ref: T::zero(),
            deadband: T::lit(0.02),
            phi_r_max: Some(T::FRAC_PI_4()),
        }
    }
}

impl<T: Real> GoalParams<T> {
    pub fn unclamped(self) -> Self {
        Self { phi_r_max: None, ..self }
    }
}

/// `e_d = d_ref - (d_R - d_L) / 2`.
pub fn lateral_error<T: Real>(d_left: T, d_right: T, d_ref: T) -> T {
    d_ref - T::half() * (d_right - d_left)
}

/// The trajectory curve `(b / |e_d / e|)^c`.
pub fn trajectory_value<T: Real>(e_d: T, p: &GoalParams<T>) -> Result<T, GoalError> {
    if e_d == T::zero() {
        return Err(GoalError::UndefinedAtOrigin);
    }
    Ok((p.b / (e_d / p.e).abs()).powf(p.c))
}

/// Reference heading of the goal field: `-atan(c (e_d/e^2) b^c |e/e_d|^(c+2))`
/// outside the deadband, clamped to `phi_r_max`.
pub fn local_goal<T: Real>(e_d: T, p: &GoalParams<T>) -> T {
    if e_d.abs() <= p.deadband || e_d == T::zero() {
        return T::zero();
    }
    let arg = p.c * (e_d / (p.e * p.e)) * p.b.powf(p.c) * (T::one() / (e_d / p.e).abs()).powf(p.c + T::two());
    let raw = -arg.atan();
    match p.phi_r_max {
        Some(max) => raw.max(-max).min(max),
        None => raw,
    }
}

/// Goal field output expressed as a heading in the counterclockwise-positive
/// convention of the estimator (positive turns toward the left row).
///
/// `e_d` is negative when the robot sits left of center while the field's
/// output has the opposite sign of `e_d`, so the steering reference is the
/// negated field value.
pub fn steering_reference<T: Real>(e_d: T, p: &GoalParams<T>) -> T {
    -local_goal(e_d, p)
}

/// PID gains and running state. Pass by value through [`pid_step`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PidState<T> {
    pub kp: T,
    pub ki: T,
    pub kd: T,
    pub integral: T,
    pub prev_error: T,
    pub omega_max: T,
}

impl<T: Real> PidState<T> {
    pub fn new(kp: T, ki: T, kd: T, omega_max: T) -> Self {
        Self { kp, ki, kd, integral: T::zero(), prev_error: T::zero(), omega_max }
    }

    /// Gains kept, accumulated state cleared.
    pub fn reset(&self) -> Self {
        Self::new(self.kp, self.ki, self.kd, self.omega_max)
    }
}

impl<T: Real> Default for PidState<T> {
    fn default() -> Self {
        Self::new(T::two(), T::zero(), T::lit(0.1), T::lit(1.5))
    }
}

/// One controller tick. The integral is frozen while the output saturates.
pub fn pid_step<T: Real>(phi_r: T, phi_est: T, dt: T, s: &PidState<T>) -> (T, PidState<T>) {
    let error = wrap_angle(phi_r - phi_est);
    let integral = s.integral + error * dt;
    let derivative = if dt > T::zero() { (error - s.prev_error) / dt } else { T::zero() };
    let raw = s.kp * error + s.ki * integral + s.kd * derivative;
    let saturated = raw.abs() > s.omega_max;
    let omega = raw.max(-s.omega_max).min(s.omega_max);
    let next = PidState {
        integral: if saturated { s.integral } else { integral },
        prev_error: error,
        ..*s
    };
    (omega, next)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Command<T> {
    pub v_x_cmd: T,
    pub omega_cmd: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveConfig<T> {
    /// Constant forward speed, m/s.
    pub v_x: T,
    pub omega_max: T,
}

impl<T: Real> Default for DriveConfig<T> {
    fn default() -> Self {
        Self { v_x: T::lit(0.7), omega_max: T::lit(1.5) }
    }
}

/// Pairs the angular command with the configured forward speed.
pub fn command<T: Real>(omega_cmd: T, cfg: &DriveConfig<T>) -> Command<T> {
    Command {
        v_x_cmd: cfg.v_x.max(T::zero()),
        omega_cmd: omega_cmd.max(-cfg.omega_max).min(cfg.omega_max),
    }
}
