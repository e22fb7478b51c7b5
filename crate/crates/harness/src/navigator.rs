//! The on-robot loop: perception, optional EKF fusion and heading control.
//!
//! In PL mode the controller runs when a scan arrives and its command is held
//! until the next one. In PL+EKF mode the filter predicts on every tick from
//! odometry and gyro, corrects when a scan arrives, and the controller runs on
//! every tick from the fused state.

use rowfollow_core::ekf::{self, EkfError};
use rowfollow_core::goal::{command, lateral_error, pid_step, steering_reference};
use rowfollow_core::perception::{estimate, validate};
use rowfollow_core::{
    Command, ControlInput, EkfEstimate, LaserScan, PidState, RowObservation, ScanError, UpdateStatus,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{Mode, RunConfig};

#[derive(Debug, Error)]
pub enum NavError {
    #[error(transparent)]
    Scan(#[from] ScanError),
    #[error(transparent)]
    Ekf(#[from] EkfError),
}

/// What the navigator produced on one tick.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NavOutput {
    /// Validated observation, present on scan ticks.
    pub obs: Option<RowObservation<f64>>,
    /// Fused state, present in PL+EKF mode.
    pub est: Option<EkfEstimate<f64>>,
    pub update: Option<UpdateStatus>,
    pub phi_ref: f64,
    pub command: Command<f64>,
}

#[derive(Debug, Clone)]
pub struct Navigator {
    cfg: RunConfig,
    mode: Mode,
    prev_obs: RowObservation<f64>,
    est: EkfEstimate<f64>,
    pid: PidState<f64>,
    held: Command<f64>,
    phi_ref: f64,
}

impl Navigator {
    pub fn new(cfg: &RunConfig, mode: Mode) -> Self {
        let lane = cfg.perception.nominal_lane_width;
        Navigator {
            cfg: cfg.clone(),
            mode,
            prev_obs: RowObservation::nominal(lane),
            est: EkfEstimate::centered(lane, cfg.ekf_initial_var),
            pid: cfg.pid.reset(),
            held: command(0.0, &cfg.drive),
            phi_ref: 0.0,
        }
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Operator recovery: the robot was put back on the lane center, aligned.
    pub fn reset(&mut self) {
        *self = Navigator::new(&self.cfg, self.mode);
    }

    fn tick_dt(&self) -> f64 {
        1.0 / self.cfg.tick_hz
    }

    fn scan_dt(&self) -> f64 {
        1.0 / self.cfg.lidar_rate_hz
    }

    fn control(&mut self, d_left: f64, d_right: f64, phi: f64, dt: f64) -> Command<f64> {
        let e_d = lateral_error(d_left, d_right, self.cfg.goal.d_ref);
        self.phi_ref = steering_reference(e_d, &self.cfg.goal);
        let (omega, pid) = pid_step(self.phi_ref, phi, dt, &self.pid);
        self.pid = pid;
        command(omega, &self.cfg.drive)
    }

    fn observe(&mut self, scan: &LaserScan<f64>, phi_prior: f64) -> Result<RowObservation<f64>, NavError> {
        let raw = estimate(scan, phi_prior, &self.cfg.perception)?;
        let obs = validate(&raw, &self.prev_obs, &self.cfg.thresholds, self.scan_dt());
        self.prev_obs = obs;
        Ok(obs)
    }

    pub fn tick(&mut self, input: &ControlInput<f64>, scan: Option<&LaserScan<f64>>) -> Result<NavOutput, NavError> {
        match self.mode {
            Mode::Pl => {
                let obs = match scan {
                    Some(scan) => {
                        let obs = self.observe(scan, self.prev_obs.phi_meas)?;
                        self.held = self.control(obs.d_left, obs.d_right, obs.phi_meas, self.scan_dt());
                        Some(obs)
                    }
                    None => None,
                };
                Ok(NavOutput { obs, est: None, update: None, phi_ref: self.phi_ref, command: self.held })
            }
            Mode::PlEkf => {
                let dt = self.tick_dt();
                let mut est = ekf::predict(&self.est, input, dt, &self.cfg.ekf.q())?;
                let mut update = None;
                let obs = match scan {
                    Some(scan) => {
                        let obs = self.observe(scan, est.phi)?;
                        let (post, status) = ekf::update(&est, &obs, &self.cfg.ekf.r_diag);
                        est = post;
                        update = Some(status);
                        Some(obs)
                    }
                    None => None,
                };
                self.est = est;
                let cmd = self.control(est.d_left, est.d_right, est.phi, dt);
                Ok(NavOutput { obs, est: Some(est), update, phi_ref: self.phi_ref, command: cmd })
            }
        }
    }
}
