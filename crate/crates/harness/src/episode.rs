//! Closed-loop episode runner.

use rowfollow_core::scan_log::ScanLine;
use rowfollow_sim::{
    build_field, detect_intervention, ground_truth, raycast_scan, robot_step, sensor_readings, EpisodeRng,
    EventHistory, Field, FieldSpec, InterventionEvent, InterventionKind, Motion, RobotPose,
};

use crate::config::{Mode, RunConfig};
use crate::navigator::Navigator;
use crate::record::{RunHeader, RunRecord, TickRecord, Totals, SCHEMA_VERSION};
use crate::HarnessError;

/// An operator puts the robot back this far past a failure.
pub const RESET_ADVANCE_M: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EpisodeOptions {
    /// Keep raw sweeps in the record so it can be replayed.
    pub keep_scans: bool,
}

/// Simulated time limit: three times the nominal traversal plus a minute.
pub fn time_cap(spec: &FieldSpec, cfg: &RunConfig) -> f64 {
    cfg.time_cap_s.unwrap_or(3.0 * spec.row_length / cfg.drive.v_x + 60.0)
}

/// Builds the field for `seed` and runs one episode on it.
pub fn run_episode(
    scenario_id: &str,
    spec: &FieldSpec,
    mode: Mode,
    cfg: &RunConfig,
    seed: u64,
    opts: EpisodeOptions,
) -> Result<RunRecord, HarnessError> {
    let spec = FieldSpec { seed, ..spec.clone() };
    let field = build_field(&spec)?;
    run_on_field(scenario_id, &field, mode, cfg, opts)
}

/// Runs one episode on an already built field; the seed is the field's.
pub fn run_on_field(
    scenario_id: &str,
    field: &Field,
    mode: Mode,
    cfg: &RunConfig,
    opts: EpisodeOptions,
) -> Result<RunRecord, HarnessError> {
    cfg.check()?;
    let spec = &field.spec;
    let seed = spec.seed;
    let noise = spec.noise;
    let dt = 1.0 / cfg.tick_hz;
    let scan_every = cfg.scan_every()?;
    let cap = time_cap(spec, cfg);

    let mut rng = EpisodeRng::new(seed);
    let mut nav = Navigator::new(cfg, mode);
    let mut pose = RobotPose::on_centerline(&field.centerline, 0.0);
    let mut motion = Motion { v: cfg.drive.v_x, omega: 0.0 };
    let mut history = EventHistory::default();
    let mut ticks = Vec::new();
    let mut events = Vec::new();
    let mut distance = 0.0;

    for k in 0u64.. {
        let t = k as f64 * dt;
        if t > cap {
            events.push(InterventionEvent { kind: InterventionKind::TimeCap, at_arc_m: pose.arc_progress, at_time: t });
            break;
        }
        let truth = ground_truth(field, &pose);
        let input = sensor_readings(motion.v, motion.omega, &mut rng.sensors, &noise);
        let scan = (k % scan_every == 0).then(|| raycast_scan(field, &pose, t, cfg.lidar_rate_hz, &noise, &mut rng.lidar));
        let out = nav.tick(&input, scan.as_ref())?;
        history.record(&truth);
        let event = detect_intervention(field, &pose, &history)
            .map(|kind| InterventionEvent { kind, at_arc_m: pose.arc_progress, at_time: t });
        ticks.push(TickRecord {
            t,
            pose,
            truth,
            input,
            scan: scan.as_ref().filter(|_| opts.keep_scans).map(ScanLine::from_scan),
            scanned: scan.is_some(),
            obs: out.obs,
            est: out.est,
            update: out.update,
            phi_ref: out.phi_ref,
            command: out.command,
            event,
        });

        match event {
            Some(e) if e.kind == InterventionKind::EndOfLane => {
                events.push(e);
                break;
            }
            Some(e) => {
                events.push(e);
                let station = (truth.station.max(pose.arc_progress) + RESET_ADVANCE_M).min(field.centerline.length());
                pose = RobotPose::on_centerline(&field.centerline, station);
                motion = Motion { v: cfg.drive.v_x, omega: 0.0 };
                nav.reset();
            }
            None => {
                let (next, m) =
                    robot_step(&pose, &out.command, dt, &mut rng.actuation, &noise, &field.centerline);
                distance += out.command.v_x_cmd.abs() * dt;
                pose = next;
                motion = m;
            }
        }
    }

    let duration_s = ticks.last().map_or(0.0, |t: &TickRecord| t.t);
    let header = RunHeader {
        schema_version: SCHEMA_VERSION,
        scenario_id: scenario_id.to_string(),
        mode,
        seed,
        config: cfg.clone(),
        field: spec.clone(),
        field_hash: field.hash(),
    };
    Ok(RunRecord { header, ticks, totals: Totals { distance_m: distance, duration_s }, events })
}
