use serde::{Deserialize, Serialize};

use super::log::LogEntry;
use super::trajectory::{make_trajectory, quantize_state, state_from_steps, StepPosition, Trajectory};
use super::{Command, Mode, SplitRequest};
use crate::config::BenchConfig;
use crate::kinematics::{check_target, ik, JointState, RollSplit};
use crate::load::{predict_load, split_optimize, LoadEstimate, SplitLimits, SplitWeights};
use crate::posture::{posture_to_gravity, GravityAngles, PostureAngles};
use crate::{Error, Result};

/// Slack on the tick counter so `k * period` summed in floating point lands on `k`.
const TICK_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Target {
    pub posture: PostureAngles,
    pub split: RollSplit,
}

/// Immutable snapshot of the session, also used as the telemetry frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub t: f64,
    pub mode: Mode,
    pub joints: JointState,
    pub posture: PostureAngles,
    pub gravity_angles: GravityAngles,
    pub load: LoadEstimate,
    pub target: Option<Target>,
    /// Fraction of the active trajectory completed.
    pub progress: f64,
    pub subject: Option<String>,
    pub weights: SplitWeights,
}

#[derive(Debug, Clone)]
pub struct Session {
    config: BenchConfig,
    mode: Mode,
    position: StepPosition,
    joints: JointState,
    target: Option<Target>,
    trajectory: Option<Trajectory>,
    traj_elapsed: f64,
    traj_ticks: usize,
    progress: f64,
    clock: f64,
    weights: SplitWeights,
    subject: Option<String>,
    log: Option<Vec<LogEntry>>,
}

impl Session {
    pub fn new(config: BenchConfig) -> Result<Self> {
        config.validate()?;
        let home = JointState::home(&config.mechanism);
        let position = quantize_state(&home, &config.mechanism)?;
        let joints = state_from_steps(position, home.passive_height_mm, &config.mechanism)?;
        Ok(Session {
            weights: config.weights,
            config,
            mode: Mode::Idle,
            position,
            joints,
            target: None,
            trajectory: None,
            traj_elapsed: 0.0,
            traj_ticks: 0,
            progress: 0.0,
            clock: 0.0,
            subject: None,
            log: None,
        })
    }

    /// Like [`Session::new`], but records every accepted command and tick.
    pub fn recording(config: BenchConfig) -> Result<Self> {
        let mut s = Self::new(config)?;
        s.log = Some(vec![LogEntry::Start {
            config: s.config.clone(),
        }]);
        Ok(s)
    }

    pub fn config(&self) -> &BenchConfig {
        &self.config
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn joints(&self) -> &JointState {
        &self.joints
    }

    pub fn position(&self) -> StepPosition {
        self.position
    }

    pub fn clock(&self) -> f64 {
        self.clock
    }

    pub fn trajectory(&self) -> Option<&Trajectory> {
        self.trajectory.as_ref()
    }

    pub fn tick_period_s(&self) -> f64 {
        self.config.control.tick_period_s()
    }

    /// Removes and returns the entries recorded so far.
    pub fn take_log(&mut self) -> Vec<LogEntry> {
        self.log.as_mut().map(std::mem::take).unwrap_or_default()
    }

    pub fn snapshot(&self) -> Frame {
        let posture = self.joints.posture();
        let load = predict_load(
            self.joints.lat_deg,
            self.joints.thor_deg,
            self.config.control.pendulum,
            &self.config.load,
            &SplitLimits::from(&self.config.mechanism),
        )
        .expect("session joints stay inside the mechanism limits");
        Frame {
            t: self.clock,
            mode: self.mode,
            joints: self.joints,
            posture,
            gravity_angles: posture_to_gravity(posture),
            load,
            target: self.target,
            progress: self.progress,
            subject: self.subject.clone(),
            weights: self.weights,
        }
    }

    /// Advances the simulated clock by `dt`. Only `Moving` changes the joints.
    pub fn tick(&mut self, dt: f64) -> Result<Frame> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Input(format!("tick dt must be > 0, got {dt}")));
        }
        self.clock += dt;
        if self.mode == Mode::Moving {
            self.advance(dt)?;
        }
        let frame = self.snapshot();
        if let Some(log) = &mut self.log {
            log.push(LogEntry::Tick {
                dt,
                frame: frame.clone(),
            });
        }
        Ok(frame)
    }

    fn advance(&mut self, dt: f64) -> Result<()> {
        let Some(traj) = &self.trajectory else {
            self.mode = Mode::Holding;
            return Ok(());
        };
        self.traj_elapsed += dt;
        let n = traj.len();
        let k = ((self.traj_elapsed / traj.sample_period_s + TICK_EPS).floor() as usize).min(n);
        if k > self.traj_ticks {
            self.position = traj.position(k);
            self.joints = state_from_steps(self.position, self.joints.passive_height_mm, &self.config.mechanism)?;
            self.traj_ticks = k;
        }
        self.progress = if n == 0 { 1.0 } else { k as f64 / n as f64 };
        if k == n {
            self.trajectory = None;
            self.mode = Mode::Holding;
        }
        Ok(())
    }

    /// Applies `cmd`. On error the session is unchanged.
    pub fn command(&mut self, cmd: Command) -> Result<Frame> {
        let illegal = |mode| Error::IllegalCommand {
            command: cmd.name().to_string(),
            mode,
        };
        match &cmd {
            Command::EStop => {
                self.mode = Mode::EStop;
                self.trajectory = None;
            }
            Command::Release => {
                if self.mode != Mode::EStop {
                    return Err(illegal(self.mode));
                }
                self.mode = Mode::Holding;
                self.target = None;
                self.progress = 0.0;
            }
            Command::SetTarget {
                roll_deg,
                pitch_deg,
                split,
            } => {
                if !matches!(self.mode, Mode::Idle | Mode::Holding) {
                    return Err(illegal(self.mode));
                }
                let target = self.resolve_target(*roll_deg, *pitch_deg, *split)?;
                let goal = ik(target.posture, target.split, &self.config.mechanism)?;
                let traj = make_trajectory(&self.joints, &goal, &self.config.mechanism, self.tick_period_s())?;
                self.target = Some(target);
                self.traj_elapsed = 0.0;
                self.traj_ticks = 0;
                self.progress = 0.0;
                self.trajectory = Some(traj);
                self.mode = Mode::Moving;
            }
            Command::SetWeights { w_leg, w_abd } => {
                let w = SplitWeights {
                    w_leg: *w_leg,
                    w_abd: *w_abd,
                };
                w.validate().map_err(|e| match e {
                    Error::Config(m) => Error::Input(m),
                    other => other,
                })?;
                self.weights = w;
            }
            Command::SetSubject { subject } => {
                self.weights = self.config.weights_for(subject.as_deref())?;
                self.subject = subject.clone();
            }
        }
        if let Some(log) = &mut self.log {
            log.push(LogEntry::Command {
                t: self.clock,
                command: cmd,
            });
        }
        Ok(self.snapshot())
    }

    fn resolve_target(&self, roll: f64, pitch: f64, split: SplitRequest) -> Result<Target> {
        let m = &self.config.mechanism;
        let posture = PostureAngles::new(roll, pitch);
        for (what, v, lim) in [("roll (deg)", roll, m.roll_limits), ("pitch (deg)", pitch, m.pitch_limits)] {
            if !lim.contains(v) {
                return Err(Error::Range {
                    what: what.into(),
                    value: v,
                    bound: format!("within {lim}"),
                });
            }
        }
        let split = match split {
            SplitRequest::Auto(_) => split_optimize(
                roll,
                self.config.control.pendulum,
                &self.config.load,
                &self.weights,
                &SplitLimits::from(m),
            )?,
            SplitRequest::Manual { lat_deg, thor_deg } => RollSplit::new(lat_deg, thor_deg),
        };
        check_target(posture, split, m)?;
        Ok(Target { posture, split })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn session() -> Session {
        Session::new(BenchConfig::default()).unwrap()
    }

    fn set(roll: f64, pitch: f64) -> Command {
        Command::SetTarget {
            roll_deg: roll,
            pitch_deg: pitch,
            split: SplitRequest::default(),
        }
    }

    fn run_to_hold(s: &mut Session) {
        for _ in 0..100_000 {
            if s.mode() != Mode::Moving {
                return;
            }
            s.tick(0.01).unwrap();
        }
        panic!("move did not finish");
    }

    #[test]
    fn starts_idle_at_home() {
        let s = session();
        assert_eq!(s.mode(), Mode::Idle);
        assert_eq!(s.position(), [0; 4]);
    }

    #[test]
    fn out_of_range_target_leaves_mode() {
        let mut s = session();
        assert!(matches!(s.command(set(70.0, 40.0)), Err(Error::Range { .. })));
        assert_eq!(s.mode(), Mode::Idle);
    }

    #[test]
    fn auto_split_is_symmetric() {
        let mut s = session();
        s.command(set(30.0, 20.0)).unwrap();
        run_to_hold(&mut s);
        assert_eq!(s.mode(), Mode::Holding);
        s.command(set(20.0, 45.0)).unwrap();
        let t = s.snapshot().target.unwrap();
        assert_eq!(s.mode(), Mode::Moving);
        assert!((t.split.lat_deg - 10.0).abs() < 1e-6);
        assert!((t.split.thor_deg - 10.0).abs() < 1e-6);
    }

    #[test]
    fn move_reaches_target() {
        let mut s = session();
        s.command(set(20.0, 45.0)).unwrap();
        assert_eq!(s.mode(), Mode::Moving);
        run_to_hold(&mut s);
        let j = s.joints();
        assert!((j.roll_deg() - 20.0).abs() < 0.01);
        assert!((j.pitch_deg - 45.0).abs() < 0.01);
        assert!((j.lat_deg - 10.0).abs() < 0.01);
        assert_eq!(s.snapshot().progress, 1.0);
    }

    #[test]
    fn large_dt_finishes_in_one_tick() {
        let mut s = session();
        s.command(set(10.0, 10.0)).unwrap();
        let d = s.trajectory().unwrap().duration_s();
        s.tick(d + 1.0).unwrap();
        assert_eq!(s.mode(), Mode::Holding);
    }

    #[test]
    fn illegal_commands_name_the_mode() {
        let mut s = session();
        let err = s.command(Command::Release).unwrap_err();
        assert_eq!(
            err,
            Error::IllegalCommand {
                command: "release".into(),
                mode: Mode::Idle
            }
        );
        s.command(set(10.0, 10.0)).unwrap();
        let err = s.command(set(5.0, 5.0)).unwrap_err();
        assert!(err.to_string().contains("Moving"));
    }

    #[test]
    fn estop_freezes_and_release_holds() {
        let mut s = session();
        s.command(set(30.0, 60.0)).unwrap();
        for _ in 0..50 {
            s.tick(0.01).unwrap();
        }
        let frozen = *s.joints();
        s.command(Command::EStop).unwrap();
        for _ in 0..1000 {
            s.tick(0.01).unwrap();
        }
        assert_eq!(*s.joints(), frozen);
        assert!(s.command(set(1.0, 1.0)).is_err());
        s.command(Command::Release).unwrap();
        assert_eq!(s.mode(), Mode::Holding);
        assert_eq!(*s.joints(), frozen);
    }

    #[test]
    fn subject_and_weights() {
        let mut s = session();
        assert!(matches!(
            s.command(Command::SetSubject {
                subject: Some("nobody".into())
            }),
            Err(Error::Input(_))
        ));
        assert!(matches!(
            s.command(Command::SetWeights {
                w_leg: -1.0,
                w_abd: 1.0
            }),
            Err(Error::Input(_))
        ));
        s.command(Command::SetWeights { w_leg: 3.0, w_abd: 1.0 }).unwrap();
        assert_eq!(s.snapshot().weights.w_leg, 3.0);
    }

    #[test]
    fn bad_dt_rejected() {
        assert!(session().tick(0.0).is_err());
        assert!(session().tick(f64::NAN).is_err());
    }
}
