//! Simulated posture-control session.
//!
//! A [`Session`] owns the only mutable copy of the bench state. It advances by
//! discrete ticks, accepts [`Command`]s through a small state machine and emits
//! telemetry [`Frame`]s. Everything is deterministic, so a recorded [`LogEntry`]
//! stream replays to a bit-identical final state.

mod log;
mod session;
mod trajectory;

pub use log::{read_log, replay, write_log, LogEntry, LogWriter};
pub use session::{Frame, Session, Target};
pub use trajectory::{make_trajectory, quantize_state, StepPosition, Trajectory};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    Idle,
    Moving,
    Holding,
    EStop,
}

impl Mode {
    pub const ALL: [Mode; 4] = [Mode::Idle, Mode::Moving, Mode::Holding, Mode::EStop];
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Mode::Idle => "Idle",
            Mode::Moving => "Moving",
            Mode::Holding => "Holding",
            Mode::EStop => "EStop",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Auto {
    Auto,
}

/// How the roll target is divided between lateral bending and thoracic rotation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SplitRequest {
    /// Chosen by the load-minimizing split optimizer.
    Auto(Auto),
    Manual { lat_deg: f64, thor_deg: f64 },
}

impl Default for SplitRequest {
    fn default() -> Self {
        SplitRequest::Auto(Auto::Auto)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Command {
    SetTarget {
        roll_deg: f64,
        pitch_deg: f64,
        #[serde(default)]
        split: SplitRequest,
    },
    #[serde(rename = "estop")]
    EStop,
    Release,
    SetWeights {
        w_leg: f64,
        w_abd: f64,
    },
    SetSubject {
        subject: Option<String>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::SetTarget { .. } => "set_target",
            Command::EStop => "estop",
            Command::Release => "release",
            Command::SetWeights { .. } => "set_weights",
            Command::SetSubject { .. } => "set_subject",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControlConfig {
    /// Simulated control-loop rate; one tick advances the clock by `1 / tick_hz`.
    pub tick_hz: f64,
    pub telemetry_hz: f64,
    /// Whether the leg pendulum is in use for load prediction and auto split.
    pub pendulum: bool,
}

impl Default for ControlConfig {
    fn default() -> Self {
        ControlConfig {
            tick_hz: 100.0,
            telemetry_hz: 20.0,
            pendulum: true,
        }
    }
}

impl ControlConfig {
    pub fn tick_period_s(&self) -> f64 {
        1.0 / self.tick_hz
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tick_hz > 0.0 && self.tick_hz.is_finite()) {
            return Err(Error::Config("control.tick_hz must be > 0".into()));
        }
        if !(self.telemetry_hz > 0.0 && self.telemetry_hz <= self.tick_hz) {
            return Err(Error::Config("control.telemetry_hz must be in (0, tick_hz]".into()));
        }
        Ok(())
    }
}
