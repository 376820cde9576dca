//! Digital twin of a seated echocardiography posture-control bench.
//!
//! The crate is split along the physical pipeline:
//!
//! - [`kinematics`]: forward/inverse kinematics of the pitch, lateral-bending and
//!   thoracic-rotation mechanisms, the slaved leg pendulum base, and stepper quantization.
//! - [`posture`]: chest-plane fitting from tracked probe positions and posture /
//!   gravity-referenced angle conversions.
//! - [`emg`]: band-pass, moving-RMS envelope, median load and condition ratio reports.
//! - [`load`]: parametric body-load model and the roll-split optimizer.
//! - [`planner`]: diagnosable view regions and load-minimizing posture planning.
//! - [`control`]: trajectory generation and the safety-interlocked session state machine.
//! - [`api`]: request and response bodies of the HTTP service.
//!
//! Everything here is synchronous and free of shared mutable state; the HTTP service
//! lives in a separate crate.

pub mod api;
pub mod config;
pub mod control;
pub mod interval;
pub mod emg;
mod error;
pub mod kinematics;
pub mod load;
pub mod optimize;
pub mod planner;
pub mod posture;

pub use config::BenchConfig;
pub use interval::Interval;
pub use error::{Error, Result};
