//! Forward and inverse kinematics of the posture mechanisms.
//!
//! Four screw-driven axes are modelled: the lumbar pitch linkage, the lumbar
//! lateral-bending linkage, the thoracic rotation arc slider, and the leg pendulum
//! base whose angle is slaved to lateral bending. Angles are degrees and travels are
//! millimetres everywhere in the public API.

mod linkage;
mod pendulum;
mod steps;

pub use linkage::SliderCrank;
pub use pendulum::PendulumGeometry;
pub use steps::{steps_to_travel, travel_to_steps, StepCommand};
pub(crate) use steps::steps_unchecked;

use serde::{Deserialize, Serialize};

use crate::optimize::bisect_increasing;
use crate::posture::PostureAngles;
use crate::{Error, Interval, Result};

/// Slack used when checking derived angles against closed limits.
const ANGLE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    Pitch,
    Lateral,
    Thoracic,
    Base,
}

impl Axis {
    pub const ALL: [Axis; 4] = [Axis::Pitch, Axis::Lateral, Axis::Thoracic, Axis::Base];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Axis::Pitch => "pitch",
            Axis::Lateral => "lateral",
            Axis::Thoracic => "thoracic",
            Axis::Base => "base",
        }
    }
}

impl std::fmt::Display for Axis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Trapezoidal screw plus stepper motor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisDrive {
    pub screw_lead_mm: f64,
    pub steps_per_rev: u32,
    pub stroke_mm: f64,
    pub max_speed_mm_s: f64,
}

impl AxisDrive {
    pub fn steps_per_mm(&self) -> f64 {
        self.steps_per_rev as f64 / self.screw_lead_mm
    }

    pub fn max_step_rate(&self) -> f64 {
        self.max_speed_mm_s * self.steps_per_mm()
    }

    fn validate(&self, axis: Axis) -> Result<()> {
        if !(self.screw_lead_mm > 0.0) || !(self.stroke_mm > 0.0) || !(self.max_speed_mm_s > 0.0) {
            return Err(Error::Config(format!(
                "{axis} drive: lead, stroke and max speed must be > 0"
            )));
        }
        if self.steps_per_rev == 0 {
            return Err(Error::Config(format!("{axis} drive: steps_per_rev must be > 0")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkageAxis {
    pub drive: AxisDrive,
    pub linkage: SliderCrank,
}

/// Curved slider: angle = arc length / radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArcAxis {
    pub drive: AxisDrive,
    pub arc_radius_mm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PendulumBase {
    pub drive: AxisDrive,
    pub arc_radius_mm: f64,
    #[serde(default)]
    pub geometry: PendulumGeometry,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MechanismConfig {
    pub pitch: LinkageAxis,
    pub lateral: LinkageAxis,
    pub thoracic: ArcAxis,
    pub base: PendulumBase,
    pub pitch_limits: Interval,
    pub roll_limits: Interval,
    pub lat_limits: Interval,
    pub thor_limits: Interval,
    /// Distance from the thoracic arc slider to the trunk axis it rotates about.
    pub trunk_axis_offset_mm: f64,
    /// Manual range of the spring-compensated height adjustment.
    pub passive_height_range_mm: Interval,
}

impl Default for MechanismConfig {
    fn default() -> Self {
        MechanismConfig {
            // 197 mm of stroke sweeps 85.08 deg
            pitch: LinkageAxis {
                drive: AxisDrive {
                    screw_lead_mm: 4.0,
                    steps_per_rev: 500,
                    stroke_mm: 197.0,
                    max_speed_mm_s: 12.0,
                },
                linkage: SliderCrank {
                    crank_mm: 150.0,
                    rod_mm: 300.0,
                    offset_mm: 0.0,
                    home_distance_mm: 370.0,
                },
            },
            // 84 mm sweeps 39.9 deg
            lateral: LinkageAxis {
                drive: AxisDrive {
                    screw_lead_mm: 2.0,
                    steps_per_rev: 500,
                    stroke_mm: 84.0,
                    max_speed_mm_s: 6.0,
                },
                linkage: SliderCrank {
                    crank_mm: 120.0,
                    rod_mm: 230.0,
                    offset_mm: 20.0,
                    home_distance_mm: 320.0,
                },
            },
            thoracic: ArcAxis {
                drive: AxisDrive {
                    screw_lead_mm: 3.0,
                    steps_per_rev: 500,
                    stroke_mm: 190.0,
                    max_speed_mm_s: 6.0,
                },
                arc_radius_mm: 300.0,
            },
            base: PendulumBase {
                drive: AxisDrive {
                    screw_lead_mm: 4.0,
                    steps_per_rev: 500,
                    stroke_mm: 160.0,
                    max_speed_mm_s: 12.0,
                },
                arc_radius_mm: 250.0,
                geometry: PendulumGeometry::default(),
            },
            pitch_limits: Interval::new(0.0, 85.0),
            roll_limits: Interval::new(0.0, 65.0),
            lat_limits: Interval::new(0.0, 35.0),
            thor_limits: Interval::new(0.0, 35.0),
            trunk_axis_offset_mm: 120.0,
            passive_height_range_mm: Interval::new(0.0, 150.0),
        }
    }
}

impl MechanismConfig {
    pub fn drive(&self, axis: Axis) -> &AxisDrive {
        match axis {
            Axis::Pitch => &self.pitch.drive,
            Axis::Lateral => &self.lateral.drive,
            Axis::Thoracic => &self.thoracic.drive,
            Axis::Base => &self.base.drive,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for axis in Axis::ALL {
            self.drive(axis).validate(axis)?;
        }
        if !(self.thoracic.arc_radius_mm > 0.0) || !(self.base.arc_radius_mm > 0.0) {
            return Err(Error::Config("arc radii must be > 0".into()));
        }
        self.pitch.linkage.validate(self.pitch.drive.stroke_mm)?;
        self.lateral.linkage.validate(self.lateral.drive.stroke_mm)?;
        for (name, i) in [
            ("pitch_limits", self.pitch_limits),
            ("roll_limits", self.roll_limits),
            ("lat_limits", self.lat_limits),
            ("thor_limits", self.thor_limits),
            ("passive_height_range_mm", self.passive_height_range_mm),
        ] {
            if i.is_empty() {
                return Err(Error::Config(format!("{name} {i} is empty")));
            }
        }
        if self.lat_limits.hi + self.thor_limits.hi < self.roll_limits.hi
            || self.lat_limits.lo + self.thor_limits.lo > self.roll_limits.lo
        {
            return Err(Error::Config(format!(
                "lat_limits {} + thor_limits {} do not cover roll_limits {}",
                self.lat_limits, self.thor_limits, self.roll_limits
            )));
        }
        // Every limit must be reachable within the stroke of its axis.
        let reach = [
            ("pitch", fk_pitch(self.pitch.drive.stroke_mm, self)?, self.pitch_limits.hi),
            ("lateral", fk_lat(self.lateral.drive.stroke_mm, self)?, self.lat_limits.hi),
            ("thoracic", fk_thor(self.thoracic.drive.stroke_mm, self)?, self.thor_limits.hi),
            ("base", fk_base(self.base.drive.stroke_mm, self)?, self.lat_limits.hi),
        ];
        for (name, full, limit) in reach {
            if full + ANGLE_EPS < limit {
                return Err(Error::Config(format!(
                    "{name} axis reaches only {full:.3} deg at full stroke, limit is {limit} deg"
                )));
            }
        }
        Ok(())
    }
}

fn check_travel(axis: Axis, travel_mm: f64, config: &MechanismConfig) -> Result<()> {
    let stroke = config.drive(axis).stroke_mm;
    if !(0.0..=stroke).contains(&travel_mm) {
        return Err(Error::range(format!("{axis} travel (mm)"), travel_mm, 0.0, stroke));
    }
    Ok(())
}

pub fn fk_pitch(travel_mm: f64, config: &MechanismConfig) -> Result<f64> {
    check_travel(Axis::Pitch, travel_mm, config)?;
    config.pitch.linkage.joint_angle_deg(travel_mm)
}

pub fn fk_lat(travel_mm: f64, config: &MechanismConfig) -> Result<f64> {
    check_travel(Axis::Lateral, travel_mm, config)?;
    config.lateral.linkage.joint_angle_deg(travel_mm)
}

pub fn fk_thor(travel_mm: f64, config: &MechanismConfig) -> Result<f64> {
    check_travel(Axis::Thoracic, travel_mm, config)?;
    Ok((travel_mm / config.thoracic.arc_radius_mm).to_degrees())
}

pub fn fk_base(travel_mm: f64, config: &MechanismConfig) -> Result<f64> {
    check_travel(Axis::Base, travel_mm, config)?;
    Ok((travel_mm / config.base.arc_radius_mm).to_degrees())
}

pub fn fk(axis: Axis, travel_mm: f64, config: &MechanismConfig) -> Result<f64> {
    match axis {
        Axis::Pitch => fk_pitch(travel_mm, config),
        Axis::Lateral => fk_lat(travel_mm, config),
        Axis::Thoracic => fk_thor(travel_mm, config),
        Axis::Base => fk_base(travel_mm, config),
    }
}

/// Inverts one axis. Linkage axes are solved by bisection on their monotone FK; the
/// arc axes invert in closed form.
pub fn inverse_axis(axis: Axis, angle_deg: f64, config: &MechanismConfig) -> Result<f64> {
    let stroke = config.drive(axis).stroke_mm;
    let full = fk(axis, stroke, config)?;
    if !(-ANGLE_EPS..=full + ANGLE_EPS).contains(&angle_deg) {
        return Err(Error::range(format!("{axis} angle (deg)"), angle_deg, 0.0, full));
    }
    let travel = match axis {
        Axis::Pitch | Axis::Lateral => {
            let link = if axis == Axis::Pitch {
                &config.pitch.linkage
            } else {
                &config.lateral.linkage
            };
            bisect_increasing(
                |t| link.joint_angle_deg(t).unwrap_or(f64::NAN),
                angle_deg,
                0.0,
                stroke,
                1e-12,
            )
        }
        Axis::Thoracic => angle_deg.to_radians() * config.thoracic.arc_radius_mm,
        Axis::Base => angle_deg.to_radians() * config.base.arc_radius_mm,
    };
    Ok(travel.clamp(0.0, stroke))
}

/// Combined posture roll from the two roll mechanisms (parallel-axis scalar sum).
pub fn roll_total(lat_deg: f64, thor_deg: f64, config: &MechanismConfig) -> Result<f64> {
    let roll = lat_deg + thor_deg;
    if !config.roll_limits.contains_within(roll, ANGLE_EPS) {
        return Err(Error::range(
            "roll (deg)",
            roll,
            config.roll_limits.lo,
            config.roll_limits.hi,
        ));
    }
    Ok(roll)
}

/// Pendulum base angle that keeps legs and base vertical for a given lateral bend.
pub fn base_sync(lat_deg: f64) -> f64 {
    lat_deg
}

/// Division of the roll angle between lumbar lateral bending and thoracic rotation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RollSplit {
    pub lat_deg: f64,
    pub thor_deg: f64,
}

impl RollSplit {
    pub fn new(lat_deg: f64, thor_deg: f64) -> Self {
        RollSplit { lat_deg, thor_deg }
    }

    pub fn total(&self) -> f64 {
        self.lat_deg + self.thor_deg
    }
}

/// Actuator travels for the four driven axes, indexed by [`Axis`].
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Travels {
    pub pitch_mm: f64,
    pub lat_mm: f64,
    pub thor_mm: f64,
    pub base_mm: f64,
}

impl Travels {
    pub fn get(&self, axis: Axis) -> f64 {
        match axis {
            Axis::Pitch => self.pitch_mm,
            Axis::Lateral => self.lat_mm,
            Axis::Thoracic => self.thor_mm,
            Axis::Base => self.base_mm,
        }
    }

    pub fn set(&mut self, axis: Axis, v: f64) {
        match axis {
            Axis::Pitch => self.pitch_mm = v,
            Axis::Lateral => self.lat_mm = v,
            Axis::Thoracic => self.thor_mm = v,
            Axis::Base => self.base_mm = v,
        }
    }
}

/// Actuator travels together with the joint angles they produce.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointState {
    pub travel_pitch_mm: f64,
    pub travel_lat_mm: f64,
    pub travel_thor_mm: f64,
    pub travel_base_mm: f64,
    pub passive_height_mm: f64,
    pub pitch_deg: f64,
    pub lat_deg: f64,
    pub thor_deg: f64,
    pub base_deg: f64,
}

impl JointState {
    pub fn from_travels(travels: Travels, passive_height_mm: f64, config: &MechanismConfig) -> Result<Self> {
        if !config.passive_height_range_mm.contains(passive_height_mm) {
            return Err(Error::range(
                "passive height (mm)",
                passive_height_mm,
                config.passive_height_range_mm.lo,
                config.passive_height_range_mm.hi,
            ));
        }
        let state = JointState {
            travel_pitch_mm: travels.pitch_mm,
            travel_lat_mm: travels.lat_mm,
            travel_thor_mm: travels.thor_mm,
            travel_base_mm: travels.base_mm,
            passive_height_mm,
            pitch_deg: fk_pitch(travels.pitch_mm, config)?,
            lat_deg: fk_lat(travels.lat_mm, config)?,
            thor_deg: fk_thor(travels.thor_mm, config)?,
            base_deg: fk_base(travels.base_mm, config)?,
        };
        roll_total(state.lat_deg, state.thor_deg, config)?;
        Ok(state)
    }

    pub fn home(config: &MechanismConfig) -> Self {
        JointState::from_travels(Travels::default(), config.passive_height_range_mm.lo, config)
            .expect("home position is valid for any validated config")
    }

    pub fn travels(&self) -> Travels {
        Travels {
            pitch_mm: self.travel_pitch_mm,
            lat_mm: self.travel_lat_mm,
            thor_mm: self.travel_thor_mm,
            base_mm: self.travel_base_mm,
        }
    }

    pub fn roll_deg(&self) -> f64 {
        self.lat_deg + self.thor_deg
    }

    pub fn posture(&self) -> PostureAngles {
        PostureAngles::new(self.roll_deg(), self.pitch_deg)
    }

    pub fn split(&self) -> RollSplit {
        RollSplit::new(self.lat_deg, self.thor_deg)
    }
}

/// Validates a posture target and split against the mechanism limits.
pub fn check_target(target: PostureAngles, split: RollSplit, config: &MechanismConfig) -> Result<()> {
    let checks = [
        ("roll (deg)", target.roll_deg, config.roll_limits),
        ("pitch (deg)", target.pitch_deg, config.pitch_limits),
        ("lateral bending (deg)", split.lat_deg, config.lat_limits),
        ("thoracic rotation (deg)", split.thor_deg, config.thor_limits),
    ];
    for (what, v, lim) in checks {
        if !lim.contains_within(v, ANGLE_EPS) {
            return Err(Error::range(what, v, lim.lo, lim.hi));
        }
    }
    if (split.total() - target.roll_deg).abs() > 1e-6 {
        return Err(Error::Input(format!(
            "split {} + {} does not sum to roll {}",
            split.lat_deg, split.thor_deg, target.roll_deg
        )));
    }
    Ok(())
}

/// Inverse kinematics: actuator travels realizing `target` with the given roll split.
/// The base travel follows [`base_sync`].
pub fn ik(target: PostureAngles, split: RollSplit, config: &MechanismConfig) -> Result<JointState> {
    check_target(target, split, config)?;
    let pitch = target.pitch_deg.clamp(config.pitch_limits.lo, config.pitch_limits.hi);
    let lat = split.lat_deg.clamp(config.lat_limits.lo, config.lat_limits.hi);
    let thor = split.thor_deg.clamp(config.thor_limits.lo, config.thor_limits.hi);
    let travels = Travels {
        pitch_mm: inverse_axis(Axis::Pitch, pitch, config)?,
        lat_mm: inverse_axis(Axis::Lateral, lat, config)?,
        thor_mm: inverse_axis(Axis::Thoracic, thor, config)?,
        base_mm: inverse_axis(Axis::Base, base_sync(lat), config)?,
    };
    JointState::from_travels(travels, config.passive_height_range_mm.lo, config)
}
