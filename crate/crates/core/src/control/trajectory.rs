use serde::{Deserialize, Serialize};

use crate::kinematics::{
    base_sync, check_target, fk, inverse_axis, steps_to_travel, steps_unchecked, Axis, JointState,
    MechanismConfig, StepCommand, Travels,
};
use crate::{Error, Result};

/// Motor positions in steps, indexed by [`Axis::index`].
pub type StepPosition = [i64; 4];

const ANGLE_EPS: f64 = 1e-9;

/// Per-tick step schedule. `samples[k]` is the position after tick `k + 1`; every axis
/// reaches its final position at the last sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub sample_period_s: f64,
    pub start: StepPosition,
    pub samples: Vec<StepPosition>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 * self.sample_period_s
    }

    /// Position after `k` ticks (`k = 0` is the start).
    pub fn position(&self, k: usize) -> StepPosition {
        if k == 0 {
            self.start
        } else {
            self.samples[k.min(self.samples.len()) - 1]
        }
    }

    pub fn end(&self) -> StepPosition {
        self.position(self.samples.len())
    }

    /// The schedule as stepper instructions, one per axis and tick.
    pub fn step_commands(&self) -> Vec<[StepCommand; 4]> {
        let mut prev = self.start;
        self.samples
            .iter()
            .map(|s| {
                let cmds = Axis::ALL.map(|axis| {
                    let steps = s[axis.index()] - prev[axis.index()];
                    StepCommand {
                        axis,
                        steps,
                        rate: steps as f64 / self.sample_period_s,
                    }
                });
                prev = *s;
                cmds
            })
            .collect()
    }
}

fn max_steps(axis: Axis, config: &MechanismConfig) -> i64 {
    let d = config.drive(axis);
    (d.stroke_mm * d.steps_per_mm() + 1e-9).floor() as i64
}

fn angle(axis: Axis, steps: i64, config: &MechanismConfig) -> Result<f64> {
    fk(axis, steps_to_travel(steps, config.drive(axis)), config)
}

fn steps_for_angle(axis: Axis, angle_deg: f64, config: &MechanismConfig) -> Result<i64> {
    let travel = inverse_axis(axis, angle_deg, config)?;
    Ok(steps_unchecked(travel, config.drive(axis)).clamp(0, max_steps(axis, config)))
}

/// Base position slaved to the lateral-bending position.
fn base_steps(lat_steps: i64, config: &MechanismConfig) -> Result<i64> {
    steps_for_angle(Axis::Base, base_sync(angle(Axis::Lateral, lat_steps, config)?), config)
}

/// Moves `steps` inward until its angle lies within `limits`.
fn clamp_steps(axis: Axis, mut steps: i64, config: &MechanismConfig) -> Result<i64> {
    let limits = match axis {
        Axis::Pitch => config.pitch_limits,
        Axis::Lateral => config.lat_limits,
        Axis::Thoracic => config.thor_limits,
        Axis::Base => return Ok(steps),
    };
    steps = steps.clamp(0, max_steps(axis, config));
    while steps > 0 && angle(axis, steps, config)? > limits.hi + ANGLE_EPS {
        steps -= 1;
    }
    while steps < max_steps(axis, config) && angle(axis, steps, config)? < limits.lo - ANGLE_EPS {
        steps += 1;
    }
    Ok(steps)
}

/// Trims the thoracic (then lateral) position until the combined roll is in limits.
fn clamp_roll(lat: &mut i64, thor: &mut i64, config: &MechanismConfig) -> Result<()> {
    let roll = |l: i64, t: i64| -> Result<f64> {
        Ok(angle(Axis::Lateral, l, config)? + angle(Axis::Thoracic, t, config)?)
    };
    while roll(*lat, *thor)? > config.roll_limits.hi + ANGLE_EPS {
        if *thor > 0 {
            *thor -= 1;
        } else if *lat > 0 {
            *lat -= 1;
        } else {
            break;
        }
    }
    Ok(())
}

/// Rounds a continuous joint state to motor steps, keeping every joint angle and the
/// combined roll inside the mechanism limits. The base is re-derived from the
/// quantized lateral position.
pub fn quantize_state(state: &JointState, config: &MechanismConfig) -> Result<StepPosition> {
    let t = state.travels();
    let q = |axis: Axis| clamp_steps(axis, steps_unchecked(t.get(axis), config.drive(axis)), config);
    let pitch = q(Axis::Pitch)?;
    let mut lat = q(Axis::Lateral)?;
    let mut thor = q(Axis::Thoracic)?;
    clamp_roll(&mut lat, &mut thor, config)?;
    Ok([pitch, lat, thor, base_steps(lat, config)?])
}

pub(crate) fn state_from_steps(pos: StepPosition, passive_height_mm: f64, config: &MechanismConfig) -> Result<JointState> {
    let mut travels = Travels::default();
    for axis in Axis::ALL {
        travels.set(axis, steps_to_travel(pos[axis.index()], config.drive(axis)));
    }
    JointState::from_travels(travels, passive_height_mm, config)
}

fn lerp_steps(a: i64, b: i64, k: usize, n: usize) -> i64 {
    a + ((b - a) as f64 * k as f64 / n as f64).round() as i64
}

/// Builds a synchronized move from `from` to `to`.
///
/// Pitch and thoracic travel at constant step rate. Lateral bending is interpolated
/// linearly in angle so the combined roll never leaves the straight line between the
/// end points, and the base is regenerated from the lateral position at every sample.
/// The tick count starts at the slowest axis' `|Δsteps| / max steps-per-tick` and grows
/// until no axis exceeds its rate limit.
pub fn make_trajectory(
    from: &JointState,
    to: &JointState,
    config: &MechanismConfig,
    sample_period_s: f64,
) -> Result<Trajectory> {
    if !(sample_period_s > 0.0 && sample_period_s.is_finite()) {
        return Err(Error::Input(format!("sample period must be > 0, got {sample_period_s}")));
    }
    check_target(to.posture(), to.split(), config)?;
    check_target(from.posture(), from.split(), config)?;

    let caps = Axis::ALL.map(|axis| (config.drive(axis).max_step_rate() * sample_period_s + 1e-9).floor() as i64);
    if let Some(axis) = Axis::ALL.into_iter().find(|a| caps[a.index()] < 1) {
        return Err(Error::Config(format!(
            "{axis} axis cannot make one step per {sample_period_s} s tick at its max speed"
        )));
    }

    let mut start = quantize_state(from, config)?;
    let base_now = steps_unchecked(from.travel_base_mm, config.drive(Axis::Base));
    if (base_now - start[Axis::Base.index()]).abs() > caps[Axis::Base.index()] {
        return Err(Error::Input(format!(
            "start state is not base-synchronized: base {:.3} deg, lateral {:.3} deg",
            from.base_deg, from.lat_deg
        )));
    }
    start[Axis::Base.index()] = base_now;
    let end = quantize_state(to, config)?;
    if start == end {
        return Ok(Trajectory {
            sample_period_s,
            start,
            samples: Vec::new(),
        });
    }

    let (pi, li, ti, bi) = (
        Axis::Pitch.index(),
        Axis::Lateral.index(),
        Axis::Thoracic.index(),
        Axis::Base.index(),
    );
    let lat0 = angle(Axis::Lateral, start[li], config)?;
    let lat1 = angle(Axis::Lateral, end[li], config)?;

    let build = |n: usize| -> Result<Vec<StepPosition>> {
        let mut out = Vec::with_capacity(n);
        for k in 1..=n {
            if k == n {
                out.push(end);
                break;
            }
            let f = k as f64 / n as f64;
            let mut lat = steps_for_angle(Axis::Lateral, lat0 + (lat1 - lat0) * f, config)?;
            let mut thor = lerp_steps(start[ti], end[ti], k, n);
            clamp_roll(&mut lat, &mut thor, config)?;
            let mut s = [0; 4];
            s[pi] = lerp_steps(start[pi], end[pi], k, n);
            s[li] = lat;
            s[ti] = thor;
            s[bi] = base_steps(lat, config)?;
            out.push(s);
        }
        Ok(out)
    };

    let mut n = Axis::ALL
        .into_iter()
        .map(|a| {
            let d = (end[a.index()] - start[a.index()]).unsigned_abs();
            d.div_ceil(caps[a.index()] as u64) as usize
        })
        .max()
        .unwrap_or(1)
        .max(1);
    for _ in 0..64 {
        let samples = build(n)?;
        let mut prev = start;
        let mut worst = 0.0f64;
        for s in &samples {
            for a in Axis::ALL {
                let i = a.index();
                worst = worst.max((s[i] - prev[i]).abs() as f64 / caps[i] as f64);
            }
            prev = *s;
        }
        if worst <= 1.0 {
            return Ok(Trajectory {
                sample_period_s,
                start,
                samples,
            });
        }
        n = (n + 1).max((n as f64 * worst).ceil() as usize);
    }
    Err(Error::Planning("could not find a rate-feasible synchronized trajectory".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::{ik, RollSplit};
    use crate::posture::PostureAngles;

    fn cfg() -> MechanismConfig {
        MechanismConfig::default()
    }

    fn state(roll: f64, pitch: f64, lat: f64) -> JointState {
        ik(PostureAngles::new(roll, pitch), RollSplit::new(lat, roll - lat), &cfg()).unwrap()
    }

    #[test]
    fn identical_states_give_empty_trajectory() {
        let s = state(20.0, 45.0, 10.0);
        let t = make_trajectory(&s, &s, &cfg(), 0.01).unwrap();
        assert!(t.is_empty());
        assert_eq!(t.duration_s(), 0.0);
    }

    #[test]
    fn single_axis_duration_is_rate_arithmetic() {
        let mut c = cfg();
        c.pitch.drive.screw_lead_mm = 2.0;
        c.pitch.drive.max_speed_mm_s = 10.0;
        let from = JointState::home(&c);
        let mut travels = from.travels();
        travels.pitch_mm = 30.0;
        let to = JointState::from_travels(travels, from.passive_height_mm, &c).unwrap();
        let t = make_trajectory(&from, &to, &c, 0.01).unwrap();
        assert!((t.duration_s() - 3.0).abs() < 1e-9, "{}", t.duration_s());
        assert_eq!(t.end()[Axis::Pitch.index()], 7500);
        for cmds in t.step_commands() {
            assert_eq!(cmds[0].steps, 25);
            assert!((cmds[0].rate - 2500.0).abs() < 1e-9);
            assert!(cmds[1..].iter().all(|c| c.steps == 0));
        }
    }

    #[test]
    fn rates_respected_and_base_synchronized() {
        let c = cfg();
        let from = JointState::home(&c);
        let to = state(65.0, 85.0, 35.0);
        let t = make_trajectory(&from, &to, &c, 0.01).unwrap();
        let caps = Axis::ALL.map(|a| (c.drive(a).max_step_rate() * 0.01).round() as i64);
        for cmds in t.step_commands() {
            for cmd in cmds {
                assert!(cmd.steps.abs() <= caps[cmd.axis.index()]);
            }
        }
        for k in 0..=t.len() {
            let s = state_from_steps(t.position(k), 0.0, &c).unwrap();
            assert!((s.base_deg - s.lat_deg).abs() <= 0.5);
            assert!(s.roll_deg() <= 65.0 + 1e-9);
        }
    }

    #[test]
    fn quantized_corner_stays_in_limits() {
        let c = cfg();
        let q = quantize_state(&state(65.0, 85.0, 35.0), &c).unwrap();
        let s = state_from_steps(q, 0.0, &c).unwrap();
        assert!(s.roll_deg() <= 65.0 + 1e-9 && s.pitch_deg <= 85.0 + 1e-9);
        assert!((s.roll_deg() - 65.0).abs() < 0.01);
        assert!((s.pitch_deg - 85.0).abs() < 0.01);
    }

    #[test]
    fn rejects_out_of_range_target() {
        let c = cfg();
        let home = JointState::home(&c);
        let mut bad = home;
        bad.pitch_deg = 90.0;
        assert!(matches!(make_trajectory(&home, &bad, &c, 0.01), Err(Error::Range { .. })));
        assert!(matches!(make_trajectory(&home, &home, &c, 0.0), Err(Error::Input(_))));
    }
}
