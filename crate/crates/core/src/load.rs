//! Parametric static body-load model and roll-split optimization.
//!
//! Loads are quadratic in the lateral-bending and thoracic-rotation angles (radians),
//! scaled down by a relief factor when the leg pendulum base is engaged:
//!
//! ```text
//! leg = relief_leg * (k0_leg + a_leg * lat^2 + b_leg * thor^2)
//! abd = relief_abd * (k0_abd + a_abd * lat^2 + b_abd * thor^2)
//! ```

use serde::{Deserialize, Serialize};

use crate::kinematics::{MechanismConfig, RollSplit};
use crate::optimize::golden_section_minimize;
use crate::{Error, Interval, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LoadEstimate {
    pub leg: f64,
    pub abd: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoadParams {
    pub k0_leg: f64,
    pub k0_abd: f64,
    pub a_leg: f64,
    pub b_leg: f64,
    pub a_abd: f64,
    pub b_abd: f64,
    pub c_leg: f64,
    pub c_abd: f64,
}

impl Default for LoadParams {
    fn default() -> Self {
        LoadParams {
            k0_leg: 1.0,
            k0_abd: 1.0,
            a_leg: 1.0,
            b_leg: 1.0,
            a_abd: 1.0,
            b_abd: 1.0,
            c_leg: 0.78,
            c_abd: 0.75,
        }
    }
}

impl LoadParams {
    pub fn validate(&self) -> Result<()> {
        let coeffs = [
            ("k0_leg", self.k0_leg),
            ("k0_abd", self.k0_abd),
            ("a_leg", self.a_leg),
            ("b_leg", self.b_leg),
            ("a_abd", self.a_abd),
            ("b_abd", self.b_abd),
        ];
        for (name, v) in coeffs {
            if !(v >= 0.0) {
                return Err(Error::Config(format!("load coefficient {name} must be >= 0, got {v}")));
            }
        }
        for (name, v) in [("c_leg", self.c_leg), ("c_abd", self.c_abd)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::Config(format!("relief factor {name} must be in (0, 1], got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitWeights {
    pub w_leg: f64,
    pub w_abd: f64,
}

impl Default for SplitWeights {
    fn default() -> Self {
        SplitWeights { w_leg: 1.0, w_abd: 1.0 }
    }
}

impl SplitWeights {
    pub fn validate(&self) -> Result<()> {
        if !(self.w_leg >= 0.0 && self.w_abd >= 0.0) || self.w_leg + self.w_abd <= 0.0 {
            return Err(Error::Config(format!(
                "split weights must be >= 0 and not both zero, got ({}, {})",
                self.w_leg, self.w_abd
            )));
        }
        Ok(())
    }

    pub fn objective(&self, load: LoadEstimate) -> f64 {
        self.w_leg * load.leg + self.w_abd * load.abd
    }
}

/// Per-axis angle limits of the two roll mechanisms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitLimits {
    pub lat: Interval,
    pub thor: Interval,
}

impl From<&MechanismConfig> for SplitLimits {
    fn from(c: &MechanismConfig) -> Self {
        SplitLimits {
            lat: c.lat_limits,
            thor: c.thor_limits,
        }
    }
}

impl Default for SplitLimits {
    fn default() -> Self {
        SplitLimits::from(&MechanismConfig::default())
    }
}

const LIMIT_EPS: f64 = 1e-9;

fn evaluate(lat_deg: f64, thor_deg: f64, pendulum: bool, p: &LoadParams) -> LoadEstimate {
    let (lat, thor) = (lat_deg.to_radians(), thor_deg.to_radians());
    let (rl, ra) = if pendulum { (p.c_leg, p.c_abd) } else { (1.0, 1.0) };
    LoadEstimate {
        leg: rl * (p.k0_leg + p.a_leg * lat * lat + p.b_leg * thor * thor),
        abd: ra * (p.k0_abd + p.a_abd * lat * lat + p.b_abd * thor * thor),
    }
}

pub fn predict_load(
    lat_deg: f64,
    thor_deg: f64,
    pendulum: bool,
    params: &LoadParams,
    limits: &SplitLimits,
) -> Result<LoadEstimate> {
    if !limits.lat.contains_within(lat_deg, LIMIT_EPS) {
        return Err(Error::range("lateral bending (deg)", lat_deg, limits.lat.lo, limits.lat.hi));
    }
    if !limits.thor.contains_within(thor_deg, LIMIT_EPS) {
        return Err(Error::range("thoracic rotation (deg)", thor_deg, limits.thor.lo, limits.thor.hi));
    }
    Ok(evaluate(lat_deg, thor_deg, pendulum, params))
}

/// Feasible lateral-bending interval for a roll target.
pub fn lat_range_for_roll(roll_deg: f64, limits: &SplitLimits) -> Interval {
    Interval::new(
        limits.lat.lo.max(roll_deg - limits.thor.hi),
        limits.lat.hi.min(roll_deg - limits.thor.lo),
    )
}

/// Divides `roll_deg` between lateral bending and thoracic rotation so the weighted
/// predicted load is minimal. Ties go to the smaller lateral-bending angle.
pub fn split_optimize(
    roll_deg: f64,
    pendulum: bool,
    params: &LoadParams,
    weights: &SplitWeights,
    limits: &SplitLimits,
) -> Result<RollSplit> {
    weights.validate()?;
    let range = lat_range_for_roll(roll_deg, limits);
    if range.is_empty() || !roll_deg.is_finite() {
        return Err(Error::range(
            "roll (deg)",
            roll_deg,
            limits.lat.lo + limits.thor.lo,
            limits.lat.hi + limits.thor.hi,
        ));
    }
    let objective = |lat: f64| weights.objective(evaluate(lat, roll_deg - lat, pendulum, params));
    let (mut lat, f_best) = golden_section_minimize(objective, range.lo, range.hi, 1e-10);
    let f_lo = objective(range.lo);
    if f_lo <= f_best + 1e-14 * f_best.abs().max(1.0) {
        lat = range.lo;
    }
    Ok(RollSplit::new(lat, roll_deg - lat))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::emg::ConditionId;

    fn lim() -> SplitLimits {
        SplitLimits::default()
    }

    #[test]
    fn origin_closed_form() {
        let p = LoadParams::default();
        let l = predict_load(0.0, 0.0, true, &p, &lim()).unwrap();
        assert_eq!(l.leg, p.c_leg * p.k0_leg);
        assert_eq!(l.abd, p.c_abd * p.k0_abd);
    }

    #[test]
    fn out_of_limit_angle() {
        assert!(matches!(
            predict_load(40.0, 0.0, true, &LoadParams::default(), &lim()),
            Err(Error::Range { .. })
        ));
    }

    #[test]
    fn condition_ordering_with_defaults() {
        let p = LoadParams::default();
        let load = |c: ConditionId| {
            let c = c.condition();
            predict_load(c.lat_deg, c.thor_deg, c.pendulum, &p, &lim()).unwrap()
        };
        use ConditionId::*;
        let (a, b, c, d) = (load(A), load(B), load(C), load(D));
        for g in [|l: LoadEstimate| l.leg, |l: LoadEstimate| l.abd] {
            assert!(g(b) < g(a));
            assert!(g(d) < g(b));
            assert!(g(d) < g(c));
            assert!(g(d) < g(a));
        }
    }

    #[test]
    fn midpoint_beats_endpoint() {
        let p = LoadParams {
            k0_leg: 3.7,
            k0_abd: 0.2,
            ..Default::default()
        };
        let mid = predict_load(10.0, 10.0, true, &p, &lim()).unwrap();
        let end = predict_load(20.0, 0.0, true, &p, &lim()).unwrap();
        assert!(mid.leg < end.leg && mid.abd < end.abd);
    }

    #[test]
    fn symmetric_split_is_even() {
        let s = split_optimize(20.0, true, &LoadParams::default(), &SplitWeights::default(), &lim()).unwrap();
        assert!((s.lat_deg - 10.0).abs() < 1e-6 && (s.thor_deg - 10.0).abs() < 1e-6);
        let s = split_optimize(0.0, true, &LoadParams::default(), &SplitWeights::default(), &lim()).unwrap();
        assert_eq!((s.lat_deg, s.thor_deg), (0.0, 0.0));
    }

    #[test]
    fn flat_objective_prefers_small_lateral() {
        let p = LoadParams {
            a_leg: 0.0,
            b_leg: 0.0,
            a_abd: 0.0,
            b_abd: 0.0,
            ..Default::default()
        };
        let s = split_optimize(50.0, true, &p, &SplitWeights::default(), &lim()).unwrap();
        assert_eq!(s.lat_deg, 15.0);
        assert_eq!(s.thor_deg, 35.0);
    }

    #[test]
    fn infeasible_target() {
        assert!(matches!(
            split_optimize(71.0, true, &LoadParams::default(), &SplitWeights::default(), &lim()),
            Err(Error::Range { .. })
        ));
    }

    #[test]
    fn bad_weights_and_params() {
        let w = SplitWeights { w_leg: 0.0, w_abd: 0.0 };
        assert!(split_optimize(10.0, true, &LoadParams::default(), &w, &lim()).is_err());
        let p = LoadParams {
            c_leg: 1.5,
            ..Default::default()
        };
        assert!(p.validate().is_err());
    }
}
