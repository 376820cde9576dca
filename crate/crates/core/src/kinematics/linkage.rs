use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Screw-driven slider-crank.
///
/// The joint pivot sits at the origin. The screw nut slides along the line
/// `y = offset_mm`, starting at `x = home_distance_mm` and moving toward the pivot as
/// travel increases. A coupler rod of length `rod_mm` joins the nut to a crank pin at
/// radius `crank_mm`; the joint angle is the crank rotation relative to home.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SliderCrank {
    pub crank_mm: f64,
    pub rod_mm: f64,
    #[serde(default)]
    pub offset_mm: f64,
    pub home_distance_mm: f64,
}

impl SliderCrank {
    pub fn nut_position(&self, travel_mm: f64) -> (f64, f64) {
        (self.home_distance_mm - travel_mm, self.offset_mm)
    }

    /// Absolute crank angle (rad) for a given travel, via the law of cosines on the
    /// pivot / pin / nut triangle.
    pub fn crank_angle(&self, travel_mm: f64) -> Result<f64> {
        let (x, y) = self.nut_position(travel_mm);
        let d = x.hypot(y);
        let (r, l) = (self.crank_mm, self.rod_mm);
        let cos_alpha = (r * r + d * d - l * l) / (2.0 * r * d);
        if !(-1.0..=1.0).contains(&cos_alpha) || !cos_alpha.is_finite() {
            return Err(Error::Config(format!(
                "slider-crank unreachable at travel {travel_mm} mm: pivot-nut distance {d:.3} mm \
                 violates triangle inequality with crank {r} mm and rod {l} mm"
            )));
        }
        Ok(y.atan2(x) + cos_alpha.acos())
    }

    /// Joint angle in degrees, zero at home.
    pub fn joint_angle_deg(&self, travel_mm: f64) -> Result<f64> {
        Ok((self.crank_angle(travel_mm)? - self.crank_angle(0.0)?).to_degrees())
    }

    pub fn validate(&self, stroke_mm: f64) -> Result<()> {
        for (name, v) in [
            ("crank_mm", self.crank_mm),
            ("rod_mm", self.rod_mm),
            ("home_distance_mm", self.home_distance_mm),
        ] {
            if !(v > 0.0) {
                return Err(Error::Config(format!("{name} must be > 0, got {v}")));
            }
        }
        // Dense sweep: every sample must be reachable and strictly above its predecessor.
        const SAMPLES: usize = 2000;
        let mut prev = self.joint_angle_deg(0.0)?;
        for i in 1..=SAMPLES {
            let t = stroke_mm * i as f64 / SAMPLES as f64;
            let a = self.joint_angle_deg(t)?;
            if !(a > prev) {
                return Err(Error::Config(format!(
                    "slider-crank is not strictly increasing near travel {t:.3} mm"
                )));
            }
            prev = a;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn link() -> SliderCrank {
        SliderCrank {
            crank_mm: 150.0,
            rod_mm: 300.0,
            offset_mm: 0.0,
            home_distance_mm: 370.0,
        }
    }

    #[test]
    fn pin_lies_on_rod_circle() {
        let l = link();
        for t in [0.0, 50.0, 120.0, 197.0] {
            let phi = l.crank_angle(t).unwrap();
            let (nx, ny) = l.nut_position(t);
            let (px, py) = (l.crank_mm * phi.cos(), l.crank_mm * phi.sin());
            assert!(((px - nx).hypot(py - ny) - l.rod_mm).abs() < 1e-9);
        }
    }

    #[test]
    fn unreachable_geometry_is_config_error() {
        let mut l = link();
        l.home_distance_mm = 500.0;
        assert!(matches!(l.crank_angle(0.0), Err(Error::Config(_))));
    }

    #[test]
    fn nut_crossing_pivot_fails_validation() {
        assert!(link().validate(360.0).is_err());
        assert!(link().validate(197.0).is_ok());
    }
}
