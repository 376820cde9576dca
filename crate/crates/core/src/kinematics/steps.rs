use serde::{Deserialize, Serialize};

use super::{Axis, AxisDrive};
use crate::{Error, Result};

/// One stepper instruction: move `steps` (signed) at `rate` steps/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepCommand {
    pub axis: Axis,
    pub steps: i64,
    pub rate: f64,
}

/// Converts a travel increment to motor steps, rounding half away from zero.
pub fn travel_to_steps(delta_travel_mm: f64, drive: &AxisDrive) -> Result<i64> {
    if !(delta_travel_mm.abs() <= drive.stroke_mm) {
        return Err(Error::range_bound(
            "delta travel (mm)",
            delta_travel_mm,
            format!("|delta| <= stroke {}", drive.stroke_mm),
        ));
    }
    Ok(steps_unchecked(delta_travel_mm, drive))
}

pub(crate) fn steps_unchecked(travel_mm: f64, drive: &AxisDrive) -> i64 {
    // f64::round rounds half away from zero
    (travel_mm / drive.screw_lead_mm * drive.steps_per_rev as f64).round() as i64
}

pub fn steps_to_travel(steps: i64, drive: &AxisDrive) -> f64 {
    steps as f64 * drive.screw_lead_mm / drive.steps_per_rev as f64
}
