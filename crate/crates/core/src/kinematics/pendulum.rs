use serde::{Deserialize, Serialize};

/// Frontal-plane geometry of the lumbar lateral-bending stage and the leg pendulum base.
///
/// Coordinates are `(y, z)` in mm: lateral and vertical. The waist (seat) plate hangs
/// `waist_plate_drop_mm` below its rotation center; the foot base plate hangs
/// `base_plate_drop_mm` below the pendulum center.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PendulumGeometry {
    pub waist_center_mm: [f64; 2],
    pub base_center_mm: [f64; 2],
    pub waist_plate_drop_mm: f64,
    pub base_plate_drop_mm: f64,
}

impl Default for PendulumGeometry {
    fn default() -> Self {
        PendulumGeometry {
            waist_center_mm: [0.0, 0.0],
            base_center_mm: [0.0, 0.0],
            waist_plate_drop_mm: 80.0,
            base_plate_drop_mm: 520.0,
        }
    }
}

fn hang(center: [f64; 2], drop: f64, angle_deg: f64) -> [f64; 2] {
    let (s, c) = angle_deg.to_radians().sin_cos();
    // rotate (0, -drop) by angle
    [center[0] + drop * s, center[1] - drop * c]
}

impl PendulumGeometry {
    pub fn waist_plate(&self, lat_deg: f64) -> [f64; 2] {
        hang(self.waist_center_mm, self.waist_plate_drop_mm, lat_deg)
    }

    pub fn base_plate(&self, base_deg: f64) -> [f64; 2] {
        hang(self.base_center_mm, self.base_plate_drop_mm, base_deg)
    }

    /// Distance between the waist and leg mounting points.
    pub fn plate_distance(&self, lat_deg: f64, base_deg: f64) -> f64 {
        let w = self.waist_plate(lat_deg);
        let b = self.base_plate(base_deg);
        (w[0] - b[0]).hypot(w[1] - b[1])
    }

    /// Angle between the two plate normals; zero when the plates are parallel.
    pub fn plate_misalignment_deg(&self, lat_deg: f64, base_deg: f64) -> f64 {
        (lat_deg - base_deg).abs()
    }

    pub fn centers_coincide(&self) -> bool {
        self.waist_center_mm == self.base_center_mm
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn offset_centers_change_distance() {
        let g = PendulumGeometry {
            base_center_mm: [0.0, -300.0],
            ..Default::default()
        };
        let d0 = g.plate_distance(0.0, 0.0);
        let d30 = g.plate_distance(30.0, 30.0);
        assert!((d0 - d30).abs() > 1.0);
    }
}
