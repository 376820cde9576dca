//! Posture estimation from tracked probe positions.
//!
//! Conventions: world `z` points up and gravity is `-z`. An upright patient's chest
//! faces `+x` and their left-right axis is `y`. A posture `(roll, pitch)` is the body
//! rotation `Ry(pitch) * Rz(roll)`: pitch tilts the chest normal from `+x` toward `+z`
//! (90 deg is supine) and roll turns the body about its own longitudinal axis. Under
//! this composition the chest normal is
//! `(cos r cos p, sin r, cos r sin p)`, so `pitch = atan2(nz, nx)` and `roll = asin(ny)`.

use std::io::Read;
use std::path::Path;

use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::{Error, Interval, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeSample {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ProbeTrack {
    pub samples: Vec<ProbeSample>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChestPlane {
    pub normal: [f64; 3],
    pub centroid: [f64; 3],
    pub rms_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PostureAngles {
    pub roll_deg: f64,
    pub pitch_deg: f64,
}

impl PostureAngles {
    pub const fn new(roll_deg: f64, pitch_deg: f64) -> Self {
        PostureAngles { roll_deg, pitch_deg }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GravityAngles {
    pub g_roll_deg: f64,
    pub g_pitch_deg: f64,
}

/// Body axes expressed in the world frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodyFrame {
    /// Front-back axis; the chest normal.
    pub sagittal: Vector3<f64>,
    /// Left-right axis.
    pub frontal: Vector3<f64>,
    /// Head-to-seat axis.
    pub longitudinal: Vector3<f64>,
}

impl BodyFrame {
    pub fn from_rotation(r: &Matrix3<f64>) -> Self {
        BodyFrame {
            sagittal: r.column(0).into_owned(),
            frontal: r.column(1).into_owned(),
            longitudinal: r.column(2).into_owned(),
        }
    }
}

/// Rotation about world `y` that carries `+x` toward `+z`.
fn rot_pitch(p: f64) -> Matrix3<f64> {
    let (s, c) = p.sin_cos();
    Matrix3::new(c, 0.0, -s, 0.0, 1.0, 0.0, s, 0.0, c)
}

/// Rotation about world `z` that carries `+x` toward `+y`.
fn rot_roll(r: f64) -> Matrix3<f64> {
    let (s, c) = r.sin_cos();
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

pub fn posture_rotation(p: PostureAngles) -> Matrix3<f64> {
    rot_pitch(p.pitch_deg.to_radians()) * rot_roll(p.roll_deg.to_radians())
}

pub fn body_frame(p: PostureAngles) -> BodyFrame {
    BodyFrame::from_rotation(&posture_rotation(p))
}

/// Chest normal of a posture (the upright normal `+x` carried by the posture rotation).
pub fn posture_normal(p: PostureAngles) -> [f64; 3] {
    let n = posture_rotation(p) * Vector3::x();
    [n.x, n.y, n.z]
}

/// Total-least-squares plane through the probe positions.
pub fn fit_plane(track: &ProbeTrack) -> Result<ChestPlane> {
    let pts = &track.samples;
    if pts.len() < 3 {
        return Err(Error::Degenerate(format!(
            "plane fit needs at least 3 samples, got {}",
            pts.len()
        )));
    }
    if pts.windows(2).any(|w| !(w[1].t >= w[0].t)) {
        return Err(Error::Input("probe timestamps must be non-decreasing".into()));
    }
    if pts.iter().any(|s| !(s.x.is_finite() && s.y.is_finite() && s.z.is_finite())) {
        return Err(Error::Input("probe positions must be finite".into()));
    }

    let n = pts.len() as f64;
    let centroid = pts
        .iter()
        .fold(Vector3::zeros(), |acc, s| acc + Vector3::new(s.x, s.y, s.z))
        / n;
    let mut cov = Matrix3::zeros();
    for s in pts {
        let d = Vector3::new(s.x, s.y, s.z) - centroid;
        cov += d * d.transpose();
    }
    cov /= n;

    let eig = SymmetricEigen::new(cov);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let (l_min, l_mid, l_max) = (
        eig.eigenvalues[order[0]],
        eig.eigenvalues[order[1]],
        eig.eigenvalues[order[2]],
    );
    if !(l_max > 1e-18) {
        return Err(Error::Degenerate(
            "rank test failed: all probe positions coincide (spread rank 0)".into(),
        ));
    }
    if l_mid <= 1e-10 * l_max {
        return Err(Error::Degenerate(format!(
            "rank test failed: probe positions are collinear (spread rank 1, \
             eigenvalue ratio {:.3e})",
            l_mid / l_max
        )));
    }

    let mut normal = eig.eigenvectors.column(order[0]).normalize();
    const TIE: f64 = 1e-12;
    let flip = if normal.x.abs() > TIE {
        normal.x < 0.0
    } else if normal.z.abs() > TIE {
        normal.z < 0.0
    } else {
        normal.y < 0.0
    };
    if flip {
        normal = -normal;
    }

    let rms_residual = (l_min.max(0.0)).sqrt();
    Ok(ChestPlane {
        normal: [normal.x, normal.y, normal.z],
        centroid: [centroid.x, centroid.y, centroid.z],
        rms_residual,
    })
}

pub fn normal_to_posture(n: [f64; 3]) -> PostureAngles {
    PostureAngles {
        roll_deg: n[1].clamp(-1.0, 1.0).asin().to_degrees(),
        pitch_deg: n[2].atan2(n[0]).to_degrees(),
    }
}

pub fn plane_to_posture(plane: &ChestPlane) -> PostureAngles {
    normal_to_posture(plane.normal)
}

/// Angle between gravity and an axis line, folded to `[0, 90]`, subtracted from 90.
fn tilt_from_horizontal_deg(axis: &Vector3<f64>) -> f64 {
    let g = -Vector3::z();
    let c = (g.dot(axis) / axis.norm()).abs().min(1.0);
    90.0 - c.acos().to_degrees()
}

pub fn gravity_angles(frame: &BodyFrame) -> GravityAngles {
    GravityAngles {
        g_roll_deg: tilt_from_horizontal_deg(&frame.frontal),
        g_pitch_deg: tilt_from_horizontal_deg(&frame.sagittal),
    }
}

pub fn posture_to_gravity(p: PostureAngles) -> GravityAngles {
    gravity_angles(&body_frame(p))
}

/// Finds a posture inside the `roll x pitch` box whose gravity-referenced angles equal
/// `target`. Seeds from a 1-degree grid, then refines with Newton steps on a
/// finite-difference Jacobian.
pub fn gravity_to_posture(target: GravityAngles, roll: Interval, pitch: Interval) -> Result<PostureAngles> {
    let residual = |r: f64, p: f64| {
        let g = posture_to_gravity(PostureAngles::new(r, p));
        (g.g_roll_deg - target.g_roll_deg, g.g_pitch_deg - target.g_pitch_deg)
    };
    let norm2 = |(a, b): (f64, f64)| a * a + b * b;

    let steps = |i: Interval| ((i.width()).ceil() as usize).max(1);
    let (nr, np) = (steps(roll), steps(pitch));
    let mut best = (roll.lo, pitch.lo, f64::INFINITY);
    for i in 0..=nr {
        let r = roll.lo + roll.width() * i as f64 / nr as f64;
        for j in 0..=np {
            let p = pitch.lo + pitch.width() * j as f64 / np as f64;
            let e = norm2(residual(r, p));
            if e < best.2 {
                best = (r, p, e);
            }
        }
    }

    let (mut r, mut p) = (best.0, best.1);
    const H: f64 = 1e-6;
    for _ in 0..100 {
        let f = residual(r, p);
        if norm2(f).sqrt() < 1e-12 {
            break;
        }
        let fr = residual(r + H, p);
        let fp = residual(r, p + H);
        let j = [[(fr.0 - f.0) / H, (fp.0 - f.0) / H], [(fr.1 - f.1) / H, (fp.1 - f.1) / H]];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det.abs() < 1e-14 {
            break;
        }
        let dr = (j[1][1] * f.0 - j[0][1] * f.1) / det;
        let dp = (-j[1][0] * f.0 + j[0][0] * f.1) / det;
        r = roll.clamp(r - dr);
        p = pitch.clamp(p - dp);
    }
    let err = norm2(residual(r, p)).sqrt();
    if err > 1e-6 {
        return Err(Error::Input(format!(
            "gravity angles ({}, {}) are not attainable in roll {roll} x pitch {pitch} \
             (closest residual {err:.3} deg)",
            target.g_roll_deg, target.g_pitch_deg
        )));
    }
    Ok(PostureAngles::new(r, p))
}

/// Parses a probe track CSV with header `t,x,y,z` (seconds, millimetres).
pub fn read_track_csv<R: Read>(reader: R) -> Result<ProbeTrack> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    if header != ["t", "x", "y", "z"] {
        return Err(Error::Input(format!(
            "probe track header must be `t,x,y,z`, got `{}`",
            header.join(",")
        )));
    }
    let samples = rdr.deserialize().collect::<std::result::Result<Vec<ProbeSample>, _>>()?;
    Ok(ProbeTrack { samples })
}

pub fn load_track(path: impl AsRef<Path>) -> Result<ProbeTrack> {
    read_track_csv(std::fs::File::open(path)?)
}

pub fn write_track_csv<W: std::io::Write>(track: &ProbeTrack, writer: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().from_writer(writer);
    for s in &track.samples {
        w.serialize(s)?;
    }
    w.flush()?;
    Ok(())
}

/// Synthetic chest scan: `n` probe positions spread over a 150 mm square patch of the
/// chest plane of `posture`, with isotropic Gaussian noise of `noise_sigma_mm`.
pub fn synthetic_track(posture: PostureAngles, n: usize, noise_sigma_mm: f64, seed: u64) -> ProbeTrack {
    let frame = body_frame(posture);
    let center = Vector3::new(250.0, 0.0, 1100.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, noise_sigma_mm.max(0.0)).expect("finite sigma");
    let samples = (0..n)
        .map(|i| {
            let u: f64 = rng.random_range(-75.0..75.0);
            let v: f64 = rng.random_range(-75.0..75.0);
            let jitter = Vector3::new(noise.sample(&mut rng), noise.sample(&mut rng), noise.sample(&mut rng));
            let p = center + frame.frontal * u + frame.longitudinal * v + jitter;
            ProbeSample {
                t: i as f64 * 0.05,
                x: p.x,
                y: p.y,
                z: p.z,
            }
        })
        .collect();
    ProbeTrack { samples }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn track(points: &[[f64; 3]]) -> ProbeTrack {
        ProbeTrack {
            samples: points
                .iter()
                .enumerate()
                .map(|(i, p)| ProbeSample {
                    t: i as f64,
                    x: p[0],
                    y: p[1],
                    z: p[2],
                })
                .collect(),
        }
    }

    #[test]
    fn unit_square_plane() {
        let plane = fit_plane(&track(&[[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 1.0, 0.0]])).unwrap();
        assert!((plane.normal[0]).abs() < 1e-12);
        assert!((plane.normal[1]).abs() < 1e-12);
        assert!((plane.normal[2] - 1.0).abs() < 1e-12);
        assert!(plane.rms_residual < 1e-12);
    }

    #[test]
    fn collinear_and_short_tracks_are_degenerate() {
        let line: Vec<[f64; 3]> = (0..10).map(|i| [i as f64, 2.0 * i as f64, -(i as f64)]).collect();
        match fit_plane(&track(&line)) {
            Err(Error::Degenerate(msg)) => assert!(msg.contains("collinear")),
            other => panic!("{other:?}"),
        }
        assert!(matches!(fit_plane(&track(&[[0.0; 3], [1.0, 0.0, 0.0]])), Err(Error::Degenerate(_))));
        assert!(matches!(fit_plane(&track(&[[1.0; 3]; 5])), Err(Error::Degenerate(_))));
    }

    #[test]
    fn timestamps_must_not_decrease() {
        let mut t = track(&[[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]);
        t.samples[2].t = -1.0;
        assert!(matches!(fit_plane(&t), Err(Error::Input(_))));
    }

    #[test]
    fn normal_is_oriented_out_of_chest() {
        let plane = fit_plane(&synthetic_track(PostureAngles::new(15.0, 60.0), 50, 0.0, 1)).unwrap();
        assert!(plane.normal[0] >= 0.0);
        let n: f64 = plane.normal.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((n - 1.0).abs() < 1e-12);
    }

    #[test]
    fn canonical_normals() {
        assert_eq!(normal_to_posture([1.0, 0.0, 0.0]), PostureAngles::new(0.0, 0.0));
        let supine = normal_to_posture([0.0, 0.0, 1.0]);
        assert!((supine.pitch_deg - 90.0).abs() < 1e-12 && supine.roll_deg.abs() < 1e-12);
    }

    #[test]
    fn compose_then_extract() {
        let p = PostureAngles::new(20.0, 45.0);
        let back = normal_to_posture(posture_normal(p));
        assert!((back.roll_deg - 20.0).abs() < 1e-9);
        assert!((back.pitch_deg - 45.0).abs() < 1e-9);
    }

    #[test]
    fn upright_gravity_is_zero() {
        let g = posture_to_gravity(PostureAngles::new(0.0, 0.0));
        assert!(g.g_roll_deg.abs() < 1e-12 && g.g_pitch_deg.abs() < 1e-12);
    }

    #[test]
    fn lateral_lean_tilts_frontal_axis() {
        // Lean 20 deg sideways: rotate about the sagittal (x) axis.
        let a = 20f64.to_radians();
        let lean = Matrix3::new(1.0, 0.0, 0.0, 0.0, a.cos(), -a.sin(), 0.0, a.sin(), a.cos());
        let g = gravity_angles(&BodyFrame::from_rotation(&lean));
        assert!((g.g_roll_deg - 20.0).abs() < 1e-12);
        assert!(g.g_pitch_deg.abs() < 1e-12);
    }

    #[test]
    fn gravity_closed_form() {
        // sin(g_roll) = |sin r sin p|, sin(g_pitch) = |cos r sin p|
        for (r, p) in [(10.0f64, 30.0f64), (-25.0, 60.0), (40.0, 85.0)] {
            let g = posture_to_gravity(PostureAngles::new(r, p));
            let (rr, pr) = (r.to_radians(), p.to_radians());
            assert!((g.g_roll_deg - (rr.sin() * pr.sin()).abs().asin().to_degrees()).abs() < 1e-9);
            assert!((g.g_pitch_deg - (rr.cos() * pr.sin()).abs().asin().to_degrees()).abs() < 1e-9);
        }
    }

    #[test]
    fn gravity_even_in_roll() {
        for r in [5.0, 17.0, 33.0] {
            let a = posture_to_gravity(PostureAngles::new(r, 50.0));
            let b = posture_to_gravity(PostureAngles::new(-r, 50.0));
            assert!((a.g_roll_deg - b.g_roll_deg).abs() < 1e-12);
        }
    }

    #[test]
    fn unattainable_gravity_target() {
        let t = GravityAngles {
            g_roll_deg: 60.0,
            g_pitch_deg: 60.0,
        };
        assert!(gravity_to_posture(t, Interval::new(0.0, 65.0), Interval::new(0.0, 85.0)).is_err());
    }

    #[test]
    fn track_csv_round_trip() {
        let t = synthetic_track(PostureAngles::new(5.0, 30.0), 20, 0.5, 3);
        let mut buf = Vec::new();
        write_track_csv(&t, &mut buf).unwrap();
        assert!(buf.starts_with(b"t,x,y,z\n"));
        let back = read_track_csv(buf.as_slice()).unwrap();
        assert_eq!(back, t);
        assert!(read_track_csv("a,b,c\n1,2,3\n".as_bytes()).is_err());
    }
}
