//! Butterworth band-pass as a cascade of second-order sections, applied forward and
//! backward for zero phase.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandpassConfig {
    pub low_hz: f64,
    pub high_hz: f64,
    /// Order of each of the high-pass and low-pass Butterworth prototypes.
    pub order: usize,
    /// Forward-backward filtering. The cutoffs are corrected so the two-pass response
    /// is still -3 dB at `low_hz` / `high_hz`.
    pub zero_phase: bool,
}

impl Default for BandpassConfig {
    fn default() -> Self {
        BandpassConfig {
            low_hz: 20.0,
            high_hz: 450.0,
            order: 4,
            zero_phase: true,
        }
    }
}

/// Direct-form II transposed biquad, `a0` normalized to 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b: [f64; 3],
    pub a: [f64; 2],
}

impl Biquad {
    fn dc_gain(&self) -> f64 {
        (self.b[0] + self.b[1] + self.b[2]) / (1.0 + self.a[0] + self.a[1])
    }

    fn response(&self, w: f64) -> Complex64 {
        let z1 = Complex64::from_polar(1.0, -w);
        let z2 = z1 * z1;
        (self.b[0] + self.b[1] * z1 + self.b[2] * z2) / (1.0 + self.a[0] * z1 + self.a[1] * z2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Kind {
    Low,
    High,
}

/// Digital Butterworth sections with `k = tan(w0 / 2)` (bilinear transform, prewarped).
fn butterworth_sections(kind: Kind, order: usize, k: f64) -> Vec<Biquad> {
    let mut out = Vec::with_capacity(order.div_ceil(2));
    for i in 0..order / 2 {
        // pole angle from the negative real axis
        let psi = if order % 2 == 0 {
            std::f64::consts::PI * (2 * i + 1) as f64 / (2 * order) as f64
        } else {
            std::f64::consts::PI * (i + 1) as f64 / order as f64
        };
        let q = 1.0 / (2.0 * psi.cos());
        let norm = 1.0 / (1.0 + k / q + k * k);
        let a = [2.0 * (k * k - 1.0) * norm, (1.0 - k / q + k * k) * norm];
        let b = match kind {
            Kind::Low => {
                let b0 = k * k * norm;
                [b0, 2.0 * b0, b0]
            }
            Kind::High => [norm, -2.0 * norm, norm],
        };
        out.push(Biquad { b, a });
    }
    if order % 2 == 1 {
        let norm = 1.0 / (1.0 + k);
        let b = match kind {
            Kind::Low => [k * norm, k * norm, 0.0],
            Kind::High => [norm, -norm, 0.0],
        };
        out.push(Biquad {
            b,
            a: [(k - 1.0) * norm, 0.0],
        });
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bandpass {
    sections: Vec<Biquad>,
    sample_rate_hz: f64,
    zero_phase: bool,
    pad_len: usize,
}

impl Bandpass {
    pub fn design(config: &BandpassConfig, sample_rate_hz: f64) -> Result<Self> {
        if config.order == 0 {
            return Err(Error::Config("band-pass order must be >= 1".into()));
        }
        if !(config.low_hz > 0.0 && config.low_hz < config.high_hz) {
            return Err(Error::Config(format!(
                "band-pass cutoffs must satisfy 0 < low < high, got {} / {}",
                config.low_hz, config.high_hz
            )));
        }
        if !(sample_rate_hz > 2.0 * config.high_hz) {
            return Err(Error::Config(format!(
                "sample rate {sample_rate_hz} Hz must exceed twice the upper cutoff ({} Hz)",
                2.0 * config.high_hz
            )));
        }
        // Two passes square the magnitude; stretch the prototype so |H|^2 = 1/2 at the
        // requested cutoffs: (1 + x^2n)^2 = 2.
        let correction = if config.zero_phase {
            (std::f64::consts::SQRT_2 - 1.0).powf(1.0 / (2 * config.order) as f64)
        } else {
            1.0
        };
        let warp = |f: f64| (std::f64::consts::PI * f / sample_rate_hz).tan();
        let mut sections = butterworth_sections(Kind::High, config.order, warp(config.low_hz) * correction);
        sections.extend(butterworth_sections(Kind::Low, config.order, warp(config.high_hz) / correction));
        let pad_len = (3.0 * sample_rate_hz / config.low_hz).round() as usize;
        Ok(Bandpass {
            sections,
            sample_rate_hz,
            zero_phase: config.zero_phase,
            pad_len,
        })
    }

    pub fn sections(&self) -> &[Biquad] {
        &self.sections
    }

    /// Magnitude of the effective (one- or two-pass) response at `freq_hz`.
    pub fn gain(&self, freq_hz: f64) -> f64 {
        let w = 2.0 * std::f64::consts::PI * freq_hz / self.sample_rate_hz;
        let h: Complex64 = self.sections.iter().map(|s| s.response(w)).product();
        if self.zero_phase {
            h.norm_sqr()
        } else {
            h.norm()
        }
    }

    /// Steady-state section states for a constant input of 1.
    fn steady_state(&self) -> Vec<[f64; 2]> {
        let mut u = 1.0;
        self.sections
            .iter()
            .map(|s| {
                let y = s.dc_gain() * u;
                let z = [y - s.b[0] * u, s.b[2] * u - s.a[1] * y];
                u = y;
                z
            })
            .collect()
    }

    fn run(&self, x: &mut [f64], zi: &[[f64; 2]], scale: f64) {
        for (s, z0) in self.sections.iter().zip(zi) {
            let (mut z1, mut z2) = (z0[0] * scale, z0[1] * scale);
            for v in x.iter_mut() {
                let input = *v;
                let y = s.b[0] * input + z1;
                z1 = s.b[1] * input - s.a[0] * y + z2;
                z2 = s.b[2] * input - s.a[1] * y;
                *v = y;
            }
        }
    }

    pub fn apply(&self, signal: &[f64]) -> Vec<f64> {
        let n = signal.len();
        if n == 0 {
            return Vec::new();
        }
        let zi = self.steady_state();
        if !self.zero_phase {
            let mut y = signal.to_vec();
            self.run(&mut y, &zi, signal[0]);
            return y;
        }
        // Odd extension at both ends, then forward and backward passes.
        let pad = self.pad_len.min(n - 1);
        let mut ext = Vec::with_capacity(n + 2 * pad);
        ext.extend((1..=pad).rev().map(|i| 2.0 * signal[0] - signal[i]));
        ext.extend_from_slice(signal);
        ext.extend((1..=pad).map(|i| 2.0 * signal[n - 1] - signal[n - 1 - i]));

        let first = ext[0];
        self.run(&mut ext, &zi, first);
        ext.reverse();
        let first = ext[0];
        self.run(&mut ext, &zi, first);
        ext.reverse();
        ext[pad..pad + n].to_vec()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sine(freq: f64, fs: f64, secs: f64) -> Vec<f64> {
        let n = (fs * secs) as usize;
        (0..n)
            .map(|i| (2.0 * std::f64::consts::PI * freq * i as f64 / fs).sin())
            .collect()
    }

    fn rms(x: &[f64]) -> f64 {
        (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
    }

    #[test]
    fn rejects_low_sample_rate() {
        assert!(matches!(
            Bandpass::design(&BandpassConfig::default(), 800.0),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn minus_3db_points_at_cutoffs() {
        for fs in [1000.0, 2000.0, 4000.0] {
            let bp = Bandpass::design(&BandpassConfig::default(), fs).unwrap();
            let half_power = std::f64::consts::FRAC_1_SQRT_2;
            // scan for crossings
            let find = |lo: f64, hi: f64, rising: bool| {
                let (mut a, mut b) = (lo, hi);
                for _ in 0..100 {
                    let m = 0.5 * (a + b);
                    let above = bp.gain(m) > half_power;
                    if above == rising {
                        b = m
                    } else {
                        a = m
                    }
                }
                0.5 * (a + b)
            };
            let f_lo = find(1.0, 100.0, true);
            let f_hi = find(150.0, fs / 2.0 - 1.0, false);
            assert!((f_lo / 20.0 - 1.0).abs() < 0.05, "fs {fs}: low -3 dB at {f_lo}");
            assert!((f_hi / 450.0 - 1.0).abs() < 0.05, "fs {fs}: high -3 dB at {f_hi}");
        }
    }

    #[test]
    fn steady_state_gain_matches_response() {
        let fs = 2000.0;
        let bp = Bandpass::design(&BandpassConfig::default(), fs).unwrap();
        for f in [40.0, 100.0, 300.0] {
            let x = sine(f, fs, 4.0);
            let y = bp.apply(&x);
            let mid = 2000..6000;
            let ratio = rms(&y[mid.clone()]) / rms(&x[mid]);
            assert!((ratio - bp.gain(f)).abs() < 1e-3, "{f} Hz: {ratio} vs {}", bp.gain(f));
        }
    }

    #[test]
    fn single_pass_mode() {
        let cfg = BandpassConfig {
            zero_phase: false,
            ..Default::default()
        };
        let bp = Bandpass::design(&cfg, 2000.0).unwrap();
        assert!((bp.gain(450.0) - std::f64::consts::FRAC_1_SQRT_2).abs() < 0.02);
        assert_eq!(bp.apply(&[1.0; 10]).len(), 10);
    }

    #[test]
    fn odd_order_design() {
        let cfg = BandpassConfig {
            order: 3,
            ..Default::default()
        };
        let bp = Bandpass::design(&cfg, 2000.0).unwrap();
        assert_eq!(bp.sections().len(), 4);
        assert!((bp.gain(100.0) - 1.0).abs() < 0.05);
        assert!((bp.gain(20.0) - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-6);
        assert!((bp.gain(450.0) - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-6);
    }
}
