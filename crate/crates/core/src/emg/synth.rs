use std::collections::BTreeMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{parse_column_name, ConditionId, EmgChannel, EmgRecord};
use crate::{Error, Result};

/// Synthetic multi-subject EMG dataset described by per-channel amplitudes.
///
/// Each channel is `a * (sin(2 pi f1 t + p1) + sin(2 pi f2 t + p2)) + N(0, (k a)^2)`
/// with `a` the channel amplitude, `f1, f2` the tones and `k` the noise fraction.
/// Phases and noise are seeded per subject, condition and channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmgFixture {
    pub sample_rate_hz: f64,
    pub duration_s: f64,
    pub seed: u64,
    pub tones_hz: Vec<f64>,
    pub noise_fraction: f64,
    pub subjects: Vec<FixtureSubject>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureSubject {
    pub id: String,
    /// Condition -> column name -> amplitude (mV).
    pub conditions: BTreeMap<ConditionId, BTreeMap<String, f64>>,
}

impl EmgFixture {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_reader(std::fs::File::open(path)?)?)
    }

    pub fn synthesize(&self, subject: usize, condition: ConditionId) -> Result<EmgRecord> {
        let s = self
            .subjects
            .get(subject)
            .ok_or_else(|| Error::Input(format!("fixture has no subject #{subject}")))?;
        let amps = s
            .conditions
            .get(&condition)
            .ok_or_else(|| Error::Input(format!("subject {}: condition {condition} is missing", s.id)))?;
        let n = (self.duration_s * self.sample_rate_hz).round() as usize;
        let channels = amps
            .iter()
            .enumerate()
            .map(|(k, (name, &amp))| {
                let (muscle, side) = parse_column_name(name)
                    .ok_or_else(|| Error::Input(format!("fixture column `{name}` is not a muscle channel")))?;
                let stream = self.seed ^ ((subject as u64) << 32) ^ ((condition as u64) << 16) ^ k as u64;
                let mut rng = ChaCha8Rng::seed_from_u64(stream);
                let phases: Vec<f64> = self
                    .tones_hz
                    .iter()
                    .map(|_| rng.random_range(0.0..std::f64::consts::TAU))
                    .collect();
                let noise = Normal::new(0.0, self.noise_fraction * amp)
                    .map_err(|e| Error::Input(format!("fixture noise: {e}")))?;
                let samples = (0..n)
                    .map(|i| {
                        let t = i as f64 / self.sample_rate_hz;
                        let tones: f64 = self
                            .tones_hz
                            .iter()
                            .zip(&phases)
                            .map(|(f, p)| (std::f64::consts::TAU * f * t + p).sin())
                            .sum();
                        amp * tones + noise.sample(&mut rng)
                    })
                    .collect();
                Ok(EmgChannel { muscle, side, samples })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(EmgRecord {
            sample_rate_hz: self.sample_rate_hz,
            channels,
        })
    }
}
