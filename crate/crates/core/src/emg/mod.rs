//! Surface-EMG load analysis: band-pass, moving-RMS envelope, per-channel median,
//! left/right group sums and condition ratios.

mod envelope;
mod filter;
mod io;
mod report;
mod synth;

pub use envelope::{channel_load, median, rms_envelope, window_samples};
pub use filter::{Bandpass, BandpassConfig, Biquad};
pub use io::{load_channel_map, load_emg_csv, read_emg_csv, write_emg_csv, ChannelMap};
pub use report::{condition_ratios, ratio_report, EmgReport, GroupRatio, RatioTable, SubjectReport};
pub use synth::{EmgFixture, FixtureSubject};

pub use crate::load::LoadEstimate;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const MIN_SAMPLE_RATE_HZ: f64 = 1000.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Muscle {
    Gastrocnemius,
    ObliqueAbdominal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

impl Muscle {
    pub fn name(self) -> &'static str {
        match self {
            Muscle::Gastrocnemius => "gastrocnemius",
            Muscle::ObliqueAbdominal => "oblique_abdominal",
        }
    }
}

impl Side {
    pub fn name(self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
        }
    }
}

/// Column name used in EMG CSV headers, e.g. `gastrocnemius_left`.
pub fn column_name(muscle: Muscle, side: Side) -> String {
    format!("{}_{}", muscle.name(), side.name())
}

pub fn parse_column_name(name: &str) -> Option<(Muscle, Side)> {
    let (muscle, side) = name.rsplit_once('_')?;
    let muscle = match muscle {
        "gastrocnemius" => Muscle::Gastrocnemius,
        "oblique_abdominal" => Muscle::ObliqueAbdominal,
        _ => return None,
    };
    let side = match side {
        "left" => Side::Left,
        "right" => Side::Right,
        _ => return None,
    };
    Some((muscle, side))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmgChannel {
    pub muscle: Muscle,
    pub side: Side,
    /// mV
    pub samples: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmgRecord {
    pub sample_rate_hz: f64,
    pub channels: Vec<EmgChannel>,
}

impl EmgRecord {
    pub fn len(&self) -> usize {
        self.channels.first().map_or(0, |c| c.samples.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sample_rate_hz >= MIN_SAMPLE_RATE_HZ) {
            return Err(Error::Config(format!(
                "EMG sample rate {} Hz is below the {MIN_SAMPLE_RATE_HZ} Hz minimum",
                self.sample_rate_hz
            )));
        }
        if self.channels.is_empty() {
            return Err(Error::Input("EMG record has no channels".into()));
        }
        let n = self.len();
        let mut seen = std::collections::BTreeSet::new();
        for c in &self.channels {
            let name = column_name(c.muscle, c.side);
            if !seen.insert((c.muscle, c.side)) {
                return Err(Error::Input(format!("duplicate EMG channel {name}")));
            }
            if c.samples.len() != n {
                return Err(Error::Input(format!(
                    "channel {name} has {} samples, expected {n}",
                    c.samples.len()
                )));
            }
            if c.samples.iter().any(|v| !v.is_finite()) {
                return Err(Error::Input(format!("channel {name} contains non-finite samples")));
            }
        }
        Ok(())
    }
}

/// Processing parameters of the load pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmgPipelineConfig {
    pub bandpass: BandpassConfig,
    pub window_s: f64,
}

impl Default for EmgPipelineConfig {
    fn default() -> Self {
        EmgPipelineConfig {
            bandpass: BandpassConfig::default(),
            window_s: 0.3,
        }
    }
}

pub fn bandpass(record: &EmgRecord, config: &BandpassConfig) -> Result<EmgRecord> {
    record.validate()?;
    let filter = Bandpass::design(config, record.sample_rate_hz)?;
    Ok(EmgRecord {
        sample_rate_hz: record.sample_rate_hz,
        channels: record
            .channels
            .iter()
            .map(|c| EmgChannel {
                muscle: c.muscle,
                side: c.side,
                samples: filter.apply(&c.samples),
            })
            .collect(),
    })
}

/// Median envelope value of every channel.
pub fn channel_loads(record: &EmgRecord, config: &EmgPipelineConfig) -> Result<BTreeMap<(Muscle, Side), f64>> {
    let filtered = bandpass(record, &config.bandpass)?;
    let window = window_samples(config.window_s, record.sample_rate_hz);
    filtered
        .channels
        .iter()
        .map(|c| {
            let env = rms_envelope(&c.samples, window)?;
            Ok(((c.muscle, c.side), channel_load(&env)?))
        })
        .collect()
}

/// Leg and abdominal loads: left + right sums of the per-channel medians.
pub fn load_estimate(record: &EmgRecord, config: &EmgPipelineConfig) -> Result<LoadEstimate> {
    let loads = channel_loads(record, config)?;
    let group = |m: Muscle| -> Result<f64> {
        [Side::Left, Side::Right]
            .into_iter()
            .map(|s| {
                loads
                    .get(&(m, s))
                    .copied()
                    .ok_or_else(|| Error::Input(format!("missing EMG channel {}", column_name(m, s))))
            })
            .sum()
    };
    Ok(LoadEstimate {
        leg: group(Muscle::Gastrocnemius)?,
        abd: group(Muscle::ObliqueAbdominal)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ConditionId {
    A,
    B,
    C,
    D,
}

impl ConditionId {
    pub const ALL: [ConditionId; 4] = [ConditionId::A, ConditionId::B, ConditionId::C, ConditionId::D];

    pub fn condition(self) -> Condition {
        let (pendulum, lat_deg, thor_deg) = match self {
            ConditionId::A => (false, 20.0, 0.0),
            ConditionId::B => (true, 20.0, 0.0),
            ConditionId::C => (true, 0.0, 20.0),
            ConditionId::D => (true, 10.0, 10.0),
        };
        Condition {
            id: self,
            pendulum,
            lat_deg,
            thor_deg,
        }
    }
}

impl std::fmt::Display for ConditionId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{self:?}")
    }
}

impl std::str::FromStr for ConditionId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "A" | "a" => Ok(ConditionId::A),
            "B" | "b" => Ok(ConditionId::B),
            "C" | "c" => Ok(ConditionId::C),
            "D" | "d" => Ok(ConditionId::D),
            other => Err(Error::Input(format!("unknown condition `{other}` (expected A-D)"))),
        }
    }
}

/// One load-verification condition: whether the leg pendulum base is engaged and how
/// the 20 degree roll is divided.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub id: ConditionId,
    pub pendulum: bool,
    pub lat_deg: f64,
    pub thor_deg: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn condition_table() {
        let t: Vec<_> = ConditionId::ALL.iter().map(|c| c.condition()).collect();
        assert_eq!((t[0].pendulum, t[0].lat_deg, t[0].thor_deg), (false, 20.0, 0.0));
        assert_eq!((t[1].pendulum, t[1].lat_deg, t[1].thor_deg), (true, 20.0, 0.0));
        assert_eq!((t[2].pendulum, t[2].lat_deg, t[2].thor_deg), (true, 0.0, 20.0));
        assert_eq!((t[3].pendulum, t[3].lat_deg, t[3].thor_deg), (true, 10.0, 10.0));
        assert!(t.iter().all(|c| c.lat_deg + c.thor_deg == 20.0));
    }

    #[test]
    fn column_names() {
        assert_eq!(column_name(Muscle::ObliqueAbdominal, Side::Right), "oblique_abdominal_right");
        assert_eq!(
            parse_column_name("oblique_abdominal_left"),
            Some((Muscle::ObliqueAbdominal, Side::Left))
        );
        assert_eq!(parse_column_name("biceps_left"), None);
    }

    #[test]
    fn record_validation() {
        let ch = |m, s, n| EmgChannel {
            muscle: m,
            side: s,
            samples: vec![0.0; n],
        };
        let mut r = EmgRecord {
            sample_rate_hz: 2000.0,
            channels: vec![ch(Muscle::Gastrocnemius, Side::Left, 10), ch(Muscle::Gastrocnemius, Side::Right, 9)],
        };
        assert!(r.validate().is_err());
        r.channels[1].samples.push(f64::NAN);
        assert!(r.validate().is_err());
        r.channels[1].samples[9] = 0.0;
        r.validate().unwrap();
        r.sample_rate_hz = 800.0;
        assert!(matches!(r.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn missing_group_channel() {
        let fs = 2000.0;
        let samples: Vec<f64> = (0..2000).map(|i| (i as f64 * 0.3).sin()).collect();
        let r = EmgRecord {
            sample_rate_hz: fs,
            channels: vec![EmgChannel {
                muscle: Muscle::Gastrocnemius,
                side: Side::Left,
                samples,
            }],
        };
        match load_estimate(&r, &EmgPipelineConfig::default()) {
            Err(Error::Input(m)) => assert!(m.contains("gastrocnemius_right")),
            other => panic!("{other:?}"),
        }
    }
}
