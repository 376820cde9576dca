use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{column_name, parse_column_name, EmgChannel, EmgRecord, Muscle, Side};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelBinding {
    pub muscle: Muscle,
    pub side: Side,
}

/// Sidecar binding CSV column names to muscle channels.
pub type ChannelMap = BTreeMap<String, ChannelBinding>;

pub fn load_channel_map(path: impl AsRef<Path>) -> Result<ChannelMap> {
    Ok(serde_json::from_reader(std::fs::File::open(path)?)?)
}

/// Reads an EMG CSV (`t,<muscle>_<side>,...`, seconds and mV). The sample rate is
/// recovered from the time column, which must be uniformly spaced.
pub fn read_emg_csv<R: Read>(reader: R, map: Option<&ChannelMap>) -> Result<EmgRecord> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    if header.first().map(String::as_str) != Some("t") {
        return Err(Error::Input("EMG CSV must start with a `t` column".into()));
    }
    let bindings = header[1..]
        .iter()
        .map(|name| {
            map.and_then(|m| m.get(name).map(|b| (b.muscle, b.side)))
                .or_else(|| parse_column_name(name))
                .ok_or_else(|| Error::Input(format!("EMG column `{name}` is not bound to a muscle channel")))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut t = Vec::new();
    let mut columns = vec![Vec::new(); bindings.len()];
    for (line, row) in rdr.records().enumerate() {
        let row = row?;
        if row.len() != header.len() {
            return Err(Error::Input(format!("EMG CSV row {} has {} fields", line + 2, row.len())));
        }
        let parse = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| Error::Input(format!("EMG CSV row {}: `{s}` is not a number", line + 2)))
        };
        t.push(parse(&row[0])?);
        for (col, field) in columns.iter_mut().zip(row.iter().skip(1)) {
            col.push(parse(field)?);
        }
    }
    if t.len() < 2 {
        return Err(Error::Input("EMG CSV needs at least two samples".into()));
    }
    let dt = (t[t.len() - 1] - t[0]) / (t.len() - 1) as f64;
    if !(dt > 0.0) || t.windows(2).any(|w| ((w[1] - w[0]) - dt).abs() > 1e-3 * dt) {
        return Err(Error::Input("EMG time column must be uniformly increasing".into()));
    }
    let sample_rate_hz = (1e6 / dt).round() / 1e6;

    let record = EmgRecord {
        sample_rate_hz,
        channels: bindings
            .into_iter()
            .zip(columns)
            .map(|((muscle, side), samples)| EmgChannel { muscle, side, samples })
            .collect(),
    };
    record.validate()?;
    Ok(record)
}

pub fn load_emg_csv(path: impl AsRef<Path>, map: Option<&ChannelMap>) -> Result<EmgRecord> {
    let path = path.as_ref();
    read_emg_csv(std::fs::File::open(path)?, map)
        .map_err(|e| match e {
            Error::Input(m) => Error::Input(format!("{}: {m}", path.display())),
            other => other,
        })
}

pub fn write_emg_csv<W: Write>(record: &EmgRecord, writer: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().from_writer(writer);
    let mut header = vec!["t".to_string()];
    header.extend(record.channels.iter().map(|c| column_name(c.muscle, c.side)));
    w.write_record(&header)?;
    let mut row = Vec::with_capacity(header.len());
    for i in 0..record.len() {
        row.clear();
        row.push((i as f64 / record.sample_rate_hz).to_string());
        row.extend(record.channels.iter().map(|c| c.samples[i].to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_with_sidecar_map() {
        let csv = "t,GL,GR\n0,1,2\n0.001,3,4\n0.002,5,6\n";
        assert!(read_emg_csv(csv.as_bytes(), None).is_err());
        let map: ChannelMap = serde_json::from_str(
            r#"{"GL": {"muscle": "gastrocnemius", "side": "left"},
                "GR": {"muscle": "gastrocnemius", "side": "right"}}"#,
        )
        .unwrap();
        let r = read_emg_csv(csv.as_bytes(), Some(&map)).unwrap();
        assert_eq!(r.sample_rate_hz, 1000.0);
        assert_eq!(r.channels[1].samples, vec![2.0, 4.0, 6.0]);
        assert_eq!(r.channels[1].side, Side::Right);
    }

    #[test]
    fn rejects_nonuniform_time() {
        let csv = "t,gastrocnemius_left\n0,1\n0.001,1\n0.005,1\n";
        assert!(read_emg_csv(csv.as_bytes(), None).is_err());
    }

    #[test]
    fn round_trip_preserves_samples() {
        let r = EmgRecord {
            sample_rate_hz: 2000.0,
            channels: vec![EmgChannel {
                muscle: Muscle::ObliqueAbdominal,
                side: Side::Left,
                samples: (0..50).map(|i| (i as f64 * 0.37).sin() * 0.05).collect(),
            }],
        };
        let mut buf = Vec::new();
        write_emg_csv(&r, &mut buf).unwrap();
        let back = read_emg_csv(buf.as_slice(), None).unwrap();
        assert_eq!(back, r);
    }
}
