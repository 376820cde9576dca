use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{median, ConditionId, LoadEstimate};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupRatio {
    pub leg: f64,
    pub abd: f64,
}

/// Load ratios between conditions. `d_over_a` is computed directly, so per subject it
/// equals `b_over_a * d_over_b` up to rounding; across-subject medians need not compose.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioTable {
    pub b_over_a: GroupRatio,
    pub d_over_b: GroupRatio,
    pub d_over_c: GroupRatio,
    pub d_over_a: GroupRatio,
}

impl RatioTable {
    pub fn rows(&self) -> [(&'static str, GroupRatio); 4] {
        [
            ("B/A", self.b_over_a),
            ("D/B", self.d_over_b),
            ("D/C", self.d_over_c),
            ("D/A", self.d_over_a),
        ]
    }
}

pub fn condition_ratios(loads: &BTreeMap<ConditionId, LoadEstimate>) -> Result<RatioTable> {
    let get = |c: ConditionId| {
        loads
            .get(&c)
            .copied()
            .ok_or_else(|| Error::Input(format!("condition {c} is missing")))
    };
    let ratio = |num: ConditionId, den: ConditionId| -> Result<GroupRatio> {
        let (n, d) = (get(num)?, get(den)?);
        if !(d.leg > 0.0) || !(d.abd > 0.0) {
            return Err(Error::Input(format!(
                "condition {den} has a non-positive load and cannot be a ratio denominator"
            )));
        }
        Ok(GroupRatio {
            leg: n.leg / d.leg,
            abd: n.abd / d.abd,
        })
    };
    use ConditionId::*;
    Ok(RatioTable {
        b_over_a: ratio(B, A)?,
        d_over_b: ratio(D, B)?,
        d_over_c: ratio(D, C)?,
        d_over_a: ratio(D, A)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectReport {
    pub id: String,
    pub loads: BTreeMap<ConditionId, LoadEstimate>,
    pub ratios: RatioTable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmgReport {
    pub subjects: Vec<SubjectReport>,
    /// Across-subject median of each ratio.
    pub median: RatioTable,
}

pub fn ratio_report(subjects: Vec<(String, BTreeMap<ConditionId, LoadEstimate>)>) -> Result<EmgReport> {
    if subjects.is_empty() {
        return Err(Error::Input("no subjects to report".into()));
    }
    let subjects = subjects
        .into_iter()
        .map(|(id, loads)| {
            let ratios = condition_ratios(&loads).map_err(|e| match e {
                Error::Input(m) => Error::Input(format!("subject {id}: {m}")),
                other => other,
            })?;
            Ok(SubjectReport { id, loads, ratios })
        })
        .collect::<Result<Vec<_>>>()?;

    let med = |pick: fn(&RatioTable) -> GroupRatio| -> Result<GroupRatio> {
        let legs: Vec<f64> = subjects.iter().map(|s| pick(&s.ratios).leg).collect();
        let abds: Vec<f64> = subjects.iter().map(|s| pick(&s.ratios).abd).collect();
        Ok(GroupRatio {
            leg: median(&legs)?,
            abd: median(&abds)?,
        })
    };
    let median = RatioTable {
        b_over_a: med(|r| r.b_over_a)?,
        d_over_b: med(|r| r.d_over_b)?,
        d_over_c: med(|r| r.d_over_c)?,
        d_over_a: med(|r| r.d_over_a)?,
    };
    Ok(EmgReport { subjects, median })
}

impl EmgReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Plain-text table: one column per ratio, one row per subject plus the median.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let header = self.median.rows();
        let _ = write!(out, "{:<10}", "subject");
        for (name, _) in header {
            let _ = write!(out, " {:>8} {:>8}", format!("{name} leg"), format!("{name} abd"));
        }
        out.push('\n');
        let mut row = |label: &str, table: &RatioTable| {
            let _ = write!(out, "{label:<10}");
            for (_, r) in table.rows() {
                let _ = write!(out, " {:>8.3} {:>8.3}", r.leg, r.abd);
            }
            out.push('\n');
        };
        for s in &self.subjects {
            row(&s.id, &s.ratios);
        }
        row("median", &self.median);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn loads(vals: [(f64, f64); 4]) -> BTreeMap<ConditionId, LoadEstimate> {
        ConditionId::ALL
            .into_iter()
            .zip(vals)
            .map(|(c, (leg, abd))| (c, LoadEstimate { leg, abd }))
            .collect()
    }

    #[test]
    fn identical_loads_give_unit_ratios() {
        let t = condition_ratios(&loads([(2.0, 3.0); 4])).unwrap();
        for (_, r) in t.rows() {
            assert_eq!((r.leg, r.abd), (1.0, 1.0));
        }
    }

    #[test]
    fn missing_condition_named() {
        let mut l = loads([(1.0, 1.0); 4]);
        l.remove(&ConditionId::C);
        match condition_ratios(&l) {
            Err(Error::Input(m)) => assert!(m.contains("condition C")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn zero_denominator_named() {
        let l = loads([(0.0, 1.0), (1.0, 1.0), (1.0, 1.0), (1.0, 1.0)]);
        match condition_ratios(&l) {
            Err(Error::Input(m)) => assert!(m.contains("condition A")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn median_across_subjects() {
        let subjects = [0.5, 0.785, 1.0]
            .iter()
            .enumerate()
            .map(|(i, ba)| (format!("S{i}"), loads([(1.0, 1.0), (*ba, 1.0), (1.0, 1.0), (1.0, 1.0)])))
            .collect();
        let report = ratio_report(subjects).unwrap();
        assert_eq!(report.median.b_over_a.leg, 0.785);
        let text = report.to_text();
        assert!(text.lines().last().unwrap().starts_with("median"));
        assert_eq!(text.lines().count(), 5);
    }

    #[test]
    fn chained_ratio_identity() {
        let t = condition_ratios(&loads([(1.7, 0.9), (1.3, 0.71), (1.21, 0.66), (1.1, 0.69)])).unwrap();
        assert!((t.b_over_a.leg * t.d_over_b.leg - t.d_over_a.leg).abs() < 1e-12);
        assert!((t.b_over_a.abd * t.d_over_b.abd - t.d_over_a.abd).abs() < 1e-12);
    }
}
