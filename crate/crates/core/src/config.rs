//! Bench configuration: mechanism, load model, subject profiles, view catalog and
//! control loop settings, loaded from one JSON file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::control::ControlConfig;
use crate::emg::EmgPipelineConfig;
use crate::kinematics::MechanismConfig;
use crate::load::{LoadParams, SplitWeights};
use crate::planner::{PlannerOptions, RegionOverrides, ViewCatalog};
use crate::{Error, Result};

pub const CONFIG_ENV: &str = "POSTURE_BENCH_CONFIG";

/// Per-subject weight profile and diagnosable-region overrides.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubjectProfile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<SplitWeights>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub regions: RegionOverrides,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchConfig {
    pub mechanism: MechanismConfig,
    pub load: LoadParams,
    pub weights: SplitWeights,
    pub subjects: BTreeMap<String, SubjectProfile>,
    pub views: ViewCatalog,
    pub planner: PlannerOptions,
    pub control: ControlConfig,
    pub emg: EmgPipelineConfig,
}

impl BenchConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: BenchConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Loads from `path`, else from the file named by `POSTURE_BENCH_CONFIG`, else
    /// returns the built-in defaults.
    pub fn resolve(path: Option<&Path>) -> Result<Self> {
        let from_env = std::env::var_os(CONFIG_ENV).filter(|v| !v.is_empty()).map(PathBuf::from);
        match path.map(Path::to_path_buf).or(from_env) {
            Some(p) => Self::load(p),
            None => Ok(Self::default()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.mechanism.validate()?;
        self.load.validate()?;
        self.weights.validate()?;
        self.views.validate()?;
        self.control.validate()?;
        for (id, profile) in &self.subjects {
            if let Some(w) = &profile.weights {
                w.validate().map_err(|e| Error::Config(format!("subject {id}: {e}")))?;
            }
            for view in profile.regions.keys() {
                if !self.views.views.contains_key(view) {
                    return Err(Error::Config(format!("subject {id}: unknown view {view}")));
                }
            }
            for (view, region) in &profile.regions {
                if region.is_empty() {
                    return Err(Error::Config(format!("subject {id}: empty region for {view}")));
                }
            }
        }
        if !(self.planner.grid_step_deg > 0.0) {
            return Err(Error::Config("planner.grid_step_deg must be > 0".into()));
        }
        if !(self.emg.window_s > 0.0) {
            return Err(Error::Config("emg.window_s must be > 0".into()));
        }
        Ok(())
    }

    pub fn subject(&self, id: &str) -> Result<&SubjectProfile> {
        self.subjects
            .get(id)
            .ok_or_else(|| Error::Input(format!("unknown subject `{id}`")))
    }

    /// Weights for `subject`, falling back to the global defaults.
    pub fn weights_for(&self, subject: Option<&str>) -> Result<SplitWeights> {
        match subject {
            Some(id) => Ok(self.subject(id)?.weights.unwrap_or(self.weights)),
            None => Ok(self.weights),
        }
    }

    pub fn regions_for(&self, subject: Option<&str>) -> Result<Option<&RegionOverrides>> {
        subject.map(|id| self.subject(id).map(|p| &p.regions)).transpose()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planner::RegionBox;
    use crate::Interval;

    #[test]
    fn empty_object_is_default() {
        assert_eq!(BenchConfig::from_json("{}").unwrap(), BenchConfig::default());
    }

    #[test]
    fn round_trip() {
        let mut c = BenchConfig::default();
        c.subjects.insert(
            "S3".into(),
            SubjectProfile {
                weights: Some(SplitWeights { w_leg: 2.0, w_abd: 0.5 }),
                regions: [(
                    crate::planner::PLAX.to_string(),
                    RegionBox::new(Interval::new(12.0, 25.0), Interval::new(55.0, 75.0)),
                )]
                .into(),
            },
        );
        let text = serde_json::to_string_pretty(&c).unwrap();
        assert_eq!(BenchConfig::from_json(&text).unwrap(), c);
        assert_eq!(c.weights_for(Some("S3")).unwrap().w_leg, 2.0);
        assert!(c.weights_for(Some("S9")).is_err());
        assert_eq!(c.weights_for(None).unwrap(), SplitWeights::default());
    }

    #[test]
    fn unknown_field_rejected() {
        assert!(matches!(BenchConfig::from_json(r#"{"mechanisms": {}}"#), Err(Error::Config(_))));
    }

    #[test]
    fn invalid_values_rejected() {
        let bad = r#"{"weights": {"w_leg": -1, "w_abd": 1}}"#;
        assert!(BenchConfig::from_json(bad).is_err());
        let bad_view = r#"{"subjects": {"S1": {"regions": {"subcostal": {"roll": [0, 1], "pitch": [0, 1]}}}}}"#;
        assert!(BenchConfig::from_json(bad_view).is_err());
    }

    #[test]
    fn load_reports_path() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.json");
        std::fs::write(&p, "{ not json").unwrap();
        let err = BenchConfig::load(&p).unwrap_err().to_string();
        assert!(err.contains("c.json"));
        assert!(matches!(BenchConfig::load(dir.path().join("missing.json")), Err(Error::Io(_))));
    }
}
