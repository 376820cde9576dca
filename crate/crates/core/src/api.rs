//! Request and response bodies of the control service HTTP API.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::config::BenchConfig;
use crate::control::{Mode, SplitRequest};
use crate::load::SplitWeights;
use crate::planner::{
    feasible_region, plan_per_view, plan_posture, Plan, RegionBox, RegionOverrides,
};
use crate::{Error, Interval, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetRequest {
    pub roll_deg: f64,
    pub pitch_deg: f64,
    #[serde(default)]
    pub split: SplitRequest,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SubjectRequest {
    pub subject: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanMode {
    /// One posture diagnosable for every requested view.
    #[default]
    Joint,
    /// One posture per view.
    PerView,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewPlan {
    pub views: Vec<String>,
    pub region: RegionBox,
    pub plan: Plan,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanResponse {
    pub mode: PlanMode,
    pub subject: Option<String>,
    pub weights: SplitWeights,
    pub plans: Vec<ViewPlan>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MechanismBounds {
    pub roll: Interval,
    pub pitch: Interval,
    pub lat: Interval,
    pub thor: Interval,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionsResponse {
    pub mechanism: MechanismBounds,
    pub views: BTreeMap<String, RegionBox>,
    pub aliases: BTreeMap<String, String>,
    pub subjects: BTreeMap<String, RegionOverrides>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
}

impl From<&Error> for ErrorBody {
    fn from(e: &Error) -> Self {
        ErrorBody {
            error: e.kind().to_string(),
            message: e.to_string(),
            mode: match e {
                Error::IllegalCommand { mode, .. } => Some(*mode),
                _ => None,
            },
        }
    }
}

pub fn regions(config: &BenchConfig) -> RegionsResponse {
    let m = &config.mechanism;
    RegionsResponse {
        mechanism: MechanismBounds {
            roll: m.roll_limits,
            pitch: m.pitch_limits,
            lat: m.lat_limits,
            thor: m.thor_limits,
        },
        views: config.views.views.clone(),
        aliases: config.views.aliases.clone(),
        subjects: config
            .subjects
            .iter()
            .filter(|(_, p)| !p.regions.is_empty())
            .map(|(id, p)| (id.clone(), p.regions.clone()))
            .collect(),
    }
}

/// Splits a comma-separated view list.
pub fn parse_views(views: &str) -> Vec<String> {
    views
        .split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(str::to_string)
        .collect()
}

/// Plans for `views`. Weights come from the subject profile when a subject is given,
/// otherwise from `default_weights`.
pub fn plan(
    config: &BenchConfig,
    views: &[String],
    subject: Option<&str>,
    default_weights: SplitWeights,
    mode: PlanMode,
) -> Result<PlanResponse> {
    let overrides = config.regions_for(subject)?;
    let weights = match subject {
        Some(_) => config.weights_for(subject)?,
        None => default_weights,
    };
    let mut canonical = views
        .iter()
        .map(|v| config.views.canonical(v))
        .collect::<Result<Vec<_>>>()?;
    canonical.sort();
    canonical.dedup();
    let options = &config.planner;
    let plans = match mode {
        PlanMode::Joint => {
            let region = feasible_region(&canonical, &config.views, overrides)?.ok_or_else(|| {
                Error::Planning(format!(
                    "views {} share no diagnosable posture; fall back to single-view examination \
                     (plan each view separately)",
                    canonical.join(", ")
                ))
            })?;
            let plan = plan_posture(region, &weights, &config.load, &config.mechanism, options)?;
            vec![ViewPlan {
                views: canonical,
                region,
                plan,
            }]
        }
        PlanMode::PerView => plan_per_view(&canonical, &config.views, overrides, &weights, &config.load, &config.mechanism, options)?
            .into_iter()
            .map(|(view, plan)| {
                let region = config.views.region(&view, overrides)?;
                Ok(ViewPlan {
                    views: vec![view],
                    region,
                    plan,
                })
            })
            .collect::<Result<Vec<_>>>()?,
    };
    Ok(PlanResponse {
        mode,
        subject: subject.map(str::to_string),
        weights,
        plans,
    })
}
