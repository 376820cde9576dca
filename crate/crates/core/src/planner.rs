//! Diagnosable posture regions per echocardiographic view and load-minimizing posture
//! planning inside them.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::kinematics::{MechanismConfig, RollSplit};
use crate::load::{predict_load, split_optimize, LoadEstimate, LoadParams, SplitLimits, SplitWeights};
use crate::optimize::golden_section_minimize;
use crate::posture::PostureAngles;
use crate::{Error, Interval, Result};

pub const PLAX: &str = "parasternal_long_axis";
pub const A4C: &str = "apical_four_chamber";

/// Axis-aligned posture box (degrees).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionBox {
    pub roll: Interval,
    pub pitch: Interval,
}

impl RegionBox {
    pub fn new(roll: Interval, pitch: Interval) -> Self {
        RegionBox { roll, pitch }
    }

    pub fn is_empty(&self) -> bool {
        self.roll.is_empty() || self.pitch.is_empty()
    }

    pub fn intersect(&self, other: &RegionBox) -> RegionBox {
        RegionBox::new(self.roll.intersect(&other.roll), self.pitch.intersect(&other.pitch))
    }

    pub fn contains(&self, p: PostureAngles) -> bool {
        self.roll.contains(p.roll_deg) && self.pitch.contains(p.pitch_deg)
    }

    fn validate(&self, what: &str) -> Result<()> {
        if self.is_empty() {
            return Err(Error::Config(format!("{what}: region roll {} x pitch {} is empty", self.roll, self.pitch)));
        }
        let range = Interval::new(-90.0, 90.0);
        if !(range.contains(self.roll.lo) && range.contains(self.roll.hi))
            || !(range.contains(self.pitch.lo) && range.contains(self.pitch.hi))
        {
            return Err(Error::Config(format!("{what}: region lies outside [-90, 90] degrees")));
        }
        Ok(())
    }
}

/// Per-view region replacing the defaults for one subject.
pub type RegionOverrides = BTreeMap<String, RegionBox>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewCatalog {
    pub views: BTreeMap<String, RegionBox>,
    /// Short names accepted in place of the canonical view ids.
    #[serde(default)]
    pub aliases: BTreeMap<String, String>,
}

impl Default for ViewCatalog {
    fn default() -> Self {
        let mut views = BTreeMap::new();
        views.insert(
            PLAX.to_string(),
            RegionBox::new(Interval::new(10.0, 30.0), Interval::new(50.0, 80.0)),
        );
        views.insert(
            A4C.to_string(),
            RegionBox::new(Interval::new(10.0, 20.0), Interval::new(60.0, 70.0)),
        );
        let aliases = [("plax", PLAX), ("a4c", A4C)]
            .into_iter()
            .map(|(a, v)| (a.to_string(), v.to_string()))
            .collect();
        ViewCatalog { views, aliases }
    }
}

impl ViewCatalog {
    pub fn validate(&self) -> Result<()> {
        for (id, region) in &self.views {
            region.validate(&format!("view {id}"))?;
        }
        for (alias, target) in &self.aliases {
            if !self.views.contains_key(target) {
                return Err(Error::Config(format!("alias {alias} points at unknown view {target}")));
            }
        }
        Ok(())
    }

    pub fn canonical(&self, view: &str) -> Result<String> {
        let key = view.trim().to_ascii_lowercase();
        if self.views.contains_key(&key) {
            return Ok(key);
        }
        self.aliases.get(&key).cloned().ok_or_else(|| {
            Error::Input(format!(
                "unknown view `{view}` (known: {})",
                self.views.keys().cloned().collect::<Vec<_>>().join(", ")
            ))
        })
    }

    pub fn region(&self, view: &str, overrides: Option<&RegionOverrides>) -> Result<RegionBox> {
        let id = self.canonical(view)?;
        if let Some(r) = overrides.and_then(|o| o.get(&id)) {
            return Ok(*r);
        }
        Ok(self.views[&id])
    }
}

/// Intersection of the regions of all requested views, or `None` when it is empty.
pub fn feasible_region(
    views: &[impl AsRef<str>],
    catalog: &ViewCatalog,
    overrides: Option<&RegionOverrides>,
) -> Result<Option<RegionBox>> {
    if views.is_empty() {
        return Err(Error::Input("at least one view is required".into()));
    }
    let mut acc: Option<RegionBox> = None;
    for v in views {
        let r = catalog.region(v.as_ref(), overrides)?;
        acc = Some(match acc {
            Some(a) => a.intersect(&r),
            None => r,
        });
    }
    Ok(acc.filter(|r| !r.is_empty()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlannerOptions {
    pub grid_step_deg: f64,
    /// Weight of `pitch^2` (radians) in the objective. Zero by default: lateral bending,
    /// not flexion, drives the burden.
    pub pitch_weight: f64,
    pub pendulum: bool,
}

impl Default for PlannerOptions {
    fn default() -> Self {
        PlannerOptions {
            grid_step_deg: 0.5,
            pitch_weight: 0.0,
            pendulum: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Plan {
    pub posture: PostureAngles,
    pub split: RollSplit,
    pub load: LoadEstimate,
    pub objective: f64,
}

struct Objective<'a> {
    params: &'a LoadParams,
    weights: &'a SplitWeights,
    limits: SplitLimits,
    options: &'a PlannerOptions,
}

impl Objective<'_> {
    fn eval(&self, roll: f64, pitch: f64) -> Result<(f64, RollSplit, LoadEstimate)> {
        let split = split_optimize(roll, self.options.pendulum, self.params, self.weights, &self.limits)?;
        let load = predict_load(split.lat_deg, split.thor_deg, self.options.pendulum, self.params, &self.limits)?;
        let p = pitch.to_radians();
        Ok((self.weights.objective(load) + self.options.pitch_weight * p * p, split, load))
    }

    fn value(&self, roll: f64, pitch: f64) -> f64 {
        self.eval(roll, pitch).map_or(f64::INFINITY, |v| v.0)
    }
}

fn grid(i: Interval, step: f64) -> Vec<f64> {
    let n = (i.width() / step).ceil().max(0.0) as usize;
    (0..=n).map(|k| (i.lo + k as f64 * step).min(i.hi)).collect()
}

/// Minimizes the weighted predicted load over `region` (clipped to the mechanism
/// range). Grid search, then golden-section refinement around the best cell. Ties go
/// to smaller roll, then smaller pitch.
pub fn plan_posture(
    region: RegionBox,
    weights: &SplitWeights,
    params: &LoadParams,
    mechanism: &MechanismConfig,
    options: &PlannerOptions,
) -> Result<Plan> {
    if !(options.grid_step_deg > 0.0) {
        return Err(Error::Config("planner grid step must be > 0".into()));
    }
    let reachable = region.intersect(&RegionBox::new(mechanism.roll_limits, mechanism.pitch_limits));
    if reachable.is_empty() {
        return Err(Error::Planning(format!(
            "region roll {} x pitch {} lies outside the mechanism range",
            region.roll, region.pitch
        )));
    }
    let obj = Objective {
        params,
        weights,
        limits: SplitLimits::from(mechanism),
        options,
    };
    let tol = |f: f64| 1e-12 * f.abs().max(1.0);

    let mut best = (reachable.roll.lo, reachable.pitch.lo, f64::INFINITY);
    for r in grid(reachable.roll, options.grid_step_deg) {
        for p in grid(reachable.pitch, options.grid_step_deg) {
            let f = obj.value(r, p);
            if f < best.2 - tol(best.2) || !best.2.is_finite() {
                best = (r, p, f);
            }
        }
    }
    if !best.2.is_finite() {
        return Err(Error::Planning("no feasible roll split inside the region".into()));
    }

    let step = options.grid_step_deg;
    let (r0, p0, f0) = best;
    let roll_win = reachable.roll.intersect(&Interval::new(r0 - step, r0 + step));
    let (r1, f1) = golden_section_minimize(|r| obj.value(r, p0), roll_win.lo, roll_win.hi, 1e-9);
    let (r, f) = if f1 < f0 - tol(f0) { (r1, f1) } else { (r0, f0) };
    let pitch_win = reachable.pitch.intersect(&Interval::new(p0 - step, p0 + step));
    let (p2, f2) = golden_section_minimize(|p| obj.value(r, p), pitch_win.lo, pitch_win.hi, 1e-9);
    let p = if f2 < f - tol(f) { p2 } else { p0 };

    let (objective, split, load) = obj.eval(r, p)?;
    Ok(Plan {
        posture: PostureAngles::new(r, p),
        split,
        load,
        objective,
    })
}

/// Plans one posture serving every view at once.
pub fn plan_for_views(
    views: &[impl AsRef<str>],
    catalog: &ViewCatalog,
    overrides: Option<&RegionOverrides>,
    weights: &SplitWeights,
    params: &LoadParams,
    mechanism: &MechanismConfig,
    options: &PlannerOptions,
) -> Result<Plan> {
    let region = feasible_region(views, catalog, overrides)?.ok_or_else(|| {
        Error::Planning(
            "the requested views share no diagnosable posture; fall back to single-view \
             examination (plan each view separately)"
                .into(),
        )
    })?;
    plan_posture(region, weights, params, mechanism, options)
}

/// Plans each view independently, for sessions where the posture may change between
/// acquisitions.
pub fn plan_per_view(
    views: &[impl AsRef<str>],
    catalog: &ViewCatalog,
    overrides: Option<&RegionOverrides>,
    weights: &SplitWeights,
    params: &LoadParams,
    mechanism: &MechanismConfig,
    options: &PlannerOptions,
) -> Result<Vec<(String, Plan)>> {
    views
        .iter()
        .map(|v| {
            let id = catalog.canonical(v.as_ref())?;
            let plan = plan_posture(catalog.region(&id, overrides)?, weights, params, mechanism, options)?;
            Ok((id, plan))
        })
        .collect()
}
