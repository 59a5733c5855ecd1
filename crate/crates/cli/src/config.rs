//! Run configuration: one JSON document per scenario.

use std::path::Path;

use pshenv_core::{
    CPoint, CompactSpec, Domain, GridGeometry, Obstacle, OptBudget, PotentialSpec, Quadrature, Scenario, C64,
};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

fn default_obstacle() -> Obstacle {
    Obstacle::constant(0.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub name: String,
    pub domain: Domain,
    #[serde(default)]
    pub potential: PotentialSpec,
    #[serde(default = "default_obstacle")]
    pub obstacle: Obstacle,
    #[serde(default)]
    pub points: Vec<CPoint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radial_points: Option<RadialPoints>,
    #[serde(default)]
    pub quadrature: Quadrature,
    #[serde(default)]
    pub budget: OptBudget,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_grid: Option<OracleGrid>,
    /// Governs every random stream of the run; copied into `budget.seed`.
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extremal: Option<ExtremalSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hull: Option<HullSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verify: Option<VerifySpec>,
}

/// `count` points `r · direction` with `r` evenly spaced over `[from, to]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadialPoints {
    pub from: f64,
    pub to: f64,
    pub count: usize,
    #[serde(default = "default_direction")]
    pub direction: CPoint,
}

fn default_direction() -> CPoint {
    CPoint::real(1.0)
}

impl RadialPoints {
    pub fn points(&self) -> Vec<CPoint> {
        (0..self.count)
            .map(|k| {
                let r = if self.count == 1 {
                    self.from
                } else {
                    self.from + (self.to - self.from) * k as f64 / (self.count - 1) as f64
                };
                let mut p = self.direction;
                for z in p.coords_mut() {
                    *z *= r;
                }
                p
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleMethod {
    /// Toric when the data allow it, planar otherwise.
    #[default]
    Auto,
    Planar,
    Toric,
}

fn default_spacing() -> f64 {
    0.01
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleGrid {
    #[serde(default = "default_spacing")]
    pub spacing: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slope_points: Option<usize>,
    #[serde(default)]
    pub method: OracleMethod,
}

impl Default for OracleGrid {
    fn default() -> Self {
        OracleGrid { spacing: default_spacing(), slope_points: None, method: OracleMethod::Auto }
    }
}

impl OracleGrid {
    pub fn geometry(&self) -> GridGeometry {
        GridGeometry { spacing: self.spacing, slope_points: self.slope_points }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtremalSpec {
    /// The open set E.
    pub set: Domain,
}

fn default_radii() -> Vec<f64> {
    vec![0.2, 0.1, 0.05]
}

fn default_epsilons() -> Vec<f64> {
    vec![0.1, 0.03, 0.01]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HullSpec {
    pub compact: CompactSpec,
    #[serde(default = "default_radii")]
    pub radii: Vec<f64>,
    #[serde(default = "default_epsilons")]
    pub epsilons: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySpec {
    pub suites: Vec<String>,
    #[serde(default)]
    pub samples: SuiteSamples,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct SuiteSamples {
    pub riesz_identity: usize,
    pub jensen: usize,
    pub parseval: usize,
    pub subaverage: usize,
}

impl Default for SuiteSamples {
    fn default() -> Self {
        SuiteSamples { riesz_identity: 200, jensen: 100, parseval: 100, subaverage: 500 }
    }
}

impl Config {
    /// Parses a config, reporting the failing field path and line on error.
    pub fn from_json(text: &str) -> Result<Config, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let inner = e.inner();
            CliError::Config(format!(
                "line {} column {}: field `{}`: {}",
                inner.line(),
                inner.column(),
                e.path(),
                inner
            ))
        })
    }

    pub fn load(path: &Path) -> Result<Config, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Config::from_json(&text)
    }

    /// Applies command-line overrides and fills derived fields.
    pub fn resolve(mut self, seed: Option<u64>) -> Result<Config, CliError> {
        if let Some(s) = seed {
            self.seed = s;
        }
        self.budget.seed = self.seed;
        if let Some(r) = self.radial_points.take() {
            if r.count == 0 || !(r.from.is_finite() && r.to.is_finite()) {
                return Err(CliError::Config("radial_points needs a positive count and finite bounds".into()));
            }
            self.points.extend(r.points());
        }
        self.scenario()?;
        self.budget.validate().map_err(|e| CliError::Config(format!("budget: {e}")))?;
        if let Some(g) = &self.oracle_grid {
            if !(g.spacing.is_finite() && g.spacing > 0.0) {
                return Err(CliError::Config("oracle_grid.spacing must be positive".into()));
            }
        }
        let dim = self.domain.dim();
        if let Some(p) = self.points.iter().find(|p| p.dim() != dim) {
            return Err(CliError::Config(format!("point {:?} has dimension {}, domain has {dim}", p.coords(), p.dim())));
        }
        if let Some(h) = &self.hull {
            h.compact.validate(dim).map_err(|e| CliError::Config(format!("hull.compact: {e}")))?;
            if h.radii.is_empty() || h.epsilons.is_empty() {
                return Err(CliError::Config("hull needs at least one radius and one epsilon".into()));
            }
            let decreasing = |v: &[f64]| v.iter().all(|x| *x > 0.0) && v.windows(2).all(|w| w[1] < w[0]);
            if !decreasing(&h.radii) || !decreasing(&h.epsilons) {
                return Err(CliError::Config("hull radii and epsilons must be positive and decreasing".into()));
            }
        }
        if let Some(e) = &self.extremal {
            e.set.validate().map_err(|m| CliError::Config(format!("extremal.set: {m}")))?;
            if e.set.dim() != dim {
                return Err(CliError::Config("extremal.set dimension differs from the domain".into()));
            }
        }
        Ok(self)
    }

    pub fn scenario(&self) -> Result<Scenario, CliError> {
        Scenario::new(self.domain.clone(), self.potential.clone(), self.obstacle.clone(), self.quadrature.clone())
            .map_err(|e| CliError::Config(e.to_string()))
    }

    /// Rejects points on sing(ω) or outside Ω before any computation starts.
    pub fn check_points(&self) -> Result<(), CliError> {
        for p in &self.points {
            if self.potential.is_singular(p) {
                return Err(CliError::Config(format!("point {} in singular set", fmt_point(p))));
            }
            if !pshenv_core::contains(&self.domain, p, self.budget.margin) {
                return Err(CliError::Config(format!("point {} is outside the domain", fmt_point(p))));
            }
        }
        Ok(())
    }
}

pub fn fmt_point(p: &CPoint) -> String {
    let parts: Vec<String> = p.coords().iter().map(|z: &C64| format!("({}, {})", z.re, z.im)).collect();
    parts.join(" ")
}
