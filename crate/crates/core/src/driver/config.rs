//! Scenario configuration, read from TOML.
//!
//! See `docs/config.md` for the full schema.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analytic::GreenAmptParams;
use crate::constitutive::{DispersionParams, SoilParams};
use crate::flow::FlowOptions;
use crate::mesh::{Diagonal, LShape};
use crate::scheme::SchemeSpec;

use super::ScenarioError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default = "default_name")]
    pub name: String,
    /// Scheme name as accepted by [`SchemeSpec::parse`], e.g. `"silf2:0.6"`.
    pub scheme: String,
    pub dt: f64,
    pub t_final: f64,
    pub mesh: MeshSpec,
    pub soil: SoilParams,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub soil_regions: Vec<RegionSoil>,
    #[serde(default)]
    pub flow: FlowOptions,
    pub flow_bc: Vec<FlowBcSpec>,
    pub initial: InitialCondition,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solute: Option<SoluteSpec>,
    #[serde(default)]
    pub output: OutputSpec,
    /// Parameters of the analytic Green–Ampt problems, used by boundary
    /// function ids and by the reference solution.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub green_ampt: Option<GreenAmptParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<Reference>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fertigation: Option<FertigationSpec>,
}

fn repeated(tags: impl Iterator<Item = i32>) -> Option<i32> {
    let mut seen = std::collections::HashSet::new();
    tags.into_iter().find(|t| !seen.insert(*t))
}

fn default_name() -> String {
    "run".to_owned()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeshSpec {
    Structured {
        nx: usize,
        nz: usize,
        lx: f64,
        lz: f64,
        #[serde(default)]
        diagonal: Diagonal,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lshape: Option<LShape>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        strips: Vec<Strip>,
    },
    /// Native `.mesh` text or Gmsh `.msh`, chosen by extension. Relative
    /// paths are resolved against the config file's directory.
    File {
        path: PathBuf,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lshape: Option<LShape>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        strips: Vec<Strip>,
    },
}

impl MeshSpec {
    pub fn lshape(&self) -> Option<&LShape> {
        match self {
            MeshSpec::Structured { lshape, .. } | MeshSpec::File { lshape, .. } => lshape.as_ref(),
        }
    }

    pub fn strips(&self) -> &[Strip] {
        match self {
            MeshSpec::Structured { strips, .. } | MeshSpec::File { strips, .. } => strips,
        }
    }
}

/// Retags the facets of `tag` whose midpoint x lies in `[x_min, x_max]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Strip {
    pub tag: i32,
    pub new_tag: i32,
    pub x_min: f64,
    pub x_max: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionSoil {
    pub region: i32,
    pub soil: SoilParams,
}

/// Analytic boundary traces selectable by id.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryFunction {
    GreenAmptTest1Top,
    GreenAmptTest2Top,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FlowBcSpec {
    Head { tag: i32, value: f64 },
    Function { tag: i32, id: BoundaryFunction },
    NoFlux { tag: i32 },
    FreeDrainage { tag: i32 },
    /// Constant inflow rate, positive into the domain.
    Infiltration { tag: i32, rate: f64 },
}

impl FlowBcSpec {
    pub fn tag(&self) -> i32 {
        match *self {
            FlowBcSpec::Head { tag, .. }
            | FlowBcSpec::Function { tag, .. }
            | FlowBcSpec::NoFlux { tag }
            | FlowBcSpec::FreeDrainage { tag }
            | FlowBcSpec::Infiltration { tag, .. } => tag,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialCondition {
    UniformHead { value: f64 },
    /// `Ψ = datum − z`.
    Hydrostatic {
        #[serde(default)]
        datum: f64,
    },
    UniformTheta { value: f64 },
}

/// Closed time interval during which a solute source is switched on.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Window {
    pub start: f64,
    pub end: f64,
}

impl Window {
    pub fn contains(&self, t: f64) -> bool {
        self.start <= t && t <= self.end
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SoluteBcSpec {
    /// Dirichlet concentration; zero outside the window if one is given.
    Concentration {
        tag: i32,
        value: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        window: Option<Window>,
    },
    /// Cauchy inflow. Without `water_rate` the computed Darcy inflow is used.
    Inflow {
        tag: i32,
        concentration: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        water_rate: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        window: Option<Window>,
    },
    NoFlux { tag: i32 },
    FreeOutflow { tag: i32 },
}

impl SoluteBcSpec {
    pub fn tag(&self) -> i32 {
        match *self {
            SoluteBcSpec::Concentration { tag, .. }
            | SoluteBcSpec::Inflow { tag, .. }
            | SoluteBcSpec::NoFlux { tag }
            | SoluteBcSpec::FreeOutflow { tag } => tag,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SoluteSpec {
    pub dispersion: DispersionParams,
    #[serde(default)]
    pub initial: f64,
    #[serde(default)]
    pub bc: Vec<SoluteBcSpec>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    /// Evenly spaced snapshots over the run, the final state included.
    pub snapshots: usize,
    /// Additional snapshot times, rounded to the nearest step.
    pub snapshot_times: Vec<f64>,
    /// Times at which total water mass is recorded.
    pub mass_times: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reference {
    GreenAmptTest1,
    GreenAmptTest2,
}

/// Irrigation pulse for the fertigation strategies: a Dirichlet
/// concentration `concentration` on `tag`, switched on for half of
/// `duration`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FertigationSpec {
    pub duration: f64,
    pub concentration: f64,
    pub tag: i32,
}

fn invalid(field: &str, reason: impl Into<String>) -> ScenarioError {
    ScenarioError::Invalid {
        field: field.to_owned(),
        reason: reason.into(),
    }
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ScenarioError> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads and validates a config file. A relative mesh path is made
    /// relative to the file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ScenarioError> {
        let path = path.as_ref();
        let mut cfg = Self::from_toml_str(&std::fs::read_to_string(path)?)?;
        if let MeshSpec::File { path: mesh_path, .. } = &mut cfg.mesh {
            if mesh_path.is_relative() {
                if let Some(dir) = path.parent() {
                    *mesh_path = dir.join(&*mesh_path);
                }
            }
        }
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String, ScenarioError> {
        Ok(toml::to_string(self)?)
    }

    pub fn scheme_spec(&self) -> Result<SchemeSpec, ScenarioError> {
        SchemeSpec::parse(&self.scheme).map_err(|e| invalid("scheme", e.to_string()))
    }

    pub fn green_ampt_params(&self) -> GreenAmptParams {
        self.green_ampt.unwrap_or_default()
    }

    pub fn steps(&self) -> usize {
        ((self.t_final / self.dt).round() as usize).max(1)
    }

    /// Checks everything that does not need the mesh. Boundary tags are
    /// checked against the mesh when the run starts.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(invalid("dt", format!("must be positive, got {}", self.dt)));
        }
        if !(self.t_final >= self.dt && self.t_final.is_finite()) {
            return Err(invalid(
                "t_final",
                format!("must be at least dt = {}, got {}", self.dt, self.t_final),
            ));
        }
        self.scheme_spec()?;
        match &self.mesh {
            MeshSpec::Structured { nx, nz, lx, lz, .. } => {
                if *nx == 0 || *nz == 0 {
                    return Err(invalid("mesh", format!("nx and nz must be positive, got {nx} x {nz}")));
                }
                if !(*lx > 0.0 && *lz > 0.0) {
                    return Err(invalid("mesh", format!("lx and lz must be positive, got {lx} x {lz}")));
                }
            }
            MeshSpec::File { path, .. } => {
                if path.as_os_str().is_empty() {
                    return Err(invalid("mesh.path", "empty path"));
                }
            }
        }
        for s in self.mesh.strips() {
            if !(s.x_min <= s.x_max) {
                return Err(invalid("mesh.strips", format!("x_min {} exceeds x_max {}", s.x_min, s.x_max)));
            }
        }
        self.soil.validated().map_err(|e| invalid("soil", e.to_string()))?;
        for r in &self.soil_regions {
            r.soil
                .validated()
                .map_err(|e| invalid("soil_regions", format!("region {}: {e}", r.region)))?;
        }
        self.flow
            .picard
            .validate()
            .map_err(|e| invalid("flow.picard", e.to_string()))?;
        if self.flow_bc.is_empty() {
            return Err(invalid("flow_bc", "no boundary conditions given"));
        }
        for bc in &self.flow_bc {
            if let FlowBcSpec::Infiltration { rate, .. } = bc {
                if !rate.is_finite() {
                    return Err(invalid("flow_bc", format!("infiltration rate {rate}")));
                }
            }
        }
        if let Some(tag) = repeated(self.flow_bc.iter().map(FlowBcSpec::tag)) {
            return Err(invalid("flow_bc", format!("tag {tag} has more than one condition")));
        }
        if let InitialCondition::UniformTheta { value } = self.initial {
            if !(value > self.soil.theta_r && value <= self.soil.theta_s) {
                return Err(invalid(
                    "initial",
                    format!("theta {value} outside ({}, {}]", self.soil.theta_r, self.soil.theta_s),
                ));
            }
        }
        if let Some(sol) = &self.solute {
            DispersionParams::new(sol.dispersion.lambda_l, sol.dispersion.lambda_t, sol.dispersion.lambda_m)
                .map_err(|e| invalid("solute.dispersion", e.to_string()))?;
            if let Some(tag) = repeated(sol.bc.iter().map(SoluteBcSpec::tag)) {
                return Err(invalid("solute.bc", format!("tag {tag} has more than one condition")));
            }
            for bc in &sol.bc {
                let window = match bc {
                    SoluteBcSpec::Concentration { window, .. } | SoluteBcSpec::Inflow { window, .. } => *window,
                    _ => None,
                };
                if let Some(w) = window {
                    if !(w.start <= w.end) {
                        return Err(invalid("solute.bc", format!("window [{}, {}]", w.start, w.end)));
                    }
                }
                if let SoluteBcSpec::Inflow { water_rate: Some(r), .. } = bc {
                    if !(*r >= 0.0) {
                        return Err(invalid("solute.bc", format!("water_rate must be >= 0, got {r}")));
                    }
                }
            }
        }
        if let Some(f) = &self.fertigation {
            if !(f.duration > 0.0) {
                return Err(invalid("fertigation.duration", format!("must be positive, got {}", f.duration)));
            }
            if self.solute.is_none() {
                return Err(invalid("solute", "fertigation needs a [solute] section"));
            }
        }
        Ok(())
    }
}
