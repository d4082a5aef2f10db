//! Scenario configuration and orchestration: single runs, convergence
//! sweeps and fertigation strategies.

mod config;
pub mod presets;
mod run;

pub use config::*;
pub use run::*;

use crate::flow::FlowError;
use crate::mesh::MeshError;
use crate::transport::TransportError;
use crate::verification::MetricError;

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("invalid config field `{field}`: {reason}")]
    Invalid { field: String, reason: String },
    #[error("config parse error: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("config serialization error: {0}")]
    TomlWrite(#[from] toml::ser::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("mesh: {0}")]
    Mesh(#[from] MeshError),
    #[error("flow setup: {0}")]
    Flow(#[from] FlowError),
    #[error("flow step {step}: {source}")]
    FlowStep { step: usize, source: FlowError },
    #[error("transport: {0}")]
    Transport(#[from] TransportError),
    #[error("transport step {step}: {source}")]
    TransportStep { step: usize, source: TransportError },
    #[error("metric: {0}")]
    Metric(#[from] MetricError),
    #[error("level {level}: {source}")]
    Level {
        level: usize,
        source: Box<ScenarioError>,
    },
}
