use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("config: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Config(_) | CliError::Io { .. } => 1,
            CliError::Infeasible(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl From<kresling_airship::geometry::GeometryError> for CliError {
    fn from(e: kresling_airship::geometry::GeometryError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<kresling_airship::mass::MassError> for CliError {
    fn from(e: kresling_airship::mass::MassError) -> Self {
        use kresling_airship::mass::MassError;
        match e {
            MassError::Mesh(m) => CliError::Numeric(m.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<kresling_airship::mesh::MeshError> for CliError {
    fn from(e: kresling_airship::mesh::MeshError) -> Self {
        use kresling_airship::mesh::MeshError;
        match e {
            MeshError::Geometry(g) => g.into(),
            other => CliError::Numeric(other.to_string()),
        }
    }
}

impl From<kresling_airship::sweep::SweepError> for CliError {
    fn from(e: kresling_airship::sweep::SweepError) -> Self {
        use kresling_airship::sweep::SweepError;
        match e {
            SweepError::Grid(msg) => CliError::Config(msg),
            SweepError::Evaluation { source, n, m, lambda } => match CliError::from(source) {
                CliError::Numeric(msg) => CliError::Numeric(format!("(n={n}, m={m}, lambda={lambda}): {msg}")),
                other => other,
            },
        }
    }
}

impl From<kresling_airship::energy::EnergyError> for CliError {
    fn from(e: kresling_airship::energy::EnergyError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<kresling_airship::sim::SimError> for CliError {
    fn from(e: kresling_airship::sim::SimError) -> Self {
        use kresling_airship::sim::SimError;
        match e {
            SimError::NonFinite { .. } => CliError::Numeric(e.to_string()),
            SimError::Controller(ref c)
                if matches!(c, kresling_airship::controller::ControllerError::NonFinite { .. }) =>
            {
                CliError::Numeric(e.to_string())
            }
            SimError::Mesh(m) => m.into(),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<kresling_airship::mass::CutError> for CliError {
    fn from(e: kresling_airship::mass::CutError) -> Self {
        CliError::Config(e.to_string())
    }
}
