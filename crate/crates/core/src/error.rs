use std::fmt;

use serde::Serialize;

/// Module that raised an error; used to build module-qualified error codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Module {
    BetaDynamics,
    ParallelepipedGeometry,
    HausdorffContent,
    DimensionEngine,
    NumericalLab,
    CliIo,
}

impl Module {
    pub fn as_str(self) -> &'static str {
        match self {
            Module::BetaDynamics => "beta_dynamics",
            Module::ParallelepipedGeometry => "parallelepiped_geometry",
            Module::HausdorffContent => "hausdorff_content",
            Module::DimensionEngine => "dimension_engine",
            Module::NumericalLab => "numerical_lab",
            Module::CliIo => "cli_io",
        }
    }
}

impl fmt::Display for Module {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{module}: domain error: {message}")]
    Domain { module: Module, message: String },

    #[error("{module}: resource limit exceeded: {what} needs {requested}, cap is {cap}")]
    ResourceLimit {
        module: Module,
        what: &'static str,
        requested: f64,
        cap: f64,
    },

    #[error("{module}: degenerate input: {message}")]
    Degenerate { module: Module, message: String },

    /// A proven inequality failed on computed data; indicates a numerical or logic fault.
    #[error("{module}: internal consistency violation: {message}")]
    Consistency { module: Module, message: String },

    #[error("{module}: not found: {message}")]
    NotFound { module: Module, message: String },

    #[error("{module}: {message} (use log-domain evaluation)")]
    Underflow { module: Module, message: String },

    #[error("cli_io: config error: {0}")]
    Config(String),

    #[error("cli_io: io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("cli_io: csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("cli_io: json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(module: Module, message: impl Into<String>) -> Self {
        Error::Domain {
            module,
            message: message.into(),
        }
    }

    pub(crate) fn degenerate(module: Module, message: impl Into<String>) -> Self {
        Error::Degenerate {
            module,
            message: message.into(),
        }
    }

    pub(crate) fn consistency(module: Module, message: impl Into<String>) -> Self {
        Error::Consistency {
            module,
            message: message.into(),
        }
    }

    pub fn module(&self) -> Module {
        match self {
            Error::Domain { module, .. }
            | Error::ResourceLimit { module, .. }
            | Error::Degenerate { module, .. }
            | Error::Consistency { module, .. }
            | Error::NotFound { module, .. }
            | Error::Underflow { module, .. } => *module,
            Error::Config(_) | Error::Io(_) | Error::Csv(_) | Error::Json(_) => Module::CliIo,
        }
    }

    /// Machine-readable code of the form `module.kind`.
    pub fn code(&self) -> String {
        let kind = match self {
            Error::Domain { .. } => "domain",
            Error::ResourceLimit { .. } => "resource_limit",
            Error::Degenerate { .. } => "degenerate",
            Error::Consistency { .. } => "consistency",
            Error::NotFound { .. } => "not_found",
            Error::Underflow { .. } => "underflow",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
            Error::Csv(_) => "csv",
            Error::Json(_) => "json",
        };
        format!("{}.{}", self.module(), kind)
    }
}

pub type Result<T> = std::result::Result<T, Error>;
