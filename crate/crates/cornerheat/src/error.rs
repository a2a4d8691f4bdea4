use std::fmt;
use std::io;

#[derive(Debug)]
pub enum HarnessError {
    Core(cornerheat_core::Error),
    /// A solver error on a particular refinement level.
    AtLevel { level: u32, source: cornerheat_core::Error },
    Config(String),
    Eoc(String),
    /// Malformed line of a mesh dump.
    Parse { line: usize, msg: String },
    Io(io::Error),
    Csv(csv::Error),
    Json(serde_json::Error),
    Toml(toml::de::Error),
}

pub type Result<T> = std::result::Result<T, HarnessError>;

impl fmt::Display for HarnessError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HarnessError::Core(e) => write!(f, "{e}"),
            HarnessError::AtLevel { level, source } => write!(f, "level {level}: {source}"),
            HarnessError::Config(msg) => write!(f, "configuration: {msg}"),
            HarnessError::Eoc(msg) => write!(f, "convergence rate: {msg}"),
            HarnessError::Parse { line, msg } => write!(f, "line {line}: {msg}"),
            HarnessError::Io(e) => write!(f, "io: {e}"),
            HarnessError::Csv(e) => write!(f, "csv: {e}"),
            HarnessError::Json(e) => write!(f, "json: {e}"),
            HarnessError::Toml(e) => write!(f, "toml: {e}"),
        }
    }
}

impl std::error::Error for HarnessError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            HarnessError::Core(e) | HarnessError::AtLevel { source: e, .. } => Some(e),
            HarnessError::Io(e) => Some(e),
            HarnessError::Csv(e) => Some(e),
            HarnessError::Json(e) => Some(e),
            HarnessError::Toml(e) => Some(e),
            HarnessError::Config(_) | HarnessError::Eoc(_) | HarnessError::Parse { .. } => None,
        }
    }
}

impl From<cornerheat_core::Error> for HarnessError {
    fn from(e: cornerheat_core::Error) -> Self {
        HarnessError::Core(e)
    }
}

impl From<io::Error> for HarnessError {
    fn from(e: io::Error) -> Self {
        HarnessError::Io(e)
    }
}

impl From<csv::Error> for HarnessError {
    fn from(e: csv::Error) -> Self {
        HarnessError::Csv(e)
    }
}

impl From<serde_json::Error> for HarnessError {
    fn from(e: serde_json::Error) -> Self {
        HarnessError::Json(e)
    }
}

impl From<toml::de::Error> for HarnessError {
    fn from(e: toml::de::Error) -> Self {
        HarnessError::Toml(e)
    }
}

/// Attaches the refinement level to a core error.
pub(crate) trait AtLevel<T> {
    fn at_level(self, level: u32) -> Result<T>;
}

impl<T> AtLevel<T> for std::result::Result<T, cornerheat_core::Error> {
    fn at_level(self, level: u32) -> Result<T> {
        self.map_err(|source| HarnessError::AtLevel { level, source })
    }
}
