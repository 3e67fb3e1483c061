use thiserror::Error;

/// Errors produced by the simulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("configuration error in `{section}.{key}`: {reason}")]
    Config {
        section: String,
        key: String,
        reason: String,
    },

    #[error(
        "time step {dt} s exceeds the stability bound of {bound} s for {layers} layers \
         (override `model.reference_stability_dt` to relax it)"
    )]
    Stability { dt: f64, bound: f64, layers: usize },

    #[error("layer index {index} out of range {min}..={max}")]
    LayerIndex {
        index: usize,
        min: usize,
        max: usize,
    },

    #[error("infinite resistance: zero inner radius has no conduction path")]
    InfiniteResistance,

    #[error("no progress after {0} zero-length sub-intervals within one major step")]
    NoProgress(usize),

    #[error("invalid comparison: {0}")]
    InvalidComparison(String),

    #[error("failed to parse configuration: {0}")]
    Parse(#[from] toml::de::Error),

    #[error("failed to serialize configuration: {0}")]
    Serialize(#[from] toml::ser::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn config_err(section: &str, key: &str, reason: impl Into<String>) -> Error {
    Error::Config {
        section: section.to_owned(),
        key: key.to_owned(),
        reason: reason.into(),
    }
}

pub(crate) fn ensure_finite(name: &str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "{name} must be finite, got {value}"
        )))
    }
}
