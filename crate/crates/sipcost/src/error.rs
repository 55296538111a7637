//! Error types shared by every module.
//!
//! Errors that bubble up from a system evaluation are wrapped in
//! [`Error::Component`] so the failing part (die index, interposer,
//! package) is always named in the message.

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error in {origin}: {message}")]
    Parse { origin: String, message: String },

    #[error("validation error in {record}, field `{field}`: {reason}")]
    Validation {
        record: String,
        field: String,
        reason: String,
    },

    #[error("{kind} `{name}` not found; available: {}", available.join(", "))]
    NotFound {
        kind: &'static str,
        name: String,
        available: Vec<String>,
    },

    #[error("domain error in {operation}: {reason}")]
    Domain {
        operation: &'static str,
        reason: String,
    },

    #[error("die of {area_mm2} mm\u{b2} yields zero dies on a {wafer_diameter_mm} mm wafer")]
    DieTooLarge {
        area_mm2: f64,
        wafer_diameter_mm: f64,
    },

    #[error("unit area {area_mm2} mm\u{b2} exceeds panel area {panel_area_mm2} mm\u{b2}")]
    ExceedsPanel { area_mm2: f64, panel_area_mm2: f64 },

    #[error(
        "infeasible integration: interface `{interface}` needs {required_mm2:.2} mm\u{b2} \
         at {pitch_um} \u{b5}m bump pitch but only {available_mm2:.2} mm\u{b2} is available"
    )]
    Infeasible {
        interface: String,
        pitch_um: f64,
        required_mm2: f64,
        available_mm2: f64,
    },

    #[error("sweep of {points} points exceeds the configured cap of {cap}")]
    SweepCapExceeded { points: u64, cap: u64 },

    #[error("in {component}: {source}")]
    Component {
        component: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Wrap an error with the name of the component it came from, e.g.
    /// `die[2] (l2cache)` or `interposer`. Nested wrapping keeps the full
    /// path.
    pub fn in_component(self, component: impl Into<String>) -> Error {
        Error::Component {
            component: component.into(),
            source: Box::new(self),
        }
    }
}

/// Attach component attribution to the error side of a result.
pub trait ResultExt<T> {
    fn in_component(self, component: impl Into<String>) -> Result<T>;
}

impl<T> ResultExt<T> for Result<T> {
    fn in_component(self, component: impl Into<String>) -> Result<T> {
        self.map_err(|e| e.in_component(component))
    }
}
