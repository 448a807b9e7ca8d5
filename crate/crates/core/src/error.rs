use thiserror::Error;

/// Errors raised by the guidance library and simulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("path parameter {s} outside domain [{lo}, {hi}]")]
    Domain { s: f64, lo: f64, hi: f64 },

    #[error("degenerate geometry: {0}")]
    Geometry(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("wind speed {wind:.3} m/s is not below airspeed {airspeed:.3} m/s")]
    WindInfeasible { wind: f64, airspeed: f64 },

    #[error("look-ahead infeasible: cross-track distance {distance:.3} m exceeds L1 = {l1:.3} m")]
    LookAheadInfeasible { distance: f64, l1: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
