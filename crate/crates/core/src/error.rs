use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("PRBS seed must be nonzero")]
    ZeroSeed,

    #[error("bit count {bits} is not a multiple of {per_symbol} bits per symbol")]
    IndivisibleBits { bits: usize, per_symbol: usize },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("header layout overlaps or exceeds the frame: {0}")]
    HeaderLayout(String),

    #[error("requested drive needs {required_db:.2} dB of gain, driver provides {max_db:.2} dB")]
    DriverGain { required_db: f64, max_db: f64 },

    #[error("target OSNR {target_db:.2} dB is above the current OSNR {current_db:.2} dB")]
    OsnrUnreachable { target_db: f64, current_db: f64 },

    #[error("frame synchronization failed: peak-to-sidelobe ratio {pslr:.2} below {threshold:.2}")]
    SyncFailure { pslr: f64, threshold: f64 },

    #[error("equalizer did not converge: training MSE {mse:.3e} above {threshold:.3e}")]
    ConvergenceFailure { mse: f64, threshold: f64 },

    #[error("equalizer diverged: MSE grew from {start:.3e} to {end:.3e}")]
    Divergence { start: f64, end: f64 },

    #[error("value outside the domain of {func}: {value}")]
    Domain { func: &'static str, value: f64 },

    #[error("threshold {threshold_db:.2} dB-Q is not bracketed by the measured curve")]
    NotBracketed { threshold_db: f64 },

    #[error("sweep point {point} failed")]
    SweepPoint {
        point: String,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.display().to_string(),
            source,
        }
    }
}
