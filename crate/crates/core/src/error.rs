use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("invalid polynomial: {0}")]
    InvalidPolynomial(&'static str),

    #[error("transfer function is singular at {freq_hz} Hz (|den| = {den_mag:e})")]
    SingularEvaluation { freq_hz: f64, den_mag: f64 },

    #[error("pole extraction supports denominator degree 1 or 2, got {0}")]
    UnsupportedDegree(usize),

    #[error("infinite DC loop gain: gds1 + gdsb must be positive")]
    InfiniteLoopGain,

    #[error("unstable configuration: damping coefficient {damping:e} must be positive")]
    UnstableConfiguration { damping: f64 },

    #[error("invalid netlist: {0}")]
    InvalidNetlist(String),

    #[error("unknown probe `{label}` (available: {available})")]
    UnknownProbe { label: String, available: String },

    #[error("singular system: pivot below tolerance at node {node}")]
    SingularSystem { node: usize },

    #[error("at {freq_hz} Hz: {source}")]
    AtFrequency {
        freq_hz: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid frequency grid: {0}")]
    InvalidGrid(&'static str),

    #[error("frequency response must have strictly increasing frequencies")]
    NonMonotoneResponse,

    #[error("responses are sampled on different grids")]
    GridMismatch,

    #[error("bandwidth unresolved: response does not cross peak - 3 dB on the {0} side")]
    BandwidthUnresolved(&'static str),

    #[error("need at least {needed} samples, found {found}")]
    InsufficientSamples { needed: usize, found: usize },

    #[error("center frequency at {f0} Hz is not below Nyquist ({nyquist} Hz)")]
    Nyquist { f0: f64, nyquist: f64 },

    #[error(
        "channels {channels:?} are at or above Nyquist ({nyquist} Hz); \
         resample the input or lower f_hi"
    )]
    NyquistChannels { channels: Vec<usize>, nyquist: f64 },

    #[error("input sample {index} is not finite")]
    InputCorrupt { index: usize },

    #[error("malformed WAV header: {0}")]
    WavMalformed(String),

    #[error("truncated WAV data: header declares {declared} samples, {available} available")]
    WavTruncated { declared: usize, available: usize },

    #[error("unsupported WAV encoding: {0}")]
    WavUnsupported(String),

    #[error("WAV has {0} channels; only mono is supported")]
    WavMultiChannel(u16),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn at_frequency(self, freq_hz: f64) -> Self {
        Error::AtFrequency {
            freq_hz,
            source: Box::new(self),
        }
    }
}

pub(crate) fn require_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be positive and finite",
        })
    }
}

pub(crate) fn require_non_negative(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be non-negative and finite",
        })
    }
}
