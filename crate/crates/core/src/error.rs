//! Crate-wide error type.

use std::path::PathBuf;

/// Errors produced by any clearwave operation.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Not a parseable RIFF/WAVE file.
    #[error("malformed WAV file {path}: {detail}")]
    MalformedWav { path: PathBuf, detail: String },

    /// The file decodes but its sample rate is not 16 kHz.
    #[error("unsupported sample rate {rate_hz} Hz in {path} (expected 16000 Hz)")]
    UnsupportedSampleRate { path: PathBuf, rate_hz: u32 },

    /// The file decodes but is not 16-bit integer PCM.
    #[error("unsupported encoding in {path}: {detail}")]
    UnsupportedEncoding { path: PathBuf, detail: String },

    /// I/O failure while reading or writing an artifact.
    #[error("i/o failure on {path}: {source}")]
    IoFailure {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// An STFT or layer configuration violates its invariants.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// Input has fewer frames than the noise estimator needs.
    #[error("too few frames: got {got}, need at least {need}")]
    TooFewFrames { got: usize, need: usize },

    /// Tensor or layer shapes do not compose.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// A NaN or infinity appeared where finite values are required.
    #[error("non-finite value in {0}")]
    NonFiniteValue(String),

    /// Model file does not parse against the schema.
    #[error("malformed model file {path}: {detail}")]
    MalformedModelFile { path: PathBuf, detail: String },

    /// Model file carries an unknown schema version.
    #[error("model file {path} has schema version {got}, supported version is {supported}")]
    VersionMismatch {
        path: PathBuf,
        got: u32,
        supported: u32,
    },

    /// Training was requested with no pairs.
    #[error("empty training set")]
    EmptyTrainingSet,

    /// A noisy/clean pair has unequal lengths.
    #[error("length mismatch in pair {index}: noisy {noisy} vs clean {clean} samples")]
    LengthMismatch {
        index: usize,
        noisy: usize,
        clean: usize,
    },

    /// A model's domain does not match the requested pipeline.
    #[error("domain mismatch: model is {model_domain}, pipeline needs {needed}")]
    DomainMismatch {
        model_domain: &'static str,
        needed: &'static str,
    },

    /// Speech input to the mixer has zero energy.
    #[error("silent speech input: cannot set an SNR against zero speech power")]
    SilentSpeech,

    /// Noise input to the mixer has zero energy at a finite target SNR.
    #[error("silent noise input: cannot scale zero noise to a finite SNR")]
    SilentNoise,

    /// Corpus recipe has an empty clean, noise, or SNR list.
    #[error("empty corpus recipe: {0}")]
    EmptyRecipe(String),

    /// Adaptation mode is missing its required recording.
    #[error("missing recording for adaptation mode {mode}: {detail}")]
    MissingRecording { mode: &'static str, detail: String },

    /// Metric reference signal has zero energy.
    #[error("silent reference: metric needs a non-silent clean signal")]
    SilentReference,

    /// Metric input has zero length.
    #[error("zero-length input to metric")]
    LengthZero,

    /// Relative improvement against a zero baseline.
    #[error("zero baseline score: relative improvement undefined")]
    ZeroBaseline,

    /// Report requested over an empty entry list.
    #[error("empty evaluation entry list")]
    EmptyEntries,
}

pub type Result<T> = std::result::Result<T, Error>;
