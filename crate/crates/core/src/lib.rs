//! Speech signal-processing toolkit: speech enhancement (MMSE-style gain
//! filtering, spectral-mapping and waveform-mapping neural enhancers),
//! acoustic scene conversion, model adaptation, corpus synthesis, and
//! objective evaluation (STOI, segmental SNR).

pub mod audio;
pub mod corpus;
pub mod ddae;
pub mod dsp;
pub mod enhance;
pub mod error;
pub mod fcn;
pub mod metrics;
pub mod mmse;
pub mod model_file;
pub mod nn;
pub mod synthetic;

pub use audio::{read_wav, write_wav, AudioClip};
pub use dsp::{
    export_spectrogram, features_to_spectrogram, istft, log_magnitude, stft, LogMagFeatures,
    Spectrogram, StftConfig, WindowKind,
};
pub use error::{Error, Result};
