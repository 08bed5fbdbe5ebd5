//! Uniform dispatch over the three enhancement methods.

use crate::audio::AudioClip;
use crate::ddae::{enhance_ddae, DdaeModel};
use crate::dsp::StftConfig;
use crate::error::Result;
use crate::fcn::enhance_fcn;
use crate::mmse::{mmse_enhance, GainConfig};
use crate::model_file::SavedModel;
use crate::nn::ModelGraph;

/// An enhancement method ready to run on clips.
#[derive(Debug, Clone)]
pub enum Enhancer {
    Mmse {
        gain: GainConfig,
        stft: StftConfig,
    },
    Ddae(DdaeModel),
    Fcn(ModelGraph),
}

impl Enhancer {
    pub fn mmse_default() -> Self {
        Enhancer::Mmse {
            gain: GainConfig::default(),
            stft: StftConfig::default(),
        }
    }

    /// Wraps a loaded model file in the matching enhancer.
    pub fn from_saved(model: SavedModel) -> Self {
        match model {
            SavedModel::Spectral(m) => Enhancer::Ddae(m),
            SavedModel::Waveform(g) => Enhancer::Fcn(g),
        }
    }

    pub fn method_name(&self) -> &'static str {
        match self {
            Enhancer::Mmse { .. } => "mmse",
            Enhancer::Ddae(_) => "ddae",
            Enhancer::Fcn(_) => "fcn",
        }
    }

    pub fn enhance(&self, clip: &AudioClip) -> Result<AudioClip> {
        match self {
            Enhancer::Mmse { gain, stft } => mmse_enhance(clip, gain, stft),
            Enhancer::Ddae(model) => enhance_ddae(clip, model),
            Enhancer::Fcn(graph) => enhance_fcn(clip, graph),
        }
    }
}
