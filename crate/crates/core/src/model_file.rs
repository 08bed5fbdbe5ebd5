//! Model persistence: a single self-describing JSON document per model.
//!
//! Parameters are written as decimal strings with 17 significant digits,
//! which round-trips every binary64 value exactly. Spectral models carry
//! their featurization statistics and configuration in an extra section.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::ddae::{DdaeConfig, DdaeModel, NormStats};
use crate::error::{Error, Result};
use crate::nn::{Activation, Conv1dLayer, DenseLayer, DomainTag, Layer, ModelGraph};

/// Current on-disk schema version.
pub const SCHEMA_VERSION: u32 = 1;

/// A model as stored on disk: either a bare waveform network or a spectral
/// network bundled with its featurization.
#[derive(Debug, Clone, PartialEq)]
pub enum SavedModel {
    Waveform(ModelGraph),
    Spectral(DdaeModel),
}

impl SavedModel {
    pub fn graph(&self) -> &ModelGraph {
        match self {
            SavedModel::Waveform(g) => g,
            SavedModel::Spectral(m) => &m.graph,
        }
    }

    pub fn domain_tag(&self) -> DomainTag {
        self.graph().domain_tag
    }

    pub fn name(&self) -> &str {
        &self.graph().name
    }

    pub fn with_name(mut self, name: &str) -> SavedModel {
        match &mut self {
            SavedModel::Waveform(g) => g.name = name.to_string(),
            SavedModel::Spectral(m) => m.graph.name = name.to_string(),
        }
        self
    }
}

/// Serializes `Vec<f64>` as decimal strings with 17 significant digits.
mod sig17 {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &Vec<f64>, s: S) -> Result<S::Ok, S::Error> {
        let strings: Vec<String> = v.iter().map(|x| format!("{x:.16e}")).collect();
        strings.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        let strings = Vec::<String>::deserialize(d)?;
        strings
            .iter()
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|e| serde::de::Error::custom(format!("bad parameter '{t}': {e}")))
            })
            .collect()
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum LayerDoc {
    Dense {
        in_dim: usize,
        out_dim: usize,
        activation: Activation,
        #[serde(with = "sig17")]
        weights: Vec<f64>,
        #[serde(with = "sig17")]
        bias: Vec<f64>,
    },
    Conv1d {
        num_filters: usize,
        in_channels: usize,
        filter_len: usize,
        activation: Activation,
        #[serde(with = "sig17")]
        weights: Vec<f64>,
        #[serde(with = "sig17")]
        bias: Vec<f64>,
    },
}

#[derive(Serialize, Deserialize)]
struct SpectralSection {
    config: DdaeConfig,
    #[serde(with = "sig17")]
    input_mean: Vec<f64>,
    #[serde(with = "sig17")]
    input_std: Vec<f64>,
    #[serde(with = "sig17")]
    output_mean: Vec<f64>,
    #[serde(with = "sig17")]
    output_std: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ModelDoc {
    schema_version: u32,
    name: String,
    domain_tag: DomainTag,
    layers: Vec<LayerDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    spectral: Option<SpectralSection>,
}

fn layer_to_doc(layer: &Layer) -> LayerDoc {
    match layer {
        Layer::Dense(d) => LayerDoc::Dense {
            in_dim: d.in_dim,
            out_dim: d.out_dim,
            activation: d.activation,
            weights: d.weights.clone(),
            bias: d.bias.clone(),
        },
        Layer::Conv1d(c) => LayerDoc::Conv1d {
            num_filters: c.num_filters,
            in_channels: c.in_channels,
            filter_len: c.filter_len,
            activation: c.activation,
            weights: c.filters.clone(),
            bias: c.bias.clone(),
        },
    }
}

fn doc_to_layer(doc: LayerDoc, path: &Path) -> Result<Layer> {
    let badfile = |detail: String| Error::MalformedModelFile {
        path: path.to_path_buf(),
        detail,
    };
    match doc {
        LayerDoc::Dense {
            in_dim,
            out_dim,
            activation,
            weights,
            bias,
        } => {
            if weights.len() != in_dim * out_dim || bias.len() != out_dim {
                return Err(badfile(format!(
                    "dense layer {out_dim}x{in_dim} carries {} weights, {} biases",
                    weights.len(),
                    bias.len()
                )));
            }
            Ok(Layer::Dense(DenseLayer {
                weights,
                bias,
                in_dim,
                out_dim,
                activation,
            }))
        }
        LayerDoc::Conv1d {
            num_filters,
            in_channels,
            filter_len,
            activation,
            weights,
            bias,
        } => {
            if weights.len() != num_filters * in_channels * filter_len || bias.len() != num_filters
            {
                return Err(badfile(format!(
                    "conv layer {num_filters}x{in_channels}x{filter_len} carries {} weights, {} biases",
                    weights.len(),
                    bias.len()
                )));
            }
            Ok(Layer::Conv1d(Conv1dLayer {
                filters: weights,
                bias,
                num_filters,
                in_channels,
                filter_len,
                activation,
            }))
        }
    }
}

/// Writes a model to `path`, replacing any existing file atomically
/// (write to a sibling temp file, then rename).
pub fn save_model(model: &SavedModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let graph = model.graph();
    for (i, layer) in graph.layers.iter().enumerate() {
        let (w, b) = layer.params();
        if !w.iter().chain(b.iter()).all(|x| x.is_finite()) {
            return Err(Error::NonFiniteValue(format!("layer {i} parameters")));
        }
    }

    let spectral = match model {
        SavedModel::Waveform(_) => None,
        SavedModel::Spectral(m) => Some(SpectralSection {
            config: m.cfg,
            input_mean: m.input_norm.mean.clone(),
            input_std: m.input_norm.std.clone(),
            output_mean: m.output_norm.mean.clone(),
            output_std: m.output_norm.std.clone(),
        }),
    };
    let doc = ModelDoc {
        schema_version: SCHEMA_VERSION,
        name: graph.name.clone(),
        domain_tag: graph.domain_tag,
        layers: graph.layers.iter().map(layer_to_doc).collect(),
        spectral,
    };
    let text = serde_json::to_string_pretty(&doc).expect("model document serializes");

    let io_err = |source| Error::IoFailure {
        path: path.to_path_buf(),
        source,
    };
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, text).map_err(io_err)?;
    std::fs::rename(&tmp, path).map_err(io_err)?;
    Ok(())
}

/// Reads a model from `path`.
pub fn load_model(path: impl AsRef<Path>) -> Result<SavedModel> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::IoFailure {
        path: path.to_path_buf(),
        source,
    })?;
    let badfile = |detail: String| Error::MalformedModelFile {
        path: path.to_path_buf(),
        detail,
    };

    // Check the version first so newer-schema files fail with the right error.
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| badfile(e.to_string()))?;
    let version = value
        .get("schema_version")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| badfile("missing schema_version".into()))?;
    if version != SCHEMA_VERSION as u64 {
        return Err(Error::VersionMismatch {
            path: path.to_path_buf(),
            got: version as u32,
            supported: SCHEMA_VERSION,
        });
    }

    let doc: ModelDoc = serde_json::from_value(value).map_err(|e| badfile(e.to_string()))?;
    let layers = doc
        .layers
        .into_iter()
        .map(|l| doc_to_layer(l, path))
        .collect::<Result<Vec<_>>>()?;
    let graph = ModelGraph::new(doc.name, doc.domain_tag, layers)
        .map_err(|e| badfile(e.to_string()))?;
    for layer in &graph.layers {
        let (w, b) = layer.params();
        if !w.iter().chain(b.iter()).all(|x| x.is_finite()) {
            return Err(badfile("non-finite parameter".into()));
        }
    }

    match (graph.domain_tag, doc.spectral) {
        (DomainTag::Waveform, None) => Ok(SavedModel::Waveform(graph)),
        (DomainTag::Spectral, Some(s)) => {
            s.config.validate().map_err(|e| badfile(e.to_string()))?;
            let input_norm = NormStats {
                mean: s.input_mean,
                std: s.input_std,
            };
            let output_norm = NormStats {
                mean: s.output_mean,
                std: s.output_std,
            };
            if input_norm.mean.len() != input_norm.std.len()
                || output_norm.mean.len() != output_norm.std.len()
                || input_norm.std.iter().any(|&x| x <= 0.0)
                || output_norm.std.iter().any(|&x| x <= 0.0)
            {
                return Err(badfile("bad normalization statistics".into()));
            }
            Ok(SavedModel::Spectral(DdaeModel {
                graph,
                input_norm,
                output_norm,
                cfg: s.config,
            }))
        }
        (tag, _) => Err(badfile(format!(
            "domain {} and spectral section disagree",
            tag.as_str()
        ))),
    }
}
