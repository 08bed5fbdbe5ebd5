//! On-disk model registry: one weight file plus one text metadata
//! manifest per model, committed with a write-then-rename discipline so a
//! failed registration leaves no partial entry.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clearwave_core::error::{Error, Result};
use clearwave_core::model_file::{load_model, save_model, SavedModel};

/// Metadata manifest entry for one registered model.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelMeta {
    pub name: String,
    pub domain: String,
    pub created_unix: u64,
    /// Base model this one was adapted from, if any.
    pub parent: Option<String>,
}

pub struct ModelRegistry {
    root: PathBuf,
}

impl ModelRegistry {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        std::fs::create_dir_all(&root).map_err(|source| Error::IoFailure {
            path: root.clone(),
            source,
        })?;
        Ok(ModelRegistry { root })
    }

    pub fn model_path(&self, name: &str) -> PathBuf {
        self.root.join(format!("{name}.model.json"))
    }

    fn meta_path(&self, name: &str) -> PathBuf {
        self.root.join(format!("{name}.meta"))
    }

    pub fn exists(&self, name: &str) -> bool {
        self.meta_path(name).exists()
    }

    /// Registers a model under `name`. The metadata rename is the commit
    /// point; a crash before it leaves no visible entry.
    pub fn register(
        &self,
        model: &SavedModel,
        name: &str,
        parent: Option<&str>,
        overwrite: bool,
    ) -> Result<()> {
        if !overwrite && self.exists(name) {
            return Err(Error::InvalidConfig(format!(
                "model '{name}' already exists in {}",
                self.root.display()
            )));
        }
        let named = model.clone().with_name(name);
        save_model(&named, self.model_path(name))?;

        let created = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let mut meta = format!(
            "name={name}\ndomain={}\ncreated_unix={created}\n",
            named.domain_tag().as_str()
        );
        if let Some(p) = parent {
            meta.push_str(&format!("parent={p}\n"));
        }
        let meta_path = self.meta_path(name);
        let tmp = meta_path.with_extension("meta.tmp");
        let io_err = |path: &Path| {
            let path = path.to_path_buf();
            move |source| Error::IoFailure {
                path: path.clone(),
                source,
            }
        };
        std::fs::write(&tmp, meta).map_err(io_err(&tmp))?;
        std::fs::rename(&tmp, &meta_path).map_err(io_err(&meta_path))?;
        Ok(())
    }

    /// Loads a registered model by name.
    pub fn load(&self, name: &str) -> Result<SavedModel> {
        let path = self.model_path(name);
        if !self.exists(name) || !path.exists() {
            let known: Vec<String> = self.list().into_iter().map(|m| m.name).collect();
            let hint = if known.is_empty() {
                "registry is empty".to_string()
            } else {
                format!("known models: {}", known.join(", "))
            };
            return Err(Error::MalformedModelFile {
                path,
                detail: format!("no model named '{name}' in the registry ({hint})"),
            });
        }
        load_model(path)
    }

    /// All registered models' metadata, sorted by name.
    pub fn list(&self) -> Vec<ModelMeta> {
        let Ok(entries) = std::fs::read_dir(&self.root) else {
            return Vec::new();
        };
        let mut metas: Vec<ModelMeta> = entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "meta"))
            .filter_map(|p| {
                let name = p.file_stem()?.to_string_lossy().into_owned();
                self.read_meta(&name).ok()
            })
            .collect();
        metas.sort_by(|a, b| a.name.cmp(&b.name));
        metas
    }

    pub fn read_meta(&self, name: &str) -> Result<ModelMeta> {
        let path = self.meta_path(name);
        let text = std::fs::read_to_string(&path).map_err(|source| Error::IoFailure {
            path: path.clone(),
            source,
        })?;
        let mut meta = ModelMeta {
            name: String::new(),
            domain: String::new(),
            created_unix: 0,
            parent: None,
        };
        for line in text.lines() {
            let Some((k, v)) = line.split_once('=') else {
                continue;
            };
            match k {
                "name" => meta.name = v.to_string(),
                "domain" => meta.domain = v.to_string(),
                "created_unix" => meta.created_unix = v.parse().unwrap_or(0),
                "parent" => meta.parent = Some(v.to_string()),
                _ => {}
            }
        }
        Ok(meta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clearwave_core::fcn::{build_fcn, FcnConfig};
    use rand::SeedableRng;

    fn tiny_model() -> SavedModel {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        SavedModel::Waveform(
            build_fcn(
                &FcnConfig {
                    num_layers: 1,
                    filters_per_layer: 1,
                    filter_len: 3,
                    ..FcnConfig::default()
                },
                &mut rng,
            )
            .unwrap(),
        )
    }

    #[test]
    fn register_load_and_meta() {
        let dir = tempfile::tempdir().unwrap();
        let reg = ModelRegistry::open(dir.path()).unwrap();
        let model = tiny_model();
        reg.register(&model, "base", None, false).unwrap();
        reg.register(&model, "adapted", Some("base"), false).unwrap();

        assert!(reg.exists("base"));
        let loaded = reg.load("adapted").unwrap();
        assert_eq!(loaded.name(), "adapted");
        let meta = reg.read_meta("adapted").unwrap();
        assert_eq!(meta.parent.as_deref(), Some("base"));
        assert_eq!(meta.domain, "waveform");

        // Duplicate names are rejected without overwrite.
        assert!(reg.register(&model, "base", None, false).is_err());
        reg.register(&model, "base", None, true).unwrap();
    }

    #[test]
    fn unknown_name_fails() {
        let dir = tempfile::tempdir().unwrap();
        let reg = ModelRegistry::open(dir.path()).unwrap();
        assert!(matches!(
            reg.load("ghost"),
            Err(Error::MalformedModelFile { .. })
        ));
    }
}
