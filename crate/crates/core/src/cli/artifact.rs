use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::RunConfig;
use crate::error::{Error, Result};
use crate::pipeline::{Featurizer, Model, Pipeline, Variant};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainingMetadata {
    pub seed: u64,
    pub config: RunConfig,
    /// SHA-256 of the full input corpus.
    pub corpus_fingerprint: String,
    pub train_size: usize,
    pub test_size: usize,
}

/// Fitted featurizer and model plus how they were produced, stored as
/// pretty-printed JSON. Tensors carry their shapes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelArtifact {
    pub format_version: u32,
    pub variant: Variant,
    pub featurizer: Featurizer,
    pub model: Model,
    pub metadata: TrainingMetadata,
}

impl ModelArtifact {
    pub fn new(pipeline: Pipeline, metadata: TrainingMetadata) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            variant: pipeline.variant,
            featurizer: pipeline.featurizer,
            model: pipeline.model,
            metadata,
        }
    }

    pub fn pipeline(&self) -> Pipeline {
        Pipeline {
            variant: self.variant,
            featurizer: self.featurizer.clone(),
            model: self.model.clone(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        Ok(text)
    }

    /// Parses an artifact; the version is checked before the body.
    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Header {
            format_version: u32,
        }
        let header: Header = serde_json::from_str(text)?;
        if header.format_version != FORMAT_VERSION {
            return Err(Error::ArtifactVersion {
                expected: FORMAT_VERSION,
                found: header.format_version,
            });
        }
        Ok(serde_json::from_str(text)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    /// SHA-256 of the featurizer and model, independent of metadata.
    pub fn model_fingerprint(&self) -> Result<String> {
        let mut hasher = Sha256::new();
        hasher.update(serde_json::to_vec(&self.featurizer)?);
        hasher.update(serde_json::to_vec(&self.model)?);
        Ok(hex::encode(hasher.finalize()))
    }
}
