use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{GeneratorMatrix, LatticeFamily};
use crate::Result;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<LatticeFamily>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ensemble: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lll_delta: Option<f64>,
}

/// On-disk lattice description; `generator` is row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeFile {
    pub name: String,
    pub n: usize,
    pub generator: Vec<Vec<f64>>,
    #[serde(default)]
    pub provenance: Provenance,
}

impl LatticeFile {
    pub fn new(name: impl Into<String>, g: &GeneratorMatrix, provenance: Provenance) -> Self {
        Self { name: name.into(), n: g.n(), generator: g.rows(), provenance }
    }

    pub fn generator(&self) -> Result<GeneratorMatrix> {
        if self.generator.len() != self.n {
            return Err(crate::Error::DimensionMismatch { expected: self.n, got: self.generator.len() });
        }
        GeneratorMatrix::from_rows(&self.generator)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }
}
