//! Row-major JSON transform files: `{"matrix": [[..4..] x4], "meta": {..}}`.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::linalg::Mat4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransformFile {
    pub matrix: [[f64; 4]; 4],
    #[serde(default)]
    pub meta: Map<String, Value>,
}

impl TransformFile {
    pub fn new(m: &Mat4) -> Self {
        TransformFile { matrix: m.0, meta: Map::new() }
    }

    pub fn with_meta(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.meta.insert(key.to_string(), value.into());
        self
    }

    pub fn mat(&self) -> Result<Mat4> {
        let m = Mat4(self.matrix);
        if !m.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(m)
    }
}

pub fn read_transform(path: impl AsRef<Path>) -> Result<TransformFile> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

pub fn write_transform(file: &TransformFile, path: impl AsRef<Path>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(file)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}
