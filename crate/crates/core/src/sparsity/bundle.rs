// SPDX-License-Identifier: Apache-2.0

//! On-disk tensor bundles: `manifest.json` plus one raw little-endian,
//! row-major blob per layer.
//!
//! ```json
//! {
//!   "format_version": 1,
//!   "model": "resnet18",
//!   "layers": [
//!     {"name": "conv1.weight", "role": "weight", "shape": [64, 3, 7, 7],
//!      "dtype": "int8", "data_path": "conv1.weight.bin",
//!      "sha256": "<optional hex digest of the blob>"}
//!   ]
//! }
//! ```
//!
//! A blob holds exactly `product(shape) × dtype_size` bytes. `data_path` is
//! relative to the manifest's directory. Unknown manifest keys are ignored.

use std::collections::HashSet;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::Tensor;
use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DType {
    Int8,
    Int32,
}

impl DType {
    pub fn size(self) -> usize {
        match self {
            DType::Int8 => 1,
            DType::Int32 => 4,
        }
    }

    pub fn bits(self) -> u32 {
        self.size() as u32 * 8
    }
}

impl fmt::Display for DType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DType::Int8 => "int8",
            DType::Int32 => "int32",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Weight,
    Activation,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::Weight => "weight",
            Role::Activation => "activation",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerRecord {
    pub name: String,
    pub role: Role,
    pub shape: Vec<usize>,
    pub dtype: DType,
    pub data_path: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sha256: Option<String>,
}

impl LayerRecord {
    pub fn byte_len(&self) -> usize {
        self.shape.iter().product::<usize>() * self.dtype.size()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    #[serde(default = "format_version")]
    pub format_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    pub layers: Vec<LayerRecord>,
}

fn format_version() -> u32 {
    1
}

#[derive(Debug, Clone)]
pub struct TensorBundle {
    root: PathBuf,
    manifest: Manifest,
}

impl TensorBundle {
    /// Reads and validates `dir/manifest.json`. Blobs are read lazily.
    pub fn open(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let manifest: Manifest = serde_json::from_str(&text).map_err(|source| Error::Manifest {
            path: path.clone(),
            source,
        })?;
        let mut names = HashSet::new();
        for rec in &manifest.layers {
            if rec.shape.is_empty() || rec.shape.contains(&0) {
                return Err(Error::layer(
                    &rec.name,
                    format!("invalid shape {:?}", rec.shape),
                ));
            }
            if !names.insert(rec.name.as_str()) {
                return Err(Error::layer(&rec.name, "duplicate layer name"));
            }
        }
        Ok(TensorBundle {
            root: dir.to_path_buf(),
            manifest,
        })
    }

    pub fn manifest(&self) -> &Manifest {
        &self.manifest
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn read_layer(&self, rec: &LayerRecord) -> Result<Tensor> {
        let path = self.root.join(&rec.data_path);
        let bytes = std::fs::read(&path).map_err(|e| Error::io(&path, e))?;
        if bytes.len() != rec.byte_len() {
            return Err(Error::layer(
                &rec.name,
                format!(
                    "blob has {} bytes but shape {:?} of {} needs {}",
                    bytes.len(),
                    rec.shape,
                    rec.dtype,
                    rec.byte_len()
                ),
            ));
        }
        if let Some(expected) = &rec.sha256 {
            let actual = hex_digest(&bytes);
            if !actual.eq_ignore_ascii_case(expected) {
                return Err(Error::layer(
                    &rec.name,
                    format!("checksum mismatch: manifest {expected}, blob {actual}"),
                ));
            }
        }
        let data = match rec.dtype {
            DType::Int8 => bytes.iter().map(|&b| b as i8 as i32).collect(),
            DType::Int32 => bytes
                .chunks_exact(4)
                .map(|c| i32::from_le_bytes([c[0], c[1], c[2], c[3]]))
                .collect(),
        };
        Tensor::new(rec.shape.clone(), rec.dtype, data)
            .map_err(|e| Error::layer(&rec.name, e.to_string()))
    }

    /// Writes blobs and a manifest (with checksums) into `dir`.
    pub fn write(
        dir: &Path,
        model: Option<&str>,
        layers: &[(&str, Role, &Tensor)],
    ) -> Result<Self> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut records = Vec::with_capacity(layers.len());
        for &(name, role, tensor) in layers {
            let bytes: Vec<u8> = match tensor.dtype() {
                DType::Int8 => tensor.data().iter().map(|&v| v as i8 as u8).collect(),
                DType::Int32 => tensor.data().iter().flat_map(|v| v.to_le_bytes()).collect(),
            };
            let file = format!("{name}.bin");
            let path = dir.join(&file);
            std::fs::write(&path, &bytes).map_err(|e| Error::io(&path, e))?;
            records.push(LayerRecord {
                name: name.to_string(),
                role,
                shape: tensor.shape().to_vec(),
                dtype: tensor.dtype(),
                data_path: file.into(),
                sha256: Some(hex_digest(&bytes)),
            });
        }
        let manifest = Manifest {
            format_version: 1,
            model: model.map(str::to_string),
            layers: records,
        };
        let path = dir.join(MANIFEST_FILE);
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        Ok(TensorBundle {
            root: dir.to_path_buf(),
            manifest,
        })
    }
}

fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn write_then_read() {
        let dir = tempfile::tempdir().unwrap();
        let a = Tensor::new(vec![2, 3], DType::Int8, vec![-128, 0, 1, 127, -1, 5]).unwrap();
        let b = Tensor::new(vec![4], DType::Int32, vec![i32::MIN, 0, i32::MAX, -7]).unwrap();
        TensorBundle::write(
            dir.path(),
            Some("toy"),
            &[("a", Role::Weight, &a), ("b", Role::Activation, &b)],
        )
        .unwrap();
        let bundle = TensorBundle::open(dir.path()).unwrap();
        assert_eq!(bundle.manifest().model.as_deref(), Some("toy"));
        let recs = &bundle.manifest().layers;
        assert_eq!(bundle.read_layer(&recs[0]).unwrap(), a);
        assert_eq!(bundle.read_layer(&recs[1]).unwrap(), b);
    }

    #[test]
    fn size_and_checksum_mismatches_name_the_layer() {
        let dir = tempfile::tempdir().unwrap();
        let a = Tensor::new(vec![4], DType::Int8, vec![1, 2, 3, 4]).unwrap();
        let bundle = TensorBundle::write(dir.path(), None, &[("fc1", Role::Weight, &a)]).unwrap();
        let rec = bundle.manifest().layers[0].clone();

        std::fs::write(dir.path().join("fc1.bin"), [1u8, 2, 3, 5]).unwrap();
        let err = bundle.read_layer(&rec).unwrap_err().to_string();
        assert!(err.contains("fc1") && err.contains("checksum"), "{err}");

        std::fs::write(dir.path().join("fc1.bin"), [1u8, 2, 3]).unwrap();
        let err = bundle.read_layer(&rec).unwrap_err().to_string();
        assert!(err.contains("fc1") && err.contains("3 bytes"), "{err}");
    }

    #[test]
    fn malformed_manifests() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            TensorBundle::open(dir.path()),
            Err(Error::Io { .. })
        ));
        std::fs::write(dir.path().join(MANIFEST_FILE), "{\"layers\": 3}").unwrap();
        assert!(matches!(
            TensorBundle::open(dir.path()),
            Err(Error::Manifest { .. })
        ));
        std::fs::write(
            dir.path().join(MANIFEST_FILE),
            r#"{"layers": [{"name":"x","role":"weight","shape":[],"dtype":"int8","data_path":"x.bin"}]}"#,
        )
        .unwrap();
        assert!(matches!(
            TensorBundle::open(dir.path()),
            Err(Error::Layer { .. })
        ));
    }
}
