// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

use thiserror::Error;

use crate::engines::Design;
use crate::numerics::GemmShape;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("bit width {0} is outside the supported range 2..=8")]
    InvalidWidth(u32),

    #[error("value {value} does not fit in a signed {width}-bit operand")]
    ValueOutOfRange { value: i64, width: u32 },

    #[error("matrix dimensions must be at least 1x1, got {rows}x{cols}")]
    EmptyMatrix { rows: usize, cols: usize },

    #[error("matrix data has {got} elements, expected {expected}")]
    DataLength { expected: usize, got: usize },

    #[error("cannot multiply {a_rows}x{a_cols} by {b_rows}x{b_cols}")]
    DimensionMismatch {
        a_rows: usize,
        a_cols: usize,
        b_rows: usize,
        b_cols: usize,
    },

    #[error("operand widths differ: {0}-bit vs {1}-bit")]
    WidthMismatch(u32, u32),

    #[error(
        "{design} result differs from the exact product for {shape} at {width}-bit, seed {seed}"
    )]
    OracleMismatch {
        design: Design,
        shape: GemmShape,
        width: u32,
        seed: u64,
    },

    #[error("comparator sequence has length {got}, expected {expected}")]
    SequenceLength { expected: usize, got: usize },

    #[error("comparator sequence is not a permutation of 0..{0}")]
    NotAPermutation(usize),

    #[error("no calibration entry for {design} {width}-bit {array}x{array}")]
    MissingCalibration {
        design: Design,
        width: u32,
        array: usize,
    },

    #[error("invalid calibration data: {0}")]
    InvalidCalibration(String),

    #[error("bit sparsity {0} is outside [0, 1]")]
    InvalidSparsity(f64),

    #[error("tensor is empty")]
    EmptyTensor,

    #[error("invalid tiling: {0}")]
    InvalidTiling(String),

    #[error("layer `{layer}`: {reason}")]
    Layer { layer: String, reason: String },

    #[error("bundle has no layers")]
    EmptyBundle,

    #[error("malformed manifest {path}: {source}")]
    Manifest {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn layer(layer: &str, reason: impl Into<String>) -> Self {
        Error::Layer {
            layer: layer.to_string(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
