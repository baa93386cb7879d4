// SPDX-License-Identifier: Apache-2.0

//! Word and bit sparsity of integer weight tensors.
//!
//! Bit sparsity is the fraction of zero bits in the temporal streams that
//! actually gate latency: for every tile, the largest magnitude sets how long
//! the array stays busy, so a tile contributes `1 − max|v| / 2^(w−1)`.
//! Layer bit sparsity averages its tiles; model values average layers.

mod bundle;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use bundle::{DType, LayerRecord, Manifest, Role, TensorBundle, MANIFEST_FILE};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::numerics::BitWidth;

/// Dense row-major integer tensor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tensor {
    shape: Vec<usize>,
    dtype: DType,
    data: Vec<i32>,
}

impl Tensor {
    pub fn new(shape: Vec<usize>, dtype: DType, data: Vec<i32>) -> Result<Self> {
        if shape.is_empty() || shape.contains(&0) {
            return Err(Error::EmptyTensor);
        }
        let expected: usize = shape.iter().product();
        if data.len() != expected {
            return Err(Error::DataLength {
                expected,
                got: data.len(),
            });
        }
        if dtype == DType::Int8 && data.iter().any(|v| i8::try_from(*v).is_err()) {
            return Err(Error::InvalidTiling(
                "int8 tensor holds values outside -128..=127".into(),
            ));
        }
        Ok(Tensor { shape, dtype, data })
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn dtype(&self) -> DType {
        self.dtype
    }

    pub fn data(&self) -> &[i32] {
        &self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// `shape[0] x product(shape[1..])`.
    fn as_2d(&self) -> (usize, usize) {
        let rows = self.shape[0];
        (rows, self.data.len() / rows)
    }
}

/// How a tensor is cut into latency-bottleneck tiles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TileSpec {
    /// One tile per slice along the first (output channel) dimension.
    PerFeatureMap,
    /// `rows x cols` blocks over the `shape[0] x rest` matrix view; edge
    /// blocks may be smaller.
    Block { rows: usize, cols: usize },
    /// Per feature map for tensors of rank ≥ 3 (convolutions), 32x32 blocks otherwise.
    Auto,
}

impl TileSpec {
    pub const DEFAULT_BLOCK: TileSpec = TileSpec::Block { rows: 32, cols: 32 };

    pub fn resolve(self, shape: &[usize]) -> TileSpec {
        match self {
            TileSpec::Auto if shape.len() >= 3 => TileSpec::PerFeatureMap,
            TileSpec::Auto => Self::DEFAULT_BLOCK,
            other => other,
        }
    }
}

impl fmt::Display for TileSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TileSpec::PerFeatureMap => f.write_str("feature-map"),
            TileSpec::Block { rows, cols } => write!(f, "block:{rows}x{cols}"),
            TileSpec::Auto => f.write_str("auto"),
        }
    }
}

impl FromStr for TileSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "auto" => Ok(TileSpec::Auto),
            "feature-map" | "fm" => Ok(TileSpec::PerFeatureMap),
            "block" => Ok(TileSpec::DEFAULT_BLOCK),
            _ => {
                let dims = s
                    .strip_prefix("block:")
                    .and_then(|d| d.split_once('x'))
                    .ok_or_else(|| format!("bad tiling `{s}` (auto, feature-map, block[:RxC])"))?;
                let parse = |x: &str| x.parse::<usize>().map_err(|e| format!("{s}: {e}"));
                Ok(TileSpec::Block {
                    rows: parse(dims.0)?,
                    cols: parse(dims.1)?,
                })
            }
        }
    }
}

/// Fraction of elements equal to zero.
pub fn word_sparsity(tensor: &Tensor) -> Result<f64> {
    if tensor.is_empty() {
        return Err(Error::EmptyTensor);
    }
    let zeros = tensor.data.iter().filter(|&&v| v == 0).count();
    Ok(zeros as f64 / tensor.len() as f64)
}

/// Largest magnitude of every tile, in row-major tile order.
pub fn tile_maxima(tensor: &Tensor, tiles: TileSpec) -> Result<Vec<u32>> {
    let (rows, cols) = tensor.as_2d();
    match tiles.resolve(&tensor.shape) {
        TileSpec::PerFeatureMap => Ok(tensor
            .data
            .chunks(cols)
            .map(|fm| fm.iter().map(|v| v.unsigned_abs()).max().unwrap_or(0))
            .collect()),
        TileSpec::Block { rows: br, cols: bc } => {
            if br == 0 || bc == 0 {
                return Err(Error::InvalidTiling(format!("block {br}x{bc} is empty")));
            }
            let mut out = Vec::with_capacity(rows.div_ceil(br) * cols.div_ceil(bc));
            for r0 in (0..rows).step_by(br) {
                for c0 in (0..cols).step_by(bc) {
                    let mut m = 0u32;
                    for r in r0..(r0 + br).min(rows) {
                        let row = &tensor.data[r * cols..(r + 1) * cols];
                        for v in &row[c0..(c0 + bc).min(cols)] {
                            m = m.max(v.unsigned_abs());
                        }
                    }
                    out.push(m);
                }
            }
            Ok(out)
        }
        TileSpec::Auto => unreachable!("resolved above"),
    }
}

/// Mean over tiles of `1 − tile_max / 2^(w−1)`.
pub fn bit_sparsity(tensor: &Tensor, width: BitWidth, tiles: TileSpec) -> Result<f64> {
    if tensor.is_empty() {
        return Err(Error::EmptyTensor);
    }
    if let Some(&v) = tensor.data.iter().find(|&&v| !width.contains(v as i64)) {
        return Err(Error::ValueOutOfRange {
            value: v as i64,
            width: width.bits(),
        });
    }
    let maxima = tile_maxima(tensor, tiles)?;
    Ok(sparsity_of_maxima(&maxima, width))
}

pub(crate) fn sparsity_of_maxima(maxima: &[u32], width: BitWidth) -> f64 {
    let cap = width.max_magnitude() as f64;
    maxima.iter().map(|&m| 1.0 - m as f64 / cap).sum::<f64>() / maxima.len() as f64
}

/// Keeps the top `target` bits of each element: an arithmetic shift right
/// by `dtype_bits − target`.
pub fn msb_truncate(tensor: &Tensor, target: BitWidth) -> Result<Tensor> {
    let shift = tensor.dtype.bits() - target.bits();
    let data = tensor.data.iter().map(|&v| v >> shift).collect();
    Tensor::new(tensor.shape.clone(), DType::Int8, data)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Weighting {
    /// Every layer counts once.
    #[default]
    Unweighted,
    /// Layers weighted by element count.
    ByElements,
}

#[derive(Debug, Clone, Copy)]
pub struct ProfileOptions {
    pub width: BitWidth,
    pub tiles: TileSpec,
    /// Reduce every layer to `width` bits by MSB truncation. Without it,
    /// int32 layers are rejected and int8 layers must already fit `width`.
    pub truncate: bool,
    pub weighting: Weighting,
    pub exec: Exec,
}

impl ProfileOptions {
    pub fn new(width: BitWidth) -> Self {
        ProfileOptions {
            width,
            tiles: TileSpec::Auto,
            truncate: false,
            weighting: Weighting::Unweighted,
            exec: Exec::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LayerSparsity {
    pub name: String,
    pub role: Role,
    pub width: BitWidth,
    pub word_sparsity: f64,
    pub bit_sparsity: f64,
    pub tiles: TileSpec,
    pub tile_count: usize,
    pub elements: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SparsityReport {
    pub width: BitWidth,
    pub weighting: Weighting,
    /// Sorted by layer name.
    pub layers: Vec<LayerSparsity>,
    pub word_sparsity: f64,
    pub bit_sparsity: f64,
}

impl SparsityReport {
    pub fn from_layers(
        width: BitWidth,
        weighting: Weighting,
        mut layers: Vec<LayerSparsity>,
    ) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::EmptyBundle);
        }
        layers.sort_by(|a, b| a.name.cmp(&b.name));
        let weight = |l: &LayerSparsity| match weighting {
            Weighting::Unweighted => 1.0,
            Weighting::ByElements => l.elements as f64,
        };
        let total: f64 = layers.iter().map(weight).sum();
        let mean = |f: fn(&LayerSparsity) -> f64| {
            layers.iter().map(|l| weight(l) * f(l)).sum::<f64>() / total
        };
        let word_sparsity = mean(|l| l.word_sparsity);
        let bit_sparsity = mean(|l| l.bit_sparsity);
        Ok(SparsityReport {
            width,
            weighting,
            layers,
            word_sparsity,
            bit_sparsity,
        })
    }
}

pub fn profile_tensor(
    name: &str,
    role: Role,
    tensor: &Tensor,
    options: &ProfileOptions,
) -> Result<LayerSparsity> {
    let width = options.width;
    let tensor = if options.truncate {
        if tensor.dtype.bits() < width.bits() {
            return Err(Error::layer(
                name,
                format!("cannot widen {} to {width}", tensor.dtype),
            ));
        }
        msb_truncate(tensor, width).map_err(|e| Error::layer(name, e.to_string()))?
    } else if tensor.dtype == DType::Int32 {
        return Err(Error::layer(
            name,
            format!("int32 data needs MSB truncation to profile at {width}"),
        ));
    } else {
        tensor.clone()
    };
    let tiles = options.tiles.resolve(tensor.shape());
    let wrap = |e: Error| Error::layer(name, e.to_string());
    let maxima = tile_maxima(&tensor, tiles).map_err(wrap)?;
    Ok(LayerSparsity {
        name: name.to_string(),
        role,
        width,
        word_sparsity: word_sparsity(&tensor).map_err(wrap)?,
        bit_sparsity: bit_sparsity(&tensor, width, tiles).map_err(wrap)?,
        tiles,
        tile_count: maxima.len(),
        elements: tensor.len(),
    })
}

/// Profiles every layer of `bundle` (in parallel when enabled).
pub fn profile_bundle(bundle: &TensorBundle, options: &ProfileOptions) -> Result<SparsityReport> {
    let records = &bundle.manifest().layers;
    if records.is_empty() {
        return Err(Error::EmptyBundle);
    }
    let layers = options.exec.map(records, |rec| {
        let tensor = bundle.read_layer(rec)?;
        profile_tensor(&rec.name, rec.role, &tensor, options)
    });
    let layers = layers.into_iter().collect::<Result<Vec<_>>>()?;
    SparsityReport::from_layers(options.width, options.weighting, layers)
}
