// SPDX-License-Identifier: Apache-2.0

//! Integer operand matrices, bit-width rules and the exact GEMM reference.

use std::fmt;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Operand precision in bits, two's complement, 2..=8.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct BitWidth(u32);

impl BitWidth {
    pub const MIN: u32 = 2;
    pub const MAX: u32 = 8;

    pub fn new(bits: u32) -> Result<Self> {
        if (Self::MIN..=Self::MAX).contains(&bits) {
            Ok(BitWidth(bits))
        } else {
            Err(Error::InvalidWidth(bits))
        }
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    /// `2^(w-1)`: the magnitude of the most negative value, which is also
    /// the temporal stream capacity.
    pub fn max_magnitude(self) -> u32 {
        1 << (self.0 - 1)
    }

    pub fn min_value(self) -> i32 {
        -(self.max_magnitude() as i32)
    }

    pub fn max_value(self) -> i32 {
        self.max_magnitude() as i32 - 1
    }

    /// Rate stream length `2^w`.
    pub fn stream_len(self) -> usize {
        1 << self.0
    }

    pub fn contains(self, v: i64) -> bool {
        v >= self.min_value() as i64 && v <= self.max_value() as i64
    }

    pub fn check(self, v: i64) -> Result<()> {
        if self.contains(v) {
            Ok(())
        } else {
            Err(Error::ValueOutOfRange {
                value: v,
                width: self.0,
            })
        }
    }

    pub fn all() -> impl Iterator<Item = BitWidth> {
        (Self::MIN..=Self::MAX).map(BitWidth)
    }
}

impl TryFrom<u32> for BitWidth {
    type Error = Error;

    fn try_from(bits: u32) -> Result<Self> {
        BitWidth::new(bits)
    }
}

impl From<BitWidth> for u32 {
    fn from(w: BitWidth) -> u32 {
        w.0
    }
}

impl fmt::Display for BitWidth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-bit", self.0)
    }
}

/// `m x n_common` times `n_common x p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GemmShape {
    pub m: usize,
    pub n_common: usize,
    pub p: usize,
}

impl GemmShape {
    pub fn new(m: usize, n_common: usize, p: usize) -> Result<Self> {
        if m == 0 || n_common == 0 || p == 0 {
            return Err(Error::EmptyMatrix {
                rows: m.min(n_common),
                cols: p.min(n_common),
            });
        }
        Ok(GemmShape { m, n_common, p })
    }

    pub fn square(n: usize) -> Result<Self> {
        Self::new(n, n, n)
    }
}

impl fmt::Display for GemmShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}x{}", self.m, self.n_common, self.p)
    }
}

/// Dense row-major operand matrix whose elements all fit the declared width.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    width: BitWidth,
    data: Vec<i32>,
}

impl Matrix {
    pub fn from_vec(rows: usize, cols: usize, width: BitWidth, data: Vec<i32>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyMatrix { rows, cols });
        }
        if data.len() != rows * cols {
            return Err(Error::DataLength {
                expected: rows * cols,
                got: data.len(),
            });
        }
        for &v in &data {
            width.check(v as i64)?;
        }
        Ok(Matrix {
            rows,
            cols,
            width,
            data,
        })
    }

    pub fn from_rows(width: BitWidth, rows: &[&[i32]]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::DataLength {
                expected: rows.len() * cols,
                got: rows.iter().map(|r| r.len()).sum(),
            });
        }
        Self::from_vec(rows.len(), cols, width, rows.concat())
    }

    pub fn filled(rows: usize, cols: usize, width: BitWidth, value: i32) -> Result<Self> {
        Self::from_vec(rows, cols, width, vec![value; rows * cols])
    }

    pub fn zeros(rows: usize, cols: usize, width: BitWidth) -> Result<Self> {
        Self::filled(rows, cols, width, 0)
    }

    pub fn identity(n: usize, width: BitWidth) -> Result<Self> {
        let mut data = vec![0; n * n];
        for i in 0..n {
            data[i * n + i] = 1;
        }
        Self::from_vec(n, n, width, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn width(&self) -> BitWidth {
        self.width
    }

    pub fn data(&self) -> &[i32] {
        &self.data
    }

    pub fn get(&self, row: usize, col: usize) -> i32 {
        self.data[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[i32] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }

    pub fn transpose(&self) -> Matrix {
        let mut data = Vec::with_capacity(self.data.len());
        for c in 0..self.cols {
            for r in 0..self.rows {
                data.push(self.get(r, c));
            }
        }
        Matrix {
            rows: self.cols,
            cols: self.rows,
            width: self.width,
            data,
        }
    }

    /// Largest magnitude in column `col`.
    pub fn column_max_magnitude(&self, col: usize) -> u32 {
        (0..self.rows)
            .map(|r| self.get(r, col).unsigned_abs())
            .max()
            .unwrap_or(0)
    }

    /// Largest magnitude in row `row`.
    pub fn row_max_magnitude(&self, row: usize) -> u32 {
        self.row(row)
            .iter()
            .map(|v| v.unsigned_abs())
            .max()
            .unwrap_or(0)
    }
}

/// Full-precision GEMM output; elements are not bounded by the operand width.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct ResultMatrix {
    rows: usize,
    cols: usize,
    data: Vec<i64>,
}

impl ResultMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ResultMatrix {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub(crate) fn from_raw(rows: usize, cols: usize, data: Vec<i64>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        ResultMatrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[i64] {
        &self.data
    }

    pub fn get(&self, row: usize, col: usize) -> i64 {
        self.data[row * self.cols + col]
    }

    pub fn transpose(&self) -> ResultMatrix {
        let mut data = Vec::with_capacity(self.data.len());
        for c in 0..self.cols {
            for r in 0..self.rows {
                data.push(self.get(r, c));
            }
        }
        ResultMatrix::from_raw(self.cols, self.rows, data)
    }

    /// Hex SHA-256 prefix over the little-endian element bytes and dimensions.
    pub fn checksum(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut h = Sha256::new();
        h.update((self.rows as u64).to_le_bytes());
        h.update((self.cols as u64).to_le_bytes());
        for v in &self.data {
            h.update(v.to_le_bytes());
        }
        h.finalize()[..8]
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

pub(crate) fn check_conformable(a: &Matrix, b: &Matrix) -> Result<GemmShape> {
    if a.cols != b.rows {
        return Err(Error::DimensionMismatch {
            a_rows: a.rows,
            a_cols: a.cols,
            b_rows: b.rows,
            b_cols: b.cols,
        });
    }
    if a.width != b.width {
        return Err(Error::WidthMismatch(a.width.0, b.width.0));
    }
    Ok(GemmShape {
        m: a.rows,
        n_common: a.cols,
        p: b.cols,
    })
}

/// The mathematically exact product `A·B` in 64-bit accumulators.
pub fn exact_gemm(a: &Matrix, b: &Matrix) -> Result<ResultMatrix> {
    let shape = check_conformable(a, b)?;
    let mut out = vec![0i64; shape.m * shape.p];
    for (i, out_row) in out.chunks_mut(shape.p).enumerate() {
        for (k, &aik) in a.row(i).iter().enumerate() {
            if aik == 0 {
                continue;
            }
            for (acc, &bkj) in out_row.iter_mut().zip(b.row(k)) {
                *acc += aik as i64 * bkj as i64;
            }
        }
    }
    Ok(ResultMatrix::from_raw(shape.m, shape.p, out))
}

/// `‖C − E‖_F / ‖E‖_F`; zero when both are zero.
pub fn relative_rms_error(estimate: &ResultMatrix, exact: &ResultMatrix) -> f64 {
    let (mut num, mut den) = (0.0f64, 0.0f64);
    for (&c, &e) in estimate.data().iter().zip(exact.data()) {
        num += ((c - e) as f64).powi(2);
        den += (e as f64).powi(2);
    }
    if num == 0.0 {
        0.0
    } else {
        (num / den).sqrt()
    }
}

/// Uniform random operand matrix.
///
/// Generator: ChaCha8 seeded with `ChaCha8Rng::seed_from_u64(seed)`, one
/// `next_u32()` draw per element in row-major order, keeping the top `w`
/// bits and subtracting `2^(w-1)`. A power-of-two range needs no rejection.
pub fn random_matrix(rows: usize, cols: usize, width: BitWidth, seed: u64) -> Result<Matrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift = 32 - width.bits();
    let offset = width.max_magnitude() as i32;
    let data = (0..rows * cols)
        .map(|_| (rng.next_u32() >> shift) as i32 - offset)
        .collect();
    Matrix::from_vec(rows, cols, width, data)
}
