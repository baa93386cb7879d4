// SPDX-License-Identifier: Apache-2.0

//! Unary bitstream encodings: temporal (thermometer) streams, the 2-unary
//! pulse schedule, and bipolar rate streams driven by a comparator schedule.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::BitWidth;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Sign {
    Pos,
    Neg,
}

impl Sign {
    /// Zero is positive.
    pub fn of(v: i64) -> Sign {
        if v < 0 {
            Sign::Neg
        } else {
            Sign::Pos
        }
    }

    pub fn value(self) -> i64 {
        match self {
            Sign::Pos => 1,
            Sign::Neg => -1,
        }
    }
}

/// Thermometer stream: `magnitude` ones followed by `capacity - magnitude`
/// zeros, sign carried out of band. Stored run-length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TemporalStream {
    magnitude: u32,
    sign: Sign,
    capacity: u32,
}

impl TemporalStream {
    pub fn magnitude(&self) -> u32 {
        self.magnitude
    }

    pub fn sign(&self) -> Sign {
        self.sign
    }

    pub fn capacity(&self) -> u32 {
        self.capacity
    }

    pub fn value(&self) -> i64 {
        self.sign.value() * self.magnitude as i64
    }

    pub fn materialize(&self) -> Vec<bool> {
        (0..self.capacity).map(|t| t < self.magnitude).collect()
    }
}

pub fn encode_temporal(v: i64, width: BitWidth) -> Result<TemporalStream> {
    width.check(v)?;
    Ok(TemporalStream {
        magnitude: v.unsigned_abs() as u32,
        sign: Sign::of(v),
        capacity: width.max_magnitude(),
    })
}

/// 2-unary pulse train: `full_pulses` pulses of weight 2 followed by an
/// optional weight-1 residual pulse for odd magnitudes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TwoUnarySchedule {
    full_pulses: u32,
    has_residual: bool,
    sign: Sign,
}

impl TwoUnarySchedule {
    pub fn full_pulses(&self) -> u32 {
        self.full_pulses
    }

    pub fn has_residual(&self) -> bool {
        self.has_residual
    }

    pub fn sign(&self) -> Sign {
        self.sign
    }

    pub fn cycles(&self) -> u32 {
        self.full_pulses + self.has_residual as u32
    }

    pub fn delivered_weight(&self) -> u32 {
        self.pulse_weights().sum()
    }

    /// Weight carried at cycle `t`; zero once the train has ended.
    pub fn weight_at(&self, t: u32) -> u32 {
        if t < self.full_pulses {
            2
        } else if t == self.full_pulses && self.has_residual {
            1
        } else {
            0
        }
    }

    pub fn pulse_weights(&self) -> impl Iterator<Item = u32> + '_ {
        (0..self.cycles()).map(|t| self.weight_at(t))
    }

    /// Pulse line over a window of `window` cycles (one bit per cycle).
    pub fn materialize(&self, window: u32) -> Vec<bool> {
        (0..window).map(|t| t < self.cycles()).collect()
    }
}

pub fn encode_two_unary(v: i64, width: BitWidth) -> Result<TwoUnarySchedule> {
    width.check(v)?;
    let m = v.unsigned_abs() as u32;
    Ok(TwoUnarySchedule {
        full_pulses: m / 2,
        has_residual: m % 2 == 1,
        sign: Sign::of(v),
    })
}

/// Comparator schedule for rate-stream generation: a permutation of `0..L`.
///
/// Bit `t` of a stream encoding threshold `n` is `values[(t + rotation) % L] < n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LowDiscrepancySequence {
    values: Vec<u32>,
}

impl LowDiscrepancySequence {
    /// Base-2 van der Corput: bit-reversal of the index over `w` bits.
    pub fn van_der_corput(width: BitWidth) -> Self {
        let bits = width.bits();
        let values = (0..width.stream_len() as u32)
            .map(|t| t.reverse_bits() >> (32 - bits))
            .collect();
        LowDiscrepancySequence { values }
    }

    /// Second Sobol dimension (primitive polynomial `x + 1`, m = 1), truncated
    /// to `w` bits. Paired index-wise with van der Corput it forms a
    /// (0, w, 2)-net, so the two coordinates are close to independent.
    pub fn sobol_second(width: BitWidth) -> Self {
        let bits = width.bits();
        let mut directions = Vec::with_capacity(bits as usize);
        let mut v = 1u32 << (bits - 1);
        for _ in 0..bits {
            directions.push(v);
            v ^= v >> 1;
        }
        let values = (0..width.stream_len() as u32)
            .map(|t| {
                directions
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| (t >> k) & 1 == 1)
                    .fold(0, |acc, (_, d)| acc ^ d)
            })
            .collect();
        LowDiscrepancySequence { values }
    }

    pub fn from_values(values: Vec<u32>) -> Result<Self> {
        let len = values.len();
        let mut seen = vec![false; len];
        for &v in &values {
            match seen.get_mut(v as usize) {
                Some(s) if !*s => *s = true,
                _ => return Err(Error::NotAPermutation(len)),
            }
        }
        Ok(LowDiscrepancySequence { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    #[inline]
    pub fn at(&self, t: usize, rotation: usize) -> u32 {
        self.values[(t + rotation) % self.values.len()]
    }
}

/// Bipolar rate-coded stream of length `2^w`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RateStream {
    bits: Vec<bool>,
    source_value: i64,
    width: BitWidth,
}

impl RateStream {
    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn source_value(&self) -> i64 {
        self.source_value
    }

    pub fn width(&self) -> BitWidth {
        self.width
    }

    pub fn ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }
}

/// Bipolar threshold for value `v`: the stream carries `v + 2^(w-1)` ones.
pub(crate) fn bipolar_threshold(v: i64, width: BitWidth) -> u32 {
    (v + width.max_magnitude() as i64) as u32
}

pub fn encode_rate_bipolar(
    v: i64,
    width: BitWidth,
    sequence: &LowDiscrepancySequence,
) -> Result<RateStream> {
    encode_rate_bipolar_rotated(v, width, sequence, 0)
}

pub fn encode_rate_bipolar_rotated(
    v: i64,
    width: BitWidth,
    sequence: &LowDiscrepancySequence,
    rotation: usize,
) -> Result<RateStream> {
    width.check(v)?;
    if sequence.len() != width.stream_len() {
        return Err(Error::SequenceLength {
            expected: width.stream_len(),
            got: sequence.len(),
        });
    }
    let threshold = bipolar_threshold(v, width);
    let bits = (0..sequence.len())
        .map(|t| sequence.at(t, rotation) < threshold)
        .collect();
    Ok(RateStream {
        bits,
        source_value: v,
        width,
    })
}

pub fn decode_rate_bipolar(stream: &RateStream) -> i64 {
    stream.ones() as i64 - stream.width.max_magnitude() as i64
}

/// 0<->1 changes of a line that idles low before and after `bits`.
pub fn transition_count(bits: &[bool]) -> usize {
    let mut prev = false;
    let mut n = 0;
    for &b in bits.iter().chain(std::iter::once(&false)) {
        if b != prev {
            n += 1;
        }
        prev = b;
    }
    n
}
