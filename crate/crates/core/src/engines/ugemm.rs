// SPDX-License-Identifier: Apache-2.0

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{assemble, Design, EngineResult, RowOutcome};
use crate::encoding::{encode_rate_bipolar_rotated, transition_count, LowDiscrepancySequence};
use crate::error::Result;
use crate::exec::Exec;
use crate::numerics::{check_conformable, BitWidth, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SequenceKind {
    VanDerCorput,
    SobolSecond,
}

impl SequenceKind {
    pub fn build(self, width: BitWidth) -> LowDiscrepancySequence {
        match self {
            SequenceKind::VanDerCorput => LowDiscrepancySequence::van_der_corput(width),
            SequenceKind::SobolSecond => LowDiscrepancySequence::sobol_second(width),
        }
    }
}

impl FromStr for SequenceKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "vdc" | "van-der-corput" => Ok(SequenceKind::VanDerCorput),
            "sobol2" | "sobol-second" => Ok(SequenceKind::SobolSecond),
            _ => Err(format!("unknown sequence `{s}` (expected vdc or sobol2)")),
        }
    }
}

/// Comparator schedules for the two operand stream generators.
///
/// The stream for `a[i][k]` reads the `a` schedule rotated by `i`; the stream
/// for `b[k][j]` reads the `b` schedule rotated by `j + rotation`. Shifting
/// both operands by the same amount only reorders time, so `rotation` is the
/// one knob that changes the A/B pairing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SequenceConfig {
    pub a: SequenceKind,
    pub b: SequenceKind,
    pub rotation: usize,
}

impl Default for SequenceConfig {
    fn default() -> Self {
        SequenceConfig {
            a: SequenceKind::VanDerCorput,
            b: SequenceKind::SobolSecond,
            rotation: 0,
        }
    }
}

impl SequenceConfig {
    pub fn with_rotation(rotation: usize) -> Self {
        SequenceConfig {
            rotation,
            ..Default::default()
        }
    }
}

/// Packed stream, bit `t` of word `t / 64`.
type Packed = Vec<u64>;

fn pack(bits: &[bool]) -> Packed {
    bits.chunks(64)
        .map(|c| {
            c.iter()
                .enumerate()
                .fold(0u64, |w, (t, &b)| w | ((b as u64) << t))
        })
        .collect()
}

/// Non-streaming uGEMM with exact bipolar encoders. Every cycle each PE
/// `(i, j)` XNORs the N stream pairs `(a_ik, b_kj)` and an ideal adder tree
/// adds `Σ_k (2·bit − 1)` into the PE accumulator. After `2^w` cycles the
/// accumulator is scaled by `2^(w-2)` back to the integer product domain.
pub(super) fn run(
    a: &Matrix,
    b: &Matrix,
    config: &SequenceConfig,
    exec: Exec,
) -> Result<EngineResult> {
    let shape = check_conformable(a, b)?;
    let (m, n, p) = (shape.m, shape.n_common, shape.p);
    let width = a.width();
    let len = width.stream_len();
    let seq_a = config.a.build(width);
    let seq_b = config.b.build(width);

    let mut max_tr = 0;
    let mut a_streams = Vec::with_capacity(m * n);
    for i in 0..m {
        for k in 0..n {
            let s = encode_rate_bipolar_rotated(a.get(i, k) as i64, width, &seq_a, i % len)?;
            max_tr = max_tr.max(transition_count(s.bits()));
            a_streams.push(pack(s.bits()));
        }
    }
    let mut b_streams = Vec::with_capacity(n * p);
    for k in 0..n {
        for j in 0..p {
            let rot = (j + config.rotation) % len;
            let s = encode_rate_bipolar_rotated(b.get(k, j) as i64, width, &seq_b, rot)?;
            max_tr = max_tr.max(transition_count(s.bits()));
            b_streams.push(pack(s.bits()));
        }
    }

    let words = len.div_ceil(64);
    // Valid cycle lanes in each packed word.
    let lane_mask: Vec<u64> = (0..words)
        .map(|wi| {
            let lanes = (len - wi * 64).min(64);
            if lanes == 64 {
                u64::MAX
            } else {
                (1u64 << lanes) - 1
            }
        })
        .collect();
    let scale = 1i64 << (width.bits() - 2);

    let rows = exec.map_range(m, |i| {
        let mut acc = vec![0i64; p];
        // 64 cycles per word; popcount of the XNOR lanes is the adder-tree
        // output summed over those cycles.
        for (wi, &mask) in lane_mask.iter().enumerate() {
            let lanes = mask.count_ones() as i64;
            for k in 0..n {
                let aw = a_streams[i * n + k][wi];
                for (j, c) in acc.iter_mut().enumerate() {
                    let bw = b_streams[k * p + j][wi];
                    let agree = (!(aw ^ bw) & mask).count_ones() as i64;
                    *c += 2 * agree - lanes;
                }
            }
        }
        for c in &mut acc {
            *c *= scale;
        }
        RowOutcome {
            acc,
            busy: vec![len as u64],
            active: (len * p) as u64,
        }
    });

    Ok(assemble(Design::Ugemm, width, n, 1, p, rows, max_tr))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{exact_gemm, random_matrix};

    fn w(bits: u32) -> BitWidth {
        BitWidth::new(bits).unwrap()
    }

    /// Cycle-by-cycle reference with unpacked streams.
    fn bit_serial(a: &Matrix, b: &Matrix, cfg: &SequenceConfig) -> Vec<i64> {
        let width = a.width();
        let len = width.stream_len();
        let (sa, sb) = (cfg.a.build(width), cfg.b.build(width));
        let mut out = vec![0i64; a.rows() * b.cols()];
        for t in 0..len {
            for i in 0..a.rows() {
                for j in 0..b.cols() {
                    let mut tree = 0i64;
                    for k in 0..a.cols() {
                        let ta = (a.get(i, k) + width.max_magnitude() as i32) as u32;
                        let tb = (b.get(k, j) + width.max_magnitude() as i32) as u32;
                        let abit = sa.at(t, i % len) < ta;
                        let bbit = sb.at(t, (j + cfg.rotation) % len) < tb;
                        tree += if abit == bbit { 1 } else { -1 };
                    }
                    out[i * b.cols() + j] += tree;
                }
            }
        }
        out.iter().map(|v| v << (width.bits() - 2)).collect()
    }

    #[test]
    fn packed_matches_bit_serial() {
        for bits in [2, 4, 7, 8] {
            let a = random_matrix(3, 5, w(bits), bits as u64).unwrap();
            let b = random_matrix(5, 4, w(bits), 99).unwrap();
            for rotation in [0, 3] {
                let cfg = SequenceConfig::with_rotation(rotation);
                let r = run(&a, &b, &cfg, Exec::Sequential).unwrap();
                assert_eq!(r.result.data(), bit_serial(&a, &b, &cfg).as_slice());
            }
        }
    }

    #[test]
    fn cycles_are_two_to_the_w() {
        let a = random_matrix(16, 16, w(8), 1).unwrap();
        let b = random_matrix(16, 16, w(8), 2).unwrap();
        let r = run(&a, &b, &SequenceConfig::default(), Exec::default()).unwrap();
        assert_eq!(r.cycles, 256);
        assert_eq!(r.wc_cycles, 256);
    }

    #[test]
    fn degenerate_streams_are_exact() {
        for bits in 2..=8 {
            let width = w(bits);
            let a = Matrix::filled(1, 1, width, width.min_value()).unwrap();
            let r = run(&a, &a, &SequenceConfig::default(), Exec::Sequential).unwrap();
            assert_eq!(r.result.get(0, 0), 1i64 << (2 * bits - 2));
        }
    }

    #[test]
    fn unbiased_over_rotations() {
        // averaging every relative A/B phase pairs each A comparator value
        // with each B value once, so the mean estimate is exact
        let width = w(4);
        for seed in 0..5 {
            let a = random_matrix(4, 4, width, seed).unwrap();
            let b = random_matrix(4, 4, width, seed + 7).unwrap();
            let exact = exact_gemm(&a, &b).unwrap();
            let mut sum = [0i64; 16];
            for rot in 0..16 {
                let r = run(
                    &a,
                    &b,
                    &SequenceConfig::with_rotation(rot),
                    Exec::Sequential,
                )
                .unwrap();
                sum.iter_mut()
                    .zip(r.result.data())
                    .for_each(|(s, v)| *s += v);
            }
            for (s, e) in sum.iter().zip(exact.data()) {
                assert_eq!(*s, 16 * e);
            }
        }
    }
}
