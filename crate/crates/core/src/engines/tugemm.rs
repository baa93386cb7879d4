// SPDX-License-Identifier: Apache-2.0

use super::{assemble, Design, EngineResult, RowOutcome};
use crate::encoding::{encode_temporal, transition_count};
use crate::error::Result;
use crate::exec::Exec;
use crate::numerics::{check_conformable, Matrix};

/// Serial tuGEMM. Per step `k` an outer counter `p` walks the A pulse trains
/// and, for every `p`, an inner counter `q` replays the B pulse trains. The
/// schedule is shared by the whole array; PE `(i, j)` counts
/// `sign(a_ik)·sign(b_kj)` whenever both of its input lines are high.
pub(super) fn run(a: &Matrix, b: &Matrix, exec: Exec) -> Result<EngineResult> {
    let shape = check_conformable(a, b)?;
    let (m, n, p) = (shape.m, shape.n_common, shape.p);
    let width = a.width();

    let b_streams = b
        .data()
        .iter()
        .map(|&v| encode_temporal(v as i64, width))
        .collect::<Result<Vec<_>>>()?;
    // The inner replay lasts until every B line of the step has dropped.
    let replay_len: Vec<u32> = (0..n)
        .map(|k| {
            b_streams[k * p..(k + 1) * p]
                .iter()
                .map(|s| s.magnitude())
                .max()
                .unwrap_or(0)
        })
        .collect();

    let rows = exec.map_range(m, |i| -> Result<RowOutcome> {
        let mut acc = vec![0i64; p];
        let mut busy = vec![0u64; n];
        let mut active = 0u64;
        for k in 0..n {
            let a_stream = encode_temporal(a.get(i, k) as i64, width)?;
            let a_sign = a_stream.sign().value();
            let b_row = &b_streams[k * p..(k + 1) * p];
            let mut p_count = 0u32;
            // outer counter runs while this row's A line is high
            while p_count < a_stream.magnitude() {
                for q in 0..replay_len[k] {
                    for (c, bs) in acc.iter_mut().zip(b_row) {
                        if q < bs.magnitude() {
                            *c += a_sign * bs.sign().value();
                            active += 1;
                        }
                    }
                }
                p_count += 1;
            }
            busy[k] = p_count as u64 * replay_len[k] as u64;
        }
        Ok(RowOutcome { acc, busy, active })
    });
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;

    let max_tr = a
        .data()
        .iter()
        .map(|&v| encode_temporal(v as i64, width))
        .chain(b_streams.iter().copied().map(Ok))
        .map(|s| s.map(|s| transition_count(&s.materialize())))
        .try_fold(0, |m, t| t.map(|t| m.max(t)))?;

    Ok(assemble(Design::TugemmSerial, width, n, n, p, rows, max_tr))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{exact_gemm, random_matrix, BitWidth};

    #[test]
    fn worst_case_fixture() {
        let w8 = BitWidth::new(8).unwrap();
        let a = Matrix::filled(16, 16, w8, -128).unwrap();
        let b = Matrix::filled(16, 16, w8, -128).unwrap();
        let r = run(&a, &b, Exec::default()).unwrap();
        assert_eq!(r.cycles, 262_144);
        assert_eq!(r.cycles, r.wc_cycles);
        assert_eq!(r.result, exact_gemm(&a, &b).unwrap());
    }

    #[test]
    fn zero_operand_takes_no_cycles() {
        let w4 = BitWidth::new(4).unwrap();
        let z = Matrix::zeros(4, 4, w4).unwrap();
        let r = random_matrix(4, 4, w4, 9).unwrap();
        assert_eq!(run(&z, &r, Exec::Sequential).unwrap().cycles, 0);
        assert_eq!(run(&r, &z, Exec::Sequential).unwrap().cycles, 0);
    }

    #[test]
    fn random_8x8_w2() {
        let w2 = BitWidth::new(2).unwrap();
        for seed in 0..20 {
            let a = random_matrix(8, 8, w2, seed).unwrap();
            let b = random_matrix(8, 8, w2, seed + 50).unwrap();
            let r = run(&a, &b, Exec::default()).unwrap();
            assert_eq!(r.result, exact_gemm(&a, &b).unwrap());
            assert!(r.max_transitions_per_wire <= 2);
        }
    }
}
