// SPDX-License-Identifier: Apache-2.0

use super::{assemble, Design, EngineResult, RowOutcome};
use crate::encoding::{encode_two_unary, transition_count};
use crate::error::Result;
use crate::exec::Exec;
use crate::numerics::{check_conformable, Matrix};

/// `a` is streamed as 2-unary pulse trains (one line per PE row), `b` sits on
/// binary buses. Each pulse adds `±weight · b[k][j]` to PE `(i, j)`.
pub(super) fn run(a: &Matrix, b: &Matrix, exec: Exec) -> Result<EngineResult> {
    let shape = check_conformable(a, b)?;
    let (m, n, p) = (shape.m, shape.n_common, shape.p);
    let width = a.width();

    let schedules = a
        .data()
        .iter()
        .map(|&v| encode_two_unary(v as i64, width))
        .collect::<Result<Vec<_>>>()?;

    let rows = exec.map_range(m, |i| {
        let mut acc = vec![0i64; p];
        let mut busy = vec![0u64; n];
        let mut active = 0u64;
        for k in 0..n {
            let sched = &schedules[i * n + k];
            let sign = sched.sign().value();
            let b_row = b.row(k);
            let mut t = 0;
            loop {
                let weight = sched.weight_at(t) as i64;
                if weight == 0 {
                    break;
                }
                let addend = sign * weight;
                for (c, &bkj) in acc.iter_mut().zip(b_row) {
                    *c += addend * bkj as i64;
                }
                active += p as u64;
                t += 1;
            }
            busy[k] = t as u64;
        }
        RowOutcome { acc, busy, active }
    });

    let max_tr = schedules
        .iter()
        .map(|s| transition_count(&s.materialize(s.cycles())))
        .max()
        .unwrap_or(0);

    Ok(assemble(Design::Tubgemm, width, n, n, p, rows, max_tr))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{exact_gemm, random_matrix, BitWidth};

    #[test]
    fn worst_case_fixture() {
        let w8 = BitWidth::new(8).unwrap();
        let a = Matrix::filled(16, 16, w8, -128).unwrap();
        let b = random_matrix(16, 16, w8, 4).unwrap();
        let r = run(&a, &b, Exec::default()).unwrap();
        assert_eq!(r.cycles, 1024);
        assert_eq!(r.cycles, r.wc_cycles);
        assert_eq!(r.result, exact_gemm(&a, &b).unwrap());
    }

    #[test]
    fn zero_a_takes_no_cycles() {
        let w4 = BitWidth::new(4).unwrap();
        let a = Matrix::zeros(4, 4, w4).unwrap();
        let b = random_matrix(4, 4, w4, 4).unwrap();
        let r = run(&a, &b, Exec::Sequential).unwrap();
        assert_eq!(r.cycles, 0);
        assert!(r.result.data().iter().all(|&v| v == 0));
        assert_eq!(r.max_transitions_per_wire, 0);
    }

    #[test]
    fn random_16_w4() {
        let w4 = BitWidth::new(4).unwrap();
        for seed in 0..10 {
            let a = random_matrix(16, 16, w4, seed).unwrap();
            let b = random_matrix(16, 16, w4, seed + 100).unwrap();
            let r = run(&a, &b, Exec::default()).unwrap();
            assert_eq!(r.result, exact_gemm(&a, &b).unwrap());
            assert!(r.cycles <= 64);
            let expected: u64 = (0..16)
                .map(|k| a.column_max_magnitude(k).div_ceil(2) as u64)
                .sum();
            assert_eq!(r.cycles, expected);
            assert!(r.max_transitions_per_wire <= 2);
        }
    }
}
