// SPDX-License-Identifier: Apache-2.0

use super::{assemble, Design, EngineResult, RowOutcome};
use crate::encoding::transition_count;
use crate::error::Result;
use crate::exec::Exec;
use crate::numerics::{check_conformable, Matrix};

pub(super) fn run(a: &Matrix, b: &Matrix, exec: Exec) -> Result<EngineResult> {
    let shape = check_conformable(a, b)?;
    let (m, n, p) = (shape.m, shape.n_common, shape.p);

    let rows = exec.map_range(m, |i| {
        let mut acc = vec![0i64; p];
        // cycle k: rank-1 update with column k of A and row k of B
        for k in 0..n {
            let aik = a.get(i, k) as i64;
            for (c, &bkj) in acc.iter_mut().zip(b.row(k)) {
                *c += aik * bkj as i64;
            }
        }
        RowOutcome {
            acc,
            busy: vec![1; n],
            active: (n * p) as u64,
        }
    });

    let width = a.width();
    let a_lines = (0..m).map(|i| bus_transitions(a.row(i).iter().copied(), width.bits()));
    let b_lines = (0..p).map(|j| bus_transitions((0..n).map(|k| b.get(k, j)), width.bits()));
    let max_tr = a_lines.chain(b_lines).max().unwrap_or(0);

    Ok(assemble(Design::Bgemm, width, n, n, p, rows, max_tr))
}

/// Worst bit line of a `bits`-wide two's complement bus fed `values`, one per cycle.
fn bus_transitions(values: impl Iterator<Item = i32> + Clone, bits: u32) -> usize {
    (0..bits)
        .map(|bit| {
            let line: Vec<bool> = values.clone().map(|v| (v >> bit) & 1 == 1).collect();
            transition_count(&line)
        })
        .max()
        .unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{exact_gemm, random_matrix, BitWidth};

    #[test]
    fn takes_n_cycles() {
        let w8 = BitWidth::new(8).unwrap();
        let a = random_matrix(16, 16, w8, 1).unwrap();
        let b = random_matrix(16, 16, w8, 2).unwrap();
        let r = run(&a, &b, Exec::default()).unwrap();
        assert_eq!(r.cycles, 16);
        assert_eq!(r.wc_cycles, 16);
        assert_eq!(r.result, exact_gemm(&a, &b).unwrap());
    }

    #[test]
    fn identity_passthrough() {
        let w4 = BitWidth::new(4).unwrap();
        let b = random_matrix(8, 8, w4, 5).unwrap();
        let r = run(&Matrix::identity(8, w4).unwrap(), &b, Exec::Sequential).unwrap();
        assert_eq!(
            r.result.data(),
            b.data().iter().map(|&v| v as i64).collect::<Vec<_>>()
        );
    }

    #[test]
    fn bus_lines_toggle() {
        // alternating 0 / -1 toggles every bit line every cycle
        assert_eq!(bus_transitions([0, -1, 0, -1].into_iter(), 4), 4);
    }
}
