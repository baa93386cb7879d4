// SPDX-License-Identifier: Apache-2.0

//! Cycle-level GEMM engines.
//!
//! All four designs use the outer-product dataflow: step `k` of the common
//! dimension broadcasts column `k` of A down the PE rows and row `k` of B
//! across the PE columns, and every PE `(i, j)` accumulates its share of
//! `a[i][k] * b[k][j]`. The designs differ in how an operand value is put
//! on the wire and therefore in how many clock cycles a step takes.
//!
//! Engines run to completion and report the full-precision result, the
//! consumed cycles, the worst-case bound for the configuration and wire
//! statistics. PE rows are simulated independently (in parallel when the
//! `parallel` feature is on); step lengths are array-wide, set by the
//! slowest PE.

mod bgemm;
mod tubgemm;
mod tugemm;
mod ugemm;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::exec::Exec;
use crate::numerics::{BitWidth, Matrix, ResultMatrix};

pub use ugemm::{SequenceConfig, SequenceKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Design {
    #[serde(rename = "uGEMM")]
    Ugemm,
    #[serde(rename = "tuGEMM")]
    TugemmSerial,
    #[serde(rename = "tubGEMM")]
    Tubgemm,
    #[serde(rename = "bGEMM")]
    Bgemm,
}

impl Design {
    /// Column order of the published tables.
    pub const ALL: [Design; 4] = [
        Design::Ugemm,
        Design::TugemmSerial,
        Design::Tubgemm,
        Design::Bgemm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Design::Ugemm => "uGEMM",
            Design::TugemmSerial => "tuGEMM",
            Design::Tubgemm => "tubGEMM",
            Design::Bgemm => "bGEMM",
        }
    }

    /// Temporal designs finish early on small magnitudes.
    pub fn is_temporal(self) -> bool {
        matches!(self, Design::TugemmSerial | Design::Tubgemm)
    }

    /// Whether the design computes `A·B` exactly.
    pub fn is_deterministic(self) -> bool {
        !matches!(self, Design::Ugemm)
    }
}

impl fmt::Display for Design {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Design {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ugemm" => Ok(Design::Ugemm),
            "tugemm" | "tugemm-serial" | "tugemm_serial" => Ok(Design::TugemmSerial),
            "tubgemm" => Ok(Design::Tubgemm),
            "bgemm" => Ok(Design::Bgemm),
            other => Err(format!(
                "unknown design `{other}` (expected ugemm, tugemm, tubgemm or bgemm)"
            )),
        }
    }
}

/// Worst-case cycles for one GEMM with common dimension `n_common`.
pub fn worst_case_cycles(design: Design, width: BitWidth, n_common: usize) -> u64 {
    let n = n_common as u64;
    let w = width.bits();
    match design {
        Design::Bgemm => n,
        Design::Ugemm => 1 << w,
        Design::TugemmSerial => n * (1u64 << (w - 1)).pow(2),
        Design::Tubgemm => n * (1u64 << (w - 2)),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EngineResult {
    pub design: Design,
    pub result: ResultMatrix,
    pub cycles: u64,
    pub wc_cycles: u64,
    /// Largest number of signal transitions seen on one operand wire while
    /// it carries one encoded value (a stream window for the unary designs,
    /// the whole feed for bGEMM bus lines).
    pub max_transitions_per_wire: usize,
    /// Cycles spent on each step of the common dimension (uGEMM: one step).
    pub step_cycles: Vec<u64>,
    /// Sum over PEs of cycles in which the PE's accumulator was enabled.
    pub active_pe_cycles: u64,
}

/// Which operand tubGEMM streams in temporal form; the other stays binary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StreamedOperand {
    #[default]
    Left,
    Right,
}

/// Engine front end carrying the execution strategy and design options.
#[derive(Debug, Clone, Default)]
pub struct Simulator {
    pub exec: Exec,
    pub sequences: SequenceConfig,
    pub streamed: StreamedOperand,
}

impl Simulator {
    pub fn new(exec: Exec) -> Self {
        Simulator {
            exec,
            ..Default::default()
        }
    }

    pub fn run(&self, design: Design, a: &Matrix, b: &Matrix) -> Result<EngineResult> {
        match design {
            Design::Bgemm => bgemm::run(a, b, self.exec),
            Design::Ugemm => ugemm::run(a, b, &self.sequences, self.exec),
            Design::TugemmSerial => tugemm::run(a, b, self.exec),
            Design::Tubgemm => match self.streamed {
                StreamedOperand::Left => tubgemm::run(a, b, self.exec),
                StreamedOperand::Right => {
                    // (A·B)ᵀ = Bᵀ·Aᵀ with Bᵀ streamed as the left operand.
                    let mut r = tubgemm::run(&b.transpose(), &a.transpose(), self.exec)?;
                    r.result = r.result.transpose();
                    Ok(r)
                }
            },
        }
    }
}

/// Binary baseline: one rank-1 outer-product update per cycle.
pub fn run_bgemm(a: &Matrix, b: &Matrix) -> Result<EngineResult> {
    bgemm::run(a, b, Exec::default())
}

/// Temporal-binary hybrid: `a` streamed in 2-unary form, `b` binary.
pub fn run_tubgemm(a: &Matrix, b: &Matrix) -> Result<EngineResult> {
    tubgemm::run(a, b, Exec::default())
}

/// Fully temporal serial design with nested counters.
pub fn run_tugemm_serial(a: &Matrix, b: &Matrix) -> Result<EngineResult> {
    tugemm::run(a, b, Exec::default())
}

/// Rate-coded bipolar design (non-streaming, exact encoders, ideal adder tree).
pub fn run_ugemm(a: &Matrix, b: &Matrix, sequences: &SequenceConfig) -> Result<EngineResult> {
    ugemm::run(a, b, sequences, Exec::default())
}

pub(crate) struct RowOutcome {
    acc: Vec<i64>,
    /// Per-step cycles this row kept its streams busy.
    busy: Vec<u64>,
    active: u64,
}

/// Combines per-row simulations: step length is the array-wide maximum.
pub(crate) fn assemble(
    design: Design,
    width: BitWidth,
    n_common: usize,
    steps: usize,
    p: usize,
    rows: Vec<RowOutcome>,
    max_transitions_per_wire: usize,
) -> EngineResult {
    let m = rows.len();
    let mut step_cycles = vec![0u64; steps];
    let mut data = Vec::with_capacity(m * p);
    let mut active_pe_cycles = 0;
    for row in rows {
        for (s, b) in step_cycles.iter_mut().zip(&row.busy) {
            *s = (*s).max(*b);
        }
        data.extend(row.acc);
        active_pe_cycles += row.active;
    }
    EngineResult {
        design,
        result: ResultMatrix::from_raw(m, p, data),
        cycles: step_cycles.iter().sum(),
        wc_cycles: worst_case_cycles(design, width, n_common),
        max_transitions_per_wire,
        step_cycles,
        active_pe_cycles,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{exact_gemm, random_matrix};

    fn w(bits: u32) -> BitWidth {
        BitWidth::new(bits).unwrap()
    }

    #[test]
    fn worst_case_formulas() {
        assert_eq!(worst_case_cycles(Design::TugemmSerial, w(8), 16), 262_144);
        assert_eq!(worst_case_cycles(Design::Tubgemm, w(8), 16), 1_024);
        assert_eq!(worst_case_cycles(Design::Ugemm, w(4), 64), 16);
        assert_eq!(worst_case_cycles(Design::Bgemm, w(4), 64), 64);
        assert_eq!(worst_case_cycles(Design::TugemmSerial, w(8), 32), 524_288);
        assert_eq!(worst_case_cycles(Design::Tubgemm, w(2), 16), 16);
    }

    #[test]
    fn design_names_parse() {
        for d in Design::ALL {
            assert_eq!(d.name().parse::<Design>().unwrap(), d);
        }
        assert!("xgemm".parse::<Design>().is_err());
    }

    #[test]
    fn tubgemm_right_streamed_is_exact() {
        let a = random_matrix(5, 7, w(6), 1).unwrap();
        let b = random_matrix(7, 3, w(6), 2).unwrap();
        let sim = Simulator {
            streamed: StreamedOperand::Right,
            ..Default::default()
        };
        let r = sim.run(Design::Tubgemm, &a, &b).unwrap();
        assert_eq!(r.result, exact_gemm(&a, &b).unwrap());
        let expected: u64 = (0..7)
            .map(|k| b.row_max_magnitude(k).div_ceil(2) as u64)
            .sum();
        assert_eq!(r.cycles, expected);
    }

    #[test]
    fn sequential_and_default_exec_agree() {
        let a = random_matrix(8, 8, w(5), 11).unwrap();
        let b = random_matrix(8, 8, w(5), 12).unwrap();
        for d in Design::ALL {
            let s = Simulator::new(Exec::Sequential).run(d, &a, &b).unwrap();
            let p = Simulator::new(Exec::default()).run(d, &a, &b).unwrap();
            assert_eq!(s, p, "{d}");
        }
    }
}
