// SPDX-License-Identifier: Apache-2.0

//! Cycle-level simulation and cost modelling of low-precision GEMM units:
//! a binary baseline (bGEMM), a rate-coded unary design (uGEMM), a fully
//! temporal design (tuGEMM) and a temporal-binary hybrid (tubGEMM), plus a
//! weight-sparsity profiler that feeds the temporal designs' dynamic latency.

pub mod costmodel;
pub mod encoding;
pub mod engines;
pub mod error;
pub mod exec;
pub mod numerics;
pub mod sparsity;
pub mod sweep;

pub use engines::{
    run_bgemm, run_tubgemm, run_tugemm_serial, run_ugemm, worst_case_cycles, Design, EngineResult,
    SequenceConfig, Simulator,
};
pub use error::{Error, Result};
pub use exec::Exec;
pub use numerics::{exact_gemm, random_matrix, BitWidth, GemmShape, Matrix, ResultMatrix};
