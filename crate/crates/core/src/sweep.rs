// SPDX-License-Identifier: Apache-2.0

//! Grid runs over designs × widths × shapes: simulate each point on seeded
//! random operands, check it against the exact product and attach the cost
//! model figures when the configuration is calibrated.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::costmodel::{energy_from_power, CostModel, CostReport};
use crate::engines::{Design, Simulator};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::numerics::{exact_gemm, random_matrix, relative_rms_error, BitWidth, GemmShape, Matrix};

/// Operands of one grid point: A from `seed`, B from `seed + 1`.
pub fn operands(shape: GemmShape, width: BitWidth, seed: u64) -> Result<(Matrix, Matrix)> {
    Ok((
        random_matrix(shape.m, shape.n_common, width, seed)?,
        random_matrix(shape.n_common, shape.p, width, seed.wrapping_add(1))?,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimRow {
    pub design: Design,
    pub width: BitWidth,
    pub shape: GemmShape,
    pub seed: u64,
    pub checksum: String,
    pub cycles: u64,
    pub wc_cycles: u64,
    pub max_transitions: usize,
    /// Relative RMS error against the exact product (zero for exact designs).
    pub rel_rms_error: f64,
    /// Present for square shapes with calibration data.
    pub cost: Option<CostReport>,
    /// Energy at the simulated (not worst-case) cycle count.
    pub measured_energy_nj: Option<f64>,
}

/// Simulates one point. Deterministic designs must reproduce the exact product.
pub fn simulate_point(
    sim: &Simulator,
    model: Option<&CostModel>,
    design: Design,
    width: BitWidth,
    shape: GemmShape,
    seed: u64,
    b_spa: f64,
) -> Result<SimRow> {
    let (a, b) = operands(shape, width, seed)?;
    simulate_operands(sim, model, design, &a, &b, seed, b_spa)
}

/// Like [`simulate_point`] on caller-supplied operands; `seed` only labels the row.
pub fn simulate_operands(
    sim: &Simulator,
    model: Option<&CostModel>,
    design: Design,
    a: &Matrix,
    b: &Matrix,
    seed: u64,
    b_spa: f64,
) -> Result<SimRow> {
    let shape = GemmShape::new(a.rows(), a.cols(), b.cols())?;
    let width = a.width();
    let r = sim.run(design, a, b)?;
    let exact = exact_gemm(a, b)?;
    if design.is_deterministic() && r.result != exact {
        return Err(Error::OracleMismatch {
            design,
            shape,
            width: width.bits(),
            seed,
        });
    }
    let square = shape.m == shape.n_common && shape.n_common == shape.p;
    let cost = match model {
        Some(m) if square => match m.report(design, width, shape.n_common, b_spa) {
            Ok(c) => Some(c),
            Err(Error::MissingCalibration { .. }) => None,
            Err(e) => return Err(e),
        },
        _ => None,
    };
    let measured_energy_nj = match (model, &cost) {
        (Some(m), Some(c)) => Some(energy_from_power(c.power_mw, m.cycles_to_ns(r.cycles))),
        _ => None,
    };
    Ok(SimRow {
        design,
        width,
        shape,
        seed,
        checksum: r.result.checksum(),
        cycles: r.cycles,
        wc_cycles: r.wc_cycles,
        max_transitions: r.max_transitions_per_wire,
        rel_rms_error: relative_rms_error(&r.result, &exact),
        cost,
        measured_energy_nj,
    })
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub designs: Vec<Design>,
    pub widths: Vec<BitWidth>,
    pub shapes: Vec<GemmShape>,
    pub seed: u64,
    /// Bit sparsity per width for the dynamic-latency columns; absent widths use 0.
    pub b_spa: BTreeMap<BitWidth, f64>,
    /// Strategy for the grid points; each point's engine runs sequentially.
    pub exec: Exec,
    pub simulator: Simulator,
}

impl SweepConfig {
    pub fn new(designs: Vec<Design>, widths: Vec<BitWidth>, shapes: Vec<GemmShape>) -> Self {
        SweepConfig {
            designs,
            widths,
            shapes,
            seed: 1,
            b_spa: BTreeMap::new(),
            exec: Exec::default(),
            simulator: Simulator::new(Exec::Sequential),
        }
    }

    /// Grid points in output order: design, then width, then shape.
    pub fn points(&self) -> Vec<(Design, BitWidth, GemmShape)> {
        let mut designs = self.designs.clone();
        designs.sort();
        designs.dedup();
        let mut widths = self.widths.clone();
        widths.sort();
        widths.dedup();
        let mut pts = Vec::new();
        for &d in &designs {
            for &w in &widths {
                for &s in &self.shapes {
                    pts.push((d, w, s));
                }
            }
        }
        pts
    }
}

pub fn run_sweep(config: &SweepConfig, model: Option<&CostModel>) -> Result<Vec<SimRow>> {
    let points = config.points();
    config
        .exec
        .map(&points, |&(design, width, shape)| {
            let b_spa = config.b_spa.get(&width).copied().unwrap_or(0.0);
            simulate_point(
                &config.simulator,
                model,
                design,
                width,
                shape,
                config.seed,
                b_spa,
            )
        })
        .into_iter()
        .collect()
}
