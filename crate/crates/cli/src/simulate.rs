// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use unary_gemm::engines::StreamedOperand;
use unary_gemm::sparsity::{msb_truncate, TensorBundle};
use unary_gemm::sweep::{operands, run_sweep, simulate_operands, SimRow, SweepConfig};
use unary_gemm::{random_matrix, BitWidth, Design, GemmShape, Matrix, SequenceConfig, Simulator};

use crate::args::{
    b_spa_map, parse_b_spa, parse_design, parse_shape, parse_width, CalibrationArgs, ExecArgs,
    OutputArgs,
};
use crate::output::{emit, Cell, Table};
use crate::Status;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Streamed {
    Left,
    Right,
}

impl From<Streamed> for StreamedOperand {
    fn from(s: Streamed) -> Self {
        match s {
            Streamed::Left => StreamedOperand::Left,
            Streamed::Right => StreamedOperand::Right,
        }
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Designs to run (repeat or comma-separate).
    #[arg(long, required = true, value_delimiter = ',', value_parser = parse_design)]
    pub design: Vec<Design>,
    #[arg(long, value_delimiter = ',', default_value = "8", value_parser = parse_width)]
    pub width: Vec<BitWidth>,
    /// MxNxP (A is MxN, B is NxP), or N for a square GEMM.
    #[arg(long, default_value = "16x16x16", value_parser = parse_shape)]
    pub shape: GemmShape,
    /// A is drawn from this seed and B from seed + 1.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Take A from a bundle layer (viewed as shape[0] x rest) instead of random data.
    #[arg(long, requires = "layer", value_name = "DIR")]
    pub bundle: Option<PathBuf>,
    #[arg(long, requires = "bundle")]
    pub layer: Option<String>,
    /// MSB-truncate bundle data to each width.
    #[arg(long, requires = "bundle")]
    pub truncate: bool,
    /// Operand tubGEMM streams temporally.
    #[arg(long, value_enum, default_value = "left")]
    pub streamed: Streamed,
    /// uGEMM offset between the A and B comparator sequences.
    #[arg(long, default_value_t = 0)]
    pub rotation: usize,
    /// Add a wall-clock column (makes output run-dependent).
    #[arg(long)]
    pub timing: bool,
    #[command(flatten)]
    pub exec: ExecArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

const SIM_HEADER: [&str; 11] = [
    "design",
    "width",
    "m",
    "n_common",
    "p",
    "seed",
    "checksum",
    "cycles",
    "wc_cycles",
    "max_transitions",
    "rel_rms_error",
];

fn sim_cells(row: &SimRow) -> Vec<Cell> {
    vec![
        Cell::text(row.design.name()),
        Cell::uint(row.width.bits()),
        Cell::uint(row.shape.m),
        Cell::uint(row.shape.n_common),
        Cell::uint(row.shape.p),
        Cell::uint(row.seed),
        Cell::text(&row.checksum),
        Cell::uint(row.cycles),
        Cell::uint(row.wc_cycles),
        Cell::uint(row.max_transitions),
        Cell::Float(row.rel_rms_error, 6),
    ]
}

/// Layer data as a `width`-bit matrix.
fn layer_matrix(
    bundle: &TensorBundle,
    name: &str,
    width: BitWidth,
    truncate: bool,
) -> Result<Matrix> {
    let rec = bundle
        .manifest()
        .layers
        .iter()
        .find(|r| r.name == name)
        .with_context(|| format!("no layer {name:?} in bundle"))?;
    let mut tensor = bundle.read_layer(rec)?;
    if truncate {
        if tensor.dtype().bits() < width.bits() {
            bail!("layer {name:?}: cannot widen {} to {width}", tensor.dtype());
        }
        tensor = msb_truncate(&tensor, width)?;
    }
    let rows = tensor.shape()[0];
    let cols = tensor.len() / rows;
    Matrix::from_vec(rows, cols, width, tensor.data().to_vec())
        .with_context(|| format!("layer {name:?} at {width} (try --truncate)"))
}

pub fn simulate(args: SimulateArgs) -> Result<Status> {
    let sim = Simulator {
        exec: args.exec.exec(),
        sequences: SequenceConfig::with_rotation(args.rotation),
        streamed: args.streamed.into(),
    };
    let bundle = args.bundle.as_deref().map(TensorBundle::open).transpose()?;
    let mut designs = args.design.clone();
    designs.sort();
    designs.dedup();
    let mut widths = args.width.clone();
    widths.sort();
    widths.dedup();

    let mut header: Vec<&str> = SIM_HEADER.to_vec();
    if args.timing {
        header.push("wall_us");
    }
    let mut inputs = Vec::with_capacity(widths.len());
    for &width in &widths {
        inputs.push(match (&bundle, &args.layer) {
            (Some(bundle), Some(layer)) => {
                let a = layer_matrix(bundle, layer, width, args.truncate)?;
                let b = random_matrix(a.cols(), args.shape.p, width, args.seed.wrapping_add(1))?;
                (a, b)
            }
            _ => operands(args.shape, width, args.seed)?,
        });
    }
    let mut table = Table::new(&header);
    for &design in &designs {
        for (a, b) in &inputs {
            let start = Instant::now();
            let row = simulate_operands(&sim, None, design, a, b, args.seed, 0.0)?;
            let elapsed = start.elapsed();
            let mut cells = sim_cells(&row);
            if args.timing {
                cells.push(Cell::uint(elapsed.as_micros()));
            }
            table.push(cells);
        }
    }
    emit(&table, args.out.format, args.out.output.as_deref())?;
    Ok(Status::Ok)
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_delimiter = ',', value_parser = parse_design, default_value = "ugemm,tugemm,tubgemm,bgemm")]
    pub designs: Vec<Design>,
    #[arg(long, value_delimiter = ',', value_parser = parse_width, default_value = "2,4,8")]
    pub widths: Vec<BitWidth>,
    /// Square sizes; defaults to 16,32 when no --shape is given.
    #[arg(long, value_delimiter = ',')]
    pub sizes: Vec<usize>,
    /// Additional MxNxP shapes.
    #[arg(long = "shape", value_parser = parse_shape)]
    pub shapes: Vec<GemmShape>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Bit sparsity for the dynamic columns, per width (repeatable).
    #[arg(long = "b-spa", value_name = "W=VALUE", value_parser = parse_b_spa)]
    pub b_spa: Vec<(BitWidth, f64)>,
    #[command(flatten)]
    pub calibration: CalibrationArgs,
    #[command(flatten)]
    pub exec: ExecArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

const COST_COLUMNS: [&str; 10] = [
    "area_um2",
    "power_mW",
    "wc_latency_ns",
    "energy_nJ",
    "adp_mm2ns",
    "b_spa",
    "dyn_latency_ns",
    "dyn_energy_nJ",
    "measured_energy_nJ",
    "estimate",
];

pub fn sweep(args: SweepArgs) -> Result<Status> {
    let mut shapes: Vec<GemmShape> = args
        .sizes
        .iter()
        .map(|&n| GemmShape::square(n))
        .collect::<unary_gemm::Result<_>>()?;
    shapes.extend(&args.shapes);
    if shapes.is_empty() {
        shapes = vec![GemmShape::square(16)?, GemmShape::square(32)?];
    }
    let model = args.calibration.model()?;
    let mut config = SweepConfig::new(args.designs.clone(), args.widths.clone(), shapes);
    config.seed = args.seed;
    config.b_spa = b_spa_map(&args.b_spa);
    config.exec = args.exec.exec();
    let rows = run_sweep(&config, Some(&model))?;

    let header: Vec<&str> = SIM_HEADER
        .iter()
        .chain(COST_COLUMNS.iter())
        .copied()
        .collect();
    let mut table = Table::new(&header);
    for row in &rows {
        let mut cells = sim_cells(row);
        match &row.cost {
            Some(c) => cells.extend([
                Cell::Float(c.area_um2, 1),
                Cell::Float(c.power_mw, 2),
                Cell::Float(c.wc_latency_ns, 1),
                Cell::Float(c.energy_nj, 4),
                Cell::Float(c.adp_mm2_ns, 4),
                Cell::Float(c.b_spa, 4),
                Cell::Float(c.dynamic_latency_ns, 1),
                Cell::Float(c.dynamic_energy_nj, 4),
                Cell::opt_float(row.measured_energy_nj, 4),
                Cell::Bool(c.estimated),
            ]),
            None => cells.extend(std::iter::repeat_n(Cell::Empty, COST_COLUMNS.len())),
        }
        table.push(cells);
    }
    emit(&table, args.out.format, args.out.output.as_deref())?;
    Ok(Status::Ok)
}
