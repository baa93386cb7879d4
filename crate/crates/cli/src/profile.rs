// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use unary_gemm::sparsity::{
    profile_bundle, ProfileOptions, SparsityReport, TensorBundle, TileSpec, Weighting,
};
use unary_gemm::BitWidth;

use crate::args::{parse_width, ExecArgs, OutputArgs};
use crate::output::{emit, Cell, Format, Table};
use crate::Status;

/// Layer name of the model-level summary rows.
pub const SUMMARY_LAYER: &str = "model";

#[derive(Debug, Args)]
pub struct ProfileArgs {
    /// Bundle directory holding manifest.json.
    pub bundle: PathBuf,
    /// Widths to profile at (repeat or comma-separate).
    #[arg(long, value_delimiter = ',', default_value = "8", value_parser = parse_width)]
    pub width: Vec<BitWidth>,
    /// auto, feature-map, block or block:RxC.
    #[arg(long, default_value = "auto")]
    pub tiles: TileSpec,
    /// MSB-truncate every layer to the profiled width.
    #[arg(long)]
    pub truncate: bool,
    /// Weight the model mean by layer element count.
    #[arg(long)]
    pub weighted: bool,
    #[command(flatten)]
    pub exec: ExecArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

fn flat_table(reports: &[SparsityReport]) -> Table {
    let mut t = Table::new(&[
        "layer",
        "role",
        "width",
        "word_sparsity",
        "bit_sparsity",
        "tiles",
    ]);
    for r in reports {
        for l in &r.layers {
            t.push(vec![
                Cell::text(&l.name),
                Cell::text(l.role.to_string()),
                Cell::uint(l.width.bits()),
                Cell::Float(l.word_sparsity, 6),
                Cell::Float(l.bit_sparsity, 6),
                Cell::text(format!("{}/{}", l.tiles, l.tile_count)),
            ]);
        }
        t.push(vec![
            Cell::text(SUMMARY_LAYER),
            Cell::Empty,
            Cell::uint(r.width.bits()),
            Cell::Float(r.word_sparsity, 6),
            Cell::Float(r.bit_sparsity, 6),
            Cell::Empty,
        ]);
    }
    t
}

/// One row per layer, percentages per width joined with ` / `.
fn layout_table(reports: &[SparsityReport]) -> Table {
    let widths: Vec<String> = reports.iter().map(|r| r.width.bits().to_string()).collect();
    let bits = widths.join("/");
    let mut t = Table::new(&[
        "layer".to_string(),
        format!("word (%) {bits} bits"),
        format!("bit (%) {bits} bits"),
    ]);
    let joined = |f: &dyn Fn(&SparsityReport) -> f64| {
        reports
            .iter()
            .map(|r| format!("{:.2}", 100.0 * f(r)))
            .collect::<Vec<_>>()
            .join(" / ")
    };
    let first = &reports[0];
    for (i, layer) in first.layers.iter().enumerate() {
        t.push(vec![
            Cell::text(&layer.name),
            Cell::text(joined(&|r| r.layers[i].word_sparsity)),
            Cell::text(joined(&|r| r.layers[i].bit_sparsity)),
        ]);
    }
    t.push(vec![
        Cell::text(SUMMARY_LAYER),
        Cell::text(joined(&|r| r.word_sparsity)),
        Cell::text(joined(&|r| r.bit_sparsity)),
    ]);
    t
}

pub fn profile(args: ProfileArgs) -> Result<Status> {
    let bundle = TensorBundle::open(&args.bundle)
        .with_context(|| format!("opening bundle {}", args.bundle.display()))?;
    let mut widths = args.width.clone();
    widths.sort();
    widths.dedup();
    let reports = widths
        .iter()
        .map(|&width| {
            let mut opts = ProfileOptions::new(width);
            opts.tiles = args.tiles;
            opts.truncate = args.truncate;
            opts.weighting = if args.weighted {
                Weighting::ByElements
            } else {
                Weighting::Unweighted
            };
            opts.exec = args.exec.exec();
            profile_bundle(&bundle, &opts)
        })
        .collect::<unary_gemm::Result<Vec<_>>>()?;
    let table = match args.out.format {
        Format::Markdown => layout_table(&reports),
        _ => flat_table(&reports),
    };
    emit(&table, args.out.format, args.out.output.as_deref())?;
    Ok(Status::Ok)
}
