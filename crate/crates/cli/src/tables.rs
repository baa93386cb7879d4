// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use unary_gemm::costmodel::{
    CellCheck, CostModel, CostReport, Metric, COST_CSV_HEADER, REPRODUCTION_TOLERANCE,
};
use unary_gemm::{BitWidth, Design};

use crate::args::{b_spa_map, parse_b_spa, CalibrationArgs};
use crate::output::{write_file, Cell, Format, Table};
use crate::Status;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Figure {
    /// Area and power of every design at 32x32 across widths.
    Area32,
    /// Worst-case and sparsity-adjusted energy at 32x32; needs --b-spa for 2, 4 and 8.
    Energy32,
}

#[derive(Debug, Args)]
pub struct TablesArgs {
    /// Output directory.
    #[arg(long, env = "UNARY_GEMM_OUT", default_value = "report")]
    pub out: PathBuf,
    /// Compare after rounding computed values to the published decimals.
    #[arg(long)]
    pub at_published_precision: bool,
    /// Extra data series to write (repeatable).
    #[arg(long, value_enum)]
    pub figure: Vec<Figure>,
    /// Bit sparsity per width for the dynamic columns (repeatable).
    #[arg(long = "b-spa", value_name = "W=VALUE", value_parser = parse_b_spa)]
    pub b_spa: Vec<(BitWidth, f64)>,
    #[command(flatten)]
    pub calibration: CalibrationArgs,
}

const FIGURE_ARRAY: usize = 32;
const FIGURE_WIDTHS: [u32; 3] = [2, 4, 8];

fn check_table(checks: &[&CellCheck], with_metric: bool) -> Table {
    let mut header = vec![];
    if with_metric {
        header.push("metric");
    }
    header.extend([
        "design",
        "width",
        "array",
        "computed",
        "published",
        "rel_err",
        "rel_err_rounded",
        "within_tolerance",
    ]);
    let mut t = Table::new(&header);
    for c in checks {
        let mut row = vec![];
        if with_metric {
            row.push(Cell::text(c.metric.to_string()));
        }
        row.extend([
            Cell::text(c.design.name()),
            Cell::uint(c.width.bits()),
            Cell::uint(c.array),
            Cell::Float(c.computed, 6),
            Cell::Float(c.published, c.published_decimals as usize),
            Cell::Float(c.rel_err, 6),
            Cell::Float(c.rel_err_rounded, 6),
            Cell::Bool(c.within(REPRODUCTION_TOLERANCE)),
        ]);
        t.push(row);
    }
    t
}

/// One row per (width, array), one column per design: `computed (published)`.
fn layout_table(checks: &[&CellCheck]) -> Table {
    let mut header = vec!["configuration".to_string()];
    header.extend(Design::ALL.iter().map(|d| d.name().to_string()));
    let mut t = Table::new(&header);
    for chunk in checks.chunks(Design::ALL.len()) {
        let first = chunk[0];
        let mut row = vec![Cell::text(format!(
            "{} {}x{}",
            first.width, first.array, first.array
        ))];
        row.extend(chunk.iter().map(|c| {
            let d = c.published_decimals as usize;
            Cell::text(format!("{:.d$} ({:.d$})", c.computed, c.published))
        }));
        t.push(row);
    }
    t
}

fn cost_table(reports: &[CostReport]) -> Table {
    let mut t = Table::new(&COST_CSV_HEADER);
    for r in reports {
        t.push(r.csv_record().into_iter().map(Cell::Text).collect());
    }
    t
}

fn write_table(args: &TablesArgs, name: &str, table: &Table) -> Result<PathBuf> {
    let path = args.out.join(name);
    write_file(&path, |w| table.write(Format::Csv, w))?;
    Ok(path)
}

fn figure_series(model: &CostModel, figure: Figure, args: &TablesArgs) -> Result<Table> {
    let b_spa = b_spa_map(&args.b_spa);
    match figure {
        Figure::Area32 => {
            let mut t = Table::new(&["design", "width", "array", "area_um2", "power_mW"]);
            for design in Design::ALL {
                for bits in FIGURE_WIDTHS {
                    let e = model
                        .table()
                        .get(design, BitWidth::new(bits)?, FIGURE_ARRAY)?;
                    t.push(vec![
                        Cell::text(design.name()),
                        Cell::uint(bits),
                        Cell::uint(FIGURE_ARRAY),
                        Cell::Float(e.area_um2, 1),
                        Cell::Float(e.power_mw, 2),
                    ]);
                }
            }
            Ok(t)
        }
        Figure::Energy32 => {
            let missing: Vec<String> = FIGURE_WIDTHS
                .iter()
                .filter(|&&b| !b_spa.keys().any(|w| w.bits() == b))
                .map(|b| b.to_string())
                .collect();
            if !missing.is_empty() {
                bail!(
                    "--figure energy32 needs --b-spa for widths {}",
                    missing.join(", ")
                );
            }
            Ok(cost_table(
                &model.sparsity_energy_series(FIGURE_ARRAY, &b_spa)?,
            ))
        }
    }
}

pub fn report_tables(args: TablesArgs) -> Result<Status> {
    let model = args.calibration.model()?;
    let checks = model.reproduce_tables()?;
    // validate figure inputs before touching the output directory
    let figures = args
        .figure
        .iter()
        .map(|&f| Ok((f, figure_series(&model, f, &args)?)))
        .collect::<Result<Vec<_>>>()?;

    fs::create_dir_all(&args.out)
        .with_context(|| format!("cannot create {}", args.out.display()))?;
    let worst: Vec<&CellCheck> = checks
        .iter()
        .filter(|c| c.metric == Metric::WorstCaseEnergy)
        .collect();
    let energy: Vec<&CellCheck> = checks
        .iter()
        .filter(|c| c.metric == Metric::LargeArrayEnergy)
        .collect();
    let adp: Vec<&CellCheck> = checks
        .iter()
        .filter(|c| c.metric == Metric::LargeArrayAdp)
        .collect();
    let large: Vec<&CellCheck> = energy.iter().chain(&adp).copied().collect();

    let mut written = vec![
        write_table(&args, "table3.csv", &check_table(&worst, false))?,
        write_table(&args, "table4.csv", &check_table(&large, true))?,
    ];

    let b_spa = b_spa_map(&args.b_spa);
    let mut reports = Vec::new();
    for e in model.table().entries() {
        let spa = b_spa.get(&e.width).copied().unwrap_or(0.0);
        reports.push(model.report(e.design, e.width, e.array, spa)?);
    }
    written.push(write_table(&args, "costs.csv", &cost_table(&reports))?);

    let md = args.out.join("tables.md");
    write_file(&md, |w| {
        writeln!(w, "## Worst-case energy (nJ), computed (published)\n")?;
        layout_table(&worst).write(Format::Markdown, w)?;
        writeln!(w, "\n## 4-bit energy (nJ), computed (published)\n")?;
        layout_table(&energy).write(Format::Markdown, w)?;
        writeln!(w, "\n## 4-bit ADP (mm²·ns), computed (published)\n")?;
        layout_table(&adp).write(Format::Markdown, w)?;
        Ok(())
    })?;
    written.push(md);

    for (figure, table) in &figures {
        let name = match figure {
            Figure::Area32 => "figure_area32.csv",
            Figure::Energy32 => "figure_energy32.csv",
        };
        written.push(write_table(&args, name, table)?);
    }

    let err_of = |c: &CellCheck| {
        if args.at_published_precision {
            c.rel_err_rounded
        } else {
            c.rel_err
        }
    };
    let failing: Vec<&CellCheck> = checks
        .iter()
        .filter(|c| err_of(c) > REPRODUCTION_TOLERANCE)
        .collect();
    for p in &written {
        println!("wrote {}", p.display());
    }
    println!(
        "{} of {} cells within {}%{}",
        checks.len() - failing.len(),
        checks.len(),
        REPRODUCTION_TOLERANCE * 100.0,
        if args.at_published_precision {
            " (at published precision)"
        } else {
            ""
        }
    );
    match failing.first() {
        None => Ok(Status::Ok),
        Some(c) => {
            for c in &failing {
                eprintln!(
                    "deviation: {}: computed {:.6}, published {}, rel_err {:.4}%",
                    c.label(),
                    c.computed,
                    c.published,
                    err_of(c) * 100.0
                );
            }
            eprintln!("first failing cell: {}", c.label());
            Ok(Status::Deviation)
        }
    }
}
