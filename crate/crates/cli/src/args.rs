// SPDX-License-Identifier: Apache-2.0

//! Argument types shared by several subcommands.

use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use unary_gemm::costmodel::{CalibrationTable, CostModel};
use unary_gemm::{BitWidth, Design, Exec, GemmShape};

use crate::output::Format;

pub fn parse_design(s: &str) -> Result<Design, String> {
    s.parse()
}

pub fn parse_width(s: &str) -> Result<BitWidth, String> {
    let bits: u32 = s
        .trim()
        .parse()
        .map_err(|_| format!("not a bit width: {s:?}"))?;
    BitWidth::new(bits).map_err(|e| e.to_string())
}

/// `MxNxP`, or a single `N` for a square shape.
pub fn parse_shape(s: &str) -> Result<GemmShape, String> {
    let dims: Vec<usize> = s
        .split('x')
        .map(|d| d.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|_| format!("shape must be MxNxP or N, got {s:?}"))?;
    let shape = match dims[..] {
        [n] => GemmShape::square(n),
        [m, n, p] => GemmShape::new(m, n, p),
        _ => return Err(format!("shape must be MxNxP or N, got {s:?}")),
    };
    shape.map_err(|e| e.to_string())
}

/// `W=VALUE`, bit sparsity for one width.
pub fn parse_b_spa(s: &str) -> Result<(BitWidth, f64), String> {
    let (w, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected WIDTH=VALUE, got {s:?}"))?;
    let width = parse_width(w)?;
    let value: f64 = v
        .trim()
        .parse()
        .map_err(|_| format!("not a number: {v:?}"))?;
    if !(0.0..=1.0).contains(&value) {
        return Err(format!("bit sparsity must lie in [0, 1], got {value}"));
    }
    Ok((width, value))
}

/// Later entries for the same width win.
pub fn b_spa_map(pairs: &[(BitWidth, f64)]) -> BTreeMap<BitWidth, f64> {
    pairs.iter().copied().collect()
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CalibrationArgs {
    /// Calibration file to use instead of the embedded one.
    #[arg(long, value_name = "PATH")]
    pub calibration: Option<PathBuf>,
    /// Estimate uncalibrated widths by log-linear interpolation (labelled ESTIMATE).
    #[arg(long)]
    pub extrapolate: bool,
}

impl CalibrationArgs {
    pub fn table(&self) -> Result<CalibrationTable> {
        match &self.calibration {
            Some(p) => CalibrationTable::from_path(p)
                .with_context(|| format!("loading calibration {}", p.display())),
            None => Ok(CalibrationTable::embedded()),
        }
    }

    pub fn model(&self) -> Result<CostModel> {
        Ok(CostModel::new(self.table()?).with_extrapolation(self.extrapolate))
    }
}

#[derive(Debug, Args)]
pub struct ExecArgs {
    /// Run on one thread even when parallel execution is available.
    #[arg(long)]
    pub serial: bool,
}

impl ExecArgs {
    pub fn exec(&self) -> Exec {
        if self.serial {
            Exec::Sequential
        } else {
            Exec::default()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes() {
        assert_eq!(parse_shape("16").unwrap(), GemmShape::square(16).unwrap());
        assert_eq!(
            parse_shape("2x3x4").unwrap(),
            GemmShape::new(2, 3, 4).unwrap()
        );
        assert!(parse_shape("2x3").is_err());
        assert!(parse_shape("0x3x4").is_err());
        assert!(parse_shape("ax3x4").is_err());
    }

    #[test]
    fn b_spa_pairs() {
        let (w, v) = parse_b_spa("8=0.45").unwrap();
        assert_eq!((w.bits(), v), (8, 0.45));
        assert!(parse_b_spa("8=1.5").is_err());
        assert!(parse_b_spa("9=0.1").is_err());
        assert!(parse_b_spa("0.1").is_err());
        let m = b_spa_map(&[(w, 0.1), (w, 0.2)]);
        assert_eq!(m[&w], 0.2);
    }

    #[test]
    fn widths_and_designs() {
        assert!(parse_width("1").is_err());
        assert_eq!(parse_width("4").unwrap().bits(), 4);
        assert_eq!(parse_design("tubgemm").unwrap(), Design::Tubgemm);
        assert!(parse_design("xgemm").is_err());
    }
}
