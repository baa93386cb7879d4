// SPDX-License-Identifier: Apache-2.0

//! Analytical PPA model: worst-case latency from the cycle formulas and the
//! clock period, energy as power × latency, area-delay product, and the
//! sparsity-adjusted dynamic latency of the temporal designs.
//!
//! Units: area µm² (mm² for ADP), power mW, time ns, energy nJ.
//! `mW · ns = pJ`, so energy in nJ is `power · latency · 1e-3`.

mod calibration;
pub mod reference;

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

pub use crate::engines::Design;
pub use calibration::{CalibrationEntry, CalibrationTable, Lookup};

use crate::engines::worst_case_cycles;
use crate::error::{Error, Result};
use crate::numerics::BitWidth;
use reference::{design_index, Published};

/// Relative error allowed between a computed and a published cell.
pub const REPRODUCTION_TOLERANCE: f64 = 0.005;

/// Column order of cost CSV reports.
pub const COST_CSV_HEADER: [&str; 12] = [
    "design",
    "width",
    "array",
    "area_um2",
    "power_mW",
    "wc_cycles",
    "wc_latency_ns",
    "energy_nJ",
    "adp_mm2ns",
    "b_spa",
    "dyn_latency_ns",
    "dyn_energy_nJ",
];

pub fn energy_from_power(power_mw: f64, latency_ns: f64) -> f64 {
    power_mw * latency_ns * 1e-3
}

/// `wc_latency · (1 − b_spa)`.
pub fn dynamic_latency(wc_latency: f64, b_spa: f64) -> Result<f64> {
    check_sparsity(b_spa)?;
    Ok(wc_latency * (1.0 - b_spa))
}

/// Dynamic latency for `design`: only temporal designs benefit from sparsity.
pub fn design_dynamic_latency(design: Design, wc_latency: f64, b_spa: f64) -> Result<f64> {
    check_sparsity(b_spa)?;
    if design.is_temporal() {
        dynamic_latency(wc_latency, b_spa)
    } else {
        Ok(wc_latency)
    }
}

fn check_sparsity(b_spa: f64) -> Result<()> {
    if (0.0..=1.0).contains(&b_spa) {
        Ok(())
    } else {
        Err(Error::InvalidSparsity(b_spa))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostReport {
    pub design: Design,
    pub width: BitWidth,
    pub array: usize,
    pub area_um2: f64,
    pub power_mw: f64,
    pub wc_cycles: u64,
    pub wc_latency_ns: f64,
    pub energy_nj: f64,
    pub adp_mm2_ns: f64,
    pub b_spa: f64,
    pub dynamic_latency_ns: f64,
    pub dynamic_energy_nj: f64,
    /// Calibration was interpolated rather than measured.
    pub estimated: bool,
}

impl CostReport {
    pub fn csv_record(&self) -> [String; 12] {
        let design = if self.estimated {
            format!("{} (ESTIMATE)", self.design)
        } else {
            self.design.to_string()
        };
        [
            design,
            self.width.bits().to_string(),
            self.array.to_string(),
            format!("{:.1}", self.area_um2),
            format!("{:.2}", self.power_mw),
            self.wc_cycles.to_string(),
            format!("{:.1}", self.wc_latency_ns),
            format!("{:.4}", self.energy_nj),
            format!("{:.4}", self.adp_mm2_ns),
            format!("{:.4}", self.b_spa),
            format!("{:.1}", self.dynamic_latency_ns),
            format!("{:.4}", self.dynamic_energy_nj),
        ]
    }
}

#[derive(Debug, Clone)]
pub struct CostModel {
    table: CalibrationTable,
    extrapolate: bool,
}

impl Default for CostModel {
    fn default() -> Self {
        CostModel::new(CalibrationTable::embedded())
    }
}

impl CostModel {
    pub fn new(table: CalibrationTable) -> Self {
        CostModel {
            table,
            extrapolate: false,
        }
    }

    /// Allow log-linear estimates for widths without calibration data.
    pub fn with_extrapolation(mut self, extrapolate: bool) -> Self {
        self.extrapolate = extrapolate;
        self
    }

    pub fn table(&self) -> &CalibrationTable {
        &self.table
    }

    fn lookup(&self, design: Design, width: BitWidth, array: usize) -> Result<Lookup> {
        self.table.lookup(design, width, array, self.extrapolate)
    }

    /// Worst-case cycles × clock period for a square `array × array` GEMM.
    pub fn wc_latency_ns(&self, design: Design, width: BitWidth, array: usize) -> Result<f64> {
        if array == 0 {
            return Err(Error::EmptyMatrix {
                rows: array,
                cols: array,
            });
        }
        Ok(worst_case_cycles(design, width, array) as f64 * self.table.clock_period_ns())
    }

    pub fn cycles_to_ns(&self, cycles: u64) -> f64 {
        cycles as f64 * self.table.clock_period_ns()
    }

    pub fn energy_nj(
        &self,
        design: Design,
        width: BitWidth,
        array: usize,
        latency_ns: f64,
    ) -> Result<f64> {
        let l = self.lookup(design, width, array)?;
        Ok(energy_from_power(l.entry.power_mw, latency_ns))
    }

    /// Area (mm²) × worst-case latency (ns).
    pub fn adp(&self, design: Design, width: BitWidth, array: usize) -> Result<f64> {
        let l = self.lookup(design, width, array)?;
        Ok(l.entry.area_mm2() * self.wc_latency_ns(design, width, array)?)
    }

    pub fn report(
        &self,
        design: Design,
        width: BitWidth,
        array: usize,
        b_spa: f64,
    ) -> Result<CostReport> {
        let l = self.lookup(design, width, array)?;
        let wc_cycles = worst_case_cycles(design, width, array);
        let wc_latency_ns = self.wc_latency_ns(design, width, array)?;
        let dynamic_latency_ns = design_dynamic_latency(design, wc_latency_ns, b_spa)?;
        Ok(CostReport {
            design,
            width,
            array,
            area_um2: l.entry.area_um2,
            power_mw: l.entry.power_mw,
            wc_cycles,
            wc_latency_ns,
            energy_nj: energy_from_power(l.entry.power_mw, wc_latency_ns),
            adp_mm2_ns: l.entry.area_mm2() * wc_latency_ns,
            b_spa,
            dynamic_latency_ns,
            dynamic_energy_nj: energy_from_power(l.entry.power_mw, dynamic_latency_ns),
            estimated: l.estimated,
        })
    }

    /// Worst-case and sparsity-adjusted energy of every design at one array
    /// size, for each width in `b_spa` (width → bit sparsity).
    pub fn sparsity_energy_series(
        &self,
        array: usize,
        b_spa: &BTreeMap<BitWidth, f64>,
    ) -> Result<Vec<CostReport>> {
        let mut rows = Vec::new();
        for (&width, &spa) in b_spa {
            for design in Design::ALL {
                rows.push(self.report(design, width, array, spa)?);
            }
        }
        Ok(rows)
    }

    /// Recomputes every published energy and ADP cell.
    pub fn reproduce_tables(&self) -> Result<Vec<CellCheck>> {
        let mut out = Vec::new();
        for (wi, &bits) in reference::WORST_CASE_WIDTHS.iter().enumerate() {
            let width = BitWidth::new(bits)?;
            for (ai, &array) in reference::WORST_CASE_ARRAYS.iter().enumerate() {
                for design in Design::ALL {
                    let latency = self.wc_latency_ns(design, width, array)?;
                    let computed =
                        energy_from_power(self.table.get(design, width, array)?.power_mw, latency);
                    let published = reference::WORST_CASE_ENERGY_NJ[wi][ai][design_index(design)];
                    out.push(CellCheck::new(
                        Metric::WorstCaseEnergy,
                        design,
                        width,
                        array,
                        computed,
                        published,
                    ));
                }
            }
        }
        let width = BitWidth::new(reference::LARGE_ARRAY_WIDTH)?;
        for (metric, cells) in [
            (Metric::LargeArrayEnergy, &reference::LARGE_ARRAY_ENERGY_NJ),
            (Metric::LargeArrayAdp, &reference::LARGE_ARRAY_ADP_MM2_NS),
        ] {
            for (ai, &array) in reference::LARGE_ARRAYS.iter().enumerate() {
                for design in Design::ALL {
                    let entry = self.table.get(design, width, array)?;
                    let latency = self.wc_latency_ns(design, width, array)?;
                    let computed = match metric {
                        Metric::LargeArrayAdp => entry.area_mm2() * latency,
                        _ => energy_from_power(entry.power_mw, latency),
                    };
                    out.push(CellCheck::new(
                        metric,
                        design,
                        width,
                        array,
                        computed,
                        cells[ai][design_index(design)],
                    ));
                }
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Metric {
    /// nJ, widths 2/4/8, arrays 16/32.
    WorstCaseEnergy,
    /// nJ, 4-bit, arrays 64/128.
    LargeArrayEnergy,
    /// mm²·ns, 4-bit, arrays 64/128.
    LargeArrayAdp,
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::WorstCaseEnergy => "wc_energy_nJ",
            Metric::LargeArrayEnergy => "energy_nJ",
            Metric::LargeArrayAdp => "adp_mm2ns",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellCheck {
    pub metric: Metric,
    pub design: Design,
    pub width: BitWidth,
    pub array: usize,
    pub computed: f64,
    pub published: f64,
    pub published_decimals: u32,
    /// `|computed − published| / published`.
    pub rel_err: f64,
    /// Same, after rounding `computed` to the published number of decimals.
    pub rel_err_rounded: f64,
}

impl CellCheck {
    fn new(
        metric: Metric,
        design: Design,
        width: BitWidth,
        array: usize,
        computed: f64,
        published: Published,
    ) -> Self {
        let scale = 10f64.powi(published.decimals as i32);
        let rounded = (computed * scale).round() / scale;
        CellCheck {
            metric,
            design,
            width,
            array,
            computed,
            published: published.value,
            published_decimals: published.decimals,
            rel_err: (computed - published.value).abs() / published.value,
            rel_err_rounded: (rounded - published.value).abs() / published.value,
        }
    }

    pub fn label(&self) -> String {
        format!(
            "{} {} {}x{} {}",
            self.design, self.width, self.array, self.array, self.metric
        )
    }

    pub fn within(&self, tolerance: f64) -> bool {
        self.rel_err <= tolerance
    }
}
