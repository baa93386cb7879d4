// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::engines::Design;
use crate::error::{Error, Result};
use crate::numerics::BitWidth;

const EMBEDDED: &str = include_str!("../../data/calibration.json");

/// One post-synthesis measurement. Area is always stored in µm².
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationEntry {
    pub design: Design,
    pub width: BitWidth,
    pub array: usize,
    pub area_um2: f64,
    #[serde(rename = "power_mW")]
    pub power_mw: f64,
    #[serde(default)]
    pub source: String,
}

impl CalibrationEntry {
    pub fn area_mm2(&self) -> f64 {
        self.area_um2 * 1e-6
    }
}

#[derive(Debug, Deserialize, Serialize)]
struct CalibrationFile {
    #[serde(default = "default_version")]
    version: u32,
    clock_period_ns: f64,
    entries: Vec<CalibrationEntry>,
}

fn default_version() -> u32 {
    1
}

type Key = (Design, BitWidth, usize);

/// Area and power per (design, width, array size) plus the clock period.
/// Absent combinations stay absent; see [`CalibrationTable::lookup`] for the
/// opt-in estimate.
#[derive(Debug, Clone)]
pub struct CalibrationTable {
    version: u32,
    clock_period_ns: f64,
    entries: BTreeMap<Key, CalibrationEntry>,
}

/// A calibration entry, or an interpolated stand-in for a missing one.
#[derive(Debug, Clone, PartialEq)]
pub struct Lookup {
    pub entry: CalibrationEntry,
    pub estimated: bool,
}

impl CalibrationTable {
    pub fn embedded() -> Self {
        Self::from_json(EMBEDDED).expect("embedded calibration data is valid")
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: CalibrationFile =
            serde_json::from_str(text).map_err(|e| Error::InvalidCalibration(e.to_string()))?;
        if !(file.clock_period_ns.is_finite() && file.clock_period_ns > 0.0) {
            return Err(Error::InvalidCalibration(format!(
                "clock period {} ns must be positive",
                file.clock_period_ns
            )));
        }
        let mut entries = BTreeMap::new();
        for e in file.entries {
            let key = (e.design, e.width, e.array);
            let positive = |x: f64| x.is_finite() && x > 0.0;
            if e.array == 0 || !positive(e.area_um2) || !positive(e.power_mw) {
                return Err(Error::InvalidCalibration(format!(
                    "{} {} {}x{}: area and power must be positive",
                    e.design, e.width, e.array, e.array
                )));
            }
            if entries.insert(key, e).is_some() {
                return Err(Error::InvalidCalibration(format!(
                    "duplicate entry for {} {} {}x{}",
                    key.0, key.1, key.2, key.2
                )));
            }
        }
        Ok(CalibrationTable {
            version: file.version,
            clock_period_ns: file.clock_period_ns,
            entries,
        })
    }

    pub fn to_json(&self) -> String {
        let file = CalibrationFile {
            version: self.version,
            clock_period_ns: self.clock_period_ns,
            entries: self.entries.values().cloned().collect(),
        };
        serde_json::to_string_pretty(&file).expect("calibration serializes")
    }

    pub fn version(&self) -> u32 {
        self.version
    }

    pub fn clock_period_ns(&self) -> f64 {
        self.clock_period_ns
    }

    pub fn entries(&self) -> impl Iterator<Item = &CalibrationEntry> {
        self.entries.values()
    }

    pub fn get(&self, design: Design, width: BitWidth, array: usize) -> Result<&CalibrationEntry> {
        self.entries
            .get(&(design, width, array))
            .ok_or(Error::MissingCalibration {
                design,
                width: width.bits(),
                array,
            })
    }

    /// Exact entry if present. Otherwise, with `extrapolate`, area and power
    /// are interpolated log-linearly along the width axis from the two
    /// nearest calibrated widths of the same design and array size.
    pub fn lookup(
        &self,
        design: Design,
        width: BitWidth,
        array: usize,
        extrapolate: bool,
    ) -> Result<Lookup> {
        if let Ok(e) = self.get(design, width, array) {
            return Ok(Lookup {
                entry: e.clone(),
                estimated: false,
            });
        }
        let missing = Error::MissingCalibration {
            design,
            width: width.bits(),
            array,
        };
        if !extrapolate {
            return Err(missing);
        }
        let mut known: Vec<&CalibrationEntry> = self
            .entries
            .values()
            .filter(|e| e.design == design && e.array == array)
            .collect();
        if known.len() < 2 {
            return Err(missing);
        }
        let target = width.bits();
        // Bracketing pair when the target sits between calibrated widths,
        // otherwise the two nearest on one side.
        let lo = known
            .iter()
            .filter(|e| e.width.bits() < target)
            .max_by_key(|e| e.width);
        let hi = known
            .iter()
            .filter(|e| e.width.bits() > target)
            .min_by_key(|e| e.width);
        let (e0, e1) = match (lo, hi) {
            (Some(l), Some(h)) => (*l, *h),
            _ => {
                known.sort_by_key(|e| (e.width.bits().abs_diff(target), e.width));
                let mut pair = [known[0], known[1]];
                pair.sort_by_key(|e| e.width);
                (pair[0], pair[1])
            }
        };
        let target = target as f64;
        let (x0, x1) = (e0.width.bits() as f64, e1.width.bits() as f64);
        let t = (target - x0) / (x1 - x0);
        let interp = |y0: f64, y1: f64| (y0.ln() + t * (y1.ln() - y0.ln())).exp();
        Ok(Lookup {
            entry: CalibrationEntry {
                design,
                width,
                array,
                area_um2: interp(e0.area_um2, e1.area_um2),
                power_mw: interp(e0.power_mw, e1.power_mw),
                source: "ESTIMATE".to_string(),
            },
            estimated: true,
        })
    }
}
