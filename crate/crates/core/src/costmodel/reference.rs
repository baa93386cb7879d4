// SPDX-License-Identifier: Apache-2.0

//! Published energy and area-delay figures the cost model is checked
//! against. Each value keeps the number of decimals it was published with.

use crate::engines::Design;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Published {
    pub value: f64,
    pub decimals: u32,
}

const fn p(value: f64, decimals: u32) -> Published {
    Published { value, decimals }
}

/// Worst-case energy in nJ, indexed `[width][array][design]` with widths
/// 2/4/8, arrays 16/32 and designs in [`Design::ALL`] order.
pub const WORST_CASE_ENERGY_NJ: [[[Published; 4]; 2]; 3] = [
    [
        [p(0.42, 2), p(0.78, 2), p(0.20, 2), p(0.31, 2)],
        [p(3.24, 2), p(5.86, 2), p(1.58, 2), p(2.47, 2)],
    ],
    [
        [p(2.56, 2), p(23.55, 2), p(1.58, 2), p(0.90, 2)],
        [p(20.54, 2), p(190.46, 2), p(12.51, 2), p(7.06, 2)],
    ],
    [
        [p(64.51, 2), p(12_910.59, 2), p(66.82, 2), p(2.91, 2)],
        [p(502.02, 2), p(97_910.78, 2), p(465.41, 2), p(25.70, 2)],
    ],
];

pub const WORST_CASE_WIDTHS: [u32; 3] = [2, 4, 8];
pub const WORST_CASE_ARRAYS: [usize; 2] = [16, 32];

/// 4-bit energy in nJ for 64x64 and 128x128 arrays, designs in [`Design::ALL`] order.
pub const LARGE_ARRAY_ENERGY_NJ: [[Published; 4]; 2] = [
    [p(164.61, 2), p(1_490.12, 2), p(98.83, 2), p(79.48, 2)],
    [p(1_318.92, 2), p(11_863.65, 2), p(794.78, 2), p(894.34, 2)],
];

/// 4-bit area-delay product in mm²·ns for 64x64 and 128x128 arrays.
pub const LARGE_ARRAY_ADP_MM2_NS: [[Published; 4]; 2] = [
    [p(635.6, 1), p(4_710.4, 1), p(377.6, 1), p(174.4, 1)],
    [p(5_609.6, 1), p(37_478.4, 1), p(3_084.8, 1), p(2_124.8, 1)],
];

pub const LARGE_ARRAYS: [usize; 2] = [64, 128];
pub const LARGE_ARRAY_WIDTH: u32 = 4;

pub(crate) fn design_index(d: Design) -> usize {
    Design::ALL
        .iter()
        .position(|&x| x == d)
        .expect("design listed")
}
