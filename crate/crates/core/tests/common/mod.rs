#![allow(dead_code)]

pub mod cover_oracle;
pub mod match_oracle;

use std::collections::BTreeMap;

use ose_planner::transform::GeometryType;

/// Face counts and printed percentages of the three example parts and their
/// total, in geometry-type order.
pub struct Table1Column {
    pub name: &'static str,
    pub counts: [usize; 6],
    pub percentages: [f64; 6],
    pub total: usize,
}

pub const TABLE_1: [Table1Column; 4] = [
    Table1Column {
        name: "Part 1",
        counts: [50, 109, 15, 13, 9, 144],
        percentages: [14.71, 32.06, 4.41, 3.82, 2.65, 42.35],
        total: 340,
    },
    Table1Column {
        name: "Part 4",
        counts: [66, 73, 0, 25, 21, 39],
        percentages: [29.46, 32.59, 0.00, 11.16, 9.38, 17.41],
        total: 224,
    },
    Table1Column {
        name: "Part 7",
        counts: [53, 76, 14, 38, 88, 210],
        percentages: [11.06, 15.87, 2.92, 7.93, 18.37, 43.84],
        total: 479,
    },
    Table1Column {
        name: "TOTAL",
        counts: [169, 258, 29, 76, 118, 393],
        percentages: [16.20, 24.74, 2.78, 7.29, 11.31, 37.68],
        total: 1043,
    },
];

pub fn counts_map(counts: &[usize; 6]) -> BTreeMap<GeometryType, usize> {
    GeometryType::ALL.iter().copied().zip(counts.iter().copied()).collect()
}
