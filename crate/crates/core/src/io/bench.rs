// SPDX-License-Identifier: Apache-2.0

//! Benchmark aggregation and the CSV report.
//!
//! Each (instance, algorithm) cell holds the mean total over its repeats.
//! The best-known value of an instance is the smallest cell mean among the
//! compared algorithms. Summary rows use the instance name [`SUMMARY`].

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::io::IoError;

/// Instance column value of the per-algorithm summary rows.
pub const SUMMARY: &str = "ALL";

/// One finished solver run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub instance: String,
    pub algorithm: String,
    pub total: f64,
}

/// One CSV line.
///
/// On summary rows `mean_total` is the mean of the cell means,
/// `best_known` is empty, `rel_diff_pct` is the aRD and `is_best` counts
/// best hits. On instance rows `is_best` is 0 or 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub instance: String,
    pub algorithm: String,
    pub runs: usize,
    pub mean_total: f64,
    pub best_known: Option<f64>,
    pub rel_diff_pct: f64,
    pub is_best: usize,
}

fn rel_diff(value: f64, best: f64) -> f64 {
    if value == best {
        0.0
    } else {
        (value - best) / best * 100.0
    }
}

/// Instance rows sorted by (instance, algorithm), then one summary row per algorithm.
pub fn aggregate(records: &[RunRecord]) -> Vec<BenchRow> {
    let mut cells: BTreeMap<(&str, &str), (usize, f64)> = BTreeMap::new();
    for r in records {
        let cell = cells.entry((r.instance.as_str(), r.algorithm.as_str())).or_insert((0, 0.0));
        cell.0 += 1;
        cell.1 += r.total;
    }
    let mut best: BTreeMap<&str, f64> = BTreeMap::new();
    for (&(inst, _), &(runs, sum)) in &cells {
        let mean = sum / runs as f64;
        best.entry(inst).and_modify(|b| *b = b.min(mean)).or_insert(mean);
    }

    let mut rows = Vec::with_capacity(cells.len());
    for (&(inst, algo), &(runs, sum)) in &cells {
        let mean = sum / runs as f64;
        let b = best[inst];
        rows.push(BenchRow {
            instance: inst.to_owned(),
            algorithm: algo.to_owned(),
            runs,
            mean_total: mean,
            best_known: Some(b),
            rel_diff_pct: rel_diff(mean, b),
            is_best: usize::from(mean == b),
        });
    }

    let algorithms: BTreeSet<&str> = cells.keys().map(|&(_, a)| a).collect();
    for algo in algorithms {
        let mine: Vec<&BenchRow> = rows.iter().filter(|r| r.algorithm == algo).collect();
        let k = mine.len() as f64;
        let summary = BenchRow {
            instance: SUMMARY.to_owned(),
            algorithm: algo.to_owned(),
            runs: mine.iter().map(|r| r.runs).sum(),
            mean_total: mine.iter().map(|r| r.mean_total).sum::<f64>() / k,
            best_known: None,
            rel_diff_pct: mine.iter().map(|r| r.rel_diff_pct).sum::<f64>() / k,
            is_best: mine.iter().map(|r| r.is_best).sum(),
        };
        rows.push(summary);
    }
    rows
}

pub fn write_report(rows: &[BenchRow]) -> Result<String, IoError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| IoError::Csv(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| IoError::Csv(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| IoError::Csv(e.to_string()))
}

pub fn parse_report(text: &str) -> Result<Vec<BenchRow>, IoError> {
    csv::Reader::from_reader(text.as_bytes())
        .deserialize()
        .map(|r| r.map_err(|e: csv::Error| IoError::Csv(e.to_string())))
        .collect()
}
