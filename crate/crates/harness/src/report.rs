//! Side-by-side summary of finished runs.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::error::{HarnessError, Result};
use crate::experiment::CurveBundle;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub name: String,
    pub param_count: usize,
    pub solved: usize,
    pub seeds: usize,
    pub median_solve_episode: Option<f64>,
    pub final_100_mean: f64,
}

impl ReportRow {
    pub fn from_bundle(bundle: &CurveBundle) -> Self {
        let mut solved: Vec<usize> = bundle.solve_episode.iter().flatten().copied().collect();
        solved.sort_unstable();
        let median = match solved.len() {
            0 => None,
            n if n % 2 == 1 => Some(solved[n / 2] as f64),
            n => Some(0.5 * (solved[n / 2 - 1] + solved[n / 2]) as f64),
        };
        ReportRow {
            name: bundle.name.clone(),
            param_count: bundle.param_count,
            solved: solved.len(),
            seeds: bundle.seeds.len(),
            median_solve_episode: median,
            final_100_mean: bundle.trailing_mean(100),
        }
    }
}

pub fn compare_report(bundles: &[CurveBundle]) -> Vec<ReportRow> {
    bundles.iter().map(ReportRow::from_bundle).collect()
}

const HEADER: [&str; 6] = [
    "name",
    "param_count",
    "solved",
    "seeds",
    "median_solve_episode",
    "final_100_mean",
];

fn cells(row: &ReportRow) -> [String; 6] {
    [
        row.name.clone(),
        row.param_count.to_string(),
        row.solved.to_string(),
        row.seeds.to_string(),
        row.median_solve_episode.map_or_else(String::new, |m| m.to_string()),
        row.final_100_mean.to_string(),
    ]
}

pub fn write_report_csv(path: &Path, rows: &[ReportRow]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path).map_err(|e| HarnessError::format(path, e))?;
    writer
        .write_record(HEADER)
        .map_err(|e| HarnessError::format(path, e))?;
    for row in rows {
        writer
            .write_record(cells(row))
            .map_err(|e| HarnessError::format(path, e))?;
    }
    writer.flush().map_err(|e| HarnessError::io(path, e))
}

/// Left-aligned names, right-aligned numbers; an unsolved median prints `-`.
pub fn render_table(rows: &[ReportRow]) -> String {
    let body: Vec<[String; 6]> = rows
        .iter()
        .map(|row| {
            let mut c = cells(row);
            if row.median_solve_episode.is_none() {
                c[4] = "-".into();
            }
            c[5] = format!("{:.1}", row.final_100_mean);
            c
        })
        .collect();
    let widths: Vec<usize> = (0..HEADER.len())
        .map(|i| {
            body.iter()
                .map(|c| c[i].len())
                .chain([HEADER[i].len()])
                .max()
                .unwrap_or(0)
        })
        .collect();

    let mut out = String::new();
    let mut line = |c: &[String]| {
        let mut parts = Vec::with_capacity(c.len());
        for (i, cell) in c.iter().enumerate() {
            parts.push(if i == 0 {
                format!("{cell:<w$}", w = widths[i])
            } else {
                format!("{cell:>w$}", w = widths[i])
            });
        }
        let _ = writeln!(out, "{}", parts.join("  ").trim_end());
    };
    line(&HEADER.map(String::from));
    for c in &body {
        line(c);
    }
    out
}
