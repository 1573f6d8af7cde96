//! CSV output and the per-scenario ranking table.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use mlindex_core::{IndexMode, StrategyKind};
use thiserror::Error;

use crate::config::Scenario;
use crate::harness::{BenchRow, Metric};

pub const CSV_HEADER: &str = "mode,strategy,scenario,dataset,metric,mean,stddev,count";

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("csv line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Renders rows in (mode, strategy, scenario, dataset, metric) order.
pub fn to_csv(rows: &[BenchRow]) -> String {
    let mut sorted: Vec<&BenchRow> = rows.iter().collect();
    sorted.sort_by_key(|r| r.sort_key());
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in sorted {
        writeln!(
            out,
            "{},{},{},{},{},{:.6},{:.6},{}",
            r.mode, r.strategy, r.scenario, r.dataset, r.metric, r.mean, r.stddev, r.count
        )
        .unwrap();
    }
    out
}

pub fn write_csv(rows: &[BenchRow], path: &Path) -> Result<(), ReportError> {
    std::fs::write(path, to_csv(rows)).map_err(|source| ReportError::Write {
        path: path.to_path_buf(),
        source,
    })
}

pub fn parse_csv(text: &str) -> Result<Vec<BenchRow>, ReportError> {
    let mut rows = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if raw.trim().is_empty() {
            continue;
        }
        if line == 1 {
            if raw.trim() != CSV_HEADER {
                return Err(ReportError::Parse {
                    line,
                    message: format!("expected header `{CSV_HEADER}`"),
                });
            }
            continue;
        }
        let f: Vec<&str> = raw.split(',').map(str::trim).collect();
        if f.len() != 8 {
            return Err(ReportError::Parse {
                line,
                message: format!("expected 8 fields, found {}", f.len()),
            });
        }
        let bad = |message: String| ReportError::Parse { line, message };
        rows.push(BenchRow {
            mode: f[0].parse().map_err(bad)?,
            strategy: f[1].parse().map_err(bad)?,
            scenario: f[2].parse().map_err(bad)?,
            dataset: f[3].parse().map_err(|e| bad(format!("dataset: {e}")))?,
            metric: f[4].parse().map_err(bad)?,
            mean: f[5].parse().map_err(|e| bad(format!("mean: {e}")))?,
            stddev: f[6].parse().map_err(|e| bad(format!("stddev: {e}")))?,
            count: f[7].parse().map_err(|e| bad(format!("count: {e}")))?,
        });
    }
    Ok(rows)
}

/// Strategies of one (scenario, metric, mode) cell ordered by pooled mean, lowest first.
#[derive(Debug, Clone, PartialEq)]
pub struct Ranking {
    pub scenario: Scenario,
    pub metric: Metric,
    pub mode: IndexMode,
    pub order: Vec<(StrategyKind, f64)>,
}

pub fn rank(rows: &[BenchRow]) -> Vec<Ranking> {
    type Cell = (Scenario, Metric, IndexMode);
    let mut acc: BTreeMap<Cell, BTreeMap<StrategyKind, (f64, usize)>> = BTreeMap::new();
    for r in rows {
        let e = acc
            .entry((r.scenario, r.metric, r.mode))
            .or_default()
            .entry(r.strategy)
            .or_default();
        e.0 += r.mean * r.count as f64;
        e.1 += r.count;
    }
    acc.into_iter()
        .map(|((scenario, metric, mode), by_strategy)| {
            let mut order: Vec<(StrategyKind, f64)> = by_strategy
                .into_iter()
                .filter(|(_, (_, n))| *n > 0)
                .map(|(s, (total, n))| (s, total / n as f64))
                .collect();
            order.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
            Ranking {
                scenario,
                metric,
                mode,
                order,
            }
        })
        .collect()
}

/// Text table: one block per (scenario, metric), one row per mode, one
/// column per strategy with `mean (rank)`.
pub fn render_report(rows: &[BenchRow]) -> String {
    let rankings = rank(rows);
    let strategies: Vec<StrategyKind> = StrategyKind::ALL
        .into_iter()
        .filter(|s| rows.iter().any(|r| r.strategy == *s))
        .collect();
    let mut out = String::new();
    let mut current: Option<(Scenario, Metric)> = None;
    for r in &rankings {
        if current != Some((r.scenario, r.metric)) {
            current = Some((r.scenario, r.metric));
            if !out.is_empty() {
                out.push('\n');
            }
            writeln!(out, "scenario: {}  metric: {}", r.scenario, r.metric).unwrap();
            write!(out, "{:<8}", "mode").unwrap();
            for s in &strategies {
                write!(out, " {:>18}", s.name()).unwrap();
            }
            out.push('\n');
        }
        write!(out, "{:<8}", r.mode.name()).unwrap();
        for s in &strategies {
            match r.order.iter().position(|(k, _)| k == s) {
                Some(pos) => {
                    let cell = format!("{:.2} ({})", r.order[pos].1, pos + 1);
                    write!(out, " {cell:>18}").unwrap();
                }
                None => write!(out, " {:>18}", "-").unwrap(),
            }
        }
        out.push('\n');
        let names: Vec<&str> = r.order.iter().map(|(k, _)| k.name()).collect();
        writeln!(out, "{:<8} ranking: {}", "", names.join(" < ")).unwrap();
    }
    out
}
