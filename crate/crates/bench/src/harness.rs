//! Runs the (mode x strategy x scenario x dataset) experiment matrix.
//!
//! Count metrics are fully determined by the configuration and seed. Wall-time
//! metrics are measured per operation with [`Instant`] and are advisory.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use mlindex_core::workload::{self, StreamPurpose};
use mlindex_core::{
    add_service, brute_force_retrieve, retrieve, IndexError, IndexMode, IndexModel, KeySelector, ParamSet,
    ProbabilitySource, ProbabilityTable, Service, StrategyKind, WorkloadConfig,
};
use rand::Rng;
use thiserror::Error;

use crate::config::{BenchConfig, Scenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Metric {
    RetrievalClassesExamined,
    RetrievalWallMs,
    AdditionGlobalScans,
    AdditionWallMs,
}

impl Metric {
    pub const ALL: [Metric; 4] = [
        Metric::RetrievalClassesExamined,
        Metric::RetrievalWallMs,
        Metric::AdditionGlobalScans,
        Metric::AdditionWallMs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::RetrievalClassesExamined => "retrieval_classes_examined",
            Metric::RetrievalWallMs => "retrieval_wall_ms",
            Metric::AdditionGlobalScans => "addition_global_scans",
            Metric::AdditionWallMs => "addition_wall_ms",
        }
    }

    pub fn is_wall_time(self) -> bool {
        matches!(self, Metric::RetrievalWallMs | Metric::AdditionWallMs)
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Metric::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown metric `{s}`"))
    }
}

/// One aggregated measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub mode: IndexMode,
    pub strategy: StrategyKind,
    pub scenario: Scenario,
    pub dataset: usize,
    pub metric: Metric,
    pub mean: f64,
    pub stddev: f64,
    pub count: usize,
}

impl BenchRow {
    pub fn sort_key(&self) -> (IndexMode, StrategyKind, Scenario, usize, Metric) {
        (self.mode, self.strategy, self.scenario, self.dataset, self.metric)
    }
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid workload: {0}")]
    Workload(#[from] mlindex_core::WorkloadError),
    #[error("index build failed: {0}")]
    Index(#[from] IndexError),
    #[error(
        "oracle mismatch in {scenario}/{mode}/{strategy} dataset {dataset}, request #{request} {provided}: \
         indexed {indexed} services, brute force {expected}"
    )]
    OracleMismatch {
        scenario: Scenario,
        mode: IndexMode,
        strategy: StrategyKind,
        dataset: usize,
        request: usize,
        provided: ParamSet,
        indexed: usize,
        expected: usize,
    },
    #[error("{0}")]
    Data(String),
}

/// Which metrics a run produces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchKind {
    Retrieval,
    Addition,
    Both,
}

impl BenchKind {
    fn retrieval(self) -> bool {
        matches!(self, BenchKind::Retrieval | BenchKind::Both)
    }

    fn addition(self) -> bool {
        matches!(self, BenchKind::Addition | BenchKind::Both)
    }
}

/// One repository and the requests run against it.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub services: Vec<Service>,
    pub requests: Vec<ParamSet>,
}

/// The generated datasets of one scenario.
pub fn generate_datasets(workload: &WorkloadConfig) -> Vec<Dataset> {
    let requests = workload::generate_requests(workload);
    requests
        .into_iter()
        .enumerate()
        .map(|(d, requests)| Dataset {
            services: workload::generate_dataset_repository(workload, d),
            requests,
        })
        .collect()
}

/// Appearing-probability tables available to least-used selection.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioTables {
    pub requests: ProbabilityTable,
    pub inputs: ProbabilityTable,
}

impl ScenarioTables {
    pub fn theoretical(workload: &WorkloadConfig) -> Self {
        ScenarioTables {
            requests: workload.request_probabilities(),
            inputs: workload.input_probabilities(),
        }
    }
}

/// Selector for one (strategy, scenario, dataset) cell. Every mode gets the
/// same random stream so that modes are directly comparable.
pub fn make_selector(
    cfg: &BenchConfig,
    tables: &ScenarioTables,
    strategy: StrategyKind,
    scenario: Scenario,
    dataset: usize,
) -> KeySelector {
    let seed = workload::stream(cfg.seed(), StreamPurpose::Strategy, dataset as u32).gen::<u64>();
    let source = cfg.least_used_source.resolve(scenario);
    let table = match source {
        ProbabilitySource::RequestDistribution => tables.requests.clone(),
        ProbabilitySource::InputDistribution => tables.inputs.clone(),
    };
    KeySelector::new(strategy, seed).with_table(table, source)
}

#[derive(Debug, Default)]
struct Samples(Vec<f64>);

impl Samples {
    fn push(&mut self, v: f64) {
        self.0.push(v);
    }

    fn summary(&self) -> (f64, f64, usize) {
        let n = self.0.len();
        if n == 0 {
            return (0.0, 0.0, 0);
        }
        let mean = self.0.iter().sum::<f64>() / n as f64;
        let var = if n > 1 {
            self.0.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        (mean, var.sqrt(), n)
    }
}

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

#[allow(clippy::too_many_arguments)]
fn run_cell(
    cfg: &BenchConfig,
    tables: &ScenarioTables,
    scenario: Scenario,
    mode: IndexMode,
    strategy: StrategyKind,
    dataset_index: usize,
    dataset: &Dataset,
    kind: BenchKind,
    rows: &mut Vec<BenchRow>,
) -> Result<(), BenchError> {
    let mut selector = make_selector(cfg, tables, strategy, scenario, dataset_index);
    selector.validate().map_err(IndexError::from)?;

    let mut index = IndexModel::new(mode);
    let mut scans = Samples::default();
    let mut add_ms = Samples::default();
    for s in &dataset.services {
        let start = Instant::now();
        let st = add_service(&mut index, s.clone(), &mut selector)?;
        add_ms.push(elapsed_ms(start));
        scans.push(st.global_scans as f64);
    }

    let mut row = |metric: Metric, samples: &Samples| {
        let (mean, stddev, count) = samples.summary();
        if count > 0 {
            rows.push(BenchRow {
                mode,
                strategy,
                scenario,
                dataset: dataset_index,
                metric,
                mean,
                stddev,
                count,
            });
        }
    };

    if kind.addition() {
        row(Metric::AdditionGlobalScans, &scans);
        row(Metric::AdditionWallMs, &add_ms);
    }
    if !kind.retrieval() {
        return Ok(());
    }

    let mut examined = Samples::default();
    let mut query_ms = Samples::default();
    for (i, request) in dataset.requests.iter().enumerate() {
        let start = Instant::now();
        let (found, stats) = retrieve(&index, request);
        query_ms.push(elapsed_ms(start));
        examined.push(stats.classes_examined as f64);
        if i % cfg.oracle_every == 0 {
            let expected = brute_force_retrieve(&dataset.services, request);
            if expected != found {
                return Err(BenchError::OracleMismatch {
                    scenario,
                    mode,
                    strategy,
                    dataset: dataset_index,
                    request: i,
                    provided: request.clone(),
                    indexed: found.len(),
                    expected: expected.len(),
                });
            }
        }
    }
    row(Metric::RetrievalClassesExamined, &examined);
    row(Metric::RetrievalWallMs, &query_ms);
    Ok(())
}

/// Runs one scenario over explicit datasets.
pub fn run_scenario(
    cfg: &BenchConfig,
    scenario: Scenario,
    datasets: &[Dataset],
    tables: &ScenarioTables,
    kind: BenchKind,
) -> Result<Vec<BenchRow>, BenchError> {
    let mut rows = Vec::new();
    for (d, dataset) in datasets.iter().enumerate() {
        for &mode in &cfg.modes {
            for &strategy in &cfg.strategies {
                run_cell(cfg, tables, scenario, mode, strategy, d, dataset, kind, &mut rows)?;
            }
        }
    }
    rows.sort_by_key(BenchRow::sort_key);
    Ok(rows)
}

/// Runs every configured scenario on generated data.
pub fn run_benchmark(cfg: &BenchConfig, kind: BenchKind) -> Result<Vec<BenchRow>, BenchError> {
    let mut rows = Vec::new();
    for &scenario in &cfg.scenarios {
        let w = cfg.workload_for(scenario);
        w.validate()?;
        let tables = ScenarioTables::theoretical(&w);
        rows.extend(run_scenario(cfg, scenario, &generate_datasets(&w), &tables, kind)?);
    }
    rows.sort_by_key(BenchRow::sort_key);
    Ok(rows)
}

pub fn run_retrieval_bench(cfg: &BenchConfig) -> Result<Vec<BenchRow>, BenchError> {
    run_benchmark(cfg, BenchKind::Retrieval)
}

pub fn run_addition_bench(cfg: &BenchConfig) -> Result<Vec<BenchRow>, BenchError> {
    run_benchmark(cfg, BenchKind::Addition)
}

/// Mean of a metric across datasets, weighted by sample count.
pub fn pooled_mean<'a>(
    rows: impl IntoIterator<Item = &'a BenchRow>,
    mode: IndexMode,
    strategy: StrategyKind,
    scenario: Scenario,
    metric: Metric,
) -> Option<f64> {
    let (mut total, mut n) = (0.0, 0usize);
    for r in rows {
        if r.mode == mode && r.strategy == strategy && r.scenario == scenario && r.metric == metric {
            total += r.mean * r.count as f64;
            n += r.count;
        }
    }
    (n > 0).then(|| total / n as f64)
}
