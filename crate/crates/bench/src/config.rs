//! Benchmark configuration: flat `key = value` lines, `#` starts a comment.
//!
//! ```text
//! n_services = 5000
//! q = 300
//! l = 1.0
//! modes = primary,partial,full
//! strategies = all
//! scenario = unequal-requests
//! ```

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use mlindex_core::{IndexMode, ProbabilitySource, SkewTarget, StrategyKind, WorkloadConfig};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Scenario {
    EqualProb,
    UnequalInputs,
    UnequalRequests,
}

impl Scenario {
    pub const ALL: [Scenario; 3] = [Scenario::EqualProb, Scenario::UnequalInputs, Scenario::UnequalRequests];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::EqualProb => "equal",
            Scenario::UnequalInputs => "unequal-inputs",
            Scenario::UnequalRequests => "unequal-requests",
        }
    }

    pub fn target(self) -> SkewTarget {
        match self {
            Scenario::EqualProb => SkewTarget::None,
            Scenario::UnequalInputs => SkewTarget::ServiceInputs,
            Scenario::UnequalRequests => SkewTarget::RetrievalRequests,
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Scenario::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| format!("unknown scenario `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Paper,
    Desk,
}

impl FromStr for Scale {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "paper" => Ok(Scale::Paper),
            "desk" => Ok(Scale::Desk),
            other => Err(format!("unknown scale `{other}`")),
        }
    }
}

/// Which table least-used ranks inputs by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LeastUsedSource {
    /// Input probabilities in the unequal-inputs scenario, request probabilities otherwise.
    #[default]
    Auto,
    Fixed(ProbabilitySource),
}

impl LeastUsedSource {
    pub fn resolve(self, scenario: Scenario) -> ProbabilitySource {
        match self {
            LeastUsedSource::Fixed(s) => s,
            LeastUsedSource::Auto if scenario == Scenario::UnequalInputs => ProbabilitySource::InputDistribution,
            LeastUsedSource::Auto => ProbabilitySource::RequestDistribution,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    /// The distribution target is overridden per scenario at run time.
    pub workload: WorkloadConfig,
    pub modes: Vec<IndexMode>,
    pub strategies: Vec<StrategyKind>,
    pub scenarios: Vec<Scenario>,
    pub output: Option<PathBuf>,
    /// Every n-th request of a dataset is checked against the brute-force oracle.
    pub oracle_every: usize,
    pub least_used_source: LeastUsedSource,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            workload: WorkloadConfig::paper(SkewTarget::None, 1.0, 0),
            modes: IndexMode::ALL.to_vec(),
            strategies: StrategyKind::ALL.to_vec(),
            scenarios: Scenario::ALL.to_vec(),
            output: None,
            oracle_every: 100,
            least_used_source: LeastUsedSource::Auto,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("{0}")]
    Invalid(String),
}

impl BenchConfig {
    pub fn desk() -> Self {
        let mut cfg = BenchConfig::default();
        cfg.apply_scale(Scale::Desk);
        cfg
    }

    pub fn seed(&self) -> u64 {
        self.workload.distribution.seed
    }

    pub fn set_seed(&mut self, seed: u64) {
        self.workload.distribution.seed = seed;
    }

    /// Replaces sizes with the preset for `scale`, keeping slope and seed.
    pub fn apply_scale(&mut self, scale: Scale) {
        let d = self.workload.distribution;
        self.workload = match scale {
            Scale::Paper => WorkloadConfig::paper(d.target, d.slope, d.seed),
            Scale::Desk => WorkloadConfig::desk(d.target, d.slope, d.seed),
        };
    }

    /// Workload for one scenario.
    pub fn workload_for(&self, scenario: Scenario) -> WorkloadConfig {
        let mut w = self.workload;
        w.distribution.target = scenario.target();
        w
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.modes.is_empty() {
            return Err(ConfigError::Invalid("no index modes selected".into()));
        }
        if self.strategies.is_empty() {
            return Err(ConfigError::Invalid("no strategies selected".into()));
        }
        if self.scenarios.is_empty() {
            return Err(ConfigError::Invalid("no scenarios selected".into()));
        }
        if self.oracle_every == 0 {
            return Err(ConfigError::Invalid("oracle_every must be at least 1".into()));
        }
        for &s in &self.scenarios {
            self.workload_for(s)
                .validate()
                .map_err(|e| ConfigError::Invalid(format!("{s}: {e}")))?;
        }
        Ok(())
    }

    /// Applies `key = value` lines on top of `self`.
    pub fn parse_onto(mut self, text: &str) -> Result<Self, ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(ConfigError::Line {
                    line,
                    message: format!("expected `key = value`, found `{content}`"),
                });
            };
            self.set(key.trim(), value.trim())
                .map_err(|message| ConfigError::Line { line, message })?;
        }
        Ok(self)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        BenchConfig::default().parse_onto(text)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        fn num<T: FromStr>(key: &str, v: &str) -> Result<T, String>
        where
            T::Err: fmt::Display,
        {
            v.parse().map_err(|e| format!("{key}: cannot parse `{v}`: {e}"))
        }
        fn list<T: FromStr<Err = String> + Copy>(v: &str, all: &[T]) -> Result<Vec<T>, String> {
            if v == "all" {
                return Ok(all.to_vec());
            }
            v.split(',').map(|s| s.trim().parse()).collect()
        }

        let w = &mut self.workload;
        match key {
            "n_services" => w.n_services = num(key, value)?,
            "inputs_per_service" => w.inputs_per_service = num(key, value)?,
            "outputs_per_service" => w.outputs_per_service = num(key, value)?,
            "request_size" => w.request_size = num(key, value)?,
            "requests_per_dataset" => w.requests_per_dataset = num(key, value)?,
            "n_datasets" => w.n_datasets = num(key, value)?,
            "q" => w.distribution.q = num(key, value)?,
            "l" | "slope" => w.distribution.slope = num(key, value)?,
            "seed" => w.distribution.seed = num(key, value)?,
            "modes" => self.modes = list(value, &IndexMode::ALL)?,
            "strategies" => self.strategies = list(value, &StrategyKind::ALL)?,
            "scenario" | "scenarios" => self.scenarios = list(value, &Scenario::ALL)?,
            "output" => self.output = Some(PathBuf::from(value)),
            "oracle_every" => self.oracle_every = num(key, value)?,
            "least_used_source" => {
                self.least_used_source = match value {
                    "auto" => LeastUsedSource::Auto,
                    "requests" => LeastUsedSource::Fixed(ProbabilitySource::RequestDistribution),
                    "inputs" => LeastUsedSource::Fixed(ProbabilitySource::InputDistribution),
                    other => return Err(format!("least_used_source: unknown value `{other}`")),
                }
            }
            other => return Err(format!("unknown key `{other}`")),
        }
        Ok(())
    }
}
