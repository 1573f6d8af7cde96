//! On-disk datasets written by `mlindex generate`.
//!
//! ```text
//! <dir>/<scenario>/repository_<d>.txt
//! <dir>/<scenario>/requests_<d>.txt
//! <dir>/<scenario>/request_probabilities.txt
//! <dir>/<scenario>/input_probabilities.txt
//! ```

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use mlindex_core::{Request, TableSource};
use thiserror::Error;

use crate::config::Scenario;
use crate::formats::{self, FormatError};
use crate::harness::{Dataset, ScenarioTables};

#[derive(Debug, Error)]
pub enum DataError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Format { path: PathBuf, source: FormatError },
    #[error("{0}: no datasets found")]
    Empty(PathBuf),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> DataError + '_ {
    move |source| DataError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write(path: PathBuf, contents: String) -> Result<(), DataError> {
    fs::write(&path, contents).map_err(io_err(&path))
}

fn read(path: &Path) -> Result<String, DataError> {
    fs::read_to_string(path).map_err(io_err(path))
}

pub fn scenario_dir(root: &Path, scenario: Scenario) -> PathBuf {
    root.join(scenario.name())
}

pub fn write_scenario(
    root: &Path,
    scenario: Scenario,
    datasets: &[Dataset],
    tables: &ScenarioTables,
) -> Result<(), DataError> {
    let dir = scenario_dir(root, scenario);
    fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    for (d, ds) in datasets.iter().enumerate() {
        write(
            dir.join(format!("repository_{d}.txt")),
            formats::write_repository(&ds.services),
        )?;
        let requests: Vec<Request> = ds.requests.iter().cloned().map(Request::retrieval).collect();
        write(
            dir.join(format!("requests_{d}.txt")),
            formats::write_requests(&requests),
        )?;
    }
    write(
        dir.join("request_probabilities.txt"),
        formats::write_probability_table(&tables.requests),
    )?;
    write(
        dir.join("input_probabilities.txt"),
        formats::write_probability_table(&tables.inputs),
    )?;
    Ok(())
}

pub fn load_scenario(root: &Path, scenario: Scenario, q: u32) -> Result<(Vec<Dataset>, ScenarioTables), DataError> {
    let dir = scenario_dir(root, scenario);
    let table = |name: &str| {
        let path = dir.join(name);
        formats::parse_probability_table(&read(&path)?, Some(q), TableSource::Theoretical)
            .map_err(|source| DataError::Format { path, source })
    };
    let tables = ScenarioTables {
        requests: table("request_probabilities.txt")?,
        inputs: table("input_probabilities.txt")?,
    };

    let mut datasets = Vec::new();
    loop {
        let d = datasets.len();
        let repo_path = dir.join(format!("repository_{d}.txt"));
        if !repo_path.exists() {
            break;
        }
        let services = formats::parse_repository(&read(&repo_path)?).map_err(|source| DataError::Format {
            path: repo_path.clone(),
            source,
        })?;
        let req_path = dir.join(format!("requests_{d}.txt"));
        let requests = formats::parse_requests(&read(&req_path)?)
            .map_err(|source| DataError::Format {
                path: req_path.clone(),
                source,
            })?
            .into_iter()
            .map(|r| r.provided)
            .collect();
        datasets.push(Dataset { services, requests });
    }
    if datasets.is_empty() {
        return Err(DataError::Empty(dir));
    }
    Ok((datasets, tables))
}
