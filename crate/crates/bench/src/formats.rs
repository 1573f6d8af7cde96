//! Line-oriented text formats.
//!
//! Repository, one service per line:
//! `<service_id>;<input_id,...>;<output_id,...>;<attr=val,...>`
//!
//! Requests, one per line:
//! `<provided ids comma-separated>|<required ids>|<attr=val;...>`
//!
//! Probability tables, one `<param_id> <probability>` pair per line.
//!
//! Blank lines are skipped everywhere. Attribute names and values must not
//! contain the separators of their format.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use mlindex_core::{ParamId, ParamSet, ProbabilityTable, Request, Service, TableSource};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}: {message}")]
pub struct FormatError {
    pub line: usize,
    pub message: String,
}

fn err(line: usize, message: impl Into<String>) -> FormatError {
    FormatError {
        line,
        message: message.into(),
    }
}

fn parse_ids(field: &str, line: usize) -> Result<Vec<u32>, FormatError> {
    field
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<u32>()
                .map_err(|e| err(line, format!("bad parameter id `{s}`: {e}")))
        })
        .collect()
}

fn join_ids(set: &ParamSet) -> String {
    let mut out = String::new();
    for (i, p) in set.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        write!(out, "{}", p.0).unwrap();
    }
    out
}

fn parse_pairs(field: &str, sep: char, line: usize) -> Result<Vec<(String, String)>, FormatError> {
    field
        .split(sep)
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|kv| {
            kv.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .ok_or_else(|| err(line, format!("attribute `{kv}` is not of the form name=value")))
        })
        .collect()
}

pub fn format_service(s: &Service) -> String {
    let attrs: Vec<String> = s.attributes.iter().map(|(k, v)| format!("{k}={v}")).collect();
    format!(
        "{};{};{};{}",
        s.id.0,
        join_ids(s.inputs()),
        join_ids(s.outputs()),
        attrs.join(",")
    )
}

pub fn write_repository(services: &[Service]) -> String {
    let mut out = String::new();
    for s in services {
        out.push_str(&format_service(s));
        out.push('\n');
    }
    out
}

pub fn parse_repository(text: &str) -> Result<Vec<Service>, FormatError> {
    let mut services = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split(';').collect();
        if fields.len() != 4 {
            return Err(err(
                line,
                format!("expected 4 `;`-separated fields, found {}", fields.len()),
            ));
        }
        let id = fields[0]
            .trim()
            .parse::<u64>()
            .map_err(|e| err(line, format!("bad service id `{}`: {e}", fields[0])))?;
        let inputs = parse_ids(fields[1], line)?;
        let outputs = parse_ids(fields[2], line)?;
        let mut service = Service::new(id, inputs, outputs).map_err(|e| err(line, e.to_string()))?;
        for (k, v) in parse_pairs(fields[3], ',', line)? {
            service.attributes.insert(k, v);
        }
        services.push(service);
    }
    Ok(services)
}

pub fn format_request(r: &Request) -> String {
    let mut constraints = Vec::new();
    for (k, vals) in &r.constraints {
        for v in vals {
            constraints.push(format!("{k}={v}"));
        }
    }
    format!(
        "{}|{}|{}",
        join_ids(&r.provided),
        join_ids(&r.required),
        constraints.join(";")
    )
}

pub fn write_requests(requests: &[Request]) -> String {
    let mut out = String::new();
    for r in requests {
        out.push_str(&format_request(r));
        out.push('\n');
    }
    out
}

pub fn parse_requests(text: &str) -> Result<Vec<Request>, FormatError> {
    let mut requests = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split('|').collect();
        if fields.len() > 3 {
            return Err(err(line, "more than 3 `|`-separated fields"));
        }
        let field = |n: usize| fields.get(n).copied().unwrap_or("");
        let mut req = Request::retrieval(ParamSet::from_ids(parse_ids(field(0), line)?));
        req.required = ParamSet::from_ids(parse_ids(field(1), line)?);
        for (k, v) in parse_pairs(field(2), ';', line)? {
            req = req.constrain(k, v);
        }
        requests.push(req);
    }
    Ok(requests)
}

pub fn write_probability_table(table: &ProbabilityTable) -> String {
    let mut out = String::new();
    for (p, prob) in table.iter() {
        writeln!(out, "{} {:e}", p.0, prob).unwrap();
    }
    out
}

/// Parses a table over `0..q`; with `q = None` the universe is `0..=max id`.
pub fn parse_probability_table(
    text: &str,
    q: Option<u32>,
    source: TableSource,
) -> Result<ProbabilityTable, FormatError> {
    let mut entries: BTreeMap<u32, f64> = BTreeMap::new();
    let mut last_line = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        last_line = line;
        let raw = raw.trim();
        if raw.is_empty() {
            continue;
        }
        let mut parts = raw.split_whitespace();
        let (Some(id), Some(prob), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(err(line, "expected `<param_id> <probability>`"));
        };
        let id = id
            .parse::<u32>()
            .map_err(|e| err(line, format!("bad parameter id `{id}`: {e}")))?;
        let prob = prob
            .parse::<f64>()
            .map_err(|e| err(line, format!("bad probability `{prob}`: {e}")))?;
        if entries.insert(id, prob).is_some() {
            return Err(err(line, format!("parameter {id} listed twice")));
        }
    }
    let q = q.unwrap_or_else(|| entries.keys().next_back().map_or(0, |m| m + 1));
    ProbabilityTable::from_entries(q, entries.into_iter().map(|(k, v)| (ParamId(k), v)), source)
        .map_err(|e| err(last_line, e.to_string()))
}
