//! JSON file formats for channels, cost functions and distributions.
//!
//! Every number is a string (`"1/2"`, `"3"`); JSON numbers are rejected so
//! that no value ever passes through a float.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{validate_avc, Avc, ChannelError, CostFn, Distribution};
use crate::rational::{format_rational, parse_rational, ParseRationalError, RVector};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("bad rational at {path}: {source}")]
    Rational {
        path: String,
        source: ParseRationalError,
    },
    #[error("declared size {field}={declared} but table has {actual}")]
    SizeMismatch {
        field: &'static str,
        declared: usize,
        actual: usize,
    },
    #[error(transparent)]
    Channel(#[from] ChannelError),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChannelFile {
    #[serde(rename = "X")]
    x: usize,
    #[serde(rename = "S")]
    s: usize,
    #[serde(rename = "Y")]
    y: usize,
    #[serde(rename = "W")]
    w: Vec<Vec<Vec<String>>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CostFile {
    costs: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DistributionFile {
    p: Vec<String>,
}

fn parse_vec(raw: &[String], path: &str) -> Result<RVector, FormatError> {
    raw.iter()
        .enumerate()
        .map(|(i, s)| {
            parse_rational(s).map_err(|source| FormatError::Rational {
                path: format!("{path}[{i}]"),
                source,
            })
        })
        .collect()
}

pub fn parse_channel(text: &str) -> Result<Avc, FormatError> {
    let file: ChannelFile = serde_json::from_str(text)?;
    if file.w.len() != file.x {
        return Err(FormatError::SizeMismatch {
            field: "X",
            declared: file.x,
            actual: file.w.len(),
        });
    }
    let mut table = Vec::with_capacity(file.x);
    for (x, states) in file.w.iter().enumerate() {
        if states.len() != file.s {
            return Err(FormatError::SizeMismatch {
                field: "S",
                declared: file.s,
                actual: states.len(),
            });
        }
        let mut rows = Vec::with_capacity(file.s);
        for (s, row) in states.iter().enumerate() {
            if row.len() != file.y {
                return Err(FormatError::SizeMismatch {
                    field: "Y",
                    declared: file.y,
                    actual: row.len(),
                });
            }
            rows.push(parse_vec(row, &format!("W[{x}][{s}]"))?);
        }
        table.push(rows);
    }
    Ok(validate_avc(&table)?)
}

pub fn channel_to_json(w: &Avc) -> String {
    let d = w.dims();
    let file = ChannelFile {
        x: d.nx,
        s: d.ns,
        y: d.ny,
        w: w.to_table()
            .iter()
            .map(|states| {
                states
                    .iter()
                    .map(|row| row.iter().map(format_rational).collect())
                    .collect()
            })
            .collect(),
    };
    serde_json::to_string_pretty(&file).expect("channel serializes")
}

pub fn parse_cost(text: &str) -> Result<CostFn, FormatError> {
    let file: CostFile = serde_json::from_str(text)?;
    Ok(CostFn::new(parse_vec(&file.costs, "costs")?)?)
}

/// Like [`parse_cost`] but without the `min = 0` check.
pub fn parse_cost_unnormalized(text: &str) -> Result<CostFn, FormatError> {
    let file: CostFile = serde_json::from_str(text)?;
    Ok(CostFn::new_unnormalized(parse_vec(&file.costs, "costs")?)?)
}

pub fn cost_to_json(c: &CostFn) -> String {
    let file = CostFile {
        costs: c.costs().iter().map(format_rational).collect(),
    };
    serde_json::to_string(&file).expect("cost serializes")
}

pub fn parse_distribution(text: &str) -> Result<Distribution, FormatError> {
    let file: DistributionFile = serde_json::from_str(text)?;
    Ok(Distribution::new(parse_vec(&file.p, "p")?)?)
}

pub fn distribution_to_json(p: &Distribution) -> String {
    let file = DistributionFile {
        p: p.probs().iter().map(format_rational).collect(),
    };
    serde_json::to_string(&file).expect("distribution serializes")
}
