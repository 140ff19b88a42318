use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use poa_core::io::{parse_edge_list, parse_measure, parse_values};
use poa_core::mmspace::build_graph_metric;
use poa_core::{Error, FiniteMetricSpace, ProbabilityMeasure, WeightedGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    EdgeList,
    DistanceCsv,
}

pub struct Dataset {
    pub space: FiniteMetricSpace,
    pub mu: ProbabilityMeasure,
    pub graph: Option<WeightedGraph>,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

pub fn load_dataset(path: &Path, format: Format, measure: Option<&Path>, validate: bool) -> Result<Dataset> {
    let (space, graph) = match format {
        Format::EdgeList => {
            let g = parse_edge_list(&read(path)?, None).with_context(|| format!("in {}", path.display()))?;
            (build_graph_metric(&g)?, Some(g))
        }
        Format::DistanceCsv => {
            let rows = read_matrix(path)?;
            let space = if validate {
                FiniteMetricSpace::validated(rows)
            } else {
                FiniteMetricSpace::new(rows)
            };
            (space.with_context(|| format!("in {}", path.display()))?, None)
        }
    };
    let mu = match measure {
        Some(p) => load_measure(p, space.len())?,
        None => ProbabilityMeasure::uniform(space.len()),
    };
    Ok(Dataset { space, mu, graph })
}

pub fn load_measure(path: &Path, n: usize) -> Result<ProbabilityMeasure> {
    let mu = parse_measure(&read(path)?).with_context(|| format!("in {}", path.display()))?;
    if mu.len() != n {
        bail!(Error::LengthMismatch {
            expected: n,
            found: mu.len()
        });
    }
    Ok(mu)
}

pub fn load_values(path: &Path) -> Result<Vec<f64>> {
    parse_values(&read(path)?).with_context(|| format!("in {}", path.display()))
}

fn parse_cell(cell: &str, line: u64) -> Result<f64> {
    let v: f64 = cell.trim().parse().map_err(|_| Error::Parse {
        line: line as usize,
        message: format!("invalid number `{cell}`"),
    })?;
    Ok(v)
}

/// Headerless numeric CSV, `#` comment lines allowed.
pub fn read_matrix(path: &Path) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.with_context(|| format!("in {}", path.display()))?;
        let line = record.position().map_or(0, |p| p.line());
        let row = record
            .iter()
            .map(|c| parse_cell(c, line))
            .collect::<Result<Vec<f64>>>()
            .with_context(|| format!("in {}", path.display()))?;
        rows.push(row);
    }
    Ok(rows)
}

/// CSV with a header row; returns the header and the numeric columns.
pub fn read_columns(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    let header: Vec<String> = reader.headers()?.iter().map(str::to_owned).collect();
    let mut columns = vec![Vec::new(); header.len()];
    for record in reader.records() {
        let record = record.with_context(|| format!("in {}", path.display()))?;
        let line = record.position().map_or(0, |p| p.line());
        for (col, cell) in columns.iter_mut().zip(record.iter()) {
            col.push(parse_cell(cell, line).with_context(|| format!("in {}", path.display()))?);
        }
    }
    Ok((header, columns))
}
