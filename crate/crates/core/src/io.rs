//! File formats and the flow-to-dissimilarity transform.
//!
//! * Matrix CSV: a header row of node labels (optionally preceded by an
//!   empty corner cell), then one row per node: its label followed by `n`
//!   numbers. `inf` denotes a missing link.
//! * Edge-list TSV: `src<TAB>dst<TAB>weight` per line. Unlisted ordered
//!   pairs become `inf`. Blank lines and `#` comments are ignored.
//! * Flow CSV: the matrix layout holding non-negative flows (migrants,
//!   dollars) instead of dissimilarities.
//!
//! Numbers are written in the shortest form that parses back to the same
//! `f64`, so writing and re-reading is lossless.

use std::collections::HashMap;

use csv::{ReaderBuilder, StringRecord, Trim, WriterBuilder};
use thiserror::Error;

use crate::network::{Network, NetworkError};

/// Default floor substituted when `1 - share` reaches zero.
pub const DEFAULT_FLOW_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IngestError {
    #[error("input is empty")]
    Empty,
    #[error("line {line}: {message}")]
    Csv { line: u64, message: String },
    #[error("line {line}, field {field}: cannot parse {token:?} as a number")]
    BadNumber { line: u64, field: usize, token: String },
    #[error("line {line}: expected {expected} fields, found {found}")]
    RowLength { line: u64, expected: usize, found: usize },
    #[error("line {line}: row label {found:?} does not match header label {expected:?}")]
    LabelMismatch { line: u64, expected: String, found: String },
    #[error("expected {expected} data rows after the header, found {found}")]
    RowCount { expected: usize, found: usize },
    #[error("line {line}: duplicate edge {src} -> {dst}")]
    DuplicateEdge { line: u64, src: String, dst: String },
    #[error("line {line}: self-loop on {label} must have weight 0, got {weight}")]
    SelfLoop { line: u64, label: String, weight: f64 },
    #[error("negative flow {value} from {from:?} to {to:?}")]
    NegativeFlow { from: String, to: String, value: f64 },
    #[error("non-finite flow {value} from {from:?} to {to:?}")]
    NonFiniteFlow { from: String, to: String, value: f64 },
    #[error("flow floor must be positive and below 1, got {0}")]
    BadFloor(f64),
    #[error(transparent)]
    Network(#[from] NetworkError),
}

fn csv_error(e: csv::Error) -> IngestError {
    let line = e.position().map_or(0, |p| p.line());
    IngestError::Csv {
        line,
        message: e.to_string(),
    }
}

fn parse_number(token: &str, line: u64, field: usize) -> Result<f64, IngestError> {
    let bad = || IngestError::BadNumber {
        line,
        field,
        token: token.to_string(),
    };
    match token.to_ascii_lowercase().as_str() {
        "inf" | "+inf" | "infinity" | "+infinity" => Ok(f64::INFINITY),
        lower if lower.contains("nan") => Err(bad()),
        _ => token.parse::<f64>().map_err(|_| bad()),
    }
}

/// Shortest round-trip decimal, `inf` for infinity, integers without `.0`.
pub fn format_number(v: f64) -> String {
    if v == f64::INFINITY {
        return "inf".to_string();
    }
    let s = format!("{v:?}");
    match s.strip_suffix(".0") {
        Some(stripped) => stripped.to_string(),
        None => s,
    }
}

/// Labels and rows of a labeled square table, before interpretation.
fn read_square_table(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>), IngestError> {
    if text.trim().is_empty() {
        return Err(IngestError::Empty);
    }
    let mut reader = ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let records: Vec<(u64, StringRecord)> = reader
        .records()
        .map(|r| {
            let r = r.map_err(csv_error)?;
            let line = r.position().map_or(0, |p| p.line());
            Ok((line, r))
        })
        .filter(|r: &Result<(u64, StringRecord), IngestError>| {
            !matches!(r, Ok((_, rec)) if rec.iter().all(str::is_empty))
        })
        .collect::<Result<_, _>>()?;
    let Some(((_, header), rows)) = records.split_first() else {
        return Err(IngestError::Empty);
    };
    let mut labels: Vec<String> = header.iter().map(str::to_string).collect();
    let has_corner = rows
        .first()
        .map_or(labels.first().is_some_and(String::is_empty), |(_, r)| r.len() == labels.len());
    if has_corner {
        labels.remove(0);
    }
    let n = labels.len();
    if rows.len() != n {
        return Err(IngestError::RowCount {
            expected: n,
            found: rows.len(),
        });
    }
    let mut matrix = Vec::with_capacity(n);
    for (i, (line, record)) in rows.iter().enumerate() {
        if record.len() != n + 1 {
            return Err(IngestError::RowLength {
                line: *line,
                expected: n + 1,
                found: record.len(),
            });
        }
        if record[0] != labels[i] {
            return Err(IngestError::LabelMismatch {
                line: *line,
                expected: labels[i].clone(),
                found: record[0].to_string(),
            });
        }
        let values = record
            .iter()
            .skip(1)
            .enumerate()
            .map(|(field, token)| parse_number(token, *line, field + 2))
            .collect::<Result<Vec<f64>, _>>()?;
        matrix.push(values);
    }
    Ok((labels, matrix))
}

pub fn read_matrix_csv(text: &str) -> Result<Network, IngestError> {
    let (labels, rows) = read_square_table(text)?;
    Ok(Network::new(labels, rows)?)
}

fn write_square_table(labels: &[String], rows: impl Iterator<Item = Vec<f64>>) -> String {
    let mut writer = WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .flexible(true)
        .from_writer(Vec::new());
    // Writing to a Vec cannot fail.
    writer.write_record(labels).expect("in-memory write");
    for (label, row) in labels.iter().zip(rows) {
        let record = std::iter::once(label.clone()).chain(row.into_iter().map(format_number));
        writer.write_record(record).expect("in-memory write");
    }
    String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("utf-8 input")
}

pub fn write_matrix_csv(net: &Network) -> String {
    write_square_table(net.labels(), (0..net.len()).map(|i| net.row(i).to_vec()))
}

pub fn read_edge_tsv(text: &str) -> Result<Network, IngestError> {
    if text.trim().is_empty() {
        return Err(IngestError::Empty);
    }
    let mut reader = ReaderBuilder::new()
        .has_headers(false)
        .delimiter(b'\t')
        .flexible(true)
        .trim(Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut labels: Vec<String> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut edges: Vec<(usize, usize, f64, u64)> = Vec::new();
    let mut intern = |label: &str, labels: &mut Vec<String>| {
        *index.entry(label.to_string()).or_insert_with(|| {
            labels.push(label.to_string());
            labels.len() - 1
        })
    };
    for record in reader.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(0, |p| p.line());
        if record.iter().all(str::is_empty) {
            continue;
        }
        if record.len() != 3 {
            return Err(IngestError::RowLength {
                line,
                expected: 3,
                found: record.len(),
            });
        }
        let weight = parse_number(&record[2], line, 3)?;
        let src = intern(&record[0], &mut labels);
        let dst = intern(&record[1], &mut labels);
        if src == dst && weight != 0.0 {
            return Err(IngestError::SelfLoop {
                line,
                label: record[0].to_string(),
                weight,
            });
        }
        edges.push((src, dst, weight, line));
    }
    if labels.is_empty() {
        return Err(IngestError::Empty);
    }
    let n = labels.len();
    let mut dissim = vec![f64::INFINITY; n * n];
    let mut seen = vec![false; n * n];
    for i in 0..n {
        dissim[i * n + i] = 0.0;
    }
    for (src, dst, weight, line) in edges {
        if src == dst {
            continue;
        }
        if std::mem::replace(&mut seen[src * n + dst], true) {
            return Err(IngestError::DuplicateEdge {
                line,
                src: labels[src].clone(),
                dst: labels[dst].clone(),
            });
        }
        dissim[src * n + dst] = weight;
    }
    Ok(Network::from_flat(labels, dissim)?)
}

/// Non-negative flows between labeled nodes; `flow[s][t]` is the amount
/// moving from `s` to `t`.
///
/// The diagonal may be positive (a sector consuming its own output); it
/// counts toward a column's total inflow but never becomes a dissimilarity.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowTable {
    labels: Vec<String>,
    flow: Vec<Vec<f64>>,
}

impl FlowTable {
    pub fn new(labels: Vec<String>, flow: Vec<Vec<f64>>) -> Result<Self, IngestError> {
        let n = labels.len();
        if flow.len() != n || flow.iter().any(|r| r.len() != n) {
            let bad = flow.iter().position(|r| r.len() != n).unwrap_or(flow.len().min(n));
            return Err(NetworkError::DimensionMismatch {
                labels: n,
                rows: flow.len(),
                bad_row: bad,
                bad_len: flow.get(bad).map_or(0, Vec::len),
            }
            .into());
        }
        for (i, row) in flow.iter().enumerate() {
            for (j, &value) in row.iter().enumerate() {
                let (from, to) = (labels[i].clone(), labels[j].clone());
                if value.is_nan() || value.is_infinite() {
                    return Err(IngestError::NonFiniteFlow { from, to, value });
                }
                if value < 0.0 {
                    return Err(IngestError::NegativeFlow { from, to, value });
                }
            }
        }
        Ok(FlowTable { labels, flow })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn flow(&self, from: usize, to: usize) -> f64 {
        self.flow[from][to]
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

pub fn read_flow_csv(text: &str) -> Result<FlowTable, IngestError> {
    let (labels, rows) = read_square_table(text)?;
    FlowTable::new(labels, rows)
}

#[derive(Debug, Clone, PartialEq)]
pub enum FlowWarning {
    /// Nothing flows into this node; its incoming dissimilarities are `inf`.
    ZeroInflow { node: String },
    /// The whole inflow of `to` comes from `from`, so `1 - share` was
    /// replaced by the floor.
    Clamped { from: String, to: String, floor: f64 },
}

impl std::fmt::Display for FlowWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FlowWarning::ZeroInflow { node } => {
                write!(f, "node {node:?} has zero total inflow; incoming dissimilarities set to inf")
            }
            FlowWarning::Clamped { from, to, floor } => write!(
                f,
                "{from:?} supplies the entire inflow of {to:?}; dissimilarity clamped to {floor:?}"
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowTransform {
    pub network: Network,
    pub warnings: Vec<FlowWarning>,
}

/// `A(s, t) = 1 - M(s, t) / sum_i M(i, t)` for `s != t`.
pub fn transform_flow(table: &FlowTable) -> Result<FlowTransform, IngestError> {
    transform_flow_with_floor(table, DEFAULT_FLOW_FLOOR)
}

pub fn transform_flow_with_floor(
    table: &FlowTable,
    floor: f64,
) -> Result<FlowTransform, IngestError> {
    if !(floor > 0.0 && floor < 1.0) {
        return Err(IngestError::BadFloor(floor));
    }
    let n = table.len();
    let mut dissim = vec![0.0; n * n];
    let mut warnings = Vec::new();
    for to in 0..n {
        let total: f64 = (0..n).map(|i| table.flow(i, to)).sum();
        if total == 0.0 {
            warnings.push(FlowWarning::ZeroInflow {
                node: table.labels[to].clone(),
            });
        }
        for from in (0..n).filter(|&s| s != to) {
            dissim[from * n + to] = if total == 0.0 {
                f64::INFINITY
            } else {
                let value = 1.0 - table.flow(from, to) / total;
                if value < floor {
                    warnings.push(FlowWarning::Clamped {
                        from: table.labels[from].clone(),
                        to: table.labels[to].clone(),
                        floor,
                    });
                    floor
                } else {
                    value
                }
            };
        }
    }
    Ok(FlowTransform {
        network: Network::from_flat(table.labels.clone(), dissim)?,
        warnings,
    })
}
