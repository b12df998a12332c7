//! Text exports: DOT for quasi-partitions, JSON for quasi-dendrograms and
//! cuts. All output is deterministic for identical input.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::dendrogram::{DendrogramError, EdgeEvent, MergeEvent, QuasiDendrogram};
use crate::partition::QuasiPartition;

#[derive(Debug, thiserror::Error)]
pub enum ExportError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unknown label {0:?}")]
    UnknownLabel(String),
    #[error(transparent)]
    Dendrogram(#[from] DendrogramError),
}

#[derive(Debug, Serialize, Deserialize)]
struct MergeJson {
    delta: f64,
    members: Vec<Vec<String>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct EdgeJson {
    delta: f64,
    from_rep: String,
    to_rep: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct DendrogramJson {
    labels: Vec<String>,
    merges: Vec<MergeJson>,
    edges: Vec<EdgeJson>,
    /// `null` when the network is not strongly connected.
    max_resolution: Option<f64>,
    strongly_connected: bool,
}

pub fn dendrogram_to_json(d: &QuasiDendrogram) -> String {
    let labels = d.labels();
    let names = |block: &Vec<usize>| block.iter().map(|&i| labels[i].clone()).collect();
    let doc = DendrogramJson {
        labels: labels.to_vec(),
        merges: d
            .merges()
            .iter()
            .map(|m| MergeJson {
                delta: m.delta,
                members: m.blocks.iter().map(names).collect(),
            })
            .collect(),
        edges: d
            .edge_events()
            .iter()
            .map(|e| EdgeJson {
                delta: e.delta,
                from_rep: labels[e.from].clone(),
                to_rep: labels[e.to].clone(),
            })
            .collect(),
        max_resolution: d.max_resolution().is_finite().then_some(d.max_resolution()),
        strongly_connected: d.strongly_connected(),
    };
    let mut out = serde_json::to_string_pretty(&doc).expect("plain data serializes");
    out.push('\n');
    out
}

/// Parses and validates a quasi-dendrogram document.
pub fn dendrogram_from_json(text: &str) -> Result<QuasiDendrogram, ExportError> {
    let doc: DendrogramJson = serde_json::from_str(text)?;
    let index = |label: &str| {
        doc.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| ExportError::UnknownLabel(label.to_string()))
    };
    let merges = doc
        .merges
        .iter()
        .map(|m| {
            let blocks = m
                .members
                .iter()
                .map(|b| {
                    let mut ids = b.iter().map(|l| index(l)).collect::<Result<Vec<_>, _>>()?;
                    ids.sort_unstable();
                    Ok(ids)
                })
                .collect::<Result<Vec<_>, ExportError>>()?;
            Ok(MergeEvent {
                delta: m.delta,
                blocks,
            })
        })
        .collect::<Result<Vec<_>, ExportError>>()?;
    let edges = doc
        .edges
        .iter()
        .map(|e| {
            Ok(EdgeEvent {
                delta: e.delta,
                from: index(&e.from_rep)?,
                to: index(&e.to_rep)?,
            })
        })
        .collect::<Result<Vec<_>, ExportError>>()?;
    Ok(QuasiDendrogram::new(
        doc.labels.clone(),
        merges,
        edges,
        doc.max_resolution.unwrap_or(f64::INFINITY),
        doc.strongly_connected,
    )?)
}

#[derive(Debug, Serialize)]
struct CutJson<'a> {
    delta: f64,
    blocks: Vec<Vec<&'a str>>,
    /// Edges as pairs of block indices, transitively closed.
    edges: Vec<(usize, usize)>,
    reduced_edges: Vec<(usize, usize)>,
}

pub fn cut_to_json(p: &QuasiPartition, labels: &[String], delta: f64) -> String {
    let doc = CutJson {
        delta,
        blocks: p
            .blocks()
            .iter()
            .map(|b| b.iter().map(|&i| labels[i].as_str()).collect())
            .collect(),
        edges: p.edges().iter().copied().collect(),
        reduced_edges: p.transitive_reduction(),
    };
    let mut out = serde_json::to_string_pretty(&doc).expect("plain data serializes");
    out.push('\n');
    out
}

/// `node,block` rows.
pub fn cut_to_csv(p: &QuasiPartition, labels: &[String]) -> String {
    let mut out = String::from("node,block\n");
    for (i, label) in labels.iter().enumerate() {
        let _ = writeln!(out, "{},{}", quote_csv(label), p.block_of(i));
    }
    out
}

fn quote_csv(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn quote_dot(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// One cluster subgraph per block in canonical order. Arrows run between
/// block representatives; with `reduced`, only the transitive reduction is
/// drawn.
pub fn export_dot(p: &QuasiPartition, labels: &[String], reduced: bool) -> String {
    let mut out = String::from("digraph quasi_partition {\n  compound=true;\n  node [shape=circle];\n");
    for (b, members) in p.blocks().iter().enumerate() {
        let _ = writeln!(out, "  subgraph cluster_{b} {{");
        let _ = writeln!(out, "    label={};", quote_dot(&format!("B{}", b + 1)));
        for &m in members {
            let _ = writeln!(out, "    {};", quote_dot(&labels[m]));
        }
        out.push_str("  }\n");
    }
    let arrows: Vec<(usize, usize)> = if reduced {
        p.transitive_reduction()
    } else {
        p.edges().iter().copied().collect()
    };
    for (a, b) in arrows {
        let _ = writeln!(
            out,
            "  {} -> {} [ltail=cluster_{a}, lhead=cluster_{b}];",
            quote_dot(&labels[p.representative(a)]),
            quote_dot(&labels[p.representative(b)]),
        );
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dendrogram::{cut_at, upsilon};
    use crate::network::{check_quasi_ultrametric, Network};

    fn fig2() -> Network {
        Network::from_rows(vec![
            vec![0.0, 1.0, 3.0],
            vec![2.0, 0.0, 3.0],
            vec![2.0, 1.0, 0.0],
        ])
        .unwrap()
    }

    fn arrows(dot: &str) -> usize {
        dot.matches(" -> ").count()
    }

    #[test]
    fn singletons_without_edges() {
        let labels: Vec<String> = vec!["a".into(), "b".into(), "c".into()];
        let dot = export_dot(&QuasiPartition::discrete(3), &labels, false);
        assert_eq!(dot.matches("subgraph cluster_").count(), 3);
        assert_eq!(arrows(&dot), 0);
    }

    #[test]
    fn fig2_cut_between_two_and_three() {
        let u = check_quasi_ultrametric(fig2()).unwrap();
        let p = cut_at(&u, 2.5).unwrap();
        let dot = export_dot(&p, u.labels(), false);
        assert_eq!(dot.matches("subgraph cluster_").count(), 2);
        assert_eq!(arrows(&dot), 1);
        assert!(dot.contains("\"x3\" -> \"x1\" [ltail=cluster_1, lhead=cluster_0];"));
    }

    #[test]
    fn reduced_chain_has_fewer_arrows() {
        let labels: Vec<String> = vec!["a".into(), "b".into(), "c".into()];
        let p = QuasiPartition::new(3, vec![vec![0], vec![1], vec![2]], [(0, 1), (1, 2), (0, 2)])
            .unwrap();
        assert_eq!(arrows(&export_dot(&p, &labels, true)), 2);
        assert_eq!(arrows(&export_dot(&p, &labels, false)), 3);
    }

    #[test]
    fn dendrogram_json_schema_and_round_trip() {
        let d = upsilon(&check_quasi_ultrametric(fig2()).unwrap());
        let text = dendrogram_to_json(&d);
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(value["labels"], serde_json::json!(["x1", "x2", "x3"]));
        assert_eq!(
            value["merges"][0],
            serde_json::json!({"delta": 2.0, "members": [["x1"], ["x2"]]})
        );
        assert_eq!(
            value["edges"][2],
            serde_json::json!({"delta": 2.0, "from_rep": "x3", "to_rep": "x1"})
        );
        assert_eq!(value["max_resolution"], serde_json::json!(3.0));
        assert_eq!(value["strongly_connected"], serde_json::json!(true));
        assert_eq!(dendrogram_from_json(&text).unwrap(), d);
    }

    #[test]
    fn disconnected_json_uses_null() {
        let u = check_quasi_ultrametric(
            Network::from_rows(vec![vec![0.0, 1.0], vec![f64::INFINITY, 0.0]]).unwrap(),
        )
        .unwrap();
        let d = upsilon(&u);
        let text = dendrogram_to_json(&d);
        assert!(text.contains("\"max_resolution\": null"));
        assert_eq!(dendrogram_from_json(&text).unwrap(), d);
    }

    #[test]
    fn json_rejects_unknown_labels_and_invalid_events() {
        let text = r#"{"labels":["a","b"],"merges":[],"edges":[{"delta":1,"from_rep":"a","to_rep":"z"}],"max_resolution":null,"strongly_connected":false}"#;
        assert!(matches!(dendrogram_from_json(text), Err(ExportError::UnknownLabel(_))));
        let text = r#"{"labels":["a","b"],"merges":[],"edges":[],"max_resolution":1.0,"strongly_connected":true}"#;
        assert!(matches!(dendrogram_from_json(text), Err(ExportError::Dendrogram(_))));
    }

    #[test]
    fn cut_csv_quotes_labels() {
        let labels: Vec<String> = vec!["a,b".into(), "c".into()];
        let csv = cut_to_csv(&QuasiPartition::discrete(2), &labels);
        assert_eq!(csv, "node,block\n\"a,b\",0\nc,1\n");
    }
}
