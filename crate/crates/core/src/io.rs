//! Text formats: edge lists, matrix JSON and step-graphon JSON.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{FpcError, Result};
use crate::graph::Graph;
use crate::graphon::StepGraphon;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EdgeListOptions {
    /// Node count; defaults to one more than the largest index seen.
    pub nodes: Option<usize>,
    /// Store every edge in both directions.
    pub undirected: bool,
}

fn parse_err<T>(line: usize, message: impl Into<String>) -> Result<T> {
    Err(FpcError::Parse {
        line,
        message: message.into(),
    })
}

/// Parses `i j [w]` lines. `#` starts a comment, blank lines are skipped and
/// the weight defaults to 1. A repeated pair must repeat its weight.
pub fn parse_edge_list(text: &str, opts: EdgeListOptions) -> Result<Graph> {
    let mut edges: HashMap<(usize, usize), (f64, usize)> = HashMap::new();
    let mut order = Vec::new();
    let mut max_index = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if !(2..=3).contains(&fields.len()) {
            return parse_err(line_no, format!("expected 'i j [w]', found {} fields", fields.len()));
        }
        let node = |s: &str| {
            s.parse::<usize>()
                .or_else(|_| parse_err(line_no, format!("'{s}' is not a non-negative integer node index")))
        };
        let (i, j) = (node(fields[0])?, node(fields[1])?);
        let w = match fields.get(2) {
            Some(s) => match s.parse::<f64>() {
                Ok(w) if w.is_finite() => w,
                _ => return parse_err(line_no, format!("'{s}' is not a finite weight")),
            },
            None => 1.0,
        };
        max_index = Some(max_index.unwrap_or(0).max(i).max(j));
        let pairs: &[(usize, usize)] = if opts.undirected && i != j {
            &[(i, j), (j, i)]
        } else {
            &[(i, j)]
        };
        for &pair in pairs {
            match edges.get(&pair) {
                Some(&(prev, first)) if prev != w => {
                    return parse_err(
                        line_no,
                        format!(
                            "edge {} {} has weight {prev} on line {first} and {w} here",
                            pair.0, pair.1
                        ),
                    )
                }
                Some(_) => {}
                None => {
                    edges.insert(pair, (w, line_no));
                    order.push(pair);
                }
            }
        }
    }
    let inferred = max_index.map_or(0, |m| m + 1);
    let n = match opts.nodes {
        Some(n) if n < inferred => {
            return parse_err(0, format!("node index {} out of range for {n} nodes", inferred - 1))
        }
        Some(n) => n,
        None if inferred == 0 => return parse_err(0, "edge list has no edges; give the node count"),
        None => inferred,
    };
    let triples: Vec<(usize, usize, f64)> = order.iter().map(|&(i, j)| (i, j, edges[&(i, j)].0)).collect();
    Graph::from_edges(n, &triples)
}

/// `{"n": int, "weights": [[...], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub n: usize,
    pub weights: Vec<Vec<f64>>,
}

impl MatrixJson {
    pub fn from_graph(g: &Graph) -> Self {
        MatrixJson {
            n: g.n(),
            weights: g.to_rows(),
        }
    }

    pub fn into_graph(self) -> Result<Graph> {
        if self.weights.len() != self.n || self.weights.iter().any(|r| r.len() != self.n) {
            return Err(FpcError::Parse {
                line: 0,
                message: format!("weights must be a {0}x{0} matrix", self.n),
            });
        }
        Graph::from_rows(&self.weights)
    }
}

fn json_err(e: serde_json::Error) -> FpcError {
    FpcError::Parse {
        line: e.line(),
        message: e.to_string(),
    }
}

pub fn parse_matrix_json(text: &str) -> Result<Graph> {
    serde_json::from_str::<MatrixJson>(text).map_err(json_err)?.into_graph()
}

/// Matrix JSON when the text opens with `{`, an edge list otherwise.
pub fn parse_graph(text: &str, opts: EdgeListOptions) -> Result<Graph> {
    if text.trim_start().starts_with('{') {
        let g = parse_matrix_json(text)?;
        if opts.undirected && !g.is_symmetric() {
            return Err(FpcError::Parameter("matrix input is not symmetric".into()));
        }
        Ok(g)
    } else {
        parse_edge_list(text, opts)
    }
}

pub fn read_graph(path: &Path, opts: EdgeListOptions) -> Result<Graph> {
    parse_graph(&std::fs::read_to_string(path)?, opts)
}

pub fn parse_graphon(text: &str) -> Result<StepGraphon> {
    serde_json::from_str(text).map_err(|e| match e.classify() {
        // validation failures surface as data errors
        serde_json::error::Category::Data => FpcError::Parameter(e.to_string()),
        _ => json_err(e),
    })
}

pub fn read_graphon(path: &Path) -> Result<StepGraphon> {
    parse_graphon(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::complete;

    #[test]
    fn edge_list_basics() {
        let g = parse_edge_list("# triangle\n0 1\n1 2 2.5\n\n2 0 # back\n", EdgeListOptions::default()).unwrap();
        assert_eq!(g.n(), 3);
        assert_eq!(g.weight(0, 1), 1.0);
        assert_eq!(g.weight(1, 2), 2.5);
        assert_eq!(g.weight(2, 0), 1.0);
        assert_eq!(g.weight(1, 0), 0.0);
    }

    #[test]
    fn undirected_and_node_count() {
        let opts = EdgeListOptions {
            nodes: Some(4),
            undirected: true,
        };
        let g = parse_edge_list("0 1\n1 2\n2 0\n1 0\n", opts).unwrap();
        assert_eq!(g.n(), 4);
        assert!(g.is_symmetric());
        let empty = parse_edge_list(
            "# nothing\n",
            EdgeListOptions {
                nodes: Some(2),
                undirected: false,
            },
        )
        .unwrap();
        assert_eq!(empty.n(), 2);
        assert!(parse_edge_list("", EdgeListOptions::default()).is_err());
        assert!(parse_edge_list(
            "0 5\n",
            EdgeListOptions {
                nodes: Some(3),
                undirected: false
            }
        )
        .is_err());
    }

    #[test]
    fn errors_carry_line_numbers() {
        for (text, line) in [
            ("0 1\na b\n", 2),
            ("0 1 2 3\n", 1),
            ("\n\n0 1 x\n", 3),
            ("0 -1\n", 1),
            ("0 1 inf\n", 1),
        ] {
            match parse_edge_list(text, EdgeListOptions::default()) {
                Err(FpcError::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?} gave {other:?}"),
            }
        }
        match parse_edge_list("0 1 1\n0 1 2\n", EdgeListOptions::default()) {
            Err(FpcError::Parse { line, message }) => {
                assert_eq!(line, 2);
                assert!(message.contains("line 1"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn matrix_json_round_trip() {
        let g = complete(3);
        let text = serde_json::to_string(&MatrixJson::from_graph(&g)).unwrap();
        assert_eq!(parse_graph(&text, EdgeListOptions::default()).unwrap(), g);
        assert!(parse_matrix_json(r#"{"n": 2, "weights": [[0, 1]]}"#).is_err());
        assert!(matches!(
            parse_matrix_json("{\n\"n\": 2,\n oops"),
            Err(FpcError::Parse { line: 3, .. })
        ));
    }

    #[test]
    fn graphon_json() {
        let w = parse_graphon(r#"{"k": 2, "c": 1, "values": [[0, 1], [1, 0]]}"#).unwrap();
        assert_eq!(w.k(), 2);
        assert!(matches!(
            parse_graphon(r#"{"k": 2, "c": 1, "values": [[0, 1], [0, 0]]}"#),
            Err(FpcError::Parameter(_))
        ));
        assert!(matches!(parse_graphon("{"), Err(FpcError::Parse { .. })));
    }
}
