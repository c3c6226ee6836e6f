//! JSON file formats.
//!
//! Graph files hold an array of
//! `{"n": int, "directed": bool, "source": int|null, "edges": [[u, v, w], ...]}`
//! where `w` is a string holding the exact weight (`"1/3"`, `"1"`, `"0.5"`).
//! Undirected edges are listed once. Distribution files hold an array of
//! `{"n": int, "probs": [[...], ...]}`.

use std::io::{Read, Write};

use num_rational::Ratio;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphRecord {
    pub n: usize,
    pub directed: bool,
    pub source: Option<usize>,
    pub edges: Vec<(usize, usize, String)>,
}

impl From<Graph> for GraphRecord {
    fn from(g: Graph) -> GraphRecord {
        GraphRecord {
            n: g.n(),
            directed: g.is_directed(),
            source: g.source(),
            edges: g.edge_list().into_iter().map(|(u, v, w)| (u, v, format_weight(w))).collect(),
        }
    }
}

impl TryFrom<GraphRecord> for Graph {
    type Error = Error;

    fn try_from(r: GraphRecord) -> Result<Graph> {
        let edges = r.edges.iter().map(|(u, v, w)| Ok((*u, *v, parse_weight(w)?))).collect::<Result<Vec<_>>>()?;
        Graph::from_edges(r.n, r.directed, r.source, &edges)
    }
}

pub fn format_weight(w: Ratio<u64>) -> String {
    w.to_string()
}

/// Parses `"p/q"`, an integer, or a finite decimal such as `"0.25"`.
pub fn parse_weight(s: &str) -> Result<Ratio<u64>> {
    let bad = || Error::ParseWeight(s.to_string());
    let s = s.trim();
    let w = if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || frac.len() > 18 || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let int: u64 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
        let scale = 10u64.pow(frac.len() as u32);
        let frac: u64 = frac.parse().map_err(|_| bad())?;
        let numer = int.checked_mul(scale).and_then(|x| x.checked_add(frac)).ok_or_else(bad)?;
        Ratio::new(numer, scale)
    } else {
        s.parse::<Ratio<u64>>().map_err(|_| bad())?
    };
    if *w.numer() == 0 {
        return Err(bad());
    }
    Ok(w)
}

pub fn read_json<T: DeserializeOwned, R: Read>(reader: R) -> std::result::Result<T, serde_json::Error> {
    serde_json::from_reader(reader)
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize, W: Write>(mut writer: W, value: &T) -> std::io::Result<()> {
    serde_json::to_writer_pretty(&mut writer, value)?;
    writer.write_all(b"\n")
}

/// Serializes rows as CSV with a header line.
pub fn to_csv<T: Serialize>(rows: &[T]) -> std::result::Result<String, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
