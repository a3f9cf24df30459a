//! Machine-readable run reports and DOT export.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;

use crate::building::Chamber;
use crate::twin::{OppositionGraph, TwinBuilding};

pub const SCHEMA_VERSION: u32 = 1;

/// One verdict with its witnesses.
#[derive(Debug, Clone, Serialize)]
pub struct CheckVerdict {
    pub name: String,
    pub passed: bool,
    pub detail: Value,
}

/// The JSON report of one CLI run. It holds no timings, so equal inputs give
/// byte-identical reports.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub tool: String,
    pub version: String,
    pub command: Vec<String>,
    pub config: serde_json::Map<String, Value>,
    pub checks: Vec<CheckVerdict>,
    pub passed: bool,
}

impl RunReport {
    pub fn new(command: Vec<String>) -> Self {
        RunReport {
            schema_version: SCHEMA_VERSION,
            tool: "twinbuild".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command,
            config: serde_json::Map::new(),
            checks: Vec::new(),
            passed: true,
        }
    }

    pub fn config(&mut self, key: &str, value: impl Serialize) {
        self.config.insert(
            key.to_string(),
            serde_json::to_value(value).expect("serializable config"),
        );
    }

    pub fn check(&mut self, name: impl Into<String>, passed: bool, detail: impl Serialize) {
        self.passed &= passed;
        self.checks.push(CheckVerdict {
            name: name.into(),
            passed,
            detail: serde_json::to_value(detail).expect("serializable detail"),
        });
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable report");
        s.push('\n');
        s
    }
}

/// An undirected graph in DOT with nodes and edges in the given order.
pub fn dot_graph(
    name: &str,
    nodes: &[(String, String)],
    edges: &[(String, String, Option<String>)],
) -> String {
    let mut out = format!("graph \"{name}\" {{\n");
    for (id, label) in nodes {
        writeln!(out, "  \"{id}\" [label=\"{label}\"];").unwrap();
    }
    for (a, b, label) in edges {
        match label {
            Some(l) => writeln!(out, "  \"{a}\" -- \"{b}\" [label=\"{l}\"];").unwrap(),
            None => writeln!(out, "  \"{a}\" -- \"{b}\";").unwrap(),
        }
    }
    out.push_str("}\n");
    out
}

/// The graph on `c^{op(k)}`, nodes coloured by component.
pub fn opposition_dot(t: &TwinBuilding, g: &OppositionGraph) -> String {
    let mut comp_of = std::collections::HashMap::new();
    for (i, comp) in g.components.iter().enumerate() {
        for &v in comp {
            comp_of.insert(v, i);
        }
    }
    let sign = g.center.sign.flip();
    let nodes: Vec<(String, String)> = g
        .vertices
        .iter()
        .map(|&v: &Chamber| (format!("{sign}{v}"), format!("{sign}{v} [{}]", comp_of[&v])))
        .collect();
    let edges: Vec<(String, String, Option<String>)> = t
        .opposition_edges(g)
        .into_iter()
        .map(|(a, b, s)| {
            (
                format!("{sign}{a}"),
                format!("{sign}{b}"),
                Some(format!("s{}", s + 1)),
            )
        })
        .collect();
    dot_graph(&format!("op{}({})", g.k, g.center), &nodes, &edges)
}
