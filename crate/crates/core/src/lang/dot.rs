use std::fmt::Write as _;

use crate::graph::{ChainGraph, EdgeKind, NodeId};
use crate::plates::PlateModel;

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    out
}

fn node_line(g: &ChainGraph, v: NodeId, pad: &str) -> String {
    let attr = g.attr(v);
    let mut opts = Vec::new();
    if attr.observed {
        opts.push("style=filled");
    }
    if attr.is_deterministic() {
        opts.push("peripheries=2");
    }
    if opts.is_empty() {
        format!("{pad}{};\n", quote(g.name(v)))
    } else {
        format!("{pad}{} [{}];\n", quote(g.name(v)), opts.join(", "))
    }
}

pub fn graph_to_dot(g: &ChainGraph, name: &str) -> String {
    to_dot(&PlateModel::unplated(g.clone()), name)
}

/// DOT digraph: undirected edges with `dir=none`, observed nodes filled,
/// deterministic nodes with a double border, one cluster per plate labelled
/// with its cardinality symbol. A node appears in the cluster of the
/// deepest plate containing it.
pub fn to_dot(m: &PlateModel, name: &str) -> String {
    let g = &m.graph;
    let home: Vec<Option<usize>> = g
        .ids()
        .map(|v| m.plates_of(v).into_iter().max_by_key(|&p| m.depth(p)))
        .collect();
    let mut out = format!("digraph {} {{\n", quote(name));
    for v in g.ids() {
        if home[v.index()].is_none() {
            out.push_str(&node_line(g, v, "  "));
        }
    }
    fn cluster(m: &PlateModel, home: &[Option<usize>], p: usize, depth: usize, out: &mut String) {
        let pad = "  ".repeat(depth);
        let plate = &m.plates[p];
        let _ = writeln!(out, "{pad}subgraph {} {{", quote(&format!("cluster_{}", plate.name)));
        let _ = writeln!(out, "{pad}  label={};", quote(&plate.cardinality_symbol));
        for v in m.graph.ids() {
            if home[v.index()] == Some(p) {
                out.push_str(&node_line(&m.graph, v, &format!("{pad}  ")));
            }
        }
        for (c, child) in m.plates.iter().enumerate() {
            if child.parent == Some(p) {
                cluster(m, home, c, depth + 1, out);
            }
        }
        let _ = writeln!(out, "{pad}}}");
    }
    for (p, plate) in m.plates.iter().enumerate() {
        if plate.parent.is_none() {
            cluster(m, &home, p, 1, &mut out);
        }
    }
    for e in g.edges() {
        let _ = write!(out, "  {} -> {}", quote(g.name(e.from)), quote(g.name(e.to)));
        out.push_str(match e.kind {
            EdgeKind::Directed => ";\n",
            EdgeKind::Undirected => " [dir=none];\n",
        });
    }
    out.push_str("}\n");
    out
}
