use std::fmt::Write as _;

use super::ast::{Attr, ModelAst, Stmt};
use crate::graph::{ChainGraph, EdgeKind};

fn arrow(kind: EdgeKind) -> &'static str {
    match kind {
        EdgeKind::Directed => "->",
        EdgeKind::Undirected => "--",
    }
}

/// Canonical text of an AST: two-space indentation, one declaration per
/// line. Re-parsing the output yields the same AST up to spans.
pub fn print_ast(ast: &ModelAst) -> String {
    fn stmts(out: &mut String, s: &[Stmt], depth: usize) {
        let pad = "  ".repeat(depth);
        for st in s {
            match st {
                Stmt::Node(n) => {
                    out.push_str(&pad);
                    for a in &n.attrs {
                        out.push_str(match a {
                            Attr::Det => "det ",
                            Attr::Obs => "obs ",
                        });
                    }
                    let _ = write!(out, "node {}", n.name.name);
                    if let Some(d) = n.domain {
                        let _ = write!(out, "[{d}]");
                    }
                    out.push_str(";\n");
                }
                Stmt::Edge(e) => {
                    let _ = writeln!(out, "{pad}{} {} {};", e.from.name, arrow(e.kind), e.to.name);
                }
                Stmt::Plate(p) => {
                    let _ = writeln!(out, "{pad}plate {} [{}] {{", p.name.name, p.symbol.name);
                    stmts(out, &p.body, depth + 1);
                    let _ = writeln!(out, "{pad}}}");
                }
            }
        }
    }
    let mut out = format!("model {} {{\n", ast.name.name);
    stmts(&mut out, &ast.stmts, 1);
    out.push_str("}\n");
    out
}

/// Model file for a plain graph: node declarations in canonical order, then
/// edges in declaration order. Node names must be valid identifiers.
pub fn print_graph(g: &ChainGraph, name: &str) -> String {
    let mut out = format!("model {name} {{\n");
    for node in g.nodes() {
        out.push_str("  ");
        if node.attr.is_deterministic() {
            out.push_str("det ");
        }
        if node.attr.observed {
            out.push_str("obs ");
        }
        let _ = write!(out, "node {}", node.name);
        if let Some(d) = node.attr.domain_size {
            let _ = write!(out, "[{d}]");
        }
        out.push_str(";\n");
    }
    for e in g.edges() {
        let _ = writeln!(out, "  {} {} {};", g.name(e.from), arrow(e.kind), g.name(e.to));
    }
    out.push_str("}\n");
    out
}
