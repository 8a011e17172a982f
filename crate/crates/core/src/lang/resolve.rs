use std::collections::HashMap;

use super::ast::{Attr, ModelAst, Stmt};
use super::diagnostics::{Diagnostic, DiagnosticKind, SourceSpan};
use crate::error::{GraphError, PlateError};
use crate::graph::{
    validate_chain_graph, ChainGraphBuilder, Edge, NodeAttr, NodeKind, ValidationIssue, ValidationWarning,
};
use crate::plates::{validate_plates, Plate, PlateModel};

/// A resolved model with the source spans of its declarations.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub name: String,
    pub model: PlateModel,
    pub warnings: Vec<Diagnostic>,
    pub node_spans: Vec<SourceSpan>,
    pub edge_spans: Vec<SourceSpan>,
}

fn pair_key(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

fn err(kind: DiagnosticKind, msg: impl Into<String>, span: SourceSpan) -> Diagnostic {
    Diagnostic::error(kind, msg, span)
}

/// Resolves names, builds the graph and plates, and validates both.
pub fn resolve(ast: &ModelAst) -> Result<Resolved, Vec<Diagnostic>> {
    let mut diags = Vec::new();
    let mut warnings = Vec::new();
    let mut b = ChainGraphBuilder::new();
    let mut node_spans = Vec::new();
    let mut plates: Vec<Plate> = Vec::new();
    let mut plate_spans: Vec<SourceSpan> = Vec::new();
    let mut plate_index: HashMap<usize, usize> = HashMap::new();

    ast.walk(|stmt, stack| match stmt {
        Stmt::Plate(p) => {
            let parent = stack.last().map(|q| plate_index[&q.span.start]);
            if plates.iter().any(|x| x.name == p.name.name) {
                diags.push(err(
                    DiagnosticKind::Resolve,
                    format!("duplicate plate `{}`", p.name.name),
                    p.name.span,
                ));
            }
            plate_index.insert(p.span.start, plates.len());
            plates.push(Plate {
                name: p.name.name.clone(),
                cardinality_symbol: p.symbol.name.clone(),
                members: Default::default(),
                parent,
            });
            plate_spans.push(p.span);
        }
        Stmt::Node(n) => {
            let mut attr = NodeAttr::stochastic();
            for (i, a) in n.attrs.iter().enumerate() {
                if n.attrs[..i].contains(a) {
                    warnings.push(Diagnostic::warning(
                        DiagnosticKind::Resolve,
                        format!("repeated attribute on `{}`", n.name.name),
                        n.span,
                    ));
                }
                match a {
                    Attr::Det => attr.kind = NodeKind::Deterministic,
                    Attr::Obs => attr = attr.observed(true),
                }
            }
            if let Some(d) = n.domain {
                match u32::try_from(d) {
                    Ok(d) => attr = attr.with_domain(d),
                    Err(_) => {
                        diags.push(err(
                            DiagnosticKind::Resolve,
                            format!("domain size {d} of `{}` is too large", n.name.name),
                            n.span,
                        ));
                        return;
                    }
                }
            }
            match b.add_node(&n.name.name, attr) {
                Ok(id) => {
                    node_spans.push(n.name.span);
                    for q in stack {
                        plates[plate_index[&q.span.start]].members.insert(id);
                    }
                }
                Err(e) => diags.push(err(DiagnosticKind::Resolve, e.to_string(), n.name.span)),
            }
        }
        Stmt::Edge(_) => {}
    });

    let mut edge_spans = Vec::new();
    let mut pair_span: HashMap<(String, String), SourceSpan> = HashMap::new();
    ast.walk(|stmt, _| {
        let Stmt::Edge(e) = stmt else { return };
        let mut lookup = |id: &super::ast::Ident| {
            let r = b.node_id(&id.name);
            if r.is_none() {
                diags.push(err(
                    DiagnosticKind::Resolve,
                    format!("unknown node `{}`", id.name),
                    id.span,
                ));
            }
            r
        };
        let (from, to) = (lookup(&e.from), lookup(&e.to));
        let (Some(from), Some(to)) = (from, to) else { return };
        match b.add_edge(Edge { kind: e.kind, from, to }) {
            Ok(()) => {
                edge_spans.push(e.span);
                pair_span.insert(pair_key(&e.from.name, &e.to.name), e.span);
            }
            Err(GraphError::DuplicateEdge(..)) => diags.push(err(
                DiagnosticKind::Resolve,
                format!("duplicate edge between `{}` and `{}`", e.from.name, e.to.name),
                e.span,
            )),
            Err(x) => diags.push(err(DiagnosticKind::Resolve, x.to_string(), e.span)),
        }
    });
    if !diags.is_empty() {
        return Err(diags);
    }

    let graph = b.build();
    let node_span = |n: &str| graph.node_id(n).map(|id| node_spans[id.index()]);
    let edge_span = |a: &str, c: &str| pair_span.get(&pair_key(a, c)).copied();
    let report = validate_chain_graph(&graph);
    for issue in &report.errors {
        let span = match issue {
            ValidationIssue::IntraComponentArc { from, to, .. } => edge_span(from, to),
            ValidationIssue::SemiDirectedCycle { cycle } => cycle
                .iter()
                .zip(cycle.iter().cycle().skip(1))
                .find_map(|(a, c)| edge_span(a, c)),
            ValidationIssue::DeterministicWithoutParents { node } => node_span(node),
        };
        diags.push(err(DiagnosticKind::Graph, issue.to_string(), span.unwrap_or(ast.span)));
    }
    for w in &report.warnings {
        let ValidationWarning::DeterministicObserved { node } = w;
        warnings.push(Diagnostic::warning(
            DiagnosticKind::Graph,
            w.to_string(),
            node_span(node).unwrap_or(ast.span),
        ));
    }
    let model = PlateModel { graph, plates };
    for e in validate_plates(&model) {
        let span = match &e {
            PlateError::UndirectedCrossing(a, c) | PlateError::ArcLeavesPlate(a, c) => edge_span(a, c),
            PlateError::NameCollision(n) | PlateError::InconsistentMembership { node: n, .. } => {
                model.graph.node_id(n).map(|id| node_spans[id.index()])
            }
            PlateError::DuplicatePlate(n) | PlateError::NestingCycle(n) => {
                model.plates.iter().position(|p| &p.name == n).map(|i| plate_spans[i])
            }
            _ => None,
        };
        diags.push(err(DiagnosticKind::Plate, e.to_string(), span.unwrap_or(ast.span)));
    }
    if !diags.is_empty() {
        return Err(diags);
    }
    Ok(Resolved {
        name: ast.name.name.clone(),
        model,
        warnings,
        node_spans,
        edge_spans,
    })
}
