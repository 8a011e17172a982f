//! Symbolic factorizations of directed, undirected and chain graphs.
//!
//! A [`FactorExpression`] carries its own variable table (names, domain
//! sizes, shading) so it can be rendered or evaluated without the graph it
//! came from. Term order is canonical: component subgraphs in master-graph
//! order, nodes of a directed block in topological order, and potentials of
//! an undirected block in order of the earliest declared edge they cover.

mod determinism;
pub(crate) mod render;

use std::collections::BTreeSet;

pub use determinism::eliminate_deterministic;
pub use render::{render, render_conditioned, Format};

use crate::decompose::{component_subgraphs, conditional_subgraphs, topological_order, ConditionalSubgraph, Flavor};
use crate::error::GraphError;
use crate::graph::{ChainGraph, NodeId, NodeSet};
use crate::markov::{max_cliques, UndirectedGraph};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TermKind {
    /// `p(head | given)`.
    Conditional,
    /// Clique potential `f_k(given)`.
    Potential,
    /// Per-component normalizer `f_Y(given)`; over no variables it is the
    /// partition-function placeholder `Z^-1`.
    Normalizer,
    /// Point mass of a deterministic node on a function of its parents.
    Delta,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FactorTerm {
    pub kind: TermKind,
    /// Variable indices of the head (empty for potentials and normalizers).
    pub head: Vec<usize>,
    /// Conditioning variables, or the arguments of a potential/normalizer.
    pub given: Vec<usize>,
    /// `f_0`, `f_1`, ... for potentials and normalizers, `Z` for the global
    /// normalizer, empty otherwise.
    pub label: String,
    /// Undirected block the term belongs to (potentials and normalizers).
    pub group: Option<usize>,
    /// For normalizers: the block variables summed out.
    pub sums_over: Vec<usize>,
}

impl FactorTerm {
    pub fn conditional(head: Vec<usize>, given: Vec<usize>) -> Self {
        FactorTerm {
            kind: TermKind::Conditional,
            head,
            given,
            label: String::new(),
            group: None,
            sums_over: Vec::new(),
        }
    }

    pub fn delta(head: usize, given: Vec<usize>) -> Self {
        FactorTerm {
            kind: TermKind::Delta,
            ..Self::conditional(vec![head], given)
        }
    }

    pub fn potential(label: String, args: Vec<usize>, group: usize) -> Self {
        FactorTerm {
            kind: TermKind::Potential,
            head: Vec::new(),
            given: args,
            label,
            group: Some(group),
            sums_over: Vec::new(),
        }
    }

    pub fn normalizer(label: String, args: Vec<usize>, group: usize, sums_over: Vec<usize>) -> Self {
        FactorTerm {
            kind: TermKind::Normalizer,
            head: Vec::new(),
            given: args,
            label,
            group: Some(group),
            sums_over,
        }
    }

    /// All variables the term depends on, head first.
    pub fn vars(&self) -> impl Iterator<Item = usize> + '_ {
        self.head.iter().chain(&self.given).copied()
    }

    pub fn mentions(&self, v: usize) -> bool {
        self.head.contains(&v) || self.given.contains(&v)
    }

    /// Kind plus variable sets; two terms with the same signature denote the
    /// same kind of function of the same variables.
    pub fn signature(&self) -> (TermKind, BTreeSet<usize>, BTreeSet<usize>) {
        (
            self.kind,
            self.head.iter().copied().collect(),
            self.given.iter().copied().collect(),
        )
    }

    fn remap(mut self, map: impl Fn(usize) -> usize) -> Self {
        self.head = self.head.into_iter().map(&map).collect();
        self.given = self.given.into_iter().map(&map).collect();
        self.sums_over = self.sums_over.into_iter().map(&map).collect();
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Variable {
    pub name: String,
    pub domain: u32,
    pub observed: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FactorExpression {
    pub vars: Vec<Variable>,
    pub terms: Vec<FactorTerm>,
}

impl FactorExpression {
    fn for_graph(g: &ChainGraph) -> Self {
        FactorExpression {
            vars: g
                .nodes()
                .iter()
                .map(|n| Variable {
                    name: n.name.clone(),
                    domain: n.attr.domain(),
                    observed: n.attr.observed,
                })
                .collect(),
            terms: Vec::new(),
        }
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v.name == name)
    }

    pub fn free_vars(&self) -> Vec<usize> {
        (0..self.vars.len()).filter(|&i| !self.vars[i].observed).collect()
    }

    pub fn given_vars(&self) -> Vec<usize> {
        (0..self.vars.len()).filter(|&i| self.vars[i].observed).collect()
    }

    pub fn render(&self, format: Format) -> String {
        render(self, format)
    }
}

/// Hands out potential labels: `f_0` goes to the first normalizer with
/// arguments, potentials count up from `f_1`.
#[derive(Debug)]
struct Labeler {
    next: usize,
    zero_used: bool,
}

impl Labeler {
    fn new() -> Self {
        Labeler {
            next: 1,
            zero_used: false,
        }
    }

    fn normalizer(&mut self) -> String {
        if self.zero_used {
            self.potential()
        } else {
            self.zero_used = true;
            "f_0".to_string()
        }
    }

    fn potential(&mut self) -> String {
        let l = format!("f_{}", self.next);
        self.next += 1;
        l
    }
}

const GLOBAL_NORMALIZER: &str = "Z";

/// One conditional term per node (delta terms for deterministic nodes),
/// nodes ordered by weakly connected block, then topologically.
pub fn factorize_directed(g: &ChainGraph) -> Result<FactorExpression, GraphError> {
    if !g.is_directed() {
        return Err(GraphError::NotDirected);
    }
    let mut e = FactorExpression::for_graph(g);
    for block in component_subgraphs(g).blocks() {
        e.terms.extend(directed_terms(g, block));
    }
    Ok(e)
}

fn directed_terms(g: &ChainGraph, own: &NodeSet) -> Vec<FactorTerm> {
    topological_order(g, own)
        .into_iter()
        .map(|x| {
            let given: Vec<usize> = g.parents_of(x).iter().map(|p| p.index()).collect();
            if g.attr(x).is_deterministic() {
                FactorTerm::delta(x.index(), given)
            } else {
                FactorTerm::conditional(vec![x.index()], given)
            }
        })
        .collect()
}

/// One potential per maximal clique plus the global normalizer.
pub fn factorize_undirected(g: &ChainGraph) -> Result<FactorExpression, GraphError> {
    if !g.is_undirected() {
        return Err(GraphError::NotUndirected);
    }
    let mut e = FactorExpression::for_graph(g);
    let all = g.all_nodes();
    e.terms = undirected_terms(g, &all, &NodeSet::new(), 0, &mut Labeler::new(), false)?;
    Ok(e)
}

/// Maximal cliques of `g` (undirected) ordered by the earliest edge they
/// contain; each clique's variables are listed in order of first appearance
/// along its edges. Isolated nodes come last as singleton cliques.
pub(crate) fn ordered_cliques(g: &ChainGraph) -> Result<Vec<Vec<NodeId>>, GraphError> {
    let skeleton = UndirectedGraph::skeleton(g, &g.all_nodes());
    let cliques = max_cliques(&skeleton)?;
    let edges = g.edges();
    let mut keyed: Vec<(usize, Vec<NodeId>)> = cliques
        .into_vec()
        .into_iter()
        .map(|c| {
            let mut order = Vec::new();
            let mut key = None;
            for (rank, e) in edges.iter().enumerate() {
                if c.contains(&e.from) && c.contains(&e.to) {
                    key.get_or_insert(rank);
                    for x in [e.from, e.to] {
                        if !order.contains(&x) {
                            order.push(x);
                        }
                    }
                }
            }
            for &x in &c {
                if !order.contains(&x) {
                    order.push(x);
                }
            }
            let key = key.unwrap_or(edges.len() + order[0].index());
            (key, order)
        })
        .collect();
    keyed.sort();
    Ok(keyed.into_iter().map(|(_, c)| c).collect())
}

/// Terms for the undirected block `own` of `g` with shaded `parents`. `g` is
/// the block's completed local graph. With `collapse`, a parentless block
/// that is a single clique is written as one joint term `p(U)`.
fn undirected_terms(
    g: &ChainGraph,
    own: &NodeSet,
    parents: &NodeSet,
    group: usize,
    labels: &mut Labeler,
    collapse: bool,
) -> Result<Vec<FactorTerm>, GraphError> {
    let cliques = ordered_cliques(g)?;
    let own_vars: Vec<usize> = own.iter().map(|x| x.index()).collect();
    if collapse && parents.is_empty() && cliques.len() == 1 {
        return Ok(vec![FactorTerm::conditional(own_vars, Vec::new())]);
    }
    let mut terms = Vec::new();
    if !parents.is_empty() {
        let args = parents.iter().map(|x| x.index()).collect();
        terms.push(FactorTerm::normalizer(
            labels.normalizer(),
            args,
            group,
            own_vars.clone(),
        ));
    }
    for c in cliques {
        if c.iter().all(|x| parents.contains(x)) {
            // absorbed by the normalizer over the parents
            continue;
        }
        let args = c.iter().map(|x| x.index()).collect();
        terms.push(FactorTerm::potential(labels.potential(), args, group));
    }
    if parents.is_empty() {
        terms.push(FactorTerm::normalizer(
            GLOBAL_NORMALIZER.to_string(),
            Vec::new(),
            group,
            own_vars,
        ));
    }
    Ok(terms)
}

fn conditional_terms(
    sub: &ConditionalSubgraph,
    group: usize,
    labels: &mut Labeler,
) -> Result<Vec<FactorTerm>, GraphError> {
    let own = sub.local_set(&sub.own_nodes);
    let parents = sub.local_set(&sub.parent_nodes);
    match sub.flavor {
        Flavor::Directed => Ok(directed_terms(&sub.graph, &own)),
        Flavor::Undirected => undirected_terms(&sub.graph, &own, &parents, group, labels, true),
    }
}

/// Factorization of one conditional subgraph, over the subgraph's own
/// variables: conditionals for the unshaded nodes of a directed block; for an
/// undirected block a normalizer over the parents and one potential per
/// clique not contained in the parents.
pub fn factorize_conditional(sub: &ConditionalSubgraph) -> Result<FactorExpression, GraphError> {
    let mut e = FactorExpression::for_graph(&sub.graph);
    e.terms = conditional_terms(sub, 0, &mut Labeler::new())?;
    Ok(e)
}

/// Component factorization of a chain graph: the conditional factorizations
/// of its component subgraphs, in master-graph order.
pub fn factorize_chain(g: &ChainGraph) -> Result<FactorExpression, GraphError> {
    let subs = conditional_subgraphs(g)?;
    let mut e = FactorExpression::for_graph(g);
    let mut labels = Labeler::new();
    for (group, sub) in subs.iter().enumerate() {
        for t in conditional_terms(sub, group, &mut labels)? {
            e.terms.push(t.remap(|v| sub.origin[v].index()));
        }
    }
    Ok(e)
}

/// `e` conditioned on `target`, with `hidden` variables summed out and every
/// other variable given:
///
/// `p(T | rest) = Σ_H N / Σ_{T,H} N`
///
/// where `N` keeps only the terms mentioning a target or hidden variable;
/// the rest are constant in the summed variables and cancel.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConditionedExpression {
    pub vars: Vec<Variable>,
    pub target: Vec<usize>,
    pub hidden: Vec<usize>,
    /// Indices into the source expression's terms.
    pub kept: Vec<usize>,
    pub numerator: Vec<FactorTerm>,
}

pub fn condition_expression(e: &FactorExpression, target: &[usize]) -> Result<ConditionedExpression, GraphError> {
    condition_expression_hidden(e, target, &[])
}

pub fn condition_expression_hidden(
    e: &FactorExpression,
    target: &[usize],
    hidden: &[usize],
) -> Result<ConditionedExpression, GraphError> {
    let n = e.vars.len();
    if target.is_empty() {
        return Err(GraphError::Query("conditioning target is empty".into()));
    }
    if target.iter().chain(hidden).any(|&v| v >= n) {
        return Err(GraphError::UnknownNodeId);
    }
    if target.iter().any(|v| hidden.contains(v)) {
        return Err(GraphError::Query("target and hidden sets overlap".into()));
    }
    let summed: Vec<usize> = target.iter().chain(hidden).copied().collect();
    let kept: Vec<usize> = (0..e.terms.len())
        .filter(|&i| summed.iter().any(|&v| e.terms[i].mentions(v)))
        .collect();
    Ok(ConditionedExpression {
        vars: e.vars.clone(),
        target: target.to_vec(),
        hidden: hidden.to_vec(),
        numerator: kept.iter().map(|&i| e.terms[i].clone()).collect(),
        kept,
    })
}
