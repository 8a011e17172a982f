use std::collections::{BTreeSet, HashMap};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{
    build_joint, for_each_config, numeric_ci, random_assignment_with, JointTable, Table, DEFAULT_CI_TOL,
    DEFAULT_EQ_TOL, DEPENDENCE_THRESHOLD,
};
use crate::error::{GraphError, OracleError};
use crate::factorize::{
    condition_expression_hidden, eliminate_deterministic, factorize_chain, factorize_directed, factorize_undirected,
    FactorExpression, TermKind,
};
use crate::graph::{ChainGraph, NodeId, NodeSet};
use crate::markov::{
    implies_ci, implies_ci_directed, simplify_conditional_directed, simplify_conditional_undirected, CiQuery,
    UndirectedGraph,
};

/// Largest graph the global Markov sweep accepts.
pub const MAX_SWEEP_NODES: usize = 8;

fn trial_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Clone, Copy, Debug)]
pub struct MarkovOptions {
    pub trials: usize,
    pub seed: u64,
    pub tol: f64,
}

impl Default for MarkovOptions {
    fn default() -> Self {
        MarkovOptions {
            trials: 20,
            seed: 42,
            tol: DEFAULT_CI_TOL,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct QueryRecord {
    pub query: String,
    /// Graph-level answer.
    pub implied: bool,
    /// Numeric verdict per trial at the sweep tolerance.
    pub verdicts: Vec<bool>,
    pub max_dev: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Violation {
    pub query: String,
    pub trial: usize,
    pub seed: u64,
    pub deviation: f64,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct MarkovReport {
    pub trials: usize,
    pub queries: Vec<QueryRecord>,
    /// Queries implied by the graph but numerically violated.
    pub violations: Vec<Violation>,
    /// Queries not implied by the graph that no trial showed dependent.
    pub completeness_warnings: Vec<String>,
    /// Directed graphs only: queries where the chain-graph route and the
    /// directed moralization route disagree.
    pub route_mismatches: Vec<String>,
}

impl MarkovReport {
    pub fn is_sound(&self) -> bool {
        self.violations.is_empty() && self.route_mismatches.is_empty()
    }
}

/// Every query `a ⟂ b | S` over distinct singletons `a < b` and every `S`
/// drawn from the remaining nodes.
fn singleton_queries(g: &ChainGraph) -> Vec<CiQuery> {
    let n = g.len();
    let mut out = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            let rest: Vec<usize> = (0..n).filter(|&x| x != a && x != b).collect();
            for mask in 0u32..(1 << rest.len()) {
                let s: NodeSet = rest
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask & (1 << i) != 0)
                    .map(|(_, &x)| NodeId::from_index(x))
                    .collect();
                let one = |x| [NodeId::from_index(x)].into_iter().collect();
                out.push(CiQuery::new(one(a), one(b), s).expect("disjoint singletons"));
            }
        }
    }
    out
}

/// Checks every graph-implied independence of `g` numerically against the
/// joint of its component factorization under random tables. Trials run in
/// parallel on the current rayon pool and merge in trial order.
pub fn check_global_markov(g: &ChainGraph, opts: MarkovOptions) -> Result<MarkovReport, OracleError> {
    if g.len() > MAX_SWEEP_NODES {
        return Err(OracleError::TooManyNodes(g.len()));
    }
    let e = factorize_chain(g)?;
    let queries = singleton_queries(g);
    let implied = queries
        .iter()
        .map(|q| implies_ci(g, q))
        .collect::<Result<Vec<bool>, GraphError>>()?;
    let mut report = MarkovReport {
        trials: opts.trials,
        ..Default::default()
    };
    if g.is_directed() {
        for (q, &ans) in queries.iter().zip(&implied) {
            if implies_ci_directed(g, q)? != ans {
                report.route_mismatches.push(q.display(g).to_string());
            }
        }
    }
    let devs: Vec<Vec<f64>> = (0..opts.trials)
        .into_par_iter()
        .map(|t| -> Result<Vec<f64>, OracleError> {
            let pa = random_assignment_with(&e, &mut trial_rng(opts.seed, t as u64), &HashMap::new());
            let j = build_joint(&e, &pa)?;
            Ok(queries.iter().map(|q| numeric_ci(&j, q, opts.tol).max_dev).collect())
        })
        .collect::<Result<_, _>>()?;
    for (qi, q) in queries.iter().enumerate() {
        let text = q.display(g).to_string();
        let per_trial: Vec<f64> = devs.iter().map(|d| d[qi]).collect();
        let max_dev = per_trial.iter().copied().fold(0.0, f64::max);
        if implied[qi] {
            for (t, &d) in per_trial.iter().enumerate() {
                if d > opts.tol {
                    report.violations.push(Violation {
                        query: text.clone(),
                        trial: t,
                        seed: opts.seed,
                        deviation: d,
                    });
                }
            }
        } else if max_dev <= DEPENDENCE_THRESHOLD {
            report.completeness_warnings.push(text.clone());
        }
        report.queries.push(QueryRecord {
            query: text,
            implied: implied[qi],
            verdicts: per_trial.iter().map(|&d| d <= opts.tol).collect(),
            max_dev,
        });
    }
    Ok(report)
}

/// What [`check_equivalence`] compares, by variable name.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EquivalenceTarget {
    Joint,
    Marginal(Vec<String>),
    Conditional { target: Vec<String>, given: Vec<String> },
}

#[derive(Clone, Debug, Serialize)]
pub struct EquivalenceReport {
    pub trials: usize,
    pub max_diff: f64,
    pub tol: f64,
}

impl EquivalenceReport {
    pub fn equivalent(&self) -> bool {
        self.max_diff <= self.tol
    }

    fn merge(diffs: impl IntoIterator<Item = f64>, trials: usize) -> Self {
        EquivalenceReport {
            trials,
            max_diff: diffs.into_iter().fold(0.0, f64::max),
            tol: DEFAULT_EQ_TOL,
        }
    }
}

type NameSignature = (TermKind, BTreeSet<String>, BTreeSet<String>);

fn name_signature(e: &FactorExpression, i: usize) -> NameSignature {
    let t = &e.terms[i];
    let names = |vs: &[usize]| vs.iter().map(|&v| e.vars[v].name.clone()).collect();
    (t.kind, names(&t.head), names(&t.given))
}

/// Pairs of terms of `e1` and `e2` with the same kind and the same named
/// head and conditioning sets. Normalizers are never shared; they are
/// derived from the potentials of their block.
pub fn shared_by_signature(e1: &FactorExpression, e2: &FactorExpression) -> Vec<(usize, usize)> {
    let mut used = vec![false; e2.terms.len()];
    let mut out = Vec::new();
    for i in 0..e1.terms.len() {
        if e1.terms[i].kind == TermKind::Normalizer {
            continue;
        }
        let sig = name_signature(e1, i);
        if let Some(j) = (0..e2.terms.len()).find(|&j| !used[j] && name_signature(e2, j) == sig) {
            used[j] = true;
            out.push((i, j));
        }
    }
    out
}

/// Re-expresses `tab` (over `from` variables) over the variables of term
/// `j` of `to`, matching variables by name.
fn transfer(tab: &Table, from: &FactorExpression, to: &FactorExpression, j: usize) -> Result<Table, OracleError> {
    let vars: Vec<usize> = to.terms[j].vars().collect();
    let src: Vec<usize> = tab
        .vars
        .iter()
        .map(|&v| {
            let name = &from.vars[v].name;
            vars.iter()
                .position(|&w| &to.vars[w].name == name)
                .ok_or_else(|| OracleError::UnknownVariable(name.clone()))
        })
        .collect::<Result<_, _>>()?;
    let dims: Vec<usize> = vars.iter().map(|&v| to.vars[v].domain as usize).collect();
    let mut local = vec![0; tab.vars.len()];
    Ok(Table::filled(vars, dims, |c| {
        for (k, &p) in src.iter().enumerate() {
            local[k] = c[p];
        }
        tab.values[tab.local_index(&local)]
    }))
}

fn quantity(j: &JointTable, target: &EquivalenceTarget) -> Result<Vec<Option<f64>>, OracleError> {
    Ok(match target {
        EquivalenceTarget::Joint => {
            let mut names = j.names.clone();
            names.sort();
            j.marginal(&j.vars_of(&names)?).into_iter().map(Some).collect()
        }
        EquivalenceTarget::Marginal(names) => j.marginal(&j.vars_of(names)?).into_iter().map(Some).collect(),
        EquivalenceTarget::Conditional { target, given } => j.conditional(&j.vars_of(target)?, &j.vars_of(given)?),
    })
}

fn max_diff(a: &[Option<f64>], b: &[Option<f64>]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter()
        .zip(b)
        .map(|(x, y)| match (x, y) {
            (Some(x), Some(y)) => (x - y).abs(),
            (None, None) => 0.0,
            _ => f64::INFINITY,
        })
        .fold(0.0, f64::max)
}

/// Instantiates `e1` randomly and `e2` with the `shared` term pairs copied
/// from `e1` (the rest drawn independently), then compares `target` in the
/// two joints.
pub fn check_equivalence(
    e1: &FactorExpression,
    e2: &FactorExpression,
    shared: &[(usize, usize)],
    target: &EquivalenceTarget,
    trials: usize,
    seed: u64,
) -> Result<EquivalenceReport, OracleError> {
    for &(i, j) in shared {
        if i >= e1.terms.len() || j >= e2.terms.len() {
            return Err(OracleError::Unassigned(i.max(j)));
        }
        if name_signature(e1, i) != name_signature(e2, j) {
            return Err(OracleError::SignatureMismatch(i, j));
        }
    }
    let diffs = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<f64, OracleError> {
            let pa1 = random_assignment_with(e1, &mut trial_rng(seed, 2 * t as u64), &HashMap::new());
            let mut fixed = HashMap::new();
            for &(i, j) in shared {
                fixed.insert(j, transfer(&pa1.tables[i], e1, e2, j)?);
            }
            let pa2 = random_assignment_with(e2, &mut trial_rng(seed, 2 * t as u64 + 1), &fixed);
            let q1 = quantity(&build_joint(e1, &pa1)?, target)?;
            let q2 = quantity(&build_joint(e2, &pa2)?, target)?;
            Ok(max_diff(&q1, &q2))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(EquivalenceReport::merge(diffs, trials))
}

fn names(g: &ChainGraph, set: &NodeSet) -> Vec<String> {
    g.names_of(set).into_iter().map(String::from).collect()
}

fn hidden_and_observed(g: &ChainGraph) -> (Vec<String>, Vec<String>) {
    let obs = g.observed();
    let hidden: NodeSet = g.ids().filter(|x| !obs.contains(x)).collect();
    (names(g, &hidden), names(g, &obs))
}

/// Directed conditional simplification: `p(hidden | observed)` of `g` and
/// of its simplification agree with shared conditional tables.
pub fn check_directed_simplification(
    g: &ChainGraph,
    trials: usize,
    seed: u64,
) -> Result<EquivalenceReport, OracleError> {
    let simple = simplify_conditional_directed(g)?;
    let e1 = factorize_directed(g)?;
    let e2 = factorize_directed(&simple)?;
    let (target, given) = hidden_and_observed(g);
    if target.is_empty() {
        return Ok(EquivalenceReport::merge([], trials));
    }
    let shared = shared_by_signature(&e1, &e2);
    check_equivalence(
        &e1,
        &e2,
        &shared,
        &EquivalenceTarget::Conditional { target, given },
        trials,
        seed,
    )
}

/// Undirected conditional simplification: every maximal clique of `g` with
/// an unobserved node must survive as a clique of the simplified graph and
/// keeps its potential there; fully observed cliques are dropped and the
/// simplified graph's remaining cliques get independent potentials. The
/// conditional `p(hidden | observed)` must agree.
pub fn check_undirected_simplification(
    g: &ChainGraph,
    trials: usize,
    seed: u64,
) -> Result<EquivalenceReport, OracleError> {
    let simple = simplify_conditional_undirected(g)?;
    let e1 = factorize_undirected(g)?;
    let e2 = factorize_undirected(&simple)?;
    let (target, given) = hidden_and_observed(g);
    if target.is_empty() {
        return Ok(EquivalenceReport::merge([], trials));
    }
    let observed = g.observed();
    let skeleton = UndirectedGraph::skeleton(&simple, &simple.all_nodes());
    let is_clique = |c: &[usize]| {
        c.iter().enumerate().all(|(i, &a)| {
            c[i + 1..]
                .iter()
                .all(|&b| skeleton.has_edge(NodeId::from_index(a), NodeId::from_index(b)))
        })
    };
    // node order is preserved by the simplification, so indices agree
    let carried: Vec<usize> = (0..e1.terms.len())
        .filter(|&i| {
            let t = &e1.terms[i];
            t.kind == TermKind::Potential && t.given.iter().any(|&v| !observed.contains(&NodeId::from_index(v)))
        })
        .collect();
    for &i in &carried {
        if !is_clique(&e1.terms[i].given) {
            return Ok(EquivalenceReport {
                trials,
                max_diff: f64::INFINITY,
                tol: DEFAULT_EQ_TOL,
            });
        }
    }
    let mut home: HashMap<usize, Vec<usize>> = HashMap::new();
    for &i in &carried {
        let c: BTreeSet<usize> = e1.terms[i].given.iter().copied().collect();
        let k = (0..e2.terms.len())
            .find(|&k| e2.terms[k].kind == TermKind::Potential && c.iter().all(|v| e2.terms[k].given.contains(v)))
            .expect("every clique lies in a maximal clique");
        home.entry(k).or_default().push(i);
    }
    let target = EquivalenceTarget::Conditional { target, given };
    let diffs = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<f64, OracleError> {
            let pa1 = random_assignment_with(&e1, &mut trial_rng(seed, 2 * t as u64), &HashMap::new());
            let mut fixed = HashMap::new();
            for (&k, members) in &home {
                let vars = e2.terms[k].given.clone();
                let dims: Vec<usize> = vars.iter().map(|&v| e2.vars[v].domain as usize).collect();
                let mut full = vec![0; e2.vars.len()];
                let tab = Table::filled(vars.clone(), dims, |c| {
                    for (&v, &x) in vars.iter().zip(c) {
                        full[v] = x;
                    }
                    members.iter().map(|&i| pa1.tables[i].value(&full)).product()
                });
                fixed.insert(k, tab);
            }
            let pa2 = random_assignment_with(&e2, &mut trial_rng(seed, 2 * t as u64 + 1), &fixed);
            let q1 = quantity(&build_joint(&e1, &pa1)?, &target)?;
            let q2 = quantity(&build_joint(&e2, &pa2)?, &target)?;
            Ok(max_diff(&q1, &q2))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(EquivalenceReport::merge(diffs, trials))
}

/// Own variables of each undirected block, keyed by block, by name.
fn block_members(e: &FactorExpression) -> HashMap<usize, BTreeSet<String>> {
    e.terms
        .iter()
        .filter(|t| t.kind == TermKind::Normalizer)
        .filter_map(|t| Some((t.group?, t.sums_over.iter().map(|&v| e.vars[v].name.clone()).collect())))
        .collect()
}

/// Deterministic-node elimination: the marginal of `g`'s joint on its
/// stochastic nodes equals the joint of the eliminated graph when every
/// surviving table is the original one with the deterministic functions it
/// reads composed in.
pub fn check_deterministic_elimination(
    g: &ChainGraph,
    trials: usize,
    seed: u64,
) -> Result<EquivalenceReport, OracleError> {
    let reduced = eliminate_deterministic(g)?;
    let e1 = factorize_chain(g)?;
    let e2 = factorize_chain(&reduced)?;
    let det_order: Vec<usize> = crate::decompose::topological_order(g, &g.all_nodes())
        .into_iter()
        .filter(|&x| g.attr(x).is_deterministic())
        .map(|x| x.index())
        .collect();
    let to_orig: Vec<usize> = e2
        .vars
        .iter()
        .map(|v| e1.var_index(&v.name).expect("surviving node"))
        .collect();
    let delta_of: HashMap<usize, usize> = e1
        .terms
        .iter()
        .enumerate()
        .filter(|(_, t)| t.kind == TermKind::Delta)
        .map(|(i, t)| (t.head[0], i))
        .collect();
    let head_names = |e: &FactorExpression, i: usize| -> BTreeSet<String> {
        e.terms[i].head.iter().map(|&v| e.vars[v].name.clone()).collect()
    };

    // which e1 terms feed each e2 term
    let (blocks1, blocks2) = (block_members(&e1), block_members(&e2));
    let mut sources: Vec<Vec<usize>> = vec![Vec::new(); e2.terms.len()];
    for (i, t) in e1.terms.iter().enumerate() {
        match t.kind {
            TermKind::Conditional => {
                let k = (0..e2.terms.len())
                    .find(|&k| e2.terms[k].kind == TermKind::Conditional && head_names(&e2, k) == head_names(&e1, i))
                    .ok_or(OracleError::Unassigned(i))?;
                sources[k].push(i);
            }
            TermKind::Potential => {
                let own = &blocks1[&t.group.expect("potentials belong to a block")];
                let group = blocks2.iter().find(|(_, m)| *m == own).map(|(&gk, _)| gk);
                // the composed potential lives on the first clique of the block covering its inputs
                let support = det_support(g, t.given.iter().copied());
                let k = (0..e2.terms.len())
                    .find(|&k| {
                        let u = &e2.terms[k];
                        u.kind == TermKind::Potential
                            && u.group == group
                            && support.iter().all(|v| u.given.iter().any(|&w| to_orig[w] == *v))
                    })
                    .ok_or(OracleError::Unassigned(i))?;
                sources[k].push(i);
            }
            TermKind::Delta | TermKind::Normalizer => {}
        }
    }
    let target = EquivalenceTarget::Marginal(e2.vars.iter().map(|v| v.name.clone()).collect());
    let diffs = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<f64, OracleError> {
            let pa1 = random_assignment_with(&e1, &mut trial_rng(seed, 2 * t as u64), &HashMap::new());
            let mut fixed = HashMap::new();
            for (k, term) in e2.terms.iter().enumerate() {
                if term.kind == TermKind::Normalizer {
                    continue;
                }
                let vars: Vec<usize> = term.vars().collect();
                let dims: Vec<usize> = vars.iter().map(|&v| e2.vars[v].domain as usize).collect();
                let mut full = vec![0; e1.vars.len()];
                fixed.insert(
                    k,
                    Table::filled(vars.clone(), dims, |c| {
                        full.iter_mut().for_each(|x| *x = 0);
                        for (&v, &x) in vars.iter().zip(c) {
                            full[to_orig[v]] = x;
                        }
                        for &d in &det_order {
                            let tab = &pa1.tables[delta_of[&d]];
                            full[d] = 0;
                            while tab.value(&full) < 0.5 {
                                full[d] += 1;
                            }
                        }
                        sources[k].iter().map(|&i| pa1.tables[i].value(&full)).product()
                    }),
                );
            }
            let pa2 = random_assignment_with(&e2, &mut trial_rng(seed, 2 * t as u64 + 1), &fixed);
            let q1 = quantity(&build_joint(&e1, &pa1)?, &target)?;
            let q2 = quantity(&build_joint(&e2, &pa2)?, &target)?;
            Ok(max_diff(&q1, &q2))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(EquivalenceReport::merge(diffs, trials))
}

/// Stochastic variables feeding `vars`: deterministic members are replaced,
/// recursively, by their parents.
fn det_support(g: &ChainGraph, vars: impl Iterator<Item = usize>) -> BTreeSet<usize> {
    let mut out = BTreeSet::new();
    let mut stack: Vec<usize> = vars.collect();
    while let Some(v) = stack.pop() {
        let id = NodeId::from_index(v);
        if g.attr(id).is_deterministic() {
            stack.extend(g.parents_of(id).iter().map(|p| p.index()));
        } else {
            out.insert(v);
        }
    }
    out
}

/// Symbolic conditioning: `Σ_H N / Σ_{T,H} N` evaluated from the kept terms
/// equals `p(T | rest)` of the full joint.
pub fn check_conditioning(
    e: &FactorExpression,
    target: &[usize],
    hidden: &[usize],
    trials: usize,
    seed: u64,
) -> Result<EquivalenceReport, OracleError> {
    let ce = condition_expression_hidden(e, target, hidden)?;
    let rest: Vec<usize> = (0..e.vars.len())
        .filter(|v| !target.contains(v) && !hidden.contains(v))
        .collect();
    let dim = |v: &usize| e.vars[*v].domain as usize;
    let tdims: Vec<usize> = target.iter().map(dim).collect();
    let hdims: Vec<usize> = hidden.iter().map(dim).collect();
    let rdims: Vec<usize> = rest.iter().map(dim).collect();
    let diffs = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<f64, OracleError> {
            let pa = random_assignment_with(e, &mut trial_rng(seed, t as u64), &HashMap::new());
            let j = build_joint(e, &pa)?;
            let exact = j.conditional(target, &rest);
            let kept: Vec<&Table> = ce.kept.iter().map(|&i| &pa.tables[i]).collect();
            let mut full = vec![0; e.vars.len()];
            let mut symbolic = Vec::with_capacity(exact.len());
            let numer = |full: &mut Vec<usize>| {
                let mut s = 0.0;
                for_each_config(&hdims, |hc| {
                    for (&v, &x) in hidden.iter().zip(hc) {
                        full[v] = x;
                    }
                    s += kept.iter().map(|tab| tab.value(full)).product::<f64>();
                });
                s
            };
            for_each_config(&tdims, |tc| {
                for_each_config(&rdims, |rc| {
                    for (&v, &x) in rest.iter().zip(rc) {
                        full[v] = x;
                    }
                    let mut denom = 0.0;
                    for_each_config(&tdims, |tc2| {
                        for (&v, &x) in target.iter().zip(tc2) {
                            full[v] = x;
                        }
                        denom += numer(&mut full);
                    });
                    for (&v, &x) in target.iter().zip(tc) {
                        full[v] = x;
                    }
                    let num = numer(&mut full);
                    symbolic.push((denom > 0.0).then(|| num / denom));
                });
            });
            Ok(max_diff(&exact, &symbolic))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(EquivalenceReport::merge(diffs, trials))
}
