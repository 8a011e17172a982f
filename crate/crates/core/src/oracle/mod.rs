//! Brute-force numeric ground truth for small discrete models.
//!
//! Factor expressions are instantiated with random tables, multiplied out
//! into an explicit joint over every configuration, and queried directly.
//! Everything is exact enumeration in `f64`; the state space is capped at
//! 2^20 configurations.

mod checks;

use std::collections::HashMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use checks::{
    check_conditioning, check_deterministic_elimination, check_directed_simplification, check_equivalence,
    check_global_markov, check_undirected_simplification, shared_by_signature, EquivalenceReport, EquivalenceTarget,
    MarkovOptions, MarkovReport, QueryRecord, Violation,
};

use crate::error::OracleError;
use crate::factorize::{FactorExpression, FactorTerm, TermKind};
use crate::markov::CiQuery;

/// Largest joint the oracle will enumerate.
pub const MAX_STATES: u128 = 1 << 20;
/// Default tolerance for numeric independence checks.
pub const DEFAULT_CI_TOL: f64 = 1e-9;
/// Default tolerance for comparing two models' distributions.
pub const DEFAULT_EQ_TOL: f64 = 1e-12;
/// Deviation at or below which a query counts as numerically independent
/// when probing for dependence.
pub const DEPENDENCE_THRESHOLD: f64 = 1e-6;
/// Potential entries are drawn from this range.
pub const POTENTIAL_RANGE: (f64, f64) = (0.1, 1.0);

/// Dense table over `vars` (indices into an expression's variables), first
/// variable slowest.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub vars: Vec<usize>,
    pub dims: Vec<usize>,
    pub values: Vec<f64>,
}

impl Table {
    fn filled(vars: Vec<usize>, dims: Vec<usize>, mut f: impl FnMut(&[usize]) -> f64) -> Self {
        let mut values = Vec::with_capacity(dims.iter().product());
        for_each_config(&dims, |c| values.push(f(c)));
        Table { vars, dims, values }
    }

    fn local_index(&self, local: &[usize]) -> usize {
        local.iter().zip(&self.dims).fold(0, |acc, (&c, &d)| acc * d + c)
    }

    /// Entry at the configuration `full` (indexed by variable).
    pub fn value(&self, full: &[usize]) -> f64 {
        let idx = self
            .vars
            .iter()
            .zip(&self.dims)
            .fold(0, |acc, (&v, &d)| acc * d + full[v]);
        self.values[idx]
    }
}

/// Calls `f` on every configuration of `dims` in row-major order.
pub fn for_each_config(dims: &[usize], mut f: impl FnMut(&[usize])) {
    if dims.contains(&0) {
        return;
    }
    let mut c = vec![0; dims.len()];
    loop {
        f(&c);
        let mut i = dims.len();
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            c[i] += 1;
            if c[i] < dims[i] {
                break;
            }
            c[i] = 0;
        }
    }
}

/// One table per term of an expression, in term order.
#[derive(Clone, Debug, PartialEq)]
pub struct PotentialAssignment {
    pub tables: Vec<Table>,
}

fn dims_of(e: &FactorExpression, vars: &[usize]) -> Vec<usize> {
    vars.iter().map(|&v| e.vars[v].domain as usize).collect()
}

/// Reproducible random tables for `e`.
pub fn random_assignment(e: &FactorExpression, seed: u64) -> PotentialAssignment {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_assignment_with(e, &mut rng, &HashMap::new())
}

/// Random tables for `e`, except for the terms in `fixed`. Conditional rows
/// are normalized over the head; potentials lie in [`POTENTIAL_RANGE`];
/// delta terms are random functions of their parents. Normalizers are
/// derived from their block's potentials so each block sums to one for
/// every parent configuration.
pub fn random_assignment_with(
    e: &FactorExpression,
    rng: &mut ChaCha8Rng,
    fixed: &HashMap<usize, Table>,
) -> PotentialAssignment {
    let mut tables: Vec<Option<Table>> = Vec::with_capacity(e.terms.len());
    for (i, t) in e.terms.iter().enumerate() {
        if let Some(tab) = fixed.get(&i) {
            tables.push(Some(tab.clone()));
            continue;
        }
        let vars: Vec<usize> = t.vars().collect();
        let dims = dims_of(e, &vars);
        let table = match t.kind {
            TermKind::Conditional | TermKind::Delta => {
                let head_len = t.head.len();
                let head_size: usize = dims[..head_len].iter().product();
                let given_size: usize = dims[head_len..].iter().product();
                let mut values = vec![0.0; head_size * given_size];
                for g in 0..given_size {
                    if t.kind == TermKind::Delta {
                        let h = rng.gen_range(0..head_size);
                        values[h * given_size + g] = 1.0;
                    } else {
                        let row: Vec<f64> = (0..head_size).map(|_| rng.gen_range(0.05..1.0)).collect();
                        let total: f64 = row.iter().sum();
                        for (h, w) in row.into_iter().enumerate() {
                            values[h * given_size + g] = w / total;
                        }
                    }
                }
                Some(Table { vars, dims, values })
            }
            TermKind::Potential => {
                let (lo, hi) = POTENTIAL_RANGE;
                Some(Table::filled(vars, dims, |_| rng.gen_range(lo..=hi)))
            }
            TermKind::Normalizer => None,
        };
        tables.push(table);
    }
    for (i, t) in e.terms.iter().enumerate() {
        if tables[i].is_none() {
            tables[i] = Some(normalizer_table(e, t, &tables));
        }
    }
    PotentialAssignment {
        tables: tables.into_iter().map(|t| t.expect("all terms assigned")).collect(),
    }
}

/// `1 / Σ_{own} Π f` over the potentials of the normalizer's block that
/// live on its arguments and summed variables.
fn normalizer_table(e: &FactorExpression, t: &FactorTerm, tables: &[Option<Table>]) -> Table {
    let scope: Vec<usize> = t.given.iter().chain(&t.sums_over).copied().collect();
    let members: Vec<&Table> = e
        .terms
        .iter()
        .zip(tables)
        .filter(|(p, _)| {
            p.kind == TermKind::Potential && p.group == t.group && p.given.iter().all(|v| scope.contains(v))
        })
        .filter_map(|(_, tab)| tab.as_ref())
        .collect();
    let own_dims = dims_of(e, &t.sums_over);
    let mut full = vec![0; e.vars.len()];
    Table::filled(t.given.clone(), dims_of(e, &t.given), |args| {
        for (&v, &c) in t.given.iter().zip(args) {
            full[v] = c;
        }
        let mut total = 0.0;
        for_each_config(&own_dims, |own| {
            for (&v, &c) in t.sums_over.iter().zip(own) {
                full[v] = c;
            }
            total += members.iter().map(|m| m.value(&full)).product::<f64>();
        });
        1.0 / total
    })
}

/// Explicit joint distribution.
#[derive(Clone, Debug, PartialEq)]
pub struct JointTable {
    pub names: Vec<String>,
    pub dims: Vec<usize>,
    pub probs: Vec<f64>,
}

fn state_space(dims: &[usize]) -> Result<usize, OracleError> {
    let total = dims.iter().try_fold(1u128, |acc, &d| acc.checked_mul(d as u128));
    match total {
        Some(n) if n <= MAX_STATES => Ok(n as usize),
        Some(n) => Err(OracleError::StateSpace(n)),
        None => Err(OracleError::StateSpace(u128::MAX)),
    }
}

/// Pointwise product of all term tables, normalized to sum to one.
pub fn build_joint(e: &FactorExpression, pa: &PotentialAssignment) -> Result<JointTable, OracleError> {
    if pa.tables.len() < e.terms.len() {
        return Err(OracleError::Unassigned(pa.tables.len()));
    }
    let dims: Vec<usize> = e.vars.iter().map(|v| v.domain as usize).collect();
    let size = state_space(&dims)?;
    let mut probs = Vec::with_capacity(size);
    let tables = &pa.tables[..e.terms.len()];
    for_each_config(&dims, |c| {
        probs.push(tables.iter().map(|t| t.value(c)).product::<f64>())
    });
    let total: f64 = probs.iter().sum();
    if !(total > 0.0 && total.is_finite()) {
        return Err(OracleError::ZeroMass);
    }
    probs.iter_mut().for_each(|p| *p /= total);
    Ok(JointTable {
        names: e.vars.iter().map(|v| v.name.clone()).collect(),
        dims,
        probs,
    })
}

impl JointTable {
    pub fn var(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn vars_of<S: AsRef<str>>(&self, names: &[S]) -> Result<Vec<usize>, OracleError> {
        names
            .iter()
            .map(|n| {
                self.var(n.as_ref())
                    .ok_or_else(|| OracleError::UnknownVariable(n.as_ref().into()))
            })
            .collect()
    }

    /// Marginal over `vars`, laid out row-major in the given order.
    pub fn marginal(&self, vars: &[usize]) -> Vec<f64> {
        let sub: Vec<usize> = vars.iter().map(|&v| self.dims[v]).collect();
        let mut out = vec![0.0; sub.iter().product()];
        let mut i = 0;
        for_each_config(&self.dims, |c| {
            let idx = vars.iter().zip(&sub).fold(0, |acc, (&v, &d)| acc * d + c[v]);
            out[idx] += self.probs[i];
            i += 1;
        });
        out
    }

    /// `p(target | given)` over configurations of `target ++ given`
    /// (row-major); `None` where `p(given) = 0`.
    pub fn conditional(&self, target: &[usize], given: &[usize]) -> Vec<Option<f64>> {
        let all: Vec<usize> = target.iter().chain(given).copied().collect();
        let joint = self.marginal(&all);
        let marg = self.marginal(given);
        let given_size = marg.len();
        joint
            .iter()
            .enumerate()
            .map(|(i, &p)| {
                let pg = marg[i % given_size];
                (pg > 0.0).then(|| p / pg)
            })
            .collect()
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CiVerdict {
    pub independent: bool,
    /// Largest `|p(a,b|s) - p(a|s) p(b|s)|` over configurations with
    /// `p(s) > 0`.
    pub max_dev: f64,
}

/// Numeric test of `A ⟂ B | S` on an explicit joint.
pub fn numeric_ci_sets(j: &JointTable, a: &[usize], b: &[usize], s: &[usize], tol: f64) -> CiVerdict {
    let abs: Vec<usize> = a.iter().chain(b).chain(s).copied().collect();
    let p_abs = j.marginal(&abs);
    let size = |vs: &[usize]| vs.iter().map(|&v| j.dims[v]).product::<usize>();
    let (na, nb, ns) = (size(a), size(b), size(s));
    let mut p_as = vec![0.0; na * ns];
    let mut p_bs = vec![0.0; nb * ns];
    let mut p_s = vec![0.0; ns];
    for ia in 0..na {
        for ib in 0..nb {
            for is in 0..ns {
                let p = p_abs[(ia * nb + ib) * ns + is];
                p_as[ia * ns + is] += p;
                p_bs[ib * ns + is] += p;
                p_s[is] += p;
            }
        }
    }
    let mut max_dev: f64 = 0.0;
    for is in 0..ns {
        if p_s[is] <= 0.0 {
            continue;
        }
        for ia in 0..na {
            for ib in 0..nb {
                let lhs = p_abs[(ia * nb + ib) * ns + is] / p_s[is];
                let rhs = (p_as[ia * ns + is] / p_s[is]) * (p_bs[ib * ns + is] / p_s[is]);
                max_dev = max_dev.max((lhs - rhs).abs());
            }
        }
    }
    CiVerdict {
        independent: max_dev <= tol,
        max_dev,
    }
}

/// [`numeric_ci_sets`] for a query whose node ids index the joint's
/// variables (as for expressions built from the queried graph).
pub fn numeric_ci(j: &JointTable, q: &CiQuery, tol: f64) -> CiVerdict {
    let ids = |s: &crate::graph::NodeSet| s.iter().map(|x| x.index()).collect::<Vec<_>>();
    numeric_ci_sets(j, &ids(&q.a), &ids(&q.b), &ids(&q.s), tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factorize::{factorize_chain, factorize_undirected, Variable};
    use crate::graph::fixtures::*;

    fn binary(names: &[&str]) -> Vec<Variable> {
        names
            .iter()
            .map(|n| Variable {
                name: n.to_string(),
                domain: 2,
                observed: false,
            })
            .collect()
    }

    #[test]
    fn seeds_are_reproducible() {
        let e = factorize_chain(&fig2()).unwrap();
        assert_eq!(random_assignment(&e, 7), random_assignment(&e, 7));
        assert_ne!(random_assignment(&e, 7), random_assignment(&e, 8));
    }

    #[test]
    fn conditional_rows_normalized_and_potentials_bounded() {
        let e = factorize_chain(&fig2()).unwrap();
        let pa = random_assignment(&e, 1);
        for (t, tab) in e.terms.iter().zip(&pa.tables) {
            match t.kind {
                TermKind::Conditional => {
                    let given: usize = tab.dims[t.head.len()..].iter().product();
                    for g in 0..given {
                        let s: f64 = tab.values.iter().skip(g).step_by(given).sum();
                        assert!((s - 1.0).abs() <= 1e-12);
                    }
                }
                TermKind::Potential => assert!(tab.values.iter().all(|&v| v >= 0.1)),
                _ => {}
            }
        }
    }

    #[test]
    fn single_conditional_joint() {
        let e = FactorExpression {
            vars: binary(&["x"]),
            terms: vec![FactorTerm::conditional(vec![0], vec![])],
        };
        let pa = PotentialAssignment {
            tables: vec![Table {
                vars: vec![0],
                dims: vec![2],
                values: vec![0.3, 0.7],
            }],
        };
        let j = build_joint(&e, &pa).unwrap();
        assert!((j.probs[0] - 0.3).abs() < 1e-15 && (j.probs[1] - 0.7).abs() < 1e-15);
    }

    #[test]
    fn independence_and_dependence() {
        let e = FactorExpression {
            vars: binary(&["x", "y"]),
            terms: vec![
                FactorTerm::conditional(vec![0], vec![]),
                FactorTerm::conditional(vec![1], vec![]),
            ],
        };
        let j = build_joint(&e, &random_assignment(&e, 3)).unwrap();
        let p = j.marginal(&[0]);
        let q = j.marginal(&[1]);
        assert!((j.probs[3] - p[1] * q[1]).abs() < 1e-15);
        assert!(numeric_ci_sets(&j, &[0], &[1], &[], 1e-9).independent);
        let corr = JointTable {
            names: vec!["x".into(), "y".into()],
            dims: vec![2, 2],
            probs: vec![0.5, 0.0, 0.0, 0.5],
        };
        assert!(!numeric_ci_sets(&corr, &[0], &[1], &[], 1e-9).independent);
    }

    #[test]
    fn fig2_joint_normalized_and_markov() {
        let g = fig2();
        let e = factorize_chain(&g).unwrap();
        let q = CiQuery::new(set(&g, &["a"]), set(&g, &["e"]), set(&g, &["b", "c"])).unwrap();
        for seed in 0..20 {
            let j = build_joint(&e, &random_assignment(&e, seed)).unwrap();
            assert_eq!(j.probs.len(), 256);
            assert!((j.total() - 1.0).abs() < 1e-12);
            assert!(numeric_ci(&j, &q, 1e-9).independent);
        }
    }

    #[test]
    fn normalizer_makes_block_conditional() {
        // the undirected block {e,f,g,h} given {b,c} sums to one for every parent value
        let e = factorize_chain(&fig2()).unwrap();
        let pa = random_assignment(&e, 5);
        let groups: Vec<usize> = e.terms.iter().filter_map(|t| t.group).collect();
        let block = *groups.iter().max().unwrap();
        let own = [4usize, 5, 6, 7];
        let mut full = vec![0; 8];
        for_each_config(&[2, 2], |pc| {
            full[1] = pc[0];
            full[2] = pc[1];
            let mut total = 0.0;
            for_each_config(&[2, 2, 2, 2], |oc| {
                for (v, c) in own.iter().zip(oc) {
                    full[*v] = *c;
                }
                total += e
                    .terms
                    .iter()
                    .zip(&pa.tables)
                    .filter(|(t, _)| t.group == Some(block))
                    .map(|(_, tab)| tab.value(&full))
                    .product::<f64>();
            });
            assert!((total - 1.0).abs() < 1e-12);
        });
    }

    #[test]
    fn state_space_guard() {
        let names: Vec<String> = (0..21).map(|i| format!("x{i}")).collect();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        let g = graph(&refs, &[]);
        let e = factorize_undirected(&g).unwrap();
        let pa = random_assignment(&e, 0);
        assert!(matches!(build_joint(&e, &pa), Err(OracleError::StateSpace(_))));
    }

    #[test]
    fn term_order_irrelevant() {
        let e = factorize_chain(&fig2()).unwrap();
        let pa = random_assignment(&e, 11);
        let j = build_joint(&e, &pa).unwrap();
        let mut rev = e.clone();
        rev.terms.reverse();
        let mut rpa = pa.clone();
        rpa.tables.reverse();
        let j2 = build_joint(&rev, &rpa).unwrap();
        for (x, y) in j.probs.iter().zip(&j2.probs) {
            assert!((x - y).abs() < 1e-15);
        }
    }
}
