//! Plates: replicated sub-structures of a chain graph.
//!
//! A [`PlateModel`] is a template graph plus a forest of plates. Each plate
//! has a cardinality symbol bound at expansion time by a [`Binding`]; a
//! nested plate may take a different cardinality per instance of its parent
//! (ragged nesting). Ground copies of a plated node are named
//! `base_i_j...` with 1-based indices, outermost plate first.

use std::collections::{BTreeMap, HashMap};

use crate::error::{GraphError, PlateError};
use crate::factorize::render::{latex_ident, render_term};
use crate::factorize::{factorize_chain, FactorExpression, FactorTerm, Format};
use crate::graph::{ChainGraph, ChainGraphBuilder, Edge, EdgeKind, NodeId, NodeSet};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Plate {
    pub name: String,
    pub cardinality_symbol: String,
    pub members: NodeSet,
    /// Index of the enclosing plate.
    pub parent: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct PlateModel {
    pub graph: ChainGraph,
    pub plates: Vec<Plate>,
}

/// Index tuple of one ground copy: `(plate, 1-based index)` pairs in plate
/// order.
pub type IndexTuple = Vec<(usize, usize)>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Cardinality {
    Uniform(usize),
    /// One count per instance of the enclosing plate, in instance order.
    PerParentIndex(Vec<usize>),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Binding {
    map: BTreeMap<String, Cardinality>,
}

impl Binding {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, symbol: &str, c: Cardinality) -> &mut Self {
        self.map.insert(symbol.to_string(), c);
        self
    }

    pub fn uniform(mut self, symbol: &str, n: usize) -> Self {
        self.set(symbol, Cardinality::Uniform(n));
        self
    }

    pub fn ragged(mut self, symbol: &str, counts: Vec<usize>) -> Self {
        self.set(symbol, Cardinality::PerParentIndex(counts));
        self
    }

    pub fn get(&self, symbol: &str) -> Option<&Cardinality> {
        self.map.get(symbol)
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Parses `SYM=INT` or `SYM=INT,INT,...`.
    pub fn parse_assignment(&mut self, text: &str) -> Result<(), String> {
        let (sym, vals) = text
            .split_once('=')
            .ok_or_else(|| format!("expected SYM=INT[,INT...], got `{text}`"))?;
        let sym = sym.trim();
        if sym.is_empty() {
            return Err(format!("missing symbol in `{text}`"));
        }
        let counts = vals
            .split(',')
            .map(|v| {
                v.trim()
                    .parse::<usize>()
                    .map_err(|e| format!("bad count `{v}` in `{text}`: {e}"))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let c = match counts.as_slice() {
            [n] => Cardinality::Uniform(*n),
            _ => Cardinality::PerParentIndex(counts),
        };
        self.set(sym, c);
        Ok(())
    }
}

impl PlateModel {
    pub fn unplated(graph: ChainGraph) -> Self {
        PlateModel {
            graph,
            plates: Vec::new(),
        }
    }

    /// Plates in preorder of the nesting forest, roots by declaration. Only
    /// meaningful for a model that passed [`validate_plates`].
    pub fn plate_order(&self) -> Vec<usize> {
        fn visit(m: &PlateModel, p: usize, out: &mut Vec<usize>) {
            out.push(p);
            for (c, plate) in m.plates.iter().enumerate() {
                if plate.parent == Some(p) {
                    visit(m, c, out);
                }
            }
        }
        let mut out = Vec::new();
        for (p, plate) in self.plates.iter().enumerate() {
            if plate.parent.is_none() {
                visit(self, p, &mut out);
            }
        }
        out
    }

    /// Plates containing `v`, in plate order.
    pub fn plates_of(&self, v: NodeId) -> Vec<usize> {
        self.plate_order()
            .into_iter()
            .filter(|&p| self.plates[p].members.contains(&v))
            .collect()
    }

    /// Nesting depth of `p`; roots have depth 0.
    pub fn depth(&self, p: usize) -> usize {
        let mut d = 0;
        let mut cur = self.plates[p].parent;
        while let Some(q) = cur {
            d += 1;
            cur = self.plates[q].parent;
        }
        d
    }
}

/// Checks the nesting forest, membership consistency, the boundary rules
/// for edges and static ground-name collisions. Returns every violation.
pub fn validate_plates(m: &PlateModel) -> Vec<PlateError> {
    let mut errors = Vec::new();
    let g = &m.graph;
    let mut seen = HashMap::new();
    for (i, p) in m.plates.iter().enumerate() {
        if seen.insert(p.name.as_str(), i).is_some() {
            errors.push(PlateError::DuplicatePlate(p.name.clone()));
        }
        if let Some(q) = p.parent {
            if q >= m.plates.len() {
                errors.push(PlateError::UnknownPlate(q));
            }
        }
    }
    if !errors.is_empty() {
        return errors;
    }
    for (i, p) in m.plates.iter().enumerate() {
        let mut cur = p.parent;
        let mut steps = 0;
        while let Some(q) = cur {
            steps += 1;
            if q == i || steps > m.plates.len() {
                errors.push(PlateError::NestingCycle(p.name.clone()));
                break;
            }
            cur = m.plates[q].parent;
        }
    }
    if !errors.is_empty() {
        return errors;
    }
    for p in &m.plates {
        if let Some(q) = p.parent {
            let outer = &m.plates[q];
            for &v in p.members.difference(&outer.members) {
                errors.push(PlateError::InconsistentMembership {
                    node: g.name(v).to_string(),
                    inner: p.name.clone(),
                    outer: outer.name.clone(),
                });
            }
        }
    }
    let member_sets: Vec<Vec<usize>> = g.ids().map(|v| m.plates_of(v)).collect();
    for e in g.edges() {
        let (pf, pt) = (&member_sets[e.from.index()], &member_sets[e.to.index()]);
        let (f, t) = (g.name(e.from).to_string(), g.name(e.to).to_string());
        match e.kind {
            EdgeKind::Undirected if pf != pt => errors.push(PlateError::UndirectedCrossing(f, t)),
            EdgeKind::Directed if !pf.iter().all(|p| pt.contains(p)) => errors.push(PlateError::ArcLeavesPlate(f, t)),
            _ => {}
        }
    }
    for v in g.ids() {
        let kv = member_sets[v.index()].len();
        for w in g.ids() {
            let kw = member_sets[w.index()].len();
            if v != w && kv > kw && is_index_extension(g.name(v), g.name(w), kv - kw) {
                errors.push(PlateError::NameCollision(g.name(w).to_string()));
            }
        }
    }
    errors
}

/// Whether `name` is `base` followed by exactly `k` groups `_<n>` with
/// `n ≥ 1` written without leading zeros.
fn is_index_extension(base: &str, name: &str, k: usize) -> bool {
    let Some(rest) = name.strip_prefix(base) else {
        return false;
    };
    let Some(rest) = rest.strip_prefix('_') else {
        return false;
    };
    let groups: Vec<&str> = rest.split('_').collect();
    groups.len() == k
        && groups
            .iter()
            .all(|s| !s.is_empty() && !s.starts_with('0') && s.bytes().all(|b| b.is_ascii_digit()))
}

fn ensure_valid(m: &PlateModel) -> Result<(), PlateError> {
    match validate_plates(m).into_iter().next() {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

/// Instances of every plate under `b`, each as the tuple of indices along
/// its chain of enclosing plates (outermost first).
struct Instances {
    per_plate: Vec<Vec<Vec<usize>>>,
    lookup: Vec<HashMap<Vec<usize>, usize>>,
}

impl Instances {
    fn new(m: &PlateModel, b: &Binding) -> Result<Self, PlateError> {
        let n = m.plates.len();
        let mut per_plate: Vec<Vec<Vec<usize>>> = vec![Vec::new(); n];
        let mut lookup = vec![HashMap::new(); n];
        for p in m.plate_order() {
            let plate = &m.plates[p];
            let sym = &plate.cardinality_symbol;
            let card = b.get(sym).ok_or_else(|| PlateError::Unbound(sym.clone()))?;
            let mut out = Vec::new();
            match plate.parent {
                None => match card {
                    Cardinality::Uniform(0) => return Err(PlateError::ZeroCardinality(sym.clone())),
                    Cardinality::Uniform(k) => out.extend((1..=*k).map(|i| vec![i])),
                    Cardinality::PerParentIndex(_) => return Err(PlateError::RaggedTopLevel(sym.clone())),
                },
                Some(q) => {
                    let parents = &per_plate[q];
                    for (slot, inst) in parents.iter().enumerate() {
                        let k = match card {
                            Cardinality::Uniform(k) => *k,
                            Cardinality::PerParentIndex(v) if v.len() == parents.len() => v[slot],
                            Cardinality::PerParentIndex(v) => {
                                return Err(PlateError::RaggedMismatch {
                                    symbol: sym.clone(),
                                    parent: m.plates[q].name.clone(),
                                    expected: parents.len(),
                                    got: v.len(),
                                })
                            }
                        };
                        if k == 0 {
                            return Err(PlateError::ZeroCardinality(sym.clone()));
                        }
                        for i in 1..=k {
                            let mut t = inst.clone();
                            t.push(i);
                            out.push(t);
                        }
                    }
                }
            }
            lookup[p] = out.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
            per_plate[p] = out;
        }
        Ok(Instances { per_plate, lookup })
    }

    /// Index tuples over the plate list `plates` (in plate order, closed
    /// under enclosing plates).
    fn tuples(&self, m: &PlateModel, plates: &[usize]) -> Vec<IndexTuple> {
        let mut acc: Vec<IndexTuple> = vec![Vec::new()];
        for &p in plates {
            let mut next = Vec::new();
            for t in &acc {
                let prefix: Vec<usize> = match m.plates[p].parent {
                    None => Vec::new(),
                    Some(q) => {
                        let slot = t.iter().find(|(pl, _)| *pl == q).map(|&(_, i)| i - 1);
                        self.per_plate[q][slot.expect("enclosing plate precedes")].clone()
                    }
                };
                for inst in &self.per_plate[p] {
                    if inst[..inst.len() - 1] == prefix[..] {
                        let mut t2 = t.clone();
                        // store the flattened instance slot + 1 so children can find their prefix
                        t2.push((p, self.lookup[p][inst] + 1));
                        next.push(t2);
                    }
                }
            }
            acc = next;
        }
        acc
    }

    /// User-facing index of a stored slot (the last component of the
    /// instance tuple).
    fn local_index(&self, p: usize, slot: usize) -> usize {
        *self.per_plate[p][slot - 1].last().expect("non-empty instance")
    }
}

fn display_tuple(inst: &Instances, t: &IndexTuple) -> Vec<usize> {
    t.iter().map(|&(p, s)| inst.local_index(p, s)).collect()
}

fn ground_name(base: &str, idx: &[usize]) -> String {
    let mut s = base.to_string();
    for i in idx {
        s.push('_');
        s.push_str(&i.to_string());
    }
    s
}

/// Index tuples of the ground copies of `v` (1-based, outermost first).
/// A node in no plate has the single empty tuple.
pub fn indval(m: &PlateModel, v: NodeId, b: &Binding) -> Result<Vec<Vec<usize>>, PlateError> {
    if v.index() >= m.graph.len() {
        return Err(GraphError::UnknownNodeId.into());
    }
    ensure_valid(m)?;
    let inst = Instances::new(m, b)?;
    Ok(inst
        .tuples(m, &m.plates_of(v))
        .iter()
        .map(|t| display_tuple(&inst, t))
        .collect())
}

/// Ground chain graph: one node per index tuple of every template node,
/// template nodes in declaration order. An edge `u -> v` (or `u -- v`) is
/// replicated once per tuple of `v`, connecting to the copy of `u` that
/// agrees on every plate containing `u`.
pub fn expand(m: &PlateModel, b: &Binding) -> Result<ChainGraph, PlateError> {
    ensure_valid(m)?;
    let inst = Instances::new(m, b)?;
    let g = &m.graph;
    let mut out = ChainGraphBuilder::new();
    let mut copies: Vec<HashMap<IndexTuple, NodeId>> = Vec::with_capacity(g.len());
    let ptuples: Vec<Vec<IndexTuple>> = g.ids().map(|v| inst.tuples(m, &m.plates_of(v))).collect();
    for v in g.ids() {
        let node = g.node(v);
        let mut map = HashMap::new();
        for t in &ptuples[v.index()] {
            let id = out.add_node(&ground_name(&node.name, &display_tuple(&inst, t)), node.attr)?;
            map.insert(t.clone(), id);
        }
        copies.push(map);
    }
    for e in g.edges() {
        let from_plates = m.plates_of(e.from);
        for t in &ptuples[e.to.index()] {
            let ft: IndexTuple = t.iter().copied().filter(|(p, _)| from_plates.contains(p)).collect();
            out.add_edge(Edge {
                kind: e.kind,
                from: copies[e.from.index()][&ft],
                to: copies[e.to.index()][t],
            })?;
        }
    }
    Ok(out.build())
}

/// Plate-indexed factorization of the template graph: each template term
/// sits inside the products of the plates its variables belong to.
#[derive(Clone, Debug)]
pub struct SymbolicExpression {
    pub template: FactorExpression,
    /// Plates of each template term, in plate order.
    pub scopes: Vec<Vec<usize>>,
    /// Plates of each template variable, in plate order.
    pub var_plates: Vec<Vec<usize>>,
    pub plates: Vec<Plate>,
    /// Index letter per plate.
    pub letters: Vec<String>,
}

#[derive(Clone, Debug)]
pub enum PlatedFactorization {
    Ground(FactorExpression),
    Symbolic(SymbolicExpression),
}

impl PlatedFactorization {
    pub fn render(&self, format: Format) -> String {
        match self {
            PlatedFactorization::Ground(e) => e.render(format),
            PlatedFactorization::Symbolic(s) => s.render(format),
        }
    }
}

/// With a binding, the component factorization of the expansion; without,
/// the symbolic plate-indexed form.
pub fn factorize_plated(m: &PlateModel, b: Option<&Binding>) -> Result<PlatedFactorization, PlateError> {
    ensure_valid(m)?;
    match b {
        Some(b) => Ok(PlatedFactorization::Ground(factorize_chain(&expand(m, b)?)?)),
        None => Ok(PlatedFactorization::Symbolic(symbolic(m)?)),
    }
}

const LETTERS: [&str; 6] = ["i", "j", "k", "l", "m", "n"];

fn symbolic(m: &PlateModel) -> Result<SymbolicExpression, PlateError> {
    let template = factorize_chain(&m.graph)?;
    let var_plates: Vec<Vec<usize>> = m.graph.ids().map(|v| m.plates_of(v)).collect();
    let order = m.plate_order();
    let scopes = template
        .terms
        .iter()
        .map(|t| {
            order
                .iter()
                .copied()
                .filter(|p| {
                    t.vars()
                        .chain(t.sums_over.iter().copied())
                        .any(|v| var_plates[v].contains(p))
                })
                .collect()
        })
        .collect();
    let mut letters = vec![String::new(); m.plates.len()];
    for (rank, &p) in order.iter().enumerate() {
        letters[p] = LETTERS
            .get(rank)
            .map(|s| s.to_string())
            .unwrap_or_else(|| format!("i{}", rank + 1));
    }
    Ok(SymbolicExpression {
        template,
        scopes,
        var_plates,
        plates: m.plates.clone(),
        letters,
    })
}

/// Nested product structure: terms and sub-products in order of first
/// appearance.
enum Item {
    Term(usize),
    Product(usize, Vec<Item>),
}

impl SymbolicExpression {
    fn tree(&self) -> Vec<Item> {
        fn insert(items: &mut Vec<Item>, scope: &[usize], term: usize) {
            match scope.split_first() {
                None => items.push(Item::Term(term)),
                Some((&p, rest)) => {
                    let pos = items.iter().position(|i| matches!(i, Item::Product(q, _) if *q == p));
                    let idx = pos.unwrap_or_else(|| {
                        items.push(Item::Product(p, Vec::new()));
                        items.len() - 1
                    });
                    if let Item::Product(_, inner) = &mut items[idx] {
                        insert(inner, rest, term);
                    }
                }
            }
        }
        let mut root = Vec::new();
        for (t, scope) in self.scopes.iter().enumerate() {
            insert(&mut root, scope, t);
        }
        root
    }

    fn var_name(&self, v: usize, format: Format) -> String {
        let var = &self.template.vars[v];
        let base = match format {
            Format::Text => var.name.clone(),
            Format::Latex => latex_ident(&var.name),
        };
        let idx: Vec<&str> = self.var_plates[v].iter().map(|&p| self.letters[p].as_str()).collect();
        match idx.as_slice() {
            [] => base,
            [one] => format!("{base}_{one}"),
            many => format!("{base}_{{{}}}", many.join(",")),
        }
    }

    fn range(&self, p: usize, format: Format) -> String {
        let plate = &self.plates[p];
        let mut outer = Vec::new();
        let mut cur = plate.parent;
        while let Some(q) = cur {
            outer.push(self.letters[q].as_str());
            cur = self.plates[q].parent;
        }
        outer.reverse();
        let name = match format {
            Format::Text => plate.name.clone(),
            Format::Latex => format!("\\mathrm{{{}}}", plate.name),
        };
        let set = if outer.is_empty() {
            name
        } else {
            format!("{name}({})", outer.join(","))
        };
        match format {
            Format::Text => format!("∏_{{{}∈{set}}}", self.letters[p]),
            Format::Latex => format!("\\prod_{{{} \\in {set}}}", self.letters[p]),
        }
    }

    pub fn render(&self, format: Format) -> String {
        if self.template.terms.is_empty() {
            return "1".to_string();
        }
        let name = |v: usize| self.var_name(v, format);
        let sep = match format {
            Format::Text => " ",
            Format::Latex => " \\, ",
        };
        fn walk(
            s: &SymbolicExpression,
            items: &[Item],
            name: &dyn Fn(usize) -> String,
            format: Format,
            out: &mut Vec<String>,
        ) {
            for item in items {
                match item {
                    Item::Term(t) => out.push(render_term(&s.template.terms[*t], name, format)),
                    Item::Product(p, inner) => {
                        out.push(s.range(*p, format));
                        walk(s, inner, name, format, out);
                    }
                }
            }
        }
        let mut parts = Vec::new();
        walk(self, &self.tree(), &name, format, &mut parts);
        parts.join(sep)
    }
}

/// Grounds a symbolic factorization under `b`: every template term is
/// replicated once per index tuple of its scope, over the variables of
/// `expand(m, b)`. Labels are kept from the template.
pub fn instantiate(m: &PlateModel, s: &SymbolicExpression, b: &Binding) -> Result<FactorExpression, PlateError> {
    let ground = expand(m, b)?;
    let inst = Instances::new(m, b)?;
    let mut e = FactorExpression {
        vars: ground
            .nodes()
            .iter()
            .map(|n| crate::factorize::Variable {
                name: n.name.clone(),
                domain: n.attr.domain(),
                observed: n.attr.observed,
            })
            .collect(),
        terms: Vec::new(),
    };
    for (term, scope) in s.template.terms.iter().zip(&s.scopes) {
        for t in inst.tuples(m, scope) {
            let map = |v: usize| -> usize {
                let idx: IndexTuple = t.iter().copied().filter(|(p, _)| s.var_plates[v].contains(p)).collect();
                let name = ground_name(&m.graph.nodes()[v].name, &display_tuple(&inst, &idx));
                ground.node_id(&name).expect("expanded node").index()
            };
            e.terms.push(FactorTerm {
                kind: term.kind,
                head: term.head.iter().map(|&v| map(v)).collect(),
                given: term.given.iter().map(|&v| map(v)).collect(),
                label: term.label.clone(),
                group: term.group,
                sums_over: term.sums_over.iter().map(|&v| map(v)).collect(),
            });
        }
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::*;
    use crate::graph::validate_chain_graph;

    fn plate(g: &ChainGraph, name: &str, sym: &str, members: &[&str], parent: Option<usize>) -> Plate {
        Plate {
            name: name.into(),
            cardinality_symbol: sym.into(),
            members: set(g, members),
            parent,
        }
    }

    fn coin() -> PlateModel {
        let g = graph(&["θ", "heads"], &["θ -> heads"]);
        let plates = vec![plate(&g, "Tosses", "N", &["heads"], None)];
        PlateModel { graph: g, plates }
    }

    fn banks() -> PlateModel {
        let g = graph(
            &["θ", "µ", "λ", "class", "spread", "bid-ask-diff"],
            &[
                "θ -> class",
                "λ -> spread",
                "class -> spread",
                "µ -> bid-ask-diff",
                "class -> bid-ask-diff",
            ],
        );
        let plates = vec![
            plate(&g, "Banks", "Banks", &["class", "spread", "bid-ask-diff"], None),
            plate(&g, "Prices", "Ticks", &["spread", "bid-ask-diff"], Some(0)),
        ];
        PlateModel { graph: g, plates }
    }

    #[test]
    fn coin_expansion() {
        let m = coin();
        assert!(validate_plates(&m).is_empty());
        let b = Binding::new().uniform("N", 3);
        let heads = m.graph.require("heads").unwrap();
        assert_eq!(indval(&m, heads, &b).unwrap(), vec![vec![1], vec![2], vec![3]]);
        let theta = m.graph.require("θ").unwrap();
        assert_eq!(indval(&m, theta, &b).unwrap(), vec![Vec::<usize>::new()]);
        let g = expand(&m, &b).unwrap();
        let expected = graph(
            &["θ", "heads_1", "heads_2", "heads_3"],
            &["θ -> heads_1", "θ -> heads_2", "θ -> heads_3"],
        );
        assert!(g.same_structure(&expected));
        let one = expand(&m, &Binding::new().uniform("N", 1)).unwrap();
        assert_eq!(one.len(), 2);
    }

    #[test]
    fn ragged_bank_indices() {
        let m = banks();
        let b = Binding::new().uniform("Banks", 2).ragged("Ticks", vec![2, 3]);
        let v = m.graph.require("bid-ask-diff").unwrap();
        assert_eq!(
            indval(&m, v, &b).unwrap(),
            vec![vec![1, 1], vec![1, 2], vec![2, 1], vec![2, 2], vec![2, 3]]
        );
        let g = expand(&m, &b).unwrap();
        assert_eq!(g.len(), 3 + 2 + 5 + 5);
        assert!(validate_chain_graph(&g).is_valid());
        let s = g.require("spread_2_3").unwrap();
        assert_eq!(g.names_of(g.parents_of(s)), vec!["λ", "class_2"]);
    }

    #[test]
    fn bank_symbolic_formula() {
        let f = factorize_plated(&banks(), None).unwrap();
        assert_eq!(
            f.render(Format::Text),
            "p(θ) p(µ) p(λ) ∏_{i∈Banks} p(class_i|θ) ∏_{j∈Prices(i)} p(spread_{i,j}|λ,class_i) p(bid-ask-diff_{i,j}|µ,class_i)"
        );
        assert_eq!(
            factorize_plated(&coin(), None).unwrap().render(Format::Text),
            "p(θ) ∏_{i∈Tosses} p(heads_i|θ)"
        );
    }

    #[test]
    fn singleton_bank_matches_ground() {
        let m = banks();
        let b = Binding::new().uniform("Banks", 1).uniform("Ticks", 1);
        let g = expand(&m, &b).unwrap();
        assert_eq!(g.len(), 6);
        assert_eq!(
            factorize_plated(&m, Some(&b)).unwrap().render(Format::Text),
            "p(θ) p(µ) p(λ) p(class_1|θ) p(spread_1_1|λ,class_1) p(bid-ask-diff_1_1|µ,class_1)"
        );
    }

    #[test]
    fn boundary_rules() {
        let g = graph(&["a", "b"], &["a -- b"]);
        let m = PlateModel {
            plates: vec![plate(&g, "P", "N", &["a"], None)],
            graph: g,
        };
        assert!(matches!(validate_plates(&m)[..], [PlateError::UndirectedCrossing(..)]));

        let g = graph(&["a", "b"], &["a -> b"]);
        let m = PlateModel {
            plates: vec![plate(&g, "P", "N", &["a"], None)],
            graph: g,
        };
        assert!(matches!(validate_plates(&m)[..], [PlateError::ArcLeavesPlate(..)]));
    }

    #[test]
    fn nesting_and_binding_errors() {
        let g = graph(&["a"], &[]);
        let m = PlateModel {
            plates: vec![plate(&g, "P", "N", &[], Some(1)), plate(&g, "Q", "M", &["a"], Some(0))],
            graph: g.clone(),
        };
        assert!(validate_plates(&m)
            .iter()
            .any(|e| matches!(e, PlateError::NestingCycle(_))));

        let m = PlateModel {
            plates: vec![plate(&g, "P", "N", &[], None), plate(&g, "Q", "M", &["a"], Some(0))],
            graph: g.clone(),
        };
        assert!(matches!(
            validate_plates(&m)[..],
            [PlateError::InconsistentMembership { .. }]
        ));

        let m = PlateModel {
            plates: vec![plate(&g, "P", "N", &["a"], None)],
            graph: g,
        };
        assert!(matches!(expand(&m, &Binding::new()), Err(PlateError::Unbound(_))));
        assert!(matches!(
            expand(&m, &Binding::new().uniform("N", 0)),
            Err(PlateError::ZeroCardinality(_))
        ));
        assert!(matches!(
            expand(&m, &Binding::new().ragged("N", vec![1, 2])),
            Err(PlateError::RaggedTopLevel(_))
        ));
        let bm = banks();
        assert!(matches!(
            expand(&bm, &Binding::new().uniform("Banks", 2).ragged("Ticks", vec![1, 2, 3])),
            Err(PlateError::RaggedMismatch { .. })
        ));
    }

    #[test]
    fn ground_name_collision() {
        let g = graph(&["x", "x_2"], &[]);
        let m = PlateModel {
            plates: vec![plate(&g, "P", "N", &["x"], None)],
            graph: g,
        };
        assert!(matches!(validate_plates(&m)[..], [PlateError::NameCollision(_)]));
        assert!(!is_index_extension("x", "x_02", 1));
        assert!(is_index_extension("x", "x_1_3", 2));
    }

    #[test]
    fn binding_parse() {
        let mut b = Binding::new();
        b.parse_assignment("N=3").unwrap();
        b.parse_assignment("Ticks=2,3").unwrap();
        assert_eq!(b.get("N"), Some(&Cardinality::Uniform(3)));
        assert_eq!(b.get("Ticks"), Some(&Cardinality::PerParentIndex(vec![2, 3])));
        assert!(b.parse_assignment("N").is_err());
        assert!(b.parse_assignment("N=x").is_err());
    }

    #[test]
    fn instantiation_matches_ground_terms() {
        let m = banks();
        let b = Binding::new().uniform("Banks", 2).ragged("Ticks", vec![1, 2]);
        let PlatedFactorization::Symbolic(s) = factorize_plated(&m, None).unwrap() else {
            panic!("expected symbolic form");
        };
        let inst = instantiate(&m, &s, &b).unwrap();
        let ground = factorize_chain(&expand(&m, &b).unwrap()).unwrap();
        let mut a: Vec<_> = inst.terms.iter().map(|t| t.signature()).collect();
        let mut c: Vec<_> = ground.terms.iter().map(|t| t.signature()).collect();
        a.sort();
        c.sort();
        assert_eq!(a, c);
    }
}
