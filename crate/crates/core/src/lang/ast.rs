use super::diagnostics::SourceSpan;
use crate::graph::EdgeKind;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ident {
    pub name: String,
    pub span: SourceSpan,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Attr {
    Det,
    Obs,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeDecl {
    pub attrs: Vec<Attr>,
    pub name: Ident,
    pub domain: Option<u64>,
    pub span: SourceSpan,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeDecl {
    pub from: Ident,
    pub kind: EdgeKind,
    pub to: Ident,
    pub span: SourceSpan,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlateDecl {
    pub name: Ident,
    pub symbol: Ident,
    pub body: Vec<Stmt>,
    pub span: SourceSpan,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Stmt {
    Node(NodeDecl),
    Edge(EdgeDecl),
    Plate(PlateDecl),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelAst {
    pub name: Ident,
    pub stmts: Vec<Stmt>,
    pub span: SourceSpan,
}

impl ModelAst {
    /// Copy with every span zeroed, for structural comparison.
    pub fn without_spans(&self) -> ModelAst {
        fn ident(i: &Ident) -> Ident {
            Ident {
                name: i.name.clone(),
                span: SourceSpan::default(),
            }
        }
        fn stmts(s: &[Stmt]) -> Vec<Stmt> {
            s.iter()
                .map(|s| match s {
                    Stmt::Node(n) => Stmt::Node(NodeDecl {
                        attrs: n.attrs.clone(),
                        name: ident(&n.name),
                        domain: n.domain,
                        span: SourceSpan::default(),
                    }),
                    Stmt::Edge(e) => Stmt::Edge(EdgeDecl {
                        from: ident(&e.from),
                        kind: e.kind,
                        to: ident(&e.to),
                        span: SourceSpan::default(),
                    }),
                    Stmt::Plate(p) => Stmt::Plate(PlateDecl {
                        name: ident(&p.name),
                        symbol: ident(&p.symbol),
                        body: stmts(&p.body),
                        span: SourceSpan::default(),
                    }),
                })
                .collect()
        }
        ModelAst {
            name: ident(&self.name),
            stmts: stmts(&self.stmts),
            span: SourceSpan::default(),
        }
    }

    /// Node and edge declarations in source order, descending into plates.
    pub fn walk(&self, mut f: impl FnMut(&Stmt, &[&PlateDecl])) {
        fn go<'a>(s: &'a [Stmt], stack: &mut Vec<&'a PlateDecl>, f: &mut dyn FnMut(&Stmt, &[&PlateDecl])) {
            for st in s {
                f(st, stack);
                if let Stmt::Plate(p) = st {
                    stack.push(p);
                    go(&p.body, stack, f);
                    stack.pop();
                }
            }
        }
        go(&self.stmts, &mut Vec::new(), &mut f);
    }
}
