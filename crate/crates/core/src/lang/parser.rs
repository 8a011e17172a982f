use super::ast::{Attr, EdgeDecl, Ident, ModelAst, NodeDecl, PlateDecl, Stmt};
use super::diagnostics::{Diagnostic, DiagnosticKind, SourceSpan};
use super::lexer::{lex, Tok, Token};
use crate::graph::EdgeKind;

/// Deepest allowed plate nesting.
pub const MAX_NESTING: usize = 16;

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    diags: Vec<Diagnostic>,
}

type PResult<T> = Result<T, ()>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn span(&self) -> SourceSpan {
        self.toks[self.pos].span
    }

    fn prev_span(&self) -> SourceSpan {
        self.toks[self.pos.saturating_sub(1)].span
    }

    fn bump(&mut self) -> &Token {
        let i = self.pos;
        if self.toks[i].tok != Tok::Eof {
            self.pos += 1;
        }
        &self.toks[i]
    }

    fn error(&mut self, msg: String) {
        let span = self.span();
        self.diags.push(Diagnostic::error(DiagnosticKind::Syntax, msg, span));
    }

    fn expect(&mut self, tok: Tok, context: &str) -> PResult<SourceSpan> {
        if *self.peek() == tok {
            Ok(self.bump().span)
        } else {
            let found = self.peek().describe();
            self.error(format!("expected {} {context}, found {found}", tok.describe()));
            Err(())
        }
    }

    fn ident(&mut self, what: &str) -> PResult<Ident> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                let span = self.bump().span;
                Ok(Ident { name, span })
            }
            other => {
                self.error(format!("expected {what}, found {}", other.describe()));
                Err(())
            }
        }
    }

    /// Skips to just past the next `;` at this level, or up to (not past) a
    /// closing `}`; balanced `{ ... }` blocks are skipped whole.
    fn recover(&mut self) {
        let mut depth = 0usize;
        loop {
            match self.peek() {
                Tok::Eof => return,
                Tok::Semi if depth == 0 => {
                    self.bump();
                    return;
                }
                Tok::LBrace => depth += 1,
                Tok::RBrace if depth == 0 => return,
                Tok::RBrace => {
                    depth -= 1;
                    if depth == 0 {
                        self.bump();
                        return;
                    }
                }
                _ => {}
            }
            self.bump();
        }
    }

    fn model(&mut self) -> PResult<ModelAst> {
        let start = self.span();
        self.expect(Tok::Model, "at start of file")?;
        let name = self.ident("model name")?;
        self.expect(Tok::LBrace, "after model name")?;
        let stmts = self.block(0);
        self.expect(Tok::RBrace, "to close the model")?;
        let span = start.to(self.prev_span());
        if *self.peek() != Tok::Eof {
            let found = self.peek().describe();
            self.error(format!("unexpected {found} after the model"));
        }
        Ok(ModelAst { name, stmts, span })
    }

    fn block(&mut self, depth: usize) -> Vec<Stmt> {
        let mut out = Vec::new();
        while !matches!(self.peek(), Tok::RBrace | Tok::Eof) {
            match self.stmt(depth) {
                Ok(s) => out.push(s),
                Err(()) => self.recover(),
            }
        }
        out
    }

    fn stmt(&mut self, depth: usize) -> PResult<Stmt> {
        let start = self.span();
        match self.peek().clone() {
            Tok::Det | Tok::Obs | Tok::Node => {
                let mut attrs = Vec::new();
                loop {
                    match self.peek() {
                        Tok::Det => attrs.push(Attr::Det),
                        Tok::Obs => attrs.push(Attr::Obs),
                        _ => break,
                    }
                    self.bump();
                }
                self.expect(Tok::Node, "after node attributes")?;
                let name = self.ident("node name")?;
                let mut domain = None;
                if *self.peek() == Tok::LBracket {
                    self.bump();
                    match *self.peek() {
                        Tok::Int(n) => {
                            self.bump();
                            domain = Some(n);
                        }
                        ref other => {
                            let found = other.describe();
                            self.error(format!("expected domain size, found {found}"));
                            return Err(());
                        }
                    }
                    self.expect(Tok::RBracket, "after domain size")?;
                }
                self.expect(Tok::Semi, "after node declaration")?;
                Ok(Stmt::Node(NodeDecl {
                    attrs,
                    name,
                    domain,
                    span: start.to(self.prev_span()),
                }))
            }
            Tok::Ident(_) => {
                let from = self.ident("edge source")?;
                let kind = match self.peek() {
                    Tok::Arrow => EdgeKind::Directed,
                    Tok::Line => EdgeKind::Undirected,
                    other => {
                        let found = other.describe();
                        self.error(format!("expected `->` or `--`, found {found}"));
                        return Err(());
                    }
                };
                self.bump();
                let to = self.ident("edge target")?;
                self.expect(Tok::Semi, "after edge")?;
                Ok(Stmt::Edge(EdgeDecl {
                    from,
                    kind,
                    to,
                    span: start.to(self.prev_span()),
                }))
            }
            Tok::Plate => {
                self.bump();
                let name = self.ident("plate name")?;
                self.expect(Tok::LBracket, "after plate name")?;
                let symbol = self.ident("cardinality symbol")?;
                self.expect(Tok::RBracket, "after cardinality symbol")?;
                if depth + 1 > MAX_NESTING {
                    self.diags.push(Diagnostic::error(
                        DiagnosticKind::Limit,
                        format!("plate nesting deeper than {MAX_NESTING}"),
                        start.to(self.prev_span()),
                    ));
                    return Err(());
                }
                self.expect(Tok::LBrace, "to open the plate body")?;
                let body = self.block(depth + 1);
                self.expect(Tok::RBrace, "to close the plate body")?;
                Ok(Stmt::Plate(PlateDecl {
                    name,
                    symbol,
                    body,
                    span: start.to(self.prev_span()),
                }))
            }
            other => {
                self.error(format!("expected a declaration, found {}", other.describe()));
                Err(())
            }
        }
    }
}

/// Parses a model file. On any lexical or syntax error, returns every
/// diagnostic collected with recovery.
pub fn parse(src: &str) -> Result<ModelAst, Vec<Diagnostic>> {
    let (toks, mut diags) = lex(src);
    let mut p = Parser {
        toks,
        pos: 0,
        diags: Vec::new(),
    };
    let ast = p.model();
    diags.extend(p.diags);
    diags.sort_by_key(|d| d.span.start);
    match ast {
        Ok(ast) if diags.is_empty() => Ok(ast),
        _ => Err(diags),
    }
}
