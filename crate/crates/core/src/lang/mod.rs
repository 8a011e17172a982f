//! The `.cg` model language.
//!
//! ```text
//! model   := "model" IDENT "{" stmt* "}"
//! stmt    := node | edge | plate
//! node    := ("det" | "obs")* "node" IDENT ("[" INT "]")? ";"
//! edge    := IDENT ("->" | "--") IDENT ";"
//! plate   := "plate" IDENT "[" IDENT "]" "{" stmt* "}"
//! ```
//!
//! `#` starts a comment that runs to the end of the line. Identifiers start
//! with a letter or `_` and continue with letters, digits and `_`; a `-`
//! belongs to an identifier when a letter, digit or `_` follows it, so
//! `bid-ask-diff` is one name while `a->b` and `a--b` are edges. Declaration
//! order fixes the canonical node order.

pub mod ast;
mod diagnostics;
mod dot;
mod lexer;
mod parser;
mod print;
mod resolve;

pub use ast::ModelAst;
pub use diagnostics::{Diagnostic, DiagnosticKind, Severity, SourceSpan};
pub use dot::{graph_to_dot, to_dot};
pub use lexer::KEYWORDS;
pub use parser::{parse, MAX_NESTING};
pub use print::{print_ast, print_graph};
pub use resolve::{resolve, Resolved};

/// Parses and resolves `src`.
pub fn load(src: &str) -> Result<Resolved, Vec<Diagnostic>> {
    resolve(&parse(src)?)
}
