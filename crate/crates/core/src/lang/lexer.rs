use super::diagnostics::{Diagnostic, DiagnosticKind, SourceSpan};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(u64),
    Model,
    Node,
    Plate,
    Det,
    Obs,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Semi,
    Arrow,
    Line,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Int(n) => format!("integer `{n}`"),
            Tok::Model => "`model`".into(),
            Tok::Node => "`node`".into(),
            Tok::Plate => "`plate`".into(),
            Tok::Det => "`det`".into(),
            Tok::Obs => "`obs`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::Line => "`--`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub span: SourceSpan,
}

pub fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

pub fn is_ident_continue(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

pub const KEYWORDS: [&str; 5] = ["model", "node", "plate", "det", "obs"];

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
    line: u32,
    col: u32,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn peek2(&self) -> Option<char> {
        let mut it = self.src[self.pos..].chars();
        it.next();
        it.next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn mark(&self) -> (usize, u32, u32) {
        (self.pos, self.line, self.col)
    }

    fn span_from(&self, (start, line, col): (usize, u32, u32)) -> SourceSpan {
        SourceSpan {
            start,
            end: self.pos,
            line,
            col,
        }
    }
}

/// Tokenizes `src`. Bad characters are reported and skipped; the token
/// stream always ends with [`Tok::Eof`].
pub fn lex(src: &str) -> (Vec<Token>, Vec<Diagnostic>) {
    let mut cur = Cursor {
        src,
        pos: 0,
        line: 1,
        col: 1,
    };
    let mut toks = Vec::new();
    let mut diags = Vec::new();
    while let Some(c) = cur.peek() {
        let m = cur.mark();
        if c.is_whitespace() {
            cur.bump();
            continue;
        }
        if c == '#' {
            while cur.peek().is_some_and(|c| c != '\n') {
                cur.bump();
            }
            continue;
        }
        let tok = match c {
            '{' | '}' | '[' | ']' | ';' => {
                cur.bump();
                match c {
                    '{' => Tok::LBrace,
                    '}' => Tok::RBrace,
                    '[' => Tok::LBracket,
                    ']' => Tok::RBracket,
                    _ => Tok::Semi,
                }
            }
            '-' => match cur.peek2() {
                Some('>') => {
                    cur.bump();
                    cur.bump();
                    Tok::Arrow
                }
                Some('-') => {
                    cur.bump();
                    cur.bump();
                    Tok::Line
                }
                _ => {
                    cur.bump();
                    diags.push(Diagnostic::error(
                        DiagnosticKind::Lexical,
                        "stray `-`; expected `->` or `--`",
                        cur.span_from(m),
                    ));
                    continue;
                }
            },
            c if c.is_ascii_digit() => {
                while cur.peek().is_some_and(|c| c.is_ascii_digit()) {
                    cur.bump();
                }
                let text = &src[m.0..cur.pos];
                match text.parse::<u64>() {
                    Ok(n) => Tok::Int(n),
                    Err(_) => {
                        diags.push(Diagnostic::error(
                            DiagnosticKind::Lexical,
                            format!("integer `{text}` is too large"),
                            cur.span_from(m),
                        ));
                        continue;
                    }
                }
            }
            c if is_ident_start(c) => {
                cur.bump();
                loop {
                    match cur.peek() {
                        Some(c) if is_ident_continue(c) => {
                            cur.bump();
                        }
                        Some('-') if cur.peek2().is_some_and(is_ident_continue) => {
                            cur.bump();
                        }
                        _ => break,
                    }
                }
                match &src[m.0..cur.pos] {
                    "model" => Tok::Model,
                    "node" => Tok::Node,
                    "plate" => Tok::Plate,
                    "det" => Tok::Det,
                    "obs" => Tok::Obs,
                    s => Tok::Ident(s.to_string()),
                }
            }
            other => {
                cur.bump();
                diags.push(Diagnostic::error(
                    DiagnosticKind::Lexical,
                    format!("unexpected character {other:?}"),
                    cur.span_from(m),
                ));
                continue;
            }
        };
        toks.push(Token {
            tok,
            span: cur.span_from(m),
        });
    }
    let m = cur.mark();
    toks.push(Token {
        tok: Tok::Eof,
        span: cur.span_from(m),
    });
    (toks, diags)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<Tok> {
        lex(src).0.into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn hyphenated_identifiers() {
        assert_eq!(
            kinds("bid-ask-diff -> x--y"),
            vec![
                Tok::Ident("bid-ask-diff".into()),
                Tok::Arrow,
                Tok::Ident("x".into()),
                Tok::Line,
                Tok::Ident("y".into()),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn unicode_and_comments() {
        assert_eq!(
            kinds("node θ; # comment\nobs node µ[3];"),
            vec![
                Tok::Node,
                Tok::Ident("θ".into()),
                Tok::Semi,
                Tok::Obs,
                Tok::Node,
                Tok::Ident("µ".into()),
                Tok::LBracket,
                Tok::Int(3),
                Tok::RBracket,
                Tok::Semi,
                Tok::Eof
            ]
        );
    }

    #[test]
    fn positions() {
        let (toks, _) = lex("a\n  b");
        assert_eq!((toks[1].span.line, toks[1].span.col), (2, 3));
        assert_eq!((toks[1].span.start, toks[1].span.end), (4, 5));
    }

    #[test]
    fn bad_characters_reported() {
        let (toks, diags) = lex("a $ - b 99999999999999999999999");
        assert_eq!(diags.len(), 3);
        assert_eq!(toks.len(), 3);
    }
}
