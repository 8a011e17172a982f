use super::{ConditionedExpression, FactorExpression, FactorTerm, TermKind, Variable};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Format {
    #[default]
    Text,
    Latex,
}

pub fn render(e: &FactorExpression, format: Format) -> String {
    let name = |v: usize| var_name(&e.vars[v], format);
    render_terms(&e.terms, &name, format)
}

/// Renders `Σ_H N / Σ_{T,H} N`; the numerator sum is omitted when nothing is
/// hidden.
pub fn render_conditioned(c: &ConditionedExpression, format: Format) -> String {
    let name = |v: usize| var_name(&c.vars[v], format);
    let num = render_terms(&c.numerator, &name, format);
    let all: Vec<usize> = c.target.iter().chain(&c.hidden).copied().collect();
    let top = if c.hidden.is_empty() {
        num.clone()
    } else {
        format!("{} {}", sum(&c.hidden, &name, format), num)
    };
    let bottom = format!("{} {}", sum(&all, &name, format), num);
    match format {
        Format::Text => format!("{top} / {bottom}"),
        Format::Latex => format!("\\frac{{{top}}}{{{bottom}}}"),
    }
}

fn sum(vars: &[usize], name: &dyn Fn(usize) -> String, format: Format) -> String {
    let list = join(vars, name);
    match format {
        Format::Text => format!("Σ_{{{list}}}"),
        Format::Latex => format!("\\sum_{{{list}}}"),
    }
}

fn join(vars: &[usize], name: &dyn Fn(usize) -> String) -> String {
    vars.iter().map(|&v| name(v)).collect::<Vec<_>>().join(",")
}

pub(crate) fn render_terms(terms: &[FactorTerm], name: &dyn Fn(usize) -> String, format: Format) -> String {
    if terms.is_empty() {
        return "1".to_string();
    }
    let sep = match format {
        Format::Text => " ",
        Format::Latex => " \\, ",
    };
    terms
        .iter()
        .map(|t| render_term(t, name, format))
        .collect::<Vec<_>>()
        .join(sep)
}

pub(crate) fn render_term(t: &FactorTerm, name: &dyn Fn(usize) -> String, format: Format) -> String {
    let bar = match format {
        Format::Text => "|",
        Format::Latex => " \\mid ",
    };
    let cond = |f: &str| {
        if t.given.is_empty() {
            format!("{f}({})", join(&t.head, name))
        } else {
            format!("{f}({}{bar}{})", join(&t.head, name), join(&t.given, name))
        }
    };
    match t.kind {
        TermKind::Conditional => cond("p"),
        TermKind::Delta => cond(match format {
            Format::Text => "δ",
            Format::Latex => "\\delta",
        }),
        TermKind::Normalizer if t.given.is_empty() => match format {
            Format::Text => format!("{}^-1", t.label),
            Format::Latex => format!("{}^{{-1}}", t.label),
        },
        TermKind::Potential | TermKind::Normalizer => {
            format!("{}({})", label(&t.label, format), join(&t.given, name))
        }
    }
}

fn label(l: &str, format: Format) -> String {
    match (format, l.split_once('_')) {
        (Format::Latex, Some((base, sub))) => format!("{base}_{{{sub}}}"),
        _ => l.to_string(),
    }
}

pub(crate) fn var_name(v: &Variable, format: Format) -> String {
    match format {
        Format::Text => v.name.clone(),
        Format::Latex => latex_ident(&v.name),
    }
}

fn greek(c: char) -> Option<&'static str> {
    Some(match c {
        'α' => "\\alpha",
        'β' => "\\beta",
        'γ' => "\\gamma",
        'δ' => "\\delta",
        'ε' => "\\epsilon",
        'θ' => "\\theta",
        'λ' => "\\lambda",
        'µ' | 'μ' => "\\mu",
        'π' => "\\pi",
        'σ' => "\\sigma",
        'τ' => "\\tau",
        'φ' => "\\phi",
        'ω' => "\\omega",
        _ => return None,
    })
}

/// LaTeX form of an identifier: Greek letters become commands, a trailing
/// digit run becomes a subscript, other multi-letter bases are set upright.
pub(crate) fn latex_ident(name: &str) -> String {
    let split = name.trim_end_matches(|c: char| c.is_ascii_digit()).len();
    if split == 0 {
        return name.to_string();
    }
    let (base, digits) = name.split_at(split);
    let mut chars = base.chars();
    let head = match (chars.next(), chars.next()) {
        (Some(c), None) => greek(c).map(str::to_string).unwrap_or_else(|| c.to_string()),
        _ => {
            let mapped: String = base
                .chars()
                .map(|c| greek(c).map(|g| format!("{g} ")).unwrap_or_else(|| c.to_string()))
                .collect();
            format!("\\mathrm{{{}}}", mapped.replace('_', "\\_"))
        }
    };
    if digits.is_empty() {
        head
    } else {
        format!("{head}_{{{digits}}}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn latex_identifiers() {
        assert_eq!(latex_ident("x1"), "x_{1}");
        assert_eq!(latex_ident("θ"), "\\theta");
        assert_eq!(latex_ident("Age"), "\\mathrm{Age}");
        assert_eq!(latex_ident("wC12"), "\\mathrm{wC}_{12}");
        assert_eq!(latex_ident("42"), "42");
    }

    #[test]
    fn latex_terms() {
        let vars = vec![
            Variable {
                name: "a".into(),
                domain: 2,
                observed: false,
            },
            Variable {
                name: "b".into(),
                domain: 2,
                observed: false,
            },
        ];
        let e = FactorExpression {
            vars,
            terms: vec![
                FactorTerm::conditional(vec![0], vec![1]),
                FactorTerm::potential("f_3".into(), vec![0, 1], 0),
                FactorTerm::normalizer("Z".into(), vec![], 0, vec![0, 1]),
            ],
        };
        assert_eq!(render(&e, Format::Latex), "p(a \\mid b) \\, f_{3}(a,b) \\, Z^{-1}");
        assert_eq!(render(&e, Format::Text), "p(a|b) f_3(a,b) Z^-1");
    }
}
