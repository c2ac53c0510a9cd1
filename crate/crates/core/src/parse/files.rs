use super::parser::{parse_at, Origin, VarSet};
use super::{ParseError, SourceSpan};
use crate::expr::Expr;

/// Coefficients of `f4 D^4 + f3 D^3 + f2 D^2 + f1 D + f0` as read from a file.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorFile {
    pub name: Option<String>,
    /// `coefficients[i]` multiplies `D^i`.
    pub coefficients: [Expr; 5],
}

/// The map `xbar = xi(x)`, `ubar = phi(x) * u` as read from a file.
#[derive(Clone, Debug, PartialEq)]
pub struct TransformationFile {
    pub xi: Expr,
    pub phi: Expr,
}

struct Entry<'a> {
    key: &'a str,
    key_span: SourceSpan,
    value: &'a str,
    value_origin: Origin,
    value_span: SourceSpan,
}

fn whole(text: &str) -> SourceSpan {
    SourceSpan {
        begin: 0,
        end: text.len(),
        line: 1,
        column: 1,
    }
}

fn entries(text: &str) -> Result<Vec<Entry<'_>>, ParseError> {
    let mut out = Vec::new();
    let mut offset = 0;
    for (idx, raw) in text.split_inclusive('\n').enumerate() {
        let line_no = idx + 1;
        let line_start = offset;
        offset += raw.len();
        let content = raw.trim_end_matches(['\n', '\r']);
        let content = match content.find('#') {
            Some(i) => &content[..i],
            None => content,
        };
        if content.trim().is_empty() {
            continue;
        }
        let span_of = |b: usize, e: usize| SourceSpan {
            begin: line_start + b,
            end: line_start + e,
            line: line_no,
            column: content[..b].chars().count() + 1,
        };
        let Some(eq) = content.find('=') else {
            let lead = content.len() - content.trim_start().len();
            return Err(ParseError::syntax(
                "expected `key = expression`",
                span_of(lead, content.trim_end().len()),
            ));
        };
        let key_raw = &content[..eq];
        let key = key_raw.trim();
        let key_begin = key_raw.len() - key_raw.trim_start().len();
        let value_raw = &content[eq + 1..];
        let value_begin = eq + 1;
        out.push(Entry {
            key,
            key_span: span_of(key_begin, key_begin + key.len().max(1)),
            value: value_raw,
            value_origin: Origin {
                offset: line_start + value_begin,
                line: line_no,
                column: content[..value_begin].chars().count() + 1,
            },
            value_span: span_of(value_begin, content.len()),
        });
    }
    Ok(out)
}

fn check_unique(seen: &mut Vec<String>, e: &Entry<'_>) -> Result<(), ParseError> {
    if seen.iter().any(|k| k == e.key) {
        return Err(ParseError::syntax(
            format!("duplicate key {}", e.key),
            e.key_span,
        ));
    }
    seen.push(e.key.to_string());
    Ok(())
}

/// Reads an operator file: `key = expression` lines with keys `f0`..`f4` and
/// an optional `name`; `#` starts a comment. Absent `f0`..`f3` default to zero.
pub fn parse_operator_file(text: &str) -> Result<OperatorFile, ParseError> {
    let mut coefficients: [Option<Expr>; 5] = Default::default();
    let mut name = None;
    let mut seen = Vec::new();
    let mut f4_span = None;
    for e in entries(text)? {
        check_unique(&mut seen, &e)?;
        if e.key == "name" {
            name = Some(e.value.trim().to_string());
            continue;
        }
        let idx = match e.key {
            "f0" => 0,
            "f1" => 1,
            "f2" => 2,
            "f3" => 3,
            "f4" => 4,
            other => {
                return Err(ParseError::syntax(
                    format!("unknown key `{other}` (expected f0..f4 or name)"),
                    e.key_span,
                ))
            }
        };
        let v = parse_at(e.value, &VarSet::only_x(), e.value_origin)?;
        if idx == 4 {
            f4_span = Some(e.value_span);
        }
        coefficients[idx] = Some(v);
    }
    let f4 = coefficients[4]
        .clone()
        .ok_or_else(|| ParseError::syntax("missing f4", whole(text)))?;
    if f4.is_zero() {
        return Err(ParseError::syntax(
            "f4 must be nonzero",
            f4_span.unwrap_or_else(|| whole(text)),
        ));
    }
    Ok(OperatorFile {
        name,
        coefficients: coefficients.map(|c| c.unwrap_or_else(Expr::zero)),
    })
}

/// Reads a transformation file with keys `xi` and `phi`, both expressions in `x`.
pub fn parse_transformation_file(text: &str) -> Result<TransformationFile, ParseError> {
    let mut xi = None;
    let mut phi = None;
    let mut seen = Vec::new();
    for e in entries(text)? {
        check_unique(&mut seen, &e)?;
        let slot = match e.key {
            "xi" => &mut xi,
            "phi" => &mut phi,
            other => {
                return Err(ParseError::syntax(
                    format!("unknown key `{other}` (expected xi or phi)"),
                    e.key_span,
                ))
            }
        };
        let v = parse_at(e.value, &VarSet::only_x(), e.value_origin)?;
        *slot = Some((v, e.value_span));
    }
    let (xi, xi_span) = xi.ok_or_else(|| ParseError::syntax("missing xi", whole(text)))?;
    let (phi, phi_span) = phi.ok_or_else(|| ParseError::syntax("missing phi", whole(text)))?;
    if phi.is_zero() {
        return Err(ParseError::syntax("phi must be nonzero", phi_span));
    }
    if xi.diff(crate::expr::Atom::X).is_zero() {
        return Err(ParseError::syntax("xi' must be nonzero", xi_span));
    }
    Ok(TransformationFile { xi, phi })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Atom;

    #[test]
    fn operator_files() {
        let op = parse_operator_file("f4 = 1").unwrap();
        assert_eq!(op.coefficients[4], Expr::one());
        assert!(op.coefficients[..4].iter().all(Expr::is_zero));

        let op = parse_operator_file("f4 = x^2 + 1\nf2 = 3*x\nf0 = 5").unwrap();
        let x = Expr::atom(Atom::X);
        assert_eq!(op.coefficients[0], Expr::int(5));
        assert_eq!(op.coefficients[2], Expr::int(3) * &x);
        assert_eq!(op.coefficients[4], &x * &x + Expr::one());

        let op = parse_operator_file("# comment\nname = bending\n\nf4 = 2 # trailing\n").unwrap();
        assert_eq!(op.name.as_deref(), Some("bending"));
    }

    #[test]
    fn operator_file_errors() {
        let err = parse_operator_file("f3 = 2").unwrap_err();
        assert!(err.to_string().contains("missing f4"));
        let err = parse_operator_file("f4 = 1\nf4 = 2").unwrap_err();
        assert!(err.to_string().contains("duplicate key f4"));
        assert_eq!(err.span.line, 2);
        let err = parse_operator_file("f4 = 1\nf2 = u").unwrap_err();
        assert!(err.to_string().contains("unknown symbol"));
        assert_eq!((err.span.line, err.span.column, err.span.begin), (2, 6, 12));
        let err = parse_operator_file("f4 = 0").unwrap_err();
        assert!(err.to_string().contains("nonzero"));
        let err = parse_operator_file("f4 1").unwrap_err();
        assert!(err.span.end <= 4);
    }

    #[test]
    fn transformation_files() {
        let t = parse_transformation_file("xi = x\nphi = 1").unwrap();
        assert_eq!(t.xi, Expr::atom(Atom::X));
        let t = parse_transformation_file("xi = 2*x\nphi = 1").unwrap();
        assert_eq!(t.xi, Expr::int(2) * Expr::atom(Atom::X));
        let err = parse_transformation_file("xi = x\nphi = 0").unwrap_err();
        assert!(err.to_string().contains("phi must be nonzero"));
        let err = parse_transformation_file("xi = x").unwrap_err();
        assert!(err.to_string().contains("missing phi"));
    }

    #[test]
    fn line_order_is_irrelevant() {
        let a = parse_operator_file("f4 = x\nf1 = 2\nf0 = x^2").unwrap();
        let b = parse_operator_file("f0 = x^2\nf4 = x\nf1 = 2").unwrap();
        assert_eq!(a, b);
    }
}
