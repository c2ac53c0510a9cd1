use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::{ParseError, SourceSpan};
use crate::expr::{Atom, Expr, Q};

/// Which identifiers an expression may mention.
#[derive(Clone, Debug, Default)]
pub struct VarSet {
    atoms: Option<BTreeSet<Atom>>,
    chart: bool,
    coefficients: bool,
    params: bool,
    aux: bool,
}

impl VarSet {
    /// Only the independent variable `x`.
    pub fn only_x() -> Self {
        VarSet::from_atoms([Atom::X])
    }

    /// Jet coordinates plus coefficient functions and their derivatives.
    pub fn jet() -> Self {
        VarSet {
            atoms: None,
            chart: true,
            coefficients: true,
            params: false,
            aux: false,
        }
    }

    /// Everything the engine knows, including group parameters and `lambda`.
    pub fn all() -> Self {
        VarSet {
            atoms: None,
            chart: true,
            coefficients: true,
            params: true,
            aux: true,
        }
    }

    pub fn from_atoms(atoms: impl IntoIterator<Item = Atom>) -> Self {
        VarSet {
            atoms: Some(atoms.into_iter().collect()),
            ..VarSet::default()
        }
    }

    /// Builds from printed names; unknown names are ignored.
    pub fn from_names<'a>(names: impl IntoIterator<Item = &'a str>) -> Self {
        VarSet::from_atoms(names.into_iter().filter_map(Atom::from_name))
    }

    pub fn allows(&self, a: Atom) -> bool {
        if let Some(set) = &self.atoms {
            if set.contains(&a) {
                return true;
            }
        }
        match a {
            Atom::Chart(_) => self.chart,
            Atom::Coef { .. } => self.coefficients,
            Atom::Param(_) => self.params,
            Atom::Aux(_) => self.aux,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(Q),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(_) => "number".into(),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

/// Maps byte offsets of a source slice back to absolute positions.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Origin {
    pub offset: usize,
    pub line: usize,
    pub column: usize,
}

impl Origin {
    pub fn start() -> Self {
        Origin {
            offset: 0,
            line: 1,
            column: 1,
        }
    }
}

struct Lexer<'a> {
    src: &'a str,
    origin: Origin,
}

impl<'a> Lexer<'a> {
    fn span(&self, begin: usize, end: usize) -> SourceSpan {
        let before = &self.src[..begin];
        let line_breaks = before.matches('\n').count();
        let column = match before.rfind('\n') {
            Some(i) => before[i + 1..].chars().count() + 1,
            None => before.chars().count() + self.origin.column,
        };
        SourceSpan {
            begin: self.origin.offset + begin,
            end: self.origin.offset + end,
            line: self.origin.line + line_breaks,
            column,
        }
    }

    fn tokenize(&self) -> Result<Vec<(Tok, SourceSpan)>, ParseError> {
        let bytes = self.src.as_bytes();
        let mut out = Vec::new();
        let mut i = 0;
        while i < bytes.len() {
            let c = bytes[i];
            if c.is_ascii_whitespace() {
                i += 1;
                continue;
            }
            let start = i;
            let simple = match c {
                b'+' => Some(Tok::Plus),
                b'-' => Some(Tok::Minus),
                b'*' => Some(Tok::Star),
                b'/' => Some(Tok::Slash),
                b'^' => Some(Tok::Caret),
                b'(' => Some(Tok::LParen),
                b')' => Some(Tok::RParen),
                _ => None,
            };
            if let Some(t) = simple {
                i += 1;
                out.push((t, self.span(start, i)));
                continue;
            }
            if c.is_ascii_digit() || c == b'.' {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let int_end = i;
                let mut frac_digits = "";
                if i < bytes.len() && bytes[i] == b'.' {
                    i += 1;
                    let fs = i;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                    frac_digits = &self.src[fs..i];
                }
                let int_digits = &self.src[start..int_end];
                if int_digits.is_empty() && frac_digits.is_empty() {
                    return Err(ParseError::syntax("malformed number", self.span(start, i)));
                }
                let mut n = if int_digits.is_empty() {
                    BigInt::zero()
                } else {
                    int_digits.parse::<BigInt>().expect("digits")
                };
                let mut d = BigInt::one();
                for ch in frac_digits.bytes() {
                    n = n * 10 + BigInt::from(ch - b'0');
                    d *= 10;
                }
                out.push((Tok::Num(Q::new(n, d)), self.span(start, i)));
                continue;
            }
            if c.is_ascii_alphabetic() || c == b'_' {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                while i < bytes.len() && bytes[i] == b'\'' {
                    i += 1;
                }
                out.push((Tok::Ident(self.src[start..i].to_string()), self.span(start, i)));
                continue;
            }
            let ch = self.src[i..].chars().next().expect("in bounds");
            let end = i + ch.len_utf8();
            return Err(ParseError::syntax(
                format!("unexpected character `{ch}`"),
                self.span(start, end),
            ));
        }
        out.push((Tok::End, self.span(bytes.len(), bytes.len())));
        Ok(out)
    }
}

struct Parser<'v> {
    toks: Vec<(Tok, SourceSpan)>,
    pos: usize,
    vars: &'v VarSet,
}

fn join(a: SourceSpan, b: SourceSpan) -> SourceSpan {
    SourceSpan {
        begin: a.begin,
        end: b.end.max(a.end),
        line: a.line,
        column: a.column,
    }
}

impl<'v> Parser<'v> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn span(&self) -> SourceSpan {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, SourceSpan) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn math(err: crate::expr::ExprError, span: SourceSpan) -> ParseError {
        ParseError::math(err, span)
    }

    // expr := term (('+' | '-') term)*
    fn expr(&mut self) -> Result<(Expr, SourceSpan), ParseError> {
        let (mut acc, mut span) = self.term()?;
        loop {
            let sign = match self.peek() {
                Tok::Plus => 1,
                Tok::Minus => -1,
                _ => break,
            };
            self.bump();
            let (rhs, rs) = self.term()?;
            acc = if sign > 0 { acc + rhs } else { acc - rhs };
            span = join(span, rs);
        }
        Ok((acc, span))
    }

    // term := unary (('*' | '/') unary)*
    fn term(&mut self) -> Result<(Expr, SourceSpan), ParseError> {
        let (mut acc, mut span) = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => Tok::Star,
                Tok::Slash => Tok::Slash,
                _ => break,
            };
            self.bump();
            let (rhs, rs) = self.unary()?;
            let whole = join(span, rs);
            acc = if op == Tok::Star {
                acc * rhs
            } else {
                acc.div(&rhs).map_err(|e| Self::math(e, whole))?
            };
            span = whole;
        }
        Ok((acc, span))
    }

    // unary := '-' unary | power
    fn unary(&mut self) -> Result<(Expr, SourceSpan), ParseError> {
        if *self.peek() == Tok::Minus {
            let (_, s) = self.bump();
            let (e, es) = self.unary()?;
            return Ok((-e, join(s, es)));
        }
        self.power()
    }

    // power := primary ('^' unary)?
    fn power(&mut self) -> Result<(Expr, SourceSpan), ParseError> {
        let (base, bs) = self.primary()?;
        if *self.peek() != Tok::Caret {
            return Ok((base, bs));
        }
        self.bump();
        let (exp, es) = self.unary()?;
        let whole = join(bs, es);
        let e = exp
            .as_rational()
            .ok_or_else(|| ParseError::syntax("exponent must be a rational constant", es))?;
        let v = base.pow(&e).map_err(|err| Self::math(err, whole))?;
        Ok((v, whole))
    }

    fn primary(&mut self) -> Result<(Expr, SourceSpan), ParseError> {
        let (tok, span) = self.bump();
        match tok {
            Tok::Num(c) => Ok((Expr::rational(c), span)),
            Tok::Ident(name) => {
                let atom = Atom::from_name(&name)
                    .filter(|a| self.vars.allows(*a))
                    .ok_or_else(|| ParseError::unknown_symbol(&name, span))?;
                Ok((Expr::atom(atom), span))
            }
            Tok::LParen => {
                let (e, _) = self.expr()?;
                let (close, cs) = self.bump();
                if close != Tok::RParen {
                    return Err(ParseError::syntax(
                        format!("expected `)`, found {}", close.describe()),
                        cs,
                    ));
                }
                Ok((e, join(span, cs)))
            }
            other => Err(ParseError::syntax(
                format!("expected an operand, found {}", other.describe()),
                span,
            )),
        }
    }
}

pub(crate) fn parse_at(text: &str, vars: &VarSet, origin: Origin) -> Result<Expr, ParseError> {
    let lexer = Lexer { src: text, origin };
    let toks = lexer.tokenize()?;
    let mut p = Parser { toks, pos: 0, vars };
    if *p.peek() == Tok::End {
        return Err(ParseError::syntax("empty expression", p.span()));
    }
    let (e, _) = p.expr()?;
    if *p.peek() != Tok::End {
        let span = p.span();
        return Err(ParseError::syntax(
            format!("unexpected {}", p.peek().describe()),
            span,
        ));
    }
    Ok(e)
}

/// Parses and canonicalizes one expression.
///
/// Grammar: `expr := term (("+"|"-") term)*`, `term := unary (("*"|"/") unary)*`,
/// `unary := "-" unary | power`, `power := primary ("^" unary)?`,
/// `primary := number | identifier | "(" expr ")"`. Exponentiation is
/// right-associative and binds tighter than unary minus on its left operand.
pub fn parse_expr(text: &str, vars: &VarSet) -> Result<Expr, ParseError> {
    parse_at(text, vars, Origin::start())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::q;

    fn p(s: &str) -> Expr {
        parse_expr(s, &VarSet::all()).unwrap()
    }

    #[test]
    fn precedence_and_associativity() {
        let x = Expr::atom(Atom::X);
        assert_eq!(p("x^2 + 1"), &x * &x + Expr::one());
        assert_eq!(p("2^3^2"), Expr::int(512));
        assert_eq!(p("-x^2"), -(&x * &x));
        assert_eq!(p("1 - 2 - 3"), Expr::int(-4));
        assert_eq!(p("12/3/2"), Expr::int(2));
        assert_eq!(p("x^-1"), Expr::one().div(&x).unwrap());
    }

    #[test]
    fn decimals_are_exact() {
        assert_eq!(p("0.75"), Expr::rational(q(3, 4)));
        assert_eq!(p(".5 + 1."), Expr::rational(q(3, 2)));
    }

    #[test]
    fn primes_and_parameters() {
        assert_eq!(p("f4''"), Expr::atom(Atom::coef(4, 2)));
        assert_eq!(p("a10"), Expr::atom(Atom::param(10)));
        assert_eq!(p("lambda"), Expr::atom(Atom::LAMBDA));
    }

    #[test]
    fn gauge_invariant_denominator_shape() {
        let e = parse_expr("(2*f3 - 3*f4')/ (4*f4^(3/4))", &VarSet::jet()).unwrap();
        assert!(e.is_polynomial());
        assert_eq!(e.numerator().len(), 2);
    }

    #[test]
    fn dangling_operator_points_at_end() {
        let err = parse_expr("q + ", &VarSet::jet()).unwrap_err();
        assert_eq!(err.span.begin, 4);
        assert_eq!(err.span.end, 4);
        assert!(err.to_string().contains("syntax error"));
    }

    #[test]
    fn unknown_symbols_carry_spans() {
        let err = parse_expr("x + u", &VarSet::only_x()).unwrap_err();
        assert!(err.to_string().contains("unknown symbol"));
        assert_eq!((err.span.begin, err.span.end, err.span.column), (4, 5, 5));
    }

    #[test]
    fn math_errors_carry_spans() {
        let err = parse_expr("1/(x - x)", &VarSet::only_x()).unwrap_err();
        assert!(err.to_string().contains("zero divisor"));
        let err = parse_expr("x^(1/3)", &VarSet::only_x()).unwrap_err();
        assert!(err.to_string().contains("unsupported radical"));
    }
}
