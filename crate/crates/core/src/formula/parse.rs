//! Recursive-descent parser for the formula grammar.
//!
//! ```text
//! formula := quant | apply | atom
//! quant   := ("sup" | "inf" | "Q") IDENT "." formula
//! apply   := IDENT "(" [formula ("," formula)*] ")"
//! atom    := IDENT "(" IDENT ("," IDENT)* ")"
//! ```
//!
//! A name declared in the signature is read as a relation symbol; any other
//! name is looked up as a connective.

use std::sync::Arc;

use super::library::{Library, KEYWORDS};
use super::{Formula, FormulaError, QuantKind, Signature};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("syntax error at column {column}: {message}")]
    Syntax { column: usize, message: String },
    #[error("at column {column}: {source}")]
    Type {
        column: usize,
        #[source]
        source: FormulaError,
    },
}

impl ParseError {
    pub fn column(&self) -> usize {
        match self {
            ParseError::Syntax { column, .. } | ParseError::Type { column, .. } => *column,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    Comma,
    Dot,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Dot => "`.`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

/// Tokens paired with 1-based character columns.
fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let column = i + 1;
        match c {
            c if c.is_whitespace() => i += 1,
            '(' => {
                out.push((Tok::LParen, column));
                i += 1;
            }
            ')' => {
                out.push((Tok::RParen, column));
                i += 1;
            }
            ',' => {
                out.push((Tok::Comma, column));
                i += 1;
            }
            '.' => {
                out.push((Tok::Dot, column));
                i += 1;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || matches!(chars[i], '_' | '#' | '\'')) {
                    i += 1;
                }
                out.push((Tok::Ident(chars[start..i].iter().collect()), column));
            }
            other => {
                return Err(ParseError::Syntax {
                    column,
                    message: format!("unexpected character `{other}`"),
                })
            }
        }
    }
    out.push((Tok::End, chars.len() + 1));
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    sig: &'a Signature,
    lib: &'a Library,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn column(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> Result<(), ParseError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(&want.describe()))
        }
    }

    fn unexpected(&self, wanted: &str) -> ParseError {
        ParseError::Syntax {
            column: self.column(),
            message: format!("expected {wanted}, found {}", self.peek().describe()),
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            _ => Err(self.unexpected("an identifier")),
        }
    }

    fn formula(&mut self) -> Result<Arc<Formula>, ParseError> {
        let column = self.column();
        let name = self.ident()?;
        if KEYWORDS.contains(&name.as_str()) && matches!(self.peek(), Tok::Ident(_)) {
            let kind = match name.as_str() {
                "sup" => QuantKind::Sup,
                "inf" => QuantKind::Inf,
                _ => QuantKind::Primordial,
            };
            let var = self.ident()?;
            self.expect(Tok::Dot)?;
            let body = self.formula()?;
            return Formula::quant(kind, var, body).map_err(|source| ParseError::Type { column, source });
        }
        self.expect(Tok::LParen)?;
        if self.sig.relation(&name).is_some() {
            let mut vars = vec![self.ident()?];
            while *self.peek() == Tok::Comma {
                self.bump();
                vars.push(self.ident()?);
            }
            self.expect(Tok::RParen)?;
            return Formula::atomic(self.sig, &name, vars).map_err(|source| ParseError::Type { column, source });
        }
        let mut args = Vec::new();
        if *self.peek() != Tok::RParen {
            args.push(self.formula()?);
            while *self.peek() == Tok::Comma {
                self.bump();
                args.push(self.formula()?);
            }
        }
        self.expect(Tok::RParen)?;
        let spaces: Vec<_> = args.iter().map(|a| Arc::clone(a.value_space())).collect();
        let connective = self
            .lib
            .resolve(&name, &spaces)
            .map_err(|source| ParseError::Type { column, source })?
            .ok_or_else(|| ParseError::Type {
                column,
                source: FormulaError::UnknownSymbol(name.clone()),
            })?;
        Formula::apply(connective, args).map_err(|source| ParseError::Type { column, source })
    }
}

/// Parse and typecheck a formula over `sig`, resolving connectives in `lib`.
pub fn parse(text: &str, sig: &Signature, lib: &Library) -> Result<Arc<Formula>, ParseError> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        sig,
        lib,
    };
    let f = p.formula()?;
    if *p.peek() != Tok::End {
        return Err(p.unexpected("end of input"));
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::Relation;
    use crate::rational::rat;
    use crate::valuespace::ValueSpace;

    fn sig() -> Signature {
        let unit = Arc::new(ValueSpace::unit_grid(&rat(1, 10)).unwrap());
        let other = Arc::new(ValueSpace::unit_grid(&rat(1, 2)).unwrap());
        Signature::plain([
            (
                "P".to_string(),
                Relation {
                    arity: 1,
                    space: unit.clone(),
                },
            ),
            ("P2".to_string(), Relation { arity: 2, space: unit }),
            ("R".to_string(), Relation { arity: 1, space: other }),
        ])
        .unwrap()
    }

    #[test]
    fn parses_quantifiers() {
        let sig = sig();
        let lib = Library::new();
        let f = parse("sup x. P(x)", &sig, &lib).unwrap();
        assert!(matches!(&*f, Formula::Quant { kind: QuantKind::Sup, var, .. } if var == "x"));
        assert!(f.is_sentence());
        let q = parse("Q x. P2(x, y)", &sig, &lib).unwrap();
        assert_eq!(q.free_vars().into_iter().collect::<Vec<_>>(), vec!["y".to_string()]);
        assert_eq!(q.value_space().len(), (1 << 11) - 1);
        assert_eq!(q.value_space().hyper_base().unwrap(), &sig.relation("P").unwrap().space);
    }

    #[test]
    fn reports_errors_with_columns() {
        let sig = sig();
        let lib = Library::new();
        let e = parse("max(P(x), R(x))", &sig, &lib).unwrap_err();
        assert!(matches!(
            e,
            ParseError::Type {
                source: FormulaError::TypeMismatch { .. },
                ..
            }
        ));
        let e = parse("sup x P(x)", &sig, &lib).unwrap_err();
        assert!(matches!(e, ParseError::Syntax { column: 7, .. }), "{e}");
        let e = parse("P(x, y)", &sig, &lib).unwrap_err();
        assert!(matches!(
            e,
            ParseError::Type {
                source: FormulaError::Arity { .. },
                column: 1
            }
        ));
        let e = parse("foo(P(x))", &sig, &lib).unwrap_err();
        assert!(matches!(
            e,
            ParseError::Type {
                source: FormulaError::UnknownSymbol(_),
                ..
            }
        ));
        let e = parse("sup x. Q y. P(y)", &sig, &lib).unwrap_err();
        assert!(matches!(
            e,
            ParseError::Type {
                source: FormulaError::NotInterval { .. },
                ..
            }
        ));
        assert!(parse("P(x) P(x)", &sig, &lib).is_err());
        assert!(parse("P(x", &sig, &lib).is_err());
        assert!(parse("P(x)$", &sig, &lib).is_err());
    }

    #[test]
    fn print_round_trips() {
        let sig = sig();
        let lib = Library::new();
        for text in [
            "sup x. P(x)",
            "inf x. neg(P(x))",
            "max(P(x), inf y. P2(x, y))",
            "hsup(Q x. P(x))",
            "avg(P(x), mul(P(y), P(x)))",
        ] {
            let f = parse(text, &sig, &lib).unwrap();
            assert_eq!(f.to_string(), text);
            assert_eq!(parse(&f.to_string(), &sig, &lib).unwrap(), f);
        }
    }
}
