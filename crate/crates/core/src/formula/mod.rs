//! Signatures, the formula AST, and formula-level combinators.

pub mod connective;
pub mod library;
pub mod parse;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use num_traits::Signed;

use crate::hyperspace::{hyper, HyperError};
use crate::rational::{self, Rational};
use crate::valuespace::ValueSpace;
use connective::{Connective, ConnectiveError};

pub use library::Library;
pub use parse::{parse, ParseError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FormulaError {
    #[error("unknown relation symbol `{0}`")]
    UnknownSymbol(String),
    #[error("`{symbol}` takes {expected} argument(s), got {found}")]
    Arity {
        symbol: String,
        expected: usize,
        found: usize,
    },
    #[error("argument {index} of `{connective}` has value space `{found}`, expected `{expected}`")]
    TypeMismatch {
        connective: String,
        index: usize,
        expected: String,
        found: String,
    },
    #[error("`{kind}` needs a body valued in a [0,1] interval, found `{found}`")]
    NotInterval { kind: String, found: String },
    #[error("relation symbols need arity at least 1 (`{0}`)")]
    NullaryRelation(String),
    #[error("distance symbol `{0}` must be a binary relation valued in a [0,1] interval")]
    BadDistance(String),
    #[error("modulus for `{0}` requires a distance symbol")]
    StrayModulus(String),
    #[error("no modulus given for `{0}`")]
    MissingModulus(String),
    #[error("negative modulus for `{0}`")]
    NegativeModulus(String),
    #[error("forced limit: {0}")]
    ForcedLimit(String),
    #[error(transparent)]
    Hyper(#[from] HyperError),
    #[error(transparent)]
    Connective(#[from] ConnectiveError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relation {
    pub arity: usize,
    pub space: Arc<ValueSpace>,
}

/// A relational language: symbols with arities and value spaces, optionally
/// one pseudo-distance symbol and a Lipschitz modulus for every other symbol.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Signature {
    relations: BTreeMap<String, Relation>,
    distance_symbol: Option<String>,
    moduli: BTreeMap<String, Rational>,
}

impl Signature {
    pub fn new(
        relations: BTreeMap<String, Relation>,
        distance_symbol: Option<String>,
        moduli: BTreeMap<String, Rational>,
    ) -> Result<Self, FormulaError> {
        for (name, r) in &relations {
            if r.arity == 0 {
                return Err(FormulaError::NullaryRelation(name.clone()));
            }
        }
        match &distance_symbol {
            None => {
                if let Some(name) = moduli.keys().next() {
                    return Err(FormulaError::StrayModulus(name.clone()));
                }
            }
            Some(d) => {
                let rel = relations.get(d).ok_or_else(|| FormulaError::UnknownSymbol(d.clone()))?;
                if rel.arity != 2 || !rel.space.is_interval_like() {
                    return Err(FormulaError::BadDistance(d.clone()));
                }
                for name in relations.keys().filter(|n| *n != d) {
                    match moduli.get(name) {
                        None => return Err(FormulaError::MissingModulus(name.clone())),
                        Some(l) if l.is_negative() => return Err(FormulaError::NegativeModulus(name.clone())),
                        Some(_) => {}
                    }
                }
                if let Some(stray) = moduli.keys().find(|n| !relations.contains_key(*n) || *n == d) {
                    return Err(FormulaError::StrayModulus(stray.clone()));
                }
            }
        }
        Ok(Self {
            relations,
            distance_symbol,
            moduli,
        })
    }

    /// A signature without a distance symbol.
    pub fn plain(relations: impl IntoIterator<Item = (String, Relation)>) -> Result<Self, FormulaError> {
        Self::new(relations.into_iter().collect(), None, BTreeMap::new())
    }

    pub fn relations(&self) -> &BTreeMap<String, Relation> {
        &self.relations
    }

    pub fn relation(&self, name: &str) -> Option<&Relation> {
        self.relations.get(name)
    }

    pub fn distance_symbol(&self) -> Option<&str> {
        self.distance_symbol.as_deref()
    }

    pub fn moduli(&self) -> &BTreeMap<String, Rational> {
        &self.moduli
    }

    pub fn modulus(&self, name: &str) -> Option<&Rational> {
        self.moduli.get(name)
    }

    /// Every value space mentioned by the signature, deduplicated.
    pub fn spaces(&self) -> Vec<Arc<ValueSpace>> {
        let mut out: Vec<Arc<ValueSpace>> = Vec::new();
        for r in self.relations.values() {
            if !out.iter().any(|s| s == &r.space) {
                out.push(Arc::clone(&r.space));
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum QuantKind {
    Sup,
    Inf,
    Primordial,
}

impl QuantKind {
    pub fn keyword(self) -> &'static str {
        match self {
            QuantKind::Sup => "sup",
            QuantKind::Inf => "inf",
            QuantKind::Primordial => "Q",
        }
    }
}

/// A typed formula. Every node knows its value space.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    Atomic {
        symbol: String,
        args: Vec<String>,
        space: Arc<ValueSpace>,
    },
    Apply {
        connective: Arc<Connective>,
        args: Vec<Arc<Formula>>,
    },
    Quant {
        kind: QuantKind,
        var: String,
        body: Arc<Formula>,
        space: Arc<ValueSpace>,
    },
    /// Truncation of a uniformly Cauchy sequence at its `index`-th term,
    /// with `rate` the certified distance to the limit.
    ForcedLimit {
        index: usize,
        rate: Rational,
        inner: Arc<Formula>,
    },
}

impl Formula {
    pub fn atomic(sig: &Signature, symbol: &str, args: Vec<String>) -> Result<Arc<Formula>, FormulaError> {
        let rel = sig
            .relation(symbol)
            .ok_or_else(|| FormulaError::UnknownSymbol(symbol.to_string()))?;
        if rel.arity != args.len() {
            return Err(FormulaError::Arity {
                symbol: symbol.to_string(),
                expected: rel.arity,
                found: args.len(),
            });
        }
        Ok(Arc::new(Formula::Atomic {
            symbol: symbol.to_string(),
            args,
            space: Arc::clone(&rel.space),
        }))
    }

    pub fn apply(connective: Arc<Connective>, args: Vec<Arc<Formula>>) -> Result<Arc<Formula>, FormulaError> {
        if connective.arity() != args.len() {
            return Err(FormulaError::Arity {
                symbol: connective.name().to_string(),
                expected: connective.arity(),
                found: args.len(),
            });
        }
        for (i, (a, d)) in args.iter().zip(connective.domain()).enumerate() {
            if a.value_space() != d {
                return Err(FormulaError::TypeMismatch {
                    connective: connective.name().to_string(),
                    index: i,
                    expected: d.label().to_string(),
                    found: a.value_space().label().to_string(),
                });
            }
        }
        Ok(Arc::new(Formula::Apply { connective, args }))
    }

    pub fn quant(kind: QuantKind, var: impl Into<String>, body: Arc<Formula>) -> Result<Arc<Formula>, FormulaError> {
        let body_space = body.value_space();
        let space = match kind {
            QuantKind::Sup | QuantKind::Inf => {
                if !body_space.is_interval_like() {
                    return Err(FormulaError::NotInterval {
                        kind: kind.keyword().to_string(),
                        found: body_space.label().to_string(),
                    });
                }
                Arc::clone(body_space)
            }
            QuantKind::Primordial => hyper(body_space)?,
        };
        Ok(Arc::new(Formula::Quant {
            kind,
            var: var.into(),
            body,
            space,
        }))
    }

    pub fn sup(var: impl Into<String>, body: Arc<Formula>) -> Result<Arc<Formula>, FormulaError> {
        Self::quant(QuantKind::Sup, var, body)
    }

    pub fn inf(var: impl Into<String>, body: Arc<Formula>) -> Result<Arc<Formula>, FormulaError> {
        Self::quant(QuantKind::Inf, var, body)
    }

    pub fn primordial(var: impl Into<String>, body: Arc<Formula>) -> Result<Arc<Formula>, FormulaError> {
        Self::quant(QuantKind::Primordial, var, body)
    }

    pub fn value_space(&self) -> &Arc<ValueSpace> {
        match self {
            Formula::Atomic { space, .. } | Formula::Quant { space, .. } => space,
            Formula::Apply { connective, .. } => connective.codomain(),
            Formula::ForcedLimit { inner, .. } => inner.value_space(),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match self {
            Formula::Atomic { args, .. } => {
                for a in args {
                    if !bound.contains(a) {
                        out.insert(a.clone());
                    }
                }
            }
            Formula::Apply { args, .. } => {
                for a in args {
                    a.collect_free(bound, out);
                }
            }
            Formula::Quant { var, body, .. } => {
                bound.push(var.clone());
                body.collect_free(bound, out);
                bound.pop();
            }
            Formula::ForcedLimit { inner, .. } => inner.collect_free(bound, out),
        }
    }

    pub fn is_sentence(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Height of the AST; atoms have depth 0.
    pub fn depth(&self) -> usize {
        match self {
            Formula::Atomic { .. } => 0,
            Formula::Apply { args, .. } => 1 + args.iter().map(|a| a.depth()).max().unwrap_or(0),
            Formula::Quant { body, .. } => 1 + body.depth(),
            Formula::ForcedLimit { inner, .. } => inner.depth(),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Formula::Atomic { .. } => 1,
            Formula::Apply { args, .. } => 1 + args.iter().map(|a| a.size()).sum::<usize>(),
            Formula::Quant { body, .. } => 1 + body.size(),
            Formula::ForcedLimit { inner, .. } => inner.size(),
        }
    }

    /// Every connective used, outermost first, deduplicated by name.
    pub fn connectives(&self) -> Vec<Arc<Connective>> {
        let mut out: Vec<Arc<Connective>> = Vec::new();
        self.collect_connectives(&mut out);
        out
    }

    fn collect_connectives(&self, out: &mut Vec<Arc<Connective>>) {
        match self {
            Formula::Atomic { .. } => {}
            Formula::Apply { connective, args } => {
                if !out.iter().any(|c| c == connective) {
                    out.push(Arc::clone(connective));
                }
                for a in args {
                    a.collect_connectives(out);
                }
            }
            Formula::Quant { body, .. } => body.collect_connectives(out),
            Formula::ForcedLimit { inner, .. } => inner.collect_connectives(out),
        }
    }
}

/// Printed in the surface grammar. A forced limit prints as its chosen term.
impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Atomic { symbol, args, .. } => write!(f, "{symbol}({})", args.join(", ")),
            Formula::Apply { connective, args } => {
                write!(f, "{}(", connective.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
            Formula::Quant { kind, var, body, .. } => write!(f, "{} {var}. {body}", kind.keyword()),
            Formula::ForcedLimit { inner, .. } => write!(f, "{inner}"),
        }
    }
}

/// The finite truncation of the limit of `formulas`, a sequence declared
/// uniformly Cauchy with `|φ_n − φ_m| ≤ rate(min(n, m))`: the first term
/// `φ_N` with `rate(N) ≤ tol`, marked with its certificate.
pub fn forced_limit(
    rate: impl Fn(usize) -> Rational,
    formulas: &[Arc<Formula>],
    tol: &Rational,
) -> Result<Arc<Formula>, FormulaError> {
    if !tol.is_positive() {
        return Err(FormulaError::ForcedLimit(format!(
            "tolerance must be positive, got {}",
            rational::to_display(tol)
        )));
    }
    let mut previous: Option<Rational> = None;
    for (n, phi) in formulas.iter().enumerate() {
        if !phi.value_space().is_interval_like() {
            return Err(FormulaError::NotInterval {
                kind: "forced limit".into(),
                found: phi.value_space().label().to_string(),
            });
        }
        let r = rate(n);
        if r.is_negative() || previous.as_ref().is_some_and(|p| r > *p) {
            return Err(FormulaError::ForcedLimit(format!(
                "rate must be nonnegative and nonincreasing (fails at n = {n})"
            )));
        }
        if r <= *tol {
            return Ok(Arc::new(Formula::ForcedLimit {
                index: n,
                rate: r,
                inner: Arc::clone(phi),
            }));
        }
        previous = Some(r);
    }
    Err(FormulaError::ForcedLimit(format!(
        "rate stays above {} over all {} terms",
        rational::to_display(tol),
        formulas.len()
    )))
}
