//! Finite structures, evaluation under both quantifier regimes, and the
//! pseudo-distance toolkit: axiom checks, zero-distance quotients, and
//! functions encoded as relations.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_traits::Zero;

use crate::formula::connective::{ConnectiveError, DomainTuples};
use crate::formula::{Formula, FormulaError, QuantKind, Relation, Signature};
use crate::hyperspace::{CompactSet, HyperError};
use crate::rational::{self, one, zero, Rational};
use crate::valuespace::{Point, SpaceError, ValueSpace};

/// Variable name to universe index.
pub type Assignment = BTreeMap<String, usize>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SemanticsError {
    #[error("the universe must be nonempty")]
    EmptyUniverse,
    #[error("universe element `{0}` is listed twice")]
    DuplicateElement(String),
    #[error("unknown universe element `{0}`")]
    UnknownElement(String),
    #[error("element index {0} is outside the universe")]
    ElementOutOfRange(usize),
    #[error("interpretation given for undeclared symbol `{0}`")]
    UnknownSymbol(String),
    #[error("`{symbol}` has no value at ({tuple})")]
    MissingValue { symbol: String, tuple: String },
    #[error("`{symbol}` takes {expected} argument(s), tuple ({tuple}) has {found}")]
    TupleArity {
        symbol: String,
        tuple: String,
        expected: usize,
        found: usize,
    },
    #[error("`{symbol}`({tuple}) = {value} is not in the value space `{space}`")]
    NotMember {
        symbol: String,
        tuple: String,
        value: String,
        space: String,
    },
    #[error("variable `{0}` is free and unassigned")]
    UnboundVariable(String),
    #[error("formula uses `{symbol}` with value space `{found}`, the structure has `{expected}`")]
    TypeMismatch {
        symbol: String,
        expected: String,
        found: String,
    },
    #[error("the signature has no distance symbol")]
    NoDistance,
    #[error("the structure violates the pseudo-distance axioms: {0}")]
    NotPseudometric(MetricViolation),
    #[error("`{symbol}` differs on zero-distance tuples ({left}) and ({right})")]
    IllDefined {
        symbol: String,
        left: String,
        right: String,
    },
    #[error("condition sentence has free variables: {0}")]
    FreeVariables(String),
    #[error("function `{name}` has no value at ({tuple})")]
    PartialFunction { name: String, tuple: String },
    #[error("symbol `{0}` is already declared")]
    SymbolExists(String),
    #[error(transparent)]
    Formula(#[from] FormulaError),
    #[error(transparent)]
    Hyper(#[from] HyperError),
    #[error(transparent)]
    Connective(#[from] ConnectiveError),
    #[error(transparent)]
    Space(#[from] SpaceError),
}

/// A finite structure: a universe and a total interpretation of every
/// relation symbol, keyed by tuples of universe indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Structure {
    signature: Arc<Signature>,
    universe: Vec<String>,
    interp: BTreeMap<String, BTreeMap<Vec<usize>, Point>>,
}

impl Structure {
    pub fn new(
        signature: Arc<Signature>,
        universe: Vec<String>,
        interp: BTreeMap<String, BTreeMap<Vec<usize>, Point>>,
    ) -> Result<Self, SemanticsError> {
        if universe.is_empty() {
            return Err(SemanticsError::EmptyUniverse);
        }
        for (i, e) in universe.iter().enumerate() {
            if universe[..i].contains(e) {
                return Err(SemanticsError::DuplicateElement(e.clone()));
            }
        }
        let m = Self {
            signature,
            universe,
            interp,
        };
        if let Some(name) = m.interp.keys().find(|s| m.signature.relation(s).is_none()) {
            return Err(SemanticsError::UnknownSymbol(name.clone()));
        }
        for (name, rel) in m.signature.relations() {
            let table = m.interp.get(name);
            for (tuple, p) in table.into_iter().flatten() {
                if tuple.len() != rel.arity {
                    return Err(SemanticsError::TupleArity {
                        symbol: name.clone(),
                        tuple: m.tuple_text(tuple),
                        expected: rel.arity,
                        found: tuple.len(),
                    });
                }
                if let Some(&bad) = tuple.iter().find(|&&i| i >= m.universe.len()) {
                    return Err(SemanticsError::ElementOutOfRange(bad));
                }
                if p.dimension() != rel.space.dimension() || !rel.space.membership(p, &zero())? {
                    return Err(SemanticsError::NotMember {
                        symbol: name.clone(),
                        tuple: m.tuple_text(tuple),
                        value: p.to_string(),
                        space: rel.space.label().to_string(),
                    });
                }
            }
            for t in m.tuples(rel.arity) {
                if !table.is_some_and(|tab| tab.contains_key(&t)) {
                    return Err(SemanticsError::MissingValue {
                        symbol: name.clone(),
                        tuple: m.tuple_text(&t),
                    });
                }
            }
        }
        Ok(m)
    }

    /// Build a structure by evaluating `value` on every tuple of every symbol.
    pub fn from_fn(
        signature: Arc<Signature>,
        universe: Vec<String>,
        mut value: impl FnMut(&str, &Relation, &[usize]) -> Point,
    ) -> Result<Self, SemanticsError> {
        let n = universe.len();
        let mut interp = BTreeMap::new();
        for (name, rel) in signature.relations() {
            let table: BTreeMap<Vec<usize>, Point> = all_tuples(n, rel.arity)
                .map(|t| {
                    let p = value(name, rel, &t);
                    (t, p)
                })
                .collect();
            interp.insert(name.clone(), table);
        }
        Self::new(signature, universe, interp)
    }

    pub fn signature(&self) -> &Arc<Signature> {
        &self.signature
    }

    pub fn universe(&self) -> &[String] {
        &self.universe
    }

    pub fn len(&self) -> usize {
        self.universe.len()
    }

    pub fn is_empty(&self) -> bool {
        self.universe.is_empty()
    }

    pub fn element(&self, name: &str) -> Option<usize> {
        self.universe.iter().position(|e| e == name)
    }

    pub fn interp(&self) -> &BTreeMap<String, BTreeMap<Vec<usize>, Point>> {
        &self.interp
    }

    pub fn table(&self, symbol: &str) -> Option<&BTreeMap<Vec<usize>, Point>> {
        self.interp.get(symbol)
    }

    pub fn value(&self, symbol: &str, tuple: &[usize]) -> Option<&Point> {
        self.interp.get(symbol)?.get(tuple)
    }

    /// Every `arity`-tuple of universe indices, in lexicographic order.
    pub fn tuples(&self, arity: usize) -> impl Iterator<Item = Vec<usize>> {
        all_tuples(self.universe.len(), arity)
    }

    pub fn tuple_text(&self, tuple: &[usize]) -> String {
        tuple
            .iter()
            .map(|&i| self.universe.get(i).cloned().unwrap_or_else(|| format!("#{i}")))
            .collect::<Vec<_>>()
            .join(",")
    }

    /// Parse a comma-joined key of element names.
    pub fn parse_tuple(&self, key: &str) -> Result<Vec<usize>, SemanticsError> {
        key.split(',')
            .map(|e| {
                let e = e.trim();
                self.element(e)
                    .ok_or_else(|| SemanticsError::UnknownElement(e.to_string()))
            })
            .collect()
    }

    /// The raw value of the distance symbol.
    pub fn distance(&self, a: usize, b: usize) -> Result<Rational, SemanticsError> {
        let d = self.signature.distance_symbol().ok_or(SemanticsError::NoDistance)?;
        Ok(self
            .value(d, &[a, b])
            .expect("interpretations are total")
            .value()
            .clone())
    }

    fn tuple_distance(&self, a: &[usize], b: &[usize]) -> Result<Rational, SemanticsError> {
        let mut best = zero();
        for (&x, &y) in a.iter().zip(b) {
            let d = self.distance(x, y)?;
            if d > best {
                best = d;
            }
        }
        Ok(best)
    }
}

fn all_tuples(n: usize, arity: usize) -> impl Iterator<Item = Vec<usize>> {
    let radices = vec![n; arity];
    DomainTuples::from_radices(radices)
}

/// The value of a formula together with how far it may sit from the value
/// the same formula takes on the compact spaces the nets approximate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalResult {
    pub value: Point,
    pub space: Arc<ValueSpace>,
    pub error_bound: Rational,
}

impl EvalResult {
    /// The value as a subset, for hyperspace-valued formulas.
    pub fn compact_set(&self) -> Option<CompactSet> {
        self.space.hyper_base()?;
        CompactSet::decode(&self.space, &self.value).ok()
    }

    /// The value of a dimension-1 formula.
    pub fn scalar(&self) -> &Rational {
        self.value.value()
    }
}

impl fmt::Display for EvalResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.compact_set() {
            Some(k) => write!(f, "{k}"),
            None => write!(f, "{}", self.value),
        }
    }
}

/// Evaluate `phi` in `m` under `asg`.
///
/// Atomic values are rounded to the symbol's net. Connectives act on net
/// points and round into their codomain net; the error bound grows by
/// `L · Σ child bounds + codomain resolution`. `sup`/`inf` are exact maxima
/// and minima over the universe, and `Q` collects the body values as a
/// subset of the body's net.
pub fn eval(m: &Structure, phi: &Formula, asg: &Assignment) -> Result<EvalResult, SemanticsError> {
    let mut env = asg.clone();
    eval_in(m, phi, &mut env)
}

fn eval_in(m: &Structure, phi: &Formula, env: &mut Assignment) -> Result<EvalResult, SemanticsError> {
    match phi {
        Formula::Atomic { symbol, args, space } => {
            let rel = m
                .signature
                .relation(symbol)
                .ok_or_else(|| SemanticsError::UnknownSymbol(symbol.clone()))?;
            if &rel.space != space {
                return Err(SemanticsError::TypeMismatch {
                    symbol: symbol.clone(),
                    expected: rel.space.label().to_string(),
                    found: space.label().to_string(),
                });
            }
            let tuple = args
                .iter()
                .map(|v| {
                    env.get(v)
                        .copied()
                        .ok_or_else(|| SemanticsError::UnboundVariable(v.clone()))
                })
                .collect::<Result<Vec<_>, _>>()?;
            let raw = m.value(symbol, &tuple).ok_or_else(|| SemanticsError::MissingValue {
                symbol: symbol.clone(),
                tuple: m.tuple_text(&tuple),
            })?;
            let (index, _) = space.nearest(raw)?;
            Ok(EvalResult {
                value: space.net()[index].clone(),
                space: Arc::clone(space),
                error_bound: space.resolution().clone(),
            })
        }
        Formula::Apply { connective, args } => {
            let mut points = Vec::with_capacity(args.len());
            let mut child_bounds = zero();
            for a in args {
                let r = eval_in(m, a, env)?;
                child_bounds += r.error_bound;
                points.push(r.value);
            }
            let out = connective.apply(&points)?;
            Ok(EvalResult {
                value: out.point,
                space: Arc::clone(connective.codomain()),
                error_bound: connective.lipschitz() * child_bounds + connective.codomain().resolution(),
            })
        }
        Formula::Quant { kind, var, body, space } => {
            let saved = env.get(var).copied();
            let mut values = Vec::with_capacity(m.len());
            let mut bound = zero();
            for a in 0..m.len() {
                env.insert(var.clone(), a);
                let r = eval_in(m, body, env);
                let r = match r {
                    Ok(r) => r,
                    Err(e) => {
                        restore(env, var, saved);
                        return Err(e);
                    }
                };
                if r.error_bound > bound {
                    bound = r.error_bound.clone();
                }
                values.push(r.value);
            }
            restore(env, var, saved);
            let value = match kind {
                QuantKind::Sup => first_extreme(values, |a, b| a > b),
                QuantKind::Inf => first_extreme(values, |a, b| a < b),
                QuantKind::Primordial => CompactSet::from_points(Arc::clone(body.value_space()), &values)?.encode(),
            };
            Ok(EvalResult {
                value,
                space: Arc::clone(space),
                error_bound: bound,
            })
        }
        Formula::ForcedLimit { rate, inner, .. } => {
            let r = eval_in(m, inner, env)?;
            Ok(EvalResult {
                error_bound: r.error_bound + rate,
                ..r
            })
        }
    }
}

fn restore(env: &mut Assignment, var: &str, saved: Option<usize>) {
    match saved {
        Some(v) => env.insert(var.to_string(), v),
        None => env.remove(var),
    };
}

/// The first value in universe order that no later value beats.
fn first_extreme(values: Vec<Point>, better: impl Fn(&Rational, &Rational) -> bool) -> Point {
    let mut it = values.into_iter();
    let mut best = it.next().expect("universes are nonempty");
    for v in it {
        if better(v.value(), best.value()) {
            best = v;
        }
    }
    best
}

/// A failed pseudo-distance axiom, with element names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MetricViolation {
    Reflexivity {
        a: String,
        value: Rational,
    },
    Symmetry {
        a: String,
        b: String,
        ab: Rational,
        ba: Rational,
    },
    Triangle {
        a: String,
        b: String,
        c: String,
        ac: Rational,
        ab: Rational,
        bc: Rational,
    },
    Modulus {
        symbol: String,
        left: String,
        right: String,
        change: Rational,
        allowed: Rational,
    },
}

impl fmt::Display for MetricViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = rational::to_display;
        match self {
            MetricViolation::Reflexivity { a, value } => write!(f, "d({a},{a}) = {} ≠ 0", r(value)),
            MetricViolation::Symmetry { a, b, ab, ba } => {
                write!(f, "d({a},{b}) = {} but d({b},{a}) = {}", r(ab), r(ba))
            }
            MetricViolation::Triangle { a, b, c, ac, ab, bc } => write!(
                f,
                "d({a},{c}) = {} > d({a},{b}) + d({b},{c}) = {} + {}",
                r(ac),
                r(ab),
                r(bc)
            ),
            MetricViolation::Modulus {
                symbol,
                left,
                right,
                change,
                allowed,
            } => write!(
                f,
                "{symbol}({left}) and {symbol}({right}) differ by {} > {}",
                r(change),
                r(allowed)
            ),
        }
    }
}

impl MetricViolation {
    /// The offending elements (for pair/triple axioms) or tuples.
    pub fn witness(&self) -> Vec<String> {
        match self {
            MetricViolation::Reflexivity { a, .. } => vec![a.clone()],
            MetricViolation::Symmetry { a, b, .. } => vec![a.clone(), b.clone()],
            MetricViolation::Triangle { a, b, c, .. } => vec![a.clone(), b.clone(), c.clone()],
            MetricViolation::Modulus { left, right, .. } => vec![left.clone(), right.clone()],
        }
    }
}

/// Check that the distance symbol is a pseudo-metric and every other symbol
/// respects its modulus. Returns the first violation found.
pub fn check_pseudometric(m: &Structure) -> Result<Option<MetricViolation>, SemanticsError> {
    let d_name = m
        .signature
        .distance_symbol()
        .ok_or(SemanticsError::NoDistance)?
        .to_string();
    let n = m.len();
    let name = |i: usize| m.universe[i].clone();
    for a in 0..n {
        let value = m.distance(a, a)?;
        if !value.is_zero() {
            return Ok(Some(MetricViolation::Reflexivity { a: name(a), value }));
        }
    }
    for a in 0..n {
        for b in (a + 1)..n {
            let (ab, ba) = (m.distance(a, b)?, m.distance(b, a)?);
            if ab != ba {
                return Ok(Some(MetricViolation::Symmetry {
                    a: name(a),
                    b: name(b),
                    ab,
                    ba,
                }));
            }
        }
    }
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let (ac, ab, bc) = (m.distance(a, c)?, m.distance(a, b)?, m.distance(b, c)?);
                if ac > &ab + &bc {
                    return Ok(Some(MetricViolation::Triangle {
                        a: name(a),
                        b: name(b),
                        c: name(c),
                        ac,
                        ab,
                        bc,
                    }));
                }
            }
        }
    }
    for (symbol, rel) in m.signature.relations() {
        if *symbol == d_name {
            continue;
        }
        let modulus = m.signature.modulus(symbol).cloned().unwrap_or_else(zero);
        let tuples: Vec<Vec<usize>> = m.tuples(rel.arity).collect();
        for (i, s) in tuples.iter().enumerate() {
            for t in &tuples[i + 1..] {
                let change = rel
                    .space
                    .distance(m.value(symbol, s).unwrap(), m.value(symbol, t).unwrap())?;
                let allowed = &modulus * m.tuple_distance(s, t)?;
                if change > allowed {
                    return Ok(Some(MetricViolation::Modulus {
                        symbol: symbol.clone(),
                        left: m.tuple_text(s),
                        right: m.tuple_text(t),
                        change,
                        allowed,
                    }));
                }
            }
        }
    }
    Ok(None)
}

/// A zero-distance quotient and the map sending each element to its class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Quotient {
    pub structure: Structure,
    pub class_of: Vec<usize>,
}

impl Quotient {
    /// An assignment into the original structure, pushed through the classes.
    pub fn map_assignment(&self, asg: &Assignment) -> Assignment {
        asg.iter().map(|(v, &a)| (v.clone(), self.class_of[a])).collect()
    }
}

/// Identify elements at distance 0. Each class is named after its first
/// element in universe order.
pub fn quotient(m: &Structure) -> Result<Quotient, SemanticsError> {
    if let Some(v) = check_pseudometric(m)? {
        return Err(SemanticsError::NotPseudometric(v));
    }
    let n = m.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for a in 0..n {
        for b in (a + 1)..n {
            if m.distance(a, b)?.is_zero() {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                if ra != rb {
                    let (lo, hi) = (ra.min(rb), ra.max(rb));
                    parent[hi] = lo;
                }
            }
        }
    }
    let roots: Vec<usize> = (0..n).map(|a| find(&mut parent, a)).collect();
    let mut reps: Vec<usize> = Vec::new();
    let mut class_of = vec![0; n];
    for a in 0..n {
        match reps.iter().position(|&r| r == roots[a]) {
            Some(c) => class_of[a] = c,
            None => {
                class_of[a] = reps.len();
                reps.push(roots[a]);
            }
        }
    }
    let mut interp = BTreeMap::new();
    for (symbol, table) in &m.interp {
        let mut induced: BTreeMap<Vec<usize>, (Vec<usize>, Point)> = BTreeMap::new();
        for (tuple, p) in table {
            let key: Vec<usize> = tuple.iter().map(|&a| class_of[a]).collect();
            match induced.get(&key) {
                Some((first, q)) if q != p => {
                    return Err(SemanticsError::IllDefined {
                        symbol: symbol.clone(),
                        left: m.tuple_text(first),
                        right: m.tuple_text(tuple),
                    })
                }
                Some(_) => {}
                None => {
                    induced.insert(key, (tuple.clone(), p.clone()));
                }
            }
        }
        interp.insert(symbol.clone(), induced.into_iter().map(|(k, (_, p))| (k, p)).collect());
    }
    let universe = reps.iter().map(|&r| m.universe[r].clone()).collect();
    Ok(Quotient {
        structure: Structure::new(Arc::clone(&m.signature), universe, interp)?,
        class_of,
    })
}

/// A failed axiom for a relation meant to encode `d(f(x̄), y)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FunctionViolation {
    /// No `y` at distance 0 from `f(x̄)`.
    NoValue { args: String, least: Rational },
    /// `|P(x̄,y) − d(y,z)| > P(x̄,z)`.
    NotDistanceForm { args: String, y: String, z: String },
    /// `P(x̄, ·)` is not 1-Lipschitz.
    SecondArgument { args: String, y: String, z: String },
    /// `P(·, y)` breaks the modulus of `f`.
    FirstArguments { left: String, right: String, y: String },
}

impl fmt::Display for FunctionViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctionViolation::NoValue { args, least } => write!(
                f,
                "no y with P({args},y) = 0 (least value {})",
                rational::to_display(least)
            ),
            FunctionViolation::NotDistanceForm { args, y, z } => {
                write!(f, "|P({args},{y}) − d({y},{z})| > P({args},{z})")
            }
            FunctionViolation::SecondArgument { args, y, z } => {
                write!(f, "P({args},·) is not 1-Lipschitz between {y} and {z}")
            }
            FunctionViolation::FirstArguments { left, right, y } => {
                write!(f, "P(·,{y}) changes too fast between ({left}) and ({right})")
            }
        }
    }
}

/// Check the axioms saying `symbol(x̄, y)` is `d(f(x̄), y)` for some `f` with
/// modulus `lf`. Returns the first violation.
pub fn check_function_axioms(
    m: &Structure,
    symbol: &str,
    lf: &Rational,
) -> Result<Option<FunctionViolation>, SemanticsError> {
    m.signature.distance_symbol().ok_or(SemanticsError::NoDistance)?;
    let rel = m
        .signature
        .relation(symbol)
        .ok_or_else(|| SemanticsError::UnknownSymbol(symbol.to_string()))?;
    let k = rel.arity - 1;
    let n = m.len();
    let p = |xs: &[usize], y: usize| -> Rational {
        let mut t = xs.to_vec();
        t.push(y);
        m.value(symbol, &t).expect("interpretations are total").value().clone()
    };
    let xs_all: Vec<Vec<usize>> = m.tuples(k).collect();
    for xs in &xs_all {
        let least = (0..n).map(|y| p(xs, y)).min().expect("universes are nonempty");
        if !least.is_zero() {
            return Ok(Some(FunctionViolation::NoValue {
                args: m.tuple_text(xs),
                least,
            }));
        }
    }
    for xs in &xs_all {
        for y in 0..n {
            for z in 0..n {
                let (py, pz, dyz) = (p(xs, y), p(xs, z), m.distance(y, z)?);
                if rational::abs_diff(&py, &dyz) > pz {
                    return Ok(Some(FunctionViolation::NotDistanceForm {
                        args: m.tuple_text(xs),
                        y: m.universe[y].clone(),
                        z: m.universe[z].clone(),
                    }));
                }
                if rational::abs_diff(&py, &pz) > dyz {
                    return Ok(Some(FunctionViolation::SecondArgument {
                        args: m.tuple_text(xs),
                        y: m.universe[y].clone(),
                        z: m.universe[z].clone(),
                    }));
                }
            }
        }
    }
    for (i, xs) in xs_all.iter().enumerate() {
        for ws in &xs_all[i + 1..] {
            let allowed = lf * m.tuple_distance(xs, ws)?;
            for y in 0..n {
                if rational::abs_diff(&p(xs, y), &p(ws, y)) > allowed {
                    return Ok(Some(FunctionViolation::FirstArguments {
                        left: m.tuple_text(xs),
                        right: m.tuple_text(ws),
                        y: m.universe[y].clone(),
                    }));
                }
            }
        }
    }
    Ok(None)
}

/// The smallest `L` with `d(f(x̄), f(w̄)) ≤ L · d(x̄, w̄)`, or `None` if `f`
/// separates some zero-distance pair.
pub fn function_modulus(
    m: &Structure,
    f_table: &BTreeMap<Vec<usize>, usize>,
) -> Result<Option<Rational>, SemanticsError> {
    let mut best = zero();
    let entries: Vec<_> = f_table.iter().collect();
    for (i, (xs, &fx)) in entries.iter().enumerate() {
        for (ws, &fw) in &entries[i + 1..] {
            let out = m.distance(fx, fw)?;
            if out.is_zero() {
                continue;
            }
            let din = m.tuple_distance(xs, ws)?;
            if din.is_zero() {
                return Ok(None);
            }
            let slope = out / din;
            if slope > best {
                best = slope;
            }
        }
    }
    Ok(Some(best))
}

/// The outcome of [`encode_function`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionEncoding {
    pub structure: Structure,
    /// Modulus of `f` used for the new symbol (`L_f`); the symbol itself
    /// gets `L_f + 1`.
    pub modulus: Rational,
    pub violation: Option<FunctionViolation>,
}

/// Add a relation `name(x̄, y) := d(f(x̄), y)` for the function given by
/// `f_table`, and check the axioms that characterize such relations.
pub fn encode_function(
    m: &Structure,
    name: &str,
    arity: usize,
    f_table: &BTreeMap<Vec<usize>, usize>,
    modulus: Option<Rational>,
) -> Result<FunctionEncoding, SemanticsError> {
    let d_name = m
        .signature
        .distance_symbol()
        .ok_or(SemanticsError::NoDistance)?
        .to_string();
    if m.signature.relation(name).is_some() {
        return Err(SemanticsError::SymbolExists(name.to_string()));
    }
    for t in m.tuples(arity) {
        match f_table.get(&t) {
            None => {
                return Err(SemanticsError::PartialFunction {
                    name: name.to_string(),
                    tuple: m.tuple_text(&t),
                })
            }
            Some(&v) if v >= m.len() => return Err(SemanticsError::ElementOutOfRange(v)),
            Some(_) => {}
        }
    }
    let lf = match modulus {
        Some(l) => l,
        None => function_modulus(m, f_table)?.ok_or_else(|| SemanticsError::IllDefined {
            symbol: name.to_string(),
            left: "zero-distance arguments".into(),
            right: "distinct values".into(),
        })?,
    };
    let d_space = Arc::clone(
        &m.signature
            .relation(&d_name)
            .expect("distance symbol is declared")
            .space,
    );
    let mut relations = m.signature.relations().clone();
    relations.insert(
        name.to_string(),
        Relation {
            arity: arity + 1,
            space: d_space,
        },
    );
    let mut moduli = m.signature.moduli().clone();
    moduli.insert(name.to_string(), &lf + one());
    let sig = Arc::new(Signature::new(relations, Some(d_name.clone()), moduli)?);
    let mut interp = m.interp.clone();
    let mut table = BTreeMap::new();
    for t in m.tuples(arity + 1) {
        let (xs, y) = t.split_at(arity);
        let fx = f_table[xs];
        table.insert(t.clone(), m.value(&d_name, &[fx, y[0]]).expect("total").clone());
    }
    interp.insert(name.to_string(), table);
    let structure = Structure::new(sig, m.universe.clone(), interp)?;
    let violation = check_function_axioms(&structure, name, &lf)?;
    Ok(FunctionEncoding {
        structure,
        modulus: lf,
        violation,
    })
}

/// Whether the sentence `sigma` satisfies the closed condition `σ ∈ K`:
/// its value lies within `error_bound + tol` of `K`.
pub fn check_condition(m: &Structure, sigma: &Formula, k: &CompactSet, tol: &Rational) -> Result<bool, SemanticsError> {
    let free = sigma.free_vars();
    if !free.is_empty() {
        return Err(SemanticsError::FreeVariables(
            free.into_iter().collect::<Vec<_>>().join(", "),
        ));
    }
    if k.space() != sigma.value_space() {
        return Err(HyperError::SpaceMismatch {
            left: k.space().label().to_string(),
            right: sigma.value_space().label().to_string(),
        }
        .into());
    }
    let r = eval(m, sigma, &Assignment::new())?;
    Ok(k.distance_from(&r.value)? <= r.error_bound + tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{parse, Library};
    use crate::rational::{int, rat};

    fn s(v: Rational) -> Point {
        Point::scalar(v).unwrap()
    }

    fn running_example() -> Structure {
        let unit = Arc::new(ValueSpace::unit_grid(&rat(1, 10)).unwrap());
        let sig = Arc::new(Signature::plain([("P".to_string(), Relation { arity: 1, space: unit })]).unwrap());
        let vals = [rat(3, 10), rat(4, 5)];
        Structure::from_fn(sig, vec!["a".into(), "b".into()], |_, _, t| s(vals[t[0]].clone())).unwrap()
    }

    fn ev(m: &Structure, text: &str) -> EvalResult {
        let f = parse(text, m.signature(), &Library::new()).unwrap();
        eval(m, &f, &Assignment::new()).unwrap()
    }

    #[test]
    fn evaluates_running_example() {
        let m = running_example();
        assert_eq!(ev(&m, "sup x. P(x)").scalar(), &rat(4, 5));
        let q = ev(&m, "Q x. P(x)").compact_set().unwrap();
        assert_eq!(
            q.points().map(|p| p.value().clone()).collect::<Vec<_>>(),
            vec![rat(3, 10), rat(4, 5)]
        );
        assert_eq!(ev(&m, "inf x. neg(P(x))").scalar(), &rat(1, 5));
        assert_eq!(ev(&m, "hsup(Q x. P(x))").scalar(), &rat(4, 5));
    }

    #[test]
    fn unbound_variables_are_errors() {
        let m = running_example();
        let f = parse("P(y)", m.signature(), &Library::new()).unwrap();
        assert!(matches!(
            eval(&m, &f, &Assignment::new()),
            Err(SemanticsError::UnboundVariable(_))
        ));
    }

    #[test]
    fn error_bounds_vanish_on_exact_spaces() {
        let bit = Arc::new(ValueSpace::finite(vec![s(int(0)), s(int(1))]).unwrap());
        let sig = Arc::new(Signature::plain([("P".to_string(), Relation { arity: 1, space: bit })]).unwrap());
        let m = Structure::from_fn(sig, vec!["a".into(), "b".into()], |_, _, t| s(int(t[0] as i64))).unwrap();
        assert_eq!(ev(&m, "sup x. neg(P(x))").error_bound, int(0));
        assert_eq!(ev(&m, "Q x. max(P(x), P(x))").error_bound, int(0));
    }

    fn metric_structure(d: Vec<Vec<Rational>>, p: Vec<Rational>, lp: Rational) -> Structure {
        let unit = Arc::new(ValueSpace::unit_grid(&rat(1, 10)).unwrap());
        let rel = |arity| Relation {
            arity,
            space: unit.clone(),
        };
        let sig = Arc::new(
            Signature::new(
                [("d".to_string(), rel(2)), ("P".to_string(), rel(1))]
                    .into_iter()
                    .collect(),
                Some("d".into()),
                [("P".to_string(), lp)].into_iter().collect(),
            )
            .unwrap(),
        );
        let names = (0..p.len()).map(|i| format!("e{i}")).collect();
        Structure::from_fn(sig, names, |name, _, t| {
            if name == "d" {
                s(d[t[0]][t[1]].clone())
            } else {
                s(p[t[0]].clone())
            }
        })
        .unwrap()
    }

    #[test]
    fn pseudometric_examples() {
        let d = vec![
            vec![int(0), rat(1, 2), int(1)],
            vec![rat(1, 2), int(0), rat(1, 2)],
            vec![int(1), rat(1, 2), int(0)],
        ];
        let ok = metric_structure(d.clone(), vec![int(0), rat(1, 2), int(1)], int(1));
        assert_eq!(check_pseudometric(&ok).unwrap(), None);
        let mut asym = d.clone();
        asym[0][1] = rat(3, 10);
        let bad = metric_structure(asym, vec![int(0); 3], int(1));
        assert!(matches!(
            check_pseudometric(&bad).unwrap(),
            Some(MetricViolation::Symmetry { ref a, ref b, .. }) if a == "e0" && b == "e1"
        ));
        let close = vec![vec![int(0), rat(1, 10)], vec![rat(1, 10), int(0)]];
        let bad = metric_structure(close, vec![int(0), int(1)], int(1));
        assert!(matches!(
            check_pseudometric(&bad).unwrap(),
            Some(MetricViolation::Modulus { .. })
        ));
    }

    #[test]
    fn quotient_examples() {
        let d = vec![
            vec![int(0), int(0), int(1), int(1)],
            vec![int(0), int(0), int(1), int(1)],
            vec![int(1), int(1), int(0), int(0)],
            vec![int(1), int(1), int(0), int(0)],
        ];
        let m = metric_structure(d, vec![rat(1, 5), rat(1, 5), rat(7, 10), rat(7, 10)], int(1));
        let q = quotient(&m).unwrap();
        assert_eq!(q.structure.universe(), &["e0".to_string(), "e2".to_string()]);
        assert_eq!(q.class_of, vec![0, 0, 1, 1]);
        let apart = metric_structure(
            vec![vec![int(0), int(1)], vec![int(1), int(0)]],
            vec![int(0), int(1)],
            int(1),
        );
        assert_eq!(quotient(&apart).unwrap().structure, apart);
    }

    #[test]
    fn function_encoding_examples() {
        let d = vec![vec![int(0), int(1)], vec![int(1), int(0)]];
        let m = metric_structure(d, vec![int(0), int(1)], int(1));
        let id: BTreeMap<Vec<usize>, usize> = [(vec![0], 0), (vec![1], 1)].into_iter().collect();
        let enc = encode_function(&m, "F", 1, &id, None).unwrap();
        assert_eq!(enc.violation, None);
        assert_eq!(enc.modulus, int(1));
        for t in enc.structure.tuples(2) {
            assert_eq!(enc.structure.value("F", &t), enc.structure.value("d", &t));
        }
        let constant: BTreeMap<Vec<usize>, usize> = [(vec![0], 1), (vec![1], 1)].into_iter().collect();
        let enc = encode_function(&m, "F", 1, &constant, None).unwrap();
        assert_eq!(enc.violation, None);
        assert_eq!(enc.modulus, int(0));
        assert!(matches!(
            encode_function(&m, "F", 1, &[(vec![0], 0)].into_iter().collect(), None),
            Err(SemanticsError::PartialFunction { .. })
        ));
    }

    #[test]
    fn condition_examples() {
        let m = running_example();
        let lib = Library::new();
        let sigma = parse("sup x. P(x)", m.signature(), &lib).unwrap();
        let zero_set = CompactSet::from_points(Arc::clone(sigma.value_space()), &[s(int(0))]).unwrap();
        assert!(!check_condition(&m, &sigma, &zero_set, &rat(1, 10)).unwrap());
        let q = parse("Q x. P(x)", m.signature(), &lib).unwrap();
        let value = eval(&m, &q, &Assignment::new()).unwrap().value;
        let k = CompactSet::from_points(Arc::clone(q.value_space()), &[value]).unwrap();
        assert!(check_condition(&m, &q, &k, &int(0)).unwrap());
    }
}
