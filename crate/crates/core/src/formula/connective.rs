//! Continuous connectives built from a small closed algebra.
//!
//! Every connective carries its domain spaces, its codomain, and a Lipschitz
//! constant with respect to the max metric on the product of its domains.
//! Constants are computed structurally for expression kernels over cube
//! domains and validated exhaustively everywhere else.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_traits::{Signed, Zero};

use crate::rational::{self, clamp01, in_unit, one, zero, Rational};
use crate::valuespace::{indicator_members, sup_distance, Point, SpaceError, ValueSpace};

/// Largest domain product enumerated by exhaustive checks.
pub const ENUMERATION_CAP: usize = 1 << 18;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConnectiveError {
    #[error("connective `{name}` takes {expected} arguments, got {found}")]
    Arity {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("argument {index} of `{name}` has dimension {found}, expected {expected}")]
    ArgDimension {
        name: String,
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("argument {index} of `{name}` must be a dimension-1 interval-like space")]
    NotScalar { name: String, index: usize },
    #[error("`{name}` expects argument {index} in `{expected}`, found `{found}`")]
    DomainMismatch {
        name: String,
        index: usize,
        expected: String,
        found: String,
    },
    #[error("`{name}` output {value} is {distance} away from its codomain net (resolution {resolution})")]
    OutsideCodomain {
        name: String,
        value: String,
        distance: String,
        resolution: String,
    },
    #[error("`{name}` produces {value}, outside [0,1]")]
    NotUnitValued { name: String, value: String },
    #[error("`{name}` violates its declared Lipschitz constant {declared}: observed slope {observed} between {left} and {right}")]
    LipschitzViolated {
        name: String,
        declared: String,
        observed: String,
        left: String,
        right: String,
    },
    #[error("table `{name}` is missing an entry for {key}")]
    MissingEntry { name: String, key: String },
    #[error("table `{name}` key {key} is not a net point of its domain")]
    KeyOffNet { name: String, key: String },
    #[error("table `{name}` has two entries for {key}")]
    DuplicateEntry { name: String, key: String },
    #[error("`{name}` needs a dimension-1 [0,1]-valued codomain")]
    NotRealValued { name: String },
    #[error("`{name}` needs a hyperspace argument")]
    NotHyperspace { name: String },
    #[error("primitive `{name}`: {reason}")]
    BadPrimitive { name: String, reason: String },
    #[error("domain of `{name}` has {size} points, over the limit of {cap}")]
    DomainTooLarge { name: String, size: usize, cap: usize },
    #[error(transparent)]
    Space(#[from] SpaceError),
}

/// Real-valued expression over the flattened coordinates of the arguments.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Const(Rational),
    Coord(usize),
    /// `a·arg + b`
    Affine {
        a: Rational,
        b: Rational,
        arg: Box<Expr>,
    },
    Add(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Max(Vec<Expr>),
    Min(Vec<Expr>),
    Clamp01(Box<Expr>),
    /// `1 − arg`
    Neg(Box<Expr>),
}

impl Expr {
    pub fn eval(&self, x: &[Rational]) -> Rational {
        match self {
            Expr::Const(c) => c.clone(),
            Expr::Coord(i) => x[*i].clone(),
            Expr::Affine { a, b, arg } => a * arg.eval(x) + b,
            Expr::Add(l, r) => l.eval(x) + r.eval(x),
            Expr::Mul(l, r) => l.eval(x) * r.eval(x),
            Expr::Max(items) => items.iter().map(|e| e.eval(x)).max().unwrap_or_else(zero),
            Expr::Min(items) => items.iter().map(|e| e.eval(x)).min().unwrap_or_else(one),
            Expr::Clamp01(e) => clamp01(e.eval(x)),
            Expr::Neg(e) => one() - e.eval(x),
        }
    }

    /// Bounds on the value when every input coordinate lies in `[0,1]`.
    pub fn range(&self) -> (Rational, Rational) {
        match self {
            Expr::Const(c) => (c.clone(), c.clone()),
            Expr::Coord(_) => (zero(), one()),
            Expr::Affine { a, b, arg } => {
                let (lo, hi) = arg.range();
                if a.is_negative() {
                    (a * hi + b, a * lo + b)
                } else {
                    (a * lo + b, a * hi + b)
                }
            }
            Expr::Add(l, r) => {
                let (a, b) = l.range();
                let (c, d) = r.range();
                (a + c, b + d)
            }
            Expr::Mul(l, r) => {
                let (a, b) = l.range();
                let (c, d) = r.range();
                let products = [&a * &c, &a * &d, &b * &c, &b * &d];
                let lo = products.iter().min().cloned().unwrap_or_else(zero);
                let hi = products.iter().max().cloned().unwrap_or_else(zero);
                (lo, hi)
            }
            Expr::Max(items) => {
                let ranges: Vec<_> = items.iter().map(Expr::range).collect();
                let lo = ranges.iter().map(|r| r.0.clone()).max().unwrap_or_else(zero);
                let hi = ranges.iter().map(|r| r.1.clone()).max().unwrap_or_else(zero);
                (lo, hi)
            }
            Expr::Min(items) => {
                let ranges: Vec<_> = items.iter().map(Expr::range).collect();
                let lo = ranges.iter().map(|r| r.0.clone()).min().unwrap_or_else(one);
                let hi = ranges.iter().map(|r| r.1.clone()).min().unwrap_or_else(one);
                (lo, hi)
            }
            Expr::Clamp01(e) => {
                let (lo, hi) = e.range();
                (clamp01(lo), clamp01(hi))
            }
            Expr::Neg(e) => {
                let (lo, hi) = e.range();
                (one() - hi, one() - lo)
            }
        }
    }

    /// Structural Lipschitz constant for ℓ∞ on the input coordinates.
    pub fn lipschitz(&self) -> Rational {
        match self {
            Expr::Const(_) => zero(),
            Expr::Coord(_) => one(),
            Expr::Affine { a, arg, .. } => a.abs() * arg.lipschitz(),
            Expr::Add(l, r) => l.lipschitz() + r.lipschitz(),
            Expr::Mul(l, r) => {
                let bound = |e: &Expr| {
                    let (lo, hi) = e.range();
                    lo.abs().max(hi.abs())
                };
                bound(l) * r.lipschitz() + bound(r) * l.lipschitz()
            }
            Expr::Max(items) | Expr::Min(items) => items.iter().map(Expr::lipschitz).max().unwrap_or_else(zero),
            Expr::Clamp01(e) | Expr::Neg(e) => e.lipschitz(),
        }
    }

    /// One more than the largest coordinate index read.
    pub fn inputs_needed(&self) -> usize {
        match self {
            Expr::Const(_) => 0,
            Expr::Coord(i) => i + 1,
            Expr::Affine { arg, .. } | Expr::Clamp01(arg) | Expr::Neg(arg) => arg.inputs_needed(),
            Expr::Add(l, r) | Expr::Mul(l, r) => l.inputs_needed().max(r.inputs_needed()),
            Expr::Max(items) | Expr::Min(items) => items.iter().map(Expr::inputs_needed).max().unwrap_or(0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Kernel {
    /// One expression per output coordinate.
    Expr(Vec<Expr>),
    /// Pointwise map keyed by the net index of each argument.
    Table(BTreeMap<Vec<usize>, Vec<Rational>>),
    /// `outer ∘ (inner_0, …, inner_k)`, all inner maps sharing the domain.
    Compose {
        outer: Arc<Connective>,
        inner: Vec<Arc<Connective>>,
    },
    /// `y ↦ clamp01(min_a (v_a + L·d∞(a, y)))`.
    Extension {
        anchors: Vec<(Vec<Rational>, Rational)>,
        lipschitz: Rational,
    },
    /// `K(θ)`: the image of a subset, as an index into the target net.
    Lift { theta: Arc<Connective>, images: Vec<usize> },
    /// `(sup θ)`: the largest snapped θ-value over a subset.
    SupOf {
        theta: Arc<Connective>,
        values: Vec<Rational>,
    },
    /// `(inf θ)`.
    InfOf {
        theta: Arc<Connective>,
        values: Vec<Rational>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Connective {
    name: String,
    domain: Vec<Arc<ValueSpace>>,
    codomain: Arc<ValueSpace>,
    lipschitz: Rational,
    kernel: Kernel,
}

/// A connective output rounded onto the codomain net.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Snapped {
    pub point: Point,
    pub index: usize,
    pub distance: Rational,
}

/// Domain indices and the unsnapped output there.
type RawEntry = (Vec<usize>, Vec<Rational>);

impl Connective {
    pub(crate) fn from_parts(
        name: String,
        domain: Vec<Arc<ValueSpace>>,
        codomain: Arc<ValueSpace>,
        lipschitz: Rational,
        kernel: Kernel,
    ) -> Self {
        Self {
            name,
            domain,
            codomain,
            lipschitz,
            kernel,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> &[Arc<ValueSpace>] {
        &self.domain
    }

    pub fn codomain(&self) -> &Arc<ValueSpace> {
        &self.codomain
    }

    pub fn lipschitz(&self) -> &Rational {
        &self.lipschitz
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn arity(&self) -> usize {
        self.domain.len()
    }

    pub fn renamed(&self, name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            ..self.clone()
        }
    }

    /// Real-valued: a dimension-1 cube codomain inside `[0,1]`.
    pub fn is_real_valued(&self) -> bool {
        self.codomain.is_interval_like()
    }

    fn check_arity(&self, n: usize) -> Result<(), ConnectiveError> {
        if n != self.domain.len() {
            return Err(ConnectiveError::Arity {
                name: self.name.clone(),
                expected: self.domain.len(),
                found: n,
            });
        }
        Ok(())
    }

    /// Unrounded output on raw argument coordinates.
    pub fn apply_raw(&self, args: &[&[Rational]]) -> Result<Vec<Rational>, ConnectiveError> {
        self.check_arity(args.len())?;
        for (i, (a, space)) in args.iter().zip(&self.domain).enumerate() {
            if a.len() != space.dimension() {
                return Err(ConnectiveError::ArgDimension {
                    name: self.name.clone(),
                    index: i,
                    expected: space.dimension(),
                    found: a.len(),
                });
            }
        }
        Ok(self.apply_unchecked(args))
    }

    fn apply_unchecked(&self, args: &[&[Rational]]) -> Vec<Rational> {
        match &self.kernel {
            Kernel::Expr(exprs) => {
                let flat: Vec<Rational> = args.iter().flat_map(|a| a.iter().cloned()).collect();
                exprs.iter().map(|e| e.eval(&flat)).collect()
            }
            Kernel::Table(map) => {
                let key: Vec<usize> = args.iter().zip(&self.domain).map(|(a, s)| s.nearest_raw(a).0).collect();
                map.get(&key).cloned().expect("tables are total on their domain net")
            }
            Kernel::Compose { outer, inner } => {
                let mids: Vec<Vec<Rational>> = inner.iter().map(|s| s.apply_unchecked(args)).collect();
                let refs: Vec<&[Rational]> = mids.iter().map(Vec::as_slice).collect();
                outer.apply_unchecked(&refs)
            }
            Kernel::Extension { anchors, lipschitz } => {
                let flat: Vec<Rational> = args.iter().flat_map(|a| a.iter().cloned()).collect();
                let best = anchors
                    .iter()
                    .map(|(a, v)| v + lipschitz * sup_distance(a, &flat))
                    .min()
                    .expect("extensions have anchors");
                vec![clamp01(best)]
            }
            Kernel::Lift { images, .. } => {
                let members = hyper_members(&self.domain[0], args[0]);
                let mut out = vec![zero(); self.codomain.dimension()];
                for m in members {
                    out[images[m]] = one();
                }
                out
            }
            Kernel::SupOf { values, .. } => {
                let members = hyper_members(&self.domain[0], args[0]);
                vec![members.iter().map(|&m| values[m].clone()).max().unwrap_or_else(zero)]
            }
            Kernel::InfOf { values, .. } => {
                let members = hyper_members(&self.domain[0], args[0]);
                vec![members.iter().map(|&m| values[m].clone()).min().unwrap_or_else(zero)]
            }
        }
    }

    /// Output rounded to the nearest codomain net point.
    pub fn apply(&self, args: &[Point]) -> Result<Snapped, ConnectiveError> {
        let refs: Vec<&[Rational]> = args.iter().map(Point::coords).collect();
        let raw = self.apply_raw(&refs)?;
        self.snap(&raw)
    }

    pub(crate) fn snap(&self, raw: &[Rational]) -> Result<Snapped, ConnectiveError> {
        let (index, distance) = self.codomain.nearest_raw(raw);
        if &distance > self.codomain.resolution() {
            return Err(ConnectiveError::OutsideCodomain {
                name: self.name.clone(),
                value: format_raw(raw),
                distance: rational::to_pq(&distance),
                resolution: rational::to_pq(self.codomain.resolution()),
            });
        }
        Ok(Snapped {
            point: self.codomain.net()[index].clone(),
            index,
            distance,
        })
    }

    /// Number of points in the product of the domain nets, if it fits.
    pub fn domain_size(&self) -> Option<usize> {
        domain_size(&self.domain)
    }

    /// Every domain net tuple, as per-argument net indices.
    pub fn domain_tuples(&self) -> DomainTuples {
        DomainTuples::new(&self.domain)
    }

    /// The largest observed slope over all pairs of domain net tuples.
    pub fn empirical_lipschitz(&self) -> Result<Rational, ConnectiveError> {
        let outputs = self.tabulate_raw()?;
        Ok(empirical_slope(&self.domain, &self.codomain, &outputs).0)
    }

    /// Exhaustive check of the declared Lipschitz constant on the domain net.
    pub fn check_lipschitz(&self) -> Result<(), ConnectiveError> {
        let outputs = self.tabulate_raw()?;
        let (observed, witness) = empirical_slope(&self.domain, &self.codomain, &outputs);
        if observed > self.lipschitz {
            let (l, r) = witness.expect("a positive slope has a witness");
            return Err(ConnectiveError::LipschitzViolated {
                name: self.name.clone(),
                declared: rational::to_pq(&self.lipschitz),
                observed: rational::to_pq(&observed),
                left: format_tuple(&self.domain, &outputs[l].0),
                right: format_tuple(&self.domain, &outputs[r].0),
            });
        }
        Ok(())
    }

    /// Exhaustive check that every output lies within codomain resolution.
    pub fn check_codomain(&self) -> Result<(), ConnectiveError> {
        for (_, raw) in self.tabulate_raw()? {
            self.snap(&raw)?;
        }
        Ok(())
    }

    fn tabulate_raw(&self) -> Result<Vec<RawEntry>, ConnectiveError> {
        let size = self.domain_size().unwrap_or(usize::MAX);
        if size > ENUMERATION_CAP {
            return Err(ConnectiveError::DomainTooLarge {
                name: self.name.clone(),
                size,
                cap: ENUMERATION_CAP,
            });
        }
        Ok(self
            .domain_tuples()
            .map(|t| {
                let args = tuple_coords(&self.domain, &t);
                let out = self.apply_unchecked(&args);
                (t, out)
            })
            .collect())
    }

    /// Snapped values of a real-valued connective on every point of its
    /// single domain net.
    pub fn unary_values(&self) -> Result<Vec<Rational>, ConnectiveError> {
        self.check_arity(1)?;
        self.domain[0]
            .net()
            .iter()
            .map(|p| Ok(self.apply(std::slice::from_ref(p))?.point.value().clone()))
            .collect()
    }
}

impl fmt::Display for Connective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: ", self.name)?;
        for (i, d) in self.domain.iter().enumerate() {
            if i > 0 {
                write!(f, " × ")?;
            }
            write!(f, "{}", d.label())?;
        }
        write!(
            f,
            " → {} (L = {})",
            self.codomain.label(),
            rational::to_display(&self.lipschitz)
        )
    }
}

fn hyper_members(space: &ValueSpace, raw: &[Rational]) -> Vec<usize> {
    if raw.iter().all(|c| c.is_zero() || *c == one()) {
        let members = indicator_members(raw);
        if !members.is_empty() {
            return members;
        }
    }
    let (i, _) = space.nearest_raw(raw);
    indicator_members(space.net()[i].coords())
}

fn format_raw(raw: &[Rational]) -> String {
    let parts: Vec<String> = raw.iter().map(rational::to_display).collect();
    format!("({})", parts.join(", "))
}

fn format_tuple(domain: &[Arc<ValueSpace>], t: &[usize]) -> String {
    let parts: Vec<String> = t.iter().zip(domain).map(|(&i, s)| s.net()[i].to_string()).collect();
    format!("[{}]", parts.join(", "))
}

pub(crate) fn tuple_coords<'a>(domain: &'a [Arc<ValueSpace>], t: &[usize]) -> Vec<&'a [Rational]> {
    t.iter().zip(domain).map(|(&i, s)| s.net()[i].coords()).collect()
}

pub(crate) fn domain_size(domain: &[Arc<ValueSpace>]) -> Option<usize> {
    domain.iter().try_fold(1usize, |acc, s| acc.checked_mul(s.len()))
}

/// Max metric on a product of nets, by per-argument index.
fn tuple_distance(domain: &[Arc<ValueSpace>], a: &[usize], b: &[usize]) -> Rational {
    a.iter()
        .zip(b)
        .zip(domain)
        .map(|((&i, &j), s)| s.distance_unchecked(s.net()[i].coords(), s.net()[j].coords()))
        .max()
        .unwrap_or_else(zero)
}

/// Largest `d(out)/d(in)` over distinct tuples, with the witnessing pair.
fn empirical_slope(
    domain: &[Arc<ValueSpace>],
    codomain: &ValueSpace,
    outputs: &[(Vec<usize>, Vec<Rational>)],
) -> (Rational, Option<(usize, usize)>) {
    let mut best = zero();
    let mut witness = None;
    for i in 0..outputs.len() {
        for j in (i + 1)..outputs.len() {
            let dout = codomain.distance_unchecked(&outputs[i].1, &outputs[j].1);
            if dout.is_zero() {
                continue;
            }
            let din = tuple_distance(domain, &outputs[i].0, &outputs[j].0);
            let slope = dout / din;
            if slope > best {
                best = slope;
                witness = Some((i, j));
            }
        }
    }
    (best, witness)
}

/// Mixed-radix enumeration of a product of nets.
pub struct DomainTuples {
    radices: Vec<usize>,
    current: Option<Vec<usize>>,
}

impl DomainTuples {
    fn new(domain: &[Arc<ValueSpace>]) -> Self {
        Self::from_radices(domain.iter().map(|s| s.len()).collect())
    }

    /// All tuples `t` with `t[k] < radices[k]`, last index fastest.
    pub fn from_radices(radices: Vec<usize>) -> Self {
        let current = if radices.contains(&0) {
            None
        } else {
            Some(vec![0; radices.len()])
        };
        Self { radices, current }
    }
}

impl Iterator for DomainTuples {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.clone()?;
        let mut next = out.clone();
        let mut k = next.len();
        loop {
            if k == 0 {
                self.current = None;
                break;
            }
            k -= 1;
            next[k] += 1;
            if next[k] < self.radices[k] {
                self.current = Some(next);
                break;
            }
            next[k] = 0;
        }
        Some(out)
    }
}

/// The exact image of an expression kernel on its domain net, as a space.
fn image_space(
    name: &str,
    domain: &[Arc<ValueSpace>],
    exprs: &[Expr],
    lipschitz: &Rational,
) -> Result<ValueSpace, ConnectiveError> {
    let size = domain_size(domain).unwrap_or(usize::MAX);
    if size > ENUMERATION_CAP {
        return Err(ConnectiveError::DomainTooLarge {
            name: name.to_string(),
            size,
            cap: ENUMERATION_CAP,
        });
    }
    let mut points = Vec::new();
    for t in DomainTuples::new(domain) {
        let flat: Vec<Rational> = tuple_coords(domain, &t)
            .into_iter()
            .flat_map(|a| a.iter().cloned())
            .collect();
        let out: Vec<Rational> = exprs.iter().map(|e| e.eval(&flat)).collect();
        if let Some(bad) = out.iter().find(|v| !in_unit(v)) {
            return Err(ConnectiveError::NotUnitValued {
                name: name.to_string(),
                value: rational::to_display(bad),
            });
        }
        points.push(Point::from_trusted(out));
    }
    points.sort();
    let resolution = lipschitz * domain.iter().map(|s| s.resolution().clone()).max().unwrap_or_else(zero);
    Ok(ValueSpace::finite_with_resolution(
        &format!("img({name})"),
        points,
        resolution,
    )?)
}

impl Connective {
    /// An expression-kernel connective. With no codomain given, the codomain
    /// is the exact image of the domain net.
    pub fn from_exprs(
        name: impl Into<String>,
        domain: Vec<Arc<ValueSpace>>,
        codomain: Option<Arc<ValueSpace>>,
        exprs: Vec<Expr>,
    ) -> Result<Self, ConnectiveError> {
        let name = name.into();
        let total: usize = domain.iter().map(|s| s.dimension()).sum();
        let needed = exprs.iter().map(Expr::inputs_needed).max().unwrap_or(0);
        if needed > total {
            return Err(ConnectiveError::BadPrimitive {
                name,
                reason: format!("reads coordinate {} of a {total}-dimensional input", needed - 1),
            });
        }
        let structural = domain.iter().all(|s| s.is_cube());
        let lipschitz = if structural {
            exprs.iter().map(Expr::lipschitz).max().unwrap_or_else(zero)
        } else {
            zero()
        };
        let codomain = match codomain {
            Some(c) => {
                if c.dimension() != exprs.len() {
                    return Err(ConnectiveError::BadPrimitive {
                        name,
                        reason: format!(
                            "{} output expressions for a {}-dimensional codomain",
                            exprs.len(),
                            c.dimension()
                        ),
                    });
                }
                c
            }
            None => Arc::new(image_space(&name, &domain, &exprs, &lipschitz)?),
        };
        let mut conn = Self::from_parts(name, domain, codomain, lipschitz, Kernel::Expr(exprs));
        if !structural {
            conn.lipschitz = conn.empirical_lipschitz()?;
        }
        if conn.domain_size().is_some_and(|n| n <= ENUMERATION_CAP) {
            conn.check_codomain()?;
        }
        Ok(conn)
    }

    /// An expression kernel over cube domains with its structural constant,
    /// skipping the exhaustive codomain check. For generated kernels whose
    /// outputs are clamped into `[0,1]` and whose codomain contains a
    /// `[0,1]` grid at its resolution.
    pub(crate) fn from_exprs_trusted(
        name: impl Into<String>,
        domain: Vec<Arc<ValueSpace>>,
        codomain: Arc<ValueSpace>,
        exprs: Vec<Expr>,
    ) -> Self {
        debug_assert!(domain.iter().all(|s| s.is_cube()));
        let lipschitz = exprs.iter().map(Expr::lipschitz).max().unwrap_or_else(zero);
        Self::from_parts(name.into(), domain, codomain, lipschitz, Kernel::Expr(exprs))
    }

    /// A pointwise table with a declared Lipschitz constant, validated
    /// exhaustively. `entries` must cover the domain net exactly once.
    pub fn table(
        name: impl Into<String>,
        domain: Vec<Arc<ValueSpace>>,
        codomain: Arc<ValueSpace>,
        entries: Vec<(Vec<Point>, Point)>,
        lipschitz: Rational,
    ) -> Result<Self, ConnectiveError> {
        let name = name.into();
        let size = domain_size(&domain).unwrap_or(usize::MAX);
        if size > ENUMERATION_CAP {
            return Err(ConnectiveError::DomainTooLarge {
                name,
                size,
                cap: ENUMERATION_CAP,
            });
        }
        let mut map = BTreeMap::new();
        for (args, out) in entries {
            let key_text = || {
                let parts: Vec<String> = args.iter().map(ToString::to_string).collect();
                format!("[{}]", parts.join(", "))
            };
            if args.len() != domain.len() {
                return Err(ConnectiveError::Arity {
                    name,
                    expected: domain.len(),
                    found: args.len(),
                });
            }
            let mut key = Vec::with_capacity(args.len());
            for (a, s) in args.iter().zip(&domain) {
                match s.index_of(a) {
                    Some(i) => key.push(i),
                    None => return Err(ConnectiveError::KeyOffNet { name, key: key_text() }),
                }
            }
            codomain.check_point(&out)?;
            if map.insert(key, out.into_coords()).is_some() {
                return Err(ConnectiveError::DuplicateEntry { name, key: key_text() });
            }
        }
        if let Some(t) = DomainTuples::new(&domain).find(|t| !map.contains_key(t)) {
            return Err(ConnectiveError::MissingEntry {
                key: format_tuple(&domain, &t),
                name,
            });
        }
        let conn = Self::from_parts(name, domain, codomain, lipschitz, Kernel::Table(map));
        conn.check_codomain()?;
        conn.check_lipschitz()?;
        Ok(conn)
    }

    /// A table whose Lipschitz constant is the smallest valid one.
    pub fn table_auto(
        name: impl Into<String>,
        domain: Vec<Arc<ValueSpace>>,
        codomain: Arc<ValueSpace>,
        entries: Vec<(Vec<Point>, Point)>,
    ) -> Result<Self, ConnectiveError> {
        Self::table_minimal(name, domain, codomain, entries)
    }

    /// A unary table `X → Y` given by its values on `X.net`, with the
    /// minimal Lipschitz constant.
    pub fn unary_table(
        name: impl Into<String>,
        domain: Arc<ValueSpace>,
        codomain: Arc<ValueSpace>,
        values: Vec<Point>,
    ) -> Result<Self, ConnectiveError> {
        let entries = domain
            .net()
            .iter()
            .cloned()
            .zip(values)
            .map(|(p, v)| (vec![p], v))
            .collect();
        Self::table_minimal(name, vec![domain], codomain, entries)
    }

    fn table_minimal(
        name: impl Into<String>,
        domain: Vec<Arc<ValueSpace>>,
        codomain: Arc<ValueSpace>,
        entries: Vec<(Vec<Point>, Point)>,
    ) -> Result<Self, ConnectiveError> {
        let name = name.into();
        let huge = Rational::from_integer(num_bigint::BigInt::from(1u64) << 200);
        let mut conn = Self::table(name, domain, codomain, entries, huge)?;
        conn.lipschitz = conn.empirical_lipschitz()?;
        Ok(conn)
    }

    /// `outer ∘ (inner_0, …)`. Every inner connective shares one domain and
    /// inner `j` lands in `outer`'s `j`-th domain space.
    pub fn compose(
        name: impl Into<String>,
        outer: Arc<Connective>,
        inner: Vec<Arc<Connective>>,
    ) -> Result<Self, ConnectiveError> {
        let name = name.into();
        if inner.len() != outer.arity() {
            return Err(ConnectiveError::Arity {
                name,
                expected: outer.arity(),
                found: inner.len(),
            });
        }
        let domain = match inner.first() {
            Some(first) => first.domain.clone(),
            None => {
                return Err(ConnectiveError::BadPrimitive {
                    name,
                    reason: "composition needs at least one inner connective".into(),
                })
            }
        };
        for (j, s) in inner.iter().enumerate() {
            if s.domain != domain {
                return Err(ConnectiveError::DomainMismatch {
                    name,
                    index: j,
                    expected: labels(&domain),
                    found: labels(&s.domain),
                });
            }
            if s.codomain != outer.domain[j] {
                return Err(ConnectiveError::DomainMismatch {
                    name,
                    index: j,
                    expected: outer.domain[j].label().to_string(),
                    found: s.codomain.label().to_string(),
                });
            }
        }
        let inner_l = inner.iter().map(|s| s.lipschitz.clone()).max().unwrap_or_else(zero);
        let lipschitz = &outer.lipschitz * inner_l;
        let codomain = Arc::clone(&outer.codomain);
        Ok(Self::from_parts(
            name,
            domain,
            codomain,
            lipschitz,
            Kernel::Compose { outer, inner },
        ))
    }
}

fn labels(spaces: &[Arc<ValueSpace>]) -> String {
    spaces.iter().map(|s| s.label()).collect::<Vec<_>>().join(" × ")
}

/// The primitive generators of the connective algebra.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Primitive {
    Const(Rational),
    Proj(usize),
    Affine { a: Rational, b: Rational },
    Add,
    Mul,
    Max,
    Min,
    Clamp01,
    Neg,
}

impl Primitive {
    pub fn keyword(&self) -> &'static str {
        match self {
            Primitive::Const(_) => "const",
            Primitive::Proj(_) => "proj",
            Primitive::Affine { .. } => "affine",
            Primitive::Add => "add",
            Primitive::Mul => "mul",
            Primitive::Max => "max",
            Primitive::Min => "min",
            Primitive::Clamp01 => "clamp01",
            Primitive::Neg => "neg",
        }
    }
}

/// Instantiate a primitive over concrete argument spaces.
pub fn primitive(
    name: impl Into<String>,
    kind: &Primitive,
    domain: Vec<Arc<ValueSpace>>,
    codomain: Option<Arc<ValueSpace>>,
) -> Result<Connective, ConnectiveError> {
    let name = name.into();
    let scalar_args = |n: Option<usize>| -> Result<(), ConnectiveError> {
        if let Some(n) = n {
            if domain.len() != n {
                return Err(ConnectiveError::Arity {
                    name: name.clone(),
                    expected: n,
                    found: domain.len(),
                });
            }
        } else if domain.is_empty() {
            return Err(ConnectiveError::Arity {
                name: name.clone(),
                expected: 1,
                found: 0,
            });
        }
        for (i, s) in domain.iter().enumerate() {
            if !s.is_interval_like() {
                return Err(ConnectiveError::NotScalar {
                    name: name.clone(),
                    index: i,
                });
            }
        }
        Ok(())
    };
    let x = |i: usize| Box::new(Expr::Coord(i));
    let expr = match kind {
        Primitive::Const(c) => Expr::Const(c.clone()),
        Primitive::Proj(i) => Expr::Coord(*i),
        Primitive::Affine { a, b } => {
            scalar_args(Some(1))?;
            Expr::Affine {
                a: a.clone(),
                b: b.clone(),
                arg: x(0),
            }
        }
        Primitive::Add => {
            scalar_args(Some(2))?;
            Expr::Add(x(0), x(1))
        }
        Primitive::Mul => {
            scalar_args(Some(2))?;
            Expr::Mul(x(0), x(1))
        }
        Primitive::Max => {
            scalar_args(None)?;
            Expr::Max((0..domain.len()).map(Expr::Coord).collect())
        }
        Primitive::Min => {
            scalar_args(None)?;
            Expr::Min((0..domain.len()).map(Expr::Coord).collect())
        }
        Primitive::Clamp01 => {
            scalar_args(Some(1))?;
            Expr::Clamp01(x(0))
        }
        Primitive::Neg => {
            scalar_args(Some(1))?;
            Expr::Neg(x(0))
        }
    };
    Connective::from_exprs(name, domain, codomain, vec![expr])
}

/// McShane extension of `values` (θ on `source.net`, L-Lipschitz for ℓ∞ on
/// the coordinates) to the product of `ambient` spaces:
/// `θ̃(y) = clamp01(min_x (θ(x) + L·d(x, y)))`.
///
/// The codomain is the unit grid of `codomain_step` together with the
/// values themselves, so θ̃ is exact on the source net.
pub fn mcshane_extend(
    name: impl Into<String>,
    values: &[Rational],
    lipschitz: &Rational,
    source: &[Vec<Rational>],
    ambient: Vec<Arc<ValueSpace>>,
    codomain_step: &Rational,
) -> Result<Connective, ConnectiveError> {
    let name = name.into();
    if values.len() != source.len() || source.is_empty() {
        return Err(ConnectiveError::BadPrimitive {
            name,
            reason: format!("{} values for {} anchor points", values.len(), source.len()),
        });
    }
    let total: usize = ambient.iter().map(|s| s.dimension()).sum();
    if let Some(a) = source.iter().find(|a| a.len() != total) {
        return Err(ConnectiveError::BadPrimitive {
            name,
            reason: format!("anchor of dimension {} in a {total}-dimensional cube", a.len()),
        });
    }
    if let Some(v) = values.iter().find(|v| !in_unit(v)) {
        return Err(ConnectiveError::NotUnitValued {
            name,
            value: rational::to_display(v),
        });
    }
    for i in 0..source.len() {
        for j in (i + 1)..source.len() {
            let dout = rational::abs_diff(&values[i], &values[j]);
            let din = sup_distance(&source[i], &source[j]);
            if dout > lipschitz * &din {
                return Err(ConnectiveError::LipschitzViolated {
                    name,
                    declared: rational::to_pq(lipschitz),
                    observed: if din.is_zero() {
                        "∞".into()
                    } else {
                        rational::to_pq(&(dout / din))
                    },
                    left: format_raw(&source[i]),
                    right: format_raw(&source[j]),
                });
            }
        }
    }
    let codomain = Arc::new(ValueSpace::unit_with_values(codomain_step, values.iter().cloned())?);
    let anchors = source.iter().cloned().zip(values.iter().cloned()).collect();
    Ok(Connective::from_parts(
        name,
        ambient,
        codomain,
        lipschitz.clone(),
        Kernel::Extension {
            anchors,
            lipschitz: lipschitz.clone(),
        },
    ))
}

/// Smallest L making `values` Lipschitz over `points` under ℓ∞.
pub fn minimal_lipschitz(points: &[Vec<Rational>], values: &[Rational]) -> Rational {
    let mut best = zero();
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            let dout = rational::abs_diff(&values[i], &values[j]);
            if dout.is_zero() {
                continue;
            }
            let slope = dout / sup_distance(&points[i], &points[j]);
            if slope > best {
                best = slope;
            }
        }
    }
    best
}
