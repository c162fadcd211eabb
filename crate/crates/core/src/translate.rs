//! Compiling compact-valued formulas into real-valued ones.
//!
//! Each symbol `P` with value space `X ⊆ [0,1]^n` becomes `n` grid-valued
//! symbols `P_0 … P_{n−1}`. A formula `φ` with value space `X_φ` is *coded*
//! when, for every test function `θ: X_φ → [0,1]`, some real-valued formula
//! `φ_θ` evaluates to `θ(φ)` on every structure. Codes are built by induction:
//!
//! * coordinates of atoms are the new symbols;
//! * a connective is pushed through by McShane-extending `θ ∘ σ` over the
//!   coordinates of its arguments;
//! * `(sup θ) ∘ (Qx)φ` is `sup x. φ_θ`, and a general test function on the
//!   hyperspace is rebuilt from the separating family `(sup θ_j)` by
//!   two-point lattice interpolation.
//!
//! Rounding onto the target grid is tracked in an error budget per code.

use std::collections::{BTreeMap, HashMap};
use std::hash::{Hash, Hasher};
use std::sync::{Arc, Mutex};

use fnv::FnvHasher;
use num_traits::{Signed, Zero};

use crate::formula::connective::{mcshane_extend, minimal_lipschitz, Connective, ConnectiveError, Expr, Kernel};
use crate::formula::library::{BUILTINS, KEYWORDS};
use crate::formula::{Formula, FormulaError, QuantKind, Relation, Signature};
use crate::hyperspace::{indicator_family, urysohn_separator, CompactSet, HyperError};
use crate::rational::{self, half, one, zero, Rational};
use crate::semantics::{SemanticsError, Structure};
use crate::valuespace::{embed_cube, Embedding, Point, SpaceError, ValueSpace};

/// Hyperspaces up to this many points are coded by lattice interpolation;
/// larger ones fall back to extension over indicator coordinates.
pub const LATTICE_CAP: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TranslateError {
    #[error("generated symbol name `{0}` collides with an existing name")]
    Collision(String),
    #[error("grid step must be in (0, 1], got {0}")]
    BadGridStep(String),
    #[error("test function `{name}` must map `{expected}` into [0,1]")]
    BadTestFunction { name: String, expected: String },
    #[error("error budget {budget} exceeds the cap {cap}")]
    BudgetExceeded { budget: String, cap: String },
    #[error("structure is over a different signature: {0}")]
    SignatureMismatch(String),
    #[error("generators fail to separate two hyperspace points")]
    NotSeparating,
    #[error("{what} has {size} entries, over the limit of {cap}")]
    TooLarge { what: String, size: usize, cap: usize },
    #[error(transparent)]
    Formula(#[from] FormulaError),
    #[error(transparent)]
    Connective(#[from] ConnectiveError),
    #[error(transparent)]
    Hyper(#[from] HyperError),
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
    #[error(transparent)]
    Space(#[from] SpaceError),
}

/// A real-valued formula together with its accumulated rounding budget.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coded {
    pub formula: Arc<Formula>,
    pub budget: Rational,
}

type CodeKey = (Arc<Formula>, Arc<Connective>);

/// `L` together with the target language `L^ℝ` and the coding machinery.
#[derive(Debug)]
pub struct TranslationContext {
    source: Arc<Signature>,
    target: Arc<Signature>,
    grid_step: Rational,
    grid: Arc<ValueSpace>,
    embeddings: BTreeMap<String, Embedding>,
    components: BTreeMap<String, Vec<String>>,
    budget_cap: Option<Rational>,
    codes: Mutex<HashMap<CodeKey, Coded>>,
    coords: Mutex<HashMap<Arc<Formula>, Arc<Vec<Coded>>>>,
}

/// The name of coordinate `i` of `symbol` in `L^ℝ`.
pub fn component_name(symbol: &str, i: usize) -> String {
    format!("{symbol}_{i}")
}

impl TranslationContext {
    /// Build `L^ℝ`: one `[0,1]`-grid valued symbol per coordinate of each
    /// value space, with the distance symbol and moduli carried over.
    pub fn new(source: Arc<Signature>, grid_step: Rational) -> Result<Self, TranslateError> {
        if !grid_step.is_positive() || grid_step > one() {
            return Err(TranslateError::BadGridStep(rational::to_display(&grid_step)));
        }
        let grid = Arc::new(ValueSpace::unit_grid(&grid_step)?);
        let mut relations = BTreeMap::new();
        let mut components = BTreeMap::new();
        let mut embeddings = BTreeMap::new();
        let mut moduli = BTreeMap::new();
        for (name, rel) in source.relations() {
            let emb = embed_cube(&rel.space);
            let names: Vec<String> = (0..emb.ambient_dimension).map(|i| component_name(name, i)).collect();
            for t in &names {
                let reserved = KEYWORDS.contains(&t.as_str()) || BUILTINS.contains(&t.as_str());
                if reserved || relations.contains_key(t) || source.relation(t).is_some() {
                    return Err(TranslateError::Collision(t.clone()));
                }
                relations.insert(
                    t.clone(),
                    Relation {
                        arity: rel.arity,
                        space: Arc::clone(&grid),
                    },
                );
                if let Some(l) = source.modulus(name) {
                    moduli.insert(t.clone(), l.clone());
                }
            }
            components.insert(name.clone(), names);
            embeddings.insert(name.clone(), emb);
        }
        let distance = source.distance_symbol().map(|d| component_name(d, 0));
        let target = Arc::new(Signature::new(relations, distance, moduli)?);
        Ok(Self {
            source,
            target,
            grid_step,
            grid,
            embeddings,
            components,
            budget_cap: None,
            codes: Mutex::new(HashMap::new()),
            coords: Mutex::new(HashMap::new()),
        })
    }

    /// Fail any code whose budget exceeds `cap`.
    pub fn with_budget_cap(mut self, cap: Rational) -> Self {
        self.budget_cap = Some(cap);
        self
    }

    pub fn source_signature(&self) -> &Arc<Signature> {
        &self.source
    }

    pub fn target_signature(&self) -> &Arc<Signature> {
        &self.target
    }

    pub fn grid_step(&self) -> &Rational {
        &self.grid_step
    }

    pub fn grid(&self) -> &Arc<ValueSpace> {
        &self.grid
    }

    pub fn embeddings(&self) -> &BTreeMap<String, Embedding> {
        &self.embeddings
    }

    pub fn components(&self) -> &BTreeMap<String, Vec<String>> {
        &self.components
    }

    fn check_source(&self, m: &Structure) -> Result<(), TranslateError> {
        if **m.signature() != *self.source {
            return Err(TranslateError::SignatureMismatch("expected the source language".into()));
        }
        Ok(())
    }

    fn check_target(&self, n: &Structure) -> Result<(), TranslateError> {
        if **n.signature() != *self.target {
            return Err(TranslateError::SignatureMismatch("expected the coded language".into()));
        }
        Ok(())
    }

    /// `M ↦ M^ℝ`: coordinate `i` of `P(ā)` becomes `P_i(ā)`, rounded to the
    /// grid. Returns the structure and the largest rounding distance.
    pub fn transport_structure(&self, m: &Structure) -> Result<(Structure, Rational), TranslateError> {
        self.check_source(m)?;
        let mut interp = BTreeMap::new();
        let mut worst = zero();
        for (name, targets) in &self.components {
            for (i, t) in targets.iter().enumerate() {
                let mut table = BTreeMap::new();
                for (tuple, p) in m.table(name).expect("interpretations are total") {
                    let c = Point::scalar(p.coords()[i].clone())?;
                    let (k, d) = self.grid.nearest(&c)?;
                    if d > worst {
                        worst = d;
                    }
                    table.insert(tuple.clone(), self.grid.net()[k].clone());
                }
                interp.insert(t.clone(), table);
            }
        }
        let n = Structure::new(Arc::clone(&self.target), m.universe().to_vec(), interp)?;
        Ok((n, worst))
    }

    /// The base theory: every `(P_0(ā), …, P_{n−1}(ā))` lies within
    /// `resolution + tol` of the net of `X_P`. Returns the first failure.
    pub fn check_t0(&self, n: &Structure, tol: &Rational) -> Result<Option<T0Violation>, TranslateError> {
        self.check_target(n)?;
        for (name, targets) in &self.components {
            let space = &self.source.relation(name).expect("declared").space;
            let arity = self.source.relation(name).expect("declared").arity;
            for tuple in n.tuples(arity) {
                let p = self.read_point(n, targets, &tuple)?;
                let distance = space.distance_to_net(&p)?;
                if distance > space.resolution() + tol {
                    return Ok(Some(T0Violation {
                        symbol: name.clone(),
                        tuple: n.tuple_text(&tuple),
                        point: p,
                        distance,
                    }));
                }
            }
        }
        Ok(None)
    }

    fn read_point(&self, n: &Structure, targets: &[String], tuple: &[usize]) -> Result<Point, TranslateError> {
        let coords = targets
            .iter()
            .map(|t| n.value(t, tuple).expect("interpretations are total").value().clone())
            .collect();
        Ok(Point::new(coords)?)
    }

    /// Read an `L`-structure back from an `L^ℝ`-structure satisfying `T₀`.
    pub fn decode(&self, n: &Structure) -> Result<Structure, TranslateError> {
        self.check_target(n)?;
        let mut interp = BTreeMap::new();
        for (name, targets) in &self.components {
            let arity = self.source.relation(name).expect("declared").arity;
            let table = n
                .tuples(arity)
                .map(|t| Ok((t.clone(), self.read_point(n, targets, &t)?)))
                .collect::<Result<BTreeMap<_, _>, TranslateError>>()?;
            interp.insert(name.clone(), table);
        }
        Ok(Structure::new(Arc::clone(&self.source), n.universe().to_vec(), interp)?)
    }

    pub fn code_formula(&self, phi: &Arc<Formula>) -> CodedFormula<'_> {
        CodedFormula {
            ctx: self,
            source: Arc::clone(phi),
        }
    }

    /// `L^ℝ` formulas for the coordinates of `phi`'s value, with budgets.
    pub fn coordinates(&self, phi: &Arc<Formula>) -> Result<Arc<Vec<Coded>>, TranslateError> {
        if let Some(c) = self.coords.lock().expect("cache lock").get(phi) {
            return Ok(Arc::clone(c));
        }
        let out = Arc::new(self.coordinates_uncached(phi)?);
        self.coords
            .lock()
            .expect("cache lock")
            .insert(Arc::clone(phi), Arc::clone(&out));
        Ok(out)
    }

    fn coordinates_uncached(&self, phi: &Arc<Formula>) -> Result<Vec<Coded>, TranslateError> {
        match &**phi {
            Formula::Atomic { symbol, args, space } => {
                let budget = self.atomic_budget(space);
                self.components[symbol]
                    .iter()
                    .map(|t| {
                        Ok(Coded {
                            formula: Formula::atomic(&self.target, t, args.clone())?,
                            budget: budget.clone(),
                        })
                    })
                    .collect()
            }
            Formula::Apply { connective, args } => {
                let children = args
                    .iter()
                    .map(|a| self.coordinates(a))
                    .collect::<Result<Vec<_>, _>>()?;
                let flat: Vec<Coded> = children.iter().flat_map(|c| c.iter().cloned()).collect();
                let size = connective.domain_size().unwrap_or(usize::MAX);
                let cap = crate::formula::connective::ENUMERATION_CAP;
                if size > cap {
                    return Err(TranslateError::TooLarge {
                        what: format!("domain of `{}`", connective.name()),
                        size,
                        cap,
                    });
                }
                let mut anchors = Vec::with_capacity(size);
                let mut outputs = Vec::with_capacity(size);
                for t in connective.domain_tuples() {
                    let points: Vec<Point> = t
                        .iter()
                        .zip(connective.domain())
                        .map(|(&i, s)| s.net()[i].clone())
                        .collect();
                    let anchor: Vec<Rational> = points.iter().flat_map(|p| p.coords().iter().cloned()).collect();
                    outputs.push(connective.apply(&points)?.point);
                    anchors.push(anchor);
                }
                (0..connective.codomain().dimension())
                    .map(|i| {
                        let values: Vec<Rational> = outputs.iter().map(|p| p.coords()[i].clone()).collect();
                        self.extend_over(&format!("{}.{i}", connective.name()), &values, &anchors, &flat)
                    })
                    .collect()
            }
            Formula::Quant { kind, var, body, .. } => match kind {
                QuantKind::Sup | QuantKind::Inf => {
                    let inner = self.coordinates(body)?;
                    let coded = &inner[0];
                    Ok(vec![Coded {
                        formula: Formula::quant(*kind, var.clone(), Arc::clone(&coded.formula))?,
                        budget: coded.budget.clone(),
                    }])
                }
                QuantKind::Primordial => {
                    let family = indicator_family(body.value_space())?;
                    family
                        .iter()
                        .map(|theta| {
                            let c = self.code(body, theta)?;
                            Ok(Coded {
                                formula: Formula::sup(var.clone(), c.formula)?,
                                budget: c.budget,
                            })
                        })
                        .collect()
                }
            },
            Formula::ForcedLimit { inner, .. } => Ok((*self.coordinates(inner)?).clone()),
        }
    }

    /// Worst distance between a coordinate of a value of `space` and its
    /// coded counterpart on the grid.
    fn atomic_budget(&self, space: &ValueSpace) -> Rational {
        if !space.resolution().is_zero() {
            return &self.grid_step * half() + space.resolution();
        }
        let mut worst = zero();
        for p in space.net() {
            for c in p.coords() {
                let (_, d) = self.grid.nearest_raw(std::slice::from_ref(c));
                if d > worst {
                    worst = d;
                }
            }
        }
        worst
    }

    /// McShane-extend `values` (given at `anchors`) over the coordinates
    /// `inputs` and apply the extension to them.
    fn extend_over(
        &self,
        label: &str,
        values: &[Rational],
        anchors: &[Vec<Rational>],
        inputs: &[Coded],
    ) -> Result<Coded, TranslateError> {
        let lipschitz = minimal_lipschitz(anchors, values);
        let ambient: Vec<Arc<ValueSpace>> = inputs.iter().map(|c| Arc::clone(c.formula.value_space())).collect();
        let name = fresh_name("ext", &(label, values, anchors, &ambient));
        let ext = mcshane_extend(name, values, &lipschitz, anchors, ambient, &self.grid_step)?;
        let worst = inputs.iter().map(|c| c.budget.clone()).max().unwrap_or_else(zero);
        let budget = self.propagate(&lipschitz, &worst);
        let args = inputs.iter().map(|c| Arc::clone(&c.formula)).collect();
        self.finish(Formula::apply(Arc::new(ext), args)?, budget)
    }

    fn propagate(&self, lipschitz: &Rational, worst: &Rational) -> Rational {
        if worst.is_zero() {
            zero()
        } else {
            lipschitz * worst + &self.grid_step * half()
        }
    }

    fn finish(&self, formula: Arc<Formula>, budget: Rational) -> Result<Coded, TranslateError> {
        if let Some(cap) = &self.budget_cap {
            if budget > *cap {
                return Err(TranslateError::BudgetExceeded {
                    budget: rational::to_display(&budget),
                    cap: rational::to_display(cap),
                });
            }
        }
        Ok(Coded { formula, budget })
    }

    /// `φ_θ` for a test function `θ: X_φ → [0,1]`.
    pub fn code(&self, phi: &Arc<Formula>, theta: &Arc<Connective>) -> Result<Coded, TranslateError> {
        let key = (Arc::clone(phi), Arc::clone(theta));
        if let Some(c) = self.codes.lock().expect("cache lock").get(&key) {
            return Ok(c.clone());
        }
        let out = self.code_uncached(phi, theta)?;
        self.codes.lock().expect("cache lock").insert(key, out.clone());
        Ok(out)
    }

    fn code_uncached(&self, phi: &Arc<Formula>, theta: &Arc<Connective>) -> Result<Coded, TranslateError> {
        let space = phi.value_space();
        if theta.domain() != std::slice::from_ref(space) || !theta.is_real_valued() {
            return Err(TranslateError::BadTestFunction {
                name: theta.name().to_string(),
                expected: space.label().to_string(),
            });
        }
        if let Formula::Quant {
            kind: QuantKind::Primordial,
            var,
            body,
            ..
        } = &**phi
        {
            match theta.kernel() {
                Kernel::SupOf { theta: inner, .. } | Kernel::InfOf { theta: inner, .. } => {
                    let kind = if matches!(theta.kernel(), Kernel::SupOf { .. }) {
                        QuantKind::Sup
                    } else {
                        QuantKind::Inf
                    };
                    let c = self.code(body, inner)?;
                    return self.finish(Formula::quant(kind, var.clone(), c.formula)?, c.budget);
                }
                _ => {}
            }
        }
        let values = theta.unary_values()?;
        let coords = self.coordinates(phi)?;
        for (i, c) in coords.iter().enumerate() {
            if space.net().iter().map(|p| &p.coords()[i]).eq(values.iter()) {
                return self.finish(Arc::clone(&c.formula), c.budget.clone());
            }
        }
        if let Formula::Quant {
            kind: QuantKind::Primordial,
            var,
            body,
            ..
        } = &**phi
        {
            if space.len() <= LATTICE_CAP {
                return self.code_by_lattice(var, body, &values);
            }
        }
        self.code_by_extension(phi, &values)
    }

    /// Code the function given by `values` on the net of `X_φ` by extending
    /// it over the coordinates of `phi`.
    pub fn code_by_extension(&self, phi: &Arc<Formula>, values: &[Rational]) -> Result<Coded, TranslateError> {
        let space = phi.value_space();
        if values.len() != space.len() || values.iter().any(|v| !rational::in_unit(v)) {
            return Err(TranslateError::BadTestFunction {
                name: "value table".into(),
                expected: space.label().to_string(),
            });
        }
        let coords = self.coordinates(phi)?;
        let anchors: Vec<Vec<Rational>> = space.net().iter().map(|p| p.coords().to_vec()).collect();
        self.extend_over("table", values, &anchors, &coords)
    }

    fn code_by_lattice(&self, var: &str, body: &Arc<Formula>, g: &[Rational]) -> Result<Coded, TranslateError> {
        let base = body.value_space();
        let approx = lattice_approx(base, g, indicator_family(base)?)?;
        let generators = approx
            .generators
            .iter()
            .map(|theta| {
                let c = self.code(body, theta)?;
                Ok(Coded {
                    formula: Formula::sup(var, c.formula)?,
                    budget: c.budget,
                })
            })
            .collect::<Result<Vec<_>, TranslateError>>()?;
        let used = approx.expr.inputs_needed();
        let domain: Vec<Arc<ValueSpace>> = generators[..used]
            .iter()
            .map(|c| Arc::clone(c.formula.value_space()))
            .collect();
        let codomain = Arc::new(ValueSpace::unit_with_values(&self.grid_step, g.iter().cloned())?);
        let name = fresh_name("lat", &(g, &domain));
        let conn = Connective::from_exprs_trusted(name, domain, codomain, vec![approx.expr]);
        let worst = generators[..used]
            .iter()
            .map(|c| c.budget.clone())
            .max()
            .unwrap_or_else(zero);
        let budget = self.propagate(conn.lipschitz(), &worst);
        let args = generators[..used].iter().map(|c| Arc::clone(&c.formula)).collect();
        self.finish(Formula::apply(Arc::new(conn), args)?, budget)
    }

    /// The test function `p ↦ min(1, d(p, K))` on `K`'s space, which
    /// vanishes exactly on `K`.
    pub fn condition_test(&self, k: &CompactSet) -> Result<Arc<Connective>, TranslateError> {
        let space = k.space();
        let values = space
            .net()
            .iter()
            .map(|p| Ok(k.distance_from(p)?.min(one())))
            .collect::<Result<Vec<Rational>, HyperError>>()?;
        let points = values
            .iter()
            .cloned()
            .map(Point::scalar)
            .collect::<Result<Vec<_>, _>>()?;
        let codomain = Arc::new(ValueSpace::finite_labeled("distance-to-K", points.clone())?);
        Ok(Arc::new(Connective::unary_table(
            "dist_K",
            Arc::clone(space),
            codomain,
            points,
        )?))
    }

    /// The real-valued condition `code(σ)(θ_K) = 0` coding `σ ∈ K`.
    pub fn code_condition(&self, sigma: &Arc<Formula>, k: &CompactSet) -> Result<Coded, TranslateError> {
        let theta = self.condition_test(k)?;
        self.code(sigma, &theta)
    }
}

/// A failure of the base theory at one tuple.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct T0Violation {
    pub symbol: String,
    pub tuple: String,
    pub point: Point,
    pub distance: Rational,
}

/// A source formula and the procedure `θ ↦ φ_θ`.
pub struct CodedFormula<'a> {
    ctx: &'a TranslationContext,
    source: Arc<Formula>,
}

impl CodedFormula<'_> {
    pub fn source(&self) -> &Arc<Formula> {
        &self.source
    }

    pub fn codes(&self, theta: &Arc<Connective>) -> Result<Coded, TranslateError> {
        self.ctx.code(&self.source, theta)
    }

    pub fn coordinates(&self) -> Result<Arc<Vec<Coded>>, TranslateError> {
        self.ctx.coordinates(&self.source)
    }
}

fn fresh_name(prefix: &str, content: &impl Hash) -> String {
    let mut h = FnvHasher::default();
    content.hash(&mut h);
    format!("{prefix}#{:012x}", h.finish() & 0xffff_ffff_ffff)
}

/// A lattice expression over generators `(sup θ_j)`, reading generator `j`
/// from coordinate `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeApprox {
    pub expr: Expr,
    pub generators: Vec<Arc<Connective>>,
}

impl LatticeApprox {
    /// The expression's value on a subset, through the generators.
    pub fn eval_on(&self, k: &CompactSet) -> Result<Rational, TranslateError> {
        let inputs = self
            .generators
            .iter()
            .map(|theta| sup_over(theta, k))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(self.expr.eval(&inputs))
    }
}

fn sup_over(theta: &Connective, k: &CompactSet) -> Result<Rational, TranslateError> {
    let values = theta.unary_values()?;
    Ok(k.indices().iter().map(|&i| values[i].clone()).max().expect("nonempty"))
}

/// Exact two-point lattice interpolation of `g` (indexed by the points of
/// `hyper(base)`) from the functions `(sup θ_j)`: with `h_{K,F}` a clamped
/// affine function of one generator matching `g` at `K` and `F`, the result
/// is `min_K max_F h_{K,F}`. Generators are augmented with Urysohn
/// separators for any pair they fail to distinguish.
pub fn lattice_approx(
    base: &Arc<ValueSpace>,
    g: &[Rational],
    mut thetas: Vec<Arc<Connective>>,
) -> Result<LatticeApprox, TranslateError> {
    let subsets = CompactSet::all_subsets(base)?;
    if g.len() != subsets.len() {
        return Err(TranslateError::TooLarge {
            what: "lattice table".into(),
            size: g.len(),
            cap: subsets.len(),
        });
    }
    if let Some(bad) = g.iter().find(|v| !rational::in_unit(v)) {
        return Err(ConnectiveError::NotUnitValued {
            name: "lattice table".into(),
            value: rational::to_display(bad),
        }
        .into());
    }
    for theta in &thetas {
        if theta.domain() != std::slice::from_ref(base) || !theta.is_real_valued() {
            return Err(TranslateError::BadTestFunction {
                name: theta.name().to_string(),
                expected: base.label().to_string(),
            });
        }
    }
    let mut table: Vec<Vec<Rational>> = thetas
        .iter()
        .map(|t| subsets.iter().map(|k| sup_over(t, k)).collect())
        .collect::<Result<_, _>>()?;
    if g.iter().all(|v| *v == g[0]) {
        return Ok(LatticeApprox {
            expr: Expr::Const(g[0].clone()),
            generators: thetas,
        });
    }
    let separating = |table: &[Vec<Rational>], a: usize, b: usize| table.iter().position(|col| col[a] != col[b]);
    let n = subsets.len();
    for a in 0..n {
        for b in (a + 1)..n {
            if separating(&table, a, b).is_none() {
                let theta = urysohn_separator(base, &subsets[a], &subsets[b])?;
                table.push(subsets.iter().map(|k| sup_over(&theta, k)).collect::<Result<_, _>>()?);
                thetas.push(theta);
            }
        }
    }
    let mut outer = Vec::with_capacity(n);
    for a in 0..n {
        let mut inner = Vec::with_capacity(n);
        for b in 0..n {
            if a == b || g[a] == g[b] {
                inner.push(Expr::Const(g[a].clone()));
                continue;
            }
            let j = separating(&table, a, b).ok_or(TranslateError::NotSeparating)?;
            let slope = (&g[a] - &g[b]) / (&table[j][a] - &table[j][b]);
            let offset = &g[a] - &slope * &table[j][a];
            inner.push(Expr::Clamp01(Box::new(Expr::Affine {
                a: slope,
                b: offset,
                arg: Box::new(Expr::Coord(j)),
            })));
        }
        inner.dedup();
        outer.push(if inner.len() == 1 {
            inner.pop().unwrap()
        } else {
            Expr::Max(inner)
        });
    }
    outer.dedup();
    let expr = if outer.len() == 1 {
        outer.pop().unwrap()
    } else {
        Expr::Min(outer)
    };
    Ok(LatticeApprox {
        expr,
        generators: thetas,
    })
}
