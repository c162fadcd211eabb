//! Randomized ground truth for the translation.
//!
//! Generators draw signatures, structures, formulas and test functions from
//! a seeded ChaCha stream. Verifiers compute both sides of every claimed
//! identity by direct evaluation: `θ(eval_M(φ))` on the source structure and
//! `eval_{M^ℝ}(φ_θ)` on its transport.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::Signed;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::formula::connective::{Connective, ConnectiveError, DomainTuples, Expr};
use crate::formula::library::builtin;
use crate::formula::{Formula, FormulaError, Relation, Signature};
use crate::hyperspace::{inf_theta, sup_theta, HyperError};
use crate::rational::{self, half, int, rat, zero, Rational};
use crate::semantics::{eval, Assignment, MetricViolation, SemanticsError, Structure};
use crate::translate::{Coded, TranslateError, TranslationContext};
use crate::valuespace::{coordinate_projection, Point, SpaceError, ValueSpace};

pub const MAX_UNIVERSE: usize = 6;
pub const MAX_DEPTH: usize = 4;
pub const MAX_NET: usize = 5;
/// Largest domain a generated table connective may have.
pub const TABLE_DOMAIN_CAP: usize = 64;
/// Value sets fed to `Q` stay this small so hyperspaces have at most 15 points.
pub const PRIMORDIAL_NET_CAP: usize = 4;

const VARS: [&str; 3] = ["x", "y", "z"];

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("invalid fuzz configuration: {0}")]
    BadConfig(String),
    #[error("structure has no element named `{0}`")]
    UnknownElement(String),
    #[error(transparent)]
    Translate(#[from] TranslateError),
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
    #[error(transparent)]
    Formula(#[from] FormulaError),
    #[error(transparent)]
    Connective(#[from] ConnectiveError),
    #[error(transparent)]
    Hyper(#[from] HyperError),
    #[error(transparent)]
    Space(#[from] SpaceError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FuzzConfig {
    pub seed: u64,
    /// Largest universe drawn; each trial picks a size in `1..=universe_size`.
    pub universe_size: usize,
    pub formula_depth: usize,
    pub net_size: usize,
    pub trials: usize,
    #[serde(with = "rational::serde_pq")]
    pub tol: Rational,
    #[serde(with = "rational::serde_pq")]
    pub grid_step: Rational,
    /// Draw only resolution-0 spaces whose coordinates sit on the grid.
    pub exact: bool,
}

impl Default for FuzzConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            universe_size: 5,
            formula_depth: 3,
            net_size: 4,
            trials: 100,
            tol: zero(),
            grid_step: rat(1, 4),
            exact: true,
        }
    }
}

impl FuzzConfig {
    pub fn validate(&self) -> Result<(), OracleError> {
        let bad = |m: String| Err(OracleError::BadConfig(m));
        if !(1..=MAX_UNIVERSE).contains(&self.universe_size) {
            return bad(format!("universe_size must be in 1..={MAX_UNIVERSE}"));
        }
        if self.formula_depth > MAX_DEPTH {
            return bad(format!("formula_depth must be at most {MAX_DEPTH}"));
        }
        if !(1..=MAX_NET).contains(&self.net_size) {
            return bad(format!("net_size must be in 1..={MAX_NET}"));
        }
        if self.trials == 0 {
            return bad("trials must be positive".into());
        }
        if self.tol.is_negative() {
            return bad("tol must be non-negative".into());
        }
        let levels = (int(1) / &self.grid_step).to_integer();
        if !self.grid_step.is_positive() || int(1) / &self.grid_step != Rational::from_integer(levels) {
            return bad("grid_step must be 1/m for a positive integer m".into());
        }
        Ok(())
    }

    fn levels(&self) -> usize {
        let m = (int(1) / &self.grid_step).to_integer();
        m.to_string().parse::<usize>().unwrap_or(1) + 1
    }
}

/// The generator for one trial: stream `trial` of the seed's ChaCha state.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// A random space with at most `max_points` net points.
///
/// In exact mode every coordinate is a multiple of the grid step and the
/// resolution is 0. Otherwise coordinates are multiples of 1/3 or 1/5 and
/// the resolution is one of 0, 1/10, 1/6.
pub fn random_space(rng: &mut impl Rng, cfg: &FuzzConfig, label: &str, max_points: usize) -> Arc<ValueSpace> {
    let dimension = if rng.gen_bool(0.75) { 1 } else { 2 };
    let (levels, step) = if cfg.exact {
        (cfg.levels(), cfg.grid_step.clone())
    } else if rng.gen_bool(0.5) {
        (4, rat(1, 3))
    } else {
        (6, rat(1, 5))
    };
    let capacity = levels.pow(dimension as u32);
    let k = rng.gen_range(1..=max_points.clamp(1, capacity));
    let mut cells: Vec<usize> = (0..capacity).collect();
    cells.shuffle(rng);
    let mut cells = cells[..k].to_vec();
    cells.sort_unstable();
    let net: Vec<Point> = cells
        .iter()
        .map(|&c| {
            let coords = (0..dimension)
                .map(|i| {
                    let level = (c / levels.pow(i as u32)) % levels;
                    &step * Rational::from_integer((level as i64).into())
                })
                .collect();
            Point::new(coords).expect("grid coordinates lie in [0,1]")
        })
        .collect();
    let resolution = if cfg.exact {
        zero()
    } else {
        [zero(), rat(1, 10), rat(1, 6)].choose(rng).cloned().expect("nonempty")
    };
    Arc::new(ValueSpace::new(label, dimension, net, resolution).expect("distinct grid points"))
}

/// Up to three relation symbols `P`, `R`, `S`. `P` is unary with a
/// dimension-1 value space of at most four points, so every signature offers
/// an atom usable under both real-valued quantifiers and `Q`.
pub fn random_signature(rng: &mut impl Rng, cfg: &FuzzConfig) -> Arc<Signature> {
    let mut relations = Vec::new();
    let mut spaces: Vec<Arc<ValueSpace>> = Vec::new();
    let p_space = loop {
        let s = random_space(rng, cfg, "X0", cfg.net_size.min(PRIMORDIAL_NET_CAP));
        if s.dimension() == 1 {
            break s;
        }
    };
    spaces.push(Arc::clone(&p_space));
    relations.push((
        "P".to_string(),
        Relation {
            arity: 1,
            space: p_space,
        },
    ));
    let extra = rng.gen_range(0..=2);
    for (i, name) in ["R", "S"].iter().take(extra).enumerate() {
        let space = if rng.gen_bool(0.3) {
            Arc::clone(spaces.choose(rng).expect("nonempty"))
        } else {
            random_space(rng, cfg, &format!("X{}", i + 1), cfg.net_size)
        };
        spaces.push(Arc::clone(&space));
        let arity = rng.gen_range(1..=2);
        relations.push((name.to_string(), Relation { arity, space }));
    }
    Arc::new(Signature::plain(relations).expect("generated names are distinct"))
}

pub fn universe(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("e{i}")).collect()
}

/// Interpretations drawn uniformly from each symbol's net.
pub fn random_structure(rng: &mut impl Rng, sig: &Arc<Signature>, n: usize) -> Structure {
    Structure::from_fn(Arc::clone(sig), universe(n), |_, rel, _| {
        rel.space.net().choose(rng).expect("nets are nonempty").clone()
    })
    .expect("net points are members")
}

/// Random well-typed formulas over one signature.
pub struct FormulaGen<'a, R: Rng> {
    rng: &'a mut R,
    sig: &'a Signature,
    cfg: &'a FuzzConfig,
    tables: usize,
}

impl<'a, R: Rng> FormulaGen<'a, R> {
    pub fn new(rng: &'a mut R, sig: &'a Signature, cfg: &'a FuzzConfig) -> Self {
        Self {
            rng,
            sig,
            cfg,
            tables: 0,
        }
    }

    fn var(&mut self) -> String {
        VARS.choose(self.rng).expect("nonempty").to_string()
    }

    fn bind(&mut self, body: &Formula) -> String {
        let free: Vec<String> = body.free_vars().into_iter().collect();
        if !free.is_empty() && self.rng.gen_bool(0.85) {
            free.choose(self.rng).expect("nonempty").clone()
        } else {
            self.var()
        }
    }

    fn atom_where(&mut self, want: impl Fn(&ValueSpace) -> bool) -> Arc<Formula> {
        let mut names: Vec<&String> = self
            .sig
            .relations()
            .iter()
            .filter(|(_, r)| want(&r.space))
            .map(|(n, _)| n)
            .collect();
        if names.is_empty() {
            names = self.sig.relations().keys().collect();
        }
        let name = (*names.choose(self.rng).expect("signatures are nonempty")).clone();
        let arity = self.sig.relation(&name).expect("listed").arity;
        let args = (0..arity).map(|_| self.var()).collect();
        Formula::atomic(self.sig, &name, args).expect("well-typed atom")
    }

    /// A formula of depth at most `depth`.
    pub fn any(&mut self, depth: usize) -> Arc<Formula> {
        if depth == 0 {
            return self.atom_where(|_| true);
        }
        match self.rng.gen_range(0..7) {
            0 => self.atom_where(|_| true),
            1 | 2 => self.builtin_apply(depth),
            3 => self.table_apply(depth),
            4 => {
                let body = self.scalar(depth - 1);
                let var = self.bind(&body);
                if self.rng.gen_bool(0.5) {
                    Formula::sup(var, body).expect("scalar body")
                } else {
                    Formula::inf(var, body).expect("scalar body")
                }
            }
            5 => self.primordial(depth),
            _ => {
                if depth < 2 {
                    return self.primordial(depth);
                }
                let q = self.primordial(depth - 1);
                let base = q.value_space().hyper_base().expect("hyperspace").clone();
                if base.is_interval_like() && self.rng.gen_bool(0.6) {
                    let name = if self.rng.gen_bool(0.5) { "hsup" } else { "hinf" };
                    let c = builtin(name, &[Arc::clone(q.value_space())])
                        .expect("builtin")
                        .expect("typed");
                    Formula::apply(Arc::new(c), vec![q]).expect("typed")
                } else {
                    self.table_over(vec![q])
                }
            }
        }
    }

    /// A formula of depth at most `depth` whose value space satisfies `want`,
    /// falling back to an atom.
    pub fn matching(&mut self, depth: usize, want: impl Fn(&ValueSpace) -> bool + Copy) -> Arc<Formula> {
        for _ in 0..4 {
            let f = self.any(depth);
            if want(f.value_space()) {
                return f;
            }
        }
        self.atom_where(want)
    }

    /// A formula with a dimension-1 cube value space.
    pub fn scalar(&mut self, depth: usize) -> Arc<Formula> {
        self.matching(depth, |s| s.is_interval_like())
    }

    /// A formula whose value space has at most [`PRIMORDIAL_NET_CAP`] points.
    pub fn small(&mut self, depth: usize) -> Arc<Formula> {
        self.matching(depth, |s| s.len() <= PRIMORDIAL_NET_CAP)
    }

    /// Both [`Self::scalar`] and [`Self::small`].
    pub fn small_scalar(&mut self, depth: usize) -> Arc<Formula> {
        self.matching(depth, |s| s.is_interval_like() && s.len() <= PRIMORDIAL_NET_CAP)
    }

    fn primordial(&mut self, depth: usize) -> Arc<Formula> {
        let body = self.small(depth - 1);
        let var = self.bind(&body);
        Formula::primordial(var, body).expect("small body")
    }

    fn builtin_apply(&mut self, depth: usize) -> Arc<Formula> {
        let a = self.scalar(depth - 1);
        if self.rng.gen_bool(0.4) {
            let name = *["neg", "clamp01", "id"].choose(self.rng).expect("nonempty");
            let c = builtin(name, &[Arc::clone(a.value_space())])
                .expect("builtin")
                .expect("typed");
            return Formula::apply(Arc::new(c), vec![a]).expect("typed");
        }
        let b = self.scalar(depth - 1);
        let mut name = *["avg", "mul", "add", "sub", "max", "min"]
            .choose(self.rng)
            .expect("nonempty");
        if matches!(name, "max" | "min") && a.value_space() != b.value_space() {
            name = "avg";
        }
        let spaces = [Arc::clone(a.value_space()), Arc::clone(b.value_space())];
        let c = builtin(name, &spaces).expect("builtin").expect("typed");
        Formula::apply(Arc::new(c), vec![a, b]).expect("typed")
    }

    fn table_apply(&mut self, depth: usize) -> Arc<Formula> {
        let a = self.any(depth - 1);
        let mut args = vec![a];
        if self.rng.gen_bool(0.4) {
            let b = self.any(depth - 1);
            if args[0].value_space().len() * b.value_space().len() <= TABLE_DOMAIN_CAP {
                args.push(b);
            }
        }
        self.table_over(args)
    }

    /// Apply a random table connective to `args`.
    fn table_over(&mut self, args: Vec<Arc<Formula>>) -> Arc<Formula> {
        self.tables += 1;
        let domain: Vec<Arc<ValueSpace>> = args.iter().map(|a| Arc::clone(a.value_space())).collect();
        let codomain = random_space(self.rng, self.cfg, &format!("Y{}", self.tables), self.cfg.net_size);
        let conn = random_table(self.rng, &format!("tab{}", self.tables), domain, codomain);
        Formula::apply(conn, args).expect("typed")
    }
}

/// A table connective with values drawn uniformly from the codomain net.
pub fn random_table(
    rng: &mut impl Rng,
    name: &str,
    domain: Vec<Arc<ValueSpace>>,
    codomain: Arc<ValueSpace>,
) -> Arc<Connective> {
    let entries = DomainTuples::from_radices(domain.iter().map(|s| s.len()).collect())
        .map(|t| {
            let key = t.iter().zip(&domain).map(|(&i, s)| s.net()[i].clone()).collect();
            (key, codomain.net().choose(rng).expect("nonempty").clone())
        })
        .collect();
    Arc::new(Connective::table_auto(name, domain, codomain, entries).expect("entries cover the domain"))
}

/// A real-valued test function on `space`.
///
/// On hyperspaces: `(sup θ)`, `(inf θ)` for a random θ on the base, or an
/// arbitrary table. Elsewhere: a coordinate projection, `1 − x_i`, a product
/// of two coordinates, or an arbitrary table with values in eighths.
pub fn random_test(rng: &mut impl Rng, space: &Arc<ValueSpace>) -> Arc<Connective> {
    if let Some(base) = space.hyper_base() {
        let base = Arc::clone(base);
        return match rng.gen_range(0..3) {
            0 => Arc::new(sup_theta(&random_test(rng, &base)).expect("real-valued")),
            1 => Arc::new(inf_theta(&random_test(rng, &base)).expect("real-valued")),
            _ => random_unit_table(rng, space),
        };
    }
    let i = rng.gen_range(0..space.dimension());
    match rng.gen_range(0..4) {
        0 => coordinate_projection(space, i),
        1 => Arc::new(
            Connective::from_exprs(
                "flip",
                vec![Arc::clone(space)],
                None,
                vec![Expr::Neg(Box::new(Expr::Coord(i)))],
            )
            .expect("cube domain"),
        ),
        2 => {
            let j = rng.gen_range(0..space.dimension());
            let e = Expr::Mul(Box::new(Expr::Coord(i)), Box::new(Expr::Coord(j)));
            Arc::new(Connective::from_exprs("prod", vec![Arc::clone(space)], None, vec![e]).expect("cube domain"))
        }
        _ => random_unit_table(rng, space),
    }
}

fn random_unit_table(rng: &mut impl Rng, space: &Arc<ValueSpace>) -> Arc<Connective> {
    let values: Vec<Point> = (0..space.len())
        .map(|_| Point::scalar(rat(rng.gen_range(0..=8), 8)).expect("in [0,1]"))
        .collect();
    let mut distinct = values.clone();
    distinct.sort();
    distinct.dedup();
    let codomain = Arc::new(ValueSpace::finite_labeled("test-values", distinct).expect("distinct"));
    Arc::new(Connective::unary_table("g", Arc::clone(space), codomain, values).expect("valid table"))
}

/// Every assignment of `vars` to elements of an `n`-element universe.
pub fn assignments(vars: &[String], n: usize) -> Vec<Assignment> {
    let mut out = vec![Assignment::new()];
    for v in vars {
        out = out
            .into_iter()
            .flat_map(|a| {
                (0..n).map(move |e| {
                    let mut b = a.clone();
                    b.insert(v.clone(), e);
                    b
                })
            })
            .collect();
    }
    out
}

fn assignment_text(m: &Structure, asg: &Assignment) -> BTreeMap<String, String> {
    asg.iter().map(|(v, &e)| (v.clone(), m.universe()[e].clone())).collect()
}

/// A pair of disagreeing values.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Mismatch {
    pub assignment: BTreeMap<String, String>,
    #[serde(with = "rational::serde_pq")]
    pub expected: Rational,
    #[serde(with = "rational::serde_pq")]
    pub coded: Rational,
    #[serde(with = "rational::serde_pq")]
    pub allowed: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CodingCheck {
    pub formula: String,
    pub theta: String,
    pub code_size: usize,
    #[serde(with = "rational::serde_pq")]
    pub budget: Rational,
    pub checked: usize,
    #[serde(with = "rational::serde_pq")]
    pub max_difference: Rational,
    pub mismatch: Option<Mismatch>,
}

impl CodingCheck {
    pub fn passed(&self) -> bool {
        self.mismatch.is_none()
    }
}

/// `θ(eval_M(φ))`, by evaluating φ and applying θ to its value.
pub fn direct_value(
    m: &Structure,
    phi: &Formula,
    theta: &Connective,
    asg: &Assignment,
) -> Result<Rational, OracleError> {
    let v = eval(m, phi, asg)?;
    Ok(theta.apply(&[v.value])?.point.value().clone())
}

/// Compare `eval_{M^ℝ}(φ_θ)` with `θ(eval_M(φ))` under every assignment of
/// φ's free variables, allowing the code's budget plus `tol`.
pub fn verify_coding(
    ctx: &TranslationContext,
    m: &Structure,
    phi: &Arc<Formula>,
    theta: &Arc<Connective>,
    tol: &Rational,
) -> Result<CodingCheck, OracleError> {
    let coded = ctx.code(phi, theta)?;
    compare_code(ctx, m, phi, theta, &coded, tol)
}

/// [`verify_coding`] against a given, possibly wrong, code.
pub fn compare_code(
    ctx: &TranslationContext,
    m: &Structure,
    phi: &Arc<Formula>,
    theta: &Arc<Connective>,
    coded: &Coded,
    tol: &Rational,
) -> Result<CodingCheck, OracleError> {
    let (n, _) = ctx.transport_structure(m)?;
    let vars: Vec<String> = phi.free_vars().into_iter().collect();
    let allowed = &coded.budget + tol;
    let mut max_difference = zero();
    let mut mismatch = None;
    let all = assignments(&vars, m.len());
    for asg in &all {
        let expected = direct_value(m, phi, theta, asg)?;
        let got = eval(&n, &coded.formula, asg)?.scalar().clone();
        let diff = rational::abs_diff(&expected, &got);
        if diff > max_difference {
            max_difference = diff.clone();
        }
        if diff > allowed && mismatch.is_none() {
            mismatch = Some(Mismatch {
                assignment: assignment_text(m, asg),
                expected,
                coded: got,
                allowed: allowed.clone(),
            });
        }
    }
    Ok(CodingCheck {
        formula: phi.to_string(),
        theta: theta.name().to_string(),
        code_size: coded.formula.size(),
        budget: coded.budget.clone(),
        checked: all.len(),
        max_difference,
        mismatch,
    })
}

/// Move every value by 1/2 inside `[0,1]`, so no entry survives.
pub fn corrupt_values(values: &[Rational]) -> Vec<Rational> {
    values
        .iter()
        .map(|v| if *v < half() { v + half() } else { v - half() })
        .collect()
}

/// A deliberately wrong code: the extension of the corrupted table of θ
/// over φ's coordinates, checked against the true θ.
pub fn negative_control(
    ctx: &TranslationContext,
    m: &Structure,
    phi: &Arc<Formula>,
    theta: &Arc<Connective>,
    tol: &Rational,
) -> Result<CodingCheck, OracleError> {
    let bad = ctx.code_by_extension(phi, &corrupt_values(&theta.unary_values()?))?;
    compare_code(ctx, m, phi, theta, &bad, tol)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QuantifierCheck {
    /// `(sup θ)` applied to the value of `Q x. body`.
    #[serde(with = "rational::serde_pq")]
    pub lifted: Rational,
    /// `max_a θ(body[x := a])`.
    #[serde(with = "rational::serde_pq")]
    pub direct: Rational,
    /// `sup x. body_θ` on the transported structure, when a context is given.
    pub coded: Option<String>,
    pub passed: bool,
}

/// Check `(sup θ)(Q x. body) = max_a θ(body[x := a])` and, given a context
/// with the transported structure `M^ℝ`, that both equal `sup x. body_θ`
/// there up to the code's budget.
pub fn verify_quantifier_identity(
    coded_in: Option<(&TranslationContext, &Structure)>,
    m: &Structure,
    var: &str,
    body: &Arc<Formula>,
    theta: &Arc<Connective>,
    asg: &Assignment,
) -> Result<QuantifierCheck, OracleError> {
    let q = Formula::primordial(var, Arc::clone(body))?;
    let lifted_theta = sup_theta(theta)?;
    let lifted = lifted_theta.apply(&[eval(m, &q, asg)?.value])?.point.value().clone();
    let mut direct: Option<Rational> = None;
    for a in 0..m.len() {
        let mut b = asg.clone();
        b.insert(var.to_string(), a);
        let v = direct_value(m, body, theta, &b)?;
        if direct.as_ref().is_none_or(|d| v > *d) {
            direct = Some(v);
        }
    }
    let direct = direct.expect("universes are nonempty");
    let mut passed = lifted == direct;
    let mut coded = None;
    if let Some((ctx, n)) = coded_in {
        let c = ctx.code(body, theta)?;
        let f = Formula::sup(var, c.formula)?;
        let v = eval(n, &f, asg)?.scalar().clone();
        passed &= rational::abs_diff(&v, &lifted) <= c.budget;
        coded = Some(rational::to_pq(&v));
    }
    Ok(QuantifierCheck {
        lifted,
        direct,
        coded,
        passed,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RefinementCheck {
    #[serde(with = "rational::serde_pq")]
    pub set_max: Rational,
    #[serde(with = "rational::serde_pq")]
    pub set_min: Rational,
    #[serde(with = "rational::serde_pq")]
    pub sup: Rational,
    #[serde(with = "rational::serde_pq")]
    pub inf: Rational,
    pub passed: bool,
}

/// Largest and smallest members of `Q x. body` against `sup x. body` and
/// `inf x. body`, for a dimension-1 body.
pub fn verify_refinement(
    m: &Structure,
    var: &str,
    body: &Arc<Formula>,
    asg: &Assignment,
) -> Result<RefinementCheck, OracleError> {
    let q = eval(m, &*Formula::primordial(var, Arc::clone(body))?, asg)?;
    let set = q.compact_set().expect("hyperspace value");
    let members: Vec<&Rational> = set.points().map(|p| p.value()).collect();
    let set_max = rational::max_of(members.iter().copied()).expect("nonempty");
    let set_min = rational::min_of(members.iter().copied()).expect("nonempty");
    let sup = eval(m, &*Formula::sup(var, Arc::clone(body))?, asg)?.scalar().clone();
    let inf = eval(m, &*Formula::inf(var, Arc::clone(body))?, asg)?.scalar().clone();
    let passed = set_max == sup && set_min == inf;
    Ok(RefinementCheck {
        set_max,
        set_min,
        sup,
        inf,
        passed,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Pass,
    Fail,
    Error,
}

/// One line of the fuzz report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub seed: u64,
    pub universe: usize,
    pub relations: usize,
    pub depth: usize,
    pub formula: String,
    pub theta: String,
    #[serde(with = "rational::serde_pq")]
    pub budget: Rational,
    #[serde(with = "rational::serde_pq")]
    pub max_difference: Rational,
    pub assignments: usize,
    pub quantifier_checks: usize,
    pub outcome: Outcome,
    pub witness: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FuzzReport {
    pub config: FuzzConfig,
    pub records: Vec<TrialRecord>,
}

impl FuzzReport {
    pub fn failures(&self) -> usize {
        self.records.iter().filter(|r| r.outcome != Outcome::Pass).count()
    }
}

struct TrialParts {
    universe: usize,
    relations: usize,
    depth: usize,
    coding: CodingCheck,
    quantifier_checks: usize,
    witness: Option<String>,
}

/// Everything one fuzz trial draws from its stream.
#[derive(Debug, Clone)]
pub struct TrialInputs {
    pub structure: Structure,
    pub formula: Arc<Formula>,
    pub theta: Arc<Connective>,
    /// Body for the quantifier identity, with its test function.
    pub body: Arc<Formula>,
    pub body_theta: Arc<Connective>,
    /// Dimension-1 body for the refinement check.
    pub scalar_body: Arc<Formula>,
    pub var: String,
}

pub fn trial_inputs(cfg: &FuzzConfig, trial: u64) -> TrialInputs {
    let mut rng = trial_rng(cfg.seed, trial);
    let n = rng.gen_range(1..=cfg.universe_size);
    let sig = random_signature(&mut rng, cfg);
    let structure = random_structure(&mut rng, &sig, n);
    let depth = rng.gen_range(0..=cfg.formula_depth);
    let inner = cfg.formula_depth.saturating_sub(1);
    let (formula, body, scalar_body) = {
        let mut g = FormulaGen::new(&mut rng, &sig, cfg);
        (g.any(depth), g.small(inner), g.small_scalar(inner))
    };
    let theta = random_test(&mut rng, formula.value_space());
    let body_theta = random_test(&mut rng, body.value_space());
    let var = VARS.choose(&mut rng).expect("nonempty").to_string();
    TrialInputs {
        structure,
        formula,
        theta,
        body,
        body_theta,
        scalar_body,
        var,
    }
}

fn trial_parts(cfg: &FuzzConfig, trial: u64) -> Result<TrialParts, OracleError> {
    let TrialInputs {
        structure: m,
        formula: phi,
        theta,
        body,
        body_theta,
        scalar_body,
        var,
    } = trial_inputs(cfg, trial);
    let n = m.len();
    let sig = Arc::clone(m.signature());
    let ctx = TranslationContext::new(Arc::clone(&sig), cfg.grid_step.clone())?;
    let coding = verify_coding(&ctx, &m, &phi, &theta, &cfg.tol)?;
    let mut witness = coding
        .mismatch
        .as_ref()
        .map(|w| serde_json::to_string(w).expect("serializable"));

    let mut quantifier_checks = 0;
    let (transported, _) = ctx.transport_structure(&m)?;
    let scalar_theta = coordinate_projection(scalar_body.value_space(), 0);
    for (b, t, check_refinement) in [(&body, &body_theta, false), (&scalar_body, &scalar_theta, true)] {
        let rest: Vec<String> = b.free_vars().into_iter().filter(|v| *v != var).collect();
        for asg in assignments(&rest, n) {
            quantifier_checks += 1;
            let q = verify_quantifier_identity(Some((&ctx, &transported)), &m, &var, b, t, &asg)?;
            if !q.passed && witness.is_none() {
                witness = Some(format!(
                    "quantifier identity over {b}: {}",
                    serde_json::to_string(&q).expect("serializable")
                ));
            }
            if check_refinement {
                let r = verify_refinement(&m, &var, b, &asg)?;
                if !r.passed && witness.is_none() {
                    witness = Some(format!(
                        "refinement over {b}: {}",
                        serde_json::to_string(&r).expect("serializable")
                    ));
                }
            }
        }
    }
    Ok(TrialParts {
        universe: n,
        relations: sig.relations().len(),
        depth: phi.depth(),
        coding,
        quantifier_checks,
        witness,
    })
}

/// Run a single trial; failures and errors become records.
pub fn run_trial(cfg: &FuzzConfig, trial: u64) -> TrialRecord {
    match trial_parts(cfg, trial) {
        Ok(p) => TrialRecord {
            trial,
            seed: cfg.seed,
            universe: p.universe,
            relations: p.relations,
            depth: p.depth,
            formula: p.coding.formula.clone(),
            theta: p.coding.theta.clone(),
            budget: p.coding.budget.clone(),
            max_difference: p.coding.max_difference.clone(),
            assignments: p.coding.checked,
            quantifier_checks: p.quantifier_checks,
            outcome: if p.witness.is_none() {
                Outcome::Pass
            } else {
                Outcome::Fail
            },
            witness: p.witness,
        },
        Err(e) => TrialRecord {
            trial,
            seed: cfg.seed,
            universe: 0,
            relations: 0,
            depth: 0,
            formula: String::new(),
            theta: String::new(),
            budget: zero(),
            max_difference: zero(),
            assignments: 0,
            quantifier_checks: 0,
            outcome: Outcome::Error,
            witness: Some(e.to_string()),
        },
    }
}

/// All trials in parallel; records come back in trial order.
pub fn fuzz(cfg: &FuzzConfig) -> Result<FuzzReport, OracleError> {
    cfg.validate()?;
    let records = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|t| run_trial(cfg, t))
        .collect();
    Ok(FuzzReport {
        config: cfg.clone(),
        records,
    })
}

/// Kinds of damage injected into a pseudo-metric structure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MetricCorruption {
    Reflexivity,
    Symmetry,
    Triangle,
    Modulus,
}

impl MetricCorruption {
    pub const ALL: [MetricCorruption; 4] = [Self::Reflexivity, Self::Symmetry, Self::Triangle, Self::Modulus];

    pub fn matches(self, v: &MetricViolation) -> bool {
        matches!(
            (self, v),
            (Self::Reflexivity, MetricViolation::Reflexivity { .. })
                | (Self::Symmetry, MetricViolation::Symmetry { .. })
                | (Self::Triangle, MetricViolation::Triangle { .. })
                | (Self::Modulus, MetricViolation::Modulus { .. })
        )
    }
}

/// `d` on quarters of `[0,1]`, a unary `P` into `{0,1}` with modulus 4 and
/// a binary `R` on quarters with modulus 2.
pub fn metric_signature() -> Arc<Signature> {
    let quarters = Arc::new(
        ValueSpace::finite_labeled(
            "quarters",
            (0..=4).map(|i| Point::scalar(rat(i, 4)).expect("unit")).collect(),
        )
        .expect("distinct"),
    );
    let bits = Arc::new(
        ValueSpace::finite_labeled(
            "bits",
            vec![
                Point::scalar(int(0)).expect("unit"),
                Point::scalar(int(1)).expect("unit"),
            ],
        )
        .expect("distinct"),
    );
    let relations = BTreeMap::from([
        (
            "d".to_string(),
            Relation {
                arity: 2,
                space: Arc::clone(&quarters),
            },
        ),
        ("P".to_string(), Relation { arity: 1, space: bits }),
        (
            "R".to_string(),
            Relation {
                arity: 2,
                space: quarters,
            },
        ),
    ]);
    let moduli = BTreeMap::from([("P".to_string(), int(4)), ("R".to_string(), int(2))]);
    Arc::new(Signature::new(relations, Some("d".into()), moduli).expect("valid metric signature"))
}

/// Elements at positions in quarters: `d` is the distance between
/// positions, `P` thresholds at 1/2 and `R` is the larger position. With
/// `collide`, the first `collide` elements share a position, so the
/// quotient is nontrivial.
pub fn random_metric_structure(rng: &mut impl Rng, n: usize, collide: usize) -> Structure {
    let mut pos: Vec<Rational> = (0..n).map(|_| rat(rng.gen_range(0..=4), 4)).collect();
    for i in 1..collide.min(n) {
        pos[i] = pos[0].clone();
    }
    metric_from_positions(&pos)
}

fn metric_from_positions(pos: &[Rational]) -> Structure {
    let sc = |v: Rational| Point::scalar(v).expect("unit");
    Structure::from_fn(metric_signature(), universe(pos.len()), |name, _, t| match name {
        "d" => sc(rational::abs_diff(&pos[t[0]], &pos[t[1]])),
        "P" => sc(if pos[t[0]] >= half() { int(1) } else { int(0) }),
        _ => sc(pos[t[0]].clone().max(pos[t[1]].clone())),
    })
    .expect("values on the nets")
}

/// A metric structure damaged by `kind`, on at least three elements.
pub fn corrupted_metric_structure(rng: &mut impl Rng, n: usize, kind: MetricCorruption) -> Structure {
    let n = n.max(3);
    let collide = match kind {
        MetricCorruption::Triangle => 3,
        MetricCorruption::Modulus => 2,
        _ => 0,
    };
    let m = random_metric_structure(rng, n, collide);
    let mut interp = m.interp().clone();
    let sc = |v: Rational| Point::scalar(v).expect("unit");
    match kind {
        MetricCorruption::Reflexivity => {
            let a = rng.gen_range(0..n);
            interp
                .get_mut("d")
                .expect("d")
                .insert(vec![a, a], sc(rat(rng.gen_range(1..=4), 4)));
        }
        MetricCorruption::Symmetry => {
            let a = rng.gen_range(0..n);
            let b = (a + rng.gen_range(1..n)) % n;
            let d = interp.get_mut("d").expect("d");
            let old = d[&vec![a, b]].value().clone();
            let new = if old >= half() { &old - half() } else { &old + half() };
            d.insert(vec![a, b], sc(new));
        }
        MetricCorruption::Triangle => {
            let d = interp.get_mut("d").expect("d");
            d.insert(vec![0, 2], sc(half()));
            d.insert(vec![2, 0], sc(half()));
        }
        MetricCorruption::Modulus => {
            let p = interp.get_mut("P").expect("P");
            let old = p[&vec![1]].value().clone();
            p.insert(vec![1], sc(int(1) - old));
        }
    }
    Structure::new(metric_signature(), m.universe().to_vec(), interp).expect("values stay on the nets")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::library::Library;
    use crate::formula::parse;

    fn running() -> (Structure, TranslationContext) {
        let x = Arc::new(ValueSpace::unit_grid(&rat(1, 10)).unwrap());
        let sig = Arc::new(Signature::plain([("P".to_string(), Relation { arity: 1, space: x })]).unwrap());
        let vals = [rat(3, 10), rat(4, 5)];
        let m = Structure::from_fn(sig.clone(), universe(2), |_, _, t| {
            Point::scalar(vals[t[0]].clone()).unwrap()
        })
        .unwrap();
        (m, TranslationContext::new(sig, rat(1, 10)).unwrap())
    }

    #[test]
    fn determinism() {
        let cfg = FuzzConfig {
            trials: 5,
            ..FuzzConfig::default()
        };
        let a = fuzz(&cfg).unwrap();
        assert_eq!(a, fuzz(&cfg).unwrap());
        let sig = random_signature(&mut trial_rng(0, 0), &cfg);
        let m1 = random_structure(&mut trial_rng(0, 1), &sig, 4);
        let m2 = random_structure(&mut trial_rng(0, 1), &sig, 4);
        assert_eq!(m1, m2);
    }

    #[test]
    fn formula_depth_is_capped() {
        let cfg = FuzzConfig::default();
        let mut rng = trial_rng(7, 0);
        for _ in 0..1000 {
            let sig = random_signature(&mut rng, &cfg);
            let d = rng.gen_range(0..=3);
            let f = FormulaGen::new(&mut rng, &sig, &cfg).any(d);
            assert!(f.depth() <= d, "{f}");
            if d == 0 {
                assert!(matches!(&*f, Formula::Atomic { .. }));
            }
        }
    }

    #[test]
    fn running_example_checks() {
        let (m, ctx) = running();
        let lib = Library::new();
        let body = parse("P(x)", m.signature(), &lib).unwrap();
        let id = coordinate_projection(body.value_space(), 0);
        let (n, _) = ctx.transport_structure(&m).unwrap();
        let q = verify_quantifier_identity(Some((&ctx, &n)), &m, "x", &body, &id, &Assignment::new()).unwrap();
        assert!(q.passed);
        assert_eq!(q.direct, rat(4, 5));
        let neg = Arc::new(builtin("neg", &[body.value_space().clone()]).unwrap().unwrap());
        let q = verify_quantifier_identity(None, &m, "x", &body, &neg, &Assignment::new()).unwrap();
        assert_eq!((q.lifted, q.direct), (rat(7, 10), rat(7, 10)));

        let phi = parse("Q x. P(x)", m.signature(), &lib).unwrap();
        let hsup = Arc::new(builtin("hsup", &[phi.value_space().clone()]).unwrap().unwrap());
        let c = verify_coding(&ctx, &m, &phi, &hsup, &zero()).unwrap();
        assert!(c.passed());
        assert_eq!(c.max_difference, zero());
        let r = verify_refinement(&m, "x", &body, &Assignment::new()).unwrap();
        assert!(r.passed);
        assert_eq!((r.set_min, r.set_max), (rat(3, 10), rat(4, 5)));
    }

    #[test]
    fn singleton_universe() {
        let (m, _) = running();
        let one = Structure::from_fn(m.signature().clone(), universe(1), |_, _, _| {
            Point::scalar(rat(3, 10)).unwrap()
        })
        .unwrap();
        let body = parse("P(x)", one.signature(), &Library::new()).unwrap();
        let neg = Arc::new(builtin("neg", &[body.value_space().clone()]).unwrap().unwrap());
        let q = verify_quantifier_identity(None, &one, "x", &body, &neg, &Assignment::new()).unwrap();
        assert_eq!((q.lifted, q.direct), (rat(7, 10), rat(7, 10)));
    }

    #[test]
    fn negative_control_is_caught() {
        let x = Arc::new(ValueSpace::finite((0..=4).map(|i| Point::scalar(rat(i, 4)).unwrap()).collect()).unwrap());
        let sig = Arc::new(Signature::plain([("P".to_string(), Relation { arity: 1, space: x })]).unwrap());
        let vals = [rat(1, 4), rat(1, 2)];
        let m = Structure::from_fn(sig.clone(), universe(2), |_, _, t| {
            Point::scalar(vals[t[0]].clone()).unwrap()
        })
        .unwrap();
        let ctx = TranslationContext::new(sig, rat(1, 4)).unwrap();
        let phi = parse("P(x)", m.signature(), &Library::new()).unwrap();
        let id = coordinate_projection(phi.value_space(), 0);
        let ok = verify_coding(&ctx, &m, &phi, &id, &zero()).unwrap();
        assert!(ok.passed());
        let bad = negative_control(&ctx, &m, &phi, &id, &zero()).unwrap();
        assert!(bad.mismatch.is_some());
    }

    #[test]
    fn metric_corruptions_are_found() {
        let mut rng = trial_rng(3, 0);
        assert_eq!(
            crate::semantics::check_pseudometric(&random_metric_structure(&mut rng, 5, 2)).unwrap(),
            None
        );
        for kind in MetricCorruption::ALL {
            let m = corrupted_metric_structure(&mut rng, 4, kind);
            let v = crate::semantics::check_pseudometric(&m).unwrap().expect("violation");
            assert!(kind.matches(&v), "{kind:?}: {v}");
        }
    }

    #[test]
    fn config_bounds() {
        assert!(FuzzConfig::default().validate().is_ok());
        for bad in [
            FuzzConfig {
                universe_size: 7,
                ..FuzzConfig::default()
            },
            FuzzConfig {
                formula_depth: 5,
                ..FuzzConfig::default()
            },
            FuzzConfig {
                net_size: 0,
                ..FuzzConfig::default()
            },
            FuzzConfig {
                grid_step: rat(2, 5),
                ..FuzzConfig::default()
            },
        ] {
            assert!(bad.validate().is_err());
        }
    }
}
