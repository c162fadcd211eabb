//! Acceptance suite: one line per criterion, nonzero exit if any fails.
//!
//! Runs without the libtest harness so each criterion reports exactly once.

use std::collections::BTreeSet;
use std::ops::RangeInclusive;
use std::sync::Arc;
use std::time::{Duration, Instant};

use contlogic::formula::connective::{mcshane_extend, minimal_lipschitz, Connective};
use contlogic::hyperspace::{
    hausdorff, hyper, inf_theta, lift, sup_theta, urysohn_separator, vietoris_member, vietoris_slack, CompactSet,
    OpenRegion,
};
use contlogic::oracle::{
    self, assignments, corrupted_metric_structure, negative_control, random_metric_structure, trial_inputs,
    verify_quantifier_identity, verify_refinement, FormulaGen, FuzzConfig, MetricCorruption, Outcome,
};
use contlogic::rational::{rat, to_pq, Rational};
use contlogic::semantics::{check_pseudometric, eval, quotient, SemanticsError};
use contlogic::translate::{lattice_approx, TranslationContext};
use contlogic::valuespace::{coordinate_projection, Point, ValueSpace};
use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

fn rng(criterion: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0xacce_0000 + criterion)
}

/// Criterion 1 configuration: universe ≤ 5, depth ≤ 3.
fn cfg(exact: bool, seed: u64) -> FuzzConfig {
    FuzzConfig {
        seed,
        universe_size: 5,
        formula_depth: 3,
        net_size: 4,
        trials: 1000,
        tol: Rational::zero(),
        grid_step: rat(1, 4),
        exact,
    }
}

fn linf(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(Rational::zero(), |m, v| if v > m { v } else { m })
}

fn brute_hausdorff(k: &CompactSet, f: &CompactSet) -> Rational {
    let one_way = |a: &CompactSet, b: &CompactSet| {
        a.points()
            .map(|p| b.points().map(|q| linf(p.coords(), q.coords())).min().unwrap())
            .max()
            .unwrap()
    };
    std::cmp::max(one_way(k, f), one_way(f, k))
}

/// A space of distinct points on the eighths grid of `[0,1]^dim`, with size
/// and dimension drawn from the ranges.
fn random_space(rng: &mut ChaCha8Rng, sizes: RangeInclusive<usize>, dims: RangeInclusive<usize>) -> Arc<ValueSpace> {
    let size = rng.gen_range(sizes);
    let dim = rng.gen_range(dims);
    let mut pts = BTreeSet::new();
    while pts.len() < size {
        pts.insert((0..dim).map(|_| rat(rng.gen_range(0..=8), 8)).collect::<Vec<_>>());
    }
    let net = pts.into_iter().map(|c| Point::new(c).unwrap()).collect();
    Arc::new(ValueSpace::finite(net).unwrap())
}

fn apply1(c: &Connective, p: &Point) -> Point {
    c.apply(std::slice::from_ref(p)).unwrap().point
}

fn scalar_at(c: &Connective, k: &CompactSet) -> Rational {
    apply1(c, &k.encode()).coords()[0].clone()
}

fn random_table(rng: &mut ChaCha8Rng, name: &str, x: &Arc<ValueSpace>, y: &Arc<ValueSpace>) -> Arc<Connective> {
    let values = (0..x.len()).map(|_| y.net().choose(rng).unwrap().clone()).collect();
    Arc::new(Connective::unary_table(name, Arc::clone(x), Arc::clone(y), values).unwrap())
}

fn c1_coding_soundness() -> Verdict {
    let start = Instant::now();
    let exact = oracle::fuzz(&cfg(true, 1)).map_err(|e| e.to_string())?;
    let grid = oracle::fuzz(&cfg(false, 2)).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    for r in &exact.records {
        if r.outcome != Outcome::Pass || !r.max_difference.is_zero() {
            return Err(format!(
                "exact trial {}: {:?} difference {} ({:?})",
                r.trial,
                r.outcome,
                to_pq(&r.max_difference),
                r.witness
            ));
        }
    }
    for r in &grid.records {
        if r.outcome != Outcome::Pass || r.max_difference > r.budget {
            return Err(format!(
                "grid trial {}: {:?} difference {} budget {} ({:?})",
                r.trial,
                r.outcome,
                to_pq(&r.max_difference),
                to_pq(&r.budget),
                r.witness
            ));
        }
    }
    if elapsed > Duration::from_secs(60) {
        return Err(format!("took {elapsed:.1?}, limit 60 s"));
    }
    let positive = grid.records.iter().filter(|r| r.budget.is_positive()).count();
    Ok(format!(
        "{} exact trials at difference 0; {} grid trials within budget ({} with positive budget); {elapsed:.1?}",
        exact.records.len(),
        grid.records.len(),
        positive
    ))
}

fn c2_quantifier_identity() -> Verdict {
    let config = cfg(true, 3);
    let mut checks = 0;
    for t in 0..config.trials as u64 {
        let inp = trial_inputs(&config, t);
        let m = &inp.structure;
        let ctx =
            TranslationContext::new(Arc::clone(m.signature()), config.grid_step.clone()).map_err(|e| e.to_string())?;
        let (n, _) = ctx.transport_structure(m).map_err(|e| e.to_string())?;
        let rest: Vec<String> = inp.body.free_vars().into_iter().filter(|v| *v != inp.var).collect();
        for asg in assignments(&rest, m.len()) {
            let q = verify_quantifier_identity(Some((&ctx, &n)), m, &inp.var, &inp.body, &inp.body_theta, &asg)
                .map_err(|e| format!("trial {t}: {e}"))?;
            checks += 1;
            let coded = q.coded.clone().unwrap_or_default();
            if !q.passed || q.lifted != q.direct || coded != to_pq(&q.lifted) {
                return Err(format!(
                    "trial {t}: body {} θ {}: {q:?}",
                    inp.body,
                    inp.body_theta.name()
                ));
            }
        }
    }
    Ok(format!("{} trials, {checks} assignments, all exact", config.trials))
}

fn c3_primordial_refinement() -> Verdict {
    let config = cfg(true, 4);
    let mut checks = 0;
    for t in 0..config.trials as u64 {
        let inp = trial_inputs(&config, t);
        let m = &inp.structure;
        let rest: Vec<String> = inp
            .scalar_body
            .free_vars()
            .into_iter()
            .filter(|v| *v != inp.var)
            .collect();
        for asg in assignments(&rest, m.len()) {
            let r = verify_refinement(m, &inp.var, &inp.scalar_body, &asg).map_err(|e| format!("trial {t}: {e}"))?;
            checks += 1;
            if !r.passed {
                return Err(format!("trial {t}: body {}: {r:?}", inp.scalar_body));
            }
        }
    }
    Ok(format!("{} trials, {checks} assignments", config.trials))
}

fn c4_hyperspace_suite() -> Verdict {
    let start = Instant::now();
    let mut rng = rng(4);
    let mut triples = 0usize;
    for size in 1..=6 {
        for dim in 1..=2 {
            let x = random_space(&mut rng, size..=size, dim..=dim);
            let kx = hyper(&x).map_err(|e| e.to_string())?;
            let subsets = CompactSet::all_subsets(&x).map_err(|e| e.to_string())?;
            let s = subsets.len();
            let mut d = vec![vec![Rational::zero(); s]; s];
            for i in 0..s {
                for j in 0..s {
                    d[i][j] = hausdorff(&x, &subsets[i], &subsets[j]).map_err(|e| e.to_string())?;
                    if d[i][j] != brute_hausdorff(&subsets[i], &subsets[j]) {
                        return Err(format!(
                            "hausdorff({}, {}) disagrees with brute force",
                            subsets[i], subsets[j]
                        ));
                    }
                    if d[i][j]
                        != kx
                            .distance(&subsets[i].encode(), &subsets[j].encode())
                            .map_err(|e| e.to_string())?
                    {
                        return Err(format!("K({}) distance differs from hausdorff", x.label()));
                    }
                }
            }
            for i in 0..s {
                for j in 0..s {
                    if d[i][j].is_zero() != (i == j) || d[i][j] != d[j][i] {
                        return Err(format!("identity or symmetry fails at {}, {}", subsets[i], subsets[j]));
                    }
                    for k in 0..s {
                        triples += 1;
                        if d[i][k] > &d[i][j] + &d[j][k] {
                            return Err(format!(
                                "triangle fails at {}, {}, {}",
                                subsets[i], subsets[j], subsets[k]
                            ));
                        }
                    }
                }
            }
            for coord in 0..dim {
                let theta = coordinate_projection(&x, coord);
                let (sup, inf) = (
                    sup_theta(&theta).map_err(|e| e.to_string())?,
                    inf_theta(&theta).map_err(|e| e.to_string())?,
                );
                for i in 0..s {
                    for j in 0..s {
                        for c in [&sup, &inf] {
                            if (scalar_at(c, &subsets[i]) - scalar_at(c, &subsets[j])).abs() > d[i][j] {
                                return Err(format!(
                                    "{} is not 1-Lipschitz at {}, {}",
                                    c.name(),
                                    subsets[i],
                                    subsets[j]
                                ));
                            }
                        }
                    }
                }
            }
        }
    }
    let mut instances = 0usize;
    let mut neighbours = 0usize;
    let mut draws = 0usize;
    while instances < 500 {
        draws += 1;
        if draws > 100_000 {
            return Err(format!("only {instances} member instances drawn"));
        }
        let x = random_space(&mut rng, 2..=5, 1..=2);
        let subsets = CompactSet::all_subsets(&x).unwrap();
        let k = subsets.choose(&mut rng).unwrap().clone();
        let radius = |rng: &mut ChaCha8Rng| rat(rng.gen_range(1..=4), 8);
        let mut balls: Vec<(Point, Rational)> = k.points().map(|p| (p.clone(), radius(&mut rng))).collect();
        if rng.gen_bool(0.5) {
            balls.push((x.net().choose(&mut rng).unwrap().clone(), radius(&mut rng)));
        }
        let u = OpenRegion::new(Arc::clone(&x), balls).unwrap();
        let vs: Vec<OpenRegion> = (0..rng.gen_range(0..=2))
            .map(|_| {
                OpenRegion::ball(
                    Arc::clone(&x),
                    x.net().choose(&mut rng).unwrap().clone(),
                    radius(&mut rng),
                )
                .unwrap()
            })
            .collect();
        let delta = vietoris_slack(&k, &u, &vs).map_err(|e| e.to_string())?;
        let member = vietoris_member(&k, &u, &vs).map_err(|e| e.to_string())?;
        if member != delta.is_positive() {
            return Err(format!(
                "slack {} disagrees with membership {member} for {k}",
                to_pq(&delta)
            ));
        }
        if !member {
            continue;
        }
        instances += 1;
        for f in &subsets {
            if hausdorff(&x, &k, f).unwrap() < delta {
                neighbours += 1;
                if !vietoris_member(f, &u, &vs).unwrap() {
                    return Err(format!(
                        "{f} is within {} of {k} but leaves the open set",
                        to_pq(&delta)
                    ));
                }
            }
        }
    }
    let elapsed = start.elapsed();
    if elapsed > Duration::from_secs(30) {
        return Err(format!("took {elapsed:.1?}, limit 30 s"));
    }
    Ok(format!(
        "{triples} subset triples on nets of 1..6 points; {instances} Vietoris instances, {neighbours} neighbours stable; {elapsed:.1?}"
    ))
}

fn c5_functor_laws() -> Verdict {
    let mut rng = rng(5);
    let mut checked = 0usize;
    for _ in 0..100 {
        let x = random_space(&mut rng, 1..=5, 1..=2);
        let y = random_space(&mut rng, 1..=5, 1..=2);
        let z = random_space(&mut rng, 1..=5, 1..=2);
        let id = Arc::new(Connective::unary_table("id", Arc::clone(&x), Arc::clone(&x), x.net().to_vec()).unwrap());
        let sigma = random_table(&mut rng, "s", &x, &y);
        let theta = random_table(&mut rng, "t", &y, &z);
        let composed = Arc::new(
            Connective::compose("ts", Arc::clone(&theta), vec![Arc::clone(&sigma)]).map_err(|e| e.to_string())?,
        );
        let k_id = lift(&id).map_err(|e| e.to_string())?;
        let (k_ts, k_t, k_s) = (lift(&composed).unwrap(), lift(&theta).unwrap(), lift(&sigma).unwrap());
        for k in CompactSet::all_subsets(&x).unwrap() {
            checked += 1;
            if apply1(&k_id, &k.encode()) != k.encode() {
                return Err(format!("K(id) moves {k}"));
            }
            let image: Vec<Point> = k
                .points()
                .map(|p| apply1(&composed, p))
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect();
            let want = CompactSet::from_points(Arc::clone(&z), &image).unwrap().encode();
            if apply1(&k_ts, &k.encode()) != want || apply1(&k_t, &apply1(&k_s, &k.encode())) != want {
                return Err(format!("K(θ∘σ) ≠ K(θ)∘K(σ) at {k}"));
            }
        }
    }
    Ok(format!("100 triples of spaces, {checked} subsets"))
}

fn c6_separation() -> Verdict {
    let mut rng = rng(6);
    let mut pairs = 0usize;
    for size in 1..=5 {
        for _ in 0..10 {
            let x = random_space(&mut rng, size..=size, 1..=2);
            let subsets = CompactSet::all_subsets(&x).unwrap();
            for k in &subsets {
                for f in &subsets {
                    if k == f {
                        continue;
                    }
                    pairs += 1;
                    let theta = urysohn_separator(&x, k, f).map_err(|e| e.to_string())?;
                    let sup = sup_theta(&theta).map_err(|e| e.to_string())?;
                    if (scalar_at(&sup, k) - scalar_at(&sup, f)).abs() != Rational::one() {
                        return Err(format!("separator fails on {k}, {f}"));
                    }
                }
            }
        }
    }
    Ok(format!("{pairs} distinct pairs"))
}

fn c7_lattice_exactness() -> Verdict {
    let mut rng = rng(7);
    for i in 0..200 {
        let x = random_space(&mut rng, 1..=4, 1..=2);
        let subsets = CompactSet::all_subsets(&x).unwrap();
        let g: Vec<Rational> = subsets.iter().map(|_| rat(rng.gen_range(0..=8), 8)).collect();
        let thetas = if rng.gen_bool(0.5) {
            (0..x.dimension()).map(|c| coordinate_projection(&x, c)).collect()
        } else {
            Vec::new()
        };
        let approx = lattice_approx(&x, &g, thetas).map_err(|e| format!("instance {i}: {e}"))?;
        for k in &subsets {
            let v = approx.eval_on(k).map_err(|e| e.to_string())?;
            if v != g[k.hyper_index()] {
                return Err(format!(
                    "instance {i}: value {} at {k}, table says {}",
                    to_pq(&v),
                    to_pq(&g[k.hyper_index()])
                ));
            }
        }
    }
    Ok("200 tables on hyperspaces of nets ≤ 4 points".into())
}

fn c8_mcshane() -> Verdict {
    let mut rng = rng(8);
    let step = rat(1, 4);
    let grid = Arc::new(ValueSpace::unit_grid(&step).unwrap());
    let mut pairs = 0usize;
    for i in 0..200 {
        let dim = rng.gen_range(1..=2);
        let x = random_space(&mut rng, 1..=5, dim..=dim);
        let anchors: Vec<Vec<Rational>> = x.net().iter().map(|p| p.coords().to_vec()).collect();
        let values: Vec<Rational> = anchors.iter().map(|_| rat(rng.gen_range(0..=8), 8)).collect();
        let l = minimal_lipschitz(&anchors, &values) + rat(rng.gen_range(0..=4), 2);
        let ext = mcshane_extend("ext", &values, &l, &anchors, vec![Arc::clone(&grid); dim], &step)
            .map_err(|e| format!("instance {i}: {e}"))?;
        let at = |y: &[Rational]| {
            let refs: Vec<&[Rational]> = y.iter().map(std::slice::from_ref).collect();
            ext.apply_raw(&refs).unwrap()[0].clone()
        };
        for (a, v) in anchors.iter().zip(&values) {
            if &at(a) != v {
                return Err(format!("instance {i}: extension moves the value at a net point"));
            }
        }
        let cube: Vec<Vec<Rational>> = if dim == 1 {
            grid.net().iter().map(|p| p.coords().to_vec()).collect()
        } else {
            grid.net()
                .iter()
                .flat_map(|p| {
                    grid.net()
                        .iter()
                        .map(move |q| vec![p.coords()[0].clone(), q.coords()[0].clone()])
                })
                .collect()
        };
        let vals: Vec<Rational> = cube.iter().map(|y| at(y)).collect();
        for (a, va) in cube.iter().zip(&vals) {
            for (b, vb) in cube.iter().zip(&vals) {
                pairs += 1;
                if (va - vb).abs() > &l * linf(a, b) {
                    return Err(format!("instance {i}: Lipschitz bound {} broken", to_pq(&l)));
                }
            }
        }
    }
    Ok(format!("200 instances, {pairs} ambient pairs"))
}

fn c9_quotient_transparency() -> Verdict {
    let mut rng = rng(9);
    let config = FuzzConfig::default();
    let mut values = 0usize;
    for i in 0..200 {
        let n = rng.gen_range(2..=6);
        let collide = rng.gen_range(2..=n);
        let m = random_metric_structure(&mut rng, n, collide);
        let q = quotient(&m).map_err(|e| format!("structure {i}: {e}"))?;
        if q.structure.len() >= m.len() {
            return Err(format!("structure {i}: quotient is trivial"));
        }
        let phi = {
            let mut gen = FormulaGen::new(&mut rng, m.signature(), &config);
            gen.any(3)
        };
        let vars: Vec<String> = phi.free_vars().into_iter().collect();
        for asg in assignments(&vars, m.len()) {
            values += 1;
            let direct = eval(&m, &phi, &asg).map_err(|e| e.to_string())?;
            let through = eval(&q.structure, &phi, &q.map_assignment(&asg)).map_err(|e| e.to_string())?;
            if direct.value != through.value {
                return Err(format!("structure {i}: {phi} changes across the quotient"));
            }
        }
    }
    Ok(format!("200 structures with nontrivial quotients, {values} values"))
}

fn c10_t0_round_trip() -> Verdict {
    let config = cfg(true, 10);
    for t in 0..config.trials as u64 {
        let m = trial_inputs(&config, t).structure;
        let ctx =
            TranslationContext::new(Arc::clone(m.signature()), config.grid_step.clone()).map_err(|e| e.to_string())?;
        let (n, snap) = ctx.transport_structure(&m).map_err(|e| e.to_string())?;
        if !snap.is_zero() {
            return Err(format!("trial {t}: aligned grid rounded by {}", to_pq(&snap)));
        }
        if let Some(v) = ctx.check_t0(&n, &Rational::zero()).map_err(|e| e.to_string())? {
            return Err(format!("trial {t}: check-t0 fails at {}({})", v.symbol, v.tuple));
        }
        let back = ctx.decode(&n).map_err(|e| e.to_string())?;
        if back.interp() != m.interp() || back.universe() != m.universe() {
            return Err(format!("trial {t}: decode∘transport is not the identity"));
        }
        let (again, _) = ctx.transport_structure(&back).map_err(|e| e.to_string())?;
        if again != n {
            return Err(format!("trial {t}: transport∘decode is not the identity"));
        }
    }
    Ok(format!("{} aligned-grid trials", config.trials))
}

fn c11_negative_controls() -> Verdict {
    let config = cfg(true, 11);
    let mut caught = 0usize;
    let mut t = 0u64;
    while caught < 60 {
        if t >= 1000 {
            return Err(format!("only {caught} corruptions could be built"));
        }
        let inp = trial_inputs(&config, t);
        t += 1;
        let m = &inp.structure;
        let ctx =
            TranslationContext::new(Arc::clone(m.signature()), config.grid_step.clone()).map_err(|e| e.to_string())?;
        let check = match negative_control(&ctx, m, &inp.formula, &inp.theta, &Rational::zero()) {
            Ok(c) => c,
            // θ is not a finite unary table on this formula's space
            Err(_) => continue,
        };
        if check.passed() || check.mismatch.is_none() {
            return Err(format!("trial {}: corrupted code for {} passed", t - 1, inp.formula));
        }
        caught += 1;
    }
    let mut rng = rng(11);
    let mut metric = 0usize;
    for kind in MetricCorruption::ALL {
        for _ in 0..6 {
            let n = rng.gen_range(3..=6);
            let m = corrupted_metric_structure(&mut rng, n, kind);
            let v = check_pseudometric(&m)
                .map_err(|e| e.to_string())?
                .ok_or_else(|| format!("{kind:?} corruption not detected"))?;
            if !kind.matches(&v) || v.witness().is_empty() {
                return Err(format!("{kind:?} corruption reported as {v}"));
            }
            match quotient(&m) {
                Err(SemanticsError::NotPseudometric(_)) => {}
                other => return Err(format!("quotient accepted a {kind:?} corruption: {other:?}")),
            }
            metric += 1;
        }
    }
    Ok(format!(
        "{caught} corrupted codes and {metric} pseudo-metric violations detected with witnesses"
    ))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("coding soundness", c1_coding_soundness),
        ("quantifier identity", c2_quantifier_identity),
        ("primordial refinement", c3_primordial_refinement),
        ("hyperspace metric and topology", c4_hyperspace_suite),
        ("functor laws", c5_functor_laws),
        ("separation", c6_separation),
        ("lattice exactness", c7_lattice_exactness),
        ("McShane extension", c8_mcshane),
        ("quotient transparency", c9_quotient_transparency),
        ("T0 round trip", c10_t0_round_trip),
        ("negative controls", c11_negative_controls),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let verdict = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        match verdict {
            Ok(detail) => println!("criterion {:>2} {name}: PASS ({detail})", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} {name}: FAIL ({detail})", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria pass",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
