//! The hyperspace `K(X)` of nonempty compact subsets of a value space.
//!
//! Nets are finite, so every nonempty subset of a net is compact and closure
//! is the identity. `K(X)` is presented as a value space whose points are the
//! indicator vectors of those subsets, enumerated by bitmask, and measured
//! with the Hausdorff metric of `X`. Basic Vietoris opens are decided through
//! open ℓ∞ balls.

use std::fmt;
use std::sync::Arc;

use num_traits::{Signed, Zero};

use crate::formula::connective::{Connective, ConnectiveError, Kernel};
use crate::rational::{self, one, zero, Rational};
use crate::valuespace::{Point, SpaceError, ValueSpace};

/// Largest base net `hyper` will enumerate (2^16 − 1 subsets).
pub const HYPER_CAPACITY: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum HyperError {
    #[error("operands live in different spaces (`{left}` vs `{right}`)")]
    SpaceMismatch { left: String, right: String },
    #[error("a compact set needs at least one member")]
    EmptySet,
    #[error("{0} is not a net point of the space")]
    NotMember(String),
    #[error("the two sets are equal, so no separator exists")]
    IdenticalSets,
    #[error("open balls need positive radius, got {0}")]
    NonPositiveRadius(String),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Connective(#[from] ConnectiveError),
}

/// A nonempty subset of `space.net`, stored as sorted net indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CompactSet {
    space: Arc<ValueSpace>,
    members: Vec<usize>,
}

impl CompactSet {
    pub fn from_indices(space: Arc<ValueSpace>, mut members: Vec<usize>) -> Result<Self, HyperError> {
        members.sort_unstable();
        members.dedup();
        if members.is_empty() {
            return Err(HyperError::EmptySet);
        }
        if let Some(&bad) = members.iter().find(|&&i| i >= space.len()) {
            return Err(HyperError::NotMember(format!("index {bad}")));
        }
        Ok(Self { space, members })
    }

    pub fn from_points(space: Arc<ValueSpace>, points: &[Point]) -> Result<Self, HyperError> {
        let members = points
            .iter()
            .map(|p| space.index_of(p).ok_or_else(|| HyperError::NotMember(p.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_indices(space, members)
    }

    /// Decode an indicator point of `hyper(X)`.
    pub fn decode(hyperspace: &ValueSpace, point: &Point) -> Result<Self, HyperError> {
        let base = hyperspace
            .hyper_base()
            .ok_or_else(|| HyperError::NotMember(point.to_string()))?;
        if hyperspace.index_of(point).is_none() {
            return Err(HyperError::NotMember(point.to_string()));
        }
        let members = point
            .coords()
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, _)| i)
            .collect();
        Self::from_indices(Arc::clone(base), members)
    }

    /// The indicator point of this set in `hyper(space)`.
    pub fn encode(&self) -> Point {
        let mut coords = vec![zero(); self.space.len()];
        for &i in &self.members {
            coords[i] = one();
        }
        Point::from_trusted(coords)
    }

    /// Index of this set in the bitmask enumeration of `hyper(space)`.
    pub fn hyper_index(&self) -> usize {
        self.members.iter().map(|&i| 1usize << i).sum::<usize>() - 1
    }

    pub fn space(&self) -> &Arc<ValueSpace> {
        &self.space
    }

    pub fn indices(&self) -> &[usize] {
        &self.members
    }

    pub fn points(&self) -> impl Iterator<Item = &Point> {
        self.members.iter().map(|&i| &self.space.net()[i])
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains_index(&self, i: usize) -> bool {
        self.members.binary_search(&i).is_ok()
    }

    pub fn is_subset(&self, other: &CompactSet) -> bool {
        self.members.iter().all(|&i| other.contains_index(i))
    }

    /// Distance from `p` to the nearest member.
    pub fn distance_from(&self, p: &Point) -> Result<Rational, HyperError> {
        let mut best: Option<Rational> = None;
        for q in self.points() {
            let d = self.space.distance(p, q)?;
            if best.as_ref().is_none_or(|b| d < *b) {
                best = Some(d);
            }
        }
        Ok(best.expect("compact sets are nonempty"))
    }

    /// Every nonempty subset of `space.net`, in bitmask order.
    pub fn all_subsets(space: &Arc<ValueSpace>) -> Result<Vec<CompactSet>, HyperError> {
        let m = space.len();
        if m > HYPER_CAPACITY {
            return Err(SpaceError::Capacity {
                size: m,
                cap: HYPER_CAPACITY,
            }
            .into());
        }
        Ok((1usize..(1 << m))
            .map(|mask| CompactSet {
                space: Arc::clone(space),
                members: (0..m).filter(|i| mask & (1 << i) != 0).collect(),
            })
            .collect())
    }
}

impl fmt::Display for CompactSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, p) in self.points().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, "}}")
    }
}

/// `K(X)` as a value space of indicator points.
pub fn hyper(x: &Arc<ValueSpace>) -> Result<Arc<ValueSpace>, HyperError> {
    let subsets = CompactSet::all_subsets(x)?;
    let net = subsets.iter().map(CompactSet::encode).collect();
    Ok(Arc::new(ValueSpace::hyper_from_parts(
        format!("K({})", x.label()),
        Arc::clone(x),
        net,
    )))
}

fn same_space(a: &Arc<ValueSpace>, b: &Arc<ValueSpace>) -> Result<(), HyperError> {
    if a != b {
        return Err(HyperError::SpaceMismatch {
            left: a.label().to_string(),
            right: b.label().to_string(),
        });
    }
    Ok(())
}

/// `max(max_k min_f d(k,f), max_f min_k d(k,f))`.
pub fn hausdorff(x: &Arc<ValueSpace>, k: &CompactSet, f: &CompactSet) -> Result<Rational, HyperError> {
    same_space(x, &k.space)?;
    same_space(x, &f.space)?;
    let excess = |a: &CompactSet, b: &CompactSet| -> Result<Rational, HyperError> {
        let mut worst = zero();
        for p in a.points() {
            let d = b.distance_from(p)?;
            if d > worst {
                worst = d;
            }
        }
        Ok(worst)
    };
    Ok(excess(k, f)?.max(excess(f, k)?))
}

/// A finite union of open ℓ∞ balls (or Hausdorff balls, for hyperspaces).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpenRegion {
    space: Arc<ValueSpace>,
    balls: Vec<(Point, Rational)>,
}

impl OpenRegion {
    pub fn new(space: Arc<ValueSpace>, balls: Vec<(Point, Rational)>) -> Result<Self, HyperError> {
        for (c, r) in &balls {
            space.check_point(c)?;
            if !r.is_positive() {
                return Err(HyperError::NonPositiveRadius(rational::to_pq(r)));
            }
        }
        Ok(Self { space, balls })
    }

    pub fn ball(space: Arc<ValueSpace>, center: Point, radius: Rational) -> Result<Self, HyperError> {
        Self::new(space, vec![(center, radius)])
    }

    pub fn space(&self) -> &Arc<ValueSpace> {
        &self.space
    }

    pub fn balls(&self) -> &[(Point, Rational)] {
        &self.balls
    }

    pub fn contains(&self, p: &Point) -> Result<bool, HyperError> {
        for (c, r) in &self.balls {
            if self.space.distance(p, c)? < *r {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// How far inside the region `p` sits: `max (r − d(p, c))` over balls.
    /// Positive exactly when `p` is in the region.
    pub fn depth(&self, p: &Point) -> Result<Rational, HyperError> {
        let mut best: Option<Rational> = None;
        for (c, r) in &self.balls {
            let slack = r - self.space.distance(p, c)?;
            if best.as_ref().is_none_or(|b| slack > *b) {
                best = Some(slack);
            }
        }
        Ok(best.unwrap_or_else(zero))
    }
}

/// Membership of `K` in the basic open `O¹_U ∩ ⋂_i O²_{V_i}`.
pub fn vietoris_member(k: &CompactSet, u: &OpenRegion, vs: &[OpenRegion]) -> Result<bool, HyperError> {
    same_space(&k.space, &u.space)?;
    for v in vs {
        same_space(&k.space, &v.space)?;
    }
    for p in k.points() {
        if !u.contains(p)? {
            return Ok(false);
        }
    }
    for v in vs {
        let mut meets = false;
        for p in k.points() {
            if v.contains(p)? {
                meets = true;
                break;
            }
        }
        if !meets {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The δ for which `K`'s membership in `O¹_U ∩ ⋂ O²_{V_i}` is stable: every
/// member sits at depth ≥ δ in `U`, and each `V_i` holds a member at depth
/// ≥ δ. Nonpositive when `K` is not a member.
pub fn vietoris_slack(k: &CompactSet, u: &OpenRegion, vs: &[OpenRegion]) -> Result<Rational, HyperError> {
    let mut slack: Option<Rational> = None;
    let mut take = |s: Rational| {
        if slack.as_ref().is_none_or(|b| s < *b) {
            slack = Some(s);
        }
    };
    for p in k.points() {
        take(u.depth(p)?);
    }
    for v in vs {
        let mut best: Option<Rational> = None;
        for p in k.points() {
            let d = v.depth(p)?;
            if best.as_ref().is_none_or(|b| d > *b) {
                best = Some(d);
            }
        }
        take(best.expect("compact sets are nonempty"));
    }
    Ok(slack.expect("compact sets are nonempty"))
}

fn unary_domain(theta: &Connective) -> Result<&Arc<ValueSpace>, HyperError> {
    match theta.domain() {
        [x] => Ok(x),
        other => Err(ConnectiveError::Arity {
            name: theta.name().to_string(),
            expected: 1,
            found: other.len(),
        }
        .into()),
    }
}

/// `K(θ): K(X) → K(Y)`, the image map of a connective `θ: X → Y`.
pub fn lift(theta: &Arc<Connective>) -> Result<Connective, HyperError> {
    let x = unary_domain(theta)?;
    let y = theta.codomain();
    let images = x
        .net()
        .iter()
        .map(|p| Ok(theta.apply(std::slice::from_ref(p))?.index))
        .collect::<Result<Vec<_>, HyperError>>()?;
    Ok(Connective::from_parts(
        format!("K({})", theta.name()),
        vec![hyper(x)?],
        hyper(y)?,
        theta.lipschitz().clone(),
        Kernel::Lift {
            theta: Arc::clone(theta),
            images,
        },
    ))
}

fn real_values(theta: &Connective) -> Result<Vec<Rational>, HyperError> {
    if !theta.is_real_valued() {
        return Err(ConnectiveError::NotRealValued {
            name: theta.name().to_string(),
        }
        .into());
    }
    Ok(theta.unary_values()?)
}

/// `(sup θ) = sup ∘ K(θ): K(X) → [0,1]`.
pub fn sup_theta(theta: &Arc<Connective>) -> Result<Connective, HyperError> {
    let x = unary_domain(theta)?;
    let values = real_values(theta)?;
    Ok(Connective::from_parts(
        format!("sup[{}]", theta.name()),
        vec![hyper(x)?],
        Arc::clone(theta.codomain()),
        theta.lipschitz().clone(),
        Kernel::SupOf {
            theta: Arc::clone(theta),
            values,
        },
    ))
}

/// `(inf θ) = inf ∘ K(θ)`.
pub fn inf_theta(theta: &Arc<Connective>) -> Result<Connective, HyperError> {
    let x = unary_domain(theta)?;
    let values = real_values(theta)?;
    Ok(Connective::from_parts(
        format!("inf[{}]", theta.name()),
        vec![hyper(x)?],
        Arc::clone(theta.codomain()),
        theta.lipschitz().clone(),
        Kernel::InfOf {
            theta: Arc::clone(theta),
            values,
        },
    ))
}

/// A Urysohn function `θ: X → [0,1]` with `(sup θ)` taking values 0 and 1 on
/// the two sets.
///
/// With a witness `x ∈ F \ K`, `θ(p) = min(1, d(p,K) / d(x,K))`, so θ vanishes
/// on `K` and `θ(x) = 1`. When `F ⊊ K` the roles are swapped: θ vanishes on
/// `F` and equals one at a point of `K \ F`. Witnesses are the first
/// candidates in net order.
pub fn urysohn_separator(x: &Arc<ValueSpace>, k: &CompactSet, f: &CompactSet) -> Result<Arc<Connective>, HyperError> {
    same_space(x, &k.space)?;
    same_space(x, &f.space)?;
    let (zero_set, witness) = match f.members.iter().find(|&&i| !k.contains_index(i)) {
        Some(&w) => (k, w),
        None => match k.members.iter().find(|&&i| !f.contains_index(i)) {
            Some(&w) => (f, w),
            None => return Err(HyperError::IdenticalSets),
        },
    };
    let witness_point = &x.net()[witness];
    let scale = zero_set.distance_from(witness_point)?;
    let mut values = Vec::with_capacity(x.len());
    for p in x.net() {
        let d = zero_set.distance_from(p)?;
        values.push((d / &scale).min(one()));
    }
    let lipschitz = one() / scale;
    separator_table("urysohn", x, values, lipschitz)
}

fn separator_table(
    name: &str,
    x: &Arc<ValueSpace>,
    values: Vec<Rational>,
    lipschitz: Rational,
) -> Result<Arc<Connective>, HyperError> {
    let codomain = Arc::new(ValueSpace::finite_labeled(
        &format!("{name}-values"),
        values
            .iter()
            .cloned()
            .map(Point::scalar)
            .collect::<Result<Vec<_>, _>>()?,
    )?);
    let entries = x
        .net()
        .iter()
        .cloned()
        .zip(values)
        .map(|(p, v)| Ok((vec![p], Point::scalar(v)?)))
        .collect::<Result<Vec<_>, SpaceError>>()?;
    Ok(Arc::new(Connective::table(
        name,
        vec![Arc::clone(x)],
        codomain,
        entries,
        lipschitz,
    )?))
}

/// For each net point `x_i`, the separator of `{x_i}` from the rest of the
/// net: `(sup θ_i)(K) = 1` iff `x_i ∈ K`. On a one-point net the single
/// member is the constant 1.
pub fn indicator_family(x: &Arc<ValueSpace>) -> Result<Vec<Arc<Connective>>, HyperError> {
    let m = x.len();
    if m == 1 {
        return Ok(vec![separator_table("member0", x, vec![one()], zero())?]);
    }
    (0..m)
        .map(|i| {
            let rest = CompactSet::from_indices(Arc::clone(x), (0..m).filter(|&j| j != i).collect())?;
            let single = CompactSet::from_indices(Arc::clone(x), vec![i])?;
            let theta = urysohn_separator(x, &rest, &single)?;
            Ok(Arc::new(theta.renamed(format!("member{i}"))))
        })
        .collect()
}
