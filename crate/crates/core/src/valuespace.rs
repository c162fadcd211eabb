//! Compact value spaces, presented as finite ε-nets inside the unit cube.
//!
//! A [`ValueSpace`] is a finite, duplicate-free list of points of `[0,1]^n`
//! together with a resolution `ε`: the net is an ε-net of the compact space
//! it stands for, and `ε = 0` means the space is exactly the net. Cube spaces
//! use the ℓ∞ metric. Hyperspaces (see [`crate::hyperspace`]) reuse the same
//! presentation, encoding each nonempty subset of a base net as an indicator
//! vector, but measure distance with the Hausdorff metric of the base.

use std::collections::BTreeMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use num_traits::{Signed, Zero};

use crate::formula::connective::{Connective, Expr, Kernel};
use crate::rational::{self, abs_diff, in_unit, one, zero, Rational};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SpaceError {
    #[error("a value space needs at least one point")]
    EmptyNet,
    #[error("a value space needs a positive dimension")]
    ZeroDimension,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("coordinate {value} lies outside [0,1]")]
    OutOfRange { value: String },
    #[error("interval bounds out of order or outside [0,1]: lo = {lo}, hi = {hi}")]
    InvalidInterval { lo: String, hi: String },
    #[error("interval step must be positive, got {0}")]
    NonPositiveStep(String),
    #[error("resolution must be nonnegative, got {0}")]
    NegativeResolution(String),
    #[error("net point {0} appears twice")]
    DuplicatePoint(String),
    #[error("hyperspace of a {size}-point net exceeds the capacity of {cap} base points")]
    Capacity { size: usize, cap: usize },
    #[error("{what} has {size} points, over the enumeration limit of {cap}")]
    TooLarge {
        what: &'static str,
        size: usize,
        cap: usize,
    },
}

/// A point of the unit cube. Coordinates are exact rationals in `[0,1]`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Point(Vec<Rational>);

impl Point {
    pub fn new(coords: Vec<Rational>) -> Result<Self, SpaceError> {
        if let Some(bad) = coords.iter().find(|c| !in_unit(c)) {
            return Err(SpaceError::OutOfRange {
                value: rational::to_pq(bad),
            });
        }
        Ok(Self(coords))
    }

    pub fn scalar(value: Rational) -> Result<Self, SpaceError> {
        Self::new(vec![value])
    }

    pub(crate) fn from_trusted(coords: Vec<Rational>) -> Self {
        debug_assert!(coords.iter().all(in_unit));
        Self(coords)
    }

    pub fn coords(&self) -> &[Rational] {
        &self.0
    }

    pub fn dimension(&self) -> usize {
        self.0.len()
    }

    pub fn into_coords(self) -> Vec<Rational> {
        self.0
    }

    /// The single coordinate of a dimension-1 point.
    pub fn value(&self) -> &Rational {
        &self.0[0]
    }

    pub fn concat(&self, other: &Point) -> Point {
        let mut coords = self.0.clone();
        coords.extend(other.0.iter().cloned());
        Point(coords)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.len() == 1 {
            return write!(f, "{}", rational::to_display(&self.0[0]));
        }
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", rational::to_display(c))?;
        }
        write!(f, ")")
    }
}

/// How distances between net points are measured.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Geometry {
    /// ℓ∞ on the coordinates.
    Cube,
    /// Indicator vectors of nonempty subsets of `base.net`, Hausdorff metric.
    Hyper { base: Arc<ValueSpace> },
    /// Concatenated coordinates of the parts, max of the part metrics.
    Product { parts: Vec<Arc<ValueSpace>> },
}

#[derive(Debug, Clone)]
pub struct ValueSpace {
    label: String,
    dimension: usize,
    net: Vec<Point>,
    resolution: Rational,
    geometry: Geometry,
    index: BTreeMap<Point, usize>,
    /// Pairwise base distances, row-major, for hyperspaces only.
    base_distances: Vec<Rational>,
}

impl PartialEq for ValueSpace {
    fn eq(&self, other: &Self) -> bool {
        std::ptr::eq(self, other)
            || (self.dimension == other.dimension
                && self.label == other.label
                && self.resolution == other.resolution
                && self.net == other.net
                && self.geometry == other.geometry)
    }
}

impl Eq for ValueSpace {}

impl Hash for ValueSpace {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.label.hash(state);
        self.dimension.hash(state);
        self.resolution.hash(state);
        self.net.hash(state);
    }
}

impl ValueSpace {
    /// Validated constructor for cube spaces; used by deserialization.
    pub fn new(
        label: impl Into<String>,
        dimension: usize,
        net: Vec<Point>,
        resolution: Rational,
    ) -> Result<Self, SpaceError> {
        if dimension == 0 {
            return Err(SpaceError::ZeroDimension);
        }
        if net.is_empty() {
            return Err(SpaceError::EmptyNet);
        }
        if resolution.is_negative() {
            return Err(SpaceError::NegativeResolution(rational::to_pq(&resolution)));
        }
        let mut index = BTreeMap::new();
        for (i, p) in net.iter().enumerate() {
            if p.dimension() != dimension {
                return Err(SpaceError::DimensionMismatch {
                    expected: dimension,
                    found: p.dimension(),
                });
            }
            if index.insert(p.clone(), i).is_some() {
                return Err(SpaceError::DuplicatePoint(p.to_string()));
            }
        }
        Ok(Self {
            label: label.into(),
            dimension,
            net,
            resolution,
            geometry: Geometry::Cube,
            index,
            base_distances: Vec::new(),
        })
    }

    /// The grid `{lo, lo+step, ..., hi}` (last point clamped to `hi`), with
    /// resolution `step/2`.
    pub fn interval(lo: Rational, hi: Rational, step: Rational) -> Result<Self, SpaceError> {
        if !step.is_positive() {
            return Err(SpaceError::NonPositiveStep(rational::to_pq(&step)));
        }
        if lo > hi || !in_unit(&lo) || !in_unit(&hi) {
            return Err(SpaceError::InvalidInterval {
                lo: rational::to_pq(&lo),
                hi: rational::to_pq(&hi),
            });
        }
        let mut net = Vec::new();
        let mut x = lo.clone();
        while x < hi {
            net.push(Point(vec![x.clone()]));
            x += &step;
        }
        net.push(Point(vec![hi.clone()]));
        let label = format!(
            "interval({},{},{})",
            rational::to_pq(&lo),
            rational::to_pq(&hi),
            rational::to_pq(&step)
        );
        Self::new(label, 1, net, step / rational::int(2))
    }

    /// The unit-interval grid of the given step.
    pub fn unit_grid(step: &Rational) -> Result<Self, SpaceError> {
        Self::interval(zero(), one(), step.clone())
    }

    /// An exact finite space: duplicates are dropped, resolution is 0.
    pub fn finite(points: Vec<Point>) -> Result<Self, SpaceError> {
        Self::finite_labeled("finite", points)
    }

    pub fn finite_labeled(label: &str, points: Vec<Point>) -> Result<Self, SpaceError> {
        Self::finite_with_resolution(label, points, zero())
    }

    pub(crate) fn finite_with_resolution(
        label: &str,
        points: Vec<Point>,
        resolution: Rational,
    ) -> Result<Self, SpaceError> {
        let first = points.first().ok_or(SpaceError::EmptyNet)?;
        let dimension = first.dimension();
        let mut seen = BTreeMap::new();
        let mut net = Vec::with_capacity(points.len());
        for p in points {
            if p.dimension() != dimension {
                return Err(SpaceError::DimensionMismatch {
                    expected: dimension,
                    found: p.dimension(),
                });
            }
            if seen.insert(p.clone(), ()).is_none() {
                net.push(p);
            }
        }
        Self::new(label, dimension, net, resolution)
    }

    /// A sorted dimension-1 space holding `values` and the unit grid of
    /// `step`, with resolution `step/2`. Used as the codomain of generated
    /// real-valued connectives.
    pub(crate) fn unit_with_values(
        step: &Rational,
        values: impl IntoIterator<Item = Rational>,
    ) -> Result<Self, SpaceError> {
        let grid = Self::unit_grid(step)?;
        let mut all: Vec<Rational> = grid.net.iter().map(|p| p.value().clone()).collect();
        all.extend(values);
        all.sort();
        all.dedup();
        let points = all.into_iter().map(Point::scalar).collect::<Result<Vec<_>, _>>()?;
        let label = format!("unit~{}", rational::to_pq(step));
        Self::finite_with_resolution(&label, points, step / rational::int(2))
    }

    pub(crate) fn hyper_from_parts(label: String, base: Arc<ValueSpace>, net: Vec<Point>) -> Self {
        let m = base.net.len();
        let mut base_distances = Vec::with_capacity(m * m);
        for p in &base.net {
            for q in &base.net {
                base_distances.push(base.distance_unchecked(p.coords(), q.coords()));
            }
        }
        let index = net.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();
        Self {
            label,
            dimension: m,
            resolution: base.resolution.clone(),
            net,
            geometry: Geometry::Hyper { base },
            index,
            base_distances,
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn net(&self) -> &[Point] {
        &self.net
    }

    pub fn len(&self) -> usize {
        self.net.len()
    }

    pub fn is_empty(&self) -> bool {
        self.net.is_empty()
    }

    pub fn resolution(&self) -> &Rational {
        &self.resolution
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn is_cube(&self) -> bool {
        matches!(self.geometry, Geometry::Cube)
    }

    /// A dimension-1 cube space: the shape real-valued quantifiers accept.
    pub fn is_interval_like(&self) -> bool {
        self.is_cube() && self.dimension == 1
    }

    pub fn hyper_base(&self) -> Option<&Arc<ValueSpace>> {
        match &self.geometry {
            Geometry::Hyper { base } => Some(base),
            _ => None,
        }
    }

    pub fn index_of(&self, p: &Point) -> Option<usize> {
        self.index.get(p).copied()
    }

    pub fn contains_exact(&self, p: &Point) -> bool {
        self.index.contains_key(p)
    }

    pub fn check_point(&self, p: &Point) -> Result<(), SpaceError> {
        if p.dimension() != self.dimension {
            return Err(SpaceError::DimensionMismatch {
                expected: self.dimension,
                found: p.dimension(),
            });
        }
        Ok(())
    }

    pub fn distance(&self, p: &Point, q: &Point) -> Result<Rational, SpaceError> {
        self.check_point(p)?;
        self.check_point(q)?;
        Ok(self.distance_unchecked(p.coords(), q.coords()))
    }

    /// Distance between raw coordinate vectors of the right length. Hyperspace
    /// coordinates must be 0/1 indicators of a nonempty subset.
    pub(crate) fn distance_unchecked(&self, p: &[Rational], q: &[Rational]) -> Rational {
        match &self.geometry {
            Geometry::Cube => sup_distance(p, q),
            Geometry::Hyper { .. } => {
                let a = indicator_members(p);
                let b = indicator_members(q);
                self.hausdorff_indices(&a, &b)
            }
            Geometry::Product { parts } => {
                let mut offset = 0;
                let mut best = zero();
                for part in parts {
                    let end = offset + part.dimension;
                    let d = part.distance_unchecked(&p[offset..end], &q[offset..end]);
                    if d > best {
                        best = d;
                    }
                    offset = end;
                }
                best
            }
        }
    }

    /// Hausdorff distance between two subsets of the base net, by index.
    pub(crate) fn hausdorff_indices(&self, a: &[usize], b: &[usize]) -> Rational {
        let m = self.dimension;
        let d = |i: usize, j: usize| &self.base_distances[i * m + j];
        let excess = |from: &[usize], to: &[usize]| {
            from.iter()
                .map(|&i| to.iter().map(|&j| d(i, j)).min().cloned().unwrap_or_else(zero))
                .max()
                .unwrap_or_else(zero)
        };
        let ab = excess(a, b);
        let ba = excess(b, a);
        ab.max(ba)
    }

    /// Nearest net point (first in net order on ties) and its distance.
    pub fn nearest(&self, p: &Point) -> Result<(usize, Rational), SpaceError> {
        self.check_point(p)?;
        Ok(self.nearest_raw(p.coords()))
    }

    pub(crate) fn nearest_raw(&self, p: &[Rational]) -> (usize, Rational) {
        if let Some(i) = self.lookup_raw(p) {
            return (i, zero());
        }
        let mut best: Option<(usize, Rational)> = None;
        for (i, q) in self.net.iter().enumerate() {
            let d = match self.geometry {
                // Off-net hyperspace vectors only arise from rounding; ℓ∞ on
                // the indicator coordinates picks the closest subset code.
                Geometry::Hyper { .. } => sup_distance(p, q.coords()),
                _ => self.distance_unchecked(p, q.coords()),
            };
            if best.as_ref().is_none_or(|(_, b)| d < *b) {
                best = Some((i, d));
            }
        }
        best.expect("nets are nonempty")
    }

    fn lookup_raw(&self, p: &[Rational]) -> Option<usize> {
        if p.iter().all(in_unit) {
            self.index.get(&Point(p.to_vec())).copied()
        } else {
            None
        }
    }

    /// True iff `p` is within `resolution + tol` of the net.
    pub fn membership(&self, p: &Point, tol: &Rational) -> Result<bool, SpaceError> {
        let (_, d) = self.nearest(p)?;
        Ok(d <= &self.resolution + tol)
    }

    pub fn distance_to_net(&self, p: &Point) -> Result<Rational, SpaceError> {
        Ok(self.nearest(p)?.1)
    }

    /// Concatenated coordinates of the `i`-th coordinate projection's image.
    pub fn coordinate_values(&self, i: usize) -> Vec<Rational> {
        let mut vals: Vec<Rational> = self.net.iter().map(|p| p.0[i].clone()).collect();
        vals.sort();
        vals.dedup();
        vals
    }

    /// A valid Lipschitz constant for the `i`-th coordinate projection with
    /// respect to this space's metric.
    pub fn coordinate_lipschitz(&self, i: usize) -> Rational {
        match &self.geometry {
            Geometry::Cube => one(),
            Geometry::Hyper { base } => {
                // Two subsets that disagree on base point i are at Hausdorff
                // distance at least the gap from point i to the rest of the net.
                let m = base.net.len();
                let gap = (0..m)
                    .filter(|&j| j != i)
                    .map(|j| self.base_distances[i * m + j].clone())
                    .min();
                match gap {
                    Some(g) if !g.is_zero() => one() / g,
                    _ => zero(),
                }
            }
            Geometry::Product { parts } => {
                let mut offset = 0;
                for part in parts {
                    if i < offset + part.dimension {
                        return part.coordinate_lipschitz(i - offset);
                    }
                    offset += part.dimension;
                }
                unreachable!("coordinate index within dimension")
            }
        }
    }
}

impl fmt::Display for ValueSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} (dim {}, {} points, ε = {})",
            self.label,
            self.dimension,
            self.net.len(),
            rational::to_display(&self.resolution)
        )
    }
}

pub fn sup_distance(p: &[Rational], q: &[Rational]) -> Rational {
    p.iter().zip(q).map(|(a, b)| abs_diff(a, b)).max().unwrap_or_else(zero)
}

pub(crate) fn indicator_members(p: &[Rational]) -> Vec<usize> {
    p.iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(i, _)| i)
        .collect()
}

/// `X × Y`: concatenated net points under the max metric.
pub fn product(x: &Arc<ValueSpace>, y: &Arc<ValueSpace>) -> ValueSpace {
    let mut net = Vec::with_capacity(x.net.len() * y.net.len());
    for p in &x.net {
        for q in &y.net {
            net.push(p.concat(q));
        }
    }
    let label = format!("{}×{}", x.label, y.label);
    let resolution = x.resolution.clone().max(y.resolution.clone());
    let dimension = x.dimension + y.dimension;
    let index = net.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();
    let geometry = if x.is_cube() && y.is_cube() {
        Geometry::Cube
    } else {
        let mut parts = Vec::new();
        for s in [x, y] {
            match &s.geometry {
                Geometry::Product { parts: inner } => parts.extend(inner.iter().cloned()),
                _ => parts.push(Arc::clone(s)),
            }
        }
        Geometry::Product { parts }
    };
    ValueSpace {
        label,
        dimension,
        net,
        resolution,
        geometry,
        index,
        base_distances: Vec::new(),
    }
}

/// A presentation of `X` inside `[0,1]^n` with its separating family of
/// coordinate projections.
#[derive(Debug, Clone)]
pub struct Embedding {
    pub source: Arc<ValueSpace>,
    pub ambient_dimension: usize,
    pub separating_family: Vec<Arc<Connective>>,
}

impl Embedding {
    /// True iff every pair of distinct net points differs under some member
    /// of the family.
    pub fn separates(&self) -> bool {
        let values: Vec<Vec<Rational>> = self
            .source
            .net()
            .iter()
            .map(|p| {
                self.separating_family
                    .iter()
                    .map(|pi| {
                        pi.apply_raw(&[p.coords()])
                            .expect("projection is total on its net")
                            .remove(0)
                    })
                    .collect()
            })
            .collect();
        let mut sorted = values.clone();
        sorted.sort();
        sorted.dedup();
        sorted.len() == values.len()
    }
}

/// The `i`-th coordinate projection `X → [0,1]`. Its codomain is the exact
/// set of `i`-th coordinates of the net, carrying `X`'s resolution.
pub fn coordinate_projection(x: &Arc<ValueSpace>, i: usize) -> Arc<Connective> {
    let points = x.coordinate_values(i).into_iter().map(|v| Point(vec![v])).collect();
    let codomain = ValueSpace::finite_with_resolution(&format!("π{i}({})", x.label), points, x.resolution.clone())
        .expect("coordinates of a valid net form a valid space");
    Arc::new(Connective::from_parts(
        format!("proj{i}"),
        vec![Arc::clone(x)],
        Arc::new(codomain),
        x.coordinate_lipschitz(i),
        Kernel::Expr(vec![Expr::Coord(i)]),
    ))
}

pub fn embed_cube(x: &Arc<ValueSpace>) -> Embedding {
    let separating_family = (0..x.dimension).map(|i| coordinate_projection(x, i)).collect();
    Embedding {
        source: Arc::clone(x),
        ambient_dimension: x.dimension,
        separating_family,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn pt(v: &[(i64, i64)]) -> Point {
        Point::new(v.iter().map(|&(n, d)| rat(n, d)).collect()).unwrap()
    }

    fn values(x: &ValueSpace) -> Vec<Rational> {
        x.net().iter().map(|p| p.value().clone()).collect()
    }

    #[test]
    fn interval_examples() {
        let x = ValueSpace::interval(int(0), int(1), rat(1, 2)).unwrap();
        assert_eq!(values(&x), vec![int(0), rat(1, 2), int(1)]);
        assert_eq!(x.resolution(), &rat(1, 4));

        let x = ValueSpace::interval(int(0), int(0), rat(1, 4)).unwrap();
        assert_eq!(values(&x), vec![int(0)]);
        assert_eq!(x.resolution(), &rat(1, 8));

        let x = ValueSpace::interval(int(0), int(1), rat(1, 3)).unwrap();
        assert_eq!(values(&x), vec![int(0), rat(1, 3), rat(2, 3), int(1)]);
        assert_eq!(x.resolution(), &rat(1, 6));

        let x = ValueSpace::interval(int(0), int(1), rat(3, 10)).unwrap();
        assert_eq!(values(&x), vec![int(0), rat(3, 10), rat(3, 5), rat(9, 10), int(1)]);
    }

    #[test]
    fn interval_rejects_bad_bounds() {
        assert!(matches!(
            ValueSpace::interval(int(1), int(0), rat(1, 2)),
            Err(SpaceError::InvalidInterval { .. })
        ));
        assert!(matches!(
            ValueSpace::interval(int(0), int(1), int(0)),
            Err(SpaceError::NonPositiveStep(_))
        ));
        assert!(matches!(
            ValueSpace::interval(int(0), int(1), rat(-1, 2)),
            Err(SpaceError::NonPositiveStep(_))
        ));
    }

    #[test]
    fn finite_examples() {
        let x = ValueSpace::finite(vec![pt(&[(0, 1)]), pt(&[(1, 1)])]).unwrap();
        assert_eq!(x.len(), 2);
        assert_eq!(x.resolution(), &int(0));
        let x = ValueSpace::finite(vec![pt(&[(0, 1)]), pt(&[(0, 1)])]).unwrap();
        assert_eq!(x.len(), 1);
        let x = ValueSpace::finite(vec![pt(&[(1, 4), (1, 2)])]).unwrap();
        assert_eq!((x.len(), x.dimension()), (1, 2));
    }

    #[test]
    fn finite_rejects_bad_input() {
        assert_eq!(ValueSpace::finite(vec![]), Err(SpaceError::EmptyNet));
        assert!(matches!(
            ValueSpace::finite(vec![pt(&[(0, 1)]), pt(&[(0, 1), (1, 1)])]),
            Err(SpaceError::DimensionMismatch { .. })
        ));
        assert!(matches!(
            Point::new(vec![rat(3, 2)]),
            Err(SpaceError::OutOfRange { .. })
        ));
    }

    #[test]
    fn product_examples() {
        let bit = Arc::new(ValueSpace::finite(vec![pt(&[(0, 1)]), pt(&[(1, 1)])]).unwrap());
        let p = product(&bit, &bit);
        assert_eq!((p.len(), p.dimension()), (4, 2));
        assert_eq!(p.resolution(), &int(0));

        let grid = Arc::new(ValueSpace::interval(int(0), int(1), rat(1, 2)).unwrap());
        let single = Arc::new(ValueSpace::finite(vec![pt(&[(1, 3)])]).unwrap());
        let p = product(&grid, &single);
        assert_eq!(p.len(), grid.len());
        assert_eq!(p.resolution(), grid.resolution());

        // Enumerated concatenations of the 3-point grid with itself.
        let p = product(&grid, &grid);
        let mut expected = Vec::new();
        for a in [rat(0, 1), rat(1, 2), rat(1, 1)] {
            for b in [rat(0, 1), rat(1, 2), rat(1, 1)] {
                expected.push(Point::new(vec![a.clone(), b]).unwrap());
            }
        }
        assert_eq!(p.net(), expected.as_slice());
        assert_eq!(p.resolution(), &rat(1, 4));
    }

    #[test]
    fn distance_examples() {
        let cube = ValueSpace::finite(vec![pt(&[(1, 5), (1, 2)]), pt(&[(2, 5), (1, 10)])]).unwrap();
        let (p, q) = (&cube.net()[0], &cube.net()[1]);
        assert_eq!(cube.distance(p, q).unwrap(), rat(2, 5));
        assert_eq!(cube.distance(p, p).unwrap(), int(0));
        let line = ValueSpace::finite(vec![pt(&[(0, 1)]), pt(&[(1, 1)])]).unwrap();
        assert_eq!(line.distance(&line.net()[0], &line.net()[1]).unwrap(), int(1));
        assert!(matches!(
            line.distance(&line.net()[0], p),
            Err(SpaceError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn membership_examples() {
        let bit = ValueSpace::finite(vec![pt(&[(0, 1)]), pt(&[(1, 1)])]).unwrap();
        assert!(bit.membership(&pt(&[(1, 1)]), &rat(1, 10)).unwrap());
        assert!(!bit.membership(&pt(&[(1, 2)]), &rat(1, 10)).unwrap());
        let grid = ValueSpace::interval(int(0), int(1), rat(1, 2)).unwrap();
        assert!(grid.membership(&pt(&[(3, 5)]), &int(0)).unwrap());
        assert!(bit.membership(&pt(&[(1, 2), (0, 1)]), &int(0)).is_err());
    }

    #[test]
    fn embed_cube_examples() {
        let x = Arc::new(ValueSpace::finite(vec![pt(&[(1, 5), (1, 2)]), pt(&[(0, 1), (1, 1)])]).unwrap());
        let e = embed_cube(&x);
        assert_eq!(e.ambient_dimension, 2);
        assert_eq!(e.separating_family.len(), 2);
        let v = e.separating_family[0].apply_raw(&[x.net()[0].coords()]).unwrap();
        assert_eq!(v, vec![rat(1, 5)]);
        assert!(e.separates());

        let line = Arc::new(ValueSpace::interval(int(0), int(1), rat(1, 4)).unwrap());
        let e = embed_cube(&line);
        assert_eq!(e.separating_family.len(), 1);
        for p in line.net() {
            assert_eq!(e.separating_family[0].apply_raw(&[p.coords()]).unwrap(), p.coords());
        }

        let corner = Arc::new(ValueSpace::finite(vec![pt(&[(0, 1), (0, 1)]), pt(&[(0, 1), (1, 1)])]).unwrap());
        let e = embed_cube(&corner);
        let a = e.separating_family[1].apply_raw(&[corner.net()[0].coords()]).unwrap();
        let b = e.separating_family[1].apply_raw(&[corner.net()[1].coords()]).unwrap();
        assert_ne!(a, b);
        assert!(e.separates());
    }

    #[test]
    fn nearest_breaks_ties_by_net_order() {
        let bit = ValueSpace::finite(vec![pt(&[(0, 1)]), pt(&[(1, 1)])]).unwrap();
        assert_eq!(bit.nearest(&pt(&[(1, 2)])).unwrap(), (0, rat(1, 2)));
    }
}
