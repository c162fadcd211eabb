//! Named connectives: user-supplied ones plus builtins instantiated on the
//! value spaces of their arguments.

use std::collections::BTreeMap;
use std::sync::Arc;

use super::connective::{primitive, Connective, ConnectiveError, Expr, Primitive};
use super::FormulaError;
use crate::hyperspace::{inf_theta, sup_theta};
use crate::rational::{int, rat};
use crate::valuespace::ValueSpace;

/// Names resolved by [`builtin`] when the library has no entry.
pub const BUILTINS: &[&str] = &[
    "id", "neg", "add", "sub", "avg", "mul", "max", "min", "clamp01", "hsup", "hinf",
];

pub const KEYWORDS: &[&str] = &["sup", "inf", "Q"];

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Library {
    entries: BTreeMap<String, Arc<Connective>>,
}

impl Library {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, connective: Arc<Connective>) -> Result<(), FormulaError> {
        let name = connective.name().to_string();
        if !is_identifier(&name) || KEYWORDS.contains(&name.as_str()) {
            return Err(ConnectiveError::BadPrimitive {
                name,
                reason: "library names must be plain identifiers other than sup, inf, Q".into(),
            }
            .into());
        }
        if self.entries.contains_key(&name) || BUILTINS.contains(&name.as_str()) {
            return Err(ConnectiveError::BadPrimitive {
                name,
                reason: "name already in use".into(),
            }
            .into());
        }
        self.entries.insert(name, connective);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&Arc<Connective>> {
        self.entries.get(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Arc<Connective>> {
        self.entries.values()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// The connective `name` applied to arguments in `args`: a library entry
    /// if one exists, else a builtin. `None` if the name is unknown.
    pub fn resolve(&self, name: &str, args: &[Arc<ValueSpace>]) -> Result<Option<Arc<Connective>>, FormulaError> {
        if let Some(c) = self.entries.get(name) {
            return Ok(Some(Arc::clone(c)));
        }
        builtin(name, args).map(|r| r.map(Arc::new)).transpose()
    }
}

pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '#' | '\''))
}

/// Instantiate a builtin connective over the given argument spaces.
///
/// `max`/`min` need equal argument spaces and stay inside that space; `hsup`
/// and `hinf` read the largest and smallest member of a subset of a
/// dimension-1 space. The rest land in the exact image of their domain net.
/// `add` and `sub` are truncated to `[0,1]`.
pub fn builtin(name: &str, args: &[Arc<ValueSpace>]) -> Option<Result<Connective, FormulaError>> {
    let x = |i: usize| Box::new(Expr::Coord(i));
    let arity = |n: usize| -> Result<(), FormulaError> {
        if args.len() != n {
            return Err(FormulaError::Arity {
                symbol: name.to_string(),
                expected: n,
                found: args.len(),
            });
        }
        Ok(())
    };
    let scalar = || -> Result<(), FormulaError> {
        for (i, s) in args.iter().enumerate() {
            if !s.is_interval_like() {
                return Err(ConnectiveError::NotScalar {
                    name: name.to_string(),
                    index: i,
                }
                .into());
            }
        }
        Ok(())
    };
    let exprs = |n: usize, e: Expr| -> Result<Connective, FormulaError> {
        arity(n)?;
        scalar()?;
        Ok(Connective::from_exprs(name, args.to_vec(), None, vec![e])?)
    };
    let lattice = |kind: Primitive| -> Result<Connective, FormulaError> {
        let first = args.first().ok_or_else(|| FormulaError::Arity {
            symbol: name.to_string(),
            expected: 2,
            found: 0,
        })?;
        for (i, s) in args.iter().enumerate() {
            if s != first {
                return Err(FormulaError::TypeMismatch {
                    connective: name.to_string(),
                    index: i,
                    expected: first.label().to_string(),
                    found: s.label().to_string(),
                });
            }
        }
        Ok(primitive(name, &kind, args.to_vec(), Some(Arc::clone(first)))?)
    };
    let hyper_bound = |sup: bool| -> Result<Connective, FormulaError> {
        arity(1)?;
        let base = args[0]
            .hyper_base()
            .ok_or_else(|| ConnectiveError::NotHyperspace { name: name.to_string() })?;
        let id = Arc::new(primitive(
            "id",
            &Primitive::Proj(0),
            vec![Arc::clone(base)],
            Some(Arc::clone(base)),
        )?);
        let c = if sup { sup_theta(&id)? } else { inf_theta(&id)? };
        Ok(c.renamed(name))
    };
    let out = match name {
        "id" => (|| {
            arity(1)?;
            scalar()?;
            Ok(primitive(
                name,
                &Primitive::Proj(0),
                args.to_vec(),
                Some(Arc::clone(&args[0])),
            )?)
        })(),
        "neg" => exprs(1, Expr::Neg(x(0))),
        "clamp01" => exprs(1, Expr::Clamp01(x(0))),
        "add" => exprs(2, Expr::Clamp01(Box::new(Expr::Add(x(0), x(1))))),
        "sub" => exprs(
            2,
            Expr::Clamp01(Box::new(Expr::Add(
                x(0),
                Box::new(Expr::Affine {
                    a: int(-1),
                    b: int(0),
                    arg: x(1),
                }),
            ))),
        ),
        "avg" => exprs(
            2,
            Expr::Affine {
                a: rat(1, 2),
                b: int(0),
                arg: Box::new(Expr::Add(x(0), x(1))),
            },
        ),
        "mul" => exprs(2, Expr::Mul(x(0), x(1))),
        "max" => lattice(Primitive::Max),
        "min" => lattice(Primitive::Min),
        "hsup" => hyper_bound(true),
        "hinf" => hyper_bound(false),
        _ => return None,
    };
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hyperspace::{hyper, CompactSet};
    use crate::rational::Rational;
    use crate::valuespace::Point;

    fn grid(n: i64) -> Arc<ValueSpace> {
        Arc::new(ValueSpace::unit_grid(&rat(1, n)).unwrap())
    }

    fn s(v: Rational) -> Point {
        Point::scalar(v).unwrap()
    }

    #[test]
    fn builtins_instantiate() {
        let g = grid(4);
        let neg = builtin("neg", std::slice::from_ref(&g)).unwrap().unwrap();
        assert_eq!(neg.apply(&[s(rat(1, 4))]).unwrap().point, s(rat(3, 4)));
        let add = builtin("add", &[g.clone(), g.clone()]).unwrap().unwrap();
        assert_eq!(add.apply(&[s(rat(3, 4)), s(rat(1, 2))]).unwrap().point, s(int(1)));
        let sub = builtin("sub", &[g.clone(), g.clone()]).unwrap().unwrap();
        assert_eq!(sub.apply(&[s(rat(1, 4)), s(rat(1, 2))]).unwrap().point, s(int(0)));
        let max = builtin("max", &[g.clone(), g.clone()]).unwrap().unwrap();
        assert_eq!(max.codomain(), &g);
        assert!(matches!(
            builtin("max", &[g.clone(), grid(2)]),
            Some(Err(FormulaError::TypeMismatch { .. }))
        ));
        assert!(builtin("nope", std::slice::from_ref(&g)).is_none());
    }

    #[test]
    fn hyper_bounds() {
        let g = grid(4);
        let k = hyper(&g).unwrap();
        let hs = builtin("hsup", std::slice::from_ref(&k)).unwrap().unwrap();
        let hi = builtin("hinf", &[k]).unwrap().unwrap();
        let set = CompactSet::from_points(g.clone(), &[s(rat(1, 4)), s(rat(3, 4))]).unwrap();
        assert_eq!(hs.apply(&[set.encode()]).unwrap().point, s(rat(3, 4)));
        assert_eq!(hi.apply(&[set.encode()]).unwrap().point, s(rat(1, 4)));
    }

    #[test]
    fn library_rejects_collisions() {
        let g = grid(2);
        let mut lib = Library::new();
        let neg = Arc::new(builtin("neg", std::slice::from_ref(&g)).unwrap().unwrap());
        assert!(lib.insert(neg.clone()).is_err());
        lib.insert(Arc::new(neg.renamed("flip"))).unwrap();
        assert!(lib.insert(Arc::new(neg.renamed("flip"))).is_err());
        assert!(lib.insert(Arc::new(neg.renamed("sup"))).is_err());
        assert_eq!(lib.resolve("flip", &[]).unwrap().unwrap().name(), "flip");
    }
}
