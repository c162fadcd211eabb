//! JSON files for spaces, signatures, structures and connective libraries.
//!
//! Rationals are `"p/q"` strings (decimal strings and JSON numbers are also
//! read). Spaces are given inline or by name from a `spaces` table; the
//! name `K(X)` denotes the hyperspace of the named space `X`.
//!
//! ```text
//! space     {"label", "dimension", "net": [[q, ...], ...], "resolution": q}
//! signature {"spaces": {name: space}, "relations": {P: {"arity", "space"}},
//!            "distance": "d", "moduli": {P: q}}
//! structure {"signature": signature, "universe": [id], "interp": {P: {"a,b": [q, ...]}}}
//! library   {"spaces": {name: space}, "connectives": [{"name", "kind", ...}]}
//! coded     {"source": signature, "grid_step": q, "universe": [id], "interp": {P_i: ...}}
//! ```
//!
//! A coded structure is an `L^ℝ`-structure stored with the signature `L` it
//! codes, from which the target symbols `P_i` are rebuilt.
//!
//! Connective kinds: `table` (`domain`, `codomain`, `entries`: `[{"args",
//! "value"}]`, optional `lipschitz`), `composed` (`outer`, `inner` names of
//! earlier entries), and the primitives `const` (`value`), `proj`
//! (`index`), `affine` (`a`, `b`), `add`, `mul`, `max`, `min`, `clamp01`,
//! `neg`, each with `domain` and optional `codomain`.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{json, Value};

use crate::formula::connective::{primitive, Connective, Primitive};
use crate::formula::{Library, Relation, Signature};
use crate::hyperspace::hyper;
use crate::rational::{self, Rational};
use crate::semantics::Structure;
use crate::translate::TranslationContext;
use crate::valuespace::{Point, ValueSpace};

/// Version tag carried by every JSON document the CLI prints.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum IoError {
    #[error("{origin}: line {line}, column {column}: {message}")]
    Json {
        origin: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{origin}: at {path}: {message}")]
    Invalid {
        origin: String,
        path: String,
        message: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Q(Rational);

impl<'de> Deserialize<'de> for Q {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        rational::serde_pq::deserialize(d).map(Q)
    }
}

impl Serialize for Q {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        rational::serde_pq::serialize(&self.0, s)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpaceFile {
    label: String,
    dimension: usize,
    net: Vec<Vec<Q>>,
    #[serde(default)]
    resolution: Option<Q>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum SpaceRef {
    Name(String),
    Inline(SpaceFile),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum PointValue {
    Scalar(Q),
    Coords(Vec<Q>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RelationFile {
    arity: usize,
    space: SpaceRef,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct SignatureFile {
    #[serde(default)]
    spaces: BTreeMap<String, SpaceFile>,
    relations: BTreeMap<String, RelationFile>,
    #[serde(default)]
    distance: Option<String>,
    #[serde(default)]
    moduli: BTreeMap<String, Q>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct StructureFile {
    signature: SignatureFile,
    universe: Vec<String>,
    interp: BTreeMap<String, BTreeMap<String, PointValue>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct CodedFile {
    source: SignatureFile,
    grid_step: Q,
    universe: Vec<String>,
    interp: BTreeMap<String, BTreeMap<String, PointValue>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct EntryFile {
    args: Vec<PointValue>,
    value: PointValue,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConnectiveFile {
    name: String,
    kind: String,
    #[serde(default)]
    domain: Vec<SpaceRef>,
    #[serde(default)]
    codomain: Option<SpaceRef>,
    #[serde(default)]
    entries: Option<Vec<EntryFile>>,
    #[serde(default)]
    lipschitz: Option<Q>,
    #[serde(default)]
    outer: Option<String>,
    #[serde(default)]
    inner: Option<Vec<String>>,
    #[serde(default)]
    value: Option<Q>,
    #[serde(default)]
    index: Option<usize>,
    #[serde(default)]
    a: Option<Q>,
    #[serde(default)]
    b: Option<Q>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct LibraryFile {
    #[serde(default)]
    spaces: BTreeMap<String, SpaceFile>,
    connectives: Vec<ConnectiveFile>,
}

struct RawInterp<'a> {
    universe: &'a [String],
    interp: &'a BTreeMap<String, BTreeMap<String, PointValue>>,
}

struct Ctx<'a> {
    origin: &'a str,
}

impl Ctx<'_> {
    fn invalid(&self, path: impl Into<String>, message: impl ToString) -> IoError {
        IoError::Invalid {
            origin: self.origin.to_string(),
            path: path.into(),
            message: message.to_string(),
        }
    }

    fn parse<T: for<'de> Deserialize<'de>>(&self, text: &str) -> Result<T, IoError> {
        serde_json::from_str(text).map_err(|e| IoError::Json {
            origin: self.origin.to_string(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    fn point(&self, path: &str, v: &PointValue) -> Result<Point, IoError> {
        let coords = match v {
            PointValue::Scalar(q) => vec![q.0.clone()],
            PointValue::Coords(qs) => qs.iter().map(|q| q.0.clone()).collect(),
        };
        Point::new(coords).map_err(|e| self.invalid(path, e))
    }

    fn space(&self, path: &str, s: &SpaceFile) -> Result<Arc<ValueSpace>, IoError> {
        let net = s
            .net
            .iter()
            .enumerate()
            .map(|(i, p)| self.point(&format!("{path}.net[{i}]"), &PointValue::Coords(p.clone())))
            .collect::<Result<Vec<_>, _>>()?;
        let resolution = s.resolution.clone().map(|q| q.0).unwrap_or_else(rational::zero);
        ValueSpace::new(s.label.clone(), s.dimension, net, resolution)
            .map(Arc::new)
            .map_err(|e| self.invalid(path, e))
    }

    fn spaces(&self, path: &str, table: &BTreeMap<String, SpaceFile>, into: &mut SpaceTable) -> Result<(), IoError> {
        for (name, s) in table {
            let space = self.space(&format!("{path}.{name}"), s)?;
            match into.get(name) {
                Some(old) if **old == *space => {}
                Some(_) => {
                    return Err(self.invalid(format!("{path}.{name}"), "space name redefined with a different net"))
                }
                None => {
                    into.insert(name.clone(), space);
                }
            }
        }
        Ok(())
    }

    fn resolve(&self, path: &str, r: &SpaceRef, named: &SpaceTable) -> Result<Arc<ValueSpace>, IoError> {
        match r {
            SpaceRef::Inline(s) => self.space(path, s),
            SpaceRef::Name(n) => self.named(path, n, named),
        }
    }

    fn named(&self, path: &str, name: &str, named: &SpaceTable) -> Result<Arc<ValueSpace>, IoError> {
        if let Some(s) = named.get(name) {
            return Ok(Arc::clone(s));
        }
        if let Some(inner) = name.strip_prefix("K(").and_then(|r| r.strip_suffix(')')) {
            let base = self.named(path, inner, named)?;
            return hyper(&base).map_err(|e| self.invalid(path, e));
        }
        Err(self.invalid(path, format!("unknown space `{name}`")))
    }

    fn signature(&self, f: &SignatureFile, named: &mut SpaceTable) -> Result<Signature, IoError> {
        self.spaces("signature.spaces", &f.spaces, named)?;
        let mut relations = BTreeMap::new();
        for (name, r) in &f.relations {
            let path = format!("signature.relations.{name}");
            let space = self.resolve(&format!("{path}.space"), &r.space, named)?;
            relations.insert(name.clone(), Relation { arity: r.arity, space });
        }
        let moduli = f.moduli.iter().map(|(k, q)| (k.clone(), q.0.clone())).collect();
        Signature::new(relations, f.distance.clone(), moduli).map_err(|e| self.invalid("signature", e))
    }

    fn structure(&self, f: &StructureFile) -> Result<(Structure, SpaceTable), IoError> {
        let mut named = SpaceTable::new();
        let sig = Arc::new(self.signature(&f.signature, &mut named)?);
        let m = self.interpretation(sig, &f.universe, &f.interp)?;
        Ok((m, named))
    }

    fn interpretation(
        &self,
        sig: Arc<Signature>,
        universe: &[String],
        raw: &BTreeMap<String, BTreeMap<String, PointValue>>,
    ) -> Result<Structure, IoError> {
        let f = RawInterp { universe, interp: raw };
        let index: BTreeMap<&str, usize> = f.universe.iter().enumerate().map(|(i, e)| (e.as_str(), i)).collect();
        let mut interp = BTreeMap::new();
        for (symbol, table) in f.interp {
            let mut out = BTreeMap::new();
            for (key, v) in table {
                let path = format!("interp.{symbol}.\"{key}\"");
                let tuple = key
                    .split(',')
                    .map(|s| {
                        index
                            .get(s.trim())
                            .copied()
                            .ok_or_else(|| self.invalid(&path, format!("unknown element `{}`", s.trim())))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                if out.insert(tuple, self.point(&path, v)?).is_some() {
                    return Err(self.invalid(&path, "tuple given twice"));
                }
            }
            interp.insert(symbol.clone(), out);
        }
        Structure::new(sig, f.universe.to_vec(), interp).map_err(|e| self.invalid("interp", e))
    }

    fn library(&self, f: &LibraryFile, named: &mut SpaceTable) -> Result<Library, IoError> {
        self.spaces("spaces", &f.spaces, named)?;
        let mut lib = Library::new();
        for (i, c) in f.connectives.iter().enumerate() {
            let path = format!("connectives[{i}]");
            let conn = self.connective(&path, c, named, &lib)?;
            lib.insert(Arc::new(conn)).map_err(|e| self.invalid(&path, e))?;
        }
        Ok(lib)
    }

    fn connective(
        &self,
        path: &str,
        c: &ConnectiveFile,
        named: &SpaceTable,
        lib: &Library,
    ) -> Result<Connective, IoError> {
        let domain = c
            .domain
            .iter()
            .enumerate()
            .map(|(i, r)| self.resolve(&format!("{path}.domain[{i}]"), r, named))
            .collect::<Result<Vec<_>, _>>()?;
        let codomain = c
            .codomain
            .as_ref()
            .map(|r| self.resolve(&format!("{path}.codomain"), r, named))
            .transpose()?;
        let need = |field: &str, v: Option<&Q>| -> Result<Rational, IoError> {
            v.map(|q| q.0.clone())
                .ok_or_else(|| self.invalid(path, format!("kind `{}` needs `{field}`", c.kind)))
        };
        let prim = |kind: Primitive| {
            primitive(&c.name, &kind, domain.clone(), codomain.clone()).map_err(|e| self.invalid(path, e))
        };
        match c.kind.as_str() {
            "table" => {
                let codomain = codomain.ok_or_else(|| self.invalid(path, "tables need a `codomain`"))?;
                let entries = c
                    .entries
                    .as_ref()
                    .ok_or_else(|| self.invalid(path, "tables need `entries`"))?
                    .iter()
                    .enumerate()
                    .map(|(j, e)| {
                        let ep = format!("{path}.entries[{j}]");
                        let args = e
                            .args
                            .iter()
                            .map(|a| self.point(&ep, a))
                            .collect::<Result<Vec<_>, _>>()?;
                        Ok((args, self.point(&ep, &e.value)?))
                    })
                    .collect::<Result<Vec<_>, IoError>>()?;
                let built = match &c.lipschitz {
                    Some(l) => Connective::table(&c.name, domain, codomain, entries, l.0.clone()),
                    None => Connective::table_auto(&c.name, domain, codomain, entries),
                };
                built.map_err(|e| self.invalid(path, e))
            }
            "composed" => {
                let find = |n: &str| {
                    lib.get(n)
                        .cloned()
                        .ok_or_else(|| self.invalid(path, format!("`{n}` is not an earlier library entry")))
                };
                let outer = find(c.outer.as_deref().ok_or_else(|| self.invalid(path, "needs `outer`"))?)?;
                let inner = c
                    .inner
                    .as_ref()
                    .ok_or_else(|| self.invalid(path, "needs `inner`"))?
                    .iter()
                    .map(|n| find(n))
                    .collect::<Result<Vec<_>, _>>()?;
                Connective::compose(&c.name, outer, inner).map_err(|e| self.invalid(path, e))
            }
            "const" => prim(Primitive::Const(need("value", c.value.as_ref())?)),
            "proj" => prim(Primitive::Proj(
                c.index.ok_or_else(|| self.invalid(path, "kind `proj` needs `index`"))?,
            )),
            "affine" => prim(Primitive::Affine {
                a: need("a", c.a.as_ref())?,
                b: need("b", c.b.as_ref())?,
            }),
            "add" => prim(Primitive::Add),
            "mul" => prim(Primitive::Mul),
            "max" => prim(Primitive::Max),
            "min" => prim(Primitive::Min),
            "clamp01" => prim(Primitive::Clamp01),
            "neg" => prim(Primitive::Neg),
            other => Err(self.invalid(format!("{path}.kind"), format!("unknown connective kind `{other}`"))),
        }
    }
}

/// Named spaces available to later documents.
pub type SpaceTable = BTreeMap<String, Arc<ValueSpace>>;

pub fn read_space(text: &str, origin: &str) -> Result<ValueSpace, IoError> {
    let ctx = Ctx { origin };
    let f: SpaceFile = ctx.parse(text)?;
    ctx.space("space", &f).map(|s| (*s).clone())
}

/// A signature document; its named spaces are returned for later lookups.
pub fn read_signature(text: &str, origin: &str) -> Result<(Signature, SpaceTable), IoError> {
    let ctx = Ctx { origin };
    let f: SignatureFile = ctx.parse(text)?;
    let mut named = SpaceTable::new();
    let sig = ctx.signature(&f, &mut named)?;
    Ok((sig, named))
}

pub fn read_structure(text: &str, origin: &str) -> Result<(Structure, SpaceTable), IoError> {
    let ctx = Ctx { origin };
    let f: StructureFile = ctx.parse(text)?;
    ctx.structure(&f)
}

/// A coded structure together with the translation context it lives in.
pub fn read_coded_structure(text: &str, origin: &str) -> Result<(TranslationContext, Structure), IoError> {
    let ctx = Ctx { origin };
    let f: CodedFile = ctx.parse(text)?;
    let mut named = SpaceTable::new();
    let source = Arc::new(ctx.signature(&f.source, &mut named)?);
    let tc = TranslationContext::new(source, f.grid_step.0.clone()).map_err(|e| ctx.invalid("grid_step", e))?;
    let n = ctx.interpretation(Arc::clone(tc.target_signature()), &f.universe, &f.interp)?;
    Ok((tc, n))
}

/// A library document. Domains may name spaces from `spaces` (for example
/// those of the structure's signature) as well as the library's own.
pub fn read_library(text: &str, origin: &str, spaces: &SpaceTable) -> Result<Library, IoError> {
    let ctx = Ctx { origin };
    let f: LibraryFile = ctx.parse(text)?;
    let mut named = spaces.clone();
    ctx.library(&f, &mut named)
}

fn point_json(p: &Point) -> Value {
    Value::Array(p.coords().iter().map(|c| Value::String(rational::to_pq(c))).collect())
}

pub fn space_json(s: &ValueSpace) -> Value {
    json!({
        "label": s.label(),
        "dimension": s.dimension(),
        "net": s.net().iter().map(point_json).collect::<Vec<_>>(),
        "resolution": rational::to_pq(s.resolution()),
    })
}

/// Spaces go into a `spaces` table keyed by label (suffixed on clashes);
/// hyperspaces are written as `K(name)` of their base.
pub fn signature_json(sig: &Signature) -> Value {
    let mut table: Vec<(String, Arc<ValueSpace>)> = Vec::new();
    fn name_of(s: &Arc<ValueSpace>, table: &mut Vec<(String, Arc<ValueSpace>)>) -> String {
        if let Some(base) = s.hyper_base() {
            return format!("K({})", name_of(base, table));
        }
        if let Some((n, _)) = table.iter().find(|(_, t)| t == s) {
            return n.clone();
        }
        let mut name = s.label().to_string();
        let mut k = 1;
        while table.iter().any(|(n, _)| *n == name) {
            k += 1;
            name = format!("{}#{k}", s.label());
        }
        table.push((name.clone(), Arc::clone(s)));
        name
    }
    let relations: serde_json::Map<String, Value> = sig
        .relations()
        .iter()
        .map(|(n, r)| {
            (
                n.clone(),
                json!({"arity": r.arity, "space": name_of(&r.space, &mut table)}),
            )
        })
        .collect();
    let spaces: serde_json::Map<String, Value> = table.iter().map(|(n, s)| (n.clone(), space_json(s))).collect();
    let mut out = json!({"spaces": spaces, "relations": relations});
    if let Some(d) = sig.distance_symbol() {
        out["distance"] = json!(d);
        out["moduli"] = sig
            .moduli()
            .iter()
            .map(|(k, v)| (k.clone(), Value::String(rational::to_pq(v))))
            .collect::<serde_json::Map<_, _>>()
            .into();
    }
    out
}

pub fn structure_json(m: &Structure) -> Value {
    let interp: serde_json::Map<String, Value> = m
        .interp()
        .iter()
        .map(|(name, table)| {
            let rows: serde_json::Map<String, Value> =
                table.iter().map(|(t, p)| (m.tuple_text(t), point_json(p))).collect();
            (name.clone(), Value::Object(rows))
        })
        .collect();
    json!({
        "signature": signature_json(m.signature()),
        "universe": m.universe(),
        "interp": interp,
    })
}

/// An `L^ℝ`-structure with the source signature and grid of `ctx`.
pub fn coded_structure_json(ctx: &TranslationContext, n: &Structure) -> Value {
    let full = structure_json(n);
    json!({
        "source": signature_json(ctx.source_signature()),
        "grid_step": rational::to_pq(ctx.grid_step()),
        "universe": full["universe"],
        "interp": full["interp"],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    const RUNNING: &str = r#"{
      "signature": {
        "spaces": {"I": {"label": "I", "dimension": 1, "net": [["0"], ["3/10"], ["4/5"], ["1"]]}},
        "relations": {"P": {"arity": 1, "space": "I"}}
      },
      "universe": ["a", "b"],
      "interp": {"P": {"a": ["3/10"], "b": "0.8"}}
    }"#;

    #[test]
    fn reads_structures() {
        let (m, named) = read_structure(RUNNING, "m.json").unwrap();
        assert_eq!(m.value("P", &[1]).unwrap(), &Point::scalar(rat(4, 5)).unwrap());
        assert!(named.contains_key("I"));
        let again = read_structure(&structure_json(&m).to_string(), "out").unwrap().0;
        assert_eq!(again, m);
    }

    #[test]
    fn coded_structures_round_trip() {
        let (m, _) = read_structure(RUNNING, "m.json").unwrap();
        let ctx = TranslationContext::new(Arc::clone(m.signature()), rat(1, 10)).unwrap();
        let (n, _) = ctx.transport_structure(&m).unwrap();
        let text = coded_structure_json(&ctx, &n).to_string();
        let (ctx2, n2) = read_coded_structure(&text, "n.json").unwrap();
        assert_eq!(n2, n);
        assert_eq!(ctx2.target_signature(), ctx.target_signature());
    }

    #[test]
    fn errors_carry_positions() {
        let e = read_structure("{\n  \"universe\": [,]\n}", "bad.json").unwrap_err();
        assert!(matches!(e, IoError::Json { line: 2, .. }), "{e}");
        let e = read_structure(&RUNNING.replace("\"b\": \"0.8\"", "\"c\": \"0.8\""), "m.json").unwrap_err();
        assert!(e.to_string().contains("interp.P.\"c\""), "{e}");
        let e = read_structure(&RUNNING.replace("\"b\": \"0.8\"", "\"b\": \"0.5\""), "m.json").unwrap_err();
        assert!(matches!(e, IoError::Invalid { .. }), "{e}");
    }

    #[test]
    fn reads_libraries() {
        let (m, named) = read_structure(RUNNING, "m.json").unwrap();
        let lib = read_library(
            r#"{"spaces": {"B": {"label": "B", "dimension": 1, "net": [["0"], ["1"]]}},
                "connectives": [
                  {"name": "flip", "kind": "neg", "domain": ["B"], "codomain": "B"},
                  {"name": "scale", "kind": "affine", "a": "1/2", "b": "0", "domain": ["I"]},
                  {"name": "top", "kind": "table", "domain": ["K(B)"], "codomain": "B",
                   "entries": [{"args": [["1", "0"]], "value": "0"},
                               {"args": [["0", "1"]], "value": "1"},
                               {"args": [["1", "1"]], "value": "1"}]},
                  {"name": "twice", "kind": "composed", "outer": "flip", "inner": ["flip"]}]}"#,
            "lib.json",
            &named,
        )
        .unwrap();
        assert_eq!(lib.len(), 4);
        let one = Point::scalar(rat(1, 1)).unwrap();
        assert_eq!(
            lib.get("twice")
                .unwrap()
                .apply(std::slice::from_ref(&one))
                .unwrap()
                .point,
            one
        );
        let f = crate::formula::parse("scale(P(x))", m.signature(), &lib).unwrap();
        assert_eq!(f.value_space().len(), 4);
        let e = read_library(r#"{"connectives": [{"name": "z", "kind": "zz"}]}"#, "lib.json", &named).unwrap_err();
        assert!(e.to_string().contains("connectives[0].kind"), "{e}");
    }
}
