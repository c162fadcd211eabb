//! The `contlogic` command line.
//!
//! Exit codes: 0 on success or a passing check, 1 when a check fails (the
//! output then carries a witness), 2 for usage and input errors.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::formula::connective::Connective;
use crate::formula::library::builtin;
use crate::formula::{parse::parse, Formula, Library, Signature};
use crate::io::{self, SpaceTable, SCHEMA_VERSION};
use crate::oracle::{self, FuzzConfig};
use crate::rational::{self, parse_rational, to_display, to_pq, Rational};
use crate::semantics::{self, Assignment, EvalResult, SemanticsError, Structure};
use crate::translate::TranslationContext;
use crate::valuespace::{coordinate_projection, Point};

#[derive(Debug, Parser)]
#[command(
    name = "contlogic",
    version,
    about = "Continuous logic workbench over finite structures"
)]
struct Cli {
    /// Print machine-readable JSON instead of tables.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse and type-check formulas.
    Parse(ParseArgs),
    /// Evaluate formulas in a structure.
    Eval(EvalArgs),
    /// Code formulas as real-valued formulas over the coordinate signature.
    Translate(TranslateArgs),
    /// Check a coded structure against the base theory.
    #[command(name = "check-t0")]
    CheckT0(CheckT0Args),
    /// Check the pseudo-distance axioms and moduli.
    #[command(name = "check-metric")]
    CheckMetric(StructureArg),
    /// Identify elements at distance zero.
    Quotient(QuotientArgs),
    /// Add a relation `d(f(x), y)` for a function given by its table.
    #[command(name = "encode-fn")]
    EncodeFn(EncodeArgs),
    /// Run the randomized coding oracle.
    Fuzz(FuzzArgs),
}

#[derive(Debug, Args)]
struct SourceArgs {
    /// Structure file; its signature is used for parsing.
    #[arg(long, conflicts_with = "signature")]
    structure: Option<PathBuf>,
    /// Signature file.
    #[arg(long)]
    signature: Option<PathBuf>,
    /// Connective library file.
    #[arg(long)]
    library: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct FormulaArgs {
    /// Formula text; may be repeated.
    #[arg(long = "formula")]
    formulas: Vec<String>,
    /// File with one formula per line; blank lines and `#` comments are skipped.
    #[arg(long)]
    formula_file: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ParseArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[command(flatten)]
    formulas: FormulaArgs,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[command(flatten)]
    formulas: FormulaArgs,
    /// Fix a free variable, as `x=a`; may be repeated.
    #[arg(long = "assign", value_name = "VAR=ELEMENT")]
    assign: Vec<String>,
    /// Also print the error bound of each value.
    #[arg(long)]
    bounds: bool,
}

#[derive(Debug, Args)]
struct TranslateArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[command(flatten)]
    formulas: FormulaArgs,
    /// Spacing of the grid the target symbols take values in.
    #[arg(long, default_value = "1/4", value_parser = rational_arg)]
    grid_step: Rational,
    /// Test function to code against, from the library or the builtins.
    #[arg(long)]
    theta: Option<String>,
    /// Refuse codes whose error budget exceeds this.
    #[arg(long, value_parser = rational_arg)]
    budget_cap: Option<Rational>,
    /// Check every code against direct evaluation in the structure.
    #[arg(long, requires = "structure")]
    verify: bool,
    /// Slack allowed on top of the error budget when verifying.
    #[arg(long, default_value = "0", value_parser = rational_arg)]
    tol: Rational,
    /// Write the transported structure to this file.
    #[arg(long, value_name = "PATH", requires = "structure")]
    emit_structure: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct StructureArg {
    /// Structure file.
    #[arg(long)]
    structure: PathBuf,
}

#[derive(Debug, Args)]
struct CheckT0Args {
    /// Coded structure file, as written by `translate --emit-structure`.
    #[arg(long)]
    structure: PathBuf,
    /// Largest distance allowed between a value and the source net.
    #[arg(long, default_value = "0", value_parser = rational_arg)]
    tol: Rational,
    /// On success, write the decoded source structure to this file.
    #[arg(long, value_name = "PATH")]
    decode: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct QuotientArgs {
    /// Structure file.
    #[arg(long)]
    structure: PathBuf,
    /// Write the quotient structure to this file.
    #[arg(long, value_name = "PATH")]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EncodeArgs {
    /// Structure file with a distance symbol.
    #[arg(long)]
    structure: PathBuf,
    /// Function file: `{"arity": n, "table": {"a,b": "c", ...}}`.
    #[arg(long)]
    function: PathBuf,
    /// Name of the new relation.
    #[arg(long)]
    name: String,
    /// Modulus of the function; computed from the table when omitted.
    #[arg(long, value_parser = rational_arg)]
    modulus: Option<Rational>,
    /// Write the extended structure to this file.
    #[arg(long, value_name = "PATH")]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct FuzzArgs {
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    /// Largest universe size.
    #[arg(long, default_value_t = 5)]
    universe: usize,
    #[arg(long, default_value_t = 3)]
    depth: usize,
    /// Largest value-space net.
    #[arg(long, default_value_t = 4)]
    net: usize,
    #[arg(long, default_value = "1/4", value_parser = rational_arg)]
    grid_step: Rational,
    #[arg(long, default_value = "0", value_parser = rational_arg)]
    tol: Rational,
    /// Draw grid-presented spaces with positive resolution.
    #[arg(long)]
    inexact: bool,
}

fn rational_arg(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

#[derive(Debug, thiserror::Error)]
#[error("{0}")]
struct InputError(String);

impl InputError {
    fn at(origin: impl std::fmt::Display, e: impl std::fmt::Display) -> Self {
        InputError(format!("{origin}: {e}"))
    }
}

impl From<io::IoError> for InputError {
    fn from(e: io::IoError) -> Self {
        InputError(e.to_string())
    }
}

/// Output of one command in both renderings.
struct Report {
    text: String,
    json: String,
    code: i32,
}

impl Report {
    fn new(command: &str, text: String, mut body: Value, passed: bool) -> Self {
        let obj = body.as_object_mut().expect("report bodies are objects");
        obj.insert("schema_version".into(), json!(SCHEMA_VERSION));
        obj.insert("command".into(), json!(command));
        let json = serde_json::to_string_pretty(&body).expect("json values serialize") + "\n";
        Report {
            text,
            json,
            code: if passed { 0 } else { 1 },
        }
    }
}

/// Run the command line `args` (program name first).
pub fn run<I, T>(args: I, out: &mut impl Write, err: &mut impl Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                2
            } else {
                let _ = write!(out, "{text}");
                0
            };
        }
    };
    let result = match &cli.command {
        Command::Parse(a) => cmd_parse(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Translate(a) => cmd_translate(a),
        Command::CheckT0(a) => cmd_check_t0(a),
        Command::CheckMetric(a) => cmd_check_metric(a),
        Command::Quotient(a) => cmd_quotient(a),
        Command::EncodeFn(a) => cmd_encode(a),
        Command::Fuzz(a) => cmd_fuzz(a, cli.json),
    };
    match result {
        Ok(r) => {
            let text = if cli.json { &r.json } else { &r.text };
            let _ = write!(out, "{text}");
            r.code
        }
        Err(e) => {
            if cli.json {
                let body = json!({"schema_version": SCHEMA_VERSION, "error": e.0});
                let _ = writeln!(out, "{}", serde_json::to_string_pretty(&body).expect("serializes"));
            }
            let _ = writeln!(err, "error: {}", e.0);
            2
        }
    }
}

fn read_file(path: &Path) -> Result<String, InputError> {
    std::fs::read_to_string(path).map_err(|e| InputError::at(path.display(), e))
}

fn write_file(path: &Path, value: &Value) -> Result<(), InputError> {
    let text = serde_json::to_string_pretty(value).expect("json values serialize") + "\n";
    std::fs::write(path, text).map_err(|e| InputError::at(path.display(), e))
}

fn origin(path: &Path) -> String {
    path.display().to_string()
}

fn load_structure(path: &Path) -> Result<(Structure, SpaceTable), InputError> {
    Ok(io::read_structure(&read_file(path)?, &origin(path))?)
}

struct Source {
    signature: Arc<Signature>,
    structure: Option<Structure>,
    library: Library,
}

fn load_source(a: &SourceArgs) -> Result<Source, InputError> {
    let (signature, structure, spaces) = match (&a.structure, &a.signature) {
        (Some(p), _) => {
            let (m, spaces) = load_structure(p)?;
            (Arc::clone(m.signature()), Some(m), spaces)
        }
        (None, Some(p)) => {
            let (sig, spaces) = io::read_signature(&read_file(p)?, &origin(p))?;
            (Arc::new(sig), None, spaces)
        }
        (None, None) => return Err(InputError("one of --structure or --signature is required".into())),
    };
    let library = match &a.library {
        Some(p) => io::read_library(&read_file(p)?, &origin(p), &spaces)?,
        None => Library::new(),
    };
    Ok(Source {
        signature,
        structure,
        library,
    })
}

fn load_formulas(a: &FormulaArgs, src: &Source) -> Result<Vec<Arc<Formula>>, InputError> {
    let mut texts: Vec<(String, String)> = a
        .formulas
        .iter()
        .enumerate()
        .map(|(i, f)| (format!("--formula #{}", i + 1), f.clone()))
        .collect();
    if let Some(p) = &a.formula_file {
        for (i, line) in read_file(p)?.lines().enumerate() {
            let t = line.trim();
            if !t.is_empty() && !t.starts_with('#') {
                texts.push((format!("{}:{}", p.display(), i + 1), t.to_string()));
            }
        }
    }
    if texts.is_empty() {
        return Err(InputError("no formulas given (use --formula or --formula-file)".into()));
    }
    texts
        .iter()
        .map(|(at, t)| parse(t, &src.signature, &src.library).map_err(|e| InputError::at(at, e)))
        .collect()
}

fn point_json(p: &Point) -> Value {
    match p.coords() {
        [x] => json!(to_pq(x)),
        cs => json!(cs.iter().map(to_pq).collect::<Vec<_>>()),
    }
}

fn value_json(r: &EvalResult) -> Value {
    match r.compact_set() {
        Some(k) => json!({"set": k.points().map(point_json).collect::<Vec<_>>()}),
        None => point_json(&r.value),
    }
}

fn require_structure(src: &Source) -> Result<&Structure, InputError> {
    src.structure
        .as_ref()
        .ok_or_else(|| InputError("this command needs --structure".into()))
}

fn cmd_parse(a: &ParseArgs) -> Result<Report, InputError> {
    let src = load_source(&a.source)?;
    let formulas = load_formulas(&a.formulas, &src)?;
    let mut text = String::new();
    let mut items = Vec::new();
    for phi in &formulas {
        let space = phi.value_space();
        let free: Vec<String> = phi.free_vars().into_iter().collect();
        let _ = writeln!(
            text,
            "{phi}\n  space {} (dimension {}, {} points)  free {{{}}}  depth {}  size {}",
            space.label(),
            space.dimension(),
            space.len(),
            free.join(", "),
            phi.depth(),
            phi.size()
        );
        items.push(json!({
            "formula": phi.to_string(),
            "space": space.label(),
            "dimension": space.dimension(),
            "net_size": space.len(),
            "free_vars": free,
            "depth": phi.depth(),
            "size": phi.size(),
        }));
    }
    Ok(Report::new("parse", text, json!({"formulas": items}), true))
}

fn parse_assignments(m: &Structure, raw: &[String]) -> Result<Assignment, InputError> {
    let mut asg = Assignment::new();
    for item in raw {
        let (v, e) = item
            .split_once('=')
            .ok_or_else(|| InputError(format!("--assign {item}: expected VAR=ELEMENT")))?;
        let idx = m
            .element(e.trim())
            .ok_or_else(|| InputError(format!("--assign {item}: unknown element `{}`", e.trim())))?;
        asg.insert(v.trim().to_string(), idx);
    }
    Ok(asg)
}

fn cmd_eval(a: &EvalArgs) -> Result<Report, InputError> {
    let src = load_source(&a.source)?;
    let m = require_structure(&src)?;
    let formulas = load_formulas(&a.formulas, &src)?;
    let fixed = parse_assignments(m, &a.assign)?;
    let single = formulas.len() == 1;
    let mut text = String::new();
    let mut items = Vec::new();
    for phi in &formulas {
        let open: Vec<String> = phi.free_vars().into_iter().filter(|v| !fixed.contains_key(v)).collect();
        if !single {
            let _ = writeln!(text, "{phi}");
        }
        let mut rows = Vec::new();
        for extra in oracle::assignments(&open, m.len()) {
            let mut asg: Assignment = fixed.clone();
            asg.extend(extra);
            let r = semantics::eval(m, phi, &asg).map_err(|e| InputError::at(phi, e))?;
            let shown: Vec<String> = phi
                .free_vars()
                .iter()
                .map(|v| format!("{v}={}", m.universe()[asg[v]]))
                .collect();
            let mut line = if shown.is_empty() {
                r.to_string()
            } else {
                format!("{}\t{r}", shown.join(", "))
            };
            if a.bounds {
                let _ = write!(line, "\t± {}", to_display(&r.error_bound));
            }
            let _ = writeln!(text, "{}{line}", if single { "" } else { "  " });
            let names: BTreeMap<&String, &String> = phi
                .free_vars()
                .iter()
                .filter_map(|v| asg.get_key_value(v))
                .map(|(v, &e)| (v, &m.universe()[e]))
                .collect();
            rows.push(json!({
                "assignment": names,
                "value": value_json(&r),
                "error_bound": to_pq(&r.error_bound),
            }));
        }
        items.push(json!({
            "formula": phi.to_string(),
            "space": phi.value_space().label(),
            "rows": rows,
        }));
    }
    Ok(Report::new("eval", text, json!({"formulas": items}), true))
}

fn resolve_theta(lib: &Library, name: &str, phi: &Formula) -> Result<Arc<Connective>, InputError> {
    let args = [Arc::clone(phi.value_space())];
    if let Some(c) = lib.resolve(name, &args).map_err(|e| InputError::at("--theta", e))? {
        return Ok(c);
    }
    match builtin(name, &args) {
        Some(r) => Ok(Arc::new(r.map_err(|e| InputError::at("--theta", e))?)),
        None => Err(InputError(format!("--theta: unknown connective `{name}`"))),
    }
}

fn cmd_translate(a: &TranslateArgs) -> Result<Report, InputError> {
    let src = load_source(&a.source)?;
    let formulas = if a.formulas.formulas.is_empty() && a.formulas.formula_file.is_none() {
        Vec::new()
    } else {
        load_formulas(&a.formulas, &src)?
    };
    let mut ctx = TranslationContext::new(Arc::clone(&src.signature), a.grid_step.clone())
        .map_err(|e| InputError::at("--grid-step", e))?;
    if let Some(cap) = &a.budget_cap {
        ctx = ctx.with_budget_cap(cap.clone());
    }
    let mut text = String::new();
    let _ = writeln!(text, "grid step {}", to_pq(ctx.grid_step()));
    let mut symbols = serde_json::Map::new();
    for (sym, targets) in ctx.components() {
        let space = &ctx.embeddings()[sym].source;
        let _ = writeln!(
            text,
            "{sym}: {} (dimension {}) -> {}",
            space.label(),
            space.dimension(),
            targets.join(", ")
        );
        symbols.insert(
            sym.clone(),
            json!({"space": space.label(), "dimension": space.dimension(), "targets": targets}),
        );
    }
    let mut passed = true;
    let mut items = Vec::new();
    for phi in &formulas {
        let _ = writeln!(text, "formula {phi}");
        let coords = ctx.coordinates(phi).map_err(|e| InputError::at(phi, e))?;
        let mut coord_items = Vec::new();
        for (i, c) in coords.iter().enumerate() {
            let _ = writeln!(text, "  coordinate {i} [budget {}]: {}", to_pq(&c.budget), c.formula);
            coord_items.push(json!({"formula": c.formula.to_string(), "budget": to_pq(&c.budget)}));
        }
        let mut item = json!({
            "source": phi.to_string(),
            "space": phi.value_space().label(),
            "coordinates": coord_items,
        });
        let thetas: Vec<Arc<Connective>> = match &a.theta {
            Some(name) => {
                let theta = resolve_theta(&src.library, name, phi)?;
                let c = ctx.code(phi, &theta).map_err(|e| InputError::at(phi, e))?;
                let _ = writeln!(
                    text,
                    "  code {} [budget {}]: {}",
                    theta.name(),
                    to_pq(&c.budget),
                    c.formula
                );
                item["code"] = json!({
                    "theta": theta.name(),
                    "formula": c.formula.to_string(),
                    "budget": to_pq(&c.budget),
                });
                vec![theta]
            }
            None => (0..phi.value_space().dimension())
                .map(|i| coordinate_projection(phi.value_space(), i))
                .collect(),
        };
        if a.verify {
            let m = require_structure(&src)?;
            let mut checks = Vec::new();
            for theta in &thetas {
                let check = oracle::verify_coding(&ctx, m, phi, theta, &a.tol).map_err(|e| InputError::at(phi, e))?;
                let ok = check.passed();
                passed &= ok;
                let _ = writeln!(
                    text,
                    "  verify {}: {} ({} assignments, max difference {}, budget {})",
                    check.theta,
                    if ok { "ok" } else { "FAILED" },
                    check.checked,
                    to_pq(&check.max_difference),
                    to_pq(&check.budget)
                );
                if let Some(w) = &check.mismatch {
                    let _ = writeln!(text, "    witness: {}", serde_json::to_string(w).expect("serializes"));
                }
                checks.push(serde_json::to_value(&check).expect("serializes"));
            }
            item["verification"] = json!(checks);
        }
        items.push(item);
    }
    let mut body = json!({
        "grid_step": to_pq(ctx.grid_step()),
        "symbols": symbols,
        "formulas": items,
    });
    if let Some(path) = &a.emit_structure {
        let m = require_structure(&src)?;
        let (n, snap) = ctx.transport_structure(m).map_err(|e| InputError::at("transport", e))?;
        write_file(path, &io::coded_structure_json(&ctx, &n))?;
        let _ = writeln!(
            text,
            "wrote {} (largest grid rounding {})",
            path.display(),
            to_pq(&snap)
        );
        body["transport"] = json!({"path": path.display().to_string(), "rounding": to_pq(&snap)});
    }
    Ok(Report::new("translate", text, body, passed))
}

fn cmd_check_t0(a: &CheckT0Args) -> Result<Report, InputError> {
    let (ctx, n) = io::read_coded_structure(&read_file(&a.structure)?, &origin(&a.structure))?;
    let violation = ctx
        .check_t0(&n, &a.tol)
        .map_err(|e| InputError::at(a.structure.display(), e))?;
    match violation {
        Some(v) => {
            let text = format!(
                "T0 violated: {}({}) = {} is at distance {} from the net (tolerance {})\n",
                v.symbol,
                v.tuple,
                v.point,
                to_display(&v.distance),
                to_display(&a.tol)
            );
            let body = json!({
                "passed": false,
                "tol": to_pq(&a.tol),
                "witness": {
                    "symbol": v.symbol,
                    "tuple": v.tuple,
                    "point": point_json(&v.point),
                    "distance": to_pq(&v.distance),
                },
            });
            Ok(Report::new("check-t0", text, body, false))
        }
        None => {
            let mut text = format!("T0 holds at tolerance {}\n", to_display(&a.tol));
            let mut body = json!({"passed": true, "tol": to_pq(&a.tol)});
            if let Some(path) = &a.decode {
                let m = ctx.decode(&n).map_err(|e| InputError::at("decode", e))?;
                write_file(path, &io::structure_json(&m))?;
                let _ = writeln!(text, "wrote {}", path.display());
                body["decoded"] = json!(path.display().to_string());
            }
            Ok(Report::new("check-t0", text, body, true))
        }
    }
}

fn metric_failure(command: &str, v: &semantics::MetricViolation) -> Report {
    let text = format!(
        "pseudo-distance axioms fail: {v}\nwitness: {}\n",
        v.witness().join(", ")
    );
    let body = json!({"passed": false, "violation": v.to_string(), "witness": v.witness()});
    Report::new(command, text, body, false)
}

fn cmd_check_metric(a: &StructureArg) -> Result<Report, InputError> {
    let (m, _) = load_structure(&a.structure)?;
    match semantics::check_pseudometric(&m).map_err(|e| InputError::at(a.structure.display(), e))? {
        Some(v) => Ok(metric_failure("check-metric", &v)),
        None => Ok(Report::new(
            "check-metric",
            "pseudo-distance axioms and moduli hold\n".into(),
            json!({"passed": true}),
            true,
        )),
    }
}

fn cmd_quotient(a: &QuotientArgs) -> Result<Report, InputError> {
    let (m, _) = load_structure(&a.structure)?;
    let q = match semantics::quotient(&m) {
        Ok(q) => q,
        Err(SemanticsError::NotPseudometric(v)) => return Ok(metric_failure("quotient", &v)),
        Err(SemanticsError::IllDefined { symbol, left, right }) => {
            let text = format!("`{symbol}` separates zero-distance tuples ({left}) and ({right})\n");
            let body = json!({
                "passed": false,
                "violation": text.trim_end(),
                "witness": {"symbol": symbol, "left": left, "right": right},
            });
            return Ok(Report::new("quotient", text, body, false));
        }
        Err(e) => return Err(InputError::at(a.structure.display(), e)),
    };
    let mut classes: Vec<Vec<String>> = vec![Vec::new(); q.structure.len()];
    for (i, &c) in q.class_of.iter().enumerate() {
        classes[c].push(m.universe()[i].clone());
    }
    let mut text = String::new();
    for (c, members) in classes.iter().enumerate() {
        let _ = writeln!(text, "{}: {{{}}}", q.structure.universe()[c], members.join(", "));
    }
    let mut body = json!({"passed": true, "classes": classes, "structure": io::structure_json(&q.structure)});
    if let Some(path) = &a.output {
        write_file(path, &io::structure_json(&q.structure))?;
        let _ = writeln!(text, "wrote {}", path.display());
        body["output"] = json!(path.display().to_string());
    }
    Ok(Report::new("quotient", text, body, true))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FunctionFile {
    arity: usize,
    table: BTreeMap<String, String>,
}

fn cmd_encode(a: &EncodeArgs) -> Result<Report, InputError> {
    let (m, _) = load_structure(&a.structure)?;
    let at = origin(&a.function);
    let file: FunctionFile = serde_json::from_str(&read_file(&a.function)?)
        .map_err(|e| InputError(format!("{at}: line {}, column {}: {e}", e.line(), e.column())))?;
    let mut table = BTreeMap::new();
    for (key, value) in &file.table {
        let args = m
            .parse_tuple(key)
            .map_err(|e| InputError(format!("{at}: at table.\"{key}\": {e}")))?;
        if args.len() != file.arity {
            return Err(InputError(format!(
                "{at}: at table.\"{key}\": expected {} argument(s)",
                file.arity
            )));
        }
        let v = m
            .element(value.trim())
            .ok_or_else(|| InputError(format!("{at}: at table.\"{key}\": unknown element `{value}`")))?;
        table.insert(args, v);
    }
    let enc = match semantics::encode_function(&m, &a.name, file.arity, &table, a.modulus.clone()) {
        Ok(enc) => enc,
        Err(SemanticsError::IllDefined { .. }) => {
            let text = format!("`{}` sends zero-distance arguments to distinct values\n", a.name);
            let body = json!({"passed": false, "violation": text.trim_end()});
            return Ok(Report::new("encode-fn", text, body, false));
        }
        Err(e) => return Err(InputError::at(&at, e)),
    };
    let mut text = format!(
        "{}: arity {}, function modulus {}, relation modulus {}\n",
        a.name,
        file.arity + 1,
        to_display(&enc.modulus),
        to_display(&(&enc.modulus + rational::one()))
    );
    let mut body = json!({
        "name": a.name,
        "modulus": to_pq(&enc.modulus),
        "passed": enc.violation.is_none(),
    });
    if let Some(v) = &enc.violation {
        let _ = writeln!(text, "function axioms fail: {v}");
        body["violation"] = json!(v.to_string());
    }
    if let Some(path) = &a.output {
        write_file(path, &io::structure_json(&enc.structure))?;
        let _ = writeln!(text, "wrote {}", path.display());
        body["output"] = json!(path.display().to_string());
    } else {
        body["structure"] = io::structure_json(&enc.structure);
    }
    Ok(Report::new("encode-fn", text, body, enc.violation.is_none()))
}

fn cmd_fuzz(a: &FuzzArgs, json_mode: bool) -> Result<Report, InputError> {
    let cfg = FuzzConfig {
        seed: a.seed,
        universe_size: a.universe,
        formula_depth: a.depth,
        net_size: a.net,
        trials: a.trials,
        tol: a.tol.clone(),
        grid_step: a.grid_step.clone(),
        exact: !a.inexact,
    };
    let report = oracle::fuzz(&cfg).map_err(|e| InputError::at("fuzz", e))?;
    let failures = report.failures();
    let mut lines = String::new();
    if json_mode {
        let header = json!({"schema_version": SCHEMA_VERSION, "command": "fuzz", "config": cfg});
        let _ = writeln!(lines, "{header}");
    }
    for r in &report.records {
        let _ = writeln!(lines, "{}", serde_json::to_string(r).expect("records serialize"));
    }
    let summary = json!({"summary": {"trials": report.records.len(), "failures": failures}});
    let _ = writeln!(lines, "{summary}");
    Ok(Report {
        text: lines.clone(),
        json: lines,
        code: if failures == 0 { 0 } else { 1 },
    })
}
