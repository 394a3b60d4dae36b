//! JSON documents under the `crystal-forge/1` schema. All numbers are exact
//! integers; valuations are written as rational strings such as `"3/40"`.

use num_rational::Ratio;
use serde_json::{json, Map, Value};

use crate::canonical::QuotientCrystal;
use crate::crystal::{DieudonneModule, FiltrationProfile};
use crate::error::{Error, Result};
use crate::exactring::{Context, Ctx, RingElem, Valuation};
use crate::filtration::AdequateFiltration;
use crate::invariants::{InvariantReport, Section};
use crate::report::ValidationReport;
use crate::semilinear::{Matrix, Submodule};

pub const SCHEMA: &str = "crystal-forge/1";

/// A JSON node together with its path, for error messages.
#[derive(Clone, Copy)]
struct Node<'a> {
    value: &'a Value,
    path: &'a str,
}

fn schema_err(path: &str, message: impl Into<String>) -> Error {
    Error::Schema { path: if path.is_empty() { "$".into() } else { path.into() }, message: message.into() }
}

impl<'a> Node<'a> {
    fn field<T>(&self, name: &str, f: impl FnOnce(Node<'_>) -> Result<T>) -> Result<T> {
        let path = format!("{}.{name}", self.path);
        let obj = self.value.as_object().ok_or_else(|| schema_err(self.path, "expected an object"))?;
        let value = obj.get(name).ok_or_else(|| schema_err(&path, "missing field"))?;
        f(Node { value, path: &path })
    }

    fn opt_field<T>(&self, name: &str, f: impl FnOnce(Node<'_>) -> Result<T>) -> Result<Option<T>> {
        match self.value.get(name) {
            None | Some(Value::Null) => Ok(None),
            Some(_) => self.field(name, f).map(Some),
        }
    }

    fn array<T>(&self, mut f: impl FnMut(Node<'_>) -> Result<T>) -> Result<Vec<T>> {
        let items = self.value.as_array().ok_or_else(|| schema_err(self.path, "expected an array"))?;
        items
            .iter()
            .enumerate()
            .map(|(k, value)| {
                let path = format!("{}[{k}]", self.path);
                f(Node { value, path: &path })
            })
            .collect()
    }

    fn u32(&self) -> Result<u32> {
        self.value
            .as_u64()
            .and_then(|x| u32::try_from(x).ok())
            .ok_or_else(|| schema_err(self.path, "expected a non-negative integer"))
    }

    fn usize(&self) -> Result<usize> {
        self.u32().map(|x| x as usize)
    }

    fn str(&self) -> Result<&'a str> {
        self.value.as_str().ok_or_else(|| schema_err(self.path, "expected a string"))
    }

    fn bool(&self) -> Result<bool> {
        self.value.as_bool().ok_or_else(|| schema_err(self.path, "expected a boolean"))
    }

    fn wrap<T>(&self, r: Result<T>) -> Result<T> {
        r.map_err(|e| match e {
            e @ Error::Schema { .. } => e,
            e => schema_err(self.path, e.to_string()),
        })
    }
}

fn root(value: &Value) -> Node<'_> {
    Node { value, path: "$" }
}

fn check_header(node: Node<'_>, kind: &str) -> Result<()> {
    let schema = node.field("schema", |n| n.str().map(str::to_owned))?;
    if schema != SCHEMA {
        return Err(schema_err("$.schema", format!("unsupported schema {schema:?}, expected {SCHEMA:?}")));
    }
    let found = node.field("kind", |n| n.str().map(str::to_owned))?;
    if found != kind {
        return Err(schema_err("$.kind", format!("expected a {kind:?} document, found {found:?}")));
    }
    Ok(())
}

fn header(kind: &str) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("schema".into(), json!(SCHEMA));
    m.insert("kind".into(), json!(kind));
    m
}

/// `"a/b"`, or `"a"` for integers.
pub fn ratio_string(r: Ratio<i64>) -> String {
    r.to_string()
}

pub fn context_to_json(ctx: &Ctx) -> Value {
    json!({"p": ctx.p(), "f": ctx.f(), "N": ctx.n(), "modulus": ctx.modulus()})
}

fn context_node(node: Node<'_>) -> Result<Ctx> {
    let p = node.field("p", |n| n.u32())?;
    let f = node.field("f", |n| n.u32())?;
    let n = node.field("N", |n| n.u32())?;
    let modulus = node.opt_field("modulus", |n| n.array(|c| c.u32()))?;
    node.wrap(Context::new(p, f, n, modulus))
}

pub fn context_from_json(value: &Value) -> Result<Ctx> {
    context_node(root(value))
}

pub fn elem_to_json(x: &RingElem) -> Value {
    let field = x.ctx().field();
    let terms: Vec<Value> = x
        .digits()
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(e, &c)| json!({"e": e, "c": field.coeffs(c)}))
        .collect();
    json!({"prec": x.prec(), "terms": terms})
}

fn elem_node(ctx: &Ctx, node: Node<'_>) -> Result<RingElem> {
    let prec = node.field("prec", |n| n.u32())?;
    if prec > ctx.n() {
        return Err(schema_err(node.path, format!("precision {prec} exceeds N = {}", ctx.n())));
    }
    let mut digits = vec![crate::exactring::FieldElem::ZERO; prec as usize];
    node.field("terms", |terms| {
        terms.array(|t| {
            let e = t.field("e", |n| n.u32())?;
            if e >= prec {
                return Err(schema_err(t.path, format!("exponent {e} not below precision {prec}")));
            }
            let coeffs = t.field("c", |n| n.array(|c| c.u32()))?;
            digits[e as usize] = t.wrap(ctx.field().from_coeffs(&coeffs))?;
            Ok(())
        })
    })?;
    node.wrap(RingElem::from_digits(ctx, digits))
}

pub fn elem_from_json(ctx: &Ctx, value: &Value) -> Result<RingElem> {
    elem_node(ctx, root(value))
}

/// Row-major array of rows.
pub fn matrix_to_json(m: &Matrix) -> Value {
    Value::Array(m.to_rows().iter().map(|row| Value::Array(row.iter().map(elem_to_json).collect())).collect())
}

fn matrix_node(ctx: &Ctx, node: Node<'_>) -> Result<Matrix> {
    let rows = node.array(|row| row.array(|e| elem_node(ctx, e)))?;
    node.wrap(Matrix::from_rows(ctx, rows))
}

pub fn matrix_from_json(ctx: &Ctx, value: &Value) -> Result<Matrix> {
    matrix_node(ctx, root(value))
}

fn matrices_to_json(ms: &[Matrix]) -> Value {
    Value::Array(ms.iter().map(matrix_to_json).collect())
}

fn matrices_node(ctx: &Ctx, node: Node<'_>) -> Result<Vec<Matrix>> {
    node.array(|m| matrix_node(ctx, m))
}

pub fn module_to_json(m: &DieudonneModule) -> Value {
    let f = m.f();
    let mut doc = header("module");
    doc.insert("context".into(), context_to_json(m.ctx()));
    doc.insert("d".into(), json!(m.d()));
    doc.insert("V".into(), matrices_to_json(&(0..f).map(|i| m.verschiebung(i).clone()).collect::<Vec<_>>()));
    doc.insert("F".into(), matrices_to_json(&(0..f).map(|i| m.frobenius(i).clone()).collect::<Vec<_>>()));
    doc.insert("hodge".into(), matrices_to_json(&(0..f).map(|i| m.hodge_basis(i)).collect::<Vec<_>>()));
    Value::Object(doc)
}

pub fn module_from_json(value: &Value) -> Result<DieudonneModule> {
    let node = root(value);
    check_header(node, "module")?;
    let ctx = node.field("context", context_node)?;
    let d = node.field("d", |n| n.array(|x| x.usize()))?;
    let v = node.field("V", |n| matrices_node(&ctx, n))?;
    let frob = node.field("F", |n| matrices_node(&ctx, n))?;
    let hodge = node.field("hodge", |n| matrices_node(&ctx, n))?;
    DieudonneModule::new(&ctx, d, v, frob, hodge)
}

fn submodule_to_json(s: &Submodule) -> Value {
    json!({
        "rank": s.rank(),
        "witness": matrix_to_json(s.witness()),
        "inverse": matrix_to_json(&s.witness_inverse()),
    })
}

fn submodule_node(ctx: &Ctx, node: Node<'_>) -> Result<Submodule> {
    let rank = node.field("rank", |n| n.usize())?;
    let witness = node.field("witness", |n| matrix_node(ctx, n))?;
    let inverse = node.field("inverse", |n| matrix_node(ctx, n))?;
    node.wrap(Submodule::from_witness_pair(witness, inverse, rank))
}

/// The pieces `F_i^[j]` for `j ∈ 0..=r+1`; the conjugate side is rebuilt
/// from the module on parsing.
pub fn filtration_to_json(m: &DieudonneModule, af: &AdequateFiltration) -> Value {
    let mut doc = header("filtration");
    doc.insert("context".into(), context_to_json(m.ctx()));
    doc.insert("d".into(), json!(m.d()));
    doc.insert("ambiguity".into(), json!(af.ambiguity()));
    let pieces: Vec<Value> =
        af.hodge_side().iter().map(|row| Value::Array(row.iter().map(submodule_to_json).collect())).collect();
    doc.insert("pieces".into(), Value::Array(pieces));
    let conj: Vec<Value> = (0..m.f())
        .map(|i| Value::Array((0..=af.profile().r + 1).map(|j| matrix_to_json(&af.conj_piece(i, j).basis())).collect()))
        .collect();
    doc.insert("conjugate_bases".into(), Value::Array(conj));
    Value::Object(doc)
}

pub fn filtration_from_json(m: &DieudonneModule, value: &Value) -> Result<AdequateFiltration> {
    let node = root(value);
    check_header(node, "filtration")?;
    let ctx = node.field("context", context_node)?;
    if !ctx.same(m.ctx()) {
        return Err(schema_err("$.context", "context differs from the module's"));
    }
    let d = node.field("d", |n| n.array(|x| x.usize()))?;
    if d != m.d() {
        return Err(schema_err("$.d", "type differs from the module's"));
    }
    let ambiguity = node.field("ambiguity", |n| n.u32())?;
    let side = node.field("pieces", |n| n.array(|row| row.array(|s| submodule_node(&ctx, s))))?;
    Ok(AdequateFiltration::from_hodge_side(m, side)?.with_ambiguity(ambiguity))
}

pub fn quotient_to_json(rank: usize, proj: &[Matrix]) -> Value {
    let mut doc = header("quotient");
    doc.insert("rank".into(), json!(rank));
    doc.insert("proj".into(), matrices_to_json(proj));
    Value::Object(doc)
}

/// Reads `{"rank": δ, "proj": [...]}`; the schema header is optional here.
pub fn quotient_from_json(ctx: &Ctx, value: &Value) -> Result<(usize, Vec<Matrix>)> {
    let node = root(value);
    if value.get("schema").is_some() {
        check_header(node, "quotient")?;
    }
    let rank = node.field("rank", |n| n.usize())?;
    let proj = node.field("proj", |n| matrices_node(ctx, n))?;
    Ok((rank, proj))
}

fn valuation_string(digits: u32, n: u32) -> String {
    Valuation::exact(digits, n).to_string()
}

fn section_to_json(s: &Section, n: u32) -> Value {
    json!({"value": elem_to_json(&s.value), "valuation": valuation_string(s.digits, n)})
}

fn section_node(ctx: &Ctx, node: Node<'_>) -> Result<Section> {
    let value = node.field("value", |n| elem_node(ctx, n))?;
    let digits = value.val_or_prec();
    let stated = node.field("valuation", |n| n.str().map(str::to_owned))?;
    if stated != valuation_string(digits, ctx.n()) {
        return Err(schema_err(node.path, format!("valuation {stated:?} disagrees with the value")));
    }
    Ok(Section { value, digits })
}

fn opt_grid_to_json(grid: &[Vec<Option<Section>>], n: u32) -> Value {
    Value::Array(
        grid.iter()
            .map(|row| {
                Value::Array(row.iter().map(|c| c.as_ref().map_or(Value::Null, |s| section_to_json(s, n))).collect())
            })
            .collect(),
    )
}

fn opt_grid_node(ctx: &Ctx, node: Node<'_>) -> Result<Vec<Vec<Option<Section>>>> {
    node.array(|row| {
        row.array(|c| match c.value {
            Value::Null => Ok(None),
            _ => section_node(ctx, c).map(Some),
        })
    })
}

pub fn invariants_to_json(ctx: &Ctx, rep: &InvariantReport) -> Value {
    let n = rep.n;
    let mut doc = header("invariants");
    doc.insert("context".into(), context_to_json(ctx));
    doc.insert(
        "profile".into(),
        json!({"h": rep.profile.h, "r": rep.profile.r, "delta": rep.profile.delta, "s": rep.profile.s}),
    );
    doc.insert(
        "h".into(),
        Value::Array(
            rep.h.iter().map(|row| Value::Array(row.iter().map(|s| section_to_json(s, n)).collect())).collect(),
        ),
    );
    doc.insert("m".into(), opt_grid_to_json(&rep.m, n));
    doc.insert("n".into(), opt_grid_to_json(&rep.n_sec, n));
    doc.insert(
        "ha".into(),
        Value::Array(rep.ha.iter().map(|c| c.as_ref().map_or(Value::Null, |s| section_to_json(s, n))).collect()),
    );
    doc.insert("ha_total".into(), json!(valuation_string(rep.ha_total(), n)));
    doc.insert("w".into(), json!(ratio_string(rep.w_total_ratio())));
    doc.insert("precision".into(), json!(valuation_string(rep.ambiguity, n)));
    doc.insert("ambiguity".into(), json!(rep.ambiguity));
    Value::Object(doc)
}

pub fn invariants_from_json(value: &Value) -> Result<(Ctx, InvariantReport)> {
    let node = root(value);
    check_header(node, "invariants")?;
    let ctx = node.field("context", context_node)?;
    let profile = node.field("profile", |p| {
        Ok(FiltrationProfile {
            h: p.field("h", |n| n.usize())?,
            r: p.field("r", |n| n.usize())?,
            delta: p.field("delta", |n| n.array(|x| x.usize()))?,
            s: p.field("s", |n| n.array(|x| x.usize()))?,
        })
    })?;
    let h = node.field("h", |n| n.array(|row| row.array(|c| section_node(&ctx, c))))?;
    let m = node.field("m", |n| opt_grid_node(&ctx, n))?;
    let n_sec = node.field("n", |n| opt_grid_node(&ctx, n))?;
    let ha = node.field("ha", |n| {
        n.array(|c| match c.value {
            Value::Null => Ok(None),
            _ => section_node(&ctx, c).map(Some),
        })
    })?;
    let ambiguity = node.field("ambiguity", |n| n.u32())?;
    let f = profile.f();
    let r = profile.r;
    let shape_ok = |g: usize, rows: &dyn Fn(usize) -> usize| g == f && (0..f).all(|i| rows(i) == r);
    if !shape_ok(h.len(), &|i| h[i].len())
        || !shape_ok(m.len(), &|i| m[i].len())
        || !shape_ok(n_sec.len(), &|i| n_sec[i].len())
        || ha.len() != f
    {
        return Err(schema_err("$", format!("grids must be {f} rows of {r} cells")));
    }
    let report = InvariantReport { n: ctx.n(), profile, h, m, n_sec, ha, ambiguity };
    Ok((ctx, report))
}

pub fn report_to_json(kind: &str, report: &ValidationReport) -> Value {
    let mut doc = header(kind);
    doc.insert("passed".into(), json!(report.all_passed()));
    doc.insert("checks".into(), serde_json::to_value(&report.checks).expect("checks serialize"));
    Value::Object(doc)
}

pub fn report_from_json(kind: &str, value: &Value) -> Result<ValidationReport> {
    let node = root(value);
    check_header(node, kind)?;
    let checks = node.field("checks", |n| {
        n.array(|c| {
            Ok(crate::report::Check {
                name: c.field("name", |x| x.str().map(str::to_owned))?,
                passed: c.field("passed", |x| x.bool())?,
                detail: c.opt_field("detail", |x| x.str().map(str::to_owned))?.unwrap_or_default(),
            })
        })
    })?;
    Ok(ValidationReport { checks })
}

/// Codegrees, `α` and the canonical predicates of a quotient, plus checks.
pub fn degree_report_to_json(q: &QuotientCrystal, checks: &ValidationReport) -> Value {
    let mut doc = header("degrees");
    doc.insert("level".into(), json!(q.level()));
    doc.insert("rank".into(), json!(q.rank()));
    doc.insert("codegrees".into(), json!(q.codegrees().into_iter().map(ratio_string).collect::<Vec<_>>()));
    doc.insert("alpha".into(), json!(ratio_string(q.alpha())));
    doc.insert("canonical".into(), json!(q.is_canonical()));
    doc.insert("strong_canonical".into(), json!(q.is_strong_canonical()));
    doc.insert("passed".into(), json!(checks.all_passed()));
    doc.insert("checks".into(), serde_json::to_value(&checks.checks).expect("checks serialize"));
    Value::Object(doc)
}

/// Pretty JSON with a trailing newline.
pub fn emit(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("JSON values serialize");
    s.push('\n');
    s
}

pub fn parse(text: &str) -> Result<Value> {
    Ok(serde_json::from_str(text)?)
}
