//! JSON exchange formats.  Polynomials are text (`"3/2*x^2-y"`), words use
//! the `"a . b"` syntax, module elements and vector fields are objects keyed
//! by generator label or variable name.  Output is canonical: words are
//! normalized, zero entries are dropped and keys are sorted, so that
//! parse, write, parse is the identity.
//!
//! Errors carry the JSON pointer of the offending value.

use std::collections::BTreeMap;

use num_traits::Zero;
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::chain::{Complex, Derivation, Generator, GradedBasis, Label, ModElt};
use crate::morphisms::{TaylorCoderivation, TaylorMorphism};
use crate::oid::{Modulus, OidStructure, Table};
use crate::pages::{Page, PageElement, SolveReport};
use crate::polyring::{MonomialOrder, OrderKind, Poly, Q, Ring};
use crate::symwords::SymWord;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{pointer}: {message}")]
pub struct IoError {
    pub pointer: String,
    pub message: String,
}

fn err(pointer: &str, message: impl Into<String>) -> IoError {
    IoError { pointer: if pointer.is_empty() { "/".into() } else { pointer.into() }, message: message.into() }
}

fn child(pointer: &str, key: &str) -> String {
    format!("{pointer}/{}", key.replace('~', "~0").replace('/', "~1"))
}

fn field<'a>(v: &'a Value, key: &str, at: &str) -> Result<&'a Value, IoError> {
    v.get(key).ok_or_else(|| err(at, format!("missing field `{key}`")))
}

fn object<'a>(v: &'a Value, at: &str) -> Result<&'a Map<String, Value>, IoError> {
    v.as_object().ok_or_else(|| err(at, "expected an object"))
}

fn array<'a>(v: &'a Value, at: &str) -> Result<&'a Vec<Value>, IoError> {
    v.as_array().ok_or_else(|| err(at, "expected an array"))
}

fn string<'a>(v: &'a Value, at: &str) -> Result<&'a str, IoError> {
    v.as_str().ok_or_else(|| err(at, "expected a string"))
}

fn integer(v: &Value, at: &str) -> Result<i64, IoError> {
    v.as_i64().ok_or_else(|| err(at, "expected an integer"))
}

/// Pretty JSON with a trailing newline.
pub fn to_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

pub fn parse_text(text: &str) -> Result<Value, IoError> {
    serde_json::from_str(text).map_err(|e| err("", format!("invalid JSON: {e}")))
}

pub fn poly_to_json(p: &Poly) -> Value {
    Value::String(p.to_string())
}

/// A polynomial given as text, as an integer, or as
/// `{"terms": [[[e1, e2, ...], "c"], ...]}`.
pub fn poly_from_json(v: &Value, ring: &Ring, at: &str) -> Result<Poly, IoError> {
    match v {
        Value::String(s) => Poly::parse(s, ring).map_err(|e| err(at, e.to_string())),
        Value::Number(n) => {
            let i = n.as_i64().ok_or_else(|| err(at, "numeric coefficients must be integers; use text for rationals"))?;
            Ok(Poly::int(ring, i))
        }
        Value::Object(o) => {
            let terms = array(o.get("terms").ok_or_else(|| err(at, "missing field `terms`"))?, &child(at, "terms"))?;
            let mut p = Poly::zero(ring);
            for (i, t) in terms.iter().enumerate() {
                let tp = child(&child(at, "terms"), &i.to_string());
                let pair = array(t, &tp)?;
                if pair.len() != 2 {
                    return Err(err(&tp, "expected [exponents, coefficient]"));
                }
                let exps = array(&pair[0], &child(&tp, "0"))?;
                if exps.len() != ring.nvars() {
                    return Err(err(&child(&tp, "0"), format!("expected {} exponents", ring.nvars())));
                }
                let e = exps
                    .iter()
                    .map(|x| x.as_u64().map(|u| u as u32).ok_or_else(|| err(&child(&tp, "0"), "exponents are naturals")))
                    .collect::<Result<_, _>>()?;
                let c = match &pair[1] {
                    Value::String(s) => s.trim().parse::<Q>().map_err(|_| err(&child(&tp, "1"), "bad rational"))?,
                    x => Q::from_integer(integer(x, &child(&tp, "1"))?.into()),
                };
                p.add_term(e, c);
            }
            Ok(p)
        }
        _ => Err(err(at, "expected a polynomial")),
    }
}

pub fn modelt_to_json(m: &ModElt, basis: &GradedBasis) -> Value {
    let mut o = Map::new();
    for (g, f) in m.iter() {
        o.insert(basis.name(g).to_string(), poly_to_json(f));
    }
    Value::Object(o)
}

pub fn modelt_from_json(v: &Value, basis: &GradedBasis, ring: &Ring, at: &str) -> Result<ModElt, IoError> {
    let mut m = ModElt::zero();
    for (k, x) in object(v, at)? {
        let p = child(at, k);
        let g = basis.find(k).ok_or_else(|| err(&p, format!("unknown generator `{k}`")))?;
        m.add_term(g, &poly_from_json(x, ring, &p)?);
    }
    Ok(m)
}

pub fn derivation_to_json(d: &Derivation, ring: &Ring) -> Value {
    let mut o = Map::new();
    for (a, f) in d.iter() {
        o.insert(ring.vars()[a].clone(), poly_to_json(f));
    }
    Value::Object(o)
}

pub fn derivation_from_json(v: &Value, ring: &Ring, at: &str) -> Result<Derivation, IoError> {
    let mut d = Derivation::zero();
    for (k, x) in object(v, at)? {
        let p = child(at, k);
        let a = ring.index_of(k).ok_or_else(|| err(&p, format!("unknown variable `{k}`")))?;
        d.add_term(a, &poly_from_json(x, ring, &p)?);
    }
    Ok(d)
}

fn generators_to_json(b: &GradedBasis) -> Value {
    Value::Array((0..b.len()).map(|g| json!({"label": b.name(g), "degree": b.degree(g)})).collect())
}

fn generators_from_json(v: &Value, at: &str) -> Result<GradedBasis, IoError> {
    let mut gens = Vec::new();
    for (i, g) in array(v, at)?.iter().enumerate() {
        let p = child(at, &i.to_string());
        let label_s = string(field(g, "label", &p)?, &child(&p, "label"))?;
        let label = Label::parse(label_s).map_err(|e| err(&child(&p, "label"), e.to_string()))?;
        let degree = integer(field(g, "degree", &p)?, &child(&p, "degree"))?;
        if degree >= 0 {
            return Err(err(&child(&p, "degree"), "generators live in negative degrees"));
        }
        gens.push(Generator { label, degree: degree as i32 });
    }
    GradedBasis::new(gens).map_err(|e| err(at, e.to_string()))
}

fn vars_from_json(v: &Value, at: &str) -> Result<Ring, IoError> {
    let vars = array(v, at)?
        .iter()
        .enumerate()
        .map(|(i, x)| string(x, &child(at, &i.to_string())).map(str::to_string))
        .collect::<Result<Vec<_>, _>>()?;
    let mut seen = std::collections::HashSet::new();
    for (i, name) in vars.iter().enumerate() {
        if !seen.insert(name) {
            return Err(err(&child(at, &i.to_string()), format!("duplicate variable `{name}`")));
        }
    }
    Ok(Ring::new(vars))
}

pub fn complex_to_json(c: &Complex) -> Value {
    let b = &c.basis;
    let mut d = Map::new();
    let mut pi = Map::new();
    for g in 0..b.len() {
        if !c.d[g].is_zero() {
            d.insert(b.name(g).to_string(), modelt_to_json(&c.d[g], b));
        }
        if !c.pi[g].is_zero() {
            pi.insert(b.name(g).to_string(), derivation_to_json(&c.pi[g], &c.ring));
        }
    }
    json!({
        "vars": c.ring.vars(),
        "generators": generators_to_json(b),
        "d": d,
        "pi": pi,
    })
}

pub fn complex_from_json(v: &Value, at: &str) -> Result<Complex, IoError> {
    let ring = vars_from_json(field(v, "vars", at)?, &child(at, "vars"))?;
    let basis = generators_from_json(field(v, "generators", at)?, &child(at, "generators"))?;
    let mut d = vec![ModElt::zero(); basis.len()];
    let mut pi = vec![Derivation::zero(); basis.len()];
    if let Some(dv) = v.get("d") {
        let dp = child(at, "d");
        for (k, x) in object(dv, &dp)? {
            let p = child(&dp, k);
            let g = basis.find(k).ok_or_else(|| err(&p, format!("unknown generator `{k}`")))?;
            let m = modelt_from_json(x, &basis, &ring, &p)?;
            if m.iter().any(|(h, _)| basis.degree(h) != basis.degree(g) + 1) {
                return Err(err(&p, "the differential raises degree by one"));
            }
            d[g] = m;
        }
    }
    if let Some(pv) = v.get("pi") {
        let pp = child(at, "pi");
        for (k, x) in object(pv, &pp)? {
            let p = child(&pp, k);
            let g = basis.find(k).ok_or_else(|| err(&p, format!("unknown generator `{k}`")))?;
            if basis.degree(g) != -1 {
                return Err(err(&p, "the hook is defined on degree -1 only"));
            }
            pi[g] = derivation_from_json(x, &ring, &p)?;
        }
    }
    Ok(Complex::new(ring, basis, d, pi))
}

/// Table entries keyed by word text.  Keys naming the same canonical word
/// must agree after the sign is applied; keys naming a vanishing word must
/// carry zero.
pub fn table_to_json(t: &Table, source: &GradedBasis, target: &GradedBasis) -> Value {
    let mut o = Map::new();
    for (w, m) in t.iter() {
        o.insert(w.display(source), modelt_to_json(m, target));
    }
    Value::Object(o)
}

fn word_key(k: &str, arity: usize, basis: &GradedBasis, at: &str) -> Result<Option<(SymWord, i32)>, IoError> {
    let parsed = SymWord::parse(k, basis).map_err(|e| err(at, e.to_string()))?;
    let n = k.split(" . ").count();
    if n != arity {
        return Err(err(at, format!("expected a word of {arity} letters")));
    }
    Ok(parsed)
}

fn keyed_entries<T: Clone + PartialEq>(
    v: &Value,
    arity: usize,
    basis: &GradedBasis,
    at: &str,
    mut value: impl FnMut(&Value, &str) -> Result<T, IoError>,
    is_zero: impl Fn(&T) -> bool,
    negate: impl Fn(&T) -> T,
) -> Result<BTreeMap<SymWord, T>, IoError> {
    let mut out: BTreeMap<SymWord, T> = BTreeMap::new();
    let mut origin: BTreeMap<SymWord, String> = BTreeMap::new();
    for (k, x) in object(v, at)? {
        let p = child(at, k);
        let val = value(x, &p)?;
        match word_key(k, arity, basis, &p)? {
            None => {
                if !is_zero(&val) {
                    return Err(err(&p, "word vanishes (repeated odd letter) but carries a nonzero value"));
                }
            }
            Some((w, s)) => {
                let val = if s < 0 { negate(&val) } else { val };
                if let Some(prev) = out.get(&w) {
                    if *prev != val {
                        return Err(err(&p, format!("conflicts with the entry `{}`", origin[&w])));
                    }
                    continue;
                }
                origin.insert(w.clone(), k.clone());
                if !is_zero(&val) {
                    out.insert(w, val);
                }
            }
        }
    }
    Ok(out)
}

pub fn table_from_json(
    v: &Value,
    arity: usize,
    degree: i32,
    source: &GradedBasis,
    target: &GradedBasis,
    ring: &Ring,
    at: &str,
) -> Result<Table, IoError> {
    let entries = keyed_entries(v, arity, source, at, |x, p| modelt_from_json(x, target, ring, p), |m| m.is_zero(), |m| m.neg())?;
    let mut t = Table::new(arity, degree);
    for (w, m) in entries {
        let want = w.degree(source) + degree;
        if m.iter().any(|(g, _)| target.degree(g) != want) {
            return Err(err(&child(at, &w.display(source)), format!("value must lie in degree {want}")));
        }
        t.insert(w, m);
    }
    Ok(t)
}

fn order_to_json(o: &MonomialOrder, ring: &Ring) -> Value {
    let kind = match o.kind {
        OrderKind::Lex => "lex",
        OrderKind::GrLex => "grlex",
    };
    let prec: Vec<&String> = o.precedence.iter().map(|&i| &ring.vars()[i]).collect();
    json!({"kind": kind, "precedence": prec})
}

pub fn order_kind(s: &str) -> Option<OrderKind> {
    match s {
        "lex" => Some(OrderKind::Lex),
        "grlex" => Some(OrderKind::GrLex),
        _ => None,
    }
}

fn order_from_json(v: &Value, ring: &Ring, at: &str) -> Result<MonomialOrder, IoError> {
    let kp = child(at, "kind");
    let kind = order_kind(string(field(v, "kind", at)?, &kp)?).ok_or_else(|| err(&kp, "expected `lex` or `grlex`"))?;
    match v.get("precedence") {
        None => Ok(MonomialOrder::natural(kind, ring)),
        Some(p) => {
            let pp = child(at, "precedence");
            let names = array(p, &pp)?
                .iter()
                .enumerate()
                .map(|(i, x)| string(x, &child(&pp, &i.to_string())))
                .collect::<Result<Vec<_>, _>>()?;
            MonomialOrder::by_names(kind, ring, &names).map_err(|e| err(&pp, e.to_string()))
        }
    }
}

pub fn structure_to_json(s: &OidStructure) -> Value {
    let b = s.basis();
    let mut rho = Map::new();
    for g in 0..b.len() {
        if !s.rho[g].is_zero() {
            rho.insert(b.name(g).to_string(), derivation_to_json(&s.rho[g], s.ring()));
        }
    }
    let mut brackets = Map::new();
    for (k, t) in &s.brackets {
        brackets.insert(k.to_string(), table_to_json(t, b, b));
    }
    let mut out = json!({
        "kind": "structure",
        "complex": complex_to_json(&s.complex),
        "rho": rho,
        "brackets": brackets,
        "max_arity": s.max_arity_stored,
    });
    if let Some(m) = &s.modulus {
        out["modulus"] = json!({"phi": poly_to_json(&m.phi), "order": order_to_json(&m.order, s.ring())});
    }
    out
}

pub fn structure_from_json(v: &Value) -> Result<OidStructure, IoError> {
    let complex = complex_from_json(field(v, "complex", "")?, "/complex")?;
    let ring = complex.ring.clone();
    let b = complex.basis.clone();
    let rho = match v.get("rho") {
        Some(r) => {
            let mut rho = vec![Derivation::zero(); b.len()];
            for (k, x) in object(r, "/rho")? {
                let p = child("/rho", k);
                let g = b.find(k).ok_or_else(|| err(&p, format!("unknown generator `{k}`")))?;
                if b.degree(g) != -1 {
                    return Err(err(&p, "the anchor is defined on degree -1 only"));
                }
                rho[g] = derivation_from_json(x, &ring, &p)?;
            }
            rho
        }
        None => complex.pi.clone(),
    };
    let mut brackets = BTreeMap::new();
    if let Some(bv) = v.get("brackets") {
        for (k, x) in object(bv, "/brackets")? {
            let p = child("/brackets", k);
            let arity: usize = k.parse().map_err(|_| err(&p, "bracket keys are arities"))?;
            if arity < 2 {
                return Err(err(&p, "brackets start at arity 2; l_1 is the differential"));
            }
            brackets.insert(arity, table_from_json(x, arity, 1, &b, &b, &ring, &p)?);
        }
    }
    let stored = brackets.keys().max().copied().unwrap_or(1);
    let max_arity_stored = match v.get("max_arity") {
        Some(m) => {
            let m = integer(m, "/max_arity")?;
            if m < stored as i64 || m < 1 {
                return Err(err("/max_arity", "smaller than the largest stored bracket"));
            }
            m as usize
        }
        None => stored,
    };
    let modulus = match v.get("modulus") {
        Some(m) => {
            let phi = poly_from_json(field(m, "phi", "/modulus")?, &ring, "/modulus/phi")?;
            let order = match m.get("order") {
                Some(o) => order_from_json(o, &ring, "/modulus/order")?,
                None => MonomialOrder::grlex(&ring),
            };
            Some(Modulus { phi, order })
        }
        None => None,
    };
    let s = OidStructure { complex, rho, brackets, max_arity_stored, modulus };
    s.validate().map_err(|e| err("", e.to_string()))?;
    Ok(s)
}

fn coeffs_to_json(coeffs: &BTreeMap<usize, Table>, source: &GradedBasis, target: &GradedBasis) -> Value {
    let mut o = Map::new();
    for (k, t) in coeffs {
        o.insert(k.to_string(), table_to_json(t, source, target));
    }
    Value::Object(o)
}

fn coeffs_from_json(
    v: &Value,
    degree: i32,
    source: &GradedBasis,
    target: &GradedBasis,
    ring: &Ring,
) -> Result<BTreeMap<usize, Table>, IoError> {
    let mut out = BTreeMap::new();
    for (k, x) in object(field(v, "coeffs", "")?, "/coeffs")? {
        let p = child("/coeffs", k);
        let idx: usize = k.parse().map_err(|_| err(&p, "coefficient keys are Taylor indices"))?;
        out.insert(idx, table_from_json(x, idx + 1, degree, source, target, ring, &p)?);
    }
    Ok(out)
}

/// A morphism file records both bases so that it can be read on its own.
pub fn morphism_to_json(phi: &TaylorMorphism, source: &GradedBasis, target: &GradedBasis, ring: &Ring) -> Value {
    json!({
        "kind": "morphism",
        "vars": ring.vars(),
        "source": generators_to_json(source),
        "target": generators_to_json(target),
        "coeffs": coeffs_to_json(&phi.coeffs, source, target),
    })
}

pub fn morphism_from_json(v: &Value, source: &GradedBasis, target: &GradedBasis, ring: &Ring) -> Result<TaylorMorphism, IoError> {
    Ok(TaylorMorphism { coeffs: coeffs_from_json(v, 0, source, target, ring)? })
}

pub fn coderivation_to_json(h: &TaylorCoderivation, source: &GradedBasis, target: &GradedBasis, ring: &Ring) -> Value {
    json!({
        "kind": "coderivation",
        "degree": h.degree,
        "vars": ring.vars(),
        "source": generators_to_json(source),
        "target": generators_to_json(target),
        "coeffs": coeffs_to_json(&h.coeffs, source, target),
    })
}

pub fn coderivation_from_json(v: &Value, source: &GradedBasis, target: &GradedBasis, ring: &Ring) -> Result<TaylorCoderivation, IoError> {
    let degree = match v.get("degree") {
        Some(d) => integer(d, "/degree")? as i32,
        None => -1,
    };
    Ok(TaylorCoderivation { degree, coeffs: coeffs_from_json(v, degree, source, target, ring)? })
}

/// Bases and ring recorded in a morphism or coderivation file.
pub fn recorded_bases(v: &Value) -> Result<(Ring, GradedBasis, GradedBasis), IoError> {
    let ring = vars_from_json(field(v, "vars", "")?, "/vars")?;
    let s = generators_from_json(field(v, "source", "")?, "/source")?;
    let t = generators_from_json(field(v, "target", "")?, "/target")?;
    Ok((ring, s, t))
}

pub fn page_element_to_json(p: &PageElement, page: &Page<'_>) -> Value {
    let sb = &page.source.basis;
    let mut module = Map::new();
    for (w, m) in &p.module {
        module.insert(w.display(sb), modelt_to_json(m, &page.target.basis));
    }
    let mut last = Map::new();
    for (w, d) in &p.last {
        last.insert(w.display(sb), derivation_to_json(d, &page.target.ring));
    }
    json!({"arity": p.arity, "degree": p.degree, "module": module, "last": last})
}

pub fn page_element_from_json(v: &Value, page: &Page<'_>, at: &str) -> Result<PageElement, IoError> {
    let arity = integer(field(v, "arity", at)?, &child(at, "arity"))? as usize;
    let degree = integer(field(v, "degree", at)?, &child(at, "degree"))? as i32;
    let (sb, tb, ring) = (&page.source.basis, &page.target.basis, &page.target.ring);
    let mut p = PageElement::new(arity, degree);
    if let Some(m) = v.get("module") {
        let mp = child(at, "module");
        p.module = keyed_entries(m, arity, sb, &mp, |x, q| modelt_from_json(x, tb, ring, q), |m| m.is_zero(), |m| m.neg())?;
    }
    if let Some(l) = v.get("last") {
        let lp = child(at, "last");
        p.last = keyed_entries(
            l,
            arity,
            sb,
            &lp,
            |x, q| derivation_from_json(x, ring, q),
            |d| d.is_zero(),
            |d| d.map_coeffs(|c| -c),
        )?;
    }
    Ok(p)
}

pub fn report_to_json(arity: usize, r: &SolveReport, page: &Page<'_>) -> Value {
    json!({
        "arity": arity,
        "solved": r.solved,
        "failure": r.failure.as_ref().map(|f| f.to_string()),
        "certificate": page_element_to_json(&r.certificate, page),
        "residual": page_element_to_json(&r.residual, page),
    })
}

/// Semicolon separated polynomials.
pub fn parse_poly_list(text: &str, ring: &Ring) -> Result<Vec<Poly>, IoError> {
    text.split(';')
        .filter(|s| !s.trim().is_empty())
        .map(|s| Poly::parse(s, ring).map_err(|e| err("", format!("`{}`: {e}", s.trim()))))
        .collect()
}

/// Comma separated variable names.
pub fn parse_vars(text: &str) -> Result<Ring, IoError> {
    let vars: Vec<&str> = text.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    if vars.is_empty() {
        return Err(err("", "no variables given"));
    }
    vars_from_json(&json!(vars), "")
}

/// Rational from text such as `-3/2`.
pub fn parse_rational(text: &str) -> Option<Q> {
    let q: Q = text.trim().parse().ok()?;
    Some(if q.is_zero() { Q::zero() } else { q })
}
