//! Pages of O-multilinear maps `Sym^k E' -> E` together with the last column
//! `Sym^k E' -> A`, the total differential `D = d - (-1)^j delta`, a
//! closedness test, and an exact solver for `D(tau) = c`.
//!
//! A page element of degree `j` sends a word `W` to `E_{deg W + j}` while that
//! degree is negative and to a vector field when it is zero.  The horizontal
//! part of `D` is `d` (or `pi` on values of degree −1), the vertical part
//! precomposes with `d'` acting as a derivation on words.
//!
//! The solver chases source words by decreasing degree.  Each step is a lift
//! through `d` or `pi`, done by exact elimination on the weight slices of the
//! target complex.  Free variables are set to zero, so right-hand sides that
//! vanish lift to zero and the result is deterministic.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use num_traits::One;
use rayon::prelude::*;
use thiserror::Error;

use crate::chain::{homology_dims, outgoing_matrix, ChainError, Complex, Derivation, ModElt, Slice};
use crate::linalg::Elimination;
use crate::oid::{OidError, OidStructure, Table};
use crate::polyring::{exp_degree, Poly, Q};
use crate::symwords::{derive_word, words_of_arity, SymElt, SymWord};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PageError {
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error(transparent)]
    Oid(#[from] OidError),
    #[error("the complex has homology of rank {rank} in degree {degree}, weight {weight}")]
    NotExact { degree: i32, weight: i64, rank: usize },
    #[error("the supplied bracket on [{word}] is not compatible with the hook")]
    HookIncompatible { word: String },
    #[error("[pi x, pi y] does not lift through pi at [{word}] (weight {weight})")]
    HookLift { word: String, weight: i64 },
    #[error("no solution for the bracket of arity {arity}: {failure}")]
    SolverFailed { arity: usize, failure: SolveFailure },
}

/// An element of a page: values on canonical source words, split between
/// module-valued entries and entries in the last column.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PageElement {
    pub arity: usize,
    pub degree: i32,
    pub module: BTreeMap<SymWord, ModElt>,
    pub last: BTreeMap<SymWord, Derivation>,
}

impl PageElement {
    pub fn new(arity: usize, degree: i32) -> PageElement {
        PageElement { arity, degree, module: BTreeMap::new(), last: BTreeMap::new() }
    }

    pub fn from_table(t: &Table) -> PageElement {
        let mut p = PageElement::new(t.arity, t.degree);
        for (w, m) in t.iter() {
            p.insert_module(w.clone(), m.clone());
        }
        p
    }

    /// The module-valued part as a table.
    pub fn to_table(&self) -> Table {
        let mut t = Table::new(self.arity, self.degree);
        for (w, m) in &self.module {
            t.insert(w.clone(), m.clone());
        }
        t
    }

    pub fn insert_module(&mut self, w: SymWord, m: ModElt) {
        if m.is_zero() {
            self.module.remove(&w);
        } else {
            self.module.insert(w, m);
        }
    }

    pub fn insert_last(&mut self, w: SymWord, d: Derivation) {
        if d.is_zero() {
            self.last.remove(&w);
        } else {
            self.last.insert(w, d);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.module.is_empty() && self.last.is_empty()
    }

    /// `self + c * other`.
    pub fn add_scaled(&self, c: &Q, other: &PageElement) -> PageElement {
        assert_eq!((self.arity, self.degree), (other.arity, other.degree));
        let mut out = self.clone();
        for (w, m) in &other.module {
            let mut v = out.module.get(w).cloned().unwrap_or_default();
            v.add_scaled(c, m);
            out.insert_module(w.clone(), v);
        }
        for (w, d) in &other.last {
            let mut v = out.last.get(w).cloned().unwrap_or_default();
            v.add_scaled(c, d);
            out.insert_last(w.clone(), v);
        }
        out
    }

    pub fn neg(&self) -> PageElement {
        PageElement::new(self.arity, self.degree).add_scaled(&-Q::one(), self)
    }

    /// `sum f_V tau(V)` over module-valued entries.
    pub fn apply_module(&self, x: &SymElt) -> ModElt {
        let mut out = ModElt::zero();
        for (v, f) in x.iter() {
            if let Some(m) = self.module.get(v) {
                out.add_mul(&Q::one(), f, m);
            }
        }
        out
    }

    /// `sum f_V tau(V)` over last-column entries.
    pub fn apply_last(&self, x: &SymElt) -> Derivation {
        let mut out = Derivation::zero();
        for (v, f) in x.iter() {
            if let Some(d) = self.last.get(v) {
                out.add_mul(&Q::one(), f, d);
            }
        }
        out
    }

    /// Target degrees touched, sorted; the last column counts as 0.
    pub fn columns(&self, page: &Page<'_>) -> Vec<i32> {
        let b = &page.source.basis;
        let mut cols: Vec<i32> = self.module.keys().map(|w| w.degree(b) + self.degree).collect();
        if !self.last.is_empty() {
            cols.push(0);
        }
        cols.sort_unstable();
        cols.dedup();
        cols
    }

    pub fn display(&self, page: &Page<'_>) -> String {
        let sb = &page.source.basis;
        let mut parts: Vec<String> = self
            .module
            .iter()
            .map(|(w, m)| format!("[{}] -> {}", w.display(sb), m.display(&page.target.basis)))
            .collect();
        parts.extend(self.last.iter().map(|(w, d)| format!("[{}] -> {}", w.display(sb), d.display(&page.target.ring))));
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join("\n")
        }
    }
}

/// Where `D(p)` fails to vanish.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ClosednessFailure {
    /// the value of degree −1 is not killed by `pi`
    Hook { word: SymWord, value: Derivation },
    /// `d p(W) != (-1)^j p(d' W)`
    Square { word: SymWord, value: ModElt },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolveFailure {
    NotClosed(Vec<ClosednessFailure>),
    WeightCapExceeded { word: String, weight: i64 },
    NoLift { word: String, weight: i64 },
    /// the right-hand side is nonzero in a column where the solution must vanish
    ColumnSupport { word: String, column: i32 },
}

impl std::fmt::Display for SolveFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SolveFailure::NotClosed(v) => write!(f, "right-hand side is not D-closed ({} failures)", v.len()),
            SolveFailure::WeightCapExceeded { word, weight } => {
                write!(f, "weight {weight} above the cap at [{word}]")
            }
            SolveFailure::NoLift { word, weight } => write!(f, "no lift at [{word}] in weight {weight}"),
            SolveFailure::ColumnSupport { word, column } => {
                write!(f, "nonzero right-hand side at [{word}] in forbidden column {column}")
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolveReport {
    pub solved: bool,
    pub certificate: PageElement,
    /// `c - D(certificate)`, recomputed after the chase
    pub residual: PageElement,
    pub failure: Option<SolveFailure>,
}

/// Maps out of symmetric powers of `source` into `target`.
#[derive(Clone, Copy, Debug)]
pub struct Page<'a> {
    pub source: &'a Complex,
    pub target: &'a Complex,
}

impl<'a> Page<'a> {
    pub fn new(source: &'a Complex, target: &'a Complex) -> Page<'a> {
        Page { source, target }
    }

    pub fn endo(c: &'a Complex) -> Page<'a> {
        Page { source: c, target: c }
    }

    fn vertical(&self, w: &SymWord) -> SymElt {
        derive_word(&self.source.basis, w, |g| self.source.d[g].clone())
    }

    /// `D(p)` at one source word: module part and last-column part.
    pub fn total_d_at(&self, p: &PageElement, w: &SymWord) -> (ModElt, Derivation) {
        let t = w.degree(&self.source.basis) + p.degree;
        let sign = if p.degree % 2 == 0 { -Q::one() } else { Q::one() };
        let dw = self.vertical(w);
        let mut m = ModElt::zero();
        let mut a = Derivation::zero();
        if t + 1 <= -1 {
            if let Some(v) = p.module.get(w) {
                m = self.target.apply_d(v);
            }
            m.add_scaled(&sign, &p.apply_module(&dw));
        } else if t + 1 == 0 {
            if let Some(v) = p.module.get(w) {
                a = self.target.apply_pi(v);
            }
            a.add_scaled(&sign, &p.apply_last(&dw));
        }
        (m, a)
    }

    fn words(&self, arity: usize, max_degree: i32) -> Vec<SymWord> {
        let b = &self.source.basis;
        words_of_arity(b, arity).into_iter().filter(|w| w.degree(b) <= max_degree).collect()
    }

    pub fn total_d(&self, p: &PageElement) -> PageElement {
        let words = self.words(p.arity, -p.degree - 1);
        let values: Vec<(SymWord, ModElt, Derivation)> = words
            .into_par_iter()
            .map(|w| {
                let (m, a) = self.total_d_at(p, &w);
                (w, m, a)
            })
            .collect();
        let mut out = PageElement::new(p.arity, p.degree + 1);
        for (w, m, a) in values {
            out.insert_module(w.clone(), m);
            out.insert_last(w, a);
        }
        out
    }

    /// Empty iff `p` is D-closed.
    pub fn is_closed(&self, p: &PageElement) -> Vec<ClosednessFailure> {
        let dp = self.total_d(p);
        let mut out: Vec<ClosednessFailure> =
            dp.last.into_iter().map(|(word, value)| ClosednessFailure::Hook { word, value }).collect();
        out.extend(dp.module.into_iter().map(|(word, value)| ClosednessFailure::Square { word, value }));
        out
    }

    /// Solves `D(tau) = c` with `tau` supported in columns at most
    /// `-(min_column + 1)` and never in the last column.
    pub fn solve(&self, c: &PageElement, min_column: i32, weight_cap: i64) -> Result<SolveReport, PageError> {
        let j = c.degree - 1;
        let mut tau = PageElement::new(c.arity, j);
        let fail = |tau: PageElement, f: SolveFailure| SolveReport {
            solved: false,
            residual: c.add_scaled(&-Q::one(), &self.total_d(&tau)),
            certificate: tau,
            failure: Some(f),
        };
        let not_closed = self.is_closed(c);
        if !not_closed.is_empty() {
            return Ok(fail(tau, SolveFailure::NotClosed(not_closed)));
        }
        let lifter = Lifter::new(self.target, weight_cap)?;
        let sb = &self.source.basis;
        let mut by_degree: BTreeMap<i32, Vec<SymWord>> = BTreeMap::new();
        for w in self.words(c.arity, -j - 1) {
            by_degree.entry(w.degree(sb)).or_default().push(w);
        }
        let sign = if j % 2 == 0 { Q::one() } else { -Q::one() };
        for (deg, words) in by_degree.into_iter().rev() {
            let t = deg + j;
            let step: Vec<Result<(SymWord, ModElt), SolveFailure>> = words
                .into_par_iter()
                .map(|w| {
                    let name = || w.display(sb);
                    let lifted = if t == -1 {
                        let rhs = c.last.get(&w).cloned().unwrap_or_default();
                        if rhs.is_zero() {
                            return Ok((w, ModElt::zero()));
                        }
                        if t > -(min_column + 1) {
                            return Err(SolveFailure::ColumnSupport { word: name(), column: t });
                        }
                        lifter.lift_hook(&rhs)
                    } else {
                        let mut rhs = c.module.get(&w).cloned().unwrap_or_default();
                        rhs.add_scaled(&sign, &tau.apply_module(&self.vertical(&w)));
                        if rhs.is_zero() {
                            return Ok((w, ModElt::zero()));
                        }
                        if t > -(min_column + 1) {
                            return Err(SolveFailure::ColumnSupport { word: name(), column: t });
                        }
                        lifter.lift_module(t, &rhs)
                    };
                    match lifted {
                        Ok(m) => Ok((w, m)),
                        Err(LiftError::Cap(weight)) => Err(SolveFailure::WeightCapExceeded { word: name(), weight }),
                        Err(LiftError::NoLift(weight)) => Err(SolveFailure::NoLift { word: name(), weight }),
                    }
                })
                .collect();
            for r in step {
                match r {
                    Ok((w, m)) => tau.insert_module(w, m),
                    Err(f) => return Ok(fail(tau, f)),
                }
            }
        }
        let residual = c.add_scaled(&-Q::one(), &self.total_d(&tau));
        Ok(SolveReport { solved: residual.is_zero(), certificate: tau, residual, failure: None })
    }
}

enum LiftError {
    Cap(i64),
    NoLift(i64),
}

type Prepared = Arc<(Elimination, Slice, Slice)>;

/// Cached eliminations of `d` (or `pi`) per (source degree, weight).
struct Lifter<'a> {
    c: &'a Complex,
    weights: Vec<i64>,
    cap: i64,
    cache: Mutex<HashMap<(i32, i64), Prepared>>,
}

impl<'a> Lifter<'a> {
    fn new(c: &'a Complex, cap: i64) -> Result<Lifter<'a>, ChainError> {
        Ok(Lifter { c, weights: c.weights()?, cap, cache: Mutex::new(HashMap::new()) })
    }

    fn prepared(&self, t: i32, w: i64) -> Prepared {
        if let Some(p) = self.cache.lock().expect("cache lock").get(&(t, w)) {
            return p.clone();
        }
        let (m, src, dst) = outgoing_matrix(self.c, &self.weights, t, w);
        let p = Arc::new((Elimination::new(m), src, dst));
        self.cache.lock().expect("cache lock").insert((t, w), p.clone());
        p
    }

    fn solve(&self, t: i32, rhs: BTreeMap<i64, Vec<(usize, &crate::polyring::Exp, &Q)>>) -> Result<ModElt, LiftError> {
        let ring = &self.c.ring;
        let mut out = ModElt::zero();
        for (w, entries) in rhs {
            if w > self.cap {
                return Err(LiftError::Cap(w));
            }
            let prep = self.prepared(t, w);
            let (elim, src, dst) = (&prep.0, &prep.1, &prep.2);
            let mut b = BTreeMap::new();
            for (key, e, q) in entries {
                match dst.position(key, e) {
                    Some(row) => {
                        b.insert(row, q.clone());
                    }
                    None => return Err(LiftError::NoLift(w)),
                }
            }
            let x = elim.solve(&b).ok_or(LiftError::NoLift(w))?;
            for (col, q) in x {
                let (g, e) = &src.entries[col];
                out.add_term(*g, &Poly::monomial(ring, e.clone(), q));
            }
        }
        Ok(out)
    }

    /// `x` in degree `t` with `d x = rhs`.
    fn lift_module(&self, t: i32, rhs: &ModElt) -> Result<ModElt, LiftError> {
        let mut split: BTreeMap<i64, Vec<_>> = BTreeMap::new();
        for (g, f) in rhs.iter() {
            for (e, q) in f.terms() {
                split.entry(exp_degree(e) as i64 + self.weights[g]).or_default().push((g, e, q));
            }
        }
        self.solve(t, split)
    }

    /// `x` in degree −1 with `pi x = rhs`.
    fn lift_hook(&self, rhs: &Derivation) -> Result<ModElt, LiftError> {
        let mut split: BTreeMap<i64, Vec<_>> = BTreeMap::new();
        for (a, f) in rhs.iter() {
            for (e, q) in f.terms() {
                split.entry(exp_degree(e) as i64 - 1).or_default().push((a, e, q));
            }
        }
        self.solve(-1, split)
    }
}

/// `[pi x, pi y]` lifted through `pi` on every pair of degree −1 generators.
pub fn hook_brackets(c: &Complex, weight_cap: i64) -> Result<Table, PageError> {
    let lifter = Lifter::new(c, weight_cap)?;
    let e1 = c.basis.in_degree(-1);
    let mut t = Table::new(2, 1);
    for (i, &x) in e1.iter().enumerate() {
        for &y in &e1[i + 1..] {
            let rhs = c.pi[x].bracket(&c.pi[y]);
            let w = SymWord::from_sorted(&[x, y]);
            match lifter.lift_hook(&rhs) {
                Ok(m) => t.insert(w, m),
                Err(LiftError::Cap(weight) | LiftError::NoLift(weight)) => {
                    return Err(PageError::HookLift { word: w.display(&c.basis), weight })
                }
            }
        }
    }
    Ok(t)
}

/// Per-arity solver outcomes of a construction.
#[derive(Clone, Debug)]
pub struct ConstructionReport {
    pub steps: Vec<(usize, SolveReport)>,
}

fn jacobi_page(s: &OidStructure, n: usize) -> PageElement {
    let b = s.basis();
    let words: Vec<SymWord> = words_of_arity(b, n).into_iter().filter(|w| w.degree(b) <= -3).collect();
    let values: Vec<(SymWord, ModElt)> =
        words.into_par_iter().map(|w| (w.clone(), s.jacobi_on_word(w.factors()).neg())).collect();
    let mut c = PageElement::new(n, 2);
    for (w, m) in values {
        c.insert_module(w, m);
    }
    c
}

/// Brackets on an exact complex by successive lifts.  `u` prescribes `l_2`
/// on pairs of degree −1 generators; when absent it is obtained by lifting
/// `[pi x, pi y]`.  The binary bracket is corrected away from degree −1
/// pairs, then each `l_n` solves `D(l_n) = -J_n` where `J_n` is the higher
/// Jacobi expression computed without `l_n`.
pub fn construct_structure(
    c: &Complex,
    u: Option<&Table>,
    max_arity: usize,
    weight_cap: i64,
) -> Result<(OidStructure, ConstructionReport), PageError> {
    for ((degree, weight), rank) in homology_dims(c, weight_cap)? {
        if degree <= -1 && rank > 0 {
            return Err(PageError::NotExact { degree, weight, rank });
        }
    }
    let b = &c.basis;
    let seed = match u {
        Some(t) => {
            let mut seed = Table::new(2, 1);
            for (w, m) in t.iter() {
                if w.degree(b) == -2 {
                    seed.insert(w.clone(), m.clone());
                }
            }
            seed.check_degrees(b)?;
            seed
        }
        None => hook_brackets(c, weight_cap)?,
    };
    let mut s = OidStructure::new(c.clone(), max_arity);
    s.set_bracket(seed.clone());
    let page = Page::endo(c);
    let mut report = ConstructionReport { steps: Vec::new() };
    if max_arity < 2 {
        return Ok((s, report));
    }

    let mut c2 = jacobi_page(&s, 2);
    let e1 = b.in_degree(-1);
    for (i, &x) in e1.iter().enumerate() {
        for &y in &e1[i + 1..] {
            let w = SymWord::from_sorted(&[x, y]);
            let mut r = c.apply_pi(&seed.eval(b, &[x, y]));
            r.add_scaled(&-Q::one(), &c.pi[x].bracket(&c.pi[y]));
            if !r.is_zero() {
                if u.is_some() {
                    return Err(PageError::HookIncompatible { word: w.display(b) });
                }
                c2.insert_last(w, r.map_coeffs(|p| -p));
            }
        }
    }
    let rep = page.solve(&c2, 1, weight_cap)?;
    if !rep.solved {
        let failure = rep.failure.clone().unwrap_or(SolveFailure::NotClosed(Vec::new()));
        return Err(PageError::SolverFailed { arity: 2, failure });
    }
    s.set_bracket(seed.add_scaled(&Q::one(), &rep.certificate.to_table()));
    report.steps.push((2, rep));

    for n in 3..=max_arity {
        let cn = jacobi_page(&s, n);
        let rep = page.solve(&cn, 1, weight_cap)?;
        if !rep.solved {
            let failure = rep.failure.clone().unwrap_or(SolveFailure::NotClosed(Vec::new()));
            return Err(PageError::SolverFailed { arity: n, failure });
        }
        s.set_bracket(rep.certificate.to_table());
        report.steps.push((n, rep));
    }
    Ok((s, report))
}
