//! Lie infinity-algebroid structures on a free complex: anchor, bracket
//! tables on basis words, evaluation, axiom checks, the
//! Richardson–Nijenhuis bracket, twists and restriction to a hypersurface.
//!
//! Brackets `l_k` have degree +1 and are graded symmetric in the degrees of
//! the basis.  `l_1` is the differential of the underlying complex, `l_k` for
//! `k >= 3` is O-multilinear and `l_2` obeys
//! `l_2(x, f y) = f l_2(x, y) + rho(x)[f] y`.

use std::collections::BTreeMap;

use num_traits::One;
use rayon::prelude::*;
use thiserror::Error;

use crate::chain::{ChainError, Complex, Derivation, GradedBasis, ModElt};
use crate::polyring::{MonomialOrder, Poly, PolyError, Q, Ring};
use crate::symwords::{koszul, signed_shuffles, words_of_arity, Factors, SymWord};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OidError {
    #[error("bracket of arity {requested} requested but only arities up to {stored} are stored")]
    ArityNotStored { requested: usize, stored: usize },
    #[error("bracket of arity {0} exceeds the configured cap {1}")]
    ArityOverflow(usize, usize),
    #[error("the ideal is not preserved by the anchor: rho({generator})[phi] = {value} is not a multiple of phi")]
    IdealNotInvariant { generator: String, value: String },
    #[error("table entry {word} of arity {arity} has the wrong degree")]
    DegreeMismatch { arity: usize, word: String },
    #[error("anchor given on generator {0} outside degree -1")]
    AnchorOutsideDegreeMinusOne(String),
    #[error("structure is already restricted modulo {0}")]
    AlreadyRestricted(String),
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// A principal ideal `<phi>` with the order used for normal forms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Modulus {
    pub phi: Poly,
    pub order: MonomialOrder,
}

impl Modulus {
    pub fn reduce(&self, p: &Poly) -> Poly {
        p.reduce_mod(&self.phi, &self.order).expect("modulus ring checked at restriction")
    }

    pub fn reduce_elt(&self, m: &ModElt) -> ModElt {
        m.map_coeffs(|p| self.reduce(p))
    }

    pub fn reduce_der(&self, d: &Derivation) -> Derivation {
        d.map_coeffs(|p| self.reduce(p))
    }
}

pub fn reduce_elt(modulus: Option<&Modulus>, m: ModElt) -> ModElt {
    match modulus {
        Some(md) => md.reduce_elt(&m),
        None => m,
    }
}

pub fn reduce_der(modulus: Option<&Modulus>, d: Derivation) -> Derivation {
    match modulus {
        Some(md) => md.reduce_der(&d),
        None => d,
    }
}

/// An O-multilinear graded symmetric map given by its values on canonical
/// basis words of one arity.  Output degree is word degree plus `degree`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Table {
    pub arity: usize,
    pub degree: i32,
    entries: BTreeMap<SymWord, ModElt>,
}

impl Table {
    pub fn new(arity: usize, degree: i32) -> Table {
        Table { arity, degree, entries: BTreeMap::new() }
    }

    /// Evaluates `f` on every canonical word of the arity, in parallel.
    pub fn from_fn(basis: &GradedBasis, arity: usize, degree: i32, f: impl Fn(&SymWord) -> ModElt + Sync) -> Table {
        let words = words_of_arity(basis, arity);
        let values: Vec<(SymWord, ModElt)> = words
            .into_par_iter()
            .filter_map(|w| {
                let v = f(&w);
                (!v.is_zero()).then_some((w, v))
            })
            .collect();
        Table { arity, degree, entries: values.into_iter().collect() }
    }

    pub fn insert(&mut self, w: SymWord, m: ModElt) {
        debug_assert_eq!(w.arity(), self.arity);
        if m.is_zero() {
            self.entries.remove(&w);
        } else {
            self.entries.insert(w, m);
        }
    }

    pub fn get(&self, w: &SymWord) -> Option<&ModElt> {
        self.entries.get(w)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&SymWord, &ModElt)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Value on an arbitrary tuple of generators.
    pub fn eval(&self, basis: &GradedBasis, raw: &[usize]) -> ModElt {
        match SymWord::normalize(basis, raw) {
            Some((w, s)) => match self.entries.get(&w) {
                Some(m) if s < 0 => m.neg(),
                Some(m) => m.clone(),
                None => ModElt::zero(),
            },
            None => ModElt::zero(),
        }
    }

    pub fn map_values(&self, mut f: impl FnMut(&SymWord, &ModElt) -> ModElt) -> Table {
        let mut t = Table::new(self.arity, self.degree);
        for (w, m) in self.iter() {
            t.insert(w.clone(), f(w, m));
        }
        t
    }

    pub fn scale(&self, c: &Q) -> Table {
        self.map_values(|_, m| m.scale(c))
    }

    /// `self + c * other`.
    pub fn add_scaled(&self, c: &Q, other: &Table) -> Table {
        assert_eq!(self.arity, other.arity);
        let mut t = self.clone();
        for (w, m) in other.iter() {
            let mut v = t.get(w).cloned().unwrap_or_default();
            v.add_scaled(c, m);
            t.insert(w.clone(), v);
        }
        t
    }

    /// Checks that every value sits in degree (word degree + `degree`).
    pub fn check_degrees(&self, basis: &GradedBasis) -> Result<(), OidError> {
        for (w, m) in self.iter() {
            let want = w.degree(basis) + self.degree;
            if m.iter().any(|(g, _)| basis.degree(g) != want) {
                return Err(OidError::DegreeMismatch { arity: self.arity, word: w.display(basis) });
            }
        }
        Ok(())
    }

    pub fn try_map_coeffs<E>(&self, mut f: impl FnMut(&Poly) -> Result<Poly, E>) -> Result<Table, E> {
        let mut t = Table::new(self.arity, self.degree);
        for (w, m) in self.iter() {
            t.insert(w.clone(), m.try_map_coeffs(&mut f)?);
        }
        Ok(t)
    }
}

/// The differential of a complex as an arity-1 table.
pub fn differential_table(c: &Complex) -> Table {
    let mut t = Table::new(1, 1);
    for g in 0..c.basis.len() {
        t.insert(SymWord::from_sorted(&[g]), c.d[g].clone());
    }
    t
}

/// `rho` on a module element (zero off degree −1).
pub fn apply_anchor(anchor: &[Derivation], m: &ModElt) -> Derivation {
    let mut out = Derivation::zero();
    for (g, f) in m.iter() {
        out.add_mul(&Q::one(), f, &anchor[g]);
    }
    out
}

/// `T(m, rest)` for an O-multilinear map `T` given on generator tuples, with
/// the module element `m` in the first slot.  With an anchor and two slots
/// the Leibniz correction `(-1)^(|h||z|) rho(z)[f] h` is added.
pub fn apply_first(
    basis: &GradedBasis,
    eval: impl Fn(&[usize]) -> ModElt,
    m: &ModElt,
    rest: &[usize],
    anchor: Option<&[Derivation]>,
) -> ModElt {
    let mut out = ModElt::zero();
    let mut raw: Factors = Factors::new();
    for (h, f) in m.iter() {
        raw.clear();
        raw.push(h);
        raw.extend_from_slice(rest);
        let v = eval(&raw);
        out.add_mul(&Q::one(), f, &v);
        if let (Some(rho), [z]) = (anchor, rest) {
            let df = rho[*z].apply(f);
            if !df.is_zero() {
                let c = Q::from_integer(koszul(basis.degree(h), basis.degree(*z)).into());
                out.add_term_scaled(h, &c, &df);
            }
        }
    }
    out
}

/// `(outer o inner)(x_1..x_n) = sum over (q, p-1)-shuffles of
/// eps * outer(inner(x_s1..x_sq), rest)`.
pub fn compose_tables(
    basis: &GradedBasis,
    outer: &Table,
    inner: &Table,
    anchor: Option<&[Derivation]>,
    modulus: Option<&Modulus>,
) -> Table {
    let n = outer.arity + inner.arity - 1;
    let anchor = if outer.arity == 2 { anchor } else { None };
    Table::from_fn(basis, n, outer.degree + inner.degree, |w| {
        let f = w.factors();
        let degrees = w.degrees(basis);
        let mut out = ModElt::zero();
        for (perm, sign) in signed_shuffles(&degrees, inner.arity) {
            let head: Factors = perm[..inner.arity].iter().map(|&p| f[p]).collect();
            let v = inner.eval(basis, &head);
            if v.is_zero() {
                continue;
            }
            let rest: Factors = perm[inner.arity..].iter().map(|&p| f[p]).collect();
            let r = apply_first(basis, |raw| outer.eval(basis, raw), &v, &rest, anchor);
            out.add_signed(sign, &r);
        }
        reduce_elt(modulus, out)
    })
}

/// `[A, B] = A o B - (-1)^(|A||B|) B o A`.
pub fn rn_bracket(
    basis: &GradedBasis,
    a: &Table,
    b: &Table,
    anchor: Option<&[Derivation]>,
    cap: usize,
) -> Result<Table, OidError> {
    let n = a.arity + b.arity - 1;
    if n > cap {
        return Err(OidError::ArityOverflow(n, cap));
    }
    let ab = compose_tables(basis, a, b, anchor, None);
    let ba = compose_tables(basis, b, a, anchor, None);
    let c = Q::from_integer((-koszul(a.degree, b.degree)).into());
    Ok(ab.add_scaled(&c, &ba))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ResidualKind {
    /// the higher Jacobi identity at this arity
    Jacobi,
    /// `rho(l_1 x) != 0` on degree −2
    AnchorOfDifferential,
    /// `pi(l_1 x) != 0` on degree −2
    HookOfDifferential,
    /// `rho(l_2(x, y)) != [rho x, rho y]`
    AnchorMorphism,
    /// `pi(l_2(x, y)) != [pi x, pi y]`
    HookMorphism,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ResidualValue {
    Module(ModElt),
    Vector(Derivation),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BracketResidual {
    pub arity: usize,
    pub word: SymWord,
    pub kind: ResidualKind,
    pub value: ResidualValue,
}

impl BracketResidual {
    pub fn describe(&self, s: &OidStructure) -> String {
        let v = match &self.value {
            ResidualValue::Module(m) => m.display(&s.complex.basis),
            ResidualValue::Vector(d) => d.display(&s.complex.ring),
        };
        format!("{:?} arity {} at [{}]: {}", self.kind, self.arity, self.word.display(&s.complex.basis), v)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OidStructure {
    pub complex: Complex,
    /// anchor per generator, zero off degree −1
    pub rho: Vec<Derivation>,
    /// `l_k` for `k >= 2`
    pub brackets: BTreeMap<usize, Table>,
    pub max_arity_stored: usize,
    pub modulus: Option<Modulus>,
}

pub const DEFAULT_MAX_ARITY: usize = 4;

impl OidStructure {
    /// A structure with anchor equal to the hook and no higher brackets.
    pub fn new(complex: Complex, max_arity_stored: usize) -> OidStructure {
        let rho = complex.pi.clone();
        OidStructure { complex, rho, brackets: BTreeMap::new(), max_arity_stored, modulus: None }
    }

    pub fn ring(&self) -> &Ring {
        &self.complex.ring
    }

    pub fn basis(&self) -> &GradedBasis {
        &self.complex.basis
    }

    pub fn set_bracket(&mut self, t: Table) {
        assert!(t.arity >= 2, "l_1 is the differential of the complex");
        self.max_arity_stored = self.max_arity_stored.max(t.arity);
        self.brackets.insert(t.arity, t);
    }

    pub fn bracket(&self, k: usize) -> Option<&Table> {
        self.brackets.get(&k)
    }

    /// `l_k` as a table, including `k = 1`.
    pub fn bracket_table(&self, k: usize) -> Table {
        match k {
            1 => differential_table(&self.complex),
            _ => self.brackets.get(&k).cloned().unwrap_or_else(|| Table::new(k, 1)),
        }
    }

    pub fn validate(&self) -> Result<(), OidError> {
        let b = self.basis();
        for (k, t) in &self.brackets {
            if t.degree != 1 || t.arity != *k {
                return Err(OidError::DegreeMismatch { arity: *k, word: String::new() });
            }
            if *k > self.max_arity_stored {
                return Err(OidError::ArityNotStored { requested: *k, stored: self.max_arity_stored });
            }
            t.check_degrees(b)?;
        }
        for g in 0..b.len() {
            if b.degree(g) != -1 && !self.rho[g].is_zero() {
                return Err(OidError::AnchorOutsideDegreeMinusOne(b.name(g).to_string()));
            }
        }
        Ok(())
    }

    fn reduce(&self, m: ModElt) -> ModElt {
        reduce_elt(self.modulus.as_ref(), m)
    }

    fn reduce_der(&self, d: Derivation) -> Derivation {
        reduce_der(self.modulus.as_ref(), d)
    }

    /// `l_k` on a tuple of generators (`k = raw.len()`).
    pub fn bracket_gens(&self, raw: &[usize]) -> ModElt {
        match raw.len() {
            1 => self.complex.d[raw[0]].clone(),
            k => match self.brackets.get(&k) {
                Some(t) => t.eval(self.basis(), raw),
                None => ModElt::zero(),
            },
        }
    }

    /// `l_{1+rest}(m, rest...)`, anchored when two slots.
    pub fn bracket_first(&self, m: &ModElt, rest: &[usize]) -> ModElt {
        if rest.is_empty() {
            return self.complex.apply_d(m);
        }
        apply_first(self.basis(), |raw| self.bracket_gens(raw), m, rest, Some(&self.rho))
    }

    pub fn apply_rho(&self, m: &ModElt) -> Derivation {
        apply_anchor(&self.rho, m)
    }

    /// `l_k(args)` extended from the basis tables, O-multilinear for `k != 2`
    /// and with the two-term Leibniz rule for `k = 2`.
    pub fn eval_bracket(&self, k: usize, args: &[ModElt]) -> Result<ModElt, OidError> {
        if k == 0 || k > self.max_arity_stored.max(1) || args.len() != k {
            return Err(OidError::ArityNotStored { requested: k, stored: self.max_arity_stored });
        }
        let b = self.basis();
        let mut out = ModElt::zero();
        if k == 2 {
            for (h, f) in args[0].iter() {
                for (g, q) in args[1].iter() {
                    let v = self.bracket_gens(&[h, g]);
                    out.add_mul(&Q::one(), &(f * q), &v);
                    // f rho(h)[q] g
                    let a = self.rho[h].apply(q);
                    if !a.is_zero() {
                        out.add_term(g, &(f * &a));
                    }
                    // (-1)^(|h||g|) q rho(g)[f] h
                    let c = self.rho[g].apply(f);
                    if !c.is_zero() {
                        let s = Q::from_integer(koszul(b.degree(h), b.degree(g)).into());
                        out.add_term_scaled(h, &s, &(q * &c));
                    }
                }
            }
            return Ok(self.reduce(out));
        }
        let ring = self.ring().clone();
        let mut stack: Vec<(Factors, Poly)> = vec![(Factors::new(), Poly::one(&ring))];
        for a in args {
            let mut next = Vec::new();
            for (raw, f) in &stack {
                for (g, q) in a.iter() {
                    let mut r = raw.clone();
                    r.push(g);
                    next.push((r, f * q));
                }
            }
            stack = next;
        }
        for (raw, f) in stack {
            out.add_mul(&Q::one(), &f, &self.bracket_gens(&raw));
        }
        Ok(self.reduce(out))
    }

    /// `sum_{i+j=n+1} sum_{(i,n-i)-shuffles} eps l_j(l_i(x_s..), rest)` on a
    /// tuple of generators.
    pub fn jacobi_on_word(&self, raw: &[usize]) -> ModElt {
        let b = self.basis();
        let n = raw.len();
        let degrees: Vec<i32> = raw.iter().map(|&g| b.degree(g)).collect();
        let mut out = ModElt::zero();
        for i in 1..=n {
            let j = n - i + 1;
            if (i >= 2 && !self.brackets.contains_key(&i)) || (j >= 2 && !self.brackets.contains_key(&j)) {
                continue;
            }
            for (perm, sign) in signed_shuffles(&degrees, i) {
                let head: Factors = perm[..i].iter().map(|&p| raw[p]).collect();
                let inner = self.bracket_gens(&head);
                if inner.is_zero() {
                    continue;
                }
                let rest: Factors = perm[i..].iter().map(|&p| raw[p]).collect();
                let outer = self.bracket_first(&inner, &rest);
                out.add_signed(sign, &outer);
            }
        }
        self.reduce(out)
    }

    /// All axiom residuals up to `max_arity`: higher Jacobi on words of
    /// degree at most −3, and on degree −2 the anchor and hook conditions.
    pub fn verify_axioms(&self, max_arity: usize) -> Result<Vec<BracketResidual>, OidError> {
        if max_arity > self.max_arity_stored.max(1) {
            return Err(OidError::ArityNotStored { requested: max_arity, stored: self.max_arity_stored });
        }
        let b = self.basis();
        let mut out = Vec::new();
        for n in 1..=max_arity {
            let words: Vec<SymWord> = words_of_arity(b, n).into_iter().filter(|w| w.degree(b) <= -3).collect();
            let mut found: Vec<BracketResidual> = words
                .into_par_iter()
                .filter_map(|w| {
                    let r = self.jacobi_on_word(w.factors());
                    (!r.is_zero()).then(|| BracketResidual {
                        arity: n,
                        word: w,
                        kind: ResidualKind::Jacobi,
                        value: ResidualValue::Module(r),
                    })
                })
                .collect();
            out.append(&mut found);
        }
        for &g in b.in_degree(-2) {
            let w = SymWord::from_sorted(&[g]);
            let r = self.reduce_der(self.apply_rho(&self.complex.d[g]));
            if !r.is_zero() {
                out.push(BracketResidual { arity: 1, word: w.clone(), kind: ResidualKind::AnchorOfDifferential, value: ResidualValue::Vector(r) });
            }
            let p = self.reduce_der(self.complex.apply_pi(&self.complex.d[g]));
            if !p.is_zero() {
                out.push(BracketResidual { arity: 1, word: w, kind: ResidualKind::HookOfDifferential, value: ResidualValue::Vector(p) });
            }
        }
        if max_arity >= 2 {
            let e1 = b.in_degree(-1);
            for (a, &x) in e1.iter().enumerate() {
                for &y in &e1[a + 1..] {
                    let w = SymWord::from_sorted(&[x, y]);
                    let l2 = self.bracket_gens(&[x, y]);
                    let mut r = self.apply_rho(&l2);
                    r.add_scaled(&-Q::one(), &self.rho[x].bracket(&self.rho[y]));
                    let r = self.reduce_der(r);
                    if !r.is_zero() {
                        out.push(BracketResidual { arity: 2, word: w.clone(), kind: ResidualKind::AnchorMorphism, value: ResidualValue::Vector(r) });
                    }
                    let pi = &self.complex.pi;
                    let mut p = self.complex.apply_pi(&l2);
                    p.add_scaled(&-Q::one(), &pi[x].bracket(&pi[y]));
                    let p = self.reduce_der(p);
                    if !p.is_zero() {
                        out.push(BracketResidual { arity: 2, word: w, kind: ResidualKind::HookMorphism, value: ResidualValue::Vector(p) });
                    }
                }
            }
        }
        Ok(out)
    }

    /// `Jac(x,y,z) = l2(l2(x,y),z) + (-1)^(|y||z|) l2(l2(x,z),y)
    /// + (-1)^(|x||y|+|x||z|) l2(l2(y,z),x)` on every arity-3 word.
    pub fn jacobiator(&self) -> Table {
        let b = self.basis();
        Table::from_fn(b, 3, 2, |w| {
            let f = w.factors();
            let (x, y, z) = (f[0], f[1], f[2]);
            let (dx, dy, dz) = (b.degree(x), b.degree(y), b.degree(z));
            let mut out = ModElt::zero();
            out.add_signed(1, &self.bracket_first(&self.bracket_gens(&[x, y]), &[z]));
            out.add_signed(koszul(dy, dz), &self.bracket_first(&self.bracket_gens(&[x, z]), &[y]));
            out.add_signed(koszul(dx, dy) * koszul(dx, dz), &self.bracket_first(&self.bracket_gens(&[y, z]), &[x]));
            self.reduce(out)
        })
    }

    /// The structure with brackets rescaled by a function `chi`:
    /// `l'_2(x,y) = chi l_2(x,y) + rho(x)[chi] y + (-1)^(|x||y|) rho(y)[chi] x`,
    /// `l'_k = chi^(k-1) l_k` for `k >= 3`, `rho' = chi rho`, `pi' = chi pi`.
    pub fn chi_twist(&self, chi: &Poly) -> Result<OidStructure, OidError> {
        self.ring().check(chi.ring())?;
        let b = self.basis();
        let modulus = self.modulus.as_ref();
        let red = |p: Poly| match modulus {
            Some(m) => m.reduce(&p),
            None => p,
        };
        let mut complex = self.complex.clone();
        complex.pi = complex.pi.iter().map(|p| reduce_der(modulus, p.mul_poly(chi))).collect();
        let rho: Vec<Derivation> = self.rho.iter().map(|r| reduce_der(modulus, r.mul_poly(chi))).collect();
        let mut brackets = BTreeMap::new();
        if self.max_arity_stored >= 2 {
            let l2 = self.bracket_table(2);
            let t = Table::from_fn(b, 2, 1, |w| {
                let f = w.factors();
                let (x, y) = (f[0], f[1]);
                let mut out = l2.get(w).map(|m| m.mul_poly(chi)).unwrap_or_default();
                out.add_term(y, &self.rho[x].apply(chi));
                let s = Q::from_integer(koszul(b.degree(x), b.degree(y)).into());
                out.add_term_scaled(x, &s, &self.rho[y].apply(chi));
                out.map_coeffs(|p| red(p.clone()))
            });
            brackets.insert(2, t);
        }
        for (&k, t) in &self.brackets {
            if k >= 3 {
                let factor = chi.pow(k as u32 - 1);
                brackets.insert(k, t.map_values(|_, m| m.mul_poly(&factor).map_coeffs(|p| red(p.clone()))));
            }
        }
        Ok(OidStructure {
            complex,
            rho,
            brackets,
            max_arity_stored: self.max_arity_stored,
            modulus: self.modulus.clone(),
        })
    }

    /// The structure over `O/<phi>`, provided `rho(x)[phi]` lies in `<phi>`.
    pub fn restrict_mod(&self, phi: &Poly, order: &MonomialOrder) -> Result<OidStructure, OidError> {
        self.ring().check(phi.ring())?;
        if let Some(m) = &self.modulus {
            return Err(OidError::AlreadyRestricted(m.phi.to_string()));
        }
        if phi.is_zero() {
            return Err(PolyError::ZeroDivisor.into());
        }
        let md = Modulus { phi: phi.clone(), order: order.clone() };
        for &g in self.basis().in_degree(-1) {
            let v = self.rho[g].apply(phi);
            let r = md.reduce(&v);
            if !r.is_zero() {
                return Err(OidError::IdealNotInvariant { generator: self.basis().name(g).to_string(), value: v.to_string() });
            }
        }
        let mut complex = self.complex.clone();
        complex.d = complex.d.iter().map(|m| md.reduce_elt(m)).collect();
        complex.pi = complex.pi.iter().map(|p| md.reduce_der(p)).collect();
        let rho = self.rho.iter().map(|p| md.reduce_der(p)).collect();
        let brackets = self.brackets.iter().map(|(&k, t)| (k, t.map_values(|_, m| md.reduce_elt(m)))).collect();
        Ok(OidStructure { complex, rho, brackets, max_arity_stored: self.max_arity_stored, modulus: Some(md) })
    }

    /// The same structure over a ring with extra variables.
    pub fn embed(&self, ring: &Ring) -> Result<OidStructure, OidError> {
        let e = |p: &Poly| p.embed(ring);
        let mut complex = self.complex.clone();
        complex.ring = ring.clone();
        complex.d = self.complex.d.iter().map(|m| m.try_map_coeffs(e)).collect::<Result<_, _>>()?;
        complex.pi = self.complex.pi.iter().map(|d| embed_derivation(d, &self.complex.ring, ring)).collect::<Result<_, _>>()?;
        let rho = self.rho.iter().map(|d| embed_derivation(d, &self.complex.ring, ring)).collect::<Result<_, _>>()?;
        let brackets = self.brackets.iter().map(|(&k, t)| Ok((k, t.try_map_coeffs(e)?))).collect::<Result<_, PolyError>>()?;
        let modulus = match &self.modulus {
            Some(m) => {
                let phi = m.phi.embed(ring)?;
                let names: Vec<&str> = m.order.precedence.iter().map(|&i| self.ring().vars()[i].as_str()).collect();
                let mut order = MonomialOrder::by_names(m.order.kind, ring, &names)?;
                for i in 0..ring.nvars() {
                    if !order.precedence.contains(&i) {
                        order.precedence.push(i);
                    }
                }
                Some(Modulus { phi, order })
            }
            None => None,
        };
        Ok(OidStructure { complex, rho, brackets, max_arity_stored: self.max_arity_stored, modulus })
    }
}

/// Re-index a derivation's variables into a larger ring.
pub fn embed_derivation(d: &Derivation, from: &Ring, to: &Ring) -> Result<Derivation, PolyError> {
    let mut out = Derivation::zero();
    for (a, f) in d.iter() {
        let b = to.var_index(&from.vars()[a])?;
        out.add_term(b, &f.embed(to)?);
    }
    Ok(out)
}

/// `true` when two tables agree on every word (missing entries are zero).
pub fn tables_equal(a: &Table, b: &Table) -> bool {
    a.arity == b.arity && a.iter().all(|(w, m)| b.get(w) == Some(m)) && b.iter().all(|(w, _)| a.get(w).is_some())
}
