//! Sparse multivariate polynomials over the rationals.
//!
//! A [`Poly`] carries its [`Ring`] (the ordered variable list) and a map from
//! dense exponent vectors to nonzero rational coefficients.  Binary operations
//! between polynomials over different rings are errors; the operator impls
//! panic instead, and are meant for code that already knows the rings agree.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use smallvec::SmallVec;
use thiserror::Error;

/// Exact rational scalar.
pub type Q = BigRational;

/// Dense exponent vector, one entry per ring variable.
pub type Exp = SmallVec<[u32; 4]>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("variable lists differ: [{0}] vs [{1}]")]
    RingMismatch(String, String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("cannot parse polynomial `{input}` at offset {pos}: {msg}")]
    Parse { input: String, pos: usize, msg: String },
    #[error("division by the zero polynomial")]
    ZeroDivisor,
}

/// An ordered list of variable names.  Cheap to clone.
#[derive(Clone, Debug)]
pub struct Ring {
    vars: Arc<Vec<String>>,
}

impl PartialEq for Ring {
    fn eq(&self, other: &Ring) -> bool {
        Arc::ptr_eq(&self.vars, &other.vars) || self.vars == other.vars
    }
}

impl Eq for Ring {}

impl Ring {
    pub fn new<S: Into<String>>(vars: impl IntoIterator<Item = S>) -> Ring {
        Ring { vars: Arc::new(vars.into_iter().map(Into::into).collect()) }
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }

    pub fn var_index(&self, name: &str) -> Result<usize, PolyError> {
        self.index_of(name).ok_or_else(|| PolyError::UnknownVariable(name.to_string()))
    }

    /// The ring with one more variable appended.
    pub fn extend(&self, name: &str) -> Ring {
        let mut v = (*self.vars).clone();
        v.push(name.to_string());
        Ring::new(v)
    }

    pub fn zero_exp(&self) -> Exp {
        SmallVec::from_elem(0, self.nvars())
    }

    pub fn describe(&self) -> String {
        self.vars.join(",")
    }

    pub fn check(&self, other: &Ring) -> Result<(), PolyError> {
        if self == other {
            Ok(())
        } else {
            Err(PolyError::RingMismatch(self.describe(), other.describe()))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OrderKind {
    Lex,
    GrLex,
}

/// A monomial order: lexicographic or graded lexicographic, comparing
/// variables in the given precedence (first entry is the largest variable).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonomialOrder {
    pub kind: OrderKind,
    pub precedence: Vec<usize>,
}

impl MonomialOrder {
    pub fn new(kind: OrderKind, precedence: Vec<usize>) -> MonomialOrder {
        MonomialOrder { kind, precedence }
    }

    /// Variables compared in ring order.
    pub fn natural(kind: OrderKind, ring: &Ring) -> MonomialOrder {
        MonomialOrder { kind, precedence: (0..ring.nvars()).collect() }
    }

    pub fn grlex(ring: &Ring) -> MonomialOrder {
        Self::natural(OrderKind::GrLex, ring)
    }

    pub fn lex(ring: &Ring) -> MonomialOrder {
        Self::natural(OrderKind::Lex, ring)
    }

    /// Precedence given by variable names, largest first.
    pub fn by_names(kind: OrderKind, ring: &Ring, names: &[&str]) -> Result<MonomialOrder, PolyError> {
        let precedence = names.iter().map(|n| ring.var_index(n)).collect::<Result<Vec<_>, _>>()?;
        Ok(MonomialOrder { kind, precedence })
    }

    pub fn cmp(&self, a: &Exp, b: &Exp) -> Ordering {
        if self.kind == OrderKind::GrLex {
            let da: u64 = a.iter().map(|&e| e as u64).sum();
            let db: u64 = b.iter().map(|&e| e as u64).sum();
            match da.cmp(&db) {
                Ordering::Equal => {}
                o => return o,
            }
        }
        for &i in &self.precedence {
            match a[i].cmp(&b[i]) {
                Ordering::Equal => {}
                o => return o,
            }
        }
        Ordering::Equal
    }
}

/// All exponent vectors of total degree `weight` in `nvars` variables, in
/// descending lexicographic order (so `x^2, x*y, y^2` for two variables).
pub fn graded_piece_basis(nvars: usize, weight: u32) -> Vec<Exp> {
    fn rec(i: usize, left: u32, cur: &mut Exp, out: &mut Vec<Exp>) {
        if i + 1 == cur.len() {
            cur[i] = left;
            out.push(cur.clone());
            return;
        }
        for e in (0..=left).rev() {
            cur[i] = e;
            rec(i + 1, left - e, cur, out);
        }
    }
    let mut out = Vec::new();
    if nvars == 0 {
        if weight == 0 {
            out.push(Exp::new());
        }
        return out;
    }
    let mut cur: Exp = SmallVec::from_elem(0, nvars);
    rec(0, weight, &mut cur, &mut out);
    out
}

pub fn exp_degree(e: &Exp) -> u32 {
    e.iter().sum()
}

fn exp_add(a: &Exp, b: &Exp) -> Exp {
    a.iter().zip(b.iter()).map(|(x, y)| x + y).collect()
}

fn exp_divides(a: &Exp, b: &Exp) -> bool {
    a.iter().zip(b.iter()).all(|(x, y)| x <= y)
}

fn exp_sub(b: &Exp, a: &Exp) -> Exp {
    b.iter().zip(a.iter()).map(|(y, x)| y - x).collect()
}

/// Descending graded-lex comparison in ring order; used for display.
fn display_cmp(a: &Exp, b: &Exp) -> Ordering {
    let da = exp_degree(a);
    let db = exp_degree(b);
    db.cmp(&da).then_with(|| b.cmp(a))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly {
    ring: Ring,
    terms: BTreeMap<Exp, Q>,
}

impl Poly {
    pub fn zero(ring: &Ring) -> Poly {
        Poly { ring: ring.clone(), terms: BTreeMap::new() }
    }

    pub fn one(ring: &Ring) -> Poly {
        Poly::constant(ring, Q::one())
    }

    pub fn constant(ring: &Ring, c: Q) -> Poly {
        Poly::monomial(ring, ring.zero_exp(), c)
    }

    pub fn int(ring: &Ring, c: i64) -> Poly {
        Poly::constant(ring, Q::from_integer(BigInt::from(c)))
    }

    pub fn var(ring: &Ring, i: usize) -> Poly {
        let mut e = ring.zero_exp();
        e[i] = 1;
        Poly::monomial(ring, e, Q::one())
    }

    pub fn monomial(ring: &Ring, exp: Exp, c: Q) -> Poly {
        assert_eq!(exp.len(), ring.nvars(), "exponent length must match the ring");
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(exp, c);
        }
        Poly { ring: ring.clone(), terms }
    }

    pub fn from_terms(ring: &Ring, terms: impl IntoIterator<Item = (Exp, Q)>) -> Poly {
        let mut p = Poly::zero(ring);
        for (e, c) in terms {
            p.add_term(e, c);
        }
        p
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exp, &Q)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.constant_term().is_one()
    }

    pub fn constant_term(&self) -> Q {
        self.terms.get(&self.ring.zero_exp()).cloned().unwrap_or_else(Q::zero)
    }

    pub fn coeff(&self, e: &Exp) -> Q {
        self.terms.get(e).cloned().unwrap_or_else(Q::zero)
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(exp_degree).max()
    }

    /// `Some(h)` when every term has total degree `h`.
    pub fn homogeneous_degree(&self) -> Option<u32> {
        let mut it = self.terms.keys().map(exp_degree);
        let first = it.next()?;
        it.all(|d| d == first).then_some(first)
    }

    /// Homogeneous components keyed by total degree.
    pub fn split_by_degree(&self) -> BTreeMap<u32, Poly> {
        let mut out: BTreeMap<u32, Poly> = BTreeMap::new();
        for (e, c) in &self.terms {
            out.entry(exp_degree(e))
                .or_insert_with(|| Poly::zero(&self.ring))
                .terms
                .insert(e.clone(), c.clone());
        }
        out
    }

    pub fn add_term(&mut self, e: Exp, c: Q) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(e) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    /// `self += c * other`.
    pub fn add_scaled(&mut self, c: &Q, other: &Poly) {
        assert!(self.ring == other.ring, "ring mismatch in add_scaled");
        if c.is_zero() {
            return;
        }
        for (e, q) in &other.terms {
            self.add_term(e.clone(), q * c);
        }
    }

    /// `self += a * b`.
    pub fn add_product(&mut self, a: &Poly, b: &Poly) {
        assert!(self.ring == a.ring && a.ring == b.ring, "ring mismatch in add_product");
        for (ea, ca) in &a.terms {
            for (eb, cb) in &b.terms {
                self.add_term(exp_add(ea, eb), ca * cb);
            }
        }
    }

    pub fn scale(&self, c: &Q) -> Poly {
        let mut p = Poly::zero(&self.ring);
        p.add_scaled(c, self);
        p
    }

    pub fn scale_int(&self, c: i64) -> Poly {
        self.scale(&Q::from_integer(BigInt::from(c)))
    }

    pub fn checked_add(&self, other: &Poly) -> Result<Poly, PolyError> {
        self.ring.check(&other.ring)?;
        let mut p = self.clone();
        p.add_scaled(&Q::one(), other);
        Ok(p)
    }

    pub fn checked_sub(&self, other: &Poly) -> Result<Poly, PolyError> {
        self.ring.check(&other.ring)?;
        let mut p = self.clone();
        p.add_scaled(&-Q::one(), other);
        Ok(p)
    }

    pub fn checked_mul(&self, other: &Poly) -> Result<Poly, PolyError> {
        self.ring.check(&other.ring)?;
        let mut p = Poly::zero(&self.ring);
        p.add_product(self, other);
        Ok(p)
    }

    pub fn pow(&self, n: u32) -> Poly {
        let mut acc = Poly::one(&self.ring);
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Formal partial derivative with respect to variable `i`.
    pub fn partial(&self, i: usize) -> Poly {
        let mut p = Poly::zero(&self.ring);
        for (e, c) in &self.terms {
            if e[i] > 0 {
                let mut f = e.clone();
                f[i] -= 1;
                p.add_term(f, c * Q::from_integer(BigInt::from(e[i])));
            }
        }
        p
    }

    pub fn partial_by_name(&self, var: &str) -> Result<Poly, PolyError> {
        Ok(self.partial(self.ring.var_index(var)?))
    }

    /// Mixed partial derivative along the listed variables.
    pub fn partials(&self, vars: &[usize]) -> Poly {
        let mut p = self.clone();
        for &v in vars {
            if p.is_zero() {
                break;
            }
            p = p.partial(v);
        }
        p
    }

    /// The antiderivative in variable `i` vanishing at `x_i = 0`.
    pub fn integrate(&self, i: usize) -> Poly {
        let mut p = Poly::zero(&self.ring);
        for (e, c) in &self.terms {
            let mut f = e.clone();
            f[i] += 1;
            let k = Q::from_integer(BigInt::from(f[i]));
            p.add_term(f, c / k);
        }
        p
    }

    /// Replace variable `i` by the polynomial `q` (same ring).
    pub fn substitute(&self, i: usize, q: &Poly) -> Poly {
        assert!(self.ring == q.ring, "ring mismatch in substitute");
        let mut by_power: BTreeMap<u32, Poly> = BTreeMap::new();
        for (e, c) in &self.terms {
            let mut f = e.clone();
            let k = f[i];
            f[i] = 0;
            by_power.entry(k).or_insert_with(|| Poly::zero(&self.ring)).add_term(f, c.clone());
        }
        let mut out = Poly::zero(&self.ring);
        let mut qpow = Poly::one(&self.ring);
        let mut cur = 0;
        for (k, coeff) in by_power {
            while cur < k {
                qpow = &qpow * q;
                cur += 1;
            }
            out.add_product(&coeff, &qpow);
        }
        out
    }

    /// Set variable `i` to the constant `value` and drop it from the ring.
    pub fn specialize(&self, i: usize, value: &Q, target: &Ring) -> Poly {
        assert_eq!(target.nvars() + 1, self.ring.nvars());
        let mut out = Poly::zero(target);
        for (e, c) in &self.terms {
            let mut f: Exp = SmallVec::with_capacity(target.nvars());
            for (j, &x) in e.iter().enumerate() {
                if j != i {
                    f.push(x);
                }
            }
            let mut q = c.clone();
            for _ in 0..e[i] {
                q *= value;
            }
            out.add_term(f, q);
        }
        out
    }

    /// Re-express the polynomial over a ring whose variables include ours.
    pub fn embed(&self, target: &Ring) -> Result<Poly, PolyError> {
        if &self.ring == target {
            return Ok(self.clone());
        }
        let map = self.ring.vars().iter().map(|v| target.var_index(v)).collect::<Result<Vec<_>, _>>()?;
        let mut out = Poly::zero(target);
        for (e, c) in &self.terms {
            let mut f = target.zero_exp();
            for (j, &x) in e.iter().enumerate() {
                f[map[j]] = x;
            }
            out.add_term(f, c.clone());
        }
        Ok(out)
    }

    /// The map onto a smaller ring, provided the polynomial does not involve
    /// the dropped variables.
    pub fn project(&self, target: &Ring) -> Result<Poly, PolyError> {
        let map = target.vars().iter().map(|v| self.ring.var_index(v)).collect::<Result<Vec<_>, _>>()?;
        let mut out = Poly::zero(target);
        for (e, c) in &self.terms {
            let total: u32 = exp_degree(e);
            let f: Exp = map.iter().map(|&j| e[j]).collect();
            if exp_degree(&f) != total {
                return Err(PolyError::RingMismatch(self.ring.describe(), target.describe()));
            }
            out.add_term(f, c.clone());
        }
        Ok(out)
    }

    pub fn leading_term(&self, order: &MonomialOrder) -> Option<(&Exp, &Q)> {
        self.terms.iter().max_by(|a, b| order.cmp(a.0, b.0))
    }

    /// Quotient and remainder of division by `phi`.
    pub fn divide(&self, phi: &Poly, order: &MonomialOrder) -> Result<(Poly, Poly), PolyError> {
        self.ring.check(&phi.ring)?;
        let (lm, lc) = match phi.leading_term(order) {
            Some((e, c)) => (e.clone(), c.clone()),
            None => return Err(PolyError::ZeroDivisor),
        };
        let mut p = self.clone();
        let mut quot = Poly::zero(&self.ring);
        let mut rem = Poly::zero(&self.ring);
        while let Some((e, c)) = p.leading_term(order).map(|(e, c)| (e.clone(), c.clone())) {
            if exp_divides(&lm, &e) {
                let t = Poly::monomial(&self.ring, exp_sub(&e, &lm), &c / &lc);
                p.add_product(&-&t, phi);
                quot.add_scaled(&Q::one(), &t);
            } else {
                p.terms.remove(&e);
                rem.add_term(e, c);
            }
        }
        Ok((quot, rem))
    }

    /// Normal form modulo the principal ideal generated by `phi`.
    pub fn reduce_mod(&self, phi: &Poly, order: &MonomialOrder) -> Result<Poly, PolyError> {
        Ok(self.divide(phi, order)?.1)
    }

    pub fn parse(text: &str, ring: &Ring) -> Result<Poly, PolyError> {
        let mut p = Parser { src: text, bytes: text.as_bytes(), pos: 0, ring };
        let v = p.expr()?;
        p.skip_ws();
        if p.pos != p.bytes.len() {
            return Err(p.err("unexpected trailing input"));
        }
        Ok(v)
    }
}

impl<'a> Add<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        self.checked_add(rhs).expect("polynomial ring mismatch")
    }
}

impl<'a> Sub<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self.checked_sub(rhs).expect("polynomial ring mismatch")
    }
}

impl<'a> Mul<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        self.checked_mul(rhs).expect("polynomial ring mismatch")
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(&-Q::one())
    }
}

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}

pub fn format_rational(q: &Q) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut terms: Vec<_> = self.terms.iter().collect();
        terms.sort_by(|a, b| display_cmp(a.0, b.0));
        for (k, (e, c)) in terms.into_iter().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            if neg {
                write!(f, "-")?;
            } else if k > 0 {
                write!(f, "+")?;
            }
            let mut factors: Vec<String> = Vec::new();
            let is_const = e.iter().all(|&x| x == 0);
            if is_const || !a.is_one() {
                factors.push(format_rational(&a));
            }
            for (i, &x) in e.iter().enumerate() {
                match x {
                    0 => {}
                    1 => factors.push(self.ring.vars[i].clone()),
                    _ => factors.push(format!("{}^{}", self.ring.vars[i], x)),
                }
            }
            write!(f, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}

struct Parser<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
    ring: &'a Ring,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: &str) -> PolyError {
        PolyError::Parse { input: self.src.to_string(), pos: self.pos, msg: msg.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<Poly, PolyError> {
        let mut acc = self.term()?;
        while let Some(c) = self.peek() {
            match c {
                b'+' => {
                    self.pos += 1;
                    let t = self.term()?;
                    acc.add_scaled(&Q::one(), &t);
                }
                b'-' => {
                    self.pos += 1;
                    let t = self.term()?;
                    acc.add_scaled(&-Q::one(), &t);
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Poly, PolyError> {
        let mut acc = self.unary()?;
        while let Some(c) = self.peek() {
            match c {
                b'*' => {
                    self.pos += 1;
                    let u = self.unary()?;
                    acc = &acc * &u;
                }
                b'/' => {
                    self.pos += 1;
                    let n = self.number()?;
                    if n.is_zero() {
                        return Err(self.err("division by zero"));
                    }
                    acc = acc.scale(&(Q::one() / n));
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Poly, PolyError> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(-self.unary()?)
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Poly, PolyError> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let n = self.number()?;
            if !n.is_integer() || n.is_negative() {
                return Err(self.err("exponent must be a nonnegative integer"));
            }
            let k: u32 = n.numer().try_into().map_err(|_| self.err("exponent too large"))?;
            return Ok(base.pow(k));
        }
        Ok(base)
    }

    fn number(&mut self) -> Result<Q, PolyError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected a number"));
        }
        let n: BigInt = self.src[start..self.pos].parse().map_err(|_| self.err("bad integer"))?;
        Ok(Q::from_integer(n))
    }

    fn atom(&mut self) -> Result<Poly, PolyError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected `)`"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => Ok(Poly::constant(self.ring, self.number()?)),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self.pos < self.bytes.len()
                    && (self.bytes[self.pos].is_ascii_alphanumeric() || self.bytes[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let name = &self.src[start..self.pos];
                let i = self.ring.var_index(name)?;
                Ok(Poly::var(self.ring, i))
            }
            _ => Err(self.err("expected a number, variable or `(`")),
        }
    }
}
