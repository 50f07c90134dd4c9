//! Taylor morphisms between structures on free complexes.
//!
//! A morphism `Phi: E' -> E` is a family of O-multilinear degree 0 maps
//! `Phi^(k)` on words of `k + 1` letters.  The induced coalgebra map sends a
//! word to the sum over its set partitions of the products of the block
//! values, with the Koszul sign of listing the blocks in order.  Arities below
//! count letters, so "arity n" concerns `Phi^(n-1)`.
//!
//! Homotopies are polynomial in an extra ring variable `t` and are integrated
//! exactly, arity by arity.

use std::collections::BTreeMap;

use num_traits::One;
use rayon::prelude::*;
use thiserror::Error;

use crate::chain::{homology_dims, Derivation, GradedBasis, ModElt};
use crate::oid::{apply_first, reduce_der, reduce_elt, OidError, OidStructure, ResidualValue, Table};
use crate::pages::{Page, PageElement, PageError, SolveFailure, SolveReport};
use crate::polyring::{Poly, PolyError, Q, Ring};
use crate::symwords::{permutation_sign, set_partitions, signed_shuffles, words_of_arity, Factors, SymElt, SymWord};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MorphismError {
    #[error(transparent)]
    Page(#[from] PageError),
    #[error(transparent)]
    Oid(#[from] OidError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("word of arity {arity} exceeds the expansion cap {cap}")]
    CapExceeded { arity: usize, cap: usize },
    #[error("source and target live over different rings: {0} vs {1}")]
    RingMismatch(String, String),
    #[error("no Taylor coefficient of arity {arity}: {failure}")]
    SolverFailed { arity: usize, failure: SolveFailure },
}

/// Taylor coefficients of a morphism, keyed by `k` (tables of arity `k + 1`).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TaylorMorphism {
    pub coeffs: BTreeMap<usize, Table>,
}

/// Taylor coefficients of a coderivation along a morphism.  Homotopies have
/// degree −1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TaylorCoderivation {
    pub degree: i32,
    pub coeffs: BTreeMap<usize, Table>,
}

fn block_value(coeffs: &BTreeMap<usize, Table>, basis: &GradedBasis, raw: &[usize]) -> ModElt {
    match coeffs.get(&(raw.len() - 1)) {
        Some(t) => t.eval(basis, raw),
        None => ModElt::zero(),
    }
}

/// An O-multilinear table applied to module elements.
pub fn apply_multilinear(t: &Table, basis: &GradedBasis, args: &[ModElt]) -> ModElt {
    let mut out = ModElt::zero();
    if args.iter().any(|a| a.is_zero()) {
        return out;
    }
    let ring = args[0].iter().next().expect("nonzero argument").1.ring().clone();
    let mut stack: Vec<(Factors, Poly)> = vec![(Factors::new(), Poly::one(&ring))];
    for a in args {
        let mut next = Vec::with_capacity(stack.len() * a.len());
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
        out.add_mul(&Q::one(), &f, &t.eval(basis, &raw));
    }
    out
}

/// `l_m` of the target on module elements, `m = vals.len()`.
fn bracket_values(target: &OidStructure, vals: &[ModElt]) -> ModElt {
    if vals.iter().any(|v| v.is_zero()) {
        return ModElt::zero();
    }
    match vals.len() {
        1 => reduce_elt(target.modulus.as_ref(), target.complex.apply_d(&vals[0])),
        m if target.brackets.contains_key(&m) => target.eval_bracket(m, vals).expect("stored arity"),
        _ => ModElt::zero(),
    }
}

/// Set partitions of a word's letters with the Koszul sign of listing the
/// blocks one after the other.
fn signed_partitions(degrees: &[i32]) -> Vec<(Vec<Vec<usize>>, i32)> {
    set_partitions(degrees.len())
        .into_iter()
        .map(|p| {
            let perm: Vec<usize> = p.concat();
            let s = permutation_sign(degrees, &perm);
            (p, s)
        })
        .collect()
}

fn gather(f: &[usize], block: &[usize]) -> Factors {
    block.iter().map(|&p| f[p]).collect()
}

/// `sum_i sum_shuffles eps C^(n-i)(l'_i(head), rest)` for O-multilinear
/// coefficients `C` on the source.
fn after_source_brackets(coeffs: &BTreeMap<usize, Table>, source: &OidStructure, w: &SymWord) -> ModElt {
    let sb = source.basis();
    let f = w.factors();
    let n = f.len();
    let degrees = w.degrees(sb);
    let mut out = ModElt::zero();
    for i in 1..=n {
        if i >= 2 && !source.brackets.contains_key(&i) {
            continue;
        }
        if !coeffs.contains_key(&(n - i)) {
            continue;
        }
        for (perm, sign) in signed_shuffles(&degrees, i) {
            let inner = source.bracket_gens(&gather(f, &perm[..i]));
            if inner.is_zero() {
                continue;
            }
            let rest = gather(f, &perm[i..]);
            let v = apply_first(sb, |raw| block_value(coeffs, sb, raw), &inner, &rest, None);
            out.add_signed(sign, &v);
        }
    }
    out
}

impl TaylorMorphism {
    pub fn new() -> TaylorMorphism {
        TaylorMorphism::default()
    }

    /// The identity of a structure's underlying module.
    pub fn identity(s: &OidStructure) -> TaylorMorphism {
        let mut t = Table::new(1, 0);
        for g in 0..s.basis().len() {
            t.insert(SymWord::from_sorted(&[g]), ModElt::generator(g, s.ring()));
        }
        let mut phi = TaylorMorphism::new();
        phi.coeffs.insert(0, t);
        phi
    }

    pub fn coefficient(&self, k: usize) -> Option<&Table> {
        self.coeffs.get(&k)
    }

    pub fn set(&mut self, k: usize, t: Table) {
        assert_eq!(t.arity, k + 1);
        self.coeffs.insert(k, t);
    }

    /// `Phi^(raw.len() - 1)` on a tuple of source generators.
    pub fn eval(&self, basis: &GradedBasis, raw: &[usize]) -> ModElt {
        block_value(&self.coeffs, basis, raw)
    }

    pub fn try_map_coeffs<E>(&self, mut f: impl FnMut(&Poly) -> Result<Poly, E>) -> Result<TaylorMorphism, E> {
        let coeffs = self.coeffs.iter().map(|(&k, t)| Ok((k, t.try_map_coeffs(&mut f)?))).collect::<Result<_, E>>()?;
        Ok(TaylorMorphism { coeffs })
    }

    pub fn map_coeffs(&self, mut f: impl FnMut(&Poly) -> Poly) -> TaylorMorphism {
        self.try_map_coeffs(|p| Ok::<_, ()>(f(p))).expect("infallible")
    }
}

impl TaylorCoderivation {
    pub fn new(degree: i32) -> TaylorCoderivation {
        TaylorCoderivation { degree, coeffs: BTreeMap::new() }
    }

    pub fn set(&mut self, k: usize, t: Table) {
        assert_eq!((t.arity, t.degree), (k + 1, self.degree));
        self.coeffs.insert(k, t);
    }

    pub fn try_map_coeffs<E>(&self, mut f: impl FnMut(&Poly) -> Result<Poly, E>) -> Result<TaylorCoderivation, E> {
        let coeffs = self.coeffs.iter().map(|(&k, t)| Ok((k, t.try_map_coeffs(&mut f)?))).collect::<Result<_, E>>()?;
        Ok(TaylorCoderivation { degree: self.degree, coeffs })
    }

    pub fn map_coeffs(&self, mut f: impl FnMut(&Poly) -> Poly) -> TaylorCoderivation {
        self.try_map_coeffs(|p| Ok::<_, ()>(f(p))).expect("infallible")
    }
}

/// The coalgebra image of a word: `sum over partitions eps Phi(x_B1) . ... . Phi(x_Bm)`.
pub fn expand_morphism(
    phi: &TaylorMorphism,
    source: &GradedBasis,
    target: &GradedBasis,
    w: &SymWord,
    cap: usize,
) -> Result<SymElt, MorphismError> {
    if w.arity() > cap {
        return Err(MorphismError::CapExceeded { arity: w.arity(), cap });
    }
    let f = w.factors();
    let mut out = SymElt::zero();
    for (p, sign) in signed_partitions(&w.degrees(source)) {
        let vals: Vec<ModElt> = p.iter().map(|b| phi.eval(source, &gather(f, b))).collect();
        if vals.iter().any(|v| v.is_zero()) {
            continue;
        }
        let ring = vals[0].iter().next().expect("nonzero").1.ring().clone();
        let mut stack: Vec<(Factors, Poly)> = vec![(Factors::new(), Poly::one(&ring))];
        for a in &vals {
            let mut next = Vec::new();
            for (raw, c) in &stack {
                for (g, q) in a.iter() {
                    let mut r = raw.clone();
                    r.push(g);
                    next.push((r, c * q));
                }
            }
            stack = next;
        }
        let c = Q::from_integer(sign.into());
        for (raw, q) in stack {
            out.add_raw(target, &raw, &c, &q);
        }
    }
    Ok(out)
}

/// `(Phi o Q' - Q o Phi)` at one source word.
pub fn morphism_defect(phi: &TaylorMorphism, source: &OidStructure, target: &OidStructure, w: &SymWord) -> ModElt {
    let sb = source.basis();
    let f = w.factors();
    let mut out = after_source_brackets(&phi.coeffs, source, w);
    for (p, sign) in signed_partitions(&w.degrees(sb)) {
        let vals: Vec<ModElt> = p.iter().map(|b| phi.eval(sb, &gather(f, b))).collect();
        out.add_signed(-sign, &bracket_values(target, &vals));
    }
    reduce_elt(target.modulus.as_ref(), out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MorphismResidualKind {
    /// `Phi o Q' - Q o Phi` at this arity
    Equation,
    /// `pi Phi^(0) != pi'`
    Hook,
    /// `rho Phi^(0) != rho'`
    Anchor,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MorphismResidual {
    pub arity: usize,
    pub word: SymWord,
    pub kind: MorphismResidualKind,
    pub value: ResidualValue,
}

/// All residuals of the morphism equations on words of up to `max_arity`
/// letters, plus the hook and anchor conditions on degree −1 generators.
pub fn check_morphism(
    phi: &TaylorMorphism,
    source: &OidStructure,
    target: &OidStructure,
    max_arity: usize,
) -> Vec<MorphismResidual> {
    let sb = source.basis();
    let mut out = Vec::new();
    for n in 1..=max_arity {
        let words: Vec<SymWord> = words_of_arity(sb, n).into_iter().filter(|w| w.degree(sb) <= -2).collect();
        let mut found: Vec<MorphismResidual> = words
            .into_par_iter()
            .filter_map(|w| {
                let r = morphism_defect(phi, source, target, &w);
                (!r.is_zero()).then(|| MorphismResidual {
                    arity: n,
                    word: w,
                    kind: MorphismResidualKind::Equation,
                    value: ResidualValue::Module(r),
                })
            })
            .collect();
        out.append(&mut found);
    }
    let md = target.modulus.as_ref();
    for &g in sb.in_degree(-1) {
        let v = phi.eval(sb, &[g]);
        let w = SymWord::from_sorted(&[g]);
        let mut hook = target.complex.apply_pi(&v);
        hook.add_scaled(&-Q::one(), &source.complex.pi[g]);
        let hook = reduce_der(md, hook);
        if !hook.is_zero() {
            out.push(MorphismResidual { arity: 1, word: w.clone(), kind: MorphismResidualKind::Hook, value: ResidualValue::Vector(hook) });
        }
        let mut anchor = target.apply_rho(&v);
        anchor.add_scaled(&-Q::one(), &source.rho[g]);
        let anchor = reduce_der(md, anchor);
        if !anchor.is_zero() {
            out.push(MorphismResidual { arity: 1, word: w, kind: MorphismResidualKind::Anchor, value: ResidualValue::Vector(anchor) });
        }
    }
    out
}

fn same_ring(source: &OidStructure, target: &OidStructure) -> Result<(), MorphismError> {
    if source.ring() != target.ring() {
        return Err(MorphismError::RingMismatch(source.ring().describe(), target.ring().describe()));
    }
    Ok(())
}

/// Builds `Phi^(0), ..., Phi^(max_arity - 1)` into a structure on an exact
/// complex.  `Phi^(0)` lifts the source hook through the target's; each
/// higher coefficient solves `D(Phi^(n-1)) = (Phi o Q' - Q o Phi)^(n-1)`
/// evaluated without `Phi^(n-1)`.
pub fn construct_morphism(
    source: &OidStructure,
    target: &OidStructure,
    max_arity: usize,
    weight_cap: i64,
) -> Result<(TaylorMorphism, Vec<SolveReport>), MorphismError> {
    same_ring(source, target)?;
    for ((degree, weight), rank) in homology_dims(&target.complex, weight_cap).map_err(PageError::from)? {
        if degree <= -1 && rank > 0 {
            return Err(PageError::NotExact { degree, weight, rank }.into());
        }
    }
    let page = Page::new(&source.complex, &target.complex);
    let sb = source.basis();
    let mut phi = TaylorMorphism::new();
    let mut reports = Vec::new();
    for n in 1..=max_arity {
        let mut c = PageElement::new(n, 1);
        if n == 1 {
            for &g in sb.in_degree(-1) {
                c.insert_last(SymWord::from_sorted(&[g]), source.complex.pi[g].clone());
            }
        } else {
            let words: Vec<SymWord> = words_of_arity(sb, n).into_iter().filter(|w| w.degree(sb) <= -2).collect();
            let values: Vec<(SymWord, ModElt)> =
                words.into_par_iter().map(|w| (w.clone(), morphism_defect(&phi, source, target, &w))).collect();
            for (w, m) in values {
                c.insert_module(w, m);
            }
        }
        let rep = page.solve(&c, 0, weight_cap)?;
        if !rep.solved {
            let failure = rep.failure.clone().unwrap_or(SolveFailure::NotClosed(Vec::new()));
            return Err(MorphismError::SolverFailed { arity: n, failure });
        }
        let mut t = rep.certificate.to_table();
        t.degree = 0;
        phi.set(n - 1, t);
        reports.push(rep);
    }
    Ok((phi, reports))
}

/// `Phi o Psi` for `Psi: E'' -> E'` and `Phi: E' -> E`, on words of up to
/// `max_arity` letters of `E''`.
pub fn compose(
    phi: &TaylorMorphism,
    psi: &TaylorMorphism,
    source: &GradedBasis,
    middle: &GradedBasis,
    max_arity: usize,
) -> TaylorMorphism {
    let mut out = TaylorMorphism::new();
    for n in 1..=max_arity {
        let t = Table::from_fn(source, n, 0, |w| {
            let f = w.factors();
            let mut v = ModElt::zero();
            for (p, sign) in signed_partitions(&w.degrees(source)) {
                let Some(outer) = phi.coefficient(p.len() - 1) else { continue };
                let vals: Vec<ModElt> = p.iter().map(|b| psi.eval(source, &gather(f, b))).collect();
                v.add_signed(sign, &apply_multilinear(outer, middle, &vals));
            }
            v
        });
        out.set(n - 1, t);
    }
    out
}

/// `(Q o H + H o Q')` at one source word for a coderivation `H` along `phi`:
/// the first part sums `eps l_(m+1)(H(x_I), Phi(x_J1), ..., Phi(x_Jm))` over
/// partitions with a marked block `I`.
pub fn coderivation_flow(
    phi: &TaylorMorphism,
    h: &TaylorCoderivation,
    source: &OidStructure,
    target: &OidStructure,
    w: &SymWord,
) -> ModElt {
    let sb = source.basis();
    let f = w.factors();
    let degrees = w.degrees(sb);
    let mut out = after_source_brackets(&h.coeffs, source, w);
    for p in set_partitions(f.len()) {
        for marked in 0..p.len() {
            let hv = block_value(&h.coeffs, sb, &gather(f, &p[marked]));
            if hv.is_zero() {
                continue;
            }
            let mut perm: Vec<usize> = p[marked].clone();
            let mut vals = vec![hv];
            for (b, block) in p.iter().enumerate() {
                if b != marked {
                    perm.extend_from_slice(block);
                    vals.push(phi.eval(sb, &gather(f, block)));
                }
            }
            let sign = permutation_sign(&degrees, &perm);
            out.add_signed(sign, &bracket_values(target, &vals));
        }
    }
    reduce_elt(target.modulus.as_ref(), out)
}

/// A polynomial path `Phi_t` with its generating homotopy, over the ring
/// extended by the time variable.
#[derive(Clone, Debug)]
pub struct HomotopyTrace {
    pub ring: Ring,
    /// index of the time variable in `ring`
    pub t: usize,
    pub phi: TaylorMorphism,
    pub h: TaylorCoderivation,
    pub start: Q,
    pub end: Q,
}

fn time_ring(base: &Ring) -> (Ring, usize) {
    let mut name = "t".to_string();
    let mut i = 0;
    while base.index_of(&name).is_some() {
        i += 1;
        name = format!("t{i}");
    }
    let r = base.extend(&name);
    let t = r.nvars() - 1;
    (r, t)
}

impl HomotopyTrace {
    /// `Phi_s` over the original ring.
    pub fn at(&self, s: &Q, base: &Ring) -> Result<TaylorMorphism, PolyError> {
        let c = Poly::constant(&self.ring, s.clone());
        self.phi.try_map_coeffs(|p| p.substitute(self.t, &c).project(base))
    }

    /// The endpoint `Phi_end`.
    pub fn endpoint(&self, base: &Ring) -> Result<TaylorMorphism, PolyError> {
        self.at(&self.end, base)
    }
}

/// Integrates `d Phi_t / dt = Q o H + H o Q'` from `Phi_start = phi` with
/// `H` constant in `t`, on words of up to `max_arity` letters.
pub fn homotopy_step(
    phi: &TaylorMorphism,
    h: &TaylorCoderivation,
    source: &OidStructure,
    target: &OidStructure,
    start: Q,
    end: Q,
    max_arity: usize,
) -> Result<HomotopyTrace, MorphismError> {
    same_ring(source, target)?;
    let (ring, t) = time_ring(source.ring());
    let src = source.embed(&ring)?;
    let tgt = target.embed(&ring)?;
    let phi0 = phi.try_map_coeffs(|p| p.embed(&ring))?;
    let h = h.try_map_coeffs(|p| p.embed(&ring))?;
    let at_start = Poly::constant(&ring, start.clone());
    let sb = src.basis();
    let mut phi_t = TaylorMorphism::new();
    for n in 1..=max_arity {
        let table = Table::from_fn(sb, n, 0, |w| {
            let rate = coderivation_flow(&phi_t, &h, &src, &tgt, w);
            let mut v = phi0.eval(sb, w.factors());
            for (g, f) in rate.iter() {
                let big = f.integrate(t);
                let mut delta = big.clone();
                delta.add_scaled(&-Q::one(), &big.substitute(t, &at_start));
                v.add_term(g, &delta);
            }
            v
        });
        phi_t.set(n - 1, table);
    }
    Ok(HomotopyTrace { ring, t, phi: phi_t, h, start, end })
}

/// `d Phi_t/dt - (Q o H + H o Q')` on every word of up to `max_arity`
/// letters; empty iff the pair solves the flow equation.
pub fn flow_residual(
    phi_t: &TaylorMorphism,
    h: &TaylorCoderivation,
    source: &OidStructure,
    target: &OidStructure,
    t: usize,
    max_arity: usize,
) -> Vec<(SymWord, ModElt)> {
    let sb = source.basis();
    let mut out = Vec::new();
    for n in 1..=max_arity {
        for w in words_of_arity(sb, n) {
            let mut r = phi_t.eval(sb, w.factors()).map_coeffs(|p| p.partial(t));
            r.add_signed(-1, &coderivation_flow(phi_t, h, source, target, &w));
            if !r.is_zero() {
                out.push((w, r));
            }
        }
    }
    out
}

/// Derivation image of a morphism's linear part on degree −1 generators.
pub fn hook_of(phi: &TaylorMorphism, source: &OidStructure, target: &OidStructure) -> Vec<(usize, Derivation)> {
    let sb = source.basis();
    sb.in_degree(-1).iter().map(|&g| (g, target.complex.apply_pi(&phi.eval(sb, &[g])))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{build_koszul_oid, KoszulSpec};
    use crate::pages::construct_structure;
    use num_bigint::BigInt;

    fn q(n: i64) -> Q {
        Q::from_integer(BigInt::from(n))
    }

    fn koszul(phi: &str, max_arity: usize) -> OidStructure {
        let ring = Ring::new(["x", "y", "z"]);
        build_koszul_oid(&KoszulSpec { phi: Poly::parse(phi, &ring).unwrap(), max_arity })
    }

    /// A degree −1 map sending each generator of degree −1 to a multiple of
    /// the top generator, zero elsewhere.
    fn sample_homotopy(s: &OidStructure) -> TaylorCoderivation {
        let b = s.basis();
        let mut t = Table::new(1, -1);
        let top = b.in_degree(-2)[0];
        let ring = s.ring();
        for (i, &g) in b.in_degree(-1).iter().enumerate() {
            let f = Poly::parse(["x", "y", "z"][i % 3], ring).unwrap();
            t.insert(SymWord::from_sorted(&[g]), ModElt::term(top, f));
        }
        let mut h = TaylorCoderivation::new(-1);
        h.set(0, t);
        h
    }

    #[test]
    fn identity_is_a_morphism_and_expands_to_the_identity() {
        let s = koszul("x^3+y^3+z^3", 3);
        let id = TaylorMorphism::identity(&s);
        assert!(check_morphism(&id, &s, &s, 3).is_empty());
        let b = s.basis();
        for w in words_of_arity(b, 2) {
            let e = expand_morphism(&id, b, b, &w, 4).unwrap();
            let mut want = SymElt::zero();
            want.add_term(w.clone(), &Q::one(), &Poly::one(s.ring()));
            assert_eq!(e, want);
        }
        let w = words_of_arity(b, 5).pop().unwrap();
        assert!(matches!(expand_morphism(&id, b, b, &w, 4), Err(MorphismError::CapExceeded { .. })));
    }

    #[test]
    fn expansion_counts_partition_shapes() {
        // Phi^(0) = id and Phi^(1) = e on every pair, with e an even generator
        // so that signs play no role: a 3-word gives the word itself plus
        // three terms e . x_k.
        let s = koszul("x^2+y^2+z^2", 3);
        let b = s.basis();
        let top = b.in_degree(-2)[0];
        let e1 = b.in_degree(-1);
        let mut phi = TaylorMorphism::identity(&s);
        let pairs = Table::from_fn(b, 2, 0, |_| ModElt::generator(top, s.ring()));
        phi.set(1, pairs);
        let w = SymWord::from_sorted(&[e1[0], e1[1], e1[2]]);
        let e = expand_morphism(&phi, b, b, &w, 3).unwrap();
        assert_eq!(e.iter().count(), 4);
        assert_eq!(e.coeff(&w), Some(&Poly::one(s.ring())));
        for &g in e1 {
            let (v, _) = SymWord::normalize(b, &[top, g]).unwrap();
            assert!(e.coeff(&v).is_some());
        }
    }

    #[test]
    fn anchor_violation_is_reported() {
        let s = koszul("x^3+y^3+z^3", 2);
        let mut phi = TaylorMorphism::identity(&s);
        let b = s.basis();
        let g = b.in_degree(-1)[0];
        let mut t = phi.coefficient(0).unwrap().clone();
        t.insert(SymWord::from_sorted(&[g]), ModElt::generator(g, s.ring()).scale(&q(2)));
        phi.set(0, t);
        let res = check_morphism(&phi, &s, &s, 1);
        assert!(res.iter().any(|r| r.kind == MorphismResidualKind::Anchor));
        assert!(res.iter().any(|r| r.kind == MorphismResidualKind::Hook));
    }

    #[test]
    fn morphism_from_the_constructed_structure() {
        let target = koszul("x^2+y^2+z^2", 3);
        let (source, _) = construct_structure(&target.complex, None, 3, 10).unwrap();
        let (phi, _) = construct_morphism(&source, &target, 2, 10).unwrap();
        assert!(check_morphism(&phi, &source, &target, 2).is_empty());
    }

    #[test]
    fn twisted_hook_is_lifted() {
        let target = koszul("x^2+y^2+z^2", 2);
        let chi = Poly::parse("x", target.ring()).unwrap();
        let source = target.chi_twist(&chi).unwrap();
        let (phi, _) = construct_morphism(&source, &target, 1, 10).unwrap();
        for (g, d) in hook_of(&phi, &source, &target) {
            assert_eq!(d, target.complex.pi[g].mul_poly(&chi));
        }
    }

    #[test]
    fn composition_with_the_identity_and_in_arity_two() {
        let target = koszul("x^2+y^2+z^2", 3);
        let (source, _) = construct_structure(&target.complex, None, 3, 10).unwrap();
        let (phi, _) = construct_morphism(&source, &target, 2, 10).unwrap();
        let b = source.basis();
        let id = TaylorMorphism::identity(&source);
        let left = compose(&id, &phi, b, b, 2);
        for k in 0..2 {
            assert!(crate::oid::tables_equal(left.coefficient(k).unwrap(), phi.coefficient(k).unwrap()));
        }
        let (back, _) = construct_morphism(&target, &source, 2, 10).unwrap();
        let round = compose(&phi, &back, b, b, 2);
        assert!(check_morphism(&round, &target, &target, 2).is_empty());
        // arity two by hand: Phi1(Psi0 x, Psi0 y) + Phi0(Psi1(x, y))
        for w in words_of_arity(b, 2) {
            let f = w.factors();
            let a = [back.eval(b, &f[..1]), back.eval(b, &f[1..])];
            let mut want = apply_multilinear(phi.coefficient(1).unwrap(), b, &a);
            want.add_signed(1, &apply_multilinear(phi.coefficient(0).unwrap(), b, &[back.eval(b, f)]));
            assert_eq!(round.eval(b, f), want);
        }
    }

    #[test]
    fn homotopy_flow_from_a_chain_homotopy() {
        let s = koszul("x^2+y^2+z^2", 3);
        let id = TaylorMorphism::identity(&s);
        let h = sample_homotopy(&s);
        let trace = homotopy_step(&id, &h, &s, &s, Q::from_integer(0.into()), Q::one(), 2).unwrap();
        let st = s.embed(&trace.ring).unwrap();
        // Lambda_k(t) vanishes identically
        assert!(check_morphism(&trace.phi, &st, &st, 2).is_empty());
        // arity one is Phi + t (d h + h d')
        let b = s.basis();
        let tv = Poly::var(&trace.ring, trace.t);
        for g in 0..b.len() {
            let hg = h.coeffs[&0].eval(b, &[g]);
            let mut dh = st.complex.apply_d(&hg.map_coeffs(|p| p.embed(&trace.ring).unwrap()));
            let hd = apply_multilinear(&trace.h.coeffs[&0], b, &[st.complex.d[g].clone()]);
            dh.add_signed(1, &hd);
            let mut want = ModElt::generator(g, &trace.ring);
            want.add_signed(1, &dh.mul_poly(&tv));
            assert_eq!(trace.phi.eval(b, &[g]), want);
        }
        assert!(flow_residual(&trace.phi, &trace.h, &st, &st, trace.t, 2).is_empty());
        let end = trace.endpoint(s.ring()).unwrap();
        assert!(check_morphism(&end, &s, &s, 2).is_empty());
    }

    #[test]
    fn reversed_homotopy_solves_the_same_equation() {
        let s = koszul("x^2+y^2+z^2", 3);
        let id = TaylorMorphism::identity(&s);
        let trace = homotopy_step(&id, &sample_homotopy(&s), &s, &s, Q::from_integer(0.into()), Q::one(), 2).unwrap();
        let st = s.embed(&trace.ring).unwrap();
        let one_minus_t = &Poly::one(&trace.ring) - &Poly::var(&trace.ring, trace.t);
        let psi = trace.phi.map_coeffs(|p| p.substitute(trace.t, &one_minus_t));
        let k = trace.h.map_coeffs(|p| -p);
        assert!(flow_residual(&psi, &k, &st, &st, trace.t, 2).is_empty());
        assert!(!flow_residual(&psi, &trace.h, &st, &st, trace.t, 2).is_empty());
    }

    #[test]
    fn zero_homotopy_is_constant() {
        let s = koszul("x^3+y^3+z^3", 2);
        let id = TaylorMorphism::identity(&s);
        let trace = homotopy_step(&id, &TaylorCoderivation::new(-1), &s, &s, Q::from_integer(0.into()), Q::one(), 2).unwrap();
        let end = trace.endpoint(s.ring()).unwrap();
        assert!(crate::oid::tables_equal(end.coefficient(0).unwrap(), id.coefficient(0).unwrap()));
        assert!(end.coefficient(1).unwrap().is_empty());
    }
}
