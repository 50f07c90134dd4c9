//! Graded symmetric words `x_1 . x_2 . ... . x_k` over a graded basis.
//!
//! A word is stored as the sorted list of its generator ids.  Moving two
//! adjacent factors past each other costs `(-1)^(|x||y|)`, so a word with a
//! repeated odd factor is zero.

use std::collections::BTreeMap;

use num_traits::One;
use smallvec::SmallVec;

use crate::chain::{ChainError, GradedBasis, ModElt};
use crate::polyring::{Poly, Q};

pub type Factors = SmallVec<[usize; 6]>;

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymWord(Factors);

/// Sign of `(-1)^(a b)`.
pub fn koszul(a: i32, b: i32) -> i32 {
    if a % 2 != 0 && b % 2 != 0 {
        -1
    } else {
        1
    }
}

/// Koszul sign of listing the graded letters `degrees[perm[0]], degrees[perm[1]], ...`
/// instead of in their original order.
pub fn permutation_sign(degrees: &[i32], perm: &[usize]) -> i32 {
    let mut sign = 1;
    for a in 0..perm.len() {
        for b in a + 1..perm.len() {
            if perm[a] > perm[b] {
                sign *= koszul(degrees[perm[a]], degrees[perm[b]]);
            }
        }
    }
    sign
}

impl SymWord {
    pub fn empty() -> SymWord {
        SymWord(Factors::new())
    }

    /// Canonical form of the raw factor sequence with its Koszul sign, or
    /// `None` when an odd generator repeats.
    pub fn normalize(basis: &GradedBasis, raw: &[usize]) -> Option<(SymWord, i32)> {
        let mut v: Factors = raw.iter().copied().collect();
        let mut sign = 1;
        for i in 1..v.len() {
            let mut j = i;
            while j > 0 && v[j - 1] > v[j] {
                sign *= koszul(basis.degree(v[j - 1]), basis.degree(v[j]));
                v.swap(j - 1, j);
                j -= 1;
            }
        }
        if v.windows(2).any(|w| w[0] == w[1] && basis.is_odd(w[0])) {
            return None;
        }
        Some((SymWord(v), sign))
    }

    /// Wraps factors already in canonical order.
    pub fn from_sorted(factors: &[usize]) -> SymWord {
        debug_assert!(factors.windows(2).all(|w| w[0] <= w[1]));
        SymWord(factors.iter().copied().collect())
    }

    pub fn factors(&self) -> &[usize] {
        &self.0
    }

    pub fn arity(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self, basis: &GradedBasis) -> i32 {
        self.0.iter().map(|&g| basis.degree(g)).sum()
    }

    pub fn degrees(&self, basis: &GradedBasis) -> Vec<i32> {
        self.0.iter().map(|&g| basis.degree(g)).collect()
    }

    /// Parses `"a . b . c"`; returns the canonical word and sign, or `None` for zero.
    pub fn parse(text: &str, basis: &GradedBasis) -> Result<Option<(SymWord, i32)>, ChainError> {
        let ids = text.split(" . ").map(|t| basis.lookup(t.trim())).collect::<Result<Vec<_>, _>>()?;
        Ok(SymWord::normalize(basis, &ids))
    }

    pub fn display(&self, basis: &GradedBasis) -> String {
        self.0.iter().map(|&g| basis.name(g)).collect::<Vec<_>>().join(" . ")
    }
}

/// All `(i, j)`-shuffles as position lists: the first `i` entries increase,
/// the last `j` entries increase.
pub fn shuffles(i: usize, j: usize) -> Vec<Vec<usize>> {
    let n = i + j;
    crate::chain::subsets(n, i)
        .into_iter()
        .map(|head| {
            let mut perm = head.clone();
            perm.extend((0..n).filter(|p| !head.contains(p)));
            perm
        })
        .collect()
}

/// Shuffles of the letters of a tuple with their Koszul signs.
pub fn signed_shuffles(degrees: &[i32], i: usize) -> Vec<(Vec<usize>, i32)> {
    shuffles(i, degrees.len() - i)
        .into_iter()
        .map(|p| {
            let s = permutation_sign(degrees, &p);
            (p, s)
        })
        .collect()
}

/// Set partitions of `0..n` with blocks increasing and ordered by their
/// smallest element.
pub fn set_partitions(n: usize) -> Vec<Vec<Vec<usize>>> {
    let mut out: Vec<Vec<Vec<usize>>> = vec![Vec::new()];
    for i in 0..n {
        let mut next = Vec::new();
        for p in out {
            for b in 0..p.len() {
                let mut q = p.clone();
                q[b].push(i);
                next.push(q);
            }
            let mut q = p;
            q.push(vec![i]);
            next.push(q);
        }
        out = next;
    }
    out
}

/// Canonical words of the given arity, odd generators never repeated.
pub fn words_of_arity(basis: &GradedBasis, arity: usize) -> Vec<SymWord> {
    fn rec(basis: &GradedBasis, start: usize, left: usize, cur: &mut Factors, out: &mut Vec<SymWord>) {
        if left == 0 {
            out.push(SymWord(cur.clone()));
            return;
        }
        for g in start..basis.len() {
            cur.push(g);
            let next = if basis.is_odd(g) { g + 1 } else { g };
            rec(basis, next, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(basis, 0, arity, &mut Factors::new(), &mut out);
    out
}

/// A finite combination of canonical words with polynomial coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SymElt {
    terms: BTreeMap<SymWord, Poly>,
}

impl SymElt {
    pub fn zero() -> SymElt {
        SymElt::default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&SymWord, &Poly)> {
        self.terms.iter()
    }

    pub fn coeff(&self, w: &SymWord) -> Option<&Poly> {
        self.terms.get(w)
    }

    /// `self += c * f * w`.
    pub fn add_term(&mut self, w: SymWord, c: &Q, f: &Poly) {
        if f.is_zero() {
            return;
        }
        match self.terms.get_mut(&w) {
            Some(p) => {
                p.add_scaled(c, f);
                if p.is_zero() {
                    self.terms.remove(&w);
                }
            }
            None => {
                let p = f.scale(c);
                if !p.is_zero() {
                    self.terms.insert(w, p);
                }
            }
        }
    }

    /// Adds `c * f * raw` for a raw (unsorted) factor sequence.
    pub fn add_raw(&mut self, basis: &GradedBasis, raw: &[usize], c: &Q, f: &Poly) {
        if let Some((w, s)) = SymWord::normalize(basis, raw) {
            let c = if s < 0 { -c.clone() } else { c.clone() };
            self.add_term(w, &c, f);
        }
    }

    pub fn add_scaled(&mut self, c: &Q, other: &SymElt) {
        for (w, f) in other.iter() {
            self.add_term(w.clone(), c, f);
        }
    }

    /// `m . rest` for a module element `m` and a raw factor tail, scaled by `c * f`.
    pub fn add_product(&mut self, basis: &GradedBasis, m: &ModElt, rest: &[usize], c: &Q, f: &Poly) {
        let mut raw: Factors = Factors::new();
        for (h, g) in m.iter() {
            raw.clear();
            raw.push(h);
            raw.extend_from_slice(rest);
            let mut coeff = Poly::zero(g.ring());
            coeff.add_product(g, f);
            self.add_raw(basis, &raw, c, &coeff);
        }
    }

    pub fn display(&self, basis: &GradedBasis) -> String {
        if self.is_zero() {
            return "0".into();
        }
        self.iter().map(|(w, f)| format!("({f})*[{}]", w.display(basis))).collect::<Vec<_>>().join(" + ")
    }
}

/// The coderivation extending a per-generator degree +1 map:
/// `sum_s (sign of moving slot s to the front) d(x_s) . (rest)`.
pub fn derive_word(basis: &GradedBasis, w: &SymWord, d: impl Fn(usize) -> ModElt) -> SymElt {
    let degrees = w.degrees(basis);
    let f = w.factors();
    let mut out = SymElt::zero();
    let one = Q::one();
    for s in 0..f.len() {
        let image = d(f[s]);
        if image.is_zero() {
            continue;
        }
        let sign: i32 = degrees[..s].iter().map(|&a| koszul(a, degrees[s])).product();
        let rest: Factors = f.iter().enumerate().filter(|&(i, _)| i != s).map(|(_, &g)| g).collect();
        let c = if sign < 0 { -one.clone() } else { one.clone() };
        let unit = Poly::one(image.iter().next().expect("nonzero image").1.ring());
        out.add_product(basis, &image, &rest, &c, &unit);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{ideal_complex, koszul_complex, Generator, Label};
    use crate::polyring::Ring;
    use proptest::prelude::*;

    fn basis(degrees: &[i32]) -> GradedBasis {
        GradedBasis::new(
            degrees
                .iter()
                .enumerate()
                .map(|(i, &d)| Generator { label: Label::Opaque(format!("g{i}")), degree: d })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn normalize_examples() {
        let b = basis(&[-1, -1, -2]);
        assert_eq!(SymWord::normalize(&b, &[0, 0]), None);
        assert_eq!(SymWord::normalize(&b, &[1, 0]), Some((SymWord::from_sorted(&[0, 1]), -1)));
        assert_eq!(SymWord::normalize(&b, &[2, 0]), Some((SymWord::from_sorted(&[0, 2]), 1)));
        assert_eq!(SymWord::normalize(&b, &[2, 2]), Some((SymWord::from_sorted(&[2, 2]), 1)));
    }

    #[test]
    fn set_partition_counts() {
        let bell = [1, 1, 2, 5, 15, 52];
        for (n, &b) in bell.iter().enumerate() {
            let ps = set_partitions(n);
            assert_eq!(ps.len(), b);
            for p in &ps {
                assert!(p.windows(2).all(|w| w[0][0] < w[1][0]));
                let mut all: Vec<usize> = p.concat();
                all.sort_unstable();
                assert_eq!(all, (0..n).collect::<Vec<_>>());
            }
        }
    }

    #[test]
    fn shuffle_counts_and_signs() {
        assert_eq!(shuffles(2, 1).len(), 3);
        assert_eq!(shuffles(0, 4), vec![vec![0, 1, 2, 3]]);
        let signs: Vec<i32> = signed_shuffles(&[-1, -1, -1], 1).into_iter().map(|(_, s)| s).collect();
        assert_eq!(signs, vec![1, -1, 1]);
    }

    #[test]
    fn word_text_roundtrip() {
        let r = Ring::new(["x", "y", "z"]);
        let c = koszul_complex(&Poly::parse("x^2+y^2+z^2", &r).unwrap());
        let (w, s) = SymWord::parse("dP[2,3] . dP[1,2]", &c.basis).unwrap().unwrap();
        assert_eq!(s, -1);
        assert_eq!(w.display(&c.basis), "dP[1,2] . dP[2,3]");
        assert!(SymWord::parse("dP[1,2] . dP[1,2]", &c.basis).unwrap().is_none());
        assert!(SymWord::parse("dP[1,2] . nope", &c.basis).is_err());
    }

    #[test]
    fn enumeration_skips_odd_repeats() {
        let b = basis(&[-1, -2]);
        let w2 = words_of_arity(&b, 2);
        assert_eq!(w2, vec![SymWord::from_sorted(&[0, 1]), SymWord::from_sorted(&[1, 1])]);
        assert_eq!(words_of_arity(&b, 3).len(), 2);
    }

    #[test]
    fn derive_word_basics() {
        let r = Ring::new(["x", "y"]);
        let p = |s: &str| Poly::parse(s, &r).unwrap();
        let c = ideal_complex(&[p("x^2"), p("y^2")]);
        let top = c.basis.lookup("mu[1,2]@x").unwrap();
        let single = derive_word(&c.basis, &SymWord::from_sorted(&[top]), |g| c.d[g].clone());
        let mut want = SymElt::zero();
        for (h, f) in c.d[top].iter() {
            want.add_term(SymWord::from_sorted(&[h]), &Q::one(), f);
        }
        assert_eq!(single, want);
        let zero = derive_word(&c.basis, &SymWord::from_sorted(&[top]), |_| ModElt::zero());
        assert!(zero.is_zero());

        // word (degree -2) . (degree -1): only the first factor moves, with sign +1
        let e1 = c.basis.lookup("mu[1]@y").unwrap();
        let (w, _) = SymWord::normalize(&c.basis, &[top, e1]).unwrap();
        let got = derive_word(&c.basis, &w, |g| c.d[g].clone());
        let mut want = SymElt::zero();
        for (h, f) in c.d[top].iter() {
            want.add_raw(&c.basis, &[h, e1], &Q::one(), f);
        }
        assert_eq!(got, want);
    }

    #[test]
    fn derive_word_squares_to_zero() {
        let r = Ring::new(["x", "y", "z", "w"]);
        let c = koszul_complex(&Poly::parse("x^3+y^3+z^3+w^3", &r).unwrap());
        let d = |g: usize| c.d[g].clone();
        for k in 1..=3 {
            for w in words_of_arity(&c.basis, k) {
                let once = derive_word(&c.basis, &w, d);
                let mut twice = SymElt::zero();
                for (v, f) in once.iter() {
                    let dv = derive_word(&c.basis, v, d);
                    for (u, g) in dv.iter() {
                        twice.add_term(u.clone(), &Q::one(), &(f * g));
                    }
                }
                assert!(twice.is_zero(), "{}", w.display(&c.basis));
            }
        }
    }

    proptest! {
        #[test]
        fn normalize_is_idempotent_and_sign_consistent(
            degrees in proptest::collection::vec(-3i32..=-1, 1..6),
            seed in any::<u64>(),
        ) {
            let b = basis(&degrees);
            let n = degrees.len();
            let mut perm: Vec<usize> = (0..n).collect();
            let mut s = seed;
            for i in (1..n).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                perm.swap(i, (s >> 33) as usize % (i + 1));
            }
            // generator ids are sorted by degree, so map letters to ids
            let ids: Vec<usize> = (0..n).map(|i| b.find(&format!("g{i}")).unwrap()).collect();
            let raw: Vec<usize> = perm.iter().map(|&p| ids[p]).collect();
            let (w, sign) = SymWord::normalize(&b, &raw).unwrap();
            let (w2, sign2) = SymWord::normalize(&b, w.factors()).unwrap();
            prop_assert_eq!(&w, &w2);
            prop_assert_eq!(sign2, 1);
            let letter_degrees: Vec<i32> = raw.iter().map(|&g| b.degree(g)).collect();
            // sorting `raw` is the permutation that lists letters by id
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by_key(|&i| raw[i]);
            prop_assert_eq!(sign, permutation_sign(&letter_degrees, &order));
        }

        #[test]
        fn shuffle_count_is_binomial(i in 0usize..5, j in 0usize..5) {
            let binom = |n: usize, k: usize| (1..=k).fold(1usize, |acc, t| acc * (n + 1 - t) / t);
            prop_assert_eq!(shuffles(i, j).len(), binom(i + j, i));
        }
    }
}
