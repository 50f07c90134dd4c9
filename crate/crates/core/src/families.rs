//! The explicit universal structures: vector fields annihilating a function
//! `phi` (on the Koszul complex of `d phi`) and vector fields with
//! coefficients in an ideal, plus the Poisson infinity-algebras they are
//! cut out of.
//!
//! Both families come from one mechanism.  Brackets are first prescribed on
//! the algebra generators (`d_i` with `{d_i1..d_ik}' = phi_{i1..ik}`, or
//! `mu_i, d_x` with `{mu_i, d_x1..d_xr}' = d^r phi_i`), then extended to
//! monomials as graded poly-derivations.  The algebroid brackets are these
//! values on basis monomials; for the ideal family they are normalized by
//! `(-1)^(k-1)` so that the two-term Leibniz rule uses the hook as anchor.

use std::collections::BTreeMap;

use num_traits::One;
use smallvec::SmallVec;

use crate::chain::{ideal_complex, koszul_complex, Complex, Derivation, Generator, GradedBasis, Label, ModElt};
use crate::oid::{BracketResidual, OidStructure, ResidualKind, ResidualValue, Table};
use crate::polyring::{Poly, Q, Ring};
use crate::symwords::{koszul, words_of_arity, SymWord};

pub type Mono = SmallVec<[usize; 8]>;
type AlgElt = BTreeMap<Mono, Poly>;

#[derive(Clone, Debug)]
enum Leaf {
    /// symbols `0..d` are `d/dx_i`
    Koszul { phi: Poly },
    /// symbols `0..m` are `mu_i`, then `d/dx_a` for `m + a`
    Ideal { phis: Vec<Poly> },
}

/// Graded poly-derivations of a free graded commutative algebra determined
/// by their values on generator tuples.
#[derive(Clone, Debug)]
pub struct PolyDerivationAlgebra {
    sym_degree: Vec<i32>,
    /// bracket degree of a monomial minus its product degree
    shift: i32,
    leaf: Leaf,
    ring: Ring,
}

fn add_into(out: &mut AlgElt, m: Mono, c: &Q, f: &Poly) {
    if f.is_zero() {
        return;
    }
    let e = out.entry(m.clone()).or_insert_with(|| Poly::zero(f.ring()));
    e.add_scaled(c, f);
    if e.is_zero() {
        out.remove(&m);
    }
}

impl PolyDerivationAlgebra {
    pub fn koszul(phi: &Poly) -> PolyDerivationAlgebra {
        let d = phi.ring().nvars();
        PolyDerivationAlgebra { sym_degree: vec![-1; d], shift: 1, leaf: Leaf::Koszul { phi: phi.clone() }, ring: phi.ring().clone() }
    }

    pub fn ideal(phis: &[Poly]) -> PolyDerivationAlgebra {
        let ring = phis[0].ring().clone();
        let mut sym_degree = vec![-1; phis.len()];
        sym_degree.extend(std::iter::repeat(0).take(ring.nvars()));
        PolyDerivationAlgebra { sym_degree, shift: 0, leaf: Leaf::Ideal { phis: phis.to_vec() }, ring }
    }

    fn product_degree(&self, m: &[usize]) -> i32 {
        m.iter().map(|&s| self.sym_degree[s]).sum()
    }

    pub fn bracket_degree(&self, m: &[usize]) -> i32 {
        self.product_degree(m) + self.shift
    }

    /// `a * b` sorted, with the sign of the reordering; `None` if an odd
    /// symbol repeats.
    fn mul(&self, a: &[usize], b: &[usize]) -> Option<(Mono, i32)> {
        let mut v: Mono = a.iter().chain(b.iter()).copied().collect();
        let mut sign = 1;
        for i in 1..v.len() {
            let mut j = i;
            while j > 0 && v[j - 1] > v[j] {
                sign *= koszul(self.sym_degree[v[j - 1]], self.sym_degree[v[j]]);
                v.swap(j - 1, j);
                j -= 1;
            }
        }
        if v.windows(2).any(|w| w[0] == w[1] && self.sym_degree[w[0]] % 2 != 0) {
            return None;
        }
        Some((v, sign))
    }

    fn leaf(&self, syms: &[usize]) -> Poly {
        match &self.leaf {
            Leaf::Koszul { phi } => phi.partials(syms),
            Leaf::Ideal { phis } => {
                let m = phis.len();
                let mus: Vec<usize> = syms.iter().copied().filter(|&s| s < m).collect();
                if mus.len() != 1 {
                    return Poly::zero(&self.ring);
                }
                let dirs: Vec<usize> = syms.iter().filter(|&&s| s >= m).map(|&s| s - m).collect();
                phis[mus[0]].partials(&dirs)
            }
        }
    }

    /// The bracket of the monomials `args` (each sorted, listed in the order
    /// of the product).
    pub fn bracket(&self, args: &[Mono]) -> AlgElt {
        let mut out = AlgElt::new();
        if args.is_empty() || args.iter().any(|a| a.is_empty()) {
            return out;
        }
        let Some(j) = args.iter().rposition(|a| a.len() >= 2) else {
            let syms: Vec<usize> = args.iter().map(|a| a[0]).collect();
            add_into(&mut out, Mono::new(), &Q::one(), &self.leaf(&syms));
            return out;
        };
        let k = args.len();
        // move the long argument to the last slot
        let ej = self.bracket_degree(&args[j]);
        let mut sign: i32 = args[j + 1..].iter().map(|a| koszul(ej, self.bracket_degree(a))).product();
        let mut rest: Vec<Mono> = args.iter().enumerate().filter(|&(i, _)| i != j).map(|(_, a)| a.clone()).collect();
        let last = &args[j];
        let (s, c): (Mono, Mono) = (last[..1].iter().copied().collect(), last[1..].iter().copied().collect());
        let op_degree: i32 = rest.iter().map(|a| self.bracket_degree(a)).sum::<i32>() + 1;
        debug_assert_eq!(rest.len(), k - 1);

        // {rest, s} * c
        rest.push(s.clone());
        for (m, f) in self.bracket(&rest) {
            if let Some((p, ps)) = self.mul(&m, &c) {
                add_into(&mut out, p, &Q::from_integer((sign * ps).into()), &f);
            }
        }
        // (-1)^(|op||s|) s * {rest, c}
        rest.pop();
        rest.push(c);
        sign *= koszul(op_degree, self.product_degree(&s));
        for (m, f) in self.bracket(&rest) {
            if let Some((p, ps)) = self.mul(&s, &m) {
                add_into(&mut out, p, &Q::from_integer((sign * ps).into()), &f);
            }
        }
        out
    }
}

/// Sign normalization between the poly-derivation brackets and `l_k`:
/// `(-1)^(k-1)` when `alternate`, else 1.
fn arity_sign(k: usize, alternate: bool) -> Q {
    if alternate && k % 2 == 0 {
        -Q::one()
    } else {
        Q::one()
    }
}

fn tables_from_algebra(
    alg: &PolyDerivationAlgebra,
    basis: &GradedBasis,
    monos: &[Mono],
    lookup: &BTreeMap<Mono, usize>,
    max_arity: usize,
) -> Vec<Table> {
    let alternate = matches!(alg.leaf, Leaf::Ideal { .. });
    (2..=max_arity)
        .map(|k| {
            let sign = arity_sign(k, alternate);
            Table::from_fn(basis, k, 1, |w| {
                let args: Vec<Mono> = w.factors().iter().map(|&g| monos[g].clone()).collect();
                let mut out = ModElt::zero();
                for (m, f) in alg.bracket(&args) {
                    let g = *lookup.get(&m).expect("brackets of basis monomials stay in the complex");
                    out.add_term_scaled(g, &sign, &f);
                }
                out
            })
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct KoszulSpec {
    pub phi: Poly,
    pub max_arity: usize,
}

#[derive(Clone, Debug)]
pub struct IdealSpec {
    pub phis: Vec<Poly>,
    pub max_arity: usize,
}

fn koszul_monos(basis: &GradedBasis) -> Vec<Mono> {
    (0..basis.len())
        .map(|g| match &basis.generator(g).label {
            Label::Koszul(idx) => idx.iter().map(|i| i - 1).collect(),
            other => panic!("not a Koszul label: {other}"),
        })
        .collect()
}

fn ideal_monos(basis: &GradedBasis, ring: &Ring, m: usize) -> Vec<Mono> {
    (0..basis.len())
        .map(|g| match &basis.generator(g).label {
            Label::Ideal { mu, dir } => {
                let mut v: Mono = mu.iter().map(|i| i - 1).collect();
                v.push(m + ring.index_of(dir).expect("direction is a ring variable"));
                v
            }
            other => panic!("not an ideal label: {other}"),
        })
        .collect()
}

fn index_monos(monos: &[Mono]) -> BTreeMap<Mono, usize> {
    monos.iter().cloned().enumerate().map(|(g, m)| (m, g)).collect()
}

/// The structure on the Koszul complex of `d phi` with anchor
/// `rho(d_i ^ d_j) = phi_j d_i - phi_i d_j`.
pub fn build_koszul_oid(spec: &KoszulSpec) -> OidStructure {
    let complex = koszul_complex(&spec.phi);
    let alg = PolyDerivationAlgebra::koszul(&spec.phi);
    let monos = koszul_monos(&complex.basis);
    let lookup = index_monos(&monos);
    let tables = tables_from_algebra(&alg, &complex.basis, &monos, &lookup, spec.max_arity);
    let mut s = OidStructure::new(complex, spec.max_arity);
    for t in tables {
        s.set_bracket(t);
    }
    s
}

/// The structure on `K_- (x) Der(O)` terminating in `I Der(O)`.
pub fn build_ideal_oid(spec: &IdealSpec) -> OidStructure {
    let complex = ideal_complex(&spec.phis);
    let alg = PolyDerivationAlgebra::ideal(&spec.phis);
    let monos = ideal_monos(&complex.basis, &complex.ring, spec.phis.len());
    let lookup = index_monos(&monos);
    let tables = tables_from_algebra(&alg, &complex.basis, &monos, &lookup, spec.max_arity);
    let mut s = OidStructure::new(complex, spec.max_arity);
    for t in tables {
        s.set_bracket(t);
    }
    s
}

pub enum FamilySpec<'a> {
    Koszul(&'a KoszulSpec),
    Ideal(&'a IdealSpec),
}

/// The Poisson infinity-algebra as a structure object: all monomials of the
/// algebra that the complex lives in (for the Koszul family every
/// multivector including functions, for the ideal family every `mu_J d_x`),
/// with `l_1` the unary bracket and no anchor.
pub fn poisson_scaffold(spec: FamilySpec<'_>) -> OidStructure {
    let (alg, entries, max_arity): (PolyDerivationAlgebra, Vec<(Label, Mono)>, usize) = match spec {
        FamilySpec::Koszul(k) => {
            let d = k.phi.ring().nvars();
            let mut e = Vec::new();
            for size in 0..=d {
                for s in crate::chain::subsets(d, size) {
                    e.push((Label::Koszul(s.iter().map(|i| i + 1).collect()), s.into_iter().collect()));
                }
            }
            (PolyDerivationAlgebra::koszul(&k.phi), e, k.max_arity)
        }
        FamilySpec::Ideal(i) => {
            let ring = i.phis[0].ring();
            let m = i.phis.len();
            let mut e = Vec::new();
            for size in 0..=m {
                for s in crate::chain::subsets(m, size) {
                    for a in 0..ring.nvars() {
                        let mut mono: Mono = s.iter().copied().collect();
                        mono.push(m + a);
                        e.push((Label::Ideal { mu: s.iter().map(|x| x + 1).collect(), dir: ring.vars()[a].clone() }, mono));
                    }
                }
            }
            (PolyDerivationAlgebra::ideal(&i.phis), e, i.max_arity)
        }
    };
    let ring = alg.ring.clone();
    let gens: Vec<Generator> =
        entries.iter().map(|(l, m)| Generator { label: l.clone(), degree: alg.bracket_degree(m) }).collect();
    let basis = GradedBasis::new(gens).expect("distinct scaffold labels");
    let by_label: BTreeMap<String, Mono> = entries.iter().map(|(l, m)| (l.to_string(), m.clone())).collect();
    let monos: Vec<Mono> = (0..basis.len()).map(|g| by_label[basis.name(g)].clone()).collect();
    let lookup = index_monos(&monos);
    let mut d = vec![ModElt::zero(); basis.len()];
    for (g, dg) in d.iter_mut().enumerate() {
        for (m, f) in alg.bracket(&[monos[g].clone()]) {
            dg.add_term(lookup[&m], &f);
        }
    }
    let complex = Complex::new(ring, basis, d, vec![Derivation::zero(); monos.len()]);
    let tables = tables_from_algebra(&alg, &complex.basis, &monos, &lookup, max_arity);
    let mut s = OidStructure::new(complex, max_arity);
    s.rho = vec![Derivation::zero(); monos.len()];
    for t in tables {
        s.set_bracket(t);
    }
    s
}

/// Higher Jacobi residuals of the Poisson infinity-algebra on every word
/// up to the requested arity.
pub fn poisson_infinity_check(spec: FamilySpec<'_>) -> (OidStructure, Vec<BracketResidual>) {
    let s = poisson_scaffold(spec);
    let mut out = Vec::new();
    for n in 1..=s.max_arity_stored {
        for w in words_of_arity(s.basis(), n) {
            let r = s.jacobi_on_word(w.factors());
            if !r.is_zero() {
                out.push(BracketResidual { arity: n, word: w, kind: ResidualKind::Jacobi, value: ResidualValue::Module(r) });
            }
        }
    }
    (s, out)
}

/// Looks up a word given by labels; panics on unknown labels.
pub fn word(s: &OidStructure, labels: &[&str]) -> (SymWord, i32) {
    let ids: Vec<usize> = labels.iter().map(|l| s.basis().lookup(l).expect("known label")).collect();
    SymWord::normalize(s.basis(), &ids).expect("nonzero word")
}
