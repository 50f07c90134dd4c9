//! Free graded modules with named generators, the complexes `(E, d, pi)`
//! built on them, and exact homology per weight slice.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::linalg::{Elimination, SparseMatrix};
use crate::polyring::{exp_degree, graded_piece_basis, Exp, Poly, PolyError, Q, Ring};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChainError {
    #[error("duplicate generator label `{0}`")]
    DuplicateLabel(String),
    #[error("unknown generator `{0}`")]
    UnknownLabel(String),
    #[error("malformed label `{0}`")]
    BadLabel(String),
    #[error("no weight grading makes the differential homogeneous (at generator `{0}`)")]
    NonHomogeneous(String),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// Generator names.  Koszul generators `dP[1,2]` are wedges of coordinate
/// vector fields (1-based indices); ideal generators `mu[1,3]@x` are
/// `mu_1 mu_3 (x) d/dx`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Koszul(Vec<usize>),
    Ideal { mu: Vec<usize>, dir: String },
    Opaque(String),
}

fn parse_index_list(s: &str) -> Option<Vec<usize>> {
    let inner = s.strip_prefix('[')?.strip_suffix(']')?;
    if inner.trim().is_empty() {
        return Some(Vec::new());
    }
    inner.split(',').map(|t| t.trim().parse().ok()).collect()
}

impl Label {
    pub fn parse(s: &str) -> Result<Label, ChainError> {
        let s = s.trim();
        if s.is_empty() || s.contains(" . ") {
            return Err(ChainError::BadLabel(s.to_string()));
        }
        if let Some(rest) = s.strip_prefix("dP") {
            return parse_index_list(rest).map(Label::Koszul).ok_or_else(|| ChainError::BadLabel(s.to_string()));
        }
        if let Some(rest) = s.strip_prefix("mu") {
            let (idx, dir) = rest.split_once('@').ok_or_else(|| ChainError::BadLabel(s.to_string()))?;
            let mu = parse_index_list(idx).ok_or_else(|| ChainError::BadLabel(s.to_string()))?;
            if dir.is_empty() {
                return Err(ChainError::BadLabel(s.to_string()));
            }
            return Ok(Label::Ideal { mu, dir: dir.to_string() });
        }
        Ok(Label::Opaque(s.to_string()))
    }
}

fn join_indices(v: &[usize]) -> String {
    v.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",")
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Koszul(i) => write!(f, "dP[{}]", join_indices(i)),
            Label::Ideal { mu, dir } => write!(f, "mu[{}]@{}", join_indices(mu), dir),
            Label::Opaque(s) => write!(f, "{s}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Generator {
    pub label: Label,
    pub degree: i32,
}

/// Generators sorted by degree (−1 first, then −2, ...), keeping the given
/// order inside a degree.  Generator ids are positions in this list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedBasis {
    gens: Vec<Generator>,
    names: Vec<String>,
    index: HashMap<String, usize>,
    by_degree: BTreeMap<i32, Vec<usize>>,
}

impl GradedBasis {
    pub fn new(mut gens: Vec<Generator>) -> Result<GradedBasis, ChainError> {
        gens.sort_by_key(|g| std::cmp::Reverse(g.degree));
        let names: Vec<String> = gens.iter().map(|g| g.label.to_string()).collect();
        let mut index = HashMap::new();
        let mut by_degree: BTreeMap<i32, Vec<usize>> = BTreeMap::new();
        for (i, n) in names.iter().enumerate() {
            if index.insert(n.clone(), i).is_some() {
                return Err(ChainError::DuplicateLabel(n.clone()));
            }
            by_degree.entry(gens[i].degree).or_default().push(i);
        }
        Ok(GradedBasis { gens, names, index, by_degree })
    }

    pub fn len(&self) -> usize {
        self.gens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gens.is_empty()
    }

    pub fn generator(&self, g: usize) -> &Generator {
        &self.gens[g]
    }

    pub fn name(&self, g: usize) -> &str {
        &self.names[g]
    }

    pub fn degree(&self, g: usize) -> i32 {
        self.gens[g].degree
    }

    pub fn is_odd(&self, g: usize) -> bool {
        self.gens[g].degree % 2 != 0
    }

    pub fn find(&self, label: &str) -> Option<usize> {
        self.index.get(label.trim()).copied()
    }

    pub fn lookup(&self, label: &str) -> Result<usize, ChainError> {
        self.find(label).ok_or_else(|| ChainError::UnknownLabel(label.to_string()))
    }

    pub fn in_degree(&self, degree: i32) -> &[usize] {
        self.by_degree.get(&degree).map(|v| v.as_slice()).unwrap_or(&[])
    }

    /// Degrees that carry generators, from the top (closest to zero) down.
    pub fn degrees(&self) -> impl Iterator<Item = i32> + '_ {
        self.by_degree.keys().rev().copied()
    }

    pub fn min_degree(&self) -> Option<i32> {
        self.by_degree.keys().next().copied()
    }
}

/// A finite combination `sum f_g g` of basis generators.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ModElt {
    terms: BTreeMap<usize, Poly>,
}

impl ModElt {
    pub fn zero() -> ModElt {
        ModElt::default()
    }

    pub fn generator(g: usize, ring: &Ring) -> ModElt {
        ModElt::term(g, Poly::one(ring))
    }

    pub fn term(g: usize, f: Poly) -> ModElt {
        let mut m = ModElt::zero();
        m.add_term(g, &f);
        m
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &Poly)> {
        self.terms.iter().map(|(&g, p)| (g, p))
    }

    pub fn coeff(&self, g: usize) -> Option<&Poly> {
        self.terms.get(&g)
    }

    /// `self += f * g`.
    pub fn add_term(&mut self, g: usize, f: &Poly) {
        if f.is_zero() {
            return;
        }
        match self.terms.get_mut(&g) {
            Some(p) => {
                p.add_scaled(&Q::one(), f);
                if p.is_zero() {
                    self.terms.remove(&g);
                }
            }
            None => {
                self.terms.insert(g, f.clone());
            }
        }
    }

    /// `self += c * f * g`.
    pub fn add_term_scaled(&mut self, g: usize, c: &Q, f: &Poly) {
        if f.is_zero() || c.is_zero() {
            return;
        }
        match self.terms.get_mut(&g) {
            Some(p) => {
                p.add_scaled(c, f);
                if p.is_zero() {
                    self.terms.remove(&g);
                }
            }
            None => {
                self.terms.insert(g, f.scale(c));
            }
        }
    }

    /// `self += c * other`.
    pub fn add_scaled(&mut self, c: &Q, other: &ModElt) {
        for (g, f) in other.iter() {
            self.add_term_scaled(g, c, f);
        }
    }

    /// `self += sign * other` for a sign in {+1, -1}.
    pub fn add_signed(&mut self, sign: i32, other: &ModElt) {
        let c = if sign < 0 { -Q::one() } else { Q::one() };
        self.add_scaled(&c, other);
    }

    /// `self += c * h * other`.
    pub fn add_mul(&mut self, c: &Q, h: &Poly, other: &ModElt) {
        if c.is_zero() || h.is_zero() {
            return;
        }
        for (g, f) in other.iter() {
            let mut prod = Poly::zero(f.ring());
            prod.add_product(h, f);
            self.add_term_scaled(g, c, &prod);
        }
    }

    pub fn scale(&self, c: &Q) -> ModElt {
        let mut m = ModElt::zero();
        m.add_scaled(c, self);
        m
    }

    pub fn mul_poly(&self, h: &Poly) -> ModElt {
        let mut m = ModElt::zero();
        m.add_mul(&Q::one(), h, self);
        m
    }

    pub fn neg(&self) -> ModElt {
        self.scale(&-Q::one())
    }

    pub fn map_coeffs(&self, mut f: impl FnMut(&Poly) -> Poly) -> ModElt {
        let mut m = ModElt::zero();
        for (g, p) in self.iter() {
            m.add_term(g, &f(p));
        }
        m
    }

    pub fn try_map_coeffs<E>(&self, mut f: impl FnMut(&Poly) -> Result<Poly, E>) -> Result<ModElt, E> {
        let mut m = ModElt::zero();
        for (g, p) in self.iter() {
            m.add_term(g, &f(p)?);
        }
        Ok(m)
    }

    pub fn display(&self, basis: &GradedBasis) -> String {
        if self.is_zero() {
            return "0".into();
        }
        self.iter().map(|(g, f)| format!("({f})*{}", basis.name(g))).collect::<Vec<_>>().join(" + ")
    }
}

/// A derivation `sum_a f_a d/dx_a` of the ambient polynomial ring.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Derivation {
    coeffs: BTreeMap<usize, Poly>,
}

impl Derivation {
    pub fn zero() -> Derivation {
        Derivation::default()
    }

    pub fn partial(ring: &Ring, a: usize) -> Derivation {
        let mut d = Derivation::zero();
        d.add_term(a, &Poly::one(ring));
        d
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &Poly)> {
        self.coeffs.iter().map(|(&a, p)| (a, p))
    }

    pub fn coeff(&self, a: usize) -> Option<&Poly> {
        self.coeffs.get(&a)
    }

    pub fn add_term(&mut self, a: usize, f: &Poly) {
        if f.is_zero() {
            return;
        }
        let e = self.coeffs.entry(a).or_insert_with(|| Poly::zero(f.ring()));
        e.add_scaled(&Q::one(), f);
        if e.is_zero() {
            self.coeffs.remove(&a);
        }
    }

    /// `self += c * h * other`.
    pub fn add_mul(&mut self, c: &Q, h: &Poly, other: &Derivation) {
        for (a, f) in other.iter() {
            let mut prod = Poly::zero(f.ring());
            prod.add_product(h, f);
            self.add_term(a, &prod.scale(c));
        }
    }

    pub fn add_scaled(&mut self, c: &Q, other: &Derivation) {
        for (a, f) in other.iter() {
            self.add_term(a, &f.scale(c));
        }
    }

    pub fn mul_poly(&self, h: &Poly) -> Derivation {
        let mut d = Derivation::zero();
        d.add_mul(&Q::one(), h, self);
        d
    }

    /// `X[f]`.
    pub fn apply(&self, f: &Poly) -> Poly {
        let mut out = Poly::zero(f.ring());
        for (a, c) in self.iter() {
            let df = f.partial(a);
            if !df.is_zero() {
                out.add_product(c, &df);
            }
        }
        out
    }

    /// The commutator `[X, Y] = X Y - Y X`.
    pub fn bracket(&self, other: &Derivation) -> Derivation {
        let mut out = Derivation::zero();
        for (b, g) in other.iter() {
            out.add_term(b, &self.apply(g));
        }
        for (b, f) in self.iter() {
            out.add_term(b, &-other.apply(f));
        }
        out
    }

    pub fn map_coeffs(&self, mut f: impl FnMut(&Poly) -> Poly) -> Derivation {
        let mut d = Derivation::zero();
        for (a, p) in self.iter() {
            d.add_term(a, &f(p));
        }
        d
    }

    pub fn try_map_coeffs<E>(&self, mut f: impl FnMut(&Poly) -> Result<Poly, E>) -> Result<Derivation, E> {
        let mut d = Derivation::zero();
        for (a, p) in self.iter() {
            d.add_term(a, &f(p)?);
        }
        Ok(d)
    }

    pub fn display(&self, ring: &Ring) -> String {
        if self.is_zero() {
            return "0".into();
        }
        self.iter().map(|(a, f)| format!("({f})*d/d{}", ring.vars()[a])).collect::<Vec<_>>().join(" + ")
    }
}

/// A free complex `... -> E_{-2} -> E_{-1} -> Der(O)` with differential `d`
/// and hook `pi` (stored per generator id; `pi` only on degree −1).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Complex {
    pub ring: Ring,
    pub basis: GradedBasis,
    pub d: Vec<ModElt>,
    pub pi: Vec<Derivation>,
}

impl Complex {
    pub fn new(ring: Ring, basis: GradedBasis, d: Vec<ModElt>, pi: Vec<Derivation>) -> Complex {
        assert_eq!(d.len(), basis.len());
        assert_eq!(pi.len(), basis.len());
        Complex { ring, basis, d, pi }
    }

    /// The complex with no generators.
    pub fn empty(ring: Ring) -> Complex {
        Complex::new(ring, GradedBasis::new(Vec::new()).expect("empty basis"), Vec::new(), Vec::new())
    }

    pub fn apply_d(&self, x: &ModElt) -> ModElt {
        let mut out = ModElt::zero();
        for (g, f) in x.iter() {
            out.add_mul(&Q::one(), f, &self.d[g]);
        }
        out
    }

    pub fn apply_pi(&self, x: &ModElt) -> Derivation {
        let mut out = Derivation::zero();
        for (g, f) in x.iter() {
            out.add_mul(&Q::one(), f, &self.pi[g]);
        }
        out
    }

    /// Integer weights on generators such that variables weigh 1, `d/dx_a`
    /// weighs −1 and both `d` and `pi` preserve weight.
    pub fn weights(&self) -> Result<Vec<i64>, ChainError> {
        let n = self.basis.len();
        let mut fixed: Vec<Option<i64>> = vec![None; n];
        let mut edges: Vec<Vec<(usize, i64)>> = vec![Vec::new(); n];
        let bad = |g: usize| ChainError::NonHomogeneous(self.basis.name(g).to_string());
        for g in 0..n {
            for (_, f) in self.pi[g].iter() {
                for (e, _) in f.terms() {
                    let w = exp_degree(e) as i64 - 1;
                    match fixed[g] {
                        None => fixed[g] = Some(w),
                        Some(v) if v != w => return Err(bad(g)),
                        _ => {}
                    }
                }
            }
            for (h, f) in self.d[g].iter() {
                for (e, _) in f.terms() {
                    let off = exp_degree(e) as i64;
                    edges[g].push((h, off));
                    edges[h].push((g, -off));
                }
            }
        }
        let mut weight: Vec<Option<i64>> = vec![None; n];
        let mut queue = VecDeque::new();
        for g in 0..n {
            if let Some(w) = fixed[g] {
                weight[g] = Some(w);
                queue.push_back(g);
            }
        }
        let mut next_root = 0;
        loop {
            while let Some(g) = queue.pop_front() {
                let wg = weight[g].expect("queued generators carry a weight");
                for &(h, off) in &edges[g] {
                    let wh = wg - off;
                    match weight[h] {
                        None => {
                            weight[h] = Some(wh);
                            queue.push_back(h);
                        }
                        Some(v) if v != wh => return Err(bad(h)),
                        _ => {}
                    }
                }
            }
            while next_root < n && weight[next_root].is_some() {
                next_root += 1;
            }
            if next_root == n {
                break;
            }
            weight[next_root] = Some(0);
            queue.push_back(next_root);
        }
        Ok(weight.into_iter().map(|w| w.expect("all generators weighted")).collect())
    }
}

/// `iota_{d phi}` on the wedge `d_{i_1} ^ ... ^ d_{i_k}` (0-based indices):
/// `sum_s (-1)^(s-1) phi_{i_s} d_{... omit s ...}`.
pub fn koszul_contraction(phi: &Poly, indices: &[usize]) -> Vec<(Vec<usize>, Poly)> {
    let mut out = Vec::new();
    for s in 0..indices.len() {
        let mut rest = indices.to_vec();
        rest.remove(s);
        let mut c = phi.partial(indices[s]);
        if s % 2 == 1 {
            c = -c;
        }
        if !c.is_zero() {
            out.push((rest, c));
        }
    }
    out
}

pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

fn one_based(v: &[usize]) -> Vec<usize> {
    v.iter().map(|i| i + 1).collect()
}

/// The Koszul complex of `d phi`, truncated of its degree 0 term:
/// `E_{-i}` is spanned by the `(i+1)`-vector fields, `d` is the contraction
/// with `d phi` and the hook sends `d_i ^ d_j` to `phi_j d_i - phi_i d_j`.
pub fn koszul_complex(phi: &Poly) -> Complex {
    let ring = phi.ring().clone();
    let n = ring.nvars();
    let mut gens = Vec::new();
    for k in 2..=n {
        for s in subsets(n, k) {
            gens.push(Generator { label: Label::Koszul(one_based(&s)), degree: 1 - k as i32 });
        }
    }
    let basis = GradedBasis::new(gens).expect("distinct Koszul labels");
    let mut d = vec![ModElt::zero(); basis.len()];
    let mut pi = vec![Derivation::zero(); basis.len()];
    for g in 0..basis.len() {
        let Label::Koszul(idx) = &basis.generator(g).label else { unreachable!() };
        let zero_based: Vec<usize> = idx.iter().map(|i| i - 1).collect();
        for (rest, c) in koszul_contraction(phi, &zero_based) {
            if rest.len() >= 2 {
                let h = basis.find(&Label::Koszul(one_based(&rest)).to_string()).expect("face exists");
                d[g].add_term(h, &c);
            } else {
                pi[g].add_term(rest[0], &-c);
            }
        }
    }
    Complex::new(ring, basis, d, pi)
}

/// `K_- (x) Der(O)` for the Koszul complex `K` of the sequence `phis`:
/// generators `mu_I (x) d/dx_a` in degree `-|I|`, differential
/// `sum_i phi_i d/dmu_i`, hook `mu_i (x) d/dx_a -> phi_i d/dx_a`.
pub fn ideal_complex(phis: &[Poly]) -> Complex {
    assert!(!phis.is_empty(), "ideal_complex needs at least one generator");
    let ring = phis[0].ring().clone();
    let n = ring.nvars();
    let m = phis.len();
    let mut gens = Vec::new();
    for j in 1..=m {
        for s in subsets(m, j) {
            for a in 0..n {
                gens.push(Generator {
                    label: Label::Ideal { mu: one_based(&s), dir: ring.vars()[a].clone() },
                    degree: -(j as i32),
                });
            }
        }
    }
    let basis = GradedBasis::new(gens).expect("distinct ideal labels");
    let mut d = vec![ModElt::zero(); basis.len()];
    let mut pi = vec![Derivation::zero(); basis.len()];
    for g in 0..basis.len() {
        let Label::Ideal { mu, dir } = &basis.generator(g).label else { unreachable!() };
        let a = ring.index_of(dir).expect("direction is a ring variable");
        if mu.len() == 1 {
            pi[g].add_term(a, &phis[mu[0] - 1]);
            continue;
        }
        for p in 0..mu.len() {
            let mut rest = mu.clone();
            let i = rest.remove(p);
            let label = Label::Ideal { mu: rest, dir: dir.clone() }.to_string();
            let h = basis.find(&label).expect("face exists");
            let c = if p % 2 == 0 { phis[i - 1].clone() } else { -&phis[i - 1] };
            d[g].add_term(h, &c);
        }
    }
    Complex::new(ring, basis, d, pi)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    /// `d(d g) != 0`
    DSquared(ModElt),
    /// `pi(d g) != 0`
    HookOfD(Derivation),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComplexViolation {
    pub generator: String,
    pub kind: ViolationKind,
}

pub fn verify_complex(c: &Complex) -> Vec<ComplexViolation> {
    let mut out = Vec::new();
    for g in 0..c.basis.len() {
        let dg = &c.d[g];
        let dd = c.apply_d(dg);
        if !dd.is_zero() {
            out.push(ComplexViolation { generator: c.basis.name(g).to_string(), kind: ViolationKind::DSquared(dd) });
        }
        let pd = c.apply_pi(dg);
        if !pd.is_zero() {
            out.push(ComplexViolation { generator: c.basis.name(g).to_string(), kind: ViolationKind::HookOfD(pd) });
        }
    }
    out
}

/// The finite-dimensional piece of weight `w` of a free module: pairs
/// (generator or variable index, monomial).
#[derive(Clone, Debug, Default)]
pub struct Slice {
    pub entries: Vec<(usize, Exp)>,
    index: HashMap<(usize, Exp), usize>,
}

impl Slice {
    fn from_entries(entries: Vec<(usize, Exp)>) -> Slice {
        let index = entries.iter().cloned().enumerate().map(|(i, k)| (k, i)).collect();
        Slice { entries, index }
    }

    /// Weight-`w` piece of `E_degree`.
    pub fn module(c: &Complex, weights: &[i64], degree: i32, w: i64) -> Slice {
        let mut entries = Vec::new();
        for &g in c.basis.in_degree(degree) {
            let m = w - weights[g];
            if m < 0 {
                continue;
            }
            for e in graded_piece_basis(c.ring.nvars(), m as u32) {
                entries.push((g, e));
            }
        }
        Slice::from_entries(entries)
    }

    /// Weight-`w` piece of `Der(O)`.
    pub fn vector_fields(ring: &Ring, w: i64) -> Slice {
        let mut entries = Vec::new();
        if w + 1 >= 0 {
            for a in 0..ring.nvars() {
                for e in graded_piece_basis(ring.nvars(), (w + 1) as u32) {
                    entries.push((a, e));
                }
            }
        }
        Slice::from_entries(entries)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn position(&self, key: usize, e: &Exp) -> Option<usize> {
        self.index.get(&(key, e.clone())).copied()
    }
}

fn shift(e: &Exp, by: &Exp) -> Exp {
    e.iter().zip(by.iter()).map(|(a, b)| a + b).collect()
}

/// Matrix of `d: E_degree -> E_{degree+1}` on weight `w`, or of `pi` when
/// `degree == -1`.  Returns the matrix with its source and target slices.
pub fn outgoing_matrix(c: &Complex, weights: &[i64], degree: i32, w: i64) -> (SparseMatrix, Slice, Slice) {
    let src = Slice::module(c, weights, degree, w);
    let dst = if degree == -1 { Slice::vector_fields(&c.ring, w) } else { Slice::module(c, weights, degree + 1, w) };
    let mut m = SparseMatrix::new(dst.len(), src.len());
    for (col, (g, e)) in src.entries.iter().enumerate() {
        if degree == -1 {
            for (a, f) in c.pi[*g].iter() {
                for (fe, q) in f.terms() {
                    let row = dst.position(a, &shift(e, fe)).expect("hook is weight homogeneous");
                    m.add(row, col, q);
                }
            }
        } else {
            for (h, f) in c.d[*g].iter() {
                for (fe, q) in f.terms() {
                    let row = dst.position(h, &shift(e, fe)).expect("differential is weight homogeneous");
                    m.add(row, col, q);
                }
            }
        }
    }
    (m, src, dst)
}

/// Ranks of `H_{degree}` on every weight slice up to `weight_cap` for all
/// degrees carrying generators.  At degree −1 the outgoing map is `pi`.
pub fn homology_dims(c: &Complex, weight_cap: i64) -> Result<BTreeMap<(i32, i64), usize>, ChainError> {
    let weights = c.weights()?;
    let mut out = BTreeMap::new();
    for degree in c.basis.degrees() {
        let gens = c.basis.in_degree(degree);
        let lo = gens.iter().map(|&g| weights[g]).min().unwrap_or(0);
        for w in lo..=weight_cap {
            let (m_out, src, _) = outgoing_matrix(c, &weights, degree, w);
            if src.is_empty() {
                continue;
            }
            let rank_out = Elimination::new(m_out).rank();
            let rank_in = if c.basis.in_degree(degree - 1).is_empty() {
                0
            } else {
                Elimination::new(outgoing_matrix(c, &weights, degree - 1, w).0).rank()
            };
            out.insert((degree, w), src.len() - rank_out - rank_in);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring3() -> Ring {
        Ring::new(["x", "y", "z"])
    }

    #[test]
    fn labels_roundtrip() {
        for s in ["dP[1,2]", "mu[1,3]@x", "e7"] {
            assert_eq!(Label::parse(s).unwrap().to_string(), s);
        }
        assert!(Label::parse("dP[1,").is_err());
        assert!(Label::parse("mu[1]@").is_err());
    }

    #[test]
    fn contraction_of_a_bivector() {
        let r = Ring::new(["x", "y"]);
        let phi = Poly::parse("x^2+y^2", &r).unwrap();
        let terms = koszul_contraction(&phi, &[0, 1]);
        assert_eq!(terms, vec![(vec![1], Poly::parse("2*x", &r).unwrap()), (vec![0], Poly::parse("-2*y", &r).unwrap())]);
        let c = koszul_complex(&phi);
        assert_eq!(c.basis.in_degree(-1).len(), 1);
        assert!(c.basis.in_degree(-2).is_empty());
        let pi = &c.pi[0];
        assert_eq!(pi.coeff(0), Some(&Poly::parse("2*y", &r).unwrap()));
        assert_eq!(pi.coeff(1), Some(&Poly::parse("-2*x", &r).unwrap()));
    }

    #[test]
    fn koszul_differential_on_top_generator() {
        let r = ring3();
        let c = koszul_complex(&Poly::parse("x^3+y^3+z^3", &r).unwrap());
        let top = c.basis.lookup("dP[1,2,3]").unwrap();
        let mut want = ModElt::zero();
        want.add_term(c.basis.lookup("dP[2,3]").unwrap(), &Poly::parse("3*x^2", &r).unwrap());
        want.add_term(c.basis.lookup("dP[1,3]").unwrap(), &Poly::parse("-3*y^2", &r).unwrap());
        want.add_term(c.basis.lookup("dP[1,2]").unwrap(), &Poly::parse("3*z^2", &r).unwrap());
        assert_eq!(c.d[top], want);
        assert!(verify_complex(&c).is_empty());
    }

    #[test]
    fn ideal_complex_examples() {
        let r = Ring::new(["x", "y"]);
        let p = |s: &str| Poly::parse(s, &r).unwrap();
        let c = ideal_complex(&[p("x^2"), p("y^2")]);
        let g = c.basis.lookup("mu[1,2]@x").unwrap();
        let mut want = ModElt::zero();
        want.add_term(c.basis.lookup("mu[2]@x").unwrap(), &p("x^2"));
        want.add_term(c.basis.lookup("mu[1]@x").unwrap(), &p("-y^2"));
        assert_eq!(c.d[g], want);
        let h = c.basis.lookup("mu[1]@y").unwrap();
        assert_eq!(c.pi[h], Derivation::partial(&r, 1).mul_poly(&p("x^2")));

        let single = ideal_complex(&[p("x*y+1")]);
        assert!(single.basis.in_degree(-2).is_empty());
        let gx = single.basis.lookup("mu[1]@x").unwrap();
        assert_eq!(single.pi[gx], Derivation::partial(&r, 0).mul_poly(&p("x*y+1")));

        assert!(verify_complex(&ideal_complex(&[p("x^2"), p("x*y"), p("y^2")])).is_empty());
    }

    #[test]
    fn corrupted_differential_is_reported() {
        let r = ring3();
        let mut c = koszul_complex(&Poly::parse("x^3+y^3+z^3", &r).unwrap());
        let top = c.basis.lookup("dP[1,2,3]").unwrap();
        let e12 = c.basis.lookup("dP[1,2]").unwrap();
        c.d[top].add_term(e12, &Poly::var(&r, 0));
        let v = verify_complex(&c);
        assert!(!v.is_empty());
        assert!(v.iter().all(|x| x.generator == "dP[1,2,3]"));
    }

    #[test]
    fn weights_are_inferred() {
        let r = ring3();
        let c = koszul_complex(&Poly::parse("x^3+y^3+z^3", &r).unwrap());
        let w = c.weights().unwrap();
        assert_eq!(w[c.basis.lookup("dP[1,2]").unwrap()], 1);
        assert_eq!(w[c.basis.lookup("dP[1,2,3]").unwrap()], 3);
        let bad = koszul_complex(&Poly::parse("x^2*y+z^2", &r).unwrap());
        assert!(matches!(bad.weights(), Err(ChainError::NonHomogeneous(_))));
        assert!(homology_dims(&bad, 3).is_err());
    }

    #[test]
    fn koszul_homology_vanishes_for_a_regular_gradient() {
        let r = ring3();
        let c = koszul_complex(&Poly::parse("x^2+y^2+z^2", &r).unwrap());
        let h = homology_dims(&c, 6).unwrap();
        assert!(!h.is_empty());
        assert!(h.values().all(|&k| k == 0), "{h:?}");
        assert!(homology_dims(&Complex::empty(r), 4).unwrap().is_empty());
    }

    #[test]
    fn nonregular_ideal_has_homology_in_degree_minus_one() {
        let r = Ring::new(["x", "y"]);
        let p = |s: &str| Poly::parse(s, &r).unwrap();
        let c = ideal_complex(&[p("x^2"), p("x*y"), p("y^2")]);
        let h = homology_dims(&c, 6).unwrap();
        assert!(h.iter().any(|(&(d, _), &k)| d == -1 && k > 0));
        assert!(h.iter().filter(|(&(d, _), _)| d <= -2).all(|(_, &k)| k == 0));
    }

    #[test]
    fn derivation_bracket_matches_formula() {
        let r = Ring::new(["x", "y"]);
        let p = |s: &str| Poly::parse(s, &r).unwrap();
        let (phi_i, phi_j) = (p("x^2"), p("x*y"));
        let xa = Derivation::partial(&r, 0).mul_poly(&phi_i);
        let yb = Derivation::partial(&r, 1).mul_poly(&phi_j);
        let mut want = Derivation::partial(&r, 1).mul_poly(&(&phi_j.partial(0) * &phi_i));
        want.add_mul(&-Q::one(), &(&phi_i.partial(1) * &phi_j), &Derivation::partial(&r, 0));
        assert_eq!(xa.bracket(&yb), want);
    }
}
