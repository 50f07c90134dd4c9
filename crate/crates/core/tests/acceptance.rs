//! One PASS/FAIL line per acceptance criterion.  All comparisons are exact.
//! Runs without the test harness: `cargo test -p oidkit --test acceptance`.

use std::time::Instant;

use num_bigint::BigInt;
use num_traits::One;
use rand::{rngs::StdRng, Rng, SeedableRng};

use oidkit::chain::{
    homology_dims, ideal_complex, koszul_complex, verify_complex, Complex, Generator, GradedBasis, Label, ModElt,
};
use oidkit::families::{build_ideal_oid, build_koszul_oid, IdealSpec, KoszulSpec};
use oidkit::io;
use oidkit::morphisms::{apply_multilinear, check_morphism, construct_morphism, homotopy_step, TaylorCoderivation};
use oidkit::oid::{rn_bracket, OidStructure, Table};
use oidkit::pages::{construct_structure, Page, PageElement};
use oidkit::polyring::{MonomialOrder, Poly, Q, Ring};
use oidkit::symwords::{signed_shuffles, words_of_arity, Factors, SymElt, SymWord};

type Outcome = Result<String, String>;

const KOSZUL_PHIS: [&str; 4] = ["x^2+y^2+z^2", "x^3+y^3+z^3", "x*y*z", "x^2*y+z^2"];

fn ring3() -> Ring {
    Ring::new(["x", "y", "z"])
}

fn koszul(phi: &str, max_arity: usize) -> OidStructure {
    let ring = ring3();
    build_koszul_oid(&KoszulSpec { phi: Poly::parse(phi, &ring).unwrap(), max_arity })
}

fn quartic() -> OidStructure {
    let ring = Ring::new(["x", "y", "z", "w"]);
    build_koszul_oid(&KoszulSpec { phi: Poly::parse("x^4+y^4+z^4+w^4+x*y*z*w", &ring).unwrap(), max_arity: 3 })
}

fn ideal(vars: &[&str], phis: &[&str], max_arity: usize) -> OidStructure {
    let ring = Ring::new(vars.iter().copied());
    let phis = phis.iter().map(|p| Poly::parse(p, &ring).unwrap()).collect();
    build_ideal_oid(&IdealSpec { phis, max_arity })
}

fn axioms(s: &OidStructure, n: usize, what: &str) -> Result<(), String> {
    let res = s.verify_axioms(n).map_err(|e| e.to_string())?;
    match res.first() {
        None => Ok(()),
        Some(r) => Err(format!("{what}: {} residuals, first {}", res.len(), r.describe(s))),
    }
}

fn criterion_1() -> Outcome {
    for phi in KOSZUL_PHIS {
        axioms(&koszul(phi, 4), 4, phi)?;
    }
    Ok("four Koszul structures, arity 4, zero residuals".into())
}

fn criterion_2() -> Outcome {
    let mut complexes: Vec<(String, Complex)> = Vec::new();
    let ring = ring3();
    for phi in KOSZUL_PHIS {
        complexes.push((phi.into(), koszul_complex(&Poly::parse(phi, &ring).unwrap())));
    }
    let two = Ring::new(["x", "y"]);
    for phis in [vec!["x^2", "x*y", "y^2"], vec!["x^2+y^2"], vec!["x", "y"]] {
        let ps: Vec<Poly> = phis.iter().map(|p| Poly::parse(p, &two).unwrap()).collect();
        complexes.push((phis.join(";"), ideal_complex(&ps)));
    }
    for (name, c) in &complexes {
        if let Some(v) = verify_complex(c).first() {
            return Err(format!("{name}: {:?} at {}", v.kind, v.generator));
        }
    }
    let c = koszul_complex(&Poly::parse("x^2+y^2+z^2", &ring).unwrap());
    let dims = homology_dims(&c, 8).map_err(|e| e.to_string())?;
    if let Some(((d, w), r)) = dims.iter().find(|((d, _), r)| *d <= -1 && **r > 0) {
        return Err(format!("H_{d} weight {w} has rank {r}"));
    }
    Ok(format!("{} complexes with d^2 = 0 and pi d = 0; quadric acyclic to weight 8", complexes.len()))
}

fn hook_and_anchor(s: &OidStructure, what: &str) -> Result<usize, String> {
    let b = s.basis();
    let e1 = b.in_degree(-1);
    let mut pairs = 0;
    for (i, &x) in e1.iter().enumerate() {
        for &y in &e1[i + 1..] {
            let l2 = s.bracket_gens(&[x, y]);
            if s.apply_rho(&l2) != s.rho[x].bracket(&s.rho[y]) {
                return Err(format!("{what}: anchor fails on [{} . {}]", b.name(x), b.name(y)));
            }
            let pi = &s.complex.pi;
            if s.complex.apply_pi(&l2) != pi[x].bracket(&pi[y]) {
                return Err(format!("{what}: hook fails on [{} . {}]", b.name(x), b.name(y)));
            }
            pairs += 1;
        }
    }
    Ok(pairs)
}

fn criterion_3() -> Outcome {
    let mut shipped: Vec<(String, OidStructure)> = KOSZUL_PHIS.iter().map(|p| (p.to_string(), koszul(p, 2))).collect();
    shipped.push(("x^2;x*y;y^2".into(), ideal(&["x", "y"], &["x^2", "x*y", "y^2"], 2)));
    shipped.push(("x^2+y^2".into(), ideal(&["x", "y"], &["x^2+y^2"], 2)));
    shipped.push(("quartic".into(), quartic()));
    let chi = Poly::parse("x", &ring3()).unwrap();
    shipped.push(("twist by x".into(), koszul("x^3+y^3+z^3", 2).chi_twist(&chi).map_err(|e| e.to_string())?));
    let mut pairs = 0;
    for (what, s) in &shipped {
        pairs += hook_and_anchor(s, what)?;
    }
    Ok(format!("{pairs} degree -1 pairs over {} structures", shipped.len()))
}

/// Generators a (degree −1) and b (degree −2) over Q[x, y].
fn two_generator_basis() -> (Ring, GradedBasis) {
    let ring = Ring::new(["x", "y"]);
    let basis = GradedBasis::new(vec![
        Generator { label: Label::Opaque("a".into()), degree: -1 },
        Generator { label: Label::Opaque("b".into()), degree: -2 },
    ])
    .unwrap();
    (ring, basis)
}

fn random_poly(rng: &mut StdRng, ring: &Ring) -> Poly {
    let mut p = Poly::zero(ring);
    for _ in 0..rng.gen_range(1..3) {
        let e = (0..ring.nvars()).map(|_| rng.gen_range(0..2u32)).collect();
        p.add_term(e, Q::from_integer(BigInt::from(rng.gen_range(-4..=4))));
    }
    p
}

fn random_table(rng: &mut StdRng, ring: &Ring, basis: &GradedBasis) -> Table {
    let arity = rng.gen_range(1..=2);
    let degree = rng.gen_range(-1..=2);
    let mut t = Table::new(arity, degree);
    for w in words_of_arity(basis, arity) {
        let target = w.degree(basis) + degree;
        let mut m = ModElt::zero();
        for &g in basis.in_degree(target) {
            if rng.gen_bool(0.7) {
                m.add_term(g, &random_poly(rng, ring));
            }
        }
        t.insert(w, m);
    }
    t
}

fn sign_q(s: i32) -> Q {
    Q::from_integer(BigInt::from(s))
}

fn koszul_sign(a: i32, b: i32) -> i32 {
    if a % 2 != 0 && b % 2 != 0 {
        -1
    } else {
        1
    }
}

/// The coderivation of `Sym E` with Taylor coefficient `t`, on a word.
fn coderivation(t: &Table, basis: &GradedBasis, w: &SymWord) -> SymElt {
    let f = w.factors();
    let mut out = SymElt::zero();
    if f.len() < t.arity {
        return out;
    }
    for (perm, sign) in signed_shuffles(&w.degrees(basis), t.arity) {
        let head: Factors = perm[..t.arity].iter().map(|&p| f[p]).collect();
        let rest: Factors = perm[t.arity..].iter().map(|&p| f[p]).collect();
        let v = t.eval(basis, &head);
        if v.is_zero() {
            continue;
        }
        let unit = Poly::one(v.iter().next().unwrap().1.ring());
        out.add_product(basis, &v, &rest, &sign_q(sign), &unit);
    }
    out
}

fn coderivation_on(t: &Table, basis: &GradedBasis, x: &SymElt) -> SymElt {
    let mut out = SymElt::zero();
    for (w, f) in x.iter() {
        for (v, g) in coderivation(t, basis, w).iter() {
            out.add_term(v.clone(), &Q::one(), &(f * g));
        }
    }
    out
}

/// Generators of degrees −1, −1, −2, −3 over Q[x, y], for the bracket laws.
fn four_generator_basis() -> (Ring, GradedBasis) {
    let ring = Ring::new(["x", "y"]);
    let gens = [("a", -1), ("b", -1), ("c", -2), ("e", -3)];
    let basis =
        GradedBasis::new(gens.iter().map(|(l, d)| Generator { label: Label::Opaque(l.to_string()), degree: *d }).collect()).unwrap();
    (ring, basis)
}

fn criterion_4() -> Outcome {
    let mut rng = StdRng::seed_from_u64(2024);
    let cap = 6;
    let (ring, basis) = four_generator_basis();
    let rn = |x: &Table, y: &Table| rn_bracket(&basis, x, y, None, cap).map_err(|e| e.to_string());
    let (mut nonzero, mut nested) = (0, 0);
    for sample in 0..100 {
        let a = random_table(&mut rng, &ring, &basis);
        let b = random_table(&mut rng, &ring, &basis);
        let c = random_table(&mut rng, &ring, &basis);
        let ab = rn(&a, &b)?;
        let ba = rn(&b, &a)?;
        let anti = ab.add_scaled(&sign_q(koszul_sign(a.degree, b.degree)), &ba);
        if !anti.is_empty() {
            return Err(format!("sample {sample}: antisymmetry fails"));
        }
        // [A,[B,C]] = [[A,B],C] + (-1)^(|A||B|) [B,[A,C]]
        let lhs = rn(&a, &rn(&b, &c)?)?;
        let rhs = rn(&ab, &c)?.add_scaled(&sign_q(koszul_sign(a.degree, b.degree)), &rn(&b, &rn(&a, &c)?)?);
        if !lhs.add_scaled(&-Q::one(), &rhs).is_empty() {
            return Err(format!("sample {sample}: graded Jacobi fails"));
        }
        nonzero += usize::from(!ab.is_empty());
        nested += usize::from(!lhs.is_empty());
    }
    if nonzero < 50 || nested < 20 {
        return Err(format!("random brackets too sparse: {nonzero} nonzero, {nested} nested"));
    }
    // coderivation correspondence on every word of up to four letters
    let (ring, basis) = two_generator_basis();
    let mut compared = 0;
    for sample in 0..100 {
        let a = random_table(&mut rng, &ring, &basis);
        let b = random_table(&mut rng, &ring, &basis);
        let ab = rn_bracket(&basis, &a, &b, None, cap).map_err(|e| e.to_string())?;
        let s = sign_q(-koszul_sign(a.degree, b.degree));
        for n in 1..=4 {
            for w in words_of_arity(&basis, n) {
                let mut lhs = coderivation_on(&a, &basis, &coderivation(&b, &basis, &w));
                lhs.add_scaled(&s, &coderivation_on(&b, &basis, &coderivation(&a, &basis, &w)));
                let rhs = coderivation(&ab, &basis, &w);
                if lhs != rhs {
                    return Err(format!("sample {sample}: coderivation bracket differs on [{}]", w.display(&basis)));
                }
                compared += usize::from(!rhs.is_zero());
            }
        }
    }
    Ok(format!(
        "100 random triples ({nonzero} nonzero, {nested} nested brackets); coderivations agree on {compared} nonzero words"
    ))
}

fn jacobiator_identities(s: &OidStructure, what: &str) -> Result<bool, String> {
    let b = s.basis();
    let l2 = s.bracket_table(2);
    let rn = rn_bracket(b, &l2, &l2, Some(&s.rho), 4).map_err(|e| e.to_string())?;
    let jac = s.jacobiator();
    let half = Q::new(BigInt::from(1), BigInt::from(2));
    if !rn.scale(&half).add_scaled(&-Q::one(), &jac).is_empty() {
        return Err(format!("{what}: Jac != [l2, l2]/2"));
    }
    let page = Page::endo(&s.complex);
    let jp = PageElement::from_table(&jac);
    if !page.is_closed(&jp).is_empty() {
        return Err(format!("{what}: Jac is not D-closed"));
    }
    let l3 = PageElement::from_table(&s.bracket_table(3));
    if !page.total_d(&l3).add_scaled(&Q::one(), &jp).is_zero() {
        return Err(format!("{what}: D(l3) != -Jac"));
    }
    Ok(!jac.is_empty())
}

fn criterion_5() -> Outcome {
    let cubic = jacobiator_identities(&koszul("x^3+y^3+z^3", 3), "x^3+y^3+z^3")?;
    let quartic = jacobiator_identities(&quartic(), "quartic in four variables")?;
    if !quartic {
        return Err("the four-variable Jacobiator should be nonzero".into());
    }
    Ok(format!("cubic (Jac nonzero: {cubic}) and four-variable quartic (Jac nonzero: {quartic})"))
}

fn criterion_6() -> Outcome {
    let ring = ring3();
    let c = koszul_complex(&Poly::parse("x^3+y^3+z^3", &ring).unwrap());
    let (s, _) = construct_structure(&c, None, 4, 12).map_err(|e| e.to_string())?;
    axioms(&s, 4, "constructed cubic")?;
    if s.complex != c {
        return Err("construction changed the complex".into());
    }
    for vars in [vec!["x", "y"], vec!["x", "y", "z"]] {
        let r = Ring::new(vars.iter().copied());
        let phis: Vec<Poly> = (0..r.nvars()).map(|i| Poly::var(&r, i)).collect();
        let (s, _) = construct_structure(&ideal_complex(&phis), None, 4, 8).map_err(|e| e.to_string())?;
        axioms(&s, 4, "coordinate ideal")?;
        let b = s.basis();
        for k in [3, 4] {
            if let Some((w, _)) = s.bracket_table(k).iter().find(|(w, _)| w.factors().iter().all(|&g| b.degree(g) == -1)) {
                return Err(format!("l_{k} nonzero on [{}]", w.display(b)));
            }
        }
    }
    Ok("cubic constructed to arity 4 at weight cap 12; l_3 = l_4 = 0 on degree -1 for coordinate ideals".into())
}

fn criterion_7() -> Outcome {
    for phi in KOSZUL_PHIS {
        let s = koszul(phi, 4);
        let f = Poly::parse(phi, s.ring()).unwrap();
        let r = s.restrict_mod(&f, &MonomialOrder::grlex(s.ring())).map_err(|e| e.to_string())?;
        axioms(&r, 4, phi)?;
    }
    Ok("four Koszul structures restricted modulo their own function".into())
}

fn criterion_8() -> Outcome {
    let structures = [("x^3+y^3+z^3", koszul("x^3+y^3+z^3", 4)), ("x^2;x*y;y^2", ideal(&["x", "y"], &["x^2", "x*y", "y^2"], 4))];
    for (what, s) in &structures {
        for chi in ["1", "0", "x"] {
            let t = s.chi_twist(&Poly::parse(chi, s.ring()).unwrap()).map_err(|e| e.to_string())?;
            axioms(&t, 4, &format!("{what} twisted by {chi}"))?;
            if chi == "1" && io::to_text(&io::structure_to_json(&t)) != io::to_text(&io::structure_to_json(s)) {
                return Err(format!("{what}: twist by 1 changed the serialized structure"));
            }
        }
    }
    Ok("chi in {1, 0, x} on two structures; chi = 1 byte-identical".into())
}

fn criterion_9() -> Outcome {
    let target = koszul("x^3+y^3+z^3", 4);
    let (source, _) = construct_structure(&target.complex, None, 4, 12).map_err(|e| e.to_string())?;
    let (phi, _) = construct_morphism(&source, &target, 3, 12).map_err(|e| e.to_string())?;
    if let Some(r) = check_morphism(&phi, &source, &target, 3).first() {
        return Err(format!("morphism residual {:?} at arity {}", r.kind, r.arity));
    }
    // h sends each bivector to a linear multiple of the top generator
    let b = source.basis();
    let top = b.in_degree(-2)[0];
    let mut h0 = Table::new(1, -1);
    for (i, &g) in b.in_degree(-1).iter().enumerate() {
        h0.insert(SymWord::from_sorted(&[g]), ModElt::term(top, Poly::var(source.ring(), i)));
    }
    let mut h = TaylorCoderivation::new(-1);
    h.set(0, h0.clone());
    let trace = homotopy_step(&phi, &h, &source, &target, Q::from_integer(0.into()), Q::one(), 3).map_err(|e| e.to_string())?;
    let st = source.embed(&trace.ring).map_err(|e| e.to_string())?;
    let tt = target.embed(&trace.ring).map_err(|e| e.to_string())?;
    if let Some(r) = check_morphism(&trace.phi, &st, &tt, 3).first() {
        return Err(format!("Lambda nonzero: {:?} at arity {}", r.kind, r.arity));
    }
    let tv = Poly::var(&trace.ring, trace.t);
    let embed = |m: &ModElt| m.map_coeffs(|p| p.embed(&trace.ring).unwrap());
    for g in 0..b.len() {
        let mut flow = tt.complex.apply_d(&embed(&h0.eval(b, &[g])));
        flow.add_signed(1, &apply_multilinear(&trace.h.coeffs[&0], b, &[st.complex.d[g].clone()]));
        let mut want = embed(&phi.eval(b, &[g]));
        want.add_signed(1, &flow.mul_poly(&tv));
        if trace.phi.eval(b, &[g]) != want {
            return Err(format!("Phi_t^(0) differs from Phi^(0) + t(l1 h + h l1') on {}", b.name(g)));
        }
    }
    let end = trace.endpoint(source.ring()).map_err(|e| e.to_string())?;
    if !check_morphism(&end, &source, &target, 3).is_empty() {
        return Err("endpoint is not a morphism".into());
    }
    Ok("morphism to arity 3 with zero residual; homotopy path exact in t".into())
}

fn criterion_10() -> Outcome {
    axioms(&ideal(&["x", "y"], &["x^2", "x*y", "y^2"], 4), 4, "x^2;x*y;y^2")?;
    for phi in ["x^2+y^2", "x*y"] {
        let s = ideal(&["x", "y"], &[phi], 4);
        axioms(&s, 4, phi)?;
        for k in 3..=4 {
            if !s.bracket_table(k).is_empty() {
                return Err(format!("{phi}: l_{k} is nonzero"));
            }
        }
    }
    Ok("non-regular ideal passes; single functions give l_k = 0 for k >= 3".into())
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("Koszul structure correctness", criterion_1),
        ("complex laws", criterion_2),
        ("anchor and hook compatibility", criterion_3),
        ("Richardson-Nijenhuis laws", criterion_4),
        ("Jacobiator identities", criterion_5),
        ("construction engine", criterion_6),
        ("restriction", criterion_7),
        ("chi-twist", criterion_8),
        ("morphisms and homotopies", criterion_9),
        ("ideal foliations", criterion_10),
    ];
    let mut failed = Vec::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let r = f();
        let secs = start.elapsed().as_secs_f64();
        match r {
            Ok(detail) => println!("criterion {:>2} PASS ({name}; {detail}; {secs:.2}s)", i + 1),
            Err(why) => {
                println!("criterion {:>2} FAIL ({name}; {why}; {secs:.2}s)", i + 1);
                failed.push(i + 1);
            }
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
