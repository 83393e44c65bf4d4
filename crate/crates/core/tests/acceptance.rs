//! Acceptance suite: one line per criterion, nonzero exit if any fails.

mod common;

use std::panic::{self, AssertUnwindSafe};
use std::time::{Duration, Instant};

use borcherds::algebra::{
    check_index_triple, check_synthetic_triple, jacobi_residual, ElementSampler, TripleKind,
};
use borcherds::cartan::{BlockIndex, BorcherdsCartanMatrix};
use borcherds::freelie::{dimension_table, fricke_generators, GeneratorFamily, GeneratorSet, FamilyLabel};
use borcherds::moonshine::{
    fricke_transform, mckay_thompson, multiplicity_2b_row0, multiplicity_2b_row0_from_series,
    simple_root_multiplicity, verify_2b_reciprocal_identity, verify_2b_row0, verify_denominator_identity,
    verify_denominator_identity_with, verify_theta_identity, MonsterExponents, PerturbedExponents,
};
use borcherds::qseries::j_series;
use borcherds::{Algebra, BigInt, BigRational, ClassData, ClassLabel, Element, Exponent};
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn int(n: i64) -> Exponent {
    Exponent::from_integer(n)
}

fn q(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(limit: Duration, start: Instant) -> Result<(), String> {
    let t = start.elapsed();
    ensure(t < limit, || format!("took {t:.2?}, limit {limit:?}"))
}

fn coeffs_match(s: &borcherds::Series, want: &[(Exponent, i64)]) -> Result<(), String> {
    for (e, c) in want {
        let got = s.coeff(*e).ok_or_else(|| format!("q^{e} beyond truncation"))?;
        ensure(got == q(*c), || format!("q^{e}: got {got}, want {c}"))?;
    }
    Ok(())
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let j = j_series::<BigRational>(int(20));
    within(Duration::from_secs(1), start)?;
    let want = [(-1, 1), (0, 0), (1, 196884), (2, 21493760), (3, 864299970)];
    coeffs_match(&j, &want.map(|(e, c)| (int(e), c)))?;
    let oracle = common::j_coefficients(19);
    for n in -1..20 {
        let got = j.coeff_at(n).unwrap();
        ensure(got == BigRational::from_integer(oracle[(n + 1) as usize].clone()), || {
            format!("c({n}) disagrees with the integer oracle")
        })?;
    }
    Ok(format!("c(-1..3) exact, q^20 in {:.2?}", start.elapsed()))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let r = verify_denominator_identity(5, 5).map_err(|e| e.to_string())?;
    within(Duration::from_secs(30), start)?;
    ensure(r.pass, || format!("{} residual terms, first {:?}", r.residual_terms.len(), r.residual_terms.first()))?;
    Ok(format!("residual zero for p, q <= 5 in {:.2?}", start.elapsed()))
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let g = fricke_generators(ClassData::get(ClassLabel::A1), (4, 4)).map_err(|e| e.to_string())?;
    let table = dimension_table(&g, (4, 4));
    within(Duration::from_secs(10), start)?;
    for m in 1..=4 {
        for n in 1..=4 {
            let want = common::c(m * n);
            ensure(table[&(m, n)] == want, || format!("({m},{n}): {} vs c({}) = {want}", table[&(m, n)], m * n))?;
        }
    }
    Ok(format!("dim L(S+)_(m,n) = c(mn) for 1 <= m,n <= 4 in {:.2?}", start.elapsed()))
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(20240601);
    let mut cases = 0;
    let mut checks = 0;
    while cases < 60 {
        let letters = rng.gen_range(1..=3);
        let mut families = Vec::new();
        let mut expanded = Vec::new();
        for i in 0..letters {
            let d = loop {
                let d = (rng.gen_range(0..=2), rng.gen_range(0..=2));
                if d != (0, 0) {
                    break d;
                }
            };
            families.push(GeneratorFamily {
                label: FamilyLabel::Named(format!("x{i}")),
                degree: d,
                multiplicity: BigInt::one(),
            });
            expanded.push(d);
        }
        let g = GeneratorSet::new(families).map_err(|e| e.to_string())?;
        let table = dimension_table(&g, (6, 6));
        for (&(m, n), dim) in table.iter().filter(|((m, n), _)| m + n <= 6) {
            let brute = common::brute_force_lyndon_count(&expanded, (m, n));
            ensure(*dim == BigInt::from(brute), || {
                format!("alphabet {expanded:?} at ({m},{n}): Witt {dim}, enumeration {brute}")
            })?;
            checks += 1;
        }
        cases += 1;
    }
    Ok(format!("{cases} alphabets, {checks} degrees agree"))
}

fn criterion_5() -> Outcome {
    let a2 = ClassData::get(ClassLabel::A2);
    let t = mckay_thompson::<BigRational>(a2, int(5)) + borcherds::Series::monomial(q(104), int(0));
    let want = [(-1, 1), (0, 104), (1, 4372), (2, 96256), (3, 1240002), (4, 10698752)];
    coeffs_match(&t, &want.map(|(e, c)| (int(e), c)))?;
    for (n, c) in [((1, 2), 4372), ((1, 1), 96256), ((3, 2), 1240002), ((2, 1), 10698752)] {
        let got = simple_root_multiplicity(a2, Exponent::new(n.0, n.1)).map_err(|e| e.to_string())?;
        ensure(got == BigInt::from(c), || format!("c(1,{}/{}) = {got}, want {c}", n.0, n.1))?;
    }
    Ok("T_2A + 104 and c(1, n/2) for n = 1..4 exact".into())
}

fn criterion_6() -> Outcome {
    let b2 = ClassData::get(ClassLabel::B2);
    let f = fricke_transform::<BigRational>(b2, int(2));
    ensure(f.valuation() == Some(Exponent::new(1, 2)), || format!("valuation {:?}", f.valuation()))?;
    coeffs_match(&f, &[(Exponent::new(1, 2), 4096), (int(1), 98304), (Exponent::new(3, 2), 1228800)])?;
    let r = verify_2b_reciprocal_identity(int(5)).map_err(|e| e.to_string())?;
    ensure(r.pass, || format!("reciprocal residual {:?}", r.residual_terms))?;
    let r = verify_theta_identity(int(5)).map_err(|e| e.to_string())?;
    ensure(r.pass, || format!("theta residual {:?}", r.residual_terms))?;
    let row = multiplicity_2b_row0_from_series(15).map_err(|e| e.to_string())?;
    for (m, c) in (1..=15).zip(&row) {
        let want = if m % 2 == 1 { 24 } else { 0 };
        ensure(*c == BigInt::from(want) && multiplicity_2b_row0(m) == want, || {
            format!("c({m},0) = {c}, want {want}")
        })?;
    }
    ensure(verify_2b_row0(15, None).map_err(|e| e.to_string())?.pass, || "row report".into())?;
    Ok("(a) leading terms (b) product = 2^12 (c) theta form (d) c(m,0), m <= 15".into())
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    for label in [ClassLabel::A1, ClassLabel::A2] {
        let t = BorcherdsCartanMatrix::for_label(label)
            .and_then(|a| a.truncate(5, 3))
            .map_err(|e| e.to_string())?;
        let rep = t.validate();
        ensure(rep.all_hold(), || format!("{label}: {rep:?}"))?;
        ensure(t.rank() == 2, || format!("{label}: rank {}", t.rank()))?;
        let half = |n: i64| BigRational::new(n.into(), 2.into());
        let lhs = t.combine_rows(&[(half(-1), BlockIndex::REAL), (half(3), BlockIndex::new(1, 1))]);
        let row: Vec<BigRational> = t.row(BlockIndex::new(2, 1)).unwrap().iter().map(|x| q(*x)).collect();
        ensure(lhs == Some(row), || format!("{label}: row relation"))?;
    }
    within(Duration::from_secs(1), start)?;
    Ok(format!("1A and 2A, j <= 5, k <= 3 in {:.2?}", start.elapsed()))
}

fn criterion_8() -> Outcome {
    let mut count = 0;
    for label in [ClassLabel::A1, ClassLabel::A2] {
        let alg = Algebra::new(ClassData::get(label), (5, 9)).map_err(|e| e.to_string())?;
        for r in alg.relation_suite(4, 3).map_err(|e| e.to_string())? {
            ensure(r.residual().is_zero(), || format!("{label} {}: {}", r.label, r.residual()))?;
            count += 1;
        }
    }
    let alg = Algebra::new(ClassData::get(ClassLabel::A1), (2, 9)).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let pick = |rng: &mut ChaCha8Rng| {
        let j = rng.gen_range(-1..=8);
        if j <= 0 {
            BlockIndex::REAL
        } else {
            BlockIndex::new(j, rng.gen_range(1..=1000))
        }
    };
    for _ in 0..20 {
        let (a, b) = (pick(&mut rng), pick(&mut rng));
        let img = alg.center_image(a, b).map_err(|e| e.to_string())?;
        ensure(img.is_zero(), || format!("center image {a},{b} = {img}"))?;
    }
    Ok(format!("{count} relations and 20 center images vanish"))
}

fn criterion_9() -> Outcome {
    let alg = Algebra::new(ClassData::get(ClassLabel::A1), (4, 4)).map_err(|e| e.to_string())?;
    let sampler = ElementSampler::new(&alg, 1).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let err = |e: borcherds::algebra::AlgebraError| e.to_string();
    let mut nontrivial = 0;
    for _ in 0..200 {
        let [x, y, z] = sampler.triple(&mut rng);
        let terms = [(&x, &y, &z), (&y, &z, &x), (&z, &x, &y)];
        let mut any = false;
        for (a, b, c) in terms {
            any |= !alg.bracket(a, &alg.bracket(b, c).map_err(err)?).map_err(err)?.is_zero();
        }
        if any {
            nontrivial += 1;
        }
        let r = jacobi_residual(&alg, &x, &y, &z).map_err(err)?;
        ensure(r.is_zero(), || format!("Jacobi fails on {x} | {y} | {z}"))?;
        let xy = alg.bracket(&x, &y).map_err(err)?;
        let yx = alg.bracket(&y, &x).map_err(err)?;
        ensure(xy.add(&yx).is_zero(), || format!("antisymmetry fails on {x} | {y}"))?;
        if !xy.is_zero() {
            let (dx, dy) = (x.homogeneous_degree().unwrap(), y.homogeneous_degree().unwrap());
            ensure(xy.homogeneous_degree() == Some((dx.0 + dy.0, dx.1 + dy.1)), || format!("degree of [{x}, {y}]"))?;
        }
        let eta = alg
            .bracket(&x.cartan_involution(), &y.cartan_involution())
            .map_err(err)?;
        ensure(eta == xy.cartan_involution(), || format!("eta not a homomorphism on {x} | {y}"))?;
        ensure(x.cartan_involution().cartan_involution() == x, || "eta has order 2".into())?;
        let (m, n) = x.homogeneous_degree().unwrap();
        ensure(x.cartan_involution().homogeneous_degree() == Some((-m, -n)), || "eta degree".into())?;
    }
    let sl2 = check_index_triple(&alg, BlockIndex::REAL, None).map_err(err)?;
    ensure(sl2.pass && sl2.kind == TripleKind::Sl2, || format!("{sl2:?}"))?;
    let heis = check_synthetic_triple(0, None).map_err(err)?;
    ensure(heis.pass && heis.kind == TripleKind::Heisenberg, || format!("{heis:?}"))?;
    let wide = Algebra::new(ClassData::get(ClassLabel::A1), (5, 5)).map_err(|e| e.to_string())?;
    for j in 1..=4 {
        let s = wide.weight_string(j, 1).map_err(err)?;
        let eig: Vec<BigRational> = s.iter().map(|(_, c)| c.clone()).collect();
        let want: Vec<BigRational> = (0..j).map(|l| q(1 - j + 2 * l)).collect();
        ensure(eig == want, || format!("weight string j = {j}: {eig:?}"))?;
        let top = wide
            .adjoint_power(&Element::e_minus(), j as u32, &Element::e(0, j, 1))
            .map_err(err)?;
        ensure(top.is_zero(), || format!("(ad e(-1))^{j} e(0;{j},1) = {top}"))?;
    }
    ensure(nontrivial >= 50, || format!("only {nontrivial} triples have a nonzero double bracket"))?;
    Ok(format!(
        "200 triples ({nontrivial} with a nonzero double bracket): Jacobi, antisymmetry, grading, eta; triples; weight strings"
    ))
}

fn criterion_10() -> Outcome {
    let run = |args: &[&str]| {
        let mut full = vec!["borcherds"];
        full.extend_from_slice(args);
        borcherds::cli::run(full, &mut Vec::new(), &mut Vec::new())
    };
    // library level
    let mut t = BorcherdsCartanMatrix::for_label(ClassLabel::A1)
        .and_then(|a| a.truncate(5, 3))
        .map_err(|e| e.to_string())?;
    t.set(BlockIndex::new(2, 1), BlockIndex::new(3, 2), -4);
    ensure(!t.validate().b1.holds, || "Cartan defect not detected".into())?;
    let bumped = PerturbedExponents {
        inner: &MonsterExponents,
        m: 2,
        n: int(1),
        delta: BigInt::one(),
    };
    let r = verify_denominator_identity_with(&bumped, 3, 3).map_err(|e| e.to_string())?;
    ensure(!r.pass, || "multiplicity defect not detected".into())?;
    let alg = Algebra::new(ClassData::get(ClassLabel::A1), (5, 9)).map_err(|e| e.to_string())?;
    let mut rels = alg.relation_suite(2, 2).map_err(|e| e.to_string())?;
    let i = rels.iter().position(|r| r.label.starts_with("M:2b")).unwrap();
    rels[i].perturb();
    ensure(!rels[i].residual().is_zero(), || "relation defect not detected".into())?;
    // command level
    let cases: [&[&str]; 5] = [
        &["cartan", "1A", "--blocks", "5", "--per-block", "3", "--perturb", "1,1,2,1,1"],
        &["denom-check", "1A", "--p", "3", "--q", "3", "--perturb", "1,1"],
        &["denom-check", "2B", "--p", "15", "--q", "3", "--perturb", "3,0"],
        &["relations", "1A", "--j-max", "3", "--k-max", "2", "--perturb", "M:4c"],
        &["triple", "1A", "--diagonal", "-4", "--kind", "heisenberg"],
    ];
    for args in cases {
        let code = run(args);
        ensure(code == 1, || format!("{args:?} exited {code}"))?;
    }
    let clean: [&[&str]; 3] = [
        &["cartan", "1A", "--blocks", "5", "--per-block", "3"],
        &["denom-check", "1A", "--p", "3", "--q", "3"],
        &["relations", "1A", "--j-max", "3", "--k-max", "2"],
    ];
    for args in clean {
        let code = run(args);
        ensure(code == 0, || format!("unperturbed {args:?} exited {code}"))?;
    }
    Ok("every injected defect yields a nonzero residual and exit 1".into())
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("J-series exactness", criterion_1),
        ("Monster denominator identity", criterion_2),
        ("free Lie dimensions equal c(mn)", criterion_3),
        ("Witt recursion vs enumeration", criterion_4),
        ("2A series and multiplicities", criterion_5),
        ("2B identities", criterion_6),
        ("Cartan matrix suite", criterion_7),
        ("presentation relations and center", criterion_8),
        ("structural properties", criterion_9),
        ("defect detection", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let t = start.elapsed();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} [{t:.2?}]", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why} [{t:.2?}]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
