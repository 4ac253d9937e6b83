//! Acceptance suite: one PASS/FAIL line per criterion. Runs without the
//! libtest harness so the lines always reach the terminal.

use std::collections::BTreeSet;
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use detk3::algebra::{Integers, Monomial, MultiPoly, PolyMatrix};
use detk3::cayley::{forward_map, verify_composite, AutomorphismChain, Tritensor};
use detk3::certifier::{
    build_charpoly, certify_picard, count_unit_roots, count_unit_roots_trial, cyclotomic, integrality_check, newton_elementary,
    power_sums, traces_from_counts, QPoly,
};
use detk3::counting::{count_points_naive, count_points_over, count_table, enumerate_surface_points, CountConfig};
use detk3::dynamics::{degree18_solve, find_periodic_points, orbit_partition, verify_degree18, Degree18Config};
use detk3::lattice::{
    apply_isometry, bform, decompose_triple_class, discriminant_group, eta_even_pow, lefschetz_number, min_complement_degree, GramForm,
    IsometrySpec, NSClass,
};
use detk3::Gf;

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn bundled(p: u32) -> Tritensor<Gf> {
    Tritensor::bundled().to_field(&Gf::new(p, 1).unwrap())
}

const COUNTS: [u64; 10] = [6, 26, 90, 258, 1146, 4178, 17002, 64962, 260442, 1044786];

fn table() -> detk3::counting::CountTable {
    detk3::counting::CountTable::from_counts(2, &COUNTS)
}

fn point_counts() -> Check {
    let f = bundled(2).matrix(0).det();
    let got = count_table(&f, 10, &CountConfig::default()).map_err(|e| e.to_string())?.counts();
    ensure(got == COUNTS, format!("counts {got:?}"))?;
    Ok("n = 1..10 exact".into())
}

fn traces_and_e() -> Check {
    let tr = traces_from_counts(&table(), 2);
    let expect_tr = [q(-3, 2), q(1, 4), q(9, 8), q(-31, 16), q(57, 32), q(-47, 64), q(361, 128), q(-1087, 256), q(-2727, 512), q(-5839, 1024)];
    ensure(tr.traces_w == expect_tr, "traces differ")?;
    let expect_e = [q(-3, 2), q(1, 1), q(0, 1), q(0, 1), q(0, 1), q(0, 1), q(1, 2), q(0, 1), q(-1, 1), q(2, 1)];
    ensure(tr.e[1..] == expect_e, "e differ")?;
    ensure(newton_elementary(&tr.traces_w) == expect_e, "Newton on traces differs")?;
    let full_ok = tr.traces_full.iter().zip(&tr.traces_w).all(|(a, b)| *a == b + q(2, 1));
    ensure(full_ok, "traces_full != 2 + traces_w")?;
    Ok("10 traces and e1..e10 exact".into())
}

fn charpoly() -> Check {
    let tr = traces_from_counts(&table(), 2);
    let f = build_charpoly(&tr.e[1..=10]).map_err(|e| e.to_string())?;
    let mut c = vec![q(0, 1); 21];
    for (i, v) in [(20, q(1, 1)), (19, q(3, 2)), (18, q(1, 1)), (13, q(-1, 2)), (11, q(1, 1)), (10, q(2, 1)), (9, q(1, 1)), (7, q(-1, 2)),
        (2, q(1, 1)), (1, q(3, 2)), (0, q(1, 1))]
    {
        c[i] = v;
    }
    ensure(f.coeffs() == c, format!("f = {}", f.poly()))?;
    ensure(f.sign() == 1, "sign")?;
    ensure(count_unit_roots(f.poly()) == 0, "unit roots")?;
    ensure(!integrality_check(&f), "integrality")?;
    let cert = certify_picard(&table(), &GramForm::hyperplane_curve()).map_err(|e| e.to_string())?;
    ensure(cert.rank() == Some(2), "rank")?;
    Ok("coefficients exact, sign +1, 0 unit roots, non-integral, rank 2".into())
}

fn lin(idx: &[usize]) -> MultiPoly<Integers> {
    let mut c = [0i64; 4];
    for &i in idx {
        c[i] += 1;
    }
    MultiPoly::linear(&Integers, c)
}

fn g_column() -> [MultiPoly<Integers>; 4] {
    let parse = |terms: &[(i64, [u16; 4])]| MultiPoly::from_terms(&Integers, terms.iter().map(|(c, e)| (Monomial(*e), BigInt::from(*c))));
    [
        parse(&[(-1, [3, 0, 0, 0]), (-1, [2, 1, 0, 0]), (-1, [2, 0, 1, 0]), (-2, [1, 1, 1, 0]), (1, [1, 0, 2, 0]), (2, [1, 0, 0, 2]),
            (-1, [0, 2, 1, 0]), (-2, [0, 1, 1, 1]), (1, [0, 1, 0, 2]), (-2, [0, 0, 2, 1]), (-1, [0, 0, 1, 2]), (1, [0, 0, 0, 3])]),
        parse(&[(1, [3, 0, 0, 0]), (2, [2, 1, 0, 0]), (1, [2, 0, 0, 1]), (1, [1, 2, 0, 0]), (-2, [1, 1, 1, 0]), (3, [1, 1, 0, 1]),
            (1, [1, 0, 2, 0]), (-2, [1, 0, 1, 1]), (-2, [0, 2, 1, 0]), (1, [0, 2, 0, 1]), (-1, [0, 1, 1, 1]), (1, [0, 1, 0, 2]),
            (1, [0, 0, 3, 0]), (-2, [0, 0, 1, 2])]),
        parse(&[(-2, [2, 1, 0, 0]), (1, [2, 0, 1, 0]), (-2, [2, 0, 0, 1]), (-1, [1, 2, 0, 0]), (-1, [1, 1, 1, 0]), (-4, [1, 1, 0, 1]),
            (1, [1, 0, 2, 0]), (-3, [1, 0, 0, 2]), (1, [0, 2, 1, 0]), (-1, [0, 2, 0, 1]), (1, [0, 1, 2, 0]), (1, [0, 1, 1, 1]),
            (-2, [0, 1, 0, 2]), (-1, [0, 0, 3, 0]), (1, [0, 0, 2, 1]), (-1, [0, 0, 0, 3])]),
        parse(&[(3, [2, 1, 0, 0]), (-2, [2, 0, 1, 0]), (1, [2, 0, 0, 1]), (4, [1, 2, 0, 0]), (1, [1, 1, 1, 0]), (3, [1, 1, 0, 1]),
            (-2, [1, 0, 2, 0]), (2, [1, 0, 1, 1]), (3, [1, 0, 0, 2]), (1, [0, 3, 0, 0]), (2, [0, 2, 1, 0]), (1, [0, 2, 0, 1]),
            (2, [0, 1, 1, 1]), (1, [0, 1, 0, 2]), (-1, [0, 0, 3, 0]), (1, [0, 0, 2, 1]), (3, [0, 0, 1, 2]), (1, [0, 0, 0, 3])]),
    ]
}

fn cayley_matrices() -> Check {
    let t = Tritensor::bundled();
    let m1: [[&[usize]; 4]; 4] = [
        [&[0], &[2, 3], &[0, 1, 2], &[0, 1]],
        [&[2], &[0, 2], &[1, 2], &[0]],
        [&[1, 2, 3], &[1, 2], &[0, 1, 3], &[1, 3]],
        [&[3], &[1, 2, 3], &[1], &[0, 2]],
    ];
    let m2: [[&[usize]; 4]; 4] = [
        [&[0, 2, 3], &[1, 3], &[2], &[3]],
        [&[2, 3], &[2], &[0, 1, 2, 3], &[1, 2]],
        [&[1, 2], &[0, 1, 2], &[0, 1], &[1, 3]],
        [&[1], &[], &[0, 2, 3], &[0, 1]],
    ];
    let (a, b) = (t.matrix(1), t.matrix(2));
    for r in 0..4 {
        for c in 0..4 {
            ensure(*a.get(r, c) == lin(m1[r][c]), format!("M1[{r}][{c}]"))?;
            ensure(*b.get(r, c) == lin(m2[r][c]), format!("M2[{r}][{c}]"))?;
        }
    }
    let col = forward_map(&t, 0).map_err(|e| e.to_string())?.remove(0).polys;
    let g = g_column();
    let same = (0..4).all(|i| col[i] == g[i]);
    let negated = (0..4).all(|i| col[i] == -&g[i]);
    ensure(same || negated, "first cofactor column")?;
    Ok(format!("M1, M2 entrywise; (g0..g3) up to sign {}", if same { "+1" } else { "-1" }))
}

fn automorphism_identity() -> Check {
    for p in [17u32, 101] {
        let (_, check) = verify_composite(&bundled(p)).map_err(|e| e.to_string())?;
        ensure(check.divisible && check.composite_degree == 27, format!("composite at p = {p}"))?;
    }
    let mut sizes = Vec::new();
    for (p, n) in [(2u32, 1u32), (2, 2), (2, 3), (2, 4), (17, 1), (101, 1)] {
        let field = Gf::new(p, n).unwrap();
        let t = bundled(p).map_ring(&field, |&c| c);
        let chain = AutomorphismChain::new(&t).map_err(|e| e.to_string())?;
        let pts = enumerate_surface_points(&t.matrix(0).det(), &field).map_err(|e| e.to_string())?;
        let mut images = BTreeSet::new();
        for x in &pts {
            let y = chain.apply(x).map_err(|e| e.to_string())?;
            let back = chain.apply_inverse(&y).map_err(|e| e.to_string())?;
            let forth = chain.apply(&chain.apply_inverse(x).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
            ensure(back == *x && forth == *x, format!("g∘g⁻¹ at q = {}", field.q()))?;
            images.insert(y);
        }
        let all: BTreeSet<[u32; 4]> = pts.iter().copied().collect();
        ensure(images == all, format!("not a bijection at q = {}", field.q()))?;
        sizes.push(format!("{}:{}", field.q(), pts.len()));
    }
    Ok(format!("composite divisible at 17, 101; bijective on S0(F_q) [{}]", sizes.join(" ")))
}

fn lattice_suite() -> Check {
    ensure(lefschetz_number(1).unwrap() == BigInt::from(0), "L(g)")?;
    ensure(lefschetz_number(2).unwrap() == BigInt::from(344), "L(g^2)")?;
    ensure(min_complement_degree(&eta_even_pow(3)) == Ok(18), "min degree")?;
    let (u, v) = decompose_triple_class(0);
    let got: BTreeSet<(BigInt, BigInt)> = [(u.a, u.b), (v.a, v.b)].into();
    let (d1, dm1) = (eta_even_pow(1), eta_even_pow(-1));
    let expect: BTreeSet<(BigInt, BigInt)> = [(d1.a, d1.b), (dm1.a, dm1.b)].into();
    ensure(got == expect, "decomposition of 3D0")?;
    let disc = discriminant_group(&GramForm::ns()).map_err(|e| e.to_string())?;
    ensure(disc == [BigInt::from(2), BigInt::from(10)], format!("discriminant {disc:?}"))?;
    Ok("L = 0, 344; degree 18; {D1, D-1}; invariant factors (2, 10)".into())
}

fn periodic_points() -> Check {
    let t = bundled(17);
    let r1 = find_periodic_points(&t, 1, 2).map_err(|e| e.to_string())?;
    let r2 = find_periodic_points(&t, 2, 2).map_err(|e| e.to_string())?;
    let r101 = find_periodic_points(&bundled(101), 1, 2).map_err(|e| e.to_string())?;
    ensure(r1.fixed_count == 4, format!("F17: {}", r1.fixed_count))?;
    ensure(r2.fixed_count == 6 && r2.new_points == 2, format!("F289: {}", r2.fixed_count))?;
    ensure(r101.fixed_count == 0, format!("F101: {}", r101.fixed_count))?;
    let part = orbit_partition(&[r1.clone(), r2.clone()]);
    ensure(part.orbits == [1, 1, 1, 1, 2], format!("partition {:?}", part.orbits))?;
    for r in [&r1, &r2, &r101] {
        ensure(r.inverse_verified && r.fixed_count <= r.lefschetz_bound, "inverse check or Lefschetz bound")?;
    }
    Ok("4 over F17, 6 over F289, 0 over F101; orbits {1,1,1,1,2}; total <= 344".into())
}

fn degree18() -> Check {
    let t = bundled(17);
    let r = degree18_solve(&t, &Degree18Config::default()).map_err(|e| e.to_string())?;
    let dims = (r.kernel_dim, r.vanishing_dim, r.quotient_dim);
    ensure(dims == (2724, 2720, 4), format!("dims {dims:?}"))?;
    ensure(r.expected_vanishing_dim == 2720, "monomial count")?;
    ensure(verify_degree18(&r, &t).map_err(|e| e.to_string())?, "divisibility of F_i G_j - F_j G_i")?;
    Ok(format!("kernel 2724, vanishing 2720, quotient 4 from {} samples; all 4 verified", r.samples))
}

fn random_class(rng: &mut ChaCha8Rng) -> NSClass {
    NSClass::new(rng.gen_range(-50i64..50), rng.gen_range(-50i64..50))
}

fn random_tritensor(rng: &mut ChaCha8Rng, f: &Gf) -> Tritensor<Gf> {
    Tritensor::from_fn(f, |_, _, _| rng.gen_range(0..f.p()))
}

fn property_suites() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..200 {
        let s = IsometrySpec::new(if rng.gen() { 1 } else { -1 }, rng.gen_range(-6..7), rng.gen()).unwrap();
        let (x, y) = (random_class(&mut rng), random_class(&mut rng));
        ensure(bform(&apply_isometry(&s, &x), &apply_isometry(&s, &y)) == bform(&x, &y), "isometry invariance")?;
    }
    for _ in 0..3 {
        let m = PolyMatrix::from_fn(|_, _| MultiPoly::linear(&Integers, std::array::from_fn(|_| rng.gen_range(-3..4))));
        let (adj, det) = (m.adjugate(), m.det());
        let prod = m.mul(&adj);
        let ok = (0..4).all(|i| (0..4).all(|j| *prod.get(i, j) == if i == j { det.clone() } else { MultiPoly::zero(&Integers) }));
        ensure(ok, "adjugate law")?;
    }
    let f7 = Gf::new(7, 1).unwrap();
    for _ in 0..20 {
        ensure(random_tritensor(&mut rng, &f7).bilinear_consistency_check().is_ok(), "bilinear consistency")?;
    }
    for (p, n) in [(2u32, 2u32), (3, 2), (5, 1)] {
        let field = Gf::new(p, n).unwrap();
        let t = random_tritensor(&mut rng, &Gf::new(p, 1).unwrap());
        let f = t.matrix(0).det();
        if f.is_zero() {
            continue;
        }
        let fast = count_points_over(&f, &field, &CountConfig::default()).map_err(|e| e.to_string())?;
        let naive = count_points_naive(&f, &field).map_err(|e| e.to_string())?;
        let listed = enumerate_surface_points(&f, &field).map_err(|e| e.to_string())?.len() as u64;
        ensure(fast == naive && naive == listed, format!("count/enumerate at q = {}", field.q()))?;
    }
    for _ in 0..50 {
        let p: Vec<BigRational> = (0..10).map(|_| q(rng.gen_range(-40..40), rng.gen_range(1..9))).collect();
        ensure(power_sums(&newton_elementary(&p)) == p, "Newton round trip")?;
    }
    for _ in 0..10 {
        let mut e: Vec<BigRational> = (0..9).map(|_| q(rng.gen_range(-3..4), 2)).collect();
        e.push(q(rng.gen_range(1..5), 1));
        let f = build_charpoly(&e).map_err(|e| e.to_string())?;
        ensure(f.poly().reverse() == *f.poly(), "palindrome")?;
        ensure(count_unit_roots(&f.poly().reverse()) == count_unit_roots(f.poly()), "reversal invariance")?;
    }
    let base = QPoly::from_ints(&[1, 3, 0, 1]);
    for _ in 0..10 {
        let ds: Vec<u64> = (0..3).map(|_| rng.gen_range(1..25)).collect();
        let f = ds.iter().fold(base.clone(), |acc, &d| acc.mul(&cyclotomic(d)));
        ensure(count_unit_roots(&f) == count_unit_roots_trial(&f), "gcd vs trial division")?;
    }
    Ok("isometry, adjugate, bilinear, counting, Newton, palindrome, unit roots".into())
}

fn main() {
    let criteria: [(&str, fn() -> Check); 9] = [
        ("point-count table over F_2^n", point_counts),
        ("trace and e_n tables", traces_and_e),
        ("characteristic polynomial and certificate", charpoly),
        ("Cayley matrices and cofactor column", cayley_matrices),
        ("automorphism identity and bijectivity", automorphism_identity),
        ("lattice suite", lattice_suite),
        ("period-2 points", periodic_points),
        ("degree-18 reduction", degree18),
        ("property suites", property_suites),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS  {}. {name}: {detail} ({secs:.1}s)", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL  {}. {name}: {why} ({secs:.1}s)", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
