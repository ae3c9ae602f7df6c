//! The invariant suite behind `moduli-census check`.

use std::time::Instant;

use census_core::curve::HyperellipticCurve;
use census_core::family::{character_sums, delta_from_sums, spectral_sums, PrimeTable};
use census_core::field::field_of_order;
use census_core::hn::{compositions, CurveContext};
use census_core::moduli::{self, Rank2Data};
use census_core::poly::{count_irreducibles, irreducibles_of_degree, MonicPoly};
use census_core::theory::{moment_h, HForm, SquareWeight};
use census_core::{Error, Result};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::commands::Source;
use crate::Cli;

/// Reference curves: (q, c_0..c_{γ-1}).
pub const REFERENCE_CURVES: &[(u64, &[u64])] = &[
    (3, &[1, 2, 0, 0, 0]),
    (3, &[2, 1, 0, 1, 0, 0, 0]),
    (5, &[1, 0, 3, 0, 0]),
    (5, &[2, 1, 0, 0, 4, 0]),
    (7, &[3, 0, 0, 1, 0]),
];

struct Row {
    name: &'static str,
    ok: bool,
    detail: String,
}

fn row(name: &'static str, f: impl FnOnce() -> Result<String>) -> Row {
    match f() {
        Ok(detail) => Row { name, ok: true, detail },
        Err(e) => Row { name, ok: false, detail: e.to_string() },
    }
}

fn fail(msg: String) -> Error {
    Error::Invariant(msg)
}

fn field_exhaustive() -> Result<String> {
    let mut checked = 0u64;
    for q in [3u64, 5, 7, 9, 25, 27] {
        let f = field_of_order(q)?;
        let elems: Vec<_> = f.elements().collect();
        for &a in &elems {
            if f.add(a, f.neg(a)) != f.zero() {
                return Err(fail(format!("a + (-a) != 0 in F_{q}")));
            }
            if !f.is_zero(a) && f.mul(a, f.inv(a)?) != f.one() {
                return Err(fail(format!("a * a^-1 != 1 in F_{q}")));
            }
            for &b in elems.iter().take(9) {
                // Frobenius is additive and multiplicative.
                if f.frobenius(f.add(a, b)) != f.add(f.frobenius(a), f.frobenius(b))
                    || f.frobenius(f.mul(a, b)) != f.mul(f.frobenius(a), f.frobenius(b))
                {
                    return Err(fail(format!("Frobenius is not a homomorphism on F_{q}")));
                }
                checked += 1;
            }
        }
        let g = f.primitive_element();
        if f.multiplicative_order(g)? != q - 1 {
            return Err(fail(format!("primitive element of F_{q} has the wrong order")));
        }
    }
    Ok(format!("{checked} element pairs"))
}

fn prime_polynomial_theorem() -> Result<String> {
    for (q, m_max) in [(3u64, 6usize), (5, 4), (9, 3)] {
        let f = field_of_order(q)?;
        for m in 1..=m_max {
            let mut total = BigUint::zero();
            for d in (1..=m).filter(|d| m % d == 0) {
                let listed = irreducibles_of_degree(&f, d)?.count();
                if BigUint::from(listed) != count_irreducibles(q, d) {
                    return Err(fail(format!("q={q} d={d}: {listed} irreducibles listed")));
                }
                total += BigUint::from(d * listed);
            }
            if total != BigUint::from(q).pow(m as u32) {
                return Err(fail(format!("q={q} m={m}: Σ d π(d) = {total}")));
            }
        }
    }
    Ok("q ∈ {3,5,9}".into())
}

fn reference_contexts(source: &Source) -> Result<Vec<(HyperellipticCurve, CurveContext)>> {
    REFERENCE_CURVES
        .iter()
        .map(|&(q, labels)| {
            let f = field_of_order(q)?;
            let c = HyperellipticCurve::new(MonicPoly::from_labels(&f, labels)?)?;
            let l = source.as_source().l_polynomial(&c)?;
            if l != c.l_polynomial()? {
                return Err(fail(format!("cached L-polynomial differs for {labels:?} over F_{q}")));
            }
            let ctx = CurveContext::new(l)?;
            Ok((c, ctx))
        })
        .collect()
}

fn golden(ctxs: &[(HyperellipticCurve, CurveContext)]) -> Result<String> {
    for (c, ctx) in ctxs {
        let q = BigInt::from(c.q());
        let want = BigRational::new(
            ctx.nj() * q.pow(c.genus() as u32 - 1),
            (&q - BigInt::one()).pow(3) * (&q + BigInt::one()),
        );
        if ctx.c_l(&[1, 1], 0)? != want {
            return Err(fail(format!("C(1,1) at d=0 differs for {:?}", c.poly())));
        }
        for d in -2..=2 {
            if ctx.c_l(&[2, 1], d)? != ctx.c_l(&[1, 2], -d)? {
                return Err(fail(format!("C(2,1)(d) != C(1,2)(-d) at d={d}")));
            }
        }
    }
    Ok(format!("{} curves", ctxs.len()))
}

fn box_oracle(ctxs: &[(HyperellipticCurve, CurveContext)]) -> Result<String> {
    let mut n_checks = 0;
    for (c, ctx) in ctxs.iter().filter(|(c, _)| c.genus() == 2 && c.q() == 3) {
        for n in 2..=3 {
            for parts in compositions(n).into_iter().filter(|p| p.len() > 1) {
                for d in 0..n as i64 {
                    let exact = ctx.c_l(&parts, d)?;
                    let b = ctx.c_l_box_oracle(&parts, d, 12)?;
                    let diff = &exact - &b.partial;
                    if diff < BigRational::zero() || diff > b.tail_bound {
                        return Err(fail(format!("{parts:?} d={d} outside the certified tail for {:?}", c.poly())));
                    }
                    n_checks += 1;
                }
            }
        }
    }
    Ok(format!("{n_checks} strata, radius 12"))
}

fn integrality(cli: &Cli, ctxs: &[(HyperellipticCurve, CurveContext)]) -> Result<String> {
    let model = cli.strata.into();
    let variant = cli.beta1_variant.into();
    for (c, ctx) in ctxs {
        for (n, d) in [(2, 1), (3, 1), (3, 2), (4, 1)] {
            moduli::count_ml(ctx, n, d)?;
        }
        let data = Rank2Data::new(ctx, c)?;
        moduli::count_ms20(ctx, &data, model, variant)?;
        moduli::count_desingularization(ctx, &data, model, variant)?;
    }
    Ok(format!("{} curves, 6 counts each", ctxs.len()))
}

fn delta_paths() -> Result<String> {
    let f = field_of_order(3)?;
    let table = PrimeTable::new(&f, 6)?;
    let mut n = 0;
    for idx in 0..8 {
        let poly = census_core::family::sample_curve(&f, 5 + (idx % 2) as usize, 7, idx)?;
        let c = HyperellipticCurve::new(poly)?;
        let l = c.l_polynomial()?;
        for z in 1..=6 {
            let a = delta_from_sums(3, &character_sums(c.poly(), &table, z)?);
            let b = delta_from_sums(3, &spectral_sums(&l, c.delta(), z));
            if a != b {
                return Err(fail(format!("Δ_{z} paths differ for {:?}", c.poly())));
            }
            n += 1;
        }
    }
    Ok(format!("{n} (curve, Z) pairs at q=3"))
}

fn h_cross_form() -> Result<String> {
    let mut worst: f64 = 0.0;
    for q in [3u64, 5, 7] {
        for r in 1..=3 {
            let a = moment_h(q, r, 12, HForm::SquareTuples, SquareWeight::Reciprocal)?;
            let b = moment_h(q, r, 12, HForm::DistinctPrimes, SquareWeight::Reciprocal)?;
            let ratio = (a.value - b.value).abs() / (a.tail + b.tail);
            if ratio > 1.0 {
                return Err(fail(format!("H({r}) at q={q}: forms differ by {:e}", (a.value - b.value).abs())));
            }
            worst = worst.max(ratio);
        }
    }
    Ok(format!("largest |difference|/tails = {worst:.2e}"))
}

fn lpoly_soundness() -> Result<String> {
    let f = field_of_order(3)?;
    let mut n = 0;
    for labels in [[1u64, 2, 0, 0, 0], [0, 1, 2, 0, 1], [2, 0, 1, 1, 0]] {
        let c = HyperellipticCurve::new(MonicPoly::from_labels(&f, &labels)?)?;
        let l = c.l_polynomial()?;
        l.check()?;
        for m in c.genus() + 1..=c.genus() + 2 {
            if BigInt::from(c.count_points(m)?) != l.point_count(m)? {
                return Err(fail(format!("N_{m} from L differs from the scan for {labels:?}")));
            }
        }
        n += 1;
    }
    Ok(format!("{n} curves, N_(g+1), N_(g+2) rescanned"))
}

pub fn cmd_check(cli: &Cli) -> Result<i32> {
    let source = Source::open(cli)?;
    let start = Instant::now();
    let mut rows = vec![
        row("finite-field exhaustives", field_exhaustive),
        row("prime polynomial theorem", prime_polynomial_theorem),
        row("L-polynomial soundness", lpoly_soundness),
    ];
    match reference_contexts(&source) {
        Ok(ctxs) => {
            rows.push(Row { name: "cache agreement", ok: true, detail: format!("{} reference curves", ctxs.len()) });
            rows.push(row("golden C_L equalities", || golden(&ctxs)));
            rows.push(row("box-oracle agreement", || box_oracle(&ctxs)));
            rows.push(row("integrality battery", || integrality(cli, &ctxs)));
        }
        Err(e) => rows.push(Row { name: "cache agreement", ok: false, detail: e.to_string() }),
    }
    rows.push(row("Δ_Z path equality", delta_paths));
    rows.push(row("H(r) cross-form", h_cross_form));

    let all = rows.iter().all(|r| r.ok);
    for r in &rows {
        println!("{:<26} {:<4}  {}", r.name, if r.ok { "pass" } else { "FAIL" }, r.detail);
    }
    println!("{} in {:.1?}", if all { "all checks passed" } else { "some checks FAILED" }, start.elapsed());
    if cli.verbose {
        eprintln!("point counts performed: {}", source.point_counts());
    }
    Ok(if all { 0 } else { 5 })
}
