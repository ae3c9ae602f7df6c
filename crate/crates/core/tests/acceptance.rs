//! Acceptance run: one pass/fail line per criterion, followed by diagnostics.
//! Exits nonzero if any criterion is red.

use std::time::Instant;

use census_core::curve::{HyperellipticCurve, LPolynomial};
use census_core::family::{
    character_sums, delta_from_sums, sample_curve, spectral_sums, FamilySpec, Mode, PrimeTable, Statistic,
};
use census_core::field::{field_of_order, Field};
use census_core::hn::{compositions, CurveContext};
use census_core::hp::HpReal;
use census_core::moduli::{self, Beta1Variant, Rank2Data, StrataModel};
use census_core::survey::{survey, DirectCount, MomentReport, SurveyRecord, GAUSSIAN_TARGETS};
use census_core::theory::{moment_h, HForm, SquareWeight};
use census_core::Result;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

const SEED: u64 = 20_240_601;

struct Outcome {
    pass: bool,
    detail: String,
    notes: Vec<String>,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Outcome { pass, detail: detail.into(), notes: Vec::new() }
    }
}

fn curves(q: u64, gamma: usize, count: u64, seed: u64) -> Result<Vec<HyperellipticCurve>> {
    let f = field_of_order(q)?;
    (0..count).map(|i| HyperellipticCurve::new(sample_curve(&f, gamma, seed, i)?)).collect()
}

fn context(c: &HyperellipticCurve) -> Result<CurveContext> {
    CurveContext::new(c.l_polynomial()?)
}

fn integrality() -> Result<Outcome> {
    let mut bad = Vec::new();
    let mut n = 0;
    for q in [3u64, 5, 7] {
        for gamma in [5usize, 7] {
            for c in curves(q, gamma, 50, SEED)? {
                let ctx = context(&c)?;
                let mut results = Vec::new();
                for (rank, d) in [(2, 1), (3, 1), (3, 2), (4, 1)] {
                    results.push(moduli::count_ml(&ctx, rank, d).map(|_| ()));
                }
                let data = Rank2Data::new(&ctx, &c)?;
                results.push(moduli::count_ms20(&ctx, &data, StrataModel::Rational, Beta1Variant::Full).map(|_| ()));
                results.push(
                    moduli::count_desingularization(&ctx, &data, StrataModel::Rational, Beta1Variant::Full).map(|_| ()),
                );
                for r in results {
                    if let Err(e) = r {
                        bad.push(format!("q={q} F={:?}: {e}", c.poly().labels()));
                    }
                }
                n += 1;
            }
        }
    }
    let mut o = Outcome::new(bad.is_empty(), format!("{n} curves x 6 counts, {} failures", bad.len()));
    o.notes.extend(bad.into_iter().take(5));
    Ok(o)
}

fn golden() -> Result<Outcome> {
    let (mut ok111, mut ok21, mut ok11) = (0, 0, 0);
    let mut n = 0;
    let mut notes = Vec::new();
    for (i, c) in curves(3, 5, 4, SEED)?
        .into_iter()
        .chain(curves(5, 6, 3, SEED)?)
        .chain(curves(7, 7, 3, SEED)?)
        .enumerate()
    {
        let ctx = context(&c)?;
        let q = BigInt::from(c.q());
        let want11 = BigRational::new(
            ctx.nj() * q.pow(c.genus() as u32 - 1),
            (&q - BigInt::one()).pow(3) * (&q + BigInt::one()),
        );
        if ctx.c_l(&[1, 1], 0)? == want11 {
            ok11 += 1;
        }
        for d in 0..=2 {
            let e111 = ctx.c_l(&[1, 1, 1], d)?;
            let e21 = ctx.c_l(&[2, 1], d)?;
            let c111 = ctx.c111_closed_form(d);
            let c21 = ctx.c21_closed_form(d);
            ok111 += usize::from(e111 == c111);
            ok21 += usize::from(e21 == c21);
            if i == 0 {
                notes.push(format!(
                    "q={} d={d}: engine/closed C(1,1,1) = {:.4e}, C(2,1) = {:.4e}",
                    c.q(),
                    ratio(&e111, &c111),
                    ratio(&e21, &c21)
                ));
            }
            n += 1;
        }
    }
    let pass = ok111 == n && ok21 == n && ok11 == 10;
    let mut o = Outcome::new(
        pass,
        format!("C(1,1,1) closed form {ok111}/{n}, C(2,1) closed form {ok21}/{n}, C(1,1) at d=0 {ok11}/10"),
    );
    o.notes = notes;
    Ok(o)
}

fn ratio(a: &BigRational, b: &BigRational) -> f64 {
    HpReal::from_rational(&(a / b)).to_f64()
}

fn box_oracle() -> Result<Outcome> {
    let mut checks = 0;
    let mut bad = Vec::new();
    let mut terms = 0u64;
    for q in [3u64, 5] {
        for c in curves(q, 5, 1, SEED)?.into_iter().chain(curves(q, 6, 1, SEED)?) {
            let ctx = context(&c)?;
            for n in 2..=4usize {
                for parts in compositions(n).into_iter().filter(|p| p.len() > 1) {
                    for d in 0..n as i64 {
                        let exact = ctx.c_l(&parts, d)?;
                        let b = ctx.c_l_box_oracle(&parts, d, 60)?;
                        let diff = &exact - &b.partial;
                        if diff.is_negative() || diff > b.tail_bound {
                            bad.push(format!("q={q} {parts:?} d={d}: difference {}", HpReal::from_rational(&diff).to_f64()));
                        }
                        terms += b.terms;
                        checks += 1;
                    }
                }
            }
        }
    }
    let mut o = Outcome::new(bad.is_empty(), format!("{checks} (curve, composition, d) cases, {terms} box terms"));
    o.notes = bad;
    Ok(o)
}

/// (√Q ± 1)^{2g} = a ± b√Q with integers a, b.
fn weil_parts(qr: &BigInt, g: usize) -> (BigInt, BigInt) {
    let (mut a, mut b) = (BigInt::zero(), BigInt::zero());
    let n = 2 * g;
    let mut binom = BigInt::one();
    for k in 0..=n {
        // binom(n, k) · (√Q)^k
        if k % 2 == 0 {
            a += &binom * qr.pow((k / 2) as u32);
        } else {
            b += &binom * qr.pow((k / 2) as u32);
        }
        binom = binom * BigInt::from(n - k) / BigInt::from(k + 1);
    }
    (a, b)
}

/// Whether a - b√Q ≤ n ≤ a + b√Q, decided in integers.
fn in_weil_interval(n: &BigInt, qr: &BigInt, g: usize) -> bool {
    let (a, b) = weil_parts(qr, g);
    let b2q = &b * &b * qr;
    let upper = n <= &a || (n - &a).pow(2) <= b2q;
    let lower = n >= &a || (&a - n).pow(2) <= b2q;
    upper && lower
}

fn lpoly_soundness() -> Result<Outcome> {
    let mut bad = Vec::new();
    let mut round_trips = 0;
    for c in curves(3, 5, 20, SEED)? {
        let l = c.l_polynomial()?;
        for m in 3..=4 {
            if BigInt::from(c.count_points(m)?) != l.point_count(m)? {
                bad.push(format!("N_{m} mismatch for {:?}", c.poly().labels()));
            }
            round_trips += 1;
        }
    }
    let mut weil = 0;
    let mut fe = 0;
    for (q, gamma) in [(3u64, 5usize), (3, 7), (5, 5), (5, 6), (7, 5), (7, 8), (9, 5), (11, 6)] {
        for c in curves(q, gamma, 25, SEED + 1)? {
            let l = c.l_polynomial()?;
            match l.check() {
                Ok(()) => fe += 1,
                Err(e) => bad.push(format!("functional equation: {e}")),
            }
            for r in 1..=2usize {
                let qr = BigInt::from(q).pow(r as u32);
                let nj = l.jacobian_order(r)?;
                if !in_weil_interval(&nj, &qr, c.genus()) {
                    bad.push(format!("N_(q^{r})(J) = {nj} outside the Weil interval, q={q}"));
                }
                weil += 1;
            }
        }
    }
    let mut o = Outcome::new(
        bad.is_empty(),
        format!("{fe}/200 functional equations, {round_trips} round trips at q=3, {weil} Weil intervals"),
    );
    o.notes = bad;
    Ok(o)
}

fn delta_paths() -> Result<Outcome> {
    let f: Field = field_of_order(3)?;
    let table = PrimeTable::new(&f, 6)?;
    let mut agree = 0;
    let mut total = 0;
    for (i, c) in curves(3, 5, 10, SEED)?.into_iter().chain(curves(3, 6, 10, SEED)?).enumerate() {
        let l = c.l_polynomial()?;
        for z in 1..=6 {
            let a = delta_from_sums(3, &character_sums(c.poly(), &table, z)?);
            let b = delta_from_sums(3, &spectral_sums(&l, c.delta(), z));
            total += 1;
            if a == b {
                agree += 1;
            } else if i < 3 {
                eprintln!("Δ_{z} differs: {a} vs {b}");
            }
        }
    }
    Ok(Outcome::new(agree == total, format!("{agree}/{total} (curve, Z) pairs equal")))
}

fn moment_identity() -> Result<Outcome> {
    let mut spec = FamilySpec::new(3, 5, Mode::Exhaustive);
    spec.z = Some(5);
    let mut lines = 0;
    let report = survey(&spec, &DirectCount, |_| {
        lines += 1;
        Ok(())
    })?;
    let rows: Vec<_> = report.rows.iter().filter(|r| r.statistic == "delta_z" && r.r <= 2).collect();
    let pass = rows.len() == 2 && rows.iter().all(|r| r.pass == Some(true)) && lines == 162;
    let detail = rows
        .iter()
        .map(|r| {
            format!(
                "<Δ^{}> = {:.6} vs H({}) = {:.6} (tol {} + tail {:.1e})",
                r.r,
                r.empirical,
                r.r,
                r.theoretical.unwrap_or(f64::NAN),
                r.tolerance.unwrap_or(f64::NAN),
                r.tail.unwrap_or(f64::NAN)
            )
        })
        .collect::<Vec<_>>()
        .join("; ");
    Ok(Outcome::new(pass, format!("{lines} curves; {detail}")))
}

fn cross_form() -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    let mut pass = true;
    let mut notes = Vec::new();
    for q in [3u64, 5, 7] {
        for r in 1..=3 {
            let a = moment_h(q, r, 12, HForm::SquareTuples, SquareWeight::Reciprocal)?;
            let b = moment_h(q, r, 12, HForm::DistinctPrimes, SquareWeight::Reciprocal)?;
            let ratio = (a.value - b.value).abs() / (a.tail + b.tail);
            pass &= ratio <= 1.0;
            worst = worst.max(ratio);
            if r == 1 {
                let lit = moment_h(q, r, 12, HForm::SquareTuples, SquareWeight::Literal)?;
                notes.push(format!(
                    "q={q}: literal square weight moves H(1) by {:.2e} (tails {:.1e})",
                    (lit.value - b.value).abs(),
                    a.tail + b.tail
                ));
            }
        }
    }
    let mut o = Outcome::new(pass, format!("largest |difference| / combined tails = {worst:.3e}"));
    o.notes = notes;
    Ok(o)
}

fn asymptotics() -> Result<Outcome> {
    let mut pass = true;
    let mut parts = Vec::new();
    for q in [9u64, 13, 25] {
        let h1 = moment_h(q, 1, 12, HForm::DistinctPrimes, SquareWeight::Reciprocal)?;
        let h2 = moment_h(q, 2, 12, HForm::DistinctPrimes, SquareWeight::Reciprocal)?;
        let q3 = (q as f64).powi(3);
        // Worst case over the certified interval of each truncation.
        let e2 = (h2.value * q3 - 1.0).abs() + h2.tail * q3;
        let e1 = h1.value.abs() * q3 + h1.tail * q3;
        let bound2 = 20.0 * (q as f64).powf(-1.5);
        pass &= e2 <= bound2 && e1 <= 20.0;
        parts.push(format!("q={q}: |H2 q^3 - 1| = {e2:.3e} (<= {bound2:.3e}), |H1| q^3 = {e1:.3}"));
    }
    Ok(Outcome::new(pass, parts.join("; ")))
}

fn gaussian_check(report: &MomentReport, key: &str) -> (bool, String) {
    match report.statistic(key).and_then(|s| s.standardized) {
        Some(s) => {
            let ok = s.iter().zip(GAUSSIAN_TARGETS.iter()).all(|(v, (t, tol))| (v - t).abs() <= *tol);
            (ok, format!("{key}: mean {:.3} var {:.3} skew {:.3} kurt {:.3}", s[0], s[1], s[2], s[3]))
        }
        None => (false, format!("{key}: no standardized moments")),
    }
}

fn clt() -> Result<Outcome> {
    let mut spec = FamilySpec::new(13, 9, Mode::Sample { count: 20_000, seed: SEED });
    spec.statistics = vec![Statistic::Mnd { n: 2, d: 1 }, Statistic::Ms20, Statistic::Ntilde];
    let report = survey(&spec, &DirectCount, |_| Ok(()))?;
    let mut pass = report.failed == 0;
    let mut lines = Vec::new();
    for key in ["mnd(2,1).raw", "ms20", "ntilde"] {
        let (ok, line) = gaussian_check(&report, key);
        pass &= ok;
        lines.push(format!("{} {line}", if ok { "ok" } else { "red" }));
    }
    let mut o = Outcome::new(pass, format!("{} curves, {} failed; {}", report.curves, report.failed, lines.join("; ")));
    for key in ["mnd(2,1).centered", "ms20.raw", "ntilde.raw"] {
        o.notes.push(format!("diagnostic {}", gaussian_check(&report, key).1));
    }
    Ok(o)
}

fn bound_monitoring() -> Result<Outcome> {
    let mut worst_ratio: f64 = 0.0;
    let mut worst_gap: f64 = 0.0;
    let mut worst_geometric_gap: f64 = 0.0;
    let mut n = 0;
    let log_half = 0.5f64.ln();
    for q in [9u64, 13, 25] {
        for gamma in [7usize, 9] {
            let g = (gamma - 1) / 2;
            let a = 2.0 * (1.0 / (q as f64).sqrt() + (g as f64).ln().ln() / (q * q) as f64);
            let mut spec = FamilySpec::new(q, gamma, Mode::Sample { count: 200, seed: SEED });
            spec.statistics = vec![Statistic::Mnd { n: 2, d: 1 }, Statistic::Ntilde];
            let mut recs: Vec<SurveyRecord> = Vec::new();
            survey(&spec, &DirectCount, |r| {
                recs.push(r.clone());
                Ok(())
            })?;
            let field = field_of_order(q)?;
            for rec in &recs {
                let raw = rec.stat("mnd(2,1).raw").unwrap_or(f64::INFINITY);
                worst_ratio = worst_ratio.max(raw.abs() / (10.0 * a));
                let gap = rec.stat("ntilde.gap").unwrap_or(f64::INFINITY);
                worst_gap = worst_gap.max((gap - log_half).abs());
                worst_geometric_gap = worst_geometric_gap.max((geometric_gap(&field, rec)? - log_half).abs());
                n += 1;
            }
        }
    }
    let pass = worst_ratio <= 1.0 && worst_gap <= 1.0;
    let mut o = Outcome::new(
        pass,
        format!(
            "{n} curves; max |log N(M_L(2,1)) - 3(g-1) log q| / 10A = {worst_ratio:.3}, max |gap - log(1/2)| = {worst_gap:.3}"
        ),
    );
    o.notes.push(format!("diagnostic: max |gap - log(1/2)| with the literal strata = {worst_geometric_gap:.3}"));
    Ok(o)
}

/// The Ñ gap with the literal strata, which need not give an integer count.
fn geometric_gap(field: &Field, rec: &SurveyRecord) -> Result<f64> {
    let c = HyperellipticCurve::from_labels(field, &rec.poly)?;
    let coeffs: Vec<BigInt> = rec.lpoly.iter().map(|s| s.parse().expect("integer coefficient")).collect();
    let ctx = CurveContext::new(LPolynomial::from_coeffs(c.q(), coeffs)?)?;
    let data = Rank2Data::new(&ctx, &c)?;
    let total = moduli::desingularization_parts(&ctx, &data, StrataModel::Geometric, Beta1Variant::Full)?.total();
    let q = c.q() as f64;
    let g = c.genus() as f64;
    let ln_total = HpReal::ln_rational(&total).to_f64();
    let ln_nj2 = HpReal::ln_int(&data.nj2).to_f64();
    Ok(ln_total - (4.0 * g - 4.0) * q.ln() - (ln_nj2 - 2.0 * g * q.ln()))
}

fn determinism() -> Result<Outcome> {
    let run = |threads: usize| -> Result<(String, String, String)> {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().expect("thread pool");
        pool.install(|| {
            let mut spec = FamilySpec::new(5, 6, Mode::Sample { count: 600, seed: SEED });
            spec.z = Some(4);
            spec.statistics = vec![Statistic::DeltaZ, Statistic::Mnd { n: 3, d: 1 }, Statistic::Ms20, Statistic::Ntilde];
            let mut jsonl = String::new();
            let report = survey(&spec, &DirectCount, |r| {
                jsonl.push_str(&r.to_json_line());
                jsonl.push('\n');
                Ok(())
            })?;
            let json = serde_json::to_string(&report).expect("report serializes");
            Ok((jsonl, report.to_csv(), json))
        })
    };
    let one = run(1)?;
    let eight = run(8)?;
    let pass = one == eight;
    Ok(Outcome::new(
        pass,
        format!("records {} bytes, CSV {} bytes, report {} bytes; {}", one.0.len(), one.1.len(), one.2.len(), if pass { "identical" } else { "DIFFERENT" }),
    ))
}

fn main() {
    let criteria: Vec<(&str, fn() -> Result<Outcome>)> = vec![
        ("integrality battery", integrality),
        ("golden closed forms", golden),
        ("box-oracle agreement (R=60)", box_oracle),
        ("L-polynomial soundness", lpoly_soundness),
        ("Δ_Z two-path equality", delta_paths),
        ("moment identity, exhaustive q=3 γ=5", moment_identity),
        ("H(r) cross-form", cross_form),
        ("H(r) asymptotics", asymptotics),
        ("CLT desk check, q=13 γ=9", clt),
        ("bound monitoring", bound_monitoring),
        ("determinism across 1 and 8 threads", determinism),
    ];
    let mut red = 0;
    for (i, (name, f)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = f().unwrap_or_else(|e| Outcome::new(false, format!("error: {e}")));
        let secs = start.elapsed().as_secs_f64();
        println!(
            "criterion {:>2}: {}  {name}: {} [{secs:.1}s]",
            i + 1,
            if outcome.pass { "PASS" } else { "FAIL" },
            outcome.detail
        );
        for note in &outcome.notes {
            println!("               {note}");
        }
        if !outcome.pass {
            red += 1;
        }
    }
    println!("{} of 11 criteria passed", 11 - red);
    if red > 0 {
        std::process::exit(1);
    }
}
