use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use census_core::curve::HyperellipticCurve;
use census_core::family::{self, FamilySpec, Mode, Statistic};
use census_core::field::{field_of_order, Field};
use census_core::hn::CurveContext;
use census_core::hp::HpReal;
use census_core::moduli::{self, Beta1Variant, Rank2Data, StrataModel};
use census_core::poly::MonicPoly;
use census_core::survey::{self, LPolySource, DECIMAL_DIGITS};
use census_core::theory::{self, HForm};
use census_core::{Error, Result};
use num_rational::BigRational;
use serde::Serialize;
use serde_json::{json, Value};

use crate::cache::{CountingSource, LPolyCache};
use crate::{Cli, Command, CurveArgs, SurveyArgs, TheoryArgs, TheoryKind, EXIT_TOLERANCE};

/// The L-polynomial source for a run: the cache when configured, else direct counting.
pub enum Source {
    Cache(LPolyCache),
    Direct(CountingSource),
}

impl Source {
    pub fn open(cli: &Cli) -> Result<Source> {
        match cli.effective_cache_dir() {
            Some(dir) => {
                let (cache, report) = LPolyCache::open(&dir, cli.verbose)?;
                for (line, why) in &report.dropped {
                    eprintln!("cache: {}: line {line} dropped ({why}); it will be recomputed", cache.path().display());
                }
                if cli.verbose {
                    eprintln!("cache: {} entries loaded from {}", report.entries, cache.path().display());
                }
                Ok(Source::Cache(cache))
            }
            None => Ok(Source::Direct(CountingSource::default())),
        }
    }

    pub fn as_source(&self) -> &dyn LPolySource {
        match self {
            Source::Cache(c) => c,
            Source::Direct(d) => d,
        }
    }

    pub fn point_counts(&self) -> u64 {
        match self {
            Source::Cache(c) => c.point_counts(),
            Source::Direct(d) => d.point_counts(),
        }
    }
}

/// Interpret `--poly` (constant term first) as a monic F; see the flag's help.
pub fn parse_poly(field: &Field, labels: &[u64], gamma: Option<usize>) -> Result<MonicPoly> {
    let lower: &[u64] = match gamma {
        Some(g) if labels.len() == g => labels,
        Some(g) if labels.len() == g + 1 && labels[g] == 1 => &labels[..g],
        Some(g) => {
            return Err(Error::Invalid(format!(
                "--poly has {} entries, expected {g} (leading 1 implicit) or {} ending in 1",
                labels.len(),
                g + 1
            )))
        }
        None if labels.len() >= 6 && labels.last() == Some(&1) => &labels[..labels.len() - 1],
        None => labels,
    };
    MonicPoly::from_labels(field, lower)
}

pub fn load_curve(args: &CurveArgs) -> Result<HyperellipticCurve> {
    let field = field_of_order(args.q)?;
    HyperellipticCurve::new(parse_poly(&field, &args.poly, args.gamma)?)
}

fn rational_json(r: &BigRational) -> Value {
    json!({ "exact": r.to_string(), "decimal": HpReal::from_rational(r).to_decimal(DECIMAL_DIGITS) })
}

fn real(x: &HpReal) -> String {
    x.to_decimal(DECIMAL_DIGITS)
}

fn curve_header(curve: &HyperellipticCurve) -> Value {
    json!({
        "q": curve.q(),
        "gamma": curve.gamma(),
        "genus": curve.genus(),
        "poly": curve.poly().labels(),
    })
}

fn merge(mut a: Value, b: Value) -> Value {
    if let (Some(ma), Value::Object(mb)) = (a.as_object_mut(), b) {
        ma.extend(mb);
    }
    a
}

fn emit(cli: &Cli, v: &Value) -> Result<()> {
    let text = serde_json::to_string_pretty(v).expect("json");
    println!("{text}");
    if let Some(path) = &cli.out {
        fs::write(path, format!("{text}\n")).map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

fn report_work(cli: &Cli, source: &Source) {
    if cli.verbose {
        eprintln!("point counts performed: {}", source.point_counts());
    }
}

pub fn dispatch(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Curve(a) => cmd_curve(cli, a),
        Command::Moduli(a) => cmd_moduli(cli, &a.curve, a.rank, a.deg),
        Command::Stable20(a) => cmd_stable20(cli, a),
        Command::Ntilde(a) => cmd_ntilde(cli, a),
        Command::Survey(a) => cmd_survey(cli, a),
        Command::Theory(a) => cmd_theory(cli, a),
        Command::Check => crate::check::cmd_check(cli),
    }
}

fn context(cli: &Cli, args: &CurveArgs) -> Result<(HyperellipticCurve, CurveContext, Source)> {
    let curve = load_curve(args)?;
    let source = Source::open(cli)?;
    let l = source.as_source().l_polynomial(&curve)?;
    let ctx = CurveContext::new(l)?;
    Ok((curve, ctx, source))
}

fn cmd_curve(cli: &Cli, args: &CurveArgs) -> Result<i32> {
    let (curve, ctx, source) = context(cli, args)?;
    let l = ctx.lpoly();
    let g = curve.genus();
    let counts: Vec<String> = (1..=g + 2).map(|m| l.point_count(m).map(|n| n.to_string())).collect::<Result<_>>()?;
    let mut zeta = serde_json::Map::new();
    for k in 2..=4u32 {
        zeta.insert(k.to_string(), rational_json(&l.zeta_value(k)?));
    }
    let v = merge(
        curve_header(&curve),
        json!({
            "point_counts": counts,
            "lpoly": l.coeffs().iter().map(|a| a.to_string()).collect::<Vec<_>>(),
            "nj": ctx.nj().to_string(),
            "nj2": l.jacobian_order(2)?.to_string(),
            "zeta": zeta,
        }),
    );
    emit(cli, &v)?;
    report_work(cli, &source);
    Ok(0)
}

fn cmd_moduli(cli: &Cli, args: &CurveArgs, n: usize, d: i64) -> Result<i32> {
    let (curve, ctx, source) = context(cli, args)?;
    let c = moduli::count_ml(&ctx, n, d)?.value;
    let raw = family::mnd_raw(&c, curve.q(), n, curve.genus());
    let centered = family::mnd_centered(&raw, curve.q(), n, curve.delta());
    let v = merge(
        curve_header(&curve),
        json!({
            "rank": n,
            "deg": d,
            "count": c.to_string(),
            "statistic": { "raw": real(&raw), "centered": real(&centered) },
        }),
    );
    emit(cli, &v)?;
    report_work(cli, &source);
    Ok(0)
}

fn strata_json(s: &moduli::KummerStrata) -> Value {
    json!({ "k0": s.size_k0.to_string(), "a": s.size_a.to_string(), "b": s.size_b.to_string() })
}

fn models(cli: &Cli) -> (StrataModel, Beta1Variant) {
    (cli.strata.into(), cli.beta1_variant.into())
}

fn cmd_stable20(cli: &Cli, args: &CurveArgs) -> Result<i32> {
    let (curve, ctx, source) = context(cli, args)?;
    let (model, variant) = models(cli);
    let data = Rank2Data::new(&ctx, &curve)?;
    let strata = moduli::kummer_strata(&ctx, &data, model)?;
    let routes = moduli::stable20_routes(&ctx, &data, model, variant)?;
    let count = moduli::count_ms20(&ctx, &data, model, variant);
    let mut v = merge(
        curve_header(&curve),
        json!({
            "strata": strata_json(&strata),
            "routes": { "assembly": routes.assembly.to_string(), "closed_form": routes.closed_form.to_string() },
        }),
    );
    let result = match &count {
        Ok(c) => {
            let raw = family::ms20_raw(&c.value, curve.q(), curve.genus());
            let centered = family::ms20_centered(&raw, curve.q(), curve.delta());
            v = merge(v, json!({ "count": c.value.to_string(), "statistic": { "raw": real(&raw), "centered": real(&centered) } }));
            Ok(0)
        }
        Err(e) => {
            v = merge(v, json!({ "count": null, "error": e.to_string() }));
            Err(e.clone())
        }
    };
    emit(cli, &v)?;
    report_work(cli, &source);
    result
}

fn cmd_ntilde(cli: &Cli, args: &CurveArgs) -> Result<i32> {
    let (curve, ctx, source) = context(cli, args)?;
    let (model, variant) = models(cli);
    let data = Rank2Data::new(&ctx, &curve)?;
    let parts = moduli::desingularization_parts(&ctx, &data, model, variant)?;
    let count = moduli::count_desingularization(&ctx, &data, model, variant);
    let mut v = merge(
        curve_header(&curve),
        json!({
            "parts": {
                "stable": parts.stable.to_string(),
                "y": parts.y.to_string(),
                "r": parts.r.to_string(),
                "s": parts.s.to_string(),
            },
        }),
    );
    let result = match &count {
        Ok(c) => {
            let raw = family::ntilde_raw(&c.value, curve.q(), curve.genus());
            let centered = family::ntilde_centered(&raw, curve.q(), curve.delta());
            let gap = family::ntilde_gap(&raw, &data.nj2, curve.q(), curve.genus());
            v = merge(
                v,
                json!({
                    "count": c.value.to_string(),
                    "statistic": { "raw": real(&raw), "centered": real(&centered), "gap": real(&gap) },
                }),
            );
            Ok(0)
        }
        Err(e) => {
            v = merge(v, json!({ "count": null, "error": e.to_string() }));
            Err(e.clone())
        }
    };
    emit(cli, &v)?;
    report_work(cli, &source);
    result
}

/// Everything a survey output depends on, written next to the outputs.
#[derive(Serialize)]
struct RunConfig<'a> {
    command: &'static str,
    spec: &'a FamilySpec,
    threads: Option<usize>,
    cache_dir: Option<PathBuf>,
}

pub fn survey_spec(cli: &Cli, a: &SurveyArgs) -> Result<FamilySpec> {
    let mode = match (a.exhaustive, a.samples) {
        (true, _) => Mode::Exhaustive,
        (false, Some(count)) => Mode::Sample { count, seed: a.seed },
        (false, None) => return Err(Error::Invalid("give --exhaustive or --samples".into())),
    };
    let mut spec = FamilySpec::new(a.q, a.gamma, mode);
    spec.z = a.z;
    spec.moments = a.r_max;
    spec.degree_bound = a.degree_bound;
    spec.strata = cli.strata.into();
    spec.beta1 = cli.beta1_variant.into();
    spec.ntilde_field = a.ntilde_field.into();
    if let (Some(n), Some(d)) = (a.rank, a.deg) {
        spec.statistics.push(Statistic::Mnd { n, d });
    }
    for s in &a.stats {
        let st = match s {
            crate::ExtraStat::Ms20 => Statistic::Ms20,
            crate::ExtraStat::Ntilde => Statistic::Ntilde,
        };
        if !spec.statistics.contains(&st) {
            spec.statistics.push(st);
        }
    }
    spec.validate()?;
    Ok(spec)
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))
}

fn cmd_survey(cli: &Cli, a: &SurveyArgs) -> Result<i32> {
    let spec = survey_spec(cli, a)?;
    let source = Source::open(cli)?;
    let prefix = cli.out.clone().unwrap_or_else(|| PathBuf::from("survey"));
    let io = |p: &Path, e: std::io::Error| Error::Invalid(format!("{}: {e}", p.display()));

    let config = RunConfig { command: "survey", spec: &spec, threads: cli.threads, cache_dir: cli.effective_cache_dir() };
    let config_path = with_suffix(&prefix, ".config.json");
    fs::write(&config_path, serde_json::to_string_pretty(&config).expect("json") + "\n").map_err(|e| io(&config_path, e))?;

    let jsonl_path = with_suffix(&prefix, ".jsonl");
    let mut jsonl = create(&jsonl_path)?;
    let report = survey::survey(&spec, source.as_source(), |rec| {
        writeln!(jsonl, "{}", rec.to_json_line()).map_err(|e| io(&jsonl_path, e))
    })?;
    jsonl.flush().map_err(|e| io(&jsonl_path, e))?;

    let csv_path = with_suffix(&prefix, ".csv");
    fs::write(&csv_path, report.to_csv()).map_err(|e| io(&csv_path, e))?;
    let report_path = with_suffix(&prefix, ".report.json");
    fs::write(&report_path, serde_json::to_string_pretty(&report).expect("json") + "\n").map_err(|e| io(&report_path, e))?;

    println!("{} curves ({} failed); records in {}", report.curves, report.failed, jsonl_path.display());
    print!("{}", report.to_csv());
    report_work(cli, &source);
    Ok(if report.all_pass() { 0 } else { EXIT_TOLERANCE })
}

fn cmd_theory(cli: &Cli, a: &TheoryArgs) -> Result<i32> {
    let v = match a.kind {
        TheoryKind::Hr => {
            let mut rows = Vec::new();
            for (name, form) in [("square-tuples", HForm::SquareTuples), ("distinct-primes", HForm::DistinctPrimes)] {
                let t = theory::moment_h(a.q, a.r, a.degree_bound, form, a.square_weight.into())?;
                println!("{name:>16}  r={}  D={}  value={:.15e}  tail={:.3e}", a.r, a.degree_bound, t.value, t.tail);
                rows.push(json!({ "form": name, "r": a.r, "degree_bound": a.degree_bound, "value": t.value, "tail": t.tail }));
            }
            json!({ "q": a.q, "rows": rows })
        }
        TheoryKind::Phi => {
            let mut rows = Vec::new();
            for &tau in &a.tau {
                let z = theory::char_fn_phi(a.q, tau, a.degree_bound, a.r_max)?;
                println!("tau={tau:<8}  re={:.15e}  im={:.15e}", z.re, z.im);
                rows.push(json!({ "tau": tau, "re": z.re, "im": z.im }));
            }
            json!({ "q": a.q, "degree_bound": a.degree_bound, "r_max": a.r_max, "rows": rows })
        }
    };
    if let Some(path) = &cli.out {
        fs::write(path, serde_json::to_string_pretty(&v).expect("json") + "\n")
            .map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))?;
    }
    Ok(0)
}
