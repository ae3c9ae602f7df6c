//! Surveys over the family: per-curve records, exact aggregation of moments,
//! and the comparison of empirical against theoretical values.
//!
//! Curves are processed in fixed-size chunks of consecutive indices. Inside a
//! chunk the work is spread over the current rayon pool, and results come back
//! in index order. Moment sums are kept as fixed-point reals, whose addition is
//! exact, so the report is the same for every thread count.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve::{HyperellipticCurve, LPolynomial};
use crate::error::{Error, Result};
use crate::family::{analyze_with_lpoly, enumerate_family, sample_curve, FamilySpec, Mode, PrimeTable, Statistic};
use crate::field::{field_of_order, Field};
use crate::hp::HpReal;
use crate::poly::MonicPoly;
use crate::theory::{moment_h, HForm, SquareWeight, Truncated};

/// Version tag carried by every record and report.
pub const SCHEMA_VERSION: u32 = 1;
/// Digits after the decimal point in serialized reals.
pub const DECIMAL_DIGITS: u32 = 40;
const CHUNK: usize = 256;

/// Standard-Gaussian targets and tolerances for (mean, variance, skewness, kurtosis).
pub const GAUSSIAN_TARGETS: [(f64, f64); 4] = [(0.0, 0.05), (1.0, 0.15), (0.0, 0.2), (3.0, 0.4)];

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeltaRecord {
    pub z: usize,
    /// Exact value as "numerator/denominator".
    pub exact: String,
    /// Whether the character-sum path was run and matched.
    pub paths_checked: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorRecord {
    pub class: String,
    pub message: String,
}

/// One line of survey output.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurveyRecord {
    pub schema: u32,
    pub index: u64,
    pub q: u64,
    pub gamma: usize,
    pub genus: usize,
    /// Labels of c_0..c_{γ-1}; the leading 1 is implicit.
    pub poly: Vec<u64>,
    pub lpoly: Vec<String>,
    pub nj: Option<String>,
    pub nj2: Option<String>,
    pub counts: BTreeMap<String, String>,
    pub stats: BTreeMap<String, String>,
    pub delta_z: Option<DeltaRecord>,
    pub error: Option<ErrorRecord>,
}

impl SurveyRecord {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("records serialize")
    }

    /// Parse one JSONL line, rejecting other schema versions.
    pub fn from_json_line(line: &str) -> Result<Self> {
        let v: serde_json::Value = serde_json::from_str(line).map_err(|e| Error::Invalid(format!("bad record: {e}")))?;
        match v.get("schema").and_then(|s| s.as_u64()) {
            Some(s) if s == SCHEMA_VERSION as u64 => {}
            Some(s) => return Err(Error::Invalid(format!("unknown record schema version {s}"))),
            None => return Err(Error::Invalid("record has no schema version".into())),
        }
        serde_json::from_value(v).map_err(|e| Error::Invalid(format!("bad record: {e}")))
    }

    /// The real statistic `key`, parsed back from its decimal string.
    pub fn stat(&self, key: &str) -> Option<f64> {
        self.stats.get(key).and_then(|s| s.parse().ok())
    }

    pub fn count(&self, key: &str) -> Option<BigInt> {
        self.counts.get(key).and_then(|s| s.parse().ok())
    }
}

/// A row of the CSV summary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub statistic: String,
    pub r: usize,
    pub empirical: f64,
    pub theoretical: Option<f64>,
    pub tail: Option<f64>,
    pub tolerance: Option<f64>,
    pub pass: Option<bool>,
}

impl SummaryRow {
    fn new(statistic: String, r: usize, empirical: f64, theoretical: f64, tail: f64, tolerance: Option<f64>) -> Self {
        let pass = tolerance.map(|t| (empirical - theoretical).abs() <= t + tail);
        SummaryRow { statistic, r, empirical, theoretical: Some(theoretical), tail: Some(tail), tolerance, pass }
    }
}

/// Moments of one statistic over the successful curves.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatisticSummary {
    pub name: String,
    pub count: u64,
    /// Empirical raw moments ⟨X^r⟩, r = 1..R, as decimal strings.
    pub moments: Vec<String>,
    /// Factor applied before standardizing (q^{3/2} or q); 1 if unscaled.
    pub scale: f64,
    /// Mean, variance, skewness and kurtosis of scale·X.
    pub standardized: Option<[f64; 4]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoryValue {
    pub r: usize,
    pub degree_bound: usize,
    pub value: f64,
    pub tail: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub schema: u32,
    pub spec: FamilySpec,
    pub curves: u64,
    pub failed: u64,
    pub theory: Vec<TheoryValue>,
    pub statistics: Vec<StatisticSummary>,
    pub rows: Vec<SummaryRow>,
}

impl MomentReport {
    /// True iff every row carrying a tolerance passes.
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass != Some(false))
    }

    pub fn statistic(&self, name: &str) -> Option<&StatisticSummary> {
        self.statistics.iter().find(|s| s.name == name)
    }

    /// RFC 4180 CSV with a header row.
    pub fn to_csv(&self) -> String {
        fn opt(v: Option<f64>) -> String {
            v.map(|x| format!("{x:e}")).unwrap_or_default()
        }
        let mut out = String::from("statistic,r,empirical,theoretical,tail,tolerance,pass\r\n");
        for row in &self.rows {
            let pass = match row.pass {
                Some(true) => "true",
                Some(false) => "false",
                None => "",
            };
            out.push_str(&format!(
                "\"{}\",{},{:e},{},{},{},{}\r\n",
                row.statistic.replace('"', "\"\""),
                row.r,
                row.empirical,
                opt(row.theoretical),
                opt(row.tail),
                opt(row.tolerance),
                pass
            ));
        }
        out
    }
}

/// Exact running sums of X^1..X^R.
#[derive(Clone, Debug)]
struct Accumulator {
    n: u64,
    sums: Vec<HpReal>,
}

impl Accumulator {
    fn new(order: usize) -> Self {
        Accumulator { n: 0, sums: vec![HpReal::zero(); order] }
    }
    fn push(&mut self, x: &HpReal) {
        self.n += 1;
        let mut p = x.clone();
        for k in 0..self.sums.len() {
            if k > 0 {
                p = &p * x;
            }
            self.sums[k] += &p;
        }
    }
    fn moments(&self) -> Vec<HpReal> {
        self.sums.iter().map(|s| s.div_int(self.n as i64)).collect()
    }
}

/// Mean, variance, skewness, kurtosis of scale·X from raw moments of X.
fn standardized(m: &[HpReal], scale: f64) -> Option<[f64; 4]> {
    if m.len() < 4 {
        return None;
    }
    let mu = &m[0];
    let mu2 = mu * mu;
    let c2 = &m[1] - &mu2;
    let c3 = &(&m[2] - &(&m[1] * mu).mul_int(3)) + &(&mu2 * mu).mul_int(2);
    let c4 = &(&(&m[3] - &(&m[2] * mu).mul_int(4)) + &(&m[1] * &mu2).mul_int(6)) - &(&mu2 * &mu2).mul_int(3);
    let var = c2.to_f64();
    if var <= 0.0 {
        return None;
    }
    Some([
        scale * mu.to_f64(),
        scale * scale * var,
        c3.to_f64() / var.powf(1.5),
        c4.to_f64() / (var * var),
    ])
}

/// Per-statistic scaling for the Gaussian comparison, and whether the row carries a tolerance.
fn gaussian_scaling(spec: &FamilySpec, key: &str) -> Option<(f64, bool)> {
    let q = spec.q as f64;
    let qq = match spec.ntilde_field {
        crate::family::NtildeField::Q => q,
        crate::family::NtildeField::Q2 => q * q,
    };
    if key.starts_with("mnd(") {
        return Some((q.powf(1.5), key.ends_with(".raw")));
    }
    match key {
        "ms20" => Some((q.powf(1.5), true)),
        "ms20.raw" => Some((q.powf(1.5), false)),
        "ntilde" => Some((qq, true)),
        "ntilde.raw" => Some((qq, false)),
        _ => None,
    }
}

/// Source of L-polynomials, so callers can put a cache in front of point counting.
pub trait LPolySource: Sync {
    fn l_polynomial(&self, curve: &HyperellipticCurve) -> Result<LPolynomial>;
}

/// Counts points every time.
pub struct DirectCount;

impl LPolySource for DirectCount {
    fn l_polynomial(&self, curve: &HyperellipticCurve) -> Result<LPolynomial> {
        curve.l_polynomial()
    }
}

fn record_for(spec: &FamilySpec, index: u64, f: &MonicPoly, source: &dyn LPolySource, table: Option<&PrimeTable>) -> (SurveyRecord, BTreeMap<String, HpReal>) {
    let mut rec = SurveyRecord {
        schema: SCHEMA_VERSION,
        index,
        q: spec.q,
        gamma: spec.gamma,
        genus: (spec.gamma - 1) / 2,
        poly: f.labels(),
        lpoly: Vec::new(),
        nj: None,
        nj2: None,
        counts: BTreeMap::new(),
        stats: BTreeMap::new(),
        delta_z: None,
        error: None,
    };
    let result = HyperellipticCurve::new(f.clone()).and_then(|c| {
        let l = source.l_polynomial(&c)?;
        analyze_with_lpoly(spec, &c, l, table)
    });
    match result {
        Ok(st) => {
            if let Some(l) = &st.lpoly {
                rec.lpoly = l.coeffs().iter().map(|a| a.to_string()).collect();
            }
            rec.nj = st.nj.as_ref().map(|v| v.to_string());
            rec.nj2 = st.nj2.as_ref().map(|v| v.to_string());
            rec.counts = st.counts.iter().map(|(k, v)| (k.clone(), v.to_string())).collect();
            rec.stats = st.values.iter().map(|(k, v)| (k.clone(), v.to_decimal(DECIMAL_DIGITS))).collect();
            rec.delta_z = st.delta.as_ref().map(|d| DeltaRecord {
                z: d.z,
                exact: d.value.to_string(),
                paths_checked: d.paths_checked,
            });
            (rec, st.values)
        }
        Err(e) => {
            rec.error = Some(ErrorRecord { class: format!("{:?}", e.class()).to_lowercase(), message: e.to_string() });
            (rec, BTreeMap::new())
        }
    }
}

/// Run a survey, handing each record to `sink` in index order.
pub fn survey(
    spec: &FamilySpec,
    source: &dyn LPolySource,
    mut sink: impl FnMut(&SurveyRecord) -> Result<()>,
) -> Result<MomentReport> {
    spec.validate()?;
    let field: Field = field_of_order(spec.q)?;
    let want_delta = spec.statistics.contains(&Statistic::DeltaZ);
    // The character-sum path is an independent check; skip it when too large.
    let table = if want_delta { PrimeTable::new(&field, spec.truncation()).ok() } else { None };
    let order = spec.moments.max(4);
    let mut acc: BTreeMap<String, Accumulator> = BTreeMap::new();
    let (mut curves, mut failed) = (0u64, 0u64);

    let mut consume = |batch: Vec<(SurveyRecord, BTreeMap<String, HpReal>)>| -> Result<()> {
        for (rec, values) in batch {
            curves += 1;
            if rec.error.is_some() {
                failed += 1;
            }
            for (k, v) in &values {
                acc.entry(k.clone()).or_insert_with(|| Accumulator::new(order)).push(v);
            }
            sink(&rec)?;
        }
        Ok(())
    };

    match spec.mode {
        Mode::Exhaustive => {
            let mut it = enumerate_family(&field, spec.gamma)?.enumerate();
            loop {
                let chunk: Vec<(usize, MonicPoly)> = it.by_ref().take(CHUNK).collect();
                if chunk.is_empty() {
                    break;
                }
                let batch: Vec<_> =
                    chunk.par_iter().map(|(i, f)| record_for(spec, *i as u64, f, source, table.as_ref())).collect();
                consume(batch)?;
            }
        }
        Mode::Sample { count, seed } => {
            let mut start = 0u64;
            while start < count {
                let end = (start + CHUNK as u64).min(count);
                let batch: Vec<_> = (start..end)
                    .into_par_iter()
                    .map(|i| sample_curve(&field, spec.gamma, seed, i).map(|f| record_for(spec, i, &f, source, table.as_ref())))
                    .collect::<Result<_>>()?;
                consume(batch)?;
                start = end;
            }
        }
    }

    let theory: Vec<TheoryValue> = (1..=spec.moments)
        .map(|r| {
            moment_h(spec.q, r, spec.degree_bound, HForm::DistinctPrimes, SquareWeight::Reciprocal)
                .map(|Truncated { value, tail }| TheoryValue { r, degree_bound: spec.degree_bound, value, tail })
        })
        .collect::<Result<_>>()?;

    let mut statistics = Vec::new();
    let mut rows = Vec::new();
    let z_tail = (spec.q as f64).powi(-(spec.truncation() as i32));
    for (name, a) in &acc {
        let m = a.moments();
        let scale = gaussian_scaling(spec, name);
        let std = scale.and_then(|(s, _)| standardized(&m, s));
        statistics.push(StatisticSummary {
            name: name.clone(),
            count: a.n,
            moments: m.iter().take(spec.moments).map(|x| x.to_decimal(DECIMAL_DIGITS)).collect(),
            scale: scale.map_or(1.0, |s| s.0),
            standardized: std,
        });
        if name == "delta_z" || (name.starts_with("mnd(") && name.ends_with(".centered")) {
            for t in &theory {
                let tol = (name == "delta_z" && t.r <= 2).then_some(0.01 * t.r as f64);
                let tail = t.tail + if name == "delta_z" { z_tail } else { 0.0 };
                rows.push(SummaryRow::new(name.clone(), t.r, m[t.r - 1].to_f64(), t.value, tail, tol));
            }
        }
        if name == "ntilde.gap" {
            rows.push(SummaryRow::new(name.clone(), 1, m[0].to_f64(), 0.5f64.ln(), 0.0, None));
        }
        if let (Some((_, with_tol)), Some(s)) = (scale, std) {
            for (k, &(target, tol)) in GAUSSIAN_TARGETS.iter().enumerate() {
                rows.push(SummaryRow::new(format!("{name}.scaled"), k + 1, s[k], target, 0.0, with_tol.then_some(tol)));
            }
        }
    }

    Ok(MomentReport { schema: SCHEMA_VERSION, spec: spec.clone(), curves, failed, theory, statistics, rows })
}
