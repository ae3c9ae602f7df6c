//! The family of curves y² = F(x), F monic squarefree of degree γ over F_q,
//! and the per-curve statistics computed from exact counts.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::curve::{HyperellipticCurve, LPolynomial};
use crate::error::{invariant, Error, Result};
use crate::field::Field;
use crate::hn::CurveContext;
use crate::hp::HpReal;
use crate::moduli::{
    base_change_degrees, count_desingularization, count_ml, count_ms20, two_torsion_from_degrees, Beta1Variant,
    Rank2Data, StrataModel,
};
use crate::poly::{irreducibles_of_degree, legendre_poly_unchecked, MonicPoly};
use crate::rng::{self, Domain};

/// Rejection sampling gives up after this many draws for one index.
pub const MAX_ATTEMPTS: u64 = 1_000_000;
/// Exhaustive enumeration is refused beyond q^γ monics.
pub const MAX_EXHAUSTIVE: u128 = 10_000_000;
/// The character-sum path of Δ_Z is run only when Σ_{m≤Z} q^m stays below this.
pub const MAX_CHARACTER_SUM_MONICS: u128 = 2_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Exhaustive,
    Sample { count: u64, seed: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Statistic {
    Mnd { n: usize, d: i64 },
    Ms20,
    Ntilde,
    DeltaZ,
}

/// Field over which N(Ñ) is counted.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NtildeField {
    /// N_q(Ñ) of the curve over F_q.
    #[default]
    Q,
    /// N_{q²}(Ñ) of the same curve after extending scalars to F_{q²}.
    Q2,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub q: u64,
    pub gamma: usize,
    pub mode: Mode,
    /// Truncation of Δ_Z; γ when absent.
    pub z: Option<usize>,
    pub statistics: Vec<Statistic>,
    pub strata: StrataModel,
    pub beta1: Beta1Variant,
    pub ntilde_field: NtildeField,
    /// Number of empirical moments reported.
    pub moments: usize,
    /// Degree bound D for the theoretical moments.
    pub degree_bound: usize,
}

impl FamilySpec {
    pub fn new(q: u64, gamma: usize, mode: Mode) -> Self {
        FamilySpec {
            q,
            gamma,
            mode,
            z: None,
            statistics: vec![Statistic::DeltaZ],
            strata: StrataModel::default(),
            beta1: Beta1Variant::default(),
            ntilde_field: NtildeField::default(),
            moments: 4,
            degree_bound: 12,
        }
    }

    pub fn truncation(&self) -> usize {
        self.z.unwrap_or(self.gamma)
    }

    pub fn validate(&self) -> Result<()> {
        if self.gamma < 5 {
            return Err(Error::DegreeTooSmall(self.gamma));
        }
        if self.truncation() == 0 {
            return Err(Error::Invalid("Z must be >= 1".into()));
        }
        if self.moments == 0 || self.moments > crate::theory::R_MAX {
            return Err(Error::Invalid(format!("moment count must lie in 1..={}", crate::theory::R_MAX)));
        }
        for s in &self.statistics {
            if let Statistic::Mnd { n, d } = *s {
                if num_integer::gcd(n as i64, d) != 1 {
                    return Err(Error::NotCoprime { n, d });
                }
                if !(2..=crate::hn::N_MAX).contains(&n) {
                    return Err(Error::RankOutOfRange(n));
                }
            }
        }
        Ok(())
    }

    pub fn family_size(&self) -> u128 {
        let q = self.q as u128;
        q.pow(self.gamma as u32) - q.pow(self.gamma as u32 - 1)
    }
}

/// The index-th sampled curve: uniform coefficients, redrawn until squarefree.
pub fn sample_curve(field: &Field, gamma: usize, seed: u64, index: u64) -> Result<MonicPoly> {
    let q = field.order();
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = rng::keyed(Domain::Curve, seed, index, attempt);
        let labels: Vec<u64> = (0..gamma).map(|_| rng.gen_range(0..q)).collect();
        let f = MonicPoly::from_labels(field, &labels)?;
        if f.is_squarefree() {
            return Ok(f);
        }
    }
    Err(Error::Cap(format!("no squarefree draw in {MAX_ATTEMPTS} attempts for index {index}")))
}

/// Every squarefree monic of degree γ, in label order.
pub fn enumerate_family(field: &Field, gamma: usize) -> Result<impl Iterator<Item = MonicPoly> + '_> {
    let total = (field.order() as u128).checked_pow(gamma as u32);
    if total.is_none_or(|t| t > MAX_EXHAUSTIVE) {
        return Err(Error::Cap(format!("exhaustive family of {}^{gamma} monics exceeds {MAX_EXHAUSTIVE}", field.order())));
    }
    Ok(crate::poly::monics_of_degree(field, gamma)?.filter(|f| f.is_squarefree()))
}

/// Monic irreducibles of degree ≤ Z, grouped by degree, for the character-sum path.
pub struct PrimeTable {
    by_degree: Vec<Vec<MonicPoly>>,
}

impl PrimeTable {
    pub fn new(field: &Field, z: usize) -> Result<Self> {
        let q = field.order() as u128;
        let monics: u128 = (1..=z as u32).map(|m| q.saturating_pow(m)).fold(0u128, |a, b| a.saturating_add(b));
        if monics > MAX_CHARACTER_SUM_MONICS {
            return Err(Error::Cap(format!("character sums up to degree {z} need {monics} monics")));
        }
        let mut by_degree = vec![Vec::new()];
        for d in 1..=z {
            by_degree.push(irreducibles_of_degree(field, d)?.collect());
        }
        Ok(PrimeTable { by_degree })
    }

    pub fn max_degree(&self) -> usize {
        self.by_degree.len() - 1
    }
}

/// Σ_{deg f = m} Λ(f)(F/f) for m = 1..=Z, from Legendre symbols of F at each prime.
pub fn character_sums(f: &MonicPoly, table: &PrimeTable, z: usize) -> Result<Vec<BigInt>> {
    if z > table.max_degree() {
        return Err(Error::Invalid("prime table is shorter than Z".into()));
    }
    // chi[d][i] = (F / P_i) for the i-th prime of degree d.
    let chi: Vec<Vec<i8>> = table.by_degree[..=z]
        .iter()
        .map(|ps| ps.iter().map(|p| legendre_poly_unchecked(f.as_poly(), p)).collect::<Result<_>>())
        .collect::<Result<_>>()?;
    let mut out = Vec::with_capacity(z);
    for m in 1..=z {
        let mut s = 0i64;
        for d in (1..=m).filter(|d| m % d == 0) {
            let k = (m / d) as u32;
            let part: i64 = chi[d].iter().map(|&c| (c as i64).pow(k)).sum();
            s += d as i64 * part;
        }
        out.push(BigInt::from(s));
    }
    Ok(out)
}

/// The same sums from the zeta function: N_m - q^m - 1 - δ = -s_m - δ.
pub fn spectral_sums(lpoly: &LPolynomial, delta: u32, z: usize) -> Vec<BigInt> {
    lpoly.power_sums(z).into_iter().map(|s| -s - BigInt::from(delta)).collect()
}

/// Δ_Z = Σ_{m≤Z} q^{-2m} m^{-1} S_m.
pub fn delta_from_sums(q: u64, sums: &[BigInt]) -> BigRational {
    let qb = BigInt::from(q);
    sums.iter().enumerate().fold(BigRational::zero(), |acc, (i, s)| {
        let m = i + 1;
        acc + BigRational::new(s.clone(), qb.pow(2 * m as u32) * BigInt::from(m))
    })
}

/// Δ_Z by both paths; the character-sum path runs when a prime table is supplied.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeltaZ {
    pub z: usize,
    pub value: BigRational,
    pub paths_checked: bool,
}

pub fn delta_z(curve: &HyperellipticCurve, lpoly: &LPolynomial, z: usize, table: Option<&PrimeTable>) -> Result<DeltaZ> {
    if z == 0 {
        return Err(Error::Invalid("Z must be >= 1".into()));
    }
    let spectral = delta_from_sums(curve.q(), &spectral_sums(lpoly, curve.delta(), z));
    if let Some(t) = table {
        let direct = delta_from_sums(curve.q(), &character_sums(curve.poly(), t, z)?);
        if direct != spectral {
            return Err(invariant(format!("Δ_Z paths disagree: {direct} vs {spectral}")));
        }
    }
    Ok(DeltaZ { z, value: spectral, paths_checked: table.is_some() })
}

fn ln_q(q: u64) -> HpReal {
    HpReal::ln_int(&BigInt::from(q))
}

/// ln(1 - q^{-k}).
fn ln_one_minus(q: u64, k: u32) -> HpReal {
    let qk = BigInt::from(q).pow(k);
    HpReal::ln_rational(&BigRational::new(&qk - 1, qk))
}

/// ln(q^{n²-1} / ∏_{k=2}^n (q^{k-1}-1)(q^k-1)).
pub fn siegel_constant(q: u64, n: usize) -> HpReal {
    let qb = BigInt::from(q);
    let num = qb.pow((n * n - 1) as u32);
    let den = (2..=n as u32).fold(BigInt::one(), |acc, k| acc * (qb.pow(k - 1) - 1) * (qb.pow(k) - 1));
    HpReal::ln_rational(&BigRational::new(num, den))
}

/// log N - (n²-1)(g-1) log q.
pub fn mnd_raw(count: &BigInt, q: u64, n: usize, g: usize) -> HpReal {
    &HpReal::ln_int(count) - &ln_q(q).mul_int(((n * n - 1) * (g - 1)) as i64)
}

/// The raw statistic minus the Siegel constant, plus δ Σ_{k=2}^n log(1 - q^{-k}).
pub fn mnd_centered(raw: &HpReal, q: u64, n: usize, delta: u32) -> HpReal {
    let mut c = raw - &siegel_constant(q, n);
    if delta == 1 {
        for k in 2..=n as u32 {
            c += &ln_one_minus(q, k);
        }
    }
    c
}

/// log N(M^s) - 3(g-1) log q.
pub fn ms20_raw(count: &BigInt, q: u64, g: usize) -> HpReal {
    &HpReal::ln_int(count) - &ln_q(q).mul_int(3 * (g as i64 - 1))
}

/// The raw ms20 statistic minus log(q³/((q-1)²(q+1))), plus δ log(1 - q^{-2}).
pub fn ms20_centered(raw: &HpReal, q: u64, delta: u32) -> HpReal {
    let qb = BigInt::from(q);
    let c = BigRational::new(qb.pow(3), (&qb - 1u32).pow(2) * (&qb + 1u32));
    let mut v = raw - &HpReal::ln_rational(&c);
    if delta == 1 {
        v += &ln_one_minus(q, 2);
    }
    v
}

/// log N(Ñ) - (4g-4) log q.
pub fn ntilde_raw(count: &BigInt, q: u64, g: usize) -> HpReal {
    &HpReal::ln_int(count) - &ln_q(q).mul_int(4 * g as i64 - 4)
}

/// The raw Ñ statistic plus δ log(1 - q^{-2}).
pub fn ntilde_centered(raw: &HpReal, q: u64, delta: u32) -> HpReal {
    if delta == 1 {
        raw + &ln_one_minus(q, 2)
    } else {
        raw.clone()
    }
}

/// (log N(Ñ) - (4g-4) log q) - (log N_{q²}(J) - 2g log q).
pub fn ntilde_gap(raw: &HpReal, nj2: &BigInt, q: u64, g: usize) -> HpReal {
    raw - &(&HpReal::ln_int(nj2) - &ln_q(q).mul_int(2 * g as i64))
}

/// Everything computed for one curve.
#[derive(Clone, Debug, Default)]
pub struct CurveStats {
    pub lpoly: Option<LPolynomial>,
    pub nj: Option<BigInt>,
    pub nj2: Option<BigInt>,
    /// Exact counts keyed by name, e.g. "ml(2,1)".
    pub counts: BTreeMap<String, BigInt>,
    /// Real statistics keyed by name, e.g. "mnd(2,1).raw".
    pub values: BTreeMap<String, HpReal>,
    pub delta: Option<DeltaZ>,
}

/// Run the requested pipeline on one curve.
pub fn analyze_curve(spec: &FamilySpec, f: &MonicPoly, table: Option<&PrimeTable>) -> Result<CurveStats> {
    let curve = HyperellipticCurve::new(f.clone())?;
    let lpoly = curve.l_polynomial()?;
    analyze_with_lpoly(spec, &curve, lpoly, table)
}

/// As [`analyze_curve`] with the L-polynomial already known.
pub fn analyze_with_lpoly(
    spec: &FamilySpec,
    curve: &HyperellipticCurve,
    lpoly: LPolynomial,
    table: Option<&PrimeTable>,
) -> Result<CurveStats> {
    let q = curve.q();
    let g = curve.genus();
    let delta = curve.delta();
    let ctx = CurveContext::new(lpoly.clone())?;
    let mut out = CurveStats { nj: Some(ctx.nj().clone()), ..Default::default() };
    let mut rank2: Option<Rank2Data> = None;
    for stat in &spec.statistics {
        match *stat {
            Statistic::Mnd { n, d } => {
                let c = count_ml(&ctx, n, d)?.value;
                let raw = mnd_raw(&c, q, n, g);
                let centered = mnd_centered(&raw, q, n, delta);
                out.values.insert(format!("mnd({n},{d}).raw"), raw);
                out.values.insert(format!("mnd({n},{d}).centered"), centered);
                out.counts.insert(format!("ml({n},{d})"), c);
            }
            Statistic::Ms20 => {
                let data = match &rank2 {
                    Some(r) => r.clone(),
                    None => Rank2Data::new(&ctx, curve)?,
                };
                let c = count_ms20(&ctx, &data, spec.strata, spec.beta1)?.value;
                let raw = ms20_raw(&c, q, g);
                out.values.insert("ms20".into(), ms20_centered(&raw, q, delta));
                out.values.insert("ms20.raw".into(), raw);
                out.counts.insert("ms20".into(), c);
                rank2 = Some(data);
            }
            Statistic::Ntilde => {
                let (c, qq, nj2) = match spec.ntilde_field {
                    NtildeField::Q => {
                        let data = match &rank2 {
                            Some(r) => r.clone(),
                            None => Rank2Data::new(&ctx, curve)?,
                        };
                        let c = count_desingularization(&ctx, &data, spec.strata, spec.beta1)?.value;
                        let nj2 = data.nj2.clone();
                        rank2 = Some(data);
                        (c, q, nj2)
                    }
                    NtildeField::Q2 => {
                        let ctx2 = CurveContext::new(lpoly.base_change(2)?)?;
                        let degs = base_change_degrees(&curve.poly().factor_degrees()?, 2);
                        let data = Rank2Data::with_two_torsion(&ctx2, two_torsion_from_degrees(curve.gamma(), &degs))?;
                        let c = count_desingularization(&ctx2, &data, spec.strata, spec.beta1)?.value;
                        (c, q * q, data.nj2.clone())
                    }
                };
                let raw = ntilde_raw(&c, qq, g);
                out.values.insert("ntilde.gap".into(), ntilde_gap(&raw, &nj2, qq, g));
                out.values.insert("ntilde".into(), ntilde_centered(&raw, qq, delta));
                out.values.insert("ntilde.raw".into(), raw);
                out.counts.insert("ntilde".into(), c);
            }
            Statistic::DeltaZ => {
                let dz = delta_z(curve, &lpoly, spec.truncation(), table)?;
                out.values.insert("delta_z".into(), HpReal::from_rational(&dz.value));
                out.delta = Some(dz);
            }
        }
    }
    out.nj2 = Some(match rank2 {
        Some(r) => r.nj2,
        None => lpoly.jacobian_order(2)?,
    });
    out.lpoly = Some(lpoly);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::field_of_order;

    #[test]
    fn siegel_constant_n2() {
        // q³/((q-1)(q²-1)) at q = 3: 27/16.
        let c = siegel_constant(3, 2);
        assert!((c.to_f64() - (27.0f64 / 16.0).ln()).abs() < 1e-15);
    }

    #[test]
    fn sampling_is_reproducible() {
        let f = field_of_order(5).unwrap();
        let a = sample_curve(&f, 7, 11, 3).unwrap();
        let b = sample_curve(&f, 7, 11, 3).unwrap();
        assert_eq!(a.labels(), b.labels());
        assert!(a.is_squarefree());
    }

    #[test]
    fn delta_sum_of_one_term() {
        let d = delta_from_sums(3, &[BigInt::from(2)]);
        assert_eq!(d, BigRational::new(BigInt::from(2), BigInt::from(9)));
    }
}
