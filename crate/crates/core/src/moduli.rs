//! Point counts of moduli spaces of rank-2 and coprime-rank bundles.
//!
//! Two models for the strictly semistable locus of M_O(2,0) are provided.
//! [`StrataModel::Rational`] counts ξ ⊕ ξ^{-1} classes by their actual
//! F_q-rationality: the 2-torsion stratum has t = #J[2](F_q) points and the
//! non-split stratum is indexed by the norm-one classes, P(-1) in number.
//! [`StrataModel::Geometric`] takes all 2^{2g} two-torsion points as
//! rational and the non-split stratum as (N_{q²}(J) - N_q(J))/2; it is
//! kept for comparison and does not in general produce integers.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::curve::HyperellipticCurve;
use crate::error::{invariant, Error, Result};
use crate::hn::{unstable_types, CurveContext, N_MAX};

fn rat(n: impl Into<BigInt>) -> BigRational {
    BigRational::from_integer(n.into())
}

/// Which moduli space a count refers to.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CountKind {
    Coprime { n: usize, d: i64 },
    Stable20,
    Desingularization,
}

/// A point count together with the exact rational it was cleared from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModuliCount {
    pub kind: CountKind,
    pub value: BigInt,
    pub provenance: BigRational,
}

impl ModuliCount {
    fn from_rational(kind: CountKind, v: BigRational, allow_zero: bool) -> Result<Self> {
        if !v.is_integer() {
            return Err(invariant(format!("{kind:?} count {v} is not an integer")));
        }
        let value = v.to_integer();
        if value.is_negative() || (!allow_zero && value.is_zero()) {
            return Err(invariant(format!("{kind:?} count {value} is not positive")));
        }
        Ok(ModuliCount { kind, value, provenance: v })
    }
}

/// N_q(M_L(n, d)) for gcd(n, d) = 1.
pub fn count_ml(ctx: &CurveContext, n: usize, d: i64) -> Result<ModuliCount> {
    if !(2..=N_MAX).contains(&n) {
        return Err(Error::RankOutOfRange(n));
    }
    if (n as i64).gcd(&d) != 1 {
        return Err(Error::NotCoprime { n, d });
    }
    let q1 = rat(ctx.q() - 1);
    let mut v = ctx.siegel_mass(n) * &q1;
    for comp in unstable_types(n) {
        v -= ctx.c_l(&comp, d)? * &q1;
    }
    ModuliCount::from_rational(CountKind::Coprime { n, d }, v, false)
}

/// Model for the F_q-points of the strictly semistable locus.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StrataModel {
    #[default]
    Rational,
    Geometric,
}

/// Which form of β₁ to use.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Beta1Variant {
    /// A/(q-1)² + 2A·N(P^{g-2})/(q-1) + B/(q²-1).
    #[default]
    Full,
    /// The same with coefficient 1 on the middle term.
    SingleExtension,
}

/// Sizes of the strata K0, A, B of the strictly semistable locus.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KummerStrata {
    pub model: StrataModel,
    pub size_k0: BigRational,
    pub size_a: BigRational,
    pub size_b: BigRational,
}

impl KummerStrata {
    pub fn is_integral(&self) -> bool {
        self.size_k0.is_integer() && self.size_a.is_integer() && self.size_b.is_integer()
    }
}

/// #J[2](F_q) from the factorization pattern of F.
///
/// The 2-torsion is the group of even subsets of the Weierstrass points
/// modulo complement; Frobenius permutes the roots of F in cycles given by
/// the degrees of its irreducible factors.
pub fn rational_two_torsion(curve: &HyperellipticCurve) -> Result<BigInt> {
    Ok(two_torsion_from_degrees(curve.gamma(), &curve.poly().factor_degrees()?))
}

/// #J[2] over the base field given the degrees of the irreducible factors of F.
pub fn two_torsion_from_degrees(gamma: usize, degs: &[usize]) -> BigInt {
    let k = degs.len() as u32;
    let genus = (gamma - 1) / 2;
    let two = BigInt::from(2);
    if gamma % 2 == 1 {
        two.pow(k - 1)
    } else if degs.iter().any(|d| d % 2 == 1) {
        two.pow(k - 2)
    } else {
        let base = two.pow(k - 1);
        if genus % 2 == 1 {
            &base * 2
        } else {
            base
        }
    }
}

/// Factor degrees of F after extending scalars to the degree-r extension.
pub fn base_change_degrees(degs: &[usize], r: usize) -> Vec<usize> {
    let mut out: Vec<usize> = degs
        .iter()
        .flat_map(|&d| {
            let c = d.gcd(&r);
            std::iter::repeat(d / c).take(c)
        })
        .collect();
    out.sort_unstable();
    out
}

/// Per-curve inputs to the rank-2 degree-0 counts.
#[derive(Clone, Debug)]
pub struct Rank2Data {
    /// #J[2](F_q).
    pub two_torsion: BigInt,
    /// N_{q²}(J).
    pub nj2: BigInt,
    /// P(-1) = N_{q²}(J)/N_q(J).
    pub p_minus_one: BigInt,
}

impl Rank2Data {
    pub fn new(ctx: &CurveContext, curve: &HyperellipticCurve) -> Result<Self> {
        Self::with_two_torsion(ctx, rational_two_torsion(curve)?)
    }

    /// As [`Rank2Data::new`] with #J[2] supplied, for curves known only by data.
    pub fn with_two_torsion(ctx: &CurveContext, two_torsion: BigInt) -> Result<Self> {
        let nj2 = ctx.lpoly().jacobian_order(2)?;
        let p_minus_one = ctx.lpoly().at_minus_one();
        if &p_minus_one * ctx.nj() != nj2 {
            return Err(invariant("N_{q^2}(J) != N_q(J) P(-1)"));
        }
        Ok(Rank2Data { two_torsion, nj2, p_minus_one })
    }
}

pub fn kummer_strata(ctx: &CurveContext, data: &Rank2Data, model: StrataModel) -> Result<KummerStrata> {
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let nj = rat(ctx.nj().clone());
    let s = match model {
        StrataModel::Rational => {
            let t = rat(data.two_torsion.clone());
            KummerStrata {
                model,
                size_a: (&nj - &t) * &half,
                size_b: (rat(data.p_minus_one.clone()) - &t) * &half,
                size_k0: t,
            }
        }
        StrataModel::Geometric => {
            let t = rat(BigInt::from(2).pow(2 * ctx.genus() as u32));
            KummerStrata {
                model,
                size_a: (&nj - &t) * &half,
                size_b: (rat(data.nj2.clone()) - &nj) * &half,
                size_k0: t,
            }
        }
    };
    if model == StrataModel::Rational && !s.is_integral() {
        return Err(invariant("rational Kummer strata are not integral"));
    }
    Ok(s)
}

/// N_q(P^k) = (q^{k+1}-1)/(q-1); zero for k < 0.
pub fn projective_count(q: u64, k: i64) -> BigInt {
    if k < 0 {
        return BigInt::zero();
    }
    (BigInt::from(q).pow(k as u32 + 1) - 1) / BigInt::from(q - 1)
}

/// Number of k-dimensional subspaces of F_q^n (Gaussian binomial); zero when k > n.
pub fn grassmannian_count(q: u64, k: usize, n: usize) -> Result<BigInt> {
    if k > n {
        return Ok(BigInt::zero());
    }
    let qb = BigInt::from(q);
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for i in 0..k {
        num *= qb.pow((n - i) as u32) - 1;
        den *= qb.pow((i + 1) as u32) - 1;
    }
    let (quot, rem) = num.div_rem(&den);
    if !rem.is_zero() {
        return Err(invariant("Gaussian binomial is not an integer"));
    }
    Ok(quot)
}

/// β' = N_q(J) q^{g-1} / ((q-1)³(q+1)).
pub fn beta_prime_20(ctx: &CurveContext) -> BigRational {
    let q = ctx.q();
    rat(ctx.nj().clone()) * ctx.q_pow(ctx.genus() as i64 - 1) / rat(BigInt::from(q - 1).pow(3) * (q + 1))
}

pub fn beta1(ctx: &CurveContext, strata: &KummerStrata, variant: Beta1Variant) -> BigRational {
    let q = ctx.q();
    let p = rat(projective_count(q, ctx.genus() as i64 - 2));
    let mid = match variant {
        Beta1Variant::Full => rat(2),
        Beta1Variant::SingleExtension => BigRational::one(),
    };
    &strata.size_a / rat(BigInt::from(q - 1).pow(2)) + mid * &strata.size_a * p / rat(q - 1)
        + &strata.size_b / rat(q * q - 1)
}

pub fn beta2(ctx: &CurveContext, strata: &KummerStrata) -> BigRational {
    let q = ctx.q();
    let gl2 = BigInt::from(q * q - 1) * BigInt::from(q * q - q);
    let p = rat(projective_count(q, ctx.genus() as i64 - 1));
    &strata.size_k0 / rat(gl2) + &strata.size_k0 * p / rat(BigInt::from(q) * (q - 1))
}

/// Both routes to N_q(M^s_O(2,0)) before any integrality check.
#[derive(Clone, Debug)]
pub struct Stable20Routes {
    /// q^{3g-3}ζ(2) - (q-1)(β' + β₁ + β₂).
    pub assembly: BigRational,
    /// The closed form belonging to the chosen strata model.
    pub closed_form: BigRational,
}

impl Stable20Routes {
    pub fn agree(&self) -> bool {
        self.assembly == self.closed_form
    }
}

pub fn stable20_routes(
    ctx: &CurveContext,
    data: &Rank2Data,
    model: StrataModel,
    variant: Beta1Variant,
) -> Result<Stable20Routes> {
    let strata = kummer_strata(ctx, data, model)?;
    let q = ctx.q();
    let g = ctx.genus() as i64;
    let lead = ctx.q_pow(3 * g - 3) * ctx.zeta(2);
    let sum = beta_prime_20(ctx) + beta1(ctx, &strata, variant) + beta2(ctx, &strata);
    let assembly = &lead - sum * rat(q - 1);
    let nj = rat(ctx.nj().clone());
    let qq = rat(q);
    let one = BigRational::one();
    let den = (&qq - &one).pow(2) * (&qq + &one);
    let closed_form = match model {
        // The 2-torsion count cancels between β₁ and β₂.
        StrataModel::Rational => {
            &lead - (rat(2) * ctx.q_pow(g + 1) - qq.pow(2) + &one) / (rat(2) * &den) * &nj
                - rat(data.p_minus_one.clone()) / (rat(2) * (&qq + &one))
        }
        // As published.
        StrataModel::Geometric => {
            let t = rat(BigInt::from(2).pow(2 * g as u32));
            &lead - (ctx.q_pow(g + 1) - qq.pow(2) + &qq) / &den * &nj - rat(data.nj2.clone()) / (rat(2) * (&qq + &one))
                + t / (rat(2) * (&qq + &one))
        }
    };
    Ok(Stable20Routes { assembly, closed_form })
}

/// N_q(M^s_O(2,0)); both routes must agree and give a nonnegative integer.
pub fn count_ms20(ctx: &CurveContext, data: &Rank2Data, model: StrataModel, variant: Beta1Variant) -> Result<ModuliCount> {
    let routes = stable20_routes(ctx, data, model, variant)?;
    if !routes.agree() {
        return Err(invariant(format!(
            "stable (2,0) routes disagree: assembly {} vs closed form {}",
            routes.assembly, routes.closed_form
        )));
    }
    ModuliCount::from_rational(CountKind::Stable20, routes.assembly, true)
}

/// The pieces of N_q(Ñ) beyond N_q(M^s).
#[derive(Clone, Debug)]
pub struct DesingularizationParts {
    pub stable: BigRational,
    /// A·N(P^{g-2})² + B·N_{q²}(P^{g-2}).
    pub y: BigRational,
    /// K0·q^{g-2}·N(G(2,g)).
    pub r: BigRational,
    /// K0·N(G(3,g)).
    pub s: BigRational,
}

impl DesingularizationParts {
    pub fn total(&self) -> BigRational {
        &self.stable + &self.y + &self.r + &self.s
    }
}

pub fn desingularization_parts(
    ctx: &CurveContext,
    data: &Rank2Data,
    model: StrataModel,
    variant: Beta1Variant,
) -> Result<DesingularizationParts> {
    let strata = kummer_strata(ctx, data, model)?;
    let q = ctx.q();
    let g = ctx.genus();
    let stable = stable20_routes(ctx, data, model, variant)?.assembly;
    let pg2 = rat(projective_count(q, g as i64 - 2));
    let pg2_sq = rat(projective_count(q * q, g as i64 - 2));
    let y = &strata.size_a * &pg2 * &pg2 + &strata.size_b * pg2_sq;
    let r = &strata.size_k0 * ctx.q_pow(g as i64 - 2) * rat(grassmannian_count(q, 2, g)?);
    let s = &strata.size_k0 * rat(grassmannian_count(q, 3, g)?);
    Ok(DesingularizationParts { stable, y, r, s })
}

/// N_q(Ñ) = N_q(M^s) + N_q(Y) + K0·(N_q(R) + N_q(S)).
pub fn count_desingularization(
    ctx: &CurveContext,
    data: &Rank2Data,
    model: StrataModel,
    variant: Beta1Variant,
) -> Result<ModuliCount> {
    let stable = count_ms20(ctx, data, model, variant)?;
    let parts = desingularization_parts(ctx, data, model, variant)?;
    let c = ModuliCount::from_rational(CountKind::Desingularization, parts.total(), false)?;
    if c.value < stable.value {
        return Err(invariant("N(Ñ) < N(M^s)"));
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_binomials() {
        assert_eq!(grassmannian_count(2, 2, 4).unwrap(), BigInt::from(35));
        assert_eq!(grassmannian_count(3, 0, 5).unwrap(), BigInt::one());
        assert_eq!(grassmannian_count(3, 1, 3).unwrap(), projective_count(3, 2));
        assert_eq!(grassmannian_count(3, 4, 3).unwrap(), BigInt::zero());
    }

    #[test]
    fn projective_small() {
        assert_eq!(projective_count(7, 0), BigInt::one());
        assert_eq!(projective_count(7, 2), BigInt::from(57));
        assert_eq!(projective_count(7, -1), BigInt::zero());
    }
}
