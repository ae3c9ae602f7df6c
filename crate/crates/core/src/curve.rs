//! Hyperelliptic curves y^2 = F(x), their point counts and zeta data.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{invariant, Error, Result};
use crate::field::{self, Embedding, Field, FieldSpec};
use crate::poly::MonicPoly;

/// The smooth projective model of y^2 = F(x) for monic squarefree F of degree γ >= 5.
#[derive(Clone, Debug)]
pub struct HyperellipticCurve {
    f: MonicPoly,
    gamma: usize,
    genus: usize,
}

impl HyperellipticCurve {
    pub fn new(f: MonicPoly) -> Result<Self> {
        let gamma = f.degree();
        if gamma < 5 {
            return Err(Error::DegreeTooSmall(gamma));
        }
        let w = f.squarefree_witness();
        if !w.is_one() {
            return Err(Error::NotSquarefree { gcd: format!("{w:?}") });
        }
        Ok(HyperellipticCurve { f, gamma, genus: (gamma - 1) / 2 })
    }

    /// From canonical labels of c_0..c_{γ-1}, leading 1 implicit.
    pub fn from_labels(field: &Field, lower: &[u64]) -> Result<Self> {
        Self::new(MonicPoly::from_labels(field, lower)?)
    }

    pub fn field(&self) -> &Field {
        self.f.field()
    }
    pub fn poly(&self) -> &MonicPoly {
        &self.f
    }
    pub fn gamma(&self) -> usize {
        self.gamma
    }
    pub fn genus(&self) -> usize {
        self.genus
    }
    /// 1 when γ is even (two points at infinity), else 0.
    pub fn delta(&self) -> u32 {
        (self.gamma % 2 == 0) as u32
    }
    pub fn q(&self) -> u64 {
        self.field().order()
    }
    fn points_at_infinity(&self) -> i128 {
        1 + self.delta() as i128
    }

    /// N_m = #X(F_{q^m}), using the cached tower extension of degree m.
    pub fn count_points(&self, m: usize) -> Result<i128> {
        let (ext, emb) = field::extension(self.field(), m)?;
        self.count_points_in(&ext, &emb)
    }

    /// N over an explicitly supplied extension and embedding.
    pub fn count_points_in(&self, ext: &Field, emb: &Embedding) -> Result<i128> {
        if emb.base() != self.field() || emb.ext() != ext {
            return Err(Error::Invalid("embedding does not match the curve's field".into()));
        }
        let coeffs: Vec<_> = self.f.coeffs().iter().map(|&c| emb.apply(c)).collect();
        let chi_sum = if ext.order() <= field::LOG_TABLE_MAX {
            character_sum_tabled(ext, &coeffs)?
        } else {
            character_sum_direct(ext, &coeffs)
        };
        Ok(ext.order() as i128 + chi_sum + self.points_at_infinity())
    }

    /// Point counts for m = 1..g, then Newton's identities and the functional equation.
    pub fn l_polynomial(&self) -> Result<LPolynomial> {
        let g = self.genus;
        let q = BigInt::from(self.q());
        let mut s = vec![BigInt::zero()];
        for m in 1..=g {
            let n = BigInt::from(self.count_points(m)?);
            s.push(q.pow(m as u32) + 1 - n);
        }
        LPolynomial::from_power_sums(self.q(), g, &s[1..])
    }
}

/// Σ_x χ(F(x)) over the extension, via discrete-log tables. Allocation-free in the loop.
fn character_sum_tabled(ext: &FieldSpec, coeffs: &[field::FieldElement]) -> Result<i128> {
    let table = field::log_table(ext)?;
    let logs: Vec<u32> = coeffs.iter().map(|c| table.log(c.label())).collect();
    let mut sum: i64 = table.character(logs[0]) as i64;
    for x in 1..ext.order() {
        let lx = table.log(x);
        let mut v = 0u32; // log of the leading coefficient 1
        for &lc in logs.iter().rev() {
            v = table.add(table.mul(v, lx), lc);
        }
        sum += table.character(v) as i64;
    }
    Ok(sum as i128)
}

fn character_sum_direct(ext: &FieldSpec, coeffs: &[field::FieldElement]) -> i128 {
    let mut sum: i128 = 0;
    for x in ext.elements() {
        let mut v = ext.one();
        for &c in coeffs.iter().rev() {
            v = ext.add(ext.mul(v, x), c);
        }
        sum += ext.quadratic_character(v) as i128;
    }
    sum
}

/// Numerator P(t) = Σ a_i t^i = ∏(1 - α_i t) of the zeta function, degree 2g.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LPolynomial {
    q: u64,
    g: usize,
    a: Vec<BigInt>,
}

/// e_1..e_n from power sums p_1..p_n by Newton's identities, with exact division.
pub fn elementary_from_power_sums(p: &[BigInt]) -> Result<Vec<BigInt>> {
    let mut e = vec![BigInt::one()];
    for k in 1..=p.len() {
        let mut acc = BigInt::zero();
        for i in 1..=k {
            let term = &e[k - i] * &p[i - 1];
            if i % 2 == 1 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        let (quot, rem) = acc.div_rem(&BigInt::from(k));
        if !rem.is_zero() {
            return Err(invariant(format!("Newton identity division by {k} is inexact")));
        }
        e.push(quot);
    }
    Ok(e)
}

impl LPolynomial {
    /// Build from s_1..s_g (s_m = q^m + 1 - N_m).
    pub fn from_power_sums(q: u64, g: usize, s: &[BigInt]) -> Result<Self> {
        if s.len() < g {
            return Err(Error::Invalid(format!("need {g} power sums, got {}", s.len())));
        }
        let e = elementary_from_power_sums(&s[..g])?;
        let qb = BigInt::from(q);
        let mut a: Vec<BigInt> = (0..=g).map(|i| if i % 2 == 0 { e[i].clone() } else { -&e[i] }).collect();
        for i in g + 1..=2 * g {
            let v = qb.pow((i - g) as u32) * &a[2 * g - i];
            a.push(v);
        }
        let l = LPolynomial { q, g, a };
        l.check()?;
        Ok(l)
    }

    /// Wrap explicit coefficients a_0..a_{2g}; invariants are checked.
    pub fn from_coeffs(q: u64, a: Vec<BigInt>) -> Result<Self> {
        if a.len() % 2 == 0 {
            return Err(Error::Invalid("L-polynomial must have odd length 2g+1".into()));
        }
        let l = LPolynomial { q, g: (a.len() - 1) / 2, a };
        l.check()?;
        Ok(l)
    }

    /// a_0 = 1, functional equation, and |a_1| <= 2g√q.
    pub fn check(&self) -> Result<()> {
        let g = self.g;
        if !self.a[0].is_one() {
            return Err(invariant("a_0 != 1"));
        }
        let qb = BigInt::from(self.q);
        for i in 0..=g {
            if self.a[2 * g - i] != qb.pow((g - i) as u32) * &self.a[i] {
                return Err(invariant(format!("functional equation fails at i = {i}")));
            }
        }
        if g > 0 {
            let a1 = self.a[1].abs();
            if &a1 * &a1 > BigInt::from(4 * g as u64 * g as u64) * &qb {
                return Err(invariant("|a_1| exceeds 2g√q"));
            }
        }
        Ok(())
    }

    pub fn q(&self) -> u64 {
        self.q
    }
    pub fn genus(&self) -> usize {
        self.g
    }
    /// The L-polynomial of the same curve over the degree-r extension: roots α_i^r.
    pub fn base_change(&self, r: usize) -> Result<LPolynomial> {
        if r == 0 {
            return Err(Error::BadDegree(0));
        }
        let q = self.q.checked_pow(r as u32).ok_or(Error::FieldTooLarge { p: self.q, e: r })?;
        let all = self.power_sums(r * self.g);
        let s: Vec<BigInt> = all.into_iter().skip(r - 1).step_by(r).collect();
        LPolynomial::from_power_sums(q, self.g, &s)
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.a
    }

    /// s_1..s_M from the log-derivative recursion s_m = -m a_m - Σ_{i<m} a_i s_{m-i}.
    pub fn power_sums(&self, upto: usize) -> Vec<BigInt> {
        let mut s: Vec<BigInt> = vec![BigInt::zero()];
        for m in 1..=upto {
            let mut v = if m < self.a.len() { -(&self.a[m] * BigInt::from(m)) } else { BigInt::zero() };
            for i in 1..m.min(self.a.len()) {
                v -= &self.a[i] * &s[m - i];
            }
            s.push(v);
        }
        s.remove(0);
        s
    }

    pub fn power_sum(&self, m: usize) -> Result<BigInt> {
        if m == 0 {
            return Err(Error::Invalid("power sums start at m = 1".into()));
        }
        Ok(self.power_sums(m).pop().expect("m >= 1"))
    }

    /// N_{q^m}(X) = q^m + 1 - s_m.
    pub fn point_count(&self, m: usize) -> Result<BigInt> {
        Ok(BigInt::from(self.q).pow(m as u32) + 1 - self.power_sum(m)?)
    }

    /// N_{q^r}(J) = ∏(1 - α_i^r), exactly.
    pub fn jacobian_order(&self, r: usize) -> Result<BigInt> {
        if r == 0 {
            return Err(Error::Invalid("jacobian order needs r >= 1".into()));
        }
        let n = 2 * self.g;
        let s = self.power_sums(r * n);
        let sr: Vec<BigInt> = (1..=n).map(|k| s[r * k - 1].clone()).collect();
        let e = elementary_from_power_sums(&sr)?;
        let v = e.iter().enumerate().fold(BigInt::zero(), |acc, (k, ek)| if k % 2 == 0 { acc + ek } else { acc - ek });
        if !v.is_positive() {
            return Err(invariant(format!("non-positive jacobian order {v}")));
        }
        Ok(v)
    }

    /// P(t) at an exact rational point.
    pub fn eval(&self, t: &BigRational) -> BigRational {
        self.a.iter().rev().fold(BigRational::zero(), |acc, c| acc * t + BigRational::from_integer(c.clone()))
    }

    /// P(-1) = N_{q^2}(J) / N_q(J).
    pub fn at_minus_one(&self) -> BigInt {
        self.a.iter().enumerate().fold(BigInt::zero(), |acc, (i, c)| if i % 2 == 0 { acc + c } else { acc - c })
    }

    /// ζ_X(k) = P(q^-k) / ((1 - q^-k)(1 - q^{1-k})).
    pub fn zeta_value(&self, k: u32) -> Result<BigRational> {
        if k < 2 {
            return Err(Error::Invalid(format!("ζ_X has a pole at s = {k}")));
        }
        let q = BigInt::from(self.q);
        let t = BigRational::new(BigInt::one(), q.pow(k));
        let one = BigRational::one();
        let den = (&one - &t) * (&one - &t * BigRational::from_integer(q));
        Ok(self.eval(&t) / den)
    }
}

/// Bound on |ε_{2,Z}|, the tail m > Z of the log ζ_X(k) expansion.
///
/// For Z >= 2 this is (2g/(Z+1)) q^{-(2k-1)(Z+1)/2} / (1 - q^{-(2k-1)/2}); for
/// Z = 1 the cruder 2g / (q^{2k-1} - q^{(2k-1)/2}).
pub fn zeta_log_tail_bound(q: u64, k: u32, z: u32, g: usize) -> f64 {
    let q = q as f64;
    let h = (2 * k - 1) as f64 / 2.0;
    let g2 = 2.0 * g as f64;
    if z <= 1 {
        return g2 / (q.powf(2.0 * h) - q.powf(h));
    }
    g2 / (z as f64 + 1.0) * q.powf(-h * (z as f64 + 1.0)) / (1.0 - q.powf(-h))
}
