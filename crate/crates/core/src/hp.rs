//! Fixed-point reals with 192 fractional bits.
//!
//! Logs of exact counts are taken here, and survey moments are accumulated
//! here. Addition is exact, so sums do not depend on the order in which
//! parallel workers deliver their terms.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::sync::OnceLock;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Fractional bits carried by [`HpReal`].
pub const FRAC_BITS: u64 = 192;

/// A real number x stored as round(x · 2^192).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct HpReal(BigInt);

fn unit() -> BigInt {
    BigInt::one() << FRAC_BITS
}

/// Round-half-away division of a BigInt by a positive BigInt.
fn div_round(a: &BigInt, b: &BigInt) -> BigInt {
    let (q, r) = a.div_mod_floor(b);
    if (&r << 1) >= *b {
        q + 1
    } else {
        q
    }
}

impl HpReal {
    pub fn zero() -> Self {
        HpReal(BigInt::zero())
    }
    pub fn one() -> Self {
        HpReal(unit())
    }
    pub fn from_int(n: i64) -> Self {
        HpReal(BigInt::from(n) << FRAC_BITS)
    }
    pub fn from_bigint(n: &BigInt) -> Self {
        HpReal(n << FRAC_BITS)
    }
    pub fn from_rational(r: &BigRational) -> Self {
        HpReal(div_round(&(r.numer() << FRAC_BITS), r.denom()))
    }
    /// Exact conversion of a finite double.
    pub fn from_f64(x: f64) -> Self {
        let r = BigRational::from_float(x).expect("finite input");
        Self::from_rational(&r)
    }
    /// The raw scaled integer.
    pub fn raw(&self) -> &BigInt {
        &self.0
    }
    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }
    pub fn abs(&self) -> Self {
        HpReal(self.0.abs())
    }

    pub fn to_f64(&self) -> f64 {
        // Keep 64 significant bits before the final rounding to f64.
        let bits = self.0.bits();
        if bits <= 64 {
            return self.0.to_f64().unwrap() / 2f64.powi(FRAC_BITS as i32);
        }
        let shift = bits - 64;
        let top = (&self.0 >> shift).to_f64().unwrap();
        top * 2f64.powi(shift as i32 - FRAC_BITS as i32)
    }

    pub fn mul_int(&self, k: i64) -> Self {
        HpReal(&self.0 * k)
    }

    /// Division by a nonzero integer, rounded.
    pub fn div_int(&self, k: i64) -> Self {
        assert!(k != 0, "division by zero");
        let (n, d) = if k < 0 { (-&self.0, BigInt::from(-k)) } else { (self.0.clone(), BigInt::from(k)) };
        HpReal(div_round(&n, &d))
    }

    pub fn div(&self, other: &HpReal) -> Self {
        assert!(!other.0.is_zero(), "division by zero");
        let (n, d) = if other.0.is_negative() { (-(&self.0 << FRAC_BITS), -&other.0) } else { (&self.0 << FRAC_BITS, other.0.clone()) };
        HpReal(div_round(&n, &d))
    }

    pub fn powi(&self, k: u32) -> Self {
        (0..k).fold(HpReal::one(), |acc, _| &acc * self)
    }

    /// ln(m) for m in [1, 2] given as a scaled integer, via 2·atanh((m-1)/(m+1)).
    fn ln_reduced(m: &BigInt) -> BigInt {
        let u = unit();
        let y = div_round(&((m - &u) << FRAC_BITS), &(m + &u));
        let y2 = (&y * &y) >> FRAC_BITS;
        let mut term = y.clone();
        let mut sum = BigInt::zero();
        let mut k = 1u64;
        while !term.is_zero() {
            sum += &term / BigInt::from(k);
            term = (&term * &y2) >> FRAC_BITS;
            k += 2;
        }
        sum << 1
    }

    /// ln 2.
    pub fn ln2() -> HpReal {
        static LN2: OnceLock<BigInt> = OnceLock::new();
        HpReal(LN2.get_or_init(|| Self::ln_reduced(&(unit() << 1))).clone())
    }

    /// Natural log of a positive integer, absolute error below 2^-180.
    pub fn ln_int(n: &BigInt) -> HpReal {
        assert!(n.sign() == Sign::Plus, "log of a non-positive integer");
        let k = n.bits() - 1;
        let m = if k >= FRAC_BITS { n >> (k - FRAC_BITS) } else { n << (FRAC_BITS - k) };
        HpReal(Self::ln_reduced(&m) + Self::ln2().0 * BigInt::from(k))
    }

    /// Natural log of a positive rational.
    pub fn ln_rational(r: &BigRational) -> HpReal {
        assert!(r.is_positive(), "log of a non-positive rational");
        &Self::ln_int(r.numer()) - &Self::ln_int(r.denom())
    }

    /// Decimal rendering with `digits` places after the point.
    pub fn to_decimal(&self, digits: u32) -> String {
        let scale = BigInt::from(10).pow(digits);
        let v = div_round(&(&self.0 * &scale), &unit());
        let neg = v.is_negative();
        let s = v.abs().to_string();
        let s = format!("{:0>width$}", s, width = digits as usize + 1);
        let (int, frac) = s.split_at(s.len() - digits as usize);
        format!("{}{}.{}", if neg { "-" } else { "" }, int, frac)
    }
}

impl fmt::Debug for HpReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_decimal(30))
    }
}

impl Add for &HpReal {
    type Output = HpReal;
    fn add(self, o: &HpReal) -> HpReal {
        HpReal(&self.0 + &o.0)
    }
}
impl Sub for &HpReal {
    type Output = HpReal;
    fn sub(self, o: &HpReal) -> HpReal {
        HpReal(&self.0 - &o.0)
    }
}
impl Mul for &HpReal {
    type Output = HpReal;
    fn mul(self, o: &HpReal) -> HpReal {
        let p = &self.0 * &o.0;
        let neg = p.is_negative();
        let r = div_round(&p.abs(), &unit());
        HpReal(if neg { -r } else { r })
    }
}
impl Neg for &HpReal {
    type Output = HpReal;
    fn neg(self) -> HpReal {
        HpReal(-&self.0)
    }
}
impl AddAssign<&HpReal> for HpReal {
    fn add_assign(&mut self, o: &HpReal) {
        self.0 += &o.0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln2_digits() {
        assert_eq!(HpReal::ln2().to_decimal(40), "0.6931471805599453094172321214581765680755");
    }

    #[test]
    fn ln_of_powers() {
        let ten = HpReal::ln_int(&BigInt::from(10));
        let big = HpReal::ln_int(&BigInt::from(10).pow(50));
        let diff = &big - &ten.mul_int(50);
        assert!(diff.abs() < HpReal::from_f64(1e-50));
        assert_eq!(ten.to_decimal(30), "2.302585092994045684017991454684");
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(HpReal::from_f64(-0.25).to_decimal(3), "-0.250");
        assert_eq!(HpReal::from_int(3).div_int(4).to_decimal(2), "0.75");
        assert_eq!(HpReal::from_f64(1.5).to_f64(), 1.5);
    }
}
