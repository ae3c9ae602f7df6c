//! Univariate polynomials over a [`FieldSpec`](crate::field::FieldSpec).
//!
//! [`Poly`] is a general polynomial used for intermediate arithmetic;
//! [`MonicPoly`] is the monic type used for curves, primes and characters.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::error::{invariant, Error, Result};
use crate::field::{Field, FieldElement};

/// A polynomial with coefficients low degree first and no trailing zeros.
#[derive(Clone, PartialEq, Eq)]
pub struct Poly {
    field: Field,
    c: Vec<FieldElement>,
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.c.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, a) in self.c.iter().enumerate().rev() {
            if a.label() == 0 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match (i, a.label()) {
                (0, l) => write!(f, "{l}")?,
                (1, 1) => write!(f, "x")?,
                (1, l) => write!(f, "{l}x")?,
                (_, 1) => write!(f, "x^{i}")?,
                (_, l) => write!(f, "{l}x^{i}")?,
            }
        }
        Ok(())
    }
}

impl Poly {
    pub fn new(field: &Field, mut c: Vec<FieldElement>) -> Poly {
        while c.last().is_some_and(|a| a.label() == 0) {
            c.pop();
        }
        Poly { field: field.clone(), c }
    }

    pub fn from_labels(field: &Field, labels: &[u64]) -> Result<Poly> {
        let c = labels.iter().map(|&l| field.element(l)).collect::<Result<Vec<_>>>()?;
        Ok(Poly::new(field, c))
    }

    pub fn zero(field: &Field) -> Poly {
        Poly { field: field.clone(), c: Vec::new() }
    }
    pub fn one(field: &Field) -> Poly {
        Poly::constant(field, field.one())
    }
    pub fn constant(field: &Field, a: FieldElement) -> Poly {
        Poly::new(field, vec![a])
    }
    /// The monomial x.
    pub fn x(field: &Field) -> Poly {
        Poly::new(field, vec![field.zero(), field.one()])
    }

    pub fn field(&self) -> &Field {
        &self.field
    }
    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }
    pub fn is_one(&self) -> bool {
        self.c.len() == 1 && self.c[0] == self.field.one()
    }
    /// Degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }
    pub fn coeffs(&self) -> &[FieldElement] {
        &self.c
    }
    pub fn coeff(&self, i: usize) -> FieldElement {
        self.c.get(i).copied().unwrap_or_else(|| self.field.zero())
    }
    pub fn leading(&self) -> Option<FieldElement> {
        self.c.last().copied()
    }

    fn check(&self, other: &Poly) {
        assert!(self.field == other.field, "mixed-field operands: {:?} vs {:?}", self.field, other.field);
    }

    pub fn add(&self, other: &Poly) -> Poly {
        self.check(other);
        let f = &self.field;
        let n = self.c.len().max(other.c.len());
        Poly::new(f, (0..n).map(|i| f.add(self.coeff(i), other.coeff(i))).collect())
    }

    pub fn neg(&self) -> Poly {
        Poly::new(&self.field, self.c.iter().map(|&a| self.field.neg(a)).collect())
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn scale(&self, a: FieldElement) -> Poly {
        Poly::new(&self.field, self.c.iter().map(|&b| self.field.mul(a, b)).collect())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        self.check(other);
        if self.is_zero() || other.is_zero() {
            return Poly::zero(&self.field);
        }
        let f = &self.field;
        let mut out = vec![f.zero(); self.c.len() + other.c.len() - 1];
        for (i, &a) in self.c.iter().enumerate() {
            if a.label() == 0 {
                continue;
            }
            for (j, &b) in other.c.iter().enumerate() {
                out[i + j] = f.add(out[i + j], f.mul(a, b));
            }
        }
        Poly::new(f, out)
    }

    /// Quotient and remainder, with deg r < deg g.
    pub fn divmod(&self, g: &Poly) -> Result<(Poly, Poly)> {
        self.check(g);
        let dg = g.degree().ok_or(Error::DivisionByZero)?;
        let f = &self.field;
        let lead_inv = f.inv(g.c[dg])?;
        let mut r = self.c.clone();
        if r.len() <= dg {
            return Ok((Poly::zero(f), self.clone()));
        }
        let mut q = vec![f.zero(); r.len() - dg];
        for k in (dg..r.len()).rev() {
            let t = f.mul(r[k], lead_inv);
            if t.label() == 0 {
                continue;
            }
            q[k - dg] = t;
            for (i, &gi) in g.c.iter().enumerate() {
                r[k - dg + i] = f.sub(r[k - dg + i], f.mul(t, gi));
            }
        }
        r.truncate(dg);
        Ok((Poly::new(f, q), Poly::new(f, r)))
    }

    pub fn rem(&self, g: &Poly) -> Result<Poly> {
        Ok(self.divmod(g)?.1)
    }

    /// Scale to leading coefficient 1 (zero stays zero).
    pub fn make_monic(&self) -> Poly {
        match self.leading() {
            None => self.clone(),
            Some(l) => self.scale(self.field.inv(l).expect("leading coefficient is nonzero")),
        }
    }

    /// Monic greatest common divisor; gcd(0, 0) = 0.
    pub fn gcd(&self, other: &Poly) -> Poly {
        self.check(other);
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.rem(&b).expect("b is nonzero");
            a = b;
            b = r;
        }
        a.make_monic()
    }

    pub fn derivative(&self) -> Poly {
        let f = &self.field;
        Poly::new(f, self.c.iter().enumerate().skip(1).map(|(i, &a)| f.mul(f.from_int(i as i64), a)).collect())
    }

    pub fn eval(&self, x: FieldElement) -> FieldElement {
        let f = &self.field;
        self.c.iter().rev().fold(f.zero(), |v, &a| f.add(f.mul(v, x), a))
    }

    pub fn mulmod(&self, other: &Poly, m: &Poly) -> Result<Poly> {
        self.mul(other).rem(m)
    }

    /// self^n mod m by square-and-multiply over the bits of n.
    pub fn powmod(&self, n: &BigUint, m: &Poly) -> Result<Poly> {
        let base = self.rem(m)?;
        let mut r = Poly::one(&self.field).rem(m)?;
        for i in (0..n.bits()).rev() {
            r = r.mulmod(&r, m)?;
            if n.bit(i) {
                r = r.mulmod(&base, m)?;
            }
        }
        Ok(r)
    }
}

/// A monic polynomial; the leading 1 is implicit in `coeffs`.
#[derive(Clone, PartialEq, Eq)]
pub struct MonicPoly {
    poly: Poly,
}

impl fmt::Debug for MonicPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.poly.fmt(f)
    }
}

impl MonicPoly {
    /// Monic polynomial x^d + c_{d-1}x^{d-1} + ... + c_0 from `c_0..c_{d-1}`.
    pub fn new(field: &Field, lower: Vec<FieldElement>) -> MonicPoly {
        let mut c = lower;
        c.push(field.one());
        MonicPoly { poly: Poly { field: field.clone(), c } }
    }

    /// From canonical labels of `c_0..c_{d-1}`.
    pub fn from_labels(field: &Field, lower: &[u64]) -> Result<MonicPoly> {
        let c = lower.iter().map(|&l| field.element(l)).collect::<Result<Vec<_>>>()?;
        Ok(MonicPoly::new(field, c))
    }

    /// Wrap a general polynomial, which must be monic.
    pub fn try_from_poly(p: Poly) -> Result<MonicPoly> {
        match p.leading() {
            Some(l) if l == p.field.one() => Ok(MonicPoly { poly: p }),
            _ => Err(Error::Invalid(format!("{p:?} is not monic"))),
        }
    }

    pub fn field(&self) -> &Field {
        &self.poly.field
    }
    pub fn degree(&self) -> usize {
        self.poly.c.len() - 1
    }
    /// c_0..c_{d-1}.
    pub fn coeffs(&self) -> &[FieldElement] {
        &self.poly.c[..self.degree()]
    }
    pub fn labels(&self) -> Vec<u64> {
        self.coeffs().iter().map(|a| a.label()).collect()
    }
    pub fn as_poly(&self) -> &Poly {
        &self.poly
    }
    pub fn eval(&self, x: FieldElement) -> FieldElement {
        self.poly.eval(x)
    }
    pub fn mul(&self, other: &MonicPoly) -> MonicPoly {
        MonicPoly { poly: self.poly.mul(&other.poly) }
    }
    pub fn pow(&self, k: u32) -> MonicPoly {
        let mut r = MonicPoly::new(self.field(), Vec::new());
        for _ in 0..k {
            r = r.mul(self);
        }
        r
    }

    /// |P| = q^{deg P}.
    pub fn norm(&self) -> BigUint {
        BigUint::from(self.field().order()).pow(self.degree() as u32)
    }

    /// gcd(f, f') = 1. When f' = 0 the gcd is f itself, so the answer is false.
    pub fn is_squarefree(&self) -> bool {
        self.squarefree_witness().is_one()
    }

    /// gcd(f, f'); equals 1 exactly when f is squarefree.
    pub fn squarefree_witness(&self) -> Poly {
        self.poly.gcd(&self.poly.derivative())
    }

    /// x^{Q^k} mod self for k = 0..=upto.
    fn frobenius_orbit(&self, upto: usize) -> Vec<Poly> {
        let f = self.field();
        let q = BigUint::from(f.order());
        let mut out = Vec::with_capacity(upto + 1);
        let mut r = Poly::x(f).rem(&self.poly).expect("monic modulus");
        out.push(r.clone());
        for _ in 0..upto {
            r = r.powmod(&q, &self.poly).expect("monic modulus");
            out.push(r.clone());
        }
        out
    }

    /// Rabin's test: x^{Q^d} = x mod f and gcd(x^{Q^{d/l}} - x, f) = 1 for primes l | d.
    pub fn is_irreducible(&self) -> bool {
        let d = self.degree();
        if d == 0 {
            return false;
        }
        if d == 1 {
            return true;
        }
        let orbit = self.frobenius_orbit(d);
        let x = Poly::x(self.field()).rem(&self.poly).expect("monic modulus");
        if orbit[d] != x {
            return false;
        }
        crate::field::prime_factors(d as u64)
            .into_iter()
            .all(|l| orbit[d / l as usize].sub(&x).gcd(&self.poly).is_one())
    }

    /// Degrees of the irreducible factors of a squarefree polynomial, ascending.
    pub fn factor_degrees(&self) -> Result<Vec<usize>> {
        if !self.is_squarefree() {
            return Err(Error::NotSquarefree { gcd: format!("{:?}", self.squarefree_witness()) });
        }
        let f = self.field();
        let x = Poly::x(f);
        let q = BigUint::from(f.order());
        let mut rest = self.poly.clone();
        let mut h = x.rem(&self.poly)?;
        let mut out = Vec::new();
        let mut d = 1;
        while rest.degree().unwrap_or(0) >= 2 * d {
            h = h.powmod(&q, &self.poly)?;
            let g = h.sub(&x).gcd(&rest);
            let dg = g.degree().unwrap_or(0);
            if dg > 0 {
                if dg % d != 0 {
                    return Err(invariant("distinct-degree factorization produced a partial factor"));
                }
                out.extend(std::iter::repeat(d).take(dg / d));
                rest = rest.divmod(&g)?.0;
            }
            d += 1;
        }
        if let Some(dr) = rest.degree().filter(|&dr| dr > 0) {
            out.push(dr);
        }
        Ok(out)
    }
}

/// A prime power P^k, carrying Λ(P^k) = deg P.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimePower {
    pub prime: MonicPoly,
    pub k: u32,
}

impl PrimePower {
    pub fn degree(&self) -> usize {
        self.prime.degree() * self.k as usize
    }
    pub fn mangoldt(&self) -> usize {
        self.prime.degree()
    }
    pub fn value(&self) -> MonicPoly {
        self.prime.pow(self.k)
    }
}

/// Q^m, if it fits in a u64.
fn count_monics(q: u64, m: usize) -> Result<u64> {
    q.checked_pow(m as u32).ok_or_else(|| Error::Cap(format!("{q}^{m} monic polynomials")))
}

/// All monic polynomials of degree m, in label order (c_{m-1} most significant).
pub fn monics_of_degree(field: &Field, m: usize) -> Result<impl Iterator<Item = MonicPoly> + '_> {
    let q = field.order();
    let total = count_monics(q, m)?;
    Ok((0..total).map(move |mut t| {
        let mut lower = Vec::with_capacity(m);
        for _ in 0..m {
            lower.push(field.element(t % q).expect("digit below Q"));
            t /= q;
        }
        MonicPoly::new(field, lower)
    }))
}

/// Monic irreducibles of degree exactly m, in label order.
pub fn irreducibles_of_degree(field: &Field, m: usize) -> Result<impl Iterator<Item = MonicPoly> + '_> {
    Ok(monics_of_degree(field, m)?.filter(|f| f.is_irreducible()))
}

/// Monic irreducibles of degree 1..=d_max ordered by (degree, label).
pub fn irreducibles_upto(field: &Field, d_max: usize) -> Result<impl Iterator<Item = MonicPoly> + '_> {
    count_monics(field.order(), d_max)?;
    Ok((1..=d_max).flat_map(move |m| irreducibles_of_degree(field, m).expect("size checked above")))
}

fn mobius(mut n: u64) -> i64 {
    let mut mu = 1;
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            n /= d;
            if n % d == 0 {
                return 0;
            }
            mu = -mu;
        }
        d += 1;
    }
    if n > 1 {
        mu = -mu;
    }
    mu
}

/// Number of monic irreducibles of degree m over F_q: (1/m) Σ_{r|m} μ(r) q^{m/r}.
pub fn count_irreducibles(q: u64, m: usize) -> BigUint {
    let m64 = m as u64;
    let mut acc = num_bigint::BigInt::zero();
    for r in (1..=m64).filter(|r| m64 % r == 0) {
        let term = num_bigint::BigInt::from(q).pow((m64 / r) as u32);
        acc += term * mobius(r);
    }
    (acc / num_bigint::BigInt::from(m64)).to_biguint().expect("count is nonnegative")
}

/// Every P^k with k·deg P = m, grouped by deg P ascending.
pub fn prime_powers_of_degree(field: &Field, m: usize) -> Result<Vec<PrimePower>> {
    if m == 0 {
        return Err(Error::Invalid("prime powers of degree 0".into()));
    }
    let mut out = Vec::new();
    for d in (1..=m).filter(|d| m % d == 0) {
        for p in irreducibles_of_degree(field, d)? {
            out.push(PrimePower { prime: p, k: (m / d) as u32 });
        }
    }
    Ok(out)
}

/// The Legendre symbol (F/P) for irreducible P: 0 if P | F, else F^{(|P|-1)/2} mod P.
pub fn legendre_poly(f: &MonicPoly, p: &MonicPoly) -> Result<i8> {
    if !p.is_irreducible() {
        return Err(Error::NotIrreducible(format!("{p:?}")));
    }
    legendre_poly_unchecked(f.as_poly(), p)
}

/// As [`legendre_poly`] without re-testing irreducibility of P.
pub fn legendre_poly_unchecked(f: &Poly, p: &MonicPoly) -> Result<i8> {
    let r = f.rem(p.as_poly())?;
    if r.is_zero() {
        return Ok(0);
    }
    let e = (p.norm() - BigUint::one()) >> 1;
    let s = r.powmod(&e, p.as_poly())?;
    let fld = p.field();
    if s.is_one() {
        Ok(1)
    } else if s == Poly::constant(fld, fld.from_int(-1)) {
        Ok(-1)
    } else {
        Err(invariant(format!("Euler criterion gave non-constant {s:?} for {f:?} mod {p:?}")))
    }
}
