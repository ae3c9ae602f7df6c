//! Harder-Narasimhan stratum masses and semistable masses β(n, d).
//!
//! For a composition (n_1, ..., n_m) of n and a degree d, the stratum mass is
//!
//!   C_L(n_1..n_m; d) = Σ N_J^{m-1} q^{-χ} ∏ β(n_i, d_i)
//!
//! over integer tuples with Σ d_i = d and d_1/n_1 > ... > d_m/n_m, where
//! χ = Σ_{i<j}(d_i n_j - d_j n_i) + Σ_{i<j} n_i n_j (1-g). The engine
//! substitutes the slope gaps e_j = d_j n_{j+1} - d_{j+1} n_j >= 1, under
//! which the exponent is linear, Σ_j e_j N_{<=j} N_{>j} / (n_j n_{j+1}), and
//! the summand is periodic in each e_j modulo
//!
//!   M_j = n n_j n_{j+1} / gcd(N_{<=j}, n).
//!
//! Summing each residue class is then a product of geometric series. The
//! box oracle sums the same terms directly with a certified tail bound.

use std::collections::HashMap;
use std::sync::Mutex;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::curve::{HyperellipticCurve, LPolynomial};
use crate::error::{invariant, Error, Result};

/// Largest rank handled.
pub const N_MAX: usize = 6;

/// χ of the displayed formula for parts `n` and degrees `d`.
pub fn euler_exponent(parts: &[usize], degrees: &[i64], g: usize) -> i64 {
    assert_eq!(parts.len(), degrees.len(), "parts and degrees differ in length");
    let (slope_part, cross) = exponent_parts(parts, degrees);
    slope_part + cross * (1 - g as i64)
}

/// (Σ_{i<j}(d_i n_j - d_j n_i), Σ_{i<j} n_i n_j).
fn exponent_parts(parts: &[usize], degrees: &[i64]) -> (i64, i64) {
    let mut e = 0;
    let mut cross = 0;
    for i in 0..parts.len() {
        for j in i + 1..parts.len() {
            e += degrees[i] * parts[j] as i64 - degrees[j] * parts[i] as i64;
            cross += (parts[i] * parts[j]) as i64;
        }
    }
    (e, cross)
}

/// All ordered compositions of n.
pub fn compositions(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for first in 1..=n {
        for mut rest in compositions(n - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Compositions of n with at least two parts, i.e. the unstable HN types.
pub fn unstable_types(n: usize) -> Vec<Vec<usize>> {
    compositions(n).into_iter().filter(|c| c.len() >= 2).collect()
}

/// Result of the box oracle: partial sum over the box and a bound on the rest.
#[derive(Clone, Debug)]
pub struct BoxSum {
    pub partial: BigRational,
    pub tail_bound: BigRational,
    /// Number of cone tuples inside the box.
    pub terms: u64,
}

/// Per-curve data shared by all rank computations.
pub struct CurveContext {
    q: u64,
    qb: BigInt,
    g: usize,
    lpoly: LPolynomial,
    nj: BigInt,
    zeta: Vec<BigRational>,
    multiplier: u64,
    betas: Mutex<HashMap<(usize, usize), BigRational>>,
}

impl std::fmt::Debug for CurveContext {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "CurveContext(q={}, g={}, N_J={})", self.q, self.g, self.nj)
    }
}

fn rat(n: impl Into<BigInt>) -> BigRational {
    BigRational::from_integer(n.into())
}

impl CurveContext {
    pub fn new(lpoly: LPolynomial) -> Result<Self> {
        Self::with_modulus_multiplier(lpoly, 1)
    }

    pub fn from_curve(curve: &HyperellipticCurve) -> Result<Self> {
        Self::new(curve.l_polynomial()?)
    }

    /// Use residue moduli k·M_j instead of M_j. The result must not change;
    /// this exists to test exactly that.
    pub fn with_modulus_multiplier(lpoly: LPolynomial, k: u64) -> Result<Self> {
        if k == 0 {
            return Err(Error::Invalid("modulus multiplier must be positive".into()));
        }
        let q = lpoly.q();
        let nj = lpoly.jacobian_order(1)?;
        let zeta = (2..=N_MAX as u32).map(|k| lpoly.zeta_value(k)).collect::<Result<Vec<_>>>()?;
        Ok(CurveContext {
            q,
            qb: BigInt::from(q),
            g: lpoly.genus(),
            lpoly,
            nj,
            zeta,
            multiplier: k,
            betas: Mutex::new(HashMap::new()),
        })
    }

    pub fn q(&self) -> u64 {
        self.q
    }
    pub fn genus(&self) -> usize {
        self.g
    }
    pub fn lpoly(&self) -> &LPolynomial {
        &self.lpoly
    }
    /// N_q(J).
    pub fn nj(&self) -> &BigInt {
        &self.nj
    }
    /// ζ_X(k) for 2 <= k <= 6.
    pub fn zeta(&self, k: usize) -> &BigRational {
        &self.zeta[k - 2]
    }

    /// q^e for any integer e, as a rational.
    pub fn q_pow(&self, e: i64) -> BigRational {
        let m = self.qb.pow(e.unsigned_abs() as u32);
        if e >= 0 {
            rat(m)
        } else {
            BigRational::new(BigInt::one(), m)
        }
    }

    /// The total mass q^{(n²-1)(g-1)} ∏_{k=2}^n ζ_X(k) / (q-1).
    pub fn siegel_mass(&self, n: usize) -> BigRational {
        let mut v = self.q_pow(((n * n - 1) * (self.g - 1)) as i64) / rat(self.q - 1);
        for k in 2..=n {
            v *= self.zeta(k);
        }
        v
    }

    fn check_parts(parts: &[usize]) -> Result<usize> {
        if parts.len() < 2 {
            return Err(Error::TrivialComposition);
        }
        let n: usize = parts.iter().sum();
        if parts.contains(&0) || n > N_MAX {
            return Err(Error::RankOutOfRange(n));
        }
        Ok(n)
    }

    /// Exact C_L for a composition with at least two parts.
    pub fn c_l(&self, parts: &[usize], d: i64) -> Result<BigRational> {
        let n = Self::check_parts(parts)?;
        let m = parts.len();
        let n_le: Vec<usize> = parts.iter().scan(0, |s, &p| { *s += p; Some(*s) }).collect();
        // Denominator shared by all slopes: T = n·D with D = lcm of n_j n_{j+1}.
        let dd = (0..m - 1).fold(1i64, |acc, j| acc.lcm(&((parts[j] * parts[j + 1]) as i64)));
        let t = n as i64 * dd;
        let moduli: Vec<i64> = (0..m - 1)
            .map(|j| {
                let g = n_le[j].gcd(&n);
                (n * parts[j] * parts[j + 1] / g) as i64 * self.multiplier as i64
            })
            .collect();
        let betas: Vec<Vec<BigRational>> =
            parts.iter().map(|&p| (0..p).map(|r| self.beta(p, r as i64)).collect::<Result<_>>()).collect::<Result<_>>()?;

        let mut total = BigRational::zero();
        let mut r: Vec<i64> = vec![1; m - 1];
        let mut degrees = vec![0i64; m];
        loop {
            // μ_1·T = D·d + Σ_j r_j N_{>j} D/(n_j n_{j+1}); then step down the gaps.
            let mut mu_t = dd * d;
            for j in 0..m - 1 {
                mu_t += r[j] * (n - n_le[j]) as i64 * (dd / (parts[j] * parts[j + 1]) as i64);
            }
            let mut admissible = true;
            for k in 0..m {
                if k > 0 {
                    mu_t -= r[k - 1] * n as i64 * (dd / (parts[k - 1] * parts[k]) as i64);
                }
                let num = parts[k] as i64 * mu_t;
                if num % t != 0 {
                    admissible = false;
                    break;
                }
                degrees[k] = num / t;
            }
            if admissible {
                if degrees.iter().sum::<i64>() != d {
                    return Err(invariant("degree recovery does not preserve the total degree"));
                }
                let (e, _) = exponent_parts(parts, &degrees);
                if e <= 0 {
                    return Err(invariant("cone class with non-positive exponent"));
                }
                let mut term = self.q_pow(-e);
                for k in 0..m {
                    term *= &betas[k][degrees[k].rem_euclid(parts[k] as i64) as usize];
                }
                total += term;
            }
            // Odometer over residues r_j in [1, M_j].
            let mut j = 0;
            loop {
                if j == m - 1 {
                    return self.finish_cone(parts, &n_le, &moduli, total);
                }
                r[j] += 1;
                if r[j] <= moduli[j] {
                    break;
                }
                r[j] = 1;
                j += 1;
            }
        }
    }

    fn finish_cone(&self, parts: &[usize], n_le: &[usize], moduli: &[i64], mut total: BigRational) -> Result<BigRational> {
        let m = parts.len();
        let n = n_le[m - 1];
        for j in 0..m - 1 {
            // M_j·w_j with w_j = N_{<=j}N_{>j}/(n_j n_{j+1}); integral by choice of M_j.
            let num = moduli[j] * (n_le[j] * (n - n_le[j])) as i64;
            let den = (parts[j] * parts[j + 1]) as i64;
            if num % den != 0 || num <= 0 {
                return Err(invariant("geometric ratio exponent is not a positive integer"));
            }
            total /= BigRational::one() - self.q_pow(-(num / den));
        }
        let cross: usize = (0..m).flat_map(|i| (i + 1..m).map(move |j| (i, j))).map(|(i, j)| parts[i] * parts[j]).sum();
        Ok(total * rat(self.nj.pow((m - 1) as u32)) * self.q_pow((cross * (self.g - 1)) as i64))
    }

    /// Direct summation over the box max_i |d_i - n_i d/n| <= R, plus a tail bound.
    pub fn c_l_box_oracle(&self, parts: &[usize], d: i64, radius: i64) -> Result<BoxSum> {
        let n = Self::check_parts(parts)? as i64;
        let m = parts.len();
        if radius < 1 {
            return Err(Error::Invalid("box radius must be >= 1".into()));
        }
        let betas: Vec<Vec<BigRational>> =
            parts.iter().map(|&p| (0..p).map(|r| self.beta(p, r as i64)).collect::<Result<_>>()).collect::<Result<_>>()?;
        // Integer box: n_i d/n - R <= d_i <= n_i d/n + R.
        let lo: Vec<i64> = parts.iter().map(|&p| Integer::div_ceil(&(p as i64 * d - radius * n), &n)).collect();
        let hi: Vec<i64> = parts.iter().map(|&p| Integer::div_floor(&(p as i64 * d + radius * n), &n)).collect();

        let mut hist: HashMap<(Vec<i64>, i64), u64> = HashMap::new();
        let mut degrees = lo.clone();
        let mut terms = 0u64;
        loop {
            let last = d - degrees[..m - 1].iter().sum::<i64>();
            degrees[m - 1] = last;
            let in_box = last >= lo[m - 1] && last <= hi[m - 1];
            let in_cone = (0..m - 1).all(|i| degrees[i] * parts[i + 1] as i64 > degrees[i + 1] * parts[i] as i64);
            if in_box && in_cone {
                let (e, _) = exponent_parts(parts, &degrees);
                let res: Vec<i64> = degrees.iter().zip(parts).map(|(&di, &p)| di.rem_euclid(p as i64)).collect();
                *hist.entry((res, e)).or_insert(0) += 1;
                terms += 1;
            }
            let mut j = 0;
            loop {
                if j == m - 1 {
                    return self.finish_box(parts, n, radius, hist, terms, &betas);
                }
                degrees[j] += 1;
                if degrees[j] <= hi[j] {
                    break;
                }
                degrees[j] = lo[j];
                j += 1;
            }
        }
    }

    fn finish_box(
        &self,
        parts: &[usize],
        n: i64,
        radius: i64,
        hist: HashMap<(Vec<i64>, i64), u64>,
        terms: u64,
        betas: &[Vec<BigRational>],
    ) -> Result<BoxSum> {
        let m = parts.len();
        let cross: usize = (0..m).flat_map(|i| (i + 1..m).map(move |j| (i, j))).map(|(i, j)| parts[i] * parts[j]).sum();
        let pre = rat(self.nj.pow((m - 1) as u32)) * self.q_pow((cross * (self.g - 1)) as i64);
        let mut keys: Vec<_> = hist.into_iter().collect();
        keys.sort();
        let mut partial = BigRational::zero();
        for ((res, e), count) in keys {
            let mut term = self.q_pow(-e) * rat(count);
            for k in 0..m {
                term *= &betas[k][res[k] as usize];
            }
            partial += term;
        }
        partial *= &pre;

        // Omitted tuples have E > (n-1)R/max n_i, at most E^{m-2} tuples per E.
        let max_part = *parts.iter().max().unwrap() as i64;
        let e0 = (n - 1) * radius / max_part + 1;
        let k = (m - 2) as u32;
        let e0r = rat(e0);
        let rho = ((&e0r + BigRational::one()) / &e0r).pow(k as i32) / rat(self.q);
        if rho >= BigRational::one() {
            return Err(Error::Invalid(format!("box radius {radius} too small to certify a tail")));
        }
        let mut c = pre;
        for b in betas {
            c *= b.iter().max().expect("parts are nonempty").clone();
        }
        let tail_bound = c * rat(BigInt::from(e0).pow(k)) * self.q_pow(-e0) / (BigRational::one() - rho);
        Ok(BoxSum { partial, tail_bound, terms })
    }

    /// β(n, d): the semistable mass, memoized by (n, d mod n).
    pub fn beta(&self, n: usize, d: i64) -> Result<BigRational> {
        if n == 0 || n > N_MAX {
            return Err(Error::RankOutOfRange(n));
        }
        let key = (n, d.rem_euclid(n as i64) as usize);
        if let Some(v) = self.betas.lock().unwrap().get(&key) {
            return Ok(v.clone());
        }
        let v = if n == 1 {
            BigRational::new(BigInt::one(), BigInt::from(self.q - 1))
        } else {
            let mut v = self.siegel_mass(n);
            for comp in unstable_types(n) {
                v -= self.c_l(&comp, key.1 as i64)?;
            }
            v
        };
        if !v.is_positive() {
            return Err(invariant(format!("non-positive semistable mass β({n}, {d}) = {v}")));
        }
        // Concurrent fills compute the same value, so first writer wins.
        Ok(self.betas.lock().unwrap().entry(key).or_insert(v).clone())
    }

    /// The published closed form for C_L(1,1,1); independent of d.
    pub fn c111_closed_form(&self, _d: i64) -> BigRational {
        let q = rat(self.q);
        let one = BigRational::one();
        let num = self.q_pow(5) * rat(self.nj.pow(2)) * self.q_pow(3 * (self.g as i64 - 1));
        let den = (&q - &one).pow(3) * (q.pow(2) - &one) * (q.pow(3) - &one);
        num / den
    }

    /// The published closed form for C_L(2,1) = C_L(1,2); independent of d.
    pub fn c21_closed_form(&self, _d: i64) -> BigRational {
        let q = rat(self.q);
        let one = BigRational::one();
        let g = self.g as i64;
        let nj = rat(self.nj.clone());
        let pre = self.q_pow(6) * &nj * self.q_pow(2 * (g - 1)) / ((&q - &one) * (q.pow(6) - &one));
        let d3 = (&q - &one).pow(3) * (&q + &one);
        let brace = rat(2) * self.q_pow(3 * (g - 1)) * self.zeta(2) / (&q - &one)
            - self.q_pow(g - 1) * &nj / &d3
            - self.q_pow(g) * &nj / &d3;
        pre * brace
    }
}
