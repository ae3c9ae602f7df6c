//! Theoretical moments H(r) of the truncated character sum and the
//! characteristic function of its limiting distribution.
//!
//! Every sum over irreducibles is grouped by degree: the summands depend on a
//! prime P only through |P| = q^deg P, so a sum over primes of degree d is
//! π(d) times one summand, and injective assignments of distinct primes are
//! counted with falling factorials of π(d).

use num_complex::Complex64;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::count_irreducibles;

/// Largest moment order accepted by [`moment_h`].
pub const R_MAX: usize = 6;

/// The average of a square character over the family, per prime of the square.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum SquareWeight {
    /// 1/(1 + |P|^-1): the probability that P does not divide F.
    #[default]
    Reciprocal,
    /// (1 - |P|^-1)(1 + |P|^-2), kept for comparison.
    Literal,
}

/// Which of the two series is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum HForm {
    /// Tuples of prime powers whose product is a square.
    SquareTuples,
    /// Distinct primes with per-prime moments u^λ + (-1)^λ v^λ.
    DistinctPrimes,
}

/// Relative allowance for double rounding, folded into every reported tail.
pub const ROUNDING_ALLOWANCE: f64 = 1e-12;

/// A truncated evaluation with its certified truncation bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Truncated {
    pub value: f64,
    pub tail: f64,
}

fn check_q(q: u64) -> Result<()> {
    match crate::field::prime_factors(q).as_slice() {
        [p] if *p != 2 => Ok(()),
        _ => Err(Error::BadCharacteristic(q)),
    }
}

/// π(d) for d = 0..=D as doubles (entry 0 unused).
fn prime_counts(q: u64, d_max: usize) -> Vec<f64> {
    let mut v = vec![0.0];
    v.extend((1..=d_max).map(|d| count_irreducibles(q, d).to_f64().expect("finite")));
    v
}

/// All set partitions of {0..n-1}, each as a list of block sizes.
fn partition_block_sizes(n: usize) -> Vec<Vec<usize>> {
    // Restricted growth strings.
    let mut out = Vec::new();
    if n == 0 {
        out.push(Vec::new());
        return out;
    }
    let mut a = vec![0usize; n];
    loop {
        let blocks = a.iter().max().unwrap() + 1;
        let mut sizes = vec![0usize; blocks];
        for &b in &a {
            sizes[b] += 1;
        }
        out.push(sizes);
        // Next restricted growth string.
        let mut i = n - 1;
        loop {
            if i == 0 {
                return out;
            }
            let bound = a[..i].iter().max().unwrap() + 1;
            if a[i] < bound {
                a[i] += 1;
                for x in a.iter_mut().skip(i + 1) {
                    *x = 0;
                }
                break;
            }
            i -= 1;
        }
    }
}

/// All set partitions of {0..n-1} as explicit blocks.
fn set_partitions(n: usize) -> Vec<Vec<Vec<usize>>> {
    fn rec(i: usize, n: usize, cur: &mut Vec<Vec<usize>>, out: &mut Vec<Vec<Vec<usize>>>) {
        if i == n {
            out.push(cur.clone());
            return;
        }
        for b in 0..cur.len() {
            cur[b].push(i);
            rec(i + 1, n, cur, out);
            cur[b].pop();
        }
        cur.push(vec![i]);
        rec(i + 1, n, cur, out);
        cur.pop();
    }
    let mut out = Vec::new();
    rec(0, n, &mut Vec::new(), &mut out);
    out
}

fn compositions(r: usize) -> Vec<Vec<usize>> {
    if r == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for first in 1..=r {
        for mut rest in compositions(r - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn falling(x: f64, k: usize) -> f64 {
    (0..k).map(|i| (x - i as f64).max(0.0)).product()
}

fn square_weight(q: f64, d: usize, w: SquareWeight) -> f64 {
    let p = q.powi(d as i32);
    match w {
        SquareWeight::Reciprocal => 1.0 / (1.0 + 1.0 / p),
        SquareWeight::Literal => (1.0 - 1.0 / p) * (1.0 + 1.0 / (p * p)),
    }
}

/// Σ over exponent vectors k ∈ [1, kmax]^b with Σk even of ∏ x^{k_i}/k_i.
fn even_exponent_sum(x: f64, kmax: usize, b: usize) -> f64 {
    let (mut se, mut so) = (0.0, 0.0);
    for k in 1..=kmax {
        let t = x.powi(k as i32) / k as f64;
        if k % 2 == 0 {
            se += t;
        } else {
            so += t;
        }
    }
    let (mut even, mut odd) = (1.0, 0.0);
    for _ in 0..b {
        (even, odd) = (even * se + odd * so, even * so + odd * se);
    }
    even
}

/// W_all = Σ_{m≥1} q^{-m}/m and the bound for Σ_{m>D} q^{-m}/m.
fn weight_mass(q: f64, d_max: usize) -> (f64, f64) {
    let all = -(-1.0 / q).ln_1p();
    let tail = q.powi(-(d_max as i32 + 1)) / ((d_max as f64 + 1.0) * (1.0 - 1.0 / q));
    (all, tail)
}

fn h_square_tuples(q: u64, r: usize, d_max: usize, weight: SquareWeight) -> Truncated {
    let qf = q as f64;
    let pi = prime_counts(q, d_max);
    let mut total = 0.0;
    for sizes in partition_block_sizes(r) {
        let nb = sizes.len();
        // blockw[j][d]: weight of block j on one prime of degree d.
        let blockw: Vec<Vec<f64>> = sizes
            .iter()
            .map(|&b| {
                (0..=d_max)
                    .map(|d| {
                        if d == 0 {
                            0.0
                        } else {
                            square_weight(qf, d, weight) * even_exponent_sum(qf.powi(-2 * d as i32), d_max / d, b)
                        }
                    })
                    .collect()
            })
            .collect();
        // Distribute blocks over degrees; blocks sharing a degree get distinct primes.
        let full = (1usize << nb) - 1;
        let mut dp = vec![0.0; 1 << nb];
        dp[0] = 1.0;
        for d in 1..=d_max {
            let mut next = dp.clone();
            for mask in 0..=full {
                if dp[mask] == 0.0 {
                    continue;
                }
                let free = full & !mask;
                let mut sub = free;
                while sub != 0 {
                    let cnt = sub.count_ones() as usize;
                    let mut w = falling(pi[d], cnt);
                    for (j, bw) in blockw.iter().enumerate() {
                        if sub >> j & 1 == 1 {
                            w *= bw[d];
                        }
                    }
                    next[mask | sub] += dp[mask] * w;
                    sub = (sub - 1) & free;
                }
            }
            dp = next;
        }
        total += dp[full];
    }
    let (all, tail) = weight_mass(qf, d_max);
    Truncated { value: total, tail: r as f64 * tail * all.powi(r as i32 - 1) }
}

/// u_P = -log(1 - x), v_P = log(1 + x), and u_P - v_P = -log(1 - x²), x = |P|^-2.
fn uv(q: f64, d: usize) -> (f64, f64, f64) {
    let x = q.powi(-2 * d as i32);
    (-(-x).ln_1p(), x.ln_1p(), -(-x * x).ln_1p())
}

/// u^λ + (-1)^λ v^λ, with the odd case factored through u - v.
fn signed_power_sum(u: f64, v: f64, diff: f64, lambda: usize) -> f64 {
    if lambda % 2 == 0 {
        u.powi(lambda as i32) + v.powi(lambda as i32)
    } else {
        diff * (0..lambda).map(|i| u.powi((lambda - 1 - i) as i32) * v.powi(i as i32)).sum::<f64>()
    }
}

fn h_distinct_primes(q: u64, r: usize, d_max: usize) -> Truncated {
    let qf = q as f64;
    let pi = prime_counts(q, d_max);
    let per_prime: Vec<(f64, f64, f64)> = (0..=d_max).map(|d| if d == 0 { (0.0, 0.0, 0.0) } else { uv(qf, d) }).collect();
    // h(λ, d) = (u^λ + (-1)^λ v^λ) / (λ! (1 + |P|^-1)).
    let h = |lambda: usize, d: usize| {
        let (u, v, diff) = per_prime[d];
        signed_power_sum(u, v, diff, lambda) / (factorial(lambda) * (1.0 + qf.powi(-(d as i32))))
    };
    let mut total = 0.0;
    for m in 1..=r {
        let partitions = set_partitions(m);
        let mut inner = 0.0;
        for lambda in compositions(r).into_iter().filter(|c| c.len() == m) {
            // Σ over distinct primes by Möbius inversion on set partitions of the m slots.
            let mut distinct = 0.0;
            for part in &partitions {
                let mut term = 1.0;
                for block in part {
                    let s: f64 = (1..=d_max).map(|d| pi[d] * block.iter().map(|&j| h(lambda[j], d)).product::<f64>()).sum();
                    let mu = if block.len() % 2 == 1 { 1.0 } else { -1.0 } * factorial(block.len() - 1);
                    term *= mu * s;
                }
                distinct += term;
            }
            inner += distinct;
        }
        total += factorial(r) / (2f64.powi(m as i32) * factorial(m)) * inner;
    }
    // Tail: |E[(A+B)^r] - E[A^r]| ≤ (a+b)^r - a^r with a, b sup-norm masses.
    let a: f64 = (1..=d_max).map(|d| pi[d] * per_prime[d].0).sum();
    let x = qf.powi(-(d_max as i32 + 1));
    let b = x / ((d_max as f64 + 1.0) * (1.0 - 1.0 / qf) * (1.0 - 1.0 / (qf * qf)));
    let tail = (a + b).powi(r as i32) - a.powi(r as i32);
    Truncated { value: total, tail: tail.max(r as f64 * a.powi(r as i32 - 1) * b) }
}

/// H(r) truncated at degree bound D, with its certified tail.
pub fn moment_h(q: u64, r: usize, d_max: usize, form: HForm, weight: SquareWeight) -> Result<Truncated> {
    check_q(q)?;
    if r == 0 || r > R_MAX {
        return Err(Error::Invalid(format!("moment order {r} outside 1..={R_MAX}")));
    }
    if d_max == 0 {
        return Err(Error::Invalid("degree bound must be >= 1".into()));
    }
    let t = match form {
        HForm::SquareTuples => h_square_tuples(q, r, d_max, weight),
        HForm::DistinctPrimes => h_distinct_primes(q, r, d_max),
    };
    Ok(Truncated { value: t.value, tail: t.tail + ROUNDING_ALLOWANCE * t.value.abs() })
}

/// Leading term of H(r) as q grows: r!/(2^{r/2}(r/2)!)·q^{-3r/2} for even r, zero for odd r.
pub fn moment_h_leading(q: u64, r: usize) -> f64 {
    if r % 2 == 1 {
        return 0.0;
    }
    let h = r / 2;
    factorial(r) / (2f64.powi(h as i32) * factorial(h)) * (q as f64).powf(-1.5 * r as f64)
}

/// e^{iθ} - 1 without cancellation for small θ.
fn expi_m1(theta: f64) -> Complex64 {
    let s = (theta / 2.0).sin();
    Complex64::new(-2.0 * s * s, theta.sin())
}

/// The characteristic function truncated to primes of degree ≤ D and to
/// products of at most `r_max` distinct primes.
pub fn char_fn_phi(q: u64, tau: f64, d_max: usize, r_max: usize) -> Result<Complex64> {
    check_q(q)?;
    let qf = q as f64;
    let pi = prime_counts(q, d_max);
    let g: Vec<Complex64> = (0..=d_max)
        .map(|d| {
            if d == 0 {
                return Complex64::new(0.0, 0.0);
            }
            let (u, v, _) = uv(qf, d);
            (expi_m1(tau * u) + expi_m1(-tau * v)) / (1.0 + qf.powi(-(d as i32)))
        })
        .collect();
    // Power sums over primes, then elementary symmetric functions by Newton.
    let p: Vec<Complex64> =
        (0..=r_max).map(|k| (1..=d_max).map(|d| g[d].powu(k as u32) * pi[d]).sum::<Complex64>()).collect();
    let mut e = vec![Complex64::new(1.0, 0.0)];
    for k in 1..=r_max {
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 1..=k {
            let sign = if i % 2 == 1 { 1.0 } else { -1.0 };
            acc += e[k - i] * p[i] * sign;
        }
        e.push(acc / k as f64);
    }
    Ok((1..=r_max).fold(Complex64::new(1.0, 0.0), |acc, r| acc + e[r] / 2f64.powi(r as i32)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partitions_are_bell_numbers() {
        let bell = [1, 1, 2, 5, 15, 52, 203];
        for (n, &b) in bell.iter().enumerate() {
            assert_eq!(partition_block_sizes(n).len(), b);
            assert_eq!(set_partitions(n).len(), b);
        }
    }

    #[test]
    fn even_exponent_sum_small() {
        // b = 2, kmax = 2: pairs (1,1), (2,2) have even sums.
        let x: f64 = 0.1;
        let want = x * x + (x * x / 2.0).powi(2);
        assert!((even_exponent_sum(x, 2, 2) - want).abs() < 1e-15);
        // b = 1: only even exponents.
        assert!((even_exponent_sum(x, 3, 1) - x * x / 2.0).abs() < 1e-15);
    }

    #[test]
    fn phi_is_one_at_zero() {
        let z = char_fn_phi(5, 0.0, 8, 6).unwrap();
        assert_eq!(z, Complex64::new(1.0, 0.0));
    }

    #[test]
    fn rejects_bad_orders() {
        assert!(moment_h(5, 0, 12, HForm::SquareTuples, SquareWeight::Reciprocal).is_err());
        assert!(moment_h(5, 7, 12, HForm::DistinctPrimes, SquareWeight::Reciprocal).is_err());
    }
}
