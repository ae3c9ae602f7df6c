use census_core::poly::count_irreducibles;
use census_core::theory::{char_fn_phi, moment_h, moment_h_leading, HForm, SquareWeight, ROUNDING_ALLOWANCE};
use num_traits::ToPrimitive;

fn h(q: u64, r: usize, d: usize) -> census_core::theory::Truncated {
    moment_h(q, r, d, HForm::DistinctPrimes, SquareWeight::Reciprocal).unwrap()
}

/// H(1) summed directly: only even powers P^{2j} contribute, each with the
/// squarefree-family average |P|/(|P|+1) of (F/P^{2j}) and weight
/// Λ/(m q^{2m}) at m = 2j·deg P.
fn h1_direct(q: u64, max_m: usize) -> f64 {
    let qf = q as f64;
    let mut total = 0.0;
    for d in 1..=max_m / 2 {
        let pi = count_irreducibles(q, d).to_f64().unwrap();
        let norm = qf.powi(d as i32);
        let mut k = 2;
        while d * k <= max_m {
            let m = (d * k) as i32;
            total += pi * d as f64 / m as f64 * qf.powi(-2 * m) * norm / (norm + 1.0);
            k += 2;
        }
    }
    total
}

#[test]
fn first_moment_by_direct_summation() {
    for q in [3u64, 5, 7, 9] {
        let t = h(q, 1, 12);
        let direct = h1_direct(q, 40);
        assert!((t.value - direct).abs() <= t.tail + 1e-15, "q={q}: {} vs {direct}", t.value);
    }
}

#[test]
fn forms_agree_within_tails() {
    for q in [3u64, 5, 7] {
        for r in 1..=3 {
            let a = moment_h(q, r, 10, HForm::SquareTuples, SquareWeight::Reciprocal).unwrap();
            let b = moment_h(q, r, 10, HForm::DistinctPrimes, SquareWeight::Reciprocal).unwrap();
            assert!((a.value - b.value).abs() <= a.tail + b.tail, "q={q} r={r}");
        }
    }
}

#[test]
fn literal_weight_is_a_different_number() {
    let lit = moment_h(3, 1, 12, HForm::SquareTuples, SquareWeight::Literal).unwrap();
    let rec = moment_h(3, 1, 12, HForm::SquareTuples, SquareWeight::Reciprocal).unwrap();
    assert!((lit.value - rec.value).abs() > 10.0 * (lit.tail + rec.tail));
}

#[test]
fn truncations_nest() {
    for q in [3u64, 5] {
        for r in 1..=4 {
            let lo = h(q, r, 8);
            let hi = h(q, r, 12);
            assert!(hi.tail <= lo.tail);
            assert!((hi.value - lo.value).abs() <= lo.tail + hi.tail, "q={q} r={r}");
        }
    }
}

#[test]
fn tails_include_the_rounding_allowance() {
    let t = h(5, 2, 12);
    assert!(t.tail >= ROUNDING_ALLOWANCE * t.value.abs());
    assert!(t.tail < 1e-6);
}

#[test]
fn large_q_behaviour() {
    let mut last = f64::INFINITY;
    for q in [9u64, 13, 25, 49] {
        let h2 = h(q, 2, 12).value;
        let err = (h2 / moment_h_leading(q, 2) - 1.0).abs();
        assert!(err < last, "relative error should shrink with q");
        last = err;
        let h1 = h(q, 1, 12).value;
        assert!(h1 * (q as f64).powi(3) < 1.0);
        assert_eq!(moment_h_leading(q, 3), 0.0);
    }
}

#[test]
fn moments_are_positive_where_they_must_be() {
    for q in [3u64, 5, 7] {
        assert!(h(q, 2, 12).value > 0.0);
        assert!(h(q, 4, 12).value > 0.0);
    }
}

#[test]
fn bad_arguments() {
    assert!(moment_h(3, 0, 12, HForm::DistinctPrimes, SquareWeight::Reciprocal).is_err());
    assert!(moment_h(3, 7, 12, HForm::DistinctPrimes, SquareWeight::Reciprocal).is_err());
    assert!(moment_h(3, 2, 0, HForm::DistinctPrimes, SquareWeight::Reciprocal).is_err());
    assert!(moment_h(4, 2, 12, HForm::DistinctPrimes, SquareWeight::Reciprocal).is_err());
    assert!(char_fn_phi(6, 1.0, 12, 4).is_err());
}

#[test]
fn characteristic_function_symmetries() {
    for q in [3u64, 5, 9] {
        let one = char_fn_phi(q, 0.0, 12, 6).unwrap();
        assert!((one.re - 1.0).abs() < 1e-15 && one.im.abs() < 1e-15);
        for tau in [0.3, 1.0, 5.0, 40.0] {
            let a = char_fn_phi(q, tau, 12, 6).unwrap();
            let b = char_fn_phi(q, -tau, 12, 6).unwrap();
            assert!((a - b.conj()).norm() < 1e-13, "q={q} τ={tau}");
        }
    }
}

#[test]
fn characteristic_function_taylor_coefficients() {
    // φ(τ) = 1 + iτ H(1) - τ² H(2)/2 + O(τ³).
    for q in [3u64, 5] {
        let step = 1e-3;
        let plus = char_fn_phi(q, step, 12, 6).unwrap();
        let minus = char_fn_phi(q, -step, 12, 6).unwrap();
        let first = (plus - minus) / (2.0 * step);
        let second = (plus + minus - 2.0) / (step * step);
        let h1 = h(q, 1, 12).value;
        let h2 = h(q, 2, 12).value;
        assert!((first.im - h1).abs() < 1e-6 * h1.max(1e-3), "q={q}: φ'(0) = {first}, H(1) = {h1}");
        assert!((second.re + h2).abs() < 1e-5 * h2, "q={q}: φ''(0) = {second}, H(2) = {h2}");
    }
}

#[test]
fn characteristic_function_is_bounded() {
    for tau in [0.5, 2.0, 10.0, 100.0] {
        assert!(char_fn_phi(5, tau, 12, 6).unwrap().norm() <= 1.0 + 1e-9);
    }
}
