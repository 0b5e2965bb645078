//! Exact verification of the alternating binomial identities and sign
//! claims that the closed-form bounds rest on.
//!
//! Integer identities are swept in arbitrary precision and must hold with
//! zero violation; real-valued claims (sign patterns, CDF monotonicity,
//! convexity) are swept numerically with explicit tolerances.  Throughout,
//! binomial coefficients follow the zero convention: `C(a,b) = 0` whenever
//! `a < 0`, `b < 0`, or `b > a`.  That convention is load-bearing for the
//! activation-series formulas, and under it the `n = 0` corner of the
//! partial-row identity degenerates, so all sweeps start at `n = 1`.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::bounds::{girth_sum, girth_summand, poisson_cdf};
use crate::clock::{
    activation_series, activation_series_at_count, activation_series_closed, exp_kernel,
    series_polynomial,
};

const E: f64 = std::f64::consts::E;

/// Outcome of one swept claim.
#[derive(Clone, Debug, serde::Serialize)]
pub struct IdentityReport {
    /// Stable identifier of the claim.
    pub claim: String,
    /// Human-readable description of the swept parameter range.
    pub range: String,
    /// Worst violation seen: exactly 0 for integer identities; for real
    /// claims, how far the worst case strayed past the tolerance.
    pub max_violation: f64,
    pub pass: bool,
}

impl IdentityReport {
    fn integer(claim: &str, range: String, violation: &BigInt) -> IdentityReport {
        let v = violation.abs().to_f64().unwrap_or(f64::INFINITY);
        IdentityReport {
            claim: claim.to_string(),
            range,
            max_violation: v,
            pass: violation.is_zero(),
        }
    }

    fn real(claim: &str, range: String, violation: f64) -> IdentityReport {
        IdentityReport {
            claim: claim.to_string(),
            range,
            max_violation: violation,
            pass: violation <= 1e-9,
        }
    }
}

/// `C(a, b)` in arbitrary precision with the zero convention.
fn choose_big(a: i64, b: i64) -> BigInt {
    if a < 0 || b < 0 || b > a {
        return BigInt::ZERO;
    }
    let b = b.min(a - b);
    let mut acc = BigInt::from(1);
    for i in 0..b {
        // Exact at every step: the running value is C(a, i+1)·(i+1)!/(i+1)!.
        acc = acc * BigInt::from(a - i) / BigInt::from(i + 1);
    }
    acc
}

fn sign_big(exp: i64) -> BigInt {
    if exp.rem_euclid(2) == 0 {
        BigInt::from(1)
    } else {
        BigInt::from(-1)
    }
}

/// Partial alternating row sums: `Σ_{k=0}^{ℓ} (−1)^k C(n,k) = (−1)^ℓ C(n−1,ℓ)`
/// for `1 ≤ n ≤ n_max`, `0 ≤ ℓ ≤ n`.
pub fn check_binom_single(n_max: u32) -> IdentityReport {
    let mut worst = BigInt::ZERO;
    for n in 1..=(n_max as i64) {
        for ell in 0..=n {
            let mut lhs = BigInt::ZERO;
            for k in 0..=ell {
                lhs += sign_big(k) * choose_big(n, k);
            }
            let rhs = sign_big(ell) * choose_big(n - 1, ell);
            let diff = (lhs - rhs).abs();
            if diff > worst {
                worst = diff;
            }
        }
    }
    IdentityReport::integer(
        "partial-alternating-row",
        format!("1 ≤ n ≤ {n_max}, 0 ≤ ℓ ≤ n"),
        &worst,
    )
}

/// All six alternating-sum identities, exact over `1 ≤ n ≤ n_max`.
pub fn check_binom_suite(n_max: u32) -> Vec<IdentityReport> {
    let n_max_i = n_max as i64;
    let mut reports = vec![check_binom_single(n_max)];

    // Σ_{k=0}^{n} (−1)^{k−1−j} C(n,k) C(k−1,j) = 1 for 0 ≤ j < n.
    let mut worst = BigInt::ZERO;
    for n in 1..=n_max_i {
        for j in 0..n {
            let mut lhs = BigInt::ZERO;
            for k in 0..=n {
                lhs += sign_big(k - 1 - j) * choose_big(n, k) * choose_big(k - 1, j);
            }
            let diff = (lhs - BigInt::from(1)).abs();
            if diff > worst {
                worst = diff;
            }
        }
    }
    reports.push(IdentityReport::integer(
        "unit-telescoping-sum",
        format!("1 ≤ n ≤ {n_max}, 0 ≤ j < n"),
        &worst,
    ));

    // Σ_{i=0}^{j} (−1)^i C(n,i) C(n−i,j−i) = 0 for 0 < j ≤ n.
    let mut worst = BigInt::ZERO;
    for n in 1..=n_max_i {
        for j in 1..=n {
            let mut lhs = BigInt::ZERO;
            for i in 0..=j {
                lhs += sign_big(i) * choose_big(n, i) * choose_big(n - i, j - i);
            }
            if lhs.abs() > worst {
                worst = lhs.abs();
            }
        }
    }
    reports.push(IdentityReport::integer(
        "vandermonde-cancellation",
        format!("1 ≤ n ≤ {n_max}, 0 < j ≤ n"),
        &worst,
    ));

    // Σ_{i=0}^{j} (−1)^i C(n−k,i) C(n−i,j−i) = C(k,j) for 0 ≤ j ≤ k ≤ n.
    let mut worst = BigInt::ZERO;
    for n in 1..=n_max_i {
        for k in 0..=n {
            for j in 0..=k {
                let mut lhs = BigInt::ZERO;
                for i in 0..=j {
                    lhs += sign_big(i) * choose_big(n - k, i) * choose_big(n - i, j - i);
                }
                let diff = (lhs - choose_big(k, j)).abs();
                if diff > worst {
                    worst = diff;
                }
            }
        }
    }
    reports.push(IdentityReport::integer(
        "restricted-count",
        format!("1 ≤ n ≤ {n_max}, 0 ≤ j ≤ k ≤ n"),
        &worst,
    ));

    // Σ_{i=0}^{j} (−1)^i C(n,i) C(n−1−i,j−i) = (−1)^j for 0 ≤ j ≤ n−1.
    let mut worst = BigInt::ZERO;
    for n in 1..=n_max_i {
        for j in 0..n {
            let mut lhs = BigInt::ZERO;
            for i in 0..=j {
                lhs += sign_big(i) * choose_big(n, i) * choose_big(n - 1 - i, j - i);
            }
            let diff = (lhs - sign_big(j)).abs();
            if diff > worst {
                worst = diff;
            }
        }
    }
    reports.push(IdentityReport::integer(
        "shift-one-alternating",
        format!("1 ≤ n ≤ {n_max}, 0 ≤ j ≤ n−1"),
        &worst,
    ));

    // Σ_{i=0}^{j} (−1)^i C(n,i) C(n−2−i,j−i) = (−1)^j (j+1) for 0 ≤ j ≤ n−2.
    let mut worst = BigInt::ZERO;
    for n in 2..=n_max_i {
        for j in 0..=(n - 2) {
            let mut lhs = BigInt::ZERO;
            for i in 0..=j {
                lhs += sign_big(i) * choose_big(n, i) * choose_big(n - 2 - i, j - i);
            }
            let diff = (lhs - sign_big(j) * BigInt::from(j + 1)).abs();
            if diff > worst {
                worst = diff;
            }
        }
    }
    reports.push(IdentityReport::integer(
        "shift-two-alternating",
        format!("2 ≤ n ≤ {n_max}, 0 ≤ j ≤ n−2"),
        &worst,
    ));

    reports
}

/// Numeric sweeps of the sign and monotonicity claims: the bound-summand
/// sign pattern, positivity of the weighted summand sum, the diagonal
/// Poisson-CDF decrease, and the CDF derivative/convexity facts.
pub fn check_sign_claims(lambda_max: u32) -> Vec<IdentityReport> {
    let mut reports = Vec::new();
    let xis = [(E - 1.0) / E, 1.0, 2.0];

    // Summand positive for 1 ≤ i ≤ ((e−2)/(e−1))λ + 1, any ξ > 1/(e−1).
    let mut breach = 0.0f64;
    let cutoff_slope = (E - 2.0) / (E - 1.0);
    for &xi in &xis {
        for lambda in 1..=lambda_max {
            let hi = (cutoff_slope * lambda as f64 + 1.0).floor() as u32;
            for i in 1..=hi.min(lambda) {
                let v = girth_summand(xi, lambda, i).unwrap();
                breach = breach.max(1e-12 - v);
            }
        }
    }
    reports.push(IdentityReport::real(
        "summand-positive-low-index",
        format!("ξ ∈ {{(e−1)/e, 1, 2}}, λ ≤ {lambda_max}, i ≤ (e−2)/(e−1)·λ+1"),
        breach.max(0.0),
    ));

    // Once the summand is ≤ 0 it stays strictly negative.
    let mut breach = 0.0f64;
    for &xi in &xis {
        for lambda in 1..=lambda_max {
            let mut triggered = false;
            for i in 1..=lambda {
                let v = girth_summand(xi, lambda, i).unwrap();
                if triggered {
                    breach = breach.max(v + 1e-12);
                }
                if v <= 0.0 {
                    triggered = true;
                }
            }
        }
    }
    reports.push(IdentityReport::real(
        "summand-stays-negative",
        format!("ξ ∈ {{(e−1)/e, 1, 2}}, λ ≤ {lambda_max}"),
        breach.max(0.0),
    ));

    // Σ_{i<ℓ} (ℓ−i)·summand(1,λ,i) > 0 for λ ≥ ℓ ≥ 2 (at ℓ = 1 the single
    // i = 0 term vanishes identically, so strictness starts at ℓ = 2).
    let mut breach = 0.0f64;
    for lambda in 2..=lambda_max {
        for ell in 2..=lambda {
            let v = girth_sum(lambda, ell + 1).unwrap();
            breach = breach.max(1e-12 - v);
        }
    }
    reports.push(IdentityReport::real(
        "weighted-summand-sum-positive",
        format!("2 ≤ ℓ ≤ λ ≤ {lambda_max}"),
        breach.max(0.0),
    ));

    // Pr(Poi(λ+1) ≤ λ+1) ≤ Pr(Poi(λ) ≤ λ).
    let mut breach = 0.0f64;
    for lambda in 1..=lambda_max {
        let a = poisson_cdf(lambda + 1, (lambda + 1) as f64);
        let b = poisson_cdf(lambda, lambda as f64);
        breach = breach.max(a - b);
    }
    reports.push(IdentityReport::real(
        "poisson-diagonal-decreasing",
        format!("1 ≤ λ ≤ {lambda_max}"),
        breach.max(0.0),
    ));

    // CDF derivative −e^{−x}x^k/k! (via central differences) and convexity
    // past x = k.
    let mut violation = 0.0f64;
    for k in 0..=8u32 {
        let mut x = 0.25f64;
        while x <= 30.0 {
            let h = 1e-5;
            let fd = (poisson_cdf(k, x + h) - poisson_cdf(k, x - h)) / (2.0 * h);
            let mut pmf = (-x).exp();
            for i in 0..k {
                pmf *= x / (i + 1) as f64;
            }
            violation = violation.max((fd + pmf).abs());
            if x > k as f64 {
                let h = 1e-3;
                let dd = poisson_cdf(k, x + h) - 2.0 * poisson_cdf(k, x) + poisson_cdf(k, x - h);
                violation = violation.max(-dd);
            }
            x += 0.25;
        }
    }
    reports.push(IdentityReport::real(
        "poisson-cdf-derivative-convexity",
        "k ≤ 8, 0.25 ≤ x ≤ 30".to_string(),
        violation,
    ));

    reports
}

// The count-pair reduction of the activation series at an integral point
// with λ ones out of n: Σ_{i,j} C(λ,i) C(n−λ,j) (−1)^{i+j+ℓ−n}
// C(i+j−1, n−ℓ) ρ(i−1).
fn activation_series_count_pair(n: u32, lambda: u32, ell: u32) -> f64 {
    let mut sum = 0.0f64;
    for i in 0..=lambda {
        let rho = exp_kernel(i as f64 - 1.0);
        for j in 0..=(n - lambda) {
            let c = choose_big(i as i64 + j as i64 - 1, n as i64 - ell as i64)
                .to_f64()
                .unwrap();
            if c == 0.0 {
                continue;
            }
            let term = choose_big(lambda as i64, i as i64).to_f64().unwrap()
                * choose_big((n - lambda) as i64, j as i64).to_f64().unwrap()
                * c
                * rho;
            sum += if (i + j + ell + n).is_multiple_of(2) {
                term
            } else {
                -term
            };
        }
    }
    sum
}

/// Re-derives the activation-series reduction chain numerically: the
/// subset sum at an integral point, its count-pair rearrangement, the
/// count-indexed form, the closed form, and the polynomial evaluation at
/// `e` must all agree within 1e−8 for `n ≤ n_max`, `λ ≤ 12`, `ℓ ≤ λ`.
pub fn check_simplification_chain(n_max: u32) -> IdentityReport {
    let mut worst = 0.0f64;
    for n in 2..=n_max {
        for lambda in 1..=n.min(12) {
            for ell in 1..=lambda {
                let x: Vec<f64> = (0..n).map(|i| if i < lambda { 1.0 } else { 0.0 }).collect();
                let subset = activation_series(&x, ell).unwrap();
                let pair = activation_series_count_pair(n, lambda, ell);
                let count = activation_series_at_count(lambda, ell).unwrap();
                worst = worst.max((subset - pair).abs()).max((pair - count).abs());
                if lambda > ell {
                    let closed = activation_series_closed(lambda, ell).unwrap();
                    worst = worst.max((count - closed).abs());
                    let w = series_polynomial(lambda, ell).unwrap();
                    let at_e: f64 = w
                        .iter()
                        .enumerate()
                        .map(|(i, &c)| c as f64 * E.powi(i as i32))
                        .sum();
                    let via_poly = (-(ell as f64) + (1.0 - lambda as f64).exp() * at_e)
                        / (lambda - ell) as f64;
                    worst = worst.max((closed - via_poly).abs());
                }
            }
        }
    }
    IdentityReport {
        claim: "count-form-reduction-chain".to_string(),
        range: format!("2 ≤ n ≤ {n_max}, λ ≤ min(n,12), ℓ ≤ λ"),
        max_violation: worst,
        pass: worst <= 1e-8,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spot_values_of_the_identities() {
        // Partial row: n=5, ℓ=2 → 1−5+10 = 6 = C(4,2).
        let lhs: i64 = [1i64, -5, 10].iter().sum();
        assert_eq!(lhs, 6);
        assert_eq!(choose_big(4, 2).to_f64().unwrap(), 6.0);
        // Shift-one: n=6, j=3 → (−1)³ = −1.
        let mut s = BigInt::ZERO;
        for i in 0..=3i64 {
            s += sign_big(i) * choose_big(6, i) * choose_big(5 - i, 3 - i);
        }
        assert_eq!(s, BigInt::from(-1));
        // Shift-two base: j=0 → 1 (any n ≥ 2).
        assert_eq!(choose_big(7, 0) * choose_big(5, 0), BigInt::from(1));
        // Restricted-count corners: j=k and j=0 give 1.
        for (n, k) in [(6i64, 4i64), (9, 2)] {
            let mut s = BigInt::ZERO;
            for i in 0..=k {
                s += sign_big(i) * choose_big(n - k, i) * choose_big(n - i, k - i);
            }
            assert_eq!(s, BigInt::from(1), "j=k case n={n} k={k}");
        }
    }

    #[test]
    fn sign_claim_spot_values() {
        // ξ = (e−1)/e, λ = 10, i = 3 is inside the positive range.
        let v = girth_summand((E - 1.0) / E, 10, 3).unwrap();
        assert!(v > 0.0, "got {v}");
        // Diagonal CDF decrease at λ = 4.
        assert!(poisson_cdf(5, 5.0) <= poisson_cdf(4, 4.0));
    }

    #[test]
    fn zero_convention_on_binomials() {
        assert!(choose_big(-1, 0).is_zero());
        assert!(choose_big(3, -1).is_zero());
        assert!(choose_big(2, 5).is_zero());
        assert_eq!(choose_big(0, 0), BigInt::from(1));
    }

    #[test]
    fn integer_suite_passes_exactly() {
        for report in check_binom_suite(20) {
            assert!(
                report.pass,
                "{}: violation {}",
                report.claim, report.max_violation
            );
            assert_eq!(report.max_violation, 0.0, "{}", report.claim);
        }
    }

    #[test]
    fn sign_claims_pass() {
        for report in check_sign_claims(50) {
            assert!(
                report.pass,
                "{}: violation {}",
                report.claim, report.max_violation
            );
        }
    }

    #[test]
    fn simplification_chain_tight() {
        let report = check_simplification_chain(10);
        assert!(report.pass, "violation {}", report.max_violation);
        assert!(report.max_violation < 1e-8);
    }
}
