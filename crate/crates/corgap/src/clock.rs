//! Poisson-clock machinery behind the rank/girth lower bound.
//!
//! Each element carries an independent Poisson clock of rate `x_i` on the
//! time window `[0,1]`; `Q(t)` is the set of elements whose clock has rung
//! by time `t`, and the *activation time* `T` is the first moment
//! `|Q(t)|` reaches a threshold `ℓ`.  The expected rank surplus collected
//! after activation is controlled by the activation series
//!
//! ```text
//! ψ(x) = Σ_S (−1)^{|S|+ℓ−n} · C(|S|−1, n−ℓ) · ρ(x(S)−1),
//! ```
//!
//! with `ρ(t) = (1−e^{−t})/t` the exponential kernel.  This module
//! evaluates ψ by three independent routes (subset sum, a count-indexed
//! reduction, and a closed form), simulates the clock process, checks the
//! resulting expectation bound by Monte Carlo, and rounds fractional
//! points by pipage steps along directions in which ψ is concave.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bounds::binomial_f64;
use crate::error::{Error, Result};
use crate::matroid::{Girth, Matroid, Subset};

/// Budget for the subset-sum evaluation of ψ and forward differences.
pub const SERIES_BUDGET: usize = 20;

/// Budget on the number of enumerated small subsets in [`activation_cdf`].
pub const CDF_TERM_BUDGET: u64 = 2_000_000;

const E: f64 = std::f64::consts::E;

/// The exponential kernel `ρ(t) = (1−e^{−t})/t`, extended by `ρ(0) = 1`.
///
/// Below `|t| < 1e−3` the closed form loses digits to cancellation, so a
/// 10-term Maclaurin series is used instead.
pub fn exp_kernel(t: f64) -> f64 {
    exp_kernel_deriv(0, t)
}

/// `k`-th derivative of the exponential kernel:
/// `ρ^{(k)}(t) = (−1)^k k! · Pr(Poi(t) > k) / t^{k+1}`, with
/// `ρ^{(k)}(0) = (−1)^k/(k+1)`.
///
/// The Poisson-tail form is a sum of positive terms, so no cancellation
/// occurs even where `1 − e^{−t}Σ t^i/i!` would collapse; below
/// `|t| < 1e−3` the Maclaurin series `Σ_m (−1)^{m+k} t^m / (m!·(m+k+1))`
/// takes over.  Signs alternate with `k`: positive for even `k`, negative
/// for odd.
pub fn exp_kernel_deriv(k: u32, t: f64) -> f64 {
    let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
    if t.abs() < 1e-3 {
        // 10-term Maclaurin series of ρ^{(k)} around 0.
        let mut sum = 0.0f64;
        let mut m_fact = 1.0f64;
        let mut t_pow = 1.0f64;
        for m in 0..10u32 {
            if m > 0 {
                m_fact *= m as f64;
                t_pow *= t;
            }
            let term = t_pow / (m_fact * (m + k + 1) as f64);
            sum += if m.is_multiple_of(2) { term } else { -term };
        }
        return sign * sum;
    }
    // Upper Poisson tail beyond k, all-positive accumulation.
    let mut term = (-t).exp();
    for i in 1..=(k + 1) {
        term *= t / i as f64;
    }
    let mut tail = 0.0f64;
    let mut i = k + 1;
    loop {
        tail += term;
        i += 1;
        term *= t / i as f64;
        if term < tail * 1e-18 && i > t as u32 + k {
            break;
        }
    }
    // k!/t^{k+1} assembled factor-by-factor to dodge overflow.
    let mut factor = 1.0 / t;
    for i in 1..=k {
        factor *= i as f64 / t;
    }
    sign * factor * tail
}

/// Iterated forward difference `Σ_{S⊆[n]} (−1)^{n−|S|} φ(t + x(S))` for a
/// vector of nonnegative steps `x` (capacity `|x| ≤ 20`).
pub fn forward_difference(phi: impl Fn(f64) -> f64, x: &[f64], t: f64) -> Result<f64> {
    let n = x.len();
    if n > SERIES_BUDGET {
        return Err(Error::capacity(format!(
            "forward difference needs at most {SERIES_BUDGET} steps, got {n}"
        )));
    }
    if x.iter().any(|&v| !v.is_finite() || v < 0.0) {
        return Err(Error::input("forward-difference steps must be nonnegative"));
    }
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for mask in 0u32..(1u32 << n) {
        let shift: f64 = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| x[i]).sum();
        let term = phi(t + shift);
        let signed = if (n as u32 - mask.count_ones()).is_multiple_of(2) {
            term
        } else {
            -term
        };
        let y = signed - comp;
        let s = sum + y;
        comp = (s - sum) - y;
        sum = s;
    }
    Ok(sum)
}

// C(a, b) with the zero convention for a < 0, b < 0, or b > a; this is what
// makes only subsets of size ≥ n+1−ℓ contribute to the activation series.
fn choose_i64(a: i64, b: i64) -> i64 {
    if a < 0 || b < 0 || b > a {
        return 0;
    }
    let b = b.min(a - b);
    let mut acc = 1i64;
    for i in 0..b {
        acc = acc * (a - i) / (i + 1);
    }
    acc
}

fn choose_u128(n: u32, k: u32) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc = 1u128;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Activation series `ψ(x)` by direct subset summation (`n ≤ 20`).
///
/// Only subsets with `|S| ≥ n+1−ℓ` contribute; for those, `x(S) ≥ 1`
/// whenever `x(E) ≥ ℓ`, which is the intended domain (the kernel extends
/// smoothly below it, so no cube check is imposed — the directional
/// stencils need evaluations slightly outside).
pub fn activation_series(x: &[f64], ell: u32) -> Result<f64> {
    let n = x.len();
    if n > SERIES_BUDGET {
        return Err(Error::capacity(format!(
            "activation series needs n ≤ {SERIES_BUDGET}, got {n}"
        )));
    }
    if ell < 1 || ell as usize > n {
        return Err(Error::input(format!(
            "activation threshold {ell} outside 1..={n}"
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::input("activation series needs finite coordinates"));
    }
    // Binomial row C(s−1, n−ℓ), indexed by subset size s.
    let coeff: Vec<f64> = (0..=n)
        .map(|s| choose_i64(s as i64 - 1, n as i64 - ell as i64) as f64)
        .collect();
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for mask in 0u32..(1u32 << n) {
        let s = mask.count_ones() as usize;
        if coeff[s] == 0.0 {
            continue;
        }
        let xs: f64 = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| x[i]).sum();
        let term = coeff[s] * exp_kernel(xs - 1.0);
        let signed = if (s + ell as usize + n).is_multiple_of(2) {
            term
        } else {
            -term
        };
        let y = signed - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    Ok(sum)
}

/// ψ at an integral point with `λ` ones, reduced to a count-indexed sum:
/// `Σ_{i=0}^{ℓ−1} (−1)^{ℓ−i} C(λ,i) C(λ−i−1, ℓ−i−1) ρ(λ−i−1)`
/// (valid for `λ ≥ ℓ ≥ 1`).
pub fn activation_series_at_count(lambda: u32, ell: u32) -> Result<f64> {
    if ell < 1 || lambda < ell {
        return Err(Error::input(format!(
            "count form needs λ ≥ ℓ ≥ 1, got λ = {lambda}, ℓ = {ell}"
        )));
    }
    if lambda > 60 {
        return Err(Error::capacity("count form supports λ ≤ 60"));
    }
    let mut sum = 0.0f64;
    for i in 0..ell {
        let term = binomial_f64(lambda, i)
            * binomial_f64(lambda - i - 1, ell - i - 1)
            * exp_kernel((lambda - i - 1) as f64);
        sum += if (ell - i).is_multiple_of(2) {
            term
        } else {
            -term
        };
    }
    Ok(sum)
}

/// ψ at an integral point with `λ` ones, in closed form (needs `λ > ℓ`):
/// `[−ℓ + e^{1−λ} Σ_{i=0}^{ℓ−1} C(λ,i)(ℓ−i)(e−1)^i] / (λ−ℓ)`.
pub fn activation_series_closed(lambda: u32, ell: u32) -> Result<f64> {
    if ell < 1 || lambda <= ell {
        return Err(Error::input(format!(
            "closed form needs λ > ℓ ≥ 1, got λ = {lambda}, ℓ = {ell}"
        )));
    }
    if lambda > 60 {
        return Err(Error::capacity("closed form supports λ ≤ 60"));
    }
    let mut inner = 0.0f64;
    for i in 0..ell {
        inner += binomial_f64(lambda, i) * (ell - i) as f64 * (E - 1.0).powi(i as i32);
    }
    Ok((-(ell as f64) + (1.0 - lambda as f64).exp() * inner) / (lambda - ell) as f64)
}

/// Coefficients (constant term first) of the count-form polynomial
/// `w_{λ,ℓ}(x) = Σ_{i=0}^{ℓ−1} (−1)^{ℓ−1−i} C(λ,i) C(λ−2−i, ℓ−1−i) x^i`
/// as exact integers (needs `λ > ℓ ≥ 1`, `λ ≤ 40`).
///
/// Satisfies `w(1) = ℓ` and `w' = λ·w_{λ−1,ℓ−1}`; evaluating at `x = e`
/// recovers the closed form of the activation series.
pub fn series_polynomial(lambda: u32, ell: u32) -> Result<Vec<i128>> {
    if ell < 1 || lambda <= ell {
        return Err(Error::input(format!(
            "polynomial needs λ > ℓ ≥ 1, got λ = {lambda}, ℓ = {ell}"
        )));
    }
    if lambda > 40 {
        return Err(Error::capacity("polynomial supports λ ≤ 40"));
    }
    Ok((0..ell)
        .map(|i| {
            let mag = (choose_u128(lambda, i) * choose_u128(lambda - 2 - i, ell - 1 - i)) as i128;
            if (ell - 1 - i).is_multiple_of(2) {
                mag
            } else {
                -mag
            }
        })
        .collect())
}

/// CDF of the activation time: `Pr(T ≤ t)` for independent rate-`x_i`
/// clocks and threshold `ℓ`, by enumerating the subsets of size `< ℓ`
/// that can still be "rung" at time `t`:
///
/// `1 − Σ_{|S|<ℓ} Π_{i∈S}(1−e^{−x_i t}) Π_{i∉S} e^{−x_i t}`.
///
/// The enumeration is over `Σ_{j<ℓ} C(n,j)` subsets (capacity-checked),
/// never the full lattice, and every summand is a nonnegative product —
/// no alternating cancellation on the production path.
pub fn activation_cdf(x: &[f64], ell: u32, t: f64) -> Result<f64> {
    let n = x.len();
    if ell < 1 || ell as usize > n {
        return Err(Error::input(format!(
            "activation threshold {ell} outside 1..={n}"
        )));
    }
    if !t.is_finite() || t < 0.0 {
        return Err(Error::input(format!("activation CDF needs t ≥ 0, got {t}")));
    }
    let mut terms = 0u64;
    for j in 0..ell {
        terms = terms.saturating_add(binomial_f64(n as u32, j).min(u64::MAX as f64) as u64);
        if terms > CDF_TERM_BUDGET {
            return Err(Error::capacity(format!(
                "activation CDF enumeration exceeds {CDF_TERM_BUDGET} subsets"
            )));
        }
    }
    let ring: Vec<f64> = x.iter().map(|&xi| -(-xi * t).exp_m1()).collect();
    let silent: Vec<f64> = x.iter().map(|&xi| (-xi * t).exp()).collect();
    let mut below = 0.0f64;
    // DFS over elements, branching "rung" only while the subset stays < ℓ.
    let mut stack: Vec<(usize, u32, f64)> = vec![(0, 0, 1.0)];
    while let Some((i, size, prod)) = stack.pop() {
        if i == n {
            below += prod;
            continue;
        }
        stack.push((i + 1, size, prod * silent[i]));
        if size + 1 < ell {
            // Ringing element i keeps |S| ≤ ℓ−1 reachable.
            stack.push((i + 1, size + 1, prod * ring[i]));
        }
    }
    Ok((1.0 - below).clamp(0.0, 1.0))
}

/// The full-lattice alternating form of the activation CDF,
/// `1 − Σ_S (−1)^{|S|+ℓ−n−1} C(|S|−1, n−ℓ) e^{−x(S)·t}` (`n ≤ 20`);
/// kept as a cross-check for [`activation_cdf`], not a production path.
pub fn activation_cdf_alternating(x: &[f64], ell: u32, t: f64) -> Result<f64> {
    let n = x.len();
    if n > SERIES_BUDGET {
        return Err(Error::capacity(format!(
            "alternating CDF needs n ≤ {SERIES_BUDGET}, got {n}"
        )));
    }
    if ell < 1 || ell as usize > n {
        return Err(Error::input(format!(
            "activation threshold {ell} outside 1..={n}"
        )));
    }
    let coeff: Vec<f64> = (0..=n)
        .map(|s| choose_i64(s as i64 - 1, n as i64 - ell as i64) as f64)
        .collect();
    let mut sum = 0.0f64;
    for mask in 0u32..(1u32 << n) {
        let s = mask.count_ones() as usize;
        if coeff[s] == 0.0 {
            continue;
        }
        let xs: f64 = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| x[i]).sum();
        let term = coeff[s] * (-xs * t).exp();
        // parity of |S|+ℓ−n−1
        sum += if (s + ell as usize + n + 1).is_multiple_of(2) {
            term
        } else {
            -term
        };
    }
    Ok(1.0 - sum)
}

/// Central second difference of `s ↦ ψ(x + s(e_a − e_b))` at step 1e−3
/// (undivided).  The activation series is concave along every such
/// direction, so the value should not exceed rounding noise (≤ 1e−6).
pub fn directional_second_difference(x: &[f64], ell: u32, a: usize, b: usize) -> Result<f64> {
    let n = x.len();
    if a >= n || b >= n {
        return Err(Error::input("direction indices out of range"));
    }
    if a == b {
        return Ok(0.0);
    }
    let h = 1e-3;
    let mut plus = x.to_vec();
    plus[a] += h;
    plus[b] -= h;
    let mut minus = x.to_vec();
    minus[a] -= h;
    minus[b] += h;
    Ok(
        activation_series(&plus, ell)? - 2.0 * activation_series(x, ell)?
            + activation_series(&minus, ell)?,
    )
}

/// One realisation of the clock process on `[0,1]`.
#[derive(Clone, Debug)]
pub struct ClockTrace {
    /// First arrival time per element, if it landed within the window.
    pub arrivals: Vec<Option<f64>>,
    /// Elements whose clock rang by time 1.
    pub q1: Subset,
    /// First time the rung set reaches size `ell`, if it ever does.
    pub activation: Option<f64>,
}

/// Simulates the clock process: per element an exponential inter-arrival
/// of rate `x_i`, kept when it lands in `[0,1]`; the activation time is
/// the `ℓ`-th smallest kept arrival.  Identical seeds give identical
/// traces.
pub fn simulate_clock(x: &[f64], ell: u32, seed: u64) -> Result<ClockTrace> {
    if ell < 1 {
        return Err(Error::input("activation threshold must be at least 1"));
    }
    if x.iter().any(|&v| !(0.0..=1.0 + 1e-12).contains(&v)) {
        return Err(Error::input("clock rates must lie in [0,1]"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut arrivals = Vec::with_capacity(x.len());
    let mut q1 = Subset::EMPTY;
    let mut times: Vec<f64> = Vec::new();
    for (i, &xi) in x.iter().enumerate() {
        let u: f64 = rng.random();
        if xi <= 0.0 {
            arrivals.push(None);
            continue;
        }
        let t = -(1.0 - u).ln() / xi;
        if t <= 1.0 {
            arrivals.push(Some(t));
            q1 = q1.with(i);
            times.push(t);
        } else {
            arrivals.push(None);
        }
    }
    times.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let activation = times.get(ell as usize - 1).copied();
    Ok(ClockTrace {
        arrivals,
        q1,
        activation,
    })
}

/// Rounds `y` (with integral coordinate sum) to a binary point without
/// increasing `f`, assuming `f` is concave along every `e_i − e_j`
/// direction: repeatedly take the first two fractional coordinates and
/// move to the better endpoint of the segment through them (ties move
/// toward raising the lower-indexed coordinate).
pub fn pipage_round(f: impl Fn(&[f64]) -> f64, y: &[f64]) -> Result<Vec<f64>> {
    let n = y.len();
    if y.iter().any(|&v| !(-1e-9..=1.0 + 1e-9).contains(&v)) {
        return Err(Error::input("pipage needs a point in the unit cube"));
    }
    let total: f64 = y.iter().sum();
    if (total - total.round()).abs() > 1e-9 {
        return Err(Error::input(format!(
            "pipage needs an integral coordinate sum, got {total}"
        )));
    }
    let mut z = y.to_vec();
    for _ in 0..(4 * n.max(1)) {
        for v in z.iter_mut() {
            if v.abs() < 1e-9 {
                *v = 0.0;
            } else if (*v - 1.0).abs() < 1e-9 {
                *v = 1.0;
            }
        }
        let fracs: Vec<usize> = (0..n).filter(|&i| z[i] > 0.0 && z[i] < 1.0).collect();
        match fracs.len() {
            0 => return Ok(z),
            1 => {
                // The sum is integral, so a lone fractional coordinate can
                // only be accumulated round-off.
                let i = fracs[0];
                let r = z[i].round();
                if (z[i] - r).abs() < 1e-6 {
                    z[i] = r;
                    return Ok(z);
                }
                return Err(Error::input(
                    "pipage found a single genuinely fractional coordinate; \
                     the coordinate sum was not integral",
                ));
            }
            _ => {}
        }
        let (i, j) = (fracs[0], fracs[1]);
        let up = (1.0 - z[i]).min(z[j]);
        let down = z[i].min(1.0 - z[j]);
        let mut zu = z.clone();
        zu[i] += up;
        zu[j] -= up;
        let mut zd = z.clone();
        zd[i] -= down;
        zd[j] += down;
        // Tie → zu, which raises the lower-indexed coordinate.
        z = if f(&zu) <= f(&zd) { zu } else { zd };
    }
    Err(Error::input("pipage failed to terminate"))
}

/// Outcome of the Monte-Carlo check of the clock expectation bound.
#[derive(Clone, Debug, serde::Serialize)]
pub struct ClockReport {
    pub lambda: f64,
    pub ell: u32,
    pub psi: f64,
    /// MC estimate of `E[h(Q(1))]`, `h = rank − min(|·|, ℓ)`.
    pub h_mean: f64,
    pub h_stderr: f64,
    /// `(λ−ℓ)·(1 − 1/e + ψ(x)/e)`.
    pub h_bound: f64,
    /// `h_mean ≥ h_bound − 3σ`.
    pub h_ok: bool,
    /// Exact multilinear extension of `min(|·|, ℓ)` at `x`.
    pub g_exact: f64,
    /// `ℓ − Σ_{k<ℓ} (ℓ−k)·λ^k e^{−λ}/k!`  (= E[min(Poi(λ), ℓ)]).
    pub g_bound: f64,
    pub g_ok: bool,
    pub traces: u64,
}

/// Checks both halves of the clock lower bound at a point `x` in the
/// matroid's independent-set polytope with `x(E) > γ−1`:
/// the `h`-part by simulating `traces` clock realisations, the `g`-part
/// exactly via the count distribution of independent Bernoullis.
pub fn clock_lower_bound_check(
    m: &Matroid,
    x: &[f64],
    traces: u64,
    seed: u64,
) -> Result<ClockReport> {
    let n = m.n();
    if x.len() != n {
        return Err(Error::input(format!(
            "point has {} coordinates for a ground set of {n}",
            x.len()
        )));
    }
    let ell = match m.girth()? {
        Girth::Finite(g) => g - 1,
        Girth::Infinite => return Err(Error::input("clock check needs a matroid of finite girth")),
    };
    if ell < 1 {
        return Err(Error::input("clock check needs a loopless matroid"));
    }
    if !m.in_polytope(x)? {
        return Err(Error::input(
            "clock check needs x inside the independent-set polytope",
        ));
    }
    let lambda: f64 = x.iter().sum();
    if lambda <= ell as f64 + 1e-9 {
        return Err(Error::input(format!(
            "clock check needs x(E) > girth − 1 = {ell}, got {lambda}"
        )));
    }
    if traces < 2 {
        return Err(Error::input("need at least 2 traces"));
    }
    let psi = activation_series(x, ell)?;
    let h_bound = (lambda - ell as f64) * (1.0 - 1.0 / E + psi / E);

    // Only Q(1) matters for h, so sample presence directly with the
    // per-element probability 1 − e^{−x_i}.
    let present: Vec<f64> = x.iter().map(|&xi| -(-xi).exp_m1()).collect();
    let rank_table: Vec<u8> = (0u32..(1 << n))
        .map(|mask| m.rank_mask(mask) as u8)
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = 0.0f64;
    let mut sumsq = 0.0f64;
    for _ in 0..traces {
        let mut mask = 0u32;
        for (i, &p) in present.iter().enumerate() {
            if rng.random::<f64>() < p {
                mask |= 1 << i;
            }
        }
        let h = rank_table[mask as usize] as f64 - mask.count_ones().min(ell) as f64;
        sum += h;
        sumsq += h * h;
    }
    let nf = traces as f64;
    let h_mean = sum / nf;
    let var = ((sumsq - sum * sum / nf) / (nf - 1.0)).max(0.0);
    let h_stderr = (var / nf).sqrt();

    let g_exact = cardinality_cap_expectation(x, ell);
    let g_bound = poisson_truncated_expectation(lambda, ell);
    Ok(ClockReport {
        lambda,
        ell,
        psi,
        h_mean,
        h_stderr,
        h_bound,
        h_ok: h_mean >= h_bound - 3.0 * h_stderr,
        g_exact,
        g_bound,
        g_ok: g_exact >= g_bound - 1e-12,
        traces,
    })
}

/// `E[min(N, ℓ)]` where `N` counts successes of independent Bernoullis
/// with the given probabilities, by the exact count-distribution DP.
pub fn cardinality_cap_expectation(probs: &[f64], ell: u32) -> f64 {
    let mut dist = vec![1.0f64];
    for &p in probs {
        let mut next = vec![0.0f64; dist.len() + 1];
        for (k, &q) in dist.iter().enumerate() {
            next[k] += q * (1.0 - p);
            next[k + 1] += q * p;
        }
        dist = next;
    }
    dist.iter()
        .enumerate()
        .map(|(k, &q)| (k as u32).min(ell) as f64 * q)
        .sum()
}

/// `E[min(Poi(λ), ℓ)] = ℓ − Σ_{k=0}^{ℓ−1} (ℓ−k)·λ^k e^{−λ}/k!`.
pub fn poisson_truncated_expectation(lambda: f64, ell: u32) -> f64 {
    let mut pmf = (-lambda).exp();
    let mut sum = ell as f64;
    for k in 0..ell {
        sum -= (ell - k) as f64 * pmf;
        pmf *= lambda / (k + 1) as f64;
    }
    sum
}

/// Kolmogorov distance between the empirical law of the activation time
/// over `traces` simulated clocks and the closed-form CDF.
///
/// Traces where the set never reaches size `ℓ` contribute no jump; the
/// supremum is taken over the jump points plus the right edge `t = 1`,
/// which is exact because the model CDF is continuous.
pub fn activation_kolmogorov(x: &[f64], ell: u32, traces: u64, seed: u64) -> Result<f64> {
    if traces < 1 {
        return Err(Error::input("need at least one trace"));
    }
    let mut times: Vec<f64> = Vec::with_capacity(traces as usize);
    for k in 0..traces {
        if let Some(t) = simulate_clock(x, ell, seed.wrapping_add(k))?.activation {
            times.push(t);
        }
    }
    times.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let nf = traces as f64;
    let mut dist: f64 = 0.0;
    for (idx, &t) in times.iter().enumerate() {
        let model = activation_cdf(x, ell, t)?;
        let above = (idx + 1) as f64 / nf;
        let below = idx as f64 / nf;
        dist = dist.max((above - model).abs()).max((model - below).abs());
    }
    let tail = times.len() as f64 / nf;
    dist = dist.max((tail - activation_cdf(x, ell, 1.0)?).abs());
    Ok(dist)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::{binomial_expectation, poisson_cdf};
    use crate::extensions::{multilinear, ConcaveSeq, SetFunction};

    #[test]
    fn kernel_values_and_series_seam() {
        assert_eq!(exp_kernel(0.0), 1.0);
        assert!((exp_kernel(1.0) - (1.0 - 1.0 / E)).abs() < 1e-15);
        // The series and closed form agree across the 1e−3 switch.
        for k in 0..5u32 {
            for t in [9.9e-4, 1.0e-3, 1.1e-3] {
                let series = {
                    let mut sum = 0.0f64;
                    let mut m_fact = 1.0f64;
                    let mut t_pow = 1.0f64;
                    for m in 0..12u32 {
                        if m > 0 {
                            m_fact *= m as f64;
                            t_pow *= t;
                        }
                        let term = t_pow / (m_fact * (m + k + 1) as f64);
                        sum += if m.is_multiple_of(2) { term } else { -term };
                    }
                    if k.is_multiple_of(2) {
                        sum
                    } else {
                        -sum
                    }
                };
                let got = exp_kernel_deriv(k, t);
                assert!(
                    (got - series).abs() < 1e-12,
                    "k={k}, t={t}: {got} vs {series}"
                );
            }
        }
    }

    #[test]
    fn kernel_deriv_limit_and_signs() {
        assert!((exp_kernel_deriv(1, 0.0) + 0.5).abs() < 1e-15);
        for k in 0..=5u32 {
            let expect = 1.0 / (k + 1) as f64;
            let got = exp_kernel_deriv(k, 0.0).abs();
            assert!((got - expect).abs() < 1e-15);
            let mut t = 0.0;
            while t <= 20.0 {
                let v = exp_kernel_deriv(k, t);
                if k.is_multiple_of(2) {
                    assert!(v > 0.0, "k={k}, t={t}: {v}");
                } else {
                    assert!(v < 0.0, "k={k}, t={t}: {v}");
                }
                t += 0.25;
            }
        }
    }

    #[test]
    fn kernel_deriv_matches_finite_differences() {
        // k-fold central differences of ρ with step h: stencil weights are
        // binomial with alternating signs, error O(h²).
        let h = 1e-2;
        for k in 1..=4u32 {
            let mut t = 0.5;
            while t <= 10.0 {
                let mut fd = 0.0f64;
                for j in 0..=k {
                    let w = binomial_f64(k, j) * if (k - j).is_multiple_of(2) { 1.0 } else { -1.0 };
                    fd += w * exp_kernel(t + (j as f64 - k as f64 / 2.0) * h);
                }
                fd /= h.powi(k as i32);
                let exact = exp_kernel_deriv(k, t);
                assert!(
                    (fd - exact).abs() < 1e-5,
                    "k={k}, t={t}: fd {fd} vs {exact}"
                );
                t += 0.5;
            }
        }
    }

    #[test]
    fn forward_difference_definition_and_permutation() {
        let phi = |t: f64| (t * 0.7 - 0.3).tanh();
        let d = forward_difference(phi, &[0.4], 0.2).unwrap();
        assert!((d - (phi(0.6) - phi(0.2))).abs() < 1e-15);
        // Dyadic steps make every subset sum exact, so permutation
        // invariance holds to the bit.
        let x = [0.25, 0.5, 0.125, 0.75];
        let perm = [0.75, 0.125, 0.5, 0.25];
        let a = forward_difference(phi, &x, 0.5).unwrap();
        let b = forward_difference(phi, &perm, 0.5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn forward_difference_of_second_kernel_deriv_nonnegative_even_order() {
        // Δ over an even number of nonnegative steps applied to ρ'' stays
        // nonnegative (the iterated difference probes ρ^{(2+n)} ≥ 0).
        let phi = |t: f64| exp_kernel_deriv(2, t);
        for (steps, t0) in [(vec![0.3, 0.9], 0.1), (vec![0.2, 0.5, 0.7, 1.1], 0.0)] {
            let mut t = t0;
            while t < 3.0 {
                let d = forward_difference(phi, &steps, t).unwrap();
                assert!(d >= -1e-12, "t={t}: {d}");
                t += 0.3;
            }
        }
    }

    #[test]
    fn activation_series_routes_agree() {
        // Integral points: subset sum == count form == closed form.
        for n in [4usize, 7, 10] {
            for ell in 1..=3u32 {
                for lambda in (ell + 1)..=(n as u32) {
                    let x: Vec<f64> = (0..n)
                        .map(|i| if (i as u32) < lambda { 1.0 } else { 0.0 })
                        .collect();
                    let direct = activation_series(&x, ell).unwrap();
                    let count = activation_series_at_count(lambda, ell).unwrap();
                    let closed = activation_series_closed(lambda, ell).unwrap();
                    assert!(
                        (direct - count).abs() < 1e-8,
                        "n={n} ℓ={ell} λ={lambda}: {direct} vs count {count}"
                    );
                    assert!(
                        (count - closed).abs() < 1e-8,
                        "ℓ={ell} λ={lambda}: {count} vs closed {closed}"
                    );
                }
                // λ = ℓ: count form still defined.
                let x: Vec<f64> = (0..n)
                    .map(|i| if (i as u32) < ell { 1.0 } else { 0.0 })
                    .collect();
                let direct = activation_series(&x, ell).unwrap();
                let count = activation_series_at_count(ell, ell).unwrap();
                assert!((direct - count).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn series_polynomial_claims() {
        for lambda in 2u32..=15 {
            for ell in 1..lambda {
                let w = series_polynomial(lambda, ell).unwrap();
                // w(1) = ℓ.
                let at_one: i128 = w.iter().sum();
                assert_eq!(at_one, ell as i128, "λ={lambda} ℓ={ell}");
                // w' = λ·w_{λ−1,ℓ−1}, coefficient-exact.
                if ell >= 2 {
                    let prev = series_polynomial(lambda - 1, ell - 1).unwrap();
                    for (i, &c) in prev.iter().enumerate() {
                        let deriv = (i as i128 + 1) * w[i + 1];
                        assert_eq!(deriv, lambda as i128 * c, "λ={lambda} ℓ={ell} i={i}");
                    }
                }
                // Evaluating at e recovers the closed form's inner sum.
                let at_e: f64 = w
                    .iter()
                    .enumerate()
                    .map(|(i, &c)| c as f64 * E.powi(i as i32))
                    .sum();
                let taylor: f64 = (0..ell)
                    .map(|i| binomial_f64(lambda, i) * (ell - i) as f64 * (E - 1.0).powi(i as i32))
                    .sum();
                assert!(
                    (at_e - taylor).abs() < 1e-9 * taylor.abs().max(1.0),
                    "λ={lambda} ℓ={ell}: {at_e} vs {taylor}"
                );
            }
        }
    }

    #[test]
    fn directional_concavity_of_activation_series() {
        // Deterministic scattered points with x(E) ≥ ℓ.
        let base = [0.9, 0.7, 0.45, 0.35];
        for ell in [1u32, 2] {
            for a in 0..4 {
                for b in 0..4 {
                    let d = directional_second_difference(&base, ell, a, b).unwrap();
                    assert!(d <= 1e-6, "ℓ={ell} ({a},{b}): {d}");
                    let d2 = directional_second_difference(&base, ell, b, a).unwrap();
                    assert_eq!(d, d2, "stencil symmetry");
                }
            }
        }
        // Degenerate ℓ = n.
        let d = directional_second_difference(&[1.0, 1.0, 1.0, 1.0], 4, 0, 2).unwrap();
        assert!(d <= 1e-6);
    }

    #[test]
    fn clock_trace_basics() {
        let t = simulate_clock(&[0.0, 0.0, 0.0], 1, 5).unwrap();
        assert!(t.q1.is_empty());
        assert!(t.activation.is_none());
        assert!(t.arrivals.iter().all(|a| a.is_none()));
        // Determinism per seed.
        let x = [0.9, 0.4, 0.7, 0.2];
        let a = simulate_clock(&x, 2, 42).unwrap();
        let b = simulate_clock(&x, 2, 42).unwrap();
        assert_eq!(a.q1, b.q1);
        assert_eq!(a.activation, b.activation);
        // Activation is the ℓ-th smallest arrival and |Q(T)| ≥ ℓ.
        if let Some(act) = a.activation {
            let at_t = a.arrivals.iter().flatten().filter(|&&v| v <= act).count();
            assert!(at_t >= 2);
        }
    }

    #[test]
    fn clock_marginals_match_occupation_probabilities() {
        let x = [0.8, 0.3, 0.55];
        let traces = 40_000u64;
        let mut hits = [0u64; 3];
        for seed in 0..traces {
            let t = simulate_clock(&x, 1, seed).unwrap();
            for (i, h) in hits.iter_mut().enumerate() {
                if t.q1.contains(i) {
                    *h += 1;
                }
            }
        }
        for (i, &h) in hits.iter().enumerate() {
            let p = 1.0 - (-x[i]).exp();
            let est = h as f64 / traces as f64;
            let sigma = (p * (1.0 - p) / traces as f64).sqrt();
            assert!(
                (est - p).abs() <= 3.0 * sigma,
                "i={i}: {est} vs {p} (σ={sigma})"
            );
        }
    }

    #[test]
    fn activation_cdf_matches_alternating_form_and_mc() {
        let x = [0.9, 0.5, 0.75, 0.3, 0.6];
        for ell in 1..=3u32 {
            for t in [0.0, 0.2, 0.5, 0.9, 1.0] {
                let prod = activation_cdf(&x, ell, t).unwrap();
                let alt = activation_cdf_alternating(&x, ell, t).unwrap();
                assert!((prod - alt).abs() < 1e-8, "ℓ={ell} t={t}: {prod} vs {alt}");
            }
            assert_eq!(activation_cdf(&x, ell, 0.0).unwrap(), 0.0);
        }
        // Kolmogorov distance against simulated activation times.
        let ell = 2u32;
        let traces = 100_000u64;
        let mut times: Vec<f64> = Vec::new();
        for seed in 0..traces {
            if let Some(t) = simulate_clock(&x, ell, seed).unwrap().activation {
                times.push(t);
            }
        }
        times.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let nf = traces as f64;
        let mut ks = (times.len() as f64 / nf - activation_cdf(&x, ell, 1.0).unwrap()).abs();
        for (i, &t) in times.iter().enumerate() {
            let f = activation_cdf(&x, ell, t).unwrap();
            ks = ks.max((i as f64 / nf - f).abs());
            ks = ks.max(((i + 1) as f64 / nf - f).abs());
        }
        assert!(ks < 0.01, "Kolmogorov distance {ks}");
        // The packaged helper reproduces the inline computation exactly
        // (same per-trace seed stream, same supremum).
        assert_eq!(ks, activation_kolmogorov(&x, ell, traces, 0).unwrap());
    }

    #[test]
    fn pipage_rounds_down_the_series() {
        // Already binary: unchanged.
        let f = |z: &[f64]| activation_series(z, 1).unwrap();
        let y = [1.0, 0.0, 1.0];
        assert_eq!(pipage_round(f, &y).unwrap(), y.to_vec());
        // (1/2, 1/2) with ℓ=1 goes to an endpoint without increasing ψ.
        let y = [0.5, 0.5];
        let z = pipage_round(f, &y).unwrap();
        assert!(z == vec![1.0, 0.0] || z == vec![0.0, 1.0]);
        assert!(f(&z) <= f(&y) + 1e-9);
        // Non-integral sum is rejected.
        assert!(pipage_round(f, &[0.5, 0.25]).is_err());
        // Fractional count decreases every step: count evaluations.
        let y = [0.3, 0.8, 0.9, 0.6, 0.4];
        let calls = std::cell::Cell::new(0usize);
        let g = |z: &[f64]| {
            calls.set(calls.get() + 1);
            activation_series(z, 2).unwrap()
        };
        let z = pipage_round(g, &y).unwrap();
        assert!(z.iter().all(|&v| v == 0.0 || v == 1.0));
        assert_eq!(z.iter().sum::<f64>(), 3.0);
        // ≤ n−1 pipage steps, two evaluations each.
        assert!(calls.get() <= 8, "{} evaluations", calls.get());
        assert!(activation_series(&z, 2).unwrap() <= activation_series(&y, 2).unwrap() + 1e-9);
    }

    #[test]
    fn count_expectation_matches_binomial_and_poisson_forms() {
        // Constant probabilities: the count is binomial.
        for (n, lam, ell) in [(6u32, 2.0f64, 2u32), (10, 3.0, 3), (14, 1.0, 1)] {
            let p = lam / n as f64;
            let probs = vec![p; n as usize];
            let dp = cardinality_cap_expectation(&probs, ell);
            let phi = ConcaveSeq::truncated_linear(ell);
            let bin = binomial_expectation(&phi, n, p).unwrap();
            assert!((dp - bin).abs() < 1e-12, "{dp} vs {bin}");
        }
        // Poisson form agrees with the CDF identity.
        for ell in 1..=4u32 {
            for lam in [0.5f64, 2.0, 5.0] {
                let a = poisson_truncated_expectation(lam, ell);
                let b: f64 = (0..ell).map(|k| 1.0 - poisson_cdf(k, lam)).sum();
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn binomial_dominates_poisson_in_concave_order() {
        for ell in 1..=3u32 {
            let phi = ConcaveSeq::truncated_linear(ell);
            for lam in 1..=10u32 {
                for n in lam.max(1)..=40 {
                    let bin = binomial_expectation(&phi, n, lam as f64 / n as f64).unwrap();
                    let poi = poisson_truncated_expectation(lam as f64, ell);
                    assert!(bin >= poi - 1e-12, "ℓ={ell} λ={lam} n={n}: {bin} < {poi}");
                }
            }
        }
    }

    #[test]
    fn clock_bound_check_on_complete_graph() {
        let m = Matroid::graphic(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap();
        let x = vec![0.5; 6];
        let report = clock_lower_bound_check(&m, &x, 200_000, 42).unwrap();
        assert_eq!(report.ell, 2);
        assert!((report.lambda - 3.0).abs() < 1e-12);
        assert!(
            report.h_ok,
            "h: {} < {} − 3σ",
            report.h_mean, report.h_bound
        );
        assert!(report.g_ok, "g: {} < {}", report.g_exact, report.g_bound);
        // E[h(Q(1))] is also H at the occupation probabilities, exactly.
        let h = SetFunction::rank_residual(&m).unwrap();
        let occ: Vec<f64> = x.iter().map(|&xi| 1.0 - (-xi).exp()).collect();
        let exact = multilinear(&h, &occ).unwrap();
        assert!(
            (report.h_mean - exact).abs() <= 3.0 * report.h_stderr,
            "MC {} vs exact {exact}",
            report.h_mean
        );
        // Precondition screens: outside polytope, or λ ≤ ℓ.
        assert!(clock_lower_bound_check(&m, &[0.9; 6], 100, 1).is_err());
        assert!(clock_lower_bound_check(&m, &[0.3; 6], 100, 1).is_err());
    }
}
