//! Continuous extensions of set functions.
//!
//! For `f : 2^E → ℝ` and `x ∈ [0,1]^E` the crate works with three
//! extensions:
//!
//! * the *multilinear* extension `F(x) = E[f(X)]` where `X` includes each
//!   element independently with probability `x_i`;
//! * the *concave* extension `f̂(x)`, the maximum of `E[f(S)]` over all
//!   distributions with marginals `x` — evaluated here for weighted matroid
//!   rank functions by a capacitated greedy;
//! * the *marginal* extension `f*(x) = min_S [f(S) + Σ_i (f(S∪i)−f(S))·x_i]`,
//!   an upper bound on `f̂` that coincides with it for matroid ranks.
//!
//! Exact computations enumerate the subset lattice and are budgeted:
//! multilinear evaluation at `n ≤ 24`, concave/marginal extensions at
//! `n ≤ 20`.

use std::ops::Deref;
use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matroid::{Girth, Matroid, Subset, WeightedRank};

/// Budget for exact multilinear evaluation.
pub const MULTILINEAR_BUDGET: usize = 24;

/// Budget for concave/marginal extension evaluation and value tables.
pub const EXTENSION_BUDGET: usize = 20;

/// A point in the unit cube `[0,1]^E`.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct Point(Vec<f64>);

impl Point {
    /// Validates all coordinates into `[0,1]` (1e−12 slack is clamped).
    pub fn new(coords: Vec<f64>) -> Result<Point> {
        let mut coords = coords;
        for c in coords.iter_mut() {
            if !c.is_finite() || *c < -1e-12 || *c > 1.0 + 1e-12 {
                return Err(Error::input(format!("coordinate {c} outside [0,1]")));
            }
            *c = c.clamp(0.0, 1.0);
        }
        Ok(Point(coords))
    }

    /// The constant point `(v, …, v)`.
    pub fn constant(n: usize, v: f64) -> Result<Point> {
        Point::new(vec![v; n])
    }

    /// Indicator vector of a subset.
    pub fn indicator(n: usize, s: Subset) -> Point {
        let mut coords = vec![0.0; n];
        for i in s.iter() {
            coords[i] = 1.0;
        }
        Point(coords)
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for Point {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

fn check_point(n: usize, x: &[f64]) -> Result<()> {
    if x.len() != n {
        return Err(Error::input(format!(
            "expected a point with {n} coordinates, got {}",
            x.len()
        )));
    }
    for &c in x {
        if !c.is_finite() || !(-1e-12..=1.0 + 1e-12).contains(&c) {
            return Err(Error::input(format!("coordinate {c} outside [0,1]")));
        }
    }
    Ok(())
}

/// A set function on `{0,…,n−1}` with structure flags.
///
/// The flags are caller-asserted; extension routines use them only to pick
/// valid algorithms (they are never re-verified at call time).
#[derive(Clone)]
pub struct SetFunction {
    n: usize,
    monotone: bool,
    submodular: bool,
    eval: Arc<dyn Fn(u32) -> f64 + Send + Sync>,
}

impl std::fmt::Debug for SetFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SetFunction")
            .field("n", &self.n)
            .field("monotone", &self.monotone)
            .field("submodular", &self.submodular)
            .finish_non_exhaustive()
    }
}

impl SetFunction {
    pub fn from_fn(
        n: usize,
        monotone: bool,
        submodular: bool,
        f: impl Fn(Subset) -> f64 + Send + Sync + 'static,
    ) -> Result<SetFunction> {
        if n > crate::matroid::MAX_GROUND_SET {
            return Err(Error::capacity(format!("ground set of {n} elements")));
        }
        Ok(SetFunction {
            n,
            monotone,
            submodular,
            eval: Arc::new(move |mask| f(Subset::from_bits(mask))),
        })
    }

    /// Plain matroid rank.
    pub fn rank(m: &Matroid) -> SetFunction {
        let m = m.clone();
        SetFunction {
            n: m.n(),
            monotone: true,
            submodular: true,
            eval: Arc::new(move |mask| m.rank_mask(mask) as f64),
        }
    }

    /// Weighted matroid rank `r_w`.
    pub fn weighted_rank(wr: &WeightedRank) -> SetFunction {
        let wr = wr.clone();
        SetFunction {
            n: wr.n(),
            monotone: true,
            submodular: true,
            eval: Arc::new(move |mask| wr.value_mask(mask)),
        }
    }

    /// Modular function `S ↦ w(S)`.
    pub fn modular(w: &[f64]) -> Result<SetFunction> {
        if w.len() > crate::matroid::MAX_GROUND_SET {
            return Err(Error::capacity("too many weights"));
        }
        let w = w.to_vec();
        Ok(SetFunction {
            n: w.len(),
            monotone: w.iter().all(|&v| v >= 0.0),
            submodular: true,
            eval: Arc::new(move |mask| Subset::from_bits(mask).iter().map(|i| w[i]).sum()),
        })
    }

    /// Cardinality cap `S ↦ min(|S|, ell)`.
    pub fn cardinality_cap(n: usize, ell: u32) -> Result<SetFunction> {
        SetFunction::from_fn(n, true, true, move |s| s.len().min(ell) as f64)
    }

    /// Residual `h = rank − min(|·|, γ−1)` for a matroid of finite girth γ.
    ///
    /// `h` vanishes on sets smaller than the girth, is monotone and
    /// nonnegative, and its marginal extension is identically zero on
    /// loopless matroids.
    pub fn rank_residual(m: &Matroid) -> Result<SetFunction> {
        let gamma = match m.girth()? {
            Girth::Finite(g) => g,
            Girth::Infinite => {
                return Err(Error::input(
                    "rank residual needs a matroid of finite girth",
                ))
            }
        };
        let ell = gamma - 1;
        let m = m.clone();
        Ok(SetFunction {
            n: m.n(),
            monotone: true,
            submodular: false,
            eval: Arc::new(move |mask| {
                m.rank_mask(mask) as f64 - mask.count_ones().min(ell) as f64
            }),
        })
    }

    /// Coverage-style term `S ↦ weight · φ(|S ∩ support|)`.
    pub fn coverage(
        n: usize,
        support: Subset,
        phi: &ConcaveSeq,
        weight: f64,
    ) -> Result<SetFunction> {
        if support.bits() & !Subset::full(n).bits() != 0 {
            return Err(Error::input("support outside the ground set"));
        }
        if !weight.is_finite() || weight < 0.0 {
            return Err(Error::input("coverage weight must be nonnegative"));
        }
        let phi = phi.clone();
        let sup = support.bits();
        Ok(SetFunction {
            n,
            monotone: true,
            submodular: true,
            eval: Arc::new(move |mask| weight * phi.value_at((mask & sup).count_ones() as u64)),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_monotone(&self) -> bool {
        self.monotone
    }

    pub fn is_submodular(&self) -> bool {
        self.submodular
    }

    pub fn value(&self, s: Subset) -> Result<f64> {
        if s.bits() & !Subset::full(self.n).bits() != 0 {
            return Err(Error::input("subset contains out-of-range elements"));
        }
        Ok((self.eval)(s.bits()))
    }

    pub(crate) fn value_mask(&self, mask: u32) -> f64 {
        (self.eval)(mask)
    }
}

/// Exact multilinear extension `F(x) = E[f(X)]`, by recursion over the
/// coordinates (zero-probability branches are pruned, so indicator points
/// reproduce `f` exactly).  Budgeted at `n ≤ 24`.
pub fn multilinear(f: &SetFunction, x: &[f64]) -> Result<f64> {
    check_point(f.n, x)?;
    if f.n > MULTILINEAR_BUDGET {
        return Err(Error::capacity(format!(
            "exact multilinear extension needs n ≤ {MULTILINEAR_BUDGET}, got {}",
            f.n
        )));
    }
    Ok(multilinear_rec(f, x, 0, 0, 1.0))
}

fn multilinear_rec(f: &SetFunction, x: &[f64], i: usize, mask: u32, p: f64) -> f64 {
    if p == 0.0 {
        return 0.0;
    }
    if i == f.n {
        return p * f.value_mask(mask);
    }
    multilinear_rec(f, x, i + 1, mask, p * (1.0 - x[i]))
        + multilinear_rec(f, x, i + 1, mask | (1 << i), p * x[i])
}

/// Monte-Carlo estimate of the multilinear extension.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: u64,
}

/// Samples `X ~ x` independently `samples` times with a ChaCha stream seeded
/// from `seed`; identical seeds give identical estimates.
pub fn multilinear_mc(f: &SetFunction, x: &[f64], samples: u64, seed: u64) -> Result<McEstimate> {
    check_point(f.n, x)?;
    if samples < 2 {
        return Err(Error::input("need at least 2 samples"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = 0.0;
    let mut sumsq = 0.0;
    for _ in 0..samples {
        let mut mask = 0u32;
        for (i, &xi) in x.iter().enumerate() {
            if rng.random::<f64>() < xi {
                mask |= 1 << i;
            }
        }
        let v = f.value_mask(mask);
        sum += v;
        sumsq += v * v;
    }
    let nf = samples as f64;
    let mean = sum / nf;
    let var = ((sumsq - sum * sum / nf) / (nf - 1.0)).max(0.0);
    Ok(McEstimate {
        mean,
        stderr: (var / nf).sqrt(),
        samples,
    })
}

/// Partial derivative `∂F/∂x_i = E[f(Y∪i) − f(Y)]` over `Y ⊆ E∖i`.
pub fn multilinear_gradient(f: &SetFunction, x: &[f64], i: usize) -> Result<f64> {
    check_point(f.n, x)?;
    if i >= f.n {
        return Err(Error::input(format!("coordinate {i} out of range")));
    }
    if f.n > MULTILINEAR_BUDGET {
        return Err(Error::capacity("gradient needs the exact budget"));
    }
    Ok(gradient_rec(f, x, 0, i, 0, 1.0))
}

fn gradient_rec(f: &SetFunction, x: &[f64], pos: usize, skip: usize, mask: u32, p: f64) -> f64 {
    if p == 0.0 {
        return 0.0;
    }
    if pos == f.n {
        return p * (f.value_mask(mask | (1 << skip)) - f.value_mask(mask));
    }
    if pos == skip {
        return gradient_rec(f, x, pos + 1, skip, mask, p);
    }
    gradient_rec(f, x, pos + 1, skip, mask, p * (1.0 - x[pos]))
        + gradient_rec(f, x, pos + 1, skip, mask | (1 << pos), p * x[pos])
}

/// Mixed second derivative `∂²F/∂x_i∂x_j`; zero when `i = j` (F is affine in
/// each coordinate), and `≤ 0` for submodular `f`.
pub fn hessian_entry(f: &SetFunction, x: &[f64], i: usize, j: usize) -> Result<f64> {
    check_point(f.n, x)?;
    if i >= f.n || j >= f.n {
        return Err(Error::input("coordinate out of range"));
    }
    if i == j {
        return Ok(0.0);
    }
    if f.n > MULTILINEAR_BUDGET {
        return Err(Error::capacity("hessian needs the exact budget"));
    }
    Ok(hessian_rec(f, x, 0, i, j, 0, 1.0))
}

#[allow(clippy::too_many_arguments)]
fn hessian_rec(
    f: &SetFunction,
    x: &[f64],
    pos: usize,
    i: usize,
    j: usize,
    mask: u32,
    p: f64,
) -> f64 {
    if p == 0.0 {
        return 0.0;
    }
    if pos == f.n {
        let bi = 1u32 << i;
        let bj = 1u32 << j;
        return p
            * (f.value_mask(mask | bi | bj) - f.value_mask(mask | bi) - f.value_mask(mask | bj)
                + f.value_mask(mask));
    }
    if pos == i || pos == j {
        return hessian_rec(f, x, pos + 1, i, j, mask, p);
    }
    hessian_rec(f, x, pos + 1, i, j, mask, p * (1.0 - x[pos]))
        + hessian_rec(f, x, pos + 1, i, j, mask | (1 << pos), p * x[pos])
}

/// Concave extension of a weighted matroid rank at `x`:
/// `max { w·y : y in the independent-set polytope, y ≤ x }`,
/// by the capacitated greedy (elements in decreasing weight, ties by
/// ascending index, each raised to its residual polytope capacity).
///
/// Budgeted at `n ≤ 20`.
pub fn concave_extension(wr: &WeightedRank, x: &[f64]) -> Result<f64> {
    Ok(concave_extension_witness(wr, x)?.0)
}

/// As [`concave_extension`], also returning the maximising `y`.
pub fn concave_extension_witness(wr: &WeightedRank, x: &[f64]) -> Result<(f64, Vec<f64>)> {
    let n = wr.n();
    check_point(n, x)?;
    if n > EXTENSION_BUDGET {
        return Err(Error::capacity(format!(
            "concave extension needs n ≤ {EXTENSION_BUDGET}, got {n}"
        )));
    }
    let m = wr.matroid();
    let w = wr.weights();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| w[b].partial_cmp(&w[a]).unwrap().then(a.cmp(&b)));
    let full = Subset::full(n).bits();
    let mut y = vec![0.0f64; n];
    for &e in &order {
        // Residual capacity: min over sets containing e of rank(S) − y(S).
        let mut cap = f64::INFINITY;
        let bit = 1u32 << e;
        let rest = full & !bit;
        let mut sub = rest;
        loop {
            let mask = sub | bit;
            let ysum: f64 = Subset::from_bits(mask).iter().map(|i| y[i]).sum();
            cap = cap.min(m.rank_mask(mask) as f64 - ysum);
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
        y[e] = x[e].min(cap.max(0.0));
    }
    let value = y.iter().zip(w).map(|(yi, wi)| yi * wi).sum();
    Ok((value, y))
}

/// A supergradient of `x ↦ concave_extension(wr, x)`.
///
/// Uses the nested-prefix duality of the greedy: with elements sorted by
/// decreasing weight and prefixes `P_i`, the extension equals
/// `Σ_i (w_i − w_{i+1}) · min_{T ⊆ P_i} [rank(T) + x(P_i∖T)]`, and the
/// minimising `T_i` of each term yields the supergradient
/// `Σ_i (w_i − w_{i+1}) · χ_{P_i∖T_i}`.
pub fn concave_extension_supergradient(wr: &WeightedRank, x: &[f64]) -> Result<Vec<f64>> {
    let n = wr.n();
    check_point(n, x)?;
    if n > EXTENSION_BUDGET {
        return Err(Error::capacity(format!(
            "supergradient needs n ≤ {EXTENSION_BUDGET}, got {n}"
        )));
    }
    let m = wr.matroid();
    let w = wr.weights();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| w[b].partial_cmp(&w[a]).unwrap().then(a.cmp(&b)));
    let mut q = vec![0.0f64; n];
    let mut prefix = 0u32;
    for (i, &e) in order.iter().enumerate() {
        prefix |= 1 << e;
        let delta = w[e] - if i + 1 < n { w[order[i + 1]] } else { 0.0 };
        if delta == 0.0 {
            continue;
        }
        // Lexicographically smallest minimiser of rank(T) + x(P∖T) over T ⊆ P.
        let mut best_t = 0u32;
        let mut best = f64::INFINITY;
        let mut sub = prefix;
        loop {
            let t = sub;
            let xsum: f64 = Subset::from_bits(prefix & !t).iter().map(|i| x[i]).sum();
            let v = m.rank_mask(t) as f64 + xsum;
            if v < best - 1e-15 || (v < best + 1e-15 && t < best_t) {
                best = v.min(best);
                best_t = t;
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & prefix;
        }
        for i in Subset::from_bits(prefix & !best_t).iter() {
            q[i] += delta;
        }
    }
    Ok(q)
}

/// Marginal extension `f*(x) = min_S [f(S) + Σ_{i∉S} (f(S∪i)−f(S))·x_i]`.
///
/// Always ≥ the concave extension; equal to it for matroid rank functions.
/// Budgeted at `n ≤ 20`.
pub fn marginal_extension(f: &SetFunction, x: &[f64]) -> Result<f64> {
    check_point(f.n, x)?;
    if f.n > EXTENSION_BUDGET {
        return Err(Error::capacity(format!(
            "marginal extension needs n ≤ {EXTENSION_BUDGET}, got {}",
            f.n
        )));
    }
    let mut best = f64::INFINITY;
    for mask in 0u32..(1u32 << f.n) {
        let base = f.value_mask(mask);
        let mut v = base;
        for (i, &xi) in x.iter().enumerate() {
            if mask & (1 << i) == 0 && xi > 0.0 {
                v += (f.value_mask(mask | (1 << i)) - base) * xi;
            }
        }
        best = best.min(v);
    }
    Ok(best)
}

/// A finite nondecreasing concave sequence `φ(0), φ(1), …`, extended
/// affinely past the end of the table with its final slope.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ConcaveSeq {
    values: Vec<f64>,
}

impl ConcaveSeq {
    /// Validates length ≥ 2, monotonicity, and concavity (tolerance 1e−12).
    pub fn new(values: Vec<f64>) -> Result<ConcaveSeq> {
        if values.len() < 2 {
            return Err(Error::input(
                "concave sequence needs at least two values to fix its final slope",
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::input("concave sequence values must be finite"));
        }
        let mut prev_diff = f64::INFINITY;
        for w in values.windows(2) {
            let d = w[1] - w[0];
            if d < -1e-12 {
                return Err(Error::input("sequence is not nondecreasing"));
            }
            if d > prev_diff + 1e-12 {
                return Err(Error::input("sequence is not concave"));
            }
            prev_diff = d;
        }
        Ok(ConcaveSeq { values })
    }

    /// `min(k, ell)`: the table `0, 1, …, ell, ell` (flat tail).
    pub fn truncated_linear(ell: u32) -> ConcaveSeq {
        let mut values: Vec<f64> = (0..=ell).map(f64::from).collect();
        values.push(ell as f64);
        ConcaveSeq { values }
    }

    /// The identity `k ↦ k` up to `upto` (slope-1 tail).
    pub fn identity(upto: u32) -> ConcaveSeq {
        let upto = upto.max(1);
        ConcaveSeq {
            values: (0..=upto).map(f64::from).collect(),
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `φ(k)` with affine extension beyond the table.
    pub fn value_at(&self, k: u64) -> f64 {
        let last = self.values.len() - 1;
        if (k as usize) <= last {
            self.values[k as usize]
        } else {
            let slope = self.values[last] - self.values[last - 1];
            self.values[last] + slope * (k - last as u64) as f64
        }
    }

    /// Slope of the linear piece on `[k, k+1]`.
    pub fn slope_after(&self, k: u64) -> f64 {
        self.value_at(k + 1) - self.value_at(k)
    }

    /// The piecewise-linear concave extension
    /// `φ̂(λ) = φ(⌊λ⌋) + (φ(⌊λ⌋+1) − φ(⌊λ⌋))·(λ − ⌊λ⌋)`,
    /// which is the concave extension of the coverage-type function
    /// `S ↦ φ(|S ∩ E_j|)` at any point with `x(E_j) = λ`.
    pub fn interpolate(&self, lambda: f64) -> Result<f64> {
        if !lambda.is_finite() || lambda < -1e-12 {
            return Err(Error::input(format!("interpolation at λ = {lambda} < 0")));
        }
        let lambda = lambda.max(0.0);
        let floor = lambda.floor();
        let k = floor as u64;
        Ok(self.value_at(k) + (self.value_at(k + 1) - self.value_at(k)) * (lambda - floor))
    }
}

impl TryFrom<Vec<f64>> for ConcaveSeq {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<ConcaveSeq> {
        ConcaveSeq::new(values)
    }
}

impl From<ConcaveSeq> for Vec<f64> {
    fn from(seq: ConcaveSeq) -> Vec<f64> {
        seq.values
    }
}

/// A set function tabulated over the full subset lattice (`n ≤ 20`), giving
/// `O(2^n)` multilinear evaluations and conditional expectations without
/// re-invoking the oracle.
#[derive(Clone, Debug)]
pub struct ValueTable {
    n: usize,
    values: Vec<f64>,
}

impl ValueTable {
    pub fn build(f: &SetFunction) -> Result<ValueTable> {
        Self::from_oracle(f.n, |mask| f.value_mask(mask))
    }

    pub fn from_weighted_rank(wr: &WeightedRank) -> Result<ValueTable> {
        Self::from_oracle(wr.n(), |mask| wr.value_mask(mask))
    }

    pub fn from_rank(m: &Matroid) -> Result<ValueTable> {
        Self::from_oracle(m.n(), |mask| m.rank_mask(mask) as f64)
    }

    fn from_oracle(n: usize, f: impl Fn(u32) -> f64) -> Result<ValueTable> {
        if n > EXTENSION_BUDGET {
            return Err(Error::capacity(format!(
                "value table needs n ≤ {EXTENSION_BUDGET}, got {n}"
            )));
        }
        let values = (0u32..(1 << n)).map(f).collect();
        Ok(ValueTable { n, values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn value(&self, mask: u32) -> f64 {
        self.values[mask as usize]
    }

    /// Multilinear extension by successive coordinate folding.
    pub fn multilinear(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.n);
        let mut buf = self.values.clone();
        for bit in (0..self.n).rev() {
            let half = 1usize << bit;
            for m in 0..half {
                buf[m] += x[bit] * (buf[m + half] - buf[m]);
            }
        }
        buf[0]
    }

    /// Conditional expectations over the coordinates in `keep`: entry `a` of
    /// the result is `E[f(Y ∪ A)]` where `Y ~ x` on the other coordinates
    /// and `A` is the subset of `keep` encoded by the bits of `a` (bit `t`
    /// of `a` ↔ `keep[t]`).
    pub fn expectations_over(&self, x: &[f64], keep: &[usize]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.n);
        let mut keep_mask = 0u32;
        for &k in keep {
            keep_mask |= 1 << k;
        }
        let mut acc = vec![0.0f64; 1 << keep.len()];
        self.expectations_rec(x, keep, keep_mask, 0, 0, 1.0, &mut acc);
        acc
    }

    #[allow(clippy::too_many_arguments)]
    fn expectations_rec(
        &self,
        x: &[f64],
        keep: &[usize],
        keep_mask: u32,
        bit: usize,
        mask: u32,
        p: f64,
        acc: &mut [f64],
    ) {
        if p == 0.0 {
            return;
        }
        if bit == self.n {
            // The kept bits ride along in `mask`; index the accumulator by them.
            let mut idx = 0usize;
            for (t, &k) in keep.iter().enumerate() {
                if mask & (1 << k) != 0 {
                    idx |= 1 << t;
                }
            }
            acc[idx] += p * self.values[mask as usize];
            return;
        }
        if keep_mask & (1 << bit) != 0 {
            self.expectations_rec(x, keep, keep_mask, bit + 1, mask, p, acc);
            self.expectations_rec(x, keep, keep_mask, bit + 1, mask | (1 << bit), p, acc);
        } else {
            self.expectations_rec(x, keep, keep_mask, bit + 1, mask, p * (1.0 - x[bit]), acc);
            self.expectations_rec(
                x,
                keep,
                keep_mask,
                bit + 1,
                mask | (1 << bit),
                p * x[bit],
                acc,
            );
        }
    }

    /// All partial derivatives of the multilinear extension.
    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let e = self.expectations_over(x, &[i]);
                e[1] - e[0]
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> Matroid {
        Matroid::graphic(3, &[(0, 1), (1, 2), (2, 0)]).unwrap()
    }

    #[test]
    fn multilinear_uniform_closed_form() {
        // F of rank(uniform(1,n)) at (t,…,t) is 1 − (1−t)^n.
        for n in [2usize, 5, 8] {
            let m = Matroid::uniform(1, n).unwrap();
            let f = SetFunction::rank(&m);
            let t = 1.0 / n as f64;
            let val = multilinear(&f, &vec![t; n]).unwrap();
            let expect = 1.0 - (1.0 - t).powi(n as i32);
            assert!((val - expect).abs() < 1e-12, "n={n}: {val} vs {expect}");
        }
    }

    #[test]
    fn multilinear_extends_exactly_at_indicators() {
        let m = triangle();
        let f = SetFunction::rank(&m);
        for mask in 0u32..8 {
            let x = Point::indicator(3, Subset::from_bits(mask));
            let val = multilinear(&f, &x).unwrap();
            assert_eq!(val, m.rank_mask(mask) as f64);
        }
    }

    #[test]
    fn mc_matches_exact_within_three_sigma() {
        let m = triangle();
        let f = SetFunction::rank(&m);
        let x = vec![2.0 / 3.0; 3];
        let exact = multilinear(&f, &x).unwrap();
        let est = multilinear_mc(&f, &x, 1_000_000, 42).unwrap();
        assert!(
            (est.mean - exact).abs() <= 3.0 * est.stderr,
            "mc {} ± {} vs exact {exact}",
            est.mean,
            est.stderr
        );
    }

    #[test]
    fn mc_is_deterministic_per_seed() {
        let m = Matroid::uniform(1, 8).unwrap();
        let f = SetFunction::rank(&m);
        let x = vec![1.0 / 8.0; 8];
        let a = multilinear_mc(&f, &x, 10_000, 7).unwrap();
        let b = multilinear_mc(&f, &x, 10_000, 7).unwrap();
        assert_eq!(a, b);
        let expect = 1.0 - (7.0f64 / 8.0).powi(8);
        assert!((a.mean - expect).abs() <= 3.0 * a.stderr);
    }

    #[test]
    fn gradient_matches_finite_difference() {
        let m = triangle();
        let f = SetFunction::rank(&m);
        let x = vec![0.3, 0.55, 0.7];
        for i in 0..3 {
            let g = multilinear_gradient(&f, &x, i).unwrap();
            let h = 1e-6;
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += h;
            xm[i] -= h;
            let fd = (multilinear(&f, &xp).unwrap() - multilinear(&f, &xm).unwrap()) / (2.0 * h);
            assert!((g - fd).abs() < 1e-6, "i={i}: {g} vs {fd}");
        }
    }

    #[test]
    fn hessian_diagonal_zero_offdiagonal_nonpositive() {
        let m = triangle();
        let f = SetFunction::rank(&m);
        let x = vec![0.4, 0.5, 0.6];
        assert_eq!(hessian_entry(&f, &x, 1, 1).unwrap(), 0.0);
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert!(hessian_entry(&f, &x, i, j).unwrap() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn concave_extension_is_linear_inside_polytope() {
        // For x in the independent-set polytope and unit weights, the
        // capacitated greedy saturates y = x, so f̂(x) = x(E).
        let m = triangle();
        let wr = WeightedRank::unit(m);
        let x = vec![2.0 / 3.0; 3];
        let (v, y) = concave_extension_witness(&wr, &x).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
        assert_eq!(y, x);
    }

    #[test]
    fn concave_extension_clips_outside_polytope() {
        let m = triangle();
        let wr = WeightedRank::unit(m);
        let v = concave_extension(&wr, &[1.0, 1.0, 1.0]).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
        let wr = WeightedRank::new(triangle(), vec![3.0, 2.0, 1.0]).unwrap();
        // Greedy takes y₀ = 1 (w=3), y₁ = 1 (w=2), y₂ capped at rank 2.
        let v = concave_extension(&wr, &[1.0, 1.0, 1.0]).unwrap();
        assert!((v - 5.0).abs() < 1e-12);
    }

    #[test]
    fn supergradient_reproduces_value_and_dominates() {
        let m = Matroid::uniform(1, 2).unwrap();
        let wr = WeightedRank::new(m, vec![2.0, 1.0]).unwrap();
        let x = vec![1.0, 0.5];
        let q = concave_extension_supergradient(&wr, &x).unwrap();
        // Dual prices of max{2y₀ + y₁ : y₀+y₁ ≤ 1, y ≤ x}: known to be (1,0).
        assert!((q[0] - 1.0).abs() < 1e-12 && q[1].abs() < 1e-12, "{q:?}");
        let fx = concave_extension(&wr, &x).unwrap();
        // Concavity: f̂(x') ≤ f̂(x) + q·(x'−x) for sampled x'.
        for xp in [[0.0, 1.0], [1.0, 1.0], [0.25, 0.75], [0.5, 0.0]] {
            let fxp = concave_extension(&wr, &xp).unwrap();
            let lin: f64 = fx
                + q.iter()
                    .zip(xp.iter().zip(x.iter()))
                    .map(|(qi, (a, b))| qi * (a - b))
                    .sum::<f64>();
            assert!(fxp <= lin + 1e-12, "{xp:?}: {fxp} vs {lin}");
        }
    }

    #[test]
    fn marginal_extension_of_residual_vanishes() {
        // h = rank − min(|·|, girth−1) has marginal extension 0 on loopless
        // matroids: the empty set certifies ≤ 0 and nonnegativity does the rest.
        for m in [
            triangle(),
            Matroid::uniform(2, 5).unwrap(),
            Matroid::union_construction(2, 1, 3).unwrap(),
        ] {
            let h = SetFunction::rank_residual(&m).unwrap();
            let x = vec![0.37; m.n()];
            let v = marginal_extension(&h, &x).unwrap();
            assert!(v.abs() < 1e-12, "{v}");
        }
    }

    #[test]
    fn marginal_extension_matches_concave_for_rank() {
        let m = triangle();
        let f = SetFunction::rank(&m);
        let wr = WeightedRank::unit(m);
        for x in [[0.2, 0.9, 0.4], [1.0, 1.0, 1.0], [0.66, 0.66, 0.66]] {
            let star = marginal_extension(&f, &x).unwrap();
            let hat = concave_extension(&wr, &x).unwrap();
            assert!((star - hat).abs() < 1e-9, "{star} vs {hat}");
        }
    }

    #[test]
    fn concave_seq_validation_and_interpolation() {
        assert!(ConcaveSeq::new(vec![0.0, 1.0, 3.0]).is_err()); // convex
        assert!(ConcaveSeq::new(vec![0.0, -1.0]).is_err()); // decreasing
        let phi = ConcaveSeq::truncated_linear(2);
        assert_eq!(phi.value_at(0), 0.0);
        assert_eq!(phi.value_at(5), 2.0);
        assert_eq!(phi.interpolate(1.5).unwrap(), 1.5);
        assert_eq!(phi.interpolate(2.5).unwrap(), 2.0);
        let id = ConcaveSeq::identity(3);
        assert_eq!(id.value_at(10), 10.0);
        assert_eq!(id.interpolate(4.25).unwrap(), 4.25);
    }

    #[test]
    fn value_table_folds_match_direct_recursion() {
        let m = Matroid::union_construction(2, 1, 2).unwrap();
        let f = SetFunction::rank(&m);
        let table = ValueTable::build(&f).unwrap();
        let x: Vec<f64> = (0..m.n()).map(|i| (i as f64 + 1.0) / 10.0).collect();
        let direct = multilinear(&f, &x).unwrap();
        assert!((table.multilinear(&x) - direct).abs() < 1e-12);
        let grad = table.gradient(&x);
        for (i, &gi) in grad.iter().enumerate() {
            let g = multilinear_gradient(&f, &x, i).unwrap();
            assert!((gi - g).abs() < 1e-12);
        }
        // Pair expectations recombine to the multilinear value.
        let e = table.expectations_over(&x, &[1, 4]);
        let (a, b) = (x[1], x[4]);
        let recombined = e[0] * (1.0 - a) * (1.0 - b)
            + e[1] * a * (1.0 - b)
            + e[2] * (1.0 - a) * b
            + e[3] * a * b;
        assert!((recombined - direct).abs() < 1e-12);
    }
}
