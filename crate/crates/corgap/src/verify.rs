//! Named verification suites, one pass/fail line per check.
//!
//! Each suite bundles the invariants of one module family so they can be
//! re-run from the command line; `all` concatenates every suite.  Checks
//! are deterministic for a fixed seed, and results come back sorted by
//! check id so the output order never depends on execution order.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bounds::{damped_girth_sum, figure_rows, girth_sum, poisson_concavity_ratio};
use crate::clock::{
    activation_kolmogorov, activation_series, clock_lower_bound_check, pipage_round,
};
use crate::coverage::{certify_ratio, CoverageInstance, Objective};
use crate::error::{Error, Result};
use crate::extensions::{
    concave_extension, concave_extension_supergradient, marginal_extension, multilinear,
    multilinear_mc, ConcaveSeq, SetFunction,
};
use crate::gap::{battery, gap_search, weighted_vs_uniform_check};
use crate::identities::{check_binom_suite, check_sign_claims, check_simplification_chain};
use crate::matroid::{Matroid, Subset, WeightedRank};

/// Outcome of a single named check.
#[derive(Clone, Debug, serde::Serialize)]
pub struct Check {
    pub id: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    fn new(id: impl Into<String>, pass: bool, detail: impl Into<String>) -> Check {
        Check {
            id: id.into(),
            pass,
            detail: detail.into(),
        }
    }
}

/// The suite names accepted by [`run_suite`].
pub const SUITES: &[&str] = &[
    "identities",
    "monotonicity",
    "weighted",
    "clock",
    "pipage",
    "extensions",
    "direct-sum",
    "coverage",
    "all",
];

/// Runs one named suite (or `all`) and returns its checks sorted by id.
pub fn run_suite(suite: &str, seed: u64) -> Result<Vec<Check>> {
    let mut checks = match suite {
        "identities" => suite_identities(),
        "monotonicity" => suite_monotonicity()?,
        "weighted" => suite_weighted(seed)?,
        "clock" => suite_clock(seed)?,
        "pipage" => suite_pipage(seed)?,
        "extensions" => suite_extensions(seed)?,
        "direct-sum" => suite_direct_sum(seed)?,
        "coverage" => suite_coverage(seed)?,
        "all" => {
            let mut all = Vec::new();
            for name in SUITES.iter().filter(|&&s| s != "all") {
                all.extend(run_suite(name, seed)?);
            }
            all
        }
        other => {
            return Err(Error::input(format!(
                "unknown suite `{other}`; expected one of {}",
                SUITES.join(", ")
            )))
        }
    };
    checks.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(checks)
}

fn suite_identities() -> Vec<Check> {
    let mut checks = Vec::new();
    for report in check_binom_suite(30) {
        checks.push(Check::new(
            format!("identities/binom/{}", report.claim),
            report.pass,
            format!(
                "violation {:.2e} over {}",
                report.max_violation, report.range
            ),
        ));
    }
    for report in check_sign_claims(50) {
        checks.push(Check::new(
            format!("identities/sign/{}", report.claim),
            report.pass,
            format!("breach {:.2e} over {}", report.max_violation, report.range),
        ));
    }
    let chain = check_simplification_chain(9);
    checks.push(Check::new(
        format!("identities/chain/{}", chain.claim),
        chain.pass,
        format!("spread {:.2e} over {}", chain.max_violation, chain.range),
    ));
    checks
}

fn suite_monotonicity() -> Result<Vec<Check>> {
    let mut checks = Vec::new();

    // Damped series: nonincreasing in the rate, within 1e−12 per step.
    let mut max_rise = f64::NEG_INFINITY;
    for ell in 1..=10u32 {
        let mut prev = damped_girth_sum(ell as f64, ell)?;
        let mut lambda = ell as f64 + 0.5;
        while lambda <= ell as f64 + 30.0 {
            let cur = damped_girth_sum(lambda, ell)?;
            max_rise = max_rise.max(cur - prev);
            prev = cur;
            lambda += 0.5;
        }
    }
    checks.push(Check::new(
        "monotonicity/damped-sum-decreasing-in-rate",
        max_rise <= 1e-12,
        format!("max step rise {max_rise:.2e} (threshold ≤ 10, rate ≤ threshold+30)"),
    ));

    // Girth sum: nondecreasing in the girth at fixed rank.
    let mut max_drop = f64::NEG_INFINITY;
    for rho in 1..=30u32 {
        for gamma in 2..=rho {
            max_drop = max_drop.max(girth_sum(rho, gamma)? - girth_sum(rho, gamma + 1)?);
        }
    }
    checks.push(Check::new(
        "monotonicity/girth-sum-increasing-in-girth",
        max_drop <= 1e-12,
        format!("max step drop {max_drop:.2e} (rank ≤ 30)"),
    ));

    // Bound table shapes over the full (rank, girth) triangle.
    let rows = figure_rows(30, 31)?;
    let cell = |rho: u32, gamma: u32| {
        rows.iter()
            .find(|&&(r, g, _)| r == rho && g == gamma)
            .map(|&(_, _, b)| b)
    };
    let mut rank_rise = f64::NEG_INFINITY;
    let mut girth_drop = f64::NEG_INFINITY;
    for &(rho, gamma, b) in &rows {
        if let Some(prev) = cell(rho - 1, gamma) {
            rank_rise = rank_rise.max(b - prev);
        }
        if let Some(left) = cell(rho, gamma - 1) {
            girth_drop = girth_drop.max(left - b);
        }
    }
    checks.push(Check::new(
        "monotonicity/bound-nonincreasing-in-rank",
        rank_rise <= 1e-15,
        format!("max rise {rank_rise:.2e} along fixed-girth columns"),
    ));
    checks.push(Check::new(
        "monotonicity/bound-nondecreasing-in-girth",
        girth_drop <= 1e-15,
        format!("max drop {girth_drop:.2e} along fixed-rank rows"),
    ));

    let base = 1.0 - (-1.0f64).exp();
    let mut base_dev = 0.0f64;
    let mut min_margin = f64::INFINITY;
    let mut argmin = (0u32, 0u32);
    for &(rho, gamma, b) in &rows {
        if gamma == 2 {
            base_dev = base_dev.max((b - base).abs());
        } else if b - base < min_margin {
            min_margin = b - base;
            argmin = (rho, gamma);
        }
    }
    checks.push(Check::new(
        "monotonicity/universal-at-girth-two",
        base_dev == 0.0,
        format!("max deviation {base_dev:.2e} from 1 − 1/e"),
    ));
    // The margin over the universal constant is strictly positive past
    // girth 2; it shrinks like e^{−rank}, reaching ~5e−13 by rank 30.
    checks.push(Check::new(
        "monotonicity/bound-strictly-above-universal",
        min_margin > 0.0,
        format!(
            "min margin {min_margin:.2e} at rank {}, girth {}",
            argmin.0, argmin.1
        ),
    ));
    Ok(checks)
}

fn suite_weighted(seed: u64) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for (idx, (name, m)) in battery().into_iter().enumerate() {
        let check_seed = seed.wrapping_add(idx as u64);
        if m.n() <= 10 {
            let report = weighted_vs_uniform_check(&m, 6, check_seed)?;
            checks.push(Check::new(
                format!("weighted/{name}"),
                report.pass,
                format!(
                    "min margin {:.2e} over {} random weight vectors",
                    report.min_margin, report.trials
                ),
            ));
        } else {
            // Too large for the packaged comparison; run the same ratio
            // test directly with a lean search.
            let mut rng = ChaCha8Rng::seed_from_u64(check_seed);
            let base = gap_search(&WeightedRank::unit(m.clone()), 4, check_seed, 1e-6)?.ratio;
            let mut min_margin = f64::INFINITY;
            for _ in 0..2 {
                let w: Vec<f64> = (0..m.n()).map(|_| rng.random::<f64>()).collect();
                let wr = WeightedRank::new(m.clone(), w)?;
                let ratio = gap_search(&wr, 4, check_seed, 1e-6)?.ratio;
                min_margin = min_margin.min(ratio - base);
            }
            checks.push(Check::new(
                format!("weighted/{name}"),
                min_margin >= -1e-6,
                format!("min margin {min_margin:.2e} over 2 random weight vectors"),
            ));
        }
    }
    Ok(checks)
}

// The battery members used for clock checks, with a uniform point whose
// coordinate sum exceeds girth − 1 while staying in the polytope.
fn clock_instances() -> Vec<(&'static str, Matroid, Vec<f64>)> {
    battery()
        .into_iter()
        .filter(|(name, _)| matches!(*name, "partition-3x3-cap1" | "graphic-k4" | "union-2-2-4"))
        .map(|(name, m)| {
            let x = match name {
                "partition-3x3-cap1" => vec![2.0 / 9.0; 9],
                "graphic-k4" => vec![5.0 / 12.0; 6],
                _ => vec![0.2; 16],
            };
            (name, m, x)
        })
        .collect()
}

fn suite_clock(seed: u64) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for (idx, (name, m, x)) in clock_instances().into_iter().enumerate() {
        let report = clock_lower_bound_check(&m, &x, 100_000, seed.wrapping_add(idx as u64))?;
        checks.push(Check::new(
            format!("clock/expectation/{name}"),
            report.h_ok && report.g_ok,
            format!(
                "MC {:.5} vs bound {:.5} (3σ = {:.1e}); cap {:.6} ≥ {:.6}",
                report.h_mean,
                report.h_bound,
                3.0 * report.h_stderr,
                report.g_exact,
                report.g_bound
            ),
        ));
    }
    // Activation-time law against the closed-form CDF.
    let dist_a = activation_kolmogorov(&[2.0 / 9.0; 9], 1, 30_000, seed ^ 0xC10C)?;
    checks.push(Check::new(
        "clock/activation-cdf/threshold-one",
        dist_a < 0.015,
        format!("Kolmogorov distance {dist_a:.4} at 30000 traces"),
    ));
    let dist_b = activation_kolmogorov(&[5.0 / 12.0; 6], 2, 30_000, seed ^ 0xC20C)?;
    checks.push(Check::new(
        "clock/activation-cdf/threshold-two",
        dist_b < 0.015,
        format!("Kolmogorov distance {dist_b:.4} at 30000 traces"),
    ));
    Ok(checks)
}

// A random point in the unit cube with a positive integral coordinate sum.
fn integral_sum_point(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut y: Vec<f64> = (0..n).map(|_| rng.random()).collect();
    let sum: f64 = y.iter().sum();
    let target = sum.round().clamp(1.0, n as f64);
    let mut delta = target - sum;
    for v in y.iter_mut() {
        let step = if delta > 0.0 {
            delta.min(1.0 - *v)
        } else {
            delta.max(-*v)
        };
        *v += step;
        delta -= step;
    }
    y
}

fn suite_pipage(seed: u64) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9199);
    let mut worst_rise = f64::NEG_INFINITY;
    let mut worst_drift = 0.0f64;
    let mut all_binary = true;
    for _ in 0..30 {
        let n = rng.random_range(3..=8usize);
        let y = integral_sum_point(&mut rng, n);
        // The series is only directionally concave where the coordinate
        // sum is at least the threshold, so draw the threshold below it.
        let ell = rng.random_range(1..=y.iter().sum::<f64>().round() as u32);
        let f = |z: &[f64]| activation_series(z, ell).unwrap();
        let z = pipage_round(f, &y)?;
        all_binary &= z.iter().all(|&v| v == 0.0 || v == 1.0);
        worst_drift = worst_drift.max((z.iter().sum::<f64>() - y.iter().sum::<f64>()).abs());
        worst_rise = worst_rise.max(f(&z) - f(&y));
    }
    let mut checks = vec![
        Check::new(
            "pipage/output-binary-sum-preserved",
            all_binary && worst_drift <= 1e-9,
            format!("worst coordinate-sum drift {worst_drift:.2e} over 30 roundings"),
        ),
        Check::new(
            "pipage/never-raises-activation-series",
            worst_rise <= 1e-9,
            format!("worst objective rise {worst_rise:.2e} over 30 roundings"),
        ),
    ];
    let rejected = pipage_round(|_| 0.0, &[0.5, 0.25]).is_err();
    checks.push(Check::new(
        "pipage/rejects-non-integral-sum",
        rejected,
        "fractional total must be turned away".to_string(),
    ));
    Ok(checks)
}

fn suite_extensions(seed: u64) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xE47E);
    let k4 = Matroid::graphic(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)])?;
    let instances = [
        Matroid::uniform(2, 6)?,
        k4,
        Matroid::partition(&[(3, 2), (3, 1)])?,
    ];
    let mut sandwich_breach = f64::NEG_INFINITY;
    let mut linear_dev = 0.0f64;
    let mut super_breach = f64::NEG_INFINITY;
    let mut mc_sigmas = 0.0f64;
    for m in &instances {
        let n = m.n();
        let w: Vec<f64> = (0..n).map(|_| 0.2 + rng.random::<f64>()).collect();
        let wr = WeightedRank::new(m.clone(), w.clone())?;
        let f = SetFunction::weighted_rank(&wr);
        for _ in 0..100 {
            let x: Vec<f64> = (0..n).map(|_| rng.random()).collect();
            let fx = multilinear(&f, &x)?;
            let hat = concave_extension(&wr, &x)?;
            let star = marginal_extension(&f, &x)?;
            sandwich_breach = sandwich_breach.max(fx - hat).max(hat - star);

            // Scale into the polytope: the extension turns linear there.
            let alpha = m.polytope_scale(&x)?.min(1.0) * rng.random::<f64>();
            let inside: Vec<f64> = x.iter().map(|v| v * alpha).collect();
            let dot: f64 = inside.iter().zip(&w).map(|(a, b)| a * b).sum();
            linear_dev = linear_dev.max((concave_extension(&wr, &inside)? - dot).abs());
        }
        for _ in 0..60 {
            let x: Vec<f64> = (0..n).map(|_| rng.random()).collect();
            let y: Vec<f64> = (0..n).map(|_| rng.random()).collect();
            let gx = concave_extension_supergradient(&wr, &x)?;
            let lin: f64 = gx
                .iter()
                .zip(y.iter().zip(&x))
                .map(|(g, (yi, xi))| g * (yi - xi))
                .sum();
            super_breach =
                super_breach.max(concave_extension(&wr, &y)? - concave_extension(&wr, &x)? - lin);
        }
        for _ in 0..5 {
            let x: Vec<f64> = (0..n).map(|_| rng.random()).collect();
            let exact = multilinear(&f, &x)?;
            let mc = multilinear_mc(&f, &x, 20_000, rng.random())?;
            if mc.stderr > 0.0 {
                mc_sigmas = mc_sigmas.max((mc.mean - exact).abs() / mc.stderr);
            }
        }
    }
    Ok(vec![
        Check::new(
            "extensions/sandwich-multilinear-concave-marginal",
            sandwich_breach <= 1e-9,
            format!("worst breach {sandwich_breach:.2e} at 300 cube points"),
        ),
        Check::new(
            "extensions/concave-linear-inside-polytope",
            linear_dev <= 1e-9,
            format!("worst deviation {linear_dev:.2e} from the weight inner product"),
        ),
        Check::new(
            "extensions/supergradient-inequality",
            super_breach <= 1e-9,
            format!("worst first-order breach {super_breach:.2e} at 180 pairs"),
        ),
        Check::new(
            "extensions/monte-carlo-consistency",
            mc_sigmas <= 5.0,
            format!("largest deviation {mc_sigmas:.2} standard errors at 20000 samples"),
        ),
    ])
}

// A small loopless matroid on at most `n_max` elements.
fn random_small_matroid(rng: &mut ChaCha8Rng, n_max: usize) -> Matroid {
    let n = rng.random_range(2..=n_max);
    match rng.random_range(0..3u32) {
        0 => Matroid::uniform(rng.random_range(1..=n as u32), n).unwrap(),
        1 => {
            let first = rng.random_range(1..n);
            let rest = n - first;
            Matroid::partition(&[
                (first, rng.random_range(1..=first as u32)),
                (rest, rng.random_range(1..=rest as u32)),
            ])
            .unwrap()
        }
        _ => Matroid::free(n).unwrap(),
    }
}

fn suite_direct_sum(seed: u64) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xD5);
    let mut worst = 0.0f64;
    let mut pairs = 0usize;
    while pairs < 3 {
        let a = random_small_matroid(&mut rng, 6);
        let b = random_small_matroid(&mut rng, 6);
        if a.rank() == 0 || b.rank() == 0 {
            continue;
        }
        pairs += 1;
        let seed_pair = seed.wrapping_add(pairs as u64);
        let ga = gap_search(&WeightedRank::unit(a.clone()), 32, seed_pair, 1e-8)?.ratio;
        let gb = gap_search(&WeightedRank::unit(b.clone()), 32, seed_pair, 1e-8)?.ratio;
        let sum = Matroid::direct_sum(vec![a, b])?;
        let gs = gap_search(&WeightedRank::unit(sum), 32, seed_pair, 1e-8)?.ratio;
        worst = worst.max((gs - ga.min(gb)).abs());
    }
    Ok(vec![Check::new(
        "direct-sum/gap-is-min-of-parts",
        worst <= 1e-4,
        format!("max deviation {worst:.2e} over 3 random pairs"),
    )])
}

fn suite_coverage(seed: u64) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xC0FE);
    let mut checks = Vec::new();

    // Random mixed instances must clear their certified ratio.
    let mut worst_slack = f64::INFINITY;
    let mut all_pass = true;
    for _ in 0..5 {
        let inst = random_coverage_instance(&mut rng);
        let report = certify_ratio(&inst)?;
        all_pass &= report.pass;
        worst_slack = worst_slack.min(report.achieved - report.min_alpha * report.opt);
    }
    checks.push(Check::new(
        "coverage/certified-on-random-instances",
        all_pass && worst_slack >= -1e-6,
        format!("min slack {worst_slack:.2e} over 5 instances"),
    ));

    // Plain maximum coverage: the proven factor is 1 − 1/e.
    let supports = [0b011011u32, 0b101101, 0b110110];
    let objectives = supports
        .iter()
        .map(|&bits| Objective::Coverage {
            support: Subset::from_bits(bits),
            weight: 1.0,
            phi: ConcaveSeq::truncated_linear(1),
        })
        .collect();
    let inst = CoverageInstance::new(Matroid::uniform(2, 6)?, objectives)?;
    let report = certify_ratio(&inst)?;
    let e_bound = 1.0 - (-1.0f64).exp();
    checks.push(Check::new(
        "coverage/max-coverage-factor",
        report.pass && (report.min_alpha - e_bound).abs() <= 1e-6,
        format!(
            "achieved {:.4} ≥ {:.6}·{:.4}",
            report.achieved, report.min_alpha, report.opt
        ),
    ));

    // A single modular term is solved exactly.
    let w: Vec<f64> = (0..5).map(|_| rng.random::<f64>()).collect();
    let term = WeightedRank::new(Matroid::free(5)?, w)?;
    let inst = CoverageInstance::new(Matroid::uniform(2, 5)?, vec![Objective::Rank(term)])?;
    let report = certify_ratio(&inst)?;
    checks.push(Check::new(
        "coverage/modular-term-exact",
        (report.achieved - report.opt).abs() <= 1e-9,
        format!(
            "achieved {:.6} vs optimum {:.6}",
            report.achieved, report.opt
        ),
    ));

    // Poisson concavity ratio of the 1-covering curve.
    let alpha = poisson_concavity_ratio(&ConcaveSeq::truncated_linear(1), 50.0, 2000)?;
    checks.push(Check::new(
        "coverage/poisson-curve-single-level",
        (alpha - e_bound).abs() <= 1e-6,
        format!("infimum {alpha:.8} vs 1 − 1/e"),
    ));
    Ok(checks)
}

fn random_coverage_instance(rng: &mut ChaCha8Rng) -> CoverageInstance {
    let n = rng.random_range(5..=7usize);
    let constraint = random_small_matroid(rng, n);
    let n = constraint.n();
    let terms = rng.random_range(1..=3usize);
    let objectives = (0..terms)
        .map(|_| {
            if rng.random::<f64>() < 0.5 {
                let inner = Matroid::uniform(rng.random_range(1..=n as u32), n).unwrap();
                let w: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
                Objective::Rank(WeightedRank::new(inner, w).unwrap())
            } else {
                let mut bits = rng.random::<u32>() & ((1 << n) - 1);
                if bits == 0 {
                    bits = 1;
                }
                Objective::Coverage {
                    support: Subset::from_bits(bits),
                    weight: 0.2 + rng.random::<f64>(),
                    phi: ConcaveSeq::truncated_linear(rng.random_range(1..=3)),
                }
            }
        })
        .collect();
    CoverageInstance::new(constraint, objectives).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_suite_is_rejected() {
        assert!(matches!(run_suite("nope", 1), Err(Error::Input(_))));
    }

    #[test]
    fn deterministic_for_a_fixed_seed() {
        let a = run_suite("pipage", 7).unwrap();
        let b = run_suite("pipage", 7).unwrap();
        let render = |cs: &[Check]| {
            cs.iter()
                .map(|c| format!("{}|{}|{}", c.id, c.pass, c.detail))
                .collect::<Vec<_>>()
                .join("\n")
        };
        assert_eq!(render(&a), render(&b));
    }

    #[test]
    fn identities_and_monotonicity_pass() {
        assert!(suite_identities().iter().all(|c| c.pass));
        let checks = suite_monotonicity().unwrap();
        assert!(checks.iter().all(|c| c.pass), "{checks:?}");
    }

    #[test]
    fn seeded_suites_pass_under_default_seed() {
        for suite in [
            "weighted",
            "clock",
            "pipage",
            "extensions",
            "direct-sum",
            "coverage",
        ] {
            let checks = run_suite(suite, 42).unwrap();
            assert!(!checks.is_empty());
            for c in &checks {
                assert!(c.pass, "{}: {}", c.id, c.detail);
            }
            // Sorted output.
            let mut ids: Vec<&String> = checks.iter().map(|c| &c.id).collect();
            let sorted = {
                let mut s = ids.clone();
                s.sort();
                s
            };
            assert_eq!(ids.len(), sorted.len());
            ids.sort();
            assert_eq!(ids, sorted);
        }
    }

    #[test]
    fn all_concatenates_every_suite() {
        let all = run_suite("all", 42).unwrap();
        for prefix in [
            "identities/",
            "monotonicity/",
            "weighted/",
            "clock/",
            "pipage/",
            "extensions/",
            "direct-sum/",
            "coverage/",
        ] {
            assert!(
                all.iter().any(|c| c.id.starts_with(prefix)),
                "missing {prefix}"
            );
        }
        let mut ids: Vec<&String> = all.iter().map(|c| &c.id).collect();
        let mut sorted = ids.clone();
        sorted.sort();
        assert_eq!(ids, sorted);
        ids.dedup();
        assert_eq!(ids.len(), all.len(), "duplicate check ids");
    }
}
