//! Command-line frontend: bound tables, gap searches, verification suites,
//! and figure-data regeneration, with machine-readable output.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use corgap::bounds::{
    correlation_gap_lower_bound, figure_rows, upper_bound_uniform_padding, upper_bound_union,
};
use corgap::coverage::{certify_ratio, maximize_tilde_f, round_solution, InstanceSpec};
use corgap::extensions::{multilinear_mc, SetFunction};
use corgap::gap::{gap_search, DEFAULT_RESTARTS, DEFAULT_TOL};
use corgap::matroid::{Matroid, WeightedRank, WeightsSpec};
use corgap::verify::run_suite;
use corgap::{Error, Result};

#[derive(Parser)]
#[command(
    name = "corgap",
    version,
    about = "Correlation-gap bounds, searches, and verification for matroid rank functions"
)]
struct RunConfig {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
enum Format {
    #[default]
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Print the lower bound and both upper bounds for a rank/girth pair.
    Bound {
        /// Matroid rank (at least 1).
        #[arg(long)]
        rank: u32,
        /// Matroid girth (between 2 and rank+1).
        #[arg(long)]
        girth: u32,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// Emit the full (rank, girth, bound) table as CSV.
    Figure1 {
        #[arg(long, default_value_t = 30)]
        rank_max: u32,
        #[arg(long, default_value_t = 31)]
        girth_max: u32,
        /// Write to this path instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Search for the correlation gap of a (weighted) matroid rank function.
    Gap {
        /// Matroid description (JSON file).
        #[arg(long)]
        matroid: PathBuf,
        /// Optional weight vector (JSON file with a "weights" array).
        #[arg(long)]
        weights: Option<PathBuf>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_RESTARTS)]
        restarts: usize,
        /// When positive, cross-check the ratio's numerator by Monte Carlo
        /// with this many samples.
        #[arg(long, default_value_t = 0)]
        samples: u64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a named verification suite, one line per check.
    Verify {
        /// identities | monotonicity | weighted | clock | pipage |
        /// extensions | direct-sum | coverage | all
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Maximize a sum of rank and coverage objectives under a matroid
    /// constraint, round, and certify where instance size permits.
    Maximize {
        /// Instance description (JSON file).
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let config = RunConfig::parse();
    match run(config.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Input(_) | Error::Parse(_) => 2,
                Error::Capacity(_) => 3,
                Error::Io(_) => 1,
            })
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path)
        .map_err(|e| Error::Input(format!("cannot read {}: {e}", path.display())))
}

fn run(command: Command) -> Result<bool> {
    match command {
        Command::Bound {
            rank,
            girth,
            format,
        } => cmd_bound(rank, girth, format),
        Command::Figure1 {
            rank_max,
            girth_max,
            out,
        } => cmd_figure1(rank_max, girth_max, out),
        Command::Gap {
            matroid,
            weights,
            seed,
            restarts,
            samples,
            format,
            out,
        } => cmd_gap(
            &matroid,
            weights.as_deref(),
            seed,
            restarts,
            samples,
            format,
            out,
        ),
        Command::Verify { suite, seed } => cmd_verify(&suite, seed),
        Command::Maximize {
            instance,
            format,
            out,
        } => cmd_maximize(&instance, format, out),
    }
}

fn cmd_bound(rank: u32, girth: u32, format: Format) -> Result<bool> {
    let lower = correlation_gap_lower_bound(rank, girth)?;
    let padding = upper_bound_uniform_padding(rank, girth)?;
    let union = upper_bound_union(rank, girth)?;
    let text = match format {
        Format::Text => format!(
            "rank {rank}, girth {girth}\n\
             lower bound                    {lower:.10}\n\
             upper bound, uniform padding   {padding:.10}\n\
             upper bound, union threshold   {:.10}\n\
             upper bound, union girth       {:.10}\n",
            union.ell_form, union.girth_form
        ),
        Format::Json => format!(
            "{}\n",
            serde_json::json!({
                "rank": rank,
                "girth": girth,
                "lower": lower,
                "upper_padding": padding,
                "upper_union": union,
            })
        ),
    };
    emit(None, &text)?;
    Ok(true)
}

fn cmd_figure1(rank_max: u32, girth_max: u32, out: Option<PathBuf>) -> Result<bool> {
    let mut csv = String::from("rho,gamma,bound\n");
    for (rho, gamma, bound) in figure_rows(rank_max, girth_max)? {
        csv.push_str(&format!("{rho},{gamma},{bound:.9e}\n"));
    }
    emit(out.as_deref(), &csv)?;
    Ok(true)
}

fn cmd_gap(
    matroid: &Path,
    weights: Option<&Path>,
    seed: u64,
    restarts: usize,
    samples: u64,
    format: Format,
    out: Option<PathBuf>,
) -> Result<bool> {
    let m = Matroid::from_json(&read_file(matroid)?)?;
    let wr = match weights {
        Some(path) => WeightedRank::new(m, WeightsSpec::from_json(&read_file(path)?)?.weights)?,
        None => WeightedRank::unit(m),
    };
    let estimate = gap_search(&wr, restarts, seed, DEFAULT_TOL)?;
    let mc = if samples > 0 {
        Some(multilinear_mc(
            &SetFunction::weighted_rank(&wr),
            &estimate.x_star,
            samples,
            seed,
        )?)
    } else {
        None
    };
    let text = match format {
        Format::Json => format!(
            "{}\n",
            serde_json::json!({
                "estimate": estimate,
                "mc_cross_check": mc,
            })
        ),
        Format::Text => {
            let mut t = format!(
                "ratio        {:.10}\nconverged    {}\nrestarts     {}\ntightness    {:.2e}\npoint        {:?}\n",
                estimate.ratio,
                estimate.converged,
                estimate.restarts_used,
                estimate.support_tightness,
                &estimate.x_star[..],
            );
            if let Some(mc) = mc {
                t.push_str(&format!(
                    "mc check     {:.6} ± {:.2e} ({} samples)\n",
                    mc.mean, mc.stderr, mc.samples
                ));
            }
            t
        }
    };
    emit(out.as_deref(), &text)?;
    Ok(true)
}

fn cmd_verify(suite: &str, seed: u64) -> Result<bool> {
    let checks = run_suite(suite, seed)?;
    let mut all_pass = true;
    let mut text = String::new();
    for check in &checks {
        all_pass &= check.pass;
        text.push_str(&format!(
            "{}  {}  {}\n",
            if check.pass { "PASS" } else { "FAIL" },
            check.id,
            check.detail
        ));
    }
    emit(None, &text)?;
    Ok(all_pass)
}

fn cmd_maximize(instance: &Path, format: Format, out: Option<PathBuf>) -> Result<bool> {
    let inst = InstanceSpec::from_json(&read_file(instance)?)?.build()?;
    let x = maximize_tilde_f(&inst, 800, 1e-9)?;
    let relaxation_value = inst.tilde(&x)?;
    let rounded = round_solution(&inst, &x)?;
    let rounded_value = inst.value(rounded)?;
    // Exact certification enumerates the independent sets, so only at
    // desk scale.
    let certificate = if inst.n() <= 10 {
        Some(certify_ratio(&inst)?)
    } else {
        None
    };
    let indices: Vec<usize> = rounded.iter().collect();
    let text = match format {
        Format::Json => format!(
            "{}\n",
            serde_json::json!({
                "relaxation_point": x,
                "relaxation_value": relaxation_value,
                "rounded_set": indices,
                "rounded_value": rounded_value,
                "certificate": certificate,
            })
        ),
        Format::Text => {
            let mut t = format!(
                "relaxation value   {relaxation_value:.10}\nrounded set        {indices:?}\nrounded value      {rounded_value:.10}\n"
            );
            if let Some(c) = &certificate {
                t.push_str(&format!(
                    "certified          {} (achieved {:.6} ≥ {:.6}·{:.6})\n",
                    c.pass, c.achieved, c.min_alpha, c.opt
                ));
            }
            t
        }
    };
    emit(out.as_deref(), &text)?;
    Ok(true)
}
