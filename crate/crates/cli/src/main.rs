// `!(a < b)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use magspec::{
    check_growth_hypotheses, check_hyp_w, count_end, essential_spectrum, fit_exponent, holonomy, in_j1a, landau_count,
    landau_level_set, morse_check, theorem1_bracket, weyl_integral, End, MorseOptions,
};
use serde::Serialize;

use crate::config::{Surface, SurfaceConfig};

/// Eigenvalue counts and semiclassical estimates for magnetic Laplacians on
/// funnel and cusp ends.
#[derive(Debug, Parser)]
#[command(name = "magspec", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Landau counting function N(mu, b).
    Nlandau {
        #[arg(long, allow_hyphen_values = true)]
        mu: f64,
        #[arg(long, allow_hyphen_values = true)]
        b: f64,
    },
    /// The level set S(beta) as a JSON list.
    Sset {
        #[arg(long, allow_hyphen_values = true)]
        beta: f64,
    },
    /// Dirichlet eigenvalues of one end below lambda.
    CountEnd {
        #[arg(long)]
        config: PathBuf,
        /// Zero-based index into the config's `ends`.
        #[arg(long)]
        end: usize,
        #[arg(long)]
        lambda: f64,
        /// Print the full result as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Landau-level integral summed over all ends.
    Weyl {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        lambda: f64,
    },
    /// CSV table of counts against the integral and its bracket.
    Compare {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        lambdas: LambdaList,
        /// Output file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit count ~ alpha * lambda^slope.
    Fit {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        lambdas: LambdaList,
    },
    /// Essential spectrum of a constant-field surface as JSON.
    Essential {
        #[arg(long)]
        config: PathBuf,
    },
    /// Compare the Morse operator's eigenvalues with S(beta).
    MorseCheck {
        #[arg(long, allow_hyphen_values = true)]
        beta: f64,
        /// Interior grid nodes.
        #[arg(long)]
        grid: Option<usize>,
        /// Window `LO,HI` in the log coordinate.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        window: Option<Vec<f64>>,
    },
    /// Holonomy of a constant-field cusp.
    Holonomy {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        end: usize,
    },
    /// Growth hypotheses on every end and the growth condition on omega.
    Hypcheck {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct LambdaList {
    /// Comma-separated thresholds.
    #[arg(long, value_delimiter = ',')]
    lambdas: Option<Vec<f64>>,
    /// Geometric sequence `START,FACTOR,COUNT`.
    #[arg(long, value_delimiter = ',')]
    lambda_geom: Option<Vec<f64>>,
}

impl LambdaList {
    fn values(&self) -> Result<Vec<f64>> {
        let values = match (&self.lambdas, &self.lambda_geom) {
            (Some(list), _) => list.clone(),
            (None, Some(g)) => {
                let [start, factor, count] = g[..] else {
                    bail!("--lambda-geom: expected START,FACTOR,COUNT, got {} value(s)", g.len());
                };
                if !(start > 0.0 && factor > 0.0 && count >= 1.0 && count.fract() == 0.0) {
                    bail!("--lambda-geom: need START > 0, FACTOR > 0 and a positive integer COUNT");
                }
                (0..count as u32).map(|i| start * factor.powi(i as i32)).collect()
            }
            (None, None) => bail!("--lambdas: no thresholds given"),
        };
        if values.is_empty() {
            bail!("--lambdas: no thresholds given");
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            bail!("--lambdas: {v} is not a finite number");
        }
        Ok(values)
    }
}

/// What a successful run reports back to the shell.
enum Status {
    Done,
    NotConverged,
}

fn load(path: &Path) -> Result<Surface> {
    let config = SurfaceConfig::load(path)?;
    config
        .validate()
        .with_context(|| format!("--config: invalid surface description in {}", path.display()))
}

fn json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("reports always serialise")
}

/// Dirichlet count summed over ends.
fn total_count(surface: &Surface, lambda: f64) -> Result<(u64, bool)> {
    let mut total = 0;
    let mut converged = true;
    for (i, end) in surface.ends.ends().iter().enumerate() {
        let r =
            count_end(end, lambda, &surface.mode).with_context(|| format!("--config: end {i} at lambda {lambda}"))?;
        total += r.count;
        converged &= r.converged;
    }
    Ok((total, converged))
}

#[derive(Serialize)]
struct CompareRow {
    lambda: f64,
    count: u64,
    weyl: f64,
    lower: f64,
    upper: f64,
    ratio: f64,
    converged: bool,
}

fn compare(surface: &Surface, lambdas: &[f64], out: &mut dyn Write) -> Result<Status> {
    let mut rows = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let (count, converged) = total_count(surface, lambda)?;
        let weyl = weyl_integral(&surface.ends, lambda, &surface.weyl).context("--config")?;
        let (lower, upper) =
            theorem1_bracket(&surface.ends, lambda, &surface.weyl).with_context(|| format!("--lambdas: {lambda}"))?;
        rows.push(CompareRow {
            lambda,
            count,
            weyl,
            lower,
            upper,
            ratio: count as f64 / weyl,
            converged,
        });
    }
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_writer(out);
    for row in &rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(if rows.iter().all(|r| r.converged) {
        Status::Done
    } else {
        Status::NotConverged
    })
}

#[derive(Serialize)]
struct EndGrowth {
    end: usize,
    h0: bool,
    h1_or_h2: bool,
    witness: f64,
}

#[derive(Serialize)]
struct HypReport {
    ends: Vec<EndGrowth>,
    hyp_w: Option<magspec::HypWReport>,
    notes: Vec<String>,
}

fn hypcheck(surface: &Surface) -> Result<HypReport> {
    let mut ends = Vec::new();
    for (i, end) in surface.ends.ends().iter().enumerate() {
        let t0 = end.t0();
        let t_end = t0 + surface.mode.t_max.min(40.0);
        let grid: Vec<f64> = (0..=2000).map(|k| t0 + (t_end - t0) * k as f64 / 2000.0).collect();
        let g = check_growth_hypotheses(end, &grid)?;
        ends.push(EndGrowth {
            end: i,
            h0: g.h0,
            h1_or_h2: g.h1_or_h2,
            witness: g.witness,
        });
    }
    let mut notes = Vec::new();
    let hyp_w = if surface.ends.ends().iter().all(|e| e.field().is_unbounded()) {
        Some(check_hyp_w(&surface.ends, &[10.0, 1e2, 1e3, 1e4], &[0.1, 0.5, 0.9])?)
    } else {
        notes.push("growth condition on omega skipped: some field is bounded".to_string());
        None
    };
    Ok(HypReport { ends, hyp_w, notes })
}

fn run(cli: Cli, out: &mut dyn Write) -> Result<Status> {
    let mut status = Status::Done;
    match cli.command {
        Command::Nlandau { mu, b } => {
            let n = landau_count(mu, b).map_err(|e| anyhow::anyhow!("--b: {e}"))?;
            writeln!(out, "{n}")?;
        }
        Command::Sset { beta } => {
            if !beta.is_finite() {
                bail!("--beta: must be finite");
            }
            writeln!(out, "{}", json(&landau_level_set(beta).levels))?;
        }
        Command::CountEnd {
            config,
            end,
            lambda,
            json: as_json,
        } => {
            let surface = load(&config)?;
            let e = surface.end(end)?;
            let r = count_end(e, lambda, &surface.mode).with_context(|| format!("--end {end} at --lambda {lambda}"))?;
            if as_json {
                writeln!(out, "{}", json(&r))?;
            } else {
                let modes = r
                    .mode_range
                    .filter(|m| !m.is_empty())
                    .map_or("none".to_string(), |m| format!("{}..={}", m.lo, m.hi));
                writeln!(
                    out,
                    "count={} lambda={} modes={modes} n={} t_hi={} converged={}",
                    r.count, r.lambda, r.n, r.t_hi, r.converged
                )?;
            }
            if !r.converged {
                status = Status::NotConverged;
            }
        }
        Command::Weyl { config, lambda } => {
            let surface = load(&config)?;
            let w = weyl_integral(&surface.ends, lambda, &surface.weyl).context("--config")?;
            writeln!(out, "{w}")?;
        }
        Command::Compare {
            config,
            lambdas,
            out: path,
        } => {
            let surface = load(&config)?;
            let lambdas = lambdas.values()?;
            status = match path {
                Some(p) => {
                    let mut file =
                        std::fs::File::create(&p).with_context(|| format!("--out: cannot create {}", p.display()))?;
                    compare(&surface, &lambdas, &mut file)?
                }
                None => compare(&surface, &lambdas, out)?,
            };
        }
        Command::Fit { config, lambdas } => {
            let surface = load(&config)?;
            let lambdas = lambdas.values()?;
            let mut samples = Vec::with_capacity(lambdas.len());
            for &lambda in &lambdas {
                let (count, converged) = total_count(&surface, lambda)?;
                if !converged {
                    status = Status::NotConverged;
                }
                samples.push((lambda, count as f64));
            }
            let fit = fit_exponent(&samples).context("--lambdas")?;
            writeln!(out, "{}", json(&fit))?;
        }
        Command::Essential { config } => {
            let surface = load(&config)?;
            let spectrum = essential_spectrum(&surface.ends).context("--config")?;
            writeln!(out, "{}", json(&spectrum))?;
        }
        Command::MorseCheck { beta, grid, window } => {
            let mut opts = MorseOptions::default();
            if let Some(n) = grid {
                opts.n = n;
            }
            if let Some(w) = window {
                let [lo, hi] = w[..] else {
                    bail!("--window: expected LO,HI, got {} value(s)", w.len());
                };
                if !(lo < hi) {
                    bail!("--window: need LO < HI, got {lo},{hi}");
                }
                opts.s_lo = lo;
                opts.s_hi = Some(hi);
            }
            let r = morse_check(beta, &opts).context("--beta")?;
            writeln!(out, "{}", json(&r))?;
            if !r.converged {
                status = Status::NotConverged;
            }
        }
        Command::Holonomy { config, end } => {
            let surface = load(&config)?;
            let End::Cusp(cusp) = surface.end(end)? else {
                bail!("--end: end {end} is a funnel; holonomy is defined for cusps");
            };
            let h = holonomy(cusp).with_context(|| format!("--end {end}"))?;
            #[derive(Serialize)]
            struct Out {
                holonomy: f64,
                in_j1a: bool,
            }
            writeln!(
                out,
                "{}",
                json(&Out {
                    holonomy: h,
                    in_j1a: in_j1a(h)
                })
            )?;
        }
        Command::Hypcheck { config } => {
            let surface = load(&config)?;
            let report = hypcheck(&surface).context("--config")?;
            writeln!(out, "{}", json(&report))?;
        }
    }
    Ok(status)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match run(cli, &mut out) {
        Ok(Status::Done) => ExitCode::SUCCESS,
        Ok(Status::NotConverged) => {
            eprintln!("warning: numerics did not converge; results are flagged");
            ExitCode::from(2)
        }
        Err(e) => {
            let _ = out.flush();
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
