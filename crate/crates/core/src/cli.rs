//! JSON run configuration, command dispatch, and file outputs.
//!
//! A run is described by one JSON document naming the market (`v`, `Q`,
//! `N1`, `N2`, optional `mode`), solver settings, and command-specific
//! parameters. [`parse_config`] validates the document and runs the
//! standard-mode market checks immediately, so a config that parses is a
//! config that solves. [`dispatch`] executes one command against a parsed
//! config and writes machine-readable JSON/CSV outputs into a target
//! directory; schemas are pinned by golden tests and documented in the
//! README.

use std::fs::{self, File};
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::best_response::best_response;
use crate::counterexample::{piecewise_br, scan_equilibrium_interval};
use crate::distributions::Cdf;
use crate::dynamics::{equilibrium, extremal_equilibria, iterate, uniqueness_probe};
use crate::error::Error;
use crate::montecarlo::simulate_auctions;
use crate::payoff::{Bidder, MarketConfig};
use crate::tolerances::{DEFAULT_ITERATION_TOL, DEFAULT_MAX_ITER};
use crate::Result;

/// One distribution in a run configuration, tagged by `family`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum DistSpec {
    Power { k: f64, c: f64 },
    Exponential { rate: f64 },
    Lognormal { sigma: f64 },
    CappedLinear,
}

impl DistSpec {
    pub fn to_cdf(self) -> Result<Cdf> {
        match self {
            DistSpec::Power { k, c } => Cdf::power(k, c),
            DistSpec::Exponential { rate } => Cdf::exponential(rate),
            DistSpec::Lognormal { sigma } => Cdf::log_normal(sigma),
            DistSpec::CappedLinear => Ok(Cdf::capped_linear()),
        }
    }
}

/// Validation regime named in the config.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ModeSpec {
    #[default]
    Standard,
    Counterexample,
}

/// Iteration settings; both fields optional in JSON.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverParams {
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
}

fn default_tol() -> f64 {
    DEFAULT_ITERATION_TOL
}

fn default_max_iter() -> usize {
    DEFAULT_MAX_ITER
}

impl Default for SolverParams {
    fn default() -> Self {
        SolverParams {
            tol: DEFAULT_ITERATION_TOL,
            max_iter: DEFAULT_MAX_ITER,
        }
    }
}

/// A full parsed run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub v: f64,
    #[serde(rename = "Q")]
    pub q: DistSpec,
    #[serde(rename = "N1")]
    pub n1: DistSpec,
    #[serde(rename = "N2")]
    pub n2: DistSpec,
    #[serde(default)]
    pub mode: ModeSpec,
    #[serde(default)]
    pub solver: SolverParams,
    /// Seed bid `b2_0` for the dynamics.
    #[serde(default, rename = "b2_0")]
    pub b2_start: f64,
    /// Seeds for the uniqueness probe; defaults to five evenly spaced bids.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub starts: Option<Vec<f64>>,
    /// Monte Carlo sample count (validate).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    /// Monte Carlo RNG seed (validate).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Monte Carlo worker count (validate); results do not depend on it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shards: Option<usize>,
    /// Planned bids for validate; defaults to the computed equilibrium.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bids: Option<[f64; 2]>,
    /// Grid size for the br-curve command.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub br_curve_points: Option<usize>,
    /// Grid size for the counterexample interval scan.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan_points: Option<usize>,
}

impl RunConfig {
    /// The built-in config behind the `counterexample` command when no
    /// config file is given: `v = 1` and every distribution `min(x, 1)`.
    pub fn counterexample_default() -> Self {
        RunConfig {
            v: 1.0,
            q: DistSpec::CappedLinear,
            n1: DistSpec::CappedLinear,
            n2: DistSpec::CappedLinear,
            mode: ModeSpec::Counterexample,
            solver: SolverParams::default(),
            b2_start: 0.0,
            starts: None,
            n: None,
            seed: None,
            shards: None,
            bids: None,
            br_curve_points: None,
            scan_points: None,
        }
    }

    /// Builds and validates the market this config describes, running the
    /// standard-mode checks unless the config opts into counterexample mode.
    pub fn build_market(&self) -> Result<MarketConfig> {
        let q = self.q.to_cdf()?;
        let n1 = self.n1.to_cdf()?;
        let n2 = self.n2.to_cdf()?;
        match self.mode {
            ModeSpec::Standard => MarketConfig::standard(self.v, q, n1, n2),
            ModeSpec::Counterexample => MarketConfig::counterexample(self.v, q, n1, n2),
        }
    }
}

/// Parses and fully validates a JSON run configuration. Schema errors name
/// the offending key (via the JSON library's message); market assumption
/// violations surface as their named errors.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let config: RunConfig = serde_json::from_str(text).map_err(|e| Error::Config {
        message: e.to_string(),
    })?;
    if !config.solver.tol.is_finite() || config.solver.tol <= 0.0 {
        return Err(Error::InvalidParameter {
            what: "solver.tol",
            value: config.solver.tol,
        });
    }
    if config.solver.max_iter == 0 {
        return Err(Error::InvalidParameter {
            what: "solver.max_iter",
            value: 0.0,
        });
    }
    config.build_market()?;
    Ok(config)
}

/// The executable commands.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CliCommand {
    /// Compute the equilibrium and write `solve.json`.
    Solve,
    /// Record the full iteration trace (`trace.csv`, `iterate.json`).
    Iterate,
    /// Start-independence probe (`probe.json`).
    Probe,
    /// Extremal equilibria from seeds 0 and v (`extremal.json`).
    Extremal,
    /// Closed-form continuum scan (`counterexample.json`,
    /// `counterexample_br.csv`).
    Counterexample,
    /// Monte Carlo validation at the equilibrium or given bids
    /// (`validate.json`).
    Validate,
    /// Numeric best-response curve (`br_curve.csv`).
    BrCurve,
}

/// What a dispatch produced.
#[derive(Debug, Clone, PartialEq)]
pub struct DispatchReport {
    /// Files written, in creation order.
    pub files: Vec<PathBuf>,
    /// One human-readable line describing the outcome.
    pub summary: String,
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut file = File::create(path)?;
    serde_json::to_writer_pretty(&mut file, value).map_err(|e| Error::Io {
        message: e.to_string(),
    })?;
    writeln!(file)?;
    Ok(())
}

/// Runs one command against a parsed config, writing outputs into
/// `out_dir` (created if absent).
pub fn dispatch(command: CliCommand, config: &RunConfig, out_dir: &Path) -> Result<DispatchReport> {
    fs::create_dir_all(out_dir)?;
    let market = config.build_market()?;
    let tol = config.solver.tol;
    let max_iter = config.solver.max_iter;
    log::info!("dispatching {:?} into {}", command, out_dir.display());

    match command {
        CliCommand::Solve => {
            let report = equilibrium(&market, config.b2_start, tol, max_iter)?;
            let path = out_dir.join("solve.json");
            write_json(&path, &report)?;
            Ok(DispatchReport {
                summary: format!(
                    "equilibrium ({:.9}, {:.9}) in {} iterations",
                    report.b1_star, report.b2_star, report.iterations
                ),
                files: vec![path],
            })
        }
        CliCommand::Iterate => {
            let trace = iterate(&market, config.b2_start, tol, max_iter)?;
            let csv_path = out_dir.join("trace.csv");
            trace.write_csv(File::create(&csv_path)?)?;
            let json_path = out_dir.join("iterate.json");
            write_json(&json_path, &trace)?;
            let (b1, b2) = trace.limit();
            Ok(DispatchReport {
                summary: format!(
                    "{} rounds ({:?}, {:?}) ending at ({b1:.9}, {b2:.9})",
                    trace.steps.len(),
                    trace.direction,
                    trace.stop_reason
                ),
                files: vec![csv_path, json_path],
            })
        }
        CliCommand::Probe => {
            let default_starts = || {
                (0..5)
                    .map(|j| config.v * j as f64 / 4.0)
                    .collect::<Vec<f64>>()
            };
            let starts = config.starts.clone().unwrap_or_else(default_starts);
            let report = uniqueness_probe(&market, &starts, tol, max_iter)?;
            let path = out_dir.join("probe.json");
            write_json(&path, &report)?;
            Ok(DispatchReport {
                summary: format!(
                    "{} starts, max spread {:.3e}, pass = {}",
                    report.starts.len(),
                    report.max_spread,
                    report.pass
                ),
                files: vec![path],
            })
        }
        CliCommand::Extremal => {
            let report = extremal_equilibria(&market, tol, max_iter)?;
            let path = out_dir.join("extremal.json");
            write_json(&path, &report)?;
            Ok(DispatchReport {
                summary: format!(
                    "lower ({:.9}, {:.9}), upper ({:.9}, {:.9}), coincide = {}",
                    report.lower_pair[0],
                    report.lower_pair[1],
                    report.upper_pair[0],
                    report.upper_pair[1],
                    report.coincide
                ),
                files: vec![path],
            })
        }
        CliCommand::Counterexample => {
            let grid_points = config.scan_points.unwrap_or((config.v * 1e4) as usize);
            let scan = scan_equilibrium_interval(config.v, grid_points)?;
            #[derive(Serialize)]
            struct IntervalOut {
                v: f64,
                lo: Option<f64>,
                hi: Option<f64>,
                fixed_point_count: usize,
                grid_points: usize,
                low_resolution: bool,
            }
            let json_path = out_dir.join("counterexample.json");
            write_json(
                &json_path,
                &IntervalOut {
                    v: config.v,
                    lo: scan.interval.map(|(lo, _)| lo),
                    hi: scan.interval.map(|(_, hi)| hi),
                    fixed_point_count: scan.fixed_point_count,
                    grid_points: scan.grid_points,
                    low_resolution: scan.low_resolution,
                },
            )?;
            let curve_points = config.br_curve_points.unwrap_or(101).max(2);
            let csv_path = out_dir.join("counterexample_br.csv");
            let mut csv = File::create(&csv_path)?;
            writeln!(csv, "b_opp,br")?;
            for j in 0..curve_points {
                let b_opp = config.v * j as f64 / (curve_points - 1) as f64;
                writeln!(csv, "{},{}", b_opp, piecewise_br(config.v, b_opp))?;
            }
            let summary = match scan.interval {
                Some((lo, hi)) => format!(
                    "fixed-point interval [{lo:.4}, {hi:.4}] from {} of {} grid points",
                    scan.fixed_point_count, scan.grid_points
                ),
                None => format!("no fixed points on a {}-point grid", scan.grid_points),
            };
            Ok(DispatchReport {
                summary,
                files: vec![json_path, csv_path],
            })
        }
        CliCommand::Validate => {
            let [b1, b2] = match config.bids {
                Some(bids) => bids,
                None => {
                    let eq = equilibrium(&market, config.b2_start, tol, max_iter)?;
                    [eq.b1_star, eq.b2_star]
                }
            };
            let n = config.n.unwrap_or(1_000_000);
            let seed = config.seed.unwrap_or(0);
            let shards = config.shards.unwrap_or(1);
            let stats = simulate_auctions(&market, b1, b2, n, seed, shards)?;
            let path = out_dir.join("validate.json");
            write_json(&path, &stats)?;
            Ok(DispatchReport {
                summary: format!(
                    "{n} auctions at ({b1:.6}, {b2:.6}): buyer win rate {:.4}, mean cost {:.6}",
                    stats.buyer_win_rate, stats.mean_buyer_cost.value
                ),
                files: vec![path],
            })
        }
        CliCommand::BrCurve => {
            let points = config.br_curve_points.unwrap_or(101).max(2);
            let path = out_dir.join("br_curve.csv");
            let mut csv = File::create(&path)?;
            writeln!(csv, "b_opp,br")?;
            for j in 0..points {
                let b_opp = config.v * j as f64 / (points - 1) as f64;
                let br = best_response(&market, Bidder::One, b_opp)?.bid;
                writeln!(csv, "{},{}", b_opp, br)?;
            }
            Ok(DispatchReport {
                summary: format!("best-response curve over {points} opponent bids"),
                files: vec![path],
            })
        }
    }
}
