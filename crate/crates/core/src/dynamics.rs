//! Sequential best-response dynamics and equilibrium detection.
//!
//! Starting from a seed bid `b2_0` for agent 2, the dynamics alternate
//! exact best responses in a fixed serial order: agent 1 responds to agent
//! 2's last bid, then agent 2 responds to agent 1's new bid. Under the
//! standard-mode assumptions both coordinate sequences are monotone and
//! bounded, hence convergent, and the limit pair is a mutual best response;
//! moreover the limit does not depend on the seed, so equilibrium is unique.
//! This module runs the iteration, classifies the trajectory, verifies the
//! limit, and probes start-independence and the extremal equilibria reached
//! from the seeds `0` and `v`.

use std::io::Write;

use serde::Serialize;

use crate::best_response::best_response;
use crate::error::Error;
use crate::payoff::{foc_residual, Bidder, MarketConfig};
use crate::tolerances::{
    EQUILIBRIUM_CHECK_FACTOR, TRACE_MONOTONE_SLACK, UNIQUENESS_SPREAD_FACTOR,
};
use crate::Result;

/// Monotonicity class of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Nondecreasing,
    Nonincreasing,
    Constant,
}

/// Why the iteration stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// Both coordinates moved less than the tolerance over a full round.
    Converged,
    /// The iteration budget ran out first; not an error, but the recorded
    /// bids carry no equilibrium claim.
    MaxIter,
}

/// One full round of the dynamics: `b1 = BR1(previous b2)`, then
/// `b2 = BR2(b1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IterationStep {
    pub k: usize,
    pub b1: f64,
    pub b2: f64,
}

/// A complete recorded run of the dynamics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationTrace {
    /// The seed `b2_0`.
    pub start: f64,
    pub steps: Vec<IterationStep>,
    pub direction: Direction,
    pub stop_reason: StopReason,
}

impl IterationTrace {
    /// Final `(b1, b2)` pair of the run.
    pub fn limit(&self) -> (f64, f64) {
        let last = self.steps.last().expect("trace has at least one step");
        (last.b1, last.b2)
    }

    /// Writes the trace as CSV with header `k,b1,b2`, one row per round.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "k,b1,b2")?;
        for s in &self.steps {
            writeln!(out, "{},{},{}", s.k, s.b1, s.b2)?;
        }
        Ok(())
    }
}

/// A converged (or truncated) equilibrium computation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumReport {
    pub b1_star: f64,
    pub b2_star: f64,
    /// First-order-condition residuals at the limit pair, one per agent.
    pub foc_residuals: [f64; 2],
    /// Rounds actually run.
    pub iterations: usize,
    pub trace: IterationTrace,
}

/// Start-independence probe; see [`uniqueness_probe`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniquenessReport {
    /// The seeds, sorted ascending; `limits` is aligned with this order.
    pub starts: Vec<f64>,
    /// Limit pair reached from each seed.
    pub limits: Vec<[f64; 2]>,
    /// Largest pairwise distance between limit pairs, in the max norm.
    pub max_spread: f64,
    /// Whether the spread is below `100 * tol`.
    pub pass: bool,
    pub tol: f64,
}

/// Least and greatest reachable equilibria; see [`extremal_equilibria`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtremalReport {
    /// Limit of the nondecreasing run seeded at `b2_0 = 0`.
    pub lower_pair: [f64; 2],
    /// Limit of the nonincreasing run seeded at `b2_0 = v`.
    pub upper_pair: [f64; 2],
    /// Max-norm distance between the two pairs.
    pub spread: f64,
    /// Whether the pairs agree within `100 * tol`; always true in standard
    /// mode, and false exactly when multiple equilibria are reachable.
    pub coincide: bool,
}

fn check_solver_params(tol: f64, max_iter: usize) -> Result<()> {
    if !tol.is_finite() || tol <= 0.0 {
        return Err(Error::InvalidParameter {
            what: "iteration tolerance tol",
            value: tol,
        });
    }
    if max_iter == 0 {
        return Err(Error::InvalidParameter {
            what: "max_iter",
            value: 0.0,
        });
    }
    Ok(())
}

/// Runs the sequential dynamics from `b2_start` until both coordinates move
/// less than `tol` over a round, or `max_iter` rounds elapse.
pub fn iterate(
    cfg: &MarketConfig,
    b2_start: f64,
    tol: f64,
    max_iter: usize,
) -> Result<IterationTrace> {
    check_solver_params(tol, max_iter)?;
    let v = cfg.v();
    if !b2_start.is_finite() || !(0.0..=v).contains(&b2_start) {
        return Err(Error::OutOfRangeBid {
            bid: b2_start,
            v,
        });
    }
    let mut steps: Vec<IterationStep> = Vec::new();
    let mut prev_b2 = b2_start;
    let mut stop_reason = StopReason::MaxIter;
    for k in 1..=max_iter {
        let b1 = best_response(cfg, Bidder::One, prev_b2)?.bid;
        let b2 = best_response(cfg, Bidder::Two, b1)?.bid;
        let converged = match steps.last() {
            Some(last) => (b1 - last.b1).abs() < tol && (b2 - last.b2).abs() < tol,
            None => false,
        };
        steps.push(IterationStep { k, b1, b2 });
        prev_b2 = b2;
        if converged {
            stop_reason = StopReason::Converged;
            break;
        }
    }
    let direction = classify_direction(b2_start, &steps, TRACE_MONOTONE_SLACK * v.max(1.0));
    Ok(IterationTrace {
        start: b2_start,
        steps,
        direction,
        stop_reason,
    })
}

/// Classifies both coordinate sequences jointly. Agent 2's sequence includes
/// the seed, since its first move fixes the direction of the whole run; a
/// mixed trajectory (impossible under the standard assumptions) falls back
/// to the sign of that first move.
fn classify_direction(start: f64, steps: &[IterationStep], slack: f64) -> Direction {
    let b1: Vec<f64> = steps.iter().map(|s| s.b1).collect();
    let mut b2: Vec<f64> = Vec::with_capacity(steps.len() + 1);
    b2.push(start);
    b2.extend(steps.iter().map(|s| s.b2));

    let constant = |xs: &[f64]| xs.windows(2).all(|w| (w[1] - w[0]).abs() <= slack);
    let nondecreasing = |xs: &[f64]| xs.windows(2).all(|w| w[1] - w[0] >= -slack);
    let nonincreasing = |xs: &[f64]| xs.windows(2).all(|w| w[1] - w[0] <= slack);

    if constant(&b1) && constant(&b2) {
        Direction::Constant
    } else if nondecreasing(&b1) && nondecreasing(&b2) {
        Direction::Nondecreasing
    } else if nonincreasing(&b1) && nonincreasing(&b2) {
        Direction::Nonincreasing
    } else if b2.get(1).copied().unwrap_or(start) >= start {
        Direction::Nondecreasing
    } else {
        Direction::Nonincreasing
    }
}

/// Runs [`iterate`] and, when it converged, verifies the limit is a mutual
/// best response: recomputing each agent's best response at the limit must
/// move its bid by less than `10 * tol`. A truncated run is returned as-is,
/// with no equilibrium claim attached.
pub fn equilibrium(
    cfg: &MarketConfig,
    b2_start: f64,
    tol: f64,
    max_iter: usize,
) -> Result<EquilibriumReport> {
    let trace = iterate(cfg, b2_start, tol, max_iter)?;
    let (b1_star, b2_star) = trace.limit();
    if trace.stop_reason == StopReason::Converged {
        let br1 = best_response(cfg, Bidder::One, b2_star)?.bid;
        let br2 = best_response(cfg, Bidder::Two, b1_star)?.bid;
        let allowed = EQUILIBRIUM_CHECK_FACTOR * tol;
        if (br1 - b1_star).abs() >= allowed || (br2 - b2_star).abs() >= allowed {
            return Err(Error::NotAnEquilibrium {
                b1: b1_star,
                b2: b2_star,
                br1,
                br2,
            });
        }
    }
    let foc_residuals = [
        foc_residual(cfg, Bidder::One, b1_star, b2_star).unwrap_or(f64::NAN),
        foc_residual(cfg, Bidder::Two, b2_star, b1_star).unwrap_or(f64::NAN),
    ];
    Ok(EquilibriumReport {
        b1_star,
        b2_star,
        foc_residuals,
        iterations: trace.steps.len(),
        trace,
    })
}

/// Runs [`equilibrium`] from every seed in `starts` and measures how far
/// apart the limit pairs land. Under the standard assumptions the limit is
/// seed-independent and the spread collapses to solver noise; in
/// counterexample mode distinct seeds inside the fixed-point continuum stay
/// where they are, and the probe reports the spread honestly with
/// `pass = false`.
pub fn uniqueness_probe(
    cfg: &MarketConfig,
    starts: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<UniquenessReport> {
    if starts.len() < 2 {
        return Err(Error::TooFewStarts { got: starts.len() });
    }
    let mut sorted = starts.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("NaN start"));
    let mut limits = Vec::with_capacity(sorted.len());
    for &s in &sorted {
        let report = equilibrium(cfg, s, tol, max_iter)?;
        limits.push([report.b1_star, report.b2_star]);
    }
    let mut max_spread: f64 = 0.0;
    for i in 0..limits.len() {
        for j in i + 1..limits.len() {
            let d = (limits[i][0] - limits[j][0])
                .abs()
                .max((limits[i][1] - limits[j][1]).abs());
            max_spread = max_spread.max(d);
        }
    }
    Ok(UniquenessReport {
        starts: sorted,
        limits,
        max_spread,
        pass: max_spread < UNIQUENESS_SPREAD_FACTOR * tol,
        tol,
    })
}

/// Runs the dynamics from the extreme seeds `b2_0 = 0` (a nondecreasing
/// trajectory climbing to the least reachable equilibrium) and `b2_0 = v`
/// (nonincreasing, to the greatest). In standard mode the two limits
/// coincide; in counterexample mode they bracket the equilibrium continuum.
pub fn extremal_equilibria(cfg: &MarketConfig, tol: f64, max_iter: usize) -> Result<ExtremalReport> {
    let lower = equilibrium(cfg, 0.0, tol, max_iter)?;
    let upper = equilibrium(cfg, cfg.v(), tol, max_iter)?;
    let lower_pair = [lower.b1_star, lower.b2_star];
    let upper_pair = [upper.b1_star, upper.b2_star];
    let spread = (lower_pair[0] - upper_pair[0])
        .abs()
        .max((lower_pair[1] - upper_pair[1]).abs());
    Ok(ExtremalReport {
        lower_pair,
        upper_pair,
        spread,
        coincide: spread < UNIQUENESS_SPREAD_FACTOR * tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::Cdf;
    use crate::tolerances::{DEFAULT_ITERATION_TOL, DEFAULT_MAX_ITER};

    fn decoupled_market() -> MarketConfig {
        // the noise support [0, 1e-6] makes the faced opponent CDF one at
        // every relevant bid, so each agent's problem reduces to the
        // opponent-absent argmax of (1 - b) b at 0.5 regardless of the twin
        MarketConfig::standard(
            1.0,
            Cdf::power(1.0, 1.0).unwrap(),
            Cdf::power(1.0, 1e-6).unwrap(),
            Cdf::power(1.0, 1e-6).unwrap(),
        )
        .unwrap()
    }

    fn lognormal_market() -> MarketConfig {
        MarketConfig::standard(
            1.0,
            Cdf::exponential(2.0).unwrap(),
            Cdf::log_normal(0.3).unwrap(),
            Cdf::log_normal(0.3).unwrap(),
        )
        .unwrap()
    }

    fn capped_market(v: f64) -> MarketConfig {
        MarketConfig::counterexample(
            v,
            Cdf::capped_linear(),
            Cdf::capped_linear(),
            Cdf::capped_linear(),
        )
        .unwrap()
    }

    #[test]
    fn decoupled_market_converges_in_two_rounds() {
        let trace = iterate(&decoupled_market(), 0.3, 1e-9, 100).unwrap();
        assert_eq!(trace.stop_reason, StopReason::Converged);
        assert_eq!(trace.steps.len(), 2);
        let (b1, b2) = trace.limit();
        assert!((b1 - 0.5).abs() < 1e-9, "b1 = {b1}");
        assert!((b2 - 0.5).abs() < 1e-9, "b2 = {b2}");
    }

    #[test]
    fn seeding_at_the_limit_gives_a_constant_trace() {
        let cfg = lognormal_market();
        let eq = equilibrium(&cfg, 0.2, 1e-9, DEFAULT_MAX_ITER).unwrap();
        let trace = iterate(&cfg, eq.b2_star, 1e-9, 100).unwrap();
        assert_eq!(trace.direction, Direction::Constant);
        assert!(trace.steps.len() <= 2, "{} steps", trace.steps.len());
    }

    #[test]
    fn trajectories_from_extreme_seeds_are_monotone() {
        let cfg = lognormal_market();
        let up = iterate(&cfg, 0.0, 1e-9, DEFAULT_MAX_ITER).unwrap();
        assert_eq!(up.stop_reason, StopReason::Converged);
        assert_eq!(up.direction, Direction::Nondecreasing);
        let down = iterate(&cfg, 1.0, 1e-9, DEFAULT_MAX_ITER).unwrap();
        assert_eq!(down.stop_reason, StopReason::Converged);
        assert_eq!(down.direction, Direction::Nonincreasing);
        let (u1, u2) = up.limit();
        let (d1, d2) = down.limit();
        assert!((u1 - d1).abs() < 1e-7 && (u2 - d2).abs() < 1e-7);
    }

    #[test]
    fn max_iter_truncation_is_not_an_error() {
        let cfg = lognormal_market();
        let trace = iterate(&cfg, 0.0, 1e-9, 1).unwrap();
        assert_eq!(trace.stop_reason, StopReason::MaxIter);
        assert_eq!(trace.steps.len(), 1);
        // equilibrium passes the truncated run through without a claim
        let report = equilibrium(&cfg, 0.0, 1e-9, 1).unwrap();
        assert_eq!(report.trace.stop_reason, StopReason::MaxIter);
        assert_eq!(report.iterations, 1);
    }

    #[test]
    fn counterexample_seed_inside_the_continuum_stays_put() {
        let report = equilibrium(&capped_market(1.0), 0.6, 1e-9, 100).unwrap();
        assert!((report.b1_star - 0.6).abs() < 1e-9, "{}", report.b1_star);
        assert!((report.b2_star - 0.6).abs() < 1e-9, "{}", report.b2_star);
        assert!(report.iterations <= 3);
    }

    #[test]
    fn equilibrium_residuals_are_small_in_standard_mode() {
        let report = equilibrium(&lognormal_market(), 0.1, 1e-9, DEFAULT_MAX_ITER).unwrap();
        assert!(report.foc_residuals[0].abs() < 1e-6);
        assert!(report.foc_residuals[1].abs() < 1e-6);
        assert_eq!(report.trace.stop_reason, StopReason::Converged);
    }

    #[test]
    fn one_more_round_barely_moves_a_converged_pair() {
        let cfg = lognormal_market();
        let eq = equilibrium(&cfg, 0.7, DEFAULT_ITERATION_TOL, DEFAULT_MAX_ITER).unwrap();
        let b1 = best_response(&cfg, Bidder::One, eq.b2_star).unwrap().bid;
        let b2 = best_response(&cfg, Bidder::Two, b1).unwrap().bid;
        assert!((b1 - eq.b1_star).abs() < 10.0 * DEFAULT_ITERATION_TOL);
        assert!((b2 - eq.b2_star).abs() < 10.0 * DEFAULT_ITERATION_TOL);
    }

    #[test]
    fn probe_passes_on_a_standard_market() {
        let cfg = lognormal_market();
        let report =
            uniqueness_probe(&cfg, &[0.0, 0.25, 0.5, 0.75, 1.0], 1e-9, DEFAULT_MAX_ITER).unwrap();
        assert!(report.pass, "spread {}", report.max_spread);
        assert!(report.max_spread < 1e-7);
        assert_eq!(report.starts, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn probe_fails_on_the_counterexample_continuum() {
        let report =
            uniqueness_probe(&capped_market(1.0), &[0.65, 0.55], 1e-9, 1000).unwrap();
        assert!(!report.pass);
        assert!((report.max_spread - 0.1).abs() < 1e-3, "{}", report.max_spread);
        // sorted seeds, each sitting exactly where it started
        assert_eq!(report.starts, vec![0.55, 0.65]);
        assert!((report.limits[0][0] - 0.55).abs() < 1e-6);
        assert!((report.limits[1][0] - 0.65).abs() < 1e-6);
    }

    #[test]
    fn probe_needs_two_starts() {
        assert!(matches!(
            uniqueness_probe(&lognormal_market(), &[0.5], 1e-9, 100),
            Err(Error::TooFewStarts { got: 1 })
        ));
    }

    #[test]
    fn extremal_pairs_coincide_in_standard_mode() {
        let report = extremal_equilibria(&lognormal_market(), 1e-9, DEFAULT_MAX_ITER).unwrap();
        assert!(report.coincide, "spread {}", report.spread);
        assert!(report.spread < 1e-7);
        assert!(report.lower_pair[0] <= report.upper_pair[0] + 1e-9);
        assert!(report.lower_pair[1] <= report.upper_pair[1] + 1e-9);
    }

    #[test]
    fn extremal_pairs_bracket_the_counterexample_continuum() {
        let report = extremal_equilibria(&capped_market(1.0), 1e-9, 1000).unwrap();
        assert!(!report.coincide);
        assert!((report.lower_pair[0] - 0.5).abs() < 1e-3, "{:?}", report.lower_pair);
        assert!((report.lower_pair[1] - 0.5).abs() < 1e-3);
        assert!((report.upper_pair[0] - 2.0 / 3.0).abs() < 1e-3, "{:?}", report.upper_pair);
        assert!((report.upper_pair[1] - 2.0 / 3.0).abs() < 1e-3);
    }

    #[test]
    fn equilibria_scale_with_the_market() {
        let small = MarketConfig::standard(
            1.0,
            Cdf::power(2.0, 1.0).unwrap(),
            Cdf::log_normal(0.3).unwrap(),
            Cdf::log_normal(0.3).unwrap(),
        )
        .unwrap();
        let large = MarketConfig::standard(
            10.0,
            Cdf::power(2.0, 10.0).unwrap(),
            Cdf::log_normal(0.3).unwrap(),
            Cdf::log_normal(0.3).unwrap(),
        )
        .unwrap();
        let eq_small = equilibrium(&small, 0.0, 1e-10, DEFAULT_MAX_ITER).unwrap();
        let eq_large = equilibrium(&large, 0.0, 1e-10, DEFAULT_MAX_ITER).unwrap();
        let r1 = (eq_large.b1_star - 10.0 * eq_small.b1_star).abs() / eq_large.b1_star;
        let r2 = (eq_large.b2_star - 10.0 * eq_small.b2_star).abs() / eq_large.b2_star;
        assert!(r1 < 1e-6, "relative mismatch {r1}");
        assert!(r2 < 1e-6, "relative mismatch {r2}");
    }

    #[test]
    fn trace_csv_format() {
        let trace = IterationTrace {
            start: 0.25,
            steps: vec![
                IterationStep { k: 1, b1: 0.5, b2: 0.375 },
                IterationStep { k: 2, b1: 0.5, b2: 0.375 },
            ],
            direction: Direction::Nondecreasing,
            stop_reason: StopReason::Converged,
        };
        let mut buf = Vec::new();
        trace.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "k,b1,b2\n1,0.5,0.375\n2,0.5,0.375\n");
    }

    #[test]
    fn parameter_validation() {
        let cfg = decoupled_market();
        assert!(iterate(&cfg, -0.1, 1e-9, 100).is_err());
        assert!(iterate(&cfg, 1.5, 1e-9, 100).is_err());
        assert!(iterate(&cfg, 0.5, 0.0, 100).is_err());
        assert!(iterate(&cfg, 0.5, 1e-9, 0).is_err());
    }

    #[test]
    fn report_serialization_field_names() {
        let report = equilibrium(&decoupled_market(), 0.3, 1e-9, 100).unwrap();
        let json = serde_json::to_value(&report).unwrap();
        assert!(json.get("b1_star").is_some());
        assert!(json.get("b2_star").is_some());
        assert_eq!(json["foc_residuals"].as_array().unwrap().len(), 2);
        assert_eq!(json["trace"]["stop_reason"], "converged");
        assert_eq!(json["trace"]["direction"], "nondecreasing");
        assert_eq!(json["trace"]["steps"][0]["k"], 1);
    }
}
