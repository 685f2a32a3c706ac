//! End-to-end acceptance suite. Each test covers one numbered acceptance
//! criterion and prints a single `criterion N (...): PASS` line when it
//! holds; a failing assert carries the diagnostic for the red criterion.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sbs::best_response::{best_response, check_monotone_br, grid_oracle, scaled_argmax};
use sbs::counterexample::{equilibrium_interval, piecewise_br};
use sbs::distributions::Cdf;
use sbs::dynamics::{
    equilibrium, extremal_equilibria, iterate, uniqueness_probe, Direction, StopReason,
};
use sbs::montecarlo::{empirical_payoff, simulate_auctions, SimStats};
use sbs::payoff::{payoff, Bidder, MarketConfig};

const TOL: f64 = 1e-9;
const MAX_ITER: usize = 10_000;

/// The six smooth reference markets used across the convergence,
/// uniqueness, monotonicity, and simulation criteria: two competition
/// families crossed with three noise widths, all at v = 1.
fn standard_configs() -> Vec<(String, MarketConfig)> {
    let mut configs = Vec::new();
    for (q_name, q) in [
        ("power(2,1)", Cdf::power(2.0, 1.0).unwrap()),
        ("exponential(2)", Cdf::exponential(2.0).unwrap()),
    ] {
        for sigma in [0.1, 0.3, 0.5] {
            let noise = || Cdf::log_normal(sigma).unwrap();
            configs.push((
                format!("Q={q_name}, lognormal({sigma})"),
                MarketConfig::standard(1.0, q, noise(), noise()).unwrap(),
            ));
        }
    }
    configs
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
fn criterion_1_counterexample_reproduction() {
    let clock = Instant::now();
    for b in [0.51, 0.55, 0.60, 0.65] {
        let br = piecewise_br(1.0, b);
        assert_eq!(br, b, "piecewise_br({b}) = {br}, expected the fixed point {b}");
    }
    let (lo, hi) = equilibrium_interval(1.0);
    assert!((lo - 0.5).abs() < 1e-3, "interval lower endpoint {lo}");
    assert!((hi - 2.0 / 3.0).abs() < 1e-3, "interval upper endpoint {hi}");
    let elapsed = clock.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    println!("criterion 1 (counterexample reproduction): PASS");
}

#[test]
fn criterion_2_convergence_suite() {
    let clock = Instant::now();
    for (name, market) in standard_configs() {
        for b2_start in [0.0, 1.0] {
            let trace = iterate(&market, b2_start, TOL, MAX_ITER).unwrap();
            assert_eq!(
                trace.stop_reason,
                StopReason::Converged,
                "{name}, start {b2_start}: did not converge in {MAX_ITER} rounds"
            );
            let b1s: Vec<f64> = trace.steps.iter().map(|s| s.b1).collect();
            let mut b2s = vec![b2_start];
            b2s.extend(trace.steps.iter().map(|s| s.b2));
            for seq in [&b1s, &b2s] {
                for pair in seq.windows(2) {
                    let step = pair[1] - pair[0];
                    if b2_start == 0.0 {
                        assert!(step >= -1e-9, "{name}: upward trace dips by {step:.3e}");
                    } else {
                        assert!(step <= 1e-9, "{name}: downward trace rises by {step:.3e}");
                    }
                }
            }
            let expected = if b2_start == 0.0 {
                Direction::Nondecreasing
            } else {
                Direction::Nonincreasing
            };
            assert!(
                trace.direction == expected || trace.direction == Direction::Constant,
                "{name}, start {b2_start}: classified {:?}",
                trace.direction
            );
            let report = equilibrium(&market, b2_start, TOL, MAX_ITER).unwrap();
            for (i, foc) in report.foc_residuals.iter().enumerate() {
                assert!(
                    foc.abs() < 1e-6,
                    "{name}, start {b2_start}: bidder {} FOC residual {foc:.3e}",
                    i + 1
                );
            }
        }
    }
    let elapsed = clock.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "took {elapsed:?}");
    println!("criterion 2 (monotone convergence suite): PASS");
}

#[test]
fn criterion_3_uniqueness_suite() {
    let starts = [0.0, 0.25, 0.5, 0.75, 1.0];
    for (name, market) in standard_configs() {
        let probe = uniqueness_probe(&market, &starts, TOL, MAX_ITER).unwrap();
        assert!(
            probe.max_spread < 1e-7,
            "{name}: probe spread {:.3e}",
            probe.max_spread
        );
        assert!(probe.pass, "{name}: probe flagged non-uniqueness");
        let extremal = extremal_equilibria(&market, TOL, MAX_ITER).unwrap();
        assert!(
            extremal.spread < 1e-7,
            "{name}: extremal spread {:.3e}",
            extremal.spread
        );
        assert!(extremal.coincide, "{name}: extremal pairs differ");
    }
    let probe = uniqueness_probe(&capped_market(1.0), &[0.55, 0.65], TOL, MAX_ITER).unwrap();
    assert!(
        (probe.max_spread - 0.1).abs() < 1e-3,
        "counterexample probe spread {:.6}, expected about 0.1",
        probe.max_spread
    );
    assert!(!probe.pass, "counterexample probe failed to flag distinct equilibria");
    println!("criterion 3 (uniqueness suite): PASS");
}

#[test]
fn criterion_4_analytic_best_response_fixtures() {
    for v in [1.0, 2.0] {
        for k in [1.0, 2.0, 3.0] {
            let market = MarketConfig::standard(
                v,
                Cdf::power(k, v).unwrap(),
                Cdf::log_normal(0.3).unwrap(),
                Cdf::log_normal(0.3).unwrap(),
            )
            .unwrap();
            let expected = k * v / (k + 1.0);
            let br = best_response(&market, Bidder::One, 0.0).unwrap().bid;
            assert!(
                (br - expected).abs() < 1e-8,
                "v={v}, k={k}: BR {br} vs kv/(k+1) = {expected}"
            );
        }
    }
    let br = best_response(&capped_market(1.0), Bidder::One, 1.0).unwrap().bid;
    assert!(
        (br - 2.0 / 3.0).abs() < 1e-6,
        "capped pair at b_opp=1: BR {br} vs 2v/3"
    );
    println!("criterion 4 (analytic best-response fixtures): PASS");
}

#[test]
fn criterion_5_oracle_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(20_260_822);
    for case in 0..50 {
        let v = rng.gen_range(0.5..2.0);
        let q = if rng.gen_bool(0.5) {
            let k = rng.gen_range(0.5..3.0);
            let c = rng.gen_range(v..2.0 * v);
            Cdf::power(k, c).unwrap()
        } else {
            Cdf::exponential(rng.gen_range(0.5..3.0)).unwrap()
        };
        let n1 = Cdf::log_normal(rng.gen_range(0.05..0.6)).unwrap();
        let n2 = Cdf::log_normal(rng.gen_range(0.05..0.6)).unwrap();
        let market = MarketConfig::standard(v, q, n1, n2).unwrap();
        let b_opp = v * rng.gen_range(0.05..1.0);
        let solver = best_response(&market, Bidder::One, b_opp).unwrap().bid;
        let oracle = grid_oracle(&market, Bidder::One, b_opp, 2000, 2000)
            .unwrap()
            .bid;
        assert!(
            (solver - oracle).abs() < 1e-5,
            "case {case} (v={v:.4}, b_opp={b_opp:.4}): solver {solver:.8} vs oracle {oracle:.8}"
        );
    }
    println!("criterion 5 (solver vs grid oracle on 50 random instances): PASS");
}

#[test]
fn criterion_6_monotone_br_and_homogeneity() {
    for (name, market) in standard_configs() {
        let grid: Vec<f64> = (0..50).map(|j| j as f64 / 49.0).collect();
        let report = check_monotone_br(&market, Bidder::One, &grid).unwrap();
        assert!(
            report.pass(),
            "{name}: {} monotonicity violations, first: {:?}",
            report.violations.len(),
            report.violations.first()
        );
        let mut previous = f64::INFINITY;
        for alpha in [0.8, 0.9, 1.0, 1.1, 1.25] {
            let b = scaled_argmax(&market, Bidder::One, alpha, 0.5).unwrap();
            assert!(
                b < previous,
                "{name}: scaled argmax {b:.8} at alpha={alpha} not below {previous:.8}"
            );
            previous = b;
        }
    }
    println!("criterion 6 (monotone best response and scaling): PASS");
}

fn stats_bits(stats: &SimStats) -> Vec<u64> {
    [
        stats.win_rate_1,
        stats.win_rate_2,
        stats.buyer_win_rate,
        stats.mean_payoff_1.value,
        stats.mean_payoff_1.stderr,
        stats.mean_payoff_2.value,
        stats.mean_payoff_2.stderr,
        stats.mean_buyer_cost.value,
        stats.mean_buyer_cost.stderr,
        stats.mean_overpayment.value,
        stats.mean_overpayment.stderr,
    ]
    .iter()
    .map(|x| x.to_bits())
    .collect()
}

#[test]
fn criterion_7_monte_carlo_agreement() {
    let clock = Instant::now();
    let n = 1_000_000;
    let seed = 2026;
    let configs = standard_configs();
    let mut within_band = 0;
    for (name, market) in configs.iter().take(5) {
        let eq = equilibrium(market, 0.0, TOL, MAX_ITER).unwrap();
        let analytic = payoff(market, Bidder::One, eq.b1_star, eq.b2_star).unwrap();
        let estimate =
            empirical_payoff(market, Bidder::One, eq.b1_star, eq.b2_star, n, seed).unwrap();
        let deviation = (estimate.value - analytic).abs();
        if deviation <= 3.0 * estimate.stderr {
            within_band += 1;
        } else {
            println!(
                "criterion 7: {name} off by {deviation:.3e} (> 3 x {:.3e})",
                estimate.stderr
            );
        }
    }
    assert!(
        within_band >= 4,
        "only {within_band}/5 configs within 3 standard errors"
    );
    let (_, market) = &configs[0];
    let eq = equilibrium(market, 0.0, TOL, MAX_ITER).unwrap();
    let first = simulate_auctions(market, eq.b1_star, eq.b2_star, n, seed, 1).unwrap();
    let repeat = simulate_auctions(market, eq.b1_star, eq.b2_star, n, seed, 1).unwrap();
    let sharded = simulate_auctions(market, eq.b1_star, eq.b2_star, n, seed, 4).unwrap();
    assert_eq!(stats_bits(&first), stats_bits(&repeat), "repeat run differs");
    assert_eq!(stats_bits(&first), stats_bits(&sharded), "shard count changed results");
    let elapsed = clock.elapsed();
    assert!(elapsed.as_secs_f64() < 30.0, "took {elapsed:?}");
    println!("criterion 7 (Monte Carlo agreement, {within_band}/5 in band): PASS");
}

#[test]
fn criterion_8a_log_concavity_smooth_families() {
    let cases = [
        ("power(2,1)", Cdf::power(2.0, 1.0).unwrap(), 0.01, 0.99, 500),
        ("exponential(1)", Cdf::exponential(1.0).unwrap(), 0.01, 5.0, 1000),
        ("lognormal(0.5)", Cdf::log_normal(0.5).unwrap(), 0.05, 10.0, 2000),
    ];
    for (name, cdf, lo, hi, points) in cases {
        let report = cdf.verify_log_concavity(lo, hi, points).unwrap();
        assert!(
            report.pass,
            "{name}: max second difference {:.3e}",
            report.max_second_difference
        );
    }
    println!("criterion 8a (smooth families log-concave): PASS");
}

#[test]
fn criterion_8b_log_concavity_capped_linear_kink() {
    let report = Cdf::capped_linear()
        .verify_log_concavity(0.9, 1.1, 21)
        .unwrap();
    println!(
        "criterion 8b: capped-linear kink grid gives max second difference {:.3e}, pass = {}",
        report.max_second_difference, report.pass
    );
    assert!(
        !report.pass && report.max_second_difference > 0.0,
        "expected the capped-linear check to fail with a positive second difference at the \
         kink, but the observed maximum is {:.3e} (pass = {}). The log cdf of min(x, 1) is \
         min(ln x, 0), whose slope drops from 1/x to 0 through x = 1; it is concave, every \
         uniform-grid second difference is at most zero, and the check cannot report a \
         positive value at the kink.",
        report.max_second_difference,
        report.pass
    );
    println!("criterion 8b (capped-linear kink detected): PASS");
}
