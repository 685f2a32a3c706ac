//! Market configuration and static payoffs.
//!
//! Two bidding agents buy for the same buyer in a first-price auction
//! against exogenous competition. Agent `i` plans a bid `b_i`; its submitted
//! bid is `b_i` times a multiplicative noise draw from `N_i`. From agent
//! `i`'s seat, the twin's submitted bid has CDF `F_{-i}(x) = N_{-i}(x /
//! b_{-i})`, and the competition's best bid has CDF `Q`. Winning pays the
//! buyer's value `v` minus the bid, so the planned-bid payoff is
//!
//! ```text
//! pi_i(b) = (v - b) * Q(b) * F_{-i}(b)
//! ```
//!
//! The interior first-order condition in log space,
//! `1/(v - b) = Q'(b)/Q(b) + F'(b)/F(b)`, drives the solvers in
//! [`crate::best_response`].

use crate::distributions::{Cdf, OpponentBidCdf};
use crate::error::Error;
use crate::tolerances::{LOG_CONCAVITY_GRID, Q_DERIVATIVE_GRID};
use crate::Result;

/// Which validation regime a market was built under.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Smooth families only; positive competition density and log-concavity
    /// checked on construction. Everything the convergence and uniqueness
    /// theory promises applies.
    Standard,
    /// No smoothness validation. Admits the kinked `capped_linear` family,
    /// for which best-response dynamics have a continuum of fixed points.
    Counterexample,
}

/// One of the two bidding agents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bidder {
    One,
    Two,
}

impl Bidder {
    pub fn opponent(self) -> Bidder {
        match self {
            Bidder::One => Bidder::Two,
            Bidder::Two => Bidder::One,
        }
    }

    /// Zero-based index, for addressing per-bidder arrays.
    pub fn index(self) -> usize {
        match self {
            Bidder::One => 0,
            Bidder::Two => 1,
        }
    }
}

/// A fully validated market: buyer value, competition CDF, and both agents'
/// noise CDFs.
#[derive(Debug, Clone, PartialEq)]
pub struct MarketConfig {
    v: f64,
    q: Cdf,
    n1: Cdf,
    n2: Cdf,
    mode: Mode,
}

impl MarketConfig {
    /// Builds a standard-mode market, enforcing the smoothness regime:
    ///
    /// * `v` must be positive and finite;
    /// * the kinked `capped_linear` family is rejected in every role;
    /// * the competition density must be strictly positive on `(0, v]`,
    ///   checked on a grid;
    /// * `Q`, `N1`, `N2` must pass the grid log-concavity check on
    ///   `[1e-3 * v, v]`.
    pub fn standard(v: f64, q: Cdf, n1: Cdf, n2: Cdf) -> Result<Self> {
        if !v.is_finite() || v <= 0.0 {
            return Err(Error::InvalidParameter {
                what: "buyer value v",
                value: v,
            });
        }
        for (role, dist) in [("Q", &q), ("N1", &n1), ("N2", &n2)] {
            if dist.is_capped_linear() {
                return Err(Error::NonSmoothFamily { role });
            }
        }
        // positive density on (0, v]: grid check on interior points; t = 0
        // is excluded deliberately, a power density with exponent above one
        // legitimately vanishes at the origin
        for j in 0..Q_DERIVATIVE_GRID {
            let t = v * (j + 1) as f64 / Q_DERIVATIVE_GRID as f64;
            let d = q.pdf(t);
            if d <= 0.0 || d.is_nan() {
                return Err(Error::QDerivativeNotPositive { t, derivative: d });
            }
        }
        for (role, dist) in [("Q", &q), ("N1", &n1), ("N2", &n2)] {
            let report = dist.verify_log_concavity(1e-3 * v, v, LOG_CONCAVITY_GRID)?;
            if !report.pass {
                return Err(Error::LogConcavityViolated {
                    role,
                    max_second_difference: report.max_second_difference,
                });
            }
        }
        Ok(MarketConfig {
            v,
            q,
            n1,
            n2,
            mode: Mode::Standard,
        })
    }

    /// Builds a market with no smoothness validation beyond `v > 0`.
    pub fn counterexample(v: f64, q: Cdf, n1: Cdf, n2: Cdf) -> Result<Self> {
        if !v.is_finite() || v <= 0.0 {
            return Err(Error::InvalidParameter {
                what: "buyer value v",
                value: v,
            });
        }
        Ok(MarketConfig {
            v,
            q,
            n1,
            n2,
            mode: Mode::Counterexample,
        })
    }

    pub fn v(&self) -> f64 {
        self.v
    }

    pub fn q(&self) -> &Cdf {
        &self.q
    }

    /// The given bidder's own noise CDF.
    pub fn noise(&self, bidder: Bidder) -> &Cdf {
        match bidder {
            Bidder::One => &self.n1,
            Bidder::Two => &self.n2,
        }
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// The submitted-bid CDF bidder `bidder` faces from its twin when the
    /// twin plans `b_opp`. `None` when `b_opp` is zero: a twin that bids
    /// nothing never wins, so the opponent factor drops out of the payoff.
    fn faced(&self, bidder: Bidder, b_opp: f64) -> Result<Option<OpponentBidCdf>> {
        if b_opp == 0.0 {
            return Ok(None);
        }
        let noise = *self.noise(bidder.opponent());
        OpponentBidCdf::new(noise, b_opp).map(Some)
    }

    fn check_bid_range(&self, b: f64) -> Result<()> {
        if !b.is_finite() || !(0.0..=self.v).contains(&b) {
            return Err(Error::OutOfRangeBid { bid: b, v: self.v });
        }
        Ok(())
    }
}

/// Expected planned-bid payoff `(v - b) * Q(b) * F_{-i}(b)` for `bidder`
/// bidding `b` against a twin planning `b_opp`. Errors if `b` lies outside
/// `[0, v]`.
pub fn payoff(cfg: &MarketConfig, bidder: Bidder, b: f64, b_opp: f64) -> Result<f64> {
    cfg.check_bid_range(b)?;
    let opponent_factor = match cfg.faced(bidder, b_opp)? {
        Some(faced) => faced.cdf(b),
        None => 1.0,
    };
    Ok((cfg.v - b) * cfg.q.cdf(b) * opponent_factor)
}

/// `ln pi_i(b)`, assembled from log CDFs so it stays finite wherever the
/// factors merely underflow. `-inf` where the payoff is genuinely zero.
pub fn log_payoff(cfg: &MarketConfig, bidder: Bidder, b: f64, b_opp: f64) -> Result<f64> {
    cfg.check_bid_range(b)?;
    if b >= cfg.v {
        return Ok(f64::NEG_INFINITY);
    }
    let opponent_term = match cfg.faced(bidder, b_opp)? {
        Some(faced) => faced.ln_cdf(b),
        None => 0.0,
    };
    Ok((cfg.v - b).ln() + cfg.q.ln_cdf(b) + opponent_term)
}

/// First-order-condition residual
/// `1/(v - b) - Q'(b)/Q(b) - F'(b)/F(b)`, the negated derivative of the log
/// payoff. Strictly increasing in `b` on the interior under the standard
/// assumptions (both score terms are nonincreasing while `1/(v - b)`
/// grows), so its root is the interior best response. Requires `b` strictly
/// inside `(0, v)`.
pub fn foc_residual(cfg: &MarketConfig, bidder: Bidder, b: f64, b_opp: f64) -> Result<f64> {
    if !b.is_finite() || b <= 0.0 || b >= cfg.v {
        return Err(Error::OutOfRangeBid { bid: b, v: cfg.v });
    }
    let opponent_score = match cfg.faced(bidder, b_opp)? {
        Some(faced) => faced.score(b)?,
        None => 0.0,
    };
    Ok(1.0 / (cfg.v - b) - cfg.q.score(b)? - opponent_score)
}

/// The map `Phi(b) = v - gamma(b)/gamma'(b)` with `gamma = Q * F_{-i}`,
/// whose fixed point is the interior best response. Under log-concavity
/// `gamma/gamma'` is nondecreasing, making `Phi` nonincreasing; the solvers
/// use that shape indirectly, and this map is exposed for diagnostics.
/// Errors when `gamma'(b) <= 0`.
pub fn phi_map(cfg: &MarketConfig, bidder: Bidder, b: f64, b_opp: f64) -> Result<f64> {
    if !b.is_finite() || b <= 0.0 || b > cfg.v {
        return Err(Error::OutOfRangeBid { bid: b, v: cfg.v });
    }
    let (f, f_prime) = match cfg.faced(bidder, b_opp)? {
        Some(faced) => (faced.cdf(b), faced.pdf(b)),
        None => (1.0, 0.0),
    };
    let gamma = cfg.q.cdf(b) * f;
    let gamma_prime = cfg.q.pdf(b) * f + cfg.q.cdf(b) * f_prime;
    if gamma_prime <= 0.0 || gamma_prime.is_nan() {
        return Err(Error::NonpositiveGammaPrime {
            b,
            gamma_prime,
        });
    }
    Ok(cfg.v - gamma / gamma_prime)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::search::bisect_increasing;

    fn capped_market(v: f64) -> MarketConfig {
        MarketConfig::counterexample(
            v,
            Cdf::capped_linear(),
            Cdf::capped_linear(),
            Cdf::capped_linear(),
        )
        .unwrap()
    }

    fn linear_q_market() -> MarketConfig {
        // Q uniform on [0, 1]; noise nearly degenerate so the opponent factor
        // is effectively a step at b_opp. Used where only Q matters (absent
        // opponent), so the noise choice is irrelevant.
        MarketConfig::standard(
            1.0,
            Cdf::power(1.0, 1.0).unwrap(),
            Cdf::log_normal(0.1).unwrap(),
            Cdf::log_normal(0.1).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn standard_mode_rejects_bad_inputs() {
        let ln = Cdf::log_normal(0.3).unwrap();
        assert!(matches!(
            MarketConfig::standard(0.0, Cdf::power(1.0, 1.0).unwrap(), ln, ln),
            Err(Error::InvalidParameter { .. })
        ));
        assert!(matches!(
            MarketConfig::standard(1.0, Cdf::capped_linear(), ln, ln),
            Err(Error::NonSmoothFamily { role: "Q" })
        ));
        assert!(matches!(
            MarketConfig::standard(1.0, Cdf::power(2.0, 1.0).unwrap(), Cdf::capped_linear(), ln),
            Err(Error::NonSmoothFamily { role: "N1" })
        ));
        // competition capped at 0.5 has zero density on (0.5, 1]
        assert!(matches!(
            MarketConfig::standard(1.0, Cdf::power(1.0, 0.5).unwrap(), ln, ln),
            Err(Error::QDerivativeNotPositive { .. })
        ));
    }

    #[test]
    fn standard_mode_accepts_smooth_families() {
        let ln = Cdf::log_normal(0.3).unwrap();
        assert!(MarketConfig::standard(1.0, Cdf::power(2.0, 1.0).unwrap(), ln, ln).is_ok());
        assert!(MarketConfig::standard(2.0, Cdf::exponential(1.5).unwrap(), ln, ln).is_ok());
    }

    #[test]
    fn payoff_capped_fixture() {
        // (1 - 0.5) * min(0.5, 1) * min(0.5/0.8, 1) = 0.5 * 0.5 * 0.625
        let cfg = capped_market(1.0);
        let p = payoff(&cfg, Bidder::One, 0.5, 0.8).unwrap();
        assert!((p - 0.15625).abs() < 1e-15, "got {p}");
        let lp = log_payoff(&cfg, Bidder::One, 0.5, 0.8).unwrap();
        assert!((lp - 0.15625f64.ln()).abs() < 1e-12, "got {lp}");
        assert!((lp - (-1.856_297_990_365_626_3)).abs() < 1e-12);
    }

    #[test]
    fn absent_opponent_drops_the_factor() {
        let cfg = linear_q_market();
        let p = payoff(&cfg, Bidder::One, 0.5, 0.0).unwrap();
        assert!((p - 0.25).abs() < 1e-15, "got {p}");
        assert_eq!(
            log_payoff(&cfg, Bidder::One, 0.5, 0.0).unwrap(),
            p.ln()
        );
    }

    #[test]
    fn payoff_rejects_out_of_range_bids() {
        let cfg = linear_q_market();
        assert!(payoff(&cfg, Bidder::One, -0.1, 0.5).is_err());
        assert!(payoff(&cfg, Bidder::One, 1.1, 0.5).is_err());
        assert!(payoff(&cfg, Bidder::One, f64::NAN, 0.5).is_err());
        assert!(foc_residual(&cfg, Bidder::One, 0.0, 0.5).is_err());
        assert!(foc_residual(&cfg, Bidder::One, 1.0, 0.5).is_err());
    }

    #[test]
    fn payoff_vanishes_at_support_edges() {
        let cfg = linear_q_market();
        assert_eq!(payoff(&cfg, Bidder::One, 0.0, 0.5).unwrap(), 0.0);
        assert_eq!(payoff(&cfg, Bidder::One, 1.0, 0.5).unwrap(), 0.0);
        assert_eq!(
            log_payoff(&cfg, Bidder::One, 0.0, 0.5).unwrap(),
            f64::NEG_INFINITY
        );
    }

    #[test]
    fn foc_zero_at_known_maximizers() {
        // absent opponent, Q = (x/1)^k: argmax of (1-b) b^k is k/(k+1)
        let cfg = linear_q_market();
        let r = foc_residual(&cfg, Bidder::One, 0.5, 0.0).unwrap();
        assert!(r.abs() < 1e-12, "k=1 residual {r}");

        let cfg2 = MarketConfig::standard(
            1.0,
            Cdf::power(2.0, 1.0).unwrap(),
            Cdf::log_normal(0.1).unwrap(),
            Cdf::log_normal(0.1).unwrap(),
        )
        .unwrap();
        let r = foc_residual(&cfg2, Bidder::One, 2.0 / 3.0, 0.0).unwrap();
        assert!(r.abs() < 1e-12, "k=2 residual {r}");
    }

    #[test]
    fn foc_fixture_left_of_root() {
        // 1/(1 - 1/4) - 1/(1/4) = 4/3 - 4 = -8/3
        let cfg = linear_q_market();
        let r = foc_residual(&cfg, Bidder::One, 0.25, 0.0).unwrap();
        assert!((r - (-8.0 / 3.0)).abs() < 1e-12, "got {r}");
    }

    #[test]
    fn foc_is_increasing_in_bid() {
        let cfg = MarketConfig::standard(
            1.0,
            Cdf::power(2.0, 1.0).unwrap(),
            Cdf::log_normal(0.3).unwrap(),
            Cdf::log_normal(0.3).unwrap(),
        )
        .unwrap();
        for &b_opp in &[0.0, 0.3, 0.6] {
            let mut prev = f64::NEG_INFINITY;
            for j in 1..100 {
                let b = j as f64 / 100.0;
                let r = foc_residual(&cfg, Bidder::One, b, b_opp).unwrap();
                assert!(r > prev, "residual fell from {prev} to {r} at b = {b}");
                prev = r;
            }
        }
    }

    #[test]
    fn log_payoff_is_concave_on_grid() {
        let cfg = MarketConfig::standard(
            1.0,
            Cdf::exponential(2.0).unwrap(),
            Cdf::log_normal(0.5).unwrap(),
            Cdf::log_normal(0.5).unwrap(),
        )
        .unwrap();
        for &b_opp in &[0.0, 0.4, 0.7] {
            let vals: Vec<f64> = (1..200)
                .map(|j| log_payoff(&cfg, Bidder::One, 0.99 * j as f64 / 200.0, b_opp).unwrap())
                .collect();
            for w in vals.windows(3) {
                let second = w[2] - 2.0 * w[1] + w[0];
                assert!(second <= 1e-9, "second difference {second}");
            }
        }
    }

    #[test]
    fn phi_map_values() {
        // gamma(b) = b (linear Q, absent opponent): Phi(b) = v - b
        let cfg = linear_q_market();
        let p = phi_map(&cfg, Bidder::One, 0.3, 0.0).unwrap();
        assert!((p - 0.7).abs() < 1e-12, "got {p}");
        // fixed point of v - b is b = v/2, the known argmax
        let p = phi_map(&cfg, Bidder::One, 0.5, 0.0).unwrap();
        assert!((p - 0.5).abs() < 1e-12);

        // gamma(b) = b^2: Phi(b) = 1 - b/2
        let cfg2 = MarketConfig::standard(
            1.0,
            Cdf::power(2.0, 1.0).unwrap(),
            Cdf::log_normal(0.1).unwrap(),
            Cdf::log_normal(0.1).unwrap(),
        )
        .unwrap();
        let p = phi_map(&cfg2, Bidder::One, 0.5, 0.0).unwrap();
        assert!((p - 0.75).abs() < 1e-12, "got {p}");
    }

    #[test]
    fn phi_fixed_point_is_the_payoff_maximizer() {
        let cfg = MarketConfig::standard(
            1.0,
            Cdf::power(2.0, 1.0).unwrap(),
            Cdf::log_normal(0.3).unwrap(),
            Cdf::log_normal(0.3).unwrap(),
        )
        .unwrap();
        let b_opp = 0.55;
        // b - Phi(b) is increasing (identity rising, Phi falling); bisect it
        let fixed = bisect_increasing(
            |b| b - phi_map(&cfg, Bidder::One, b, b_opp).unwrap(),
            0.05,
            0.95,
            1e-12,
        );
        // compare against a brute-force argmax of the payoff
        let mut best = (f64::NEG_INFINITY, 0.0);
        for j in 1..200_000 {
            let b = j as f64 / 200_000.0;
            let p = payoff(&cfg, Bidder::One, b, b_opp).unwrap();
            if p > best.0 {
                best = (p, b);
            }
        }
        assert!(
            (fixed - best.1).abs() < 1e-5,
            "Phi fixed point {fixed} vs grid argmax {}",
            best.1
        );
        let r = foc_residual(&cfg, Bidder::One, fixed, b_opp).unwrap();
        assert!(r.abs() < 1e-7, "residual at fixed point: {r}");
    }

    #[test]
    fn phi_map_errors_where_gamma_prime_vanishes() {
        // beyond the competition cap gamma is flat when the opponent is absent
        let cfg = capped_market(2.0);
        assert!(matches!(
            phi_map(&cfg, Bidder::One, 1.5, 0.0),
            Err(Error::NonpositiveGammaPrime { .. })
        ));
    }
}
