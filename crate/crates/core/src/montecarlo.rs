//! Monte Carlo validation of analytic payoffs and buyer-side diagnostics.
//!
//! The simulator is an oracle deliberately independent of the analytic
//! code: it samples auctions by inverse-transform draws and counts, sharing
//! only the distribution quantiles with the rest of the crate. Each auction
//! `j` runs on its own ChaCha stream derived from `(seed, j)`, so results
//! are bit-for-bit reproducible and independent of how work is sharded
//! across threads.
//!
//! Draw order within one simulated auction is fixed: agent 1's noise, agent
//! 2's noise, then the competition bid. Per-auction statistics are pooled in
//! fixed 65536-auction blocks whose partial sums are merged in block order,
//! which keeps the floating-point summation tree identical for every shard
//! count.

use std::thread;

use rand::distributions::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Error;
use crate::payoff::{Bidder, MarketConfig};
use crate::tolerances::MIN_SAMPLES;
use crate::Result;

/// Auctions per accumulation block. Fixing the block size (rather than
/// deriving it from the shard count) is what makes merged statistics
/// independent of the number of workers.
const BLOCK: u64 = 1 << 16;

/// A Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

/// Statistics from a batch of simulated auctions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimStats {
    pub n: u64,
    pub seed: u64,
    /// Fraction of auctions whose strict highest submitted bid was agent
    /// 1's (ties lose).
    pub win_rate_1: f64,
    pub win_rate_2: f64,
    /// Fraction of auctions the buyer won, i.e. some agent beat the
    /// competition.
    pub buyer_win_rate: f64,
    /// Mean planned-bid payoff per agent, zero in lost auctions; matches
    /// the analytic expected payoff at the same bids.
    pub mean_payoff_1: Estimate,
    pub mean_payoff_2: Estimate,
    /// Mean amount the buyer paid (the higher submitted bid when it won,
    /// zero otherwise), unconditionally over all auctions.
    pub mean_buyer_cost: Estimate,
    /// Mean of paid price minus the highest losing rival (the buyer's own
    /// second bid or the competition, whichever is higher), zero in lost
    /// auctions. A side-by-side diagnostic: what bidding against oneself
    /// cost above the price that would have sufficed.
    pub mean_overpayment: Estimate,
}

#[derive(Debug, Clone, Copy, Default)]
struct Welford {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(&mut self, other: &Welford) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n1 = self.n as f64;
        let n2 = other.n as f64;
        let total = n1 + n2;
        let delta = other.mean - self.mean;
        self.mean += delta * n2 / total;
        self.m2 += other.m2 + delta * delta * n1 * n2 / total;
        self.n += other.n;
    }

    fn estimate(&self) -> Estimate {
        let stderr = if self.n >= 2 {
            (self.m2 / (self.n - 1) as f64 / self.n as f64).sqrt()
        } else {
            f64::NAN
        };
        Estimate {
            value: self.mean,
            stderr,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct BlockStats {
    wins_1: u64,
    wins_2: u64,
    buyer_wins: u64,
    payoff_1: Welford,
    payoff_2: Welford,
    cost: Welford,
    overpayment: Welford,
}

impl BlockStats {
    fn merge(&mut self, other: &BlockStats) {
        self.wins_1 += other.wins_1;
        self.wins_2 += other.wins_2;
        self.buyer_wins += other.buyer_wins;
        self.payoff_1.merge(&other.payoff_1);
        self.payoff_2.merge(&other.payoff_2);
        self.cost.merge(&other.cost);
        self.overpayment.merge(&other.overpayment);
    }
}

fn check_sample_count(n: u64) -> Result<()> {
    if n < MIN_SAMPLES {
        return Err(Error::SampleCountTooSmall { n, min: MIN_SAMPLES });
    }
    Ok(())
}

fn check_planned_bid(cfg: &MarketConfig, bid: f64) -> Result<()> {
    if !bid.is_finite() || bid <= 0.0 {
        return Err(Error::NonpositiveBid { bid });
    }
    if bid > cfg.v() {
        return Err(Error::OutOfRangeBid { bid, v: cfg.v() });
    }
    Ok(())
}

/// RNG for auction `j`: the seed fixes the key, the auction index picks the
/// stream, so draws depend only on `(seed, j)`.
fn auction_rng(base: &ChaCha8Rng, j: u64) -> ChaCha8Rng {
    let mut rng = base.clone();
    rng.set_stream(j);
    rng
}

fn simulate_block(
    cfg: &MarketConfig,
    b1: f64,
    b2: f64,
    base: &ChaCha8Rng,
    start: u64,
    end: u64,
) -> BlockStats {
    let v = cfg.v();
    let n1 = cfg.noise(Bidder::One);
    let n2 = cfg.noise(Bidder::Two);
    let q = cfg.q();
    let mut stats = BlockStats::default();
    for j in start..end {
        let mut rng = auction_rng(base, j);
        let u1: f64 = rng.sample(Open01);
        let u2: f64 = rng.sample(Open01);
        let ud: f64 = rng.sample(Open01);
        let hat1 = b1 * n1.quantile(u1).expect("Open01 is interior");
        let hat2 = b2 * n2.quantile(u2).expect("Open01 is interior");
        let d = q.quantile(ud).expect("Open01 is interior");

        let hi = hat1.max(hat2);
        let lo = hat1.min(hat2);
        let buyer_wins = hi > d;
        if buyer_wins {
            stats.buyer_wins += 1;
        }
        if hat1 > hat2 && hat1 > d {
            stats.wins_1 += 1;
        }
        if hat2 > hat1 && hat2 > d {
            stats.wins_2 += 1;
        }
        stats
            .payoff_1
            .push(if b1 > d && b1 > hat2 { v - b1 } else { 0.0 });
        stats
            .payoff_2
            .push(if b2 > d && b2 > hat1 { v - b2 } else { 0.0 });
        stats.cost.push(if buyer_wins { hi } else { 0.0 });
        stats
            .overpayment
            .push(if buyer_wins { hi - lo.max(d) } else { 0.0 });
    }
    stats
}

/// Simulates `n` auctions at the planned bids `(b1, b2)` and aggregates
/// win rates, payoffs, buyer cost, and overpayment. `shards` sets how many
/// worker threads share the auctions; every shard count produces
/// bit-identical results for the same `(cfg, bids, n, seed)`.
pub fn simulate_auctions(
    cfg: &MarketConfig,
    b1: f64,
    b2: f64,
    n: u64,
    seed: u64,
    shards: usize,
) -> Result<SimStats> {
    check_sample_count(n)?;
    check_planned_bid(cfg, b1)?;
    check_planned_bid(cfg, b2)?;
    if shards == 0 {
        return Err(Error::InvalidParameter {
            what: "shard count",
            value: 0.0,
        });
    }
    let base = ChaCha8Rng::seed_from_u64(seed);
    let n_blocks = n.div_ceil(BLOCK) as usize;
    let block_bounds = |i: usize| {
        let start = i as u64 * BLOCK;
        (start, (start + BLOCK).min(n))
    };

    let mut blocks: Vec<Option<BlockStats>> = vec![None; n_blocks];
    if shards == 1 {
        for (i, slot) in blocks.iter_mut().enumerate() {
            let (s, e) = block_bounds(i);
            *slot = Some(simulate_block(cfg, b1, b2, &base, s, e));
        }
    } else {
        let worker_outputs: Vec<Vec<(usize, BlockStats)>> = thread::scope(|scope| {
            let handles: Vec<_> = (0..shards)
                .map(|w| {
                    let base = &base;
                    scope.spawn(move || {
                        let mut out = Vec::new();
                        let mut i = w;
                        while i < n_blocks {
                            let (s, e) = block_bounds(i);
                            out.push((i, simulate_block(cfg, b1, b2, base, s, e)));
                            i += shards;
                        }
                        out
                    })
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("simulation worker panicked"))
                .collect()
        });
        for chunk in worker_outputs {
            for (i, stats) in chunk {
                blocks[i] = Some(stats);
            }
        }
    }

    let mut total = BlockStats::default();
    for slot in blocks {
        total.merge(&slot.expect("every block simulated"));
    }
    Ok(SimStats {
        n,
        seed,
        win_rate_1: total.wins_1 as f64 / n as f64,
        win_rate_2: total.wins_2 as f64 / n as f64,
        buyer_win_rate: total.buyer_wins as f64 / n as f64,
        mean_payoff_1: total.payoff_1.estimate(),
        mean_payoff_2: total.payoff_2.estimate(),
        mean_buyer_cost: total.cost.estimate(),
        mean_overpayment: total.overpayment.estimate(),
    })
}

/// Monte Carlo estimate of one agent's expected payoff at planned bid `b`
/// against a twin planning `b_opp` (zero for an absent twin). Per auction:
/// one competition draw, one opponent-noise draw, and the sample
/// `(v - b)` when `b` beats both. Single-threaded and sequential; the
/// estimate depends only on the arguments and the seed.
pub fn empirical_payoff(
    cfg: &MarketConfig,
    bidder: Bidder,
    b: f64,
    b_opp: f64,
    n: u64,
    seed: u64,
) -> Result<Estimate> {
    check_sample_count(n)?;
    check_planned_bid(cfg, b)?;
    if !b_opp.is_finite() || b_opp < 0.0 || b_opp > cfg.v() {
        return Err(Error::OutOfRangeBid {
            bid: b_opp,
            v: cfg.v(),
        });
    }
    let v = cfg.v();
    let q = cfg.q();
    let opp_noise = cfg.noise(bidder.opponent());
    let base = ChaCha8Rng::seed_from_u64(seed);
    let mut acc = Welford::default();
    for j in 0..n {
        let mut rng = auction_rng(&base, j);
        let ud: f64 = rng.sample(Open01);
        let uo: f64 = rng.sample(Open01);
        let d = q.quantile(ud).expect("Open01 is interior");
        let opp_hat = if b_opp > 0.0 {
            b_opp * opp_noise.quantile(uo).expect("Open01 is interior")
        } else {
            0.0
        };
        acc.push(if b > d && b > opp_hat { v - b } else { 0.0 });
    }
    Ok(acc.estimate())
}
