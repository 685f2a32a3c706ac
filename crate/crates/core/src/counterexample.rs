//! The capped-linear market in closed form.
//!
//! With buyer value `v` and every distribution equal to `min(x, 1)`, the
//! best response to a twin bid `b_opp` is `clamp(b_opp, v/2, 2v/3)`: below
//! `v/2` the agent outbids the twin outright, above `2v/3` it settles at the
//! unconstrained optimum of `(v - b) b^2`, and in between matching the twin
//! exactly is optimal. Every point of `[v/2, 2v/3]` is therefore a symmetric
//! fixed point of the best-response dynamics, a continuum of equilibria.
//! This module carries the closed forms and a grid scan that rediscovers the
//! interval numerically; both serve as ground truth for the general solver.

use crate::error::Error;
use crate::Result;

/// The capped-linear payoff `(v - b) * min(b, 1) * min(b / b_opp, 1)`,
/// written directly from the piecewise definition.
pub fn piecewise_payoff(v: f64, b: f64, b_opp: f64) -> f64 {
    let own = b.clamp(0.0, 1.0);
    let opp = if b_opp <= 0.0 {
        1.0
    } else {
        (b / b_opp).clamp(0.0, 1.0)
    };
    (v - b) * own * opp
}

/// The closed-form best response `clamp(b_opp, v/2, 2v/3)`.
pub fn piecewise_br(v: f64, b_opp: f64) -> f64 {
    b_opp.clamp(0.5 * v, 2.0 * v / 3.0)
}

/// Endpoints of the symmetric fixed-point interval, detected by scanning
/// `(0, v]` at absolute resolution `1e-4`. The analytic answer is
/// `[v/2, 2v/3]`; the scan recovers each endpoint to within the grid
/// spacing. Panics only on nonpositive or nonfinite `v` (via the scan's
/// validation), which callers rule out.
pub fn equilibrium_interval(v: f64) -> (f64, f64) {
    let n = (v * 1e4).round().max(10.0) as usize;
    let scan = scan_equilibrium_interval(v, n).expect("valid v and grid size");
    scan.interval
        .expect("the fixed-point interval [v/2, 2v/3] is never empty")
}

/// Result of scanning a bid grid for fixed points of the closed-form best
/// response.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalScan {
    /// Smallest and largest fixed points found, if any.
    pub interval: Option<(f64, f64)>,
    /// Number of grid points scanned.
    pub grid_points: usize,
    /// How many grid points were fixed points.
    pub fixed_point_count: usize,
    /// Set when the grid is too coarse to resolve the interval.
    pub low_resolution: bool,
}

/// Scans `grid_points` evenly spaced bids in `(0, v]` (spacing
/// `v / grid_points`) and reports the range of those that the closed-form
/// best response maps to themselves.
pub fn scan_equilibrium_interval(v: f64, grid_points: usize) -> Result<IntervalScan> {
    if !v.is_finite() || v <= 0.0 {
        return Err(Error::InvalidParameter {
            what: "buyer value v",
            value: v,
        });
    }
    if grid_points == 0 {
        return Err(Error::InvalidGrid {
            reason: "interval scan needs at least 1 grid point",
        });
    }
    let tol = 1e-12 * v;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut fixed_point_count = 0;
    for j in 1..=grid_points {
        let b = v * j as f64 / grid_points as f64;
        if (piecewise_br(v, b) - b).abs() < tol {
            fixed_point_count += 1;
            lo = lo.min(b);
            hi = hi.max(b);
        }
    }
    Ok(IntervalScan {
        interval: (fixed_point_count > 0).then_some((lo, hi)),
        grid_points,
        fixed_point_count,
        // the interval is v/6 wide; fewer than ~10 points across [0, v]
        // cannot place both ends to any useful accuracy
        low_resolution: grid_points < 10,
    })
}
