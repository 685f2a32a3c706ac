//! Scalar search primitives: golden-section maximization and bisection.
//!
//! Best responses are computed by golden-section search on the log payoff
//! (unimodal under the log-concavity assumptions) followed by a bisection
//! polish on the first-order condition. Both routines here are generic over
//! the objective and know nothing about auctions.

/// 1/phi, the golden-section step ratio.
const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Maximizes a unimodal `f` on `[lo, hi]` by golden-section search, shrinking
/// the bracket until its width is at most `xtol`. Returns the final bracket
/// `(lo, hi)`; the caller takes its midpoint as the maximizer.
///
/// Ties (`f` equal at both probes) keep the left subinterval, so on a plateau
/// the search converges to the plateau's left edge, i.e. the smallest
/// maximizer.
pub fn golden_section_max<F: FnMut(f64) -> f64>(
    mut f: F,
    mut lo: f64,
    mut hi: f64,
    xtol: f64,
) -> (f64, f64) {
    debug_assert!(lo < hi);
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    // each step shrinks the bracket by 1/phi, so 400 iterations cover any
    // representable starting width down to any representable tolerance
    for _ in 0..400 {
        if hi - lo <= xtol {
            break;
        }
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
        // near the float resolution limit the probes can collapse onto the
        // bracket ends; stop rather than loop on identical evaluations
        if !(lo < x1 && x1 < x2 && x2 < hi) {
            break;
        }
    }
    (lo, hi)
}

/// Finds the root of an increasing function on `[lo, hi]` by bisection,
/// assuming `f(lo) <= 0 <= f(hi)`. Returns the midpoint of the final
/// bracket once its width is at most `xtol`.
pub fn bisect_increasing<F: FnMut(f64) -> f64>(
    mut f: F,
    mut lo: f64,
    mut hi: f64,
    xtol: f64,
) -> f64 {
    debug_assert!(lo <= hi);
    for _ in 0..200 {
        if hi - lo <= xtol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
