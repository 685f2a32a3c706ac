//! C ABI over the side-by-side bidding solver.
//!
//! Markets are opaque handles created from the same JSON configuration the
//! CLI accepts and freed explicitly. Every function returns an
//! [`SbsStatus`]; on any status other than `Ok` a description of the
//! failure is kept in thread-local storage and can be copied out with
//! [`sbs_last_error_message`]. The generated header lives in
//! `include/sbs.h`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::ptr;

use sbs::cli::parse_config;
use sbs::counterexample::equilibrium_interval;
use sbs::dynamics::{iterate, uniqueness_probe, StopReason};
use sbs::montecarlo::simulate_auctions;
use sbs::payoff::{foc_residual, Bidder, MarketConfig};

/// Outcome of a call crossing the C boundary.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SbsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidConfig = 3,
    SolverFailure = 4,
    InvalidArgument = 5,
}

/// Opaque validated market handle.
pub struct SbsMarket {
    market: MarketConfig,
}

/// Equilibrium of the sequential best-response dynamics.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SbsEquilibrium {
    pub b1: f64,
    pub b2: f64,
    pub foc1: f64,
    pub foc2: f64,
    pub iterations: u64,
    pub converged: bool,
}

/// Flattened Monte Carlo summary; `*_err` fields are standard errors.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SbsSimStats {
    pub n: u64,
    pub seed: u64,
    pub win_rate_1: f64,
    pub win_rate_2: f64,
    pub buyer_win_rate: f64,
    pub mean_payoff_1: f64,
    pub mean_payoff_1_err: f64,
    pub mean_payoff_2: f64,
    pub mean_payoff_2_err: f64,
    pub mean_buyer_cost: f64,
    pub mean_buyer_cost_err: f64,
    pub mean_overpayment: f64,
    pub mean_overpayment_err: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let owned = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = owned);
}

fn fail(status: SbsStatus, message: &str) -> SbsStatus {
    set_error(message);
    status
}

fn bidder_from_index(index: u32) -> Option<Bidder> {
    match index {
        1 => Some(Bidder::One),
        2 => Some(Bidder::Two),
        _ => None,
    }
}

/// Copies the message of the most recent failure on this thread into
/// `buf` (NUL terminated, truncated to `len` bytes) and returns the full
/// message length in bytes excluding the terminator. With a null `buf` or
/// zero `len`, only the length is reported.
///
/// # Safety
///
/// `buf`, when non-null, must point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn sbs_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|slot| {
        let message = slot.borrow();
        let bytes = message.as_bytes();
        if !buf.is_null() && len > 0 {
            let copy = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, copy);
            *buf.add(copy) = 0;
        }
        bytes.len()
    })
}

/// Returns the library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sbs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses and validates a JSON market configuration (the CLI schema) and
/// writes an owned handle to `out`. The handle must be released with
/// [`sbs_market_free`].
///
/// # Safety
///
/// `json` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sbs_market_from_json(
    json: *const c_char,
    out: *mut *mut SbsMarket,
) -> SbsStatus {
    if json.is_null() || out.is_null() {
        return fail(SbsStatus::NullPointer, "null json or out pointer");
    }
    let text = match CStr::from_ptr(json).to_str() {
        Ok(text) => text,
        Err(_) => return fail(SbsStatus::InvalidUtf8, "config is not valid UTF-8"),
    };
    let config = match parse_config(text) {
        Ok(config) => config,
        Err(e) => return fail(SbsStatus::InvalidConfig, &e.to_string()),
    };
    let market = match config.build_market() {
        Ok(market) => market,
        Err(e) => return fail(SbsStatus::InvalidConfig, &e.to_string()),
    };
    let handle = Box::new(SbsMarket { market });
    *out = Box::into_raw(handle);
    SbsStatus::Ok
}

/// Releases a market handle. A null handle is ignored.
///
/// # Safety
///
/// `market` must be a handle from [`sbs_market_from_json`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sbs_market_free(market: *mut SbsMarket) {
    if !market.is_null() {
        drop(Box::from_raw(market));
    }
}

/// Computes bidder `bidder` (1 or 2)'s best response to the twin bidding
/// `b_opp` and writes it to `out`.
///
/// # Safety
///
/// `market` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sbs_best_response(
    market: *const SbsMarket,
    bidder: u32,
    b_opp: f64,
    out: *mut f64,
) -> SbsStatus {
    let Some(handle) = market.as_ref() else {
        return fail(SbsStatus::NullPointer, "null market handle");
    };
    if out.is_null() {
        return fail(SbsStatus::NullPointer, "null out pointer");
    }
    let Some(bidder) = bidder_from_index(bidder) else {
        return fail(SbsStatus::InvalidArgument, "bidder index must be 1 or 2");
    };
    match sbs::best_response::best_response(&handle.market, bidder, b_opp) {
        Ok(result) => {
            *out = result.bid;
            SbsStatus::Ok
        }
        Err(e) => fail(SbsStatus::SolverFailure, &e.to_string()),
    }
}

/// Runs the sequential best-response dynamics from seed bid `b2_start` and
/// writes the limit pair, its FOC residuals (NaN at a support boundary),
/// and the round count to `out`. `converged` is false when the run ended
/// on the iteration cap instead of the tolerance.
///
/// # Safety
///
/// `market` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sbs_equilibrium(
    market: *const SbsMarket,
    b2_start: f64,
    tol: f64,
    max_iter: u64,
    out: *mut SbsEquilibrium,
) -> SbsStatus {
    let Some(handle) = market.as_ref() else {
        return fail(SbsStatus::NullPointer, "null market handle");
    };
    if out.is_null() {
        return fail(SbsStatus::NullPointer, "null out pointer");
    }
    let max_iter = match usize::try_from(max_iter) {
        Ok(n) if n >= 1 => n,
        _ => return fail(SbsStatus::InvalidArgument, "max_iter must be at least 1"),
    };
    match iterate(&handle.market, b2_start, tol, max_iter) {
        Ok(trace) => {
            let (b1, b2) = trace.limit();
            *out = SbsEquilibrium {
                b1,
                b2,
                foc1: foc_residual(&handle.market, Bidder::One, b1, b2).unwrap_or(f64::NAN),
                foc2: foc_residual(&handle.market, Bidder::Two, b2, b1).unwrap_or(f64::NAN),
                iterations: trace.steps.len() as u64,
                converged: trace.stop_reason == StopReason::Converged,
            };
            SbsStatus::Ok
        }
        Err(e) => fail(SbsStatus::SolverFailure, &e.to_string()),
    }
}

/// Runs the uniqueness probe over `starts` (at least two seed bids) and
/// writes the maximum pairwise spread of the limits to `out`.
///
/// # Safety
///
/// `market` must be a live handle, `starts` must point to `n_starts`
/// doubles, and `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sbs_uniqueness_spread(
    market: *const SbsMarket,
    starts: *const f64,
    n_starts: usize,
    tol: f64,
    max_iter: u64,
    out: *mut f64,
) -> SbsStatus {
    let Some(handle) = market.as_ref() else {
        return fail(SbsStatus::NullPointer, "null market handle");
    };
    if starts.is_null() || out.is_null() {
        return fail(SbsStatus::NullPointer, "null starts or out pointer");
    }
    let max_iter = match usize::try_from(max_iter) {
        Ok(n) if n >= 1 => n,
        _ => return fail(SbsStatus::InvalidArgument, "max_iter must be at least 1"),
    };
    let starts = std::slice::from_raw_parts(starts, n_starts);
    match uniqueness_probe(&handle.market, starts, tol, max_iter) {
        Ok(report) => {
            *out = report.max_spread;
            SbsStatus::Ok
        }
        Err(e) => fail(SbsStatus::SolverFailure, &e.to_string()),
    }
}

/// Writes the endpoints of the counterexample's equilibrium continuum for
/// buyer value `v` (the interval `[v/2, 2v/3]`, detected by grid scan).
///
/// # Safety
///
/// `lo` and `hi` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn sbs_counterexample_interval(
    v: f64,
    lo: *mut f64,
    hi: *mut f64,
) -> SbsStatus {
    if lo.is_null() || hi.is_null() {
        return fail(SbsStatus::NullPointer, "null lo or hi pointer");
    }
    if !v.is_finite() || v <= 0.0 {
        return fail(SbsStatus::InvalidArgument, "v must be finite and positive");
    }
    let (a, b) = equilibrium_interval(v);
    *lo = a;
    *hi = b;
    SbsStatus::Ok
}

/// Simulates `n` noisy auctions at planned bids `(b1, b2)` and writes the
/// summary statistics to `out`. Results are bit-identical for a given
/// `(market, bids, n, seed)` regardless of `shards`.
///
/// # Safety
///
/// `market` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sbs_simulate(
    market: *const SbsMarket,
    b1: f64,
    b2: f64,
    n: u64,
    seed: u64,
    shards: u32,
    out: *mut SbsSimStats,
) -> SbsStatus {
    let Some(handle) = market.as_ref() else {
        return fail(SbsStatus::NullPointer, "null market handle");
    };
    if out.is_null() {
        return fail(SbsStatus::NullPointer, "null out pointer");
    }
    if shards == 0 {
        return fail(SbsStatus::InvalidArgument, "shards must be at least 1");
    }
    match simulate_auctions(&handle.market, b1, b2, n, seed, shards as usize) {
        Ok(stats) => {
            *out = SbsSimStats {
                n: stats.n,
                seed: stats.seed,
                win_rate_1: stats.win_rate_1,
                win_rate_2: stats.win_rate_2,
                buyer_win_rate: stats.buyer_win_rate,
                mean_payoff_1: stats.mean_payoff_1.value,
                mean_payoff_1_err: stats.mean_payoff_1.stderr,
                mean_payoff_2: stats.mean_payoff_2.value,
                mean_payoff_2_err: stats.mean_payoff_2.stderr,
                mean_buyer_cost: stats.mean_buyer_cost.value,
                mean_buyer_cost_err: stats.mean_buyer_cost.stderr,
                mean_overpayment: stats.mean_overpayment.value,
                mean_overpayment_err: stats.mean_overpayment.stderr,
            };
            SbsStatus::Ok
        }
        Err(e) => fail(SbsStatus::SolverFailure, &e.to_string()),
    }
}
