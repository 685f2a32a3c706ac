//! Distribution families for competition and bid noise.
//!
//! Everything in the market model is described by a CDF on the nonnegative
//! reals: the exogenous competition's highest bid `Q`, and each agent's
//! multiplicative bid noise `N_i`. Four families are supported:
//!
//! * [`Cdf::power`]: `(x/c)^k` on `[0, c]`, the workhorse competition model;
//! * [`Cdf::exponential`]: `1 - exp(-rate * x)` on `[0, inf)`;
//! * [`Cdf::log_normal`]: log-normal noise with log-scale `sigma` and
//!   location fixed to `-sigma^2/2` so the noise has mean one;
//! * [`Cdf::capped_linear`]: `min(x, 1)`, the kinked family used by the
//!   closed-form example with a continuum of equilibria.
//!
//! The solvers never need samples, only CDF values, densities, the score
//! `pdf/cdf` (the derivative of `log cdf`), and quantiles for
//! inverse-transform simulation. All four are exposed here, together with a
//! grid-based log-concavity check used to validate standard-mode markets.

use crate::error::Error;
use crate::tolerances::LOG_CONCAVITY_SLACK;
use crate::Result;

/// Standard-normal helpers backing the log-normal family.
///
/// The forward CDF comes from `statrs`' erfc. The log-CDF switches to the
/// Mills-ratio asymptotic series deep in the left tail, where erfc would
/// underflow; with it, `ln cdf` stays finite and accurate down to
/// arbitrarily small quantile levels, which the construction-time
/// log-concavity checks rely on.
mod normal {
    use statrs::function::erf::{erfc, erfc_inv};

    const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_7;
    const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

    /// Below this `z` the linear-space CDF is abandoned for the asymptotic
    /// expansion. erfc(33/sqrt 2) is still a normal f64, and the series'
    /// relative error at z = -33 is below 1e-12.
    const TAIL_SWITCH: f64 = -33.0;

    pub fn cdf(z: f64) -> f64 {
        0.5 * erfc(-z * FRAC_1_SQRT_2)
    }

    pub fn ln_pdf(z: f64) -> f64 {
        -0.5 * z * z - LN_SQRT_2PI
    }

    pub fn ln_cdf(z: f64) -> f64 {
        if z >= TAIL_SWITCH {
            cdf(z).ln()
        } else {
            // Phi(z) = phi(z)/(-z) * (1 - 1/z^2 + 3/z^4 - 15/z^6 + 105/z^8 - ...)
            let r = 1.0 / (z * z);
            let series = 1.0 - r * (1.0 - r * (3.0 - r * (15.0 - r * 105.0)));
            ln_pdf(z) - (-z).ln() + series.ln()
        }
    }

    /// Inverse standard-normal CDF for `u` in `(0, 1)`.
    pub fn quantile(u: f64) -> f64 {
        -std::f64::consts::SQRT_2 * erfc_inv(2.0 * u)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Family {
    Power { exponent: f64, cap: f64 },
    Exponential { rate: f64 },
    LogNormal { sigma: f64, mu: f64 },
    CappedLinear,
}

/// A distribution on the nonnegative reals, given by its CDF.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cdf {
    family: Family,
}

/// Result of a grid-based log-concavity check; see
/// [`Cdf::verify_log_concavity`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogConcavityReport {
    /// Largest second difference of `log cdf` over the grid. Nonpositive
    /// values (up to slack) mean the log-CDF is concave on the grid.
    pub max_second_difference: f64,
    /// Whether the largest second difference is within slack.
    pub pass: bool,
}

impl Cdf {
    /// CDF `(x/c)^k` on `[0, c]`, constant one beyond the cap.
    ///
    /// Requires `exponent > 0` and `cap > 0`.
    pub fn power(exponent: f64, cap: f64) -> Result<Self> {
        if !exponent.is_finite() || exponent <= 0.0 {
            return Err(Error::InvalidParameter {
                what: "power exponent",
                value: exponent,
            });
        }
        if !cap.is_finite() || cap <= 0.0 {
            return Err(Error::InvalidParameter {
                what: "power cap",
                value: cap,
            });
        }
        Ok(Cdf {
            family: Family::Power { exponent, cap },
        })
    }

    /// CDF `1 - exp(-rate * x)` on `[0, inf)`. Requires `rate > 0`.
    pub fn exponential(rate: f64) -> Result<Self> {
        if !rate.is_finite() || rate <= 0.0 {
            return Err(Error::InvalidParameter {
                what: "exponential rate",
                value: rate,
            });
        }
        Ok(Cdf {
            family: Family::Exponential { rate },
        })
    }

    /// Log-normal with log-scale `sigma > 0` and location `-sigma^2/2`, so
    /// the distribution has mean exactly one. Used as bid noise: an agent's
    /// submitted bid is its planned bid times a draw from this family, and
    /// the unit mean keeps the noise unbiased.
    pub fn log_normal(sigma: f64) -> Result<Self> {
        if !sigma.is_finite() || sigma <= 0.0 {
            return Err(Error::InvalidParameter {
                what: "log-normal sigma",
                value: sigma,
            });
        }
        Ok(Cdf {
            family: Family::LogNormal {
                sigma,
                mu: -0.5 * sigma * sigma,
            },
        })
    }

    /// The kinked CDF `min(x, 1)`: uniform on `[0, 1]`. Only admitted in
    /// counterexample-mode markets; its kink at 1 violates the smoothness
    /// that standard mode assumes.
    pub fn capped_linear() -> Self {
        Cdf {
            family: Family::CappedLinear,
        }
    }

    pub fn is_capped_linear(&self) -> bool {
        matches!(self.family, Family::CappedLinear)
    }

    /// Family tag as it appears in run configurations.
    pub fn family_name(&self) -> &'static str {
        match self.family {
            Family::Power { .. } => "power",
            Family::Exponential { .. } => "exponential",
            Family::LogNormal { .. } => "lognormal",
            Family::CappedLinear => "capped_linear",
        }
    }

    /// CDF value at `x`. Total on all of `R`: zero left of the support,
    /// one beyond it.
    pub fn cdf(&self, x: f64) -> f64 {
        match self.family {
            Family::Power { exponent, cap } => {
                if x <= 0.0 {
                    0.0
                } else if x < cap {
                    (x / cap).powf(exponent)
                } else {
                    1.0
                }
            }
            Family::Exponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-rate * x).exp_m1()
                }
            }
            Family::LogNormal { sigma, mu } => {
                if x <= 0.0 {
                    0.0
                } else {
                    normal::cdf((x.ln() - mu) / sigma)
                }
            }
            Family::CappedLinear => x.clamp(0.0, 1.0),
        }
    }

    /// `ln cdf(x)`, computed directly in log space. `-inf` where the CDF is
    /// zero. For the log-normal family this stays accurate far into the left
    /// tail where the CDF itself underflows.
    pub fn ln_cdf(&self, x: f64) -> f64 {
        match self.family {
            Family::Power { exponent, cap } => {
                if x <= 0.0 {
                    f64::NEG_INFINITY
                } else if x < cap {
                    exponent * (x / cap).ln()
                } else {
                    0.0
                }
            }
            Family::Exponential { rate } => {
                if x <= 0.0 {
                    f64::NEG_INFINITY
                } else {
                    (-(-rate * x).exp_m1()).ln()
                }
            }
            Family::LogNormal { sigma, mu } => {
                if x <= 0.0 {
                    f64::NEG_INFINITY
                } else {
                    normal::ln_cdf((x.ln() - mu) / sigma)
                }
            }
            Family::CappedLinear => {
                if x <= 0.0 {
                    f64::NEG_INFINITY
                } else if x < 1.0 {
                    x.ln()
                } else {
                    0.0
                }
            }
        }
    }

    /// Density at `x`. At a cap (the kink of `capped_linear`, the upper
    /// endpoint of a power support) the left derivative is used, so the
    /// density there is the limit from inside the support.
    pub fn pdf(&self, x: f64) -> f64 {
        match self.family {
            Family::Power { exponent, cap } => {
                if x <= 0.0 || x > cap {
                    0.0
                } else {
                    exponent / cap * (x / cap).powf(exponent - 1.0)
                }
            }
            Family::Exponential { rate } => {
                if x < 0.0 {
                    0.0
                } else {
                    rate * (-rate * x).exp()
                }
            }
            Family::LogNormal { sigma, mu } => {
                if x <= 0.0 {
                    0.0
                } else {
                    let z = (x.ln() - mu) / sigma;
                    (normal::ln_pdf(z)).exp() / (sigma * x)
                }
            }
            Family::CappedLinear => {
                if x <= 0.0 || x > 1.0 {
                    0.0
                } else {
                    1.0
                }
            }
        }
    }

    /// Score `pdf(x)/cdf(x)`, the derivative of `log cdf`. Errors outside
    /// the support, where the CDF is identically zero. (The linear-space CDF
    /// can underflow inside the support; the score is still well defined
    /// there and is computed in log space.) Nonincreasing in `x` for every
    /// supported family; this is the monotonicity that log-concavity buys.
    pub fn score(&self, x: f64) -> Result<f64> {
        if self.ln_cdf(x) == f64::NEG_INFINITY {
            return Err(Error::DivisionByZeroCdf { x });
        }
        Ok(match self.family {
            Family::Power { exponent, cap } => {
                if x <= cap {
                    exponent / x
                } else {
                    0.0
                }
            }
            // rate * exp(-rate x) / (1 - exp(-rate x)) = rate / (exp(rate x) - 1)
            Family::Exponential { rate } => rate / (rate * x).exp_m1(),
            Family::LogNormal { sigma, mu } => {
                let z = (x.ln() - mu) / sigma;
                (normal::ln_pdf(z) - normal::ln_cdf(z)).exp() / (sigma * x)
            }
            Family::CappedLinear => {
                if x <= 1.0 {
                    1.0 / x
                } else {
                    0.0
                }
            }
        })
    }

    /// Inverse CDF at `u` in the open unit interval.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::QuantileOutOfRange { u });
        }
        Ok(match self.family {
            Family::Power { exponent, cap } => cap * u.powf(1.0 / exponent),
            Family::Exponential { rate } => -(-u).ln_1p() / rate,
            Family::LogNormal { sigma, mu } => (mu + sigma * normal::quantile(u)).exp(),
            Family::CappedLinear => u,
        })
    }

    /// Checks concavity of `log cdf` on a uniform grid of `n_points` over
    /// `[grid_lo, grid_hi]` by its second differences. Reports the largest
    /// second difference; the check passes when that maximum is at most
    /// [`LOG_CONCAVITY_SLACK`].
    ///
    /// Errors with [`Error::ZeroCdfOnGrid`] if the grid reaches below the
    /// support, where `log cdf` is `-inf`.
    pub fn verify_log_concavity(
        &self,
        grid_lo: f64,
        grid_hi: f64,
        n_points: usize,
    ) -> Result<LogConcavityReport> {
        if !(grid_lo.is_finite() && grid_hi.is_finite()) || grid_lo <= 0.0 {
            return Err(Error::InvalidGrid {
                reason: "grid bounds must be finite and strictly positive",
            });
        }
        if grid_lo >= grid_hi {
            return Err(Error::InvalidGrid {
                reason: "grid_lo must be below grid_hi",
            });
        }
        if n_points < 3 {
            return Err(Error::InvalidGrid {
                reason: "need at least 3 grid points for a second difference",
            });
        }
        let step = (grid_hi - grid_lo) / (n_points - 1) as f64;
        let mut values = Vec::with_capacity(n_points);
        for j in 0..n_points {
            let x = grid_lo + step * j as f64;
            let g = self.ln_cdf(x);
            if g == f64::NEG_INFINITY {
                return Err(Error::ZeroCdfOnGrid { x });
            }
            values.push(g);
        }
        let mut max_second_difference = f64::NEG_INFINITY;
        for w in values.windows(3) {
            let second = w[2] - 2.0 * w[1] + w[0];
            if second > max_second_difference {
                max_second_difference = second;
            }
        }
        Ok(LogConcavityReport {
            max_second_difference,
            pass: max_second_difference <= LOG_CONCAVITY_SLACK,
        })
    }
}

/// The bid distribution an agent faces from its twin: the twin plans to bid
/// `scale` and submits `scale` times its noise, so the faced CDF is
/// `F(x) = noise.cdf(x / scale)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpponentBidCdf {
    noise: Cdf,
    scale: f64,
}

impl OpponentBidCdf {
    /// Requires `scale > 0`; a vanishing twin bid is modeled by dropping the
    /// opponent factor entirely rather than by a degenerate scale.
    pub fn new(noise: Cdf, scale: f64) -> Result<Self> {
        if !scale.is_finite() || scale <= 0.0 {
            return Err(Error::InvalidParameter {
                what: "opponent bid scale",
                value: scale,
            });
        }
        Ok(OpponentBidCdf { noise, scale })
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.noise.cdf(x / self.scale)
    }

    pub fn ln_cdf(&self, x: f64) -> f64 {
        self.noise.ln_cdf(x / self.scale)
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.noise.pdf(x / self.scale) / self.scale
    }

    pub fn score(&self, x: f64) -> Result<f64> {
        Ok(self.noise.score(x / self.scale)? / self.scale)
    }
}
