//! Jacobi theta functions with characteristics,
//!
//! `theta_{a,b}(z, tau) = sum_k exp(i pi (k+a)^2 tau + 2 pi i (k+a)(z+b))`,
//!
//! and the Gaussian window `g0(t) = 2^{1/4} e^{-pi t^2}`.
//!
//! The real part of the exponent is `-pi Im(tau) u^2 - 2 pi Im(z) u` in
//! `u = k + a`, an exact Gaussian in `u` centred at `u* = -Im(z)/Im(tau)`.
//! Terms are summed outward from that centre until the remaining two-sided
//! tail is provably below the tolerance.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::logc::{LogComplex, LogSum};

/// Hard cap on the number of summed terms.
pub const MAX_TERMS: usize = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaArgs {
    a: f64,
    b: f64,
    z: Complex64,
    tau: Complex64,
}

impl ThetaArgs {
    pub fn new(a: f64, b: f64, z: Complex64, tau: Complex64) -> Result<Self> {
        if !(tau.im > 0.0) || !tau.re.is_finite() || !tau.im.is_finite() {
            return Err(Error::InvalidTau(tau.im));
        }
        if !(a.is_finite() && b.is_finite() && z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::InvalidParameter(
                "theta arguments must be finite".into(),
            ));
        }
        Ok(ThetaArgs { a, b, z, tau })
    }

    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn b(&self) -> f64 {
        self.b
    }
    pub fn z(&self) -> Complex64 {
        self.z
    }
    pub fn tau(&self) -> Complex64 {
        self.tau
    }

    fn exponent(&self, u: f64) -> Complex64 {
        let i = Complex64::new(0.0, 1.0);
        i * PI * u * u * self.tau + 2.0 * PI * i * u * (self.z + self.b)
    }

    // a reduced to [0, 1); theta depends on a only modulo 1.
    fn a_frac(&self) -> f64 {
        let f = self.a - self.a.floor();
        if f >= 1.0 {
            0.0
        } else {
            f
        }
    }

    fn center(&self) -> f64 {
        -self.z.im / self.tau.im
    }
}

/// A truncated theta sum with its certificate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThetaSeries {
    pub value: LogComplex,
    /// Summed range of `k` (after reducing `a` to `[0, 1)`).
    pub k_min: i64,
    pub k_max: i64,
    /// Bound on the dropped tail relative to the largest term.
    pub tail_bound: f64,
}

/// Theta value with tail below `abs_tol` relative to the largest term.
pub fn theta_eval(args: &ThetaArgs, abs_tol: f64) -> Result<LogComplex> {
    theta_series(args, abs_tol).map(|s| s.value)
}

/// As [`theta_eval`], also returning the summed range and tail certificate.
pub fn theta_series(args: &ThetaArgs, abs_tol: f64) -> Result<ThetaSeries> {
    if !(abs_tol > 0.0) {
        return Err(Error::InvalidParameter("abs_tol must be positive".into()));
    }
    let t = args.tau.im;
    // The largest summed term is within 1/2 of the centre, so it is at least
    // e^{-pi t / 4} times the Gaussian peak.
    let slack = (PI * t / 4.0).exp();
    let mut d = 1.0_f64;
    let tail = loop {
        let q = (-2.0 * PI * t * d).exp();
        let bound = 2.0 * (-PI * t * d * d).exp() / (1.0 - q) * slack;
        if bound < abs_tol {
            break bound;
        }
        d *= 1.25;
        if 2.0 * d + 1.0 > MAX_TERMS as f64 {
            return Err(Error::TailBoundFailure { cap: MAX_TERMS });
        }
    };
    let a = args.a_frac();
    let c = args.center();
    let k_min = (c - d - a).floor() as i64;
    let k_max = (c + d - a).ceil() as i64;
    if (k_max - k_min + 1) as f64 > MAX_TERMS as f64 {
        return Err(Error::TailBoundFailure { cap: MAX_TERMS });
    }
    Ok(ThetaSeries {
        value: partial_sum(args, a, k_min, k_max),
        k_min,
        k_max,
        tail_bound: tail,
    })
}

/// `sum_{k = k_min}^{k_max}` of the defining series with `a` used as given.
pub fn theta_partial(args: &ThetaArgs, k_min: i64, k_max: i64) -> LogComplex {
    partial_sum(args, args.a, k_min, k_max)
}

fn partial_sum(args: &ThetaArgs, a: f64, k_min: i64, k_max: i64) -> LogComplex {
    let mut s = LogSum::new();
    for k in k_min..=k_max {
        s.push(LogComplex::from_exponent(args.exponent(k as f64 + a)));
    }
    s.value()
}

/// `g0(t) = 2^{1/4} e^{-pi t^2}`, unit norm in `L^2(R)`.
pub fn gaussian_window(t: f64) -> f64 {
    2f64.powf(0.25) * (-PI * t * t).exp()
}
