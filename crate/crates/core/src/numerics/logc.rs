//! Complex numbers stored as `(ln|c|, arg c)`.
//!
//! Basis functions, products and kernels on the cylinder carry factors like
//! `e^{alpha y^2}` that leave the `f64` range for `|y|` beyond about 15, so
//! every cross-module function value is passed around in this form.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Div, Mul, Neg};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Reduce an angle to `(-pi, pi]`.
pub fn reduce_phase(phase: f64) -> f64 {
    if phase > -PI && phase <= PI {
        return phase;
    }
    let r = phase.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

/// A complex value `e^{log_mod + i phase}`.
///
/// `log_mod == -inf` encodes exact zero; the phase is then normalised to 0.
#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogComplex {
    log_mod: f64,
    phase: f64,
}

impl LogComplex {
    pub const ZERO: LogComplex = LogComplex {
        log_mod: f64::NEG_INFINITY,
        phase: 0.0,
    };
    pub const ONE: LogComplex = LogComplex {
        log_mod: 0.0,
        phase: 0.0,
    };

    pub fn new(log_mod: f64, phase: f64) -> Self {
        if log_mod == f64::NEG_INFINITY {
            return Self::ZERO;
        }
        LogComplex {
            log_mod,
            phase: reduce_phase(phase),
        }
    }

    /// Represents `e^w` exactly: `log_mod = Re w`, `phase = Im w` reduced.
    pub fn from_exponent(w: Complex64) -> Self {
        Self::new(w.re, w.im)
    }

    pub fn from_complex(c: Complex64) -> Self {
        if c.re == 0.0 && c.im == 0.0 {
            return Self::ZERO;
        }
        LogComplex {
            log_mod: c.norm().ln(),
            phase: c.arg(),
        }
    }

    pub fn from_real(x: f64) -> Self {
        Self::from_complex(Complex64::new(x, 0.0))
    }

    pub fn log_mod(self) -> f64 {
        self.log_mod
    }

    pub fn phase(self) -> f64 {
        self.phase
    }

    pub fn is_zero(self) -> bool {
        self.log_mod == f64::NEG_INFINITY
    }

    pub fn is_finite(self) -> bool {
        self.log_mod.is_finite() || self.is_zero()
    }

    /// Principal logarithm `ln|c| + i arg c`; `-inf` real part for zero.
    pub fn ln(self) -> Complex64 {
        Complex64::new(self.log_mod, self.phase)
    }

    pub fn to_complex(self) -> Complex64 {
        if self.is_zero() {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::from_polar(self.log_mod.exp(), self.phase)
    }

    /// `|c|`, possibly `inf` when out of range.
    pub fn abs(self) -> f64 {
        self.log_mod.exp()
    }

    /// `|c| e^{shift}`; with `shift = -(alpha/2)|z|^2` this is the weighted
    /// modulus used throughout the Fock space.
    pub fn abs_weighted(self, shift: f64) -> f64 {
        (self.log_mod + shift).exp()
    }

    pub fn conj(self) -> Self {
        Self::new(self.log_mod, -self.phase)
    }

    /// Multiply by `e^w`.
    pub fn mul_exp(self, w: Complex64) -> Self {
        if self.is_zero() {
            return self;
        }
        Self::new(self.log_mod + w.re, self.phase + w.im)
    }

    pub fn mul(self, other: Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::ZERO;
        }
        Self::new(self.log_mod + other.log_mod, self.phase + other.phase)
    }

    /// Division; a zero divisor yields `log_mod = +inf`.
    pub fn div(self, other: Self) -> Self {
        if self.is_zero() {
            return Self::ZERO;
        }
        if other.is_zero() {
            return LogComplex {
                log_mod: f64::INFINITY,
                phase: self.phase,
            };
        }
        Self::new(self.log_mod - other.log_mod, self.phase - other.phase)
    }

    pub fn powi(self, n: i32) -> Self {
        if n == 0 {
            return Self::ONE;
        }
        if self.is_zero() {
            return Self::ZERO;
        }
        Self::new(self.log_mod * n as f64, self.phase * n as f64)
    }

    pub fn sqrt(self) -> Self {
        if self.is_zero() {
            return self;
        }
        Self::new(0.5 * self.log_mod, 0.5 * self.phase)
    }

    /// Sum, pivoting on the operand with the larger modulus.
    pub fn add(self, other: Self) -> Self {
        if other.is_zero() {
            return self;
        }
        if self.is_zero() {
            return other;
        }
        let (big, small) = if self.log_mod >= other.log_mod {
            (self, other)
        } else {
            (other, self)
        };
        let ratio =
            Complex64::from_polar((small.log_mod - big.log_mod).exp(), small.phase - big.phase);
        let s = Complex64::new(1.0, 0.0) + ratio;
        if s.re == 0.0 && s.im == 0.0 {
            return Self::ZERO;
        }
        Self::new(big.log_mod + s.norm().ln(), big.phase + s.arg())
    }

    pub fn sub(self, other: Self) -> Self {
        self.add(-other)
    }

    /// `|self - other| / |self|`, computed without leaving log space.
    pub fn relative_diff(self, other: Self) -> f64 {
        if self.is_zero() {
            return if other.is_zero() { 0.0 } else { f64::INFINITY };
        }
        let d = self.sub(other);
        (d.log_mod - self.log_mod).exp()
    }
}

impl Default for LogComplex {
    fn default() -> Self {
        Self::ZERO
    }
}

impl Neg for LogComplex {
    type Output = LogComplex;
    fn neg(self) -> LogComplex {
        if self.is_zero() {
            return self;
        }
        LogComplex::new(self.log_mod, self.phase + PI)
    }
}

impl Mul for LogComplex {
    type Output = LogComplex;
    fn mul(self, rhs: LogComplex) -> LogComplex {
        LogComplex::mul(self, rhs)
    }
}

impl Div for LogComplex {
    type Output = LogComplex;
    fn div(self, rhs: LogComplex) -> LogComplex {
        LogComplex::div(self, rhs)
    }
}

impl From<Complex64> for LogComplex {
    fn from(c: Complex64) -> Self {
        LogComplex::from_complex(c)
    }
}

impl fmt::Debug for LogComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "exp({} {:+}i)", self.log_mod, self.phase)
    }
}

/// Running sum of [`LogComplex`] terms.
///
/// Terms are accumulated in ordinary complex arithmetic relative to a pivot
/// exponent; the pivot moves up when a term exceeds it by more than
/// [`LogSum::RESCALE_GAP`].
#[derive(Clone, Copy, Debug)]
pub struct LogSum {
    pivot: f64,
    acc: Complex64,
}

impl LogSum {
    pub const RESCALE_GAP: f64 = 30.0;

    pub fn new() -> Self {
        LogSum {
            pivot: f64::NEG_INFINITY,
            acc: Complex64::new(0.0, 0.0),
        }
    }

    pub fn push(&mut self, term: LogComplex) {
        if term.is_zero() {
            return;
        }
        if self.pivot == f64::NEG_INFINITY {
            self.pivot = term.log_mod;
        } else if term.log_mod > self.pivot + Self::RESCALE_GAP {
            self.acc *= (self.pivot - term.log_mod).exp();
            self.pivot = term.log_mod;
        }
        self.acc += Complex64::from_polar((term.log_mod - self.pivot).exp(), term.phase);
    }

    /// Largest exponent seen so far, up to the rescale gap.
    pub fn pivot(&self) -> f64 {
        self.pivot
    }

    pub fn value(&self) -> LogComplex {
        if self.pivot == f64::NEG_INFINITY {
            return LogComplex::ZERO;
        }
        LogComplex::from_complex(self.acc).mul_exp(Complex64::new(self.pivot, 0.0))
    }
}

impl Default for LogSum {
    fn default() -> Self {
        Self::new()
    }
}

impl FromIterator<LogComplex> for LogSum {
    fn from_iter<I: IntoIterator<Item = LogComplex>>(iter: I) -> Self {
        let mut s = LogSum::new();
        for t in iter {
            s.push(t);
        }
        s
    }
}

/// `ln(1 - e^w)` for the product factors `1 - e^{2 pi i (..)}`.
///
/// Returns [`LogComplex::ZERO`] when `e^w == 1` exactly, i.e. when `w` is an
/// exact integer multiple of `2 pi i` with zero real part.
pub fn one_minus_exp(w: Complex64) -> LogComplex {
    if w.re == 0.0 && reduce_phase(w.im) == 0.0 {
        return LogComplex::ZERO;
    }
    if w.re <= 0.0 {
        one_minus_small(w)
    } else {
        // 1 - e^w = -e^w (1 - e^{-w})
        one_minus_small(-w).mul_exp(Complex64::new(w.re, w.im + PI))
    }
}

// ln(1 - u) with u = e^w, |u| <= 1.
fn one_minus_small(w: Complex64) -> LogComplex {
    let u = Complex64::from_polar(w.re.exp(), w.im);
    let m = -2.0 * u.re + u.norm_sqr();
    if m <= -1.0 {
        return LogComplex::ZERO;
    }
    LogComplex::new(0.5 * m.ln_1p(), (-u.im).atan2(1.0 - u.re))
}
