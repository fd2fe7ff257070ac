//! The quasi-periodic Fock space `F^alpha_{2,nu}(C/Z)`.
//!
//! Elements are entire functions with
//!
//! `F(z + k) = e^{2 pi i k nu} e^{(alpha/2) k^2 + alpha z k} F(z)`
//!
//! and finite norm `||F||^2 = int_{[0,1) x R} |F(z)|^2 e^{-alpha |z|^2} dx dy`.
//! The monomials `phi_k(z) = e^{(alpha/2) z^2 + 2 pi i (k+nu) z}` form an
//! orthogonal basis with `||phi_k||^2 = sqrt(pi/(2 alpha)) e^{2 pi^2 (k+nu)^2 / alpha}`.
//!
//! All function values are [`LogComplex`]; weighted moduli are computed as
//! `exp(log|F| - (alpha/2)|z|^2)` so nothing overflows for `|Im z|` up to 50
//! and well beyond.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::logc::{LogComplex, LogSum};
use crate::numerics::quad::{quad_adaptive_init, quad_real_line, QuadratureSpec};
use crate::theta::{theta_eval, ThetaArgs};

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FockParams {
    alpha: f64,
    nu: f64,
}

impl FockParams {
    pub fn new(alpha: f64, nu: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "alpha must be positive, got {alpha}"
            )));
        }
        if !(0.0..1.0).contains(&nu) {
            return Err(Error::InvalidParameter(format!(
                "nu must lie in [0, 1), got {nu}"
            )));
        }
        Ok(FockParams { alpha, nu })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    /// `-(alpha/2)|z|^2`, the log of the weight applied to `|F(z)|`.
    pub fn log_weight(&self, z: Complex64) -> f64 {
        -0.5 * self.alpha * z.norm_sqr()
    }
}

/// A point of the fundamental strip `[0,1) x R`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StripPoint {
    pub x: f64,
    pub y: f64,
}

impl StripPoint {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&x) || !y.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "strip point needs x in [0, 1) and finite y, got ({x}, {y})"
            )));
        }
        Ok(StripPoint { x, y })
    }

    /// Writes `z = z0 + k` with `z0` in the strip and `k = floor(Re z)`.
    pub fn reduce(z: Complex64) -> (StripPoint, i64) {
        let k = z.re.floor();
        let mut x = z.re - k;
        // z.re slightly below an integer can round x up to 1.0
        let mut k = k as i64;
        if x >= 1.0 {
            x = 0.0;
            k += 1;
        }
        (StripPoint { x, y: z.im }, k)
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.x, self.y)
    }
}

/// An element of the space, evaluated pointwise.
///
/// Implementations must be stateless; the same function is evaluated from
/// many threads during quadrature and sweeps.
pub trait CylinderFunction: Send + Sync {
    fn params(&self) -> FockParams;
    fn eval(&self, z: Complex64) -> LogComplex;
}

impl<T: CylinderFunction + ?Sized> CylinderFunction for Arc<T> {
    fn params(&self) -> FockParams {
        (**self).params()
    }
    fn eval(&self, z: Complex64) -> LogComplex {
        (**self).eval(z)
    }
}

impl<T: CylinderFunction + ?Sized> CylinderFunction for &T {
    fn params(&self) -> FockParams {
        (**self).params()
    }
    fn eval(&self, z: Complex64) -> LogComplex {
        (**self).eval(z)
    }
}

/// The quasi-period factor `e^{2 pi i k nu} e^{(alpha/2) k^2 + alpha z k}`.
pub fn cocycle(z: Complex64, k: i64, p: &FockParams) -> LogComplex {
    let kf = k as f64;
    LogComplex::from_exponent(
        I * (2.0 * PI * kf * p.nu) + 0.5 * p.alpha * kf * kf + p.alpha * z * kf,
    )
}

/// Extends a function known on the strip to `C` through the cocycle.
pub fn extend_from_strip<F>(f_strip: F, z: Complex64, p: &FockParams) -> LogComplex
where
    F: Fn(StripPoint) -> LogComplex,
{
    let (z0, k) = StripPoint::reduce(z);
    if k == 0 {
        return f_strip(z0);
    }
    cocycle(z0.to_complex(), k, p) * f_strip(z0)
}

/// `phi_k(z) = e^{(alpha/2) z^2 + 2 pi i (k+nu) z}`.
pub fn phi(k: i64, z: Complex64, p: &FockParams) -> LogComplex {
    LogComplex::from_exponent(phi_exponent(k, z, p))
}

fn phi_exponent(k: i64, z: Complex64, p: &FockParams) -> Complex64 {
    0.5 * p.alpha * z * z + 2.0 * PI * I * (k as f64 + p.nu) * z
}

/// `ln ||phi_k||^2`.
pub fn log_phi_norm_sq(k: i64, p: &FockParams) -> f64 {
    let kappa = k as f64 + p.nu;
    0.5 * (PI / (2.0 * p.alpha)).ln() + 2.0 * PI * PI * kappa * kappa / p.alpha
}

/// `||phi_k||^2 = sqrt(pi/(2 alpha)) e^{2 pi^2 (k+nu)^2 / alpha}`.
pub fn phi_norm_sq(k: i64, p: &FockParams) -> f64 {
    log_phi_norm_sq(k, p).exp()
}

/// `|F(z)| e^{-(alpha/2)|z|^2}`.
pub fn weighted_eval<F: CylinderFunction + ?Sized>(f: &F, z: Complex64) -> f64 {
    let p = f.params();
    f.eval(z).abs_weighted(p.log_weight(z))
}

/// `log|F(z)| - (alpha/2)|z|^2`; `-inf` at zeros.
pub fn log_weighted_eval<F: CylinderFunction + ?Sized>(f: &F, z: Complex64) -> f64 {
    let p = f.params();
    f.eval(z).log_mod() + p.log_weight(z)
}

/// The basis function `phi_k`.
#[derive(Clone, Copy, Debug)]
pub struct Basis {
    pub k: i64,
    pub params: FockParams,
}

impl CylinderFunction for Basis {
    fn params(&self) -> FockParams {
        self.params
    }
    fn eval(&self, z: Complex64) -> LogComplex {
        phi(self.k, z, &self.params)
    }
}

/// `F = sum_k c_k phi_k / ||phi_k||`, coefficients on the orthonormal basis.
#[derive(Clone, Debug)]
pub struct FockSeries {
    params: FockParams,
    terms: Vec<(i64, Complex64)>,
}

impl FockSeries {
    pub fn new(params: FockParams, terms: Vec<(i64, Complex64)>) -> Self {
        FockSeries { params, terms }
    }

    pub fn terms(&self) -> &[(i64, Complex64)] {
        &self.terms
    }

    /// `sum |c_k|^2`, the exact squared norm.
    pub fn norm_sq(&self) -> f64 {
        self.terms.iter().map(|(_, c)| c.norm_sqr()).sum()
    }
}

impl CylinderFunction for FockSeries {
    fn params(&self) -> FockParams {
        self.params
    }
    fn eval(&self, z: Complex64) -> LogComplex {
        let p = &self.params;
        self.terms
            .iter()
            .map(|&(k, c)| {
                LogComplex::from_complex(c)
                    .mul_exp(phi_exponent(k, z, p) - 0.5 * log_phi_norm_sq(k, p))
            })
            .collect::<LogSum>()
            .value()
    }
}

/// The zero function.
#[derive(Clone, Copy, Debug)]
pub struct Zero(pub FockParams);

impl CylinderFunction for Zero {
    fn params(&self) -> FockParams {
        self.0
    }
    fn eval(&self, _z: Complex64) -> LogComplex {
        LogComplex::ZERO
    }
}

/// A function given on the strip, extended by the cocycle.
pub struct StripExtension<F> {
    params: FockParams,
    f: F,
}

impl<F> StripExtension<F>
where
    F: Fn(StripPoint) -> LogComplex + Send + Sync,
{
    pub fn new(params: FockParams, f: F) -> Self {
        StripExtension { params, f }
    }
}

impl<F> CylinderFunction for StripExtension<F>
where
    F: Fn(StripPoint) -> LogComplex + Send + Sync,
{
    fn params(&self) -> FockParams {
        self.params
    }
    fn eval(&self, z: Complex64) -> LogComplex {
        extend_from_strip(&self.f, z, &self.params)
    }
}

/// `T_w F(z) = e^{alpha z conj(w) - (alpha/2)|w|^2} F(z - w)`.
pub struct WeylTranslated<G> {
    inner: G,
    w: Complex64,
}

impl<G: CylinderFunction> WeylTranslated<G> {
    pub fn shift(&self) -> Complex64 {
        self.w
    }
}

impl<G: CylinderFunction> CylinderFunction for WeylTranslated<G> {
    fn params(&self) -> FockParams {
        self.inner.params()
    }
    fn eval(&self, z: Complex64) -> LogComplex {
        let a = self.params().alpha;
        self.inner
            .eval(z - self.w)
            .mul_exp(a * z * self.w.conj() - 0.5 * a * self.w.norm_sqr())
    }
}

/// Absolute tolerance on `Im(w)` against the grid `(pi/alpha) Z`.
pub const SHIFT_TOL: f64 = 1e-12;

/// The Weyl operator `T_w`; it maps the space to itself only when
/// `Im(w)` lies in `(pi/alpha) Z`.
pub fn weyl_translate<G: CylinderFunction>(f: G, w: Complex64) -> Result<WeylTranslated<G>> {
    let step = PI / f.params().alpha;
    let m = (w.im / step).round();
    if (w.im - m * step).abs() > SHIFT_TOL {
        return Err(Error::InvalidShift { im: w.im });
    }
    Ok(WeylTranslated { inner: f, w })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelMethod {
    /// `sqrt(2 alpha/pi) e^{(alpha/2)(z^2 + conj(w)^2)} theta_{nu,0}(z - conj(w), 2 pi i/alpha)`
    Theta,
    /// `(alpha/pi) e^{alpha z conj(w)} sum_k e^{-2 pi i k nu} e^{-alpha z k + alpha k conj(w) - (alpha/2) k^2}`
    Periodization,
    /// `sum_k phi_k(z) conj(phi_k(w)) / ||phi_k||^2`
    BasisSum,
}

impl KernelMethod {
    pub const ALL: [KernelMethod; 3] = [
        KernelMethod::Theta,
        KernelMethod::Periodization,
        KernelMethod::BasisSum,
    ];

    pub fn name(self) -> &'static str {
        match self {
            KernelMethod::Theta => "theta",
            KernelMethod::Periodization => "periodization",
            KernelMethod::BasisSum => "basis_sum",
        }
    }
}

impl fmt::Display for KernelMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Reproducing kernel `K(z, w)`, so that `F(w) = <F, K(., w)>`.
///
/// `tol` bounds the dropped tail of whichever series is summed, relative to
/// its largest term.
pub fn kernel(
    z: Complex64,
    w: Complex64,
    p: &FockParams,
    method: KernelMethod,
    tol: f64,
) -> Result<LogComplex> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(
            "kernel tolerance must be positive".into(),
        ));
    }
    let a = p.alpha;
    let wb = w.conj();
    match method {
        KernelMethod::Theta => {
            let args = ThetaArgs::new(p.nu, 0.0, z - wb, Complex64::new(0.0, 2.0 * PI / a))?;
            let th = theta_eval(&args, tol)?;
            let pre = 0.5 * (2.0 * a / PI).ln() + 0.5 * a * (z * z + wb * wb);
            Ok(th.mul_exp(pre))
        }
        KernelMethod::Periodization => {
            // real part of the k-exponent: -(alpha/2) k^2 + alpha k Re(conj(w) - z)
            let centre = (wb - z).re;
            let (lo, hi) = gaussian_range(centre, 0.5 * a, tol)?;
            let sum: LogSum = (lo..=hi)
                .map(|k| {
                    let kf = k as f64;
                    LogComplex::from_exponent(
                        -2.0 * PI * I * kf * p.nu - a * z * kf + a * kf * wb - 0.5 * a * kf * kf,
                    )
                })
                .collect();
            Ok(sum.value().mul_exp((a / PI).ln() + a * z * wb))
        }
        KernelMethod::BasisSum => {
            // real part in kappa = k + nu: -(2 pi^2/alpha) kappa^2 - 2 pi kappa (Im z + Im w)
            let centre = -a * (z.im + w.im) / (2.0 * PI) - p.nu;
            let (lo, hi) = gaussian_range(centre, 2.0 * PI * PI / a, tol)?;
            let sum: LogSum = (lo..=hi)
                .map(|k| {
                    LogComplex::from_exponent(
                        phi_exponent(k, z, p) + phi_exponent(k, w, p).conj()
                            - log_phi_norm_sq(k, p),
                    )
                })
                .collect();
            Ok(sum.value())
        }
    }
}

// Index range [lo, hi] around `centre` such that terms e^{-c (k - centre)^2}
// outside it sum to less than `tol` times the largest kept term.
fn gaussian_range(centre: f64, c: f64, tol: f64) -> Result<(i64, i64)> {
    let slack = (c / 4.0).exp();
    let mut d = 1.0_f64;
    loop {
        let bound = 2.0 * (-c * d * d).exp() / (1.0 - (-2.0 * c * d).exp()) * slack;
        if bound < tol {
            break;
        }
        d *= 1.25;
        if d > crate::theta::MAX_TERMS as f64 / 2.0 {
            return Err(Error::TailBoundFailure {
                cap: crate::theta::MAX_TERMS,
            });
        }
    }
    Ok(((centre - d).floor() as i64, (centre + d).ceil() as i64))
}

/// Input to the Bargmann transform: a `nu`-quasi-periodic signal on `R`,
/// `f(t + m) = e^{2 pi i m nu} f(t)`.
#[derive(Clone)]
pub enum Signal {
    /// `f = sum_k c_k e_{k,nu}` with `e_{k,nu}(t) = e^{2 pi i (k+nu) t}`.
    Fourier(Vec<(i64, Complex64)>),
    /// Values on `[0, 1)`; extended by quasi-periodicity.
    OnPeriod(Arc<dyn Fn(f64) -> Complex64 + Send + Sync>),
}

impl Signal {
    pub fn eval(&self, t: f64, nu: f64) -> Complex64 {
        match self {
            Signal::Fourier(terms) => terms
                .iter()
                .map(|&(k, c)| c * (2.0 * PI * I * (k as f64 + nu) * t).exp())
                .sum(),
            Signal::OnPeriod(f) => {
                let m = t.floor();
                let mut t0 = t - m;
                if t0 >= 1.0 {
                    t0 = 0.0;
                }
                (2.0 * PI * I * m * nu).exp() * f(t0)
            }
        }
    }
}

impl fmt::Debug for Signal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Signal::Fourier(t) => f.debug_tuple("Fourier").field(t).finish(),
            Signal::OnPeriod(_) => f.write_str("OnPeriod(..)"),
        }
    }
}

/// `B^alpha f(z) = 2^{1/4} int_R f(t) e^{2 alpha t z - alpha t^2 - (alpha/2) z^2} dt`
/// by quadrature.
///
/// With `z = x + iy` the integrand is `f(t) e^{-alpha (t-x)^2 + 2 i alpha t y}`
/// times `e^{alpha x^2}`, so the integral is taken around `t = x`. For a mode
/// `e_{k,nu}` the integral is smaller than its envelope by
/// `e^{-(pi (k+nu) + alpha y)^2/alpha}`; the relative accuracy degrades by that
/// factor, which keeps this a moderate-`|y|` oracle.
pub fn bargmann(
    signal: &Signal,
    z: Complex64,
    p: &FockParams,
    spec: &QuadratureSpec,
) -> Result<LogComplex> {
    let a = p.alpha;
    let (x, y) = (z.re, z.im);
    let r = quad_real_line(
        |t| {
            signal.eval(t, p.nu)
                * Complex64::from_polar((-a * (t - x) * (t - x)).exp(), 2.0 * a * t * y)
        },
        x,
        a,
        spec,
    )?;
    let pre = 0.25 * 2f64.ln() + a * x * x - 0.5 * a * z * z;
    Ok(LogComplex::from_complex(r.value).mul_exp(pre))
}

/// The constant in `B^alpha e_{k,nu} = c phi_k`:
/// `2^{1/4} sqrt(pi/alpha) e^{-pi^2 (k+nu)^2/alpha}`.
pub fn bargmann_constant(k: i64, p: &FockParams) -> f64 {
    let kappa = k as f64 + p.nu;
    2f64.powf(0.25) * (PI / p.alpha).sqrt() * (-PI * PI * kappa * kappa / p.alpha).exp()
}

/// A squared strip norm with its error estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StripNorm {
    pub norm_sq: f64,
    /// `ln norm_sq`, valid even when `norm_sq` overflows.
    pub log_norm_sq: f64,
    /// Relative error estimate.
    pub rel_error: f64,
    pub y_lo: f64,
    pub y_hi: f64,
}

const PROBE_XS: usize = 8;
const PROBE_DY: f64 = 0.125;

/// Vertical band outside of which the weighted modulus of `f` stays below
/// `tol` times its maximum, probed on `|y| <= search`.
pub fn suggest_band<F: CylinderFunction + ?Sized>(f: &F, search: f64, tol: f64) -> (f64, f64) {
    let n = (2.0 * search / PROBE_DY).ceil() as usize;
    let profile: Vec<f64> = (0..=n)
        .map(|i| {
            let y = -search + i as f64 * PROBE_DY;
            row_max(f, y)
        })
        .collect();
    let peak = profile.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if peak == f64::NEG_INFINITY {
        return (0.0, 0.0);
    }
    let floor = peak + tol.ln();
    let first = profile.iter().position(|&v| v >= floor).unwrap_or(0);
    let last = profile.iter().rposition(|&v| v >= floor).unwrap_or(n);
    let lo = -search + first.saturating_sub(1) as f64 * PROBE_DY;
    let hi = -search + (last + 1).min(n) as f64 * PROBE_DY;
    (lo, hi)
}

/// Symmetric truncation height `y_max` for [`strip_norm`].
pub fn suggest_y_max<F: CylinderFunction + ?Sized>(f: &F, tol: f64) -> f64 {
    let (lo, hi) = suggest_band(f, 80.0, tol);
    lo.abs().max(hi.abs())
}

fn row_max<F: CylinderFunction + ?Sized>(f: &F, y: f64) -> f64 {
    (0..PROBE_XS)
        .map(|j| log_weighted_eval(f, Complex64::new((j as f64 + 0.5) / PROBE_XS as f64, y)))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// `||F||^2` over `[0,1) x [-y_max, y_max]`.
pub fn strip_norm<F: CylinderFunction + ?Sized>(
    f: &F,
    y_max: f64,
    spec: &QuadratureSpec,
) -> Result<StripNorm> {
    strip_norm_band(f, -y_max, y_max, spec)
}

/// `||F||^2` over `[0,1) x [y_lo, y_hi]`.
///
/// The integrand `|F|^2 e^{-alpha|z|^2}` is 1-periodic in `x` for every
/// element of the space, so the inner integral uses the periodic trapezoid
/// rule (spectrally accurate), doubled until it settles; the outer one is
/// adaptive Gauss-Kronrod. Everything is scaled by the probed maximum.
pub fn strip_norm_band<F: CylinderFunction + ?Sized>(
    f: &F,
    y_lo: f64,
    y_hi: f64,
    spec: &QuadratureSpec,
) -> Result<StripNorm> {
    let r = integrate_strip(
        |z| {
            let v = log_weighted_eval(f, z);
            LogComplex::new(2.0 * v, 0.0)
        },
        y_lo,
        y_hi,
        spec,
    )?;
    let value = r.value;
    let log_norm_sq = value.log_mod();
    Ok(StripNorm {
        norm_sq: value.to_complex().re,
        log_norm_sq,
        rel_error: r.rel_error,
        y_lo,
        y_hi,
    })
}

/// A strip integral in log space.
#[derive(Clone, Copy, Debug)]
pub struct StripIntegral {
    pub value: LogComplex,
    pub rel_error: f64,
}

const TRAPEZOID_START: usize = 16;
const TRAPEZOID_MAX: usize = 4096;
const ROUNDOFF_FACTOR: f64 = 64.0;

/// `int_0^1 int_{y_lo}^{y_hi} g(x + iy) dy dx` for an integrand that is
/// 1-periodic in `x` (as `F conj(G) e^{-alpha |z|^2}` is for any two
/// elements of the space).
pub fn integrate_strip<G>(
    g: G,
    y_lo: f64,
    y_hi: f64,
    spec: &QuadratureSpec,
) -> Result<StripIntegral>
where
    G: Fn(Complex64) -> LogComplex,
{
    if !(y_hi > y_lo) {
        return Ok(StripIntegral {
            value: LogComplex::ZERO,
            rel_error: 0.0,
        });
    }
    // scale from a probe of the band
    let n_probe = ((y_hi - y_lo) / PROBE_DY).ceil().max(1.0) as usize;
    let mut scale = f64::NEG_INFINITY;
    for i in 0..=n_probe {
        let y = y_lo + (y_hi - y_lo) * i as f64 / n_probe as f64;
        for j in 0..PROBE_XS {
            let v = g(Complex64::new((j as f64 + 0.5) / PROBE_XS as f64, y)).log_mod();
            scale = scale.max(v);
        }
    }
    if scale == f64::NEG_INFINITY {
        return Ok(StripIntegral {
            value: LogComplex::ZERO,
            rel_error: 0.0,
        });
    }
    let inner_tol = (0.01 * spec.rel_tol).max(1e-15);
    let row = |y: f64| -> Complex64 {
        // returns (sum, sum of moduli)
        let eval = |n: usize, offset: usize, step: usize| -> (Complex64, f64) {
            let mut s = Complex64::new(0.0, 0.0);
            let mut m = 0.0;
            let mut j = offset;
            while j < n {
                let v = g(Complex64::new(j as f64 / n as f64, y))
                    .mul_exp(Complex64::new(-scale, 0.0))
                    .to_complex();
                s += v;
                m += v.norm();
                j += step;
            }
            (s, m)
        };
        let mut n = TRAPEZOID_START;
        let (mut sum, mut mag) = eval(n, 0, 1);
        let mut est = sum / n as f64;
        while n < TRAPEZOID_MAX {
            // refine with the new odd-indexed points of the doubled grid
            let (odd, odd_mag) = eval(2 * n, 1, 2);
            sum += odd;
            mag += odd_mag;
            n *= 2;
            let next = sum / n as f64;
            let delta = (next - est).norm();
            est = next;
            // below the rounding noise of the sum no refinement helps
            let noise = ROUNDOFF_FACTOR * f64::EPSILON * mag / n as f64;
            if delta <= (inner_tol * est.norm()).max(spec.abs_tol).max(noise) {
                break;
            }
        }
        est
    };
    let pieces = ((y_hi - y_lo) / 0.5).ceil().max(1.0) as usize;
    let r = quad_adaptive_init(row, y_lo, y_hi, pieces, spec)?;
    let value = LogComplex::from_complex(r.value).mul_exp(Complex64::new(scale, 0.0));
    let rel_error = if r.value.norm() > 0.0 {
        r.abs_error / r.value.norm()
    } else {
        r.abs_error
    };
    Ok(StripIntegral { value, rel_error })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::rng::RngStream;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn pi0() -> FockParams {
        FockParams::new(PI, 0.0).unwrap()
    }

    fn qspec() -> QuadratureSpec {
        QuadratureSpec::new(1e-13, 1e-10, 4000).unwrap()
    }

    #[test]
    fn params_validate() {
        assert!(FockParams::new(0.0, 0.0).is_err());
        assert!(FockParams::new(1.0, 1.0).is_err());
        assert!(FockParams::new(1.0, -0.1).is_err());
        assert!(FockParams::new(1.0, 0.999).is_ok());
    }

    #[test]
    fn reduce_uses_floor() {
        let (p, k) = StripPoint::reduce(c(-0.25, 2.0));
        assert_eq!(k, -1);
        assert_eq!(p.x, 0.75);
        let (p, k) = StripPoint::reduce(c(3.0, 0.0));
        assert_eq!((p.x, k), (0.0, 3));
        let (p, k) = StripPoint::reduce(c(-1e-17, 0.0));
        assert!(p.x < 1.0 && k == 0 || k == -1);
    }

    #[test]
    fn phi_simple_values() {
        assert_eq!(phi(0, c(0.0, 0.0), &pi0()), LogComplex::ONE);
        for k in -3..=3 {
            let v = phi(k, c(0.0, 1.0), &pi0());
            assert!((v.log_mod() - (-PI / 2.0 - 2.0 * PI * k as f64)).abs() < 1e-12);
            assert!(v.phase().abs() < 1e-15);
        }
    }

    #[test]
    fn phi_satisfies_cocycle() {
        let mut r = RngStream::new(1);
        for _ in 0..100 {
            let p = FockParams::new(r.uniform(0.5, 6.0), r.uniform(0.0, 1.0)).unwrap();
            let k = (r.uniform(-4.0, 4.0)).round() as i64;
            let z = c(r.uniform(-3.0, 3.0), r.uniform(-5.0, 5.0));
            let m = (r.uniform(-3.0, 3.0)).round() as i64;
            let lhs = phi(k, z + m as f64, &p);
            let rhs = cocycle(z, m, &p) * phi(k, z, &p);
            assert!(lhs.relative_diff(rhs) < 1e-9);
        }
    }

    #[test]
    fn extension_matches_direct() {
        let p = FockParams::new(2.0, 0.3).unwrap();
        let strip = |s: StripPoint| phi(0, s.to_complex(), &p);
        let z0 = c(0.4, 0.7);
        assert_eq!(extend_from_strip(strip, z0, &p), phi(0, z0, &p));
        for k in [-3i64, -1, 1, 2, 5] {
            let z = z0 + k as f64;
            let v = extend_from_strip(strip, z, &p);
            assert!(v.relative_diff(phi(0, z, &p)) < 1e-12, "{k}");
        }
        // k then -k
        let up = cocycle(z0, 3, &p) * cocycle(z0 + 3.0, -3, &p);
        assert!(up.relative_diff(LogComplex::ONE) < 1e-12);
    }

    #[test]
    fn norm_closed_form() {
        assert!((phi_norm_sq(0, &pi0()) - 0.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(phi_norm_sq(3, &pi0()), phi_norm_sq(-3, &pi0()));
        let p = FockParams::new(2.0, 0.25).unwrap();
        let ratio = phi_norm_sq(2, &p) / phi_norm_sq(1, &p);
        let expected = (2.0 * PI * PI * (2.0 * 1.0 + 2.0 * 0.25 + 1.0) / 2.0).exp();
        assert!((ratio / expected - 1.0).abs() < 1e-12);
    }

    #[test]
    fn norm_by_quadrature() {
        for k in [0i64, 1] {
            let b = Basis { k, params: pi0() };
            let y_max = (k as f64).abs() * 2.0 * PI / PI + 8.0 / PI.sqrt();
            let n = strip_norm(&b, y_max, &qspec()).unwrap();
            assert!((n.norm_sq / phi_norm_sq(k, &pi0()) - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn orthogonality_by_quadrature() {
        let p = pi0();
        let f = StripExtension::new(p, move |s: StripPoint| {
            phi(0, s.to_complex(), &p).add(phi(1, s.to_complex(), &p))
        });
        let y_max = suggest_y_max(&f, 1e-16);
        let n = strip_norm(&f, y_max, &qspec()).unwrap();
        let expected = phi_norm_sq(0, &p) + phi_norm_sq(1, &p);
        assert!((n.norm_sq / expected - 1.0).abs() < 1e-8);
    }

    #[test]
    fn zero_function() {
        let z = Zero(pi0());
        assert_eq!(weighted_eval(&z, c(0.3, 1.0)), 0.0);
        assert_eq!(strip_norm(&z, 5.0, &qspec()).unwrap().norm_sq, 0.0);
    }

    #[test]
    fn weighted_basis_value() {
        let p = FockParams::new(1.7, 0.4).unwrap();
        for &(x, y) in &[(0.2, 0.5), (0.9, -1.3), (0.5, 0.0)] {
            let b = Basis { k: 2, params: p };
            let direct = (-p.alpha() * y * y - 2.0 * PI * (2.0 + p.nu()) * y).exp();
            let got = weighted_eval(&b, c(x, y));
            assert!((got / direct - 1.0).abs() < 1e-12);
            // ordinary arithmetic oracle
            let z = c(x, y);
            let plain = (0.5 * p.alpha() * z * z + 2.0 * PI * I * (2.0 + p.nu()) * z)
                .exp()
                .norm()
                * (-0.5 * p.alpha() * z.norm_sqr()).exp();
            assert!((got / plain - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn weighted_modulus_is_periodic() {
        let p = FockParams::new(2.0, 0.3).unwrap();
        let f = FockSeries::new(
            p,
            vec![(0, c(1.0, 0.5)), (-2, c(0.0, 2.0)), (3, c(-1.0, 0.0))],
        );
        let mut r = RngStream::new(9);
        for _ in 0..50 {
            let z = c(r.uniform(-2.0, 2.0), r.uniform(-50.0, 50.0));
            let a = log_weighted_eval(&f, z);
            let b = log_weighted_eval(&f, z + 1.0);
            assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
        }
    }

    #[test]
    fn deep_evaluation_stays_finite() {
        let b = Basis {
            k: 0,
            params: pi0(),
        };
        let v = weighted_eval(&b, c(0.3, 50.0));
        assert!(v.is_finite());
        assert!(b.eval(c(0.3, 50.0)).log_mod().is_finite());
    }

    #[test]
    fn kernel_at_origin() {
        let expected = 2f64.sqrt()
            * (-5i64..=5)
                .map(|k| (-2.0 * PI * (k * k) as f64).exp())
                .sum::<f64>();
        for m in KernelMethod::ALL {
            let v = kernel(c(0.0, 0.0), c(0.0, 0.0), &pi0(), m, 1e-14).unwrap();
            assert!((v.to_complex() - expected).norm() < 1e-13 * expected, "{m}");
        }
    }

    #[test]
    fn kernel_hermitian_symmetry() {
        let p = FockParams::new(2.0, 0.3).unwrap();
        let (z, w) = (c(0.3, 0.8), c(-0.4, -1.1));
        for m in KernelMethod::ALL {
            let a = kernel(z, w, &p, m, 1e-14).unwrap();
            let b = kernel(w, z, &p, m, 1e-14).unwrap().conj();
            assert!(a.relative_diff(b) < 1e-12);
        }
    }

    #[test]
    fn kernel_methods_agree() {
        let mut r = RngStream::new(3);
        for &(alpha, nu) in &[(PI, 0.0), (2.0, 0.3), (5.0, 0.9)] {
            let p = FockParams::new(alpha, nu).unwrap();
            for _ in 0..50 {
                let z = c(r.uniform(-1.0, 2.0), r.uniform(-3.0, 3.0));
                let w = c(r.uniform(-1.0, 2.0), r.uniform(-3.0, 3.0));
                let vals: Vec<_> = KernelMethod::ALL
                    .iter()
                    .map(|&m| kernel(z, w, &p, m, 1e-14).unwrap())
                    .collect();
                for i in 0..3 {
                    for j in 0..i {
                        assert!(vals[i].relative_diff(vals[j]) < 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn bargmann_of_constant() {
        let spec = QuadratureSpec::new(1e-14, 1e-12, 400).unwrap();
        let f = Signal::Fourier(vec![(0, c(1.0, 0.0))]);
        let v = bargmann(&f, c(0.0, 0.0), &pi0(), &spec).unwrap();
        assert!((v.to_complex() - 2f64.powf(0.25)).norm() < 1e-12);
        assert!((bargmann_constant(0, &pi0()) - 2f64.powf(0.25)).abs() < 1e-15);
    }

    #[test]
    fn bargmann_is_proportional_to_basis() {
        let spec = QuadratureSpec::new(1e-15, 1e-12, 1000).unwrap();
        let mut r = RngStream::new(5);
        for &(alpha, nu, k) in &[(PI, 0.0, 0i64), (2.0, 0.3, 1), (5.0, 0.9, -1)] {
            let p = FockParams::new(alpha, nu).unwrap();
            let f = Signal::Fourier(vec![(k, c(1.0, 0.0))]);
            let expected = bargmann_constant(k, &p);
            for _ in 0..20 {
                let z = c(r.uniform(0.0, 1.0), r.uniform(-0.5, 0.5));
                let ratio = bargmann(&f, z, &p, &spec).unwrap() / phi(k, z, &p);
                let d = ratio.relative_diff(LogComplex::from_real(expected));
                assert!(d < 1e-6, "{alpha} {nu} {k} {z} {d} {ratio:?} {expected}");
            }
        }
    }

    #[test]
    fn bargmann_of_period_callable_matches_fourier() {
        let spec = QuadratureSpec::new(1e-14, 1e-12, 1000).unwrap();
        let p = FockParams::new(2.0, 0.3).unwrap();
        let terms = vec![(0, c(1.0, 0.0)), (1, c(0.0, -0.5))];
        let four = Signal::Fourier(terms.clone());
        let nu = p.nu();
        let call = Signal::OnPeriod(Arc::new(move |t| {
            terms
                .iter()
                .map(|&(k, a)| a * (2.0 * PI * I * (k as f64 + nu) * t).exp())
                .sum()
        }));
        for z in [c(0.2, 0.3), c(0.7, -0.9)] {
            let a = bargmann(&four, z, &p, &spec).unwrap();
            let b = bargmann(&call, z, &p, &spec).unwrap();
            assert!(a.relative_diff(b) < 1e-9);
        }
    }

    #[test]
    fn bargmann_is_linear() {
        let spec = QuadratureSpec::new(1e-15, 1e-12, 1000).unwrap();
        let p = pi0();
        let f = Signal::Fourier(vec![(0, c(1.0, 0.0))]);
        let g = Signal::Fourier(vec![(1, c(0.0, 2.0))]);
        let fg = Signal::Fourier(vec![(0, c(1.0, 0.0)), (1, c(0.0, 2.0))]);
        let z = c(0.3, 0.4);
        let lhs = bargmann(&fg, z, &p, &spec).unwrap();
        let rhs = bargmann(&f, z, &p, &spec)
            .unwrap()
            .add(bargmann(&g, z, &p, &spec).unwrap());
        assert!(lhs.relative_diff(rhs) < 1e-10);
    }

    #[test]
    fn weyl_shift_checks() {
        let b = Basis {
            k: 0,
            params: pi0(),
        };
        assert!(matches!(
            weyl_translate(b, c(0.0, 0.5)),
            Err(Error::InvalidShift { .. })
        ));
        let id = weyl_translate(b, c(0.0, 0.0)).unwrap();
        assert_eq!(id.eval(c(0.3, 0.2)), b.eval(c(0.3, 0.2)));
    }

    #[test]
    fn weyl_round_trip_modulus() {
        let p = FockParams::new(2.0, 0.3).unwrap();
        let b = Basis { k: 1, params: p };
        let w = c(0.37, 3.0 * PI / 2.0);
        let there = weyl_translate(b, -w).unwrap();
        let back = weyl_translate(there, w).unwrap();
        let z = c(0.1, -0.4);
        assert!((back.eval(z).log_mod() - b.eval(z).log_mod()).abs() < 1e-12);
    }

    #[test]
    fn weyl_preserves_cocycle_and_norm() {
        let p = pi0();
        let b = Basis { k: 0, params: p };
        let t = weyl_translate(b, c(0.2, 1.0)).unwrap();
        let z = c(0.3, 0.1);
        let lhs = t.eval(z + 1.0);
        let rhs = cocycle(z, 1, &p) * t.eval(z);
        assert!(lhs.relative_diff(rhs) < 1e-12);
        let y = suggest_y_max(&t, 1e-16);
        let n = strip_norm(&t, y, &qspec()).unwrap();
        assert!((n.norm_sq / phi_norm_sq(0, &p) - 1.0).abs() < 1e-6);
    }
}
