//! Weierstrass-type products over a node set, the explicit interpolation
//! series and the sampling reconstruction series (all at `nu = 0`).
//!
//! Nodes carry the two-sided index of [`two_sided_indexing`]. With factors
//!
//! `u_k(z) = 1 - e^{2 pi i (z_k - z)}` and `l_k(z) = 1 - e^{2 pi i (z - z_k)}`,
//!
//! both 1-periodic in `z` and vanishing exactly on `z_k + Z`,
//!
//! * `G(z) = e^{(alpha/2) z^2} prod_{k >= 0} u_k(z) prod_{k < 0} l_k(z)`;
//! * `G_n(z) = prod_{k < n} l_k(z) prod_{k > n} u_k(z)`, the product without
//!   the `n`-th factor, split at `n` so that every factor is bounded by 2 on
//!   the side of `z_n` where the series term concentrates.
//!
//! The interpolant is
//!
//! `F(z) = sum_n a_n e^{alpha (z - z_n) conj(w_n) + (alpha/2)((z - w_n)^2 - (z_n - w_n)^2)} G_n(z) / G_n(z_n)`
//!
//! with `w_n = x_n + i (pi/alpha) floor((alpha/pi) y_n)`. Each term satisfies
//! the quasi-periodicity relation with `nu = 0`, vanishes at the other nodes
//! and equals `a_n` at `z_n`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{log_weighted_eval, strip_norm_band, suggest_band, CylinderFunction, FockParams};
use crate::numerics::logc::{one_minus_exp, LogComplex, LogSum};
use crate::numerics::quad::QuadratureSpec;
use crate::pointset::{two_sided_indexing, uniform_closeness, PointSet};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Which nodes enter the products, and how small the dropped ones must be.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProductTruncation {
    /// Nodes with two-sided index `|k| <= n_terms` are kept.
    pub n_terms: usize,
    /// Bound on `sum_{dropped} e^{-2 pi dist_k}` at the evaluation point.
    pub tail_tol: f64,
}

impl ProductTruncation {
    pub fn new(n_terms: usize, tail_tol: f64) -> Result<Self> {
        if !(tail_tol > 0.0) {
            return Err(Error::InvalidParameter("tail_tol must be positive".into()));
        }
        Ok(ProductTruncation { n_terms, tail_tol })
    }

    /// Keeps every node of a finite set.
    pub fn all() -> Self {
        ProductTruncation {
            n_terms: usize::MAX / 2,
            tail_tol: 1e-12,
        }
    }
}

/// Nodes in two-sided order with the dropped ones kept aside for the tail
/// check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Nodes {
    /// Kept nodes, ascending index.
    pub z: Vec<Complex64>,
    /// Two-sided index of each kept node.
    pub index: Vec<i64>,
    /// Sorted positions in the source set of each kept node.
    pub position: Vec<usize>,
    dropped_above: Vec<f64>,
    dropped_below: Vec<f64>,
    pub trunc: ProductTruncation,
}

impl Nodes {
    pub fn new(set: &PointSet, trunc: ProductTruncation) -> Result<Self> {
        let ix = two_sided_indexing(set)?;
        let mut z = Vec::new();
        let mut index = Vec::new();
        let mut position = Vec::new();
        let mut dropped_above = Vec::new();
        let mut dropped_below = Vec::new();
        for (i, p) in set.points().iter().enumerate() {
            let k = ix.index_of(i);
            if k.unsigned_abs() as usize <= trunc.n_terms {
                z.push(p.to_complex());
                index.push(k);
                position.push(i);
            } else if k > 0 {
                dropped_above.push(p.y);
            } else {
                dropped_below.push(p.y);
            }
        }
        Ok(Nodes {
            z,
            index,
            position,
            dropped_above,
            dropped_below,
            trunc,
        })
    }

    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    /// Checks that the dropped factors are negligible at height `y`: each
    /// contributes `|log(1 - e)| <= 2 e` with `e = e^{-2 pi dist}`.
    pub fn check_tail(&self, y: f64) -> Result<()> {
        let tail: f64 = self
            .dropped_above
            .iter()
            .map(|&yk| (-2.0 * PI * (yk - y)).exp())
            .chain(
                self.dropped_below
                    .iter()
                    .map(|&yk| (-2.0 * PI * (y - yk)).exp()),
            )
            .sum();
        if tail >= self.trunc.tail_tol {
            return Err(Error::TailBoundViolation {
                y,
                detail: format!(
                    "dropped factors sum to {tail:.3e}, above tail_tol {:.3e}",
                    self.trunc.tail_tol
                ),
            });
        }
        Ok(())
    }

    fn position_of_index(&self, n: i64) -> Option<usize> {
        self.index.binary_search(&n).ok()
    }
}

/// `ln(1 - e^{2 pi i d})`, with `d` first reduced mod 1 so the factor is
/// exactly zero iff `d` is an integer.
fn log_factor(d: Complex64) -> LogComplex {
    let d = Complex64::new(d.re - d.re.round(), d.im);
    if d.re == 0.0 && d.im == 0.0 {
        return LogComplex::ZERO;
    }
    one_minus_exp(2.0 * PI * I * d)
}

fn upper(zk: Complex64, z: Complex64) -> LogComplex {
    log_factor(zk - z)
}

fn lower(zk: Complex64, z: Complex64) -> LogComplex {
    log_factor(z - zk)
}

/// `G(z)`, with prefactor `e^{(alpha/2) z^2}` and the product split at index 0.
pub fn product_g(
    set: &PointSet,
    z: Complex64,
    p: &FockParams,
    trunc: ProductTruncation,
) -> Result<LogComplex> {
    let nodes = Nodes::new(set, trunc)?;
    nodes.check_tail(z.im)?;
    Ok(g_with_prefactor(&nodes, z, p.alpha()))
}

fn g_with_prefactor(nodes: &Nodes, z: Complex64, alpha: f64) -> LogComplex {
    raw_product(nodes, z).mul_exp(0.5 * alpha * z * z)
}

fn raw_product(nodes: &Nodes, z: Complex64) -> LogComplex {
    nodes
        .z
        .iter()
        .zip(&nodes.index)
        .fold(LogComplex::ONE, |acc, (&zk, &k)| {
            acc * if k >= 0 { upper(zk, z) } else { lower(zk, z) }
        })
}

/// `G_n(z)`: all factors but the `n`-th, lower form below `n`, upper form
/// above; no prefactor.
pub fn product_g_n(
    set: &PointSet,
    n: i64,
    z: Complex64,
    trunc: ProductTruncation,
) -> Result<LogComplex> {
    let nodes = Nodes::new(set, trunc)?;
    nodes.check_tail(z.im)?;
    let pos = nodes
        .position_of_index(n)
        .ok_or_else(|| Error::InvalidParameter(format!("index {n} is not a kept node")))?;
    Ok(all_g_n(&nodes, z)[pos])
}

/// `G_n(z)` for every kept `n` by prefix and suffix products, `O(N)`.
fn all_g_n(nodes: &Nodes, z: Complex64) -> Vec<LogComplex> {
    let n = nodes.len();
    let mut prefix = vec![LogComplex::ONE; n + 1];
    for i in 0..n {
        prefix[i + 1] = prefix[i] * lower(nodes.z[i], z);
    }
    let mut suffix = vec![LogComplex::ONE; n + 1];
    for i in (0..n).rev() {
        suffix[i] = suffix[i + 1] * upper(nodes.z[i], z);
    }
    (0..n).map(|i| prefix[i] * suffix[i + 1]).collect()
}

/// Products without the `k`-th factor, split at 0 as in `G`.
fn all_coproducts(nodes: &Nodes, z: Complex64) -> Vec<LogComplex> {
    let n = nodes.len();
    let f: Vec<LogComplex> = (0..n)
        .map(|i| {
            if nodes.index[i] >= 0 {
                upper(nodes.z[i], z)
            } else {
                lower(nodes.z[i], z)
            }
        })
        .collect();
    let mut prefix = vec![LogComplex::ONE; n + 1];
    for i in 0..n {
        prefix[i + 1] = prefix[i] * f[i];
    }
    let mut suffix = vec![LogComplex::ONE; n + 1];
    for i in (0..n).rev() {
        suffix[i] = suffix[i + 1] * f[i];
    }
    (0..n).map(|i| prefix[i] * suffix[i + 1]).collect()
}

/// Underflow threshold for `G_n(z_n)`.
pub const MIN_LOG_DENOMINATOR: f64 = -700.0;

/// Everything needed to evaluate the interpolation series.
#[derive(Clone, Debug, Serialize)]
pub struct InterpolantSpec {
    pub nodes: Nodes,
    /// `a_n` for each kept node.
    pub data: Vec<LogComplex>,
    pub params: FockParams,
    /// `w_n = x_n + i (pi/alpha) floor((alpha/pi) y_n)`.
    pub w_nodes: Vec<Complex64>,
    /// `G_n(z_n)`.
    pub denominators: Vec<LogComplex>,
}

/// Builds the interpolant of `data` (one value per point of `set`, in
/// sorted order) on the kept nodes.
pub fn interpolate(
    set: &PointSet,
    data: &[LogComplex],
    p: &FockParams,
    trunc: ProductTruncation,
) -> Result<InterpolantSpec> {
    if p.nu() != 0.0 {
        return Err(Error::InvalidParameter(
            "the interpolation series is implemented for nu = 0".into(),
        ));
    }
    if data.len() != set.len() {
        return Err(Error::InvalidParameter(format!(
            "{} data values for {} nodes",
            data.len(),
            set.len()
        )));
    }
    let nodes = Nodes::new(set, trunc)?;
    let step = PI / p.alpha();
    let w_nodes: Vec<Complex64> = nodes
        .z
        .iter()
        .map(|z| Complex64::new(z.re, step * (z.im / step).floor()))
        .collect();
    let denominators: Vec<LogComplex> = nodes
        .z
        .iter()
        .enumerate()
        .map(|(i, &zn)| all_g_n(&nodes, zn)[i])
        .collect();
    for (i, d) in denominators.iter().enumerate() {
        if d.log_mod() < MIN_LOG_DENOMINATOR {
            return Err(Error::ZeroDenominator {
                index: nodes.index[i],
            });
        }
    }
    let data = nodes.position.iter().map(|&i| data[i]).collect();
    Ok(InterpolantSpec {
        nodes,
        data,
        params: *p,
        w_nodes,
        denominators,
    })
}

impl InterpolantSpec {
    /// The series at `z`, summed term by term (no node shortcut).
    pub fn series(&self, z: Complex64) -> LogComplex {
        let a = self.params.alpha();
        let gn = all_g_n(&self.nodes, z);
        let mut s = LogSum::new();
        for i in 0..self.nodes.len() {
            if self.data[i].is_zero() {
                continue;
            }
            let (zn, wn) = (self.nodes.z[i], self.w_nodes[i]);
            let e =
                a * (z - zn) * wn.conj() + 0.5 * a * ((z - wn) * (z - wn) - (zn - wn) * (zn - wn));
            s.push((self.data[i] * gn[i] / self.denominators[i]).mul_exp(e));
        }
        s.value()
    }

    /// Weighted `l^2` norm squared of the data, in log form:
    /// `ln sum |a_n|^2 e^{-alpha |z_n|^2}`.
    pub fn log_data_norm_sq(&self) -> f64 {
        let a = self.params.alpha();
        self.data
            .iter()
            .zip(&self.nodes.z)
            .map(|(d, z)| LogComplex::new(2.0 * d.log_mod() - a * z.norm_sqr(), 0.0))
            .collect::<LogSum>()
            .value()
            .log_mod()
    }
}

impl CylinderFunction for InterpolantSpec {
    fn params(&self) -> FockParams {
        self.params
    }
    fn eval(&self, z: Complex64) -> LogComplex {
        self.series(z)
    }
}

/// `F(z)`; returns the datum exactly when `z` is a node.
pub fn evaluate_interpolant(spec: &InterpolantSpec, z: Complex64) -> Result<LogComplex> {
    spec.nodes.check_tail(z.im)?;
    if let Some(i) = spec.nodes.z.iter().position(|&zn| zn == z) {
        return Ok(spec.data[i]);
    }
    Ok(spec.series(z))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct InterpolationReport {
    /// `max_n |F(z_n) - a_n| / |a_n|` from the series.
    pub max_node_residual: f64,
    /// `||F|| / ||a||_{2,alpha}`; 0 for zero data.
    pub norm_ratio: f64,
    pub log_norm_ratio: f64,
    pub quadrature_rel_error: f64,
    pub y_lo: f64,
    pub y_hi: f64,
}

/// Node residuals and the norm ratio. With `band = None` the integration
/// band is probed from the weighted modulus.
pub fn interpolation_report(
    spec: &InterpolantSpec,
    band: Option<(f64, f64)>,
    quad: &QuadratureSpec,
) -> Result<InterpolationReport> {
    let residuals: Vec<f64> = (0..spec.nodes.len())
        .into_par_iter()
        .map(|i| {
            let a = spec.data[i];
            if a.is_zero() {
                let v = spec.series(spec.nodes.z[i]);
                return if v.is_zero() { 0.0 } else { f64::INFINITY };
            }
            a.relative_diff(spec.series(spec.nodes.z[i]))
        })
        .collect();
    let max_node_residual = residuals.iter().copied().fold(0.0, f64::max);
    if spec.data.iter().all(|d| d.is_zero()) {
        return Ok(InterpolationReport {
            max_node_residual,
            norm_ratio: 0.0,
            log_norm_ratio: f64::NEG_INFINITY,
            quadrature_rel_error: 0.0,
            y_lo: 0.0,
            y_hi: 0.0,
        });
    }
    let (y_lo, y_hi) = match band {
        Some(b) => b,
        None => {
            let ext = spec.nodes.z.iter().fold(0.0_f64, |m, z| m.max(z.im.abs()));
            suggest_band(spec, ext + 20.0, 1e-18)
        }
    };
    let n = strip_norm_band(spec, y_lo, y_hi, quad)?;
    let log_ratio = 0.5 * (n.log_norm_sq - spec.log_data_norm_sq());
    Ok(InterpolationReport {
        max_node_residual,
        norm_ratio: log_ratio.exp(),
        log_norm_ratio: log_ratio,
        quadrature_rel_error: n.rel_error,
        y_lo,
        y_hi,
    })
}

/// The sampling reconstruction series on nodes uniformly close to
/// `Lambda_beta`, for functions of the space with parameter `alpha < beta`:
///
/// `F(z) = 2 pi i sum_k F(z_k) e^{(beta-alpha) z_k^2/2} G(z) e^{-(beta-alpha) z^2/2} / (G'(z_k) (1 - e^{2 pi i (z_k - z)}))`
///
/// with `G` built with prefactor `e^{(beta/2) z^2}`. Only the vanishing
/// factor of `G` is differentiated:
/// `G'(z_k) = e^{(beta/2) z_k^2} (+-2 pi i) Q_k(z_k)`, sign `+` for `k >= 0`
/// and `-` for `k < 0`, where `Q_k` is the product without the `k`-th
/// factor. Dividing `G(z)` by `1 - e^{2 pi i (z_k - z)}` likewise cancels
/// that factor analytically (for `k < 0` up to `-e^{2 pi i (z - z_k)}`), so
/// the `k`-th term is
///
/// `F(z_k) e^{(alpha/2)(z^2 - z_k^2)} s_k(z) Q_k(z) / Q_k(z_k)`,
///
/// `s_k = 1` for `k >= 0` and `s_k = e^{2 pi i (z - z_k)}` for `k < 0`. It
/// has no singularity and returns `F(z_k)` at `z = z_k`.
#[derive(Clone, Debug, Serialize)]
pub struct Reconstruction {
    pub nodes: Nodes,
    pub samples: Vec<LogComplex>,
    pub alpha: f64,
    pub beta: f64,
    /// `ln |G'(z_k)|`-style normaliser `Q_k(z_k)`.
    pub coproducts: Vec<LogComplex>,
}

impl Reconstruction {
    /// `samples` holds `F` at every point of `set`, in sorted order.
    pub fn new(
        set: &PointSet,
        samples: &[LogComplex],
        alpha: f64,
        beta: f64,
        trunc: ProductTruncation,
    ) -> Result<Self> {
        if !(alpha < beta) {
            return Err(Error::AlphaBetaOrder { alpha, beta });
        }
        if !(alpha > 0.0) {
            return Err(Error::InvalidParameter("alpha must be positive".into()));
        }
        if samples.len() != set.len() {
            return Err(Error::InvalidParameter(format!(
                "{} samples for {} nodes",
                samples.len(),
                set.len()
            )));
        }
        uniform_closeness(set, beta)?;
        let nodes = Nodes::new(set, trunc)?;
        let coproducts = nodes
            .z
            .iter()
            .enumerate()
            .map(|(i, &zk)| all_coproducts(&nodes, zk)[i])
            .collect();
        let samples = nodes.position.iter().map(|&i| samples[i]).collect();
        Ok(Reconstruction {
            nodes,
            samples,
            alpha,
            beta,
            coproducts,
        })
    }

    /// `G'(z_k)` in closed form (prefactor with `beta`).
    pub fn derivative_at_node(&self, i: usize) -> LogComplex {
        let zk = self.nodes.z[i];
        let sign = if self.nodes.index[i] >= 0 { 1.0 } else { -1.0 };
        (self.coproducts[i] * LogComplex::from_complex(Complex64::new(0.0, sign * 2.0 * PI)))
            .mul_exp(0.5 * self.beta * zk * zk)
    }

    pub fn eval(&self, z: Complex64) -> Result<LogComplex> {
        self.nodes.check_tail(z.im)?;
        Ok(self.series(z))
    }

    fn series(&self, z: Complex64) -> LogComplex {
        let q = all_coproducts(&self.nodes, z);
        let mut s = LogSum::new();
        for i in 0..self.nodes.len() {
            if self.samples[i].is_zero() || q[i].is_zero() {
                continue;
            }
            let zk = self.nodes.z[i];
            let mut e = 0.5 * self.alpha * (z * z - zk * zk);
            if self.nodes.index[i] < 0 {
                e += 2.0 * PI * I * (z - zk);
            }
            s.push((self.samples[i] * q[i] / self.coproducts[i]).mul_exp(e));
        }
        s.value()
    }
}

impl CylinderFunction for Reconstruction {
    fn params(&self) -> FockParams {
        FockParams::new(self.alpha, 0.0).expect("alpha checked positive")
    }
    fn eval(&self, z: Complex64) -> LogComplex {
        self.series(z)
    }
}

/// One-shot form of [`Reconstruction`].
pub fn reconstruction_expansion(
    samples: &[LogComplex],
    set: &PointSet,
    alpha: f64,
    beta: f64,
    z: Complex64,
    trunc: ProductTruncation,
) -> Result<LogComplex> {
    Reconstruction::new(set, samples, alpha, beta, trunc)?.eval(z)
}

/// `G` over a node set as a function of the space (`nu = 0`).
#[derive(Clone, Debug)]
pub struct ProductFunction {
    nodes: Nodes,
    params: FockParams,
}

impl ProductFunction {
    pub fn new(set: &PointSet, p: &FockParams, trunc: ProductTruncation) -> Result<Self> {
        if p.nu() != 0.0 {
            return Err(Error::InvalidParameter("G is defined for nu = 0".into()));
        }
        Ok(ProductFunction {
            nodes: Nodes::new(set, trunc)?,
            params: *p,
        })
    }

    pub fn nodes(&self) -> &Nodes {
        &self.nodes
    }

    /// `G(z)` with the tail check.
    pub fn checked(&self, z: Complex64) -> Result<LogComplex> {
        self.nodes.check_tail(z.im)?;
        Ok(g_with_prefactor(&self.nodes, z, self.params.alpha()))
    }
}

impl CylinderFunction for ProductFunction {
    fn params(&self) -> FockParams {
        self.params
    }
    fn eval(&self, z: Complex64) -> LogComplex {
        g_with_prefactor(&self.nodes, z, self.params.alpha())
    }
}

/// Grid for [`growth_profile`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrowthGrid {
    /// Band half-height `Y`.
    pub y_max: f64,
    pub ny: usize,
    pub nx: usize,
}

/// Points closer than this to a node are left out of the lower fit.
pub const DISTANCE_FLOOR: f64 = 0.05;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthProfile {
    /// Largest slope, over the two half-bands, of
    /// `max_x log(|G| e^{-(alpha/2)|z|^2})` against `|y|`.
    pub gamma_plus: f64,
    /// Largest slope, over the two half-bands, of
    /// `-min_x log(|G| e^{-(alpha/2)|z|^2} / d(z, Z))` against `|y|`,
    /// using points with `d(z, Z) >= DISTANCE_FLOOR`.
    pub gamma_minus: f64,
    /// Upper-envelope fits `(slope, intercept, max residual)` for
    /// `y >= 0` and `y <= 0`, slopes taken against `|y|`.
    pub upper_fits: [(f64, f64, f64); 2],
    /// Lower-envelope fits, same layout, slopes of the log itself.
    pub lower_fits: [(f64, f64, f64); 2],
    /// Largest weighted modulus on the grid.
    pub sup_weighted: f64,
    /// `(y, row max, row min)` in log form.
    pub rows: Vec<(f64, f64, f64)>,
}

fn fit_line(pts: &[(f64, f64)]) -> (f64, f64, f64) {
    if pts.len() < 2 {
        return (f64::NAN, f64::NAN, f64::NAN);
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let resid = pts
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).abs())
        .fold(0.0, f64::max);
    (slope, intercept, resid)
}

/// Least-squares growth diagnostics for `G` on the band `|y| <= Y`. The two
/// half-bands are fitted separately: `G` splits its product at index 0, so
/// its weighted modulus may grow at different rates upwards and downwards.
pub fn growth_profile(set: &PointSet, p: &FockParams, grid: &GrowthGrid) -> Result<GrowthProfile> {
    if grid.ny < 2 || grid.nx < 1 || !(grid.y_max > 0.0) {
        return Err(Error::InvalidParameter(
            "growth grid needs ny >= 2, nx >= 1, Y > 0".into(),
        ));
    }
    let g = ProductFunction::new(set, p, ProductTruncation::all())?;
    let nodes: Vec<Complex64> = g.nodes().z.clone();
    let rows: Vec<(f64, f64, f64)> = (0..grid.ny)
        .into_par_iter()
        .map(|j| {
            let y = -grid.y_max + 2.0 * grid.y_max * j as f64 / (grid.ny - 1) as f64;
            let mut hi = f64::NEG_INFINITY;
            let mut lo = f64::INFINITY;
            for i in 0..grid.nx {
                let z = Complex64::new((i as f64 + 0.5) / grid.nx as f64, y);
                let v = log_weighted_eval(&g, z);
                hi = hi.max(v);
                let d = nodes
                    .iter()
                    .map(|zk| {
                        let dx = (z.re - zk.re).rem_euclid(1.0);
                        dx.min(1.0 - dx).hypot(z.im - zk.im)
                    })
                    .fold(f64::INFINITY, f64::min);
                if d >= DISTANCE_FLOOR {
                    lo = lo.min(v - d.ln());
                }
            }
            (y, hi, lo)
        })
        .collect();
    let half = |up: bool, col: usize| -> Vec<(f64, f64)> {
        rows.iter()
            .filter(|r| if up { r.0 >= 0.0 } else { r.0 <= 0.0 })
            .map(|r| (r.0.abs(), if col == 1 { r.1 } else { r.2 }))
            .filter(|q| q.1.is_finite())
            .collect()
    };
    let upper_fits = [fit_line(&half(true, 1)), fit_line(&half(false, 1))];
    let lower_fits = [fit_line(&half(true, 2)), fit_line(&half(false, 2))];
    Ok(GrowthProfile {
        gamma_plus: upper_fits[0].0.max(upper_fits[1].0),
        gamma_minus: (-lower_fits[0].0).max(-lower_fits[1].0),
        upper_fits,
        lower_fits,
        sup_weighted: rows
            .iter()
            .map(|r| r.1)
            .fold(f64::NEG_INFINITY, f64::max)
            .exp(),
        rows,
    })
}

/// Winding number of `G` around `[x0, x0 + 1] x [y1, y2]` from the
/// unwrapped phase along the boundary, `steps` samples per side.
pub fn winding_number<F: CylinderFunction + ?Sized>(
    f: &F,
    x0: f64,
    y1: f64,
    y2: f64,
    steps: usize,
) -> f64 {
    let corners = [
        Complex64::new(x0, y1),
        Complex64::new(x0 + 1.0, y1),
        Complex64::new(x0 + 1.0, y2),
        Complex64::new(x0, y2),
    ];
    let mut total = 0.0;
    let mut prev = f.eval(corners[0]).phase();
    for s in 0..4 {
        let (a, b) = (corners[s], corners[(s + 1) % 4]);
        for j in 1..=steps {
            let z = a + (b - a) * (j as f64 / steps as f64);
            let ph = f.eval(z).phase();
            let mut d = ph - prev;
            d -= 2.0 * PI * (d / (2.0 * PI)).round();
            total += d;
            prev = ph;
        }
    }
    total / (2.0 * PI)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{cocycle, phi, weighted_eval};
    use crate::numerics::rng::RngStream;
    use crate::pointset::{explicit, make_lattice, make_perturbed_lattice, XMode};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn pi0() -> FockParams {
        FockParams::new(PI, 0.0).unwrap()
    }

    fn unimodular_data(set: &PointSet, p: &FockParams, seed: u64) -> Vec<LogComplex> {
        let mut r = RngStream::new(seed);
        set.points()
            .iter()
            .map(|pt| {
                LogComplex::new(
                    0.5 * p.alpha() * pt.to_complex().norm_sqr(),
                    2.0 * PI * r.next_f64(),
                )
            })
            .collect()
    }

    #[test]
    fn g_vanishes_at_nodes() {
        let z = make_perturbed_lattice(PI, 0.2, 3, -10, 10, XMode::Jittered, 0.0).unwrap();
        for pt in z.points() {
            let v = product_g(&z, pt.to_complex(), &pi0(), ProductTruncation::all()).unwrap();
            assert!(v.is_zero());
            let w = product_g(&z, pt.to_complex() + 2.0, &pi0(), ProductTruncation::all()).unwrap();
            assert!(w.is_zero());
        }
        let off = product_g(&z, c(0.5, 0.5), &pi0(), ProductTruncation::all()).unwrap();
        assert!(!off.is_zero());
    }

    #[test]
    fn g_cocycle() {
        let z = make_perturbed_lattice(PI, 0.2, 3, -20, 20, XMode::Jittered, 0.0).unwrap();
        let g = ProductFunction::new(&z, &pi0(), ProductTruncation::all()).unwrap();
        let mut r = RngStream::new(6);
        for _ in 0..30 {
            let w = c(r.uniform(-2.0, 2.0), r.uniform(-4.0, 4.0));
            let lhs = g.eval(w + 1.0);
            let rhs = cocycle(w, 1, &pi0()) * g.eval(w);
            assert!(lhs.relative_diff(rhs) < 1e-8);
        }
    }

    #[test]
    fn lattice_weighted_g_shift_relation() {
        // node at y = 0: one step up multiplies the weighted modulus by e^{pi^2/alpha}
        for alpha in [PI, 2.0] {
            let p = FockParams::new(alpha, 0.0).unwrap();
            let s = PI / alpha;
            let z = make_lattice(0.0, s, -60, 60).unwrap();
            let g = ProductFunction::new(&z, &p, ProductTruncation::all()).unwrap();
            let h =
                ProductFunction::new(&z.shifted(0.5 * s), &p, ProductTruncation::all()).unwrap();
            for &(x, y) in &[(0.5, 0.5), (0.25, 0.3), (0.7, -1.2)] {
                let a = log_weighted_eval(&g, c(x, y));
                let b = log_weighted_eval(&g, c(x, y + s));
                assert!((b - a - PI * s).abs() < 1e-6);
                // half-offset lattice: periodic
                let a = weighted_eval(&h, c(x, y));
                let b = weighted_eval(&h, c(x, y + s));
                assert!((a / b - 1.0).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn g_n_cardinal_structure() {
        let z = make_lattice(0.0, 1.0 / 0.7, -7, 7).unwrap();
        let t = ProductTruncation::all();
        for n in -7..=7i64 {
            for (m, pt) in z.points().iter().enumerate() {
                let v = product_g_n(&z, n, pt.to_complex(), t).unwrap();
                if m as i64 - 7 == n {
                    assert!(!v.is_zero());
                } else {
                    assert!(v.is_zero());
                }
            }
        }
    }

    #[test]
    fn tail_check_fires() {
        let z = make_lattice(0.0, 1.0, -20, 20).unwrap();
        let t = ProductTruncation::new(5, 1e-12).unwrap();
        assert!(product_g(&z, c(0.5, 0.0), &pi0(), t).is_ok());
        assert!(matches!(
            product_g(&z, c(0.5, 4.5), &pi0(), t),
            Err(Error::TailBoundViolation { .. })
        ));
    }

    #[test]
    fn zero_and_single_node() {
        let z = make_lattice(0.0, 1.5, -3, 3).unwrap();
        let zero = interpolate(
            &z,
            &vec![LogComplex::ZERO; 7],
            &pi0(),
            ProductTruncation::all(),
        )
        .unwrap();
        assert!(evaluate_interpolant(&zero, c(0.3, 0.2)).unwrap().is_zero());
        let q = QuadratureSpec::default();
        let r = interpolation_report(&zero, None, &q).unwrap();
        assert_eq!((r.max_node_residual, r.norm_ratio), (0.0, 0.0));

        let one = explicit(&[[0.3, 0.7]]).unwrap();
        let s = interpolate(&one, &[LogComplex::ONE], &pi0(), ProductTruncation::all()).unwrap();
        let v = evaluate_interpolant(&s, c(0.3, 0.7)).unwrap();
        assert_eq!(v, LogComplex::ONE);
        assert!(s.series(c(0.3, 0.7)).relative_diff(LogComplex::ONE) < 1e-14);
    }

    #[test]
    fn interpolation_needs_nu_zero() {
        let z = make_lattice(0.0, 1.5, -3, 3).unwrap();
        let p = FockParams::new(PI, 0.2).unwrap();
        assert!(interpolate(&z, &vec![LogComplex::ONE; 7], &p, ProductTruncation::all()).is_err());
    }

    #[test]
    fn node_residuals_and_cocycle() {
        let z = make_lattice(0.0, 1.0 / 0.7, -7, 7).unwrap();
        let data = unimodular_data(&z, &pi0(), 1);
        let s = interpolate(&z, &data, &pi0(), ProductTruncation::all()).unwrap();
        for (i, pt) in z.points().iter().enumerate() {
            assert!(data[i].relative_diff(s.series(pt.to_complex())) < 1e-8);
        }
        let mut r = RngStream::new(2);
        for _ in 0..20 {
            let w = c(r.uniform(-1.0, 1.0), r.uniform(-8.0, 8.0));
            let lhs = s.series(w + 1.0);
            let rhs = cocycle(w, 1, &pi0()) * s.series(w);
            assert!(lhs.relative_diff(rhs) < 1e-8);
        }
    }

    #[test]
    fn interpolant_decays_between_clusters() {
        let pts: Vec<[f64; 2]> = (-2..=2)
            .map(|k| [0.0, k as f64 * 1.4 - 15.0])
            .chain((-2..=2).map(|k| [0.0, k as f64 * 1.4 + 15.0]))
            .collect();
        let z = explicit(&pts).unwrap();
        let data = unimodular_data(&z, &pi0(), 4);
        let s = interpolate(&z, &data, &pi0(), ProductTruncation::all()).unwrap();
        let mid = weighted_eval(&s, c(0.5, 0.0));
        let near = weighted_eval(&s, c(0.0, 15.0));
        assert!(mid < 1e-20 * near, "{mid} {near}");
    }

    #[test]
    fn reconstruct_phi0() {
        let beta = 1.3 * PI;
        let p = pi0();
        let z = make_lattice(0.0, PI / beta, -25, 25).unwrap();
        let samples: Vec<LogComplex> = z
            .points()
            .iter()
            .map(|pt| phi(0, pt.to_complex(), &p))
            .collect();
        let rec = Reconstruction::new(&z, &samples, PI, beta, ProductTruncation::all()).unwrap();
        let mut r = RngStream::new(10);
        for _ in 0..20 {
            let w = c(r.next_f64(), r.uniform(-2.0, 2.0));
            let v = rec.eval(w).unwrap();
            assert!(v.relative_diff(phi(0, w, &p)) < 1e-6);
        }
        // node: sample returned through the cancelled pole
        let node = z.points()[20].to_complex();
        assert!(rec.eval(node).unwrap().relative_diff(samples[20]) < 1e-14);
        assert!(matches!(
            Reconstruction::new(&z, &samples, 5.0, 4.0, ProductTruncation::all()),
            Err(Error::AlphaBetaOrder { .. })
        ));
        let zero = Reconstruction::new(
            &z,
            &vec![LogComplex::ZERO; 51],
            PI,
            beta,
            ProductTruncation::all(),
        )
        .unwrap();
        assert!(zero.eval(c(0.2, 0.1)).unwrap().is_zero());
    }

    #[test]
    fn derivative_matches_difference_quotient() {
        let beta = 1.3 * PI;
        let z = make_lattice(0.0, PI / beta, -10, 10).unwrap();
        let samples = vec![LogComplex::ONE; 21];
        let rec = Reconstruction::new(&z, &samples, PI, beta, ProductTruncation::all()).unwrap();
        let g = ProductFunction::new(
            &z,
            &FockParams::new(beta, 0.0).unwrap(),
            ProductTruncation::all(),
        )
        .unwrap();
        for i in [3usize, 10, 15] {
            let zk = rec.nodes.z[i];
            let h = 1e-6;
            let fd = (g.eval(zk + h).to_complex() - g.eval(zk - h).to_complex()) / (2.0 * h);
            let exact = rec.derivative_at_node(i);
            assert!(exact.relative_diff(LogComplex::from_complex(fd)) < 1e-6);
        }
    }

    #[test]
    fn argument_principle_counts_nodes() {
        let z = make_perturbed_lattice(PI, 0.2, 9, -15, 15, XMode::Fixed, 0.0).unwrap();
        let g = ProductFunction::new(&z, &pi0(), ProductTruncation::all()).unwrap();
        let (y1, y2) = (-3.37, 4.61);
        let inside = z.points().iter().filter(|p| p.y > y1 && p.y < y2).count() as f64;
        let w = winding_number(&g, -0.5, y1, y2, 4000);
        assert!((w - inside).abs() < 1e-6, "{w} vs {inside}");
    }

    #[test]
    fn growth_lattice() {
        let grid = GrowthGrid {
            y_max: 10.0,
            ny: 201,
            nx: 16,
        };
        let z = make_lattice(0.0, 1.0, -40, 40).unwrap();
        let flat = growth_profile(&z.shifted(0.5), &pi0(), &grid).unwrap();
        assert!(
            flat.gamma_plus.abs() < 0.05 && flat.gamma_minus.abs() < 0.05,
            "{flat:?}"
        );
        let tilted = growth_profile(&z, &pi0(), &grid).unwrap();
        assert!((tilted.gamma_plus - PI).abs() < 0.05);
        assert!((tilted.upper_fits[0].0 - PI).abs() < 0.05);
        assert!((tilted.upper_fits[1].0 + PI).abs() < 0.05);
    }

    #[test]
    fn growth_perturbed_bounded() {
        let z = make_perturbed_lattice(PI, 0.2, 5, -60, 60, XMode::Fixed, 0.0).unwrap();
        let a = growth_profile(
            &z,
            &pi0(),
            &GrowthGrid {
                y_max: 8.0,
                ny: 161,
                nx: 16,
            },
        )
        .unwrap();
        let b = growth_profile(
            &z,
            &pi0(),
            &GrowthGrid {
                y_max: 16.0,
                ny: 321,
                nx: 16,
            },
        )
        .unwrap();
        for g in [&a, &b] {
            assert!(g.gamma_plus.is_finite() && g.gamma_plus < PI + 10.0 * 0.2 * PI);
            assert!(g.gamma_minus.is_finite() && g.gamma_minus < PI + 10.0 * 0.2 * PI);
        }
        let r = |g: &GrowthProfile| g.upper_fits.iter().map(|f| f.2).fold(0.0, f64::max);
        assert!(r(&b) < 3.0 * r(&a) + 1.0, "{} {}", r(&a), r(&b));
    }
}
