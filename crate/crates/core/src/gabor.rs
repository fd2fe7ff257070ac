//! Theta-Gabor systems in `L^2_nu(0,1)` with the Gaussian window `g0`.
//!
//! For a time-frequency point `z = (z1, z2)` the periodized atom is
//!
//! `Sigma_nu(pi(z) g0)(t) = sum_k e^{2 pi i k nu} e^{2 pi i z2 (t-k)} g0(t - k - z1)`
//! `                      = 2^{1/4} e^{2 pi i z2 t} theta_{z2 - nu, z1}(-t, i)`,
//!
//! where the second line follows from Poisson summation. The first theta
//! characteristic is `z2 - nu`; the direct sum is the reference and the
//! two forms are tested against each other on a grid.
//!
//! On the basis `e_{k,nu}(t) = e^{2 pi i (k+nu) t}` the atom has coefficients
//!
//! `c_k(z) = <e_{k,nu}, Sigma_nu(pi(z) g0)> = 2^{1/4} e^{2 pi i z1 xi} e^{-pi xi^2}`,
//! `xi = nu + k - z2`,
//!
//! so a point contributes only to modes `k` near `z2 - nu`. The frame
//! operator on the modes `|k| <= K` has matrix `S_kl = sum_z conj(c_k(z)) c_l(z)`
//! (so that `a^* S a = sum_z |sum_k a_k c_k(z)|^2`), and the Gram matrix of
//! the atoms is `G_mn = sum_k c_k(z_m) conj(c_k(z_n))`.
//!
//! Point sets are read with `(z1, z2) = (x, y)`. Under the Bargmann
//! transform the Fock-side point `x + iy` corresponds to `(x, -y)`; for sets
//! symmetric under `y -> -y` the two readings coincide.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{log_weighted_eval, strip_norm, FockParams, FockSeries, StripPoint};
use crate::numerics::eig::{hermitian_eigs, HermitianMatrix};
use crate::numerics::quad::QuadratureSpec;
use crate::pointset::PointSet;
use crate::theta::{gaussian_window, theta_eval, ThetaArgs};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Modes with `|k - (z2 - nu)|` above this are dropped from coefficient
/// sums; the dropped weight is below `e^{-pi 49}`.
pub const MODE_RADIUS: i64 = 7;

/// Points per parallel work item in matrix assembly. Fixed so that the
/// reduction order does not depend on the thread count.
const CHUNK: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncationSpec {
    /// Modes `k` in `[-K, K]`.
    #[serde(rename = "K")]
    pub k: usize,
    /// Modes dropped at each edge before reading eigenvalues.
    pub margin: usize,
}

impl TruncationSpec {
    pub fn new(k: usize, margin: usize) -> Result<Self> {
        if margin >= k {
            return Err(Error::InvalidParameter(format!(
                "margin {margin} must be smaller than K = {k}"
            )));
        }
        Ok(TruncationSpec { k, margin })
    }

    pub fn dim(&self) -> usize {
        2 * self.k + 1
    }

    /// `e^{-2 pi margin^2}`, the coefficient leakage across the margin.
    pub fn leakage(&self) -> f64 {
        (-2.0 * PI * (self.margin * self.margin) as f64).exp()
    }

    /// `y` range `Z` should cover for the central block to be unaffected by
    /// missing points.
    pub fn required_extent(&self) -> (f64, f64) {
        let e = (self.k + self.margin + 2) as f64;
        (-e, e)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AtomMethod {
    DirectSum,
    ThetaForm,
}

/// `Sigma_nu(pi(z) g0)(t)` by either method, with tail below `tol`.
pub fn periodized_atom(
    z: StripPoint,
    nu: f64,
    t: f64,
    method: AtomMethod,
    tol: f64,
) -> Result<Complex64> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter("tolerance must be positive".into()));
    }
    let (z1, z2) = (z.x, z.y);
    match method {
        AtomMethod::DirectSum => {
            // g0(t - k - z1) peaks at k = t - z1; tail sum_{|j| > d} e^{-pi j^2}
            let d = gaussian_radius(PI, tol)?;
            let c = t - z1;
            let (lo, hi) = ((c - d).floor() as i64, (c + d).ceil() as i64);
            Ok((lo..=hi)
                .map(|k| {
                    let s = t - k as f64;
                    (2.0 * PI * I * (k as f64 * nu + z2 * s)).exp() * gaussian_window(s - z1)
                })
                .sum())
        }
        AtomMethod::ThetaForm => {
            let args = ThetaArgs::new(z2 - nu, z1, Complex64::new(-t, 0.0), I)?;
            let th = theta_eval(&args, tol)?.to_complex();
            Ok(2f64.powf(0.25) * (2.0 * PI * I * z2 * t).exp() * th)
        }
    }
}

// Smallest d with 2 e^{-c d^2} / (1 - e^{-2 c d}) < tol.
fn gaussian_radius(c: f64, tol: f64) -> Result<f64> {
    let mut d = 1.0_f64;
    while 2.0 * (-c * d * d).exp() / (1.0 - (-2.0 * c * d).exp()) >= tol {
        d *= 1.25;
        if d > 1e6 {
            return Err(Error::TailBoundFailure {
                cap: crate::theta::MAX_TERMS,
            });
        }
    }
    Ok(d)
}

/// `c_k(z) = 2^{1/4} e^{2 pi i z1 (nu + k - z2)} e^{-pi (nu + k - z2)^2}`.
pub fn atom_coeff(k: i64, z: StripPoint, nu: f64) -> Complex64 {
    let xi = nu + k as f64 - z.y;
    Complex64::from_polar(2f64.powf(0.25) * (-PI * xi * xi).exp(), 2.0 * PI * z.x * xi)
}

/// Modes `k` with `|k - (z2 - nu)| <= radius`.
fn mode_range(z: &StripPoint, nu: f64, radius: f64) -> (i64, i64) {
    let c = z.y - nu;
    ((c - radius).ceil() as i64, (c + radius).floor() as i64)
}

/// Matrix of `f -> sum_z <f, g_z> g_z` on `e_{k,nu}`, `|k| <= K`.
///
/// Assembled in parallel over fixed chunks of points, partial sums reduced
/// in chunk order.
pub fn frame_operator_matrix(z: &PointSet, nu: f64, trunc: &TruncationSpec) -> HermitianMatrix {
    let k = trunc.k as i64;
    let dim = trunc.dim();
    let partials: Vec<HermitianMatrix> = z
        .points()
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut m = HermitianMatrix::zeros(dim);
            for p in chunk {
                let (lo, hi) = mode_range(p, nu, MODE_RADIUS as f64);
                let (lo, hi) = (lo.max(-k), hi.min(k));
                if lo > hi {
                    continue;
                }
                let mut v = vec![Complex64::new(0.0, 0.0); dim];
                for j in lo..=hi {
                    v[(j + k) as usize] = atom_coeff(j, *p, nu).conj();
                }
                m.add_rank_one(&v, 1.0);
            }
            m
        })
        .collect();
    let mut s = HermitianMatrix::zeros(dim);
    for m in &partials {
        s.add_assign(m);
    }
    s
}

/// Estimated frame bounds from the central block of the frame operator.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FrameBounds {
    /// Lower bound; eigenvalues below `floor` are reported as 0.
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
    /// Smallest eigenvalue as computed.
    pub a_raw: f64,
    /// Roundoff floor `16 n eps lambda_max` of the eigensolver.
    pub floor: f64,
    pub trunc: TruncationSpec,
    /// `y` range of the point set used.
    pub z_extent: (f64, f64),
    pub warnings: Vec<String>,
}

/// Roundoff floor of a computed spectrum: eigenvalues of an `n x n`
/// Hermitian matrix are accurate to about `n eps lambda_max`.
pub fn roundoff_floor(n: usize, lambda_max: f64) -> f64 {
    16.0 * n as f64 * f64::EPSILON * lambda_max.abs()
}

fn clamp_to_floor(raw: f64, floor: f64) -> f64 {
    if raw < floor {
        0.0
    } else {
        raw
    }
}

/// Smallest and largest eigenvalues of the frame operator after removing
/// `margin` modes at each edge.
pub fn frame_bounds(z: &PointSet, nu: f64, trunc: &TruncationSpec) -> Result<FrameBounds> {
    let s = frame_operator_matrix(z, nu, trunc);
    let block = s.block(trunc.margin, trunc.dim() - trunc.margin);
    let e = hermitian_eigs(&block)?;
    let (lo, hi) = (e[0], e[e.len() - 1]);
    let floor = roundoff_floor(block.dim(), hi);
    let mut warnings = Vec::new();
    let extent = z.y_extent().unwrap_or((0.0, 0.0));
    let (need_lo, need_hi) = trunc.required_extent();
    if z.is_empty() || extent.0 > need_lo || extent.1 < need_hi {
        warnings.push(format!(
            "point set covers y in [{}, {}], less than [{need_lo}, {need_hi}] needed for K = {}, margin = {}",
            extent.0, extent.1, trunc.k, trunc.margin
        ));
    }
    Ok(FrameBounds {
        a: clamp_to_floor(lo, floor).max(0.0),
        b: hi.max(0.0),
        a_raw: lo,
        floor,
        trunc: *trunc,
        z_extent: extent,
        warnings,
    })
}

/// Gram matrix `G_mn = <g_{z_n}, g_{z_m}>` in `L^2_nu(0,1)`, modes summed
/// until the dropped tail is below `tol`.
pub fn gram_matrix(z: &PointSet, nu: f64, tol: f64) -> Result<HermitianMatrix> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter("tolerance must be positive".into()));
    }
    // each term is bounded by sqrt2 e^{-pi (k-a)^2 - pi (k-b)^2} <= sqrt2 e^{-pi (k-a)^2}
    let radius = gaussian_radius(PI, tol)?;
    let pts = z.points();
    let ranges: Vec<(i64, i64)> = pts.iter().map(|p| mode_range(p, nu, radius)).collect();
    let coeffs: Vec<Vec<Complex64>> = pts
        .iter()
        .zip(&ranges)
        .map(|(p, &(lo, hi))| (lo..=hi).map(|k| atom_coeff(k, *p, nu)).collect())
        .collect();
    let n = pts.len();
    let rows: Vec<Vec<Complex64>> = (0..n)
        .into_par_iter()
        .map(|m| {
            (m..n)
                .map(|j| {
                    let lo = ranges[m].0.max(ranges[j].0);
                    let hi = ranges[m].1.min(ranges[j].1);
                    (lo..=hi)
                        .map(|k| {
                            coeffs[m][(k - ranges[m].0) as usize]
                                * coeffs[j][(k - ranges[j].0) as usize].conj()
                        })
                        .sum()
                })
                .collect()
        })
        .collect();
    Ok(HermitianMatrix::from_fn(n, |i, j| rows[i][j - i]))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RieszBound {
    /// Smallest Gram eigenvalue, 0 below the roundoff floor.
    pub value: f64,
    pub raw: f64,
    pub floor: f64,
    pub n_points: usize,
}

/// Smallest eigenvalue of the Gram matrix. For a finite section of an
/// infinite family this bounds the Riesz constant from above and decreases
/// as points are added.
pub fn riesz_lower_bound(z: &PointSet, nu: f64, tol: f64) -> Result<RieszBound> {
    if z.is_empty() {
        return Err(Error::TooFewPoints(0));
    }
    let g = gram_matrix(z, nu, tol)?;
    let e = hermitian_eigs(&g)?;
    let floor = roundoff_floor(g.dim(), e[e.len() - 1]);
    Ok(RieszBound {
        value: clamp_to_floor(e[0], floor).max(0.0),
        raw: e[0],
        floor,
        n_points: z.len(),
    })
}

/// Fock-side Rayleigh quotient of `F = sum_k c_k phi_k / ||phi_k||`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SamplingCheck {
    /// `sum |c_k|^2`.
    pub norm_sq: f64,
    /// `sum_{z in Z} |F(z)|^2 e^{-alpha |z|^2}`.
    pub sample_sum: f64,
    /// `sample_sum / norm_sq`; `None` for `F = 0`.
    pub ratio: Option<f64>,
    /// Norm by strip quadrature, when requested.
    pub quadrature_norm_sq: Option<f64>,
}

/// Computes the sampling sum of `F` over `Z`. With `quad = Some((y_max,
/// spec))` the norm is also recomputed by strip quadrature.
pub fn sampling_sum_check(
    coeffs: &[(i64, Complex64)],
    z: &PointSet,
    p: &FockParams,
    quad: Option<(f64, &QuadratureSpec)>,
) -> Result<SamplingCheck> {
    let f = FockSeries::new(*p, coeffs.to_vec());
    let norm_sq = f.norm_sq();
    let sample_sum: f64 = z
        .points()
        .iter()
        .map(|pt| (2.0 * log_weighted_eval(&f, pt.to_complex())).exp())
        .sum();
    let quadrature_norm_sq = match quad {
        Some((y_max, spec)) => Some(strip_norm(&f, y_max, spec)?.norm_sq),
        None => None,
    };
    Ok(SamplingCheck {
        norm_sq,
        sample_sum,
        ratio: (norm_sq > 0.0).then(|| sample_sum / norm_sq),
        quadrature_norm_sq,
    })
}
