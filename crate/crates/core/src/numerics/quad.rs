//! Globally adaptive Gauss-Kronrod (7/15) quadrature for complex-valued
//! integrands on real intervals.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
// Gauss weights at XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl QuadratureSpec {
    pub fn new(abs_tol: f64, rel_tol: f64, max_subdivisions: usize) -> Result<Self> {
        let s = QuadratureSpec {
            abs_tol,
            rel_tol,
            max_subdivisions,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::InvalidParameter(
                "quadrature tolerances must be positive".into(),
            ));
        }
        if self.max_subdivisions < 1 {
            return Err(Error::InvalidParameter(
                "max_subdivisions must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            abs_tol: 1e-12,
            rel_tol: 1e-10,
            max_subdivisions: 2000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadResult {
    pub value: Complex64,
    pub abs_error: f64,
    pub subdivisions: usize,
}

struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> Panel {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += s * WGK[j];
        if j % 2 == 1 {
            gauss += s * WG[j / 2];
        }
    }
    let value = kron * h;
    let error = ((kron - gauss) * h).norm();
    Panel { a, b, value, error }
}

/// Adaptive integral of `f` over `[a, b]`.
pub fn quad_adaptive<F>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<QuadResult>
where
    F: Fn(f64) -> Complex64,
{
    quad_adaptive_init(f, a, b, 1, spec)
}

/// As [`quad_adaptive`], starting from `pieces` equal panels. Useful when the
/// integrand has several well-separated bumps that a single 15-point rule
/// could step over.
pub fn quad_adaptive_init<F>(
    f: F,
    a: f64,
    b: f64,
    pieces: usize,
    spec: &QuadratureSpec,
) -> Result<QuadResult>
where
    F: Fn(f64) -> Complex64,
{
    spec.validate()?;
    if a == b {
        return Ok(QuadResult {
            value: Complex64::new(0.0, 0.0),
            abs_error: 0.0,
            subdivisions: 0,
        });
    }
    let pieces = pieces.max(1);
    let mut heap = BinaryHeap::with_capacity(pieces + spec.max_subdivisions);
    let width = (b - a) / pieces as f64;
    for i in 0..pieces {
        let lo = a + width * i as f64;
        let hi = if i + 1 == pieces { b } else { lo + width };
        heap.push(gk15(&f, lo, hi));
    }
    let mut subdivisions = 0;
    loop {
        let (value, error) = totals(&heap);
        let target = spec.abs_tol.max(spec.rel_tol * value.norm());
        if error <= target {
            return Ok(QuadResult {
                value,
                abs_error: error,
                subdivisions,
            });
        }
        if subdivisions >= spec.max_subdivisions {
            return Err(Error::NonConvergence {
                error,
                tolerance: target,
                subdivisions,
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // panel cannot be split further in f64
            return Err(Error::NonConvergence {
                error,
                tolerance: target,
                subdivisions,
            });
        }
        heap.push(gk15(&f, worst.a, mid));
        heap.push(gk15(&f, mid, worst.b));
        subdivisions += 1;
    }
}

// Summed in a fixed (position) order so results do not depend on heap layout.
fn totals(heap: &BinaryHeap<Panel>) -> (Complex64, f64) {
    let mut panels: Vec<&Panel> = heap.iter().collect();
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    let mut value = Complex64::new(0.0, 0.0);
    let mut error = 0.0;
    for p in panels {
        value += p.value;
        error += p.error;
    }
    (value, error)
}

/// Half-width beyond which the envelope `e^{-c t^2}` is below `abs_tol`.
pub fn gaussian_cutoff(c: f64, abs_tol: f64) -> f64 {
    (abs_tol.recip().ln().max(1.0) / c).sqrt()
}

/// `int_a^inf f`, truncated where the caller's envelope `e^{-c (t-a)^2}`
/// falls below `spec.abs_tol`.
pub fn quad_halfline<F>(f: F, a: f64, c: f64, spec: &QuadratureSpec) -> Result<QuadResult>
where
    F: Fn(f64) -> Complex64,
{
    if !(c > 0.0) {
        return Err(Error::InvalidParameter(
            "envelope rate must be positive".into(),
        ));
    }
    let l = gaussian_cutoff(c, spec.abs_tol);
    let pieces = (l * c.sqrt()).ceil().max(1.0) as usize;
    quad_adaptive_init(f, a, a + l, pieces, spec)
}

/// `int_R f` for an integrand dominated by `e^{-c (t - center)^2}`.
pub fn quad_real_line<F>(f: F, center: f64, c: f64, spec: &QuadratureSpec) -> Result<QuadResult>
where
    F: Fn(f64) -> Complex64,
{
    if !(c > 0.0) {
        return Err(Error::InvalidParameter(
            "envelope rate must be positive".into(),
        ));
    }
    let l = gaussian_cutoff(c, spec.abs_tol);
    let pieces = (2.0 * l * c.sqrt()).ceil().max(2.0) as usize;
    quad_adaptive_init(f, center - l, center + l, pieces, spec)
}
