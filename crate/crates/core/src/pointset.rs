//! Finite point sets on the strip `[0,1) x R`: generators, separation,
//! window counts and Beurling density estimates.
//!
//! Windows are the closed bands `I_{w,r} = [0,1) x [w - r/2, w + r/2]`; only
//! the height `w` matters. Lattice and perturbed generators stand for
//! infinite sequences, so their densities are read from windows lying inside
//! the vertical extent: windows hanging over the edge of the truncation would
//! drive the lower density to 0. Explicit point lists are taken as the finite
//! sets they are, with every window admissible and both densities 0.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::StripPoint;
use crate::numerics::rng::RngStream;

/// Upper bound on the number of points a descriptor may generate.
pub const MAX_POINTS: usize = 1_000_000;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum XMode {
    /// Every point at the same `x0`.
    #[default]
    Fixed,
    /// `x` drawn uniformly from `[0, 1)` on the same stream as the `y` jitter.
    Jittered,
}

/// How a point set was generated.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Origin {
    Explicit,
    Lattice {
        x0: f64,
        spacing: f64,
        n_min: i64,
        n_max: i64,
    },
    Perturbed {
        alpha: f64,
        spacing: f64,
        #[serde(rename = "Q")]
        q: f64,
        seed: u64,
        n_min: i64,
        n_max: i64,
        x_mode: XMode,
        x0: f64,
    },
    Union {
        parts: Vec<Origin>,
    },
}

/// Points sorted by `y` (ties by `x`), with their generator.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointSet {
    points: Vec<StripPoint>,
    origin: Origin,
}

impl PointSet {
    fn from_unsorted(mut points: Vec<StripPoint>, origin: Origin) -> Self {
        points.sort_by(|a, b| a.y.total_cmp(&b.y).then(a.x.total_cmp(&b.x)));
        PointSet { points, origin }
    }

    pub fn empty() -> Self {
        PointSet {
            points: Vec::new(),
            origin: Origin::Explicit,
        }
    }

    pub fn points(&self) -> &[StripPoint] {
        &self.points
    }

    pub fn origin(&self) -> &Origin {
        &self.origin
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `(min y, max y)`, or `None` for the empty set.
    pub fn y_extent(&self) -> Option<(f64, f64)> {
        Some((self.points.first()?.y, self.points.last()?.y))
    }

    /// The same set moved vertically by `dy`.
    pub fn shifted(&self, dy: f64) -> PointSet {
        let pts = self
            .points
            .iter()
            .map(|p| StripPoint {
                x: p.x,
                y: p.y + dy,
            })
            .collect();
        PointSet {
            points: pts,
            origin: Origin::Explicit,
        }
    }

    /// The set without the point at sorted position `i`.
    pub fn without(&self, i: usize) -> PointSet {
        let mut pts = self.points.clone();
        pts.remove(i);
        PointSet {
            points: pts,
            origin: Origin::Explicit,
        }
    }

    /// Generator warnings, e.g. a perturbation large enough to break
    /// separation.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        collect_warnings(&self.origin, &mut out);
        out
    }
}

fn collect_warnings(o: &Origin, out: &mut Vec<String>) {
    match o {
        Origin::Perturbed { spacing, q, .. } if *q >= 0.5 * spacing => out.push(format!(
            "perturbation Q = {q} is at least half the spacing {spacing}; separation is not guaranteed"
        )),
        Origin::Union { parts } => parts.iter().for_each(|p| collect_warnings(p, out)),
        _ => {}
    }
}

fn check_range(n_min: i64, n_max: i64) -> Result<usize> {
    if n_min > n_max {
        return Err(Error::Descriptor(format!(
            "empty index range: n_min = {n_min} > n_max = {n_max}"
        )));
    }
    let count = (n_max as i128 - n_min as i128 + 1) as u128;
    if count > MAX_POINTS as u128 {
        return Err(Error::Descriptor(format!(
            "index range has {count} points, more than {MAX_POINTS}"
        )));
    }
    Ok(count as usize)
}

fn check_x(x0: f64) -> Result<()> {
    if !(0.0..1.0).contains(&x0) {
        return Err(Error::Descriptor(format!(
            "x0 must lie in [0, 1), got {x0}"
        )));
    }
    Ok(())
}

/// `{(x0, spacing * n) : n_min <= n <= n_max}`.
pub fn make_lattice(x0: f64, spacing: f64, n_min: i64, n_max: i64) -> Result<PointSet> {
    check_x(x0)?;
    if !(spacing > 0.0 && spacing.is_finite()) {
        return Err(Error::Descriptor(format!(
            "spacing must be positive, got {spacing}"
        )));
    }
    check_range(n_min, n_max)?;
    let pts = (n_min..=n_max)
        .map(|n| StripPoint {
            x: x0,
            y: spacing * n as f64,
        })
        .collect();
    Ok(PointSet::from_unsorted(
        pts,
        Origin::Lattice {
            x0,
            spacing,
            n_min,
            n_max,
        },
    ))
}

/// `y_k = (pi/alpha) k + u_k` with `u_k` uniform on `[-Q, Q]`, drawn in
/// increasing `k` from [`RngStream`] (with an `x` draw after each `u_k` in
/// jittered mode).
pub fn make_perturbed_lattice(
    alpha: f64,
    q: f64,
    seed: u64,
    n_min: i64,
    n_max: i64,
    x_mode: XMode,
    x0: f64,
) -> Result<PointSet> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::Descriptor(format!(
            "alpha must be positive, got {alpha}"
        )));
    }
    if !(q >= 0.0 && q.is_finite()) {
        return Err(Error::Descriptor(format!("Q must be nonnegative, got {q}")));
    }
    check_x(x0)?;
    check_range(n_min, n_max)?;
    let spacing = PI / alpha;
    let mut rng = RngStream::new(seed);
    let pts = (n_min..=n_max)
        .map(|k| {
            let u = if q > 0.0 { rng.uniform(-q, q) } else { 0.0 };
            let x = match x_mode {
                XMode::Fixed => x0,
                XMode::Jittered => rng.next_f64(),
            };
            StripPoint {
                x,
                y: spacing * k as f64 + u,
            }
        })
        .collect();
    Ok(PointSet::from_unsorted(
        pts,
        Origin::Perturbed {
            alpha,
            spacing,
            q,
            seed,
            n_min,
            n_max,
            x_mode,
            x0,
        },
    ))
}

/// A set from explicit `(x, y)` pairs.
pub fn explicit(points: &[[f64; 2]]) -> Result<PointSet> {
    if points.len() > MAX_POINTS {
        return Err(Error::Descriptor(format!("more than {MAX_POINTS} points")));
    }
    let pts = points
        .iter()
        .map(|&[x, y]| {
            StripPoint::new(x, y)
                .map_err(|_| Error::Descriptor(format!("point ({x}, {y}) is not in [0,1) x R")))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PointSet::from_unsorted(pts, Origin::Explicit))
}

/// Multiset union.
pub fn union(parts: Vec<PointSet>) -> Result<PointSet> {
    let total: usize = parts.iter().map(|p| p.len()).sum();
    if total > MAX_POINTS {
        return Err(Error::Descriptor(format!(
            "union has more than {MAX_POINTS} points"
        )));
    }
    let mut pts = Vec::with_capacity(total);
    let mut origins = Vec::with_capacity(parts.len());
    for p in parts {
        pts.extend_from_slice(&p.points);
        origins.push(p.origin);
    }
    Ok(PointSet::from_unsorted(
        pts,
        Origin::Union { parts: origins },
    ))
}

/// JSON point-set descriptor, tagged by `"type"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Descriptor {
    Lattice {
        x0: f64,
        spacing: f64,
        n_min: i64,
        n_max: i64,
    },
    Perturbed {
        alpha: f64,
        #[serde(rename = "Q")]
        q: f64,
        seed: u64,
        n_min: i64,
        n_max: i64,
        #[serde(default)]
        x_mode: XMode,
        #[serde(default)]
        x0: f64,
    },
    Explicit {
        points: Vec<[f64; 2]>,
    },
    Union {
        parts: Vec<Descriptor>,
    },
}

impl Descriptor {
    pub fn parse(json: &str) -> Result<Descriptor> {
        serde_json::from_str(json).map_err(|e| Error::Descriptor(e.to_string()))
    }

    pub fn from_value(v: serde_json::Value) -> Result<Descriptor> {
        serde_json::from_value(v).map_err(|e| Error::Descriptor(e.to_string()))
    }

    /// Points this descriptor generates, without building them.
    pub fn point_count(&self) -> u128 {
        match self {
            Descriptor::Lattice { n_min, n_max, .. }
            | Descriptor::Perturbed { n_min, n_max, .. } => {
                if n_min > n_max {
                    0
                } else {
                    (*n_max as i128 - *n_min as i128 + 1) as u128
                }
            }
            Descriptor::Explicit { points } => points.len() as u128,
            Descriptor::Union { parts } => parts.iter().map(|p| p.point_count()).sum(),
        }
    }

    pub fn build(&self) -> Result<PointSet> {
        if self.point_count() > MAX_POINTS as u128 {
            return Err(Error::Descriptor(format!(
                "descriptor generates more than {MAX_POINTS} points"
            )));
        }
        match self {
            Descriptor::Lattice {
                x0,
                spacing,
                n_min,
                n_max,
            } => make_lattice(*x0, *spacing, *n_min, *n_max),
            Descriptor::Perturbed {
                alpha,
                q,
                seed,
                n_min,
                n_max,
                x_mode,
                x0,
            } => make_perturbed_lattice(*alpha, *q, *seed, *n_min, *n_max, *x_mode, *x0),
            Descriptor::Explicit { points } => explicit(points),
            Descriptor::Union { parts } => union(
                parts
                    .iter()
                    .map(|d| d.build())
                    .collect::<Result<Vec<_>>>()?,
            ),
        }
    }
}

/// Parses and builds a descriptor in one step.
pub fn parse_descriptor(json: &str) -> Result<PointSet> {
    Descriptor::parse(json)?.build()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// `min_m |z_j - z_k + m|`, the distance on `C/Z`.
    #[default]
    Cylinder,
    /// `|z_j - z_k|` between strip representatives.
    Planar,
}

fn distance(a: &StripPoint, b: &StripPoint, metric: Metric) -> f64 {
    let mut dx = (a.x - b.x).abs();
    if metric == Metric::Cylinder {
        dx = dx.min(1.0 - dx);
    }
    dx.hypot(a.y - b.y)
}

/// `inf_{j != k} d(z_j, z_k)`, by a sweep over the `y`-sorted points that
/// only compares pairs closer than the current best in `y`.
pub fn separation_constant(z: &PointSet, metric: Metric) -> Result<f64> {
    let pts = &z.points;
    if pts.len() < 2 {
        return Err(Error::TooFewPoints(pts.len()));
    }
    let mut best = f64::INFINITY;
    for i in 0..pts.len() {
        for q in &pts[i + 1..] {
            if q.y - pts[i].y >= best {
                break;
            }
            best = best.min(distance(&pts[i], q, metric));
        }
    }
    Ok(best)
}

/// A counting window `[w_im - r/2, w_im + r/2]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub w_im: f64,
    pub r: f64,
}

impl WindowSpec {
    pub fn new(w_im: f64, r: f64) -> Result<Self> {
        if !(r > 0.0) || !w_im.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "window needs r > 0 and finite centre, got r = {r}"
            )));
        }
        Ok(WindowSpec { w_im, r })
    }
}

/// Points with `y` in the closed interval `[w_im - r/2, w_im + r/2]`.
pub fn count_in_window(z: &PointSet, win: &WindowSpec) -> usize {
    count_between(&z.points, win.w_im - 0.5 * win.r, win.w_im + 0.5 * win.r)
}

fn count_between(pts: &[StripPoint], lo: f64, hi: f64) -> usize {
    let a = pts.partition_point(|p| p.y < lo);
    let b = pts.partition_point(|p| p.y <= hi);
    b.saturating_sub(a)
}

/// Window statistics at one height `r`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DensityRow {
    pub r: f64,
    pub inf_count: usize,
    pub sup_count: usize,
    /// `inf_count / r`
    pub inf: f64,
    /// `sup_count / r`
    pub sup: f64,
    /// Window centres examined.
    pub windows: usize,
    /// Whether every critical centre was examined (no `w_samples` cap hit).
    pub exhaustive: bool,
}

/// One of `D^-` or `D^+`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityEstimate {
    pub per_r: Vec<DensityRow>,
    /// The value at the largest admissible `r`, or the analytic value for
    /// lattices.
    pub extrapolated: f64,
    /// Set when the value is known analytically from the generator.
    pub exact: bool,
}

/// Whether the set is finite in its own right rather than a truncation of
/// an infinite sequence.
pub fn is_finite_set(origin: &Origin) -> bool {
    match origin {
        Origin::Explicit => true,
        Origin::Union { parts } => parts.iter().all(is_finite_set),
        _ => false,
    }
}

/// Admissible centre band for windows of height `r`, if nonempty. For
/// truncations this is `[y_min + r/2, y_max - r/2]`; for finite sets it is
/// `[y_min - r, y_max + r]`, whose ends give empty windows.
pub fn admissible_band(z: &PointSet, r: f64) -> Option<(f64, f64)> {
    let (lo, hi) = z.y_extent()?;
    if is_finite_set(&z.origin) {
        return Some((lo - r, hi + r));
    }
    let (a, b) = (lo + 0.5 * r, hi - 0.5 * r);
    (a <= b).then_some((a, b))
}

/// Lower and upper density estimates over interior windows.
///
/// For each `r` the count `n(w)` is piecewise constant in the centre `w`,
/// changing only at `y_j +- r/2`. With closed windows the supremum is
/// attained at a breakpoint and the infimum on an open gap between
/// breakpoints, so breakpoints, gap midpoints and the band ends are all that
/// needs checking. `w_samples` caps the number of centres per `r`; if the cap
/// bites, centres are subsampled evenly and the row is flagged non-exhaustive.
pub fn density_bounds(
    z: &PointSet,
    r_list: &[f64],
    w_samples: usize,
) -> Result<(DensityEstimate, DensityEstimate)> {
    if r_list.iter().any(|&r| !(r > 0.0) || !r.is_finite()) {
        return Err(Error::InvalidParameter(
            "window heights must be positive".into(),
        ));
    }
    let mut rows = Vec::new();
    for &r in r_list {
        let Some((a, b)) = admissible_band(z, r) else {
            continue;
        };
        let mut centres = vec![a, b];
        for p in &z.points {
            for c in [p.y - 0.5 * r, p.y + 0.5 * r] {
                if (a..=b).contains(&c) {
                    centres.push(c);
                }
            }
        }
        centres.sort_by(f64::total_cmp);
        centres.dedup();
        let breaks = centres.clone();
        for w in breaks.windows(2) {
            centres.push(0.5 * (w[0] + w[1]));
        }
        centres.sort_by(f64::total_cmp);
        let exhaustive = w_samples == 0 || centres.len() <= w_samples;
        if !exhaustive {
            let step = centres.len() as f64 / w_samples as f64;
            centres = (0..w_samples)
                .map(|i| centres[((i as f64 * step) as usize).min(centres.len() - 1)])
                .collect();
        }
        let mut lo = usize::MAX;
        let mut hi = 0;
        for &c in &centres {
            let n = count_between(&z.points, c - 0.5 * r, c + 0.5 * r);
            lo = lo.min(n);
            hi = hi.max(n);
        }
        rows.push(DensityRow {
            r,
            inf_count: lo,
            sup_count: hi,
            inf: lo as f64 / r,
            sup: hi as f64 / r,
            windows: centres.len(),
            exhaustive,
        });
    }
    let Some(last) = rows.iter().max_by(|p, q| p.r.total_cmp(&q.r)).copied() else {
        let (lo, hi) = z.y_extent().unwrap_or((0.0, 0.0));
        return Err(Error::NoAdmissibleWindow { lo, hi });
    };
    let analytic = match z.origin {
        Origin::Lattice { spacing, .. } => Some(1.0 / spacing),
        ref o if is_finite_set(o) => Some(0.0),
        _ => None,
    };
    let lower = DensityEstimate {
        per_r: rows.clone(),
        extrapolated: analytic.unwrap_or(last.inf),
        exact: analytic.is_some(),
    };
    let upper = DensityEstimate {
        per_r: rows,
        extrapolated: analytic.unwrap_or(last.sup),
        exact: analytic.is_some(),
    };
    Ok((lower, upper))
}

/// Two-sided enumeration of a point set.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Indexing {
    /// Sorted position of the index-0 point.
    pub anchor: usize,
}

impl Indexing {
    /// Two-sided index of the point at sorted position `i`.
    pub fn index_of(&self, i: usize) -> i64 {
        i as i64 - self.anchor as i64
    }

    /// Sorted position of two-sided index `k`.
    pub fn position(&self, k: i64, len: usize) -> Option<usize> {
        let p = self.anchor as i64 + k;
        (0..len as i64).contains(&p).then_some(p as usize)
    }
}

/// Index 0 goes to the point nearest `y = 0`, ties to the nonnegative side;
/// the rest follow in sorted order. Equal heights make the order ambiguous.
pub fn two_sided_indexing(z: &PointSet) -> Result<Indexing> {
    if z.is_empty() {
        return Err(Error::IndexingAmbiguity("empty point set".into()));
    }
    for w in z.points.windows(2) {
        if w[0].y == w[1].y {
            return Err(Error::IndexingAmbiguity(format!(
                "two points share the height y = {}",
                w[0].y
            )));
        }
    }
    let mut anchor = 0;
    for (i, p) in z.points.iter().enumerate() {
        let best = z.points[anchor].y;
        if p.y.abs() < best.abs() || (p.y.abs() == best.abs() && p.y >= 0.0) {
            anchor = i;
        }
    }
    Ok(Indexing { anchor })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Closeness {
    /// `max_k |y_k - (pi/alpha) k|`
    pub q_star: f64,
    pub indexing: Indexing,
}

/// Relative slack on the gap test.
pub const GAP_RTOL: f64 = 1e-9;

/// `Q* = max_k |Im z_k - (pi/alpha) k|` under [`two_sided_indexing`].
///
/// A gap of `2 pi/alpha` or more between consecutive points means a lattice
/// site was skipped and the enumeration cannot be uniformly close with a
/// meaningful `Q`; this is reported as an indexing failure.
pub fn uniform_closeness(z: &PointSet, alpha: f64) -> Result<Closeness> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidParameter("alpha must be positive".into()));
    }
    let indexing = two_sided_indexing(z)?;
    let step = PI / alpha;
    for w in z.points.windows(2) {
        let gap = w[1].y - w[0].y;
        if gap >= 2.0 * step * (1.0 - GAP_RTOL) {
            return Err(Error::IndexingAmbiguity(format!(
                "gap {gap} between y = {} and y = {} reaches 2 pi/alpha = {}",
                w[0].y,
                w[1].y,
                2.0 * step
            )));
        }
    }
    let q_star = z
        .points
        .iter()
        .enumerate()
        .map(|(i, p)| (p.y - step * indexing.index_of(i) as f64).abs())
        .fold(0.0, f64::max);
    Ok(Closeness { q_star, indexing })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn lattice_basics() {
        let z = make_lattice(0.0, 1.0, -2, 2).unwrap();
        let ys: Vec<f64> = z.points().iter().map(|p| p.y).collect();
        assert_eq!(ys, vec![-2.0, -1.0, 0.0, 1.0, 2.0]);
        let z = make_lattice(0.0, 0.5, 0, 9).unwrap();
        assert_eq!(z.len(), 10);
        assert_eq!(separation_constant(&z, Metric::Cylinder).unwrap(), 0.5);
        assert_eq!(separation_constant(&z, Metric::Planar).unwrap(), 0.5);
        assert!(make_lattice(0.0, 1.0, 3, 2).is_err());
        assert!(make_lattice(1.0, 1.0, 0, 2).is_err());
        assert!(make_lattice(0.0, 0.0, 0, 2).is_err());
    }

    #[test]
    fn wraparound_separation() {
        let z = explicit(&[[0.05, 0.0], [0.95, 0.0]]).unwrap();
        assert!((separation_constant(&z, Metric::Cylinder).unwrap() - 0.1).abs() < 1e-15);
        assert!((separation_constant(&z, Metric::Planar).unwrap() - 0.9).abs() < 1e-15);
        let d = explicit(&[[0.3, 1.0], [0.3, 1.0], [0.5, 4.0]]).unwrap();
        assert_eq!(separation_constant(&d, Metric::Cylinder).unwrap(), 0.0);
        assert!(matches!(
            separation_constant(&explicit(&[[0.1, 0.0]]).unwrap(), Metric::Planar),
            Err(Error::TooFewPoints(1))
        ));
    }

    #[test]
    fn window_counts() {
        let z = make_lattice(0.0, 1.0, -10, 10).unwrap();
        assert_eq!(count_in_window(&z, &WindowSpec::new(0.0, 4.0).unwrap()), 5);
        assert_eq!(count_in_window(&z, &WindowSpec::new(0.5, 3.0).unwrap()), 4);
        assert_eq!(
            count_in_window(&PointSet::empty(), &WindowSpec::new(0.0, 4.0).unwrap()),
            0
        );
    }

    #[test]
    fn perturbed_lattice() {
        let a = make_perturbed_lattice(PI, 0.0, 1, -5, 5, XMode::Fixed, 0.25).unwrap();
        let l = make_lattice(0.25, 1.0, -5, 5).unwrap();
        assert_eq!(a.points(), l.points());
        let b = make_perturbed_lattice(PI, 0.1, 7, -50, 50, XMode::Jittered, 0.0).unwrap();
        let c = make_perturbed_lattice(PI, 0.1, 7, -50, 50, XMode::Jittered, 0.0).unwrap();
        assert_eq!(b, c);
        assert!(uniform_closeness(&b, PI).unwrap().q_star <= 0.1);
        let f = make_perturbed_lattice(2.0, 0.3, 3, -40, 40, XMode::Fixed, 0.5).unwrap();
        let sep = separation_constant(&f, Metric::Planar).unwrap();
        assert!(sep >= PI / 2.0 - 0.6);
        assert!(
            make_perturbed_lattice(1.0, 2.0, 1, 0, 4, XMode::Fixed, 0.0)
                .unwrap()
                .warnings()
                .len()
                == 1
        );
    }

    #[test]
    fn lattice_density() {
        let z = make_lattice(0.0, 0.5, -100, 100).unwrap();
        let (lo, hi) = density_bounds(&z, &[5.0, 10.0, 20.0], 0).unwrap();
        assert!(lo.exact && hi.exact);
        assert_eq!(lo.extrapolated, 2.0);
        assert_eq!(hi.extrapolated, 2.0);
        // closed windows of height r hold at most r/s + 1 points; the bound is
        // attained, so allow rounding in count/r
        for row in &lo.per_r {
            assert!((row.inf - 2.0).abs() <= (1.0 + 1e-12) / row.r);
            assert!((row.sup - 2.0).abs() <= (1.0 + 1e-12) / row.r);
        }
    }

    #[test]
    fn density_matches_brute_force() {
        let z = make_perturbed_lattice(3.0, 0.3, 11, -30, 30, XMode::Fixed, 0.0).unwrap();
        let r = 6.0;
        let (lo, hi) = density_bounds(&z, &[r], 0).unwrap();
        let (a, b) = admissible_band(&z, r).unwrap();
        let n = 200_000;
        let (mut mn, mut mx) = (usize::MAX, 0);
        for i in 0..=n {
            let w = a + (b - a) * i as f64 / n as f64;
            let c = count_in_window(&z, &WindowSpec::new(w, r).unwrap());
            mn = mn.min(c);
            mx = mx.max(c);
        }
        assert_eq!(lo.per_r[0].inf_count, mn);
        assert_eq!(hi.per_r[0].sup_count, mx);
    }

    #[test]
    fn finite_sets_have_zero_density() {
        let z = explicit(&[[0.1, 0.0], [0.6, 0.3]]).unwrap();
        let (lo, hi) = density_bounds(&z, &[0.5, 1.0, 200.0], 0).unwrap();
        assert!(lo.exact && hi.exact);
        assert_eq!((lo.extrapolated, hi.extrapolated), (0.0, 0.0));
        for row in &hi.per_r {
            assert_eq!(row.inf_count, 0);
            assert_eq!(row.sup_count, 2);
        }
    }

    #[test]
    fn truncations_need_an_interior_window() {
        let z = make_lattice(0.0, 1.0, -10, 10).unwrap();
        assert!(density_bounds(&z, &[10.0], 0).is_ok());
        assert!(matches!(
            density_bounds(&z, &[200.0], 0),
            Err(Error::NoAdmissibleWindow { .. })
        ));
        let z = make_perturbed_lattice(PI, 0.1, 1, -10, 10, XMode::Fixed, 0.0).unwrap();
        let (lo, _) = density_bounds(&z, &[4.0], 0).unwrap();
        assert!(!lo.exact && lo.extrapolated > 0.0);
    }

    #[test]
    fn interleaved_union_density() {
        let a = make_lattice(0.0, 1.0, -60, 60).unwrap();
        let b = make_lattice(0.5, 1.0, -60, 60).unwrap().shifted(0.5);
        let u = union(vec![a, b]).unwrap();
        let r = 20.0;
        let (lo, hi) = density_bounds(&u, &[r], 0).unwrap();
        assert!((lo.extrapolated - 2.0).abs() <= 1.0 / r);
        assert!((hi.extrapolated - 2.0).abs() <= 1.0 / r);
    }

    #[test]
    fn closeness_cases() {
        let z = make_lattice(0.0, 1.0, -20, 20).unwrap();
        assert_eq!(uniform_closeness(&z, PI).unwrap().q_star, 0.0);
        let holed = z.without(20);
        assert!(matches!(
            uniform_closeness(&holed, PI),
            Err(Error::IndexingAmbiguity(_))
        ));
        // symmetric tie goes to the nonnegative side
        let t = explicit(&[[0.0, -0.5], [0.0, 0.5], [0.0, 1.5]]).unwrap();
        assert_eq!(two_sided_indexing(&t).unwrap().anchor, 1);
    }

    #[test]
    fn descriptors_parse() {
        let z =
            parse_descriptor(r#"{"type":"lattice","x0":0.5,"spacing":0.8,"n_min":-64,"n_max":64}"#)
                .unwrap();
        assert_eq!(z.len(), 129);
        let p = parse_descriptor(
            r#"{"type":"perturbed","alpha":3.14159,"Q":0.1,"seed":7,"n_min":-3,"n_max":3}"#,
        )
        .unwrap();
        assert_eq!(p.len(), 7);
        let e = parse_descriptor(r#"{"type":"explicit","points":[[0.1,2.0],[0.2,-1.0]]}"#).unwrap();
        assert_eq!(e.points()[0].y, -1.0);
        let u = parse_descriptor(
            r#"{"type":"union","parts":[{"type":"explicit","points":[[0.1,2.0]]},{"type":"lattice","x0":0,"spacing":1,"n_min":0,"n_max":1}]}"#,
        )
        .unwrap();
        assert_eq!(u.len(), 3);
    }

    #[test]
    fn descriptors_reject_bad_input() {
        for bad in [
            r#"{"type":"lattice","x0":0.5,"spacing":0.8,"n_min":-64,"n_max":64,"extra":1}"#,
            r#"{"type":"lattice","x0":0.5,"spacing":-1,"n_min":0,"n_max":1}"#,
            r#"{"type":"lattice","x0":0.5,"spacing":1,"n_min":0,"n_max":2000000}"#,
            r#"{"type":"lattice","x0":0,"spacing":1,"n_min":-9223372036854775808,"n_max":9223372036854775807}"#,
            r#"{"type":"explicit","points":[[1.5,0]]}"#,
            r#"{"type":"spiral"}"#,
            r#"{"type":"perturbed","alpha":1,"Q":-1,"seed":1,"n_min":0,"n_max":1}"#,
            r#"not json"#,
        ] {
            assert!(
                matches!(parse_descriptor(bad), Err(Error::Descriptor(_))),
                "{bad}"
            );
        }
    }

    proptest! {
        #[test]
        fn cylinder_never_exceeds_planar(pts in prop::collection::vec((0.0f64..1.0, -10.0f64..10.0), 2..40)) {
            let raw: Vec<[f64; 2]> = pts.iter().map(|&(x, y)| [x, y]).collect();
            let z = explicit(&raw).unwrap();
            let c = separation_constant(&z, Metric::Cylinder).unwrap();
            let p = separation_constant(&z, Metric::Planar).unwrap();
            prop_assert!(c <= p);
            // brute force
            let mut best = f64::INFINITY;
            for i in 0..z.len() {
                for j in 0..i {
                    best = best.min(distance(&z.points()[i], &z.points()[j], Metric::Cylinder));
                }
            }
            prop_assert_eq!(c, best);
        }

        #[test]
        fn counts_monotone_and_additive(ys in prop::collection::vec(-20.0f64..20.0, 0..60), w in -10.0f64..10.0, r in 0.1f64..10.0, dr in 0.0f64..5.0) {
            let raw: Vec<[f64; 2]> = ys.iter().map(|&y| [0.0, y]).collect();
            let z = explicit(&raw).unwrap();
            let small = count_in_window(&z, &WindowSpec::new(w, r).unwrap());
            let big = count_in_window(&z, &WindowSpec::new(w, r + dr).unwrap());
            prop_assert!(small <= big);
            let (a, m, b) = (w - r, w, w + r);
            let left = count_between(z.points(), a, m);
            let right = z.points().iter().filter(|p| p.y > m && p.y <= b).count();
            prop_assert_eq!(left + right, count_between(z.points(), a, b));
        }

        #[test]
        fn perturbed_separation(q in 0.0f64..0.45, seed in any::<u64>()) {
            let z = make_perturbed_lattice(PI, q, seed, -30, 30, XMode::Fixed, 0.0).unwrap();
            prop_assert!(separation_constant(&z, Metric::Cylinder).unwrap() >= 1.0 - 2.0 * q - 1e-12);
        }
    }
}
