//! Dense complex Hermitian matrices and a cyclic Jacobi eigensolver.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Square complex matrix kept conjugate-symmetric by construction.
///
/// Storage is row-major. Mutation goes through [`HermitianMatrix::set`],
/// which writes both `(i, j)` and `(j, i)`.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl HermitianMatrix {
    pub fn zeros(dim: usize) -> Self {
        HermitianMatrix {
            dim,
            data: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Builds from the upper triangle of `f(i, j)`; the diagonal is made real.
    pub fn from_fn<F: FnMut(usize, usize) -> Complex64>(dim: usize, mut f: F) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in i..dim {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    /// Checks conjugate symmetry to `tol` (absolute, scaled by the max entry).
    pub fn from_rows(rows: Vec<Vec<Complex64>>, tol: f64) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidParameter("matrix is not square".into()));
        }
        let data: Vec<Complex64> = rows.into_iter().flatten().collect();
        let scale = data.iter().map(|c| c.norm()).fold(0.0, f64::max).max(1.0);
        for i in 0..dim {
            for j in i..dim {
                if (data[i * dim + j] - data[j * dim + i].conj()).norm() > tol * scale {
                    return Err(Error::InvalidParameter(format!(
                        "matrix is not Hermitian at ({i}, {j})"
                    )));
                }
            }
        }
        let mut m = HermitianMatrix { dim, data };
        m.symmetrize();
        Ok(m)
    }

    /// `v v^*`.
    pub fn rank_one(v: &[Complex64]) -> Self {
        let mut m = Self::zeros(v.len());
        m.add_rank_one(v, 1.0);
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: Complex64) {
        if i == j {
            self.data[i * self.dim + i] = Complex64::new(value.re, 0.0);
        } else {
            self.data[i * self.dim + j] = value;
            self.data[j * self.dim + i] = value.conj();
        }
    }

    /// `self += weight * v v^*`.
    pub fn add_rank_one(&mut self, v: &[Complex64], weight: f64) {
        assert_eq!(v.len(), self.dim);
        let n = self.dim;
        for i in 0..n {
            let vi = v[i] * weight;
            for j in 0..n {
                self.data[i * n + j] += vi * v[j].conj();
            }
        }
        for i in 0..n {
            self.data[i * n + i].im = 0.0;
        }
    }

    /// Entrywise sum; dims must agree.
    pub fn add_assign(&mut self, other: &HermitianMatrix) {
        assert_eq!(self.dim, other.dim);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += *b;
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i].re).sum()
    }

    /// Principal submatrix on rows/columns `lo..hi`.
    pub fn block(&self, lo: usize, hi: usize) -> HermitianMatrix {
        let idx: Vec<usize> = (lo..hi).collect();
        self.principal_submatrix(&idx)
    }

    pub fn principal_submatrix(&self, idx: &[usize]) -> HermitianMatrix {
        let d = idx.len();
        let mut data = Vec::with_capacity(d * d);
        for &i in idx {
            for &j in idx {
                data.push(self.get(i, j));
            }
        }
        HermitianMatrix { dim: d, data }
    }

    /// `M v`.
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        let n = self.dim;
        (0..n)
            .map(|i| (0..n).map(|j| self.data[i * n + j] * v[j]).sum())
            .collect()
    }

    /// `v^* M v` (real for Hermitian `M`).
    pub fn quadratic_form(&self, v: &[Complex64]) -> f64 {
        let mv = self.apply(v);
        v.iter().zip(&mv).map(|(a, b)| (a.conj() * b).re).sum()
    }

    fn symmetrize(&mut self) {
        let n = self.dim;
        for i in 0..n {
            self.data[i * n + i].im = 0.0;
            for j in (i + 1)..n {
                let avg = 0.5 * (self.data[i * n + j] + self.data[j * n + i].conj());
                self.data[i * n + j] = avg;
                self.data[j * n + i] = avg.conj();
            }
        }
    }
}

fn off_diagonal_norm(a: &[Complex64], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[i * n + j].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Eigenvalues in ascending order with matching unit eigenvectors
/// (`vectors[i]` belongs to `values[i]`).
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<Complex64>>,
    pub sweeps: usize,
}

pub const MAX_SWEEPS: usize = 100;
pub const OFF_DIAGONAL_TOL: f64 = 1e-12;

/// Eigenvalues of `m`, ascending.
pub fn hermitian_eigs(m: &HermitianMatrix) -> Result<Vec<f64>> {
    jacobi(m, false).map(|e| e.values)
}

/// Eigenvalues and eigenvectors of `m`.
pub fn hermitian_eigh(m: &HermitianMatrix) -> Result<Eigen> {
    jacobi(m, true)
}

fn jacobi(m: &HermitianMatrix, want_vectors: bool) -> Result<Eigen> {
    let n = m.dim;
    if n == 0 {
        return Err(Error::InvalidParameter(
            "eigenproblem of dimension 0".into(),
        ));
    }
    let mut a = m.data.clone();
    let mut v = if want_vectors {
        HermitianMatrix::identity(n).data
    } else {
        Vec::new()
    };
    let norm = m.frobenius_norm();
    let target = OFF_DIAGONAL_TOL * norm;
    let mut sweeps = 0;
    loop {
        let off = off_diagonal_norm(&a, n);
        if off <= target || norm == 0.0 {
            break;
        }
        if sweeps >= MAX_SWEEPS {
            return Err(Error::EigenNonConvergence {
                sweeps,
                off_norm: off,
            });
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, n, p, q, want_vectors);
            }
        }
        sweeps += 1;
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a[i * n + i].re).collect();
    order.sort_by(|&i, &j| diag[i].total_cmp(&diag[j]));
    let values = order.iter().map(|&i| diag[i]).collect();
    let vectors = if want_vectors {
        order
            .iter()
            .map(|&c| (0..n).map(|r| v[r * n + c]).collect())
            .collect()
    } else {
        Vec::new()
    };
    Ok(Eigen {
        values,
        vectors,
        sweeps,
    })
}

// One two-sided rotation A <- U^* A U annihilating A[p][q], with
// U = diag(1, e^{-i phi}) composed with a real Jacobi rotation in (p, q).
fn rotate(a: &mut [Complex64], v: &mut [Complex64], n: usize, p: usize, q: usize, vecs: bool) {
    let apq = a[p * n + q];
    let mag = apq.norm();
    if mag == 0.0 {
        return;
    }
    let app = a[p * n + p].re;
    let aqq = a[q * n + q].re;
    let e = apq / mag; // e^{i phi}
    let ec = e.conj();
    let theta = (aqq - app) / (2.0 * mag);
    let t = if theta.is_infinite() {
        0.5 / theta
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        let akp = a[k * n + p];
        let akq = a[k * n + q];
        let nkp = akp * c - akq * ec * s;
        let nkq = akp * s + akq * ec * c;
        a[k * n + p] = nkp;
        a[p * n + k] = nkp.conj();
        a[k * n + q] = nkq;
        a[q * n + k] = nkq.conj();
    }
    a[p * n + p] = Complex64::new(app - t * mag, 0.0);
    a[q * n + q] = Complex64::new(aqq + t * mag, 0.0);
    a[p * n + q] = Complex64::new(0.0, 0.0);
    a[q * n + p] = Complex64::new(0.0, 0.0);

    if vecs {
        for k in 0..n {
            let vkp = v[k * n + p];
            let vkq = v[k * n + q];
            v[k * n + p] = vkp * c - vkq * ec * s;
            v[k * n + q] = vkp * s + vkq * ec * c;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::rng::RngStream;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_hermitian(n: usize, seed: u64) -> HermitianMatrix {
        let mut r = RngStream::new(seed);
        HermitianMatrix::from_fn(n, |_, _| c(r.uniform(-1.0, 1.0), r.uniform(-1.0, 1.0)))
    }

    #[test]
    fn identity_spectrum() {
        assert_eq!(
            hermitian_eigs(&HermitianMatrix::identity(3)).unwrap(),
            vec![1.0; 3]
        );
    }

    #[test]
    fn diagonal_is_sorted() {
        let mut m = HermitianMatrix::zeros(2);
        m.set(0, 0, c(2.0, 0.0));
        m.set(1, 1, c(-1.0, 0.0));
        assert_eq!(hermitian_eigs(&m).unwrap(), vec![-1.0, 2.0]);
    }

    #[test]
    fn rank_one_spectrum() {
        let v = [c(1.0, 1.0), c(0.0, 1.0)]; // |v|^2 = 3
        let e = hermitian_eigs(&HermitianMatrix::rank_one(&v)).unwrap();
        assert!(e[0].abs() < 1e-14);
        assert!((e[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn empty_is_rejected() {
        assert!(hermitian_eigs(&HermitianMatrix::zeros(0)).is_err());
    }

    #[test]
    fn residuals_are_small() {
        let m = random_hermitian(40, 11);
        let e = hermitian_eigh(&m).unwrap();
        let scale = m.frobenius_norm();
        for (lam, v) in e.values.iter().zip(&e.vectors) {
            let mv = m.apply(v);
            let r: f64 = mv
                .iter()
                .zip(v)
                .map(|(a, b)| (a - b * lam).norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!(r <= 1e-10 * scale, "{r}");
        }
    }

    #[test]
    fn matches_nalgebra() {
        let m = random_hermitian(25, 5);
        let na = nalgebra::DMatrix::from_fn(25, 25, |i, j| m.get(i, j));
        let mut expected: Vec<f64> = na.symmetric_eigenvalues().iter().copied().collect();
        expected.sort_by(f64::total_cmp);
        let got = hermitian_eigs(&m).unwrap();
        for (a, b) in got.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-11, "{a} vs {b}");
        }
    }

    #[test]
    fn from_rows_rejects_non_hermitian() {
        let rows = vec![
            vec![c(1.0, 0.0), c(0.0, 1.0)],
            vec![c(0.0, 1.0), c(1.0, 0.0)],
        ];
        assert!(HermitianMatrix::from_rows(rows, 1e-12).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn cauchy_interlacing(seed in any::<u64>(), n in 2usize..12, drop in 0usize..12) {
            let m = random_hermitian(n, seed);
            let drop = drop % n;
            let idx: Vec<usize> = (0..n).filter(|&i| i != drop).collect();
            let full = hermitian_eigs(&m).unwrap();
            let sub = hermitian_eigs(&m.principal_submatrix(&idx)).unwrap();
            let tol = 1e-11 * m.frobenius_norm();
            for i in 0..n - 1 {
                prop_assert!(full[i] <= sub[i] + tol);
                prop_assert!(sub[i] <= full[i + 1] + tol);
            }
        }
    }
}
