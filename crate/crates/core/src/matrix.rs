//! Small dense complex linear algebra.
//!
//! Everything here is sized for the handful of levels a Floquet operator of
//! interest carries (2 to roughly 16). The only nontrivial routine is
//! [`eig_unitary`], whose contract is stated in terms of its residual rather
//! than the algorithm behind it.

use std::f64::consts::TAU;
use std::fmt;
use std::ops::{Add, Mul, Sub};

use nalgebra::linalg::Schur;
use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Smallest circular eigenphase gap accepted by [`eig_unitary`].
pub const DEFAULT_GAP_THRESHOLD: f64 = 1e-8;

pub(crate) const I: Complex64 = Complex64::new(0.0, 1.0);

#[cfg(test)]
pub(crate) fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[inline]
pub(crate) fn real(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Dense square complex matrix.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    inner: DMatrix<Complex64>,
}

impl ComplexMatrix {
    /// Builds an `n x n` matrix from row-major entries.
    pub fn from_row_slice(n: usize, entries: &[Complex64]) -> Self {
        assert!(n >= 1, "matrix dimension must be positive");
        assert_eq!(entries.len(), n * n, "expected {} entries", n * n);
        Self {
            inner: DMatrix::from_row_slice(n, n, entries),
        }
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let n = rows.len();
        let entries: Vec<Complex64> = rows
            .iter()
            .flat_map(|r| {
                assert_eq!(r.len(), n, "matrix must be square");
                r.iter().map(|&x| real(x))
            })
            .collect();
        Self::from_row_slice(n, &entries)
    }

    pub fn from_dmatrix(inner: DMatrix<Complex64>) -> Self {
        assert!(
            inner.is_square() && inner.nrows() >= 1,
            "matrix must be square and non-empty"
        );
        Self { inner }
    }

    pub fn identity(n: usize) -> Self {
        assert!(n >= 1);
        Self {
            inner: DMatrix::identity(n, n),
        }
    }

    pub fn zeros(n: usize) -> Self {
        assert!(n >= 1);
        Self {
            inner: DMatrix::zeros(n, n),
        }
    }

    pub fn diagonal(entries: &[Complex64]) -> Self {
        assert!(!entries.is_empty());
        let n = entries.len();
        let mut inner = DMatrix::zeros(n, n);
        for (k, &z) in entries.iter().enumerate() {
            inner[(k, k)] = z;
        }
        Self { inner }
    }

    /// Outer product `|u><w|`.
    pub fn outer(u: &[Complex64], w: &[Complex64]) -> Self {
        assert_eq!(u.len(), w.len());
        let n = u.len();
        Self {
            inner: DMatrix::from_fn(n, n, |i, j| u[i] * w[j].conj()),
        }
    }

    pub fn pauli_x() -> Self {
        Self::from_row_slice(2, &[real(0.0), real(1.0), real(1.0), real(0.0)])
    }

    pub fn pauli_y() -> Self {
        Self::from_row_slice(2, &[real(0.0), -I, I, real(0.0)])
    }

    pub fn pauli_z() -> Self {
        Self::from_row_slice(2, &[real(1.0), real(0.0), real(0.0), real(-1.0)])
    }

    pub fn dim(&self) -> usize {
        self.inner.nrows()
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.inner[(row, col)]
    }

    pub fn as_dmatrix(&self) -> &DMatrix<Complex64> {
        &self.inner
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self {
            inner: self.inner.adjoint(),
        }
    }

    pub fn scale(&self, z: Complex64) -> Self {
        Self { inner: &self.inner * z }
    }

    pub fn trace(&self) -> Complex64 {
        self.inner.trace()
    }

    pub fn determinant(&self) -> Complex64 {
        self.inner.clone().determinant()
    }

    /// Largest entry modulus.
    pub fn max_norm(&self) -> f64 {
        self.inner.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `max |self - other|` entrywise.
    pub fn distance(&self, other: &Self) -> f64 {
        assert_eq!(self.dim(), other.dim());
        self.inner
            .iter()
            .zip(other.inner.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.inner.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim());
        (0..self.dim())
            .map(|i| (0..self.dim()).map(|j| self.inner[(i, j)] * v[j]).sum())
            .collect()
    }

    /// Largest entry modulus of `self^dagger self - I`.
    pub fn unitarity_deviation(&self) -> f64 {
        let gram = self.inner.adjoint() * &self.inner;
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                let d = (gram[(i, j)] - real(target)).norm();
                if d.is_nan() {
                    return f64::NAN;
                }
                worst = worst.max(d);
            }
        }
        worst
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ComplexMatrix{}", self.inner)
    }
}

impl<'a> Mul<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix {
            inner: &self.inner * &rhs.inner,
        }
    }
}

impl Mul for ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: ComplexMatrix) -> ComplexMatrix {
        &self * &rhs
    }
}

impl<'a> Add<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix {
            inner: &self.inner + &rhs.inner,
        }
    }
}

impl<'a> Sub<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix {
            inner: &self.inner - &rhs.inner,
        }
    }
}

pub fn adjoint(m: &ComplexMatrix) -> ComplexMatrix {
    m.adjoint()
}

/// True iff `max |M^dagger M - I| <= tol`.
pub fn is_unitary(m: &ComplexMatrix, tol: f64) -> bool {
    m.unitarity_deviation() <= tol
}

pub fn inner(u: &[Complex64], w: &[Complex64]) -> Complex64 {
    assert_eq!(u.len(), w.len());
    u.iter().zip(w).map(|(a, b)| a.conj() * b).sum()
}

pub fn norm(u: &[Complex64]) -> f64 {
    u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn normalized(u: &[Complex64]) -> Vec<Complex64> {
    let n = norm(u);
    u.iter().map(|z| z / n).collect()
}

/// Maps an angle onto `[0, 2pi)`.
pub fn wrap_phase(theta: f64) -> f64 {
    let w = theta.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Shortest distance between two angles on the circle.
pub fn circular_distance(a: f64, b: f64) -> f64 {
    let d = wrap_phase(a - b);
    d.min(TAU - d)
}

/// Smallest circular gap of a list of eigenphases sorted in `[0, 2pi)`.
/// A single phase has gap `2pi`.
pub fn min_circular_gap(sorted: &[f64]) -> f64 {
    match sorted {
        [] | [_] => TAU,
        _ => {
            let wrap = TAU - (sorted[sorted.len() - 1] - sorted[0]);
            sorted.windows(2).map(|w| w[1] - w[0]).fold(wrap, f64::min)
        }
    }
}

/// Spectral decomposition `U = sum_n z_n P_n` of a nondegenerate unitary.
#[derive(Clone, Debug)]
pub struct SpectralData {
    /// Quasienergies `theta_n` in `[0, 2pi)`, strictly increasing.
    pub eigenphases: Vec<f64>,
    /// `z_n = exp(-i theta_n)`.
    pub eigenvalues: Vec<Complex64>,
    /// Unit eigenvectors, one per eigenphase.
    pub eigenvectors: Vec<Vec<Complex64>>,
    /// Rank-1 projectors `|v_n><v_n|`.
    pub projectors: Vec<ComplexMatrix>,
    /// `max_n |U v_n - z_n v_n|`.
    pub residual: f64,
}

impl SpectralData {
    pub fn dim(&self) -> usize {
        self.eigenphases.len()
    }

    pub fn min_gap(&self) -> f64 {
        min_circular_gap(&self.eigenphases)
    }

    /// `sum_n z_n P_n`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.dim();
        self.eigenvalues
            .iter()
            .zip(&self.projectors)
            .fold(ComplexMatrix::zeros(n), |acc, (z, p)| &acc + &p.scale(*z))
    }
}

/// Eigendecomposition of a unitary with the default degeneracy threshold.
pub fn eig_unitary(u: &ComplexMatrix, tol: f64) -> Result<SpectralData> {
    eig_unitary_with_gap(u, tol, DEFAULT_GAP_THRESHOLD)
}

/// Eigendecomposition of a nondegenerate unitary.
///
/// Eigenphases follow the convention `z = exp(-i theta)` with `theta` in
/// `[0, 2pi)` and come out sorted increasingly. Fails with
/// [`Error::DegenerateSpectrum`] when two eigenphases are within
/// `gap_threshold` of each other on the circle.
pub fn eig_unitary_with_gap(u: &ComplexMatrix, tol: f64, gap_threshold: f64) -> Result<SpectralData> {
    if !(tol > 0.0) {
        return Err(Error::InvalidOptions(format!("tolerance must be positive, got {tol}")));
    }
    let deviation = u.unitarity_deviation();
    if !(deviation <= tol) {
        return Err(Error::NotUnitary { deviation });
    }
    let n = u.dim();

    let q = Schur::new(u.inner.clone()).unpack().0;
    let mut pairs: Vec<(f64, Vec<Complex64>)> = (0..n)
        .map(|k| {
            let v = normalized(q.column(k).as_slice());
            let rayleigh = inner(&v, &u.apply(&v));
            (wrap_phase(-rayleigh.arg()), v)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));

    let eigenphases: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let gap = min_circular_gap(&eigenphases);
    if gap <= gap_threshold {
        return Err(Error::DegenerateSpectrum {
            gap,
            threshold: gap_threshold,
        });
    }

    let eigenvalues: Vec<Complex64> = eigenphases.iter().map(|&t| Complex64::from_polar(1.0, -t)).collect();
    let eigenvectors: Vec<Vec<Complex64>> = pairs.into_iter().map(|p| p.1).collect();
    let residual = eigenvectors
        .iter()
        .zip(&eigenvalues)
        .map(|(v, z)| {
            let uv = u.apply(v);
            norm(&uv.iter().zip(v).map(|(a, b)| a - z * b).collect::<Vec<_>>())
        })
        .fold(0.0, f64::max);
    if !(residual <= tol) {
        return Err(Error::ResidualTooLarge { residual, tol });
    }
    let projectors = eigenvectors.iter().map(|v| ComplexMatrix::outer(v, v)).collect();

    Ok(SpectralData {
        eigenphases,
        eigenvalues,
        eigenvectors,
        projectors,
        residual,
    })
}
