//! Geometry of eigenspaces: Bloch vectors and rank-1 projectors, ordered
//! projector frames, directors (unordered frames) and field dumps over the
//! `(B_x, B_y)` plane.

use std::io::{self, Write};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::{eig_unitary, real, ComplexMatrix, SpectralData};
use crate::models::{kicked_spin_closed_form, KickedSpinParams, ORIGIN_EXCLUSION};

/// Tolerance of the projector and frame invariants.
pub const PROJECTOR_TOL: f64 = 1e-10;

/// Components below this magnitude are skipped when choosing the sign of a
/// canonical director.
pub const CANONICAL_EPS: f64 = 1e-9;

pub(crate) fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn norm3(a: &[f64; 3]) -> f64 {
    dot3(a, a).sqrt()
}

/// Unit vector `a` labelling the projector `(I + a . sigma)/2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlochVector([f64; 3]);

impl BlochVector {
    pub fn new(a: [f64; 3]) -> Result<Self> {
        let n = norm3(&a);
        if !((n - 1.0).abs() <= PROJECTOR_TOL) {
            return Err(Error::NotUnit { norm: n });
        }
        Ok(Self(a))
    }

    /// Rescales a nonzero vector onto the sphere.
    pub fn normalize(a: [f64; 3]) -> Result<Self> {
        let n = norm3(&a);
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::NotUnit { norm: n });
        }
        Ok(Self(a.map(|x| x / n)))
    }

    pub fn components(&self) -> [f64; 3] {
        self.0
    }

    pub fn antipode(&self) -> Self {
        Self(self.0.map(|x| -x))
    }

    pub fn dot(&self, other: &Self) -> f64 {
        dot3(&self.0, &other.0)
    }
}

/// Hermitian idempotent matrix of unit trace.
#[derive(Clone, Debug, PartialEq)]
pub struct Projector {
    matrix: ComplexMatrix,
}

impl Projector {
    /// Validates Hermiticity, idempotency and unit trace to [`PROJECTOR_TOL`].
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let deviation = rank_one_deviation(&matrix);
        if !(deviation <= PROJECTOR_TOL) {
            return Err(Error::NotRankOneProjector { deviation });
        }
        Ok(Self { matrix })
    }

    /// `|v><v| / <v|v>`.
    pub fn from_vector(v: &[Complex64]) -> Self {
        let n2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        Self {
            matrix: ComplexMatrix::outer(v, v).scale(real(1.0 / n2)),
        }
    }

    pub(crate) fn from_matrix_unchecked(matrix: ComplexMatrix) -> Self {
        Self { matrix }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// `Re tr(P Q)`; equals `|<p|q>|^2` for rank-1 projectors.
    pub fn overlap(&self, other: &Self) -> f64 {
        let (a, b) = (self.matrix.as_dmatrix(), other.matrix.as_dmatrix());
        // tr(PQ) = sum_ij P_ij Q_ji = sum_ij P_ij conj(Q_ij) for Hermitian Q
        a.iter().zip(b.iter()).map(|(x, y)| (x * y.conj()).re).sum()
    }

    /// Entrywise max distance.
    pub fn distance(&self, other: &Self) -> f64 {
        self.matrix.distance(&other.matrix)
    }

    fn sort_key(&self) -> Vec<(i64, i64)> {
        let q = |x: f64| (x / CANONICAL_EPS).round() as i64;
        self.matrix
            .as_dmatrix()
            .transpose()
            .iter()
            .map(|z| (q(z.re), q(z.im)))
            .collect()
    }
}

fn rank_one_deviation(m: &ComplexMatrix) -> f64 {
    if !m.is_finite() {
        return f64::NAN;
    }
    let hermitian = m.distance(&m.adjoint());
    let idempotent = (m * m).distance(m);
    let trace = (m.trace() - real(1.0)).norm();
    hermitian.max(idempotent).max(trace)
}

/// `(I + a . sigma) / 2`.
pub fn projector_of_bloch(a: &BlochVector) -> Projector {
    let [x, y, z] = a.0;
    Projector::from_matrix_unchecked(ComplexMatrix::from_row_slice(
        2,
        &[
            real((1.0 + z) / 2.0),
            Complex64::new(x, -y) / 2.0,
            Complex64::new(x, y) / 2.0,
            real((1.0 - z) / 2.0),
        ],
    ))
}

/// `a_k = tr(P sigma_k)`.
pub fn bloch_of_projector(p: &Projector) -> Result<BlochVector> {
    if p.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: p.dim(),
        });
    }
    let deviation = rank_one_deviation(&p.matrix);
    if !(deviation <= PROJECTOR_TOL) {
        return Err(Error::NotRankOneProjector { deviation });
    }
    Ok(BlochVector(raw_bloch(&p.matrix)))
}

fn raw_bloch(m: &ComplexMatrix) -> [f64; 3] {
    let off = m.get(1, 0);
    [2.0 * off.re, 2.0 * off.im, (m.get(0, 0) - m.get(1, 1)).re]
}

/// Ordered tuple of mutually orthogonal rank-1 projectors resolving the identity.
#[derive(Clone, Debug, PartialEq)]
pub struct OrderedProjectorFrame {
    projectors: Vec<Projector>,
    eigenphases: Option<Vec<f64>>,
}

impl OrderedProjectorFrame {
    /// Checks orthogonality and completeness to [`PROJECTOR_TOL`].
    pub fn new(projectors: Vec<Projector>, eigenphases: Option<Vec<f64>>) -> Result<Self> {
        let Some(first) = projectors.first() else {
            return Err(Error::InvalidFrame {
                deviation: f64::INFINITY,
            });
        };
        let n = first.dim();
        if projectors.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: projectors.len(),
            });
        }
        if let Some(phases) = &eigenphases {
            if phases.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: phases.len(),
                });
            }
        }
        let mut deviation: f64 = 0.0;
        for p in &projectors {
            if p.dim() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: p.dim(),
                });
            }
            deviation = deviation.max(rank_one_deviation(&p.matrix));
        }
        for (i, p) in projectors.iter().enumerate() {
            for q in &projectors[i + 1..] {
                deviation = deviation.max((p.matrix() * q.matrix()).max_norm());
            }
        }
        let sum = projectors
            .iter()
            .fold(ComplexMatrix::zeros(n), |acc, p| &acc + p.matrix());
        deviation = deviation.max(sum.distance(&ComplexMatrix::identity(n)));
        if !(deviation <= PROJECTOR_TOL) {
            return Err(Error::InvalidFrame { deviation });
        }
        Ok(Self {
            projectors,
            eigenphases,
        })
    }

    /// Frame of a spectral decomposition, in the order it reports.
    pub fn from_spectral(sd: &SpectralData) -> Result<Self> {
        let projectors = sd
            .projectors
            .iter()
            .map(|m| Projector::from_matrix_unchecked(m.clone()))
            .collect();
        Self::new(projectors, Some(sd.eigenphases.clone()))
    }

    pub(crate) fn from_parts_unchecked(projectors: Vec<Projector>, eigenphases: Option<Vec<f64>>) -> Self {
        Self {
            projectors,
            eigenphases,
        }
    }

    pub fn len(&self) -> usize {
        self.projectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projectors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.projectors[0].dim()
    }

    pub fn projectors(&self) -> &[Projector] {
        &self.projectors
    }

    pub fn eigenphases(&self) -> Option<&[f64]> {
        self.eigenphases.as_deref()
    }

    /// Frame whose `i`-th element is `self[order[i]]`.
    pub fn reordered(&self, order: &[usize]) -> Self {
        assert_eq!(order.len(), self.len());
        Self {
            projectors: order.iter().map(|&k| self.projectors[k].clone()).collect(),
            eigenphases: self
                .eigenphases
                .as_ref()
                .map(|ph| order.iter().map(|&k| ph[k]).collect()),
        }
    }

    /// Elementwise max projector distance to a frame of the same size.
    pub fn distance(&self, other: &Self) -> f64 {
        assert_eq!(self.len(), other.len());
        self.projectors
            .iter()
            .zip(&other.projectors)
            .map(|(p, q)| p.distance(q))
            .fold(0.0, f64::max)
    }

    /// Finds `sigma` with `self[i] = other[sigma(i)]` within `tol`, if the
    /// two frames agree as sets.
    pub fn match_as_set(&self, other: &Self, tol: f64) -> Option<Vec<usize>> {
        if self.len() != other.len() {
            return None;
        }
        let mut used = vec![false; other.len()];
        let mut sigma = Vec::with_capacity(self.len());
        for p in &self.projectors {
            let (k, d) = other
                .projectors
                .iter()
                .enumerate()
                .map(|(k, q)| (k, p.distance(q)))
                .min_by(|a, b| a.1.total_cmp(&b.1))?;
            if d > tol || used[k] {
                return None;
            }
            used[k] = true;
            sigma.push(k);
        }
        Some(sigma)
    }
}

/// Eigenprojector frame ordered by increasing quasienergy.
pub fn frame_of_unitary(u: &ComplexMatrix, tol: f64) -> Result<OrderedProjectorFrame> {
    OrderedProjectorFrame::from_spectral(&eig_unitary(u, tol)?)
}

/// Flips `n` so its first component of magnitude above [`CANONICAL_EPS`] is positive.
pub fn canonical_axis(n: [f64; 3]) -> [f64; 3] {
    match n.iter().find(|x| x.abs() > CANONICAL_EPS) {
        Some(&x) if x < 0.0 => n.map(|c| -c),
        _ => n,
    }
}

/// An eigenprojector frame with the order forgotten.
///
/// Two-level frames become a headless unit vector (a point of the real
/// projective plane); larger frames keep a sorted list of projectors.
#[derive(Clone, Debug, PartialEq)]
pub enum Director {
    Axis([f64; 3]),
    Multiset(Vec<Projector>),
}

impl Director {
    /// Canonical director of a nonzero 3-vector.
    pub fn from_vector(n: [f64; 3]) -> Result<Self> {
        let a = BlochVector::normalize(n)?;
        Ok(Director::Axis(canonical_axis(a.0)))
    }

    pub fn axis(&self) -> Option<[f64; 3]> {
        match self {
            Director::Axis(n) => Some(*n),
            Director::Multiset(_) => None,
        }
    }

    pub fn canonical(&self) -> Self {
        match self {
            Director::Axis(n) => Director::Axis(canonical_axis(*n)),
            Director::Multiset(ps) => Director::Multiset(sorted_projectors(ps.clone())),
        }
    }

    /// Equality of canonical forms up to `tol`.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        match (self, other) {
            (Director::Axis(a), Director::Axis(b)) => {
                let (a, b) = (canonical_axis(*a), canonical_axis(*b));
                (0..3).all(|k| (a[k] - b[k]).abs() <= tol)
            }
            (Director::Multiset(a), Director::Multiset(b)) => {
                let fa = OrderedProjectorFrame::from_parts_unchecked(a.clone(), None);
                let fb = OrderedProjectorFrame::from_parts_unchecked(b.clone(), None);
                fa.match_as_set(&fb, tol).is_some()
            }
            _ => false,
        }
    }
}

fn sorted_projectors(mut ps: Vec<Projector>) -> Vec<Projector> {
    ps.sort_by_cached_key(|p| p.sort_key());
    ps
}

/// Forgets the order of a frame.
///
/// For two-level frames the axis is `(a_0 - a_1)/2` with `a_k` the Bloch
/// vector of element `k`, so swapping the two elements negates it exactly
/// and the canonical form is swap invariant bit for bit.
pub fn director_of_frame(frame: &OrderedProjectorFrame) -> Result<Director> {
    if frame.dim() == 2 {
        let a0 = raw_bloch(frame.projectors[0].matrix());
        let a1 = raw_bloch(frame.projectors[1].matrix());
        let half = [(a0[0] - a1[0]) / 2.0, (a0[1] - a1[1]) / 2.0, (a0[2] - a1[2]) / 2.0];
        Director::from_vector(half)
    } else {
        Ok(Director::Multiset(sorted_projectors(frame.projectors.clone())))
    }
}

/// What [`field_dump`] records at each grid point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldMode {
    /// Sign-continued Bloch vector; shows the branch cut.
    Bloch,
    /// Canonical director; single valued.
    Director,
}

impl FieldMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            FieldMode::Bloch => "bloch",
            FieldMode::Director => "director",
        }
    }
}

/// Rectangular lattice in the `(B_x, B_y)` plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub bx_min: f64,
    pub bx_max: f64,
    pub by_min: f64,
    pub by_max: f64,
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    pub fn square(min: f64, max: f64, n: usize) -> Self {
        Self {
            bx_min: min,
            bx_max: max,
            by_min: min,
            by_max: max,
            nx: n,
            ny: n,
        }
    }

    fn coord(min: f64, max: f64, n: usize, k: usize) -> f64 {
        if n == 1 {
            min
        } else {
            min + (max - min) * k as f64 / (n - 1) as f64
        }
    }

    pub fn bx(&self, i: usize) -> f64 {
        Self::coord(self.bx_min, self.bx_max, self.nx, i)
    }

    pub fn by(&self, j: usize) -> f64 {
        Self::coord(self.by_min, self.by_max, self.ny, j)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldSample {
    pub bx: f64,
    pub by: f64,
    /// `None` at degenerate points.
    pub vector: Option<[f64; 3]>,
}

impl FieldSample {
    pub fn degenerate(&self) -> bool {
        self.vector.is_none()
    }
}

/// Closed-form Bloch vector of the kicked spin at a plane point, `None` at
/// degeneracies.
pub fn kicked_spin_bloch(bx: f64, by: f64) -> Option<[f64; 3]> {
    let params = KickedSpinParams::from_cartesian(bx, by);
    if params.b <= ORIGIN_EXCLUSION {
        return None;
    }
    kicked_spin_closed_form(&params).ok().map(|cf| cf.a)
}

/// Picks the sign of each Bloch vector so consecutive points overlap
/// positively, starting from `seed`.
pub fn continue_bloch(vectors: &[Option<[f64; 3]>], seed: [f64; 3]) -> Vec<Option<[f64; 3]>> {
    let mut reference = seed;
    vectors
        .iter()
        .map(|v| {
            v.map(|a| {
                let a = if dot3(&a, &reference) < 0.0 { a.map(|x| -x) } else { a };
                reference = a;
                a
            })
        })
        .collect()
}

/// Samples the kicked-spin eigenobject field over `grid`, row by row
/// (`B_y` outer, `B_x` inner).
///
/// In Bloch mode every row is sign-continued from its first nondegenerate
/// point, which in turn is continued from the previous row's first point
/// (the first row from `seed`). In director mode each point carries its
/// canonical director and the seed is irrelevant.
pub fn field_dump(grid: &GridSpec, mode: FieldMode, seed: [f64; 3]) -> Vec<FieldSample> {
    let mut out = Vec::with_capacity(grid.nx * grid.ny);
    let mut row_seed = seed;
    for j in 0..grid.ny {
        let by = grid.by(j);
        let raw: Vec<Option<[f64; 3]>> = (0..grid.nx).map(|i| kicked_spin_bloch(grid.bx(i), by)).collect();
        let values = match mode {
            FieldMode::Bloch => {
                let cont = continue_bloch(&raw, row_seed);
                if let Some(first) = cont.iter().flatten().next() {
                    row_seed = *first;
                }
                cont
            }
            FieldMode::Director => raw.iter().map(|v| v.map(canonical_axis)).collect(),
        };
        out.extend(values.into_iter().enumerate().map(|(i, vector)| FieldSample {
            bx: grid.bx(i),
            by,
            vector,
        }));
    }
    out
}

fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// CSV with header `bx,by,vx,vy,vz,degenerate`; vector components of
/// degenerate points are written as `NaN`.
pub fn write_field_csv<W: Write>(samples: &[FieldSample], mut w: W) -> io::Result<()> {
    writeln!(w, "bx,by,vx,vy,vz,degenerate")?;
    for s in samples {
        let v = s.vector.unwrap_or([f64::NAN; 3]);
        writeln!(
            w,
            "{},{},{},{},{},{}",
            fmt17(s.bx),
            fmt17(s.by),
            fmt17(v[0]),
            fmt17(v[1]),
            fmt17(v[2]),
            u8::from(s.degenerate())
        )?;
    }
    Ok(())
}
