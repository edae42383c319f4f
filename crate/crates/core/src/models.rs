//! The concrete driven systems: the two-parameter kicked spin-1/2, the
//! nonadiabatic kicked spin and the N-level rank-1 quantum map.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::{eig_unitary, inner, norm, real, ComplexMatrix, I};

/// Threshold on `sin(delta/2)` below which a kicked-spin point counts as degenerate.
pub const DEGENERACY_THRESHOLD: f64 = 1e-8;

/// Radius of the excluded disc around the origin of the `(B_x, B_y)` plane.
///
/// The kick strength is tied to the azimuth of the field, so the family has
/// no limit at `B = 0`: the operator depends on the direction of approach.
pub const ORIGIN_EXCLUSION: f64 = 1e-6;

/// Overlap margin used when deciding whether `|v>` is an eigenvector of `U0`.
pub const EIGENVECTOR_MARGIN: f64 = 1e-10;

/// Field magnitude `B` and azimuth `phi` of the kicked spin; the kick
/// strength is slaved to the azimuth (`lambda = phi`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KickedSpinParams {
    pub b: f64,
    pub phi: f64,
}

impl KickedSpinParams {
    pub fn new(b: f64, phi: f64) -> Self {
        assert!(
            b >= 0.0 && b.is_finite(),
            "field magnitude must be finite and nonnegative"
        );
        assert!(phi.is_finite(), "azimuth must be finite");
        Self { b, phi }
    }

    /// Polar coordinates of a point in the `(B_x, B_y)` plane.
    pub fn from_cartesian(bx: f64, by: f64) -> Self {
        Self::new(bx.hypot(by), by.atan2(bx))
    }

    pub fn bx(&self) -> f64 {
        self.b * self.phi.cos()
    }

    pub fn by(&self) -> f64 {
        self.b * self.phi.sin()
    }

    pub fn e_rho(&self) -> [f64; 3] {
        [self.phi.cos(), self.phi.sin(), 0.0]
    }

    pub fn e_phi(&self) -> [f64; 3] {
        [-self.phi.sin(), self.phi.cos(), 0.0]
    }
}

/// `exp(-i phi (1 - sigma_z)/2) exp(-i (B/2) e_rho . sigma)`.
pub fn kicked_spin_floquet(params: &KickedSpinParams) -> ComplexMatrix {
    let (b, phi) = (params.b, params.phi);
    let kick = ComplexMatrix::diagonal(&[real(1.0), Complex64::from_polar(1.0, -phi)]);
    // e_rho . sigma = [[0, e^{-i phi}], [e^{i phi}, 0]]
    let (cb, sb) = ((b / 2.0).cos(), (b / 2.0).sin());
    let rotation = ComplexMatrix::from_row_slice(
        2,
        &[
            real(cb),
            -I * sb * Complex64::from_polar(1.0, -phi),
            -I * sb * Complex64::from_polar(1.0, phi),
            real(cb),
        ],
    );
    &kick * &rotation
}

/// Kicked-spin Floquet operator at a point of the `(B_x, B_y)` plane.
///
/// Points inside [`ORIGIN_EXCLUSION`] of the origin are rejected as
/// degenerate.
pub fn kicked_spin_at(bx: f64, by: f64) -> Result<ComplexMatrix> {
    let params = KickedSpinParams::from_cartesian(bx, by);
    if params.b <= ORIGIN_EXCLUSION {
        return Err(Error::DegeneratePoint { sin_half_gap: 0.0 });
    }
    Ok(kicked_spin_floquet(&params))
}

/// Closed-form spectral data of the kicked spin.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClosedFormSpectrum {
    /// Quasienergy gap, `2 arccos(cos(phi/2) cos(B/2))`.
    pub delta: f64,
    /// Unnormalized Bloch vector.
    pub a_tilde: [f64; 3],
    /// Normalized Bloch vector of the eigenprojector carrying `z_plus`.
    pub a: [f64; 3],
    /// Eigenvalue on `P(a)`: `exp(-i (phi + delta)/2)`.
    pub z_plus: Complex64,
    /// Eigenvalue on `P(-a)`: `exp(-i (phi - delta)/2)`.
    pub z_minus: Complex64,
}

/// Evaluates the closed-form diagonalization of [`kicked_spin_floquet`].
///
/// Expanding the Floquet operator gives
/// `U = e^{-i phi/2} [cos(delta/2) - i sigma . a_tilde]`, so the eigenvalue
/// on `P(a)` is `e^{-i(phi + delta)/2}` and the one on `P(-a)` is
/// `e^{-i(phi - delta)/2}`.
pub fn kicked_spin_closed_form(params: &KickedSpinParams) -> Result<ClosedFormSpectrum> {
    let (b, phi) = (params.b, params.phi);
    let (ch, sh) = ((phi / 2.0).cos(), (phi / 2.0).sin());
    let (cb, sb) = ((b / 2.0).cos(), (b / 2.0).sin());
    let delta = 2.0 * (ch * cb).clamp(-1.0, 1.0).acos();

    let e_rho = params.e_rho();
    let e_phi = params.e_phi();
    let a_tilde = [
        (e_rho[0] * ch - e_phi[0] * sh) * sb,
        (e_rho[1] * ch - e_phi[1] * sh) * sb,
        -sh * cb,
    ];
    // |a_tilde| = sin(delta/2) exactly in real arithmetic; the norm is the
    // better-conditioned of the two near a degeneracy.
    let sin_half = a_tilde.iter().map(|x| x * x).sum::<f64>().sqrt();
    if sin_half <= DEGENERACY_THRESHOLD {
        return Err(Error::DegeneratePoint { sin_half_gap: sin_half });
    }
    let a = a_tilde.map(|x| x / sin_half);

    Ok(ClosedFormSpectrum {
        delta,
        a_tilde,
        a,
        z_plus: Complex64::from_polar(1.0, -(phi + delta) / 2.0),
        z_minus: Complex64::from_polar(1.0, -(phi - delta) / 2.0),
    })
}

/// `exp(-i B sigma_y / 2)`: the kick of the nonadiabatic kicked spin.
pub fn nonadiabatic_kick(b: f64) -> ComplexMatrix {
    let (cb, sb) = ((b / 2.0).cos(), (b / 2.0).sin());
    ComplexMatrix::from_real_rows(&[&[cb, -sb], &[sb, cb]])
}

/// `exp(-i pi sigma_z t / 2)`: free evolution over a fraction `t` of the period.
pub fn nonadiabatic_free(t: f64) -> ComplexMatrix {
    ComplexMatrix::diagonal(&[
        Complex64::from_polar(1.0, -PI * t / 2.0),
        Complex64::from_polar(1.0, PI * t / 2.0),
    ])
}

/// Floquet operator `exp(-i pi sigma_z/2) exp(-i B sigma_y/2)`.
pub fn nonadiabatic_floquet(b: f64) -> ComplexMatrix {
    &nonadiabatic_free(1.0) * &nonadiabatic_kick(b)
}

/// Eigenvectors `|0>` (eigenvalue `-i`) and `|1>` (eigenvalue `+i`) of
/// [`nonadiabatic_floquet`].
pub fn nonadiabatic_eigvecs(b: f64) -> (Vec<Complex64>, Vec<Complex64>) {
    let (c4, s4) = ((b / 4.0).cos(), (b / 4.0).sin());
    (vec![real(c4), real(-s4)], vec![real(s4), real(c4)])
}

/// `(|0> + |1>)/sqrt2, (|0> - |1>)/sqrt2`.
pub fn plus_minus_frame(v0: &[Complex64], v1: &[Complex64]) -> (Vec<Complex64>, Vec<Complex64>) {
    assert_eq!(v0.len(), v1.len());
    let plus = v0.iter().zip(v1).map(|(a, b)| (a + b) * FRAC_1_SQRT_2).collect();
    let minus = v0.iter().zip(v1).map(|(a, b)| (a - b) * FRAC_1_SQRT_2).collect();
    (plus, minus)
}

/// Parameters of the rank-1 kicked map `U0 exp(-i lambda |v><v|)`.
#[derive(Clone, Debug)]
pub struct RankOneMapParams {
    pub u0: ComplexMatrix,
    pub v: Vec<Complex64>,
    pub lambda: f64,
}

/// A validated `(U0, |v>)` pair, evaluated at any kick strength.
#[derive(Clone, Debug)]
pub struct RankOneFamily {
    u0: ComplexMatrix,
    v: Vec<Complex64>,
}

impl RankOneFamily {
    /// Checks that `U0` is a nondegenerate unitary, `|v>` is a unit vector
    /// and `|v>` has an overlap strictly between 0 and 1 with every
    /// eigenvector of `U0`.
    pub fn new(u0: ComplexMatrix, v: Vec<Complex64>) -> Result<Self> {
        if v.len() != u0.dim() {
            return Err(Error::DimensionMismatch {
                expected: u0.dim(),
                found: v.len(),
            });
        }
        let nv = norm(&v);
        if (nv - 1.0).abs() > 1e-10 {
            return Err(Error::NotUnit { norm: nv });
        }
        let spectrum = eig_unitary(&u0, 1e-10)?;
        for ev in &spectrum.eigenvectors {
            let overlap = inner(ev, &v).norm_sqr();
            if overlap <= EIGENVECTOR_MARGIN || overlap >= 1.0 - EIGENVECTOR_MARGIN {
                return Err(Error::VectorIsEigenvector { overlap });
            }
        }
        Ok(Self { u0, v })
    }

    pub fn dim(&self) -> usize {
        self.u0.dim()
    }

    pub fn u0(&self) -> &ComplexMatrix {
        &self.u0
    }

    pub fn v(&self) -> &[Complex64] {
        &self.v
    }

    /// `U0 (I + (e^{-i lambda} - 1) |v><v|)`.
    pub fn at(&self, lambda: f64) -> ComplexMatrix {
        if lambda == 0.0 {
            return self.u0.clone();
        }
        let kick = Complex64::from_polar(1.0, -lambda) - 1.0;
        let factor = &ComplexMatrix::identity(self.dim()) + &ComplexMatrix::outer(&self.v, &self.v).scale(kick);
        &self.u0 * &factor
    }
}

pub fn rank_one_map(params: &RankOneMapParams) -> Result<ComplexMatrix> {
    let family = RankOneFamily::new(params.u0.clone(), params.v.clone())?;
    Ok(family.at(params.lambda))
}
