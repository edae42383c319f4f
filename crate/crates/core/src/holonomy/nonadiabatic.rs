//! Director loops traced within one period of the nonadiabatic kicked spin.
//!
//! The period is sampled in two legs. The delta kick `exp(-i B sigma_y/2)`
//! is resolved as the rotation `exp(-i s B sigma_y/2)`, `s` in `[0, 1]`,
//! then the free evolution `exp(-i pi sigma_z t/2)`, `t` in `[0, 1]`, acts
//! on the kicked state. The end of the second leg is the Floquet operator,
//! so the traced director loop is closed whenever the frame is mapped onto
//! itself as a set.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{director_of_frame, Director, OrderedProjectorFrame, Projector};
use crate::matrix::ComplexMatrix;
use crate::models::{nonadiabatic_free, nonadiabatic_kick};

use super::lift::FRAME_MATCH_TOL;
use super::permutation::Permutation;

/// Propagator from the start of the period to progress `s` in `[0, 2]`
/// (kick leg on `[0, 1]`, free leg on `[1, 2]`).
pub fn nonadiabatic_propagator(b: f64, s: f64) -> ComplexMatrix {
    if s <= 1.0 {
        nonadiabatic_kick(b * s)
    } else {
        &nonadiabatic_free(s - 1.0) * &nonadiabatic_kick(b)
    }
}

#[derive(Clone, Debug)]
pub struct NonadiabaticTrajectory {
    /// Progress through the period, in `[0, 2]`.
    pub progress: Vec<f64>,
    /// Bloch vector of the evolved slot-0 state (continuous along the period).
    pub bloch: Vec<[f64; 3]>,
    pub directors: Vec<Director>,
    /// `sigma` with `F P_i F^dagger = P_sigma(i)`.
    pub permutation: Permutation,
}

fn bloch_of_state(v: &[Complex64]) -> [f64; 3] {
    let n2 = v[0].norm_sqr() + v[1].norm_sqr();
    let off = v[0].conj() * v[1];
    [
        2.0 * off.re / n2,
        2.0 * off.im / n2,
        (v[0].norm_sqr() - v[1].norm_sqr()) / n2,
    ]
}

/// Evolves the orthonormal pair `(v0, v1)` through one period, sampling
/// each leg with `steps_per_leg` steps.
pub fn nonadiabatic_trajectory(
    b: f64,
    v0: &[Complex64],
    v1: &[Complex64],
    steps_per_leg: usize,
) -> Result<NonadiabaticTrajectory> {
    if steps_per_leg == 0 {
        return Err(Error::InvalidOptions("steps_per_leg must be positive".into()));
    }
    let initial = OrderedProjectorFrame::new(vec![Projector::from_vector(v0), Projector::from_vector(v1)], None)?;
    let total = 2 * steps_per_leg;
    let mut progress = Vec::with_capacity(total + 1);
    let mut bloch = Vec::with_capacity(total + 1);
    let mut directors = Vec::with_capacity(total + 1);
    let mut last_frame = initial.clone();
    for k in 0..=total {
        let s = 2.0 * k as f64 / total as f64;
        let w = nonadiabatic_propagator(b, s);
        let (w0, w1) = (w.apply(v0), w.apply(v1));
        let frame = OrderedProjectorFrame::new(vec![Projector::from_vector(&w0), Projector::from_vector(&w1)], None)?;
        progress.push(s);
        bloch.push(bloch_of_state(&w0));
        directors.push(director_of_frame(&frame)?);
        last_frame = frame;
    }
    let sigma = last_frame
        .match_as_set(&initial, FRAME_MATCH_TOL)
        .ok_or(Error::SetMismatch {
            mismatch: last_frame.distance(&initial),
        })?;
    Ok(NonadiabaticTrajectory {
        progress,
        bloch,
        directors,
        permutation: Permutation::new(sigma)?,
    })
}
