use std::f64::consts::{FRAC_PI_2, TAU};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{director_of_frame, dot3, Director};

use super::lift::{LiftedPath, CLOSURE_TOL};

/// Points closer than this to the origin are rejected by [`winding_number`].
pub const ORIGIN_CLEARANCE: f64 = 1e-9;

/// Consecutive directors must satisfy `|n_i . n_{i+1}| >` this.
pub const DIRECTOR_DENSITY: f64 = 0.9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InvariantKind {
    PlanarWinding,
    Rp2Class,
}

/// Homotopy class of a loop: its winding number around the defect, or
/// its class in `pi_1(RP^2) = Z_2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct HomotopyInvariant {
    pub kind: InvariantKind,
    pub value: i64,
}

impl HomotopyInvariant {
    pub fn winding(points: &[[f64; 2]]) -> Result<Self> {
        Ok(Self {
            kind: InvariantKind::PlanarWinding,
            value: winding_number(points)?,
        })
    }

    pub fn rp2(directors: &[Director]) -> Result<Self> {
        Ok(Self {
            kind: InvariantKind::Rp2Class,
            value: i64::from(rp2_class(directors)?),
        })
    }

    /// Parity that decides the two-level monodromy.
    pub fn parity(&self) -> u8 {
        (self.value.rem_euclid(2)) as u8
    }
}

/// Signed number of turns of a closed planar loop around the origin.
///
/// Accumulates principal-branch angle increments; every increment must be
/// below `pi/2` in magnitude so the branch choice is unambiguous.
pub fn winding_number(points: &[[f64; 2]]) -> Result<i64> {
    if points.len() < 2 {
        return Err(Error::InvalidCycle("loop needs at least two points".into()));
    }
    let (first, last) = (points[0], points[points.len() - 1]);
    let mismatch = (first[0] - last[0]).hypot(first[1] - last[1]);
    if mismatch > CLOSURE_TOL {
        return Err(Error::NotClosed { mismatch });
    }
    if points.iter().any(|p| p[0].hypot(p[1]) <= ORIGIN_CLEARANCE) {
        return Err(Error::PassesThroughOrigin);
    }
    let mut total = 0.0;
    for (index, w) in points.windows(2).enumerate() {
        let (p, q) = (w[0], w[1]);
        let cross = p[0] * q[1] - p[1] * q[0];
        let dot = p[0] * q[0] + p[1] * q[1];
        let step = cross.atan2(dot);
        if step.abs() >= FRAC_PI_2 {
            return Err(Error::UndersampledLoop { index });
        }
        total += step;
    }
    let turns = total / TAU;
    let rounded = turns.round();
    // closed loops give an integer up to rounding noise
    debug_assert!((turns - rounded).abs() < 1e-6, "winding residual {}", turns - rounded);
    Ok(rounded as i64)
}

/// Class of a closed director loop in `pi_1(RP^2)`: 0 if its lift to the
/// sphere closes, 1 if the lift ends at the antipode of its start.
pub fn rp2_class(directors: &[Director]) -> Result<u8> {
    let axes: Vec<[f64; 3]> = directors
        .iter()
        .map(|d| d.axis().ok_or(Error::DimensionMismatch { expected: 2, found: 0 }))
        .collect::<Result<_>>()?;
    let Some((&start, _)) = axes.split_first() else {
        return Err(Error::InvalidCycle("empty director loop".into()));
    };
    let end = axes[axes.len() - 1];
    if !Director::Axis(start).approx_eq(&Director::Axis(end), 1e-9) {
        let mismatch = (0..3).map(|k| (start[k] - end[k]).abs()).fold(0.0, f64::max);
        return Err(Error::NotClosed { mismatch });
    }

    let mut lifted = start;
    for (index, w) in axes.windows(2).enumerate() {
        let d = dot3(&w[0], &w[1]);
        if !(d.abs() > DIRECTOR_DENSITY) {
            return Err(Error::UndersampledLoop { index });
        }
        let next = if dot3(&lifted, &w[1]) < 0.0 {
            w[1].map(|x| -x)
        } else {
            w[1]
        };
        lifted = next;
    }
    let closes = (0..3).all(|k| (lifted[k] - start[k]).abs() <= 1e-6);
    let flips = (0..3).all(|k| (lifted[k] + start[k]).abs() <= 1e-6);
    match (closes, flips) {
        (true, _) => Ok(0),
        (_, true) => Ok(1),
        _ => Err(Error::NotClosed {
            mismatch: (0..3).map(|k| (lifted[k] - start[k]).abs()).fold(0.0, f64::max),
        }),
    }
}

/// Directors of every frame of a lifted path.
pub fn director_loop<P>(lifted: &LiftedPath<P>) -> Result<Vec<Director>> {
    lifted.frames.iter().map(director_of_frame).collect()
}
