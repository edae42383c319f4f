//! Continuation of eigenprojector frames along closed parameter cycles.
//!
//! A frame at one sample is carried to the next by maximum-overlap matching
//! of its projectors. Steps that fail the overlap threshold, whose matched
//! quasienergies jump by more than half the local gap, or across which the
//! operator itself jumps, are bisected until they pass. Slot `i` of every lifted frame holds the continuation of
//! slot `i` of the initial frame, so the final frame is a permutation of the
//! initial one and that permutation is the monodromy of the cycle.

use std::fmt::Debug;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{OrderedProjectorFrame, Projector};
use crate::matrix::{circular_distance, eig_unitary, eig_unitary_with_gap, ComplexMatrix, SpectralData};

use super::permutation::Permutation;

/// Tolerance for "same projector" when comparing frames at the basepoint.
pub const FRAME_MATCH_TOL: f64 = 1e-6;

/// Tolerance for closedness of a cycle.
pub const CLOSURE_TOL: f64 = 1e-12;

/// A point of a parameter space that can be bisected.
pub trait ParameterPoint: Clone + Debug + Send + Sync {
    fn midpoint(&self, other: &Self) -> Self;
    fn distance(&self, other: &Self) -> f64;
}

impl ParameterPoint for f64 {
    fn midpoint(&self, other: &Self) -> Self {
        0.5 * (self + other)
    }

    fn distance(&self, other: &Self) -> f64 {
        (self - other).abs()
    }
}

impl ParameterPoint for [f64; 2] {
    fn midpoint(&self, other: &Self) -> Self {
        [0.5 * (self[0] + other[0]), 0.5 * (self[1] + other[1])]
    }

    fn distance(&self, other: &Self) -> f64 {
        (self[0] - other[0]).hypot(self[1] - other[1])
    }
}

pub type Generator<P> = Arc<dyn Fn(&P) -> Result<ComplexMatrix> + Send + Sync>;

/// A closed, sampled path through a family of unitaries.
#[derive(Clone)]
pub struct ParameterCycle<P: ParameterPoint> {
    generator: Generator<P>,
    samples: Vec<P>,
    orientation: String,
}

impl<P: ParameterPoint> Debug for ParameterCycle<P> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ParameterCycle")
            .field("samples", &self.samples.len())
            .field("orientation", &self.orientation)
            .finish()
    }
}

impl<P: ParameterPoint> ParameterCycle<P> {
    /// Needs at least three samples; the endpoints must coincide, either as
    /// parameter points or (for periodic parameters such as a kick
    /// strength running over `[0, 2pi]`) as operators, within
    /// [`CLOSURE_TOL`].
    pub fn new<F>(generator: F, samples: Vec<P>, orientation: impl Into<String>) -> Result<Self>
    where
        F: Fn(&P) -> Result<ComplexMatrix> + Send + Sync + 'static,
    {
        Self::from_shared(Arc::new(generator), samples, orientation.into())
    }

    pub fn from_shared(generator: Generator<P>, samples: Vec<P>, orientation: String) -> Result<Self> {
        if samples.len() < 3 {
            return Err(Error::InvalidCycle(format!(
                "need at least 3 samples, got {}",
                samples.len()
            )));
        }
        let (first, last) = (&samples[0], &samples[samples.len() - 1]);
        if first.distance(last) > CLOSURE_TOL {
            let gap = generator(first)?.distance(&generator(last)?);
            if !(gap <= CLOSURE_TOL) {
                return Err(Error::NotClosed { mismatch: gap });
            }
        }
        Ok(Self {
            generator,
            samples,
            orientation,
        })
    }

    pub fn samples(&self) -> &[P] {
        &self.samples
    }

    pub fn orientation(&self) -> &str {
        &self.orientation
    }

    pub fn generator(&self) -> &Generator<P> {
        &self.generator
    }

    pub fn evaluate(&self, p: &P) -> Result<ComplexMatrix> {
        (self.generator)(p)
    }

    /// `self` followed by `other`, which must start where `self` ends and
    /// be drawn from the same family (the generator of `self` is kept).
    pub fn then(&self, other: &Self) -> Result<Self> {
        let end = self.evaluate(&self.samples[self.samples.len() - 1])?;
        let start = self.evaluate(&other.samples[0])?;
        let mismatch = end.distance(&start);
        if !(mismatch <= CLOSURE_TOL) {
            return Err(Error::InvalidCycle(format!(
                "loops do not share a basepoint (operator mismatch {mismatch:.3e})"
            )));
        }
        let mut samples = self.samples.clone();
        samples.extend(other.samples[1..].iter().cloned());
        Ok(Self {
            generator: self.generator.clone(),
            samples,
            orientation: format!("{} then {}", self.orientation, other.orientation),
        })
    }

    /// The cycle traversed `times` times in a row.
    pub fn repeated(&self, times: usize) -> Result<Self> {
        assert!(times >= 1);
        (1..times).try_fold(self.clone(), |acc, _| acc.then(self))
    }

    /// Same path with a midpoint inserted into every step (half the base step).
    pub fn halved_step(&self) -> Self {
        let mut samples = Vec::with_capacity(2 * self.samples.len() - 1);
        for w in self.samples.windows(2) {
            samples.push(w[0].clone());
            samples.push(w[0].midpoint(&w[1]));
        }
        samples.push(self.samples[self.samples.len() - 1].clone());
        Self {
            generator: self.generator.clone(),
            samples,
            orientation: self.orientation.clone(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LiftOptions {
    /// Minimum accepted overlap `tr(P_i(t) P_j(t'))` between matched projectors.
    pub overlap_min: f64,
    /// Smallest circular quasienergy gap tolerated at an accepted sample.
    pub gap_tol: f64,
    /// Maximum number of halvings of a single base step.
    pub max_depth: usize,
    /// Unitarity and residual tolerance handed to the eigensolver.
    pub eig_tol: f64,
    /// Largest entrywise change of the operator accepted across one step;
    /// larger jumps are bisected, which closes in on singular points.
    pub max_operator_step: f64,
}

impl Default for LiftOptions {
    fn default() -> Self {
        Self {
            overlap_min: 0.99,
            gap_tol: 1e-6,
            max_depth: 40,
            eig_tol: 1e-10,
            max_operator_step: 0.25,
        }
    }
}

impl LiftOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.overlap_min > 0.5 && self.overlap_min < 1.0) {
            return Err(Error::InvalidOptions(format!(
                "overlap_min must lie in (0.5, 1), got {}",
                self.overlap_min
            )));
        }
        if !(self.gap_tol > 0.0) || !(self.eig_tol > 0.0) || !(self.max_operator_step > 0.0) {
            return Err(Error::InvalidOptions("tolerances must be positive".into()));
        }
        Ok(())
    }
}

/// A frame continued along a cycle.
#[derive(Clone, Debug)]
pub struct LiftedPath<P> {
    /// One frame per accepted sample, in the initial frame's slot order.
    pub frames: Vec<OrderedProjectorFrame>,
    /// Parameter points actually used, including refinement midpoints.
    pub refined_samples: Vec<P>,
    /// Smallest circular quasienergy gap seen at an accepted sample.
    pub min_gap: f64,
    /// True iff the final frame is a nontrivial reordering of the initial one.
    pub open: bool,
}

impl<P> LiftedPath<P> {
    pub fn initial_frame(&self) -> &OrderedProjectorFrame {
        &self.frames[0]
    }

    pub fn final_frame(&self) -> &OrderedProjectorFrame {
        &self.frames[self.frames.len() - 1]
    }

    pub fn samples_used(&self) -> usize {
        self.refined_samples.len()
    }
}

enum Step {
    Accepted(OrderedProjectorFrame, f64),
    Refine,
}

fn spectrum_at<P: ParameterPoint>(
    cycle: &ParameterCycle<P>,
    p: &P,
    opts: &LiftOptions,
) -> Result<(ComplexMatrix, SpectralData)> {
    let encountered = |gap: f64| Error::DegeneracyEncountered {
        sample: format!("{p:?}"),
        gap,
        gap_tol: opts.gap_tol,
    };
    let u = cycle.evaluate(p).map_err(|e| match e {
        Error::DegeneratePoint { sin_half_gap } => encountered(sin_half_gap),
        other => other,
    })?;
    let sd = eig_unitary_with_gap(&u, opts.eig_tol, opts.gap_tol).map_err(|e| match e {
        Error::DegenerateSpectrum { gap, .. } => encountered(gap),
        other => other,
    })?;
    Ok((u, sd))
}

/// Matches `prev` (in transported order) against the eigenframe at the
/// next sample.
fn match_step(prev: &OrderedProjectorFrame, prev_gap: f64, next: &SpectralData, opts: &LiftOptions) -> Result<Step> {
    let n = prev.len();
    let candidates: Vec<Projector> = next
        .projectors
        .iter()
        .map(|m| Projector::from_matrix_unchecked(m.clone()))
        .collect();
    let mut assignment = Vec::with_capacity(n);
    for p in prev.projectors() {
        let (j, best) = candidates
            .iter()
            .enumerate()
            .map(|(j, q)| (j, p.overlap(q)))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("frames are non-empty");
        if !(best >= opts.overlap_min) {
            return Ok(Step::Refine);
        }
        assignment.push(j);
    }
    let mut used = vec![false; n];
    for &j in &assignment {
        if used[j] {
            return Err(Error::MatchingAmbiguous);
        }
        used[j] = true;
    }
    // matched quasienergies must move by less than half the local gap
    let next_gap = next.min_gap();
    if let Some(prev_phases) = prev.eigenphases() {
        let allowed = 0.5 * prev_gap.min(next_gap);
        let jumped = prev_phases
            .iter()
            .zip(&assignment)
            .any(|(&t, &j)| circular_distance(t, next.eigenphases[j]) >= allowed);
        if jumped {
            return Ok(Step::Refine);
        }
    }
    let frame = OrderedProjectorFrame::from_parts_unchecked(
        assignment.iter().map(|&j| candidates[j].clone()).collect(),
        Some(assignment.iter().map(|&j| next.eigenphases[j]).collect()),
    );
    Ok(Step::Accepted(frame, next_gap))
}

/// Lifts `cycle` into frame space starting from `initial`, which must agree
/// as a set with the eigenframe at the first sample.
pub fn lift_cycle<P: ParameterPoint>(
    cycle: &ParameterCycle<P>,
    initial: &OrderedProjectorFrame,
    opts: &LiftOptions,
) -> Result<LiftedPath<P>> {
    opts.validate()?;
    let start = &cycle.samples[0];
    let (u0, sd0) = spectrum_at(cycle, start, opts)?;
    let frame0 = OrderedProjectorFrame::from_spectral(&sd0)?;
    let order = initial
        .match_as_set(&frame0, FRAME_MATCH_TOL)
        .ok_or(Error::SetMismatch {
            mismatch: initial.distance(&frame0),
        })?;
    let mut current = frame0.reordered(&order);
    let mut current_gap = sd0.min_gap();
    let mut current_point = start.clone();
    let mut current_u = u0;

    let mut frames = vec![current.clone()];
    let mut refined_samples = vec![start.clone()];
    let mut min_gap = current_gap;

    for target in &cycle.samples[1..] {
        // pending targets, nearest last
        let mut stack: Vec<(P, usize)> = vec![(target.clone(), 0)];
        while let Some((goal, depth)) = stack.pop() {
            let (u, sd) = spectrum_at(cycle, &goal, opts)?;
            let step = if u.distance(&current_u) > opts.max_operator_step {
                Step::Refine
            } else {
                match_step(&current, current_gap, &sd, opts)?
            };
            match step {
                Step::Accepted(frame, gap) => {
                    current_u = u;
                    min_gap = min_gap.min(gap);
                    current = frame;
                    current_gap = gap;
                    current_point = goal.clone();
                    frames.push(current.clone());
                    refined_samples.push(goal);
                }
                Step::Refine => {
                    if depth >= opts.max_depth {
                        return Err(Error::RefinementExhausted {
                            depth,
                            from: format!("{current_point:?}"),
                            to: format!("{goal:?}"),
                        });
                    }
                    let mid = current_point.midpoint(&goal);
                    stack.push((goal, depth + 1));
                    stack.push((mid, depth + 1));
                }
            }
        }
    }

    let first = &frames[0];
    let last = &frames[frames.len() - 1];
    let open = last.distance(first) > FRAME_MATCH_TOL && last.match_as_set(first, FRAME_MATCH_TOL).is_some();
    Ok(LiftedPath {
        frames,
        refined_samples,
        min_gap,
        open,
    })
}

/// Lift starting from the quasienergy-ordered eigenframe at the first sample.
pub fn lift_from_start<P: ParameterPoint>(cycle: &ParameterCycle<P>, opts: &LiftOptions) -> Result<LiftedPath<P>> {
    let (_, sd) = spectrum_at(cycle, &cycle.samples[0], opts)?;
    let initial = OrderedProjectorFrame::from_spectral(&sd)?;
    lift_cycle(cycle, &initial, opts)
}

/// Reads off `sigma` with `final[i] = initial[sigma(i)]`.
pub fn monodromy<P>(lifted: &LiftedPath<P>, initial: &OrderedProjectorFrame) -> Result<Permutation> {
    let last = lifted.final_frame();
    match last.match_as_set(initial, FRAME_MATCH_TOL) {
        Some(sigma) => Permutation::new(sigma),
        None => {
            // best-effort size of the mismatch for the error report
            let mismatch = last
                .projectors()
                .iter()
                .map(|p| {
                    initial
                        .projectors()
                        .iter()
                        .map(|q| p.distance(q))
                        .fold(f64::INFINITY, f64::min)
                })
                .fold(0.0, f64::max);
            Err(Error::SetMismatch { mismatch })
        }
    }
}

/// Smallest circular quasienergy gap over the cycle's samples.
pub fn min_gap<P: ParameterPoint>(cycle: &ParameterCycle<P>) -> Result<f64> {
    let mut gap = f64::INFINITY;
    for p in &cycle.samples {
        let u = cycle.evaluate(p).map_err(|e| match e {
            Error::DegeneratePoint { sin_half_gap } => Error::DegenerateSpectrum {
                gap: sin_half_gap,
                threshold: crate::matrix::DEFAULT_GAP_THRESHOLD,
            },
            other => other,
        })?;
        gap = gap.min(eig_unitary(&u, 1e-10)?.min_gap());
    }
    Ok(gap)
}
