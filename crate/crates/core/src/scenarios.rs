//! Named scenarios reproducing the model systems end to end, with
//! machine-readable reports and CSV data dumps.

use std::f64::consts::{PI, TAU};
use std::io::{self, Write};
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::Error;
use crate::geometry::{bloch_of_projector, field_dump, write_field_csv, FieldMode, FieldSample, GridSpec};
use crate::holonomy::{
    director_loop, lift_from_start, monodromy, nonadiabatic_trajectory, rp2_class, winding_number, LiftOptions,
    LiftedPath, ParameterCycle, Permutation,
};
use crate::matrix::{eig_unitary, inner, normalized, ComplexMatrix};
use crate::models::{kicked_spin_at, nonadiabatic_eigvecs, nonadiabatic_floquet, plus_minus_frame, RankOneFamily};

/// Minimum circular gap between the eigenphases of a random `U0`.
pub const NLEVEL_MIN_PHASE_GAP: f64 = 0.3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Tolerances {
    pub gap_tol: f64,
    pub overlap_min: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        let d = LiftOptions::default();
        Self {
            gap_tol: d.gap_tol,
            overlap_min: d.overlap_min,
        }
    }
}

impl Tolerances {
    pub fn lift_options(&self) -> LiftOptions {
        LiftOptions {
            gap_tol: self.gap_tol,
            overlap_min: self.overlap_min,
            ..LiftOptions::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NonadiabaticFrame {
    /// `(|+>, |->)`, the frame that is exchanged.
    Plus,
    /// `(|0>, |1>)`, the Floquet eigenframe.
    Eigen,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum Scenario {
    /// Circle in the `(B_x, B_y)` plane of the kicked spin; negative
    /// `turns` run clockwise.
    KickedSpin {
        radius: f64,
        center: [f64; 2],
        turns: i32,
        steps: usize,
    },
    /// Kick strength of a random rank-1 map run over `[0, 2pi]`, `repeat` times.
    Nlevel {
        n: usize,
        seed: u64,
        steps: usize,
        repeat: usize,
    },
    /// One period of the nonadiabatic kicked spin.
    Nonadiabatic {
        b: f64,
        steps: usize,
        frame: NonadiabaticFrame,
    },
    FieldDump {
        bx_min: f64,
        bx_max: f64,
        by_min: f64,
        by_max: f64,
        nx: usize,
        ny: usize,
        mode: FieldModeName,
        seed_vector: [f64; 3],
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldModeName {
    Bloch,
    Director,
}

impl From<FieldModeName> for FieldMode {
    fn from(m: FieldModeName) -> Self {
        match m {
            FieldModeName::Bloch => FieldMode::Bloch,
            FieldModeName::Director => FieldMode::Director,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScenarioConfig {
    #[serde(flatten)]
    pub scenario: Scenario,
    pub tolerances: Tolerances,
}

impl ScenarioConfig {
    pub fn new(scenario: Scenario) -> Self {
        Self {
            scenario,
            tolerances: Tolerances::default(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self.scenario {
            Scenario::KickedSpin { .. } => "kicked-spin",
            Scenario::Nlevel { .. } => "nlevel",
            Scenario::Nonadiabatic { .. } => "nonadiabatic",
            Scenario::FieldDump { .. } => "field-dump",
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        let t = &self.tolerances;
        if !(t.gap_tol > 0.0) {
            return Err(format!("gap-tol must be positive, got {}", t.gap_tol));
        }
        if !(t.overlap_min > 0.5 && t.overlap_min < 1.0) {
            return Err(format!("overlap-min must lie in (0.5, 1), got {}", t.overlap_min));
        }
        match &self.scenario {
            Scenario::KickedSpin {
                radius, center, steps, ..
            } => {
                if !(radius.is_finite() && *radius >= 0.0) || !center.iter().all(|c| c.is_finite()) {
                    return Err("radius and center must be finite, radius nonnegative".into());
                }
                check_steps(*steps)
            }
            Scenario::Nlevel { n, steps, repeat, .. } => {
                if *n < 2 {
                    return Err(format!("n must be at least 2, got {n}"));
                }
                if *n as f64 * NLEVEL_MIN_PHASE_GAP >= TAU {
                    return Err(format!(
                        "n = {n} leaves no room for eigenphase gaps of {NLEVEL_MIN_PHASE_GAP}"
                    ));
                }
                if *repeat < 1 {
                    return Err("repeat must be at least 1".into());
                }
                check_steps(*steps)
            }
            Scenario::Nonadiabatic { b, steps, .. } => {
                if !(*b >= 0.0 && *b < PI) {
                    return Err(format!("b must lie in [0, pi), got {b}"));
                }
                check_steps(*steps)
            }
            Scenario::FieldDump {
                bx_min,
                bx_max,
                by_min,
                by_max,
                nx,
                ny,
                seed_vector,
                ..
            } => {
                if *nx < 2 || *ny < 2 {
                    return Err(format!("grid resolution must be at least 2x2, got {nx}x{ny}"));
                }
                if ![bx_min, bx_max, by_min, by_max].iter().all(|x| x.is_finite()) {
                    return Err("grid bounds must be finite".into());
                }
                let norm = seed_vector.iter().map(|x| x * x).sum::<f64>().sqrt();
                if !(norm > 0.0 && norm.is_finite()) {
                    return Err("seed vector must be nonzero".into());
                }
                Ok(())
            }
        }
    }
}

fn check_steps(steps: usize) -> Result<(), String> {
    if steps < 16 {
        Err(format!("steps must be at least 16, got {steps}"))
    } else {
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErrorReport {
    pub code: String,
    pub message: String,
}

/// Outcome of a scenario; key order is part of the output format.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScenarioReport {
    pub scenario: Value,
    pub permutation: Option<Vec<usize>>,
    pub cycle_notation: Option<String>,
    pub winding: Option<i64>,
    pub rp2_class: Option<u8>,
    pub min_gap: Option<f64>,
    pub open: Option<bool>,
    pub samples_used: Option<usize>,
    pub duration_ms: f64,
    pub error: Option<ErrorReport>,
}

impl ScenarioReport {
    fn empty(config: &ScenarioConfig) -> Self {
        Self {
            scenario: serde_json::to_value(config).expect("config serializes"),
            permutation: None,
            cycle_notation: None,
            winding: None,
            rp2_class: None,
            min_gap: None,
            open: None,
            samples_used: None,
            duration_ms: 0.0,
            error: None,
        }
    }

    fn set_permutation(&mut self, p: &Permutation) {
        self.permutation = Some(p.mapping().to_vec());
        self.cycle_notation = Some(p.cycle_notation());
        self.open = Some(!p.is_identity());
    }

    /// 0 on success, 1 for configuration errors, 2 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match &self.error {
            None => 0,
            Some(e) if e.code == "invalid_config" => 1,
            Some(_) => 2,
        }
    }

    /// JSON with the timing field zeroed, for reproducibility checks.
    pub fn canonical_json(&self) -> String {
        let mut copy = self.clone();
        copy.duration_ms = 0.0;
        serde_json::to_string(&copy).expect("report serializes")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Per-sample data behind a report.
#[derive(Clone, Debug, PartialEq)]
pub enum ScenarioData {
    Trajectory { header: Vec<String>, rows: Vec<Vec<f64>> },
    Field { samples: Vec<FieldSample> },
}

impl ScenarioData {
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        match self {
            ScenarioData::Field { samples } => write_field_csv(samples, w),
            ScenarioData::Trajectory { header, rows } => {
                writeln!(w, "{}", header.join(","))?;
                for row in rows {
                    let cells: Vec<String> = row.iter().map(|x| format!("{x:.16e}")).collect();
                    writeln!(w, "{}", cells.join(","))?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct ScenarioOutput {
    pub report: ScenarioReport,
    pub data: Option<ScenarioData>,
}

/// Runs a scenario. Failures are recorded in the report rather than returned.
pub fn run_scenario(config: &ScenarioConfig) -> ScenarioOutput {
    let started = Instant::now();
    let mut report = ScenarioReport::empty(config);
    let data = match config.validate() {
        Err(message) => {
            report.error = Some(ErrorReport {
                code: "invalid_config".into(),
                message,
            });
            None
        }
        Ok(()) => {
            let result = match &config.scenario {
                Scenario::KickedSpin { .. } => run_kicked_spin(config, &mut report),
                Scenario::Nlevel { .. } => run_nlevel(config, &mut report),
                Scenario::Nonadiabatic { .. } => run_nonadiabatic(config, &mut report),
                Scenario::FieldDump { .. } => Ok(run_field_dump(config, &mut report)),
            };
            match result {
                Ok(data) => Some(data),
                Err(e) => {
                    // no partial results alongside an error
                    let scenario = report.scenario.clone();
                    report = ScenarioReport::empty(config);
                    report.scenario = scenario;
                    report.error = Some(ErrorReport {
                        code: e.code().into(),
                        message: e.to_string(),
                    });
                    None
                }
            }
        }
    };
    report.duration_ms = started.elapsed().as_secs_f64() * 1e3;
    ScenarioOutput { report, data }
}

/// Sample points of a circle traversed `turns` times (closed exactly).
pub fn circle_samples(center: [f64; 2], radius: f64, turns: i32, steps: usize) -> Vec<[f64; 2]> {
    let mut pts: Vec<[f64; 2]> = (0..=steps)
        .map(|k| {
            let t = TAU * turns as f64 * k as f64 / steps as f64;
            [center[0] + radius * t.cos(), center[1] + radius * t.sin()]
        })
        .collect();
    pts[steps] = pts[0];
    pts
}

pub fn kicked_spin_cycle(samples: Vec<[f64; 2]>, orientation: &str) -> crate::Result<ParameterCycle<[f64; 2]>> {
    ParameterCycle::new(|p: &[f64; 2]| kicked_spin_at(p[0], p[1]), samples, orientation)
}

fn bloch_rows(lifted: &LiftedPath<[f64; 2]>) -> crate::Result<Vec<Vec<f64>>> {
    lifted
        .frames
        .iter()
        .zip(&lifted.refined_samples)
        .map(|(f, p)| {
            let a = bloch_of_projector(&f.projectors()[0])?.components();
            Ok(vec![p[0], p[1], a[0], a[1], a[2]])
        })
        .collect()
}

fn run_kicked_spin(config: &ScenarioConfig, report: &mut ScenarioReport) -> crate::Result<ScenarioData> {
    let Scenario::KickedSpin {
        radius,
        center,
        turns,
        steps,
    } = config.scenario
    else {
        unreachable!()
    };
    let samples = circle_samples(center, radius, turns, steps);
    let orientation = if turns >= 0 { "counterclockwise" } else { "clockwise" };
    let cycle = kicked_spin_cycle(samples.clone(), orientation)?;
    let lifted = lift_from_start(&cycle, &config.tolerances.lift_options())?;
    let sigma = monodromy(&lifted, lifted.initial_frame())?;
    report.set_permutation(&sigma);
    report.winding = Some(winding_number(&samples)?);
    report.rp2_class = Some(rp2_class(&director_loop(&lifted)?)?);
    report.min_gap = Some(lifted.min_gap);
    report.samples_used = Some(lifted.samples_used());
    Ok(ScenarioData::Trajectory {
        header: ["bx", "by", "ax", "ay", "az"].map(String::from).to_vec(),
        rows: bloch_rows(&lifted)?,
    })
}

/// Haar-random unitary from Gram-Schmidt on a complex Gaussian matrix.
fn random_unitary(n: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let mut columns: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    while columns.len() < n {
        let mut v: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        for q in &columns {
            let proj = inner(q, &v);
            for (x, y) in v.iter_mut().zip(q) {
                *x -= proj * y;
            }
        }
        let norm = crate::matrix::norm(&v);
        if norm > 1e-6 {
            columns.push(v.iter().map(|x| x / norm).collect());
        }
    }
    let entries: Vec<Complex64> = (0..n).flat_map(|i| columns.iter().map(move |c| c[i])).collect();
    ComplexMatrix::from_row_slice(n, &entries)
}

/// Sorted eigenphases drawn uniformly subject to a minimum circular gap.
fn random_gapped_phases(n: usize, min_gap: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let room = TAU - n as f64 * min_gap;
    let mut base: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() * room).collect();
    base.sort_by(f64::total_cmp);
    base.iter().enumerate().map(|(i, x)| x + i as f64 * min_gap).collect()
}

/// Seeded random rank-1 map: `U0 = W diag(e^{-i theta}) W^dagger` with
/// gapped `theta` and Haar `W`; `|v>` is redrawn until it is generic.
pub fn random_rank_one_family(n: usize, seed: u64) -> crate::Result<RankOneFamily> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phases = random_gapped_phases(n, NLEVEL_MIN_PHASE_GAP, &mut rng);
    let w = random_unitary(n, &mut rng);
    let d = ComplexMatrix::diagonal(
        &phases
            .iter()
            .map(|&t| Complex64::from_polar(1.0, -t))
            .collect::<Vec<_>>(),
    );
    let u0 = &(&w * &d) * &w.adjoint();
    loop {
        let raw: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        match RankOneFamily::new(u0.clone(), normalized(&raw)) {
            Ok(family) => return Ok(family),
            Err(Error::VectorIsEigenvector { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
}

/// Kick strength from 0 to `2 pi repeat` in `steps * repeat` steps.
pub fn lambda_cycle(family: RankOneFamily, steps: usize, repeat: usize) -> crate::Result<ParameterCycle<f64>> {
    let total = steps * repeat;
    let samples = (0..=total)
        .map(|k| TAU * repeat as f64 * k as f64 / total as f64)
        .collect();
    ParameterCycle::new(move |lambda: &f64| Ok(family.at(*lambda)), samples, "increasing lambda")
}

fn run_nlevel(config: &ScenarioConfig, report: &mut ScenarioReport) -> crate::Result<ScenarioData> {
    let Scenario::Nlevel { n, seed, steps, repeat } = config.scenario else {
        unreachable!()
    };
    let family = random_rank_one_family(n, seed)?;
    let cycle = lambda_cycle(family, steps, repeat)?;
    let lifted = lift_from_start(&cycle, &config.tolerances.lift_options())?;
    let sigma = monodromy(&lifted, lifted.initial_frame())?;
    report.set_permutation(&sigma);
    // the kick strength lives on a circle; the loop winds once per repetition
    report.winding = Some(repeat as i64);
    if n == 2 {
        report.rp2_class = Some(rp2_class(&director_loop(&lifted)?)?);
    }
    report.min_gap = Some(lifted.min_gap);
    report.samples_used = Some(lifted.samples_used());

    let mut header = vec!["lambda".to_string()];
    header.extend((0..n).map(|i| format!("theta_{i}")));
    let rows = lifted
        .frames
        .iter()
        .zip(&lifted.refined_samples)
        .map(|(f, lambda)| {
            let mut row = vec![*lambda];
            row.extend_from_slice(f.eigenphases().expect("lifted frames carry eigenphases"));
            row
        })
        .collect();
    Ok(ScenarioData::Trajectory { header, rows })
}

fn run_nonadiabatic(config: &ScenarioConfig, report: &mut ScenarioReport) -> crate::Result<ScenarioData> {
    let Scenario::Nonadiabatic { b, steps, frame } = config.scenario else {
        unreachable!()
    };
    let (k0, k1) = nonadiabatic_eigvecs(b);
    let (v0, v1) = match frame {
        NonadiabaticFrame::Eigen => (k0, k1),
        NonadiabaticFrame::Plus => plus_minus_frame(&k0, &k1),
    };
    let traj = nonadiabatic_trajectory(b, &v0, &v1, steps.div_ceil(2))?;
    report.set_permutation(&traj.permutation);
    report.rp2_class = Some(rp2_class(&traj.directors)?);
    report.min_gap = Some(eig_unitary(&nonadiabatic_floquet(b), 1e-10)?.min_gap());
    report.samples_used = Some(traj.progress.len());
    let rows = traj
        .progress
        .iter()
        .zip(&traj.bloch)
        .zip(&traj.directors)
        .map(|((s, a), d)| {
            let n = d.axis().expect("two-level directors");
            vec![*s, a[0], a[1], a[2], n[0], n[1], n[2]]
        })
        .collect();
    Ok(ScenarioData::Trajectory {
        header: ["s", "ax", "ay", "az", "nx", "ny", "nz"].map(String::from).to_vec(),
        rows,
    })
}

fn field_grid(config: &ScenarioConfig) -> (GridSpec, FieldMode, [f64; 3]) {
    let Scenario::FieldDump {
        bx_min,
        bx_max,
        by_min,
        by_max,
        nx,
        ny,
        mode,
        seed_vector,
    } = config.scenario
    else {
        unreachable!()
    };
    let grid = GridSpec {
        bx_min,
        bx_max,
        by_min,
        by_max,
        nx,
        ny,
    };
    (grid, mode.into(), seed_vector)
}

fn run_field_dump(config: &ScenarioConfig, report: &mut ScenarioReport) -> ScenarioData {
    let (grid, mode, seed) = field_grid(config);
    let samples = field_dump(&grid, mode, seed);
    report.samples_used = Some(samples.len());
    ScenarioData::Field { samples }
}

/// Sidecar metadata for a field dump: grid, mode, seed and the flagged points.
pub fn field_sidecar(config: &ScenarioConfig, samples: &[FieldSample]) -> Value {
    let (grid, mode, seed) = field_grid(config);
    let degenerate: Vec<[f64; 2]> = samples
        .iter()
        .filter(|s| s.degenerate())
        .map(|s| [s.bx, s.by])
        .collect();
    json!({
        "grid": {
            "bx_min": grid.bx_min,
            "bx_max": grid.bx_max,
            "by_min": grid.by_min,
            "by_max": grid.by_max,
            "nx": grid.nx,
            "ny": grid.ny,
        },
        "mode": mode.as_str(),
        "seed_vector": seed,
        "degenerate_points": degenerate,
    })
}
