use std::f64::consts::PI;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use anholonomy::scenarios::{
    field_sidecar, run_scenario, FieldModeName, NonadiabaticFrame, Scenario, ScenarioConfig, ScenarioData, Tolerances,
};

#[derive(Parser, Debug)]
#[command(name = "anholonomy", version, about = "Eigenspace anholonomy of Floquet systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug)]
struct Common {
    /// Smallest eigenphase gap tolerated along a cycle.
    #[arg(long, default_value_t = 1e-6, allow_negative_numbers = true)]
    gap_tol: f64,
    /// Overlap below which a step is bisected; must lie in (0.5, 1).
    #[arg(long, default_value_t = 0.99, allow_negative_numbers = true)]
    overlap_min: f64,
    /// Number of steps per traversal.
    #[arg(long)]
    steps: Option<usize>,
    /// Output file: the report for json, the sample data for csv.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// RNG seed for randomized scenarios.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Circular cycle in the (B_x, B_y) plane of the kicked spin.
    KickedSpin {
        #[arg(long, default_value_t = PI)]
        radius: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        cx: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        cy: f64,
        /// Signed number of turns; negative runs clockwise.
        #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
        turns: i32,
        #[command(flatten)]
        common: Common,
    },
    /// Random N-level rank-1 map driven over lambda in [0, 2 pi repeat].
    Nlevel {
        #[arg(long, default_value_t = 4)]
        n: usize,
        /// Number of lambda cycles traversed.
        #[arg(long, default_value_t = 1)]
        repeat: usize,
        #[command(flatten)]
        common: Common,
    },
    /// One period of the nonadiabatic kicked spin.
    Nonadiabatic {
        #[arg(long, default_value_t = PI / 3.0)]
        b: f64,
        #[arg(long, value_enum, default_value_t = FrameArg::Plus)]
        frame: FrameArg,
        #[command(flatten)]
        common: Common,
    },
    /// Bloch vector or director field of the kicked spin on a grid.
    FieldDump {
        #[arg(long, default_value_t = -1.5 * PI, allow_negative_numbers = true)]
        bx_min: f64,
        #[arg(long, default_value_t = 1.5 * PI, allow_negative_numbers = true)]
        bx_max: f64,
        #[arg(long, default_value_t = -1.5 * PI, allow_negative_numbers = true)]
        by_min: f64,
        #[arg(long, default_value_t = 1.5 * PI, allow_negative_numbers = true)]
        by_max: f64,
        #[arg(long, default_value_t = 41)]
        nx: usize,
        #[arg(long, default_value_t = 41)]
        ny: usize,
        #[arg(long, value_enum, default_value_t = ModeArg::Director)]
        mode: ModeArg,
        /// Sign reference for the first grid point, as `x,y,z`.
        #[arg(long, value_parser = parse_vec3, default_value = "1,0,0", allow_hyphen_values = true)]
        seed_vector: [f64; 3],
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum FrameArg {
    Plus,
    Eigen,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Bloch,
    Director,
}

fn parse_vec3(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}")))
        .collect::<Result<_, _>>()?;
    parts
        .try_into()
        .map_err(|v: Vec<f64>| format!("expected three comma-separated numbers, got {}", v.len()))
}

fn tolerances(common: &Common) -> Tolerances {
    Tolerances {
        gap_tol: common.gap_tol,
        overlap_min: common.overlap_min,
    }
}

fn build(command: Command) -> (ScenarioConfig, Common) {
    let (scenario, common) = match command {
        Command::KickedSpin {
            radius,
            cx,
            cy,
            turns,
            common,
        } => {
            let steps = common.steps.unwrap_or(2000 * turns.unsigned_abs().max(1) as usize);
            (
                Scenario::KickedSpin {
                    radius,
                    center: [cx, cy],
                    turns,
                    steps,
                },
                common,
            )
        }
        Command::Nlevel { n, repeat, common } => (
            Scenario::Nlevel {
                n,
                seed: common.seed,
                steps: common.steps.unwrap_or(4000),
                repeat,
            },
            common,
        ),
        Command::Nonadiabatic { b, frame, common } => (
            Scenario::Nonadiabatic {
                b,
                steps: common.steps.unwrap_or(400),
                frame: match frame {
                    FrameArg::Plus => NonadiabaticFrame::Plus,
                    FrameArg::Eigen => NonadiabaticFrame::Eigen,
                },
            },
            common,
        ),
        Command::FieldDump {
            bx_min,
            bx_max,
            by_min,
            by_max,
            nx,
            ny,
            mode,
            seed_vector,
            common,
        } => (
            Scenario::FieldDump {
                bx_min,
                bx_max,
                by_min,
                by_max,
                nx,
                ny,
                mode: match mode {
                    ModeArg::Bloch => FieldModeName::Bloch,
                    ModeArg::Director => FieldModeName::Director,
                },
                seed_vector,
            },
            common,
        ),
    };
    let config = ScenarioConfig {
        scenario,
        tolerances: tolerances(&common),
    };
    (config, common)
}

fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".json");
    PathBuf::from(name)
}

fn write_outputs(
    config: &ScenarioConfig,
    common: &Common,
    report_json: &str,
    data: Option<&ScenarioData>,
) -> io::Result<()> {
    let Some(out) = &common.out else {
        return Ok(());
    };
    match common.format {
        Format::Json => std::fs::write(out, format!("{report_json}\n")),
        Format::Csv => {
            let Some(data) = data else {
                return Ok(());
            };
            let mut w = BufWriter::new(File::create(out)?);
            data.write_csv(&mut w)?;
            w.flush()?;
            if let ScenarioData::Field { samples } = data {
                let sidecar =
                    serde_json::to_string_pretty(&field_sidecar(config, samples)).map_err(io::Error::other)?;
                std::fs::write(sidecar_path(out), format!("{sidecar}\n"))?;
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (config, common) = build(cli.command);
    let output = run_scenario(&config);
    let report_json = output.report.to_json_pretty();
    println!("{report_json}");
    if let Err(e) = write_outputs(&config, &common, &report_json, output.data.as_ref()) {
        eprintln!("error: cannot write output: {e}");
        return ExitCode::from(1);
    }
    ExitCode::from(output.report.exit_code() as u8)
}
