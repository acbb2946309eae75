use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use stressopt_cli::{
    cmd_analyze, cmd_capacity, cmd_limit, cmd_verify, exit_code, AnalyzeArgs, CapacityArgs,
    LimitArgs, Report, VerifyArgs, EXIT_VALIDATION,
};
use stressopt_core::capacity::Method;
use stressopt_core::matnorm::NormPair;
use stressopt_core::mesh::{generate_bar, generate_rectangle, generate_tet_pair, write_mesh, Edge};
use stressopt_core::stress::Mode;
use stressopt_core::Error;

#[derive(Parser)]
#[command(name = "stressopt", version, about = "Optimal stress, stress concentration and limit analysis on simplex meshes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Elastic,
    Plastic,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Elastic => Mode::Elastic,
            ModeArg::Plastic => Mode::Plastic,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Exact,
    Heuristic,
}

#[derive(Clone, Copy, ValueEnum)]
enum EdgeArg {
    Left,
    Right,
    Bottom,
    Top,
}

impl From<EdgeArg> for Edge {
    fn from(e: EdgeArg) -> Self {
        match e {
            EdgeArg::Left => Edge::Left,
            EdgeArg::Right => Edge::Right,
            EdgeArg::Bottom => Edge::Bottom,
            EdgeArg::Top => Edge::Top,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Optimal stress for a mesh and traction, with its kinematic dual.
    Analyze {
        mesh: PathBuf,
        traction: PathBuf,
        #[arg(long, value_enum, default_value = "elastic")]
        mode: ModeArg,
        #[arg(long, default_value = "l1linf")]
        norm: String,
    },
    /// Stress concentration factor K and load capacity ratio C = 1/K.
    Capacity {
        mesh: PathBuf,
        #[arg(long, value_enum, default_value = "elastic")]
        mode: ModeArg,
        #[arg(long, default_value = "l1linf")]
        norm: String,
        /// Defaults to exact when the mesh is under the enumeration cap.
        #[arg(long, value_enum)]
        method: Option<MethodArg>,
    },
    /// Limit-analysis factor for a traction and yield stress.
    Limit {
        mesh: PathBuf,
        traction: PathBuf,
        #[arg(long)]
        y0: f64,
        #[arg(long, default_value = "l1linf")]
        norm: String,
    },
    /// Seeded invariant checks on a mesh.
    Verify {
        mesh: PathBuf,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value = "l1linf")]
        norm: String,
    },
    /// Writes a generated mesh file.
    #[command(subcommand)]
    Generate(Generate),
}

#[derive(Subcommand)]
enum Generate {
    Bar {
        out: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        length: f64,
        #[arg(long, default_value_t = 1.0)]
        area: f64,
        #[arg(long, default_value_t = 1)]
        elements: usize,
    },
    Rectangle {
        out: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        width: f64,
        #[arg(long, default_value_t = 1.0)]
        height: f64,
        #[arg(long, default_value_t = 1)]
        nx: usize,
        #[arg(long, default_value_t = 1)]
        ny: usize,
        #[arg(long, value_enum, default_value = "left")]
        support: EdgeArg,
        #[arg(long, value_enum, default_value = "right")]
        load: EdgeArg,
    },
    TetPair {
        out: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        size: f64,
    },
}

fn run(command: Command) -> Result<Report, Error> {
    match command {
        Command::Analyze {
            mesh,
            traction,
            mode,
            norm,
        } => cmd_analyze(&AnalyzeArgs {
            mesh,
            traction,
            mode: mode.into(),
            norm: norm.parse::<NormPair>()?,
        }),
        Command::Capacity {
            mesh,
            mode,
            norm,
            method,
        } => cmd_capacity(&CapacityArgs {
            mesh,
            mode: mode.into(),
            norm: norm.parse::<NormPair>()?,
            method: method.map(|m| match m {
                MethodArg::Exact => Method::ExactVertexEnumeration,
                MethodArg::Heuristic => Method::AlternatingHeuristic,
            }),
        }),
        Command::Limit {
            mesh,
            traction,
            y0,
            norm,
        } => cmd_limit(&LimitArgs {
            mesh,
            traction,
            y0,
            norm: norm.parse::<NormPair>()?,
        }),
        Command::Verify {
            mesh,
            seed,
            trials,
            norm,
        } => cmd_verify(&VerifyArgs {
            mesh,
            seed,
            trials,
            norm: norm.parse::<NormPair>()?,
        }),
        Command::Generate(g) => {
            let (mesh, out) = match g {
                Generate::Bar {
                    out,
                    length,
                    area,
                    elements,
                } => (generate_bar(length, area, elements)?, out),
                Generate::Rectangle {
                    out,
                    width,
                    height,
                    nx,
                    ny,
                    support,
                    load,
                } => (
                    generate_rectangle(width, height, nx, ny, support.into(), load.into())?,
                    out,
                ),
                Generate::TetPair { out, size } => (generate_tet_pair(size)?, out),
            };
            write_mesh(&mesh, &out)?;
            Ok(Report {
                json: String::new(),
                summary: format!("wrote {}", out.display()),
                exit_code: 0,
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let code = match run(cli.command) {
        Ok(report) => {
            if !report.json.is_empty() {
                println!("{}", report.json);
            }
            eprintln!("{}", report.summary);
            report.exit_code
        }
        Err(err) => {
            eprintln!("error: {err}");
            exit_code(&err)
        }
    };
    eprintln!("wall time: {:.3} s", start.elapsed().as_secs_f64());
    ExitCode::from(u8::try_from(code).unwrap_or(EXIT_VALIDATION as u8))
}
