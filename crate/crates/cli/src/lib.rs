//! Command implementations behind the `stressopt` binary.
//!
//! Every command returns a [`Report`]: a JSON document for standard output
//! and a short human summary for standard error. Reports contain no
//! timestamps or timings, so identical inputs give identical bytes.

pub mod sample;
pub mod verify;

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};
use stressopt_core::capacity::{
    generalized_k_dual_check, kinematic_limit_check, limit_analysis, load_capacity,
    k_agrees, CapacityResult, LimitResult, Method, ENUMERATION_CAP,
};
use stressopt_core::kinematics::{assemble, DiscreteOperators, TractionField};
use stressopt_core::matnorm::NormPair;
use stressopt_core::mesh::Mesh;
use stressopt_core::stress::{optimal_stress, Mode, OptimalStressResult};
use stressopt_core::Error;

pub use verify::Check;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Exit code for invalid input or unsupported requests.
pub const EXIT_VALIDATION: i32 = 2;
/// Exit code for solver failures and failed verification.
pub const EXIT_SOLVER: i32 = 3;

pub fn exit_code(err: &Error) -> i32 {
    if err.is_validation() {
        EXIT_VALIDATION
    } else {
        EXIT_SOLVER
    }
}

#[derive(Debug, Clone)]
pub struct Report {
    pub json: String,
    pub summary: String,
    pub exit_code: i32,
}

struct Input<T> {
    value: T,
    sha256: String,
}

fn digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn read_bytes(path: &Path) -> Result<Vec<u8>, Error> {
    fs::read(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

fn load_mesh(path: &Path) -> Result<Input<Mesh>, Error> {
    let bytes = read_bytes(path)?;
    let text = String::from_utf8_lossy(&bytes);
    Ok(Input {
        value: Mesh::from_json_str(&text)?,
        sha256: digest(&bytes),
    })
}

fn load_traction(path: &Path) -> Result<Input<TractionField>, Error> {
    let bytes = read_bytes(path)?;
    let text = String::from_utf8_lossy(&bytes);
    Ok(Input {
        value: TractionField::from_json_str(&text)?,
        sha256: digest(&bytes),
    })
}

#[derive(Serialize)]
struct Inputs {
    mesh_sha256: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    traction_sha256: Option<String>,
}

#[derive(Serialize)]
struct Norms {
    pair: String,
    primal: String,
    dual: String,
}

impl From<NormPair> for Norms {
    fn from(p: NormPair) -> Self {
        Norms {
            pair: p.id(),
            primal: p.primal.to_string(),
            dual: p.dual.to_string(),
        }
    }
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    command: &'static str,
    tool_version: &'static str,
    inputs: Inputs,
    #[serde(skip_serializing_if = "Option::is_none")]
    mode: Option<Mode>,
    norms: Norms,
    result: &'a T,
}

fn render<T: Serialize>(
    command: &'static str,
    inputs: Inputs,
    mode: Option<Mode>,
    norm: NormPair,
    result: &T,
) -> String {
    let envelope = Envelope {
        command,
        tool_version: TOOL_VERSION,
        inputs,
        mode,
        norms: norm.into(),
        result,
    };
    serde_json::to_string_pretty(&envelope).expect("report serializes")
}

fn prepare(mesh_path: &Path, norm: NormPair) -> Result<(Input<Mesh>, DiscreteOperators), Error> {
    let mesh = load_mesh(mesh_path)?;
    let ops = assemble(&mesh.value, norm)?;
    Ok((mesh, ops))
}

#[derive(Debug, Clone)]
pub struct AnalyzeArgs {
    pub mesh: PathBuf,
    pub traction: PathBuf,
    pub mode: Mode,
    pub norm: NormPair,
}

pub fn cmd_analyze(args: &AnalyzeArgs) -> Result<Report, Error> {
    let (mesh, ops) = prepare(&args.mesh, args.norm)?;
    let t = load_traction(&args.traction)?;
    let r: OptimalStressResult = optimal_stress(&ops, &t.value, args.mode)?;
    let summary = format!(
        "sigma_opt = {} ({} mode), dual supremum = {}, gap = {:e}, equilibrium residual = {:e}",
        r.sigma_opt, args.mode, r.dual_value, r.duality_gap, r.equilibrium_residual
    );
    let inputs = Inputs {
        mesh_sha256: mesh.sha256,
        traction_sha256: Some(t.sha256),
    };
    Ok(Report {
        json: render("analyze", inputs, Some(args.mode), args.norm, &r),
        summary,
        exit_code: 0,
    })
}

#[derive(Debug, Clone)]
pub struct CapacityArgs {
    pub mesh: PathBuf,
    pub mode: Mode,
    pub norm: NormPair,
    /// `None` picks exact enumeration when the mesh is under the cap.
    pub method: Option<Method>,
}

#[derive(Serialize)]
struct DualCheckRecord {
    k_prime: f64,
    agrees: bool,
    worst_traction: TractionField,
}

#[derive(Serialize)]
struct CapacityRecord {
    boundary_components: usize,
    enumeration_cap: usize,
    caps_hit: bool,
    #[serde(flatten)]
    capacity: CapacityResult,
    dual_check: Option<DualCheckRecord>,
}

pub fn cmd_capacity(args: &CapacityArgs) -> Result<Report, Error> {
    let (mesh, ops) = prepare(&args.mesh, args.norm)?;
    let m = ops.boundary_components();
    let caps_hit = m > ENUMERATION_CAP;
    let method = args.method.unwrap_or(if caps_hit {
        Method::AlternatingHeuristic
    } else {
        Method::ExactVertexEnumeration
    });
    let capacity = load_capacity(&ops, args.mode, method)?;
    let dual_check = if caps_hit {
        None
    } else {
        let d = generalized_k_dual_check(&ops, args.mode)?;
        Some(DualCheckRecord {
            k_prime: d.k_prime,
            agrees: k_agrees(capacity.k, d.k_prime),
            worst_traction: d.worst_traction,
        })
    };
    let mut summary = format!(
        "K = {}, C = {} ({} mode, {}{})\n{}",
        capacity.k,
        capacity.c,
        args.mode,
        method,
        if capacity.lower_bound { ", lower bound" } else { "" },
        capacity.interpretation
    );
    let mut exit_code = 0;
    if let Some(d) = &dual_check {
        summary.push_str(&format!("\ntraction-side K' = {}", d.k_prime));
        if method == Method::ExactVertexEnumeration && !d.agrees {
            summary.push_str(" (disagrees with K)");
            exit_code = EXIT_SOLVER;
        }
    }
    let record = CapacityRecord {
        boundary_components: m,
        enumeration_cap: ENUMERATION_CAP,
        caps_hit,
        capacity,
        dual_check,
    };
    let inputs = Inputs {
        mesh_sha256: mesh.sha256,
        traction_sha256: None,
    };
    Ok(Report {
        json: render("capacity", inputs, Some(args.mode), args.norm, &record),
        summary,
        exit_code,
    })
}

#[derive(Debug, Clone)]
pub struct LimitArgs {
    pub mesh: PathBuf,
    pub traction: PathBuf,
    pub y0: f64,
    pub norm: NormPair,
}

#[derive(Serialize)]
struct LimitRecord {
    #[serde(flatten)]
    limit: LimitResult,
    lambda_kinematic: f64,
    gap: f64,
}

pub fn cmd_limit(args: &LimitArgs) -> Result<Report, Error> {
    let (mesh, ops) = prepare(&args.mesh, args.norm)?;
    let t = load_traction(&args.traction)?;
    let limit = limit_analysis(&ops, &t.value, args.y0)?;
    let kin = kinematic_limit_check(&ops, &t.value, args.y0)?;
    let state = if limit.at_collapse {
        "the traction lies on the collapse manifold"
    } else if limit.lambda_star > 1.0 {
        "the traction is below the limit load"
    } else {
        "the traction exceeds the limit load"
    };
    let summary = format!(
        "lambda* = {} (kinematic {}, gap {:e}); {state}",
        limit.lambda_star, kin.lambda_kinematic, kin.gap
    );
    let record = LimitRecord {
        limit,
        lambda_kinematic: kin.lambda_kinematic,
        gap: kin.gap,
    };
    let inputs = Inputs {
        mesh_sha256: mesh.sha256,
        traction_sha256: Some(t.sha256),
    };
    Ok(Report {
        json: render("limit", inputs, Some(Mode::Plastic), args.norm, &record),
        summary,
        exit_code: 0,
    })
}

#[derive(Debug, Clone)]
pub struct VerifyArgs {
    pub mesh: PathBuf,
    pub seed: u64,
    pub trials: usize,
    pub norm: NormPair,
}

#[derive(Serialize)]
struct VerifyRecord {
    seed: u64,
    trials: usize,
    passed: bool,
    checks: Vec<Check>,
}

pub fn cmd_verify(args: &VerifyArgs) -> Result<Report, Error> {
    if args.trials == 0 {
        return Err(Error::InvalidArgument("--trials must be positive".to_string()));
    }
    let (mesh, ops) = prepare(&args.mesh, args.norm)?;
    let checks = verify::run(&mesh.value, &ops, args.seed, args.trials)?;
    let passed = checks.iter().all(|c| c.passed);
    let summary = checks
        .iter()
        .map(|c| {
            format!(
                "{} {} ({} cases, max error {:e})",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.cases,
                c.max_error
            )
        })
        .collect::<Vec<_>>()
        .join("\n");
    let record = VerifyRecord {
        seed: args.seed,
        trials: args.trials,
        passed,
        checks,
    };
    let inputs = Inputs {
        mesh_sha256: mesh.sha256,
        traction_sha256: None,
    };
    Ok(Report {
        json: render("verify", inputs, None, args.norm, &record),
        summary,
        exit_code: if passed { 0 } else { EXIT_SOLVER },
    })
}
