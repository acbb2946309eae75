//! Stress concentration factors, the load capacity ratio `C = 1/K` and the
//! limit-analysis factor.
//!
//! `K` is the norm of the boundary trace operator: the supremum of
//! `trace_norm_l1(w) / |eps(w)|` over admissible fields. Since the
//! entrywise-1 trace norm is the largest of `s . trace(w)` over sign
//! vectors `s`, `K` is the largest kinematic supremum over the sign-vector
//! tractions, and exact evaluation enumerates them. The traction side
//! (`sup_t sigma_opt(t) / |t|_inf`) is a convex maximization over the unit
//! cube and is evaluated at its vertices with the primal LP.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::kinematics::{traction_sup_norm, DiscreteOperators, TractionField, VelocityField};
use crate::lp::model::{Cmp, Sense};
use crate::lp::LpStatus;
use crate::stress::{
    ensure_plastic_viable, kinematic_model, maximize_work, optimal_stress, optimal_stress_primal,
    Mode, DUALITY_TOL,
};

/// Largest number of boundary scalar components handled by exhaustive
/// sign-pattern enumeration.
pub const ENUMERATION_CAP: usize = 16;

/// Iteration cap of the alternating heuristic.
pub const HEURISTIC_ITERATIONS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ExactVertexEnumeration,
    AlternatingHeuristic,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::ExactVertexEnumeration => "exact_vertex_enumeration",
            Method::AlternatingHeuristic => "alternating_heuristic",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" | "exact_vertex_enumeration" => Ok(Method::ExactVertexEnumeration),
            "heuristic" | "alternating_heuristic" => Ok(Method::AlternatingHeuristic),
            other => Err(Error::InvalidArgument(format!(
                "unknown method `{other}` (expected exact or heuristic)"
            ))),
        }
    }
}

/// Writes infinite values as the string `"inf"`.
pub(crate) fn serialize_extended<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_infinite() {
        s.serialize_str(if *v > 0.0 { "inf" } else { "-inf" })
    } else {
        s.serialize_f64(*v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapacityResult {
    pub mode: Mode,
    pub method: Method,
    #[serde(rename = "K")]
    pub k: f64,
    /// `1 / K`; infinite when no boundary point can move.
    #[serde(rename = "C", serialize_with = "serialize_extended")]
    pub c: f64,
    pub worst_traction: TractionField,
    pub certificate: VelocityField,
    /// The heuristic only bounds `K` from below.
    pub lower_bound: bool,
    /// Whether the heuristic reached a fixed point (always true for exact).
    pub converged: bool,
    pub interpretation: String,
}

fn sign_traction(ops: &DiscreteOperators, signs: &[f64]) -> TractionField {
    TractionField::from_flat(ops, signs).expect("sign vector length")
}

/// Sign vector number `index`; the first component is always `+1`.
fn sign_pattern(index: usize, m: usize) -> Vec<f64> {
    (0..m)
        .map(|i| {
            if i > 0 && (index >> (i - 1)) & 1 == 1 {
                -1.0
            } else {
                1.0
            }
        })
        .collect()
}

fn check_mode(ops: &DiscreteOperators, mode: Mode) -> Result<()> {
    if mode == Mode::Plastic {
        ensure_plastic_viable(ops)?;
    }
    Ok(())
}

/// `K_t = sigma_opt(t) / |t|_inf`.
pub fn concentration_factor_for(ops: &DiscreteOperators, t: &TractionField, mode: Mode) -> Result<f64> {
    let norm = traction_sup_norm(ops, t)?;
    if norm == 0.0 {
        return Err(Error::ZeroTraction);
    }
    Ok(optimal_stress(ops, t, mode)?.sigma_opt / norm)
}

/// Index of the largest value; ties go to the lowest index.
fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

fn check_cap(m: usize) -> Result<()> {
    if m > ENUMERATION_CAP {
        return Err(Error::CapExceeded {
            components: m,
            cap: ENUMERATION_CAP,
        });
    }
    Ok(())
}

/// Generalized stress concentration factor via the kinematic side.
pub fn generalized_k(ops: &DiscreteOperators, mode: Mode, method: Method) -> Result<CapacityResult> {
    check_mode(ops, mode)?;
    let m = ops.boundary_components();
    let (k, signs, certificate, lower_bound, converged) = match method {
        Method::ExactVertexEnumeration => {
            check_cap(m)?;
            // s and -s give the same value
            let patterns = 1usize << (m - 1);
            let results = (0..patterns)
                .into_par_iter()
                .map(|i| {
                    let signs = sign_pattern(i, m);
                    let load = ops.load_vector(&sign_traction(ops, &signs))?;
                    maximize_work(ops, &load, mode)
                })
                .collect::<Result<Vec<_>>>()?;
            let values: Vec<f64> = results.iter().map(|r| r.dual_value).collect();
            let best = argmax(&values);
            let witness = results[best].witness.clone();
            (values[best], sign_pattern(best, m), witness, false, true)
        }
        Method::AlternatingHeuristic => {
            let mut signs = vec![1.0; m];
            let mut best: Option<(f64, Vec<f64>, VelocityField)> = None;
            let mut converged = false;
            for _ in 0..HEURISTIC_ITERATIONS {
                let load = ops.load_vector(&sign_traction(ops, &signs))?;
                let r = maximize_work(ops, &load, mode)?;
                if best.as_ref().is_none_or(|b| r.dual_value > b.0) {
                    best = Some((r.dual_value, signs.clone(), r.witness.clone()));
                }
                let trace = crate::kinematics::trace(ops, &r.witness)?;
                let next: Vec<f64> = trace
                    .iter()
                    .flatten()
                    .zip(&signs)
                    .map(|(&v, &old)| if v > 0.0 { 1.0 } else if v < 0.0 { -1.0 } else { old })
                    .collect();
                if next == signs {
                    converged = true;
                    break;
                }
                signs = next;
            }
            let (k, signs, witness) = best.expect("at least one iteration");
            (k, signs, witness, true, converged)
        }
    };
    let c = if k > 0.0 { 1.0 / k } else { f64::INFINITY };
    Ok(CapacityResult {
        mode,
        method,
        k,
        c,
        worst_traction: sign_traction(ops, &signs),
        certificate,
        lower_bound,
        converged,
        interpretation: interpretation(c, lower_bound),
    })
}

fn interpretation(c: f64, lower_bound: bool) -> String {
    let bound = if c.is_infinite() {
        "no traction on gammaT can cause collapse".to_string()
    } else {
        format!("no collapse for any traction with ess sup |t| < {c} * Y0")
    };
    if lower_bound {
        format!("{bound} (heuristic: C may be smaller)")
    } else {
        bound
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualCheck {
    pub k_prime: f64,
    pub worst_traction: TractionField,
}

/// `K' = max sigma_opt(t)` over the vertices of the unit traction cube,
/// each solved with the primal stress LP.
pub fn generalized_k_dual_check(ops: &DiscreteOperators, mode: Mode) -> Result<DualCheck> {
    check_mode(ops, mode)?;
    let m = ops.boundary_components();
    check_cap(m)?;
    let patterns = 1usize << (m - 1);
    let values = (0..patterns)
        .into_par_iter()
        .map(|i| {
            let t = sign_traction(ops, &sign_pattern(i, m));
            optimal_stress_primal(ops, &t, mode).map(|r| r.sigma_opt)
        })
        .collect::<Result<Vec<_>>>()?;
    let best = argmax(&values);
    Ok(DualCheck {
        k_prime: values[best],
        worst_traction: sign_traction(ops, &sign_pattern(best, m)),
    })
}

/// Whether `K` and `K'` agree within the duality tolerance.
pub fn k_agrees(k: f64, k_prime: f64) -> bool {
    (k - k_prime).abs() <= DUALITY_TOL * (1.0 + k)
}

/// Load capacity ratio `C = 1 / K`.
pub fn load_capacity(ops: &DiscreteOperators, mode: Mode, method: Method) -> Result<CapacityResult> {
    generalized_k(ops, mode, method)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitResult {
    pub y0: f64,
    pub sigma_opt: f64,
    pub lambda_star: f64,
    /// Radial projection of the traction onto the collapse manifold.
    pub t_collapse: TractionField,
    /// `sigma_opt(t_collapse)`, recomputed.
    pub sigma_opt_collapse: f64,
    /// True when the given traction already lies on the collapse manifold.
    pub at_collapse: bool,
}

fn check_limit_inputs(ops: &DiscreteOperators, t: &TractionField, y0: f64) -> Result<()> {
    if !(y0.is_finite() && y0 > 0.0) {
        return Err(Error::InvalidArgument(format!("Y0 must be positive, got {y0}")));
    }
    ops.check_traction(t)?;
    if t.is_zero() {
        return Err(Error::ZeroTraction);
    }
    ensure_plastic_viable(ops)
}

fn no_work_error() -> Error {
    Error::InvalidArgument("traction does no work on any admissible isochoric field".to_string())
}

/// Plastic optimal stress of `t`, rejecting tractions that do no work.
fn plastic_sigma_opt(ops: &DiscreteOperators, t: &TractionField) -> Result<f64> {
    let s = optimal_stress(ops, t, Mode::Plastic)?.sigma_opt;
    if s <= 0.0 {
        return Err(no_work_error());
    }
    Ok(s)
}

/// `t * (Y0 / sigma_opt(t))`.
pub fn project_to_collapse(ops: &DiscreteOperators, t: &TractionField, y0: f64) -> Result<TractionField> {
    check_limit_inputs(ops, t, y0)?;
    Ok(t.scale(y0 / plastic_sigma_opt(ops, t)?))
}

/// Limit-analysis factor `lambda* = Y0 / sigma_opt(t)` in plastic mode.
pub fn limit_analysis(ops: &DiscreteOperators, t: &TractionField, y0: f64) -> Result<LimitResult> {
    check_limit_inputs(ops, t, y0)?;
    let sigma_opt = plastic_sigma_opt(ops, t)?;
    let lambda_star = y0 / sigma_opt;
    let t_collapse = t.scale(lambda_star);
    let sigma_opt_collapse = optimal_stress(ops, &t_collapse, Mode::Plastic)?.sigma_opt;
    if (sigma_opt_collapse - y0).abs() > DUALITY_TOL * y0 {
        return Err(Error::SolverInconsistency(format!(
            "projected traction has sigma_opt {sigma_opt_collapse}, expected {y0}"
        )));
    }
    Ok(LimitResult {
        y0,
        sigma_opt,
        lambda_star,
        t_collapse,
        sigma_opt_collapse,
        at_collapse: (lambda_star - 1.0).abs() <= DUALITY_TOL,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KinematicLimit {
    pub lambda_static: f64,
    pub lambda_kinematic: f64,
    pub gap: f64,
}

/// Static versus kinematic limit factor: `Y0 / sigma_opt(t)` against
/// `Y0 * min { |eps(w)| : work(t, w) = 1 }` over isochoric `w`.
pub fn kinematic_limit_check(ops: &DiscreteOperators, t: &TractionField, y0: f64) -> Result<KinematicLimit> {
    check_limit_inputs(ops, t, y0)?;
    let load = ops.load_vector(t)?;
    let km = kinematic_model(ops, Mode::Plastic, Sense::Minimize);
    let mut model = km.model;
    for &(v, a) in &km.norm {
        model.set_objective(v, a);
    }
    let work = km.w.iter().zip(&load).map(|(&v, &f)| (v, f)).collect();
    model.add_row(work, Cmp::Eq, 1.0);
    let sol = model.solve()?;
    let min_norm = match sol.status {
        LpStatus::Optimal => sol.objective,
        LpStatus::Infeasible => return Err(no_work_error()),
        LpStatus::Unbounded => {
            return Err(Error::SolverInconsistency(
                "norm minimization reported unbounded".to_string(),
            ))
        }
    };
    let lambda_kinematic = y0 * min_norm;
    let lambda_static = y0 / plastic_sigma_opt(ops, t)?;
    let gap = (lambda_static - lambda_kinematic).abs();
    if gap > DUALITY_TOL * (1.0 + lambda_static) {
        return Err(Error::SolverInconsistency(format!(
            "static factor {lambda_static} and kinematic factor {lambda_kinematic} disagree"
        )));
    }
    Ok(KinematicLimit {
        lambda_static,
        lambda_kinematic,
        gap,
    })
}
