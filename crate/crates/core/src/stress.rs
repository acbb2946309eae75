//! Optimal stress: the least possible maximal stress over all stress fields
//! in equilibrium with a traction, computed both as a min-max LP over stress
//! fields and as a kinematic supremum over velocity fields.
//!
//! Elastic mode bounds every entry of each element stress. Plastic mode
//! bounds only the deviatoric part (the yield seminorm), leaves the pressure
//! free, and restricts the kinematic side to isochoric fields. In 2D plastic
//! mode the out-of-plane stress of each element is an extra free unknown;
//! it does no work against plane strains but enters the deviator.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::{
    deviatoric_strain_norm, isochoric_constraints, isochoric_dim, strain_norm_l1,
    traction_sup_norm, DiscreteOperators, LinearForm, TractionField, VelocityField,
};
use crate::lp::model::{Cmp, LpModel, Sense, Var, VarKind};
use crate::lp::LpStatus;
use crate::matnorm::{component_count, mat_norm, multiplicity, yield_value, NormPair, SymMatrix};

/// Primal and dual optimal values must agree to this relative tolerance.
pub const DUALITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Elastic,
    Plastic,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Elastic => "elastic",
            Mode::Plastic => "plastic",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "elastic" => Ok(Mode::Elastic),
            "plastic" => Ok(Mode::Plastic),
            other => Err(Error::InvalidArgument(format!(
                "unknown mode `{other}` (expected elastic or plastic)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StressField {
    pub elements: Vec<SymMatrix>,
    /// Out-of-plane normal stress per element (2D plastic mode only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_of_plane: Option<Vec<f64>>,
}

impl StressField {
    pub fn zeros(ops: &DiscreteOperators) -> Self {
        StressField {
            elements: vec![SymMatrix::zeros(ops.dim); ops.element_count()],
            out_of_plane: None,
        }
    }

    /// Stress of element `e` as seen by the yield function (3x3).
    pub fn embedded(&self, e: usize) -> SymMatrix {
        let mut m = self.elements[e].embed3();
        if let (Some(zz), 2) = (&self.out_of_plane, self.elements[e].dim()) {
            m.set(2, 2, zz[e]);
        }
        m
    }

    fn check(&self, ops: &DiscreteOperators) -> Result<()> {
        if self.elements.len() != ops.element_count() {
            return Err(Error::LengthMismatch {
                what: "stress field elements",
                expected: ops.element_count(),
                got: self.elements.len(),
            });
        }
        if let Some(e) = self.elements.iter().find(|m| m.dim() != ops.dim) {
            return Err(Error::DimensionMismatch {
                expected: ops.dim,
                got: e.dim(),
            });
        }
        if let Some(zz) = &self.out_of_plane {
            if zz.len() != ops.element_count() {
                return Err(Error::LengthMismatch {
                    what: "out-of-plane stresses",
                    expected: ops.element_count(),
                    got: zz.len(),
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimalStressResult {
    pub mode: Mode,
    pub sigma_opt: f64,
    pub sigma_hat: StressField,
    pub dual_value: f64,
    pub dual_witness: VelocityField,
    pub duality_gap: f64,
    pub equilibrium_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EquilibriumCheck {
    pub ok: bool,
    pub residual: f64,
}

/// `max_e |sigma_e|` (elastic) or `max_e Y(sigma_e)` (plastic).
pub fn stress_measure(s: &StressField, mode: Mode, norm_pair: NormPair) -> f64 {
    (0..s.elements.len())
        .map(|e| match mode {
            Mode::Elastic => mat_norm(&s.elements[e], norm_pair.dual),
            Mode::Plastic => yield_value(&s.embedded(e), norm_pair.dual),
        })
        .fold(0.0, f64::max)
}

/// The kinematic norm dual to [`stress_measure`] on admissible fields.
pub fn kinematic_norm(ops: &DiscreteOperators, w: &VelocityField, mode: Mode) -> Result<f64> {
    match mode {
        Mode::Elastic => strain_norm_l1(ops, w),
        Mode::Plastic => deviatoric_strain_norm(ops, w),
    }
}

/// Internal virtual work of `s` on every unit DOF field, minus the external
/// work of `t` on it.
pub fn equilibrium_residuals(
    ops: &DiscreteOperators,
    s: &StressField,
    t: &TractionField,
) -> Result<Vec<f64>> {
    s.check(ops)?;
    let mut r = ops.load_vector(t)?;
    r.iter_mut().for_each(|v| *v = -*v);
    for (e, forms) in ops.strain_map.iter().enumerate() {
        let sigma = s.elements[e].components();
        for (c, form) in forms.iter().enumerate() {
            let k = ops.volumes[e] * multiplicity(ops.dim, c) * sigma[c];
            for &(dof, a) in &form.0 {
                r[dof] += k * a;
            }
        }
    }
    Ok(r)
}

/// Virtual-work check: passes iff the largest residual is at most
/// `tol * (1 + |t|_inf)`.
pub fn check_equilibrium(
    ops: &DiscreteOperators,
    s: &StressField,
    t: &TractionField,
    tol: f64,
) -> Result<EquilibriumCheck> {
    let residual = equilibrium_residuals(ops, s, t)?
        .iter()
        .map(|v| v.abs())
        .fold(0.0, f64::max);
    let scale = 1.0 + traction_sup_norm(ops, t)?;
    Ok(EquilibriumCheck {
        ok: residual <= tol * scale,
        residual,
    })
}

/// Rejects plastic analysis when the isochoric subspace is trivial.
pub fn ensure_plastic_viable(ops: &DiscreteOperators) -> Result<()> {
    if ops.dim == 1 {
        return Err(Error::TrivialIsochoric(
            "bar meshes only admit the zero isochoric field".to_string(),
        ));
    }
    if isochoric_dim(ops) == 0 {
        return Err(Error::TrivialIsochoric(
            "every volume-preserving field vanishes on this mesh".to_string(),
        ));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrimalResult {
    pub sigma_opt: f64,
    pub sigma_hat: StressField,
}

/// Min-max LP over stress fields in equilibrium with `t`.
pub fn optimal_stress_primal(
    ops: &DiscreteOperators,
    t: &TractionField,
    mode: Mode,
) -> Result<PrimalResult> {
    if mode == Mode::Plastic {
        ensure_plastic_viable(ops)?;
    }
    let f = ops.load_vector(t)?;
    let dim = ops.dim;
    let n_comp = component_count(dim);
    let n_el = ops.element_count();
    let mut model = LpModel::new(Sense::Minimize);
    let bound = model.add_var(VarKind::NonNegative);
    model.set_objective(bound, 1.0);

    // Each bounded quantity is a difference `u - v` of nonnegative parts
    // with `u + v <= T`, which is `|u - v| <= T` at no extra row.
    let bounded_pair = |model: &mut LpModel| {
        let u = model.add_var(VarKind::NonNegative);
        let v = model.add_var(VarKind::NonNegative);
        model.add_row(vec![(u, 1.0), (v, 1.0), (bound, -1.0)], Cmp::Le, 0.0);
        (u, v)
    };
    // Every stress component as a linear expression in the LP variables.
    let mut sigma: Vec<Vec<Vec<(Var, f64)>>> = Vec::with_capacity(n_el);
    let mut out_of_plane: Option<Vec<Vec<(Var, f64)>>> =
        (mode == Mode::Plastic && dim == 2).then(Vec::new);
    for _ in 0..n_el {
        let mut comps = Vec::with_capacity(n_comp);
        match mode {
            Mode::Elastic => {
                for _ in 0..n_comp {
                    let (u, v) = bounded_pair(&mut model);
                    comps.push(vec![(u, 1.0), (v, -1.0)]);
                }
            }
            Mode::Plastic => {
                // Diagonal of the 3x3 stress as deviator plus free pressure;
                // in 2D the third entry is the out-of-plane stress.
                let pressure = model.add_var(VarKind::Free);
                let parts: Vec<(Var, Var)> = (0..3).map(|_| bounded_pair(&mut model)).collect();
                let trace_free = parts.iter().flat_map(|&(u, v)| [(u, 1.0), (v, -1.0)]).collect();
                model.add_row(trace_free, Cmp::Eq, 0.0);
                let diag: Vec<Vec<(Var, f64)>> = parts
                    .iter()
                    .map(|&(u, v)| vec![(u, 1.0), (v, -1.0), (pressure, 1.0)])
                    .collect();
                comps.extend(diag[..dim].iter().cloned());
                if let Some(zz) = out_of_plane.as_mut() {
                    zz.push(diag[2].clone());
                }
                for _ in dim..n_comp {
                    let (u, v) = bounded_pair(&mut model);
                    comps.push(vec![(u, 1.0), (v, -1.0)]);
                }
            }
        }
        sigma.push(comps);
    }

    let mut rows: Vec<Vec<(Var, f64)>> = vec![Vec::new(); ops.n_dof];
    for (e, forms) in ops.strain_map.iter().enumerate() {
        for (c, form) in forms.iter().enumerate() {
            let k = ops.volumes[e] * multiplicity(dim, c);
            for &(dof, a) in &form.0 {
                rows[dof].extend(sigma[e][c].iter().map(|&(v, w)| (v, k * a * w)));
            }
        }
    }
    for (terms, fk) in rows.into_iter().zip(&f) {
        model.add_row(terms, Cmp::Eq, *fk);
    }

    let sol = model.solve()?;
    match sol.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => return Err(Error::Infeasible("primal stress")),
        LpStatus::Unbounded => {
            return Err(Error::SolverInconsistency(
                "primal stress LP reported unbounded".to_string(),
            ))
        }
    }
    let eval = |expr: &[(Var, f64)]| expr.iter().map(|&(v, w)| w * sol.value(v)).sum::<f64>();
    let elements = sigma
        .iter()
        .map(|comps| {
            let v: Vec<f64> = comps.iter().map(|c| eval(c)).collect();
            SymMatrix::from_components(dim, &v).expect("component count")
        })
        .collect();
    let out_of_plane = out_of_plane.map(|zz| zz.iter().map(|c| eval(c)).collect());
    Ok(PrimalResult {
        sigma_opt: sol.objective.max(0.0),
        sigma_hat: StressField {
            elements,
            out_of_plane,
        },
    })
}

/// LP skeleton over velocity fields: the free DOF variables, the splitting
/// variables of the kinematic norm, and the norm as a linear expression.
pub(crate) struct KinematicModel {
    pub model: LpModel,
    pub w: Vec<Var>,
    pub norm: Vec<(Var, f64)>,
}

fn form_terms(form: &LinearForm, w: &[Var]) -> Vec<(Var, f64)> {
    form.0.iter().map(|&(k, a)| (w[k], a)).collect()
}

pub(crate) fn kinematic_model(ops: &DiscreteOperators, mode: Mode, sense: Sense) -> KinematicModel {
    let dim = ops.dim;
    let mut model = LpModel::new(sense);
    let w = model.add_vars(ops.n_dof, VarKind::Free);
    let mut norm = Vec::new();

    // |x| <= p + n with x = p - n
    let split = |model: &mut LpModel, form: &LinearForm, weight: f64, norm: &mut Vec<(Var, f64)>| {
        let p = model.add_var(VarKind::NonNegative);
        let n = model.add_var(VarKind::NonNegative);
        let mut terms = form_terms(form, &w);
        terms.push((p, -1.0));
        terms.push((n, 1.0));
        model.add_row(terms, Cmp::Eq, 0.0);
        norm.push((p, weight));
        norm.push((n, weight));
    };

    match mode {
        Mode::Elastic => {
            for (e, forms) in ops.strain_map.iter().enumerate() {
                for (c, form) in forms.iter().enumerate() {
                    split(&mut model, form, ops.volumes[e] * multiplicity(dim, c), &mut norm);
                }
            }
        }
        Mode::Plastic => {
            for form in isochoric_constraints(ops) {
                model.add_row(form_terms(&form, &w), Cmp::Eq, 0.0);
            }
            for (e, forms) in ops.strain_map.iter().enumerate() {
                if dim == 2 {
                    // isochoric diagonal (a, -a, 0): max - min = 2|a|
                    split(&mut model, &forms[0], 2.0 * ops.volumes[e], &mut norm);
                    split(&mut model, &forms[2], 2.0 * ops.volumes[e], &mut norm);
                    continue;
                }
                // max(d) - min(d) over the diagonal <= u
                let u = model.add_var(VarKind::NonNegative);
                norm.push((u, ops.volumes[e]));
                let zero = LinearForm::default();
                let diag: Vec<&LinearForm> = (0..3)
                    .map(|i| if i < dim { &forms[i] } else { &zero })
                    .collect();
                for i in 0..3 {
                    for j in 0..3 {
                        if i == j || (i >= dim && j >= dim) {
                            continue;
                        }
                        let mut terms = form_terms(diag[i], &w);
                        terms.extend(diag[j].0.iter().map(|&(k, a)| (w[k], -a)));
                        terms.push((u, -1.0));
                        model.add_row(terms, Cmp::Le, 0.0);
                    }
                }
                for form in &forms[dim..] {
                    split(&mut model, form, 2.0 * ops.volumes[e], &mut norm);
                }
            }
        }
    }
    KinematicModel { model, w, norm }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualResult {
    pub dual_value: f64,
    pub witness: VelocityField,
}

/// Kinematic supremum `max { f . w : |eps(w)| <= 1 }` (plastic: over
/// isochoric `w`).
pub fn optimal_stress_dual(
    ops: &DiscreteOperators,
    t: &TractionField,
    mode: Mode,
) -> Result<DualResult> {
    if mode == Mode::Plastic {
        ensure_plastic_viable(ops)?;
    }
    let f = ops.load_vector(t)?;
    maximize_work(ops, &f, mode)
}

/// Maximizes `load . w` over the kinematic unit ball.
pub(crate) fn maximize_work(ops: &DiscreteOperators, load: &[f64], mode: Mode) -> Result<DualResult> {
    let KinematicModel { mut model, w, norm } = kinematic_model(ops, mode, Sense::Maximize);
    for (&v, &fk) in w.iter().zip(load) {
        model.set_objective(v, fk);
    }
    model.add_row(norm, Cmp::Le, 1.0);
    let sol = model.solve()?;
    match sol.status {
        LpStatus::Optimal => Ok(DualResult {
            dual_value: sol.objective.max(0.0),
            witness: VelocityField::new(w.iter().map(|&v| sol.value(v)).collect()),
        }),
        LpStatus::Unbounded => Err(Error::Mechanism),
        LpStatus::Infeasible => Err(Error::SolverInconsistency(
            "kinematic LP infeasible although w = 0 is admissible".to_string(),
        )),
    }
}

/// Runs both LPs and checks that their values agree.
pub fn optimal_stress(
    ops: &DiscreteOperators,
    t: &TractionField,
    mode: Mode,
) -> Result<OptimalStressResult> {
    let primal = optimal_stress_primal(ops, t, mode)?;
    let dual = optimal_stress_dual(ops, t, mode)?;
    let duality_gap = (primal.sigma_opt - dual.dual_value).abs();
    if duality_gap > DUALITY_TOL * (1.0 + primal.sigma_opt) {
        return Err(Error::SolverInconsistency(format!(
            "primal optimum {} and kinematic supremum {} differ by {duality_gap:e}",
            primal.sigma_opt, dual.dual_value
        )));
    }
    let equilibrium_residual = check_equilibrium(ops, &primal.sigma_hat, t, 0.0)?.residual;
    Ok(OptimalStressResult {
        mode,
        sigma_opt: primal.sigma_opt,
        sigma_hat: primal.sigma_hat,
        dual_value: dual.dual_value,
        dual_witness: dual.witness,
        duality_gap,
        equilibrium_residual,
    })
}
