//! Discrete kinematics: velocity fields vanishing on `gamma0`, their
//! elementwise constant strains, boundary traces on `gammaT`, and the
//! norms and work pairing built from them.
//!
//! Degrees of freedom are nodal velocity components, node-major. Nodes on a
//! `gamma0` facet are clamped in every component and removed from the
//! unknowns, so the strain operator is injective on connected meshes.

use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matnorm::{
    component_count, component_position, deviatoric_dual_norm, mat_norm, vec_norm, NormPair,
    SymMatrix,
};
use crate::mesh::{ensure_valid, Mesh};

/// Sparse linear functional on the free degrees of freedom.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinearForm(pub Vec<(usize, f64)>);

impl LinearForm {
    pub fn apply(&self, w: &[f64]) -> f64 {
        self.0.iter().map(|&(k, a)| a * w[k]).sum()
    }

    fn add(&mut self, dof: usize, coef: f64) {
        if coef == 0.0 {
            return;
        }
        match self.0.iter_mut().find(|(k, _)| *k == dof) {
            Some(entry) => entry.1 += coef,
            None => self.0.push((dof, coef)),
        }
    }

    fn sorted(mut self) -> Self {
        self.0.sort_by_key(|&(k, _)| k);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Clamping {
    /// Eliminate every component of every `gamma0` node.
    Gamma0,
    /// Keep all nodal components free (used for the rigid-kernel check).
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VelocityField {
    pub dof_values: Vec<f64>,
}

impl VelocityField {
    pub fn new(dof_values: Vec<f64>) -> Self {
        VelocityField { dof_values }
    }

    pub fn scale(&self, k: f64) -> Self {
        VelocityField::new(self.dof_values.iter().map(|v| k * v).collect())
    }
}

/// Per-`gammaT`-facet traction vectors, in the mesh's `gammaT` facet order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TractionField {
    pub facets: Vec<Vec<f64>>,
}

impl TractionField {
    pub fn zeros(ops: &DiscreteOperators) -> Self {
        TractionField {
            facets: vec![vec![0.0; ops.dim]; ops.facet_count()],
        }
    }

    /// Builds a traction from a flat, facet-major component list.
    pub fn from_flat(ops: &DiscreteOperators, flat: &[f64]) -> Result<Self> {
        let expected = ops.facet_count() * ops.dim;
        if flat.len() != expected {
            return Err(Error::LengthMismatch {
                what: "traction components",
                expected,
                got: flat.len(),
            });
        }
        Ok(TractionField {
            facets: flat.chunks(ops.dim).map(|c| c.to_vec()).collect(),
        })
    }

    pub fn flat(&self) -> Vec<f64> {
        self.facets.iter().flatten().copied().collect()
    }

    pub fn scale(&self, k: f64) -> Self {
        TractionField {
            facets: self
                .facets
                .iter()
                .map(|v| v.iter().map(|x| k * x).collect())
                .collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.facets.iter().flatten().all(|&v| v == 0.0)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|source| Error::Parse {
            what: "traction",
            source,
        })
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("traction serialization cannot fail")
    }
}

pub fn read_traction(path: impl AsRef<Path>) -> Result<TractionField> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    TractionField::from_json_str(&text)
}

pub fn write_traction(t: &TractionField, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut text = t.to_json_string();
    text.push('\n');
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Assembled strain and trace operators of a mesh.
#[derive(Debug, Clone)]
pub struct DiscreteOperators {
    pub mesh: Mesh,
    pub dim: usize,
    pub n_dof: usize,
    /// Free DOF index of each nodal component (`node * dim + component`).
    pub dof_of: Vec<Option<usize>>,
    /// Per element, one form per Voigt strain component.
    pub strain_map: Vec<Vec<LinearForm>>,
    /// Per element, measure times bar cross-section.
    pub volumes: Vec<f64>,
    /// Mesh facet index of each `gammaT` facet.
    pub gamma_t: Vec<usize>,
    /// Per `gammaT` facet, one form per velocity component.
    pub trace_map: Vec<Vec<LinearForm>>,
    pub areas: Vec<f64>,
    pub norm_pair: NormPair,
    pub clamping: Clamping,
}

/// Gradients of the barycentric coordinates of a simplex, one row per node.
fn barycentric_gradients(points: &[&[f64]]) -> Option<Vec<Vec<f64>>> {
    let d = points.len() - 1;
    let jac = DMatrix::from_fn(d, d, |r, c| points[c + 1][r] - points[0][r]);
    let inv = jac.try_inverse()?;
    let mut grads = vec![vec![0.0; d]; d + 1];
    for a in 1..=d {
        for j in 0..d {
            grads[a][j] = inv[(a - 1, j)];
            grads[0][j] -= inv[(a - 1, j)];
        }
    }
    Some(grads)
}

/// Assembles operators with `gamma0` clamping.
pub fn assemble(mesh: &Mesh, norm_pair: NormPair) -> Result<DiscreteOperators> {
    assemble_with(mesh, norm_pair, Clamping::Gamma0)
}

pub fn assemble_with(
    mesh: &Mesh,
    norm_pair: NormPair,
    clamping: Clamping,
) -> Result<DiscreteOperators> {
    ensure_valid(mesh)?;
    if norm_pair != NormPair::L1_LINF {
        return Err(Error::UnsupportedNormPair);
    }
    let dim = mesh.dim;
    let clamped = match clamping {
        Clamping::Gamma0 => mesh.clamped_nodes(),
        Clamping::None => vec![false; mesh.node_count()],
    };
    let mut dof_of = vec![None; mesh.node_count() * dim];
    let mut n_dof = 0;
    for (node, &fixed) in clamped.iter().enumerate() {
        if fixed {
            continue;
        }
        for i in 0..dim {
            dof_of[node * dim + i] = Some(n_dof);
            n_dof += 1;
        }
    }

    let n_comp = component_count(dim);
    let mut strain_map = Vec::with_capacity(mesh.elements.len());
    let mut volumes = Vec::with_capacity(mesh.elements.len());
    for (e, el) in mesh.elements.iter().enumerate() {
        let points: Vec<&[f64]> = el.nodes.iter().map(|&n| mesh.nodes[n].as_slice()).collect();
        let grads = barycentric_gradients(&points).ok_or(Error::SingularElement(e))?;
        let mut forms = vec![LinearForm::default(); n_comp];
        for (c, form) in forms.iter_mut().enumerate() {
            let (i, j) = component_position(dim, c);
            for (a, &node) in el.nodes.iter().enumerate() {
                // eps_ij = (d_j w_i + d_i w_j) / 2
                if let Some(k) = dof_of[node * dim + i] {
                    form.add(k, 0.5 * grads[a][j]);
                }
                if let Some(k) = dof_of[node * dim + j] {
                    form.add(k, 0.5 * grads[a][i]);
                }
            }
        }
        strain_map.push(forms.into_iter().map(LinearForm::sorted).collect());
        volumes.push(mesh.element_volume(e));
    }

    let gamma_t = mesh.gamma_t();
    let mut trace_map = Vec::with_capacity(gamma_t.len());
    let mut areas = Vec::with_capacity(gamma_t.len());
    for &f in &gamma_t {
        let nodes = &mesh.facets[f].nodes;
        let weight = 1.0 / nodes.len() as f64;
        let forms = (0..dim)
            .map(|i| {
                let mut form = LinearForm::default();
                for &node in nodes {
                    if let Some(k) = dof_of[node * dim + i] {
                        form.add(k, weight);
                    }
                }
                form.sorted()
            })
            .collect();
        trace_map.push(forms);
        areas.push(mesh.facet_area(f));
    }

    Ok(DiscreteOperators {
        mesh: mesh.clone(),
        dim,
        n_dof,
        dof_of,
        strain_map,
        volumes,
        gamma_t,
        trace_map,
        areas,
        norm_pair,
        clamping,
    })
}

impl DiscreteOperators {
    pub fn element_count(&self) -> usize {
        self.strain_map.len()
    }

    pub fn facet_count(&self) -> usize {
        self.trace_map.len()
    }

    /// Number of scalar traction (or trace) components on `gammaT`.
    pub fn boundary_components(&self) -> usize {
        self.facet_count() * self.dim
    }

    fn check_field(&self, w: &VelocityField) -> Result<()> {
        if w.dof_values.len() != self.n_dof {
            return Err(Error::LengthMismatch {
                what: "velocity field",
                expected: self.n_dof,
                got: w.dof_values.len(),
            });
        }
        Ok(())
    }

    pub fn check_traction(&self, t: &TractionField) -> Result<()> {
        if t.facets.len() != self.facet_count() {
            return Err(Error::LengthMismatch {
                what: "traction facets",
                expected: self.facet_count(),
                got: t.facets.len(),
            });
        }
        for v in &t.facets {
            if v.len() != self.dim {
                return Err(Error::LengthMismatch {
                    what: "traction vector",
                    expected: self.dim,
                    got: v.len(),
                });
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidArgument(
                    "traction has non-finite entries".to_string(),
                ));
            }
        }
        Ok(())
    }

    /// Samples `f` at the nodes; clamped components are dropped.
    pub fn interpolate(&self, f: impl Fn(&[f64]) -> Vec<f64>) -> VelocityField {
        let mut values = vec![0.0; self.n_dof];
        for (node, x) in self.mesh.nodes.iter().enumerate() {
            let v = f(x);
            for i in 0..self.dim {
                if let Some(k) = self.dof_of[node * self.dim + i] {
                    values[k] = v[i];
                }
            }
        }
        VelocityField::new(values)
    }

    /// Work-equivalent nodal load: `f_k = sum_f area_f t_f . trace_f(e_k)`.
    pub fn load_vector(&self, t: &TractionField) -> Result<Vec<f64>> {
        self.check_traction(t)?;
        let mut f = vec![0.0; self.n_dof];
        for ((forms, area), tf) in self.trace_map.iter().zip(&self.areas).zip(&t.facets) {
            for (form, ti) in forms.iter().zip(tf) {
                for &(k, a) in &form.0 {
                    f[k] += area * ti * a;
                }
            }
        }
        Ok(f)
    }

    /// Dense strain operator: one row per element component.
    pub fn strain_matrix(&self) -> DMatrix<f64> {
        let rows: Vec<&LinearForm> = self.strain_map.iter().flatten().collect();
        let mut m = DMatrix::zeros(rows.len(), self.n_dof);
        for (r, form) in rows.iter().enumerate() {
            for &(k, a) in &form.0 {
                m[(r, k)] += a;
            }
        }
        m
    }
}

pub fn strain(ops: &DiscreteOperators, w: &VelocityField) -> Result<Vec<SymMatrix>> {
    ops.check_field(w)?;
    Ok(ops
        .strain_map
        .iter()
        .map(|forms| {
            let comps: Vec<f64> = forms.iter().map(|f| f.apply(&w.dof_values)).collect();
            SymMatrix::from_components(ops.dim, &comps).expect("component count")
        })
        .collect())
}

/// `sum_e volume_e |eps_e|_1`, the norm of `w` in the clamped space.
pub fn strain_norm_l1(ops: &DiscreteOperators, w: &VelocityField) -> Result<f64> {
    Ok(strain(ops, w)?
        .iter()
        .zip(&ops.volumes)
        .map(|(e, v)| v * mat_norm(e, ops.norm_pair.primal))
        .sum())
}

/// `sum_e volume_e` times the dual of the yield seminorm of `eps_e`.
///
/// This is the kinematic norm paired with deviatoric stress bounds; on
/// isochoric 2D fields it equals [`strain_norm_l1`].
pub fn deviatoric_strain_norm(ops: &DiscreteOperators, w: &VelocityField) -> Result<f64> {
    Ok(strain(ops, w)?
        .iter()
        .zip(&ops.volumes)
        .map(|(e, v)| v * deviatoric_dual_norm(e))
        .sum())
}

/// Facet-averaged boundary values on `gammaT`.
pub fn trace(ops: &DiscreteOperators, w: &VelocityField) -> Result<Vec<Vec<f64>>> {
    ops.check_field(w)?;
    Ok(ops
        .trace_map
        .iter()
        .map(|forms| forms.iter().map(|f| f.apply(&w.dof_values)).collect())
        .collect())
}

pub fn trace_norm_l1(ops: &DiscreteOperators, w: &VelocityField) -> Result<f64> {
    Ok(trace(ops, w)?
        .iter()
        .zip(&ops.areas)
        .map(|(v, a)| a * vec_norm(v, ops.norm_pair.primal))
        .sum())
}

pub fn external_work(ops: &DiscreteOperators, t: &TractionField, w: &VelocityField) -> Result<f64> {
    ops.check_traction(t)?;
    Ok(trace(ops, w)?
        .iter()
        .zip(&ops.areas)
        .zip(&t.facets)
        .map(|((v, a), tf)| a * v.iter().zip(tf).map(|(x, y)| x * y).sum::<f64>())
        .sum())
}

pub fn traction_sup_norm(ops: &DiscreteOperators, t: &TractionField) -> Result<f64> {
    ops.check_traction(t)?;
    Ok(t.facets
        .iter()
        .map(|v| vec_norm(v, ops.norm_pair.dual))
        .fold(0.0, f64::max))
}

/// One form per element: the trace of its strain. Their common kernel is
/// the isochoric subspace.
pub fn isochoric_constraints(ops: &DiscreteOperators) -> Vec<LinearForm> {
    ops.strain_map
        .iter()
        .map(|forms| {
            let mut sum = LinearForm::default();
            for form in &forms[..ops.dim] {
                for &(k, a) in &form.0 {
                    sum.add(k, a);
                }
            }
            sum.sorted()
        })
        .collect()
}

fn nullity(m: &DMatrix<f64>, cols: usize) -> usize {
    if cols == 0 {
        return 0;
    }
    if m.nrows() == 0 {
        return cols;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let smax = sv.max();
    let rank = if smax > 0.0 {
        sv.iter().filter(|&&s| s > 1e-9 * smax).count()
    } else {
        0
    };
    cols - rank
}

/// Dimension of the nullspace of the strain operator.
pub fn rigid_kernel_dim(ops: &DiscreteOperators) -> usize {
    nullity(&ops.strain_matrix(), ops.n_dof)
}

/// Dimension of the isochoric subspace.
pub fn isochoric_dim(ops: &DiscreteOperators) -> usize {
    let forms = isochoric_constraints(ops);
    let mut m = DMatrix::zeros(forms.len(), ops.n_dof);
    for (r, form) in forms.iter().enumerate() {
        for &(k, a) in &form.0 {
            m[(r, k)] += a;
        }
    }
    nullity(&m, ops.n_dof)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_bar, generate_rectangle, generate_tet_pair, Edge};
    use proptest::prelude::*;

    fn bar_ops() -> DiscreteOperators {
        assemble(&generate_bar(1.0, 1.0, 1).unwrap(), NormPair::L1_LINF).unwrap()
    }

    fn rect(nx: usize, ny: usize) -> Mesh {
        generate_rectangle(1.0, 1.0, nx, ny, Edge::Left, Edge::Right).unwrap()
    }

    #[test]
    fn bar_assembly_by_hand() {
        let ops = bar_ops();
        assert_eq!(ops.n_dof, 1);
        assert_eq!(ops.strain_map[0][0], LinearForm(vec![(0, 1.0)]));
        assert_eq!(ops.volumes, vec![1.0]);
        assert_eq!(ops.areas, vec![1.0]);
    }

    #[test]
    fn bar_evaluations() {
        let ops = bar_ops();
        let w = VelocityField::new(vec![0.5]);
        assert_eq!(strain(&ops, &w).unwrap()[0].components(), &[0.5]);
        let w = VelocityField::new(vec![1.0]);
        assert_eq!(strain_norm_l1(&ops, &w).unwrap(), 1.0);
        assert_eq!(trace(&ops, &w).unwrap(), vec![vec![1.0]]);
        assert_eq!(trace_norm_l1(&ops, &w).unwrap(), 1.0);
        let t = TractionField { facets: vec![vec![1.0]] };
        assert_eq!(external_work(&ops, &t, &w).unwrap(), 1.0);
        assert_eq!(strain_norm_l1(&ops, &w.scale(2.0)).unwrap(), 2.0);
        assert!(strain(&ops, &VelocityField::new(vec![])).is_err());
    }

    #[test]
    fn zero_field() {
        let ops = assemble(&rect(2, 2), NormPair::L1_LINF).unwrap();
        let w = VelocityField::new(vec![0.0; ops.n_dof]);
        assert!(strain(&ops, &w).unwrap().iter().all(|e| e.components().iter().all(|&v| v == 0.0)));
        assert_eq!(strain_norm_l1(&ops, &w).unwrap(), 0.0);
        assert_eq!(trace_norm_l1(&ops, &w).unwrap(), 0.0);
    }

    #[test]
    fn affine_field_on_right_triangle() {
        let mut mesh = rect(1, 1);
        mesh.elements.truncate(1);
        mesh.facets.retain(|f| f.nodes == vec![0, 1] || f.nodes == vec![1, 3]);
        mesh.facets[0].label = crate::mesh::FacetLabel::Gamma0;
        mesh.facets[1].label = crate::mesh::FacetLabel::GammaT;
        let ops = assemble_with(&mesh, NormPair::L1_LINF, Clamping::None).unwrap();
        let w = ops.interpolate(|x| vec![x[0], 0.0]);
        assert_eq!(strain(&ops, &w).unwrap()[0], SymMatrix::diag(&[1.0, 0.0]));
    }

    #[test]
    fn rigid_motions_have_zero_strain() {
        let ops = assemble_with(&rect(2, 2), NormPair::L1_LINF, Clamping::None).unwrap();
        for w in [
            ops.interpolate(|_| vec![0.3, -1.2]),
            ops.interpolate(|x| vec![-x[1], x[0]]),
        ] {
            for e in strain(&ops, &w).unwrap() {
                assert!(e.components().iter().all(|v| v.abs() < 1e-12), "{e:?}");
            }
        }
        // constant field: every facet value is the constant
        let w = ops.interpolate(|_| vec![0.25, -2.0]);
        for v in trace(&ops, &w).unwrap() {
            assert_eq!(v, vec![0.25, -2.0]);
        }
    }

    #[test]
    fn kernel_dimensions() {
        let m2 = rect(2, 2);
        let m3 = generate_tet_pair(1.0).unwrap();
        let free = |m: &Mesh| assemble_with(m, NormPair::L1_LINF, Clamping::None).unwrap();
        assert_eq!(rigid_kernel_dim(&free(&m2)), 3);
        assert_eq!(rigid_kernel_dim(&free(&m3)), 6);
        assert_eq!(rigid_kernel_dim(&free(&generate_bar(1.0, 1.0, 3).unwrap())), 1);
        for m in [&m2, &m3] {
            assert_eq!(rigid_kernel_dim(&assemble(m, NormPair::L1_LINF).unwrap()), 0);
        }
    }

    #[test]
    fn isochoric_subspace() {
        let bar = bar_ops();
        assert_eq!(isochoric_constraints(&bar)[0], LinearForm(vec![(0, 1.0)]));
        assert_eq!(isochoric_dim(&bar), 0);

        let ops = assemble_with(&rect(1, 1), NormPair::L1_LINF, Clamping::None).unwrap();
        let shear = ops.interpolate(|x| vec![x[1], 0.0]);
        let dilation = ops.interpolate(|x| vec![x[0], x[1]]);
        for form in isochoric_constraints(&ops) {
            assert!(form.apply(&shear.dof_values).abs() < 1e-12);
            assert!((form.apply(&dilation.dof_values) - 2.0).abs() < 1e-12);
        }
        let clamped = assemble(&rect(2, 2), NormPair::L1_LINF).unwrap();
        assert_eq!(isochoric_dim(&clamped), clamped.n_dof - clamped.element_count());
    }

    #[test]
    fn traction_shapes_and_norms() {
        let ops = assemble(&rect(1, 1), NormPair::L1_LINF).unwrap();
        let mut t = TractionField::zeros(&ops);
        assert_eq!(traction_sup_norm(&ops, &t).unwrap(), 0.0);
        t.facets[0] = vec![3.0, -4.0];
        assert_eq!(traction_sup_norm(&ops, &t).unwrap(), 4.0);
        assert_eq!(traction_sup_norm(&ops, &t.scale(-2.5)).unwrap(), 10.0);
        t.facets.pop();
        assert!(traction_sup_norm(&ops, &t).is_err());
        let t = TractionField::from_json_str(r#"{"facets": [[1, 2], [0, 0], [0, 0]]}"#).unwrap();
        assert!(ops.check_traction(&t).is_ok());
        assert!(TractionField::from_json_str(r#"{"facet": []}"#).is_err());
    }

    #[test]
    fn unsupported_norm_pair() {
        let pair = "linfl1".parse::<NormPair>().unwrap();
        assert!(matches!(
            assemble(&rect(1, 1), pair),
            Err(Error::UnsupportedNormPair)
        ));
    }

    fn meshes() -> Vec<Mesh> {
        vec![
            generate_bar(2.0, 1.5, 3).unwrap(),
            rect(2, 3),
            generate_rectangle(2.0, 0.5, 3, 1, Edge::Bottom, Edge::Top).unwrap(),
            generate_tet_pair(1.3).unwrap(),
        ]
    }

    proptest! {
        #[test]
        fn exact_on_affine_fields(
            grad in prop::collection::vec(-3.0f64..3.0, 9),
            shift in prop::collection::vec(-3.0f64..3.0, 3),
        ) {
            for mesh in meshes() {
                let ops = assemble_with(&mesh, NormPair::L1_LINF, Clamping::None).unwrap();
                let d = ops.dim;
                let w = ops.interpolate(|x| {
                    (0..d).map(|i| shift[i] + (0..d).map(|j| grad[i * 3 + j] * x[j]).sum::<f64>()).collect()
                });
                for e in strain(&ops, &w).unwrap() {
                    for i in 0..d {
                        for j in 0..d {
                            let exact = 0.5 * (grad[i * 3 + j] + grad[j * 3 + i]);
                            prop_assert!((e.get(i, j) - exact).abs() < 1e-12);
                        }
                    }
                }
                // trace consistency on the boundary
                for (f, v) in ops.gamma_t.iter().zip(trace(&ops, &w).unwrap()) {
                    let nodes = &mesh.facets[*f].nodes;
                    let centroid: Vec<f64> = (0..d)
                        .map(|j| nodes.iter().map(|&n| mesh.nodes[n][j]).sum::<f64>() / nodes.len() as f64)
                        .collect();
                    for i in 0..d {
                        let exact = shift[i] + (0..d).map(|j| grad[i * 3 + j] * centroid[j]).sum::<f64>();
                        prop_assert!((v[i] - exact).abs() < 1e-12);
                    }
                }
            }
        }

        #[test]
        fn clamped_strain_is_injective(seed in prop::collection::vec(-1.0f64..1.0, 40)) {
            for mesh in meshes() {
                let ops = assemble(&mesh, NormPair::L1_LINF).unwrap();
                let w = VelocityField::new(seed[..ops.n_dof].to_vec());
                let norm = strain_norm_l1(&ops, &w).unwrap();
                let size = w.dof_values.iter().map(|v| v.abs()).fold(0.0, f64::max);
                // strain norm vanishes only for w = 0; bounded below on the unit ball
                prop_assert!(norm > 1e-6 * size || size == 0.0);
            }
        }

        #[test]
        fn boundary_holder(
            w in prop::collection::vec(-1.0f64..1.0, 40),
            t in prop::collection::vec(-5.0f64..5.0, 40),
        ) {
            for mesh in meshes() {
                let ops = assemble(&mesh, NormPair::L1_LINF).unwrap();
                let w = VelocityField::new(w[..ops.n_dof].to_vec());
                let t = TractionField::from_flat(&ops, &t[..ops.boundary_components()]).unwrap();
                let work = external_work(&ops, &t, &w).unwrap();
                let bound = traction_sup_norm(&ops, &t).unwrap() * trace_norm_l1(&ops, &w).unwrap();
                prop_assert!(work.abs() <= bound * (1.0 + 1e-9) + 1e-12);
                let f = ops.load_vector(&t).unwrap();
                let via_load: f64 = f.iter().zip(&w.dof_values).map(|(a, b)| a * b).sum();
                prop_assert!((via_load - work).abs() < 1e-12 * (1.0 + work.abs()));
            }
        }

        #[test]
        fn work_is_bilinear(
            w in prop::collection::vec(-1.0f64..1.0, 6),
            t in prop::collection::vec(-5.0f64..5.0, 15),
        ) {
            let ops = assemble(&generate_tet_pair(1.0).unwrap(), NormPair::L1_LINF).unwrap();
            let w = VelocityField::new(w);
            let t = TractionField::from_flat(&ops, &t).unwrap();
            let base = external_work(&ops, &t, &w).unwrap();
            let scaled = external_work(&ops, &t.scale(2.0), &w.scale(3.0)).unwrap();
            prop_assert!((scaled - 6.0 * base).abs() < 1e-12 * (1.0 + base.abs()));
        }

        #[test]
        fn deviatoric_norm_matches_l1_on_isochoric_2d(seed in prop::collection::vec(-1.0f64..1.0, 12)) {
            // Project a random field onto the isochoric subspace of a 2D mesh.
            let ops = assemble(&rect(2, 2), NormPair::L1_LINF).unwrap();
            let forms = isochoric_constraints(&ops);
            let mut c = DMatrix::zeros(forms.len(), ops.n_dof);
            for (r, form) in forms.iter().enumerate() {
                for &(k, a) in &form.0 { c[(r, k)] = a; }
            }
            let svd = c.clone().svd(false, true);
            let vt = svd.v_t.unwrap();
            let rank = svd.singular_values.iter().filter(|&&s| s > 1e-9).count();
            let mut w = nalgebra::DVector::from_column_slice(&seed[..ops.n_dof]);
            for r in 0..rank {
                let row = vt.row(r).transpose();
                let k = row.dot(&w);
                w -= row * k;
            }
            let w = VelocityField::new(w.iter().copied().collect());
            for form in &forms {
                prop_assert!(form.apply(&w.dof_values).abs() < 1e-10);
            }
            let a = strain_norm_l1(&ops, &w).unwrap();
            let b = deviatoric_strain_norm(&ops, &w).unwrap();
            prop_assert!((a - b).abs() < 1e-9 * (1.0 + a));
        }
    }
}
