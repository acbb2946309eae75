//! Polyhedral matrix and vector norms, the spherical/deviatoric split and
//! the yield seminorm built on top of it.
//!
//! Symmetric matrices store their unique entries only, in Voigt order:
//!
//! ```text
//! dim 1: [xx]
//! dim 2: [xx, yy, xy]
//! dim 3: [xx, yy, zz, yz, xz, xy]
//! ```
//!
//! Every norm and the pairing act on the full `dim x dim` matrix, so an
//! off-diagonal entry is counted twice in sums and once in maxima.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Identifier of an entrywise matrix (and vector) norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NormId {
    /// Sum of absolute values over all positions.
    #[serde(rename = "l1")]
    EntrywiseOne,
    /// Largest absolute value over all positions.
    #[serde(rename = "linf")]
    EntrywiseInf,
}

impl NormId {
    pub fn dual(self) -> NormId {
        match self {
            NormId::EntrywiseOne => NormId::EntrywiseInf,
            NormId::EntrywiseInf => NormId::EntrywiseOne,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            NormId::EntrywiseOne => "l1",
            NormId::EntrywiseInf => "linf",
        }
    }
}

impl fmt::Display for NormId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NormId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "l1" => Ok(NormId::EntrywiseOne),
            "linf" => Ok(NormId::EntrywiseInf),
            other => Err(Error::UnknownNorm(other.to_string())),
        }
    }
}

/// Returns the dual of `id` under [`dual_pairing`].
pub fn dual_norm_id(id: NormId) -> NormId {
    id.dual()
}

/// A strain-side norm together with its dual on the stress side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormPair {
    pub primal: NormId,
    pub dual: NormId,
}

impl NormPair {
    /// Entrywise-1 on strains and velocities, entrywise-inf on stresses and
    /// tractions.
    pub const L1_LINF: NormPair = NormPair {
        primal: NormId::EntrywiseOne,
        dual: NormId::EntrywiseInf,
    };

    pub fn new(primal: NormId, dual: NormId) -> Result<Self, Error> {
        if primal.dual() != dual {
            return Err(Error::NotDualPair { primal, dual });
        }
        Ok(NormPair { primal, dual })
    }

    pub fn id(&self) -> String {
        format!("{}{}", self.primal, self.dual)
    }
}

impl Default for NormPair {
    fn default() -> Self {
        NormPair::L1_LINF
    }
}

impl FromStr for NormPair {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "l1linf" => Ok(NormPair::L1_LINF),
            "linfl1" => NormPair::new(NormId::EntrywiseInf, NormId::EntrywiseOne),
            other => Err(Error::UnknownNorm(other.to_string())),
        }
    }
}

/// Number of unique entries of a symmetric `dim x dim` matrix.
pub const fn component_count(dim: usize) -> usize {
    dim * (dim + 1) / 2
}

/// Row/column position of Voigt component `c` for the given dimension.
pub fn component_position(dim: usize, c: usize) -> (usize, usize) {
    match (dim, c) {
        (1, 0) => (0, 0),
        (2, 0) => (0, 0),
        (2, 1) => (1, 1),
        (2, 2) => (0, 1),
        (3, 0) => (0, 0),
        (3, 1) => (1, 1),
        (3, 2) => (2, 2),
        (3, 3) => (1, 2),
        (3, 4) => (0, 2),
        (3, 5) => (0, 1),
        _ => panic!("component {c} out of range for dimension {dim}"),
    }
}

/// Voigt index of position `(i, j)`.
pub fn component_index(dim: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    if i == j {
        return i;
    }
    match (dim, i, j) {
        (2, 0, 1) => 2,
        (3, 1, 2) => 3,
        (3, 0, 2) => 4,
        (3, 0, 1) => 5,
        _ => panic!("position ({i}, {j}) out of range for dimension {dim}"),
    }
}

/// How many times a Voigt component appears in the full matrix (1 or 2).
pub fn multiplicity(dim: usize, c: usize) -> f64 {
    if c < dim {
        1.0
    } else {
        2.0
    }
}

/// Symmetric matrix of dimension 1, 2 or 3.
#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SymMatrixRepr", into = "SymMatrixRepr")]
pub struct SymMatrix {
    dim: usize,
    c: [f64; 6],
}

#[derive(Serialize, Deserialize)]
struct SymMatrixRepr {
    dim: usize,
    components: Vec<f64>,
}

impl TryFrom<SymMatrixRepr> for SymMatrix {
    type Error = Error;

    fn try_from(r: SymMatrixRepr) -> Result<Self, Self::Error> {
        SymMatrix::from_components(r.dim, &r.components)
    }
}

impl From<SymMatrix> for SymMatrixRepr {
    fn from(m: SymMatrix) -> Self {
        SymMatrixRepr {
            dim: m.dim,
            components: m.components().to_vec(),
        }
    }
}

impl fmt::Debug for SymMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SymMatrix{}{:?}", self.dim, self.components())
    }
}

impl SymMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!((1..=3).contains(&dim), "dimension must be 1, 2 or 3");
        SymMatrix { dim, c: [0.0; 6] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = SymMatrix::zeros(dim);
        for i in 0..dim {
            m.c[i] = 1.0;
        }
        m
    }

    pub fn diag(entries: &[f64]) -> Self {
        let mut m = SymMatrix::zeros(entries.len());
        m.c[..entries.len()].copy_from_slice(entries);
        m
    }

    pub fn from_components(dim: usize, components: &[f64]) -> Result<Self, Error> {
        if !(1..=3).contains(&dim) {
            return Err(Error::BadDimension(dim));
        }
        if components.len() != component_count(dim) {
            return Err(Error::ComponentCount {
                dim,
                expected: component_count(dim),
                got: components.len(),
            });
        }
        let mut m = SymMatrix::zeros(dim);
        m.c[..components.len()].copy_from_slice(components);
        Ok(m)
    }

    /// Builds a symmetric matrix from a full row-major array; only the
    /// upper triangle is read.
    pub fn from_full(dim: usize, rows: &[&[f64]]) -> Self {
        let mut m = SymMatrix::zeros(dim);
        for i in 0..dim {
            for j in i..dim {
                m.set(i, j, rows[i][j]);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> &[f64] {
        &self.c[..component_count(self.dim)]
    }

    pub fn components_mut(&mut self) -> &mut [f64] {
        let n = component_count(self.dim);
        &mut self.c[..n]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.c[component_index(self.dim, i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.c[component_index(self.dim, i, j)] = v;
    }

    pub fn trace(&self) -> f64 {
        self.c[..self.dim].iter().sum()
    }

    pub fn scale(&self, k: f64) -> Self {
        let mut m = *self;
        m.components_mut().iter_mut().for_each(|v| *v *= k);
        m
    }

    pub fn add(&self, other: &SymMatrix) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut m = *self;
        for (a, b) in m.components_mut().iter_mut().zip(other.components()) {
            *a += b;
        }
        m
    }

    pub fn sub(&self, other: &SymMatrix) -> Self {
        self.add(&other.scale(-1.0))
    }

    /// Zero-padded 3x3 embedding (plane-strain convention for 2D input).
    pub fn embed3(&self) -> SymMatrix {
        let mut m = SymMatrix::zeros(3);
        for i in 0..self.dim {
            for j in i..self.dim {
                m.set(i, j, self.get(i, j));
            }
        }
        m
    }

    pub fn is_finite(&self) -> bool {
        self.components().iter().all(|v| v.is_finite())
    }
}

pub fn mat_norm(m: &SymMatrix, id: NormId) -> f64 {
    let dim = m.dim();
    let weighted = m
        .components()
        .iter()
        .enumerate()
        .map(|(c, v)| (multiplicity(dim, c), v.abs()));
    match id {
        NormId::EntrywiseOne => weighted.map(|(k, a)| k * a).sum(),
        NormId::EntrywiseInf => weighted.map(|(_, a)| a).fold(0.0, f64::max),
    }
}

/// `sum_ij s_ij e_ij` over all `dim^2` positions.
pub fn dual_pairing(s: &SymMatrix, e: &SymMatrix) -> Result<f64, Error> {
    if s.dim() != e.dim() {
        return Err(Error::DimensionMismatch {
            expected: s.dim(),
            got: e.dim(),
        });
    }
    let dim = s.dim();
    Ok(s.components()
        .iter()
        .zip(e.components())
        .enumerate()
        .map(|(c, (a, b))| multiplicity(dim, c) * a * b)
        .sum())
}

/// `(1/3) tr(m) I`, with `m` embedded as 3x3.
pub fn proj_spherical(m: &SymMatrix) -> SymMatrix {
    SymMatrix::identity(3).scale(m.trace() / 3.0)
}

/// `m - proj_spherical(m)`, with `m` embedded as 3x3.
pub fn proj_deviatoric(m: &SymMatrix) -> SymMatrix {
    m.embed3().sub(&proj_spherical(m))
}

/// Yield seminorm `|proj_deviatoric(s)|`.
pub fn yield_value(s: &SymMatrix, id: NormId) -> f64 {
    mat_norm(&proj_deviatoric(s), id)
}

/// Dual of the entrywise-inf yield seminorm, evaluated on a strain:
/// `sup { s : e | s deviatoric, |s|_inf <= 1 }`.
///
/// The traceless part of the unit cube has the permutations of `(1, -1, 0)`
/// as vertices, so the diagonal contributes `max(e_ii) - min(e_ii)` and each
/// off-diagonal pair contributes `2 |e_ij|`. Adding a spherical part to `e`
/// leaves the value unchanged. On traceless 2D strains (embedded with a zero
/// third row) it coincides with the entrywise-1 norm; on traceless 3D strains
/// it can be strictly smaller.
pub fn deviatoric_dual_norm(e: &SymMatrix) -> f64 {
    let e3 = e.embed3();
    let d = &e3.components()[..3];
    let max = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = d.iter().copied().fold(f64::INFINITY, f64::min);
    let off: f64 = e3.components()[3..].iter().map(|v| 2.0 * v.abs()).sum();
    (max - min) + off
}

pub fn vec_norm(v: &[f64], id: NormId) -> f64 {
    match id {
        NormId::EntrywiseOne => v.iter().map(|x| x.abs()).sum(),
        NormId::EntrywiseInf => v.iter().map(|x| x.abs()).fold(0.0, f64::max),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn shear3() -> SymMatrix {
        SymMatrix::from_full(3, &[&[0.0, 1.0, 0.0], &[1.0, 0.0, 0.0], &[0.0, 0.0, 0.0]])
    }

    #[test]
    fn mat_norm_examples() {
        assert_eq!(mat_norm(&SymMatrix::identity(2), NormId::EntrywiseOne), 2.0);
        let m = SymMatrix::from_full(2, &[&[0.0, 3.0], &[3.0, 0.0]]);
        assert_eq!(mat_norm(&m, NormId::EntrywiseOne), 6.0);
        assert_eq!(mat_norm(&m, NormId::EntrywiseInf), 3.0);
        for id in [NormId::EntrywiseOne, NormId::EntrywiseInf] {
            assert_eq!(mat_norm(&SymMatrix::zeros(3), id), 0.0);
        }
    }

    #[test]
    fn pairing_examples() {
        let i = SymMatrix::identity(2);
        assert_eq!(dual_pairing(&i, &i).unwrap(), 2.0);
        let s = SymMatrix::from_full(2, &[&[0.0, 1.0], &[1.0, 0.0]]);
        assert_eq!(dual_pairing(&s, &s).unwrap(), 2.0);
        assert_eq!(dual_pairing(&s, &SymMatrix::zeros(2)).unwrap(), 0.0);
        assert!(dual_pairing(&s, &SymMatrix::zeros(3)).is_err());
    }

    #[test]
    fn projection_examples() {
        let i3 = SymMatrix::identity(3);
        assert_eq!(proj_spherical(&i3), i3);
        assert_eq!(proj_deviatoric(&i3), SymMatrix::zeros(3));

        let m = SymMatrix::diag(&[3.0, 0.0, 0.0]);
        assert_eq!(proj_spherical(&m), i3);
        assert_eq!(proj_deviatoric(&m), SymMatrix::diag(&[2.0, -1.0, -1.0]));

        assert_eq!(proj_spherical(&shear3()), SymMatrix::zeros(3));
        assert_eq!(proj_deviatoric(&shear3()), shear3());
    }

    #[test]
    fn yield_examples() {
        for p in [-2.5, 0.0, 1.0, 7.0] {
            assert_eq!(yield_value(&SymMatrix::identity(3).scale(p), NormId::EntrywiseInf), 0.0);
        }
        let m = SymMatrix::diag(&[3.0, 0.0, 0.0]);
        assert_eq!(yield_value(&m, NormId::EntrywiseInf), 2.0);
        assert_eq!(yield_value(&shear3(), NormId::EntrywiseOne), 2.0);
    }

    #[test]
    fn dual_id_is_involution() {
        assert_eq!(dual_norm_id(NormId::EntrywiseOne), NormId::EntrywiseInf);
        assert_eq!(dual_norm_id(NormId::EntrywiseInf), NormId::EntrywiseOne);
        for id in [NormId::EntrywiseOne, NormId::EntrywiseInf] {
            assert_eq!(dual_norm_id(dual_norm_id(id)), id);
            assert_eq!(id.as_str().parse::<NormId>().unwrap(), id);
        }
        assert!("l2".parse::<NormId>().is_err());
        assert!(NormPair::new(NormId::EntrywiseOne, NormId::EntrywiseOne).is_err());
        assert_eq!("l1linf".parse::<NormPair>().unwrap(), NormPair::L1_LINF);
    }

    #[test]
    fn deviatoric_dual_norm_values() {
        // Traceless 2D strains: same as entrywise-1.
        let e = SymMatrix::from_full(2, &[&[0.7, -0.2], &[-0.2, -0.7]]);
        assert!((deviatoric_dual_norm(&e) - mat_norm(&e, NormId::EntrywiseOne)).abs() < 1e-15);
        // 3D: strictly smaller than entrywise-1.
        let e = SymMatrix::diag(&[2.0, -1.0, -1.0]);
        assert_eq!(deviatoric_dual_norm(&e), 3.0);
        assert_eq!(mat_norm(&e, NormId::EntrywiseOne), 4.0);
    }

    fn sym(dim: usize) -> impl Strategy<Value = SymMatrix> {
        prop::collection::vec(-10.0f64..10.0, component_count(dim))
            .prop_map(move |v| SymMatrix::from_components(dim, &v).unwrap())
    }

    fn sym_any() -> impl Strategy<Value = SymMatrix> {
        (1usize..=3).prop_flat_map(sym)
    }

    /// Entrywise-inf-aligned extremizer for an entrywise-1 measured `e`
    /// (and vice versa): sign pattern, or the indicator of the largest entry.
    fn aligned(e: &SymMatrix, id: NormId) -> SymMatrix {
        let mut s = SymMatrix::zeros(e.dim());
        match id {
            NormId::EntrywiseOne => {
                for (a, b) in s.components_mut().iter_mut().zip(e.components()) {
                    *a = b.signum();
                }
            }
            NormId::EntrywiseInf => {
                let dim = e.dim();
                let (c, v) = e
                    .components()
                    .iter()
                    .enumerate()
                    .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
                    .unwrap();
                s.components_mut()[c] = v.signum() / multiplicity(dim, c);
            }
        }
        s
    }

    proptest! {
        #[test]
        fn duality_inequality_and_equality(
            (s, e) in (1usize..=3).prop_flat_map(|d| (sym(d), sym(d)))
        ) {
            for id in [NormId::EntrywiseOne, NormId::EntrywiseInf] {
                let lhs = dual_pairing(&s, &e).unwrap().abs();
                let rhs = mat_norm(&s, id.dual()) * mat_norm(&e, id);
                prop_assert!(lhs <= rhs * (1.0 + 1e-12) + 1e-12);

                let x = aligned(&e, id);
                prop_assert!(mat_norm(&x, id.dual()) <= 1.0 + 1e-12);
                let attained = dual_pairing(&x, &e).unwrap();
                prop_assert!((attained - mat_norm(&e, id)).abs() <= 1e-9 * (1.0 + attained.abs()));
            }
        }

        #[test]
        fn projections_are_complementary(m in sym_any()) {
            let p = proj_spherical(&m);
            let d = proj_deviatoric(&m);
            let sum = p.add(&d);
            for (a, b) in sum.components().iter().zip(m.embed3().components()) {
                prop_assert!((a - b).abs() < 1e-12);
            }
            prop_assert!(d.trace().abs() < 1e-12);
            let close = |a: &SymMatrix, b: &SymMatrix| {
                a.components().iter().zip(b.components()).all(|(x, y)| (x - y).abs() < 1e-12)
            };
            prop_assert!(close(&proj_spherical(&p), &p));
            prop_assert!(close(&proj_deviatoric(&d), &d));
            prop_assert!(close(&proj_spherical(&d), &SymMatrix::zeros(3)));
        }

        #[test]
        fn yield_ignores_spherical_shift(m in sym(3), p in -50.0f64..50.0) {
            let shifted = m.add(&SymMatrix::identity(3).scale(p));
            for id in [NormId::EntrywiseOne, NormId::EntrywiseInf] {
                prop_assert!((yield_value(&shifted, id) - yield_value(&m, id)).abs() < 1e-12 * (1.0 + p.abs()));
            }
            prop_assert!((deviatoric_dual_norm(&shifted) - deviatoric_dual_norm(&m)).abs() < 1e-10);
        }

        #[test]
        fn deviatoric_dual_bounds_pairing(s in sym(3), e in sym(3)) {
            // |pi_D(s) : e| <= Y(s) * dual(e)
            let lhs = dual_pairing(&proj_deviatoric(&s), &e).unwrap().abs();
            let rhs = yield_value(&s, NormId::EntrywiseInf) * deviatoric_dual_norm(&e);
            prop_assert!(lhs <= rhs * (1.0 + 1e-12) + 1e-12);
        }
    }
}
