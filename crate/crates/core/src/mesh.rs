//! Simplicial meshes with a boundary split into a supported part (`gamma0`)
//! and a loaded part (`gammaT`).

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ElementKind {
    Bar,
    Triangle,
    Tetrahedron,
}

impl ElementKind {
    /// Spatial dimension the element lives in (bars are 1D only).
    pub fn dim(self) -> usize {
        match self {
            ElementKind::Bar => 1,
            ElementKind::Triangle => 2,
            ElementKind::Tetrahedron => 3,
        }
    }

    pub fn node_count(self) -> usize {
        self.dim() + 1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Element {
    pub kind: ElementKind,
    pub nodes: Vec<usize>,
    /// Cross-section area, bars only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub area: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FacetLabel {
    #[serde(rename = "gamma0")]
    Gamma0,
    #[serde(rename = "gammaT")]
    GammaT,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Facet {
    pub nodes: Vec<usize>,
    pub label: FacetLabel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Mesh {
    pub dim: usize,
    pub nodes: Vec<Vec<f64>>,
    pub elements: Vec<Element>,
    pub facets: Vec<Facet>,
}

/// Side of a rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Edge {
    Left,
    Right,
    Bottom,
    Top,
}

impl FromStr for Edge {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "left" => Ok(Edge::Left),
            "right" => Ok(Edge::Right),
            "bottom" => Ok(Edge::Bottom),
            "top" => Ok(Edge::Top),
            other => Err(Error::InvalidArgument(format!(
                "unknown edge `{other}` (expected left, right, bottom or top)"
            ))),
        }
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Edge::Left => "left",
            Edge::Right => "right",
            Edge::Bottom => "bottom",
            Edge::Top => "top",
        };
        f.write_str(s)
    }
}

/// Measure of the simplex spanned by `points` (length, area or volume),
/// computed in its own affine hull.
fn simplex_measure(points: &[&[f64]]) -> f64 {
    let k = points.len() - 1;
    if k == 0 {
        return 1.0;
    }
    let n = points[0].len();
    let edges = DMatrix::from_fn(n, k, |r, c| points[c + 1][r] - points[0][r]);
    let factorial: f64 = (1..=k).map(|i| i as f64).product();
    if k == n {
        return edges.determinant().abs() / factorial;
    }
    let gram = edges.transpose() * &edges;
    gram.determinant().max(0.0).sqrt() / factorial
}

fn sorted(nodes: &[usize]) -> Vec<usize> {
    let mut v = nodes.to_vec();
    v.sort_unstable();
    v
}

impl Mesh {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    fn points(&self, idx: &[usize]) -> Vec<&[f64]> {
        idx.iter().map(|&i| self.nodes[i].as_slice()).collect()
    }

    /// Geometric measure of element `e`, without the bar cross-section.
    pub fn element_measure(&self, e: usize) -> f64 {
        simplex_measure(&self.points(&self.elements[e].nodes))
    }

    /// Integration weight of element `e`: measure times bar cross-section.
    pub fn element_volume(&self, e: usize) -> f64 {
        let el = &self.elements[e];
        self.element_measure(e) * el.area.unwrap_or(1.0)
    }

    /// Index of the single element having facet `f` as a face.
    pub fn facet_owner(&self, f: usize) -> Option<usize> {
        let key = sorted(&self.facets[f].nodes);
        let mut owners = self
            .elements
            .iter()
            .enumerate()
            .filter(|(_, el)| key.iter().all(|n| el.nodes.contains(n)));
        let first = owners.next()?;
        match owners.next() {
            Some(_) => None,
            None => Some(first.0),
        }
    }

    /// Facet measure; 1D facets (single nodes) take the owning bar's area.
    pub fn facet_area(&self, f: usize) -> f64 {
        if self.dim == 1 {
            return self
                .facet_owner(f)
                .and_then(|e| self.elements[e].area)
                .unwrap_or(1.0);
        }
        simplex_measure(&self.points(&self.facets[f].nodes))
    }

    pub fn facets_labeled(&self, label: FacetLabel) -> Vec<usize> {
        self.facets
            .iter()
            .enumerate()
            .filter(|(_, f)| f.label == label)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn gamma0(&self) -> Vec<usize> {
        self.facets_labeled(FacetLabel::Gamma0)
    }

    pub fn gamma_t(&self) -> Vec<usize> {
        self.facets_labeled(FacetLabel::GammaT)
    }

    /// Per node, whether it lies on a `gamma0` facet.
    pub fn clamped_nodes(&self) -> Vec<bool> {
        let mut clamped = vec![false; self.nodes.len()];
        for f in self.facets.iter().filter(|f| f.label == FacetLabel::Gamma0) {
            for &n in &f.nodes {
                if n < clamped.len() {
                    clamped[n] = true;
                }
            }
        }
        clamped
    }

    pub fn is_connected(&self) -> bool {
        if self.nodes.is_empty() {
            return true;
        }
        let mut parent: Vec<usize> = (0..self.nodes.len()).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for el in &self.elements {
            for w in el.nodes.windows(2) {
                let (a, b) = (find(&mut parent, w[0]), find(&mut parent, w[1]));
                parent[a] = b;
            }
        }
        let used: Vec<usize> = (0..self.nodes.len())
            .filter(|n| self.elements.iter().any(|el| el.nodes.contains(n)))
            .collect();
        let Some(&first) = used.first() else {
            return true;
        };
        let root = find(&mut parent, first);
        used.iter().all(|&n| find(&mut parent, n) == root)
    }

    /// Total number of scalar traction components on `gammaT`.
    pub fn boundary_components(&self) -> usize {
        self.gamma_t().len() * self.dim
    }

    pub fn from_json_str(s: &str) -> Result<Mesh> {
        serde_json::from_str(s).map_err(|source| Error::Parse {
            what: "mesh",
            source,
        })
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("mesh serialization cannot fail")
    }
}

/// Lists every invariant violation of `mesh`; empty when valid.
pub fn validate(mesh: &Mesh) -> Vec<String> {
    let mut out = Vec::new();
    let dim = mesh.dim;
    if !(1..=3).contains(&dim) {
        out.push(format!("dim must be 1, 2 or 3, got {dim}"));
        return out;
    }
    let n_nodes = mesh.nodes.len();
    for (i, x) in mesh.nodes.iter().enumerate() {
        if x.len() != dim {
            out.push(format!("node {i} has {} coordinates, expected {dim}", x.len()));
        } else if x.iter().any(|v| !v.is_finite()) {
            out.push(format!("node {i} has non-finite coordinates"));
        }
    }
    if !out.is_empty() {
        return out;
    }
    if mesh.elements.is_empty() {
        out.push("mesh has no elements".to_string());
    }

    let in_range = |idx: &[usize]| idx.iter().all(|&n| n < n_nodes);
    let distinct = |idx: &[usize]| {
        let s = sorted(idx);
        s.windows(2).all(|w| w[0] != w[1])
    };

    let mut elements_ok = true;
    for (e, el) in mesh.elements.iter().enumerate() {
        if el.kind.dim() != dim {
            out.push(format!(
                "element {e} is a {:?} which is not allowed in a {dim}D mesh",
                el.kind
            ));
            elements_ok = false;
            continue;
        }
        if el.nodes.len() != el.kind.node_count() {
            out.push(format!(
                "element {e} has {} nodes, expected {}",
                el.nodes.len(),
                el.kind.node_count()
            ));
            elements_ok = false;
            continue;
        }
        if !in_range(&el.nodes) {
            out.push(format!("element {e} references a node out of range"));
            elements_ok = false;
            continue;
        }
        match (el.kind, el.area) {
            (ElementKind::Bar, None) => out.push(format!("element {e} (bar) has no area")),
            (ElementKind::Bar, Some(a)) if !(a.is_finite() && a > 0.0) => {
                out.push(format!("element {e} has non-positive area"))
            }
            (ElementKind::Triangle | ElementKind::Tetrahedron, Some(_)) => {
                out.push(format!("element {e} carries an area but is not a bar"))
            }
            _ => {}
        }
        if !distinct(&el.nodes) || mesh.element_measure(e) <= element_tolerance(mesh, &el.nodes) {
            out.push(format!("element {e} has zero measure"));
        }
    }

    let mut seen: HashMap<Vec<usize>, (usize, FacetLabel)> = HashMap::new();
    for (f, facet) in mesh.facets.iter().enumerate() {
        if facet.nodes.len() != dim {
            out.push(format!(
                "facet {f} has {} nodes, expected {dim}",
                facet.nodes.len()
            ));
            continue;
        }
        if !in_range(&facet.nodes) {
            out.push(format!("facet {f} references a node out of range"));
            continue;
        }
        if !distinct(&facet.nodes) {
            out.push(format!("facet {f} repeats a node"));
            continue;
        }
        let key = sorted(&facet.nodes);
        if let Some(&(g, label)) = seen.get(&key) {
            if label != facet.label {
                out.push(format!("facet {f} is labeled both gamma0 and gammaT (see facet {g})"));
            } else {
                out.push(format!("facet {f} duplicates facet {g}"));
            }
            continue;
        }
        seen.insert(key.clone(), (f, facet.label));
        if elements_ok {
            let owners = mesh
                .elements
                .iter()
                .filter(|el| key.iter().all(|n| el.nodes.contains(n)))
                .count();
            if owners != 1 {
                out.push(format!(
                    "facet {f} is a face of {owners} elements, expected exactly 1"
                ));
            }
        }
    }
    if mesh.gamma0().is_empty() {
        out.push("gamma0 is empty".to_string());
    }
    if mesh.gamma_t().is_empty() {
        out.push("gammaT is empty".to_string());
    }
    out
}

fn element_tolerance(mesh: &Mesh, nodes: &[usize]) -> f64 {
    let dim = mesh.dim;
    let mut extent: f64 = 0.0;
    for a in nodes {
        for b in nodes {
            let d: f64 = mesh.nodes[*a]
                .iter()
                .zip(&mesh.nodes[*b])
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max);
            extent = extent.max(d);
        }
    }
    1e-12 * extent.powi(dim as i32)
}

/// Runs [`validate`] and turns violations into an error.
pub fn ensure_valid(mesh: &Mesh) -> Result<()> {
    let v = validate(mesh);
    if v.is_empty() {
        Ok(())
    } else {
        Err(Error::InvalidMesh(v))
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")))
    }
}

/// Chain of `n_elements` equal bars on `[0, length]`, clamped at the left
/// end and loaded at the right end.
pub fn generate_bar(length: f64, area: f64, n_elements: usize) -> Result<Mesh> {
    positive("length", length)?;
    positive("area", area)?;
    if n_elements == 0 {
        return Err(Error::InvalidArgument(
            "n_elements must be at least 1".to_string(),
        ));
    }
    let h = length / n_elements as f64;
    let nodes = (0..=n_elements)
        .map(|i| {
            if i == n_elements {
                vec![length]
            } else {
                vec![i as f64 * h]
            }
        })
        .collect();
    let elements = (0..n_elements)
        .map(|i| Element {
            kind: ElementKind::Bar,
            nodes: vec![i, i + 1],
            area: Some(area),
        })
        .collect();
    let facets = vec![
        Facet {
            nodes: vec![0],
            label: FacetLabel::Gamma0,
        },
        Facet {
            nodes: vec![n_elements],
            label: FacetLabel::GammaT,
        },
    ];
    Ok(Mesh {
        dim: 1,
        nodes,
        elements,
        facets,
    })
}

/// Structured triangulation of `[0, width] x [0, height]`, two triangles per
/// cell.
///
/// Facets on `support_edge` are `gamma0`. Every other boundary edge is
/// `gammaT`; those on `load_edge` come first in the facet list, followed by
/// the traction-free remainder (bottom, right, top, left order).
pub fn generate_rectangle(
    width: f64,
    height: f64,
    nx: usize,
    ny: usize,
    support_edge: Edge,
    load_edge: Edge,
) -> Result<Mesh> {
    positive("width", width)?;
    positive("height", height)?;
    if nx == 0 || ny == 0 {
        return Err(Error::InvalidArgument(
            "nx and ny must be at least 1".to_string(),
        ));
    }
    if support_edge == load_edge {
        return Err(Error::InvalidArgument(format!(
            "support and load edge are both {support_edge}"
        )));
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            let x = if i == nx { width } else { width * i as f64 / nx as f64 };
            let y = if j == ny { height } else { height * j as f64 / ny as f64 };
            nodes.push(vec![x, y]);
        }
    }
    let mut elements = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            for tri in [[a, b, c], [a, c, d]] {
                elements.push(Element {
                    kind: ElementKind::Triangle,
                    nodes: tri.to_vec(),
                    area: None,
                });
            }
        }
    }
    let edge_facets = |edge: Edge| -> Vec<Vec<usize>> {
        match edge {
            Edge::Bottom => (0..nx).map(|i| vec![id(i, 0), id(i + 1, 0)]).collect(),
            Edge::Top => (0..nx).map(|i| vec![id(i, ny), id(i + 1, ny)]).collect(),
            Edge::Left => (0..ny).map(|j| vec![id(0, j), id(0, j + 1)]).collect(),
            Edge::Right => (0..ny).map(|j| vec![id(nx, j), id(nx, j + 1)]).collect(),
        }
    };
    let mut facets = Vec::new();
    let mut push = |edge: Edge, label: FacetLabel| {
        for nodes in edge_facets(edge) {
            facets.push(Facet { nodes, label });
        }
    };
    push(support_edge, FacetLabel::Gamma0);
    push(load_edge, FacetLabel::GammaT);
    for edge in [Edge::Bottom, Edge::Right, Edge::Top, Edge::Left] {
        if edge != support_edge && edge != load_edge {
            push(edge, FacetLabel::GammaT);
        }
    }
    Ok(Mesh {
        dim: 2,
        nodes,
        elements,
        facets,
    })
}

/// Two tetrahedra glued on the triangle `z = 0` spanned by the origin and the
/// unit points on the x and y axes, apexes at `z = +size` and `z = -size`.
/// The face `{0, 1, 3}` of the upper tetrahedron is `gamma0`; the other five
/// boundary faces are `gammaT`.
pub fn generate_tet_pair(size: f64) -> Result<Mesh> {
    positive("size", size)?;
    let nodes = vec![
        vec![0.0, 0.0, 0.0],
        vec![size, 0.0, 0.0],
        vec![0.0, size, 0.0],
        vec![0.0, 0.0, size],
        vec![0.0, 0.0, -size],
    ];
    let elements = vec![
        Element {
            kind: ElementKind::Tetrahedron,
            nodes: vec![0, 1, 2, 3],
            area: None,
        },
        Element {
            kind: ElementKind::Tetrahedron,
            nodes: vec![0, 2, 1, 4],
            area: None,
        },
    ];
    let facet = |nodes: [usize; 3], label| Facet {
        nodes: nodes.to_vec(),
        label,
    };
    let facets = vec![
        facet([0, 1, 3], FacetLabel::Gamma0),
        facet([1, 2, 3], FacetLabel::GammaT),
        facet([0, 2, 3], FacetLabel::GammaT),
        facet([0, 1, 4], FacetLabel::GammaT),
        facet([1, 2, 4], FacetLabel::GammaT),
        facet([0, 2, 4], FacetLabel::GammaT),
    ];
    Ok(Mesh {
        dim: 3,
        nodes,
        elements,
        facets,
    })
}

/// Reads and validates a mesh file.
pub fn read_mesh(path: impl AsRef<Path>) -> Result<Mesh> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mesh = Mesh::from_json_str(&text)?;
    ensure_valid(&mesh)?;
    Ok(mesh)
}

pub fn write_mesh(mesh: &Mesh, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut text = mesh.to_json_string();
    text.push('\n');
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}
