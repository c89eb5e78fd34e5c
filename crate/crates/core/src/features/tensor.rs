//! Normal voting tensors over three neighbourhood patterns and the log
//! residual features derived from their eigenvalues.

use std::fmt;

use crate::features::eigen::{eigenvalues, outer_add, Sym3, ZERO};
use crate::features::geometry::{all_face_geometry, FaceGeometry};
use crate::mesh::{Mesh, Topology};

/// Guard inside the residual logarithm.
pub const RESIDUAL_EPS: f64 = 1e-12;

/// Neighbourhood over which face normals vote.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pattern {
    /// One tensor per vertex from its incident faces.
    VertexRing = 1,
    /// One tensor per face from the faces sharing an edge with it.
    FaceEdge = 2,
    /// One tensor per face from the faces sharing a vertex with it.
    FaceVertex = 3,
}

impl Pattern {
    pub const ALL: [Pattern; 3] = [Pattern::VertexRing, Pattern::FaceEdge, Pattern::FaceVertex];

    pub fn from_index(k: u8) -> Option<Self> {
        match k {
            1 => Some(Self::VertexRing),
            2 => Some(Self::FaceEdge),
            3 => Some(Self::FaceVertex),
            _ => None,
        }
    }

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    /// Number of tensors for a mesh.
    pub fn element_count(self, mesh: &Mesh) -> usize {
        match self {
            Pattern::VertexRing => mesh.vertex_count(),
            _ => mesh.face_count(),
        }
    }

    #[inline]
    pub(crate) fn neighborhood(self, topo: &Topology, element: usize) -> &[usize] {
        match self {
            Pattern::VertexRing => topo.vertex_faces(element),
            Pattern::FaceEdge => topo.edge_adjacent(element),
            Pattern::FaceVertex => topo.vertex_adjacent(element),
        }
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "S{}", self.index())
    }
}

/// Voting tensor of one element. Each face votes with its area relative to
/// the largest face in the neighbourhood.
#[inline]
pub(crate) fn tensor_at(
    topo: &Topology,
    pattern: Pattern,
    element: usize,
    geometry: &[FaceGeometry],
) -> Sym3 {
    let hood = pattern.neighborhood(topo, element);
    let max_area = hood.iter().map(|&f| geometry[f].area).fold(0.0, f64::max);
    let mut t = ZERO;
    if max_area > 0.0 {
        for &f in hood {
            let g = &geometry[f];
            outer_add(&mut t, g.normal, g.area / max_area);
        }
    }
    t
}

/// `[l1 - l2, l2 - l3, l3]` from descending eigenvalues clamped at zero.
#[inline]
pub fn eigen_features(t: &Sym3) -> [f64; 3] {
    let [a, b, c] = eigenvalues(t).map(|x| x.max(0.0));
    [a - b, b - c, c]
}

#[inline]
pub fn residual(value: f64, smoothed: f64) -> f64 {
    ((value - smoothed).abs() + RESIDUAL_EPS).ln()
}

#[inline]
pub(crate) fn residual3(values: &[f64; 3], smoothed: &[f64; 3]) -> [f64; 3] {
    [
        residual(values[0], smoothed[0]),
        residual(values[1], smoothed[1]),
        residual(values[2], smoothed[2]),
    ]
}

/// All tensors of one pattern with their eigenvalue features.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorField {
    pub pattern: Pattern,
    pub tensors: Vec<Sym3>,
    /// Per element `[l1 - l2, l2 - l3, l3]`.
    pub features: Vec<[f64; 3]>,
}

impl TensorField {
    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    /// One of the three eigenvalue sets (`which` in 0..3).
    pub fn eigen_set(&self, which: usize) -> Vec<f64> {
        self.features.iter().map(|f| f[which]).collect()
    }
}

pub(crate) fn field_from_geometry(
    topo: &Topology,
    pattern: Pattern,
    element_count: usize,
    geometry: &[FaceGeometry],
) -> TensorField {
    let tensors: Vec<Sym3> = (0..element_count)
        .map(|i| tensor_at(topo, pattern, i, geometry))
        .collect();
    let features = tensors.iter().map(eigen_features).collect();
    TensorField {
        pattern,
        tensors,
        features,
    }
}

pub fn compute_tensor_field(mesh: &Mesh, pattern: Pattern) -> TensorField {
    let geometry = all_face_geometry(mesh);
    field_from_geometry(
        mesh.topology(),
        pattern,
        pattern.element_count(mesh),
        &geometry,
    )
}

/// Log residuals of a field against the field of the smoothed mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualField {
    pub values: Vec<[f64; 3]>,
}

pub fn residuals(field: &TensorField, smoothed: &TensorField) -> ResidualField {
    assert_eq!(field.pattern, smoothed.pattern, "pattern mismatch");
    assert_eq!(field.len(), smoothed.len(), "topology mismatch");
    ResidualField {
        values: field
            .features
            .iter()
            .zip(&smoothed.features)
            .map(|(a, b)| residual3(a, b))
            .collect(),
    }
}

/// Indices of the tensors of `pattern` whose value can change when vertex `v`
/// moves. Sorted ascending.
pub fn influence_domain(mesh: &Mesh, v: usize, pattern: Pattern) -> Vec<usize> {
    let mut out = Vec::new();
    influence_domain_into(mesh.topology(), mesh.faces(), v, pattern, &mut out);
    out
}

pub(crate) fn influence_domain_into(
    topo: &Topology,
    faces: &[[usize; 3]],
    v: usize,
    pattern: Pattern,
    out: &mut Vec<usize>,
) {
    out.clear();
    let ring = topo.vertex_faces(v);
    match pattern {
        Pattern::VertexRing => {
            for &f in ring {
                out.extend_from_slice(&faces[f]);
            }
        }
        Pattern::FaceEdge | Pattern::FaceVertex => {
            out.extend_from_slice(ring);
            for &f in ring {
                out.extend_from_slice(pattern.neighborhood(topo, f));
            }
        }
    }
    out.sort_unstable();
    out.dedup();
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn flat_region_is_rank_one() {
        let grid = fixtures::planar_grid(4, 4, 0.5);
        let field = compute_tensor_field(&grid, Pattern::VertexRing);
        let centre = 5;
        let hood = grid.topology().vertex_faces(centre);
        // all faces of the uniform grid have the same area, so every weight is 1
        let expect = hood.len() as f64;
        let f = field.features[centre];
        assert!((f[0] - expect).abs() < 1e-12);
        assert!(f[1].abs() < 1e-12 && f[2].abs() < 1e-12);
    }

    #[test]
    fn tetrahedron_face_patterns() {
        let tet = fixtures::tetrahedron();
        for f in 0..4 {
            assert_eq!(Pattern::FaceEdge.neighborhood(tet.topology(), f).len(), 3);
        }
        let field = compute_tensor_field(&tet, Pattern::FaceEdge);
        assert_eq!(field.len(), 4);
        assert_eq!(compute_tensor_field(&tet, Pattern::VertexRing).len(), 4);
    }

    #[test]
    fn residual_guard() {
        assert_eq!(residual(0.3, 0.3), RESIDUAL_EPS.ln());
        assert!(residual(2.0, 1.0).abs() < 1e-11);
    }

    #[test]
    fn influence_domain_examples() {
        let single = fixtures::single_triangle();
        assert_eq!(influence_domain(&single, 0, Pattern::VertexRing), vec![0, 1, 2]);
        let tet = fixtures::tetrahedron();
        assert_eq!(influence_domain(&tet, 0, Pattern::FaceEdge), vec![0, 1, 2, 3]);
        assert_eq!(influence_domain(&tet, 2, Pattern::FaceVertex), vec![0, 1, 2, 3]);
    }
}
