use std::collections::BTreeMap;
use std::f64::consts::PI;

use crate::error::MeshError;
use crate::mesh::Mesh;
use crate::vec3::{angle, cross, norm, normalize, scale, sub, Vec3};

/// Unit normal and area of one triangle. Degenerate triangles carry a zero
/// normal and zero area.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaceGeometry {
    pub normal: Vec3,
    pub area: f64,
}

impl FaceGeometry {
    pub const DEGENERATE: FaceGeometry = FaceGeometry {
        normal: [0.0; 3],
        area: 0.0,
    };

    #[inline]
    pub fn is_degenerate(&self) -> bool {
        self.area == 0.0
    }
}

#[inline]
pub fn triangle_geometry(a: Vec3, b: Vec3, c: Vec3) -> FaceGeometry {
    let n = cross(sub(b, a), sub(c, a));
    let len = norm(n);
    if len > 0.0 && len.is_finite() {
        FaceGeometry {
            normal: scale(n, 1.0 / len),
            area: 0.5 * len,
        }
    } else {
        FaceGeometry::DEGENERATE
    }
}

#[inline]
pub(crate) fn face_geometry_with(vertices: &[Vec3], tri: [usize; 3]) -> FaceGeometry {
    triangle_geometry(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]])
}

pub fn face_normal_area(mesh: &Mesh, face: usize) -> Result<FaceGeometry, MeshError> {
    let tri = mesh.faces().get(face).ok_or(MeshError::FaceOutOfRange {
        index: face,
        len: mesh.face_count(),
    })?;
    Ok(face_geometry_with(mesh.vertices(), *tri))
}

pub fn all_face_geometry(mesh: &Mesh) -> Vec<FaceGeometry> {
    mesh.faces()
        .iter()
        .map(|&tri| face_geometry_with(mesh.vertices(), tri))
        .collect()
}

/// An edge shared by exactly two faces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InteriorEdge {
    pub edge: (usize, usize),
    pub faces: (usize, usize),
}

/// Edges with exactly two incident faces, sorted by `(min, max)` vertex pair.
/// Boundary and non-manifold edges are left out.
pub fn interior_edges(mesh: &Mesh) -> Vec<InteriorEdge> {
    let mut incident: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for (f, tri) in mesh.faces().iter().enumerate() {
        for k in 0..3 {
            let (a, b) = (tri[k], tri[(k + 1) % 3]);
            incident.entry((a.min(b), a.max(b))).or_default().push(f);
        }
    }
    incident
        .into_iter()
        .filter(|(_, fs)| fs.len() == 2)
        .map(|(edge, fs)| InteriorEdge {
            edge,
            faces: (fs[0], fs[1]),
        })
        .collect()
}

/// Angle between the normals of the two faces on each interior edge, in
/// `[0, pi]`; coplanar consistently oriented faces give 0.
pub fn dihedral_angles(mesh: &Mesh) -> Vec<(InteriorEdge, f64)> {
    let geometry = all_face_geometry(mesh);
    interior_edges(mesh)
        .into_iter()
        .map(|e| {
            let theta = angle(geometry[e.faces.0].normal, geometry[e.faces.1].normal);
            (e, theta)
        })
        .collect()
}

/// Area-weighted average of the incident face normals, normalised. Zero for
/// a vertex with no (non-degenerate) faces.
pub fn vertex_normal(mesh: &Mesh, v: usize) -> Result<Vec3, MeshError> {
    let faces = mesh.one_ring_faces(v)?;
    let mut acc = [0.0; 3];
    for &f in faces {
        let g = face_geometry_with(mesh.vertices(), mesh.faces()[f]);
        acc = crate::vec3::add(acc, scale(g.normal, g.area));
    }
    Ok(normalize(acc).unwrap_or([0.0; 3]))
}

fn corner_angle(mesh: &Mesh, tri: [usize; 3], v: usize) -> f64 {
    let k = tri.iter().position(|&x| x == v).expect("vertex on face");
    let p = mesh.vertices()[v];
    let a = mesh.vertices()[tri[(k + 1) % 3]];
    let b = mesh.vertices()[tri[(k + 2) % 3]];
    angle(sub(a, p), sub(b, p))
}

fn is_boundary_vertex(mesh: &Mesh, v: usize) -> bool {
    let faces = mesh.topology().vertex_faces(v);
    mesh.topology().vertex_neighbors(v).iter().any(|&u| {
        faces
            .iter()
            .filter(|&&f| mesh.faces()[f].contains(&u))
            .count()
            == 1
    })
}

/// `2 pi - sum of incident corner angles` (`pi - ...` on the boundary).
pub fn angle_defect(mesh: &Mesh, v: usize) -> Result<f64, MeshError> {
    let faces = mesh.one_ring_faces(v)?;
    let total: f64 = faces
        .iter()
        .map(|&f| corner_angle(mesh, mesh.faces()[f], v))
        .sum();
    let full = if is_boundary_vertex(mesh, v) { PI } else { 2.0 * PI };
    Ok(full - total)
}

/// Discrete Gaussian curvature: angle defect over one third of the incident
/// face area. Zero when the vertex has no area around it.
pub fn gaussian_curvature(mesh: &Mesh, v: usize) -> Result<f64, MeshError> {
    let defect = angle_defect(mesh, v)?;
    let area: f64 = mesh
        .topology()
        .vertex_faces(v)
        .iter()
        .map(|&f| face_geometry_with(mesh.vertices(), mesh.faces()[f]).area)
        .sum();
    if area > 0.0 {
        Ok(defect / (area / 3.0))
    } else {
        Ok(0.0)
    }
}
