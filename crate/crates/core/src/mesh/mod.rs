//! Triangle meshes and the face/vertex incidence queries used by the feature
//! and cost modules.

mod io;

use std::sync::Arc;

use crate::error::MeshError;
use crate::vec3::Vec3;

pub use io::{parse_mesh, read_mesh, write_mesh, MeshFormat};

/// Incidence relations derived from a face list.
///
/// Every list is sorted ascending and free of duplicates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    vertex_faces: Vec<Vec<usize>>,
    vertex_neighbors: Vec<Vec<usize>>,
    face_edge_adjacent: Vec<Vec<usize>>,
    face_vertex_adjacent: Vec<Vec<usize>>,
}

impl Topology {
    pub fn build(vertex_count: usize, faces: &[[usize; 3]]) -> Self {
        let mut vertex_faces = vec![Vec::new(); vertex_count];
        let mut vertex_neighbors = vec![Vec::new(); vertex_count];
        for (f, tri) in faces.iter().enumerate() {
            for (k, &v) in tri.iter().enumerate() {
                vertex_faces[v].push(f);
                vertex_neighbors[v].push(tri[(k + 1) % 3]);
                vertex_neighbors[v].push(tri[(k + 2) % 3]);
            }
        }
        for list in vertex_faces.iter_mut().chain(vertex_neighbors.iter_mut()) {
            list.sort_unstable();
            list.dedup();
        }

        let mut face_edge_adjacent = Vec::with_capacity(faces.len());
        let mut face_vertex_adjacent = Vec::with_capacity(faces.len());
        let mut candidates = Vec::new();
        for (f, tri) in faces.iter().enumerate() {
            candidates.clear();
            for &v in tri {
                candidates.extend(vertex_faces[v].iter().copied().filter(|&g| g != f));
            }
            candidates.sort_unstable();
            let mut edge = Vec::new();
            let mut vert = Vec::new();
            // A candidate appears once per vertex it shares with `f`.
            let mut i = 0;
            while i < candidates.len() {
                let g = candidates[i];
                let mut j = i;
                while j < candidates.len() && candidates[j] == g {
                    j += 1;
                }
                let shared = j - i;
                vert.push(g);
                if shared == 2 {
                    edge.push(g);
                }
                i = j;
            }
            face_edge_adjacent.push(edge);
            face_vertex_adjacent.push(vert);
        }

        Self {
            vertex_faces,
            vertex_neighbors,
            face_edge_adjacent,
            face_vertex_adjacent,
        }
    }

    #[inline]
    pub fn vertex_faces(&self, v: usize) -> &[usize] {
        &self.vertex_faces[v]
    }

    #[inline]
    pub fn vertex_neighbors(&self, v: usize) -> &[usize] {
        &self.vertex_neighbors[v]
    }

    #[inline]
    pub fn edge_adjacent(&self, f: usize) -> &[usize] {
        &self.face_edge_adjacent[f]
    }

    #[inline]
    pub fn vertex_adjacent(&self, f: usize) -> &[usize] {
        &self.face_vertex_adjacent[f]
    }
}

/// An indexed triangle mesh.
///
/// Positions may be replaced (see [`Mesh::with_vertices`]) but the face list and
/// its derived [`Topology`] never change once built; clones share the topology.
#[derive(Debug, Clone)]
pub struct Mesh {
    vertices: Vec<Vec3>,
    faces: Vec<[usize; 3]>,
    coord_text: Option<Vec<[Box<str>; 3]>>,
    topology: Arc<Topology>,
}

impl Mesh {
    pub fn new(vertices: Vec<Vec3>, faces: Vec<[usize; 3]>) -> Result<Self, MeshError> {
        let len = vertices.len();
        for (face, tri) in faces.iter().enumerate() {
            for (k, &index) in tri.iter().enumerate() {
                if index >= len {
                    return Err(MeshError::BadFace { face, index, len });
                }
                if tri[..k].contains(&index) {
                    return Err(MeshError::RepeatedVertex { face, index });
                }
            }
        }
        let topology = Arc::new(Topology::build(len, &faces));
        Ok(Self {
            vertices,
            faces,
            coord_text: None,
            topology,
        })
    }

    pub(crate) fn with_coord_text(mut self, text: Vec<[Box<str>; 3]>) -> Self {
        debug_assert_eq!(text.len(), self.vertices.len());
        self.coord_text = Some(text);
        self
    }

    /// Same faces and topology, new positions. Source coordinate text is dropped.
    pub fn with_vertices(&self, vertices: Vec<Vec3>) -> Self {
        assert_eq!(vertices.len(), self.vertices.len(), "vertex count must not change");
        Self {
            vertices,
            faces: self.faces.clone(),
            coord_text: None,
            topology: Arc::clone(&self.topology),
        }
    }

    #[inline]
    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    #[inline]
    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    #[inline]
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    #[inline]
    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    /// Decimal strings of the coordinates as they appeared in the source file.
    pub fn coord_text(&self) -> Option<&[[Box<str>; 3]]> {
        self.coord_text.as_deref()
    }

    #[inline]
    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    /// Faces incident to vertex `v`.
    pub fn one_ring_faces(&self, v: usize) -> Result<&[usize], MeshError> {
        self.check_vertex(v)?;
        Ok(self.topology.vertex_faces(v))
    }

    /// Faces sharing an edge (exactly two vertices) with face `f`.
    pub fn edge_adjacent_faces(&self, f: usize) -> Result<&[usize], MeshError> {
        self.check_face(f)?;
        Ok(self.topology.edge_adjacent(f))
    }

    /// Faces sharing at least one vertex with face `f`.
    pub fn vertex_adjacent_faces(&self, f: usize) -> Result<&[usize], MeshError> {
        self.check_face(f)?;
        Ok(self.topology.vertex_adjacent(f))
    }

    /// Vertices joined to `v` by an edge.
    pub fn vertex_neighbors(&self, v: usize) -> Result<&[usize], MeshError> {
        self.check_vertex(v)?;
        Ok(self.topology.vertex_neighbors(v))
    }

    fn check_vertex(&self, v: usize) -> Result<(), MeshError> {
        if v < self.vertices.len() {
            Ok(())
        } else {
            Err(MeshError::VertexOutOfRange {
                index: v,
                len: self.vertices.len(),
            })
        }
    }

    fn check_face(&self, f: usize) -> Result<(), MeshError> {
        if f < self.faces.len() {
            Ok(())
        } else {
            Err(MeshError::FaceOutOfRange {
                index: f,
                len: self.faces.len(),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single() -> Mesh {
        Mesh::new(vec![[0.0; 3], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]], vec![[0, 1, 2]]).unwrap()
    }

    fn tetrahedron() -> Mesh {
        Mesh::new(
            vec![[0.0; 3], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            vec![[0, 2, 1], [0, 1, 3], [1, 2, 3], [0, 3, 2]],
        )
        .unwrap()
    }

    /// Hub vertex 0 with five rim vertices; an open fan of five triangles.
    fn fan() -> Mesh {
        let mut verts = vec![[0.0; 3]];
        for k in 0..6 {
            let a = k as f64 * 0.9;
            verts.push([a.cos(), a.sin(), 0.0]);
        }
        let faces = (0..5).map(|k| [0, k + 1, k + 2]).collect();
        Mesh::new(verts, faces).unwrap()
    }

    #[test]
    fn one_ring_examples() {
        assert_eq!(single().one_ring_faces(0).unwrap(), &[0]);
        let fan = fan();
        assert_eq!(fan.one_ring_faces(0).unwrap(), &[0, 1, 2, 3, 4]);
        assert_eq!(fan.one_ring_faces(1).unwrap(), &[0]);
        assert_eq!(fan.one_ring_faces(6).unwrap(), &[4]);
        assert_eq!(fan.one_ring_faces(3).unwrap(), &[1, 2]);
        assert!(matches!(
            fan.one_ring_faces(7),
            Err(MeshError::VertexOutOfRange { index: 7, len: 7 })
        ));
    }

    #[test]
    fn edge_adjacent_examples() {
        assert!(single().edge_adjacent_faces(0).unwrap().is_empty());
        let pair = Mesh::new(
            vec![[0.0; 3], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 1.0, 0.0]],
            vec![[0, 1, 2], [1, 3, 2]],
        )
        .unwrap();
        assert_eq!(pair.edge_adjacent_faces(0).unwrap(), &[1]);
        assert_eq!(pair.edge_adjacent_faces(1).unwrap(), &[0]);
        let tet = tetrahedron();
        assert_eq!(tet.edge_adjacent_faces(0).unwrap(), &[1, 2, 3]);
        assert_eq!(tet.edge_adjacent_faces(2).unwrap(), &[0, 1, 3]);
        assert!(tet.edge_adjacent_faces(4).is_err());
    }

    #[test]
    fn vertex_adjacent_examples() {
        assert!(single().vertex_adjacent_faces(0).unwrap().is_empty());
        assert_eq!(tetrahedron().vertex_adjacent_faces(1).unwrap(), &[0, 2, 3]);
        assert_eq!(fan().vertex_adjacent_faces(2).unwrap(), &[0, 1, 3, 4]);
        // only the middle face's direct neighbours share an edge
        assert_eq!(fan().edge_adjacent_faces(2).unwrap(), &[1, 3]);
    }

    #[test]
    fn rejects_bad_faces() {
        let v = vec![[0.0; 3]; 3];
        assert!(matches!(
            Mesh::new(v.clone(), vec![[0, 1, 3]]),
            Err(MeshError::BadFace { index: 3, .. })
        ));
        assert!(matches!(
            Mesh::new(v, vec![[0, 1, 1]]),
            Err(MeshError::RepeatedVertex { index: 1, .. })
        ));
    }

    #[test]
    fn rebuild_is_idempotent() {
        let tet = tetrahedron();
        let rebuilt = Topology::build(tet.vertex_count(), tet.faces());
        assert_eq!(&rebuilt, tet.topology());
        assert_eq!(Topology::build(4, tet.faces()), rebuilt);
    }
}
