use crate::mesh::Mesh;

/// Iterations used for the residual reference mesh.
pub const SMOOTH_ITERATIONS: usize = 1;
/// Step toward the neighbour centroid used for the residual reference mesh.
pub const SMOOTH_FACTOR: f64 = 0.2;

/// Umbrella-operator Laplacian smoothing: every vertex moves `factor` of the
/// way toward the centroid of its edge neighbours, `iterations` times, using
/// the previous iteration's positions. Vertices without neighbours stay put.
///
/// Panics unless `factor` is in `(0, 1]` and `iterations >= 1`.
pub fn laplacian_smooth(mesh: &Mesh, iterations: usize, factor: f64) -> Mesh {
    assert!(factor > 0.0 && factor <= 1.0, "factor must lie in (0, 1]");
    assert!(iterations >= 1, "at least one iteration");
    let topo = mesh.topology();
    let mut current = mesh.vertices().to_vec();
    let mut next = current.clone();
    for _ in 0..iterations {
        for (v, out) in next.iter_mut().enumerate() {
            let ring = topo.vertex_neighbors(v);
            if ring.is_empty() {
                *out = current[v];
                continue;
            }
            let mut c = [0.0; 3];
            for &u in ring {
                for k in 0..3 {
                    c[k] += current[u][k];
                }
            }
            let inv = 1.0 / ring.len() as f64;
            for k in 0..3 {
                out[k] = current[v][k] + factor * (c[k] * inv - current[v][k]);
            }
        }
        std::mem::swap(&mut current, &mut next);
    }
    mesh.with_vertices(current)
}

/// The smoother used for residual features.
pub fn default_smooth(mesh: &Mesh) -> Mesh {
    laplacian_smooth(mesh, SMOOTH_ITERATIONS, SMOOTH_FACTOR)
}
