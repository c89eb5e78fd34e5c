//! Procedurally generated meshes for tests, benchmarks and demos.
//!
//! Every generator rounds coordinates to [`FIXTURE_DECIMALS`] places so the
//! result behaves like a mesh read from a six-decimal file.

use std::collections::HashMap;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::mesh::Mesh;
use crate::vec3::{add, normalize, scale, Vec3};

pub const FIXTURE_DECIMALS: u32 = 6;

fn round_to(v: f64, decimals: u32) -> f64 {
    let s = 10f64.powi(decimals as i32);
    (v * s).round() / s
}

/// Round every coordinate to `decimals` places.
pub fn quantized(mesh: &Mesh, decimals: u32) -> Mesh {
    mesh.with_vertices(
        mesh.vertices()
            .iter()
            .map(|v| v.map(|c| round_to(c, decimals)))
            .collect(),
    )
}

fn build(vertices: Vec<Vec3>, faces: Vec<[usize; 3]>) -> Mesh {
    let vertices = vertices
        .into_iter()
        .map(|v| v.map(|c| round_to(c, FIXTURE_DECIMALS)))
        .collect();
    Mesh::new(vertices, faces).expect("generated faces are valid")
}

pub fn single_triangle() -> Mesh {
    build(vec![[0.0; 3], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]], vec![[0, 1, 2]])
}

pub fn tetrahedron() -> Mesh {
    build(
        vec![[0.0; 3], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        vec![[0, 2, 1], [0, 1, 3], [1, 2, 3], [0, 3, 2]],
    )
}

/// Open fan of `n` triangles around hub vertex 0.
pub fn fan(n: usize) -> Mesh {
    let mut vertices = vec![[0.0; 3]];
    for k in 0..=n {
        let a = k as f64 * 2.0 * PI / (n as f64 + 1.5);
        vertices.push([a.cos(), a.sin(), 0.0]);
    }
    let faces = (0..n).map(|k| [0, k + 1, k + 2]).collect();
    build(vertices, faces)
}

/// `nx * ny` grid in the plane `z = 0`; vertex `(i, j)` has index `j * nx + i`.
pub fn planar_grid(nx: usize, ny: usize, spacing: f64) -> Mesh {
    height_field_with(nx, ny, spacing, |_, _| 0.0)
}

fn height_field_with(nx: usize, ny: usize, spacing: f64, z: impl Fn(f64, f64) -> f64) -> Mesh {
    assert!(nx >= 2 && ny >= 2);
    let mut vertices = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (x, y) = (i as f64 * spacing, j as f64 * spacing);
            vertices.push([x, y, z(x, y)]);
        }
    }
    let mut faces = Vec::with_capacity(2 * (nx - 1) * (ny - 1));
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            let a = j * nx + i;
            let (b, c, d) = (a + 1, a + nx, a + nx + 1);
            faces.push([a, b, d]);
            faces.push([a, d, c]);
        }
    }
    build(vertices, faces)
}

/// Bumpy terrain: a few random sinusoids plus per-vertex jitter.
pub fn height_field(nx: usize, ny: usize, spacing: f64, amplitude: f64, seed: u64) -> Mesh {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let waves: Vec<(f64, f64, f64, f64)> = (0..4)
        .map(|_| {
            (
                rng.gen_range(0.5..3.0),
                rng.gen_range(0.5..3.0),
                rng.gen_range(0.0..2.0 * PI),
                rng.gen_range(0.3..1.0),
            )
        })
        .collect();
    let extent = spacing * nx.max(ny) as f64;
    let jitter: Vec<f64> = (0..nx * ny).map(|_| rng.gen_range(-0.05..0.05)).collect();
    let mesh = height_field_with(nx, ny, spacing, |x, y| {
        waves
            .iter()
            .map(|&(fx, fy, ph, a)| a * (2.0 * PI * (fx * x + fy * y) / extent + ph).sin())
            .sum::<f64>()
            * amplitude
    });
    let vertices = mesh
        .vertices()
        .iter()
        .zip(&jitter)
        .map(|(v, j)| [v[0], v[1], v[2] + j * amplitude])
        .collect();
    build(vertices, mesh.faces().to_vec())
}

/// Subdivided icosahedron projected onto a sphere. Level `l` has
/// `10 * 4^l + 2` vertices (level 4: 2562).
pub fn icosphere(level: u32, radius: f64) -> Mesh {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut vertices: Vec<Vec3> = [
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ]
    .iter()
    .map(|&v| normalize(v).unwrap())
    .collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..level {
        let mut cache: HashMap<(usize, usize), usize> = HashMap::new();
        let mut midpoint = |a: usize, b: usize, vertices: &mut Vec<Vec3>| {
            *cache.entry((a.min(b), a.max(b))).or_insert_with(|| {
                let m = normalize(scale(add(vertices[a], vertices[b]), 0.5)).unwrap();
                vertices.push(m);
                vertices.len() - 1
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for [a, b, c] in faces {
            let ab = midpoint(a, b, &mut vertices);
            let bc = midpoint(b, c, &mut vertices);
            let ca = midpoint(c, a, &mut vertices);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    build(vertices.into_iter().map(|v| scale(v, radius)).collect(), faces)
}

/// Icosphere with every vertex pushed radially by uniform noise in
/// `[-noise, noise]` (relative to the radius).
pub fn noisy_sphere(level: u32, radius: f64, noise: f64, seed: u64) -> Mesh {
    let base = icosphere(level, 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vertices = base
        .vertices()
        .iter()
        .map(|&v| scale(v, radius * (1.0 + rng.gen_range(-noise..=noise))))
        .collect();
    build(vertices, base.faces().to_vec())
}

/// Closed torus with `nu * nv` vertices.
pub fn torus(nu: usize, nv: usize, major: f64, minor: f64) -> Mesh {
    let mut vertices = Vec::with_capacity(nu * nv);
    for i in 0..nu {
        let u = 2.0 * PI * i as f64 / nu as f64;
        for j in 0..nv {
            let v = 2.0 * PI * j as f64 / nv as f64;
            let r = major + minor * v.cos();
            vertices.push([r * u.cos(), r * u.sin(), minor * v.sin()]);
        }
    }
    let idx = |i: usize, j: usize| (i % nu) * nv + (j % nv);
    let mut faces = Vec::with_capacity(2 * nu * nv);
    for i in 0..nu {
        for j in 0..nv {
            let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i, j + 1), idx(i + 1, j + 1));
            faces.push([a, b, d]);
            faces.push([a, d, c]);
        }
    }
    build(vertices, faces)
}

/// Add uniform noise in `[-sigma, sigma]` to every coordinate.
pub fn jittered(mesh: &Mesh, sigma: f64, seed: u64) -> Mesh {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vertices = mesh
        .vertices()
        .iter()
        .map(|v| v.map(|c| c + rng.gen_range(-sigma..=sigma)))
        .collect();
    build(vertices, mesh.faces().to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes() {
        assert_eq!(icosphere(0, 1.0).vertex_count(), 12);
        assert_eq!(icosphere(2, 1.0).vertex_count(), 162);
        assert_eq!(icosphere(2, 1.0).face_count(), 320);
        assert_eq!(planar_grid(4, 3, 1.0).face_count(), 12);
        assert_eq!(torus(8, 6, 2.0, 0.5).vertex_count(), 48);
        assert_eq!(fan(5).face_count(), 5);
    }

    #[test]
    fn coordinates_are_six_decimal() {
        let m = noisy_sphere(1, 1.0, 0.05, 3);
        for v in m.vertices() {
            for &c in v {
                let s = c * 1e6;
                assert!((s - s.round()).abs() < 1e-6);
            }
        }
    }
}
