//! Per-(vertex, channel, change) embedding costs.
//!
//! The feature-preserving cost of moving one coordinate is the L1 change of
//! the log-residual eigenvalue features of one or more tensor patterns. The
//! smoothed reference field is taken from the cover and held fixed, so a
//! change only touches the tensors in the moved vertex's influence domain.
//! [`ofpd_raw`] recomputes everything and serves as the oracle for the fast
//! [`ifpd_raw_table`]; both sum per-element terms in ascending index order so
//! they agree bit for bit.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::QuantError;
use crate::features::geometry::{
    all_face_geometry, face_geometry_with, gaussian_curvature, interior_edges, vertex_normal,
    FaceGeometry,
};
use crate::features::smooth::default_smooth;
use crate::features::tensor::{
    eigen_features, field_from_geometry, influence_domain_into, residual3, tensor_at, Pattern,
};
use crate::mesh::Mesh;
use crate::quant::{from_fixed, to_fixed, Channel};
use crate::vec3::{angle, norm, sub, Vec3};

pub const DEFAULT_MU: f64 = 1.0;
pub const DEFAULT_SIGMA: f64 = 1e-4;
pub const DEFAULT_BETA: f64 = 1.0;

/// Which cost function fills a [`CostTable`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Profile {
    /// Sum of the three normalized tensor sub-features.
    IfpdCs,
    IfpdS1,
    IfpdS2,
    IfpdS3,
    /// Vertex-normal deviation, same cost for every non-zero change.
    Vnd,
    /// Gaussian curvature, same cost for every non-zero change.
    Gcd,
    /// L1 change of the dihedral angles around the moved vertex.
    Dihedral,
}

impl Profile {
    pub const ALL: [Profile; 7] = [
        Profile::IfpdCs,
        Profile::IfpdS1,
        Profile::IfpdS2,
        Profile::IfpdS3,
        Profile::Vnd,
        Profile::Gcd,
        Profile::Dihedral,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Profile::IfpdCs => "ifpd-cs",
            Profile::IfpdS1 => "ifpd-s1",
            Profile::IfpdS2 => "ifpd-s2",
            Profile::IfpdS3 => "ifpd-s3",
            Profile::Vnd => "vnd",
            Profile::Gcd => "gcd",
            Profile::Dihedral => "dihedral",
        }
    }

    /// Tensor patterns summed by the feature-preserving profiles.
    pub fn patterns(self) -> &'static [Pattern] {
        match self {
            Profile::IfpdCs => &Pattern::ALL,
            Profile::IfpdS1 => &[Pattern::VertexRing],
            Profile::IfpdS2 => &[Pattern::FaceEdge],
            Profile::IfpdS3 => &[Pattern::FaceVertex],
            _ => &[],
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Profile {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Profile::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown profile {s:?}"))
    }
}

/// Knobs shared by all profiles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CostOptions {
    pub mu: f64,
    pub sigma: f64,
    pub beta: f64,
}

impl Default for CostOptions {
    fn default() -> Self {
        CostOptions {
            mu: DEFAULT_MU,
            sigma: DEFAULT_SIGMA,
            beta: DEFAULT_BETA,
        }
    }
}

/// Everything about the cover that the feature costs reuse: quantized
/// positions, face geometry, and the cover and smoothed eigen features.
pub struct CostContext<'a> {
    mesh: &'a Mesh,
    k_star: u32,
    integers: Vec<[i64; 3]>,
    vertices: Vec<Vec3>,
    geometry: Vec<FaceGeometry>,
    smoothed: [Vec<[f64; 3]>; 3],
    cover: [Vec<[f64; 3]>; 3],
}

impl<'a> CostContext<'a> {
    /// The cover is taken at `k_star` decimals; moved coordinates are
    /// `(v + step) / 10^k*` exactly as the decimal map produces them.
    pub fn new(mesh: &'a Mesh, k_star: u32) -> Result<Self, QuantError> {
        let integers = mesh
            .vertices()
            .iter()
            .map(|v| Ok([to_fixed(v[0], k_star)?, to_fixed(v[1], k_star)?, to_fixed(v[2], k_star)?]))
            .collect::<Result<Vec<_>, QuantError>>()?;
        let vertices: Vec<Vec3> = integers
            .iter()
            .map(|q| q.map(|c| from_fixed(c, k_star)))
            .collect();
        let quantized = mesh.with_vertices(vertices.clone());
        let smooth_mesh = default_smooth(&quantized);
        let smooth_geometry = all_face_geometry(&smooth_mesh);
        let geometry = all_face_geometry(&quantized);
        let topo = mesh.topology();
        let field = |p: Pattern, g: &[FaceGeometry]| {
            field_from_geometry(topo, p, p.element_count(mesh), g).features
        };
        let smoothed = Pattern::ALL.map(|p| field(p, &smooth_geometry));
        let cover = Pattern::ALL.map(|p| {
            let k = p.index() - 1;
            field(p, &geometry)
                .iter()
                .zip(&smoothed[k])
                .map(|(a, b)| residual3(a, b))
                .collect()
        });
        Ok(CostContext {
            mesh,
            k_star,
            integers,
            vertices,
            geometry,
            smoothed,
            cover,
        })
    }

    pub fn mesh(&self) -> &Mesh {
        self.mesh
    }

    pub fn k_star(&self) -> u32 {
        self.k_star
    }

    /// Cover residual features of one pattern.
    pub fn cover_residuals(&self, pattern: Pattern) -> &[[f64; 3]] {
        &self.cover[pattern.index() - 1]
    }

    /// Position of vertex `i` after adding `step` units to channel `j`.
    #[inline]
    pub fn moved_vertex(&self, i: usize, channel: Channel, step: i64) -> Vec3 {
        let mut p = self.vertices[i];
        let j = channel.index();
        p[j] = from_fixed(self.integers[i][j] + step, self.k_star);
        p
    }

    #[inline]
    fn term(&self, pattern: Pattern, e: usize, geometry: &[FaceGeometry]) -> f64 {
        let k = pattern.index() - 1;
        let t = tensor_at(self.mesh.topology(), pattern, e, geometry);
        let r = residual3(&eigen_features(&t), &self.smoothed[k][e]);
        let c = &self.cover[k][e];
        (r[0] - c[0]).abs() + (r[1] - c[1]).abs() + (r[2] - c[2]).abs()
    }
}

/// Unnormalized cost of one change under one pattern, by rebuilding the
/// whole tensor field of the modified mesh.
pub fn ofpd_cost(ctx: &CostContext, i: usize, channel: Channel, step: i64, pattern: Pattern) -> f64 {
    ofpd_raw(ctx, i, channel, step, &[pattern])[pattern.index() - 1]
}

/// Unnormalized costs of one change for the listed patterns (others stay 0),
/// full recompute.
pub fn ofpd_raw(ctx: &CostContext, i: usize, channel: Channel, step: i64, patterns: &[Pattern]) -> [f64; 3] {
    let mut vertices = ctx.vertices.clone();
    vertices[i] = ctx.moved_vertex(i, channel, step);
    let geometry: Vec<FaceGeometry> = ctx
        .mesh
        .faces()
        .iter()
        .map(|&tri| face_geometry_with(&vertices, tri))
        .collect();
    let topo = ctx.mesh.topology();
    Pattern::ALL.map(|p| {
        if !patterns.contains(&p) {
            return 0.0;
        }
        let k = p.index() - 1;
        let field = field_from_geometry(topo, p, p.element_count(ctx.mesh), &geometry);
        let mut acc = 0.0;
        for (e, f) in field.features.iter().enumerate() {
            let r = residual3(f, &ctx.smoothed[k][e]);
            let c = &ctx.cover[k][e];
            acc += (r[0] - c[0]).abs() + (r[1] - c[1]).abs() + (r[2] - c[2]).abs();
        }
        acc
    })
}

/// Like [`ofpd_cost`] but also re-smooths the modified mesh instead of
/// reusing the cover's smoothed field. Only used to measure how much the
/// shared-smoothing shortcut changes the costs.
pub fn strict_ofpd_cost(
    mesh: &Mesh,
    k_star: u32,
    i: usize,
    channel: Channel,
    step: i64,
    pattern: Pattern,
) -> Result<f64, QuantError> {
    let ctx = CostContext::new(mesh, k_star)?;
    let mut vertices = ctx.vertices.clone();
    vertices[i] = ctx.moved_vertex(i, channel, step);
    let moved = mesh.with_vertices(vertices);
    let smooth = default_smooth(&moved);
    let topo = mesh.topology();
    let n = pattern.element_count(mesh);
    let a = field_from_geometry(topo, pattern, n, &all_face_geometry(&moved));
    let b = field_from_geometry(topo, pattern, n, &all_face_geometry(&smooth));
    let cover = ctx.cover_residuals(pattern);
    let mut acc = 0.0;
    for e in 0..n {
        let r = residual3(&a.features[e], &b.features[e]);
        acc += (r[0] - cover[e][0]).abs() + (r[1] - cover[e][1]).abs() + (r[2] - cover[e][2]).abs();
    }
    Ok(acc)
}

/// Unnormalized per-pattern costs laid out as `[pattern][(i * 3 + j) * |I| + d]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RawCosts {
    pub vertex_count: usize,
    pub steps: Vec<i64>,
    pub values: [Vec<f64>; 3],
}

impl RawCosts {
    #[inline]
    pub fn index(&self, i: usize, channel: Channel, d: usize) -> usize {
        (i * 3 + channel.index()) * self.steps.len() + d
    }

    pub fn get(&self, pattern: Pattern, i: usize, channel: Channel, d: usize) -> f64 {
        self.values[pattern.index() - 1][self.index(i, channel, d)]
    }

    fn from_rows(vertex_count: usize, steps: &[i64], rows: Vec<Vec<[f64; 3]>>) -> Self {
        let mut values: [Vec<f64>; 3] = Default::default();
        for v in values.iter_mut() {
            v.reserve(vertex_count * 3 * steps.len());
        }
        for row in rows {
            for c in row {
                for k in 0..3 {
                    values[k].push(c[k]);
                }
            }
        }
        RawCosts {
            vertex_count,
            steps: steps.to_vec(),
            values,
        }
    }
}

fn build_rows<S, F, R>(
    _ctx: &CostContext,
    vertices: R,
    steps: &[i64],
    init: impl Fn() -> S + Sync + Send,
    row: F,
) -> RawCosts
where
    F: Fn(&mut S, usize, Channel, i64) -> [f64; 3] + Sync + Send,
    S: Send,
    R: IntoIterator<Item = usize>,
{
    let vertices: Vec<usize> = vertices.into_iter().collect();
    let n = vertices.len();
    let rows: Vec<Vec<[f64; 3]>> = vertices
        .into_par_iter()
        .map_init(init, |scratch, i| {
            let mut out = Vec::with_capacity(3 * steps.len());
            for channel in Channel::ALL {
                for &step in steps {
                    out.push(if step == 0 {
                        [0.0; 3]
                    } else {
                        row(scratch, i, channel, step)
                    });
                }
            }
            out
        })
        .collect();
    RawCosts::from_rows(n, steps, rows)
}

/// Full-recompute cost table. Slow; the reference for [`ifpd_raw_table`].
pub fn ofpd_raw_table(ctx: &CostContext, steps: &[i64], patterns: &[Pattern]) -> RawCosts {
    build_rows(ctx, 0..ctx.mesh.vertex_count(), steps, || (), |_, i, c, s| ofpd_raw(ctx, i, c, s, patterns))
}

/// [`ofpd_raw_table`] restricted to some vertices; rows are in `rows` order.
pub fn ofpd_raw_rows(ctx: &CostContext, rows: &[usize], steps: &[i64], patterns: &[Pattern]) -> RawCosts {
    build_rows(ctx, rows.iter().copied(), steps, || (), |_, i, c, s| ofpd_raw(ctx, i, c, s, patterns))
}

/// Thread-local working copies for the incremental cost evaluation.
pub struct IfpdScratch {
    vertices: Vec<Vec3>,
    geometry: Vec<FaceGeometry>,
    domains: [Vec<usize>; 3],
    row: Option<usize>,
}

impl IfpdScratch {
    pub fn new(ctx: &CostContext) -> Self {
        IfpdScratch {
            vertices: ctx.vertices.clone(),
            geometry: ctx.geometry.clone(),
            domains: Default::default(),
            row: None,
        }
    }
}

/// Unnormalized costs of one change for the listed patterns (others stay 0),
/// recomputing only the tensors in the influence domain of vertex `i`.
pub fn ifpd_raw(
    ctx: &CostContext,
    scratch: &mut IfpdScratch,
    i: usize,
    channel: Channel,
    step: i64,
    patterns: &[Pattern],
) -> [f64; 3] {
    let topo = ctx.mesh.topology();
    let faces = ctx.mesh.faces();
    if scratch.row != Some(i) {
        for p in Pattern::ALL {
            influence_domain_into(topo, faces, i, p, &mut scratch.domains[p.index() - 1]);
        }
        scratch.row = Some(i);
    }
    let ring = topo.vertex_faces(i);
    scratch.vertices[i] = ctx.moved_vertex(i, channel, step);
    for &f in ring {
        scratch.geometry[f] = face_geometry_with(&scratch.vertices, faces[f]);
    }
    let out = Pattern::ALL.map(|p| {
        if !patterns.contains(&p) {
            return 0.0;
        }
        let mut acc = 0.0;
        for &e in &scratch.domains[p.index() - 1] {
            acc += ctx.term(p, e, &scratch.geometry);
        }
        acc
    });
    scratch.vertices[i] = ctx.vertices[i];
    for &f in ring {
        scratch.geometry[f] = ctx.geometry[f];
    }
    out
}

/// Incremental cost table, equal to [`ofpd_raw_table`] entry for entry.
pub fn ifpd_raw_table(ctx: &CostContext, steps: &[i64], patterns: &[Pattern]) -> RawCosts {
    build_rows(ctx, 0..ctx.mesh.vertex_count(), steps, || IfpdScratch::new(ctx), |s, i, c, step| {
        ifpd_raw(ctx, s, i, c, step, patterns)
    })
}

/// [`ifpd_raw_table`] restricted to some vertices; rows are in `rows` order.
pub fn ifpd_raw_rows(ctx: &CostContext, rows: &[usize], steps: &[i64], patterns: &[Pattern]) -> RawCosts {
    build_rows(ctx, rows.iter().copied(), steps, || IfpdScratch::new(ctx), |s, i, c, step| {
        ifpd_raw(ctx, s, i, c, step, patterns)
    })
}

/// Min-max normalize in place. A constant input maps to all zeros.
/// Returns the `(min, max)` that was used.
pub fn normalize(values: &mut [f64]) -> (f64, f64) {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let span = hi - lo;
    for v in values.iter_mut() {
        *v = if span > 0.0 { (*v - lo) / span } else { 0.0 };
    }
    (lo, hi)
}

/// Final costs `rho(i, j, d)` for every vertex, channel and change step.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostTable {
    pub vertex_count: usize,
    /// Change steps in units of `10^-k*`, in the order of the last index.
    pub steps: Vec<i64>,
    /// Laid out as `(i * 3 + j) * steps.len() + d`.
    pub costs: Vec<f64>,
    pub profile: Profile,
    pub options: CostOptions,
    /// `(min, max)` used when each component was normalized.
    pub ranges: Vec<(f64, f64)>,
}

impl CostTable {
    #[inline]
    pub fn get(&self, i: usize, channel: Channel, d: usize) -> f64 {
        self.costs[(i * 3 + channel.index()) * self.steps.len() + d]
    }

    /// Costs of all changes for one vertex and channel.
    #[inline]
    pub fn row(&self, i: usize, channel: Channel) -> &[f64] {
        let w = self.steps.len();
        let s = (i * 3 + channel.index()) * w;
        &self.costs[s..s + w]
    }

    /// Build a table from costs given in the same layout, without normalizing.
    pub fn from_raw(vertex_count: usize, steps: Vec<i64>, costs: Vec<f64>, profile: Profile) -> Self {
        assert_eq!(costs.len(), vertex_count * 3 * steps.len(), "cost table shape");
        CostTable {
            vertex_count,
            steps,
            costs,
            profile,
            options: CostOptions::default(),
            ranges: Vec::new(),
        }
    }

    /// Export as `vertex,channel,step,cost` lines with a header row.
    pub fn write_costmap<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "vertex,channel,step,cost")?;
        for i in 0..self.vertex_count {
            for channel in Channel::ALL {
                for (d, &step) in self.steps.iter().enumerate() {
                    writeln!(out, "{i},{channel},{step},{:e}", self.get(i, channel, d))?;
                }
            }
        }
        Ok(())
    }
}

/// Normalize each selected pattern's raw costs globally, sum them and scale
/// by `mu`.
pub fn combine(raw: &RawCosts, patterns: &[Pattern], mu: f64, profile: Profile) -> CostTable {
    let len = raw.values[0].len();
    let mut costs = vec![0.0; len];
    let mut ranges = Vec::new();
    for &p in patterns {
        let mut v = raw.values[p.index() - 1].clone();
        ranges.push(normalize(&mut v));
        for (c, x) in costs.iter_mut().zip(&v) {
            *c += x;
        }
    }
    for c in costs.iter_mut() {
        *c *= mu;
    }
    CostTable {
        vertex_count: raw.vertex_count,
        steps: raw.steps.clone(),
        costs,
        profile,
        options: CostOptions {
            mu,
            ..CostOptions::default()
        },
        ranges,
    }
}

/// Feature-preserving cost table over `steps` using the incremental method.
pub fn ifpd_cost_table(
    mesh: &Mesh,
    k_star: u32,
    steps: &[i64],
    patterns: &[Pattern],
    mu: f64,
) -> Result<CostTable, QuantError> {
    let ctx = CostContext::new(mesh, k_star)?;
    let profile = match patterns {
        [Pattern::VertexRing] => Profile::IfpdS1,
        [Pattern::FaceEdge] => Profile::IfpdS2,
        [Pattern::FaceVertex] => Profile::IfpdS3,
        _ => Profile::IfpdCs,
    };
    Ok(combine(&ifpd_raw_table(&ctx, steps, patterns), patterns, mu, profile))
}

/// `1 / (ln(|n_v - n_SM(v)| + 1) + sigma)`.
pub fn vnd_cost(mesh: &Mesh, smoothed: &Mesh, v: usize, sigma: f64) -> f64 {
    let a = vertex_normal(mesh, v).expect("vertex in range");
    let b = vertex_normal(smoothed, v).expect("vertex in range");
    1.0 / ((norm(sub(a, b)) + 1.0).ln() + sigma)
}

/// `1 / (|K(v)|^beta + sigma)`. The magnitude keeps the cost positive on
/// saddle vertices.
pub fn gcd_cost(mesh: &Mesh, v: usize, sigma: f64, beta: f64) -> f64 {
    let k = gaussian_curvature(mesh, v).expect("vertex in range");
    1.0 / (k.abs().powf(beta) + sigma)
}

/// Table where every non-zero change of vertex `i` costs `per_vertex[i]`,
/// then normalized and scaled by `mu`.
pub fn flat_cost_table(per_vertex: &[f64], steps: &[i64], profile: Profile, options: CostOptions) -> CostTable {
    let mut costs = Vec::with_capacity(per_vertex.len() * 3 * steps.len());
    for &c in per_vertex {
        for _ in Channel::ALL {
            costs.extend(steps.iter().map(|&s| if s == 0 { 0.0 } else { c }));
        }
    }
    let range = normalize(&mut costs);
    for c in costs.iter_mut() {
        *c *= options.mu;
    }
    CostTable {
        vertex_count: per_vertex.len(),
        steps: steps.to_vec(),
        costs,
        profile,
        options,
        ranges: vec![range],
    }
}

/// Unnormalized dihedral-angle costs: the summed absolute change of every
/// interior-edge dihedral angle next to the moved vertex.
pub fn dihedral_raw_table(ctx: &CostContext, steps: &[i64]) -> Vec<f64> {
    let mesh = ctx.mesh;
    let edges = interior_edges(mesh);
    let mut by_face: Vec<Vec<usize>> = vec![Vec::new(); mesh.face_count()];
    for (k, e) in edges.iter().enumerate() {
        by_face[e.faces.0].push(k);
        by_face[e.faces.1].push(k);
    }
    let base: Vec<f64> = edges
        .iter()
        .map(|e| angle(ctx.geometry[e.faces.0].normal, ctx.geometry[e.faces.1].normal))
        .collect();
    let rows: Vec<Vec<f64>> = (0..mesh.vertex_count())
        .into_par_iter()
        .map_init(
            || IfpdScratch::new(ctx),
            |s, i| {
                let ring = mesh.topology().vertex_faces(i);
                let mut local: Vec<usize> = ring.iter().flat_map(|&f| by_face[f].iter().copied()).collect();
                local.sort_unstable();
                local.dedup();
                let mut out = Vec::with_capacity(3 * steps.len());
                for channel in Channel::ALL {
                    for &step in steps {
                        if step == 0 {
                            out.push(0.0);
                            continue;
                        }
                        s.vertices[i] = ctx.moved_vertex(i, channel, step);
                        for &f in ring {
                            s.geometry[f] = face_geometry_with(&s.vertices, mesh.faces()[f]);
                        }
                        let mut acc = 0.0;
                        for &k in &local {
                            let e = &edges[k];
                            let t = angle(s.geometry[e.faces.0].normal, s.geometry[e.faces.1].normal);
                            acc += (t - base[k]).abs();
                        }
                        out.push(acc);
                        s.vertices[i] = ctx.vertices[i];
                        for &f in ring {
                            s.geometry[f] = ctx.geometry[f];
                        }
                    }
                }
                out
            },
        )
        .collect();
    rows.concat()
}

/// Cost table for any profile.
pub fn compute_costs(
    mesh: &Mesh,
    k_star: u32,
    steps: &[i64],
    profile: Profile,
    options: CostOptions,
) -> Result<CostTable, QuantError> {
    let ctx = CostContext::new(mesh, k_star)?;
    let mut table = match profile {
        Profile::IfpdCs | Profile::IfpdS1 | Profile::IfpdS2 | Profile::IfpdS3 => {
            combine(&ifpd_raw_table(&ctx, steps, profile.patterns()), profile.patterns(), options.mu, profile)
        }
        Profile::Vnd | Profile::Gcd => {
            let quantized = mesh.with_vertices(ctx.vertices.clone());
            let smoothed = default_smooth(&quantized);
            let per_vertex: Vec<f64> = (0..mesh.vertex_count())
                .into_par_iter()
                .map(|v| match profile {
                    Profile::Vnd => vnd_cost(&quantized, &smoothed, v, options.sigma),
                    _ => gcd_cost(&quantized, v, options.sigma, options.beta),
                })
                .collect();
            flat_cost_table(&per_vertex, steps, profile, options)
        }
        Profile::Dihedral => {
            let mut costs = dihedral_raw_table(&ctx, steps);
            let range = normalize(&mut costs);
            for c in costs.iter_mut() {
                *c *= options.mu;
            }
            CostTable {
                vertex_count: mesh.vertex_count(),
                steps: steps.to_vec(),
                costs,
                profile,
                options,
                ranges: vec![range],
            }
        }
    };
    table.options = options;
    Ok(table)
}

/// Unnormalized costs of a profile: the plain sum of the selected pattern
/// costs, the per-vertex VND/GCD values, or dihedral changes in radians.
pub fn raw_costs(
    mesh: &Mesh,
    k_star: u32,
    steps: &[i64],
    profile: Profile,
    options: CostOptions,
) -> Result<CostTable, QuantError> {
    let ctx = CostContext::new(mesh, k_star)?;
    let n = mesh.vertex_count();
    let costs = match profile {
        Profile::IfpdCs | Profile::IfpdS1 | Profile::IfpdS2 | Profile::IfpdS3 => {
            let raw = ifpd_raw_table(&ctx, steps, profile.patterns());
            (0..raw.values[0].len())
                .map(|e| profile.patterns().iter().map(|p| raw.values[p.index() - 1][e]).sum())
                .collect()
        }
        Profile::Vnd | Profile::Gcd => {
            let quantized = mesh.with_vertices(ctx.vertices.clone());
            let smoothed = default_smooth(&quantized);
            let mut costs = Vec::with_capacity(n * 3 * steps.len());
            for v in 0..n {
                let c = match profile {
                    Profile::Vnd => vnd_cost(&quantized, &smoothed, v, options.sigma),
                    _ => gcd_cost(&quantized, v, options.sigma, options.beta),
                };
                for _ in Channel::ALL {
                    costs.extend(steps.iter().map(|&s| if s == 0 { 0.0 } else { c }));
                }
            }
            costs
        }
        Profile::Dihedral => dihedral_raw_table(&ctx, steps),
    };
    let mut table = CostTable::from_raw(n, steps.to_vec(), costs, profile);
    table.options = options;
    Ok(table)
}
