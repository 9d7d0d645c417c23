//! Closed triangle meshes of folded Kresling stacks and their enclosed volume.

use std::collections::HashMap;
use std::f64::consts::TAU;
use std::io::{self, Write};

use thiserror::Error;

use crate::geometry::{
    derive_segment, segment_height, GeometryError, KreslingParams, Stability,
};

const MM3_PER_M3: f64 = 1e9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("edge ({0}, {1}) is used by {2} triangles, expected 2")]
    NonManifoldEdge(usize, usize, usize),
    #[error("edge ({0}, {1}) is traversed twice in the same direction")]
    InconsistentOrientation(usize, usize),
    #[error("triangle {0} references a missing vertex")]
    BadIndex(usize),
}

/// Indexed triangle mesh. Coordinates in millimetres.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TriMesh {
    pub vertices: Vec<[f64; 3]>,
    pub triangles: Vec<[usize; 3]>,
}

impl TriMesh {
    /// Undirected edges, each listed once with the smaller index first.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut edges: Vec<_> = self
            .triangles
            .iter()
            .flat_map(|t| [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])])
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        edges.sort_unstable();
        edges.dedup();
        edges
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.edges().len() as i64 + self.triangles.len() as i64
    }

    pub fn edge_length(&self, a: usize, b: usize) -> f64 {
        dist(self.vertices[a], self.vertices[b])
    }

    /// Every edge shared by exactly two triangles traversing it in
    /// opposite directions.
    pub fn check_closed(&self) -> Result<(), MeshError> {
        let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
        for (i, t) in self.triangles.iter().enumerate() {
            if t.iter().any(|&v| v >= self.vertices.len()) {
                return Err(MeshError::BadIndex(i));
            }
            for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
                *directed.entry((a, b)).or_default() += 1;
            }
        }
        let mut keys: Vec<_> = directed.keys().copied().collect();
        keys.sort_unstable();
        for (a, b) in keys {
            let fwd = directed[&(a, b)];
            if fwd > 1 {
                return Err(MeshError::InconsistentOrientation(a, b));
            }
            let back = directed.get(&(b, a)).copied().unwrap_or(0);
            if back != 1 {
                return Err(MeshError::NonManifoldEdge(a.min(b), a.max(b), fwd + back));
            }
        }
        Ok(())
    }

    /// Writes the mesh as Wavefront OBJ (1-based face indices).
    pub fn write_obj<W: Write>(&self, mut w: W, header: &[String]) -> io::Result<()> {
        for line in header {
            writeln!(w, "# {line}")?;
        }
        writeln!(w, "# units: mm")?;
        for v in &self.vertices {
            writeln!(w, "v {:.6} {:.6} {:.6}", v[0], v[1], v[2])?;
        }
        for t in &self.triangles {
            writeln!(w, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1)?;
        }
        Ok(())
    }
}

/// Builds the closed surface of the whole stack at fold angle `alpha`.
///
/// Ring `k` sits at height `k h(alpha)`; odd rings are rotated by `alpha`
/// so consecutive segments twist in opposite senses and each pair of
/// segments translates without net rotation. Vertex layout: ring `k`,
/// corner `j` at index `k n + j`, then the bottom and top cap centres.
pub fn build_mesh(params: &KreslingParams, alpha: f64) -> Result<TriMesh, MeshError> {
    let geom = derive_segment(params, Stability::Any)?;
    crate::geometry::fold_state(&geom, params, alpha)?;
    let height = segment_height(&geom, params, alpha).unwrap_or(0.0);
    Ok(assemble(params, alpha, height))
}

fn assemble(params: &KreslingParams, alpha: f64, height: f64) -> TriMesh {
    let n = params.sides as usize;
    let m = params.segments as usize;
    let r = params.radius_mm;

    let mut vertices = Vec::with_capacity(n * (m + 1) + 2);
    for k in 0..=m {
        let twist = if k % 2 == 1 { alpha } else { 0.0 };
        let z = k as f64 * height;
        for j in 0..n {
            let theta = twist + TAU * j as f64 / n as f64;
            vertices.push([r * theta.cos(), r * theta.sin(), z]);
        }
    }
    let bottom = vertices.len();
    vertices.push([0.0, 0.0, 0.0]);
    let top = vertices.len();
    vertices.push([0.0, 0.0, m as f64 * height]);

    let idx = |k: usize, j: usize| k * n + j % n;
    let mut triangles = Vec::with_capacity(2 * n + 2 * n * m);
    for k in 0..m {
        for j in 0..n {
            let (b0, b1) = (idx(k, j), idx(k, j + 1));
            let (t0, t1) = (idx(k + 1, j), idx(k + 1, j + 1));
            if k % 2 == 0 {
                // valley diagonal b0 -> t1
                triangles.push([b0, b1, t1]);
                triangles.push([b0, t1, t0]);
            } else {
                // mirrored: valley diagonal b1 -> t0
                triangles.push([b1, t0, b0]);
                triangles.push([b1, t1, t0]);
            }
        }
    }
    for j in 0..n {
        triangles.push([bottom, idx(0, j + 1), idx(0, j)]);
        triangles.push([top, idx(m, j), idx(m, j + 1)]);
    }
    TriMesh {
        vertices,
        triangles,
    }
}

/// Signed volume by the divergence theorem, mm^3. Positive for outward
/// orientation; no topology check.
pub fn signed_volume_mm3(mesh: &TriMesh) -> f64 {
    mesh.triangles
        .iter()
        .map(|t| {
            let [a, b, c] = t.map(|i| mesh.vertices[i]);
            dot(a, cross(b, c))
        })
        .sum::<f64>()
        / 6.0
}

/// Enclosed volume in m^3 of a closed, consistently oriented mesh.
pub fn enclosed_volume(mesh: &TriMesh) -> Result<f64, MeshError> {
    mesh.check_closed()?;
    Ok(signed_volume_mm3(mesh) / MM3_PER_M3)
}

pub(crate) fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    dot(d, d).sqrt()
}
