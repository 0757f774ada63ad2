//! 2D simplicial meshes: structured rectangles and a ring-graded unit disk.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::{Error, Result};

/// A conforming triangle mesh with boundary markers.
///
/// Invariants enforced by [`Mesh::new`]: strictly positive signed areas,
/// every edge shared by at most two triangles, boundary edges belong to
/// exactly one, and the boundary flags equal the endpoint set of the
/// boundary edges.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    /// Node coordinates.
    pub nodes: Vec<[f64; 2]>,
    /// Node-index triples, counterclockwise.
    pub triangles: Vec<[usize; 3]>,
    /// Per-node boundary flag.
    pub boundary: Vec<bool>,
    /// Characteristic edge length (longest edge).
    pub h: f64,
}

impl Mesh {
    /// Validate connectivity and orientation and derive `h`.
    ///
    /// `boundary` flags are checked against the topological boundary.
    pub fn new(
        nodes: Vec<[f64; 2]>,
        triangles: Vec<[usize; 3]>,
        boundary: Vec<bool>,
    ) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::OutOfRange { what: "empty node list" });
        }
        if boundary.len() != nodes.len() {
            return Err(Error::DimensionMismatch { expected: nodes.len(), got: boundary.len() });
        }
        let mut edge_count: BTreeMap<(usize, usize), u8> = BTreeMap::new();
        let mut h = 0.0_f64;
        for (t, tri) in triangles.iter().enumerate() {
            for &v in tri {
                if v >= nodes.len() {
                    return Err(Error::DimensionMismatch { expected: nodes.len(), got: v });
                }
            }
            if signed_area(&nodes, tri) <= 0.0 {
                return Err(Error::DegenerateTriangle { index: t });
            }
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                let key = if a < b { (a, b) } else { (b, a) };
                let c = edge_count.entry(key).or_insert(0);
                *c += 1;
                if *c > 2 {
                    return Err(Error::DegenerateTriangle { index: t });
                }
                let (pa, pb) = (nodes[a], nodes[b]);
                let e = libm::sqrt(
                    (pa[0] - pb[0]) * (pa[0] - pb[0]) + (pa[1] - pb[1]) * (pa[1] - pb[1]),
                );
                if e > h {
                    h = e;
                }
            }
        }
        // boundary flags must equal the endpoints of single-triangle edges
        let mut on_boundary = alloc::vec![false; nodes.len()];
        for (&(a, b), &c) in &edge_count {
            if c == 1 {
                on_boundary[a] = true;
                on_boundary[b] = true;
            }
        }
        if on_boundary != boundary {
            return Err(Error::CrossCheckFailed {
                what: "boundary flags disagree with boundary edges",
            });
        }
        Ok(Mesh { nodes, triangles, boundary, h })
    }

    /// Signed (positive) area of triangle `t`.
    pub fn tri_area(&self, t: usize) -> f64 {
        signed_area(&self.nodes, &self.triangles[t])
    }

    /// Per-triangle areas, in triangle order.
    pub fn areas(&self) -> Vec<f64> {
        (0..self.triangles.len()).map(|t| self.tri_area(t)).collect()
    }

    /// Total mesh area.
    pub fn area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.tri_area(t)).sum()
    }

    /// Indices of non-boundary nodes, ascending.
    pub fn interior_nodes(&self) -> Vec<usize> {
        (0..self.nodes.len()).filter(|&i| !self.boundary[i]).collect()
    }

    /// Smallest interior angle over all triangles, in degrees.
    pub fn min_angle_deg(&self) -> f64 {
        let mut min = f64::INFINITY;
        for tri in &self.triangles {
            for k in 0..3 {
                let p = self.nodes[tri[k]];
                let a = self.nodes[tri[(k + 1) % 3]];
                let b = self.nodes[tri[(k + 2) % 3]];
                let u = [a[0] - p[0], a[1] - p[1]];
                let v = [b[0] - p[0], b[1] - p[1]];
                let dot = u[0] * v[0] + u[1] * v[1];
                let nu = libm::sqrt(u[0] * u[0] + u[1] * u[1]);
                let nv = libm::sqrt(v[0] * v[0] + v[1] * v[1]);
                let angle = libm::acos((dot / (nu * nv)).clamp(-1.0, 1.0));
                if angle < min {
                    min = angle;
                }
            }
        }
        min * 180.0 / PI
    }

    /// Number of distinct edges.
    pub fn edge_count(&self) -> usize {
        let mut edges: BTreeMap<(usize, usize), ()> = BTreeMap::new();
        for tri in &self.triangles {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                edges.insert(if a < b { (a, b) } else { (b, a) }, ());
            }
        }
        edges.len()
    }
}

fn signed_area(nodes: &[[f64; 2]], tri: &[usize; 3]) -> f64 {
    let [a, b, c] = [nodes[tri[0]], nodes[tri[1]], nodes[tri[2]]];
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

/// Ring-graded mesh of the unit disk with `h ~ 1/refinement`.
///
/// Ring `i` carries `6i` nodes at radius `i/n`; consecutive rings are
/// stitched by an angular two-pointer sweep, giving `6 n^2` near-equilateral
/// triangles. Deterministic by construction; boundary nodes sit on the unit
/// circle up to one rounding of `cos`/`sin`.
pub fn disk_mesh(refinement: usize) -> Mesh {
    assert!(refinement >= 1, "refinement must be >= 1");
    let n = refinement;
    let mut nodes = alloc::vec![[0.0_f64, 0.0]];
    let mut ring_start = alloc::vec![0usize; n + 1];
    for i in 1..=n {
        ring_start[i] = nodes.len();
        let r = i as f64 / n as f64;
        let count = 6 * i;
        for j in 0..count {
            let phi = 2.0 * PI * j as f64 / count as f64;
            nodes.push([r * libm::cos(phi), r * libm::sin(phi)]);
        }
    }
    let mut triangles = Vec::with_capacity(6 * n * n);
    let mut push = |nodes: &[[f64; 2]], a: usize, b: usize, c: usize| {
        let mut tri = [a, b, c];
        if signed_area(nodes, &tri) < 0.0 {
            tri.swap(1, 2);
        }
        triangles.push(tri);
    };
    // central fan
    for j in 0..6 {
        push(&nodes, 0, ring_start[1] + j, ring_start[1] + (j + 1) % 6);
    }
    // bands
    for i in 2..=n {
        let (s1, m1) = (ring_start[i - 1], 6 * (i - 1));
        let (s2, m2) = (ring_start[i], 6 * i);
        let (mut j1, mut j2) = (0usize, 0usize);
        // advance around both rings by increasing angle
        while j1 < m1 || j2 < m2 {
            let a1 = (j1 + 1) as f64 / m1 as f64;
            let a2 = (j2 + 1) as f64 / m2 as f64;
            if j2 < m2 && (j1 == m1 || a2 <= a1) {
                push(&nodes, s1 + j1 % m1, s2 + j2, s2 + (j2 + 1) % m2);
                j2 += 1;
            } else {
                push(&nodes, s1 + j1, s1 + (j1 + 1) % m1, s2 + j2 % m2);
                j1 += 1;
            }
        }
    }
    let mut boundary = alloc::vec![false; nodes.len()];
    for k in ring_start[n]..nodes.len() {
        boundary[k] = true;
    }
    Mesh::new(nodes, triangles, boundary).expect("generated disk mesh is valid")
}

/// Structured rectangle mesh: `nx * ny` cells split along the
/// lower-left/upper-right diagonal, two triangles per cell.
pub fn rect_mesh(nx: usize, ny: usize, width: f64, height: f64) -> Mesh {
    assert!(nx >= 1 && ny >= 1, "cell counts must be >= 1");
    assert!(width > 0.0 && height > 0.0, "dimensions must be positive");
    let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            nodes.push([width * i as f64 / nx as f64, height * j as f64 / ny as f64]);
        }
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut triangles = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (n00, n10, n01, n11) = (id(i, j), id(i + 1, j), id(i, j + 1), id(i + 1, j + 1));
            triangles.push([n00, n10, n11]);
            triangles.push([n00, n11, n01]);
        }
    }
    let mut boundary = alloc::vec![false; nodes.len()];
    for j in 0..=ny {
        for i in 0..=nx {
            if i == 0 || j == 0 || i == nx || j == ny {
                boundary[id(i, j)] = true;
            }
        }
    }
    Mesh::new(nodes, triangles, boundary).expect("generated rect mesh is valid")
}
