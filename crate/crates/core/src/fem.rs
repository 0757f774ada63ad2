//! P1 finite elements: weighted stiffness `int (1 + m theta) grad u . grad v`,
//! consistent mass `int u v`, exact per-triangle gradients and L^p mass.
//!
//! The density is piecewise constant per triangle, which makes the
//! closed-form density update of the optimizer exact for P1 gradients.

use alloc::vec::Vec;

use crate::mesh::Mesh;
use crate::{Error, Result};

/// Symmetric sparse matrix in CSR layout.
///
/// Assembly is strictly ordered (triangles in index order, triplets sorted
/// by row then column with a stable sort), so repeated assembly of the same
/// problem is bitwise identical.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<f64>,
}

impl CsrMatrix {
    /// Build from (row, col, value) triplets, summing duplicates.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut order: Vec<usize> = (0..triplets.len()).collect();
        order.sort_by_key(|&k| (triplets[k].0, triplets[k].1));
        let mut row_ptr = alloc::vec![0usize; n + 1];
        let mut cols = Vec::new();
        let mut vals: Vec<f64> = Vec::new();
        let mut last: Option<(usize, usize)> = None;
        for &k in &order {
            let (i, j, v) = triplets[k];
            if last == Some((i, j)) {
                *vals.last_mut().unwrap() += v;
            } else {
                row_ptr[i + 1] += 1;
                cols.push(j);
                vals.push(v);
                last = Some((i, j));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        CsrMatrix { n, row_ptr, cols, vals }
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.n {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            y[i] = acc;
        }
    }

    /// Diagonal entries (zero where absent).
    pub fn diag(&self) -> Vec<f64> {
        let mut d = alloc::vec![0.0; self.n];
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                if self.cols[k] == i {
                    d[i] = self.vals[k];
                }
            }
        }
        d
    }

    /// `x^T A y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.n {
            let mut row = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                row += self.vals[k] * y[self.cols[k]];
            }
            acc += x[i] * row;
        }
        acc
    }

    /// Maximum relative asymmetry `|a_ij - a_ji| / max|a|`.
    pub fn asymmetry(&self) -> f64 {
        let scale = self.vals.iter().fold(0.0_f64, |m, v| m.max(libm::fabs(*v)));
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst = 0.0_f64;
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.cols[k];
                let aji = self.get(j, i);
                worst = worst.max(libm::fabs(self.vals[k] - aji));
            }
        }
        worst / scale
    }

    fn get(&self, i: usize, j: usize) -> f64 {
        for k in self.row_ptr[i]..self.row_ptr[i + 1] {
            if self.cols[k] == j {
                return self.vals[k];
            }
        }
        0.0
    }

    /// Entries as (row, col, value) in row-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| {
            (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |k| (i, self.cols[k], self.vals[k]))
        })
    }
}

/// Element-wise reinforcement density with its governing exponent.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityField {
    /// One value per triangle, all nonnegative.
    pub values: Vec<f64>,
    /// Exponent of the admissible class (p >= 1).
    pub p: f64,
}

impl DensityField {
    pub fn new(values: Vec<f64>, p: f64) -> Result<Self> {
        if p < 1.0 || !p.is_finite() {
            return Err(Error::OutOfRange { what: "density exponent p must be >= 1" });
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::OutOfRange { what: "density values must be >= 0" });
        }
        Ok(DensityField { values, p })
    }

    /// Uniformly zero density.
    pub fn zero(mesh: &Mesh, p: f64) -> Self {
        DensityField { values: alloc::vec![0.0; mesh.triangles.len()], p }
    }
}

/// `(sum_T area_T theta_T^p)^(1/p)`.
pub fn lp_mass(mesh: &Mesh, theta: &DensityField, p: f64) -> Result<f64> {
    if p < 1.0 {
        return Err(Error::OutOfRange { what: "exponent p must be >= 1" });
    }
    check_field(mesh, theta)?;
    let mut acc = 0.0;
    for (t, &v) in theta.values.iter().enumerate() {
        acc += mesh.tri_area(t) * libm::pow(v, p);
    }
    Ok(libm::pow(acc, 1.0 / p))
}

fn check_field(mesh: &Mesh, theta: &DensityField) -> Result<()> {
    if theta.values.len() != mesh.triangles.len() {
        return Err(Error::DimensionMismatch {
            expected: mesh.triangles.len(),
            got: theta.values.len(),
        });
    }
    Ok(())
}

/// Barycentric gradients and area of one triangle.
fn tri_geometry(mesh: &Mesh, t: usize) -> ([[f64; 2]; 3], f64) {
    let [i, j, k] = mesh.triangles[t];
    let (a, b, c) = (mesh.nodes[i], mesh.nodes[j], mesh.nodes[k]);
    let area2 = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
    let g = [
        [(b[1] - c[1]) / area2, (c[0] - b[0]) / area2],
        [(c[1] - a[1]) / area2, (a[0] - c[0]) / area2],
        [(a[1] - b[1]) / area2, (b[0] - a[0]) / area2],
    ];
    (g, 0.5 * area2)
}

/// Full (pre-elimination) weighted stiffness matrix over all nodes:
/// entry `(i, j) = sum_T (1 + m theta_T) int_T grad phi_i . grad phi_j`.
pub fn assemble_stiffness(mesh: &Mesh, theta: &DensityField, m: f64) -> Result<CsrMatrix> {
    if m < 0.0 || !m.is_finite() {
        return Err(Error::OutOfRange { what: "stiffness m must be >= 0" });
    }
    check_field(mesh, theta)?;
    let mut triplets = Vec::with_capacity(9 * mesh.triangles.len());
    for t in 0..mesh.triangles.len() {
        let (g, area) = tri_geometry(mesh, t);
        let coeff = (1.0 + m * theta.values[t]) * area;
        let tri = mesh.triangles[t];
        for a in 0..3 {
            for b in 0..3 {
                triplets.push((tri[a], tri[b], coeff * (g[a][0] * g[b][0] + g[a][1] * g[b][1])));
            }
        }
    }
    Ok(CsrMatrix::from_triplets(mesh.nodes.len(), &triplets))
}

/// Full consistent P1 mass matrix; local block `(area/12) [[2,1,1],[1,2,1],[1,1,2]]`.
pub fn assemble_mass(mesh: &Mesh) -> CsrMatrix {
    let mut triplets = Vec::with_capacity(9 * mesh.triangles.len());
    for t in 0..mesh.triangles.len() {
        let area = mesh.tri_area(t);
        let tri = mesh.triangles[t];
        for a in 0..3 {
            for b in 0..3 {
                let w = if a == b { 2.0 } else { 1.0 };
                triplets.push((tri[a], tri[b], w * area / 12.0));
            }
        }
    }
    CsrMatrix::from_triplets(mesh.nodes.len(), &triplets)
}

/// Restrict a full matrix to the interior (non-boundary) nodes, eliminating
/// Dirichlet rows and columns. Row/column order follows
/// [`Mesh::interior_nodes`].
pub fn restrict_to_interior(mat: &CsrMatrix, mesh: &Mesh) -> CsrMatrix {
    let interior = mesh.interior_nodes();
    let mut new_index = alloc::vec![usize::MAX; mesh.nodes.len()];
    for (ni, &old) in interior.iter().enumerate() {
        new_index[old] = ni;
    }
    let mut triplets = Vec::new();
    for (i, j, v) in mat.triplets() {
        if new_index[i] != usize::MAX && new_index[j] != usize::MAX {
            triplets.push((new_index[i], new_index[j], v));
        }
    }
    CsrMatrix::from_triplets(interior.len(), &triplets)
}

/// Scatter an interior-node vector back to all nodes, zero on the boundary.
pub fn extend_by_zero(mesh: &Mesh, interior_values: &[f64]) -> Vec<f64> {
    let interior = mesh.interior_nodes();
    let mut full = alloc::vec![0.0; mesh.nodes.len()];
    for (ni, &old) in interior.iter().enumerate() {
        full[old] = interior_values[ni];
    }
    full
}

/// Constant gradient of the P1 interpolant on every triangle.
pub fn element_gradients(mesh: &Mesh, u: &[f64]) -> Result<Vec<[f64; 2]>> {
    if u.len() != mesh.nodes.len() {
        return Err(Error::DimensionMismatch { expected: mesh.nodes.len(), got: u.len() });
    }
    let mut grads = Vec::with_capacity(mesh.triangles.len());
    for t in 0..mesh.triangles.len() {
        let (g, area) = tri_geometry(mesh, t);
        if area <= 0.0 || !area.is_finite() {
            return Err(Error::DegenerateTriangle { index: t });
        }
        let tri = mesh.triangles[t];
        let mut gx = 0.0;
        let mut gy = 0.0;
        for a in 0..3 {
            gx += u[tri[a]] * g[a][0];
            gy += u[tri[a]] * g[a][1];
        }
        grads.push([gx, gy]);
    }
    Ok(grads)
}

/// Per-triangle gradient magnitudes.
pub fn gradient_magnitudes(grads: &[[f64; 2]]) -> Vec<f64> {
    grads.iter().map(|g| libm::sqrt(g[0] * g[0] + g[1] * g[1])).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{disk_mesh, rect_mesh, Mesh};
    use alloc::vec;

    fn unit_right_triangle() -> Mesh {
        Mesh::new(
            vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
            vec![[0, 1, 2]],
            vec![true, true, true],
        )
        .unwrap()
    }

    #[test]
    fn local_stiffness_matches_hand_assembly() {
        let mesh = unit_right_triangle();
        let theta = DensityField::zero(&mesh, 2.0);
        let k = assemble_stiffness(&mesh, &theta, 0.0).unwrap();
        let expected = [[1.0, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]];
        for i in 0..3 {
            for j in 0..3 {
                assert!((k.get(i, j) - expected[i][j]).abs() < 1e-14, "({i},{j})");
            }
        }
    }

    #[test]
    fn constant_coefficient_scales_local_matrix() {
        let mesh = unit_right_triangle();
        let theta0 = DensityField::zero(&mesh, 2.0);
        let theta1 = DensityField::new(vec![1.0], 2.0).unwrap();
        let k0 = assemble_stiffness(&mesh, &theta0, 0.0).unwrap();
        let k1 = assemble_stiffness(&mesh, &theta1, 2.0).unwrap();
        for (a, b) in k0.vals.iter().zip(&k1.vals) {
            assert!((3.0 * a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn stiffness_rows_sum_to_zero() {
        let mesh = disk_mesh(4);
        let k = assemble_stiffness(&mesh, &DensityField::zero(&mesh, 2.0), 0.0).unwrap();
        let ones = vec![1.0; k.n];
        let mut y = vec![0.0; k.n];
        k.matvec(&ones, &mut y);
        for v in y {
            assert!(v.abs() < 1e-12);
        }
    }

    #[test]
    fn local_mass_matches_hand_integration() {
        let mesh = unit_right_triangle();
        let m = assemble_mass(&mesh);
        let expected = [[2.0, 1.0, 1.0], [1.0, 2.0, 1.0], [1.0, 1.0, 2.0]];
        for i in 0..3 {
            for j in 0..3 {
                assert!((m.get(i, j) - expected[i][j] / 24.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn mass_entries_sum_to_domain_area() {
        let mesh = disk_mesh(8);
        let m = assemble_mass(&mesh);
        let total: f64 = m.vals.iter().sum();
        assert!((total - mesh.area()).abs() < 1e-12);
        assert!(m.asymmetry() == 0.0);
    }

    #[test]
    fn gradients_reproduce_linear_fields() {
        let mesh = rect_mesh(2, 2, 1.0, 1.0);
        let ux: Vec<f64> = mesh.nodes.iter().map(|p| p[0]).collect();
        for g in element_gradients(&mesh, &ux).unwrap() {
            assert!((g[0] - 1.0).abs() < 1e-14 && g[1].abs() < 1e-14);
        }
        let uc = vec![7.5; mesh.nodes.len()];
        for g in element_gradients(&mesh, &uc).unwrap() {
            assert!(g[0].abs() < 1e-13 && g[1].abs() < 1e-13);
        }
        let ul: Vec<f64> = mesh.nodes.iter().map(|p| 3.0 * p[0] + 4.0 * p[1]).collect();
        for m in gradient_magnitudes(&element_gradients(&mesh, &ul).unwrap()) {
            assert!((m - 5.0).abs() < 1e-13);
        }
    }

    #[test]
    fn patch_test_energy_of_linear_field() {
        // discrete energy of u = 3x + 4y equals 25 * area exactly
        let mesh = disk_mesh(6);
        let ul: Vec<f64> = mesh.nodes.iter().map(|p| 3.0 * p[0] + 4.0 * p[1]).collect();
        let k = assemble_stiffness(&mesh, &DensityField::zero(&mesh, 2.0), 0.0).unwrap();
        let energy = k.bilinear(&ul, &ul);
        assert!((energy - 25.0 * mesh.area()).abs() < 1e-12 * 25.0 * mesh.area());
    }

    #[test]
    fn lp_mass_examples() {
        let mesh = rect_mesh(3, 3, 1.0, 1.0);
        let area = mesh.area();
        for p in [1.0, 1.5, 2.0, 4.0] {
            let theta = DensityField::new(vec![0.7; mesh.triangles.len()], p).unwrap();
            let expect = 0.7 * libm::pow(area, 1.0 / p);
            assert!((lp_mass(&mesh, &theta, p).unwrap() - expect).abs() < 1e-12);
        }
        // theta = L/A at p = 1 has mass L
        let l = 0.424242;
        let theta = DensityField::new(vec![l / area; mesh.triangles.len()], 1.0).unwrap();
        assert!((lp_mass(&mesh, &theta, 1.0).unwrap() - l).abs() < 1e-12);
    }

    #[test]
    fn lp_mass_two_triangle_example() {
        // two area-1/2 triangles, theta = (1, 4), p = 2 -> sqrt(8.5)
        let mesh = rect_mesh(1, 1, 1.0, 1.0);
        let theta = DensityField::new(vec![1.0, 4.0], 2.0).unwrap();
        assert!((lp_mass(&mesh, &theta, 2.0).unwrap() - libm::sqrt(8.5)).abs() < 1e-12);
    }

    #[test]
    fn stiffness_monotone_in_theta() {
        let mesh = disk_mesh(3);
        let k0 = assemble_stiffness(&mesh, &DensityField::zero(&mesh, 2.0), 5.0).unwrap();
        // bump theta on a few triangles
        let mut vals = vec![0.0; mesh.triangles.len()];
        vals[0] = 0.5;
        vals[7] = 1.5;
        vals[20] = 0.1;
        let k1 =
            assemble_stiffness(&mesh, &DensityField::new(vals, 2.0).unwrap(), 5.0).unwrap();
        // quadratic form dominance on pseudo-random vectors
        let mut state = 0x9e3779b97f4a7c15_u64;
        for _ in 0..20 {
            let x: Vec<f64> = (0..k0.n)
                .map(|_| {
                    state = state
                        .wrapping_mul(6364136223846793005)
                        .wrapping_add(1442695040888963407);
                    (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
                })
                .collect();
            assert!(k1.bilinear(&x, &x) >= k0.bilinear(&x, &x) - 1e-12);
        }
    }

    #[test]
    fn assembly_is_deterministic() {
        let mesh = disk_mesh(5);
        let theta = DensityField::new(
            (0..mesh.triangles.len()).map(|t| (t % 7) as f64 * 0.1).collect(),
            1.5,
        )
        .unwrap();
        let a = assemble_stiffness(&mesh, &theta, 5.0).unwrap();
        let b = assemble_stiffness(&mesh, &theta, 5.0).unwrap();
        assert_eq!(a, b); // bitwise
        assert!(a.asymmetry() < 1e-14);
    }

    #[test]
    fn rejects_mismatched_field() {
        let mesh = disk_mesh(2);
        let theta = DensityField::new(vec![0.0; 3], 2.0).unwrap();
        assert!(assemble_stiffness(&mesh, &theta, 1.0).is_err());
    }

    #[test]
    fn interior_restriction_drops_boundary() {
        let mesh = rect_mesh(2, 2, 1.0, 1.0);
        let k = assemble_stiffness(&mesh, &DensityField::zero(&mesh, 2.0), 0.0).unwrap();
        let ki = restrict_to_interior(&k, &mesh);
        assert_eq!(ki.n, 1);
        // 5-point Laplacian center value 4 on the crossed... single-diagonal
        // grid: two cells' diagonals meet the center; value stays 4
        assert!((ki.get(0, 0) - 4.0).abs() < 1e-12);
        let full = extend_by_zero(&mesh, &[2.5]);
        assert_eq!(full[4], 2.5);
        assert_eq!(full.iter().filter(|&&v| v == 0.0).count(), 8);
    }
}
