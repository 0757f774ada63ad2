//! Jacobi-preconditioned conjugate gradients for SPD systems.

use alloc::vec::Vec;

use crate::fem::CsrMatrix;
use crate::{Error, Result};

/// Outcome of a CG solve.
#[derive(Debug, Clone)]
pub struct CgSolution {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Final relative residual `||b - Ax|| / ||b||`.
    pub residual: f64,
    pub converged: bool,
}

/// Solve `A x = b` with Jacobi-preconditioned CG, starting from `x0`
/// (pass zeros for a cold start). `A` must be SPD.
pub fn pcg(a: &CsrMatrix, b: &[f64], x0: &[f64], tol: f64, max_iter: usize) -> Result<CgSolution> {
    let n = a.n;
    if b.len() != n || x0.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: b.len() });
    }
    let inv_diag: Vec<f64> = a
        .diag()
        .iter()
        .map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 })
        .collect();
    let norm_b = libm::sqrt(dot(b, b));
    if norm_b == 0.0 {
        return Ok(CgSolution { x: alloc::vec![0.0; n], iterations: 0, residual: 0.0, converged: true });
    }
    let mut x = x0.to_vec();
    let mut r = alloc::vec![0.0; n];
    a.matvec(&x, &mut r);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(ri, di)| ri * di).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = alloc::vec![0.0; n];
    for it in 0..max_iter {
        let res = libm::sqrt(dot(&r, &r)) / norm_b;
        if res <= tol {
            return Ok(CgSolution { x, iterations: it, residual: res, converged: true });
        }
        a.matvec(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            return Err(Error::OutOfRange { what: "matrix not positive definite in CG" });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    let res = libm::sqrt(dot(&r, &r)) / norm_b;
    Ok(CgSolution { x, iterations: max_iter, residual: res, converged: res <= tol })
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{assemble_stiffness, restrict_to_interior, DensityField};
    use crate::mesh::rect_mesh;
    use alloc::vec;

    #[test]
    fn solves_identity() {
        let a = CsrMatrix::from_triplets(3, &[(0, 0, 1.0), (1, 1, 1.0), (2, 2, 1.0)]);
        let sol = pcg(&a, &[1.0, 2.0, 3.0], &[0.0; 3], 1e-14, 10).unwrap();
        assert!(sol.converged);
        assert!((sol.x[2] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn solves_interior_laplacian() {
        let mesh = rect_mesh(12, 12, 1.0, 1.0);
        let k = assemble_stiffness(&mesh, &DensityField::zero(&mesh, 2.0), 0.0).unwrap();
        let ki = restrict_to_interior(&k, &mesh);
        let b = vec![1.0; ki.n];
        let sol = pcg(&ki, &b, &vec![0.0; ki.n], 1e-12, 1000).unwrap();
        assert!(sol.converged, "residual {}", sol.residual);
        // verify against the residual definition directly
        let mut ax = vec![0.0; ki.n];
        ki.matvec(&sol.x, &mut ax);
        let err: f64 = ax.iter().zip(&b).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
        assert!(err.sqrt() < 1e-10);
    }

    #[test]
    fn warm_start_reduces_iterations() {
        let mesh = rect_mesh(12, 12, 1.0, 1.0);
        let k = assemble_stiffness(&mesh, &DensityField::zero(&mesh, 2.0), 0.0).unwrap();
        let ki = restrict_to_interior(&k, &mesh);
        let b = vec![1.0; ki.n];
        let cold = pcg(&ki, &b, &vec![0.0; ki.n], 1e-12, 1000).unwrap();
        let warm = pcg(&ki, &b, &cold.x, 1e-12, 1000).unwrap();
        assert!(warm.iterations <= 1);
    }
}
