//! Smallest eigenpair of the generalized symmetric pencil `K u = lambda M u`.
//!
//! Inverse power iteration with M-inner products; the inner solves use
//! Jacobi-preconditioned CG (see [`crate::linsolve`]), warm-started from the
//! current iterate. Deterministic all-ones start vector.

use alloc::vec::Vec;

use crate::fem::{assemble_mass, assemble_stiffness, extend_by_zero, restrict_to_interior, CsrMatrix, DensityField};
use crate::linsolve::{dot, pcg};
use crate::mesh::Mesh;
use crate::{Error, Result};

/// Converged (or best-effort) smallest eigenpair.
#[derive(Debug, Clone)]
pub struct EigenPair {
    /// Smallest eigenvalue of the pencil.
    pub lambda: f64,
    /// Eigenvector in the space of the supplied matrices, `u^T M u = 1`,
    /// sign fixed so the M-weighted mean is positive.
    pub u: Vec<f64>,
    /// `||K u - lambda M u|| / ||M u||`.
    pub residual: f64,
    /// Outer (power) iterations performed.
    pub iterations: usize,
    /// False when `max_iter` ran out first; the best pair so far is returned.
    pub converged: bool,
}

/// Inverse power iteration for the smallest eigenpair of `K u = lambda M u`.
///
/// `K` must be SPD (interior block after Dirichlet elimination), `M` SPD.
/// Pass `start = None` for the deterministic all-ones start.
pub fn smallest_eigenpair(
    k: &CsrMatrix,
    m: &CsrMatrix,
    tol: f64,
    max_iter: usize,
    start: Option<&[f64]>,
) -> Result<EigenPair> {
    if k.n != m.n {
        return Err(Error::DimensionMismatch { expected: k.n, got: m.n });
    }
    let n = k.n;
    if n == 0 {
        return Err(Error::OutOfRange { what: "empty eigenproblem" });
    }
    let mut x: Vec<f64> = match start {
        Some(v) if v.len() == n && dot(v, v) > 0.0 => v.to_vec(),
        _ => alloc::vec![1.0; n],
    };
    m_normalize(m, &mut x)?;
    let mut lambda = rayleigh_quotient(&x, k, m)?;
    let mut mx = alloc::vec![0.0; n];
    let mut y = x.clone();
    let mut residual = f64::INFINITY;
    for it in 1..=max_iter {
        m.matvec(&x, &mut mx);
        // warm start: x is already close to the solve target up to scale
        let guess: Vec<f64> = x.iter().map(|v| v / lambda).collect();
        let sol = pcg(k, &mx, &guess, (tol * 1e-2).max(1e-14), 40 * n + 100)?;
        y.copy_from_slice(&sol.x);
        m_normalize(m, &mut y)?;
        lambda = rayleigh_quotient(&y, k, m)?;
        residual = pencil_residual(k, m, &y, lambda);
        x.copy_from_slice(&y);
        if residual <= tol {
            fix_sign(m, &mut x);
            return Ok(EigenPair { lambda, u: x, residual, iterations: it, converged: true });
        }
    }
    fix_sign(m, &mut x);
    Ok(EigenPair { lambda, u: x, residual, iterations: max_iter, converged: false })
}

/// `(u^T K u) / (u^T M u)`; rejects the zero vector.
pub fn rayleigh_quotient(u: &[f64], k: &CsrMatrix, m: &CsrMatrix) -> Result<f64> {
    if u.len() != k.n {
        return Err(Error::DimensionMismatch { expected: k.n, got: u.len() });
    }
    let umu = m.bilinear(u, u);
    if umu <= 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(k.bilinear(u, u) / umu)
}

fn m_normalize(m: &CsrMatrix, x: &mut [f64]) -> Result<()> {
    let s = m.bilinear(x, x);
    if s <= 0.0 {
        return Err(Error::ZeroVector);
    }
    let inv = 1.0 / libm::sqrt(s);
    for v in x.iter_mut() {
        *v *= inv;
    }
    Ok(())
}

fn pencil_residual(k: &CsrMatrix, m: &CsrMatrix, u: &[f64], lambda: f64) -> f64 {
    let n = k.n;
    let mut ku = alloc::vec![0.0; n];
    let mut mu = alloc::vec![0.0; n];
    k.matvec(u, &mut ku);
    m.matvec(u, &mut mu);
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..n {
        let r = ku[i] - lambda * mu[i];
        num += r * r;
        den += mu[i] * mu[i];
    }
    libm::sqrt(num) / libm::sqrt(den)
}

fn fix_sign(m: &CsrMatrix, x: &mut [f64]) {
    let mut mx = alloc::vec![0.0; m.n];
    m.matvec(x, &mut mx);
    if mx.iter().sum::<f64>() < 0.0 {
        for v in x.iter_mut() {
            *v = -*v;
        }
    }
}

/// Dirichlet eigenpair of the weighted membrane on a mesh: assembles the
/// interior blocks of `int (1 + m theta) grad u . grad v` and `int u v`,
/// solves the pencil, and extends the eigenvector by zero to the boundary.
pub fn dirichlet_eigenpair(
    mesh: &Mesh,
    theta: &DensityField,
    m_stiff: f64,
    tol: f64,
    max_iter: usize,
    start_interior: Option<&[f64]>,
) -> Result<EigenPair> {
    let k = restrict_to_interior(&assemble_stiffness(mesh, theta, m_stiff)?, mesh);
    let m = restrict_to_interior(&assemble_mass(mesh), mesh);
    let mut pair = smallest_eigenpair(&k, &m, tol, max_iter, start_interior)?;
    pair.u = extend_by_zero(mesh, &pair.u);
    Ok(pair)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{disk_mesh, rect_mesh};
    use crate::specfun::first_j0_zero;
    use alloc::vec;
    use core::f64::consts::PI;

    fn interior_pencil(mesh: &Mesh, theta: &DensityField, ms: f64) -> (CsrMatrix, CsrMatrix) {
        let k = restrict_to_interior(&assemble_stiffness(mesh, theta, ms).unwrap(), mesh);
        let m = restrict_to_interior(&assemble_mass(mesh), mesh);
        (k, m)
    }

    #[test]
    fn identity_pencil() {
        let id = CsrMatrix::from_triplets(4, &[(0, 0, 1.0), (1, 1, 1.0), (2, 2, 1.0), (3, 3, 1.0)]);
        let pair = smallest_eigenpair(&id, &id, 1e-12, 50, None).unwrap();
        assert!((pair.lambda - 1.0).abs() < 1e-12);
        assert!(pair.residual < 1e-12);
    }

    #[test]
    fn square_eigenvalue_converges_to_two_pi_squared() {
        let exact = 2.0 * PI * PI;
        let mut errors = vec![];
        for n in [8, 16, 32] {
            let mesh = rect_mesh(n, n, 1.0, 1.0);
            let (k, m) = interior_pencil(&mesh, &DensityField::zero(&mesh, 2.0), 0.0);
            let pair = smallest_eigenpair(&k, &m, 1e-10, 200, None).unwrap();
            assert!(pair.converged);
            errors.push(pair.lambda - exact);
            // positive first eigenfunction
            assert!(pair.u.iter().all(|&v| v > 0.0));
        }
        assert!(errors[2].abs() / exact < 0.01);
        // O(h^2)
        for w in errors.windows(2) {
            let ratio = w[0] / w[1];
            assert!(ratio > 3.2 && ratio < 4.8, "ratio {ratio}");
        }
    }

    #[test]
    fn disk_eigenvalue_converges_to_j00_squared() {
        let j00 = first_j0_zero();
        let mesh = disk_mesh(24);
        let (k, m) = interior_pencil(&mesh, &DensityField::zero(&mesh, 2.0), 0.0);
        let pair = smallest_eigenpair(&k, &m, 1e-10, 200, None).unwrap();
        assert!((pair.lambda - j00 * j00).abs() / (j00 * j00) < 0.01, "{}", pair.lambda);
    }

    #[test]
    fn rayleigh_quotient_bounds_eigenvalue() {
        let mesh = rect_mesh(10, 10, 1.0, 1.0);
        let (k, m) = interior_pencil(&mesh, &DensityField::zero(&mesh, 2.0), 0.0);
        let pair = smallest_eigenpair(&k, &m, 1e-10, 200, None).unwrap();
        assert!((rayleigh_quotient(&pair.u, &k, &m).unwrap() - pair.lambda).abs() < 1e-9);
        let mut state = 0xdeadbeefcafef00d_u64;
        for _ in 0..20 {
            let x: Vec<f64> = (0..k.n)
                .map(|_| {
                    state = state
                        .wrapping_mul(6364136223846793005)
                        .wrapping_add(1442695040888963407);
                    (state >> 11) as f64 / (1u64 << 53) as f64 - 0.3
                })
                .collect();
            if m.bilinear(&x, &x) > 0.0 {
                assert!(rayleigh_quotient(&x, &k, &m).unwrap() >= pair.lambda - 1e-9);
            }
        }
    }

    #[test]
    fn rejects_zero_vector_and_mismatch() {
        let mesh = rect_mesh(4, 4, 1.0, 1.0);
        let (k, m) = interior_pencil(&mesh, &DensityField::zero(&mesh, 2.0), 0.0);
        assert!(matches!(rayleigh_quotient(&vec![0.0; k.n], &k, &m), Err(Error::ZeroVector)));
        assert!(rayleigh_quotient(&vec![1.0; k.n + 2], &k, &m).is_err());
        let small = CsrMatrix::from_triplets(2, &[(0, 0, 1.0), (1, 1, 1.0)]);
        assert!(smallest_eigenpair(&k, &small, 1e-10, 10, None).is_err());
    }

    #[test]
    fn max_iter_exhaustion_is_flagged() {
        let mesh = rect_mesh(16, 16, 1.0, 1.0);
        let (k, m) = interior_pencil(&mesh, &DensityField::zero(&mesh, 2.0), 0.0);
        let pair = smallest_eigenpair(&k, &m, 1e-14, 1, None).unwrap();
        assert!(!pair.converged);
        assert!(pair.lambda > 0.0);
    }

    #[test]
    fn eigenvalue_monotone_in_theta() {
        let mesh = disk_mesh(6);
        let (k0, m) = interior_pencil(&mesh, &DensityField::zero(&mesh, 2.0), 5.0);
        let base = smallest_eigenpair(&k0, &m, 1e-10, 200, None).unwrap().lambda;
        // perturb theta upward on a handful of triangles
        let mut vals = vec![0.0; mesh.triangles.len()];
        for t in [0, 11, 57, 100] {
            vals[t] = 0.8;
        }
        let (k1, _) = interior_pencil(&mesh, &DensityField::new(vals, 2.0).unwrap(), 5.0);
        let bumped = smallest_eigenpair(&k1, &m, 1e-10, 200, None).unwrap().lambda;
        assert!(bumped >= base - 1e-10);
        assert!(base >= 5.0, "lambda(theta) >= lambda(0) > 0 baseline sanity");
    }

    #[test]
    fn dirichlet_helper_extends_by_zero() {
        let mesh = disk_mesh(8);
        let pair =
            dirichlet_eigenpair(&mesh, &DensityField::zero(&mesh, 2.0), 0.0, 1e-10, 200, None)
                .unwrap();
        assert_eq!(pair.u.len(), mesh.nodes.len());
        for (i, &v) in pair.u.iter().enumerate() {
            if mesh.boundary[i] {
                assert_eq!(v, 0.0);
            } else {
                assert!(v > 0.0);
            }
        }
    }
}
