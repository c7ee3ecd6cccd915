//! Parameterized and Haar-random unitaries.

use crate::error::{QpolyError, Result};
use crate::generate::complex_normal;
use crate::{CMatrix, CVector, C64};

/// Complete Givens/phase parameterization of `U(n)` from `n^2` reals:
///
/// `U = D(phi_1..phi_n) * prod_{i<j} G_ij(theta_ij, alpha_ij)`
///
/// where `G_ij` is the rotation `[[cos t, e^{ia} sin t], [-e^{-ia} sin t, cos t]]`
/// on rows `i, j`. The first `n` parameters are the phases, then
/// `(theta, alpha)` pairs for `(0,1), (0,2), ..., (n-2,n-1)`. All zeros give
/// the identity.
pub fn unitary_from_params(params: &[f64], n: usize) -> Result<CMatrix> {
    if n == 0 || params.len() != n * n {
        return Err(QpolyError::DimensionMismatch {
            expected: n * n,
            actual: params.len(),
        });
    }
    let mut u = CMatrix::identity(n, n);
    let mut k = n;
    let mut pairs = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            pairs.push((i, j, params[k], params[k + 1]));
            k += 2;
        }
    }
    // apply the product right-to-left onto the identity
    for &(i, j, theta, alpha) in pairs.iter().rev() {
        rotate_rows(&mut u, i, j, theta, alpha);
    }
    for (i, phi) in params[..n].iter().enumerate() {
        let ph = C64::from_polar(1.0, *phi);
        for c in 0..n {
            u[(i, c)] *= ph;
        }
    }
    Ok(u)
}

/// Left-multiplies rows `i, j` of `m` by the Givens rotation `G(theta, alpha)`.
pub fn rotate_rows(m: &mut CMatrix, i: usize, j: usize, theta: f64, alpha: f64) {
    let (s, c) = theta.sin_cos();
    let e = C64::from_polar(s, alpha);
    for col in 0..m.ncols() {
        let a = m[(i, col)];
        let b = m[(j, col)];
        m[(i, col)] = a * c + e * b;
        m[(j, col)] = b * c - e.conj() * a;
    }
}

/// Haar-random `rows x cols` isometry: Gram-Schmidt on i.i.d. complex
/// Gaussian columns.
pub fn haar_isometry<R: rand::Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    assert!(rows >= cols, "isometry needs rows >= cols");
    loop {
        let g = CMatrix::from_fn(rows, cols, |_, _| complex_normal(rng));
        if let Some(q) = gram_schmidt(&g) {
            return q;
        }
    }
}

pub fn haar_unitary<R: rand::Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    haar_isometry(n, n, rng)
}

fn gram_schmidt(g: &CMatrix) -> Option<CMatrix> {
    let mut cols: Vec<CVector> = Vec::with_capacity(g.ncols());
    for c in g.column_iter() {
        let mut v = c.into_owned();
        for _ in 0..2 {
            for q in &cols {
                let proj = (q.adjoint() * &v)[(0, 0)];
                v -= q * proj;
            }
        }
        let norm = v.norm();
        if norm < 1e-10 {
            return None;
        }
        cols.push(v / C64::new(norm, 0.0));
    }
    Some(CMatrix::from_columns(&cols))
}
