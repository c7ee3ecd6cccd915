//! Small dense Hermitian linear algebra and spectral entropy helpers.

use crate::error::{QpolyError, Result};
use crate::{CMatrix, C64};

/// Tolerance on `max |M - M^dagger|` for a matrix to count as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-9;

/// Eigenvalues below this contribute nothing to an entropy.
pub const ENTROPY_CLAMP: f64 = 1e-12;

pub fn max_hermitian_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Eigen-decomposition of a Hermitian matrix: eigenvalues in descending
/// order, eigenvectors as the matching orthonormal columns.
pub fn eig_hermitian(m: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    if m.nrows() != m.ncols() {
        return Err(QpolyError::DimensionMismatch {
            expected: m.nrows(),
            actual: m.ncols(),
        });
    }
    let dev = max_hermitian_deviation(m);
    if dev > HERMITIAN_TOL {
        return Err(QpolyError::NotHermitian(dev));
    }
    let n = m.nrows();
    let sym = hermitian_part(m);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok((values, vectors))
}

/// Eigenvalues of a matrix the caller knows to be Hermitian. Closed form for
/// sizes 1 and 2; unordered.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    match m.nrows() {
        0 => Vec::new(),
        1 => vec![m[(0, 0)].re],
        2 => {
            let (a, d) = (m[(0, 0)].re, m[(1, 1)].re);
            let b = m[(0, 1)];
            let (l0, l1) = eig2(a, d, b);
            vec![l0, l1]
        }
        _ => hermitian_part(m)
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .collect(),
    }
}

/// Eigenvalues of `[[a, b], [conj b, d]]`.
#[inline]
pub fn eig2(a: f64, d: f64, b: C64) -> (f64, f64) {
    let mean = 0.5 * (a + d);
    let half = 0.5 * (a - d);
    let r = (half * half + b.norm_sqr()).sqrt();
    (mean + r, mean - r)
}

fn hermitian_part(m: &CMatrix) -> CMatrix {
    let n = m.nrows();
    CMatrix::from_fn(n, n, |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5)
}

/// Shannon entropy in bits of a spectrum, with tiny eigenvalues clamped to
/// contribute zero.
pub fn entropy_bits(spectrum: &[f64]) -> f64 {
    spectrum
        .iter()
        .filter(|&&l| l >= ENTROPY_CLAMP)
        .map(|&l| -l * l.log2())
        .sum()
}

/// `p * S(mu / p)` for an unnormalized spectrum `mu` of total weight `p`.
/// Zero for `p` below the clamp.
#[inline]
pub fn weighted_entropy_bits(spectrum: &[f64], p: f64) -> f64 {
    if p < ENTROPY_CLAMP {
        return 0.0;
    }
    let mut s = 0.0;
    for &mu in spectrum {
        let l = mu / p;
        if l >= ENTROPY_CLAMP {
            s -= mu * l.log2();
        }
    }
    s
}

/// Binary entropy in bits.
pub fn binary_entropy(x: f64) -> f64 {
    entropy_bits(&[x, 1.0 - x])
}

/// Principal square root of a positive semidefinite Hermitian matrix; tiny
/// negative eigenvalues are treated as zero.
pub fn psd_sqrt(m: &CMatrix) -> Result<CMatrix> {
    let (vals, vecs) = eig_hermitian(m)?;
    let n = m.nrows();
    let mut out = CMatrix::zeros(n, n);
    for (k, &v) in vals.iter().enumerate() {
        let s = v.max(0.0).sqrt();
        if s == 0.0 {
            continue;
        }
        let col = vecs.column(k);
        out += (col * col.adjoint()) * C64::new(s, 0.0);
    }
    Ok(out)
}

/// Largest entry of `|V^dagger V - I|`.
pub fn orthonormality_residual(v: &CMatrix) -> f64 {
    let g = v.adjoint() * v;
    let mut worst: f64 = 0.0;
    for i in 0..g.nrows() {
        for j in 0..g.ncols() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g[(i, j)] - C64::new(target, 0.0)).norm());
        }
    }
    worst
}

/// Largest entry-wise modulus of `a - b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn diagonal_input_sorted_descending() {
        let m = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            c(0.25, 0.0),
            c(0.75, 0.0),
        ]));
        let (vals, _) = eig_hermitian(&m).unwrap();
        assert!((vals[0] - 0.75).abs() < 1e-14);
        assert!((vals[1] - 0.25).abs() < 1e-14);
    }

    #[test]
    fn pauli_x_spectrum() {
        let x = CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]);
        let (vals, vecs) = eig_hermitian(&x).unwrap();
        assert!((vals[0] - 1.0).abs() < 1e-12 && (vals[1] + 1.0).abs() < 1e-12);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        // |+> up to a global phase
        let v0 = vecs.column(0);
        let overlap = (v0[0] * h + v0[1] * h).norm();
        assert!((overlap - 1.0).abs() < 1e-12);
        let v1 = vecs.column(1);
        let overlap = (v1[0] * h - v1[1] * h).norm();
        assert!((overlap - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(0., 0.), c(0., 0.)]);
        assert!(matches!(
            eig_hermitian(&m),
            Err(QpolyError::NotHermitian(_))
        ));
    }

    #[test]
    fn closed_form_matches_general_solver() {
        let m = CMatrix::from_row_slice(2, 2, &[c(0.3, 0.), c(0.1, -0.2), c(0.1, 0.2), c(0.7, 0.)]);
        let mut fast = hermitian_eigenvalues(&m);
        fast.sort_by(|a, b| b.total_cmp(a));
        let (slow, _) = eig_hermitian(&m).unwrap();
        assert!((fast[0] - slow[0]).abs() < 1e-14 && (fast[1] - slow[1]).abs() < 1e-14);
    }

    #[test]
    fn binary_entropy_of_a_third() {
        let oracle =
            -(1.0f64 / 3.0) * (1.0f64 / 3.0).log2() - (2.0f64 / 3.0) * (2.0f64 / 3.0).log2();
        assert!((binary_entropy(1.0 / 3.0) - oracle).abs() < 1e-15);
        assert!((oracle - 0.918296).abs() < 1e-6);
    }

    #[test]
    fn weighted_entropy_scales() {
        let w = weighted_entropy_bits(&[0.1, 0.1], 0.2);
        assert!((w - 0.2).abs() < 1e-15);
        assert_eq!(weighted_entropy_bits(&[1e-14, 0.0], 1e-14), 0.0);
    }
}
