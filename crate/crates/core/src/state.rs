//! Pure and mixed states on a [`SystemLayout`], with tensor products,
//! partial traces and purification.

use crate::error::{QpolyError, Result};
use crate::layout::SystemLayout;
use crate::linalg::{self, HERMITIAN_TOL};
use crate::{CMatrix, CVector, C64};

/// Tolerance on unit norm / unit trace.
pub const NORM_TOL: f64 = 1e-9;

/// Smallest eigenvalue a density operator may have.
pub const PSD_TOL: f64 = -1e-9;

/// Eigenvalues above this count towards the rank.
pub const RANK_THRESHOLD: f64 = 1e-10;

/// Label given to purifying ancillas unless it is already taken.
pub const ANCILLA_LABEL: &str = "C*";

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    layout: SystemLayout,
    amplitudes: CVector,
}

impl StateVector {
    pub fn new(layout: SystemLayout, amplitudes: CVector) -> Result<Self> {
        if amplitudes.len() != layout.total_dim() {
            return Err(QpolyError::DimensionMismatch {
                expected: layout.total_dim(),
                actual: amplitudes.len(),
            });
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(QpolyError::InvalidState(format!("norm {norm} is not 1")));
        }
        Ok(Self { layout, amplitudes })
    }

    /// Rescales `amplitudes` to unit norm.
    pub fn normalized(layout: SystemLayout, amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(QpolyError::InvalidState(
                "cannot normalize a zero vector".into(),
            ));
        }
        Self::new(layout, amplitudes / C64::new(norm, 0.0))
    }

    /// Computational basis state; `digits[k]` is the level of part `k`.
    pub fn basis(layout: SystemLayout, digits: &[usize]) -> Result<Self> {
        let dims = layout.dims();
        if digits.len() != dims.len() {
            return Err(QpolyError::DimensionMismatch {
                expected: dims.len(),
                actual: digits.len(),
            });
        }
        let mut flat = 0;
        for (d, (&digit, &dim)) in digits.iter().zip(&dims).enumerate() {
            if digit >= dim {
                return Err(QpolyError::InvalidState(format!(
                    "level {digit} out of range for part {d}"
                )));
            }
            flat = flat * dim + digit;
        }
        let mut amps = CVector::zeros(layout.total_dim());
        amps[flat] = C64::new(1.0, 0.0);
        Ok(Self {
            layout,
            amplitudes: amps,
        })
    }

    pub fn layout(&self) -> &SystemLayout {
        &self.layout
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn to_density(&self) -> DensityOperator {
        DensityOperator {
            layout: self.layout.clone(),
            matrix: &self.amplitudes * self.amplitudes.adjoint(),
        }
    }

    pub fn tensor(&self, other: &StateVector) -> Result<StateVector> {
        let layout = self.layout.concat(&other.layout)?;
        let amps = self.amplitudes.kronecker(&other.amplitudes);
        Ok(StateVector {
            layout,
            amplitudes: amps,
        })
    }

    /// Amplitudes arranged as a `dim(keep) x dim(rest)` matrix.
    pub(crate) fn as_bipartite_matrix(&self, keep: &[usize]) -> CMatrix {
        let rest = self.layout.complement(keep);
        let dk = self.layout.dim_of(keep);
        let dr = self.layout.dim_of(&rest);
        let mut m = CMatrix::zeros(dk, dr);
        for (flat, (k, r)) in self
            .layout
            .split_indices(keep, &rest)
            .into_iter()
            .enumerate()
        {
            m[(k, r)] = self.amplitudes[flat];
        }
        m
    }

    /// Reduced state on `keep` (output parts in layout order).
    pub fn partial_trace<S: AsRef<str>>(&self, keep: &[S]) -> Result<DensityOperator> {
        let pos = keep_positions(&self.layout, keep)?;
        let m = self.as_bipartite_matrix(&pos);
        Ok(DensityOperator {
            layout: self.layout.select(&pos)?,
            matrix: &m * m.adjoint(),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    layout: SystemLayout,
    matrix: CMatrix,
}

impl DensityOperator {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(layout: SystemLayout, matrix: CMatrix) -> Result<Self> {
        let n = layout.total_dim();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(QpolyError::DimensionMismatch {
                expected: n,
                actual: matrix.nrows().max(matrix.ncols()),
            });
        }
        let dev = linalg::max_hermitian_deviation(&matrix);
        if dev > HERMITIAN_TOL {
            return Err(QpolyError::NotHermitian(dev));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > NORM_TOL || tr.im.abs() > NORM_TOL {
            return Err(QpolyError::InvalidState(format!("trace {tr} is not 1")));
        }
        let (vals, _) = linalg::eig_hermitian(&matrix)?;
        if let Some(&min) = vals.last() {
            if min < PSD_TOL {
                return Err(QpolyError::InvalidState(format!(
                    "not positive semidefinite (min eigenvalue {min:.3e})"
                )));
            }
        }
        Ok(Self { layout, matrix })
    }

    pub(crate) fn from_parts_unchecked(layout: SystemLayout, matrix: CMatrix) -> Self {
        Self { layout, matrix }
    }

    pub fn maximally_mixed(layout: SystemLayout) -> Self {
        let n = layout.total_dim();
        let matrix = CMatrix::identity(n, n) * C64::new(1.0 / n as f64, 0.0);
        Self { layout, matrix }
    }

    /// Convex mixture `sum_i p_i |psi_i><psi_i|` of states on a common layout.
    pub fn mixture(branches: &[(f64, StateVector)]) -> Result<Self> {
        let first = branches
            .first()
            .ok_or_else(|| QpolyError::InvalidState("empty mixture".into()))?;
        let layout = first.1.layout.clone();
        let n = layout.total_dim();
        let mut m = CMatrix::zeros(n, n);
        for (p, psi) in branches {
            if psi.layout != layout {
                return Err(QpolyError::InvalidState(
                    "mixture of different layouts".into(),
                ));
            }
            m += psi.to_density().matrix * C64::new(*p, 0.0);
        }
        Self::new(layout, m)
    }

    pub fn layout(&self) -> &SystemLayout {
        &self.layout
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Eigenvalues (descending) and eigenvectors.
    pub fn eigen(&self) -> (Vec<f64>, CMatrix) {
        linalg::eig_hermitian(&self.matrix).expect("density operators are Hermitian")
    }

    pub fn rank(&self) -> usize {
        self.eigen()
            .0
            .iter()
            .filter(|&&l| l > RANK_THRESHOLD)
            .count()
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    pub fn is_pure(&self) -> bool {
        self.rank() == 1
    }

    pub fn tensor(&self, other: &DensityOperator) -> Result<DensityOperator> {
        let layout = self.layout.concat(&other.layout)?;
        Ok(Self {
            layout,
            matrix: self.matrix.kronecker(&other.matrix),
        })
    }

    /// Reduced state on `keep` (output parts in layout order).
    pub fn partial_trace<S: AsRef<str>>(&self, keep: &[S]) -> Result<DensityOperator> {
        let pos = keep_positions(&self.layout, keep)?;
        Ok(Self {
            layout: self.layout.select(&pos)?,
            matrix: self.reduce_positions(&pos),
        })
    }

    pub(crate) fn reduce_positions(&self, keep: &[usize]) -> CMatrix {
        if keep.len() == self.layout.len() {
            return self.matrix.clone();
        }
        let rest = self.layout.complement(keep);
        let dk = self.layout.dim_of(keep);
        let dr = self.layout.dim_of(&rest);
        // full[k * dr + r] = flat index of (k, r)
        let mut full = vec![0usize; dk * dr];
        for (flat, (k, r)) in self
            .layout
            .split_indices(keep, &rest)
            .into_iter()
            .enumerate()
        {
            full[k * dr + r] = flat;
        }
        CMatrix::from_fn(dk, dk, |k, kp| {
            (0..dr)
                .map(|r| self.matrix[(full[k * dr + r], full[kp * dr + r])])
                .sum()
        })
    }

    /// A purification on this layout extended by one ancilla of dimension
    /// `max(rank, 2)`, labelled [`ANCILLA_LABEL`] (with extra `*` if taken).
    /// Fails only when the purified dimension exceeds the layout cap.
    pub fn purify(&self) -> Result<StateVector> {
        self.purify_with_label(&fresh_label(&self.layout, ANCILLA_LABEL))
    }

    pub fn purify_with_label(&self, label: &str) -> Result<StateVector> {
        let (vals, vecs) = self.eigen();
        let rank = vals.iter().filter(|&&l| l > RANK_THRESHOLD).count().max(1);
        let anc_dim = rank.max(2);
        let ancilla = SystemLayout::new([(label, anc_dim)])?;
        let layout = self.layout.concat(&ancilla)?;
        let n = self.dim();
        let mut amps = CVector::zeros(n * anc_dim);
        for k in 0..rank {
            let w = vals[k].max(0.0).sqrt();
            for i in 0..n {
                amps[i * anc_dim + k] = vecs[(i, k)] * w;
            }
        }
        StateVector::normalized(layout, amps)
    }
}

/// `base`, or `base` followed by as many `*` as needed to be unused.
pub fn fresh_label(layout: &SystemLayout, base: &str) -> String {
    let mut label = base.to_string();
    while layout.contains(&label) {
        label.push('*');
    }
    label
}

fn keep_positions<S: AsRef<str>>(layout: &SystemLayout, keep: &[S]) -> Result<Vec<usize>> {
    if keep.is_empty() {
        return Err(QpolyError::InvalidLabelSet("keep set is empty".into()));
    }
    layout.positions(keep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;

    fn bell() -> StateVector {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let amps = CVector::from_vec(vec![
            C64::new(h, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(h, 0.0),
        ]);
        StateVector::new(SystemLayout::qubits(2).unwrap(), amps).unwrap()
    }

    fn single(label: &str, amps: &[f64]) -> StateVector {
        let v = CVector::from_iterator(amps.len(), amps.iter().map(|&a| C64::new(a, 0.0)));
        StateVector::normalized(SystemLayout::new([(label, amps.len())]).unwrap(), v).unwrap()
    }

    #[test]
    fn kron_of_basis_vectors() {
        let zero = single("A", &[1.0, 0.0]);
        let one = single("B", &[0.0, 1.0]);
        let k = zero.tensor(&one).unwrap();
        assert_eq!(k.layout().dims(), vec![2, 2]);
        assert_eq!(k.amplitudes()[1], C64::new(1.0, 0.0));
        assert_eq!(k.amplitudes().iter().filter(|a| a.norm() > 0.0).count(), 1);
    }

    #[test]
    fn kron_of_maximally_mixed_qubits() {
        let a = DensityOperator::maximally_mixed(SystemLayout::new([("A", 2)]).unwrap());
        let b = DensityOperator::maximally_mixed(SystemLayout::new([("B", 2)]).unwrap());
        let ab = a.tensor(&b).unwrap();
        let expected = CMatrix::identity(4, 4) * C64::new(0.25, 0.0);
        assert!(max_abs_diff(ab.matrix(), &expected) < 1e-15);
    }

    #[test]
    fn tensor_rejects_label_collision() {
        let a = single("A", &[1.0, 0.0]);
        assert!(a.tensor(&a).is_err());
    }

    #[test]
    fn bell_marginal_is_maximally_mixed() {
        let rho = bell().partial_trace(&["A"]).unwrap();
        let expected = CMatrix::identity(2, 2) * C64::new(0.5, 0.0);
        assert!(max_abs_diff(rho.matrix(), &expected) < 1e-15);
        let via_density = bell().to_density().partial_trace(&["A"]).unwrap();
        assert!(max_abs_diff(via_density.matrix(), &expected) < 1e-15);
    }

    #[test]
    fn partial_trace_errors() {
        let rho = bell().to_density();
        let empty: [&str; 0] = [];
        assert!(rho.partial_trace(&empty).is_err());
        assert!(matches!(
            rho.partial_trace(&["Q"]),
            Err(QpolyError::UnknownLabel(_))
        ));
    }

    #[test]
    fn ghz3_trace_last_party_by_index_summation() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut amps = CVector::zeros(8);
        amps[0] = C64::new(h, 0.0);
        amps[7] = C64::new(h, 0.0);
        let ghz = StateVector::new(SystemLayout::qubits(3).unwrap(), amps)
            .unwrap()
            .to_density();
        let reduced = ghz.partial_trace(&["A", "B"]).unwrap();
        // oracle: rho_AB[i][j] = sum_c rho[2i + c][2j + c]
        let full = ghz.matrix();
        let oracle = CMatrix::from_fn(4, 4, |i, j| {
            full[(2 * i, 2 * j)] + full[(2 * i + 1, 2 * j + 1)]
        });
        assert!(max_abs_diff(reduced.matrix(), &oracle) < 1e-15);
        assert!((reduced.matrix()[(0, 0)].re - 0.5).abs() < 1e-15);
        assert!((reduced.matrix()[(3, 3)].re - 0.5).abs() < 1e-15);
        assert!(reduced.matrix()[(0, 3)].norm() < 1e-15);
    }

    #[test]
    fn purify_pure_state_appends_a_fixed_ancilla() {
        let psi = single("A", &[0.6, 0.8]);
        let p = psi.to_density().purify().unwrap();
        assert_eq!(p.layout().labels(), vec!["A", "C*"]);
        let expected = psi.tensor(&single("C*", &[1.0, 0.0])).unwrap();
        let overlap = (expected.amplitudes().adjoint() * p.amplitudes())[(0, 0)].norm();
        assert!((overlap - 1.0).abs() < 1e-12);
    }

    #[test]
    fn purify_maximally_mixed_qubit_is_maximally_entangled() {
        let rho = DensityOperator::maximally_mixed(SystemLayout::new([("A", 2)]).unwrap());
        let p = rho.purify().unwrap();
        let marg = p.partial_trace(&["C*"]).unwrap();
        let expected = CMatrix::identity(2, 2) * C64::new(0.5, 0.0);
        assert!(max_abs_diff(marg.matrix(), &expected) < 1e-12);
    }

    #[test]
    fn purify_avoids_existing_ancilla_label() {
        let rho = DensityOperator::maximally_mixed(SystemLayout::new([("C*", 2)]).unwrap());
        assert_eq!(rho.purify().unwrap().layout().labels(), vec!["C*", "C**"]);
    }

    #[test]
    fn validation_rejects_bad_matrices() {
        let l = SystemLayout::qubits(1).unwrap();
        let half = CMatrix::identity(2, 2) * C64::new(0.4, 0.0);
        assert!(DensityOperator::new(l.clone(), half).is_err());
        let neg = CMatrix::from_diagonal(&CVector::from_vec(vec![
            C64::new(1.1, 0.0),
            C64::new(-0.1, 0.0),
        ]));
        assert!(DensityOperator::new(l.clone(), neg).is_err());
        let nh = CMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(0.5, 0.0),
                C64::new(0.1, 0.0),
                C64::new(0.0, 0.0),
                C64::new(0.5, 0.0),
            ],
        );
        assert!(matches!(
            DensityOperator::new(l, nh),
            Err(QpolyError::NotHermitian(_))
        ));
    }
}
