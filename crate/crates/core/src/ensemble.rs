//! Pure-state decompositions, rank-1 measurements, and the correspondence
//! between them through a purification.
//!
//! Every size-`N` decomposition of a rank-`r` state `rho = sum_j l_j |e_j><e_j|`
//! is `sqrt(p_i) |phi_i> = sum_j V_ij sqrt(l_j) |e_j>` for some `N x r`
//! isometry `V`. Measuring the purifying system of `rho` with a rank-1
//! measurement produces exactly these decompositions, and every decomposition
//! arises that way.

use crate::error::{QpolyError, Result};
use crate::info::check_partition;
use crate::layout::SystemLayout;
use crate::linalg::{self, max_abs_diff, orthonormality_residual};
use crate::state::{DensityOperator, StateVector, NORM_TOL, RANK_THRESHOLD};
use crate::{CMatrix, CVector, C64};

/// Branches lighter than this are kept but ignored in averages.
pub const ZERO_WEIGHT: f64 = 1e-12;

/// Tolerance on reconstruction, completeness and isometry residuals.
pub const RECONSTRUCTION_TOL: f64 = 1e-8;

/// `N x r` matrix with orthonormal columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Isometry {
    matrix: CMatrix,
}

impl Isometry {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() < matrix.ncols() {
            return Err(QpolyError::InvalidIsometry(format!(
                "{} rows cannot hold {} orthonormal columns",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let res = orthonormality_residual(&matrix);
        if res > RECONSTRUCTION_TOL {
            return Err(QpolyError::InvalidIsometry(format!(
                "V^dagger V deviates from I by {res:.3e}"
            )));
        }
        Ok(Self { matrix })
    }

    pub(crate) fn from_matrix_unchecked(matrix: CMatrix) -> Self {
        Self { matrix }
    }

    /// Identity on the first `cols` rows, zero below.
    pub fn padded_identity(rows: usize, cols: usize) -> Result<Self> {
        Self::new(CMatrix::identity(rows, cols))
    }

    /// The first `cols` columns of a unitary.
    pub fn from_unitary(u: &CMatrix, cols: usize) -> Result<Self> {
        Self::new(u.columns(0, cols).into_owned())
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn rows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.ncols()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub probability: f64,
    /// Normalized branch state; a placeholder basis state when the branch
    /// weight is below [`ZERO_WEIGHT`].
    pub state: StateVector,
}

/// A decomposition `rho = sum_i p_i |phi_i><phi_i|`.
#[derive(Debug, Clone, PartialEq)]
pub struct PureEnsemble {
    target: DensityOperator,
    branches: Vec<Branch>,
}

impl PureEnsemble {
    pub fn new(target: DensityOperator, branches: Vec<Branch>) -> Result<Self> {
        if branches.is_empty() {
            return Err(QpolyError::InvalidEnsemble("no branches".into()));
        }
        let mut total = 0.0;
        let n = target.dim();
        let mut mix = CMatrix::zeros(n, n);
        for b in &branches {
            if b.state.layout() != target.layout() {
                return Err(QpolyError::InvalidEnsemble(
                    "branch layout differs from target".into(),
                ));
            }
            if b.probability.is_nan() || b.probability < 0.0 {
                return Err(QpolyError::InvalidEnsemble(format!(
                    "negative weight {}",
                    b.probability
                )));
            }
            total += b.probability;
            if b.probability >= ZERO_WEIGHT {
                mix += b.state.to_density().matrix() * C64::new(b.probability, 0.0);
            }
        }
        if (total - 1.0).abs() > NORM_TOL {
            return Err(QpolyError::InvalidEnsemble(format!(
                "weights sum to {total}"
            )));
        }
        let err = max_abs_diff(&mix, target.matrix());
        if err > RECONSTRUCTION_TOL {
            return Err(QpolyError::InvalidEnsemble(format!(
                "mixture misses the target by {err:.3e}"
            )));
        }
        Ok(Self { target, branches })
    }

    /// Builds an ensemble from unnormalized branch vectors `sqrt(p_i)|phi_i>`.
    pub fn from_unnormalized(target: DensityOperator, vectors: &[CVector]) -> Result<Self> {
        let layout = target.layout().clone();
        let weights: Vec<f64> = vectors.iter().map(|v| v.norm_squared()).collect();
        let total: f64 = weights.iter().sum();
        let branches = vectors
            .iter()
            .zip(&weights)
            .map(|(v, &w)| {
                let p = w / total;
                let state = if p >= ZERO_WEIGHT {
                    StateVector::normalized(layout.clone(), v.clone())
                } else {
                    placeholder(&layout)
                };
                state.map(|state| Branch {
                    probability: p,
                    state,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(target, branches)
    }

    pub fn target(&self) -> &DensityOperator {
        &self.target
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn len(&self) -> usize {
        self.branches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.branches.is_empty()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.branches.iter().map(|b| b.probability).collect()
    }
}

fn placeholder(layout: &SystemLayout) -> Result<StateVector> {
    StateVector::basis(layout.clone(), &vec![0; layout.len()])
}

/// Eigen-decomposition of `rho` as an ensemble; one branch per nonzero
/// eigenvalue.
pub fn spectral_ensemble(rho: &DensityOperator) -> PureEnsemble {
    let r = rho.rank().max(1);
    hjw_ensemble(
        rho,
        &Isometry::padded_identity(r, r).expect("identity is an isometry"),
    )
    .expect("identity isometry matches the rank")
}

/// The decomposition selected by isometry `v` (`N x rank`).
pub fn hjw_ensemble(rho: &DensityOperator, v: &Isometry) -> Result<PureEnsemble> {
    let (vals, vecs) = rho.eigen();
    let r = vals.iter().filter(|&&l| l > RANK_THRESHOLD).count().max(1);
    if v.cols() != r {
        return Err(QpolyError::InvalidIsometry(format!(
            "isometry has {} columns but the state has rank {r}",
            v.cols()
        )));
    }
    let n = rho.dim();
    let scaled = CMatrix::from_fn(n, r, |i, j| vecs[(i, j)] * vals[j].max(0.0).sqrt());
    let vectors: Vec<CVector> = (0..v.rows())
        .map(|i| &scaled * v.matrix().row(i).transpose())
        .collect();
    PureEnsemble::from_unnormalized(rho.clone(), &vectors)
}

/// `sum_i p_i S(tr_{rest} |phi_i><phi_i|)` with `side` kept.
pub fn average_branch_entropy<S: AsRef<str>>(ens: &PureEnsemble, side: &[S]) -> Result<f64> {
    let layout = ens.target().layout();
    let pos = layout.positions(side)?;
    if pos.is_empty() || pos.len() >= layout.len() {
        return Err(QpolyError::InvalidLabelSet(
            "side must be a nonempty proper subset".into(),
        ));
    }
    let labels = layout.labels_at(&pos);
    let mut total = 0.0;
    for b in ens.branches() {
        if b.probability < ZERO_WEIGHT {
            continue;
        }
        let reduced = b.state.partial_trace(&labels)?;
        total +=
            b.probability * linalg::entropy_bits(&linalg::hermitian_eigenvalues(reduced.matrix()));
    }
    Ok(total)
}

/// Rank-1 measurement with elements `|m_x><m_x|`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rank1Measurement {
    vectors: Vec<CVector>,
}

impl Rank1Measurement {
    pub fn new(vectors: Vec<CVector>) -> Result<Self> {
        let d = vectors
            .first()
            .map(|v| v.len())
            .ok_or_else(|| QpolyError::InvalidMeasurement("no outcomes".into()))?;
        if vectors.iter().any(|v| v.len() != d) {
            return Err(QpolyError::InvalidMeasurement(
                "outcome vectors differ in length".into(),
            ));
        }
        let mut sum = CMatrix::zeros(d, d);
        for v in &vectors {
            sum += v * v.adjoint();
        }
        let err = max_abs_diff(&sum, &CMatrix::identity(d, d));
        if err > RECONSTRUCTION_TOL {
            return Err(QpolyError::InvalidMeasurement(format!(
                "elements sum to identity only within {err:.3e}"
            )));
        }
        Ok(Self { vectors })
    }

    pub fn computational(dim: usize) -> Self {
        Self {
            vectors: (0..dim)
                .map(|k| {
                    let mut v = CVector::zeros(dim);
                    v[k] = C64::new(1.0, 0.0);
                    v
                })
                .collect(),
        }
    }

    /// Projective measurement onto the columns of a unitary.
    pub fn from_basis(u: &CMatrix) -> Result<Self> {
        Self::new(u.column_iter().map(|c| c.into_owned()).collect())
    }

    /// Outcome `x` has vector `conj(row x of v)`; complete because
    /// `V^dagger V = I`.
    pub fn from_isometry(v: &Isometry) -> Self {
        Self {
            vectors: v
                .matrix()
                .row_iter()
                .map(|r| r.transpose().map(|z| z.conj()))
                .collect(),
        }
    }

    pub fn vectors(&self) -> &[CVector] {
        &self.vectors
    }

    pub fn dim(&self) -> usize {
        self.vectors[0].len()
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub probability: f64,
    /// Normalized post-measurement state of the unmeasured side; maximally
    /// mixed placeholder when the probability is below [`ZERO_WEIGHT`].
    pub state: DensityOperator,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementOutcomeSet {
    outcomes: Vec<Outcome>,
}

impl MeasurementOutcomeSet {
    pub fn outcomes(&self) -> &[Outcome] {
        &self.outcomes
    }

    /// `sum_x p_x S(rho^x)` over outcomes of non-negligible probability.
    pub fn average_entropy(&self) -> f64 {
        self.outcomes
            .iter()
            .filter(|o| o.probability >= ZERO_WEIGHT)
            .map(|o| {
                o.probability
                    * linalg::entropy_bits(&linalg::hermitian_eigenvalues(o.state.matrix()))
            })
            .sum()
    }
}

/// Applies `m` to the `measured` subsystems of `rho` and returns outcome
/// probabilities with the post-measurement states of the remaining parts.
pub fn measure_rank1<S: AsRef<str>>(
    rho: &DensityOperator,
    measured: &[S],
    m: &Rank1Measurement,
) -> Result<MeasurementOutcomeSet> {
    let layout = rho.layout();
    let mpos = layout.positions(measured)?;
    if mpos.is_empty() || mpos.len() >= layout.len() {
        return Err(QpolyError::InvalidLabelSet(
            "measured set must be a nonempty proper subset".into(),
        ));
    }
    let upos = layout.complement(&mpos);
    let dm = layout.dim_of(&mpos);
    let du = layout.dim_of(&upos);
    if m.dim() != dm {
        return Err(QpolyError::DimensionMismatch {
            expected: dm,
            actual: m.dim(),
        });
    }
    Rank1Measurement::new(m.vectors.clone())?;
    let mut full = vec![0usize; du * dm];
    for (flat, (u, k)) in layout.split_indices(&upos, &mpos).into_iter().enumerate() {
        full[u * dm + k] = flat;
    }
    let ulayout = layout.select(&upos)?;
    let rmat = rho.matrix();
    let outcomes = m
        .vectors
        .iter()
        .map(|mx| {
            // <m_x| rho |m_x> over the measured factor
            let sigma = CMatrix::from_fn(du, du, |u, up| {
                let mut acc = C64::new(0.0, 0.0);
                for k in 0..dm {
                    for kp in 0..dm {
                        acc += mx[k].conj() * rmat[(full[u * dm + k], full[up * dm + kp])] * mx[kp];
                    }
                }
                acc
            });
            let p = sigma.trace().re;
            let state = if p >= ZERO_WEIGHT {
                DensityOperator::from_parts_unchecked(ulayout.clone(), sigma / C64::new(p, 0.0))
            } else {
                DensityOperator::maximally_mixed(ulayout.clone())
            };
            Outcome {
                probability: p.max(0.0),
                state,
            }
        })
        .collect();
    Ok(MeasurementOutcomeSet { outcomes })
}

/// Ensemble of `rho_kept` produced by measuring the `assisting` parts of the
/// pure state `psi` with `m`; one branch per outcome.
pub fn ensemble_from_measurement<S: AsRef<str>, T: AsRef<str>>(
    psi: &StateVector,
    kept: &[S],
    assisting: &[T],
    m: &Rank1Measurement,
) -> Result<PureEnsemble> {
    let full = psi.to_density();
    let (kpos, apos) = check_partition(&full, kept, assisting)?;
    let da = psi.layout().dim_of(&apos);
    if m.dim() != da {
        return Err(QpolyError::DimensionMismatch {
            expected: da,
            actual: m.dim(),
        });
    }
    Rank1Measurement::new(m.vectors.clone())?;
    let klabels = psi.layout().labels_at(&kpos);
    let target = psi.partial_trace(&klabels)?;
    let mat = psi.as_bipartite_matrix(&kpos);
    // v_x = (I (x) <m_x|) psi
    let vectors: Vec<CVector> = m
        .vectors
        .iter()
        .map(|mx| &mat * mx.map(|z| z.conj()))
        .collect();
    PureEnsemble::from_unnormalized(target, &vectors)
}

/// Converse of [`ensemble_from_measurement`]: a rank-1 measurement on the
/// `assisting` parts of `psi` that realizes `ens` (an ensemble of
/// `rho_kept`). When the ensemble has fewer branches than the assisting
/// dimension, zero-probability outcomes are appended.
pub fn measurement_from_ensemble<S: AsRef<str>, T: AsRef<str>>(
    psi: &StateVector,
    kept: &[S],
    assisting: &[T],
    ens: &PureEnsemble,
) -> Result<Rank1Measurement> {
    let full = psi.to_density();
    let (kpos, apos) = check_partition(&full, kept, assisting)?;
    let klabels = psi.layout().labels_at(&kpos);
    let target = psi.partial_trace(&klabels)?;
    if max_abs_diff(target.matrix(), ens.target().matrix()) > RECONSTRUCTION_TOL {
        return Err(QpolyError::InvalidEnsemble(
            "ensemble is not a decomposition of the kept marginal".into(),
        ));
    }
    let (vals, vecs) = target.eigen();
    let r = vals.iter().filter(|&&l| l > RANK_THRESHOLD).count().max(1);
    let da = psi.layout().dim_of(&apos);
    let mat = psi.as_bipartite_matrix(&kpos);
    // Schmidt partners f_j = (<e_j| (x) I) psi / sqrt(l_j)
    let mut f = CMatrix::zeros(da, r);
    for (j, l) in vals.iter().take(r).enumerate() {
        let col = mat.transpose() * vecs.column(j).map(|z| z.conj()) / C64::new(l.sqrt(), 0.0);
        f.set_column(j, &col);
    }
    let f_full = orthonormal_completion(&f);

    let nb = ens.len();
    let rows = nb.max(da);
    let mut v = CMatrix::zeros(rows, r);
    for (i, b) in ens.branches().iter().enumerate() {
        if b.probability < ZERO_WEIGHT {
            continue;
        }
        let amp = b.state.amplitudes() * C64::new(b.probability.sqrt(), 0.0);
        for j in 0..r {
            v[(i, j)] = (vecs.column(j).adjoint() * &amp)[(0, 0)] / vals[j].sqrt();
        }
    }
    let w = orthonormal_completion(&v);
    // m_i = sum_j conj(W_ij) b_j over the basis (f, complement)
    let vectors = (0..rows)
        .map(|i| {
            let mut m = CVector::zeros(da);
            for j in 0..da {
                m += f_full.column(j) * w[(i, j)].conj();
            }
            m
        })
        .collect();
    Rank1Measurement::new(vectors)
}

/// Unitary whose leading columns are the (orthonormal) columns of `cols`.
pub(crate) fn orthonormal_completion(cols: &CMatrix) -> CMatrix {
    let n = cols.nrows();
    let mut basis: Vec<CVector> = cols.column_iter().map(|c| c.into_owned()).collect();
    while basis.len() < n {
        // pick the standard vector with the largest residual for stability
        let mut best: Option<(f64, CVector)> = None;
        for k in 0..n {
            let mut e = CVector::zeros(n);
            e[k] = C64::new(1.0, 0.0);
            for _ in 0..2 {
                for b in &basis {
                    let c = (b.adjoint() * &e)[(0, 0)];
                    e -= b * c;
                }
            }
            let norm = e.norm();
            if best.as_ref().is_none_or(|(bn, _)| norm > *bn) {
                best = Some((norm, e));
            }
        }
        let (norm, e) = best.expect("n > 0");
        basis.push(e / C64::new(norm, 0.0));
    }
    CMatrix::from_columns(&basis)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate;
    use crate::layout::SystemLayout;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn classical() -> DensityOperator {
        let d = CVector::from_vec(vec![c(0.5), c(0.0), c(0.0), c(0.5)]);
        DensityOperator::new(SystemLayout::qubits(2).unwrap(), CMatrix::from_diagonal(&d)).unwrap()
    }

    fn hadamard() -> CMatrix {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        CMatrix::from_row_slice(2, 2, &[c(h), c(h), c(h), c(-h)])
    }

    #[test]
    fn spectral_of_classical_state() {
        let ens = spectral_ensemble(&classical());
        assert_eq!(ens.len(), 2);
        for b in ens.branches() {
            assert!((b.probability - 0.5).abs() < 1e-12);
            let a = b.state.amplitudes();
            assert!((a[0].norm() - 1.0).abs() < 1e-12 || (a[3].norm() - 1.0).abs() < 1e-12);
        }
        assert!(average_branch_entropy(&ens, &["A"]).unwrap().abs() < 1e-12);
    }

    #[test]
    fn spectral_of_pure_state_has_one_branch() {
        let ens = spectral_ensemble(&generate::bell().to_density());
        assert_eq!(ens.len(), 1);
        assert!((ens.branches()[0].probability - 1.0).abs() < 1e-12);
        assert!((average_branch_entropy(&ens, &["A"]).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hadamard_isometry_gives_bell_branches() {
        let v = Isometry::new(hadamard()).unwrap();
        let ens = hjw_ensemble(&classical(), &v).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        for b in ens.branches() {
            assert!((b.probability - 0.5).abs() < 1e-12);
            let a = b.state.amplitudes();
            // (|00> +- |11>)/sqrt 2 up to a global phase
            assert!((a[0].norm() - h).abs() < 1e-12 && (a[3].norm() - h).abs() < 1e-12);
            assert!(a[1].norm() < 1e-12 && a[2].norm() < 1e-12);
        }
        assert!((average_branch_entropy(&ens, &["A"]).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hjw_rejects_wrong_column_count() {
        let v = Isometry::padded_identity(3, 3).unwrap();
        assert!(hjw_ensemble(&classical(), &v).is_err());
    }

    #[test]
    fn zero_weight_branches_are_retained() {
        let v = Isometry::padded_identity(4, 2).unwrap();
        let ens = hjw_ensemble(&classical(), &v).unwrap();
        assert_eq!(ens.len(), 4);
        assert_eq!(ens.probabilities()[2], 0.0);
    }

    #[test]
    fn isometry_validation() {
        assert!(Isometry::new(CMatrix::identity(2, 3)).is_err());
        assert!(Isometry::new(CMatrix::identity(2, 2) * c(2.0)).is_err());
    }

    #[test]
    fn computational_measurement_of_classical_state() {
        let out = measure_rank1(&classical(), &["B"], &Rank1Measurement::computational(2)).unwrap();
        assert_eq!(out.outcomes().len(), 2);
        for (x, o) in out.outcomes().iter().enumerate() {
            assert!((o.probability - 0.5).abs() < 1e-12);
            assert!((o.state.matrix()[(x, x)].re - 1.0).abs() < 1e-12);
        }
        assert!(out.average_entropy().abs() < 1e-12);
    }

    #[test]
    fn product_state_post_states_do_not_move() {
        let a = generate::random_mixed(SystemLayout::new([("A", 2)]).unwrap(), 3).unwrap();
        let b = generate::random_mixed(SystemLayout::new([("B", 3)]).unwrap(), 4).unwrap();
        let ab = a.tensor(&b).unwrap();
        let basis = orthonormal_completion(&CMatrix::from_fn(3, 1, |i, _| c([0.6, 0.0, 0.8][i])));
        let out =
            measure_rank1(&ab, &["B"], &Rank1Measurement::from_basis(&basis).unwrap()).unwrap();
        for o in out.outcomes() {
            assert!(max_abs_diff(o.state.matrix(), a.matrix()) < 1e-12);
        }
    }

    #[test]
    fn x_basis_on_bell_gives_pure_post_states() {
        let bell = generate::bell().to_density();
        let out = measure_rank1(
            &bell,
            &["B"],
            &Rank1Measurement::from_basis(&hadamard()).unwrap(),
        )
        .unwrap();
        for o in out.outcomes() {
            assert!((o.probability - 0.5).abs() < 1e-12);
            assert!((o.state.purity() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn incomplete_measurement_rejected() {
        let v = vec![CVector::from_vec(vec![c(1.0), c(0.0)])];
        assert!(Rank1Measurement::new(v).is_err());
    }

    #[test]
    fn ghz3_measured_on_c() {
        let ghz = generate::ghz(3).unwrap();
        let ens = ensemble_from_measurement(
            &ghz,
            &["A", "B"],
            &["C"],
            &Rank1Measurement::computational(2),
        )
        .unwrap();
        assert_eq!(ens.len(), 2);
        assert!(average_branch_entropy(&ens, &["A"]).unwrap().abs() < 1e-12);
        let ens = ensemble_from_measurement(
            &ghz,
            &["A", "B"],
            &["C"],
            &Rank1Measurement::from_basis(&hadamard()).unwrap(),
        )
        .unwrap();
        assert!((average_branch_entropy(&ens, &["A"]).unwrap() - 1.0).abs() < 1e-12);
        for b in ens.branches() {
            assert!((b.probability - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn ensemble_measurement_round_trip() {
        let psi = generate::haar_random_pure(SystemLayout::qubits(3).unwrap(), 9);
        let rho_ab = psi.partial_trace(&["A", "B"]).unwrap();
        let u = crate::optimizer::unitary::haar_isometry(4, 2, &mut generate::rng_for(2));
        let ens = hjw_ensemble(&rho_ab, &Isometry::new(u).unwrap()).unwrap();
        let m = measurement_from_ensemble(&psi, &["A", "B"], &["C"], &ens).unwrap();
        assert_eq!(m.len(), 4);
        let back = ensemble_from_measurement(&psi, &["A", "B"], &["C"], &m).unwrap();
        assert_eq!(back.len(), ens.len());
        for (p, q) in back.probabilities().iter().zip(ens.probabilities()) {
            assert!((p - q).abs() < 1e-9);
        }
        let e1 = average_branch_entropy(&ens, &["A"]).unwrap();
        let e2 = average_branch_entropy(&back, &["A"]).unwrap();
        assert!((e1 - e2).abs() < 1e-9);
    }
}
