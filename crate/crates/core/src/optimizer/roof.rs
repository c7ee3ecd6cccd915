use super::search::{multi_restart, BranchObjective, Scratch};
use super::{OptimizationResult, OptimizerConfig, Sense};
use crate::ensemble::Isometry;
use crate::error::{QpolyError, Result};
use crate::info::{check_partition, marginal_entropy};
use crate::linalg::{eig2, hermitian_eigenvalues, weighted_entropy_bits};
use crate::state::{fresh_label, DensityOperator, ANCILLA_LABEL, RANK_THRESHOLD};
use crate::{CMatrix, C64};

/// How [`optimize_rank1_measurement_with`] explores measurements.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasurementSearch {
    /// Purify and search decompositions of the complementary marginal.
    Dual,
    /// Search rank-1 measurements on the measured side directly.
    Direct,
}

/// Average branch entropy of the decomposition selected by an isometry row.
struct RoofObjective {
    /// `D x r` row-major, column `j` is `sqrt(l_j) e_j`.
    basis: Vec<C64>,
    dim: usize,
    rank: usize,
    /// `index[a * large + b]` is the flat index of (small-factor `a`,
    /// large-factor `b`).
    index: Vec<usize>,
    small: usize,
    large: usize,
}

impl RoofObjective {
    fn new(rho: &DensityOperator, side: &[usize]) -> Self {
        let (vals, vecs) = rho.eigen();
        let rank = vals.iter().filter(|&&l| l > RANK_THRESHOLD).count().max(1);
        let dim = rho.dim();
        let mut basis = Vec::with_capacity(dim * rank);
        for f in 0..dim {
            for j in 0..rank {
                basis.push(vecs[(f, j)] * vals[j].max(0.0).sqrt());
            }
        }
        let layout = rho.layout();
        let rest = layout.complement(side);
        let (ds, dr) = (layout.dim_of(side), layout.dim_of(&rest));
        let (small_pos, large_pos) = if ds <= dr {
            (side.to_vec(), rest)
        } else {
            (rest, side.to_vec())
        };
        let small = layout.dim_of(&small_pos);
        let large = layout.dim_of(&large_pos);
        let mut index = vec![0; dim];
        for (f, (a, b)) in layout
            .split_indices(&small_pos, &large_pos)
            .into_iter()
            .enumerate()
        {
            index[a * large + b] = f;
        }
        Self {
            basis,
            dim,
            rank,
            index,
            small,
            large,
        }
    }
}

impl BranchObjective for RoofObjective {
    fn cols(&self) -> usize {
        self.rank
    }

    fn term(&self, row: &[C64], scratch: &mut Scratch) -> f64 {
        let w = &mut scratch.a;
        w.clear();
        let r = self.rank;
        for f in 0..self.dim {
            let b = &self.basis[f * r..(f + 1) * r];
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..r {
                acc += b[j] * row[j];
            }
            w.push(acc);
        }
        let (s, l) = (self.small, self.large);
        let at = |a: usize, b: usize| w[self.index[a * l + b]];
        if s == 2 {
            let (mut g00, mut g11, mut g01) = (0.0, 0.0, C64::new(0.0, 0.0));
            for b in 0..l {
                let (x, y) = (at(0, b), at(1, b));
                g00 += x.norm_sqr();
                g11 += y.norm_sqr();
                g01 += x * y.conj();
            }
            let (l0, l1) = eig2(g00, g11, g01);
            return weighted_entropy_bits(&[l0, l1], g00 + g11);
        }
        let g = CMatrix::from_fn(s, s, |a, ap| {
            (0..l).map(|b| at(a, b) * at(ap, b).conj()).sum()
        });
        let p = g.trace().re;
        weighted_entropy_bits(&hermitian_eigenvalues(&g), p)
    }
}

/// `p_x S(rho_U^x)` for the rank-1 outcome `conj(row)` on the measured side.
struct MeasurementObjective {
    /// `rho[(u, m), (u', m')]` at `((u * dm + m) * du + u') * dm + m'`.
    tensor: Vec<C64>,
    du: usize,
    dm: usize,
}

impl MeasurementObjective {
    fn new(rho: &DensityOperator, unmeasured: &[usize], measured: &[usize]) -> Self {
        let layout = rho.layout();
        let du = layout.dim_of(unmeasured);
        let dm = layout.dim_of(measured);
        let mut full = vec![0; du * dm];
        for (f, (u, m)) in layout
            .split_indices(unmeasured, measured)
            .into_iter()
            .enumerate()
        {
            full[u * dm + m] = f;
        }
        let mat = rho.matrix();
        let mut tensor = Vec::with_capacity(du * dm * du * dm);
        for u in 0..du {
            for m in 0..dm {
                for up in 0..du {
                    for mp in 0..dm {
                        tensor.push(mat[(full[u * dm + m], full[up * dm + mp])]);
                    }
                }
            }
        }
        Self { tensor, du, dm }
    }

    fn sigma(&self, row: &[C64], u: usize, up: usize) -> C64 {
        let (du, dm) = (self.du, self.dm);
        let mut acc = C64::new(0.0, 0.0);
        for m in 0..dm {
            let base = ((u * dm + m) * du + up) * dm;
            let inner: C64 = self.tensor[base..base + dm]
                .iter()
                .zip(row)
                .map(|(t, r)| t * r.conj())
                .sum();
            acc += row[m] * inner;
        }
        acc
    }
}

impl BranchObjective for MeasurementObjective {
    fn cols(&self) -> usize {
        self.dm
    }

    fn term(&self, row: &[C64], _scratch: &mut Scratch) -> f64 {
        if self.du == 2 {
            let a = self.sigma(row, 0, 0).re;
            let d = self.sigma(row, 1, 1).re;
            let b = self.sigma(row, 0, 1);
            let (l0, l1) = eig2(a, d, b);
            return weighted_entropy_bits(&[l0, l1], a + d);
        }
        let g = CMatrix::from_fn(self.du, self.du, |u, up| self.sigma(row, u, up));
        let p = g.trace().re;
        weighted_entropy_bits(&hermitian_eigenvalues(&g), p)
    }
}

fn branch_count(cfg: &OptimizerConfig, rank: usize) -> Result<usize> {
    let n = cfg.branch_count.unwrap_or(rank * rank);
    if n < rank {
        return Err(QpolyError::InvalidConfig(format!(
            "branch_count {n} is below the rank {rank}"
        )));
    }
    Ok(n)
}

/// Minimum (`Sense::Min`, an upper bound on the entanglement of formation)
/// or maximum (`Sense::Max`, a lower bound on the entanglement of
/// assistance) of the average entropy of `side` over decompositions of `rho`.
pub fn optimize_roof<S: AsRef<str>>(
    rho: &DensityOperator,
    side: &[S],
    sense: Sense,
    cfg: &OptimizerConfig,
) -> Result<OptimizationResult> {
    cfg.validate()?;
    let layout = rho.layout();
    let pos = layout.positions(side)?;
    if pos.is_empty() || pos.len() >= layout.len() {
        return Err(QpolyError::InvalidLabelSet(
            "side must be a nonempty proper subset".into(),
        ));
    }
    let obj = RoofObjective::new(rho, &pos);
    let rows = branch_count(cfg, obj.rank)?;
    let out = multi_restart(&obj, rows, sense, cfg);
    Ok(OptimizationResult {
        value: out.value,
        best_isometry: Isometry::from_matrix_unchecked(out.isometry),
        evals_used: out.evals,
        converged: out.converged,
        sense,
    })
}

/// Optimizes `S(rho_U) - sum_x p_x S(rho_U^x)` over rank-1 measurements of
/// the `measured` parts (`U` is the rest), through the purification dual.
pub fn optimize_rank1_measurement<S: AsRef<str>>(
    rho: &DensityOperator,
    measured: &[S],
    sense: Sense,
    cfg: &OptimizerConfig,
) -> Result<OptimizationResult> {
    optimize_rank1_measurement_with(rho, measured, sense, cfg, MeasurementSearch::Dual)
}

/// As [`optimize_rank1_measurement`] with an explicit search mode. In
/// `Dual` mode `best_isometry` selects a decomposition of the
/// unmeasured-plus-purifier marginal; in `Direct` mode its conjugated rows are
/// the measurement vectors.
pub fn optimize_rank1_measurement_with<S: AsRef<str>>(
    rho: &DensityOperator,
    measured: &[S],
    sense: Sense,
    cfg: &OptimizerConfig,
    mode: MeasurementSearch,
) -> Result<OptimizationResult> {
    cfg.validate()?;
    let layout = rho.layout();
    let mpos = layout.positions(measured)?;
    let upos = layout.complement(&mpos);
    check_partition(rho, &layout.labels_at(&upos), measured)?;
    let ulabels = layout.labels_at(&upos);
    let s_u = marginal_entropy(rho, &ulabels)?;
    match mode {
        MeasurementSearch::Dual => {
            let anc = fresh_label(layout, ANCILLA_LABEL);
            let psi = rho.purify_with_label(&anc)?;
            let mut keep = ulabels.clone();
            keep.push(anc);
            let complement = psi.partial_trace(&keep)?;
            let roof = optimize_roof(&complement, &ulabels, sense.flipped(), cfg)?;
            Ok(OptimizationResult {
                value: s_u - roof.value,
                sense,
                ..roof
            })
        }
        MeasurementSearch::Direct => {
            let obj = MeasurementObjective::new(rho, &upos, &mpos);
            let rows = branch_count(cfg, obj.dm)?;
            let out = multi_restart(&obj, rows, sense.flipped(), cfg);
            Ok(OptimizationResult {
                value: s_u - out.value,
                best_isometry: Isometry::from_matrix_unchecked(out.isometry),
                evals_used: out.evals,
                converged: out.converged,
                sense,
            })
        }
    }
}
