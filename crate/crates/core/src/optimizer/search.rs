use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use super::unitary::haar_isometry;
use super::{OptimizerConfig, Sense};
use crate::{CMatrix, C64};

/// Objective of the form `sum_k term(row_k)` over the rows of an isometry.
pub(crate) trait BranchObjective: Sync {
    fn cols(&self) -> usize;
    fn term(&self, row: &[C64], scratch: &mut Scratch) -> f64;
}

#[derive(Default)]
pub(crate) struct Scratch {
    pub a: Vec<C64>,
}

pub(crate) struct SearchOutcome {
    /// Unsigned objective value.
    pub value: f64,
    pub isometry: CMatrix,
    pub evals: usize,
    pub converged: bool,
}

const COARSE_STEPS: [f64; 5] = [-3.0, -2.0, -1.0, 1.0, 2.0];
const COARSE_UNIT: f64 = std::f64::consts::PI / 12.0;
const GOLDEN_ITERS: usize = 22;
const PHASES: [f64; 2] = [0.0, std::f64::consts::FRAC_PI_2];
const LOCAL_STEP: f64 = 0.02;
const LOCAL_MAX: f64 = std::f64::consts::PI / 8.0;

#[derive(Clone, Copy, PartialEq, Eq)]
enum SweepKind {
    /// Coarse grid plus golden-section refinement per direction.
    Global,
    /// One three-point parabolic step per direction.
    Local,
}

pub(crate) fn multi_restart<O: BranchObjective>(
    obj: &O,
    rows: usize,
    sense: Sense,
    cfg: &OptimizerConfig,
) -> SearchOutcome {
    let cols = obj.cols();
    let runs: Vec<SearchOutcome> = (0..cfg.restarts)
        .into_par_iter()
        .map(|k| {
            let init = if k == 0 {
                CMatrix::identity(rows, cols)
            } else {
                let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
                rng.set_stream(k as u64);
                haar_isometry(rows, cols, &mut rng)
            };
            Walk::new(obj, init, sense).run(cfg.max_evals_per_restart, cfg.tol)
        })
        .collect();
    let evals = runs.iter().map(|r| r.evals).sum();
    let better = |a: f64, b: f64| match sense {
        Sense::Min => a < b,
        Sense::Max => a > b,
    };
    let mut best: Option<SearchOutcome> = None;
    for run in runs {
        if best.as_ref().is_none_or(|b| better(run.value, b.value)) {
            best = Some(run);
        }
    }
    let mut best = best.expect("at least one restart");
    best.evals = evals;
    best
}

struct Walk<'a, O> {
    obj: &'a O,
    n: usize,
    r: usize,
    rows: Vec<C64>,
    terms: Vec<f64>,
    sign: f64,
    evals: usize,
    scratch: Scratch,
    row_i: Vec<C64>,
    row_j: Vec<C64>,
}

impl<'a, O: BranchObjective> Walk<'a, O> {
    fn new(obj: &'a O, init: CMatrix, sense: Sense) -> Self {
        let (n, r) = init.shape();
        let mut rows = Vec::with_capacity(n * r);
        for i in 0..n {
            for j in 0..r {
                rows.push(init[(i, j)]);
            }
        }
        let mut walk = Self {
            obj,
            n,
            r,
            rows,
            terms: vec![0.0; n],
            sign: match sense {
                Sense::Min => 1.0,
                Sense::Max => -1.0,
            },
            evals: 0,
            scratch: Scratch::default(),
            row_i: vec![C64::new(0.0, 0.0); r],
            row_j: vec![C64::new(0.0, 0.0); r],
        };
        for i in 0..n {
            let t = obj.term(&walk.rows[i * r..(i + 1) * r], &mut walk.scratch);
            walk.terms[i] = t;
        }
        walk
    }

    fn signed_total(&self) -> f64 {
        self.sign * self.terms.iter().sum::<f64>()
    }

    fn row_is_zero(&self, i: usize) -> bool {
        self.rows[i * self.r..(i + 1) * self.r]
            .iter()
            .all(|z| z.norm_sqr() < 1e-28)
    }

    fn rotated(&mut self, i: usize, j: usize, theta: f64, phi: f64) {
        let (s, c) = theta.sin_cos();
        let e = C64::from_polar(s, phi);
        let r = self.r;
        for k in 0..r {
            let a = self.rows[i * r + k];
            let b = self.rows[j * r + k];
            self.row_i[k] = a * c + e * b;
            self.row_j[k] = b * c - e.conj() * a;
        }
    }

    /// Signed value of the two affected terms after rotating by `(theta, phi)`.
    fn trial(&mut self, i: usize, j: usize, theta: f64, phi: f64) -> (f64, f64, f64) {
        self.rotated(i, j, theta, phi);
        self.evals += 1;
        let ti = self.obj.term(&self.row_i, &mut self.scratch);
        let tj = self.obj.term(&self.row_j, &mut self.scratch);
        (self.sign * (ti + tj), ti, tj)
    }

    fn line_search(&mut self, i: usize, j: usize, phi: f64) {
        let base = self.sign * (self.terms[i] + self.terms[j]);
        let mut best_theta = 0.0;
        let mut best_val = base;
        for &k in &COARSE_STEPS {
            let t = k * COARSE_UNIT;
            let (v, _, _) = self.trial(i, j, t, phi);
            if v < best_val {
                best_val = v;
                best_theta = t;
            }
        }
        // golden section on [best - unit, best + unit]
        let gr = 0.5 * (5f64.sqrt() - 1.0);
        let (mut lo, mut hi) = (best_theta - COARSE_UNIT, best_theta + COARSE_UNIT);
        let mut x1 = hi - gr * (hi - lo);
        let mut x2 = lo + gr * (hi - lo);
        let mut f1 = self.trial(i, j, x1, phi).0;
        let mut f2 = self.trial(i, j, x2, phi).0;
        for _ in 0..GOLDEN_ITERS {
            if f1 < f2 {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - gr * (hi - lo);
                f1 = self.trial(i, j, x1, phi).0;
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + gr * (hi - lo);
                f2 = self.trial(i, j, x2, phi).0;
            }
        }
        let (x, fx) = if f1 < f2 { (x1, f1) } else { (x2, f2) };
        if fx < best_val {
            best_val = fx;
            best_theta = x;
        }
        if best_val < base && best_theta != 0.0 {
            self.accept(i, j, best_theta, phi);
        }
    }

    fn local_step(&mut self, i: usize, j: usize, phi: f64) {
        let base = self.sign * (self.terms[i] + self.terms[j]);
        let h = LOCAL_STEP;
        let fp = self.trial(i, j, h, phi).0;
        let fm = self.trial(i, j, -h, phi).0;
        let (mut best_theta, mut best_val) = if fp < fm { (h, fp) } else { (-h, fm) };
        let curv = fp - 2.0 * base + fm;
        if curv > 0.0 {
            let t = (h * (fm - fp) / (2.0 * curv)).clamp(-LOCAL_MAX, LOCAL_MAX);
            if t != 0.0 {
                let ft = self.trial(i, j, t, phi).0;
                if ft < best_val {
                    best_val = ft;
                    best_theta = t;
                }
            }
        }
        if best_val < base {
            self.accept(i, j, best_theta, phi);
        }
    }

    fn accept(&mut self, i: usize, j: usize, theta: f64, phi: f64) {
        let (_, ti, tj) = self.trial(i, j, theta, phi);
        let r = self.r;
        self.rows[i * r..(i + 1) * r].copy_from_slice(&self.row_i);
        self.rows[j * r..(j + 1) * r].copy_from_slice(&self.row_j);
        self.terms[i] = ti;
        self.terms[j] = tj;
    }

    /// One pass over all row pairs; false if the budget ran out.
    fn sweep(&mut self, kind: SweepKind, max_evals: usize) -> bool {
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                if self.row_is_zero(i) && self.row_is_zero(j) {
                    continue;
                }
                for &phi in &PHASES {
                    match kind {
                        SweepKind::Global => self.line_search(i, j, phi),
                        SweepKind::Local => self.local_step(i, j, phi),
                    }
                }
                if self.evals >= max_evals {
                    return false;
                }
            }
        }
        true
    }

    /// Global sweeps until one fails to improve by `tol`; in between, local
    /// sweeps until they stall.
    fn run(mut self, max_evals: usize, tol: f64) -> SearchOutcome {
        let mut converged = self.n < 2;
        let mut kind = SweepKind::Global;
        let mut current = self.signed_total();
        while !converged {
            if !self.sweep(kind, max_evals) {
                break;
            }
            let next = self.signed_total();
            let stalled = current - next < tol;
            current = next;
            kind = match (kind, stalled) {
                (SweepKind::Global, true) => {
                    converged = true;
                    kind
                }
                (SweepKind::Global, false) => SweepKind::Local,
                (SweepKind::Local, true) => SweepKind::Global,
                (SweepKind::Local, false) => SweepKind::Local,
            };
        }
        let (n, r) = (self.n, self.r);
        SearchOutcome {
            value: self.terms.iter().sum(),
            isometry: CMatrix::from_row_slice(n, r, &self.rows),
            evals: self.evals,
            converged,
        }
    }
}
