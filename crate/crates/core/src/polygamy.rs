//! Strong polygamy chains over all nonempty proper subsets of the
//! non-focus parties, and the identities they rest on.
//!
//! For a focus party `A` and the remaining parties `B = {B1..Bn}` the
//! entanglement chain is
//!
//! ```text
//! E_a(A|B) <= 1/(2^(n-1)-1) sum_X E_a(rho_AX) <= sum_i E_a(rho_ABi)
//! ```
//!
//! and, for pure global states, the discord chain replaces `E_a` by the
//! unlocalizable discord in the first inequality.
//!
//! The subset terms are lower bounds, so a PASS on `lhs <= middle` with an
//! exact `lhs` is never produced by optimizer error. Negative slack is
//! first met with one budget escalation; what remains is reported as
//! optimizer-limited, never as a violation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{QpolyError, Result};
use crate::info::{conditional_entropy, marginal_entropy, mutual_information, von_neumann_entropy};
use crate::measures::{self, Bound, CorrelationValue, Cut};
use crate::optimizer::{
    optimize_rank1_measurement_with, optimize_roof, MeasurementSearch, OptimizerConfig, Sense,
};
use crate::state::{DensityOperator, StateVector};

/// Default slack tolerance for chain verdicts.
pub const CHAIN_TOLERANCE: f64 = 1e-3;

/// Tolerance for identities that only involve exact linear algebra.
pub const EXACT_IDENTITY_TOL: f64 = 1e-8;

/// Tolerance for identities with optimizer-estimated terms.
pub const OPTIMIZED_IDENTITY_TOL: f64 = 5e-4;

/// Tolerance for the subset-sum identity, which aggregates many estimates.
pub const SUM_IDENTITY_TOL: f64 = 3e-3;

/// Beyond this many non-focus parties the subset count grows quickly.
pub const DEFAULT_MAX_PARTIES: usize = 4;

/// All nonempty proper subsets of the non-focus labels, each paired with its
/// complement. Ordered by size, then lexicographically by position.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsetFamily {
    b_labels: Vec<String>,
    subsets: Vec<Vec<usize>>,
    complement_of: Vec<usize>,
}

impl SubsetFamily {
    pub fn b_labels(&self) -> &[String] {
        &self.b_labels
    }

    pub fn len(&self) -> usize {
        self.subsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subsets.is_empty()
    }

    /// Positions into [`Self::b_labels`].
    pub fn subset(&self, k: usize) -> &[usize] {
        &self.subsets[k]
    }

    pub fn subsets(&self) -> &[Vec<usize>] {
        &self.subsets
    }

    /// Index of the complement of subset `k`.
    pub fn complement_index(&self, k: usize) -> usize {
        self.complement_of[k]
    }

    pub fn labels(&self, k: usize) -> Vec<String> {
        self.subsets[k]
            .iter()
            .map(|&i| self.b_labels[i].clone())
            .collect()
    }

    /// `1 / (2^(n-1) - 1)`.
    pub fn normalization(&self) -> f64 {
        1.0 / ((1u64 << (self.b_labels.len() - 1)) - 1) as f64
    }

    /// Indices of the single-party subsets, in label order.
    pub fn singletons(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&k| self.subsets[k].len() == 1)
            .collect()
    }
}

pub fn enumerate_subsets<S: AsRef<str>>(b_labels: &[S]) -> Result<SubsetFamily> {
    let n = b_labels.len();
    if n < 2 {
        return Err(QpolyError::InvalidLabelSet(format!(
            "need at least two non-focus parties for proper subsets, got {n}"
        )));
    }
    if n > 16 {
        return Err(QpolyError::Unsupported(format!("{n} parties")));
    }
    let labels: Vec<String> = b_labels.iter().map(|s| s.as_ref().to_string()).collect();
    for (i, l) in labels.iter().enumerate() {
        if labels[..i].contains(l) {
            return Err(QpolyError::InvalidLabelSet(format!(
                "label `{l}` listed twice"
            )));
        }
    }
    let full = (1usize << n) - 1;
    let mut subsets: Vec<Vec<usize>> = (1..full)
        .map(|mask| (0..n).filter(|i| mask & (1 << i) != 0).collect())
        .collect();
    subsets.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    let complement_of = subsets
        .iter()
        .map(|s| {
            let c: Vec<usize> = (0..n).filter(|i| !s.contains(i)).collect();
            subsets
                .iter()
                .position(|t| *t == c)
                .expect("family is closed under complement")
        })
        .collect();
    Ok(SubsetFamily {
        b_labels: labels,
        subsets,
        complement_of,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    pub fn and(self, other: Verdict) -> Verdict {
        match (self, other) {
            (Verdict::Fail, _) | (_, Verdict::Fail) => Verdict::Fail,
            (Verdict::Inconclusive, _) | (_, Verdict::Inconclusive) => Verdict::Inconclusive,
            _ => Verdict::Pass,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChainKind {
    Entanglement,
    Discord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetValue {
    pub subset: Vec<String>,
    pub value: CorrelationValue,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolygamyReport {
    pub chain: ChainKind,
    pub focus: String,
    pub lhs: f64,
    pub lhs_bound: Bound,
    pub middle: f64,
    /// Sum over single parties; only the entanglement chain has one.
    pub rhs: Option<f64>,
    pub per_subset: Vec<SubsetValue>,
    pub per_single: Vec<SubsetValue>,
    pub normalization: f64,
    pub slack_lhs_middle: f64,
    pub slack_middle_rhs: Option<f64>,
    /// The usual (single-party) polygamy inequality `lhs <= rhs`.
    pub slack_lhs_rhs: Option<f64>,
    pub tolerance: f64,
    pub verdict_lhs_middle: Verdict,
    pub verdict_middle_rhs: Option<Verdict>,
    pub verdict_lhs_rhs: Option<Verdict>,
    pub escalated: bool,
    pub notes: Vec<String>,
}

impl PolygamyReport {
    pub fn verdict(&self) -> Verdict {
        [self.verdict_middle_rhs, self.verdict_lhs_rhs]
            .into_iter()
            .flatten()
            .fold(self.verdict_lhs_middle, Verdict::and)
    }

    /// The stored middle term recomputed from the per-subset values.
    pub fn recomputed_middle(&self) -> f64 {
        self.normalization * self.per_subset.iter().map(|s| s.value.value).sum::<f64>()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainOptions {
    pub tolerance: f64,
    /// Re-run with a larger budget once when a slack comes out negative.
    pub escalate: bool,
    pub escalation_factor: usize,
}

impl Default for ChainOptions {
    fn default() -> Self {
        Self {
            tolerance: CHAIN_TOLERANCE,
            escalate: true,
            escalation_factor: 4,
        }
    }
}

struct ChainInput<'a> {
    rho: &'a DensityOperator,
    focus: String,
    family: SubsetFamily,
    pure: bool,
}

fn chain_input<'a>(rho: &'a DensityOperator, focus: &str, pure: bool) -> Result<ChainInput<'a>> {
    let layout = rho.layout();
    let fpos = layout.position(focus)?;
    let others: Vec<String> = layout
        .labels()
        .into_iter()
        .enumerate()
        .filter(|&(p, _)| p != fpos)
        .map(|(_, l)| l.to_string())
        .collect();
    if others.len() > DEFAULT_MAX_PARTIES {
        log::warn!(
            "{} non-focus parties: {} subset optimizations per chain",
            others.len(),
            (1usize << others.len()) - 2
        );
    }
    let family = enumerate_subsets(&others)?;
    Ok(ChainInput {
        rho,
        focus: focus.to_string(),
        family,
        pure,
    })
}

impl ChainInput<'_> {
    fn marginal(&self, k: usize) -> Result<(DensityOperator, Cut)> {
        let subset = self.family.labels(k);
        let mut keep = vec![self.focus.clone()];
        keep.extend(subset.iter().cloned());
        let rho = self.rho.partial_trace(&keep)?;
        Ok((rho, Cut::new(&[self.focus.as_str()], &subset)))
    }
}

type TermFn = dyn Fn(&DensityOperator, &Cut, &OptimizerConfig) -> Result<CorrelationValue> + Sync;

fn subset_terms(
    input: &ChainInput<'_>,
    cfg: &OptimizerConfig,
    term: &TermFn,
) -> Result<Vec<SubsetValue>> {
    (0..input.family.len())
        .into_par_iter()
        .map(|k| {
            let (rho, cut) = input.marginal(k)?;
            Ok(SubsetValue {
                subset: cut.measured.clone(),
                value: term(&rho, &cut, cfg)?,
            })
        })
        .collect()
}

fn verdict_for(
    slack: f64,
    tol: f64,
    lower_bound_lhs: bool,
    notes: &mut Vec<String>,
    what: &str,
) -> Verdict {
    if slack >= 0.0 {
        return Verdict::Pass;
    }
    if lower_bound_lhs {
        notes.push(format!(
            "{what}: negative slack {slack:.3e} with both sides estimated"
        ));
        return Verdict::Inconclusive;
    }
    notes.push(format!("{what}: optimizer-limited (slack {slack:.3e})"));
    if slack >= -tol {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

fn build_report(
    input: &ChainInput<'_>,
    chain: ChainKind,
    lhs: CorrelationValue,
    per_subset: Vec<SubsetValue>,
    opts: &ChainOptions,
    escalated: bool,
) -> PolygamyReport {
    let family = &input.family;
    let normalization = family.normalization();
    let middle = normalization * per_subset.iter().map(|s| s.value.value).sum::<f64>();
    let per_single: Vec<SubsetValue> = match chain {
        ChainKind::Entanglement => family
            .singletons()
            .into_iter()
            .map(|k| per_subset[k].clone())
            .collect(),
        ChainKind::Discord => Vec::new(),
    };
    let rhs = (chain == ChainKind::Entanglement)
        .then(|| per_single.iter().map(|s| s.value.value).sum::<f64>());
    let estimated_lhs = lhs.bound != Bound::Exact;
    let mut notes = Vec::new();
    let slack_lhs_middle = middle - lhs.value;
    let verdict_lhs_middle = verdict_for(
        slack_lhs_middle,
        opts.tolerance,
        estimated_lhs,
        &mut notes,
        "lhs<=middle",
    );
    let slack_middle_rhs = rhs.map(|r| r - middle);
    // both sides are lower bounds: only a matched-budget comparison
    let verdict_middle_rhs =
        slack_middle_rhs.map(|s| verdict_for(s, opts.tolerance, false, &mut notes, "middle<=rhs"));
    let slack_lhs_rhs = rhs.map(|r| r - lhs.value);
    let verdict_lhs_rhs = slack_lhs_rhs
        .map(|s| verdict_for(s, opts.tolerance, estimated_lhs, &mut notes, "lhs<=rhs"));
    PolygamyReport {
        chain,
        focus: input.focus.clone(),
        lhs: lhs.value,
        lhs_bound: lhs.bound,
        middle,
        rhs,
        per_subset,
        per_single,
        normalization,
        slack_lhs_middle,
        slack_middle_rhs,
        slack_lhs_rhs,
        tolerance: opts.tolerance,
        verdict_lhs_middle,
        verdict_middle_rhs,
        verdict_lhs_rhs,
        escalated,
        notes,
    }
}

fn run_chain(
    input: &ChainInput<'_>,
    chain: ChainKind,
    lhs: CorrelationValue,
    cfg: &OptimizerConfig,
    opts: &ChainOptions,
    term: &TermFn,
) -> Result<PolygamyReport> {
    cfg.validate()?;
    let per_subset = subset_terms(input, cfg, term)?;
    let report = build_report(input, chain, lhs.clone(), per_subset, opts, false);
    let negative =
        report.slack_lhs_middle < 0.0 || report.slack_middle_rhs.is_some_and(|s| s < 0.0);
    if !(negative && opts.escalate) {
        return Ok(report);
    }
    let bigger = cfg.escalated(opts.escalation_factor);
    let again = subset_terms(input, &bigger, term)?;
    // subset terms are lower bounds; keep the better of the two runs
    let merged = report
        .per_subset
        .into_iter()
        .zip(again)
        .map(|(a, b)| if b.value.value > a.value.value { b } else { a })
        .collect();
    Ok(build_report(input, chain, lhs, merged, opts, true))
}

/// Entanglement chain for a pure global state.
pub fn strong_polygamy_entanglement(
    psi: &StateVector,
    focus: &str,
    cfg: &OptimizerConfig,
    opts: &ChainOptions,
) -> Result<PolygamyReport> {
    let rho = psi.to_density();
    let input = chain_input(&rho, focus, true)?;
    let lhs = pure_lhs(&input)?;
    run_chain(
        &input,
        ChainKind::Entanglement,
        lhs,
        cfg,
        opts,
        &measures::eoa,
    )
}

/// Best-effort entanglement chain for a mixed global state: `lhs` is itself
/// a lower bound, and negative slacks are INCONCLUSIVE.
pub fn strong_polygamy_entanglement_mixed(
    rho: &DensityOperator,
    focus: &str,
    cfg: &OptimizerConfig,
    opts: &ChainOptions,
) -> Result<PolygamyReport> {
    let input = chain_input(rho, focus, false)?;
    let cut = Cut::against_rest(rho, &[focus])?;
    let lhs = measures::eoa(rho, &cut, cfg)?;
    run_chain(
        &input,
        ChainKind::Entanglement,
        lhs,
        cfg,
        opts,
        &measures::eoa,
    )
}

/// Discord chain `d_u(A|B) <= 1/(2^(n-1)-1) sum_X d_u(rho_AX)` for a pure
/// global state.
pub fn strong_polygamy_discord(
    psi: &StateVector,
    focus: &str,
    cfg: &OptimizerConfig,
    opts: &ChainOptions,
) -> Result<PolygamyReport> {
    let rho = psi.to_density();
    let input = chain_input(&rho, focus, true)?;
    let mut lhs = pure_lhs(&input)?;
    lhs.kind = measures::CorrelationKind::UnlocalizableDiscord;
    run_chain(
        &input,
        ChainKind::Discord,
        lhs,
        cfg,
        opts,
        &measures::unlocalizable_discord,
    )
}

fn pure_lhs(input: &ChainInput<'_>) -> Result<CorrelationValue> {
    debug_assert!(input.pure);
    let cut = Cut::against_rest(input.rho, &[input.focus.as_str()])?;
    // pure global state: the assistance across focus|rest is S(focus)
    measures::eoa(input.rho, &cut, &OptimizerConfig::default())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl IdentityCheck {
    fn new(name: impl Into<String>, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        let residual = lhs - rhs;
        Self {
            name: name.into(),
            lhs,
            rhs,
            residual,
            tolerance,
            pass: residual.abs() <= tolerance,
        }
    }
}

/// Per-subset optimizer estimates shared by the identities.
struct SubsetEstimates {
    assistance: f64,
    formation: f64,
    classical_direct: f64,
    unlocalizable_direct: f64,
}

/// Evaluates, for a pure state and focus party, every identity the chains
/// are derived from. Both sides of each identity are computed along
/// independent routes.
pub fn identity_suite(
    psi: &StateVector,
    focus: &str,
    cfg: &OptimizerConfig,
) -> Result<Vec<IdentityCheck>> {
    cfg.validate()?;
    let rho = psi.to_density();
    let input = chain_input(&rho, focus, true)?;
    let family = &input.family;
    let s_focus = marginal_entropy(&rho, &[focus])?;
    let mut checks = Vec::new();

    let complement_closed =
        (0..family.len()).all(|k| family.complement_index(family.complement_index(k)) == k);
    checks.push(IdentityCheck::new(
        "complement-closure",
        if complement_closed {
            family.len() as f64
        } else {
            0.0
        },
        ((1usize << family.b_labels().len()) - 2) as f64,
        0.0,
    ));

    let marginals: Vec<(DensityOperator, Cut)> = (0..family.len())
        .map(|k| input.marginal(k))
        .collect::<Result<_>>()?;
    let subset_entropy: Vec<f64> = marginals
        .iter()
        .map(|(r, _)| von_neumann_entropy(r))
        .collect();
    let over_subsets: f64 = subset_entropy.iter().sum();
    let over_complements: f64 = (0..family.len())
        .map(|k| subset_entropy[family.complement_index(k)])
        .sum();
    checks.push(IdentityCheck::new(
        "complement-sum",
        over_complements,
        over_subsets,
        EXACT_IDENTITY_TOL,
    ));

    let conditional: Vec<f64> = (0..family.len())
        .map(|k| conditional_entropy(&rho, &[focus], &family.labels(k)))
        .collect::<Result<_>>()?;
    let worst_pair = (0..family.len())
        .map(|k| conditional[k] + conditional[family.complement_index(k)])
        .fold(0.0f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
    checks.push(IdentityCheck::new(
        "conditional-entropy-pairs",
        worst_pair,
        0.0,
        EXACT_IDENTITY_TOL,
    ));
    checks.push(IdentityCheck::new(
        "conditional-entropy-sum",
        conditional.iter().sum(),
        0.0,
        EXACT_IDENTITY_TOL,
    ));

    // pure bipartite cut focus|rest, without shortcuts
    let rest: Vec<String> = family.b_labels().to_vec();
    let side = vec![focus.to_string()];
    let assistance_pure = optimize_roof(&rho, &side, Sense::Max, cfg)?.value;
    checks.push(IdentityCheck::new(
        "pure-assistance",
        assistance_pure,
        s_focus,
        EXACT_IDENTITY_TOL,
    ));
    let unloc_pure =
        optimize_rank1_measurement_with(&rho, &rest, Sense::Min, cfg, MeasurementSearch::Dual)?
            .value;
    let discord_pure = mutual_information(&rho, &side, &rest)? - unloc_pure;
    checks.push(IdentityCheck::new(
        "pure-unlocalizable-discord",
        discord_pure,
        s_focus,
        EXACT_IDENTITY_TOL,
    ));

    let estimates: Vec<SubsetEstimates> = marginals
        .par_iter()
        .map(|(r, cut)| {
            let formation = measures::eof(r, cut, cfg)?.value;
            let assistance = measures::eoa(r, cut, cfg)?.value;
            let classical_direct =
                measures::classical_correlation(r, cut, cfg, MeasurementSearch::Direct)?.value;
            let unlocalizable_direct =
                measures::unlocalizable_entanglement(r, cut, cfg, MeasurementSearch::Direct)?.value;
            Ok(SubsetEstimates {
                assistance,
                formation,
                classical_direct,
                unlocalizable_direct,
            })
        })
        .collect::<Result<_>>()?;

    let mut discord_sum = 0.0;
    for k in 0..family.len() {
        let c = family.complement_index(k);
        let name = family.labels(k).join(",");
        checks.push(IdentityCheck::new(
            format!("koashi-winter[{name}]"),
            s_focus,
            estimates[k].classical_direct + estimates[c].formation,
            OPTIMIZED_IDENTITY_TOL,
        ));
        checks.push(IdentityCheck::new(
            format!("assistance-unlocalizable[{name}]"),
            s_focus,
            estimates[k].unlocalizable_direct + estimates[c].assistance,
            OPTIMIZED_IDENTITY_TOL,
        ));
        let (rc, cutc) = &marginals[c];
        let discord_c =
            mutual_information(rc, &cutc.side, &cutc.measured)? - estimates[c].unlocalizable_direct;
        checks.push(IdentityCheck::new(
            format!("assistance-discord[{name}]"),
            estimates[k].assistance,
            discord_c + conditional[c],
            OPTIMIZED_IDENTITY_TOL,
        ));
        let (rk, cutk) = &marginals[k];
        discord_sum +=
            mutual_information(rk, &cutk.side, &cutk.measured)? - estimates[k].unlocalizable_direct;
    }
    let assistance_sum: f64 = estimates.iter().map(|e| e.assistance).sum();
    checks.push(IdentityCheck::new(
        "subset-sum",
        assistance_sum,
        discord_sum,
        SUM_IDENTITY_TOL,
    ));
    Ok(checks)
}
