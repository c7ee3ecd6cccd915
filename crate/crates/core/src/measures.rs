//! The bipartite correlation measures, each returned with the direction in
//! which the numerical estimate can deviate from the true value.
//!
//! One-way measures take a [`Cut`] whose `measured` side is the one that is
//! measured (B in `J(A|B)`); `side` is the one whose entropy is reduced.

use serde::{Deserialize, Serialize};

use crate::error::{QpolyError, Result};
use crate::info::{self, check_partition};
use crate::linalg::{binary_entropy, eig_hermitian, psd_sqrt};
use crate::optimizer::{
    optimize_rank1_measurement_with, optimize_roof, MeasurementSearch, OptimizerConfig, Sense,
};
use crate::state::DensityOperator;
use crate::{CMatrix, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CorrelationKind {
    #[serde(rename = "eof")]
    EntanglementOfFormation,
    #[serde(rename = "eoa")]
    EntanglementOfAssistance,
    #[serde(rename = "classical_correlation")]
    ClassicalCorrelation,
    #[serde(rename = "unlocalizable_entanglement")]
    UnlocalizableEntanglement,
    #[serde(rename = "discord")]
    Discord,
    #[serde(rename = "unlocalizable_discord")]
    UnlocalizableDiscord,
    #[serde(rename = "entropy")]
    Entropy,
    #[serde(rename = "mutual_information")]
    MutualInformation,
}

/// Relation of a reported value to the true one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bound {
    Exact,
    /// The true value is at least the reported one.
    Lower,
    /// The true value is at most the reported one.
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    Direct,
    Dual,
    PureShortcut,
    ClosedForm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationValue {
    pub kind: CorrelationKind,
    /// Bits, never negative.
    pub value: f64,
    pub bound: Bound,
    pub route: Route,
    pub converged: bool,
}

impl CorrelationValue {
    fn exact(kind: CorrelationKind, value: f64, route: Route) -> Self {
        Self {
            kind,
            value: value.max(0.0),
            bound: Bound::Exact,
            route,
            converged: true,
        }
    }
}

/// Bipartition of a state's labels.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Cut {
    pub side: Vec<String>,
    pub measured: Vec<String>,
}

impl Cut {
    pub fn new<S: AsRef<str>, T: AsRef<str>>(side: &[S], measured: &[T]) -> Self {
        Self {
            side: side.iter().map(|s| s.as_ref().to_string()).collect(),
            measured: measured.iter().map(|s| s.as_ref().to_string()).collect(),
        }
    }

    /// `side` against every other label of `rho`.
    pub fn against_rest<S: AsRef<str>>(rho: &DensityOperator, side: &[S]) -> Result<Self> {
        let pos = rho.layout().positions(side)?;
        let rest = rho.layout().complement(&pos);
        Ok(Self {
            side: rho.layout().labels_at(&pos),
            measured: rho.layout().labels_at(&rest),
        })
    }

    fn check(&self, rho: &DensityOperator) -> Result<()> {
        check_partition(rho, &self.side, &self.measured).map(|_| ())
    }
}

fn route_of(mode: MeasurementSearch) -> Route {
    match mode {
        MeasurementSearch::Dual => Route::Dual,
        MeasurementSearch::Direct => Route::Direct,
    }
}

pub fn entropy(rho: &DensityOperator) -> CorrelationValue {
    CorrelationValue::exact(
        CorrelationKind::Entropy,
        info::von_neumann_entropy(rho),
        Route::Direct,
    )
}

pub fn mutual_information(rho: &DensityOperator, cut: &Cut) -> Result<CorrelationValue> {
    let i = info::mutual_information(rho, &cut.side, &cut.measured)?;
    Ok(CorrelationValue::exact(
        CorrelationKind::MutualInformation,
        i,
        Route::Direct,
    ))
}

fn side_entropy(rho: &DensityOperator, cut: &Cut) -> Result<f64> {
    info::marginal_entropy(rho, &cut.side)
}

/// Entanglement of formation across `cut` (an upper bound unless `rho` is pure).
pub fn eof(rho: &DensityOperator, cut: &Cut, cfg: &OptimizerConfig) -> Result<CorrelationValue> {
    roof(rho, cut, cfg, Sense::Min)
}

/// Entanglement of assistance across `cut` (a lower bound unless `rho` is pure).
pub fn eoa(rho: &DensityOperator, cut: &Cut, cfg: &OptimizerConfig) -> Result<CorrelationValue> {
    roof(rho, cut, cfg, Sense::Max)
}

fn roof(
    rho: &DensityOperator,
    cut: &Cut,
    cfg: &OptimizerConfig,
    sense: Sense,
) -> Result<CorrelationValue> {
    cut.check(rho)?;
    let kind = match sense {
        Sense::Min => CorrelationKind::EntanglementOfFormation,
        Sense::Max => CorrelationKind::EntanglementOfAssistance,
    };
    if rho.is_pure() {
        return Ok(CorrelationValue::exact(
            kind,
            side_entropy(rho, cut)?,
            Route::PureShortcut,
        ));
    }
    let res = optimize_roof(rho, &cut.side, sense, cfg)?;
    Ok(CorrelationValue {
        kind,
        value: res.value.max(0.0),
        bound: match sense {
            Sense::Min => Bound::Upper,
            Sense::Max => Bound::Lower,
        },
        route: Route::Direct,
        converged: res.converged,
    })
}

/// One-way classical correlation `J(side | measured)`, a lower bound.
/// `Dual` evaluates `S(side) - E_f(side, purifier)`.
pub fn classical_correlation(
    rho: &DensityOperator,
    cut: &Cut,
    cfg: &OptimizerConfig,
    route: MeasurementSearch,
) -> Result<CorrelationValue> {
    one_way(rho, cut, cfg, route, Sense::Max)
}

/// One-way unlocalizable entanglement, an upper bound. `Dual` evaluates
/// `S(side) - E_a(side, purifier)`.
pub fn unlocalizable_entanglement(
    rho: &DensityOperator,
    cut: &Cut,
    cfg: &OptimizerConfig,
    route: MeasurementSearch,
) -> Result<CorrelationValue> {
    one_way(rho, cut, cfg, route, Sense::Min)
}

fn one_way(
    rho: &DensityOperator,
    cut: &Cut,
    cfg: &OptimizerConfig,
    route: MeasurementSearch,
    sense: Sense,
) -> Result<CorrelationValue> {
    cut.check(rho)?;
    let kind = match sense {
        Sense::Max => CorrelationKind::ClassicalCorrelation,
        Sense::Min => CorrelationKind::UnlocalizableEntanglement,
    };
    if rho.is_pure() {
        return Ok(CorrelationValue::exact(
            kind,
            side_entropy(rho, cut)?,
            Route::PureShortcut,
        ));
    }
    let res = optimize_rank1_measurement_with(rho, &cut.measured, sense, cfg, route)?;
    Ok(CorrelationValue {
        kind,
        value: res.value.max(0.0),
        bound: match sense {
            Sense::Max => Bound::Lower,
            Sense::Min => Bound::Upper,
        },
        route: route_of(route),
        converged: res.converged,
    })
}

/// Quantum discord `I - J`, an upper bound.
pub fn quantum_discord(
    rho: &DensityOperator,
    cut: &Cut,
    cfg: &OptimizerConfig,
) -> Result<CorrelationValue> {
    quantum_discord_with(rho, cut, cfg, MeasurementSearch::Dual)
}

pub fn quantum_discord_with(
    rho: &DensityOperator,
    cut: &Cut,
    cfg: &OptimizerConfig,
    route: MeasurementSearch,
) -> Result<CorrelationValue> {
    let i = mutual_information(rho, cut)?;
    let j = classical_correlation(rho, cut, cfg, route)?;
    Ok(difference(CorrelationKind::Discord, &i, &j))
}

/// Unlocalizable discord `I - E_u`, a lower bound.
pub fn unlocalizable_discord(
    rho: &DensityOperator,
    cut: &Cut,
    cfg: &OptimizerConfig,
) -> Result<CorrelationValue> {
    unlocalizable_discord_with(rho, cut, cfg, MeasurementSearch::Dual)
}

pub fn unlocalizable_discord_with(
    rho: &DensityOperator,
    cut: &Cut,
    cfg: &OptimizerConfig,
    route: MeasurementSearch,
) -> Result<CorrelationValue> {
    let i = mutual_information(rho, cut)?;
    let e = unlocalizable_entanglement(rho, cut, cfg, route)?;
    Ok(difference(CorrelationKind::UnlocalizableDiscord, &i, &e))
}

/// `I - x` for an exact `I`: the bound direction of `x` flips.
fn difference(
    kind: CorrelationKind,
    i: &CorrelationValue,
    x: &CorrelationValue,
) -> CorrelationValue {
    CorrelationValue {
        kind,
        value: (i.value - x.value).max(0.0),
        bound: match x.bound {
            Bound::Exact => Bound::Exact,
            Bound::Lower => Bound::Upper,
            Bound::Upper => Bound::Lower,
        },
        route: x.route,
        converged: x.converged,
    }
}

fn check_two_qubit(rho: &DensityOperator) -> Result<()> {
    if rho.layout().dims() != [2, 2] {
        return Err(QpolyError::Unsupported(format!(
            "closed-form concurrence needs dims [2, 2], got {:?}",
            rho.layout().dims()
        )));
    }
    Ok(())
}

/// Concurrence `max(0, l1 - l2 - l3 - l4)` where `l_i` are the decreasing
/// square roots of the spectrum of `sqrt(rho) rho~ sqrt(rho)` and
/// `rho~ = (Y x Y) rho* (Y x Y)`.
pub fn concurrence_two_qubit(rho: &DensityOperator) -> Result<f64> {
    check_two_qubit(rho)?;
    let z = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    #[rustfmt::skip]
    let yy = CMatrix::from_row_slice(4, 4, &[
        z, z, z, -one,
        z, z, one, z,
        z, one, z, z,
        -one, z, z, z,
    ]);
    let flipped = &yy * rho.matrix().map(|x| x.conj()) * &yy;
    let root = psd_sqrt(rho.matrix())?;
    let m = &root * flipped * &root;
    let m = CMatrix::from_fn(4, 4, |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5);
    let (vals, _) = eig_hermitian(&m)?;
    let l: Vec<f64> = vals.iter().map(|v| v.max(0.0).sqrt()).collect();
    Ok((l[0] - l[1] - l[2] - l[3]).max(0.0))
}

/// Closed-form two-qubit entanglement of formation `h((1 + sqrt(1 - C^2)) / 2)`.
pub fn wootters_eof_two_qubit(rho: &DensityOperator) -> Result<CorrelationValue> {
    let c = concurrence_two_qubit(rho)?;
    let x = 0.5 * (1.0 + (1.0 - c * c).max(0.0).sqrt());
    Ok(CorrelationValue::exact(
        CorrelationKind::EntanglementOfFormation,
        binary_entropy(x),
        Route::ClosedForm,
    ))
}
