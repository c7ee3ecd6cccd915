//! Entropy functionals, all in bits.

use crate::error::{QpolyError, Result};
use crate::linalg;
use crate::state::DensityOperator;

pub fn von_neumann_entropy(rho: &DensityOperator) -> f64 {
    linalg::entropy_bits(&rho.eigen().0)
}

/// Entropy of the marginal on `labels`.
pub fn marginal_entropy<S: AsRef<str>>(rho: &DensityOperator, labels: &[S]) -> Result<f64> {
    Ok(von_neumann_entropy(&rho.partial_trace(labels)?))
}

/// `S(target | condition) = S(target, condition) - S(condition)`. May be negative.
pub fn conditional_entropy<S: AsRef<str>, T: AsRef<str>>(
    rho: &DensityOperator,
    target: &[S],
    condition: &[T],
) -> Result<f64> {
    let t = rho.layout().positions(target)?;
    let c = rho.layout().positions(condition)?;
    if t.is_empty() || c.is_empty() {
        return Err(QpolyError::InvalidLabelSet(
            "target and condition must be nonempty".into(),
        ));
    }
    if t.iter().any(|p| c.contains(p)) {
        return Err(QpolyError::InvalidLabelSet(
            "target and condition overlap".into(),
        ));
    }
    let joint: Vec<usize> = t.iter().chain(c.iter()).copied().collect();
    let joint = rho.layout().labels_at(&joint);
    let cond = rho.layout().labels_at(&c);
    Ok(marginal_entropy(rho, &joint)? - marginal_entropy(rho, &cond)?)
}

/// `I(X:Y) = S(X) + S(Y) - S(XY)` where `(X, Y)` partitions the labels.
pub fn mutual_information<S: AsRef<str>, T: AsRef<str>>(
    rho: &DensityOperator,
    first: &[S],
    second: &[T],
) -> Result<f64> {
    let (a, b) = check_partition(rho, first, second)?;
    let la = rho.layout().labels_at(&a);
    let lb = rho.layout().labels_at(&b);
    Ok(marginal_entropy(rho, &la)? + marginal_entropy(rho, &lb)? - von_neumann_entropy(rho))
}

/// Resolves a bipartition of all of `rho`'s labels into sorted positions.
pub fn check_partition<S: AsRef<str>, T: AsRef<str>>(
    rho: &DensityOperator,
    first: &[S],
    second: &[T],
) -> Result<(Vec<usize>, Vec<usize>)> {
    let a = rho.layout().positions(first)?;
    let b = rho.layout().positions(second)?;
    if a.is_empty() || b.is_empty() {
        return Err(QpolyError::InvalidLabelSet(
            "both sides of a cut must be nonempty".into(),
        ));
    }
    if a.iter().any(|p| b.contains(p)) {
        return Err(QpolyError::InvalidLabelSet("cut sides overlap".into()));
    }
    if a.len() + b.len() != rho.layout().len() {
        return Err(QpolyError::InvalidLabelSet(
            "cut does not cover every subsystem".into(),
        ));
    }
    Ok((a, b))
}
