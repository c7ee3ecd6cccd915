//! Ordered tensor-factor structure of a composite system.

use serde::{Deserialize, Serialize};

use crate::error::{QpolyError, Result};

/// Largest supported Hilbert-space dimension. Everything is stored densely.
pub const MAX_TOTAL_DIM: usize = 256;

/// Ordered list of labelled subsystems. The first part is the most
/// significant digit of a flat basis index.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SystemLayout {
    parts: Vec<(String, usize)>,
}

impl SystemLayout {
    pub fn new<S: Into<String>>(parts: impl IntoIterator<Item = (S, usize)>) -> Result<Self> {
        let parts: Vec<(String, usize)> = parts.into_iter().map(|(l, d)| (l.into(), d)).collect();
        if parts.is_empty() {
            return Err(QpolyError::InvalidLayout("layout has no parts".into()));
        }
        let mut total: usize = 1;
        for (i, (label, dim)) in parts.iter().enumerate() {
            if label.is_empty() {
                return Err(QpolyError::InvalidLayout("empty label".into()));
            }
            if parts[..i].iter().any(|(l, _)| l == label) {
                return Err(QpolyError::InvalidLayout(format!(
                    "duplicate label `{label}`"
                )));
            }
            if *dim < 2 {
                return Err(QpolyError::InvalidLayout(format!(
                    "subsystem `{label}` has dimension {dim}; every factor needs dim >= 2"
                )));
            }
            total = total.saturating_mul(*dim);
            if total > MAX_TOTAL_DIM {
                return Err(QpolyError::InvalidLayout(format!(
                    "total dimension exceeds {MAX_TOTAL_DIM}"
                )));
            }
        }
        Ok(Self { parts })
    }

    /// `n` qubits labelled `A`, `B`, `C`, ...
    pub fn qubits(n: usize) -> Result<Self> {
        Self::new(default_labels(n)?.into_iter().map(|l| (l, 2)))
    }

    /// Parts labelled `A`, `B`, `C`, ... with the given dimensions.
    pub fn with_dims(dims: &[usize]) -> Result<Self> {
        Self::new(
            default_labels(dims.len())?
                .into_iter()
                .zip(dims.iter().copied()),
        )
    }

    pub fn parts(&self) -> &[(String, usize)] {
        &self.parts
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn labels(&self) -> Vec<&str> {
        self.parts.iter().map(|(l, _)| l.as_str()).collect()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.parts.iter().map(|(_, d)| *d).collect()
    }

    pub fn total_dim(&self) -> usize {
        self.parts.iter().map(|(_, d)| d).product()
    }

    pub fn position(&self, label: &str) -> Result<usize> {
        self.parts
            .iter()
            .position(|(l, _)| l == label)
            .ok_or_else(|| QpolyError::UnknownLabel(label.to_string()))
    }

    pub fn contains(&self, label: &str) -> bool {
        self.parts.iter().any(|(l, _)| l == label)
    }

    /// Resolve labels to sorted, deduplicated part positions.
    pub fn positions<S: AsRef<str>>(&self, labels: &[S]) -> Result<Vec<usize>> {
        let mut out = Vec::with_capacity(labels.len());
        for l in labels {
            let p = self.position(l.as_ref())?;
            if out.contains(&p) {
                return Err(QpolyError::InvalidLabelSet(format!(
                    "label `{}` listed twice",
                    l.as_ref()
                )));
            }
            out.push(p);
        }
        out.sort_unstable();
        Ok(out)
    }

    /// Positions not in `positions`, in layout order.
    pub fn complement(&self, positions: &[usize]) -> Vec<usize> {
        (0..self.len()).filter(|p| !positions.contains(p)).collect()
    }

    /// Layout restricted to the given positions (kept in layout order).
    pub fn select(&self, positions: &[usize]) -> Result<Self> {
        let mut sorted = positions.to_vec();
        sorted.sort_unstable();
        Self::new(sorted.iter().map(|&p| self.parts[p].clone()))
    }

    pub fn labels_at(&self, positions: &[usize]) -> Vec<String> {
        positions.iter().map(|&p| self.parts[p].0.clone()).collect()
    }

    pub fn dim_of(&self, positions: &[usize]) -> usize {
        positions.iter().map(|&p| self.parts[p].1).product()
    }

    /// Concatenation; labels must not collide.
    pub fn concat(&self, other: &SystemLayout) -> Result<Self> {
        for (l, _) in &other.parts {
            if self.contains(l) {
                return Err(QpolyError::InvalidLayout(format!(
                    "label `{l}` present in both layouts"
                )));
            }
        }
        Self::new(self.parts.iter().chain(other.parts.iter()).cloned())
    }

    /// For every flat index of the full space, the flat index restricted to
    /// `first` and the flat index restricted to `second`. Both position lists
    /// are read in layout order.
    pub fn split_indices(&self, first: &[usize], second: &[usize]) -> Vec<(usize, usize)> {
        let dims = self.dims();
        let total = self.total_dim();
        let mut out = Vec::with_capacity(total);
        let mut digits = vec![0usize; dims.len()];
        for flat in 0..total {
            let mut rem = flat;
            for k in (0..dims.len()).rev() {
                digits[k] = rem % dims[k];
                rem /= dims[k];
            }
            let pick = |ps: &[usize]| ps.iter().fold(0usize, |acc, &p| acc * dims[p] + digits[p]);
            out.push((pick(first), pick(second)));
        }
        out
    }
}

fn default_labels(n: usize) -> Result<Vec<String>> {
    if n == 0 || n > 26 {
        return Err(QpolyError::InvalidLayout(format!(
            "cannot label {n} parties"
        )));
    }
    Ok((0..n)
        .map(|i| char::from(b'A' + i as u8).to_string())
        .collect())
}
