//! `--gen` state specifications such as `ghz,4` or `random-pure,2x3,7`.

use std::fmt;
use std::str::FromStr;

use qpoly::generate;
use qpoly::{DensityOperator, StateVector, SystemLayout};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StateKind {
    Ghz(usize),
    W(usize),
    Dicke(usize, usize),
    Product(usize),
    Bell,
    /// `seed: None` defers to the run seed.
    RandomPure {
        dims: Vec<usize>,
        seed: Option<u64>,
    },
    RandomMixed {
        dims: Vec<usize>,
        seed: Option<u64>,
    },
}

/// A state as loaded from a spec or a file.
#[derive(Debug, Clone, PartialEq)]
pub enum LoadedState {
    Pure(StateVector),
    Mixed(DensityOperator),
}

impl LoadedState {
    pub fn layout(&self) -> &SystemLayout {
        match self {
            LoadedState::Pure(psi) => psi.layout(),
            LoadedState::Mixed(rho) => rho.layout(),
        }
    }

    pub fn density(&self) -> DensityOperator {
        match self {
            LoadedState::Pure(psi) => psi.to_density(),
            LoadedState::Mixed(rho) => rho.clone(),
        }
    }
}

pub fn parse_dims(s: &str) -> CliResult<Vec<usize>> {
    let dims: Vec<usize> = s
        .split('x')
        .map(|d| {
            d.trim()
                .parse::<usize>()
                .map_err(|_| CliError::Invalid(format!("bad dims `{s}`")))
        })
        .collect::<CliResult<_>>()?;
    if dims.len() < 2 || dims.iter().any(|&d| d < 2) {
        return Err(CliError::Invalid(format!(
            "dims `{s}` need at least two parties of dimension >= 2"
        )));
    }
    Ok(dims)
}

fn format_dims(dims: &[usize]) -> String {
    dims.iter()
        .map(|d| d.to_string())
        .collect::<Vec<_>>()
        .join("x")
}

fn count(s: Option<&str>, what: &str) -> CliResult<usize> {
    let s = s.ok_or_else(|| CliError::Invalid(format!("`{what}` needs a party count")))?;
    let n = s
        .trim()
        .parse::<usize>()
        .map_err(|_| CliError::Invalid(format!("bad count `{s}` for `{what}`")))?;
    if n < 2 {
        return Err(CliError::Invalid(format!(
            "`{what}` needs at least two parties"
        )));
    }
    Ok(n)
}

impl FromStr for StateKind {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        let mut it = s.split(',');
        let name = it.next().unwrap_or("").trim().to_ascii_lowercase();
        let kind = match name.as_str() {
            "ghz" => StateKind::Ghz(count(it.next(), "ghz")?),
            "w" => StateKind::W(count(it.next(), "w")?),
            "product" => StateKind::Product(count(it.next(), "product")?),
            "bell" => StateKind::Bell,
            "dicke" => {
                let n = count(it.next(), "dicke")?;
                let k = it
                    .next()
                    .and_then(|k| k.trim().parse::<usize>().ok())
                    .ok_or_else(|| CliError::Invalid("`dicke` needs an excitation count".into()))?;
                if k > n {
                    return Err(CliError::Invalid(format!(
                        "dicke excitation {k} exceeds {n} parties"
                    )));
                }
                StateKind::Dicke(n, k)
            }
            "random-pure" | "random-mixed" => {
                let dims = parse_dims(
                    it.next()
                        .ok_or_else(|| CliError::Invalid(format!("`{name}` needs dims")))?,
                )?;
                let seed = it
                    .next()
                    .map(|t| {
                        t.trim()
                            .parse::<u64>()
                            .map_err(|_| CliError::Invalid(format!("bad seed `{t}`")))
                    })
                    .transpose()?;
                if name == "random-pure" {
                    StateKind::RandomPure { dims, seed }
                } else {
                    StateKind::RandomMixed { dims, seed }
                }
            }
            _ => return Err(CliError::Invalid(format!("unknown state `{name}`"))),
        };
        if it.next().is_some() {
            return Err(CliError::Invalid(format!("trailing fields in `{s}`")));
        }
        Ok(kind)
    }
}

impl StateKind {
    /// Fixes a deferred seed so the spec echo is reproducible on its own.
    pub fn resolve_seed(self, run_seed: u64) -> Self {
        match self {
            StateKind::RandomPure { dims, seed } => StateKind::RandomPure {
                dims,
                seed: Some(seed.unwrap_or(run_seed)),
            },
            StateKind::RandomMixed { dims, seed } => StateKind::RandomMixed {
                dims,
                seed: Some(seed.unwrap_or(run_seed)),
            },
            other => other,
        }
    }

    pub fn build(&self, run_seed: u64) -> CliResult<LoadedState> {
        let pure = |r: qpoly::Result<StateVector>| r.map(LoadedState::Pure).map_err(CliError::from);
        match self {
            StateKind::Ghz(n) => pure(generate::ghz(*n)),
            StateKind::W(n) => pure(generate::w_state(*n)),
            StateKind::Dicke(n, k) => pure(generate::dicke(*n, *k)),
            StateKind::Product(n) => pure(generate::product_zero(*n)),
            StateKind::Bell => Ok(LoadedState::Pure(generate::bell())),
            StateKind::RandomPure { dims, seed } => {
                let layout = SystemLayout::with_dims(dims)?;
                Ok(LoadedState::Pure(generate::haar_random_pure(
                    layout,
                    seed.unwrap_or(run_seed),
                )))
            }
            StateKind::RandomMixed { dims, seed } => {
                let layout = SystemLayout::with_dims(dims)?;
                Ok(LoadedState::Mixed(generate::random_mixed(
                    layout,
                    seed.unwrap_or(run_seed),
                )?))
            }
        }
    }
}

impl fmt::Display for StateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateKind::Ghz(n) => write!(f, "ghz,{n}"),
            StateKind::W(n) => write!(f, "w,{n}"),
            StateKind::Dicke(n, k) => write!(f, "dicke,{n},{k}"),
            StateKind::Product(n) => write!(f, "product,{n}"),
            StateKind::Bell => write!(f, "bell"),
            StateKind::RandomPure { dims, seed } | StateKind::RandomMixed { dims, seed } => {
                let name = if matches!(self, StateKind::RandomPure { .. }) {
                    "random-pure"
                } else {
                    "random-mixed"
                };
                write!(f, "{name},{}", format_dims(dims))?;
                match seed {
                    Some(s) => write!(f, ",{s}"),
                    None => Ok(()),
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_echo() {
        for s in [
            "ghz,4",
            "w,3",
            "dicke,4,2",
            "product,3",
            "bell",
            "random-pure,2x2x2,7",
            "random-mixed,2x3",
        ] {
            let k: StateKind = s.parse().unwrap();
            assert_eq!(k.to_string(), s);
        }
    }

    #[test]
    fn rejects_bad_specs() {
        for s in [
            "ghz",
            "ghz,1",
            "ghz,x",
            "teleport,3",
            "dicke,3,4",
            "random-pure,2",
            "random-pure,1x2",
            "bell,2",
            "w,3,1",
        ] {
            assert!(s.parse::<StateKind>().is_err(), "{s}");
        }
    }

    #[test]
    fn seed_resolution() {
        let k: StateKind = "random-pure,2x2".parse().unwrap();
        assert_eq!(k.resolve_seed(9).to_string(), "random-pure,2x2,9");
    }
}
