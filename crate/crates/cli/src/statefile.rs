//! JSON state files.
//!
//! ```json
//! {"dims": [2, 2], "labels": ["A", "B"], "kind": "pure", "data": [[re, im], ...]}
//! ```
//!
//! Mixed states store `data` as rows of `[re, im]` pairs. Numbers are
//! written with 17 significant digits so that load/save is exact.

use std::fs;
use std::path::Path;

use qpoly::{CMatrix, CVector, DensityOperator, StateVector, SystemLayout, C64};
use serde_json::Value;

use crate::error::{CliError, CliResult};
use crate::spec::LoadedState;

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn pair(z: &C64) -> String {
    format!("[{}, {}]", num(z.re), num(z.im))
}

fn header(layout: &SystemLayout, kind: &str) -> String {
    let dims: Vec<String> = layout.dims().iter().map(|d| d.to_string()).collect();
    let labels: Vec<String> = layout
        .labels()
        .iter()
        .map(|l| serde_json::to_string(l).expect("strings serialize"))
        .collect();
    format!(
        "{{\n  \"dims\": [{}],\n  \"labels\": [{}],\n  \"kind\": \"{kind}\",\n",
        dims.join(", "),
        labels.join(", ")
    )
}

pub fn to_json(state: &LoadedState) -> String {
    let mut out = String::new();
    match state {
        LoadedState::Pure(psi) => {
            out.push_str(&header(psi.layout(), "pure"));
            let rows: Vec<String> = psi
                .amplitudes()
                .iter()
                .map(|z| format!("    {}", pair(z)))
                .collect();
            out.push_str("  \"data\": [\n");
            out.push_str(&rows.join(",\n"));
        }
        LoadedState::Mixed(rho) => {
            out.push_str(&header(rho.layout(), "mixed"));
            let m = rho.matrix();
            let rows: Vec<String> = (0..m.nrows())
                .map(|i| {
                    let row: Vec<String> = (0..m.ncols()).map(|j| pair(&m[(i, j)])).collect();
                    format!("    [{}]", row.join(", "))
                })
                .collect();
            out.push_str("  \"data\": [\n");
            out.push_str(&rows.join(",\n"));
        }
    }
    out.push_str("\n  ]\n}\n");
    out
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Invalid(msg.into())
}

fn complex(v: &Value) -> CliResult<C64> {
    match v.as_array().map(|a| a.as_slice()) {
        Some([re, im]) => match (re.as_f64(), im.as_f64()) {
            (Some(re), Some(im)) => Ok(C64::new(re, im)),
            _ => Err(bad("complex entries must be numbers")),
        },
        _ => Err(bad("complex entries must be [re, im] pairs")),
    }
}

pub fn from_json(text: &str) -> CliResult<LoadedState> {
    let v: Value =
        serde_json::from_str(text).map_err(|e| bad(format!("state file is not JSON: {e}")))?;
    let dims: Vec<usize> = v["dims"]
        .as_array()
        .ok_or_else(|| bad("missing `dims`"))?
        .iter()
        .map(|d| {
            d.as_u64()
                .map(|d| d as usize)
                .ok_or_else(|| bad("dims must be integers"))
        })
        .collect::<CliResult<_>>()?;
    let labels: Vec<String> = match &v["labels"] {
        Value::Null => SystemLayout::with_dims(&dims)?
            .labels()
            .iter()
            .map(|s| s.to_string())
            .collect(),
        Value::Array(a) => a
            .iter()
            .map(|l| {
                l.as_str()
                    .map(str::to_string)
                    .ok_or_else(|| bad("labels must be strings"))
            })
            .collect::<CliResult<_>>()?,
        _ => return Err(bad("`labels` must be an array")),
    };
    if dims.len() < 2 {
        return Err(bad("a state file needs at least two parties"));
    }
    if labels.len() != dims.len() {
        return Err(bad(format!(
            "{} labels for {} dims",
            labels.len(),
            dims.len()
        )));
    }
    let layout = SystemLayout::new(labels.into_iter().zip(dims))?;
    let n = layout.total_dim();
    let data = v["data"].as_array().ok_or_else(|| bad("missing `data`"))?;
    match v["kind"].as_str() {
        Some("pure") => {
            if data.len() != n {
                return Err(bad(format!(
                    "expected {n} amplitudes, found {}",
                    data.len()
                )));
            }
            let amps: Vec<C64> = data.iter().map(complex).collect::<CliResult<_>>()?;
            Ok(LoadedState::Pure(StateVector::new(
                layout,
                CVector::from_vec(amps),
            )?))
        }
        Some("mixed") => {
            if data.len() != n {
                return Err(bad(format!("expected {n} rows, found {}", data.len())));
            }
            let mut m = CMatrix::zeros(n, n);
            for (i, row) in data.iter().enumerate() {
                let row = row
                    .as_array()
                    .ok_or_else(|| bad("matrix rows must be arrays"))?;
                if row.len() != n {
                    return Err(bad(format!(
                        "row {i} has {} entries, expected {n}",
                        row.len()
                    )));
                }
                for (j, z) in row.iter().enumerate() {
                    m[(i, j)] = complex(z)?;
                }
            }
            Ok(LoadedState::Mixed(DensityOperator::new(layout, m)?))
        }
        _ => Err(bad("`kind` must be \"pure\" or \"mixed\"")),
    }
}

pub fn load(path: &Path) -> CliResult<LoadedState> {
    let text =
        fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    from_json(&text)
}

pub fn save(path: &Path, state: &LoadedState) -> CliResult<()> {
    fs::write(path, to_json(state)).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}
