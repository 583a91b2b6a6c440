//! JSON measure files: `{"dim": d, "atoms": [[row-major d² floats], …], "weights": […]}`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{FiniteMatrixMeasure, WEIGHT_SUM_TOL};
use crate::error::{Error, Result};
use crate::gl::{SquareMatrix, MAX_INPUT_DIM};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureFile {
    pub dim: usize,
    pub atoms: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl From<&FiniteMatrixMeasure> for MeasureFile {
    fn from(m: &FiniteMatrixMeasure) -> Self {
        Self {
            dim: m.dim(),
            atoms: m.atoms().iter().map(|a| a.entries().to_vec()).collect(),
            weights: m.weights().to_vec(),
        }
    }
}

impl MeasureFile {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }
}

/// 1-based line of the first occurrence of `"key"`, or 1.
fn line_of(text: &str, key: &str) -> usize {
    let needle = format!("\"{key}\"");
    text.lines().position(|l| l.contains(&needle)).map_or(1, |i| i + 1)
}

/// Line of the `index`-th element of the `atoms` array, counting opening brackets.
fn line_of_atom(text: &str, index: usize) -> usize {
    let start = line_of(text, "atoms");
    let mut depth = 0usize;
    let mut seen = 0usize;
    let offset: usize = text.lines().take(start - 1).map(|l| l.len() + 1).sum();
    let body = &text[offset.min(text.len())..];
    let mut line = start;
    let mut started = false;
    for ch in body.chars() {
        match ch {
            '\n' => line += 1,
            '[' => {
                depth += 1;
                if depth == 1 {
                    started = true;
                } else if depth == 2 {
                    if seen == index {
                        return line;
                    }
                    seen += 1;
                }
            }
            ']' => {
                depth = depth.saturating_sub(1);
                if started && depth == 0 {
                    break;
                }
            }
            _ => {}
        }
    }
    start
}

/// Parses and validates a measure file body.
pub fn parse_measure(text: &str, renormalize: bool) -> Result<FiniteMatrixMeasure> {
    let raw: MeasureFile = serde_json::from_str(text)
        .map_err(|e| Error::Parse { line: e.line().max(1), message: e.to_string() })?;
    let parse_err = |line: usize, message: String| Error::Parse { line, message };
    if raw.dim == 0 || raw.dim > MAX_INPUT_DIM {
        return Err(parse_err(line_of(text, "dim"), format!("dim must be in 1..={MAX_INPUT_DIM}, got {}", raw.dim)));
    }
    if raw.atoms.is_empty() {
        return Err(parse_err(line_of(text, "atoms"), "no atoms".into()));
    }
    if raw.atoms.len() != raw.weights.len() {
        return Err(parse_err(
            line_of(text, "weights"),
            format!("{} atoms but {} weights", raw.atoms.len(), raw.weights.len()),
        ));
    }
    let mut atoms = Vec::with_capacity(raw.atoms.len());
    for (i, entries) in raw.atoms.into_iter().enumerate() {
        if entries.len() != raw.dim * raw.dim {
            return Err(parse_err(
                line_of_atom(text, i),
                format!("atom {i} has {} entries, expected {}", entries.len(), raw.dim * raw.dim),
            ));
        }
        let a = SquareMatrix::new(raw.dim, entries)
            .map_err(|e| parse_err(line_of_atom(text, i), format!("atom {i}: {e}")))?;
        atoms.push(a);
    }
    let wline = line_of(text, "weights");
    if let Some((i, w)) = raw.weights.iter().enumerate().find(|(_, w)| !(**w >= 0.0) || !w.is_finite()) {
        return Err(parse_err(wline, format!("weight {i} = {w} is not a non-negative number")));
    }
    let total: f64 = raw.weights.iter().sum();
    if !renormalize && (total - 1.0).abs() > WEIGHT_SUM_TOL {
        return Err(parse_err(
            wline,
            format!("weights sum to {total}, off from 1 by more than {WEIGHT_SUM_TOL:e}; pass --renormalize to rescale"),
        ));
    }
    FiniteMatrixMeasure::normalized(atoms, raw.weights).map_err(|e| parse_err(wline, e.to_string()))
}

pub fn read_measure_file(path: &Path, renormalize: bool) -> Result<FiniteMatrixMeasure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
    parse_measure(&text, renormalize)
}
