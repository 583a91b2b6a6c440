pub mod concentration;
pub mod constants;
pub mod estimate;
pub mod example9;
pub mod ids;
pub mod ldp;
pub mod markov;
pub mod wasserstein;

use std::path::Path;

use lyaplab::measures::read_measure_file;
use lyaplab::{FiniteMatrixMeasure, ProjectivePoint};

use crate::{Failure, Globals};

pub fn load_measure(path: &Path, g: &Globals) -> Result<FiniteMatrixMeasure, Failure> {
    read_measure_file(path, g.renormalize).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

/// `k` points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, k: usize) -> Result<Vec<f64>, Failure> {
    if k < 2 || !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Failure::Input(format!("grid needs at least 2 points and min < max, got {k} on [{lo}, {hi}]")));
    }
    Ok((0..k).map(|i| lo + (hi - lo) * i as f64 / (k - 1) as f64).collect())
}

/// Parses "x1,x2,…" as a direction.
pub fn parse_direction(text: &str, dim: usize) -> Result<ProjectivePoint, Failure> {
    let v: Vec<f64> = text
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|e| Failure::Input(format!("direction '{text}': {e}"))))
        .collect::<Result<_, _>>()?;
    if v.len() != dim {
        return Err(Failure::Input(format!("direction has {} coordinates, measure dimension is {dim}", v.len())));
    }
    Ok(ProjectivePoint::new(&v)?)
}
