use std::path::PathBuf;

use clap::Args;
use lyaplab::{concentration_check, ProjectivePoint};
use serde::Serialize;
use serde_json::json;

use super::{load_measure, parse_direction};
use crate::output::Output;
use crate::{Failure, Globals};

#[derive(Args, Serialize)]
pub struct ConcentrationArgs {
    #[arg(long)]
    pub measure: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    pub eps: f64,
    #[arg(long, default_value_t = 10_000)]
    pub n: usize,
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    /// Start "x1,x2,…"; default e₁.
    #[arg(long)]
    pub direction: Option<String>,
    /// σ² bound; default from the eccentricity.
    #[arg(long)]
    pub sigma2: Option<f64>,
}

pub fn run(a: &ConcentrationArgs, g: &Globals) -> Result<Vec<Output>, Failure> {
    let nu = load_measure(&a.measure, g)?;
    let v = match &a.direction {
        Some(d) => parse_direction(d, nu.dim())?,
        None => ProjectivePoint::axis(nu.dim(), 0),
    };
    let r = concentration_check(&nu, &v, a.eps, a.n, a.trials, g.seed, a.sigma2)?;
    let triple = json!({ "empirical_tail": r.empirical_tail, "bound": r.bound, "pass": r.pass });
    Ok(vec![Output::json("concentration.json", json!({ "check": triple, "report": r }))])
}
