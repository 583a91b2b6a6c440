use std::path::PathBuf;

use clap::Args;
use lyaplab::cocycle::DEFAULT_BURN_IN;
use lyaplab::{
    estimate_asymptotic_variance, estimate_bottom_exponent, estimate_partial_sum, estimate_top_exponent,
    individual_exponent, CocycleRunConfig,
};
use serde::Serialize;
use serde_json::Value;

use super::load_measure;
use crate::output::{estimate_record, record, Output};
use crate::{Failure, Globals};

#[derive(Args, Serialize)]
pub struct EstimateArgs {
    /// Measure file (JSON with dim, atoms, weights).
    #[arg(long)]
    pub measure: PathBuf,
    /// Measured steps per trajectory.
    #[arg(long, default_value_t = 100_000)]
    pub steps: usize,
    #[arg(long, default_value_t = 64)]
    pub trajectories: usize,
    #[arg(long, default_value_t = DEFAULT_BURN_IN)]
    pub burn_in: usize,
    /// Also report Λ_k = λ₁ + … + λ_k and λ_k.
    #[arg(long)]
    pub k: Option<usize>,
    /// Measured steps per trajectory for σ².
    #[arg(long, default_value_t = 10_000)]
    pub variance_steps: usize,
}

pub fn records(a: &EstimateArgs, g: &Globals) -> Result<Vec<Value>, Failure> {
    let nu = load_measure(&a.measure, g)?;
    let cfg = CocycleRunConfig::new(a.steps + a.burn_in, a.trajectories, a.burn_in, g.seed)?;
    let top = estimate_top_exponent(&nu, &cfg)?;
    let bottom = estimate_bottom_exponent(&nu, &cfg)?;
    let second = if nu.dim() == 2 { bottom.clone() } else { individual_exponent(&nu, 2, &cfg)? };
    let gap = top.minus(&second);
    let mut out = vec![
        estimate_record("lambda_plus", &top),
        estimate_record("lambda_minus", &bottom),
        estimate_record("gap", &gap),
    ];
    let var_cfg = CocycleRunConfig::new(a.variance_steps + a.burn_in, a.trajectories.max(2), a.burn_in, g.seed)?;
    out.push(estimate_record("sigma2", &estimate_asymptotic_variance(&nu, &var_cfg)?));
    if let Some(k) = a.k {
        out.push(estimate_record(&format!("partial_sum_{k}"), &estimate_partial_sum(&nu, k, &cfg)?));
        out.push(estimate_record(&format!("lambda_{k}"), &individual_exponent(&nu, k, &cfg)?));
    }
    out.push(record("eccentricity", nu.eccentricity(), 0.0, 0, 0, g.seed));
    out.push(record("mean_log_det", nu.mean_log_det(), 0.0, 0, 0, g.seed));
    Ok(out)
}

pub fn run(a: &EstimateArgs, g: &Globals) -> Result<Vec<Output>, Failure> {
    Ok(vec![Output::json("estimate.json", Value::Array(records(a, g)?))])
}
