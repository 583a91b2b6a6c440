use std::path::PathBuf;

use clap::Args;
use lyaplab::{finite_support_upper_bound, hausdorff_distance, support_topology_distance, wasserstein_theta};
use serde::Serialize;
use serde_json::json;

use super::load_measure;
use crate::output::Output;
use crate::{Failure, Globals};

#[derive(Args, Serialize)]
pub struct WassersteinArgs {
    #[arg(long)]
    pub mu: PathBuf,
    #[arg(long)]
    pub nu: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    pub theta: f64,
}

pub fn run(a: &WassersteinArgs, g: &Globals) -> Result<Vec<Output>, Failure> {
    let mu = load_measure(&a.mu, g)?;
    let nu = load_measure(&a.nu, g)?;
    let w = wasserstein_theta(&mu, &nu, a.theta)?;
    let mut doc = json!({
        "theta": a.theta,
        "wasserstein_theta": w,
        "hausdorff": hausdorff_distance(&mu, &nu)?,
        "support_topology": support_topology_distance(&mu, &nu, a.theta)?,
    });
    if mu.len() == nu.len() {
        doc["finite_support_upper_bound"] = json!(finite_support_upper_bound(&mu, &nu, a.theta)?);
    }
    Ok(vec![Output::json("wasserstein.json", doc)])
}
