use std::path::PathBuf;

use clap::Args;
use lyaplab::cocycle::DEFAULT_BURN_IN;
use lyaplab::{chain_spectral_gap, estimate_markov_exponents, CocycleRunConfig, MarkovCocycle, SquareMatrix};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::output::{estimate_record, record, Output};
use crate::{Failure, Globals};

#[derive(Args, Serialize)]
pub struct MarkovArgs {
    /// Chain file: JSON with dim, transition (rows) and fibers (row-major atoms, one per state).
    #[arg(long)]
    pub chain: PathBuf,
    #[arg(long, default_value_t = 100_000)]
    pub steps: usize,
    #[arg(long, default_value_t = 64)]
    pub trajectories: usize,
    #[arg(long, default_value_t = DEFAULT_BURN_IN)]
    pub burn_in: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ChainFile {
    dim: usize,
    transition: Vec<Vec<f64>>,
    fibers: Vec<Vec<f64>>,
}

pub fn run(a: &MarkovArgs, g: &Globals) -> Result<Vec<Output>, Failure> {
    let path = &a.chain;
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let file: ChainFile =
        serde_json::from_str(&text).map_err(|e| Failure::Input(format!("{}: line {}: {e}", path.display(), e.line())))?;
    let fibers = file
        .fibers
        .into_iter()
        .map(|f| SquareMatrix::new(file.dim, f))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let mc = MarkovCocycle::new(&file.transition, fibers)?;
    let cfg = CocycleRunConfig::new(a.steps + a.burn_in, a.trajectories, a.burn_in, g.seed)?;
    let (top, bottom) = estimate_markov_exponents(&mc, &cfg)?;
    let mut records = vec![estimate_record("lambda_plus", &top), estimate_record("lambda_minus", &bottom)];
    if file.dim == 2 {
        records.push(estimate_record("gap", &top.minus(&bottom)));
    }
    records.push(record("chain_spectral_gap", chain_spectral_gap(&file.transition)?, 0.0, 0, 0, g.seed));
    Ok(vec![Output::json(
        "markov.json",
        json!({ "records": Value::Array(records), "stationary": mc.stationary() }),
    )])
}
