//! Exact discrete optimal transport by the transportation simplex.
//!
//! Starts from the northwest-corner basis, prices with MODI potentials and
//! pivots around the unique tree cycle. Bland's rule on entering and leaving
//! cells keeps degenerate problems from cycling.

use crate::error::{Error, Result};

/// Optimal plan together with the dual potentials certifying it.
#[derive(Clone, Debug)]
pub struct TransportSolution {
    pub value: f64,
    /// Row-major `n × m` plan.
    pub plan: Vec<f64>,
    pub row_potentials: Vec<f64>,
    pub col_potentials: Vec<f64>,
    pub pivots: usize,
}

impl TransportSolution {
    pub fn dual_value(&self, supply: &[f64], demand: &[f64]) -> f64 {
        let a: f64 = supply.iter().zip(&self.row_potentials).map(|(p, u)| p * u).sum();
        let b: f64 = demand.iter().zip(&self.col_potentials).map(|(q, v)| q * v).sum();
        a + b
    }
}

const REDUCED_COST_TOL: f64 = 1e-13;
const MAX_PIVOTS: usize = 100_000;

/// Minimizes Σ c_ij x_ij over couplings of `supply` and `demand`.
///
/// The two marginals must have (numerically) equal mass; `cost` is row-major.
pub fn solve(supply: &[f64], demand: &[f64], cost: &[f64]) -> Result<TransportSolution> {
    let n = supply.len();
    let m = demand.len();
    if n == 0 || m == 0 {
        return Err(Error::InvalidInput("empty marginal".into()));
    }
    if cost.len() != n * m {
        return Err(Error::DimMismatch { expected: n * m, found: cost.len() });
    }
    let sa: f64 = supply.iter().sum();
    let sb: f64 = demand.iter().sum();
    if (sa - sb).abs() > 1e-9 * sa.max(sb).max(1.0) {
        return Err(Error::InvalidInput(format!("unbalanced marginals ({sa} vs {sb})")));
    }

    let mut flow = vec![0.0; n * m];
    let mut basic = vec![false; n * m];
    let mut basis: Vec<usize> = Vec::with_capacity(n + m - 1);
    {
        let mut ra = supply.to_vec();
        let mut rb = demand.to_vec();
        let (mut i, mut j) = (0, 0);
        loop {
            let x = ra[i].min(rb[j]).max(0.0);
            flow[i * m + j] = x;
            basic[i * m + j] = true;
            basis.push(i * m + j);
            ra[i] -= x;
            rb[j] -= x;
            if i == n - 1 && j == m - 1 {
                break;
            }
            if j == m - 1 || (i < n - 1 && ra[i] <= rb[j]) {
                i += 1;
            } else {
                j += 1;
            }
        }
    }

    let mut u = vec![0.0; n];
    let mut v = vec![0.0; m];
    let mut pivots = 0;
    loop {
        potentials(n, m, &basis, cost, &mut u, &mut v);
        let entering = (0..n * m).find(|&c| {
            !basic[c] && cost[c] - u[c / m] - v[c % m] < -REDUCED_COST_TOL * (1.0 + cost[c].abs())
        });
        let Some(enter) = entering else { break };
        pivots += 1;
        if pivots > MAX_PIVOTS {
            return Err(Error::Numerical("transport simplex did not converge".into()));
        }
        let path = tree_path(n, m, &basis, enter / m, enter % m);
        // path cells alternate −, +, −, … starting in the entering row
        let minus: Vec<usize> = path.iter().step_by(2).copied().collect();
        let leave = *minus
            .iter()
            .min_by(|&&a, &&b| flow[a].total_cmp(&flow[b]).then(a.cmp(&b)))
            .expect("cycle has a minus cell");
        let t = flow[leave];
        for (k, &c) in path.iter().enumerate() {
            if k % 2 == 0 {
                flow[c] -= t;
            } else {
                flow[c] += t;
            }
        }
        flow[enter] = t;
        flow[leave] = 0.0;
        basic[leave] = false;
        basic[enter] = true;
        let pos = basis.iter().position(|&c| c == leave).expect("leaving cell is basic");
        basis[pos] = enter;
    }

    for x in flow.iter_mut() {
        if *x < 0.0 {
            *x = 0.0;
        }
    }
    let value = flow.iter().zip(cost).map(|(x, c)| x * c).sum();
    Ok(TransportSolution { value, plan: flow, row_potentials: u, col_potentials: v, pivots })
}

/// Solves u_i + v_j = c_ij on the basis tree with u_0 = 0.
fn potentials(n: usize, m: usize, basis: &[usize], cost: &[f64], u: &mut [f64], v: &mut [f64]) {
    let mut row_known = vec![false; n];
    let mut col_known = vec![false; m];
    row_known[0] = true;
    u[0] = 0.0;
    let mut remaining = n + m - 1;
    while remaining > 0 {
        let mut progressed = false;
        for &c in basis {
            let (i, j) = (c / m, c % m);
            if row_known[i] && !col_known[j] {
                v[j] = cost[c] - u[i];
                col_known[j] = true;
                remaining -= 1;
                progressed = true;
            } else if col_known[j] && !row_known[i] {
                u[i] = cost[c] - v[j];
                row_known[i] = true;
                remaining -= 1;
                progressed = true;
            }
        }
        assert!(progressed, "basis must span all rows and columns");
    }
}

/// Basic cells on the tree path from row `i` to column `j`.
fn tree_path(n: usize, m: usize, basis: &[usize], i: usize, j: usize) -> Vec<usize> {
    // nodes: rows 0..n, columns n..n+m
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n + m];
    for &c in basis {
        let (r, s) = (c / m, c % m);
        adj[r].push((n + s, c));
        adj[n + s].push((r, c));
    }
    let start = i;
    let goal = n + j;
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; n + m];
    let mut seen = vec![false; n + m];
    seen[start] = true;
    let mut stack = vec![start];
    while let Some(x) = stack.pop() {
        if x == goal {
            break;
        }
        for &(y, c) in &adj[x] {
            if !seen[y] {
                seen[y] = true;
                parent[y] = Some((x, c));
                stack.push(y);
            }
        }
    }
    let mut path = Vec::new();
    let mut x = goal;
    while x != start {
        let (p, c) = parent[x].expect("basis tree is connected");
        path.push(c);
        x = p;
    }
    path.reverse();
    path
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classic_instance() {
        // 3 × 4 instance, optimum 435 checked with an external LP solver
        let supply = [15.0, 25.0, 10.0];
        let demand = [5.0, 15.0, 15.0, 15.0];
        let cost = [10.0, 2.0, 20.0, 11.0, 12.0, 7.0, 9.0, 20.0, 4.0, 14.0, 16.0, 18.0];
        let sol = solve(&supply, &demand, &cost).unwrap();
        assert!((sol.value - 435.0).abs() < 1e-9, "{}", sol.value);
        assert!((sol.dual_value(&supply, &demand) - sol.value).abs() < 1e-9);
    }

    #[test]
    fn degenerate_identity() {
        let w = [0.25; 4];
        let mut cost = vec![1.0; 16];
        for i in 0..4 {
            cost[i * 4 + i] = 0.0;
        }
        let sol = solve(&w, &w, &cost).unwrap();
        assert!(sol.value.abs() < 1e-15);
        for i in 0..4 {
            for j in 0..4 {
                let s = sol.row_potentials[i] + sol.col_potentials[j];
                assert!(s <= cost[i * 4 + j] + 1e-12);
            }
        }
    }

    #[test]
    fn single_cells() {
        let sol = solve(&[1.0], &[0.3, 0.7], &[2.0, 5.0]).unwrap();
        assert!((sol.value - 4.1).abs() < 1e-12);
    }
}
