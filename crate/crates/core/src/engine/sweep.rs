use rayon::prelude::*;
use serde::Serialize;

use super::{run, EngineError, RunResult, SimConfig};
use crate::scenario::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepRowKind {
    Goal,
    AllActive,
    AllCapacityOff,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub kind: SweepRowKind,
    /// Target outage; `None` for the reference rows.
    pub goal_pct: Option<f64>,
    pub outage_pct: f64,
    pub power_w: f64,
    pub state_changes: usize,
    pub seed: u64,
}

impl SweepRow {
    fn of(kind: SweepRowKind, goal_pct: Option<f64>, seed: u64, r: &RunResult) -> SweepRow {
        SweepRow {
            kind,
            goal_pct,
            outage_pct: r.mean_outage_pct,
            power_w: r.mean_power_after_warmup_w,
            state_changes: r.state_changes(),
            seed,
        }
    }
}

/// One run per goal plus the all-active and all-capacity-off references, in
/// parallel. Goal rows come first, sorted by goal. `seed_for` maps the goal
/// index to the traffic seed of that run (the references use index 0).
pub fn sweep_outage_goals(
    scenario: &Scenario,
    config: &SimConfig,
    goals: &[f64],
    seed_for: impl Fn(usize) -> u64 + Sync,
) -> Result<Vec<SweepRow>, EngineError> {
    if goals.is_empty() {
        return Err(EngineError::Config(vec!["sweep needs at least one goal".into()]));
    }
    let mut sorted = goals.to_vec();
    sorted.sort_by(f64::total_cmp);

    let mut jobs: Vec<(SweepRowKind, Option<f64>, SimConfig, u64)> = sorted
        .iter()
        .enumerate()
        .map(|(i, &g)| (SweepRowKind::Goal, Some(g), SimConfig { target_outage_pct: g, ..config.clone() }, seed_for(i)))
        .collect();
    let reference = SimConfig { xapp_enabled: false, rapp_enabled: false, ..config.clone() };
    jobs.push((SweepRowKind::AllActive, None, reference.clone(), seed_for(0)));
    jobs.push((SweepRowKind::AllCapacityOff, None, SimConfig { initial_capacity_off: true, ..reference }, seed_for(0)));

    jobs.into_par_iter()
        .map(|(kind, goal, cfg, seed)| run(scenario, &cfg, seed).map(|r| SweepRow::of(kind, goal, seed, &r)))
        .collect()
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut r = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for k in i..=j {
            r[idx[k]] = avg;
        }
        i = j + 1;
    }
    r
}

/// Spearman rank correlation with average ranks for ties. `NaN` when either
/// input is constant.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}
