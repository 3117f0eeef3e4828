//! The controller applications: the COOS xApp (local cell on/off decisions),
//! the COOS rApp (threshold adaptation) and the traffic-steering xApp
//! (handovers and cell clean-up).
//!
//! Each app is a state machine fed by [`crate::ricbus`] messages. The pure
//! decision rules are free functions so they can be tested against
//! brute-force oracles.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::ran::{CellCommand, CellState, CellStatus, StateChange};
use crate::ricbus::{PmReport, UeReport};
use crate::scenario::{Layer, NeighborMap};
use crate::traffic::UeId;

/// rApp to xApp policy. All values are percentages.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoosPolicy {
    pub alpha_off: f64,
    pub alpha_on: f64,
    pub target_outage_lo: f64,
    pub target_outage_hi: f64,
}

impl CoosPolicy {
    /// Thresholds that forbid every switch (`alpha_off = 0`, `alpha_on = 100`)
    /// and the target band `target ± tolerance`.
    pub fn initial(target: f64, tolerance: f64) -> CoosPolicy {
        CoosPolicy {
            alpha_off: 0.0,
            alpha_on: 100.0,
            target_outage_lo: target - tolerance,
            target_outage_hi: target + tolerance,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RappConfig {
    pub step_off: f64,
    pub step_on: f64,
    pub alpha_off_max: f64,
    pub alpha_on_min: f64,
}

impl Default for RappConfig {
    fn default() -> Self {
        RappConfig { step_off: 5.0, step_on: 5.0, alpha_off_max: 50.0, alpha_on_min: 20.0 }
    }
}

impl RappConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.step_off > 0.0 && self.step_on > 0.0) {
            return Err("rApp step sizes must be positive".into());
        }
        if !(0.0..=100.0).contains(&self.alpha_off_max) || !(0.0..=100.0).contains(&self.alpha_on_min) {
            return Err("alpha_off_max and alpha_on_min must lie in [0, 100]".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RappState {
    pub policy: CoosPolicy,
    pub config: RappConfig,
    pub last_case: Option<u8>,
}

impl RappState {
    pub fn new(policy: CoosPolicy, config: RappConfig) -> RappState {
        RappState { policy, config, last_case: None }
    }
}

/// First matching rule of the five-case threshold adaptation:
///
/// 1. outage above the band and ping-pong: lower `alpha_off`
/// 2. outage above the band and some cells off: lower `alpha_on`
/// 3. outage below the band and ping-pong: raise `alpha_on`
/// 4. outage below the band and some capacity cells active: raise `alpha_off`
/// 5. otherwise keep both
pub fn rapp_case(beta_sys: f64, policy: &CoosPolicy, pp: bool, n_off: usize, n_active_capacity: usize) -> u8 {
    let above = beta_sys > policy.target_outage_hi;
    let below = beta_sys < policy.target_outage_lo;
    if above && pp {
        1
    } else if above && n_off > 0 {
        2
    } else if below && pp {
        3
    } else if below && n_active_capacity > 0 {
        4
    } else {
        5
    }
}

/// Applies the selected case with clamping. Returns the new policy only if a
/// threshold actually changed.
pub fn rapp_update(state: &mut RappState, beta_sys: f64, pp: bool, n_off: usize, n_active_capacity: usize) -> Option<CoosPolicy> {
    let case = rapp_case(beta_sys, &state.policy, pp, n_off, n_active_capacity);
    state.last_case = Some(case);
    let cfg = state.config;
    let old = state.policy;
    let p = &mut state.policy;
    match case {
        1 => p.alpha_off = (p.alpha_off - cfg.step_off).max(0.0),
        2 => p.alpha_on = (p.alpha_on - cfg.step_on).max(cfg.alpha_on_min),
        3 => p.alpha_on = (p.alpha_on + cfg.step_on).min(100.0),
        4 => p.alpha_off = (p.alpha_off + cfg.step_off).min(cfg.alpha_off_max),
        _ => {}
    }
    (*p != old).then_some(*p)
}

/// 1 iff some cell has at least two state changes in `(t_s - w_pp_s, t_s]`.
/// `events` is `(t_s, cell)` for every completed state change.
pub fn detect_ping_pong(events: &[(f64, usize)], t_s: f64, w_pp_s: f64) -> bool {
    let mut seen = BTreeMap::new();
    for &(t, cell) in events {
        if t > t_s - w_pp_s && t <= t_s {
            let n = seen.entry(cell).or_insert(0u32);
            *n += 1;
            if *n >= 2 {
                return true;
            }
        }
    }
    false
}

/// Per-cell block expiry times.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BlockList {
    until: Vec<f64>,
}

impl BlockList {
    pub fn new(n_cells: usize) -> BlockList {
        BlockList { until: vec![f64::NEG_INFINITY; n_cells] }
    }

    pub fn is_blocked(&self, cell: usize, t_s: f64) -> bool {
        self.until[cell] > t_s
    }

    pub fn blocked_until(&self, cell: usize) -> f64 {
        self.until[cell]
    }

    /// Blocks `cell` and its neighbors until `until_s` (never shortens).
    pub fn block_with_neighbors(&mut self, cell: usize, neighbors: &NeighborMap, until_s: f64) {
        for &c in std::iter::once(&cell).chain(neighbors.neighbors(cell)) {
            self.until[c] = self.until[c].max(until_s);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XappParams {
    pub t_block_s: f64,
    pub max_commands: usize,
}

impl Default for XappParams {
    fn default() -> Self {
        XappParams { t_block_s: 600.0, max_commands: 5 }
    }
}

/// Mean load over the active neighbors of `cell`, or `None` without any.
pub fn active_neighbor_load(cell: usize, cells: &[CellState], neighbors: &NeighborMap) -> Option<f64> {
    let loads: Vec<f64> =
        neighbors.neighbors(cell).iter().filter(|&&n| cells[n].status == CellStatus::Active).map(|&n| cells[n].load).collect();
    (!loads.is_empty()).then(|| loads.iter().sum::<f64>() / loads.len() as f64)
}

/// One COOS xApp decision round.
///
/// Switch-on candidates (off cells whose active neighbors' mean load exceeds
/// `alpha_on`) are served first, highest neighbor load first; then switch-off
/// candidates (active capacity cells with load below `alpha_off`), lowest
/// load first. Every command blocks the cell and its neighbors, which also
/// excludes them from the rest of this round.
pub fn xapp_decide(
    t_s: f64,
    cells: &[CellState],
    neighbors: &NeighborMap,
    policy: &CoosPolicy,
    blocks: &mut BlockList,
    params: &XappParams,
) -> Vec<CellCommand> {
    let mut on: Vec<(usize, f64)> = cells
        .iter()
        .filter(|c| c.status == CellStatus::Off && !blocks.is_blocked(c.cell, t_s))
        .filter_map(|c| active_neighbor_load(c.cell, cells, neighbors).map(|m| (c.cell, m)))
        .filter(|&(_, m)| m > policy.alpha_on / 100.0)
        .collect();
    on.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));

    let mut off: Vec<(usize, f64)> = cells
        .iter()
        .filter(|c| c.layer == Layer::Capacity && c.status == CellStatus::Active && !blocks.is_blocked(c.cell, t_s))
        .filter(|c| c.load < policy.alpha_off / 100.0)
        .map(|c| (c.cell, c.load))
        .collect();
    off.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));

    let candidates = on.into_iter().map(|(c, _)| CellCommand::CellOn(c)).chain(off.into_iter().map(|(c, _)| CellCommand::CellOff(c)));
    let mut out = Vec::new();
    for cmd in candidates {
        if out.len() >= params.max_commands {
            break;
        }
        if blocks.is_blocked(cmd.cell(), t_s) {
            continue;
        }
        blocks.block_with_neighbors(cmd.cell(), neighbors, t_s + params.t_block_s);
        out.push(cmd);
    }
    out
}

/// The COOS xApp: a view of cell status and load built from E2 messages.
#[derive(Debug, Clone)]
pub struct CoosXapp {
    pub view: Vec<CellState>,
    pub policy: CoosPolicy,
    pub blocks: BlockList,
    pub params: XappParams,
    load_sum: Vec<f64>,
    load_n: Vec<u32>,
}

impl CoosXapp {
    pub fn new(layers: &[Layer], policy: CoosPolicy, params: XappParams) -> CoosXapp {
        let n = layers.len();
        CoosXapp {
            view: layers.iter().enumerate().map(|(i, &l)| CellState::new(i, l)).collect(),
            policy,
            blocks: BlockList::new(n),
            params,
            load_sum: vec![0.0; n],
            load_n: vec![0; n],
        }
    }

    pub fn on_load(&mut self, cell: usize, load: f64) {
        self.load_sum[cell] += load;
        self.load_n[cell] += 1;
    }

    /// A completed state change: updates the view and refreshes the block so
    /// the next change of this cell is at least `t_block_s` away.
    pub fn on_status(&mut self, cell: usize, status: CellStatus, t_s: f64, neighbors: &NeighborMap) {
        let v = &mut self.view[cell];
        v.state_change_log.push(StateChange { t_s, from: v.status, to: status, forced: false });
        v.status = status;
        if status == CellStatus::Off {
            v.load = 0.0;
        }
        self.blocks.block_with_neighbors(cell, neighbors, t_s + self.params.t_block_s);
    }

    pub fn decide(&mut self, t_s: f64, neighbors: &NeighborMap) -> Vec<CellCommand> {
        for c in 0..self.view.len() {
            if self.load_n[c] > 0 {
                self.view[c].load = self.load_sum[c] / self.load_n[c] as f64;
            }
            self.load_sum[c] = 0.0;
            self.load_n[c] = 0;
        }
        let cmds = xapp_decide(t_s, &self.view, neighbors, &self.policy, &mut self.blocks, &self.params);
        for cmd in &cmds {
            if let CellCommand::CellOff(c) = *cmd {
                self.view[c].status = CellStatus::PendingOff;
            }
        }
        cmds
    }
}

/// What the rApp saw over one evaluation window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RappObservation {
    pub beta_sys: f64,
    pub pp: bool,
    pub n_off: usize,
    pub n_active_capacity: usize,
    /// No user-seconds were reported in the window; `beta_sys` is 0.
    pub empty_window: bool,
}

/// The COOS rApp: aggregates O1 performance reports and adapts thresholds.
#[derive(Debug, Clone)]
pub struct CoosRapp {
    pub state: RappState,
    layers: Vec<Layer>,
    status: Vec<CellStatus>,
    ue_seconds: f64,
    deficit_ue_seconds: f64,
    events: Vec<(f64, usize)>,
    w_pp_s: f64,
}

impl CoosRapp {
    pub fn new(layers: &[Layer], state: RappState, w_pp_s: f64) -> CoosRapp {
        CoosRapp {
            state,
            layers: layers.to_vec(),
            status: vec![CellStatus::Active; layers.len()],
            ue_seconds: 0.0,
            deficit_ue_seconds: 0.0,
            events: Vec::new(),
            w_pp_s,
        }
    }

    /// Sets a cell's known status without a report (initial conditions).
    pub fn assume_status(&mut self, cell: usize, status: CellStatus) {
        self.status[cell] = status;
    }

    pub fn on_report(&mut self, r: &PmReport) {
        self.status[r.cell] = r.status;
        self.ue_seconds += r.ue_seconds;
        self.deficit_ue_seconds += r.deficit_ue_seconds;
        self.events.extend(r.state_changes.iter().map(|&(t, _)| (t, r.cell)));
    }

    pub fn observe(&self, t_s: f64) -> RappObservation {
        let empty = self.ue_seconds <= 0.0;
        let n_off = self.status.iter().filter(|&&s| s == CellStatus::Off).count();
        let n_active_capacity = self
            .status
            .iter()
            .zip(&self.layers)
            .filter(|&(&s, &l)| l == Layer::Capacity && s == CellStatus::Active)
            .count();
        RappObservation {
            beta_sys: if empty { 0.0 } else { 100.0 * self.deficit_ue_seconds / self.ue_seconds },
            pp: detect_ping_pong(&self.events, t_s, self.w_pp_s),
            n_off,
            n_active_capacity,
            empty_window: empty,
        }
    }

    /// Closes the current window; returns the observation and the policy to
    /// publish, if it changed.
    pub fn evaluate(&mut self, t_s: f64) -> (RappObservation, Option<CoosPolicy>) {
        let obs = self.observe(t_s);
        self.ue_seconds = 0.0;
        self.deficit_ue_seconds = 0.0;
        let horizon = t_s - self.w_pp_s;
        self.events.retain(|&(t, _)| t > horizon);
        let policy = rapp_update(&mut self.state, obs.beta_sys, obs.pp, obs.n_off, obs.n_active_capacity);
        (obs, policy)
    }
}

/// A handover decision: `(ue, from, to)`.
pub type HandoverCmd = (UeId, usize, usize);

fn best_target(report: &UeReport, status: &[CellStatus], cio_db: &[f64], exclude: usize) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for &(c, rsrp) in &report.rsrp {
        if c == exclude || status[c] != CellStatus::Active {
            continue;
        }
        let r = rsrp + cio_db[c];
        if best.is_none_or(|(_, b)| r > b) {
            best = Some((c, r));
        }
    }
    best
}

/// Moves every user of a cell pending switch-off to its best active cell.
/// Cells are ranked by RSRP plus their individual offset `cio_db`.
pub fn ts_on_cell_to_be_off(cell: usize, reports: &[&UeReport], status: &[CellStatus], cio_db: &[f64]) -> Vec<HandoverCmd> {
    reports
        .iter()
        .filter(|r| r.serving == cell)
        .filter_map(|r| best_target(r, status, cio_db, cell).map(|(to, _)| (r.ue, cell, to)))
        .collect()
}

/// Hands a user over when its best active alternative beats the serving
/// cell by more than `hysteresis_db` (both including offsets).
pub fn ts_mobility(reports: &[&UeReport], status: &[CellStatus], cio_db: &[f64], hysteresis_db: f64) -> Vec<HandoverCmd> {
    reports
        .iter()
        .filter_map(|r| {
            let serving = r.rsrp.iter().find(|&&(c, _)| c == r.serving).map(|&(c, v)| v + cio_db[c])?;
            let (to, best) = best_target(r, status, cio_db, r.serving)?;
            (best > serving + hysteresis_db).then_some((r.ue, r.serving, to))
        })
        .collect()
}

/// The traffic-steering xApp.
#[derive(Debug, Clone)]
pub struct TsXapp {
    pub hysteresis_db: f64,
    cio_db: Vec<f64>,
    status: Vec<CellStatus>,
    reports: BTreeMap<UeId, UeReport>,
    in_flight: BTreeSet<UeId>,
    cleanup: BTreeSet<usize>,
}

impl TsXapp {
    pub fn new(cio_db: Vec<f64>, hysteresis_db: f64) -> TsXapp {
        TsXapp {
            hysteresis_db,
            status: vec![CellStatus::Active; cio_db.len()],
            cio_db,
            reports: BTreeMap::new(),
            in_flight: BTreeSet::new(),
            cleanup: BTreeSet::new(),
        }
    }

    /// Replaces the previous batch of measurements.
    pub fn begin_batch(&mut self) {
        self.reports.clear();
    }

    pub fn on_report(&mut self, r: UeReport) {
        self.reports.insert(r.ue, r);
    }

    pub fn on_cleanup_request(&mut self, cell: usize) {
        self.status[cell] = CellStatus::PendingOff;
        self.cleanup.insert(cell);
    }

    pub fn on_status(&mut self, cell: usize, status: CellStatus) {
        self.status[cell] = status;
        if status != CellStatus::PendingOff {
            self.cleanup.remove(&cell);
        }
    }

    pub fn on_handover_ack(&mut self, ue: UeId) {
        self.in_flight.remove(&ue);
    }

    /// Handover commands for this batch: clean-up of pending cells first,
    /// then mobility for everyone else.
    pub fn decide(&mut self) -> Vec<HandoverCmd> {
        let idle: Vec<&UeReport> = self.reports.values().filter(|r| !self.in_flight.contains(&r.ue)).collect();
        let mut out = Vec::new();
        for &cell in &self.cleanup {
            out.extend(ts_on_cell_to_be_off(cell, &idle, &self.status, &self.cio_db));
        }
        let moving: Vec<&UeReport> = idle.iter().copied().filter(|r| !self.cleanup.contains(&r.serving)).collect();
        out.extend(ts_mobility(&moving, &self.status, &self.cio_db, self.hysteresis_db));
        for &(ue, _, _) in &out {
            self.in_flight.insert(ue);
        }
        out
    }
}
