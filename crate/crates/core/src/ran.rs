//! E2-node emulation: user attachment, per-cell scheduling and load, cell
//! on/off command execution, measurement reporting and power consumption.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::radio::LinkModel;
use crate::ricbus::{
    BusError, Destination, Endpoint, Interface, Kind, Message, Payload, PmReport, RicBus, UeReport, RAN_MAILBOX,
};
use crate::scenario::{CellDef, Layer, Scenario};
use crate::traffic::{Ue, UeId};
use crate::units::dbm_to_watts;

/// Base-station power model: sleep power when off, otherwise a static part
/// plus a load-proportional part scaled by the maximum transmit power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerParams {
    pub p0_w: f64,
    pub delta_p: f64,
    pub p_tx_max_w: f64,
    pub p_sleep_w: f64,
}

impl PowerParams {
    /// Defaults: 500 W static / 50 W sleep for coverage cells and mid-band
    /// capacity cells, 100 W / 10 W for capacity cells above 3 GHz; slope 4;
    /// maximum transmit power from the cell's `tx_power_dbm`.
    pub fn default_for(cell: &CellDef) -> PowerParams {
        let small = cell.layer == Layer::Capacity && cell.carrier_hz > 3e9;
        PowerParams {
            p0_w: if small { 100.0 } else { 500.0 },
            delta_p: 4.0,
            p_tx_max_w: dbm_to_watts(cell.tx_power_dbm),
            p_sleep_w: if small { 10.0 } else { 50.0 },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellStatus {
    Active,
    PendingOff,
    Off,
}

impl CellStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            CellStatus::Active => "active",
            CellStatus::PendingOff => "pending_off",
            CellStatus::Off => "off",
        }
    }

    /// Active and pending-off cells radiate and serve users.
    pub fn transmitting(self) -> bool {
        self != CellStatus::Off
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateChange {
    pub t_s: f64,
    pub from: CellStatus,
    pub to: CellStatus,
    /// Switch-off completed by the drain timeout rather than by traffic
    /// steering emptying the cell.
    pub forced: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellState {
    pub cell: usize,
    pub layer: Layer,
    pub status: CellStatus,
    pub load: f64,
    pub blocked_until_s: f64,
    pub state_change_log: Vec<StateChange>,
}

impl CellState {
    pub fn new(cell: usize, layer: Layer) -> CellState {
        CellState {
            cell,
            layer,
            status: CellStatus::Active,
            load: 0.0,
            blocked_until_s: f64::NEG_INFINITY,
            state_change_log: Vec::new(),
        }
    }

    fn transition(&mut self, t_s: f64, to: CellStatus, forced: bool) {
        debug_assert!(self.layer == Layer::Capacity, "coverage cells never change state");
        self.state_change_log.push(StateChange { t_s, from: self.status, to, forced });
        self.status = to;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "command", content = "cell", rename_all = "snake_case")]
pub enum CellCommand {
    CellOff(usize),
    CellOn(usize),
}

impl CellCommand {
    pub fn cell(self) -> usize {
        match self {
            CellCommand::CellOff(c) | CellCommand::CellOn(c) => c,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CommandError {
    #[error("cell {0} does not exist")]
    UnknownCell(usize),
    #[error("cell {0} belongs to the coverage layer and cannot be switched off")]
    CoverageCell(usize),
    #[error("cell {cell} is {status:?}; switch-off needs an active cell")]
    NotActive { cell: usize, status: CellStatus },
    #[error("cell {cell} is {status:?}; switch-on needs an off cell")]
    NotOff { cell: usize, status: CellStatus },
    #[error("cell {cell} is blocked until t = {until_s} s")]
    Blocked { cell: usize, until_s: f64 },
    #[error(transparent)]
    Bus(#[from] BusError),
}

/// Outcome of scheduling one cell for one interval.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScheduleResult {
    pub achieved_bps: Vec<f64>,
    pub prbs: Vec<f64>,
    pub load: f64,
    pub outage: Vec<bool>,
}

/// Demand-proportional PRB split. `ues` holds `(demand_bps, rate_per_prb_bps)`.
///
/// Each user needs `demand / rate` PRBs. If the cell has enough PRBs everyone
/// is served in full; otherwise PRBs are shared in proportion to need. Users
/// below the SINR floor (rate 0) get nothing and do not count towards load.
/// Load is the offered PRB demand over capacity, clipped to 1.
pub fn schedule_cell(n_prb: u32, ues: &[(f64, f64)]) -> ScheduleResult {
    let capacity = n_prb as f64;
    let need: Vec<f64> = ues.iter().map(|&(d, r)| if r > 0.0 { d / r } else { 0.0 }).collect();
    let total: f64 = need.iter().sum();
    let congested = total > capacity;
    let mut res = ScheduleResult {
        achieved_bps: Vec::with_capacity(ues.len()),
        prbs: Vec::with_capacity(ues.len()),
        load: (total / capacity).min(1.0),
        outage: Vec::with_capacity(ues.len()),
    };
    for (&(demand, rate), &n) in ues.iter().zip(&need) {
        if rate <= 0.0 {
            res.achieved_bps.push(0.0);
            res.prbs.push(0.0);
            res.outage.push(true);
        } else if congested {
            let share = capacity * n / total;
            let achieved = share * rate;
            res.achieved_bps.push(achieved);
            res.prbs.push(share);
            res.outage.push(achieved < demand);
        } else {
            res.achieved_bps.push(demand);
            res.prbs.push(n);
            res.outage.push(false);
        }
    }
    res
}

pub fn cell_power(status: CellStatus, load: f64, params: &PowerParams) -> f64 {
    match status {
        CellStatus::Off => params.p_sleep_w,
        CellStatus::Active | CellStatus::PendingOff => params.p0_w + params.delta_p * load * params.p_tx_max_w,
    }
}

/// Best active (not pending-off) cell by ranking value (per-PRB RSRP plus
/// offset); ties go to the lowest cell index.
pub fn associate(rsrp_dbm: &[f64], cells: &[CellState]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (c, state) in cells.iter().enumerate() {
        if state.status != CellStatus::Active {
            continue;
        }
        if best.is_none_or(|(_, r)| rsrp_dbm[c] > r) {
            best = Some((c, rsrp_dbm[c]));
        }
    }
    best.map(|(c, _)| c)
}

/// A user attached to the RAN together with its current link budget.
#[derive(Debug, Clone)]
pub struct AttachedUe {
    pub ue: Ue,
    /// Wideband received power of every cell, dBm.
    pub rx_dbm: Vec<f64>,
    /// Per-PRB RSRP of every cell, dBm.
    pub rsrp_dbm: Vec<f64>,
    pub in_deficit: bool,
}

#[derive(Debug, Clone, Default)]
struct PmAccumulator {
    period_start_s: f64,
    load_sum: f64,
    ticks: u64,
    ue_seconds: f64,
    deficit_ue_seconds: f64,
    ues_seen: BTreeSet<UeId>,
    ues_in_deficit: BTreeSet<UeId>,
    changes: Vec<(f64, CellStatus)>,
}

/// Aggregate results of one scheduling tick.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TickStats {
    pub n_ues: usize,
    pub deficit_ues: usize,
    pub offered_bps: f64,
    pub served_bps: f64,
}

/// Notable RAN events, returned for logging and tests.
#[derive(Debug, Clone, PartialEq)]
pub enum RanEvent {
    PendingOff { cell: usize, ues: usize },
    SwitchedOff { cell: usize, forced: bool },
    SwitchedOn { cell: usize },
    HandedOver { ue: UeId, from: usize, to: usize },
    HandoverRejected { ue: UeId, to: usize },
}

#[derive(Debug, Clone)]
pub struct Ran {
    pub cells: Vec<CellState>,
    n_prb: Vec<u32>,
    prb_bw_hz: Vec<f64>,
    power: Vec<PowerParams>,
    cio_db: Vec<f64>,
    cell_node: Vec<u32>,
    n_nodes: u32,
    ues: Vec<AttachedUe>,
    pending_since: Vec<f64>,
    pm: Vec<PmAccumulator>,
    t_block_s: f64,
    drain_timeout_s: f64,
    forced_offs: u64,
}

impl Ran {
    pub fn new(scenario: &Scenario, t_block_s: f64, drain_timeout_s: f64) -> Ran {
        let cells = scenario.cells.iter().enumerate().map(|(i, c)| CellState::new(i, c.layer)).collect();
        let n = scenario.cells.len();
        Ran {
            cells,
            n_prb: scenario.cells.iter().map(|c| c.n_prb).collect(),
            prb_bw_hz: scenario.cells.iter().map(|c| c.prb_bandwidth_hz()).collect(),
            power: scenario.cells.iter().map(|c| c.power_params()).collect(),
            cio_db: scenario.cells.iter().map(|c| c.cio_db).collect(),
            cell_node: scenario.cell_sites().into_iter().map(|s| s as u32).collect(),
            n_nodes: scenario.sites.len() as u32,
            ues: Vec::new(),
            pending_since: vec![f64::NAN; n],
            pm: vec![PmAccumulator::default(); n],
            t_block_s,
            drain_timeout_s,
            forced_offs: 0,
        }
    }

    pub fn n_nodes(&self) -> u32 {
        self.n_nodes
    }

    pub fn node_of(&self, cell: usize) -> Endpoint {
        Endpoint::E2Node(self.cell_node[cell])
    }

    pub fn ues(&self) -> &[AttachedUe] {
        &self.ues
    }

    pub fn power_params(&self, cell: usize) -> &PowerParams {
        &self.power[cell]
    }

    pub fn forced_offs(&self) -> u64 {
        self.forced_offs
    }

    pub fn served_by(&self, cell: usize) -> usize {
        self.ues.iter().filter(|u| u.ue.serving_cell == Some(cell)).count()
    }

    pub fn statuses(&self) -> Vec<CellStatus> {
        self.cells.iter().map(|c| c.status).collect()
    }

    fn transmitting(&self) -> Vec<bool> {
        self.cells.iter().map(|c| c.status.transmitting()).collect()
    }

    /// Switches every capacity cell off without any messaging (used for the
    /// all-capacity-off reference configuration).
    pub fn force_capacity_off(&mut self) {
        for c in &mut self.cells {
            if c.layer == Layer::Capacity {
                c.status = CellStatus::Off;
            }
        }
    }

    /// Publishes one E2 setup per node.
    pub fn e2_setup(&self, t_s: f64, bus: &mut RicBus) -> Result<(), BusError> {
        for node in 0..self.n_nodes {
            let cells = (0..self.cells.len()).filter(|&c| self.cell_node[c] == node).collect();
            bus.publish(Message {
                interface: Interface::E2,
                kind: Kind::Setup,
                t_s,
                source: Endpoint::E2Node(node),
                destination: Destination::Subscribers,
                payload: Payload::E2Setup { cells },
            })?;
        }
        Ok(())
    }

    /// Removes users whose session ended by `t_s`.
    pub fn depart(&mut self, t_s: f64) -> usize {
        let before = self.ues.len();
        self.ues.retain(|u| u.ue.departs_at_s > t_s);
        before - self.ues.len()
    }

    /// Attaches new users to their best active cell.
    pub fn admit(&mut self, new: Vec<Ue>, model: &LinkModel) {
        let start = self.ues.len();
        self.ues.extend(new.into_iter().map(|ue| AttachedUe { ue, rx_dbm: Vec::new(), rsrp_dbm: Vec::new(), in_deficit: false }));
        let cells = &self.cells;
        let cio = &self.cio_db;
        let mut rank = Vec::new();
        for u in &mut self.ues[start..] {
            refresh_links(u, model);
            ranking(&u.rsrp_dbm, cio, &mut rank);
            u.ue.serving_cell = Some(associate(&rank, cells).expect("coverage layer is always active"));
        }
    }

    pub fn ues_mut(&mut self) -> impl Iterator<Item = &mut Ue> {
        self.ues.iter_mut().map(|u| &mut u.ue)
    }

    /// Recomputes every user's link budget after mobility.
    pub fn refresh_links(&mut self, model: &LinkModel) {
        for u in &mut self.ues {
            refresh_links(u, model);
        }
    }

    /// Schedules every transmitting cell, updates loads, per-user throughput
    /// and the per-cell performance accumulators.
    pub fn schedule(&mut self, model: &LinkModel) -> TickStats {
        let transmitting = self.transmitting();
        let n_cells = self.cells.len();
        let rates: Vec<f64> = self
            .ues
            .iter()
            .map(|u| {
                let serving = u.ue.serving_cell.expect("attached user has a serving cell");
                let link = model.link(&u.rx_dbm, serving, &transmitting);
                link.se_bps_hz * self.prb_bw_hz[serving]
            })
            .collect();

        let mut members: Vec<Vec<usize>> = vec![Vec::new(); n_cells];
        for (i, u) in self.ues.iter().enumerate() {
            members[u.ue.serving_cell.unwrap()].push(i);
        }
        let mut stats = TickStats { n_ues: self.ues.len(), ..Default::default() };
        for (c, idx) in members.iter().enumerate() {
            if !transmitting[c] {
                debug_assert!(idx.is_empty(), "off cell {c} has users");
                self.cells[c].load = 0.0;
                continue;
            }
            let input: Vec<(f64, f64)> = idx.iter().map(|&i| (self.ues[i].ue.demand_bps, rates[i])).collect();
            let res = schedule_cell(self.n_prb[c], &input);
            self.cells[c].load = res.load;
            let acc = &mut self.pm[c];
            acc.load_sum += res.load;
            acc.ticks += 1;
            for (k, &i) in idx.iter().enumerate() {
                let u = &mut self.ues[i];
                u.ue.achieved_bps = res.achieved_bps[k];
                u.in_deficit = res.outage[k];
                stats.offered_bps += u.ue.demand_bps;
                stats.served_bps += res.achieved_bps[k];
                acc.ue_seconds += 1.0;
                acc.ues_seen.insert(u.ue.id);
                if res.outage[k] {
                    stats.deficit_ues += 1;
                    acc.deficit_ue_seconds += 1.0;
                    acc.ues_in_deficit.insert(u.ue.id);
                }
            }
        }
        stats
    }

    pub fn network_power_w(&self) -> f64 {
        self.cells.iter().zip(&self.power).map(|(c, p)| cell_power(c.status, c.load, p)).sum()
    }

    /// Executes a cell command issued at `t_s`.
    ///
    /// Switch-off moves the cell to pending-off and asks traffic steering to
    /// empty it; the cell goes off once it serves nobody (immediately if it
    /// is already empty). Switch-on takes effect at once. Completed changes
    /// are confirmed to both xApps.
    pub fn apply_cell_command(&mut self, cmd: CellCommand, t_s: f64, bus: &mut RicBus) -> Result<Vec<RanEvent>, CommandError> {
        let cell = cmd.cell();
        let state = self.cells.get(cell).ok_or(CommandError::UnknownCell(cell))?;
        if state.blocked_until_s > t_s {
            return Err(CommandError::Blocked { cell, until_s: state.blocked_until_s });
        }
        let mut events = Vec::new();
        match cmd {
            CellCommand::CellOff(_) => {
                if state.layer == Layer::Coverage {
                    return Err(CommandError::CoverageCell(cell));
                }
                if state.status != CellStatus::Active {
                    return Err(CommandError::NotActive { cell, status: state.status });
                }
                self.cells[cell].transition(t_s, CellStatus::PendingOff, false);
                self.pending_since[cell] = t_s;
                events.push(RanEvent::PendingOff { cell, ues: self.served_by(cell) });
                self.publish_ack(t_s, cell, Endpoint::TsXapp, Payload::CleanupRequest { cell }, bus)?;
                if self.served_by(cell) == 0 {
                    events.push(self.complete_off(cell, t_s, false, bus)?);
                }
            }
            CellCommand::CellOn(_) => {
                if state.status != CellStatus::Off {
                    return Err(CommandError::NotOff { cell, status: state.status });
                }
                self.cells[cell].transition(t_s, CellStatus::Active, false);
                self.cells[cell].blocked_until_s = t_s + self.t_block_s;
                self.pm[cell].changes.push((t_s, CellStatus::Active));
                self.confirm(cell, t_s, CellStatus::Active, false, bus)?;
                events.push(RanEvent::SwitchedOn { cell });
            }
        }
        Ok(events)
    }

    fn complete_off(&mut self, cell: usize, t_s: f64, forced: bool, bus: &mut RicBus) -> Result<RanEvent, CommandError> {
        self.cells[cell].transition(t_s, CellStatus::Off, forced);
        self.cells[cell].load = 0.0;
        self.cells[cell].blocked_until_s = t_s + self.t_block_s;
        self.pending_since[cell] = f64::NAN;
        self.pm[cell].changes.push((t_s, CellStatus::Off));
        if forced {
            self.forced_offs += 1;
        }
        self.confirm(cell, t_s, CellStatus::Off, forced, bus)?;
        Ok(RanEvent::SwitchedOff { cell, forced })
    }

    fn confirm(&self, cell: usize, t_s: f64, status: CellStatus, forced: bool, bus: &mut RicBus) -> Result<(), BusError> {
        for to in [Endpoint::CoosXapp, Endpoint::TsXapp] {
            self.publish_ack(t_s, cell, to, Payload::CellStatusChanged { cell, status, forced }, bus)?;
        }
        Ok(())
    }

    fn publish_ack(&self, t_s: f64, cell: usize, to: Endpoint, payload: Payload, bus: &mut RicBus) -> Result<(), BusError> {
        bus.publish(Message {
            interface: Interface::E2,
            kind: Kind::ControlAck,
            t_s,
            source: self.node_of(cell),
            destination: Destination::To(to),
            payload,
        })?;
        Ok(())
    }

    /// Processes every control request waiting in the RAN mailbox.
    pub fn process_inbox(&mut self, t_s: f64, bus: &mut RicBus) -> Result<Vec<RanEvent>, CommandError> {
        let mut events = Vec::new();
        for msg in bus.drain(RAN_MAILBOX, t_s) {
            match msg.payload {
                Payload::CellCommand(cmd) => events.extend(self.apply_cell_command(cmd, t_s, bus)?),
                Payload::Handover { ue, from, to } => events.push(self.handover(ue, from, to, t_s, bus)?),
                Payload::Subscribe(topic) => {
                    bus.publish(Message {
                        interface: Interface::E2,
                        kind: Kind::SubscriptionResp,
                        t_s,
                        source: msg.destination_node(),
                        destination: Destination::To(msg.source),
                        payload: Payload::SubscribeResp(topic),
                    })?;
                }
                _ => {}
            }
        }
        Ok(events)
    }

    fn handover(&mut self, ue: UeId, from: usize, to: usize, t_s: f64, bus: &mut RicBus) -> Result<RanEvent, BusError> {
        let target_ok = self.cells.get(to).is_some_and(|c| c.status == CellStatus::Active);
        let slot = self.ues.binary_search_by_key(&ue, |u| u.ue.id).ok();
        let accepted = target_ok && slot.is_some_and(|i| self.ues[i].ue.serving_cell == Some(from));
        if accepted {
            self.ues[slot.unwrap()].ue.serving_cell = Some(to);
        }
        let node = self.node_of(from.min(self.cells.len() - 1));
        bus.publish(Message {
            interface: Interface::E2,
            kind: Kind::ControlAck,
            t_s,
            source: node,
            destination: Destination::To(Endpoint::TsXapp),
            payload: Payload::HandoverAck { ue, to, accepted },
        })?;
        Ok(if accepted { RanEvent::HandedOver { ue, from, to } } else { RanEvent::HandoverRejected { ue, to } })
    }

    /// Completes switch-offs of drained pending cells. Cells still serving
    /// users after the drain timeout have them moved by the RAN itself and
    /// are switched off as a forced clean-up.
    pub fn settle_pending(&mut self, t_s: f64, bus: &mut RicBus) -> Result<Vec<RanEvent>, CommandError> {
        let mut events = Vec::new();
        for cell in 0..self.cells.len() {
            if self.cells[cell].status != CellStatus::PendingOff {
                continue;
            }
            if self.served_by(cell) == 0 {
                events.push(self.complete_off(cell, t_s, false, bus)?);
            } else if t_s - self.pending_since[cell] >= self.drain_timeout_s {
                let mut rank = Vec::new();
                for i in 0..self.ues.len() {
                    if self.ues[i].ue.serving_cell == Some(cell) {
                        ranking(&self.ues[i].rsrp_dbm, &self.cio_db, &mut rank);
                        let to = associate(&rank, &self.cells).expect("coverage layer is always active");
                        events.push(RanEvent::HandedOver { ue: self.ues[i].ue.id, from: cell, to });
                        self.ues[i].ue.serving_cell = Some(to);
                    }
                }
                events.push(self.complete_off(cell, t_s, true, bus)?);
            }
        }
        Ok(events)
    }

    /// One measurement report per attached user, and (on `report_cells`) one
    /// load indication per transmitting cell. Returns the number published.
    pub fn emit_kpm_reports(&self, t_s: f64, report_cells: bool, bus: &mut RicBus) -> Result<u64, BusError> {
        let mut n = 0;
        if report_cells {
            for (c, state) in self.cells.iter().enumerate() {
                if !state.status.transmitting() {
                    continue;
                }
                bus.publish(Message {
                    interface: Interface::E2,
                    kind: Kind::Indication,
                    t_s,
                    source: self.node_of(c),
                    destination: Destination::Subscribers,
                    payload: Payload::CellLoad { cell: c, load: state.load },
                })?;
                n += 1;
            }
        }
        for u in &self.ues {
            let serving = u.ue.serving_cell.expect("attached");
            let rsrp = (0..self.cells.len())
                .filter(|&c| self.cells[c].status.transmitting())
                .map(|c| (c, u.rsrp_dbm[c]))
                .collect();
            bus.publish(Message {
                interface: Interface::E2,
                kind: Kind::Indication,
                t_s,
                source: self.node_of(serving),
                destination: Destination::Subscribers,
                payload: Payload::UeReport(UeReport { ue: u.ue.id, serving, rsrp }),
            })?;
            n += 1;
        }
        Ok(n)
    }

    /// Publishes one O1 performance report per cell covering the period
    /// since the previous call, then resets the accumulators.
    pub fn emit_pm_reports(&mut self, t_s: f64, bus: &mut RicBus) -> Result<u64, BusError> {
        for c in 0..self.cells.len() {
            let acc = std::mem::take(&mut self.pm[c]);
            self.pm[c].period_start_s = t_s;
            let report = PmReport {
                cell: c,
                period_start_s: acc.period_start_s,
                period_end_s: t_s,
                status: self.cells[c].status,
                mean_load: if acc.ticks > 0 { acc.load_sum / acc.ticks as f64 } else { 0.0 },
                ue_seconds: acc.ue_seconds,
                deficit_ue_seconds: acc.deficit_ue_seconds,
                ues_seen: acc.ues_seen.len() as u64,
                ues_in_deficit: acc.ues_in_deficit.len() as u64,
                state_changes: acc.changes,
            };
            bus.publish(Message {
                interface: Interface::O1,
                kind: Kind::PmReport,
                t_s,
                source: self.node_of(c),
                destination: Destination::To(Endpoint::CoosRapp),
                payload: Payload::PmReport(report),
            })?;
        }
        Ok(self.cells.len() as u64)
    }

    /// Checks that every user is served by a transmitting cell.
    pub fn check_attachment(&self) -> Result<(), String> {
        for u in &self.ues {
            match u.ue.serving_cell {
                Some(c) if self.cells[c].status.transmitting() => {}
                Some(c) => return Err(format!("user {} served by off cell {c}", u.ue.id)),
                None => return Err(format!("user {} is not attached", u.ue.id)),
            }
        }
        Ok(())
    }
}

/// RSRP plus cell individual offset: the quantity cells are ranked by.
fn ranking(rsrp_dbm: &[f64], cio_db: &[f64], out: &mut Vec<f64>) {
    out.clear();
    out.extend(rsrp_dbm.iter().zip(cio_db).map(|(r, o)| r + o));
}

fn refresh_links(u: &mut AttachedUe, model: &LinkModel) {
    model.rx_powers(u.ue.pos, &mut u.rx_dbm);
    u.rsrp_dbm.clear();
    u.rsrp_dbm.extend(u.rx_dbm.iter().enumerate().map(|(c, &p)| model.per_prb(c, p)));
}

impl Message {
    fn destination_node(&self) -> Endpoint {
        match self.destination {
            Destination::To(e) => e,
            Destination::Subscribers => RAN_MAILBOX,
        }
    }
}
