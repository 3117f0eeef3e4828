//! Time-stepped driver: traffic, mobility, scheduling, the three apps and the
//! KPI bookkeeping, on a fixed 1 s tick.
//!
//! Tick `t` covers `(t - 1, t]`. Within a tick the order is:
//!
//! 1. RAN executes queued control requests (handovers) and settles
//!    pending-off cells;
//! 2. departures, mobility, arrivals and attachment;
//! 3. scheduling, outage flags and power;
//! 4. E2 measurement reports;
//! 5. O1 performance reports and the rApp;
//! 6. the COOS xApp, whose commands the RAN executes at once;
//! 7. traffic steering, whose handovers the RAN executes next tick.

mod config;
mod sweep;

use std::collections::BTreeSet;

use serde::Serialize;
use sha2::{Digest, Sha256};

pub use config::{OutageWeighting, SimConfig};
pub use sweep::{spearman, sweep_outage_goals, SweepRow, SweepRowKind};

use crate::apps::{CoosPolicy, CoosRapp, CoosXapp, RappState, TsXapp, XappParams};
use crate::radio::{generate_shadow_field, LinkModel};
use crate::ran::{CellCommand, CellStatus, CommandError, Ran, RanEvent};
use crate::ricbus::{
    hex, BusError, Counters, Destination, Endpoint, Interface, Kind, LogSink, Message, Payload, RicBus, Subscription, Topic,
};
use crate::scenario::{build_neighbor_map, Layer, Scenario};
use crate::traffic::{slot_at, TrafficGenerator, UeId};

#[derive(Debug, thiserror::Error)]
pub enum EngineError {
    #[error("invalid run configuration: {}", .0.join("; "))]
    Config(Vec<String>),
    #[error("scenario rejected: {0}")]
    Scenario(#[from] crate::scenario::ScenarioError),
    #[error("t = {t_s} s: {source}")]
    Command { t_s: f64, source: CommandError },
    #[error(transparent)]
    Bus(#[from] BusError),
    #[error("t = {t_s} s: invariant breached: {message}")]
    Invariant { t_s: f64, message: String },
}

/// One user's exposure within a KPI window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UeWindowRecord {
    pub ue_seconds: f64,
    pub deficit_seconds: f64,
}

/// Outage percentage of a window, and whether the window was empty (in which
/// case the percentage is 0).
pub fn compute_outage(records: &[UeWindowRecord], weighting: OutageWeighting) -> (f64, bool) {
    let total: f64 = records.iter().map(|r| r.ue_seconds).sum();
    if records.is_empty() || total <= 0.0 {
        return (0.0, true);
    }
    let pct = match weighting {
        OutageWeighting::UeSeconds => 100.0 * records.iter().map(|r| r.deficit_seconds).sum::<f64>() / total,
        OutageWeighting::PerUe => {
            100.0 * records.iter().filter(|r| r.deficit_seconds > 0.0).count() as f64 / records.len() as f64
        }
    };
    (pct, false)
}

pub use crate::apps::detect_ping_pong;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeseriesRow {
    pub t_s: f64,
    pub beta_sys_pct: f64,
    pub alpha_off: f64,
    pub alpha_on: f64,
    pub n_off: usize,
    /// Mean network power over the sample period.
    pub power_w: f64,
    pub n_ues: usize,
    pub offered_bps: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    CommandOff,
    CommandOn,
    PendingOff,
    Off,
    On,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EventRecord {
    pub t_s: f64,
    pub cell: usize,
    pub cell_id: String,
    pub layer: Layer,
    pub event: EventKind,
    /// Switch-off completed by the drain timeout.
    pub forced: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RappRecord {
    pub t_s: f64,
    pub beta_sys_pct: f64,
    pub pp: bool,
    pub n_off: usize,
    pub n_active_capacity: usize,
    pub case: u8,
    pub policy_sent: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunResult {
    pub horizon_s: f64,
    pub warmup_s: f64,
    pub timeseries: Vec<TimeseriesRow>,
    pub events: Vec<EventRecord>,
    pub rapp_log: Vec<RappRecord>,
    pub policies: Vec<(f64, CoosPolicy)>,
    pub counters: Counters,
    /// Sum over ticks of attached users plus, at the load-report cadence,
    /// transmitting cells.
    pub expected_indications: u64,
    pub cell_commands: u64,
    pub handover_requests: u64,
    pub forced_offs: u64,
    pub log_digest: String,
    pub energy_j: f64,
    /// Over the whole horizon: `energy_j / horizon_s`.
    pub mean_power_w: f64,
    pub mean_power_after_warmup_w: f64,
    pub mean_outage_pct: f64,
    pub mean_off_fraction_after_warmup: f64,
    /// Per-cell mean load over post-warm-up ticks (0 for off ticks).
    pub mean_cell_load_after_warmup: Vec<f64>,
    pub final_status: Vec<CellStatus>,
}

impl RunResult {
    /// SHA-256 of the canonical JSON encoding.
    pub fn digest(&self) -> String {
        let json = serde_json::to_vec(self).expect("run result serializes");
        hex(&Sha256::digest(&json))
    }

    pub fn state_changes(&self) -> usize {
        self.events.iter().filter(|e| matches!(e.event, EventKind::Off | EventKind::On)).count()
    }
}

#[derive(Default)]
struct Window {
    ue_seconds: f64,
    deficit: f64,
    seen: BTreeSet<UeId>,
    in_deficit: BTreeSet<UeId>,
    energy_j: f64,
    ticks: u64,
}

impl Window {
    fn outage(&self, w: OutageWeighting) -> f64 {
        let (pct, _) = match w {
            OutageWeighting::UeSeconds => {
                compute_outage(&[UeWindowRecord { ue_seconds: self.ue_seconds, deficit_seconds: self.deficit }], w)
            }
            OutageWeighting::PerUe => {
                let n = self.seen.len() as f64;
                if n == 0.0 {
                    (0.0, true)
                } else {
                    (100.0 * self.in_deficit.len() as f64 / n, false)
                }
            }
        };
        pct
    }
}

fn is_multiple(t: u64, period: f64) -> bool {
    t % (period as u64) == 0
}

/// Runs one simulation. `seed` drives traffic; shadowing uses
/// `config.shadowing_seed` or the scenario's own seed.
pub fn run(scenario: &Scenario, config: &SimConfig, seed: u64) -> Result<RunResult, EngineError> {
    Ok(run_with_log(scenario, config, seed, None)?.0)
}

/// [`run`] with every published message passed to `sink`.
pub fn run_with_log(
    scenario: &Scenario,
    config: &SimConfig,
    seed: u64,
    sink: Option<Box<dyn LogSink + Send>>,
) -> Result<(RunResult, Option<Box<dyn LogSink + Send>>), EngineError> {
    config.validate().map_err(EngineError::Config)?;
    scenario.validate()?;
    let mut sim = Sim::new(scenario, config, seed, sink)?;
    sim.setup()?;
    for t in 1..=config.horizon_s as u64 {
        sim.tick(t)?;
    }
    Ok(sim.finish())
}

struct Sim<'a> {
    scenario: &'a Scenario,
    cfg: &'a SimConfig,
    model: LinkModel,
    neighbors: crate::scenario::NeighborMap,
    traffic: TrafficGenerator,
    ran: Ran,
    bus: RicBus,
    xapp: CoosXapp,
    rapp: CoosRapp,
    ts: TsXapp,
    sample: Window,
    after_warmup: Window,
    energy_j: f64,
    off_fraction_sum: f64,
    load_sum: Vec<f64>,
    n_capacity: usize,
    result: RunResult,
}

impl<'a> Sim<'a> {
    fn new(
        scenario: &'a Scenario,
        cfg: &'a SimConfig,
        seed: u64,
        sink: Option<Box<dyn LogSink + Send>>,
    ) -> Result<Sim<'a>, EngineError> {
        let shadow_seed = cfg.shadowing_seed.unwrap_or(scenario.seed_shadowing);
        let field = generate_shadow_field(scenario, &cfg.propagation, shadow_seed);
        let model = LinkModel::new(scenario, field, cfg.propagation.clone());
        let layers: Vec<Layer> = scenario.cells.iter().map(|c| c.layer).collect();
        let mut bus = RicBus::new(cfg.latency);
        if let Some(s) = sink {
            bus = bus.with_sink(s);
        }
        let mut ran = Ran::new(scenario, cfg.t_block_s, cfg.drain_timeout_s);
        let mut xapp = CoosXapp::new(
            &layers,
            cfg.initial_policy(),
            XappParams { t_block_s: cfg.t_block_s, max_commands: cfg.max_commands },
        );
        let mut ts = TsXapp::new(scenario.cells.iter().map(|c| c.cio_db).collect(), cfg.hysteresis_db);
        let mut rapp = CoosRapp::new(&layers, RappState::new(cfg.initial_policy(), cfg.rapp), cfg.w_pp_s);
        if cfg.initial_capacity_off {
            ran.force_capacity_off();
            for (c, &l) in layers.iter().enumerate() {
                if l == Layer::Capacity {
                    xapp.view[c].status = CellStatus::Off;
                    ts.on_status(c, CellStatus::Off);
                    rapp.assume_status(c, CellStatus::Off);
                }
            }
        }
        let n_cells = scenario.cells.len();
        Ok(Sim {
            scenario,
            cfg,
            model,
            neighbors: build_neighbor_map(scenario, cfg.neighbor_radius_m),
            traffic: TrafficGenerator::new(scenario.pixels.len(), cfg.arrival.clone(), seed),
            ran,
            bus,
            xapp,
            rapp,
            ts,
            sample: Window::default(),
            after_warmup: Window::default(),
            energy_j: 0.0,
            off_fraction_sum: 0.0,
            load_sum: vec![0.0; n_cells],
            n_capacity: scenario.count_layer(Layer::Capacity),
            result: RunResult {
                horizon_s: cfg.horizon_s,
                warmup_s: cfg.warmup_s,
                timeseries: Vec::new(),
                events: Vec::new(),
                rapp_log: Vec::new(),
                policies: Vec::new(),
                counters: Counters::default(),
                expected_indications: 0,
                cell_commands: 0,
                handover_requests: 0,
                forced_offs: 0,
                log_digest: String::new(),
                energy_j: 0.0,
                mean_power_w: 0.0,
                mean_power_after_warmup_w: 0.0,
                mean_outage_pct: 0.0,
                mean_off_fraction_after_warmup: 0.0,
                mean_cell_load_after_warmup: Vec::new(),
                final_status: Vec::new(),
            },
        })
    }

    /// E2 setup per node, then both xApps subscribe at every node.
    fn setup(&mut self) -> Result<(), EngineError> {
        for (ep, topic) in [(Endpoint::CoosXapp, Topic::CellLoad), (Endpoint::TsXapp, Topic::UeMeasurement)] {
            self.bus.subscribe(Subscription { subscriber: ep, interface: Interface::E2, kind: Kind::Setup, topic: None });
            self.bus.subscribe(Subscription {
                subscriber: ep,
                interface: Interface::E2,
                kind: Kind::Indication,
                topic: Some(topic),
            });
        }
        self.ran.e2_setup(0.0, &mut self.bus)?;
        for node in 0..self.ran.n_nodes() {
            for (ep, topic) in [(Endpoint::CoosXapp, Topic::CellLoad), (Endpoint::TsXapp, Topic::UeMeasurement)] {
                self.bus.publish(Message {
                    interface: Interface::E2,
                    kind: Kind::SubscriptionReq,
                    t_s: 0.0,
                    source: ep,
                    destination: Destination::To(Endpoint::E2Node(node)),
                    payload: Payload::Subscribe(topic),
                })?;
            }
        }
        self.ran_inbox(0.0)?;
        // setup and subscription responses carry nothing the apps keep
        self.bus.drain(Endpoint::CoosXapp, 0.0);
        self.bus.drain(Endpoint::TsXapp, 0.0);
        Ok(())
    }

    fn ran_inbox(&mut self, t_s: f64) -> Result<(), EngineError> {
        let events = self.ran.process_inbox(t_s, &mut self.bus).map_err(|source| EngineError::Command { t_s, source })?;
        self.record_ran_events(t_s, events);
        Ok(())
    }

    fn record_ran_events(&mut self, t_s: f64, events: Vec<RanEvent>) {
        for ev in events {
            let (cell, kind, forced) = match ev {
                RanEvent::PendingOff { cell, .. } => (cell, EventKind::PendingOff, false),
                RanEvent::SwitchedOff { cell, forced } => (cell, EventKind::Off, forced),
                RanEvent::SwitchedOn { cell } => (cell, EventKind::On, false),
                RanEvent::HandedOver { .. } | RanEvent::HandoverRejected { .. } => continue,
            };
            self.push_event(t_s, cell, kind, forced);
        }
    }

    fn push_event(&mut self, t_s: f64, cell: usize, event: EventKind, forced: bool) {
        let def = &self.scenario.cells[cell];
        self.result.events.push(EventRecord { t_s, cell, cell_id: def.id.clone(), layer: def.layer, event, forced });
    }

    fn tick(&mut self, t: u64) -> Result<(), EngineError> {
        let cfg = self.cfg;
        let t_s = t as f64;

        // 1. queued control requests, pending cells
        self.ran_inbox(t_s)?;
        let settled = self.ran.settle_pending(t_s, &mut self.bus).map_err(|source| EngineError::Command { t_s, source })?;
        self.record_ran_events(t_s, settled);

        // 2. traffic
        self.ran.depart(t_s);
        let area = &self.scenario.area;
        for ue in self.ran.ues_mut() {
            self.traffic.move_ue(ue, cfg.tick_s, area);
        }
        self.ran.refresh_links(&self.model);
        let slot = slot_at(t_s, cfg.start_time_of_day_s);
        let arrivals = self.traffic.spawn(self.scenario, slot, t_s, cfg.tick_s);
        self.ran.admit(arrivals, &self.model);

        // 3. scheduling and power
        let stats = self.ran.schedule(&self.model);
        if let Err(message) = self.ran.check_attachment() {
            return Err(EngineError::Invariant { t_s, message });
        }
        let power = self.ran.network_power_w();
        self.energy_j += power * cfg.tick_s;
        let deficit_ids: Vec<(UeId, bool)> = self.ran.ues().iter().map(|u| (u.ue.id, u.in_deficit)).collect();
        let warm = t_s > cfg.warmup_s;
        let accumulate = |w: &mut Window| {
            w.ue_seconds += stats.n_ues as f64;
            w.deficit += stats.deficit_ues as f64;
            w.energy_j += power * cfg.tick_s;
            w.ticks += 1;
            if cfg.outage_weighting == OutageWeighting::PerUe {
                for &(id, d) in &deficit_ids {
                    w.seen.insert(id);
                    if d {
                        w.in_deficit.insert(id);
                    }
                }
            }
        };
        accumulate(&mut self.sample);
        if warm {
            accumulate(&mut self.after_warmup);
        }
        let n_off = self.ran.cells.iter().filter(|c| c.status == CellStatus::Off).count();
        if warm {
            for (c, state) in self.ran.cells.iter().enumerate() {
                self.load_sum[c] += state.load;
            }
            if self.n_capacity > 0 {
                self.off_fraction_sum += n_off as f64 / self.n_capacity as f64;
            }
        }

        // 4. measurement reports
        let cell_loads = is_multiple(t, cfg.kpm_period_s);
        let transmitting = self.ran.cells.iter().filter(|c| c.status.transmitting()).count() as u64;
        self.result.expected_indications += stats.n_ues as u64 + if cell_loads { transmitting } else { 0 };
        self.ran.emit_kpm_reports(t_s, cell_loads, &mut self.bus)?;

        // 5. O1 reports and the rApp
        if is_multiple(t, cfg.pm_period_s) {
            self.ran.emit_pm_reports(t_s, &mut self.bus)?;
        }
        for msg in self.bus.drain(Endpoint::CoosRapp, t_s) {
            if let Payload::PmReport(r) = &msg.payload {
                self.rapp.on_report(r);
            }
        }
        if cfg.rapp_enabled && is_multiple(t, cfg.t_r_s) {
            let (obs, policy) = self.rapp.evaluate(t_s);
            self.result.rapp_log.push(RappRecord {
                t_s,
                beta_sys_pct: obs.beta_sys,
                pp: obs.pp,
                n_off: obs.n_off,
                n_active_capacity: obs.n_active_capacity,
                case: self.rapp.state.last_case.unwrap_or(5),
                policy_sent: policy.is_some(),
            });
            if let Some(p) = policy {
                self.bus.publish(Message {
                    interface: Interface::A1,
                    kind: Kind::Policy,
                    t_s,
                    source: Endpoint::CoosRapp,
                    destination: Destination::To(Endpoint::CoosXapp),
                    payload: Payload::Policy(p),
                })?;
                self.result.policies.push((t_s, p));
            }
        }

        // 6. COOS xApp
        for msg in self.bus.drain(Endpoint::CoosXapp, t_s) {
            match msg.payload {
                Payload::CellLoad { cell, load } => self.xapp.on_load(cell, load),
                Payload::CellStatusChanged { cell, status, .. } => {
                    self.xapp.on_status(cell, status, msg.t_s, &self.neighbors)
                }
                Payload::Policy(p) => self.xapp.policy = p,
                _ => {}
            }
        }
        if cfg.xapp_enabled && is_multiple(t, cfg.t_x_s) {
            let cmds = self.xapp.decide(t_s, &self.neighbors);
            for cmd in cmds {
                let (cell, kind) = match cmd {
                    CellCommand::CellOff(c) => (c, EventKind::CommandOff),
                    CellCommand::CellOn(c) => (c, EventKind::CommandOn),
                };
                if self.scenario.cells[cell].layer == Layer::Coverage && kind == EventKind::CommandOff {
                    return Err(EngineError::Invariant { t_s, message: format!("coverage cell {cell} commanded off") });
                }
                self.push_event(t_s, cell, kind, false);
                self.result.cell_commands += 1;
                self.bus.publish(Message {
                    interface: Interface::E2,
                    kind: Kind::ControlReq,
                    t_s,
                    source: Endpoint::CoosXapp,
                    destination: Destination::To(self.ran.node_of(cell)),
                    payload: Payload::CellCommand(cmd),
                })?;
            }
            self.ran_inbox(t_s)?;
        }

        // 7. traffic steering
        let mut batch_started = false;
        for msg in self.bus.drain(Endpoint::TsXapp, t_s) {
            match msg.payload {
                Payload::UeReport(r) => {
                    if !batch_started {
                        self.ts.begin_batch();
                        batch_started = true;
                    }
                    self.ts.on_report(r);
                }
                Payload::CleanupRequest { cell } => self.ts.on_cleanup_request(cell),
                Payload::CellStatusChanged { cell, status, .. } => self.ts.on_status(cell, status),
                Payload::HandoverAck { ue, .. } => self.ts.on_handover_ack(ue),
                _ => {}
            }
        }
        if cfg.ts_enabled {
            for (ue, from, to) in self.ts.decide() {
                self.result.handover_requests += 1;
                self.bus.publish(Message {
                    interface: Interface::E2,
                    kind: Kind::ControlReq,
                    t_s,
                    source: Endpoint::TsXapp,
                    destination: Destination::To(self.ran.node_of(from)),
                    payload: Payload::Handover { ue, from, to },
                })?;
            }
        }

        if is_multiple(t, cfg.sample_period_s) {
            let w = std::mem::take(&mut self.sample);
            self.result.timeseries.push(TimeseriesRow {
                t_s,
                beta_sys_pct: w.outage(cfg.outage_weighting),
                alpha_off: self.xapp.policy.alpha_off,
                alpha_on: self.xapp.policy.alpha_on,
                n_off,
                power_w: w.energy_j / (w.ticks as f64 * cfg.tick_s),
                n_ues: stats.n_ues,
                offered_bps: stats.offered_bps,
            });
        }
        Ok(())
    }

    fn finish(mut self) -> (RunResult, Option<Box<dyn LogSink + Send>>) {
        let cfg = self.cfg;
        let r = &mut self.result;
        r.counters = self.bus.snapshot_counters();
        r.log_digest = self.bus.log_digest();
        r.forced_offs = self.ran.forced_offs();
        r.energy_j = self.energy_j;
        r.mean_power_w = self.energy_j / cfg.horizon_s;
        let warm_ticks = self.after_warmup.ticks.max(1) as f64;
        r.mean_power_after_warmup_w = self.after_warmup.energy_j / (warm_ticks * cfg.tick_s);
        r.mean_outage_pct = self.after_warmup.outage(cfg.outage_weighting);
        r.mean_off_fraction_after_warmup = self.off_fraction_sum / warm_ticks;
        r.mean_cell_load_after_warmup = self.load_sum.iter().map(|s| s / warm_ticks).collect();
        r.final_status = self.ran.statuses();
        let sink = self.bus.take_sink();
        (self.result, sink)
    }
}

/// Closed-form mean power for a run in which cell statuses never change:
/// `sum over cells of p0 + delta_p * p_tx_max * mean_load` for transmitting
/// cells and `p_sleep` for off ones.
pub fn static_power_w(scenario: &Scenario, statuses: &[CellStatus], mean_loads: &[f64]) -> f64 {
    scenario
        .cells
        .iter()
        .zip(statuses.iter().zip(mean_loads))
        .map(|(c, (&s, &load))| {
            let p = c.power_params();
            match s {
                CellStatus::Off => p.p_sleep_w,
                _ => p.p0_w + p.delta_p * p.p_tx_max_w * load,
            }
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{generate_synthetic, GeneratorConfig, Preset};

    #[test]
    fn outage_examples() {
        let full = UeWindowRecord { ue_seconds: 10.0, deficit_seconds: 0.0 };
        assert_eq!(compute_outage(&[full; 3], OutageWeighting::UeSeconds), (0.0, false));
        let half = UeWindowRecord { ue_seconds: 10.0, deficit_seconds: 10.0 };
        assert_eq!(compute_outage(&[half], OutageWeighting::UeSeconds), (100.0, false));
        let five = UeWindowRecord { ue_seconds: 10.0, deficit_seconds: 5.0 };
        let (pct, _) = compute_outage(&[full, full, five], OutageWeighting::UeSeconds);
        assert!((pct - 100.0 * 5.0 / 30.0).abs() < 1e-12);
        let (pct, _) = compute_outage(&[full, full, five], OutageWeighting::PerUe);
        assert!((pct - 100.0 / 3.0).abs() < 1e-12);
        assert_eq!(compute_outage(&[], OutageWeighting::UeSeconds), (0.0, true));
    }

    fn small() -> Scenario {
        generate_synthetic(&GeneratorConfig::preset(Preset::Small), 3).unwrap()
    }

    fn short(horizon: f64) -> SimConfig {
        SimConfig { horizon_s: horizon, warmup_s: 0.0, ..Default::default() }
    }

    #[test]
    fn controllers_off_means_no_control() {
        let cfg = SimConfig { xapp_enabled: false, rapp_enabled: false, ..short(900.0) };
        let r = run(&small(), &cfg, 1).unwrap();
        assert_eq!(r.state_changes(), 0);
        assert_eq!(r.counters.get(Interface::E2, Kind::ControlReq), r.handover_requests);
        assert_eq!(r.counters.get(Interface::A1, Kind::Policy), 0);
        assert!(r.events.is_empty());
    }

    #[test]
    fn indication_identity() {
        let r = run(&small(), &short(600.0), 2).unwrap();
        assert_eq!(r.counters.get(Interface::E2, Kind::Indication), r.expected_indications);
        assert_eq!(r.counters.get(Interface::E2, Kind::ControlReq), r.cell_commands + r.handover_requests);
        assert!(r.counters.identity_holds());
    }

    #[test]
    fn energy_accounting() {
        let r = run(&small(), &short(600.0), 4).unwrap();
        assert!((r.mean_power_w * r.horizon_s / r.energy_j - 1.0).abs() < 1e-9);
        assert_eq!(r.timeseries.len(), 10);
    }

    #[test]
    fn same_inputs_same_digest() {
        let cfg = short(900.0);
        let a = run(&small(), &cfg, 9).unwrap();
        let b = run(&small(), &cfg, 9).unwrap();
        assert_eq!(a.digest(), b.digest());
        assert_eq!(a.log_digest, b.log_digest);
        let c = run(&small(), &cfg, 10).unwrap();
        assert_ne!(a.digest(), c.digest());
    }

    #[test]
    fn bad_config_rejected() {
        let cfg = SimConfig { tick_s: 0.5, ..short(60.0) };
        assert!(matches!(run(&small(), &cfg, 1), Err(EngineError::Config(_))));
    }
}
