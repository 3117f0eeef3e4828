//! In-process message fabric with E2 / A1 / O1 semantics.
//!
//! Every message is counted exactly once per `(interface, kind)` at publish
//! time, however many subscribers receive it. Delivery is synchronous: a
//! published message is appended immediately to each recipient's mailbox, and
//! recipients drain their mailboxes when the engine runs them. Directed
//! messages go to their destination only; broadcast messages go to every
//! endpoint holding a matching subscription, in subscription order.

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::apps::CoosPolicy;
use crate::ran::{CellCommand, CellStatus};
use crate::traffic::UeId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Interface {
    E2,
    A1,
    O1,
}

impl Interface {
    pub const ALL: [Interface; 3] = [Interface::E2, Interface::A1, Interface::O1];

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Interface {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Interface::E2 => "E2",
            Interface::A1 => "A1",
            Interface::O1 => "O1",
        })
    }
}

impl std::str::FromStr for Interface {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "E2" => Ok(Interface::E2),
            "A1" => Ok(Interface::A1),
            "O1" => Ok(Interface::O1),
            _ => Err(format!("unknown interface \"{s}\"")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Setup,
    SubscriptionReq,
    SubscriptionResp,
    Indication,
    ControlReq,
    ControlAck,
    Policy,
    PmReport,
}

impl Kind {
    pub const ALL: [Kind; 8] = [
        Kind::Setup,
        Kind::SubscriptionReq,
        Kind::SubscriptionResp,
        Kind::Indication,
        Kind::ControlReq,
        Kind::ControlAck,
        Kind::Policy,
        Kind::PmReport,
    ];

    fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Setup => "setup",
            Kind::SubscriptionReq => "subscription_req",
            Kind::SubscriptionResp => "subscription_resp",
            Kind::Indication => "indication",
            Kind::ControlReq => "control_req",
            Kind::ControlAck => "control_ack",
            Kind::Policy => "policy",
            Kind::PmReport => "pm_report",
        }
    }

    /// Whether `self` may travel over `iface`: policies only on A1,
    /// performance reports only on O1, everything else only on E2.
    pub fn legal_on(self, iface: Interface) -> bool {
        match self {
            Kind::Policy => iface == Interface::A1,
            Kind::PmReport => iface == Interface::O1,
            _ => iface == Interface::E2,
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Kind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Kind::ALL.into_iter().find(|k| k.as_str() == s).ok_or_else(|| format!("unknown message kind \"{s}\""))
    }
}

/// Message endpoints. E2 nodes are identified by site index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Endpoint {
    E2Node(u32),
    CoosXapp,
    TsXapp,
    CoosRapp,
}

impl Endpoint {
    fn mailbox(self) -> usize {
        match self {
            Endpoint::E2Node(_) => 0,
            Endpoint::CoosXapp => 1,
            Endpoint::TsXapp => 2,
            Endpoint::CoosRapp => 3,
        }
    }
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Endpoint::E2Node(n) => write!(f, "e2node-{n}"),
            Endpoint::CoosXapp => f.write_str("coos-xapp"),
            Endpoint::TsXapp => f.write_str("ts-xapp"),
            Endpoint::CoosRapp => f.write_str("coos-rapp"),
        }
    }
}

/// All E2 nodes share one mailbox, owned by the RAN emulator.
pub const RAN_MAILBOX: Endpoint = Endpoint::E2Node(0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Destination {
    To(Endpoint),
    Subscribers,
}

impl fmt::Display for Destination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Destination::To(e) => e.fmt(f),
            Destination::Subscribers => f.write_str("*"),
        }
    }
}

/// What a subscription selects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Topic {
    UeMeasurement,
    CellLoad,
}

/// Per-UE measurement report (RSRP of the serving cell and of every
/// transmitting cell).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UeReport {
    pub ue: UeId,
    pub serving: usize,
    /// `(cell, per-PRB RSRP dBm)` for every transmitting cell, serving included.
    pub rsrp: Vec<(usize, f64)>,
}

/// O1 performance report of one cell over one reporting period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PmReport {
    pub cell: usize,
    pub period_start_s: f64,
    pub period_end_s: f64,
    pub status: CellStatus,
    pub mean_load: f64,
    pub ue_seconds: f64,
    pub deficit_ue_seconds: f64,
    pub ues_seen: u64,
    pub ues_in_deficit: u64,
    /// Completed switch-offs and switch-ons during the period.
    pub state_changes: Vec<(f64, CellStatus)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Payload {
    E2Setup { cells: Vec<usize> },
    Subscribe(Topic),
    SubscribeResp(Topic),
    UeReport(UeReport),
    CellLoad { cell: usize, load: f64 },
    CellCommand(CellCommand),
    Handover { ue: UeId, from: usize, to: usize },
    /// RAN asks traffic steering to empty a cell scheduled for switch-off.
    CleanupRequest { cell: usize },
    /// RAN confirms a completed cell state change.
    CellStatusChanged { cell: usize, status: CellStatus, forced: bool },
    HandoverAck { ue: UeId, to: usize, accepted: bool },
    Policy(CoosPolicy),
    PmReport(PmReport),
}

impl Payload {
    fn topic(&self) -> Option<Topic> {
        match self {
            Payload::UeReport(_) => Some(Topic::UeMeasurement),
            Payload::CellLoad { .. } => Some(Topic::CellLoad),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Message {
    pub interface: Interface,
    pub kind: Kind,
    pub t_s: f64,
    pub source: Endpoint,
    pub destination: Destination,
    pub payload: Payload,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Subscription {
    pub subscriber: Endpoint,
    pub interface: Interface,
    pub kind: Kind,
    pub topic: Option<Topic>,
}

impl Subscription {
    fn matches(&self, msg: &Message) -> bool {
        self.interface == msg.interface
            && self.kind == msg.kind
            && self.topic.is_none_or(|t| msg.payload.topic() == Some(t))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BusError {
    #[error("message kind {kind} is not legal on interface {interface}")]
    IllegalKind { interface: Interface, kind: Kind },
}

/// Monotone per-`(interface, kind)` message counts.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Counters {
    counts: [[u64; 8]; 3],
    totals: [u64; 3],
}

impl Counters {
    pub fn get(&self, iface: Interface, kind: Kind) -> u64 {
        self.counts[iface.index()][kind.index()]
    }

    /// Running total for one interface, maintained independently of the
    /// per-kind counts.
    pub fn total(&self, iface: Interface) -> u64 {
        self.totals[iface.index()]
    }

    pub fn grand_total(&self) -> u64 {
        self.totals.iter().sum()
    }

    pub fn sum_of_kinds(&self, iface: Interface) -> u64 {
        self.counts[iface.index()].iter().sum()
    }

    /// `total == sum of kinds` on every interface.
    pub fn identity_holds(&self) -> bool {
        Interface::ALL.iter().all(|&i| self.total(i) == self.sum_of_kinds(i))
    }

    /// Adds `n` messages of one kind.
    pub fn add(&mut self, iface: Interface, kind: Kind, n: u64) -> Result<(), BusError> {
        if !kind.legal_on(iface) {
            return Err(BusError::IllegalKind { interface: iface, kind });
        }
        self.counts[iface.index()][kind.index()] += n;
        self.totals[iface.index()] += n;
        debug_assert!(self.identity_holds());
        Ok(())
    }

    /// Non-zero entries in interface / kind order.
    pub fn entries(&self) -> Vec<(Interface, Kind, u64)> {
        let mut out = Vec::new();
        for iface in Interface::ALL {
            for kind in Kind::ALL {
                let n = self.get(iface, kind);
                if n > 0 {
                    out.push((iface, kind, n));
                }
            }
        }
        out
    }
}

impl Serialize for Counters {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeSeq;
        let entries = self.entries();
        let mut seq = s.serialize_seq(Some(entries.len()))?;
        for (i, k, n) in entries {
            seq.serialize_element(&(i, k, n))?;
        }
        seq.end()
    }
}

/// One line of the exported message log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRecord {
    pub t_s: f64,
    pub interface: Interface,
    pub kind: Kind,
    pub source: String,
    pub destination: String,
    /// Present for A1 policies only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payload: Option<CoosPolicy>,
}

impl LogRecord {
    pub fn of(msg: &Message) -> LogRecord {
        LogRecord {
            t_s: msg.t_s,
            interface: msg.interface,
            kind: msg.kind,
            source: msg.source.to_string(),
            destination: msg.destination.to_string(),
            payload: match &msg.payload {
                Payload::Policy(p) => Some(*p),
                _ => None,
            },
        }
    }
}

/// Receives every accepted message, in publish order.
pub trait LogSink {
    fn record(&mut self, msg: &Message);
}

impl LogSink for Vec<LogRecord> {
    fn record(&mut self, msg: &Message) {
        self.push(LogRecord::of(msg));
    }
}

/// Fixed per-interface delivery latency, seconds. Zero by default.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Latency {
    pub e2_s: f64,
    pub a1_s: f64,
    pub o1_s: f64,
}

impl Latency {
    fn of(&self, iface: Interface) -> f64 {
        match iface {
            Interface::E2 => self.e2_s,
            Interface::A1 => self.a1_s,
            Interface::O1 => self.o1_s,
        }
    }
}

struct Pending {
    due_s: f64,
    msg: Message,
}

pub struct RicBus {
    subscriptions: Vec<Subscription>,
    mailboxes: [VecDeque<Pending>; 4],
    delivered: [u64; 4],
    counters: Counters,
    latency: Latency,
    hasher: Sha256,
    sink: Option<Box<dyn LogSink + Send>>,
}

impl Default for RicBus {
    fn default() -> Self {
        RicBus::new(Latency::default())
    }
}

impl fmt::Debug for RicBus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RicBus")
            .field("subscriptions", &self.subscriptions)
            .field("counters", &self.counters)
            .finish_non_exhaustive()
    }
}

impl RicBus {
    pub fn new(latency: Latency) -> RicBus {
        RicBus {
            subscriptions: Vec::new(),
            mailboxes: Default::default(),
            delivered: [0; 4],
            counters: Counters::default(),
            latency,
            hasher: Sha256::new(),
            sink: None,
        }
    }

    pub fn with_sink(mut self, sink: Box<dyn LogSink + Send>) -> RicBus {
        self.sink = Some(sink);
        self
    }

    pub fn take_sink(&mut self) -> Option<Box<dyn LogSink + Send>> {
        self.sink.take()
    }

    pub fn subscribe(&mut self, sub: Subscription) {
        self.subscriptions.push(sub);
    }

    /// Counts `msg` and hands it to its recipients. Returns the number of
    /// deliveries.
    pub fn publish(&mut self, msg: Message) -> Result<usize, BusError> {
        self.counters.add(msg.interface, msg.kind, 1)?;
        self.digest(&msg);
        if let Some(sink) = self.sink.as_mut() {
            sink.record(&msg);
        }
        let due_s = msg.t_s + self.latency.of(msg.interface);
        match msg.destination {
            Destination::To(ep) => {
                self.deliver(ep, due_s, msg);
                Ok(1)
            }
            Destination::Subscribers => {
                let mut recipients: Vec<Endpoint> = Vec::new();
                for s in &self.subscriptions {
                    if s.matches(&msg) && !recipients.contains(&s.subscriber) {
                        recipients.push(s.subscriber);
                    }
                }
                let n = recipients.len();
                if let Some((&last, rest)) = recipients.split_last() {
                    for &ep in rest {
                        self.deliver(ep, due_s, msg.clone());
                    }
                    self.deliver(last, due_s, msg);
                }
                Ok(n)
            }
        }
    }

    fn deliver(&mut self, ep: Endpoint, due_s: f64, msg: Message) {
        let m = ep.mailbox();
        self.delivered[m] += 1;
        self.mailboxes[m].push_back(Pending { due_s, msg });
    }

    /// Removes and returns every message for `ep` that is due at `now_s`, in
    /// delivery order. All E2 nodes share one mailbox.
    pub fn drain(&mut self, ep: Endpoint, now_s: f64) -> Vec<Message> {
        let box_ = &mut self.mailboxes[ep.mailbox()];
        let mut out = Vec::new();
        let mut keep = VecDeque::new();
        for p in box_.drain(..) {
            if p.due_s <= now_s {
                out.push(p.msg);
            } else {
                keep.push_back(p);
            }
        }
        *box_ = keep;
        out
    }

    pub fn pending(&self, ep: Endpoint) -> usize {
        self.mailboxes[ep.mailbox()].len()
    }

    /// Total deliveries made to `ep`'s mailbox so far.
    pub fn delivered_to(&self, ep: Endpoint) -> u64 {
        self.delivered[ep.mailbox()]
    }

    pub fn snapshot_counters(&self) -> Counters {
        self.counters.clone()
    }

    /// SHA-256 over every accepted message header, in publish order.
    pub fn log_digest(&self) -> String {
        hex(&self.hasher.clone().finalize())
    }

    fn digest(&mut self, msg: &Message) {
        self.hasher.update(msg.t_s.to_bits().to_le_bytes());
        self.hasher.update([msg.interface.index() as u8, msg.kind.index() as u8]);
        let ep = |e: Endpoint| -> [u8; 5] {
            let (tag, n) = match e {
                Endpoint::E2Node(n) => (0u8, n),
                Endpoint::CoosXapp => (1, 0),
                Endpoint::TsXapp => (2, 0),
                Endpoint::CoosRapp => (3, 0),
            };
            let b = n.to_le_bytes();
            [tag, b[0], b[1], b[2], b[3]]
        };
        self.hasher.update(ep(msg.source));
        match msg.destination {
            Destination::To(e) => self.hasher.update(ep(e)),
            Destination::Subscribers => self.hasher.update([0xff]),
        }
    }
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
