//! System-level simulator for hierarchical cell on/off switching.
//!
//! A cellular network with a coverage layer and a switchable capacity layer
//! is driven second by second. Three controller apps talk to the simulated
//! RAN only through an in-process message bus with E2, A1 and O1 semantics:
//!
//! - the COOS xApp switches capacity cells off when their load falls below
//!   `alpha_off` and back on when their neighbors' mean load exceeds
//!   `alpha_on`;
//! - the COOS rApp adapts both thresholds every few minutes to keep the
//!   system outage inside a target band;
//! - the traffic-steering xApp empties cells scheduled for switch-off and
//!   runs ordinary RSRP-based mobility.
//!
//! ```
//! use tandem::engine::{run, SimConfig};
//! use tandem::scenario::{generate_synthetic, GeneratorConfig, Preset};
//!
//! let scenario = generate_synthetic(&GeneratorConfig::preset(Preset::Small), 7).unwrap();
//! let config = SimConfig { horizon_s: 600.0, warmup_s: 0.0, ..Default::default() };
//! let result = run(&scenario, &config, 1).unwrap();
//! assert_eq!(result.timeseries.len(), 10);
//! ```

pub mod apps;
pub mod engine;
pub mod radio;
pub mod ran;
pub mod ricbus;
pub mod scenario;
pub mod traffic;
pub mod units;
