use serde::{Deserialize, Serialize};

use crate::apps::{CoosPolicy, RappConfig};
use crate::radio::PropagationConfig;
use crate::ricbus::Latency;
use crate::scenario::DEFAULT_NEIGHBOR_RADIUS_M;
use crate::traffic::ArrivalConfig;

/// How user outage is aggregated over a window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutageWeighting {
    /// Deficit user-seconds over total user-seconds.
    #[default]
    UeSeconds,
    /// Users with any deficit second over users seen.
    PerUe,
}

/// Run configuration. Every field has a default; a JSON run-config file only
/// needs the fields it changes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub horizon_s: f64,
    /// Master tick; only 1 s is supported.
    pub tick_s: f64,
    pub t_x_s: f64,
    pub t_r_s: f64,
    pub t_block_s: f64,
    pub w_pp_s: f64,
    /// Cadence of per-cell load indications. User measurement reports are
    /// sent every tick.
    pub kpm_period_s: f64,
    pub pm_period_s: f64,
    pub sample_period_s: f64,
    pub warmup_s: f64,
    /// Time of day at `t = 0`, seconds after midnight.
    pub start_time_of_day_s: f64,
    pub target_outage_pct: f64,
    pub tolerance_pct: f64,
    pub initial_alpha_off: f64,
    pub initial_alpha_on: f64,
    pub rapp: RappConfig,
    pub max_commands: usize,
    pub hysteresis_db: f64,
    pub neighbor_radius_m: f64,
    pub drain_timeout_s: f64,
    pub xapp_enabled: bool,
    pub rapp_enabled: bool,
    pub ts_enabled: bool,
    /// Start with every capacity cell off (the all-off reference).
    pub initial_capacity_off: bool,
    pub outage_weighting: OutageWeighting,
    pub propagation: PropagationConfig,
    pub arrival: ArrivalConfig,
    pub latency: Latency,
    /// Overrides the scenario's shadowing seed.
    pub shadowing_seed: Option<u64>,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            horizon_s: 86_400.0,
            tick_s: 1.0,
            t_x_s: 60.0,
            t_r_s: 300.0,
            t_block_s: 600.0,
            w_pp_s: 1800.0,
            kpm_period_s: 1.0,
            pm_period_s: 60.0,
            sample_period_s: 60.0,
            warmup_s: 7200.0,
            start_time_of_day_s: 0.0,
            target_outage_pct: 15.0,
            tolerance_pct: 1.0,
            initial_alpha_off: 0.0,
            initial_alpha_on: 100.0,
            rapp: RappConfig::default(),
            max_commands: 5,
            hysteresis_db: 3.0,
            neighbor_radius_m: DEFAULT_NEIGHBOR_RADIUS_M,
            drain_timeout_s: 30.0,
            xapp_enabled: true,
            rapp_enabled: true,
            ts_enabled: true,
            initial_capacity_off: false,
            outage_weighting: OutageWeighting::UeSeconds,
            propagation: PropagationConfig::default(),
            arrival: ArrivalConfig::default(),
            latency: Latency::default(),
            shadowing_seed: None,
        }
    }
}

fn whole_seconds(name: &str, v: f64, errs: &mut Vec<String>) {
    if !(v.is_finite() && v >= 1.0 && v.fract() == 0.0) {
        errs.push(format!("{name} must be a whole number of seconds >= 1 (got {v})"));
    }
}

impl SimConfig {
    pub fn initial_policy(&self) -> CoosPolicy {
        CoosPolicy {
            alpha_off: self.initial_alpha_off,
            alpha_on: self.initial_alpha_on,
            ..CoosPolicy::initial(self.target_outage_pct, self.tolerance_pct)
        }
    }

    /// Every violated constraint, one message each.
    pub fn validate(&self) -> Result<(), Vec<String>> {
        let mut errs = Vec::new();
        if self.tick_s != 1.0 {
            errs.push(format!("tick_s must be 1 (got {})", self.tick_s));
        }
        for (name, v) in [
            ("horizon_s", self.horizon_s),
            ("t_x_s", self.t_x_s),
            ("t_r_s", self.t_r_s),
            ("kpm_period_s", self.kpm_period_s),
            ("pm_period_s", self.pm_period_s),
            ("sample_period_s", self.sample_period_s),
        ] {
            whole_seconds(name, v, &mut errs);
        }
        if self.t_x_s >= self.t_r_s {
            errs.push(format!("t_x_s ({}) must be shorter than t_r_s ({})", self.t_x_s, self.t_r_s));
        }
        if !(self.t_block_s >= 0.0) {
            errs.push("t_block_s must be non-negative".into());
        }
        if self.w_pp_s < self.t_block_s {
            errs.push(format!("w_pp_s ({}) must be at least t_block_s ({})", self.w_pp_s, self.t_block_s));
        }
        if self.pm_period_s > 0.0 && self.t_r_s % self.pm_period_s != 0.0 {
            errs.push(format!("t_r_s ({}) must be a multiple of pm_period_s ({})", self.t_r_s, self.pm_period_s));
        }
        if !(self.warmup_s >= 0.0 && self.warmup_s < self.horizon_s) {
            errs.push(format!("warmup_s ({}) must lie in [0, horizon_s)", self.warmup_s));
        }
        if !(self.tolerance_pct > 0.0) {
            errs.push("tolerance_pct must be positive".into());
        }
        if !(0.0..=100.0).contains(&self.target_outage_pct) {
            errs.push("target_outage_pct must lie in [0, 100]".into());
        }
        if let Err(e) = self.rapp.validate() {
            errs.push(e);
        }
        if !(0.0..=self.rapp.alpha_off_max).contains(&self.initial_alpha_off) {
            errs.push("initial_alpha_off must lie in [0, alpha_off_max]".into());
        }
        if !(self.rapp.alpha_on_min..=100.0).contains(&self.initial_alpha_on) {
            errs.push("initial_alpha_on must lie in [alpha_on_min, 100]".into());
        }
        if self.max_commands == 0 {
            errs.push("max_commands must be at least 1".into());
        }
        if !(self.hysteresis_db >= 0.0) {
            errs.push("hysteresis_db must be non-negative".into());
        }
        if !(self.neighbor_radius_m >= 0.0) {
            errs.push("neighbor_radius_m must be non-negative".into());
        }
        if !(self.drain_timeout_s > 0.0) {
            errs.push("drain_timeout_s must be positive".into());
        }
        if let Err(e) = self.propagation.validate() {
            errs.push(e);
        }
        if let Err(e) = self.arrival.validate() {
            errs.push(e);
        }
        for (name, v) in [("e2_s", self.latency.e2_s), ("a1_s", self.latency.a1_s), ("o1_s", self.latency.o1_s)] {
            if !(v >= 0.0) {
                errs.push(format!("latency.{name} must be non-negative"));
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(errs)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        SimConfig::default().validate().unwrap();
        let p = SimConfig::default().initial_policy();
        assert_eq!((p.alpha_off, p.alpha_on, p.target_outage_lo, p.target_outage_hi), (0.0, 100.0, 14.0, 16.0));
    }

    #[test]
    fn timescale_separation_enforced() {
        let c = SimConfig { t_x_s: 300.0, w_pp_s: 100.0, ..Default::default() };
        let errs = c.validate().unwrap_err();
        assert_eq!(errs.len(), 2, "{errs:?}");
    }

    #[test]
    fn partial_json() {
        let c: SimConfig = serde_json::from_str(r#"{"horizon_s": 3600, "propagation": {"noise_figure_db": 7}}"#).unwrap();
        assert_eq!(c.horizon_s, 3600.0);
        assert_eq!(c.propagation.noise_figure_db, 7.0);
        assert_eq!(c.propagation.shadowing_sigma_db, 6.0);
        assert!(serde_json::from_str::<SimConfig>(r#"{"horizon": 1}"#).is_err());
    }
}
