//! Link-level radio model: path loss, shadowing, received power, SINR and
//! truncated-Shannon spectral efficiency.
//!
//! All functions are pure given the scenario, the shadow field and the
//! configuration. [`LinkModel`] bundles the per-cell constants needed to
//! evaluate many links quickly and is what the simulator uses on every tick.

mod pathloss;
mod shadow;

use serde::{Deserialize, Serialize};

use crate::scenario::{Area, CellDef, Scenario, Site};
use crate::units::{db_to_linear, dbm_to_mw, linear_to_db, THERMAL_NOISE_DBM_HZ};

pub use pathloss::{
    antenna_attenuation_db, los_probability, path_loss, path_loss_38901, DEFAULT_UE_HEIGHT_M,
};
pub use shadow::{generate_shadow_field, ShadowField};

/// How line-of-sight is decided per link.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LosMode {
    /// Every link uses the NLOS formula.
    #[default]
    NlosOnly,
    /// LOS is drawn once per (cell, pixel) from the 38.901 LOS probability,
    /// using a hash of the shadowing seed so runs stay reproducible.
    Probabilistic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PropagationConfig {
    pub shadowing_sigma_db: f64,
    pub shadowing_dcorr_m: f64,
    pub noise_figure_db: f64,
    pub sinr_min_db: f64,
    pub sinr_max_db: f64,
    /// Attenuation factor applied to the Shannon bound.
    pub shannon_alpha: f64,
    pub se_max_bps_hz: f64,
    pub ue_height_m: f64,
    pub los_mode: LosMode,
    /// Adds a vertical antenna pattern around each cell's tilt.
    pub apply_tilt: bool,
}

impl Default for PropagationConfig {
    fn default() -> Self {
        PropagationConfig {
            shadowing_sigma_db: 6.0,
            shadowing_dcorr_m: 50.0,
            noise_figure_db: 9.0,
            sinr_min_db: -10.0,
            sinr_max_db: 22.0,
            shannon_alpha: 0.6,
            se_max_bps_hz: 4.4,
            ue_height_m: DEFAULT_UE_HEIGHT_M,
            los_mode: LosMode::NlosOnly,
            apply_tilt: false,
        }
    }
}

impl PropagationConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.sinr_min_db < self.sinr_max_db) {
            return Err("sinr_min_db must be below sinr_max_db".into());
        }
        if !(self.shannon_alpha > 0.0 && self.shannon_alpha <= 1.0) {
            return Err("shannon_alpha must lie in (0, 1]".into());
        }
        if !(self.shadowing_sigma_db >= 0.0) {
            return Err("shadowing_sigma_db must be non-negative".into());
        }
        if !(self.shadowing_dcorr_m > 0.0) {
            return Err("shadowing_dcorr_m must be positive".into());
        }
        if !(self.se_max_bps_hz > 0.0) {
            return Err("se_max_bps_hz must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkResult {
    pub rsrp_dbm: f64,
    pub sinr_db: f64,
    pub se_bps_hz: f64,
}

/// Received power of one cell at one position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rsrp {
    /// Total received power over the cell bandwidth.
    pub wideband_dbm: f64,
    /// Wideband power divided evenly over the cell's PRBs.
    pub per_prb_dbm: f64,
}

/// Truncated Shannon mapping: zero below the SINR floor, the cap at or above
/// the ceiling, and the attenuated Shannon bound (never above the cap) in
/// between.
pub fn spectral_efficiency(sinr_db: f64, cfg: &PropagationConfig) -> f64 {
    if sinr_db < cfg.sinr_min_db {
        0.0
    } else if sinr_db >= cfg.sinr_max_db {
        cfg.se_max_bps_hz
    } else {
        (cfg.shannon_alpha * (1.0 + db_to_linear(sinr_db)).log2()).min(cfg.se_max_bps_hz)
    }
}

pub fn noise_dbm(bandwidth_hz: f64, noise_figure_db: f64) -> f64 {
    THERMAL_NOISE_DBM_HZ + linear_to_db(bandwidth_hz) + noise_figure_db
}

/// Link budget for a cell at `pos`: transmit power minus path loss (antenna
/// pattern included) plus the shadowing value of the pixel holding `pos`.
pub fn rsrp(
    cell: &CellDef,
    cell_index: usize,
    site: &Site,
    pos: (f64, f64),
    area: &Area,
    field: &ShadowField,
    cfg: &PropagationConfig,
) -> Rsrp {
    let pl = path_loss(cell, site, pos, cfg);
    let shadow = field.value(cell_index, area.pixel_index(pos.0, pos.1));
    rsrp_from_parts(cell.tx_power_dbm, pl, shadow, cell.n_prb)
}

pub fn rsrp_from_parts(tx_power_dbm: f64, path_loss_db: f64, shadowing_db: f64, n_prb: u32) -> Rsrp {
    let wideband_dbm = tx_power_dbm - path_loss_db + shadowing_db;
    Rsrp { wideband_dbm, per_prb_dbm: wideband_dbm - linear_to_db(n_prb as f64) }
}

/// Per-cell constants needed to evaluate links without touching the scenario.
#[derive(Debug, Clone)]
struct CellRadio {
    x: f64,
    y: f64,
    height_m: f64,
    carrier_hz: f64,
    env: crate::scenario::Environment,
    azimuth_deg: Option<f64>,
    tilt_deg: f64,
    tx_power_dbm: f64,
    prb_offset_db: f64,
    noise_mw: f64,
    carrier_group: usize,
}

/// Precomputed link evaluator for one scenario and shadow field.
#[derive(Debug, Clone)]
pub struct LinkModel {
    cells: Vec<CellRadio>,
    area: Area,
    field: ShadowField,
    cfg: PropagationConfig,
    los_seed: u64,
}

impl LinkModel {
    pub fn new(scenario: &Scenario, field: ShadowField, cfg: PropagationConfig) -> LinkModel {
        let sites = scenario.cell_sites();
        let mut carriers: Vec<f64> = Vec::new();
        let cells = scenario
            .cells
            .iter()
            .zip(&sites)
            .map(|(c, &s)| {
                let site = &scenario.sites[s];
                let carrier_group = match carriers.iter().position(|&f| f == c.carrier_hz) {
                    Some(g) => g,
                    None => {
                        carriers.push(c.carrier_hz);
                        carriers.len() - 1
                    }
                };
                CellRadio {
                    x: site.x,
                    y: site.y,
                    height_m: c.height_m,
                    carrier_hz: c.carrier_hz,
                    env: site.environment,
                    azimuth_deg: c.azimuth_deg,
                    tilt_deg: c.tilt_deg,
                    tx_power_dbm: c.tx_power_dbm,
                    prb_offset_db: linear_to_db(c.n_prb as f64),
                    noise_mw: dbm_to_mw(noise_dbm(c.bandwidth_hz, cfg.noise_figure_db)),
                    carrier_group,
                }
            })
            .collect();
        let los_seed = field.seed();
        LinkModel { cells, area: scenario.area, field, cfg, los_seed }
    }

    pub fn config(&self) -> &PropagationConfig {
        &self.cfg
    }

    pub fn field(&self) -> &ShadowField {
        &self.field
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn co_channel(&self, a: usize, b: usize) -> bool {
        self.cells[a].carrier_group == self.cells[b].carrier_group
    }

    fn is_los(&self, cell: usize, pixel: usize, d2d: f64) -> bool {
        match self.cfg.los_mode {
            LosMode::NlosOnly => false,
            LosMode::Probabilistic => {
                let c = &self.cells[cell];
                let h = splitmix64(self.los_seed ^ splitmix64(((cell as u64) << 32) | pixel as u64));
                let u = (h >> 11) as f64 / (1u64 << 53) as f64;
                u < los_probability(c.env, d2d, self.cfg.ue_height_m)
            }
        }
    }

    /// Wideband received power of `cell` at `pos`, dBm.
    pub fn rx_power_dbm(&self, cell: usize, pos: (f64, f64)) -> f64 {
        let c = &self.cells[cell];
        let d2d = (pos.0 - c.x).hypot(pos.1 - c.y);
        let pixel = self.area.pixel_index(pos.0, pos.1);
        let los = self.is_los(cell, pixel, d2d);
        let pl = path_loss_38901(c.env, c.carrier_hz, d2d, c.height_m, self.cfg.ue_height_m, los)
            + antenna_attenuation_db(
                (c.x, c.y),
                c.height_m,
                c.azimuth_deg,
                c.tilt_deg,
                pos,
                self.cfg.ue_height_m,
                self.cfg.apply_tilt,
            );
        c.tx_power_dbm - pl + self.field.value(cell, pixel)
    }

    /// Fills `out` with the wideband received power of every cell at `pos`.
    pub fn rx_powers(&self, pos: (f64, f64), out: &mut Vec<f64>) {
        out.clear();
        out.extend((0..self.cells.len()).map(|c| self.rx_power_dbm(c, pos)));
    }

    /// Converts a wideband power of `cell` into per-PRB RSRP.
    pub fn per_prb(&self, cell: usize, wideband_dbm: f64) -> f64 {
        wideband_dbm - self.cells[cell].prb_offset_db
    }

    /// SINR of `serving` given every cell's wideband received power. Only
    /// cells flagged in `transmitting` and sharing the serving carrier
    /// interfere.
    pub fn sinr_db(&self, rx_dbm: &[f64], serving: usize, transmitting: &[bool]) -> f64 {
        let group = self.cells[serving].carrier_group;
        let interference: f64 = (0..self.cells.len())
            .filter(|&c| c != serving && transmitting[c] && self.cells[c].carrier_group == group)
            .map(|c| dbm_to_mw(rx_dbm[c]))
            .sum();
        linear_to_db(dbm_to_mw(rx_dbm[serving]) / (self.cells[serving].noise_mw + interference))
    }

    pub fn link(&self, rx_dbm: &[f64], serving: usize, transmitting: &[bool]) -> LinkResult {
        let sinr_db = self.sinr_db(rx_dbm, serving, transmitting);
        LinkResult {
            rsrp_dbm: self.per_prb(serving, rx_dbm[serving]),
            sinr_db,
            se_bps_hz: spectral_efficiency(sinr_db, &self.cfg),
        }
    }

    pub fn carrier_hz(&self, cell: usize) -> f64 {
        self.cells[cell].carrier_hz
    }
}

/// SINR at `pos` for `serving` with the given set of transmitting cells.
///
/// # Panics
///
/// Panics if `serving` is not transmitting; attaching a user to a silent cell
/// is a caller bug.
pub fn sinr(model: &LinkModel, pos: (f64, f64), serving: usize, transmitting: &[bool]) -> f64 {
    assert!(transmitting[serving], "serving cell {serving} is not transmitting");
    let mut rx = Vec::new();
    model.rx_powers(pos, &mut rx);
    model.sinr_db(&rx, serving, transmitting)
}

pub(crate) fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{Environment, Layer, TrafficPixel};
    use proptest::prelude::*;

    #[test]
    fn shannon_floor_mid_and_cap() {
        let cfg = PropagationConfig::default();
        assert_eq!(spectral_efficiency(-15.0, &cfg), 0.0);
        assert!((spectral_efficiency(0.0, &cfg) - 0.6).abs() < 1e-12);
        assert_eq!(spectral_efficiency(40.0, &cfg), 4.4);
        assert_eq!(spectral_efficiency(22.0, &cfg), 4.4);
        // exactly at the floor the Shannon branch applies
        let at_floor = 0.6 * (1.0 + 0.1f64).log2();
        assert!((spectral_efficiency(-10.0, &cfg) - at_floor).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn se_monotone_and_bounded(a in -40.0f64..60.0, b in -40.0f64..60.0) {
            let cfg = PropagationConfig::default();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let (s_lo, s_hi) = (spectral_efficiency(lo, &cfg), spectral_efficiency(hi, &cfg));
            prop_assert!(s_lo <= s_hi);
            prop_assert!((0.0..=cfg.se_max_bps_hz).contains(&s_lo));
            prop_assert!((0.0..=cfg.se_max_bps_hz).contains(&s_hi));
        }
    }

    #[test]
    fn rsrp_arithmetic() {
        let r = rsrp_from_parts(46.0, 100.0, 0.0, 100);
        assert!((r.wideband_dbm - -54.0).abs() < 1e-12);
        assert!((r.per_prb_dbm - -74.0).abs() < 1e-12);
        let shadowed = rsrp_from_parts(46.0, 100.0, 6.0, 100);
        assert!((shadowed.wideband_dbm - r.wideband_dbm - 6.0).abs() < 1e-12);
    }

    pub(crate) fn co_channel_scenario(xs: &[f64]) -> Scenario {
        let sites: Vec<Site> = xs
            .iter()
            .enumerate()
            .map(|(i, &x)| Site { id: format!("s{i}"), x, y: 500.0, environment: Environment::UrbanMacro })
            .collect();
        let cells = sites
            .iter()
            .enumerate()
            .map(|(i, s)| CellDef {
                id: format!("c{i}"),
                site_id: s.id.clone(),
                carrier_hz: 2.16e9,
                bandwidth_hz: 20e6,
                n_prb: 106,
                tx_power_dbm: 46.0,
                height_m: 25.0,
                azimuth_deg: None,
                tilt_deg: 0.0,
                cio_db: 0.0,
                layer: if i == 0 { Layer::Coverage } else { Layer::Capacity },
                power: None,
            })
            .collect();
        let area = Area { width_m: 3000.0, height_m: 1000.0, pixel_size_m: 100.0 };
        let pixels = (0..area.pixel_count())
            .map(|i| TrafficPixel::flat(i % area.nx(), i / area.nx(), 0.1, 1e6))
            .collect();
        Scenario { version: 1, area, seed_shadowing: 9, sites, cells, pixels }
    }

    fn model(s: &Scenario, sigma: f64) -> LinkModel {
        let cfg = PropagationConfig { shadowing_sigma_db: sigma, ..Default::default() };
        let field = generate_shadow_field(s, &cfg, 4);
        LinkModel::new(s, field, cfg)
    }

    #[test]
    fn single_cell_sinr_is_snr() {
        let s = co_channel_scenario(&[500.0]);
        let m = model(&s, 0.0);
        let pos = (800.0, 600.0);
        let rx = m.rx_power_dbm(0, pos);
        let snr = rx - noise_dbm(20e6, 9.0);
        assert!((sinr(&m, pos, 0, &[true]) - snr).abs() < 1e-9);
    }

    #[test]
    fn equal_interferer_gives_zero_db() {
        // UE halfway between two identical cells; high SNR
        let s = co_channel_scenario(&[1000.0, 1200.0]);
        let m = model(&s, 0.0);
        let v = sinr(&m, (1100.0, 500.0), 0, &[true, true]);
        assert!(v.abs() < 0.01, "sinr {v}");
    }

    #[test]
    fn three_cells_match_summation_oracle() {
        let s = co_channel_scenario(&[300.0, 1400.0, 2600.0]);
        let m = model(&s, 6.0);
        let pos = (1000.0, 420.0);
        let rx: Vec<f64> = (0..3).map(|c| m.rx_power_dbm(c, pos)).collect();
        // independent linear-domain oracle, watts throughout
        let to_w = |dbm: f64| 10f64.powf((dbm - 30.0) / 10.0);
        let noise_w = to_w(-174.0 + 10.0 * 20e6f64.log10() + 9.0);
        let expected = to_w(rx[1]) / (noise_w + to_w(rx[0]) + to_w(rx[2]));
        let got = 10f64.powf(sinr(&m, pos, 1, &[true, true, true]) / 10.0);
        assert!(((got - expected) / expected).abs() < 1e-9, "{got} vs {expected}");
        // and kT at 290 K agrees to within the rounding of -174 dBm/Hz
        let kt_w = 1.380649e-23 * 290.0 * 20e6 * 10f64.powf(0.9);
        let physical = to_w(rx[1]) / (kt_w + to_w(rx[0]) + to_w(rx[2]));
        assert!(((got - physical) / physical).abs() < 1e-2);
    }

    #[test]
    fn off_cells_and_other_carriers_do_not_interfere() {
        let mut s = co_channel_scenario(&[300.0, 1400.0, 2600.0]);
        s.cells[2].carrier_hz = 3.655e9;
        let m = model(&s, 0.0);
        let pos = (1000.0, 500.0);
        let alone = sinr(&m, pos, 1, &[false, true, false]);
        let other_carrier = sinr(&m, pos, 1, &[false, true, true]);
        assert!((alone - other_carrier).abs() < 1e-12);
        assert!(sinr(&m, pos, 1, &[true, true, true]) < alone);
    }

    proptest! {
        #[test]
        fn more_interferers_never_help(x in 0.0f64..3000.0, y in 0.0f64..1000.0, mask in 0u8..8) {
            let s = co_channel_scenario(&[300.0, 1400.0, 2600.0, 2000.0]);
            let m = model(&s, 6.0);
            let small: Vec<bool> = (0..4).map(|c| c == 1 || (mask >> (c % 3)) & 1 == 1 && c != 3).collect();
            let mut big = small.clone();
            big[3] = true;
            big[0] = true;
            prop_assert!(sinr(&m, (x, y), 1, &big) <= sinr(&m, (x, y), 1, &small) + 1e-12);
        }
    }

    #[test]
    #[should_panic(expected = "not transmitting")]
    fn inactive_serving_cell_is_a_bug() {
        let s = co_channel_scenario(&[500.0]);
        let m = model(&s, 0.0);
        sinr(&m, (100.0, 100.0), 0, &[false]);
    }

    #[test]
    fn rsrp_same_pixel_same_shadowing() {
        let s = co_channel_scenario(&[500.0]);
        let cfg = PropagationConfig::default();
        let field = generate_shadow_field(&s, &cfg, 17);
        let site = &s.sites[0];
        let a = rsrp(&s.cells[0], 0, site, (1210.0, 310.0), &s.area, &field, &cfg);
        let b = rsrp(&s.cells[0], 0, site, (1290.0, 390.0), &s.area, &field, &cfg);
        let pl_a = path_loss(&s.cells[0], site, (1210.0, 310.0), &cfg);
        let pl_b = path_loss(&s.cells[0], site, (1290.0, 390.0), &cfg);
        let shadow_a = a.wideband_dbm - (46.0 - pl_a);
        let shadow_b = b.wideband_dbm - (46.0 - pl_b);
        assert!((shadow_a - shadow_b).abs() < 1e-9);
        let m = LinkModel::new(&s, field, cfg);
        assert!((m.rx_power_dbm(0, (1210.0, 310.0)) - a.wideband_dbm).abs() < 1e-9);
    }
}
