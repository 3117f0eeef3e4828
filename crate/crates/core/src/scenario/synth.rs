//! Synthetic scenario generator.
//!
//! Produces site layouts, cell layers and per-pixel traffic profiles whose
//! statistics stay inside configured bands: the mean number of active users
//! per pixel and the mean per-user demand. A few Gaussian hotspots shape the
//! spatial distribution and a raised-cosine curve shapes the daily one.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{
    Area, CellDef, Environment, Layer, Scenario, ScenarioError, Site, SlotStats, TrafficPixel,
    SCENARIO_VERSION, SLOTS_PER_DAY,
};
use crate::ran::PowerParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub layer: Layer,
    pub carrier_hz: f64,
    pub bandwidth_hz: f64,
    pub n_prb: u32,
    pub tx_power_dbm: f64,
    /// Total number of cells in this layer, spread round-robin over sites.
    pub total_cells: usize,
    /// Restricts the layer to the first `n` sites.
    #[serde(default)]
    pub max_sites: Option<usize>,
    #[serde(default)]
    pub power: Option<PowerParams>,
    /// Cell individual offset given to every cell of the layer, dB.
    #[serde(default)]
    pub cio_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub width_m: f64,
    pub height_m: f64,
    pub pixel_size_m: f64,
    pub sites: usize,
    /// The last `micro_sites` sites use the street-canyon micro model.
    pub micro_sites: usize,
    pub min_site_separation_m: f64,
    pub macro_height_m: f64,
    pub micro_height_m: f64,
    pub layers: Vec<LayerSpec>,
    /// Band for the per-pixel mean number of active users.
    pub ue_range: (f64, f64),
    /// Band for the per-pixel mean user demand, bits/s.
    pub demand_range_bps: (f64, f64),
    /// 0 gives a flat daily profile; 1 drops the quietest slot to the band floor.
    pub diurnal_amplitude: f64,
    pub peak_hour: f64,
    pub hotspots: usize,
    pub hotspot_radius_m: f64,
    /// Exponent applied to the normalized spatial intensity; values above 1
    /// concentrate traffic in the hotspots.
    pub spatial_skew: f64,
    /// Exponent applied to the per-pixel demand level; values above 1 keep
    /// most pixels near the low end of `demand_range_bps`.
    #[serde(default = "default_demand_skew")]
    pub demand_skew: f64,
}

fn default_demand_skew() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// 13 sites and 60 cells over a 66 x 81 pixel grid (6.55 x 8.05 km).
    DtLike,
    /// 3 sites, 9 cells over 2 x 2 km; intended for quick tests.
    Small,
}

impl std::str::FromStr for Preset {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dt-like" => Ok(Preset::DtLike),
            "small" => Ok(Preset::Small),
            other => Err(format!("unknown preset \"{other}\" (expected dt-like or small)")),
        }
    }
}

impl GeneratorConfig {
    pub fn preset(preset: Preset) -> GeneratorConfig {
        let coverage = |n| LayerSpec {
            layer: Layer::Coverage,
            carrier_hz: 773e6,
            bandwidth_hz: 10e6,
            n_prb: 52,
            tx_power_dbm: 46.0,
            total_cells: n,
            max_sites: None,
            power: None,
            cio_db: 0.0,
        };
        let mid = |n| LayerSpec {
            layer: Layer::Capacity,
            carrier_hz: 2160e6,
            bandwidth_hz: 20e6,
            n_prb: 106,
            tx_power_dbm: 46.0,
            total_cells: n,
            max_sites: None,
            power: None,
            cio_db: 0.0,
        };
        let high = |n, sites| LayerSpec {
            layer: Layer::Capacity,
            carrier_hz: 3655e6,
            bandwidth_hz: 40e6,
            n_prb: 106,
            tx_power_dbm: 43.0,
            total_cells: n,
            max_sites: Some(sites),
            power: None,
            cio_db: 0.0,
        };
        match preset {
            Preset::DtLike => GeneratorConfig {
                width_m: 6550.0,
                height_m: 8050.0,
                pixel_size_m: 100.0,
                sites: 13,
                micro_sites: 3,
                min_site_separation_m: 1300.0,
                macro_height_m: 25.0,
                micro_height_m: 10.0,
                layers: vec![coverage(15), LayerSpec { cio_db: 12.0, ..mid(39) }, LayerSpec { cio_db: 12.0, ..high(6, 2) }],
                ue_range: (0.01, 0.21),
                demand_range_bps: (0.56e6, 19e6),
                diurnal_amplitude: 0.85,
                peak_hour: 20.0,
                hotspots: 8,
                hotspot_radius_m: 600.0,
                spatial_skew: 2.5,
                demand_skew: 30.0,
            },
            Preset::Small => GeneratorConfig {
                width_m: 2000.0,
                height_m: 2000.0,
                pixel_size_m: 100.0,
                sites: 3,
                micro_sites: 0,
                min_site_separation_m: 700.0,
                macro_height_m: 25.0,
                micro_height_m: 10.0,
                layers: vec![coverage(3), mid(6)],
                ue_range: (0.01, 0.21),
                demand_range_bps: (0.56e6, 19e6),
                diurnal_amplitude: 0.85,
                peak_hour: 20.0,
                hotspots: 2,
                hotspot_radius_m: 400.0,
                spatial_skew: 1.5,
                demand_skew: 4.0,
            },
        }
    }

    fn check(&self) -> Result<(), ScenarioError> {
        let fail = |m: String| Err(ScenarioError::Infeasible(m));
        if !(self.width_m > 0.0 && self.height_m > 0.0 && self.pixel_size_m > 0.0) {
            return fail("area and pixel size must be positive".into());
        }
        if !(self.spatial_skew > 0.0 && self.demand_skew > 0.0) {
            return fail("spatial_skew and demand_skew must be positive".into());
        }
        if self.sites == 0 {
            return fail("at least one site is required".into());
        }
        if self.micro_sites > self.sites {
            return fail(format!("{} micro sites requested but only {} sites", self.micro_sites, self.sites));
        }
        let coverage: Vec<_> = self.layers.iter().filter(|l| l.layer == Layer::Coverage).collect();
        match coverage.as_slice() {
            [] => return fail("no coverage layer requested".into()),
            [l] if l.total_cells == 0 => return fail("zero coverage cells requested".into()),
            [l] if l.total_cells < self.sites || l.max_sites.is_some_and(|m| m < self.sites) => {
                return fail(format!(
                    "coverage layer must reach every site ({} cells for {} sites)",
                    l.total_cells, self.sites
                ))
            }
            [_] => {}
            _ => return fail("exactly one coverage layer is allowed".into()),
        }
        for l in &self.layers {
            if l.n_prb == 0 || !(l.bandwidth_hz > 0.0) || !(l.carrier_hz > 0.0) {
                return fail(format!("layer at {} Hz needs positive carrier, bandwidth and PRB count", l.carrier_hz));
            }
            if l.max_sites == Some(0) && l.total_cells > 0 {
                return fail(format!("layer at {} Hz has cells but no sites", l.carrier_hz));
            }
        }
        let (lo, hi) = self.ue_range;
        if !(0.0 <= lo && lo <= hi) {
            return fail(format!("invalid user range ({lo}, {hi})"));
        }
        let (lo, hi) = self.demand_range_bps;
        if !(0.0 < lo && lo <= hi) {
            return fail(format!("invalid demand range ({lo}, {hi})"));
        }
        if !(0.0..=1.0).contains(&self.diurnal_amplitude) {
            return fail("diurnal amplitude must lie in [0, 1]".into());
        }
        Ok(())
    }
}

/// Builds a scenario from `cfg`. Identical `(cfg, seed)` pairs produce
/// identical scenarios.
pub fn generate_synthetic(cfg: &GeneratorConfig, seed: u64) -> Result<Scenario, ScenarioError> {
    cfg.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let area = Area { width_m: cfg.width_m, height_m: cfg.height_m, pixel_size_m: cfg.pixel_size_m };

    let sites = place_sites(cfg, &mut rng);
    let cells = assign_cells(cfg, &sites);
    let pixels = traffic_profiles(cfg, &area, &mut rng);

    let scenario = Scenario {
        version: SCENARIO_VERSION,
        area,
        seed_shadowing: rng.random(),
        sites,
        cells,
        pixels,
    };
    scenario.validate()?;
    Ok(scenario)
}

fn place_sites(cfg: &GeneratorConfig, rng: &mut ChaCha8Rng) -> Vec<Site> {
    let margin_x = (cfg.width_m * 0.08).min(600.0);
    let margin_y = (cfg.height_m * 0.08).min(600.0);
    let mut separation = cfg.min_site_separation_m;
    let mut points: Vec<(f64, f64)> = Vec::with_capacity(cfg.sites);
    let mut attempts = 0;
    while points.len() < cfg.sites {
        let x = rng.random_range(margin_x..=cfg.width_m - margin_x);
        let y = rng.random_range(margin_y..=cfg.height_m - margin_y);
        if points.iter().all(|&(px, py)| (px - x).hypot(py - y) >= separation) {
            points.push((x, y));
            attempts = 0;
        } else {
            attempts += 1;
            if attempts > 2000 {
                separation *= 0.9;
                attempts = 0;
            }
        }
    }
    let first_micro = cfg.sites - cfg.micro_sites;
    points
        .into_iter()
        .enumerate()
        .map(|(i, (x, y))| Site {
            id: format!("s{:02}", i + 1),
            x: x.round(),
            y: y.round(),
            environment: if i >= first_micro { Environment::UrbanMicro } else { Environment::UrbanMacro },
        })
        .collect()
}

fn assign_cells(cfg: &GeneratorConfig, sites: &[Site]) -> Vec<CellDef> {
    let mut cells = Vec::new();
    for spec in &cfg.layers {
        let n_sites = spec.max_sites.unwrap_or(sites.len()).min(sites.len());
        let mut per_site = vec![0usize; n_sites];
        for k in 0..spec.total_cells {
            per_site[k % n_sites] += 1;
        }
        for (si, &count) in per_site.iter().enumerate() {
            let site = &sites[si];
            let height = match site.environment {
                Environment::UrbanMacro => cfg.macro_height_m,
                Environment::UrbanMicro => cfg.micro_height_m,
            };
            for sector in 0..count {
                let azimuth = (count > 1).then(|| 360.0 * sector as f64 / count as f64);
                cells.push(CellDef {
                    id: format!("{}-{}-{}", site.id, (spec.carrier_hz / 1e6).round(), sector + 1),
                    site_id: site.id.clone(),
                    carrier_hz: spec.carrier_hz,
                    bandwidth_hz: spec.bandwidth_hz,
                    n_prb: spec.n_prb,
                    tx_power_dbm: spec.tx_power_dbm,
                    height_m: height,
                    azimuth_deg: azimuth,
                    tilt_deg: 6.0,
                    cio_db: spec.cio_db,
                    layer: spec.layer,
                    power: spec.power,
                });
            }
        }
    }
    cells
}

/// Shape of the daily profile at `hour`, in `[1 - amplitude, 1]`.
fn diurnal_shape(hour: f64, amplitude: f64, peak_hour: f64) -> f64 {
    1.0 - amplitude + amplitude * 0.5 * (1.0 + (2.0 * PI * (hour - peak_hour) / 24.0).cos())
}

fn traffic_profiles(cfg: &GeneratorConfig, area: &Area, rng: &mut ChaCha8Rng) -> Vec<TrafficPixel> {
    let hotspots: Vec<(f64, f64, f64)> = (0..cfg.hotspots)
        .map(|_| {
            (
                rng.random_range(0.0..cfg.width_m),
                rng.random_range(0.0..cfg.height_m),
                rng.random_range(0.5..1.0),
            )
        })
        .collect();
    let n = area.pixel_count();
    let r2 = 2.0 * cfg.hotspot_radius_m.powi(2);
    let mut intensity = Vec::with_capacity(n);
    let mut demand_mix = Vec::with_capacity(n);
    for p in 0..n {
        let (x, y) = area.pixel_center(p);
        let bump: f64 = hotspots
            .iter()
            .map(|&(hx, hy, w)| w * (-((x - hx).powi(2) + (y - hy).powi(2)) / r2).exp())
            .sum();
        intensity.push(0.15 * rng.random::<f64>() + bump);
        demand_mix.push(rng.random::<f64>());
    }
    let max = intensity.iter().cloned().fold(0.0, f64::max);
    let norm: Vec<f64> = intensity
        .iter()
        .map(|&v| if max > 0.0 { (v / max).powf(cfg.spatial_skew) } else { 0.0 })
        .collect();

    let shapes: Vec<f64> = (0..SLOTS_PER_DAY)
        .map(|k| diurnal_shape((k as f64 + 0.5) * 0.5, cfg.diurnal_amplitude, cfg.peak_hour))
        .collect();
    let demand_shapes: Vec<f64> = (0..SLOTS_PER_DAY)
        .map(|k| diurnal_shape((k as f64 + 0.5) * 0.5, 0.3 * cfg.diurnal_amplitude, cfg.peak_hour))
        .collect();

    let (ue_lo, ue_hi) = cfg.ue_range;
    let (d_lo, d_hi) = cfg.demand_range_bps;
    let nx = area.nx();
    (0..n)
        .map(|p| {
            let level = norm[p];
            let demand_level = demand_mix[p].powf(cfg.demand_skew);
            let slots = (0..SLOTS_PER_DAY)
                .map(|k| {
                    let ues = ue_lo + (ue_hi - ue_lo) * level * shapes[k];
                    let x = (demand_level * demand_shapes[k]).clamp(0.0, 1.0);
                    let demand = d_lo * (d_hi / d_lo).powf(x);
                    SlotStats {
                        mean_active_ues: ues.clamp(ue_lo, ue_hi),
                        mean_demand_bps: demand.clamp(d_lo, d_hi),
                    }
                })
                .collect();
            TrafficPixel { ix: p % nx, iy: p / nx, slots }
        })
        .collect()
}
