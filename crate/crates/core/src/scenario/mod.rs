//! Network topology and traffic description.
//!
//! A [`Scenario`] is an immutable description of the simulated area: base
//! station sites, the cells they carry (split into a coverage layer that is
//! never switched off and capacity layers that may be), and a regular grid of
//! traffic pixels, each with 48 half-hour demand statistics.
//!
//! Scenarios are stored as a single JSON document (see
//! `docs/scenario-schema.md`). [`Scenario::from_json_str`] validates every
//! invariant and reports all violations at once.

mod neighbors;
mod synth;

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::ran::PowerParams;

pub use neighbors::{build_neighbor_map, NeighborMap, DEFAULT_NEIGHBOR_RADIUS_M};
pub use synth::{generate_synthetic, GeneratorConfig, LayerSpec, Preset};

/// Current scenario file format version.
pub const SCENARIO_VERSION: u32 = 1;
/// Number of traffic slots in a day.
pub const SLOTS_PER_DAY: usize = 48;
/// Duration of one traffic slot.
pub const SLOT_SECONDS: f64 = 1800.0;
pub const DEFAULT_PIXEL_SIZE_M: f64 = 100.0;

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("cannot read scenario file: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed scenario file: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid scenario:\n{}", format_violations(.0))]
    Invalid(Vec<Violation>),
    #[error("infeasible generator parameters: {0}")]
    Infeasible(String),
}

fn format_violations(v: &[Violation]) -> String {
    v.iter().map(|v| format!("  {v}")).collect::<Vec<_>>().join("\n")
}

/// A single violated invariant, located by a JSON-style field path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub path: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Environment {
    UrbanMacro,
    UrbanMicro,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layer {
    /// Always-on cells guaranteeing area coverage.
    Coverage,
    /// Cells that the controller may switch off.
    Capacity,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Area {
    pub width_m: f64,
    pub height_m: f64,
    #[serde(default = "default_pixel_size")]
    pub pixel_size_m: f64,
}

fn default_pixel_size() -> f64 {
    DEFAULT_PIXEL_SIZE_M
}

impl Area {
    pub fn nx(&self) -> usize {
        (self.width_m / self.pixel_size_m).ceil() as usize
    }

    pub fn ny(&self) -> usize {
        (self.height_m / self.pixel_size_m).ceil() as usize
    }

    pub fn pixel_count(&self) -> usize {
        self.nx() * self.ny()
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        (0.0..=self.width_m).contains(&x) && (0.0..=self.height_m).contains(&y)
    }

    /// Row-major index of the pixel containing `(x, y)`. Points on the far
    /// edges belong to the last row/column.
    pub fn pixel_index(&self, x: f64, y: f64) -> usize {
        let ix = ((x / self.pixel_size_m).floor().max(0.0) as usize).min(self.nx() - 1);
        let iy = ((y / self.pixel_size_m).floor().max(0.0) as usize).min(self.ny() - 1);
        iy * self.nx() + ix
    }

    /// Bounds `(x0, y0, x1, y1)` of a pixel, clipped to the area.
    pub fn pixel_bounds(&self, index: usize) -> (f64, f64, f64, f64) {
        let ix = index % self.nx();
        let iy = index / self.nx();
        let p = self.pixel_size_m;
        let x0 = ix as f64 * p;
        let y0 = iy as f64 * p;
        (x0, y0, (x0 + p).min(self.width_m), (y0 + p).min(self.height_m))
    }

    pub fn pixel_center(&self, index: usize) -> (f64, f64) {
        let (x0, y0, x1, y1) = self.pixel_bounds(index);
        (0.5 * (x0 + x1), 0.5 * (y0 + y1))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Site {
    pub id: String,
    pub x: f64,
    pub y: f64,
    pub environment: Environment,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellDef {
    pub id: String,
    pub site_id: String,
    pub carrier_hz: f64,
    pub bandwidth_hz: f64,
    pub n_prb: u32,
    pub tx_power_dbm: f64,
    pub height_m: f64,
    /// Boresight direction, degrees clockwise from the +y axis. `None` means
    /// an omnidirectional antenna.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub azimuth_deg: Option<f64>,
    #[serde(default)]
    pub tilt_deg: f64,
    /// Cell individual offset, dB: added to this cell's RSRP when cells are
    /// ranked for attachment and handover. Received power is unaffected.
    #[serde(default)]
    pub cio_db: f64,
    pub layer: Layer,
    /// Power model parameters; derived from layer and carrier when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub power: Option<PowerParams>,
}

impl CellDef {
    pub fn power_params(&self) -> PowerParams {
        self.power.unwrap_or_else(|| PowerParams::default_for(self))
    }

    pub fn prb_bandwidth_hz(&self) -> f64 {
        self.bandwidth_hz / self.n_prb as f64
    }

    pub fn is_switchable(&self) -> bool {
        self.layer == Layer::Capacity
    }
}

/// Per-slot traffic statistics of one pixel. Serialized as a two-element
/// array `[mean_active_ues, mean_demand_bps]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "(f64, f64)", into = "(f64, f64)")]
pub struct SlotStats {
    pub mean_active_ues: f64,
    pub mean_demand_bps: f64,
}

impl From<(f64, f64)> for SlotStats {
    fn from((mean_active_ues, mean_demand_bps): (f64, f64)) -> Self {
        SlotStats { mean_active_ues, mean_demand_bps }
    }
}

impl From<SlotStats> for (f64, f64) {
    fn from(s: SlotStats) -> Self {
        (s.mean_active_ues, s.mean_demand_bps)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrafficPixel {
    pub ix: usize,
    pub iy: usize,
    pub slots: Vec<SlotStats>,
}

impl TrafficPixel {
    /// A pixel whose statistics are the same in every slot.
    pub fn flat(ix: usize, iy: usize, mean_active_ues: f64, mean_demand_bps: f64) -> Self {
        TrafficPixel {
            ix,
            iy,
            slots: vec![SlotStats { mean_active_ues, mean_demand_bps }; SLOTS_PER_DAY],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub version: u32,
    pub area: Area,
    #[serde(default)]
    pub seed_shadowing: u64,
    pub sites: Vec<Site>,
    pub cells: Vec<CellDef>,
    pub pixels: Vec<TrafficPixel>,
}

impl Scenario {
    /// Parses and validates a scenario document. Pixels are reordered
    /// row-major so that `pixels[iy * nx + ix]` is pixel `(ix, iy)`.
    pub fn from_json_str(text: &str) -> Result<Scenario, ScenarioError> {
        let mut scenario: Scenario = serde_json::from_str(text)?;
        scenario.normalize();
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(self).expect("scenario serializes")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ScenarioError> {
        std::fs::write(path, self.to_json_string())?;
        Ok(())
    }

    fn normalize(&mut self) {
        self.pixels.sort_by_key(|p| (p.iy, p.ix));
    }

    /// Checks every invariant and returns all violations found.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let mut v = Vec::new();
        let mut bad = |path: String, message: String| v.push(Violation { path, message });

        if self.version != SCENARIO_VERSION {
            bad("version".into(), format!("unsupported version {} (expected {SCENARIO_VERSION})", self.version));
        }
        let area = &self.area;
        let area_ok = area.width_m > 0.0 && area.height_m > 0.0 && area.pixel_size_m > 0.0;
        if !(area.width_m > 0.0) {
            bad("area.width_m".into(), "must be positive".into());
        }
        if !(area.height_m > 0.0) {
            bad("area.height_m".into(), "must be positive".into());
        }
        if !(area.pixel_size_m > 0.0) {
            bad("area.pixel_size_m".into(), "must be positive".into());
        }

        let mut site_ids = HashSet::new();
        for (i, s) in self.sites.iter().enumerate() {
            if !site_ids.insert(s.id.as_str()) {
                bad(format!("sites[{i}].id"), format!("duplicate site id \"{}\"", s.id));
            }
            if area_ok && !area.contains(s.x, s.y) {
                bad(format!("sites[{i}]"), format!("site \"{}\" at ({}, {}) lies outside the area", s.id, s.x, s.y));
            }
        }

        let mut cell_ids = HashSet::new();
        for (i, c) in self.cells.iter().enumerate() {
            if !cell_ids.insert(c.id.as_str()) {
                bad(format!("cells[{i}].id"), format!("duplicate cell id \"{}\"", c.id));
            }
            if !site_ids.contains(c.site_id.as_str()) {
                bad(format!("cells[{i}].site_id"), format!("unknown site \"{}\"", c.site_id));
            }
            if c.n_prb == 0 {
                bad(format!("cells[{i}].n_prb"), "must be positive".into());
            }
            if !(c.bandwidth_hz > 0.0) {
                bad(format!("cells[{i}].bandwidth_hz"), "must be positive".into());
            }
            if !(c.carrier_hz > 0.0) {
                bad(format!("cells[{i}].carrier_hz"), "must be positive".into());
            }
            if !(c.height_m > 0.0) {
                bad(format!("cells[{i}].height_m"), "must be positive".into());
            }
            if !(-24.0..=24.0).contains(&c.cio_db) {
                bad(format!("cells[{i}].cio_db"), "must lie in [-24, 24] dB".into());
            }
            if let Some(p) = c.power {
                if !(p.p_sleep_w < p.p0_w) {
                    bad(format!("cells[{i}].power"), "p_sleep_w must be below p0_w".into());
                }
                if p.p0_w < 0.0 || p.p_sleep_w < 0.0 || p.delta_p < 0.0 || p.p_tx_max_w < 0.0 {
                    bad(format!("cells[{i}].power"), "parameters must be non-negative".into());
                }
            }
        }
        if !self.cells.iter().any(|c| c.layer == Layer::Coverage) {
            bad("cells".into(), "at least one cell must belong to the coverage layer".into());
        }

        if area_ok {
            let (nx, ny) = (area.nx(), area.ny());
            let expected = nx * ny;
            if self.pixels.len() != expected {
                bad(
                    "pixels".into(),
                    format!("expected {expected} pixels ({nx} x {ny}) but found {}", self.pixels.len()),
                );
            }
            let mut seen = HashSet::new();
            for (i, p) in self.pixels.iter().enumerate() {
                if p.ix >= nx || p.iy >= ny {
                    bad(format!("pixels[{i}]"), format!("index ({}, {}) outside the {nx} x {ny} grid", p.ix, p.iy));
                } else if !seen.insert((p.ix, p.iy)) {
                    bad(format!("pixels[{i}]"), format!("duplicate pixel ({}, {})", p.ix, p.iy));
                }
                if p.slots.len() != SLOTS_PER_DAY {
                    bad(format!("pixels[{i}].slots"), format!("expected {SLOTS_PER_DAY} slots, found {}", p.slots.len()));
                }
                for (k, s) in p.slots.iter().enumerate() {
                    if !(s.mean_active_ues >= 0.0) || !s.mean_active_ues.is_finite() {
                        bad(format!("pixels[{i}].slots[{k}][0]"), "mean_active_ues must be finite and >= 0".into());
                    }
                    if !(s.mean_demand_bps > 0.0) || !s.mean_demand_bps.is_finite() {
                        bad(format!("pixels[{i}].slots[{k}][1]"), "mean_demand_bps must be finite and > 0".into());
                    }
                }
            }
        }

        if v.is_empty() {
            Ok(())
        } else {
            Err(ScenarioError::Invalid(v))
        }
    }

    pub fn site_of(&self, cell: usize) -> &Site {
        let id = &self.cells[cell].site_id;
        self.sites.iter().find(|s| &s.id == id).expect("validated site reference")
    }

    /// Site index for every cell, in cell order.
    pub fn cell_sites(&self) -> Vec<usize> {
        let by_id: HashMap<&str, usize> =
            self.sites.iter().enumerate().map(|(i, s)| (s.id.as_str(), i)).collect();
        self.cells.iter().map(|c| by_id[c.site_id.as_str()]).collect()
    }

    pub fn cell_index(&self, id: &str) -> Option<usize> {
        self.cells.iter().position(|c| c.id == id)
    }

    pub fn count_layer(&self, layer: Layer) -> usize {
        self.cells.iter().filter(|c| c.layer == layer).count()
    }

    /// Keeps the sites closest to the area center until adding the next site
    /// would exceed `max_cells`, then crops the pixel grid to the bounding box
    /// of the kept sites plus `margin_m` (snapped to whole pixels). The
    /// cropped area is re-anchored at the origin.
    pub fn reduce_to_cells(&self, max_cells: usize, margin_m: f64) -> Result<Scenario, ScenarioError> {
        let (cx, cy) = (self.area.width_m / 2.0, self.area.height_m / 2.0);
        let mut order: Vec<usize> = (0..self.sites.len()).collect();
        let dist = |i: usize| (self.sites[i].x - cx).hypot(self.sites[i].y - cy);
        order.sort_by(|&a, &b| dist(a).total_cmp(&dist(b)).then(a.cmp(&b)));

        let mut kept = Vec::new();
        let mut n_cells = 0;
        for i in order {
            let id = &self.sites[i].id;
            let k = self.cells.iter().filter(|c| &c.site_id == id).count();
            if n_cells + k > max_cells {
                break;
            }
            n_cells += k;
            kept.push(i);
        }
        kept.sort_unstable();
        let kept_ids: HashSet<&str> = kept.iter().map(|&i| self.sites[i].id.as_str()).collect();
        let cells: Vec<CellDef> =
            self.cells.iter().filter(|c| kept_ids.contains(c.site_id.as_str())).cloned().collect();
        if !cells.iter().any(|c| c.layer == Layer::Coverage) {
            return Err(ScenarioError::Infeasible(format!(
                "no coverage cell fits within {max_cells} cells"
            )));
        }

        let p = self.area.pixel_size_m;
        let xs = kept.iter().map(|&i| self.sites[i].x);
        let ys = kept.iter().map(|&i| self.sites[i].y);
        let x_min = xs.clone().fold(f64::INFINITY, f64::min) - margin_m;
        let x_max = xs.fold(f64::NEG_INFINITY, f64::max) + margin_m;
        let y_min = ys.clone().fold(f64::INFINITY, f64::min) - margin_m;
        let y_max = ys.fold(f64::NEG_INFINITY, f64::max) + margin_m;
        let (nx, ny) = (self.area.nx(), self.area.ny());
        let ix0 = ((x_min / p).floor().max(0.0) as usize).min(nx - 1);
        let iy0 = ((y_min / p).floor().max(0.0) as usize).min(ny - 1);
        let ix1 = ((x_max / p).ceil() as usize).clamp(ix0 + 1, nx);
        let iy1 = ((y_max / p).ceil() as usize).clamp(iy0 + 1, ny);

        let x_off = ix0 as f64 * p;
        let y_off = iy0 as f64 * p;
        let width = (ix1 as f64 * p).min(self.area.width_m) - x_off;
        let height = (iy1 as f64 * p).min(self.area.height_m) - y_off;
        let area = Area { width_m: width, height_m: height, pixel_size_m: p };

        let sites = kept
            .iter()
            .map(|&i| {
                let s = &self.sites[i];
                Site { x: s.x - x_off, y: s.y - y_off, ..s.clone() }
            })
            .collect();
        let mut pixels = Vec::with_capacity((ix1 - ix0) * (iy1 - iy0));
        for iy in iy0..iy1 {
            for ix in ix0..ix1 {
                let src = &self.pixels[iy * nx + ix];
                pixels.push(TrafficPixel { ix: ix - ix0, iy: iy - iy0, slots: src.slots.clone() });
            }
        }
        let reduced = Scenario {
            version: self.version,
            area,
            seed_shadowing: self.seed_shadowing,
            sites,
            cells,
            pixels,
        };
        reduced.validate()?;
        Ok(reduced)
    }
}

/// Reads, parses and validates a scenario file.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario, ScenarioError> {
    let text = std::fs::read_to_string(path)?;
    Scenario::from_json_str(&text)
}
