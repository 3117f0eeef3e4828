//! User arrivals and pedestrian mobility.
//!
//! Each pixel is an M/M/inf queue: sessions arrive as a Poisson process with
//! rate `mean_active_ues / mean_service_s`, so the stationary mean number of
//! concurrent users equals the pixel's profile value. Every user draws an
//! exponential demand and lifetime once, then wanders with a random-waypoint
//! model confined to a disk around its spawn point.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Poisson};
use serde::{Deserialize, Serialize};

use crate::scenario::{Area, Scenario, SlotStats, TrafficPixel, SLOTS_PER_DAY, SLOT_SECONDS};

pub type UeId = u64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ue {
    pub id: UeId,
    pub origin_pixel: usize,
    /// Spawn position; waypoints are drawn around it.
    pub origin: (f64, f64),
    pub pos: (f64, f64),
    pub waypoint: (f64, f64),
    pub speed_mps: f64,
    pub demand_bps: f64,
    pub spawned_at_s: f64,
    pub departs_at_s: f64,
    pub serving_cell: Option<usize>,
    pub achieved_bps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ArrivalConfig {
    pub mean_service_s: f64,
    pub waypoint_radius_m: f64,
    pub speed_range_mps: (f64, f64),
}

impl Default for ArrivalConfig {
    fn default() -> Self {
        ArrivalConfig { mean_service_s: 120.0, waypoint_radius_m: 200.0, speed_range_mps: (0.5, 1.5) }
    }
}

impl ArrivalConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.mean_service_s > 0.0) {
            return Err("mean_service_s must be positive".into());
        }
        if !(self.waypoint_radius_m >= 0.0) {
            return Err("waypoint_radius_m must be non-negative".into());
        }
        let (lo, hi) = self.speed_range_mps;
        if !(0.0 <= lo && lo <= hi) {
            return Err("speed_range_mps must satisfy 0 <= lo <= hi".into());
        }
        Ok(())
    }
}

/// Slot index (0..48) for simulated time `t_s` given the time of day at `t = 0`.
pub fn slot_at(t_s: f64, start_of_day_s: f64) -> usize {
    let tod = (t_s + start_of_day_s).rem_euclid(86_400.0);
    ((tod / SLOT_SECONDS) as usize).min(SLOTS_PER_DAY - 1)
}

/// Arrival rate (users per second) for a slot.
pub fn arrival_rate(stats: &SlotStats, cfg: &ArrivalConfig) -> f64 {
    stats.mean_active_ues / cfg.mean_service_s
}

/// Draws the sessions that start in one pixel during `[t_s, t_s + dt_s)`.
/// New users are positioned uniformly in the pixel `bounds`
/// (`x0, y0, x1, y1`).
#[allow(clippy::too_many_arguments)]
pub fn spawn_arrivals<R: Rng + ?Sized>(
    pixel: &TrafficPixel,
    pixel_index: usize,
    bounds: (f64, f64, f64, f64),
    slot: usize,
    t_s: f64,
    dt_s: f64,
    cfg: &ArrivalConfig,
    next_id: &mut UeId,
    rng: &mut R,
) -> Vec<Ue> {
    assert!(dt_s > 0.0, "dt must be positive");
    let stats = pixel.slots[slot];
    let lambda = arrival_rate(&stats, cfg) * dt_s;
    if lambda <= 0.0 {
        return Vec::new();
    }
    let count = Poisson::new(lambda).expect("finite positive rate").sample(rng) as usize;
    let demand = Exp::new(1.0 / stats.mean_demand_bps).expect("positive demand");
    let life = Exp::new(1.0 / cfg.mean_service_s).expect("positive service time");
    let (x0, y0, x1, y1) = bounds;
    (0..count)
        .map(|_| {
            let pos = (rng.random_range(x0..=x1), rng.random_range(y0..=y1));
            let mut demand_bps = demand.sample(rng);
            if demand_bps <= 0.0 {
                demand_bps = f64::MIN_POSITIVE;
            }
            let mut lifetime = life.sample(rng);
            if lifetime <= 0.0 {
                lifetime = f64::EPSILON;
            }
            let speed = sample_speed(cfg, rng);
            let id = *next_id;
            *next_id += 1;
            Ue {
                id,
                origin_pixel: pixel_index,
                origin: pos,
                pos,
                waypoint: pos,
                speed_mps: speed,
                demand_bps,
                spawned_at_s: t_s,
                departs_at_s: t_s + lifetime,
                serving_cell: None,
                achieved_bps: 0.0,
            }
        })
        .collect()
}

fn sample_speed<R: Rng + ?Sized>(cfg: &ArrivalConfig, rng: &mut R) -> f64 {
    let (lo, hi) = cfg.speed_range_mps;
    if hi > lo {
        rng.random_range(lo..hi)
    } else {
        lo
    }
}

fn draw_waypoint<R: Rng + ?Sized>(origin: (f64, f64), radius: f64, area: &Area, rng: &mut R) -> (f64, f64) {
    if radius <= 0.0 {
        return origin;
    }
    let r = radius * rng.random::<f64>().sqrt();
    let phi = rng.random_range(0.0..std::f64::consts::TAU);
    (
        (origin.0 + r * phi.cos()).clamp(0.0, area.width_m),
        (origin.1 + r * phi.sin()).clamp(0.0, area.height_m),
    )
}

/// Advances one user by `dt_s` along its current leg. On reaching the
/// waypoint a new one is drawn within `waypoint_radius_m` of the origin
/// (clipped to the area) together with a new speed.
pub fn step_mobility<R: Rng + ?Sized>(ue: &mut Ue, dt_s: f64, cfg: &ArrivalConfig, area: &Area, rng: &mut R) {
    assert!(dt_s > 0.0, "dt must be positive");
    let (dx, dy) = (ue.waypoint.0 - ue.pos.0, ue.waypoint.1 - ue.pos.1);
    let remaining = dx.hypot(dy);
    let step = ue.speed_mps * dt_s;
    if remaining > step {
        let f = step / remaining;
        ue.pos = (ue.pos.0 + dx * f, ue.pos.1 + dy * f);
    } else {
        ue.pos = ue.waypoint;
        ue.waypoint = draw_waypoint(ue.origin, cfg.waypoint_radius_m, area, rng);
        ue.speed_mps = sample_speed(cfg, rng);
    }
}

/// Per-pixel arrival streams plus one mobility stream, all derived from a
/// single seed. Pixel `p` always draws from stream `p`, so results do not
/// depend on how pixels are iterated.
#[derive(Debug, Clone)]
pub struct TrafficGenerator {
    pixel_rngs: Vec<ChaCha8Rng>,
    mobility_rng: ChaCha8Rng,
    next_id: UeId,
    cfg: ArrivalConfig,
}

impl TrafficGenerator {
    pub fn new(n_pixels: usize, cfg: ArrivalConfig, seed: u64) -> TrafficGenerator {
        let pixel_rngs = (0..n_pixels)
            .map(|p| {
                let mut r = ChaCha8Rng::seed_from_u64(seed);
                r.set_stream(p as u64 + 1);
                r
            })
            .collect();
        let mut mobility_rng = ChaCha8Rng::seed_from_u64(seed);
        mobility_rng.set_stream(0);
        TrafficGenerator { pixel_rngs, mobility_rng, next_id: 0, cfg }
    }

    pub fn config(&self) -> &ArrivalConfig {
        &self.cfg
    }

    /// Sessions starting anywhere in the scenario during `[t_s, t_s + dt_s)`,
    /// ordered by pixel and then by id.
    pub fn spawn(&mut self, scenario: &Scenario, slot: usize, t_s: f64, dt_s: f64) -> Vec<Ue> {
        let mut out = Vec::new();
        for (p, pixel) in scenario.pixels.iter().enumerate() {
            let bounds = scenario.area.pixel_bounds(p);
            out.extend(spawn_arrivals(
                pixel,
                p,
                bounds,
                slot,
                t_s,
                dt_s,
                &self.cfg,
                &mut self.next_id,
                &mut self.pixel_rngs[p],
            ));
        }
        out
    }

    pub fn move_ue(&mut self, ue: &mut Ue, dt_s: f64, area: &Area) {
        step_mobility(ue, dt_s, &self.cfg, area, &mut self.mobility_rng);
    }
}
