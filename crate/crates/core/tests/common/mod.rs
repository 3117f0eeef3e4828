#![allow(dead_code)]

use tandem::scenario::{generate_synthetic, GeneratorConfig, Preset, Scenario};

/// Generator seed of the desk-scale reference scenario.
pub const DESK_SEED: u64 = 1;
pub const DESK_MAX_CELLS: usize = 20;
pub const DESK_MARGIN_M: f64 = 300.0;

/// The dt-like preset reduced to at most 20 cells.
pub fn desk_scenario() -> Scenario {
    generate_synthetic(&GeneratorConfig::preset(Preset::DtLike), DESK_SEED)
        .unwrap()
        .reduce_to_cells(DESK_MAX_CELLS, DESK_MARGIN_M)
        .unwrap()
}

pub fn small_scenario(seed: u64) -> Scenario {
    generate_synthetic(&GeneratorConfig::preset(Preset::Small), seed).unwrap()
}
