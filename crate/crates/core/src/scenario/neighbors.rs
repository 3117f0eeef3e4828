use super::Scenario;

pub const DEFAULT_NEIGHBOR_RADIUS_M: f64 = 1500.0;

/// Symmetric, loop-free neighbor relation between cells, indexed by cell
/// position in [`Scenario::cells`]. Each list is sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeighborMap {
    lists: Vec<Vec<usize>>,
}

impl NeighborMap {
    pub fn from_lists(lists: Vec<Vec<usize>>) -> Self {
        NeighborMap { lists }
    }

    pub fn neighbors(&self, cell: usize) -> &[usize] {
        &self.lists[cell]
    }

    pub fn len(&self) -> usize {
        self.lists.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lists.is_empty()
    }

    pub fn are_neighbors(&self, a: usize, b: usize) -> bool {
        self.lists[a].binary_search(&b).is_ok()
    }
}

/// Two distinct cells are neighbors when their sites are at most `radius_m`
/// apart. Co-sited cells (distance 0) are always neighbors.
pub fn build_neighbor_map(scenario: &Scenario, radius_m: f64) -> NeighborMap {
    assert!(radius_m > 0.0, "neighbor radius must be positive");
    let sites = scenario.cell_sites();
    let pos: Vec<(f64, f64)> = sites.iter().map(|&s| (scenario.sites[s].x, scenario.sites[s].y)).collect();
    let n = scenario.cells.len();
    let mut lists = vec![Vec::new(); n];
    for a in 0..n {
        for b in (a + 1)..n {
            let d = (pos[a].0 - pos[b].0).hypot(pos[a].1 - pos[b].1);
            if d <= radius_m {
                lists[a].push(b);
                lists[b].push(a);
            }
        }
    }
    for l in &mut lists {
        l.sort_unstable();
    }
    NeighborMap { lists }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{Area, CellDef, Environment, Layer, Site, TrafficPixel};

    fn line_scenario(xs: &[f64], cells_per_site: usize) -> Scenario {
        let sites: Vec<Site> = xs
            .iter()
            .enumerate()
            .map(|(i, &x)| Site { id: format!("s{i}"), x, y: 0.0, environment: Environment::UrbanMacro })
            .collect();
        let mut cells = Vec::new();
        for s in &sites {
            for k in 0..cells_per_site {
                cells.push(CellDef {
                    id: format!("{}c{k}", s.id),
                    site_id: s.id.clone(),
                    carrier_hz: if k == 0 { 773e6 } else { 2.16e9 },
                    bandwidth_hz: 10e6,
                    n_prb: 52,
                    tx_power_dbm: 46.0,
                    height_m: 25.0,
                    azimuth_deg: None,
                    tilt_deg: 0.0,
                    cio_db: 0.0,
                    layer: if k == 0 { Layer::Coverage } else { Layer::Capacity },
                    power: None,
                });
            }
        }
        let width = xs.iter().cloned().fold(1.0, f64::max);
        let area = Area { width_m: width, height_m: 100.0, pixel_size_m: 100.0 };
        let pixels = (0..area.pixel_count()).map(|i| TrafficPixel::flat(i % area.nx(), 0, 0.1, 1e6)).collect();
        Scenario { version: 1, area, seed_shadowing: 0, sites, cells, pixels }
    }

    #[test]
    fn co_sited_cells_are_neighbors() {
        let s = line_scenario(&[0.0], 2);
        let m = build_neighbor_map(&s, 1.0);
        assert_eq!(m.neighbors(0), &[1]);
        assert_eq!(m.neighbors(1), &[0]);
    }

    #[test]
    fn distant_sites_are_not_neighbors() {
        let s = line_scenario(&[0.0, 2000.0], 1);
        let m = build_neighbor_map(&s, 1500.0);
        assert!(m.neighbors(0).is_empty());
        assert!(m.neighbors(1).is_empty());
    }

    #[test]
    fn three_sites_match_all_pairs_oracle() {
        let xs = [0.0, 1000.0, 2500.0];
        let s = line_scenario(&xs, 2);
        let m = build_neighbor_map(&s, 1500.0);
        // cells 2,3 sit on site 1; cells 4,5 on site 2
        assert!(m.neighbors(2).contains(&0) && m.neighbors(2).contains(&1));
        assert!(m.neighbors(0).contains(&2) && !m.neighbors(0).contains(&4));
        assert!(m.neighbors(2).contains(&4));
        for a in 0..s.cells.len() {
            for b in 0..s.cells.len() {
                let d = (xs[a / 2] - xs[b / 2]).abs();
                assert_eq!(m.are_neighbors(a, b), a != b && d <= 1500.0, "pair ({a},{b})");
            }
        }
    }
}
