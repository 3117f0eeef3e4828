use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use anyhow::Context;
use tandem::ricbus::{Counters, Interface, Kind, LogRecord};

use crate::Failure;

pub struct Stats {
    pub counters: Counters,
    pub first_t_s: Option<f64>,
    pub last_t_s: Option<f64>,
    /// Window start -> per-interface counts.
    pub windows: BTreeMap<u64, [u64; 3]>,
}

fn iface_index(i: Interface) -> usize {
    Interface::ALL.iter().position(|&x| x == i).unwrap()
}

pub fn collect(path: &Path, window_s: Option<f64>) -> Result<Stats, Failure> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut stats = Stats { counters: Counters::default(), first_t_s: None, last_t_s: None, windows: BTreeMap::new() };
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.with_context(|| format!("reading {}", path.display()))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: LogRecord = serde_json::from_str(&line)
            .map_err(|e| Failure::Validation(format!("{}:{}: {e}", path.display(), n + 1)))?;
        stats.counters.add(rec.interface, rec.kind, 1).map_err(|e| Failure::Runtime(e.into()))?;
        stats.first_t_s.get_or_insert(rec.t_s);
        stats.last_t_s = Some(rec.t_s);
        if let Some(w) = window_s {
            let slot = (rec.t_s / w).floor() as u64;
            stats.windows.entry(slot).or_default()[iface_index(rec.interface)] += 1;
        }
    }
    Ok(stats)
}

pub fn cmd_msgstats(path: &Path, window_s: Option<f64>) -> Result<(), Failure> {
    if let Some(w) = window_s {
        if !(w > 0.0) {
            return Err(Failure::Validation(format!("--window must be positive (got {w})")));
        }
    }
    let stats = collect(path, window_s)?;
    let c = &stats.counters;
    println!("{:<10} {:<18} {:>12}", "interface", "kind", "count");
    for (iface, kind, n) in c.entries() {
        if n > 0 {
            println!("{:<10} {:<18} {:>12}", iface.to_string(), kind.to_string(), n);
        }
    }
    println!();
    let span = match (stats.first_t_s, stats.last_t_s) {
        (Some(a), Some(b)) if b > a => b - a,
        _ => 0.0,
    };
    for iface in Interface::ALL {
        let total = c.total(iface);
        if span > 0.0 {
            println!("{iface} total {total} ({:.1} per minute)", total as f64 * 60.0 / span);
        } else {
            println!("{iface} total {total}");
        }
    }
    let e2 = Interface::E2;
    println!(
        "E2 control_req {} control_ack {} indication {}",
        c.get(e2, Kind::ControlReq),
        c.get(e2, Kind::ControlAck),
        c.get(e2, Kind::Indication)
    );
    println!("all interfaces {}", c.grand_total());
    println!("identity total = sum of kinds: {}", if c.identity_holds() { "holds" } else { "BROKEN" });

    if let Some(w) = window_s {
        println!();
        println!("{:>10} {:>10} {:>10} {:>10}", "t_s", "E2", "A1", "O1");
        for (slot, counts) in &stats.windows {
            println!("{:>10} {:>10} {:>10} {:>10}", *slot as f64 * w, counts[0], counts[1], counts[2]);
        }
    }
    Ok(())
}
