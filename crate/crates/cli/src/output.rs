use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::sync::{Arc, Mutex};

use anyhow::Context;
use tandem::apps::CoosPolicy;
use tandem::engine::{EventRecord, SweepRow, TimeseriesRow};
use tandem::ricbus::{LogRecord, LogSink, Message};

/// Streams every bus message as one JSON object per line. The first write
/// error is kept and later writes are skipped; read it back through the
/// [`SinkStatus`] returned by [`NdjsonSink::create`].
pub struct NdjsonSink {
    out: Option<BufWriter<File>>,
    status: SinkStatus,
}

#[derive(Clone)]
pub struct SinkStatus(Arc<Mutex<Option<io::Error>>>);

impl SinkStatus {
    pub fn check(&self) -> anyhow::Result<()> {
        match self.0.lock().unwrap().take() {
            Some(e) => Err(anyhow::Error::new(e).context("writing message log")),
            None => Ok(()),
        }
    }
}

impl NdjsonSink {
    pub fn create(path: &Path) -> anyhow::Result<(NdjsonSink, SinkStatus)> {
        let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        let status = SinkStatus(Arc::new(Mutex::new(None)));
        Ok((NdjsonSink { out: Some(BufWriter::new(file)), status: status.clone() }, status))
    }

    fn fail(&mut self, e: io::Error) {
        self.out = None;
        *self.status.0.lock().unwrap() = Some(e);
    }
}

impl LogSink for NdjsonSink {
    fn record(&mut self, msg: &Message) {
        let Some(out) = self.out.as_mut() else { return };
        let res = serde_json::to_writer(&mut *out, &LogRecord::of(msg))
            .map_err(io::Error::from)
            .and_then(|_| out.write_all(b"\n"));
        if let Err(e) = res {
            self.fail(e);
        }
    }
}

impl Drop for NdjsonSink {
    fn drop(&mut self) {
        if let Some(mut out) = self.out.take() {
            if let Err(e) = out.flush() {
                *self.status.0.lock().unwrap() = Some(e);
            }
        }
    }
}

fn writer(path: &Path) -> anyhow::Result<csv::Writer<File>> {
    csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))
}

pub fn write_timeseries(path: &Path, rows: &[TimeseriesRow]) -> anyhow::Result<()> {
    let mut w = writer(path)?;
    w.write_record(["t_s", "beta_sys_pct", "alpha_off", "alpha_on", "n_off", "power_w", "n_ues", "offered_bps"])?;
    for r in rows {
        w.write_record([
            r.t_s.to_string(),
            format!("{:.4}", r.beta_sys_pct),
            r.alpha_off.to_string(),
            r.alpha_on.to_string(),
            r.n_off.to_string(),
            format!("{:.3}", r.power_w),
            r.n_ues.to_string(),
            format!("{:.0}", r.offered_bps),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_events(path: &Path, events: &[EventRecord]) -> anyhow::Result<()> {
    let mut w = writer(path)?;
    for e in events {
        w.serialize(e)?;
    }
    if events.is_empty() {
        w.write_record(["t_s", "cell", "cell_id", "layer", "event", "forced"])?;
    }
    w.flush()?;
    Ok(())
}

/// The configured starting policy at `t = 0`, then every policy sent over A1.
pub fn write_policies(path: &Path, initial: CoosPolicy, sent: &[(f64, CoosPolicy)]) -> anyhow::Result<()> {
    let mut w = writer(path)?;
    w.write_record(["t_s", "alpha_off", "alpha_on", "target_outage_lo", "target_outage_hi"])?;
    for (t, p) in std::iter::once(&(0.0, initial)).chain(sent) {
        w.write_record([t, &p.alpha_off, &p.alpha_on, &p.target_outage_lo, &p.target_outage_hi].map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_sweep(path: &Path, rows: &[SweepRow]) -> anyhow::Result<()> {
    let mut w = writer(path)?;
    w.write_record(["kind", "goal_pct", "outage_pct", "power_w", "state_changes", "seed"])?;
    for r in rows {
        let kind = serde_json::to_value(r.kind)?;
        w.write_record([
            kind.as_str().unwrap_or_default().to_string(),
            r.goal_pct.map(|g| g.to_string()).unwrap_or_default(),
            format!("{:.4}", r.outage_pct),
            format!("{:.3}", r.power_w),
            r.state_changes.to_string(),
            r.seed.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
