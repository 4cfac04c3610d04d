//! CSV and JSON exports for traces and campaign tables.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use super::campaign::{Campaign, SummaryRow};
use super::episode::EpisodeTrace;
use super::metrics::EpisodeMetrics;
use super::BenchmarkError;

/// One row per step: `t, x0.., a0.., cost, min_cost, ess, degenerate` plus
/// `lateral, progress, friction` for the vehicle task.
pub fn write_trace_csv<W: Write>(trace: &EpisodeTrace, writer: W) -> Result<(), BenchmarkError> {
    let mut w = csv::Writer::from_writer(writer);
    let (n, m) = trace.steps.first().map_or((0, 0), |s| (s.state.len(), s.action.len()));
    let vehicle = trace.steps.first().is_some_and(|s| s.lateral.is_some());
    let mut header = vec!["t".to_string()];
    header.extend((0..n).map(|i| format!("x{i}")));
    header.extend((0..m).map(|j| format!("a{j}")));
    header.extend(["cost", "min_cost", "ess", "degenerate"].map(String::from));
    if vehicle {
        header.extend(["lateral", "progress", "friction"].map(String::from));
    }
    w.write_record(&header)?;
    // `{:?}` prints the shortest representation that round-trips exactly.
    let f = |v: f64| format!("{v:?}");
    for s in &trace.steps {
        let mut row = vec![f(s.t)];
        row.extend(s.state.iter().map(|&v| f(v)));
        row.extend(s.action.iter().map(|&v| f(v)));
        row.push(f(s.cost));
        row.push(f(s.diagnostics.min_cost));
        row.push(f(s.diagnostics.ess));
        row.push(u8::from(s.diagnostics.degenerate).to_string());
        if vehicle {
            row.extend([s.lateral, s.progress, s.friction].map(|v| f(v.unwrap_or(f64::NAN))));
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_trace_file(trace: &EpisodeTrace, path: impl AsRef<Path>) -> Result<(), BenchmarkError> {
    write_trace_csv(trace, BufWriter::new(File::create(path)?))
}

#[derive(Serialize)]
struct SummaryDoc<'a> {
    summary: &'a [SummaryRow],
    episodes: Vec<&'a EpisodeMetrics>,
}

/// Campaign summaries and every episode's metrics as pretty JSON.
pub fn write_summary_json(campaigns: &[Campaign], path: impl AsRef<Path>) -> Result<(), BenchmarkError> {
    let rows: Vec<SummaryRow> = campaigns.iter().map(Campaign::summary).collect();
    let doc = SummaryDoc { summary: &rows, episodes: campaigns.iter().flat_map(|c| &c.metrics).collect() };
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, &doc)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

/// Side-by-side table: one row per episode, then one `median` and one `iqr`
/// row per controller.
pub fn write_campaign_csv<W: Write>(campaigns: &[Campaign], writer: W) -> Result<(), BenchmarkError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "controller",
        "seed",
        "success",
        "chattering",
        "total_cost",
        "total_variation",
        "max_slip",
        "lap_time",
        "lane_violations",
    ])?;
    let opt = |v: Option<f64>| v.map(|x| format!("{x:?}")).unwrap_or_default();
    for c in campaigns {
        for e in &c.metrics {
            w.write_record([
                c.controller.as_str().to_string(),
                e.seed.to_string(),
                u8::from(e.success).to_string(),
                format!("{:?}", e.chattering),
                format!("{:?}", e.total_cost),
                format!("{:?}", e.total_variation),
                opt(e.max_slip),
                opt(e.lap_time),
                e.lane_violations.map(|v| v.to_string()).unwrap_or_default(),
            ])?;
        }
    }
    for c in campaigns {
        let s = c.summary();
        for (label, pick) in [("median", 0), ("iqr", 1)] {
            let g = |m: crate::benchmarks::MetricSummary| if pick == 0 { m.median } else { m.iqr };
            w.write_record([
                c.controller.as_str().to_string(),
                label.to_string(),
                if pick == 0 { format!("{:?}", s.success_rate) } else { String::new() },
                format!("{:?}", g(s.chattering)),
                format!("{:?}", g(s.total_cost)),
                format!("{:?}", g(s.total_variation)),
                opt(s.max_slip.map(g)),
                opt(s.lap_time.map(g)),
                String::new(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
