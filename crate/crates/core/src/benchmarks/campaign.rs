//! Multi-seed campaigns and their median/IQR summaries.

use serde::{Deserialize, Serialize};

use super::episode::{run_episode, EpisodeTrace};
use super::experiment::Scenario;
use super::metrics::EpisodeMetrics;
use super::BenchmarkError;
use crate::controllers::ControllerKind;
use crate::parallel::{map_indexed, with_jobs, ExecMode};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub median: f64,
    pub iqr: f64,
}

impl MetricSummary {
    /// Median and inter-quartile range with linear interpolation between
    /// order statistics. NaN for an empty input.
    pub fn of(values: &[f64]) -> Self {
        let mut v: Vec<f64> = values.to_vec();
        v.sort_by(f64::total_cmp);
        Self { median: quantile(&v, 0.5), iqr: quantile(&v, 0.75) - quantile(&v, 0.25) }
    }
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub controller: ControllerKind,
    pub episodes: usize,
    pub success_rate: f64,
    pub chattering: MetricSummary,
    pub total_cost: MetricSummary,
    pub total_variation: MetricSummary,
    pub max_slip: Option<MetricSummary>,
    pub lap_time: Option<MetricSummary>,
}

#[derive(Debug, Clone)]
pub struct Campaign {
    pub controller: ControllerKind,
    pub traces: Vec<EpisodeTrace>,
    pub metrics: Vec<EpisodeMetrics>,
}

impl Campaign {
    pub fn summary(&self) -> SummaryRow {
        let m = &self.metrics;
        let col = |f: fn(&EpisodeMetrics) -> f64| m.iter().map(f).collect::<Vec<_>>();
        let opt = |f: fn(&EpisodeMetrics) -> Option<f64>| {
            let v: Vec<f64> = m.iter().filter_map(f).collect();
            (!v.is_empty()).then(|| MetricSummary::of(&v))
        };
        SummaryRow {
            controller: self.controller,
            episodes: m.len(),
            success_rate: m.iter().filter(|e| e.success).count() as f64 / m.len().max(1) as f64,
            chattering: MetricSummary::of(&col(|e| e.chattering)),
            total_cost: MetricSummary::of(&col(|e| e.total_cost)),
            total_variation: MetricSummary::of(&col(|e| e.total_variation)),
            max_slip: opt(|e| e.max_slip),
            lap_time: opt(|e| e.lap_time),
        }
    }
}

/// Runs one episode per seed on up to `jobs` threads. Episodes are
/// independent, so the result does not depend on `jobs`.
pub fn run_campaign(scenario: &Scenario, seeds: &[u64], jobs: usize) -> Result<Campaign, BenchmarkError> {
    scenario.validate()?;
    let mode = if jobs > 1 { ExecMode::Parallel } else { ExecMode::Sequential };
    let results = with_jobs(jobs, || {
        map_indexed(seeds.len(), mode, |i| {
            run_episode(scenario, seeds[i])
        })
    });
    let traces = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    let metrics = traces.iter().map(EpisodeMetrics::from_trace).collect();
    Ok(Campaign { controller: scenario.controller, traces, metrics })
}

/// One campaign per controller on otherwise identical scenarios.
pub fn run_comparison(
    scenario: &Scenario,
    controllers: &[ControllerKind],
    seeds: &[u64],
    jobs: usize,
) -> Result<Vec<Campaign>, BenchmarkError> {
    if controllers.is_empty() {
        return Err(BenchmarkError::Config("no controllers to compare".into()));
    }
    controllers.iter().map(|&c| run_campaign(&scenario.with_controller(c), seeds, jobs)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantiles() {
        let s = MetricSummary::of(&[4.0, 1.0, 3.0, 2.0, 5.0]);
        assert_eq!(s.median, 3.0);
        assert_eq!(s.iqr, 2.0);
        let s = MetricSummary::of(&[7.0]);
        assert_eq!((s.median, s.iqr), (7.0, 0.0));
        let s = MetricSummary::of(&[1.0, 2.0]);
        assert_eq!(s.median, 1.5);
        assert!(MetricSummary::of(&[]).median.is_nan());
    }
}
