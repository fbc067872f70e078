use std::io::Write;

use serde::Serialize;

use super::graph::RoadGraph;
use super::matching::{match_trace, MatchedRoute, Step};
use super::trace::Trace;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorConfig {
    pub snap_radius_m: f64,
    /// Gaps at least this long are filled with a shortest path.
    pub small_gap_threshold_m: f64,
    /// Worker threads for [`estimate_all`]; 0 picks the available parallelism.
    pub threads: usize,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self { snap_radius_m: 30.0, small_gap_threshold_m: 300.0, threads: 0 }
    }
}

impl EstimatorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.snap_radius_m > 0.0 && self.snap_radius_m.is_finite()) {
            return Err(Error::Precondition("snap radius must be positive".into()));
        }
        if !(self.small_gap_threshold_m >= 0.0) {
            return Err(Error::Precondition("small gap threshold must be nonnegative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct GapReport {
    pub small: usize,
    pub large: usize,
    pub small_length_m: f64,
    pub large_length_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TripEstimate {
    pub trip_id: String,
    pub origin: String,
    pub destination: String,
    pub best_ff: f64,
    pub data_ff: f64,
    pub deviation: f64,
    pub theta_hat: f64,
    pub gaps: GapReport,
}

/// Free-flow time of a matched route.
///
/// Matched edges contribute their free-flow time. A gap shorter than the
/// threshold is crossed in a straight line at the mean free-flow speed of
/// the edges on either side of it; a longer gap takes the fastest route
/// between its end nodes.
pub fn data_free_flow_time(
    graph: &RoadGraph,
    matched: &MatchedRoute,
    small_gap_threshold_m: f64,
) -> Result<(f64, GapReport)> {
    if matched.steps.is_empty() {
        return Ok((0.0, GapReport::default()));
    }
    let edge_speed = |s: Option<&Step>| match s {
        Some(Step::Edge(d)) => Some(graph.edges()[d.edge].speed_mps),
        _ => None,
    };
    let mut total = 0.0;
    let mut report = GapReport::default();
    for (i, step) in matched.steps.iter().enumerate() {
        match step {
            Step::Edge(d) => total += graph.edges()[d.edge].free_flow_time(),
            Step::Gap(g) if g.length_m < small_gap_threshold_m => {
                let before = if i > 0 { edge_speed(matched.steps.get(i - 1)) } else { None };
                let speeds: Vec<f64> = [before, edge_speed(matched.steps.get(i + 1))].into_iter().flatten().collect();
                if speeds.is_empty() {
                    return Err(Error::Precondition("a gap is not bounded by any matched edge".into()));
                }
                let speed = speeds.iter().sum::<f64>() / speeds.len() as f64;
                total += g.length_m / speed;
                report.small += 1;
                report.small_length_m += g.length_m;
            }
            Step::Gap(g) => {
                total += graph.best_free_flow_time(g.from, g.to)?;
                report.large += 1;
                report.large_length_m += g.length_m;
            }
        }
    }
    Ok((total, report))
}

pub fn estimate_trip(graph: &RoadGraph, trace: &Trace, config: &EstimatorConfig) -> Result<TripEstimate> {
    config.validate()?;
    let matched = match_trace(graph, trace, config.snap_radius_m)?;
    let best_ff = graph.best_free_flow_time(matched.origin, matched.destination)?;
    if best_ff <= 0.0 {
        return Err(Error::Precondition(format!("trip {} starts and ends at the same node", trace.trip_id())));
    }
    let (data_ff, gaps) = data_free_flow_time(graph, &matched, config.small_gap_threshold_m)?;
    let deviation = data_ff / best_ff;
    Ok(TripEstimate {
        trip_id: trace.trip_id().to_string(),
        origin: graph.nodes()[matched.origin].id.clone(),
        destination: graph.nodes()[matched.destination].id.clone(),
        best_ff,
        data_ff,
        deviation,
        theta_hat: deviation - 1.0,
        gaps,
    })
}

/// Estimates every trip, in input order, spreading the work over threads.
pub fn estimate_all(graph: &RoadGraph, traces: &[Trace], config: &EstimatorConfig) -> Vec<Result<TripEstimate>> {
    let threads = match config.threads {
        0 => std::thread::available_parallelism().map_or(1, |n| n.get()),
        n => n,
    }
    .min(traces.len().max(1));
    if threads <= 1 {
        return traces.iter().map(|t| estimate_trip(graph, t, config)).collect();
    }
    let chunk = traces.len().div_ceil(threads);
    std::thread::scope(|scope| {
        let handles: Vec<_> = traces
            .chunks(chunk)
            .map(|part| scope.spawn(move || part.iter().map(|t| estimate_trip(graph, t, config)).collect::<Vec<_>>()))
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("estimation worker panicked")).collect()
    })
}

#[derive(Serialize)]
struct Row<'a> {
    trip_id: &'a str,
    best_ff_s: f64,
    data_ff_s: f64,
    deviation: f64,
    theta_hat: f64,
    n_small_gaps: usize,
    n_large_gaps: usize,
}

pub fn write_estimates_csv<W: Write>(estimates: &[TripEstimate], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for e in estimates {
        w.serialize(Row {
            trip_id: &e.trip_id,
            best_ff_s: e.best_ff,
            data_ff_s: e.data_ff,
            deviation: e.deviation,
            theta_hat: e.theta_hat,
            n_small_gaps: e.gaps.small,
            n_large_gaps: e.gaps.large,
        })?;
    }
    w.flush()?;
    Ok(())
}
