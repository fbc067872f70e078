//! Per-trip θ estimation from location traces on a road network.
//!
//! A trip's best free-flow time is the shortest-path time between its snapped
//! endpoints; its data free-flow time is the free-flow time of the route it
//! actually took, recovered by snapping points to edges and filling the holes.
//! Their ratio is the trip's deviation and `deviation - 1` its θ estimate.

pub mod geo;
pub mod graph;
pub mod matching;
pub mod pipeline;
pub mod stats;
pub mod synth;
pub mod trace;

pub use geo::LatLon;
pub use graph::{Directed, RoadEdge, RoadGraph, RoadNode, SpeedTable};
pub use matching::{match_trace, Gap, MatchedRoute, Step};
pub use pipeline::{
    data_free_flow_time, estimate_all, estimate_trip, write_estimates_csv, EstimatorConfig, GapReport, TripEstimate,
};
pub use stats::{deviation_distribution, DeviationSummary, THRESHOLDS};
pub use trace::{read_traces, write_traces_csv, Trace, TracePoint};
