//! Synthetic road grids, traces and fleets with known ground truth.

use std::io::Write;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use super::geo::LatLon;
use super::graph::{Directed, RoadEdge, RoadGraph, RoadNode, SpeedTable};
use super::trace::{Trace, TracePoint};
use crate::{Error, Result};

/// Where generated grids are anchored unless told otherwise.
pub const DEFAULT_ANCHOR: LatLon = LatLon { lat: 1.3521, lon: 103.8198 };

const GRID_ROAD_TYPE: &str = "local";

/// A `rows × cols` lattice of two-way local streets; row `r` runs east-west
/// at `r · spacing` meters north of the anchor.
#[derive(Debug, Clone)]
pub struct GridNetwork {
    rows: usize,
    cols: usize,
    graph: RoadGraph,
}

impl GridNetwork {
    pub fn new(rows: usize, cols: usize, spacing_m: f64) -> Result<Self> {
        Self::anchored(rows, cols, spacing_m, DEFAULT_ANCHOR)
    }

    pub fn anchored(rows: usize, cols: usize, spacing_m: f64, anchor: LatLon) -> Result<Self> {
        if rows < 2 || cols < 2 {
            return Err(Error::Precondition("a grid needs at least 2 rows and 2 columns".into()));
        }
        if !(spacing_m > 0.0 && spacing_m.is_finite()) {
            return Err(Error::Precondition("grid spacing must be positive".into()));
        }
        let speed = SpeedTable::default().speed(GRID_ROAD_TYPE).expect("local roads have a default speed");
        let proj = super::geo::Projection::new(anchor);
        let mut nodes = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                nodes.push(RoadNode {
                    id: format!("n{r}_{c}"),
                    pos: proj.to_latlon([c as f64 * spacing_m, r as f64 * spacing_m]),
                });
            }
        }
        let mut edges = Vec::new();
        let mut street = |id: String, from: usize, to: usize| {
            edges.push(RoadEdge {
                id,
                from,
                to,
                length_m: spacing_m,
                speed_mps: speed,
                road_type: GRID_ROAD_TYPE.to_string(),
            })
        };
        for r in 0..rows {
            for c in 0..cols {
                if c + 1 < cols {
                    street(format!("h{r}_{c}"), r * cols + c, r * cols + c + 1);
                }
                if r + 1 < rows {
                    street(format!("v{r}_{c}"), r * cols + c, (r + 1) * cols + c);
                }
            }
        }
        Ok(Self { rows, cols, graph: RoadGraph::new(nodes, edges)? })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn graph(&self) -> &RoadGraph {
        &self.graph
    }

    pub fn node(&self, row: usize, col: usize) -> usize {
        row * self.cols + col
    }

    /// Route visiting the waypoints in order along straight rows or columns.
    pub fn route(&self, waypoints: &[(usize, usize)]) -> Result<Vec<Directed>> {
        if waypoints.iter().any(|&(r, c)| r >= self.rows || c >= self.cols) {
            return Err(Error::Precondition("waypoint outside the grid".into()));
        }
        let mut out = Vec::new();
        for w in waypoints.windows(2) {
            let ((mut r, mut c), (r1, c1)) = (w[0], w[1]);
            if r != r1 && c != c1 {
                return Err(Error::Precondition("consecutive waypoints must share a row or column".into()));
            }
            while (r, c) != (r1, c1) {
                let (nr, nc) = (step(r, r1), step(c, c1));
                let d =
                    self.graph.edge_between(self.node(r, c), self.node(nr, nc)).expect("grid neighbours are joined");
                out.push(d);
                (r, c) = (nr, nc);
            }
        }
        Ok(out)
    }

    /// Random trips whose routes realize the planted θ mixture.
    ///
    /// A component with θ = 0 drives a shortest route. Otherwise the trip
    /// drives its column past the destination row by `d` blocks, crosses, and
    /// comes back, for a route `2d` blocks longer than the Manhattan distance
    /// `m`; `d` is chosen so that `2d / m` is within 10% of the target. The
    /// recorded planted θ is the exact route-time ratio minus one.
    pub fn fleet(&self, spec: &FleetSpec) -> Result<Vec<SynthTrip>> {
        spec.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let total_weight: f64 = spec.mixture.iter().map(|m| m.weight).sum();
        let mut trips = Vec::with_capacity(spec.trips);
        for i in 0..spec.trips {
            let mut pick = rng.random::<f64>() * total_weight;
            let component = spec
                .mixture
                .iter()
                .find(|m| {
                    pick -= m.weight;
                    pick < 0.0
                })
                .unwrap_or(&spec.mixture[spec.mixture.len() - 1]);
            let (origin, destination, route) = self.planted_route(component.theta, &mut rng)?;
            let trip_id = format!("trip{i:05}");
            let trace = synth_trace(&self.graph, &trip_id, &route, &spec.trace, &mut rng)?;
            let best = self.graph.best_free_flow_time(origin, destination)?;
            let driven: f64 = route.iter().map(|d| self.graph.edges()[d.edge].free_flow_time()).sum();
            trips.push(SynthTrip { trace, route, planted_theta: driven / best - 1.0 });
        }
        Ok(trips)
    }

    fn planted_route(&self, theta: f64, rng: &mut ChaCha8Rng) -> Result<(usize, usize, Vec<Directed>)> {
        const ATTEMPTS: usize = 100_000;
        for _ in 0..ATTEMPTS {
            let (r0, c0) = (rng.random_range(0..self.rows), rng.random_range(0..self.cols));
            let (r1, c1) = (rng.random_range(0..self.rows), rng.random_range(0..self.cols));
            let (o, t) = (self.node(r0, c0), self.node(r1, c1));
            if o == t {
                continue;
            }
            if theta == 0.0 {
                return Ok((o, t, self.graph.shortest_route(o, t)?.1));
            }
            if c0 == c1 || r0 == r1 {
                continue;
            }
            let m = (r0.abs_diff(r1) + c0.abs_diff(c1)) as f64;
            let d = ((theta * m / 2.0).round() as usize).max(1);
            if ((2 * d) as f64 / m - theta).abs() > 0.1 * theta {
                continue;
            }
            let turn = if r1 > r0 { r1 + d } else { r1.wrapping_sub(d) };
            if turn >= self.rows {
                continue;
            }
            let route = self.route(&[(r0, c0), (turn, c0), (turn, c1), (r1, c1)])?;
            return Ok((o, t, route));
        }
        Err(Error::Precondition(format!("grid too small to plant θ = {theta}")))
    }
}

fn step(from: usize, to: usize) -> usize {
    match from.cmp(&to) {
        std::cmp::Ordering::Less => from + 1,
        std::cmp::Ordering::Greater => from - 1,
        std::cmp::Ordering::Equal => from,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceSpec {
    pub sample_interval_s: f64,
    /// Standard deviation of the isotropic Gaussian position error.
    pub noise_std_m: f64,
    /// Probability of dropping each point other than the first and last.
    pub drop_prob: f64,
}

impl Default for TraceSpec {
    fn default() -> Self {
        Self { sample_interval_s: 3.0, noise_std_m: 5.0, drop_prob: 0.05 }
    }
}

impl TraceSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.sample_interval_s > 0.0 && self.sample_interval_s.is_finite()) {
            return Err(Error::Precondition("sample interval must be positive".into()));
        }
        if !(self.noise_std_m >= 0.0 && self.noise_std_m.is_finite()) {
            return Err(Error::Precondition("noise must be nonnegative".into()));
        }
        if !(0.0..1.0).contains(&self.drop_prob) {
            return Err(Error::Precondition("drop probability must be in [0, 1)".into()));
        }
        Ok(())
    }
}

/// Samples a trip driving `route` at free-flow speed, starting at time 0.
pub fn synth_trace<R: Rng + ?Sized>(
    graph: &RoadGraph,
    trip_id: &str,
    route: &[Directed],
    spec: &TraceSpec,
    rng: &mut R,
) -> Result<Trace> {
    spec.validate()?;
    if route.is_empty() {
        return Err(Error::Precondition("route is empty".into()));
    }
    if route.windows(2).any(|w| graph.target(w[0]) != graph.source(w[1])) {
        return Err(Error::Precondition("route edges are not contiguous".into()));
    }
    let times: Vec<f64> = route.iter().map(|d| graph.edges()[d.edge].free_flow_time()).collect();
    let total: f64 = times.iter().sum();
    let noise = Normal::new(0.0, spec.noise_std_m).map_err(|e| Error::Precondition(e.to_string()))?;
    let proj = graph.projection();

    let position = |s: f64| {
        let mut left = s;
        for (d, &t) in route.iter().zip(&times) {
            if left <= t {
                let (a, b) = (graph.xy(graph.source(*d)), graph.xy(graph.target(*d)));
                let f = left / t;
                return [a[0] + f * (b[0] - a[0]), a[1] + f * (b[1] - a[1])];
            }
            left -= t;
        }
        graph.xy(graph.target(route[route.len() - 1]))
    };

    let mut stamps = Vec::new();
    let mut k = 0usize;
    while (k as f64) * spec.sample_interval_s < total - 1e-9 {
        stamps.push(k as f64 * spec.sample_interval_s);
        k += 1;
    }
    stamps.push(total);

    let last = stamps.len() - 1;
    let mut points = Vec::with_capacity(stamps.len());
    for (i, &s) in stamps.iter().enumerate() {
        let keep = i == 0 || i == last || rng.random::<f64>() >= spec.drop_prob;
        let xy = position(s);
        let xy = if spec.noise_std_m > 0.0 { [xy[0] + noise.sample(rng), xy[1] + noise.sample(rng)] } else { xy };
        if keep {
            points.push(TracePoint { timestamp: s, pos: proj.to_latlon(xy) });
        }
    }
    Trace::new(trip_id, points)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixtureComponent {
    pub weight: f64,
    pub theta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FleetSpec {
    pub trips: usize,
    pub mixture: Vec<MixtureComponent>,
    pub trace: TraceSpec,
    pub seed: u64,
}

impl FleetSpec {
    /// Half shortest-path trips, the rest split between modest and long detours.
    pub fn default_mixture() -> Vec<MixtureComponent> {
        vec![
            MixtureComponent { weight: 0.5, theta: 0.0 },
            MixtureComponent { weight: 0.3, theta: 0.5 },
            MixtureComponent { weight: 0.2, theta: 1.5 },
        ]
    }

    pub fn validate(&self) -> Result<()> {
        self.trace.validate()?;
        if self.mixture.is_empty() {
            return Err(Error::Precondition("mixture is empty".into()));
        }
        for m in &self.mixture {
            if !(m.weight > 0.0 && m.weight.is_finite()) || !(m.theta >= 0.0 && m.theta.is_finite()) {
                return Err(Error::Precondition("mixture weights must be positive and θ nonnegative".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthTrip {
    pub trace: Trace,
    pub route: Vec<Directed>,
    pub planted_theta: f64,
}

#[derive(Serialize)]
struct PlantedRow<'a> {
    trip_id: &'a str,
    planted_deviation: f64,
    planted_theta: f64,
}

/// `trip_id,planted_deviation,planted_theta` ground truth.
pub fn write_planted_csv<W: Write>(trips: &[SynthTrip], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for t in trips {
        w.serialize(PlantedRow {
            trip_id: t.trace.trip_id(),
            planted_deviation: 1.0 + t.planted_theta,
            planted_theta: t.planted_theta,
        })?;
    }
    w.flush()?;
    Ok(())
}
