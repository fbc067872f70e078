//! Snapping traces to edges and recovering the traversed route.

use super::graph::{Directed, RoadGraph};
use super::trace::Trace;
use crate::{Error, Result};

/// A stretch of the trip not covered by matched edges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gap {
    pub from: usize,
    pub to: usize,
    /// Straight-line distance between the bounding nodes.
    pub length_m: f64,
    pub elapsed_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Step {
    Edge(Directed),
    Gap(Gap),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchedRoute {
    pub origin: usize,
    pub destination: usize,
    pub steps: Vec<Step>,
}

impl MatchedRoute {
    pub fn edges(&self) -> impl Iterator<Item = Directed> + '_ {
        self.steps.iter().filter_map(|s| match s {
            Step::Edge(d) => Some(*d),
            Step::Gap(_) => None,
        })
    }

    pub fn gaps(&self) -> impl Iterator<Item = &Gap> + '_ {
        self.steps.iter().filter_map(|s| match s {
            Step::Gap(g) => Some(g),
            Step::Edge(_) => None,
        })
    }
}

/// Consecutive points snapped to one edge.
#[derive(Debug, Clone, Copy)]
struct Run {
    edge: usize,
    first_time: f64,
    last_time: f64,
    /// Positions along the edge (0 at `from`, 1 at `to`).
    first_at: f64,
    last_at: f64,
    min_at: f64,
    max_at: f64,
}

impl Run {
    fn absorb(&mut self, later: &Run) {
        self.last_time = later.last_time;
        self.last_at = later.last_at;
        self.min_at = self.min_at.min(later.min_at);
        self.max_at = self.max_at.max(later.max_at);
    }

    /// Whether every point of the run lies within `radius` of `node`, one of
    /// the edge's endpoints.
    fn hugs(&self, graph: &RoadGraph, node: usize, radius: f64) -> bool {
        let e = &graph.edges()[self.edge];
        if e.from == node {
            self.max_at * e.length_m <= radius
        } else {
            e.to == node && (1.0 - self.min_at) * e.length_m <= radius
        }
    }
}

/// Maps a trace to a directed edge sequence with explicit gaps.
///
/// Each point snaps to the nearest edge within `snap_radius` (ties go to the
/// lower edge index); points farther than that are ignored. Repeated edges
/// collapse, and short excursions onto side streets at an intersection are
/// removed. Each edge is then oriented so that its endpoints line up with its
/// neighbours, and every place where consecutive edges do not join becomes a
/// gap. The trip starts and ends at the nodes nearest to its first and last
/// points.
pub fn match_trace(graph: &RoadGraph, trace: &Trace, snap_radius: f64) -> Result<MatchedRoute> {
    if !(snap_radius > 0.0) {
        return Err(Error::Precondition("snap radius must be positive".into()));
    }
    let proj = graph.projection();
    let mut runs: Vec<Run> = Vec::new();
    for p in trace.points() {
        let Some((edge, _, at)) = graph.nearest_edge(proj.to_xy(p.pos), snap_radius) else { continue };
        let run = Run {
            edge,
            first_time: p.timestamp,
            last_time: p.timestamp,
            first_at: at,
            last_at: at,
            min_at: at,
            max_at: at,
        };
        match runs.last_mut() {
            Some(last) if last.edge == edge => last.absorb(&run),
            _ => runs.push(run),
        }
    }
    if runs.is_empty() {
        return Err(Error::NoMatch { radius: snap_radius });
    }

    let points = trace.points();
    let origin = graph.nearest_node(proj.to_xy(points[0].pos));
    let destination = graph.nearest_node(proj.to_xy(points[points.len() - 1].pos));
    remove_spurs(graph, &mut runs, origin, destination, snap_radius);

    let oriented = orient(graph, &runs, origin, destination);
    let mut steps = Vec::with_capacity(oriented.len() + 2);
    let mut at_node = origin;
    let mut at_time = points[0].timestamp;
    for (run, d) in runs.iter().zip(&oriented) {
        let source = graph.source(*d);
        if source != at_node {
            steps.push(Step::Gap(gap(graph, at_node, source, run.first_time - at_time)));
        }
        steps.push(Step::Edge(*d));
        at_node = graph.target(*d);
        at_time = run.last_time;
    }
    if at_node != destination {
        let end_time = points[points.len() - 1].timestamp;
        steps.push(Step::Gap(gap(graph, at_node, destination, end_time - at_time)));
    }
    Ok(MatchedRoute { origin, destination, steps })
}

fn gap(graph: &RoadGraph, from: usize, to: usize, elapsed_s: f64) -> Gap {
    Gap { from, to, length_m: graph.node_distance(from, to), elapsed_s: elapsed_s.max(0.0) }
}

fn incident(graph: &RoadGraph, edge: usize, node: usize) -> bool {
    let e = &graph.edges()[edge];
    e.from == node || e.to == node
}

fn shared_node(graph: &RoadGraph, a: usize, b: usize) -> Option<usize> {
    let e = &graph.edges()[a];
    [e.from, e.to].into_iter().find(|&x| incident(graph, b, x))
}

/// Drops side-street excursions: an edge touching the node where its two
/// neighbours meet, an edge seen only near the node it shares with one
/// neighbour while missing the other, and leading or trailing edges that
/// only touch the trip's end node alongside the next edge in.
fn remove_spurs(graph: &RoadGraph, runs: &mut Vec<Run>, origin: usize, destination: usize, radius: f64) {
    loop {
        let mut changed = false;

        let mut j = 1;
        while j + 1 < runs.len() {
            let (a, b, c) = (runs[j - 1].edge, runs[j].edge, runs[j + 1].edge);
            let ea = &graph.edges()[a];
            let spur = [ea.from, ea.to].into_iter().any(|x| incident(graph, c, x) && incident(graph, b, x));
            let stub = match (shared_node(graph, a, b), shared_node(graph, b, c)) {
                (Some(x), None) => runs[j].hugs(graph, x, radius),
                (None, Some(x)) => runs[j].hugs(graph, x, radius),
                _ => false,
            };
            let spur = spur || stub;
            if spur {
                runs.remove(j);
                if runs[j - 1].edge == runs[j].edge {
                    let later = runs.remove(j);
                    runs[j - 1].absorb(&later);
                }
                changed = true;
            } else {
                j += 1;
            }
        }

        while runs.len() >= 2 && incident(graph, runs[0].edge, origin) && incident(graph, runs[1].edge, origin) {
            runs.remove(0);
            changed = true;
        }
        while runs.len() >= 2 {
            let n = runs.len();
            if incident(graph, runs[n - 1].edge, destination) && incident(graph, runs[n - 2].edge, destination) {
                runs.pop();
                changed = true;
            } else {
                break;
            }
        }

        if !changed {
            return;
        }
    }
}

/// Picks each edge's direction to minimize the distance from the previous
/// edge's end to its start plus the distance from its end to the nearer
/// endpoint of the next edge (or the destination). Ties follow the order in
/// which the points moved along the edge.
fn orient(graph: &RoadGraph, runs: &[Run], origin: usize, destination: usize) -> Vec<Directed> {
    let mut out = Vec::with_capacity(runs.len());
    let mut prev = origin;
    for (j, run) in runs.iter().enumerate() {
        let score = |d: Directed| {
            let target = graph.target(d);
            let ahead = match runs.get(j + 1) {
                Some(next) => {
                    let e = &graph.edges()[next.edge];
                    graph.node_distance(target, e.from).min(graph.node_distance(target, e.to))
                }
                None => graph.node_distance(target, destination),
            };
            graph.node_distance(prev, graph.source(d)) + ahead
        };
        let forward = Directed { edge: run.edge, forward: true };
        let backward = Directed { edge: run.edge, forward: false };
        let (sf, sb) = (score(forward), score(backward));
        let tol = 1e-9 * (1.0 + sf.abs().max(sb.abs()));
        let backwards = if (sf - sb).abs() > tol { sb < sf } else { run.last_at < run.first_at };
        let chosen = if backwards { backward } else { forward };
        prev = graph.target(chosen);
        out.push(chosen);
    }
    out
}
