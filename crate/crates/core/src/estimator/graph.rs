//! Road network with free-flow travel times.
//!
//! Every edge row is a two-way road segment; traversal in either direction
//! takes `length / speed` seconds.

use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};

use serde::Deserialize;

use super::geo::{planar_distance, point_segment, LatLon, Projection};
use crate::shortest_path::{dijkstra, shortest_path, Digraph};
use crate::{Error, Result};

/// Side of the square cells of the segment index, in meters.
const CELL_M: f64 = 100.0;

#[derive(Debug, Clone, PartialEq)]
pub struct RoadNode {
    pub id: String,
    pub pos: LatLon,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoadEdge {
    pub id: String,
    pub from: usize,
    pub to: usize,
    pub length_m: f64,
    pub speed_mps: f64,
    pub road_type: String,
}

impl RoadEdge {
    pub fn free_flow_time(&self) -> f64 {
        self.length_m / self.speed_mps
    }
}

/// An edge traversed in a given direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Directed {
    pub edge: usize,
    pub forward: bool,
}

/// Free-flow speeds (m/s) used when an edge has no speed of its own.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeedTable(pub BTreeMap<String, f64>);

impl Default for SpeedTable {
    fn default() -> Self {
        Self(BTreeMap::from([
            ("expressway".to_string(), 25.0),
            ("arterial".to_string(), 16.7),
            ("local".to_string(), 13.9),
        ]))
    }
}

impl SpeedTable {
    pub fn speed(&self, road_type: &str) -> Option<f64> {
        self.0.get(&road_type.trim().to_ascii_lowercase()).copied()
    }
}

#[derive(Debug, Clone)]
pub struct RoadGraph {
    nodes: Vec<RoadNode>,
    edges: Vec<RoadEdge>,
    node_index: HashMap<String, usize>,
    projection: Projection,
    xy: Vec<[f64; 2]>,
    /// Directed edge `2e` runs `from → to`, `2e + 1` runs back.
    digraph: Digraph,
    times: Vec<f64>,
    cells: HashMap<(i64, i64), Vec<usize>>,
}

impl RoadGraph {
    pub fn new(nodes: Vec<RoadNode>, edges: Vec<RoadEdge>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::Parse("road graph has no nodes".into()));
        }
        let mut node_index = HashMap::with_capacity(nodes.len());
        for (i, n) in nodes.iter().enumerate() {
            if node_index.insert(n.id.clone(), i).is_some() {
                return Err(Error::Parse(format!("duplicate node id {}", n.id)));
            }
        }
        for e in &edges {
            if e.from >= nodes.len() || e.to >= nodes.len() {
                return Err(Error::Parse(format!("edge {} references an unknown node", e.id)));
            }
            if !(e.length_m > 0.0 && e.length_m.is_finite()) {
                return Err(Error::Parse(format!("edge {} has non-positive length", e.id)));
            }
            if !(e.speed_mps > 0.0 && e.speed_mps.is_finite()) {
                return Err(Error::Parse(format!("edge {} has non-positive speed", e.id)));
            }
        }
        let n = nodes.len() as f64;
        let center = LatLon::new(
            nodes.iter().map(|v| v.pos.lat).sum::<f64>() / n,
            nodes.iter().map(|v| v.pos.lon).sum::<f64>() / n,
        );
        let projection = Projection::new(center);
        let xy: Vec<[f64; 2]> = nodes.iter().map(|v| projection.to_xy(v.pos)).collect();
        let ends = edges.iter().flat_map(|e| [(e.from, e.to), (e.to, e.from)]).collect();
        let digraph = Digraph::new(nodes.len(), ends);
        let times = edges.iter().flat_map(|e| [e.free_flow_time(); 2]).collect();

        let mut cells: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        for (i, e) in edges.iter().enumerate() {
            let (a, b) = (xy[e.from], xy[e.to]);
            let (x0, x1) = (cell(a[0].min(b[0])), cell(a[0].max(b[0])));
            let (y0, y1) = (cell(a[1].min(b[1])), cell(a[1].max(b[1])));
            for cx in x0..=x1 {
                for cy in y0..=y1 {
                    cells.entry((cx, cy)).or_default().push(i);
                }
            }
        }
        Ok(Self { nodes, edges, node_index, projection, xy, digraph, times, cells })
    }

    /// Loads `id,lat,lon` nodes and `id,from,to,length_m,speed_mps,road_type`
    /// edges; an empty speed falls back to the road-type table.
    pub fn from_csv<R1: Read, R2: Read>(nodes: R1, edges: R2, speeds: &SpeedTable) -> Result<Self> {
        #[derive(Deserialize)]
        struct NodeRow {
            id: String,
            lat: f64,
            lon: f64,
        }
        #[derive(Deserialize)]
        struct EdgeRow {
            id: String,
            from: String,
            to: String,
            length_m: f64,
            speed_mps: Option<f64>,
            #[serde(default)]
            road_type: String,
        }
        let mut node_list = Vec::new();
        for row in csv::Reader::from_reader(nodes).deserialize() {
            let r: NodeRow = row?;
            node_list.push(RoadNode { id: r.id, pos: LatLon::new(r.lat, r.lon) });
        }
        let index: HashMap<&str, usize> = node_list.iter().enumerate().map(|(i, n)| (n.id.as_str(), i)).collect();
        let mut edge_list = Vec::new();
        for row in csv::Reader::from_reader(edges).deserialize() {
            let r: EdgeRow = row?;
            let lookup = |id: &str| {
                index
                    .get(id)
                    .copied()
                    .ok_or_else(|| Error::Parse(format!("edge {} references unknown node {id}", r.id)))
            };
            let speed = match r.speed_mps {
                Some(s) => s,
                None => speeds.speed(&r.road_type).ok_or_else(|| {
                    Error::Parse(format!("edge {} has no speed and unknown road type {:?}", r.id, r.road_type))
                })?,
            };
            edge_list.push(RoadEdge {
                from: lookup(&r.from)?,
                to: lookup(&r.to)?,
                id: r.id,
                length_m: r.length_m,
                speed_mps: speed,
                road_type: r.road_type,
            });
        }
        Self::new(node_list, edge_list)
    }

    pub fn write_nodes_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["id", "lat", "lon"])?;
        for n in &self.nodes {
            w.write_record([n.id.clone(), n.pos.lat.to_string(), n.pos.lon.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Writes the edge table; without speeds the column is left empty so
    /// readers fall back to the road-type table.
    pub fn write_edges_csv<W: Write>(&self, out: W, with_speeds: bool) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["id", "from", "to", "length_m", "speed_mps", "road_type"])?;
        for e in &self.edges {
            w.write_record([
                e.id.clone(),
                self.nodes[e.from].id.clone(),
                self.nodes[e.to].id.clone(),
                e.length_m.to_string(),
                if with_speeds { e.speed_mps.to_string() } else { String::new() },
                e.road_type.clone(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn nodes(&self) -> &[RoadNode] {
        &self.nodes
    }

    pub fn edges(&self) -> &[RoadEdge] {
        &self.edges
    }

    pub fn node(&self, id: &str) -> Option<usize> {
        self.node_index.get(id).copied()
    }

    pub fn projection(&self) -> &Projection {
        &self.projection
    }

    pub fn xy(&self, node: usize) -> [f64; 2] {
        self.xy[node]
    }

    pub fn source(&self, d: Directed) -> usize {
        let e = &self.edges[d.edge];
        if d.forward {
            e.from
        } else {
            e.to
        }
    }

    pub fn target(&self, d: Directed) -> usize {
        let e = &self.edges[d.edge];
        if d.forward {
            e.to
        } else {
            e.from
        }
    }

    /// Straight-line distance between two nodes in meters.
    pub fn node_distance(&self, a: usize, b: usize) -> f64 {
        planar_distance(self.xy[a], self.xy[b])
    }

    /// Free-flow time of the fastest route between two nodes.
    pub fn best_free_flow_time(&self, origin: usize, destination: usize) -> Result<f64> {
        dijkstra(&self.digraph, origin, &self.times)[destination].ok_or_else(|| self.unreachable(origin, destination))
    }

    /// Fastest route with deterministic tie-breaking by node index.
    pub fn shortest_route(&self, origin: usize, destination: usize) -> Result<(f64, Vec<Directed>)> {
        let (t, path) = shortest_path(&self.digraph, origin, destination, &self.times)
            .ok_or_else(|| self.unreachable(origin, destination))?;
        Ok((t, path.into_iter().map(|d| Directed { edge: d / 2, forward: d % 2 == 0 }).collect()))
    }

    /// Directed edge joining two adjacent nodes (smallest edge index).
    pub fn edge_between(&self, a: usize, b: usize) -> Option<Directed> {
        self.digraph
            .out_edges(a)
            .iter()
            .filter(|&&d| self.digraph.ends(d).1 == b)
            .map(|&d| Directed { edge: d / 2, forward: d % 2 == 0 })
            .min_by_key(|d| d.edge)
    }

    fn unreachable(&self, a: usize, b: usize) -> Error {
        Error::Unreachable { from: self.nodes[a].id.clone(), to: self.nodes[b].id.clone() }
    }

    pub fn nearest_node(&self, p: [f64; 2]) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, &q) in self.xy.iter().enumerate() {
            let d = planar_distance(p, q);
            if d < best_d {
                best = i;
                best_d = d;
            }
        }
        best
    }

    /// Closest edge within `radius` meters: `(edge, distance, position along
    /// the edge from its `from` node in [0, 1])`.
    pub fn nearest_edge(&self, p: [f64; 2], radius: f64) -> Option<(usize, f64, f64)> {
        let mut best: Option<(usize, f64, f64)> = None;
        for cx in cell(p[0] - radius)..=cell(p[0] + radius) {
            for cy in cell(p[1] - radius)..=cell(p[1] + radius) {
                let Some(list) = self.cells.get(&(cx, cy)) else { continue };
                for &e in list {
                    let edge = &self.edges[e];
                    let (d, t) = point_segment(p, self.xy[edge.from], self.xy[edge.to]);
                    if d > radius {
                        continue;
                    }
                    let better = match best {
                        None => true,
                        Some((be, bd, _)) => d < bd || (d == bd && e < be),
                    };
                    if better {
                        best = Some((e, d, t));
                    }
                }
            }
        }
        best
    }
}

fn cell(x: f64) -> i64 {
    (x / CELL_M).floor() as i64
}
