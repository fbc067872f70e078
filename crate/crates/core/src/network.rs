//! Network congestion games: strategies are the source-sink paths of a
//! directed graph and are never enumerated unless asked for.

use crate::game::{free_flow_theta, theta_within, total_latency_of, CongestionGame, PlayerType, Resource};
use crate::latency::LatencyFunction;
use crate::scalar::{Extended, Scalar};
use crate::shortest_path::{shortest_path, Digraph};
use crate::{Error, Result};

/// Default cap on enumerated paths for exhaustive checks.
pub const DEFAULT_PATH_LIMIT: usize = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub struct Edge<T> {
    pub id: String,
    pub from: usize,
    pub to: usize,
    pub latency: LatencyFunction<T>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Commodity<T> {
    pub source: usize,
    pub sink: usize,
    pub demand: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkCongestionGame<T> {
    nodes: Vec<String>,
    edges: Vec<Edge<T>>,
    commodities: Vec<Commodity<T>>,
    graph: Digraph,
}

impl<T: Scalar> NetworkCongestionGame<T> {
    pub fn new(nodes: Vec<String>, edges: Vec<Edge<T>>, commodities: Vec<Commodity<T>>) -> Result<Self> {
        let n = nodes.len();
        for e in &edges {
            if e.from >= n || e.to >= n {
                return Err(Error::InvalidGame(format!("edge {} references an unknown node", e.id)));
            }
            if e.from == e.to {
                return Err(Error::InvalidGame(format!("edge {} is a self-loop", e.id)));
            }
        }
        let graph = Digraph::new(n, edges.iter().map(|e| (e.from, e.to)).collect());
        for (i, c) in commodities.iter().enumerate() {
            if c.source >= n || c.sink >= n {
                return Err(Error::InvalidGame(format!("commodity {i} references an unknown node")));
            }
            if c.source == c.sink {
                return Err(Error::InvalidGame(format!("commodity {i} has identical source and sink")));
            }
            if !c.demand.is_finite() || c.demand < T::zero() {
                return Err(Error::InvalidGame(format!("commodity {i} has invalid demand")));
            }
            if !graph.reachable(c.source)[c.sink] {
                return Err(Error::Unreachable { from: nodes[c.source].clone(), to: nodes[c.sink].clone() });
            }
        }
        Ok(Self { nodes, edges, commodities, graph })
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge<T>] {
        &self.edges
    }

    pub fn commodities(&self) -> &[Commodity<T>] {
        &self.commodities
    }

    pub fn graph(&self) -> &Digraph {
        &self.graph
    }

    pub fn latency(&self, e: usize) -> &LatencyFunction<T> {
        &self.edges[e].latency
    }

    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n == id)
    }

    pub fn total_demand(&self) -> T {
        self.commodities.iter().map(|c| c.demand).sum()
    }

    pub fn is_single_source(&self) -> bool {
        self.commodities.windows(2).all(|w| w[0].source == w[1].source)
    }

    /// Minimum-cost path of commodity `i` under per-edge `costs`.
    pub fn best_path(&self, i: usize, costs: &[T]) -> (T, Vec<usize>) {
        let c = &self.commodities[i];
        shortest_path(&self.graph, c.source, c.sink, costs).expect("reachability is checked at construction")
    }

    /// All simple source-sink paths of commodity `i`, as edge lists.
    pub fn enumerate_paths(&self, i: usize, limit: usize) -> Result<Vec<Vec<usize>>> {
        let c = self.commodities[i];
        let useful = self.graph.co_reachable(c.sink);
        let mut paths = Vec::new();
        let mut on_path = vec![false; self.nodes.len()];
        let mut stack = Vec::new();
        on_path[c.source] = true;
        self.dfs_paths(c.source, c.sink, &useful, &mut on_path, &mut stack, &mut paths, limit)?;
        Ok(paths)
    }

    #[allow(clippy::too_many_arguments)]
    fn dfs_paths(
        &self,
        v: usize,
        sink: usize,
        useful: &[bool],
        on_path: &mut [bool],
        stack: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
        limit: usize,
    ) -> Result<()> {
        if v == sink {
            if out.len() >= limit {
                return Err(Error::TooLarge(format!("more than {limit} paths")));
            }
            out.push(stack.clone());
            return Ok(());
        }
        for &e in self.graph.out_edges(v) {
            let w = self.graph.ends(e).1;
            if on_path[w] || !useful[w] {
                continue;
            }
            on_path[w] = true;
            stack.push(e);
            self.dfs_paths(w, sink, useful, on_path, stack, out, limit)?;
            stack.pop();
            on_path[w] = false;
        }
        Ok(())
    }

    /// True when all source-sink paths, over all commodities, share no edge
    /// and no node other than a common endpoint.
    pub fn is_path_disjoint(&self, limit: usize) -> Result<bool> {
        let mut all: Vec<Vec<usize>> = Vec::new();
        for i in 0..self.commodities.len() {
            for p in self.enumerate_paths(i, limit)? {
                if !all.contains(&p) {
                    all.push(p);
                }
            }
        }
        let nodes_of = |p: &[usize]| -> (Vec<usize>, Vec<usize>) {
            let (s, _) = self.graph.ends(p[0]);
            let (_, t) = self.graph.ends(p[p.len() - 1]);
            let inner = p[..p.len() - 1].iter().map(|&e| self.graph.ends(e).1).collect();
            (vec![s, t], inner)
        };
        for (a, pa) in all.iter().enumerate() {
            let (ends_a, inner_a) = nodes_of(pa);
            for pb in &all[a + 1..] {
                if pa.iter().any(|e| pb.contains(e)) {
                    return Ok(false);
                }
                let (ends_b, inner_b) = nodes_of(pb);
                let clash = inner_a.iter().any(|v| inner_b.contains(v) || ends_b.contains(v))
                    || inner_b.iter().any(|v| ends_a.contains(v));
                if clash {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Least `θ` over all commodity path sets.
    ///
    /// The minimum free-flow path is a shortest path; the maximum uses
    /// dynamic programming on acyclic graphs and enumeration otherwise.
    pub fn compute_theta(&self, limit: usize) -> Result<Extended<T>> {
        let betas: Vec<T> = self.edges.iter().map(|e| e.latency.beta()).collect();
        let topo = self.graph.topological_order();
        let mut per_type = Vec::with_capacity(self.commodities.len());
        for (i, c) in self.commodities.iter().enumerate() {
            let (min, _) = self.best_path(i, &betas);
            let max = match &topo {
                Some(order) => self.longest_path_dag(order, c.source, c.sink, &betas),
                None => self
                    .enumerate_paths(i, limit)?
                    .iter()
                    .map(|p| p.iter().map(|&e| betas[e]).sum::<T>())
                    .fold(T::zero(), T::max),
            };
            per_type.push(vec![min, max]);
        }
        Ok(free_flow_theta(per_type))
    }

    fn longest_path_dag(&self, order: &[usize], s: usize, t: usize, w: &[T]) -> T {
        let mut best: Vec<Option<T>> = vec![None; self.nodes.len()];
        best[s] = Some(T::zero());
        for &v in order {
            let Some(d) = best[v] else { continue };
            for &e in self.graph.out_edges(v) {
                let u = self.graph.ends(e).1;
                let nd = d + w[e];
                if best[u].is_none_or(|old| nd > old) {
                    best[u] = Some(nd);
                }
            }
        }
        best[t].unwrap_or(T::zero())
    }

    pub fn is_theta_free_flow(&self, theta: T, limit: usize) -> Result<bool> {
        Ok(theta_within(self.compute_theta(limit)?, theta))
    }

    /// Explicit game whose strategies are the enumerated paths.
    pub fn to_congestion_game(&self, limit: usize) -> Result<CongestionGame<T>> {
        let resources = self.edges.iter().map(|e| Resource { id: e.id.clone(), latency: e.latency.clone() }).collect();
        let mut types = Vec::with_capacity(self.commodities.len());
        for (i, c) in self.commodities.iter().enumerate() {
            types.push(PlayerType { demand: c.demand, strategies: self.enumerate_paths(i, limit)? });
        }
        CongestionGame::new(resources, types)
    }

    pub fn edge_loads(&self, flows: &PathFlows<T>) -> Vec<T> {
        let mut loads = vec![T::zero(); self.edges.len()];
        for paths in &flows.paths {
            for (path, amount) in paths {
                for &e in path {
                    loads[e] = loads[e] + *amount;
                }
            }
        }
        loads
    }

    pub fn path_cost(&self, loads: &[T], path: &[usize]) -> T {
        path.iter().map(|&e| self.latency(e).eval(loads[e])).sum()
    }

    pub fn total_latency(&self, flows: &PathFlows<T>) -> T {
        total_latency_of(&self.edge_loads(flows), |e| self.latency(e))
    }
}

/// Path flows per commodity; paths are edge lists.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PathFlows<T> {
    pub paths: Vec<Vec<(Vec<usize>, T)>>,
}

impl<T: Scalar> PathFlows<T> {
    /// Checks path validity and per-commodity conservation.
    pub fn validate(&self, game: &NetworkCongestionGame<T>) -> Result<()> {
        if self.paths.len() != game.commodities.len() {
            return Err(Error::InvalidProfile("one path list per commodity required".into()));
        }
        for (i, (paths, c)) in self.paths.iter().zip(&game.commodities).enumerate() {
            let mut total = T::zero();
            for (path, amount) in paths {
                if !amount.is_finite() || *amount < T::zero() {
                    return Err(Error::InvalidProfile(format!("commodity {i} has a negative flow")));
                }
                let mut at = c.source;
                for &e in path {
                    let Some(edge) = game.edges.get(e) else {
                        return Err(Error::InvalidProfile(format!("unknown edge {e}")));
                    };
                    if edge.from != at {
                        return Err(Error::InvalidProfile(format!("commodity {i} has a broken path")));
                    }
                    at = edge.to;
                }
                if at != c.sink {
                    return Err(Error::InvalidProfile(format!("commodity {i} path misses the sink")));
                }
                total = total + *amount;
            }
            if (total - c.demand).abs() > T::lit(crate::game::CONSERVATION_TOL) {
                return Err(Error::InvalidProfile(format!(
                    "commodity {i}: flows sum to {total}, demand is {}",
                    c.demand
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type L = LatencyFunction<f64>;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("v{i}")).collect()
    }

    fn edge(id: &str, from: usize, to: usize, latency: L) -> Edge<f64> {
        Edge { id: id.into(), from, to, latency }
    }

    /// s=0, t=3, two disjoint two-hop routes plus an optional cross edge.
    fn diamond(cross: bool) -> NetworkCongestionGame<f64> {
        let mut edges = vec![
            edge("a", 0, 1, L::affine(1.0, 1.0).unwrap()),
            edge("b", 1, 3, L::affine(1.0, 1.0).unwrap()),
            edge("c", 0, 2, L::affine(1.0, 2.0).unwrap()),
            edge("d", 2, 3, L::affine(1.0, 2.0).unwrap()),
        ];
        if cross {
            edges.push(edge("x", 1, 2, L::constant(0.5).unwrap()));
        }
        let commodity = Commodity { source: 0, sink: 3, demand: 1.0 };
        NetworkCongestionGame::new(names(4), edges, vec![commodity]).unwrap()
    }

    #[test]
    fn enumerates_paths() {
        assert_eq!(diamond(false).enumerate_paths(0, 10).unwrap().len(), 2);
        assert_eq!(diamond(true).enumerate_paths(0, 10).unwrap().len(), 3);
        assert!(matches!(diamond(true).enumerate_paths(0, 2), Err(Error::TooLarge(_))));
    }

    #[test]
    fn path_disjointness() {
        assert!(diamond(false).is_path_disjoint(10).unwrap());
        assert!(!diamond(true).is_path_disjoint(10).unwrap());
    }

    #[test]
    fn theta_matches_explicit_game() {
        for cross in [false, true] {
            let g = diamond(cross);
            let explicit = g.to_congestion_game(10).unwrap();
            assert_eq!(g.compute_theta(10).unwrap(), explicit.compute_theta());
        }
        let Extended::Finite(t) = diamond(true).compute_theta(10).unwrap() else { panic!() };
        // paths: 2, 4, 1+0.5+2 = 3.5
        assert!((t - 1.0).abs() < 1e-12);
        assert!(diamond(true).is_theta_free_flow(1.0, 10).unwrap());
    }

    #[test]
    fn rejects_unreachable_commodity() {
        let edges = vec![edge("a", 0, 1, L::identity())];
        let err = NetworkCongestionGame::new(names(2), edges, vec![Commodity { source: 1, sink: 0, demand: 1.0 }]);
        assert!(matches!(err, Err(Error::Unreachable { .. })));
    }

    #[test]
    fn path_flows_loads() {
        let g = diamond(false);
        let flows = PathFlows { paths: vec![vec![(vec![0, 1], 0.25), (vec![2, 3], 0.75)]] };
        flows.validate(&g).unwrap();
        assert_eq!(g.edge_loads(&flows), vec![0.25, 0.25, 0.75, 0.75]);
        let expect = 2.0 * 0.25 * 1.25 + 2.0 * 0.75 * 2.75;
        assert!((g.total_latency(&flows) - expect).abs() < 1e-12);
        let broken = PathFlows { paths: vec![vec![(vec![0, 3], 1.0)]] };
        assert!(broken.validate(&g).is_err());
    }
}
