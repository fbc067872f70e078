//! Label-setting shortest paths with deterministic tie-breaking.
//!
//! Among all minimum-cost paths the one with the lexicographically smallest
//! node-index sequence is returned; parallel edges are resolved by edge index.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::scalar::Scalar;

/// Relative slack used to decide whether an edge lies on some shortest path.
const TIGHT_TOL: f64 = 1e-12;

/// Directed multigraph over dense node and edge indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Digraph {
    node_count: usize,
    ends: Vec<(usize, usize)>,
    out: Vec<Vec<usize>>,
    inc: Vec<Vec<usize>>,
}

impl Digraph {
    /// Edges are `(from, to)` pairs; indices must be below `node_count`.
    pub fn new(node_count: usize, ends: Vec<(usize, usize)>) -> Self {
        let mut out = vec![Vec::new(); node_count];
        let mut inc = vec![Vec::new(); node_count];
        for (e, &(u, v)) in ends.iter().enumerate() {
            out[u].push(e);
            inc[v].push(e);
        }
        // sorted by (head, edge index) so that DFS order is lexicographic
        for list in &mut out {
            list.sort_by_key(|&e| (ends[e].1, e));
        }
        Self { node_count, ends, out, inc }
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.ends.len()
    }

    pub fn ends(&self, e: usize) -> (usize, usize) {
        self.ends[e]
    }

    pub fn out_edges(&self, v: usize) -> &[usize] {
        &self.out[v]
    }

    pub fn in_edges(&self, v: usize) -> &[usize] {
        &self.inc[v]
    }

    /// Nodes reachable from `source` along edge directions.
    pub fn reachable(&self, source: usize) -> Vec<bool> {
        self.sweep(source, |v| self.out[v].iter().map(|&e| self.ends[e].1))
    }

    /// Nodes from which `target` is reachable.
    pub fn co_reachable(&self, target: usize) -> Vec<bool> {
        self.sweep(target, |v| self.inc[v].iter().map(|&e| self.ends[e].0))
    }

    fn sweep<I, F>(&self, start: usize, next: F) -> Vec<bool>
    where
        F: Fn(usize) -> I,
        I: Iterator<Item = usize>,
    {
        let mut seen = vec![false; self.node_count];
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(v) = stack.pop() {
            for w in next(v) {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen
    }

    /// Topological order, or `None` when the graph has a cycle.
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let mut indeg: Vec<usize> = self.inc.iter().map(Vec::len).collect();
        let mut ready: Vec<usize> = (0..self.node_count).filter(|&v| indeg[v] == 0).collect();
        let mut order = Vec::with_capacity(self.node_count);
        while let Some(v) = ready.pop() {
            order.push(v);
            for &e in &self.out[v] {
                let w = self.ends[e].1;
                indeg[w] -= 1;
                if indeg[w] == 0 {
                    ready.push(w);
                }
            }
        }
        (order.len() == self.node_count).then_some(order)
    }
}

struct Label<T> {
    dist: T,
    node: usize,
}

impl<T: Scalar> PartialEq for Label<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<T: Scalar> Eq for Label<T> {}

impl<T: Scalar> PartialOrd for Label<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Scalar> Ord for Label<T> {
    // reversed for a min-heap
    fn cmp(&self, other: &Self) -> Ordering {
        other.dist.partial_cmp(&self.dist).unwrap_or(Ordering::Equal).then_with(|| other.node.cmp(&self.node))
    }
}

fn distances<T: Scalar>(graph: &Digraph, start: usize, cost: &[T], reverse: bool) -> Vec<Option<T>> {
    let mut dist: Vec<Option<T>> = vec![None; graph.node_count];
    let mut done = vec![false; graph.node_count];
    let mut heap = BinaryHeap::new();
    dist[start] = Some(T::zero());
    heap.push(Label { dist: T::zero(), node: start });
    while let Some(Label { dist: d, node: v }) = heap.pop() {
        if done[v] {
            continue;
        }
        done[v] = true;
        let edges = if reverse { &graph.inc[v] } else { &graph.out[v] };
        for &e in edges {
            let (a, b) = graph.ends[e];
            let w = if reverse { a } else { b };
            let nd = d + cost[e];
            if dist[w].is_none_or(|old| nd < old) {
                dist[w] = Some(nd);
                heap.push(Label { dist: nd, node: w });
            }
        }
    }
    dist
}

/// Single-source distances; `None` marks unreachable nodes.
pub fn dijkstra<T: Scalar>(graph: &Digraph, source: usize, cost: &[T]) -> Vec<Option<T>> {
    distances(graph, source, cost, false)
}

/// Minimum-cost `source → target` path as an edge list.
///
/// Costs must be nonnegative. Returns `None` if `target` is unreachable.
pub fn shortest_path<T: Scalar>(graph: &Digraph, source: usize, target: usize, cost: &[T]) -> Option<(T, Vec<usize>)> {
    let from_s = distances(graph, source, cost, false);
    let best = from_s[target]?;
    if source == target {
        return Some((T::zero(), Vec::new()));
    }
    let to_t = distances(graph, target, cost, true);
    let slack = T::lit(TIGHT_TOL) * T::one().max(best);
    let tight = |e: usize| {
        let (u, v) = graph.ends[e];
        match (from_s[u], to_t[v]) {
            (Some(a), Some(b)) => a + cost[e] + b <= best + slack,
            _ => false,
        }
    };

    // DFS over tight edges in (head, edge) order yields the lexicographically
    // smallest node sequence; the visited set guards zero-cost cycles.
    let mut visited = vec![false; graph.node_count];
    let mut path = Vec::new();
    let mut cursor = vec![0usize];
    let mut node = source;
    visited[source] = true;
    loop {
        if node == target {
            return Some((best, path));
        }
        let depth = cursor.len() - 1;
        let edges = &graph.out[node];
        let mut advanced = false;
        while cursor[depth] < edges.len() {
            let e = edges[cursor[depth]];
            cursor[depth] += 1;
            let w = graph.ends[e].1;
            if !visited[w] && tight(e) {
                visited[w] = true;
                path.push(e);
                cursor.push(0);
                node = w;
                advanced = true;
                break;
            }
        }
        if !advanced {
            cursor.pop();
            let e = path.pop()?;
            node = graph.ends[e].0;
        }
    }
}
