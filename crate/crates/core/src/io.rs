//! JSON encoding of game instances and solver reports.
//!
//! A congestion game is
//! `{"resources": [{"id", "latency"}], "types": [{"demand", "strategies": [[id, ...]]}]}`
//! and a network game is
//! `{"nodes": [id], "edges": [{"id", "from", "to", "latency"}], "commodities": [{"source", "sink", "demand"}]}`.
//! A latency is either `{"coeffs": {"degree": α}, "beta": β}` or a formula
//! string such as `"2*x^4 + 1"`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::game::{CongestionGame, FlowProfile, PlayerType, Resource};
use crate::latency::LatencyFunction;
use crate::network::{Commodity, Edge, NetworkCongestionGame, PathFlows};
use crate::solver::{Objective, PoAReport, RoutingGame, SolveReport};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Instance {
    Congestion(CongestionGame<f64>),
    Network(NetworkCongestionGame<f64>),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum LatencyDoc {
    Formula(String),
    Coeffs {
        #[serde(default)]
        coeffs: BTreeMap<String, f64>,
        #[serde(default)]
        beta: f64,
    },
}

impl LatencyDoc {
    fn parse(self) -> Result<LatencyFunction<f64>> {
        match self {
            LatencyDoc::Formula(s) => s.parse(),
            LatencyDoc::Coeffs { coeffs, beta } => {
                let terms = coeffs
                    .into_iter()
                    .map(|(d, a)| {
                        d.trim()
                            .parse::<u32>()
                            .map(|d| (d, a))
                            .map_err(|_| Error::Parse(format!("degree {d:?} is not a nonnegative integer")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                // a degree-0 coefficient folds into the constant term
                let extra: f64 = terms.iter().filter(|(d, _)| *d == 0).map(|(_, a)| a).sum();
                LatencyFunction::new(terms.into_iter().filter(|(d, _)| *d > 0), beta + extra)
            }
        }
    }

    fn from_latency(f: &LatencyFunction<f64>) -> Self {
        LatencyDoc::Coeffs { coeffs: f.coefficients().map(|(d, a)| (d.to_string(), a)).collect(), beta: f.beta() }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ResourceDoc {
    id: String,
    latency: LatencyDoc,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TypeDoc {
    demand: f64,
    strategies: Vec<Vec<String>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CongestionDoc {
    resources: Vec<ResourceDoc>,
    types: Vec<TypeDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeDoc {
    id: String,
    from: String,
    to: String,
    latency: LatencyDoc,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CommodityDoc {
    source: String,
    sink: String,
    demand: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkDoc {
    nodes: Vec<String>,
    edges: Vec<EdgeDoc>,
    commodities: Vec<CommodityDoc>,
}

/// Parses either instance form; the presence of `edges` selects the network form.
pub fn parse_instance(text: &str) -> Result<Instance> {
    let value: Value = serde_json::from_str(text)?;
    if value.get("edges").is_some() {
        let doc: NetworkDoc = serde_json::from_value(value)?;
        Ok(Instance::Network(network_from_doc(doc)?))
    } else {
        let doc: CongestionDoc = serde_json::from_value(value)?;
        Ok(Instance::Congestion(congestion_from_doc(doc)?))
    }
}

fn congestion_from_doc(doc: CongestionDoc) -> Result<CongestionGame<f64>> {
    let resources = doc
        .resources
        .into_iter()
        .map(|r| Ok(Resource { id: r.id, latency: r.latency.parse()? }))
        .collect::<Result<Vec<_>>>()?;
    let index: BTreeMap<&str, usize> = resources.iter().enumerate().map(|(i, r)| (r.id.as_str(), i)).collect();
    let types =
        doc.types
            .into_iter()
            .enumerate()
            .map(|(ty, t)| {
                let strategies =
                    t.strategies
                        .iter()
                        .map(|s| {
                            s.iter()
                                .map(|id| {
                                    index.get(id.as_str()).copied().ok_or_else(|| {
                                        Error::InvalidGame(format!("type {ty} uses unknown resource {id}"))
                                    })
                                })
                                .collect::<Result<Vec<_>>>()
                        })
                        .collect::<Result<Vec<_>>>()?;
                Ok(PlayerType { demand: t.demand, strategies })
            })
            .collect::<Result<Vec<_>>>()?;
    CongestionGame::new(resources, types)
}

fn network_from_doc(doc: NetworkDoc) -> Result<NetworkCongestionGame<f64>> {
    let index: BTreeMap<&str, usize> = doc.nodes.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
    let node = |id: &str| index.get(id).copied().ok_or_else(|| Error::InvalidGame(format!("unknown node {id}")));
    let edges = doc
        .edges
        .into_iter()
        .map(|e| Ok(Edge { from: node(&e.from)?, to: node(&e.to)?, id: e.id, latency: e.latency.parse()? }))
        .collect::<Result<Vec<_>>>()?;
    let commodities = doc
        .commodities
        .iter()
        .map(|c| Ok(Commodity { source: node(&c.source)?, sink: node(&c.sink)?, demand: c.demand }))
        .collect::<Result<Vec<_>>>()?;
    NetworkCongestionGame::new(doc.nodes.clone(), edges, commodities)
}

pub fn congestion_to_json(game: &CongestionGame<f64>) -> Value {
    let doc = CongestionDoc {
        resources: game
            .resources()
            .iter()
            .map(|r| ResourceDoc { id: r.id.clone(), latency: LatencyDoc::from_latency(&r.latency) })
            .collect(),
        types: game
            .types()
            .iter()
            .map(|t| TypeDoc {
                demand: t.demand,
                strategies: t
                    .strategies
                    .iter()
                    .map(|s| s.iter().map(|&e| game.resources()[e].id.clone()).collect())
                    .collect(),
            })
            .collect(),
    };
    serde_json::to_value(doc).expect("instances serialize")
}

pub fn network_to_json(game: &NetworkCongestionGame<f64>) -> Value {
    let nodes = game.nodes();
    let doc = NetworkDoc {
        nodes: nodes.to_vec(),
        edges: game
            .edges()
            .iter()
            .map(|e| EdgeDoc {
                id: e.id.clone(),
                from: nodes[e.from].clone(),
                to: nodes[e.to].clone(),
                latency: LatencyDoc::from_latency(&e.latency),
            })
            .collect(),
        commodities: game
            .commodities()
            .iter()
            .map(|c| CommodityDoc { source: nodes[c.source].clone(), sink: nodes[c.sink].clone(), demand: c.demand })
            .collect(),
    };
    serde_json::to_value(doc).expect("instances serialize")
}

impl Instance {
    pub fn to_json(&self) -> Value {
        match self {
            Instance::Congestion(g) => congestion_to_json(g),
            Instance::Network(g) => network_to_json(g),
        }
    }
}

/// Games whose profiles can be rendered as JSON.
pub trait DescribeProfile: RoutingGame<f64> {
    fn resource_ids(&self) -> Vec<&str>;
    fn loads(&self, profile: &Self::Profile) -> Vec<f64>;
    fn profile_json(&self, profile: &Self::Profile) -> Value;
}

impl DescribeProfile for CongestionGame<f64> {
    fn resource_ids(&self) -> Vec<&str> {
        self.resources().iter().map(|r| r.id.as_str()).collect()
    }

    fn loads(&self, profile: &FlowProfile<f64>) -> Vec<f64> {
        self.edge_loads(profile)
    }

    fn profile_json(&self, profile: &FlowProfile<f64>) -> Value {
        let loads = self.edge_loads(profile);
        let types: Vec<Value> = self
            .types()
            .iter()
            .enumerate()
            .map(|(i, t)| {
                let strategies: Vec<Value> = t
                    .strategies
                    .iter()
                    .enumerate()
                    .map(|(s, res)| {
                        json!({
                            "resources": res.iter().map(|&e| self.resources()[e].id.as_str()).collect::<Vec<_>>(),
                            "flow": profile.flow(i, s),
                            "cost": self.cost_at(&loads, res),
                        })
                    })
                    .collect();
                json!({ "demand": t.demand, "strategies": strategies })
            })
            .collect();
        json!({ "types": types })
    }
}

impl DescribeProfile for NetworkCongestionGame<f64> {
    fn resource_ids(&self) -> Vec<&str> {
        self.edges().iter().map(|e| e.id.as_str()).collect()
    }

    fn loads(&self, profile: &PathFlows<f64>) -> Vec<f64> {
        self.edge_loads(profile)
    }

    fn profile_json(&self, profile: &PathFlows<f64>) -> Value {
        let loads = self.edge_loads(profile);
        let commodities: Vec<Value> = self
            .commodities()
            .iter()
            .zip(&profile.paths)
            .map(|(c, paths)| {
                let paths: Vec<Value> = paths
                    .iter()
                    .map(|(path, flow)| {
                        json!({
                            "edges": path.iter().map(|&e| self.edges()[e].id.as_str()).collect::<Vec<_>>(),
                            "flow": flow,
                            "cost": self.path_cost(&loads, path),
                        })
                    })
                    .collect();
                json!({
                    "source": self.nodes()[c.source],
                    "sink": self.nodes()[c.sink],
                    "demand": c.demand,
                    "paths": paths,
                })
            })
            .collect();
        json!({ "commodities": commodities })
    }
}

pub fn solve_report_json<G: DescribeProfile>(
    game: &G,
    objective: Objective,
    report: &SolveReport<f64, G::Profile>,
) -> Value {
    let loads: BTreeMap<&str, f64> = game.resource_ids().into_iter().zip(game.loads(&report.profile)).collect();
    json!({
        "objective": match objective {
            Objective::Equilibrium => "equilibrium",
            Objective::Optimum => "optimum",
        },
        "converged": report.converged,
        "iterations": report.iterations,
        "wardrop_gap": report.wardrop_gap,
        "objective_value": report.objective,
        "total_latency": report.total_latency,
        "loads": loads,
        "profile": game.profile_json(&report.profile),
    })
}

pub fn poa_report_json<G: DescribeProfile>(game: &G, report: &PoAReport<f64, G::Profile>) -> Value {
    json!({
        "poa": report.ratio,
        "eq_cost": report.eq_cost,
        "opt_cost": report.opt_cost,
        "equilibrium": solve_report_json(game, Objective::Equilibrium, &report.eq),
        "optimum": solve_report_json(game, Objective::Optimum, &report.opt),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{price_of_anarchy, SolverConfig};

    const PIGOU: &str = r#"{
        "resources": [
            {"id": "a", "latency": {"coeffs": {}, "beta": 1}},
            {"id": "b", "latency": {"coeffs": {"1": 1}, "beta": 0.5}}
        ],
        "types": [{"demand": 1, "strategies": [["a"], ["b"]]}]
    }"#;

    #[test]
    fn parses_congestion_game() {
        let Instance::Congestion(g) = parse_instance(PIGOU).unwrap() else { panic!("wrong kind") };
        let r = price_of_anarchy(&g, &SolverConfig::default()).unwrap();
        assert!((r.ratio - 16.0 / 15.0).abs() < 1e-6);
        let json = poa_report_json(&g, &r);
        assert!((json["poa"].as_f64().unwrap() - 16.0 / 15.0).abs() < 1e-6);
    }

    #[test]
    fn formula_latencies() {
        let text =
            r#"{"resources": [{"id": "e", "latency": "2*x^4 + 1"}], "types": [{"demand": 1, "strategies": [["e"]]}]}"#;
        let Instance::Congestion(g) = parse_instance(text).unwrap() else { panic!("wrong kind") };
        assert_eq!(g.latency(0).eval(1.0), 3.0);
    }

    #[test]
    fn round_trips() {
        let inst = parse_instance(PIGOU).unwrap();
        assert_eq!(parse_instance(&inst.to_json().to_string()).unwrap(), inst);

        let net = r#"{
            "nodes": ["s", "v", "t"],
            "edges": [
                {"id": "sv", "from": "s", "to": "v", "latency": {"coeffs": {"1": 1}}},
                {"id": "vt", "from": "v", "to": "t", "latency": {"beta": 1}},
                {"id": "st", "from": "s", "to": "t", "latency": {"beta": 2}}
            ],
            "commodities": [{"source": "s", "sink": "t", "demand": 1}]
        }"#;
        let inst = parse_instance(net).unwrap();
        assert!(matches!(inst, Instance::Network(_)));
        assert_eq!(parse_instance(&inst.to_json().to_string()).unwrap(), inst);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(parse_instance("{"), Err(Error::Json(_))));
        let unknown =
            r#"{"resources": [{"id": "a", "latency": "x"}], "types": [{"demand": 1, "strategies": [["z"]]}]}"#;
        assert!(parse_instance(unknown).is_err());
        let degree = r#"{"resources": [{"id": "a", "latency": {"coeffs": {"x": 1}}}], "types": [{"demand": 1, "strategies": [["a"]]}]}"#;
        assert!(parse_instance(degree).is_err());
    }
}
