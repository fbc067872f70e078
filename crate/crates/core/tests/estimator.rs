use freeflow::estimator::synth::{synth_trace, FleetSpec, GridNetwork, MixtureComponent, TraceSpec};
use freeflow::estimator::{
    deviation_distribution, estimate_all, estimate_trip, match_trace, read_traces, write_traces_csv, EstimatorConfig,
    RoadGraph, SpeedTable,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn grid() -> GridNetwork {
    GridNetwork::new(20, 20, 200.0).unwrap()
}

fn fleet(trips: usize, noise: f64, drop: f64, seed: u64) -> Vec<freeflow::estimator::synth::SynthTrip> {
    let spec = FleetSpec {
        trips,
        mixture: FleetSpec::default_mixture(),
        trace: TraceSpec { sample_interval_s: 3.0, noise_std_m: noise, drop_prob: drop },
        seed,
    };
    grid().fleet(&spec).unwrap()
}

/// Shortest path times on a 4×4 grid agree with exhaustive enumeration of
/// simple paths.
#[test]
fn best_time_matches_enumeration() {
    let g = GridNetwork::new(4, 4, 150.0).unwrap();
    let graph = g.graph();
    fn dfs(g: &RoadGraph, at: usize, goal: usize, seen: &mut Vec<bool>, t: f64, best: &mut f64) {
        if at == goal {
            *best = best.min(t);
            return;
        }
        for (i, e) in g.edges().iter().enumerate() {
            let next = if e.from == at {
                e.to
            } else if e.to == at {
                e.from
            } else {
                continue;
            };
            if !seen[next] {
                seen[next] = true;
                dfs(g, next, goal, seen, t + g.edges()[i].free_flow_time(), best);
                seen[next] = false;
            }
        }
    }
    for goal in [5, 10, 15] {
        let mut seen = vec![false; 16];
        seen[0] = true;
        let mut best = f64::INFINITY;
        dfs(graph, 0, goal, &mut seen, 0.0, &mut best);
        assert!((graph.best_free_flow_time(0, goal).unwrap() - best).abs() < 1e-9);
    }
}

#[test]
fn shortest_path_trips_have_unit_deviation() {
    let spec = FleetSpec {
        trips: 100,
        mixture: vec![MixtureComponent { weight: 1.0, theta: 0.0 }],
        trace: TraceSpec { sample_interval_s: 3.0, noise_std_m: 0.0, drop_prob: 0.0 },
        seed: 11,
    };
    let g = grid();
    for trip in g.fleet(&spec).unwrap() {
        let e = estimate_trip(g.graph(), &trip.trace, &EstimatorConfig::default()).unwrap();
        assert!((e.deviation - 1.0).abs() < 1e-9, "{}: {}", e.trip_id, e.deviation);
        assert_eq!(e.gaps.small + e.gaps.large, 0);
    }
}

#[test]
fn noisy_fleet_recovers_planted_deviation() {
    let g = grid();
    let trips = fleet(300, 10.0, 0.1, 5);
    let traces: Vec<_> = trips.iter().map(|t| t.trace.clone()).collect();
    let estimates = estimate_all(g.graph(), &traces, &EstimatorConfig::default());
    for (trip, est) in trips.iter().zip(estimates) {
        let est = est.unwrap();
        let planted = 1.0 + trip.planted_theta;
        assert!(
            (est.deviation - planted).abs() <= 0.02 * planted,
            "{}: planted {planted}, estimated {}",
            est.trip_id,
            est.deviation
        );
    }
}

#[test]
fn dropped_edge_becomes_small_gap_at_equal_cost() {
    let g = GridNetwork::new(5, 5, 200.0).unwrap();
    let route = g.route(&[(0, 0), (0, 4)]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let spec = TraceSpec { sample_interval_s: 3.0, noise_std_m: 0.0, drop_prob: 0.0 };
    let full = synth_trace(g.graph(), "t", &route, &spec, &mut rng).unwrap();
    let proj = g.graph().projection();
    let (lo, hi) = (g.graph().xy(g.node(0, 2))[0], g.graph().xy(g.node(0, 3))[0]);
    let kept = full
        .points()
        .iter()
        .copied()
        .filter(|p| {
            let x = proj.to_xy(p.pos)[0];
            x <= lo + 1.0 || x >= hi - 1.0
        })
        .collect();
    let trace = freeflow::estimator::Trace::new("t", kept).unwrap();
    let e = estimate_trip(g.graph(), &trace, &EstimatorConfig::default()).unwrap();
    assert_eq!((e.gaps.small, e.gaps.large), (1, 0));
    assert!((e.deviation - 1.0).abs() < 1e-6);
}

#[test]
fn summary_matches_planted_fractions() {
    let trips = fleet(500, 5.0, 0.05, 21);
    let g = grid();
    let traces: Vec<_> = trips.iter().map(|t| t.trace.clone()).collect();
    let est: Vec<f64> = estimate_all(g.graph(), &traces, &EstimatorConfig::default())
        .into_iter()
        .map(|e| e.unwrap().theta_hat)
        .collect();
    let planted: Vec<f64> = trips.iter().map(|t| t.planted_theta).collect();
    let (a, b) = (deviation_distribution(&est).unwrap(), deviation_distribution(&planted).unwrap());
    let n = trips.len() as f64;
    for (x, y) in a.fractions_below.iter().zip(&b.fractions_below) {
        assert!((x.fraction - y.fraction).abs() <= 1.0 / n + 1e-12);
    }
}

#[test]
fn csv_round_trip_preserves_estimates() {
    let g = grid();
    let trips = fleet(20, 5.0, 0.05, 2);
    let traces: Vec<_> = trips.iter().map(|t| t.trace.clone()).collect();
    let (mut nodes, mut edges, mut tr) = (Vec::new(), Vec::new(), Vec::new());
    g.graph().write_nodes_csv(&mut nodes).unwrap();
    g.graph().write_edges_csv(&mut edges, false).unwrap();
    write_traces_csv(&traces, &mut tr).unwrap();
    let graph = RoadGraph::from_csv(nodes.as_slice(), edges.as_slice(), &SpeedTable::default()).unwrap();
    let reread = read_traces(tr.as_slice()).unwrap();
    let cfg = EstimatorConfig::default();
    for (a, b) in traces.iter().zip(&reread) {
        let (x, y) = (estimate_trip(g.graph(), a, &cfg).unwrap(), estimate_trip(&graph, b, &cfg).unwrap());
        assert!((x.deviation - y.deviation).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn triangle_inequality(a in 0usize..100, b in 0usize..100, c in 0usize..100) {
        let g = GridNetwork::new(10, 10, 120.0).unwrap();
        let t = |x, y| g.graph().best_free_flow_time(x, y).unwrap();
        prop_assert!(t(a, c) <= t(a, b) + t(b, c) + 1e-9);
    }

    #[test]
    fn doubling_sample_rate_keeps_edges(r0 in 0usize..6, c0 in 0usize..6, r1 in 0usize..6, c1 in 0usize..6, dt in 2.0f64..6.0) {
        prop_assume!((r0, c0) != (r1, c1));
        let g = GridNetwork::new(6, 6, 200.0).unwrap();
        let (_, route) = g.graph().shortest_route(g.node(r0, c0), g.node(r1, c1)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let spec = |s| TraceSpec { sample_interval_s: s, noise_std_m: 0.0, drop_prob: 0.0 };
        let coarse = synth_trace(g.graph(), "t", &route, &spec(dt), &mut rng).unwrap();
        let fine = synth_trace(g.graph(), "t", &route, &spec(dt / 2.0), &mut rng).unwrap();
        let a: Vec<_> = match_trace(g.graph(), &coarse, 30.0).unwrap().edges().collect();
        let b: Vec<_> = match_trace(g.graph(), &fine, 30.0).unwrap().edges().collect();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(a, route);
    }

    #[test]
    fn gap_free_matches_never_beat_the_shortest_path(seed in 0u64..1000) {
        let g = GridNetwork::new(8, 8, 200.0).unwrap();
        let spec = FleetSpec {
            trips: 1,
            mixture: FleetSpec::default_mixture(),
            trace: TraceSpec { sample_interval_s: 3.0, noise_std_m: 0.0, drop_prob: 0.0 },
            seed,
        };
        let trip = &g.fleet(&spec).unwrap()[0];
        let e = estimate_trip(g.graph(), &trip.trace, &EstimatorConfig::default()).unwrap();
        prop_assert_eq!(e.gaps.small + e.gaps.large, 0);
        prop_assert!(e.theta_hat >= -1e-9);
    }

    #[test]
    fn fractions_are_monotone(v in proptest::collection::vec(0.0f64..3.0, 1..50)) {
        let s = deviation_distribution(&v).unwrap();
        for w in s.fractions_below.windows(2) {
            prop_assert!(w[0].fraction <= w[1].fraction);
        }
    }
}
