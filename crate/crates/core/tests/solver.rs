use freeflow::bounds::gamma_infinity_poly;
use freeflow::game::{CongestionGame, FlowProfile};
use freeflow::network::{Commodity, Edge, NetworkCongestionGame};
use freeflow::solver::brute_force::brute_force_poa;
use freeflow::solver::{
    is_equilibrium, price_of_anarchy, solve, solve_equilibrium, solve_optimum, wardrop_gap, Init, Objective,
    SolverConfig,
};
use freeflow::{Game, Latency};
use proptest::prelude::*;

fn latency() -> impl Strategy<Value = Latency> {
    (1u32..=4, 0.1f64..3.0, 0.0f64..1.0, 0.0f64..2.0)
        .prop_map(|(p, a, b, c)| Latency::new([(p, a), (1, b)], c).unwrap())
}

fn parallel_game() -> impl Strategy<Value = Game> {
    (proptest::collection::vec(latency(), 2..=3), 0.2f64..3.0)
        .prop_map(|(links, demand)| Game::parallel_links(links, demand).unwrap())
}

/// Braess's four-node network with a cheap middle edge. Everyone takes the
/// zigzag at equilibrium (cost 2.5); the optimum sends half of it there
/// (cost 2.375).
fn braess() -> NetworkCongestionGame<f64> {
    let nodes = ["s", "a", "b", "t"].map(String::from).to_vec();
    let edge = |id: &str, from, to, latency: &str| Edge { id: id.into(), from, to, latency: latency.parse().unwrap() };
    let edges = vec![
        edge("sa", 0, 1, "x"),
        edge("sb", 0, 2, "2"),
        edge("at", 1, 3, "2"),
        edge("bt", 2, 3, "x"),
        edge("ab", 1, 2, "0.5"),
    ];
    NetworkCongestionGame::new(nodes, edges, vec![Commodity { source: 0, sink: 3, demand: 1.0 }]).unwrap()
}

#[test]
fn braess_network_matches_hand_solution() {
    let r = price_of_anarchy(&braess(), &SolverConfig::default()).unwrap();
    assert!((r.eq_cost - 2.5).abs() < 1e-6);
    assert!((r.opt_cost - 2.375).abs() < 1e-6);
    assert!((r.ratio - 20.0 / 19.0).abs() < 1e-6);
}

#[test]
fn network_and_path_formulations_agree() {
    let net = braess();
    let game = net.to_congestion_game(100).unwrap();
    let cfg = SolverConfig::default();
    let (a, b) = (price_of_anarchy(&net, &cfg).unwrap(), price_of_anarchy(&game, &cfg).unwrap());
    assert!((a.eq_cost - b.eq_cost).abs() < 1e-6);
    assert!((a.opt_cost - b.opt_cost).abs() < 1e-6);
}

#[test]
fn single_precision_tracks_double() {
    let game: Game =
        CongestionGame::parallel_links(vec!["x^2".parse().unwrap(), "2*x + 1".parse().unwrap()], 2.0).unwrap();
    let single = game.cast::<f32>();
    let a = price_of_anarchy(&game, &SolverConfig::default()).unwrap();
    let b = price_of_anarchy(&single, &SolverConfig { tol: 1e-5, max_iters: 100_000 }).unwrap();
    assert!((a.ratio - f64::from(b.ratio)).abs() < 1e-4);
}

#[test]
fn given_start_is_kept_when_already_optimal() {
    let game = Game::parallel_links(vec![Latency::identity(), Latency::identity()], 2.0).unwrap();
    let start = FlowProfile::new(&game, vec![vec![1.0, 1.0]]).unwrap();
    let r = solve(&game, Objective::Equilibrium, &SolverConfig::default(), Init::Given(start.clone())).unwrap();
    assert!(r.converged);
    assert_eq!(r.iterations, 0);
    assert_eq!(r.profile, start);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn equilibrium_matches_grid_oracle(game in parallel_game()) {
        let eq = solve_equilibrium(&game, &SolverConfig::default()).unwrap();
        prop_assert!(eq.converged);
        prop_assert!(is_equilibrium(&game, &eq.profile, 1e-6).unwrap());
        let brute = brute_force_poa(&game, 2_000).unwrap();
        prop_assert!((eq.total_latency - brute.eq_cost).abs() <= 1e-3 * brute.eq_cost);
        prop_assert!(eq.total_latency <= brute.eq_cost * (1.0 + 1e-3));
    }

    #[test]
    fn optimum_never_exceeds_equilibrium(game in parallel_game()) {
        let cfg = SolverConfig::default();
        let (eq, opt) = (solve_equilibrium(&game, &cfg).unwrap(), solve_optimum(&game, &cfg).unwrap());
        prop_assert!(opt.total_latency <= eq.total_latency + 1e-9 * eq.total_latency);
        let brute = brute_force_poa(&game, 2_000).unwrap();
        prop_assert!(opt.total_latency <= brute.opt_cost * (1.0 + 1e-9));
    }

    #[test]
    fn ratio_respects_the_polynomial_bound(game in parallel_game()) {
        let r = price_of_anarchy(&game, &SolverConfig::default()).unwrap();
        let p = (0..game.resources().len()).filter_map(|e| game.latency(e).max_degree()).max().unwrap();
        prop_assert!(r.ratio >= 1.0 - 1e-9);
        prop_assert!(r.ratio <= gamma_infinity_poly::<f64>(p).unwrap() + 1e-9);
    }

    #[test]
    fn random_starts_reach_the_same_loads(game in parallel_game(), s1 in 0u64..1000, s2 in 0u64..1000) {
        let cfg = SolverConfig { tol: 1e-12, ..SolverConfig::default() };
        let a = solve(&game, Objective::Equilibrium, &cfg, Init::Random(s1)).unwrap();
        let b = solve(&game, Objective::Equilibrium, &cfg, Init::Random(s2)).unwrap();
        prop_assert!(wardrop_gap(&game, &a.profile).unwrap() <= 1e-10);
        prop_assert!((a.total_latency - b.total_latency).abs() <= 1e-6 * a.total_latency);
    }
}
