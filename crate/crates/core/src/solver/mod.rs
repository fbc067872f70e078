//! Equilibria, social optima and the Price of Anarchy of a given instance.
//!
//! Both problems are convex programs over path flows: the equilibrium
//! minimizes the potential `Σ_e ∫_0^{k_e} ℓ_e`, the optimum minimizes
//! `Σ_e k_e ℓ_e(k_e)`. They are solved by the same conditional-gradient
//! scheme, which differs only in the per-resource cost it linearizes
//! (`ℓ_e` versus the marginal cost `ℓ_e + k_e ℓ_e'`).
//!
//! Each sweep visits the types in order. For each type the best response
//! under current loads is found (a shortest path for network games, which
//! may add a new column), and flow is moved from the costliest used strategy
//! to the cheapest one with an exact line search along that direction.

pub mod brute_force;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};

use crate::game::{CongestionGame, FlowProfile};
use crate::latency::LatencyFunction;
use crate::network::{NetworkCongestionGame, PathFlows};
use crate::scalar::Scalar;
use crate::{Error, Result};

pub use brute_force::brute_force_poa;

/// Guard for normalized-gap denominators.
pub const GAP_FLOOR: f64 = 1e-15;

/// Per type, each used strategy as its resource list and flow.
pub type Columns<T> = Vec<Vec<(Vec<usize>, T)>>;

/// A game the solver can route flow in.
pub trait RoutingGame<T: Scalar> {
    type Profile;

    fn resource_count(&self) -> usize;
    fn latency(&self, e: usize) -> &LatencyFunction<T>;
    fn demands(&self) -> Vec<T>;

    /// Fixed strategy list of a type, or `None` when strategies are generated
    /// by [`RoutingGame::best_response`].
    fn fixed_strategies(&self, ty: usize) -> Option<&[Vec<usize>]>;

    /// Cheapest strategy under per-resource costs.
    fn best_response(&self, ty: usize, costs: &[T]) -> Vec<usize>;

    /// Path flows per type, validated against the game.
    fn decompose(&self, profile: &Self::Profile) -> Result<Columns<T>>;

    /// Inverse of [`RoutingGame::decompose`]; for fixed strategy lists the
    /// columns are in strategy order.
    fn assemble(&self, columns: Columns<T>) -> Self::Profile;
}

impl<T: Scalar> RoutingGame<T> for CongestionGame<T> {
    type Profile = FlowProfile<T>;

    fn resource_count(&self) -> usize {
        self.resources().len()
    }

    fn latency(&self, e: usize) -> &LatencyFunction<T> {
        CongestionGame::latency(self, e)
    }

    fn demands(&self) -> Vec<T> {
        self.types().iter().map(|t| t.demand).collect()
    }

    fn fixed_strategies(&self, ty: usize) -> Option<&[Vec<usize>]> {
        Some(&self.types()[ty].strategies)
    }

    fn best_response(&self, ty: usize, costs: &[T]) -> Vec<usize> {
        let strategies = &self.types()[ty].strategies;
        let cost = |s: &Vec<usize>| s.iter().map(|&e| costs[e]).sum::<T>();
        let mut best = 0;
        let mut best_cost = cost(&strategies[0]);
        for (j, s) in strategies.iter().enumerate().skip(1) {
            let c = cost(s);
            if c < best_cost {
                best = j;
                best_cost = c;
            }
        }
        strategies[best].clone()
    }

    fn decompose(&self, profile: &FlowProfile<T>) -> Result<Columns<T>> {
        FlowProfile::new(self, profile.flows().to_vec())?;
        Ok(self
            .types()
            .iter()
            .zip(profile.flows())
            .map(|(ty, f)| ty.strategies.iter().cloned().zip(f.iter().copied()).collect())
            .collect())
    }

    fn assemble(&self, columns: Columns<T>) -> FlowProfile<T> {
        FlowProfile::from_raw(columns.into_iter().map(|cols| cols.into_iter().map(|(_, f)| f).collect()).collect())
    }
}

impl<T: Scalar> RoutingGame<T> for NetworkCongestionGame<T> {
    type Profile = PathFlows<T>;

    fn resource_count(&self) -> usize {
        self.edges().len()
    }

    fn latency(&self, e: usize) -> &LatencyFunction<T> {
        NetworkCongestionGame::latency(self, e)
    }

    fn demands(&self) -> Vec<T> {
        self.commodities().iter().map(|c| c.demand).collect()
    }

    fn fixed_strategies(&self, _ty: usize) -> Option<&[Vec<usize>]> {
        None
    }

    fn best_response(&self, ty: usize, costs: &[T]) -> Vec<usize> {
        self.best_path(ty, costs).1
    }

    fn decompose(&self, profile: &PathFlows<T>) -> Result<Columns<T>> {
        profile.validate(self)?;
        Ok(profile.paths.clone())
    }

    fn assemble(&self, columns: Columns<T>) -> PathFlows<T> {
        PathFlows {
            paths: columns.into_iter().map(|cols| cols.into_iter().filter(|(_, f)| *f > T::zero()).collect()).collect(),
        }
    }
}

/// Which convex program to solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    /// Wardrop equilibrium (potential minimizer).
    Equilibrium,
    /// Social optimum (minimizer of `SUM`).
    Optimum,
}

/// Starting point of the iteration.
#[derive(Debug, Clone, PartialEq)]
pub enum Init<P> {
    /// Every type on its cheapest strategy at zero load.
    FreeFlow,
    /// Demand spread evenly over the fixed strategies (free-flow path for
    /// generated strategies).
    Uniform,
    /// Random split drawn from a seeded generator.
    Random(u64),
    Given(P),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig<T> {
    /// Target normalized gap.
    pub tol: T,
    /// Maximum number of sweeps over all types.
    pub max_iters: usize,
}

impl<T: Scalar> Default for SolverConfig<T> {
    fn default() -> Self {
        Self { tol: T::lit(1e-8), max_iters: 200_000 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport<T, P> {
    pub profile: P,
    /// Potential for equilibria, `SUM` for optima.
    pub objective: T,
    /// Normalized gap under the solved cost (marginal cost for optima).
    pub wardrop_gap: T,
    /// `SUM` of the returned profile.
    pub total_latency: T,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoAReport<T, P> {
    pub eq_cost: T,
    pub opt_cost: T,
    pub ratio: T,
    pub eq: SolveReport<T, P>,
    pub opt: SolveReport<T, P>,
}

pub fn solve_equilibrium<T: Scalar, G: RoutingGame<T>>(
    game: &G,
    config: &SolverConfig<T>,
) -> Result<SolveReport<T, G::Profile>> {
    solve(game, Objective::Equilibrium, config, Init::FreeFlow)
}

pub fn solve_optimum<T: Scalar, G: RoutingGame<T>>(
    game: &G,
    config: &SolverConfig<T>,
) -> Result<SolveReport<T, G::Profile>> {
    solve(game, Objective::Optimum, config, Init::FreeFlow)
}

/// Ratio of equilibrium `SUM` to optimal `SUM`; fails unless both converge.
pub fn price_of_anarchy<T: Scalar, G: RoutingGame<T>>(
    game: &G,
    config: &SolverConfig<T>,
) -> Result<PoAReport<T, G::Profile>> {
    let eq = solve_equilibrium(game, config)?;
    let opt = solve_optimum(game, config)?;
    for r in [&eq, &opt] {
        if !r.converged {
            return Err(Error::NotConverged { iterations: r.iterations, gap: r.wardrop_gap.as_f64() });
        }
    }
    let eq_cost = eq.total_latency;
    let opt_cost = opt.total_latency;
    let ratio = if opt_cost > T::zero() { eq_cost / opt_cost } else { T::one() };
    Ok(PoAReport { eq_cost, opt_cost, ratio, eq, opt })
}

/// `Σ_i Σ_S σ_{i,S}(c_S − min_i c) / Σ_i Σ_S σ_{i,S} c_S`, zero exactly at
/// equilibrium.
pub fn wardrop_gap<T: Scalar, G: RoutingGame<T>>(game: &G, profile: &G::Profile) -> Result<T> {
    let columns = game.decompose(profile)?;
    let state = State::new(game, Objective::Equilibrium, columns);
    Ok(state.gap())
}

/// Per-type equilibrium condition: every strategy carrying more than
/// `10·tol·r_i` costs at most `min + tol·(1 + min)`.
pub fn is_equilibrium<T: Scalar, G: RoutingGame<T>>(game: &G, profile: &G::Profile, tol: T) -> Result<bool> {
    let columns = game.decompose(profile)?;
    let state = State::new(game, Objective::Equilibrium, columns);
    let costs = state.resource_costs();
    let ten = T::lit(10.0);
    for (i, cols) in state.columns.iter().enumerate() {
        let min = state.best_cost(i, &costs);
        let r = state.demands[i];
        for col in cols {
            if col.flow > ten * tol * r && state.column_cost(col, &costs) > min + tol * (T::one() + min) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

pub fn solve<T: Scalar, G: RoutingGame<T>>(
    game: &G,
    objective: Objective,
    config: &SolverConfig<T>,
    init: Init<G::Profile>,
) -> Result<SolveReport<T, G::Profile>> {
    if !(config.tol > T::zero()) {
        return Err(Error::Precondition("tolerance must be positive".into()));
    }
    let columns = initial_columns(game, init)?;
    let mut state = State::new(game, objective, columns);

    let mut gap = state.gap();
    let mut iterations = 0;
    while gap > config.tol && iterations < config.max_iters {
        iterations += 1;
        for i in 0..state.columns.len() {
            if state.demands[i] > T::zero() {
                state.update_type(i, config.tol);
            }
        }
        gap = state.gap();
    }

    let total_latency = state.total_latency();
    let objective_value = match objective {
        Objective::Equilibrium => state.potential(),
        Objective::Optimum => total_latency,
    };
    let columns =
        state.columns.into_iter().map(|cols| cols.into_iter().map(|c| (c.resources, c.flow)).collect()).collect();
    Ok(SolveReport {
        profile: game.assemble(columns),
        objective: objective_value,
        wardrop_gap: gap,
        total_latency,
        iterations,
        converged: gap <= config.tol,
    })
}

fn initial_columns<T: Scalar, G: RoutingGame<T>>(game: &G, init: Init<G::Profile>) -> Result<Columns<T>> {
    let mut rng = match init {
        Init::Given(p) => return game.decompose(&p),
        Init::Random(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
        Init::FreeFlow | Init::Uniform => None,
    };
    let uniform = matches!(init, Init::Uniform);
    let free_flow: Vec<T> = (0..game.resource_count()).map(|e| game.latency(e).beta()).collect();

    let mut out = Vec::new();
    for (i, r) in game.demands().into_iter().enumerate() {
        let best = game.best_response(i, &free_flow);
        let fixed = game.fixed_strategies(i);
        let mut cols: Vec<(Vec<usize>, T)> = match fixed {
            Some(list) => list.iter().map(|s| (s.clone(), T::zero())).collect(),
            None => vec![(best.clone(), T::zero())],
        };
        match rng.as_mut() {
            Some(rng) => {
                if fixed.is_none() {
                    // extra columns from randomly perturbed free-flow costs
                    for _ in 0..3 {
                        let noisy: Vec<T> =
                            free_flow.iter().map(|&b| (b + T::one()) * T::lit(rng.random_range(0.5..1.5))).collect();
                        let path = game.best_response(i, &noisy);
                        if !cols.iter().any(|(c, _)| *c == path) {
                            cols.push((path, T::zero()));
                        }
                    }
                }
                let w: Vec<f64> = (0..cols.len()).map(|_| Exp1.sample(rng)).collect();
                let total: f64 = w.iter().sum();
                for (col, wj) in cols.iter_mut().zip(&w) {
                    col.1 = r * T::lit(wj / total);
                }
            }
            None if uniform => {
                let share = r / T::from_count(cols.len());
                for col in &mut cols {
                    col.1 = share;
                }
            }
            None => {
                let j = cols.iter().position(|(c, _)| *c == best).unwrap_or(0);
                cols[j].1 = r;
            }
        }
        out.push(cols);
    }
    Ok(out)
}

struct Column<T> {
    resources: Vec<usize>,
    flow: T,
}

struct State<'g, T: Scalar, G: RoutingGame<T>> {
    game: &'g G,
    objective: Objective,
    generated: bool,
    demands: Vec<T>,
    columns: Vec<Vec<Column<T>>>,
    loads: Vec<T>,
}

impl<'g, T: Scalar, G: RoutingGame<T>> State<'g, T, G> {
    fn new(game: &'g G, objective: Objective, raw: Columns<T>) -> Self {
        let mut loads = vec![T::zero(); game.resource_count()];
        let columns: Vec<Vec<Column<T>>> = raw
            .into_iter()
            .map(|cols| {
                cols.into_iter()
                    .map(|(resources, flow)| {
                        for &e in &resources {
                            loads[e] = loads[e] + flow;
                        }
                        Column { resources, flow }
                    })
                    .collect()
            })
            .collect();
        let generated = (0..columns.len()).any(|i| game.fixed_strategies(i).is_none());
        Self { game, objective, generated, demands: game.demands(), columns, loads }
    }

    fn cost(&self, e: usize, x: T) -> T {
        let l = self.game.latency(e);
        match self.objective {
            Objective::Equilibrium => l.eval(x),
            Objective::Optimum => l.marginal(x),
        }
    }

    fn cost_slope(&self, e: usize, x: T) -> T {
        let l = self.game.latency(e);
        match self.objective {
            Objective::Equilibrium => l.derivative(x),
            Objective::Optimum => l.marginal_derivative(x),
        }
    }

    fn resource_costs(&self) -> Vec<T> {
        (0..self.loads.len()).map(|e| self.cost(e, self.loads[e])).collect()
    }

    fn column_cost(&self, col: &Column<T>, costs: &[T]) -> T {
        col.resources.iter().map(|&e| costs[e]).sum()
    }

    /// Cheapest strategy cost of type `i`, over all strategies (not just
    /// the current columns).
    fn best_cost(&self, i: usize, costs: &[T]) -> T {
        let fixed = self.game.fixed_strategies(i).is_some();
        let from_columns = self.columns[i].iter().map(|c| self.column_cost(c, costs)).fold(T::infinity(), T::min);
        if fixed {
            from_columns
        } else {
            let path = self.game.best_response(i, costs);
            let c: T = path.iter().map(|&e| costs[e]).sum();
            c.min(from_columns)
        }
    }

    fn gap(&self) -> T {
        let costs = self.resource_costs();
        let mut paid = T::zero();
        let mut floor = T::zero();
        for (i, cols) in self.columns.iter().enumerate() {
            if self.demands[i] <= T::zero() {
                continue;
            }
            for col in cols {
                paid = paid + col.flow * self.column_cost(col, &costs);
            }
            floor = floor + self.demands[i] * self.best_cost(i, &costs);
        }
        ((paid - floor) / paid.max(T::lit(GAP_FLOOR))).max(T::zero())
    }

    fn total_latency(&self) -> T {
        (0..self.loads.len()).map(|e| self.game.latency(e).total(self.loads[e])).sum()
    }

    fn potential(&self) -> T {
        (0..self.loads.len()).map(|e| self.game.latency(e).integral(self.loads[e])).sum()
    }

    fn update_type(&mut self, i: usize, tol: T) {
        if self.generated && self.game.fixed_strategies(i).is_none() {
            let costs = self.resource_costs();
            let path = self.game.best_response(i, &costs);
            if !self.columns[i].iter().any(|c| c.resources == path) {
                self.columns[i].push(Column { resources: path, flow: T::zero() });
            }
        }

        let threshold = T::lit(1e-3) * tol;
        let max_moves = 4 * self.columns[i].len() + 8;
        for _ in 0..max_moves {
            let col_costs: Vec<T> = self.columns[i]
                .iter()
                .map(|c| c.resources.iter().map(|&e| self.cost(e, self.loads[e])).sum())
                .collect();
            let mut lo = 0;
            let mut hi: Option<usize> = None;
            for (j, &c) in col_costs.iter().enumerate() {
                if c < col_costs[lo] {
                    lo = j;
                }
                if self.columns[i][j].flow > T::zero() && hi.is_none_or(|h| c > col_costs[h]) {
                    hi = Some(j);
                }
            }
            let Some(hi) = hi else { break };
            let spread = col_costs[hi] - col_costs[lo];
            if hi == lo || spread <= threshold * col_costs[hi].abs().max(T::lit(GAP_FLOOR)) {
                break;
            }
            if !self.shift(i, hi, lo) {
                break;
            }
        }

        if self.game.fixed_strategies(i).is_none() {
            self.columns[i].retain(|c| c.flow > T::zero());
        }
    }

    /// Moves flow from column `from` to column `to` of type `i` minimizing
    /// the objective along that direction. Returns false if nothing moved.
    fn shift(&mut self, i: usize, from: usize, to: usize) -> bool {
        let cols = &self.columns[i];
        let gain: Vec<usize> =
            cols[to].resources.iter().copied().filter(|e| !cols[from].resources.contains(e)).collect();
        let lose: Vec<usize> =
            cols[from].resources.iter().copied().filter(|e| !cols[to].resources.contains(e)).collect();
        let available = cols[from].flow;

        let slope = |d: T| -> T {
            let up: T = gain.iter().map(|&e| self.cost(e, self.loads[e] + d)).sum();
            let down: T = lose.iter().map(|&e| self.cost(e, (self.loads[e] - d).max(T::zero()))).sum();
            up - down
        };
        let curvature = |d: T| -> T {
            let up: T = gain.iter().map(|&e| self.cost_slope(e, self.loads[e] + d)).sum();
            let down: T = lose.iter().map(|&e| self.cost_slope(e, (self.loads[e] - d).max(T::zero()))).sum();
            up + down
        };

        let step = if slope(available) <= T::zero() {
            available
        } else {
            // slope is nondecreasing: safeguarded Newton on [lo, hi]
            let (mut lo, mut hi) = (T::zero(), available);
            let mut d = T::zero();
            let two = T::lit(2.0);
            for _ in 0..100 {
                let g = slope(d);
                if g > T::zero() {
                    hi = d.min(hi);
                } else {
                    lo = d.max(lo);
                }
                if hi - lo <= T::epsilon() * available * two {
                    break;
                }
                let h = curvature(d);
                let newton = if h > T::zero() { d - g / h } else { T::nan() };
                d = if newton > lo && newton < hi { newton } else { (lo + hi) / two };
            }
            lo
        };
        if !(step > T::zero()) {
            return false;
        }

        let cols = &mut self.columns[i];
        cols[from].flow = if step >= available { T::zero() } else { cols[from].flow - step };
        cols[to].flow = cols[to].flow + step;
        for &e in &gain {
            self.loads[e] = self.loads[e] + step;
        }
        for &e in &lose {
            self.loads[e] = (self.loads[e] - step).max(T::zero());
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{PlayerType, Resource};
    use crate::network::{Commodity, Edge};

    type L = LatencyFunction<f64>;

    fn pigou_like(c: f64) -> CongestionGame<f64> {
        CongestionGame::parallel_links(vec![L::constant(1.0).unwrap(), L::affine(1.0, c).unwrap()], 1.0).unwrap()
    }

    #[test]
    fn pigou_like_equilibrium_and_optimum() {
        let config = SolverConfig::default();
        for c in [0.0, 0.3, 0.5, 1.0] {
            let g = pigou_like(c);
            let eq = solve_equilibrium(&g, &config).unwrap();
            assert!(eq.converged);
            assert!((eq.total_latency - 1.0).abs() < 1e-7, "c={c}");
            let opt = solve_optimum(&g, &config).unwrap();
            assert!(opt.converged);
            let loads = g.edge_loads(&opt.profile);
            assert!((loads[0] - (1.0 + c) / 2.0).abs() < 1e-6, "c={c}");
        }
        let poa = price_of_anarchy(&pigou_like(0.5), &config).unwrap();
        assert!((poa.ratio - 16.0 / 15.0).abs() < 1e-6);
    }

    #[test]
    fn trivial_games() {
        let config = SolverConfig::default();
        let single = CongestionGame::parallel_links(vec![L::affine(1.0, 1.0).unwrap()], 5.0).unwrap();
        let r = solve_equilibrium(&single, &config).unwrap();
        assert_eq!(r.profile.flows(), &[vec![5.0]]);
        assert_eq!(price_of_anarchy(&single, &config).unwrap().ratio, 1.0);

        let twin = CongestionGame::parallel_links(vec![L::identity(), L::identity()], 1.0).unwrap();
        let r = solve_equilibrium(&twin, &config).unwrap();
        let loads = twin.edge_loads(&r.profile);
        assert!((loads[0] - 0.5).abs() < 1e-8 && (loads[1] - 0.5).abs() < 1e-8);
    }

    #[test]
    fn gap_examples() {
        let twin = CongestionGame::parallel_links(vec![L::identity(), L::identity()], 1.0).unwrap();
        let all_first = FlowProfile::concentrated(&twin, &[0]).unwrap();
        assert!((wardrop_gap(&twin, &all_first).unwrap() - 1.0).abs() < 1e-15);
        let g = pigou_like(0.5);
        let eq = FlowProfile::new(&g, vec![vec![0.5, 0.5]]).unwrap();
        assert!(wardrop_gap(&g, &eq).unwrap() < 1e-15);
        assert!(is_equilibrium(&g, &eq, 1e-9).unwrap());
        assert!(!is_equilibrium(&twin, &all_first, 1e-9).unwrap());

        let fixed = CongestionGame::new(
            vec![Resource { id: "a".into(), latency: L::identity() }],
            vec![PlayerType { demand: 2.0, strategies: vec![vec![0]] }],
        )
        .unwrap();
        let p = FlowProfile::concentrated(&fixed, &[0]).unwrap();
        assert_eq!(wardrop_gap(&fixed, &p).unwrap(), 0.0);
    }

    #[test]
    fn initializations_agree() {
        let g = CongestionGame::parallel_links(
            vec![
                L::new([(4, 1.0)], 1.0).unwrap(),
                L::constant(2.0).unwrap(),
                L::new([(1, 0.5), (4, 2.0)], 0.7).unwrap(),
            ],
            1.3,
        )
        .unwrap();
        let config = SolverConfig::default();
        let sums: Vec<f64> = [Init::FreeFlow, Init::Uniform, Init::Random(7), Init::Random(8)]
            .into_iter()
            .map(|init| {
                let r = solve(&g, Objective::Equilibrium, &config, init).unwrap();
                assert!(r.converged);
                r.total_latency
            })
            .collect();
        for s in &sums {
            assert!((s - sums[0]).abs() <= 1e-6 * sums[0]);
        }
    }

    #[test]
    fn zero_demand_types_are_inert() {
        let g = CongestionGame::new(
            vec![
                Resource { id: "a".into(), latency: L::identity() },
                Resource { id: "b".into(), latency: L::identity() },
            ],
            vec![
                PlayerType { demand: 0.0, strategies: vec![vec![0], vec![1]] },
                PlayerType { demand: 1.0, strategies: vec![vec![0], vec![1]] },
            ],
        )
        .unwrap();
        let r = solve_equilibrium(&g, &SolverConfig::default()).unwrap();
        assert!(r.converged);
        assert_eq!(r.profile.flows()[0], vec![0.0, 0.0]);
    }

    #[test]
    fn rejects_nonpositive_tolerance() {
        let g = pigou_like(0.5);
        let config = SolverConfig { tol: 0.0, max_iters: 10 };
        assert!(matches!(solve_equilibrium(&g, &config), Err(Error::Precondition(_))));
    }

    #[test]
    fn reports_non_convergence() {
        let g = CongestionGame::parallel_links(
            vec![L::new([(4, 1.0)], 0.0).unwrap(), L::new([(1, 3.0)], 0.0).unwrap()],
            1.0,
        )
        .unwrap();
        let config = SolverConfig { tol: 1e-14, max_iters: 0 };
        let r = solve_equilibrium(&g, &config).unwrap();
        assert!(!r.converged);
        assert!(matches!(price_of_anarchy(&g, &config), Err(Error::NotConverged { .. })));
    }

    #[test]
    fn braess_network() {
        // s=0, a=1, b=2, t=3; Braess graph with a cheap shortcut
        let nodes = (0..4).map(|i| format!("n{i}")).collect();
        let edges = vec![
            Edge { id: "sa".into(), from: 0, to: 1, latency: L::identity() },
            Edge { id: "at".into(), from: 1, to: 3, latency: L::constant(1.0).unwrap() },
            Edge { id: "sb".into(), from: 0, to: 2, latency: L::constant(1.0).unwrap() },
            Edge { id: "bt".into(), from: 2, to: 3, latency: L::identity() },
            Edge { id: "ab".into(), from: 1, to: 2, latency: L::constant(0.1).unwrap() },
        ];
        let g = NetworkCongestionGame::new(nodes, edges, vec![Commodity { source: 0, sink: 3, demand: 1.0 }]).unwrap();
        let poa = price_of_anarchy(&g, &SolverConfig::default()).unwrap();
        // equilibrium: 0.1 on each outer route, 0.8 via the shortcut, all
        // paths cost 1.9; optimum: even split over the outer routes
        assert!((poa.eq_cost - 1.9).abs() < 1e-6);
        assert!((poa.opt_cost - 1.5).abs() < 1e-6);
        let explicit = g.to_congestion_game(10).unwrap();
        let check = price_of_anarchy(&explicit, &SolverConfig::default()).unwrap();
        assert!((poa.eq_cost - check.eq_cost).abs() < 1e-7);
        assert!((poa.opt_cost - check.opt_cost).abs() < 1e-7);
        assert!(poa.ratio > 1.0);
        poa.eq.profile.validate(&g).unwrap();
        assert!(wardrop_gap(&g, &poa.eq.profile).unwrap() <= 1e-8);
    }

    #[test]
    fn single_precision() {
        let g = pigou_like(0.5).cast::<f32>();
        let config = SolverConfig { tol: 1e-5_f32, max_iters: 1000 };
        let poa = price_of_anarchy(&g, &config).unwrap();
        assert!((poa.ratio - 16.0 / 15.0).abs() < 1e-4);
    }

    #[test]
    fn marginal_cost_matches_finite_differences() {
        let l = L::new([(1, 0.5), (4, 2.0)], 0.7).unwrap();
        for x in [0.1, 0.7, 1.9] {
            let h = 1e-5;
            let fd = (l.total(x + h) - l.total(x - h)) / (2.0 * h);
            assert!((fd - l.marginal(x)).abs() <= 1e-6 * l.marginal(x));
        }
    }
}
