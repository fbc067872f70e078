//! Non-atomic congestion games with explicit strategy sets.

use crate::latency::LatencyFunction;
use crate::scalar::{Extended, Scalar};
use crate::{Error, Result};

/// Absolute tolerance for flow conservation.
pub const CONSERVATION_TOL: f64 = 1e-9;

/// Relative tolerance on free-flow ratios in [`CongestionGame::is_theta_free_flow`].
pub const FREE_FLOW_RATIO_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Resource<T> {
    pub id: String,
    pub latency: LatencyFunction<T>,
}

/// A population of infinitesimal players sharing a demand and a strategy set.
#[derive(Debug, Clone, PartialEq)]
pub struct PlayerType<T> {
    pub demand: T,
    /// Each strategy is a set of resource indices.
    pub strategies: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CongestionGame<T> {
    resources: Vec<Resource<T>>,
    types: Vec<PlayerType<T>>,
}

impl<T: Scalar> CongestionGame<T> {
    pub fn new(resources: Vec<Resource<T>>, types: Vec<PlayerType<T>>) -> Result<Self> {
        for (i, ty) in types.iter().enumerate() {
            if !ty.demand.is_finite() || ty.demand < T::zero() {
                return Err(Error::InvalidGame(format!("type {i} has invalid demand {}", ty.demand)));
            }
            if ty.strategies.is_empty() {
                return Err(Error::InvalidGame(format!("type {i} has no strategies")));
            }
            for (s, strategy) in ty.strategies.iter().enumerate() {
                if strategy.is_empty() {
                    return Err(Error::InvalidGame(format!("strategy {s} of type {i} is empty")));
                }
                let mut seen = strategy.clone();
                seen.sort_unstable();
                seen.dedup();
                if seen.len() != strategy.len() {
                    return Err(Error::InvalidGame(format!("strategy {s} of type {i} repeats a resource")));
                }
                if let Some(&bad) = strategy.iter().find(|&&e| e >= resources.len()) {
                    return Err(Error::InvalidGame(format!(
                        "strategy {s} of type {i} references unknown resource {bad}"
                    )));
                }
            }
        }
        Ok(Self { resources, types })
    }

    /// Parallel links: one type of the given demand choosing any single link.
    pub fn parallel_links(latencies: Vec<LatencyFunction<T>>, demand: T) -> Result<Self> {
        let n = latencies.len();
        let resources = latencies
            .into_iter()
            .enumerate()
            .map(|(i, latency)| Resource { id: format!("e{}", i + 1), latency })
            .collect();
        let types = vec![PlayerType { demand, strategies: (0..n).map(|e| vec![e]).collect() }];
        Self::new(resources, types)
    }

    pub fn resources(&self) -> &[Resource<T>] {
        &self.resources
    }

    pub fn types(&self) -> &[PlayerType<T>] {
        &self.types
    }

    pub fn latency(&self, e: usize) -> &LatencyFunction<T> {
        &self.resources[e].latency
    }

    pub fn resource_index(&self, id: &str) -> Option<usize> {
        self.resources.iter().position(|r| r.id == id)
    }

    pub fn total_demand(&self) -> T {
        self.types.iter().map(|t| t.demand).sum()
    }

    pub fn strategy_count(&self) -> usize {
        self.types.iter().map(|t| t.strategies.len()).sum()
    }

    /// Every strategy is a single resource.
    pub fn is_load_balancing(&self) -> bool {
        self.types.iter().all(|t| t.strategies.iter().all(|s| s.len() == 1))
    }

    /// Load balancing with a strategy set shared by all types.
    pub fn is_parallel_link(&self) -> bool {
        if !self.is_load_balancing() {
            return false;
        }
        let canonical = |t: &PlayerType<T>| {
            let mut v: Vec<usize> = t.strategies.iter().map(|s| s[0]).collect();
            v.sort_unstable();
            v.dedup();
            v
        };
        let mut it = self.types.iter().map(canonical);
        match it.next() {
            Some(first) => it.all(|other| other == first),
            None => true,
        }
    }

    fn strategy(&self, ty: usize, strategy: usize) -> Result<&[usize]> {
        self.types
            .get(ty)
            .and_then(|t| t.strategies.get(strategy))
            .map(Vec::as_slice)
            .ok_or(Error::UnknownStrategy { ty, strategy })
    }

    /// `Σ_{e∈S} ℓ_e(0)`.
    pub fn free_flow_cost(&self, ty: usize, strategy: usize) -> Result<T> {
        Ok(self.free_flow_cost_of(self.strategy(ty, strategy)?))
    }

    pub fn free_flow_cost_of(&self, resources: &[usize]) -> T {
        resources.iter().map(|&e| self.latency(e).beta()).sum()
    }

    /// Least `θ` such that the game is `θ`-free-flow.
    ///
    /// A pair of strategies with zero free-flow cost on both sides imposes no
    /// constraint; a positive cost against a zero one forces `+∞`.
    pub fn compute_theta(&self) -> Extended<T> {
        free_flow_theta(
            self.types.iter().map(|t| t.strategies.iter().map(|s| self.free_flow_cost_of(s)).collect::<Vec<_>>()),
        )
    }

    pub fn is_theta_free_flow(&self, theta: T) -> bool {
        theta_within(self.compute_theta(), theta)
    }

    /// Per-resource congestion `k_e`.
    pub fn edge_loads(&self, profile: &FlowProfile<T>) -> Vec<T> {
        let mut loads = vec![T::zero(); self.resources.len()];
        for (ty, flows) in self.types.iter().zip(profile.flows()) {
            for (strategy, &amount) in ty.strategies.iter().zip(flows) {
                for &e in strategy {
                    loads[e] = loads[e] + amount;
                }
            }
        }
        loads
    }

    /// `c_S(σ) = Σ_{e∈S} ℓ_e(k_e(σ))`.
    pub fn strategy_cost(&self, profile: &FlowProfile<T>, ty: usize, strategy: usize) -> Result<T> {
        let resources = self.strategy(ty, strategy)?;
        let loads = self.edge_loads(profile);
        Ok(self.cost_at(&loads, resources))
    }

    pub fn cost_at(&self, loads: &[T], resources: &[usize]) -> T {
        resources.iter().map(|&e| self.latency(e).eval(loads[e])).sum()
    }

    /// `SUM(σ) = Σ_e k_e ℓ_e(k_e)`.
    pub fn total_latency(&self, profile: &FlowProfile<T>) -> T {
        let loads = self.edge_loads(profile);
        total_latency_of(&loads, |e| self.latency(e))
    }

    /// `SUM` aggregated per strategy: `Σ_{i,S} σ_{i,S} c_S(σ)`.
    pub fn total_latency_by_strategy(&self, profile: &FlowProfile<T>) -> T {
        let loads = self.edge_loads(profile);
        self.types
            .iter()
            .zip(profile.flows())
            .flat_map(|(ty, flows)| {
                ty.strategies.iter().zip(flows).map(|(s, &amount)| amount * self.cost_at(&loads, s))
            })
            .sum()
    }

    pub fn cast<U: Scalar>(&self) -> CongestionGame<U> {
        CongestionGame {
            resources: self
                .resources
                .iter()
                .map(|r| Resource { id: r.id.clone(), latency: r.latency.cast() })
                .collect(),
            types: self
                .types
                .iter()
                .map(|t| PlayerType { demand: U::lit(t.demand.as_f64()), strategies: t.strategies.clone() })
                .collect(),
        }
    }
}

pub(crate) fn total_latency_of<'a, T: Scalar>(loads: &[T], latency: impl Fn(usize) -> &'a LatencyFunction<T>) -> T {
    loads.iter().enumerate().map(|(e, &k)| latency(e).total(k)).sum()
}

/// `max_i max_{S,S'} ff(S)/ff(S') − 1` over per-type free-flow cost lists.
pub(crate) fn free_flow_theta<T, I>(per_type: I) -> Extended<T>
where
    T: Scalar,
    I: IntoIterator<Item = Vec<T>>,
{
    let mut worst = T::one();
    for costs in per_type {
        let Some(max) = costs.iter().copied().reduce(T::max) else {
            continue;
        };
        let min = costs.iter().copied().fold(max, T::min);
        if max <= T::zero() {
            continue;
        }
        if min <= T::zero() {
            return Extended::Infinite;
        }
        worst = worst.max(max / min);
    }
    Extended::Finite((worst - T::one()).max(T::zero()))
}

pub(crate) fn theta_within<T: Scalar>(actual: Extended<T>, theta: T) -> bool {
    match actual {
        Extended::Infinite => false,
        Extended::Finite(t) => T::one() + t <= (T::one() + theta) * (T::one() + T::lit(FREE_FLOW_RATIO_TOL)),
    }
}

/// Flow amounts `σ_{i,S}` indexed by type and strategy.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowProfile<T> {
    flows: Vec<Vec<T>>,
}

impl<T: Scalar> FlowProfile<T> {
    /// Validates shape, nonnegativity and per-type conservation.
    pub fn new(game: &CongestionGame<T>, flows: Vec<Vec<T>>) -> Result<Self> {
        if flows.len() != game.types().len() {
            return Err(Error::InvalidProfile(format!("expected {} types, got {}", game.types().len(), flows.len())));
        }
        for (i, (ty, f)) in game.types().iter().zip(&flows).enumerate() {
            if f.len() != ty.strategies.len() {
                return Err(Error::InvalidProfile(format!(
                    "type {i}: expected {} strategy flows, got {}",
                    ty.strategies.len(),
                    f.len()
                )));
            }
            if f.iter().any(|&x| !x.is_finite() || x < T::zero()) {
                return Err(Error::InvalidProfile(format!("type {i} has a negative flow")));
            }
            let total: T = f.iter().copied().sum();
            if (total - ty.demand).abs() > T::lit(CONSERVATION_TOL) {
                return Err(Error::InvalidProfile(format!("type {i}: flows sum to {total}, demand is {}", ty.demand)));
            }
        }
        Ok(Self { flows })
    }

    /// Every type routes its whole demand on `choice[i]`.
    pub fn concentrated(game: &CongestionGame<T>, choice: &[usize]) -> Result<Self> {
        if choice.len() != game.types().len() {
            return Err(Error::InvalidProfile("one choice per type required".into()));
        }
        let mut flows = Vec::with_capacity(choice.len());
        for (i, (ty, &c)) in game.types().iter().zip(choice).enumerate() {
            if c >= ty.strategies.len() {
                return Err(Error::UnknownStrategy { ty: i, strategy: c });
            }
            let mut f = vec![T::zero(); ty.strategies.len()];
            f[c] = ty.demand;
            flows.push(f);
        }
        Ok(Self { flows })
    }

    /// Skips validation; callers guarantee shape and conservation.
    pub(crate) fn from_raw(flows: Vec<Vec<T>>) -> Self {
        Self { flows }
    }

    pub fn flows(&self) -> &[Vec<T>] {
        &self.flows
    }

    pub fn flow(&self, ty: usize, strategy: usize) -> T {
        self.flows[ty][strategy]
    }

    /// `a·self + b·other`, unchecked against a game.
    pub fn combine(&self, a: T, other: &Self, b: T) -> Self {
        Self {
            flows: self
                .flows
                .iter()
                .zip(&other.flows)
                .map(|(x, y)| x.iter().zip(y).map(|(&u, &v)| a * u + b * v).collect())
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type L = LatencyFunction<f64>;

    fn pigou_like(c: f64) -> CongestionGame<f64> {
        CongestionGame::parallel_links(vec![L::constant(1.0).unwrap(), L::affine(1.0, c).unwrap()], 1.0).unwrap()
    }

    #[test]
    fn loads_examples() {
        let g = pigou_like(0.5);
        let all_e1 = FlowProfile::concentrated(&g, &[0]).unwrap();
        assert_eq!(g.edge_loads(&all_e1), vec![1.0, 0.0]);
        let c = 0.3;
        let opt = FlowProfile::new(&g, vec![vec![(1.0 + c) / 2.0, (1.0 - c) / 2.0]]).unwrap();
        let loads = g.edge_loads(&opt);
        assert!((loads[0] - 0.65).abs() < 1e-15 && (loads[1] - 0.35).abs() < 1e-15);

        let empty = CongestionGame::parallel_links(vec![L::identity(), L::identity()], 0.0).unwrap();
        let p = FlowProfile::concentrated(&empty, &[0]).unwrap();
        assert_eq!(empty.edge_loads(&p), vec![0.0, 0.0]);
        assert_eq!(empty.total_latency(&p), 0.0);
    }

    #[test]
    fn strategy_cost_examples() {
        let c = 0.5;
        let g = pigou_like(c);
        let all_e1 = FlowProfile::concentrated(&g, &[0]).unwrap();
        assert_eq!(g.strategy_cost(&all_e1, 0, 0).unwrap(), 1.0);
        assert_eq!(g.strategy_cost(&all_e1, 0, 1).unwrap(), c);
        assert!(matches!(g.strategy_cost(&all_e1, 0, 2), Err(Error::UnknownStrategy { ty: 0, strategy: 2 })));

        let two_edges = CongestionGame::new(
            vec![
                Resource { id: "a".into(), latency: L::identity() },
                Resource { id: "b".into(), latency: L::identity() },
            ],
            vec![PlayerType { demand: 1.0, strategies: vec![vec![0, 1]] }],
        )
        .unwrap();
        let p = FlowProfile::concentrated(&two_edges, &[0]).unwrap();
        assert_eq!(two_edges.strategy_cost(&p, 0, 0).unwrap(), 2.0);
    }

    #[test]
    fn total_latency_examples() {
        for c in [0.0, 0.25, 0.5, 1.0] {
            let g = pigou_like(c);
            let eq = FlowProfile::new(&g, vec![vec![c, 1.0 - c]]).unwrap();
            assert!((g.total_latency(&eq) - 1.0).abs() < 1e-12);
            let all_e1 = FlowProfile::concentrated(&g, &[0]).unwrap();
            assert_eq!(g.total_latency(&all_e1), 1.0);
            let opt = FlowProfile::new(&g, vec![vec![(1.0 + c) / 2.0, (1.0 - c) / 2.0]]).unwrap();
            let expect = (c + 1.0) * (3.0 - c) / 4.0;
            assert!((g.total_latency(&opt) - expect).abs() < 1e-12);
            assert!((g.total_latency_by_strategy(&opt) - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn free_flow_cost_examples() {
        let g = pigou_like(0.4);
        assert_eq!(g.free_flow_cost(0, 0).unwrap(), 1.0);
        assert_eq!(g.free_flow_cost(0, 1).unwrap(), 0.4);
        let g2 = CongestionGame::new(
            vec![
                Resource { id: "a".into(), latency: L::affine(1.0, 0.3).unwrap() },
                Resource { id: "b".into(), latency: L::affine(1.0, 0.7).unwrap() },
            ],
            vec![PlayerType { demand: 1.0, strategies: vec![vec![0, 1]] }],
        )
        .unwrap();
        assert!((g2.free_flow_cost(0, 0).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn theta_examples() {
        assert_eq!(pigou_like(0.0).compute_theta(), Extended::Infinite);
        let Extended::Finite(t) = pigou_like(0.5).compute_theta() else { panic!() };
        assert!((t - 1.0).abs() < 1e-15);
        let Extended::Finite(t) = pigou_like(0.2).compute_theta() else { panic!() };
        assert!((t - 4.0).abs() < 1e-12);

        let single = CongestionGame::parallel_links(vec![L::affine(1.0, 2.0).unwrap()], 1.0).unwrap();
        assert_eq!(single.compute_theta(), Extended::Finite(0.0));

        // homogeneous links: 0/0 imposes nothing
        let homog = CongestionGame::parallel_links(vec![L::identity(), L::identity()], 1.0).unwrap();
        assert_eq!(homog.compute_theta(), Extended::Finite(0.0));

        assert!(pigou_like(0.5).is_theta_free_flow(1.0));
        assert!(!pigou_like(0.5).is_theta_free_flow(0.5));
        assert!(!pigou_like(0.0).is_theta_free_flow(1e9));
    }

    #[test]
    fn class_flags() {
        let g = pigou_like(0.5);
        assert!(g.is_load_balancing() && g.is_parallel_link());
        let lb = CongestionGame::new(
            vec![
                Resource { id: "a".into(), latency: L::identity() },
                Resource { id: "b".into(), latency: L::identity() },
                Resource { id: "c".into(), latency: L::identity() },
            ],
            vec![
                PlayerType { demand: 1.0, strategies: vec![vec![0], vec![1]] },
                PlayerType { demand: 1.0, strategies: vec![vec![1], vec![2]] },
            ],
        )
        .unwrap();
        assert!(lb.is_load_balancing() && !lb.is_parallel_link());
    }

    #[test]
    fn rejects_bad_games_and_profiles() {
        let r = vec![Resource { id: "a".into(), latency: L::identity() }];
        assert!(CongestionGame::new(r.clone(), vec![PlayerType { demand: 1.0, strategies: vec![vec![1]] }]).is_err());
        assert!(CongestionGame::new(r.clone(), vec![PlayerType { demand: -1.0, strategies: vec![vec![0]] }]).is_err());
        assert!(CongestionGame::new(r.clone(), vec![PlayerType { demand: 1.0, strategies: vec![] }]).is_err());
        assert!(CongestionGame::new(r.clone(), vec![PlayerType { demand: 1.0, strategies: vec![vec![0, 0]] }]).is_err());

        let g = pigou_like(0.5);
        assert!(FlowProfile::new(&g, vec![vec![0.5, 0.4]]).is_err());
        assert!(FlowProfile::new(&g, vec![vec![1.5, -0.5]]).is_err());
        assert!(FlowProfile::new(&g, vec![vec![1.0]]).is_err());
    }
}
