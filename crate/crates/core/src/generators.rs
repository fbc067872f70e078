//! Worst-case instances that make the bound formulas tight, each shipped
//! with a canonical equilibrium, a canonical (candidate) optimum and the
//! predicted ratio between the two.

use serde::Serialize;
use serde_json::json;

use crate::bounds::{eta_theta_point, gamma_point};
use crate::game::{CongestionGame, FlowProfile, PlayerType, Resource};
use crate::latency::LatencyFunction;
use crate::network::{Commodity, Edge, NetworkCongestionGame, PathFlows};
use crate::scalar::{Extended, Scalar};
use crate::solver::RoutingGame;
use crate::{Error, Result};

/// Slack when checking that a real-valued count is an integer.
const INTEGRALITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeneratorKind {
    PigouLike,
    MultilevelLb,
    ParallelGamma,
    TwolinkEta,
    NetworkExpansion,
}

pub struct GeneratedInstance<T: Scalar, G: RoutingGame<T>> {
    pub game: G,
    /// An exact equilibrium.
    pub canonical_eq: G::Profile,
    /// A feasible profile whose cost upper-bounds the optimum.
    pub canonical_opt: G::Profile,
    /// `SUM(canonical_eq) / SUM(canonical_opt)` from closed forms.
    pub predicted_poa: T,
    pub theta: Extended<T>,
    pub kind: GeneratorKind,
    pub parameters: serde_json::Value,
}

/// Metadata written next to a generated instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sidecar {
    pub predicted_poa: f64,
    pub theta: String,
    pub construction: GeneratorKind,
    pub parameters: serde_json::Value,
}

impl<T: Scalar, G: RoutingGame<T>> GeneratedInstance<T, G> {
    pub fn sidecar(&self) -> Sidecar {
        Sidecar {
            predicted_poa: self.predicted_poa.as_f64(),
            theta: self.theta.to_string(),
            construction: self.kind,
            parameters: self.parameters.clone(),
        }
    }
}

fn integral<T: Scalar>(x: T, what: &str) -> Result<usize> {
    let r = x.round();
    let scale = T::one().max(x.abs());
    if !(x >= T::zero()) || (x - r).abs() > T::lit(INTEGRALITY_TOL) * scale {
        return Err(Error::Precondition(format!("{what} must be a nonnegative integer, got {x}")));
    }
    r.to_usize().ok_or_else(|| Error::Precondition(format!("{what} is too large: {x}")))
}

fn require(cond: bool, msg: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Precondition(msg.into()))
    }
}

/// Two links `ℓ1 = 1`, `ℓ2 = x + c` with unit demand.
///
/// The equilibrium puts `c` on the first link and `1 − c` on the second;
/// both cost 1, so `SUM = 1` as for the all-on-first profile.
pub fn gen_pigou_like<T: Scalar>(c: T) -> Result<GeneratedInstance<T, CongestionGame<T>>> {
    require(c >= T::zero() && c <= T::one(), "c must lie in [0, 1]")?;
    let one = T::one();
    let two = T::lit(2.0);
    let game =
        CongestionGame::parallel_links(vec![LatencyFunction::constant(one)?, LatencyFunction::affine(one, c)?], one)?;
    let canonical_eq = FlowProfile::new(&game, vec![vec![c, one - c]])?;
    let canonical_opt = FlowProfile::new(&game, vec![vec![(one + c) / two, (one - c) / two]])?;
    let theta = if c == T::zero() { Extended::Infinite } else { Extended::Finite(one / c - one) };
    Ok(GeneratedInstance {
        game,
        canonical_eq,
        canonical_opt,
        predicted_poa: T::lit(4.0) / ((c + one) * (T::lit(3.0) - c)),
        theta,
        kind: GeneratorKind::PigouLike,
        parameters: json!({ "c": c.as_f64() }),
    })
}

/// Parameters of the multi-level load-balancing construction.
#[derive(Debug, Clone, PartialEq)]
pub struct MultilevelParams<T> {
    pub k: T,
    pub l: T,
    /// Homogeneous base latency.
    pub f: LatencyFunction<T>,
    pub theta: T,
    /// Out-degree of every level.
    pub n: usize,
    /// Number of levels.
    pub m: usize,
}

impl<T: Scalar> MultilevelParams<T> {
    pub fn validate(&self) -> Result<()> {
        require(self.k > self.l && self.l > T::zero(), "loads must satisfy k > l > 0")?;
        require(self.theta > T::zero() && self.theta.is_finite(), "theta must be positive and finite")?;
        require(self.m >= 2, "at least two levels required")?;
        require(self.n >= 1, "n must be positive")?;
        self.f.require_homogeneous("f")?;
        let in_degree = integral(self.l * T::from_count(self.n) / self.k, "l·n/k")?;
        require(in_degree > 0, "l·n/k must be positive")?;
        self.level_sizes().map(|_| ())
    }

    /// `N_s = n^{m−1} (l/k)^{m−s}` for `s = 1..=m`.
    pub fn level_sizes(&self) -> Result<Vec<usize>> {
        let top = T::from_count(self.n).powi(self.m as i32 - 1);
        (1..=self.m).map(|s| integral(top * (self.l / self.k).powi((self.m - s) as i32), "level size")).collect()
    }

    /// `(α_s, β_s)` with `α_s = 1 − (1+θ)^{s−m}`, `β_s = (1+θ)^{s−m} f(k)`.
    pub fn level_coefficients(&self, s: usize) -> (T, T) {
        let w = (T::one() + self.theta).powi(s as i32 - self.m as i32);
        ((T::one() - w).max(T::zero()), w * self.f.eval(self.k))
    }

    /// Closed-form `(SUM(eq), SUM(opt))`.
    pub fn closed_form_sums(&self) -> Result<(T, T)> {
        let sizes = self.level_sizes()?;
        let fk = self.f.eval(self.k);
        let fl = self.f.eval(self.l);
        let eq = (1..self.m).map(|s| T::from_count(sizes[s - 1]) * self.k * fk).sum();
        let opt = (2..=self.m)
            .map(|s| {
                let (a, b) = self.level_coefficients(s);
                T::from_count(sizes[s - 1]) * self.l * (a * fl + b)
            })
            .sum();
        Ok((eq, opt))
    }

    /// Each graph edge as `(level of tail, tail index, head index)`, indices
    /// global over all levels.
    fn graph_edges(&self, sizes: &[usize]) -> Vec<(usize, usize, usize)> {
        let offsets: Vec<usize> = sizes
            .iter()
            .scan(0, |acc, &n| {
                let o = *acc;
                *acc += n;
                Some(o)
            })
            .collect();
        let mut edges = Vec::new();
        for s in 0..self.m - 1 {
            for i in 0..sizes[s] {
                for j in 0..self.n {
                    let t = (i * self.n + j) % sizes[s + 1];
                    edges.push((s + 1, offsets[s] + i, offsets[s + 1] + t));
                }
            }
        }
        edges
    }
}

/// Load-balancing game on the `m`-level graph: nodes are resources, each
/// graph edge is a player type of demand `k/n` choosing its tail or head.
pub fn gen_multilevel_lb<T: Scalar>(params: &MultilevelParams<T>) -> Result<GeneratedInstance<T, CongestionGame<T>>> {
    params.validate()?;
    let sizes = params.level_sizes()?;
    let mut resources = Vec::new();
    for (s, &size) in sizes.iter().enumerate() {
        let (alpha, beta) = params.level_coefficients(s + 1);
        let latency = params.f.scaled_with_constant(alpha, beta)?;
        for i in 0..size {
            resources.push(Resource { id: format!("L{}_{}", s + 1, i), latency: latency.clone() });
        }
    }
    let weight = params.k / T::from_count(params.n);
    let edges = params.graph_edges(&sizes);
    let types =
        edges.iter().map(|&(_, u, v)| PlayerType { demand: weight, strategies: vec![vec![u], vec![v]] }).collect();
    let game = CongestionGame::new(resources, types)?;
    let canonical_eq = FlowProfile::concentrated(&game, &vec![0; edges.len()])?;
    let canonical_opt = FlowProfile::concentrated(&game, &vec![1; edges.len()])?;
    let (eq, opt) = params.closed_form_sums()?;
    Ok(GeneratedInstance {
        game,
        canonical_eq,
        canonical_opt,
        predicted_poa: eq / opt,
        theta: Extended::Finite(params.theta),
        kind: GeneratorKind::MultilevelLb,
        parameters: json!({
            "k": params.k.as_f64(),
            "l": params.l.as_f64(),
            "f": params.f.to_string(),
            "theta": params.theta.as_f64(),
            "n": params.n,
            "m": params.m,
        }),
    })
}

/// Parameters of the two-family parallel-link construction.
#[derive(Debug, Clone, PartialEq)]
pub struct ParallelGammaParams<T> {
    pub k1: T,
    pub l1: T,
    pub f1: LatencyFunction<T>,
    pub k2: T,
    pub l2: T,
    pub f2: LatencyFunction<T>,
    pub n: usize,
}

impl<T: Scalar> ParallelGammaParams<T> {
    /// Loads that make the construction approach the class bound for
    /// `f1 = x^p`, `f2 = x^q` (`l1 = l2 = 1`), with `k1`, `k2` rounded to
    /// multiples of `1/denominator` so that the link counts are integral.
    pub fn tight_for_degrees(p: u32, q: u32, denominator: usize) -> Result<Self> {
        require(q < p && q >= 1, "tight loads need 1 <= q < p")?;
        require(denominator >= 2, "denominator must be at least 2")?;
        let x = crate::bounds::gamma_poly_maximizer::<f64>(p, q)?;
        let ratio = |d: u32| d as f64 * x / ((d as f64 + 1.0) * (x - 1.0));
        let d = denominator as f64;
        let a = (ratio(p) * d).round().max(d + 1.0) as usize;
        let b = (ratio(q) * d).round().clamp(1.0, d - 1.0) as usize;
        let frac = |num: usize| T::from_count(num) / T::from_count(denominator);
        Ok(Self {
            k1: frac(a),
            l1: T::one(),
            f1: LatencyFunction::monomial(T::one(), p)?,
            k2: frac(b),
            l2: T::one(),
            f2: LatencyFunction::monomial(T::one(), q)?,
            n: denominator - b,
        })
    }

    fn minus_count(&self) -> Result<usize> {
        let m = integral((self.k1 - self.l1) / (self.l2 - self.k2) * T::from_count(self.n), "((k1-l1)/(l2-k2))·n")?;
        require(m > 0, "((k1-l1)/(l2-k2))·n must be positive")?;
        Ok(m)
    }
}

/// `n` links `ℓ+ = f2(k2)·f1` and `((k1−l1)/(l2−k2))·n` links
/// `ℓ− = f1(k1)·f2`, with total demand `k1|E+| + k2|E−|`.
pub fn gen_parallel_gamma<T: Scalar>(
    params: &ParallelGammaParams<T>,
) -> Result<GeneratedInstance<T, CongestionGame<T>>> {
    let ParallelGammaParams { k1, l1, k2, l2, n, .. } = *params;
    require(k1 > l1 && l1 > T::zero(), "loads must satisfy k1 > l1 > 0")?;
    require(k2 > T::zero() && k2 < l2, "loads must satisfy 0 < k2 < l2")?;
    require(n >= 1, "n must be positive")?;
    params.f1.require_homogeneous("f1")?;
    params.f2.require_homogeneous("f2")?;
    let minus = params.minus_count()?;
    let plus_latency = params.f1.scaled_with_constant(params.f2.eval(k2), T::zero())?;
    let minus_latency = params.f2.scaled_with_constant(params.f1.eval(k1), T::zero())?;
    let mut links = vec![plus_latency; n];
    links.extend(std::iter::repeat_n(minus_latency, minus));
    let demand = k1 * T::from_count(n) + k2 * T::from_count(minus);
    let game = CongestionGame::parallel_links(links, demand)?;
    let split = |a: T, b: T| {
        let mut f = vec![a; n];
        f.extend(std::iter::repeat_n(b, minus));
        FlowProfile::from_raw(vec![f])
    };
    Ok(GeneratedInstance {
        predicted_poa: gamma_point(k1, l1, &params.f1, k2, l2, &params.f2)?,
        canonical_eq: split(k1, k2),
        canonical_opt: split(l1, l2),
        theta: game.compute_theta(),
        game,
        kind: GeneratorKind::ParallelGamma,
        parameters: json!({
            "k1": k1.as_f64(), "l1": l1.as_f64(), "f1": params.f1.to_string(),
            "k2": k2.as_f64(), "l2": l2.as_f64(), "f2": params.f2.to_string(),
            "n": n,
        }),
    })
}

/// Two links `ℓu = θ·f + f(k)` and `ℓv = (1+θ)·f(k)` with demand `k`.
pub fn gen_twolink_eta<T: Scalar>(
    k: T,
    l: T,
    f: &LatencyFunction<T>,
    theta: T,
) -> Result<GeneratedInstance<T, CongestionGame<T>>> {
    require(k > l && l > T::zero(), "loads must satisfy k > l > 0")?;
    require(theta > T::zero() && theta.is_finite(), "theta must be positive and finite")?;
    f.require_homogeneous("f")?;
    let fk = f.eval(k);
    let u = f.scaled_with_constant(theta, fk)?;
    let v = LatencyFunction::constant((T::one() + theta) * fk)?;
    let game = CongestionGame::parallel_links(vec![u, v], k)?;
    let canonical_eq = FlowProfile::from_raw(vec![vec![k, T::zero()]]);
    let canonical_opt = FlowProfile::from_raw(vec![vec![l, k - l]]);
    Ok(GeneratedInstance {
        game,
        canonical_eq,
        canonical_opt,
        predicted_poa: eta_theta_point(k, l, f, theta)?,
        theta: Extended::Finite(theta),
        kind: GeneratorKind::TwolinkEta,
        parameters: json!({ "k": k.as_f64(), "l": l.as_f64(), "f": f.to_string(), "theta": theta.as_f64() }),
    })
}

/// Single-source network simulating the multi-level game.
///
/// Every resource of level `s` becomes a chain leaving the common source:
/// `α_s·h` edges of latency `f` followed by `β_s·h/β` edges of constant
/// latency `β`. Each player type gets its own sink, joined to the ends of
/// its two chains by constant-`β` edges. A path through resource `e` then
/// costs `h·ℓ_e(k_e) + β`.
pub fn expand_to_network<T: Scalar>(
    params: &MultilevelParams<T>,
    h: usize,
    beta: T,
) -> Result<GeneratedInstance<T, NetworkCongestionGame<T>>> {
    params.validate()?;
    require(h >= 1, "h must be positive")?;
    require(beta > T::zero() && beta.is_finite(), "beta must be positive")?;
    let sizes = params.level_sizes()?;
    let hf = T::from_count(h);
    let mut counts = Vec::with_capacity(params.m);
    for s in 1..=params.m {
        let (alpha, b) = params.level_coefficients(s);
        let hint = "use a rational theta (perturb it downward) and h making every count integral";
        let with_hint = |e: Error| match e {
            Error::Precondition(msg) => Error::Precondition(format!("{msg}; {hint}")),
            other => other,
        };
        let a_s = integral(alpha * hf, "α_s·h").map_err(with_hint)?;
        let b_s = integral(b * hf / beta, "β_s·h/β").map_err(with_hint)?;
        counts.push((a_s, b_s));
    }

    let constant = LatencyFunction::constant(beta)?;
    let mut nodes = vec!["source".to_string()];
    let mut edges = Vec::new();
    let mut chain_end = Vec::new();
    let mut chain_edges = Vec::new();
    for (s, &size) in sizes.iter().enumerate() {
        let (a_s, b_s) = counts[s];
        for i in 0..size {
            let mut at = 0;
            let mut list = Vec::with_capacity(a_s + b_s);
            for j in 0..a_s + b_s {
                nodes.push(format!("L{}_{}_{}", s + 1, i, j + 1));
                let to = nodes.len() - 1;
                let latency = if j < a_s { params.f.clone() } else { constant.clone() };
                list.push(edges.len());
                edges.push(Edge { id: format!("L{}_{}_e{}", s + 1, i, j + 1), from: at, to, latency });
                at = to;
            }
            chain_end.push(at);
            chain_edges.push(list);
        }
    }

    let weight = params.k / T::from_count(params.n);
    let pairs = params.graph_edges(&sizes);
    let mut commodities = Vec::with_capacity(pairs.len());
    let mut eq_paths = Vec::with_capacity(pairs.len());
    let mut opt_paths = Vec::with_capacity(pairs.len());
    for (t, &(_, u, v)) in pairs.iter().enumerate() {
        nodes.push(format!("sink{t}"));
        let sink = nodes.len() - 1;
        let mut route = |r: usize, tag: &str| {
            let id = edges.len();
            edges.push(Edge { id: format!("sink{t}_{tag}"), from: chain_end[r], to: sink, latency: constant.clone() });
            let mut path = chain_edges[r].clone();
            path.push(id);
            path
        };
        let via_u = route(u, "u");
        let via_v = route(v, "v");
        eq_paths.push(vec![(via_u, weight)]);
        opt_paths.push(vec![(via_v, weight)]);
        commodities.push(Commodity { source: 0, sink, demand: weight });
    }

    let game = NetworkCongestionGame::new(nodes, edges, commodities)?;
    let (eq, opt) = params.closed_form_sums()?;
    let w_beta = weight * T::from_count(pairs.len()) * beta;
    // free-flow path cost through level s is β_s·h + β
    let theta = (1..params.m)
        .map(|s| {
            let (_, lo) = params.level_coefficients(s);
            let (_, hi) = params.level_coefficients(s + 1);
            (hi * hf + beta) / (lo * hf + beta) - T::one()
        })
        .fold(T::zero(), T::max);
    Ok(GeneratedInstance {
        game,
        canonical_eq: PathFlows { paths: eq_paths },
        canonical_opt: PathFlows { paths: opt_paths },
        predicted_poa: (eq * hf + w_beta) / (opt * hf + w_beta),
        theta: Extended::Finite(theta),
        kind: GeneratorKind::NetworkExpansion,
        parameters: json!({
            "k": params.k.as_f64(),
            "l": params.l.as_f64(),
            "f": params.f.to_string(),
            "theta": params.theta.as_f64(),
            "n": params.n,
            "m": params.m,
            "h": h,
            "beta": beta.as_f64(),
        }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::{eta_theta_poly, gamma_poly, gamma_theta_point};
    use crate::solver::{is_equilibrium, wardrop_gap};

    type L = LatencyFunction<f64>;

    fn ml(m: usize) -> MultilevelParams<f64> {
        MultilevelParams { k: 2.0, l: 1.0, f: L::identity(), theta: 1.0, n: 2, m }
    }

    #[test]
    fn pigou_like_examples() {
        let g = gen_pigou_like(0.0_f64).unwrap();
        assert!((g.predicted_poa - 4.0 / 3.0).abs() < 1e-15);
        assert_eq!(g.theta, Extended::Infinite);
        let g = gen_pigou_like(0.5_f64).unwrap();
        assert!((g.predicted_poa - 16.0 / 15.0).abs() < 1e-15);
        assert_eq!(g.theta, Extended::Finite(1.0));
        let g = gen_pigou_like(1.0).unwrap();
        assert_eq!(g.predicted_poa, 1.0);
        assert_eq!(g.canonical_eq, g.canonical_opt);
        for c in [0.0, 0.2, 0.5, 1.0] {
            let g = gen_pigou_like::<f64>(c).unwrap();
            assert!(wardrop_gap(&g.game, &g.canonical_eq).unwrap() < 1e-12);
            let ratio = g.game.total_latency(&g.canonical_eq) / g.game.total_latency(&g.canonical_opt);
            assert!((ratio - g.predicted_poa).abs() < 1e-12);
        }
        assert!(gen_pigou_like(1.5).is_err());
    }

    #[test]
    fn multilevel_structure() {
        let p = ml(3);
        assert_eq!(p.level_sizes().unwrap(), vec![1, 2, 4]);
        let g = gen_multilevel_lb(&p).unwrap();
        assert_eq!(g.game.resources().len(), 7);
        assert_eq!(g.game.types().len(), 6);
        let loads = g.game.edge_loads(&g.canonical_eq);
        assert_eq!(loads, vec![2.0, 2.0, 2.0, 0.0, 0.0, 0.0, 0.0]);
        // every strategy costs f(k) at the canonical equilibrium
        for ty in g.game.types() {
            for s in &ty.strategies {
                assert!((g.game.cost_at(&loads, s) - 2.0).abs() < 1e-12);
            }
        }
        for s in 1..3 {
            let (_, b) = p.level_coefficients(s);
            let (_, b_next) = p.level_coefficients(s + 1);
            assert!((b * 2.0 - b_next).abs() < 1e-12);
        }
        assert!(wardrop_gap(&g.game, &g.canonical_eq).unwrap() < 1e-12);
        let ratio = g.game.total_latency(&g.canonical_eq) / g.game.total_latency(&g.canonical_opt);
        assert!((ratio - g.predicted_poa).abs() < 1e-12);
        let Extended::Finite(t) = g.game.compute_theta() else { panic!() };
        assert!((t - 1.0).abs() < 1e-9);
    }

    #[test]
    fn multilevel_converges() {
        let limit = gamma_theta_point(2.0, 1.0, &L::identity(), 1.0).unwrap();
        let mut last = 0.0;
        for m in 2..=16 {
            let (eq, opt) = ml(m).closed_form_sums().unwrap();
            let v = eq / opt;
            assert!(v >= last - 1e-15);
            last = v;
        }
        assert!((last - limit).abs() < 1e-3);
    }

    #[test]
    fn multilevel_preconditions() {
        let mut p = ml(3);
        p.l = 0.7;
        assert!(gen_multilevel_lb(&p).is_err());
        let mut p = ml(3);
        p.f = L::affine(1.0, 1.0).unwrap();
        assert!(gen_multilevel_lb(&p).is_err());
        assert!(gen_multilevel_lb(&ml(1)).is_err());
    }

    #[test]
    fn parallel_gamma_example() {
        let params =
            ParallelGammaParams { k1: 2.0, l1: 1.0, f1: L::identity(), k2: 0.5, l2: 1.0, f2: L::identity(), n: 2 };
        let g = gen_parallel_gamma(&params).unwrap();
        assert_eq!(g.game.resources().len(), 6);
        let loads = g.game.edge_loads(&g.canonical_eq);
        let costs: Vec<f64> = (0..6).map(|e| g.game.latency(e).eval(loads[e])).collect();
        assert!(costs.iter().all(|&c| (c - 1.0).abs() < 1e-15));
        let w = g.game.total_demand();
        assert_eq!(w, 2.0 * 2.0 + 0.5 * 4.0);
        assert_eq!(g.game.edge_loads(&g.canonical_opt).iter().sum::<f64>(), w);
        assert!((g.predicted_poa - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(g.theta, Extended::Finite(0.0));
    }

    #[test]
    fn parallel_gamma_tight_loads() {
        for (p, q) in [(2, 1), (4, 1), (3, 2)] {
            let params = ParallelGammaParams::<f64>::tight_for_degrees(p, q, 200).unwrap();
            let g = gen_parallel_gamma(&params).unwrap();
            let target = gamma_poly::<f64>(p, q).unwrap();
            assert!((g.predicted_poa - target).abs() < 1e-3, "({p},{q}) {} vs {target}", g.predicted_poa);
            assert!(is_equilibrium(&g.game, &g.canonical_eq, 1e-12).unwrap());
        }
    }

    #[test]
    fn twolink_eta_examples() {
        let g = gen_twolink_eta(2.0, 1.0, &L::identity(), 1.0).unwrap();
        assert!((g.predicted_poa - 8.0 / 7.0).abs() < 1e-15);
        let ff: Vec<f64> = (0..2).map(|e| g.game.latency(e).beta()).collect();
        assert!((ff[0] * 2.0 - ff[1]).abs() < 1e-15);
        assert!(wardrop_gap(&g.game, &g.canonical_eq).unwrap() < 1e-15);
        let k = 5f64.powf(0.25);
        let g = gen_twolink_eta(k, 1.0, &L::monomial(1.0, 4).unwrap(), 0.5).unwrap();
        assert!((g.predicted_poa - eta_theta_poly(4, 0.5).unwrap()).abs() < 1e-12);
        assert!(gen_twolink_eta(1.0, 2.0, &L::identity(), 1.0).is_err());
    }

    #[test]
    fn network_expansion_costs() {
        let p = ml(3);
        assert!(expand_to_network(&p, 3, 0.5).is_err());
        let h = 4;
        let g = expand_to_network(&p, h, 0.5).unwrap();
        assert!(g.game.is_single_source());
        g.canonical_eq.validate(&g.game).unwrap();
        g.canonical_opt.validate(&g.game).unwrap();
        let lb = gen_multilevel_lb(&p).unwrap();
        let lb_loads = lb.game.edge_loads(&lb.canonical_eq);
        let net_loads = g.game.edge_loads(&g.canonical_eq);
        // path through resource u costs h·ℓ_u + β
        for (i, ty) in lb.game.types().iter().enumerate() {
            let path = &g.canonical_eq.paths[i][0].0;
            let expect = h as f64 * lb.game.cost_at(&lb_loads, &ty.strategies[0]) + 0.5;
            assert!((g.game.path_cost(&net_loads, path) - expect).abs() < 1e-9);
        }
        assert!(wardrop_gap(&g.game, &g.canonical_eq).unwrap() < 1e-12);
        let ratio = g.game.total_latency(&g.canonical_eq) / g.game.total_latency(&g.canonical_opt);
        assert!((ratio - g.predicted_poa).abs() < 1e-12);
        let computed = g.game.compute_theta(1000).unwrap();
        let Extended::Finite(t) = computed else { panic!() };
        assert!((Extended::Finite(t).to_f64_lossy() - g.theta.to_f64_lossy()).abs() < 1e-9);
        assert!(t < 1.0);
    }
}
