//! Exhaustive grid search over flow splits, used as an independent oracle
//! for tiny instances.
//!
//! A full lattice at the requested resolution is too large beyond two free
//! coordinates, so the search runs on successively finer boxes: each level
//! evaluates at most [`POINTS_PER_LEVEL`] lattice points and the next level
//! zooms in around the best point, until the lattice step reaches
//! `1/grid_resolution` of each type's demand.
//!
//! The equilibrium candidate is the grid minimizer of the potential (which
//! is where the Wardrop gap vanishes); the optimum candidate is the grid
//! minimizer of `SUM`.

use crate::game::{CongestionGame, FlowProfile};
use crate::scalar::Scalar;
use crate::solver::{wardrop_gap, PoAReport, SolveReport};
use crate::{Error, Result};

/// Largest total number of strategies accepted.
pub const MAX_STRATEGIES: usize = 6;

/// Lattice points evaluated per zoom level.
pub const POINTS_PER_LEVEL: usize = 100_000;

pub fn brute_force_poa<T: Scalar>(
    game: &CongestionGame<T>,
    grid_resolution: usize,
) -> Result<PoAReport<T, FlowProfile<T>>> {
    if game.strategy_count() > MAX_STRATEGIES {
        return Err(Error::TooLarge(format!(
            "{} strategies, at most {MAX_STRATEGIES} supported",
            game.strategy_count()
        )));
    }
    if grid_resolution == 0 {
        return Err(Error::Precondition("grid resolution must be positive".into()));
    }

    let eq = search(game, grid_resolution, |e, k| game.latency(e).integral(k))?;
    let opt = search(game, grid_resolution, |e, k| game.latency(e).total(k))?;
    let eq_cost = eq.total_latency;
    let opt_cost = opt.total_latency;
    let ratio = if opt_cost > T::zero() { eq_cost / opt_cost } else { T::one() };
    Ok(PoAReport { eq_cost, opt_cost, ratio, eq, opt })
}

fn search<T: Scalar>(
    game: &CongestionGame<T>,
    resolution: usize,
    term: impl Fn(usize, T) -> T,
) -> Result<SolveReport<T, FlowProfile<T>>> {
    // one free coordinate per strategy except the last of each type
    let owners: Vec<usize> =
        game.types().iter().enumerate().flat_map(|(i, t)| std::iter::repeat_n(i, t.strategies.len() - 1)).collect();
    let dims = owners.len();
    let target_step = 1.0 / resolution as f64;

    let evaluate = |u: &[f64]| -> Option<(T, Vec<Vec<T>>)> {
        let flows = to_flows(game, &owners, u)?;
        let loads = game.edge_loads(&FlowProfile::from_raw(flows.clone()));
        let value = (0..loads.len()).map(|e| term(e, loads[e])).sum();
        Some((value, flows))
    };

    let per_dim = if dims == 0 {
        0
    } else {
        let cap = (POINTS_PER_LEVEL as f64).powf(1.0 / dims as f64).floor() as usize;
        cap.saturating_sub(1).clamp(2, resolution.max(2))
    };
    let mut lo = vec![0.0; dims];
    let mut hi = vec![1.0; dims];
    let mut best: Option<(T, Vec<f64>, Vec<Vec<T>>)> = None;
    let mut evaluated = 0usize;

    loop {
        let steps: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| (b - a) / per_dim.max(1) as f64).collect();
        let mut index = vec![0usize; dims];
        let mut u = lo.clone();
        loop {
            evaluated += 1;
            if let Some((value, flows)) = evaluate(&u) {
                if best.as_ref().is_none_or(|(v, _, _)| value < *v) {
                    best = Some((value, u.clone(), flows));
                }
            }
            // odometer increment
            let mut d = 0;
            while d < dims {
                index[d] += 1;
                if index[d] <= per_dim {
                    u[d] = lo[d] + steps[d] * index[d] as f64;
                    break;
                }
                index[d] = 0;
                u[d] = lo[d];
                d += 1;
            }
            if d == dims {
                break;
            }
        }

        let step = steps.iter().copied().fold(0.0, f64::max);
        if dims == 0 || step <= target_step * (1.0 + 1e-9) {
            break;
        }
        let (_, center, _) = best.as_ref().expect("the lattice contains a feasible point");
        for d in 0..dims {
            let width = 2.0 * steps[d];
            lo[d] = (center[d] - width).max(0.0);
            hi[d] = (center[d] + width).min(1.0);
        }
    }

    let (objective, _, flows) = best.expect("the lattice contains a feasible point");
    let profile = FlowProfile::from_raw(flows);
    Ok(SolveReport {
        objective,
        wardrop_gap: wardrop_gap(game, &profile)?,
        total_latency: game.total_latency(&profile),
        iterations: evaluated,
        converged: true,
        profile,
    })
}

/// Maps free coordinates (fractions of demand) to flows; `None` when the
/// fractions of some type exceed one.
fn to_flows<T: Scalar>(game: &CongestionGame<T>, owners: &[usize], u: &[f64]) -> Option<Vec<Vec<T>>> {
    let mut flows = Vec::with_capacity(game.types().len());
    let mut at = 0;
    for (i, ty) in game.types().iter().enumerate() {
        let n = ty.strategies.len();
        let mut used = 0.0;
        let mut f = Vec::with_capacity(n);
        while at < owners.len() && owners[at] == i {
            used += u[at];
            f.push(ty.demand * T::lit(u[at]));
            at += 1;
        }
        if used > 1.0 + 1e-12 {
            return None;
        }
        f.push(ty.demand * T::lit((1.0 - used).max(0.0)));
        flows.push(f);
    }
    Some(flows)
}
