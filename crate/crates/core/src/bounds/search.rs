//! One-dimensional maximization over `t > 1` without a unimodality
//! assumption: a log-spaced grid in `u = t − 1` locates the best cell, and
//! golden-section search refines inside the two neighbouring cells.

use crate::scalar::Scalar;

pub const GRID_POINTS: usize = 100_000;
pub const U_MIN: f64 = 1e-8;
pub const U_MAX: f64 = 1e4;
pub const BRACKET_TOL: f64 = 1e-12;

/// Location and value of the maximum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum<T> {
    pub u: T,
    pub value: T,
}

/// Maximizes `f(u)` over `u ∈ [U_MIN, U_MAX]`.
pub fn maximize<T: Scalar>(f: impl Fn(T) -> T) -> Maximum<T> {
    let ln_lo = U_MIN.ln();
    let ln_step = (U_MAX.ln() - ln_lo) / (GRID_POINTS - 1) as f64;
    let node = |j: usize| T::lit((ln_lo + ln_step * j as f64).exp());

    let mut best_j = 0;
    let mut best = f(node(0));
    for j in 1..GRID_POINTS {
        let v = f(node(j));
        if v > best {
            best = v;
            best_j = j;
        }
    }
    let a = node(best_j.saturating_sub(1));
    let b = node((best_j + 1).min(GRID_POINTS - 1));
    let refined = golden_section(&f, a, b);
    if refined.value >= best {
        refined
    } else {
        Maximum { u: node(best_j), value: best }
    }
}

/// Golden-section maximization on `[a, b]` down to a bracket of
/// `BRACKET_TOL` relative to the bracket position (or machine precision).
pub fn golden_section<T: Scalar>(f: impl Fn(T) -> T, mut a: T, mut b: T) -> Maximum<T> {
    let inv_phi = T::lit((5f64.sqrt() - 1.0) / 2.0);
    let width_tol = |a: T, b: T| {
        let scale = T::one().max(a.abs()).max(b.abs());
        T::lit(BRACKET_TOL).max(T::epsilon() * T::lit(4.0)) * scale
    };
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..200 {
        if b - a <= width_tol(a, b) {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if fc >= fd {
        Maximum { u: c, value: fc }
    } else {
        Maximum { u: d, value: fd }
    }
}
