//! Upper bounds on the Price of Anarchy of `θ`-free-flow games.
//!
//! Pointwise quantities take a homogeneous latency `f` and loads `k > l`;
//! class-level quantities are specialised to polynomial latencies of maximum
//! degree `p` and minimum degree `q`.

pub mod search;

use std::io::Write;
use std::str::FromStr;

use serde::Serialize;

use crate::latency::LatencyFunction;
use crate::scalar::{Extended, Scalar};
use crate::{Error, Result};

/// Network class a bound applies to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Topology {
    General,
    PathDisjoint,
}

impl FromStr for Topology {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "general" => Ok(Topology::General),
            "path-disjoint" | "pathdisjoint" => Ok(Topology::PathDisjoint),
            other => Err(Error::Parse(format!("unknown topology {other:?}, expected general or path-disjoint"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ClosedForm,
    Numeric,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::ClosedForm => "closed-form",
            Method::Numeric => "numeric",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundQuery<T> {
    pub p: u32,
    pub q: u32,
    pub theta: Extended<T>,
    pub topology: Topology,
}

impl<T: Scalar> BoundQuery<T> {
    pub fn validate(&self) -> Result<()> {
        check_degrees(self.p, self.q)?;
        if let Extended::Finite(t) = self.theta {
            check_theta(t)?;
        }
        Ok(())
    }
}

/// Which `θ`-dependent term entered the maximum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ThetaTerm {
    GammaTheta,
    EtaTheta,
    GammaInfinity,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundResult<T> {
    pub value: T,
    pub gamma: T,
    pub theta_term: T,
    pub theta_term_kind: ThetaTerm,
    pub method: Method,
}

fn check_degrees(p: u32, q: u32) -> Result<()> {
    if p == 0 || q == 0 || q > p {
        return Err(Error::Precondition(format!("degrees must satisfy 1 <= q <= p, got p={p}, q={q}")));
    }
    Ok(())
}

fn check_theta<T: Scalar>(theta: T) -> Result<()> {
    if !theta.is_finite() || theta < T::zero() {
        return Err(Error::Precondition(format!("theta must be finite and nonnegative, got {theta}")));
    }
    Ok(())
}

fn check_loads<T: Scalar>(k: T, l: T) -> Result<()> {
    if !(k > l && l > T::zero()) || !k.is_finite() {
        return Err(Error::Precondition(format!("loads must satisfy k > l > 0, got k={k}, l={l}")));
    }
    Ok(())
}

/// `((k−l)f(k) + k f(k) θ) / ((k−l)f(k) + [(k−l)f(k) + l f(l)] θ)`.
pub fn gamma_theta_point<T: Scalar>(k: T, l: T, f: &LatencyFunction<T>, theta: T) -> Result<T> {
    check_loads(k, l)?;
    check_theta(theta)?;
    f.require_homogeneous("f")?;
    let (fk, fl) = (f.eval(k), f.eval(l));
    let num = (k - l) * fk + k * fk * theta;
    let den = (k - l) * fk + ((k - l) * fk + l * fl) * theta;
    Ok(num / den)
}

/// `(k f(k) + k f(k) θ) / (k f(k) + [(k−l)f(k) + l f(l)] θ)`.
pub fn eta_theta_point<T: Scalar>(k: T, l: T, f: &LatencyFunction<T>, theta: T) -> Result<T> {
    check_loads(k, l)?;
    check_theta(theta)?;
    f.require_homogeneous("f")?;
    let (fk, fl) = (f.eval(k), f.eval(l));
    let num = k * fk * (T::one() + theta);
    let den = k * fk + ((k - l) * fk + l * fl) * theta;
    Ok(num / den)
}

/// Ratio achieved by mixing an over-loaded family (`k1 > l1`) with an
/// under-loaded one (`k2 ≤ l2`).
pub fn gamma_point<T: Scalar>(
    k1: T,
    l1: T,
    f1: &LatencyFunction<T>,
    k2: T,
    l2: T,
    f2: &LatencyFunction<T>,
) -> Result<T> {
    check_loads(k1, l1)?;
    if !(k2 > T::zero() && k2 <= l2) || !l2.is_finite() {
        return Err(Error::Precondition(format!("loads must satisfy 0 < k2 <= l2, got k2={k2}, l2={l2}")));
    }
    f1.require_homogeneous("f1")?;
    f2.require_homogeneous("f2")?;
    let (a1, b1) = (f1.eval(k1), f1.eval(l1));
    let (a2, b2) = (f2.eval(k2), f2.eval(l2));
    let num = (l2 - k2) * a2 * k1 * a1 + (k1 - l1) * a1 * k2 * a2;
    let den = (l2 - k2) * a2 * l1 * b1 + (k1 - l1) * a1 * l2 * b2;
    if !(den > T::zero()) {
        return Err(Error::Precondition("degenerate denominator".into()));
    }
    Ok(num / den)
}

/// Maximizer `x̂` of the two envelopes; `None` when `q = p`.
fn gamma_poly_xhat<T: Scalar>(p: u32, q: u32) -> Option<T> {
    if p == q {
        return None;
    }
    let (pf, qf) = (T::from_count(p as usize), T::from_count(q as usize));
    let one = T::one();
    let ln_r = ((pf + one) * (pf + one).ln() + qf * qf.ln() - (qf + one) * (qf + one).ln() - pf * pf.ln()) / (pf - qf);
    let r = ln_r.exp();
    Some(r / (r - one))
}

/// `d^d x^{d+1} / ((d+1)^{d+1} (x−1)^d)`.
fn envelope<T: Scalar>(d: u32, x: T) -> T {
    let df = T::from_count(d as usize);
    let one = T::one();
    let ln = df * df.ln() + (df + one) * x.ln() - (df + one) * (df + one).ln() - df * (x - one).ln();
    ln.exp()
}

/// Class-level `γ` for homogeneous polynomials with degrees in `[q, p]`.
pub fn gamma_poly<T: Scalar>(p: u32, q: u32) -> Result<T> {
    check_degrees(p, q)?;
    Ok(match gamma_poly_xhat::<T>(p, q) {
        None => T::one(),
        Some(x) => envelope(p, x),
    })
}

/// Crossing point `x̂ = r/(r−1)` of the two envelopes, defined for `q < p`.
pub fn gamma_poly_maximizer<T: Scalar>(p: u32, q: u32) -> Result<T> {
    check_degrees(p, q)?;
    gamma_poly_xhat(p, q).ok_or_else(|| Error::Precondition("the maximizer needs q < p".into()))
}

/// Both appendix envelopes evaluated at their crossing `x̂`, as
/// `(degree p, degree q)`. They coincide analytically.
pub fn gamma_poly_envelopes<T: Scalar>(p: u32, q: u32) -> Result<(T, T)> {
    check_degrees(p, q)?;
    Ok(match gamma_poly_xhat::<T>(p, q) {
        None => (T::one(), T::one()),
        Some(x) => (envelope(p, x), envelope(q, x)),
    })
}

/// Objective of the general `θ`-bound at `t = 1 + u`, rescaled by
/// `t^{p+1}` to avoid overflow.
fn gamma_theta_objective<T: Scalar>(p: u32, theta: T, u: T) -> T {
    let t = T::one() + u;
    let num = theta + u / t;
    let den = (T::one() + theta) * u / t + theta / t.powi(p as i32 + 1);
    num / den
}

fn eta_theta_objective<T: Scalar>(p: u32, theta: T, u: T) -> T {
    let t = T::one() + u;
    (T::one() + theta) / (T::one() + theta * u / t + theta / t.powi(p as i32 + 1))
}

/// General-network `θ` term for polynomials of maximum degree `p`,
/// by numeric supremum over `t > 1`.
pub fn gamma_theta_poly<T: Scalar>(p: u32, theta: T) -> Result<T> {
    check_degrees(p, 1)?;
    check_theta(theta)?;
    if theta == T::zero() {
        return Ok(T::one());
    }
    Ok(search::maximize(|u| gamma_theta_objective(p, theta, u)).value.max(T::one()))
}

/// Path-disjoint `θ` term, closed form with maximizer `t* = (p+1)^{1/p}`.
pub fn eta_theta_poly<T: Scalar>(p: u32, theta: T) -> Result<T> {
    check_degrees(p, 1)?;
    check_theta(theta)?;
    let pf = T::from_count(p as usize);
    let one = T::one();
    let c = (one + theta) * (pf + one).powf((pf + one) / pf);
    Ok(c / (c - theta * pf))
}

/// Numeric supremum of the path-disjoint objective, for cross-checking.
pub fn eta_theta_poly_numeric<T: Scalar>(p: u32, theta: T) -> Result<T> {
    check_degrees(p, 1)?;
    check_theta(theta)?;
    if theta == T::zero() {
        return Ok(T::one());
    }
    Ok(search::maximize(|u| eta_theta_objective(p, theta, u)).value.max(T::one()))
}

/// Classical bound without free-flow restriction:
/// `(p+1)(p+1)^{1/p} / ((p+1)(p+1)^{1/p} − p)`.
pub fn gamma_infinity_poly<T: Scalar>(p: u32) -> Result<T> {
    check_degrees(p, 1)?;
    let pf = T::from_count(p as usize);
    let c = (pf + T::one()) * (pf + T::one()).powf(T::one() / pf);
    Ok(c / (c - pf))
}

pub fn poa_bound<T: Scalar>(query: &BoundQuery<T>) -> Result<BoundResult<T>> {
    query.validate()?;
    let gamma = gamma_poly::<T>(query.p, query.q)?;
    let (theta_term, kind, method) = match (query.theta, query.topology) {
        (Extended::Infinite, _) => (gamma_infinity_poly(query.p)?, ThetaTerm::GammaInfinity, Method::ClosedForm),
        (Extended::Finite(t), Topology::General) => {
            let method = if t == T::zero() { Method::ClosedForm } else { Method::Numeric };
            (gamma_theta_poly(query.p, t)?, ThetaTerm::GammaTheta, method)
        }
        (Extended::Finite(t), Topology::PathDisjoint) => {
            (eta_theta_poly(query.p, t)?, ThetaTerm::EtaTheta, Method::ClosedForm)
        }
    };
    let value = if query.theta.is_infinite() { theta_term } else { gamma.max(theta_term) };
    Ok(BoundResult { value, gamma, theta_term, theta_term_kind: kind, method })
}

/// `max(1 + θ, γ)`, valid for both topologies.
pub fn simple_upper_bound<T: Scalar>(p: u32, q: u32, theta: T) -> Result<T> {
    check_theta(theta)?;
    Ok((T::one() + theta).max(gamma_poly(p, q)?))
}

/// `poa_bound` along a sorted `θ` grid.
pub fn bound_curve<T: Scalar>(p: u32, q: u32, thetas: &[T], topology: Topology) -> Result<Vec<(T, T)>> {
    if thetas.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::Precondition("theta grid must be sorted".into()));
    }
    thetas
        .iter()
        .map(|&t| {
            let query = BoundQuery { p, q, theta: Extended::Finite(t), topology };
            Ok((t, poa_bound(&query)?.value))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveRow<T> {
    pub theta: T,
    pub general: T,
    pub path_disjoint: T,
    pub gamma_inf: T,
}

/// Evenly spaced curve on `[0, theta_max]` for both topologies.
pub fn curves<T: Scalar>(p: u32, q: u32, theta_max: T, steps: usize) -> Result<Vec<CurveRow<T>>> {
    check_theta(theta_max)?;
    if steps < 2 {
        return Err(Error::Precondition("at least two curve steps required".into()));
    }
    let thetas: Vec<T> = (0..steps).map(|i| theta_max * T::from_count(i) / T::from_count(steps - 1)).collect();
    let general = bound_curve(p, q, &thetas, Topology::General)?;
    let disjoint = bound_curve(p, q, &thetas, Topology::PathDisjoint)?;
    let gamma_inf = gamma_infinity_poly(p)?;
    Ok(general
        .into_iter()
        .zip(disjoint)
        .map(|((theta, g), (_, d))| CurveRow { theta, general: g, path_disjoint: d, gamma_inf })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table1Row<T> {
    pub p: u32,
    pub q: u32,
    pub theta: Extended<T>,
    pub general: T,
    pub path_disjoint: T,
    pub method: Method,
}

/// The `θ` columns of the reference table.
pub fn table1_thetas<T: Scalar>() -> [Extended<T>; 4] {
    [Extended::Finite(T::zero()), Extended::Finite(T::lit(0.5)), Extended::Finite(T::one()), Extended::Infinite]
}

/// Every `(p, q, θ)` cell with `1 ≤ q ≤ p ≤ 4`.
pub fn table1<T: Scalar>() -> Result<Vec<Table1Row<T>>> {
    let mut rows = Vec::new();
    for p in 1..=4 {
        for q in 1..=p {
            for theta in table1_thetas::<T>() {
                let general = poa_bound(&BoundQuery { p, q, theta, topology: Topology::General })?;
                let disjoint = poa_bound(&BoundQuery { p, q, theta, topology: Topology::PathDisjoint })?;
                rows.push(Table1Row {
                    p,
                    q,
                    theta,
                    general: general.value,
                    path_disjoint: disjoint.value,
                    method: general.method,
                });
            }
        }
    }
    Ok(rows)
}

/// CSV with header `p,q,theta,general,path_disjoint,method`, values
/// rounded to four decimals.
pub fn write_table1_csv<T: Scalar, W: Write>(rows: &[Table1Row<T>], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["p", "q", "theta", "general", "path_disjoint", "method"])?;
    for r in rows {
        w.write_record([
            r.p.to_string(),
            r.q.to_string(),
            r.theta.to_string(),
            format!("{:.4}", r.general.as_f64()),
            format!("{:.4}", r.path_disjoint.as_f64()),
            r.method.as_str().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// CSV with header `theta,general,path_disjoint` (plus `gamma_inf` when
/// requested).
pub fn write_curve_csv<T: Scalar, W: Write>(rows: &[CurveRow<T>], with_gamma_inf: bool, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["theta", "general", "path_disjoint"];
    if with_gamma_inf {
        header.push("gamma_inf");
    }
    w.write_record(&header)?;
    for r in rows {
        let mut rec = vec![r.theta.to_string(), r.general.to_string(), r.path_disjoint.to_string()];
        if with_gamma_inf {
            rec.push(r.gamma_inf.to_string());
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
