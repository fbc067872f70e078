//! Polynomial latency functions `ℓ(x) = Σ_d α_d x^d + β` with nonnegative
//! coefficients.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::scalar::Scalar;
use crate::{Error, Result};

/// A latency function `Σ_{d≥1} α_d x^d + β` with `α_d, β ≥ 0`, not
/// identically zero.
///
/// Zero coefficients are never stored, so `min_degree`/`max_degree` are the
/// smallest and largest degrees with a strictly positive coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct LatencyFunction<T> {
    coeffs: BTreeMap<u32, T>,
    beta: T,
}

impl<T: Scalar> LatencyFunction<T> {
    pub fn new<I>(coeffs: I, beta: T) -> Result<Self>
    where
        I: IntoIterator<Item = (u32, T)>,
    {
        check_coeff(beta, "constant term")?;
        let mut map = BTreeMap::new();
        for (degree, alpha) in coeffs {
            if degree == 0 {
                return Err(Error::InvalidLatency("degree 0 must be given as the constant term".into()));
            }
            check_coeff(alpha, "coefficient")?;
            if alpha > T::zero() {
                let slot = map.entry(degree).or_insert_with(T::zero);
                *slot = *slot + alpha;
            }
        }
        if map.is_empty() && beta <= T::zero() {
            return Err(Error::InvalidLatency("latency is identically zero".into()));
        }
        Ok(Self { coeffs: map, beta })
    }

    pub fn constant(beta: T) -> Result<Self> {
        Self::new(std::iter::empty(), beta)
    }

    pub fn monomial(alpha: T, degree: u32) -> Result<Self> {
        Self::new([(degree, alpha)], T::zero())
    }

    /// `x ↦ x`.
    pub fn identity() -> Self {
        Self::monomial(T::one(), 1).expect("identity is a valid latency")
    }

    pub fn affine(slope: T, beta: T) -> Result<Self> {
        Self::new([(1, slope)], beta)
    }

    pub fn coefficients(&self) -> impl Iterator<Item = (u32, T)> + '_ {
        self.coeffs.iter().map(|(&d, &a)| (d, a))
    }

    pub fn coefficient(&self, degree: u32) -> T {
        self.coeffs.get(&degree).copied().unwrap_or_else(T::zero)
    }

    pub fn beta(&self) -> T {
        self.beta
    }

    pub fn min_degree(&self) -> Option<u32> {
        self.coeffs.keys().next().copied()
    }

    pub fn max_degree(&self) -> Option<u32> {
        self.coeffs.keys().next_back().copied()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_homogeneous(&self) -> bool {
        self.beta == T::zero()
    }

    /// `ℓ(x)`; at `x = 0` this is the free-flow cost `β`.
    pub fn eval(&self, x: T) -> T {
        self.coeffs.iter().fold(self.beta, |acc, (&d, &a)| acc + a * x.powi(d as i32))
    }

    /// `ℓ'(x)`.
    pub fn derivative(&self, x: T) -> T {
        self.coeffs.iter().fold(T::zero(), |acc, (&d, &a)| acc + a * T::from_count(d as usize) * x.powi(d as i32 - 1))
    }

    /// `∫_0^x ℓ(t) dt`, the per-resource term of the equilibrium potential.
    pub fn integral(&self, x: T) -> T {
        self.coeffs
            .iter()
            .fold(self.beta * x, |acc, (&d, &a)| acc + a * x.powi(d as i32 + 1) / T::from_count(d as usize + 1))
    }

    /// `x·ℓ(x)`, the resource's contribution to total latency.
    pub fn total(&self, x: T) -> T {
        x * self.eval(x)
    }

    /// Marginal social cost `ℓ(x) + x·ℓ'(x)`.
    pub fn marginal(&self, x: T) -> T {
        self.coeffs.iter().fold(self.beta, |acc, (&d, &a)| acc + a * T::from_count(d as usize + 1) * x.powi(d as i32))
    }

    /// Derivative of [`marginal`](Self::marginal).
    pub fn marginal_derivative(&self, x: T) -> T {
        self.coeffs
            .iter()
            .fold(T::zero(), |acc, (&d, &a)| acc + a * T::from_count((d * (d + 1)) as usize) * x.powi(d as i32 - 1))
    }

    /// Drops the constant term: `x ↦ ℓ(x) − ℓ(0)`.
    pub fn homogenize(&self) -> Result<Self> {
        if self.coeffs.is_empty() {
            return Err(Error::InvalidLatency("a constant latency homogenizes to the zero function".into()));
        }
        Ok(Self { coeffs: self.coeffs.clone(), beta: T::zero() })
    }

    /// `x ↦ scale·(ℓ(x) − β) + beta`; used to build `α·f + β` from a
    /// homogeneous `f`.
    pub fn scaled_with_constant(&self, scale: T, beta: T) -> Result<Self> {
        check_coeff(scale, "scale")?;
        Self::new(self.coefficients().map(|(d, a)| (d, a * scale)), beta)
    }

    pub(crate) fn require_homogeneous(&self, what: &str) -> Result<()> {
        if self.is_homogeneous() {
            Ok(())
        } else {
            Err(Error::Precondition(format!("{what} must be homogeneous (zero constant term), got {self}")))
        }
    }

    pub fn cast<U: Scalar>(&self) -> LatencyFunction<U> {
        LatencyFunction {
            coeffs: self.coeffs.iter().map(|(&d, &a)| (d, U::lit(a.as_f64()))).collect(),
            beta: U::lit(self.beta.as_f64()),
        }
    }
}

fn check_coeff<T: Scalar>(value: T, what: &str) -> Result<()> {
    if !value.is_finite() || value < T::zero() {
        return Err(Error::InvalidLatency(format!("{what} must be finite and nonnegative, got {value}")));
    }
    Ok(())
}

impl<T: Scalar> fmt::Display for LatencyFunction<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms: Vec<String> = self
            .coeffs
            .iter()
            .rev()
            .map(|(&d, &a)| {
                let var = if d == 1 { "x".to_string() } else { format!("x^{d}") };
                if a == T::one() {
                    var
                } else {
                    format!("{a}*{var}")
                }
            })
            .collect();
        if self.beta > T::zero() || terms.is_empty() {
            terms.push(format!("{}", self.beta));
        }
        f.write_str(&terms.join(" + "))
    }
}

/// Parses sums of terms `x`, `x^p`, `a*x^p`, `a*x` and plain constants,
/// e.g. `"2*x^4 + x + 0.5"`.
impl<T: Scalar> FromStr for LatencyFunction<T> {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut coeffs = Vec::new();
        let mut beta = 0.0_f64;
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(Error::Parse("empty latency expression".into()));
        }
        for term in compact.split('+') {
            let bad = || Error::Parse(format!("cannot parse latency term {term:?} in {s:?}"));
            if term.is_empty() {
                return Err(bad());
            }
            let (coef, var) = match term.split_once('*') {
                Some((c, v)) => (c.parse::<f64>().map_err(|_| bad())?, Some(v)),
                None if term.starts_with('x') => (1.0, Some(term)),
                None => (term.parse::<f64>().map_err(|_| bad())?, None),
            };
            match var {
                None => beta += coef,
                Some(v) => {
                    let degree = match v.strip_prefix('x').ok_or_else(bad)? {
                        "" => 1,
                        rest => rest.strip_prefix('^').and_then(|p| p.parse::<u32>().ok()).ok_or_else(bad)?,
                    };
                    if degree == 0 {
                        beta += coef;
                    } else {
                        coeffs.push((degree, T::lit(coef)));
                    }
                }
            }
        }
        Self::new(coeffs, T::lit(beta))
    }
}
