use std::io::Write;

use serde::Serialize;

use crate::{Error, Result};

/// θ levels whose cumulative fractions are reported.
pub const THRESHOLDS: [f64; 4] = [0.25, 0.5, 0.88, 1.0];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Quantile {
    pub q: f64,
    pub theta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FractionBelow {
    pub threshold: f64,
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeviationSummary {
    pub trips: usize,
    pub mean_theta: f64,
    /// θ at q = 0, 0.1, ..., 1.
    pub deciles: Vec<Quantile>,
    /// Fraction of trips with θ strictly below each of [`THRESHOLDS`].
    pub fractions_below: Vec<FractionBelow>,
}

impl DeviationSummary {
    pub fn fraction_below(&self, threshold: f64) -> Option<f64> {
        self.fractions_below.iter().find(|f| f.threshold == threshold).map(|f| f.fraction)
    }

    /// Two-column `q,theta_hat` table of the deciles.
    pub fn write_deciles_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["q", "theta_hat"])?;
        for d in &self.deciles {
            w.write_record([format!("{:.1}", d.q), format!("{:.6}", d.theta)])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Deciles (linear interpolation between order statistics) and threshold
/// fractions of per-trip θ estimates.
pub fn deviation_distribution(theta_hat: &[f64]) -> Result<DeviationSummary> {
    if theta_hat.is_empty() {
        return Err(Error::Precondition("no estimates to summarize".into()));
    }
    if theta_hat.iter().any(|t| t.is_nan()) {
        return Err(Error::Precondition("θ estimates contain NaN".into()));
    }
    let mut sorted = theta_hat.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let quantile = |q: f64| {
        let pos = q * (n - 1) as f64;
        let lo = pos.floor() as usize;
        let hi = pos.ceil() as usize;
        sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
    };
    let deciles = (0..=10)
        .map(|i| {
            let q = i as f64 / 10.0;
            Quantile { q, theta: quantile(q) }
        })
        .collect();
    let fractions_below = THRESHOLDS
        .iter()
        .map(|&threshold| FractionBelow {
            threshold,
            fraction: sorted.partition_point(|&t| t < threshold) as f64 / n as f64,
        })
        .collect();
    Ok(DeviationSummary { trips: n, mean_theta: sorted.iter().sum::<f64>() / n as f64, deciles, fractions_below })
}
