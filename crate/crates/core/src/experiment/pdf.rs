use std::str::FromStr;

use super::{trial_statistics, TrialPlan};
use crate::detect::{DetectorKind, Statistics};
use crate::{Error, Result};

/// Quantity histogrammed by [`empirical_pdf`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PdfStatistic {
    /// Raw largest eigenvalue of the observation's sample covariance.
    LambdaMax,
    /// Raw `Tr(R) / N`.
    Trace,
    /// A detector's decision statistic.
    Detector(DetectorKind),
}

impl PdfStatistic {
    pub fn name(self) -> &'static str {
        match self {
            Self::LambdaMax => "lambda_max",
            Self::Trace => "trace",
            Self::Detector(k) => k.name(),
        }
    }

    pub fn select(self, s: &Statistics, n: usize) -> f64 {
        match self {
            Self::LambdaMax => s.lambda_max,
            Self::Trace => s.trace / n as f64,
            Self::Detector(k) => s.get(k),
        }
    }
}

impl FromStr for PdfStatistic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "lambda_max" => Ok(Self::LambdaMax),
            "trace" => Ok(Self::Trace),
            other => other.parse().map(Self::Detector),
        }
    }
}

/// Density-normalized histogram.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalPdf {
    pub bin_edges: Vec<f64>,
    pub densities: Vec<f64>,
    pub n_samples: usize,
    pub mean: f64,
    pub std_dev: f64,
}

impl EmpiricalPdf {
    /// Histogram of `values` with `bins` equal-width bins, or the
    /// Freedman-Diaconis bin count when `bins` is `None`.
    pub fn from_samples(values: &[f64], bins: Option<usize>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Precision("cannot histogram zero samples".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Degenerate(
                "non-finite statistic in histogram input".into(),
            ));
        }
        if bins == Some(0) {
            return Err(Error::Domain("bin count must be >= 1".into()));
        }
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n.max(2) - 1) as f64;
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let (lo, hi) = (sorted[0], sorted[n - 1]);
        if hi == lo {
            return Ok(Self {
                bin_edges: vec![lo - 0.5, lo + 0.5],
                densities: vec![1.0],
                n_samples: n,
                mean,
                std_dev: 0.0,
            });
        }
        let k = bins.unwrap_or_else(|| freedman_diaconis_bins(&sorted));
        let width = (hi - lo) / k as f64;
        let mut counts = vec![0usize; k];
        for v in &sorted {
            let i = (((v - lo) / width) as usize).min(k - 1);
            counts[i] += 1;
        }
        let bin_edges = (0..=k)
            .map(|i| if i == k { hi } else { lo + i as f64 * width })
            .collect::<Vec<_>>();
        let densities = counts
            .iter()
            .zip(bin_edges.windows(2))
            .map(|(&c, e)| c as f64 / (n as f64 * (e[1] - e[0])))
            .collect();
        Ok(Self {
            bin_edges,
            densities,
            n_samples: n,
            mean,
            std_dev: var.sqrt(),
        })
    }

    pub fn integral(&self) -> f64 {
        self.densities
            .iter()
            .zip(self.bin_edges.windows(2))
            .map(|(d, e)| d * (e[1] - e[0]))
            .sum()
    }
}

fn freedman_diaconis_bins(sorted: &[f64]) -> usize {
    let n = sorted.len();
    let q = |f: f64| sorted[((f * (n - 1) as f64).round() as usize).min(n - 1)];
    let iqr = q(0.75) - q(0.25);
    let range = sorted[n - 1] - sorted[0];
    if iqr <= 0.0 {
        return ((n as f64).sqrt().ceil() as usize).max(1);
    }
    let h = 2.0 * iqr / (n as f64).cbrt();
    ((range / h).ceil() as usize).clamp(1, 10_000)
}

/// Histogram of one statistic over the trials of `plan`.
pub fn empirical_pdf(
    plan: &TrialPlan,
    statistic: PdfStatistic,
    bins: Option<usize>,
) -> Result<EmpiricalPdf> {
    let stats = trial_statistics(plan)?;
    let values: Vec<f64> = stats
        .iter()
        .map(|s| statistic.select(s, plan.cfg.n))
        .collect();
    EmpiricalPdf::from_samples(&values, bins)
}
