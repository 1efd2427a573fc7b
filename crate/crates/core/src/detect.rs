//! Eigenvalue detectors and their closed-form detection SNRs.
//!
//! All statistics live in noise-normalized units: a noise-only sample
//! covariance has eigenvalues spread over the Marchenko-Pastur bulk around 1.
//! SMED, MED and MME are self-normalized ratios; FMD divides by the assumed
//! noise variance and therefore needs it to be known.

use std::fmt;
use std::str::FromStr;

use crate::cov::{eig_hermitian, sample_cov, SampleMatrix};
use crate::rmt::{q_inv_f64, spike_stats, tw2_edge_model, SpikedModelParams};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DetectorKind {
    Smed,
    Med,
    Fmd,
    Mme,
}

impl DetectorKind {
    pub const ALL: [DetectorKind; 4] = [Self::Smed, Self::Med, Self::Fmd, Self::Mme];

    pub fn name(self) -> &'static str {
        match self {
            Self::Smed => "smed",
            Self::Med => "med",
            Self::Fmd => "fmd",
            Self::Mme => "mme",
        }
    }

    pub fn has_analytic_threshold(self) -> bool {
        !matches!(self, Self::Mme)
    }
}

impl fmt::Display for DetectorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DetectorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "smed" => Ok(Self::Smed),
            "med" => Ok(Self::Med),
            "fmd" => Ok(Self::Fmd),
            "mme" => Ok(Self::Mme),
            other => Err(Error::Domain(format!("unknown detector `{other}`"))),
        }
    }
}

/// Where a decision threshold came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThresholdMode {
    Analytic,
    Empirical,
}

impl ThresholdMode {
    pub fn name(self) -> &'static str {
        match self {
            Self::Analytic => "analytic",
            Self::Empirical => "empirical",
        }
    }
}

impl FromStr for ThresholdMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "analytic" => Ok(Self::Analytic),
            "empirical" => Ok(Self::Empirical),
            other => Err(Error::Domain(format!("unknown threshold mode `{other}`"))),
        }
    }
}

/// Source of the noise level used to normalize SMED and MED.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseRef {
    /// `Tr(R) / N` of the observation itself.
    Blind,
    /// The configured `sigma2`.
    Oracle,
}

impl NoiseRef {
    pub fn name(self) -> &'static str {
        match self {
            Self::Blind => "blind",
            Self::Oracle => "oracle",
        }
    }
}

impl FromStr for NoiseRef {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "blind" => Ok(Self::Blind),
            "oracle" => Ok(Self::Oracle),
            other => Err(Error::Domain(format!("unknown noise reference `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorConfig {
    pub n: usize,
    pub p: usize,
    pub sigma2: f64,
    pub pfa: f64,
    pub delta_ell: f64,
    pub threshold_mode: ThresholdMode,
    pub beta: f64,
    pub noise_ref: NoiseRef,
    /// Threshold used in empirical mode, filled in by calibration.
    pub empirical_threshold: Option<f64>,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            n: 40,
            p: 100,
            sigma2: 1.0,
            pfa: 0.1,
            delta_ell: 0.1,
            threshold_mode: ThresholdMode::Analytic,
            beta: 1.0,
            noise_ref: NoiseRef::Blind,
            empirical_threshold: None,
        }
    }
}

impl DetectorConfig {
    pub fn c(&self) -> f64 {
        self.n as f64 / self.p as f64
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 || self.p < 2 {
            return Err(Error::Domain(format!(
                "need N, P >= 2, got {} and {}",
                self.n, self.p
            )));
        }
        if self.n >= self.p {
            return Err(Error::Domain(format!(
                "c = N/P must be < 1, got N = {}, P = {}",
                self.n, self.p
            )));
        }
        if !(self.pfa > 0.0 && self.pfa < 1.0) {
            return Err(Error::Domain(format!(
                "pfa must lie in (0, 1), got {}",
                self.pfa
            )));
        }
        if !(self.delta_ell > 0.0 && self.delta_ell.is_finite()) {
            return Err(Error::Domain(format!(
                "delta_ell must be > 0, got {}",
                self.delta_ell
            )));
        }
        if !(self.sigma2 > 0.0 && self.sigma2.is_finite()) {
            return Err(Error::Domain(format!(
                "sigma2 must be > 0, got {}",
                self.sigma2
            )));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::Domain(format!(
                "beta must be > 0, got {}",
                self.beta
            )));
        }
        Ok(())
    }

    pub fn with_empirical_threshold(mut self, threshold: f64) -> Self {
        self.threshold_mode = ThresholdMode::Empirical;
        self.empirical_threshold = Some(threshold);
        self
    }

    fn check_shape(&self, x: &SampleMatrix) -> Result<()> {
        if x.n() != self.n || x.p() != self.p {
            return Err(Error::Shape(format!(
                "observation is {}x{}, config expects {}x{}",
                x.n(),
                x.p(),
                self.n,
                self.p
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decision {
    pub statistic: f64,
    pub threshold: f64,
    pub detected: bool,
    pub model: ThresholdMode,
}

impl Decision {
    pub fn new(statistic: f64, threshold: f64, model: ThresholdMode) -> Self {
        Self {
            statistic,
            threshold,
            detected: statistic > threshold,
            model,
        }
    }
}

/// Spike strength of the auxiliary signal alone under H0, `sqrt(c) + delta_ell`.
pub fn aux_gamma(cfg: &DetectorConfig) -> f64 {
    cfg.c().sqrt() + cfg.delta_ell
}

/// SMED threshold `(Q^-1(pfa) nu0 + mean0) / N` on `lambda_max / Tr(R)`,
/// where `mean0` and `nu0` are the detached-eigenvalue mean and standard
/// deviation at the auxiliary spike strength. Independent of the noise level.
pub fn smed_threshold(cfg: &DetectorConfig) -> Result<f64> {
    cfg.validate()?;
    let model = SpikedModelParams::from_gamma(aux_gamma(cfg), cfg.beta, cfg.p)?;
    let h0 = spike_stats(&model, cfg.c())?;
    Ok((q_inv_f64(cfg.pfa)? * h0.std_dev() + h0.mean) / cfg.n as f64)
}

/// MED threshold on `lambda_max / sigma^2` from the Tracy-Widom edge model.
pub fn med_threshold(cfg: &DetectorConfig) -> Result<f64> {
    cfg.validate()?;
    tw2_edge_model(cfg.c(), cfg.p)?.quantile(1.0 - cfg.pfa)
}

/// FMD threshold `1 + Q^-1(pfa) / sqrt(N P)` on `Tr(R) / (N sigma^2)`.
pub fn fmd_threshold(cfg: &DetectorConfig) -> Result<f64> {
    cfg.validate()?;
    Ok(1.0 + q_inv_f64(cfg.pfa)? / ((cfg.n * cfg.p) as f64).sqrt())
}

pub fn analytic_threshold(kind: DetectorKind, cfg: &DetectorConfig) -> Result<f64> {
    match kind {
        DetectorKind::Smed => smed_threshold(cfg),
        DetectorKind::Med => med_threshold(cfg),
        DetectorKind::Fmd => fmd_threshold(cfg),
        DetectorKind::Mme => Err(Error::Domain(
            "MME has no analytic threshold; calibrate it empirically".into(),
        )),
    }
}

fn threshold_for(kind: DetectorKind, cfg: &DetectorConfig) -> Result<(f64, ThresholdMode)> {
    match cfg.threshold_mode {
        ThresholdMode::Analytic => Ok((analytic_threshold(kind, cfg)?, ThresholdMode::Analytic)),
        ThresholdMode::Empirical => cfg
            .empirical_threshold
            .map(|t| (t, ThresholdMode::Empirical))
            .ok_or_else(|| {
                Error::Domain(format!(
                    "empirical threshold for {kind} has not been calibrated"
                ))
            }),
    }
}

/// Auxiliary matrix scaled to power `sigma^2 (sqrt(c) + delta_ell) / N`.
///
/// `aux` is a reference waveform of any nonzero power; only its shape is
/// used. An all-zero reference yields an all-zero auxiliary.
pub fn scaled_aux(aux: &SampleMatrix, sigma2: f64, cfg: &DetectorConfig) -> SampleMatrix {
    let ms = aux.mean_square();
    if ms == 0.0 {
        return aux.clone();
    }
    let pv = sigma2 * aux_gamma(cfg) / cfg.n as f64;
    aux.scale((pv / ms).sqrt())
}

/// All four statistics of one observation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Statistics {
    pub smed: f64,
    pub med: f64,
    pub fmd: f64,
    pub mme: f64,
    /// Raw `lambda_max` of the observation's sample covariance.
    pub lambda_max: f64,
    /// Raw `Tr(R)` of the observation's sample covariance.
    pub trace: f64,
}

impl Statistics {
    pub fn get(&self, kind: DetectorKind) -> f64 {
        match kind {
            DetectorKind::Smed => self.smed,
            DetectorKind::Med => self.med,
            DetectorKind::Fmd => self.fmd,
            DetectorKind::Mme => self.mme,
        }
    }
}

/// Computes every detector statistic with one eigendecomposition of the
/// observation and one of the observation plus auxiliary.
pub fn statistics(
    x: &SampleMatrix,
    aux: &SampleMatrix,
    cfg: &DetectorConfig,
) -> Result<Statistics> {
    cfg.validate()?;
    cfg.check_shape(x)?;
    let r = sample_cov(x);
    let eig = eig_hermitian(&r);
    let trace = r.trace();
    let lambda_max = eig.max();
    let smed = smed_statistic_with_trace(x, aux, trace, cfg)?;
    Ok(Statistics {
        smed,
        med: ratio(lambda_max, noise_level(trace, cfg)),
        fmd: trace / (cfg.n as f64 * cfg.sigma2),
        mme: ratio(lambda_max, eig.min()),
        lambda_max,
        trace,
    })
}

fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else if num > 0.0 {
        f64::INFINITY
    } else {
        0.0
    }
}

fn noise_level(trace: f64, cfg: &DetectorConfig) -> f64 {
    match cfg.noise_ref {
        NoiseRef::Blind => trace / cfg.n as f64,
        NoiseRef::Oracle => cfg.sigma2,
    }
}

fn smed_statistic_with_trace(
    x: &SampleMatrix,
    aux: &SampleMatrix,
    trace: f64,
    cfg: &DetectorConfig,
) -> Result<f64> {
    if aux.n() != x.n() || aux.p() != x.p() {
        return Err(Error::Shape(format!(
            "auxiliary is {}x{}, observation is {}x{}",
            aux.n(),
            aux.p(),
            x.n(),
            x.p()
        )));
    }
    let sigma2 = noise_level(trace, cfg);
    let combined = x.add(&scaled_aux(aux, sigma2, cfg))?;
    let lambda = eig_hermitian(&sample_cov(&combined)).max();
    Ok(ratio(lambda, cfg.n as f64 * sigma2))
}

/// `lambda_max(R of X + aux) / (N sigma^2)`, with `N sigma^2` taken as
/// `Tr(R of X)` in blind mode.
pub fn smed_statistic(x: &SampleMatrix, aux: &SampleMatrix, cfg: &DetectorConfig) -> Result<f64> {
    cfg.validate()?;
    cfg.check_shape(x)?;
    let trace = sample_cov(x).trace();
    smed_statistic_with_trace(x, aux, trace, cfg)
}

pub fn smed_detect(x: &SampleMatrix, aux: &SampleMatrix, cfg: &DetectorConfig) -> Result<Decision> {
    let statistic = smed_statistic(x, aux, cfg)?;
    let (threshold, model) = threshold_for(DetectorKind::Smed, cfg)?;
    Ok(Decision::new(statistic, threshold, model))
}

/// `lambda_max / sigma^2`, with `sigma^2 = Tr(R) / N` in blind mode.
pub fn med_detect(x: &SampleMatrix, cfg: &DetectorConfig) -> Result<Decision> {
    cfg.validate()?;
    cfg.check_shape(x)?;
    let r = sample_cov(x);
    let statistic = ratio(eig_hermitian(&r).max(), noise_level(r.trace(), cfg));
    let (threshold, model) = threshold_for(DetectorKind::Med, cfg)?;
    Ok(Decision::new(statistic, threshold, model))
}

/// `Tr(R) / (N sigma^2)` against the configured noise variance.
pub fn fmd_detect(x: &SampleMatrix, cfg: &DetectorConfig) -> Result<Decision> {
    cfg.validate()?;
    cfg.check_shape(x)?;
    let statistic = sample_cov(x).trace() / (cfg.n as f64 * cfg.sigma2);
    let (threshold, model) = threshold_for(DetectorKind::Fmd, cfg)?;
    Ok(Decision::new(statistic, threshold, model))
}

/// `lambda_max / lambda_min`.
pub fn mme_detect(x: &SampleMatrix, cfg: &DetectorConfig) -> Result<Decision> {
    cfg.validate()?;
    cfg.check_shape(x)?;
    let eig = eig_hermitian(&sample_cov(x));
    let statistic = ratio(eig.max(), eig.min());
    let (threshold, model) = threshold_for(DetectorKind::Mme, cfg)?;
    Ok(Decision::new(statistic, threshold, model))
}

/// Inputs of the detection-SNR formulas. Spike strengths are in units of the
/// noise variance (`gamma = N * power / sigma^2`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheorySnrInputs {
    pub gamma_s: f64,
    pub gamma_v: f64,
    pub c: f64,
    pub p: usize,
    pub n: usize,
    /// Number of equal-strength signal eigenvalues. For FMD, `gamma_s` is the
    /// strength of one of them.
    pub m_factor: usize,
}

impl TheorySnrInputs {
    fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c < 1.0) {
            return Err(Error::Domain(format!(
                "c must lie in (0, 1), got {}",
                self.c
            )));
        }
        if !(self.gamma_s >= 0.0 && self.gamma_v >= 0.0) {
            return Err(Error::Domain("spike strengths must be >= 0".into()));
        }
        if self.p == 0 || self.n == 0 || self.m_factor == 0 {
            return Err(Error::Domain(
                "P, N and the eigenvalue count must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// Detection SNR of SMED: `P (gamma_s - c (1/gamma_v - 1/gamma))^2 /
/// ((1+gamma)^2 (1 - c/gamma^2))` with `gamma = gamma_s + gamma_v`.
pub fn theory_snr_smed(t: &TheorySnrInputs) -> Result<f64> {
    t.validate()?;
    if t.gamma_v <= t.c.sqrt() {
        return Err(Error::Regime(format!(
            "auxiliary strength {} is not above sqrt(c) = {}",
            t.gamma_v,
            t.c.sqrt()
        )));
    }
    let g = t.gamma_s + t.gamma_v;
    let d = t.gamma_s - t.c * (1.0 / t.gamma_v - 1.0 / g);
    Ok(t.p as f64 * d * d / ((1.0 + g).powi(2) * (1.0 - t.c / (g * g))))
}

/// The two readings of the MED detection SNR.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MedSnr {
    /// Literal formula: unsquared numerator
    /// `P (1+g)(1+c/g) - (1+sqrt(c))^2 + 1.771 P^{1/3} (1+sqrt(c))^{4/3} / sqrt(c)`.
    pub as_printed: f64,
    /// Deflection ratio `P (mean1 - mean0)^2 / ((1+g)^2 (1 - c/g^2))` with
    /// `mean0` from the Tracy-Widom edge model.
    pub consistent: f64,
}

pub fn theory_snr_med(t: &TheorySnrInputs) -> Result<MedSnr> {
    t.validate()?;
    let g = t.gamma_s;
    let r = t.c.sqrt();
    if g <= r {
        return Err(Error::Regime(format!(
            "signal strength {g} is not above sqrt(c) = {r}"
        )));
    }
    let p = t.p as f64;
    let denom = (1.0 + g).powi(2) * (1.0 - t.c / (g * g));
    let mean1 = (1.0 + g) * (1.0 + t.c / g);
    let as_printed = (p * mean1 - (1.0 + r).powi(2)
        + 1.771 * p.powf(1.0 / 3.0) * (1.0 + r).powf(4.0 / 3.0) / r)
        / denom;
    let mean0 = tw2_edge_model(t.c, t.p)?.mean;
    let consistent = p * (mean1 - mean0).powi(2) / denom;
    Ok(MedSnr {
        as_printed,
        consistent,
    })
}

/// Detection SNR of FMD, `P M^2 / (N/gamma_1^2 + 4 M/gamma_1)`; with one
/// eigenvalue this is `P / (N/gamma^2 + 4/gamma)`.
pub fn theory_snr_fmd(t: &TheorySnrInputs) -> Result<f64> {
    t.validate()?;
    let g1 = t.gamma_s;
    if g1 == 0.0 {
        return Ok(0.0);
    }
    let m = t.m_factor as f64;
    Ok(t.p as f64 * m * m / (t.n as f64 / (g1 * g1) + 4.0 * m / g1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cov::CMatrix;
    use crate::Complex64;

    fn inputs(gamma_s: f64) -> TheorySnrInputs {
        TheorySnrInputs {
            gamma_s,
            gamma_v: 0.4f64.sqrt() + 0.1,
            c: 0.4,
            p: 100,
            n: 40,
            m_factor: 1,
        }
    }

    #[test]
    fn smed_threshold_operating_point() {
        let cfg = DetectorConfig::default();
        assert!((smed_threshold(&cfg).unwrap() - 0.069764).abs() < 1e-6);
        let half = DetectorConfig { pfa: 0.5, ..cfg };
        let model = SpikedModelParams::from_gamma(aux_gamma(&cfg), 1.0, 100).unwrap();
        let mean0 = spike_stats(&model, 0.4).unwrap().mean;
        assert!((smed_threshold(&half).unwrap() - mean0 / 40.0).abs() < 1e-15);
    }

    #[test]
    fn smed_threshold_decreases_with_pfa() {
        let mut last = f64::INFINITY;
        for pfa in [0.01, 0.05, 0.1, 0.2, 0.5, 0.9] {
            let z = smed_threshold(&DetectorConfig {
                pfa,
                ..Default::default()
            })
            .unwrap();
            assert!(z < last);
            last = z;
        }
    }

    #[test]
    fn fmd_threshold_operating_point() {
        let z = fmd_threshold(&DetectorConfig::default()).unwrap();
        assert!((z - 1.02026).abs() < 1e-5);
    }

    #[test]
    fn invalid_config_is_rejected() {
        let bad = DetectorConfig {
            pfa: 1.0,
            ..Default::default()
        };
        assert!(matches!(smed_threshold(&bad), Err(Error::Domain(_))));
        let wide = DetectorConfig {
            n: 100,
            p: 100,
            ..Default::default()
        };
        assert!(wide.validate().is_err());
    }

    #[test]
    fn identity_covariance_statistics() {
        // Each row holds two entries of magnitude 2 in disjoint columns: R = I.
        let cfg = DetectorConfig {
            n: 4,
            p: 8,
            ..Default::default()
        };
        let m = CMatrix::from_fn(4, 8, |i, j| {
            if j % 4 == i {
                Complex64::new(2.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let x = SampleMatrix::new(m).unwrap();
        let s = statistics(&x, &SampleMatrix::new(CMatrix::zeros(4, 8)).unwrap(), &cfg).unwrap();
        assert!((s.med - 1.0).abs() < 1e-12);
        assert!((s.mme - 1.0).abs() < 1e-12);
        assert!((s.fmd - 1.0).abs() < 1e-12);
        assert!(!med_detect(&x, &cfg).unwrap().detected);
    }

    #[test]
    fn zero_observation_is_not_detected_by_fmd() {
        let x = SampleMatrix::new(CMatrix::zeros(40, 100)).unwrap();
        let d = fmd_detect(&x, &DetectorConfig::default()).unwrap();
        assert_eq!(d.statistic, 0.0);
        assert!(!d.detected);
    }

    #[test]
    fn mme_needs_calibration() {
        assert!(analytic_threshold(DetectorKind::Mme, &DetectorConfig::default()).is_err());
    }

    #[test]
    fn smed_snr_operating_point() {
        let v = theory_snr_smed(&inputs(1.26491)).unwrap();
        assert!((v - 10.45).abs() < 0.01);
        assert_eq!(theory_snr_smed(&inputs(0.0)).unwrap(), 0.0);
        let sub = TheorySnrInputs {
            gamma_v: 0.6,
            ..inputs(1.0)
        };
        assert!(matches!(theory_snr_smed(&sub), Err(Error::Regime(_))));
    }

    #[test]
    fn med_snr_operating_point() {
        let v = theory_snr_med(&inputs(1.26491)).unwrap();
        assert!((v.consistent - 8.33).abs() < 0.01);
        assert!((v.as_printed - v.consistent).abs() > 1.0);
        assert!(matches!(
            theory_snr_med(&inputs(0.5)),
            Err(Error::Regime(_))
        ));
    }

    #[test]
    fn fmd_snr_operating_point() {
        let v = theory_snr_fmd(&inputs(1.26491)).unwrap();
        assert!((v - 3.551).abs() < 1e-3);
    }

    #[test]
    fn fmd_snr_multi_eigenvalue_limits() {
        let one = theory_snr_fmd(&inputs(1e5)).unwrap();
        let four = theory_snr_fmd(&TheorySnrInputs {
            m_factor: 4,
            ..inputs(1e5)
        })
        .unwrap();
        assert!((four / one - 4.0).abs() < 1e-3);
        let one = theory_snr_fmd(&inputs(1e-4)).unwrap();
        let four = theory_snr_fmd(&TheorySnrInputs {
            m_factor: 4,
            ..inputs(1e-4)
        })
        .unwrap();
        assert!((four / one - 16.0).abs() < 0.01);
    }

    #[test]
    fn detector_names_round_trip() {
        for k in DetectorKind::ALL {
            assert_eq!(k.name().parse::<DetectorKind>().unwrap(), k);
        }
    }
}
