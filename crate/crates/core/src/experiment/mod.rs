//! Deterministic Monte Carlo harness.
//!
//! A [`TrialPlan`] fully determines a run. Trial `t` draws every random
//! quantity from seeds derived from `(base_seed, t)` with [`trial_seed`], and
//! results are collected in trial order, so the output does not depend on
//! the number of worker threads.

mod pdf;
mod sweep;
mod theory;

pub use pdf::{empirical_pdf, EmpiricalPdf, PdfStatistic};
pub use sweep::{
    sweep_aux_amplitude, sweep_aux_offset, sweep_snr, SweepResult, SweepRow, DEFAULT_OFFSETS_HZ,
};
pub use theory::{
    fig2_table, fig4_table, Fig2Reading, Fig2Row, Fig2Table, Fig4Row, Fig4Table, FIG4_FMD,
    FIG4_MED, FIG4_MED_AS_PRINTED, FIG4_SMED,
};

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::cov::{packetize, SampleMatrix};
use crate::detect::{
    analytic_threshold, statistics, DetectorConfig, DetectorKind, Statistics, ThresholdMode,
};
use crate::rmt::db_to_linear;
use crate::synth::{
    aux_from_svd, gen_bpsk, gen_cwgn, gen_spike, gen_tone, gen_wideband, superpose, BpskSpec,
    IqBuffer, SpikeSpec, ToneSpec, WidebandSpec,
};
use crate::{Error, Result};

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;
const TAG_NOISE: u64 = 0x6E6F_6973_6500_0001;
const TAG_SIGNAL: u64 = 0x7369_676E_616C_0002;
const TAG_AUX: u64 = 0x6175_7800_0000_0003;
const TAG_CALIBRATION: u64 = 0x6361_6C69_6200_0004;
const TAG_H0: u64 = 0x6830_0000_0000_0005;

/// SplitMix64 finalizer.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of trial `t`: `splitmix64(base + (t + 1) * 0x9E3779B97F4A7C15)`.
pub fn trial_seed(base_seed: u64, t: usize) -> u64 {
    splitmix64(base_seed.wrapping_add((t as u64).wrapping_add(1).wrapping_mul(GOLDEN)))
}

fn substream(seed: u64, tag: u64) -> u64 {
    splitmix64(seed ^ tag)
}

/// Base seed of the noise-only stream used for threshold calibration.
pub fn calibration_seed(base_seed: u64) -> u64 {
    substream(base_seed, TAG_CALIBRATION)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignalKind {
    None,
    Bpsk,
    Tone,
    /// Carrier with a Gaussian envelope redrawn once per packet: an exact
    /// single Gaussian spike in the packetized covariance.
    Spike,
    Wideband,
}

impl SignalKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::None => "none",
            Self::Bpsk => "bpsk",
            Self::Tone => "tone",
            Self::Spike => "spike",
            Self::Wideband => "wideband",
        }
    }
}

impl fmt::Display for SignalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SignalKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "none" => Ok(Self::None),
            "bpsk" => Ok(Self::Bpsk),
            "tone" => Ok(Self::Tone),
            "spike" => Ok(Self::Spike),
            "wideband" => Ok(Self::Wideband),
            other => Err(Error::Domain(format!("unknown signal kind `{other}`"))),
        }
    }
}

/// Physical parameters of the test waveforms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Waveform {
    pub sample_rate: f64,
    pub carrier_freq: f64,
    pub bit_rate: f64,
    pub wideband_components: usize,
    pub wideband_filter_length: usize,
}

impl Default for Waveform {
    fn default() -> Self {
        Self {
            sample_rate: 10e6,
            carrier_freq: 1e6,
            bit_rate: 100e3,
            wideband_components: 4,
            wideband_filter_length: 40,
        }
    }
}

/// Reference waveform combined with the observation by SMED.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AuxSource {
    /// Carrier at `carrier_freq + offset_hz` with a fresh random phase per trial.
    Tone { offset_hz: f64 },
    /// Rank-one SVD reconstruction of one clean training realization of
    /// `kind`, drawn from `seed` and shared by every trial.
    Trained { kind: SignalKind, seed: u64 },
}

impl Default for AuxSource {
    fn default() -> Self {
        Self::Tone { offset_hz: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialPlan {
    pub detector: DetectorKind,
    pub signal: SignalKind,
    /// Received SNR in dB; `-inf` means no signal.
    pub snr_db: f64,
    pub n_trials: usize,
    pub base_seed: u64,
    pub cfg: DetectorConfig,
    pub waveform: Waveform,
    pub aux: AuxSource,
}

impl Default for TrialPlan {
    fn default() -> Self {
        Self {
            detector: DetectorKind::Smed,
            signal: SignalKind::Spike,
            snr_db: -15.0,
            n_trials: 10_000,
            base_seed: 1,
            cfg: DetectorConfig::default(),
            waveform: Waveform::default(),
            aux: AuxSource::default(),
        }
    }
}

pub const MIN_TRIALS: usize = 100;

impl TrialPlan {
    pub fn validate(&self) -> Result<()> {
        self.cfg.validate()?;
        if self.n_trials < MIN_TRIALS {
            return Err(Error::Domain(format!(
                "n_trials must be >= {MIN_TRIALS}, got {}",
                self.n_trials
            )));
        }
        if self.snr_db.is_nan() || self.snr_db == f64::INFINITY {
            return Err(Error::Domain(format!(
                "snr_db must be finite or -inf, got {}",
                self.snr_db
            )));
        }
        let w = &self.waveform;
        if !(w.sample_rate > 0.0 && w.sample_rate.is_finite()) {
            return Err(Error::Domain(format!(
                "sample rate must be > 0, got {}",
                w.sample_rate
            )));
        }
        if self.signal == SignalKind::Bpsk
            || matches!(
                self.aux,
                AuxSource::Trained {
                    kind: SignalKind::Bpsk,
                    ..
                }
            )
        {
            BpskSpec {
                bit_rate: w.bit_rate,
                carrier_freq: w.carrier_freq,
                sample_rate: w.sample_rate,
                power: 1.0,
            }
            .validate()?;
        }
        if w.wideband_components == 0 || w.wideband_filter_length == 0 {
            return Err(Error::Domain(
                "wideband components and filter length must be >= 1".into(),
            ));
        }
        if let AuxSource::Trained {
            kind: SignalKind::None,
            ..
        } = self.aux
        {
            return Err(Error::Domain(
                "a trained auxiliary needs a signal kind".into(),
            ));
        }
        Ok(())
    }

    /// Nominal signal power `snr * sigma2`, zero without a signal.
    pub fn signal_power(&self) -> f64 {
        if self.signal == SignalKind::None || self.snr_db == f64::NEG_INFINITY {
            0.0
        } else {
            db_to_linear(self.snr_db) * self.cfg.sigma2
        }
    }

    pub fn is_noise_only(&self) -> bool {
        self.signal_power() == 0.0
    }

    /// The same plan with the signal removed and the calibration seed.
    pub fn calibration_plan(&self) -> TrialPlan {
        TrialPlan {
            signal: SignalKind::None,
            snr_db: f64::NEG_INFINITY,
            base_seed: calibration_seed(self.base_seed),
            ..*self
        }
    }

    /// Noise-only plan on a stream independent of both calibration and the
    /// signal trials, used to report the achieved false-alarm rate.
    pub fn null_plan(&self) -> TrialPlan {
        TrialPlan {
            signal: SignalKind::None,
            snr_db: f64::NEG_INFINITY,
            base_seed: substream(self.base_seed, TAG_H0),
            ..*self
        }
    }
}

fn clean_signal(
    kind: SignalKind,
    power: f64,
    plan: &TrialPlan,
    seed: u64,
) -> Result<Option<IqBuffer>> {
    let len = plan.cfg.n * plan.cfg.p;
    let w = &plan.waveform;
    let buf = match kind {
        SignalKind::None => return Ok(None),
        SignalKind::Bpsk => gen_bpsk(
            &BpskSpec {
                bit_rate: w.bit_rate,
                carrier_freq: w.carrier_freq,
                sample_rate: w.sample_rate,
                power,
            },
            len,
            seed,
        )?,
        SignalKind::Tone => gen_tone(
            &ToneSpec {
                freq: w.carrier_freq,
                power,
                phase_seed: seed,
            },
            len,
            w.sample_rate,
        )?,
        SignalKind::Spike => gen_spike(
            &SpikeSpec {
                freq: w.carrier_freq,
                power,
                block_len: plan.cfg.n,
            },
            len,
            w.sample_rate,
            seed,
        )?,
        SignalKind::Wideband => gen_wideband(
            &WidebandSpec::equal_powers(w.wideband_components, power, w.wideband_filter_length),
            len,
            seed,
            w.sample_rate,
        )?,
    };
    Ok(Some(buf))
}

/// Received samples of trial `t`, before packetization.
pub fn trial_buffer(plan: &TrialPlan, t: usize) -> Result<IqBuffer> {
    let seed = trial_seed(plan.base_seed, t);
    let noise = gen_cwgn(
        plan.cfg.n * plan.cfg.p,
        plan.cfg.sigma2,
        substream(seed, TAG_NOISE),
        plan.waveform.sample_rate,
    )?;
    let power = plan.signal_power();
    if power == 0.0 {
        return Ok(noise);
    }
    match clean_signal(plan.signal, power, plan, substream(seed, TAG_SIGNAL))? {
        Some(s) => superpose(&s, &noise, 1.0),
        None => Ok(noise),
    }
}

/// Noisy observation of trial `t`.
pub fn trial_observation(plan: &TrialPlan, t: usize) -> Result<SampleMatrix> {
    packetize(&trial_buffer(plan, t)?, plan.cfg.n, plan.cfg.p)
}

fn trained_aux(plan: &TrialPlan) -> Result<Option<SampleMatrix>> {
    match plan.aux {
        AuxSource::Tone { .. } => Ok(None),
        AuxSource::Trained { kind, seed } => {
            let clean = clean_signal(kind, 1.0, plan, seed)?
                .ok_or_else(|| Error::Domain("a trained auxiliary needs a signal kind".into()))?;
            Ok(Some(aux_from_svd(&packetize(
                &clean, plan.cfg.n, plan.cfg.p,
            )?)?))
        }
    }
}

fn trial_aux(plan: &TrialPlan, t: usize, trained: Option<&SampleMatrix>) -> Result<SampleMatrix> {
    if let Some(a) = trained {
        return Ok(a.clone());
    }
    let AuxSource::Tone { offset_hz } = plan.aux else {
        unreachable!("trained auxiliary is built up front");
    };
    let w = &plan.waveform;
    let seed = substream(trial_seed(plan.base_seed, t), TAG_AUX);
    let tone = gen_tone(
        &ToneSpec {
            freq: w.carrier_freq + offset_hz,
            power: 1.0,
            phase_seed: seed,
        },
        plan.cfg.n * plan.cfg.p,
        w.sample_rate,
    )?;
    packetize(&tone, plan.cfg.n, plan.cfg.p)
}

/// Auxiliary reference of trial `t`.
pub fn trial_aux_matrix(plan: &TrialPlan, t: usize) -> Result<SampleMatrix> {
    plan.validate()?;
    let trained = trained_aux(plan)?;
    trial_aux(plan, t, trained.as_ref())
}

/// Every detector statistic for every trial of `plan`, in trial order.
pub fn trial_statistics(plan: &TrialPlan) -> Result<Vec<Statistics>> {
    plan.validate()?;
    let trained = trained_aux(plan)?;
    (0..plan.n_trials)
        .into_par_iter()
        .map(|t| {
            let x = trial_observation(plan, t)?;
            let aux = trial_aux(plan, t, trained.as_ref())?;
            statistics(&x, &aux, &plan.cfg)
        })
        .collect()
}

/// Fraction of detections with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rate {
    pub p: f64,
    pub stderr: f64,
    pub n: usize,
}

impl Rate {
    pub fn from_counts(hits: usize, n: usize) -> Self {
        let p = hits as f64 / n as f64;
        Self {
            p,
            stderr: (p * (1.0 - p) / n as f64).sqrt(),
            n,
        }
    }
}

pub fn detection_rate(stats: &[Statistics], kind: DetectorKind, threshold: f64) -> Rate {
    let hits = stats.iter().filter(|s| s.get(kind) > threshold).count();
    Rate::from_counts(hits, stats.len())
}

/// `(1 - pfa)` empirical quantile of `values`: the smallest sample with at
/// least a `1 - pfa` fraction of the samples at or below it.
pub fn upper_quantile(values: &[f64], pfa: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Precision("no samples to take a quantile of".into()));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let k = ((1.0 - pfa) * v.len() as f64).ceil() as usize;
    Ok(v[k.clamp(1, v.len()) - 1])
}

/// Threshold for `detector` at false-alarm rate `pfa`, from the noise-only
/// calibration stream of `plan`.
pub fn calibrate_threshold_empirical(
    detector: DetectorKind,
    pfa: f64,
    plan: &TrialPlan,
) -> Result<f64> {
    calibrate_many(&[detector], pfa, plan).map(|v| v[0])
}

fn check_calibration_size(pfa: f64, n: usize) -> Result<()> {
    if !(pfa > 0.0 && pfa < 1.0) {
        return Err(Error::Domain(format!("pfa must lie in (0, 1), got {pfa}")));
    }
    if (n as f64) < 50.0 / pfa {
        return Err(Error::Precision(format!(
            "calibrating pfa = {pfa} needs at least {} trials, got {n}",
            (50.0 / pfa).ceil()
        )));
    }
    Ok(())
}

/// Calibrates several detectors on one shared noise-only run.
pub fn calibrate_many(detectors: &[DetectorKind], pfa: f64, plan: &TrialPlan) -> Result<Vec<f64>> {
    check_calibration_size(pfa, plan.n_trials)?;
    let stats = trial_statistics(&plan.calibration_plan())?;
    detectors
        .iter()
        .map(|&k| upper_quantile(&stats.iter().map(|s| s.get(k)).collect::<Vec<_>>(), pfa))
        .collect()
}

/// Thresholds for `detectors` under the plan's threshold mode. Empirical
/// mode calibrates unless the config already carries a threshold.
pub fn thresholds(detectors: &[DetectorKind], plan: &TrialPlan) -> Result<Vec<f64>> {
    match plan.cfg.threshold_mode {
        ThresholdMode::Analytic => detectors
            .iter()
            .map(|&k| analytic_threshold(k, &plan.cfg))
            .collect(),
        ThresholdMode::Empirical => match (plan.cfg.empirical_threshold, detectors) {
            (Some(t), [_]) => Ok(vec![t]),
            _ => calibrate_many(detectors, plan.cfg.pfa, plan),
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    pub p_detect: f64,
    pub stderr: f64,
    pub threshold: f64,
}

/// Detection rate of `plan.detector` on `plan`.
pub fn run_trials(plan: &TrialPlan) -> Result<TrialOutcome> {
    let threshold = thresholds(&[plan.detector], plan)?[0];
    let stats = trial_statistics(plan)?;
    let rate = detection_rate(&stats, plan.detector, threshold);
    Ok(TrialOutcome {
        p_detect: rate.p,
        stderr: rate.stderr,
        threshold,
    })
}

/// Runs `f` on a dedicated pool of `threads` workers, or on the global pool
/// when `threads` is `None`.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(Error::Domain("thread count must be >= 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map(|pool| pool.install(f))
            .map_err(|e| Error::Domain(format!("cannot start thread pool: {e}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splitmix_reference_values() {
        // First outputs of the reference SplitMix64 generator seeded with 0.
        assert_eq!(splitmix64(0), 0xE220_A839_7B1D_CDAF);
        assert_eq!(splitmix64(GOLDEN), 0x6E78_9E6A_A1B9_65F4);
    }

    #[test]
    fn trial_seeds_are_distinct() {
        let mut seeds: Vec<u64> = (0..10_000).map(|t| trial_seed(7, t)).collect();
        seeds.sort_unstable();
        seeds.dedup();
        assert_eq!(seeds.len(), 10_000);
    }

    #[test]
    fn quantile_definition() {
        let v: Vec<f64> = (1..=10).map(f64::from).collect();
        assert_eq!(upper_quantile(&v, 0.1).unwrap(), 9.0);
        assert_eq!(upper_quantile(&v, 0.5).unwrap(), 5.0);
        let above = v.iter().filter(|&&x| x > 9.0).count();
        assert_eq!(above, 1);
    }

    #[test]
    fn calibration_needs_enough_trials() {
        let plan = TrialPlan {
            n_trials: 400,
            ..Default::default()
        };
        assert!(matches!(
            calibrate_threshold_empirical(DetectorKind::Med, 0.1, &plan),
            Err(Error::Precision(_))
        ));
    }

    #[test]
    fn calibration_plan_is_noise_only() {
        let plan = TrialPlan::default().calibration_plan();
        assert!(plan.is_noise_only());
        assert_ne!(plan.base_seed, TrialPlan::default().base_seed);
    }

    #[test]
    fn rate_stderr() {
        let r = Rate::from_counts(25, 100);
        assert!((r.stderr - (0.25f64 * 0.75 / 100.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn rejects_small_plans() {
        let plan = TrialPlan {
            n_trials: 99,
            ..Default::default()
        };
        assert!(plan.validate().is_err());
    }
}
