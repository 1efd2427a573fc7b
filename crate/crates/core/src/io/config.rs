//! Flat `key = value` run configuration.
//!
//! One key per line, `#` starts a comment. Sources are applied in the order
//! defaults, preset, file, command-line overrides; every value is parsed and
//! checked before anything runs.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::detect::{DetectorConfig, DetectorKind, NoiseRef, ThresholdMode};
use crate::experiment::{AuxSource, PdfStatistic, SignalKind, TrialPlan, Waveform, MIN_TRIALS};
use crate::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

/// One `key = value` line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigEntry {
    pub key: String,
    pub value: String,
    pub line: usize,
}

/// Splits a config document into entries. Checks syntax only.
pub fn parse_config_str(text: &str) -> Result<Vec<ConfigEntry>> {
    let mut out: Vec<ConfigEntry> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let Some((k, v)) = body.split_once('=') else {
            return Err(Error::Config {
                key: None,
                line: Some(line),
                message: format!("expected `key = value`, got `{body}`"),
            });
        };
        let key = k.trim();
        if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(Error::Config {
                key: None,
                line: Some(line),
                message: format!("invalid key `{key}`"),
            });
        }
        if let Some(prev) = out.iter().find(|e| e.key == key) {
            return Err(Error::Config {
                key: Some(key.into()),
                line: Some(line),
                message: format!("duplicate key, first set at line {}", prev.line),
            });
        }
        out.push(ConfigEntry {
            key: key.into(),
            value: v.trim().into(),
            line,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AuxKind {
    Tone,
    Trained,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TheoryKind {
    Fig2,
    Fig4,
}

/// Fully validated run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub n: usize,
    pub p: usize,
    pub sigma2: f64,
    pub pfa: f64,
    pub delta_ell: f64,
    pub beta: f64,
    pub threshold_mode: ThresholdMode,
    pub noise_ref: NoiseRef,
    pub detector: DetectorKind,
    pub detectors: Vec<DetectorKind>,
    pub signal: SignalKind,
    pub snr_db: f64,
    pub snr_grid_db: Vec<f64>,
    pub n_trials: usize,
    pub seed: u64,
    pub sample_rate: f64,
    pub carrier_freq: f64,
    pub bit_rate: f64,
    pub wideband_components: usize,
    pub wideband_filter_length: usize,
    pub aux: AuxKind,
    pub aux_offset_hz: f64,
    pub aux_train_seed: u64,
    pub offsets_hz: Vec<f64>,
    pub delta_ells: Vec<f64>,
    pub snr_list_db: Vec<f64>,
    pub pdf_statistic: PdfStatistic,
    pub bins: Option<usize>,
    pub theory_kind: TheoryKind,
    pub fig2_ell1: Vec<f64>,
    pub fig2_gamma_s: Vec<f64>,
    pub fig2_delta_ells: Vec<f64>,
    pub fig4_snr_min: f64,
    pub fig4_snr_max: f64,
    pub fig4_snr_step: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n: 40,
            p: 100,
            sigma2: 1.0,
            pfa: 0.1,
            delta_ell: 0.1,
            beta: 1.0,
            threshold_mode: ThresholdMode::Empirical,
            noise_ref: NoiseRef::Blind,
            detector: DetectorKind::Smed,
            detectors: DetectorKind::ALL.to_vec(),
            signal: SignalKind::Bpsk,
            snr_db: -15.0,
            snr_grid_db: vec![
                -24.0, -22.0, -20.0, -18.0, -16.0, -15.0, -14.0, -12.0, -10.0,
            ],
            n_trials: 10_000,
            seed: 1,
            sample_rate: 10e6,
            carrier_freq: 1e6,
            bit_rate: 100e3,
            wideband_components: 4,
            wideband_filter_length: 40,
            aux: AuxKind::Tone,
            aux_offset_hz: 0.0,
            aux_train_seed: 7,
            offsets_hz: crate::experiment::DEFAULT_OFFSETS_HZ.to_vec(),
            delta_ells: vec![0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0],
            snr_list_db: vec![-20.0, -18.0, -15.0],
            pdf_statistic: PdfStatistic::LambdaMax,
            bins: None,
            theory_kind: TheoryKind::Fig4,
            fig2_ell1: vec![2.5, 3.0, 3.5],
            fig2_gamma_s: vec![0.4, 0.632456, 1.264911],
            fig2_delta_ells: (1..=20).map(|i| i as f64 * 0.05).collect(),
            fig4_snr_min: 0.001,
            fig4_snr_max: 0.3,
            fig4_snr_step: 0.001,
        }
    }
}

pub const PRESETS: [&str; 3] = ["paper-baseline", "quick", "pdf-hires"];

fn preset_entries(name: &str) -> Result<&'static str> {
    match name {
        "paper-baseline" => Ok(
            "n = 40\np = 100\nsigma2 = 1\npfa = 0.1\ndelta_ell = 0.1\nsignal = bpsk\n\
             sample_rate = 10000000\ncarrier_freq = 1000000\nbit_rate = 100000\nn_trials = 10000\n",
        ),
        "quick" => Ok("n_trials = 1000\n"),
        "pdf-hires" => Ok("n_trials = 100000\nsignal = spike\n"),
        other => Err(Error::Config {
            key: Some("preset".into()),
            line: None,
            message: format!(
                "unknown preset `{other}`, expected one of {}",
                PRESETS.join(", ")
            ),
        }),
    }
}

fn parse_value<T: FromStr>(e: &ConfigEntry, what: &str) -> Result<T> {
    e.value.parse().map_err(|_| type_error(e, what))
}

fn type_error(e: &ConfigEntry, what: &str) -> Error {
    Error::Config {
        key: Some(e.key.clone()),
        line: line_of(e),
        message: format!("expected {what}, got `{}`", e.value),
    }
}

fn line_of(e: &ConfigEntry) -> Option<usize> {
    (e.line > 0).then_some(e.line)
}

fn parse_real(e: &ConfigEntry) -> Result<f64> {
    let v: f64 = parse_value(e, "a real number")?;
    if v.is_nan() {
        return Err(type_error(e, "a real number"));
    }
    Ok(v)
}

fn parse_list<T>(e: &ConfigEntry, what: &str, item: impl Fn(&str) -> Option<T>) -> Result<Vec<T>> {
    e.value
        .split(',')
        .map(|s| item(s.trim()).ok_or_else(|| type_error(e, what)))
        .collect()
}

fn real_item(s: &str) -> Option<f64> {
    s.parse::<f64>().ok().filter(|v| !v.is_nan())
}

fn parse_enum<T: FromStr>(e: &ConfigEntry, choices: &str) -> Result<T> {
    e.value
        .parse()
        .map_err(|_| type_error(e, &format!("one of {choices}")))
}

fn fmt_list<T: Display>(v: &[T]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

impl RunConfig {
    /// Builds a configuration from an optional preset, an optional config
    /// document and `key=value` overrides, in that order of precedence.
    pub fn from_sources(
        preset: Option<&str>,
        file_text: Option<&str>,
        overrides: &[(String, String)],
    ) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let mut lines: BTreeMap<String, usize> = BTreeMap::new();
        let file_entries = match file_text {
            Some(t) => parse_config_str(t)?,
            None => Vec::new(),
        };
        let file_preset = file_entries.iter().find(|e| e.key == "preset");
        let preset_name = preset
            .map(str::to_owned)
            .or_else(|| file_preset.map(|e| e.value.clone()));
        if let Some(name) = preset_name {
            let text = preset_entries(&name).map_err(|err| match (err, file_preset) {
                (Error::Config { key, message, .. }, Some(e)) if preset.is_none() => {
                    Error::Config {
                        key,
                        line: Some(e.line),
                        message,
                    }
                }
                (err, _) => err,
            })?;
            for mut e in parse_config_str(text)? {
                e.line = 0;
                cfg.apply(&e)?;
            }
        }
        for e in file_entries.iter().filter(|e| e.key != "preset") {
            cfg.apply(e)?;
            lines.insert(e.key.clone(), e.line);
        }
        for (k, v) in overrides {
            let e = ConfigEntry {
                key: k.clone(),
                value: v.clone(),
                line: 0,
            };
            cfg.apply(&e)?;
            lines.remove(k);
        }
        cfg.validate().map_err(|err| match err {
            Error::Config {
                key: Some(k),
                line: None,
                message,
            } => {
                let line = lines.get(&k).copied();
                Error::Config {
                    key: Some(k),
                    line,
                    message,
                }
            }
            other => other,
        })?;
        Ok(cfg)
    }

    /// Parses a config document on top of the defaults.
    pub fn from_str_config(text: &str) -> Result<Self> {
        Self::from_sources(None, Some(text), &[])
    }

    fn apply(&mut self, e: &ConfigEntry) -> Result<()> {
        match e.key.as_str() {
            "format_version" => {
                let v: u32 = parse_value(e, "an unsigned integer")?;
                if v != FORMAT_VERSION {
                    return Err(Error::Config {
                        key: Some(e.key.clone()),
                        line: line_of(e),
                        message: format!(
                            "unsupported format version {v}, this build reads {FORMAT_VERSION}"
                        ),
                    });
                }
            }
            "n" => self.n = parse_value(e, "an unsigned integer")?,
            "p" => self.p = parse_value(e, "an unsigned integer")?,
            "sigma2" => self.sigma2 = parse_real(e)?,
            "pfa" => self.pfa = parse_real(e)?,
            "delta_ell" => self.delta_ell = parse_real(e)?,
            "beta" => self.beta = parse_real(e)?,
            "threshold_mode" => self.threshold_mode = parse_enum(e, "analytic, empirical")?,
            "noise_ref" => self.noise_ref = parse_enum(e, "blind, oracle")?,
            "detector" => self.detector = parse_enum(e, "smed, med, fmd, mme")?,
            "detectors" => {
                self.detectors =
                    parse_list(e, "a comma-separated list of smed, med, fmd, mme", |s| {
                        s.parse().ok()
                    })?
            }
            "signal" => self.signal = parse_enum(e, "none, bpsk, tone, spike, wideband")?,
            "snr_db" => self.snr_db = parse_real(e)?,
            "snr_grid_db" => {
                self.snr_grid_db = parse_list(e, "a comma-separated list of reals", real_item)?
            }
            "n_trials" => self.n_trials = parse_value(e, "an unsigned integer")?,
            "seed" => self.seed = parse_value(e, "an unsigned 64-bit integer")?,
            "sample_rate" => self.sample_rate = parse_real(e)?,
            "carrier_freq" => self.carrier_freq = parse_real(e)?,
            "bit_rate" => self.bit_rate = parse_real(e)?,
            "wideband_components" => {
                self.wideband_components = parse_value(e, "an unsigned integer")?
            }
            "wideband_filter_length" => {
                self.wideband_filter_length = parse_value(e, "an unsigned integer")?
            }
            "aux" => {
                self.aux = match e.value.as_str() {
                    "tone" => AuxKind::Tone,
                    "trained" => AuxKind::Trained,
                    _ => return Err(type_error(e, "one of tone, trained")),
                }
            }
            "aux_offset_hz" => self.aux_offset_hz = parse_real(e)?,
            "aux_train_seed" => self.aux_train_seed = parse_value(e, "an unsigned 64-bit integer")?,
            "offsets_hz" => {
                self.offsets_hz = parse_list(e, "a comma-separated list of reals", real_item)?
            }
            "delta_ells" => {
                self.delta_ells = parse_list(e, "a comma-separated list of reals", real_item)?
            }
            "snr_list_db" => {
                self.snr_list_db = parse_list(e, "a comma-separated list of reals", real_item)?
            }
            "pdf_statistic" => {
                self.pdf_statistic = parse_enum(e, "lambda_max, trace, smed, med, fmd, mme")?
            }
            "bins" => {
                self.bins = match e.value.as_str() {
                    "auto" => None,
                    v => Some(
                        v.parse()
                            .map_err(|_| type_error(e, "`auto` or an unsigned integer"))?,
                    ),
                }
            }
            "theory_kind" => {
                self.theory_kind = match e.value.as_str() {
                    "fig2" => TheoryKind::Fig2,
                    "fig4" => TheoryKind::Fig4,
                    _ => return Err(type_error(e, "one of fig2, fig4")),
                }
            }
            "fig2_ell1" => {
                self.fig2_ell1 = parse_list(e, "a comma-separated list of reals", real_item)?
            }
            "fig2_gamma_s" => {
                self.fig2_gamma_s = parse_list(e, "a comma-separated list of reals", real_item)?
            }
            "fig2_delta_ells" => {
                self.fig2_delta_ells = parse_list(e, "a comma-separated list of reals", real_item)?
            }
            "fig4_snr_min" => self.fig4_snr_min = parse_real(e)?,
            "fig4_snr_max" => self.fig4_snr_max = parse_real(e)?,
            "fig4_snr_step" => self.fig4_snr_step = parse_real(e)?,
            other => {
                return Err(Error::Config {
                    key: Some(other.into()),
                    line: line_of(e),
                    message: "unknown key".into(),
                })
            }
        }
        Ok(())
    }

    /// Checks every cross-key constraint.
    pub fn validate(&self) -> Result<()> {
        let fail = |key: &str, msg: String| Err(Error::config(key, msg));
        if self.n < 2 {
            return fail("n", format!("N must be >= 2, got {}", self.n));
        }
        if self.p < 2 {
            return fail("p", format!("P must be >= 2, got {}", self.p));
        }
        if self.n >= self.p {
            return fail(
                "n",
                format!("c = N/P must be < 1, got N = {}, P = {}", self.n, self.p),
            );
        }
        if !(self.sigma2 > 0.0 && self.sigma2.is_finite()) {
            return fail("sigma2", format!("must be > 0, got {}", self.sigma2));
        }
        if !(self.pfa > 0.0 && self.pfa < 1.0) {
            return fail("pfa", format!("must lie in (0, 1), got {}", self.pfa));
        }
        if !(self.delta_ell > 0.0 && self.delta_ell.is_finite()) {
            return fail("delta_ell", format!("must be > 0, got {}", self.delta_ell));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return fail("beta", format!("must be > 0, got {}", self.beta));
        }
        if self.detectors.is_empty() {
            return fail("detectors", "must name at least one detector".into());
        }
        if self.snr_db == f64::INFINITY {
            return fail("snr_db", "must be finite or -inf".into());
        }
        if self.snr_grid_db.contains(&f64::INFINITY) {
            return fail("snr_grid_db", "values must be finite or -inf".into());
        }
        if self.n_trials < MIN_TRIALS {
            return fail(
                "n_trials",
                format!("must be >= {MIN_TRIALS}, got {}", self.n_trials),
            );
        }
        if !(self.sample_rate > 0.0 && self.sample_rate.is_finite()) {
            return fail(
                "sample_rate",
                format!("must be > 0, got {}", self.sample_rate),
            );
        }
        if !self.carrier_freq.is_finite() {
            return fail("carrier_freq", "must be finite".into());
        }
        if !(self.bit_rate > 0.0 && self.bit_rate <= self.sample_rate) {
            return fail(
                "bit_rate",
                format!("must lie in (0, sample_rate], got {}", self.bit_rate),
            );
        }
        if self.wideband_components == 0 {
            return fail("wideband_components", "must be >= 1".into());
        }
        if self.wideband_filter_length == 0 {
            return fail("wideband_filter_length", "must be >= 1".into());
        }
        if self.aux == AuxKind::Trained && self.signal == SignalKind::None {
            return fail(
                "aux",
                "a trained auxiliary needs a signal kind other than none".into(),
            );
        }
        if !self.aux_offset_hz.is_finite() {
            return fail("aux_offset_hz", "must be finite".into());
        }
        for (key, list) in [
            ("offsets_hz", &self.offsets_hz),
            ("snr_list_db", &self.snr_list_db),
        ] {
            if list.is_empty() || list.iter().any(|v| !v.is_finite()) {
                return fail(key, "must be a non-empty list of finite values".into());
            }
        }
        for (key, list) in [
            ("delta_ells", &self.delta_ells),
            ("fig2_delta_ells", &self.fig2_delta_ells),
        ] {
            if list.is_empty() || list.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
                return fail(key, "must be a non-empty list of positive values".into());
            }
        }
        if self.snr_grid_db.is_empty() {
            return fail("snr_grid_db", "must not be empty".into());
        }
        if self.bins == Some(0) {
            return fail("bins", "must be >= 1".into());
        }
        if self
            .fig2_ell1
            .iter()
            .chain(&self.fig2_gamma_s)
            .any(|v| !v.is_finite())
        {
            return fail("fig2_ell1", "values must be finite".into());
        }
        if !(self.fig4_snr_min > 0.0 && self.fig4_snr_min.is_finite()) {
            return fail(
                "fig4_snr_min",
                format!("must be > 0, got {}", self.fig4_snr_min),
            );
        }
        if !(self.fig4_snr_max > self.fig4_snr_min && self.fig4_snr_max.is_finite()) {
            return fail("fig4_snr_max", "must exceed fig4_snr_min".into());
        }
        if self.fig4_snr_step.is_nan()
            || self.fig4_snr_step <= 0.0
            || (self.fig4_snr_max - self.fig4_snr_min) / self.fig4_snr_step > 1e6
        {
            return fail(
                "fig4_snr_step",
                "must be > 0 and give at most 10^6 grid points".into(),
            );
        }
        Ok(())
    }

    pub fn c(&self) -> f64 {
        self.n as f64 / self.p as f64
    }

    pub fn detector_config(&self) -> DetectorConfig {
        DetectorConfig {
            n: self.n,
            p: self.p,
            sigma2: self.sigma2,
            pfa: self.pfa,
            delta_ell: self.delta_ell,
            threshold_mode: self.threshold_mode,
            beta: self.beta,
            noise_ref: self.noise_ref,
            empirical_threshold: None,
        }
    }

    pub fn trial_plan(&self) -> TrialPlan {
        TrialPlan {
            detector: self.detector,
            signal: self.signal,
            snr_db: self.snr_db,
            n_trials: self.n_trials,
            base_seed: self.seed,
            cfg: self.detector_config(),
            waveform: Waveform {
                sample_rate: self.sample_rate,
                carrier_freq: self.carrier_freq,
                bit_rate: self.bit_rate,
                wideband_components: self.wideband_components,
                wideband_filter_length: self.wideband_filter_length,
            },
            aux: match self.aux {
                AuxKind::Tone => AuxSource::Tone {
                    offset_hz: self.aux_offset_hz,
                },
                AuxKind::Trained => AuxSource::Trained {
                    kind: self.signal,
                    seed: self.aux_train_seed,
                },
            },
        }
    }

    /// Linear SNR grid of the detection-SNR table.
    pub fn fig4_grid(&self) -> Vec<f64> {
        let count =
            ((self.fig4_snr_max - self.fig4_snr_min) / self.fig4_snr_step + 1e-9).floor() as usize;
        (0..=count)
            .map(|i| self.fig4_snr_min + i as f64 * self.fig4_snr_step)
            .collect()
    }

    /// Every key with its effective value, in a fixed order. Parsing this
    /// list back yields an identical configuration.
    pub fn effective(&self) -> Vec<(&'static str, String)> {
        let mode = |m: ThresholdMode| m.name().to_string();
        vec![
            ("format_version", FORMAT_VERSION.to_string()),
            ("n", self.n.to_string()),
            ("p", self.p.to_string()),
            ("sigma2", self.sigma2.to_string()),
            ("pfa", self.pfa.to_string()),
            ("delta_ell", self.delta_ell.to_string()),
            ("beta", self.beta.to_string()),
            ("threshold_mode", mode(self.threshold_mode)),
            ("noise_ref", self.noise_ref.name().to_string()),
            ("detector", self.detector.to_string()),
            ("detectors", fmt_list(&self.detectors)),
            ("signal", self.signal.to_string()),
            ("snr_db", self.snr_db.to_string()),
            ("snr_grid_db", fmt_list(&self.snr_grid_db)),
            ("n_trials", self.n_trials.to_string()),
            ("seed", self.seed.to_string()),
            ("sample_rate", self.sample_rate.to_string()),
            ("carrier_freq", self.carrier_freq.to_string()),
            ("bit_rate", self.bit_rate.to_string()),
            ("wideband_components", self.wideband_components.to_string()),
            (
                "wideband_filter_length",
                self.wideband_filter_length.to_string(),
            ),
            (
                "aux",
                match self.aux {
                    AuxKind::Tone => "tone",
                    AuxKind::Trained => "trained",
                }
                .to_string(),
            ),
            ("aux_offset_hz", self.aux_offset_hz.to_string()),
            ("aux_train_seed", self.aux_train_seed.to_string()),
            ("offsets_hz", fmt_list(&self.offsets_hz)),
            ("delta_ells", fmt_list(&self.delta_ells)),
            ("snr_list_db", fmt_list(&self.snr_list_db)),
            ("pdf_statistic", self.pdf_statistic.name().to_string()),
            (
                "bins",
                self.bins.map_or("auto".to_string(), |b| b.to_string()),
            ),
            (
                "theory_kind",
                match self.theory_kind {
                    TheoryKind::Fig2 => "fig2",
                    TheoryKind::Fig4 => "fig4",
                }
                .to_string(),
            ),
            ("fig2_ell1", fmt_list(&self.fig2_ell1)),
            ("fig2_gamma_s", fmt_list(&self.fig2_gamma_s)),
            ("fig2_delta_ells", fmt_list(&self.fig2_delta_ells)),
            ("fig4_snr_min", self.fig4_snr_min.to_string()),
            ("fig4_snr_max", self.fig4_snr_max.to_string()),
            ("fig4_snr_step", self.fig4_snr_step.to_string()),
        ]
    }

    /// The effective configuration as a config document.
    pub fn to_config_string(&self) -> String {
        self.effective()
            .iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }

    /// SHA-256 of [`RunConfig::to_config_string`], lowercase hex.
    pub fn hash(&self) -> String {
        Sha256::digest(self.to_config_string().as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}
