//! Command dispatch: each command turns a [`RunConfig`] into one table.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use super::config::{RunConfig, TheoryKind, FORMAT_VERSION};
use super::csv::{parse_csv_table, Cell, Column, CsvTable};
use super::iq::read_iq;
use crate::cov::packetize;
use crate::detect::{analytic_threshold, statistics, Decision, ThresholdMode};
use crate::experiment::{
    calibrate_many, detection_rate, empirical_pdf, fig2_table, fig4_table, sweep_aux_amplitude,
    sweep_aux_offset, sweep_snr, thresholds, trial_aux_matrix, trial_observation, trial_statistics,
    SweepResult,
};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Calibrate,
    Detect,
    Pdf,
    SweepSnr,
    SweepOffset,
    SweepAmp,
    Theory,
}

impl Command {
    pub const ALL: [Command; 7] = [
        Self::Calibrate,
        Self::Detect,
        Self::Pdf,
        Self::SweepSnr,
        Self::SweepOffset,
        Self::SweepAmp,
        Self::Theory,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Calibrate => "calibrate",
            Self::Detect => "detect",
            Self::Pdf => "pdf",
            Self::SweepSnr => "sweep-snr",
            Self::SweepOffset => "sweep-offset",
            Self::SweepAmp => "sweep-amp",
            Self::Theory => "theory",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Format(format!("unknown command `{s}`")))
    }
}

fn table(cols: &[(&str, &str)]) -> Result<CsvTable> {
    CsvTable::new(cols.iter().map(|(n, u)| Column::new(n, u)).collect())
}

/// Runs `command` and returns its table with the run metadata appended.
/// `input` names a raw I/Q file for `detect`; other commands ignore it.
pub fn run_command(command: Command, cfg: &RunConfig, input: Option<&Path>) -> Result<CsvTable> {
    let mut t = match command {
        Command::Calibrate => calibrate(cfg)?,
        Command::Detect => detect(cfg, input)?,
        Command::Pdf => pdf(cfg)?,
        Command::SweepSnr => {
            let mut t = sweep_table(&sweep_snr(
                &cfg.detectors,
                &cfg.snr_grid_db,
                &cfg.trial_plan(),
            )?)?;
            t.push_meta("note", "snr grid and trial count are artifact choices")?;
            t
        }
        Command::SweepOffset => {
            sweep_table(&sweep_aux_offset(&cfg.offsets_hz, &cfg.trial_plan())?)?
        }
        Command::SweepAmp => sweep_table(&sweep_aux_amplitude(
            &cfg.delta_ells,
            &cfg.snr_list_db,
            &cfg.trial_plan(),
        )?)?,
        Command::Theory => theory(cfg)?,
    };
    if let (Command::Detect, Some(path)) = (command, input) {
        t.push_meta("input", path.display())?;
    }
    push_run_metadata(&mut t, command, cfg)?;
    Ok(t)
}

fn push_run_metadata(t: &mut CsvTable, command: Command, cfg: &RunConfig) -> Result<()> {
    t.push_meta("command", command)?;
    t.push_meta("format_version", FORMAT_VERSION)?;
    t.push_meta("eigsense_version", env!("CARGO_PKG_VERSION"))?;
    t.push_meta("seed", cfg.seed)?;
    t.push_meta("config_hash", cfg.hash())?;
    for (k, v) in cfg.effective() {
        t.push_meta(&format!("config.{k}"), v)?;
    }
    Ok(())
}

fn calibrate(cfg: &RunConfig) -> Result<CsvTable> {
    let plan = cfg.trial_plan();
    let empirical = calibrate_many(&cfg.detectors, cfg.pfa, &plan)?;
    let null = trial_statistics(&plan.null_plan())?;
    let mut t = table(&[
        ("detector", ""),
        ("pfa_target", "1"),
        ("empirical_threshold", "1"),
        ("empirical_pfa", "1"),
        ("analytic_threshold", "1"),
        ("analytic_pfa", "1"),
        ("n_trials", "1"),
    ])?;
    for (&k, &emp) in cfg.detectors.iter().zip(&empirical) {
        let (ath, apfa): (Cell, Cell) = if k.has_analytic_threshold() {
            let a = analytic_threshold(k, &plan.cfg)?;
            (a.into(), detection_rate(&null, k, a).p.into())
        } else {
            ("none".into(), "none".into())
        };
        t.push_row(vec![
            k.name().into(),
            cfg.pfa.into(),
            emp.into(),
            detection_rate(&null, k, emp).p.into(),
            ath,
            apfa,
            cfg.n_trials.into(),
        ])?;
    }
    Ok(t)
}

fn detect(cfg: &RunConfig, input: Option<&Path>) -> Result<CsvTable> {
    let plan = cfg.trial_plan();
    plan.validate()?;
    let x = match input {
        Some(path) => {
            let buf = read_iq(path)?;
            packetize(&buf, cfg.n, cfg.p)?
        }
        None => trial_observation(&plan, 0)?,
    };
    let aux = trial_aux_matrix(&plan, 0)?;
    let stats = statistics(&x, &aux, &plan.cfg)?;
    let th = thresholds(&cfg.detectors, &plan)?;
    let mut t = table(&[
        ("detector", ""),
        ("statistic", "1"),
        ("threshold", "1"),
        ("threshold_mode", ""),
        ("detected", ""),
    ])?;
    for (&k, &threshold) in cfg.detectors.iter().zip(&th) {
        if cfg.threshold_mode == ThresholdMode::Analytic && !k.has_analytic_threshold() {
            return Err(Error::Domain(format!(
                "{k} has no analytic threshold; use threshold_mode = empirical"
            )));
        }
        let d = Decision::new(stats.get(k), threshold, cfg.threshold_mode);
        t.push_row(vec![
            k.name().into(),
            d.statistic.into(),
            d.threshold.into(),
            d.model.name().into(),
            d.detected.into(),
        ])?;
    }
    Ok(t)
}

fn pdf(cfg: &RunConfig) -> Result<CsvTable> {
    let pdf = empirical_pdf(&cfg.trial_plan(), cfg.pdf_statistic, cfg.bins)?;
    let mut t = table(&[("bin_lo", "1"), ("bin_hi", "1"), ("density", "1")])?;
    for (e, d) in pdf.bin_edges.windows(2).zip(&pdf.densities) {
        t.push_row(vec![e[0].into(), e[1].into(), (*d).into()])?;
    }
    t.push_meta("statistic", cfg.pdf_statistic.name())?;
    t.push_meta("n_samples", pdf.n_samples)?;
    t.push_meta("mean", pdf.mean)?;
    t.push_meta("std_dev", pdf.std_dev)?;
    Ok(t)
}

fn sweep_table(r: &SweepResult) -> Result<CsvTable> {
    let by_snr = r.param_name == "snr";
    let mut cols = vec![Column::new("detector", ""), Column::new("snr", "dB")];
    if !by_snr {
        cols.push(Column::new(r.param_name, r.param_unit));
    }
    for name in ["threshold", "pd", "pfa", "stderr", "n_trials"] {
        cols.push(Column::new(name, "1"));
    }
    let mut t = CsvTable::new(cols)?;
    for row in &r.rows {
        let mut cells: Vec<Cell> = vec![row.detector.name().into(), row.snr_db.into()];
        if !by_snr {
            cells.push(row.param.into());
        }
        cells.extend([
            row.threshold.into(),
            row.pd.into(),
            row.pfa.into(),
            row.stderr.into(),
            row.n_trials.into(),
        ]);
        t.push_row(cells)?;
    }
    Ok(t)
}

fn theory(cfg: &RunConfig) -> Result<CsvTable> {
    match cfg.theory_kind {
        TheoryKind::Fig2 => {
            let f = fig2_table(
                &cfg.fig2_ell1,
                &cfg.fig2_gamma_s,
                &cfg.fig2_delta_ells,
                cfg.c(),
                cfg.n,
                cfg.p,
            )?;
            let mut t = table(&[
                ("reading", ""),
                ("ell1", "1"),
                ("delta_ell", "1"),
                ("gamma_s", "1"),
                ("detection_snr", "1"),
            ])?;
            for r in &f.rows {
                t.push_row(vec![
                    r.reading.name().into(),
                    r.ell1.into(),
                    r.delta_ell.into(),
                    r.gamma_s.into(),
                    r.detection_snr.into(),
                ])?;
            }
            Ok(t)
        }
        TheoryKind::Fig4 => {
            let f = fig4_table(&cfg.fig4_grid(), cfg.c(), cfg.n, cfg.p, cfg.delta_ell)?;
            let mut t = table(&[("snr", "1"), ("detector", ""), ("detection_snr", "1")])?;
            for r in &f.rows {
                t.push_row(vec![
                    r.snr.into(),
                    r.detector.into(),
                    r.detection_snr.into(),
                ])?;
            }
            match f.crossover_snr {
                Some(x) => t.push_meta("crossover_snr", x)?,
                None => t.push_meta("crossover_snr", "none")?,
            }
            Ok(t)
        }
    }
}

/// Outcome of re-running a table's recorded configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Verification {
    pub command: Command,
    pub identical: bool,
    pub config_hash_ok: bool,
}

/// Rebuilds the configuration recorded in `csv_text`, re-runs its command
/// and compares the table bodies byte for byte.
pub fn verify_table(csv_text: &str) -> Result<Verification> {
    let recorded = parse_csv_table(csv_text)?;
    let command: Command = recorded
        .meta("command")
        .ok_or_else(|| Error::Format("table has no `command` metadata".into()))?
        .parse()?;
    let doc: String = recorded
        .metadata
        .iter()
        .filter_map(|(k, v)| k.strip_prefix("config.").map(|k| format!("{k} = {v}\n")))
        .collect();
    if doc.is_empty() {
        return Err(Error::Format(
            "table carries no configuration metadata".into(),
        ));
    }
    let cfg = RunConfig::from_str_config(&doc)?;
    let config_hash_ok = recorded.meta("config_hash") == Some(cfg.hash().as_str());
    let input = recorded.meta("input").map(Path::new);
    let rerun = run_command(command, &cfg, input)?;
    let body_end = csv_text
        .lines()
        .take_while(|l| !l.starts_with('#'))
        .map(|l| l.len() + 1)
        .sum::<usize>();
    let identical = csv_text.get(..body_end) == Some(rerun.body().as_str());
    Ok(Verification {
        command,
        identical,
        config_hash_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn command_names_round_trip() {
        for c in Command::ALL {
            assert_eq!(c.name().parse::<Command>().unwrap(), c);
        }
    }

    #[test]
    fn theory_fig4_has_three_columns_and_verifies() {
        let cfg = RunConfig::from_str_config("theory_kind = fig4\nfig4_snr_step = 0.01\n").unwrap();
        let t = run_command(Command::Theory, &cfg, None).unwrap();
        assert_eq!(t.columns.len(), 3);
        assert!(t.meta("crossover_snr").is_some());
        let v = verify_table(&t.to_csv_string()).unwrap();
        assert!(v.identical && v.config_hash_ok);
    }

    #[test]
    fn tampered_body_fails_verification() {
        let cfg = RunConfig::from_str_config("theory_kind = fig2\n").unwrap();
        let s = run_command(Command::Theory, &cfg, None)
            .unwrap()
            .to_csv_string();
        let tampered = s.replacen("fixed_ell1,2.5", "fixed_ell1,2.6", 1);
        assert_ne!(tampered, s);
        assert!(!verify_table(&tampered).unwrap().identical);
    }
}
