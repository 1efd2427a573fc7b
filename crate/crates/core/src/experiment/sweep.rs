use super::{detection_rate, thresholds, trial_statistics, AuxSource, TrialPlan};
use crate::detect::DetectorKind;
use crate::{Error, Result};

/// Offsets of the auxiliary carrier from the signal carrier, in Hz.
pub const DEFAULT_OFFSETS_HZ: [f64; 6] = [0.0, 30e3, 50e3, 70e3, 100e3, 150e3];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub detector: DetectorKind,
    pub snr_db: f64,
    /// Swept quantity: SNR in dB, auxiliary offset in Hz, or `delta_ell`.
    pub param: f64,
    pub threshold: f64,
    pub pd: f64,
    pub pfa: f64,
    /// Binomial standard error of `pd`.
    pub stderr: f64,
    pub n_trials: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub param_name: &'static str,
    pub param_unit: &'static str,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn find(&self, detector: DetectorKind, param: f64, snr_db: f64) -> Option<&SweepRow> {
        self.rows
            .iter()
            .find(|r| r.detector == detector && r.param == param && r.snr_db == snr_db)
    }
}

fn check_grid(grid: &[f64], what: &str) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Domain(format!("{what} grid is empty")));
    }
    if grid.iter().any(|v| v.is_nan()) {
        return Err(Error::Domain(format!("{what} grid contains NaN")));
    }
    Ok(())
}

/// Pd of each detector at each SNR. Thresholds are fixed before the sweep;
/// every grid point reuses the plan's trial seeds.
pub fn sweep_snr(
    detectors: &[DetectorKind],
    snr_grid_db: &[f64],
    plan: &TrialPlan,
) -> Result<SweepResult> {
    check_grid(snr_grid_db, "SNR")?;
    if detectors.is_empty() {
        return Err(Error::Domain("no detectors selected".into()));
    }
    plan.validate()?;
    let th = thresholds(detectors, plan)?;
    let null = trial_statistics(&plan.null_plan())?;
    let pfa: Vec<f64> = detectors
        .iter()
        .zip(&th)
        .map(|(&k, &t)| detection_rate(&null, k, t).p)
        .collect();
    let mut rows = Vec::new();
    for &snr_db in snr_grid_db {
        let point = TrialPlan { snr_db, ..*plan };
        let stats = trial_statistics(&point)?;
        for (i, &k) in detectors.iter().enumerate() {
            let r = detection_rate(&stats, k, th[i]);
            rows.push(SweepRow {
                detector: k,
                snr_db,
                param: snr_db,
                threshold: th[i],
                pd: r.p,
                pfa: pfa[i],
                stderr: r.stderr,
                n_trials: r.n,
            });
        }
    }
    Ok(SweepResult {
        param_name: "snr",
        param_unit: "dB",
        rows,
    })
}

/// SMED Pd with a tone auxiliary detuned by each offset.
pub fn sweep_aux_offset(offsets_hz: &[f64], plan: &TrialPlan) -> Result<SweepResult> {
    check_grid(offsets_hz, "offset")?;
    let mut rows = Vec::new();
    for &offset in offsets_hz {
        let point = TrialPlan {
            detector: DetectorKind::Smed,
            aux: AuxSource::Tone { offset_hz: offset },
            ..*plan
        };
        point.validate()?;
        let th = thresholds(&[DetectorKind::Smed], &point)?[0];
        let pfa = detection_rate(
            &trial_statistics(&point.null_plan())?,
            DetectorKind::Smed,
            th,
        )
        .p;
        let r = detection_rate(&trial_statistics(&point)?, DetectorKind::Smed, th);
        rows.push(SweepRow {
            detector: DetectorKind::Smed,
            snr_db: plan.snr_db,
            param: offset,
            threshold: th,
            pd: r.p,
            pfa,
            stderr: r.stderr,
            n_trials: r.n,
        });
    }
    Ok(SweepResult {
        param_name: "offset",
        param_unit: "Hz",
        rows,
    })
}

/// SMED Pd for each auxiliary margin `delta_ell` at each SNR.
pub fn sweep_aux_amplitude(
    delta_ells: &[f64],
    snr_list_db: &[f64],
    plan: &TrialPlan,
) -> Result<SweepResult> {
    check_grid(delta_ells, "delta_ell")?;
    check_grid(snr_list_db, "SNR")?;
    let mut rows = Vec::new();
    for &delta_ell in delta_ells {
        let base = TrialPlan {
            detector: DetectorKind::Smed,
            cfg: crate::detect::DetectorConfig {
                delta_ell,
                empirical_threshold: None,
                ..plan.cfg
            },
            ..*plan
        };
        base.validate()?;
        let th = thresholds(&[DetectorKind::Smed], &base)?[0];
        let pfa = detection_rate(
            &trial_statistics(&base.null_plan())?,
            DetectorKind::Smed,
            th,
        )
        .p;
        for &snr_db in snr_list_db {
            let point = TrialPlan { snr_db, ..base };
            let r = detection_rate(&trial_statistics(&point)?, DetectorKind::Smed, th);
            rows.push(SweepRow {
                detector: DetectorKind::Smed,
                snr_db,
                param: delta_ell,
                threshold: th,
                pd: r.p,
                pfa,
                stderr: r.stderr,
                n_trials: r.n,
            });
        }
    }
    Ok(SweepResult {
        param_name: "delta_ell",
        param_unit: "1",
        rows,
    })
}
