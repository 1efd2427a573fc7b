use crate::detect::{theory_snr_fmd, theory_snr_med, theory_snr_smed, TheorySnrInputs};
use crate::{Error, Result};

/// Which quantity is held fixed while the auxiliary margin varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fig2Reading {
    /// Combined spike `ell1 = 1 + sqrt(c) + gamma_s + delta_ell` held fixed.
    FixedEll1,
    /// Signal strength `gamma_s` held fixed.
    FixedGammaS,
}

impl Fig2Reading {
    pub fn name(self) -> &'static str {
        match self {
            Self::FixedEll1 => "fixed_ell1",
            Self::FixedGammaS => "fixed_gamma_s",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fig2Row {
    pub reading: Fig2Reading,
    pub ell1: f64,
    pub delta_ell: f64,
    pub gamma_s: f64,
    pub detection_snr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fig2Table {
    pub rows: Vec<Fig2Row>,
}

impl Fig2Table {
    /// Rows of one curve, in `delta_ell` order.
    pub fn curve(&self, reading: Fig2Reading, key: f64) -> Vec<&Fig2Row> {
        self.rows
            .iter()
            .filter(|r| {
                r.reading == reading
                    && match reading {
                        Fig2Reading::FixedEll1 => r.ell1 == key,
                        Fig2Reading::FixedGammaS => r.gamma_s == key,
                    }
            })
            .collect()
    }
}

/// SMED detection SNR against the auxiliary margin, once per fixed `ell1`
/// and once per fixed `gamma_s`. Points where the fixed `ell1` leaves no
/// room for a nonnegative signal are skipped.
pub fn fig2_table(
    ell1_values: &[f64],
    gamma_s_values: &[f64],
    delta_ells: &[f64],
    c: f64,
    n: usize,
    p: usize,
) -> Result<Fig2Table> {
    if delta_ells.iter().any(|d| d.is_nan() || *d <= 0.0) {
        return Err(Error::Domain("delta_ell values must be > 0".into()));
    }
    let r = c.sqrt();
    let snr = |gamma_s: f64, delta_ell: f64| {
        theory_snr_smed(&TheorySnrInputs {
            gamma_s,
            gamma_v: r + delta_ell,
            c,
            p,
            n,
            m_factor: 1,
        })
    };
    let mut rows = Vec::new();
    for &ell1 in ell1_values {
        for &delta_ell in delta_ells {
            let gamma_s = ell1 - 1.0 - r - delta_ell;
            if gamma_s < 0.0 {
                continue;
            }
            rows.push(Fig2Row {
                reading: Fig2Reading::FixedEll1,
                ell1,
                delta_ell,
                gamma_s,
                detection_snr: snr(gamma_s, delta_ell)?,
            });
        }
    }
    for &gamma_s in gamma_s_values {
        for &delta_ell in delta_ells {
            rows.push(Fig2Row {
                reading: Fig2Reading::FixedGammaS,
                ell1: 1.0 + r + gamma_s + delta_ell,
                delta_ell,
                gamma_s,
                detection_snr: snr(gamma_s, delta_ell)?,
            });
        }
    }
    Ok(Fig2Table { rows })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fig4Row {
    /// Original (received) SNR, linear.
    pub snr: f64,
    pub detector: &'static str,
    pub detection_snr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fig4Table {
    pub rows: Vec<Fig4Row>,
    /// Smallest original SNR above which FMD beats MED (consistent variant),
    /// located by bisection.
    pub crossover_snr: Option<f64>,
}

impl Fig4Table {
    pub fn value(&self, detector: &str, snr: f64) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.detector == detector && r.snr == snr)
            .map(|r| r.detection_snr)
    }
}

pub const FIG4_SMED: &str = "smed";
pub const FIG4_MED: &str = "med_consistent";
pub const FIG4_MED_AS_PRINTED: &str = "med_as_printed";
pub const FIG4_FMD: &str = "fmd";

/// Detection SNR of SMED, MED (both readings) and FMD against the original
/// SNR. MED is only tabulated above the transition, `snr > sqrt(c)/N`.
pub fn fig4_table(
    snr_grid: &[f64],
    c: f64,
    n: usize,
    p: usize,
    delta_ell: f64,
) -> Result<Fig4Table> {
    if snr_grid.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
        return Err(Error::Domain("original SNR values must be > 0".into()));
    }
    let inputs = |snr: f64| TheorySnrInputs {
        gamma_s: n as f64 * snr,
        gamma_v: c.sqrt() + delta_ell,
        c,
        p,
        n,
        m_factor: 1,
    };
    let mut rows = Vec::new();
    for &snr in snr_grid {
        let t = inputs(snr);
        rows.push(Fig4Row {
            snr,
            detector: FIG4_SMED,
            detection_snr: theory_snr_smed(&t)?,
        });
        if t.gamma_s > c.sqrt() {
            let med = theory_snr_med(&t)?;
            rows.push(Fig4Row {
                snr,
                detector: FIG4_MED,
                detection_snr: med.consistent,
            });
            rows.push(Fig4Row {
                snr,
                detector: FIG4_MED_AS_PRINTED,
                detection_snr: med.as_printed,
            });
        }
        rows.push(Fig4Row {
            snr,
            detector: FIG4_FMD,
            detection_snr: theory_snr_fmd(&t)?,
        });
    }
    let gap = |snr: f64| -> Result<f64> {
        let t = inputs(snr);
        Ok(theory_snr_fmd(&t)? - theory_snr_med(&t)?.consistent)
    };
    let mut crossover_snr = None;
    let above: Vec<f64> = snr_grid
        .iter()
        .copied()
        .filter(|&s| n as f64 * s > c.sqrt())
        .collect();
    for w in above.windows(2) {
        let (mut lo, mut hi) = (w[0], w[1]);
        if gap(lo)? < 0.0 && gap(hi)? >= 0.0 {
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if gap(mid)? < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo <= 1e-14 * hi {
                    break;
                }
            }
            crossover_snr = Some(0.5 * (lo + hi));
            break;
        }
    }
    Ok(Fig4Table {
        rows,
        crossover_snr,
    })
}
