//! Closed-form random-matrix statistics for the N x P sample covariance.
//!
//! Everything here is expressed in normalized noise units (noise variance 1)
//! unless a `sigma2` argument says otherwise. Callers rescale by the noise
//! variance where they need absolute power units.

use statrs::distribution::{ContinuousCDF, Gamma};
use statrs::function::erf::erfc;

use crate::{Error, Result};

/// Mean of the GUE Tracy-Widom law.
pub const TW2_MEAN: f64 = -1.771086807;

/// Variance of the GUE Tracy-Widom law. Checked against simulated complex
/// Wishart matrices in `tests/tw2_oracle.rs`.
pub const TW2_VARIANCE: f64 = 0.8131947928;

/// Skewness of the GUE Tracy-Widom law.
pub const TW2_SKEWNESS: f64 = 0.2240842036;

/// Marchenko-Pastur parameters: aspect ratio `c = N/P` and noise variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MpParams {
    c: f64,
    sigma2: f64,
}

impl MpParams {
    pub fn new(c: f64, sigma2: f64) -> Result<Self> {
        check_aspect(c)?;
        if !(sigma2 > 0.0 && sigma2.is_finite()) {
            return Err(Error::Domain(format!(
                "noise variance must be > 0, got {sigma2}"
            )));
        }
        Ok(Self { c, sigma2 })
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }
}

fn check_aspect(c: f64) -> Result<()> {
    if c > 0.0 && c < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "aspect ratio c = N/P must lie in (0, 1), got {c}"
        )))
    }
}

/// Lower and upper edges of the Marchenko-Pastur support.
pub fn mp_edges(params: &MpParams) -> (f64, f64) {
    let r = params.c.sqrt();
    (
        params.sigma2 * (1.0 - r).powi(2),
        params.sigma2 * (1.0 + r).powi(2),
    )
}

/// Marchenko-Pastur density. Zero outside the support, including the edges.
pub fn mp_density(lambda: f64, params: &MpParams) -> f64 {
    let (lo, hi) = mp_edges(params);
    if !(lambda > lo && lambda < hi) {
        return 0.0;
    }
    ((hi - lambda) * (lambda - lo)).sqrt()
        / (2.0 * std::f64::consts::PI * params.c * params.sigma2 * lambda)
}

/// Population spike `1 + sqrt(c)` separating the edge-stuck regime from the
/// detached (Gaussian) regime of the largest sample eigenvalue.
pub fn bbp_threshold(c: f64) -> Result<f64> {
    check_aspect(c)?;
    Ok(1.0 + c.sqrt())
}

/// Spiked population model: one eigenvalue `ell1 >= 1`, the rest equal to 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpikedModelParams {
    ell1: f64,
    beta: f64,
    p: usize,
}

impl SpikedModelParams {
    pub fn new(ell1: f64, beta: f64, p: usize) -> Result<Self> {
        if !(ell1 >= 1.0 && ell1.is_finite()) {
            return Err(Error::Domain(format!("ell1 must be >= 1, got {ell1}")));
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::Domain(format!("beta must be > 0, got {beta}")));
        }
        if p < 2 {
            return Err(Error::Domain(format!(
                "packet count P must be >= 2, got {p}"
            )));
        }
        Ok(Self { ell1, beta, p })
    }

    /// Build from a spike strength `gamma = ell1 - 1`.
    pub fn from_gamma(gamma: f64, beta: f64, p: usize) -> Result<Self> {
        Self::new(1.0 + gamma, beta, p)
    }

    pub fn ell1(&self) -> f64 {
        self.ell1
    }

    pub fn gamma(&self) -> f64 {
        self.ell1 - 1.0
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn p(&self) -> usize {
        self.p
    }
}

/// Mean and variance of the detached largest eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpikeStats {
    pub mean: f64,
    pub variance: f64,
}

impl SpikeStats {
    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }
}

/// Gaussian law of the largest eigenvalue above the phase transition:
/// mean `(1+g)(1+c/g)` and variance `(1+g)^2 (1 - c/g^2) / (beta P)`.
///
/// Refuses `ell1 <= 1 + sqrt(c)`: below the transition the eigenvalue sticks
/// to the bulk edge and this law does not apply.
pub fn spike_stats(model: &SpikedModelParams, c: f64) -> Result<SpikeStats> {
    let edge = bbp_threshold(c)?;
    if model.ell1 <= edge {
        return Err(Error::Regime(format!(
            "ell1 = {} is not above the transition point 1 + sqrt(c) = {edge}",
            model.ell1
        )));
    }
    let g = model.gamma();
    let mean = (1.0 + g) * (1.0 + c / g);
    let variance = (1.0 + g).powi(2) * (1.0 - c / (g * g)) / (model.beta * model.p as f64);
    Ok(SpikeStats { mean, variance })
}

/// Gamma distribution shifted by a constant, used as a stand-in for the
/// Tracy-Widom law. Lives in standardized Tracy-Widom units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftedGamma {
    pub shape: f64,
    pub scale: f64,
    pub shift: f64,
}

impl ShiftedGamma {
    /// Match mean, variance and (positive) skewness.
    pub fn from_moments(mean: f64, variance: f64, skewness: f64) -> Result<Self> {
        if !(variance > 0.0 && skewness > 0.0) {
            return Err(Error::Domain(format!(
                "shifted gamma needs variance > 0 and skewness > 0, got {variance}, {skewness}"
            )));
        }
        let shape = (2.0 / skewness).powi(2);
        let scale = (variance / shape).sqrt();
        Ok(Self {
            shape,
            scale,
            shift: mean - shape * scale,
        })
    }

    /// Moment-matched approximation of the GUE Tracy-Widom law.
    pub fn tw2() -> Self {
        Self::from_moments(TW2_MEAN, TW2_VARIANCE, TW2_SKEWNESS)
            .expect("Tracy-Widom moments are valid")
    }

    fn gamma(&self) -> Gamma {
        Gamma::new(self.shape, 1.0 / self.scale).expect("validated gamma parameters")
    }

    pub fn mean(&self) -> f64 {
        self.shift + self.shape * self.scale
    }

    pub fn variance(&self) -> f64 {
        self.shape * self.scale * self.scale
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= self.shift {
            0.0
        } else {
            self.gamma().cdf(x - self.shift)
        }
    }

    pub fn quantile(&self, prob: f64) -> Result<f64> {
        if !(prob > 0.0 && prob < 1.0) {
            return Err(Error::Domain(format!(
                "quantile level must lie in (0, 1), got {prob}"
            )));
        }
        Ok(self.shift + self.gamma().inverse_cdf(prob))
    }
}

/// Tracy-Widom model of the largest noise-only eigenvalue at the bulk edge.
///
/// `lambda_max ~ center + scale * TW2`, with TW2 replaced by [`ShiftedGamma::tw2`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tw2EdgeModel {
    /// `(1 + sqrt(c))^2`.
    pub center: f64,
    /// Edge scale `(1+sqrt(c))^{4/3} / (P^{2/3} sqrt(c))`, quoted as the H0
    /// standard deviation of `lambda_max`.
    pub scale: f64,
    /// `center - |E_TW2| * scale`.
    pub mean: f64,
    pub gamma_shape: f64,
    pub gamma_scale: f64,
    pub gamma_shift: f64,
}

impl Tw2EdgeModel {
    fn law(&self) -> ShiftedGamma {
        ShiftedGamma {
            shape: self.gamma_shape,
            scale: self.gamma_scale,
            shift: self.gamma_shift,
        }
    }

    /// Value exceeded by `lambda_max` with probability `1 - prob`.
    pub fn quantile(&self, prob: f64) -> Result<f64> {
        Ok(self.center + self.scale * self.law().quantile(prob)?)
    }

    pub fn cdf(&self, lambda: f64) -> f64 {
        self.law().cdf((lambda - self.center) / self.scale)
    }
}

pub fn tw2_edge_model(c: f64, p: usize) -> Result<Tw2EdgeModel> {
    check_aspect(c)?;
    if p < 2 {
        return Err(Error::Domain(format!(
            "packet count P must be >= 2, got {p}"
        )));
    }
    let r = c.sqrt();
    let center = (1.0 + r).powi(2);
    let scale = (1.0 + r).powf(4.0 / 3.0) / ((p as f64).powf(2.0 / 3.0) * r);
    let law = ShiftedGamma::tw2();
    Ok(Tw2EdgeModel {
        center,
        scale,
        mean: center + TW2_MEAN * scale,
        gamma_shape: law.shape,
        gamma_scale: law.scale,
        gamma_shift: law.shift,
    })
}

/// Edge scale from the asymptotic centering/scaling theorem,
/// `(1+sqrt(c))^{4/3} c^{-1/6} P^{-2/3}`.
///
/// Differs from [`Tw2EdgeModel::scale`] by the factor `c^{1/3}`; thresholds
/// use the latter, this one is reported for diagnostics.
pub fn tw2_asymptotic_scale(c: f64, p: usize) -> Result<f64> {
    check_aspect(c)?;
    Ok((1.0 + c.sqrt()).powf(4.0 / 3.0) * c.powf(-1.0 / 6.0) * (p as f64).powf(-2.0 / 3.0))
}

/// A probability carried together with its complement.
///
/// Values close to 1 lose their low-order digits when stored as a single
/// `f64`; keeping both tails lets [`q_inv`] recover arguments far in either
/// tail of the normal distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prob {
    value: f64,
    complement: f64,
}

impl Prob {
    pub fn new(value: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::Domain(format!(
                "probability must lie in [0, 1], got {value}"
            )));
        }
        Ok(Self {
            value,
            complement: 1.0 - value,
        })
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn complement(&self) -> f64 {
        self.complement
    }
}

/// Upper tail of the standard normal distribution.
pub fn q_func(x: f64) -> Prob {
    let upper = 0.5 * erfc(x / std::f64::consts::SQRT_2);
    let lower = 0.5 * erfc(-x / std::f64::consts::SQRT_2);
    Prob {
        value: upper,
        complement: lower,
    }
}

/// Inverse of [`q_func`]. Solved by safeguarded Newton iteration on the
/// logarithm of whichever tail is smaller, to ~1e-14 relative.
pub fn q_inv(p: Prob) -> Result<f64> {
    if !(p.value > 0.0 && p.complement > 0.0) {
        return Err(Error::Domain(format!(
            "q_inv needs 0 < p < 1, got {}",
            p.value
        )));
    }
    if p.value == p.complement {
        return Ok(0.0);
    }
    if p.value < p.complement {
        Ok(upper_tail_inverse(p.value))
    } else {
        Ok(-upper_tail_inverse(p.complement))
    }
}

/// Convenience form of [`q_inv`] for plain `f64` probabilities.
pub fn q_inv_f64(p: f64) -> Result<f64> {
    q_inv(Prob::new(p)?)
}

// Solves Q(x) = p for p in (0, 0.5], x >= 0.
fn upper_tail_inverse(p: f64) -> f64 {
    let upper = |x: f64| 0.5 * erfc(x / std::f64::consts::SQRT_2);
    let target = p.ln();
    let (mut lo, mut hi) = (0.0_f64, 40.0_f64);
    // Tail asymptotics give a starting point good to a few percent.
    let t = (-2.0 * p.ln()).sqrt();
    let mut x = (t
        - (2.515517 + 0.802853 * t + 0.010328 * t * t)
            / (1.0 + 1.432788 * t + 0.189269 * t * t + 0.001308 * t * t * t))
        .clamp(lo, hi);
    for _ in 0..200 {
        let q = upper(x);
        let f = q.ln() - target;
        if f > 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let pdf = (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
        // d/dx ln Q(x) = -pdf / Q
        let mut next = x + f * q / pdf;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 1e-15 * x.abs().max(1.0) {
            return next;
        }
        x = next;
    }
    x
}

/// Population spike produced by a single-eigenvector signal: `1 + N * snr`.
pub fn snr_to_ell1(snr: f64, n: usize) -> f64 {
    1.0 + n as f64 * snr
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}
