//! Seeded complex-baseband generators.
//!
//! Every generator draws from its own ChaCha8 stream seeded by the `seed`
//! argument, so identical arguments give bit-identical buffers on any
//! thread.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::cov::{svd_topk, CMatrix, SampleMatrix};
use crate::{Error, Result};

/// Finite run of complex samples at a fixed sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct IqBuffer {
    samples: Vec<Complex64>,
    sample_rate: f64,
}

impl IqBuffer {
    pub fn new(samples: Vec<Complex64>, sample_rate: f64) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Shape("IQ buffer must not be empty".into()));
        }
        if !(sample_rate > 0.0 && sample_rate.is_finite()) {
            return Err(Error::Domain(format!(
                "sample rate must be > 0, got {sample_rate}"
            )));
        }
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn mean_square(&self) -> f64 {
        self.samples.iter().map(|z| z.norm_sqr()).sum::<f64>() / self.samples.len() as f64
    }

    fn check_compatible(&self, other: &IqBuffer) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::Shape(format!(
                "buffer lengths differ: {} vs {}",
                self.len(),
                other.len()
            )));
        }
        if self.sample_rate != other.sample_rate {
            return Err(Error::Shape(format!(
                "sample rates differ: {} vs {}",
                self.sample_rate, other.sample_rate
            )));
        }
        Ok(())
    }
}

pub(crate) fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::Shape("sample count must be >= 1".into()))
    } else {
        Ok(())
    }
}

fn complex_normal(rng: &mut ChaCha8Rng, std_per_axis: f64) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * std_per_axis, im * std_per_axis)
}

// exp(i 2 pi f k / fs) with the cycle count reduced before scaling by 2 pi.
fn phasor(cycles: f64) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * cycles.fract())
}

/// Circular complex white Gaussian noise with total variance `sigma2`.
pub fn gen_cwgn(n: usize, sigma2: f64, seed: u64, sample_rate: f64) -> Result<IqBuffer> {
    check_n(n)?;
    if !(sigma2 >= 0.0 && sigma2.is_finite()) {
        return Err(Error::Domain(format!(
            "noise variance must be >= 0, got {sigma2}"
        )));
    }
    let mut rng = rng_from_seed(seed);
    let s = (sigma2 / 2.0).sqrt();
    let samples = (0..n).map(|_| complex_normal(&mut rng, s)).collect();
    IqBuffer::new(samples, sample_rate)
}

/// Rectangular-pulse BPSK on a complex carrier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BpskSpec {
    pub bit_rate: f64,
    pub carrier_freq: f64,
    pub sample_rate: f64,
    pub power: f64,
}

impl BpskSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.bit_rate > 0.0
            && self.sample_rate >= self.bit_rate
            && self.sample_rate.is_finite())
        {
            return Err(Error::Domain(format!(
                "BPSK needs 0 < bit_rate <= sample_rate, got {} and {}",
                self.bit_rate, self.sample_rate
            )));
        }
        if !(self.power > 0.0 && self.power.is_finite()) {
            return Err(Error::Domain(format!(
                "BPSK power must be > 0, got {}",
                self.power
            )));
        }
        if !self.carrier_freq.is_finite() {
            return Err(Error::Domain("carrier frequency must be finite".into()));
        }
        Ok(())
    }
}

/// Random +-1 bits at `bit_rate`, held for a whole bit interval, times a
/// zero-phase carrier at `carrier_freq`. Constant modulus `sqrt(power)`.
pub fn gen_bpsk(spec: &BpskSpec, n: usize, seed: u64) -> Result<IqBuffer> {
    check_n(n)?;
    spec.validate()?;
    let mut rng = rng_from_seed(seed);
    let amp = spec.power.sqrt();
    let mut bit_index = u64::MAX;
    let mut symbol = 1.0;
    let samples = (0..n)
        .map(|k| {
            let b = (k as f64 * spec.bit_rate / spec.sample_rate).floor() as u64;
            if b != bit_index {
                bit_index = b;
                symbol = if rng.random::<bool>() { 1.0 } else { -1.0 };
            }
            phasor(spec.carrier_freq * k as f64 / spec.sample_rate) * (amp * symbol)
        })
        .collect();
    IqBuffer::new(samples, spec.sample_rate)
}

/// Continuous carrier with a random initial phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToneSpec {
    pub freq: f64,
    pub power: f64,
    pub phase_seed: u64,
}

pub fn gen_tone(spec: &ToneSpec, n: usize, sample_rate: f64) -> Result<IqBuffer> {
    check_n(n)?;
    if !(spec.power >= 0.0 && spec.power.is_finite()) {
        return Err(Error::Domain(format!(
            "tone power must be >= 0, got {}",
            spec.power
        )));
    }
    let mut rng = rng_from_seed(spec.phase_seed);
    let phase0: f64 = rng.random::<f64>();
    let amp = spec.power.sqrt();
    let samples = (0..n)
        .map(|k| phasor(spec.freq * k as f64 / sample_rate + phase0) * amp)
        .collect();
    IqBuffer::new(samples, sample_rate)
}

/// Carrier whose complex envelope is redrawn (circular Gaussian, mean
/// power `power`) every `block_len` samples.
///
/// With `block_len` equal to the packet length and a carrier whose phase
/// advance per packet is an integer number of cycles, the packetized
/// population covariance is exactly `I + N * power * u u^H`: a single
/// Gaussian spike.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpikeSpec {
    pub freq: f64,
    pub power: f64,
    pub block_len: usize,
}

pub fn gen_spike(spec: &SpikeSpec, n: usize, sample_rate: f64, seed: u64) -> Result<IqBuffer> {
    check_n(n)?;
    if spec.block_len == 0 {
        return Err(Error::Domain("spike block length must be >= 1".into()));
    }
    if !(spec.power >= 0.0 && spec.power.is_finite()) {
        return Err(Error::Domain(format!(
            "spike power must be >= 0, got {}",
            spec.power
        )));
    }
    let mut rng = rng_from_seed(seed);
    let s = (spec.power / 2.0).sqrt();
    let mut envelope = Complex64::new(0.0, 0.0);
    let samples = (0..n)
        .map(|k| {
            if k % spec.block_len == 0 {
                envelope = complex_normal(&mut rng, s);
            }
            envelope * phasor(spec.freq * k as f64 / sample_rate)
        })
        .collect();
    IqBuffer::new(samples, sample_rate)
}

/// Multi-component surrogate for a wideband signal.
///
/// Component `m` is white Gaussian noise smoothed by a `filter_length`-tap
/// moving average and shifted to normalized frequency `(m + 1/2)/M - 1/2`,
/// so the components occupy disjoint parts of the band.
#[derive(Debug, Clone, PartialEq)]
pub struct WidebandSpec {
    pub num_components: usize,
    pub component_powers: Vec<f64>,
    pub filter_length: usize,
}

impl WidebandSpec {
    pub fn equal_powers(num_components: usize, total_power: f64, filter_length: usize) -> Self {
        Self {
            num_components,
            component_powers: vec![total_power / num_components as f64; num_components],
            filter_length,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_components == 0 || self.component_powers.len() != self.num_components {
            return Err(Error::Domain(format!(
                "wideband spec needs >= 1 component and one power per component, got {} and {}",
                self.num_components,
                self.component_powers.len()
            )));
        }
        if self
            .component_powers
            .iter()
            .any(|p| !(*p >= 0.0 && p.is_finite()))
        {
            return Err(Error::Domain("component powers must be >= 0".into()));
        }
        if self.filter_length == 0 {
            return Err(Error::Domain("filter length must be >= 1".into()));
        }
        Ok(())
    }

    pub fn total_power(&self) -> f64 {
        self.component_powers.iter().sum()
    }
}

pub fn gen_wideband(
    spec: &WidebandSpec,
    n: usize,
    seed: u64,
    sample_rate: f64,
) -> Result<IqBuffer> {
    check_n(n)?;
    spec.validate()?;
    let mut rng = rng_from_seed(seed);
    let m_total = spec.num_components as f64;
    let len = spec.filter_length;
    let tap = 1.0 / (len as f64).sqrt();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for (m, &power) in spec.component_powers.iter().enumerate() {
        let freq = (m as f64 + 0.5) / m_total - 0.5;
        let phase0: f64 = rng.random::<f64>();
        let white: Vec<Complex64> = (0..n + len - 1)
            .map(|_| complex_normal(&mut rng, std::f64::consts::FRAC_1_SQRT_2))
            .collect();
        let amp = power.sqrt() * tap;
        let mut window: Complex64 = white[..len].iter().sum();
        for k in 0..n {
            if k > 0 {
                window += white[k + len - 1] - white[k - 1];
            }
            out[k] += window * amp * phasor(freq * k as f64 + phase0);
        }
    }
    IqBuffer::new(out, sample_rate)
}

/// Gain `alpha` such that `alpha * signal` has `snr` times the measured
/// mean-square power of `noise`.
pub fn mix_gain(signal: &IqBuffer, noise: &IqBuffer, snr: f64) -> Result<f64> {
    signal.check_compatible(noise)?;
    if !(snr >= 0.0 && snr.is_finite()) {
        return Err(Error::Domain(format!("snr must be >= 0, got {snr}")));
    }
    if snr == 0.0 {
        return Ok(0.0);
    }
    let ps = signal.mean_square();
    if ps == 0.0 {
        return Err(Error::Degenerate(
            "cannot scale an all-zero signal to a positive SNR".into(),
        ));
    }
    Ok((snr * noise.mean_square() / ps).sqrt())
}

/// `alpha * signal + noise` with `alpha` from [`mix_gain`].
pub fn mix(signal: &IqBuffer, noise: &IqBuffer, snr: f64) -> Result<IqBuffer> {
    let gain = mix_gain(signal, noise, snr)?;
    superpose(signal, noise, gain)
}

/// `gain * signal + noise` for a caller-chosen amplitude gain.
pub fn superpose(signal: &IqBuffer, noise: &IqBuffer, gain: f64) -> Result<IqBuffer> {
    signal.check_compatible(noise)?;
    let samples = signal
        .samples
        .iter()
        .zip(&noise.samples)
        .map(|(s, e)| s * gain + e)
        .collect();
    IqBuffer::new(samples, noise.sample_rate)
}

/// Auxiliary power `sigma2 (sqrt(c) + delta_ell) / N`, which puts the
/// noise-plus-auxiliary spike at `1 + sqrt(c) + delta_ell`.
pub fn aux_power_rule(c: f64, delta_ell: f64, sigma2: f64, n: usize) -> Result<f64> {
    if !(delta_ell > 0.0 && delta_ell.is_finite()) {
        return Err(Error::Domain(format!(
            "delta_ell must be > 0, got {delta_ell}"
        )));
    }
    if !(c > 0.0 && c < 1.0) {
        return Err(Error::Domain(format!(
            "aspect ratio must lie in (0, 1), got {c}"
        )));
    }
    if n == 0 {
        return Err(Error::Domain("packet length must be >= 1".into()));
    }
    Ok(sigma2 * (c.sqrt() + delta_ell) / n as f64)
}

/// Rank-one reconstruction `u1 v1^H` from the top singular triple of a clean
/// signal matrix, normalized to unit mean-square entry magnitude.
pub fn aux_from_svd(clean: &SampleMatrix) -> Result<SampleMatrix> {
    let top = svd_topk(clean, 1)?.remove(0);
    if top.sigma <= 0.0 || !top.sigma.is_finite() {
        return Err(Error::Degenerate(
            "clean signal matrix has rank zero".into(),
        ));
    }
    let k = ((clean.n() * clean.p()) as f64).sqrt();
    let m = CMatrix::from_fn(clean.n(), clean.p(), |i, j| top.u[i] * top.v[j].conj() * k);
    SampleMatrix::new(m)
}
