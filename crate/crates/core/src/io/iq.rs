//! Raw I/Q files: little-endian interleaved `f32` pairs plus a sidecar text
//! header at `<path>.hdr` holding `sample_rate` and `length`.

use std::fs;
use std::path::{Path, PathBuf};

use crate::synth::IqBuffer;
use crate::{Complex64, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IqHeader {
    pub sample_rate: f64,
    pub length: usize,
}

pub fn header_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".hdr");
    PathBuf::from(s)
}

pub fn format_iq_header(h: &IqHeader) -> String {
    format!("sample_rate={}\nlength={}\n", h.sample_rate, h.length)
}

pub fn parse_iq_header(text: &str) -> Result<IqHeader> {
    let mut sample_rate = None;
    let mut length = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Format(format!("header line {}: expected key=value", i + 1)))?;
        let (k, v) = (k.trim(), v.trim());
        let slot_err = || Error::Format(format!("header line {}: bad value for `{k}`", i + 1));
        match k {
            "sample_rate" if sample_rate.is_none() => {
                let r: f64 = v.parse().map_err(|_| slot_err())?;
                if !(r > 0.0 && r.is_finite()) {
                    return Err(slot_err());
                }
                sample_rate = Some(r);
            }
            "length" if length.is_none() => {
                length = Some(v.parse::<usize>().map_err(|_| slot_err())?)
            }
            "sample_rate" | "length" => {
                return Err(Error::Format(format!(
                    "header line {}: duplicate `{k}`",
                    i + 1
                )))
            }
            _ => {
                return Err(Error::Format(format!(
                    "header line {}: unknown key `{k}`",
                    i + 1
                )))
            }
        }
    }
    match (sample_rate, length) {
        (Some(sample_rate), Some(length)) if length > 0 => Ok(IqHeader {
            sample_rate,
            length,
        }),
        (Some(_), Some(_)) => Err(Error::Format("header length must be >= 1".into())),
        _ => Err(Error::Format(
            "header needs both sample_rate and length".into(),
        )),
    }
}

pub fn encode_iq_samples(samples: &[Complex64]) -> Vec<u8> {
    let mut out = Vec::with_capacity(samples.len() * 8);
    for z in samples {
        out.extend_from_slice(&(z.re as f32).to_le_bytes());
        out.extend_from_slice(&(z.im as f32).to_le_bytes());
    }
    out
}

pub fn decode_iq_samples(bytes: &[u8], header: &IqHeader) -> Result<Vec<Complex64>> {
    let expected = header
        .length
        .checked_mul(8)
        .ok_or_else(|| Error::Format("header length overflows".into()))?;
    if bytes.len() != expected {
        return Err(Error::Format(format!(
            "sample file holds {} bytes, header promises {} samples ({expected} bytes)",
            bytes.len(),
            header.length
        )));
    }
    bytes
        .chunks_exact(8)
        .enumerate()
        .map(|(i, c)| {
            let re = f32::from_le_bytes([c[0], c[1], c[2], c[3]]);
            let im = f32::from_le_bytes([c[4], c[5], c[6], c[7]]);
            if re.is_finite() && im.is_finite() {
                Ok(Complex64::new(re.into(), im.into()))
            } else {
                Err(Error::Format(format!("sample {i} is not finite")))
            }
        })
        .collect()
}

pub fn write_iq(path: &Path, buffer: &IqBuffer) -> Result<()> {
    fs::write(path, encode_iq_samples(buffer.samples()))?;
    let header = IqHeader {
        sample_rate: buffer.sample_rate(),
        length: buffer.len(),
    };
    fs::write(header_path(path), format_iq_header(&header))?;
    Ok(())
}

pub fn read_iq(path: &Path) -> Result<IqBuffer> {
    let header = parse_iq_header(&fs::read_to_string(header_path(path))?)?;
    let samples = decode_iq_samples(&fs::read(path)?, &header)?;
    IqBuffer::new(samples, header.sample_rate)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_round_trip_and_errors() {
        let h = IqHeader {
            sample_rate: 10e6,
            length: 4000,
        };
        assert_eq!(parse_iq_header(&format_iq_header(&h)).unwrap(), h);
        assert!(parse_iq_header("sample_rate=1\n").is_err());
        assert!(parse_iq_header("sample_rate=-1\nlength=3\n").is_err());
        assert!(parse_iq_header("sample_rate=1\nlength=0\n").is_err());
        assert!(parse_iq_header("sample_rate=1\nlength=3\nextra=1\n").is_err());
    }

    #[test]
    fn samples_round_trip_at_f32_precision() {
        let s = vec![Complex64::new(0.5, -1.25), Complex64::new(3.0, 1e-3)];
        let h = IqHeader {
            sample_rate: 1.0,
            length: 2,
        };
        let back = decode_iq_samples(&encode_iq_samples(&s), &h).unwrap();
        assert_eq!(back[0], s[0]);
        assert!((back[1].im - 1e-3).abs() < 1e-10);
        assert!(decode_iq_samples(&[0u8; 15], &h).is_err());
    }
}
