//! Observation matrix, sample covariance and spectral kernels.

mod eigen;
mod matrix;
mod svd;

use num_complex::Complex64;

pub use eigen::{hermitian_eigen, HermitianEigen, HERMITIAN_TOL};
pub use matrix::CMatrix;
pub use svd::SingularTriple;

use crate::synth::IqBuffer;
use crate::{Error, Result};

/// N x P observation matrix: column `p` is the `p`-th packet of N
/// consecutive samples.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMatrix(CMatrix);

impl SampleMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.rows() < 2 || m.cols() < 2 {
            return Err(Error::Shape(format!(
                "sample matrix needs N >= 2 and P >= 2, got {}x{}",
                m.rows(),
                m.cols()
            )));
        }
        Ok(Self(m))
    }

    /// Packet length.
    pub fn n(&self) -> usize {
        self.0.rows()
    }

    /// Packet count.
    pub fn p(&self) -> usize {
        self.0.cols()
    }

    pub fn c(&self) -> f64 {
        self.n() as f64 / self.p() as f64
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn add(&self, other: &SampleMatrix) -> Result<SampleMatrix> {
        Ok(SampleMatrix(self.0.add(&other.0)?))
    }

    pub fn scale(&self, k: f64) -> SampleMatrix {
        SampleMatrix(self.0.scale(k))
    }

    /// Mean-square entry magnitude.
    pub fn mean_square(&self) -> f64 {
        let m = self.0.frobenius_norm();
        m * m / (self.n() * self.p()) as f64
    }
}

/// Hermitian N x N covariance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CovMatrix(CMatrix);

impl CovMatrix {
    /// Accepts any matrix that is Hermitian to [`HERMITIAN_TOL`] relative.
    pub fn new(m: CMatrix) -> Result<Self> {
        let defect = m.hermitian_defect();
        if defect > HERMITIAN_TOL {
            return Err(Error::Shape(format!(
                "covariance must be Hermitian (relative defect {defect:.3e})"
            )));
        }
        Ok(Self(m))
    }

    pub fn n(&self) -> usize {
        self.0.rows()
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }
}

/// Real eigenvalues in descending order.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSpectrum {
    values: Vec<f64>,
}

impl EigenSpectrum {
    pub fn new(mut values: Vec<f64>) -> Self {
        values.sort_by(|a, b| b.total_cmp(a));
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max(&self) -> f64 {
        self.values[0]
    }

    pub fn min(&self) -> f64 {
        *self.values.last().expect("non-empty spectrum")
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Split a sample stream into P packets of N samples; the tail beyond N*P is
/// dropped.
pub fn packetize(buffer: &IqBuffer, n: usize, p: usize) -> Result<SampleMatrix> {
    let samples = buffer.samples();
    if samples.len() < n * p {
        return Err(Error::Shape(format!(
            "need {} samples for N={n}, P={p}, buffer holds {}",
            n * p,
            samples.len()
        )));
    }
    let m = CMatrix::from_fn(n, p, |i, col| samples[col * n + i]);
    SampleMatrix::new(m)
}

/// `X X^H / P`.
pub fn sample_cov(x: &SampleMatrix) -> CovMatrix {
    let m = x.as_matrix();
    let n = x.n();
    let inv_p = 1.0 / x.p() as f64;
    let mut r = CMatrix::zeros(n, n);
    for i in 0..n {
        let ri = m.row(i);
        for j in 0..=i {
            let rj = m.row(j);
            let mut acc = Complex64::new(0.0, 0.0);
            for (a, b) in ri.iter().zip(rj) {
                acc += a * b.conj();
            }
            acc *= inv_p;
            if i == j {
                acc.im = 0.0;
            }
            r[(i, j)] = acc;
            r[(j, i)] = acc.conj();
        }
    }
    CovMatrix(r)
}

pub fn eig_hermitian(r: &CovMatrix) -> EigenSpectrum {
    let e = hermitian_eigen(r.as_matrix(), false).expect("CovMatrix is Hermitian by construction");
    EigenSpectrum { values: e.values }
}

/// Eigenvalues together with the unitary matrix of eigenvectors (columns).
pub fn eig_hermitian_vectors(r: &CovMatrix) -> (EigenSpectrum, CMatrix) {
    let e = hermitian_eigen(r.as_matrix(), true).expect("CovMatrix is Hermitian by construction");
    (
        EigenSpectrum { values: e.values },
        e.vectors.expect("vectors were requested"),
    )
}

/// `Tr(R) / N`.
pub fn trace_stat(r: &CovMatrix) -> f64 {
    r.trace() / r.n() as f64
}

/// Top `k` singular triples of the observation matrix.
pub fn svd_topk(x: &SampleMatrix, k: usize) -> Result<Vec<SingularTriple>> {
    let full = x.n().min(x.p());
    if k == 0 || k > full {
        return Err(Error::Domain(format!("k must lie in 1..={full}, got {k}")));
    }
    let m = x.as_matrix();
    let mut triples = if x.n() <= x.p() {
        svd::jacobi_svd(m)
    } else {
        // Work on the wide orientation and swap the roles of u and v.
        svd::jacobi_svd(&m.conj_transpose())
            .into_iter()
            .map(|t| SingularTriple {
                sigma: t.sigma,
                u: t.v,
                v: t.u,
            })
            .collect()
    };
    triples.truncate(k);
    Ok(triples)
}
