//! One-sided (Hestenes) Jacobi SVD, used for the top singular triples of
//! an observation matrix. Works directly on the data rather than on the
//! Gram matrix, so it is an independent route from the eigensolver.

use num_complex::Complex64;

use super::CMatrix;

/// One singular triple `x = sum sigma u v^H`. `u` has length N (rows),
/// `v` length P (columns). For `sigma == 0` the `v` vector is zero.
#[derive(Debug, Clone)]
pub struct SingularTriple {
    pub sigma: f64,
    pub u: Vec<Complex64>,
    pub v: Vec<Complex64>,
}

const MAX_SWEEPS: usize = 60;

/// Full thin SVD of an N x P matrix, triples in descending order.
pub(crate) fn jacobi_svd(x: &CMatrix) -> Vec<SingularTriple> {
    // Orthogonalise the columns of B = X^H (P x N); column j of B is the
    // conjugate of row j of X. Store columns contiguously.
    let n = x.rows();
    let p = x.cols();
    let mut cols: Vec<Vec<Complex64>> = (0..n)
        .map(|j| x.row(j).iter().map(|z| z.conj()).collect())
        .collect();
    let mut vmat: Vec<Vec<Complex64>> = (0..n)
        .map(|j| {
            let mut e = vec![Complex64::new(0.0, 0.0); n];
            e[j] = Complex64::new(1.0, 0.0);
            e
        })
        .collect();

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..n {
            for j in i + 1..n {
                let alpha: f64 = cols[i].iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = cols[j].iter().map(|z| z.norm_sqr()).sum();
                let gamma: Complex64 = cols[i]
                    .iter()
                    .zip(&cols[j])
                    .map(|(a, b)| a.conj() * b)
                    .sum();
                let g = gamma.norm();
                if g == 0.0 || g <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gamma.conj() / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut cols, i, j, phase, c, s);
                rotate(&mut vmat, i, j, phase, c, s);
            }
        }
        if !rotated {
            break;
        }
    }

    let mut triples: Vec<SingularTriple> = (0..n)
        .map(|j| {
            let sigma = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            let v = if sigma > 0.0 {
                cols[j].iter().map(|z| z / sigma).collect()
            } else {
                vec![Complex64::new(0.0, 0.0); p]
            };
            SingularTriple {
                sigma,
                u: vmat[j].clone(),
                v,
            }
        })
        .collect();
    triples.sort_by(|a, b| b.sigma.total_cmp(&a.sigma));
    triples
}

// Column j is first multiplied by `phase` so that <col_i, col_j> is real,
// then (i, j) receive a real plane rotation.
fn rotate(cols: &mut [Vec<Complex64>], i: usize, j: usize, phase: Complex64, c: f64, s: f64) {
    let (left, right) = cols.split_at_mut(j);
    let ci = &mut left[i];
    let cj = &mut right[0];
    for (a, b) in ci.iter_mut().zip(cj.iter_mut()) {
        let bj = *b * phase;
        let ai = *a;
        *a = ai * c - bj * s;
        *b = ai * s + bj * c;
    }
}
