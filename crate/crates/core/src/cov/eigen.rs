//! Hermitian eigensolver: Householder reduction to real symmetric
//! tridiagonal form followed by implicit QL with Wilkinson-type shifts.

use num_complex::Complex64;

use super::CMatrix;
use crate::{Error, Result};

/// Relative Hermitian defect tolerated on input.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Eigenvalues in descending order, optionally with unit eigenvectors
/// (column `j` of `vectors` belongs to `values[j]`).
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: Option<CMatrix>,
}

pub fn hermitian_eigen(a: &CMatrix, want_vectors: bool) -> Result<HermitianEigen> {
    let defect = a.hermitian_defect();
    if defect > HERMITIAN_TOL {
        return Err(Error::Shape(format!(
            "matrix is not Hermitian (relative defect {defect:.3e})"
        )));
    }
    let n = a.rows();
    if n == 0 {
        return Ok(HermitianEigen {
            values: vec![],
            vectors: want_vectors.then(|| CMatrix::zeros(0, 0)),
        });
    }
    let mut work = a.clone();
    let mut q = want_vectors.then(|| CMatrix::identity(n));
    let (mut d, mut e, phases) = tridiagonalize(&mut work, q.as_mut());
    let mut z = want_vectors.then(|| {
        let mut z = vec![0.0; n * n];
        for i in 0..n {
            z[i * n + i] = 1.0;
        }
        z
    });
    tql(&mut d, &mut e, z.as_deref_mut())?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[j].total_cmp(&d[i]));
    let values = order.iter().map(|&i| d[i]).collect();

    let vectors = match (q, z) {
        (Some(q), Some(z)) => {
            // V = Q diag(phases) Z, columns permuted to descending order.
            let mut v = CMatrix::zeros(n, n);
            for r in 0..n {
                for (col, &src) in order.iter().enumerate() {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for k in 0..n {
                        acc += q[(r, k)] * phases[k] * z[k * n + src];
                    }
                    v[(r, col)] = acc;
                }
            }
            Some(v)
        }
        _ => None,
    };
    Ok(HermitianEigen { values, vectors })
}

/// Reduce `a` in place. Returns the real diagonal, the real non-negative
/// off-diagonal (padded with a trailing zero) and the diagonal phases that
/// make the complex off-diagonal real. When `q` is given it receives the
/// accumulated unitary transform so that `a = Q D T D^H Q^H`.
fn tridiagonalize(
    a: &mut CMatrix,
    mut q: Option<&mut CMatrix>,
) -> (Vec<f64>, Vec<f64>, Vec<Complex64>) {
    let n = a.rows();
    let zero = Complex64::new(0.0, 0.0);
    let mut v = vec![zero; n];
    let mut p = vec![zero; n];

    for k in 0..n.saturating_sub(2) {
        let m = n - k - 1;
        let norm = (k + 1..n).map(|i| a[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let x0 = a[(k + 1, k)];
        let phase = if x0.norm() > 0.0 {
            x0 / x0.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        let alpha = -phase * norm;

        // v = x - alpha e1, normalised; H = I - 2 v v^H maps x to alpha e1.
        for (t, i) in (k + 1..n).enumerate() {
            v[t] = a[(i, k)];
        }
        v[0] -= alpha;
        let vnorm = v[..m].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in &mut v[..m] {
            *z /= vnorm;
        }

        // p = B v on the trailing block B = a[k+1.., k+1..].
        for (t, i) in (k + 1..n).enumerate() {
            let row = &a.row(i)[k + 1..];
            p[t] = row.iter().zip(&v[..m]).map(|(b, vv)| b * vv).sum();
        }
        let kappa: f64 = v[..m]
            .iter()
            .zip(&p[..m])
            .map(|(vv, pp)| (vv.conj() * pp).re)
            .sum();
        for t in 0..m {
            p[t] -= v[t] * kappa;
        }
        // B <- B - 2 (v w^H + w v^H), w = p - kappa v
        for (t, i) in (k + 1..n).enumerate() {
            let vt = v[t];
            let wt = p[t];
            for (s, j) in (k + 1..n).enumerate() {
                a[(i, j)] -= (vt * p[s].conj() + wt * v[s].conj()) * 2.0;
            }
        }
        a[(k + 1, k)] = alpha;
        a[(k, k + 1)] = alpha.conj();
        for i in k + 2..n {
            a[(i, k)] = zero;
            a[(k, i)] = zero;
        }

        if let Some(q) = q.as_deref_mut() {
            // Q <- Q H on columns k+1..n
            for r in 0..n {
                let s: Complex64 = (k + 1..n).zip(&v[..m]).map(|(j, vv)| q[(r, j)] * vv).sum();
                for (t, j) in (k + 1..n).enumerate() {
                    q[(r, j)] -= s * v[t].conj() * 2.0;
                }
            }
        }
    }

    let d: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    let mut e = vec![0.0; n];
    let mut phases = vec![Complex64::new(1.0, 0.0); n];
    for k in 0..n.saturating_sub(1) {
        let t = a[(k + 1, k)];
        let mag = t.norm();
        e[k] = mag;
        phases[k + 1] = if mag > 0.0 {
            phases[k] * t / mag
        } else {
            phases[k]
        };
    }
    (d, e, phases)
}

/// Implicit QL on a symmetric tridiagonal matrix (`d` diagonal, `e[i]`
/// coupling `i` and `i+1`). Optionally rotates the row-major `z` in step.
fn tql(d: &mut [f64], e: &mut [f64], mut z: Option<&mut [f64]>) -> Result<()> {
    let n = d.len();
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::Degenerate("QL iteration failed to converge".into()));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = z.as_deref_mut() {
                    for k in 0..n {
                        let f = z[k * n + i + 1];
                        z[k * n + i + 1] = s * z[k * n + i] + c * f;
                        z[k * n + i] = c * z[k * n + i] - s * f;
                    }
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}
