//! Reference implementations shared by the integration tests. Deliberately
//! naive and independent of the library's numerical kernels.
#![allow(dead_code)]

use eigsense::cov::CMatrix;
use eigsense::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
        )
    })
}

pub fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let g = gaussian_matrix(n, n, rng);
    g.add(&g.conj_transpose()).unwrap().scale(0.5)
}

pub fn random_psd(n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let k = rng.random_range(1..=2 * n);
    let g = gaussian_matrix(n, k, rng);
    g.matmul(&g.conj_transpose()).unwrap().scale(1.0 / k as f64)
}

/// Householder reflector `I - 2 v v^H / |v|^2` for a random `v`.
pub fn random_unitary(n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let mut u = CMatrix::identity(n);
    for _ in 0..3 {
        let v = gaussian_matrix(n, 1, rng);
        let norm2: f64 = v.as_slice().iter().map(|z| z.norm_sqr()).sum();
        let h = CMatrix::from_fn(n, n, |i, j| {
            let delta = if i == j { 1.0 } else { 0.0 };
            Complex64::new(delta, 0.0) - v[(i, 0)] * v[(j, 0)].conj() * (2.0 / norm2)
        });
        u = u.matmul(&h).unwrap();
    }
    u
}

/// Eigenvalues of a Hermitian matrix by cyclic complex Jacobi rotations,
/// descending.
pub fn jacobi_eigenvalues(a: &CMatrix) -> Vec<f64> {
    let n = a.rows();
    let mut m = a.clone();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)].norm_sqr())
            .sum();
        let scale: f64 = m.frobenius_norm().powi(2).max(f64::MIN_POSITIVE);
        if off <= 1e-30 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                let r = apq.norm();
                if r == 0.0 {
                    continue;
                }
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                // Reduce to a real symmetric 2x2 problem with the phase of apq.
                let phase = apq / r;
                let theta = 0.5 * (2.0 * r).atan2(aqq - app);
                let (s, c) = theta.sin_cos();
                // Columns p, q: [c, s*phase; -s*conj(phase), c] applied on the right.
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = mkp * c - mkq * phase.conj() * s;
                    m[(k, q)] = mkp * phase * s + mkq * c;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = mpk * c - mqk * phase * s;
                    m[(q, k)] = mpk * phase.conj() * s + mqk * c;
                }
            }
        }
    }
    let mut v: Vec<f64> = (0..n).map(|i| m[(i, i)].re).collect();
    v.sort_by(|x, y| y.total_cmp(x));
    v
}

/// Determinant by cofactor expansion along the first row.
pub fn cofactor_det(a: &CMatrix) -> Complex64 {
    let n = a.rows();
    if n == 1 {
        return a[(0, 0)];
    }
    let mut sum = Complex64::new(0.0, 0.0);
    for j in 0..n {
        let minor = CMatrix::from_fn(n - 1, n - 1, |r, c| {
            a[(r + 1, if c < j { c } else { c + 1 })]
        });
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        sum += a[(0, j)] * cofactor_det(&minor) * sign;
    }
    sum
}

/// Roots of the characteristic polynomial of a 3x3 Hermitian matrix by the
/// trigonometric form of Cardano's formula, descending.
pub fn cardano_eigenvalues(a: &CMatrix) -> [f64; 3] {
    let tr = (0..3).map(|i| a[(i, i)].re).sum::<f64>();
    let minor = |i: usize, j: usize| (a[(i, i)] * a[(j, j)] - a[(i, j)] * a[(j, i)]).re;
    let c2 = minor(0, 1) + minor(0, 2) + minor(1, 2);
    let det = cofactor_det(a).re;
    // lambda^3 - tr lambda^2 + c2 lambda - det = 0; shift lambda = t + tr/3.
    let p = c2 - tr * tr / 3.0;
    let q = -2.0 * tr.powi(3) / 27.0 + tr * c2 / 3.0 - det;
    let mut roots = if p.abs() < 1e-300 {
        [(-q).cbrt(); 3]
    } else {
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
        let phi = arg.acos() / 3.0;
        [0, 1, 2].map(|k| m * (phi - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos())
    };
    for r in &mut roots {
        *r += tr / 3.0;
    }
    roots.sort_by(|x, y| y.total_cmp(x));
    roots
}

pub fn relative_residual(a: &CMatrix, values: &[f64], vectors: &CMatrix) -> f64 {
    let lambda = CMatrix::from_diagonal(values);
    let rebuilt = vectors
        .matmul(&lambda)
        .unwrap()
        .matmul(&vectors.conj_transpose())
        .unwrap();
    rebuilt.sub(a).unwrap().frobenius_norm() / a.frobenius_norm().max(f64::MIN_POSITIVE)
}

pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, v.sqrt())
}
