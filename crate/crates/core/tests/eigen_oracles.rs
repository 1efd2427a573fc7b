mod common;

use common::*;
use eigsense::cov::{hermitian_eigen, sample_cov, svd_topk, CMatrix, SampleMatrix};
use eigsense::rmt::{mp_edges, MpParams};
use eigsense::Complex64;

#[test]
fn reconstruction_on_random_psd() {
    let mut r = rng(11);
    for trial in 0..100 {
        let n = 1 + trial % 64;
        let a = random_psd(n, &mut r);
        let e = hermitian_eigen(&a, true).unwrap();
        let v = e.vectors.unwrap();
        assert!(relative_residual(&a, &e.values, &v) <= 1e-10, "n = {n}");
        let gram = v.conj_transpose().matmul(&v).unwrap();
        assert!(gram.sub(&CMatrix::identity(n)).unwrap().frobenius_norm() < 1e-10);
        assert!(e
            .values
            .iter()
            .all(|&l| l > -1e-10 * e.values[0].abs().max(1.0)));
    }
}

#[test]
fn three_by_three_matches_cardano() {
    let mut r = rng(12);
    for _ in 0..200 {
        let a = random_hermitian(3, &mut r);
        let e = hermitian_eigen(&a, false).unwrap();
        let c = cardano_eigenvalues(&a);
        for (x, y) in e.values.iter().zip(c) {
            assert!((x - y).abs() < 1e-8, "{:?} vs {c:?}", e.values);
        }
    }
}

#[test]
fn eigenvalues_are_roots_of_the_characteristic_polynomial() {
    let mut r = rng(13);
    for n in 2..=5 {
        let a = random_hermitian(n, &mut r);
        let e = hermitian_eigen(&a, false).unwrap();
        let scale: f64 = e
            .values
            .iter()
            .map(|l| l.abs())
            .fold(1.0, f64::max)
            .powi(n as i32);
        for &l in &e.values {
            let shifted = a.sub(&CMatrix::identity(n).scale(l)).unwrap();
            assert!(cofactor_det(&shifted).norm() < 1e-9 * scale);
        }
        let prod: f64 = e.values.iter().product();
        assert!((cofactor_det(&a).re - prod).abs() < 1e-9 * scale);
    }
}

#[test]
fn agrees_with_jacobi_oracle() {
    let mut r = rng(14);
    for n in [1, 2, 5, 17, 40] {
        let a = random_hermitian(n, &mut r);
        let e = hermitian_eigen(&a, false).unwrap();
        let j = jacobi_eigenvalues(&a);
        for (x, y) in e.values.iter().zip(&j) {
            assert!((x - y).abs() < 1e-9 * (1.0 + y.abs()), "n = {n}");
        }
    }
}

#[test]
fn unitary_similarity_preserves_spectrum() {
    let mut r = rng(15);
    let a = random_hermitian(20, &mut r);
    let u = random_unitary(20, &mut r);
    let b = u.matmul(&a).unwrap().matmul(&u.conj_transpose()).unwrap();
    let b = b.add(&b.conj_transpose()).unwrap().scale(0.5);
    let ea = hermitian_eigen(&a, false).unwrap().values;
    let eb = hermitian_eigen(&b, false).unwrap().values;
    for (x, y) in ea.iter().zip(&eb) {
        assert!((x - y).abs() < 1e-10 * (1.0 + x.abs()));
    }
}

#[test]
fn weyl_inequalities() {
    let mut r = rng(16);
    let a = random_hermitian(12, &mut r);
    let b = random_hermitian(12, &mut r).scale(0.3);
    let ea = hermitian_eigen(&a, false).unwrap().values;
    let eb = hermitian_eigen(&b, false).unwrap().values;
    let es = hermitian_eigen(&a.add(&b).unwrap(), false).unwrap().values;
    for i in 0..12 {
        assert!(es[i] <= ea[i] + eb[0] + 1e-10);
        assert!(es[i] >= ea[i] + eb[11] - 1e-10);
    }
}

#[test]
fn trace_equals_eigenvalue_sum() {
    let mut r = rng(17);
    let a = random_psd(30, &mut r);
    let e = hermitian_eigen(&a, false).unwrap();
    assert!((a.trace().re - e.values.iter().sum::<f64>()).abs() < 1e-10 * a.trace().re);
}

#[test]
fn noise_spectrum_stays_near_the_bulk() {
    let mut r = rng(18);
    let (n, p) = (200, 500);
    let g = gaussian_matrix(n, p, &mut r).scale(std::f64::consts::FRAC_1_SQRT_2);
    let cov = sample_cov(&SampleMatrix::new(g).unwrap());
    let e = hermitian_eigen(cov.as_matrix(), false).unwrap().values;
    let (lo, hi) = mp_edges(&MpParams::new(0.4, 1.0).unwrap());
    assert!(e[0] < hi + 0.25 && e[0] > hi - 0.25);
    assert!(e[n - 1] > lo - 0.1 && e[n - 1] < lo + 0.1);
}

#[test]
fn svd_matches_eigen_of_gram() {
    let mut r = rng(19);
    for (n, p) in [(6, 9), (9, 6), (40, 100)] {
        let x = gaussian_matrix(n, p, &mut r);
        let k = n.min(p);
        let trip = svd_topk(&SampleMatrix::new(x.clone()).unwrap(), k).unwrap();
        let gram = x.matmul(&x.conj_transpose()).unwrap();
        let ev = jacobi_eigenvalues(&gram);
        for (t, l) in trip.iter().zip(&ev) {
            assert!((t.sigma * t.sigma - l).abs() < 1e-9 * (1.0 + l));
            // X v = sigma u
            let xv: Vec<Complex64> = (0..n)
                .map(|i| (0..p).map(|j| x[(i, j)] * t.v[j]).sum())
                .collect();
            for (a, b) in xv.iter().zip(&t.u) {
                assert!((a - b * t.sigma).norm() < 1e-9 * (1.0 + t.sigma));
            }
        }
    }
}
