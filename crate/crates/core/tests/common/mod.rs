//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Coefficients `c[0..=p]` of `det(x I - A)`, highest degree first, by the
/// Faddeev–LeVerrier recursion.
pub fn char_poly(a: &DMatrix<f64>) -> Vec<f64> {
    let p = a.nrows();
    let mut c = vec![1.0];
    let mut m = DMatrix::<f64>::zeros(p, p);
    for k in 1..=p {
        m = a * &m + DMatrix::identity(p, p) * c[k - 1];
        let am = a * &m;
        c.push(-am.trace() / k as f64);
    }
    c
}

fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().fold(0.0, |acc, &v| acc * x + v)
}

/// Real roots of a polynomial with only real roots inside `[-bound, bound]`,
/// by sign-change scanning and bisection.
pub fn real_roots(c: &[f64], bound: f64) -> Vec<f64> {
    let steps = 200_000;
    let h = 2.0 * bound / steps as f64;
    let mut roots = Vec::new();
    let mut x0 = -bound;
    let mut f0 = horner(c, x0);
    for i in 1..=steps {
        let x1 = -bound + i as f64 * h;
        let f1 = horner(c, x1);
        if f0 == 0.0 {
            roots.push(x0);
        } else if f0 * f1 < 0.0 {
            let (mut lo, mut hi) = (x0, x1);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if horner(c, lo) * horner(c, mid) <= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        x0 = x1;
        f0 = f1;
    }
    roots
}

/// Random symmetric matrix with entries in `[-1, 1]`.
pub fn random_symmetric(p: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(p, p);
    for i in 0..p {
        for k in 0..=i {
            let v = rng.random_range(-1.0..1.0);
            a[(i, k)] = v;
            a[(k, i)] = v;
        }
    }
    a
}

/// `sum_k d_k d_k^T / n` from explicit per-column vectors.
pub fn outer_product_mean(rows: &[Vec<f64>]) -> DMatrix<f64> {
    let p = rows.len();
    let n = rows[0].len();
    let mut w = DMatrix::zeros(p, p);
    for k in 0..n {
        for i in 0..p {
            for l in 0..p {
                w[(i, l)] += rows[i][k] * rows[l][k];
            }
        }
    }
    w / n as f64
}

/// `D(k) = sum_m g[m] y[2^j k + m]` for every `k` with a full window.
pub fn direct_details(y: &[f64], g: &[f64], j: u32) -> Vec<f64> {
    let stride = 1usize << j;
    let mut out = Vec::new();
    let mut k = 0;
    while stride * k + g.len() <= y.len() {
        out.push(g.iter().enumerate().map(|(m, gm)| gm * y[stride * k + m]).sum());
        k += 1;
    }
    out
}

/// Spectra following `lambda_{p-r+q}(2^j) = c_q 2^{j (2 h_q + 1)}` exactly,
/// with unit non-signal eigenvalues.
pub fn power_law_spectra(
    h: &[f64],
    consts: &[f64],
    p: usize,
    j1: u32,
    j2: u32,
) -> Vec<wavelet_eigen::WaveletSpectrum> {
    (j1..=j2)
        .map(|j| {
            let mut ev = vec![1.0; p - h.len()];
            ev.extend(h.iter().zip(consts).map(|(hq, c)| c * (j as f64 * (2.0 * hq + 1.0)).exp2()));
            wavelet_eigen::WaveletSpectrum::from_eigenvalues(j, 1000, ev)
        })
        .collect()
}

/// Random weights over `j1..=j2` with `sum w = 0` and `sum j w = 1`.
pub fn random_admissible_weights(j1: u32, j2: u32, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let m = (j2 - j1 + 1) as usize;
    let js: Vec<f64> = (j1..=j2).map(f64::from).collect();
    let mut w: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
    // Project onto sum w = 0, then rescale so that sum j w = 1.
    let mean = w.iter().sum::<f64>() / m as f64;
    w.iter_mut().for_each(|v| *v -= mean);
    let mut s: f64 = w.iter().zip(&js).map(|(a, b)| a * b).sum();
    if s.abs() < 1e-3 {
        let jm = js.iter().sum::<f64>() / m as f64;
        w.iter_mut().zip(&js).for_each(|(v, j)| *v += j - jm);
        s = w.iter().zip(&js).map(|(a, b)| a * b).sum();
    }
    w.iter_mut().for_each(|v| *v /= s);
    w
}
