//! Orthonormal Daubechies filter pairs.
//!
//! Coefficients are generated by spectral factorization of the Daubechies
//! polynomial rather than read from tables, and every pair can be checked
//! against the discrete admissibility conditions with [`validate_filter`].

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly;
use crate::tolerance;

pub const MAX_ORDER: usize = 10;

/// Low-pass `u_k` and high-pass `v_k` taps of an orthonormal MRA.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FilterPair {
    pub n_vanishing: usize,
    pub low_pass: Vec<f64>,
    pub high_pass: Vec<f64>,
}

impl FilterPair {
    /// Build a pair from a low-pass filter; the high-pass filter is its
    /// quadrature mirror `v_k = (-1)^k u_{T-1-k}`.
    pub fn from_low_pass(n_vanishing: usize, low_pass: Vec<f64>) -> Self {
        let t = low_pass.len();
        let high_pass = (0..t)
            .map(|k| if k % 2 == 0 { low_pass[t - 1 - k] } else { -low_pass[t - 1 - k] })
            .collect();
        FilterPair { n_vanishing, low_pass, high_pass }
    }

    /// Number of taps `T`.
    pub fn support_length(&self) -> usize {
        self.low_pass.len()
    }

    pub fn haar() -> Self {
        Self::from_low_pass(1, vec![std::f64::consts::FRAC_1_SQRT_2; 2])
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// The extremal-phase Daubechies pair with `n_vanishing` vanishing moments
/// and `2 * n_vanishing` taps.
pub fn daubechies_filters(n_vanishing: usize) -> Result<FilterPair> {
    if n_vanishing == 0 || n_vanishing > MAX_ORDER {
        return Err(Error::UnsupportedFilterOrder(n_vanishing));
    }
    if n_vanishing == 1 {
        return Ok(FilterPair::haar());
    }
    let n = n_vanishing;

    // |m0(w)|^2 = cos^2(w/2)^N * Q(sin^2(w/2)), Q(y) = sum_k C(N-1+k, k) y^k.
    let q: Vec<f64> = (0..n).map(|k| binomial(n - 1 + k, k)).collect();

    // y = (2 - z - 1/z) / 4  =>  z^2 - (2 - 4y) z + 1 = 0; keep the root
    // inside the unit circle (minimum phase).
    let one = Complex64::new(1.0, 0.0);
    let mut poly = vec![one];
    for y in poly::roots(&q) {
        let b = one - 2.0 * y;
        let disc = (b * b - one).sqrt();
        let (z1, z2) = (b + disc, b - disc);
        let z = if z1.norm() < z2.norm() { z1 } else { z2 };
        poly = poly::mul(&poly, &[-z, one]);
    }
    for _ in 0..n {
        poly = poly::mul(&poly, &[one, one]);
    }

    // Descending powers give the conventional tap order.
    let mut taps: Vec<f64> = poly.iter().rev().map(|c| c.re).collect();
    let sum: f64 = taps.iter().sum();
    let scale = std::f64::consts::SQRT_2 / sum;
    taps.iter_mut().for_each(|t| *t *= scale);

    Ok(FilterPair::from_low_pass(n, taps))
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    fn push(&mut self, name: impl Into<String>, residual: f64, tolerance: f64) {
        self.checks.push(Check {
            name: name.into(),
            residual,
            tolerance,
            passed: residual.is_finite() && residual <= tolerance,
        });
    }
}

fn shifted_correlation(a: &[f64], b: &[f64], shift: isize) -> f64 {
    (0..a.len() as isize)
        .filter_map(|k| {
            let i = k + shift;
            (i >= 0 && (i as usize) < b.len()).then(|| a[k as usize] * b[i as usize])
        })
        .sum()
}

/// Run every admissibility check on a filter pair. Failures are reported,
/// never raised.
pub fn validate_filter(f: &FilterPair) -> ValidationReport {
    let mut report = ValidationReport { checks: Vec::new() };
    let u = &f.low_pass;
    let v = &f.high_pass;
    let t = u.len() as isize;

    let alg = tolerance::ALGEBRAIC;
    report.push(
        "low_pass_sum",
        (u.iter().sum::<f64>() - std::f64::consts::SQRT_2).abs(),
        alg,
    );
    report.push("high_pass_sum", v.iter().sum::<f64>().abs(), alg);

    // Moments in the centred, rescaled variable x = (2k - T + 1) / (T - 1),
    // which spans the same polynomials as k^p but stays well conditioned.
    let half = ((v.len().max(2) - 1) as f64) / 2.0;
    for p in 0..f.n_vanishing {
        let moment: f64 = v
            .iter()
            .enumerate()
            .map(|(k, &x)| ((k as f64 - half) / half).powi(p as i32) * x)
            .sum();
        report.push(format!("vanishing_moment_{p}"), moment.abs(), tolerance::MOMENT);
    }

    report.push("low_pass_norm", (u.iter().map(|x| x * x).sum::<f64>() - 1.0).abs(), alg);
    report.push("high_pass_norm", (v.iter().map(|x| x * x).sum::<f64>() - 1.0).abs(), alg);

    let low_low = (1..t)
        .map(|m| shifted_correlation(u, u, 2 * m).abs())
        .fold(0.0, f64::max);
    report.push("low_low_orthogonality", low_low, alg);

    let low_high = (-t..t)
        .map(|m| shifted_correlation(u, v, 2 * m).abs())
        .fold(0.0, f64::max);
    report.push("low_high_orthogonality", low_high, alg);

    let mirror = if u.len() == v.len() {
        let n = u.len();
        (0..n)
            .map(|k| {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                (v[k] - sign * u[n - 1 - k]).abs()
            })
            .fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };
    report.push("quadrature_mirror", mirror, 0.0);

    report
}

#[cfg(test)]
mod tests {
    use super::*;

    const S2: f64 = std::f64::consts::SQRT_2;

    #[test]
    fn haar_taps() {
        let f = daubechies_filters(1).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(f.low_pass, vec![r, r]);
        assert_eq!(f.high_pass, vec![r, -r]);
        assert!(validate_filter(&f).passed());
    }

    #[test]
    fn db2_closed_form() {
        let s3 = 3f64.sqrt();
        let d = 4.0 * S2;
        let expected = [(1.0 + s3) / d, (3.0 + s3) / d, (3.0 - s3) / d, (1.0 - s3) / d];
        let f = daubechies_filters(2).unwrap();
        for (a, b) in f.low_pass.iter().zip(expected) {
            assert!((a - b).abs() < 1e-14, "{a} vs {b}");
        }
    }

    #[test]
    fn unsupported_orders() {
        assert!(matches!(daubechies_filters(0), Err(Error::UnsupportedFilterOrder(0))));
        assert!(matches!(daubechies_filters(11), Err(Error::UnsupportedFilterOrder(11))));
    }

    #[test]
    fn broken_haar_fails_vanishing_moment() {
        let mut f = FilterPair::haar();
        f.high_pass[1] = -f.high_pass[1];
        let report = validate_filter(&f);
        assert!(!report.passed());
        assert!(!report.get("vanishing_moment_0").unwrap().passed);
    }

    #[test]
    fn json_shape() {
        let f = daubechies_filters(2).unwrap();
        let v: serde_json::Value = serde_json::from_str(&f.to_json().unwrap()).unwrap();
        assert_eq!(v["n_vanishing"], 2);
        assert_eq!(v["low_pass"].as_array().unwrap().len(), 4);
        assert_eq!(v["high_pass"].as_array().unwrap().len(), 4);
        assert_eq!(FilterPair::from_json(&f.to_json().unwrap()).unwrap(), f);
    }

    #[test]
    fn all_orders_pass_report() {
        for n in 1..=MAX_ORDER {
            let f = daubechies_filters(n).unwrap();
            let report = validate_filter(&f);
            for c in &report.checks {
                println!("N={n} {} residual={:e}", c.name, c.residual);
            }
            assert!(report.passed(), "order {n}: {:?}", report.failures().collect::<Vec<_>>());
        }
    }
}
