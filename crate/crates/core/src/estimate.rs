//! Scaling-exponent and rank estimation from multi-octave spectra.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specmat::WaveletSpectrum;
use crate::tolerance;

/// Regression weights over octaves `j1..=j2` with `sum w = 0` and
/// `sum j w = 1` (a single octave gets weight one).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegressionWeights {
    pub j1: u32,
    pub j2: u32,
    pub weights: Vec<f64>,
}

impl RegressionWeights {
    /// Check user-supplied weights against the two linear constraints.
    pub fn new(j1: u32, j2: u32, weights: Vec<f64>) -> Result<Self> {
        if j1 == 0 || j2 < j1 {
            return Err(Error::InvalidInput(format!("invalid octave range {j1}..={j2}")));
        }
        let m = (j2 - j1 + 1) as usize;
        if weights.len() != m {
            return Err(Error::Dimension(format!("{} weights for {m} octaves", weights.len())));
        }
        if m == 1 {
            if weights[0] != 1.0 {
                return Err(Error::InvalidInput("a single octave needs weight 1".into()));
            }
        } else {
            let (s0, s1) = constraint_sums(j1, &weights);
            if s0.abs() > tolerance::ALGEBRAIC || (s1 - 1.0).abs() > tolerance::ALGEBRAIC {
                return Err(Error::InvalidInput(format!(
                    "weights violate constraints: sum = {s0:e}, sum j w - 1 = {:e}",
                    s1 - 1.0
                )));
            }
        }
        Ok(RegressionWeights { j1, j2, weights })
    }

    pub fn octaves(&self) -> impl Iterator<Item = u32> {
        self.j1..=self.j2
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// `sum_j w_j x_j` over the octave window.
    pub fn apply(&self, values: &[f64]) -> f64 {
        self.weights.iter().zip(values).map(|(w, x)| w * x).sum()
    }
}

fn constraint_sums(j1: u32, w: &[f64]) -> (f64, f64) {
    let s0 = w.iter().sum();
    let s1 = w.iter().enumerate().map(|(i, x)| (j1 as f64 + i as f64) * x).sum();
    (s0, s1)
}

/// Ordinary least-squares slope weights `w_j = (j - mean) / sum (j' - mean)^2`.
pub fn regression_weights(j1: u32, j2: u32) -> Result<RegressionWeights> {
    if j1 == 0 || j2 < j1 {
        return Err(Error::InvalidInput(format!("invalid octave range {j1}..={j2}")));
    }
    if j1 == j2 {
        return Ok(RegressionWeights { j1, j2, weights: vec![1.0] });
    }
    let m = (j2 - j1 + 1) as f64;
    let mean = (j1 as f64 + j2 as f64) / 2.0;
    // sum (j - mean)^2 = m (m^2 - 1) / 12 for consecutive integers.
    let ss = m * (m * m - 1.0) / 12.0;
    let weights = (j1..=j2).map(|j| (j as f64 - mean) / ss).collect();
    RegressionWeights::new(j1, j2, weights)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HurstEstimate {
    /// Estimated exponents, ascending.
    pub h_hat: Vec<f64>,
    /// Monte Carlo standard errors, when produced by the harness.
    pub std_error: Option<Vec<f64>>,
    pub j1: u32,
    pub j2: u32,
    pub r: usize,
}

fn window<'a>(spectra: &'a [WaveletSpectrum], w: &RegressionWeights) -> Result<Vec<&'a WaveletSpectrum>> {
    let out: Vec<&WaveletSpectrum> = w
        .octaves()
        .map(|j| spectra.iter().find(|s| s.octave == j).ok_or(Error::MissingOctave(j)))
        .collect::<Result<_>>()?;
    let p = out[0].p();
    if out.iter().any(|s| s.p() != p) {
        return Err(Error::Dimension("spectra of different dimension".into()));
    }
    Ok(out)
}

/// `h_q = (sum_j w_j log2 lambda_{p-r+q}(W(2^j)) - 1) / 2` for `q = 1..r`
/// with OLS weights on `j1..=j2`.
pub fn estimate_hurst(spectra: &[WaveletSpectrum], j1: u32, j2: u32, r: usize) -> Result<HurstEstimate> {
    estimate_hurst_with(spectra, &regression_weights(j1, j2)?, r)
}

/// [`estimate_hurst`] with explicit weights.
pub fn estimate_hurst_with(spectra: &[WaveletSpectrum], w: &RegressionWeights, r: usize) -> Result<HurstEstimate> {
    let win = window(spectra, w)?;
    let p = win[0].p();
    if r == 0 || r > p {
        return Err(Error::Dimension(format!("rank {r} outside 1..={p}")));
    }
    let mut h_hat = Vec::with_capacity(r);
    for q in 1..=r {
        let idx = p - r + q - 1;
        let logs = win
            .iter()
            .map(|s| {
                let v = s.eigenvalues[idx];
                if v > 0.0 && v.is_finite() {
                    Ok(v.log2())
                } else {
                    Err(Error::DegenerateSpectrum { octave: s.octave, index: idx + 1, value: v })
                }
            })
            .collect::<Result<Vec<f64>>>()?;
        h_hat.push(0.5 * (w.apply(&logs) - 1.0));
    }
    // The estimator is a set of exponents; report it sorted.
    h_hat.sort_by(f64::total_cmp);
    Ok(HurstEstimate { h_hat, std_error: None, j1: w.j1, j2: w.j2, r })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankEstimate {
    pub r_hat: usize,
    pub tau: f64,
    /// Regression slope `(sum w log2 lambda_i - 1) / 2` per eigenvalue index
    /// (ascending); `-inf` where an eigenvalue in the window is zero.
    #[serde(with = "neg_inf_as_null")]
    pub slopes: Vec<f64>,
}

mod neg_inf_as_null {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|x| x.is_finite().then_some(*x)).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        let v: Vec<Option<f64>> = Vec::deserialize(d)?;
        Ok(v.into_iter().map(|x| x.unwrap_or(f64::NEG_INFINITY)).collect())
    }
}

/// Per-index slopes over the octave window.
pub fn eigen_slopes(spectra: &[WaveletSpectrum], w: &RegressionWeights) -> Result<Vec<f64>> {
    let win = window(spectra, w)?;
    let p = win[0].p();
    let mut slopes = Vec::with_capacity(p);
    for i in 0..p {
        let logs: Vec<f64> = win.iter().map(|s| s.eigenvalues[i]).map(|v| if v < tolerance::LOG_FLOOR { f64::NEG_INFINITY } else { v.log2() }).collect();
        if logs.iter().any(|x| x.is_infinite()) {
            slopes.push(f64::NEG_INFINITY);
        } else {
            slopes.push(0.5 * (w.apply(&logs) - 1.0));
        }
    }
    let zeros = slopes.iter().filter(|s| s.is_infinite()).count();
    if zeros > 0 {
        log::warn!("{zeros} eigenvalue indices vanish in the octave window and are excluded");
    }
    Ok(slopes)
}

/// Count the eigenvalue indices whose slope exceeds `tau`.
pub fn estimate_rank(spectra: &[WaveletSpectrum], j1: u32, j2: u32, tau: f64) -> Result<RankEstimate> {
    estimate_rank_with(spectra, &regression_weights(j1, j2)?, tau)
}

pub fn estimate_rank_with(spectra: &[WaveletSpectrum], w: &RegressionWeights, tau: f64) -> Result<RankEstimate> {
    if !(tau > 0.0 && tau < 0.5) {
        return Err(Error::Domain(format!("rank threshold {tau} outside (0, 1/2)")));
    }
    let slopes = eigen_slopes(spectra, w)?;
    let r_hat = slopes.iter().filter(|&&s| s > tau).count();
    Ok(RankEstimate { r_hat, tau, slopes })
}

/// Regularity parameter: `min(h_1, smallest gap)` for distinct exponents,
/// `h_1` when all exponents coincide (or `r = 1`), zero otherwise.
pub fn varpi(h: &[f64]) -> f64 {
    let Some(&h1) = h.first() else { return 0.0 };
    if h.len() == 1 || h.iter().all(|&x| x == h1) {
        return h1;
    }
    let min_gap = h.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    if min_gap > 0.0 {
        h1.min(min_gap)
    } else {
        0.0
    }
}

/// Scale-schedule diagnostics at one `(n, a, p)` point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleCheck {
    pub n: u64,
    pub a: u64,
    pub p: u64,
    pub octave: u32,
    pub h: Vec<f64>,
    pub varpi: f64,
    /// `a / n`, should vanish along the schedule.
    pub a_over_n: f64,
    /// `n / a^(2 varpi + 1)`, should vanish along the schedule.
    pub n_over_a_power: f64,
    /// `p / (n / a)`, should settle at the three-fold ratio `c`.
    pub ratio_c: f64,
    /// `a <= n / 2^j`.
    pub scale_within_length: bool,
}

pub fn validate_schedule(n: u64, a: u64, p: u64, h: &[f64], j: u32) -> Result<ScheduleCheck> {
    if a == 0 || !a.is_power_of_two() {
        return Err(Error::InvalidInput(format!("scale factor {a} is not dyadic")));
    }
    if n == 0 || p == 0 || h.is_empty() {
        return Err(Error::InvalidInput("n, p and h must be non-empty".into()));
    }
    let w = varpi(h);
    let (nf, af, pf) = (n as f64, a as f64, p as f64);
    let scale_within_length = (a as u128) << j <= n as u128;
    if !scale_within_length {
        log::warn!("schedule point n = {n}, a = {a}, j = {j} violates a <= n / 2^j");
    }
    Ok(ScheduleCheck {
        n,
        a,
        p,
        octave: j,
        h: h.to_vec(),
        varpi: w,
        a_over_n: af / nf,
        n_over_a_power: nf / af.powf(2.0 * w + 1.0),
        ratio_c: pf / (nf / af),
        scale_within_length,
    })
}

/// Trend verdict over a sweep of schedule points ordered by increasing `n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepVerdict {
    pub a_over_n_decreasing: bool,
    pub n_over_a_power_decreasing: bool,
    pub ratio_c_spread: f64,
    pub all_within_length: bool,
}

pub fn sweep_verdict(checks: &[ScheduleCheck]) -> SweepVerdict {
    let decreasing = |f: fn(&ScheduleCheck) -> f64| checks.windows(2).all(|w| f(&w[1]) < f(&w[0]));
    let (lo, hi) = checks
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), c| (lo.min(c.ratio_c), hi.max(c.ratio_c)));
    SweepVerdict {
        a_over_n_decreasing: decreasing(|c| c.a_over_n),
        n_over_a_power_decreasing: decreasing(|c| c.n_over_a_power),
        ratio_c_spread: if checks.is_empty() { 0.0 } else { hi - lo },
        all_within_length: checks.iter().all(|c| c.scale_within_length),
    }
}

/// `(log2 lambda / j - 1) / 2` for every eigenvalue index and octave.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectories {
    pub octaves: Vec<u32>,
    /// `values[q][k]`: index `q` (ascending eigenvalue order, zero based)
    /// at `octaves[k]`; `None` where the eigenvalue is zero.
    pub values: Vec<Vec<Option<f64>>>,
}

impl Trajectories {
    /// Trajectory of the `q`-th largest eigenvalue (`q = 1` is the largest).
    pub fn from_top(&self, q: usize) -> &[Option<f64>] {
        &self.values[self.values.len() - q]
    }
}

pub fn trajectory_value(lambda: f64, octave: u32) -> Option<f64> {
    (lambda >= tolerance::LOG_FLOOR && octave > 0).then(|| 0.5 * (lambda.log2() / octave as f64 - 1.0))
}

pub fn figure1_trajectories(spectra: &[WaveletSpectrum]) -> Trajectories {
    let p = spectra.first().map_or(0, WaveletSpectrum::p);
    let octaves = spectra.iter().map(|s| s.octave).collect();
    let values = (0..p)
        .map(|q| spectra.iter().map(|s| trajectory_value(s.eigenvalues[q], s.octave)).collect())
        .collect();
    Trajectories { octaves, values }
}

/// `log lambda / (2 log a)` with `a = 2^octave`: vanishes for eigenvalues
/// that stay bounded, tends to `h + 1/2` for scaling ones.
pub fn log_ratio_statistic(lambda: f64, octave: u32) -> Option<f64> {
    (lambda >= tolerance::LOG_FLOOR && octave > 0).then(|| lambda.log2() / (2.0 * octave as f64))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn power_law(h: &[f64], consts: &[f64], p: usize, j1: u32, j2: u32) -> Vec<WaveletSpectrum> {
        (j1..=j2)
            .map(|j| {
                let mut ev = vec![1.0; p - h.len()];
                ev.extend(h.iter().zip(consts).map(|(hq, c)| c * 2f64.powf(j as f64 * (2.0 * hq + 1.0))));
                WaveletSpectrum::from_eigenvalues(j, 1000, ev)
            })
            .collect()
    }

    #[test]
    fn weight_examples() {
        assert_eq!(regression_weights(3, 3).unwrap().weights, vec![1.0]);
        assert_eq!(regression_weights(1, 2).unwrap().weights, vec![-1.0, 1.0]);
        assert_eq!(regression_weights(1, 3).unwrap().weights, vec![-0.5, 0.0, 0.5]);
        assert!(regression_weights(0, 3).is_err());
        assert!(regression_weights(4, 3).is_err());
    }

    #[test]
    fn bad_custom_weights_rejected() {
        assert!(RegressionWeights::new(1, 3, vec![-1.0, 0.0, 1.0]).is_err());
        assert!(RegressionWeights::new(1, 3, vec![-1.0, 2.0, -1.0]).is_err());
        assert!(RegressionWeights::new(1, 3, vec![-0.25, -0.5, 0.75]).is_ok());
    }

    #[test]
    fn exact_power_law_recovered() {
        let h = [0.2, 0.45, 0.9];
        let s = power_law(&h, &[0.3, 7.0, 10.0], 6, 2, 9);
        let est = estimate_hurst(&s, 2, 9, 3).unwrap();
        for (a, b) in est.h_hat.iter().zip(h) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn degenerate_spectrum_names_octave() {
        let mut s = power_law(&[0.5], &[1.0], 3, 1, 4);
        s[2].eigenvalues[2] = 0.0;
        match estimate_hurst(&s, 1, 4, 1) {
            Err(Error::DegenerateSpectrum { octave, index, .. }) => {
                assert_eq!((octave, index), (3, 3));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rank_from_exact_spectra() {
        let s = power_law(&[0.4, 0.8], &[1.0, 1.0], 8, 1, 6);
        for tau in [0.06, 0.1, 0.2, 0.3, 0.34] {
            let est = estimate_rank(&s, 1, 6, tau).unwrap();
            assert_eq!(est.r_hat, 2, "tau {tau}");
            assert!((est.slopes[0] + 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn rank_with_zero_eigenvalues() {
        let mut s = power_law(&[0.6], &[1.0], 4, 1, 5);
        for sp in s.iter_mut() {
            sp.eigenvalues[0] = 0.0;
        }
        let est = estimate_rank(&s, 1, 5, 0.1).unwrap();
        assert_eq!(est.r_hat, 1);
        assert!(est.slopes[0].is_infinite());
        let json = serde_json::to_value(&est).unwrap();
        assert!(json["slopes"][0].is_null());
    }

    #[test]
    fn varpi_examples() {
        assert_eq!(varpi(&[0.5]), 0.5);
        assert!((varpi(&[0.1, 0.3, 0.5, 0.6, 0.8, 0.9]) - 0.1).abs() < 1e-12);
        assert_eq!(varpi(&[0.4, 0.4, 0.4]), 0.4);
        assert_eq!(varpi(&[0.2, 0.4, 0.4]), 0.0);
        assert!((varpi(&[0.3, 0.35]) - 0.05).abs() < 1e-12);
    }

    #[test]
    fn schedule_ratio() {
        let c = validate_schedule(1 << 20, 1 << 7, 1 << 13, &[0.5], 1).unwrap();
        assert_eq!(c.ratio_c, 1.0);
        assert!(c.scale_within_length);
        let bad = validate_schedule(1 << 10, 1 << 10, 4, &[0.5], 1).unwrap();
        assert!(!bad.scale_within_length);
    }

    #[test]
    fn sweep_trend() {
        let checks: Vec<_> = (14..22).step_by(2)
            .map(|k| validate_schedule(1 << k, 1 << (k / 2), 1 << (k / 2 - 1), &[0.5], 1).unwrap())
            .collect();
        let v = sweep_verdict(&checks);
        assert!(v.a_over_n_decreasing && v.all_within_length);
    }

    #[test]
    fn trajectories_formula() {
        let h = 0.35;
        let s: Vec<_> = (1..=5)
            .map(|j| WaveletSpectrum::from_eigenvalues(j, 10, vec![3.0, 2f64.powf(j as f64 * (2.0 * h + 1.0))]))
            .collect();
        let t = figure1_trajectories(&s);
        for (k, v) in t.from_top(1).iter().enumerate() {
            assert!((v.unwrap() - h).abs() < 1e-14, "octave {}", k + 1);
        }
        for (k, v) in t.from_top(2).iter().enumerate() {
            let j = (k + 1) as f64;
            assert!((v.unwrap() - (3f64.log2() / (2.0 * j) - 0.5)).abs() < 1e-14);
        }
        let zero = WaveletSpectrum::from_eigenvalues(2, 10, vec![0.0, 1.0]);
        assert_eq!(figure1_trajectories(&[zero]).values[0][0], None);
    }
}
