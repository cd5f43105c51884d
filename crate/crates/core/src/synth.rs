//! Synthesis of the latent fractional signal, the noise, the mixing
//! coordinates, and the observed series `Y = P X + Z`.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly;
use crate::pyramid::SeriesMatrix;
use crate::rng::{self, StreamRng};
use crate::tolerance;

pub const MAX_FBM_LEN: usize = 1 << 22;
pub const FARIMA_MAX_TRUNCATION: usize = 1 << 18;
pub const FARIMA_COEFF_FLOOR: f64 = 1e-10;
const EMBEDDING_RETRIES: usize = 3;

/// Autocovariance of unit-variance fractional Gaussian noise at `lag`.
pub fn fgn_covariance(hurst: f64, lag: i64) -> Result<f64> {
    if !(hurst > 0.0 && hurst < 1.0) {
        return Err(Error::Domain(format!("Hurst parameter {hurst} outside (0, 1)")));
    }
    Ok(fgn_cov(hurst, lag))
}

fn fgn_cov(hurst: f64, lag: i64) -> f64 {
    let k = lag.unsigned_abs() as f64;
    let e = 2.0 * hurst;
    0.5 * ((k + 1.0).powf(e) - 2.0 * k.powf(e) + (k - 1.0).abs().powf(e))
}

/// Exact fGn sampler by circulant embedding. The square-rooted circulant
/// spectrum is computed once and reused for every draw.
pub struct FgnGenerator {
    n: usize,
    scaled_sqrt_eig: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
}

impl FgnGenerator {
    pub fn new(hurst: f64, n: usize) -> Result<Self> {
        if !(hurst > 0.0 && hurst < 1.0) {
            return Err(Error::Domain(format!("Hurst parameter {hurst} outside (0, 1)")));
        }
        if n == 0 || n > MAX_FBM_LEN {
            return Err(Error::Domain(format!("series length {n} outside 1..={MAX_FBM_LEN}")));
        }
        let mut planner = FftPlanner::new();
        let mut m = 2 * n.next_power_of_two().max(2);
        let mut last_min = 0.0;
        for _ in 0..=EMBEDDING_RETRIES {
            let fft = planner.plan_fft_forward(m);
            let mut row: Vec<Complex64> = (0..m)
                .map(|k| Complex64::new(fgn_cov(hurst, k.min(m - k) as i64), 0.0))
                .collect();
            fft.process(&mut row);
            let max = row.iter().map(|c| c.re).fold(f64::MIN, f64::max);
            let min = row.iter().map(|c| c.re).fold(f64::MAX, f64::min);
            if min >= -tolerance::CIRCULANT_CLIP * max {
                let scaled_sqrt_eig =
                    row.iter().map(|c| (c.re.max(0.0) / m as f64).sqrt()).collect();
                return Ok(FgnGenerator { n, scaled_sqrt_eig, fft });
            }
            last_min = min;
            m *= 2;
        }
        Err(Error::EmbeddingFailed { size: m / 2, min_eigenvalue: last_min })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn sample(&self, rng: &mut StreamRng) -> Vec<f64> {
        let mut w: Vec<Complex64> = self
            .scaled_sqrt_eig
            .iter()
            .map(|&s| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(s * re, s * im)
            })
            .collect();
        self.fft.process(&mut w);
        w[..self.n].iter().map(|c| c.re).collect()
    }
}

fn cumsum(mut x: Vec<f64>) -> Vec<f64> {
    let mut acc = 0.0;
    for v in x.iter_mut() {
        acc += *v;
        *v = acc;
    }
    x
}

/// Fractional Brownian motion path of length `n`: the running sum of exact
/// fractional Gaussian noise.
pub fn synth_fbm(hurst: f64, n: usize, seed: u64) -> Result<Vec<f64>> {
    let gen = FgnGenerator::new(hurst, n)?;
    Ok(cumsum(gen.sample(&mut rng::stream(seed))))
}

/// Distribution of the i.i.d. innovations driving linear processes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Innovation {
    #[default]
    Gaussian,
    CenteredUniform,
    Rademacher,
}

impl Innovation {
    /// Zero mean, unit variance draw.
    pub fn draw(self, rng: &mut StreamRng) -> f64 {
        match self {
            Innovation::Gaussian => rng.sample(StandardNormal),
            Innovation::CenteredUniform => {
                let s = 3f64.sqrt();
                rng.random_range(-s..s)
            }
            Innovation::Rademacher => {
                if rng.random_bool(0.5) {
                    1.0
                } else {
                    -1.0
                }
            }
        }
    }
}

/// MA(inf) weights of FARIMA(0,d,0), `a(l) = Gamma(l+d) / (Gamma(d) Gamma(l+1))`,
/// truncated at `2^18` terms or once a weight drops below `1e-10`.
pub fn farima_coefficients(d: f64) -> Result<Vec<f64>> {
    if !(d > 0.0 && d < 0.5) {
        return Err(Error::Domain(format!("memory parameter {d} outside (0, 1/2)")));
    }
    let mut coeffs = Vec::with_capacity(1024);
    let mut a = 1.0;
    coeffs.push(a);
    for l in 1..FARIMA_MAX_TRUNCATION {
        a *= (l as f64 - 1.0 + d) / l as f64;
        if a.abs() < FARIMA_COEFF_FLOOR {
            break;
        }
        coeffs.push(a);
    }
    Ok(coeffs)
}

/// FARIMA(0,d,0) sampler via FFT convolution of the truncated MA weights.
pub struct FarimaGenerator {
    n: usize,
    taps: usize,
    innovations: Innovation,
    weights_hat: Vec<Complex64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl FarimaGenerator {
    pub fn new(d: f64, n: usize, innovations: Innovation) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("series length must be positive".into()));
        }
        let coeffs = farima_coefficients(d)?;
        let taps = coeffs.len();
        let size = (n + taps - 1).next_power_of_two();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(size);
        let inverse = planner.plan_fft_inverse(size);
        let mut weights_hat = vec![Complex64::new(0.0, 0.0); size];
        for (w, &c) in weights_hat.iter_mut().zip(&coeffs) {
            w.re = c;
        }
        forward.process(&mut weights_hat);
        Ok(FarimaGenerator { n, taps, innovations, weights_hat, forward, inverse })
    }

    pub fn sample(&self, rng: &mut StreamRng) -> Vec<f64> {
        let size = self.weights_hat.len();
        let total = self.n + self.taps - 1;
        let mut buf = vec![Complex64::new(0.0, 0.0); size];
        for b in buf.iter_mut().take(total) {
            b.re = self.innovations.draw(rng);
        }
        self.forward.process(&mut buf);
        for (b, w) in buf.iter_mut().zip(&self.weights_hat) {
            *b *= w;
        }
        self.inverse.process(&mut buf);
        let norm = 1.0 / size as f64;
        // Circular wrap only touches outputs before index taps - 1.
        buf[self.taps - 1..total].iter().map(|c| c.re * norm).collect()
    }
}

/// Stationary FARIMA(0,d,0) series of length `n`.
pub fn synth_farima(d: f64, n: usize, innovations: Innovation, seed: u64) -> Result<Vec<f64>> {
    let gen = FarimaGenerator::new(d, n, innovations)?;
    Ok(gen.sample(&mut rng::stream(seed)))
}

/// Family of the latent components.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SignalKind {
    /// Independent fBm components, exponent `h` in `(0, 1)`.
    #[default]
    Ofbm,
    /// Independent stationary FARIMA(0,d,0) components with `d = h + 1/2`,
    /// so `h` lies in `(-1/2, 0)`.
    Farima {
        #[serde(default)]
        innovations: Innovation,
    },
}

fn default_scale() -> f64 {
    1.0
}

fn default_pole_max() -> f64 {
    0.7
}

/// Noise component `Z`, independent across rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseSpec {
    #[default]
    None,
    IidGaussian {
        #[serde(default = "default_scale")]
        scale: f64,
    },
    /// Centered uniform entries (sub-Gaussian), unit variance before scaling.
    IidUniform {
        #[serde(default = "default_scale")]
        scale: f64,
    },
    /// `Z_t = sum a_i Z_{t-i} + e_t + sum b_i e_{t-i}` with standard normal `e`.
    Arma {
        #[serde(default)]
        ar: Vec<f64>,
        #[serde(default)]
        ma: Vec<f64>,
        #[serde(default = "default_scale")]
        scale: f64,
    },
    /// Each row an AR(1) whose pole is drawn uniformly on `[0, pole_max]`.
    Colored {
        #[serde(default = "default_pole_max")]
        pole_max: f64,
        #[serde(default = "default_scale")]
        scale: f64,
    },
}

/// Largest modulus of the inverse roots of `1 - a_1 z - ... - a_k z^k`;
/// the AR part is stationary iff it is below one.
pub fn ar_inverse_root_radius(ar: &[f64]) -> f64 {
    if ar.iter().all(|&a| a == 0.0) {
        return 0.0;
    }
    let mut coeffs = vec![1.0];
    coeffs.extend(ar.iter().map(|a| -a));
    poly::roots(&coeffs)
        .into_iter()
        .map(|z| 1.0 / z.norm())
        .fold(0.0, f64::max)
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<()> {
        let scale = match self {
            NoiseSpec::None => return Ok(()),
            NoiseSpec::IidGaussian { scale } | NoiseSpec::IidUniform { scale } => *scale,
            NoiseSpec::Arma { ar, ma, scale } => {
                if ar.iter().chain(ma).any(|x| !x.is_finite()) {
                    return Err(Error::InvalidInput("non-finite ARMA coefficient".into()));
                }
                let radius = ar_inverse_root_radius(ar);
                if radius >= 1.0 - 1e-12 {
                    return Err(Error::InvalidInput(format!(
                        "AR polynomial not stationary (inverse root radius {radius:.6})"
                    )));
                }
                *scale
            }
            NoiseSpec::Colored { pole_max, scale } => {
                if !(0.0..1.0).contains(pole_max) {
                    return Err(Error::InvalidInput(format!("pole_max {pole_max} outside [0, 1)")));
                }
                *scale
            }
        };
        if !(scale.is_finite() && scale >= 0.0) {
            return Err(Error::InvalidInput(format!("noise scale {scale} must be finite and >= 0")));
        }
        Ok(())
    }

    pub fn is_none(&self) -> bool {
        matches!(self, NoiseSpec::None)
    }
}

fn arma_row(ar: &[f64], ma: &[f64], n: usize, burn: usize, rng: &mut StreamRng) -> Vec<f64> {
    let total = n + burn;
    let mut e = Vec::with_capacity(total);
    let mut x: Vec<f64> = Vec::with_capacity(total);
    for t in 0..total {
        let et: f64 = rng.sample(StandardNormal);
        e.push(et);
        let mut v = et;
        for (i, b) in ma.iter().enumerate() {
            if t > i {
                v += b * e[t - 1 - i];
            }
        }
        for (i, a) in ar.iter().enumerate() {
            if t > i {
                v += a * x[t - 1 - i];
            }
        }
        x.push(v);
    }
    x.split_off(burn)
}

/// `p x n` noise matrix with independent rows (row `i` uses substream `i`).
pub fn synth_noise(spec: &NoiseSpec, p: usize, n: usize, seed: u64) -> Result<SeriesMatrix> {
    spec.validate()?;
    let mut z = SeriesMatrix::zeros(p, n);
    let fill = |z: &mut SeriesMatrix, f: &mut dyn FnMut(&mut StreamRng, &mut [f64])| {
        for i in 0..p {
            let mut rng = rng::stream_at(seed, &[i as u64]);
            f(&mut rng, z.row_mut(i));
        }
    };
    match spec {
        NoiseSpec::None => {}
        NoiseSpec::IidGaussian { scale } => fill(&mut z, &mut |rng, row| {
            row.iter_mut().for_each(|v| *v = scale * rng.sample::<f64, _>(StandardNormal))
        }),
        NoiseSpec::IidUniform { scale } => fill(&mut z, &mut |rng, row| {
            row.iter_mut().for_each(|v| *v = scale * Innovation::CenteredUniform.draw(rng))
        }),
        NoiseSpec::Arma { ar, ma, scale } => {
            let radius = ar_inverse_root_radius(ar);
            let burn = if radius > 0.0 {
                ((40.0 / -radius.ln()).ceil() as usize).max(200) + ma.len()
            } else {
                ma.len()
            };
            fill(&mut z, &mut |rng, row| {
                let x = arma_row(ar, ma, n, burn, rng);
                row.iter_mut().zip(x).for_each(|(v, x)| *v = scale * x)
            })
        }
        NoiseSpec::Colored { pole_max, scale } => fill(&mut z, &mut |rng, row| {
            let phi = rng.random_range(0.0..=*pole_max);
            let mut prev = rng.sample::<f64, _>(StandardNormal) / (1.0 - phi * phi).sqrt();
            for v in row.iter_mut() {
                *v = scale * prev;
                prev = phi * prev + rng.sample::<f64, _>(StandardNormal);
            }
        }),
    }
    Ok(z)
}

/// `p x r` matrix with columns uniform on the unit sphere.
pub fn random_coordinates(p: usize, r: usize, seed: u64) -> Result<DMatrix<f64>> {
    if r == 0 || p < r {
        return Err(Error::Dimension(format!("need p >= r >= 1, got p = {p}, r = {r}")));
    }
    let mut rng = rng::stream(seed);
    let mut m = DMatrix::from_fn(p, r, |_, _| rng.sample::<f64, _>(StandardNormal));
    for mut col in m.column_iter_mut() {
        let norm = col.norm();
        col /= norm;
    }
    Ok(m)
}

/// `p x r` matrix whose columns are the first `r` canonical basis vectors.
pub fn canonical_coordinates(p: usize, r: usize) -> Result<DMatrix<f64>> {
    if r == 0 || p < r {
        return Err(Error::Dimension(format!("need p >= r >= 1, got p = {p}, r = {r}")));
    }
    Ok(DMatrix::from_fn(p, r, |i, q| if i == q { 1.0 } else { 0.0 }))
}

/// Latent dimension, exponents, mixing matrices and noise.
#[derive(Clone, Debug)]
pub struct GenerativeModel {
    pub h: Vec<f64>,
    pub p_h: DMatrix<f64>,
    pub p_coords: DMatrix<f64>,
    pub signal: SignalKind,
    pub noise: NoiseSpec,
}

impl GenerativeModel {
    pub fn new(
        h: Vec<f64>,
        p_h: DMatrix<f64>,
        p_coords: DMatrix<f64>,
        signal: SignalKind,
        noise: NoiseSpec,
    ) -> Result<Self> {
        let model = GenerativeModel { h, p_h, p_coords, signal, noise };
        model.validate()?;
        Ok(model)
    }

    pub fn r(&self) -> usize {
        self.h.len()
    }

    pub fn p(&self) -> usize {
        self.p_coords.nrows()
    }

    pub fn validate(&self) -> Result<()> {
        let r = self.r();
        if r == 0 {
            return Err(Error::InvalidInput("latent dimension r must be >= 1".into()));
        }
        if self.h.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidInput("exponents must be ascending".into()));
        }
        validate_exponents(&self.h, self.signal)?;
        check_mixing(&self.p_h, r)?;
        if self.p_coords.ncols() != r || self.p_coords.nrows() < r {
            return Err(Error::Dimension(format!(
                "coordinates are {} x {}, need p x {r} with p >= {r}",
                self.p_coords.nrows(),
                self.p_coords.ncols()
            )));
        }
        for (q, col) in self.p_coords.column_iter().enumerate() {
            if (col.norm() - 1.0).abs() > tolerance::ALGEBRAIC {
                return Err(Error::InvalidInput(format!("coordinate column {q} is not unit norm")));
            }
        }
        self.noise.validate()
    }
}

pub(crate) fn validate_exponents(h: &[f64], signal: SignalKind) -> Result<()> {
    let (lo, hi) = match signal {
        SignalKind::Ofbm => (0.0, 1.0),
        SignalKind::Farima { .. } => (-0.5, 0.0),
    };
    match h.iter().find(|&&x| !(x > lo && x < hi)) {
        Some(x) => Err(Error::Domain(format!("exponent {x} outside ({lo}, {hi}) for {signal:?}"))),
        None => Ok(()),
    }
}

pub(crate) fn check_mixing(p_h: &DMatrix<f64>, r: usize) -> Result<()> {
    if p_h.nrows() != r || p_h.ncols() != r {
        return Err(Error::Dimension(format!("P_H must be {r} x {r}")));
    }
    let sv = p_h.singular_values();
    let max = sv.max();
    let min = sv.min();
    if !(min > 0.0) || max / min >= 1e8 {
        return Err(Error::Singular(format!("P_H condition number {:e}", max / min)));
    }
    Ok(())
}

enum Component {
    Fgn(FgnGenerator),
    Farima(FarimaGenerator),
}

/// Reusable sampler of the latent `r x n` signal `X = P_H (X_1, ..., X_r)`.
pub struct LatentSampler {
    components: Vec<Component>,
    p_h: DMatrix<f64>,
    n: usize,
}

impl LatentSampler {
    pub fn new(h: &[f64], p_h: &DMatrix<f64>, signal: SignalKind, n: usize) -> Result<Self> {
        validate_exponents(h, signal)?;
        check_mixing(p_h, h.len())?;
        let components = h
            .iter()
            .map(|&hq| match signal {
                SignalKind::Ofbm => FgnGenerator::new(hq, n).map(Component::Fgn),
                SignalKind::Farima { innovations } => {
                    FarimaGenerator::new(hq + 0.5, n, innovations).map(Component::Farima)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(LatentSampler { components, p_h: p_h.clone(), n })
    }

    /// Independent components before mixing; component `q` uses substream `q`.
    pub fn sample_unmixed(&self, seed: u64) -> SeriesMatrix {
        let rows: Vec<Vec<f64>> = self
            .components
            .iter()
            .enumerate()
            .map(|(q, c)| {
                let mut rng = rng::stream_at(seed, &[q as u64]);
                match c {
                    Component::Fgn(g) => cumsum(g.sample(&mut rng)),
                    Component::Farima(g) => g.sample(&mut rng),
                }
            })
            .collect();
        SeriesMatrix::from_rows(rows).expect("generated rows are finite")
    }

    pub fn sample(&self, seed: u64) -> SeriesMatrix {
        mix(&self.p_h, &self.sample_unmixed(seed))
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }
}

fn mix(m: &DMatrix<f64>, x: &SeriesMatrix) -> SeriesMatrix {
    let n = x.n();
    let mut out = SeriesMatrix::zeros(m.nrows(), n);
    for i in 0..m.nrows() {
        let row = out.row_mut(i);
        for q in 0..m.ncols() {
            let c = m[(i, q)];
            if c != 0.0 {
                for (o, &v) in row.iter_mut().zip(x.row(q)) {
                    *o += c * v;
                }
            }
        }
    }
    out
}

/// `X(t) = P_H (B_{h_1}(t), ..., B_{h_r}(t))` with independent fBm rows.
pub fn synth_ofbm(model: &GenerativeModel, n: usize, seed: u64) -> Result<SeriesMatrix> {
    Ok(LatentSampler::new(&model.h, &model.p_h, SignalKind::Ofbm, n)?.sample(seed))
}

/// Latent signal of the model's kind.
pub fn synth_signal(model: &GenerativeModel, n: usize, seed: u64) -> Result<SeriesMatrix> {
    Ok(LatentSampler::new(&model.h, &model.p_h, model.signal, n)?.sample(seed))
}

/// `Y = P X + Z`.
pub fn observe(x: &SeriesMatrix, p_coords: &DMatrix<f64>, z: Option<&SeriesMatrix>) -> Result<SeriesMatrix> {
    if p_coords.ncols() != x.p() {
        return Err(Error::Dimension(format!(
            "coordinates have {} columns, signal has {} rows",
            p_coords.ncols(),
            x.p()
        )));
    }
    let mut y = mix(p_coords, x);
    if let Some(z) = z {
        if z.p() != y.p() || z.n() != y.n() {
            return Err(Error::Dimension(format!(
                "noise is {} x {}, expected {} x {}",
                z.p(),
                z.n(),
                y.p(),
                y.n()
            )));
        }
        for i in 0..y.p() {
            for (a, b) in y.row_mut(i).iter_mut().zip(z.row(i)) {
                *a += b;
            }
        }
    }
    Ok(y)
}
