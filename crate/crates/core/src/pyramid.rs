//! Mallat's pyramid with border-free detail coefficients.
//!
//! Indexing: octave `j` detail coefficient `k` (zero based) is
//! `D(2^j, k) = sum_m g_j[m] Y(2^j k + m)` where `g_j` is the composed
//! filter returned by [`composed_filter`]. A coefficient is retained only if
//! its whole support `2^j k .. 2^j k + len(g_j) - 1` lies inside the
//! observed series, so no padding ever enters a retained value.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filters::FilterPair;

/// `p x n` real array, one row per component.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesMatrix {
    p: usize,
    n: usize,
    data: Vec<f64>,
}

impl SeriesMatrix {
    pub fn new(p: usize, n: usize, data: Vec<f64>) -> Result<Self> {
        if p == 0 || n == 0 {
            return Err(Error::InvalidInput(format!("empty series ({p} x {n})")));
        }
        if data.len() != p * n {
            return Err(Error::Dimension(format!(
                "expected {} values for {p} x {n}, got {}",
                p * n,
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite value at component {}, time {}",
                i / n,
                i % n
            )));
        }
        Ok(SeriesMatrix { p, n, data })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let p = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Dimension("rows of unequal length".into()));
        }
        Self::new(p, n, rows.concat())
    }

    pub fn zeros(p: usize, n: usize) -> Self {
        SeriesMatrix { p, n, data: vec![0.0; p * n] }
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.n)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, i: usize, t: usize) -> f64 {
        self.data[i * self.n + t]
    }
}

/// Octave-0 approximation: the series itself.
pub fn init_approximation(y: &SeriesMatrix) -> SeriesMatrix {
    y.clone()
}

/// Number of valid (unpadded) outputs of one decimating filter pass.
pub fn step_output_len(len: usize, taps: usize) -> usize {
    if len < taps {
        0
    } else {
        (len - taps) / 2 + 1
    }
}

/// One pyramid step: `A(2^{j+1},k) = sum_m u_m A(2^j, 2k+m)` and likewise
/// for the detail with `v`.
pub fn pyramid_step(a: &[f64], f: &FilterPair) -> Result<(Vec<f64>, Vec<f64>)> {
    let taps = f.support_length();
    if a.len() < taps {
        return Err(Error::OctaveExhausted { len: a.len(), taps });
    }
    let out = step_output_len(a.len(), taps);
    let mut approx = Vec::with_capacity(out);
    let mut detail = Vec::with_capacity(out);
    for k in 0..out {
        let window = &a[2 * k..2 * k + taps];
        let mut s_a = 0.0;
        let mut s_d = 0.0;
        for ((x, u), v) in window.iter().zip(&f.low_pass).zip(&f.high_pass) {
            s_a += u * x;
            s_d += v * x;
        }
        approx.push(s_a);
        detail.push(s_d);
    }
    Ok((approx, detail))
}

/// Length of the composed octave-`j` filter: `(2^j - 1)(T - 1) + 1`.
pub fn composed_len(j: u32, taps: usize) -> usize {
    ((1usize << j) - 1) * (taps - 1) + 1
}

/// Closed-form count of border-free coefficients at octave `j`.
pub fn border_free_count(n: usize, j: u32, taps: usize) -> usize {
    let len = composed_len(j, taps);
    if n < len {
        0
    } else {
        (n - len) / (1usize << j) + 1
    }
}

/// Index range `[k_lo, k_hi]` (1-based time, as in the continuous-support
/// formulation) with `2^-j T <= k <= 2^-j (n+1) - T`, for a scaling function
/// supported on `[0, T]`. This is a conservative subset of the coefficients
/// kept by [`transform`]; it is exposed for comparison only.
pub fn support_index_range(n: usize, j: u32, t_support: usize) -> Option<(i64, i64)> {
    let scale = (1u64 << j) as f64;
    let lo = (t_support as f64 / scale).ceil() as i64;
    let hi = (((n + 1) as f64) / scale - t_support as f64).floor() as i64;
    (hi >= lo).then_some((lo, hi))
}

/// Effective detail filter of octave `j` (`1 <= j <= 12`):
/// `D(2^j, k) = sum_m g[m] Y(2^j k + m)`.
pub fn composed_filter(j: u32, f: &FilterPair) -> Vec<f64> {
    assert!((1..=12).contains(&j), "octave {j} outside 1..=12");
    let taps = f.support_length();
    // approx[m]: octave-(j-1) approximation weights; start from the identity.
    let mut approx = vec![1.0];
    for level in 0..j {
        let stride = 1usize << level;
        let len = composed_len(level + 1, taps);
        let mut next_a = vec![0.0; len];
        let mut next_d = vec![0.0; len];
        for i in 0..taps {
            for (m, &w) in approx.iter().enumerate() {
                next_a[stride * i + m] += f.low_pass[i] * w;
                next_d[stride * i + m] += f.high_pass[i] * w;
            }
        }
        if level + 1 == j {
            return next_d;
        }
        approx = next_a;
    }
    unreachable!()
}

/// Border-free details of one octave, `p x n_j` row-major.
#[derive(Clone, Debug)]
pub struct OctaveDetails {
    pub octave: u32,
    pub n_j: usize,
    pub data: Vec<f64>,
}

impl OctaveDetails {
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n_j..(i + 1) * self.n_j]
    }

    /// Detail vector `D(2^j, k)` across components.
    pub fn vector(&self, k: usize, p: usize) -> Vec<f64> {
        (0..p).map(|i| self.data[i * self.n_j + k]).collect()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct OctaveManifest {
    pub octave: u32,
    pub n_j: usize,
    /// First and last sample index (zero based) covered by retained coefficients.
    pub trim_range: [usize; 2],
}

/// Detail coefficients for a set of octaves.
#[derive(Clone, Debug)]
pub struct DetailSet {
    pub p: usize,
    pub n: usize,
    pub filter: FilterPair,
    pub trimmed: bool,
    pub octaves: Vec<OctaveDetails>,
}

impl DetailSet {
    pub fn octave(&self, j: u32) -> Result<&OctaveDetails> {
        self.octaves.iter().find(|o| o.octave == j).ok_or(Error::MissingOctave(j))
    }

    pub fn octave_numbers(&self) -> Vec<u32> {
        self.octaves.iter().map(|o| o.octave).collect()
    }

    pub fn manifest(&self) -> Vec<OctaveManifest> {
        let taps = self.filter.support_length();
        self.octaves
            .iter()
            .map(|o| {
                let last = if o.n_j == 0 {
                    0
                } else {
                    (o.n_j - 1) * (1usize << o.octave) + composed_len(o.octave, taps) - 1
                };
                OctaveManifest { octave: o.octave, n_j: o.n_j, trim_range: [0, last] }
            })
            .collect()
    }
}

/// Transform every row of `y` to octaves `1..=j_max`.
pub fn transform(y: &SeriesMatrix, j_max: u32, f: &FilterPair) -> Result<DetailSet> {
    transform_range(y, 1, j_max, f)
}

/// Like [`transform`] but keeps only octaves `j_min..=j_max`.
pub fn transform_range(y: &SeriesMatrix, j_min: u32, j_max: u32, f: &FilterPair) -> Result<DetailSet> {
    if j_min == 0 || j_max < j_min {
        return Err(Error::InvalidInput(format!("invalid octave range {j_min}..={j_max}")));
    }
    let taps = f.support_length();
    for j in 1..=j_max {
        let available = border_free_count(y.n(), j, taps);
        if available < 2 {
            return Err(Error::InsufficientSamples { octave: j, available });
        }
    }

    let mut octaves: Vec<OctaveDetails> = (j_min..=j_max)
        .map(|j| {
            let n_j = border_free_count(y.n(), j, taps);
            OctaveDetails { octave: j, n_j, data: Vec::with_capacity(n_j * y.p()) }
        })
        .collect();

    for row in y.rows() {
        let mut approx = row.to_vec();
        for j in 1..=j_max {
            let (a, d) = pyramid_step(&approx, f)?;
            if j >= j_min {
                let slot = &mut octaves[(j - j_min) as usize];
                debug_assert_eq!(d.len(), slot.n_j);
                slot.data.extend_from_slice(&d);
            }
            approx = a;
        }
    }

    Ok(DetailSet { p: y.p(), n: y.n(), filter: f.clone(), trimmed: true, octaves })
}
