//! Wavelet random matrices and their ordered spectra.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filters::FilterPair;
use crate::pyramid::{transform_range, DetailSet, SeriesMatrix};
use crate::tolerance;

/// `W(2^j) = (1/n_j) sum_k D(2^j,k) D(2^j,k)^T`, symmetrized.
pub fn wavelet_matrix(d: &DetailSet, j: u32) -> Result<DMatrix<f64>> {
    let oct = d.octave(j)?;
    if oct.n_j == 0 {
        return Err(Error::InsufficientSamples { octave: j, available: 0 });
    }
    let coeffs = DMatrix::from_row_slice(d.p, oct.n_j, &oct.data);
    let mut w = &coeffs * coeffs.transpose();
    w /= oct.n_j as f64;
    Ok(symmetrize(w))
}

fn symmetrize(w: DMatrix<f64>) -> DMatrix<f64> {
    let t = w.transpose();
    (w + t) * 0.5
}

/// Eigenvalues in ascending order, with matching eigenvector columns when
/// requested.
#[derive(Clone, Debug)]
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: Option<DMatrix<f64>>,
}

fn relative_asymmetry(w: &DMatrix<f64>) -> f64 {
    let scale = w.amax();
    if scale == 0.0 {
        return 0.0;
    }
    (w - w.transpose()).amax() / scale
}

/// Symmetric eigendecomposition; backed by nalgebra's Householder
/// tridiagonalization and implicit QR.
pub fn eigen_sym(w: &DMatrix<f64>, vectors: bool) -> Result<SymEigen> {
    if !w.is_square() {
        return Err(Error::Dimension(format!("{} x {} is not square", w.nrows(), w.ncols())));
    }
    if w.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("non-finite matrix entry".into()));
    }
    let asym = relative_asymmetry(w);
    if asym > tolerance::SYMMETRY {
        return Err(Error::NotSymmetric(asym));
    }
    let p = w.nrows();
    if p == 0 {
        return Ok(SymEigen { values: Vec::new(), vectors: vectors.then(|| DMatrix::zeros(0, 0)) });
    }
    let eig = SymmetricEigen::new(symmetrize(w.clone()));
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = vectors.then(|| DMatrix::from_fn(p, p, |r, c| eig.eigenvectors[(r, order[c])]));
    Ok(SymEigen { values, vectors })
}

/// Wavelet random matrix at one octave with its ascending eigenvalues.
#[derive(Clone, Debug)]
pub struct WaveletSpectrum {
    pub octave: u32,
    pub n_j: usize,
    pub matrix: DMatrix<f64>,
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Option<DMatrix<f64>>,
}

/// JSONL record for one octave.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SpectrumRecord {
    pub j: u32,
    pub n_j: usize,
    pub eigenvalues: Vec<f64>,
}

impl WaveletSpectrum {
    /// Decompose `matrix`; tiny negative eigenvalues (rounding on a PSD
    /// matrix) are clamped to zero.
    pub fn new(octave: u32, n_j: usize, matrix: DMatrix<f64>, vectors: bool) -> Result<Self> {
        let SymEigen { mut values, vectors } = eigen_sym(&matrix, vectors)?;
        let max = values.last().copied().unwrap_or(0.0).max(0.0);
        for v in values.iter_mut() {
            if *v < 0.0 {
                if *v < -tolerance::PSD_CLAMP * max {
                    return Err(Error::InvalidInput(format!(
                        "octave {octave}: matrix is not positive semidefinite (eigenvalue {v:e})"
                    )));
                }
                *v = 0.0;
            }
        }
        Ok(WaveletSpectrum { octave, n_j, matrix, eigenvalues: values, eigenvectors: vectors })
    }

    /// Spectrum known only through its eigenvalues (e.g. read back from
    /// JSONL); the matrix is the diagonal of the eigenvalues.
    pub fn from_eigenvalues(octave: u32, n_j: usize, mut eigenvalues: Vec<f64>) -> Self {
        eigenvalues.sort_by(f64::total_cmp);
        let matrix = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(eigenvalues.clone()));
        WaveletSpectrum { octave, n_j, matrix, eigenvalues, eigenvectors: None }
    }

    pub fn p(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace()
    }

    pub fn record(&self) -> SpectrumRecord {
        SpectrumRecord { j: self.octave, n_j: self.n_j, eigenvalues: self.eigenvalues.clone() }
    }
}

/// Spectra of `W(2^j)` for `j1 <= j <= j2`.
pub fn multi_scale_spectrum(y: &SeriesMatrix, j1: u32, j2: u32, f: &FilterPair) -> Result<Vec<WaveletSpectrum>> {
    let details = transform_range(y, j1, j2, f)?;
    spectra_from_details(&details)
}

/// Spectra of every octave held by `d`.
pub fn spectra_from_details(d: &DetailSet) -> Result<Vec<WaveletSpectrum>> {
    d.octaves
        .iter()
        .map(|o| {
            if o.n_j < d.p {
                log::warn!(
                    "octave {}: n_j = {} < p = {}, W is rank deficient",
                    o.octave,
                    o.n_j,
                    d.p
                );
            }
            WaveletSpectrum::new(o.octave, o.n_j, wavelet_matrix(d, o.octave)?, false)
        })
        .collect()
}

/// Scale- and coordinate-compensated latent matrix
/// `P_H^{-1} a^{-H - I/2} W_X(a 2^j) a^{-H^T - I/2} P_H^{-T}`.
#[derive(Clone, Debug)]
pub struct CompensatedMatrix {
    pub matrix: DMatrix<f64>,
    pub a: u64,
    pub octave: u32,
    pub h: Vec<f64>,
    pub p_h: DMatrix<f64>,
}

/// Compensate the latent wavelet matrix at scale `a 2^j` (`a` dyadic).
///
/// With `H = P_H diag(h) P_H^{-1}` one has
/// `P_H^{-1} a^{-H - I/2} = diag(a^{-h - 1/2}) P_H^{-1}`, which is what is
/// applied here.
pub fn compensated_b(d_x: &DetailSet, j: u32, a: u64, h: &[f64], p_h: &DMatrix<f64>) -> Result<CompensatedMatrix> {
    if a == 0 || !a.is_power_of_two() {
        return Err(Error::InvalidInput(format!("scale factor {a} is not dyadic")));
    }
    let r = h.len();
    if p_h.nrows() != r || p_h.ncols() != r || d_x.p != r {
        return Err(Error::Dimension(format!(
            "need r x r mixing and r-variate details (r = {r}, P_H {}x{}, details p = {})",
            p_h.nrows(),
            p_h.ncols(),
            d_x.p
        )));
    }
    let inv = p_h
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Singular("P_H is not invertible".into()))?;
    let octave = a.trailing_zeros() + j;
    let w_x = wavelet_matrix(d_x, octave)?;
    let scale = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        r,
        h.iter().map(|&hq| (a as f64).powf(-hq - 0.5)),
    ));
    let left = &scale * &inv;
    let b = &left * w_x * left.transpose();
    Ok(CompensatedMatrix { matrix: symmetrize(b), a, octave: j, h: h.to_vec(), p_h: p_h.clone() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filters::FilterPair;
    use crate::pyramid::OctaveDetails;

    fn details(p: usize, octave: u32, cols: &[Vec<f64>]) -> DetailSet {
        let n_j = cols.len();
        let mut data = vec![0.0; p * n_j];
        for (k, c) in cols.iter().enumerate() {
            for i in 0..p {
                data[i * n_j + k] = c[i];
            }
        }
        DetailSet {
            p,
            n: 0,
            filter: FilterPair::haar(),
            trimmed: true,
            octaves: vec![OctaveDetails { octave, n_j, data }],
        }
    }

    #[test]
    fn single_vector_outer_product() {
        let d = details(3, 1, &[vec![1.0, -2.0, 0.5]]);
        let w = wavelet_matrix(&d, 1).unwrap();
        let v = [1.0, -2.0, 0.5];
        for r in 0..3 {
            for c in 0..3 {
                assert_eq!(w[(r, c)], v[r] * v[c]);
            }
        }
    }

    #[test]
    fn orthonormal_columns_give_half_identity() {
        let d = details(2, 1, &[vec![1.0, 0.0], vec![0.0, 1.0]]);
        let w = wavelet_matrix(&d, 1).unwrap();
        assert_eq!(w, DMatrix::identity(2, 2) * 0.5);
    }

    #[test]
    fn missing_octave() {
        let d = details(2, 1, &[vec![1.0, 0.0]]);
        assert!(matches!(wavelet_matrix(&d, 3), Err(Error::MissingOctave(3))));
    }

    #[test]
    fn two_by_two_eigen() {
        let w = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let e = eigen_sym(&w, true).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-14 && (e.values[1] - 3.0).abs() < 1e-14);
        let v = e.vectors.unwrap();
        for i in 0..2 {
            let col = v.column(i);
            assert!((&w * col - col * e.values[i]).norm() < 1e-12);
        }
    }

    #[test]
    fn diagonal_sorted() {
        let w = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![3.0, -1.0, 2.0, 0.0]));
        assert_eq!(eigen_sym(&w, false).unwrap().values, vec![-1.0, 0.0, 2.0, 3.0]);
    }

    #[test]
    fn asymmetric_rejected() {
        let w = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.4, 1.0]);
        assert!(matches!(eigen_sym(&w, false), Err(Error::NotSymmetric(_))));
    }

    #[test]
    fn zero_matrix_is_legal() {
        let s = WaveletSpectrum::new(1, 4, DMatrix::zeros(3, 3), false).unwrap();
        assert_eq!(s.eigenvalues, vec![0.0; 3]);
    }

    #[test]
    fn scalar_compensation() {
        let d = details(1, 3, &[vec![2.0], vec![-1.0]]);
        let h = [0.7];
        let b = compensated_b(&d, 1, 4, &h, &DMatrix::identity(1, 1)).unwrap();
        let w = 2.5;
        let expected = 4f64.powf(-(2.0 * 0.7 + 1.0)) * w;
        assert!((b.matrix[(0, 0)] - expected).abs() < 1e-15);
    }

    #[test]
    fn compensation_rejects_singular_and_non_dyadic() {
        let d = details(2, 2, &[vec![1.0, 1.0]]);
        let h = [0.3, 0.8];
        assert!(compensated_b(&d, 1, 3, &h, &DMatrix::identity(2, 2)).is_err());
        let singular = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(matches!(compensated_b(&d, 1, 2, &h, &singular), Err(Error::Singular(_))));
    }
}
