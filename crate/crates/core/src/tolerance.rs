//! Numeric tolerances shared across the crate.

/// Exact algebraic identities (normalizations, orthogonality, constraint sums).
pub const ALGEBRAIC: f64 = 1e-12;

/// Moment sums and other quantities that accumulate polynomial weights.
pub const MOMENT: f64 = 1e-8;

/// Composed-filter energy and brute-force convolution agreement.
pub const COMPOSED: f64 = 1e-10;

/// Relative negativity allowed on a PSD spectrum before it is clamped to zero.
pub const PSD_CLAMP: f64 = 1e-10;

/// Relative asymmetry accepted by the symmetric eigensolver.
pub const SYMMETRY: f64 = 1e-12;

/// Circulant eigenvalues below `-CIRCULANT_CLIP * max` abort the embedding;
/// smaller negative values are clipped to zero.
pub const CIRCULANT_CLIP: f64 = 1e-9;

/// Eigenvalues below this are treated as exact zeros (log = -inf).
pub const LOG_FLOOR: f64 = 1e-300;
