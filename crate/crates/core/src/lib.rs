//! Wavelet eigenanalysis of high-dimensional signal-plus-noise fractional
//! processes.
//!
//! The pipeline is
//!
//! 1. [`synth`]: generate a latent fractional signal `X` (r components),
//!    mix it into `p` coordinates and add noise, `Y = P X + Z`;
//! 2. [`pyramid`]: run Mallat's pyramid on every component of `Y`, keeping
//!    only detail coefficients free of border effects;
//! 3. [`specmat`]: form the wavelet random matrix `W(2^j)` per octave and
//!    its ordered eigenvalues;
//! 4. [`estimate`]: regress the largest log-eigenvalues across octaves to
//!    recover the scaling exponents and the latent rank;
//! 5. [`harness`]: replicate the above as a seeded Monte Carlo experiment.

pub mod error;
pub mod estimate;
pub mod filters;
pub mod harness;
pub mod io;
pub mod pyramid;
pub mod rng;
pub mod specmat;
pub mod stats;
pub mod synth;
pub mod tolerance;

mod poly;

pub use error::{Error, Result};
pub use estimate::{
    estimate_hurst, estimate_rank, figure1_trajectories, regression_weights, validate_schedule,
    HurstEstimate, RankEstimate, RegressionWeights, ScheduleCheck,
};
pub use filters::{daubechies_filters, validate_filter, FilterPair, ValidationReport};
pub use harness::{
    clt_diagnostics, run_experiment, run_point, ExperimentConfig, ExperimentResult,
    ReplicationRecord, SchedulePoint,
};
pub use pyramid::{composed_filter, pyramid_step, transform, DetailSet, SeriesMatrix};
pub use specmat::{
    compensated_b, eigen_sym, multi_scale_spectrum, wavelet_matrix, CompensatedMatrix,
    WaveletSpectrum,
};
pub use synth::{GenerativeModel, Innovation, NoiseSpec, SignalKind};
