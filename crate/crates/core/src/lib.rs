//! Reconstruction of real impulse responses from band-limited spectra that
//! lack their DC bin.
//!
//! The measured bins are mirrored into a Hermitian spectrum, passed through a
//! Paul-wavelet analysis/synthesis pair and the DC value is refined
//! iteratively from how the low bins react ([`recovery::recover`]). Touchstone
//! and CSV readers feed the loop; [`diagnostics`] checks causality and
//! passivity of the data.

pub mod csvio;
pub mod diagnostics;
pub mod error;
mod fourier;
pub mod model;
pub mod parallel;
pub mod recovery;
pub mod testsignals;
pub mod touchstone;
pub mod wavelet;

pub use error::{Error, Result};
pub use model::{
    compare, hermitian_extend, parseval_energy, signal_energy, spectrum_from_samples, BandlimitedSpectrum,
    ErrorMetrics, ExtractedSpectrum, FrequencyGrid, HermitianSpectrum, TimeSignal,
};
pub use parallel::{with_threads, Execution};
pub use recovery::{recover, ReconstructionReport, RecoveryConfig};
pub use touchstone::{parse_touchstone, write_touchstone, SParameterSet};
pub use wavelet::{ScaleVector, WaveletSpec};
