//! Grid, spectrum and signal types shared by every other module.
//!
//! Spectra use the continuous-transform scaling `X(ω_k) = T_s · Σ_n x_n e^{-iω_k t_n}`
//! so that `(Δω/2π)·Σ|X|²` and `T_s·Σx²` agree. Time signals are stored in
//! circular DFT order: sample 0 sits at `t = 0`, the first half of the buffer
//! covers positive times and the second half negative times.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::DftPlan;

/// Relative tolerance for conjugate symmetry checks.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Uniform grid of retained positive-frequency bins.
///
/// Bin `i` (0-based) sits at `omega_start + i·delta_omega`. The bins below
/// `omega_start`, DC included, are missing and counted by `n_missing`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    omega_start: f64,
    delta_omega: f64,
    n_bins: usize,
    n_missing: usize,
}

impl FrequencyGrid {
    pub fn new(omega_start: f64, delta_omega: f64, n_bins: usize) -> Result<Self> {
        if !(delta_omega.is_finite() && delta_omega > 0.0) {
            return Err(Error::Grid(format!("delta_omega must be > 0, got {delta_omega}")));
        }
        if !(omega_start.is_finite() && omega_start > 0.0) {
            return Err(Error::Grid(format!("omega_start must be > 0, got {omega_start}")));
        }
        if n_bins < 2 {
            return Err(Error::Grid(format!("need at least 2 bins, got {n_bins}")));
        }
        let ratio = omega_start / delta_omega;
        let n_missing = ratio.round();
        if (omega_start - n_missing * delta_omega).abs() >= 1e-9 * delta_omega {
            return Err(Error::Grid(format!(
                "omega_start {omega_start} is not a multiple of delta_omega {delta_omega}"
            )));
        }
        Ok(Self {
            omega_start,
            delta_omega,
            n_bins,
            n_missing: n_missing as usize,
        })
    }

    /// Grid whose first retained bin is `n_missing·Δω`.
    pub fn with_missing(delta_omega: f64, n_missing: usize, n_bins: usize) -> Result<Self> {
        if n_missing == 0 {
            return Err(Error::Grid("at least the DC bin must be missing".into()));
        }
        Self::new(n_missing as f64 * delta_omega, delta_omega, n_bins)
    }

    pub fn omega_start(&self) -> f64 {
        self.omega_start
    }

    pub fn delta_omega(&self) -> f64 {
        self.delta_omega
    }

    pub fn n_bins(&self) -> usize {
        self.n_bins
    }

    pub fn n_missing(&self) -> usize {
        self.n_missing
    }

    /// Angular frequency of retained bin `i` (0-based).
    pub fn omega(&self, i: usize) -> f64 {
        self.omega_start + i as f64 * self.delta_omega
    }

    /// Highest retained frequency `ω_N`.
    pub fn omega_max(&self) -> f64 {
        self.omega(self.n_bins - 1)
    }

    /// Number of positive slots in the two-sided layout, `M = n_missing − 1 + N`.
    pub fn half_len(&self) -> usize {
        self.n_missing - 1 + self.n_bins
    }

    /// Length `2M + 1` of the two-sided spectrum and of the time signal.
    pub fn dft_len(&self) -> usize {
        2 * self.half_len() + 1
    }

    /// Sampling period `2π/(Δω·(2M+1))` of the matching time signal.
    pub fn t_step(&self) -> f64 {
        2.0 * PI / (self.delta_omega * self.dft_len() as f64)
    }

    pub(crate) fn same_as(&self, other: &FrequencyGrid) -> bool {
        self.n_bins == other.n_bins
            && self.n_missing == other.n_missing
            && (self.delta_omega - other.delta_omega).abs() <= 1e-12 * self.delta_omega
    }
}

/// One-sided complex samples on the retained bins of a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandlimitedSpectrum {
    grid: FrequencyGrid,
    values: Vec<Complex64>,
}

impl BandlimitedSpectrum {
    pub fn new(grid: FrequencyGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.n_bins() {
            return Err(Error::ShapeMismatch(format!(
                "{} values for a grid of {} bins",
                values.len(),
                grid.n_bins()
            )));
        }
        if let Some(i) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::InvalidInput(format!("non-finite sample at bin {i}")));
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }
}

/// Two-sided conjugate-symmetric spectrum `[X(−ω_M) … X(0) … X(ω_M)]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HermitianSpectrum {
    grid: FrequencyGrid,
    values: Vec<Complex64>,
}

impl HermitianSpectrum {
    /// Validates length, a real DC slot and conjugate symmetry.
    pub fn new(grid: FrequencyGrid, values: Vec<Complex64>) -> Result<Self> {
        let m = grid.half_len();
        if values.len() != 2 * m + 1 {
            return Err(Error::ShapeMismatch(format!(
                "expected {} two-sided samples, got {}",
                2 * m + 1,
                values.len()
            )));
        }
        if values[m].im != 0.0 {
            return Err(Error::InvalidInput("DC slot must be real".into()));
        }
        for i in 1..=m {
            let pos = values[m + i];
            let neg = values[m - i];
            let scale = pos.norm().max(neg.norm()).max(f64::MIN_POSITIVE);
            if (neg - pos.conj()).norm() > SYMMETRY_TOL * scale {
                return Err(Error::InvalidInput(format!("conjugate symmetry broken at bin {i}")));
            }
        }
        Ok(Self { grid, values })
    }

    /// Builds the spectrum from its non-negative half `[X(0), X(ω_1) … X(ω_M)]`,
    /// mirroring the negative wing exactly.
    pub(crate) fn from_positive_half(grid: FrequencyGrid, dc: f64, positive: &[Complex64]) -> Self {
        let m = grid.half_len();
        debug_assert_eq!(positive.len(), m);
        let mut values = Vec::with_capacity(2 * m + 1);
        values.extend(positive.iter().rev().map(|v| v.conj()));
        values.push(Complex64::new(dc, 0.0));
        values.extend_from_slice(positive);
        Self { grid, values }
    }

    /// Forward transform of a time signal onto `grid`, scaled by `T_s`.
    pub fn from_signal(sig: &TimeSignal, grid: FrequencyGrid) -> Result<Self> {
        let len = grid.dft_len();
        if sig.len() != len {
            return Err(Error::ShapeMismatch(format!(
                "signal has {} samples, grid needs {len}",
                sig.len()
            )));
        }
        let plan = DftPlan::new(len);
        Ok(Self::from_signal_with(sig, grid, &plan))
    }

    pub(crate) fn from_signal_with(sig: &TimeSignal, grid: FrequencyGrid, plan: &DftPlan) -> Self {
        let ts = sig.t_step();
        let mut buf: Vec<Complex64> = sig.samples().iter().map(|&x| Complex64::new(x, 0.0)).collect();
        plan.forward(&mut buf);
        let m = grid.half_len();
        let positive: Vec<Complex64> = buf[1..=m].iter().map(|v| v * ts).collect();
        Self::from_positive_half(grid, buf[0].re * ts, &positive)
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Number of positive slots `M`.
    pub fn half_len(&self) -> usize {
        self.grid.half_len()
    }

    pub fn dc(&self) -> f64 {
        self.values[self.half_len()].re
    }

    /// Value at `k·Δω` for `−M ≤ k ≤ M`.
    pub fn at(&self, k: isize) -> Complex64 {
        self.values[(self.half_len() as isize + k) as usize]
    }

    /// Samples reordered to DFT index order `[X(0), X(ω_1) … X(ω_M), X(−ω_M) … X(−ω_1)]`.
    pub fn to_dft_order(&self) -> Vec<Complex64> {
        let m = self.half_len();
        let mut out = Vec::with_capacity(self.values.len());
        out.extend_from_slice(&self.values[m..]);
        out.extend_from_slice(&self.values[..m]);
        out
    }

    /// Complex inverse transform, `x_n = (Δω/2π)·Σ X_k e^{iω_k t_n}`.
    pub fn inverse_complex(&self) -> Vec<Complex64> {
        let plan = DftPlan::new(self.values.len());
        self.inverse_complex_with(&plan)
    }

    pub(crate) fn inverse_complex_with(&self, plan: &DftPlan) -> Vec<Complex64> {
        let ts = self.grid.t_step();
        let mut buf = self.to_dft_order();
        plan.inverse(&mut buf);
        for v in buf.iter_mut() {
            *v /= ts;
        }
        buf
    }

    /// Real time signal whose forward transform is this spectrum.
    pub fn to_signal(&self) -> TimeSignal {
        let plan = DftPlan::new(self.values.len());
        self.to_signal_with(&plan)
    }

    pub(crate) fn to_signal_with(&self, plan: &DftPlan) -> TimeSignal {
        let samples = self.inverse_complex_with(plan).into_iter().map(|v| v.re).collect();
        TimeSignal {
            samples,
            t_step: self.grid.t_step(),
        }
    }
}

/// Real samples on a uniform time grid, circular DFT order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSignal {
    t_step: f64,
    samples: Vec<f64>,
}

impl TimeSignal {
    pub fn new(samples: Vec<f64>, t_step: f64) -> Result<Self> {
        if !(t_step.is_finite() && t_step > 0.0) {
            return Err(Error::InvalidInput(format!("t_step must be > 0, got {t_step}")));
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite sample at index {i}")));
        }
        Ok(Self { t_step, samples })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn t_step(&self) -> f64 {
        self.t_step
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Time of each sample; indices past the midpoint are negative times.
    pub fn times(&self) -> Vec<f64> {
        let len = self.samples.len();
        let half = len.div_ceil(2);
        (0..len)
            .map(|j| {
                if j < half {
                    j as f64 * self.t_step
                } else {
                    (j as f64 - len as f64) * self.t_step
                }
            })
            .collect()
    }

    pub fn mean(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }
}

/// Error of a reconstruction against a reference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorMetrics {
    pub l2_rel: f64,
    pub linf_abs: f64,
    pub dc_abs_err: f64,
}

/// Mirrors a one-sided spectrum into a conjugate-symmetric two-sided one.
///
/// Missing bins between DC and `ω_1` are zero-filled in both wings.
pub fn hermitian_extend(spec: &BandlimitedSpectrum, dc_value: f64) -> Result<HermitianSpectrum> {
    if !dc_value.is_finite() {
        return Err(Error::InvalidInput(format!("dc value must be finite, got {dc_value}")));
    }
    let grid = *spec.grid();
    let gap = grid.n_missing() - 1;
    let mut positive = vec![Complex64::new(0.0, 0.0); grid.half_len()];
    positive[gap..].copy_from_slice(spec.values());
    Ok(HermitianSpectrum::from_positive_half(grid, dc_value, &positive))
}

/// Spectral energy `(Δω/2π)·Σ|X(ω_k)|²`.
pub fn parseval_energy(spec: &HermitianSpectrum) -> f64 {
    let dw = spec.grid().delta_omega();
    dw / (2.0 * PI) * spec.values().iter().map(|v| v.norm_sqr()).sum::<f64>()
}

/// Time-domain energy `T_s·Σx²`.
pub fn signal_energy(sig: &TimeSignal) -> f64 {
    sig.t_step() * sig.samples().iter().map(|v| v * v).sum::<f64>()
}

pub fn compare(sig: &TimeSignal, reference: &TimeSignal) -> Result<ErrorMetrics> {
    if sig.len() != reference.len() {
        return Err(Error::ShapeMismatch(format!(
            "signal has {} samples, reference {}",
            sig.len(),
            reference.len()
        )));
    }
    if (sig.t_step() - reference.t_step()).abs() > 1e-9 * reference.t_step() {
        return Err(Error::ShapeMismatch(format!(
            "t_step {} differs from reference t_step {}",
            sig.t_step(),
            reference.t_step()
        )));
    }
    let mut diff_sq = 0.0;
    let mut ref_sq = 0.0;
    let mut linf: f64 = 0.0;
    for (a, b) in sig.samples().iter().zip(reference.samples()) {
        let d = a - b;
        diff_sq += d * d;
        ref_sq += b * b;
        linf = linf.max(d.abs());
    }
    let l2_rel = if ref_sq > 0.0 {
        (diff_sq / ref_sq).sqrt()
    } else if diff_sq == 0.0 {
        0.0
    } else {
        return Err(Error::InvalidInput(
            "relative error against an all-zero reference is undefined".into(),
        ));
    };
    Ok(ErrorMetrics {
        l2_rel,
        linf_abs: linf,
        dc_abs_err: (sig.mean() - reference.mean()).abs(),
    })
}

/// Relative tolerance on the spacing of sampled frequencies.
pub const UNIFORM_TOL: f64 = 1e-6;

/// A band-limited spectrum built from sampled data.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtractedSpectrum {
    pub spectrum: BandlimitedSpectrum,
    /// The sample at `ω = 0`, removed so that recovery still has a DC to estimate.
    pub dropped_dc: Option<Complex64>,
}

/// Builds a band-limited spectrum from samples at ascending angular
/// frequencies. A leading `ω = 0` sample is dropped and reported.
pub fn spectrum_from_samples(omegas: &[f64], values: &[Complex64]) -> Result<ExtractedSpectrum> {
    if omegas.len() != values.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} frequencies for {} values",
            omegas.len(),
            values.len()
        )));
    }
    let start = usize::from(omegas.first() == Some(&0.0));
    let dropped_dc = (start == 1).then(|| values[0]);
    let omegas = &omegas[start..];
    if omegas.len() < 2 {
        return Err(Error::Grid(format!(
            "need at least 2 non-DC frequencies, got {}",
            omegas.len()
        )));
    }
    let dw = (omegas[omegas.len() - 1] - omegas[0]) / (omegas.len() - 1) as f64;
    if !(dw.is_finite() && dw > 0.0) {
        return Err(Error::Grid("frequencies must be ascending".into()));
    }
    for (k, w) in omegas.windows(2).enumerate() {
        if ((w[1] - w[0]) - dw).abs() > UNIFORM_TOL * dw {
            return Err(Error::Grid(format!(
                "frequency spacing is not uniform at index {}",
                k + start + 1
            )));
        }
    }
    let ratio = omegas[0] / dw;
    let k = ratio.round();
    if k < 1.0 || (ratio - k).abs() > UNIFORM_TOL * ratio.max(1.0) {
        return Err(Error::Grid(format!(
            "lowest frequency {} rad/s is not a multiple of the spacing {dw}",
            omegas[0]
        )));
    }
    let grid = FrequencyGrid::with_missing(dw, k as usize, omegas.len())?;
    Ok(ExtractedSpectrum {
        spectrum: BandlimitedSpectrum::new(grid, values[start..].to_vec())?,
        dropped_dc,
    })
}
