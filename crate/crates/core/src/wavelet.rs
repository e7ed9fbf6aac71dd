//! Paul-wavelet transform evaluated directly from a two-sided spectrum.
//!
//! The forward transform multiplies the spectrum by one analytic kernel row per
//! scale and inverse-transforms each product, so the translation axis is the
//! time grid of the spectrum's own inverse DFT. The inverse transform is the
//! single-sum delta reconstruction: real parts weighted by `1/√s`, normalized
//! by the discrete admissibility constant and a calibrated gain.

use std::f64::consts::LN_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::DftPlan;
use crate::model::{FrequencyGrid, HermitianSpectrum, TimeSignal};
use crate::parallel::{map_rows, Execution};

/// Default octave step of the scale ladder.
pub const DEFAULT_DS: f64 = 0.4875;
/// Default Paul order.
pub const DEFAULT_ORDER: u32 = 4;

/// Beyond this `s·ω` the kernel is evaluated in log space.
const LOG_SPACE_THRESHOLD: f64 = 700.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WaveletFamily {
    Paul,
}

/// Mother wavelet and its unit-energy spectrum constant `2^m/√(m·(2m−1)!)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveletSpec {
    family: WaveletFamily,
    order_m: u32,
    norm_const: f64,
}

impl WaveletSpec {
    pub fn paul(order_m: u32) -> Result<Self> {
        if order_m == 0 {
            return Err(Error::InvalidInput("Paul order must be >= 1".into()));
        }
        let m = order_m as f64;
        let ln_fact: f64 = (1..2 * order_m).map(|k| (k as f64).ln()).sum();
        let norm_const = (m * LN_2 - 0.5 * (m.ln() + ln_fact)).exp();
        Ok(Self {
            family: WaveletFamily::Paul,
            order_m,
            norm_const,
        })
    }

    pub fn family(&self) -> WaveletFamily {
        self.family
    }

    pub fn order(&self) -> u32 {
        self.order_m
    }

    pub fn norm_const(&self) -> f64 {
        self.norm_const
    }

    /// Unnormalized profile `x^m e^{−x}` for `x > 0`, zero otherwise.
    pub fn profile(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let m = self.order_m as f64;
        if x > LOG_SPACE_THRESHOLD {
            (m * x.ln() - x).exp()
        } else {
            x.powi(self.order_m as i32) * (-x).exp()
        }
    }

    /// Unit-energy spectrum `c·x^m e^{−x}`.
    pub fn spectrum(&self, x: f64) -> f64 {
        self.norm_const * self.profile(x)
    }
}

impl Default for WaveletSpec {
    fn default() -> Self {
        Self::paul(DEFAULT_ORDER).expect("default order is valid")
    }
}

/// Geometric ladder `s_k = s1·2^{(k−1)·ds}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleVector {
    s1: f64,
    ds: f64,
    /// Sampling period the default `s1 = 2·T` was derived from.
    nominal_t_step: f64,
    scales: Vec<f64>,
}

impl ScaleVector {
    pub fn geometric(s1: f64, ds: f64, n_s: usize) -> Result<Self> {
        if !(s1.is_finite() && s1 > 0.0) || !(ds.is_finite() && ds > 0.0) {
            return Err(Error::Scale(format!("s1 and ds must be > 0, got s1={s1}, ds={ds}")));
        }
        if n_s == 0 {
            return Err(Error::Scale("scale ladder needs at least one scale".into()));
        }
        let scales = (0..n_s).map(|k| s1 * (k as f64 * ds).exp2()).collect();
        Ok(Self {
            s1,
            ds,
            nominal_t_step: s1 / 2.0,
            scales,
        })
    }

    pub fn s1(&self) -> f64 {
        self.s1
    }

    pub fn ds(&self) -> f64 {
        self.ds
    }

    pub fn nominal_t_step(&self) -> f64 {
        self.nominal_t_step
    }

    pub fn n_s(&self) -> usize {
        self.scales.len()
    }

    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    pub fn largest(&self) -> f64 {
        *self.scales.last().expect("ladder is never empty")
    }

    /// First `n` scales of the ladder.
    pub fn truncated(&self, n: usize) -> Result<Self> {
        if n == 0 || n > self.n_s() {
            return Err(Error::Scale(format!("cannot keep {n} of {} scales", self.n_s())));
        }
        let mut out = self.clone();
        out.scales.truncate(n);
        Ok(out)
    }
}

/// Builds the scale ladder for `grid`.
///
/// Defaults: `s1 = 2·T` with `T = t_max/N = 1/ω_N`, `ds = 0.4875`. The count is
/// the largest `n_s` with `s1·2^{n_s·ds} ≤ N/ω_N`, at least one.
pub fn build_scales(grid: &FrequencyGrid, s1: Option<f64>, ds: Option<f64>) -> Result<ScaleVector> {
    let n = grid.n_bins() as f64;
    let omega_n = grid.omega_max();
    let t_nominal = 1.0 / omega_n;
    let s1 = s1.unwrap_or(2.0 * t_nominal);
    let ds = ds.unwrap_or(DEFAULT_DS);
    if !(s1.is_finite() && s1 > 0.0) || !(ds.is_finite() && ds > 0.0) {
        return Err(Error::Scale(format!("s1 and ds must be > 0, got s1={s1}, ds={ds}")));
    }
    let span = n / (s1 * omega_n);
    if span <= 1.0 {
        return Err(Error::Scale(format!("s1·ω_N = {} must be below N = {n}", s1 * omega_n)));
    }
    let bound = span.ln() / (ds * LN_2);
    let n_s = (bound.floor() as usize).max(1);
    let mut ladder = ScaleVector::geometric(s1, ds, n_s)?;
    ladder.nominal_t_step = t_nominal;
    Ok(ladder)
}

/// Kernel rows `μ_k·(s_k ω)^m e^{−s_k ω}` over the two-sided layout.
///
/// Columns follow [`HermitianSpectrum`] order; DC and negative-frequency
/// columns are zero. `μ_k = √(Δω·L)·c·√s_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletKernelMatrix {
    spec: WaveletSpec,
    scales: ScaleVector,
    grid: FrequencyGrid,
    mu: Vec<f64>,
    rows: Vec<Vec<f64>>,
}

impl WaveletKernelMatrix {
    pub fn scales(&self) -> &ScaleVector {
        &self.scales
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn spec(&self) -> &WaveletSpec {
        &self.spec
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.rows[k]
    }

    pub fn n_cols(&self) -> usize {
        self.grid.dft_len()
    }

    /// Returns a copy with an extra all-zero row appended (zero weight).
    pub fn with_zero_row(&self, scale: f64) -> Self {
        let mut out = self.clone();
        out.scales.scales.push(scale);
        out.mu.push(0.0);
        out.rows.push(vec![0.0; self.n_cols()]);
        out
    }
}

pub fn build_kernel(spec: &WaveletSpec, scales: &ScaleVector, grid: &FrequencyGrid) -> WaveletKernelMatrix {
    build_kernel_with(spec, scales, grid, Execution::default())
}

pub fn build_kernel_with(
    spec: &WaveletSpec,
    scales: &ScaleVector,
    grid: &FrequencyGrid,
    exec: Execution,
) -> WaveletKernelMatrix {
    let m = grid.half_len();
    let len = grid.dft_len();
    let dw = grid.delta_omega();
    let prefactor = (dw * len as f64).sqrt() * spec.norm_const();
    let mu: Vec<f64> = scales.scales().iter().map(|s| prefactor * s.sqrt()).collect();
    let rows = map_rows(scales.n_s(), exec, |k| {
        let s = scales.scales()[k];
        let mut row = vec![0.0; len];
        for p in 1..=m {
            row[m + p] = mu[k] * spec.profile(s * p as f64 * dw);
        }
        row
    });
    WaveletKernelMatrix {
        spec: *spec,
        scales: scales.clone(),
        grid: *grid,
        mu,
        rows,
    }
}

/// Wavelet coefficients `W(s_k, b_j)`, one row per scale, `b_j` on the time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CwtCoefficients {
    rows: Vec<Vec<Complex64>>,
    scales: ScaleVector,
    t_step: f64,
}

impl CwtCoefficients {
    pub fn rows(&self) -> &[Vec<Complex64>] {
        &self.rows
    }

    pub fn scales(&self) -> &ScaleVector {
        &self.scales
    }

    pub fn t_step(&self) -> f64 {
        self.t_step
    }

    pub fn n_b(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    /// CSV export with header `scale,b_index,re,im`, row-major.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("scale,b_index,re,im\n");
        for (s, row) in self.scales.scales().iter().zip(&self.rows) {
            for (j, w) in row.iter().enumerate() {
                out.push_str(&format!("{s},{j},{},{}\n", w.re, w.im));
            }
        }
        out
    }
}

pub fn cwt_from_spectrum(xhat: &HermitianSpectrum, kern: &WaveletKernelMatrix) -> Result<CwtCoefficients> {
    cwt_from_spectrum_with(xhat, kern, Execution::default())
}

pub fn cwt_from_spectrum_with(
    xhat: &HermitianSpectrum,
    kern: &WaveletKernelMatrix,
    exec: Execution,
) -> Result<CwtCoefficients> {
    let len = kern.n_cols();
    if xhat.values().len() != len || !xhat.grid().same_as(kern.grid()) {
        return Err(Error::ShapeMismatch(format!(
            "spectrum of length {} does not match kernel with {len} columns",
            xhat.values().len()
        )));
    }
    let m = xhat.half_len();
    let plan = DftPlan::new(len);
    let values = xhat.values();
    let rows = map_rows(kern.rows.len(), exec, |k| {
        let row = &kern.rows[k];
        // DFT order: slot 0 is DC, slots 1..=M the positive bins, the rest stay 0.
        let mut buf = vec![Complex64::new(0.0, 0.0); len];
        for p in 1..=m {
            buf[p] = values[m + p] * row[m + p];
        }
        plan.inverse(&mut buf);
        buf
    });
    Ok(CwtCoefficients {
        rows,
        scales: kern.scales.clone(),
        t_step: xhat.grid().t_step(),
    })
}

/// Inverse transform back to a real signal.
///
/// `raw_j = Σ_k Re W(s_k, b_j)/√s_k / c_psi`; the output is
/// `(raw − mean(raw))/mu_wav + dc_anchor`.
pub fn icwt(coef: &CwtCoefficients, c_psi: f64, mu_wav: f64, dc_anchor: f64) -> Result<TimeSignal> {
    if !(c_psi.is_finite() && c_psi > 0.0) {
        return Err(Error::InvalidInput(format!("c_psi must be > 0, got {c_psi}")));
    }
    if !(mu_wav.is_finite() && mu_wav > 0.0) {
        return Err(Error::InvalidInput(format!("mu_wav must be > 0, got {mu_wav}")));
    }
    if coef.rows.len() != coef.scales.n_s() {
        return Err(Error::ShapeMismatch(format!(
            "{} coefficient rows for {} scales",
            coef.rows.len(),
            coef.scales.n_s()
        )));
    }
    let n_b = coef.n_b();
    let mut raw = vec![0.0; n_b];
    for (row, s) in coef.rows.iter().zip(coef.scales.scales()) {
        if row.len() != n_b {
            return Err(Error::ShapeMismatch("ragged coefficient rows".into()));
        }
        let w = 1.0 / s.sqrt();
        for (acc, v) in raw.iter_mut().zip(row) {
            *acc += v.re * w;
        }
    }
    for v in raw.iter_mut() {
        *v /= c_psi;
    }
    let mean = raw.iter().sum::<f64>() / n_b.max(1) as f64;
    let samples = raw.into_iter().map(|v| (v - mean) / mu_wav + dc_anchor).collect();
    TimeSignal::new(samples, coef.t_step)
}

/// Discrete admissibility constant `C = Σ_k Re{WΔ_k}/√s_k`, with `WΔ_k` the
/// mean of kernel row `k` over all `2M+1` columns.
pub fn admissibility_constant(kern: &WaveletKernelMatrix) -> Result<f64> {
    let len = kern.n_cols() as f64;
    let c: f64 = kern
        .rows
        .iter()
        .zip(kern.scales.scales())
        .map(|(row, s)| row.iter().sum::<f64>() / len / s.sqrt())
        .sum();
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::Admissibility(format!(
            "admissibility constant {c} is not positive"
        )));
    }
    Ok(c)
}

/// The same scale-by-bin sum in the continuum normalization of
/// `∫|Ψ(ω)|²/|ω| dω`: the unit-energy wavelet spectrum is squared, the scale sum
/// carries the log-scale measure `ds·ln 2`, and the result is averaged over
/// the positive bins. Tends to `1/m` for the Paul wavelet as the grid grows.
pub fn continuum_admissibility(kern: &WaveletKernelMatrix) -> f64 {
    let grid = kern.grid;
    let m = grid.half_len();
    let dw = grid.delta_omega();
    let measure = kern.scales.ds() * LN_2;
    let total: f64 = (1..=m)
        .map(|p| {
            let omega = p as f64 * dw;
            kern.scales
                .scales()
                .iter()
                .map(|s| kern.spec.spectrum(s * omega).powi(2))
                .sum::<f64>()
        })
        .sum();
    measure * total / m as f64
}

/// Gain `μ_wav` of the delta reconstruction on this grid and ladder.
///
/// A unit-energy impulse at `t = 0` (flat spectrum over every slot) goes through
/// the forward and inverse transform with `μ_wav = 1` and its exact mean as
/// anchor; the ratio of reconstructed to true peak is returned.
pub fn calibrate_mu_wav(spec: &WaveletSpec, scales: &ScaleVector, grid: &FrequencyGrid) -> Result<f64> {
    let kern = build_kernel(spec, scales, grid);
    let c_psi = admissibility_constant(&kern)?;
    calibrate_with_kernel(&kern, c_psi, Execution::default())
}

pub(crate) fn calibrate_with_kernel(kern: &WaveletKernelMatrix, c_psi: f64, exec: Execution) -> Result<f64> {
    let grid = kern.grid;
    let ts = grid.t_step();
    let peak = 1.0 / ts.sqrt();
    let flat = Complex64::new(ts * peak, 0.0);
    let reference = HermitianSpectrum::from_positive_half(grid, flat.re, &vec![flat; grid.half_len()]);
    let coef = cwt_from_spectrum_with(&reference, kern, exec)?;
    let exact_mean = peak / grid.dft_len() as f64;
    let rec = icwt(&coef, c_psi, 1.0, exact_mean)?;
    let ratio = rec.samples()[0] / peak;
    if !(ratio.is_finite() && ratio > 1e-12) {
        return Err(Error::Calibration(format!("degenerate reconstruction gain {ratio}")));
    }
    Ok(ratio)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::hermitian_extend;
    use crate::model::BandlimitedSpectrum;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn grid(n: usize, dw: f64) -> FrequencyGrid {
        FrequencyGrid::with_missing(dw, 1, n).unwrap()
    }

    #[test]
    fn norm_const_closed_form() {
        let w = WaveletSpec::paul(4).unwrap();
        let expected = 16.0 / (4.0f64 * 5040.0).sqrt();
        assert_relative_eq!(w.norm_const(), expected, max_relative = 1e-12);
        assert!(WaveletSpec::paul(0).is_err());
        let w1 = WaveletSpec::paul(1).unwrap();
        assert_relative_eq!(w1.norm_const(), 2.0, max_relative = 1e-12);
    }

    #[test]
    fn worked_example_scale_count() {
        // ln(1000/(0.02·100)) / (0.4875·ln 2) = 18.39…
        let g = grid(1000, 0.1);
        let s = build_scales(&g, None, None).unwrap();
        assert_relative_eq!(s.nominal_t_step(), 0.01, max_relative = 1e-12);
        assert_relative_eq!(s.s1(), 0.02, max_relative = 1e-12);
        assert_eq!(s.n_s(), 18);
        assert!(s.largest() <= 1000.0 / 100.0);
    }

    #[test]
    fn second_scale_value() {
        let s = ScaleVector::geometric(0.02, 0.4875, 3).unwrap();
        assert_relative_eq!(s.scales()[1], 0.028_039, max_relative = 1e-4);
        assert_relative_eq!(s.scales()[1], 0.02 * 2f64.powf(0.4875), max_relative = 1e-14);
    }

    #[test]
    fn ladder_ratio_is_constant() {
        let s = build_scales(&grid(700, 0.3), Some(0.01), Some(0.3)).unwrap();
        for w in s.scales().windows(2) {
            assert!(w[1] > w[0]);
            assert_relative_eq!(w[1] / w[0], 0.3f64.exp2(), max_relative = 1e-12);
        }
    }

    #[test]
    fn scale_errors() {
        let g = grid(100, 1.0);
        assert!(matches!(build_scales(&g, Some(1.0), None), Err(Error::Scale(_))));
        assert!(matches!(build_scales(&g, Some(-1.0), None), Err(Error::Scale(_))));
        // Narrow span still gives one scale.
        let s = build_scales(&g, Some(0.9), None).unwrap();
        assert_eq!(s.n_s(), 1);
    }

    #[test]
    fn kernel_zero_on_non_positive_columns() {
        let g = grid(64, 0.5);
        let s = build_scales(&g, None, None).unwrap();
        let k = build_kernel(&WaveletSpec::default(), &s, &g);
        let m = g.half_len();
        for row in k.rows() {
            assert!(row[..=m].iter().all(|&v| v == 0.0));
            assert!(row.iter().all(|v| v.is_finite() && *v >= 0.0));
        }
    }

    #[test]
    fn kernel_value_at_profile_peak() {
        // s·ω = 4 exactly: entry = μ·4⁴·e⁻⁴.
        let g = grid(64, 1.0);
        let s = ScaleVector::geometric(0.5, 1.0, 2).unwrap();
        let k = build_kernel(&WaveletSpec::default(), &s, &g);
        let m = g.half_len();
        let v = k.row(0)[m + 8];
        assert_relative_eq!(v / k.mu()[0], 256.0 * (-4.0f64).exp(), max_relative = 1e-14);
        assert_relative_eq!(v / k.mu()[0], 4.6888, max_relative = 1e-4);
        let max = k.row(0).iter().cloned().fold(0.0, f64::max);
        assert_eq!(v, max);
    }

    #[test]
    fn kernel_peaks_follow_scale() {
        let g = grid(512, 0.05);
        let s = build_scales(&g, None, None).unwrap();
        let k = build_kernel(&WaveletSpec::default(), &s, &g);
        let m = g.half_len();
        for (row, sk) in k.rows().iter().zip(s.scales()) {
            let target = 4.0 / sk;
            if target > g.omega_max() || target < g.omega_start() {
                continue;
            }
            let argmax = (1..=m).max_by(|&a, &b| row[m + a].total_cmp(&row[m + b])).unwrap();
            let omega = argmax as f64 * g.delta_omega();
            assert!((omega - target).abs() <= g.delta_omega(), "peak {omega} vs {target}");
        }
        // Doubling the scale halves the peak frequency.
        let pair = ScaleVector::geometric(0.4, 1.0, 2).unwrap();
        let k2 = build_kernel(&WaveletSpec::default(), &pair, &g);
        let peak = |r: &[f64]| (1..=m).max_by(|&a, &b| r[m + a].total_cmp(&r[m + b])).unwrap() as f64;
        assert!((peak(k2.row(0)) / 2.0 - peak(k2.row(1))).abs() <= 1.0);
    }

    #[test]
    fn kernel_log_space_does_not_overflow() {
        let g = grid(4000, 10.0);
        let s = ScaleVector::geometric(1.0, 1.0, 2).unwrap();
        let k = build_kernel(&WaveletSpec::default(), &s, &g);
        assert!(k.rows().iter().flatten().all(|v| v.is_finite()));
        let w = WaveletSpec::default();
        assert_relative_eq!(
            w.profile(800.0),
            (4.0 * 800f64.ln() - 800.0).exp(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn cwt_of_zero_is_zero() {
        let g = grid(32, 1.0);
        let s = build_scales(&g, None, None).unwrap();
        let k = build_kernel(&WaveletSpec::default(), &s, &g);
        let zero = HermitianSpectrum::from_positive_half(g, 0.0, &vec![Complex64::new(0.0, 0.0); 32]);
        let c = cwt_from_spectrum(&zero, &k).unwrap();
        assert!(c.rows().iter().flatten().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn cwt_of_flat_spectrum_matches_direct_sum() {
        let n = 24;
        let g = grid(n, 0.7);
        let s = build_scales(&g, None, None).unwrap();
        let k = build_kernel(&WaveletSpec::default(), &s, &g);
        let ones = HermitianSpectrum::from_positive_half(g, 1.0, &vec![Complex64::new(1.0, 0.0); n]);
        let c = cwt_from_spectrum(&ones, &k).unwrap();
        let len = g.dft_len();
        let m = g.half_len();
        for (kk, row) in c.rows().iter().enumerate() {
            for (nn, got) in row.iter().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for j in 1..=m {
                    let phase = 2.0 * PI * (j * nn) as f64 / len as f64;
                    acc += k.row(kk)[m + j] * Complex64::from_polar(1.0, phase);
                }
                acc /= len as f64;
                assert!((got - acc).norm() <= 1e-12 * (1.0 + acc.norm()));
            }
        }
    }

    #[test]
    fn cwt_is_linear() {
        let n = 48;
        let g = grid(n, 0.3);
        let s = build_scales(&g, None, None).unwrap();
        let k = build_kernel(&WaveletSpec::default(), &s, &g);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let rand_spec = |rng: &mut ChaCha8Rng| {
            let v: Vec<Complex64> = (0..n)
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            hermitian_extend(&BandlimitedSpectrum::new(g, v).unwrap(), rng.random_range(-1.0..1.0)).unwrap()
        };
        let (x, y) = (rand_spec(&mut rng), rand_spec(&mut rng));
        let (a, b) = (1.7, -0.4);
        let combo: Vec<Complex64> = x.values().iter().zip(y.values()).map(|(p, q)| p * a + q * b).collect();
        let z = HermitianSpectrum::new(g, combo).unwrap();
        let (cx, cy, cz) = (
            cwt_from_spectrum(&x, &k).unwrap(),
            cwt_from_spectrum(&y, &k).unwrap(),
            cwt_from_spectrum(&z, &k).unwrap(),
        );
        for ((rx, ry), rz) in cx.rows().iter().zip(cy.rows()).zip(cz.rows()) {
            let norm = rz.iter().map(|v| v.norm()).fold(0.0, f64::max);
            for ((px, py), pz) in rx.iter().zip(ry).zip(rz) {
                assert!((px * a + py * b - pz).norm() <= 1e-10 * norm.max(1e-300));
            }
        }
    }

    #[test]
    fn cwt_shape_mismatch() {
        let k = build_kernel(
            &WaveletSpec::default(),
            &ScaleVector::geometric(0.1, 0.5, 3).unwrap(),
            &grid(16, 1.0),
        );
        let other = HermitianSpectrum::from_positive_half(grid(8, 1.0), 0.0, &[Complex64::new(0.0, 0.0); 8]);
        assert!(matches!(cwt_from_spectrum(&other, &k), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn icwt_zero_coefficients_give_anchor() {
        let scales = ScaleVector::geometric(0.1, 0.5, 3).unwrap();
        let coef = CwtCoefficients {
            rows: vec![vec![Complex64::new(0.0, 0.0); 9]; 3],
            scales,
            t_step: 0.1,
        };
        let x = icwt(&coef, 2.0, 1.5, 0.3).unwrap();
        assert!(x.samples().iter().all(|&v| v == 0.3));
    }

    #[test]
    fn icwt_anchor_is_affine() {
        let g = grid(40, 0.5);
        let s = build_scales(&g, None, None).unwrap();
        let k = build_kernel(&WaveletSpec::default(), &s, &g);
        let v: Vec<Complex64> = (1..=40).map(|p| Complex64::new(1.0 / p as f64, 0.2)).collect();
        let h = hermitian_extend(&BandlimitedSpectrum::new(g, v).unwrap(), 0.0).unwrap();
        let coef = cwt_from_spectrum(&h, &k).unwrap();
        let c = admissibility_constant(&k).unwrap();
        let a = icwt(&coef, c, 0.8, 0.1).unwrap();
        let b = icwt(&coef, c, 0.8, 0.1 + 2.5).unwrap();
        for (x, y) in a.samples().iter().zip(b.samples()) {
            assert_relative_eq!(y - x, 2.5, max_relative = 1e-12);
        }
        assert!(icwt(&coef, 0.0, 1.0, 0.0).is_err());
        assert!(icwt(&coef, 1.0, -1.0, 0.0).is_err());
    }

    #[test]
    fn admissibility_positive_and_zero_row_invariant() {
        let g = grid(128, 0.2);
        let s = build_scales(&g, None, None).unwrap();
        let k = build_kernel(&WaveletSpec::default(), &s, &g);
        let c = admissibility_constant(&k).unwrap();
        assert!(c > 0.0);
        let padded = k.with_zero_row(s.largest() * 2.0);
        assert_eq!(admissibility_constant(&padded).unwrap(), c);
    }

    #[test]
    fn continuum_admissibility_closed_form_by_quadrature() {
        // ∫₀^∞ (c ω⁴ e^{−ω})²/ω dω = c²·7!/2⁸ = 1/4, checked with composite Simpson.
        let w = WaveletSpec::default();
        let f = |x: f64| if x <= 0.0 { 0.0 } else { w.spectrum(x).powi(2) / x };
        let (a, b, n) = (0.0, 60.0, 60_000);
        let h = (b - a) / n as f64;
        let mut acc = f(a) + f(b);
        for i in 1..n {
            let x = a + i as f64 * h;
            acc += if i % 2 == 1 { 4.0 * f(x) } else { 2.0 * f(x) };
        }
        let integral = acc * h / 3.0;
        assert!((integral - 0.25).abs() < 1e-6, "{integral}");
    }

    #[test]
    fn calibration_is_deterministic_and_self_consistent() {
        let g = grid(256, 2.0 * PI / 513.0);
        let s = build_scales(&g, None, None).unwrap();
        let w = WaveletSpec::default();
        let mu1 = calibrate_mu_wav(&w, &s, &g).unwrap();
        let mu2 = calibrate_mu_wav(&w, &s, &g).unwrap();
        assert_eq!(mu1, mu2);

        let kern = build_kernel(&w, &s, &g);
        let c = admissibility_constant(&kern).unwrap();
        let ts = g.t_step();
        let peak = 1.0 / ts.sqrt();
        let flat = ts * peak;
        let reference = HermitianSpectrum::from_positive_half(g, flat, &vec![Complex64::new(flat, 0.0); 256]);
        let coef = cwt_from_spectrum(&reference, &kern).unwrap();
        let rec = icwt(&coef, c, mu1, peak / g.dft_len() as f64).unwrap();
        assert!((rec.samples()[0] - peak).abs() < 0.01 * peak);
    }

    #[test]
    fn calibration_near_paul4_delta_constant() {
        // Unit sampling period, so the gain is dimensionless.
        let g = grid(512, 2.0 * PI / 1025.0);
        let s = build_scales(&g, None, None).unwrap();
        let mu = calibrate_mu_wav(&WaveletSpec::default(), &s, &g).unwrap();
        assert!(mu > 1.132 / 3.0 && mu < 1.132 * 3.0, "{mu}");
    }
}
