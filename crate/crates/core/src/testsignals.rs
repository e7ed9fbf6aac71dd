//! Ground-truth signals and synthetic band-limiting.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::DftPlan;
use crate::model::{BandlimitedSpectrum, FrequencyGrid, HermitianSpectrum, TimeSignal};

/// Placement of the sampling window relative to `t = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Window {
    /// `[−t_max/2, t_max/2]`, samples in circular order.
    #[default]
    Symmetric,
    /// `[0, t_max)`.
    Causal,
}

/// `f(t) = Σ_{n=1}^{K} (1/n)·tⁿ·e^{−n|t|}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpSumSignal {
    pub n_terms: u32,
    pub window: Window,
}

impl Default for ExpSumSignal {
    fn default() -> Self {
        Self {
            n_terms: 10,
            window: Window::Symmetric,
        }
    }
}

impl ExpSumSignal {
    pub fn new(n_terms: u32, window: Window) -> Result<Self> {
        if n_terms == 0 {
            return Err(Error::InvalidInput("n_terms must be >= 1".into()));
        }
        Ok(Self { n_terms, window })
    }

    pub fn eval(&self, t: f64) -> f64 {
        let a = t.abs();
        (1..=self.n_terms)
            .map(|n| {
                let nf = n as f64;
                let sign = if t < 0.0 && n % 2 == 1 { -1.0 } else { 1.0 };
                let mag = if a > 1.0 {
                    (nf * a.ln() - nf * a - nf.ln()).exp()
                } else {
                    a.powi(n as i32) * (-nf * a).exp() / nf
                };
                sign * mag
            })
            .sum()
    }

    /// Sample times for `len` points at `t_step` under this window.
    pub fn times(&self, len: usize, t_step: f64) -> Vec<f64> {
        match self.window {
            Window::Causal => (0..len).map(|j| j as f64 * t_step).collect(),
            Window::Symmetric => {
                let half = len.div_ceil(2);
                (0..len)
                    .map(|j| {
                        if j < half {
                            j as f64 * t_step
                        } else {
                            (j as f64 - len as f64) * t_step
                        }
                    })
                    .collect()
            }
        }
    }

    pub fn sample(&self, len: usize, t_step: f64) -> Result<TimeSignal> {
        let samples = self.times(len, t_step).into_iter().map(|t| self.eval(t)).collect();
        TimeSignal::new(samples, t_step)
    }

    /// Exact mean of `f` over the continuous window of length `t_max`.
    pub fn window_mean(&self, t_max: f64) -> f64 {
        let integral: f64 = (1..=self.n_terms)
            .map(|n| {
                let nf = n as f64;
                match self.window {
                    Window::Causal => half_line_moment(n, t_max) / nf,
                    Window::Symmetric if n % 2 == 0 => 2.0 * half_line_moment(n, t_max / 2.0) / nf,
                    Window::Symmetric => 0.0,
                }
            })
            .sum();
        integral / t_max
    }
}

/// `∫₀^T tⁿ e^{−nt} dt = γ(n+1, nT)/n^{n+1}`.
fn half_line_moment(n: u32, upper: f64) -> f64 {
    let nf = n as f64;
    lower_gamma_int(n + 1, nf * upper) / nf.powi(n as i32 + 1)
}

/// Lower incomplete gamma `γ(a, x)` for integer `a ≥ 1`.
fn lower_gamma_int(a: u32, x: f64) -> f64 {
    let af = a as f64;
    let ln_gamma: f64 = (1..a).map(|k| (k as f64).ln()).sum();
    if x <= 0.0 {
        return 0.0;
    }
    if x < af + 1.0 {
        // x^a e^{−x} Σ_k x^k / (a(a+1)…(a+k))
        let mut term = 1.0 / af;
        let mut sum = term;
        for k in 1..1000 {
            term *= x / (af + k as f64);
            sum += term;
            if term < sum * 1e-17 {
                break;
            }
        }
        (af * x.ln() - x).exp() * sum
    } else {
        // Γ(a) − Γ(a, x), Γ(a, x) = (a−1)!·e^{−x}·Σ_{k<a} x^k/k!
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..a {
            term *= x / k as f64;
            sum += term;
        }
        let upper = (ln_gamma - x).exp() * sum;
        ln_gamma.exp() - upper
    }
}

pub fn exp_sum(len: usize, t_step: f64, window: Window, n_terms: u32) -> Result<TimeSignal> {
    ExpSumSignal::new(n_terms, window)?.sample(len, t_step)
}

/// Frequency grid (DC missing) matching an odd-length signal.
pub fn signal_grid(sig: &TimeSignal, n_missing: usize) -> Result<FrequencyGrid> {
    let len = sig.len();
    if len < 5 || len.is_multiple_of(2) {
        return Err(Error::InvalidInput(format!(
            "signal length must be odd and >= 5, got {len}"
        )));
    }
    let half = (len - 1) / 2;
    if n_missing == 0 || n_missing >= half {
        return Err(Error::InvalidInput(format!(
            "n_missing must be in 1..{half}, got {n_missing}"
        )));
    }
    let dw = 2.0 * PI / (len as f64 * sig.t_step());
    FrequencyGrid::with_missing(dw, n_missing, half - n_missing + 1)
}

/// Full two-sided spectrum of an odd-length signal, DC included.
pub fn full_spectrum(sig: &TimeSignal) -> Result<HermitianSpectrum> {
    let grid = signal_grid(sig, 1)?;
    HermitianSpectrum::from_signal(sig, grid)
}

/// Forward transform, keeping only the bins at and above `n_missing·Δω`.
pub fn bandlimit(sig: &TimeSignal, n_missing: usize) -> Result<BandlimitedSpectrum> {
    let grid = signal_grid(sig, n_missing)?;
    let full_grid = signal_grid(sig, 1)?;
    let plan = DftPlan::new(sig.len());
    let full = HermitianSpectrum::from_signal_with(sig, full_grid, &plan);
    let values = (n_missing..n_missing + grid.n_bins())
        .map(|k| full.at(k as isize))
        .collect();
    BandlimitedSpectrum::new(grid, values)
}
