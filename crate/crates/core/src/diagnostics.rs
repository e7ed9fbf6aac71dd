//! Causality and passivity checks.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::HermitianSpectrum;
use crate::parallel::{map_rows, Execution};
use crate::touchstone::SParameterSet;

/// Slack on `|λ| > 1` so that enforced bins, which land on 1 up to
/// rounding, are not flagged again.
pub const PASSIVITY_TOL: f64 = 1e-12;

/// Smallest `‖v‖` used in the residual, relative to `‖u‖`.
pub const RESIDUAL_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CausalityReport {
    /// `‖v − v̂‖₂ / ‖v‖₂` with `v̂` the Kramers-Kronig prediction of `Im X` from `Re X`.
    pub kk_residual_rel: f64,
    /// Share of signal energy at `t < 0`.
    pub precursor_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PassivityReport {
    pub max_eig_mag: f64,
    /// Largest eigenvalue magnitude per frequency index.
    pub per_bin: Vec<f64>,
    pub offending_bins: Vec<usize>,
    pub passive: bool,
    pub criterion: &'static str,
}

const CRITERION: &str = "largest eigenvalue magnitude of S per bin; singular values are not checked";

/// Compares `Im X` with the negated discrete Hilbert transform of `Re X`.
///
/// The transform multiplies the inverse DFT of `Re X` by `sign(t)` and
/// transforms back, which is the `−i·sign` multiplier over the frequency axis.
pub fn check_causality(spec: &HermitianSpectrum) -> CausalityReport {
    let grid = *spec.grid();
    let m = spec.half_len();
    let even: Vec<Complex64> = spec.values().iter().map(|v| Complex64::new(v.re, 0.0)).collect();
    let even = HermitianSpectrum::new(grid, even).expect("real part of a Hermitian spectrum is Hermitian");
    let x_even = even.to_signal();
    let odd: Vec<f64> = x_even
        .samples()
        .iter()
        .enumerate()
        .map(|(n, &x)| match n {
            0 => 0.0,
            n if n <= m => x,
            _ => -x,
        })
        .collect();
    let odd = crate::model::TimeSignal::new(odd, x_even.t_step()).expect("finite samples");
    let predicted = HermitianSpectrum::from_signal(&odd, grid).expect("same grid");

    let mut diff_sq = 0.0;
    let mut v_sq = 0.0;
    let mut u_sq = 0.0;
    for (v, p) in spec.values().iter().zip(predicted.values()) {
        diff_sq += (v.im - p.im).powi(2);
        v_sq += v.im * v.im;
        u_sq += v.re * v.re;
    }
    // A purely real spectrum has v = 0; rounding in v̂ is then measured against ‖u‖.
    let floor = (RESIDUAL_FLOOR * u_sq.sqrt()).max(1e-30);
    let kk_residual_rel = diff_sq.sqrt() / v_sq.sqrt().max(floor);

    let x = spec.to_signal();
    let s = x.samples();
    let total: f64 = s.iter().map(|v| v * v).sum();
    let precursor_fraction = if total > 0.0 {
        let negative: f64 = s[m + 1..].iter().map(|v| v * v).sum();
        ((negative + 0.5 * s[0] * s[0]) / total).clamp(0.0, 1.0)
    } else {
        0.0
    };
    CausalityReport {
        kk_residual_rel,
        precursor_fraction,
    }
}

fn max_eig_mag(net: &SParameterSet, k: usize) -> f64 {
    let m = net.matrix(k);
    if net.n_ports() == 1 {
        return m[(0, 0)].norm();
    }
    m.schur()
        .eigenvalues()
        .expect("complex Schur form is triangular")
        .iter()
        .fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn check_passivity(net: &SParameterSet) -> Result<PassivityReport> {
    check_passivity_with(net, Execution::default())
}

pub fn check_passivity_with(net: &SParameterSet, exec: Execution) -> Result<PassivityReport> {
    let n = net.n_ports();
    if net.matrices().iter().any(|m| m.len() != n * n) {
        return Err(Error::ShapeMismatch("S matrix is not square".into()));
    }
    let per_bin = map_rows(net.len(), exec, |k| max_eig_mag(net, k));
    let offending_bins: Vec<usize> = per_bin
        .iter()
        .enumerate()
        .filter(|(_, &m)| m > 1.0 + PASSIVITY_TOL)
        .map(|(k, _)| k)
        .collect();
    Ok(PassivityReport {
        max_eig_mag: per_bin.iter().copied().fold(0.0, f64::max),
        passive: offending_bins.is_empty(),
        offending_bins,
        per_bin,
        criterion: CRITERION,
    })
}

/// Divides every offending bin by its largest eigenvalue magnitude.
pub fn enforce_passivity(net: &SParameterSet) -> Result<SParameterSet> {
    let report = check_passivity(net)?;
    let mut matrices = net.matrices().to_vec();
    for &k in &report.offending_bins {
        let scale = report.per_bin[k];
        for z in &mut matrices[k] {
            *z /= scale;
        }
    }
    Ok(net.with_matrices(matrices))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{FrequencyGrid, TimeSignal};
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn causal_pair(dw: f64, n: usize) -> HermitianSpectrum {
        let grid = FrequencyGrid::with_missing(dw, 1, n).unwrap();
        let pos: Vec<Complex64> = (1..=n)
            .map(|k| {
                let w = k as f64 * dw;
                c(1.0 / (1.0 + w * w), -w / (1.0 + w * w))
            })
            .collect();
        crate::model::HermitianSpectrum::new(grid, {
            let mut v: Vec<Complex64> = pos.iter().rev().map(|z| z.conj()).collect();
            v.push(c(1.0, 0.0));
            v.extend(&pos);
            v
        })
        .unwrap()
    }

    #[test]
    fn exponential_pair_is_causal() {
        let r = check_causality(&causal_pair(0.5, 1024));
        assert!(r.kk_residual_rel < 0.05, "{r:?}");
        assert!(r.precursor_fraction < 0.05, "{r:?}");
    }

    #[test]
    fn residual_shrinks_with_refinement() {
        let mut last = f64::INFINITY;
        for n in [128, 256, 512, 1024, 2048] {
            let r = check_causality(&causal_pair(0.5, n)).kk_residual_rel;
            assert!(r < last, "{n}: {r} vs {last}");
            last = r;
        }
    }

    #[test]
    fn even_pulse_splits_energy() {
        let len = 201;
        let ts = 0.1;
        let samples = (0..len)
            .map(|n| {
                let t = if n <= len / 2 { n as f64 } else { n as f64 - len as f64 } * ts;
                (-t * t).exp()
            })
            .collect();
        let sig = TimeSignal::new(samples, ts).unwrap();
        let grid = crate::testsignals::signal_grid(&sig, 1).unwrap();
        let spec = HermitianSpectrum::from_signal(&sig, grid).unwrap();
        let r = check_causality(&spec);
        assert!((r.precursor_fraction - 0.5).abs() < 1e-12);
    }

    #[test]
    fn delta_spectrum_is_consistent() {
        let grid = FrequencyGrid::with_missing(1.0, 1, 50).unwrap();
        let spec = HermitianSpectrum::new(grid, vec![c(0.5, 0.0); 101]).unwrap();
        let r = check_causality(&spec);
        assert!(r.kk_residual_rel < 1e-3, "{r:?}");
    }

    #[test]
    fn zero_spectrum() {
        let grid = FrequencyGrid::with_missing(1.0, 1, 4).unwrap();
        let spec = HermitianSpectrum::new(grid, vec![c(0.0, 0.0); 9]).unwrap();
        let r = check_causality(&spec);
        assert_eq!(r.kk_residual_rel, 0.0);
        assert_eq!(r.precursor_fraction, 0.0);
    }

    fn set_of(mats: Vec<Vec<Complex64>>) -> SParameterSet {
        let n = (mats[0].len() as f64).sqrt() as usize;
        let f = (1..=mats.len()).map(|k| k as f64).collect();
        SParameterSet::new(n, f, mats, 50.0).unwrap()
    }

    fn diag(a: f64, b: f64) -> Vec<Complex64> {
        vec![c(a, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(b, 0.0)]
    }

    #[test]
    fn diagonal_passive() {
        let r = check_passivity(&set_of(vec![diag(0.5, 0.5); 10])).unwrap();
        assert!(r.passive);
        assert!((r.max_eig_mag - 0.5).abs() < 1e-15);
    }

    #[test]
    fn single_offender() {
        let mut mats = vec![diag(0.5, 0.5); 10];
        mats[7] = diag(1.2, 0.1);
        let net = set_of(mats);
        let r = check_passivity(&net).unwrap();
        assert_eq!(r.offending_bins, vec![7]);
        assert!((r.max_eig_mag - 1.2).abs() < 1e-14);
        let fixed = enforce_passivity(&net).unwrap();
        assert!((fixed.get(7, 1, 1).re - 1.0).abs() < 1e-14);
        assert!((fixed.get(7, 2, 2).re - 0.1 / 1.2).abs() < 1e-15);
        for k in (0..10).filter(|&k| k != 7) {
            assert_eq!(fixed.matrices()[k], net.matrices()[k]);
        }
    }

    #[test]
    fn exchange_matrix_is_boundary_passive() {
        let r = check_passivity(&set_of(vec![vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]])).unwrap();
        assert!((r.max_eig_mag - 1.0).abs() < 1e-14);
        assert!(r.passive);
    }

    #[test]
    fn passive_input_untouched() {
        let net = set_of(vec![diag(0.3, -0.9); 3]);
        assert_eq!(enforce_passivity(&net).unwrap(), net);
    }

    fn arb_net() -> impl Strategy<Value = SParameterSet> {
        (1usize..=4, 1usize..8).prop_flat_map(|(n, nf)| {
            proptest::collection::vec((-3.0f64..3.0, -3.0f64..3.0), n * n * nf).prop_map(move |v| {
                let zs: Vec<Complex64> = v.into_iter().map(|(a, b)| c(a, b)).collect();
                set_of(zs.chunks(n * n).map(|m| m.to_vec()).collect())
            })
        })
    }

    proptest! {
        #[test]
        fn enforcement_bounds_and_is_idempotent(net in arb_net()) {
            let before = check_passivity(&net).unwrap();
            let once = enforce_passivity(&net).unwrap();
            let after = check_passivity(&once).unwrap();
            prop_assert!(after.passive);
            prop_assert!(after.max_eig_mag <= 1.0 + PASSIVITY_TOL);
            for (a, b) in after.per_bin.iter().zip(&before.per_bin) {
                prop_assert!(*a <= *b * (1.0 + 1e-12));
            }
            prop_assert_eq!(enforce_passivity(&once).unwrap(), once);
        }

        #[test]
        fn precursor_fraction_in_unit_interval(vals in proptest::collection::vec(-5.0f64..5.0, 9)) {
            let sig = TimeSignal::new(vals, 0.1).unwrap();
            let grid = crate::testsignals::signal_grid(&sig, 1).unwrap();
            let r = check_causality(&HermitianSpectrum::from_signal(&sig, grid).unwrap());
            prop_assert!((0.0..=1.0).contains(&r.precursor_fraction));
            prop_assert!(r.kk_residual_rel >= 0.0);
        }
    }
}
