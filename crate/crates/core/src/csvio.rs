//! CSV interchange: spectra (`omega_rad_s,re,im`) and signals (`t,x`).
//!
//! Lines starting with `#` are comments. A `# n_missing=k` comment records
//! how many low bins a band-limited file lacks.

use std::fmt::Write as _;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{
    spectrum_from_samples, BandlimitedSpectrum, ExtractedSpectrum, HermitianSpectrum, TimeSignal, UNIFORM_TOL,
};

pub const SPECTRUM_HEADER: &str = "omega_rad_s,re,im";
pub const SIGNAL_HEADER: &str = "t,x";

/// Rows of a spectrum CSV on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumTable {
    pub omegas: Vec<f64>,
    pub values: Vec<Complex64>,
    /// Value of a `# n_missing=k` comment, if present.
    pub n_missing: Option<usize>,
}

impl SpectrumTable {
    /// Spectrum for reconstruction; a row at `ω = 0` is dropped and reported.
    pub fn to_spectrum(&self) -> Result<ExtractedSpectrum> {
        spectrum_from_samples(&self.omegas, &self.values)
    }

    /// Drops the lowest `n_missing` bins of a table that starts at DC.
    pub fn bandlimit(&self, n_missing: usize) -> Result<BandlimitedSpectrum> {
        if self.omegas.first() != Some(&0.0) {
            return Err(Error::InvalidInput(
                "band-limiting needs a spectrum that starts at DC".into(),
            ));
        }
        if n_missing == 0 || n_missing + 2 > self.omegas.len() {
            return Err(Error::InvalidInput(format!(
                "n_missing must be in 1..={}, got {n_missing}",
                self.omegas.len().saturating_sub(2)
            )));
        }
        Ok(spectrum_from_samples(&self.omegas[n_missing..], &self.values[n_missing..])?.spectrum)
    }
}

/// Numeric rows tagged with their 1-based line number.
type Rows = Vec<(usize, Vec<f64>)>;

fn records(text: &str, header: &str) -> Result<(Rows, Vec<String>)> {
    let mut comments = Vec::new();
    let mut rows = Vec::new();
    let mut seen_header = false;
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(c) = line.strip_prefix('#') {
            comments.push(c.trim().to_string());
            continue;
        }
        if !seen_header {
            let got: Vec<&str> = line.split(',').map(str::trim).collect();
            let want: Vec<&str> = header.split(',').collect();
            if got != want {
                return Err(Error::format(
                    line_no,
                    format!("expected header '{header}', got '{line}'"),
                ));
            }
            seen_header = true;
            continue;
        }
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(line.as_bytes());
        let record = reader
            .records()
            .next()
            .transpose()
            .map_err(|e| Error::format(line_no, e.to_string()))?
            .ok_or_else(|| Error::format(line_no, "empty record"))?;
        let width = header.split(',').count();
        if record.len() != width {
            return Err(Error::format(
                line_no,
                format!("expected {width} fields, got {}", record.len()),
            ));
        }
        let values = record
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::format(line_no, format!("bad number '{f}'")))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push((line_no, values));
    }
    if !seen_header {
        return Err(Error::format(None, format!("missing header '{header}'")));
    }
    Ok((rows, comments))
}

/// Parses a spectrum CSV, enforcing ascending uniform frequencies.
pub fn parse_spectrum_csv(text: &str) -> Result<SpectrumTable> {
    let (rows, comments) = records(text, SPECTRUM_HEADER)?;
    if rows.len() < 2 {
        return Err(Error::format(None, "need at least 2 spectrum rows"));
    }
    let mut n_missing = None;
    for c in &comments {
        if let Some(v) = c.strip_prefix("n_missing=") {
            n_missing = Some(
                v.trim()
                    .parse()
                    .map_err(|_| Error::format(None, format!("bad n_missing comment '{c}'")))?,
            );
        }
    }
    let omegas: Vec<f64> = rows.iter().map(|(_, r)| r[0]).collect();
    let dw = omegas[1] - omegas[0];
    if omegas[0] < 0.0 {
        return Err(Error::format(rows[0].0, "negative frequency"));
    }
    for (w, (line, _)) in omegas.windows(2).zip(&rows[1..]) {
        if w[1] <= w[0] || dw.is_nan() || ((w[1] - w[0]) - dw).abs() > UNIFORM_TOL * dw {
            return Err(Error::format(*line, "frequencies are not ascending on a uniform grid"));
        }
    }
    Ok(SpectrumTable {
        omegas,
        values: rows.iter().map(|(_, r)| Complex64::new(r[1], r[2])).collect(),
        n_missing,
    })
}

fn spectrum_rows(out: &mut String, omegas: impl Iterator<Item = f64>, values: &[Complex64]) {
    for (w, v) in omegas.zip(values) {
        let _ = writeln!(out, "{w},{},{}", v.re, v.im);
    }
}

/// Writes the retained bins with their `n_missing` comment.
pub fn spectrum_csv(spec: &BandlimitedSpectrum) -> String {
    let grid = spec.grid();
    let mut out = format!("# n_missing={}\n{SPECTRUM_HEADER}\n", grid.n_missing());
    spectrum_rows(&mut out, (0..grid.n_bins()).map(|i| grid.omega(i)), spec.values());
    out
}

/// Writes the non-negative half of a full spectrum, DC first.
pub fn hermitian_csv(spec: &HermitianSpectrum) -> String {
    let dw = spec.grid().delta_omega();
    let mut out = format!("{SPECTRUM_HEADER}\n");
    spectrum_rows(
        &mut out,
        (0..).map(|k| k as f64 * dw),
        &spec.values()[spec.half_len()..],
    );
    out
}

/// Writes a signal in ascending time.
pub fn signal_csv(sig: &TimeSignal) -> String {
    let mut rows: Vec<(f64, f64)> = sig.times().into_iter().zip(sig.samples().iter().copied()).collect();
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out = format!("{SIGNAL_HEADER}\n");
    for (t, x) in rows {
        let _ = writeln!(out, "{t},{x}");
    }
    out
}

/// Parses a `t,x` CSV written by [`signal_csv`] back into circular order.
pub fn parse_signal_csv(text: &str) -> Result<TimeSignal> {
    let (rows, _) = records(text, SIGNAL_HEADER)?;
    if rows.len() < 2 {
        return Err(Error::format(None, "need at least 2 signal rows"));
    }
    let ts: Vec<f64> = rows.iter().map(|(_, r)| r[0]).collect();
    let step = ts[1] - ts[0];
    if step.is_nan() || step <= 0.0 {
        return Err(Error::format(None, "times must be ascending"));
    }
    for (w, (line, _)) in ts.windows(2).zip(&rows[1..]) {
        if ((w[1] - w[0]) - step).abs() > UNIFORM_TOL * step {
            return Err(Error::format(*line, "times are not uniformly spaced"));
        }
    }
    let zero = ts
        .iter()
        .position(|t| t.abs() <= UNIFORM_TOL * step)
        .ok_or_else(|| Error::format(None, "no sample at t = 0"))?;
    let mut samples: Vec<f64> = rows.iter().map(|(_, r)| r[1]).collect();
    samples.rotate_left(zero);
    let sig = TimeSignal::new(samples, (ts[ts.len() - 1] - ts[0]) / (ts.len() - 1) as f64)?;
    let expected = sig.times();
    let mut sorted = expected.clone();
    sorted.sort_by(f64::total_cmp);
    if sorted.iter().zip(&ts).any(|(a, b)| (a - b).abs() > UNIFORM_TOL * step) {
        return Err(Error::format(
            None,
            "time axis does not match a circular grid centred on t = 0",
        ));
    }
    Ok(sig)
}
