//! Touchstone v1 reader and writer.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{spectrum_from_samples, ExtractedSpectrum};

/// Largest port count accepted from a file name or caller.
pub const MAX_PORTS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum DataFormat {
    Ri,
    #[default]
    Ma,
    Db,
}

impl DataFormat {
    fn keyword(self) -> &'static str {
        match self {
            DataFormat::Ri => "RI",
            DataFormat::Ma => "MA",
            DataFormat::Db => "DB",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum FrequencyUnit {
    Hz,
    Khz,
    Mhz,
    #[default]
    Ghz,
}

impl FrequencyUnit {
    pub fn multiplier(self) -> f64 {
        match self {
            FrequencyUnit::Hz => 1.0,
            FrequencyUnit::Khz => 1e3,
            FrequencyUnit::Mhz => 1e6,
            FrequencyUnit::Ghz => 1e9,
        }
    }

    fn keyword(self) -> &'static str {
        match self {
            FrequencyUnit::Hz => "HZ",
            FrequencyUnit::Khz => "KHZ",
            FrequencyUnit::Mhz => "MHZ",
            FrequencyUnit::Ghz => "GHZ",
        }
    }
}

/// Network data: one `n_ports × n_ports` matrix per frequency, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SParameterSet {
    n_ports: usize,
    frequencies_hz: Vec<f64>,
    matrices: Vec<Vec<Complex64>>,
    reference_ohms: f64,
    #[serde(default)]
    warnings: Vec<String>,
}

impl SParameterSet {
    pub fn new(
        n_ports: usize,
        frequencies_hz: Vec<f64>,
        matrices: Vec<Vec<Complex64>>,
        reference_ohms: f64,
    ) -> Result<Self> {
        if n_ports == 0 {
            return Err(Error::InvalidInput("n_ports must be >= 1".into()));
        }
        if !(reference_ohms.is_finite() && reference_ohms > 0.0) {
            return Err(Error::InvalidInput(format!(
                "reference impedance must be > 0, got {reference_ohms}"
            )));
        }
        if matrices.len() != frequencies_hz.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} matrices for {} frequencies",
                matrices.len(),
                frequencies_hz.len()
            )));
        }
        if let Some(m) = matrices.iter().find(|m| m.len() != n_ports * n_ports) {
            return Err(Error::ShapeMismatch(format!(
                "matrix has {} entries, expected {}x{}",
                m.len(),
                n_ports,
                n_ports
            )));
        }
        if frequencies_hz.iter().any(|f| !(f.is_finite() && *f >= 0.0)) {
            return Err(Error::InvalidInput("frequencies must be finite and >= 0".into()));
        }
        if frequencies_hz.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput("frequencies must be strictly ascending".into()));
        }
        if matrices
            .iter()
            .flatten()
            .any(|z| !(z.re.is_finite() && z.im.is_finite()))
        {
            return Err(Error::InvalidInput("non-finite S-parameter".into()));
        }
        Ok(Self {
            n_ports,
            frequencies_hz,
            matrices,
            reference_ohms,
            warnings: Vec::new(),
        })
    }

    pub fn n_ports(&self) -> usize {
        self.n_ports
    }

    pub fn frequencies_hz(&self) -> &[f64] {
        &self.frequencies_hz
    }

    pub fn matrices(&self) -> &[Vec<Complex64>] {
        &self.matrices
    }

    pub fn reference_ohms(&self) -> f64 {
        self.reference_ohms
    }

    pub fn len(&self) -> usize {
        self.frequencies_hz.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies_hz.is_empty()
    }

    /// Parser warnings, e.g. a skipped noise block.
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// `S_ij` at frequency index `k`, ports 1-based.
    pub fn get(&self, k: usize, i: usize, j: usize) -> Complex64 {
        self.matrices[k][(i - 1) * self.n_ports + (j - 1)]
    }

    pub fn matrix(&self, k: usize) -> DMatrix<Complex64> {
        DMatrix::from_row_slice(self.n_ports, self.n_ports, &self.matrices[k])
    }

    pub(crate) fn with_matrices(&self, matrices: Vec<Vec<Complex64>>) -> Self {
        Self {
            matrices,
            ..self.clone()
        }
    }
}

struct Options {
    unit: FrequencyUnit,
    format: DataFormat,
    reference_ohms: f64,
}

fn parse_options(tokens: &[&str], line: usize) -> Result<Options> {
    let mut opts = Options {
        unit: FrequencyUnit::Ghz,
        format: DataFormat::Ma,
        reference_ohms: 50.0,
    };
    let mut it = tokens.iter();
    while let Some(tok) = it.next() {
        match tok.to_ascii_uppercase().as_str() {
            "HZ" => opts.unit = FrequencyUnit::Hz,
            "KHZ" => opts.unit = FrequencyUnit::Khz,
            "MHZ" => opts.unit = FrequencyUnit::Mhz,
            "GHZ" => opts.unit = FrequencyUnit::Ghz,
            "S" => {}
            "Y" | "Z" | "H" | "G" => {
                return Err(Error::format(line, format!("unsupported parameter type '{tok}'")));
            }
            "RI" => opts.format = DataFormat::Ri,
            "MA" => opts.format = DataFormat::Ma,
            "DB" => opts.format = DataFormat::Db,
            "R" => {
                let value = it
                    .next()
                    .ok_or_else(|| Error::format(line, "'R' without a resistance"))?;
                let r: f64 = value
                    .parse()
                    .map_err(|_| Error::format(line, format!("bad resistance '{value}'")))?;
                if !(r.is_finite() && r > 0.0) {
                    return Err(Error::format(line, format!("resistance must be > 0, got {value}")));
                }
                opts.reference_ohms = r;
            }
            _ => return Err(Error::format(line, format!("unknown option '{tok}'"))),
        }
    }
    Ok(opts)
}

fn to_complex(a: f64, b: f64, format: DataFormat) -> Complex64 {
    match format {
        DataFormat::Ri => Complex64::new(a, b),
        DataFormat::Ma => Complex64::from_polar(a, b * PI / 180.0),
        DataFormat::Db => Complex64::from_polar(10f64.powf(a / 20.0), b * PI / 180.0),
    }
}

/// Data line: 1-based line number and its numbers.
struct DataLine {
    line: usize,
    values: Vec<f64>,
}

/// Infers the port count from the first record: a record starts on a line
/// with an odd number of values and holds `1 + 2n²` of them.
fn infer_ports(lines: &[DataLine]) -> Result<usize> {
    let first = &lines[0];
    if first.values.len().is_multiple_of(2) {
        return Err(Error::format(first.line, "record must start with a frequency"));
    }
    let mut count = first.values.len();
    for l in &lines[1..] {
        if !l.values.len().is_multiple_of(2) {
            break;
        }
        count += l.values.len();
    }
    let pairs = (count - 1) / 2;
    let n = (pairs as f64).sqrt().round() as usize;
    if n == 0 || n * n != pairs {
        return Err(Error::format(
            first.line,
            format!("record of {count} values is not 1 + 2n² for any port count"),
        ));
    }
    Ok(n)
}

/// Parses a Touchstone v1 document, inferring the port count from record arity.
pub fn parse_touchstone(bytes: &[u8]) -> Result<SParameterSet> {
    parse_touchstone_ports(bytes, None)
}

/// Like [`parse_touchstone`] with an optional known port count (from an `.sNp` name).
pub fn parse_touchstone_ports(bytes: &[u8], ports: Option<usize>) -> Result<SParameterSet> {
    if let Some(n) = ports {
        if n == 0 || n > MAX_PORTS {
            return Err(Error::InvalidInput(format!(
                "port count must be in 1..={MAX_PORTS}, got {n}"
            )));
        }
    }
    let mut options: Option<Options> = None;
    let mut data = Vec::new();
    for (idx, raw) in bytes.split(|&b| b == b'\n').enumerate() {
        let line = idx + 1;
        let text = std::str::from_utf8(raw).map_err(|_| Error::format(line, "line is not valid text"))?;
        let text = text.split('!').next().unwrap_or("").trim();
        if text.is_empty() {
            continue;
        }
        if let Some(rest) = text.strip_prefix('#') {
            if options.is_some() {
                return Err(Error::format(line, "duplicate option line"));
            }
            if !data.is_empty() {
                return Err(Error::format(line, "option line after network data"));
            }
            let tokens: Vec<&str> = rest.split_whitespace().collect();
            options = Some(parse_options(&tokens, line)?);
            continue;
        }
        if text.starts_with('[') {
            return Err(Error::format(line, "Touchstone 2.0 keywords are not supported"));
        }
        if options.is_none() {
            return Err(Error::format(line, "missing option line before network data"));
        }
        let values = text
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>()
                    .ok()
                    .filter(|v| !v.is_nan())
                    .ok_or_else(|| Error::format(line, format!("bad number '{tok}'")))
            })
            .collect::<Result<Vec<f64>>>()?;
        data.push(DataLine { line, values });
    }
    let opts = options.ok_or_else(|| Error::format(None, "missing option line"))?;
    if data.is_empty() {
        return Err(Error::format(None, "no network data"));
    }
    let n = match ports {
        Some(n) => n,
        None => infer_ports(&data)?,
    };
    let record_len = 1 + 2 * n * n;
    let mut warnings = Vec::new();
    let mut frequencies: Vec<f64> = Vec::new();
    let mut matrices = Vec::new();
    let mut record: Vec<f64> = Vec::with_capacity(record_len);
    let mut record_line = 0;
    for dl in &data {
        if record.is_empty() {
            record_line = dl.line;
            if n == 2 && dl.values.len() == 5 {
                if let Some(&last) = frequencies.last() {
                    if dl.values[0] * opts.unit.multiplier() <= last {
                        warnings.push(format!("noise parameters from line {} ignored", dl.line));
                        break;
                    }
                }
            }
        }
        record.extend_from_slice(&dl.values);
        if record.len() > record_len {
            return Err(Error::format(
                dl.line,
                format!("record has more than {record_len} values for {n} ports"),
            ));
        }
        if record.len() < record_len {
            continue;
        }
        let f = record[0] * opts.unit.multiplier();
        if !(f.is_finite() && f >= 0.0) {
            return Err(Error::format(record_line, format!("invalid frequency {}", record[0])));
        }
        if let Some(&last) = frequencies.last() {
            if f <= last {
                return Err(Error::format(record_line, "frequencies are not strictly increasing"));
            }
        }
        let mut m = vec![Complex64::new(0.0, 0.0); n * n];
        for (p, pair) in record[1..].chunks_exact(2).enumerate() {
            let z = to_complex(pair[0], pair[1], opts.format);
            if !(z.re.is_finite() && z.im.is_finite()) {
                return Err(Error::format(record_line, "non-finite S-parameter"));
            }
            // Two-port files list S11 S21 S12 S22.
            let slot = if n == 2 { [0, 2, 1, 3][p] } else { p };
            m[slot] = z;
        }
        frequencies.push(f);
        matrices.push(m);
        record.clear();
    }
    if !record.is_empty() {
        return Err(Error::format(
            record_line,
            format!("incomplete record: {} of {record_len} values", record.len()),
        ));
    }
    let mut set = SParameterSet::new(n, frequencies, matrices, opts.reference_ohms)?;
    set.warnings = warnings;
    Ok(set)
}

/// Port count from an `.sNp` extension, if any.
pub fn ports_from_path(path: &Path) -> Option<usize> {
    let ext = path.extension()?.to_str()?.to_ascii_lowercase();
    let digits = ext.strip_prefix('s')?.strip_suffix('p')?;
    digits.parse().ok().filter(|&n| n > 0 && n <= MAX_PORTS)
}

/// Reads a Touchstone file, taking the port count from the extension when present.
pub fn read_touchstone(path: &Path) -> Result<SParameterSet> {
    let bytes = std::fs::read(path).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
    parse_touchstone_ports(&bytes, ports_from_path(path))
}

fn pair(z: Complex64, format: DataFormat) -> (f64, f64) {
    match format {
        DataFormat::Ri => (z.re, z.im),
        DataFormat::Ma => (z.norm(), z.arg().to_degrees()),
        DataFormat::Db => (20.0 * z.norm().log10(), z.arg().to_degrees()),
    }
}

/// Serializes a set. Two-port data is written S11 S21 S12 S22; larger
/// networks row-major with at most four pairs per line.
pub fn write_touchstone(net: &SParameterSet, format: DataFormat, unit: FrequencyUnit) -> Result<String> {
    if net.is_empty() {
        return Err(Error::format(None, "cannot write a set with no frequencies"));
    }
    let n = net.n_ports;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# {} S {} R {}",
        unit.keyword(),
        format.keyword(),
        net.reference_ohms
    );
    for (f, m) in net.frequencies_hz.iter().zip(&net.matrices) {
        let _ = write!(out, "{}", f / unit.multiplier());
        if n <= 2 {
            let order: &[usize] = if n == 1 { &[0] } else { &[0, 2, 1, 3] };
            for &slot in order {
                let (a, b) = pair(m[slot], format);
                let _ = write!(out, " {a} {b}");
            }
            out.push('\n');
            continue;
        }
        let mut first = true;
        for row in m.chunks_exact(n) {
            for chunk in row.chunks(4) {
                if !first {
                    out.push_str("   ");
                }
                first = false;
                for z in chunk {
                    let (a, b) = pair(*z, format);
                    let _ = write!(out, " {a} {b}");
                }
                out.push('\n');
            }
        }
    }
    Ok(out)
}

/// Extracts `S_ij` (1-based) on the angular grid `ω = 2πf`.
pub fn extract_spectrum(net: &SParameterSet, i: usize, j: usize) -> Result<ExtractedSpectrum> {
    let n = net.n_ports;
    if !(1..=n).contains(&i) || !(1..=n).contains(&j) {
        return Err(Error::InvalidInput(format!("port pair ({i},{j}) outside 1..={n}")));
    }
    let omegas: Vec<f64> = net.frequencies_hz.iter().map(|f| 2.0 * PI * f).collect();
    let values: Vec<Complex64> = (0..net.len()).map(|k| net.get(k, i, j)).collect();
    spectrum_from_samples(&omegas, &values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn one_port_ri() {
        let set = parse_touchstone(b"# HZ S RI R 50\n1 0.5 0.0").unwrap();
        assert_eq!(set.n_ports(), 1);
        assert_eq!(set.frequencies_hz(), &[1.0]);
        assert_eq!(set.get(0, 1, 1), c(0.5, 0.0));
    }

    #[test]
    fn ghz_magnitude_angle() {
        let set = parse_touchstone(b"# GHZ S MA R 50\n1 1.0 90.0").unwrap();
        assert_eq!(set.frequencies_hz(), &[1e9]);
        let z = set.get(0, 1, 1);
        assert!(z.re.abs() <= 1e-12 && (z.im - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn decibel_magnitude() {
        let set = parse_touchstone(b"# HZ S DB R 50\n1 -6.0206 0").unwrap();
        let direct = 10f64.powf(-6.0206 / 20.0);
        assert_relative_eq!(set.get(0, 1, 1).re, direct, max_relative = 1e-15);
        assert!((set.get(0, 1, 1).re - 0.5).abs() < 5e-6);
    }

    #[test]
    fn defaults_and_comments() {
        let text = "! header\r\n#\r\n! more\r\n1 0.5 45 ! trailing\r\n2 0.25 0\r\n";
        let set = parse_touchstone(text.as_bytes()).unwrap();
        assert_eq!(set.frequencies_hz(), &[1e9, 2e9]);
        assert_eq!(set.reference_ohms(), 50.0);
        assert_relative_eq!(set.get(0, 1, 1).norm(), 0.5, max_relative = 1e-15);
    }

    #[test]
    fn two_port_column_order() {
        let text = "# hz s ri r 75\n10 1 0 2 0 3 0 4 0\n20 5 0 6 0\n 7 0 8 0\n";
        let set = parse_touchstone(text.as_bytes()).unwrap();
        assert_eq!(set.n_ports(), 2);
        assert_eq!(set.reference_ohms(), 75.0);
        assert_eq!(set.get(0, 2, 1), c(2.0, 0.0));
        assert_eq!(set.get(0, 1, 2), c(3.0, 0.0));
        assert_eq!(set.get(1, 2, 2), c(8.0, 0.0));
    }

    #[test]
    fn three_port_row_major() {
        let text = "# HZ S RI R 50\n1 11 0 12 0 13 0\n 21 0 22 0 23 0\n 31 0 32 0 33 0\n";
        let set = parse_touchstone(text.as_bytes()).unwrap();
        assert_eq!(set.n_ports(), 3);
        assert_eq!(set.get(0, 2, 3), c(23.0, 0.0));
    }

    #[test]
    fn noise_block_skipped() {
        let text = "# GHZ S MA R 50\n1 1 0 0 0 0 0 1 0\n2 1 0 0 0 0 0 1 0\n1 2.5 0.3 30 0.4\n2 2.6 0.3 31 0.4\n";
        let set = parse_touchstone(text.as_bytes()).unwrap();
        assert_eq!(set.len(), 2);
        assert_eq!(set.warnings().len(), 1);
    }

    #[test]
    fn format_errors_carry_lines() {
        let cases: [(&str, Option<usize>); 7] = [
            ("1 0.5 0", Some(1)),
            ("! c\n# HZ S RI R 50\n# HZ S RI R 50\n1 0.5 0", Some(3)),
            ("# HZ S RI R 50\n2 0.5 0\n1 0.5 0", Some(3)),
            ("# HZ S RI R 50\n1 0.5 0\n2 0.5", Some(2)),
            ("# HZ S RI R 50\n1 0.5 x", Some(2)),
            ("# HZ Z RI R 50\n1 0.5 0", Some(1)),
            ("# HZ S RI R 50\n", None),
        ];
        for (text, line) in cases {
            match parse_touchstone(text.as_bytes()) {
                Err(Error::Format { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }

    #[test]
    fn arity_mismatch_with_known_ports() {
        let err = parse_touchstone_ports(b"# HZ S RI R 50\n1 0.5 0 0.1 0\n", Some(1)).unwrap_err();
        assert!(matches!(err, Error::Format { line: Some(2), .. }));
    }

    #[test]
    fn extension_hint() {
        assert_eq!(ports_from_path(Path::new("a/b.S2P")), Some(2));
        assert_eq!(ports_from_path(Path::new("x.s12p")), Some(12));
        assert_eq!(ports_from_path(Path::new("x.csv")), None);
    }

    #[test]
    fn write_rejects_empty() {
        let set = SParameterSet::new(1, vec![], vec![], 50.0).unwrap();
        assert!(matches!(
            write_touchstone(&set, DataFormat::Ri, FrequencyUnit::Hz),
            Err(Error::Format { .. })
        ));
    }

    #[test]
    fn exchange_matrix_has_eight_columns() {
        let m = vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)];
        let set = SParameterSet::new(2, vec![1e6], vec![m], 50.0).unwrap();
        let text = write_touchstone(&set, DataFormat::Ri, FrequencyUnit::Mhz).unwrap();
        let data: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(data.len(), 1);
        assert_eq!(data[0].split_whitespace().count(), 9);
        assert_eq!(parse_touchstone(text.as_bytes()).unwrap(), set);
    }

    #[test]
    fn zero_entry_round_trips_in_db() {
        let set = SParameterSet::new(1, vec![1.0, 2.0], vec![vec![c(0.0, 0.0)], vec![c(0.3, -0.1)]], 50.0).unwrap();
        let text = write_touchstone(&set, DataFormat::Db, FrequencyUnit::Hz).unwrap();
        let back = parse_touchstone(text.as_bytes()).unwrap();
        assert_eq!(back.get(0, 1, 1), c(0.0, 0.0));
    }

    #[test]
    fn extract_grid_arithmetic() {
        let one = |fs: &[f64]| {
            let m = fs.iter().map(|&f| vec![c(f, 0.0)]).collect();
            SParameterSet::new(1, fs.to_vec(), m, 50.0).unwrap()
        };
        let e = extract_spectrum(&one(&[1.0, 2.0, 3.0]), 1, 1).unwrap();
        assert_relative_eq!(e.spectrum.grid().delta_omega(), 2.0 * PI, max_relative = 1e-15);
        assert_eq!(e.spectrum.grid().n_missing(), 1);
        assert!(e.dropped_dc.is_none());

        let e = extract_spectrum(&one(&[2.0, 4.0, 6.0]), 1, 1).unwrap();
        assert_eq!(e.spectrum.grid().n_missing(), 1);
        assert_relative_eq!(e.spectrum.grid().delta_omega(), 4.0 * PI, max_relative = 1e-15);

        let e = extract_spectrum(&one(&[4.0, 6.0, 8.0]), 1, 1).unwrap();
        assert_eq!(e.spectrum.grid().n_missing(), 2);

        let e = extract_spectrum(&one(&[0.0, 1.0, 2.0, 3.0]), 1, 1).unwrap();
        assert_eq!(e.dropped_dc, Some(c(0.0, 0.0)));
        assert_eq!(e.spectrum.values().len(), 3);

        assert!(matches!(
            extract_spectrum(&one(&[1.0, 2.0, 3.5]), 1, 1),
            Err(Error::Grid(_))
        ));
        assert!(matches!(
            extract_spectrum(&one(&[1.5, 2.5, 3.5]), 1, 1),
            Err(Error::Grid(_))
        ));
        assert!(matches!(
            extract_spectrum(&one(&[1.0, 2.0]), 2, 1),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn extract_selects_element() {
        let m = |k: f64| vec![c(11.0 * k, 0.0), c(12.0 * k, 0.0), c(21.0 * k, 0.0), c(22.0 * k, 0.0)];
        let set = SParameterSet::new(2, vec![1.0, 2.0], vec![m(1.0), m(2.0)], 50.0).unwrap();
        let e = extract_spectrum(&set, 2, 1).unwrap();
        assert_eq!(e.spectrum.values(), &[c(21.0, 0.0), c(42.0, 0.0)]);
    }

    fn arb_set() -> impl Strategy<Value = SParameterSet> {
        (1usize..=4, 1usize..6).prop_flat_map(|(n, nf)| {
            let freqs = proptest::collection::vec(1e-3f64..1e3, nf);
            let vals = proptest::collection::vec((-2.0f64..2.0, -2.0f64..2.0), nf * n * n);
            (Just(n), freqs, vals).prop_map(|(n, steps, vals)| {
                let mut f = 0.0;
                let freqs: Vec<f64> = steps
                    .iter()
                    .map(|s| {
                        f += s;
                        f
                    })
                    .collect();
                let zs: Vec<Complex64> = vals.into_iter().map(|(a, b)| c(a, b)).collect();
                let matrices = zs.chunks(n * n).map(|m| m.to_vec()).collect();
                SParameterSet::new(n, freqs, matrices, 50.0).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn write_then_parse_is_identity(
            set in arb_set(),
            format in prop_oneof![Just(DataFormat::Ri), Just(DataFormat::Ma), Just(DataFormat::Db)],
            unit in prop_oneof![Just(FrequencyUnit::Hz), Just(FrequencyUnit::Khz), Just(FrequencyUnit::Mhz), Just(FrequencyUnit::Ghz)],
        ) {
            let text = write_touchstone(&set, format, unit).unwrap();
            let back = parse_touchstone(text.as_bytes()).unwrap();
            prop_assert_eq!(back.n_ports(), set.n_ports());
            for (a, b) in back.frequencies_hz().iter().zip(set.frequencies_hz()) {
                prop_assert!((a - b).abs() <= 1e-9 * b.abs());
            }
            for (ma, mb) in back.matrices().iter().zip(set.matrices()) {
                for (a, b) in ma.iter().zip(mb) {
                    prop_assert!((a - b).norm() <= 1e-9 * b.norm().max(1e-300));
                }
            }
        }

        #[test]
        fn parser_never_panics(bytes in proptest::collection::vec(any::<u8>(), 0..200)) {
            let _ = parse_touchstone(&bytes);
        }

        #[test]
        fn parser_never_panics_on_numeric_noise(lines in proptest::collection::vec("[0-9 .eE+-]{0,30}", 0..8)) {
            let text = format!("# HZ S RI R 50\n{}", lines.join("\n"));
            let _ = parse_touchstone(text.as_bytes());
        }
    }
}
