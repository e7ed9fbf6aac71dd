use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use specwave::csvio::{self, SpectrumTable};
use specwave::diagnostics::{check_causality, check_passivity, enforce_passivity, CausalityReport};
use specwave::model::ExtractedSpectrum;
use specwave::recovery::PAPER_GAMMAS;
use specwave::testsignals::{full_spectrum, ExpSumSignal, Window};
use specwave::touchstone::{
    extract_spectrum, ports_from_path, read_touchstone, write_touchstone, DataFormat, FrequencyUnit,
};
use specwave::wavelet::{build_kernel, build_scales, cwt_from_spectrum, WaveletSpec};
use specwave::{
    compare, hermitian_extend, recover, with_threads, BandlimitedSpectrum, Error, RecoveryConfig, SParameterSet,
};

/// Impulse-response reconstruction from band-limited S-parameter spectra.
#[derive(Debug, Parser)]
#[command(name = "specwave", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample the exponential-sum test signal and write it with its full spectrum.
    Synth(SynthArgs),
    /// Drop the lowest bins (DC included) of a full spectrum CSV.
    Bandlimit(BandlimitArgs),
    /// Recover the DC bin and the impulse response.
    Reconstruct(ReconstructArgs),
    /// Causality and passivity checks.
    Diagnose(DiagnoseArgs),
    /// Error metrics of a signal CSV against a reference signal CSV.
    Compare(CompareArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum WindowArg {
    Symmetric,
    Causal,
}

#[derive(Debug, clap::Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 10)]
    n_terms: u32,
    /// Positive frequency bins; the signal has 2N+1 samples.
    #[arg(long = "n", default_value_t = 256)]
    n: usize,
    /// Window length in time units.
    #[arg(long, default_value_t = 40.0)]
    t_max: f64,
    #[arg(long, value_enum, default_value = "causal")]
    window: WindowArg,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Debug, clap::Args)]
struct BandlimitArgs {
    #[arg(long, default_value = "spectrum.csv")]
    input: PathBuf,
    #[arg(long, default_value_t = 1)]
    missing: usize,
    #[arg(long, default_value = "bandlimited.csv")]
    output: PathBuf,
}

#[derive(Debug, clap::Args)]
struct ReconstructArgs {
    /// Spectrum CSV or Touchstone (.sNp) file.
    #[arg(long, default_value = "bandlimited.csv")]
    input: PathBuf,
    /// Matrix element `i j` to reconstruct (Touchstone input only).
    #[arg(long, num_args = 2, value_names = ["I", "J"])]
    port: Option<Vec<usize>>,
    #[arg(long, default_value_t = 2.0)]
    gamma: f64,
    #[arg(long, default_value_t = 1e-6)]
    epsilon: f64,
    /// Iteration cap; defaults to the number of scales.
    #[arg(long)]
    max_iter: Option<usize>,
    /// Paul wavelet order.
    #[arg(long, default_value_t = 4)]
    m: u32,
    #[arg(long)]
    s1: Option<f64>,
    #[arg(long)]
    ds: Option<f64>,
    /// Ground-truth signal CSV for error reporting.
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Also write the wavelet coefficients of the zero-DC input.
    #[arg(long)]
    dump_cwt: bool,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Debug, clap::Args)]
struct DiagnoseArgs {
    /// Spectrum CSV or Touchstone (.sNp) file.
    #[arg(long)]
    input: PathBuf,
    /// Report a causal/non-causal verdict against this residual.
    #[arg(long)]
    kk_threshold: Option<f64>,
    /// Write a passivity-enforced copy of Touchstone input.
    #[arg(long)]
    enforce: bool,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Debug, clap::Args)]
struct CompareArgs {
    signal: PathBuf,
    reference: PathBuf,
}

enum Failure {
    Usage(String),
    Format(String),
    Divergence(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Format(_) => 2,
            Failure::Divergence(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Format(m) | Failure::Divergence(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::Format { .. } | Error::Grid(_) | Error::ShapeMismatch(_) => Failure::Format(msg),
            Error::NumericalDivergence { .. } => Failure::Divergence(msg),
            _ => Failure::Usage(msg),
        }
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

fn read_text(path: &Path) -> Outcome<String> {
    let bytes = std::fs::read(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    String::from_utf8(bytes).map_err(|_| Failure::Format(format!("{}: not valid UTF-8", path.display())))
}

fn with_path<T>(path: &Path, r: specwave::Result<T>) -> Outcome<T> {
    r.map_err(|e| match Failure::from(e) {
        Failure::Usage(m) => Failure::Usage(format!("{}: {m}", path.display())),
        Failure::Format(m) => Failure::Format(format!("{}: {m}", path.display())),
        Failure::Divergence(m) => Failure::Divergence(m),
    })
}

/// Writes through a temporary file in the target directory, then renames.
fn write_atomic(path: &Path, contents: &str) -> Outcome<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let fail = |e: &dyn std::fmt::Display| Failure::Usage(format!("{}: {e}", path.display()));
    std::fs::create_dir_all(dir).map_err(|e| fail(&e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| fail(&e))?;
    tmp.write_all(contents.as_bytes()).map_err(|e| fail(&e))?;
    tmp.as_file().sync_all().map_err(|e| fail(&e))?;
    tmp.persist(path).map_err(|e| fail(&e.error))?;
    Ok(())
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("finite numbers serialize");
    s.push('\n');
    s
}

enum Input {
    Network(SParameterSet),
    Table(SpectrumTable),
}

fn load_input(path: &Path) -> Outcome<Input> {
    if ports_from_path(path).is_some() {
        if !path.exists() {
            return Err(Failure::Usage(format!("{}: file not found", path.display())));
        }
        let net = with_path(path, read_touchstone(path))?;
        for w in net.warnings() {
            eprintln!("warning: {w}");
        }
        Ok(Input::Network(net))
    } else {
        let text = read_text(path)?;
        Ok(Input::Table(with_path(path, csvio::parse_spectrum_csv(&text))?))
    }
}

fn synth(args: &SynthArgs) -> Outcome<()> {
    let window = match args.window {
        WindowArg::Symmetric => Window::Symmetric,
        WindowArg::Causal => Window::Causal,
    };
    if args.n < 2 {
        return Err(Failure::Usage("--n must be >= 2".into()));
    }
    if !(args.t_max.is_finite() && args.t_max > 0.0) {
        return Err(Failure::Usage("--t-max must be > 0".into()));
    }
    let len = 2 * args.n + 1;
    let family = ExpSumSignal::new(args.n_terms, window)?;
    let sig = family.sample(len, args.t_max / len as f64)?;
    let spec = full_spectrum(&sig)?;
    write_atomic(&args.out_dir.join("signal.csv"), &csvio::signal_csv(&sig))?;
    write_atomic(&args.out_dir.join("spectrum.csv"), &csvio::hermitian_csv(&spec))?;
    println!(
        "wrote {} samples, t_step {}, sample mean {}, window mean {}",
        len,
        sig.t_step(),
        sig.mean(),
        family.window_mean(args.t_max)
    );
    Ok(())
}

fn bandlimit(args: &BandlimitArgs) -> Outcome<()> {
    let text = read_text(&args.input)?;
    let table = with_path(&args.input, csvio::parse_spectrum_csv(&text))?;
    let spec = with_path(&args.input, table.bandlimit(args.missing))?;
    write_atomic(&args.output, &csvio::spectrum_csv(&spec))?;
    println!(
        "kept {} bins from {} rad/s, n_missing={}",
        spec.grid().n_bins(),
        spec.grid().omega_start(),
        spec.grid().n_missing()
    );
    Ok(())
}

fn port_pair(port: &Option<Vec<usize>>) -> Option<(usize, usize)> {
    port.as_ref().map(|p| (p[0], p[1]))
}

fn reconstruct(args: &ReconstructArgs) -> Outcome<()> {
    let extracted: ExtractedSpectrum = match (load_input(&args.input)?, port_pair(&args.port)) {
        (Input::Network(net), Some((i, j))) => extract_spectrum(&net, i, j)?,
        (Input::Network(_), None) => {
            return Err(Failure::Usage("Touchstone input needs --port I J".into()));
        }
        (Input::Table(_), Some(_)) => {
            return Err(Failure::Usage("--port applies to Touchstone input only".into()));
        }
        (Input::Table(t), None) => with_path(&args.input, t.to_spectrum())?,
    };
    let input: BandlimitedSpectrum = extracted.spectrum;
    // Read before any output is written: the truth may share a name with an output.
    let truth = match &args.truth {
        Some(path) => Some((path, with_path(path, csvio::parse_signal_csv(&read_text(path)?))?)),
        None => None,
    };
    let cfg = RecoveryConfig {
        gamma: args.gamma,
        max_iterations: args.max_iter,
        epsilon: args.epsilon,
        wavelet: WaveletSpec::paul(args.m)?,
        s1: args.s1,
        ds: args.ds,
        ..RecoveryConfig::default()
    };
    let mut report = recover(&input, &cfg)?;
    if let Some(dc) = extracted.dropped_dc {
        report.warnings.push(format!(
            "input DC bin {} + {}i was dropped before recovery",
            dc.re, dc.im
        ));
    }
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }

    let out = &args.out_dir;
    write_atomic(&out.join("report.json"), &to_json(&report))?;
    write_atomic(&out.join("signal.csv"), &csvio::signal_csv(&report.signal))?;
    write_atomic(&out.join("baseline.csv"), &csvio::signal_csv(&report.baseline))?;
    let mut history = String::from("iteration,dc,residual\n");
    for (n, (dc, r)) in report.dc_history.iter().zip(&report.residual_history).enumerate() {
        let _ = writeln!(history, "{},{dc},{r}", n + 1);
    }
    write_atomic(&out.join("dc_history.csv"), &history)?;

    let mut sweep = String::from("gamma,iteration,dc,residual\n");
    for gamma in PAPER_GAMMAS {
        match recover(&input, &RecoveryConfig { gamma, ..cfg.clone() }) {
            Ok(r) => {
                for (n, (dc, res)) in r.dc_history.iter().zip(&r.residual_history).enumerate() {
                    let _ = writeln!(sweep, "{gamma},{},{dc},{res}", n + 1);
                }
            }
            Err(e) => eprintln!("warning: gamma {gamma}: {e}"),
        }
    }
    write_atomic(&out.join("gamma_sweep.csv"), &sweep)?;

    if args.dump_cwt {
        let grid = *input.grid();
        let scales = build_scales(&grid, cfg.s1, cfg.ds)?;
        let kern = build_kernel(&cfg.wavelet, &scales, &grid);
        let coef = cwt_from_spectrum(&hermitian_extend(&input, 0.0)?, &kern)?;
        write_atomic(&out.join("cwt.csv"), &coef.to_csv())?;
    }

    println!("coefficient factor {}", report.coefficient_factor);
    println!(
        "dc estimate {} after {} iterations ({})",
        report.dc_estimate,
        report.iterations_run,
        if report.converged {
            "converged"
        } else {
            "iteration cap reached"
        }
    );
    if let Some((path, truth)) = truth {
        let rec = with_path(path, compare(&report.signal, &truth))?;
        let base = with_path(path, compare(&report.baseline, &truth))?;
        println!("l2_rel recovered {} baseline {}", rec.l2_rel, base.l2_rel);
    }
    Ok(())
}

#[derive(Serialize)]
struct PairCausality {
    i: usize,
    j: usize,
    #[serde(flatten)]
    report: CausalityReport,
    dc_source: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    causal: Option<bool>,
}

fn causality_of(extracted: &ExtractedSpectrum) -> Outcome<(CausalityReport, &'static str)> {
    let (dc, source) = match extracted.dropped_dc {
        Some(z) => (z.re, "file"),
        None => (extracted.spectrum.values()[0].re, "first_bin"),
    };
    Ok((check_causality(&hermitian_extend(&extracted.spectrum, dc)?), source))
}

fn table_as_network(table: &SpectrumTable) -> Outcome<SParameterSet> {
    let freqs = table.omegas.iter().map(|w| w / (2.0 * std::f64::consts::PI)).collect();
    let matrices = table.values.iter().map(|v| vec![*v]).collect();
    Ok(SParameterSet::new(1, freqs, matrices, 50.0)?)
}

fn diagnose(args: &DiagnoseArgs) -> Outcome<()> {
    let (net, from_file) = match load_input(&args.input)? {
        Input::Network(net) => (net, true),
        Input::Table(t) => (table_as_network(&t)?, false),
    };
    let mut causality = Vec::new();
    for i in 1..=net.n_ports() {
        for j in 1..=net.n_ports() {
            let extracted = with_path(&args.input, extract_spectrum(&net, i, j))?;
            let (report, dc_source) = causality_of(&extracted)?;
            causality.push(PairCausality {
                i,
                j,
                causal: args.kk_threshold.map(|t| report.kk_residual_rel <= t),
                report,
                dc_source,
            });
        }
    }
    let passivity = check_passivity(&net)?;
    write_atomic(&args.out_dir.join("causality.json"), &to_json(&causality))?;
    write_atomic(&args.out_dir.join("passivity.json"), &to_json(&passivity))?;

    for c in &causality {
        let verdict = match c.causal {
            Some(true) => " causal",
            Some(false) => " non-causal",
            None => "",
        };
        println!(
            "S{}{}: kk residual {:.4e}, precursor fraction {:.4}{verdict}",
            c.i, c.j, c.report.kk_residual_rel, c.report.precursor_fraction
        );
    }
    println!(
        "passive: {} (max |eigenvalue| {})",
        passivity.passive, passivity.max_eig_mag
    );
    if !passivity.offending_bins.is_empty() {
        println!("bin\tfrequency_hz\tmax_eig_mag");
        for &k in &passivity.offending_bins {
            println!("{k}\t{}\t{}", net.frequencies_hz()[k], passivity.per_bin[k]);
        }
    }
    if args.enforce {
        if !from_file {
            return Err(Failure::Usage("--enforce needs Touchstone input".into()));
        }
        let fixed = enforce_passivity(&net)?;
        let name = format!("passive.s{}p", net.n_ports());
        write_atomic(
            &args.out_dir.join(name),
            &write_touchstone(&fixed, DataFormat::Ri, FrequencyUnit::Hz)?,
        )?;
    }
    Ok(())
}

fn compare_cmd(args: &CompareArgs) -> Outcome<()> {
    let sig = with_path(&args.signal, csvio::parse_signal_csv(&read_text(&args.signal)?))?;
    let reference = with_path(&args.reference, csvio::parse_signal_csv(&read_text(&args.reference)?))?;
    let metrics = compare(&sig, &reference)?;
    print!("{}", to_json(&metrics));
    Ok(())
}

fn threads_from_env() -> Outcome<usize> {
    match std::env::var("SPECWAVE_THREADS") {
        Err(_) => Ok(0),
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Failure::Usage(format!("SPECWAVE_THREADS must be a non-negative integer, got '{v}'"))),
    }
}

fn run(cli: &Cli) -> Outcome<()> {
    match &cli.command {
        Command::Synth(a) => synth(a),
        Command::Bandlimit(a) => bandlimit(a),
        Command::Reconstruct(a) => reconstruct(a),
        Command::Diagnose(a) => diagnose(a),
        Command::Compare(a) => compare_cmd(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = threads_from_env().and_then(|threads| {
        if threads == 0 {
            run(&cli)
        } else {
            with_threads(threads, || run(&cli))
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("specwave: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
