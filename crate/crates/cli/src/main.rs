use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use dressing::blocks::decompose;
use dressing::io::{self, ReferenceRow};
use dressing::model::build_hamiltonian;
use dressing::scenario::{Scenario, DEFAULT_SCENARIO_FILE};
use dressing::spectral::{
    morris_shore_for_spec, sweep, sweep_layout, two_level_extrapolation, two_level_reference,
};
use dressing::spectro::{
    fit_peaks, synthesize_spectrum, trap_omega_distribution, FitError, FitOptions,
    OmegaDistribution, OmegaModel,
};
use dressing::{Error, HalfInt};

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERIC: u8 = 3;
const EXIT_FIT: u8 = 4;

#[derive(Parser)]
#[command(name = "dressing", version, about = "Dressed-state spectra of strongly driven hyperfine manifolds")]
struct Cli {
    /// Scenario JSON. Relative paths that do not exist are looked up in
    /// $DRESSING_SCENARIO_DIR. Defaults to the packaged Rb-87 scenario.
    #[arg(long, global = true)]
    scenario: Option<PathBuf>,

    /// Override a scenario field, e.g. `--set system.lower.hyperfine_a_mhz=0`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,

    /// Directory searched for scenario files.
    #[arg(long, env = "DRESSING_SCENARIO_DIR", global = true, hide_env_values = true)]
    scenario_dir: Option<PathBuf>,

    /// Log branch-pairing decisions and other diagnostics to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Symmetry blocks and the reordered |H| matrix.
    Blocks(BlocksArgs),
    /// Dressed energies, admixtures and signal weights versus drive strength.
    Sweep(SweepArgs),
    /// Synthesized probe spectrum.
    Spectrum(SpectrumArgs),
    /// Multi-Gaussian fit of a spectrum CSV.
    Fit(FitArgs),
    /// Two-level and Morris-Shore reference eigenvalues.
    Reference(ReferenceArgs),
}

#[derive(Args)]
struct BlocksArgs {
    /// Drive strength (MHz) at which the matrix is exported.
    #[arg(long, default_value_t = 200.0)]
    omega: f64,
    /// CSV of the reordered |H| (no header).
    #[arg(long)]
    matrix: Option<PathBuf>,
    /// JSON block report; printed to stdout when neither output is given.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Drive grid as `start:stop:step` or a comma list (MHz). Defaults to the scenario's.
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<String>,
    /// Only export blocks with this m̃ (repeatable), e.g. `--mtilde 3 --mtilde 1`.
    #[arg(long, allow_hyphen_values = true)]
    mtilde: Vec<String>,
    /// Sweep CSV; stdout when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Also write weak-drive two-level extrapolations of the selected blocks.
    #[arg(long)]
    extrapolation: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Homogeneous,
    Trap,
}

#[derive(Args)]
struct SpectrumArgs {
    /// Peak drive strength (MHz).
    #[arg(long)]
    peak_omega: Option<f64>,
    /// Detuning grid `start:stop:step` or comma list (MHz).
    #[arg(long, allow_hyphen_values = true)]
    detuning: Option<String>,
    /// Drive distribution over the cloud.
    #[arg(long, value_enum)]
    model: Option<ModelArg>,
    /// Monte-Carlo samples for the trap model.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Sum sample contributions in a fixed order for bit-identical output.
    #[arg(long)]
    deterministic: bool,
    /// Spectrum CSV (`detuning_MHz,signal`).
    #[arg(short, long)]
    output: PathBuf,
    /// Metadata JSON; defaults to the output path with `.meta.json`.
    #[arg(long)]
    metadata: Option<PathBuf>,
}

#[derive(Args)]
struct FitArgs {
    /// Spectrum CSV with a header and two columns.
    #[arg(short, long)]
    input: PathBuf,
    #[arg(long, default_value_t = 5)]
    peaks: usize,
    /// Fit a constant baseline as well.
    #[arg(long)]
    baseline: bool,
    #[arg(long, default_value_t = 200)]
    max_iterations: usize,
    /// Minimum spacing of initial peak centres (MHz).
    #[arg(long)]
    min_separation: Option<f64>,
    /// Scale normalized heights so the largest equals this value.
    #[arg(long, default_value_t = 1.0)]
    normalize_to: f64,
    /// Fit report JSON; stdout when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReferenceModel {
    TwoLevel,
    MorrisShore,
    Both,
}

#[derive(Args)]
struct ReferenceArgs {
    #[arg(long, value_enum, default_value_t = ReferenceModel::Both)]
    model: ReferenceModel,
    /// Drive grid (MHz); an empty string gives an empty table.
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<String>,
    /// Two-level detuning (MHz). Morris-Shore uses the scenario's detuning.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    delta: f64,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

enum Failure {
    Config(String),
    Numeric(String),
    Fit(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if matches!(e, Error::NoConvergence { .. }) {
            Failure::Numeric(e.to_string())
        } else {
            Failure::Config(e.to_string())
        }
    }
}

type CliResult<T> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.verbose { "debug" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (code, msg) = match f {
                Failure::Config(m) => (EXIT_CONFIG, m),
                Failure::Numeric(m) => (EXIT_NUMERIC, m),
                Failure::Fit(m) => (EXIT_FIT, m),
            };
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}

fn run(cli: &Cli) -> CliResult<()> {
    let scenario = load_scenario(cli)?;
    match &cli.command {
        Command::Blocks(a) => cmd_blocks(&scenario, a),
        Command::Sweep(a) => cmd_sweep(&scenario, a),
        Command::Spectrum(a) => cmd_spectrum(&scenario, a),
        Command::Fit(a) => cmd_fit(a),
        Command::Reference(a) => cmd_reference(&scenario, a),
    }
}

fn load_scenario(cli: &Cli) -> CliResult<Scenario> {
    let path = match (&cli.scenario, &cli.scenario_dir) {
        (Some(p), dir) => {
            if p.exists() || p.is_absolute() {
                Some(p.clone())
            } else if let Some(d) = dir {
                Some(d.join(p))
            } else {
                Some(p.clone())
            }
        }
        (None, Some(d)) => Some(d.join(DEFAULT_SCENARIO_FILE)).filter(|p| p.exists()),
        (None, None) => None,
    };
    let s = match path {
        Some(p) => Scenario::load(&p, &cli.overrides)?,
        None => Scenario::from_text_with_overrides(Scenario::default_json(), &cli.overrides)?,
    };
    Ok(s)
}

/// `start:stop:step`, a comma list, or empty.
fn parse_grid(text: &str) -> CliResult<Vec<f64>> {
    let t = text.trim();
    if t.is_empty() {
        return Ok(Vec::new());
    }
    let bad = |e: &dyn std::fmt::Display| Failure::Config(format!("grid '{t}': {e}"));
    if t.contains(':') {
        let parts: Vec<f64> = t
            .split(':')
            .map(|p| p.trim().parse::<f64>().map_err(|e| bad(&e)))
            .collect::<CliResult<_>>()?;
        let [a, b, s] = parts[..] else {
            return Err(bad(&"expected start:stop:step"));
        };
        return Ok(dressing::spectral::linear_grid(a, b, s)?);
    }
    t.split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| bad(&e)))
        .collect()
}

fn emit(path: Option<&Path>, bytes: &[u8]) -> CliResult<()> {
    match path {
        Some(p) if p != Path::new("-") => io::write_atomic(p, bytes).map_err(Failure::from),
        _ => {
            use std::io::Write;
            std::io::stdout()
                .write_all(bytes)
                .map_err(|e| Failure::Config(format!("stdout: {e}")))
        }
    }
}

fn cmd_blocks(s: &Scenario, a: &BlocksArgs) -> CliResult<()> {
    if !a.omega.is_finite() || a.omega < 0.0 {
        return Err(Failure::Config(format!("omega must be >= 0, got {}", a.omega)));
    }
    let h = build_hamiltonian(&s.system, a.omega)?;
    let d = decompose(&h, s.system.polarization_q)?;
    let report = io::BlockReport::new(&s.name, s.system.polarization_q, a.omega, &h, &d);
    let report = io::to_json_bytes(&report)?;
    let mut matrix = Vec::new();
    io::write_matrix_csv(&mut matrix, &h, &d.permutation)?;

    if a.matrix.is_none() && a.report.is_none() {
        return emit(None, &report);
    }
    if let Some(p) = &a.matrix {
        emit(Some(p), &matrix)?;
    }
    if let Some(p) = &a.report {
        emit(Some(p), &report)?;
    }
    Ok(())
}

fn cmd_sweep(s: &Scenario, a: &SweepArgs) -> CliResult<()> {
    let grid = match &a.grid {
        Some(g) => parse_grid(g)?,
        None => s.sweep.grid()?,
    };
    let wanted: Vec<HalfInt> = a
        .mtilde
        .iter()
        .map(|m| m.parse().map_err(|e| Failure::Config(format!("--mtilde '{m}': {e}"))))
        .collect::<CliResult<_>>()?;
    let (_, layout) = sweep_layout(&s.system)?;
    let selected: Option<Vec<usize>> = (!wanted.is_empty()).then(|| {
        layout
            .iter()
            .filter(|b| !b.singleton && wanted.contains(&b.mtilde))
            .map(|b| b.id)
            .collect()
    });
    if let Some(sel) = &selected {
        if sel.is_empty() {
            return Err(Failure::Config(format!(
                "no coupled block has m̃ in {:?}",
                a.mtilde
            )));
        }
    }

    let probe = s.probe.probed_lower_state();
    let mut set = sweep(&s.system, &grid)?;
    set.classify_with_probe(&probe, &s.classify);
    let mut csv = Vec::new();
    io::write_sweep_csv(&mut csv, &set, &probe, selected.as_deref())?;

    let extrapolation = match &a.extrapolation {
        Some(_) => {
            let mut buf = Vec::new();
            let mut wtr_rows = Vec::new();
            for b in layout.iter().filter(|b| !b.singleton) {
                if selected.as_ref().is_some_and(|sel| !sel.contains(&b.id)) {
                    continue;
                }
                wtr_rows.push((b.id, b.mtilde, two_level_extrapolation(&s.system, b, &grid)?));
            }
            // one header, rows block by block
            for (k, (id, m, lines)) in wtr_rows.iter().enumerate() {
                let mut part = Vec::new();
                io::write_extrapolation_csv(&mut part, *id, *m, &grid, lines)?;
                let skip = if k == 0 {
                    0
                } else {
                    part.iter().position(|&c| c == b'\n').map_or(part.len(), |p| p + 1)
                };
                buf.extend_from_slice(&part[skip..]);
            }
            Some(buf)
        }
        None => None,
    };

    emit(a.output.as_deref(), &csv)?;
    if let (Some(p), Some(bytes)) = (&a.extrapolation, extrapolation) {
        emit(Some(p), &bytes)?;
    }
    Ok(())
}

fn cmd_spectrum(s: &Scenario, a: &SpectrumArgs) -> CliResult<()> {
    let peak = a.peak_omega.unwrap_or(s.spectrum.peak_omega_mhz);
    if !peak.is_finite() || peak < 0.0 {
        return Err(Failure::Config(format!("peak omega must be >= 0, got {peak}")));
    }
    let grid = match &a.detuning {
        Some(g) => parse_grid(g)?,
        None => s.spectrum.grid()?,
    };
    if grid.is_empty() {
        return Err(Failure::Config("detuning grid is empty".into()));
    }
    let model = match a.model {
        Some(ModelArg::Homogeneous) => OmegaModel::Homogeneous,
        Some(ModelArg::Trap) => OmegaModel::TrapSampled,
        None => s.spectrum.omega_model,
    };
    let n_samples = a.samples.unwrap_or(s.spectrum.n_samples);
    if n_samples == 0 {
        return Err(Failure::Config("--samples must be positive".into()));
    }
    let seed = a.seed.unwrap_or(s.seed);
    let dist = match model {
        OmegaModel::Homogeneous => OmegaDistribution::homogeneous(),
        OmegaModel::TrapSampled => trap_omega_distribution(&s.trap, n_samples, seed)?,
    };

    let spectrum = synthesize_spectrum(&s.system, &s.probe, &dist, peak, &grid, a.deterministic)?;
    let mut csv = Vec::new();
    io::write_spectrum_csv(&mut csv, &spectrum)?;
    let meta = json!({
        "schema_version": io::REPORT_SCHEMA_VERSION,
        "scenario": s.name,
        "peak_omega_mhz": peak,
        "omega_model": model,
        "n_samples": dist.samples.len(),
        "seed": dist.seed,
        "mean_omega_fraction": dist.mean_fraction(),
        "deterministic": a.deterministic,
        "probe": s.probe,
        "probed_state": s.probe.probed_lower_state().to_string(),
        "detuning_points": grid.len(),
        "detuning_first_mhz": grid.first(),
        "detuning_last_mhz": grid.last(),
        "polarization_q": s.system.polarization_q,
    });
    let meta = io::to_json_bytes(&meta)?;
    let meta_path = a
        .metadata
        .clone()
        .unwrap_or_else(|| a.output.with_extension("meta.json"));

    emit(Some(&a.output), &csv)?;
    emit(Some(&meta_path), &meta)
}

fn cmd_fit(a: &FitArgs) -> CliResult<()> {
    let file = std::fs::File::open(&a.input)
        .map_err(|e| Failure::Config(format!("cannot open {}: {e}", a.input.display())))?;
    let spectrum = io::read_spectrum_csv(file)?;
    let opts = FitOptions {
        n_peaks: a.peaks,
        baseline: a.baseline,
        max_iterations: a.max_iterations,
        min_separation: a.min_separation,
    };
    let source = a.input.display().to_string();
    match fit_peaks(&spectrum, &opts) {
        Ok(report) => {
            let json = io::to_json_bytes(&io::FitReportJson::new(&source, &report, a.normalize_to))?;
            emit(a.output.as_deref(), &json)
        }
        Err(FitError::NotConverged(report)) => {
            let json = io::to_json_bytes(&io::FitReportJson::new(&source, &report, a.normalize_to))?;
            emit(a.output.as_deref(), &json)?;
            Err(Failure::Fit(format!(
                "fit did not converge in {} iterations; best-so-far parameters written",
                report.iterations
            )))
        }
        Err(e @ FitError::Precondition(_)) => Err(Failure::Config(e.to_string())),
        Err(e @ FitError::DegenerateInit { .. }) => Err(Failure::Numeric(e.to_string())),
    }
}

fn cmd_reference(s: &Scenario, a: &ReferenceArgs) -> CliResult<()> {
    let grid = match &a.grid {
        Some(g) => parse_grid(g)?,
        None => s.sweep.grid()?,
    };
    if grid.iter().any(|&w| w.is_nan() || w < 0.0) {
        return Err(Failure::Config("reference grid must be non-negative".into()));
    }
    let want_ms = matches!(a.model, ReferenceModel::MorrisShore | ReferenceModel::Both);
    if want_ms && (s.system.lower.hyperfine_a != 0.0 || s.system.upper.hyperfine_a != 0.0) {
        return Err(Failure::Config(
            "Morris-Shore reference needs hyperfine_a_mhz = 0 in both manifolds".into(),
        ));
    }
    let mut rows = Vec::new();
    if matches!(a.model, ReferenceModel::TwoLevel | ReferenceModel::Both) {
        for &w in &grid {
            let (lo, hi) = two_level_reference(w, a.delta);
            for (level, energy) in [lo, hi].into_iter().enumerate() {
                rows.push(ReferenceRow { model: "two_level", omega: w, delta: a.delta, level, energy });
            }
        }
    }
    if want_ms {
        let delta = s.system.upper_offset()? - s.system.lower.base_energy;
        for &w in &grid {
            for (level, energy) in morris_shore_for_spec(&s.system, w)?.into_iter().enumerate() {
                rows.push(ReferenceRow { model: "morris_shore", omega: w, delta, level, energy });
            }
        }
    }
    let mut csv = Vec::new();
    io::write_reference_csv(&mut csv, &rows)?;
    emit(a.output.as_deref(), &csv)
}
