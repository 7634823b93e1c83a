//! CSV and JSON exports.
//!
//! CSV files use LF line endings and Rust's shortest round-trip float
//! formatting, so identical inputs give byte-identical files. JSON reports
//! carry a `schema_version`.

use std::io::{Read, Write};
use std::path::Path;

use serde::Serialize;

use crate::angmom::HalfInt;
use crate::blocks::BlockDecomposition;
use crate::error::{Error, Result};
use crate::model::{BasisState, LabeledMatrix};
use crate::spectral::{EigenBranchSet, ExtrapolationLine, PairBranch};
use crate::spectro::{signal_weight, FitReport, Spectrum};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

fn num(x: f64) -> String {
    // avoid "-0" in outputs
    if x == 0.0 {
        "0".to_string()
    } else {
        format!("{x}")
    }
}

/// Write `bytes` to `path` through a temporary sibling and a rename, so a
/// failed run never leaves a half-written file behind.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| Error::Config(format!("output path {} has no file name", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path).inspect_err(|_| {
        let _ = std::fs::remove_file(&tmp);
    })?;
    Ok(())
}

pub fn to_json_bytes<S: Serialize>(value: &S) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(value)?;
    out.push(b'\n');
    Ok(out)
}

/// One row per branch per grid point, grid-major.
///
/// `blocks` restricts output to the given block ids; `None` writes all.
pub fn write_sweep_csv<W: Write>(
    w: W,
    set: &EigenBranchSet<f64>,
    probe: &BasisState,
    blocks: Option<&[usize]>,
) -> Result<()> {
    let mut out = csv_writer(w);
    out.write_record([
        "omega_MHz",
        "block_id",
        "branch_id",
        "energy_MHz",
        "probed_admixture",
        "signal_weight",
        "mtilde",
        "classification",
    ])?;
    let selected: Vec<usize> = (0..set.branches.len())
        .filter(|&b| blocks.is_none_or(|ids| ids.contains(&set.branches[b].block)))
        .collect();
    let admixtures: Vec<Vec<f64>> = selected.iter().map(|&b| set.admixture(b, probe)).collect();
    for (k, &omega) in set.omega_grid.iter().enumerate() {
        for (&b, adm) in selected.iter().zip(&admixtures) {
            let branch = &set.branches[b];
            let info = &set.blocks[branch.block];
            let labels: Vec<BasisState> = info.indices.iter().map(|&i| set.basis[i]).collect();
            let p = signal_weight(&branch.eigenvectors[k], &labels, probe);
            out.write_record([
                num(omega),
                info.id.to_string(),
                branch.id.to_string(),
                num(branch.energies[k]),
                num(adm[k]),
                num(p),
                info.mtilde.to_string(),
                set.classifications[b].as_str().to_string(),
            ])?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Weak-drive extrapolation lines of one block, one row per line per grid
/// point.
pub fn write_extrapolation_csv<W: Write>(
    w: W,
    block_id: usize,
    mtilde: HalfInt,
    omega_grid: &[f64],
    lines: &[ExtrapolationLine<f64>],
) -> Result<()> {
    let mut out = csv_writer(w);
    out.write_record([
        "omega_MHz",
        "block_id",
        "mtilde",
        "F",
        "m_F",
        "branch",
        "rabi_ratio",
        "detuning_MHz",
        "energy_MHz",
    ])?;
    for (k, &omega) in omega_grid.iter().enumerate() {
        for l in lines {
            let branch = match l.branch {
                PairBranch::Minus => "minus",
                PairBranch::Plus => "plus",
            };
            out.write_record([
                num(omega),
                block_id.to_string(),
                mtilde.to_string(),
                l.f.to_string(),
                l.m_f.to_string(),
                branch.to_string(),
                num(l.rabi_ratio),
                num(l.detuning),
                num(l.energies[k]),
            ])?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn write_spectrum_csv<W: Write>(w: W, s: &Spectrum<f64>) -> Result<()> {
    let mut out = csv_writer(w);
    out.write_record(["detuning_MHz", "signal"])?;
    for (&x, &y) in s.detuning.iter().zip(&s.signal) {
        out.write_record([num(x), num(y)])?;
    }
    out.flush()?;
    Ok(())
}

/// Read a two-column `detuning_MHz,signal` CSV with a header row.
pub fn read_spectrum_csv<R: Read>(r: R) -> Result<Spectrum<f64>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    let headers = rdr.headers()?.clone();
    if headers.len() != 2 {
        return Err(Error::Config(format!(
            "spectrum CSV needs two columns, found {}",
            headers.len()
        )));
    }
    let (mut x, mut y) = (Vec::new(), Vec::new());
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let parse = |i: usize| -> Result<f64> {
            rec[i].parse::<f64>().map_err(|e| {
                Error::Config(format!("spectrum CSV row {}: '{}': {e}", line + 2, &rec[i]))
            })
        };
        x.push(parse(0)?);
        y.push(parse(1)?);
    }
    Spectrum::new(x, y)
}

/// `|H|` permuted by `perm`, no header, for matrix plots.
pub fn write_matrix_csv<W: Write>(w: W, h: &LabeledMatrix<f64>, perm: &[usize]) -> Result<()> {
    let mut out = csv_writer(w);
    let p = h.entries().permuted(perm);
    for i in 0..p.rows() {
        out.write_record(p.row(i).iter().map(|v| num(v.abs())))?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct BlockEntry {
    pub mtilde: HalfInt,
    pub size: usize,
    pub indices: Vec<usize>,
    pub states: Vec<String>,
}

#[derive(Debug, Serialize)]
pub struct SingletonEntry {
    pub index: usize,
    pub mtilde: HalfInt,
    pub state: String,
}

#[derive(Debug, Serialize)]
pub struct BlockReport {
    pub schema_version: u32,
    pub scenario: String,
    pub polarization_q: i32,
    pub omega_mhz: f64,
    pub dimension: usize,
    pub block_sizes: Vec<usize>,
    pub blocks: Vec<BlockEntry>,
    pub dark_singletons: Vec<SingletonEntry>,
    /// Row/column order of the matrix CSV, as indices into `basis`.
    pub permutation: Vec<usize>,
    pub basis: Vec<String>,
}

impl BlockReport {
    pub fn new(scenario: &str, q: i32, omega: f64, h: &LabeledMatrix<f64>, d: &BlockDecomposition) -> Self {
        let labels = h.labels();
        Self {
            schema_version: REPORT_SCHEMA_VERSION,
            scenario: scenario.to_string(),
            polarization_q: q,
            omega_mhz: omega,
            dimension: h.dim(),
            block_sizes: d.blocks.iter().map(|b| b.len()).collect(),
            blocks: d
                .blocks
                .iter()
                .map(|b| BlockEntry {
                    mtilde: b.mtilde,
                    size: b.len(),
                    indices: b.indices.clone(),
                    states: b.indices.iter().map(|&i| labels[i].to_string()).collect(),
                })
                .collect(),
            dark_singletons: d
                .dark_singletons
                .iter()
                .map(|&i| SingletonEntry {
                    index: i,
                    mtilde: crate::blocks::mtilde(&labels[i], q),
                    state: labels[i].to_string(),
                })
                .collect(),
            permutation: d.permutation.clone(),
            basis: labels.iter().map(|s| s.to_string()).collect(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct PeakEntry {
    pub center_mhz: f64,
    pub sigma_mhz: f64,
    pub amplitude: f64,
    pub normalized_height: f64,
}

#[derive(Debug, Serialize)]
pub struct FitReportJson {
    pub schema_version: u32,
    pub source: String,
    pub n_peaks: usize,
    pub converged: bool,
    pub iterations: usize,
    pub reseeded: bool,
    pub residual_norm: f64,
    pub baseline: Option<f64>,
    /// Height the largest peak is scaled to in `normalized_height`.
    pub normalization_reference: f64,
    pub peaks: Vec<PeakEntry>,
    pub covariance: Option<Vec<Vec<f64>>>,
}

impl FitReportJson {
    pub fn new(source: &str, report: &FitReport<f64>, normalization_reference: f64) -> Self {
        let heights = report.normalized_heights(normalization_reference);
        Self {
            schema_version: REPORT_SCHEMA_VERSION,
            source: source.to_string(),
            n_peaks: report.peaks.len(),
            converged: report.converged,
            iterations: report.iterations,
            reseeded: report.reseeded,
            residual_norm: report.residual_norm,
            baseline: report.baseline,
            normalization_reference,
            peaks: report
                .peaks
                .iter()
                .zip(heights)
                .map(|(p, h)| PeakEntry {
                    center_mhz: p.center,
                    sigma_mhz: p.sigma,
                    amplitude: p.amplitude,
                    normalized_height: h,
                })
                .collect(),
            covariance: report.covariance.clone(),
        }
    }
}

/// Rows of a reference-model table.
pub struct ReferenceRow {
    pub model: &'static str,
    pub omega: f64,
    pub delta: f64,
    pub level: usize,
    pub energy: f64,
}

pub fn write_reference_csv<W: Write>(w: W, rows: &[ReferenceRow]) -> Result<()> {
    let mut out = csv_writer(w);
    out.write_record(["model", "omega_MHz", "delta_MHz", "level", "energy_MHz"])?;
    for r in rows {
        out.write_record([
            r.model.to_string(),
            num(r.omega),
            num(r.delta),
            r.level.to_string(),
            num(r.energy),
        ])?;
    }
    out.flush()?;
    Ok(())
}
