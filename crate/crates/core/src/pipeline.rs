//! End-to-end orchestration and the on-disk stage formats.
//!
//! `run` executes filter → aggregate → standardize → LOF → flag →
//! concordance per patient (lexicographic order), then cohort grouping and
//! all requested emissions. The standalone stages compose through files and
//! reproduce the monolithic run byte-for-byte:
//!
//! - `detect`  reads chirps.csv + clinical.json, writes `features_*` and
//!   `lof_*` dumps;
//! - `match`   reads `lof_*` dumps + clinical.json, writes concordance.csv;
//! - `report`  reads concordance.csv + clinical.json, writes cohort tables;
//! - `viz`     reads chirps.csv, clinical.json, `lof_*` dumps and
//!   concordance.csv, writes the plot-ready products.
//!
//! Cohort tables and metric tables are always derived from the 6-decimal
//! values recorded in concordance.csv (not from full-precision in-memory
//! reports), so the piecewise and monolithic paths agree exactly.
//!
//! Per-patient analyses may run in parallel; `CHIRP_CONCORD_THREADS` (or
//! `RunConfig::threads`) caps the pool, and all file writes happen on the
//! caller thread in patient order so output bytes never depend on the
//! schedule.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::channelid::ChannelId;
use crate::concordance::{self, ConcordanceReport, OverlapState};
use crate::error::{Error, Result};
use crate::features::{
    aggregate_channel_features, standardize, ChannelFeatureVector, StandardizedMatrix, DURATION,
    END_FREQ, START_FREQ,
};
use crate::ingest::{
    apply_quality_filter, build_cohort, parse_chirp_table, parse_clinical, ChirpEvent,
    ClinicalRecord, Cohort, PatientData,
};
use crate::lof::{self, LofConfig, LofResult};
use crate::scalar::Scalar;
use crate::table::{fmt_fixed, Table};
use crate::vizdata::{
    embedding3d, embedding3d_events, embedding_table, emit_metric_tables, grid_svg, grid_table,
    heatmap_svg, radial_projection, radial_table, scale_radii, FeatureKind,
};
use crate::cohort::{group_metrics, summary_table};

/// Which plot-ready products to emit.
#[derive(Debug, Clone, PartialEq)]
pub struct EmitConfig {
    pub grids: bool,
    pub embeddings: bool,
    pub radial_kinds: Vec<FeatureKind>,
    /// Min-max scale radial radii to [0, 1].
    pub radial_scaled: bool,
    pub svg: bool,
    pub per_event_embeddings: bool,
}

impl Default for EmitConfig {
    fn default() -> Self {
        EmitConfig {
            grids: true,
            embeddings: true,
            radial_kinds: FeatureKind::ALL.to_vec(),
            radial_scaled: false,
            svg: false,
            per_event_embeddings: false,
        }
    }
}

/// Full-run configuration; defaults reproduce the reference operating point
/// (n_neighbors = 20, contamination = 0.2, no R² floor).
#[derive(Debug, Clone)]
pub struct RunConfig<F> {
    pub chirps_path: PathBuf,
    pub clinical_path: PathBuf,
    pub out_dir: PathBuf,
    pub lof: LofConfig<F>,
    pub r2_min: Option<F>,
    pub group_by: Vec<String>,
    pub emit: EmitConfig,
    /// Parallelism cap; `None` consults `CHIRP_CONCORD_THREADS`, then rayon's default.
    pub threads: Option<usize>,
}

impl<F: Scalar> RunConfig<F> {
    pub fn new(
        chirps_path: impl Into<PathBuf>,
        clinical_path: impl Into<PathBuf>,
        out_dir: impl Into<PathBuf>,
    ) -> Self {
        RunConfig {
            chirps_path: chirps_path.into(),
            clinical_path: clinical_path.into(),
            out_dir: out_dir.into(),
            lof: LofConfig::default(),
            r2_min: None,
            group_by: vec!["outcome".into(), "post_op_progress".into()],
            emit: EmitConfig::default(),
            threads: None,
        }
    }
}

/// Outcome of a stage: diagnostics plus every file written.
#[derive(Debug, Clone, Default)]
pub struct RunSummary {
    pub warnings: Vec<String>,
    pub files: Vec<PathBuf>,
}

/// Everything computed for one patient.
#[derive(Debug, Clone)]
pub struct PatientAnalysis<F> {
    pub patient_id: String,
    /// Events surviving the quality filter.
    pub events: Vec<ChirpEvent<F>>,
    pub features: Vec<ChannelFeatureVector<F>>,
    pub standardized: StandardizedMatrix<F>,
    /// `None` when the patient has fewer than 2 channels with data.
    pub lof: Option<LofResult<F>>,
    pub soz: BTreeSet<ChannelId>,
    pub outliers: BTreeSet<ChannelId>,
    pub report: ConcordanceReport<F>,
    pub states: BTreeMap<ChannelId, OverlapState>,
    pub warnings: Vec<String>,
}

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|source| Error::ReadFile {
        path: path.to_path_buf(),
        source,
    })
}

fn read_text(path: &Path) -> Result<String> {
    let bytes = read_bytes(path)?;
    String::from_utf8(bytes).map_err(|e| Error::ReadFile {
        path: path.to_path_buf(),
        source: std::io::Error::new(std::io::ErrorKind::InvalidData, e),
    })
}

/// Parse both input files and join them into a cohort.
pub fn load_inputs<F: Scalar>(
    chirps_path: &Path,
    clinical_path: &Path,
) -> Result<(Cohort<F>, Vec<String>)> {
    let chirp_bytes = read_bytes(chirps_path)?;
    let events = parse_chirp_table(chirp_bytes.as_slice())?;
    let clinical_bytes = read_bytes(clinical_path)?;
    let records = parse_clinical(&clinical_bytes)?;
    Ok(build_cohort(events, records))
}

/// Analyze one patient: filter → aggregate → standardize → LOF → flag →
/// concordance → overlap states.
pub fn analyze_patient<F: Scalar>(
    patient: &PatientData<F>,
    lof_config: &LofConfig<F>,
    r2_min: Option<F>,
) -> PatientAnalysis<F> {
    let mut warnings = Vec::new();
    let events = apply_quality_filter(patient.events.clone(), r2_min);
    let features = aggregate_channel_features(&events);
    let standardized = standardize(&features);

    let (lof, outliers) = if features.len() >= 2 {
        let result = lof::detect(&standardized.channels, &standardized.values, lof_config)
            .expect("at least two channels");
        let outliers: BTreeSet<ChannelId> = result.outlier_channels().into_iter().collect();
        (Some(result), outliers)
    } else {
        warnings.push(format!(
            "patient `{}` has {} channel(s) with chirp data; LOF skipped, zero outliers",
            patient.patient_id,
            features.len()
        ));
        (None, BTreeSet::new())
    };

    let soz = patient.clinical.soz_channels.clone();
    let report = concordance::report(&patient.patient_id, &soz, &outliers);
    let all_channels: Vec<ChannelId> = features.iter().map(|f| f.channel.clone()).collect();
    let (states, missing) = concordance::overlap_states(&all_channels, &soz, &outliers);
    for channel in missing {
        warnings.push(format!(
            "patient `{}`: SOZ channel `{}` has no chirp data",
            patient.patient_id, channel
        ));
    }

    PatientAnalysis {
        patient_id: patient.patient_id.clone(),
        events,
        features,
        standardized,
        lof,
        soz,
        outliers,
        report,
        states,
        warnings,
    }
}

fn build_pool(threads: Option<usize>) -> Result<(rayon::ThreadPool, Option<String>)> {
    let mut warning = None;
    let n = match threads {
        Some(n) => n,
        None => match std::env::var("CHIRP_CONCORD_THREADS") {
            Ok(v) => match v.parse::<usize>() {
                Ok(n) if n >= 1 => n,
                _ => {
                    warning = Some(format!("ignoring invalid CHIRP_CONCORD_THREADS=`{v}`"));
                    0
                }
            },
            Err(_) => 0,
        },
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    Ok((pool, warning))
}

/// Analyze every patient, possibly in parallel; order follows the cohort.
pub fn analyze_all<F: Scalar>(
    cohort: &Cohort<F>,
    config: &RunConfig<F>,
) -> Result<(Vec<PatientAnalysis<F>>, Vec<String>)> {
    let (pool, pool_warning) = build_pool(config.threads)?;
    let analyses: Vec<PatientAnalysis<F>> = pool.install(|| {
        cohort
            .patients
            .par_iter()
            .map(|p| analyze_patient(p, &config.lof, config.r2_min))
            .collect()
    });
    let mut warnings: Vec<String> = pool_warning.into_iter().collect();
    for a in &analyses {
        warnings.extend(a.warnings.iter().cloned());
    }
    Ok((analyses, warnings))
}

/// Keep file names portable: anything outside `[A-Za-z0-9._-]` becomes `_`.
fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-') {
                c
            } else {
                '_'
            }
        })
        .collect()
}

// --- stage file formats ---

/// `features_<patient>.csv` content.
pub fn features_table<F: Scalar>(
    features: &[ChannelFeatureVector<F>],
    standardized: &StandardizedMatrix<F>,
) -> Table {
    let mut table = Table::new([
        "channel",
        "median_start_freq_hz",
        "median_end_freq_hz",
        "median_duration_s",
        "z_start",
        "z_end",
        "z_duration",
        "n_events",
    ]);
    for (f, z) in features.iter().zip(&standardized.values) {
        table.push_row(vec![
            f.channel.raw().to_string(),
            fmt_fixed(f.median_start_freq_hz),
            fmt_fixed(f.median_end_freq_hz),
            fmt_fixed(f.median_duration_s),
            fmt_fixed(z[START_FREQ]),
            fmt_fixed(z[END_FREQ]),
            fmt_fixed(z[DURATION]),
            f.n_events.to_string(),
        ]);
    }
    table
}

/// `lof_<patient>.csv` content. For patients where LOF was skipped the
/// score and tau cells are empty, flagged is 0 and effective_k is 0.
pub fn lof_table<F: Scalar>(channels: &[ChannelId], lof: Option<&LofResult<F>>) -> Table {
    let mut table = Table::new(["channel", "score", "flagged", "tau", "effective_k"]);
    match lof {
        Some(result) => {
            let tau = result.threshold_tau.map(fmt_fixed).unwrap_or_default();
            for (i, channel) in result.channels.iter().enumerate() {
                table.push_row(vec![
                    channel.raw().to_string(),
                    fmt_fixed(result.scores[i]),
                    u8::from(result.flagged[i]).to_string(),
                    tau.clone(),
                    result.effective_k.to_string(),
                ]);
            }
        }
        None => {
            for channel in channels {
                table.push_row(vec![
                    channel.raw().to_string(),
                    String::new(),
                    "0".to_string(),
                    String::new(),
                    "0".to_string(),
                ]);
            }
        }
    }
    table
}

/// Channels and flags recovered from a `lof_<patient>.csv` dump.
#[derive(Debug, Clone, PartialEq)]
pub struct LofDump {
    pub channels: Vec<ChannelId>,
    pub flagged: Vec<bool>,
}

impl LofDump {
    pub fn outliers(&self) -> BTreeSet<ChannelId> {
        self.channels
            .iter()
            .zip(&self.flagged)
            .filter(|(_, &f)| f)
            .map(|(c, _)| c.clone())
            .collect()
    }
}

/// Parse a `lof_<patient>.csv` dump.
pub fn parse_lof_dump(text: &str) -> Result<LofDump> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let headers = reader.headers()?;
    for expected in ["channel", "score", "flagged", "tau", "effective_k"] {
        if !headers.iter().any(|h| h == expected) {
            return Err(Error::MissingColumn(expected.to_string()));
        }
    }
    let mut channels = Vec::new();
    let mut flagged = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        channels.push(
            ChannelId::parse(record.get(0).unwrap_or(""))
                .map_err(|_| Error::Row {
                    line,
                    message: "empty channel label".into(),
                })?,
        );
        flagged.push(match record.get(2).unwrap_or("").trim() {
            "1" => true,
            "0" => false,
            other => {
                return Err(Error::Row {
                    line,
                    message: format!("flagged must be 0 or 1, got `{other}`"),
                })
            }
        });
    }
    Ok(LofDump { channels, flagged })
}

const REPORT_COLUMNS: [&str; 13] = [
    "patient_id",
    "m_exact",
    "r_exact",
    "m_index",
    "r_index",
    "exact_precision",
    "exact_recall",
    "exact_f1",
    "index_precision",
    "index_recall",
    "index_f1",
    "n_soz",
    "n_outliers",
];

/// `concordance.csv` content: one row per patient, 6-decimal ratios.
pub fn reports_table<F: Scalar>(reports: &[ConcordanceReport<F>]) -> Table {
    let mut table = Table::new(REPORT_COLUMNS);
    for r in reports {
        table.push_row(vec![
            r.patient_id.clone(),
            r.m_exact.to_string(),
            fmt_fixed(r.r_exact),
            r.m_index.to_string(),
            fmt_fixed(r.r_index),
            fmt_fixed(r.exact_precision),
            fmt_fixed(r.exact_recall),
            fmt_fixed(r.exact_f1),
            fmt_fixed(r.index_precision),
            fmt_fixed(r.index_recall),
            fmt_fixed(r.index_f1),
            r.n_soz.to_string(),
            r.n_outliers.to_string(),
        ]);
    }
    table
}

/// Parse `concordance.csv` back into reports (values carry the file's
/// 6-decimal precision).
pub fn parse_reports_csv<F: Scalar>(text: &str) -> Result<Vec<ConcordanceReport<F>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let headers = reader.headers()?.clone();
    for expected in REPORT_COLUMNS {
        if !headers.iter().any(|h| h == expected) {
            return Err(Error::MissingColumn(expected.to_string()));
        }
    }
    let idx = |name: &str| headers.iter().position(|h| h == name).expect("checked");
    let mut reports = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let float = |name: &str| -> Result<F> {
            let cell = record.get(idx(name)).unwrap_or("").trim();
            cell.parse::<F>().map_err(|_| Error::Row {
                line,
                message: format!("non-numeric value in column `{name}`: `{cell}`"),
            })
        };
        let int = |name: &str| -> Result<usize> {
            let cell = record.get(idx(name)).unwrap_or("").trim();
            cell.parse::<usize>().map_err(|_| Error::Row {
                line,
                message: format!("non-integer value in column `{name}`: `{cell}`"),
            })
        };
        reports.push(ConcordanceReport {
            patient_id: record.get(idx("patient_id")).unwrap_or("").to_string(),
            m_exact: int("m_exact")?,
            r_exact: float("r_exact")?,
            m_index: int("m_index")?,
            r_index: float("r_index")?,
            exact_precision: float("exact_precision")?,
            exact_recall: float("exact_recall")?,
            exact_f1: float("exact_f1")?,
            index_precision: float("index_precision")?,
            index_recall: float("index_recall")?,
            index_f1: float("index_f1")?,
            n_soz: int("n_soz")?,
            n_outliers: int("n_outliers")?,
        });
    }
    Ok(reports)
}

// --- emission ---

struct Emitter {
    out_dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Emitter {
    fn new(out_dir: &Path) -> Result<Self> {
        fs::create_dir_all(out_dir).map_err(|source| Error::WriteFile {
            path: out_dir.to_path_buf(),
            source,
        })?;
        Ok(Emitter {
            out_dir: out_dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, content: &str) -> Result<()> {
        let path = self.out_dir.join(name);
        fs::write(&path, content).map_err(|source| Error::WriteFile {
            path: path.clone(),
            source,
        })?;
        self.files.push(path);
        Ok(())
    }
}

fn write_detect_files<F: Scalar>(emitter: &mut Emitter, analysis: &PatientAnalysis<F>) -> Result<()> {
    let pid = sanitize(&analysis.patient_id);
    emitter.write(
        &format!("features_{pid}.csv"),
        &features_table(&analysis.features, &analysis.standardized).to_csv_string(),
    )?;
    emitter.write(
        &format!("lof_{pid}.csv"),
        &lof_table(&analysis.standardized.channels, analysis.lof.as_ref()).to_csv_string(),
    )
}

fn write_viz_patient_files<F: Scalar>(
    emitter: &mut Emitter,
    emit: &EmitConfig,
    patient_id: &str,
    events: &[ChirpEvent<F>],
    features: &[ChannelFeatureVector<F>],
    soz: &BTreeSet<ChannelId>,
    outliers: &BTreeSet<ChannelId>,
    states: &BTreeMap<ChannelId, OverlapState>,
) -> Result<Vec<String>> {
    let pid = sanitize(patient_id);
    let mut warnings = Vec::new();
    if emit.embeddings {
        let points = embedding3d(features, soz, outliers);
        emitter.write(
            &format!("embedding3d_{pid}.csv"),
            &embedding_table(&points).to_csv_string(),
        )?;
        if emit.per_event_embeddings {
            let points = embedding3d_events(events, soz, outliers);
            emitter.write(
                &format!("embedding3d_events_{pid}.csv"),
                &embedding_table(&points).to_csv_string(),
            )?;
        }
    }
    for kind in &emit.radial_kinds {
        let (mut points, mut polar_warnings) = radial_projection(features, *kind);
        warnings.append(&mut polar_warnings);
        if emit.radial_scaled {
            scale_radii(&mut points);
        }
        emitter.write(
            &format!("radial_{}_{pid}.csv", kind.name()),
            &radial_table(&points).to_csv_string(),
        )?;
    }
    if emit.grids {
        emitter.write(&format!("grids_{pid}.csv"), &grid_table(states).to_csv_string())?;
        if emit.svg {
            emitter.write(&format!("grids_{pid}.svg"), &grid_svg(patient_id, states))?;
        }
    }
    Ok(warnings)
}

fn write_metric_files<F: Scalar>(
    emitter: &mut Emitter,
    emit: &EmitConfig,
    reports: &[ConcordanceReport<F>],
    clinical: &[ClinicalRecord],
) -> Result<()> {
    let tables = emit_metric_tables(reports, clinical);
    emitter.write("heatmap_exact.csv", &tables.heatmap_exact.to_csv_string())?;
    emitter.write("heatmap_index.csv", &tables.heatmap_index.to_csv_string())?;
    emitter.write("boxplot_long.csv", &tables.boxplot_long.to_csv_string())?;
    if emit.svg {
        emitter.write("heatmap_exact.svg", &heatmap_svg(&tables.heatmap_exact))?;
        emitter.write("heatmap_index.svg", &heatmap_svg(&tables.heatmap_index))?;
    }
    Ok(())
}

fn write_cohort_tables<F: Scalar>(
    emitter: &mut Emitter,
    reports: &[ConcordanceReport<F>],
    clinical: &[ClinicalRecord],
    group_by: &[String],
) -> Result<()> {
    for feature in group_by {
        let groups = group_metrics(reports, clinical, feature)?;
        emitter.write(
            &format!("cohort_{}.csv", sanitize(feature)),
            &summary_table(&groups).to_csv_string(),
        )?;
    }
    Ok(())
}

/// Version stamp recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Serialize)]
struct ManifestConfig {
    chirps: String,
    clinical: String,
    n_neighbors: usize,
    contamination: f64,
    r2_min: Option<f64>,
    group_by: Vec<String>,
    grids: bool,
    embeddings: bool,
    radial_kinds: Vec<String>,
    radial_scaled: bool,
    svg: bool,
    per_event_embeddings: bool,
}

#[derive(Serialize)]
struct ManifestPatient {
    patient_id: String,
    n_channels: usize,
    n_soz: usize,
    n_outliers: usize,
}

#[derive(Serialize)]
struct Manifest {
    version: String,
    config: ManifestConfig,
    patients: Vec<ManifestPatient>,
}

fn manifest_json<F: Scalar>(config: &RunConfig<F>, analyses: &[PatientAnalysis<F>]) -> String {
    let manifest = Manifest {
        version: VERSION.to_string(),
        config: ManifestConfig {
            chirps: config.chirps_path.display().to_string(),
            clinical: config.clinical_path.display().to_string(),
            n_neighbors: config.lof.n_neighbors,
            contamination: config.lof.contamination.to_f64().unwrap_or(f64::NAN),
            r2_min: config.r2_min.and_then(|v| v.to_f64()),
            group_by: config.group_by.clone(),
            grids: config.emit.grids,
            embeddings: config.emit.embeddings,
            radial_kinds: config.emit.radial_kinds.iter().map(|k| k.name().to_string()).collect(),
            radial_scaled: config.emit.radial_scaled,
            svg: config.emit.svg,
            per_event_embeddings: config.emit.per_event_embeddings,
        },
        patients: analyses
            .iter()
            .map(|a| ManifestPatient {
                patient_id: a.patient_id.clone(),
                n_channels: a.features.len(),
                n_soz: a.report.n_soz,
                n_outliers: a.report.n_outliers,
            })
            .collect(),
    };
    let mut json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    json.push('\n');
    json
}

// --- stages ---

/// Full pipeline: analysis, concordance, cohort tables, emissions, manifest.
pub fn run_pipeline<F: Scalar>(config: &RunConfig<F>) -> Result<RunSummary> {
    let (cohort, mut warnings) = load_inputs::<F>(&config.chirps_path, &config.clinical_path)?;
    if cohort.patients.is_empty() {
        return Err(Error::EmptyCohort);
    }
    let (analyses, analysis_warnings) = analyze_all(&cohort, config)?;
    warnings.extend(analysis_warnings);

    let mut emitter = Emitter::new(&config.out_dir)?;
    for analysis in &analyses {
        write_detect_files(&mut emitter, analysis)?;
    }

    let reports: Vec<ConcordanceReport<F>> = analyses.iter().map(|a| a.report.clone()).collect();
    let concordance_csv = reports_table(&reports).to_csv_string();
    emitter.write("concordance.csv", &concordance_csv)?;

    // everything downstream of concordance.csv consumes its rounded values
    let rounded: Vec<ConcordanceReport<F>> = parse_reports_csv(&concordance_csv)?;
    let clinical: Vec<ClinicalRecord> = cohort.patients.iter().map(|p| p.clinical.clone()).collect();
    write_cohort_tables(&mut emitter, &rounded, &clinical, &config.group_by)?;

    for analysis in &analyses {
        let mut viz_warnings = write_viz_patient_files(
            &mut emitter,
            &config.emit,
            &analysis.patient_id,
            &analysis.events,
            &analysis.features,
            &analysis.soz,
            &analysis.outliers,
            &analysis.states,
        )?;
        warnings.append(&mut viz_warnings);
    }
    write_metric_files(&mut emitter, &config.emit, &rounded, &clinical)?;

    emitter.write("run_manifest.json", &manifest_json(config, &analyses))?;

    Ok(RunSummary {
        warnings,
        files: emitter.files,
    })
}

/// Stage 1: detection only — write `features_*` and `lof_*` dumps.
pub fn run_detect<F: Scalar>(config: &RunConfig<F>) -> Result<RunSummary> {
    let (cohort, mut warnings) = load_inputs::<F>(&config.chirps_path, &config.clinical_path)?;
    if cohort.patients.is_empty() {
        return Err(Error::EmptyCohort);
    }
    let (analyses, analysis_warnings) = analyze_all(&cohort, config)?;
    warnings.extend(analysis_warnings);

    let mut emitter = Emitter::new(&config.out_dir)?;
    for analysis in &analyses {
        write_detect_files(&mut emitter, analysis)?;
    }
    Ok(RunSummary {
        warnings,
        files: emitter.files,
    })
}

/// Discover `lof_<patient>.csv` dumps in a directory.
///
/// Returns (patient id, dump path) pairs sorted by id. Ids are recovered
/// from file names; when a clinical id sanitizes to a discovered stem the
/// clinical spelling wins.
fn discover_lof_dumps(dir: &Path, clinical: &[ClinicalRecord]) -> Result<BTreeMap<String, PathBuf>> {
    let entries = fs::read_dir(dir).map_err(|source| Error::ReadFile {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut by_stem: BTreeMap<String, PathBuf> = BTreeMap::new();
    for entry in entries {
        let entry = entry.map_err(|source| Error::ReadFile {
            path: dir.to_path_buf(),
            source,
        })?;
        let name = entry.file_name().to_string_lossy().to_string();
        if let Some(stem) = name.strip_prefix("lof_").and_then(|s| s.strip_suffix(".csv")) {
            by_stem.insert(stem.to_string(), entry.path());
        }
    }
    let mut by_id = BTreeMap::new();
    for record in clinical {
        let stem = sanitize(&record.patient_id);
        if let Some(path) = by_stem.remove(&stem) {
            by_id.insert(record.patient_id.clone(), path);
        }
    }
    // dumps with no clinical entry keep their stem as the id
    for (stem, path) in by_stem {
        by_id.insert(stem, path);
    }
    Ok(by_id)
}

/// Stage 2: concordance from precomputed LOF dumps.
pub fn run_match<F: Scalar>(clinical_path: &Path, out_dir: &Path) -> Result<RunSummary> {
    let clinical = parse_clinical(&read_bytes(clinical_path)?)?;
    let dumps = discover_lof_dumps(out_dir, &clinical)?;

    let clinical_by_id: BTreeMap<&str, &ClinicalRecord> = clinical
        .iter()
        .map(|c| (c.patient_id.as_str(), c))
        .collect();
    let mut patient_ids: BTreeSet<String> = dumps.keys().cloned().collect();
    patient_ids.extend(clinical.iter().map(|c| c.patient_id.clone()));
    if patient_ids.is_empty() {
        return Err(Error::EmptyCohort);
    }

    let mut warnings = Vec::new();
    let mut reports: Vec<ConcordanceReport<F>> = Vec::new();
    for id in &patient_ids {
        let outliers = match dumps.get(id) {
            Some(path) => parse_lof_dump(&read_text(path)?)?.outliers(),
            None => {
                warnings.push(format!("patient `{id}` has no LOF dump; zero outliers assumed"));
                BTreeSet::new()
            }
        };
        let soz = match clinical_by_id.get(id.as_str()) {
            Some(c) => c.soz_channels.clone(),
            None => {
                warnings.push(format!("patient `{id}` has no clinical record; empty SOZ assumed"));
                BTreeSet::new()
            }
        };
        reports.push(concordance::report(id, &soz, &outliers));
    }

    let mut emitter = Emitter::new(out_dir)?;
    emitter.write("concordance.csv", &reports_table(&reports).to_csv_string())?;
    Ok(RunSummary {
        warnings,
        files: emitter.files,
    })
}

/// Stage 3: cohort tables from concordance.csv.
pub fn run_report<F: Scalar>(
    clinical_path: &Path,
    out_dir: &Path,
    group_by: &[String],
) -> Result<RunSummary> {
    let clinical = parse_clinical(&read_bytes(clinical_path)?)?;
    let reports: Vec<ConcordanceReport<F>> =
        parse_reports_csv(&read_text(&out_dir.join("concordance.csv"))?)?;
    let mut emitter = Emitter::new(out_dir)?;
    write_cohort_tables(&mut emitter, &reports, &clinical, group_by)?;
    Ok(RunSummary {
        warnings: Vec::new(),
        files: emitter.files,
    })
}

/// Stage 4: plot-ready emissions from inputs plus the dumps of earlier stages.
pub fn run_viz<F: Scalar>(config: &RunConfig<F>) -> Result<RunSummary> {
    let (cohort, mut warnings) = load_inputs::<F>(&config.chirps_path, &config.clinical_path)?;
    if cohort.patients.is_empty() {
        return Err(Error::EmptyCohort);
    }
    let clinical: Vec<ClinicalRecord> = cohort.patients.iter().map(|p| p.clinical.clone()).collect();
    let dumps = discover_lof_dumps(&config.out_dir, &clinical)?;

    let mut emitter = Emitter::new(&config.out_dir)?;
    for patient in &cohort.patients {
        let events = apply_quality_filter(patient.events.clone(), config.r2_min);
        let features = aggregate_channel_features(&events);
        let outliers = match dumps.get(&patient.patient_id) {
            Some(path) => parse_lof_dump(&read_text(path)?)?.outliers(),
            None => {
                warnings.push(format!(
                    "patient `{}` has no LOF dump; zero outliers assumed",
                    patient.patient_id
                ));
                BTreeSet::new()
            }
        };
        let soz = patient.clinical.soz_channels.clone();
        let all_channels: Vec<ChannelId> = features.iter().map(|f| f.channel.clone()).collect();
        let (states, _) = concordance::overlap_states(&all_channels, &soz, &outliers);
        let mut viz_warnings = write_viz_patient_files(
            &mut emitter,
            &config.emit,
            &patient.patient_id,
            &events,
            &features,
            &soz,
            &outliers,
            &states,
        )?;
        warnings.append(&mut viz_warnings);
    }

    let rounded: Vec<ConcordanceReport<F>> =
        parse_reports_csv(&read_text(&config.out_dir.join("concordance.csv"))?)?;
    write_metric_files(&mut emitter, &config.emit, &rounded, &clinical)?;

    Ok(RunSummary {
        warnings,
        files: emitter.files,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::Outcome;

    fn report(id: &str) -> ConcordanceReport<f64> {
        ConcordanceReport {
            patient_id: id.into(),
            m_exact: 1,
            r_exact: 0.25,
            m_index: 3,
            r_index: 0.75,
            exact_precision: 1.0 / 3.0,
            exact_recall: 0.25,
            exact_f1: 0.2857142857142857,
            index_precision: 0.75,
            index_recall: 0.625,
            index_f1: 0.6818181818181818,
            n_soz: 4,
            n_outliers: 3,
        }
    }

    #[test]
    fn concordance_csv_round_trips_at_six_decimals() {
        let reports = vec![report("pt1"), report("pt2")];
        let csv = reports_table(&reports).to_csv_string();
        let parsed: Vec<ConcordanceReport<f64>> = parse_reports_csv(&csv).unwrap();
        assert_eq!(parsed.len(), 2);
        assert_eq!(parsed[0].m_exact, 1);
        assert_eq!(parsed[0].r_exact, 0.25);
        // full precision 1/3 was rounded on emission
        assert_eq!(parsed[0].exact_precision, 0.333333);
        // re-serializing the parsed reports is a fixed point
        let csv2 = reports_table(&parsed).to_csv_string();
        assert_eq!(csv, csv2);
    }

    #[test]
    fn lof_dump_round_trips_flags() {
        let channels: Vec<ChannelId> = ["LAT1", "LAT2", "PD1"]
            .iter()
            .map(|l| ChannelId::parse(l).unwrap())
            .collect();
        let result = LofResult {
            channels: channels.clone(),
            scores: vec![1.0, 5.5, 0.9],
            effective_k: 2,
            threshold_tau: Some(5.5),
            flagged: vec![false, true, false],
        };
        let csv = lof_table(&channels, Some(&result)).to_csv_string();
        let dump = parse_lof_dump(&csv).unwrap();
        assert_eq!(dump.channels, channels);
        assert_eq!(dump.flagged, vec![false, true, false]);
        assert_eq!(
            dump.outliers().into_iter().collect::<Vec<_>>(),
            vec![ChannelId::parse("LAT2").unwrap()]
        );
    }

    #[test]
    fn skipped_lof_dump_has_empty_scores() {
        let channels = vec![ChannelId::parse("LAT1").unwrap()];
        let csv = lof_table::<f64>(&channels, None).to_csv_string();
        assert_eq!(csv, "channel,score,flagged,tau,effective_k\nLAT1,,0,,0\n");
        let dump = parse_lof_dump(&csv).unwrap();
        assert!(dump.outliers().is_empty());
    }

    #[test]
    fn sanitize_keeps_safe_names() {
        assert_eq!(sanitize("jh101"), "jh101");
        assert_eq!(sanitize("pt-1_3.x"), "pt-1_3.x");
        assert_eq!(sanitize("a b/c"), "a_b_c");
    }

    #[test]
    fn analyze_patient_flags_small_patients() {
        let patient = PatientData::<f64> {
            patient_id: "tiny".into(),
            events: vec![ChirpEvent {
                patient_id: "tiny".into(),
                channel: ChannelId::parse("LAT1").unwrap(),
                onset_time_s: 0.0,
                offset_time_s: 1.0,
                onset_freq_hz: 10.0,
                offset_freq_hz: 20.0,
                r2: None,
                rmse: None,
                direction: None,
                poor_contact: false,
            }],
            clinical: ClinicalRecord {
                patient_id: "tiny".into(),
                soz_channels: BTreeSet::new(),
                outcome: Outcome::Na,
                post_op_progress: String::new(),
                engel_or_ilae: None,
                extra_features: BTreeMap::new(),
            },
        };
        let analysis = analyze_patient(&patient, &LofConfig::default(), None);
        assert!(analysis.lof.is_none());
        assert!(analysis.outliers.is_empty());
        assert_eq!(analysis.report.n_outliers, 0);
        assert_eq!(analysis.report.exact_f1, 0.0);
        assert_eq!(analysis.warnings.len(), 1);
        assert!(analysis.warnings[0].contains("LOF skipped"));
    }
}
