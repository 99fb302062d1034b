//! Ingestion of chirp annotation tables and clinical metadata.
//!
//! Input formats:
//! - `chirps.csv` — UTF-8, comma-separated, header required, columns
//!   `patient_id, channel, onset_time_s, offset_time_s, onset_freq_hz,
//!   offset_freq_hz, r2, rmse, direction, poor_contact`. The `r2`, `rmse`
//!   and `direction` columns may be empty or absent entirely;
//!   `poor_contact` is `0` or `1`.
//! - `clinical.json` — array of objects `{patient_id, soz_channels,
//!   outcome, post_op_progress, extra_features}` (plus optional
//!   `engel_or_ilae`).
//!
//! Channel labels are normalized (uppercase, trimmed) at ingest so all
//! downstream matching is case-insensitive. Events are not deduplicated.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::channelid::ChannelId;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Chirp frequency sweep direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Up,
    Down,
    Flat,
}

impl Direction {
    fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "up" => Some(Direction::Up),
            "down" => Some(Direction::Down),
            "flat" => Some(Direction::Flat),
            _ => None,
        }
    }

    fn as_str(&self) -> &'static str {
        match self {
            Direction::Up => "up",
            Direction::Down => "down",
            Direction::Flat => "flat",
        }
    }
}

/// One annotated chirp occurrence on one channel.
#[derive(Debug, Clone, PartialEq)]
pub struct ChirpEvent<F> {
    pub patient_id: String,
    pub channel: ChannelId,
    pub onset_time_s: F,
    pub offset_time_s: F,
    pub onset_freq_hz: F,
    pub offset_freq_hz: F,
    pub r2: Option<F>,
    pub rmse: Option<F>,
    pub direction: Option<Direction>,
    pub poor_contact: bool,
}

impl<F: Scalar> ChirpEvent<F> {
    /// Temporal duration; strictly positive for any event that passed ingest.
    pub fn duration_s(&self) -> F {
        self.offset_time_s - self.onset_time_s
    }
}

/// Post-operative outcome category.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Outcome {
    Success,
    Failure,
    NoResection,
    Na,
}

impl Outcome {
    /// Maps the literal strings `S`, `F`, `NR`; everything else is `na`.
    pub fn parse_lossy(s: &str) -> Self {
        match s.trim() {
            "S" => Outcome::Success,
            "F" => Outcome::Failure,
            "NR" => Outcome::NoResection,
            _ => Outcome::Na,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Outcome::Success => "S",
            Outcome::Failure => "F",
            Outcome::NoResection => "NR",
            Outcome::Na => "na",
        }
    }
}

impl Serialize for Outcome {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for Outcome {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Ok(Outcome::parse_lossy(&s))
    }
}

/// Clinical annotation for one patient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClinicalRecord {
    pub patient_id: String,
    /// May legitimately be empty (e.g. no SOZ was annotated).
    pub soz_channels: BTreeSet<ChannelId>,
    pub outcome: Outcome,
    #[serde(default)]
    pub post_op_progress: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub engel_or_ilae: Option<String>,
    #[serde(default)]
    pub extra_features: BTreeMap<String, String>,
}

impl ClinicalRecord {
    /// Placeholder record for a patient that has chirp data but no clinical entry.
    pub fn unannotated(patient_id: &str) -> Self {
        ClinicalRecord {
            patient_id: patient_id.to_string(),
            soz_channels: BTreeSet::new(),
            outcome: Outcome::Na,
            post_op_progress: String::new(),
            engel_or_ilae: None,
            extra_features: BTreeMap::new(),
        }
    }
}

/// One patient's events joined with their clinical record.
#[derive(Debug, Clone, PartialEq)]
pub struct PatientData<F> {
    pub patient_id: String,
    pub events: Vec<ChirpEvent<F>>,
    pub clinical: ClinicalRecord,
}

/// Whole-study input, patients ordered lexicographically by id.
#[derive(Debug, Clone, PartialEq)]
pub struct Cohort<F> {
    pub patients: Vec<PatientData<F>>,
}

const REQUIRED_COLUMNS: [&str; 7] = [
    "patient_id",
    "channel",
    "onset_time_s",
    "offset_time_s",
    "onset_freq_hz",
    "offset_freq_hz",
    "poor_contact",
];
const OPTIONAL_COLUMNS: [&str; 3] = ["r2", "rmse", "direction"];

struct ColumnMap {
    patient_id: usize,
    channel: usize,
    onset_time_s: usize,
    offset_time_s: usize,
    onset_freq_hz: usize,
    offset_freq_hz: usize,
    poor_contact: usize,
    r2: Option<usize>,
    rmse: Option<usize>,
    direction: Option<usize>,
}

impl ColumnMap {
    fn from_headers(headers: &csv::StringRecord) -> Result<Self> {
        let mut index = BTreeMap::new();
        for (i, name) in headers.iter().enumerate() {
            let name = name.trim();
            if !REQUIRED_COLUMNS.contains(&name) && !OPTIONAL_COLUMNS.contains(&name) {
                return Err(Error::UnexpectedColumn(name.to_string()));
            }
            index.insert(name.to_string(), i);
        }
        let required = |name: &str| -> Result<usize> {
            index
                .get(name)
                .copied()
                .ok_or_else(|| Error::MissingColumn(name.to_string()))
        };
        Ok(ColumnMap {
            patient_id: required("patient_id")?,
            channel: required("channel")?,
            onset_time_s: required("onset_time_s")?,
            offset_time_s: required("offset_time_s")?,
            onset_freq_hz: required("onset_freq_hz")?,
            offset_freq_hz: required("offset_freq_hz")?,
            poor_contact: required("poor_contact")?,
            r2: index.get("r2").copied(),
            rmse: index.get("rmse").copied(),
            direction: index.get("direction").copied(),
        })
    }
}

fn row_error(line: u64, message: impl Into<String>) -> Error {
    Error::Row {
        line,
        message: message.into(),
    }
}

fn parse_float<F: Scalar>(record: &csv::StringRecord, idx: usize, name: &str, line: u64) -> Result<F> {
    let cell = record.get(idx).unwrap_or("").trim();
    let value = cell
        .parse::<F>()
        .map_err(|_| row_error(line, format!("non-numeric value in column `{name}`: `{cell}`")))?;
    if !value.is_finite() {
        return Err(row_error(
            line,
            format!("non-finite value in column `{name}`: `{cell}`"),
        ));
    }
    Ok(value)
}

fn parse_optional_float<F: Scalar>(
    record: &csv::StringRecord,
    idx: Option<usize>,
    name: &str,
    line: u64,
) -> Result<Option<F>> {
    match idx {
        None => Ok(None),
        Some(i) => {
            let cell = record.get(i).unwrap_or("").trim();
            if cell.is_empty() {
                Ok(None)
            } else {
                parse_float(record, i, name, line).map(Some)
            }
        }
    }
}

/// Parse a chirp annotation table from CSV bytes.
///
/// Row order is preserved. Schema violations (missing or unexpected columns)
/// fail before any row is read; per-row failures name the 1-based line.
pub fn parse_chirp_table<F: Scalar>(input: impl Read) -> Result<Vec<ChirpEvent<F>>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let columns = ColumnMap::from_headers(reader.headers()?)?;

    let mut events = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);

        let patient_id = record.get(columns.patient_id).unwrap_or("").trim().to_string();
        if patient_id.is_empty() {
            return Err(row_error(line, "empty patient_id"));
        }
        let channel_raw = record.get(columns.channel).unwrap_or("");
        let channel = ChannelId::parse(channel_raw)
            .map_err(|_| row_error(line, "empty channel label"))?;

        let onset_time_s: F = parse_float(&record, columns.onset_time_s, "onset_time_s", line)?;
        let offset_time_s: F = parse_float(&record, columns.offset_time_s, "offset_time_s", line)?;
        let onset_freq_hz: F = parse_float(&record, columns.onset_freq_hz, "onset_freq_hz", line)?;
        let offset_freq_hz: F = parse_float(&record, columns.offset_freq_hz, "offset_freq_hz", line)?;

        if onset_time_s < F::zero() {
            return Err(row_error(line, "negative onset_time_s"));
        }
        if offset_time_s <= onset_time_s {
            return Err(row_error(line, "non-positive duration"));
        }
        if onset_freq_hz <= F::zero() || offset_freq_hz <= F::zero() {
            return Err(row_error(line, "non-positive frequency"));
        }

        let r2: Option<F> = parse_optional_float(&record, columns.r2, "r2", line)?;
        if let Some(v) = r2 {
            if v < F::zero() || v > F::one() {
                return Err(row_error(line, format!("r2 outside [0,1]: `{v}`")));
            }
        }
        let rmse: Option<F> = parse_optional_float(&record, columns.rmse, "rmse", line)?;
        if let Some(v) = rmse {
            if v < F::zero() {
                return Err(row_error(line, format!("negative rmse: `{v}`")));
            }
        }

        let direction = match columns.direction {
            None => None,
            Some(i) => {
                let cell = record.get(i).unwrap_or("").trim();
                if cell.is_empty() {
                    None
                } else {
                    Some(Direction::parse(cell).ok_or_else(|| {
                        row_error(line, format!("unknown direction `{cell}` (expected up/down/flat)"))
                    })?)
                }
            }
        };

        let poor_contact = match record.get(columns.poor_contact).unwrap_or("").trim() {
            "0" => false,
            "1" => true,
            other => {
                return Err(row_error(
                    line,
                    format!("poor_contact must be 0 or 1, got `{other}`"),
                ))
            }
        };

        events.push(ChirpEvent {
            patient_id,
            channel,
            onset_time_s,
            offset_time_s,
            onset_freq_hz,
            offset_freq_hz,
            r2,
            rmse,
            direction,
            poor_contact,
        });
    }
    Ok(events)
}

/// Serialize events to the `chirps.csv` format `parse_chirp_table` reads.
///
/// Floats are written with Rust's shortest round-trip representation, so
/// `parse(serialize(x)) == x` exactly.
pub fn write_chirp_table<F: Scalar>(events: &[ChirpEvent<F>]) -> String {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    writer
        .write_record([
            "patient_id",
            "channel",
            "onset_time_s",
            "offset_time_s",
            "onset_freq_hz",
            "offset_freq_hz",
            "r2",
            "rmse",
            "direction",
            "poor_contact",
        ])
        .expect("in-memory write");
    for e in events {
        let opt = |v: &Option<F>| v.map(|x| x.to_string()).unwrap_or_default();
        writer
            .write_record([
                e.patient_id.clone(),
                e.channel.raw().to_string(),
                e.onset_time_s.to_string(),
                e.offset_time_s.to_string(),
                e.onset_freq_hz.to_string(),
                e.offset_freq_hz.to_string(),
                opt(&e.r2),
                opt(&e.rmse),
                e.direction.map(|d| d.as_str().to_string()).unwrap_or_default(),
                if e.poor_contact { "1" } else { "0" }.to_string(),
            ])
            .expect("in-memory write");
    }
    String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("utf-8 output")
}

#[derive(Deserialize)]
struct ClinicalRecordDe {
    patient_id: String,
    #[serde(default)]
    soz_channels: Vec<String>,
    #[serde(default)]
    outcome: Option<String>,
    #[serde(default)]
    post_op_progress: String,
    #[serde(default)]
    engel_or_ilae: Option<String>,
    #[serde(default)]
    extra_features: BTreeMap<String, String>,
}

/// Parse clinical metadata from JSON bytes.
///
/// Unknown outcome strings map to `na`; duplicate patient ids are an error.
pub fn parse_clinical(input: &[u8]) -> Result<Vec<ClinicalRecord>> {
    let raw: Vec<ClinicalRecordDe> = serde_json::from_slice(input)?;
    let mut seen = BTreeSet::new();
    let mut records = Vec::with_capacity(raw.len());
    for r in raw {
        let patient_id = r.patient_id.trim().to_string();
        if patient_id.is_empty() {
            return Err(Error::InvalidClinical("empty patient_id".into()));
        }
        if !seen.insert(patient_id.clone()) {
            return Err(Error::DuplicatePatient(patient_id));
        }
        let mut soz_channels = BTreeSet::new();
        for label in &r.soz_channels {
            soz_channels.insert(ChannelId::parse(label)?);
        }
        records.push(ClinicalRecord {
            patient_id,
            soz_channels,
            outcome: Outcome::parse_lossy(r.outcome.as_deref().unwrap_or("")),
            post_op_progress: r.post_op_progress,
            engel_or_ilae: r.engel_or_ilae,
            extra_features: r.extra_features,
        });
    }
    Ok(records)
}

/// Serialize clinical records to the JSON format `parse_clinical` reads.
pub fn write_clinical(records: &[ClinicalRecord]) -> String {
    let mut out = serde_json::to_string_pretty(records).expect("clinical records serialize");
    out.push('\n');
    out
}

/// Drop poor-contact events, and events below the R² floor when one is set.
///
/// Events lacking an R² value are retained regardless of the floor. The
/// surviving events keep their input order; the filter is idempotent.
pub fn apply_quality_filter<F: Scalar>(
    mut events: Vec<ChirpEvent<F>>,
    r2_min: Option<F>,
) -> Vec<ChirpEvent<F>> {
    events.retain(|e| {
        if e.poor_contact {
            return false;
        }
        match (r2_min, e.r2) {
            (Some(floor), Some(r2)) => r2 >= floor,
            _ => true,
        }
    });
    events
}

/// Join events with clinical records into a patient-ordered cohort.
///
/// The patient set is the union of both sources: patients with events but no
/// clinical entry get an unannotated placeholder record, patients with a
/// clinical entry but no events get an empty event list; both cases produce
/// a warning.
pub fn build_cohort<F: Scalar>(
    events: Vec<ChirpEvent<F>>,
    clinical: Vec<ClinicalRecord>,
) -> (Cohort<F>, Vec<String>) {
    let mut by_patient: BTreeMap<String, Vec<ChirpEvent<F>>> = BTreeMap::new();
    for e in events {
        by_patient.entry(e.patient_id.clone()).or_default().push(e);
    }
    let mut clinical_by_id: BTreeMap<String, ClinicalRecord> = clinical
        .into_iter()
        .map(|c| (c.patient_id.clone(), c))
        .collect();

    let ids: BTreeSet<String> = by_patient
        .keys()
        .chain(clinical_by_id.keys())
        .cloned()
        .collect();

    let mut warnings = Vec::new();
    let mut patients = Vec::with_capacity(ids.len());
    for id in ids {
        let events = by_patient.remove(&id).unwrap_or_default();
        let clinical = match clinical_by_id.remove(&id) {
            Some(c) => c,
            None => {
                warnings.push(format!("patient `{id}` has chirp events but no clinical record"));
                ClinicalRecord::unannotated(&id)
            }
        };
        if events.is_empty() {
            warnings.push(format!("patient `{id}` has a clinical record but no chirp events"));
        }
        patients.push(PatientData {
            patient_id: id,
            events,
            clinical,
        });
    }
    (Cohort { patients }, warnings)
}
