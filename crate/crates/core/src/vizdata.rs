//! Plot-ready data products: 3D feature embeddings, radial projections,
//! HSL channel colors, overlap grids and metric tables.
//!
//! CSV tables are the contract; the SVG renderers are a thin best-effort
//! layer over the same data. Everything here is deterministic byte-for-byte
//! given identical inputs.

use std::collections::BTreeMap;

use crate::channelid::ChannelId;
use crate::concordance::{ConcordanceReport, OverlapState};
use crate::features::ChannelFeatureVector;
use crate::ingest::{ChirpEvent, ClinicalRecord};
use crate::scalar::Scalar;
use crate::table::{fmt_fixed, Table};

/// HSL color; hue in degrees, saturation and lightness in percent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hsl<F> {
    pub h: F,
    pub s: F,
    pub l: F,
}

/// One channel in the raw (unstandardized) 3D feature space.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingPoint3D<F> {
    pub channel: ChannelId,
    /// Median duration (seconds).
    pub x: F,
    /// Median onset frequency (hertz).
    pub y: F,
    /// Median offset frequency (hertz).
    pub z: F,
    pub color: Hsl<F>,
    pub is_soz: bool,
    pub is_outlier: bool,
}

/// Feature projected onto the radial axis of a polar plot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum FeatureKind {
    Duration,
    StartFreq,
    EndFreq,
    Bandwidth,
    Slope,
}

impl FeatureKind {
    pub const ALL: [FeatureKind; 5] = [
        FeatureKind::Duration,
        FeatureKind::StartFreq,
        FeatureKind::EndFreq,
        FeatureKind::Bandwidth,
        FeatureKind::Slope,
    ];

    /// Name used in `radial_<kind>_<patient>.csv` filenames.
    pub fn name(&self) -> &'static str {
        match self {
            FeatureKind::Duration => "duration",
            FeatureKind::StartFreq => "start_freq",
            FeatureKind::EndFreq => "end_freq",
            FeatureKind::Bandwidth => "bandwidth",
            FeatureKind::Slope => "slope",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "duration" => Some(FeatureKind::Duration),
            "start_freq" => Some(FeatureKind::StartFreq),
            "end_freq" => Some(FeatureKind::EndFreq),
            "bandwidth" => Some(FeatureKind::Bandwidth),
            "slope" => Some(FeatureKind::Slope),
            _ => None,
        }
    }
}

/// One channel on a polar plot.
///
/// `radius` is nonnegative; a negative slope keeps its magnitude here and
/// sets `negative`, which emission carries as its own column.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarPoint<F> {
    pub channel: ChannelId,
    pub feature_kind: FeatureKind,
    /// In [0, 2π); channel i of n gets 2πi/n.
    pub angle_rad: F,
    pub radius: F,
    pub negative: bool,
}

/// Golden-angle hue step in degrees.
const GOLDEN_ANGLE_DEG: f64 = 137.508;
const SATURATION_PCT: f64 = 70.0;
const LIGHTNESS_LO_PCT: f64 = 35.0;
const LIGHTNESS_HI_PCT: f64 = 65.0;

/// Assign a deterministic HSL color per channel.
///
/// Distinct prefixes get hues along the golden-angle sequence in sorted
/// prefix order; within a prefix, lightness runs linearly from 35% to 65%
/// by electrode number rank. Saturation is fixed at 70%.
pub fn hsl_channel_colors<F: Scalar>(channels: &[ChannelId]) -> BTreeMap<ChannelId, Hsl<F>> {
    let mut by_prefix: BTreeMap<String, Vec<&ChannelId>> = BTreeMap::new();
    for c in channels {
        by_prefix.entry(c.prefix().to_string()).or_default().push(c);
    }
    let mut colors = BTreeMap::new();
    for (rank, (_, mut members)) in by_prefix.into_iter().enumerate() {
        members.sort_by_key(|c| (c.number(), c.raw().to_string()));
        let hue = (rank as f64 * GOLDEN_ANGLE_DEG) % 360.0;
        let m = members.len();
        for (i, c) in members.into_iter().enumerate() {
            let t = if m <= 1 { 0.0 } else { i as f64 / (m - 1) as f64 };
            let lightness = LIGHTNESS_LO_PCT + (LIGHTNESS_HI_PCT - LIGHTNESS_LO_PCT) * t;
            colors.insert(
                c.clone(),
                Hsl {
                    h: F::from_f64(hue).expect("hue representable"),
                    s: F::from_f64(SATURATION_PCT).expect("saturation representable"),
                    l: F::from_f64(lightness).expect("lightness representable"),
                },
            );
        }
    }
    colors
}

fn membership(set: &std::collections::BTreeSet<ChannelId>, c: &ChannelId) -> bool {
    set.contains(c)
}

/// Map channel-median features straight into 3D points with flags attached.
pub fn embedding3d<F: Scalar>(
    features: &[ChannelFeatureVector<F>],
    soz: &std::collections::BTreeSet<ChannelId>,
    outliers: &std::collections::BTreeSet<ChannelId>,
) -> Vec<EmbeddingPoint3D<F>> {
    let channels: Vec<ChannelId> = features.iter().map(|f| f.channel.clone()).collect();
    let colors = hsl_channel_colors::<F>(&channels);
    features
        .iter()
        .map(|f| EmbeddingPoint3D {
            channel: f.channel.clone(),
            x: f.median_duration_s,
            y: f.median_start_freq_hz,
            z: f.median_end_freq_hz,
            color: colors[&f.channel],
            is_soz: membership(soz, &f.channel),
            is_outlier: membership(outliers, &f.channel),
        })
        .collect()
}

/// Per-event variant: one point per chirp instead of per channel.
pub fn embedding3d_events<F: Scalar>(
    events: &[ChirpEvent<F>],
    soz: &std::collections::BTreeSet<ChannelId>,
    outliers: &std::collections::BTreeSet<ChannelId>,
) -> Vec<EmbeddingPoint3D<F>> {
    let mut channels: Vec<ChannelId> = events.iter().map(|e| e.channel.clone()).collect();
    channels.sort();
    channels.dedup();
    let colors = hsl_channel_colors::<F>(&channels);
    events
        .iter()
        .map(|e| EmbeddingPoint3D {
            channel: e.channel.clone(),
            x: e.duration_s(),
            y: e.onset_freq_hz,
            z: e.offset_freq_hz,
            color: colors[&e.channel],
            is_soz: membership(soz, &e.channel),
            is_outlier: membership(outliers, &e.channel),
        })
        .collect()
}

/// `embedding3d_<patient>.csv` layout.
pub fn embedding_table<F: Scalar>(points: &[EmbeddingPoint3D<F>]) -> Table {
    let mut table = Table::new([
        "channel",
        "duration_s",
        "onset_freq_hz",
        "offset_freq_hz",
        "hsl_h",
        "hsl_s",
        "hsl_l",
        "is_soz",
        "is_outlier",
    ]);
    for p in points {
        table.push_row(vec![
            p.channel.raw().to_string(),
            fmt_fixed(p.x),
            fmt_fixed(p.y),
            fmt_fixed(p.z),
            fmt_fixed(p.color.h),
            fmt_fixed(p.color.s),
            fmt_fixed(p.color.l),
            u8::from(p.is_soz).to_string(),
            u8::from(p.is_outlier).to_string(),
        ]);
    }
    table
}

/// Project channel medians onto a polar axis.
///
/// Channel i of n (input order, which aggregation keeps lexicographic) gets
/// angle 2πi/n; the radius is the feature magnitude in native units. A
/// slope with zero duration would be skipped with a warning, though ingest
/// invariants make that unreachable for valid data.
pub fn radial_projection<F: Scalar>(
    features: &[ChannelFeatureVector<F>],
    kind: FeatureKind,
) -> (Vec<PolarPoint<F>>, Vec<String>) {
    let n = features.len();
    let tau = F::from_f64(std::f64::consts::TAU).expect("tau representable");
    let mut points = Vec::with_capacity(n);
    let mut warnings = Vec::new();
    for (i, f) in features.iter().enumerate() {
        let angle_rad = tau * F::from_count(i) / F::from_count(n);
        let value = match kind {
            FeatureKind::Duration => f.median_duration_s,
            FeatureKind::StartFreq => f.median_start_freq_hz,
            FeatureKind::EndFreq => f.median_end_freq_hz,
            FeatureKind::Bandwidth => (f.median_end_freq_hz - f.median_start_freq_hz).abs(),
            FeatureKind::Slope => {
                if f.median_duration_s <= F::zero() {
                    warnings.push(format!(
                        "channel {}: zero duration, slope projection skipped",
                        f.channel
                    ));
                    continue;
                }
                (f.median_end_freq_hz - f.median_start_freq_hz) / f.median_duration_s
            }
        };
        points.push(PolarPoint {
            channel: f.channel.clone(),
            feature_kind: kind,
            angle_rad,
            radius: value.abs(),
            negative: value < F::zero(),
        });
    }
    (points, warnings)
}

/// Min-max rescale radii to [0, 1] in place (optional, behind a flag).
///
/// A constant radius column maps to all zeros.
pub fn scale_radii<F: Scalar>(points: &mut [PolarPoint<F>]) {
    if points.is_empty() {
        return;
    }
    let mut lo = points[0].radius;
    let mut hi = points[0].radius;
    for p in points.iter() {
        lo = lo.min(p.radius);
        hi = hi.max(p.radius);
    }
    let span = hi - lo;
    for p in points.iter_mut() {
        p.radius = if span > F::zero() {
            (p.radius - lo) / span
        } else {
            F::zero()
        };
    }
}

/// `radial_<kind>_<patient>.csv` layout.
pub fn radial_table<F: Scalar>(points: &[PolarPoint<F>]) -> Table {
    let mut table = Table::new(["channel", "angle_rad", "radius", "negative"]);
    for p in points {
        table.push_row(vec![
            p.channel.raw().to_string(),
            fmt_fixed(p.angle_rad),
            fmt_fixed(p.radius),
            u8::from(p.negative).to_string(),
        ]);
    }
    table
}

/// `grids_<patient>.csv`: three aligned binary/state tables, one row per
/// channel in lexicographic order.
///
/// State encoding: 0 = Neither, 1 = OutlierOnly, 2 = SozOnly, 3 = Both.
pub fn grid_table(states: &BTreeMap<ChannelId, OverlapState>) -> Table {
    let mut table = Table::new(["channel", "soz", "outlier", "state"]);
    for (channel, state) in states {
        let soz = matches!(state, OverlapState::Both | OverlapState::SozOnly);
        let outlier = matches!(state, OverlapState::Both | OverlapState::OutlierOnly);
        table.push_row(vec![
            channel.raw().to_string(),
            u8::from(soz).to_string(),
            u8::from(outlier).to_string(),
            state.code().to_string(),
        ]);
    }
    table
}

/// Heatmap and boxplot source tables derived from per-patient reports.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricTables {
    /// 3 metric rows × patient columns, exact matching.
    pub heatmap_exact: Table,
    /// 3 metric rows × patient columns, index matching.
    pub heatmap_index: Table,
    /// Long format: patient, method, metric, value, clinical feature values.
    pub boxplot_long: Table,
}

/// Build the heatmap and boxplot source tables.
pub fn emit_metric_tables<F: Scalar>(
    reports: &[ConcordanceReport<F>],
    clinical: &[ClinicalRecord],
) -> MetricTables {
    let clinical_by_id: BTreeMap<&str, &ClinicalRecord> = clinical
        .iter()
        .map(|c| (c.patient_id.as_str(), c))
        .collect();

    let heatmap = |exact: bool| -> Table {
        let mut columns = vec!["metric".to_string()];
        columns.extend(reports.iter().map(|r| r.patient_id.clone()));
        let mut table = Table::new(columns);
        let rows: [(&str, fn(&ConcordanceReport<F>, bool) -> F); 3] = [
            ("precision", |r, e| if e { r.exact_precision } else { r.index_precision }),
            ("recall", |r, e| if e { r.exact_recall } else { r.index_recall }),
            ("f1", |r, e| if e { r.exact_f1 } else { r.index_f1 }),
        ];
        for (name, get) in rows {
            let mut row = vec![name.to_string()];
            row.extend(reports.iter().map(|r| fmt_fixed(get(r, exact))));
            table.push_row(row);
        }
        table
    };
    let heatmap_exact = heatmap(true);
    let heatmap_index = heatmap(false);

    let mut boxplot_long = Table::new([
        "patient_id",
        "method",
        "metric",
        "value",
        "outcome",
        "post_op_progress",
    ]);
    for r in reports {
        let (outcome, progress) = match clinical_by_id.get(r.patient_id.as_str()) {
            Some(c) => (
                c.outcome.as_str().to_string(),
                if c.post_op_progress.trim().is_empty() {
                    "na".to_string()
                } else {
                    c.post_op_progress.clone()
                },
            ),
            None => ("na".to_string(), "na".to_string()),
        };
        let cells: [(&str, &str, F); 6] = [
            ("exact", "precision", r.exact_precision),
            ("exact", "recall", r.exact_recall),
            ("exact", "f1", r.exact_f1),
            ("index", "precision", r.index_precision),
            ("index", "recall", r.index_recall),
            ("index", "f1", r.index_f1),
        ];
        for (method, metric, value) in cells {
            boxplot_long.push_row(vec![
                r.patient_id.clone(),
                method.to_string(),
                metric.to_string(),
                fmt_fixed(value),
                outcome.clone(),
                progress.clone(),
            ]);
        }
    }

    MetricTables {
        heatmap_exact,
        heatmap_index,
        boxplot_long,
    }
}

// --- SVG rendering (best effort over the CSV data) ---

const CELL: i32 = 18;
const LABEL_W: i32 = 90;

fn svg_header(width: i32, height: i32) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" \
         viewBox=\"0 0 {width} {height}\" font-family=\"monospace\" font-size=\"10\">\n"
    )
}

fn state_fill(state: OverlapState) -> &'static str {
    match state {
        OverlapState::Both => "#4b0082",
        OverlapState::SozOnly => "#008080",
        OverlapState::OutlierOnly => "#ff00ff",
        OverlapState::Neither => "#c0c0c0",
    }
}

/// Render a patient's overlap grid as three aligned cell columns.
pub fn grid_svg(patient_id: &str, states: &BTreeMap<ChannelId, OverlapState>) -> String {
    let n = states.len() as i32;
    let width = LABEL_W + 3 * CELL + 8;
    let height = (n + 2) * CELL;
    let mut out = svg_header(width, height);
    out.push_str(&format!(
        "<text x=\"2\" y=\"{}\">{} soz/outlier/state</text>\n",
        CELL - 4,
        patient_id
    ));
    for (row, (channel, &state)) in states.iter().enumerate() {
        let y = (row as i32 + 1) * CELL;
        out.push_str(&format!(
            "<text x=\"2\" y=\"{}\">{}</text>\n",
            y + CELL - 5,
            channel.raw()
        ));
        let soz = matches!(state, OverlapState::Both | OverlapState::SozOnly);
        let outlier = matches!(state, OverlapState::Both | OverlapState::OutlierOnly);
        let fills = [
            if soz { "#008080" } else { "#c0c0c0" },
            if outlier { "#ff00ff" } else { "#c0c0c0" },
            state_fill(state),
        ];
        for (col, fill) in fills.iter().enumerate() {
            out.push_str(&format!(
                "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\" stroke=\"#fff\"/>\n",
                LABEL_W + col as i32 * CELL,
                y,
                CELL,
                CELL,
                fill
            ));
        }
    }
    out.push_str("</svg>\n");
    out
}

fn value_fill(value: f64) -> String {
    // linear ramp from dark purple to yellow
    let t = value.clamp(0.0, 1.0);
    let lerp = |a: f64, b: f64| -> i32 { (a + (b - a) * t).round() as i32 };
    format!("#{:02x}{:02x}{:02x}", lerp(68.0, 253.0), lerp(1.0, 231.0), lerp(84.0, 37.0))
}

/// Render a metric × patient heatmap table (values expected in [0, 1]).
pub fn heatmap_svg(table: &Table) -> String {
    let cell_w = 64;
    let n_cols = table.columns.len().saturating_sub(1) as i32;
    let n_rows = table.rows.len() as i32;
    let width = LABEL_W + n_cols * cell_w + 8;
    let height = (n_rows + 2) * CELL;
    let mut out = svg_header(width, height);
    for (col, name) in table.columns.iter().skip(1).enumerate() {
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\">{}</text>\n",
            LABEL_W + col as i32 * cell_w + 2,
            CELL - 4,
            name
        ));
    }
    for (row, cells) in table.rows.iter().enumerate() {
        let y = (row as i32 + 1) * CELL;
        out.push_str(&format!(
            "<text x=\"2\" y=\"{}\">{}</text>\n",
            y + CELL - 5,
            cells[0]
        ));
        for (col, cell) in cells.iter().skip(1).enumerate() {
            let value: f64 = cell.parse().unwrap_or(0.0);
            let x = LABEL_W + col as i32 * cell_w;
            out.push_str(&format!(
                "<rect x=\"{x}\" y=\"{y}\" width=\"{cell_w}\" height=\"{CELL}\" fill=\"{}\" stroke=\"#fff\"/>\n",
                value_fill(value)
            ));
            out.push_str(&format!(
                "<text x=\"{}\" y=\"{}\" fill=\"#fff\">{}</text>\n",
                x + 2,
                y + CELL - 5,
                cell
            ));
        }
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::concordance::overlap_states;
    use approx::assert_relative_eq;
    use std::collections::BTreeSet;
    use std::f64::consts::PI;

    fn id(l: &str) -> ChannelId {
        ChannelId::parse(l).unwrap()
    }

    fn set(labels: &[&str]) -> BTreeSet<ChannelId> {
        labels.iter().map(|l| id(l)).collect()
    }

    fn vector(channel: &str, start: f64, end: f64, duration: f64) -> ChannelFeatureVector<f64> {
        ChannelFeatureVector {
            channel: id(channel),
            median_start_freq_hz: start,
            median_end_freq_hz: end,
            median_duration_s: duration,
            n_events: 1,
        }
    }

    #[test]
    fn four_channels_get_quarter_turn_angles() {
        let features: Vec<_> = ["A1", "A2", "A3", "A4"]
            .iter()
            .map(|l| vector(l, 10.0, 20.0, 1.0))
            .collect();
        let (points, warnings) = radial_projection(&features, FeatureKind::Duration);
        assert!(warnings.is_empty());
        let angles: Vec<f64> = points.iter().map(|p| p.angle_rad).collect();
        assert_relative_eq!(angles[0], 0.0);
        assert_relative_eq!(angles[1], PI / 2.0);
        assert_relative_eq!(angles[2], PI);
        assert_relative_eq!(angles[3], 3.0 * PI / 2.0);
    }

    #[test]
    fn end_freq_radius_is_the_median_value() {
        let features = vec![vector("LAT1", 9.0, 14.9, 1.0), vector("LAT2", 9.0, 25.4, 1.0)];
        let (points, _) = radial_projection(&features, FeatureKind::EndFreq);
        assert_eq!(points[0].radius, 14.9);
        assert_eq!(points[1].radius, 25.4);
    }

    #[test]
    fn slope_radius_is_bandwidth_over_duration() {
        let features = vec![vector("A1", 8.0, 18.0, 2.0)];
        let (points, _) = radial_projection(&features, FeatureKind::Slope);
        assert_eq!(points[0].radius, 5.0);
        assert!(!points[0].negative);
    }

    #[test]
    fn negative_slope_keeps_magnitude_and_sign_flag() {
        let features = vec![vector("A1", 18.0, 9.0, 2.0)];
        let (points, _) = radial_projection(&features, FeatureKind::Slope);
        assert_eq!(points[0].radius, 4.5);
        assert!(points[0].negative);
        // bandwidth is also the absolute difference
        let (points, _) = radial_projection(&features, FeatureKind::Bandwidth);
        assert_eq!(points[0].radius, 9.0);
        assert!(!points[0].negative);
    }

    #[test]
    fn min_max_scaling_maps_to_unit_range() {
        let features = vec![
            vector("A1", 0.0, 0.0, 1.0),
            vector("A2", 0.0, 0.0, 3.0),
            vector("A3", 0.0, 0.0, 5.0),
        ];
        let (mut points, _) = radial_projection(&features, FeatureKind::Duration);
        scale_radii(&mut points);
        let radii: Vec<f64> = points.iter().map(|p| p.radius).collect();
        assert_eq!(radii, vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn golden_angle_hues_by_prefix_rank() {
        let channels = vec![id("ATT1"), id("LAT1"), id("LAT2")];
        let colors = hsl_channel_colors::<f64>(&channels);
        assert_eq!(colors[&id("ATT1")].h, 0.0);
        assert_eq!(colors[&id("LAT1")].h, 137.508);
        assert_eq!(colors[&id("LAT2")].h, 137.508);
        assert_eq!(colors[&id("ATT1")].s, 70.0);
    }

    #[test]
    fn lightness_interpolates_within_prefix() {
        let channels = vec![id("LAT1"), id("LAT2"), id("LAT3")];
        let colors = hsl_channel_colors::<f64>(&channels);
        assert_eq!(colors[&id("LAT1")].l, 35.0);
        assert_eq!(colors[&id("LAT2")].l, 50.0);
        assert_eq!(colors[&id("LAT3")].l, 65.0);
    }

    #[test]
    fn singleton_prefix_uses_low_endpoint() {
        let colors = hsl_channel_colors::<f64>(&[id("EKG")]);
        assert_eq!(colors[&id("EKG")].l, 35.0);
    }

    #[test]
    fn colors_are_injective_over_realistic_montage() {
        let mut channels = Vec::new();
        for prefix in ["LAT", "LAH", "RAT", "RAH", "PD", "AD", "ATT", "G"] {
            for n in 1..=12 {
                channels.push(id(&format!("{prefix}{n}")));
            }
        }
        let colors = hsl_channel_colors::<f64>(&channels);
        let mut seen = std::collections::BTreeSet::new();
        for c in &channels {
            let hsl = colors[c];
            assert!(
                seen.insert((hsl.h.to_bits(), hsl.l.to_bits())),
                "duplicate color for {c}"
            );
        }
    }

    #[test]
    fn embedding_is_a_flagged_passthrough() {
        let features = vec![vector("LAT1", 10.0, 20.0, 2.0), vector("PD1", 11.0, 21.0, 3.0)];
        let points = embedding3d(&features, &set(&["LAT1"]), &set(&["PD1"]));
        assert_eq!(points.len(), 2);
        assert_eq!((points[0].x, points[0].y, points[0].z), (2.0, 10.0, 20.0));
        assert!(points[0].is_soz && !points[0].is_outlier);
        assert!(!points[1].is_soz && points[1].is_outlier);
        // bijection: order and channels preserved
        let labels: Vec<_> = points.iter().map(|p| p.channel.raw().to_string()).collect();
        assert_eq!(labels, vec!["LAT1", "PD1"]);
        assert!(embedding3d::<f64>(&[], &set(&[]), &set(&[])).is_empty());
    }

    #[test]
    fn per_event_embedding_has_one_point_per_event() {
        let mut e1 = crate::ingest::ChirpEvent {
            patient_id: "pt1".into(),
            channel: id("LAT1"),
            onset_time_s: 0.0,
            offset_time_s: 2.0,
            onset_freq_hz: 10.0,
            offset_freq_hz: 20.0,
            r2: None,
            rmse: None,
            direction: None,
            poor_contact: false,
        };
        let e2 = {
            let mut e = e1.clone();
            e.offset_time_s = 3.0;
            e
        };
        e1.patient_id = "pt1".into();
        let points = embedding3d_events(&[e1, e2], &set(&["LAT1"]), &set(&[]));
        assert_eq!(points.len(), 2);
        assert_eq!(points[0].x, 2.0);
        assert_eq!(points[1].x, 3.0);
        assert!(points.iter().all(|p| p.is_soz));
    }

    #[test]
    fn grid_rows_are_lexicographic_and_encoded() {
        let all = vec![id("A1"), id("A2"), id("B1")];
        let (states, _) = overlap_states(&all, &set(&["A1", "A2"]), &set(&["A1", "B1"]));
        let table = grid_table(&states);
        assert_eq!(table.columns, vec!["channel", "soz", "outlier", "state"]);
        assert_eq!(table.rows[0], vec!["A1", "1", "1", "3"]);
        assert_eq!(table.rows[1], vec!["A2", "1", "0", "2"]);
        assert_eq!(table.rows[2], vec!["B1", "0", "1", "1"]);
    }

    #[test]
    fn zero_soz_patient_has_all_zero_soz_column() {
        let all = vec![id("A1"), id("A2")];
        let (states, _) = overlap_states(&all, &set(&[]), &set(&["A2"]));
        let table = grid_table(&states);
        assert!(table.rows.iter().all(|r| r[1] == "0"));
    }

    fn sample_report(id: &str, value: f64) -> ConcordanceReport<f64> {
        ConcordanceReport {
            patient_id: id.into(),
            m_exact: 0,
            r_exact: 0.0,
            m_index: 0,
            r_index: 0.0,
            exact_precision: value,
            exact_recall: value,
            exact_f1: value,
            index_precision: value,
            index_recall: value,
            index_f1: value,
            n_soz: 0,
            n_outliers: 0,
        }
    }

    #[test]
    fn heatmaps_have_one_column_per_patient() {
        let reports: Vec<_> = (1..=12)
            .map(|i| sample_report(&format!("p{i:02}"), 0.5))
            .collect();
        let tables = emit_metric_tables(&reports, &[]);
        assert_eq!(tables.heatmap_exact.columns.len(), 13);
        assert_eq!(tables.heatmap_exact.rows.len(), 3);
        assert_eq!(tables.heatmap_index.rows[2][0], "f1");
        assert_eq!(tables.heatmap_exact.rows[0][1], "0.500000");
        assert_eq!(tables.boxplot_long.rows.len(), 12 * 6);
    }

    #[test]
    fn empty_reports_yield_header_only_tables() {
        let tables = emit_metric_tables::<f64>(&[], &[]);
        assert_eq!(tables.heatmap_exact.rows.len(), 3);
        assert!(tables.heatmap_exact.rows.iter().all(|r| r.len() == 1));
        assert!(tables.boxplot_long.rows.is_empty());
    }

    #[test]
    fn svg_renderers_are_deterministic() {
        let all = vec![id("A1"), id("A2")];
        let (states, _) = overlap_states(&all, &set(&["A1"]), &set(&["A2"]));
        let a = grid_svg("pt1", &states);
        let b = grid_svg("pt1", &states);
        assert_eq!(a, b);
        assert!(a.starts_with("<svg"));
        assert!(a.contains("#008080"));

        let tables = emit_metric_tables(&[sample_report("p1", 1.0)], &[]);
        let svg = heatmap_svg(&tables.heatmap_exact);
        assert!(svg.contains("#fde725"));
    }
}
