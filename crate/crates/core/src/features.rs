//! Per-channel feature aggregation and per-patient standardization.
//!
//! Each channel is reduced to the median triple (start frequency, end
//! frequency, duration) over its surviving chirp events, then the three
//! feature columns are z-scored across the patient's channels using the
//! population standard deviation (divide by n). Zero-variance columns map
//! to all-zero z-scores instead of failing, so one- and two-channel
//! patients flow through the pipeline.

use std::collections::{BTreeMap, BTreeSet};

use crate::channelid::ChannelId;
use crate::ingest::ChirpEvent;
use crate::scalar::Scalar;

/// Number of features per channel: start frequency, end frequency, duration.
pub const N_FEATURES: usize = 3;

/// Column indices into the feature triple.
pub const START_FREQ: usize = 0;
pub const END_FREQ: usize = 1;
pub const DURATION: usize = 2;

/// Median chirp feature triple for one channel.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelFeatureVector<F> {
    pub channel: ChannelId,
    pub median_start_freq_hz: F,
    pub median_end_freq_hz: F,
    pub median_duration_s: F,
    pub n_events: usize,
}

impl<F: Scalar> ChannelFeatureVector<F> {
    /// Feature triple in column order.
    pub fn triple(&self) -> [F; N_FEATURES] {
        [
            self.median_start_freq_hz,
            self.median_end_freq_hz,
            self.median_duration_s,
        ]
    }
}

/// Z-scored feature matrix for one patient.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardizedMatrix<F> {
    pub channels: Vec<ChannelId>,
    /// One z-scored triple per channel, same order as `channels`.
    pub values: Vec<[F; N_FEATURES]>,
    pub means: [F; N_FEATURES],
    /// Population standard deviation per column (zero for degenerate columns).
    pub stds: [F; N_FEATURES],
    /// Columns whose standard deviation was zero; their z-scores are all zero.
    pub degenerate_features: BTreeSet<usize>,
}

/// Median of a non-empty slice; even-length medians average the two middle values.
fn median<F: Scalar>(values: &mut [F]) -> F {
    debug_assert!(!values.is_empty());
    values.sort_by(|a, b| a.partial_cmp(b).expect("finite feature values"));
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        let two = F::one() + F::one();
        (values[n / 2 - 1] + values[n / 2]) / two
    }
}

/// Reduce one patient's events to per-channel median feature triples.
///
/// All events must belong to one patient. Output is sorted lexicographically
/// by channel label; channels with zero surviving events are not represented,
/// and an empty event list yields an empty output.
pub fn aggregate_channel_features<F: Scalar>(
    events: &[ChirpEvent<F>],
) -> Vec<ChannelFeatureVector<F>> {
    let mut by_channel: BTreeMap<ChannelId, [Vec<F>; N_FEATURES]> = BTreeMap::new();
    for e in events {
        let entry = by_channel.entry(e.channel.clone()).or_default();
        entry[START_FREQ].push(e.onset_freq_hz);
        entry[END_FREQ].push(e.offset_freq_hz);
        entry[DURATION].push(e.duration_s());
    }
    by_channel
        .into_iter()
        .map(|(channel, mut cols)| {
            let n_events = cols[START_FREQ].len();
            ChannelFeatureVector {
                channel,
                median_start_freq_hz: median(&mut cols[START_FREQ]),
                median_end_freq_hz: median(&mut cols[END_FREQ]),
                median_duration_s: median(&mut cols[DURATION]),
                n_events,
            }
        })
        .collect()
}

/// Z-score each feature column over the patient's channels.
///
/// Uses the population convention (divide by n). A column with zero standard
/// deviation is set identically to zero and recorded in
/// `degenerate_features`; with a single channel every column is degenerate.
pub fn standardize<F: Scalar>(vectors: &[ChannelFeatureVector<F>]) -> StandardizedMatrix<F> {
    let n = vectors.len();
    let channels: Vec<ChannelId> = vectors.iter().map(|v| v.channel.clone()).collect();
    if n == 0 {
        return StandardizedMatrix {
            channels,
            values: Vec::new(),
            means: [F::zero(); N_FEATURES],
            stds: [F::zero(); N_FEATURES],
            degenerate_features: (0..N_FEATURES).collect(),
        };
    }

    let count = F::from_count(n);
    let mut means = [F::zero(); N_FEATURES];
    let mut stds = [F::zero(); N_FEATURES];
    let mut degenerate_features = BTreeSet::new();

    for col in 0..N_FEATURES {
        let mut sum = F::zero();
        for v in vectors {
            sum = sum + v.triple()[col];
        }
        let mean = sum / count;
        let mut sq_sum = F::zero();
        for v in vectors {
            let d = v.triple()[col] - mean;
            sq_sum = sq_sum + d * d;
        }
        let std = (sq_sum / count).sqrt();
        means[col] = mean;
        stds[col] = std;
        if std == F::zero() {
            degenerate_features.insert(col);
        }
    }

    let values = vectors
        .iter()
        .map(|v| {
            let mut row = [F::zero(); N_FEATURES];
            for col in 0..N_FEATURES {
                row[col] = if degenerate_features.contains(&col) {
                    F::zero()
                } else {
                    (v.triple()[col] - means[col]) / stds[col]
                };
            }
            row
        })
        .collect();

    StandardizedMatrix {
        channels,
        values,
        means,
        stds,
        degenerate_features,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channelid::ChannelId;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn event(channel: &str, start: f64, end: f64, duration: f64) -> ChirpEvent<f64> {
        ChirpEvent {
            patient_id: "pt1".into(),
            channel: ChannelId::parse(channel).unwrap(),
            onset_time_s: 0.0,
            offset_time_s: duration,
            onset_freq_hz: start,
            offset_freq_hz: end,
            r2: None,
            rmse: None,
            direction: None,
            poor_contact: false,
        }
    }

    #[test]
    fn odd_count_median_is_middle_value() {
        let events = vec![
            event("X1", 10.0, 20.0, 1.0),
            event("X1", 10.0, 20.0, 2.0),
            event("X1", 10.0, 20.0, 3.0),
        ];
        let vectors = aggregate_channel_features(&events);
        assert_eq!(vectors.len(), 1);
        assert_eq!(vectors[0].median_duration_s, 2.0);
        assert_eq!(vectors[0].n_events, 3);
    }

    #[test]
    fn even_count_median_averages_middle_pair() {
        let events = vec![
            event("X1", 10.0, 20.0, 1.0),
            event("X1", 10.0, 20.0, 2.0),
            event("X1", 10.0, 20.0, 3.0),
            event("X1", 10.0, 20.0, 4.0),
        ];
        let vectors = aggregate_channel_features(&events);
        assert_eq!(vectors[0].median_duration_s, 2.5);
    }

    #[test]
    fn single_event_passes_through_verbatim() {
        let events = vec![event("X1", 12.5, 9.25, 0.75)];
        let v = &aggregate_channel_features(&events)[0];
        assert_eq!(v.median_start_freq_hz, 12.5);
        assert_eq!(v.median_end_freq_hz, 9.25);
        assert_eq!(v.median_duration_s, 0.75);
        assert_eq!(v.n_events, 1);
    }

    #[test]
    fn output_is_sorted_by_channel_label() {
        let events = vec![
            event("PD1", 10.0, 20.0, 1.0),
            event("ATT1", 10.0, 20.0, 1.0),
            event("LAT2", 10.0, 20.0, 1.0),
        ];
        let labels: Vec<_> = aggregate_channel_features(&events)
            .iter()
            .map(|v| v.channel.raw().to_string())
            .collect();
        assert_eq!(labels, ["ATT1", "LAT2", "PD1"]);
    }

    #[test]
    fn empty_input_yields_empty_output() {
        let vectors = aggregate_channel_features::<f64>(&[]);
        assert!(vectors.is_empty());
    }

    fn vector(channel: &str, triple: [f64; 3]) -> ChannelFeatureVector<f64> {
        ChannelFeatureVector {
            channel: ChannelId::parse(channel).unwrap(),
            median_start_freq_hz: triple[0],
            median_end_freq_hz: triple[1],
            median_duration_s: triple[2],
            n_events: 1,
        }
    }

    #[test]
    fn standardize_column_1_2_3() {
        let vectors = vec![
            vector("A1", [1.0, 5.0, 1.0]),
            vector("A2", [2.0, 5.0, 2.0]),
            vector("A3", [3.0, 5.0, 3.0]),
        ];
        let m = standardize(&vectors);
        // frozen: (x - 2) / sqrt(2/3)
        assert_relative_eq!(m.values[0][START_FREQ], -1.224744871391589, max_relative = 1e-12);
        assert_relative_eq!(m.values[1][START_FREQ], 0.0, epsilon = 1e-12);
        assert_relative_eq!(m.values[2][START_FREQ], 1.224744871391589, max_relative = 1e-12);
        // constant column is degenerate and identically zero
        assert!(m.degenerate_features.contains(&END_FREQ));
        assert!(m.values.iter().all(|row| row[END_FREQ] == 0.0));
        assert!(!m.degenerate_features.contains(&START_FREQ));
    }

    #[test]
    fn single_channel_is_fully_degenerate() {
        let m = standardize(&[vector("A1", [1.0, 2.0, 3.0])]);
        assert_eq!(m.values, vec![[0.0, 0.0, 0.0]]);
        assert_eq!(m.degenerate_features.len(), 3);
    }

    #[test]
    fn non_degenerate_columns_have_zero_mean_unit_std() {
        let vectors = vec![
            vector("A1", [1.5, 9.0, 0.4]),
            vector("A2", [2.5, 25.0, 1.2]),
            vector("A3", [14.0, 14.9, 2.8]),
            vector("A4", [7.25, 9.6, 0.9]),
        ];
        let m = standardize(&vectors);
        for col in 0..N_FEATURES {
            assert!(!m.degenerate_features.contains(&col));
            let n = m.values.len() as f64;
            let mean: f64 = m.values.iter().map(|r| r[col]).sum::<f64>() / n;
            let var: f64 = m.values.iter().map(|r| (r[col] - mean).powi(2)).sum::<f64>() / n;
            assert!(mean.abs() < 1e-9, "col {col} mean {mean}");
            assert!((var.sqrt() - 1.0).abs() < 1e-9, "col {col} std {}", var.sqrt());
        }
    }

    proptest! {
        #[test]
        fn median_is_permutation_invariant(
            values in proptest::collection::vec(0.01f64..100.0, 1..20),
            seed in any::<u64>(),
        ) {
            let baseline = median(&mut values.clone());
            // deterministic shuffle driven by the seed
            let mut shuffled = values.clone();
            let n = shuffled.len();
            let mut state = seed | 1;
            for i in (1..n).rev() {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let j = (state >> 33) as usize % (i + 1);
                shuffled.swap(i, j);
            }
            prop_assert_eq!(median(&mut shuffled), baseline);
        }

        #[test]
        fn affine_map_of_raw_features_leaves_zscores_unchanged(
            triples in proptest::collection::vec(
                (0.1f64..100.0, 0.1f64..100.0, 0.01f64..10.0), 2..12),
            a in 0.5f64..3.0,
            b in -10.0f64..10.0,
        ) {
            let vectors: Vec<_> = triples
                .iter()
                .enumerate()
                .map(|(i, &(s, e, d))| vector(&format!("A{i}"), [s, e, d]))
                .collect();
            let mapped: Vec<_> = triples
                .iter()
                .enumerate()
                .map(|(i, &(s, e, d))| vector(&format!("A{i}"), [a * s + b, e, d]))
                .collect();
            let m0 = standardize(&vectors);
            let m1 = standardize(&mapped);
            for (r0, r1) in m0.values.iter().zip(&m1.values) {
                for col in 0..N_FEATURES {
                    prop_assert!((r0[col] - r1[col]).abs() < 1e-9,
                        "col {} differs: {} vs {}", col, r0[col], r1[col]);
                }
            }
        }
    }
}
