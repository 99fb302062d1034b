//! Seeded synthetic cohorts with planted SOZ-linked anomalies.
//!
//! Generation is driven by ChaCha8 seeded from `SynthSpec::seed`, so an
//! identical spec always yields a bit-identical cohort on every platform.
//! Inlier channels draw their latent feature triple from a tight normal
//! around `inlier_center`; each planted outlier channel is pushed from the
//! center along its own random unit direction by
//! `outlier_displacement_sigmas × inlier_spread`. The planted labels are
//! exactly the emitted SOZ set, so pipeline recovery can be checked against
//! ground truth.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, StandardUniform};

use crate::channelid::ChannelId;
use crate::ingest::{ChirpEvent, ClinicalRecord, Direction, Outcome};
use crate::scalar::Scalar;

/// Parameters of one synthetic patient.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec<F> {
    pub seed: u64,
    pub n_inlier_channels: usize,
    pub n_outlier_channels: usize,
    /// (start frequency Hz, end frequency Hz, duration s).
    pub inlier_center: [F; 3],
    /// Per-feature standard deviation of the inlier cloud.
    pub inlier_spread: [F; 3],
    /// Outlier distance from the center, in units of the spread.
    pub outlier_displacement_sigmas: F,
    pub events_per_channel: usize,
    /// Electrode prefixes cycled when naming channels.
    pub label_scheme: Vec<String>,
}

impl<F: Scalar> Default for SynthSpec<F> {
    fn default() -> Self {
        let f = |v: f64| F::from_f64(v).expect("default representable");
        SynthSpec {
            seed: 7,
            n_inlier_channels: 20,
            n_outlier_channels: 5,
            inlier_center: [f(10.0), f(18.0), f(2.0)],
            inlier_spread: [f(0.8), f(0.9), f(0.25)],
            outlier_displacement_sigmas: f(10.0),
            events_per_channel: 8,
            label_scheme: vec!["LAT".into(), "LAH".into(), "PD".into(), "ATT".into()],
        }
    }
}

/// One generated patient: events, clinical record and any generation warnings.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthOutput<F> {
    pub events: Vec<ChirpEvent<F>>,
    pub clinical: ClinicalRecord,
    pub warnings: Vec<String>,
}

fn channel_labels<F: Scalar>(spec: &SynthSpec<F>) -> Vec<ChannelId> {
    let prefixes: Vec<&str> = if spec.label_scheme.is_empty() {
        vec!["CH"]
    } else {
        spec.label_scheme.iter().map(String::as_str).collect()
    };
    let total = spec.n_inlier_channels + spec.n_outlier_channels;
    (0..total)
        .map(|i| {
            let prefix = prefixes[i % prefixes.len()];
            let number = i / prefixes.len() + 1;
            ChannelId::parse(&format!("{prefix}{number}")).expect("generated label parses")
        })
        .collect()
}

/// Generate one patient with the default id, outcome and progress fields.
pub fn generate_cohort<F>(spec: &SynthSpec<F>) -> SynthOutput<F>
where
    F: Scalar,
    StandardNormal: Distribution<F>,
    StandardUniform: Distribution<F>,
{
    generate_patient(spec, "synth001", Outcome::Na, "")
}

/// Generate one named patient.
pub fn generate_patient<F>(
    spec: &SynthSpec<F>,
    patient_id: &str,
    outcome: Outcome,
    post_op_progress: &str,
) -> SynthOutput<F>
where
    F: Scalar,
    StandardNormal: Distribution<F>,
    StandardUniform: Distribution<F>,
{
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut warnings = Vec::new();
    let three = F::from_f64(3.0).expect("3 representable");
    if spec.n_outlier_channels > 0 && spec.outlier_displacement_sigmas < three {
        warnings.push(format!(
            "outlier displacement {} is below 3 spreads; separation from the inlier cloud is not guaranteed",
            spec.outlier_displacement_sigmas
        ));
    }

    let labels = channel_labels(spec);
    let n_inliers = spec.n_inlier_channels;
    let floor = F::from_f64(1e-3).expect("floor representable");
    let tenth = F::from_f64(0.1).expect("0.1 representable");

    let mut events = Vec::with_capacity(labels.len() * spec.events_per_channel);
    for (i, label) in labels.iter().enumerate() {
        let mut normal = || -> F { StandardNormal.sample(&mut rng) };
        let latent: [F; 3] = if i < n_inliers {
            let mut v = [F::zero(); 3];
            for j in 0..3 {
                v[j] = spec.inlier_center[j] + spec.inlier_spread[j] * normal();
            }
            v
        } else {
            // unit direction, re-drawn if degenerate
            let mut dir = [F::zero(); 3];
            loop {
                let mut norm_sq = F::zero();
                for d in dir.iter_mut() {
                    *d = normal();
                    norm_sq = norm_sq + *d * *d;
                }
                let norm = norm_sq.sqrt();
                if norm > F::from_f64(1e-6).unwrap() {
                    for d in dir.iter_mut() {
                        *d = *d / norm;
                    }
                    break;
                }
            }
            let mut v = [F::zero(); 3];
            for j in 0..3 {
                v[j] = spec.inlier_center[j]
                    + spec.outlier_displacement_sigmas * spec.inlier_spread[j] * dir[j];
            }
            v
        };

        for e in 0..spec.events_per_channel {
            // event noise is a tenth of the channel spread, so medians stay
            // close to the latent triple
            let mut triple = [F::zero(); 3];
            for j in 0..3 {
                let noise: F = StandardNormal.sample(&mut rng);
                triple[j] = (latent[j] + spec.inlier_spread[j] * tenth * noise).max(floor);
            }
            let [start_freq, end_freq, duration] = triple;
            let onset_time = F::from_count(e) * F::from_f64(10.0).unwrap();
            let u1: F = StandardUniform.sample(&mut rng);
            let u2: F = StandardUniform.sample(&mut rng);
            let direction = if end_freq > start_freq {
                Direction::Up
            } else if end_freq < start_freq {
                Direction::Down
            } else {
                Direction::Flat
            };
            events.push(ChirpEvent {
                patient_id: patient_id.to_string(),
                channel: label.clone(),
                onset_time_s: onset_time,
                offset_time_s: onset_time + duration,
                onset_freq_hz: start_freq,
                offset_freq_hz: end_freq,
                r2: Some(F::from_f64(0.80).unwrap() + F::from_f64(0.19).unwrap() * u1),
                rmse: Some(F::from_f64(0.05).unwrap() + F::from_f64(0.10).unwrap() * u2),
                direction: Some(direction),
                poor_contact: false,
            });
        }
    }

    let soz_channels = labels[n_inliers..].iter().cloned().collect();
    let clinical = ClinicalRecord {
        patient_id: patient_id.to_string(),
        soz_channels,
        outcome,
        post_op_progress: post_op_progress.to_string(),
        engel_or_ilae: None,
        extra_features: std::collections::BTreeMap::new(),
    };

    SynthOutput {
        events,
        clinical,
        warnings,
    }
}

/// Generate a multi-patient fixture.
///
/// Patient k is named `synth{k+1:03}` and seeded with
/// `base.seed + k·0x9E3779B97F4A7C15` (wrapping); outcomes cycle through
/// S, F, NR, na and post-op progress alternates seizure-free / na so cohort
/// grouping has several groups to partition.
pub fn generate_fixture<F>(
    base: &SynthSpec<F>,
    n_patients: usize,
) -> (Vec<ChirpEvent<F>>, Vec<ClinicalRecord>, Vec<String>)
where
    F: Scalar,
    StandardNormal: Distribution<F>,
    StandardUniform: Distribution<F>,
{
    const OUTCOMES: [Outcome; 4] = [
        Outcome::Success,
        Outcome::Failure,
        Outcome::NoResection,
        Outcome::Na,
    ];
    let mut events = Vec::new();
    let mut clinical = Vec::new();
    let mut warnings = Vec::new();
    for k in 0..n_patients {
        let mut spec = base.clone();
        spec.seed = base.seed.wrapping_add((k as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let patient_id = format!("synth{:03}", k + 1);
        let outcome = OUTCOMES[k % OUTCOMES.len()];
        let progress = if k % 2 == 0 { "seizure free" } else { "" };
        let mut out = generate_patient(&spec, &patient_id, outcome, progress);
        events.append(&mut out.events);
        clinical.push(out.clinical);
        warnings.extend(out.warnings.into_iter().map(|w| format!("{patient_id}: {w}")));
    }
    (events, clinical, warnings)
}
